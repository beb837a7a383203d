"""Solvers: CDP, GRAD, DIPS, SMART and the reference baselines."""
