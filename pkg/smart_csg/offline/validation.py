"""Validation utilities for tuning documents and results."""

from typing import Any, Dict, List

import jsonschema

from smart_csg.core.errors import ValidationException
from smart_csg.core.ipg import integer_partitions, reachable_subspaces
from smart_csg.offline.schemas import get_tuning_schema
from smart_csg.offline.tuning import TuningResult, coverage_threshold


def validate_against_schema(data: Dict[str, Any]) -> List[str]:
    """Validate a tuning document against the tuning schema.

    Args:
        data: Parsed JSON document

    Returns:
        List of validation errors (empty if validation succeeds)
    """
    validator = jsonschema.Draft7Validator(get_tuning_schema())
    return [error.message for error in validator.iter_errors(data)]


def tuning_errors(tr: TuningResult) -> List[str]:
    """Check the coverage guarantees a TuningResult must carry."""
    errors = []
    n = tr.n
    for sizes in list(tr.cdp_pair) + list(tr.grad_sets.values()):
        if sizes.n != n:
            errors.append(f"size set {sizes} was built for n={sizes.n}, tuning is for n={n}")
    if errors:
        return errors
    total = len(integer_partitions(n))
    covered = reachable_subspaces(n, tr.cdp_pair[0]) | reachable_subspaces(n, tr.cdp_pair[1])
    if len(covered) != total:
        missing = sorted(set(integer_partitions(n)) - covered)
        errors.append(f"cdp_pair {tr.cdp_pair[0]} + {tr.cdp_pair[1]} misses {len(missing)} subspaces, "
                      f"e.g. {list(missing[0])}")
    for omega, sizes in sorted(tr.grad_sets.items()):
        reached = len(reachable_subspaces(n, sizes))
        if reached < coverage_threshold(total, omega):
            errors.append(f"grad set {sizes} reaches {reached}/{total} subspaces, below omega={omega}")
    return errors


def validate_tuning(tr: TuningResult) -> None:
    errors = tuning_errors(tr)
    if errors:
        raise ValidationException(f"Tuning for n={tr.n} is invalid", "offline", errors)
