"""Seeded benchmark instances.

Every family draws one value per coalition, in mask order, from a Philox
counter-based generator keyed by the seed. The same (name, parameters, n,
seed) therefore gives the same table on every platform.

Defaults (override any of them in the spec string):

    uniform           U(0, b*|C|)                        b=1
    normal            N(mu*|C|, variance*|C|)            mu=10, variance=0.01
    modified_uniform  uniform + U(0, bonus) w.p. p       p=0.2, bonus=50
    modified_normal   normal + U(0, bonus) w.p. p        p=0.2, bonus=50
    exponential       |C| * Exp(scale)                   scale=1
    beta              |C| * Beta(a, b)                   a=b=0.5
    gamma             |C| * Gamma(shape, scale)          shape=2, scale=2
    weibull           |C| * scale * Weibull(shape)       shape=2, scale=1
    zipf              |C| * min(Zipf(a), cutoff)         a=2, cutoff=1000
    sva_beta          sum of agent weights * 2*Beta(a, b)  a=b=2, weights U(0,1)
"""

import logging
from typing import Callable, Dict, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from smart_csg.core.coalition import MAX_AGENTS, CharacteristicFunction, popcount_table
from smart_csg.core.errors import InvalidArgumentException

logger = logging.getLogger(__name__)

GENERATOR_ID = "numpy.Philox/1"

DistributionName = Literal[
    "uniform", "normal", "modified_uniform", "modified_normal", "exponential",
    "beta", "gamma", "zipf", "sva_beta", "weibull",
]

DEFAULT_PARAMETERS: Dict[str, Dict[str, float]] = {
    "uniform": {"b": 1.0},
    "normal": {"mu": 10.0, "variance": 0.01},
    "modified_uniform": {"b": 1.0, "p": 0.2, "bonus": 50.0},
    "modified_normal": {"mu": 10.0, "variance": 0.01, "p": 0.2, "bonus": 50.0},
    "exponential": {"scale": 1.0},
    "beta": {"a": 0.5, "b": 0.5},
    "gamma": {"shape": 2.0, "scale": 2.0},
    "weibull": {"shape": 2.0, "scale": 1.0},
    "zipf": {"a": 2.0, "cutoff": 1000.0},
    "sva_beta": {"a": 2.0, "b": 2.0},
}

# Parameters that must be strictly positive; the rest must be non-negative.
_POSITIVE = {"b", "scale", "shape", "a", "cutoff", "bonus"}


class DistributionSpec(BaseModel):
    """A value distribution, its parameter overrides and the seed."""

    model_config = ConfigDict(frozen=True)

    name: DistributionName
    parameters: Dict[str, float] = Field(default_factory=dict)
    seed: int = Field(default=0, ge=0, lt=2 ** 64)

    def resolved(self) -> Dict[str, float]:
        """Defaults merged with the overrides, after validation."""
        defaults = DEFAULT_PARAMETERS[self.name]
        unknown = sorted(set(self.parameters) - set(defaults))
        if unknown:
            raise InvalidArgumentException(
                f"Unknown parameter(s) {', '.join(unknown)} for {self.name}; expected {', '.join(sorted(defaults))}",
                "distributions")
        merged = {**defaults, **self.parameters}
        for key, value in merged.items():
            if not np.isfinite(value) or value < 0 or (key in _POSITIVE and value == 0):
                raise InvalidArgumentException(f"Invalid value {value} for {self.name} parameter {key}",
                                               "distributions")
        if self.name == "zipf" and merged["a"] <= 1:
            raise InvalidArgumentException("zipf parameter a must exceed 1", "distributions")
        if "p" in merged and merged["p"] > 1:
            raise InvalidArgumentException("probability p must be at most 1", "distributions")
        return merged

    def __str__(self) -> str:
        if not self.parameters:
            return self.name
        return f"{self.name}:" + ",".join(f"{k}={v:g}" for k, v in sorted(self.parameters.items()))


def parse_spec(text: str, seed: int = 0) -> DistributionSpec:
    """Parse ``name`` or ``name:key=val,key=val``.

    Args:
        text: Spec string as given on the command line
        seed: Seed for the generator

    Returns:
        DistributionSpec
    """
    name, _, rest = text.strip().partition(":")
    parameters: Dict[str, float] = {}
    for item in filter(None, (part.strip() for part in rest.split(","))):
        key, sep, value = item.partition("=")
        if not sep:
            raise InvalidArgumentException(f"Expected key=value in distribution spec, got {item!r}", "distributions")
        try:
            parameters[key.strip()] = float(value)
        except ValueError:
            raise InvalidArgumentException(f"Parameter {key.strip()} is not a number: {value!r}", "distributions")
    try:
        spec = DistributionSpec(name=name.strip(), parameters=parameters, seed=seed)
    except ValidationError as e:
        raise InvalidArgumentException(f"Invalid distribution spec {text!r}: {e.errors()[0]['msg']}", "distributions")
    spec.resolved()
    return spec


def _modified(base: Callable[[np.random.Generator, np.ndarray, Dict[str, float]], np.ndarray]):
    def draw(rng: np.random.Generator, sizes: np.ndarray, params: Dict[str, float]) -> np.ndarray:
        values = base(rng, sizes, params)
        hit = rng.random(sizes.size) < params["p"]
        bonus = rng.uniform(0.0, params["bonus"], sizes.size)
        return values + np.where(hit, bonus, 0.0)
    return draw


def _uniform(rng, sizes, params):
    return rng.uniform(0.0, params["b"] * sizes)


def _normal(rng, sizes, params):
    return rng.normal(params["mu"] * sizes, np.sqrt(params["variance"] * sizes))


def _sva_beta(rng, sizes, params):
    n = (sizes.size + 1).bit_length() - 1
    weights = rng.uniform(0.0, 1.0, n)
    sums = np.zeros(1, dtype=np.float64)
    for w in weights:
        sums = np.concatenate([sums, sums + w])
    return sums[1:] * 2.0 * rng.beta(params["a"], params["b"], sizes.size)


_SAMPLERS = {
    "uniform": _uniform,
    "normal": _normal,
    "modified_uniform": _modified(_uniform),
    "modified_normal": _modified(_normal),
    "exponential": lambda rng, sizes, p: sizes * rng.exponential(p["scale"], sizes.size),
    "beta": lambda rng, sizes, p: sizes * rng.beta(p["a"], p["b"], sizes.size),
    "gamma": lambda rng, sizes, p: sizes * rng.gamma(p["shape"], p["scale"], sizes.size),
    "weibull": lambda rng, sizes, p: sizes * p["scale"] * rng.weibull(p["shape"], sizes.size),
    "zipf": lambda rng, sizes, p: sizes * np.minimum(rng.zipf(p["a"], sizes.size), p["cutoff"]),
    "sva_beta": _sva_beta,
}


def make_generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed))


def generate(spec: DistributionSpec, n: int) -> CharacteristicFunction:
    """Draw a characteristic function for ``n`` agents.

    Args:
        spec: Distribution, parameters and seed
        n: Agent count (1..30)

    Returns:
        CharacteristicFunction with finite, non-negative values
    """
    if not 1 <= n <= MAX_AGENTS:
        raise InvalidArgumentException(f"Agent count must be in 1..{MAX_AGENTS}, got {n}", "distributions")
    params = spec.resolved()
    sizes = popcount_table(n)[1:].astype(np.float64)
    values = np.asarray(_SAMPLERS[spec.name](make_generator(spec.seed), sizes, params), dtype=np.float64)
    negative = int(np.count_nonzero(values < 0))
    if negative:
        logger.warning(f"{spec} n={n} seed={spec.seed}: clamped {negative} negative values to 0")
        values = np.maximum(values, 0.0)
    logger.debug(f"Generated {spec} for n={n} with seed {spec.seed}")
    return CharacteristicFunction(n, np.concatenate([[0.0], values]))
