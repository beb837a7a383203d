"""Tuning file persistence.

Tuning runs once per agent count, so results are kept as small JSON
documents keyed by n. Files are written with sorted keys: the same tuning
always produces the same bytes.
"""

import json
import logging
import os
from typing import Any, Dict, Optional

from smart_csg.core.errors import (
    MalformedTuningException, TuningFileNotFoundException, TuningMismatchException, ValidationException
)
from smart_csg.offline.sizes import CostModel, SizeSet
from smart_csg.offline.tuning import TuningResult, cost_units_for
from smart_csg.offline.validation import validate_against_schema, validate_tuning

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


def tuning_to_dict(tr: TuningResult) -> Dict[str, Any]:
    costs = cost_units_for(list(tr.cdp_pair) + list(tr.grad_sets.values()), tr.cost_model)
    return {
        "version": FORMAT_VERSION,
        "n": tr.n,
        "cost_model": {
            "unit_split_cost": tr.cost_model.unit_split_cost,
            "size_weights": {str(size): weight for size, weight in sorted(tr.cost_model.size_weights.items())},
            "scale_by_size": tr.cost_model.scale_by_size,
        },
        "ssd_objective": tr.ssd_objective,
        "cdp_pair": [list(sizes.evaluated()) for sizes in tr.cdp_pair],
        "grad": [
            {"omega": omega, "sizes": list(sizes.evaluated()), "cost": costs[sizes]}
            for omega, sizes in sorted(tr.grad_sets.items())
        ],
        "cost_units": {str(sizes): cost for sizes, cost in costs.items()},
    }


def tuning_from_dict(data: Dict[str, Any]) -> TuningResult:
    n = data["n"]
    cm = CostModel(**data["cost_model"])
    pair = tuple(SizeSet.from_sizes(n, sizes) for sizes in data["cdp_pair"])
    grad_sets = {float(entry["omega"]): SizeSet.from_sizes(n, entry["sizes"]) for entry in data["grad"]}
    return TuningResult(n, pair, dict(sorted(grad_sets.items())), cm,
                        cost_units_for(list(pair) + list(grad_sets.values()), cm),
                        data.get("ssd_objective", "minimax"))


def store_tuning(tr: TuningResult, path: str):
    """Write a tuning result as JSON.

    Args:
        tr: Tuning result to store
        path: Output file
    """
    document = tuning_to_dict(tr)
    errors = validate_against_schema(document)
    if errors:
        raise ValidationException("Tuning document does not match its schema", "offline", errors)
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    with open(path, "w") as f:
        json.dump(document, f, indent=2, sort_keys=True)
        f.write("\n")
    logger.info(f"Tuning for n={tr.n} saved to {path}")


def load_tuning(path: str, expected_n: Optional[int] = None) -> TuningResult:
    """Read and check a tuning file.

    Args:
        path: Tuning file
        expected_n: Agent count of the problem about to be solved

    Returns:
        The validated TuningResult
    """
    try:
        with open(path, "r") as f:
            document = json.load(f)
    except FileNotFoundError:
        raise TuningFileNotFoundException(f"Tuning file not found: {path}", path)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise MalformedTuningException(f"Tuning file is not valid JSON: {e}", path)

    errors = validate_against_schema(document) if isinstance(document, dict) else ["document is not an object"]
    if errors:
        logger.error(f"Tuning file {path} failed schema validation: {errors}")
        raise MalformedTuningException(f"Tuning file is malformed: {'; '.join(errors)}", path)

    if expected_n is not None and document["n"] != expected_n:
        raise TuningMismatchException(
            f"tuning/problem size mismatch: file is for n={document['n']}, problem has n={expected_n}",
            path, expected_n, document["n"])

    try:
        tr = tuning_from_dict(document)
    except ValueError as e:
        raise MalformedTuningException(f"Tuning file is malformed: {e}", path)
    validate_tuning(tr)
    logger.info(f"Loaded tuning for n={tr.n} from {path}")
    return tr
