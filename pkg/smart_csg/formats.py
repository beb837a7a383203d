"""Problem files and result records.

Binary problem layout: ``b"CSGV"``, version byte 0x01, one byte n, then
2**n little-endian float64 values indexed by coalition mask. A CSV import
path (``mask,value`` rows) exists for small hand-written instances.
"""

import json
import logging
import os
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field

from smart_csg.core.coalition import MAX_AGENTS, STAT_KEYS, CharacteristicFunction, SolverResult
from smart_csg.core.errors import ProblemFileException, ValidationException

logger = logging.getLogger(__name__)

MAGIC = b"CSGV"
FORMAT_VERSION = 1
HEADER_SIZE = 6

RECORD_COLUMNS = ["n", "algorithm", "distribution", "seed", "generator", "value", "optimal", "structure",
                  "elapsed_ns"] + [key for key in STAT_KEYS if key != "elapsed_ns"] + ["status", "error"]


def encode_problem(v: CharacteristicFunction) -> bytes:
    return MAGIC + bytes([FORMAT_VERSION, v.n]) + v.values.astype("<f8").tobytes()


def decode_problem(data: bytes, source: str = "<bytes>") -> CharacteristicFunction:
    """Parse the binary problem layout.

    Args:
        data: File contents
        source: Name used in error messages

    Returns:
        CharacteristicFunction
    """
    if len(data) < HEADER_SIZE or data[:4] != MAGIC:
        raise ProblemFileException(f"unrecognized problem file: {source}", source)
    version, n = data[4], data[5]
    if version != FORMAT_VERSION:
        raise ProblemFileException(f"unsupported problem file version {version} in {source}", source)
    if not 1 <= n <= MAX_AGENTS:
        raise ProblemFileException(f"problem file {source} declares n={n}, expected 1..{MAX_AGENTS}", source)
    expected = HEADER_SIZE + 8 * (1 << n)
    if len(data) != expected:
        raise ProblemFileException(f"problem file {source} has {len(data)} bytes, expected {expected} for n={n}",
                                   source)
    values = np.frombuffer(data, dtype="<f8", offset=HEADER_SIZE)
    try:
        return CharacteristicFunction(n, values)
    except ValidationException as e:
        raise ProblemFileException(f"invalid problem file {source}: {'; '.join(e.validation_errors)}", source)


def write_problem(v: CharacteristicFunction, path: str):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    with open(path, "wb") as f:
        f.write(encode_problem(v))
    logger.info(f"Problem with n={v.n} written to {path}")


def read_problem(path: str) -> CharacteristicFunction:
    try:
        with open(path, "rb") as f:
            data = f.read()
    except OSError as e:
        raise ProblemFileException(f"cannot read problem file {path}: {e.strerror}", path)
    return decode_problem(data, path)


def read_csv_problem(path: str, n: Optional[int] = None) -> CharacteristicFunction:
    """Read ``mask,value`` rows; unlisted coalitions are worth 0.

    Args:
        path: CSV file with a ``mask,value`` header
        n: Agent count; inferred from the largest mask when omitted

    Returns:
        CharacteristicFunction
    """
    try:
        frame = pd.read_csv(path, comment="#", skipinitialspace=True)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ProblemFileException(f"cannot read CSV problem {path}: {e}", path)
    if not {"mask", "value"} <= set(frame.columns):
        raise ProblemFileException(f"CSV problem {path} needs mask and value columns", path)
    if frame.empty:
        raise ProblemFileException(f"CSV problem {path} has no rows", path)
    if frame["mask"].duplicated().any():
        raise ProblemFileException(f"CSV problem {path} lists a mask twice", path)
    masks = frame["mask"].astype("int64")
    if (masks <= 0).any():
        raise ProblemFileException(f"CSV problem {path} has non-positive masks", path)
    n = n or int(masks.max()).bit_length()
    if not 1 <= n <= MAX_AGENTS or int(masks.max()) >= (1 << n):
        raise ProblemFileException(f"CSV problem {path} does not fit n={n}", path)
    values = np.zeros(1 << n, dtype=np.float64)
    values[masks.to_numpy()] = frame["value"].astype("float64").to_numpy()
    try:
        return CharacteristicFunction(n, values)
    except ValidationException as e:
        raise ProblemFileException(f"invalid CSV problem {path}: {'; '.join(e.validation_errors)}", path)


def load_problem(path: str) -> CharacteristicFunction:
    """Binary or CSV problem, chosen by extension."""
    if path.lower().endswith(".csv"):
        return read_csv_problem(path)
    return read_problem(path)


class ResultRecord(BaseModel):
    """One solve as printed by the CLI and written by ``bench``."""

    n: int
    algorithm: str
    distribution: Optional[str] = None
    seed: Optional[int] = None
    generator: Optional[str] = None
    value: Optional[float] = None
    optimal: bool = False
    structure: List[List[int]] = Field(default_factory=list)
    elapsed_ns: int = 0
    stats: Dict[str, int] = Field(default_factory=dict)
    status: str = "ok"
    error: Optional[str] = None

    @classmethod
    def from_result(cls, result: SolverResult, n: int, **meta: Any) -> "ResultRecord":
        return cls(n=n, algorithm=result.algorithm, value=result.value, optimal=result.optimal,
                   structure=result.structure.agents(), elapsed_ns=result.stats.get("elapsed_ns", 0),
                   stats={k: v for k, v in result.stats.items() if k != "elapsed_ns"}, **meta)

    def to_row(self) -> Dict[str, Any]:
        """Flat mapping in RECORD_COLUMNS order; the structure becomes a JSON string."""
        row = self.model_dump(exclude={"stats", "structure"})
        row["structure"] = json.dumps(self.structure)
        for key in STAT_KEYS:
            if key != "elapsed_ns":
                row[key] = self.stats.get(key, 0)
        return {column: row.get(column) for column in RECORD_COLUMNS}


def records_frame(records: List[ResultRecord]) -> pd.DataFrame:
    return pd.DataFrame([record.to_row() for record in records], columns=RECORD_COLUMNS)


def records_to_csv(records: List[ResultRecord]) -> str:
    return records_frame(records).to_csv(index=False, lineterminator="\n")
