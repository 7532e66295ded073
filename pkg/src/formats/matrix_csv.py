"""
CSV matrices and tables. Every float is written with a fixed number of
significant digits (17 by default), '.' decimals, ',' separators and a header
row, so identical inputs give byte-identical files.

Bell expressions are stored as their input-major coefficient matrix next to a
JSON sidecar `{"scenario": {...}, "name": ...}` with the same stem.
"""

import csv
import io
import json
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, TextIO, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, ValidationError

from ..behaviour import BehaviourMatrix, Scenario
from ..bell import BellExpression
from ..errors import StructuralError
from ..utils import MatrixKind, format_float, get_logger
from .behaviour_json import ScenarioModel

logger = get_logger(__name__)

PathLike = Union[str, Path]


class ExpressionSidecar(BaseModel):
    model_config = ConfigDict(extra="forbid")

    scenario: ScenarioModel
    name: Optional[str] = None


def column_labels(scenario: Optional[Scenario], kind: Optional[MatrixKind], n_cols: int) -> List[str]:
    """1-based column labels: y1b1, y1b2, ... (input-major) or b1y1, ... (output-major)."""
    if scenario is None or kind is None:
        return [f"c{k + 1}" for k in range(n_cols)]
    if kind == MatrixKind.OUTPUT_MAJOR_PPRIME:
        return [f"b{b + 1}y{y + 1}" for b in range(scenario.d_b) for y in range(scenario.m_b)]
    return [f"y{y + 1}b{b + 1}" for y in range(scenario.m_b) for b in range(scenario.d_b)]


def _cell(value, digits: int) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    return format_float(value, digits)


def write_table(
    stream: TextIO, header: Sequence[str], rows: Iterable[Sequence], digits: int = 17
):
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v, digits) for v in row])


def write_matrix(
    stream: TextIO,
    data,
    scenario: Optional[Scenario] = None,
    kind: Optional[MatrixKind] = None,
    digits: int = 17,
):
    data = np.asarray(data, dtype=float)
    write_table(stream, column_labels(scenario, kind, data.shape[1]), data.tolist(), digits)


def dump_matrix(matrix: Union[BehaviourMatrix, np.ndarray], digits: int = 17) -> str:
    buffer = io.StringIO()
    if isinstance(matrix, BehaviourMatrix):
        write_matrix(buffer, matrix.data, matrix.scenario, matrix.kind, digits)
    else:
        write_matrix(buffer, matrix, digits=digits)
    return buffer.getvalue()


def parse_matrix(text: str) -> np.ndarray:
    """Read a matrix CSV with a header row; errors carry the 1-based file line."""
    rows = list(csv.reader(io.StringIO(text)))
    if len(rows) < 2:
        raise StructuralError("Matrix CSV needs a header row and at least one data row")
    header, body = rows[0], rows[1:]
    data = []
    for n, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise StructuralError(
                f"Expected {len(header)} columns, found {len(row)}", line=n
            )
        values = []
        for label, cell in zip(header, row):
            try:
                values.append(float(cell))
            except ValueError:
                raise StructuralError(f"Not a number: {cell!r}", field=label, line=n)
        data.append(values)
    return np.array(data)


def save_expression(G: BellExpression, path: PathLike, digits: int = 17) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as f:
        write_matrix(f, G.g, G.scenario, MatrixKind.INPUT_MAJOR_P, digits)
    s = G.scenario
    sidecar = ExpressionSidecar(
        scenario=ScenarioModel(mA=s.m_a, mB=s.m_b, dA=s.d_a, dB=s.d_b), name=G.name
    )
    sidecar_path = path.with_suffix(".json")
    sidecar_path.write_text(sidecar.model_dump_json(by_alias=True) + "\n", encoding="utf-8")
    logger.info(f"Expression {G.name or ''} saved to {path} (+ {sidecar_path.name})")
    return path


def load_expression(path: PathLike) -> BellExpression:
    path = Path(path)
    sidecar_path = path.with_suffix(".json")
    for required in (path, sidecar_path):
        if not required.is_file():
            raise StructuralError(f"Expression file not found: {required}")
    try:
        sidecar = ExpressionSidecar.model_validate(json.loads(sidecar_path.read_text("utf-8")))
    except json.JSONDecodeError as e:
        raise StructuralError(f"Malformed sidecar {sidecar_path.name}: {e.msg}", line=e.lineno)
    except ValidationError as e:
        err = e.errors()[0]
        raise StructuralError(
            f"Invalid sidecar {sidecar_path.name}: {err['msg']}",
            field=".".join(str(part) for part in err["loc"]),
        )
    s = sidecar.scenario
    g = parse_matrix(path.read_text(encoding="utf-8"))
    return BellExpression(Scenario(s.m_a, s.m_b, s.d_a, s.d_b), g, sidecar.name or path.stem)
