"""
Behaviour JSON documents:

    {"scenario": {"mA": 2, "mB": 2, "dA": 2, "dB": 2}, "p": [[[[...]]]]}

with p nested as p[x][y][a][b]. Inputs and outputs are numbered from 1 in
documentation; the nesting order is the 0-based array order.
"""

import json
from pathlib import Path
from typing import List, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from ..behaviour import Behaviour, Scenario
from ..errors import StructuralError
from ..utils import get_logger

logger = get_logger(__name__)

PathLike = Union[str, Path]


class ScenarioModel(BaseModel):
    model_config = ConfigDict(populate_by_name=True, extra="forbid")

    m_a: int = Field(..., alias="mA", ge=1, description="Number of Alice's inputs")
    m_b: int = Field(..., alias="mB", ge=1, description="Number of Bob's inputs")
    d_a: int = Field(..., alias="dA", ge=1, description="Number of Alice's outputs")
    d_b: int = Field(..., alias="dB", ge=1, description="Number of Bob's outputs")


class BehaviourDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    scenario: ScenarioModel
    p: List[List[List[List[float]]]] = Field(..., description="P(ab|xy) nested as p[x][y][a][b]")


def _line_of(text: str, key: str) -> Union[int, None]:
    """1-based line of the first occurrence of a JSON key, if any."""
    for n, line in enumerate(text.splitlines(), start=1):
        if f'"{key}"' in line:
            return n
    return None


def parse_behaviour(text: str) -> Behaviour:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise StructuralError(f"Malformed behaviour JSON: {e.msg}", line=e.lineno) from e

    try:
        doc = BehaviourDocument.model_validate(raw)
    except ValidationError as e:
        err = e.errors()[0]
        loc = [str(part) for part in err["loc"]]
        key = next((part for part in reversed(loc) if not part.isdigit()), None)
        raise StructuralError(
            f"Invalid behaviour document: {err['msg']}",
            field=".".join(loc) or None,
            line=_line_of(text, key) if key else None,
        ) from e

    s = Scenario(doc.scenario.m_a, doc.scenario.m_b, doc.scenario.d_a, doc.scenario.d_b)
    try:
        p = np.array(doc.p, dtype=float)
    except ValueError as e:
        raise StructuralError(
            "Probability table is ragged", field="p", line=_line_of(text, "p")
        ) from e
    return Behaviour(s, p)


def load_behaviour(path: PathLike) -> Behaviour:
    path = Path(path)
    if not path.is_file():
        raise StructuralError(f"Behaviour file not found: {path}")
    b = parse_behaviour(path.read_text(encoding="utf-8"))
    logger.debug(f"Loaded behaviour in {b.scenario} from {path}")
    return b


def dump_behaviour(b: Behaviour) -> str:
    s = b.scenario
    doc = {
        "scenario": {"mA": s.m_a, "mB": s.m_b, "dA": s.d_a, "dB": s.d_b},
        # + 0.0 folds -0.0 into 0.0
        "p": (b.p + 0.0).tolist(),
    }
    return json.dumps(doc)


def save_behaviour(b: Behaviour, path: PathLike):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dump_behaviour(b) + "\n", encoding="utf-8")
    logger.info(f"Behaviour in {b.scenario} saved to {path}")
