"""
Subcommand handlers behind `main.py`. Each handler takes the parsed
arguments, the composed configuration and an output stream, and returns the
process exit code: 0 when everything checked is satisfied/valid, 1 when
something is violated/invalid.
"""

import json
import sys
from argparse import Namespace
from pathlib import Path
from typing import Callable, Dict, List, Optional, TextIO

import numpy as np
from omegaconf import DictConfig

from .behaviour import Behaviour, Scenario, behaviour_matrix, validate
from .bell import (
    BellExpression,
    CATALOG_BUILDERS,
    evaluate,
    extremal_bell_from,
    local_bound,
    tsirelson_bound_search,
)
from .closed_forms import pd_singular_values
from .conditions import (
    bound_ineq2,
    dual_certificate_correlator,
    dual_certificate_ineq2,
    dual_certificate_ineq4,
    run_checks,
)
from .errors import EnumerationLimitError, InvalidParameterError, StructuralError
from .formats.behaviour_json import dump_behaviour, load_behaviour, parse_behaviour
from .formats.matrix_csv import (
    dump_matrix,
    load_expression,
    parse_matrix,
    save_expression,
    write_table,
)
from .generators import (
    enumerate_ldbs,
    enumerate_pr_boxes_2222,
    fully_mixed,
    isotropic,
    max_ent_behaviour,
    pr_box_2d,
    pr_box_mm22_lift,
    random_ns_mixture,
)
from .numlin import (
    frobenius_norm,
    frobenius_trace_bound,
    inner,
    pinching_lower_bound,
    spectral_norm,
    trace_norm,
)
from .slice_scan import ExpressionThreshold, SliceSpec, scan_slice
from .utils import ConditionId, MatrixKind, get_logger

logger = get_logger(__name__)

FAMILIES = ("ldb", "pr2d", "mm22", "maxent", "mixed", "isotropic", "pr2222", "random")
SLICE_HEADER = ("q", "p", "measured", "bound", "margin", "satisfied", "valid")


def parse_scenario(text: str) -> Scenario:
    """`2,2,3,3` -> Scenario(m_a=2, m_b=2, d_a=3, d_b=3)."""
    try:
        sizes = [int(part) for part in text.split(",")]
    except ValueError:
        raise StructuralError(f"Scenario must be four integers 'mA,mB,dA,dB', got {text!r}")
    if len(sizes) != 4:
        raise StructuralError(f"Scenario must be four integers 'mA,mB,dA,dB', got {text!r}")
    return Scenario(*sizes)


def read_behaviour(source: str) -> Behaviour:
    if source == "-":
        return parse_behaviour(sys.stdin.read())
    return load_behaviour(source)


def resolve_expression(source: str) -> BellExpression:
    """Catalog key (g_chsh, g_chsh_shifted, g_phi3) or the path of an expression CSV."""
    if source in CATALOG_BUILDERS:
        return CATALOG_BUILDERS[source]()
    return load_expression(source)


def read_correlator_weights(source: Optional[str]) -> Optional[np.ndarray]:
    if source is None:
        return None
    path = Path(source)
    if not path.is_file():
        raise StructuralError(f"Correlator weight file not found: {path}")
    return parse_matrix(path.read_text(encoding="utf-8"))


def _emit(out: TextIO, payload: dict):
    out.write(json.dumps(payload) + "\n")


def _matrix_kind(value: str) -> MatrixKind:
    try:
        return MatrixKind(value)
    except ValueError:
        raise InvalidParameterError(
            f"Unknown matrix kind {value!r}, expected one of {[k.value for k in MatrixKind]}"
        )


def cmd_validate(args: Namespace, cfg: DictConfig, out: TextIO) -> int:
    b = read_behaviour(args.input)
    report = validate(b, cfg.tolerance.validation)
    _emit(
        out,
        {
            "scenario": str(b.scenario),
            "valid": report.ok,
            "violations": [v.to_dict() for v in report.violations],
        },
    )
    return 0 if report.ok else 1


def _require(args: Namespace, name: str, family: str):
    if getattr(args, name) is None:
        raise InvalidParameterError(f"Family '{family}' needs --{name.replace('_', '-')}")
    return getattr(args, name)


def generate_family(args: Namespace) -> Behaviour:
    family = args.family
    scenario = parse_scenario(args.scenario) if args.scenario else None
    if family == "ldb":
        ldbs = enumerate_ldbs(scenario or Scenario(2, 2, 2, 2))
        index = args.index or 0
        if not 0 <= index < len(ldbs):
            raise InvalidParameterError(f"LDB index must be in 0..{len(ldbs) - 1}, got {index}")
        return ldbs[index]
    if family == "pr2d":
        return pr_box_2d(_require(args, "d", family), scenario)
    if family == "mm22":
        return pr_box_mm22_lift(_require(args, "m", family))
    if family == "maxent":
        return max_ent_behaviour(_require(args, "d", family))
    if family == "mixed":
        return fully_mixed(scenario or Scenario(2, 2, 2, 2))
    if family == "isotropic":
        box = pr_box_2d(args.d or 2, scenario)
        return isotropic(box, _require(args, "v", family))
    if family == "pr2222":
        index = args.index or 0
        boxes = list(enumerate_pr_boxes_2222())
        if not 0 <= index < len(boxes):
            raise InvalidParameterError(f"PR box index must be in 0..{len(boxes) - 1}, got {index}")
        return boxes[index]
    if family == "random":
        rng = np.random.default_rng(args.seed)
        return random_ns_mixture(args.m or 2, rng, args.terms)
    raise InvalidParameterError(f"Unknown family {family!r}, expected one of {FAMILIES}")


def cmd_generate(args: Namespace, cfg: DictConfig, out: TextIO) -> int:
    b = generate_family(args)
    text = dump_behaviour(b) + "\n"
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
        logger.info(f"{args.family} behaviour in {b.scenario} written to {args.output}")
    else:
        out.write(text)
    return 0


def cmd_matrix(args: Namespace, cfg: DictConfig, out: TextIO) -> int:
    b = read_behaviour(args.input)
    text = dump_matrix(behaviour_matrix(b, _matrix_kind(args.kind)), cfg.output.digits)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        out.write(text)
    return 0


def _diagonal_blocks(s: Scenario, kind: MatrixKind):
    """Block sizes of the input-diagonal (or output-diagonal) pinching, if square."""
    if kind == MatrixKind.OUTPUT_MAJOR_PPRIME:
        if s.d_a != s.d_b:
            return None
        return [s.m_a] * s.d_a, [s.m_b] * s.d_b
    if s.m_a != s.m_b:
        return None
    return [s.d_a] * s.m_a, [s.d_b] * s.m_b


def cmd_norms(args: Namespace, cfg: DictConfig, out: TextIO) -> int:
    b = read_behaviour(args.input)
    kind = _matrix_kind(args.kind)
    data = behaviour_matrix(b, kind).data
    blocks = _diagonal_blocks(b.scenario, kind)
    _emit(
        out,
        {
            "scenario": str(b.scenario),
            "kind": kind.value,
            "trace": trace_norm(data),
            "spectral": spectral_norm(data),
            "frobenius": frobenius_norm(data),
            "pinching": pinching_lower_bound(data, *blocks) if blocks else None,
            "frobenius_bound": frobenius_trace_bound(data),
        },
    )
    return 0


def _conditions(args: Namespace, b: Behaviour, has_expression: bool, has_weights: bool):
    if args.condition:
        return [ConditionId(c) for c in args.condition]
    conditions = [ConditionId.THM1, ConditionId.THM2]
    if has_expression:
        conditions += [ConditionId.INEQ2, ConditionId.INEQ4]
    if b.scenario.is_two_outcome:
        conditions += [ConditionId.CORR_NORM, ConditionId.THM8]
        if has_weights:
            conditions += [ConditionId.CORR_EPPING, ConditionId.INEQ15]
    return conditions


def cmd_check(args: Namespace, cfg: DictConfig, out: TextIO) -> int:
    b = read_behaviour(args.input)
    expression = resolve_expression(args.expression) if args.expression else None
    weights = read_correlator_weights(args.correlator)
    conditions = _conditions(args, b, expression is not None, weights is not None)
    reports = run_checks(
        b,
        conditions,
        tol=cfg.tolerance.condition,
        expression=expression,
        correlator_weights=weights,
    )
    validity = validate(b, cfg.tolerance.validation)
    if not validity.ok:
        logger.warning(
            f"{args.input} is not a valid behaviour ({len(validity.violations)} violations)"
        )
    for report in reports:
        _emit(out, {**report.to_dict(), "valid": validity.ok})
    return 0 if validity.ok and all(r.satisfied for r in reports) else 1


def cmd_bell_bound(args: Namespace, cfg: DictConfig, out: TextIO) -> int:
    G = resolve_expression(args.expression)
    payload = {"expression": G.name, "scenario": str(G.scenario), "ineq2_bound": bound_ineq2(G)}
    try:
        payload["local_bound"] = local_bound(G, int(cfg.local_bound.max_vertices))
    except EnumerationLimitError as e:
        logger.warning(str(e))
        payload["local_bound"] = None
    if args.search:
        search_cfg = cfg.tsirelson_search
        result = tsirelson_bound_search(
            G,
            offsets=list(search_cfg.offsets),
            scale_bounds=tuple(search_cfg.scale_bounds),
            scale_points=int(search_cfg.scale_points),
            max_grid_cells=int(search_cfg.max_grid_cells),
            sweeps=int(search_cfg.sweeps),
        )
        payload["search_bound"] = result.bound
        payload["search_offsets"] = result.form.block_offsets.tolist()
        payload["search_scale"] = result.form.scale
    _emit(out, payload)
    return 0


def cmd_extremal_bell(args: Namespace, cfg: DictConfig, out: TextIO) -> int:
    b = read_behaviour(args.input)
    matrix = behaviour_matrix(b, _matrix_kind(args.kind))
    G = extremal_bell_from(matrix, name=args.name)
    if args.output:
        save_expression(G, args.output, cfg.output.digits)
        _emit(
            out,
            {
                "expression": G.name,
                "value": inner(matrix_input_major(matrix), G.g),
                "trace_norm": trace_norm(matrix.data),
                "spectral_norm": spectral_norm(G.g),
                "ineq2_bound": bound_ineq2(G),
                "behaviour_value": evaluate(G, b),
            },
        )
    else:
        out.write(dump_matrix(G.g, cfg.output.digits))
    return 0


def matrix_input_major(matrix) -> np.ndarray:
    """Input-major data of a behaviour matrix (output-major matrices are permuted back)."""
    s = matrix.scenario
    if matrix.kind == MatrixKind.OUTPUT_MAJOR_PPRIME:
        return (
            matrix.data.reshape(s.d_a, s.m_a, s.d_b, s.m_b)
            .transpose(1, 0, 3, 2)
            .reshape(s.n_a, s.n_b)
        )
    return matrix.data


def cmd_closed_forms(args: Namespace, cfg: DictConfig, out: TextIO) -> int:
    spectrum = pd_singular_values(args.d)
    header = [
        "j",
        "re_lambda_a",
        "im_lambda_a",
        "re_lambda_b",
        "im_lambda_b",
        "re_lambda_c",
        "im_lambda_c",
        "sigma_minus",
        "sigma_plus",
    ]
    rows = (
        (
            j,
            spectrum.lambda_a[j].real,
            spectrum.lambda_a[j].imag,
            spectrum.lambda_b[j].real,
            spectrum.lambda_b[j].imag,
            spectrum.lambda_c[j].real,
            spectrum.lambda_c[j].imag,
            spectrum.sigma_minus[j],
            spectrum.sigma_plus[j],
        )
        for j in range(args.d)
    )
    write_table(out, header, rows, cfg.output.digits)
    return 0


def cmd_slice(args: Namespace, cfg: DictConfig, out: TextIO) -> int:
    p1, p2 = read_behaviour(args.p1), read_behaviour(args.p2)
    base = read_behaviour(args.base) if args.base else fully_mixed(p1.scenario)
    if args.expression:
        if args.threshold is None:
            raise InvalidParameterError("--expression needs --threshold")
        condition = ExpressionThreshold(resolve_expression(args.expression), args.threshold)
    else:
        condition = ConditionId(args.condition)
    spec = SliceSpec(
        p1=p1,
        p2=p2,
        base=base,
        condition=condition,
        resolution=args.resolution or int(cfg.slice.resolution),
        q_range=tuple(args.q_range),
        p_range=tuple(args.p_range),
        tol=cfg.tolerance.condition,
        validation_tol=cfg.tolerance.validation,
    )
    result = scan_slice(spec, workers=args.workers or int(cfg.slice.workers))
    digits = cfg.output.digits
    if args.output:
        with open(args.output, "w", newline="", encoding="utf-8") as f:
            write_table(f, SLICE_HEADER, result.rows(), digits)
    else:
        write_table(out, SLICE_HEADER, result.rows(), digits)
    if args.boundary_output:
        rows = (
            (n, point[0], point[1])
            for n, polyline in enumerate(result.boundary)
            for point in polyline
        )
        with open(args.boundary_output, "w", newline="", encoding="utf-8") as f:
            write_table(f, ("polyline", "q", "p"), rows, digits)
    return 0


def cmd_certify(args: Namespace, cfg: DictConfig, out: TextIO) -> int:
    b = read_behaviour(args.behaviour) if args.behaviour else None
    variant = args.variant
    if variant in ("correlator", "correlator-centered"):
        weights = read_correlator_weights(args.correlator)
        if weights is None:
            raise InvalidParameterError(f"Variant '{variant}' needs --correlator")
        name = Path(args.correlator).stem
        cert = dual_certificate_correlator(weights, b, centered=variant == "correlator-centered")
    else:
        if not args.expression:
            raise InvalidParameterError(f"Variant '{variant}' needs --expression")
        G = resolve_expression(args.expression)
        name = G.name
        if variant == "ineq4":
            if b is None:
                raise InvalidParameterError("Variant 'ineq4' needs --behaviour")
            cert = dual_certificate_ineq4(b, G)
        else:
            cert = dual_certificate_ineq2(G, b)
    payload = {"expression": name, "variant": variant, **cert.to_dict()}
    payload["feasible"] = cert.feasible(cfg.tolerance.condition)
    _emit(out, payload)
    return 0 if payload["feasible"] else 1


COMMANDS: Dict[str, Callable[[Namespace, DictConfig, TextIO], int]] = {
    "validate": cmd_validate,
    "generate": cmd_generate,
    "matrix": cmd_matrix,
    "norms": cmd_norms,
    "check": cmd_check,
    "bell-bound": cmd_bell_bound,
    "extremal-bell": cmd_extremal_bell,
    "closed-forms": cmd_closed_forms,
    "slice": cmd_slice,
    "certify": cmd_certify,
}


def run_command(args: Namespace, cfg: DictConfig, out: Optional[TextIO] = None) -> int:
    return COMMANDS[args.command](args, cfg, out or sys.stdout)


def condition_choices() -> List[str]:
    return [c.value for c in ConditionId]
