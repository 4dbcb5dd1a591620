from __future__ import annotations

import csv
import io
import json
import math
from typing import Any, Callable, Optional, Union

from .errors import InputError, InvalidPointError
from .lipschitz import LipschitzRecord, LipschitzReport, StraddleReport
from .spaces import EuclideanSpace, HyperbolicSpace, Space, TreeSpace
from .state import BarycenterResult, Configuration, ConvexBody, IdealPoint, SpacePoint, WeightedPoint

# Types:
Document = dict[str, Any]
FieldParser = Callable[[Any, str], Any]


def expect(value: Any, kind: Union[type, tuple[type, ...]], field: str) -> Any:
    if isinstance(value, bool) or not isinstance(value, kind):
        raise InputError(field, f"expected {getattr(kind, '__name__', kind)}, got {value!r}")
    return value


def parse_int(value: Any, field: str) -> int:
    return expect(value, int, field)


def parse_real(value: Any, field: str) -> float:
    x = float(expect(value, (int, float), field))
    if not math.isfinite(x):
        raise InputError(field, f"expected a finite number, got {value!r}")
    return x


def parse_str(value: Any, field: str) -> str:
    return expect(value, str, field)


def parse_bool(value: Any, field: str) -> bool:
    if not isinstance(value, bool):
        raise InputError(field, f"expected true or false, got {value!r}")
    return value


def parse_list(item: FieldParser) -> FieldParser:
    def parse(value: Any, field: str) -> list[Any]:
        return [item(v, f"{field}[{i}]") for i, v in enumerate(expect(value, list, field))]
    return parse


def parse_reals(value: Any, field: str) -> list[float]:
    return parse_list(parse_real)(value, field)


def parse_edge(value: Any, field: str) -> tuple[str, str, float]:
    if not isinstance(value, list) or len(value) != 3:
        raise InputError(field, f"expected [vertex, vertex, length], got {value!r}")
    return parse_str(value[0], f"{field}[0]"), parse_str(value[1], f"{field}[1]"), parse_real(value[2], f"{field}[2]")


def parse_anchor(value: Any, field: str) -> tuple[str, float]:
    if not isinstance(value, list) or len(value) != 2:
        raise InputError(field, f"expected [edge name, offset], got {value!r}")
    return parse_str(value[0], f"{field}[0]"), parse_real(value[1], f"{field}[1]")


# Per space kind: field name -> (parser, required)
SPACE_FIELDS: dict[str, dict[str, tuple[FieldParser, bool]]] = {
    "euclidean": {
        "dim": (parse_int, True),
    },
    "hyperbolic": {
        "dim": (parse_int, True),
    },
    "tree": {
        "edges": (parse_list(parse_edge), True),
        "ideal_leaves": (parse_list(parse_str), False),
        "basepoint": (parse_anchor, False),
    },
}

POINT_FIELDS: dict[str, dict[str, tuple[FieldParser, bool]]] = {
    "coords": {
        "coords": (parse_reals, True),
        "mass": (parse_real, False),
    },
    "edge": {
        "edge": (parse_str, True),
        "offset": (parse_real, True),
        "mass": (parse_real, False),
    },
}

IDEAL_FIELDS: dict[str, FieldParser] = {
    IdealPoint.DIRECTION: parse_reals,
    IdealPoint.NULL_VECTOR: parse_reals,
    IdealPoint.END: parse_str,
}


def parse_fields(doc: Any, fields: dict[str, tuple[FieldParser, bool]], where: str) -> dict[str, Any]:
    """
    Runs each field's parser over the document. Unknown keys are rejected so that typos surface as errors.
    """
    if not isinstance(doc, dict):
        raise InputError(where, f"expected an object, got {type(doc).__name__}")
    out = {}
    for name, (parser, required) in fields.items():
        key = f"{where}.{name}" if where else name
        if name in doc:
            out[name] = parser(doc[name], key)
        elif required:
            raise InputError(key, "missing")
    extra = sorted(set(doc) - set(fields))
    if extra:
        raise InputError(f"{where}.{extra[0]}" if where else extra[0], "unknown field")
    return out


def loads(text: str, where: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as err:
        raise InputError(where, f"malformed JSON ({err.msg} at line {err.lineno} column {err.colno})") from err


def dumps(doc: Any) -> str:
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


# --- ingestion ---

def space_from_document(doc: Any) -> Space:
    if not isinstance(doc, dict):
        raise InputError("space", f"expected an object, got {type(doc).__name__}")
    kind = doc.get("space")
    if kind not in SPACE_FIELDS:
        raise InputError("space", f"expected one of {sorted(SPACE_FIELDS)}, got {kind!r}")
    body = {k: v for k, v in doc.items() if k != "space"}
    values = parse_fields(body, SPACE_FIELDS[kind], "")
    if kind == "euclidean":
        return EuclideanSpace(values["dim"])
    if kind == "hyperbolic":
        return HyperbolicSpace(values["dim"])
    try:
        return TreeSpace(values["edges"], values.get("ideal_leaves", ()), values.get("basepoint"))
    except InvalidPointError as err:
        raise InputError("basepoint", str(err)) from err


def point_from_document(space: Space, doc: Any, where: str = "point") -> WeightedPoint:
    """
    Parses {"coords": [...]} or {"edge": "A-B", "offset": 0.5}, each with an optional "mass" (default 1).
    """
    shape = "edge" if isinstance(doc, dict) and "edge" in doc else "coords"
    values = parse_fields(doc, POINT_FIELDS[shape], where)
    if shape == "edge":
        if not isinstance(space, TreeSpace):
            raise InputError(f"{where}.edge", f"edge points need a tree space, not {space.kind}")
        point = space.point_named(values["edge"], values["offset"])
    else:
        if isinstance(space, TreeSpace):
            raise InputError(f"{where}.coords", "tree points are given by edge and offset")
        point = SpacePoint.at(values["coords"])
    space.validate(point)
    mass = values.get("mass", 1.0)
    if not mass > 0:
        raise InputError(f"{where}.mass", f"must be positive, got {mass!r}")
    return WeightedPoint(point, mass)


def ideal_from_document(space: Space, doc: Any, where: str = "ideal") -> IdealPoint:
    """
    Parses {"direction": [...]}, {"null_vector": [...]} or {"end_leaf": "C"}.
    Null vectors are rescaled against the basepoint; directions must already be unit vectors.
    """
    if not isinstance(doc, dict) or len(doc) != 1 or next(iter(doc)) not in IDEAL_FIELDS:
        raise InputError(where, f"expected exactly one of {sorted(IDEAL_FIELDS)}")
    (kind, raw), = doc.items()
    value = IDEAL_FIELDS[kind](raw, f"{where}.{kind}")
    o = space.basepoint()
    if kind == IdealPoint.NULL_VECTOR and not isinstance(space, HyperbolicSpace):
        raise InputError(f"{where}.{kind}", f"null vectors need a hyperbolic space, not {space.kind}")
    try:
        if kind == IdealPoint.DIRECTION:
            xi = IdealPoint.direction(value)
        elif kind == IdealPoint.NULL_VECTOR:
            assert isinstance(space, HyperbolicSpace)
            xi = space.normalized_ideal(value, o)
        else:
            xi = IdealPoint.end(value)
        space.validate_ideal(xi, o)
    except InvalidPointError as err:
        raise InputError(f"{where}.{kind}", str(err)) from err
    return xi


def configuration_from_document(space: Space, doc: Any) -> Configuration:
    if not isinstance(doc, dict) or "points" not in doc:
        raise InputError("points", "missing")
    items = expect(doc["points"], list, "points")
    return Configuration(point_from_document(space, p, f"points[{i}]") for i, p in enumerate(items))


def body_from_document(space: Space, doc: Any) -> tuple[ConvexBody, Optional[IdealPoint]]:
    """
    Parses {"generators": [...]} with an optional "ideal" entry. Generator masses are ignored.
    """
    if not isinstance(doc, dict) or "generators" not in doc:
        raise InputError("generators", "missing")
    extra = sorted(set(doc) - {"generators", "ideal"})
    if extra:
        raise InputError(extra[0], "unknown field")
    items = expect(doc["generators"], list, "generators")
    body = ConvexBody(point_from_document(space, g, f"generators[{i}]").point for i, g in enumerate(items))
    xi = ideal_from_document(space, doc["ideal"]) if "ideal" in doc else None
    return body, xi


# --- emission ---

def point_to_document(space: Space, x: SpacePoint) -> Document:
    if isinstance(space, TreeSpace):
        assert x.edge is not None
        return {"edge": space.edge_name(x.edge), "offset": x.offset}
    return {"coords": list(x.coords or ())}


def result_to_document(space: Space, result: BarycenterResult) -> Document:
    return {
        "center": point_to_document(space, result.center),
        "iterations": result.iterations,
        "converged": result.converged,
        "diameter_trace": list(result.diameter_trace),
    }


def result_from_document(space: Space, doc: Any) -> BarycenterResult:
    values = parse_fields(doc, {
        "center": (lambda v, f: point_from_document(space, v, f).point, True),
        "iterations": (parse_int, True),
        "converged": (parse_bool, True),
        "diameter_trace": (parse_reals, True),
    }, "")
    return BarycenterResult(values["center"], values["iterations"], tuple(values["diameter_trace"]),
                            values["converged"])


def _finite_or_none(x: float) -> Optional[float]:
    return x if math.isfinite(x) else None


def straddle_to_document(straddle: StraddleReport) -> Document:
    return {
        "epsilons": list(straddle.epsilons),
        "ratios": list(straddle.ratios),
        "smoothing": straddle.smoothing,
        "growth": [_finite_or_none(g) for g in straddle.growth],
        "diverging": straddle.diverging,
        "spread": _finite_or_none(straddle.spread),
        "bounded": straddle.bounded,
    }


def report_to_document(report: LipschitzReport) -> Document:
    summary: Document = {"failures": report.failures}
    if report.records:
        summary = {"max_ratio": report.max_ratio, "mean_ratio": report.mean_ratio, "failures": report.failures}
    doc: Document = {
        "records": [{"sample": r.sample, "in_disp": r.in_disp, "out_disp": r.out_disp, "ratio": r.ratio}
                    for r in report.records],
        "skipped": report.skipped,
        "summary": summary,
    }
    if report.straddle is not None:
        doc["straddle"] = straddle_to_document(report.straddle)
    return doc


def report_from_document(doc: Any) -> LipschitzReport:
    """
    Rebuilds a report from its JSON form. Summary values and straddle verdicts are derived, so only the
    records, counts and straddle measurements are read back.
    """
    record_fields = {
        "sample": (parse_int, True),
        "in_disp": (parse_real, True),
        "out_disp": (parse_real, True),
        "ratio": (parse_real, True),
    }
    if not isinstance(doc, dict):
        raise InputError("report", "expected an object")
    records = tuple(LipschitzRecord(**parse_fields(r, record_fields, f"records[{i}]"))
                    for i, r in enumerate(expect(doc.get("records"), list, "records")))
    summary = expect(doc.get("summary"), dict, "summary")
    straddle = None
    if "straddle" in doc:
        raw = expect(doc["straddle"], dict, "straddle")
        straddle = StraddleReport(tuple(parse_reals(raw.get("epsilons"), "straddle.epsilons")),
                                  tuple(parse_reals(raw.get("ratios"), "straddle.ratios")),
                                  parse_bool(raw.get("smoothing"), "straddle.smoothing"))
    return LipschitzReport(records, parse_int(summary.get("failures"), "summary.failures"),
                           parse_int(doc.get("skipped", 0), "skipped"), straddle)


# --- CSV ---

def float_text(x: float) -> str:
    return "%.17g" % x


def trace_rows(result: BarycenterResult) -> list[list[str]]:
    return [["iter", "diameter"]] + [[str(i), float_text(d)] for i, d in enumerate(result.diameter_trace)]


def report_rows(report: LipschitzReport) -> list[list[str]]:
    return [["sample", "in_disp", "out_disp", "ratio"]] + [
        [str(r.sample), float_text(r.in_disp), float_text(r.out_disp), float_text(r.ratio)] for r in report.records]


def rows_to_csv(rows: list[list[str]]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerows(rows)
    return out.getvalue()
