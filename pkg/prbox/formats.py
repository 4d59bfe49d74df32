"""Versioned file formats: box and certificate JSON, sweep CSV and reports.

Every exact number is written as ``"p/q"`` text and polynomials as lists of such
coefficients, lowest order first. Decimal columns exist only in plot data and are
suffixed ``_approx``.
"""

from __future__ import annotations

from collections.abc import Mapping
import csv
from fractions import Fraction
import itertools
import json
import logging
from pathlib import Path
from typing import Any

import numpy as np

from prbox.appendix import SnkReport
from prbox.boxes import Box
from prbox.decompositions import Decomposition
from prbox.decompositions import decomposition_summary
from prbox.exceptions import InvalidInputError
from prbox.lp import Certificate
from prbox.numeric import Poly
from prbox.numeric import Scalar
from prbox.numeric import format_rational
from prbox.numeric import format_scalar
from prbox.numeric import parse_rational
from prbox.numeric import scalar_from_json
from prbox.numeric import scalar_to_json
from prbox.strategies import LocalDetStrategy
from prbox.sweep import SweepResult


_logger = logging.getLogger(__name__)

BOX_SCHEMA = "prbox.box/1"
CERTIFICATE_SCHEMA = "prbox.certificate/1"
SWEEP_SCHEMA = "prbox.sweep/1"
SNK_SCHEMA = "prbox.snk/1"
DECOMPOSITION_SCHEMA = "prbox.decomposition/1"
CERTIFICATE_DIR = "certificates"


def write_json(path: Path | str, data: Mapping[str, Any]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    _logger.debug(f"Wrote {path}.")
    return path


def read_json(path: Path | str) -> dict[str, Any]:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise InvalidInputError(f"Cannot read {path}: {e}") from e
    if not isinstance(data, dict):
        raise InvalidInputError(f"{path} does not hold a JSON object.")
    return data


def _check_schema(data: Mapping[str, Any], schema: str) -> None:
    found = data.get("schema")
    if found != schema:
        raise InvalidInputError(f"Expected schema {schema!r}, found {found!r}.")


def _approx(value: Scalar | int) -> str:
    if isinstance(value, Poly):
        return ""
    return f"{float(value):.12g}"


def _optional_rational(value: Fraction | None) -> str | None:
    return None if value is None else format_rational(value)


def box_to_json(box: Box) -> dict[str, Any]:
    """JSON document of a box; table entries are nested ``[x][y][u][v]``.

    ``inputs`` and ``outputs`` list the sizes for the two parties; ``shape`` repeats them
    in table order.
    """
    xs, ys, us, vs = box.shape
    table = [
        [
            [[scalar_to_json(box[x, y, u, v]) for v in range(vs)] for u in range(us)]
            for y in range(ys)
        ]
        for x in range(xs)
    ]
    return {
        "schema": BOX_SCHEMA,
        "name": box.name,
        "inputs": [us, vs],
        "outputs": [xs, ys],
        "shape": list(box.shape),
        "variable": box.variable,
        "domain": None if box.domain is None else [format_rational(d) for d in box.domain],
        "mass": scalar_to_json(box.mass),
        "table": table,
    }


def _box_shape(data: Mapping[str, Any]) -> tuple[int, ...]:
    if "inputs" in data or "outputs" in data:
        xs, ys = (int(s) for s in data["outputs"])
        us, vs = (int(s) for s in data["inputs"])
        shape = (xs, ys, us, vs)
        if "shape" in data and tuple(int(s) for s in data["shape"]) != shape:
            raise InvalidInputError(f"Shape {data['shape']} disagrees with inputs and outputs.")
        return shape
    return tuple(int(s) for s in data["shape"])


def box_from_json(data: Mapping[str, Any]) -> Box:
    """Reads a box document; a missing ``schema`` key is taken as the current one."""
    if "schema" in data:
        _check_schema(data, BOX_SCHEMA)
    try:
        variable = data.get("variable") or "eps"
        shape = _box_shape(data)
        if len(shape) != 4:
            raise InvalidInputError(f"Box shapes have four entries, got {shape}.")
        entries = np.empty(shape, dtype=object)
        for x, y, u, v in itertools.product(*(range(s) for s in shape)):
            entries[x, y, u, v] = scalar_from_json(data["table"][x][y][u][v], variable)
        bounds = data.get("domain")
        domain = None if bounds is None else (parse_rational(bounds[0]), parse_rational(bounds[1]))
        return Box(
            entries,
            scalar_from_json(data["mass"], variable),
            domain=domain,
            name=data.get("name", ""),
        )
    except (KeyError, IndexError, TypeError, ValueError) as e:
        raise InvalidInputError(f"Malformed box document: {e!r}") from e


def write_box(path: Path | str, box: Box) -> Path:
    return write_json(path, box_to_json(box))


def read_box(path: Path | str) -> Box:
    return box_from_json(read_json(path))


def certificate_to_json(certificate: Certificate, box: Box) -> dict[str, Any]:
    """Self-contained certificate document embedding the box it was computed for."""
    primal = sorted(
        (str(strategy), format_rational(weight))
        for strategy, weight in certificate.primal.items()
        if weight != 0
    )
    mass = Fraction(box.mass)  # type: ignore[arg-type]
    return {
        "schema": CERTIFICATE_SCHEMA,
        "box": box_to_json(box),
        "objective": format_rational(certificate.objective),
        "fraction": format_rational(certificate.objective / mass),
        "certified": certificate.certified,
        "pricing_gap": _optional_rational(certificate.pricing_gap),
        "upper_bound": _optional_rational(certificate.upper_bound),
        "iterations": certificate.iterations,
        "rounds": certificate.rounds,
        "primal": [{"strategy": s, "weight": w} for s, w in primal],
        "dual": [format_rational(y) for y in certificate.dual],
        "slack": [format_rational(s) for s in certificate.slack],
    }


def _optional_from_json(value: object) -> Fraction | None:
    return None if value is None else parse_rational(str(value))


def certificate_from_json(data: Mapping[str, Any]) -> tuple[Certificate, Box]:
    _check_schema(data, CERTIFICATE_SCHEMA)
    try:
        box = box_from_json(data["box"])
        primal = {
            LocalDetStrategy.parse(term["strategy"]): parse_rational(term["weight"])
            for term in data["primal"]
        }
        certificate = Certificate(
            objective=parse_rational(data["objective"]),
            primal=primal,  # type: ignore[arg-type]
            dual=tuple(parse_rational(y) for y in data["dual"]),
            slack=tuple(parse_rational(s) for s in data["slack"]),
            pricing_gap=_optional_from_json(data.get("pricing_gap")),
            certified=bool(data["certified"]),
            upper_bound=_optional_from_json(data.get("upper_bound")),
            iterations=int(data.get("iterations", 0)),
            rounds=int(data.get("rounds", 0)),
        )
    except (KeyError, TypeError) as e:
        raise InvalidInputError(f"Malformed certificate document: {e!r}") from e
    return certificate, box


def write_certificate(path: Path | str, certificate: Certificate, box: Box) -> Path:
    written = write_json(path, certificate_to_json(certificate, box))
    _logger.info(f"Certificate written to {written}.")
    return written


def read_certificate(path: Path | str) -> tuple[Certificate, Box]:
    return certificate_from_json(read_json(path))


def certificate_name(family: str, n: int, parameter: Fraction) -> str:
    return f"{family}-n{n}-{parameter.numerator}_{parameter.denominator}.json"


def _piece_of(result: SweepResult, parameter: Fraction) -> int | None:
    for index, piece in enumerate(result.pieces):
        if piece.lo <= parameter <= piece.hi:
            return index
    return None


def write_sweep_csv(
    path: Path | str, result: SweepResult, certificate_dir: str = CERTIFICATE_DIR
) -> Path:
    """One row per solved point, excluded points with an empty piece id.

    Certificate files are given relative to the directory holding the table.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    name = "eps" if result.family == "isotropic" else "delta"
    fields = [name, "local_part", "certified", "piece_id", "certificate_file", "local_part_approx"]
    family, n = result.family, result.n
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=fields)
        writer.writeheader()
        for sample in result.samples:
            piece = _piece_of(result, sample.parameter) if sample.certified else None
            certificate = certificate_name(family, n, sample.parameter)
            writer.writerow(
                {
                    name: format_rational(sample.parameter),
                    "local_part": format_rational(sample.value),
                    "certified": "true" if sample.certified else "false",
                    "piece_id": "" if piece is None else piece,
                    "certificate_file": f"{certificate_dir}/{certificate}",
                    "local_part_approx": _approx(sample.value),
                }
            )
    _logger.info(f"Sweep table written to {path}.")
    return path


def sweep_report(result: SweepResult) -> dict[str, Any]:
    pieces = [
        {
            "id": index,
            "lo": format_rational(piece.lo),
            "hi": format_rational(piece.hi),
            "polynomial": scalar_to_json(piece.poly),
            "polynomial_text": format_scalar(piece.poly),
            "samples": piece.n_samples,
            "determined": piece.determined,
        }
        for index, piece in enumerate(result.pieces)
    ]
    return {
        "schema": SWEEP_SCHEMA,
        "family": result.family,
        "n": result.n,
        "pieces": pieces,
        "breakpoints": [[format_rational(a), format_rational(b)] for a, b in result.breakpoints],
        "continuity": list(result.continuity),
        "excluded": [format_rational(p) for p in result.excluded],
        "monotone": result.monotone,
        "lower_bound_failure": _optional_rational(result.lower_bound_failure),
        "envelope_violations": [format_rational(p) for p in result.envelope_violations],
        "leading_order": result.leading_order,
        "leading_coefficient": _optional_rational(result.leading_coefficient),
    }


def write_box_csv(path: Path | str, box: Box) -> Path:
    """Plot-ready table of a box, one row per cell."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=["x", "y", "u", "v", "value", "value_approx"])
        writer.writeheader()
        for x, y, u, v in box.cells():
            entry = box[x, y, u, v]
            writer.writerow(
                {
                    "x": x,
                    "y": y,
                    "u": u,
                    "v": v,
                    "value": format_scalar(entry),
                    "value_approx": _approx(entry),
                }
            )
    return path


def snk_report(report: SnkReport) -> dict[str, Any]:
    return {
        "schema": SNK_SCHEMA,
        "n": report.n,
        "k": report.k,
        "mass": report.mass,
        "fraction": format_rational(report.fraction),
        "absolute": format_rational(report.absolute),
        "certified": report.certificate.certified,
        "exploratory": report.exploratory,
    }


def decomposition_report(decomposition: Decomposition) -> dict[str, Any]:
    return {"schema": DECOMPOSITION_SCHEMA, **decomposition_summary(decomposition)}
