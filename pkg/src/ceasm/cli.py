"""Command-line scenario runner: distance/eta sweeps with CSV reports.

Configuration files hold ``key = value`` lines with ``#`` comments;
command-line flags override them.  Recognised keys::

    wavelength   meters                      (default 532e-9)
    pitch        meters                      (default 1e-6)
    n_samples    samples per live axis        (default 1024)
    dims         1 or 2                       (default 2)
    aperture     rect:w[,h] | tri:x1,y1,x2,y2,x3,y3 | file:path.ceaf
    distance     comma list of items, each an absolute distance in meters,
                 ``zc*k`` or a log-spaced range ``A..B/n``
    method       comma list of as, bl, adaptive, be, ce
    eta          comma list, used by ce            (default 0.995)
    reference    rs | conv | none                  (default conv)
    ce_reference_mode  be | bl                     (default be)
    band_shape   square | marginal                 (default square)
    epsilon      NUFFT tolerance                   (default 1e-9)
    repeats      timing repeats                    (default 1)
    out_csv      path, ``-`` for stdout            (default -)
    out_fields   directory for CEAF/PGM dumps      (default none)

Exit codes: 0 success, 2 invalid configuration, 3 oracle budget exceeded,
4 I/O failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import re
import sys
from dataclasses import dataclass, field as dc_field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from .errors import InvalidArgumentError, ResourceLimitError
from .evaluation import CSV_COLUMNS, EvaluationReport, benchmark
from .field import ComplexField, make_grid, rect_aperture, triangle_aperture
from .fileio import dump_field, read_ceaf
from .propagation import (
    Method,
    OpticalConfig,
    ReferenceMode,
    critical_distance,
    marginal_profiles,
    plan,
    square_profile,
)
from .reference import DEFAULT_BUDGET, OracleBudget, propagate_conv, rs_direct
from .transforms import TransformAccuracy

__all__ = ["ConfigError", "Scenario", "parse_config", "build_scenario", "run_scenario", "write_csv", "main"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BUDGET = 3
EXIT_IO = 4

DEFAULTS = {
    "wavelength": "532e-9",
    "pitch": "1e-6",
    "n_samples": "1024",
    "dims": "2",
    "method": "adaptive,be,ce",
    "eta": "0.995",
    "reference": "conv",
    "ce_reference_mode": "be",
    "band_shape": "square",
    "epsilon": "1e-9",
    "repeats": "1",
    "out_csv": "-",
}
KEYS = set(DEFAULTS) | {"aperture", "distance", "out_fields", "budget"}


class ConfigError(InvalidArgumentError):
    """Invalid scenario setting; ``key`` names the offending field."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass
class Scenario:
    source: ComplexField
    wavelength: float
    distances: List[float]
    methods: List[Method]
    etas: List[float]
    reference: str = "conv"
    ce_reference_mode: ReferenceMode = ReferenceMode.E_BE
    band_shape: str = "square"
    accuracy: TransformAccuracy = dc_field(default_factory=TransformAccuracy)
    repeats: int = 1
    budget: OracleBudget = DEFAULT_BUDGET
    out_csv: str = "-"
    out_fields: Optional[Path] = None

    def __post_init__(self):
        if not self.distances:
            raise ConfigError("distance", "distance list is empty")
        if any(not (np.isfinite(z) and z > 0) for z in self.distances):
            raise ConfigError("distance", "distances must be positive")
        if not self.methods:
            raise ConfigError("method", "method list is empty")
        if not self.etas:
            raise ConfigError("eta", "eta list is empty")
        if any(not 0 < e <= 1 for e in self.etas):
            raise ConfigError("eta", "eta must lie in (0, 1]")
        if self.reference not in ("rs", "conv", "none"):
            raise ConfigError("reference", f"expected rs, conv or none, got {self.reference!r}")

    @property
    def grid(self):
        return self.source.grid


def parse_config(text: str) -> Dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected 'key = value', got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in KEYS:
            raise ConfigError(key, "unknown configuration key")
        out[key] = value
    return out


def _number(key: str, text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ConfigError(key, f"not a number: {text!r}") from None
    if not np.isfinite(value):
        raise ConfigError(key, f"not finite: {text!r}")
    return value


def _integer(key: str, text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ConfigError(key, f"not an integer: {text!r}") from None


def _split(text: str) -> List[str]:
    return [s.strip() for s in text.split(",") if s.strip()]


_ZC = re.compile(r"^zc\s*\*\s*(.+)$")


def _distance_value(text: str, zc: float) -> float:
    m = _ZC.match(text.strip())
    if m:
        return _number("distance", m.group(1)) * zc
    return _number("distance", text)


def parse_distances(text: str, zc: float) -> List[float]:
    """Expand a distance list; ``A..B/n`` gives ``n`` log-spaced points from A to B."""
    out: List[float] = []
    for item in _split(text):
        if ".." in item:
            span, _, count = item.partition("/")
            lo, _, hi = span.partition("..")
            n = _integer("distance", count) if count else 50
            a, b = _distance_value(lo, zc), _distance_value(hi, zc)
            if n < 1 or a <= 0 or b <= 0:
                raise ConfigError("distance", f"invalid range {item!r}")
            out.extend(np.geomspace(a, b, n).tolist())
        else:
            out.append(_distance_value(item, zc))
    return out


def parse_aperture(text: str, n_samples: int, dims: int, pitch: float) -> ComplexField:
    kind, _, args = text.partition(":")
    kind = kind.strip().lower()
    if kind == "file":
        try:
            return read_ceaf(args.strip())
        except FileNotFoundError:
            raise ConfigError("aperture", f"file not found: {args.strip()}") from None
    grid = make_grid(n_samples, n_samples if dims == 2 else 1, pitch)
    if kind == "rect":
        w = [_integer("aperture", s) for s in _split(args)]
        if len(w) not in (1, 2):
            raise ConfigError("aperture", "rect takes one or two widths in samples")
        if dims == 1:
            return rect_aperture(grid, w[0])
        return rect_aperture(grid, w[0], w[-1])
    if kind == "tri":
        if dims != 2:
            raise ConfigError("aperture", "triangle apertures need dims = 2")
        v = [_number("aperture", s) for s in _split(args)]
        if len(v) != 6:
            raise ConfigError("aperture", "tri takes six coordinates x1,y1,x2,y2,x3,y3 in meters")
        return triangle_aperture(grid, (v[0], v[1]), (v[2], v[3]), (v[4], v[5]))
    raise ConfigError("aperture", f"unknown aperture kind {kind!r}")


def build_scenario(settings: Dict[str, str]) -> Scenario:
    """Validate merged settings into a :class:`Scenario`."""
    s = dict(DEFAULTS)
    s.update({k: v for k, v in settings.items() if v is not None})
    wavelength = _number("wavelength", s["wavelength"])
    if wavelength <= 0:
        raise ConfigError("wavelength", "must be positive")
    pitch = _number("pitch", s["pitch"])
    if pitch <= 0:
        raise ConfigError("pitch", "must be positive")
    n_samples = _integer("n_samples", s["n_samples"])
    if n_samples < 2:
        raise ConfigError("n_samples", "must be at least 2")
    dims = _integer("dims", s["dims"])
    if dims not in (1, 2):
        raise ConfigError("dims", "must be 1 or 2")
    if "aperture" not in s:
        raise ConfigError("aperture", "no aperture given")
    try:
        source = parse_aperture(s["aperture"], n_samples, dims, pitch)
    except ConfigError:
        raise
    except InvalidArgumentError as exc:
        raise ConfigError("aperture", str(exc)) from None
    zc = critical_distance(source.grid, wavelength)
    distances = parse_distances(s.get("distance", ""), zc)
    try:
        methods = [Method(m.lower()) for m in _split(s["method"])]
    except ValueError as exc:
        raise ConfigError("method", str(exc)) from None
    etas = [_number("eta", e) for e in _split(s["eta"])]
    try:
        mode = ReferenceMode(s["ce_reference_mode"].lower())
    except ValueError:
        raise ConfigError("ce_reference_mode", "expected be or bl") from None
    if s["band_shape"] not in ("square", "marginal"):
        raise ConfigError("band_shape", "expected square or marginal")
    try:
        accuracy = TransformAccuracy(_number("epsilon", s["epsilon"]))
    except InvalidArgumentError as exc:
        raise ConfigError("epsilon", str(exc)) from None
    repeats = _integer("repeats", s["repeats"])
    if repeats < 1:
        raise ConfigError("repeats", "must be at least 1")
    budget = DEFAULT_BUDGET
    if "budget" in s:
        n = _integer("budget", s["budget"])
        if n < 1:
            raise ConfigError("budget", "must be positive")
        budget = OracleBudget(n)
    out_fields = Path(s["out_fields"]) if s.get("out_fields") else None
    return Scenario(
        source=source,
        wavelength=wavelength,
        distances=distances,
        methods=methods,
        etas=etas,
        reference=s["reference"].lower(),
        ce_reference_mode=mode,
        band_shape=s["band_shape"],
        accuracy=accuracy,
        repeats=repeats,
        budget=budget,
        out_csv=s["out_csv"],
        out_fields=out_fields,
    )


def _field_name(z_index: int, method: Method, eta: Optional[float]) -> str:
    tag = method.value if eta is None else f"{method.value}_eta{eta:g}"
    return f"z{z_index:03d}_{tag}.ceaf"


def run_scenario(scenario: Scenario) -> List[EvaluationReport]:
    """Propagate the source to every distance with every method.

    Rows come out z-major, then in method order, then in eta order for the
    controllable-energy method.  Runs are sequential so timings are honest.
    """
    src = scenario.source
    grid = src.grid
    profiles = None
    if Method.CE in scenario.methods:
        if scenario.band_shape == "square":
            sq = square_profile(src)
            profiles = {a: sq for a in ("x", "y") if grid.axis_size(a) > 1}
        else:
            profiles = marginal_profiles(src)
    if scenario.out_fields is not None:
        scenario.out_fields.mkdir(parents=True, exist_ok=True)
    reports = []
    for zi, z in enumerate(scenario.distances):
        config = OpticalConfig(scenario.wavelength, z, grid)
        if scenario.reference == "rs":
            ref = rs_direct(src, config, scenario.budget)
        elif scenario.reference == "conv":
            ref = propagate_conv(src, config)
        else:
            ref = None
        if ref is not None and scenario.out_fields is not None:
            dump_field(ref, scenario.out_fields / f"z{zi:03d}_reference.ceaf")
        for method in scenario.methods:
            etas = scenario.etas if method is Method.CE else [None]
            for eta in etas:
                p = plan(
                    method,
                    config,
                    eta=eta,
                    reference_mode=scenario.ce_reference_mode,
                    band_shape=scenario.band_shape,
                    profiles=profiles,
                )
                report = benchmark(p, src, config, scenario.repeats, ref, scenario.accuracy)
                if scenario.out_fields is not None:
                    dump_field(report.output, scenario.out_fields / _field_name(zi, method, eta))
                report.output = None
                reports.append(report)
    return reports


def write_csv(reports: Sequence[EvaluationReport], stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in reports:
        writer.writerow(r.csv_row())


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="ceasm",
        description="Run angular-spectrum propagation sweeps and report accuracy and timing as CSV.",
    )
    ap.add_argument("--config", help="key = value configuration file")
    ap.add_argument("--method", help="comma list of as, bl, adaptive, be, ce")
    ap.add_argument("--eta", help="comma list of energy fractions for ce")
    ap.add_argument("--distance", help="meters, zc*k, or A..B/n log-spaced ranges, comma separated")
    ap.add_argument("--reference", choices=["rs", "conv", "none"])
    ap.add_argument("--aperture", help="rect:w[,h] | tri:x1,y1,x2,y2,x3,y3 | file:path")
    ap.add_argument("--out-csv", help="CSV destination, '-' for stdout")
    ap.add_argument("--out-fields", help="directory receiving CEAF and PGM dumps")
    ap.add_argument("--ce-reference-mode", choices=["be", "bl"])
    ap.add_argument("--epsilon", help="NUFFT tolerance")
    ap.add_argument("--band-shape", choices=["square", "marginal"])
    ap.add_argument("--wavelength")
    ap.add_argument("--pitch")
    ap.add_argument("--n-samples")
    ap.add_argument("--dims", choices=["1", "2"])
    ap.add_argument("--repeats", help="timing repeats per row (median reported)")
    ap.add_argument("--bench", action="store_true", help="time each row with 5 repeats unless --repeats is given")
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    try:
        settings: Dict[str, str] = {}
        if args.config:
            try:
                settings.update(parse_config(Path(args.config).read_text()))
            except OSError as exc:
                print(f"error: cannot read config: {exc}", file=sys.stderr)
                return EXIT_IO
        if args.bench and args.repeats is None:
            settings["repeats"] = "5"
        for key in (
            "method", "eta", "distance", "reference", "aperture", "out_csv", "out_fields",
            "ce_reference_mode", "epsilon", "band_shape", "wavelength", "pitch", "n_samples",
            "dims", "repeats",
        ):
            value = getattr(args, key)
            if value is not None:
                settings[key] = value
        scenario = build_scenario(settings)
        reports = run_scenario(scenario)
    except ResourceLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except InvalidArgumentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    buf = io.StringIO()
    write_csv(reports, buf)
    try:
        if scenario.out_csv == "-":
            sys.stdout.write(buf.getvalue())
        else:
            Path(scenario.out_csv).write_text(buf.getvalue(), newline="\n")
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
