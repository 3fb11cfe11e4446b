"""Command-line entry point.

    gsci lemmas | radial | bol | sci | sweep | symmetrize | pipeline [flags]

Exit status is 0 when every check passes, 1 when a mathematical check fails
and 2 on usage or configuration errors.  Settings come from built-in
defaults, then a ``key = value`` config file, then flags; the effective
configuration is echoed into every report.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace
from typing import Optional

import numpy as np

from . import __version__
from .errors import GsciError
from .fixtures import KINDS, FixtureSpec
from .inequalities import CSV_COLUMNS, ScanRow, pipeline_endtoend, remark13_check, sci_check, sharpness_scan
from .liouville import EIGHT_PI, bubble_area, lemma22_matching_x, theorem24_margin
from .normalization import Normalization, convert_normalization
from .radial import SourceSpec, enclosed_mass, solve_radial
from .rearrangement import symmetrize
from .suites import Check, bol_suite, lemma_suite, quadrature_area_check, radial_suite

COMMANDS = ("lemmas", "radial", "bol", "sci", "sweep", "symmetrize", "pipeline")
FORMATS = ("text", "json", "csv")
CSV_VERSION = 1
MIN_GRID = 64
MIN_NODES = 16
DEFAULT_KS = tuple(round(0.1 * i, 1) for i in range(1, 11))

# per-command defaults that differ from the dataclass ones
_COMMAND_DEFAULTS = {
    "radial": {"nodes": 256, "radius": 4.0},
    "bol": {"nodes": 1024, "grid": 512, "radius": 2.0, "z0": 0.3 + 0.1j, "theta": 0.4},
    "sweep": {"nodes": 1024},
}


class UsageError(Exception):
    """Bad flags, malformed config or conflicting settings (exit status 2)."""


@dataclass
class RunConfig:
    command: str = "lemmas"
    grid: int = 256
    nodes: int = 1024
    tol: Optional[float] = None
    format: str = "text"
    out: Optional[str] = None
    fixture: str = "concentric"
    a: float = 1.0
    b: float = 2.0
    k: tuple = (0.7,)
    c: Optional[float] = None
    lam: float = 1.0
    z0: complex = 0j
    theta: float = 0.0
    radius: Optional[float] = None
    norm: str = "EXP_U"
    eps: float = 0.01 * EIGHT_PI
    levels: int = 512
    method: str = "closed"
    workers: int = 1

    def validate(self) -> "RunConfig":
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.format not in FORMATS:
            raise UsageError(f"unknown format {self.format!r}")
        if self.fixture not in KINDS:
            raise UsageError(f"unknown fixture {self.fixture!r}; choose from {', '.join(KINDS)}")
        if self.method not in ("closed", "radial"):
            raise UsageError("method must be closed or radial")
        if self.grid < MIN_GRID or self.grid % 2:
            raise UsageError(f"grid must be even and at least {MIN_GRID}")
        if self.nodes < MIN_NODES:
            raise UsageError(f"nodes must be at least {MIN_NODES}")
        if self.tol is not None and not self.tol > 0:
            raise UsageError("tol must be positive")
        if not self.eps > 0:
            raise UsageError("eps must be positive")
        if self.workers < 1 or self.levels < 16:
            raise UsageError("workers must be at least 1 and levels at least 16")
        for name in ("a", "b", "lam"):
            if not getattr(self, name) > 0:
                raise UsageError(f"{name} must be positive")
        if self.radius is not None and not self.radius > 0:
            raise UsageError("radius must be positive")
        if abs(self.z0) >= 1:
            raise UsageError("|z0| must be below 1")
        try:
            Normalization.parse(self.norm)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        return self

    @property
    def normalization(self) -> Normalization:
        return Normalization.parse(self.norm)

    def echo(self) -> dict:
        d = asdict(self)
        d["k"] = list(self.k)
        d["z0"] = [self.z0.real, self.z0.imag]
        return d


# --- parsing -----------------------------------------------------------------


def _float_list(text: str) -> tuple:
    return tuple(float(x) for x in str(text).split(",") if x.strip())


def _complex(text: str) -> complex:
    s = str(text).strip().replace("i", "j").replace(" ", "")
    if "," in s:
        re_, im = s.split(",", 1)
        return complex(float(re_), float(im))
    return complex(s)


_CONVERTERS = {
    "grid": int, "nodes": int, "levels": int, "workers": int,
    "tol": float, "a": float, "b": float, "c": float, "lam": float, "theta": float,
    "radius": float, "eps": float,
    "k": _float_list, "z0": _complex,
    "format": str, "out": str, "fixture": str, "norm": str, "method": str,
}
_ALIASES = {"lambda": "lam", "nx": "grid", "n": "nodes"}


def _convert(key: str, value):
    key = _ALIASES.get(key, key)
    if key not in _CONVERTERS:
        raise UsageError(f"unknown setting {key!r}")
    try:
        return key, _CONVERTERS[key](value)
    except (TypeError, ValueError):
        raise UsageError(f"malformed value for {key}: {value!r}") from None


def read_config(path: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    out = {}
    for no, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{no}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key or not value:
            raise UsageError(f"{path}:{no}: expected key = value")
        key, val = _convert(key.replace("-", "_"), value)
        out[key] = val
    return out


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}\n{self.format_usage()}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--grid", type=str, help="planar grid cells per side")
    common.add_argument("--nodes", type=str, help="radial nodes")
    common.add_argument("--tol", type=str, help="override for the discretization slack on margins")
    common.add_argument("--format", choices=FORMATS)
    common.add_argument("--out", type=str, help="write the report here instead of stdout")
    common.add_argument("--config", type=str, help="key = value file; flags override it")
    common.add_argument("--fixture", type=str, help=f"one of {', '.join(KINDS)}")
    common.add_argument("--a", type=str)
    common.add_argument("--b", type=str)
    common.add_argument("--k", type=str, help="matching parameter; comma list for sweep")
    common.add_argument("--c", type=str, help="boundary gap, instead of --k")
    common.add_argument("--lambda", dest="lam", type=str)
    common.add_argument("--z0", type=str, help="Möbius centre, e.g. 0.3+0.1j or 0.3,0.1")
    common.add_argument("--theta", type=str)
    common.add_argument("--radius", type=str)
    common.add_argument("--norm", type=str, help="EXP_U or EXP_2V")
    common.add_argument("--eps", type=str, help="mass-reduction epsilon for pipeline")
    common.add_argument("--levels", type=str, help="thresholds for symmetrization")
    common.add_argument("--method", type=str, help="sweep rows: closed or radial")
    common.add_argument("--workers", type=str, help="parallel sweep rows")

    parser = _Parser(prog="gsci", description="Numerical checks of sphere covering inequalities.")
    parser.add_argument("--version", action="version", version=f"gsci {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    helps = {
        "lemmas": "auxiliary-function sign, matching relation, cap sums",
        "radial": "shooting solver against the bubble",
        "bol": "Bol equality on caps and the inequality on a Möbius cap",
        "sci": "the generalized covering inequality on a fixture pair",
        "sweep": "cap-sum table over k (CSV ready)",
        "symmetrize": "equimeasurable rearrangement of a fixture pair",
        "pipeline": "the symmetrization argument, link by link",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def resolve_config(argv) -> RunConfig:
    ns = vars(build_parser().parse_args(argv))
    command = ns.pop("command", None)
    if command is None:
        raise UsageError("a command is required: " + ", ".join(COMMANDS))
    settings = dict(_COMMAND_DEFAULTS.get(command, {}))
    path = ns.pop("config", None)
    if path is not None:
        settings.update(read_config(path))
    explicit = {}
    for key, value in ns.items():
        k, v = _convert(key, value)
        explicit[k] = v
    # --k and --c are two names for one parameter
    if "k" in explicit and "c" in explicit:
        raise UsageError("--k and --c are mutually exclusive")
    if "k" in explicit:
        settings.pop("c", None)
    if "c" in explicit:
        settings.pop("k", None)
    if "k" in settings and "c" in settings:
        raise UsageError("config sets both k and c")
    settings.update(explicit)
    if command == "sweep" and "k" not in settings:
        settings["k"] = DEFAULT_KS
    cfg = replace(RunConfig(), command=command, **settings)
    return cfg.validate()


# --- commands ----------------------------------------------------------------


@dataclass
class Outcome:
    checks: list
    payload: dict
    table: Optional[tuple] = None  # (columns, rows) for CSV output
    failure: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.failure is None and all(c.passed for c in self.checks)


def _single_k(cfg: RunConfig) -> float:
    if len(cfg.k) != 1:
        raise UsageError("this command takes a single --k")
    return cfg.k[0]


def _fixture(cfg: RunConfig) -> FixtureSpec:
    k = _single_k(cfg)
    if cfg.c is not None:
        if not cfg.b > cfg.a:
            raise UsageError("--c needs b > a")
        k = 1.0 - cfg.c / (2.0 * math.log(cfg.b / cfg.a))
    try:
        return FixtureSpec(cfg.fixture, cfg.a, cfg.b, k, z0=cfg.z0, theta=cfg.theta, nx=cfg.grid)
    except GsciError as exc:
        raise UsageError(f"invalid fixture: {exc}") from None


def _check_table(checks) -> tuple:
    cols = ("name", "value", "relation", "tol", "passed")
    return cols, [(c.name, c.value, c.relation, c.tol, c.passed) for c in checks]


def run_lemmas(cfg: RunConfig) -> Outcome:
    checks = lemma_suite() + [quadrature_area_check()]
    return Outcome(checks, {"max_lemma_f": checks[0].value})


def run_radial(cfg: RunConfig) -> Outcome:
    checks = radial_suite(cfg.lam, cfg.radius, cfg.nodes)
    return Outcome(checks, {})


def run_bol(cfg: RunConfig) -> Outcome:
    checks = bol_suite(cfg.lam, cfg.grid, cfg.z0, cfg.theta, cfg.radius, cfg.nodes)
    return Outcome(checks, {})


def run_sci(cfg: RunConfig) -> Outcome:
    spec = _fixture(cfg)
    pair = spec.build()
    norm = cfg.normalization
    v1, v2, c = pair.v1, pair.v2, pair.c
    if norm is Normalization.EXP_2V:
        v1 = convert_normalization(v1, Normalization.EXP_U, norm)
        v2 = convert_normalization(v2, Normalization.EXP_U, norm)
        c = 0.5 * c
    if spec.kind == "oversized":
        rep = remark13_check(v1, v2, c, norm)
    else:
        rep = sci_check(v1, v2, c, norm, eps=cfg.tol)
    checks = [Check(f"hypothesis.{name}", float(ok), 1.0, bool(ok), "==") for name, ok in rep.flags.items()]
    checks.append(Check("sci.margin", rep.margin, -rep.eps_disc, bool(rep.passed), ">="))
    if spec.kind == "concentric" and spec.k < 1:
        target = float(theorem24_margin(spec.a, spec.b, spec.k)) / (norm.weight)
        tol = rep.eps_disc + 1e-6 * rep.total
        checks.append(Check("sci.route_consistency", abs(rep.margin - target), tol, abs(rep.margin - target) <= tol))
    return Outcome(checks, {"fixture": spec.as_dict(), "sci": rep.as_dict()})


def _sweep_row(args) -> ScanRow:
    a, b, k, method, nodes = args
    if method == "closed" or k > 1:
        return sharpness_scan([a], [k], ratio=b / a)[0]
    R = float(lemma22_matching_x(a, b, k))
    p1 = solve_radial(SourceSpec.zero(), 2.0 * math.log(a), R, nodes)
    p2 = solve_radial(SourceSpec.zero(), 2.0 * math.log(b), R, nodes)
    total = float(enclosed_mass(p1, R) + enclosed_mass(p2, R))
    M = 2.0 * math.log(b / a)
    bound = EIGHT_PI * k
    return ScanRow(a, b, k, (1.0 - k) * M, M, total, bound, total - bound,
                   total / EIGHT_PI, float(p1.eps_disc + p2.eps_disc))


def run_sweep(cfg: RunConfig) -> Outcome:
    if not cfg.b > cfg.a:
        raise UsageError("sweep needs b > a")
    for k in cfg.k:
        if not 0 < k < 2:
            raise UsageError("sweep k values must lie in (0, 2)")
    jobs = [(cfg.a, cfg.b, k, cfg.method, cfg.nodes) for k in cfg.k]
    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            rows = list(pool.map(_sweep_row, jobs))
    else:
        rows = [_sweep_row(j) for j in jobs]
    slack = cfg.tol if cfg.tol is not None else 1e-10
    checks = []
    for r in rows:
        tol = slack + r.eps_disc
        if r.k < 1:
            checks.append(Check(f"margin_positive.k={r.k:g}", r.margin, -tol, r.margin > -tol, ">"))
        elif r.k == 1:
            checks.append(Check(f"margin_zero.k={r.k:g}", abs(r.margin), 1e-10 + tol, abs(r.margin) <= 1e-10 + tol))
        else:
            checks.append(Check(f"cap_sum_below_k.k={r.k:g}", r.cap_sum - r.k, 0.0, r.cap_sum < r.k, "<"))
    order = np.argsort([r.k for r in rows], kind="stable")
    bounds = np.array([rows[i].bound for i in order])
    checks.append(Check("bound_monotone_in_k", float(np.min(np.diff(bounds), initial=0.0)), 0.0,
                        bool(np.all(np.diff(bounds) >= 0)), ">="))
    return Outcome(checks, {"rows": [r.as_dict() for r in rows]},
                   table=(CSV_COLUMNS, [r.csv_values() for r in rows]))


def run_symmetrize(cfg: RunConfig) -> Outcome:
    spec = _fixture(cfg)
    pair = spec.build()
    res = symmetrize(pair.v1, pair.v2, cfg.lam, levels=cfg.levels, radial_nodes=cfg.nodes)
    phi = res.phi
    mass_model = float(bubble_area(cfg.lam, res.R_a))
    checks = [
        Check("phi_nonincreasing", float(np.max(np.diff(phi.values))), 0.0, bool(np.all(np.diff(phi.values) <= 0)), "<="),
        Check("model_mass_matches_v1", abs(mass_model - res.mass_v1), 1e-9 * res.mass_v1,
              abs(mass_model - res.mass_v1) <= 1e-9 * res.mass_v1),
    ]
    if cfg.tol is not None:
        checks.append(Check("equimeasurability_residual", res.residual, cfg.tol, res.residual <= cfg.tol))
    payload = {"fixture": spec.as_dict(), "a": cfg.lam, "R_a": res.R_a, "residual": res.residual,
               "phi0": float(phi.values[0]), "phiR": float(phi.values[-1]), "mass_v1": res.mass_v1}
    return Outcome(checks, payload, table=(("r", "phi", "psi"), res.rows()))


def run_pipeline(cfg: RunConfig) -> Outcome:
    spec = _fixture(cfg)
    rep = pipeline_endtoend(spec, cfg.eps, levels=cfg.levels, radial_nodes=cfg.nodes)
    checks = []
    for l in rep.links:
        if not l.gating:
            continue
        if l.name.startswith("hypothesis."):
            checks.append(Check(l.name, l.lhs, 1.0, l.passed, "=="))
        elif l.two_sided:
            checks.append(Check(l.name, abs(l.margin), l.tolerance, l.passed, "<="))
        else:
            checks.append(Check(l.name, l.margin, -l.tolerance, l.passed, ">="))
    failure = None
    if not rep.passed:
        failure = rep.halted_at or rep.failing[0]
    table = (("name", "lhs", "rhs", "margin", "tolerance", "passed", "gating"),
             [(l.name, l.lhs, l.rhs, l.margin, l.tolerance, l.passed, l.gating) for l in rep.links])
    return Outcome(checks, {"chain": rep.as_dict()}, table=table, failure=failure)


RUNNERS = {
    "lemmas": run_lemmas, "radial": run_radial, "bol": run_bol, "sci": run_sci,
    "sweep": run_sweep, "symmetrize": run_symmetrize, "pipeline": run_pipeline,
}


def run(cfg: RunConfig) -> tuple:
    """Execute one command; returns (exit status, rendered report, failing check or None)."""
    out = RUNNERS[cfg.command](cfg)
    return (0 if out.passed else 1), render(cfg, out), _failed(out)


# --- rendering -------------------------------------------------------------


def _clean(obj):
    """JSON-safe copy: non-finite floats become null, numpy scalars become Python ones."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def _cell(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _failed(out: Outcome) -> Optional[str]:
    if out.failure is not None:
        return out.failure
    return next((c.name for c in out.checks if not c.passed), None)


def render(cfg: RunConfig, out: Outcome) -> str:
    failed = _failed(out)
    if cfg.format == "json":
        doc = {
            "gsci": __version__,
            "command": cfg.command,
            "config": cfg.echo(),
            "passed": out.passed,
            "failed": failed,
            "checks": [c.as_dict() for c in out.checks],
            **out.payload,
        }
        return json.dumps(_clean(doc), indent=2, sort_keys=True) + "\n"
    if cfg.format == "csv":
        cols, rows = out.table if out.table is not None else _check_table(out.checks)
        buf = io.StringIO()
        buf.write(f"# gsci {cfg.command} csv v{CSV_VERSION}\n")
        # destination and worker count do not affect the rows, so they stay out of the header
        echo = {k: v for k, v in cfg.echo().items() if k not in ("out", "workers")}
        buf.write("# config " + " ".join(f"{k}={_cell(echo[k])}" for k in sorted(echo)) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for row in rows:
            w.writerow([_cell(x) for x in row])
        return buf.getvalue()
    lines = [f"gsci {cfg.command}"]
    lines += [f"  {k} = {v}" for k, v in sorted(cfg.echo().items())]
    for c in out.checks:
        mark = "PASS" if c.passed else "FAIL"
        lines.append(f"{mark}  {c.name:<40s} {c.value: .6e} {c.relation} {c.tol:.3e}")
    lines.append("passed" if out.passed else f"failed at {failed}")
    return "\n".join(lines) + "\n"


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = resolve_config(argv)
        status, text, failed = run(cfg)
    except UsageError as exc:
        sys.stderr.write(f"error: {exc}\n")
        if "usage:" not in str(exc):
            sys.stderr.write(build_parser().format_usage())
        return 2
    except GsciError as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return 2
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if status:
        sys.stderr.write(f"check failed: {failed}\n")
    return status


if __name__ == "__main__":
    raise SystemExit(main())
