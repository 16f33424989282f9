"""Parameter sweeps over channel and DS-BB84 settings with deterministic CSV output.

A :class:`SweepSpec` names the quantities to compute (``targets``), the grid
axes in the order they should vary (first axis slowest) and any pinned
parameters. Rows are emitted in lexicographic grid order whatever the
evaluation order was.

Recognized parameters:

``eta`` or ``loss_db``  channel transmissivity, or loss ``-10 log10(eta)``
``kappa``              Eve's share of the lost light
``n_e``                Eve's injected thermal photon number
``mu``                 TMSV / signal photon number; ``inf`` for asymptotic forms
``beta``               reconciliation efficiency for the CCQ rate
``rate_R, n_d, f_L``   DS-BB84 pulse rate, dark counts and reconciliation penalty
``eta_E``              overrides the default ``kappa * (1 - eta)`` for DS-BB84
"""

from __future__ import annotations

import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from itertools import product
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .bb84 import Bb84Params, optimize_mu, skr_restricted, skr_unrestricted
from .bounds import er_upper_bound_numeric, er_upper_bound_pure_loss
from .channel import ChannelParams
from .rates import key_rate, unrestricted_capacity, unrestricted_thermal_bounds

OUT_DIR_ENV = "WIRETAPKEY_OUT_DIR"

PARAM_DEFAULTS = {
    "kappa": 1.0,
    "n_e": 0.0,
    "mu": math.inf,
    "beta": 1.0,
    "rate_R": 1.0,
    "n_d": 0.0,
    "f_L": 1.0,
}
PARAMS = ("eta", "loss_db", "kappa", "n_e", "mu", "beta", "rate_R", "n_d", "f_L", "eta_E")


class SpecError(ValueError):
    """Invalid sweep specification; ``field`` names the offending entry."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


def _eta(p: Mapping[str, float]) -> float:
    if "loss_db" in p:
        return 10 ** (-p["loss_db"] / 10)
    return p["eta"]


def _channel(p: Mapping[str, float]) -> ChannelParams:
    return ChannelParams(_eta(p), p["kappa"], p["n_e"], p["mu"])


def _bb84(p: Mapping[str, float]) -> Bb84Params:
    eta = _eta(p)
    eta_e = p["eta_E"] if "eta_E" in p else p["kappa"] * (1 - eta)
    mu = 0.0 if math.isinf(p["mu"]) else p["mu"]
    return Bb84Params(rate_R=p["rate_R"], eta=eta, eta_E=eta_e, n_d=p["n_d"], f_L=p["f_L"], mu=mu)


def _er_ub(p):
    params = _channel(p)
    if params.n_e == 0:
        return er_upper_bound_pure_loss(params.eta, params.kappa)
    return er_upper_bound_numeric(params).bits


# each target maps a parameter dict to one or more named columns
TARGETS: dict[str, tuple[tuple[str, ...], Callable[[Mapping[str, float]], tuple[float, ...]]]] = {
    "dr": (("dr",), lambda p: (key_rate("DR", _channel(p)).bits_per_mode,)),
    "rr": (("rr",), lambda p: (key_rate("RR", _channel(p)).bits_per_mode,)),
    "ccq": (("ccq",), lambda p: (key_rate("CCQ", _channel(p), p["beta"]).bits_per_mode,)),
    "er_ub": (("er_ub",), lambda p: (_er_ub(p),)),
    "bb84_unrestricted": (("bb84_unrestricted",), lambda p: (skr_unrestricted(_bb84(p)),)),
    "bb84_restricted": (("bb84_restricted",), lambda p: (skr_restricted(_bb84(p)),)),
    "bb84_unrestricted_opt": (
        ("bb84_unrestricted_opt", "bb84_unrestricted_mu_star"),
        lambda p: _opt(p, "unrestricted"),
    ),
    "bb84_restricted_opt": (
        ("bb84_restricted_opt", "bb84_restricted_mu_star"),
        lambda p: _opt(p, "restricted"),
    ),
    "plob": (("plob",), lambda p: (unrestricted_capacity(_eta(p)),)),
    "plob_thermal": (
        ("plob_thermal_lb", "plob_thermal_ub"),
        lambda p: unrestricted_thermal_bounds(_eta(p), p["n_e"]),
    ),
}
ALL_TARGETS = ("dr", "rr", "ccq", "er_ub", "bb84_unrestricted", "bb84_restricted")


def _opt(p, model):
    res = optimize_mu(_bb84(p), model)
    return res.skr_star, res.mu_star


@dataclass(frozen=True)
class GridAxis:
    """``count`` points from ``min`` to ``max``, linear or log spaced, or explicit ``values``."""

    name: str
    values: tuple[float, ...]

    @classmethod
    def span(cls, name: str, lo: float, hi: float, count: int, scale: str = "linear") -> "GridAxis":
        if count < 1:
            raise SpecError(name, f"grid count must be >= 1, got {count}")
        if count == 1:
            return cls(name, (float(lo),))
        if scale == "linear":
            vals = np.linspace(lo, hi, count)
        elif scale == "log":
            if lo <= 0 or hi <= 0:
                raise SpecError(name, "log grid needs positive end points")
            vals = np.geomspace(lo, hi, count)
        else:
            raise SpecError(name, f"scale must be linear or log, got {scale!r}")
        return cls(name, tuple(float(v) for v in vals))


@dataclass(frozen=True)
class SweepSpec:
    name: str
    targets: tuple[str, ...]
    axes: tuple[GridAxis, ...] = ()
    fixed: Mapping[str, float] = field(default_factory=dict)
    description: str = ""
    output: str | None = None
    clamp: bool = True

    def __post_init__(self):
        if not self.targets:
            raise SpecError("targets", "at least one target is required")
        targets = []
        for t in self.targets:
            if t == "all":
                targets.extend(ALL_TARGETS)
            elif t in TARGETS:
                targets.append(t)
            else:
                raise SpecError("targets", f"unknown target {t!r}")
        object.__setattr__(self, "targets", tuple(dict.fromkeys(targets)))
        names = [a.name for a in self.axes]
        for n in list(names) + list(self.fixed):
            if n not in PARAMS:
                raise SpecError(n, "unknown parameter")
        if len(set(names)) != len(names):
            raise SpecError("axes", "duplicate axis")
        clash = set(names) & set(self.fixed)
        if clash:
            raise SpecError(sorted(clash)[0], "given both as axis and as fixed value")
        keys = set(names) | set(self.fixed)
        if "eta" in keys and "loss_db" in keys:
            raise SpecError("loss_db", "eta and loss_db are mutually exclusive")
        if "eta" not in keys and "loss_db" not in keys:
            raise SpecError("eta", "either eta or loss_db must be given")
        for a in self.axes:
            if not a.values:
                raise SpecError(a.name, "empty axis")

    @property
    def columns(self) -> tuple[str, ...]:
        out = [a.name for a in self.axes]
        for t in self.targets:
            out.extend(TARGETS[t][0])
        return tuple(out) + ("error",)

    def points(self) -> list[dict[str, float]]:
        base = dict(PARAM_DEFAULTS)
        base.update(self.fixed)
        rows = []
        for combo in product(*(a.values for a in self.axes)):
            p = dict(base)
            p.update(zip((a.name for a in self.axes), combo))
            rows.append(p)
        return rows


@dataclass(frozen=True)
class SweepRow:
    point: Mapping[str, float]
    values: tuple[float | None, ...]
    error: str


# lower-bound columns that are clamped at zero unless the sweep asks for raw values
CLAMPED = {"dr", "rr", "ccq", "plob_thermal_lb"}


def evaluate_point(targets: Sequence[str], point: Mapping[str, float], clamp: bool = True) -> SweepRow:
    """Evaluate every target at one grid point; failures fill the error column."""
    values: list[float | None] = []
    errors = []
    for t in targets:
        cols, fn = TARGETS[t]
        try:
            res = tuple(float(v) for v in fn(point))
        except (ValueError, ArithmeticError, np.linalg.LinAlgError, RuntimeError) as exc:
            res = (None,) * len(cols)
            errors.append(f"{t}: {type(exc).__name__}: {exc}")
        if clamp:
            res = tuple(max(v, 0.0) if (v is not None and c in CLAMPED) else v for c, v in zip(cols, res))
        values.extend(res)
    return SweepRow(point, tuple(values), "; ".join(errors))


def _evaluate_star(args):
    return evaluate_point(*args)


def run_sweep(spec: SweepSpec, jobs: int = 1) -> list[SweepRow]:
    """Rows in grid order; ``jobs > 1`` evaluates points in worker processes."""
    pts = spec.points()
    if jobs > 1 and len(pts) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            args = [(spec.targets, p, spec.clamp) for p in pts]
            return list(pool.map(_evaluate_star, args, chunksize=4))
    return [evaluate_point(spec.targets, p, spec.clamp) for p in pts]


def fmt(x: float | None) -> str:
    if x is None:
        return ""
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return f"{x:.12g}"


def metadata_lines(spec: SweepSpec) -> list[str]:
    fixed = ", ".join(f"{k}={fmt(v)}" for k, v in sorted(spec.fixed.items()))
    lines = [f"# sweep: {spec.name}"]
    if spec.description:
        lines.append(f"# {spec.description}")
    lines.append(f"# fixed: {fixed or '(none)'}")
    lines.append(f"# lower bounds clamped at zero: {'yes' if spec.clamp else 'no'}")
    if any(t.startswith("bb84") for t in spec.targets):
        lines.append("# bb84: eta is the overall transmissivity; eta_E = kappa*(1-eta) unless eta_E is given")
    return lines


def to_csv(spec: SweepSpec, rows: Iterable[SweepRow], timestamp: bool = True) -> str:
    buf = io.StringIO(newline="")
    if timestamp:
        buf.write(f"# generated {datetime.now(timezone.utc).isoformat(timespec='seconds')}\n")
    for line in metadata_lines(spec):
        buf.write(line + "\n")
    buf.write(",".join(spec.columns) + "\n")
    axis_names = [a.name for a in spec.axes]
    for r in rows:
        cells = [fmt(r.point[n]) for n in axis_names]
        cells += [fmt(v) for v in r.values]
        err = r.error.replace('"', "'")
        cells.append(f'"{err}"' if ("," in err or "\n" in err) else err)
        buf.write(",".join(cells) + "\n")
    return buf.getvalue()


def gnuplot_script(spec: SweepSpec, csv_path: Path) -> str:
    """Companion plot script: first axis on x, one curve per output column."""
    x = spec.axes[0].name if spec.axes else "index"
    outs = [c for c in spec.columns[len(spec.axes) :] if c != "error" and not c.endswith("mu_star")]
    lines = [
        f"# plot script for {csv_path.name}",
        "set datafile separator ','",
        "set datafile commentschars '#'",
        "set key autotitle columnhead",
        f"set xlabel '{x}'",
    ]
    if spec.axes and spec.axes[0].name in ("mu", "kappa"):
        lines.append("set logscale x")
    xcol = 1
    plots = [f"'{csv_path.name}' using {xcol}:'{c}' with lines" for c in outs]
    lines.append("plot " + ", \\\n     ".join(plots))
    return "\n".join(lines) + "\n"


def default_out_dir() -> Path:
    return Path(os.environ.get(OUT_DIR_ENV, "."))


def write_sweep(
    spec: SweepSpec,
    out: Path | None = None,
    timestamp: bool = True,
    jobs: int = 1,
    plot: bool = False,
) -> tuple[Path, list[SweepRow]]:
    rows = run_sweep(spec, jobs)
    path = Path(out) if out is not None else default_out_dir() / (spec.output or f"{spec.name}.csv")
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(to_csv(spec, rows, timestamp))
    if plot:
        path.with_suffix(".gp").write_text(gnuplot_script(spec, path), encoding="utf-8")
    return path, rows


# ------------------------------------------------------------------ spec files


def parse_value(text: str) -> float:
    t = text.strip().lower()
    if t in ("inf", "infinity", "+inf"):
        return math.inf
    return float(t)


def parse_axis(name: str, text: str) -> GridAxis | float:
    """``v`` pins a value; ``a,b,c`` lists values; ``lo:hi:count[:scale]`` spans."""
    text = text.strip()
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) not in (3, 4):
                raise SpecError(name, "grid must be lo:hi:count[:linear|log]")
            scale = parts[3].strip() if len(parts) == 4 else "linear"
            return GridAxis.span(name, parse_value(parts[0]), parse_value(parts[1]), int(parts[2]), scale)
        if "," in text:
            return GridAxis(name, tuple(parse_value(v) for v in text.split(",") if v.strip()))
        return parse_value(text)
    except ValueError as exc:
        if isinstance(exc, SpecError):
            raise
        raise SpecError(name, f"cannot parse {text!r}") from exc


def read_config(path: Path | str) -> dict[str, str]:
    """Flat ``key = value`` file; ``#`` starts a comment; later keys win."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SpecError(f"line {lineno}", f"expected key=value, got {raw!r}")
        k, v = line.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def spec_from_config(cfg: Mapping[str, str], name: str = "custom") -> SweepSpec:
    cfg = dict(cfg)
    targets = tuple(t.strip() for t in cfg.pop("targets", "").split(",") if t.strip())
    name = cfg.pop("name", name)
    output = cfg.pop("output", None)
    description = cfg.pop("description", "")
    clamp = cfg.pop("clamp", "1").strip().lower() not in ("0", "false", "no")
    axes, fixed = [], {}
    for k, v in cfg.items():
        if k not in PARAMS:
            raise SpecError(k, "unknown parameter")
        parsed = parse_axis(k, v)
        if isinstance(parsed, GridAxis):
            axes.append(parsed)
        else:
            fixed[k] = parsed
    return SweepSpec(name, targets, tuple(axes), fixed, description, output, clamp)


# --------------------------------------------------------------------- presets


def _loss(lo=0.1, hi=20.0, count=40):
    return GridAxis.span("loss_db", lo, hi, count)


def _presets() -> dict[str, SweepSpec]:
    log_kappa = GridAxis.span("kappa", 0.01, 1.0, 41, "log")
    mu_axis = GridAxis.span("mu", 1e-3, 1e2, 51, "log")
    specs = [
        SweepSpec(
            "fig3a",
            ("dr", "rr"),
            (log_kappa,),
            {"eta": 0.6, "n_e": 0.0, "mu": math.inf},
            "pure loss, DR vs RR limits against kappa",
        ),
        SweepSpec(
            "fig3b",
            ("dr", "rr", "plob"),
            (_loss(0.1, 30.0, 60),),
            {"kappa": 0.1, "n_e": 0.0, "mu": math.inf},
            "pure loss, DR vs RR limits against loss, with the unrestricted capacity",
        ),
        SweepSpec(
            "fig4",
            ("dr", "rr"),
            (GridAxis("kappa", (0.1, 0.9)), GridAxis.span("mu", 1e-2, 1e4, 49, "log")),
            {"eta": 0.6, "n_e": 0.1},
            "rates against input power; eta and n_e are documented defaults",
        ),
        SweepSpec(
            "fig6",
            ("dr", "rr"),
            (GridAxis.span("n_e", 0.0, 2.0, 41),),
            {"eta": 0.8, "kappa": 0.4, "mu": math.inf},
            "rates against thermal noise",
        ),
        SweepSpec(
            "fig7",
            ("dr", "rr"),
            (GridAxis.span("eta", 0.01, 0.99, 50),),
            {"kappa": 0.6, "n_e": 1.0, "mu": math.inf},
            "rates against transmissivity",
        ),
        SweepSpec(
            "fig8",
            ("dr", "rr"),
            (GridAxis.span("kappa", 0.01, 1.0, 45),),
            {"eta": 0.7, "n_e": 1.0, "mu": math.inf},
            "rates against kappa",
        ),
        SweepSpec(
            "fig9",
            ("dr", "rr", "er_ub"),
            (GridAxis("kappa", (0.01, 0.1, 0.5)), _loss(0.1, 20.0, 40)),
            {"n_e": 0.0, "mu": math.inf},
            "pure loss upper bound against the DR/RR lower bounds",
        ),
        SweepSpec(
            "fig10",
            ("dr", "rr", "er_ub"),
            (GridAxis("n_e", (0.05, 0.5)), GridAxis("kappa", (0.01, 0.1, 0.5)), _loss(0.5, 20.0, 14)),
            {"mu": math.inf},
            "thermal upper bound (supremum over a mu schedule) against the lower bounds",
        ),
        SweepSpec(
            "fig11",
            ("rr", "plob"),
            (GridAxis("n_e", (0.05, 0.5)), GridAxis("kappa", (0.01, 0.1, 0.5, 1.0)), _loss(0.1, 30.0, 60)),
            {"mu": math.inf},
            "RR rate against loss for several kappa",
        ),
        SweepSpec(
            "fig12",
            ("rr", "plob"),
            (GridAxis("kappa", (0.01, 0.1)), GridAxis("n_e", (0.0, 0.05, 0.5, 1.0)), _loss(0.1, 30.0, 60)),
            {"mu": math.inf},
            "RR rate against loss for several n_e",
        ),
        SweepSpec(
            "fig13",
            ("rr", "ccq", "bb84_restricted"),
            (GridAxis("kappa", (0.01, 0.1, 0.5)), mu_axis),
            {"eta": 0.1, "n_e": 0.0, "beta": 1.0, "f_L": 1.0, "n_d": 0.0, "rate_R": 1.0},
            "CV (bits/mode) vs DS-BB84 (bits/pulse) over pure loss against mu",
        ),
        SweepSpec(
            "fig14",
            ("rr", "ccq", "bb84_restricted"),
            (GridAxis("kappa", (0.01, 0.1)), mu_axis),
            {"eta": 0.1, "n_e": 5e-4, "n_d": 5e-4, "beta": 1.0, "f_L": 1.0, "rate_R": 1.0},
            "CV vs DS-BB84 with weak thermal noise",
        ),
        SweepSpec(
            "fig15",
            ("rr", "ccq", "bb84_restricted"),
            (mu_axis,),
            {"eta": 0.1, "kappa": 0.01, "n_e": 5e-4, "n_d": 5e-4, "beta": 0.95, "f_L": 1.1, "rate_R": 1.0},
            "imperfect reconciliation, kappa = 0.01",
        ),
        SweepSpec(
            "fig16",
            ("rr", "ccq", "bb84_restricted"),
            (mu_axis,),
            {"eta": 0.1, "kappa": 0.1, "n_e": 5e-4, "n_d": 5e-4, "beta": 0.95, "f_L": 1.1, "rate_R": 1.0},
            "imperfect reconciliation, kappa = 0.1",
        ),
        SweepSpec(
            "fig17",
            ("rr", "ccq", "bb84_restricted_opt", "er_ub", "plob", "plob_thermal"),
            (_loss(0.5, 20.0, 14),),
            {"kappa": 0.1, "n_e": 0.5, "n_d": 0.5, "mu": math.inf, "beta": 1.0, "f_L": 1.0, "rate_R": 1.0},
            "CV at mu = inf vs DS-BB84 optimized over mu, with bound reference lines",
        ),
        SweepSpec(
            "fig18",
            ("bb84_unrestricted", "bb84_restricted"),
            (GridAxis("kappa", (0.01, 0.1, 1.0)), GridAxis.span("mu", 1e-3, 10.0, 81, "log")),
            {"eta": 0.005, "n_d": 1e-4, "f_L": 1.1, "rate_R": 1e9},
            "DS-BB84 SKR (bits/s) against mu with the tabulated parameters",
        ),
    ]
    return {s.name: s for s in specs}


def presets() -> dict[str, SweepSpec]:
    return _presets()
