"""SNR sweeps over the bounds, with CSV and SVG output.

A sweep fixes a :class:`~ergobound.channel_sim.SystemConfig` and evaluates the
requested bounds on an SNR grid (``etx = snr * n0`` with ``n0`` fixed).  All
grid points share the same channel draws.  Rates in a :class:`SweepResult`
are *sum* rates, i.e. ``K`` times the per-user bound.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from .bounds import (
    BoundId,
    BoundResult,
    lb1_from_moments,
    lb2,
    lb3,
    lb3_term1_conj_closed_form,
    lb3_zf_closed_form,
    ub_monte_carlo,
    ub_zf_closed_form,
)
from .channel_sim import CSIModel, Precoding, SystemConfig, simulate_snr_grid
from .moments import (
    DEFAULT_BINS,
    MIN_SAMPLES,
    MIN_SAMPLES_PER_BIN,
    analytic_moments,
    conditional_interference,
    empirical_moments,
)

__all__ = [
    "CSV_HEADER",
    "DEFAULT_SNR_GRID_DB",
    "CLOSED_FORM_COMBINATIONS",
    "ConfigError",
    "SweepSpec",
    "SweepRow",
    "SweepResult",
    "run_sweep",
    "write_csv",
    "read_csv",
    "format_csv",
    "render_svg",
    "load_config",
    "parse_config",
]

CSV_HEADER = ("snr_db", "precoder", "csi", "bound", "method", "sum_rate_bits", "stderr", "samples", "seed")
DEFAULT_SNR_GRID_DB = tuple(float(x) for x in range(-10, 31, 2))
CLOSED_FORM_COMBINATIONS = ((Precoding.CONJ, CSIModel.PERFECT), (Precoding.ZF, CSIModel.PERFECT))
_BOUND_ORDER = {b: i for i, b in enumerate(BoundId)}


class ConfigError(ValueError):
    """Invalid sweep configuration (maps to CLI exit code 2)."""


@dataclass(frozen=True)
class SweepSpec:
    base: SystemConfig
    snr_grid_db: tuple = DEFAULT_SNR_GRID_DB
    bounds: tuple = tuple(BoundId)
    closed_form: bool = False
    output_path: Optional[str] = None
    plot: bool = False

    def __post_init__(self):
        grid = tuple(float(x) for x in self.snr_grid_db)
        if not grid:
            raise ConfigError("snr_grid_db must not be empty")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError("snr_grid_db must be strictly increasing")
        try:
            bounds = tuple(sorted({BoundId(b) for b in self.bounds}, key=_BOUND_ORDER.get))
        except ValueError as exc:
            raise ConfigError(f"unknown bound: {exc}") from None
        if not bounds:
            raise ConfigError("at least one bound must be requested")
        if self.closed_form and (self.base.precoder, self.base.csi) not in CLOSED_FORM_COMBINATIONS:
            valid = ", ".join(f"({p.value}, {c.value})" for p, c in CLOSED_FORM_COMBINATIONS)
            raise ConfigError(
                f"closed forms are not available for ({self.base.precoder.value}, "
                f"{self.base.csi.value}); valid combinations: {valid}")
        object.__setattr__(self, "snr_grid_db", grid)
        object.__setattr__(self, "bounds", bounds)
        if _needs_samples(self):
            need = MIN_SAMPLES
            if BoundId.LB3 in bounds and self.base.csi is CSIModel.PILOT_MMSE:
                need = DEFAULT_BINS * MIN_SAMPLES_PER_BIN
            if self.base.samples < need:
                raise ConfigError(f"samples must be at least {need} for this sweep, got {self.base.samples}")


@dataclass(frozen=True)
class SweepRow:
    snr_db: float
    precoder: str
    csi: str
    bound: str
    method: str
    sum_rate_bits: float
    stderr: float
    samples: int
    seed: int

    def sort_key(self):
        return (self.snr_db, _BOUND_ORDER[BoundId(self.bound)])


@dataclass
class SweepResult:
    rows: list = field(default_factory=list)

    def sorted(self) -> "SweepResult":
        return SweepResult(sorted(self.rows, key=SweepRow.sort_key))

    def series(self, bound) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(snr_db, sum_rate, stderr)`` arrays for one bound, sorted by SNR."""
        bound = BoundId(bound).value
        rows = sorted((r for r in self.rows if r.bound == bound), key=lambda r: r.snr_db)
        return (np.array([r.snr_db for r in rows]), np.array([r.sum_rate_bits for r in rows]),
                np.array([r.stderr for r in rows]))

    def bounds(self) -> list[str]:
        present = {r.bound for r in self.rows}
        return [b.value for b in BoundId if b.value in present]


def _needs_samples(spec: SweepSpec) -> bool:
    if not spec.closed_form:
        return True
    if spec.base.precoder is Precoding.ZF:
        return False
    # ConjBF has no closed-form UB and LB3 keeps a Monte-Carlo term.
    return any(b is not BoundId.LB1 for b in spec.bounds)


def _point(spec: SweepSpec, cfg: SystemConfig, samples) -> list[BoundResult]:
    want = set(spec.bounds)
    n0, T = cfg.n0, cfg.T
    analytic = spec.closed_form
    m = analytic_moments(cfg) if analytic else empirical_moments(samples)
    ub = None
    if want & {BoundId.UB, BoundId.LB2}:
        if analytic and cfg.precoder is Precoding.ZF:
            ub = ub_zf_closed_form(cfg)
        else:
            ub = ub_monte_carlo(samples, n0)
    out = []
    if BoundId.UB in want:
        out.append(ub)
    if BoundId.LB1 in want:
        out.append(lb1_from_moments(m, n0))
    if BoundId.LB2 in want:
        out.append(lb2(ub, m, T, n0))
    if BoundId.LB3 in want:
        if analytic and cfg.precoder is Precoding.ZF:
            out.append(lb3_zf_closed_form(cfg))
        else:
            curve = conditional_interference(cfg, samples)
            term1 = lb3_term1_conj_closed_form(cfg) if analytic else None
            out.append(lb3(samples, m, curve, T, n0, term1_closed=term1))
    return out


def run_sweep(spec: SweepSpec, workers: int = 1) -> SweepResult:
    """Evaluate every requested bound at every grid SNR.

    ``workers`` only changes wall time; results are bit-identical for any
    value.
    """
    base = spec.base
    snrs = [10.0 ** (db / 10.0) for db in spec.snr_grid_db]
    if _needs_samples(spec):
        streams = simulate_snr_grid(base, snrs, workers=workers)
    else:
        streams = [None] * len(snrs)
    rows = []
    for db, snr, samples in zip(spec.snr_grid_db, snrs, streams):
        cfg = base.with_snr(snr)
        for res in _point(spec, cfg, samples):
            rows.append(SweepRow(db, base.precoder.value, base.csi.value, res.bound_id.value,
                                 res.method.value, base.K * res.rate, base.K * res.stderr,
                                 res.samples, base.seed))
    return SweepResult(rows).sorted()


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if isinstance(x, str):
        return x
    return f"{float(x):.9g}"


def format_csv(result: SweepResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in result.sorted().rows:
        writer.writerow([_fmt(getattr(r, name)) for name in CSV_HEADER])
    return buf.getvalue()


def write_csv(result: SweepResult, path) -> None:
    """Write ``result`` with 9 significant digits, rows sorted by (snr, bound)."""
    Path(path).write_text(format_csv(result), encoding="ascii")


def read_csv(path) -> SweepResult:
    with open(path, newline="", encoding="ascii") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != CSV_HEADER:
            raise ValueError(f"unexpected CSV header {header}")
        rows = []
        for rec in reader:
            d = dict(zip(CSV_HEADER, rec))
            rows.append(SweepRow(float(d["snr_db"]), d["precoder"], d["csi"], d["bound"], d["method"],
                                 float(d["sum_rate_bits"]), float(d["stderr"]), int(d["samples"]),
                                 int(d["seed"])))
    return SweepResult(rows)


_COLORS = {"UB": "#000000", "LB1": "#1f77b4", "LB2": "#d62728", "LB3": "#2ca02c"}


def _nice_ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    span = hi - lo if hi > lo else 1.0
    raw = span / target
    mag = 10 ** math.floor(math.log10(raw))
    step = min((s * mag for s in (1, 2, 5, 10) if s * mag >= raw), default=10 * mag)
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-9 * step:
        ticks.append(round(t, 10))
        t += step
    return ticks


def render_svg(result: SweepResult, path, clamp_lb2: bool = False, title: Optional[str] = None) -> None:
    """Sum rate vs SNR, one polyline per bound, as a standalone SVG 1.1 file.

    With ``clamp_lb2`` negative LB2 values are drawn at 0.
    """
    if not result.rows:
        raise ValueError("cannot plot an empty result")
    series = {}
    for b in result.bounds():
        x, y, _ = result.series(b)
        if b == BoundId.LB2.value and clamp_lb2:
            y = np.maximum(y, 0.0)
        series[b] = (x, y)
    xs = np.concatenate([s[0] for s in series.values()])
    ys = np.concatenate([s[1] for s in series.values()])
    x0, x1 = float(xs.min()), float(xs.max())
    if x1 == x0:
        x0, x1 = x0 - 1.0, x1 + 1.0
    y0, y1 = min(0.0, float(ys.min())), float(ys.max())
    if y1 <= y0:
        y1 = y0 + 1.0
    y1 += 0.05 * (y1 - y0)

    width, height = 640, 480
    left, right, top, bottom = 70, 130, 40, 60
    pw, ph = width - left - right, height - top - bottom

    def px(x):
        return left + (x - x0) / (x1 - x0) * pw

    def py(y):
        return top + (1.0 - (y - y0) / (y1 - y0)) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#000000"/>',
    ]
    for t in _nice_ticks(x0, x1):
        out.append(f'<line x1="{px(t):.2f}" y1="{top + ph}" x2="{px(t):.2f}" y2="{top + ph + 5}" stroke="#000000"/>')
        out.append(f'<text x="{px(t):.2f}" y="{top + ph + 20}" font-size="12" text-anchor="middle">{t:g}</text>')
    for t in _nice_ticks(y0, y1):
        out.append(f'<line x1="{left - 5}" y1="{py(t):.2f}" x2="{left}" y2="{py(t):.2f}" stroke="#000000"/>')
        out.append(f'<text x="{left - 8}" y="{py(t) + 4:.2f}" font-size="12" text-anchor="end">{t:g}</text>')
    out.append(f'<text x="{left + pw / 2}" y="{height - 15}" font-size="14" text-anchor="middle">SNR [dB]</text>')
    out.append(f'<text x="18" y="{top + ph / 2}" font-size="14" text-anchor="middle" '
               f'transform="rotate(-90 18 {top + ph / 2})">sum rate [bits/channel use]</text>')
    if title:
        out.append(f'<text x="{left + pw / 2}" y="25" font-size="14" text-anchor="middle">{title}</text>')
    for i, (b, (x, y)) in enumerate(series.items()):
        pts = " ".join(f"{px(a):.2f},{py(c):.2f}" for a, c in zip(x, y))
        color = _COLORS.get(b, "#7f7f7f")
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{pts}"/>')
        ly = top + 20 + 22 * i
        out.append(f'<line x1="{left + pw + 15}" y1="{ly}" x2="{left + pw + 45}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{left + pw + 52}" y="{ly + 4}" font-size="12">{b}</text>')
    out.append("</svg>")
    Path(path).write_text("\n".join(out) + "\n", encoding="utf-8")


_SYSTEM_KEYS = {"M", "K", "T", "n0", "precoder", "csi", "seed", "samples", "pilot_snr_db"}
_SPEC_KEYS = {"snr_grid_db", "bounds", "closed_form", "output_path", "plot"}


def parse_config(data: dict) -> SweepSpec:
    """Build a :class:`SweepSpec` from a flat mapping; unknown keys are errors."""
    if not isinstance(data, dict):
        raise ConfigError("config must be a flat key-value mapping")
    unknown = sorted(set(data) - _SYSTEM_KEYS - _SPEC_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    for key, value in data.items():
        if isinstance(value, dict):
            raise ConfigError(f"nested values are not allowed ({key})")
    missing = [k for k in ("M", "K") if k not in data]
    if missing:
        raise ConfigError(f"missing required keys: {', '.join(missing)}")
    sys_kw = {k: data[k] for k in _SYSTEM_KEYS & set(data) if k != "pilot_snr_db"}
    if data.get("pilot_snr_db") is not None:
        sys_kw["pilot_snr"] = 10.0 ** (float(data["pilot_snr_db"]) / 10.0)
    spec_kw = {k: data[k] for k in _SPEC_KEYS & set(data)}
    if "snr_grid_db" in spec_kw:
        spec_kw["snr_grid_db"] = tuple(np.atleast_1d(spec_kw["snr_grid_db"]).astype(float).tolist())
    if "bounds" in spec_kw:
        b = spec_kw["bounds"]
        spec_kw["bounds"] = (b,) if isinstance(b, str) else tuple(b)
    try:
        base = SystemConfig(**sys_kw)
        return SweepSpec(base=base, **spec_kw)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def load_config(path) -> SweepSpec:
    """Read a flat YAML mapping, e.g.::

        M: 10
        K: 5
        T: 168
        precoder: ZFBF
        csi: Perfect
        bounds: [UB, LB1, LB2, LB3]
        snr_grid_db: [-10, 0, 10, 20, 30]
    """
    try:
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    return parse_config(data or {})
