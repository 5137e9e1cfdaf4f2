"""Empirical statistics along orbits.

Orbit engines
-------------
Three engines feed the statistics, chosen per map:

* generic maps run in double precision (the default scalar/batch path);
* integer-coefficient piecewise-linear maps (doubling, tent, zigzag3) run
  exactly on rationals p/q.  Double-precision orbits of such maps shed one
  mantissa bit per step and collapse onto 0 within ~50 steps, so long-run
  float statistics would be pure artifact.  Float seeds are moved to the
  nearest p/ORBIT_PRIME, whose orbit cannot hit the critical set and whose
  period exceeds 1e9 steps; Fraction seeds keep their own denominator.
* dyadic-affine contracting maps with big-integer coefficients (the lorenz
  family) run on fixed-point mantissas with bounded truncation.

Statistics are reported at dyadic checkpoints n = 2^k; "tail" quantities
are sup/inf of partial values over the window (n/2, n].
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import dyadic
from .catalog import ORBIT_PRIME
from .cells import cells_of_points, ncells
from .maps import PiecewiseMap, Termination
from .observables import Observable

#: Mantissa precision for dyadic-affine exact orbits (above the lorenz
#: intercept precision, so truncation noise stays below every feature).
DYADIC_ORBIT_BITS = 41000


# ---------------------------------------------------------------------------
# orbit engines


def orbit_points(pmap: PiecewiseMap, x0, n: int) -> tuple[np.ndarray, bool]:
    """Orbit array x_0..x_n (possibly shorter) plus a truncation flag."""
    if isinstance(x0, Fraction) and pmap.integer_linear:
        return _exact_orbit_fraction(pmap, x0, n)
    if pmap.integer_linear:
        return _exact_orbit_prime(pmap, float(x0), n), False
    if pmap.dyadic_affine:
        x0 = x0 if isinstance(x0, Fraction) else Fraction(float(x0))
        return _dyadic_orbit(pmap, x0, n), False
    orb = pmap.iterate_orbit(float(x0), n)
    return orb.points, orb.termination is not Termination.HORIZON


def _linear_tables(pmap: PiecewiseMap):
    ms = [int(b.coeffs[1]) for b in pmap.branches]
    bs = [int(b.coeffs[0]) for b in pmap.branches]
    thresholds = [(int(t.numerator), int(t.denominator)) for t in pmap.breakpoints[1:-1]]
    return ms, bs, thresholds


def _exact_orbit_fraction(pmap: PiecewiseMap, x0: Fraction, n: int):
    """Exact orbit of a rational seed under an integer-linear map.

    Follows the truncation convention when the orbit hits a breakpoint
    exactly: pass through continuity-flagged critical points, stop at
    discontinuities.
    """
    ms, bs, thresholds = _linear_tables(pmap)
    crit = {c: i for i, c in enumerate(pmap.critical)}
    den = x0.denominator
    p = x0.numerator
    pts = np.empty(n + 1)
    pts[0] = p / den
    for k in range(n):
        idx = 0
        hit = None
        for bp, (tn, td) in zip(pmap.breakpoints[1:-1], thresholds):
            cmp = p * td - tn * den
            if cmp == 0:
                hit = bp
                break
            if cmp > 0:
                idx += 1
        if hit is not None:
            ci = crit.get(hit)
            if ci is not None and not pmap.continuity[ci]:
                return pts[: k + 1], True
            val = pmap.one_sided_limit_exact(hit, "minus")
            p, den = val.numerator, val.denominator
        else:
            p = ms[idx] * p + bs[idx] * den
        pts[k + 1] = p / den
    return pts, False


def _exact_orbit_prime(pmap: PiecewiseMap, x0: float, n: int, q: int = ORBIT_PRIME):
    """Exact /q orbit of the nearest q-rational to a float seed."""
    ms, bs, thresholds = _linear_tables(pmap)
    tq = [tn * q // td for tn, td in thresholds]  # p > tq[i]  <=>  x > threshold_i
    p = min(max(int(round(x0 * q)), 1), q - 1)
    pts = np.empty(n + 1)
    pts[0] = p / q
    for k in range(n):
        idx = 0
        for t in tq:
            if p > t:
                idx += 1
        p = ms[idx] * p + bs[idx] * q
        pts[k + 1] = p / q
    return pts


def _dyadic_orbit(
    pmap: PiecewiseMap, x0: Fraction, n: int, p_bits: int = DYADIC_ORBIT_BITS
) -> np.ndarray:
    """Truncated-mantissa orbit for dyadic-affine contracting maps."""
    coeffs = [
        (dyadic.from_fraction(b.coeffs[0], p_bits), b.coeffs[1]) for b in pmap.branches
    ]
    cuts = [dyadic.from_fraction(c, p_bits) for c in pmap.breakpoints[1:-1]]
    x = dyadic.from_fraction(x0, p_bits)
    pts = np.empty(n + 1)
    pts[0] = dyadic.to_float(x, p_bits)
    for k in range(n):
        idx = 0
        for t in cuts:
            if x > t:
                idx += 1
        b0, slope = coeffs[idx]
        x = (x * slope.numerator) // slope.denominator + b0
        pts[k + 1] = dyadic.to_float(x, p_bits)
    return pts


def dyadic_orbit_cells(
    pmap: PiecewiseMap,
    x0: Fraction,
    n: int,
    eps_bits: int,
    transient: int = 0,
    p_bits: int = DYADIC_ORBIT_BITS,
) -> np.ndarray:
    """Exact cell indices visited by a dyadic-affine orbit over [transient, n]."""
    coeffs = [
        (dyadic.from_fraction(b.coeffs[0], p_bits), b.coeffs[1]) for b in pmap.branches
    ]
    cuts = [dyadic.from_fraction(c, p_bits) for c in pmap.breakpoints[1:-1]]
    x = dyadic.from_fraction(x0, p_bits)
    nc = 1 << eps_bits
    cells = set()
    for k in range(n + 1):
        if k >= transient:
            cells.add(min((x << eps_bits) >> p_bits, nc - 1))
        if k == n:
            break
        idx = 0
        for t in cuts:
            if x > t:
                idx += 1
        b0, slope = coeffs[idx]
        x = (x * slope.numerator) // slope.denominator + b0
    return np.asarray(sorted(cells), dtype=np.int64)


# ---------------------------------------------------------------------------
# batch engine


@dataclass
class BatchCells:
    """Visited-cell masks for a batch of seeds (iterate times 1..n)."""

    fine_bits: int
    window_visited: np.ndarray       # (n_samples, 2**fine_bits) bool over [transient, n]
    counts: np.ndarray | None        # (n_samples, 2**fine_bits) int64 over [1, n]
    final: np.ndarray
    n: int
    transient: int

    @property
    def eps(self) -> float:
        return 2.0 ** -self.fine_bits


def batch_cells(
    pmap: PiecewiseMap,
    x0s: np.ndarray,
    n: int,
    transient: int,
    fine_bits: int = 14,
    want_counts: bool = False,
    chunk: int = 4096,
) -> BatchCells:
    """Cell visit masks (and optional counts) for many seeds simultaneously."""
    x0s = np.asarray(x0s, dtype=float)
    ns = len(x0s)
    nf = 1 << fine_bits
    visited = np.zeros(ns * nf, dtype=bool)
    counts = np.zeros(ns * nf, dtype=np.int64) if want_counts else None
    offsets = np.arange(ns, dtype=np.int64) * nf

    exact = pmap.integer_linear
    if exact:
        ms, bs, thresholds = _linear_tables(pmap)
        q = ORBIT_PRIME
        tq = np.asarray([tn * q // td for tn, td in thresholds], dtype=np.int64)
        state = np.clip(np.round(x0s * q).astype(np.int64), 1, q - 1)
        ms_a = np.asarray(ms, dtype=np.int64)
        bs_a = np.asarray(bs, dtype=np.int64) * q
    else:
        breaks = np.asarray(pmap.fbreaks[1:-1])
        branch_coeffs = [np.asarray(b.fcoeffs) for b in pmap.branches]
        state = x0s.copy()

    events = np.empty(chunk * ns, dtype=np.int64)
    step = 0  # iterates produced
    while step < n:
        block = min(chunk, n - step)
        block_start = step + 1
        pos = 0
        for _ in range(block):
            if exact:
                idx = (state[:, None] > tq[None, :]).sum(axis=1)
                state = ms_a[idx] * state + bs_a[idx]
                cellv = (state << fine_bits) // q
            else:
                idx = np.searchsorted(breaks, state, side="left")
                out = np.empty_like(state)
                for bi, cf in enumerate(branch_coeffs):
                    mask = idx == bi
                    if not mask.any():
                        continue
                    xs = state[mask]
                    acc = np.full(xs.shape, cf[-1])
                    for c in cf[-2::-1]:
                        acc = acc * xs + c
                    out[mask] = acc
                np.clip(out, 0.0, 1.0, out=out)
                # exact endpoint hits absorb float orbits at repelling fixed
                # points (true orbits re-escape); nudge one ulp inward to keep
                # the samples Lebesgue-generic
                out[out == 0.0] = 2.0**-1022
                out[out == 1.0] = 1.0 - 2.0**-53
                state = out
                cellv = np.minimum((state * nf).astype(np.int64), nf - 1)
            events[pos : pos + ns] = offsets + cellv
            pos += ns
            step += 1
        ev = events[:pos]
        if want_counts:
            counts += np.bincount(ev, minlength=ns * nf)
        t0 = max(transient, block_start)
        if step >= t0:
            skip = (t0 - block_start) * ns
            visited[ev[skip:]] = True
    finals = state / ORBIT_PRIME if exact else state
    return BatchCells(
        fine_bits,
        visited.reshape(ns, nf),
        counts.reshape(ns, nf) if counts is not None else None,
        np.asarray(finals, dtype=float),
        n,
        transient,
    )


# ---------------------------------------------------------------------------
# series types


@dataclass
class BirkhoffSeries:
    """Partial Birkhoff averages on the dyadic checkpoint grid.

    ``env_sup``/``env_inf`` are sup/inf of S_m/m over (checkpoint/2, checkpoint].
    """

    observable: str
    checkpoints: np.ndarray
    averages: np.ndarray
    env_sup: np.ndarray
    env_inf: np.ndarray
    truncated: bool = False

    def gap(self) -> float:
        return float(self.env_sup[-1] - self.env_inf[-1])


@dataclass
class FrequencySeries:
    checkpoints: np.ndarray
    frequencies: np.ndarray
    tail_max: float
    truncated: bool = False


@dataclass
class CellEstimate:
    cells: np.ndarray
    eps: float
    truncated: bool = False


@dataclass
class HistoricVerdict:
    historic: bool
    gap: float
    gap_tol: float
    horizon: int
    series: BirkhoffSeries


@dataclass
class EmpiricalMeasure:
    eps: float
    weights: np.ndarray
    sample_length: int

    def __post_init__(self):
        total = float(self.weights.sum())
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {total}, not 1")
        nc = ncells(self.eps)
        if np.flatnonzero(self.weights).size and np.flatnonzero(self.weights).max() >= nc:
            raise ValueError("positive weight outside the cell range")


def _checkpoints(n: int) -> np.ndarray:
    ks = [1 << k for k in range(0, max(1, n).bit_length()) if (1 << k) <= n]
    if not ks or ks[-1] != n:
        ks.append(n)
    return np.asarray(ks, dtype=np.int64)


def series_from_values(
    values: np.ndarray, observable: str, truncated: bool = False
) -> BirkhoffSeries:
    """Birkhoff series of phi-values along an orbit (values[j] = phi(x_j))."""
    n = len(values)
    if n == 0:
        raise ValueError("empty orbit")
    csum = np.cumsum(values)
    partial = csum / np.arange(1, n + 1, dtype=float)
    cps = _checkpoints(n)
    avgs = partial[cps - 1]
    sup = np.empty(len(cps))
    inf = np.empty(len(cps))
    for i, cp in enumerate(cps):
        window = partial[cp // 2 : cp]
        sup[i] = window.max()
        inf[i] = window.min()
    return BirkhoffSeries(observable, cps, avgs, sup, inf, truncated)


# ---------------------------------------------------------------------------
# operations


def visiting_frequency(pmap: PiecewiseMap, x0, V, n: int) -> FrequencySeries:
    """Frequency of orbit time spent in V (an interval or a finite union).

    Membership convention is half-open [lo, hi), so V and its complement
    partition [0,1] exactly.  Returns the dyadic-checkpoint series and the
    tail-window maximum as the upper estimate of the limsup frequency.
    """
    if n < 1:
        raise ValueError("n >= 1 required")
    pts, truncated = orbit_points(pmap, x0, n)
    pts = pts[: max(1, len(pts) - 1)] if len(pts) > n else pts
    member = np.zeros(len(pts), dtype=float)
    for lo, hi in _as_intervals(V):
        member += ((pts >= lo) & (pts < hi)).astype(float)
    np.clip(member, 0.0, 1.0, out=member)
    series = series_from_values(member, "indicator", truncated)
    return FrequencySeries(
        series.checkpoints, series.averages, float(series.env_sup[-1]), truncated
    )


def _as_intervals(V):
    if isinstance(V, tuple) and len(V) == 2 and np.isscalar(V[0]):
        return [V]
    return list(V)


def omega_limit_estimate(
    pmap: PiecewiseMap, x0, n_transient: int, n: int, eps: float
) -> CellEstimate:
    """Cells visited by the orbit segment [n_transient, n]: an outer estimate
    of the omega-limit set at resolution eps (over-approximates by transient
    visits, under-approximates by unvisited rare cells)."""
    if not 0 <= n_transient <= n:
        raise ValueError("need n >= n_transient >= 0")
    pts, truncated = orbit_points(pmap, x0, n)
    if len(pts) <= n_transient:
        return CellEstimate(np.empty(0, dtype=np.int64), eps, True)
    return CellEstimate(cells_of_points(pts[n_transient:], eps), eps, truncated)


def statistical_omega_estimate(
    pmap: PiecewiseMap, x0, n: int, eps: float, theta: float | None = None
) -> CellEstimate:
    """Cells whose visit frequency over [0, n] exceeds theta (default 1/sqrt(n))."""
    if theta is None:
        theta = 1.0 / math.sqrt(n)
    if theta <= 0:
        raise ValueError("theta must be positive")
    pts, truncated = orbit_points(pmap, x0, n)
    nc = ncells(eps)
    idx = np.clip((pts / eps).astype(np.int64), 0, nc - 1)
    counts = np.bincount(idx, minlength=nc)
    cells = np.flatnonzero(counts / len(pts) > theta).astype(np.int64)
    return CellEstimate(cells, eps, truncated)


def birkhoff_envelope(pmap: PiecewiseMap, x0, phi: Observable, n: int) -> BirkhoffSeries:
    pts, truncated = orbit_points(pmap, x0, n)
    pts = pts[: max(1, len(pts) - 1)] if len(pts) > n else pts
    return series_from_values(phi(pts), phi.name, truncated)


def detect_historic(
    pmap: PiecewiseMap, x0, phi: Observable, n: int, gap_tol: float
) -> HistoricVerdict:
    """Horizon-relative historic-behavior verdict.

    Historic iff the final tail envelope gap exceeds gap_tol and the gap has
    not decayed monotonically over the last three checkpoints.
    """
    if gap_tol <= 0:
        raise ValueError("gap_tol must be positive")
    series = birkhoff_envelope(pmap, x0, phi, n)
    gaps = series.env_sup - series.env_inf
    gap = float(gaps[-1])
    decaying = len(gaps) >= 3 and gaps[-1] < gaps[-2] < gaps[-3]
    return HistoricVerdict(
        historic=bool(gap > gap_tol and not decaying),
        gap=gap,
        gap_tol=gap_tol,
        horizon=int(series.checkpoints[-1]),
        series=series,
    )


def empirical_measure(pmap: PiecewiseMap, x0, n: int, eps: float) -> EmpiricalMeasure:
    pts, _ = orbit_points(pmap, x0, n)
    nc = ncells(eps)
    idx = np.clip((pts / eps).astype(np.int64), 0, nc - 1)
    counts = np.bincount(idx, minlength=nc).astype(float)
    return EmpiricalMeasure(eps, counts / len(pts), len(pts))


def stats_csv(pmap: PiecewiseMap, x0, phi: Observable, V_list, n: int) -> str:
    """One row per dyadic checkpoint: average, tail envelope, V-frequencies."""
    series = birkhoff_envelope(pmap, x0, phi, n)
    freq_series = [visiting_frequency(pmap, x0, V, n) for V in V_list]
    header = ["n", "average", "tail_sup", "tail_inf"] + [
        f"freq_V{i}" for i in range(len(V_list))
    ]
    lines = [",".join(header)]
    for i, cp in enumerate(series.checkpoints):
        row = [
            str(int(cp)),
            f"{series.averages[i]:.17g}",
            f"{series.env_sup[i]:.17g}",
            f"{series.env_inf[i]:.17g}",
        ]
        for fs in freq_series:
            row.append(f"{fs.frequencies[i]:.17g}" if i < len(fs.frequencies) else "")
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"
