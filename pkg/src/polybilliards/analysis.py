"""Log-log power-law fits and histogram comparison against analytic laws."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, stats

__all__ = [
    "FitError",
    "PowerLawFit",
    "ComparisonReport",
    "fit_power_law",
    "diffusion_exponent",
    "decay_exponent",
    "default_diffusion_window",
    "default_decay_window",
    "oracle_bin_masses",
    "histogram_vs_oracle",
]


class FitError(ValueError):
    pass


@dataclass(frozen=True)
class PowerLawFit:
    exponent: float
    stderr: float
    intercept: float  # natural log of the prefactor
    window: tuple[float, float]
    r2: float
    points: int
    skipped: int = 0

    HEADER = ("exponent", "stderr", "intercept", "t_lo", "t_hi", "r2", "points")

    def record(self) -> str:
        vals = (self.exponent, self.stderr, self.intercept, self.window[0], self.window[1], self.r2)
        return ",".join(repr(float(v)) for v in vals) + f",{self.points}"

    def write(self, path, extra: dict | None = None) -> None:
        """Write the fit as a two-line CSV record (header + values)."""
        head = list(self.HEADER)
        row = self.record()
        if extra:
            head += list(extra)
            row += "," + ",".join(str(v) for v in extra.values())
        with open(path, "w") as fh:
            fh.write(",".join(head) + "\n" + row + "\n")


def fit_power_law(t, y, window: tuple[float, float] | None = None) -> PowerLawFit:
    """Ordinary least squares of ``log y`` on ``log t`` inside ``window``.

    Non-positive ``y`` in the window are skipped and counted in ``skipped``.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if window is None:
        window = (float(t.min()), float(t.max()))
    lo, hi = window
    if not lo < hi:
        raise FitError(f"empty fit window {window}")
    sel = (t >= lo) & (t <= hi) & np.isfinite(y)
    pos = sel & (y > 0)
    skipped = int(sel.sum() - pos.sum())
    if pos.sum() < 3:
        raise FitError(f"need >= 3 positive points in window {window}, have {int(pos.sum())}")
    res = stats.linregress(np.log(t[pos]), np.log(y[pos]))
    r2 = min(1.0, res.rvalue**2) if np.isfinite(res.rvalue) else 1.0
    return PowerLawFit(float(res.slope), float(res.stderr), float(res.intercept),
                       (float(lo), float(hi)), float(r2), int(pos.sum()), skipped)


def default_diffusion_window(moments) -> tuple[float, float]:
    return 20 * moments.tau_c, moments.t_max


def default_decay_window(curve) -> tuple[float, float]:
    return 3 * curve.tau_e, curve.t_max / 3


def diffusion_exponent(moments, window=None) -> tuple[float, float, PowerLawFit]:
    """Diffusion exponent ``z`` from variance growth ``t^(2/z)``.

    Returns ``(z, z_stderr, fit)``.
    """
    if window is None:
        window = default_diffusion_window(moments)
    fit = fit_power_law(moments.t, moments.var, window)
    if fit.exponent <= 0:
        raise FitError(f"variance does not grow (slope {fit.exponent:.4g})")
    z = 2.0 / fit.exponent
    return z, 2.0 / fit.exponent**2 * fit.stderr, fit


def decay_exponent(curve, window=None) -> tuple[float, PowerLawFit]:
    """Survival decay exponent ``delta`` from ``S ~ t^-delta``."""
    if window is None:
        window = default_decay_window(curve)
    fit = fit_power_law(curve.t, curve.S, window)
    return -fit.exponent, fit


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)


def _cdf_unit_integrals(law, k: np.ndarray) -> np.ndarray:
    # int_k^{k+1} F(y) dy.  F is smooth away from the support edges, where
    # Gauss-Legendre suffices; the few intervals holding an edge go to quad.
    y = k[:, None] + 0.5 * (_GL_NODES[None, :] + 1.0)
    out = 0.5 * (law.cdf(y) @ _GL_WEIGHTS)
    edges = [e for e in law.support if math.isfinite(e)]
    for e in edges:
        for i in np.flatnonzero((k <= e) & (e <= k + 1)):
            a = float(k[i])
            pts = [p for p in edges if a < p < a + 1]
            out[i] = integrate.quad(lambda v: float(law.cdf(v)), a, a + 1.0, points=pts or None,
                                    epsabs=1e-13, limit=200)[0]
    return out


def oracle_bin_masses(law, n: np.ndarray, binning: str = "box") -> np.ndarray:
    """Oracle probability for each integer collision count ``n``.

    ``box`` integrates the density over ``[n - 1/2, n + 1/2]``.  ``phase``
    weights it with the triangle ``max(0, 1 - |x - n|)``, the law of
    ``floor(x + U)`` for a uniform phase ``U``, which is how an integer count
    arises from a continuous collision rate.
    """
    n = np.asarray(n, dtype=float)
    if binning == "box":
        return np.clip(law.cdf(n + 0.5) - law.cdf(n - 0.5), 0.0, None)
    if binning == "phase":
        inner = _cdf_unit_integrals(law, n)
        prev = _cdf_unit_integrals(law, n - 1.0)
        return np.clip(inner - prev, 0.0, None)
    raise ValueError(f"unknown binning {binning!r}")


@dataclass(frozen=True)
class ComparisonReport:
    t: float
    tv: float
    n: np.ndarray
    empirical: np.ndarray
    oracle: np.ndarray
    counts: np.ndarray
    outside_mass: float  # empirical mass in bins where the oracle has none
    oracle_tail: float  # oracle mass beyond the tabulated bins

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "count", "pmf", "oracle"])
            for k, c, e, o in zip(self.n, self.counts, self.empirical, self.oracle):
                w.writerow([int(k), int(c), repr(float(e)), repr(float(o))])


def histogram_vs_oracle(hist, law, t: float | None = None, binning: str = "box") -> ComparisonReport:
    """Total variation distance between an empirical histogram and a law.

    Bins span the empirical range and the law's support (for an unbounded
    support, up to its 1 - 1e-9 quantile); oracle mass beyond the table is
    counted in the distance.  ``binning`` is passed to
    :func:`oracle_bin_masses`.
    """
    if t is not None and not math.isclose(t, law.t, rel_tol=1e-12):
        raise ValueError("histogram time and law time differ")
    lo_s, hi_s = law.support
    hi = hi_s
    if not math.isfinite(hi):
        hi = lo_s + 1.0
        while 1.0 - law.cdf(hi) > 1e-9:
            hi *= 2.0
    n_lo = int(min(hist.n.min(), math.floor(lo_s)))
    n_hi = int(max(hist.n.max(), math.ceil(hi)))
    n = np.arange(max(n_lo, 0), n_hi + 1)
    emp = np.zeros(n.size)
    cnt = np.zeros(n.size, dtype=np.int64)
    cnt[hist.n - n[0]] = hist.counts
    emp[:] = cnt / cnt.sum()
    orc = oracle_bin_masses(law, n, binning)
    tail = max(0.0, 1.0 - float(orc.sum()))
    tv = 0.5 * (float(np.abs(emp - orc).sum()) + tail)
    outside = float(emp[orc == 0].sum())
    return ComparisonReport(float(hist.t), min(tv, 1.0), n, emp, orc, cnt, outside, tail)
