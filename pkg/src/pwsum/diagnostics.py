"""Numerical estimates for the conditions governing the summation methods:
the Muckenhoupt product over dyadic intervals, the Carleson separation sup,
and the two line integrability checks.

The A2 scan is a lower bound only (dyadic intervals, finite window); the
artifact reports values and trends, never membership claims.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import polygamma


class DiagnosticsError(ValueError):
    pass


def _line_samples(gen, X: float, h: float, a: float) -> tuple[np.ndarray, np.ndarray]:
    n = int(round(2 * X / h)) + 1
    x = np.linspace(-X, X, n)
    logs = gen.log_abs_G(x, a=a)
    return x, logs


def a2_estimate(gen, X: float, a: float = 0.0, h: float = 0.01) -> float:
    """max over dyadic subintervals of [-X, X] of avg|G(x+ia)|^2 * avg|G(x+ia)|^-2.

    Lower bound for the Muckenhoupt supremum; >= 1 by Cauchy-Schwarz.
    Interval lengths are 2^j h for j >= 2 at aligned offsets.
    """
    ims = np.abs(np.asarray(gen.spectrum.points.imag) - a) if len(gen.spectrum) else np.array([1.0])
    if ims.size and np.min(ims) < 1e-9:
        raise DiagnosticsError("shift a hits a spectrum height; |G| vanishes on the line")
    _, logs = _line_samples(gen, X, h, a)
    u = np.exp(2.0 * logs)
    v = np.exp(-2.0 * logs)
    cu = np.concatenate([[0.0], np.cumsum(u)])
    cv = np.concatenate([[0.0], np.cumsum(v)])

    def avgs(c, f, j0, m):
        # trapezoid means over samples j0..j0+m, vectorized over offsets
        total = c[j0 + m + 1] - c[j0] - 0.5 * (f[j0] + f[j0 + m])
        return total / m

    n = u.size
    best = 1.0
    m = 4
    while m < n:
        j0 = np.arange(0, n - m, m)
        prods = avgs(cu, u, j0, m) * avgs(cv, v, j0, m)
        best = max(best, float(np.max(prods)))
        m *= 2
    # the full window as one interval
    j0 = np.array([0])
    p = float((avgs(cu, u, j0, n - 1) * avgs(cv, v, j0, n - 1))[0])
    return float(max(best, p))


def carleson_sup(s, tail_correction: bool = True) -> float:
    """sup over lambda of sum_{mu != lambda} (1+|Im lambda|)(1+|Im mu|)/|lambda-mu|^2.

    Exact over the stored window; for the built-in lattice-type families a
    trigamma tail adds the contribution of the family points beyond the
    window (the clustered family counts two points per tail site).
    """
    pts = s.points
    if pts.size < 2:
        return 0.0
    w = 1.0 + np.abs(pts.imag)
    sums = np.zeros(pts.size)
    for i in range(0, pts.size, 512):
        blk = pts[i : i + 512, None] - pts[None, :]
        d2 = np.abs(blk) ** 2
        np.fill_diagonal(d2[:, i : i + 512], np.inf)
        sums[i : i + 512] = ((w[i : i + 512, None] * w[None, :]) / d2).sum(axis=1)
    if tail_correction and s.family_tag in (
        "shifted_integers",
        "kadec_perturbed",
        "clustered_pairs",
    ):
        delta = float(s.family_params["delta"])
        if s.family_tag == "clustered_pairs":
            n_win = int(round(s.family_params.get("count", (pts.size - 1) // 4)))
            mult = 2.0
        else:
            n_win = int(round(s.family_params.get("count", (pts.size - 1) // 2)))
            mult = 1.0
        # tail sites sit near +-m + i*delta, m > n_win; trigamma sums the
        # inverse-square distances along the real direction
        re = pts.real
        wt = (1.0 + np.abs(pts.imag)) * (1.0 + delta)
        tail = polygamma(1, n_win + 1 - re) + polygamma(1, n_win + 1 + re)
        sums += mult * wt * tail
    return float(np.max(sums))


@dataclass
class IntegrabilityReport:
    pos_integral: float
    neg_integral: float
    pos_integral_2X: float
    neg_integral_2X: float

    @property
    def pos_trend(self) -> float:
        return self.pos_integral_2X / self.pos_integral if self.pos_integral else np.inf

    @property
    def neg_trend(self) -> float:
        return self.neg_integral_2X / self.neg_integral if self.neg_integral else np.inf

    @property
    def pos_divergent(self) -> bool:
        return self.pos_trend > 1.5

    @property
    def neg_divergent(self) -> bool:
        return self.neg_trend > 1.5


def intG_check(gen, X: float, h: float = 0.01) -> IntegrabilityReport:
    """Trapezoid values of int |G|^2/(1+x^2) and int |G|^-2/(1+x^2) on
    [-X, X] and [-2X, 2X]; the 2X/X ratio reports the growth trend."""

    def both(Xv):
        x, logs = _line_samples(gen, Xv, h, 0.0)
        wts = np.full(x.size, h)
        wts[0] = wts[-1] = h / 2
        base = 1.0 + x * x
        pos = float(np.sum(wts * np.exp(2.0 * logs) / base))
        neg = float(np.sum(wts * np.exp(-2.0 * logs) / base))
        return pos, neg

    p1, n1 = both(X)
    p2, n2 = both(2 * X)
    return IntegrabilityReport(
        pos_integral=p1, neg_integral=n1, pos_integral_2X=p2, neg_integral_2X=n2
    )


def save_report_csv(rows, path) -> None:
    """rows: iterable of (condition, window_X, value, trend_ratio)."""
    with open(path, "w") as fh:
        fh.write("condition,window_X,value,trend_ratio\n")
        for cond, X, val, trend in rows:
            fh.write(f"{cond},{X:.12e},{val:.12e},{trend:.12e}\n")
