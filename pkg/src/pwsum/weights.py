"""Summation matrices w(lambda, n): naive, projection and universal schemes.

All three present one interface: weight(k, step) for a spectrum index k
and schedule step, and weight_row(step) enumerating the finite support.
Weights tend to 1 in the step for every fixed point and vanish outside a
finite support for every fixed step.
"""

from __future__ import annotations

import numpy as np

from pwsum.blaschke import BlaschkeEvaluator, upper_lower_evaluators
from pwsum.contours import ContourSchedule
from pwsum.spectrum import Spectrum


class WeightError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Universal outer weight, closed form
# ---------------------------------------------------------------------------


def outer_weight_phase(zeta) -> np.ndarray:
    """Phi(zeta) = int_{|u|>1/2} [1/(zeta-u) + 1/u] du, zeta in closed C+.

    Closed form: Log(zeta - 1/2) - Log(zeta + 1/2) - i*pi, with the
    boundary approached from above (numpy's branch on the negative real
    axis is the C+ limit).  Phi(0) = 0 and Im Phi <= 0 in C+.
    """
    z = np.asarray(zeta, dtype=complex)
    return np.log(z - 0.5) - np.log(z + 0.5) - 1j * np.pi


def outer_weight(l: float, alpha: float, z):
    """w(z) = exp(-i alpha l Phi(z/l)): outer in C+, |w| = 1 on (-l/2, l/2),
    |w| = e^{-pi alpha l} on the rest of R.

    Raises at the logarithmic branch points z = +-l/2.
    """
    if l <= 0 or alpha <= 0:
        raise WeightError("l and alpha must be positive")
    z_arr = np.atleast_1d(np.asarray(z, dtype=complex))
    if np.any(z_arr.imag < -1e-12):
        raise WeightError("outer weight is defined on the closed upper half-plane")
    zeta = z_arr / l
    if np.any(np.abs(zeta - 0.5) < 1e-14) or np.any(np.abs(zeta + 0.5) < 1e-14):
        raise WeightError("z at a branch point +-l/2")
    # force the boundary limit from C+ (imag = +0.0) on the real axis
    zeta = np.where(zeta.imag == 0, zeta.real + 0j, zeta)
    vals = np.exp(-1j * alpha * l * outer_weight_phase(zeta))
    return vals[0] if np.asarray(z).ndim == 0 else vals


def outer_weight_deviation_bound(l: float, alpha: float, z) -> np.ndarray:
    """Certified bound for |w(z) - 1|: |u| e^{|u|} with u = alpha l Phi(z/l).

    Arguments past the exp range return inf: no convergence is certified
    there (typically points beyond l/2 at large alpha).
    """
    z_arr = np.atleast_1d(np.asarray(z, dtype=complex))
    u = alpha * l * np.abs(outer_weight_phase(z_arr / l))
    out = np.where(u < 700.0, u * np.exp(np.minimum(u, 700.0)), np.inf)
    return out[0] if np.asarray(z).ndim == 0 else out


# ---------------------------------------------------------------------------
# Schemes
# ---------------------------------------------------------------------------


class NaiveWeights:
    """w(lambda, n) = 1 if |lambda| < n else 0, over a radius schedule."""

    kind = "naive"

    def __init__(self, spectrum: Spectrum, radii):
        self.spectrum = spectrum
        self.radii = np.asarray(radii, dtype=float)
        if np.any(np.diff(self.radii) <= 0) or np.any(self.radii <= 0):
            raise WeightError("radius schedule must be positive and increasing")

    def __len__(self):
        return int(self.radii.size)

    def step_label(self, step: int) -> float:
        return float(self.radii[step])

    def weight(self, k: int, step: int) -> complex:
        return 1.0 + 0j if abs(self.spectrum.points[k]) < self.radii[step] else 0j

    def weight_row(self, step: int) -> list[tuple[int, complex]]:
        n = self.radii[step]
        mods = self.spectrum.moduli
        return [(k, 1.0 + 0j) for k in range(len(self.spectrum)) if mods[k] < n]


class ProjectionWeights:
    """w(lambda, n) = beta_n^{+-}(lambda): Blaschke tail products per half-plane."""

    kind = "projection"

    def __init__(self, spectrum: Spectrum, radii):
        self.spectrum = spectrum
        self.radii = np.asarray(radii, dtype=float)
        if np.any(np.diff(self.radii) <= 0) or np.any(self.radii <= 0):
            raise WeightError("radius schedule must be positive and increasing")
        self.b_plus, self.b_minus = upper_lower_evaluators(spectrum)
        # global index -> (evaluator, local index)
        self._local: dict[int, tuple[BlaschkeEvaluator, int]] = {}
        pts = spectrum.points
        for b in (self.b_plus, self.b_minus):
            if b is None:
                continue
            src_pts = b.spectrum.points[b.src_index] if b.orientation == "lower" else b.spectrum.points
            for j, p in enumerate(src_pts):
                gk = int(np.flatnonzero(pts == p)[0])
                self._local[gk] = (b, j)

    def __len__(self):
        return int(self.radii.size)

    def step_label(self, step: int) -> float:
        return float(self.radii[step])

    def weight(self, k: int, step: int) -> complex:
        n = self.radii[step]
        if abs(self.spectrum.points[k]) >= n:
            return 0j
        b, j = self._local[k]
        return b.eval_beta(j, n)

    def weight_row(self, step: int) -> list[tuple[int, complex]]:
        n = self.radii[step]
        mods = self.spectrum.moduli
        return [(k, self.weight(k, step)) for k in range(len(self.spectrum)) if mods[k] < n]


class UniversalWeights:
    """w(lambda, n) = w_n(lambda) inside the n-th contour, 0 outside.

    The lower half-plane mirrors the construction through conjugation: a
    schedule built on the reflected points supplies w_n, and the weight at
    lambda in C- is conj(w_n(conj lambda)).
    """

    kind = "universal"

    def __init__(
        self,
        spectrum: Spectrum,
        schedule_plus: ContourSchedule | None,
        schedule_minus: ContourSchedule | None = None,
    ):
        self.spectrum = spectrum
        up = spectrum.points.imag > 0
        if np.any(up) and schedule_plus is None:
            raise WeightError("upper half-plane points need a contour schedule")
        if np.any(~up) and schedule_minus is None:
            raise WeightError("lower half-plane points need a mirrored schedule")
        if (
            schedule_plus is not None
            and schedule_minus is not None
            and len(schedule_plus) != len(schedule_minus)
        ):
            raise WeightError("the two half-plane schedules must have equal length")
        self.schedule_plus = schedule_plus
        self.schedule_minus = schedule_minus
        self._n_steps = len(schedule_plus) if schedule_plus is not None else len(schedule_minus)

    def __len__(self):
        return self._n_steps

    def step_label(self, step: int) -> float:
        sched = self.schedule_plus if self.schedule_plus is not None else self.schedule_minus
        return float(sched.contours[step].l)

    def _weight_point(self, lam: complex, step: int) -> complex:
        if lam.imag > 0:
            tri = self.schedule_plus.contours[step]
            if not tri.contains(lam):
                return 0j
            return complex(outer_weight(tri.l, float(self.schedule_plus.alphas[step]), lam))
        tri = self.schedule_minus.contours[step]
        lam_r = np.conj(lam)
        if not tri.contains(lam_r):
            return 0j
        return complex(
            np.conj(outer_weight(tri.l, float(self.schedule_minus.alphas[step]), lam_r))
        )

    def weight(self, k: int, step: int) -> complex:
        return self._weight_point(complex(self.spectrum.points[k]), step)

    def weight_row(self, step: int) -> list[tuple[int, complex]]:
        out = []
        for k in range(len(self.spectrum)):
            w = self.weight(k, step)
            if w != 0:
                out.append((k, w))
        return out

    def support_index(self, step: int) -> np.ndarray:
        """Indices inside the step's contours.

        weight_row's support is this set minus any points whose weight
        underflowed to exactly zero (possible past l/2 at large alpha).
        """
        ks = []
        for k, lam in enumerate(self.spectrum.points):
            if lam.imag > 0:
                if self.schedule_plus.contours[step].contains(lam):
                    ks.append(k)
            elif self.schedule_minus.contours[step].contains(np.conj(lam)):
                ks.append(k)
        return np.array(ks, dtype=int)


def save_weights_csv(scheme, path) -> None:
    pts = scheme.spectrum.points
    with open(path, "w") as fh:
        fh.write("n,k,lambda_re,lambda_im,w_re,w_im\n")
        for step in range(len(scheme)):
            label = scheme.step_label(step)
            for k, w in scheme.weight_row(step):
                lam = pts[k]
                fh.write(
                    f"{label:.12e},{k},{lam.real:.12e},{lam.imag:.12e},"
                    f"{w.real:.12e},{w.imag:.12e}\n"
                )
