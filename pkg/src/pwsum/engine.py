"""Series engine: test functions, weighted partial sums, grid operators.

Test functions are finite combinations of shifted reproducing kernels
k_mu(z) = sin(pi(z - conj mu))/(pi(z - conj mu)); their interpolation
coefficients against the biorthogonal family are exactly the point
values F(lambda), so no time-domain computation is ever needed.  Partial
sums, the discrete Riesz projections and the weighted projector identity
all run on the uniform grids of `grids`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from pwsum.blaschke import BlaschkeEvaluator
from pwsum.genfun import GeneratingFunctionEvaluator, OuterEvaluator
from pwsum.grids import GridFunction, GridError, grid_template, hilbert_transform


class EngineError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Paley-Wiener test functions
# ---------------------------------------------------------------------------


@dataclass
class PWFunction:
    """F(z) = sum c_j sinc(pi(z - conj mu_j)); atoms (mu_j, c_j), mu distinct."""

    centers: np.ndarray
    coefficients: np.ndarray

    def __post_init__(self):
        mu = np.asarray(self.centers, dtype=complex).ravel()
        c = np.asarray(self.coefficients, dtype=complex).ravel()
        if mu.size != c.size:
            raise EngineError("centers and coefficients must align")
        if np.unique(mu).size != mu.size:
            raise EngineError("atom centers must be distinct")
        self.centers = mu
        self.coefficients = c

    def eval(self, z):
        z_arr = np.atleast_1d(np.asarray(z, dtype=complex))
        d = z_arr[..., None] - np.conj(self.centers)
        vals = (self.coefficients * np.sinc(d)).sum(axis=-1)
        return vals[0] if np.asarray(z).ndim == 0 else vals

    def __call__(self, z):
        return self.eval(z)

    def norm_sq_estimate(self, X: float, h: float) -> float:
        g = sample_pw(self, X, h)
        return g.norm() ** 2


def eval_pw(f: PWFunction, z):
    return f.eval(z)


def sample_pw(f: PWFunction, X: float, h: float) -> GridFunction:
    g = grid_template(X, h)
    return g.copy_with(f.eval(g.x.astype(complex)))


def pw_tail_bound(f: PWFunction, X: float) -> float:
    """Crude upper estimate for the L2 mass of F beyond [-X, X]."""
    out = 0.0
    for mu, c in zip(f.centers, f.coefficients):
        d = max(X - abs(mu.real), 1.0)
        amp = abs(c) * np.cosh(np.pi * abs(mu.imag)) / np.pi
        out += amp * np.sqrt(2.0 / d)
    return float(out)


def save_pw_csv(f: PWFunction, path) -> None:
    with open(path, "w") as fh:
        fh.write("mu_re,mu_im,c_re,c_im\n")
        for mu, c in zip(f.centers, f.coefficients):
            fh.write(f"{mu.real:.12e},{mu.imag:.12e},{c.real:.12e},{c.imag:.12e}\n")


def load_pw_csv(path) -> PWFunction:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return PWFunction(data[:, 0] + 1j * data[:, 1], data[:, 2] + 1j * data[:, 3])


# ---------------------------------------------------------------------------
# Lagrange partial sums
# ---------------------------------------------------------------------------


@dataclass
class LagrangeSum:
    """Finite weighted interpolation series: pairs (k, w * F(lambda_k)/G'(lambda_k))."""

    indices: np.ndarray
    coefficients: np.ndarray
    step_label: float

    def __len__(self):
        return int(self.indices.size)


def build_lagrange_sum_from_values(values, gen, scheme, step: int) -> LagrangeSum:
    """values: F(lambda_k) for every spectrum index k (array)."""
    row = scheme.weight_row(step)
    ks = np.array([k for k, _ in row], dtype=int)
    ws = np.array([w for _, w in row], dtype=complex)
    vals = np.asarray(values, dtype=complex)
    coeffs = np.array(
        [w * vals[k] / gen.eval_G_prime_at_lambda(k) for k, w in zip(ks, ws)], dtype=complex
    )
    return LagrangeSum(indices=ks, coefficients=coeffs, step_label=scheme.step_label(step))


def build_lagrange_sum(f: PWFunction, gen, scheme, step: int) -> LagrangeSum:
    values = f.eval(gen.spectrum.points)
    return build_lagrange_sum_from_values(values, gen, scheme, step)


def eval_lagrange_sum(ls: LagrangeSum, gen, z):
    """G(z) * sum_k a_k/(z - lambda_k) at arbitrary complex z."""
    z_arr = np.atleast_1d(np.asarray(z, dtype=complex))
    if not len(ls):
        out = np.zeros(z_arr.shape, dtype=complex)
        return out[0] if np.asarray(z).ndim == 0 else out
    lam = gen.spectrum.points[ls.indices]
    gz = gen.eval_G(z_arr)
    ssum = (ls.coefficients[None, :] / (z_arr[:, None] - lam[None, :])).sum(axis=1)
    out = gz * ssum
    return out[0] if np.asarray(z).ndim == 0 else out


class SummationContext:
    """Caches G on the grid and the Cauchy matrix across schedule steps."""

    def __init__(self, gen: GeneratingFunctionEvaluator, grid: GridFunction):
        self.gen = gen
        self.grid = grid
        self.G_on_grid = gen.eval_G_on_grid(grid)
        lam = gen.spectrum.points
        x = grid.x
        self._cauchy = 1.0 / (x[:, None] - lam[None, :])

    def sample_sum(self, ls: LagrangeSum) -> GridFunction:
        if not len(ls):
            return self.grid.copy_with(np.zeros(len(self.grid), dtype=complex))
        vals = self.G_on_grid * (self._cauchy[:, ls.indices] @ ls.coefficients)
        return self.grid.copy_with(vals)


def partial_sum(
    f: PWFunction,
    gen: GeneratingFunctionEvaluator,
    scheme,
    step: int,
    grid: GridFunction,
    context: SummationContext | None = None,
) -> GridFunction:
    """Samples of sum_k w(lambda_k, n) F(lambda_k) G(x)/(G'(lambda_k)(x - lambda_k))."""
    ls = build_lagrange_sum(f, gen, scheme, step)
    if context is None:
        context = SummationContext(gen, grid)
    return context.sample_sum(ls)


def lagrange_tail_bound(ls: LagrangeSum, gen, X: float) -> float:
    """Crude upper estimate for the sum's L2 mass beyond [-X, X]."""
    if not len(ls):
        return 0.0
    lam = gen.spectrum.points[ls.indices]
    gmax = float(np.max(np.abs(gen.eval_G_on_grid(grid_template(X, max(X / 200, 0.05))))))
    out = 0.0
    for a, l in zip(ls.coefficients, lam):
        d = X - abs(l.real)
        if d <= 1.0:
            out += abs(a) * gmax * np.sqrt(np.pi / abs(l.imag))
        else:
            out += abs(a) * gmax * np.sqrt(2.0 / d)
    return float(out)


def l2_error(a: GridFunction, b: GridFunction) -> float:
    if not a.same_grid(b):
        raise GridError("grid mismatch in l2_error")
    return a.copy_with(a.values - b.values).norm()


# ---------------------------------------------------------------------------
# Riesz projections
# ---------------------------------------------------------------------------


def riesz_project(
    g: GridFunction,
    sign: str,
    weight_log_modulus: GridFunction | None = None,
    tail_fit: bool = True,
) -> GridFunction:
    """Discrete Riesz projection P+/P- = (I +- iH)/2.

    `weight_log_modulus` is accepted for interface compatibility with the
    weighted experiments (alignment is validated, nothing else changes:
    the weighting enters only through the surrounding harness).
    """
    if sign not in ("+", "-"):
        raise EngineError("sign must be '+' or '-'")
    if weight_log_modulus is not None and not g.same_grid(weight_log_modulus):
        raise GridError("weight grid misaligned")
    H = hilbert_transform(g, tail_fit=tail_fit)
    s = 1.0 if sign == "+" else -1.0
    return g.copy_with(0.5 * (g.values + s * 1j * H.values))


# ---------------------------------------------------------------------------
# Weighted projector identity (grid bridge for the one-sided projector)
# ---------------------------------------------------------------------------


@dataclass
class ProjectorCheckReport:
    mismatch: float
    error_bar: float
    operator_norm_scale: float

    def __float__(self):
        return self.mismatch


def _projector_sides(f, gen, b_plus, n, grid, outer):
    """LHS (I - B_n P+ B_n^#) Phi and RHS interpolation sum on the grid."""
    x = grid.x
    lam_all = gen.spectrum.points
    inside = np.where(np.abs(lam_all) < n)[0]

    omega_x = outer.boundary_on(grid)
    phi_grid = f.eval(x.astype(complex)) * np.exp(1j * np.pi * x) / omega_x
    bn_x = b_plus.eval_B(x.astype(complex), cutoff=n)

    inner = riesz_project(grid.copy_with(np.conj(bn_x) * phi_grid), "+")
    lhs = phi_grid - bn_x * inner.values

    rhs = np.zeros(len(grid), dtype=complex)
    for k in inside:
        lam = lam_all[k]
        phi_lam = f.eval(lam) * np.exp(1j * np.pi * lam) / outer.eval_outer(lam)
        bprime = b_plus.eval_B_prime_at(int(k), cutoff=n)
        rhs += phi_lam / bprime * bn_x / (x - lam)
    return grid.copy_with(lhs), grid.copy_with(rhs), phi_grid


def weighted_projector_check(
    f: PWFunction,
    gen: GeneratingFunctionEvaluator,
    b_plus: BlaschkeEvaluator,
    n: float,
    grid: GridFunction,
    outer: OuterEvaluator | None = None,
) -> ProjectorCheckReport:
    """Grid mismatch between the operator form I - B_n P+ B_n^# applied to
    Phi = F e^{i pi x}/omega and the direct interpolation sum over the
    points inside radius n.  Defined for spectra in the upper half-plane.

    The error bar combines an h-refinement (Richardson) estimate for the
    discrete Hilbert transforms with analytic bounds for the quadrature
    tails of the outer factor.
    """
    if np.any(gen.spectrum.points.imag <= 0):
        raise EngineError("projector check is defined for upper half-plane spectra")
    if outer is None:
        outer = OuterEvaluator.from_generating(gen, X=max(4 * grid.X, 200.0), h=grid.h)

    lhs, rhs, phi_grid = _projector_sides(f, gen, b_plus, n, grid, outer)
    mism = l2_error(lhs, rhs)

    # --- error accounting ---------------------------------------------------
    # (a) discretization of the Hilbert transforms: repeat at 2h, Richardson
    coarse = GridFunction(grid.X, 2 * grid.h, grid.values[::2])
    outer_c = OuterEvaluator(
        GridFunction(outer.grid.X, 2 * outer.grid.h, outer.grid.values[::2])
    )
    lhs_c, rhs_c, _ = _projector_sides(f, gen, b_plus, n, coarse, outer_c)
    diff_lhs = lhs.values[::2] - lhs_c.values
    diff_rhs = rhs.values[::2] - rhs_c.values
    w_c = coarse.trapezoid_weights()
    bar_h = float(np.sqrt(np.sum(w_c * np.abs(diff_lhs - diff_rhs) ** 2))) / 3.0

    # (b) grid-end truncation of P+ applied to B_n^# Phi
    edge = np.abs(grid.x) >= 0.95 * grid.X
    a_end = float(np.mean(np.abs(phi_grid[edge])))
    bar_tail = a_end * np.sqrt(2.0 * grid.X) * 2.0 / (np.pi * 0.9)

    # (c) boundary-phase window truncation of the outer factor at |x| <= X:
    # |theta error| <= max|phi_tilde| * 2 X_out/(pi (X_out^2 - x^2)) per unit mass
    phimax = float(np.max(np.abs(outer._phit)))
    xo = outer.grid.X
    theta_err = phimax * 2.0 * xo / (np.pi * max(xo**2 - grid.X**2, xo))
    w = grid.trapezoid_weights()
    bar_phase = float(np.sqrt(np.sum(w * np.abs(phi_grid) ** 2))) * theta_err

    bar = bar_h + bar_tail + bar_phase
    scale = float(np.sqrt(np.sum(w * np.abs(phi_grid) ** 2)))
    return ProjectorCheckReport(mismatch=mism, error_bar=bar, operator_norm_scale=scale)


# ---------------------------------------------------------------------------
# Operator norm probe
# ---------------------------------------------------------------------------


class NormProbe:
    """Lower bounds for ||F -> S_n(W, F)|| on the span of integer-lattice atoms.

    Atoms k_m with integer real centers are orthonormal in the
    Paley-Wiener space, so the coefficient Euclidean norm is exactly
    ||F|| and the grid operator matrix A_n gives a true lower bound
    sigma_max(A_n) <= ||T_n||.  The Gram matrix P = C^H D C is cached
    across schedule steps.
    """

    def __init__(self, gen: GeneratingFunctionEvaluator, grid: GridFunction, atom_halfwidth: int):
        self.gen = gen
        self.grid = grid
        ms = np.arange(-atom_halfwidth, atom_halfwidth + 1, dtype=float)
        self.atom_centers = ms
        lam = gen.spectrum.points
        self._K = np.sinc(lam[:, None] - ms[None, :])
        self._gprime = gen.prime_at_all()
        x = grid.x
        C = 1.0 / (x[:, None] - lam[None, :])
        D = grid.trapezoid_weights() * np.abs(gen.eval_G_on_grid(grid)) ** 2
        self._P = C.conj().T @ (D[:, None] * C)

    def lower_bound(self, scheme, step: int, trials: int = 4, seed: int = 0, iters: int = 60) -> float:
        row = scheme.weight_row(step)
        if not row:
            return 0.0
        ks = np.array([k for k, _ in row], dtype=int)
        ws = np.array([w for _, w in row], dtype=complex)
        Kt = (ws / self._gprime[ks])[:, None] * self._K[ks, :]
        M = Kt.conj().T @ (self._P[np.ix_(ks, ks)] @ Kt)
        rng = np.random.default_rng(seed)
        best = 0.0
        dim = M.shape[0]
        for _ in range(max(1, trials)):
            v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
            v /= np.linalg.norm(v)
            prev = 0.0
            for _ in range(iters):
                w_vec = M @ v
                val = float(np.real(np.vdot(v, w_vec)))
                nrm = np.linalg.norm(w_vec)
                if nrm == 0.0:
                    val = 0.0
                    break
                v = w_vec / nrm
                if abs(val - prev) <= 1e-12 * max(val, 1.0):
                    prev = val
                    break
                prev = val
            best = max(best, prev)
        return float(np.sqrt(max(best, 0.0)))


def operator_norm_probe(
    gen: GeneratingFunctionEvaluator,
    scheme,
    step: int,
    grid: GridFunction,
    trials: int = 4,
    seed: int = 0,
    atom_halfwidth: int | None = None,
    probe: NormProbe | None = None,
) -> float:
    if trials < 1:
        raise EngineError("trials must be >= 1")
    if probe is None:
        if atom_halfwidth is None:
            atom_halfwidth = int(min(grid.X * 0.75, 40))
        probe = NormProbe(gen, grid, atom_halfwidth)
    return probe.lower_bound(scheme, step, trials=trials, seed=seed)


# ---------------------------------------------------------------------------
# Compactwise (sup on a disk) error
# ---------------------------------------------------------------------------


def disk_samples(center: complex, radius: float, count: int) -> np.ndarray:
    """Deterministic sunflower layout over the closed disk."""
    k = np.arange(1, count + 1)
    r = radius * np.sqrt(k / count)
    th = 2 * np.pi * k * ((np.sqrt(5) - 1) / 2)
    return center + r * np.exp(1j * th)


def compactwise_error(
    f: PWFunction,
    gen: GeneratingFunctionEvaluator,
    scheme,
    step: int,
    center: complex = 0j,
    radius: float = 3.0,
    samples: int = 256,
) -> float:
    """sup |S_n - F| over sample points of the disk K (complex arguments)."""
    zs = disk_samples(center, radius, samples)
    lam = gen.spectrum.points
    if lam.size:
        d = np.abs(zs[:, None] - lam[None, :])
        bad = d.min(axis=1) < 1e-8
        zs[bad] += 3e-8 + 2e-8j
    ls = build_lagrange_sum(f, gen, scheme, step)
    sn = eval_lagrange_sum(ls, gen, zs)
    return float(np.max(np.abs(sn - f.eval(zs))))
