import numpy as np
import pytest

from pwsum.blaschke import upper_lower_evaluators
from pwsum.genfun import (
    CollisionError,
    GenFunError,
    GeneratingFunctionEvaluator,
    OuterEvaluator,
    check_factorization,
)
from pwsum.grids import grid_template
from pwsum.spectrum import Spectrum, make_family


def sine_type_G(z, delta):
    # zero set Z + i*delta, normalized to 1 at the origin
    return np.sin(np.pi * (z - 1j * delta)) / np.sin(-1j * np.pi * delta)


def sine_type_G_prime(z, delta):
    return np.pi * np.cos(np.pi * (z - 1j * delta)) / np.sin(-1j * np.pi * delta)


@pytest.fixture(scope="module")
def lattice200():
    s = make_family("shifted_integers", {"delta": 0.3}, 200)
    return GeneratingFunctionEvaluator(s)


def test_single_factor():
    g = GeneratingFunctionEvaluator(Spectrum(np.array([1j])))
    assert g.eval_G(2j) == pytest.approx(-1.0)


def test_value_at_zero_is_normalization():
    g = GeneratingFunctionEvaluator(Spectrum(np.array([1j, 2 - 1j])), normalization=3.5 - 1j)
    assert g.eval_G(0.0) == pytest.approx(3.5 - 1j)


def test_lattice_matches_sine_form_small_z():
    s = make_family("shifted_integers", {"delta": 0.3}, 5000)
    g = GeneratingFunctionEvaluator(s)
    got = g.eval_G(0.5)
    want = sine_type_G(0.5, 0.3)
    assert abs(got - want) / abs(want) < 1e-3


def test_lattice_matches_sine_form_on_line(lattice200):
    x = np.linspace(-10, 10, 401)
    got = lattice200.eval_G(x.astype(complex))
    want = sine_type_G(x, 0.3)
    rel = np.max(np.abs(got - want) / np.abs(want))
    assert rel < 1e-8


def test_lattice_matches_sine_form_large_window_edge(lattice200):
    # close to the stored window the tail peeling path is exercised
    for z in (150.3 + 2j, -170.0 + 0.4j, 60.0 + 0j):
        got = lattice200.eval_G(z)
        want = sine_type_G(z, 0.3)
        assert abs(got - want) / abs(want) < 1e-8


def test_prime_single_point():
    g = GeneratingFunctionEvaluator(Spectrum(np.array([1j])))
    assert g.eval_G_prime_at_lambda(0) == pytest.approx(1j)


def test_prime_two_points():
    g = GeneratingFunctionEvaluator(Spectrum(np.array([1j, -1j])))
    k = int(np.argmax(g.spectrum.points.imag > 0))
    assert g.eval_G_prime_at_lambda(k) == pytest.approx(2j)


def test_prime_lattice_center():
    s = make_family("shifted_integers", {"delta": 0.3}, 5000)
    g = GeneratingFunctionEvaluator(s)
    k = int(np.argmin(np.abs(s.points - 0.3j)))
    got = g.eval_G_prime_at_lambda(k)
    want = np.pi / np.sin(-0.3j * np.pi)
    assert abs(got - want) / abs(want) < 1e-3


def test_prime_matches_all_closed_form(lattice200):
    s = lattice200.spectrum
    for k in range(0, len(s), 17):
        lam = s.points[k]
        got = lattice200.eval_G_prime_at_lambda(k)
        want = sine_type_G_prime(lam, 0.3)
        assert abs(got - want) / abs(want) < 1e-8


def test_prime_vs_central_difference():
    s = make_family("shifted_integers", {"delta": 0.3}, 50)
    g = GeneratingFunctionEvaluator(s)
    for k in range(len(s)):
        lam = s.points[k]
        if abs(lam) >= 25:
            continue
        eps = 1e-5 * (1 + abs(lam))
        fd = (g.eval_G(lam + eps) - g.eval_G(lam - eps)) / (2 * eps)
        got = g.eval_G_prime_at_lambda(k)
        assert abs(fd - got) / abs(got) < 1e-4


def test_collision_rejected(lattice200):
    with pytest.raises(CollisionError):
        lattice200.eval_G(0.3j)


def test_deterministic_bitwise(lattice200):
    z = np.linspace(-3, 3, 11) + 0.7j
    a = lattice200.eval_G(z)
    b = lattice200.eval_G(z)
    assert np.all(a == b)


def test_kadec_tail_against_direct_product():
    # oracle: brute-force product over a much larger window
    params = {"delta": 0.4, "eps": 0.2}
    small = make_family("kadec_perturbed", params, 60)
    g = GeneratingFunctionEvaluator(small)
    big = make_family("kadec_perturbed", params, 200000)
    z = 1.7 + 0.9j
    logs = np.log(1.0 - z / big.points)
    order = np.argsort(np.abs(big.points), kind="stable")
    brute = np.exp(np.sum(logs[order]))
    got = g.eval_G(z)
    assert abs(got - brute) / abs(brute) < 2e-5


def test_clustered_tail_uncertainty_reported():
    s = make_family("clustered_pairs", {"delta": 1.0, "eps": 0.5}, 50)
    g = GeneratingFunctionEvaluator(s)
    unc = g.tail_uncertainty(np.array([10.0 + 0j]))
    assert 0 < unc[0] < 1e-1
    assert not g.tail_warning


def test_clustered_tail_error_within_reported_uncertainty():
    # oracle: brute-force product over a 2000-site window; the approximate
    # tail (second copy folded into the base lattice) must stay within the
    # reported |z|-proportional slack
    params = {"delta": 1.0, "eps": 0.5}
    small = make_family("clustered_pairs", params, 50)
    g = GeneratingFunctionEvaluator(small)
    big = make_family("clustered_pairs", params, 2000)
    gbig = GeneratingFunctionEvaluator(big)
    for z in (3.0 + 0j, -7.5 + 2j):
        got = g.eval_G(z)
        want = gbig.eval_G(z)
        rel = abs(got - want) / abs(want)
        assert rel <= g.tail_uncertainty(np.array([z]))[0] + 1e-6


def test_truncated_custom_reports_uncertainty():
    s = Spectrum(np.array([1j, 5j, 10j]))
    g = GeneratingFunctionEvaluator(s, radius=6.0)
    assert g.tail_warning
    unc = g.tail_uncertainty(np.array([2.0 + 0j]))
    assert unc[0] == pytest.approx(2 / 10 + (2 / 10) ** 2)


# -- outer factor -----------------------------------------------------------


def test_outer_of_unimodular_boundary():
    grid = grid_template(50.0, 0.05)
    o = OuterEvaluator(grid.copy_with(np.zeros(len(grid), complex)))
    z = np.array([1j, 2 + 3j, -5 + 0.5j])
    assert np.allclose(np.abs(o.eval_outer(z)), 1.0, atol=1e-12)


def test_outer_scaling():
    grid = grid_template(50.0, 0.05)
    rng = np.random.default_rng(0)
    phi = np.exp(-grid.x**2 / 100.0) * rng.standard_normal(len(grid)) * 0.1
    o1 = OuterEvaluator(grid.copy_with(phi.astype(complex)))
    o2 = OuterEvaluator(grid.copy_with((phi + np.log(2.0)).astype(complex)))
    z = 1.5 + 2j
    assert abs(o2.eval_outer(z)) == pytest.approx(2 * abs(o1.eval_outer(z)), rel=1e-9)


def test_outer_halfplane_oracle():
    # |G(x)| = |x + i| is the boundary modulus of the outer function z + i.
    # The log-modulus grows like log|t| here, so the finite window leaves an
    # O(log X / X) truncation error; bounded (sine-type) weights do better.
    grid = grid_template(400.0, 0.05)
    phi = 0.5 * np.log(1.0 + grid.x**2)
    o = OuterEvaluator(grid.copy_with(phi.astype(complex)))
    for z in (2j, 1 + 1j, -3 + 0.7j):
        assert abs(o.eval_outer(z)) == pytest.approx(abs(z + 1j), rel=1.5e-2)


def test_outer_boundary_phase_consistent():
    # bounded, decaying boundary modulus with closed form: the outer
    # function for |omega(x)| = |(x+2i)/(x+i)| is (z+2i)/(z+i), so
    # omega(x) over that ratio must be one unimodular constant
    grid = grid_template(200.0, 0.02)
    x = grid.x
    phi = 0.5 * np.log((x**2 + 4.0) / (x**2 + 1.0))
    o = OuterEvaluator(grid.copy_with(phi.astype(complex)))
    vals = o.boundary_values()
    oracle = (x + 2j) / (x + 1j)
    inner = np.abs(x) < 50
    ratio = vals[inner] / oracle[inner]
    assert np.allclose(np.abs(ratio), 1.0, atol=2e-3)
    ang = ratio / ratio[len(ratio) // 2]
    assert np.max(np.abs(ang - 1.0)) < 5e-3
    # interior values agree with the same closed form
    for z in (1j, 3 + 2j, -10 + 0.5j):
        assert abs(o.eval_outer(z)) == pytest.approx(abs((z + 2j) / (z + 1j)), rel=1e-3)


def test_outer_invariant_under_unimodular_normalization():
    # |c| = 1 leaves log|G| and hence the outer factor untouched
    s = make_family("shifted_integers", {"delta": 0.3}, 40)
    g1 = GeneratingFunctionEvaluator(s)
    g2 = GeneratingFunctionEvaluator(s, normalization=np.exp(0.9j))
    o1 = OuterEvaluator.from_generating(g1, X=50.0, h=0.05)
    o2 = OuterEvaluator.from_generating(g2, X=50.0, h=0.05)
    z = np.array([1 + 1j, -3 + 2j])
    assert np.allclose(np.abs(o1.eval_outer(z)), np.abs(o2.eval_outer(z)), rtol=1e-12)


def test_outer_requires_height():
    grid = grid_template(10.0, 0.1)
    o = OuterEvaluator(grid.copy_with(np.zeros(len(grid), complex)))
    with pytest.raises(GenFunError):
        o.eval_outer(1.0 + 0.01j)
    with pytest.raises(GenFunError):
        o.eval_outer(9.0 + 1j)


# -- factorization ----------------------------------------------------------


def test_factorization_single_point():
    # finite window: tau = 0, |G| = |omega B| in C+.  The boundary
    # log-modulus grows like log|x| here, so the quadrature tolerance is
    # the O(log X / X) window truncation of the Schwarz integral.
    s = Spectrum(np.array([1j]))
    g = GeneratingFunctionEvaluator(s)
    assert g.exp_type == 0.0
    o = OuterEvaluator.from_generating(g, X=1000.0, h=0.05)
    b_up, b_lo = upper_lower_evaluators(s)
    rep = check_factorization(g, o, b_up, b_lo, [2j, 1 + 1j, 0.5 + 2j])
    assert rep.max_mismatch < 3e-3


def test_factorization_lower_branch_trivial_B():
    # all-upper spectrum: the lower branch compares |G| to |omega# e^{i tau z}|
    s = Spectrum(np.array([1j]))
    g = GeneratingFunctionEvaluator(s)
    o = OuterEvaluator.from_generating(g, X=1000.0, h=0.05)
    b_up, b_lo = upper_lower_evaluators(s)
    assert b_lo is None
    rep = check_factorization(g, o, b_up, b_lo, [-2j, 1 - 1j])
    assert rep.max_mismatch < 3e-3


def test_factorization_symmetric_pair_agrees():
    s = Spectrum(np.array([1j, -1j]))
    g = GeneratingFunctionEvaluator(s)
    o = OuterEvaluator.from_generating(g, X=1000.0, h=0.05)
    b_up, b_lo = upper_lower_evaluators(s)
    rep = check_factorization(g, o, b_up, b_lo, [2j, -2j])
    assert rep.max_mismatch < 6e-3
    assert abs(rep.mismatches[0] - rep.mismatches[1]) < 6e-3


def test_factorization_lattice_with_exponential_type():
    s = make_family("shifted_integers", {"delta": 0.3}, 3000)
    g = GeneratingFunctionEvaluator(s)
    assert g.exp_type == pytest.approx(np.pi)
    o = OuterEvaluator.from_generating(g, X=400.0, h=0.02)
    b_up, _ = upper_lower_evaluators(s)
    rep = check_factorization(g, o, b_up, None, [1 + 1j])
    assert rep.max_mismatch < 1e-3
