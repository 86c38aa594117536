import numpy as np
import pytest

from pwsum.diagnostics import (
    DiagnosticsError,
    a2_estimate,
    carleson_sup,
    intG_check,
    save_report_csv,
)
from pwsum.genfun import GeneratingFunctionEvaluator
from pwsum.spectrum import Spectrum, make_family


class _FakeG:
    """Line-values stub: log|G| supplied by a callable."""

    def __init__(self, log_abs, points=None):
        self._f = log_abs
        self.spectrum = Spectrum(np.array(points if points is not None else [], dtype=complex))

    def log_abs_G(self, x, a: float = 0.0):
        return self._f(np.asarray(x, dtype=float), a)


def test_a2_constant_modulus_is_one():
    g = _FakeG(lambda x, a: np.zeros(x.shape))
    assert a2_estimate(g, X=10.0, h=0.01) == pytest.approx(1.0, abs=1e-12)


def test_a2_lower_bound_at_least_one():
    g = _FakeG(lambda x, a: 0.3 * np.sin(x))
    assert a2_estimate(g, X=20.0, h=0.01) >= 1.0 - 1e-12


def test_a2_scale_invariance():
    rng = np.random.default_rng(8)
    bumps = rng.standard_normal(64)

    def logmod(x, a, off=0.0):
        out = np.zeros(x.shape)
        for j, b in enumerate(bumps):
            out += b * np.exp(-((x - (j - 32) / 2.0) ** 2))
        return 0.2 * out + off

    v1 = a2_estimate(_FakeG(lambda x, a: logmod(x, a)), X=15.0, h=0.01)
    v2 = a2_estimate(_FakeG(lambda x, a: logmod(x, a, off=np.log(7.5))), X=15.0, h=0.01)
    assert abs(v1 - v2) <= 1e-12 * max(v1, 1.0)


def test_a2_lattice_stable_under_window_doubling():
    s = make_family("shifted_integers", {"delta": 0.3}, 260)
    g = GeneratingFunctionEvaluator(s)
    v1 = a2_estimate(g, X=40.0, h=0.01)
    v2 = a2_estimate(g, X=80.0, h=0.01)
    assert v1 >= 1.0
    assert abs(v2 - v1) / v1 < 0.05
    # oracle cross-check: closed-form |G|^2 for the lattice
    delta = 0.3
    sh2 = np.sinh(np.pi * delta) ** 2

    def closed(x, a):
        return 0.5 * np.log((np.sin(np.pi * x) ** 2 + sh2) / sh2)

    v_oracle = a2_estimate(_FakeG(closed), X=40.0, h=0.01)
    assert v1 == pytest.approx(v_oracle, rel=1e-6)


def test_a2_shift_rejected_on_zero_line():
    s = make_family("shifted_integers", {"delta": 0.3}, 10)
    g = GeneratingFunctionEvaluator(s)
    with pytest.raises(DiagnosticsError):
        a2_estimate(g, X=5.0, a=0.3, h=0.01)


def test_a2_clustered_grows_with_window():
    s = make_family("clustered_pairs", {"delta": 1.0, "eps": 0.5}, 150)
    g = GeneratingFunctionEvaluator(s)
    vals = [a2_estimate(g, X=X, h=0.02) for X in (20.0, 40.0, 80.0)]
    assert vals[0] < vals[1] < vals[2]


def test_carleson_single_point():
    assert carleson_sup(Spectrum(np.array([1j]))) == 0.0


def test_carleson_two_points():
    v = carleson_sup(Spectrum(np.array([1j, 2j])))
    assert v == pytest.approx(6.0)


def test_carleson_translation_invariance_exact():
    pts = np.array([0.25 + 0.5j, 1 + 1j, -2 + 0.75j, 3 - 0.5j])
    a = carleson_sup(Spectrum(pts))
    b = carleson_sup(Spectrum(pts + 7.0))
    assert a == b


def test_carleson_lattice_closed_form():
    s = make_family("shifted_integers", {"delta": 1.0}, 10_000)
    v = carleson_sup(s)
    assert abs(v - 4 * np.pi**2 / 3) < 1e-3


def test_carleson_clustered_blows_up():
    small = carleson_sup(make_family("clustered_pairs", {"delta": 1.0, "eps": 0.5}, 10))
    big = carleson_sup(make_family("clustered_pairs", {"delta": 1.0, "eps": 0.5}, 60))
    assert big > small > 0
    # pair terms grow like (2 count/eps)^2
    assert big > (2 * 60 / 0.5) ** 2 * 0.9


def test_intG_constant_modulus_tends_to_pi():
    g = _FakeG(lambda x, a: np.zeros(x.shape))
    rep = intG_check(g, X=400.0, h=0.05)
    assert rep.pos_integral_2X == pytest.approx(np.pi, rel=2e-3)
    assert rep.neg_integral_2X == pytest.approx(np.pi, rel=2e-3)
    assert not rep.pos_divergent and not rep.neg_divergent


def test_intG_lattice_finite():
    s = make_family("shifted_integers", {"delta": 0.3}, 900)
    g = GeneratingFunctionEvaluator(s)
    rep = intG_check(g, X=200.0, h=0.05)
    assert rep.pos_trend < 1.1
    assert rep.neg_trend < 1.1


def test_intG_growing_modulus_flagged():
    g = _FakeG(lambda x, a: np.log(1.0 + x * x))
    rep = intG_check(g, X=100.0, h=0.05)
    assert rep.pos_divergent  # integrand tends to a constant: linear growth
    assert not rep.neg_divergent


def test_report_csv(tmp_path):
    p = tmp_path / "report.csv"
    save_report_csv([("a2", 40.0, 1.5, 1.01), ("carleson", 0.0, 13.1, 1.0)], p)
    lines = p.read_text().strip().splitlines()
    assert lines[0] == "condition,window_X,value,trend_ratio"
    assert len(lines) == 3
