"""Atomic measures: dynamics, convolution, quantization, and the exact metric."""

import logging
import math
from fractions import Fraction

import numpy as np
import pytest

from l2tf import (
    AtomicMeasure,
    CylinderFunction,
    EventuallyPeriodic,
    barycenter,
    convolve,
    dirac_lift,
    integrate,
    mk_distance,
    periodic_approx,
    pushforward,
    pushforward_iter,
    quantize,
)
from l2tf import measures, transport
from l2tf.symbolic import all_words, distance

from conftest import pt, random_cylinder_function, random_measure, random_point
from oracles import transport_value_by_enumeration


def lp_mk(mu, nu):
    return transport.mk_distance(mu.atoms, mu.weights, nu.atoms, nu.weights, distance)


# -- construction -------------------------------------------------------------


def test_atoms_merge_under_symbolic_equality():
    mu = AtomicMeasure([pt("1|21"), pt("|12"), pt("|21")], [0.25, 0.25, 0.5])
    # 1|21 denotes (1,2)^inf, same as |12
    assert len(mu) == 2
    assert mu.weight_of(pt("|12")) == 0.5


def test_rejects_bad_weights():
    with pytest.raises(ValueError):
        AtomicMeasure([pt("|1")], [0.5])
    with pytest.raises(ValueError):
        AtomicMeasure([pt("|1"), pt("|2")], [1.0, -0.1])


def test_json_round_trip():
    mu = AtomicMeasure([pt("|12", 3), pt("3|1", 3)], [0.25, 0.75])
    assert AtomicMeasure.from_json(mu.to_json(), 3) == mu


def test_cylinder_function_round_trip_and_lift():
    f = CylinderFunction(2, 2, [1.0, 2.0, 3.0, 4.0])
    assert CylinderFunction.from_json(f.to_json(), 2).values.tolist() == [1, 2, 3, 4]
    lifted = f.lift(3)
    for w in all_words(2, 3):
        assert lifted.value_at_word(w) == f.value_at_word(w)


# -- push-forward --------------------------------------------------------------


def test_pushforward_of_dirac():
    assert pushforward(AtomicMeasure.dirac(pt("2|1"))) == AtomicMeasure.dirac(pt("|1"))


def test_pushforward_convex_combination():
    mu = AtomicMeasure([pt("1|2"), pt("2|1")], [0.3, 0.7])
    out = pushforward(mu)
    assert out == AtomicMeasure([pt("|2"), pt("|1")], [0.3, 0.7])


def test_pushforward_fixes_periodic_orbit_measure():
    x = pt("|112")
    orbit = [x, x.shift(), x.shift().shift()]
    mu = AtomicMeasure(orbit, [Fraction(1, 3)] * 3)
    assert pushforward(mu) == mu


def test_pushforward_change_of_variables():
    rng = np.random.default_rng(21)
    for _ in range(30):
        mu = random_measure(rng, 2)
        f = random_cylinder_function(rng, 2, int(rng.integers(1, 4)))
        shifted = CylinderFunction(
            2,
            f.depth + 1,
            np.concatenate([f.values, f.values]),  # f(sigma x) depends on x_2..x_{d+1}
        )
        lhs = integrate(f, pushforward(mu))
        rhs = math.fsum(float(w) * f.value_at(x.shift()) for x, w in mu)
        assert lhs == pytest.approx(rhs, abs=1e-14)
        assert shifted.m == 2


def test_pushforward_is_weight_linear():
    rng = np.random.default_rng(22)
    for _ in range(20):
        mu, nu = random_measure(rng, 2), random_measure(rng, 2)
        t = float(rng.uniform(0.1, 0.9))
        mixed = AtomicMeasure.mix([(t, mu), (1 - t, nu)])
        assert measures_close(
            pushforward(mixed),
            AtomicMeasure.mix([(t, pushforward(mu)), (1 - t, pushforward(nu))]),
        )


# -- integrate -----------------------------------------------------------------


def test_integrate_constant():
    mu = AtomicMeasure([pt("|1"), pt("|2")], [0.5, 0.5])
    assert integrate(CylinderFunction.constant(2, 3.5), mu) == 3.5


def test_integrate_indicator_gives_cylinder_mass():
    mu = AtomicMeasure([pt("|12"), pt("|2"), pt("1|2")], [0.2, 0.3, 0.5])
    ind = CylinderFunction.indicator((1, 2), 2)
    assert integrate(ind, mu) == pytest.approx(0.7, abs=1e-15)
    assert mu.cylinder_weights(2)[1] == pytest.approx(0.7, abs=1e-15)


def test_integrate_matches_term_sum():
    rng = np.random.default_rng(23)
    mu = random_measure(rng, 2, 3)
    f = random_cylinder_function(rng, 2, 2)
    assert integrate(f, mu) == pytest.approx(
        sum(float(w) * f.value_at(x) for x, w in mu), abs=1e-14
    )


# -- convolution ---------------------------------------------------------------


def test_convolve_dirac_splice():
    # pushforward(delta_x) *_1 delta_z concentrates at (x_2, z)
    x, z = pt("12|2"), pt("|112")
    out = convolve(pushforward(AtomicMeasure.dirac(x)), AtomicMeasure.dirac(z), 1)
    assert out == AtomicMeasure.dirac(z.prepend(2))


def test_convolve_fixed_point_splice():
    x = pt("|1")  # sigma(x) = x
    z = pt("|212")
    out = convolve(pushforward(AtomicMeasure.dirac(x)), AtomicMeasure.dirac(z), 1)
    assert out == AtomicMeasure.dirac(z.prepend(1))


def test_absorbing_identity_exact_in_rational_mode():
    eta = AtomicMeasure([pt("|1"), pt("|2")], [Fraction(1, 4), Fraction(3, 4)])
    mu = AtomicMeasure([pt("|12"), pt("|2")], [Fraction(1, 3), Fraction(2, 3)])
    once = convolve(eta, mu, 1)
    twice = convolve(once, mu, 1)
    assert twice == once
    assert twice.exact


def test_order_n_splice_follows_kernel():
    # pushforward(delta_x) *_n delta_y = delta at ((x_2..x_{n+1}), y)
    x, y = pt("121|2"), pt("|1")
    for n in (1, 2, 3):
        out = convolve(pushforward(AtomicMeasure.dirac(x)), AtomicMeasure.dirac(y), n)
        expected = y.prepend_word(x.shift().first(n))
        assert out == AtomicMeasure.dirac(expected)
        assert expected.first(n) == x.first(n + 1)[1:]


def test_convolution_support_bound():
    rng = np.random.default_rng(24)
    eta, mu = random_measure(rng, 2, 4), random_measure(rng, 2, 4)
    assert len(convolve(eta, mu, 2)) <= len(eta) * len(mu)


def test_convolution_integral_formula():
    # int f d(pushforward(delta_x) *_1 mu) = int f(x_2, y) dmu(y)
    rng = np.random.default_rng(25)
    for _ in range(20):
        x = random_point(rng, 2)
        mu = random_measure(rng, 2)
        f = random_cylinder_function(rng, 2, int(rng.integers(1, 4)))
        out = convolve(pushforward(AtomicMeasure.dirac(x)), mu, 1)
        lhs = integrate(f, out)
        rhs = math.fsum(
            float(w) * f.value_at(y.prepend(x.symbol_at(2))) for y, w in mu
        )
        assert lhs == pytest.approx(rhs, abs=1e-13)


def test_convolution_with_invariant_measure_formula():
    # for shift-invariant nu (uniform on a periodic orbit),
    # int f d(pushforward(nu) *_n mu) integrates f(x_1..x_n, y) dnu dmu
    rng = np.random.default_rng(26)
    x = pt("|112")
    orbit = [x, x.shift(), x.shift().shift()]
    nu = AtomicMeasure(orbit, [1 / 3] * 3)
    for n in (1, 2, 3):
        mu = random_measure(rng, 2)
        f = random_cylinder_function(rng, 2, n + 1)
        lhs = integrate(f, convolve(pushforward(nu), mu, n))
        rhs = math.fsum(
            float(wx) * float(wy) * f.value_at(y.prepend_word(z.first(n)))
            for z, wx in nu
            for y, wy in mu
        )
        assert lhs == pytest.approx(rhs, abs=1e-13)


def test_convolution_contraction():
    rng = np.random.default_rng(27)
    for _ in range(40):
        eta = random_measure(rng, 2)
        mu, mu2 = random_measure(rng, 2), random_measure(rng, 2)
        base = mk_distance(mu, mu2)
        for n in (1, 2, 3):
            lhs = mk_distance(convolve(eta, mu, n), convolve(eta, mu2, n))
            assert lhs <= 2.0**-n * base + 1e-12


def test_support_cap_triggers_quantize(caplog):
    old_atoms, old_depth = measures.SUPPORT_CAP_ATOMS, measures.SUPPORT_CAP_DEPTH
    measures.configure_support_cap(4, 3)
    try:
        rng = np.random.default_rng(28)
        eta = random_measure(rng, 2, 4)
        mu = random_measure(rng, 2, 4)
        while len(eta) * len(mu) <= 4:
            eta, mu = random_measure(rng, 2, 4), random_measure(rng, 2, 4)
        with caplog.at_level(logging.WARNING, logger="l2tf.measures"):
            out = convolve(eta, mu, 1)
        assert len(out) <= 2**3
        assert any("quantizing" in rec.message for rec in caplog.records)
    finally:
        measures.configure_support_cap(old_atoms, old_depth)


# -- quantize / periodic approximation ----------------------------------------


def test_quantize_examples():
    assert quantize(AtomicMeasure.dirac(pt("|12")), 2) == AtomicMeasure.dirac(pt("|12"))
    assert quantize(AtomicMeasure.dirac(pt("112|1")), 2) == AtomicMeasure.dirac(pt("|1"))


def test_quantize_distance_bound():
    rng = np.random.default_rng(29)
    for _ in range(50):
        mu = random_measure(rng, 2)
        k = int(rng.integers(1, 7))
        assert mk_distance(mu, quantize(mu, k)) <= 2.0**-k


def test_periodic_approx_two_symbols_depth_one():
    mu_k = periodic_approx([0.5, 0.5], 1, 2)
    assert mu_k == AtomicMeasure([pt("|12"), pt("|21")], [0.5, 0.5])


def test_periodic_approx_is_periodic_and_close():
    rng = np.random.default_rng(30)
    for k in (1, 2, 3):
        table = rng.dirichlet(np.ones(2**k))
        mu_k = periodic_approx(table, k, 2)
        r_k = k * 2**k
        assert pushforward_iter(mu_k, r_k) == mu_k
        np.testing.assert_allclose(mu_k.cylinder_weights(k), table, atol=1e-15)
        mu = AtomicMeasure(
            [EventuallyPeriodic(w, (1,), 2) for w in all_words(2, k)], table
        )
        assert mk_distance(mu, mu_k) <= 2.0**-k


def test_periodic_approx_rejects_unnormalized():
    with pytest.raises(ValueError):
        periodic_approx([0.9, 0.2], 1, 2)


# -- dirac lift ----------------------------------------------------------------


def test_dirac_lift_examples():
    x = pt("|12")
    lifted = dirac_lift(AtomicMeasure.dirac(x))
    assert len(lifted) == 1 and lifted.atoms[0] == AtomicMeasure.dirac(x)

    mu = AtomicMeasure([pt("|1"), pt("|2")], [0.5, 0.5])
    lifted = dirac_lift(mu)
    f = CylinderFunction(2, 1, [2.0, 5.0])
    total = math.fsum(float(w) * integrate(f, rho) for rho, w in lifted)
    assert total == pytest.approx(0.5 * 2.0 + 0.5 * 5.0, abs=1e-15)
    assert barycenter(lifted) == mu


# -- the exact metric ----------------------------------------------------------


def test_mk_distance_matches_lp_engine():
    rng = np.random.default_rng(31)
    for _ in range(60):
        mu, nu = random_measure(rng, 2), random_measure(rng, 2)
        assert mk_distance(mu, nu) == pytest.approx(lp_mk(mu, nu), abs=1e-9)
    for _ in range(20):
        mu, nu = random_measure(rng, 3), random_measure(rng, 3)
        assert mk_distance(mu, nu) == pytest.approx(lp_mk(mu, nu), abs=1e-9)


def test_mk_distance_matches_enumeration_small():
    rng = np.random.default_rng(32)
    for _ in range(25):
        mu, nu = random_measure(rng, 2, 3), random_measure(rng, 2, 3)
        cost = np.array([[distance(x, y) for y in nu.atoms] for x in mu.atoms])
        expected = transport_value_by_enumeration(
            np.array([float(w) for w in mu.weights]),
            np.array([float(w) for w in nu.weights]),
            cost,
        )
        assert mk_distance(mu, nu) == pytest.approx(expected, abs=1e-9)


def test_mk_distance_identities():
    mu = AtomicMeasure([pt("|1"), pt("|2")], [0.5, 0.5])
    assert mk_distance(mu, mu) == 0.0
    assert mk_distance(mu, AtomicMeasure.dirac(pt("|1"))) == 0.25
    x, y = pt("|121"), pt("|122")
    assert mk_distance(
        AtomicMeasure.dirac(x), AtomicMeasure.dirac(y)
    ) == distance(x, y)


def test_pushforward_is_two_lipschitz():
    rng = np.random.default_rng(33)
    for _ in range(40):
        mu, nu = random_measure(rng, 2), random_measure(rng, 2)
        assert mk_distance(pushforward(mu), pushforward(nu)) <= 2 * mk_distance(
            mu, nu
        ) + 1e-12
