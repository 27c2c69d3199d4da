from fractions import Fraction

import pytest

from diracmag.errors import DomainError, OracleError, StateError
from diracmag.hydrogenic import QuantumState, SturmianIndex, bound_radial, parse_state_label, relativistic_params, sturmian_radial
from diracmag.magnet import channel_prefactor, chi_ground_closed_forms, chi_p_dprime, chi_total, r_channel
from diracmag.oracle import (
    SeriesTruncation,
    chi_p_kappa_cancellation,
    closed_form_moments,
    gamma_sum_identity_residual,
    gamma_sum_identity_sides,
    hyp3f2_reference,
    qt_overlap_closed_form,
    radial_integral_quadrature,
    raise_all_relation_sides,
    r_series_truncated,
    sturmian_overlaps,
)
from diracmag.precision import PrecisionPolicy
from diracmag.specfun import HypergeometricArgs

EXT = PrecisionPolicy.extended(50)
ALPHA = EXT.alpha()


# quadrature


def test_quadrature_settles_under_doubling():
    P, Q = bound_radial(QuantumState(2, -3), ALPHA * 80, EXT)
    res = radial_integral_quadrature(P, P, 2)
    assert res.change <= 1e-12


def test_quadrature_rejects_mismatched_scales():
    P, _ = bound_radial(QuantumState(0, -1), ALPHA * 10, EXT)
    P2, _ = bound_radial(QuantumState(1, -1), ALPHA * 10, EXT)
    with pytest.raises(DomainError):
        radial_integral_quadrature(P, P2)


def test_moment_examples():
    for (n, kappa, Z), key, power, pair in [((1, -1, 50), "r2_large_minus_small", 2, "PP-QQ"), ((0, -2, 90), "r_large_small", 1, "PQ")]:
        state = QuantumState(n, kappa)
        aZ = ALPHA * Z
        P, Q = bound_radial(state, aZ, EXT)
        if pair == "PQ":
            q = radial_integral_quadrature(P, Q, power).value
        else:
            q = radial_integral_quadrature(P, P, power).value - radial_integral_quadrature(Q, Q, power).value
        assert abs(q / closed_form_moments(state, aZ, EXT)[key] - 1) < 1e-10


# overlaps


def test_qt_closed_form_against_quadrature():
    host = QuantumState(1, -1)
    aZ = ALPHA * 40
    index = SturmianIndex(3, 2)
    _, Q = bound_radial(host, aZ, EXT)
    _, T = sturmian_radial(index, host, aZ, EXT)
    quad = radial_integral_quadrature(Q, T).value
    assert abs(qt_overlap_closed_form(host, index, aZ, EXT) / quad - 1) < 1e-9


def test_qt_closed_form_singular_at_zero():
    with pytest.raises(DomainError):
        qt_overlap_closed_form(QuantumState(1, -1), SturmianIndex(0, 2), ALPHA, EXT)


@pytest.mark.parametrize("host,kappa_prime", [((1, -1), 2), ((0, -2), 3), ((2, 1), -2), ((0, -1), 2)])
def test_overlap_recursion_against_closed_form_and_quadrature(host, kappa_prime):
    state = QuantumState(*host)
    aZ = ALPHA * 70
    lower = sturmian_overlaps(state, kappa_prime, True, 12, aZ, EXT)
    upper = sturmian_overlaps(state, kappa_prime, False, 12, aZ, EXT)
    P, Q = bound_radial(state, aZ, EXT)
    for n_prime in (-12, -3, -1, 0, 1, 2, 7, 12):
        S, T = sturmian_radial(SturmianIndex(n_prime, kappa_prime), state, aZ, EXT)
        qt = radial_integral_quadrature(Q, T).value
        ps = radial_integral_quadrature(P, S).value
        assert abs(lower[n_prime] - qt) <= 1e-12 * max(abs(qt), 1e-30)
        assert abs(upper[n_prime] - ps) <= 1e-12 * max(abs(ps), 1e-30)
        if n_prime:
            cf = qt_overlap_closed_form(state, SturmianIndex(n_prime, kappa_prime), aZ, EXT)
            assert abs(cf - qt) <= 1e-12 * max(abs(qt), 1e-30)


# truncated series


@pytest.fixture(scope="module")
def series_2s_z20():
    return r_series_truncated(parse_state_label("2s1/2"), 20, 1, None, SeriesTruncation(), EXT)


def test_series_matches_closed_form(series_2s_z20):
    state = parse_state_label("2s1/2")
    closed = r_channel(state, ALPHA * 20, 1, EXT).r_reduced
    assert abs(series_2s_z20.value / closed - 1) <= 1e-8


def test_series_error_non_increasing(series_2s_z20):
    state = parse_state_label("2s1/2")
    closed = r_channel(state, ALPHA * 20, 1, EXT).r_reduced
    marks = [m for m, _ in series_2s_z20.checkpoints]
    assert marks == [250, 500, 1000, 2000]
    errors = [abs(v - closed) for _, v in series_2s_z20.checkpoints]
    assert all(b <= a for a, b in zip(errors, errors[1:]))


def test_series_diagnostics(series_2s_z20):
    assert series_2s_z20.min_abs_mu_minus_one > 0
    assert series_2s_z20.spot_checks == 200
    assert series_2s_z20.spot_max_deviation < 1e-9
    assert 0 < series_2s_z20.relative_tail < 1e-10


def test_series_ground_state_channel_against_specialized_split():
    state = QuantumState(0, -1)
    Z = 1
    trunc = SeriesTruncation(max_abs_nprime=400, spot_fraction=0.02)
    series = r_series_truncated(state, Z, 1, None, trunc, EXT)
    pref = EXT.num(channel_prefactor(state, 1))
    chi_prime = pref * series.value / (8 * Z * Z)
    cd, cp = chi_ground_closed_forms(Z, None, EXT)
    split = cp - chi_p_dprime(state, Z, None, EXT)
    assert abs(chi_prime / (cd + cp)) < 1e-10
    assert abs(chi_prime / split - 1) < 1e-8


def test_series_tail_estimate_tracks_error():
    state = parse_state_label("2p3/2")
    trunc = SeriesTruncation(max_abs_nprime=40, spot_fraction=0.1, quadrature_order=60)
    res = r_series_truncated(state, 80, 1, None, trunc, EXT)
    closed = r_channel(state, ALPHA * 80, 1, EXT).r_reduced
    err = float(abs(res.value - closed))
    assert res.tail_estimate > 1e-20
    assert 0.3 * res.tail_estimate < err < 3 * res.tail_estimate


def test_series_rejects_short_truncation_and_missing_channel():
    with pytest.raises(DomainError):
        r_series_truncated(QuantumState(0, -1), 10, 1, None, SeriesTruncation(max_abs_nprime=9), EXT)
    with pytest.raises(StateError):
        r_series_truncated(QuantumState(0, -1), 10, -1, None, SeriesTruncation(max_abs_nprime=20), EXT)


def test_spot_check_detects_corrupt_overlaps(monkeypatch):
    from diracmag import oracle

    real = oracle.sturmian_overlaps

    def corrupt(*args, **kwargs):
        out = real(*args, **kwargs)
        return {k: v * (1 + EXT.num("1e-6")) for k, v in out.items()}

    monkeypatch.setattr(oracle, "sturmian_overlaps", corrupt)
    trunc = SeriesTruncation(max_abs_nprime=20, spot_fraction=1.0, quadrature_order=40)
    with pytest.raises(OracleError):
        oracle.r_series_truncated(QuantumState(0, -1), 30, 1, None, trunc, EXT)


# kappa' = kappa cancellation


@pytest.mark.parametrize("n,kappa,Z", [(1, -1, 30), (0, -2, 80)])
def test_kappa_channel_cancels(n, kappa, Z):
    res = chi_p_kappa_cancellation(QuantumState(n, kappa), Z, None, SeriesTruncation(), EXT)
    assert abs(res.total) <= 1e-8 * res.largest
    assert res.largest > 0


def test_kappa_channel_first_piece_prefactor():
    state = QuantumState(1, -1)
    res = chi_p_kappa_cancellation(state, 30, None, SeriesTruncation(max_abs_nprime=20), EXT)
    eps = relativistic_params(state, ALPHA * 30, EXT).eps_nk
    sign_eps = (eps > EXT.num(1) / 2) - (eps < EXT.num(1) / 2)
    assert ((res.r_a > 0) - (res.r_a < 0)) == sign_eps


# finite identity


@pytest.mark.parametrize("n,kappa,Z", [(1, -1, 20), (3, 2, 60), (2, -1, 100), (4, -3, 130)])
def test_gamma_sum_identity(n, kappa, Z):
    assert gamma_sum_identity_residual(QuantumState(n, kappa), ALPHA * Z, EXT) <= 1e-12


@pytest.mark.parametrize("Z", [1, 55, 110])
def test_gamma_sum_identity_n0(Z):
    state = QuantumState(0, -2)
    aZ = ALPHA * Z
    lhs, rhs = gamma_sum_identity_sides(state, aZ, EXT)
    rp = relativistic_params(state, aZ, EXT)
    expected = 2 * (rp.N_nk + 2) * (-2 - 2 * rp.gamma_kappa * rp.N_nk)
    assert abs(lhs - expected) <= 1e-45 * abs(expected)
    assert abs(rhs - expected) <= 1e-45 * abs(expected)


# 3F2 reference


def test_reference_terminating_is_exact_three_terms():
    args = HypergeometricArgs(Fraction(-2), Fraction(1, 2), Fraction(2), Fraction(3), Fraction(5, 2))
    t1 = Fraction(-2) * Fraction(1, 2) * 2 / (3 * Fraction(5, 2))
    t2 = t1 * Fraction(-1) * Fraction(3, 2) * 3 / (4 * Fraction(7, 2) * 2)
    assert hyp3f2_reference(args) == 1 + t1 + t2


def test_reference_raise_all_relation_high_precision():
    digits = 40
    policy = PrecisionPolicy.extended(digits)
    ref = lambda A: hyp3f2_reference(A, digits)
    lhs, rhs = raise_all_relation_sides(policy.num("0.3"), policy.num("0.45"), policy.num("0.7"), policy.num("3.1"), ref, policy)
    assert abs(lhs - rhs) <= policy.num(10) ** (-digits + 5) * abs(lhs)
