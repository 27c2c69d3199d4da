"""Independent numerical checks of the closed forms.

Everything here is brute force on purpose: Gauss-Laguerre quadrature of
radial products, truncated bilateral Sturmian series, and a library
reference for 3F2.  Results are in the reduced units of
:mod:`diracmag.hydrogenic`.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from .errors import DomainError, NonConvergenceError, OracleError, QuadratureError, StateError
from .hydrogenic import (
    QuantumState,
    RadialFunction,
    SturmianIndex,
    bound_coefficients,
    bound_radial,
    ijk_functions,
    relativistic_params,
    sturmian_coefficients,
    sturmian_eigenvalue,
    sturmian_radial,
)
from .precision import CompensatedSum, PrecisionPolicy, resolve
from .specfun import (
    HypergeometricArgs,
    QuadratureRule,
    gauss_laguerre_rule,
    hyp3f2_unit,
    laguerre_coefficients,
    ln_gamma,
    pochhammer,
)

__all__ = [
    "CancellationResult",
    "QuadratureResult",
    "SeriesResult",
    "SeriesTruncation",
    "chi_p_kappa_cancellation",
    "closed_form_moments",
    "gamma_sum_identity_residual",
    "gamma_sum_identity_sides",
    "hyp3f2_reference",
    "lower_shift_relation_sides",
    "qt_overlap_closed_form",
    "r_series_truncated",
    "radial_integral_quadrature",
    "raise_all_relation_sides",
    "sturmian_overlaps",
]


# --------------------------------------------------------------------------
# quadrature


@dataclass(frozen=True)
class QuadratureResult:
    value: object
    change: float
    order: int


def _product_exponent(f: RadialFunction, g: RadialFunction, r_power: int):
    return f.leading_power + g.leading_power + r_power


def _integrate_with(rule: QuadratureRule, f, g):
    # The r power sits in the rule's weight exponent.
    acc = CompensatedSum(rule.weights[0] * 0)
    for x, w in zip(rule.nodes, rule.weights):
        acc.add(w * f.shape(x) * g.shape(x))
    return acc.value, acc.abs_total


def radial_integral_quadrature(
    f: RadialFunction,
    g: RadialFunction,
    r_power: int = 0,
    rule: QuadratureRule | None = None,
    order: int | None = None,
    tolerance: float = 1e-12,
) -> QuadratureResult:
    """Integral of rt**r_power * f * g over rt in (0, inf) by Gauss-Laguerre quadrature.

    The rule's weight exponent must equal the combined small-x power of the
    integrand.  Without a rule, order q and 2q are compared; a change above
    ``tolerance`` (relative to the integrand's absolute scale) raises
    QuadratureError.  With a rule, that rule alone is used and ``change`` is 0.
    """
    policy = f.policy
    if f.jacobian != g.jacobian:
        raise DomainError("radial functions live on different x scales")
    beta = _product_exponent(f, g, r_power)
    scale = f.jacobian ** (r_power + 1)
    if rule is not None:
        if abs(rule.exponent - beta) > 1e3 * policy.eps * max(1, abs(beta)):
            raise DomainError(f"rule exponent {rule.exponent} does not match integrand power {beta}")
        value, _ = _integrate_with(rule, f, g)
        return QuadratureResult(scale * value, 0.0, rule.order)
    if order is None:
        degree = f.max_degree + g.max_degree + 2
        order = max(8, degree // 2 + 4)
    v1, _ = _integrate_with(gauss_laguerre_rule(order, beta, policy), f, g)
    v2, absolute = _integrate_with(gauss_laguerre_rule(2 * order, beta, policy), f, g)
    floor = 1e3 * policy.eps * absolute
    change = float(abs(v2 - v1) / max(abs(v2), floor, 1e-300))
    if abs(v2 - v1) > tolerance * abs(v2) + floor:
        raise QuadratureError(
            f"quadrature did not settle under order doubling ({order} -> {2 * order}): relative change {change:.3g}"
        )
    return QuadratureResult(scale * v2, change, 2 * order)


def closed_form_moments(state: QuantumState, alphaZ, policy: PrecisionPolicy | None = None) -> dict:
    """Closed forms of two reduced moments of the bound pair.

    ``r2_large_minus_small`` is the integral of rt^2 (P^2 - Q^2);
    ``r_large_small`` is the integral of rt P Q.
    """
    policy = resolve(policy)
    rp = relativistic_params(state, alphaZ, policy)
    g, N = rp.gamma_kappa, rp.N_nk
    n, k = state.n, state.kappa
    return {
        "r2_large_minus_small": (n + g) * (N * (5 * n * n + 10 * n * g + 2 * g * g + 1) - 3 * k * (n + g)) / 2,
        "r_large_small": rp.alphaZ * (2 * k * (n + g) - N) / (4 * N),
    }


# --------------------------------------------------------------------------
# overlaps between the host state and Sturmians


def qt_overlap_closed_form(host: QuantumState, index: SturmianIndex, alphaZ, policy: PrecisionPolicy | None = None):
    """Closed form of the reduced integral of Q_host * T_{n'kappa'} over rt.

    Valid for n' != 0; Gamma ratios with possibly negative arguments are
    taken as rising factorials.
    """
    policy = resolve(policy)
    ctx = policy.ctx
    m = index.m
    if m == 0:
        raise DomainError("the closed form is singular at n' = 0")
    rp = relativistic_params(host, alphaZ, policy)
    g, N, eps = rp.gamma_kappa, rp.N_nk, rp.eps_nk
    gp = index.gamma(rp.alphaZ, policy)
    Np = index.apparent_N(rp.alphaZ, policy)
    n, kappa, kp = host.n, host.kappa, index.kappa_prime
    d = gp - g
    log_xi = (
        ln_gamma(n + 1, policy) + ctx.log(n + 2 * g) + ln_gamma(m + 1, policy) + ctx.log(m + 2 * gp) + ctx.log(N)
        - ctx.log(Np * (N - kappa) * (Np - kp)) - ln_gamma(n + 2 * g, policy) - ln_gamma(m + 2 * gp, policy)
        - ctx.log(16)
    ) / 2
    outer = ctx.exp(log_xi + ln_gamma(n + 2 * g, policy) - ln_gamma(m, policy)) * (1 - eps) / (Np + kp)
    acc = CompensatedSum(policy.num(0))
    for k in range(n + 1):
        term = (
            (-1) ** k
            * pochhammer(d - k, m - 1)
            * ctx.exp(ln_gamma(g + gp + k + 1, policy) - ln_gamma(k + 1, policy) - ln_gamma(n - k + 1, policy)
                      - ln_gamma(k + 2 * g + 1, policy))
            * ((n - k) + (N - kappa))
            * ((Np + kp) + (m + d - k - 1))
        )
        acc.add(term)
    return outer * acc.value


def _host_polynomial(c, lower: bool, policy):
    """Monomial coefficients of L_{n-1} +/- ratio L_n with parameter 2 gamma."""
    n = c.m
    beta = 2 * c.gamma
    sign = -1 if lower else 1
    top = laguerre_coefficients(n, beta, policy)
    below = laguerre_coefficients(n - 1, beta, policy) if n > 0 else []
    poly = [sign * c.ratio * t for t in top]
    for j, t in enumerate(below):
        poly[j] += t
    return poly


def sturmian_overlaps(
    host: QuantumState, kappa_prime: int, lower: bool, max_abs_nprime: int, alphaZ, policy: PrecisionPolicy | None = None
) -> dict:
    """Reduced overlaps of the host with Sturmians (kappa', n') for |n'| <= M.

    ``lower`` selects Q_host * T (otherwise P_host * S).  Each overlap comes
    from the monomial expansion of the host Laguerre polynomial and the
    moments int x^c e^{-x} L_m^{(b)}(x) dx = Gamma(c+1) (b-c)_m / m!,
    advanced in m by their ratio.  Returns a dict n' -> overlap.
    """
    policy = resolve(policy)
    ctx = policy.ctx
    rp = relativistic_params(host, alphaZ, policy)
    hc = bound_coefficients(host, rp, policy)
    host_norm = hc.norm_lower if lower else hc.norm_upper
    poly = _host_polynomial(hc, lower, policy)
    g = rp.gamma_kappa
    gp = SturmianIndex(0, kappa_prime).gamma(rp.alphaZ, policy)
    d = gp - g
    # G_j = Gamma(g + g' + j + 1) h_j ; moment ratio A_j(m) = (d - j)_m / m!
    weights = [ctx.exp(ln_gamma(g + gp + j + 1, policy)) * h for j, h in enumerate(poly)]
    cur = [policy.num(1) for _ in poly]
    prev = [policy.num(0) for _ in poly]
    jac = rp.N_nk / 2
    sigma = -1 if lower else 1
    out = {}
    for m in range(max_abs_nprime + 1):
        s_prev = sum((w * a for w, a in zip(weights, prev)), policy.num(0))
        s_cur = sum((w * a for w, a in zip(weights, cur)), policy.num(0))
        for n_prime in ((m, -m) if m else (0,)):
            sc = sturmian_coefficients(SturmianIndex(n_prime, kappa_prime), rp, policy)
            norm = sc.norm_lower if lower else sc.norm_upper
            out[n_prime] = jac * host_norm * norm * (s_prev + sigma * sc.ratio * s_cur)
        prev = cur
        cur = [a * (d - j + m) / (m + 1) for j, a in enumerate(cur)]
    return out


# --------------------------------------------------------------------------
# truncated Sturmian series


@dataclass(frozen=True)
class SeriesTruncation:
    """Truncation of a bilateral Sturmian series and of its quadrature spot checks."""

    max_abs_nprime: int = 2000
    quadrature_order: int = 400
    spot_fraction: float = 0.05
    seed: int = 20240601
    spot_tolerance: float = 1e-9

    def __post_init__(self):
        if self.max_abs_nprime < 1:
            raise DomainError("max_abs_nprime must be positive")
        if self.quadrature_order < 1:
            raise DomainError("quadrature_order must be positive")
        if not 0 <= self.spot_fraction <= 1:
            raise DomainError("spot_fraction must lie in [0, 1]")


@dataclass(frozen=True)
class SeriesResult:
    """Partial sum over |n'| <= M with its diagnostics."""

    value: object
    tail_estimate: float
    checkpoints: tuple
    min_abs_mu_minus_one: float
    spot_checks: int
    spot_max_deviation: float
    truncation: SeriesTruncation = field(repr=False)

    @property
    def relative_tail(self) -> float:
        return self.tail_estimate / float(abs(self.value)) if self.value else float("inf")


def _spot_check(host, kappa_prime, lower, overlaps, rp, trunc, policy, candidates):
    """Quadrature of seeded overlaps; returns (count, max relative deviation)."""
    if trunc.spot_fraction == 0 or not candidates:
        return 0, 0.0
    rng = random.Random(trunc.seed)
    count = max(1, round(trunc.spot_fraction * len(overlaps)))
    chosen = sorted(rng.sample(candidates, min(count, len(candidates))), key=lambda v: (abs(v), v))
    P, Q = bound_radial(host, rp.alphaZ, policy)
    hostf = Q if lower else P
    gp = SturmianIndex(0, kappa_prime).gamma(rp.alphaZ, policy)
    rule = gauss_laguerre_rule(trunc.quadrature_order, rp.gamma_kappa + gp, policy)
    top = max(abs(v) for v in chosen)
    beta = 2 * gp
    # Laguerre table L_m^{(2 gamma')}(x_i), m = 0..top, by forward recurrence.
    table = []
    for x in rule.nodes:
        row = [policy.num(1)]
        prev, cur = x * 0, policy.num(1)
        for k in range(top):
            prev, cur = cur, ((2 * k + 1 + beta - x) * cur - (k + beta) * prev) / (k + 1)
            row.append(cur)
        table.append(row)
    host_shape = [w * hostf.shape(x) for x, w in zip(rule.nodes, rule.weights)]
    worst = 0.0
    sigma = -1 if lower else 1
    for n_prime in chosen:
        sc = sturmian_coefficients(SturmianIndex(n_prime, kappa_prime), rp, policy)
        norm = sc.norm_lower if lower else sc.norm_upper
        m = sc.m
        acc = CompensatedSum(policy.num(0))
        for hs, row in zip(host_shape, table):
            lag = (row[m - 1] if m else 0) + sigma * sc.ratio * row[m]
            acc.add(hs * lag)
        quad = hostf.jacobian * norm * acc.value
        ref = overlaps[n_prime]
        floor = 1e3 * policy.eps * float(abs(hostf.jacobian * norm) * acc.abs_total)
        dev = float(abs(quad - ref)) / max(float(abs(ref)), floor, 1e-300)
        worst = max(worst, dev)
    if worst > trunc.spot_tolerance:
        raise OracleError(
            f"analytic overlap disagrees with quadrature for state {host.label}, kappa'={kappa_prime}: "
            f"relative deviation {worst:.3g}"
        )
    return len(chosen), worst


def _tail_estimate(rings, M):
    """Algebraic tail from the decay of ring sums between M/2 and M."""
    if M < 4:
        return float("inf")
    last = float(abs(rings[M]))
    half = float(abs(rings[M // 2]))
    if last == 0.0:
        return 0.0
    if half <= last:
        return float("inf")
    p = math.log(half / last) / math.log(M / (M // 2))
    if p <= 1:
        return float("inf")
    return last * M / (p - 1)


def r_series_truncated(
    state: QuantumState,
    Z,
    channel: int,
    alpha=None,
    trunc: SeriesTruncation | None = None,
    policy: PrecisionPolicy | None = None,
) -> SeriesResult:
    """Reduced channel series R for kappa' = -kappa + channel, truncated at |n'| <= M.

    Terms with equal |n'| are added as rings.  channel +1 sums
    [int Q T]^2 / (mu - 1); channel -1 sums mu [int P S]^2 / (mu - 1).
    Overlaps come from :func:`sturmian_overlaps`, with a seeded sample
    re-derived by quadrature.
    """
    policy = resolve(policy)
    trunc = trunc or SeriesTruncation()
    if trunc.max_abs_nprime < 10:
        raise DomainError("series truncation needs max_abs_nprime >= 10")
    if channel not in (1, -1):
        raise DomainError("channel must be +1 or -1")
    kp = -state.kappa + channel
    if kp == 0:
        raise StateError("channel kappa' = 0 does not exist")
    aZ = policy.alpha(alpha) * policy.num(Z)
    rp = relativistic_params(state, aZ, policy)
    lower = channel == 1
    M = trunc.max_abs_nprime
    overlaps = sturmian_overlaps(state, kp, lower, M, aZ, policy)

    denom = state.n + rp.gamma_kappa + rp.N_nk
    acc = CompensatedSum(policy.num(0))
    rings = {}
    checkpoints = []
    marks = {M // 8, M // 4, M // 2, M}
    min_gap = float("inf")
    for m in range(M + 1):
        ring = policy.num(0)
        for n_prime in ((m, -m) if m else (0,)):
            index = SturmianIndex(n_prime, kp)
            mu = (m + index.gamma(aZ, policy) + index.apparent_N(aZ, policy)) / denom
            gap = mu - 1
            min_gap = min(min_gap, float(abs(gap)))
            if not abs(gap) > 1e-25:
                raise OracleError(f"mu - 1 vanishes at n' = {n_prime}, kappa' = {kp}")
            w = 1 / gap if lower else mu / gap
            ring += w * overlaps[n_prime] ** 2
        rings[m] = ring
        acc.add(ring)
        if m in marks:
            checkpoints.append((m, acc.value))

    limit = 2 * trunc.quadrature_order - state.n - 2
    candidates = [v for v in overlaps if abs(v) <= limit]
    count, worst = _spot_check(state, kp, lower, overlaps, rp, trunc, policy, candidates)
    return SeriesResult(acc.value, _tail_estimate(rings, M), tuple(checkpoints), min_gap, count, worst, trunc)


# --------------------------------------------------------------------------
# kappa' = kappa cancellation


@dataclass(frozen=True)
class CancellationResult:
    total: object
    r_infinity: object
    r_a: object
    r_b: object
    r_c: object

    @property
    def components(self) -> tuple:
        return (self.r_infinity, self.r_a, self.r_b, self.r_c)

    @property
    def largest(self):
        return max(abs(c) for c in self.components)

    @property
    def relative(self) -> float:
        big = self.largest
        return float(abs(self.total) / big) if big else 0.0


def chi_p_kappa_cancellation(
    state: QuantumState,
    Z,
    alpha=None,
    trunc: SeriesTruncation | None = None,
    policy: PrecisionPolicy | None = None,
) -> CancellationResult:
    """Assemble the four pieces of the kappa' = kappa paramagnetic channel numerically.

    The overlap series runs over n' != n, |n'| <= M.  Overlaps with
    |n'| <= n + 2 are integrated by quadrature; beyond that the analytic
    moments (which vanish there by orthogonality) are used.
    """
    policy = resolve(policy)
    trunc = trunc or SeriesTruncation()
    aZ = policy.alpha(alpha) * policy.num(Z)
    rp = relativistic_params(state, aZ, policy)
    n, kappa = state.n, state.kappa
    cp, cm = 2 * kappa - 1, 2 * kappa + 1
    M = trunc.max_abs_nprime
    P, Q = bound_radial(state, aZ, policy)

    def pair_integral(f, g):
        return radial_integral_quadrature(f, g).value

    upper = sturmian_overlaps(state, kappa, False, M, aZ, policy)
    lower = sturmian_overlaps(state, kappa, True, M, aZ, policy)
    for n_prime in range(-(n + 2), n + 3):
        if abs(n_prime) > M:
            continue
        S, T = sturmian_radial(SturmianIndex(n_prime, kappa), state, aZ, policy)
        upper[n_prime] = pair_integral(P, S)
        lower[n_prime] = pair_integral(Q, T)

    acc = CompensatedSum(policy.num(0))
    for m in range(M + 1):
        for n_prime in ((m, -m) if m else (0,)):
            if n_prime == n:
                continue
            mu = sturmian_eigenvalue(SturmianIndex(n_prime, kappa), state, aZ, policy)
            a = cp * upper[n_prime] - cm * lower[n_prime]
            b = cp * mu * upper[n_prime] - cm * lower[n_prime]
            acc.add(a * b / (mu - 1))
    r_inf = acc.value

    S, T = sturmian_radial(SturmianIndex(n, kappa), state, aZ, policy)
    I, J, K = ijk_functions(state, aZ, policy)
    own = cp * pair_integral(P, S) - cm * pair_integral(Q, T)
    half = policy.num(1) / 2
    r_a = (rp.eps_nk - half) * own * own
    r_b = (cp * pair_integral(P, I) - cm * pair_integral(Q, K)) * own
    r_c = own * (cp * pair_integral(P, J) - cm * pair_integral(Q, K))
    total = r_inf + r_a + r_b + r_c
    return CancellationResult(total, r_inf, r_a, r_b, r_c)


# --------------------------------------------------------------------------
# finite gamma-sum identity


def gamma_sum_identity_sides(state: QuantumState, alphaZ, policy: PrecisionPolicy | None = None):
    """Both sides of the finite identity behind the elementary part of the channel bracket.

    Left: -n! Gamma(n+2g+1) sum_{k,p} (-1)^{k+p} [(n-k)+w][(n-p)+w] Gamma(2g+k+p+2)
    / (k! (n-k)! p! (n-p)! Gamma(k+2g+1) Gamma(p+2g+1)) with w = N - kappa.
    Right: 2 w [n (n + 2g) + kappa - 2 (n + g) N].
    """
    policy = resolve(policy)
    ctx = policy.ctx
    rp = relativistic_params(state, alphaZ, policy)
    g, N = rp.gamma_kappa, rp.N_nk
    n, kappa = state.n, state.kappa
    w = N - kappa
    coef = []
    for k in range(n + 1):
        lc = -ln_gamma(k + 1, policy) - ln_gamma(n - k + 1, policy) - ln_gamma(k + 2 * g + 1, policy)
        coef.append((-1) ** k * ((n - k) + w) * ctx.exp(lc))
    terms = []
    for k in range(n + 1):
        for p in range(n + 1):
            terms.append(coef[k] * coef[p] * ctx.exp(ln_gamma(2 * g + k + p + 2, policy)))
    terms.sort(key=abs, reverse=True)
    acc = CompensatedSum(policy.num(0))
    for t in terms:
        acc.add(t)
    lhs = -ctx.exp(ln_gamma(n + 1, policy) + ln_gamma(n + 2 * g + 1, policy)) * acc.value
    rhs = 2 * w * (n * (n + 2 * g) + kappa - 2 * (n + g) * N)
    return lhs, rhs


def gamma_sum_identity_residual(state: QuantumState, alphaZ, policy: PrecisionPolicy | None = None):
    """Relative difference of the two sides of :func:`gamma_sum_identity_sides`."""
    lhs, rhs = gamma_sum_identity_sides(state, alphaZ, policy)
    return float(abs(lhs - rhs) / max(abs(lhs), abs(rhs)))


# --------------------------------------------------------------------------
# 3F2 reference and contiguous relations


def _is_rational(v) -> bool:
    return isinstance(v, (int, Fraction))


def hyp3f2_reference(args: HypergeometricArgs, digits: int = 40):
    """Reference value of 3F2(...; 1) computed by mpmath at ``digits`` digits.

    Terminating series with rational parameters are summed exactly and
    returned as a Fraction.
    """
    if digits < 15:
        raise DomainError("reference digits must be >= 15")
    order = args.terminating_order
    params = (args.a1, args.a2, args.a3, args.b1, args.b2)
    if order is not None and all(_is_rational(v) for v in params):
        a1, a2, a3, b1, b2 = (Fraction(v) for v in params)
        total, t = Fraction(0), Fraction(1)
        for j in range(order + 1):
            total += t
            t = t * (a1 + j) * (a2 + j) * (a3 + j) / ((j + 1) * (b1 + j) * (b2 + j))
        return total
    if order is None and not args.excess > 0:
        raise NonConvergenceError(f"3F2 at unit argument diverges: excess {args.excess}")
    ctx = mpmath.MPContext()
    ctx.dps = digits + 10
    conv = [ctx.mpf(v.numerator) / v.denominator if isinstance(v, Fraction) else ctx.mpf(v) for v in params]
    value = ctx.hyp3f2(*conv, 1)
    ctx.dps = digits
    return +value


def lower_shift_relation_sides(a1, a2, a3, b, evaluate=None, policy: PrecisionPolicy | None = None):
    """Both sides of the relation lowering a3 by one (needs b - a1 - a2 > -1).

    3F2(a1, a2, a3-1; a3, b) = -(a1-a3)(a2-a3)/(a3 (b-a3)) 3F2(a1, a2, a3; a3+1, b)
                               + Gamma(b) Gamma(b-a1-a2+1) / ((b-a3) Gamma(b-a1) Gamma(b-a2)).
    """
    policy = resolve(policy)
    ctx = policy.ctx
    f = evaluate or (lambda A: hyp3f2_unit(A, policy).value)
    a1, a2, a3, b = (policy.num(v) for v in (a1, a2, a3, b))
    lhs = f(HypergeometricArgs(a1, a2, a3 - 1, a3, b))
    gam = ctx.gamma
    rhs = -(a1 - a3) * (a2 - a3) / (a3 * (b - a3)) * f(HypergeometricArgs(a1, a2, a3, a3 + 1, b)) + gam(b) * gam(
        b - a1 - a2 + 1
    ) / ((b - a3) * gam(b - a1) * gam(b - a2))
    return lhs, rhs


def raise_all_relation_sides(a1, a2, a3, b, evaluate=None, policy: PrecisionPolicy | None = None):
    """Both sides of the relation raising every numerator by one.

    3F2(a1+1, a2+1, a3+1; a3+2, b) = (a3+1)/(a1 a2) [ (a3-b+1) 3F2(a1, a2, a3; a3+1, b)
        + Gamma(b) Gamma(b-a1-a2-1) / (Gamma(b-a1) Gamma(b-a2)) ((b-a1-1)(b-a2-1) - a3 (b-a1-a2-1)) ].
    The left series converges only for b - a1 - a2 > 1.
    """
    policy = resolve(policy)
    ctx = policy.ctx
    f = evaluate or (lambda A: hyp3f2_unit(A, policy).value)
    a1, a2, a3, b = (policy.num(v) for v in (a1, a2, a3, b))
    lhs = f(HypergeometricArgs(a1 + 1, a2 + 1, a3 + 1, a3 + 2, b))
    gam = ctx.gamma
    extra = gam(b) * gam(b - a1 - a2 - 1) / (gam(b - a1) * gam(b - a2)) * (
        (b - a1 - 1) * (b - a2 - 1) - a3 * (b - a1 - a2 - 1)
    )
    rhs = (a3 + 1) / (a1 * a2) * ((a3 - b + 1) * f(HypergeometricArgs(a1, a2, a3, a3 + 1, b)) + extra)
    return lhs, rhs
