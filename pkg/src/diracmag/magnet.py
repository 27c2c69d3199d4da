"""Closed-form magnetizability of a Dirac one-electron atom.

All ``chi_*`` values are dimensionless coefficients c such that the physical
magnetizability is c * alpha**2 * a0**3; the 1/Z**2 scaling is included in c.
Functions accept ``alpha`` (default CODATA 2018) and a
:class:`~diracmag.precision.PrecisionPolicy` (default 50 digits).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import DiracMagError, DomainError, StateError
from .hydrogenic import QuantumState, relativistic_params
from .precision import CompensatedSum, PrecisionPolicy, resolve
from .specfun import HypergeometricArgs, hyp3f2_unit, ln_gamma

__all__ = [
    "ChannelResult",
    "MagnetizabilityBreakdown",
    "ZTildeCoefficients",
    "channel_prefactor",
    "chi_d",
    "chi_ground_closed_forms",
    "chi_p",
    "chi_p_dprime",
    "chi_p_prime_channel",
    "chi_total",
    "crossover_scan",
    "r_channel",
    "ztilde_coefficients",
]


def _alpha_z(Z, alpha, policy):
    if not Z > 0:
        raise DomainError(f"nuclear charge must be positive, got {Z}")
    return policy.alpha(alpha) * policy.num(Z)


def _gamma_shift(kappa: int, alphaZ, policy):
    """gamma - |kappa| without cancellation."""
    return -alphaZ**2 / (policy.ctx.sqrt(kappa * kappa - alphaZ**2) + abs(kappa))


def _n_minus(state: QuantumState, N, shift, c: int):
    """N - c for integer c, without cancellation when N is close to c."""
    if c <= 0:
        return N - c
    n = state.n
    return ((n + abs(state.kappa)) ** 2 - c * c + 2 * n * shift) / (N + c)


def channel_prefactor(state: QuantumState, channel: int) -> Fraction:
    """Exact angular factor 1 - 4 mu^2 / (2 kappa - channel)^2."""
    if channel not in (1, -1):
        raise DomainError("channel must be +1 (kappa' = -kappa+1) or -1 (kappa' = -kappa-1)")
    return 1 - 4 * state.mu**2 / Fraction(2 * state.kappa - channel) ** 2


def chi_d(state: QuantumState, Z, alpha=None, policy: PrecisionPolicy | None = None):
    """Diamagnetic part."""
    policy = resolve(policy)
    rp = relativistic_params(state, _alpha_z(Z, alpha, policy), policy)
    g, N = rp.gamma_kappa, rp.N_nk
    n, k = state.n, state.kappa
    ang = Fraction(4 * k * k, 1) + 4 * state.mu**2 - 1
    ang = policy.num(ang / (16 * (4 * k * k - 1)))
    radial = (n + g) * (N * (5 * n * n + 10 * n * g + 2 * g * g + 1) - 3 * k * (n + g))
    return -ang * radial / policy.num(Z) ** 2


def chi_p_dprime(state: QuantumState, Z, alpha=None, policy: PrecisionPolicy | None = None):
    """Paramagnetic part carried by the host state itself.

    The angular factor kappa (kappa^2 - gamma^2) mu^2 / (4 kappa^2 - 1) uses
    kappa^2 - gamma^2 = (alpha Z)^2; this is the combination that reproduces
    the published tables.
    """
    policy = resolve(policy)
    rp = relativistic_params(state, _alpha_z(Z, alpha, policy), policy)
    g, N, aZ = rp.gamma_kappa, rp.N_nk, rp.alphaZ
    k = state.kappa
    ang = policy.num(Fraction(k) * state.mu**2 / (4 * k * k - 1))
    return ang * aZ**2 * (2 * k * (state.n + g) - N) / (2 * N) / policy.num(Z) ** 2


@dataclass(frozen=True)
class ZTildeCoefficients:
    """Coefficients Z(k) and Zt(k) = [(n-k) + s (N-kappa)] Z(k), k = 0..n, for channel s.

    Magnitudes are stored as logarithms with separate integer signs.
    """

    channel: int
    log_z: tuple
    sign_z: tuple
    log_zt: tuple
    sign_zt: tuple
    brackets: tuple
    policy: PrecisionPolicy = field(repr=False)

    @property
    def z(self):
        exp = self.policy.ctx.exp
        return tuple(s * exp(l) if s else 0 * exp(l) for l, s in zip(self.log_z, self.sign_z))

    @property
    def zt(self):
        exp = self.policy.ctx.exp
        return tuple(s * exp(l) if s else 0 * exp(l) for l, s in zip(self.log_zt, self.sign_zt))


def _sign(x) -> int:
    return (x > 0) - (x < 0)


def ztilde_coefficients(state: QuantumState, alphaZ, channel: int, policy: PrecisionPolicy | None = None):
    policy = resolve(policy)
    ctx = policy.ctx
    if channel not in (1, -1):
        raise DomainError("channel must be +1 or -1")
    kp = -state.kappa + channel
    if kp == 0:
        raise StateError("channel kappa' = 0 does not exist")
    rp = relativistic_params(state, alphaZ, policy)
    g, N = rp.gamma_kappa, rp.N_nk
    gp = ctx.sqrt(kp * kp - rp.alphaZ**2)
    n = state.n
    shift = _gamma_shift(state.kappa, rp.alphaZ, policy)
    log_z, sign_z, log_zt, sign_zt, brackets = [], [], [], [], []
    for k in range(n + 1):
        # (n - k) + s (N - kappa) = s (N - c) with integer c.
        b = channel * _n_minus(state, N, shift, state.kappa - channel * (n - k))
        sb = _sign(b)
        lb = ctx.log(abs(b)) if sb else ctx.ninf
        lz = (
            -ln_gamma(k + 1, policy) - ln_gamma(n - k + 1, policy) + lb
            + ln_gamma(g + gp + k + 1, policy) - ln_gamma(k + 2 * g + 1, policy)
        )
        s = (-1) ** k * sb
        log_z.append(lz)
        sign_z.append(s)
        log_zt.append(lz + lb)
        sign_zt.append(s * sb)
        brackets.append(b)
    return ZTildeCoefficients(channel, tuple(log_z), tuple(sign_z), tuple(log_zt), tuple(sign_zt), tuple(brackets), policy)


@dataclass(frozen=True)
class ChannelResult:
    """Reduced channel quantity R (units a0/Z^2 removed) and its error estimate."""

    r_reduced: object
    error: float
    kappa_prime: int
    hyp_terms: int


def r_channel(state: QuantumState, alphaZ, channel: int, policy: PrecisionPolicy | None = None) -> ChannelResult:
    """Closed-form reduced series R for kappa' = -kappa + channel (physical R = R_reduced * a0 / Z^2)."""
    policy = resolve(policy)
    ctx = policy.ctx
    kp = -state.kappa + channel
    if kp == 0:
        raise StateError("channel kappa' = 0 does not exist")
    rp = relativistic_params(state, alphaZ, policy)
    g, N, aZ = rp.gamma_kappa, rp.N_nk, rp.alphaZ
    gp = ctx.sqrt(kp * kp - aZ**2)
    n, kappa, s = state.n, state.kappa, channel
    shift = _gamma_shift(kappa, aZ, policy)
    # d = gamma' - gamma as an integer plus a small part, so d - j stays accurate near zero.
    d_int = abs(kp) - abs(kappa)
    d_small = _gamma_shift(kp, aZ, policy) - shift

    def d_minus(j):
        return (d_int - j) + d_small

    zt = ztilde_coefficients(state, aZ, channel, policy)
    log_c = ln_gamma(n + 1, policy) + ln_gamma(n + 2 * g + 1, policy) - ln_gamma(2 * gp + 1, policy)
    c_denominator = _n_minus(state, N, shift, kappa) * d_minus(n - 1)

    # 3F2 is symmetric in (k, p): evaluate k <= p only.
    terms = []
    err = 0.0
    hyp_terms = 0
    for k in range(n + 1):
        for p in range(k, n + 1):
            sgn = zt.sign_zt[k] * zt.sign_zt[p]
            if sgn == 0:
                continue
            try:
                res = hyp3f2_unit(HypergeometricArgs(d_minus(k), d_minus(p), d_minus(n - 1), d_minus(n - 2), 2 * gp + 1), policy)
            except DiracMagError as exc:
                raise type(exc)(f"{exc} [state {state.label} kappa={kappa} n={n}, channel kappa'={kp}, alpha*Z={float(aZ):.12g}]") from exc
            hyp_terms += res.terms
            weight = ctx.exp(zt.log_zt[k] + zt.log_zt[p] + log_c) * (1 if k == p else 2)
            terms.append(sgn * weight * res.value)
            err += float(weight) * res.error
    terms.sort(key=abs, reverse=True)
    acc = CompensatedSum(policy.num(0))
    for t in terms:
        acc.add(t)
    double_sum = acc.value / c_denominator
    err = err / float(abs(c_denominator)) + policy.eps * float(acc.abs_total / abs(c_denominator)) * 4

    elementary = 2 * kappa - 4 * (n + g) * N + s * 2 * n * (n + 2 * g)
    # n + gamma - N = -(alpha Z)^2 / (n + gamma + N).
    lead = -aZ**2 / (n + g + N) if s == 1 else n + g + N
    outer = lead**2 / (16 * N * _n_minus(state, N, shift, -kp))
    bracket = elementary + double_sum
    err += policy.eps * float(abs(elementary) + abs(double_sum)) * 4
    return ChannelResult(outer * bracket, float(abs(outer)) * err, kp, hyp_terms)


def _channel_value(state, Z, alpha, channel, policy):
    pref = channel_prefactor(state, channel)
    if pref == 0:
        zero = policy.num(0)
        return zero, 0.0
    res = r_channel(state, _alpha_z(Z, alpha, policy), channel, policy)
    scale = policy.num(pref) / (8 * policy.num(Z) ** 2)
    return scale * res.r_reduced, float(abs(scale)) * res.error


def chi_p_prime_channel(state: QuantumState, Z, channel: int, alpha=None, policy: PrecisionPolicy | None = None):
    """Sturmian-channel paramagnetic part for kappa' = -kappa + channel.

    A channel whose angular prefactor vanishes exactly (decided in rationals)
    returns 0 without touching kappa' or any series.
    """
    policy = resolve(policy)
    return _channel_value(state, Z, alpha, channel, policy)[0]


@dataclass(frozen=True)
class MagnetizabilityBreakdown:
    state: QuantumState
    Z: object
    chi_d: object
    chi_p_prime_plus: object
    chi_p_prime_minus: object
    chi_p_prime: object
    chi_p_dprime: object
    chi_p: object
    chi_total: object
    accuracy_estimate: float = 0.0

    @classmethod
    def assemble(cls, state, Z, chi_d, plus, minus, dprime, accuracy_estimate=0.0):
        prime = plus + minus
        chi_p = prime + dprime
        return cls(state, Z, chi_d, plus, minus, prime, dprime, chi_p, chi_d + chi_p, accuracy_estimate)

    def ratios(self) -> dict:
        """Parts relative to the total: chi_d, chi_p', chi_p'' and chi_p over chi."""
        t = self.chi_total
        return {
            "chi_d": self.chi_d / t,
            "chi_p_prime": self.chi_p_prime / t,
            "chi_p_dprime": self.chi_p_dprime / t,
            "chi_p": self.chi_p / t,
        }


def chi_total(state: QuantumState, Z, alpha=None, policy: PrecisionPolicy | None = None) -> MagnetizabilityBreakdown:
    """Full breakdown; ``accuracy_estimate`` is an estimated relative error of chi."""
    policy = resolve(policy)
    d = chi_d(state, Z, alpha, policy)
    dd = chi_p_dprime(state, Z, alpha, policy)
    plus, e_plus = _channel_value(state, Z, alpha, 1, policy)
    minus, e_minus = _channel_value(state, Z, alpha, -1, policy)
    out = MagnetizabilityBreakdown.assemble(state, Z, d, plus, minus, dd)
    # Rounding in gamma is amplified by about |kappa| / gamma as alpha Z approaches |kappa|.
    g = relativistic_params(state, _alpha_z(Z, alpha, policy), policy).gamma_kappa
    cond = 1 + abs(state.kappa) / float(g)
    rounding = policy.eps * 32 * cond * float(abs(d) + abs(dd) + abs(plus) + abs(minus))
    acc = (e_plus + e_minus + rounding) / float(abs(out.chi_total))
    return MagnetizabilityBreakdown.assemble(state, Z, d, plus, minus, dd, acc)


def chi_p(state: QuantumState, Z, alpha=None, policy: PrecisionPolicy | None = None):
    policy = resolve(policy)
    plus, _ = _channel_value(state, Z, alpha, 1, policy)
    minus, _ = _channel_value(state, Z, alpha, -1, policy)
    return plus + minus + chi_p_dprime(state, Z, alpha, policy)


def chi_ground_closed_forms(Z, alpha=None, policy: PrecisionPolicy | None = None):
    """Specialized ground-state (1s1/2) formulas for chi_d and chi_p."""
    policy = resolve(policy)
    ctx = policy.ctx
    aZ = _alpha_z(Z, alpha, policy)
    if not aZ < 1:
        raise StateError("ground state needs alpha*Z < 1")
    g1 = ctx.sqrt(1 - aZ**2)
    g2 = ctx.sqrt(4 - aZ**2)
    z2 = policy.num(Z) ** 2
    cd = -g1 * (g1 + 1) * (2 * g1 + 1) / 12 / z2
    d1 = _gamma_shift(2, aZ, policy) - _gamma_shift(-1, aZ, policy)
    d = 1 + d1
    f = hyp3f2_unit(HypergeometricArgs(d1, d1, d, d + 1, 2 * g2 + 1), policy).value
    log_ratio = 2 * ln_gamma(g1 + g2 + 2, policy) - ln_gamma(2 * g1 + 1, policy) - ln_gamma(2 * g2 + 1, policy)
    cp = -((g1 + 1) * (2 * g1 + 1) * (g1 - 2) / 36 + ctx.exp(log_ratio) / (72 * d) * f) / z2
    return cd, cp


def _dominance(state, Z, alpha, policy):
    b = chi_total(state, Z, alpha, policy)
    return abs(b.chi_d) - abs(b.chi_p), b.accuracy_estimate * float(abs(b.chi_total))


def crossover_scan(
    state: QuantumState,
    alpha=None,
    z_range=(1, 137),
    policy: PrecisionPolicy | None = None,
    jobs: int = 1,
):
    """Smallest integer Z in ``z_range`` with |chi_d| >= |chi_p|, given |chi_p| dominates at its start.

    Returns None when |chi_p| does not dominate at the start or never yields.
    Values of |chi_d| - |chi_p| within their error estimate of zero are
    re-evaluated at 50 digits when the policy is fast binary64.
    """
    policy = resolve(policy)
    lo, hi = int(z_range[0]), int(z_range[1])
    if lo < 1 or hi < lo:
        raise DomainError(f"invalid charge range {z_range}")
    a = policy.alpha(alpha)
    if not a * hi < abs(state.kappa):
        raise StateError(f"state {state.label} does not exist up to Z = {hi}")
    zs = list(range(lo, hi + 1))

    def margin(Z):
        value, err = _dominance(state, Z, alpha, policy)
        if policy.is_fast and abs(value) <= 10 * err + 1e-10 * float(abs(value)):
            value, _ = _dominance(state, Z, alpha, PrecisionPolicy.extended())
        return value

    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            margins = list(pool.map(margin, zs))
    else:
        margins = []
        for Z in zs:
            margins.append(margin(Z))
            if margins[0] >= 0 or margins[-1] >= 0:
                break
    if margins[0] >= 0:
        return None
    found = next((Z for Z, m in zip(zs, margins) if m >= 0), None)
    if found is not None and policy.is_fast:
        # Confirm the bracketing pair at extended precision.
        ext = PrecisionPolicy.extended()
        if _dominance(state, found - 1, alpha, ext)[0] >= 0 or _dominance(state, found, alpha, ext)[0] < 0:
            return crossover_scan(state, alpha, z_range, ext, jobs)
    return found
