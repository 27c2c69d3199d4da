"""Dirac-Coulomb bound states and Sturmian functions.

Radial functions are expressed in reduced units: the radius is measured in
units of a0/Z (``rt = Z r / a0``) and functions are rescaled so that all
results depend on the product alpha*Z only.  With ``P(r) = sqrt(Z) Pt(rt)``
and ``S(r) = St(rt) / sqrt(Z)``, and a0 = 1, every physical radial integral
is a power of Z times the corresponding reduced integral.

Each :class:`RadialFunction` is stored in the dimensionless variable
``x = 2 rt / N``, where N is the apparent principal quantum number of the
host state.  Sturmians carry the host's scale, so every function attached to
one host shares the same x.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .errors import StateError
from .precision import PrecisionPolicy, resolve
from .specfun import laguerre_pair, ln_gamma

__all__ = [
    "QuantumState",
    "RadialFunction",
    "RelativisticParams",
    "RadialCoefficients",
    "SturmianIndex",
    "bound_coefficients",
    "bound_radial",
    "ijk_functions",
    "parse_state_label",
    "relativistic_params",
    "sturmian_coefficients",
    "sturmian_eigenvalue",
    "sturmian_radial",
]

_ORBITAL_LETTERS = "spdfghiklmnoqrtuvwxyz"


def _as_fraction(mu) -> Fraction:
    if isinstance(mu, Fraction):
        return mu
    if isinstance(mu, float):
        return Fraction(mu).limit_denominator(2)
    return Fraction(mu)


@dataclass(frozen=True)
class QuantumState:
    """Bound state labelled by radial number n, Dirac number kappa and projection mu."""

    n: int
    kappa: int
    mu: Fraction = Fraction(1, 2)

    def __post_init__(self):
        object.__setattr__(self, "mu", _as_fraction(self.mu))
        if int(self.n) != self.n or self.n < 0:
            raise StateError(f"radial quantum number must be a nonnegative integer, got {self.n}")
        if int(self.kappa) != self.kappa or self.kappa == 0:
            raise StateError(f"kappa must be a nonzero integer, got {self.kappa}")
        if self.mu.denominator != 2:
            raise StateError(f"mu must be half an odd integer, got {self.mu}")
        if abs(self.mu) > abs(self.kappa) - Fraction(1, 2):
            raise StateError(f"|mu| = {abs(self.mu)} exceeds j = {abs(self.kappa) - Fraction(1, 2)}")
        if self.n == 0 and self.kappa > 0:
            raise StateError("no bound state with n = 0 and kappa > 0")

    @property
    def principal(self) -> int:
        return self.n + abs(self.kappa)

    @property
    def l(self) -> int:
        return self.kappa if self.kappa > 0 else -self.kappa - 1

    @property
    def j(self) -> Fraction:
        return Fraction(2 * abs(self.kappa) - 1, 2)

    @property
    def label(self) -> str:
        j = self.j
        return f"{self.principal}{_ORBITAL_LETTERS[self.l]}{j.numerator}/{j.denominator}"


_LABEL = re.compile(r"^\s*(\d+)\s*([a-z])\s*(?:_?\{?(\d+)\s*/\s*2\}?)?\s*$", re.IGNORECASE)


def parse_state_label(label: str, mu="1/2") -> QuantumState:
    """Map a spectroscopic label such as ``"2p3/2"`` and a projection to a state.

    kappa = l for j = l - 1/2 and kappa = -(l + 1) for j = l + 1/2; the radial
    number is the principal number minus |kappa|.  The j part may be omitted
    only for s states.
    """
    m = _LABEL.match(label)
    if not m:
        raise StateError(f"malformed state label {label!r}")
    principal = int(m.group(1))
    letter = m.group(2).lower()
    l = _ORBITAL_LETTERS.find(letter)
    if l < 0:
        raise StateError(f"unknown orbital letter {letter!r} in {label!r}")
    if m.group(3) is None:
        if l != 0:
            raise StateError(f"label {label!r} needs an explicit j")
        twice_j = 1
    else:
        twice_j = int(m.group(3))
    if twice_j == 2 * l + 1:
        kappa = -(l + 1)
    elif twice_j == 2 * l - 1 and l > 0:
        kappa = l
    else:
        raise StateError(f"j = {twice_j}/2 is incompatible with l = {l} in {label!r}")
    if principal < l + 1:
        raise StateError(f"principal number {principal} must exceed l = {l}")
    mu = _as_fraction(mu)
    if abs(mu) > Fraction(twice_j, 2):
        raise StateError(f"|mu| = {abs(mu)} exceeds j = {twice_j}/2")
    return QuantumState(principal - abs(kappa), kappa, mu)


@dataclass(frozen=True)
class RelativisticParams:
    gamma_kappa: object
    N_nk: object
    eps_nk: object
    alphaZ: object


def _gamma(kappa: int, alphaZ, policy: PrecisionPolicy):
    radicand = kappa * kappa - alphaZ * alphaZ
    if not radicand > 0:
        raise StateError(f"alpha*Z = {float(alphaZ):.6g} >= |kappa| = {abs(kappa)}: no bound state")
    return policy.ctx.sqrt(radicand)


def relativistic_params(state: QuantumState, alphaZ, policy: PrecisionPolicy | None = None) -> RelativisticParams:
    """gamma = sqrt(kappa^2 - (alpha Z)^2), N = sqrt(n^2 + 2 n gamma + kappa^2), eps = (n + gamma)/N."""
    policy = resolve(policy)
    alphaZ = policy.num(alphaZ)
    if not alphaZ > 0:
        raise StateError("alpha*Z must be positive")
    g = _gamma(state.kappa, alphaZ, policy)
    n = state.n
    N = policy.ctx.sqrt(n * n + 2 * n * g + state.kappa**2)
    return RelativisticParams(g, N, (n + g) / N, alphaZ)


@dataclass(frozen=True)
class SturmianIndex:
    """Sturmian label (n', kappa') with the signed apparent principal number."""

    n_prime: int
    kappa_prime: int

    def __post_init__(self):
        if int(self.kappa_prime) != self.kappa_prime or self.kappa_prime == 0:
            raise StateError(f"kappa' must be a nonzero integer, got {self.kappa_prime}")
        if int(self.n_prime) != self.n_prime:
            raise StateError(f"n' must be an integer, got {self.n_prime}")

    @property
    def m(self) -> int:
        return abs(self.n_prime)

    @property
    def sign(self) -> int:
        """Sign of N_{n'kappa'}: that of n', or -sign(kappa') when n' = 0."""
        if self.n_prime > 0:
            return 1
        if self.n_prime < 0:
            return -1
        return 1 if self.kappa_prime < 0 else -1

    def gamma(self, alphaZ, policy: PrecisionPolicy | None = None):
        policy = resolve(policy)
        return _gamma(self.kappa_prime, policy.num(alphaZ), policy)

    def apparent_N(self, alphaZ, policy: PrecisionPolicy | None = None):
        policy = resolve(policy)
        g = self.gamma(alphaZ, policy)
        m = self.m
        return self.sign * policy.ctx.sqrt(m * m + 2 * m * g + self.kappa_prime**2)


@dataclass(frozen=True)
class RadialTerm:
    """coef * x**power * exp(-x/2) * sum_j c_j L_{d_j}^{(beta)}(x)."""

    coef: object
    power: object
    beta: object
    laguerre: tuple


@dataclass(frozen=True)
class RadialFunction:
    """Reduced radial function held as a finite sum of Laguerre terms in x = 2 rt / N.

    ``jacobian`` is d rt / dx = N / 2 of the host state.
    """

    kind: str
    terms: tuple
    jacobian: object
    policy: PrecisionPolicy
    label: str = ""

    @property
    def leading_power(self):
        return min((t.power for t in self.terms), key=float)

    @property
    def max_degree(self) -> int:
        return max((d for t in self.terms for _, d in t.laguerre), default=0)

    def shape(self, x):
        """f(x) / (x**leading_power * exp(-x/2)); a polynomial when powers differ by integers."""
        p0 = self.leading_power
        total = x * 0
        for t in self.terms:
            total += t.coef * self._laguerre_sum(t, x) * (x ** (t.power - p0) if t.power != p0 else 1)
        return total

    def _laguerre_sum(self, term, x):
        top = max(d for _, d in term.laguerre)
        values = {}
        prev, cur = laguerre_pair(top, term.beta, x)
        values[top] = cur
        values[top - 1] = prev
        acc = x * 0
        for c, d in term.laguerre:
            if d not in values:
                values[d] = laguerre_pair(d, term.beta, x)[1]
            acc += c * values[d]
        return acc

    def __call__(self, x):
        """Value at x = 2 rt / N."""
        x = self.policy.num(x)
        if x == 0:
            return x * 0 if float(self.leading_power) > 0 else self.shape(x)
        ctx = self.policy.ctx
        return ctx.exp(self.leading_power * ctx.log(x) - x / 2) * self.shape(x)

    def at_r(self, rt):
        """Value at reduced radius rt = Z r / a0."""
        return self(self.policy.num(rt) / self.jacobian)

    def scaled(self, factor, kind=None) -> RadialFunction:
        terms = tuple(RadialTerm(t.coef * factor, t.power, t.beta, t.laguerre) for t in self.terms)
        return RadialFunction(kind or self.kind, terms, self.jacobian, self.policy, self.label)

    def times_x(self, factor=1) -> RadialFunction:
        terms = tuple(RadialTerm(t.coef * factor, t.power + 1, t.beta, t.laguerre) for t in self.terms)
        return RadialFunction(self.kind, terms, self.jacobian, self.policy, self.label)

    def plus(self, other: RadialFunction, kind: str) -> RadialFunction:
        if other.jacobian != self.jacobian:
            raise ValueError("cannot add radial functions on different x scales")
        return RadialFunction(kind, self.terms + other.terms, self.jacobian, self.policy, self.label)


@dataclass(frozen=True)
class RadialCoefficients:
    """Scalars of a radial pair: upper = norm_upper x^gamma e^{-x/2} [L_{m-1} + ratio L_m], lower with -ratio.

    Laguerre parameter is 2 gamma; ``N`` is the (signed) apparent principal number of the pair.
    """

    norm_upper: object
    norm_lower: object
    ratio: object
    gamma: object
    N: object
    m: int

    def laguerre_upper(self):
        return ((1, self.m - 1), (self.ratio, self.m)) if self.m > 0 else ((self.ratio, 0),)

    def laguerre_lower(self):
        return ((1, self.m - 1), (-self.ratio, self.m)) if self.m > 0 else ((-self.ratio, 0),)


def bound_coefficients(state: QuantumState, rp: RelativisticParams, policy: PrecisionPolicy | None = None):
    """Scalars of the bound pair: P = norm_upper x^gamma e^{-x/2} [L_{n-1} + ratio L_n], Q likewise with -ratio."""
    policy = resolve(policy)
    ctx = policy.ctx
    g, N, eps = rp.gamma_kappa, rp.N_nk, rp.eps_nk
    n, kappa = state.n, state.kappa
    common = (
        ctx.log(n + 2 * g) + ln_gamma(n + 1, policy) - 2 * ctx.log(N) - ctx.log(N - kappa)
        - ln_gamma(n + 2 * g, policy) - ctx.log(2)
    )
    return RadialCoefficients(
        ctx.exp((common + ctx.log(1 + eps)) / 2),
        ctx.exp((common + ctx.log(1 - eps)) / 2),
        (kappa - N) / (n + 2 * g),
        g,
        N,
        n,
    )


def bound_radial(state: QuantumState, alphaZ, policy: PrecisionPolicy | None = None):
    """Reduced large and small components (P, Q), normalized so that the integral of P^2 + Q^2 over rt is 1."""
    policy = resolve(policy)
    rp = relativistic_params(state, alphaZ, policy)
    c = bound_coefficients(state, rp, policy)
    return _radial_pair(c, ("P", "Q"), rp.N_nk / 2, policy, state.label)


def sturmian_coefficients(index: SturmianIndex, host_params: RelativisticParams, policy: PrecisionPolicy | None = None):
    """Scalars of the Sturmian pair (S, T) for ``index`` on the host energy shell."""
    policy = resolve(policy)
    ctx = policy.ctx
    eps, N, aZ = host_params.eps_nk, host_params.N_nk, host_params.alphaZ
    gp = index.gamma(aZ, policy)
    Np = index.apparent_N(aZ, policy)
    m, kp = index.m, index.kappa_prime
    common = (
        ctx.log(N) + ctx.log(m + 2 * gp) + ln_gamma(m + 1, policy) - ctx.log(2)
        - ctx.log(Np * (Np - kp)) - ln_gamma(m + 2 * gp, policy)
    )
    return RadialCoefficients(
        ctx.exp((common + ctx.log(1 + eps)) / 2),
        ctx.exp((common + ctx.log(1 - eps)) / 2),
        (kp - Np) / (m + 2 * gp),
        gp,
        Np,
        m,
    )


def _radial_pair(c: RadialCoefficients, kinds, jac, policy, label):
    upper = RadialTerm(c.norm_upper, c.gamma, 2 * c.gamma, c.laguerre_upper())
    lower = RadialTerm(c.norm_lower, c.gamma, 2 * c.gamma, c.laguerre_lower())
    return (
        RadialFunction(kinds[0], (upper,), jac, policy, label),
        RadialFunction(kinds[1], (lower,), jac, policy, label),
    )


def sturmian_radial(index: SturmianIndex, host: QuantumState, alphaZ, policy: PrecisionPolicy | None = None):
    """Reduced Sturmian pair (S, T) on the host state's energy shell."""
    policy = resolve(policy)
    rp = relativistic_params(host, alphaZ, policy)
    c = sturmian_coefficients(index, rp, policy)
    return _radial_pair(c, ("S", "T"), rp.N_nk / 2, policy, f"({index.n_prime},{index.kappa_prime})")


def sturmian_eigenvalue(index: SturmianIndex, host: QuantumState, alphaZ, policy: PrecisionPolicy | None = None):
    """mu_{n'kappa'} = (|n'| + gamma' + N') / (n + gamma + N) with signed N'."""
    policy = resolve(policy)
    rp = relativistic_params(host, alphaZ, policy)
    gp = index.gamma(rp.alphaZ, policy)
    Np = index.apparent_N(rp.alphaZ, policy)
    return (index.m + gp + Np) / (host.n + rp.gamma_kappa + rp.N_nk)


def ijk_functions(host: QuantumState, alphaZ, policy: PrecisionPolicy | None = None):
    """Auxiliary functions I, J, K of the host's own Sturmian pair.

    In reduced units the factor r m c / hbar becomes rt / (alpha Z), and
    rt = N x / 2.
    """
    policy = resolve(policy)
    rp = relativistic_params(host, alphaZ, policy)
    eps, N, aZ = rp.eps_nk, rp.N_nk, rp.alphaZ
    kappa = host.kappa
    S, T = sturmian_radial(SturmianIndex(host.n, kappa), host, aZ, policy)
    half = 1 / (2 * eps)
    t_lin = eps * (1 + eps) * N / (2 * aZ)
    s_lin = eps * (1 - eps) * N / (2 * aZ)
    t_const = eps * aZ
    I = S.scaled(-eps * (kappa + half)).plus(T.times_x(t_lin), "I").plus(T.scaled(t_const), "I")
    J = S.scaled(-eps * (kappa - half)).plus(T.times_x(t_lin), "J").plus(T.scaled(t_const), "J")
    K = S.times_x(s_lin).plus(S.scaled(-eps * aZ), "K").plus(T.scaled(eps * (kappa + half)), "K")
    return I, J, K
