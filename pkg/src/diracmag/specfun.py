"""Special-function primitives.

Log-gamma, generalized Laguerre polynomials, the generalized hypergeometric
series 3F2 at unit argument and generalized Gauss-Laguerre rules.  All
routines accept working reals of the supplied :class:`PrecisionPolicy`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import DomainError, NonConvergenceError, PrecisionLossError, QuadratureError
from .precision import CompensatedSum, PrecisionPolicy, resolve

__all__ = [
    "HypergeometricArgs",
    "Hyp3F2Result",
    "QuadratureRule",
    "gauss_laguerre_rule",
    "hyp3f2_unit",
    "laguerre_coefficients",
    "laguerre_pair",
    "laguerre_poly",
    "ln_gamma",
    "pochhammer",
]


def ln_gamma(x, policy: PrecisionPolicy | None = None):
    """Return ln Gamma(x) for real x > 0."""
    policy = resolve(policy)
    if x <= 0:
        raise DomainError(f"ln_gamma needs x > 0, got {x}")
    if policy.is_fast:
        return math.lgamma(float(x))
    return policy.ctx.loggamma(policy.num(x))


def pochhammer(a, m: int):
    """Rising factorial (a)_m as a plain product; safe for negative a."""
    out = a * 0 + 1
    for i in range(m):
        out *= a + i
    return out


def laguerre_pair(n: int, beta, x):
    """Return ``(L_{n-1}^{(beta)}(x), L_n^{(beta)}(x))`` with ``L_{-1} = 0``.

    Uses the three-term forward recurrence.
    """
    if n < 0:
        raise DomainError("Laguerre degree must be >= 0")
    if beta <= -1:
        raise DomainError(f"Laguerre parameter must exceed -1, got {beta}")
    prev = x * 0
    cur = prev + 1
    for k in range(n):
        prev, cur = cur, ((2 * k + 1 + beta - x) * cur - (k + beta) * prev) / (k + 1)
    return prev, cur


def laguerre_poly(n: int, beta, x):
    """Generalized Laguerre polynomial L_n^{(beta)}(x), x >= 0."""
    if x < 0:
        raise DomainError(f"Laguerre argument must be >= 0, got {x}")
    return laguerre_pair(n, beta, x)[1]


def laguerre_coefficients(n: int, beta, policy: PrecisionPolicy | None = None):
    """Monomial coefficients c_k of L_n^{(beta)}(x) = sum_k c_k x^k.

    c_k = (-1)^k binom(n+beta, n-k) / k!.  Only sensible for small n; large
    degrees lose everything to cancellation.
    """
    policy = resolve(policy)
    if n < 0:
        return []
    beta = policy.num(beta)
    c = pochhammer(beta + 1, n) / math.factorial(n)
    coeffs = [c]
    for k in range(n):
        c = -c * (n - k) / ((k + 1) * (k + 1 + beta))
        coeffs.append(c)
    return coeffs


# --------------------------------------------------------------------------
# 3F2 at unit argument


@dataclass(frozen=True)
class HypergeometricArgs:
    """Parameters of 3F2(a1, a2, a3; b1, b2; 1)."""

    a1: object
    a2: object
    a3: object
    b1: object
    b2: object

    @property
    def numerators(self):
        return (self.a1, self.a2, self.a3)

    @property
    def denominators(self):
        return (self.b1, self.b2)

    @property
    def excess(self):
        """Convergence margin s = b1 + b2 - a1 - a2 - a3."""
        return self.b1 + self.b2 - self.a1 - self.a2 - self.a3

    @property
    def terminating_order(self) -> int | None:
        """Degree m if some a_i equals -m (m a nonnegative integer)."""
        orders = []
        for a in self.numerators:
            if a <= 0 and a == int(a):
                orders.append(int(-a))
        return min(orders) if orders else None


@dataclass(frozen=True)
class Hyp3F2Result:
    value: object
    error: float
    terms: int
    method: str

    @property
    def relative_error(self) -> float:
        v = abs(self.value)
        return float(self.error / v) if v else float("inf")


def _check_poles(args: HypergeometricArgs, length: int | None):
    for b in args.denominators:
        if b <= 0 and b == int(b) and (length is None or -b < length):
            raise DomainError(f"denominator parameter {b} hits a pole of the series")


def _richardson(checkpoints, excess):
    """Extrapolate partial sums S(J0 * 2**i) whose error is J**-excess * (c0 + c1/J + ...)."""
    table = [list(checkpoints)]
    for level in range(len(checkpoints) - 1):
        f = 2 ** (excess + level)
        prev = table[-1]
        table.append([(f * prev[i + 1] - prev[i]) / (f - 1) for i in range(len(prev) - 1)])
    best = table[-1][0]
    if len(table) < 2:
        return best, None
    return best, abs(best - table[-2][-1])


def hyp3f2_unit(args: HypergeometricArgs, policy: PrecisionPolicy | None = None) -> Hyp3F2Result:
    """Evaluate 3F2(a1, a2, a3; b1, b2; 1) by direct compensated summation.

    Terms are generated by their ratio recurrence and accumulated with
    compensation.  At geometrically spaced checkpoints J0 * 2**i the partial
    sum is tested with a geometric tail bound from the last term ratio; while
    that bound is too large, the algebraic tail (terms fall off like
    j**-(s+1)) is removed by Richardson extrapolation over the checkpoints
    with the known exponents s, s+1, ...  Summation stops once either
    estimate meets ``policy.tolerance`` relative to the value.

    Raises NonConvergenceError for s <= 0 on a non-terminating series and
    PrecisionLossError if the tolerance is not met within ``policy.term_cap``
    terms.
    """
    policy = resolve(policy)
    ctx = policy.ctx
    a1, a2, a3, b1, b2 = (policy.num(v) for v in (args.a1, args.a2, args.a3, args.b1, args.b2))
    order = args.terminating_order
    _check_poles(args, None if order is None else order + 1)
    one = policy.num(1)

    if order is not None:
        acc = CompensatedSum(one * 0)
        t = one
        for j in range(order + 1):
            acc.add(t)
            t = t * (a1 + j) * (a2 + j) * (a3 + j) / ((j + 1) * (b1 + j) * (b2 + j))
        return Hyp3F2Result(acc.value, float(policy.eps * acc.abs_total * (order + 2)), order + 1, "terminating")

    s = b1 + b2 - a1 - a2 - a3
    if s <= 0:
        raise NonConvergenceError(f"3F2 at unit argument diverges: excess s = {s} <= 0")

    tol = policy.tolerance
    biggest = max(abs(v) for v in (a1, a2, a3, b1, b2))
    j0 = 16 + 2 * int(math.ceil(float(biggest)))
    acc = CompensatedSum(one * 0)
    t = one
    j = 0
    checkpoints = []
    target = j0
    best, best_err = None, None
    while j < policy.term_cap:
        limit = min(target, policy.term_cap)
        prev_t = t
        while j < limit:
            acc.add(t)
            prev_t = t
            t = t * (a1 + j) * (a2 + j) * (a3 + j) / ((j + 1) * (b1 + j) * (b2 + j))
            j += 1
        partial = acc.value
        rounding = policy.eps * acc.abs_total * 4

        ratio = abs(t / prev_t) if prev_t else 0
        gap = 1 - ratio - one / j
        if gap > one / j:
            # Terms fall off like j**-p with p = j (1 - ratio); the tail is about |t| j / (p - 1), doubled for margin.
            tail = 2 * abs(t) / gap
            if tail + rounding <= tol * abs(partial):
                return Hyp3F2Result(partial, float(tail + rounding), j, "direct")

        checkpoints.append(partial)
        if len(checkpoints) >= 3:
            value, err = _richardson(checkpoints, s)
            err = err + rounding * 2 ** len(checkpoints)
            best, best_err = value, err
            if err <= tol * abs(value):
                return Hyp3F2Result(value, float(err), j, "richardson")
        if j >= policy.term_cap:
            break
        target *= 2

    raise PrecisionLossError(
        f"3F2{args.numerators};{args.denominators} did not reach relative tolerance "
        f"{tol:g} within {policy.term_cap} terms (best error estimate {float(best_err or 0):.3g})",
        estimate=best,
        error=best_err,
    )


# --------------------------------------------------------------------------
# Gauss-Laguerre quadrature


@dataclass(frozen=True)
class QuadratureRule:
    """Generalized Gauss-Laguerre rule for the weight x**exponent * exp(-x)."""

    nodes: tuple
    weights: tuple
    order: int
    exponent: object

    def integrate(self, g):
        """Approximate the integral of x**exponent * exp(-x) * g(x) over (0, inf)."""
        acc = CompensatedSum(self.weights[0] * 0)
        for x, w in zip(self.nodes, self.weights):
            acc.add(w * g(x))
        return acc.value


_SCALE = 1e150
_LOG_SCALE = math.log(_SCALE)


def _laguerre_top(q: int, beta, x, fast: bool):
    """Return (L_{q-1}, L_q, log_scale) with the pair rescaled to avoid overflow."""
    prev = x * 0
    cur = prev + 1
    scale = 0
    for k in range(q):
        prev, cur = cur, ((2 * k + 1 + beta - x) * cur - (k + beta) * prev) / (k + 1)
        if fast and abs(cur) > _SCALE:
            prev /= _SCALE
            cur /= _SCALE
            scale += 1
    return prev, cur, scale


def gauss_laguerre_rule(order: int, exponent, policy: PrecisionPolicy | None = None) -> QuadratureRule:
    """Generalized Gauss-Laguerre rule of the given order at working precision.

    Nodes start from the Golub-Welsch eigenvalues in binary64 and are polished
    by Newton iteration at working precision.  Weights follow from
    w_i = Gamma(q+b+1) x_i / (q! (q+b)^2 L_{q-1}(x_i)^2).
    """
    policy = resolve(policy)
    if order < 1:
        raise DomainError("quadrature order must be >= 1")
    if exponent <= -1:
        raise DomainError(f"weight exponent must exceed -1, got {exponent}")
    key = policy.num(exponent)
    return _rule_cached(order, str(key) if not policy.is_fast else repr(float(key)), policy.digits, policy.tolerance)


@lru_cache(maxsize=256)
def _rule_cached(order, exponent_text, digits, tolerance):
    policy = PrecisionPolicy(digits=digits, tolerance=tolerance)
    ctx = policy.ctx
    fast = policy.is_fast
    beta = policy.num(exponent_text)
    bf = float(beta)

    i = np.arange(order, dtype=float)
    diag = 2 * i + bf + 1
    off = np.sqrt(np.arange(1, order, dtype=float) * (np.arange(1, order, dtype=float) + bf))
    guesses = eigh_tridiagonal(diag, off, eigvals_only=True) if order > 1 else np.array([bf + 1])

    q = order
    # Quadratic convergence: once the step is below sqrt(eps) one more step reaches full precision.
    loose = 1e3 * math.sqrt(policy.eps)
    nodes, lower = [], []
    for x0 in guesses:
        x = policy.num(float(x0))
        done = False
        for _ in range(60):
            prev, cur, scale = _laguerre_top(q, beta, x, fast)
            deriv = (q * cur - (q + beta) * prev) / x
            dx = cur / deriv
            x = x - dx
            if done:
                break
            done = abs(dx) <= loose * abs(x)
        else:
            raise QuadratureError(f"Newton iteration for a Gauss-Laguerre node (order {q}) did not converge")
        nodes.append(x)
        lower.append((prev, scale))

    for a, b in zip(nodes, nodes[1:]):
        if not b > a:
            raise QuadratureError(f"Gauss-Laguerre nodes of order {q} are not strictly increasing")
    if not nodes[0] > 0:
        raise QuadratureError("Gauss-Laguerre node finding produced a nonpositive node")

    # At a root of L_q: w = Gamma(q+b+1) x / (q! (q+b)^2 L_{q-1}(x)^2).
    log_const = ln_gamma(q + beta + 1, policy) - ln_gamma(q + 1, policy)
    weights = []
    for x, (prev, scale) in zip(nodes, lower):
        if fast:
            logw = log_const + math.log(x) - 2 * (math.log(abs((q + beta) * prev)) + scale * _LOG_SCALE)
            w = math.exp(logw)
            if w == 0.0 or not math.isfinite(w):
                raise QuadratureError(
                    f"Gauss-Laguerre weights of order {q} underflow binary64; use extended precision"
                )
        else:
            w = ctx.exp(log_const + ctx.log(x) - 2 * ctx.log(abs((q + beta) * prev)))
        weights.append(w)
    return QuadratureRule(tuple(nodes), tuple(weights), q, beta)
