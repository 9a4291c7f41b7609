"""Tanh-sinh quadrature on (0, 1) and the limiting-variance integrals.

Every integral in this package lives on the open unit interval with at
worst an integrable algebraic or logarithmic singularity at an endpoint,
which is exactly the situation the double-exponential (tanh-sinh) node
transform handles: nodes cluster towards the endpoints double-exponentially
and no node ever lands on 0 or 1.

Integrands receive both u and 1-u.  The node map computes the two
coordinates separately through exp, so each is accurate in its own scale
even when the other has rounded to 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from scipy.special import gammaln

DEFAULT_TOL = 1e-10
MAX_EVALUATIONS = 2_000_000
_T_MAX = 6.0  # exp(pi*sinh(6)) stays inside double range
_MAX_LEVEL = 12


class QuadratureError(RuntimeError):
    """Raised when an integral cannot be resolved to the requested tolerance."""


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    abs_err_estimate: float
    evaluations: int


def _node(t: float):
    """Map t on the real line to (u, 1-u, weight) on (0, 1).

    u(t) = (1 + tanh((pi/2) sinh t)) / 2.  Writing x = (pi/2) sinh t,
    u = 1/(1 + e^(-2x)) and 1-u = e^(-2x)/(1 + e^(-2x)); each side is
    computed through the exponential that stays below 1, and the weight
    du/dt = pi cosh(t) u (1-u) inherits that stability.
    """
    x = 0.5 * math.pi * math.sinh(t)
    if x >= 0.0:
        em = math.exp(-2.0 * x)
        u = 1.0 / (1.0 + em)
        um1 = em / (1.0 + em)
    else:
        ep = math.exp(2.0 * x)
        u = ep / (1.0 + ep)
        um1 = 1.0 / (1.0 + ep)
    w = math.pi * math.cosh(t) * u * um1
    return u, um1, w


def integrate(
    f: Callable[[float, float], float],
    tol: float = DEFAULT_TOL,
    max_evals: int = MAX_EVALUATIONS,
) -> QuadratureResult:
    """Integrate f over (0, 1) with tanh-sinh level refinement.

    The integrand is called as f(u, one_minus_u) and is never evaluated at
    the endpoints.  Levels halve the mesh in the transformed variable and
    reuse previous nodes; the error estimate is the difference between the
    last two levels.  Failure to converge raises, it is never silent.
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")

    evals = 0

    def call(t: float) -> float:
        nonlocal evals
        u, um1, w = _node(t)
        if w == 0.0 or u <= 0.0 or um1 <= 0.0:
            return 0.0
        evals += 1
        if evals > max_evals:
            raise QuadratureError(
                f"evaluation budget {max_evals} exhausted before tolerance {tol}"
            )
        val = w * f(u, um1)
        if math.isnan(val) or math.isinf(val):
            raise QuadratureError(f"integrand not finite at u={u!r}")
        return val

    h = 1.0
    total = call(0.0)
    j = 1
    while j * h <= _T_MAX:
        total += call(j * h) + call(-j * h)
        j += 1
    value = h * total
    prev = value
    err = math.inf

    for _ in range(1, _MAX_LEVEL + 1):
        h *= 0.5
        odd_sum = 0.0
        j = 1
        while j * h <= _T_MAX:
            odd_sum += call(j * h) + call(-j * h)
            j += 2
        value = 0.5 * prev + h * odd_sum
        err = abs(value - prev)
        prev = value
        if err <= tol:
            return QuadratureResult(value=value, abs_err_estimate=err, evaluations=evals)

    raise QuadratureError(
        f"no convergence to tol={tol} after {_MAX_LEVEL} refinement levels "
        f"(last level difference {err:.3e})"
    )


def phi_integrand(q: float, u: float, um1: float = None) -> float:
    """Integrand of the limiting Ztilde variance at memory parameter q.

    General branch (q != 1/2):
        (1/(2q-1)) * (u^(1-2q) - 1)/(1 - u) * ((1 - u/2)^(q-1) - 1)/u
    Log branch (q = 1/2):
        (-ln u)/(1 - u) * ((1 - u/2)^(-1/2) - 1)/u

    Both difference quotients are formed with expm1/log1p so the 0/0
    shapes at the endpoints cancel without a series switch; the limits are
    (q-1)/(2(2q-1)) at u = 0 (for q < 1/2) and 2^(1-q) - 1 at u = 1.
    """
    if not -1.0 <= q < 1.0:
        raise ValueError(f"q must lie in [-1, 1), got {q}")
    if um1 is None:
        um1 = 1.0 - u
    # u and um1 are validated separately: near an endpoint one of them may
    # round to 1.0 while the other still resolves the distance to it
    if not (0.0 < u <= 1.0 and 0.0 < um1 <= 1.0):
        raise ValueError(f"u must lie strictly inside (0, 1), got {u}")

    log_u = math.log1p(-um1) if u > 0.5 else math.log(u)
    second = math.expm1((q - 1.0) * math.log1p(-0.5 * u)) / u
    if q == 0.5:
        first = -log_u / um1
        return first * second
    first = math.expm1((1.0 - 2.0 * q) * log_u) / um1
    return first * second / (2.0 * q - 1.0)


def var_ztilde_infinity_result(q: float, tol: float = DEFAULT_TOL) -> QuadratureResult:
    """Limit variance of the alternating series Ztilde, with error estimate."""
    if not -1.0 <= q < 1.0:
        raise ValueError(f"q must lie in [-1, 1), got {q}")
    return integrate(lambda u, um1: phi_integrand(q, u, um1), tol=tol)


def var_ztilde_infinity(q: float, tol: float = DEFAULT_TOL) -> float:
    return var_ztilde_infinity_result(q, tol).value


def var_z_infinity(q: float, tol: float = DEFAULT_TOL) -> float:
    """Limit variance of the predictable part Z = q * Ztilde: q^2 times the integral."""
    if q == 0.0:
        return 0.0
    return q * q * var_ztilde_infinity(q, tol)


def j1(k: int, q: float, tol: float = DEFAULT_TOL) -> float:
    """Integral of u^(k+q-1) (1-u)^(1-q) / (1+u) over (0, 1)."""
    if k < 1:
        raise ValueError("k must be at least 1")
    if not -1.0 <= q < 1.0:
        raise ValueError(f"q must lie in [-1, 1), got {q}")
    if k + q <= 0.0:
        raise ValueError(f"need k + q > 0, got k={k}, q={q}")
    kq = k + q - 1.0
    oq = 1.0 - q

    def f(u, um1):
        log_u = math.log1p(-um1) if u > 0.5 else math.log(u)
        return math.exp(kq * log_u + oq * math.log(um1)) / (1.0 + u)

    return integrate(f, tol=tol).value


def j2(n: int, q: float, tol: float = DEFAULT_TOL) -> float:
    """Integral of u^(n+q) (1-u)^(-q) / (1+u) over (0, 1).

    Bounded by the Euler beta function B(n+q+1, 1-q); see beta_bound.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if not -1.0 <= q < 1.0:
        raise ValueError(f"q must lie in [-1, 1), got {q}")
    nq = n + q

    def f(u, um1):
        log_u = math.log1p(-um1) if u > 0.5 else math.log(u)
        return math.exp(nq * log_u - q * math.log(um1)) / (1.0 + u)

    return integrate(f, tol=tol).value


def beta_bound(n: int, q: float) -> float:
    """B(n+q+1, 1-q) via log-gamma: the envelope of J2."""
    return math.exp(gammaln(n + q + 1.0) + gammaln(1.0 - q) - gammaln(n + 2.0))


def gauss_2f1(a: float, b: float, c: float, z: float, tol: float = 1e-15) -> float:
    """Gauss hypergeometric series 2F1(a, b; c; z) for |z| < 1 plus z = -1.

    Negative arguments are routed through the Pfaff transformation
    2F1(a, b; c; z) = (1-z)^(-a) 2F1(a, c-b; c; z/(z-1)), which maps
    z in [-1, 0) to [1/2, 0) and turns the marginally convergent
    alternating series at z = -1 into a geometrically convergent one.
    """
    if c <= 0.0 and c == int(c):
        raise ValueError(f"c must not be a nonpositive integer, got {c}")
    if not (-1.0 <= z < 1.0):
        raise ValueError(f"need -1 <= z < 1, got {z}")
    if z < 0.0:
        return (1.0 - z) ** (-a) * _hyp_series(a, c - b, c, z / (z - 1.0), tol)
    return _hyp_series(a, b, c, z, tol)


def _hyp_series(a: float, b: float, c: float, z: float, tol: float) -> float:
    total = 1.0
    term = 1.0
    for n in range(10_000):
        term *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z
        total += term
        if abs(term) <= tol * max(1.0, abs(total)):
            return total
    raise QuadratureError(f"hypergeometric series did not converge at z={z}")


@dataclass(frozen=True)
class FigureRow:
    q: float
    var_z_infinity: float
    abs_err: float
    ok: bool = True


FIGURE_CSV_HEADER = "q,var_Z_infinity,abs_err"


def figure_grid(q_min: float, q_max: float, step: float, tol: float = DEFAULT_TOL):
    """Rows (q, limit variance of Z, abs error) over a q grid.

    Grid points are snapped to 12 decimals so accumulated float drift
    cannot miss exact values such as q = 0 or the q = 1/2 branch point.
    Per-point quadrature failures are flagged on the row, not raised.
    """
    if step <= 0.0:
        raise ValueError("step must be positive")
    if q_min < -1.0 or q_max > 0.99:
        raise ValueError("grid must stay within [-1, 0.99]")
    if q_max < q_min:
        raise ValueError("empty grid")
    rows = []
    count = int(round((q_max - q_min) / step))
    for i in range(count + 1):
        qv = round(q_min + i * step, 12)
        if qv > q_max + 1e-12:
            break
        try:
            if qv == 0.0:
                rows.append(FigureRow(q=0.0, var_z_infinity=0.0, abs_err=0.0))
            else:
                res = var_ztilde_infinity_result(qv, tol)
                rows.append(
                    FigureRow(
                        q=qv,
                        var_z_infinity=qv * qv * res.value,
                        abs_err=qv * qv * res.abs_err_estimate,
                    )
                )
        except QuadratureError:
            rows.append(
                FigureRow(q=qv, var_z_infinity=math.nan, abs_err=math.inf, ok=False)
            )
    return rows


def figure_csv_lines(rows):
    yield FIGURE_CSV_HEADER
    for r in rows:
        yield f"{r.q:.12g},{r.var_z_infinity:.12g},{r.abs_err:.12g}"
