"""Exact second moments of the coupled walk and a brute-force enumeration oracle.

The central quantity is H(k, q) = E[W_k^2].  It satisfies the one-step
conditional-variance recursion

    H(1) = 1,  H(k+1) = (1 + 2q/k) H(k) + 1,

which is taken as the defining computation: the gamma-ratio closed form
needs a 1/Gamma(0) = 1/Gamma(-1) = 0 convention at q in {0, -1/2} and has
an unhandled pole at q = -1, so it serves only as a cross-check where its
arguments stay clear of poles.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import gammaln, gammasgn

from .coupling import encode_increment
from .group import MemoryParams, complement

ENUMERATION_MAX_STEPS = 22  # 2^n paths; cost guard


def _check_q(q: float) -> float:
    q = float(q)
    if not -1.0 <= q < 1.0:
        raise ValueError(f"q must lie in [-1, 1), got {q}")
    return q


def h_moment(k: int, q: float) -> float:
    """E[W_k^2] by the defining recursion."""
    if k < 1:
        raise ValueError("k must be at least 1")
    q = _check_q(q)
    h = 1.0
    for j in range(1, k):
        h = (1.0 + 2.0 * q / j) * h + 1.0
    return h


def h_moment_table(n: int, q: float) -> np.ndarray:
    """Array of H(k, q) for k = 1..n (index 0 unused, set to nan)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    q = _check_q(q)
    out = np.empty(n + 1)
    out[0] = np.nan
    h = 1.0
    out[1] = h
    for j in range(1, n):
        h = (1.0 + 2.0 * q / j) * h + 1.0
        out[j + 1] = h
    return out


def h_closed_form(k: int, q: float) -> float:
    """Gamma-ratio closed form for H(k, q); cross-check only.

    Returns k * (harmonic sum) at q = 1/2.  At q in {0, -1/2} the
    1/Gamma(0) = 1/Gamma(-1) = 0 convention collapses the formula to
    k/(1 - 2q).  q = -1 would need a value for 1/Gamma(-2) that the
    convention does not cover, so it is rejected; use h_moment there.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    q = _check_q(q)
    if q == 0.5:
        return k * sum(1.0 / j for j in range(1, k + 1))
    if q in (0.0, -0.5):
        if q == -0.5 and k == 1:
            # Gamma(k + 2q) = Gamma(0) collides with the Gamma(2q) pole;
            # the 1/Gamma = 0 convention does not apply to a pole ratio
            raise ValueError("closed form has a pole collision at k=1, q=-1/2")
        return k / (1.0 - 2.0 * q)
    if q == -1.0:
        raise ValueError("closed form undefined at q = -1; the recursion is definitive")
    two_q = 2.0 * q
    ratio = gammasgn(k + two_q) * gammasgn(two_q) * math.exp(
        gammaln(k + two_q) - gammaln(k + 1) - gammaln(two_q)
    )
    return k / (two_q - 1.0) * (ratio - 1.0)


def i_factor(k: int, q: float) -> float:
    """Normaliser I(k, q) = Gamma(k+1) / (Gamma(k+q) Gamma(1-q)).

    At k + q = 0 (only k = 1, q = -1) the gamma in the denominator has a
    pole and the limiting value of I is 0.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    q = _check_q(q)
    if k + q == 0.0:
        return 0.0
    if q == 0.0:
        return float(k)  # Gamma(k+1)/Gamma(k), exactly
    return math.exp(gammaln(k + 1) - gammaln(k + q) - gammaln(1.0 - q))


def i_factor_table(n: int, q: float) -> np.ndarray:
    """I(k, q) for k = 1..n (index 0 is nan)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    q = _check_q(q)
    k = np.arange(1, n + 1, dtype=float)
    if q == 0.0:
        vals = k.copy()  # Gamma(k+1)/Gamma(k), exactly
    else:
        with np.errstate(divide="ignore"):
            vals = np.exp(gammaln(k + 1) - gammaln(k + q) - gammaln(1.0 - q))
        if q == -1.0:
            vals[0] = 0.0
    out = np.empty(n + 1)
    out[0] = np.nan
    out[1:] = vals
    return out


def a_factor_table(n: int, q: float) -> np.ndarray:
    """a_k = H(k, q) I(k, q) / k^2 for k = 1..n (index 0 is nan)."""
    h = h_moment_table(n, q)
    i = i_factor_table(n, q)
    k = np.arange(0, n + 1, dtype=float)
    k[0] = np.nan
    return h * i / k**2


def cov_w(k: int, l: int, q: float) -> float:
    """E[W_k W_l]: the Pochhammer-ratio propagation of H(min, q).

    For k <= l the conditional mean of W_l given step k is W_k times the
    running product of (1 + q/i), i = k..l-1, whence
    E[W_k W_l] = [(k+q)_(l-k) / (k)_(l-k)] H(k, q).
    """
    if k < 1 or l < 1:
        raise ValueError("indices must be at least 1")
    q = _check_q(q)
    if k > l:
        k, l = l, k
    ratio = 1.0
    for i in range(k, l):
        ratio *= (i + q) / i
    return ratio * h_moment(k, q)


def var_ztilde_exact(n: int, q: float) -> float:
    """E[Ztilde_{n+1}^2] for the alternating series Ztilde of W_k/k.

    Mathematically this is

        sum_{k=1}^{n} (H(k,q)/k^2) (1 + 2 sum_{l=1}^{n-k} (-1)^l (k+q)_l/(k+1)_l),

    with all Pochhammer ratios built by running products.  The double sum
    is evaluated in a separable O(n) form: the cross terms factor through
    cumulative products e_l of (1 + q/i), so one cumulative-product and one
    prefix-sum pass suffice.  The k = 1 column is split off because its
    leading factor (1 + q) vanishes at q = -1.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    q = _check_q(q)
    h = h_moment_table(n, q)  # h[k] = H(k, q)
    k = np.arange(0, n + 1, dtype=float)
    k[0] = np.nan

    base = float(np.sum(h[1:] / k[1:] ** 2))
    if n == 1:
        return base

    # e[l] = prod_{i=2}^{l-1} (1 + q/i) for l = 2..n
    e = np.empty(n + 1)
    e[:2] = np.nan
    e[2] = 1.0
    if n >= 3:
        factors = 1.0 + q / np.arange(2, n, dtype=float)
        e[3:] = np.cumprod(factors)

    sign = np.where(np.arange(0, n + 1) % 2 == 0, 1.0, -1.0)

    # k = 1 against every later l: ratio (1+q)_l/(1+1)_l telescopes to (1+q) e_l
    l_idx = np.arange(2, n + 1)
    cross1 = float(np.sum(sign[l_idx] * -1.0 / l_idx * (1.0 + q) * e[l_idx] * h[1]))

    cross2 = 0.0
    if n >= 3:
        # u_k = (-1)^k H_k / (k e_k), prefix-summed over k = 2..l-1
        k_idx = np.arange(2, n + 1)
        u = sign[k_idx] * h[k_idx] / (k_idx * e[k_idx])
        prefix = np.cumsum(u)  # prefix[j] = sum over k = 2..(2+j)
        l_idx2 = np.arange(3, n + 1)
        cross2 = float(
            np.sum(sign[l_idx2] * e[l_idx2] / l_idx2 * prefix[l_idx2 - 3])
        )

    return base + 2.0 * (cross1 + cross2)


def _var_ztilde_double_sum(n: int, q: float) -> float:
    """Direct O(n^2) evaluation of the same double sum; small-n oracle."""
    if n < 1:
        raise ValueError("n must be at least 1")
    q = _check_q(q)
    h = h_moment_table(n, q)
    total = []
    for k in range(1, n + 1):
        inner = [1.0]
        ratio = 1.0
        for l in range(1, n - k + 1):
            ratio *= (k + q + l - 1) / (k + l)
            inner.append(2.0 * (-1.0) ** l * ratio)
        total.append(h[k] / k**2 * math.fsum(inner))
    return math.fsum(total)


def t1(n: int, q: float, tol: float = 1e-10) -> float:
    """First variance term: sum over k <= n of a_k * J1(k, q).

    At k + q = 0 (k = 1, q = -1) the factor I vanishes against a divergent
    J1; the limiting value of the product I * J1 is 1, so that term
    contributes H(k, q)/k^2.
    """
    from .quadrature import j1

    if n < 1:
        raise ValueError("n must be at least 1")
    q = _check_q(q)
    a = a_factor_table(n, q)
    h = h_moment_table(n, q)
    per_call = min(tol / max(n, 1), 1e-12)
    terms = []
    for k in range(1, n + 1):
        if k + q == 0.0:
            terms.append(h[k] / k**2)
        else:
            terms.append(a[k] * j1(k, q, tol=per_call))
    return math.fsum(terms)


def t2(n: int, q: float, tol: float = 1e-10) -> float:
    """Second variance term: J2(n, q) times the alternating sum of a_k.

    The alternating sum cancels heavily, so it is accumulated with exact
    (fsum) summation rather than a running float total.
    """
    from .quadrature import j2

    if n < 1:
        raise ValueError("n must be at least 1")
    q = _check_q(q)
    a = a_factor_table(n, q)
    signed = [(-1.0) ** (n - k) * a[k] for k in range(1, n + 1)]
    return j2(n, q, tol=tol) * math.fsum(signed)


def r_norm(n: float, p: float) -> float:
    """Scale of |W_n|: sqrt(n) below p = 3/4, sqrt(n/log n) at it, n^(2(1-p)) above."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if not 0.0 <= p < 1.0:
        raise ValueError(f"p must lie in [0, 1), got {p}")
    if p < 0.75:
        return math.sqrt(n)
    if p == 0.75:
        return math.sqrt(n / math.log(n))
    return n ** (2.0 * (1.0 - p))


@dataclass
class MomentTable:
    """Tabulated H, I, and a_k = H*I/k^2 for k = 1..n at one q."""

    q: float
    k: np.ndarray
    H: np.ndarray
    I: np.ndarray
    a: np.ndarray

    @classmethod
    def build(cls, n: int, q: float) -> "MomentTable":
        h = h_moment_table(n, q)
        i = i_factor_table(n, q)
        ks = np.arange(1, n + 1)
        a = h[1:] * i[1:] / ks.astype(float) ** 2
        return cls(q=float(q), k=ks, H=h[1:], I=i[1:], a=a)

    def csv_lines(self):
        yield "k,H,I,a_k"
        for k, h, i, a in zip(self.k, self.H, self.I, self.a):
            yield f"{k},{h:.12g},{i:.12g},{a:.12g}"


class _Kahan:
    """Compensated scalar accumulator."""

    __slots__ = ("total", "comp")

    def __init__(self):
        self.total = 0.0
        self.comp = 0.0

    def add(self, inc: float) -> None:
        y = inc - self.comp
        t = self.total + y
        self.comp = (t - self.total) - y
        self.total = t


@dataclass
class EnumerationResult:
    """Exact moments of the walk at horizon n, by full path enumeration."""

    n: int
    q: float
    prob_total: float
    e_s: float
    e_s2: float
    e_w2: float
    e_ztilde2: float
    cov_w_pairs: dict
    coupling_ok: bool
    # per-horizon arrays, index k = 1..n (index 0 unused)
    e_w2_by_step: np.ndarray = field(repr=False, default=None)
    e_s_by_step: np.ndarray = field(repr=False, default=None)
    e_s2_by_step: np.ndarray = field(repr=False, default=None)
    e_ztilde2_by_step: np.ndarray = field(repr=False, default=None)

    def to_json(self) -> str:
        payload = {
            "n": self.n,
            "q": self.q,
            "prob_total": self.prob_total,
            "E_S": self.e_s,
            "E_S2": self.e_s2,
            "E_W2": self.e_w2,
            "E_Ztilde2": self.e_ztilde2,
            "cov_W": {f"{k},{l}": v for (k, l), v in self.cov_w_pairs.items()},
            "coupling_ok": self.coupling_ok,
        }
        return json.dumps(payload, indent=2)


def enumerate_exact(
    n: int,
    params: MemoryParams,
    cov_pairs: Sequence = ((1, 2),),
) -> EnumerationResult:
    """Iterate all letter sequences of length n and accumulate exact moments.

    Path probabilities multiply the counts-form conditionals (first step
    1/2); zero-probability subtrees are pruned, which leaves the weighted
    moments untouched.  Depth-first traversal keeps memory O(n).  Along the
    way the signed location of the reduced word is compared against the
    encoded S at every step; any mismatch clears coupling_ok.
    """
    if not 1 <= n <= ENUMERATION_MAX_STEPS:
        raise ValueError(f"enumeration horizon must lie in [1, {ENUMERATION_MAX_STEPS}]")
    p = params.p
    for k, l in cov_pairs:
        if not (1 <= k <= n and 1 <= l <= n):
            raise ValueError(f"cov pair ({k},{l}) out of range for n={n}")

    prob_sum = _Kahan()
    ew2 = [_Kahan() for _ in range(n + 1)]
    es = [_Kahan() for _ in range(n + 1)]
    es2 = [_Kahan() for _ in range(n + 1)]
    ezt2 = [_Kahan() for _ in range(n + 1)]
    cov_acc = {tuple(pair): _Kahan() for pair in cov_pairs}
    w_hist = [0] * (n + 1)
    coupling_ok = True

    # stack holds (depth reached, a-count, W, S, Ztilde-partial, prob,
    #              word length, word first letter)
    stack = [(0, 0, 0, 0, 0.0, 1.0, 0, None)]
    while stack:
        depth, a_cnt, w, s, zt, prob, length, first = stack.pop()
        if depth >= 1:
            # refresh this depth's entry: a sibling subtree processed in
            # between may have overwritten it
            w_hist[depth] = w
        nxt = depth + 1
        if depth == 0:
            prob_a = 0.5
        else:
            prob_a = (p * a_cnt + (1.0 - p) * (depth - a_cnt)) / depth
        for g, pg in (("a", prob_a), ("b", 1.0 - prob_a)):
            if pg == 0.0:
                continue
            prob_g = prob * pg
            dw = 1 if g == "a" else -1
            w_g = w + dw
            s_g = s + encode_increment(nxt, g)
            if length == 0:
                len_g, first_g = 1, g
            elif first == g:
                len_g = length - 1
                first_g = None if len_g == 0 else complement(g)
            else:
                len_g, first_g = length + 1, g
            loc = 0
            if len_g > 0:
                last = first_g if len_g % 2 == 1 else complement(first_g)
                loc = len_g if last == "a" else -len_g
            if loc != s_g:
                coupling_ok = False
            zt_g = zt + (-1.0) ** nxt * w_g / nxt

            ew2[nxt].add(prob_g * w_g * w_g)
            es[nxt].add(prob_g * s_g)
            es2[nxt].add(prob_g * s_g * s_g)
            ezt2[nxt].add(prob_g * zt_g * zt_g)

            if nxt == n:
                prob_sum.add(prob_g)
                w_hist[nxt] = w_g
                for (k, l), acc in cov_acc.items():
                    acc.add(prob_g * w_hist[k] * w_hist[l])
            else:
                stack.append((nxt, a_cnt + (1 if dw > 0 else 0), w_g, s_g,
                              zt_g, prob_g, len_g, first_g))

    def _final(accs):
        arr = np.array([np.nan] + [a.total for a in accs[1:]])
        return arr

    ew2_arr = _final(ew2)
    es_arr = _final(es)
    es2_arr = _final(es2)
    ezt2_arr = _final(ezt2)
    return EnumerationResult(
        n=n,
        q=params.q,
        prob_total=prob_sum.total,
        e_s=float(es_arr[n]),
        e_s2=float(es2_arr[n]),
        e_w2=float(ew2_arr[n]),
        e_ztilde2=float(ezt2_arr[n]),
        cov_w_pairs={pair: acc.total for pair, acc in cov_acc.items()},
        coupling_ok=coupling_ok,
        e_w2_by_step=ew2_arr,
        e_s_by_step=es_arr,
        e_s2_by_step=es2_arr,
        e_ztilde2_by_step=ezt2_arr,
    )
