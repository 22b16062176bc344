"""Exact symmetric-function and symmetric-group character machinery.

Partitions are plain tuples of weakly decreasing positive integers.  The
module provides lexicographic partition enumeration, Schur and power-sum
evaluation (with confluent divided-difference handling of repeated
arguments), Murnaghan-Nakayama characters in exact integer arithmetic,
hook-length dimensions, character ratios at a transposition, and the exact
finite-n expectation of loop observables for the theta^{#loops} interchange
measure via its character expansion.

The character expansion uses the fact that composing a Poisson(lambda)
number of uniform random transpositions multiplies E[chi(sigma)]/dim by
exp(lambda (r - 1)) per step, where r is the character ratio at a
transposition; summing over shapes with Schur coefficients turns products
of cycle observables into a ratio of explicit finite sums.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import permutations as _permutations

import numpy as np

from . import pd as _pd

__all__ = [
    "partitions",
    "schur_eval",
    "schur_eval_exact",
    "schur_at_ones",
    "power_sum_eval",
    "CharacterValue",
    "character",
    "dimension",
    "transposition_ratio",
    "interchange_expectation_exact",
    "schur_ratio_limit_check",
    "SchurLimitReport",
]


def partitions(n: int, max_length: int | None = None):
    """Yield partitions of n as weakly decreasing tuples, lexicographically.

    max_length restricts the number of parts; partitions(0) yields ().
    """
    if n < 0:
        raise ValueError("partitions of negative integers do not exist")

    def _gen(remaining: int, largest: int, slots: int):
        if remaining == 0:
            yield ()
            return
        if slots == 0:
            return
        for first in range(min(remaining, largest), 0, -1):
            for rest in _gen(remaining - first, first, slots - 1):
                yield (first,) + rest

    slots = n if max_length is None else min(max_length, n)
    yield from _gen(n, n, slots)


# ---------------------------------------------------------------------------
# Schur / power-sum evaluation
# ---------------------------------------------------------------------------

def _cluster(values, tol: float):
    """Group indices whose values lie within tol of each other (union-find).

    Returns a list of (representative_value, multiplicity) in input order of
    first appearance; representatives are cluster means.
    """
    vals = list(values)
    k = len(vals)
    parent = list(range(k))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i in range(k):
        for j in range(i + 1, k):
            if abs(vals[i] - vals[j]) < tol:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[rj] = ri
    groups: dict[int, list[int]] = {}
    for i in range(k):
        groups.setdefault(find(i), []).append(i)
    out = []
    for root in sorted(groups, key=lambda r: min(groups[r])):
        members = groups[root]
        rep = sum(vals[i] for i in members) / len(members)
        out.append((rep, len(members)))
    return out


def schur_at_ones(lam, r: int) -> Fraction:
    """s_lambda(1, ..., 1) with r ones: prod_{i<j} (lam_i - i - lam_j + j)/(j - i)."""
    lam = tuple(lam)
    if len(lam) > r:
        return Fraction(0)
    full = lam + (0,) * (r - len(lam))
    val = Fraction(1)
    for i in range(r):
        for j in range(i + 1, r):
            val *= Fraction(full[i] - (i + 1) - full[j] + (j + 1), (j + 1) - (i + 1))
    return val


def schur_eval(lam, xs, merge_tol: float = 1e-6) -> complex:
    """Schur polynomial s_lambda(x_1, ..., x_r) by the bialternant ratio.

    Well-separated arguments use det[x_i^{lam_j + r - j}] over the
    Vandermonde; arguments closer than merge_tol are merged into clusters
    evaluated with derivative rows (confluent divided differences), which is
    where the raw ratio would lose all precision to 0/0.
    """
    lam = tuple(lam)
    xs = list(xs)
    r = len(xs)
    if any(lam[i] < lam[i + 1] for i in range(len(lam) - 1)) or any(p < 1 for p in lam):
        raise ValueError("lam must be a weakly decreasing tuple of positive parts")
    if len(lam) > r:
        warnings.warn("Schur polynomial vanishes when l(lam) > #variables", stacklevel=2)
        return 0.0
    exps = [lam[j] + r - j - 1 if j < len(lam) else r - j - 1 for j in range(r)]
    clusters = _cluster(xs, merge_tol)
    mat = np.zeros((r, r), dtype=complex)
    row = 0
    sign = 1.0
    denom = 1.0 + 0.0j
    reps = [c[0] for c in clusters]
    for a, (xa, ma) in enumerate(clusters):
        sign *= (-1.0) ** (ma * (ma - 1) // 2)
        for b in range(a + 1, len(clusters)):
            denom *= (xa - reps[b]) ** (ma * clusters[b][1])
        for d in range(ma):
            for col, e in enumerate(exps):
                if d > e:
                    mat[row, col] = 0.0
                else:
                    mat[row, col] = math.comb(e, d) * xa ** (e - d)
            row += 1
    det = np.linalg.det(mat)
    val = sign * det / denom
    if all(isinstance(x, (int, float)) for x in xs):
        return float(val.real)
    return val


def schur_eval_exact(lam, xs) -> Fraction:
    """Exact rational Schur value for distinct exact (int/Fraction) arguments.

    Leibniz expansion of the bialternant; intended for small variable counts
    in exactness tests.
    """
    lam = tuple(lam)
    xs = [Fraction(x) for x in xs]
    r = len(xs)
    if len(set(xs)) != r:
        raise ValueError("schur_eval_exact needs distinct arguments")
    if len(lam) > r:
        return Fraction(0)
    exps = [lam[j] + r - j - 1 if j < len(lam) else r - j - 1 for j in range(r)]
    det = Fraction(0)
    for perm in _permutations(range(r)):
        inversions = sum(
            1 for i in range(r) for j in range(i + 1, r) if perm[i] > perm[j]
        )
        term = Fraction((-1) ** inversions)
        for i in range(r):
            term *= xs[i] ** exps[perm[i]]
        det += term
    vand = Fraction(1)
    for i in range(r):
        for j in range(i + 1, r):
            vand *= xs[i] - xs[j]
    return det / vand


def power_sum_eval(mu, xs) -> complex:
    """p_mu(x) = prod_j sum_i x_i^{mu_j}."""
    val = 1.0 + 0.0j
    for part in mu:
        val *= sum(x**part for x in xs)
    if all(isinstance(x, (int, float)) for x in xs):
        return float(val.real)
    return val


# ---------------------------------------------------------------------------
# Characters
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CharacterValue:
    lam: tuple
    mu: tuple
    value: int


def _beta_numbers(lam: tuple, length: int) -> tuple:
    """First-column hook lengths lam_i + (length - i), a strictly decreasing set."""
    full = lam + (0,) * (length - len(lam))
    return tuple(full[i] + (length - 1 - i) for i in range(length))


@lru_cache(maxsize=None)
def _mn_character(lam: tuple, mu: tuple) -> int:
    """Murnaghan-Nakayama recursion over border strips, exact integers."""
    if not mu:
        return 1 if not lam else 0
    k = mu[0]
    rest = mu[1:]
    length = max(len(lam), 1)
    betas = list(_beta_numbers(lam, length))
    beta_set = set(betas)
    total = 0
    for i, b in enumerate(betas):
        nb = b - k
        if nb < 0 or nb in beta_set:
            continue
        height = sum(1 for c in betas if nb < c < b)
        new = sorted([c for c in betas if c != b] + [nb], reverse=True)
        # convert beta numbers back to a partition
        new_lam = tuple(
            v - (length - 1 - idx) for idx, v in enumerate(new)
        )
        new_lam = tuple(p for p in new_lam if p > 0)
        total += (-1) ** height * _mn_character(new_lam, rest)
    return total


def character(lam, mu) -> CharacterValue:
    """Irreducible character chi_lambda evaluated on cycle type mu (exact)."""
    lam = tuple(lam)
    mu = tuple(sorted(mu, reverse=True))
    if sum(lam) != sum(mu):
        raise ValueError("lam and mu must partition the same integer")
    return CharacterValue(lam, mu, _mn_character(lam, mu))


def dimension(lam) -> int:
    """Dimension of the irreducible representation: hook length formula."""
    lam = tuple(lam)
    n = sum(lam)
    if n == 0:
        return 1
    conj = [0] * lam[0]
    for part in lam:
        for j in range(part):
            conj[j] += 1
    hooks = 1
    for i, part in enumerate(lam):
        for j in range(part):
            hooks *= part - j + conj[j] - i - 1
    return math.factorial(n) // hooks


def transposition_ratio(lam) -> Fraction:
    """Character ratio chi_lambda((1,2)) / dim at a transposition.

    Equals the content sum of the diagram divided by binom(n, 2); the
    identity is cross-checked against the Murnaghan-Nakayama value in tests.
    """
    lam = tuple(lam)
    n = sum(lam)
    if n < 2:
        raise ValueError("the transposition ratio needs n >= 2")
    content = 0
    for i, part in enumerate(lam):
        # sum of (j - i) over cells (i, j), zero-based
        content += part * (part - 1) // 2 - i * part
    return Fraction(content, math.comb(n, 2))


# ---------------------------------------------------------------------------
# Interchange expectation and the Schur ratio limit
# ---------------------------------------------------------------------------

def interchange_expectation_exact(n: int, theta: int, beta: float, hvec) -> complex:
    """Exact E[prod_i q_h(l_i / n)] under the theta^{#loops} interchange measure.

    Expands the cycle observable in irreducible characters: for each shape
    lambda with at most theta rows the Poissonized transposition walk gives
    E[chi_lambda] = dim_lambda exp((beta/n) binom(n,2) (r(lambda) - 1)), so

        value = sum_lam s_lam(e^{h/n}) w_lam / sum_lam s_lam(1,...,1) w_lam.

    Shape weights are combined in log space before exponentiating.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if theta < 1:
        raise ValueError("theta must be >= 1")
    hv = list(hvec)
    if len(hv) != theta:
        raise ValueError(f"hvec must have length theta = {theta}")
    is_complex = any(isinstance(h, complex) for h in hv)
    args = [np.exp(np.asarray(h) / n) for h in hv]
    log_w = []
    s_h = []
    s_1 = []
    for lam in partitions(n, theta):
        d = dimension(lam)
        r = transposition_ratio(lam) if n >= 2 else Fraction(1)
        log_w.append(math.log(d) + (beta / n) * math.comb(n, 2) * (float(r) - 1.0))
        s_h.append(schur_eval(lam, args))
        s_1.append(float(schur_at_ones(lam, theta)))
    log_w = np.array(log_w)
    top = log_w.max()
    w = np.exp(log_w - top)
    numer = np.dot(w, np.array(s_h))
    denom = np.dot(w, np.array(s_1))
    value = numer / denom
    if not is_complex:
        return float(np.real(value))
    return complex(value)


@dataclass
class SchurLimitReport:
    rows: list[tuple[int, complex, float]]  # (n, ratio, |ratio - target|)
    target: complex


def schur_ratio_limit_check(lambdas, hvec, x=None) -> SchurLimitReport:
    """Track s_lam(e^{h/n}) / s_lam(1,..,1) along a shape sequence.

    For shapes lambda with lambda/n -> x the ratio converges to the
    determinant function R(h; x); the report lists the distance per shape.
    The target x (weakly decreasing, summing to 1) defaults to the rescaled
    last shape.
    """
    lambdas = [tuple(l) for l in lambdas]
    hv = list(hvec)
    theta = len(hv)
    if x is None:
        last = lambdas[-1]
        n_last = sum(last)
        x = [last[i] / n_last if i < len(last) else 0.0 for i in range(theta)]
    x = list(x)
    if any(x[i] < x[i + 1] - 1e-12 for i in range(len(x) - 1)):
        raise ValueError("target x must be weakly decreasing")
    if abs(sum(x) - 1.0) > 1e-9:
        raise ValueError("target x must sum to 1")
    target = _pd.r_function(hv, x)
    rows = []
    for lam in lambdas:
        n = sum(lam)
        args = [np.exp(np.asarray(h) / n) for h in hv]
        num = schur_eval(lam, args)
        den = float(schur_at_ones(lam, theta))
        ratio = num / den
        rows.append((n, ratio, abs(ratio - target)))
    return SchurLimitReport(rows, target)
