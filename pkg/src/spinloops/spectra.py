"""Exact finite-n computations for mean-field quantum spin models.

Two independent engines evaluate the generating function
Tr(e^{(h/n) Sigma1} e^{-beta H}) / Tr(e^{-beta H}) for the spin-S model whose
Hamiltonian, written with total-spin operators Sigma = sum_i S_i, is

    H = -(1/n) Sigma.Sigma + (1-Delta)/n (Sigma3)^2.

For Delta = 1 (and for any Delta at S = 1/2) this agrees with the pairwise
Heisenberg Hamiltonian -(2/n) sum_{i<j} (S_i1 S_j1 + S_i2 S_j2 + Delta S_i3 S_j3)
up to additive constants that cancel in the Gibbs ratio.

Engine 1 (heisenberg_expectation_exact) decomposes the Hilbert space into
total-spin sectors: multiplicities L_{M,n} come from an exact integer
convolution, sector degeneracies are d_J = L_J - L_{J+1}, and within a sector
Sigma1 is the standard tridiagonal ladder matrix.  Engine 2
(dense_gibbs_oracle) builds everything as dense Kronecker-product matrices
and eigendecomposes; it knows nothing about angular momentum sectors.

Half-integers are carried as doubled integers (2M, 2J, 2S) throughout; all
sector sums share a common subtracted maximum exponent so that e^{beta n}
scales never overflow.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy.linalg import eigh_tridiagonal

__all__ = [
    "CapExceededError",
    "MultiplicityTable",
    "IrrepSpectrum",
    "GibbsValue",
    "FalkBruchResult",
    "multiplicity_table",
    "log_multiplicity_row",
    "irrep_spectrum",
    "heisenberg_expectation_exact",
    "dense_gibbs_oracle",
    "falk_bruch_check",
]

EXACT_CAP = 10_000  # largest n * two_s for the exact big-integer table
DENSE_CAP = 6561    # largest (2S+1)^n for the dense oracle


class CapExceededError(ValueError):
    """Raised when a requested exact computation exceeds its size cap."""


@dataclass(frozen=True)
class MultiplicityTable:
    """Exact multiplicities L_{M,n} of the total S^(3) eigenvalue M.

    counts maps the doubled eigenvalue 2M to the exact number of product
    basis states with sum of one-site eigenvalues equal to M.
    """

    n: int
    two_s: int
    counts: dict[int, int]

    def count(self, two_m: int) -> int:
        return self.counts.get(two_m, 0)


@dataclass(frozen=True)
class IrrepSpectrum:
    """Degeneracies d_J of the total-spin-J sectors, keyed by 2J."""

    n: int
    two_s: int
    degeneracies: dict[int, int]


@dataclass(frozen=True)
class GibbsValue:
    value: complex | float
    n: int
    two_s: int
    beta: float
    delta: float
    h: complex | float


class FalkBruchResult(NamedTuple):
    chi_perp: float
    m_over_bh: float
    lower_bound: float
    magnetization: float
    double_commutator: float


# ---------------------------------------------------------------------------
# Multiplicities
# ---------------------------------------------------------------------------

def multiplicity_table(n: int, two_s: int, cap: int = EXACT_CAP) -> MultiplicityTable:
    """Exact L_{M,n} by iterated convolution of the uniform (2S+1)-point law.

    Works in the shifted index k = M + S n in {0, ..., two_s * n}, where the
    counts are the coefficients of (1 + z + ... + z^{two_s})^n.  Exact big
    integers; raises CapExceededError when n * two_s exceeds the cap (use
    log_multiplicity_row for the large-n real-valued mode).
    """
    if n < 1 or two_s < 1:
        raise ValueError("need n >= 1 and two_s >= 1")
    if n * two_s > cap:
        raise CapExceededError(
            f"n * two_s = {n * two_s} exceeds the exact-table cap {cap}"
        )
    width = n * two_s
    row = [0] * (width + 1)
    row[0] = 1
    cur = 0  # filled length so far
    for _ in range(n):
        # prefix-sum recurrence for convolution with ones(two_s + 1)
        new_hi = cur + two_s
        prefix = 0
        out = [0] * (new_hi + 1)
        for k in range(new_hi + 1):
            if k <= cur:
                prefix += row[k]
            if k - two_s - 1 >= 0:
                prefix -= row[k - two_s - 1] if k - two_s - 1 <= cur else 0
            out[k] = prefix
        row[: new_hi + 1] = out
        cur = new_hi
    counts = {2 * k - width: row[k] for k in range(width + 1)}
    return MultiplicityTable(n, two_s, counts)


def log_multiplicity_row(n: int, two_s: int) -> np.ndarray:
    """log L_{M,n} over the shifted index k = M + S n, as float64.

    Scaled floating convolution; relative accuracy ~ n * eps, sufficient for
    the large-n Gibbs sums where the exact table would be wastefully slow.
    """
    if n < 1 or two_s < 1:
        raise ValueError("need n >= 1 and two_s >= 1")
    kernel = np.ones(two_s + 1)
    row = np.ones(1)
    log_scale = 0.0
    for _ in range(n):
        row = np.convolve(row, kernel)
        peak = row.max()
        row /= peak
        log_scale += math.log(peak)
    with np.errstate(divide="ignore"):
        return np.log(row) + log_scale


def irrep_spectrum(table: MultiplicityTable) -> IrrepSpectrum:
    """Sector degeneracies d_J = L_{J,n} - L_{J+1,n}, keyed by 2J >= 0.

    Sectors that do not occur (d_J = 0) are omitted.
    """
    width = table.n * table.two_s
    degs: dict[int, int] = {}
    for two_j in range(width % 2, width + 1, 2):
        d = table.count(two_j) - table.count(two_j + 2)
        if d < 0:
            raise ValueError("multiplicity table is not unimodal")
        if d > 0:
            degs[two_j] = d
    return IrrepSpectrum(table.n, table.two_s, degs)


def _log_degeneracies(n: int, two_s: int, exact: bool) -> tuple[np.ndarray, np.ndarray]:
    """(two_j values, log d_J) for all sectors with d_J > 0."""
    width = n * two_s
    two_js = np.arange(width % 2, width + 1, 2)
    if exact:
        table = multiplicity_table(n, two_s)
        logd = np.array(
            [
                math.log(d) if (d := table.count(j2) - table.count(j2 + 2)) > 0 else -math.inf
                for j2 in two_js
            ]
        )
    else:
        logrow = log_multiplicity_row(n, two_s)
        # per-sector scaling: log d_J = log L_J + log(1 - L_{J+1}/L_J) stays
        # well conditioned across the ~n log(theta) orders of magnitude
        ks = (two_js + width) // 2
        logd = np.empty(len(two_js))
        for idx, k in enumerate(ks):
            lo = logrow[k]
            hi = logrow[k + 1] if k + 1 <= width else -math.inf
            if not math.isfinite(lo):
                logd[idx] = -math.inf
            elif not math.isfinite(hi):
                logd[idx] = lo
            else:
                ratio = hi - lo
                if ratio >= 0.0:
                    logd[idx] = -math.inf
                else:
                    logd[idx] = lo + math.log1p(-math.exp(ratio))
    keep = logd > -math.inf
    return two_js[keep], logd[keep]


# ---------------------------------------------------------------------------
# Sector-decomposed Gibbs expectation
# ---------------------------------------------------------------------------

def _char_ratio(two_j: int, h: complex, n: int) -> complex:
    """sum_{M=-J}^{J} e^{h M / n} via the sinh ratio; (2J+1) at h = 0."""
    if h == 0 or abs(h) / (2.0 * n) < 1e-150:
        return float(two_j + 1)
    num = (two_j + 1) * h / (2.0 * n)
    den = h / (2.0 * n)
    if isinstance(h, complex):
        return cmath.sinh(num) / cmath.sinh(den)
    return math.sinh(num) / math.sinh(den)


def _ladder_eig_fresh(two_j: int):
    dim = two_j + 1
    if dim == 1:
        return np.zeros(1), np.ones((1, 1))
    two_ms = np.arange(-two_j, two_j, 2)  # 2M for M = -J .. J-1
    jj = 0.25 * two_j * (two_j + 2)       # J(J+1)
    mm = 0.25 * two_ms * (two_ms + 2.0)   # M(M+1)
    off = 0.5 * np.sqrt(jj - mm)
    w, v = eigh_tridiagonal(np.zeros(dim), off)
    return w, v


_ladder_eig_cached = lru_cache(maxsize=256)(_ladder_eig_fresh)


def _sector_ladder_eig(two_j: int):
    """Eigendecomposition of the tridiagonal Sigma1 ladder matrix in sector J.

    Off-diagonal entries between M and M+1 are sqrt(J(J+1) - M(M+1))/2; the
    matrix is real symmetric with spectrum {-J, ..., J}.  Only small sectors
    are memoised; large eigenvector matrices are recomputed to bound memory.
    """
    if two_j <= 64:
        return _ladder_eig_cached(two_j)
    return _ladder_eig_fresh(two_j)


def heisenberg_expectation_exact(
    n: int,
    two_s: int,
    beta: float,
    delta: float = 1.0,
    h: complex | float = 0.0,
    exact_degeneracies: bool | None = None,
) -> GibbsValue:
    """Gibbs expectation of e^{(h/n) Sigma1} via total-spin sectors.

    Delta = 1: closed sum over sectors, each contributing the geometric
    character sum sinh((2J+1) h / 2n)/sinh(h / 2n); feasible up to n ~ 10^4
    in the log-space degeneracy mode.

    Delta < 1: within each sector the weight e^{-(1-Delta)(beta/n) M^2}
    breaks the rotation symmetry, so Sigma1 is exponentiated through the
    eigendecomposition of its (2J+1) x (2J+1) ladder matrix.

    All sector sums subtract a common maximum exponent before exponentiating.
    """
    if n < 1 or two_s < 1:
        raise ValueError("need n >= 1 and two_s >= 1")
    if beta <= 0.0:
        raise ValueError("beta must be positive")
    if not -1.0 <= delta <= 1.0:
        raise ValueError("delta must lie in [-1, 1]")
    if exact_degeneracies is None:
        exact_degeneracies = n * two_s <= 512
    if h == 0:
        return GibbsValue(1.0, n, two_s, beta, delta, h)
    two_js, logd = _log_degeneracies(n, two_s, exact_degeneracies)
    jj1 = 0.25 * two_js * (two_js + 2.0)  # J(J+1)
    log_w = logd + (beta / n) * jj1
    if delta == 1.0:
        top = log_w.max()
        weights = np.exp(log_w - top)
        denom = float(np.dot(weights, two_js + 1.0))
        numer = sum(
            w * _char_ratio(int(j2), h, n) for j2, w in zip(two_js, weights)
        )
        value = numer / denom
    else:
        gamma = (1.0 - delta) * beta / n
        is_complex = isinstance(h, complex)
        sector_s = np.empty(len(two_js))
        sector_t = np.empty(len(two_js), dtype=complex if is_complex else float)
        for idx, j2 in enumerate(two_js):
            two_ms = np.arange(-j2, j2 + 1, 2)
            m2 = 0.25 * two_ms.astype(float) ** 2
            d_weights = np.exp(-gamma * m2)
            sector_s[idx] = d_weights.sum()
            w, v = _sector_ladder_eig(int(j2))
            exp_spec = np.exp((h / n) * w)
            diag = (v * v) @ exp_spec  # diagonal of e^{(h/n) Sigma1} in the M basis
            sector_t[idx] = np.dot(d_weights, diag)
        log_u = log_w + np.log(sector_s)
        top = log_u.max()
        weights = np.exp(log_u - top)
        denom = weights.sum()
        numer = np.dot(weights, sector_t / sector_s)
        value = numer / denom
    if not isinstance(h, complex):
        value = float(np.real(value))
    if not np.all(np.isfinite([abs(value)])):
        raise ArithmeticError("non-finite Gibbs sum; parameters out of range")
    return GibbsValue(value, n, two_s, beta, delta, h)


# ---------------------------------------------------------------------------
# Dense oracle
# ---------------------------------------------------------------------------

def _one_site_spin(two_s: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(Sx, Sy, Sz) for a single spin S = two_s / 2."""
    dim = two_s + 1
    m = 0.5 * np.arange(two_s, -two_s - 2, -2)[:dim]
    s = 0.5 * two_s
    lowering = np.sqrt(s * (s + 1.0) - m[:-1] * (m[:-1] - 1.0))
    sp = np.diag(lowering, 1)  # raising in the descending-M basis
    sx = 0.5 * (sp + sp.T)
    sy = -0.5j * (sp - sp.T)
    sz = np.diag(m)
    return sx, sy.astype(complex), sz


@lru_cache(maxsize=32)
def _total_spin_ops(n: int, two_s: int):
    """Dense total-spin operators (Sigma1, Sigma3, Sigma^2) on (C^{2S+1})^n."""
    dim_site = two_s + 1
    dim = dim_site**n
    if dim > DENSE_CAP:
        raise CapExceededError(f"dense dimension {dim} exceeds cap {DENSE_CAP}")
    sx, sy, sz = _one_site_spin(two_s)
    tot = [np.zeros((dim, dim), dtype=complex) for _ in range(3)]
    for i in range(n):
        for op, acc in zip((sx, sy, sz), tot):
            big = np.eye(1, dtype=complex)
            for j in range(n):
                big = np.kron(big, op if j == i else np.eye(dim_site))
            acc += big
    s1, s2, s3 = tot
    total_sq = s1 @ s1 + s2 @ s2 + s3 @ s3
    return s1, s3, total_sq


@lru_cache(maxsize=64)
def _dense_eig(n: int, two_s: int, delta: float):
    """Eigendecomposition of G1 = (1/n)(Sigma^2 - (1-Delta)(Sigma3)^2) and of Sigma1."""
    s1, s3, total_sq = _total_spin_ops(n, two_s)
    g1 = (total_sq - (1.0 - delta) * (s3 @ s3)) / n
    lam, u = np.linalg.eigh(g1)
    mu, w = np.linalg.eigh(s1)
    b = u.conj().T @ w  # change of basis between the two eigenframes
    return lam, mu, np.abs(b) ** 2


def dense_gibbs_oracle(
    n: int,
    two_s: int,
    beta: float,
    delta: float = 1.0,
    h: complex | float = 0.0,
) -> GibbsValue:
    """Brute-force Gibbs expectation of e^{(h/n) Sigma1} by dense eigensolves.

    Builds Sigma1, Sigma3 and Sigma^2 as Kronecker sums over one-site spin
    matrices, then evaluates Tr(e^{(h/n) Sigma1} e^{beta G1}) / Tr(e^{beta G1})
    with G1 = (1/n)(Sigma^2 - (1-Delta)(Sigma3)^2).  Independent of the
    sector decomposition; capped at (2S+1)^n <= 6561.
    """
    if beta <= 0.0:
        raise ValueError("beta must be positive")
    lam, mu, b2 = _dense_eig(n, two_s, float(delta))
    top = beta * lam.max()
    gibbs = np.exp(beta * lam - top)
    denom = gibbs.sum()
    if h == 0:
        value = 1.0
    else:
        # Tr(e^{(h/n) Sigma1} e^{beta G1}) = sum_{k,a} e^{beta lam_k} |B_{ka}|^2 e^{(h/n) mu_a}
        diag = gibbs @ b2
        numer = np.dot(diag, np.exp((h / n) * mu))
        value = numer / denom
        if not isinstance(h, complex):
            value = float(np.real(value))
    return GibbsValue(value, n, two_s, beta, float(delta), h)


# ---------------------------------------------------------------------------
# Ward identity / Falk-Bruch inequality chain
# ---------------------------------------------------------------------------

@lru_cache(maxsize=64)
def _transverse_ops(n: int, two_s: int):
    dim_site = two_s + 1
    sx, sy, sz = _one_site_spin(two_s)
    dim = dim_site**n
    if dim > DENSE_CAP:
        raise CapExceededError(f"dense dimension {dim} exceeds cap {DENSE_CAP}")
    tots = []
    for op in (sx, sy, sz):
        acc = np.zeros((dim, dim), dtype=complex)
        for i in range(n):
            big = np.eye(1, dtype=complex)
            for j in range(n):
                big = np.kron(big, op if j == i else np.eye(dim_site))
            acc += big
        tots.append(acc)
    return tuple(tots)


def falk_bruch_check(
    n: int, two_s: int, beta: float, h: float, u: float = 0.0
) -> FalkBruchResult:
    """Magnetization / Duhamel / transverse-susceptibility inequality chain.

    Hamiltonian on the complete graph with couplings 1/n off the diagonal:

        H = -(2/n) sum_{i<j} (S_i.S_j - u S_i3 S_j3) - h sum_i S_i1,

    so u = 0 is the isotropic model and u = 1 retains only the 1-2 plane
    couplings.  With M = Sigma2 / sqrt(n) the returned triple satisfies

        chi_perp >= M_Gamma/(beta h) >= chi_perp
                    - (beta sqrt(h) / 2) sqrt(chi_perp <[M,[H,M]]>).

    The Duhamel inner product (M, M) is evaluated in closed form from the
    eigendecomposition, with the degenerate-energy limit e^{-beta E} taken
    analytically instead of dividing by zero.
    """
    if h <= 0.0:
        raise ValueError("falk_bruch_check needs h > 0")
    s1, s2, s3 = _transverse_ops(n, two_s)
    total_sq = s1 @ s1 + s2 @ s2 + s3 @ s3
    site_sq_const = n * 0.25 * two_s * (two_s + 2)  # sum_i S_i.S_i
    # -(2/n) sum_{i<j} S_i.S_j = -(1/n)(Sigma^2 - const)
    ham = -(total_sq - site_sq_const * np.eye(total_sq.shape[0])) / n
    ham += (u / n) * (s3 @ s3 - n * _site_z_sq(n, two_s))
    ham -= h * s1
    energy, vecs = np.linalg.eigh(ham)
    energy = energy - energy.min()
    gibbs = np.exp(-beta * energy)
    z = gibbs.sum()
    rho = gibbs / z

    m_op = s2 / math.sqrt(n)
    m_eig = vecs.conj().T @ m_op @ vecs
    mag = float(np.real(np.trace((vecs.conj().T @ s1 @ vecs) @ np.diag(rho)))) / n
    chi_perp = float(np.real(np.sum(np.abs(m_eig) ** 2 * rho[np.newaxis, :])))

    # Duhamel (M, M): sum_{m,k} |M_mk|^2 (e^{-beta E_k} - e^{-beta E_m}) / (beta (E_m - E_k))
    de = energy[:, np.newaxis] - energy[np.newaxis, :]  # E_m - E_k
    with np.errstate(divide="ignore", invalid="ignore"):
        kernel = (gibbs[np.newaxis, :] - gibbs[:, np.newaxis]) / (beta * de)
    degenerate = np.abs(de) < 1e-12
    kernel[degenerate] = gibbs[np.newaxis, :].repeat(len(energy), 0)[degenerate]
    duhamel = float(np.real(np.sum(np.abs(m_eig) ** 2 * kernel)) / z)

    comm = ham @ m_op - m_op @ ham
    double_comm = m_op @ comm - comm @ m_op
    dc_val = float(np.real(np.trace((vecs.conj().T @ double_comm @ vecs) @ np.diag(rho))))
    lower = chi_perp - 0.5 * beta * math.sqrt(h) * math.sqrt(max(chi_perp * dc_val, 0.0))
    return FalkBruchResult(chi_perp, duhamel, lower, mag, dc_val)


@lru_cache(maxsize=32)
def _site_z_sq(n: int, two_s: int) -> np.ndarray:
    """(1/n) sum_i (S_i3)^2 as a dense matrix (identity times S^2 only for S=1/2)."""
    dim_site = two_s + 1
    _, _, sz = _one_site_spin(two_s)
    sz2 = sz @ sz
    dim = dim_site**n
    acc = np.zeros((dim, dim), dtype=complex)
    for i in range(n):
        big = np.eye(1, dtype=complex)
        for j in range(n):
            big = np.kron(big, sz2 if j == i else np.eye(dim_site))
        acc += big
    return acc / n
