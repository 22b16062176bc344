"""Mean-field variational machinery for quantum spins on the complete graph.

Everything here is scalar calculus feeding the n -> infinity side of the
toolkit: the spin-S entropy function eta and its inverse-derivative x_star,
the free-energy profile g_beta whose maximiser m_star is the spontaneous
magnetisation, saddle-point asymptotics for eigenvalue multiplicities,
pressure / magnetisation / susceptibility, the simplex functional phi_beta
of the interchange model with its order parameter z_star, the classical
(S -> infinity) analogue, and log-log exponent fitting.

Conventions:
  * half-integer spins are carried as doubled integers (two_s = 2S),
  * theta = 2S + 1 is the number of one-site levels,
  * all functions are pure; no shared mutable state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "SpinContext",
    "MaximizerResult",
    "ExponentFit",
    "beta_critical",
    "eta",
    "eta_prime",
    "eta_second",
    "x_star",
    "g_beta",
    "m_star",
    "saddle_multiplicity",
    "pressure",
    "magnetization",
    "susceptibility",
    "fit_exponent",
    "phi_beta",
    "interchange_beta_critical",
    "interchange_maximizer",
    "classical_field",
    "classical_maximizer",
]

# Below this |x| the sinh-ratio formulas cancel catastrophically; switch to
# 8th-order Taylor series of log(sinh t / t) and its derivatives.
_SERIES_SWITCH = 1e-3


@dataclass(frozen=True)
class SpinContext:
    """Spin quantum number S stored as the integer two_s = 2S."""

    two_s: int

    def __post_init__(self):
        if self.two_s < 1:
            raise ValueError(f"two_s must be a positive integer, got {self.two_s}")

    @property
    def theta(self) -> int:
        return self.two_s + 1

    @property
    def spin(self) -> float:
        return 0.5 * self.two_s


@dataclass
class MaximizerResult:
    """Location/value/curvature of a scalar free-energy maximum."""

    location: float
    value: float
    second_derivative: float
    converged: bool
    iterations: int
    z_star: float | None = None


@dataclass
class ExponentFit:
    """Least-squares slope of log y against log t."""

    exponent: float
    intercept: float
    r_squared: float
    sample_points: list[tuple[float, float]]


def beta_critical(ctx: SpinContext) -> float:
    """Inverse critical temperature (3/2)/(S(S+1)) of the Heisenberg model."""
    s = ctx.spin
    return 1.5 / (s * s + s)


# ---------------------------------------------------------------------------
# log(sinh t / t) family, stable over the whole real line
# ---------------------------------------------------------------------------

def _log_sinhc(t: float) -> float:
    """log(sinh(t)/t); even, smooth at 0."""
    t = abs(t)
    if t < _SERIES_SWITCH:
        t2 = t * t
        # t^2/6 - t^4/180 + t^6/2835 - t^8/37800
        return t2 * (1.0 / 6 + t2 * (-1.0 / 180 + t2 * (1.0 / 2835 - t2 / 37800)))
    if t < 350.0:
        return math.log(math.sinh(t) / t)
    # sinh(t) = e^t (1 - e^{-2t})/2
    return t - math.log(2.0 * t) + math.log1p(-math.exp(-2.0 * t))


def _langevin(t: float) -> float:
    """coth(t) - 1/t; odd, smooth at 0."""
    if t == 0.0:
        return 0.0
    a = abs(t)
    if a < _SERIES_SWITCH:
        t2 = t * t
        return t * (1.0 / 3 + t2 * (-1.0 / 45 + t2 * (2.0 / 945 - t2 / 4725)))
    if a < 350.0:
        val = math.cosh(a) / math.sinh(a) - 1.0 / a
    else:
        val = 1.0 + 2.0 * math.exp(-2.0 * a) - 1.0 / a
    return math.copysign(val, t)


def _langevin_prime(t: float) -> float:
    """d/dt (coth t - 1/t) = 1/t^2 - 1/sinh(t)^2; even."""
    a = abs(t)
    if a < _SERIES_SWITCH:
        t2 = t * t
        return 1.0 / 3 + t2 * (-1.0 / 15 + t2 * (2.0 / 189 - t2 / 675))
    if a < 350.0:
        s = math.sinh(a)
        return 1.0 / (a * a) - 1.0 / (s * s)
    return 1.0 / (a * a) - 4.0 * math.exp(-2.0 * a)


def eta(x: float, ctx: SpinContext) -> float:
    """log( sinh((2S+1)x/2) / sinh(x/2) ); eta(0) = log(2S+1)."""
    th = ctx.theta
    return math.log(th) + _log_sinhc(0.5 * th * x) - _log_sinhc(0.5 * x)


def eta_prime(x: float, ctx: SpinContext) -> float:
    """d eta/dx; odd, increasing from -S to S."""
    th = ctx.theta
    return 0.5 * th * _langevin(0.5 * th * x) - 0.5 * _langevin(0.5 * x)


def eta_second(x: float, ctx: SpinContext) -> float:
    """d^2 eta/dx^2; strictly positive, maximal at 0 where it equals (theta^2-1)/12."""
    th = ctx.theta
    return 0.25 * th * th * _langevin_prime(0.5 * th * x) - 0.25 * _langevin_prime(0.5 * x)


def x_star(m: float, ctx: SpinContext, tol: float = 1e-12) -> float:
    """Unique solution x of eta'(x) = m, for |m| < S.

    Bracketed bisection (eta' is strictly increasing) followed by Newton
    polish; residual |eta'(x) - m| is driven below tol.
    """
    s = ctx.spin
    if not abs(m) < s:
        raise ValueError(f"x_star requires |m| < S = {s}, got m = {m}")
    if m == 0.0:
        return 0.0
    sign = 1.0 if m > 0 else -1.0
    target = abs(m)
    hi = 1.0
    while eta_prime(hi, ctx) <= target:
        hi *= 2.0
        if hi > 1e6:  # unreachable for |m| < S
            raise ArithmeticError("x_star bracket growth failed")
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if eta_prime(mid, ctx) < target:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-15 * max(1.0, hi):
            break
    x = 0.5 * (lo + hi)
    for _ in range(4):
        r = eta_prime(x, ctx) - target
        if abs(r) <= tol:
            break
        d2 = eta_second(x, ctx)
        if d2 <= 0.0:
            break
        step = r / d2
        xn = x - step
        if not (lo - 1e-12 <= xn <= hi + 1e-12):
            break
        x = xn
    return sign * x


def g_beta(m: float, beta: float, ctx: SpinContext) -> float:
    """Free-energy profile eta(x*(m)) - m x*(m) + beta m^2 on (-S, S)."""
    x = x_star(m, ctx)
    return eta(x, ctx) - m * x + beta * m * m


def _golden_max(f, lo: float, hi: float, tol: float = 1e-12, max_iter: int = 200):
    """Golden-section maximisation on [lo, hi]; returns (argmax, max, iters)."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    it = 0
    while b - a > tol and it < max_iter:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
        it += 1
    xm = 0.5 * (a + b)
    return xm, f(xm), it


def _grid_then_golden(f, lo: float, hi: float, n_grid: int = 512, tol: float = 1e-12):
    """Coarse scan then golden refinement; robust to bimodal profiles."""
    step = (hi - lo) / n_grid
    best_i, best_v = 0, -math.inf
    for i in range(n_grid + 1):
        v = f(lo + i * step)
        if v > best_v:
            best_i, best_v = i, v
    a = lo + max(0, best_i - 1) * step
    b = lo + min(n_grid, best_i + 1) * step
    return _golden_max(f, a, b, tol=tol)


def m_star(beta: float, ctx: SpinContext) -> MaximizerResult:
    """Maximiser of g_beta on [0, S); zero iff beta <= beta_critical.

    Coarse 512-point grid plus golden refinement, then a bisection polish of
    the stationarity condition 2*beta*m = x*(m).  If the refined interior
    value ties the boundary value g_beta(0) within 1e-13 the transition has
    not happened and m* = 0 is reported.
    """
    s = ctx.spin
    hi = s * (1.0 - 1e-12)
    f = lambda m: g_beta(m, beta, ctx)
    loc, val, iters = _grid_then_golden(f, 0.0, hi)
    g0 = f(0.0)
    if loc > 0.0:
        loc = _polish_stationary(beta, 0.0, loc, ctx)
        val = f(loc)
    if val <= g0 + 1e-13:
        loc, val = 0.0, g0
    curv = 2.0 * beta - 1.0 / eta_second(x_star(loc, ctx), ctx)
    return MaximizerResult(loc, val, curv, True, iters)


def _stationarity(m: float, beta: float, h: float, ctx: SpinContext) -> float:
    """g_beta'(m) + h = 2 beta m - x*(m) + h."""
    return 2.0 * beta * m - x_star(m, ctx) + h


def _polish_stationary(beta: float, h: float, m0: float, ctx: SpinContext) -> float:
    """Bisection refinement of 2 beta m - x*(m) + h = 0 around m0."""
    s = ctx.spin
    w = max(1e-6 * s, 1e-3 * m0)
    lo = max(0.0, m0 - w)
    hi = min(s * (1.0 - 1e-12), m0 + w)
    flo = _stationarity(lo, beta, h, ctx)
    fhi = _stationarity(hi, beta, h, ctx)
    grow = 0
    while flo * fhi > 0.0 and grow < 60:
        lo = max(0.0, lo - w)
        hi = min(s * (1.0 - 1e-12), hi + w)
        w *= 2.0
        flo = _stationarity(lo, beta, h, ctx)
        fhi = _stationarity(hi, beta, h, ctx)
        grow += 1
    if flo * fhi > 0.0:
        return m0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = _stationarity(mid, beta, h, ctx)
        if fm == 0.0:
            return mid
        if flo * fm < 0.0:
            hi, fhi = mid, fm
        else:
            lo, flo = mid, fm
        if hi - lo < 1e-16 * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


def saddle_multiplicity(n: int, m: float, ctx: SpinContext) -> float:
    """log of the saddle-point approximation to L_{floor(mn)} - L_{floor(mn)+1}.

    The approximation is (1 - e^{-x*(m)}) / sqrt(2 pi eta''(x*(m)) n) times
    e^{n (eta(x*(m)) - m x*(m))}; it degenerates at m = 0 where the prefactor
    vanishes.
    """
    s = ctx.spin
    if not 0.0 < m < s:
        raise ValueError(f"saddle asymptotics require m in (0, S), got m = {m}")
    x = x_star(m, ctx)
    pref = -math.expm1(-x)  # 1 - e^{-x} > 0 for m > 0
    return (
        math.log(pref)
        - 0.5 * math.log(2.0 * math.pi * eta_second(x, ctx) * n)
        + n * (eta(x, ctx) - m * x)
    )


def pressure(beta: float, h: float, ctx: SpinContext) -> float:
    """max over m in [0, S] of g_beta(m) + h m (h >= 0)."""
    if h < 0.0:
        raise ValueError("pressure is defined for h >= 0")
    if h == 0.0:
        return m_star(beta, ctx).value
    m = magnetization(beta, h, ctx)
    return g_beta(m, beta, ctx) + h * m


def magnetization(beta: float, h: float, ctx: SpinContext) -> float:
    """argmax of g_beta(m) + h m; solves 2 beta m - x*(m) + h = 0 for h > 0.

    Since x*(m) diverges at m -> S, the stationary point never leaves [0, S)
    for finite h; no boundary clamping is required.
    """
    if h < 0.0:
        raise ValueError("magnetization is defined for h >= 0")
    if h == 0.0:
        return m_star(beta, ctx).location
    s = ctx.spin
    f = lambda m: g_beta(m, beta, ctx) + h * m
    loc, _, _ = _grid_then_golden(f, 0.0, s * (1.0 - 1e-12))
    return _polish_stationary(beta, h, loc, ctx)


def susceptibility(beta: float, ctx: SpinContext) -> float:
    """Zero-field susceptibility 1/(2 (beta_c - beta)) for beta < beta_c."""
    bc = beta_critical(ctx)
    if beta >= bc:
        raise ValueError(f"closed-form susceptibility needs beta < beta_c = {bc}")
    return 1.0 / (2.0 * (bc - beta))


def fit_exponent(samples: list[tuple[float, float]], n_points: int = 4) -> ExponentFit:
    """Log-log least-squares slope using the n_points smallest parameters.

    The samples are (t, y) pairs with t decreasing towards 0; only positive
    data is admissible.  The fit is restricted to the smallest t values where
    the power law is cleanest.
    """
    if len(samples) < 4:
        raise ValueError("fit_exponent needs at least 4 samples")
    if any(t <= 0.0 or y <= 0.0 for t, y in samples):
        raise ValueError("fit_exponent needs strictly positive data")
    pts = sorted(samples, key=lambda p: p[0])[:n_points]
    lt = [math.log(t) for t, _ in pts]
    ly = [math.log(y) for _, y in pts]
    k = len(pts)
    mt = sum(lt) / k
    my = sum(ly) / k
    sxx = sum((a - mt) ** 2 for a in lt)
    sxy = sum((a - mt) * (b - my) for a, b in zip(lt, ly))
    slope = sxy / sxx
    intercept = my - slope * mt
    ss_res = sum((b - (intercept + slope * a)) ** 2 for a, b in zip(lt, ly))
    ss_tot = sum((b - my) ** 2 for b in ly)
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return ExponentFit(slope, intercept, r2, pts)


# ---------------------------------------------------------------------------
# Interchange model: simplex functional and its one-parameter family
# ---------------------------------------------------------------------------

def phi_beta(x, beta: float) -> float:
    """(beta/2)(sum x_i^2 - 1) - sum x_i log x_i on the ordered simplex."""
    xs = list(x)
    if abs(sum(xs) - 1.0) > 1e-12:
        raise ValueError("phi_beta arguments must sum to 1 within 1e-12")
    if any(xi < 0.0 for xi in xs):
        raise ValueError("phi_beta arguments must be nonnegative")
    if any(xs[i] < xs[i + 1] - 1e-12 for i in range(len(xs) - 1)):
        raise ValueError("phi_beta arguments must be weakly decreasing")
    quad = 0.5 * beta * (sum(xi * xi for xi in xs) - 1.0)
    ent = sum(xi * math.log(xi) for xi in xs if xi > 0.0)
    return quad - ent


def interchange_beta_critical(ctx: SpinContext) -> float:
    """beta_c(S) = 4S/(2S-1) log(2S) for S >= 1."""
    if ctx.two_s < 2:
        raise ValueError("the interchange critical formula needs S >= 1")
    two_s = ctx.two_s
    return 2.0 * two_s / (two_s - 1) * math.log(two_s)


def _phi_family(t: float, beta: float, theta: int) -> float:
    """phi_beta along (t, (1-t)/(theta-1), ..., (1-t)/(theta-1))."""
    rest = (1.0 - t) / (theta - 1)
    quad = 0.5 * beta * (t * t + (theta - 1) * rest * rest - 1.0)
    ent = t * math.log(t) if t > 0.0 else 0.0
    if rest > 0.0:
        ent += (theta - 1) * rest * math.log(rest)
    return quad - ent


def interchange_maximizer(beta: float, ctx: SpinContext) -> MaximizerResult:
    """Maximiser of phi_beta restricted to the one-parameter family.

    Scalar search over x_1 in [1/theta, 1); the remaining theta-1 entries are
    equal by the uniqueness of the maximiser.  The result carries x_1* in
    `location` and the order parameter z* = x_1* - x_2* in `z_star`.
    """
    th = ctx.theta
    lo = 1.0 / th
    hi = 1.0 - 1e-12
    f = lambda t: _phi_family(t, beta, th)
    loc, val, iters = _grid_then_golden(f, lo, hi)
    f_uniform = f(lo)
    if val <= f_uniform + 1e-13:
        loc, val = lo, f_uniform
    curv = beta * (1.0 + 1.0 / (th - 1)) - 1.0 / loc - 1.0 / (1.0 - loc) if loc < 1.0 else -math.inf
    z = (th * loc - 1.0) / (th - 1.0)
    if z < 1e-12:
        z = 0.0
    return MaximizerResult(loc, val, curv, True, iters, z_star=z)


# ---------------------------------------------------------------------------
# Classical (S -> infinity) limit
# ---------------------------------------------------------------------------

def classical_field(mu: float, tol: float = 1e-12) -> float:
    """Solve coth(x) - 1/x = mu for x >= 0, mu in [0, 1)."""
    if not 0.0 <= mu < 1.0:
        raise ValueError("classical field requires mu in [0, 1)")
    if mu == 0.0:
        return 0.0
    hi = 1.0
    while _langevin(hi) <= mu:
        hi *= 2.0
        if hi > 1e8:
            raise ArithmeticError("classical field bracket failed")
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _langevin(mid) < mu:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-16 * max(1.0, hi):
            break
    x = 0.5 * (lo + hi)
    for _ in range(3):
        r = _langevin(x) - mu
        if abs(r) <= tol:
            break
        x -= r / _langevin_prime(x)
    return x


def classical_maximizer(beta: float) -> MaximizerResult:
    """Maximiser of log(sinh(x(mu))/x(mu)) - mu x(mu) + beta mu^2 on [0, 1).

    mu* is positive iff beta > 3/2; at interior maxima 2 beta mu = x(mu).
    """
    def f(mu: float) -> float:
        x = classical_field(mu)
        return _log_sinhc(x) - mu * x + beta * mu * mu

    # mu -> 1 forces x(mu) ~ 1/(1 - mu); stop the scan where x stays modest
    loc, val, iters = _grid_then_golden(f, 0.0, 1.0 - 1e-6)
    f0 = f(0.0)
    if loc > 0.0:
        # polish 2 beta mu - x(mu) = 0 by bisection
        g = lambda mu: 2.0 * beta * mu - classical_field(mu)
        w = max(1e-6, 1e-3 * loc)
        lo_b, hi_b = max(0.0, loc - w), min(1.0 - 1e-9, loc + w)
        glo, ghi = g(lo_b), g(hi_b)
        tries = 0
        while glo * ghi > 0.0 and tries < 50:
            lo_b = max(0.0, lo_b - w)
            hi_b = min(1.0 - 1e-9, hi_b + w)
            w *= 2.0
            glo, ghi = g(lo_b), g(hi_b)
            tries += 1
        if glo * ghi <= 0.0:
            for _ in range(200):
                mid = 0.5 * (lo_b + hi_b)
                gm = g(mid)
                if glo * gm < 0.0:
                    hi_b, ghi = mid, gm
                else:
                    lo_b, glo = mid, gm
                if hi_b - lo_b < 1e-16:
                    break
            loc = 0.5 * (lo_b + hi_b)
            val = f(loc)
    if val <= f0 + 1e-13:
        loc, val = 0.0, f0
    eps = 1e-5
    if loc > eps:
        curv = (f(loc + eps) - 2.0 * f(loc) + f(loc - eps)) / (eps * eps)
    else:
        curv = 2.0 * beta - 3.0  # quadratic coefficient at mu = 0
    return MaximizerResult(loc, val, curv, True, iters)
