"""The second recursion read as an ordinary differential equation.

Single equation (m is a free rescaling parameter):

    m g + sign(s) g**2 - P(x) = |s| x g g'

Two-residue system (defaults give the phi^4 shape, s+ = -1, s- = 2):

    g_r' = (g_r - P_r + sign(s_r) g_r**2) / (x * sum_j |s_j| g_j)

Trajectories are integrated with an adaptive Dormand-Prince 5(4) pair
(scipy's RK45) on the autonomous form

    dx/dt = |s| x g,   dg/dt = m g + sign(s) g**2 - P(x)

which stays regular where g -> 0 (the vertical-tangent "death" of a
solution); x increases along t whenever g > 0, so the direction of t is
chosen from the sign of the initial value.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import bisect

SINGULAR_EPS = 1e-14
EPS_DIE = 1e-9
RUNAWAY = 1e12


class SingularPoint(ValueError):
    """The field is undefined (x g = 0 or beta = 0)."""


class DomainError(ValueError):
    """A square root of a negative discriminant was requested."""


class NoBracket(RuntimeError):
    """Bisection could not find initial values with different fates."""


class NoSignChange(ValueError):
    """The polynomial does not change sign on the requested interval."""


def _sign(s: int) -> int:
    return 1 if s >= 0 else -1


def poly_eval(coeffs: Sequence[float], x: float) -> float:
    """coeffs[i] multiplies x**i."""
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


@dataclass
class OdeSpec:
    mode: str = "single"
    m: float = 1.0
    s: int = 2
    P: list[float] = field(default_factory=lambda: [0.0, 1.0])
    # system2 data
    s_pair: tuple[int, int] = (-1, 2)
    P_pair: tuple[list[float], list[float]] = ((0.0, 1.0), (0.0, 0.0, 1.0))
    xrange: tuple[float, float] = (0.0, 1.0)
    yrange: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self):
        if self.mode not in ("single", "system2"):
            raise ValueError("mode must be 'single' or 'system2'")
        if self.s == 0 or 0 in self.s_pair:
            raise ValueError("s must be nonzero")
        self.P = [float(c) for c in self.P]
        self.P_pair = tuple([float(c) for c in p] for p in self.P_pair)

    def p(self, x: float) -> float:
        return poly_eval(self.P, x)


def rhs_single(x: float, g: float, spec: OdeSpec) -> float:
    if abs(x * g) < SINGULAR_EPS:
        raise SingularPoint(f"field undefined at x={x}, g={g}")
    num = spec.m * g + _sign(spec.s) * g * g - spec.p(x)
    return num / (abs(spec.s) * x * g)


def rhs_system(x: float, gp: float, gm: float, spec: OdeSpec) -> tuple[float, float]:
    sp, sm = spec.s_pair
    beta = x * (abs(sp) * gp + abs(sm) * gm)
    if abs(beta) < SINGULAR_EPS:
        raise SingularPoint(f"beta vanishes at x={x}, g+={gp}, g-={gm}")
    Pp, Pm = spec.P_pair
    dp = (gp - poly_eval(Pp, x) + _sign(sp) * gp * gp) / beta
    dm = (gm - poly_eval(Pm, x) + _sign(sm) * gm * gm) / beta
    return dp, dm


def relation_residual(x: float, g: float, dg: float, spec: OdeSpec) -> float:
    """m g - P + sign(s) g**2 - |s| x g g' (zero on solutions)."""
    return spec.m * g - spec.p(x) + _sign(spec.s) * g * g - abs(spec.s) * x * g * dg


@dataclass
class Trajectory:
    x: np.ndarray
    g: np.ndarray
    termination: str
    max_residual: float = 0.0

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "gamma"])
        for a, b in zip(self.x, self.g):
            w.writerow([repr(float(a)), repr(float(b))])
        return buf.getvalue()


TERMINATIONS = ("reached-right-edge", "died", "left-window", "step-underflow")


def integrate(spec: OdeSpec, x0: float, g0: float, x_end: float, *,
              window: tuple[float, float] | None = None, rtol: float = 1e-10, atol: float = 1e-13,
              eps_die: float = EPS_DIE, tau_max: float = 1e6) -> Trajectory:
    """Integrate the single equation from (x0, g0) towards x_end.

    The parameter budget ``tau_max`` bounds every call; running out of it
    without hitting a boundary is reported as "step-underflow".
    """
    if x0 <= 0:
        raise ValueError("x0 must be positive")
    if abs(g0) < eps_die:
        return Trajectory(np.array([x0]), np.array([g0]), "died")
    direction = 1.0 if g0 > 0 else -1.0
    lo, hi = window if window is not None else (-math.inf, math.inf)
    sg, sa, m = _sign(spec.s), abs(spec.s), spec.m
    P = spec.P

    def f(t, y):
        x, g = y
        return [direction * sa * x * g, direction * (m * g + sg * g * g - poly_eval(P, x))]

    def ev_edge(t, y):
        return y[0] - x_end
    ev_edge.terminal, ev_edge.direction = True, 1

    # signed crossing: |g| - eps could be stepped over when g changes sign
    def ev_die(t, y):
        return direction * y[1] - eps_die
    ev_die.terminal, ev_die.direction = True, -1

    def ev_runaway(t, y):
        return abs(y[1]) - RUNAWAY
    ev_runaway.terminal, ev_runaway.direction = True, 1

    def ev_low(t, y):
        return y[1] - lo
    ev_low.terminal, ev_low.direction = True, -1

    def ev_high(t, y):
        return y[1] - hi
    ev_high.terminal, ev_high.direction = True, 1

    events = [ev_edge, ev_die, ev_runaway]
    if math.isfinite(lo):
        events.append(ev_low)
    if math.isfinite(hi):
        events.append(ev_high)

    sol = solve_ivp(f, (0.0, tau_max), [x0, g0], method="RK45", rtol=rtol, atol=atol,
                    events=events, dense_output=True, max_step=math.inf)
    xs, gs = sol.y[0], sol.y[1]
    termination = "step-underflow"
    if sol.status == 1:
        hit = [i for i, te in enumerate(sol.t_events) if len(te)]
        first = min(hit, key=lambda i: sol.t_events[i][0])
        termination = {0: "reached-right-edge", 1: "died"}.get(first, "left-window")
    # keep strictly increasing x samples
    keep = np.concatenate([[True], np.diff(xs) > 0])
    xs, gs = xs[keep], gs[keep]
    traj = Trajectory(xs, gs, termination)
    traj.max_residual = _dense_residual(sol, spec, direction)
    return traj


def _dense_residual(sol, spec: OdeSpec, direction: float) -> float:
    """Defining-relation residual at accepted steps, g' from the dense output."""
    if sol.sol is None or len(sol.t) < 3:
        return 0.0
    worst = 0.0
    t = sol.t
    for i in range(1, len(t) - 1):
        h = 1e-4 * min(t[i] - t[i - 1], t[i + 1] - t[i])
        if h <= 0:
            continue
        a, b = sol.sol(t[i] - h), sol.sol(t[i] + h)
        dx, dg = b[0] - a[0], b[1] - a[1]
        if dx == 0:
            continue
        x, g = sol.y[0][i], sol.y[1][i]
        worst = max(worst, abs(relation_residual(x, g, dg / dx, spec)))
    return worst


# -- nullclines, seeds, separatrix ------------------------------------------------

def nullcline(spec: OdeSpec, x: float, branch: str = "origin") -> float:
    """Ordinate where the slope vanishes: roots of sign(s) g**2 + m g - P(x) = 0.

    ``branch="origin"`` is the root through g = 0 at P = 0; ``"upper"`` is the
    second root, which only exists in the positive quadrant when s < 0.
    """
    m, P = spec.m, spec.p(x)
    if _sign(spec.s) > 0:
        disc = m * m + 4 * P
        if disc < 0:
            raise DomainError(f"no real nullcline at x={x}")
        root = math.sqrt(disc)
        return (-m + root) / 2 if branch == "origin" else (-m - root) / 2
    disc = m * m - 4 * P
    if disc < 0:
        raise DomainError(f"no real nullcline at x={x}")
    root = math.sqrt(disc)
    return (m - root) / 2 if branch == "origin" else (m + root) / 2


def asymptotic_series(spec: OdeSpec, terms: int) -> list[Fraction]:
    """Formal power series solution g = sum_n c_n x**n (index 0 is zero).

    From m c_n = p_n + sum_j (|s| j - sign(s)) c_j c_{n-j}; P must be exact-able.
    """
    m = Fraction(spec.m).limit_denominator(10**12)
    p = [Fraction(c).limit_denominator(10**12) for c in spec.P]
    if p and p[0] != 0:
        raise ValueError("P must vanish at x = 0")
    c = [Fraction(0)] * (terms + 1)
    sg, sa = _sign(spec.s), abs(spec.s)
    for n in range(1, terms + 1):
        acc = p[n] if n < len(p) else Fraction(0)
        for j in range(1, n):
            acc += (sa * j - sg) * c[j] * c[n - j]
        c[n] = acc / m
    return c


def classify(spec: OdeSpec, x0: float, g0: float, x_probe: float, **kw) -> str:
    """'died' or 'escaped' (reached x_probe or left the window upward)."""
    traj = integrate(spec, x0, g0, x_probe, **kw)
    return "died" if traj.termination == "died" else "escaped"


def separatrix_search(spec: OdeSpec, x0: float, x_probe: float, *, tol: float = 1e-10,
                      bracket: tuple[float, float] | None = None, seed_terms: int = 4,
                      max_expansions: int = 40, **kw) -> float:
    """Initial value at x0 separating dying from escaping trajectories."""
    if bracket is None:
        seed_coeffs = asymptotic_series(spec, seed_terms)
        seed = float(sum(float(cn) * x0**n for n, cn in enumerate(seed_coeffs)))
        width = max(abs(seed) * 1e-3, 1e-12)
        lo, hi = seed - width, seed + width
        fate_lo = classify(spec, x0, lo, x_probe, **kw)
        fate_hi = classify(spec, x0, hi, x_probe, **kw)
        for _ in range(max_expansions):
            if fate_lo != fate_hi:
                break
            width *= 2
            lo, hi = seed - width, seed + width
            fate_lo = classify(spec, x0, lo, x_probe, **kw)
            fate_hi = classify(spec, x0, hi, x_probe, **kw)
    else:
        lo, hi = bracket
        fate_lo = classify(spec, x0, lo, x_probe, **kw)
        fate_hi = classify(spec, x0, hi, x_probe, **kw)
    if fate_lo == fate_hi:
        raise NoBracket(f"all probes {fate_lo} on [{lo}, {hi}]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        fate = classify(spec, x0, mid, x_probe, **kw)
        if fate == fate_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def qed_p_root(coeffs: Sequence[float], a: float = 0.9, b: float = 1.1, xtol: float = 1e-10) -> float:
    """Root of P(x) = sum coeffs[i] x**i on (a, b) by bisection."""
    fa, fb = poly_eval(coeffs, a), poly_eval(coeffs, b)
    if fa * fb >= 0:
        raise NoSignChange(f"P({a}) = {fa} and P({b}) = {fb} have the same sign")
    return bisect(lambda x: poly_eval(coeffs, x), a, b, xtol=xtol)


# 4-loop QED primitive polynomial (coefficient of x**i at index i)
QED_4LOOP = (0.0, 1 / 3, 1 / 4, -0.0312 + 0.06037, -0.6755 + 0.05074)
QED_2LOOP = (0.0, 1 / 3, 1 / 4)


# -- Lambert W ----------------------------------------------------------------------

def lambertw(z: float, tol: float = 1e-15, max_iter: int = 100) -> float:
    """Principal branch W_0(z) for real z >= -1/e, by Halley iteration."""
    if z < -1 / math.e:
        raise DomainError("W_0 is real only for z >= -1/e")
    if z == 0:
        return 0.0
    if z == -1 / math.e:
        return -1.0
    if z < 1:
        # series about the branch point gives a good start near -1/e
        p = math.sqrt(max(2 * (math.e * z + 1), 0.0))
        w = -1 + p - p * p / 3 + 11 / 72 * p**3 if z < -0.25 else z * (1 - z)
    else:
        w = math.log(z)
        if w > 1:
            w -= math.log(w)
    for _ in range(max_iter):
        ew = math.exp(w)
        f = w * ew - z
        wp1 = w + 1
        if wp1 == 0:
            break
        step = f / (ew * wp1 - (w + 2) * f / (2 * wp1))
        w -= step
        if abs(step) <= tol * (1 + abs(w)):
            break
    return w


def lambert_family(x: float, C: float) -> float:
    """g(x) = x + x W(C exp(-(1+x)/x)), a solution of the s = 1, m = 1, P = x equation."""
    return x + x * lambertw(C * math.exp(-(1 + x) / x))


def lambert_family_derivative(x: float, C: float) -> float:
    w = lambertw(C * math.exp(-(1 + x) / x))
    return 1 + w + w / (x * (1 + w))


# -- vector fields ------------------------------------------------------------------

@dataclass
class FieldData:
    x: np.ndarray
    y: np.ndarray
    dx: np.ndarray
    dy: np.ndarray
    slope: np.ndarray
    mask: np.ndarray  # True where the field is undefined

    def to_dat(self) -> str:
        lines = ["# x gamma dx dgamma"]
        for xi, yi, u, v, bad in zip(self.x.ravel(), self.y.ravel(), self.dx.ravel(), self.dy.ravel(),
                                    self.mask.ravel()):
            if bad:
                lines.append(f"{xi:.10g} {yi:.10g} nan nan")
            else:
                lines.append(f"{xi:.10g} {yi:.10g} {u:.10g} {v:.10g}")
        return "\n".join(lines) + "\n"


def emit_field(spec: OdeSpec, grid: tuple[int, int] = (30, 30),
               xrange: tuple[float, float] | None = None,
               yrange: tuple[float, float] | None = None) -> FieldData:
    """Unit direction vectors of (1, g') on a W x H grid; singular points masked."""
    W, H = grid
    if W < 2 or H < 2:
        raise ValueError("grid must be at least 2x2")
    xa, xb = xrange or spec.xrange
    ya, yb = yrange or spec.yrange
    xs = np.linspace(xa, xb, W)
    ys = np.linspace(ya, yb, H)
    X, Y = np.meshgrid(xs, ys)
    slope = np.full(X.shape, np.nan)
    mask = np.zeros(X.shape, dtype=bool)
    for idx in np.ndindex(X.shape):
        try:
            slope[idx] = rhs_single(float(X[idx]), float(Y[idx]), spec)
        except SingularPoint:
            mask[idx] = True
    norm = np.sqrt(1 + np.where(mask, 0.0, slope) ** 2)
    dx = np.where(mask, np.nan, 1 / norm)
    dy = np.where(mask, np.nan, slope / norm)
    return FieldData(X, Y, dx, dy, slope, mask)


def field_svg(data: FieldData, spec: OdeSpec | None = None, trajectories: Sequence[Trajectory] = (),
              size: int = 600, with_nullcline: bool = True) -> str:
    """Standalone SVG quiver plot (deterministic: no timestamps or ids)."""
    pad = 40
    xa, xb = float(data.x.min()), float(data.x.max())
    ya, yb = float(data.y.min()), float(data.y.max())
    span_x = xb - xa or 1.0
    span_y = yb - ya or 1.0

    def px(x):
        return pad + (x - xa) / span_x * (size - 2 * pad)

    def py(y):
        return size - pad - (y - ya) / span_y * (size - 2 * pad)

    W = data.x.shape[1]
    H = data.x.shape[0]
    arrow = 0.4 * min((size - 2 * pad) / max(W - 1, 1), (size - 2 * pad) / max(H - 1, 1))
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect x="0" y="0" width="{size}" height="{size}" fill="white"/>',
        f'<rect x="{pad}" y="{pad}" width="{size - 2 * pad}" height="{size - 2 * pad}" '
        'fill="none" stroke="black" stroke-width="1"/>',
        f'<text x="{pad}" y="{size - 10}" font-size="12">x: {xa:g} .. {xb:g}</text>',
        f'<text x="{size - pad - 120}" y="{size - 10}" font-size="12">gamma: {ya:g} .. {yb:g}</text>',
        '<g stroke="steelblue" stroke-width="1">',
    ]
    sx = (size - 2 * pad) / span_x
    sy = (size - 2 * pad) / span_y
    for idx in np.ndindex(data.x.shape):
        if data.mask[idx]:
            continue
        x0, y0 = float(data.x[idx]), float(data.y[idx])
        u, v = float(data.dx[idx]) * sx, float(data.dy[idx]) * sy
        n = math.hypot(u, v) or 1.0
        u, v = u / n * arrow, v / n * arrow
        cx, cy = px(x0), py(y0)
        out.append(f'<line x1="{cx - u / 2:.2f}" y1="{cy + v / 2:.2f}" x2="{cx + u / 2:.2f}" '
                   f'y2="{cy - v / 2:.2f}"/>')
        out.append(f'<circle cx="{cx + u / 2:.2f}" cy="{cy - v / 2:.2f}" r="1.2" fill="steelblue"/>')
    out.append("</g>")
    if with_nullcline and spec is not None and spec.mode == "single":
        pts = []
        for x in np.linspace(xa, xb, 200):
            try:
                y = nullcline(spec, float(x))
            except DomainError:
                continue
            if ya <= y <= yb:
                pts.append(f"{px(x):.2f},{py(y):.2f}")
        if pts:
            out.append(f'<polyline points="{" ".join(pts)}" fill="none" stroke="crimson" '
                       'stroke-width="1.5"/>')
    for traj in trajectories:
        pts = [f"{px(float(a)):.2f},{py(float(b)):.2f}" for a, b in zip(traj.x, traj.g)
               if xa <= a <= xb and ya <= b <= yb]
        if len(pts) > 1:
            out.append(f'<polyline points="{" ".join(pts)}" fill="none" stroke="black" '
                       'stroke-width="1.2"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def zero_slope_crossings(data: FieldData) -> list[tuple[float, float, float]]:
    """(x, y_low, y_high) grid cells in each column where the slope changes sign."""
    out = []
    for j in range(data.x.shape[1]):
        col = data.slope[:, j]
        for i in range(len(col) - 1):
            a, b = col[i], col[i + 1]
            if np.isfinite(a) and np.isfinite(b) and a * b < 0:
                out.append((float(data.x[i, j]), float(data.y[i, j]), float(data.y[i + 1, j])))
    return out


def integrate_system(spec: OdeSpec, x0: float, g0: tuple[float, float], x_end: float,
                     rtol: float = 1e-9, atol: float = 1e-12, eps_die: float = EPS_DIE,
                     tau_max: float = 1e6) -> tuple[np.ndarray, np.ndarray, str]:
    """Integrate the two-residue system towards x_end.

    Uses the same autonomous form as :func:`integrate` (dx/dt = beta), so the
    beta = 0 locus is reached smoothly and reported as "died".
    """
    sp, sm = spec.s_pair
    ap, am = abs(sp), abs(sm)
    Pp, Pm = spec.P_pair
    beta0 = x0 * (ap * g0[0] + am * g0[1])
    if x0 <= 0:
        raise ValueError("x0 must be positive")
    if abs(beta0) < SINGULAR_EPS:
        return np.array([x0]), np.array([g0], dtype=float), "died"
    direction = 1.0 if beta0 > 0 else -1.0

    def f(t, y):
        x, gp, gm = y
        return [direction * x * (ap * gp + am * gm),
                direction * (gp - poly_eval(Pp, x) + _sign(sp) * gp * gp),
                direction * (gm - poly_eval(Pm, x) + _sign(sm) * gm * gm)]

    def ev_edge(t, y):
        return y[0] - x_end
    ev_edge.terminal, ev_edge.direction = True, 1

    def ev_die(t, y):
        return direction * (ap * y[1] + am * y[2]) - eps_die
    ev_die.terminal, ev_die.direction = True, -1

    def ev_runaway(t, y):
        return max(abs(y[1]), abs(y[2])) - RUNAWAY
    ev_runaway.terminal, ev_runaway.direction = True, 1

    sol = solve_ivp(f, (0.0, tau_max), [x0, g0[0], g0[1]], method="RK45", rtol=rtol, atol=atol,
                    events=[ev_edge, ev_die, ev_runaway])
    term = "step-underflow"
    if sol.status == 1:
        hit = [i for i, te in enumerate(sol.t_events) if len(te)]
        first = min(hit, key=lambda i: sol.t_events[i][0])
        term = ("reached-right-edge", "died", "left-window")[first]
    xs = sol.y[0]
    keep = np.concatenate([[True], np.diff(xs) > 0])
    return xs[keep], sol.y[1:].T[keep], term
