"""Alpha-cut envelope construction and the fuzzy-PDE verification engine.

Decides whether a fuzzified candidate solution of

    (dV/dx1) / (dV/dx2) = F(x1, x2, parameters)

is a Buckley-Feuring solution.  The candidate is a crisp expression G whose
parameters are triangular fuzzy numbers; for every grid sample (x1, x2, alpha)
the engine forms the envelope

    y1 = min G over the alpha-cut box,   y2 = max G over the box,

applies the quotient-of-partials operator to each end to obtain the Gamma
curves, and then gates five checks in a fixed order: structure (positivity and
one-signed dG/dx2), fuzzy validity of the Y/F envelopes, the three
differentiability conditions on Gamma, equality of Gamma with the F envelope,
and boundary conditions.

Envelope strategy
-----------------
Each parameter's partial of G is probed at the box center and at every box
corner.  If no parameter shows strictly opposite signs across those probes,
the extremum is attained at a corner and the envelope is the exact min/max of
the corner values (ties between corners are re-broken by probing the tied
corners at a point nudged slightly into the domain interior, which keeps the
corner selection consistent with the envelope's one-sided derivative at
boundary samples).  Otherwise the sample falls back to dense sampling of the
box, is flagged approximate, and its Gamma values are later computed by
central finite differences of the envelope instead of the symbolic partials.
Checks that consume approximate samples run at a widened tolerance
(``FALLBACK_TOL``) because the fallback route carries sampling plus O(h^2)
noise that the fully symbolic route does not.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .expr import EvalError, Expression, differentiate, evaluate, free_variables
from .fuzzy import FuzzyVector, alpha_cut

# verdict outcomes
BF_SOLUTION = "BF_SOLUTION"
NOT_FUZZY_VALID = "NOT_FUZZY_VALID"
NOT_DIFFERENTIABLE = "NOT_DIFFERENTIABLE"
EQUALITY_FAILS = "EQUALITY_FAILS"
BOUNDARY_FAILS = "BOUNDARY_FAILS"
STRUCTURE_FAILS = "STRUCTURE_FAILS"

# envelope curve roles
ROLE_Y = "Y"
ROLE_F = "F"
ROLE_GAMMA = "GAMMA"

DEFAULT_EQ_TOL = 1e-8
DEFAULT_MONO_TOL = 1e-8
DEFAULT_DENOM_TOL = 1e-10
FALLBACK_TOL = 1e-4  # noise floor of the dense-sampling + finite-difference route
FALLBACK_BOX_SAMPLES = 33  # per-axis lattice density of the dense fallback
BOX_SAMPLE_BUDGET = 100_000  # total lattice size cap for many-parameter boxes
CORNER_PARAM_LIMIT = 16  # 2^k corner enumeration cap; beyond it everything falls back
EDGE_NUDGE_REL = 1e-4  # tie-break probe offset, relative to the axis range
FD_STEP_REL = 1e-5  # fallback finite-difference step, relative to the axis range

_CHECK_OUTCOME = (
    ("structure", STRUCTURE_FAILS),
    ("fuzzy_validity", NOT_FUZZY_VALID),
    ("differentiability", NOT_DIFFERENTIABLE),
    ("equality", EQUALITY_FAILS),
    ("boundary", BOUNDARY_FAILS),
)


class NearZeroDenominatorError(ArithmeticError):
    """|dY/dx2| fell below the denominator tolerance at some grid sample."""

    def __init__(self, x1: float, x2: float, alpha: float, value: float):
        super().__init__(
            f"near-zero envelope denominator |dY/dx2| = {abs(value):.3e} "
            f"at (x1={x1:g}, x2={x2:g}, alpha={alpha:g})"
        )
        self.location = (x1, x2, alpha)
        self.value = value


# --- problem geometry --------------------------------------------------------

@dataclass(frozen=True)
class DomainBox:
    """Rectangular (x1, x2) domain with open/closed ends and an optional predicate.

    Lower ends sit inside (0, M]: a closed lower end must be strictly positive,
    an open lower end may be 0 because sampling starts epsilon_edge inside it.
    The constraint expression, when present, restricts checks to samples where
    it evaluates >= 0.
    """

    x1_min: float
    x1_max: float
    x2_min: float
    x2_max: float
    x1_min_open: bool = False
    x1_max_open: bool = False
    x2_min_open: bool = False
    x2_max_open: bool = False
    constraint: Expression | None = None

    def __post_init__(self):
        for name, lo, hi, lo_open in (
            ("x1", self.x1_min, self.x1_max, self.x1_min_open),
            ("x2", self.x2_min, self.x2_max, self.x2_min_open),
        ):
            if not lo < hi:
                raise ValueError(f"{name} range is empty: [{lo}, {hi}]")
            if lo < 0.0 or (lo == 0.0 and not lo_open):
                raise ValueError(f"{name} lower bound must be positive (got {lo})")
        if self.constraint is not None:
            extra = free_variables(self.constraint) - {"x1", "x2"}
            if extra:
                raise ValueError(f"constraint may only use x1, x2; found {sorted(extra)}")


@dataclass(frozen=True)
class GridSpec:
    n_x1: int = 41
    n_x2: int = 41
    n_alpha: int = 21
    epsilon_edge: float = 1e-6  # relative offset used to sample open interval ends

    def __post_init__(self):
        for name, n in (("n_x1", self.n_x1), ("n_x2", self.n_x2), ("n_alpha", self.n_alpha)):
            if n < 2:
                raise ValueError(f"{name} must be at least 2, got {n}")
        if not 0.0 < self.epsilon_edge < 0.5:
            raise ValueError(f"epsilon_edge must lie in (0, 0.5), got {self.epsilon_edge}")


@dataclass(frozen=True)
class Tolerances:
    eq_tol: float = DEFAULT_EQ_TOL
    mono_tol: float = DEFAULT_MONO_TOL
    denom_tol: float = DEFAULT_DENOM_TOL

    def __post_init__(self):
        for name, v in (("eq_tol", self.eq_tol), ("mono_tol", self.mono_tol), ("denom_tol", self.denom_tol)):
            if not v > 0.0:
                raise ValueError(f"{name} must be positive, got {v}")


@dataclass(frozen=True)
class BoundaryCondition:
    """Fix one variable at a constant and require the candidate envelope to
    match the target expression's envelope along that edge."""

    fix: str  # "x1" or "x2"
    at: float
    target: Expression
    target_text: str = ""

    def __post_init__(self):
        if self.fix not in ("x1", "x2"):
            raise ValueError(f"fix must be 'x1' or 'x2', got {self.fix!r}")


@dataclass(frozen=True)
class ProblemSpec:
    """Fully explicit problem statement consumed by :func:`verify`."""

    name: str
    g_text: str
    f_text: str
    g: Expression
    f: Expression
    parameters: FuzzyVector
    box: DomainBox
    grid: GridSpec = GridSpec()
    tolerances: Tolerances = Tolerances()
    boundary: tuple[BoundaryCondition, ...] = ()

    def __post_init__(self):
        if len(self.parameters) > CORNER_PARAM_LIMIT:
            raise ValueError(
                f"at most {CORNER_PARAM_LIMIT} fuzzy parameters are supported, "
                f"got {len(self.parameters)}"
            )
        allowed = set(self.parameters.names) | {"x1", "x2"}
        for label, e in (("G", self.g), ("F", self.f)):
            extra = free_variables(e) - allowed
            if extra:
                raise ValueError(f"{label} uses undeclared names {sorted(extra)}")
        for i, cond in enumerate(self.boundary):
            lo, hi = (
                (self.box.x1_min, self.box.x1_max)
                if cond.fix == "x1"
                else (self.box.x2_min, self.box.x2_max)
            )
            if not lo <= cond.at <= hi:
                raise ValueError(
                    f"boundary condition {i}: at={cond.at} outside the closure [{lo}, {hi}] of {cond.fix}"
                )
            remaining = "x2" if cond.fix == "x1" else "x1"
            extra = free_variables(cond.target) - (set(self.parameters.names) | {remaining})
            if extra:
                raise ValueError(
                    f"boundary condition {i}: target may only use {remaining} and parameters; "
                    f"found {sorted(extra)}"
                )


# --- results -----------------------------------------------------------------

@dataclass
class EnvelopeCurve:
    """Sampled lower/upper values over the (x1, x2, alpha) grid for one role.

    ``approximate`` marks samples produced by the dense-sampling fallback;
    ``feasible`` is the (x1, x2) domain-constraint mask.
    """

    role: str
    x1: np.ndarray
    x2: np.ndarray
    alpha: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    approximate: np.ndarray
    feasible: np.ndarray

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.lower.shape


@dataclass
class CheckReport:
    name: str
    passed: bool
    worst_violation: float
    location: tuple[float, float, float] | None = None
    note: str = ""


@dataclass
class Verdict:
    """Decision outcome plus the per-check diagnostics that produced it."""

    outcome: str
    checks: list[CheckReport]
    problem_name: str
    grid: GridSpec
    tolerances: Tolerances

    def report(self, name: str) -> CheckReport:
        for check in self.checks:
            if check.name == name:
                return check
        raise KeyError(name)


# --- grid sampling -----------------------------------------------------------

def axis_points(lo: float, hi: float, lo_open: bool, hi_open: bool, n: int, eps_rel: float) -> np.ndarray:
    """Sample an interval: closed ends exactly, open ends offset by eps_rel*range."""
    off = eps_rel * (hi - lo)
    a = lo + off if lo_open else lo
    b = hi - off if hi_open else hi
    return np.linspace(a, b, n)


def grid_axes(box: DomainBox, grid: GridSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """The (x1, x2, alpha) sample coordinates; alpha covers the closed [0, 1]."""
    x1 = axis_points(box.x1_min, box.x1_max, box.x1_min_open, box.x1_max_open, grid.n_x1, grid.epsilon_edge)
    x2 = axis_points(box.x2_min, box.x2_max, box.x2_min_open, box.x2_max_open, grid.n_x2, grid.epsilon_edge)
    alpha = np.linspace(0.0, 1.0, grid.n_alpha)
    return x1, x2, alpha


def feasible_mask(box: DomainBox, X1, X2, shape) -> np.ndarray:
    if box.constraint is None:
        return np.ones(shape, dtype=bool)
    vals = np.broadcast_to(np.asarray(evaluate(box.constraint, {"x1": X1, "x2": X2}), dtype=float), shape)
    return vals >= 0.0


def _cut_arrays(params: FuzzyVector, alpha: float) -> tuple[np.ndarray, np.ndarray]:
    cuts = [alpha_cut(t, alpha) for t in params.numbers]
    return np.array([c.lo for c in cuts]), np.array([c.hi for c in cuts])


def _run_alpha_slices(work: Callable[[int], None], n_alpha: int, workers: int) -> None:
    """Run per-alpha slice jobs; results land in caller-owned arrays by index,
    so scheduling order cannot change the output.  Errors are re-raised for
    the smallest alpha index regardless of worker count."""
    if workers <= 1:
        for ki in range(n_alpha):
            work(ki)
        return
    errors: dict[int, BaseException] = {}

    def guarded(ki: int) -> None:
        try:
            work(ki)
        except BaseException as exc:  # noqa: BLE001 - re-raised deterministically below
            errors[ki] = exc

    with ThreadPoolExecutor(max_workers=workers) as pool:
        list(pool.map(guarded, range(n_alpha)))
    if errors:
        raise errors[min(errors)]


# --- envelope core -----------------------------------------------------------

def _as_mesh(value, shape) -> np.ndarray:
    return np.broadcast_to(np.asarray(value, dtype=float), shape)


def _box_lattice(los: np.ndarray, his: np.ndarray, m: int) -> np.ndarray:
    """(k, M) lattice over the parameter box, endpoints included, budget-capped."""
    k = len(los)
    m_eff = max(2, min(m, int(BOX_SAMPLE_BUDGET ** (1.0 / k))))
    if m_eff**k > 4 * BOX_SAMPLE_BUDGET:
        raise ValueError(f"parameter box too high-dimensional for dense sampling (k={k})")
    axes = [np.linspace(lo, hi, m_eff) for lo, hi in zip(los, his)]
    grids = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grids])


def _eval_box(expr: Expression, names, lattice: np.ndarray, x1f: np.ndarray, x2f: np.ndarray) -> np.ndarray:
    """Evaluate expr at every (sample point) x (lattice point); returns (q, M)."""
    binding = {"x1": x1f[:, None], "x2": x2f[:, None]}
    for j, name in enumerate(names):
        binding[name] = lattice[j][None, :]
    out = np.asarray(evaluate(expr, binding), dtype=float)
    return np.broadcast_to(out, (x1f.size, lattice.shape[1]))


def _corner_binding(base: dict, names, los, his, c: int) -> dict:
    binding = dict(base)
    for j, name in enumerate(names):
        binding[name] = his[j] if (c >> j) & 1 else los[j]
    return binding


def _mesh_envelope(
    expr: Expression,
    partials: list[Expression],
    names: tuple[str, ...],
    los: np.ndarray,
    his: np.ndarray,
    X1,
    X2,
    shape: tuple[int, ...],
    nudged: tuple[np.ndarray, np.ndarray] | None = None,
    m_fallback: int = FALLBACK_BOX_SAMPLES,
):
    """Envelope of ``expr`` over the parameter box at every mesh sample.

    Returns ``(lower, upper, corner_lo, corner_hi, fallback)``.  The corner
    arrays are bitmask indices of the extremal corners (bit j set = parameter j
    at its upper cut end) and are only produced when ``nudged`` probe
    coordinates are supplied; fallback samples carry corner index -1.
    """
    k = len(names)
    base = {"x1": X1, "x2": X2}
    widths = his - los
    want_corners = nudged is not None

    fallback = np.zeros(shape, dtype=bool)
    if k > CORNER_PARAM_LIMIT:
        fallback[...] = True
    else:
        mids = 0.5 * (los + his)
        center = dict(base)
        for j, name in enumerate(names):
            center[name] = mids[j]
        for j in range(k):
            if widths[j] == 0.0:
                continue  # degenerate axis: corners coincide, sign is irrelevant
            has_pos = np.zeros(shape, dtype=bool)
            has_neg = np.zeros(shape, dtype=bool)
            probes = [center] + [_corner_binding(base, names, los, his, c) for c in range(2**k)]
            for probe in probes:
                d = _as_mesh(evaluate(partials[j], probe), shape)
                has_pos |= d > 0.0
                has_neg |= d < 0.0
            fallback |= has_pos & has_neg

    lower = np.full(shape, np.nan)
    upper = np.full(shape, np.nan)
    corner_lo = np.full(shape, -1, dtype=np.int64)
    corner_hi = np.full(shape, -1, dtype=np.int64)

    if k <= CORNER_PARAM_LIMIT:
        corners = 2**k
        values = np.empty((corners,) + tuple(shape))
        for c in range(corners):
            values[c] = _as_mesh(evaluate(expr, _corner_binding(base, names, los, his, c)), shape)
        lower = values.min(axis=0)
        upper = values.max(axis=0)
        if want_corners:
            lo_tied = (values == lower).sum(axis=0) > 1
            hi_tied = (values == upper).sum(axis=0) > 1
            if lo_tied.any() or hi_tied.any():
                # several corners attain the extremum (e.g. the partial vanishes
                # along an axis); keep the corner that is extremal at a probe
                # point nudged into the domain interior, so the symbolic Gamma
                # matches the envelope's one-sided derivative
                X1n, X2n = nudged
                probed = np.empty_like(values)
                for c in range(corners):
                    probed[c] = _as_mesh(
                        evaluate(expr, _corner_binding({"x1": X1n, "x2": X2n}, names, los, his, c)), shape
                    )
                corner_lo = np.where(values == lower, probed, np.inf).argmin(axis=0)
                corner_hi = np.where(values == upper, probed, -np.inf).argmax(axis=0)
            else:
                corner_lo = values.argmin(axis=0)
                corner_hi = values.argmax(axis=0)

    if fallback.any():
        idx = np.nonzero(fallback)
        x1f = _as_mesh(X1, shape)[idx]
        x2f = _as_mesh(X2, shape)[idx]
        lattice = _box_lattice(los, his, m_fallback)
        w = _eval_box(expr, names, lattice, x1f, x2f)
        lower[idx] = w.min(axis=1)
        upper[idx] = w.max(axis=1)
        corner_lo[idx] = -1
        corner_hi[idx] = -1

    return lower, upper, corner_lo, corner_hi, fallback


def _nudged_coords(X1, X2, shape, x1_bounds, x2_bounds):
    """Probe coordinates one small step into the interior of the sampled box."""
    lo1, hi1 = x1_bounds
    lo2, hi2 = x2_bounds
    d1 = EDGE_NUDGE_REL * (hi1 - lo1)
    d2 = EDGE_NUDGE_REL * (hi2 - lo2)
    x1 = _as_mesh(X1, shape)
    x2 = _as_mesh(X2, shape)
    X1n = np.where(x1 + d1 <= hi1, x1 + d1, x1 - d1)
    X2n = np.where(x2 + d2 <= hi2, x2 + d2, x2 - d2)
    return X1n, X2n


def envelope(
    expr: Expression,
    params: FuzzyVector,
    x1: float,
    x2: float,
    alpha: float,
    m_fallback: int = FALLBACK_BOX_SAMPLES,
) -> tuple[float, float]:
    """(min, max) of ``expr`` over the parameter cut box at one (x1, x2, alpha)."""
    partials = [differentiate(expr, name) for name in params.names]
    los, his = _cut_arrays(params, alpha)
    lower, upper, _, _, _ = _mesh_envelope(
        expr, partials, params.names, los, his, np.float64(x1), np.float64(x2), (1,),
        m_fallback=m_fallback,
    )
    return float(lower[0]), float(upper[0])


def envelope_curve(
    expr: Expression,
    params: FuzzyVector,
    box: DomainBox,
    grid: GridSpec,
    role: str,
    workers: int = 1,
) -> EnvelopeCurve:
    """Sample the envelope of ``expr`` over the whole (x1, x2, alpha) grid."""
    x1p, x2p, alphas = grid_axes(box, grid)
    X1, X2 = x1p[:, None], x2p[None, :]
    shape = (grid.n_x1, grid.n_x2)
    partials = [differentiate(expr, name) for name in params.names]

    lower = np.empty(shape + (grid.n_alpha,))
    upper = np.empty_like(lower)
    approx = np.zeros(shape + (grid.n_alpha,), dtype=bool)

    def work(ki: int) -> None:
        los, his = _cut_arrays(params, float(alphas[ki]))
        lo, up, _, _, fb = _mesh_envelope(expr, partials, params.names, los, his, X1, X2, shape)
        lower[:, :, ki] = lo
        upper[:, :, ki] = up
        approx[:, :, ki] = fb

    _run_alpha_slices(work, grid.n_alpha, workers)
    feas = feasible_mask(box, X1, X2, shape)
    return EnvelopeCurve(role, x1p, x2p, alphas, lower, upper, approx, feas)


# --- Gamma curves ------------------------------------------------------------

def _first_true_location(mask: np.ndarray, x1f, x2f, alpha: float, values: np.ndarray):
    pos = int(np.argmax(mask))
    return (float(x1f[pos]), float(x2f[pos]), float(alpha)), float(values[pos])


def gamma_curves(
    g: Expression,
    params: FuzzyVector,
    box: DomainBox,
    grid: GridSpec,
    denom_tol: float = DEFAULT_DENOM_TOL,
    workers: int = 1,
) -> EnvelopeCurve:
    """Apply the quotient-of-partials operator to both envelope ends of ``g``.

    Corner-strategy samples substitute the envelope-selecting corner parameters
    into the symbolic partials of ``g``; fallback samples use central finite
    differences of the densely sampled envelope (one-sided at domain edges).

    Raises :class:`NearZeroDenominatorError` when |dY/dx2| < denom_tol at a
    feasible sample; the caller reports that as structure evidence, since it
    means the candidate is not strictly monotone in x2 along that envelope end.
    """
    x1p, x2p, alphas = grid_axes(box, grid)
    X1, X2 = x1p[:, None], x2p[None, :]
    shape = (grid.n_x1, grid.n_x2)
    names = params.names
    partials = [differentiate(g, name) for name in names]
    dg_dx1 = differentiate(g, "x1")
    dg_dx2 = differentiate(g, "x2")
    x1_bounds = (float(x1p[0]), float(x1p[-1]))
    x2_bounds = (float(x2p[0]), float(x2p[-1]))
    nudged = _nudged_coords(X1, X2, shape, x1_bounds, x2_bounds)
    feas = feasible_mask(box, X1, X2, shape)

    gamma_lo = np.empty(shape + (grid.n_alpha,))
    gamma_hi = np.empty_like(gamma_lo)
    approx = np.zeros(shape + (grid.n_alpha,), dtype=bool)

    def corner_gamma(corner: np.ndarray, los, his, fb: np.ndarray, alpha: float) -> np.ndarray:
        binding = {"x1": X1, "x2": X2}
        for j, name in enumerate(names):
            bit = (corner >> j) & 1
            binding[name] = np.where(bit == 1, his[j], los[j])
        num = _as_mesh(evaluate(dg_dx1, binding), shape)
        den = _as_mesh(evaluate(dg_dx2, binding), shape)
        exact = feas & ~fb
        bad = exact & (np.abs(den) < denom_tol)
        if bad.any():
            pos = np.argwhere(bad)[0]
            raise NearZeroDenominatorError(
                float(x1p[pos[0]]), float(x2p[pos[1]]), alpha, float(den[tuple(pos)])
            )
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.divide(num, den)

    def fallback_gamma(fb, los, his, lo_env, up_env, alpha):
        idx = np.nonzero(fb)
        x1f = _as_mesh(X1, shape)[idx]
        x2f = _as_mesh(X2, shape)[idx]
        feas_f = feas[idx]
        lattice = _box_lattice(los, his, FALLBACK_BOX_SAMPLES)

        def env_at(xa, xb):
            w = _eval_box(g, names, lattice, xa, xb)
            return w.min(axis=1), w.max(axis=1)

        results = []
        for var_idx, (pts, bounds, other) in enumerate(
            (
                (x1f, x1_bounds, x2f),
                (x2f, x2_bounds, x1f),
            )
        ):
            lo_b, hi_b = bounds
            h = FD_STEP_REL * (hi_b - lo_b)
            up_ok = pts + h <= hi_b
            dn_ok = pts - h >= lo_b
            plus = np.minimum(pts + h, hi_b)
            minus = np.maximum(pts - h, lo_b)
            if var_idx == 0:
                y1p, y2p = env_at(plus, other)
                y1m, y2m = env_at(minus, other)
            else:
                y1p, y2p = env_at(other, plus)
                y1m, y2m = env_at(other, minus)
            y1c, y2c = lo_env[idx], up_env[idx]
            both = up_ok & dn_ok
            d_y1 = np.where(both, (y1p - y1m) / (2 * h), np.where(up_ok, (y1p - y1c) / h, (y1c - y1m) / h))
            d_y2 = np.where(both, (y2p - y2m) / (2 * h), np.where(up_ok, (y2p - y2c) / h, (y2c - y2m) / h))
            results.append((d_y1, d_y2))

        (num1, num2), (den1, den2) = results
        for den in (den1, den2):
            bad = feas_f & (np.abs(den) < denom_tol)
            if bad.any():
                (loc, value) = _first_true_location(bad, x1f, x2f, alpha, den)
                raise NearZeroDenominatorError(loc[0], loc[1], alpha, value)
        with np.errstate(divide="ignore", invalid="ignore"):
            return idx, num1 / den1, num2 / den2

    def work(ki: int) -> None:
        alpha = float(alphas[ki])
        los, his = _cut_arrays(params, alpha)
        lo_env, up_env, c_lo, c_hi, fb = _mesh_envelope(
            g, partials, names, los, his, X1, X2, shape, nudged=nudged
        )
        gamma_lo[:, :, ki] = corner_gamma(c_lo, los, his, fb, alpha)
        gamma_hi[:, :, ki] = corner_gamma(c_hi, los, his, fb, alpha)
        if fb.any():
            idx, g1f, g2f = fallback_gamma(fb, los, his, lo_env, up_env, alpha)
            gamma_lo[:, :, ki][idx] = g1f
            gamma_hi[:, :, ki][idx] = g2f
        approx[:, :, ki] = fb

    _run_alpha_slices(work, grid.n_alpha, workers)
    return EnvelopeCurve(ROLE_GAMMA, x1p, x2p, alphas, gamma_lo, gamma_hi, approx, feas)


# --- checks ------------------------------------------------------------------

def _masked_worst(values: np.ndarray, mask: np.ndarray, axes: tuple[np.ndarray, ...]):
    """Max of values over mask plus its (x1, x2, alpha) location; None if empty."""
    if not mask.any():
        return None, None
    flat = np.where(mask, values, -np.inf)
    pos = np.unravel_index(int(flat.argmax()), flat.shape)
    loc = tuple(float(ax[i]) for ax, i in zip(axes, pos))
    return float(flat[pos]), loc


def _widen(tol: float, curve_has_fallback: bool) -> float:
    return max(tol, FALLBACK_TOL) if curve_has_fallback else tol


def _fallback_note(widened: bool, tol_eff: float) -> str:
    if not widened:
        return ""
    return f"dense-sampling fallback in effect; tolerance widened to {tol_eff:g}"


def check_structure(
    g: Expression,
    params: FuzzyVector,
    box: DomainBox,
    grid: GridSpec,
    denom_tol: float = DEFAULT_DENOM_TOL,
    workers: int = 1,
) -> CheckReport:
    """G must be strictly positive, and dG/dx2 must keep one global sign with
    |dG/dx2| >= denom_tol, at every grid sample and every cut-box corner."""
    if len(params) > CORNER_PARAM_LIMIT:
        raise ValueError(f"structure check enumerates box corners; at most {CORNER_PARAM_LIMIT} parameters")
    x1p, x2p, alphas = grid_axes(box, grid)
    X1, X2 = x1p[:, None], x2p[None, :]
    shape = (grid.n_x1, grid.n_x2)
    feas = feasible_mask(box, X1, X2, shape)
    dg_dx2 = differentiate(g, "x2")
    names = params.names
    base = {"x1": X1, "x2": X2}

    slots = {}  # ki -> (min_g, loc, min_d2, loc, max_d2, loc)

    def scan(values: np.ndarray, find_min: bool):
        flat = np.where(feas, values, np.inf if find_min else -np.inf)
        pos = np.unravel_index(int(flat.argmin() if find_min else flat.argmax()), shape)
        return float(flat[pos]), pos

    def work(ki: int) -> None:
        alpha = float(alphas[ki])
        los, his = _cut_arrays(params, alpha)
        best = None
        for c in range(2 ** len(names)):
            binding = _corner_binding(base, names, los, his, c)
            gv = _as_mesh(evaluate(g, binding), shape)
            d2 = _as_mesh(evaluate(dg_dx2, binding), shape)
            g_min, g_pos = scan(gv, find_min=True)
            d_min, d_min_pos = scan(d2, find_min=True)
            d_max, d_max_pos = scan(d2, find_min=False)
            if best is None:
                best = [g_min, g_pos, d_min, d_min_pos, d_max, d_max_pos]
            else:
                if g_min < best[0]:
                    best[0], best[1] = g_min, g_pos
                if d_min < best[2]:
                    best[2], best[3] = d_min, d_min_pos
                if d_max > best[4]:
                    best[4], best[5] = d_max, d_max_pos
        slots[ki] = best

    if not feas.any():
        raise ValueError("no grid samples satisfy the domain constraint")
    _run_alpha_slices(work, grid.n_alpha, workers)

    g_min, g_loc = np.inf, None
    d_min, d_min_loc = np.inf, None
    d_max, d_max_loc = -np.inf, None
    for ki in range(grid.n_alpha):
        gm, gp, dm, dmp, dx, dxp = slots[ki]
        alpha = float(alphas[ki])
        if gm < g_min:
            g_min, g_loc = gm, (float(x1p[gp[0]]), float(x2p[gp[1]]), alpha)
        if dm < d_min:
            d_min, d_min_loc = dm, (float(x1p[dmp[0]]), float(x2p[dmp[1]]), alpha)
        if dx > d_max:
            d_max, d_max_loc = dx, (float(x1p[dxp[0]]), float(x2p[dxp[1]]), alpha)

    pos_violation = -g_min  # > 0 (or == 0) iff G fails strict positivity
    pos_ok = g_min > 0.0
    # one global sign: the better hypothesis decides the slack
    if d_min >= -d_max:  # positive sign fits better
        sign_violation = denom_tol - d_min
        sign_loc = d_min_loc
    else:
        sign_violation = denom_tol + d_max
        sign_loc = d_max_loc
    sign_ok = sign_violation <= 0.0

    if not pos_ok and (pos_violation >= sign_violation or sign_ok):
        worst, loc, note = pos_violation, g_loc, "G is not strictly positive on the grid"
    elif not sign_ok:
        worst, loc, note = sign_violation, sign_loc, "dG/dx2 is not one-signed and bounded away from zero"
    else:
        worst = max(pos_violation, sign_violation)
        loc = g_loc if pos_violation >= sign_violation else sign_loc
        note = ""
    return CheckReport("structure", pos_ok and sign_ok, worst, loc, note)


def check_fuzzy_validity(curves: list[EnvelopeCurve]) -> CheckReport:
    """Every envelope must satisfy lower <= upper at every feasible sample."""
    worst, loc, role = -np.inf, None, None
    for curve in curves:
        mask = curve.feasible[:, :, None] & np.ones(curve.shape, dtype=bool)
        v, l = _masked_worst(curve.lower - curve.upper, mask, (curve.x1, curve.x2, curve.alpha))
        if v is not None and v > worst:
            worst, loc, role = v, l, curve.role
    if loc is None:
        return CheckReport("fuzzy_validity", True, 0.0, None, "no feasible samples")
    passed = worst <= 0.0
    note = "" if passed else f"lower exceeds upper in the {role} envelope"
    return CheckReport("fuzzy_validity", passed, worst, loc, note)


def check_differentiability(gamma: EnvelopeCurve, tol: float = DEFAULT_MONO_TOL) -> CheckReport:
    """The three fuzzy-number conditions on the Gamma interval:

    1. Gamma_1 non-decreasing in alpha,
    2. Gamma_2 non-increasing in alpha,
    3. Gamma_1 <= Gamma_2 at alpha = 1,

    each within ``tol`` slack at every feasible (x1, x2).
    """
    feas3 = gamma.feasible[:, :, None] & np.ones(gamma.shape, dtype=bool)
    axes = (gamma.x1, gamma.x2, gamma.alpha)
    tol_eff = _widen(tol, bool((gamma.approximate & feas3).any()))

    # condition 1: drops of Gamma_1 across successive alpha samples
    d1 = -(gamma.lower[:, :, 1:] - gamma.lower[:, :, :-1])
    v1, l1 = _masked_worst(d1, feas3[:, :, 1:], (gamma.x1, gamma.x2, gamma.alpha[1:]))
    # condition 2: rises of Gamma_2
    d2 = gamma.upper[:, :, 1:] - gamma.upper[:, :, :-1]
    v2, l2 = _masked_worst(d2, feas3[:, :, 1:], (gamma.x1, gamma.x2, gamma.alpha[1:]))
    # condition 3 at the core cut
    c3 = gamma.lower[:, :, -1] - gamma.upper[:, :, -1]
    v3, l3 = _masked_worst(c3[:, :, None], feas3[:, :, -1:], (gamma.x1, gamma.x2, gamma.alpha[-1:]))

    candidates = [(v, l, i + 1) for i, (v, l) in enumerate(((v1, l1), (v2, l2), (v3, l3))) if v is not None]
    if not candidates:
        return CheckReport("differentiability", True, 0.0, None, "no feasible samples")
    worst, loc, cond = max(candidates, key=lambda t: t[0])
    passed = worst <= tol_eff
    note = _fallback_note(tol_eff != tol, tol_eff)
    if not passed:
        prefix = f"condition {cond} violated"
        note = f"{prefix}; {note}" if note else prefix
    return CheckReport("differentiability", passed, worst, loc, note)


def check_equality(
    gamma: EnvelopeCurve,
    f: Expression,
    params: FuzzyVector,
    box: DomainBox,
    grid: GridSpec,
    tol: float = DEFAULT_EQ_TOL,
    workers: int = 1,
    f_curve: EnvelopeCurve | None = None,
) -> CheckReport:
    """Gamma must equal the F envelope end-to-end: |Gamma_i - f_i| <= tol*(1+|f_i|)."""
    if f_curve is None:
        f_curve = envelope_curve(f, params, box, grid, ROLE_F, workers=workers)
    feas3 = gamma.feasible[:, :, None] & np.ones(gamma.shape, dtype=bool)
    resid_lo = np.abs(gamma.lower - f_curve.lower) / (1.0 + np.abs(f_curve.lower))
    resid_hi = np.abs(gamma.upper - f_curve.upper) / (1.0 + np.abs(f_curve.upper))
    resid = np.maximum(resid_lo, resid_hi)
    worst, loc = _masked_worst(resid, feas3, (gamma.x1, gamma.x2, gamma.alpha))
    if worst is None:
        return CheckReport("equality", True, 0.0, None, "no feasible samples")
    has_fb = bool(((gamma.approximate | f_curve.approximate) & feas3).any())
    tol_eff = _widen(tol, has_fb)
    passed = worst <= tol_eff
    return CheckReport("equality", passed, worst, loc, _fallback_note(tol_eff != tol, tol_eff))


def check_boundary(
    candidate: Expression,
    params: FuzzyVector,
    conditions: tuple[BoundaryCondition, ...],
    box: DomainBox,
    grid: GridSpec,
    tol: float = DEFAULT_EQ_TOL,
    workers: int = 1,
) -> CheckReport:
    """Candidate envelope must match each target envelope endpoint-wise on its edge."""
    if not conditions:
        return CheckReport("boundary", True, 0.0, None, "no conditions")

    _, _, alphas = grid_axes(box, grid)
    names = params.names
    cand_partials = [differentiate(candidate, name) for name in names]
    worst, loc = -np.inf, None
    any_fb = False

    for cond in conditions:
        if cond.fix == "x2":
            pts = axis_points(box.x1_min, box.x1_max, box.x1_min_open, box.x1_max_open, grid.n_x1, grid.epsilon_edge)
            X1, X2 = pts, np.full_like(pts, cond.at)
        else:
            pts = axis_points(box.x2_min, box.x2_max, box.x2_min_open, box.x2_max_open, grid.n_x2, grid.epsilon_edge)
            X1, X2 = np.full_like(pts, cond.at), pts
        shape = pts.shape
        feas = feasible_mask(box, X1, X2, shape)
        if not feas.any():
            continue
        target_partials = [differentiate(cond.target, name) for name in names]

        for alpha in alphas:
            los, his = _cut_arrays(params, float(alpha))
            c_lo, c_hi, _, _, fb_c = _mesh_envelope(candidate, cand_partials, names, los, his, X1, X2, shape)
            t_lo, t_hi, _, _, fb_t = _mesh_envelope(cond.target, target_partials, names, los, his, X1, X2, shape)
            any_fb = any_fb or bool(((fb_c | fb_t) & feas).any())
            resid = np.maximum(
                np.abs(c_lo - t_lo) / (1.0 + np.abs(t_lo)),
                np.abs(c_hi - t_hi) / (1.0 + np.abs(t_hi)),
            )
            flat = np.where(feas, resid, -np.inf)
            pos = int(flat.argmax())
            if flat[pos] > worst:
                worst = float(flat[pos])
                loc = (float(X1[pos]), float(X2[pos]), float(alpha))

    if loc is None:
        return CheckReport("boundary", True, 0.0, None, "no feasible boundary samples")
    tol_eff = _widen(tol, any_fb)
    passed = worst <= tol_eff
    return CheckReport("boundary", passed, worst, loc, _fallback_note(tol_eff != tol, tol_eff))


# --- verdict -----------------------------------------------------------------

def _structure_evidence(previous: CheckReport, err: Exception) -> CheckReport:
    loc = getattr(err, "location", None) or previous.location
    worst = previous.worst_violation if not previous.passed else 0.0
    note = f"{previous.note}; {err}" if previous.note else str(err)
    return CheckReport("structure", False, worst, loc, note)


def verify(problem: ProblemSpec, workers: int | None = None) -> Verdict:
    """Run the full gate sequence on a problem and assemble the verdict.

    Gate order: structure, fuzzy validity of the Y/F envelopes,
    differentiability, equality with F, boundary conditions.  The outcome is
    the first failing gate (or BF_SOLUTION), but every report that could be
    computed is carried for diagnostics.  Near-zero envelope denominators and
    expression domain errors surface as structure evidence.
    """
    workers = int(workers) if workers else 1
    x1p, x2p, _ = grid_axes(problem.box, problem.grid)
    feas = feasible_mask(problem.box, x1p[:, None], x2p[None, :], (problem.grid.n_x1, problem.grid.n_x2))
    if not feas.any():
        raise ValueError("no grid samples satisfy the domain constraint")

    tols = problem.tolerances
    reports: dict[str, CheckReport] = {}
    reports["structure"] = check_structure(
        problem.g, problem.parameters, problem.box, problem.grid, tols.denom_tol, workers
    )

    f_curve = None
    try:
        y_curve = envelope_curve(problem.g, problem.parameters, problem.box, problem.grid, ROLE_Y, workers)
        f_curve = envelope_curve(problem.f, problem.parameters, problem.box, problem.grid, ROLE_F, workers)
        reports["fuzzy_validity"] = check_fuzzy_validity([y_curve, f_curve])
    except EvalError as err:
        reports["structure"] = _structure_evidence(reports["structure"], err)

    try:
        gamma = gamma_curves(
            problem.g, problem.parameters, problem.box, problem.grid, tols.denom_tol, workers
        )
        reports["differentiability"] = check_differentiability(gamma, tols.mono_tol)
        reports["equality"] = check_equality(
            gamma, problem.f, problem.parameters, problem.box, problem.grid,
            tols.eq_tol, workers, f_curve=f_curve,
        )
    except (NearZeroDenominatorError, EvalError) as err:
        reports["structure"] = _structure_evidence(reports["structure"], err)

    try:
        reports["boundary"] = check_boundary(
            problem.g, problem.parameters, problem.boundary, problem.box, problem.grid,
            tols.eq_tol, workers,
        )
    except EvalError as err:
        reports["structure"] = _structure_evidence(reports["structure"], err)

    outcome = BF_SOLUTION
    for name, failure in _CHECK_OUTCOME:
        if name in reports and not reports[name].passed:
            outcome = failure
            break

    checks = [reports[name] for name, _ in _CHECK_OUTCOME if name in reports]
    return Verdict(outcome, checks, problem.name, problem.grid, problem.tolerances)


def compute_curves(problem: ProblemSpec, workers: int | None = None) -> list[EnvelopeCurve]:
    """The Y, F and GAMMA curves for a problem, in that order (plot/CSV surface)."""
    workers = int(workers) if workers else 1
    return [
        envelope_curve(problem.g, problem.parameters, problem.box, problem.grid, ROLE_Y, workers),
        envelope_curve(problem.f, problem.parameters, problem.box, problem.grid, ROLE_F, workers),
        gamma_curves(problem.g, problem.parameters, problem.box, problem.grid,
                     problem.tolerances.denom_tol, workers),
    ]
