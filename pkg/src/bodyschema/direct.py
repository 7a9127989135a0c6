"""DIRECT (DIviding RECTangles) global minimization over a box.

Plain Jones-style DIRECT: the box is mapped to the unit cube, rectangle
sizes are l2 half-diagonals, potentially optimal rectangles are read off
the lower-right convex hull of (size, f) and trisected along all of their
longest sides. Fully deterministic.
"""

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True, eq=False)
class SearchBox:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.array(self.lower, dtype=float).reshape(-1)
        hi = np.array(self.upper, dtype=float).reshape(-1)
        if lo.shape != hi.shape or not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise ValueError("box bounds must be finite and of equal length")
        if np.any(lo >= hi):
            raise ValueError("box needs lower < upper in every dimension")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self):
        return self.lower.shape[0]

    def from_unit(self, u):
        x = self.lower + np.asarray(u, dtype=float) * (self.upper - self.lower)
        return np.clip(x, self.lower, self.upper)


@dataclass(frozen=True)
class DirectConfig:
    max_evals: int = 200
    epsilon: float = 1e-4

    def __post_init__(self):
        if self.max_evals < 1:
            raise ValueError("max_evals must be at least 1")
        if self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")


@dataclass(eq=False)
class HyperRect:
    center: np.ndarray  # unit-cube coordinates
    side_levels: np.ndarray  # side length in dim i is 3**-level[i]
    f_center: float

    @property
    def sides(self):
        return 3.0 ** (-self.side_levels.astype(float))

    @property
    def size(self):
        return 0.5 * float(np.sqrt(np.sum(self.sides**2)))

    @property
    def volume(self):
        return float(np.prod(self.sides))


@dataclass
class DirectResult:
    x_best: np.ndarray
    f_best: float
    evals_used: int
    points: list = field(default_factory=list)  # every evaluated x, in order
    values: list = field(default_factory=list)


class _BudgetExhausted(Exception):
    pass


class _Evaluator:
    """Counts evaluations, records the trace and keeps the incumbent.

    Ties keep the earliest point.
    """

    def __init__(self, objective, box, max_evals):
        self.objective = objective
        self.box = box
        self.max_evals = max_evals
        self.points = []
        self.values = []
        self.best_index = -1

    def __call__(self, u):
        if len(self.values) >= self.max_evals:
            raise _BudgetExhausted
        x = self.box.from_unit(u)
        f = float(self.objective(x))
        self.points.append(x)
        self.values.append(f)
        if self.best_index < 0 or f < self.values[self.best_index]:
            self.best_index = len(self.values) - 1
        return f

    @property
    def f_min(self):
        return self.values[self.best_index]


def potentially_optimal(rects, f_min, epsilon):
    """Indices of potentially optimal rectangles.

    Rectangle j qualifies when some K > 0 gives f_j - K d_j <= f_i - K d_i
    for every i and f_j - K d_j <= f_min - epsilon |f_min|.
    """
    if not rects:
        raise ValueError("need at least one rectangle")
    sizes = np.array([r.size for r in rects])
    values = np.array([r.f_center for r in rects])
    # equal sizes compare on exact trisection levels, not float noise
    keys = np.round(sizes, 12)
    uniq = np.unique(keys)
    group_best = []
    for s in uniq:
        members = np.flatnonzero(keys == s)
        fbest = values[members].min()
        group_best.append((s, fbest, members[values[members] == fbest]))

    d = np.array([g[0] for g in group_best])
    f = np.array([g[1] for g in group_best])
    threshold = f_min - epsilon * abs(f_min)
    chosen = []
    for j in range(len(group_best)):
        smaller = d < d[j]
        larger = d > d[j]
        k_low = np.max((f[j] - f[smaller]) / (d[j] - d[smaller])) if smaller.any() else -np.inf
        k_up = np.min((f[larger] - f[j]) / (d[larger] - d[j])) if larger.any() else np.inf
        k_low = max(k_low, 0.0)
        if k_low > k_up:
            continue
        if np.isfinite(k_up):
            if f[j] - k_up * d[j] > threshold:
                continue
        chosen.extend(int(i) for i in group_best[j][2])
    return sorted(chosen)


def trisect(rect, evaluate):
    """Split ``rect`` along all its longest sides; returns the children.

    Dimensions are split in order of the best new value, so the most
    promising children keep the largest extent. The parent's value is
    reused for the middle piece.
    """
    level = rect.side_levels.min()
    dims = np.flatnonzero(rect.side_levels == level)
    delta = 3.0 ** (-float(level)) / 3.0
    samples = []
    for i in dims:
        e = np.zeros_like(rect.center)
        e[i] = delta
        c_plus, c_minus = rect.center + e, rect.center - e
        f_plus = evaluate(c_plus)
        f_minus = evaluate(c_minus)
        samples.append((min(f_plus, f_minus), int(i), c_plus, f_plus, c_minus, f_minus))
    samples.sort(key=lambda s: (s[0], s[1]))

    levels = rect.side_levels.copy()
    children = []
    for _, i, c_plus, f_plus, c_minus, f_minus in samples:
        levels = levels.copy()
        levels[i] += 1
        children.append(HyperRect(c_minus, levels.copy(), f_minus))
        children.append(HyperRect(c_plus, levels.copy(), f_plus))
    children.append(HyperRect(rect.center, levels, rect.f_center))
    return children


def minimize(objective, box, cfg=DirectConfig()):
    """Minimize ``objective`` over ``box`` with at most ``cfg.max_evals`` calls."""
    ev = _Evaluator(objective, box, cfg.max_evals)
    center = np.full(box.dim, 0.5)
    rects = [HyperRect(center, np.zeros(box.dim, dtype=int), ev(center))]
    try:
        while True:
            selected = potentially_optimal(rects, ev.f_min, cfg.epsilon)
            # largest first, then by value; a stable order keeps runs reproducible
            selected.sort(key=lambda i: (-rects[i].size, rects[i].f_center, i))
            picked = set(selected)
            new = []
            for i in selected:
                new.extend(trisect(rects[i], ev))
            rects = [r for i, r in enumerate(rects) if i not in picked] + new
    except _BudgetExhausted:
        pass
    best = ev.best_index
    return DirectResult(ev.points[best].copy(), ev.values[best], len(ev.values), ev.points, ev.values)
