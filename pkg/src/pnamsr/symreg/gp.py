"""Genetic-programming symbolic regression for univariate samples."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .expr import (
    Add,
    Const,
    Exp,
    Expression,
    Ln,
    Mul,
    Var,
    X,
    children,
    complexity,
    constants,
    depth,
    evaluate,
    fold_constants,
    eval_with_const_jacobian,
    get_at,
    has_nested_unary,
    iter_paths,
    replace_at,
    to_string,
    with_constants,
)

BINARY_OPS = {"add": Add, "mul": Mul}
UNARY_OPS = {"exp": Exp, "ln": Ln}


class SearchError(RuntimeError):
    pass


@dataclass
class GpConfig:
    binary: Tuple[str, ...] = ("add", "mul")
    unary: Tuple[str, ...] = ("exp",)
    max_size: int = 30
    max_depth: int = 30
    population: int = 500
    tournament: int = 7
    p_crossover: float = 0.7
    p_mutation: float = 0.25
    iterations: int = 100
    time_budget: Optional[float] = 360.0
    nested_unary_ban: bool = False
    seed: int = 0
    init_depth: int = 4
    refine_top: int = 50
    jitter_sigma: float = 0.2
    max_retries: int = 10

    def __post_init__(self):
        self.binary = tuple(self.binary)
        self.unary = tuple(self.unary)
        for name in self.binary:
            if name not in BINARY_OPS:
                raise ValueError(f"unknown binary operator {name!r}")
        for name in self.unary:
            if name not in UNARY_OPS:
                raise ValueError(f"unknown unary operator {name!r}")
        if not self.binary:
            raise ValueError("at least one binary operator is required")
        if min(self.max_size, self.max_depth, self.population, self.tournament, self.iterations) < 1:
            raise ValueError("GP caps must be positive")
        if not (0 <= self.p_crossover <= 1 and 0 <= self.p_mutation <= 1
                and self.p_crossover + self.p_mutation <= 1):
            raise ValueError("GP probabilities must lie in [0, 1] and sum to at most 1")

    @property
    def binary_types(self):
        return tuple(BINARY_OPS[n] for n in self.binary)

    @property
    def unary_types(self):
        return tuple(UNARY_OPS[n] for n in self.unary)


def is_valid(e: Expression, config: GpConfig) -> bool:
    if complexity(e) > config.max_size or depth(e) > config.max_depth:
        return False
    allowed = (Const, Var) + config.binary_types + config.unary_types
    if any(not isinstance(n, allowed) for _, n in iter_paths(e)):
        return False
    return not (config.nested_unary_ban and has_nested_unary(e))


# -- genetic operators ----------------------------------------------------------


def _random_leaf(rng) -> Expression:
    if rng.random() < 0.5:
        return X
    return Const(float(rng.normal(0.0, 1.0)))


def random_tree(rng, config: GpConfig, max_depth: Optional[int] = None, in_unary: bool = False) -> Expression:
    """Grow-method tree of at most ``max_depth`` levels below the root."""
    if max_depth is None:
        max_depth = config.init_depth
    max_depth = min(max_depth, config.max_depth)
    if max_depth <= 0 or rng.random() < 0.3:
        return _random_leaf(rng)
    unary = () if (in_unary and config.nested_unary_ban) else config.unary_types
    n_ops = len(config.binary_types) + len(unary)
    k = int(rng.integers(n_ops))
    if k < len(config.binary_types):
        op = config.binary_types[k]
        return op(random_tree(rng, config, max_depth - 1, in_unary),
                  random_tree(rng, config, max_depth - 1, in_unary))
    op = unary[k - len(config.binary_types)]
    return op(random_tree(rng, config, max_depth - 1, True))


def _random_path(rng, e: Expression):
    paths = [p for p, _ in iter_paths(e)]
    return paths[int(rng.integers(len(paths)))]


def _crossover_once(rng, a: Expression, b: Expression) -> Expression:
    donor = get_at(b, _random_path(rng, b))
    return replace_at(a, _random_path(rng, a), donor)


def crossover(rng, a: Expression, b: Expression, config: GpConfig) -> Expression:
    """Swap a uniformly chosen subtree of ``b`` into ``a``; falls back to a copy of ``a``."""
    for _ in range(config.max_retries):
        child = _crossover_once(rng, a, b)
        if is_valid(child, config):
            return child
    return a


def _point_mutation(rng, e: Expression, config: GpConfig) -> Expression:
    path = _random_path(rng, e)
    node = get_at(e, path)
    if isinstance(node, Var):
        new = Const(float(rng.normal(0.0, 1.0)))
    elif isinstance(node, Const):
        new = X
    elif isinstance(node, tuple(config.binary_types)):
        others = [t for t in config.binary_types if not isinstance(node, t)]
        if not others:
            return _subtree_mutation(rng, e, config)
        op = others[int(rng.integers(len(others)))]
        new = op(node.left, node.right)
    else:
        others = [t for t in config.unary_types if not isinstance(node, t)]
        if not others:
            return _subtree_mutation(rng, e, config)
        op = others[int(rng.integers(len(others)))]
        new = op(node.child)
    return replace_at(e, path, new)


def _subtree_mutation(rng, e: Expression, config: GpConfig) -> Expression:
    path = _random_path(rng, e)
    return replace_at(e, path, random_tree(rng, config, int(rng.integers(0, 4))))


def _jitter(rng, e: Expression, config: GpConfig) -> Expression:
    vals = constants(e)
    factors = np.exp(rng.normal(0.0, config.jitter_sigma, size=len(vals)))
    return with_constants(e, [v * f for v, f in zip(vals, factors)])


def _wrap_mutation(rng, e: Expression, config: GpConfig) -> Expression:
    path = _random_path(rng, e)
    node = get_at(e, path)
    op = config.binary_types[int(rng.integers(len(config.binary_types)))]
    extra = random_tree(rng, config, int(rng.integers(0, 3)))
    return replace_at(e, path, op(node, extra) if rng.random() < 0.5 else op(extra, node))


def mutate(rng, e: Expression, config: GpConfig) -> Expression:
    """Point op-swap, subtree replacement, subtree wrapping or constant jitter."""
    for _ in range(config.max_retries):
        kind = int(rng.integers(4))
        if kind == 3 and not constants(e):
            kind = int(rng.integers(3))
        if kind == 0:
            child = _point_mutation(rng, e, config)
        elif kind == 1:
            child = _subtree_mutation(rng, e, config)
        elif kind == 2:
            child = _wrap_mutation(rng, e, config)
        else:
            child = _jitter(rng, e, config)
        if is_valid(child, config):
            return child
    return e


# -- fitness and constant refinement ------------------------------------------------


def mse_of(e: Expression, x: np.ndarray, y: np.ndarray) -> float:
    pred = evaluate(e, x)
    if not np.all(np.isfinite(pred)):
        return float("inf")
    with np.errstate(over="ignore"):
        r = pred - y
        m = float(np.mean(r * r))
    return m if np.isfinite(m) else float("inf")


def fit_constants(e: Expression, x, y, max_iter: int = 30, rng=None, restarts: int = 20) -> Expression:
    """Gauss-Newton refinement of the constants; never returns a worse fit.

    Singular Jacobians switch to a random-restart hill climb on the constants.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    c = np.array(constants(e), dtype=float)
    if c.size == 0:
        return e
    best_mse = mse_of(e, x, y)
    if not np.isfinite(best_mse):
        return e
    best = c.copy()
    singular = False
    for _ in range(max_iter):
        val, jac = eval_with_const_jacobian(with_constants(e, best), x)
        if not (np.all(np.isfinite(val)) and np.all(np.isfinite(jac))):
            singular = True
            break
        sol, _, rank, _ = np.linalg.lstsq(jac, y - val, rcond=None)
        if rank < c.size:
            singular = True
        step = 1.0
        improved = False
        for _ in range(12):
            trial = best + step * sol
            m = mse_of(with_constants(e, trial), x, y)
            if m < best_mse:
                improved = True
                gain = best_mse - m
                best, best_mse = trial, m
                break
            step *= 0.5
        if not improved or gain <= 1e-15 * max(best_mse, 1e-300):
            break
    if singular:
        rng = rng if rng is not None else np.random.default_rng(0)
        for _ in range(restarts):
            trial = best * np.exp(rng.normal(0.0, 0.3, size=best.size)) + rng.normal(0.0, 1e-3, size=best.size)
            m = mse_of(with_constants(e, trial), x, y)
            if m < best_mse:
                best, best_mse = trial, m
    return with_constants(e, best)


# -- Pareto archive -----------------------------------------------------------------------


@dataclass
class ParetoFront:
    """Best candidate per complexity; larger complexity always has strictly smaller mse."""

    entries: Dict[int, Tuple[Expression, float]] = field(default_factory=dict)

    def update(self, e: Expression, mse: float) -> bool:
        if not np.isfinite(mse):
            return False
        c = complexity(e)
        for k, (_, m) in self.entries.items():
            if k <= c and m <= mse:
                return False
        self.entries = {k: v for k, v in self.entries.items() if not (k >= c and v[1] >= mse)}
        self.entries[c] = (e, float(mse))
        self.entries = dict(sorted(self.entries.items()))
        return True

    def items(self):
        return list(self.entries.items())

    def __len__(self):
        return len(self.entries)

    def best(self) -> Tuple[Expression, float]:
        return min(self.entries.values(), key=lambda v: v[1])


# -- search loop -------------------------------------------------------------------------


@dataclass
class _Individual:
    expr: Expression
    mse: float
    size: int


def _individual(e, x, y) -> _Individual:
    return _Individual(e, mse_of(e, x, y), complexity(e))


def pareto_ranks(mse: np.ndarray, size: np.ndarray) -> np.ndarray:
    """Non-domination rank (0 = not dominated) over (mse, size), both minimized."""
    n = mse.shape[0]
    le = (mse[:, None] <= mse[None, :]) & (size[:, None] <= size[None, :])
    lt = (mse[:, None] < mse[None, :]) | (size[:, None] < size[None, :])
    dominates = le & lt  # dominates[i, j]: i dominates j
    count = dominates.sum(axis=0)
    ranks = np.full(n, -1)
    current = np.flatnonzero(count == 0)
    r = 0
    while current.size:
        ranks[current] = r
        count = count - dominates[current].sum(axis=0)
        count[ranks >= 0] = -1
        current = np.flatnonzero(count == 0)
        r += 1
    return ranks


def gp_search(x, y, config: GpConfig, log=None) -> ParetoFront:
    """Evolve a population and return the Pareto archive over all generations."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.size < 10:
        raise ValueError("gp_search needs at least 10 (x, y) samples")
    if not np.all(np.isfinite(y)):
        raise ValueError("targets must be finite")
    rng = np.random.default_rng(config.seed)
    start = time.perf_counter()
    front = ParetoFront()
    refined: Dict[str, _Individual] = {}

    pop: List[_Individual] = []
    attempts = 0
    while len(pop) < config.population and attempts < 20 * config.population:
        attempts += 1
        e = fold_constants(random_tree(rng, config, int(rng.integers(1, config.init_depth + 1))))
        if is_valid(e, config):
            pop.append(_individual(e, x, y))
    if not any(np.isfinite(ind.mse) for ind in pop):
        raise SearchError("no viable individual in the initial population")

    def refine(population: List[_Individual]) -> List[_Individual]:
        order = sorted(range(len(population)), key=lambda i: (population[i].mse, population[i].size))
        seen = set()
        for i in order:
            if len(seen) >= config.refine_top:
                break
            ind = population[i]
            if not np.isfinite(ind.mse):
                break
            key = to_string(ind.expr)
            if key in seen:
                continue
            seen.add(key)
            if key not in refined:
                e = fit_constants(ind.expr, x, y, rng=rng)
                refined[key] = _individual(e, x, y) if mse_of(e, x, y) < ind.mse else ind
            population[i] = refined[key]
        for ind in population:
            front.update(ind.expr, ind.mse)
        return population

    def tournament(population, ranks):
        idx = rng.integers(len(population), size=config.tournament)
        best = min(idx, key=lambda i: (ranks[i], population[i].mse, population[i].size))
        return population[best].expr

    def ranked(population):
        mse = np.array([ind.mse for ind in population])
        size = np.array([ind.size for ind in population], dtype=float)
        return pareto_ranks(np.where(np.isfinite(mse), mse, np.inf), size)

    pop = refine(pop)
    for gen in range(config.iterations):
        if config.time_budget is not None and time.perf_counter() - start > config.time_budget:
            break
        ranks = ranked(pop)
        nxt = [_Individual(e, m, complexity(e)) for _, (e, m) in front.items()]
        while len(nxt) < config.population:
            r = rng.random()
            if r < config.p_crossover:
                child = crossover(rng, tournament(pop, ranks), tournament(pop, ranks), config)
            elif r < config.p_crossover + config.p_mutation:
                child = mutate(rng, tournament(pop, ranks), config)
            else:
                child = tournament(pop, ranks)
            nxt.append(_individual(fold_constants(child), x, y))
        pop = refine(nxt[: config.population])
        if log is not None:
            e, m = front.best()
            log(f"gen {gen}: front size {len(front)}, best mse {m:.3e}")
    return front
