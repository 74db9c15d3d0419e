"""Regulated social stratification as an exact integer program.

Users get integer classes (CEO = 1, everybody else >= 2). Each follow edge
``(u, v)`` costs ``max(c(v) - c(u) + 1, 0)``. The objective adds ``sum c(u)``.
Two optional constraint families regulate the result:

* Matthew order: a user with at least as many followers as another may not
  sit in a larger class.
* depth: ``sum c(u) >= alpha * |users|``.

Two exact solvers are provided:

``levels-dp``
    Used whenever the Matthew order is on. The order collapses the non-CEO
    users into levels of equal in-degree. Classes are non-decreasing along
    those levels, so a solution is a split of the level sequence into
    contiguous blocks with strictly increasing class values. Forward edges
    (from a more-followed level) contribute linear terms. Backward edges cost
    exactly 1 when both ends share a block. A DP over (levels covered, last
    block value, capped class sum) is then exact and polynomial.

``branch-and-bound``
    Used for everything else (e.g. the agony baseline). LP relaxations are
    solved with HiGHS through scipy. Branching is on the most fractional
    class variable.
"""
from __future__ import annotations

import heapq
import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping

import numpy as np

from .errors import Infeasible, ResourceBudgetExceeded
from .esn import EsnNetwork, Pair

log = logging.getLogger(__name__)


def transcendence_penalty(c_u: int, c_v: int) -> int:
    """Penalty of ``u`` following ``v``: zero only when u sits strictly below v."""
    if c_u < 1 or c_v < 1:
        raise ValueError("classes are positive integers")
    return max(c_v - c_u + 1, 0)


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


def default_cmax(alpha) -> int:
    return max(3, math.ceil(2 * as_fraction(alpha)) + 2)


@dataclass(frozen=True)
class ClassAssignment:
    classes: Mapping[str, int]

    def __post_init__(self):
        object.__setattr__(self, "classes", dict(self.classes))

    @property
    def depth(self) -> int:
        return max(self.classes.values(), default=0)

    def members(self, k: int) -> list[str]:
        return sorted(u for u, c in self.classes.items() if c == k)

    def strata(self) -> list[list[str]]:
        """Members of classes 1..depth (index 0 is class 1)."""
        out: list[list[str]] = [[] for _ in range(self.depth)]
        for u in sorted(self.classes):
            out[self.classes[u] - 1].append(u)
        return out

    def __getitem__(self, u: str) -> int:
        return self.classes[u]

    def __len__(self) -> int:
        return len(self.classes)


@dataclass(frozen=True)
class StratificationConfig:
    alpha: Fraction | float | int = 0
    cmax: int | None = None
    ceo_exempt_matthew: bool = True

    def __post_init__(self):
        object.__setattr__(self, "alpha", as_fraction(self.alpha))
        if self.alpha < 0:
            raise ValueError("alpha must be non-negative")
        if self.cmax is None:
            object.__setattr__(self, "cmax", default_cmax(self.alpha))
        if self.cmax < 2:
            raise ValueError("cmax must be at least 2")


@dataclass(frozen=True)
class StratificationProgram:
    users: tuple[str, ...]
    ceo: str
    cmax: int
    follows: tuple[Pair, ...]
    matthew: tuple[Pair, ...]  # (u, v) means c(u) <= c(v)
    alpha: Fraction | None  # None: no depth constraint
    in_degree: Mapping[str, int] = field(default_factory=dict)
    levels: tuple[tuple[str, ...], ...] | None = None  # set when the Matthew chain is total

    @property
    def n_class_vars(self) -> int:
        return len(self.users)

    @property
    def n_penalty_vars(self) -> int:
        return len(self.follows)

    @property
    def depth_bound(self) -> int | None:
        """Smallest integer class sum allowed by the depth constraint."""
        if self.alpha is None:
            return None
        return math.ceil(self.alpha * len(self.users))

    def objective(self, classes: Mapping[str, int]) -> int:
        pen = sum(transcendence_penalty(classes[u], classes[v]) for u, v in self.follows)
        return pen + sum(classes[u] for u in self.users)

    def violations(self, classes: Mapping[str, int]) -> list[str]:
        out = []
        for u in self.users:
            c = classes.get(u)
            if c is None:
                out.append(f"{u}: unassigned")
            elif u == self.ceo and c != 1:
                out.append(f"{u}: CEO must be class 1")
            elif u != self.ceo and not 2 <= c <= self.cmax:
                out.append(f"{u}: class {c} outside [2, {self.cmax}]")
        if out:
            return out
        for u, v in self.matthew:
            if classes[u] > classes[v]:
                out.append(f"matthew: c({u})={classes[u]} > c({v})={classes[v]}")
        bound = self.depth_bound
        if bound is not None and sum(classes[u] for u in self.users) < bound:
            out.append(f"depth: class sum below {bound}")
        return out


@dataclass(frozen=True)
class SolveResult:
    assignment: ClassAssignment
    objective: int
    status: str  # "optimal" or "feasible" (best effort, not certified)
    solver: str
    nodes: int = 0

    @property
    def certified(self) -> bool:
        return self.status == "optimal"


def build_program(
    net: EsnNetwork,
    config: StratificationConfig,
    *,
    matthew: bool = True,
    depth: bool = True,
) -> StratificationProgram:
    users = tuple(sorted(net.users))
    indeg = {u: net.in_degree(u) for u in users}
    pairs: list[Pair] = []
    levels = None
    if matthew:
        ordered = sorted(users, key=lambda u: (-indeg[u], u))
        for u in ordered:
            for v in ordered:
                if u == v or indeg[u] < indeg[v]:
                    continue
                if config.ceo_exempt_matthew and net.ceo in (u, v):
                    continue
                pairs.append((u, v))
        rest = [u for u in ordered if u != net.ceo]
        levels = tuple(tuple(g) for _, g in itertools.groupby(rest, key=lambda u: indeg[u]))
    return StratificationProgram(
        users=users,
        ceo=net.ceo,
        cmax=config.cmax,
        follows=tuple(sorted(net.follows)),
        matthew=tuple(pairs),
        alpha=config.alpha if depth else None,
        in_degree=indeg,
        levels=levels,
    )


def solve_program(
    program: StratificationProgram,
    *,
    node_budget: int = 20000,
    best_effort: bool = False,
    on_incumbent: Callable[[int, Mapping[str, int]], None] | None = None,
) -> SolveResult:
    if program.levels is not None:
        return _solve_levels(program, on_incumbent)
    return _branch_and_bound(program, node_budget, best_effort, on_incumbent)


def stratify(net: EsnNetwork, config: StratificationConfig, **solve_kw) -> ClassAssignment:
    return solve_program(build_program(net, config), **solve_kw).assignment


def stratify_agony(net: EsnNetwork, cmax: int, **solve_kw) -> ClassAssignment:
    """Agony-style baseline: same objective, no Matthew or depth constraints."""
    prog = build_program(net, StratificationConfig(alpha=0, cmax=cmax), matthew=False, depth=False)
    return solve_program(prog, **solve_kw).assignment


# ------------------------------------------------------------------ levels DP


def _solve_levels(program: StratificationProgram, on_incumbent) -> SolveResult:
    ceo, cmax = program.ceo, program.cmax
    levels = program.levels
    L = len(levels)
    if (ceo in program.users) is False:
        raise Infeasible("CEO is not among the program users")

    # exemption off: any non-CEO with in-degree >= CEO's would have to sit in class 1
    ceo_pairs = [(u, v) for u, v in program.matthew if u != ceo and v == ceo]
    if ceo_pairs:
        raise Infeasible(f"Matthew order forces {ceo_pairs[0][0]!r} into the CEO's class")
    if L and cmax < 2:
        raise Infeasible("cmax < 2 leaves no class for non-CEO users")

    bound = program.depth_bound
    need = max(0, (bound or 0) - 1)  # required sum over non-CEO users
    lvl = {u: j for j, grp in enumerate(levels) for u in grp}
    size = np.array([len(g) for g in levels], dtype=np.int64)
    weight = size.copy()  # linear coefficient of each level's class value
    back = np.zeros((L, L), dtype=np.int64)  # back[j, i]: follower at i > j, followee at j
    const = 1  # the CEO's own class
    for u, v in program.follows:
        if u == ceo:
            weight[lvl[v]] += 1
        elif v == ceo:
            pass  # c(u) >= 2 > 1: never penalised
        elif lvl[u] < lvl[v]:
            # u is more followed, so c(u) <= c(v) and the penalty is linear
            weight[lvl[v]] += 1
            weight[lvl[u]] -= 1
            const += 1
        elif lvl[u] == lvl[v]:
            const += 1
        else:
            back[lvl[v], lvl[u]] += 1

    if L == 0:
        if need > 0:
            raise Infeasible("depth constraint unsatisfiable with a single user")
        assign = {ceo: 1}
        return SolveResult(ClassAssignment(assign), const, "optimal", "levels-dp")
    if need > cmax * int(size.sum()):
        raise Infeasible(f"depth constraint needs class sum {bound} > reachable maximum")

    wpre = np.concatenate([[0], np.cumsum(weight)])
    npre = np.concatenate([[0], np.cumsum(size)])
    # within[a, b]: backward edges with both ends in levels a..b-1
    colpre = np.zeros((L + 1, L), dtype=np.int64)
    colpre[1:] = np.cumsum(back, axis=0)
    within = np.zeros((L + 1, L + 1), dtype=np.int64)
    for a in range(L):
        acc = 0
        for b in range(a + 1, L + 1):
            i = b - 1
            acc += colpre[i, i] - colpre[a, i]
            within[a, b] = acc

    S = need + 1
    inf = np.inf
    # f[k][v, s]: best cost covering levels 0..k-1, last block value v, capped sum s
    f = np.full((L + 1, cmax + 1, S), inf)
    f[0, 1, 0] = 0.0
    for k in range(1, L + 1):
        fk = f[k]
        for a in range(k):
            fa = f[a]
            # gmin[v'] = min over v < v' of fa[v]
            gmin = np.minimum.accumulate(fa, axis=0)
            W = int(wpre[k] - wpre[a])
            N = int(npre[k] - npre[a])
            E = int(within[a, k])
            for vp in range(2, cmax + 1):
                base = gmin[vp - 1]
                if not np.isfinite(base).any():
                    continue
                cand = base + (vp * W + E)
                fk[vp] = np.minimum(fk[vp], _shift_capped(cand, N * vp))

    final = f[L][:, need]
    vbest = int(np.argmin(final))
    best = final[vbest]
    if not np.isfinite(best):
        raise Infeasible("no class assignment satisfies the depth constraint within cmax")

    # walk the table backwards to recover the blocks
    classes = {ceo: 1}
    k, vp, s = L, vbest, need
    while k > 0:
        target = f[k][vp, s]
        found = None
        for a in range(k):
            W = int(wpre[k] - wpre[a])
            N = int(npre[k] - npre[a])
            E = int(within[a, k])
            d = N * vp
            add = vp * W + E
            prev = range(s - d, s - d + 1) if s < need else range(max(0, need - d), need + 1)
            for v in range(1, vp):
                for sp in prev:
                    if 0 <= sp < S and f[a][v, sp] + add == target:
                        found = (a, v, sp)
                        break
                if found:
                    break
            if found:
                break
        assert found is not None, "DP backtrack failed"
        a, v, sp = found
        for j in range(a, k):
            for u in levels[j]:
                classes[u] = vp
        k, vp, s = a, v, sp

    objective = int(best) + const
    if on_incumbent is not None:
        on_incumbent(objective, classes)
    return SolveResult(ClassAssignment(classes), objective, "optimal", "levels-dp")


def _shift_capped(vec: np.ndarray, d: int) -> np.ndarray:
    """out[min(s + d, last)] = min over the sources landing there."""
    n = len(vec)
    out = np.full(n, np.inf)
    if d >= n - 1:
        out[n - 1] = vec.min()
        return out
    out[d:n - 1] = vec[: n - 1 - d]
    out[n - 1] = vec[n - 1 - d:].min()
    return out


# ------------------------------------------------------------ branch and bound


def _lp_data(program: StratificationProgram):
    from scipy import sparse

    ceo = program.ceo
    free = [u for u in program.users if u != ceo]
    idx = {u: i for i, u in enumerate(free)}
    n, m = len(free), len(program.follows)
    rows, cols, vals, rhs = [], [], [], []
    r = 0
    lb = np.full(n, 2.0)
    ub = np.full(n, float(program.cmax))
    for e, (u, v) in enumerate(program.follows):
        # c(v) - c(u) - p_e <= -1, CEO terms folded into the right-hand side
        const = -1.0
        if v == ceo:
            const -= 1.0
        else:
            rows.append(r), cols.append(idx[v]), vals.append(1.0)
        if u == ceo:
            const += 1.0
        else:
            rows.append(r), cols.append(idx[u]), vals.append(-1.0)
        rows.append(r), cols.append(n + e), vals.append(-1.0)
        rhs.append(const)
        r += 1
    for u, v in program.matthew:
        if u == ceo:
            continue  # 1 <= c(v) always
        if v == ceo:
            ub[idx[u]] = min(ub[idx[u]], 1.0)
            continue
        rows += [r, r]
        cols += [idx[u], idx[v]]
        vals += [1.0, -1.0]
        rhs.append(0.0)
        r += 1
    bound = program.depth_bound
    if bound is not None:
        for u in free:
            rows.append(r), cols.append(idx[u]), vals.append(-1.0)
        rhs.append(-(bound - 1.0))
        r += 1
    A = sparse.csr_matrix((vals, (rows, cols)), shape=(r, n + m)) if r else None
    cost = np.ones(n + m)
    return free, A, np.array(rhs), cost, lb, ub


def _round_repair(program: StratificationProgram, free, x, lb, ub):
    """Cheap incumbent from an LP point.

    Rounding up is always feasible: ceil is monotone, so Matthew pairs stay
    ordered, and it never lowers the class sum. Nearest rounding is tried too
    and kept when it is feasible and cheaper.
    """
    best, best_obj = None, math.inf
    for rnd in (lambda y: math.ceil(y - 1e-9), round):
        classes = {program.ceo: 1}
        for i, u in enumerate(free):
            classes[u] = int(min(max(rnd(x[i]), lb[i]), ub[i]))
        if program.violations(classes):
            continue
        obj = program.objective(classes)
        if obj < best_obj:
            best, best_obj = classes, obj
    return best


def _branch_and_bound(program, node_budget, best_effort, on_incumbent) -> SolveResult:
    from scipy.optimize import linprog

    free, A, b, cost, lb0, ub0 = _lp_data(program)
    n, m = len(free), len(program.follows)
    if n == 0:
        classes = {program.ceo: 1}
        if program.violations(classes):
            raise Infeasible("single-user program violates its depth constraint")
        return SolveResult(ClassAssignment(classes), program.objective(classes), "optimal", "branch-and-bound")
    if np.any(lb0 > ub0):
        raise Infeasible("a Matthew pair forces a non-CEO user into class 1")

    def relax(lb, ub):
        bounds = [(lb[i], ub[i]) for i in range(n)] + [(0, None)] * m
        res = linprog(cost, A_ub=A, b_ub=b if A is not None else None, bounds=bounds, method="highs")
        if res.status == 2:
            return None
        if res.status != 0:
            raise RuntimeError(f"LP relaxation failed: {res.message}")
        return res.fun + 1.0, res.x  # + the CEO's class

    best_obj, best = math.inf, None
    counter = itertools.count()
    root = relax(lb0, ub0)
    if root is None:
        raise Infeasible("LP relaxation of the stratification program is infeasible")
    heap = [(root[0], next(counter), lb0, ub0, root[1])]
    nodes = 0
    exhausted = True
    tol = 1e-6
    while heap:
        bound, _, lb, ub, x = heapq.heappop(heap)
        if math.ceil(bound - tol) >= best_obj:
            continue
        if nodes >= node_budget:
            exhausted = False
            break
        nodes += 1
        frac = np.abs(x[:n] - np.round(x[:n]))
        cand = _round_repair(program, free, x, lb, ub)
        if cand is not None:
            obj = program.objective(cand)
            if obj < best_obj:
                best_obj, best = obj, cand
                log.debug("incumbent %d after %d nodes", obj, nodes)
                if on_incumbent is not None:
                    on_incumbent(obj, cand)
        if frac.max() <= tol:
            continue  # integral relaxation: the rounded point is this node's optimum
        j = int(np.argmax(frac))
        down_ub = ub.copy()
        down_ub[j] = math.floor(x[j])
        up_lb = lb.copy()
        up_lb[j] = math.ceil(x[j])
        for clb, cub in ((lb, down_ub), (up_lb, ub)):
            if np.any(clb > cub):
                continue
            child = relax(clb, cub)
            if child is not None and math.ceil(child[0] - tol) < best_obj:
                heapq.heappush(heap, (child[0], next(counter), clb, cub, child[1]))

    if best is None:
        if not exhausted:
            raise ResourceBudgetExceeded(f"no incumbent within {node_budget} nodes")
        raise Infeasible("stratification program has no integer solution")
    if not exhausted:
        if not best_effort:
            raise ResourceBudgetExceeded(f"search not finished within {node_budget} nodes")
        return SolveResult(ClassAssignment(best), int(best_obj), "feasible", "branch-and-bound", nodes)
    return SolveResult(ClassAssignment(best), int(best_obj), "optimal", "branch-and-bound", nodes)
