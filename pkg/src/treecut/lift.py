"""Lifting MaxCut LP solutions onto powered instances.

An r-round solution is the same thing as a family of marginally
consistent local distributions, one per small vertex set.  This module
converts between the two views and pushes a base MaxCut family through
the powering construction: terminals are pinned to opposite sides, the
base draw is symmetrized with a fair coin, and cut copies recurse while
uncut copies ride along with their terminals.  Distributions are computed
exactly by dynamic programming over the recursion tree, never sampled.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .errors import InputError, InvariantError
from .generators import MaxCutInstance, PoweredInstance, building_block, power
from .instance import SparsestCutInstance
from .oracle import exact_maxcut, exact_sparsest_cut
from .relaxation import SaSolution, SetFamily, build_maxcut_lp, full_solution_from, full_family
from . import simplex


# ---------------------------------------------------------------------------
# Local distribution families.
# ---------------------------------------------------------------------------

@dataclass
class LocalDistributionFamily:
    """Per-set distributions over subsets, marginally consistent."""

    family: SetFamily
    dists: dict  # frozenset S -> {frozenset T: Fraction}

    def dist(self, S) -> dict:
        return self.dists[frozenset(S)]

    def validate(self) -> list:
        problems = []
        fsets = self.family.frozensets()
        for s in fsets:
            d = self.dists[s]
            total = sum(d.values(), Fraction(0))
            if total != 1:
                problems.append(("normalization", s, None, total))
            for t, p in d.items():
                if p < 0:
                    problems.append(("negative", s, t, p))
        for q in fsets:
            for s in fsets:
                if not q < s:
                    continue
                marg: dict = {}
                for b, p in self.dists[s].items():
                    key = b & q
                    marg[key] = marg.get(key, Fraction(0)) + p
                for a, p in self.dists[q].items():
                    if marg.get(a, Fraction(0)) != p:
                        problems.append(("consistency", q, (s, a),
                                         marg.get(a, Fraction(0)) - p))
        return problems


def sa_to_distributions(solution: SaSolution, r: int) -> LocalDistributionFamily:
    """D_S(T) := x(S,T) over the family sets of size at most r."""
    problems = solution.validate()
    if problems:
        raise InputError(f"solution is infeasible: first violation {problems[0]}")
    keep = [s for s in solution.family.sets if len(s) <= r]
    family = SetFamily.build(solution.family.order, keep)
    dists = {}
    for elems in family.sets:
        s = frozenset(elems)
        d = {}
        for t_size in range(len(elems) + 1):
            for t in itertools.combinations(elems, t_size):
                d[frozenset(t)] = solution.value(s, t)
        dists[s] = d
    return LocalDistributionFamily(family, dists)


def distributions_to_sa(family: LocalDistributionFamily) -> SaSolution:
    """x(S,T) := D_S(T); inverse of sa_to_distributions."""
    problems = family.validate()
    if problems:
        kind, q, detail, _ = problems[0]
        raise InputError(f"inconsistent distribution family: {kind} at {sorted(map(str, q))}"
                         + (f" vs {detail}" if detail else ""))
    values = {}
    for s, d in family.dists.items():
        for t, p in d.items():
            values[(s, t)] = p
    return SaSolution(family.family, values)


# ---------------------------------------------------------------------------
# The recursive lift.
# ---------------------------------------------------------------------------

@dataclass
class LiftContext:
    """Base MaxCut solution plus the powered target it lifts onto."""

    base: MaxCutInstance
    rounds: int
    levels: int
    base_dists: LocalDistributionFamily  # over subsets of the MaxCut vertices
    powered: PoweredInstance
    base_value: Fraction  # total y over the base edges (c*m)
    _memo: dict = field(default_factory=dict, repr=False)

    @property
    def block(self) -> SparsestCutInstance:
        return self.powered.base

    def edge_endpoint(self, ei: int):
        """(terminal, base vertex) of block supply edge ei."""
        u, v, _ = self.block.supply_edges[ei]
        if u in ("s", "t"):
            return u, v
        return v, u


def make_lift_context(H: MaxCutInstance, rounds: int, levels: int) -> LiftContext:
    """Solve the base MaxCut LP at `rounds` and power the terminal block.

    The base is solved at exactly `rounds` rounds: every set the recursive
    extension feeds to the base family stays within |T| because each added
    vertex is charged to a distinct member of T (terminals are pinned and
    never drawn).
    """
    if rounds > H.n:
        rounds_eff = H.n
    else:
        rounds_eff = rounds
    prog = build_maxcut_lp(H, rounds_eff)
    res = simplex.solve(prog)
    if not res.optimal:
        raise InvariantError(f"base MaxCut solve failed: {res.status}")
    family = full_family(range(1, H.n + 1), rounds_eff)
    solution = full_solution_from(family, res.values)
    dists = sa_to_distributions(solution, rounds_eff)
    block, block_dec = building_block(H, include_st_demand=False)
    powered = power(block, levels, block_dec)
    return LiftContext(H, rounds, levels, dists, powered, res.objective)


@dataclass
class ExtendedSet:
    """The recursive closure of a target set.

    top: members of the closure living in the current level's base copy
    (terminals plus base vertices, local names); per_copy maps a touched
    edge index to the extension inside that copy (inner names).
    """

    original: frozenset
    top: frozenset
    per_copy: dict


def extend_set(ctx: LiftContext, T, levels: Optional[int] = None) -> ExtendedSet:
    """Close T under the powering structure: pin both terminals, and pull
    in the base endpoint of every copy that T touches, recursively."""
    levels = ctx.levels if levels is None else levels
    T = frozenset(T)
    top = {v for v in T if not (isinstance(v, tuple) and v and v[0] == "e")}
    top |= {"s", "t"}
    touched: dict = {}
    for v in T:
        if isinstance(v, tuple) and v and v[0] == "e":
            touched.setdefault(v[1], set()).add(v[2])
    per_copy = {}
    for ei, inner in sorted(touched.items()):
        if levels < 2:
            raise InputError(f"copy vertex at level 1: {sorted(map(str, inner))}")
        _, base_vertex = ctx.edge_endpoint(ei)
        top.add(base_vertex)
        per_copy[ei] = extend_set(ctx, frozenset(inner), levels - 1)
    ext = ExtendedSet(T, frozenset(top), per_copy)
    # each pulled-in base vertex charges to a distinct T-member inside a copy
    if len(ext.top - {"s", "t"}) > len(T):
        raise InvariantError("extension grew beyond its charging bound")
    return ext


def _convolve(dist_a: dict, dist_b: dict) -> dict:
    out: dict = {}
    for xa, pa in dist_a.items():
        for xb, pb in dist_b.items():
            key = xa | xb
            out[key] = out.get(key, Fraction(0)) + pa * pb
    return out


def lift_distribution(ctx: LiftContext, T, levels: Optional[int] = None) -> dict:
    """Exact distribution of X cap T under the recursive selection process.

    The terminal s is always selected and t never is; the base draw is
    symmetrized within its ground set with probability 1/2; copies whose
    endpoints fall on one side ride along whole, and cut copies recurse
    independently.
    """
    levels = ctx.levels if levels is None else levels
    T = frozenset(T)
    memo_key = (levels, T)
    hit = ctx._memo.get(memo_key)
    if hit is not None:
        return hit
    ext = extend_set(ctx, T, levels)
    R = frozenset(v for v in ext.top if v not in ("s", "t"))
    if R:
        try:
            base_dist = ctx.base_dists.dist(R)
        except KeyError:
            raise InputError(
                f"base round budget too small: the lift needs the distribution "
                f"over {len(R)} base vertices") from None
    else:
        base_dist = {frozenset(): Fraction(1)}
    half = Fraction(1, 2)
    out: dict = {}
    for Y, p in base_dist.items():
        if p == 0:
            continue
        for flip in (False, True):
            chosen = (R - Y) if flip else Y
            x1 = chosen | {"s"}
            weight = p * half
            result = {frozenset(x1 & T): Fraction(1)}
            for ei, sub_ext in ext.per_copy.items():
                u, v, _ = ctx.block.supply_edges[ei]
                u_in = u == "s" or (u != "t" and u in x1)  # u carries the inner s role
                v_in = v == "s" or (v != "t" and v in x1)
                sub_T = sub_ext.original
                if u_in and v_in:
                    part = {frozenset(("e", ei, x) for x in sub_T): Fraction(1)}
                elif not u_in and not v_in:
                    part = {frozenset(): Fraction(1)}
                else:
                    inner = lift_distribution(ctx, sub_T, levels - 1)
                    if u_in:
                        part = {frozenset(("e", ei, x) for x in sel): q
                                for sel, q in inner.items()}
                    else:
                        # traversed against orientation: the selection process is
                        # complement-symmetric under swapping the terminals, so
                        # the reversed copy contributes the complement within T
                        part = {frozenset(("e", ei, x) for x in (sub_T - sel)): q
                                for sel, q in inner.items()}
                result = _convolve(result, part)
            for sel, q in result.items():
                out[sel] = out.get(sel, Fraction(0)) + weight * q
    ctx._memo[memo_key] = out
    return out


def lift_pair_value(ctx: LiftContext, u, v) -> Fraction:
    dist = lift_distribution(ctx, (u, v))
    return sum((p for sel, p in dist.items() if len(sel) == 1), Fraction(0))


@dataclass
class LiftedValue:
    capacity_value: Fraction
    demand_value: Fraction
    sparsity: Fraction


def lifted_value(ctx: LiftContext) -> LiftedValue:
    """Exact objective values of the lifted solution on the powered instance."""
    inst = ctx.powered.instance
    cap = Fraction(0)
    for u, v, w in inst.supply_edges:
        cap += w * lift_pair_value(ctx, u, v)
    dem = Fraction(0)
    for u, v, w in inst.demand_edges:
        dem += w * lift_pair_value(ctx, u, v)
    if dem <= 0:
        raise InvariantError("lifted solution separates no demand")
    return LiftedValue(cap, dem, cap / dem)


def lifted_family_solution(ctx: LiftContext, family: SetFamily) -> SaSolution:
    """Evaluate the lift on every set of an arbitrary family (for feeding
    the pared LP's feasibility check)."""
    values = {}
    for elems in family.sets:
        dist = lift_distribution(ctx, elems)
        s = frozenset(elems)
        for size in range(len(elems) + 1):
            for t in itertools.combinations(elems, size):
                values[(s, frozenset(t))] = Fraction(0)
        for sel, p in dist.items():
            values[(s, sel)] += p
    return SaSolution(family, values)


# ---------------------------------------------------------------------------
# Gap experiments.
# ---------------------------------------------------------------------------

@dataclass
class GapReport:
    base_name: str
    rounds: int
    levels: int
    base_lp_value: Fraction  # c*m
    base_maxcut: int  # s*m
    c: Fraction
    s: Fraction
    lifted: LiftedValue
    phi: Optional[Fraction]  # exact oracle sparsity of the powered instance
    phi_source: str  # "oracle" | "formula-bound"
    phi_bound: Fraction  # 1/(1+(levels-1)s)
    gap_via_lift: Fraction  # lifted demand value / (1+(levels-1)s)
    gap_formula: Fraction  # levels*c/(1+(levels-1)s)

    def to_dict(self) -> dict:
        return {
            "base": self.base_name,
            "rounds": self.rounds,
            "levels": self.levels,
            "base_lp_value": str(self.base_lp_value),
            "base_maxcut": self.base_maxcut,
            "c": str(self.c),
            "s": str(self.s),
            "lifted_capacity": str(self.lifted.capacity_value),
            "lifted_demand": str(self.lifted.demand_value),
            "lifted_sparsity": str(self.lifted.sparsity),
            "phi": None if self.phi is None else str(self.phi),
            "phi_source": self.phi_source,
            "phi_bound": str(self.phi_bound),
            "gap_via_lift": str(self.gap_via_lift),
            "gap_formula": str(self.gap_formula),
        }

    def csv_row(self) -> str:
        d = self.to_dict()
        return ",".join(str(d[k]) for k in sorted(d))

    @staticmethod
    def csv_header() -> str:
        keys = sorted(GapReport("", 0, 0, Fraction(0), 0, Fraction(0), Fraction(0),
                                LiftedValue(Fraction(0), Fraction(1), Fraction(0)),
                                None, "", Fraction(0), Fraction(0),
                                Fraction(0)).to_dict())
        return ",".join(keys)


def gap_experiment(H: MaxCutInstance, rounds: int, levels: int,
                   name: str = "", enumerate_bound: int = 24) -> GapReport:
    """Translate a base MaxCut LP/IP gap into a powered sparsest-cut gap.

    The lifted route (exact DP demand value over the oracle soundness
    bound) and the closed-form route (levels*c over the same bound) are
    computed independently; they agree exactly when the lift's value
    bookkeeping is right.
    """
    ctx = make_lift_context(H, rounds, levels)
    _, mc = exact_maxcut(H)
    m = H.m
    c = Fraction(ctx.base_value) / m
    s = Fraction(mc, m)
    lifted = lifted_value(ctx)
    phi = None
    phi_source = "formula-bound"
    bound = 1 / (1 + (levels - 1) * s)
    if len(ctx.powered.instance.vertices) <= enumerate_bound:
        _, sp = exact_sparsest_cut(ctx.powered.instance, bound=enumerate_bound)
        phi = sp.ratio
        phi_source = "oracle"
    gap_via_lift = lifted.demand_value / (1 + (levels - 1) * s)
    gap_formula = levels * c / (1 + (levels - 1) * s)
    return GapReport(name or f"H_n{H.n}_m{H.m}", rounds, levels,
                     ctx.base_value, mc, c, s, lifted, phi, phi_source, bound,
                     gap_via_lift, gap_formula)
