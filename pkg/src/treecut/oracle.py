"""Brute-force ground truth: exact sparsest cut, exact MaxCut, cut audits.

Enumeration walks all 2^(n-1) cut classes (first vertex pinned) with a
Gray code, updating cut capacity and demand incrementally as scaled
integers.  This keeps the 23-vertex audits of the powered instances at
desk scale.  No branch and bound: enumeration only.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Optional

from .errors import BudgetError, InputError
from .instance import Cut, SparsestCutInstance, Sparsity, evaluate_cut

DEFAULT_ENUM_BOUND = 26


def _scaled_incidence(instance, edges):
    """Per-vertex incidence lists with integer weights; returns (inc, scale)."""
    scale = lcm(*(w.denominator for _, _, w in edges)) if edges else 1
    inc = [[] for _ in instance.vertices]
    for u, v, w in edges:
        iu, iv = instance.vertex_index(u), instance.vertex_index(v)
        iw = int(w * scale)
        inc[iu].append((iv, iw))
        inc[iv].append((iu, iw))
    return inc, scale


def _mask_cut(instance, mask, free) -> Cut:
    side = {instance.vertices[0]}
    for bit, idx in enumerate(free):
        if (mask >> bit) & 1:
            side.add(instance.vertices[idx])
    return Cut(frozenset(side))


def _mask_key(mask, free):
    return tuple(sorted([0] + [free[b] for b in range(len(free)) if (mask >> b) & 1]))


@dataclass
class CutAudit:
    """Aggregated extrema over every cut class of an instance.

    Ratio extrema are stored as (demand, capacity) integer pairs during
    the scan and rebuilt as exact Fractions of the witness cuts here.
    """

    n_cut_classes: int
    sparsest: Optional[tuple]  # (Cut, Sparsity), over all cuts with demand > 0
    min_admissible_capacity: Optional[tuple]  # (Cut, Fraction)
    max_admissible_ratio: Optional[tuple]  # (Cut, Fraction dem/cap or None=inf)
    max_inadmissible_ratio: Optional[tuple]  # same convention

    def gamma(self) -> Fraction:
        """Audited max admissible demand/capacity ratio (the measured γ)."""
        if self.max_admissible_ratio is None:
            raise InputError("no admissible cuts audited")
        cut, ratio = self.max_admissible_ratio
        if ratio is None:
            raise InputError("admissible cut with zero capacity: γ unbounded")
        return ratio

    def to_dict(self) -> dict:
        def entry(pair, value_name):
            if pair is None:
                return None
            cut, val = pair
            if isinstance(val, Sparsity):
                payload = {"capacity": str(val.cut_capacity), "demand": str(val.cut_demand),
                           "ratio": str(val.ratio)}
            else:
                payload = {value_name: "inf" if val is None else str(val)}
            payload["witness"] = sorted(map(str, cut.side_a))
            return payload

        return {
            "cut_classes": self.n_cut_classes,
            "sparsest": entry(self.sparsest, "ratio"),
            "min_admissible_capacity": entry(self.min_admissible_capacity, "capacity"),
            "max_admissible_demand_over_capacity": entry(self.max_admissible_ratio, "ratio"),
            "max_inadmissible_demand_over_capacity": entry(self.max_inadmissible_ratio, "ratio"),
        }


def _enumerate_extrema(instance: SparsestCutInstance, bound: int,
                       separating=None) -> CutAudit:
    n = instance.n
    if n > bound:
        raise BudgetError(f"enumeration over {n} vertices exceeds bound {bound}",
                          limit=bound, requested=n)
    if n < 2:
        raise InputError("need at least two vertices to cut")
    sup_inc, _ = _scaled_incidence(instance, instance.supply_edges)
    dem_inc, _ = _scaled_incidence(instance, instance.demand_edges)

    # Free vertices ordered so that low-incidence ones occupy the
    # frequently flipped Gray positions.
    free = sorted(range(1, n), key=lambda i: len(sup_inc[i]) + len(dem_inc[i]))
    nf = n - 1
    side = [0] * n
    side[0] = 1
    cap = sum(w for _, w in sup_inc[0])
    dem = sum(w for _, w in dem_inc[0])

    if separating is None:
        separating = instance.terminals
    has_terms = separating is not None
    if has_terms:
        si = instance.vertex_index(separating[0])
        ti = instance.vertex_index(separating[1])

    # Extrema accumulators: (value tuple, mask).
    best_sparse = None  # (cap, dem, mask), minimize cap/dem
    min_adm_cap = None  # (cap, mask)
    max_adm_ratio = None  # (dem, cap, mask), maximize dem/cap
    max_inadm_ratio = None

    def better_key(mask_new, mask_old):
        return _mask_key(mask_new, free) < _mask_key(mask_old, free)

    mask = 0
    k = 0
    total = 1 << nf
    while True:
        # evaluate the current cut class (side of vertex 0 is A)
        if dem > 0:
            if best_sparse is None or cap * best_sparse[1] < best_sparse[0] * dem or \
                    (cap * best_sparse[1] == best_sparse[0] * dem and better_key(mask, best_sparse[2])):
                best_sparse = (cap, dem, mask)
        if has_terms and mask.bit_count() + 1 < n:  # proper, non-degenerate class
            if side[si] != side[ti]:
                if min_adm_cap is None or cap < min_adm_cap[0] or \
                        (cap == min_adm_cap[0] and better_key(mask, min_adm_cap[1])):
                    min_adm_cap = (cap, mask)
                cur = max_adm_ratio
                if cur is None or dem * cur[1] > cur[0] * cap or \
                        (dem * cur[1] == cur[0] * cap and better_key(mask, cur[2])):
                    max_adm_ratio = (dem, cap, mask)
            else:
                cur = max_inadm_ratio
                if cur is None or dem * cur[1] > cur[0] * cap or \
                        (dem * cur[1] == cur[0] * cap and better_key(mask, cur[2])):
                    max_inadm_ratio = (dem, cap, mask)

        k += 1
        if k >= total:
            break
        b = (k & -k).bit_length() - 1
        u = free[b]
        s = side[u]
        side[u] = 1 - s
        mask ^= 1 << b
        for v, w in sup_inc[u]:
            if side[v] == s:
                cap += w
            else:
                cap -= w
        for v, w in dem_inc[u]:
            if side[v] == s:
                dem += w
            else:
                dem -= w

    def finish_ratio(acc):
        if acc is None:
            return None
        d, c, m = acc
        cut = _mask_cut(instance, m, free)
        ev = evaluate_cut(instance, cut)
        ratio = (ev.cut_demand / ev.cut_capacity) if ev.cut_capacity > 0 else None
        return (cut, ratio)

    sparse_entry = None
    if best_sparse is not None:
        cut = _mask_cut(instance, best_sparse[2], free)
        sparse_entry = (cut, evaluate_cut(instance, cut))
    cap_entry = None
    if min_adm_cap is not None:
        cut = _mask_cut(instance, min_adm_cap[1], free)
        cap_entry = (cut, evaluate_cut(instance, cut).cut_capacity)
    return CutAudit(
        n_cut_classes=total,
        sparsest=sparse_entry,
        min_admissible_capacity=cap_entry,
        max_admissible_ratio=finish_ratio(max_adm_ratio),
        max_inadmissible_ratio=finish_ratio(max_inadm_ratio),
    )


def exact_sparsest_cut(instance: SparsestCutInstance, bound: int = DEFAULT_ENUM_BOUND):
    """Global sparsest cut by full enumeration.

    Ties broken by the lexicographically smallest canonical side (the side
    containing the first vertex, compared as a sorted index tuple).
    """
    if instance.total_demand <= 0:
        raise InputError("instance has zero total demand")
    audit = _enumerate_extrema(instance, bound)
    if audit.sparsest is None:
        raise InputError("no cut separates any demand")
    return audit.sparsest


def audit_cuts(instance: SparsestCutInstance, bound: int = DEFAULT_ENUM_BOUND,
               separating=None) -> CutAudit:
    """Exhaustively verify the universally quantified cut claims.

    Cuts are partitioned by whether they separate the `separating` pair
    (the instance's terminals by default); extrema are tracked per class.
    """
    return _enumerate_extrema(instance, bound, separating=separating)


def exact_maxcut(graph, bound: int = DEFAULT_ENUM_BOUND):
    """Exact MaxCut of an unweighted graph by enumeration.

    `graph` needs `.vertices` and `.edges` (pairs); returns (set, size).
    """
    verts = list(graph.vertices)
    n = len(verts)
    if n > bound:
        raise BudgetError(f"maxcut enumeration over {n} vertices exceeds bound {bound}",
                          limit=bound, requested=n)
    index = {v: i for i, v in enumerate(verts)}
    pairs = [(index[u], index[v]) for u, v in graph.edges]
    best, best_mask = -1, 0
    for mask in range(1 << max(n - 1, 0)):
        size = 0
        for iu, iv in pairs:
            size += ((mask >> iu) ^ (mask >> iv)) & 1
        if size > best:
            best, best_mask = size, mask
    side = {verts[i] for i in range(n) if (best_mask >> i) & 1}
    return side, best
