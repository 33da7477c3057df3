"""Instance generators: reduction building blocks, instance powering, the
union-of-cliques label-cover transform, and the hypercube gadget.

Every generator co-emits a valid tree decomposition whose root bag
contains both terminals, which is what lets the powering operation stitch
copy decompositions together without growing the width.

Naming: powered instances use path-encoded vertex ids ("e", edge_index,
inner_id), so provenance is stable across runs.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .decomposition import TreeDecomposition
from .errors import BudgetError, InputError, InvariantError
from .instance import Cut, SparsestCutInstance, as_weight

DEFAULT_POWER_EDGE_BUDGET = 250_000
DEFAULT_GADGET_DIM_BOUND = 6


# ---------------------------------------------------------------------------
# MaxCut instances.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MaxCutInstance:
    """Connected unweighted MaxCut instance on vertices 1..n."""

    vertices: tuple
    edges: tuple

    def __post_init__(self):
        vs = set(self.vertices)
        for u, v in self.edges:
            if u not in vs or v not in vs or u == v:
                raise InputError(f"bad edge ({u},{v})")
        if not self._connected():
            raise InputError("MaxCut instance must be connected")

    def _connected(self) -> bool:
        if not self.vertices:
            return False
        adj = {v: set() for v in self.vertices}
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        seen = {self.vertices[0]}
        stack = [self.vertices[0]]
        while stack:
            for w in adj[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(self.vertices)

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def m(self) -> int:
        return len(self.edges)

    def degree(self, v) -> int:
        return sum(1 for u, w in self.edges if v in (u, w))

    @staticmethod
    def complete(n: int) -> "MaxCutInstance":
        return MaxCutInstance(tuple(range(1, n + 1)),
                              tuple((i, j) for i in range(1, n + 1)
                                    for j in range(i + 1, n + 1)))

    @staticmethod
    def path(n: int) -> "MaxCutInstance":
        return MaxCutInstance(tuple(range(1, n + 1)),
                              tuple((i, i + 1) for i in range(1, n)))

    @staticmethod
    def cycle(n: int) -> "MaxCutInstance":
        return MaxCutInstance(tuple(range(1, n + 1)),
                              tuple((i, i % n + 1) for i in range(1, n + 1)))

    @staticmethod
    def named(name: str) -> "MaxCutInstance":
        try:
            kind, n = name[0].lower(), int(name[1:])
        except (IndexError, ValueError) as exc:
            raise InputError(f"bad maxcut instance name {name!r} (use k5/p3/c5)") from exc
        if kind == "k":
            return MaxCutInstance.complete(n)
        if kind == "p":
            return MaxCutInstance.path(n)
        if kind == "c":
            return MaxCutInstance.cycle(n)
        raise InputError(f"unknown maxcut instance name {name!r} (use k5/p3/c5)")


# ---------------------------------------------------------------------------
# Basic building block.
# ---------------------------------------------------------------------------

def building_block(H: MaxCutInstance, include_st_demand: bool):
    """The two-terminal star encoding of a MaxCut instance.

    Vertices {s,t} + [n]; both stars carry capacity deg(i)/2m; each H-edge
    becomes a 1/m demand; the s-t unit demand is optional (with it the
    sparsest cut value equals m/(m+maxcut)).

    Returns (instance, decomposition).
    """
    if H.m < 1:
        raise InputError("building block needs at least one edge")
    n, m = H.n, H.m
    verts = ("s", "t") + tuple(H.vertices)
    supply = []
    for i in H.vertices:
        c = Fraction(H.degree(i), 2 * m)
        supply.append(("s", i, c))
        supply.append(("t", i, c))
    demand = []
    if include_st_demand:
        demand.append(("s", "t", Fraction(1)))
    for u, v in H.edges:
        demand.append((u, v, Fraction(1, m)))
    inst = SparsestCutInstance(verts, tuple(supply), tuple(demand), ("s", "t"))
    bags = [frozenset({"s", "t", i}) for i in H.vertices]
    edges = [(k, k + 1) for k in range(n - 1)]
    dec = TreeDecomposition.build(bags, edges, root=0)
    return inst, dec


# ---------------------------------------------------------------------------
# Powering.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PoweredInstance:
    base: SparsestCutInstance
    levels: int
    instance: SparsestCutInstance
    decomposition: TreeDecomposition
    supply_provenance: tuple  # per composed supply edge: base-edge index path
    demand_levels: tuple  # per composed demand edge: level that introduced it


def _ensure_terminal_root(dec: TreeDecomposition, s, t) -> TreeDecomposition:
    for i, bag in enumerate(dec.bags):
        if s in bag and t in bag:
            if i == dec.root:
                return dec
            return TreeDecomposition(dec.bags, dec.tree_edges, root=i)
    bags = [bag | {s, t} for bag in dec.bags]
    return TreeDecomposition.build(bags, dec.tree_edges, root=dec.root)


def power(base: SparsestCutInstance, levels: int,
          base_decomposition: Optional[TreeDecomposition] = None,
          edge_budget: int = DEFAULT_POWER_EDGE_BUDGET) -> PoweredInstance:
    """Replace every capacity edge by a scaled copy of the previous level.

    Terminals of each copy are identified with the replaced edge's
    endpoints; copy weights are scaled by the replaced edge's capacity.
    Level-l demands are fresh copies of the base demands.
    """
    if base.terminals is None:
        raise InputError("powering needs designated terminals")
    if levels < 1:
        raise InputError("levels must be >= 1")
    m = len(base.supply_edges)
    if m ** levels > edge_budget:
        raise BudgetError(f"powering to level {levels} needs {m ** levels} supply "
                          f"edges, budget is {edge_budget}",
                          limit=edge_budget, requested=m ** levels)
    if base_decomposition is None:
        from .decomposition import exact_decomposition
        base_decomposition = exact_decomposition(base)
    s, t = base.terminals
    base_dec = _ensure_terminal_root(base_decomposition, s, t)

    inst, dec = base, base_dec
    prov = tuple((i,) for i in range(m))
    dem_levels = tuple(1 for _ in base.demand_edges)
    for _ in range(levels - 1):
        inst, dec, prov, dem_levels = _compose(base, base_dec, inst, dec, prov, dem_levels)
    if len(inst.supply_edges) != m ** levels:
        raise InvariantError("capacity edge count mismatch after powering")
    return PoweredInstance(base, levels, inst, dec, prov, dem_levels)


def _compose(outer, outer_dec, inner, inner_dec, inner_prov, inner_dem_levels):
    """One powering step: outer with each capacity edge replaced by inner."""
    s, t = outer.terminals
    verts = list(outer.vertices)
    supply = []
    demand = []
    prov = []
    dem_levels = []
    bags = list(outer_dec.bags)
    tree_edges = list(outer_dec.tree_edges)
    level = max(inner_dem_levels, default=0) + 1

    outer_bag_with = {}
    for bi, bag in enumerate(outer_dec.bags):
        for u, v, _ in outer.supply_edges:
            if u in bag and v in bag and (u, v) not in outer_bag_with:
                outer_bag_with[(u, v)] = bi

    demand.extend(outer.demand_edges)
    dem_levels.extend(level for _ in outer.demand_edges)

    ins, int_ = inner.terminals
    for ei, (u, v, cap) in enumerate(outer.supply_edges):
        def rename(x, ei=ei, u=u, v=v):
            if x == ins:
                return u
            if x == int_:
                return v
            return ("e", ei, x)

        for x in inner.vertices:
            if x not in (ins, int_):
                verts.append(("e", ei, x))
        for k, (a, b, w) in enumerate(inner.supply_edges):
            supply.append((rename(a), rename(b), cap * w))
            prov.append((ei,) + inner_prov[k])
        for k, (a, b, w) in enumerate(inner.demand_edges):
            demand.append((rename(a), rename(b), cap * w))
            dem_levels.append(inner_dem_levels[k])
        # attach the copy's decomposition under a bag covering (u, v)
        offset = len(bags)
        for bag in inner_dec.bags:
            bags.append(frozenset(rename(x) for x in bag))
        for i, j in inner_dec.tree_edges:
            tree_edges.append((offset + i, offset + j))
        tree_edges.append((outer_bag_with[(u, v)], offset + inner_dec.root))

    inst = SparsestCutInstance(tuple(verts), tuple(supply), tuple(demand), (s, t))
    dec = TreeDecomposition.build(bags, tree_edges, root=outer_dec.root)
    return inst, dec, tuple(prov), tuple(dem_levels)


def lift_cut(powered: PoweredInstance, base_cut: Cut) -> Cut:
    """The recursively composed cut of an admissible base cut.

    Uncut copies follow their terminals onto one side; cut copies are
    split by the level-below lifted cut, complemented when the copy is
    traversed against its s-t orientation.
    """
    base = powered.base
    s, t = base.terminals
    if (s in base_cut.side_a) == (t in base_cut.side_a):
        raise InputError("lift_cut needs an admissible base cut")
    side = base_cut.side_a if s in base_cut.side_a else \
        frozenset(base.vertices) - base_cut.side_a

    def lift(levels: int) -> frozenset:
        if levels == 1:
            return side
        inner_cut = lift(levels - 1)
        interior = [x for x in _level_vertices(base, levels - 1) if x not in (s, t)]
        out = set(side)
        for ei, (u, v, _) in enumerate(base.supply_edges):
            u_in, v_in = u in side, v in side
            if u_in and v_in:
                out.update(("e", ei, x) for x in interior)
            elif u_in and not v_in:
                out.update(("e", ei, x) for x in interior if x in inner_cut)
            elif v_in and not u_in:
                out.update(("e", ei, x) for x in interior if x not in inner_cut)
        return frozenset(out)

    return Cut(lift(powered.levels))


def _level_vertices(base, levels: int):
    """Vertex list of the level-`levels` power, in _compose's naming."""
    if levels == 1:
        return list(base.vertices)
    inner = _level_vertices(base, levels - 1)
    s, t = base.terminals
    out = list(base.vertices)
    for ei in range(len(base.supply_edges)):
        out.extend(("e", ei, x) for x in inner if x not in (s, t))
    return out


# ---------------------------------------------------------------------------
# Unique label cover: union-of-cliques instances.
# ---------------------------------------------------------------------------

def apply_sigma(sigma: tuple, x: int, d: int) -> int:
    """Permute cube coordinates: output bit i is input bit sigma^{-1}(i)."""
    inv = [0] * d
    for j, img in enumerate(sigma):
        inv[img] = j
    y = 0
    for i in range(d):
        if (x >> inv[i]) & 1:
            y |= 1 << i
    return y


def compose_sigma(outer: tuple, inner: tuple) -> tuple:
    """(outer o inner)(i) = outer[inner[i]]."""
    return tuple(outer[inner[i]] for i in range(len(inner)))


def invert_sigma(sigma: tuple) -> tuple:
    inv = [0] * len(sigma)
    for j, img in enumerate(sigma):
        inv[img] = j
    return tuple(inv)


@dataclass(frozen=True)
class UlcInstance:
    """Unique label cover on a multigraph, constraints as permutations.

    edges[i] = (u, v, sigma) meaning sigma(label(u)) must equal label(v);
    the reverse direction uses the inverse.  cliques, when present, list
    edge indices per clique as the union-of-cliques witness.
    """

    vertices: tuple
    edges: tuple
    d: int
    cliques: Optional[tuple] = None

    def __post_init__(self):
        vs = set(self.vertices)
        for u, v, sigma in self.edges:
            if u not in vs or v not in vs or u == v:
                raise InputError(f"bad ULC edge ({u},{v})")
            if sorted(sigma) != list(range(self.d)):
                raise InputError(f"constraint on ({u},{v}) is not a permutation")

    def sigma(self, u, v, index: int) -> tuple:
        eu, ev, s = self.edges[index]
        if (eu, ev) == (u, v):
            return s
        if (ev, eu) == (u, v):
            return invert_sigma(s)
        raise InputError(f"edge {index} does not join ({u},{v})")

    def satisfied_fraction(self, labeling: dict) -> Fraction:
        good = sum(1 for u, v, s in self.edges if s[labeling[u]] == labeling[v])
        return Fraction(good, len(self.edges))

    def best_labeling(self, budget: int = 2_000_000):
        count = self.d ** len(self.vertices)
        if count > budget:
            raise BudgetError(f"labeling search over {count} assignments exceeds "
                              f"budget {budget}", limit=budget, requested=count)
        best, best_lab = Fraction(-1), None
        for labels in itertools.product(range(self.d), repeat=len(self.vertices)):
            lab = dict(zip(self.vertices, labels))
            val = self.satisfied_fraction(lab)
            if val > best:
                best, best_lab = val, lab
        return best_lab, best

    def delta_niceness(self):
        """(delta, None) when the witness checks out, else (None, reason)."""
        if self.cliques is None:
            return None, "no clique partition witness"
        if len(self.cliques) != len(self.vertices):
            return None, (f"{len(self.cliques)} cliques != {len(self.vertices)} vertices")
        seen = set()
        sizes = set()
        membership = {v: 0 for v in self.vertices}
        for edge_indices in self.cliques:
            members = set()
            for i in edge_indices:
                if i in seen:
                    return None, f"edge {i} appears in two cliques"
                seen.add(i)
                u, v, _ = self.edges[i]
                members.add(u)
                members.add(v)
            k = len(members)
            sizes.add(k)
            if len(edge_indices) != k * (k - 1) // 2:
                return None, f"clique on {sorted(map(str, members))} is not complete"
            pairs = {frozenset((self.edges[i][0], self.edges[i][1])) for i in edge_indices}
            if len(pairs) != len(edge_indices):
                return None, "clique repeats a pair"
            for v in members:
                membership[v] += 1
        if len(seen) != len(self.edges):
            return None, "cliques do not cover every edge"
        if len(sizes) != 1:
            return None, f"clique sizes differ: {sorted(sizes)}"
        delta = sizes.pop()
        bad = {v: c for v, c in membership.items() if c != delta}
        if bad:
            return None, f"vertices not in exactly {delta} cliques: {bad}"
        return delta, None

    def require_delta_nice(self) -> int:
        delta, reason = self.delta_niceness()
        if delta is None:
            raise InputError(f"instance is not delta-nice: {reason}")
        return delta

    def clique_union_delta(self) -> int:
        """Uniform clique size of the edge partition witness (weaker than
        delta-niceness: vertex membership counts are not constrained)."""
        if self.cliques is None:
            raise InputError("no clique partition witness")
        seen = set()
        sizes = set()
        for edge_indices in self.cliques:
            members = set()
            for i in edge_indices:
                if i in seen:
                    raise InputError(f"edge {i} appears in two cliques")
                seen.add(i)
                u, v, _ = self.edges[i]
                members.update((u, v))
            k = len(members)
            if len(edge_indices) != k * (k - 1) // 2:
                raise InputError(f"clique on {sorted(map(str, members))} is not complete")
            sizes.add(k)
        if len(seen) != len(self.edges):
            raise InputError("cliques do not cover every edge")
        if len(sizes) != 1:
            raise InputError(f"clique sizes differ: {sorted(sizes)}")
        return sizes.pop()


@dataclass(frozen=True)
class BipartiteUlc:
    """Bipartite unique label cover; constraints read left-to-right."""

    left: tuple
    right: tuple
    edges: tuple  # (u in left, v in right, sigma)
    d: int

    def degree_left(self, u) -> int:
        return sum(1 for a, _, _ in self.edges if a == u)

    def degree_right(self, v) -> int:
        return sum(1 for _, b, _ in self.edges if b == v)

    def satisfied_fraction(self, labeling: dict) -> Fraction:
        good = sum(1 for u, v, s in self.edges if s[labeling[u]] == labeling[v])
        return Fraction(good, len(self.edges))


def bipartite_to_cliques(B: BipartiteUlc, require_nice: bool = True) -> UlcInstance:
    """Collapse a regular bipartite ULC onto its right side.

    Each left vertex turns into a clique over its neighborhood; the
    composed constraint routes through the shared left vertex.  With
    require_nice the input must be regular on both sides (so the output
    is delta-nice); without it only uniform left degrees are enforced.
    """
    delta_values = {B.degree_left(u) for u in B.left}
    if require_nice:
        delta_values |= {B.degree_right(v) for v in B.right}
    if len(delta_values) != 1:
        raise InputError(f"bipartite instance is not regular: degrees {sorted(delta_values)}")
    edges = []
    cliques = []
    by_left = {u: [] for u in B.left}
    for u, v, sigma in B.edges:
        by_left[u].append((v, sigma))
    for u in B.left:
        clique = []
        nbrs = by_left[u]
        for (v, sv), (w, sw) in itertools.combinations(nbrs, 2):
            clique.append(len(edges))
            edges.append((v, w, compose_sigma(sw, invert_sigma(sv))))
        cliques.append(tuple(clique))
    out = UlcInstance(tuple(B.right), tuple(edges), B.d, tuple(cliques))
    if require_nice:
        out.require_delta_nice()
    return out


# ---------------------------------------------------------------------------
# The hypercube gadget.
# ---------------------------------------------------------------------------

def cube_vertex(v, x: int):
    return ("q", v, x)


@dataclass(frozen=True)
class UgGadget:
    ulc: UlcInstance
    delta: int
    alpha: Fraction
    instance: SparsestCutInstance
    decomposition: TreeDecomposition
    n_cube_nodes: int  # N
    n_demand_edges: int  # M

    def predicted(self) -> dict:
        d = self.ulc.d
        return {
            "N": self.n_cube_nodes,
            "M": self.n_demand_edges,
            "total_demand": "1",
            "total_capacity": str(2 + self.alpha * d / 2),
            "demand_edges_per_cube_node": self.delta * (self.delta - 1),
            "dictator_cut_capacity": str(1 + self.alpha / 2),
        }


def ug_gadget(ulc: UlcInstance, alpha, dim_bound: int = DEFAULT_GADGET_DIM_BOUND) -> UgGadget:
    """Hypercube-per-vertex sparsest-cut encoding of a delta-nice ULC.

    Star edges of capacity 1/N from both terminals to every cube node,
    cube edges of capacity alpha/N, and one 1/M demand per constraint and
    cube node, joining x in Q_v to the negation of sigma(x) in Q_w.
    """
    delta = ulc.require_delta_nice()
    d = ulc.d
    if d > dim_bound:
        raise BudgetError(f"label dimension {d} exceeds bound {dim_bound}",
                          limit=dim_bound, requested=d)
    alpha = as_weight(alpha)
    if alpha < 0:
        raise InputError("cube edge capacity must be nonnegative")
    n = len(ulc.vertices)
    N = n * (1 << d)
    M = len(ulc.edges) * (1 << d)
    verts = ["s", "t"]
    cube_nodes = []
    for v in ulc.vertices:
        for x in range(1 << d):
            cube_nodes.append(cube_vertex(v, x))
    verts.extend(cube_nodes)

    supply = []
    star_cap = Fraction(1, N)
    for node in cube_nodes:
        supply.append(("s", node, star_cap))
        supply.append(("t", node, star_cap))
    cube_cap = alpha / N
    for v in ulc.vertices:
        for x in range(1 << d):
            for i in range(d):
                y = x ^ (1 << i)
                if x < y:
                    supply.append((cube_vertex(v, x), cube_vertex(v, y), cube_cap))

    demand = []
    dem = Fraction(1, M)
    full = (1 << d) - 1
    for u, v, sigma in ulc.edges:
        for x in range(1 << d):
            partner = apply_sigma(sigma, x, d) ^ full
            demand.append((cube_vertex(u, x), cube_vertex(v, partner), dem))

    inst = SparsestCutInstance(tuple(verts), tuple(supply), tuple(demand), ("s", "t"))
    bags = [frozenset({"s", "t"} | {cube_vertex(v, x) for x in range(1 << d)})
            for v in ulc.vertices]
    edges = [(k, k + 1) for k in range(n - 1)]
    dec = TreeDecomposition.build(bags, edges, root=0)
    return UgGadget(ulc, delta, alpha, inst, dec, N, M)


def dictator_cut(gadget: UgGadget, labeling: dict) -> Cut:
    """Coordinate cut chosen per cube by a labeling; capacity 1 + alpha/2."""
    side = {"s"}
    for v in gadget.ulc.vertices:
        if v not in labeling:
            raise InputError(f"labeling misses vertex {v}")
        bit = 1 << labeling[v]
        for x in range(1 << gadget.ulc.d):
            if x & bit:
                side.add(cube_vertex(v, x))
    return Cut(frozenset(side))


def clique_product_maxcut_bound(ulc: UlcInstance, copies: int,
                                budget: int = 24) -> dict:
    """Exhaustively check the cut bound on the blown-up clique union.

    The product graph replaces every vertex by `copies` clones and every
    edge by the complete bipartite pattern between the clone groups; no
    cut may exceed a (1/2 + 1/(2(delta-1))) fraction of the edges.  Only
    the union-of-cliques witness is needed, not full niceness.
    """
    delta = ulc.clique_union_delta()
    verts = [(v, i) for v in ulc.vertices for i in range(copies)]
    if len(verts) > budget:
        raise BudgetError(f"product on {len(verts)} vertices exceeds bound {budget}",
                          limit=budget, requested=len(verts))
    pairs = []
    for u, v, _ in ulc.edges:
        for i in range(copies):
            for j in range(copies):
                pairs.append((verts.index((u, i)), verts.index((v, j))))
    total = len(pairs)
    bound = Fraction(1, 2) + Fraction(1, 2 * (delta - 1))
    worst = Fraction(0)
    worst_mask = 0
    nv = len(verts)
    for mask in range(1 << (nv - 1)):
        cut = 0
        for iu, iv in pairs:
            cut += ((mask >> iu) ^ (mask >> iv)) & 1
        frac = Fraction(cut, total)
        if frac > worst:
            worst, worst_mask = frac, mask
    return {
        "delta": delta,
        "copies": copies,
        "edges": total,
        "max_cut_fraction": worst,
        "bound": bound,
        "holds": worst <= bound,
        "witness": sorted(str(verts[i]) for i in range(nv) if (worst_mask >> i) & 1),
    }


def random_delta_nice_ulc(n: int, delta: int, d: int, seed: int = 0,
                          plant: bool = False) -> UlcInstance:
    """Random delta-nice ULC on n vertices via delta bipartite matchings.

    Left vertex i joins rights i, i+1, ..., i+delta-1 (mod n) with random
    per-edge permutations, then collapses onto the right side.  With
    `plant`, constraints are wired around a hidden labeling, so the output
    is fully satisfiable (the completeness side of the gadget).
    """
    if not (2 <= delta <= n):
        raise InputError(f"need 2 <= delta <= n, got delta={delta}, n={n}")
    rng = random.Random(seed)
    left = tuple(f"L{i}" for i in range(n))
    right = tuple(range(1, n + 1))
    hidden = {v: rng.randrange(d) for v in left + right}
    edges = []
    for shift in range(delta):
        for i in range(n):
            u, v = left[i], right[(i + shift) % n]
            sigma = list(range(d))
            rng.shuffle(sigma)
            if plant:
                j = sigma.index(hidden[v])
                sigma[j], sigma[hidden[u]] = sigma[hidden[u]], hidden[v]
            edges.append((u, v, tuple(sigma)))
    out = bipartite_to_cliques(BipartiteUlc(left, right, tuple(edges), d))
    if plant:
        labeling = {v: hidden[v] for v in right}
        if out.satisfied_fraction(labeling) != 1:
            raise InvariantError("planted labeling failed to satisfy the instance")
    return out


def ulc_to_json_dict(ulc: UlcInstance) -> dict:
    return {
        "vertices": list(ulc.vertices),
        "d": ulc.d,
        "edges": [[u, v, list(sigma)] for u, v, sigma in ulc.edges],
        "cliques": [list(c) for c in ulc.cliques] if ulc.cliques else None,
    }
