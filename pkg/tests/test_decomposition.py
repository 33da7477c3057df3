import math

import pytest
from hypothesis import given, settings, strategies as st

from treecut.decomposition import (TreeDecomposition, balance, depth_bound,
                                   exact_decomposition, format_decomposition,
                                   parse_decomposition, root_path_unions,
                                   treewidth_by_search, validate)
from treecut.errors import BudgetError
from treecut.instance import SparsestCutInstance


def path_instance(n):
    return SparsestCutInstance.build(range(1, n + 1),
                                     [(i, i + 1, 1) for i in range(1, n)], [(1, n, 1)])


def clique_instance(n):
    sup = [(i, j, 1) for i in range(1, n + 1) for j in range(i + 1, n + 1)]
    return SparsestCutInstance.build(range(1, n + 1), sup, [(1, 2, 1)])


def test_validate_ok_path():
    inst = path_instance(3)
    dec = TreeDecomposition.build([{1, 2}, {2, 3}], [(0, 1)])
    report = validate(inst, dec)
    assert report.ok
    assert dec.width == 1


def test_validate_uncovered_edge():
    inst = path_instance(3)
    dec = TreeDecomposition.build([{1, 2}, {3}], [(0, 1)])
    report = validate(inst, dec)
    assert not report.ok
    assert report.witness == (2, 3)


def test_validate_disconnected_trace():
    inst = path_instance(3)
    dec = TreeDecomposition.build([{1, 2}, {2, 3}, {1, 3}], [(0, 1), (1, 2)])
    # vertex 1 appears in bags 0 and 2, which are not adjacent
    report = validate(inst, dec)
    assert not report.ok and report.witness == 1


def test_exact_decomposition_tree_width_one():
    inst = SparsestCutInstance.build(
        range(1, 8), [(1, 2, 1), (1, 3, 1), (2, 4, 1), (2, 5, 1), (3, 6, 1), (3, 7, 1)],
        [(4, 7, 1)])
    dec = exact_decomposition(inst)
    assert validate(inst, dec).ok
    assert dec.width == 1


@pytest.mark.parametrize("n,expected", [(3, 2), (4, 3), (5, 4)])
def test_exact_decomposition_clique(n, expected):
    inst = clique_instance(n)
    dec = exact_decomposition(inst)
    assert validate(inst, dec).ok
    assert dec.width == expected


def test_exact_decomposition_cycle():
    sup = [(i, i % 6 + 1, 1) for i in range(1, 7)]
    inst = SparsestCutInstance.build(range(1, 7), sup, [(1, 4, 1)])
    dec = exact_decomposition(inst)
    assert validate(inst, dec).ok
    assert dec.width == 2


def test_exact_decomposition_respects_bound():
    with pytest.raises(BudgetError):
        exact_decomposition(path_instance(19))
    exact_decomposition(path_instance(19), bound=19)


@given(st.integers(min_value=2, max_value=8), st.randoms(use_true_random=False))
@settings(max_examples=25)
def test_exact_matches_search_oracle(n, rng):
    edges = [(rng.randint(1, v - 1), v, 1) for v in range(2, n + 1)]
    for _ in range(rng.randint(0, n)):
        u, v = rng.randint(1, n), rng.randint(1, n)
        if u != v and not any({a, b} == {u, v} for a, b, _ in edges):
            edges.append((u, v, 1))
    inst = SparsestCutInstance.build(range(1, n + 1), edges, [(1, n, 1)])
    dec = exact_decomposition(inst)
    assert validate(inst, dec).ok
    assert dec.width == treewidth_by_search(inst)


def test_balance_single_bag_returned_as_is():
    inst = clique_instance(4)
    dec = TreeDecomposition.build([frozenset(inst.vertices)], [])
    assert balance(dec) is dec


def test_balance_long_path_decomposition():
    n = 30
    inst = path_instance(n)
    dec = TreeDecomposition.build([{i, i + 1} for i in range(1, n)],
                                  [(i, i + 1) for i in range(n - 2)])
    out = balance(dec)
    assert validate(inst, out).ok
    assert out.is_binary()
    assert out.depth <= depth_bound(n) == 38
    assert out.max_bag_size <= 9
    assert validate(inst, balance(out)).ok


@given(st.integers(min_value=2, max_value=12), st.randoms(use_true_random=False))
@settings(max_examples=30)
def test_balance_random_trees(n, rng):
    edges = [(rng.randint(1, v - 1), v, 1) for v in range(2, n + 1)]
    inst = SparsestCutInstance.build(range(1, n + 1), edges, [(1, n, 1)])
    dec = exact_decomposition(inst)
    out = balance(dec)
    assert validate(inst, out).ok
    assert out.is_binary()
    assert out.depth <= depth_bound(n)
    assert out.max_bag_size <= 3 * dec.max_bag_size


def test_root_path_unions_basics():
    dec = TreeDecomposition.build([{1, 2, 3}, {3, 4, 5}, {5, 6, 7}, {3, 8, 9}],
                                  [(0, 1), (1, 2), (0, 3)])
    unions = root_path_unions(dec)
    assert unions[0].union_set == frozenset({1, 2, 3})  # V_r = U_r
    assert unions[2].union_set == frozenset({1, 2, 3, 4, 5, 6, 7})
    assert unions[3].union_set == frozenset({1, 2, 3, 8, 9})
    for u in unions:
        assert len(u.union_set) <= dec.max_bag_size * (dec.depth + 1)


def test_decomposition_round_trip():
    inst = path_instance(5)
    dec = exact_decomposition(inst)
    text = format_decomposition(dec, inst)
    back = parse_decomposition(text, inst, root=dec.root)
    assert back.bags == dec.bags
    assert set(back.tree_edges) == set(dec.tree_edges)


def star_decomposition(n):
    """Star supply graph with one bag per edge hanging off a center bag."""
    inst = SparsestCutInstance.build(
        range(1, n + 1), [(1, v, 1) for v in range(2, n + 1)], [(2, n, 1)])
    bags = [{1}] + [{1, v} for v in range(2, n + 1)]
    edges = [(0, k) for k in range(1, n)]
    return inst, TreeDecomposition.build(bags, edges)


def caterpillar_decomposition(n):
    """Path of bags with a pendant bag at every spine node."""
    inst = SparsestCutInstance.build(
        range(1, 2 * n + 1),
        [(i, i + 1, 1) for i in range(1, n)] + [(i, n + i, 1) for i in range(1, n + 1)],
        [(1, 2 * n, 1)])
    bags = []
    edges = []
    for i in range(1, n):
        bags.append({i, i + 1})
    for i in range(1, n + 1):
        bags.append({i, n + i})
    for k in range(len(bags) - 1):
        if k < n - 2:
            edges.append((k, k + 1))
    spine = list(range(n - 1))
    for j, k in enumerate(range(n - 1, len(bags))):
        anchor = min(j, n - 2) if spine else k
        edges.append((anchor, k))
    return inst, TreeDecomposition.build(bags, edges)


@pytest.mark.parametrize("n", [20, 40])
def test_balance_star_shapes(n):
    inst, dec = star_decomposition(n)
    assert validate(inst, dec).ok
    out = balance(dec)
    assert validate(inst, out).ok
    assert out.is_binary()
    assert out.depth <= depth_bound(n)
    assert out.max_bag_size <= 3 * dec.max_bag_size


@pytest.mark.parametrize("n", [10, 18])
def test_balance_caterpillar_shapes(n):
    inst, dec = caterpillar_decomposition(n)
    assert validate(inst, dec).ok
    out = balance(dec)
    assert validate(inst, out).ok
    assert out.is_binary()
    assert out.depth <= depth_bound(2 * n)
    assert out.max_bag_size <= 3 * dec.max_bag_size


def test_balance_depth_is_logarithmic_on_long_paths():
    # not just within the bound: the rebuild should be genuinely shallow
    n = 120
    inst = path_instance(n)
    dec = TreeDecomposition.build([{i, i + 1} for i in range(1, n)],
                                  [(i, i + 1) for i in range(n - 2)])
    out = balance(dec)
    assert validate(inst, out).ok
    assert out.depth <= 2 * math.ceil(math.log2(n)) + 4


def test_exact_matches_search_oracle_at_ten():
    import random as _random
    rng = _random.Random(5)
    n = 10
    edges = [(rng.randint(1, v - 1), v, 1) for v in range(2, n + 1)]
    edges += [(1, 5, 1), (2, 8, 1), (4, 9, 1), (3, 10, 1)]
    inst = SparsestCutInstance.build(range(1, n + 1), sorted(set(edges)), [(1, n, 1)])
    dec = exact_decomposition(inst)
    assert validate(inst, dec).ok
    assert dec.width == treewidth_by_search(inst, bound=10)
