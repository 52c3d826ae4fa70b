"""Slow, obviously-correct reference implementations used only by the tests."""

import itertools
import math

import numpy as np


def children_map(nodes, edges):
    out = {n: set() for n in nodes}
    for u, v in edges:
        out[u].add(v)
    return out


def descendants_of(nodes, edges, x):
    kids = children_map(nodes, edges)
    seen, stack = set(), [x]
    while stack:
        for c in kids[stack.pop()]:
            if c not in seen:
                seen.add(c)
                stack.append(c)
    return seen


def ancestors_of(nodes, edges, x):
    return {n for n in nodes if x in descendants_of(nodes, edges, n)}


def simple_paths(nodes, edges, x, y):
    nbrs = {n: set() for n in nodes}
    for u, v in edges:
        nbrs[u].add(v)
        nbrs[v].add(u)

    def walk(path):
        last = path[-1]
        if last == y:
            yield list(path)
            return
        for n in sorted(nbrs[last]):
            if n not in path:
                path.append(n)
                yield from walk(path)
                path.pop()

    yield from walk([x])


def d_separated_paths(nodes, edges, x, y, z):
    """d-separation by checking every simple path for a block."""
    z = set(z)
    edge_set = set(edges)
    for path in simple_paths(nodes, edges, x, y):
        blocked = False
        for a, b, c in zip(path, path[1:], path[2:]):
            collider = (a, b) in edge_set and (c, b) in edge_set
            if collider:
                if b not in z and not (descendants_of(nodes, edges, b) & z):
                    blocked = True
                    break
            elif b in z:
                blocked = True
                break
        if not blocked:
            return False
    return True


def is_acyclic(nodes, edges):
    indeg = {n: 0 for n in nodes}
    kids = children_map(nodes, edges)
    for _, v in edges:
        indeg[v] += 1
    queue = [n for n in nodes if indeg[n] == 0]
    seen = 0
    while queue:
        n = queue.pop()
        seen += 1
        for c in kids[n]:
            indeg[c] -= 1
            if indeg[c] == 0:
                queue.append(c)
    return seen == len(nodes)


def v_structures(edges):
    edge_set = set(edges)
    adj = {frozenset(e) for e in edges}
    out = set()
    for (a, b), (c, d) in itertools.permutations(edge_set, 2):
        if b == d and a < c and frozenset((a, c)) not in adj:
            out.add((a, b, c))
    return out


def markov_equivalent_dags(nodes, edges):
    """Every DAG with the same skeleton and v-structures, by trying all orientations."""
    pairs = sorted(tuple(sorted(e)) for e in edges)
    target = v_structures(edges)
    out = []
    for flips in itertools.product((False, True), repeat=len(pairs)):
        cand = [(v, u) if f else (u, v) for (u, v), f in zip(pairs, flips)]
        if is_acyclic(nodes, cand) and v_structures(cand) == target:
            out.append(set(cand))
    return out


def brute_cpdag(nodes, edges):
    """(directed, undirected) edges of the equivalence class: directed iff shared by all members."""
    members = markov_equivalent_dags(nodes, edges)
    directed, undirected = set(), set()
    for u, v in edges:
        if all((u, v) in m for m in members):
            directed.add((u, v))
        elif all((v, u) in m for m in members):
            directed.add((v, u))
        else:
            undirected.add(frozenset((u, v)))
    return directed, undirected


def brute_joint(net):
    """Dict assignment-tuple -> probability, by looping over every assignment."""
    nodes = net.nodes
    out = {}
    for assign in itertools.product(*(range(net.cardinalities[f]) for f in nodes)):
        a = dict(zip(nodes, assign))
        p = 1.0
        for f in nodes:
            row = 0
            for q in net.parent_order(f):
                row = row * net.cardinalities[q] + a[q]
            p *= net.cpt(f)[row, a[f]]
        out[assign] = p
    return out


def g_statistic_loops(table):
    """G = 2 sum O ln(O/E) for one 2-D table, written out with loops."""
    table = [[float(c) for c in row] for row in table]
    n = sum(map(sum, table))
    rows = [sum(r) for r in table]
    cols = [sum(c) for c in zip(*table)]
    g = 0.0
    for i, r in enumerate(table):
        for j, o in enumerate(r):
            if o > 0:
                g += o * math.log(o / (rows[i] * cols[j] / n))
    return 2 * g


def chi2_sf_quad(x, k):
    """Chi-square tail by numerical integration of the density."""
    from scipy.integrate import quad

    def pdf(t):
        return math.exp((k / 2 - 1) * math.log(t) - t / 2 - (k / 2) * math.log(2) - math.lgamma(k / 2))

    head, _ = quad(pdf, 0, x, limit=200) if x > 0 else (0.0, 0.0)
    return 1.0 - head


def chi2_sf_mp(x, k):
    import mpmath

    return float(mpmath.gammainc(mpmath.mpf(k) / 2, mpmath.mpf(x) / 2, mpmath.inf, regularized=True))


def random_edges(rng, names, p):
    order = list(rng.permutation(len(names)))
    return [(names[order[i]], names[order[j]])
            for i in range(len(names)) for j in range(i + 1, len(names)) if rng.random() < p]


def empirical(values, card):
    return np.bincount(values, minlength=card) / len(values)
