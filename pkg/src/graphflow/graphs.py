"""Decorated graphs, canonical forms, gradings and the coboundary operator.

Two flavors of decorated graph live here.  A *manifold* graph is an
oriented multigraph on numbered vertices.  A *knot* graph additionally
carries an implicit oriented loop through its external vertices
1..n_ext; only the internal (chordal) edges are stored.  Graphs are
identified up to relabeling and edge reversal with the sign
(-1)^(p+l), where p is the permutation parity and l the number of
reversed edges; ``canonicalize`` reduces to a unique representative or
detects that the class is zero.  ``delta`` is the signed sum of
single-edge contractions of regular edges and squares to zero.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Mapping

from .errors import (
    GradeMismatch,
    InvalidGraph,
    NotContractible,
    NotRegular,
    ResourceLimit,
)

Edge = tuple[int, int]

MAX_VERTICES = 10
MAX_EDGES = 15


class Flavor(str, Enum):
    MANIFOLD = "manifold"
    KNOT = "knot"


@dataclass(frozen=True, order=True)
class DecoratedGraph:
    """Labeled oriented multigraph, in manifold or knot flavor.

    ``edges`` holds directed pairs of 1-based vertex labels.  In knot
    flavor these are the internal edges only; the knot loop through
    external vertices 1..n_ext (in label order) is implicit.
    """

    flavor: Flavor
    n_ext: int
    n_int: int
    edges: tuple[Edge, ...]

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple((int(i), int(j)) for i, j in self.edges))
        if self.flavor is Flavor.MANIFOLD:
            if self.n_ext != 0:
                raise InvalidGraph("manifold graphs have no external vertices")
        else:
            if self.n_ext < 2:
                raise InvalidGraph("knot graphs need at least two external vertices")
        if self.n_int < 0:
            raise InvalidGraph("negative internal vertex count")
        nv = self.n_vertices
        for i, j in self.edges:
            if i == j:
                raise InvalidGraph(f"edge ({i},{j}) connects a vertex to itself")
            if not (1 <= i <= nv and 1 <= j <= nv):
                raise InvalidGraph(f"edge ({i},{j}) outside vertex range 1..{nv}")

    @property
    def n_vertices(self) -> int:
        return self.n_ext + self.n_int

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def is_external(self, v: int) -> bool:
        return self.flavor is Flavor.KNOT and v <= self.n_ext

    def knot_arcs(self) -> tuple[Edge, ...]:
        """Implicit oriented arcs of the knot loop, in label order."""
        if self.flavor is not Flavor.KNOT:
            return ()
        n = self.n_ext
        return tuple((i, i % n + 1) for i in range(1, n + 1))

    def connection_count(self, a: int, b: int) -> int:
        """Number of connections between a and b, counting knot arcs."""
        count = sum(1 for i, j in self.edges if {i, j} == {a, b})
        if self.flavor is Flavor.KNOT and a != b:
            count += sum(1 for i, j in self.knot_arcs() if {i, j} == {a, b})
        return count

    def degrees(self) -> list[int]:
        """Edge-degree of each vertex (1-based index 0 unused)."""
        deg = [0] * (self.n_vertices + 1)
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg

    # --- serialization ---

    def to_text(self) -> str:
        lines = [f"flavor {self.flavor.value}", f"ext {self.n_ext}", f"int {self.n_int}"]
        lines += [f"edge {i} {j}" for i, j in self.edges]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "DecoratedGraph":
        flavor = None
        n_ext = n_int = 0
        edges: list[Edge] = []
        for ln, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            try:
                if parts[0] == "flavor":
                    flavor = Flavor(parts[1])
                elif parts[0] == "ext":
                    n_ext = int(parts[1])
                elif parts[0] == "int":
                    n_int = int(parts[1])
                elif parts[0] == "edge":
                    edges.append((int(parts[1]), int(parts[2])))
                else:
                    raise ValueError(f"unknown directive {parts[0]!r}")
            except (IndexError, ValueError) as exc:
                raise InvalidGraph(f"line {ln}: {exc}") from exc
        if flavor is None:
            raise InvalidGraph("missing 'flavor' line")
        return cls(flavor, n_ext, n_int, tuple(edges))

    def to_json_obj(self) -> dict:
        return {
            "flavor": self.flavor.value,
            "ext": self.n_ext,
            "int": self.n_int,
            "edges": [list(e) for e in self.edges],
        }

    @classmethod
    def from_json_obj(cls, obj: Mapping) -> "DecoratedGraph":
        try:
            return cls(
                Flavor(obj["flavor"]),
                int(obj["ext"]),
                int(obj["int"]),
                tuple((int(i), int(j)) for i, j in obj["edges"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidGraph(f"bad graph object: {exc}") from exc


def grade(g: DecoratedGraph) -> tuple[int, int]:
    """(order, degree) of a decorated graph.

    Manifold: (E-V, 2E-3V).  Knot: (E-Vi, 2E-3Vi-Ve) with E counting
    internal edges only.
    """
    e = g.n_edges
    if g.flavor is Flavor.MANIFOLD:
        v = g.n_vertices
        return e - v, 2 * e - 3 * v
    return e - g.n_int, 2 * e - 3 * g.n_int - g.n_ext


def is_trivalent(g: DecoratedGraph) -> bool:
    """Manifold: every vertex trivalent.  Knot: internal vertices have
    internal-edge degree 3 and external ones degree 1."""
    deg = g.degrees()
    if g.flavor is Flavor.MANIFOLD:
        return all(d == 3 for d in deg[1:])
    ext_ok = all(deg[v] == 1 for v in range(1, g.n_ext + 1))
    int_ok = all(deg[v] == 3 for v in range(g.n_ext + 1, g.n_vertices + 1))
    return ext_ok and int_ok


# --- canonical forms ---


@dataclass(frozen=True)
class CanonicalResult:
    """Outcome of canonicalization: Zero, or a canonical graph with the
    sign relating the input to it."""

    graph: DecoratedGraph | None
    sign: int

    @property
    def is_zero(self) -> bool:
        return self.graph is None

    @classmethod
    def zero(cls) -> "CanonicalResult":
        return cls(None, 0)


def _perm_parity(perm: tuple[int, ...]) -> int:
    """Parity (0/1) of a permutation given as a tuple of images of 0..n-1."""
    seen = [False] * len(perm)
    parity = 0
    for i in range(len(perm)):
        if seen[i]:
            continue
        j = i
        length = 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        parity ^= (length - 1) & 1
    return parity


@lru_cache(maxsize=None)
def _manifold_symmetries(n: int) -> tuple[tuple[tuple[int, ...], int], ...]:
    """All permutations of 1..n as (image tuple, parity)."""
    out = []
    for p in itertools.permutations(range(n)):
        out.append((tuple(x + 1 for x in p), _perm_parity(p)))
    return tuple(out)


@lru_cache(maxsize=None)
def _knot_symmetries(n_ext: int, n_int: int) -> tuple[tuple[tuple[int, ...], int], ...]:
    """Cyclic rotations of external labels composed with all internal
    permutations, as (image tuple over 1..V, parity)."""
    out = []
    for k in range(n_ext):
        # rotation by k steps of n_ext labels has parity (n_ext-1)*k
        rot = tuple((i + k) % n_ext + 1 for i in range(n_ext))
        rot_par = ((n_ext - 1) * k) & 1
        for p in itertools.permutations(range(n_int)):
            images = rot + tuple(x + n_ext + 1 for x in p)
            out.append((images, rot_par ^ _perm_parity(p)))
    return tuple(out)


def _normalize_edges(edges: Iterable[Edge]) -> tuple[tuple[Edge, ...], int]:
    """Orient every edge ascending and sort; return (encoding, flip count)."""
    flips = 0
    norm = []
    for i, j in edges:
        if i > j:
            norm.append((j, i))
            flips += 1
        else:
            norm.append((i, j))
    norm.sort()
    return tuple(norm), flips


def _symmetries(g: DecoratedGraph):
    if g.flavor is Flavor.MANIFOLD:
        return _manifold_symmetries(g.n_vertices)
    return _knot_symmetries(g.n_ext, g.n_int)


def canonicalize(g: DecoratedGraph) -> CanonicalResult:
    """Reduce to the lexicographically minimal admissible relabeling.

    Returns Zero when some admissible symmetry fixes the underlying
    encoding with sign -1, i.e. the graph equals its own negative.
    """
    base_enc, base_flips = _normalize_edges(g.edges)
    base_sign = -1 if base_flips & 1 else 1

    seen: dict[tuple[Edge, ...], int] = {}
    best_enc = None
    best_sign = 0
    for images, parity in _symmetries(g):
        relabeled = ((images[i - 1], images[j - 1]) for i, j in base_enc)
        enc, flips = _normalize_edges(relabeled)
        sign = -1 if (parity ^ (flips & 1)) else 1
        prev = seen.get(enc)
        if prev is None:
            seen[enc] = sign
        elif prev != sign:
            return CanonicalResult.zero()
        if best_enc is None or enc < best_enc:
            best_enc = enc
            best_sign = sign
    canon = DecoratedGraph(g.flavor, g.n_ext, g.n_int, best_enc)
    return CanonicalResult(canon, base_sign * best_sign)


# --- contraction and coboundary ---


def _sigma(i: int, j: int) -> int:
    """Contraction sign for the oriented edge from i to j."""
    if j > i:
        return -1 if j & 1 else 1
    return -1 if (i + 1) & 1 else 1


def _relabel_after_merge(v: int, lo: int, hi: int) -> int:
    if v == lo or v == hi:
        return lo
    return v - 1 if v > hi else v


def contract_edge(g: DecoratedGraph, e: Edge) -> tuple[DecoratedGraph, int]:
    """Contract a regular edge or knot arc; return (graph, sign).

    ``e`` must match a stored directed edge, or in knot flavor an
    oriented arc (i, successor of i) of the knot loop.
    """
    i, j = e
    is_arc = False
    if e in g.edges:
        edge_index = g.edges.index(e)
    elif g.flavor is Flavor.KNOT and e in g.knot_arcs():
        is_arc = True
        edge_index = -1
    else:
        raise InvalidGraph(f"no edge or arc {e} in graph")

    if g.connection_count(i, j) != 1:
        raise NotRegular(f"endpoints of {e} share more than one connection")
    if g.flavor is Flavor.KNOT and not is_arc:
        if g.is_external(i) and g.is_external(j):
            raise NotContractible("internal edge between two external vertices")

    lo, hi = min(i, j), max(i, j)
    new_edges = []
    for k, (a, b) in enumerate(g.edges):
        if k == edge_index:
            continue
        new_edges.append((_relabel_after_merge(a, lo, hi), _relabel_after_merge(b, lo, hi)))

    if g.flavor is Flavor.MANIFOLD:
        merged = DecoratedGraph(g.flavor, 0, g.n_int - 1, tuple(new_edges))
    elif is_arc:
        merged = DecoratedGraph(g.flavor, g.n_ext - 1, g.n_int, tuple(new_edges))
    else:
        # externals carry the smaller labels, so min{i,j} stays external
        # whenever one endpoint is; an internal vertex always disappears
        merged = DecoratedGraph(g.flavor, g.n_ext, g.n_int - 1, tuple(new_edges))
    return merged, _sigma(i, j)


def _contractible_edges(g: DecoratedGraph) -> Iterator[Edge]:
    seen_pairs = set()
    for i, j in g.edges:
        pair = frozenset((i, j))
        if pair in seen_pairs:
            continue
        seen_pairs.add(pair)
        if g.connection_count(i, j) != 1:
            continue
        if g.flavor is Flavor.KNOT and g.is_external(i) and g.is_external(j):
            continue
        yield (i, j)
    if g.flavor is Flavor.KNOT:
        for i, j in g.knot_arcs():
            if g.connection_count(i, j) == 1:
                yield (i, j)


class GraphSum:
    """Formal rational linear combination of canonical decorated graphs."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[DecoratedGraph, Fraction] | None = None):
        self._terms: dict[DecoratedGraph, Fraction] = {}
        if terms:
            for g, c in terms.items():
                c = Fraction(c)
                if c:
                    self._terms[g] = c

    @classmethod
    def of(cls, pairs: Iterable[tuple[Fraction | int, DecoratedGraph]]) -> "GraphSum":
        """Build from (coefficient, graph) pairs, canonicalizing each graph."""
        out = cls()
        for c, g in pairs:
            res = canonicalize(g)
            if not res.is_zero:
                out._add(res.graph, Fraction(c) * res.sign)
        return out

    def _add(self, g: DecoratedGraph, c: Fraction):
        new = self._terms.get(g, Fraction(0)) + c
        if new:
            self._terms[g] = new
        else:
            self._terms.pop(g, None)

    def items(self) -> list[tuple[DecoratedGraph, Fraction]]:
        return sorted(self._terms.items(), key=lambda kv: _sort_key(kv[0]))

    def coefficient(self, g: DecoratedGraph) -> Fraction:
        return self._terms.get(g, Fraction(0))

    @property
    def is_zero(self) -> bool:
        return not self._terms

    def __len__(self) -> int:
        return len(self._terms)

    def __add__(self, other: "GraphSum") -> "GraphSum":
        out = GraphSum(self._terms)
        for g, c in other._terms.items():
            out._add(g, c)
        return out

    def __rmul__(self, c) -> "GraphSum":
        c = Fraction(c)
        return GraphSum({g: c * v for g, v in self._terms.items()})

    def __eq__(self, other) -> bool:
        return isinstance(other, GraphSum) and self._terms == other._terms

    def __repr__(self) -> str:
        if self.is_zero:
            return "GraphSum(0)"
        bits = [f"{c}*{g.edges}" for g, c in self.items()]
        return "GraphSum(" + " + ".join(bits) + ")"

    def to_json_obj(self) -> list:
        return [
            {"coeff": f"{c.numerator}/{c.denominator}", "graph": g.to_json_obj()}
            for g, c in self.items()
        ]

    @classmethod
    def from_json_obj(cls, obj) -> "GraphSum":
        out = cls()
        for entry in obj:
            c = Fraction(entry["coeff"])
            out._add(DecoratedGraph.from_json_obj(entry["graph"]), c)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj())


def _sort_key(g: DecoratedGraph):
    return (g.flavor.value, g.n_ext, g.n_int, g.edges)


def delta(g: DecoratedGraph | GraphSum) -> GraphSum:
    """Coboundary: signed sum of single contractions of regular edges
    (and, in knot flavor, regular knot arcs), extended linearly."""
    if isinstance(g, GraphSum):
        out = GraphSum()
        for graph, c in g.items():
            for term, coeff in delta(graph)._terms.items():
                out._add(term, c * coeff)
        return out
    out = GraphSum()
    for e in _contractible_edges(g):
        contracted, sign = contract_edge(g, e)
        res = canonicalize(contracted)
        if not res.is_zero:
            out._add(res.graph, Fraction(sign * res.sign))
    return out


def graph_grade(s: GraphSum) -> tuple[int, int]:
    """Common (order, degree) of a sum's terms; GradeMismatch otherwise."""
    grades = {grade(g) for g, _ in s.items()}
    if len(grades) != 1:
        raise GradeMismatch(f"terms have grades {sorted(grades)}")
    return grades.pop()


# --- enumeration ---


def _grading_combos(flavor: Flavor, order: int, degree: int) -> list[tuple[int, int, int]]:
    """(n_ext, n_int, n_edges) combos realizing the grade."""
    combos = []
    if flavor is Flavor.MANIFOLD:
        v = 2 * order - degree
        e = 3 * order - degree
        if v >= 2 and e >= 0:
            combos.append((0, v, e))
    else:
        # E = order + Vi, Ve = 2*order - Vi - degree
        vi = 0
        while True:
            ve = 2 * order - vi - degree
            e = order + vi
            if ve < 2:
                break
            if e >= 0:
                combos.append((ve, vi, e))
            vi += 1
    return combos


def _is_connected(n_vertices: int, undirected: Iterable[Edge]) -> bool:
    parent = list(range(n_vertices + 1))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    count = n_vertices
    for a, b in undirected:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
            count -= 1
    return count == 1


def _knot_connected(n_ext: int, n_int: int, edges: tuple[Edge, ...]) -> bool:
    """Connected after removing any pair of knot arcs."""
    n = n_ext + n_int
    arcs = [(i, i % n_ext + 1) for i in range(1, n_ext + 1)]
    for drop in itertools.combinations(range(len(arcs)), 2):
        kept = [a for k, a in enumerate(arcs) if k not in drop]
        if not _is_connected(n, list(edges) + kept):
            return False
    return True


def enumerate_graphs(
    flavor: Flavor,
    order: int,
    degree: int,
    connected: bool = True,
    max_vertices: int = MAX_VERTICES,
    max_edges: int = MAX_EDGES,
) -> list[DecoratedGraph]:
    """All canonical nonzero decorated graphs of the given grade.

    Deterministically ordered by encoding.  Raises ResourceLimit when
    the grade requires more vertices/edges than the configured bounds.
    """
    return list(
        _enumerate_cached(flavor, order, degree, connected, max_vertices, max_edges)
    )


@lru_cache(maxsize=64)
def _enumerate_cached(
    flavor: Flavor,
    order: int,
    degree: int,
    connected: bool,
    max_vertices: int,
    max_edges: int,
) -> tuple[DecoratedGraph, ...]:
    result: list[DecoratedGraph] = []
    for n_ext, n_int, n_edges in _grading_combos(flavor, order, degree):
        nv = n_ext + n_int
        if nv > max_vertices or n_edges > max_edges:
            raise ResourceLimit(
                f"grade (ord={order}, deg={degree}) needs V={nv}, E={n_edges} "
                f"(bounds {max_vertices}, {max_edges})"
            )
        if n_edges == 0:
            # no edges: only valid if a single vertex class makes sense; skip
            continue
        result.extend(_enumerate_combo(flavor, n_ext, n_int, n_edges, connected))
    result.sort(key=_sort_key)
    return tuple(result)


def _enumerate_combo(
    flavor: Flavor, n_ext: int, n_int: int, n_edges: int, connected: bool
) -> list[DecoratedGraph]:
    nv = n_ext + n_int
    pairs = [(i, j) for i in range(1, nv) for j in range(i + 1, nv + 1)]
    sym = (
        _manifold_symmetries(nv)
        if flavor is Flavor.MANIFOLD
        else _knot_symmetries(n_ext, n_int)
    )

    seen: set[tuple[Edge, ...]] = set()
    found: list[DecoratedGraph] = []
    for combo in itertools.combinations_with_replacement(pairs, n_edges):
        if connected:
            deg = [0] * (nv + 1)
            for a, b in combo:
                deg[a] += 1
                deg[b] += 1
            if any(d == 0 for d in deg[1:]):
                continue
        if combo in seen:
            continue
        if connected:
            if flavor is Flavor.MANIFOLD:
                if not _is_connected(nv, combo):
                    continue
            elif not _knot_connected(n_ext, n_int, combo):
                continue
        # canonicalize the whole orbit at once
        orbit: dict[tuple[Edge, ...], int] = {}
        is_zero = False
        best = None
        for images, parity in sym:
            relabeled = ((images[i - 1], images[j - 1]) for i, j in combo)
            enc, flips = _normalize_edges(relabeled)
            sign = -1 if (parity ^ (flips & 1)) else 1
            prev = orbit.get(enc)
            if prev is None:
                orbit[enc] = sign
            elif prev != sign:
                is_zero = True
            if best is None or enc < best:
                best = enc
        seen.update(orbit)
        # lex iteration visits the orbit minimum first, so reaching this
        # point means the current combo is the canonical encoding
        if not is_zero:
            found.append(DecoratedGraph(flavor, n_ext, n_int, best))
    return found


# --- reference graphs and cocycles ---


def theta_graph(flavor: Flavor = Flavor.MANIFOLD) -> DecoratedGraph:
    """The theta graph: triple edge on two vertices, or in knot flavor
    two external vertices joined by one chord."""
    if flavor is Flavor.MANIFOLD:
        return DecoratedGraph(flavor, 0, 2, ((1, 2), (1, 2), (1, 2)))
    return DecoratedGraph(flavor, 2, 0, ((1, 2),))


def manifold_order2_graphs() -> tuple[DecoratedGraph, DecoratedGraph]:
    """The two order-2, degree-0 manifold generators: the complete graph
    on four vertices and the two-circles-with-bars graph."""
    g1 = DecoratedGraph(
        Flavor.MANIFOLD, 0, 4, ((1, 2), (2, 3), (3, 4), (4, 1), (1, 3), (2, 4))
    )
    g2 = DecoratedGraph(
        Flavor.MANIFOLD, 0, 4, ((1, 4), (4, 1), (1, 2), (2, 3), (2, 3), (3, 4))
    )
    return g1, g2


def knot_order2_graphs() -> tuple[DecoratedGraph, DecoratedGraph, DecoratedGraph]:
    """The three order-2, degree-0 knot generators: crossed chords,
    tripod, and the chain with a doubled internal edge."""
    g1 = DecoratedGraph(Flavor.KNOT, 4, 0, ((1, 3), (2, 4)))
    g2 = DecoratedGraph(Flavor.KNOT, 3, 1, ((1, 4), (2, 4), (3, 4)))
    g3 = DecoratedGraph(Flavor.KNOT, 2, 2, ((1, 3), (3, 4), (3, 4), (4, 2)))
    return g1, g2, g3


def manifold_order2_cocycle() -> GraphSum:
    """-1/12 * K4 + 1/4 * (two-circles graph): killed by delta."""
    g1, g2 = manifold_order2_graphs()
    return GraphSum.of([(Fraction(-1, 12), g1), (Fraction(1, 4), g2)])


def knot_order2_cocycle() -> GraphSum:
    """1/4 G1 - 1/3 G2 + 1/2 G3: the order-2 knot cocycle."""
    g1, g2, g3 = knot_order2_graphs()
    return GraphSum.of(
        [(Fraction(1, 4), g1), (Fraction(-1, 3), g2), (Fraction(1, 2), g3)]
    )
