"""
dggkit.graph_core

Measured weighted graphs: construction, ingestion, generators,
combinatorial distances and the structural constants D_m, D_mu.

A MeasuredGraph is immutable after construction. Distances are hop counts;
edge weights never enter them.
"""

import json
import logging
from dataclasses import dataclass, field
from typing import (
    Dict, FrozenSet, Iterable, List, NamedTuple, Sequence,
    Tuple, Union,
)

import networkx as nx
import numpy as np

from .families import FAMILIES, GraphFamily, parse_family_spec, validate_args

logger = logging.getLogger(__name__)

M_MODES = ("unit", "degree")


class GraphError(ValueError):
    """Graph document or structure violates a MeasuredGraph invariant."""


@dataclass(frozen=True, eq=False)
class MeasuredGraph:
    """
    Finite weighted graph with symmetric edge weights mu and vertex measure m.

    Fields:
        vertices: vertex ids in file / generation order
        edges:    (u, v, mu) once per undirected edge, in input order
        measure:  m(v) aligned with `vertices`
    Derived:
        weights:  dense symmetric matrix mu_xy (0 off the edge set)
        degree:   deg(x) = sum_y mu_xy
        topology: networkx view used for BFS
    """
    vertices: Tuple[str, ...]
    edges: Tuple[Tuple[str, str, float], ...]
    measure: np.ndarray
    weights: np.ndarray = field(init=False, repr=False)
    degree: np.ndarray = field(init=False, repr=False)
    topology: nx.Graph = field(init=False, repr=False)
    _index: Dict[str, int] = field(init=False, repr=False)
    _cache: Dict[object, object] = field(init=False, repr=False, default_factory=dict)

    def __post_init__(self) -> None:
        index: Dict[str, int] = {}
        for i, v in enumerate(self.vertices):
            if v in index:
                raise GraphError(f"duplicate vertex id {v!r}")
            index[v] = i
        n = len(self.vertices)
        if n < 2:
            raise GraphError("a graph needs at least two vertices and one edge")

        measure = np.asarray(self.measure, dtype=float)
        if measure.shape != (n,):
            raise GraphError("measure must give one value per vertex")
        if not np.all(np.isfinite(measure)) or np.any(measure <= 0):
            raise GraphError("nonpositive measure")
        measure.setflags(write=False)

        weights = np.zeros((n, n))
        topology = nx.Graph()
        topology.add_nodes_from(self.vertices)
        for u, v, mu in self.edges:
            if u not in index or v not in index:
                raise GraphError(f"edge ({u!r}, {v!r}) references an unknown vertex")
            if u == v:
                raise GraphError(f"self-loop at {u!r}")
            if not np.isfinite(mu) or mu <= 0:
                raise GraphError(f"nonpositive weight on edge ({u!r}, {v!r})")
            i, j = index[u], index[v]
            if weights[i, j] != 0 and weights[i, j] != mu:
                raise GraphError(f"conflicting weights for edge ({u!r}, {v!r})")
            weights[i, j] = weights[j, i] = mu
            topology.add_edge(u, v)
        weights.setflags(write=False)

        if not nx.is_connected(topology):
            raise GraphError("graph is disconnected")

        degree = weights.sum(axis=1)
        degree.setflags(write=False)

        object.__setattr__(self, "measure", measure)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "degree", degree)
        object.__setattr__(self, "topology", topology)
        object.__setattr__(self, "_index", index)

    # ------------------------------------------------------------------
    # Lookups
    # ------------------------------------------------------------------

    def __len__(self) -> int:
        return len(self.vertices)

    def __contains__(self, vertex: object) -> bool:
        return vertex in self._index

    def index(self, vertex: str) -> int:
        try:
            return self._index[vertex]
        except KeyError:
            raise GraphError(f"unknown vertex {vertex!r}") from None

    def indices(self, vertices: Iterable[str]) -> np.ndarray:
        return np.array(sorted(self.index(v) for v in vertices), dtype=int)

    def neighbors(self, vertex: str) -> List[str]:
        i = self.index(vertex)
        return [self.vertices[j] for j in np.flatnonzero(self.weights[i])]

    def m(self, vertex: str) -> float:
        return float(self.measure[self.index(vertex)])

    @property
    def total_measure(self) -> float:
        return float(self.measure.sum())

    def subset(self, members: Iterable[str]) -> "Subset":
        return Subset(frozenset(members), self)

    def whole(self) -> "Subset":
        return Subset(frozenset(self.vertices), self)


@dataclass(frozen=True, eq=False)
class Subset:
    """Nonempty vertex subset of a parent graph."""
    members: FrozenSet[str]
    parent: MeasuredGraph
    _indices: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        members = frozenset(self.members)
        if not members:
            raise GraphError("subset is empty")
        unknown = [v for v in members if v not in self.parent]
        if unknown:
            raise GraphError(f"subset members not in graph: {sorted(unknown)[:5]}")
        indices = self.parent.indices(members)
        indices.setflags(write=False)
        object.__setattr__(self, "members", members)
        object.__setattr__(self, "_indices", indices)

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, vertex: object) -> bool:
        return vertex in self.members

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Subset):
            return NotImplemented
        return self.parent is other.parent and self.members == other.members

    def __hash__(self) -> int:
        return hash((id(self.parent), self.members))

    @property
    def indices(self) -> np.ndarray:
        """Member positions in parent order."""
        return self._indices

    @property
    def ordered(self) -> List[str]:
        return [self.parent.vertices[i] for i in self.indices]

    def mask(self) -> np.ndarray:
        out = np.zeros(len(self.parent), dtype=bool)
        out[self.indices] = True
        return out

    @property
    def is_whole(self) -> bool:
        return len(self.members) == len(self.parent)


@dataclass(frozen=True, eq=False)
class Exhaustion:
    """
    Finite stages Omega_1 ⊆ Omega_2 ⊆ ... of an infinite family.

    Stages are balls of strictly increasing radius around `root`, taken inside
    a host ball one step larger than the last stage so every stage vertex
    carries its infinite-graph degree.
    """
    family: str
    parameter: int
    radii: Tuple[int, ...]
    root: str
    host: MeasuredGraph
    stages: Tuple[Subset, ...]


class StructuralConstants(NamedTuple):
    D_m: float
    D_mu: float
    m_max: float
    m_min: float
    mu_min: float


SubsetLike = Union[Subset, Iterable[str]]


def as_subset(g: MeasuredGraph, B: SubsetLike) -> Subset:
    if isinstance(B, Subset):
        if B.parent is not g:
            return g.subset(B.members)
        return B
    if isinstance(B, str):
        return g.subset([B])
    return g.subset(B)


# ======================================================================
# Ingestion
# ======================================================================

def load_graph(document: Union[bytes, str]) -> MeasuredGraph:
    """
    Parse a graph-file document:

        {"vertices": [{"id": str, "m": num}, ...],
         "edges": [{"u": str, "v": str, "mu": num}, ...]}

    "m" defaults to 1.0. Each undirected edge is listed once; a repeated
    edge must carry the same weight.
    """
    try:
        if isinstance(document, bytes):
            document = document.decode("utf-8")
        raw = json.loads(document)
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise GraphError(f"parse failure: {exc}") from None

    if not isinstance(raw, dict):
        raise GraphError("parse failure: top level must be an object")
    try:
        vertices = [str(item["id"]) for item in raw["vertices"]]
        measure = [float(item.get("m", 1.0)) for item in raw["vertices"]]
        edges = [
            (str(item["u"]), str(item["v"]), float(item["mu"]))
            for item in raw.get("edges", [])
        ]
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise GraphError(f"parse failure: {exc!r}") from None

    return MeasuredGraph(tuple(vertices), tuple(edges), np.array(measure))


def save_graph(g: MeasuredGraph) -> bytes:
    """Inverse of load_graph; vertex and edge order are preserved."""
    payload = {
        "vertices": [
            {"id": v, "m": float(m)} for v, m in zip(g.vertices, g.measure)
        ],
        "edges": [{"u": u, "v": v, "mu": float(mu)} for u, v, mu in g.edges],
    }
    return json.dumps(payload, indent=2, sort_keys=True).encode("utf-8")


def from_layout(
    vertices: Sequence[str],
    edges: Iterable[Tuple[str, str]],
    m_mode: str = "unit",
    mu: float = 1.0,
) -> MeasuredGraph:
    if m_mode not in M_MODES:
        raise GraphError(f"m_mode must be one of {M_MODES}, got {m_mode!r}")
    weighted = tuple((u, v, float(mu)) for u, v in edges)
    if m_mode == "unit":
        measure = np.ones(len(vertices))
    else:
        pos = {v: i for i, v in enumerate(vertices)}
        measure = np.zeros(len(vertices))
        for u, v, w in weighted:
            measure[pos[u]] += w
            measure[pos[v]] += w
    return MeasuredGraph(tuple(vertices), weighted, measure)


def generate(
    family: Union[str, GraphFamily],
    *args: int,
    m_mode: str = "unit",
) -> MeasuredGraph:
    """
    Build a generator family with unit edge weights.

        generate("path:21")
        generate("star", 3, 2, m_mode="degree")
    """
    if isinstance(family, str) and not args:
        fam, sizes = parse_family_spec(family)
    else:
        fam = FAMILIES[family] if isinstance(family, str) else family
        sizes = validate_args(fam, args)
    vertices, edges = fam.builder(*sizes)
    return from_layout(vertices, edges, m_mode=m_mode)


def exhaust(
    family: str,
    parameter: int,
    radii: Sequence[int],
    m_mode: str = "unit",
) -> Exhaustion:
    """
    Exhaust an infinite family (lattice dimension or tree degree) by balls
    of the given radii around its origin.
    """
    fam = FAMILIES.get(family)
    if fam is None or not fam.infinite:
        raise GraphError(f"{family!r} is not an infinite family")
    radii = tuple(int(r) for r in radii)
    if not radii or any(r < 1 for r in radii):
        raise GraphError("radii must be positive")
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise GraphError("radii must be strictly increasing")

    host = generate(fam, parameter, radii[-1] + 1, m_mode=m_mode)
    root = fam.root(parameter, radii[-1] + 1)
    origin = host.subset([root])
    stages = tuple(neighborhood(host, origin, r) for r in radii)
    logger.debug("exhaustion %s(%d): stage sizes %s", family, parameter,
                 [len(s) for s in stages])
    return Exhaustion(family, parameter, radii, root, host, stages)


# ======================================================================
# Distances
# ======================================================================

def distances_from(g: MeasuredGraph, B: SubsetLike) -> np.ndarray:
    """Hop distance d(x, B) for every vertex x, in graph order."""
    B = as_subset(g, B)
    key = ("dist", B.members)
    cached = g._cache.get(key)
    if cached is not None:
        return cached  # type: ignore[return-value]

    out = np.full(len(g), -1, dtype=int)
    for depth, layer in enumerate(nx.bfs_layers(g.topology, sorted(B.members))):
        out[g.indices(layer)] = depth
    out.setflags(write=False)
    g._cache[key] = out
    return out


def distance(
    g: MeasuredGraph,
    x: Union[str, SubsetLike],
    B: SubsetLike,
) -> int:
    """
    d(x, B): hop distance from a vertex (or the nearest member of a subset)
    to the nearest member of B. 0 iff they meet.
    """
    dist = distances_from(g, B)
    if isinstance(x, str):
        return int(dist[g.index(x)])
    A = as_subset(g, x)
    return int(dist[A.indices].min())


def neighborhood(g: MeasuredGraph, U: SubsetLike, r: int) -> Subset:
    """N_r(U) = {x : d(x, U) <= r}."""
    if r < 0:
        raise GraphError("radius must be nonnegative")
    dist = distances_from(g, U)
    return g.subset(g.vertices[i] for i in np.flatnonzero(dist <= r))


def ball(g: MeasuredGraph, x: str, r: int) -> Subset:
    return neighborhood(g, g.subset([x]), r)


def diameter(g: MeasuredGraph) -> int:
    cached = g._cache.get("diameter")
    if cached is None:
        cached = int(nx.diameter(g.topology))
        g._cache["diameter"] = cached
    return cached  # type: ignore[return-value]


def measure_of(g: MeasuredGraph, U: SubsetLike) -> float:
    return float(g.measure[as_subset(g, U).indices].sum())


# ======================================================================
# Structural constants
# ======================================================================

def structural_constants(g: MeasuredGraph) -> StructuralConstants:
    """
    D_mu = max over edges of deg(x)/mu_xy, D_m = max_x deg(x)/m(x),
    plus m_max, m_min and mu_min.
    """
    rows, cols = np.nonzero(g.weights)
    edge_weights = g.weights[rows, cols]
    return StructuralConstants(
        D_m=float(np.max(g.degree / g.measure)),
        D_mu=float(np.max(g.degree[rows] / edge_weights)),
        m_max=float(g.measure.max()),
        m_min=float(g.measure.min()),
        mu_min=float(edge_weights.min()),
    )


def parse_vertex_list(g: MeasuredGraph, text: str) -> Subset:
    """
    Parse "0,3,5" or "0-4" (integer ranges expand to ids a..b) into a Subset.

    Ids that contain commas themselves ("1,-2" on a lattice) are matched
    greedily against the graph, longest first; ";" also separates members.
    """
    span = 1 + max(v.count(",") for v in g.vertices)
    members: List[str] = []
    for chunk in text.split(";"):
        tokens = chunk.split(",")
        i = 0
        while i < len(tokens):
            for width in range(min(span, len(tokens) - i), 0, -1):
                joined = ",".join(t.strip() for t in tokens[i:i + width])
                if joined in g:
                    members.append(joined)
                    i += width
                    break
            else:
                token = tokens[i].strip()
                i += 1
                if not token:
                    continue
                lo, sep, hi = token.partition("-")
                if sep and lo.lstrip("-").isdigit() and hi.isdigit():
                    members.extend(str(k) for k in range(int(lo), int(hi) + 1))
                else:
                    members.append(token)
    return g.subset(members)
