import itertools
from dataclasses import dataclass
from typing import Callable, Dict, List, Sequence, Tuple

# A family builder returns (vertex ids in generation order, unit-weight edges).
Layout = Tuple[List[str], List[Tuple[str, str]]]


@dataclass(frozen=True)
class GraphFamily:
    """
    Represents a single generator family.

    Fields:
        name:     Spec name used on the command line ("path", "star", ...).
        arity:    Number of integer parameters the spec takes.
        builder:  Callable producing the finite layout.
        minimum:  Smallest admissible value for each parameter.
        root:     Callable giving the distinguished origin vertex id.
        infinite: True when the family describes balls of an infinite graph
                  and therefore supports exhaustions.
    """
    name: str
    arity: int
    builder: Callable[..., Layout]
    minimum: Tuple[int, ...]
    root: Callable[..., str]
    infinite: bool = False


def _path(n: int) -> Layout:
    vertices = [str(i) for i in range(n)]
    edges = [(vertices[i], vertices[i + 1]) for i in range(n - 1)]
    return vertices, edges


def _star(k: int, n: int) -> Layout:
    # k copies of [0, 2n] glued at their origins
    vertices = ["0"]
    edges: List[Tuple[str, str]] = []
    for arm in range(1, k + 1):
        previous = "0"
        for j in range(1, 2 * n + 1):
            vid = f"{arm}:{j}"
            vertices.append(vid)
            edges.append((previous, vid))
            previous = vid
    return vertices, edges


def _lattice_id(point: Sequence[int]) -> str:
    return ",".join(str(c) for c in point)


def _lattice_ball(dim: int, radius: int) -> Layout:
    points = [
        p for p in itertools.product(range(-radius, radius + 1), repeat=dim)
        if sum(abs(c) for c in p) <= radius
    ]
    inside = set(points)
    vertices = [_lattice_id(p) for p in points]
    edges: List[Tuple[str, str]] = []
    for p in points:
        for axis in range(dim):
            q = list(p)
            q[axis] += 1
            q = tuple(q)
            if q in inside:
                edges.append((_lattice_id(p), _lattice_id(q)))
    return vertices, edges


def _tree_ball(degree: int, radius: int) -> Layout:
    vertices = ["0"]
    edges: List[Tuple[str, str]] = []
    frontier = ["0"]
    for depth in range(radius):
        nxt = []
        for parent in frontier:
            children = degree if depth == 0 else degree - 1
            for i in range(children):
                vid = f"{parent}.{i}"
                vertices.append(vid)
                edges.append((parent, vid))
                nxt.append(vid)
        frontier = nxt
    return vertices, edges


# Canonical list of generator families. graph_core.generate uses this directly.
FAMILIES: Dict[str, GraphFamily] = {
    family.name: family
    for family in [
        GraphFamily(
            name="path",
            arity=1,
            builder=_path,
            minimum=(2,),
            root=lambda n: "0",
        ),
        GraphFamily(
            name="star",
            arity=2,
            builder=_star,
            minimum=(1, 1),
            root=lambda k, n: "0",
        ),
        GraphFamily(
            name="lattice",
            arity=2,
            builder=_lattice_ball,
            minimum=(1, 1),
            root=lambda dim, radius: _lattice_id([0] * dim),
            infinite=True,
        ),
        GraphFamily(
            name="tree",
            arity=2,
            builder=_tree_ball,
            minimum=(2, 1),
            root=lambda degree, radius: "0",
            infinite=True,
        ),
    ]
}

# spec aliases accepted on the command line
_ALIASES = {"lattice_ball": "lattice", "tree_ball": "tree"}


def parse_family_spec(spec: str) -> Tuple[GraphFamily, Tuple[int, ...]]:
    """
    Parse "path:21", "star:3,2", "lattice:2,3" or "tree:3,4".

    Raises ValueError on unknown families, wrong arity or sizes below the
    family minimum.
    """
    name, _, raw_args = spec.partition(":")
    name = _ALIASES.get(name.strip(), name.strip())
    family = FAMILIES.get(name)
    if family is None:
        raise ValueError(f"unknown graph family {name!r}")
    try:
        args = tuple(int(a) for a in raw_args.split(",") if a.strip())
    except ValueError:
        raise ValueError(f"non-integer size in {spec!r}") from None
    return family, validate_args(family, args)


def validate_args(family: GraphFamily, args: Sequence[int]) -> Tuple[int, ...]:
    args = tuple(int(a) for a in args)
    if len(args) != family.arity:
        raise ValueError(
            f"{family.name} takes {family.arity} size parameter(s), got {len(args)}"
        )
    for value, lowest in zip(args, family.minimum):
        if value < lowest:
            raise ValueError(f"{family.name}{args}: sizes must be >= {family.minimum}")
    return args
