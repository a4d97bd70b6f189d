"""Target interaction graphs for regular lattice geometries.

Lattice sites are embedded onto chain indices in lexicographic order
(row-major; plane-major then row-major for cubic), so an N-ion fragment of a
larger extent grid is simply the first N sites.  Nearest-neighbor pairs get
unit weight and the graph is then scaled to unit norm.
"""

import dataclasses
import math

import numpy as np

from .errors import SchemaError
from .forward import InteractionGraph, normalize, upper_pairs

KINDS = ("linear", "square", "triangular", "kagome", "cubic", "two_chains",
         "custom_edges")


@dataclasses.dataclass(frozen=True)
class LatticeSpec:
    """A lattice kind with integer extents, filled to n_ions sites."""

    kind: str
    dims: tuple
    n_ions: int
    edges: tuple = ()  # custom_edges only: (i, j, weight) triples

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown lattice kind {self.kind!r}")
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        if self.n_ions < 2:
            raise ValueError("a target graph needs at least 2 ions")
        if self.kind == "custom_edges":
            object.__setattr__(self, "edges", _check_edges(self.edges, self.n_ions))
        else:
            if any(d < 1 for d in self.dims):
                raise ValueError(f"extents must be positive, got {self.dims}")
            if self.n_ions > _capacity(self.kind, self.dims):
                raise ValueError(
                    f"{self.kind}{self.dims} holds at most "
                    f"{_capacity(self.kind, self.dims)} sites, asked for {self.n_ions}")

    def label(self) -> str:
        if self.kind == "custom_edges":
            return f"custom_edges:{self.n_ions}"
        return f"{self.kind}:" + "x".join(str(d) for d in self.dims)

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "dims": list(self.dims), "n": self.n_ions}
        if self.kind == "custom_edges":
            d["edges"] = [list(e) for e in self.edges]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "LatticeSpec":
        try:
            kind = d["kind"]
            n = int(d["n"])
        except KeyError as exc:
            raise SchemaError(f"lattice spec missing field {exc}") from exc
        edges = tuple(tuple(e) for e in d.get("edges", ()))
        return cls(kind=kind, dims=tuple(d.get("dims", ())), n_ions=n, edges=edges)


def _check_edges(edges, n_ions):
    seen = set()
    out = []
    for e in edges:
        if len(e) == 2:
            i, j, w = int(e[0]), int(e[1]), 1.0
        elif len(e) == 3:
            i, j, w = int(e[0]), int(e[1]), float(e[2])
        else:
            raise ValueError(f"edge must be (i, j) or (i, j, weight): {e!r}")
        if not 0 <= i < j < n_ions:
            raise ValueError(f"edge ({i}, {j}) out of range for N={n_ions}")
        if (i, j) in seen:
            raise ValueError(f"duplicate edge ({i}, {j})")
        if not (w > 0 and math.isfinite(w)):
            raise ValueError(f"edge weight must be positive and finite: {w}")
        seen.add((i, j))
        out.append((i, j, w))
    return tuple(sorted(out))


def _capacity(kind, dims):
    if kind == "kagome":
        return dims[0] if dims else 0
    cap = 1
    for d in dims:
        cap *= d
    return cap


def _grid_edges(dims, n_sites):
    """Nearest-neighbor bonds of an axis-aligned grid, lexicographic fill."""
    strides = []
    s = 1
    for d in reversed(dims):
        strides.append(s)
        s *= d
    strides.reverse()

    def coords(idx):
        out = []
        for d, st in zip(dims, strides):
            out.append((idx // st) % d)
        return out

    edges = []
    for idx in range(n_sites):
        c = coords(idx)
        for ax, (d, st) in enumerate(zip(dims, strides)):
            if c[ax] + 1 < d and idx + st < n_sites:
                edges.append((idx, idx + st))
    return edges


def _triangular_edges(dims, n_sites):
    """Two interleaved sublattices of rows; odd rows offset half a spacing."""
    rows, cols = dims
    edges = []
    for idx in range(n_sites):
        r, c = divmod(idx, cols)
        if c + 1 < cols and idx + 1 < n_sites:
            edges.append((idx, idx + 1))
        if r + 1 < rows:
            below = idx + cols
            if below < n_sites:
                edges.append((idx, below))
            diag = below - 1 if r % 2 == 0 else below + 1
            dc = c - 1 if r % 2 == 0 else c + 1
            if 0 <= dc < cols and diag < n_sites:
                edges.append((idx, diag))
    return edges


def _kagome_edges(n_sites):
    """Chain of corner-sharing triangles; triangle t spans sites 2t..2t+2."""
    edges = []
    t = 0
    while 2 * t + 1 < n_sites:
        a, b, c = 2 * t, 2 * t + 1, 2 * t + 2
        edges.append((a, b))
        if c < n_sites:
            edges.append((a, c))
            edges.append((b, c))
        t += 1
    return edges


def _two_chain_edges(dims, n_sites):
    _, length = dims
    edges = []
    for idx in range(n_sites - 1):
        if (idx + 1) % length != 0:
            edges.append((idx, idx + 1))
    return edges


def lattice_edges(spec: LatticeSpec):
    """Weighted edge list (i, j, w) realizing the spec's geometry."""
    if spec.kind == "custom_edges":
        return list(spec.edges)
    if spec.kind == "linear":
        edges = [(i, i + 1) for i in range(spec.n_ions - 1)]
    elif spec.kind == "square":
        edges = _grid_edges(spec.dims, spec.n_ions)
    elif spec.kind == "cubic":
        edges = _grid_edges(spec.dims, spec.n_ions)
    elif spec.kind == "triangular":
        edges = _triangular_edges(spec.dims, spec.n_ions)
    elif spec.kind == "kagome":
        edges = _kagome_edges(spec.n_ions)
    elif spec.kind == "two_chains":
        edges = _two_chain_edges(spec.dims, spec.n_ions)
    else:  # pragma: no cover - guarded by LatticeSpec
        raise ValueError(spec.kind)
    return [(i, j, 1.0) for i, j in edges]


def build_target(spec: LatticeSpec) -> InteractionGraph:
    """Normalized target graph: unit weight on nearest-neighbor pairs."""
    n = spec.n_ions
    iu, ju = upper_pairs(n)
    index = {(i, j): p for p, (i, j) in enumerate(zip(iu, ju))}
    couplings = np.zeros(iu.size)
    for i, j, w in lattice_edges(spec):
        couplings[index[(i, j)]] = w
    graph, _ = normalize(InteractionGraph(n_ions=n, couplings=couplings))
    return graph


def list_supported(n_ions: int):
    """Natural (kind, dims) combinations at this ion count."""
    if n_ions < 2:
        raise ValueError("need at least 2 ions")
    specs = [LatticeSpec("linear", (n_ions,), n_ions)]
    for low in range(2, int(math.isqrt(n_ions)) + 1):
        if n_ions % low == 0:
            specs.append(LatticeSpec("square", (low, n_ions // low), n_ions))
    if n_ions >= 3:
        specs.append(LatticeSpec("triangular", (2, (n_ions + 1) // 2), n_ions))
        specs.append(LatticeSpec("kagome", (n_ions,), n_ions))
    if n_ions >= 8:
        specs.append(LatticeSpec("cubic", ((n_ions + 3) // 4, 2, 2), n_ions))
    if n_ions >= 4 and n_ions % 2 == 0:
        specs.append(LatticeSpec("two_chains", (2, n_ions // 2), n_ions))
    return specs


def parse_spec(text: str, n_ions: int | None = None) -> LatticeSpec:
    """Parse CLI shorthand like 'kagome:10' or 'square:2x5'.

    A bare kind name ('cubic') resolves its natural extents for n_ions via
    list_supported.  With explicit extents, n_ions < capacity selects the
    lexicographic fragment.
    """
    kind, _, extents = text.partition(":")
    kind = kind.strip()
    if kind == "custom_edges":
        raise ValueError("custom_edges targets must be given as a JSON file")
    if kind not in KINDS:
        raise ValueError(f"unknown lattice kind {kind!r}")
    if not extents:
        if n_ions is None:
            raise ValueError(f"missing extents in lattice spec {text!r}")
        for spec in list_supported(n_ions):
            if spec.kind == kind:
                return spec
        raise ValueError(f"no {kind} lattice available at N={n_ions}")
    dims = tuple(int(tok) for tok in extents.lower().split("x"))
    if kind == "kagome" and len(dims) != 1:
        raise ValueError("kagome takes a single site count, e.g. 'kagome:10'")
    n = _capacity(kind, dims) if n_ions is None else n_ions
    return LatticeSpec(kind=kind, dims=dims, n_ions=n)
