"""Forward map from laser control parameters to the spin-spin interaction graph.

The pairwise coupling between ions i < j is

    J_ij = scale^2 * sum_n W[i, n] W[j, n] * F[n, i, j],
    F[n, i, j] = sum_m eta[i, m] eta[j, m] omega_m / (mu_n^2 - omega_m^2),

with W the dimensionless Rabi-frequency matrix and mu_n the beat-note
frequencies.  F depends only on the chain and the beat notes, so RamanSetup
precomputes it once and training reuses it for every evaluation.
"""

import dataclasses
import io

import numpy as np

from .chain import ChainModel
from .errors import DimensionMismatchError, NormalizationError, SchemaError
from .kernels import coupling_batch

GRAPH_SCHEMA = "graph/1"


def upper_pairs(n: int):
    """Row-major (i, j) index arrays for the strict upper triangle."""
    return np.triu_indices(n, k=1)


@dataclasses.dataclass(frozen=True)
class InteractionGraph:
    """Unique pairwise couplings J_ij, i < j, in row-major pair order.

    Raw graphs are in rad/s; normalized graphs are dimensionless with unit
    Euclidean norm.
    """

    n_ions: int
    couplings: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        c = np.asarray(self.couplings, dtype=float)
        if c.shape != (self.n_ions * (self.n_ions - 1) // 2,):
            raise DimensionMismatchError(
                f"expected {self.n_ions * (self.n_ions - 1) // 2} couplings "
                f"for N={self.n_ions}, got shape {c.shape}")
        if self.normalized and abs(np.linalg.norm(c) - 1.0) > 1e-12:
            raise ValueError(
                f"graph flagged normalized but |J| = {np.linalg.norm(c)!r}")
        object.__setattr__(self, "couplings", c)

    def to_matrix(self) -> np.ndarray:
        """Full symmetric N x N matrix with zero diagonal."""
        m = np.zeros((self.n_ions, self.n_ions))
        iu, ju = upper_pairs(self.n_ions)
        m[iu, ju] = self.couplings
        m[ju, iu] = self.couplings
        return m

    def to_dict(self) -> dict:
        return {
            "schema": GRAPH_SCHEMA,
            "n": self.n_ions,
            "normalized": self.normalized,
            "couplings": self.couplings.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "InteractionGraph":
        if d.get("schema", GRAPH_SCHEMA) != GRAPH_SCHEMA:
            raise SchemaError(f"expected schema {GRAPH_SCHEMA!r}, got {d.get('schema')!r}")
        return cls(n_ions=int(d["n"]), couplings=np.asarray(d["couplings"], float),
                   normalized=bool(d["normalized"]))

    def to_csv(self) -> str:
        """(i, j, J_ij) triples for plotting."""
        buf = io.StringIO()
        buf.write("i,j,J_ij\n")
        iu, ju = upper_pairs(self.n_ions)
        for i, j, v in zip(iu, ju, self.couplings):
            buf.write(f"{i},{j},{v!r}\n")
        return buf.getvalue()


@dataclasses.dataclass
class ControlMatrix:
    """Dimensionless Rabi-frequency matrix W[i, n] with a physical scale (rad/s).

    Negative entries are allowed: they encode a pi phase flip between the
    addressing beam and the global beam.
    """

    omega: np.ndarray
    scale: float = 1.0

    def __post_init__(self):
        w = np.asarray(self.omega, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise DimensionMismatchError(f"omega must be square, got {w.shape}")
        if not np.all(np.isfinite(w)):
            raise ValueError("omega entries must be finite")
        self.omega = w

    @property
    def n_ions(self) -> int:
        return self.omega.shape[0]

    def physical(self) -> np.ndarray:
        """Rabi frequencies in rad/s."""
        return self.scale * self.omega


@dataclasses.dataclass(frozen=True)
class RamanSetup:
    """Chain plus beat notes, with the coupling kernel F precomputed.

    kernel[n, i, j] is symmetric in (i, j); memory O(N^3).
    """

    chain: ChainModel
    beat_notes: np.ndarray
    kernel: np.ndarray

    @property
    def n_ions(self) -> int:
        return self.chain.n_ions


def compute_beat_notes(mode_freqs: np.ndarray) -> np.ndarray:
    """Place each beat note just above its phonon mode.

    mu_1 sits 0.1 mean-gap above the center-of-mass mode; every other mu_n
    sits 0.1 of the local gap above mode n, hence below mode n-1.
    """
    w = np.asarray(mode_freqs, dtype=float)
    if w.size < 2:
        raise ValueError("beat-note placement needs at least two modes")
    if np.any(np.diff(w) >= 0):
        raise ValueError("mode_freqs must be sorted strictly descending")
    gaps = w[:-1] - w[1:]
    mu = np.empty_like(w)
    mu[0] = w[0] + 0.1 * gaps.mean()
    mu[1:] = w[1:] + 0.1 * gaps
    return mu


def build_kernel(lamb_dicke: np.ndarray, mode_freqs: np.ndarray,
                 beat_notes: np.ndarray) -> np.ndarray:
    """F[n, i, j] = sum_m eta[i, m] eta[j, m] omega_m / (mu_n^2 - omega_m^2)."""
    eta = np.asarray(lamb_dicke, dtype=float)
    w = np.asarray(mode_freqs, dtype=float)
    mu = np.asarray(beat_notes, dtype=float)
    denom = mu[:, None] ** 2 - w[None, :] ** 2
    if np.any(denom == 0):
        raise ValueError("beat note exactly resonant with a mode")
    weights = w[None, :] / denom  # (n, m)
    return np.einsum("im,jm,nm->nij", eta, eta, weights)


def build_setup(chain: ChainModel, beat_notes: np.ndarray | None = None) -> RamanSetup:
    """Fix the beat notes for a chain and precompute the coupling kernel."""
    if beat_notes is None:
        beat_notes = compute_beat_notes(chain.mode_freqs)
    beat_notes = np.asarray(beat_notes, dtype=float)
    if beat_notes.shape != chain.mode_freqs.shape:
        raise DimensionMismatchError("need one beat note per mode")
    kernel = build_kernel(chain.lamb_dicke, chain.mode_freqs, beat_notes)
    return RamanSetup(chain=chain, beat_notes=beat_notes,
                      kernel=np.ascontiguousarray(kernel))


def coupling_matrix(control: ControlMatrix, setup: RamanSetup) -> InteractionGraph:
    """Raw interaction graph (rad/s) produced by a control matrix."""
    n = setup.n_ions
    if control.n_ions != n:
        raise DimensionMismatchError(
            f"control is {control.n_ions} ions, setup is {n}")
    j = coupling_batch(control.omega[None, :, :], setup.kernel)[0]
    return InteractionGraph(n_ions=n, couplings=control.scale ** 2 * j,
                            normalized=False)


def normalize(graph: InteractionGraph):
    """Scale to unit Euclidean norm; returns (normalized graph, norm).

    The norm has the units of the input graph (rad/s for raw graphs).
    """
    norm = float(np.linalg.norm(graph.couplings))
    if norm == 0.0:
        raise NormalizationError("cannot normalize an all-zero interaction graph")
    return (InteractionGraph(n_ions=graph.n_ions, couplings=graph.couplings / norm,
                             normalized=True), norm)


def coupling_jacobian(control: ControlMatrix, setup: RamanSetup) -> np.ndarray:
    """Jacobian of the raw couplings with respect to the omega entries.

    Shape (N(N-1)/2, N^2); column k*N + n differentiates against omega[k, n].
    """
    n = setup.n_ions
    if control.n_ions != n:
        raise DimensionMismatchError(
            f"control is {control.n_ions} ions, setup is {n}")
    iu, ju = upper_pairs(n)
    npair = iu.size
    fp = setup.kernel[:, iu, ju].T  # (P, N)
    jac = np.zeros((npair, n, n))
    rows = np.arange(npair)
    jac[rows, iu, :] = control.omega[ju, :] * fp
    jac[rows, ju, :] += control.omega[iu, :] * fp
    return control.scale ** 2 * jac.reshape(npair, n * n)
