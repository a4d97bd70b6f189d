"""Inverse solver: a two-layer network trained against the physics forward map.

The network maps a normalized target graph (N(N-1)/2 inputs) through one
ReLU hidden layer with inverted dropout to an N x N control matrix.  The
training cost pushes the emitted controls back through the coupling formula,
normalizes the reconstructed graph, and takes the mean squared error against
the target, so gradients flow analytically through the physics.
"""

import dataclasses
import time

import numpy as np

from .errors import (DimensionMismatchError, NormalizationError,
                     TrainingDivergedError)
from .forward import ControlMatrix, InteractionGraph, RamanSetup
from .kernels import coupling_batch, coupling_batch_vjp

NORM_FLOOR = np.finfo(float).eps

INIT_DESCRIPTOR = ("w1 ~ he-uniform(fan_in=input); "
                   "w2 ~ uniform scaled for unit-input output std 0.1; zero biases")


@dataclasses.dataclass
class NetworkParams:
    """Weights and biases; w1 is hidden x input, w2 is output x hidden."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray

    def __post_init__(self):
        h, p = self.w1.shape
        out = self.w2.shape[0]
        if self.b1.shape != (h,) or self.w2.shape != (out, h) or self.b2.shape != (out,):
            raise DimensionMismatchError("inconsistent parameter shapes")
        n = int(round(np.sqrt(out)))
        if n * n != out or n * (n - 1) // 2 != p:
            raise DimensionMismatchError(
                f"output dim {out} and input dim {p} do not match any ion count")

    @property
    def n_ions(self) -> int:
        return int(round(np.sqrt(self.w2.shape[0])))

    @property
    def input_dim(self) -> int:
        return self.w1.shape[1]

    @property
    def hidden_dim(self) -> int:
        return self.w1.shape[0]

    @property
    def output_dim(self) -> int:
        return self.w2.shape[0]

    def copy(self) -> "NetworkParams":
        return NetworkParams(self.w1.copy(), self.b1.copy(),
                             self.w2.copy(), self.b2.copy())

    def arrays(self):
        return (self.w1, self.b1, self.w2, self.b2)


@dataclasses.dataclass(frozen=True)
class TrainConfig:
    """Training hyperparameters; defaults follow the full-scale protocol."""

    train_size: int = 45000
    val_size: int = 5000
    epochs: int = 100
    batch_size: int = 64
    lr0: float = 1e-3
    lr_decay: float = 0.9
    decay_every: int = 5
    dropout_rate: float = 0.05
    hidden_dim: int = 16384
    seed: int = 0
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8

    def __post_init__(self):
        if not 0 <= self.dropout_rate < 1:
            raise ValueError("dropout_rate must be in [0, 1)")
        if not self.lr0 > 0:
            raise ValueError("lr0 must be positive")
        if not 0 < self.lr_decay <= 1:
            raise ValueError("lr_decay must be in (0, 1]")
        for name in ("train_size", "val_size", "batch_size", "hidden_dim",
                     "decay_every"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")

    def learning_rate(self, epoch: int) -> float:
        return self.lr0 * self.lr_decay ** (epoch // self.decay_every)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        return cls(**d)


@dataclasses.dataclass(frozen=True)
class Dataset:
    """Normalized target vectors generated by random forward solves."""

    targets: np.ndarray  # (count, N(N-1)/2), each row unit norm
    seed: int
    chain_fingerprint: str

    @property
    def count(self) -> int:
        return self.targets.shape[0]


@dataclasses.dataclass
class AdamState:
    m: tuple
    v: tuple
    t: int = 0

    @classmethod
    def zeros_like(cls, params: NetworkParams) -> "AdamState":
        return cls(m=tuple(np.zeros_like(a) for a in params.arrays()),
                   v=tuple(np.zeros_like(a) for a in params.arrays()))


def init_params(n_ions: int, hidden_dim: int, seed: int = 0) -> NetworkParams:
    """Seeded initialization; see INIT_DESCRIPTOR for the recipe."""
    rng = np.random.default_rng(seed)
    p = n_ions * (n_ions - 1) // 2
    out = n_ions * n_ions
    lim1 = np.sqrt(6.0 / p)
    lim2 = 0.1 * np.sqrt(3.0 * p / hidden_dim)
    return NetworkParams(
        w1=rng.uniform(-lim1, lim1, size=(hidden_dim, p)),
        b1=np.zeros(hidden_dim),
        w2=rng.uniform(-lim2, lim2, size=(out, hidden_dim)),
        b2=np.zeros(out),
    )


def generate_dataset(setup: RamanSetup, count: int, seed: int,
                     chunk: int = 1024) -> Dataset:
    """Draw control matrices uniform on [-1, 1], push through the forward map,
    and keep the normalized graphs.

    Uses numpy's default PCG64 generator seeded with `seed`; samples are drawn
    sequentially, so a fixed seed reproduces the dataset bit for bit.  Samples
    whose graph norm vanishes are redrawn (bounded retries).
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    n = setup.n_ions
    rng = np.random.default_rng(seed)
    rows = []
    remaining = count
    retries = 0
    while remaining > 0:
        b = min(chunk, remaining)
        omega = rng.uniform(-1.0, 1.0, size=(b, n, n))
        j = coupling_batch(omega, setup.kernel)
        norms = np.linalg.norm(j, axis=1)
        good = norms > 0
        if not np.all(good):
            retries += np.count_nonzero(~good)
            if retries > 100:
                raise NormalizationError("too many zero-norm samples; kernel degenerate?")
        kept = j[good] / norms[good, None]
        rows.append(kept)
        remaining -= kept.shape[0]
    targets = np.vstack(rows)[:count]
    return Dataset(targets=targets, seed=seed,
                   chain_fingerprint=setup.chain.fingerprint())


def make_dropout_mask(shape, rate: float, seed) -> np.ndarray:
    """Bernoulli keep-mask for inverted dropout, deterministic in `seed`."""
    rng = np.random.default_rng(seed)
    return rng.random(shape) >= rate


def _forward_raw(params: NetworkParams, x: np.ndarray, mask, rate: float):
    z1 = x @ params.w1.T + params.b1
    h = np.maximum(z1, 0.0)
    if mask is not None:
        h = h * mask / (1.0 - rate)
    y = h @ params.w2.T + params.b2
    return z1, h, y


def forward_pass(params: NetworkParams, target: np.ndarray,
                 dropout_mask: np.ndarray | None = None,
                 dropout_rate: float = 0.0) -> ControlMatrix:
    """Network output for one normalized target, as a dimensionless control matrix."""
    x = np.asarray(target, dtype=float)
    if x.shape != (params.input_dim,):
        raise DimensionMismatchError(
            f"target has shape {x.shape}, expected ({params.input_dim},)")
    _, _, y = _forward_raw(params, x[None, :], dropout_mask, dropout_rate)
    n = params.n_ions
    return ControlMatrix(omega=y.reshape(n, n), scale=1.0)


def loss_and_gradient(params: NetworkParams, targets: np.ndarray,
                      setup: RamanSetup, dropout_rate: float = 0.0,
                      dropout_seed=None, dropout_mask=None):
    """Physics-reconstruction MSE cost and its exact gradient.

    cost = mean over the batch of (2 / (N(N-1))) * sum_{i<j} (Jhat_gen - Jhat_target)^2
    where Jhat_gen is the normalized graph rebuilt from the network output.
    Returns (cost, NetworkParams-shaped gradients, diagnostics dict); the
    diagnostics flag batch elements whose generated graph norm hit the
    floating-point floor.
    """
    x = np.atleast_2d(np.asarray(targets, dtype=float))
    if x.shape[0] == 0:
        raise ValueError("batch must be nonempty")
    if x.shape[1] != params.input_dim:
        raise DimensionMismatchError(
            f"targets have dim {x.shape[1]}, expected {params.input_dim}")
    nb, npair = x.shape
    n = params.n_ions

    mask = dropout_mask
    if mask is None and dropout_rate > 0.0:
        mask = make_dropout_mask((nb, params.hidden_dim), dropout_rate, dropout_seed)

    z1, h, y = _forward_raw(params, x, mask, dropout_rate)
    omega = np.ascontiguousarray(y.reshape(nb, n, n))
    j = coupling_batch(omega, setup.kernel)

    norms = np.linalg.norm(j, axis=1)
    floored = norms < NORM_FLOOR
    safe = np.where(floored, NORM_FLOOR, norms)
    jhat = j / safe[:, None]

    diff = jhat - x
    cost = float(np.mean(np.sum(diff * diff, axis=1)) / npair)

    # Backpropagation: cost -> normalized graph -> raw graph -> omega -> layers.
    g_jhat = (2.0 / (npair * nb)) * diff
    g_j = (g_jhat - np.sum(g_jhat * jhat, axis=1, keepdims=True) * jhat) / safe[:, None]
    g_omega = coupling_batch_vjp(g_j, omega, setup.kernel)

    g_y = g_omega.reshape(nb, n * n)
    gw2 = g_y.T @ h
    gb2 = g_y.sum(axis=0)
    g_h = g_y @ params.w2
    if mask is not None:
        g_h = g_h * mask / (1.0 - dropout_rate)
    g_z1 = g_h * (z1 > 0.0)
    gw1 = g_z1.T @ x
    gb1 = g_z1.sum(axis=0)

    grads = NetworkParams(w1=gw1, b1=gb1, w2=gw2, b2=gb2)
    return cost, grads, {"floored": int(np.count_nonzero(floored))}


def adam_step(params: NetworkParams, grads: NetworkParams, state: AdamState,
              lr: float, beta1: float = 0.9, beta2: float = 0.999,
              eps: float = 1e-8):
    """One bias-corrected update; mutates params and state in place."""
    state.t += 1
    bc1 = 1.0 - beta1 ** state.t
    bc2 = 1.0 - beta2 ** state.t
    for theta, g, m, v in zip(params.arrays(), grads.arrays(), state.m, state.v):
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * g * g
        theta -= lr * (m / bc1) / (np.sqrt(v / bc2) + eps)
    return params, state


def batch_similarity(params: NetworkParams, targets: np.ndarray,
                     setup: RamanSetup, batch_size: int = 256):
    """Mean similarity and mean cost over targets, dropout off."""
    x = np.atleast_2d(np.asarray(targets, dtype=float))
    n = params.n_ions
    npair = x.shape[1]
    sims = []
    costs = []
    for lo in range(0, x.shape[0], batch_size):
        xb = x[lo:lo + batch_size]
        _, _, y = _forward_raw(params, xb, None, 0.0)
        omega = np.ascontiguousarray(y.reshape(xb.shape[0], n, n))
        j = coupling_batch(omega, setup.kernel)
        norms = np.linalg.norm(j, axis=1)
        safe = np.where(norms < NORM_FLOOR, NORM_FLOOR, norms)
        jhat = j / safe[:, None]
        sims.append(np.sum(jhat * xb, axis=1))
        costs.append(np.sum((jhat - xb) ** 2, axis=1) / npair)
    return float(np.mean(np.concatenate(sims))), float(np.mean(np.concatenate(costs)))


@dataclasses.dataclass
class TrainResult:
    params: NetworkParams          # after the last epoch
    best_params: NetworkParams     # highest validation similarity
    history: list                  # per-epoch dicts
    best_epoch: int


def train(setup: RamanSetup, dataset: Dataset, config: TrainConfig) -> TrainResult:
    """Mini-batch ADAM training with the stepped learning-rate schedule.

    The dataset is split deterministically: the first train_size rows train,
    the next val_size rows validate.  History records per-epoch training cost
    and validation mean similarity (and MSE) with dropout disabled.
    """
    if dataset.count < config.train_size + config.val_size:
        raise ValueError(
            f"dataset has {dataset.count} samples; config needs "
            f"{config.train_size + config.val_size}")
    train_x = dataset.targets[:config.train_size]
    val_x = dataset.targets[config.train_size:config.train_size + config.val_size]

    rng = np.random.default_rng(config.seed)
    params = init_params(setup.n_ions, config.hidden_dim,
                         seed=rng.integers(2 ** 63))
    state = AdamState.zeros_like(params)
    best = params.copy()
    best_sim = -np.inf
    best_epoch = -1
    history = []

    for epoch in range(config.epochs):
        lr = config.learning_rate(epoch)
        tic = time.perf_counter()
        perm = rng.permutation(config.train_size)
        epoch_cost = 0.0
        floored = 0
        nbatches = 0
        for lo in range(0, config.train_size, config.batch_size):
            idx = perm[lo:lo + config.batch_size]
            cost, grads, diag = loss_and_gradient(
                params, train_x[idx], setup,
                dropout_rate=config.dropout_rate,
                dropout_seed=rng.integers(2 ** 63))
            if not np.isfinite(cost):
                raise TrainingDivergedError(
                    f"non-finite cost at epoch {epoch}, batch {nbatches}")
            adam_step(params, grads, state, lr, config.adam_beta1,
                      config.adam_beta2, config.adam_eps)
            epoch_cost += cost
            floored += diag["floored"]
            nbatches += 1
        val_sim, val_cost = batch_similarity(params, val_x, setup)
        seconds = time.perf_counter() - tic
        history.append({
            "epoch": epoch,
            "lr": lr,
            "train_cost": epoch_cost / nbatches,
            "val_cost": val_cost,
            "val_similarity": val_sim,
            "seconds": seconds,
            "floored": floored,
        })
        if val_sim > best_sim:
            best_sim = val_sim
            best = params.copy()
            best_epoch = epoch

    return TrainResult(params=params, best_params=best, history=history,
                       best_epoch=best_epoch)


def infer(params: NetworkParams, target) -> ControlMatrix:
    """Control matrix for a target graph; normalizes the target if needed."""
    if isinstance(target, InteractionGraph):
        vec = target.couplings
    else:
        vec = np.asarray(target, dtype=float)
    norm = np.linalg.norm(vec)
    if norm == 0:
        raise NormalizationError("target graph is all zero")
    if abs(norm - 1.0) > 1e-9:
        vec = vec / norm
    return forward_pass(params, vec)
