"""Solution quality and experimental viability metrics.

Covers graph similarity, nearest-neighbor crosstalk and its induced error,
power-constrained rescaling, the adiabatic-elimination ratio with a phonon
occupation estimate, and the ion-number scaling study.
"""

import dataclasses
import math
import time

import numpy as np

from .chain import build_chain, tune_trap
from .errors import NormalizationError
from .forward import (ControlMatrix, InteractionGraph, RamanSetup, build_setup,
                      coupling_matrix, normalize)
from .lattices import LatticeSpec, build_target, list_supported
from .network import TrainConfig, generate_dataset, infer, train

DEFAULT_POWER_BUDGET = 2 * math.pi * 1e6  # rad/s: sum |Omega| / 2pi = 1 MHz

_UNIT_TOL = 1e-8


def _unit_vector(graph, name):
    vec = graph.couplings if isinstance(graph, InteractionGraph) else np.asarray(graph, float)
    norm = np.linalg.norm(vec)
    if abs(norm - 1.0) > _UNIT_TOL:
        raise NormalizationError(f"{name} is not normalized (|J| = {norm!r})")
    return vec


def similarity(a, b) -> float:
    """Inner product of two normalized graphs: 1 identical, 0 orthogonal,
    -1 a global sign flip."""
    va = _unit_vector(a, "first graph")
    vb = _unit_vector(b, "second graph")
    if va.shape != vb.shape:
        raise ValueError("graphs differ in size")
    return float(np.dot(va, vb))


def apply_crosstalk(control: ControlMatrix, epsilon: float) -> ControlMatrix:
    """Leak a fraction epsilon of each addressing beam onto neighboring ions.

    Row i of the returned matrix is W_i + epsilon (W_{i-1} + W_{i+1}); the
    end ions see a single neighbor.
    """
    if epsilon < 0:
        raise ValueError("crosstalk magnitude must be >= 0")
    w = control.omega
    leaked = w.copy()
    leaked[:-1] += epsilon * w[1:]
    leaked[1:] += epsilon * w[:-1]
    return ControlMatrix(omega=leaked, scale=control.scale)


def crosstalk_error(control: ControlMatrix, setup: RamanSetup, epsilon: float):
    """Relative graph error E and residual similarity under crosstalk epsilon."""
    base = coupling_matrix(control, setup)
    base_norm = np.linalg.norm(base.couplings)
    if base_norm == 0:
        raise NormalizationError("baseline interaction graph is zero")
    perturbed = coupling_matrix(apply_crosstalk(control, epsilon), setup)
    err = float(np.linalg.norm(perturbed.couplings - base.couplings) / base_norm)
    f_xtalk = similarity(normalize(perturbed)[0], normalize(base)[0])
    return err, f_xtalk


def rescale_to_power(control: ControlMatrix, setup: RamanSetup,
                     budget: float = DEFAULT_POWER_BUDGET):
    """Set the physical scale so sum_{i,n} |Omega_{i,n}| equals the budget.

    Returns the rescaled control matrix and the resulting graph norm in rad/s.
    The dimensionless matrix (hence the normalized graph) is untouched.
    """
    if budget <= 0:
        raise ValueError("power budget must be positive")
    total = np.sum(np.abs(control.omega))
    if total == 0:
        raise NormalizationError("control matrix is all zero")
    scaled = ControlMatrix(omega=control.omega.copy(), scale=budget / total)
    physical_norm = float(np.linalg.norm(coupling_matrix(scaled, setup).couplings))
    return scaled, physical_norm


def adiabatic_validity(control: ControlMatrix, setup: RamanSetup):
    """Worst-case adiabatic-elimination ratio and phonon occupation estimate.

    ratio = max_{i,n,m} eta[i,m] |Omega_phys[i,n]| / |mu_n - omega_m| must
    stay well below 1 for the pure spin model to hold.  The occupation is the
    first-order virtual-excitation amplitude eta Omega / (2 (mu - omega)),
    squared and summed over drives, reported for the worst mode.
    """
    eta = setup.chain.lamb_dicke  # (i, m)
    detune = setup.beat_notes[:, None] - setup.chain.mode_freqs[None, :]  # (n, m)
    w_abs = np.abs(control.physical())  # (i, n)
    # amp[i, n, m] = eta[i, m] * |Omega[i, n]| / (2 (mu_n - omega_m))
    amp = eta[:, None, :] * w_abs[:, :, None] / (2.0 * detune[None, :, :])
    max_ratio = float(np.max(2.0 * np.abs(amp)))
    phonons = float(np.max(np.sum(amp * amp, axis=(0, 1))))
    return max_ratio, phonons


@dataclasses.dataclass
class EvalReport:
    """Quality and validity summary for one solved target."""

    target: str
    similarity: float
    crosstalk_curve: list          # (epsilon, error, similarity) triples
    power_budget: float            # rad/s
    physical_norm: float           # rad/s
    max_adiabatic_ratio: float
    phonon_estimate: float

    def __post_init__(self):
        if not -1.0 - 1e-9 <= self.similarity <= 1.0 + 1e-9:
            raise ValueError("similarity outside [-1, 1]")
        if self.phonon_estimate < 0:
            raise ValueError("phonon estimate must be >= 0")

    def to_dict(self) -> dict:
        return {
            "target": self.target,
            "similarity": self.similarity,
            "crosstalk_curve": [
                {"epsilon": e, "error": err, "similarity": f}
                for e, err, f in self.crosstalk_curve
            ],
            "power_budget_rad_s": self.power_budget,
            "physical_norm_rad_s": self.physical_norm,
            "max_adiabatic_ratio": self.max_adiabatic_ratio,
            "phonon_estimate": self.phonon_estimate,
        }


def evaluate_target(params, setup: RamanSetup, spec: LatticeSpec,
                    epsilons=(0.0, 0.01, 0.02, 0.03, 0.04, 0.05),
                    budget: float = DEFAULT_POWER_BUDGET) -> EvalReport:
    """Full evaluation pipeline for one lattice target."""
    target = build_target(spec)
    control = infer(params, target)
    generated = normalize(coupling_matrix(control, setup))[0]
    fval = similarity(generated, target)
    curve = []
    for eps in epsilons:
        err, f_x = crosstalk_error(control, setup, eps)
        curve.append((float(eps), err, f_x))
    scaled, physical_norm = rescale_to_power(control, setup, budget)
    max_ratio, phonons = adiabatic_validity(scaled, setup)
    return EvalReport(target=spec.label(), similarity=fval,
                      crosstalk_curve=curve, power_budget=budget,
                      physical_norm=physical_norm,
                      max_adiabatic_ratio=max_ratio, phonon_estimate=phonons)


def linear_fit_r2(x, y):
    """Least-squares line and its coefficient of determination."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    coeffs = np.polyfit(x, y, 1)
    resid = y - np.polyval(coeffs, x)
    ss_tot = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid ** 2) / ss_tot if ss_tot > 0 else 1.0
    return coeffs, float(r2)


def quadratic_fit(x, y):
    """Quadratic least squares plus the share of variance carried by the
    quadratic term alone."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    coeffs = np.polyfit(x, y, 2)
    resid = y - np.polyval(coeffs, x)
    ss_tot = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid ** 2) / ss_tot if ss_tot > 0 else 1.0
    quad_share = float(np.var(coeffs[0] * x ** 2) / np.var(y)) if np.var(y) > 0 else 0.0
    return {"coeffs": coeffs.tolist(), "r2": float(r2), "quad_share": quad_share}


def scaling_study(n_list, kinds, config: TrainConfig,
                  budget: float = DEFAULT_POWER_BUDGET,
                  f_low: float = 1e6, f_high: float = 5e6,
                  data_seed: int = 7):
    """Train a solver per ion count and record quality, timing, and strength.

    Returns one record per N with the similarity per requested kind, the mean
    epoch wall time, and the power-constrained linear-chain norm.  Failures
    are recorded per N and the study continues.
    """
    records = []
    for n in n_list:
        rec = {"n": int(n)}
        try:
            trap = tune_trap(n, f_low=f_low, f_high=f_high)
            setup = build_setup(build_chain(trap))
            dataset = generate_dataset(setup, config.train_size + config.val_size,
                                       seed=data_seed + n)
            tic = time.perf_counter()
            result = train(setup, dataset, config)
            rec["train_seconds"] = time.perf_counter() - tic
            rec["epoch_seconds"] = float(np.mean([h["seconds"] for h in result.history]))
            available = {s.kind: s for s in list_supported(n)}
            for kind in kinds:
                spec = available.get(kind)
                if spec is None:
                    rec[f"F_{kind}"] = float("nan")
                    continue
                target = build_target(spec)
                control = infer(result.best_params, target)
                generated = normalize(coupling_matrix(control, setup))[0]
                rec[f"F_{kind}"] = similarity(generated, target)
            linear = build_target(available["linear"])
            control = infer(result.best_params, linear)
            _, physical_norm = rescale_to_power(control, setup, budget)
            rec["j_norm_rad_s"] = physical_norm
        except Exception as exc:  # noqa: BLE001 - per-N failures are data
            rec["error"] = f"{type(exc).__name__}: {exc}"
        records.append(rec)
    return records
