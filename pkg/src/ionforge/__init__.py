"""Laser control synthesis for trapped-ion spin simulators.

IONFORGE_THREADS caps internal parallelism (it seeds the BLAS thread-count
environment variables, so it must be handled before numpy loads).
"""

import os as _os

_threads = _os.environ.get("IONFORGE_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
                 "NUMEXPR_NUM_THREADS"):
        _os.environ.setdefault(_var, _threads)

from .chain import (ChainModel, TrapConfig, build_chain, equilibrium_positions,
                    lamb_dicke_matrix, transverse_modes, tune_trap)
from .constants import DEFAULT_CONSTANTS, PhysicalConstants
from .evaluate import (EvalReport, adiabatic_validity, apply_crosstalk,
                       crosstalk_error, evaluate_target, rescale_to_power,
                       scaling_study, similarity)
from .forward import (ControlMatrix, InteractionGraph, RamanSetup, build_setup,
                      compute_beat_notes, coupling_jacobian, coupling_matrix,
                      normalize)
from .kernels import BACKEND
from .lattices import LatticeSpec, build_target, list_supported, parse_spec
from .network import (AdamState, Dataset, NetworkParams, TrainConfig,
                      TrainResult, adam_step, forward_pass, generate_dataset,
                      infer, init_params, loss_and_gradient, train)

__version__ = "0.1.0"
