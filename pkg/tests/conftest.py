import numpy as np
import pytest

import ionforge as forge


@pytest.fixture(scope="session")
def setup6():
    """Small chain reused by forward-model and network tests."""
    trap = forge.tune_trap(6)
    return forge.build_setup(forge.build_chain(trap))


@pytest.fixture(scope="session")
def setup4():
    trap = forge.tune_trap(4)
    return forge.build_setup(forge.build_chain(trap))


@pytest.fixture(scope="session")
def setup10():
    trap = forge.tune_trap(10)
    return forge.build_setup(forge.build_chain(trap))


@pytest.fixture(scope="session")
def desk_model(setup10):
    """Desk-scale N=10 training run shared by the acceptance criteria.

    Scaled substitute for the full-size protocol: hidden 2048, 20000/2000
    samples, 50 epochs, batch 64.
    """
    dataset = forge.generate_dataset(setup10, 22000, seed=2026)
    config = forge.TrainConfig(train_size=20000, val_size=2000, epochs=50,
                               batch_size=64, hidden_dim=2048, seed=11)
    result = forge.train(setup10, dataset, config)
    return result, dataset, config


def brute_force_couplings(omega, lamb_dicke, mode_freqs, beat_notes):
    """Independent double-sum evaluation of the coupling formula.

    Plain Python loops over (n, m); deliberately does not touch the
    precomputed kernel path it is used to check.
    """
    n = omega.shape[0]
    out = []
    for i in range(n):
        for j in range(i + 1, n):
            acc = 0.0
            for nn in range(n):
                for m in range(n):
                    acc += (omega[i, nn] * omega[j, nn]
                            * lamb_dicke[i, m] * lamb_dicke[j, m] * mode_freqs[m]
                            / (beat_notes[nn] ** 2 - mode_freqs[m] ** 2))
            out.append(acc)
    return np.array(out)
