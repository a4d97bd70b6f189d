import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import ionforge as forge
from ionforge.errors import (DimensionMismatchError, NormalizationError,
                             SchemaError)
from ionforge.forward import (ControlMatrix, InteractionGraph,
                              compute_beat_notes, coupling_jacobian,
                              coupling_matrix, normalize)
from conftest import brute_force_couplings


class TestBeatNotes:
    def test_two_mode_example(self):
        w = 2 * math.pi * np.array([5.0, 4.8]) * 1e6
        mu = compute_beat_notes(w) / (2 * math.pi * 1e6)
        np.testing.assert_allclose(mu, [5.02, 4.82], rtol=1e-12)

    def test_three_mode_example(self):
        w = 2 * math.pi * np.array([5.0, 4.6, 4.0]) * 1e6
        mu = compute_beat_notes(w) / (2 * math.pi * 1e6)
        np.testing.assert_allclose(mu, [5.05, 4.64, 4.06], rtol=1e-12)

    def test_placement_ordering(self, setup10):
        w = setup10.chain.mode_freqs
        mu = setup10.beat_notes
        assert np.all(mu > w)
        assert np.all(mu[1:] < w[:-1])

    def test_single_mode_rejected(self):
        with pytest.raises(ValueError):
            compute_beat_notes(np.array([2 * math.pi * 5e6]))

    def test_unsorted_rejected(self):
        with pytest.raises(ValueError):
            compute_beat_notes(2 * math.pi * np.array([4.0e6, 5.0e6]))


class TestCouplingMatrix:
    def test_zero_control_gives_zero_graph(self, setup6):
        graph = coupling_matrix(ControlMatrix(np.zeros((6, 6))), setup6)
        assert np.all(graph.couplings == 0)

    def test_column_sign_invariance_exact(self, setup6):
        rng = np.random.default_rng(5)
        omega = rng.uniform(-1, 1, (6, 6))
        base = coupling_matrix(ControlMatrix(omega), setup6).couplings
        flipped = omega.copy()
        flipped[:, [1, 4]] *= -1.0
        other = coupling_matrix(ControlMatrix(flipped), setup6).couplings
        assert base.tobytes() == other.tobytes()

    @pytest.mark.parametrize("n", [2, 4, 8])
    def test_matches_brute_force_double_sum(self, n):
        setup = forge.build_setup(forge.build_chain(forge.tune_trap(n)))
        rng = np.random.default_rng(n)
        omega = rng.uniform(-1, 1, (n, n))
        kernel_path = coupling_matrix(ControlMatrix(omega), setup).couplings
        brute = brute_force_couplings(omega, setup.chain.lamb_dicke,
                                      setup.chain.mode_freqs, setup.beat_notes)
        np.testing.assert_allclose(kernel_path, brute, rtol=1e-12)

    def test_scale_covariance(self, setup6):
        rng = np.random.default_rng(6)
        omega = rng.uniform(-1, 1, (6, 6))
        j1 = coupling_matrix(ControlMatrix(omega, scale=1.0), setup6).couplings
        j3 = coupling_matrix(ControlMatrix(omega, scale=3.0), setup6).couplings
        np.testing.assert_allclose(j3, 9.0 * j1, rtol=1e-14)

    def test_symmetric_zero_diagonal_reconstruction(self, setup6):
        rng = np.random.default_rng(7)
        graph = coupling_matrix(ControlMatrix(rng.uniform(-1, 1, (6, 6))), setup6)
        full = graph.to_matrix()
        assert np.all(full == full.T)
        assert np.all(np.diag(full) == 0)

    def test_dimension_mismatch(self, setup6):
        with pytest.raises(DimensionMismatchError):
            coupling_matrix(ControlMatrix(np.zeros((4, 4))), setup6)

    def test_kernel_symmetric_in_ion_pair(self, setup6):
        np.testing.assert_allclose(setup6.kernel,
                                   np.swapaxes(setup6.kernel, 1, 2), rtol=1e-15)


class TestNormalize:
    def test_three_four_five(self):
        graph = InteractionGraph(n_ions=3, couplings=np.array([3.0, 4.0, 0.0]))
        unit, norm = normalize(graph)
        assert norm == pytest.approx(5.0)
        np.testing.assert_allclose(unit.couplings, [0.6, 0.8, 0.0])
        assert unit.normalized

    def test_idempotent_on_unit_input(self):
        graph = InteractionGraph(n_ions=3, couplings=np.array([0.6, 0.8, 0.0]),
                                 normalized=True)
        unit, norm = normalize(graph)
        assert norm == pytest.approx(1.0, abs=1e-15)
        np.testing.assert_allclose(unit.couplings, graph.couplings, rtol=1e-15)

    @given(scale=st.floats(min_value=1e-6, max_value=1e6),
           seed=st.integers(min_value=0, max_value=2 ** 16))
    @settings(max_examples=30, deadline=None)
    def test_scale_invariance(self, scale, seed):
        rng = np.random.default_rng(seed)
        vec = rng.normal(size=6)
        if np.linalg.norm(vec) == 0:
            return
        a, _ = normalize(InteractionGraph(n_ions=4, couplings=vec))
        b, nb = normalize(InteractionGraph(n_ions=4, couplings=scale * vec))
        np.testing.assert_allclose(a.couplings, b.couplings, rtol=1e-10)
        assert nb == pytest.approx(scale * np.linalg.norm(vec), rel=1e-12)

    def test_zero_graph_rejected(self):
        with pytest.raises(NormalizationError):
            normalize(InteractionGraph(n_ions=3, couplings=np.zeros(3)))


class TestCouplingJacobian:
    def test_zero_control_zero_jacobian(self, setup4):
        jac = coupling_jacobian(ControlMatrix(np.zeros((4, 4))), setup4)
        assert jac.shape == (6, 16)
        assert np.all(jac == 0)

    def test_matches_finite_differences(self, setup4):
        rng = np.random.default_rng(11)
        omega = rng.uniform(-1, 1, (4, 4))
        control = ControlMatrix(omega)
        jac = coupling_jacobian(control, setup4)
        eps = 1e-6
        for k in range(4):
            for n in range(4):
                bumped = omega.copy()
                bumped[k, n] += eps
                plus = coupling_matrix(ControlMatrix(bumped), setup4).couplings
                bumped[k, n] -= 2 * eps
                minus = coupling_matrix(ControlMatrix(bumped), setup4).couplings
                fd = (plus - minus) / (2 * eps)
                col = jac[:, k * 4 + n]
                scale = np.max(np.abs(fd)) or 1.0
                np.testing.assert_allclose(col, fd, atol=1e-6 * scale)

    def test_two_ion_closed_form(self):
        setup = forge.build_setup(forge.build_chain(forge.tune_trap(2)))
        omega = np.array([[0.3, -0.7], [1.1, 0.5]])
        jac = coupling_jacobian(ControlMatrix(omega), setup)
        f = setup.kernel  # F[n, 0, 1]
        # dJ01/dW[0, n] = W[1, n] F[n, 0, 1]; dJ01/dW[1, n] = W[0, n] F[n, 0, 1]
        expected = np.array([omega[1, 0] * f[0, 0, 1], omega[1, 1] * f[1, 0, 1],
                             omega[0, 0] * f[0, 0, 1], omega[0, 1] * f[1, 0, 1]])
        np.testing.assert_allclose(jac[0], expected, rtol=1e-13)


class TestGraphSerialization:
    def test_json_roundtrip(self):
        graph = InteractionGraph(n_ions=3, couplings=np.array([0.6, 0.8, 0.0]),
                                 normalized=True)
        doc = json.loads(json.dumps(graph.to_dict()))
        assert doc["schema"] == "graph/1"
        back = InteractionGraph.from_dict(doc)
        np.testing.assert_allclose(back.couplings, graph.couplings)
        assert back.normalized

    def test_schema_rejected(self):
        with pytest.raises(SchemaError):
            InteractionGraph.from_dict({"schema": "graph/9", "n": 3,
                                        "normalized": False, "couplings": [1, 2, 3]})

    def test_csv_triples(self):
        graph = InteractionGraph(n_ions=3, couplings=np.array([1.0, 0.0, 2.0]))
        lines = graph.to_csv().strip().splitlines()
        assert lines[0] == "i,j,J_ij"
        assert lines[1].startswith("0,1,")
        assert lines[3].startswith("1,2,")

    def test_bad_length_rejected(self):
        with pytest.raises(DimensionMismatchError):
            InteractionGraph(n_ions=4, couplings=np.zeros(5))
