import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_density, random_vector
from oracle import ptrace
from qmac.errors import (BadDistribution, BadPermutation, DuplicateLabel, InvalidState,
                         LayoutMismatch, ParseError, UnknownLabel)
from qmac.state import (Ensemble, FactorLayout, LabeledState, PureState, TOL_RECON, basis_state,
                        bell_state, cq_state, fidelity, load_state, maximally_entangled,
                        maximally_mixed, partial_trace, permute_factors, purify, save_state,
                        state_from_dict, state_to_dict, tensor)


def diag(layout, *values):
    return LabeledState(layout, np.diag(values))


class TestLayout:
    def test_basic(self):
        lay = FactorLayout.of(("A", 2), ("B", 3))
        assert lay.labels == ("A", "B")
        assert lay.dims == (2, 3)
        assert lay.dim == 6
        assert lay.index("B") == 1
        assert "A" in lay and "C" not in lay

    def test_duplicate(self):
        with pytest.raises(DuplicateLabel):
            FactorLayout.of(("A", 2), ("A", 2))

    def test_unknown(self):
        with pytest.raises(UnknownLabel):
            FactorLayout.of(("A", 2)).index("Z")

    def test_concat_collision(self):
        with pytest.raises(DuplicateLabel):
            FactorLayout.of(("A", 2)).concat(FactorLayout.of(("A", 3)))


class TestValidation:
    def test_rejects_bad_trace(self):
        with pytest.raises(InvalidState):
            LabeledState([("A", 2)], np.eye(2))

    def test_rejects_non_hermitian(self):
        with pytest.raises(InvalidState):
            LabeledState([("A", 2)], [[0.5, 0.1], [0.0, 0.5]])

    def test_rejects_negative(self):
        with pytest.raises(InvalidState):
            LabeledState([("A", 2)], np.diag([1.5, -0.5]))

    def test_shape(self):
        with pytest.raises(LayoutMismatch):
            LabeledState([("A", 3)], np.eye(2) / 2)

    def test_pure_norm(self):
        with pytest.raises(InvalidState):
            PureState([("A", 2)], [1, 1])

    def test_immutable(self):
        s = maximally_mixed([("A", 2)])
        with pytest.raises(AttributeError):
            s.matrix = np.eye(2)
        with pytest.raises(ValueError):
            s.matrix[0, 0] = 1

    def test_ensemble(self):
        a = basis_state([("A", 2)], 0)
        with pytest.raises(BadDistribution):
            Ensemble([0.5, 0.6], [a, a])
        with pytest.raises(BadDistribution):
            Ensemble([1.0], [a, a])
        with pytest.raises(LayoutMismatch):
            Ensemble([0.5, 0.5], [a, basis_state([("B", 2)], 0)])


class TestTensor:
    def test_trivial_factor(self):
        rho = LabeledState([("A", 2)], [[0.7, 0.2], [0.2, 0.3]])
        out = tensor(maximally_mixed([("T", 1)]), rho)
        assert out.labels == ("T", "A")
        np.testing.assert_allclose(out.matrix, rho.matrix)

    def test_mixed(self):
        out = tensor(maximally_mixed([("A", 2)]), maximally_mixed([("B", 2)]))
        np.testing.assert_allclose(out.matrix, np.eye(4) / 4)

    def test_basis(self):
        out = tensor(diag([("A", 2)], 1, 0), diag([("B", 2)], 0, 1))
        np.testing.assert_allclose(out.matrix, np.diag([0, 1, 0, 0]))

    def test_pure(self):
        out = tensor(basis_state([("A", 2)], 1), basis_state([("B", 3)], 2))
        assert isinstance(out, PureState)
        assert np.argmax(np.abs(out.vector)) == 5


class TestPartialTrace:
    def test_keep_all(self):
        rho = LabeledState([("A", 2), ("B", 2)], random_density(np.random.default_rng(0), 4))
        assert partial_trace(rho, {"A", "B"}) is rho

    def test_bell(self):
        np.testing.assert_allclose(partial_trace(bell_state(), {"A"}).matrix, np.eye(2) / 2,
                                   atol=1e-15)

    def test_cq_marginal(self):
        plus = bell_state(+1, ("A", "B"))
        minus = bell_state(-1, ("A", "B"))
        w = cq_state(Ensemble([0.5, 0.5], [plus, minus]), "X")
        np.testing.assert_allclose(partial_trace(w, {"X"}).matrix, np.eye(2) / 2, atol=1e-15)

    def test_keeps_order(self):
        s = tensor(tensor(diag([("A", 2)], 1, 0), diag([("B", 2)], 0.5, 0.5)), diag([("C", 3)], 0, 0, 1))
        out = partial_trace(s, ["C", "A"])
        assert out.labels == ("A", "C")

    def test_unknown(self):
        with pytest.raises(UnknownLabel):
            partial_trace(bell_state(), ["Z"])

    @given(st.integers(0, 2**32 - 1), st.lists(st.integers(1, 3), min_size=1, max_size=3))
    def test_matches_oracle(self, seed, dims):
        rng = np.random.default_rng(seed)
        labels = [f"F{i}" for i in range(len(dims))]
        rho = random_density(rng, int(np.prod(dims)))
        s = LabeledState(list(zip(labels, dims)), rho)
        keep = [i for i in range(len(dims)) if rng.random() < 0.5]
        out = partial_trace(s, [labels[i] for i in keep])
        np.testing.assert_allclose(out.matrix, ptrace(rho, dims, keep), atol=1e-12)
        assert abs(out.trace() - 1) < 1e-9

    @given(st.integers(0, 2**32 - 1))
    def test_tensor_then_trace(self, seed):
        rng = np.random.default_rng(seed)
        a = LabeledState([("A", 3)], random_density(rng, 3))
        b = LabeledState([("B", 2), ("C", 2)], random_density(rng, 4))
        out = partial_trace(tensor(a, b), {"A"})
        assert np.max(np.abs(out.matrix - a.matrix)) <= TOL_RECON

    @given(st.integers(0, 2**32 - 1))
    def test_commutes_with_permutation(self, seed):
        rng = np.random.default_rng(seed)
        s = LabeledState([("A", 2), ("B", 3), ("C", 2)], random_density(rng, 12))
        lhs = partial_trace(permute_factors(s, ["C", "A", "B"]), {"C", "A"})
        rhs = permute_factors(partial_trace(s, {"A", "C"}), ["C", "A"])
        np.testing.assert_allclose(lhs.matrix, rhs.matrix, atol=1e-12)


class TestPermute:
    def test_identity_order(self):
        s = LabeledState([("A", 2), ("B", 2)], random_density(np.random.default_rng(1), 4))
        assert np.array_equal(permute_factors(s, ["A", "B"]).matrix, s.matrix)

    def test_involution(self):
        s = LabeledState([("A", 2), ("B", 3)], random_density(np.random.default_rng(2), 6))
        back = permute_factors(permute_factors(s, ["B", "A"]), ["A", "B"])
        assert np.array_equal(back.matrix, s.matrix)

    def test_swap_basis(self):
        s = basis_state([("A", 2), ("B", 2)], (0, 1)).density()
        np.testing.assert_array_equal(permute_factors(s, ["B", "A"]).matrix, np.diag([0, 0, 1, 0]))

    def test_bad(self):
        with pytest.raises(BadPermutation):
            permute_factors(bell_state(), ["A", "A"])
        with pytest.raises(BadPermutation):
            permute_factors(bell_state(), ["A"])


class TestPurify:
    def test_pure_input(self):
        phi = PureState([("A", 2)], np.array([0.6, 0.8j]))
        psi = purify(phi.density(), "R")
        assert psi.labels == ("R", "A")
        v = psi.vector.reshape(2, 2)
        assert np.allclose(v[1], 0)
        assert abs(abs(np.vdot(v[0], phi.vector)) - 1) < 1e-12

    def test_maximally_mixed(self):
        psi = purify(maximally_mixed([("A", 2)]), "R")
        sv = np.linalg.svd(psi.vector.reshape(2, 2), compute_uv=False)
        np.testing.assert_allclose(sv, [2 ** -0.5] * 2)

    def test_label_clash(self):
        with pytest.raises(DuplicateLabel):
            purify(maximally_mixed([("A", 2)]), "A")

    @given(st.integers(0, 2**32 - 1), st.integers(1, 8))
    def test_round_trip(self, seed, d):
        rng = np.random.default_rng(seed)
        rho = LabeledState([("S", d)], random_density(rng, d, rank=int(rng.integers(1, d + 1))))
        back = partial_trace(purify(rho, "R"), {"S"})
        assert np.max(np.abs(back.matrix - rho.matrix)) <= TOL_RECON


class TestFidelity:
    def test_examples(self):
        lay = [("A", 2)]
        assert fidelity(diag(lay, 1, 0), diag(lay, 0, 1)) == 0
        assert abs(fidelity(diag(lay, 0.5, 0.5), diag(lay, 0.9, 0.1)) - 0.8) < 1e-12

    def test_layout_mismatch(self):
        with pytest.raises(LayoutMismatch):
            fidelity(maximally_mixed([("A", 2)]), maximally_mixed([("B", 2)]))

    @given(st.integers(0, 2**32 - 1), st.integers(1, 6))
    def test_axioms(self, seed, d):
        rng = np.random.default_rng(seed)
        lay = [("A", d)]
        rho = LabeledState(lay, random_density(rng, d))
        sigma = LabeledState(lay, random_density(rng, d, rank=1))
        f = fidelity(rho, sigma)
        assert 0 <= f <= 1
        assert abs(f - fidelity(sigma, rho)) < 1e-7
        assert abs(fidelity(rho, rho) - 1) < 1e-9
        psi = PureState(lay, random_vector(rng, d))
        expect = np.vdot(psi.vector, rho.matrix @ psi.vector).real
        assert abs(fidelity(psi, rho) - expect) < 1e-9


class TestConstructors:
    def test_maximally_entangled(self):
        one = maximally_entangled(1)
        assert one.vector.tolist() == [1]
        two = maximally_entangled(2, ("A", "B"))
        np.testing.assert_allclose(two.vector, bell_state().vector)
        np.testing.assert_allclose(partial_trace(maximally_entangled(4), {"A"}).matrix,
                                   np.eye(4) / 4, atol=1e-15)

    def test_cq_single(self):
        sigma = LabeledState([("B", 2)], [[0.7, 0.1], [0.1, 0.3]])
        w = cq_state(Ensemble([1.0], [sigma]))
        assert w.labels == ("X", "B")
        np.testing.assert_allclose(w.matrix, sigma.matrix)

    def test_cq_identical(self):
        sigma = maximally_mixed([("B", 2)])
        w = cq_state(Ensemble([0.5, 0.5], [sigma, sigma]))
        np.testing.assert_allclose(w.matrix, np.eye(4) / 4)


class TestIO:
    def test_round_trip(self, tmp_path):
        rho = LabeledState([("A", 2), ("B", 3)], random_density(np.random.default_rng(3), 6))
        save_state(rho, tmp_path / "s.json")
        back = load_state(tmp_path / "s.json")
        assert back.layout == rho.layout
        np.testing.assert_array_equal(back.matrix, rho.matrix)

    def test_pure_vector_file(self, tmp_path):
        obj = {"factors": [{"label": "A", "dim": 2}, {"label": "B", "dim": 2}],
               "re": [0.5 ** 0.5, 0, 0, 0.5 ** 0.5], "im": [0, 0, 0, 0]}
        np.testing.assert_allclose(state_from_dict(obj).matrix, bell_state().density().matrix)

    def test_dict_round_trip(self):
        s = bell_state(-1).density()
        d = json.loads(json.dumps(state_to_dict(s)))
        np.testing.assert_array_equal(state_from_dict(d).matrix, s.matrix)

    def test_malformed(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{not json")
        with pytest.raises(ParseError):
            load_state(p)
        with pytest.raises(ParseError):
            state_from_dict({"re": [[1]]})
        with pytest.raises(ParseError):
            state_from_dict({"factors": [{"label": "A"}], "re": [[1]], "im": [[0]]})
