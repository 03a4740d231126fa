import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from l1lattice import (COMPLEX, REAL, FnFamily, MeasureSpace, SimpleFn,
                       decompose_complex, decompose_real, eps_net_coeffs,
                       optimal_k_complex_n1, optimal_k_search, preprune_count,
                       prune, refine_to_constant_coeffs,
                       verify_cell_decomposition, verify_decomposition,
                       verify_trace_counts, zero_fn)
from l1lattice.decompose import (COMPLEX_PREPRUNE, REAL_PREPRUNE,
                                 Decomposition, circle_net)
from l1lattice.generate import random_family, random_space, rng_for


def unit_space(n):
    return MeasureSpace(tuple(f"a{i}" for i in range(n)), (1.0,) * n)


class TestPrepruneCounts:
    def test_iterates_match_recursion(self):
        # oracle: iterate k(1)=2, k(n)=2n(k+1) and k(1)=1, k(n)=n(k+1) by hand
        assert tuple(preprune_count(n, REAL) for n in range(1, 6)) == REAL_PREPRUNE
        assert tuple(preprune_count(n, COMPLEX) for n in range(1, 6)) == COMPLEX_PREPRUNE
        assert REAL_PREPRUNE == (2, 12, 78, 632, 6330)
        assert COMPLEX_PREPRUNE == (1, 4, 15, 64, 325)

    def test_factorial_growth_bounds(self):
        for n in range(1, 6):
            assert preprune_count(n, REAL) <= math.exp(0.5) * 2 ** n * math.factorial(n)
            assert preprune_count(n, COMPLEX) <= math.e * math.factorial(n)


class TestDecomposeReal:
    def test_n1_is_pos_neg_split(self):
        fs = FnFamily((SimpleFn(unit_space(2), REAL, [2.0, -3.0]),))
        d = decompose_real(fs)
        assert np.array_equal(d.parts_matrix, [[2.0, 0.0], [0.0, 3.0]])
        assert np.array_equal(d.signs, [[1, -1]])

    def test_n2_preprune_count_is_12(self):
        sp = unit_space(2)
        fs = FnFamily((SimpleFn(sp, REAL, [1.0, 0.0]),
                       SimpleFn(sp, REAL, [0.0, 1.0])))
        d = decompose_real(fs)
        assert d.k == 12
        report = verify_decomposition(d, fs)
        assert report.passed
        assert np.array_equal(d.parts_matrix.sum(axis=0), [1.0, 1.0])

    def test_zero_family(self):
        fs = FnFamily((zero_fn(unit_space(3)), zero_fn(unit_space(3))))
        d = decompose_real(fs)
        assert np.all(d.parts_matrix == 0.0)
        assert verify_decomposition(d, fs).passed

    def test_complex_rejected(self):
        fs = FnFamily((SimpleFn(unit_space(1), COMPLEX, [1.0 + 0.0j]),))
        with pytest.raises(ValueError):
            decompose_real(fs)

    @given(st.integers(1, 4), st.integers(1, 12), st.integers(0, 2 ** 31))
    @settings(deadline=None, max_examples=40)
    def test_random_families_verify(self, n, atoms, seed):
        rng = rng_for(seed)
        fs = random_family(rng, random_space(rng, atoms), n, REAL)
        d = decompose_real(fs)
        assert d.k == REAL_PREPRUNE[n - 1]
        assert verify_trace_counts(d.trace, REAL)
        report = verify_decomposition(d, fs)
        assert report.passed, report


class TestDecomposeComplex:
    def test_n1_is_modulus_and_phase(self):
        fs = FnFamily((SimpleFn(unit_space(2), COMPLEX, [3.0 + 4.0j, 0.0]),))
        d = decompose_complex(fs)
        assert np.array_equal(d.parts_matrix, [[5.0, 0.0]])
        assert d.coeffs[0, 0, 0] == pytest.approx(0.6 + 0.8j, abs=1e-15)
        assert d.coeffs[0, 0, 1] == 0.0

    def test_preprune_counts_small_n(self):
        rng = rng_for(0)
        sp = random_space(rng, 3)
        assert decompose_complex(random_family(rng, sp, 2, COMPLEX)).k == 4
        assert decompose_complex(random_family(rng, sp, 3, COMPLEX)).k == 15

    def test_real_input_allowed(self):
        fs = FnFamily((SimpleFn(unit_space(2), REAL, [1.0, -2.0]),))
        d = decompose_complex(fs)
        assert d.mode == COMPLEX
        assert verify_decomposition(d, fs).passed

    @given(st.integers(1, 4), st.integers(1, 10), st.integers(0, 2 ** 31))
    @settings(deadline=None, max_examples=40)
    def test_random_families_verify(self, n, atoms, seed):
        rng = rng_for(seed)
        fs = random_family(rng, random_space(rng, atoms), n, COMPLEX)
        d = decompose_complex(fs)
        assert d.k == COMPLEX_PREPRUNE[n - 1]
        assert verify_trace_counts(d.trace, COMPLEX)
        assert verify_decomposition(d, fs).passed


class TestVerifyDecomposition:
    def make(self):
        rng = rng_for(3)
        fs = random_family(rng, random_space(rng, 5), 2, REAL)
        return fs, decompose_real(fs)

    def test_flipped_sign_detected(self):
        fs, d = self.make()
        signs = d.signs.copy()
        col = int(np.argmax(np.abs(signs).sum(axis=0)))
        row = int(np.argmax(np.abs(signs[:, col])))
        signs[row, col] = -signs[row, col]
        bad = Decomposition(d.space, d.mode, d.parts_matrix, signs, None, d.trace)
        report = verify_decomposition(bad, fs)
        assert not report.passed
        assert report.recombination_residuals[row] > 1e-10
        assert report.worst_atoms[row + 1] in fs.space.atoms

    def test_negative_part_detected(self):
        fs, d = self.make()
        parts = d.parts_matrix.copy()
        parts[0, 0] = -1.0
        bad = Decomposition(d.space, d.mode, parts, d.signs, None, d.trace)
        report = verify_decomposition(bad, fs)
        assert not report.passed
        assert report.negativity < 0.0

    def test_bad_sign_value_detected(self):
        fs, d = self.make()
        signs = d.signs.astype(np.int8).copy()
        signs[0, 0] = 2
        bad = Decomposition(d.space, d.mode, d.parts_matrix, signs, None, d.trace)
        assert verify_decomposition(bad, fs).coefficient_violations


class TestPrune:
    def test_removes_zero_parts_only(self):
        rng = rng_for(9)
        fs = random_family(rng, random_space(rng, 6), 3, REAL)
        d = decompose_real(fs)
        p = prune(d)
        assert p.k <= d.k
        assert np.all(np.any(p.parts_matrix != 0.0, axis=1))
        assert verify_decomposition(p, fs).passed
        # kept parts are bitwise untouched
        keep = np.any(d.parts_matrix != 0.0, axis=1)
        assert np.array_equal(p.parts_matrix, d.parts_matrix[keep])

    def test_idempotent_when_nothing_to_prune(self):
        fs = FnFamily((SimpleFn(unit_space(1), REAL, [1.0]),))
        d = prune(decompose_real(fs))
        assert prune(d) is d


class TestConstantCoefficients:
    def test_real_mode_single_cell_with_sign_entries(self):
        rng = rng_for(4)
        fs = random_family(rng, random_space(rng, 5), 2, REAL)
        d = decompose_real(fs)
        cd = refine_to_constant_coeffs(d)
        assert cd.epsilon == 0.0
        assert len(cd.cells) == 1
        assert np.array_equal(cd.alphas.real, d.signs.astype(float))
        assert verify_cell_decomposition(cd, fs).passed

    def test_complex_n1_two_cells(self):
        fs = FnFamily((SimpleFn(unit_space(2), COMPLEX, [1.0j, -1.0 + 0.0j]),))
        cd = refine_to_constant_coeffs(decompose_complex(fs))
        assert cd.cells == ((0,), (1,))
        assert cd.alphas[0, 0] == 1.0j and cd.alphas[0, 1] == -1.0
        assert verify_cell_decomposition(cd, fs).passed

    def test_zero_function_single_cell(self):
        fs = FnFamily((zero_fn(unit_space(3), COMPLEX),))
        cd = refine_to_constant_coeffs(decompose_complex(fs))
        assert len(cd.cells) == 1
        assert np.all(cd.alphas == 0.0)

    def test_exact_residual_on_random_families(self):
        rng = rng_for(5)
        for _ in range(50):
            fs = random_family(rng, random_space(rng, int(rng.integers(1, 9))),
                               int(rng.integers(1, 4)), COMPLEX)
            cd = refine_to_constant_coeffs(decompose_complex(fs))
            resid = np.abs(cd.recombined() - fs.value_matrix)
            assert np.max(resid) <= 1e-10 * (1.0 + np.max(np.abs(fs.value_matrix)))


class TestEpsNet:
    def test_net_always_contains_plus_minus_one(self):
        for eps in (0.1, 0.01, 0.5, 2.0, 7.0):
            net = circle_net(eps)
            assert 1.0 + 0.0j in net
            assert -1.0 + 0.0j in net

    def test_real_data_has_zero_residual(self):
        rng = rng_for(6)
        fs = random_family(rng, random_space(rng, 6), 3, REAL)
        cd = eps_net_coeffs(decompose_complex(fs), 0.3)
        assert np.max(np.abs(cd.recombined() - fs.value_matrix)) == 0.0

    def test_single_atom_rounding_bound(self):
        # |f - alpha h| = |phase - alpha| |f| <= eps |f|
        sp = unit_space(1)
        theta = 0.7
        f = SimpleFn(sp, COMPLEX, [5.0 * np.exp(1j * theta)])
        cd = eps_net_coeffs(decompose_complex(FnFamily((f,))), 0.1)
        assert abs(cd.alphas[0, 0] - np.exp(1j * theta)) <= 0.1
        resid = abs(f.values[0] - cd.recombined()[0, 0])
        assert resid <= 0.5

    def test_huge_eps_still_bounded(self):
        rng = rng_for(7)
        fs = random_family(rng, random_space(rng, 4), 2, COMPLEX)
        cd = eps_net_coeffs(decompose_complex(fs), 2.5)
        assert verify_cell_decomposition(cd, fs).passed

    def test_nonpositive_eps_rejected(self):
        fs = FnFamily((zero_fn(unit_space(1), COMPLEX),))
        with pytest.raises(ValueError):
            eps_net_coeffs(decompose_complex(fs), 0.0)

    @given(st.integers(1, 3), st.integers(1, 8), st.integers(0, 2 ** 31),
           st.sampled_from([0.25, 0.1, 0.03]))
    @settings(deadline=None, max_examples=40)
    def test_pointwise_bound_random(self, n, atoms, seed, eps):
        rng = rng_for(seed)
        fs = random_family(rng, random_space(rng, atoms), n, COMPLEX)
        cd = eps_net_coeffs(decompose_complex(fs), eps)
        latmax = np.max(np.abs(fs.value_matrix), axis=0)
        resid = np.abs(cd.recombined() - fs.value_matrix)
        assert np.all(resid <= eps * latmax[None, :]
                      + 1e-10 * (1.0 + latmax[None, :]))
        assert np.all((np.abs(np.abs(cd.alphas) - 1.0) <= 1e-12)
                      | (cd.alphas == 0.0))

    def test_pointwise_bound_large_sweep(self):
        rng = rng_for(77)
        for _ in range(1000):
            fs = random_family(rng, random_space(rng, int(rng.integers(1, 9))),
                               int(rng.integers(1, 4)), COMPLEX)
            eps = float(rng.uniform(0.02, 0.5))
            cd = eps_net_coeffs(decompose_complex(fs), eps)
            latmax = np.max(np.abs(fs.value_matrix), axis=0)
            resid = np.abs(cd.recombined() - fs.value_matrix)
            assert np.all(resid <= eps * latmax[None, :]
                          + 1e-10 * (1.0 + latmax[None, :]))


class TestOptimalKSearch:
    def test_sign_change_needs_two_parts(self):
        sp = unit_space(2)
        res = optimal_k_search(FnFamily((SimpleFn(sp, REAL, [1.0, -1.0]),)), 4)
        assert res.feasible and res.k == 2
        assert res.infeasible_k == (1,)

    def test_nonnegative_single_function_needs_one(self):
        sp = unit_space(2)
        res = optimal_k_search(FnFamily((SimpleFn(sp, REAL, [2.0, 0.5]),)), 4)
        assert res.k == 1
        assert np.array_equal(res.signs, [[1]])
        assert np.array_equal(res.parts[0].values, [2.0, 0.5])

    def test_result_is_a_valid_decomposition(self):
        rng = rng_for(8)
        fs = random_family(rng, random_space(rng, 5), 2, REAL)
        res = optimal_k_search(fs, 4)
        assert res.feasible
        parts = np.vstack([p.values for p in res.parts])
        latmax = np.max(np.abs(fs.value_matrix), axis=0)
        assert np.max(np.abs(parts.sum(axis=0) - latmax)) <= 1e-8
        recon = res.signs.astype(float) @ parts
        assert np.max(np.abs(recon - fs.value_matrix)) <= 1e-8
        assert parts.min() >= -1e-9

    def test_infeasible_reports_largest_k_tried(self):
        # four full-sign atoms force four distinct columns, so k_max=3 fails
        sp = unit_space(4)
        fs = FnFamily((SimpleFn(sp, REAL, [1.0, 1.0, -1.0, -1.0]),
                       SimpleFn(sp, REAL, [1.0, -1.0, 1.0, -1.0])))
        res = optimal_k_search(fs, 3)
        assert not res.feasible
        assert res.k_max_tried == 3
        assert res.infeasible_k == (1, 2, 3)

    def test_guards(self):
        sp = unit_space(5)
        big = FnFamily(tuple(SimpleFn(sp, REAL, np.eye(5)[i]) for i in range(5)))
        with pytest.raises(ValueError):
            optimal_k_search(big, 4)
        small = FnFamily((SimpleFn(sp, REAL, np.ones(5)),))
        with pytest.raises(ValueError):
            optimal_k_search(small, 9)


class TestOptimalKComplexN1:
    def test_nonvanishing_complex(self):
        res = optimal_k_complex_n1(SimpleFn(unit_space(2), COMPLEX, [1.0j, 2.0]))
        assert res.k == 1
        assert np.array_equal(res.part.values, [1.0, 2.0])
        assert res.coeff.values[0] == pytest.approx(1.0j, abs=1e-15)

    def test_zero_function(self):
        assert optimal_k_complex_n1(zero_fn(unit_space(2), COMPLEX)).k == 0

    def test_real_nonvanishing(self):
        res = optimal_k_complex_n1(SimpleFn(unit_space(2), REAL, [-1.0, -1.0]))
        assert res.k == 1
        recon = res.coeff.values * res.part.values
        assert np.array_equal(recon.real, [-1.0, -1.0])
