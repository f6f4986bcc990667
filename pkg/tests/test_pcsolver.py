import numpy as np
import pytest
import scipy.sparse as sp

from lipreg.errors import DataError
from lipreg.pcsolver import PackingCoveringProgram, encode_difference_pair, solve


def make_prog(P, p, C, c, beta=0.1):
    return PackingCoveringProgram(
        P=sp.csr_matrix(np.atleast_2d(np.asarray(P, dtype=float))),
        p=np.asarray(p, dtype=float),
        C=sp.csr_matrix(np.atleast_2d(np.asarray(C, dtype=float))),
        c=np.asarray(c, dtype=float),
        beta=beta,
    )


class TestValidation:
    def test_negative_packing_entry(self):
        with pytest.raises(DataError):
            make_prog([[-1.0]], [1.0], [[1.0]], [1.0])

    def test_negative_covering_entry(self):
        with pytest.raises(DataError):
            make_prog([[1.0]], [1.0], [[-1.0]], [1.0])

    def test_nonpositive_packing_bound(self):
        with pytest.raises(DataError):
            make_prog([[1.0]], [0.0], [[1.0]], [1.0])

    def test_beta_out_of_range(self):
        for beta in (0.0, 1.0, -0.5):
            with pytest.raises(DataError):
                make_prog([[1.0]], [1.0], [[1.0]], [1.0], beta=beta)

    def test_incidence_recorded(self):
        prog = make_prog([[1.0, 0.0], [1.0, 2.0]], [1, 1], [[0.0, 1.0]], [1.0])
        assert prog.max_var_incidence == 2
        assert prog.num_rows == 3
        assert prog.iteration_cap() > 0


class TestSolve:
    def test_forced_single_variable(self):
        prog = make_prog([[1.0]], [1.0], [[1.0]], [1.0])
        out = solve(prog)
        assert out.status == "feasible-solution"
        assert 1.0 - 1e-9 <= out.x[0] <= 1.0 + prog.beta + 1e-9

    def test_two_variable_tight_cover(self):
        prog = make_prog([[1.0, 0.0], [0.0, 1.0]], [1, 1],
                         [[1.0, 1.0]], [2.0], beta=0.05)
        out = solve(prog)
        assert out.status == "feasible-solution"
        x = out.x
        assert x.sum() >= 2.0 - 1e-9
        assert np.all(x <= 1.0 + prog.beta + 1e-9)
        assert np.all(x >= 1.0 - prog.beta - 1e-9)

    def test_infeasible_certificate(self):
        prog = make_prog([[1.0]], [1.0], [[1.0]], [3.0])
        out = solve(prog)
        assert out.status == "infeasibility-certificate"
        assert out.x is None

    def test_returned_x_nonnegative(self):
        rng = np.random.default_rng(0)
        P = rng.random((5, 8))
        C = rng.random((3, 8))
        prog = make_prog(P, np.full(5, 10.0), C, np.full(3, 0.5))
        out = solve(prog)
        assert out.status == "feasible-solution"
        assert np.all(out.x >= 0)

    def test_minimize_objective(self):
        # min x1 + x2 s.t. x1 + x2 >= 1, x_i <= 1
        prog = make_prog(np.eye(2), [1, 1], [[1.0, 1.0]], [1.0])
        out = solve(prog, minimize=np.array([1.0, 1.0]))
        assert out.x.sum() == pytest.approx(1.0, abs=1e-8)

    def test_objective_length_checked(self):
        prog = make_prog([[1.0]], [1.0], [[1.0]], [1.0])
        with pytest.raises(DataError):
            solve(prog, minimize=np.array([1.0, 1.0]))

    @pytest.mark.parametrize("beta", [0.05, 0.1])
    def test_planted_feasible_never_infeasible(self, beta):
        """Random feasible instances built around an explicit feasible point."""
        rng = np.random.default_rng(42 + int(beta * 100))
        for _ in range(50):
            nv = int(rng.integers(2, 30))
            mp = int(rng.integers(1, 20))
            mc = int(rng.integers(1, 20))
            x0 = rng.random(nv)
            P = sp.random(mp, nv, density=0.3, random_state=rng,
                          data_rvs=lambda k: rng.random(k)).tocsr()
            C = sp.random(mc, nv, density=0.3, random_state=rng,
                          data_rvs=lambda k: rng.random(k)).tocsr()
            p = np.asarray(P @ x0).ravel() + rng.random(mp) + 1e-6
            c = np.maximum(0.0, np.asarray(C @ x0).ravel() - rng.random(mc) * 0.1)
            prog = PackingCoveringProgram(P=P, p=p, C=C, c=c, beta=beta)
            out = solve(prog)
            assert out.status == "feasible-solution"
            x = out.x
            assert np.all(np.asarray(P @ x).ravel() <= (1 + beta) * p + 1e-9)
            assert np.all(np.asarray(C @ x).ravel() >= c - 1e-9)


class TestDifferencePair:
    def test_rows_pin_companion(self):
        (prow, pb), (crow, cb) = encode_difference_pair(0, 1, 3)
        beta = 0.01
        for f in (0.0, 0.4, 1.0):
            # tightest companion consistent with both rows
            lo, hi = cb - f, (1 + beta) * pb - f
            assert lo == pytest.approx(1 - f)
            assert hi == pytest.approx(1 - f + beta, abs=1e-12)
        assert prow.shape == (1, 3)
        assert (prow != crow).nnz == 0

    def test_bad_indices(self):
        with pytest.raises(DataError):
            encode_difference_pair(0, 0, 2)
        with pytest.raises(DataError):
            encode_difference_pair(0, 5, 2)
