import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from egmgeom import qp
from egmgeom.baselines import dense_qp_oracle
from egmgeom.errors import InfeasibleError, InvalidInputError
from egmgeom.qp import (DiagQpInstance, TransformedQp, eval_f, kkt_multipliers, loop_bound,
                        median_select, project_scaled_simplex, qp_objective, root_find_f,
                        solve_diag_qp, transform)

BACKENDS = qp.available_backends()


def random_instance(rng, n, zero_sigma=0.15):
    d2 = rng.uniform(0.1, 3.0, n)
    m = 2.0 * rng.standard_normal(n)
    l = rng.standard_normal(n)
    u = l + rng.uniform(0.1, 2.0, n)
    s = rng.standard_normal(n)
    s[rng.random(n) < zero_sigma] = 0.0
    if not s.any():
        s[0] = 1.0
    lo = np.sum(np.where(s > 0, s * l, s * u))
    hi = np.sum(np.where(s > 0, s * u, s * l))
    return DiagQpInstance(d2, m, l, u, s, rng.uniform(lo, hi))


def test_compiled_backend_present():
    assert "cython" in BACKENDS, "build the extension: pip install -e . --no-build-isolation"


class TestInstance:
    def test_validation(self):
        ok = dict(d_sq=[1, 1], m=[0, 0], l=[0, 0], u=[1, 1], sigma=[1, 1], z=1)
        DiagQpInstance(**ok)
        for key, val in [("d_sq", [0, 1]), ("l", [1, 0]), ("m", [np.nan, 0]), ("u", [1])]:
            with pytest.raises(InvalidInputError):
                DiagQpInstance(**{**ok, key: val})
        with pytest.raises(InvalidInputError):
            DiagQpInstance(**{**ok, "z": math.inf})

    def test_infeasible(self):
        inst = DiagQpInstance([1, 1], [0, 0], [0, 0], [1, 1], [1, 1], 3.0)
        assert not inst.is_feasible()
        with pytest.raises(InfeasibleError):
            solve_diag_qp(inst)


@pytest.mark.parametrize("backend", BACKENDS)
class TestSolve:
    def test_symmetric(self, backend):
        inst = DiagQpInstance([1, 1], [0, 0], [0, 0], [1, 1], [1, 1], 1)
        assert np.allclose(solve_diag_qp(inst, backend=backend), [0.5, 0.5], atol=1e-15)

    def test_hand_kkt(self, backend):
        inst = DiagQpInstance([1, 1], [1, 0], [0, 0], [1, 1], [1, 1], 1)
        assert np.allclose(solve_diag_qp(inst, backend=backend), [1, 0], atol=1e-15)

    def test_frozen_enumeration(self, frozen, backend):
        for case in frozen["qp_n6"]:
            alpha = case.pop("alpha") if "alpha" in case else None
            inst = DiagQpInstance(**{k: case[k] for k in ("d_sq", "m", "l", "u", "sigma", "z")})
            case["alpha"] = alpha
            assert np.abs(solve_diag_qp(inst, backend=backend) - alpha).max() <= 1e-9

    def test_random_vs_oracle(self, backend):
        rng = np.random.default_rng(1)
        for t in range(200):
            inst = random_instance(rng, int(rng.integers(1, 9)))
            a, info = solve_diag_qp(inst, seed=t, backend=backend, full_output=True)
            assert np.abs(a - dense_qp_oracle(inst)).max() <= 1e-9
            assert info.loops <= loop_bound(max(info.n_active, 1))

    def test_postconditions(self, backend):
        rng = np.random.default_rng(2)
        for _ in range(100):
            inst = random_instance(rng, int(rng.integers(1, 40)))
            a = solve_diag_qp(inst, backend=backend)
            assert np.all(a >= inst.l) and np.all(a <= inst.u)
            assert abs(inst.sigma @ a - inst.z) <= 1e-9 * max(1, abs(inst.z))

    def test_kkt_certificate(self, backend):
        rng = np.random.default_rng(3)
        for _ in range(100):
            inst = random_instance(rng, int(rng.integers(2, 30)), zero_sigma=0.0)
            tq, _ = transform(inst)
            lam = root_find_f(tq, backend=backend)
            beta = np.clip(lam / tq.dbar2, tq.lp, tq.up)
            rp, rm = kkt_multipliers(tq, lam)
            assert rp.min() >= 0 and rm.min() >= 0
            scale = 1 + abs(lam)
            assert np.abs(rp * (beta - tq.lp) * tq.dbar2).max() <= 1e-8 * scale * (1 + np.abs(tq.lp).max())
            assert np.abs(rm * (tq.up - beta) * tq.dbar2).max() <= 1e-8 * scale * (1 + np.abs(tq.up).max())
            free = (beta > tq.lp) & (beta < tq.up)
            assert np.allclose(beta[free] * tq.dbar2[free], lam, rtol=1e-9, atol=1e-9)

    def test_large_n_and_duplicates(self, backend):
        rng = np.random.default_rng(4)
        n = 5000
        l = np.round(rng.standard_normal(n), 1)
        inst = DiagQpInstance(np.ones(n), np.round(rng.standard_normal(n), 1), l, l + 1.0,
                              np.ones(n), float(l.sum() + 0.3 * n))
        a, info = solve_diag_qp(inst, backend=backend, full_output=True)
        assert info.loops <= loop_bound(n)
        assert abs(a.sum() - inst.z) <= 1e-9 * abs(inst.z)


def test_sigma_zero_coordinate_decouples():
    inst = DiagQpInstance([1, 1, 1], [5, 0.2, 0.3], [0, 0, 0], [1, 1, 1], [0, 1, 1], 1)
    a = solve_diag_qp(inst)
    assert a[0] == 1.0
    assert a[1:].sum() == pytest.approx(1.0)


def test_objective_optimal_under_perturbation():
    rng = np.random.default_rng(5)
    for _ in range(5):
        inst = random_instance(rng, 6, zero_sigma=0.0)
        a = solve_diag_qp(inst)
        f0 = qp_objective(inst, a)
        for _ in range(200):
            v = a + 0.1 * rng.standard_normal(6)
            # restore feasibility: project onto the constraint set with the solver itself
            proj = solve_diag_qp(DiagQpInstance(np.ones(6), v, inst.l, inst.u, inst.sigma, inst.z))
            assert f0 <= qp_objective(inst, proj) + 1e-9


class TestRootFind:
    def test_linear_regime(self):
        tq = TransformedQp(np.full(3, -10.0), np.full(3, 10.0), np.array([1.0, 2.0, 4.0]), 1.5)
        assert root_find_f(tq) == pytest.approx(1.5 / (1 + 0.5 + 0.25), rel=1e-14)

    def test_saturating_single(self):
        tq = TransformedQp(np.array([0.0]), np.array([1.0]), np.array([1.0]), 1.0)
        lam = root_find_f(tq)
        assert abs(eval_f(lam, tq)) <= 1e-12 and lam == pytest.approx(1.0)

    def test_interpolation_identity(self):
        rng = np.random.default_rng(6)
        k = qp._backend.get_kernel()
        for _ in range(50):
            n = 7
            lp = rng.standard_normal(n)
            tq = TransformedQp(lp, lp + rng.uniform(0.1, 2, n), rng.uniform(0.2, 3, n),
                               float(lp.sum() + rng.uniform(0.1, 1) * n))
            lam, _, lo, hi, _, _ = k.root_find(tq.lp, tq.up, tq.dbar2, tq.zp, 0)
            if np.isfinite(lo) and np.isfinite(hi):
                fl, fu = eval_f(lo, tq), eval_f(hi, tq)
                if fu != fl:
                    assert lam == pytest.approx((lo * fu - hi * fl) / (fu - fl), rel=1e-9, abs=1e-12)

    @given(st.integers(0, 10_000), st.integers(1, 30))
    def test_monotone_and_root(self, seed, n):
        rng = np.random.default_rng(seed)
        lp = rng.standard_normal(n)
        up = lp + rng.uniform(0.01, 2, n)
        tq = TransformedQp(lp, up, rng.uniform(0.1, 3, n),
                           float(lp.sum() + rng.uniform(0, 1) * (up - lp).sum()))
        grid = np.linspace(-20, 20, 100)
        vals = [eval_f(x, tq) for x in grid]
        assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))
        for backend in BACKENDS:
            lam = root_find_f(tq, seed=seed, backend=backend)
            assert abs(eval_f(lam, tq)) <= 1e-9 * (1 + abs(tq.zp))

    def test_eval_f_frozen(self, frozen):
        case = frozen["eval_f_3var"]
        tq = TransformedQp(np.array(case["lp"]), np.array(case["up"]), np.array(case["dbar2"]), case["zp"])
        for lam, want in case["points"]:
            assert eval_f(lam, tq) == pytest.approx(want, abs=1e-14)
        assert eval_f(-1e9, tq) == pytest.approx(sum(case["lp"]) - case["zp"])
        assert eval_f(1e9, tq) == pytest.approx(sum(case["up"]) - case["zp"])


@pytest.mark.parametrize("backend", BACKENDS)
class TestMedian:
    def test_examples(self, backend):
        assert median_select([3, 1, 2], backend=backend) == 2
        assert median_select([4, 1, 3, 2], backend=backend) == 2

    def test_empty(self, backend):
        with pytest.raises(InvalidInputError):
            median_select([], backend=backend)

    @given(vals=st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=1, max_size=200),
           seed=st.integers(0, 2**32))
    def test_vs_sort(self, vals, seed, backend):
        assert median_select(vals, seed=seed, backend=backend) == sorted(vals)[(len(vals) - 1) // 2]


@pytest.mark.parametrize("backend", BACKENDS)
class TestProjection:
    def test_uniform(self, backend):
        v = project_scaled_simplex(np.full(5, 2.0 / 5), 2.0, backend=backend)
        assert np.allclose(v.weights, 0.2, atol=1e-15)

    def test_dominant(self, backend):
        assert np.allclose(project_scaled_simplex([10, 0, 0], 1.0, backend=backend).weights, [1, 0, 0])

    def test_frozen_sort_projection(self, frozen, backend):
        for case in frozen["qp_simplex"]:
            v = project_scaled_simplex(case["g"], case["scale"], backend=backend).weights
            assert np.abs(v - case["v"]).max() <= 1e-12

    def test_matches_qp_oracle(self, backend):
        rng = np.random.default_rng(7)
        for _ in range(50):
            n = int(rng.integers(1, 7))
            g, s = rng.standard_normal(n), float(rng.uniform(0.1, 5))
            inst = DiagQpInstance(np.full(n, s), g / s, np.zeros(n), np.ones(n), np.ones(n), 1.0)
            ref = dense_qp_oracle(inst) if n > 1 else np.ones(1)
            assert np.abs(project_scaled_simplex(g, s, backend=backend).weights - ref).max() <= 1e-9

    def test_tiny_scale_is_stable(self, backend):
        g = np.array([1e6, 1e6 - 1e-9, -3.0])
        v = project_scaled_simplex(g, 1e-12, backend=backend).weights
        assert abs(v.sum() - 1) <= 1e-12 and v[2] == 0.0

    def test_rejects(self, backend):
        with pytest.raises(InvalidInputError):
            project_scaled_simplex([1, 2], 0.0, backend=backend)
        with pytest.raises(InvalidInputError):
            project_scaled_simplex([np.nan], 1.0, backend=backend)


def test_backends_agree():
    if len(BACKENDS) < 2:
        pytest.skip("compiled kernel not built")
    rng = np.random.default_rng(8)
    for t in range(200):
        n = int(rng.integers(1, 300))
        g = rng.standard_normal(n) * 10 ** rng.uniform(-3, 3)
        s = float(10 ** rng.uniform(-3, 3))
        a = qp.project_simplex_array(g, s, seed=t, backend="cython")
        b = qp.project_simplex_array(g, s, seed=t, backend="python")
        assert np.abs(a - b).max() <= 1e-12


def test_env_var_selects_python(tmp_path):
    import subprocess
    import sys
    code = "from egmgeom import qp; print(qp.BACKEND)"
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True,
                         env={**__import__("os").environ, "EGMGEOM_PURE_PYTHON": "1"})
    assert out.stdout.strip() == "python"
