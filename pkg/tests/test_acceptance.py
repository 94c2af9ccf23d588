"""Acceptance criteria, one test each.

Every criterion prints a single ``PASS``/``FAIL`` line with its measured
value, tolerance and runtime. Run directly for the summary only:

    python tests/test_acceptance.py
"""

import math
import sys
import time

import numpy as np
import pytest

from bibolilo.duality import (catalogue, pairing_identity_check, refinement_cells,
                              second_difference_check, sweep_figure_one)
from bibolilo.kernel import KERNELS, convolve, exponential, induced_gain, laplace, transpose
from bibolilo.signals import Signal, TimeGrid, ValueSpace, lp_norm
from bibolilo.stability import counterexample_sweep, kernel_gain, observation_admissibility
from bibolilo.sysnode import (delay_line, diagonal_exponential, dual, from_kernel,
                              left_shift_distributed_input, propagate, scalar_exponential, simulate,
                              transfer, transport_boundary_control)

sys.path.insert(0, __file__.rsplit('/', 1)[0])
from conftest import random_kernel, random_system  # noqa: E402

INF = math.inf


def criterion_1():
    rows = counterexample_sweep(1024, [1, 1 / 4, 1 / 16, 1 / 64, 1 / 256])
    err = max(abs(r.ratio - 1 / math.sqrt(r.eps)) * math.sqrt(r.eps) for r in rows)
    return err <= 1e-9, f"max relative error {err:.2e} (tol 1e-9)", 10


def criterion_2():
    M = 256
    sys_ = transport_boundary_control(M)
    N = 3 * M + 1
    rng = np.random.default_rng(2)
    worst = -np.inf
    for b in range(20):
        U = rng.uniform(-1, 1, (50, N, 1)) * rng.uniform(0.1, 10, (50, 1, 1))
        if b == 0:
            # sign patterns of constant modulus attain equality
            U = np.sign(U) * rng.uniform(0.1, 10, (50, 1, 1))
        _, Y = propagate(sys_, U, store_states=False)
        defect = sys_.output_space.norm(Y).max(axis=1) - np.abs(U[..., 0]).max(axis=1)
        worst = max(worst, float(defect.max()))
    return worst <= 1e-12, f"max ||y||_Linf(L2) - ||u||_Linf = {worst:.2e} over 1000 inputs (tol 1e-12)", 30


def criterion_3():
    rng = np.random.default_rng(3)
    systems = [transport_boundary_control(64), delay_line(1.0, 1 / 32),
               scalar_exponential(1.0, 1 / 32)]
    systems += [random_system(rng) for _ in range(20)]
    res = max(pairing_identity_check(s, trials=100, seed=k) for k, s in enumerate(systems))
    return res <= 1e-10, f"max relative pairing residual {res:.2e} on 23 systems (tol 1e-10)", 30


def criterion_4():
    rng = np.random.default_rng(4)
    exact_ok, worst = True, 0.0
    for _ in range(200):
        h = random_kernel(rng)
        g1 = induced_gain(h, 1).value
        exact_ok &= g1 == induced_gain(transpose(h), INF).value
        d = dual(from_kernel(h))
        worst = max(worst, abs(kernel_gain(d, INF).upper_bound - g1) / max(1.0, g1))
    ok = exact_ok and worst <= 1e-10
    return ok, f"transpose equality exact: {exact_ok}; dual(from_kernel) defect {worst:.2e} (tol 1e-10)", 60


def criterion_5():
    rng = np.random.default_rng(5)
    worst = -np.inf
    for _ in range(500):
        h = random_kernel(rng)
        N = int(rng.integers(5, 60))
        g = TimeGrid(h.dt, N)
        U = rng.standard_normal((N, h.cols)) * (rng.random((N, 1)) < rng.uniform(0.1, 1))
        for p, Uspace, Yspace in ((INF, ValueSpace.sup(h.cols), ValueSpace.sup(h.rows)),
                                  (1, ValueSpace.l1(h.cols), ValueSpace.l1(h.rows))):
            u = Signal(g, Uspace, U)
            y = convolve(h, u).with_space(Yspace)
            rhs = induced_gain(h, p).value * lp_norm(u, p)
            worst = max(worst, (lp_norm(y, p) - rhs) / max(1.0, rhs))
    return worst <= 1e-12, f"max relative defect {worst:.2e} over 1000 checks (tol 1e-12)", 60


def criterion_6():
    failed = []
    for M in (8, 16, 32):
        for r in sweep_figure_one(catalogue(M), trials=20):
            failed += [f"{r.name}@{M}: {v.name}" for v in r.verdicts if not v.passed]
    cells = refinement_cells([8, 16, 32])
    failed += [v.name for v in cells if not v.passed]
    ok = not failed
    detail = "all brackets consistent; left shift L1 <= 1, Linf lower = sqrt(M)" if ok else "; ".join(failed)
    return ok, detail, 60


def criterion_7():
    rng = np.random.default_rng(7)
    bad = 0
    for _ in range(50):
        s = random_system(rng, nx=int(rng.integers(1, 9)))
        rep = observation_admissibility(s, n_random=8, seed=int(rng.integers(1 << 30)))
        if rep.constant_lower > rep.maxreg_upper + 1e-9 or rep.maxreg_lower > rep.constant_upper + 1e-9:
            bad += 1
    M = 64
    ls = left_shift_distributed_input(M)
    worst = 0.0
    for _ in range(20):
        x0 = rng.standard_normal(M)
        y = simulate(ls, Signal.zeros(TimeGrid(1 / M, M + 2), ls.input_space), x0).output
        worst = max(worst, abs(lp_norm(y, 1) - np.abs(x0).sum() / M))
    ok = bad == 0 and worst <= 1e-12
    return ok, f"{bad}/50 non-overlapping brackets; ||C T(.)x||_L1 - ||x||_L1 = {worst:.1e}", 60


def criterion_8():
    rng = np.random.default_rng(8)
    pts = rng.uniform(0, 5, 20) + 1j * rng.uniform(-10, 10, 20)
    err = 0.0
    for name in ('delay1', 'exp1'):
        make, exact = KERNELS[name]
        h = make(1e-3)
        err = max(err, max(abs(laplace(h, s)[0, 0] - exact(s)) for s in pts))
    diff = 0.0
    # realizations are dense shift registers: keep the state below 2000
    for h in (KERNELS['delay1'][0](1e-3), exponential([1.0], dt=1e-2, horizon=10.0)):
        S = from_kernel(h)
        for a, b in zip(pts[:10], pts[10:]):
            lhs = laplace(h, a) - laplace(h, b)
            rhs = transfer(S, a) - transfer(S, b)
            diff = max(diff, float(np.abs(lhs - rhs).max()))
    ok = err <= 5e-3 and diff <= 1e-8
    return ok, f"closed-form error {err:.2e} (tol 5e-3); difference relation {diff:.2e} (tol 1e-8)", 10


def criterion_9():
    systems = [transport_boundary_control(32), scalar_exponential(1.0, 1 / 32),
               diagonal_exponential([1.0, 2.0], [1.0, -1.0], 1 / 32),
               left_shift_distributed_input(16)]
    res = max(second_difference_check(s, n_inputs=50) for s in systems)
    return res <= 1e-10, f"max relative residual {res:.2e} on 50 smooth inputs (tol 1e-10)", 10


CRITERIA = [
    (1, "counterexample law 1/sqrt(eps)", criterion_1),
    (2, "primal BIBO bound of transport", criterion_2),
    (3, "pairing identity", criterion_3),
    (4, "gain duality through transpose and dual", criterion_4),
    (5, "Young-type bound", criterion_5),
    (6, "duality brackets and the negative cell", criterion_6),
    (7, "admissibility equivalence", criterion_7),
    (8, "Laplace/transfer consistency", criterion_8),
    (9, "second-difference regression", criterion_9),
]


def evaluate(fn):
    t0 = time.perf_counter()
    ok, detail, budget = fn()
    elapsed = time.perf_counter() - t0
    timely = elapsed <= budget
    return ok and timely, f"{detail}; {elapsed:.2f}s (budget {budget}s)"


@pytest.mark.parametrize('number,title,fn', CRITERIA, ids=[f"criterion_{n}" for n, _, _ in CRITERIA])
def test_criterion(number, title, fn, capsys):
    ok, detail = evaluate(fn)
    with capsys.disabled():
        print(f"\n{'PASS' if ok else 'FAIL'} [{number}] {title}: {detail}")
    assert ok, detail


if __name__ == '__main__':
    failures = 0
    for number, title, fn in CRITERIA:
        ok, detail = evaluate(fn)
        failures += not ok
        print(f"{'PASS' if ok else 'FAIL'} [{number}] {title}: {detail}")
    sys.exit(1 if failures else 0)
