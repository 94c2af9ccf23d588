import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bibolilo.duality import (CATALOGUE, bibo_to_lilo_check, catalogue, figure_one_markdown,
                              lilo_to_bibo_check, pairing_identity_check, refinement_cells,
                              reports_to_json, second_difference_check, sweep_figure_one)
from bibolilo.kernel import transpose
from bibolilo.signals import ValueSpace
from bibolilo.stability import gain_bracket
from bibolilo.sysnode import (DiscreteSystemNode, delay_line, diagonal_exponential, dual,
                              from_kernel, left_shift_distributed_input,
                              transport_boundary_control)
from conftest import random_kernel, random_system


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_pairing_identity_random_weights(seed):
    sys = random_system(np.random.default_rng(seed))
    assert pairing_identity_check(sys, trials=20, seed=seed) <= 1e-10


def test_pairing_identity_kernel_and_transposed_kernel(rng):
    h = random_kernel(rng, 2, 3)
    a = pairing_identity_check(from_kernel(h), trials=50)
    b = pairing_identity_check(from_kernel(transpose(h)), trials=50)
    assert a <= 1e-10 and b <= 1e-10


def test_pairing_identity_zero_dual_input():
    # the dual's input is ignored when the dual system is zero: both sides vanish
    X = ValueSpace.l2(2)
    z = DiscreteSystemNode(np.zeros((2, 2)), np.zeros((2, 1)), np.zeros((1, 2)), 0.0, 0.1,
                           X, ValueSpace.sup(1), ValueSpace.sup(1))
    assert pairing_identity_check(z, trials=5) == 0.0


def test_transport_duality_checks():
    t = transport_boundary_control(16)
    v = bibo_to_lilo_check(t)
    assert v.passed and math.isclose(v.rhs, 1.0, rel_tol=1e-12)
    assert v.lhs <= 1.0 + 1e-9
    v = lilo_to_bibo_check(left_shift_distributed_input(16))
    assert v.passed and v.lhs <= 1.0 + 1e-9
    assert 'Radon-Nikodym' in v.statement


def test_delay_is_self_dual():
    d = delay_line(1.0, 0.125)
    for s in (d, dual(d)):
        for p in (1, math.inf):
            b = gain_bracket(s, p)
            assert math.isclose(b.lower_bound, 1.0, rel_tol=1e-12)
            assert math.isclose(b.upper_bound, 1.0, rel_tol=1e-12)


def test_diagonal_exponential_transpose_tv():
    s = diagonal_exponential([1.0, 2.0], [1.0, 3.0], 0.1)
    v = bibo_to_lilo_check(s)
    assert v.passed and math.isclose(v.lhs, v.rhs, rel_tol=1e-12)


def test_zero_system_checks():
    X = ValueSpace.l2(1)
    z = DiscreteSystemNode(np.zeros((1, 1)), np.zeros((1, 1)), np.zeros((1, 1)), 0.0, 0.1,
                           X, ValueSpace.sup(1), ValueSpace.sup(1))
    v = lilo_to_bibo_check(z)
    assert v.passed and v.lhs == 0.0 and v.rhs == 0.0


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10_000))
def test_random_kernel_duality(seed):
    S = from_kernel(random_kernel(np.random.default_rng(seed)))
    assert lilo_to_bibo_check(S).passed and bibo_to_lilo_check(S).passed


def test_second_difference_commutes_with_system():
    for sys in (transport_boundary_control(16), diagonal_exponential([1.0, 2.0], dt=0.05)):
        assert second_difference_check(sys, n_inputs=10) <= 1e-10


def test_catalogue_names():
    assert set(CATALOGUE) == {'delay1', 'exp1', 'transport', 'leftshift', 'diag-exp-2'}
    for name, sys in catalogue(8).items():
        assert sys.dt == 1 / 8


def test_sweep_figure_one_small():
    reps = sweep_figure_one(catalogue(8), trials=20)
    assert len(reps) == 5
    for r in reps:
        assert r.passed, [v for v in r.verdicts if not v.passed]
        assert r.pairing_residual >= 0
    md = figure_one_markdown(reps)
    assert md.count('\n') == 7
    d = json.loads(reports_to_json(reps))
    assert d['reports'][0]['name'] == 'delay1'
    assert sweep_figure_one({}) == []


def test_refinement_cells_negative_cell():
    vs = refinement_cells([8, 16])
    assert all(v.passed for v in vs)
    growth = [v for v in vs if 'growth' in v.name][0]
    assert abs(growth.lhs - math.sqrt(2)) <= 1e-6
