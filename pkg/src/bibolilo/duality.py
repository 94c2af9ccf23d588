"""Executable checks of BIBO/LILO duality on discrete system nodes.

The duality statements are checked as one-sided inequalities between certified
lower bounds of one system and certified upper bounds of the other, never
as equalities of point estimates.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .signals import Signal, TimeGrid, pairing
from .stability import (DEFAULT_SEED, control_admissibility, default_horizon_steps,
                        gain_bracket, kernel_gain, observation_admissibility)
from .sysnode import (delay_line, diagonal_exponential, dual, left_shift_distributed_input,
                      propagate, scalar_exponential, transport_boundary_control)

__all__ = [
    'EXACT_TOL', 'BRACKET_TOL', 'Verdict', 'DualityReport', 'CATALOGUE', 'catalogue',
    'pairing_identity_check', 'second_difference_check', 'bibo_to_lilo_check',
    'lilo_to_bibo_check', 'sweep_figure_one', 'refinement_cells', 'figure_one_markdown',
]

EXACT_TOL = 1e-10
BRACKET_TOL = 1e-9
INF = math.inf

CATALOGUE = {
    'delay1': lambda M: delay_line(1.0, 1.0 / M),
    'exp1': lambda M: scalar_exponential(1.0, 1.0 / M),
    'transport': transport_boundary_control,
    'leftshift': left_shift_distributed_input,
    'diag-exp-2': lambda M: diagonal_exponential([1.0, 1.0], [1.0, 2.0], 1.0 / M),
}


def catalogue(M, names=None):
    """Built-in systems at grid size ``M`` (time step ``1/M``)."""
    names = list(CATALOGUE) if names is None else names
    return {name: CATALOGUE[name](M) for name in names}


@dataclass
class Verdict:
    name: str
    statement: str
    lhs: float
    rhs: float
    passed: bool

    @property
    def margin(self):
        return self.rhs - self.lhs

    def to_dict(self):
        return dict(name=self.name, statement=self.statement, lhs=self.lhs, rhs=self.rhs,
                    margin=self.margin, passed=self.passed)


def _le(name, statement, lhs, rhs, tol=BRACKET_TOL):
    return Verdict(name, statement, float(lhs), float(rhs), bool(lhs <= rhs + tol))


def _horizon_steps(sys, horizon):
    if horizon is None:
        return default_horizon_steps(sys)
    return int(math.floor(horizon / sys.dt + 1e-9)) + 1


def pairing_identity_check(sys, trials=100, horizon=None, seed=DEFAULT_SEED, dual_sys=None):
    """Largest relative defect of ``pairing(y, u_d) == pairing(u, y_d)``.

    Both systems start at rest; the defect of each trial is divided by
    ``1 + |pairing(y, u_d)|``.
    """
    dsys = dual(sys) if dual_sys is None else dual_sys
    N = _horizon_steps(sys, horizon)
    grid = TimeGrid(sys.dt, N)
    rng = np.random.default_rng(seed)
    U = rng.standard_normal((trials, N, sys.input_space.dim))
    Ud = rng.standard_normal((trials, N, dsys.input_space.dim))
    _, Y = propagate(sys, U, store_states=False)
    _, Yd = propagate(dsys, Ud, store_states=False)
    worst = 0.0
    for k in range(trials):
        lhs = pairing(Signal(grid, sys.output_space, Y[k]), Signal(grid, dsys.input_space, Ud[k]))
        rhs = pairing(Signal(grid, sys.input_space, U[k]), Signal(grid, dsys.output_space, Yd[k]))
        worst = max(worst, abs(lhs - rhs) / (1.0 + abs(lhs)))
    return worst


def _smooth_inputs(n, N, dim, rng):
    t = np.linspace(0.0, 1.0, N)
    # compactly supported bump on (0.1, 0.9) times random low-frequency trig
    s = np.clip((t - 0.1) / 0.8, 0.0, 1.0)
    with np.errstate(divide='ignore', over='ignore'):
        bump = np.where((s > 0) & (s < 1), np.exp(-1.0 / np.maximum(s * (1 - s), 1e-300)), 0.0)
    out = np.zeros((n, N, dim))
    for r in range(4):
        a = rng.standard_normal((n, 1, dim))
        f = rng.uniform(0.5, 4.0, (n, 1, dim))
        ph = rng.uniform(0, 2 * np.pi, (n, 1, dim))
        out += a * np.sin(2 * np.pi * f * t[None, :, None] + ph)
    return out * bump[None, :, None]


def _second_difference(A):
    D = A.copy()
    D[:, 1:] -= 2 * A[:, :-1]
    D[:, 2:] += A[:, :-2]
    return D


def second_difference_check(sys, n_inputs=50, horizon=None, seed=DEFAULT_SEED):
    """Output of the second difference versus second difference of the output.

    Returns the largest defect relative to ``1 + max |y''|``.
    """
    N = _horizon_steps(sys, horizon)
    rng = np.random.default_rng(seed)
    U = _smooth_inputs(n_inputs, N, sys.input_space.dim, rng)
    _, Y = propagate(sys, U, store_states=False)
    _, Y2 = propagate(sys, _second_difference(U), store_states=False)
    D = _second_difference(Y)
    scale = 1.0 + np.abs(D).max(axis=(1, 2))
    return float((np.abs(Y2 - D).max(axis=(1, 2)) / scale).max())


def bibo_to_lilo_check(sys, horizon=None, primal_infty=None, dual_one=None):
    """L^inf-BIBO of ``sys`` bounds the L^1 gain of its dual by the same constant."""
    primal_infty = primal_infty or gain_bracket(sys, INF, horizon)
    dual_one = dual_one or gain_bracket(dual(sys), 1, horizon)
    return _le('Linf-BIBO => dual L1-LILO',
               'dual L1 lower bound <= primal Linf upper bound',
               dual_one.lower_bound, primal_infty.upper_bound)


def lilo_to_bibo_check(sys, horizon=None, primal_one=None, dual_infty=None):
    """L^1-LILO of ``sys`` bounds the L^inf gain of its dual.

    In finite dimensions the Radon-Nikodym hypothesis holds trivially, so
    C^inf- and L^inf-BIBO of the dual cannot be told apart here.
    """
    primal_one = primal_one or gain_bracket(sys, 1, horizon)
    dual_infty = dual_infty or gain_bracket(dual(sys), INF, horizon)
    return _le('L1-LILO => dual Cinf-BIBO',
               'dual Linf lower bound <= primal L1 upper bound (Radon-Nikodym vacuous)',
               dual_infty.lower_bound, primal_one.upper_bound)


@dataclass
class DualityReport:
    name: str
    grid_size: int
    pairing_residual: float
    primal_gain_infty: object
    dual_gain_one: object
    primal_gain_one: object
    dual_gain_infty: object
    verdicts: list = field(default_factory=list)

    @property
    def passed(self):
        return all(v.passed for v in self.verdicts)

    def to_dict(self):
        def g(r):
            return dict(lower_bound=r.lower_bound, upper_bound=r.upper_bound, horizon=r.horizon)
        return dict(name=self.name, grid_size=self.grid_size,
                    pairing_residual=self.pairing_residual,
                    primal_gain_infty=g(self.primal_gain_infty),
                    dual_gain_one=g(self.dual_gain_one),
                    primal_gain_one=g(self.primal_gain_one),
                    dual_gain_infty=g(self.dual_gain_infty),
                    verdicts=[v.to_dict() for v in self.verdicts])


def _is_siso(space):
    return not (space.dim > 1 and space.norm_kind == 'weighted-2')


def _matches_convention(space, p):
    if space.dim == 1:
        return space.scale() == 1.0
    if p == INF:
        return space.norm_kind == 'sup'
    return space.norm_kind == 'weighted-1' and np.all(space.weights == 1)


def _brackets_overlap(name, statement, a_lo, a_hi, b_lo, b_hi):
    ok = a_lo <= b_hi + BRACKET_TOL and b_lo <= a_hi + BRACKET_TOL
    return Verdict(name, statement, max(a_lo, b_lo), min(a_hi, b_hi), bool(ok))


def system_report(name, sys, grid_size=None, trials=100, seed=DEFAULT_SEED):
    """All duality and equivalence checks that apply to one system."""
    dsys = dual(sys)
    pi, p1 = gain_bracket(sys, INF, seed=seed), gain_bracket(sys, 1, seed=seed)
    di, d1 = gain_bracket(dsys, INF, seed=seed), gain_bracket(dsys, 1, seed=seed)
    res = pairing_identity_check(sys, trials, seed=seed, dual_sys=dsys)
    verdicts = [
        _le('pairing identity', 'relative pairing defect <= 1e-10', res, 0.0, EXACT_TOL),
        bibo_to_lilo_check(sys, primal_infty=pi, dual_one=d1),
        lilo_to_bibo_check(sys, primal_one=p1, dual_infty=di),
        bibo_to_lilo_check(dsys, primal_infty=di, dual_one=p1),
        lilo_to_bibo_check(dsys, primal_one=d1, dual_infty=pi),
    ]
    if _is_siso(sys.input_space) and _is_siso(sys.output_space):
        k1, ki = kernel_gain(sys, 1), kernel_gain(sys, INF)
        kd = kernel_gain(dsys, INF)
        verdicts.append(Verdict('SISO: BIBO <=> LILO', 'both kernel gains finite',
                                ki.upper_bound, k1.upper_bound,
                                bool(math.isfinite(ki.upper_bound) and math.isfinite(k1.upper_bound))))
        verdicts.append(Verdict('SISO: BIBO preserved under duality',
                                'kernel Linf gain of the dual == kernel L1 gain (transposed kernel)',
                                kd.upper_bound, k1.upper_bound,
                                bool(abs(kd.upper_bound - k1.upper_bound) <= BRACKET_TOL
                                     * max(1.0, k1.upper_bound))))
        for p, br in ((INF, pi), (1, p1)):
            if _matches_convention(sys.input_space, p) and _matches_convention(sys.output_space, p):
                k = ki if p == INF else k1
                verdicts.append(Verdict(f'SISO: kernel and empirical gains agree (p={p})',
                                        'empirical bracket collapses onto the kernel gain',
                                        br.lower_bound, k.upper_bound,
                                        bool(abs(br.lower_bound - k.upper_bound) <= BRACKET_TOL
                                             and abs(br.upper_bound - k.upper_bound) <= BRACKET_TOL)))
    X = sys.state_space
    if X == sys.output_space and np.array_equal(sys.H, np.eye(X.dim)) and not np.any(sys.J):
        ca = control_admissibility(sys, seed=seed)
        verdicts.append(_brackets_overlap(
            'C = I: Cinf-BIBO <=> B inf-time C-admissible',
            'control-admissibility bracket overlaps the Linf gain bracket',
            ca.constant_lower, ca.constant_upper, pi.lower_bound, pi.upper_bound))
    if X == sys.input_space and np.allclose(sys.G, sys.dt * np.eye(X.dim)) and not np.any(sys.J):
        oa = observation_admissibility(sys, seed=seed)
        verdicts.append(_brackets_overlap(
            'B = I: Cinf-LILO <=> C inf-time L1-admissible',
            'observation-admissibility bracket overlaps the L1 gain bracket',
            oa.constant_lower, oa.constant_upper, p1.lower_bound, p1.upper_bound))
        verdicts.append(_le('admissible C => L1-LILO',
                            'L1 gain lower bound <= observation constant upper bound',
                            p1.lower_bound, oa.constant_upper))
    return DualityReport(name, grid_size, res, pi, d1, p1, di, verdicts)


def sweep_figure_one(systems, trials=100, seed=DEFAULT_SEED):
    """Reports for ``systems``: a mapping name -> system, or ``(name, M, system)`` triples."""
    items = systems.items() if isinstance(systems, dict) else systems
    out = []
    for item in items:
        if len(item) == 2:
            name, sys = item
            M = round(1.0 / sys.dt)
        else:
            name, M, sys = item
        out.append(system_report(name, sys, M, trials, seed))
    return out


def refinement_cells(Ms, seed=DEFAULT_SEED):
    """The negative cell: the left shift stays LILO while its BIBO gain grows like sqrt(M).

    Returns verdicts on the left shift (L^1 bracket <= 1, L^inf lower bound
    == sqrt(M)) and on the dual of transport (growth by sqrt(2) per doubling).
    """
    verdicts = []
    prev = None
    for M in Ms:
        ls = left_shift_distributed_input(M)
        one = gain_bracket(ls, 1, seed=seed)
        inf = gain_bracket(ls, INF, seed=seed)
        verdicts.append(_le(f'leftshift M={M}: L1-LILO', 'L1 upper bound <= 1', one.upper_bound, 1.0))
        verdicts.append(Verdict(f'leftshift M={M}: not BIBO', 'Linf lower bound == sqrt(M)',
                                inf.lower_bound, math.sqrt(M),
                                bool(abs(inf.lower_bound - math.sqrt(M)) <= BRACKET_TOL * math.sqrt(M))))
        dt_inf = gain_bracket(dual(transport_boundary_control(M)), INF, seed=seed).lower_bound
        if prev is not None:
            M0, v0 = prev
            factor = math.sqrt(M / M0)
            verdicts.append(Verdict(f'dual(transport) M={M0}->{M}: growth',
                                    'Linf lower bound ratio == sqrt(M ratio) +- 1e-6',
                                    dt_inf / v0, factor, bool(abs(dt_inf / v0 - factor) <= 1e-6)))
        prev = (M, dt_inf)
    return verdicts


def _fmt_bracket(r):
    return f"[{r.lower_bound:.6g}, {r.upper_bound:.6g}]"


def figure_one_markdown(reports, extra_verdicts=()):
    """Markdown summary table of :func:`sweep_figure_one` output."""
    lines = ['| system | M | primal Linf | primal L1 | dual Linf | dual L1 | pairing defect | checks |',
             '|---|---|---|---|---|---|---|---|']
    for r in reports:
        ok = sum(v.passed for v in r.verdicts)
        lines.append(f"| {r.name} | {r.grid_size} | {_fmt_bracket(r.primal_gain_infty)} | "
                     f"{_fmt_bracket(r.primal_gain_one)} | {_fmt_bracket(r.dual_gain_infty)} | "
                     f"{_fmt_bracket(r.dual_gain_one)} | {r.pairing_residual:.2e} | "
                     f"{ok}/{len(r.verdicts)} |")
    if extra_verdicts:
        lines += ['', '| check | lhs | rhs | passed |', '|---|---|---|---|']
        for v in extra_verdicts:
            lines.append(f"| {v.name} | {v.lhs:.12g} | {v.rhs:.12g} | {'yes' if v.passed else 'NO'} |")
    return "\n".join(lines) + "\n"


def reports_to_json(reports, extra_verdicts=()):
    return json.dumps({'reports': [r.to_dict() for r in reports],
                       'refinement': [v.to_dict() for v in extra_verdicts]}, indent=2)
