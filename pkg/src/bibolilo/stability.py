"""BIBO (L^inf) and LILO (L^1) gain brackets for discrete system nodes.

Every estimate is a bracket ``[lower_bound, upper_bound]``. Lower bounds
are certified by a witness input that reproduces the ratio when
re-simulated; upper bounds come from :mod:`bibolilo.opnorm`.
"""

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import opnorm
from .kernel import induced_gain
from .signals import Signal, TimeGrid, ValueSpace, grid_multiple, lp_norm, u_epsilon
from .sysnode import (DiscreteSystemNode, decay_steps, impulse_response, lags, propagate,
                      simulate)

__all__ = [
    'DEFAULT_SEED', 'STRATEGIES', 'GainReport', 'AdmissibilityReport', 'SweepRow',
    'default_horizon_steps', 'witness_ratio', 'kernel_gain', 'empirical_gain',
    'gain_bracket', 'counterexample_sweep', 'sweep_to_csv', 'refinement_sweep',
    'observation_admissibility', 'control_admissibility',
]

DEFAULT_SEED = 20240811
STRATEGIES = ('paper-family', 'greedy-alignment', 'random-probe')
INF = math.inf


def _p(p):
    if p in (1, '1'):
        return 1
    if p in (INF, 'inf', '∞'):
        return INF
    raise ValueError(f"p must be 1 or inf, got {p!r}")


@dataclass
class GainReport:
    p: float
    lower_bound: float
    upper_bound: float
    witness: Signal
    horizon: float
    notes: list = field(default_factory=list)
    exact: bool = False
    unbounded_evidence: bool = False
    witness_file: str = None

    def __post_init__(self):
        if self.lower_bound > self.upper_bound * (1 + 1e-9) + 1e-12:
            raise ValueError(f"lower bound {self.lower_bound} exceeds upper bound {self.upper_bound}")

    def to_dict(self):
        return {
            'p': 'inf' if self.p == INF else 1,
            'lower_bound': self.lower_bound,
            'upper_bound': 'unbounded-evidence' if self.unbounded_evidence else self.upper_bound,
            'horizon': self.horizon,
            'witness_file': self.witness_file,
            'notes': list(self.notes),
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)


@dataclass
class AdmissibilityReport:
    constant_lower: float
    constant_upper: float
    probe_count: int
    horizon: float
    maxreg_lower: float = None
    maxreg_upper: float = None
    notes: list = field(default_factory=list)

    def __post_init__(self):
        if self.constant_lower > self.constant_upper * (1 + 1e-9) + 1e-12:
            raise ValueError("admissibility bracket is inverted")

    def to_dict(self):
        return dict(constant_lower=self.constant_lower, constant_upper=self.constant_upper,
                    probe_count=self.probe_count, horizon=self.horizon,
                    maxreg_lower=self.maxreg_lower, maxreg_upper=self.maxreg_upper,
                    notes=list(self.notes))


def default_horizon_steps(sys, tol=1e-12):
    """Three transit times for nilpotent ``F``, else steps until ``||F^k|| < tol``."""
    k, nilpotent = decay_steps(sys, tol)
    return 3 * max(k, 1) + 1 if nilpotent else k + 1


def _steps(sys, horizon):
    if horizon is None:
        return default_horizon_steps(sys)
    return int(math.floor(horizon / sys.dt + 1e-9)) + 1


def _ratios(sys, U, p, in_space=None, out_space=None):
    """Batch gains ``||y||_p / ||u||_p`` for inputs ``U`` of shape (B, N, m)."""
    in_space = in_space or sys.input_space
    out_space = out_space or sys.output_space
    _, Y = propagate(sys, U, store_states=False)
    nu, ny = in_space.norm(U), out_space.norm(Y)
    if p == INF:
        num, den = ny.max(axis=1), nu.max(axis=1)
    else:
        num, den = ny.sum(axis=1) * sys.dt, nu.sum(axis=1) * sys.dt
    with np.errstate(invalid='ignore', divide='ignore'):
        return np.where(den > 0, num / den, 0.0)


def witness_ratio(sys, witness, p, out_space=None):
    """Re-simulate ``witness`` and return ``||y||_p / ||u||_p``.

    ``witness.space`` supplies the input norm; ``out_space`` defaults to
    the system's output space.
    """
    p = _p(p)
    y = simulate(sys, witness).output
    if out_space is not None:
        y = y.with_space(out_space)
    den = lp_norm(witness, p)
    return lp_norm(y, p) / den if den > 0 else 0.0


def _is_function_space(space):
    return space.dim > 1 and space.norm_kind == 'weighted-2'


def kernel_gain(sys, p, horizon=None):
    """Exact gain of a system with finite-dimensional input and output.

    The value norms follow the convention of :func:`induced_gain`: sup
    for ``p = inf``, the unweighted 1-norm for ``p = 1``.
    """
    p = _p(p)
    if _is_function_space(sys.input_space) or _is_function_space(sys.output_space):
        raise ValueError("kernel_gain needs finite-dimensional (SISO-type) input and output "
                         "spaces; use empirical_gain for discretised function spaces")
    N = _steps(sys, horizon)
    h = impulse_response(sys, N)
    g = induced_gain(h, p).value
    K = lags(sys, N)
    grid = TimeGrid(sys.dt, N)
    n_out, n_in = K.shape[1:]
    u = np.zeros((N, n_in))
    tv = np.abs(K).sum(axis=0)
    if p == INF:
        i = int(np.argmax(tv.sum(axis=1)))
        nz = np.flatnonzero(np.any(K[:, i, :], axis=1))
        t_star = int(nz[-1]) if len(nz) else 0
        # u(s) = sign(h(t* - s)), sign(0) = +1
        u[:] = 1.0
        u[:t_star + 1] = np.where(K[t_star::-1, i, :] >= 0, 1.0, -1.0)
        in_space, out_space = ValueSpace.sup(n_in), ValueSpace.sup(n_out)
        note = f"sign-aligned input on output {i}, worst time t*={t_star * sys.dt!r}"
    else:
        j = int(np.argmax(tv.sum(axis=0)))
        u[0, j] = 1.0 / sys.dt
        in_space, out_space = ValueSpace.l1(n_in), ValueSpace.l1(n_out)
        note = f"unit impulse into input {j}"
    witness = Signal(grid, in_space, u)
    lower = witness_ratio(sys, witness, p, out_space)
    notes = [note, f"kernel truncated at horizon {N * sys.dt!r}",
             "value norms: " + ('sup' if p == INF else 'unweighted 1-norm')]
    return GainReport(p, min(lower, g), g, witness, N * sys.dt, notes, exact=True)


def _align(space, rows):
    """Row-wise :meth:`ValueSpace.riesz` for a stack of functionals."""
    rows = np.asarray(rows, float)
    out = np.zeros_like(rows)
    live = np.any(rows != 0, axis=1)
    if space.norm_kind == 'sup':
        out[live] = np.where(rows[live] >= 0, 1.0, -1.0)
    elif space.norm_kind == 'weighted-1':
        j = np.argmax(np.abs(rows) / space.weights, axis=1)
        idx = np.flatnonzero(live)
        out[idx, j[idx]] = np.sign(rows[idx, j[idx]]) / space.weights[j[idx]]
    else:
        v = rows[live] / space.weights
        out[live] = v / space.norm(v)[:, None]
    return out


def _norming_functional(space, y):
    """Row vector ``phi`` with ``phi @ y == ||y||`` and unit dual norm."""
    if not np.any(y):
        return np.zeros_like(y)
    if space.norm_kind == 'sup':
        i = int(np.argmax(np.abs(y)))
        phi = np.zeros_like(y)
        phi[i] = math.copysign(1.0, y[i])
        return phi
    if space.norm_kind == 'weighted-1':
        return space.weights * np.where(y >= 0, 1.0, -1.0)
    return space.weights * y / space.norm(y)


def _initial_functionals(space, rng, n_random=3):
    d = space.dim
    out = [np.eye(d)[i] for i in range(min(d, 32))]
    out.append(space.weights.copy())
    out += list(rng.standard_normal((n_random, d)))
    return out


def _greedy_inf(sys, K, N, rng, iters=8):
    """Inputs maximising a final-time output functional, step by step."""
    U, Y = sys.input_space, sys.output_space
    T = N - 1
    Kr = K[T::-1]  # Kr[j] acts on u_j at the final time
    cands = []
    for phi in _initial_functionals(Y, rng):
        for _ in range(iters):
            u = _align(U, phi @ Kr)
            cands.append(u)
            y = np.einsum('jpm,jm->p', Kr, u)
            new = _norming_functional(Y, y)
            if np.array_equal(new, phi):
                break
            phi = new
    return np.array(cands)


def _greedy_one(sys, K, N, rng, iters=8):
    """Impulses ``x delta_0`` with ``x`` refined by alternating alignment."""
    U, Y = sys.input_space, sys.output_space
    cands = []
    for x in _initial_functionals(U, rng):
        x = _align(U, (x * U.weights)[None])[0]
        for _ in range(iters):
            u = np.zeros((N, U.dim))
            u[0] = x / sys.dt
            cands.append(u)
            y = K @ x
            grad = sum(_norming_functional(Y, yn) @ Kn for yn, Kn in zip(y, K) if np.any(yn))
            if not np.any(grad):
                break
            new = _align(U, np.atleast_2d(grad))[0]
            if np.array_equal(new, x):
                break
            x = new
    return np.array(cands)


def _random_inputs(sys, N, p, rng, n):
    # drawn probe by probe so that a larger n extends the smaller probe set
    U = sys.input_space
    out = np.empty((n, N, U.dim))
    for b in range(n):
        Z = rng.standard_normal((N, U.dim))
        if p == INF:
            out[b] = Z / U.norm(Z)[:, None]
        else:
            # L^1 probes: a few random bursts
            mask = rng.random((N, 1)) < 4.0 / N
            mask[0] = True
            out[b] = Z * mask
    return out


def _paper_family(sys, N, eps_list):
    M = sys.input_space.dim
    if M < 2 or not math.isclose(sys.dt * M, 1.0, rel_tol=1e-12):
        raise ValueError("the paper-family strategy needs a spatial input grid with dt == 1/M")
    grid = TimeGrid(sys.dt, N)
    if eps_list is None:
        eps_list = [2.0 ** -k for k in range(int(math.log2(M)) + 1)]
    return np.array([u_epsilon(grid, M, e).values for e in eps_list]), list(eps_list)


def _upper(sys, K, p):
    fn = opnorm.linf_gain_upper if p == INF else opnorm.l1_gain_upper
    return fn(K, sys.input_space, sys.output_space)


def empirical_gain(sys, p, horizon=None, strategy='greedy-alignment', eps_list=None,
                   n_probes=64, seed=DEFAULT_SEED):
    """Bracket the L^p gain of ``sys`` with its own value norms.

    The lower bound is the best ratio found by ``strategy``; the upper
    bound is the smallest certified bound from :mod:`bibolilo.opnorm`
    (never larger than the sum of per-lag operator norms).
    """
    p = _p(p)
    if strategy not in STRATEGIES:
        raise ValueError(f"strategy must be one of {STRATEGIES}")
    N = _steps(sys, horizon)
    if strategy == 'paper-family' and horizon is None:
        N = max(N, int(round(1 / sys.dt)) + 1)
    K = lags(sys, N)
    upper, exact, method = _upper(sys, K, p)
    rng = np.random.default_rng(seed)
    notes = [f"upper bound: {method}"]
    if strategy == 'paper-family':
        cands, eps_list = _paper_family(sys, N, eps_list)
        notes.append(f"band inputs u_eps for eps in {eps_list}")
    elif strategy == 'greedy-alignment':
        cands = _greedy_inf(sys, K, N, rng) if p == INF else _greedy_one(sys, K, N, rng)
        notes.append(f"{len(cands)} greedy-aligned candidates")
    else:
        cands = _random_inputs(sys, N, p, rng, n_probes)
        notes.append(f"{n_probes} random probes, seed {seed}")
    r = _ratios(sys, cands, p)
    best = int(np.argmax(r))
    witness = Signal(TimeGrid(sys.dt, N), sys.input_space, cands[best])
    lower = witness_ratio(sys, witness, p)
    notes.append(f"horizon truncated at {N * sys.dt!r}")
    return GainReport(p, lower, max(upper, lower), witness, N * sys.dt, notes,
                      exact=exact and math.isclose(lower, upper, rel_tol=1e-9))


def gain_bracket(sys, p, horizon=None, strategies=('greedy-alignment', 'random-probe'),
                 seed=DEFAULT_SEED):
    """Best lower bound over several strategies, tightest upper bound."""
    reports = [empirical_gain(sys, p, horizon, s, seed=seed) for s in strategies]
    best = max(reports, key=lambda r: r.lower_bound)
    upper = min(r.upper_bound for r in reports)
    notes = best.notes + [f"strategies tried: {', '.join(strategies)}"]
    return GainReport(best.p, best.lower_bound, max(upper, best.lower_bound), best.witness,
                      best.horizon, notes, exact=best.exact)


@dataclass(frozen=True)
class SweepRow:
    eps: float
    input_norm: float
    output_norm: float
    ratio: float
    predicted: float


def counterexample_sweep(M, eps_list):
    """Drive the left-shift system with band inputs and tabulate the L^inf gains."""
    from .sysnode import left_shift_distributed_input
    sys = left_shift_distributed_input(M)
    grid = TimeGrid(sys.dt, M + 1)
    rows = []
    for eps in eps_list:
        if not 0 < eps <= 1:
            raise ValueError(f"eps must lie in (0, 1], got {eps!r}")
        grid_multiple(eps, 1.0 / M)
        u = u_epsilon(grid, M, eps)
        y = simulate(sys, u).output
        nu, ny = lp_norm(u, INF), lp_norm(y, INF)
        rows.append(SweepRow(eps, nu, ny, ny / nu, 1.0 / math.sqrt(eps)))
    return rows


def sweep_to_csv(rows):
    out = io.StringIO()
    w = csv.writer(out, lineterminator='\n')
    w.writerow(['eps', 'input_norm', 'output_norm', 'ratio', 'predicted'])
    for r in rows:
        w.writerow([repr(float(x)) for x in (r.eps, r.input_norm, r.output_norm, r.ratio, r.predicted)])
    return out.getvalue()


def refinement_sweep(builder, Ms, p, strategy='greedy-alignment', growth=1.1):
    """Gain brackets of ``builder(M)`` under grid refinement.

    If the lower bound grows by at least ``growth`` at every refinement,
    all reports are flagged ``unbounded_evidence``.
    """
    reports = [empirical_gain(builder(M), p, strategy=strategy) for M in Ms]
    lows = [r.lower_bound for r in reports]
    diverging = len(lows) > 1 and all(b >= growth * a for a, b in zip(lows, lows[1:]))
    for M, r in zip(Ms, reports):
        r.unbounded_evidence = diverging
        r.notes.append(f"grid size M={M}")
    return reports


def _unit_probes(space, rng, n_random):
    P = [np.eye(space.dim)[i] for i in range(space.dim)]
    P.append(np.ones(space.dim))
    P += list(rng.standard_normal((n_random, space.dim)))
    P = np.array(P)
    return P / space.norm(P)[:, None]


def observation_admissibility(sys, p=1, horizon=None, n_random=32, seed=DEFAULT_SEED):
    """Bracket the infinite-time L^1 observation constant of ``H``.

    Also brackets the maximal-regularity constant, i.e. the L^1 gain of
    ``u -> H * (state convolution of u)``, so both sides can be compared.
    """
    if _p(p) != 1:
        raise ValueError("only L^1 observation admissibility is implemented")
    X, Y = sys.state_space, sys.output_space
    N = _steps(sys, horizon)
    rng = np.random.default_rng(seed)
    aux = DiscreteSystemNode(sys.F, sys.dt * np.eye(X.dim), sys.H, np.zeros((Y.dim, X.dim)),
                             sys.dt, X, X, Y)
    K = lags(aux, N + 1)  # K[n] = dt H F^(n-1)
    O = K[1:]

    def obs(x):
        return float(np.sum(Y.norm(O @ x))) / float(X.norm(x))

    probes = list(_unit_probes(X, rng, n_random))
    # alternating refinement from each probe
    for x in list(probes):
        for _ in range(6):
            y = O @ x
            grad = sum(_norming_functional(Y, yk) @ Ok for yk, Ok in zip(y, O) if np.any(yk))
            if not np.any(grad):
                break
            x = _align(X, np.atleast_2d(grad))[0]
            probes.append(x)
    lower = max(obs(x) for x in probes)
    upper, _, method = opnorm.l1_gain_upper(O, X, Y)
    # maximal-regularity side: impulses plus random L^1 inputs
    U = np.zeros((len(probes), N + 1, X.dim))
    U[:, 0] = np.array(probes) / sys.dt
    U = np.concatenate([U, _random_inputs(aux, N + 1, 1, rng, n_random)])
    mr_lower = float(_ratios(aux, U, 1).max())
    mr_upper, _, _ = opnorm.l1_gain_upper(K, X, Y)
    notes = [f"upper bound: {method}", f"horizon {N * sys.dt!r}",
             "0 in rho(A) is not imposed on the discrete tester"]
    return AdmissibilityReport(lower, max(upper, lower), len(probes), N * sys.dt,
                               mr_lower, max(mr_upper, mr_lower), notes)


def control_admissibility(sys, flavor='C', horizon=None, n_random=32, seed=DEFAULT_SEED):
    """Bracket the infinite-time control-admissibility constant of ``G``.

    This is the L^inf gain of the state-output node ``(F, G, I, 0)``.
    Piecewise-constant probes cannot tell continuous from essentially
    bounded inputs, so both flavours give the same numbers.
    """
    if flavor not in ('C', 'L∞', 'Linf', 'inf'):
        raise ValueError("flavor must be 'C' or 'Linf'")
    X, U = sys.state_space, sys.input_space
    aux = DiscreteSystemNode(sys.F, sys.G, np.eye(X.dim), np.zeros((X.dim, U.dim)), sys.dt,
                             X, U, X)
    N = _steps(sys, horizon)
    rng = np.random.default_rng(seed)
    cands = np.concatenate([_random_inputs(aux, N, INF, rng, n_random),
                            _greedy_inf(aux, lags(aux, N), N, rng)])
    lower = float(_ratios(aux, cands, INF).max())
    sum_bound = sum(opnorm.op_norm_upper(k, U, X) for k in lags(aux, N))
    upper, _, method = opnorm.linf_gain_upper(lags(aux, N), U, X)
    notes = [f"upper bound: {method} (sum of ||F^k G|| = {sum_bound!r})",
             "discrete probes do not distinguish C from L^inf inputs",
             f"{n_random} random probes plus greedy-aligned probes"]
    return AdmissibilityReport(lower, max(min(upper, sum_bound), lower), len(cands), N * sys.dt,
                               notes=notes)
