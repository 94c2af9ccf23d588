"""Exactly discretised system nodes.

A :class:`DiscreteSystemNode` is the one-step map

    x_{k+1} = F x_k + G u_k,    y_k = H x_k + J u_k,

where ``F`` is the semigroup over one time step and ``G`` already
contains the quadrature factor ``dt`` (so ``G = dt * B`` for a bounded
input operator). With ``x_0 = 0`` the output is the discrete convolution
with lags ``K_0 = J`` and ``K_n = H F^(n-1) G``.

The generator is never formed. Both shift examples use the CFL-exact
step ``dt = 1/M``, so their state solutions are pure index shifts.
"""

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .kernel import MatrixMeasure, delta, lag_matrices
from .signals import Signal, TimeGrid, ValueSpace

__all__ = [
    'DiscreteSystemNode', 'SimulationResult', 'simulate', 'propagate', 'lags',
    'impulse_response', 'from_kernel', 'dual', 'transfer', 'rescale_state',
    'transport_boundary_control', 'left_shift_distributed_input',
    'scalar_exponential', 'diagonal_exponential', 'delay_line',
    'decay_steps', 'growth_bound', 'sysnode_to_text', 'sysnode_from_text',
]


def _as_matrix(a, shape, name):
    a = np.array(a, dtype=float)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.shape != shape:
        raise ValueError(f"{name} must have shape {shape}, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} must be finite")
    a.setflags(write=False)
    return a


def _fast(a):
    # shift-type operators are mostly zeros; sparse products keep big M cheap
    if a.size >= 1024 and np.count_nonzero(a) < 0.1 * a.size:
        return sp.csr_matrix(a)
    return a


@dataclass(frozen=True, eq=False)
class DiscreteSystemNode:
    F: np.ndarray
    G: np.ndarray
    H: np.ndarray
    J: np.ndarray
    dt: float
    state_space: ValueSpace
    input_space: ValueSpace
    output_space: ValueSpace

    def __post_init__(self):
        n, m, p = self.state_space.dim, self.input_space.dim, self.output_space.dim
        object.__setattr__(self, 'F', _as_matrix(self.F, (n, n), 'F'))
        object.__setattr__(self, 'G', _as_matrix(self.G, (n, m), 'G'))
        object.__setattr__(self, 'H', _as_matrix(self.H, (p, n), 'H'))
        object.__setattr__(self, 'J', _as_matrix(self.J, (p, m), 'J'))
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError("dt must be positive")
        object.__setattr__(self, 'dt', float(self.dt))

    @property
    def shape(self):
        """``(state, input, output)`` dimensions."""
        return self.state_space.dim, self.input_space.dim, self.output_space.dim

    @cached_property
    def _ops(self):
        return tuple(_fast(a) for a in (self.F, self.G, self.H, self.J))

    def equals(self, other, atol=0.0):
        """Entrywise comparison of matrices, step and spaces."""
        same = (self.dt == other.dt and self.state_space == other.state_space
                and self.input_space == other.input_space
                and self.output_space == other.output_space)
        return same and all(
            a.shape == b.shape and np.allclose(a, b, rtol=0, atol=atol)
            for a, b in zip((self.F, self.G, self.H, self.J),
                            (other.F, other.G, other.H, other.J)))


@dataclass(frozen=True)
class SimulationResult:
    states: Signal
    output: Signal


def propagate(sys, inputs, x0=None, store_states=True):
    """Run the recursion on a batch.

    ``inputs`` has shape ``(batch, n_steps, m)``; returns ``(states,
    outputs)`` with shapes ``(batch, n_steps, n)`` and ``(batch, n_steps,
    p)`` (states is None unless requested).
    """
    U = np.asarray(inputs, dtype=float)
    if U.ndim != 3 or U.shape[2] != sys.input_space.dim:
        raise ValueError(f"inputs must have shape (batch, n_steps, {sys.input_space.dim})")
    B, N, _ = U.shape
    n = sys.state_space.dim
    F, G, H, J = sys._ops
    x = np.zeros((n, B)) if x0 is None else np.array(np.broadcast_to(np.asarray(x0, float).T, (n, B)))
    Y = np.empty((B, N, sys.output_space.dim))
    X = np.empty((B, N, n)) if store_states else None
    for k in range(N):
        uk = U[:, k, :].T
        if store_states:
            X[:, k, :] = x.T
        Y[:, k, :] = (H @ x + J @ uk).T
        x = F @ x + G @ uk
    return X, Y


def simulate(sys, u, x0=None):
    """Simulate from state ``x0`` (default zero) on the grid of ``u``."""
    if u.space.dim != sys.input_space.dim:
        raise ValueError(f"input dimension {u.space.dim} != {sys.input_space.dim}")
    if u.grid.dt != sys.dt and not math.isclose(u.grid.dt, sys.dt, rel_tol=1e-12):
        raise ValueError(f"time step mismatch: signal {u.grid.dt!r}, system {sys.dt!r}")
    if x0 is not None:
        x0 = np.asarray(x0, float).reshape(1, -1)
        if x0.shape[1] != sys.state_space.dim or not np.all(np.isfinite(x0)):
            raise ValueError("x0 must be a finite state vector")
    X, Y = propagate(sys, u.values[None], x0)
    return SimulationResult(Signal(u.grid, sys.state_space, X[0]),
                            Signal(u.grid, sys.output_space, Y[0]))


def lags(sys, n_lags):
    """Kernel lags ``K_0 = J`` and ``K_n = H F^(n-1) G`` for ``n < n_lags``."""
    F, G, H, _ = sys._ops
    K = np.zeros((n_lags,) + sys.J.shape)
    K[0] = sys.J
    Z = sys.G.copy()
    for n in range(1, n_lags):
        K[n] = H @ Z
        Z = F @ Z
        if not np.any(Z):
            break
    return K


def impulse_response(sys, horizon):
    """Kernel of ``sys`` sampled on ``horizon`` grid points.

    The feedthrough is a separate atom at ``t = 0``; the density is zero on
    the first cell and ``K_n / dt`` afterwards, so that convolution with
    the result reproduces :func:`simulate` from rest.
    """
    K = lags(sys, int(horizon))
    dens = K / sys.dt
    dens[0] = 0.0
    return MatrixMeasure(K.shape[1], K.shape[2], [0.0], sys.J[None],
                         TimeGrid(sys.dt, len(K)), dens)


def from_kernel(h, dt=None, input_space=None, output_space=None):
    """Shift-register realization of ``u -> h * u``.

    The state buffers the last ``L`` input samples, ``H`` reads them
    against the lags ``K_1 .. K_L`` (delayed atoms included) and ``J`` is
    the lag-0 mass.
    """
    dt = h.dt if dt is None else dt
    K = lag_matrices(h, dt)
    nz = np.flatnonzero(np.any(K[1:], axis=(1, 2)))
    L = int(nz[-1]) + 1 if len(nz) else 1
    n, m = h.rows, h.cols
    F = np.zeros((L * m, L * m))
    F[m:, :-m] = np.eye((L - 1) * m)
    G = np.zeros((L * m, m))
    G[:m] = np.eye(m)
    H = np.concatenate([K[1 + i] if 1 + i < len(K) else np.zeros((n, m)) for i in range(L)], axis=1)
    return DiscreteSystemNode(F, G, H, K[0], dt, ValueSpace.l2(L * m),
                              input_space or ValueSpace.sup(m),
                              output_space or ValueSpace.sup(n))


def dual(sys):
    """Dual node ``(F#, H#, G#, J#)`` with weighted adjoints.

    ``M# = W_in^-1 M^T W_out``; the input and output spaces are swapped
    and replaced by their duals.
    """
    wx = sys.state_space.weights
    wu = sys.input_space.weights
    wy = sys.output_space.weights
    F = (sys.F.T * wx) / wx[:, None]
    G = (sys.H.T * wy) / wx[:, None]
    H = (sys.G.T * wx) / wu[:, None]
    J = (sys.J.T * wy) / wu[:, None]
    return DiscreteSystemNode(F, G, H, J, sys.dt, sys.state_space.dual(),
                              sys.output_space.dual(), sys.input_space.dual())


def rescale_state(sys, c):
    """Similarity ``x -> x / c``: ``(F, G / c, H c, J)``; same input-output map."""
    return DiscreteSystemNode(sys.F, sys.G / c, sys.H * c, sys.J, sys.dt,
                              sys.state_space, sys.input_space, sys.output_space)


def transfer(sys, s):
    """``J + H (z I - F)^-1 G`` at ``z = exp(s dt)``.

    With this identification the transfer function of a finite-length
    kernel realization is exactly the Laplace transform of its kernel.
    """
    z = np.exp(complex(s) * sys.dt)
    n = sys.state_space.dim
    F = sys._ops[0]
    if sp.issparse(F):
        A = (z * sp.identity(n, format='csc') - F).tocsc()
        X = spla.spsolve(A, sys.G.astype(complex))
        X = X.reshape(n, -1)
    else:
        X = np.linalg.solve(z * np.eye(n) - sys.F, sys.G.astype(complex))
    return sys.J + sys.H @ X


def growth_bound(sys):
    """``log(spectral radius of F) / dt``; ``-inf`` for nilpotent ``F``."""
    rho = max(abs(np.linalg.eigvals(sys.F)))
    return -math.inf if rho == 0 else math.log(rho) / sys.dt


def decay_steps(sys, tol=1e-12, max_steps=200_000):
    """Smallest ``k`` with ``||F^k||_F <= tol``, and whether ``F^k == 0``.

    Raises if the powers have not decayed within ``max_steps``.
    """
    F = sys._ops[0]
    P = sp.identity(sys.state_space.dim, format='csr') if sp.issparse(F) else np.eye(sys.state_space.dim)
    for k in range(max_steps + 1):
        nrm = math.sqrt(float(np.sum(P.data ** 2))) if sp.issparse(P) else np.linalg.norm(P)
        if nrm == 0.0:
            return k, True
        if nrm <= tol:
            return k, False
        P = F @ P
        if sp.issparse(P):
            P.eliminate_zeros()
    raise ValueError(f"||F^k|| has not dropped below {tol} within {max_steps} steps; "
                     "pass an explicit horizon")


def transport_boundary_control(M):
    """Right-moving transport on ``[0, 1]``, boundary input at 0, state output.

    ``dt = 1/M``. Cell ``i`` receives ``u`` after ``i + 1`` steps:
    ``x_k[i] = u_{k-1-i}``; the state is flushed after ``M`` steps.
    """
    if M < 1:
        raise ValueError("M must be positive")
    F = np.eye(M, k=-1)
    G = np.zeros((M, 1))
    G[0, 0] = 1.0
    X = ValueSpace.spatial_l2(M)
    return DiscreteSystemNode(F, G, np.eye(M), np.zeros((M, 1)), 1.0 / M,
                              X, ValueSpace.sup(1), X)


def left_shift_distributed_input(M):
    """Left shift on ``[0, 1]`` with distributed input and observation at 0.

    ``y_k = dt * sum_{j<k} u_j[k-1-j]``, the grid form of
    ``y(t) = int_0^1 u(r, t - r) dr``.
    """
    if M < 1:
        raise ValueError("M must be positive")
    dt = 1.0 / M
    H = np.zeros((1, M))
    H[0, 0] = 1.0
    X = ValueSpace.spatial_l2(M)
    return DiscreteSystemNode(np.eye(M, k=1), dt * np.eye(M), H, np.zeros((1, M)), dt,
                              X, X, ValueSpace.sup(1))


def scalar_exponential(rate=1.0, dt=1e-3, gain=1.0):
    """``x' = -rate x + u``, ``y = gain x`` with the exact exponential step."""
    return diagonal_exponential([rate], [gain], dt)


def diagonal_exponential(rates, gains=None, dt=1e-3):
    """Decoupled first-order lags with impulse response ``diag(g_i exp(-r_i t))``.

    The state step is exact; the input enters by left-endpoint quadrature
    (``G = dt I``), matching the convention used for kernels.
    """
    rates = np.atleast_1d(np.asarray(rates, float))
    gains = np.ones_like(rates) if gains is None else np.atleast_1d(np.asarray(gains, float))
    d = len(rates)
    return DiscreteSystemNode(np.diag(np.exp(-rates * dt)), dt * np.eye(d), np.diag(gains),
                              np.zeros((d, d)), dt, ValueSpace.l2(d), ValueSpace.sup(d),
                              ValueSpace.sup(d))


def delay_line(delay=1.0, dt=1e-2):
    """Pure delay ``y(t) = u(t - delay)`` (``delay`` a multiple of ``dt``)."""
    return from_kernel(delta(delay), dt)


def _block(name, a):
    a = np.atleast_2d(a)
    rows = [f"{name} {a.shape[0]} {a.shape[1]}"]
    rows += [" ".join(repr(float(x)) for x in r) for r in a]
    return rows


def sysnode_to_text(sys):
    """Line-oriented text form, full precision."""
    lines = [f"sysnode {sys.dt!r} {sys.state_space.norm_kind} "
             f"{sys.input_space.norm_kind} {sys.output_space.norm_kind}"]
    for name in ('F', 'G', 'H', 'J'):
        lines += _block(name, getattr(sys, name))
    for name, space in (('w_state', sys.state_space), ('w_in', sys.input_space),
                        ('w_out', sys.output_space)):
        lines += _block(name, space.weights[None])
    return "\n".join(lines) + "\n"


def sysnode_from_text(text):
    lines = [ln.split() for ln in text.splitlines() if ln.strip()]
    head = lines[0]
    if head[0] != 'sysnode' or len(head) != 5:
        raise ValueError("expected header 'sysnode dt kind_state kind_in kind_out'")
    dt, kinds = float(head[1]), head[2:]
    blocks, i = {}, 1
    while i < len(lines):
        name, r, c = lines[i][0], int(lines[i][1]), int(lines[i][2])
        data = np.array([[float(x) for x in ln] for ln in lines[i + 1:i + 1 + r]])
        blocks[name] = data.reshape(r, c)
        i += 1 + r
    spaces = [ValueSpace(blocks[w].shape[1], kind, blocks[w][0])
              for w, kind in zip(('w_state', 'w_in', 'w_out'), kinds)]
    return DiscreteSystemNode(blocks['F'], blocks['G'], blocks['H'], blocks['J'], dt, *spaces)
