"""Time-sampled vector-valued signals.

All quadrature is left-endpoint Riemann on a uniform grid, so that the
discrete identities used elsewhere (adjoint pairing, Young bounds) hold
exactly rather than up to a mixture of rules.
"""

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    'TimeGrid', 'ValueSpace', 'Signal', 'lp_norm', 'pairing', 'u_epsilon',
    'signal_to_csv', 'signal_from_csv', 'grid_multiple',
]

NORM_KINDS = ('sup', 'weighted-1', 'weighted-2')


def grid_multiple(value, step, tol=1e-9):
    """Return the integer ``k`` with ``value == k * step``, or raise."""
    ratio = value / step
    k = int(round(ratio))
    if abs(ratio - k) > tol * max(1.0, abs(ratio)):
        raise ValueError(f"{value!r} is not an integer multiple of {step!r}")
    return k


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid ``t_k = k * dt`` for ``k = 0 .. n_steps - 1``."""

    dt: float
    n_steps: int

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError(f"dt must be positive and finite, got {self.dt!r}")
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise ValueError(f"n_steps must be a positive integer, got {self.n_steps!r}")
        object.__setattr__(self, 'dt', float(self.dt))
        object.__setattr__(self, 'n_steps', int(self.n_steps))

    @property
    def times(self):
        return self.dt * np.arange(self.n_steps)

    @property
    def horizon(self):
        """Length of the covered interval, ``n_steps * dt``."""
        return self.n_steps * self.dt

    @classmethod
    def covering(cls, dt, horizon):
        """Smallest grid whose points reach ``horizon`` (inclusive)."""
        return cls(dt, int(math.floor(horizon / dt + 1e-9)) + 1)


@dataclass(frozen=True, eq=False)
class ValueSpace:
    """Finite-dimensional normed space used for U, X and Y.

    ``weights`` are quadrature weights. They enter the weighted norms and
    every pairing. The ``sup`` norm ignores them, but they still define the
    pairing, so that the dual of a weighted-1 space is a sup space with the
    same weights.
    """

    dim: int
    norm_kind: str = 'weighted-2'
    weights: np.ndarray = field(default=None)

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dim must be a positive integer, got {self.dim!r}")
        if self.norm_kind not in NORM_KINDS:
            raise ValueError(f"norm_kind must be one of {NORM_KINDS}, got {self.norm_kind!r}")
        w = np.ones(self.dim) if self.weights is None else np.array(self.weights, dtype=float).ravel()
        if w.shape != (self.dim,):
            raise ValueError(f"expected {self.dim} weights, got {w.shape[0]}")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise ValueError("weights must be finite and strictly positive")
        w.setflags(write=False)
        object.__setattr__(self, 'dim', int(self.dim))
        object.__setattr__(self, 'weights', w)

    @classmethod
    def sup(cls, dim=1):
        return cls(dim, 'sup')

    @classmethod
    def l1(cls, dim=1, weights=None):
        return cls(dim, 'weighted-1', weights)

    @classmethod
    def l2(cls, dim=1, weights=None):
        return cls(dim, 'weighted-2', weights)

    @classmethod
    def spatial_l2(cls, M):
        """L^2[0,1] sampled on ``M`` cells of width ``1/M``."""
        return cls(M, 'weighted-2', np.full(M, 1.0 / M))

    def norm(self, v):
        """Norm along the last axis of ``v``."""
        v = np.asarray(v, dtype=float)
        if self.norm_kind == 'sup':
            return np.max(np.abs(v), axis=-1)
        if self.norm_kind == 'weighted-1':
            return np.abs(v) @ self.weights
        return np.sqrt((v * v) @ self.weights)

    def inner(self, a, b):
        """Weighted inner product ``sum_i w_i a_i b_i`` along the last axis."""
        return (np.asarray(a) * np.asarray(b)) @ self.weights

    def dual(self):
        """The dual space with respect to :meth:`inner`."""
        kind = {'sup': 'weighted-1', 'weighted-1': 'sup', 'weighted-2': 'weighted-2'}[self.norm_kind]
        return ValueSpace(self.dim, kind, self.weights)

    def riesz(self, functional):
        """Unit vector maximising ``functional @ v`` over the unit ball.

        ``functional`` is a row vector acting by the plain dot product.
        Returns ``(v, value)``; the zero functional gives the zero vector.
        """
        f = np.asarray(functional, dtype=float)
        if not np.any(f):
            return np.zeros(self.dim), 0.0
        if self.norm_kind == 'sup':
            v = np.where(f >= 0, 1.0, -1.0)
        elif self.norm_kind == 'weighted-1':
            j = int(np.argmax(np.abs(f) / self.weights))
            v = np.zeros(self.dim)
            v[j] = math.copysign(1.0 / self.weights[j], f[j])
        else:
            v = f / self.weights
            v = v / np.max(np.abs(v))  # guards the squared norm against underflow
            v = v / self.norm(v)
        return v, float(f @ v)

    def functional_norm(self, functional):
        """Dual norm of the row functional ``v -> functional @ v``."""
        f = np.asarray(functional, dtype=float)
        if self.norm_kind == 'sup':
            return np.sum(np.abs(f), axis=-1)
        if self.norm_kind == 'weighted-1':
            return np.max(np.abs(f) / self.weights, axis=-1)
        return np.sqrt((f * f) @ (1.0 / self.weights))

    def scale(self):
        """Norm of the unit vector when ``dim == 1``."""
        if self.dim != 1:
            raise ValueError("scale is defined for one-dimensional spaces only")
        return float(self.norm(np.ones(1)))

    def __eq__(self, other):
        if not isinstance(other, ValueSpace):
            return NotImplemented
        return (self.dim == other.dim and self.norm_kind == other.norm_kind
                and np.array_equal(self.weights, other.weights))

    def __hash__(self):
        return hash((self.dim, self.norm_kind, self.weights.tobytes()))

    def __repr__(self):
        w = self.weights
        wtxt = f"{w[0]:g}" if np.all(w == w[0]) else "..."
        return f"ValueSpace(dim={self.dim}, {self.norm_kind}, w={wtxt})"


@dataclass(frozen=True, eq=False)
class Signal:
    """Samples ``values[k]`` of a signal at ``grid.times[k]``."""

    grid: TimeGrid
    space: ValueSpace
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim == 1 and self.space.dim == 1:
            v = v[:, None]
        if v.shape != (self.grid.n_steps, self.space.dim):
            raise ValueError(
                f"values must have shape {(self.grid.n_steps, self.space.dim)}, got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("signal values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, 'values', v)

    @classmethod
    def constant(cls, grid, space, value):
        return cls(grid, space, np.broadcast_to(np.asarray(value, float), (grid.n_steps, space.dim)))

    @classmethod
    def zeros(cls, grid, space):
        return cls(grid, space, np.zeros((grid.n_steps, space.dim)))

    def with_space(self, space):
        """Same samples measured in another space of equal dimension."""
        return Signal(self.grid, space, self.values)

    def truncated(self, n_steps):
        return Signal(TimeGrid(self.grid.dt, n_steps), self.space, self.values[:n_steps])

    def __add__(self, other):
        if not isinstance(other, Signal):
            return NotImplemented
        _check_same_grid(self, other)
        return Signal(self.grid, self.space, self.values + other.values)

    def __sub__(self, other):
        if not isinstance(other, Signal):
            return NotImplemented
        _check_same_grid(self, other)
        return Signal(self.grid, self.space, self.values - other.values)

    def __mul__(self, c):
        return Signal(self.grid, self.space, float(c) * self.values)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0


def _check_same_grid(a, b):
    if a.grid != b.grid:
        raise ValueError(f"grid mismatch: {a.grid} vs {b.grid}")
    if a.space.dim != b.space.dim:
        raise ValueError(f"dimension mismatch: {a.space.dim} vs {b.space.dim}")


def lp_norm(s, p):
    """L^p norm of a signal on ``[0, n_steps * dt)``, ``p`` in {1, 2, inf}."""
    pointwise = s.space.norm(s.values)
    if p == math.inf or p == 'inf':
        return float(np.max(pointwise))
    if p == 1:
        return float(s.grid.dt * np.sum(pointwise))
    if p == 2:
        return float(math.sqrt(s.grid.dt * np.sum(pointwise ** 2)))
    raise ValueError(f"p must be 1, 2 or inf, got {p!r}")


def pairing(a, b):
    """Time-reversed pairing ``dt * sum_k <a_k, b_{N-1-k}>_w``.

    The weights come from ``a.space``.
    """
    _check_same_grid(a, b)
    if not np.array_equal(a.space.weights, b.space.weights):
        raise ValueError("pairing requires equal quadrature weights")
    return float(a.grid.dt * np.sum(a.space.inner(a.values, b.values[::-1])))


def u_epsilon(grid, M, eps):
    """Travelling band input on the spatial grid of ``M`` cells.

    At time ``t_k <= 1`` the band of width ``eps`` centred on
    ``1 - t_k`` is switched on. Following the characteristic that leaves
    ``xi = 0`` at ``t = 1``, the band is centred on cell ``M - 1 - k``
    (half a cell below ``1 - t_k``), so ``eps * M`` whole cells are active
    away from the boundary. Cells outside ``[0, 1]`` are clipped.
    """
    if grid.dt * M != 1 and not math.isclose(grid.dt * M, 1.0, rel_tol=1e-12):
        raise ValueError(f"u_epsilon needs dt == 1/M, got dt={grid.dt!r}, M={M}")
    if not 0 < eps <= 1:
        raise ValueError(f"eps must lie in (0, 1], got {eps!r}")
    m = grid_multiple(eps, 1.0 / M)
    values = np.zeros((grid.n_steps, M))
    for k in range(min(grid.n_steps, M + 1)):
        lo = (M - 1 - k) - m // 2
        values[k, max(lo, 0):max(min(lo + m, M), 0)] = 1.0
    return Signal(grid, ValueSpace.spatial_l2(M), values)


def signal_to_csv(s, fh=None):
    """Write ``t,v0,...`` rows at full round-trip precision.

    Returns the text when ``fh`` is None.
    """
    out = io.StringIO() if fh is None else fh
    writer = csv.writer(out, lineterminator='\n')
    writer.writerow(['t'] + [f'v{i}' for i in range(s.space.dim)])
    for t, row in zip(s.grid.times, s.values):
        writer.writerow([repr(float(t))] + [repr(float(x)) for x in row])
    if fh is None:
        return out.getvalue()


def signal_from_csv(text_or_fh, space=None):
    """Inverse of :func:`signal_to_csv`; ``space`` defaults to sup."""
    fh = io.StringIO(text_or_fh) if isinstance(text_or_fh, str) else text_or_fh
    rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    if header[0] != 't' or not body:
        raise ValueError("not a signal CSV")
    data = np.array([[float(x) for x in r] for r in body])
    t = data[:, 0]
    dt = t[1] - t[0] if len(t) > 1 else 1.0
    dim = len(header) - 1
    space = ValueSpace.sup(dim) if space is None else space
    return Signal(TimeGrid(dt, len(t)), space, data[:, 1:])
