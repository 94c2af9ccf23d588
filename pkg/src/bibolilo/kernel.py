"""Matrix-valued measures of bounded total variation on ``[0, inf)``.

A :class:`MatrixMeasure` is a finite list of atoms plus a piecewise
constant density on a uniform grid. On this class the total variation,
the convolution with a sampled signal and the Laplace transform are all
exact up to left-endpoint quadrature.
"""

import io
import math
from dataclasses import dataclass

import numpy as np

from .signals import Signal, TimeGrid, ValueSpace, grid_multiple

__all__ = [
    'MatrixMeasure', 'GainValue', 'entry_tv', 'induced_gain', 'transpose',
    'convolve', 'laplace', 'lag_matrices', 'on_grid', 'delta', 'exponential',
    'kernel_to_text', 'kernel_from_text', 'laplace_to_csv', 'KERNELS',
]


@dataclass(frozen=True, eq=False)
class MatrixMeasure:
    """``sum_j atoms[j] delta_{atom_times[j]} + density(t) dt``.

    ``density`` has shape ``(n_steps, rows, cols)`` and is constant on
    ``[k dt, (k+1) dt)``. ``density_grid`` is None for purely atomic
    measures.
    """

    rows: int
    cols: int
    atom_times: np.ndarray
    atoms: np.ndarray
    density_grid: TimeGrid = None
    density: np.ndarray = None

    def __post_init__(self):
        n, m = int(self.rows), int(self.cols)
        if n < 1 or m < 1:
            raise ValueError("measure must have at least one row and column")
        times = np.array(self.atom_times, dtype=float).reshape(-1)
        atoms = np.array(self.atoms, dtype=float).reshape(len(times), n, m)
        if np.any(times < 0) or np.any(np.diff(times) <= 0):
            raise ValueError("atom times must be nonnegative and strictly increasing")
        if not (np.all(np.isfinite(times)) and np.all(np.isfinite(atoms))):
            raise ValueError("atoms must be finite")
        dens = None
        if self.density_grid is not None:
            dens = np.array(self.density, dtype=float).reshape(self.density_grid.n_steps, n, m)
            if not np.all(np.isfinite(dens)):
                raise ValueError("density must be finite")
            dens.setflags(write=False)
        elif self.density is not None:
            raise ValueError("density given without a grid")
        for arr in (times, atoms):
            arr.setflags(write=False)
        object.__setattr__(self, 'rows', n)
        object.__setattr__(self, 'cols', m)
        object.__setattr__(self, 'atom_times', times)
        object.__setattr__(self, 'atoms', atoms)
        object.__setattr__(self, 'density', dens)

    @classmethod
    def from_parts(cls, atoms=(), density_grid=None, density=None, shape=None):
        """Build from ``[(t, matrix), ...]`` and an optional sampled density."""
        atoms = sorted(((float(t), np.atleast_2d(np.asarray(a, float))) for t, a in atoms),
                       key=lambda ta: ta[0])
        if shape is None:
            if atoms:
                shape = atoms[0][1].shape
            else:
                d = np.asarray(density, float)
                shape = (1, 1) if d.ndim == 1 else d.shape[1:]
        n, m = shape
        times = np.array([t for t, _ in atoms])
        mats = np.array([a for _, a in atoms]).reshape(len(atoms), n, m)
        if density is not None:
            density = np.asarray(density, float).reshape(-1, n, m)
        return cls(n, m, times, mats, density_grid, density)

    @property
    def dt(self):
        return None if self.density_grid is None else self.density_grid.dt

    @property
    def horizon(self):
        """Support truncation time: the later of the last atom and the density end."""
        h = self.atom_times[-1] if len(self.atom_times) else 0.0
        if self.density_grid is not None:
            h = max(h, self.density_grid.horizon)
        return float(h)

    def __add__(self, other):
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("shape mismatch")
        dt = self.dt or other.dt
        if self.dt and other.dt and self.dt != other.dt:
            raise ValueError("density grids differ")
        # atoms on a common support
        ts = np.union1d(self.atom_times, other.atom_times)
        mats = np.zeros((len(ts), self.rows, self.cols))
        for src in (self, other):
            for t, a in zip(src.atom_times, src.atoms):
                mats[np.searchsorted(ts, t)] += a
        grid = dens = None
        if dt is not None:
            n = max(s.density_grid.n_steps for s in (self, other) if s.density_grid is not None)
            grid = TimeGrid(dt, n)
            dens = np.zeros((n, self.rows, self.cols))
            for src in (self, other):
                if src.density is not None:
                    dens[:len(src.density)] += src.density
        return MatrixMeasure(self.rows, self.cols, ts, mats, grid, dens)

    def __mul__(self, c):
        c = float(c)
        return MatrixMeasure(self.rows, self.cols, self.atom_times, c * self.atoms,
                             self.density_grid, None if self.density is None else c * self.density)

    __rmul__ = __mul__


@dataclass(frozen=True)
class GainValue:
    p: float
    value: float

    def __post_init__(self):
        if self.p not in (1, math.inf):
            raise ValueError(f"p must be 1 or inf, got {self.p!r}")
        if not self.value >= 0:
            raise ValueError("gain must be nonnegative")


def delta(t=0.0, matrix=1.0, dt=None):
    """Single atom ``matrix * delta_t``; ``dt`` attaches an empty density grid."""
    a = np.atleast_2d(np.asarray(matrix, float))
    grid = dens = None
    if dt is not None:
        grid = TimeGrid(dt, 1)
        dens = np.zeros((1,) + a.shape)
    return MatrixMeasure.from_parts([(t, a)], grid, dens, shape=a.shape)


def exponential(rates, gains=None, dt=1e-3, horizon=30.0):
    """Diagonal density ``diag(g_i exp(-r_i t))`` sampled on ``[0, horizon)``."""
    rates = np.atleast_1d(np.asarray(rates, float))
    gains = np.ones_like(rates) if gains is None else np.atleast_1d(np.asarray(gains, float))
    grid = TimeGrid(dt, int(round(horizon / dt)))
    t = grid.times[:, None]
    dens = np.zeros((grid.n_steps, len(rates), len(rates)))
    idx = np.arange(len(rates))
    dens[:, idx, idx] = gains * np.exp(-rates * t)
    return MatrixMeasure.from_parts([], grid, dens, shape=(len(rates), len(rates)))


def entry_tv(h, i, j):
    """Total variation of entry ``(i, j)``: atom masses plus density mass."""
    if not (0 <= i < h.rows and 0 <= j < h.cols):
        raise IndexError(f"entry ({i}, {j}) outside a {h.rows}x{h.cols} measure")
    return _tv_matrix(h)[i, j]


def _tv_matrix(h):
    # fsum makes every entry correctly rounded, hence independent of layout
    tv = np.empty((h.rows, h.cols))
    dens = None if h.density is None else h.dt * np.abs(h.density)
    for i in range(h.rows):
        for j in range(h.cols):
            parts = np.abs(h.atoms[:, i, j]).tolist()
            if dens is not None:
                parts += dens[:, i, j].tolist()
            tv[i, j] = math.fsum(parts)
    return tv


def induced_gain(h, p):
    """Induced L^p -> L^p norm of ``u -> h * u`` for ``p`` in {1, inf}.

    The value norms are sup for ``p = inf`` (worst row sum of entry total
    variations) and the unweighted 1-norm for ``p = 1`` (worst column sum).
    """
    tv = _tv_matrix(h)
    if p == math.inf:
        sums = [math.fsum(tv[i, :]) for i in range(h.rows)]
    elif p == 1:
        sums = [math.fsum(tv[:, j]) for j in range(h.cols)]
    else:
        raise ValueError(f"p must be 1 or inf, got {p!r}")
    return GainValue(p, max(sums))


def transpose(h):
    dens = None if h.density is None else np.ascontiguousarray(h.density.transpose(0, 2, 1))
    return MatrixMeasure(h.cols, h.rows, h.atom_times,
                         np.ascontiguousarray(h.atoms.transpose(0, 2, 1)), h.density_grid, dens)


def lag_matrices(h, dt=None, n_lags=None):
    """Collapse ``h`` onto a grid: ``K[n]`` acts on ``u_{k-n}``.

    ``K[n]`` is the atom at ``n dt`` (if any) plus ``dt * D[n]``. This is
    the exact discrete convolution kernel used by :func:`convolve`.
    """
    dt = h.dt if dt is None else dt
    if dt is None:
        raise ValueError("a purely atomic measure needs an explicit dt")
    if h.dt is not None and h.dt != dt:
        raise ValueError(f"time step mismatch: kernel dt={h.dt!r}, requested {dt!r}")
    lags = [grid_multiple(t, dt) for t in h.atom_times]
    span = max(lags, default=0) + 1
    if h.density is not None:
        span = max(span, len(h.density))
    n_lags = span if n_lags is None else n_lags
    K = np.zeros((n_lags, h.rows, h.cols))
    if h.density is not None:
        n = min(n_lags, len(h.density))
        K[:n] += dt * h.density[:n]
    for lag, a in zip(lags, h.atoms):
        if lag < n_lags:
            K[lag] += a
    return K


def on_grid(h, dt=None):
    """Canonical grid form: lag-0 mass as an atom, later lags as density.

    Convolution with ``on_grid(h)`` equals convolution with ``h``; its
    total variation can only be smaller (coincident mass may cancel).
    """
    K = lag_matrices(h, dt)
    dt = h.dt if dt is None else dt
    dens = K / dt
    dens[0] = 0.0
    return MatrixMeasure(h.rows, h.cols, [0.0], K[:1], TimeGrid(dt, len(K)), dens)


def convolve(h, u):
    """``y_k = sum_a M_a u_{k - lag_a} + dt * sum_{j<=k} D_{k-j} u_j``."""
    if u.space.dim != h.cols:
        raise ValueError(f"input dimension {u.space.dim} does not match kernel columns {h.cols}")
    dt = u.grid.dt
    if h.dt is not None and h.dt != dt:
        raise ValueError(f"time step mismatch: kernel dt={h.dt!r}, signal dt={dt!r}")
    N = u.grid.n_steps
    K = lag_matrices(h, dt, N)
    y = np.zeros((N, h.rows))
    uv = u.values
    for n in np.flatnonzero(np.any(K, axis=(1, 2))):
        y[n:] += uv[:N - n] @ K[n].T
    return Signal(u.grid, ValueSpace.sup(h.rows), y)


def laplace(h, s):
    """``sum_a exp(-s tau_a) M_a + dt * sum_k exp(-s t_k) D_k``."""
    s = complex(s)
    if s.real < 0:
        raise ValueError("the transform is evaluated on Re s >= 0 only")
    G = np.einsum('a,aij->ij', np.exp(-s * h.atom_times), h.atoms.astype(complex))
    if h.density is not None:
        w = h.dt * np.exp(-s * h.density_grid.times)
        G = G + np.einsum('k,kij->ij', w, h.density)
    return G


def _fmt(x):
    return repr(float(x))


def kernel_to_text(h):
    """Line-oriented text form; see :func:`kernel_from_text`."""
    dt = h.dt if h.dt is not None else 0.0
    lines = [f"kernel {h.rows} {h.cols} {_fmt(dt)} {_fmt(h.horizon)}"]
    for t, a in zip(h.atom_times, h.atoms):
        lines.append("atom " + " ".join([_fmt(t)] + [_fmt(x) for x in a.ravel()]))
    if h.density is not None:
        for k, d in enumerate(h.density):
            lines.append(f"d {k} " + " ".join(_fmt(x) for x in d.ravel()))
    return "\n".join(lines) + "\n"


def kernel_from_text(text):
    """Parse ``kernel n m dt horizon`` / ``atom t ...`` / ``d k ...`` lines."""
    lines = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.startswith('#')]
    head = lines[0]
    if head[0] != 'kernel' or len(head) != 5:
        raise ValueError("kernel text must start with 'kernel n m dt horizon'")
    n, m, dt, horizon = int(head[1]), int(head[2]), float(head[3]), float(head[4])
    atoms, dens = [], {}
    for ln in lines[1:]:
        vals = [float(x) for x in ln[2:]]
        if len(vals) != n * m:
            raise ValueError(f"expected {n * m} entries in line {' '.join(ln)!r}")
        if ln[0] == 'atom':
            atoms.append((float(ln[1]), np.array(vals).reshape(n, m)))
        elif ln[0] == 'd':
            dens[int(ln[1])] = np.array(vals).reshape(n, m)
        else:
            raise ValueError(f"unknown record {ln[0]!r}")
    grid = density = None
    if dens:
        size = max(dens) + 1
        grid = TimeGrid(dt, size)
        density = np.zeros((size, n, m))
        for k, d in dens.items():
            density[k] = d
    elif dt > 0:
        grid, density = TimeGrid(dt, 1), np.zeros((1, n, m))
    return MatrixMeasure.from_parts(atoms, grid, density, shape=(n, m))


def laplace_to_csv(h, points):
    """CSV rows ``re_s,im_s,re_G_ij,im_G_ij,...`` for each evaluation point."""
    out = io.StringIO()
    cols = []
    for i in range(h.rows):
        for j in range(h.cols):
            cols += [f're_G_{i}{j}', f'im_G_{i}{j}']
    out.write(",".join(['re_s', 'im_s'] + cols) + "\n")
    for s in points:
        G = laplace(h, s)
        row = [complex(s).real, complex(s).imag]
        for z in G.ravel():
            row += [z.real, z.imag]
        out.write(",".join(_fmt(x) for x in row) + "\n")
    return out.getvalue()


KERNELS = {
    'delay1': (lambda dt: delta(1.0, 1.0, dt=dt), lambda s: np.exp(-complex(s))),
    'exp1': (lambda dt: exponential([1.0], dt=dt, horizon=40.0), lambda s: 1.0 / (complex(s) + 1.0)),
}
"""Named scalar kernels and their closed-form Laplace transforms."""
