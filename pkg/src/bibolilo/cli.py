"""Batch runner: ``bibolilo <command> [flags]``.

Exit status is 0 when every check passes, 1 for usage errors and 2 when
a check misses its tolerance (failed checks are listed on stderr).
"""

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field

from .duality import (BRACKET_TOL, CATALOGUE, catalogue, figure_one_markdown,
                      refinement_cells, reports_to_json, sweep_figure_one)
from .kernel import KERNELS, laplace, laplace_to_csv
from .signals import grid_multiple
from .stability import (DEFAULT_SEED, control_admissibility, counterexample_sweep, gain_bracket,
                        observation_admissibility, sweep_to_csv)
from .sysnode import decay_steps, from_kernel, growth_bound, transfer

EXIT_OK, EXIT_USAGE, EXIT_CHECK = 0, 1, 2
LAPLACE_TOL = 5e-3
DIFFERENCE_TOL = 1e-8


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text):
    try:
        return [float(x) for x in text.split(',') if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _complexes(text):
    try:
        return [complex(x.replace(' ', '')) for x in text.split(',') if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated complex numbers, got {text!r}")


def _grid_size(text):
    try:
        M = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid size must be an integer, got {text!r}")
    if M < 2:
        raise argparse.ArgumentTypeError("grid size must be at least 2")
    return M


def build_parser():
    p = _Parser(prog='bibolilo', description="BIBO/LILO stability experiments on discrete system nodes.")
    sub = p.add_subparsers(dest='command', required=True, parser_class=_Parser)

    def common(sp, M=16, fmt='json'):
        sp.add_argument('--grid-size', type=_grid_size, default=M, help="spatial grid size M (dt = 1/M)")
        sp.add_argument('--seed', type=int, default=DEFAULT_SEED)
        sp.add_argument('--output', help="write here instead of stdout")
        sp.add_argument('--format', choices=('csv', 'json'), default=fmt)

    sp = sub.add_parser('sweep-counterexample', help="band-input sweep on the left shift")
    common(sp, 1024, 'csv')
    sp.add_argument('--eps', type=_floats, default=[1, 1 / 4, 1 / 16, 1 / 64, 1 / 256])

    sp = sub.add_parser('gains', help="L^inf and L^1 gain brackets of a catalogue system")
    common(sp)
    sp.add_argument('--system', choices=sorted(CATALOGUE), default='transport')
    sp.add_argument('--p', choices=('1', 'inf', 'both'), default='both')
    sp.add_argument('--horizon', type=float, help="time horizon (default: until F^k decays)")

    sp = sub.add_parser('check-duality', help="pairing identity and duality brackets on the catalogue")
    common(sp)
    sp.add_argument('--trials', type=int, default=100)
    sp.add_argument('--system', action='append', choices=sorted(CATALOGUE),
                    help="restrict to these systems (repeatable)")
    sp.add_argument('--markdown', action='store_true', help="emit the markdown summary instead")

    sp = sub.add_parser('admissibility', help="observation/control admissibility brackets")
    common(sp)
    sp.add_argument('--system', choices=sorted(CATALOGUE), default='leftshift')
    sp.add_argument('--kind', choices=('observation', 'control'), default='observation')
    sp.add_argument('--horizon', type=float)

    sp = sub.add_parser('laplace-check', help="Laplace transform of a named kernel vs closed form")
    sp.add_argument('--kernel', choices=sorted(KERNELS), default='delay1')
    sp.add_argument('--s', type=_complexes, default=[0j, 1 + 0j, 1 + 2j])
    sp.add_argument('--dt', type=float, default=1e-3)
    sp.add_argument('--output')
    sp.add_argument('--format', choices=('csv', 'json'), default='json')

    sp = sub.add_parser('catalogue', help="list the built-in systems")
    common(sp)
    return p


def _num(x):
    if isinstance(x, float) and not math.isfinite(x):
        return 'inf' if x > 0 else ('-inf' if x < 0 else 'nan')
    return x


def _csv(header, rows):
    out = io.StringIO()
    w = csv.writer(out, lineterminator='\n')
    w.writerow(header)
    for r in rows:
        w.writerow([repr(x) if isinstance(x, float) else x for x in r])
    return out.getvalue()


def _json(obj):
    return json.dumps(obj, indent=2) + "\n"


def _cmd_sweep(a):
    for e in a.eps:
        if not 0 < e <= 1:
            raise UsageError(f"eps must lie in (0, 1], got {e!r}")
        try:
            grid_multiple(e, 1.0 / a.grid_size)
        except ValueError as exc:
            raise UsageError(str(exc))
    rows = counterexample_sweep(a.grid_size, a.eps)
    failed = [f"eps={r.eps!r}: ratio {r.ratio!r} != {r.predicted!r}" for r in rows
              if abs(r.ratio - r.predicted) > BRACKET_TOL * r.predicted]
    if a.format == 'csv':
        text = sweep_to_csv(rows)
    else:
        text = _json([dict(eps=r.eps, input_norm=r.input_norm, output_norm=r.output_norm,
                           ratio=r.ratio, predicted=r.predicted) for r in rows])
    return text, failed


def _cmd_gains(a):
    sys_ = catalogue(a.grid_size, [a.system])[a.system]
    ps = {'1': [1], 'inf': [math.inf], 'both': [math.inf, 1]}[a.p]
    reports = [gain_bracket(sys_, p, a.horizon, seed=a.seed) for p in ps]
    failed = [f"p={r.to_dict()['p']}: lower {r.lower_bound!r} > upper {r.upper_bound!r}"
              for r in reports if r.lower_bound > r.upper_bound + BRACKET_TOL]
    if a.format == 'csv':
        text = _csv(['system', 'p', 'lower_bound', 'upper_bound', 'horizon'],
                    [[a.system, r.to_dict()['p'], r.lower_bound, r.upper_bound, r.horizon] for r in reports])
    else:
        text = _json([dict(system=a.system, **r.to_dict()) for r in reports])
    return text, failed


def _cmd_duality(a):
    systems = catalogue(a.grid_size, a.system)
    reports = sweep_figure_one(systems, trials=a.trials, seed=a.seed)
    extra = []
    if a.system is None or 'leftshift' in a.system or 'transport' in a.system:
        extra = refinement_cells([max(2, a.grid_size // 2), a.grid_size], seed=a.seed)
    failed = [f"{r.name}: {v.name} ({v.lhs!r} vs {v.rhs!r})"
              for r in reports for v in r.verdicts if not v.passed]
    failed += [f"{v.name} ({v.lhs!r} vs {v.rhs!r})" for v in extra if not v.passed]
    if a.markdown:
        return figure_one_markdown(reports, extra), failed
    if a.format == 'csv':
        rows = [[r.name, r.grid_size, v.name, v.lhs, v.rhs, int(v.passed)]
                for r in reports for v in r.verdicts]
        rows += [['refinement', a.grid_size, v.name, v.lhs, v.rhs, int(v.passed)] for v in extra]
        return _csv(['system', 'grid_size', 'check', 'lhs', 'rhs', 'passed'], rows), failed
    return reports_to_json(reports, extra) + "\n", failed


def _cmd_admissibility(a):
    sys_ = catalogue(a.grid_size, [a.system])[a.system]
    try:
        if a.kind == 'observation':
            rep = observation_admissibility(sys_, horizon=a.horizon, seed=a.seed)
        else:
            rep = control_admissibility(sys_, horizon=a.horizon, seed=a.seed)
    except ValueError as exc:
        raise UsageError(str(exc))
    failed = []
    if rep.maxreg_lower is not None:
        if rep.constant_lower > rep.maxreg_upper + BRACKET_TOL or rep.maxreg_lower > rep.constant_upper + BRACKET_TOL:
            failed.append("admissibility and maximal-regularity brackets do not overlap")
    d = dict(system=a.system, kind=a.kind, **rep.to_dict())
    if a.format == 'csv':
        keys = ['system', 'kind', 'constant_lower', 'constant_upper', 'maxreg_lower', 'maxreg_upper',
                'probe_count', 'horizon']
        return _csv(keys, [[d[k] for k in keys]]), failed
    return _json(d), failed


def _cmd_laplace(a):
    if not a.dt > 0:
        raise UsageError("--dt must be positive")
    for s in a.s:
        if s.real < 0:
            raise UsageError(f"Re s must be nonnegative, got {s!r}")
    make, exact = KERNELS[a.kernel]
    h = make(a.dt)
    real = from_kernel(h) if h.density is None or len(h.density) <= 5000 else None
    rows, failed = [], []
    for s in a.s:
        G = complex(laplace(h, s)[0, 0])
        ref = exact(s)
        err = abs(G - ref)
        if err > LAPLACE_TOL:
            failed.append(f"s={s!r}: |L(h)(s) - closed form| = {err!r} > {LAPLACE_TOL}")
        T = None if real is None else complex(transfer(real, s)[0, 0])
        if T is not None and abs(T - G) > DIFFERENCE_TOL:
            failed.append(f"s={s!r}: realization transfer differs from L(h) by {abs(T - G)!r}")
        rows.append(dict(s=[s.real, s.imag], G=[G.real, G.imag], closed_form=[ref.real, ref.imag],
                         abs_error=err, transfer=None if T is None else [T.real, T.imag]))
    if a.format == 'csv':
        return laplace_to_csv(h, a.s), failed
    return _json(dict(kernel=a.kernel, dt=a.dt, points=rows)), failed


def _cmd_catalogue(a):
    rows = []
    for name, s in catalogue(a.grid_size).items():
        k, nil = decay_steps(s)
        rows.append(dict(name=name, state_dim=s.state_space.dim, input_dim=s.input_space.dim,
                         output_dim=s.output_space.dim, dt=s.dt, state_norm=s.state_space.norm_kind,
                         input_norm=s.input_space.norm_kind, output_norm=s.output_space.norm_kind,
                         growth_bound=_num(growth_bound(s)), nilpotent=nil, decay_steps=k))
    if a.format == 'csv':
        keys = list(rows[0])
        return _csv(keys, [[r[k] for k in keys] for r in rows]), []
    return _json(rows), []


COMMANDS = {
    'sweep-counterexample': _cmd_sweep,
    'gains': _cmd_gains,
    'check-duality': _cmd_duality,
    'admissibility': _cmd_admissibility,
    'laplace-check': _cmd_laplace,
    'catalogue': _cmd_catalogue,
}


@dataclass
class ExperimentConfig:
    """Programmatic form of one command line; ``extra`` holds command-specific flags."""

    command: str
    grid_size: int = None
    eps_list: list = None
    horizon: float = None
    seed: int = DEFAULT_SEED
    output_path: str = None
    format: str = None
    extra: dict = field(default_factory=dict)

    def argv(self):
        args = [self.command]
        if self.grid_size is not None:
            args += ['--grid-size', str(self.grid_size)]
        if self.eps_list is not None:
            args += ['--eps', ','.join(repr(float(e)) for e in self.eps_list)]
        if self.horizon is not None:
            args += ['--horizon', repr(float(self.horizon))]
        if self.command not in ('laplace-check',):
            args += ['--seed', str(self.seed)]
        if self.output_path is not None:
            args += ['--output', self.output_path]
        if self.format is not None:
            args += ['--format', self.format]
        for k, v in self.extra.items():
            flag = '--' + k.replace('_', '-')
            if v is True:
                args.append(flag)
            else:
                args += [flag, str(v)]
        return args


def run(config):
    """Run one experiment; returns the exit status."""
    try:
        return main(config.argv())
    except SystemExit as exc:
        return exc.code


def main(argv=None):
    parser = build_parser()
    a = parser.parse_args(argv)
    try:
        text, failed = COMMANDS[a.command](a)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"bibolilo: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if a.output:
        with open(a.output, 'w', newline='') as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    for f in failed:
        print(f"FAILED: {f}", file=sys.stderr)
    return EXIT_CHECK if failed else EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
