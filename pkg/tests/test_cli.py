import csv
import io
import json
import subprocess
import sys

import pytest

from bibolilo.cli import EXIT_CHECK, EXIT_OK, EXIT_USAGE, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_sweep_counterexample_csv(capsys):
    code, out, _ = run(capsys, 'sweep-counterexample', '--grid-size', '1024', '--eps', '1,0.25,0.0625')
    assert code == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [float(r['ratio']) for r in rows] == [1.0, 2.0, 4.0]


def test_sweep_counterexample_json(capsys):
    code, out, _ = run(capsys, 'sweep-counterexample', '--grid-size', '16', '--eps', '0.25', '--format', 'json')
    assert code == EXIT_OK and json.loads(out)[0]['ratio'] == 2.0


def test_check_duality_json(capsys):
    code, out, _ = run(capsys, 'check-duality', '--grid-size', '16', '--trials', '20')
    assert code == EXIT_OK
    d = json.loads(out)
    assert all(r['pairing_residual'] <= 1e-10 for r in d['reports'])
    assert all(v['passed'] for r in d['reports'] for v in r['verdicts'])
    assert all(v['passed'] for v in d['refinement'])


def test_check_duality_markdown_and_csv(capsys):
    code, out, _ = run(capsys, 'check-duality', '--grid-size', '8', '--trials', '5',
                       '--system', 'delay1', '--markdown')
    assert code == EXIT_OK and out.startswith('| system |')
    code, out, _ = run(capsys, 'check-duality', '--grid-size', '8', '--trials', '5',
                       '--system', 'exp1', '--format', 'csv')
    assert code == EXIT_OK and out.splitlines()[0] == 'system,grid_size,check,lhs,rhs,passed'


def test_laplace_check(capsys):
    code, out, _ = run(capsys, 'laplace-check', '--kernel', 'delay1', '--s', '0')
    assert code == EXIT_OK
    p = json.loads(out)['points'][0]
    assert p['G'] == [1.0, 0.0]
    code, out, _ = run(capsys, 'laplace-check', '--kernel', 'exp1', '--s', '0,1+2j', '--format', 'csv')
    assert code == EXIT_OK and out.startswith('re_s,im_s,re_G_00,im_G_00')


def test_laplace_check_failure_exit_code(capsys):
    # a coarse grid misses the closed form by more than the tolerance
    code, _, err = run(capsys, 'laplace-check', '--kernel', 'exp1', '--dt', '0.1', '--s', '0')
    assert code == EXIT_CHECK and 'FAILED' in err


def test_gains_and_admissibility(capsys):
    code, out, _ = run(capsys, 'gains', '--system', 'leftshift', '--grid-size', '16')
    assert code == EXIT_OK
    d = json.loads(out)
    assert d[0]['p'] == 'inf' and d[0]['lower_bound'] == 4.0
    code, out, _ = run(capsys, 'gains', '--system', 'transport', '--p', '1', '--format', 'csv')
    assert code == EXIT_OK and out.splitlines()[0] == 'system,p,lower_bound,upper_bound,horizon'
    code, out, _ = run(capsys, 'admissibility', '--system', 'leftshift', '--grid-size', '8')
    assert code == EXIT_OK and json.loads(out)['constant_upper'] == 1.0
    code, out, _ = run(capsys, 'admissibility', '--system', 'transport', '--kind', 'control',
                       '--format', 'csv')
    assert code == EXIT_OK


def test_catalogue(capsys):
    code, out, _ = run(capsys, 'catalogue', '--grid-size', '4')
    assert code == EXIT_OK
    assert [r['name'] for r in json.loads(out)] == ['delay1', 'exp1', 'transport', 'leftshift',
                                                    'diag-exp-2']


@pytest.mark.parametrize('argv', [
    ['bogus'],
    ['sweep-counterexample', '--grid-size', '1'],
    ['sweep-counterexample', '--grid-size', 'x'],
    ['sweep-counterexample', '--grid-size', '8', '--eps', '0.3'],
    ['sweep-counterexample', '--eps', '0,0.5', '--grid-size', '8'],
    ['laplace-check', '--s', '-1'],
    ['laplace-check', '--s', 'abc'],
    ['gains', '--format', 'xml'],
])
def test_usage_errors(capsys, argv):
    with pytest.raises(SystemExit) as exc:
        code = main(argv)
        raise SystemExit(code)
    assert exc.value.code == EXIT_USAGE


def test_output_file_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / 'a.json', tmp_path / 'b.json'
    for path in (a, b):
        assert main(['gains', '--system', 'exp1', '--grid-size', '8', '--output', str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert capsys.readouterr().out == ''


def test_module_entry_point():
    proc = subprocess.run([sys.executable, '-m', 'bibolilo', 'laplace-check', '--s', '0'],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)['points'][0]['G'] == [1.0, 0.0]


def test_run_with_config(tmp_path):
    from bibolilo.cli import ExperimentConfig, run
    out = tmp_path / 'sweep.csv'
    cfg = ExperimentConfig('sweep-counterexample', grid_size=64, eps_list=[1, 0.25],
                           output_path=str(out), format='csv')
    assert run(cfg) == EXIT_OK
    assert out.read_text().splitlines()[2].split(',')[3] == '2.0'
    assert run(ExperimentConfig('sweep-counterexample', grid_size=1)) == EXIT_USAGE
    cfg = ExperimentConfig('laplace-check', extra={'kernel': 'exp1', 'dt': 0.1, 's': '0'})
    assert run(cfg) == EXIT_CHECK
