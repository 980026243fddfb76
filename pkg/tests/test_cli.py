import importlib
import math

import numpy as np
import pytest

from glmbound.base.data_structures import VerificationRow
from glmbound.bound import theorem1_bound
from glmbound.cli import run
from glmbound.families import Gaussian
from glmbound.version import __version__


def read_table(text: str, delimiter: str = '\t'):
    header, *rows = text.strip().split('\n')
    names = header.split(delimiter)
    return [dict(zip(names, row.split(delimiter))) for row in rows]


@pytest.fixture
def identity10_path(write_matrix):
    return write_matrix('identity10.txt', np.eye(10))


@pytest.fixture
def tall_path(write_matrix, tall_design):
    return write_matrix('tall.txt', tall_design.entries)


def test_version(capsys) -> None:
    assert run(['--version']) == 0
    assert capsys.readouterr().out.strip() == __version__


def test_bound(capsys, identity10_path) -> None:
    status = run(
        [
            'bound',
            '--design',
            str(identity10_path),
            '--family',
            'gaussian:L=1',
            '--scale',
            '0.01',
        ]
    )
    assert status == 0
    (row,) = read_table(capsys.readouterr().out)
    assert row['case'] == 'case1'
    assert float(row['bound_value']) == pytest.approx(
        0.1 / (math.pi * math.e**3), rel=1e-11
    )
    assert row['n'] == '10'
    assert len(row['epsilons'].split(',')) == 10


def test_bound_row_scales(capsys, tall_path, write_matrix) -> None:
    scales = write_matrix('scales.txt', np.array([[0.5, 0.2, 0.9, 0.3]]))
    status = run(
        ['bound', '--design', str(tall_path), '--row-scales', str(scales)]
    )
    assert status == 1
    assert 'Expected 6 families' in capsys.readouterr().err


def test_bound_row_scales_minimum(
    capsys, tall_path, tall_design, write_matrix
) -> None:
    scales = write_matrix(
        'scales.txt', np.array([[0.5, 0.2, 0.9, 0.3, 0.4, 0.6]])
    )
    status = run(
        ['bound', '--design', str(tall_path), '--row-scales', str(scales)]
    )
    assert status == 0
    (row,) = read_table(capsys.readouterr().out)
    expected = theorem1_bound(tall_design, Gaussian(1.0, 0.2))
    assert float(row['scale']) == pytest.approx(0.2)
    assert float(row['L']) == pytest.approx(1.0)
    assert float(row['bound_value']) == pytest.approx(
        expected.bound_value, rel=1e-10
    )


def test_bound_ag_comparison(capsys, identity10_path) -> None:
    arguments = [
        'bound',
        '--design',
        str(identity10_path),
        '--scale',
        '0.01',
    ]
    assert run(arguments) == 0
    assert 'ag_bound' not in capsys.readouterr().out
    assert run([*arguments, '--ag-R', '1']) == 0
    (row,) = read_table(capsys.readouterr().out)
    # On the identity both bounds reduce to constant * d * s / L
    assert float(row['ag_bound']) == pytest.approx(
        0.1 / (math.pi * math.e**3), rel=1e-10
    )


def test_bound_ag_comparison_rank_deficient(capsys, write_matrix) -> None:
    design = write_matrix(
        'deficient.txt', np.array([[1.0, 0.0], [0.5, 0.0]])
    )
    assert run(['bound', '--design', str(design), '--ag-R', '1']) == 1
    assert 'full-rank' in capsys.readouterr().err


def test_bound_ag_comparison_domain(capsys, identity10_path) -> None:
    status = run(
        ['bound', '--design', str(identity10_path), '--ag-R', '2']
    )
    assert status == 1
    assert 'Strong convexity' in capsys.readouterr().err


def test_bound_csv_to_file(capsys, tall_path, tmp_path) -> None:
    output = tmp_path / 'bound.csv'
    status = run(
        [
            'bound',
            '--design',
            str(tall_path),
            '--family',
            'bernoulli',
            '--format',
            'csv',
            '--output',
            str(output),
        ]
    )
    assert status == 0
    assert capsys.readouterr().out == ''
    text = output.read_text(encoding='utf-8')
    assert text.startswith('bound_value,constant,raw_min_term,case,')
    # The epsilons column holds commas, so csv quotes it
    assert text.count('"') == 2


def test_malformed_matrix(capsys, tmp_path) -> None:
    path = tmp_path / 'bad.txt'
    path.write_text('1,2\n3,x\n', encoding='utf-8')
    assert run(['bound', '--design', str(path)]) == 1
    assert 'row 2' in capsys.readouterr().err


def test_unknown_flag(capsys, identity10_path) -> None:
    assert run(['bound', '--design', str(identity10_path), '--nope']) == 1
    assert 'nope' in capsys.readouterr().err


def test_nonpositive_scale(capsys, identity10_path) -> None:
    status = run(
        ['bound', '--design', str(identity10_path), '--scale', '-1']
    )
    assert status == 1
    assert '--scale' in capsys.readouterr().err


def test_prior(capsys, identity10_path) -> None:
    status = run(
        ['prior', '--design', str(identity10_path), '--scale', '0.01']
    )
    assert status == 0
    (row,) = read_table(capsys.readouterr().out)
    assert row['case'] == 'case1'
    assert float(row['bayes_bound']) == pytest.approx(
        0.6 / (math.pi * math.e**3), rel=1e-10
    )


def test_estimate_identity(capsys, write_matrix) -> None:
    design = write_matrix('identity3.txt', np.eye(3))
    data = write_matrix('data.txt', np.array([[0.1, -0.2, 0.3]]))
    status = run(['estimate', '--design', str(design), '--data', str(data)])
    assert status == 0
    values = capsys.readouterr().out.strip().split(',')
    np.testing.assert_allclose([float(v) for v in values], [0.1, -0.2, 0.3])


def test_estimate_projection(capsys, write_matrix) -> None:
    design = write_matrix('identity2.txt', np.eye(2))
    data = write_matrix('data.txt', np.array([[3.0, 4.0]]))
    arguments = ['estimate', '--design', str(design), '--data', str(data)]
    assert run(arguments) == 0
    assert capsys.readouterr().out == '0.6,0.8\n'
    assert run([*arguments, '--no-project']) == 0
    assert capsys.readouterr().out == '3,4\n'


def test_simulate_thread_invariance(capsys, tall_path) -> None:
    arguments = [
        'simulate',
        '--design',
        str(tall_path),
        '--scale',
        '0.1',
        '--trials',
        '3000',
        '--seed',
        '42',
    ]
    outputs = []
    for threads in ('1', '4'):
        assert run([*arguments, '--threads', threads]) == 0
        outputs.append(capsys.readouterr().out)
    assert outputs[0] == outputs[1]
    (row,) = read_table(outputs[0])
    assert row['mode'] == 'fixed'
    assert row['trials'] == '3000'
    assert row['seed'] == '42'


def test_simulate_worst(capsys, tall_path) -> None:
    status = run(
        [
            'simulate',
            '--design',
            str(tall_path),
            '--family',
            'bernoulli',
            '--estimator',
            'irls',
            '--mode',
            'worst',
            '--trials',
            '100',
        ]
    )
    assert status == 0
    (row,) = read_table(capsys.readouterr().out)
    assert len(row['theta_at_max'].split(',')) == 2


def test_simulate_too_few_trials(capsys, tall_path) -> None:
    status = run(
        ['simulate', '--design', str(tall_path), '--trials', '10']
    )
    assert status == 1
    assert '100 trials' in capsys.readouterr().err


def test_verify_lemma2(capsys) -> None:
    assert run(['verify', '--suite', 'lemma2', '--grid', 'coarse']) == 0
    rows = read_table(capsys.readouterr().out)
    assert len(rows) == 8
    assert all(float(row['slack']) >= -1e-8 for row in rows)


def test_verify_negative_slack(capsys, monkeypatch, tmp_path) -> None:
    rows = [
        VerificationRow({'case': 0.0}, lhs=1.0, rhs=1.0, slack=0.0),
        VerificationRow({'case': 1.0}, lhs=2.0, rhs=1.0, slack=-1.0),
    ]
    monkeypatch.setattr(
        importlib.import_module('glmbound.cli.verify'),
        'run_suite',
        lambda suite, grid: rows,
    )
    output = tmp_path / 'verify.tsv'
    status = run(['verify', '--suite', 'lemma2', '--output', str(output)])
    assert status == 2
    assert '1 of 2' in capsys.readouterr().err
    written = read_table(output.read_text(encoding='utf-8'))
    assert [float(row['slack']) for row in written] == [0.0, -1.0]


def test_linear_algebra_failure(capsys, monkeypatch, write_matrix) -> None:
    def fail(*args, **kwargs):
        raise np.linalg.LinAlgError('SVD did not converge')

    monkeypatch.setattr(
        importlib.import_module('glmbound.cli.estimate'), 'estimate', fail
    )
    design = write_matrix('identity2.txt', np.eye(2))
    data = write_matrix('data.txt', np.array([[0.1, 0.2]]))
    status = run(['estimate', '--design', str(design), '--data', str(data)])
    assert status == 1
    assert 'SVD did not converge' in capsys.readouterr().err


def test_report(capsys, write_matrix) -> None:
    design = write_matrix('identity2.txt', np.eye(2))
    status = run(
        [
            'report',
            '--design',
            str(design),
            '--families',
            'gaussian,bernoulli',
            '--trials',
            '100',
        ]
    )
    assert status == 0
    rows = read_table(capsys.readouterr().out)
    assert [row['family'] for row in rows] == ['gaussian', 'bernoulli']


@pytest.mark.slow
def test_verify_lemma1_fine(capsys) -> None:
    assert run(['verify', '--suite', 'lemma1']) == 0
    rows = read_table(capsys.readouterr().out)
    assert len(rows) == 75
    assert all(float(row['slack']) >= -1e-8 for row in rows)
