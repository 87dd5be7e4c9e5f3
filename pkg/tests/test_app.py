import os.path

import pytest

from warpends.app import (EXIT_ERROR, EXIT_EXPECT, EXIT_OK, _matches, check_expectations,
                          main)


@pytest.fixture
def out(tempdir):
    return os.path.join(tempdir, 'out')


@pytest.fixture
def run(tempdir, out):
    log = os.path.join(tempdir, 'logs', 'log.txt')

    def run(*args):
        return main([*args, '--out', out, '--log', log])

    return run


def write(tempdir, text):
    path = os.path.join(tempdir, 'experiment.py')
    with open(path, 'w') as f:
        f.write(text)
    return path


def read(out, command):
    with open(os.path.join(out, f'{command}.txt')) as f:
        return f.read()


def test_curvature_command(run, out):
    assert run('curvature', '-c', 'hyperbolic') == EXIT_OK

    text = read(out, 'curvature')
    assert 'signs: negative\n' in text
    assert 'expect: ok\n' in text
    assert os.path.isfile(os.path.join(out, 'config.py'))


def test_failed_expectation(run, out, tempdir):
    path = write(tempdir, """\
class Manifold:
    cross_section = 'torus'
    warp = 'sinh(r)'

class Expect:
    curvature = {'signs': 'positive'}
""")

    assert run('curvature', '-c', path) == EXIT_EXPECT
    assert "expect_failure: signs: got negative, expected positive" in read(out, 'curvature')


def test_bad_warp_points_at_config_line(run, tempdir, capsys):
    path = write(tempdir, """\
class Manifold:
    cross_section = 'torus'
    warp = 'sinh(r'
""")

    assert run('curvature', '-c', path) == EXIT_ERROR
    err = capsys.readouterr().err
    assert err.startswith(f'error: {path}:3: Manifold.warp:')


def test_missing_boundary(run, tempdir, capsys):
    path = write(tempdir, """\
class Manifold:
    warp = 'sinh(r)'
""")

    assert run('solve', '-c', path) == EXIT_ERROR
    assert 'Manifold.boundary is required' in capsys.readouterr().err


def test_criterion_command(run, out):
    assert run('criterion', '-c', 'hyperbolic', '--seed', '3') == EXIT_OK
    text = read(out, 'criterion')
    assert 'verdict: Solvable\n' in text
    assert 'sturm: ' in text


def test_exhaust_command(run, out):
    assert run('exhaust', '-c', 'exp2r') == EXIT_OK
    assert 'verdict: Converged\n' in read(out, 'exhaust')
    for name in ('exhaust.csv', 'exhaust.ends', 'exhaust_trace.csv'):
        assert os.path.isfile(os.path.join(out, name))

    with open(os.path.join(out, 'exhaust.csv')) as f:
        assert f.readline().strip() == 'u,v,r,u'


def test_matches():
    assert _matches(-1.0, (-1.1, -0.9))
    assert not _matches(-1.2, (-1.1, -0.9))
    assert _matches('ok', 'ok')
    assert _matches(True, True)
    assert not _matches('ok', (0, 1))
    assert _matches((1.0, 2.0), (1.0, 2.0))


def test_check_expectations():
    report = [('verdict', 'Solvable'), ('k_min', -1.0)]
    assert check_expectations(report, {'verdict': 'Solvable', 'k_min': (-2, 0)}) == []

    failures = check_expectations(report, {'verdict': 'Not established'})
    assert failures == ['verdict: got Solvable, expected Not established']

    assert check_expectations(report, {'order_min': (1.8, 2.5)}) == []
    assert check_expectations(report, {'order_min': (1.8, 2.5)}, strict=True) == \
        ['order_min: not reported, expected (1.8, 2.5)']
