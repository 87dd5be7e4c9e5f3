import os.path

import pytest

from warpends.config import ConfigError, dump_config, load_config, locate, override, resolve


def write(tempdir, text, name='myconfig.py'):
    path = os.path.join(tempdir, name)
    with open(path, 'w') as f:
        f.write(text)
    return path


def sections(config):
    return {key: dict(value) for key, value in config.items() if key != 'meta'}


def test_default_config(tempdir):
    # Create empty file
    path = write(tempdir, '')

    assert sections(load_config(path)) == sections(load_config())
    assert load_config(path)['meta']['path'] == path
    assert load_config()['meta']['path'] is None


def test_config_override(tempdir):
    path = write(tempdir, """\
class Manifold:
    cross_section = 'torus'
    warp = 'cosh(r)'

class Solver:
    omega_nodes = (8, 4)
""")

    conf = load_config(path)
    assert conf['manifold']['warp'] == 'cosh(r)'
    assert conf['manifold']['cross_section'] == 'torus'
    assert conf['manifold']['r_start'] == 1.0
    assert conf['solver']['omega_nodes'] == (8, 4)
    assert conf['solver']['dr'] == 0.1


def test_command_line_override(config):
    override(config, 'solver', omega_nodes=32)
    assert config['solver']['omega_nodes'] == 32
    assert config['solver']['dr'] == 0.1


def test_bundled_experiment():
    conf = load_config('hyperbolic')
    assert conf['manifold']['warp'] == 'sinh(r)'
    assert conf['expect']['criterion']['verdict'] == 'Solvable'
    assert resolve('hyperbolic').endswith(os.path.join('experiments', 'hyperbolic.py'))


def test_missing_config(tempdir):
    with pytest.raises(ConfigError, match='no such config file'):
        load_config(os.path.join(tempdir, 'absent.py'))


def test_syntax_error_has_line(tempdir):
    path = write(tempdir, """\
class Manifold:
    warp = 'sinh(r)'
    r_start = = 1
""")

    with pytest.raises(ConfigError) as info:
        load_config(path)
    assert info.value.line == 3
    assert str(info.value).startswith(f'{path}:3: syntax error')


def test_locate(tempdir):
    path = write(tempdir, """\
class Solver:
    dr = 0.2

class Manifold:
    cross_section = 'torus'
    warp = 'sinh(r'
""")

    assert locate(path, 'Manifold', 'warp') == 6
    assert locate(path, 'Manifold') == 4
    assert locate(path, 'Manifold', 'inner') == 4
    assert locate(path, 'Barrier', 'rho') is None
    assert locate(None, 'Manifold') is None


def test_dump_and_reload(tempdir):
    conf = load_config('two_ends')
    override(conf, 'solver', workers=2)
    path = dump_config(conf, os.path.join(tempdir, 'out', 'config.py'))

    assert sections(load_config(path)) == sections(conf)
