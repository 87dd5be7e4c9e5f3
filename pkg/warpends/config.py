"""Default configuration.

An experiment config is a Python file declaring any of the section classes below; each
attribute it sets overrides the default of the same name.  Bundled experiments live in
``warpends/experiments`` and can be loaded by name.
"""

from collections import ChainMap
from typing import Any, Dict, Optional
import importlib
import logging
import os
import random
import re
import shutil
import string
import sys
import tempfile

from warpends.types import Config
from warpends.util import expand

LOG = logging.getLogger(__name__)
LOG.addHandler(logging.NullHandler())


EXPERIMENTS = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'experiments')


class Manifold:
    cross_section = 'circle'
    lengths = None
    # 'single' end with an inner wall at r_start, or 'two_ends' glued at r = 0
    topology = 'single'
    warp = 'sinh(r)'
    warp_minus = None
    r_start = 1.0
    expansive_from = None
    boundary = None
    boundary_minus = '0'
    inner = '0'
    bounds = None


class Comparison:
    # explicit radial comparison warp; otherwise the hyperbolic construction with
    # curvature constant ``a``, otherwise phi itself for radial warps
    warp = None
    a = None
    r0 = None
    r_max = None
    budget = 200


class Sampling:
    omega_nodes = 128
    radial_nodes = 256
    r_max = None
    seed = 0


class Curvature:
    r_min = None
    r_max = None
    samples = 200
    omega = None
    bound = None


class Barrier:
    center = None
    half_widths = None
    psi = None
    omega_nodes = 33
    radial_nodes = 129
    r_min = None
    r_max = 12.0
    levels = 3
    tolerance = 1e-6
    sigma_nodes = 2001
    rho = None


class Solver:
    omega_nodes = 16
    dr = 0.1
    grading = 'uniform'
    method = 'direct'
    tolerance = 1e-10
    workers = 1
    R = None


class Exhaustion:
    schedule = (4.0, 6.0, 8.0, 10.0)
    probes = None
    probe_radius = None
    tolerance = 1e-4


class Liouville:
    boundary = None
    distinguished = 'plus'


class Expect:
    pass


class Output:
    directory = 'warpends-out'
    csv = True
    tensor = True


SECTIONS = (Manifold, Comparison, Sampling, Curvature, Barrier, Solver, Exhaustion, Liouville,
            Expect, Output)


class ConfigError(ValueError):

    def __init__(self, path: Optional[str], line: Optional[int], message: str) -> None:
        self.path = path
        self.line = line
        self.message = message
        where = path or '<defaults>'
        if line is not None:
            where = f'{where}:{line}'
        super().__init__(f'{where}: {message}')


def get_temp_package():
    while True:
        temp_package = ''.join(random.choice(string.ascii_letters) for _ in range(16))
        if temp_package not in sys.modules:
            return temp_package


def section_values(section: type) -> Dict[str, Any]:
    return {key: value for key, value in vars(section).items() if not key.startswith('__')}


def resolve(path: str) -> str:
    """A config file path, or the name of a bundled experiment"""
    expanded = expand(path)
    if os.path.isfile(expanded):
        return expanded

    bundled = os.path.join(EXPERIMENTS, f'{path}.py')
    if os.path.isfile(bundled):
        return bundled
    raise ConfigError(path, None, 'no such config file or bundled experiment')


def locate(path: Optional[str], section: str, key: Optional[str] = None) -> Optional[int]:
    """Line of ``key`` inside ``class Section`` of a config file (or of the class itself)"""
    if not path or not os.path.isfile(path):
        return None

    with open(path) as f:
        lines = f.read().splitlines()

    header = re.compile(rf'^class\s+{re.escape(section)}\b', re.IGNORECASE)
    start = next((i for i, line in enumerate(lines) if header.match(line)), None)
    if start is None:
        return None
    if key is None:
        return start + 1

    assignment = re.compile(rf'^\s+{re.escape(key)}\s*=')
    for i in range(start + 1, len(lines)):
        if lines[i] and not lines[i][0].isspace():
            break
        if assignment.match(lines[i]):
            return i + 1
    return start + 1


def _import(path: str) -> Any:
    with tempfile.TemporaryDirectory() as tempdir:
        temp_package = get_temp_package()
        shutil.copyfile(path, os.path.join(tempdir, f'{temp_package}.py'))

        sys.path.insert(0, tempdir)
        try:
            return importlib.import_module(temp_package)
        except SyntaxError as exc:
            raise ConfigError(path, exc.lineno, f'syntax error: {exc.msg}') from exc
        except Exception as exc:
            raise ConfigError(path, None, f'cannot load config: {exc}') from exc
        finally:
            sys.path.remove(tempdir)
            sys.modules.pop(temp_package, None)


def load_config(path: Optional[str] = None) -> Config:
    defaults = {section.__name__: section_values(section) for section in SECTIONS}

    if path:
        path = resolve(path)
        config = _import(path)

        config_vals = {
            section: section_values(getattr(config, section)) if hasattr(config, section) else {}
            for section in defaults
        }
        for section, values in config_vals.items():
            unknown = set(values) - set(defaults[section])
            if section != 'Expect' and unknown:
                LOG.warning('%s: ignoring unknown keys %s in section %s', path,
                            ', '.join(sorted(unknown)), section)

        result = {section: ChainMap(config_vals[section], defaults[section])
                  for section in defaults}
    else:
        result = {section: ChainMap(value) for section, value in defaults.items()}

    LOG.debug('Loaded config %s', path or '<defaults>')
    result = {key.lower(): value for key, value in result.items()}
    result['meta'] = ChainMap({'path': path})
    return result


def override(config: Config, section: str, **values: Any) -> None:
    """Layer command-line values over a loaded section"""
    config[section] = config[section].new_child(values)


def dump_config(config: Config, path: str) -> str:
    """Write the resolved configuration as a loadable config file"""
    os.makedirs(os.path.dirname(path) or '.', exist_ok=True)
    blocks = []
    for section in SECTIONS:
        values = config[section.__name__.lower()]
        body = [f'    {key} = {values[key]!r}' for key in sorted(values)]
        blocks.append(f'class {section.__name__}:\n' + '\n'.join(body or ['    pass']) + '\n')

    with open(path, 'w') as f:
        f.write('\n\n'.join(blocks))
    return path
