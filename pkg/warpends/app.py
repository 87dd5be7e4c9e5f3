"""Command line front end: run experiments described by config files"""

import argparse
import contextlib
import logging
import math
import os
import sys
from functools import cached_property
from typing import Any, Callable, Dict, Iterator, List, Mapping, Optional, Tuple

import numpy as np

from warpends import barriers, criteria, export, geometry, solver
from warpends.config import ConfigError, dump_config, load_config, locate, override
from warpends.types import Config, Report
from warpends.util import expand, format_report, format_value
from warpends.warp_expr import WarpError


LOG = logging.getLogger('warpends')
LOG.addHandler(logging.NullHandler())


EXIT_OK = 0
EXIT_EXPECT = 1
EXIT_ERROR = 2

SINGLE = 'single'
TWO_ENDS = 'two_ends'


class Experiment:
    """Domain objects built lazily from a loaded config"""

    def __init__(self, config: Config) -> None:
        self.config = config
        self.path: Optional[str] = config['meta']['path']

    @contextlib.contextmanager
    def located(self, section: str, key: Optional[str] = None) -> Iterator[None]:
        """Re-raise value errors as config errors pointing at ``Section.key``"""
        try:
            yield
        except ConfigError:
            raise
        except (ValueError, TypeError) as exc:
            name = section.capitalize()
            where = f'{name}.{key}' if key else name
            raise ConfigError(self.path, locate(self.path, name, key),
                              f'{where}: {exc}') from exc

    def required(self, section: str, key: str) -> Any:
        value = self.config[section][key]
        if value is None:
            name = section.capitalize()
            raise ConfigError(self.path, locate(self.path, name),
                              f'{name}.{key} is required for this command')
        return value

    @property
    def output(self) -> str:
        return expand(self.config['output']['directory'])

    @cached_property
    def cross_section(self) -> geometry.CrossSection:
        manifold = self.config['manifold']
        with self.located('manifold', 'cross_section'):
            section = geometry.cross_section(manifold['cross_section'], manifold['lengths'])
        return section

    @cached_property
    def two_ends(self) -> bool:
        topology = self.config['manifold']['topology']
        with self.located('manifold', 'topology'):
            if topology not in (SINGLE, TWO_ENDS):
                raise ValueError(f'unknown topology {topology!r}; use {SINGLE!r} or '
                                 f'{TWO_ENDS!r}')
        return topology == TWO_ENDS

    def _end(self, key: str) -> geometry.EndSpec:
        manifold = self.config['manifold']
        r_start = 0.0 if self.two_ends else float(manifold['r_start'])
        with self.located('manifold', key):
            end = geometry.make_end(self.cross_section, manifold[key], r_start,
                                    manifold['expansive_from'])
        return end

    @cached_property
    def end(self) -> geometry.EndSpec:
        return self._end('warp')

    @cached_property
    def minus_end(self) -> geometry.EndSpec:
        if self.config['manifold']['warp_minus'] is None:
            return self.end
        return self._end('warp_minus')

    def manifold(self, boundary: Any = None) -> solver.ManifoldConfig:
        manifold = self.config['manifold']
        section = self.cross_section
        with self.located('manifold' if boundary is None else 'liouville', 'boundary'):
            data = solver.data_expression(
                self.required('manifold', 'boundary') if boundary is None else boundary,
                section)

        topology: solver.Topology
        if self.two_ends:
            with self.located('manifold', 'boundary_minus'):
                minus = solver.data_expression(manifold['boundary_minus'], section)
            topology = solver.TwoEnds(self.end, self.minus_end, data, minus)
        else:
            with self.located('manifold', 'inner'):
                inner = solver.data_expression(manifold['inner'], section)
            topology = solver.SingleEnd(self.end, data, inner)

        bounds = manifold['bounds']
        with self.located('manifold', 'bounds' if bounds is not None else None):
            config = solver.manifold_config(topology, tuple(bounds) if bounds else None)
        return config

    @cached_property
    def comparison(self) -> criteria.ComparisonWarp:
        comparison = self.config['comparison']
        end = self.end
        r0 = float(end.r_start if comparison['r0'] is None else comparison['r0'])
        options = dict(r_max=comparison['r_max'], budget=comparison['budget'])

        if comparison['warp'] is not None:
            with self.located('comparison', 'warp'):
                built = criteria.comparison_warp(str(comparison['warp']), r0, **options)
        elif comparison['a'] is not None:
            with self.located('comparison', 'a'):
                built = criteria.hyperbolic_comparison_warp(end, float(comparison['a']),
                                                            r_max=comparison['r_max'])
        else:
            with self.located('comparison'):
                built = criteria.radial_comparison(end, r0, **options)
        return built

    @cached_property
    def sample_grid(self) -> criteria.SampleGrid:
        sampling = self.config['sampling']
        return criteria.SampleGrid(int(sampling['omega_nodes']), int(sampling['radial_nodes']),
                                   sampling['r_max'], int(sampling['seed']))

    @cached_property
    def resolution(self) -> solver.Resolution:
        settings = self.config['solver']
        with self.located('solver', 'grading'):
            if settings['grading'] not in (solver.UNIFORM, solver.GRADED):
                raise ValueError(f'unknown grading {settings["grading"]!r}')
        with self.located('solver', 'method'):
            if settings['method'] not in (solver.DIRECT, solver.BICGSTAB):
                raise ValueError(f'unknown method {settings["method"]!r}')

        nodes = settings['omega_nodes']
        nodes = tuple(int(n) for n in nodes) if isinstance(nodes, (list, tuple)) else int(nodes)
        with self.located('solver', 'omega_nodes'):
            self.cross_section.counts(nodes)
        return solver.Resolution(nodes, float(settings['dr']), settings['grading'])

    @cached_property
    def schedule(self) -> Tuple[float, ...]:
        with self.located('exhaustion', 'schedule'):
            schedule = tuple(float(R) for R in self.config['exhaustion']['schedule'])
        return schedule

    @cached_property
    def probes(self) -> List[solver.Probe]:
        exhaustion = self.config['exhaustion']
        section = self.cross_section

        if exhaustion['probes'] is not None:
            with self.located('exhaustion', 'probes'):
                probes = [solver.Probe(tuple(float(w) for w in omega), float(r))
                          for omega, r in exhaustion['probes']]
                for probe in probes:
                    if len(probe.omega) != section.dimension:
                        raise ValueError(f'probe {probe.omega} needs {section.dimension} '
                                         f'coordinates {section.coords}')
            return probes

        r = exhaustion['probe_radius']
        r = self.end.r_start + 1.0 if r is None else float(r)
        rest = (0.0,) * (section.dimension - 1)
        return [solver.Probe((0.0,) + rest, r),
                solver.Probe((section.lengths[0] / 2,) + rest, r)]

    def solve_options(self) -> Dict[str, Any]:
        settings = self.config['solver']
        return dict(tol_exhaustion=float(self.config['exhaustion']['tolerance']),
                    resolution=self.resolution, tol=float(settings['tolerance']),
                    method=settings['method'], workers=int(settings['workers']))

    def write_field(self, field: solver.Field, stem: str) -> None:
        output = self.config['output']
        if output['csv']:
            export.write_csv(field, os.path.join(self.output, f'{stem}.csv'))
        if output['tensor']:
            export.write_tensor(field.values, os.path.join(self.output, f'{stem}.ends'))

    def write_result(self, result: solver.SolveResult, stem: str) -> None:
        output = self.config['output']
        export.write_solution(result, self.output, stem, output['csv'], output['tensor'])


def cmd_curvature(experiment: Experiment) -> Report:
    end = experiment.end
    settings = experiment.config['curvature']
    r_min = float(end.r_start if settings['r_min'] is None else settings['r_min'])
    r_max = float(r_min + 50.0 if settings['r_max'] is None else settings['r_max'])
    omega = end.cross_section.origin() if settings['omega'] is None else settings['omega']

    with experiment.located('curvature'):
        profile = geometry.curvature_sign_profile(end, r_min, r_max, int(settings['samples']),
                                                  omega)
        oracle = geometry.christoffel_curvature_oracle(end, omega, profile.radii)

    lines: Report = [('signs', profile.label),
                     ('k_min', float(profile.values.min())),
                     ('k_max', float(profile.values.max())),
                     ('summary', profile.summary()),
                     ('oracle_max_error', float(np.max(np.abs(oracle - profile.values))))]

    if settings['bound'] is not None:
        with experiment.located('curvature', 'bound'):
            bound = criteria.check_curvature_bound(end, settings['bound'], r_max=r_max)
        lines.extend([('bound_ok', bound.ok),
                      ('bound_excess', bound.max_excess),
                      ('bound_worst_r', bound.worst_r)])
    return lines


def cmd_criterion(experiment: Experiment) -> Report:
    end = experiment.end
    comparison = experiment.comparison
    with experiment.located('comparison', 'r0'):
        report = criteria.check_criterion(end, comparison, experiment.sample_grid)

    lines: Report = [('comparison', str(comparison.phi_bar)), ('r0', comparison.r0)]
    if not math.isnan(comparison.a):
        lines.extend([('hyperbolic_a', comparison.a), ('hyperbolic_alpha', comparison.alpha)])
    lines.extend(report.lines())

    try:
        sturm = criteria.sturm_checks(end, comparison)
    except (criteria.SturmError, WarpError) as exc:
        lines.append(('sturm', f'not applicable: {exc}'))
    else:
        lines.extend([('sturm', 'holds' if sturm.holds else 'violated'),
                      ('sturm_violation', sturm.violation)])
    return lines


def cmd_barrier_audit(experiment: Experiment) -> Report:
    end = experiment.end
    settings = experiment.config['barrier']
    comparison = experiment.comparison
    section = end.cross_section

    grid = barriers.AuditGrid(int(settings['omega_nodes']), int(settings['radial_nodes']),
                              float(settings['r_max']), settings['r_min'])
    r_grid = np.linspace(comparison.r0, max(grid.r_max, comparison.r0 + 1.0),
                         int(settings['sigma_nodes']))

    lines: Report = []
    with experiment.located('barrier'):
        if section.dimension == 1:
            center = settings['center'] or section.origin()
            barrier = barriers.barrier_2d(float(center[0]), comparison,
                                          r_grid)  # type: ignore[arg-type]
            lines.append(('barrier', 'circle'))
        else:
            chart = barriers.cap_chart(section, settings['center'], settings['half_widths'],
                                       settings['psi'])
            if chart.psi is not None:
                rescaled = barriers.check_conformal_hypotheses(chart, end, comparison)
                lines.extend([('conformal_eta', chart.eta),
                              ('conformal_verdict', rescaled.overall)])
            barrier = barriers.build_barrier(chart._replace(psi=None, eta=1.0), comparison,
                                             r_grid)  # type: ignore[arg-type]
            lines.append(('barrier', 'cap'))

    lines.extend([('lambda1', barrier.eig.lambda1),
                  ('A', barrier.A),
                  ('audit_r_min', barrier.audit_r_min)])

    reports = barriers.refine_audit(barrier, end, grid, int(settings['levels']),
                                    float(settings['tolerance']))
    for level, report in enumerate(reports):
        lines.extend(report.lines(f'level{level}_'))
        lines.extend((f'level{level}_note', note) for note in report.notes)

    orders = [report.order for report in reports[1:]]
    lines.append(('order_min', min(orders) if orders else math.nan))
    lines.append(('value_at_r_max', float(barrier(barrier.chart.center, grid.r_max))))

    if settings['rho'] is not None:
        with experiment.located('barrier', 'rho'):
            observed, bound = barriers.positivity_margin(barrier, float(settings['rho']),
                                                         grid.r_max)
        lines.extend([('positivity_min', observed),
                      ('positivity_bound', bound),
                      ('positivity_ok', observed >= bound)])

    lines.append(('passed', all(report.passed for report in reports)))
    return lines


def cmd_solve(experiment: Experiment) -> Report:
    config = experiment.manifold()
    settings = experiment.config['solver']
    R = float(settings['R'] if settings['R'] is not None else experiment.schedule[-1])

    problem = solver.assemble(config, R, experiment.resolution)
    solution = solver.solve(problem, float(settings['tolerance']), settings['method'])
    field = solution.field
    ok = solver.within_bounds(field, config.bounds)
    experiment.write_field(field, 'solve')

    return [('R', R),
            ('unknowns', problem.matrix.shape[0]),
            ('residual', solution.residual),
            ('constant_residual', problem.constant_residual()),
            ('bounds', 'ok' if ok else 'violated'),
            ('min_u', float(field.values.min())),
            ('max_u', float(field.values.max())),
            ('probe_values', tuple(field.probe(experiment.probes)))]


def cmd_exhaust(experiment: Experiment) -> Report:
    result = solver.exhaust(experiment.manifold(), experiment.schedule, experiment.probes,
                            **experiment.solve_options())
    experiment.write_result(result, 'exhaust')
    return result.lines()


def cmd_liouville(experiment: Experiment) -> Report:
    settings = experiment.config['liouville']
    boundary = settings['boundary']
    config = experiment.manifold(boundary)
    data = boundary if boundary is not None else experiment.config['manifold']['boundary']

    with experiment.located('liouville', 'distinguished'):
        if settings['distinguished'] not in ('plus', 'minus'):
            raise ValueError(f'unknown end {settings["distinguished"]!r}')
    witness = solver.liouville_witness(config, str(data), experiment.probes,
                                       experiment.schedule, settings['distinguished'],
                                       **experiment.solve_options())
    experiment.write_result(witness.result, 'liouville')
    return witness.lines()


COMMANDS: Dict[str, Callable[[Experiment], Report]] = {
    'curvature': cmd_curvature,
    'criterion': cmd_criterion,
    'barrier-audit': cmd_barrier_audit,
    'solve': cmd_solve,
    'exhaust': cmd_exhaust,
    'liouville': cmd_liouville,
}


def _matches(got: Any, wanted: Any) -> bool:
    if isinstance(wanted, tuple) and len(wanted) == 2 and not isinstance(got, (str, tuple)):
        lo, hi = wanted
        try:
            return bool(lo <= float(got) <= hi)
        except (TypeError, ValueError):
            return False
    return bool(got == wanted)


def check_expectations(report: Report, expected: Mapping[str, Any],
                       strict: bool = False) -> List[str]:
    """Failed expectations as 'key: got X, expected Y' messages"""
    values = dict(report)
    failures = []
    for key, wanted in expected.items():
        if key not in values:
            if strict:
                failures.append(f'{key}: not reported, expected {format_value(wanted)}')
            else:
                LOG.warning('Expectation on %s skipped: not reported', key)
            continue
        if not _matches(values[key], wanted):
            failures.append(f'{key}: got {format_value(values[key])}, '
                            f'expected {format_value(wanted)}')
    return failures


def init_logging(args):
    fmt = '%(asctime)s %(threadName)s %(levelname)s %(name)s: %(message)s'
    if args.log == '-':
        logging.basicConfig(stream=sys.stderr, level=logging.ERROR, format=fmt)
    else:
        path = expand(args.log)
        os.makedirs(os.path.dirname(path), exist_ok=True)
        logging.basicConfig(filename=path, level=logging.ERROR, format=fmt)
    LOG.setLevel(args.log_level)


def parse_args(args=None) -> argparse.Namespace:
    p = argparse.ArgumentParser(prog='warpends')
    p.add_argument('command', choices=sorted(COMMANDS),
                   help='Experiment to run')
    p.add_argument('--config', '-c', default=None,
                   help='Config file or bundled experiment name (default: built-in defaults)')
    p.add_argument('--out', '-o', default=None,
                   help='Output directory (default: Output.directory of the config)')
    p.add_argument('--resolution', type=int, default=None,
                   help='Cross-section nodes per direction for the solver')
    p.add_argument('--seed', type=int, default=None,
                   help='Seed of the criterion sampling grid')
    p.add_argument('--expect-strict', action='store_true',
                   help='Fail expectations on values the command does not report')
    p.add_argument('--log', '-l', default='$HOME/.warpends/log.txt',
                   help='Log file, - for stderr (default: $HOME/.warpends/log.txt)')
    p.add_argument('--debug', '-d', dest='log_level', action='store_const',
                   const=logging.DEBUG, default=logging.INFO,
                   help='Enable debug logging')
    return p.parse_args(args)


def run(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    if args.out is not None:
        override(config, 'output', directory=args.out)
    if args.resolution is not None:
        override(config, 'solver', omega_nodes=args.resolution)
    if args.seed is not None:
        override(config, 'sampling', seed=args.seed)

    experiment = Experiment(config)
    LOG.info('Running %s with %s', args.command, experiment.path or 'default config')
    report = COMMANDS[args.command](experiment)

    expected = config['expect'].get(args.command.replace('-', '_'), {})
    failures = check_expectations(report, expected, args.expect_strict)
    if expected:
        report = report + [('expect', 'failed' if failures else 'ok')]
    report.extend(('expect_failure', failure) for failure in failures)

    text = format_report(report)
    sys.stdout.write(text)
    os.makedirs(experiment.output, exist_ok=True)
    with open(os.path.join(experiment.output, f'{args.command}.txt'), 'w') as f:
        f.write(text)
    dump_config(config, os.path.join(experiment.output, 'config.py'))

    for failure in failures:
        LOG.error('Expectation failed: %s', failure)
    return EXIT_EXPECT if failures else EXIT_OK


def main(args=None) -> int:
    args = parse_args(args)
    init_logging(args)

    try:
        return run(args)
    except (ValueError, RuntimeError) as exc:
        LOG.error('%s failed: %s', args.command, exc)
        sys.stderr.write(f'error: {exc}\n')
        return EXIT_ERROR


if __name__ == '__main__':
    sys.exit(main())
