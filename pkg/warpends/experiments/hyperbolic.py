"""Hyperbolic space as a warped product over a flat torus: curvature -1 everywhere"""


class Manifold:
    cross_section = 'torus'
    warp = 'sinh(r)'
    r_start = 1.0
    boundary = 'cos(u)'
    inner = '0'


class Curvature:
    r_min = 1.0
    r_max = 20.0


class Barrier:
    omega_nodes = 17
    radial_nodes = 65
    r_max = 8.0
    levels = 3
    rho = 0.5


class Solver:
    omega_nodes = (16, 4)
    dr = 0.1


class Exhaustion:
    schedule = (4.0, 6.0, 8.0, 10.0)
    probe_radius = 2.0


class Output:
    directory = 'warpends-out/hyperbolic'


class Expect:
    curvature = {'signs': 'negative',
                 'k_min': (-1.000001, -0.999999),
                 'k_max': (-1.000001, -0.999999)}
    criterion = {'verdict': 'Solvable', 'integral': 'Convergent'}
    barrier_audit = {'passed': True, 'order_min': (1.8, 2.5), 'positivity_ok': True}
    solve = {'bounds': 'ok'}
    exhaust = {'verdict': 'Converged', 'bounds': 'ok'}
