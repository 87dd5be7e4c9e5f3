"""phi = exp(2r) over a flat torus: a cusp-like end of curvature -4"""


class Manifold:
    cross_section = 'torus'
    warp = 'exp(2 * r)'
    r_start = 0.0
    boundary = 'cos(u)'
    inner = '0'


class Curvature:
    r_min = 0.0
    r_max = 10.0


class Solver:
    omega_nodes = (16, 4)
    dr = 0.1


class Exhaustion:
    schedule = (2.0, 3.0, 4.0, 5.0)
    probe_radius = 1.0


class Output:
    directory = 'warpends-out/exp2r'


class Expect:
    curvature = {'signs': 'negative',
                 'k_min': (-4.000001, -3.999999),
                 'k_max': (-4.000001, -3.999999)}
    criterion = {'verdict': 'Solvable', 'integral': 'Convergent'}
    exhaust = {'verdict': 'Converged', 'bounds': 'ok'}
