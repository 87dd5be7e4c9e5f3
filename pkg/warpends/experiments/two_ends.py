"""Two hyperbolic ends phi = cosh r glued at r = 0: bounded harmonic functions abound"""


class Manifold:
    cross_section = 'torus'
    topology = 'two_ends'
    warp = 'cosh(r)'
    boundary = '1 + cos(u)'
    boundary_minus = '0'


class Comparison:
    r0 = 1.0


class Curvature:
    r_min = 0.0
    r_max = 20.0


class Solver:
    omega_nodes = (16, 4)
    dr = 0.1


class Exhaustion:
    schedule = (3.0, 4.0, 5.0, 6.0, 7.0)
    probe_radius = 1.0


class Liouville:
    boundary = '1 + cos(u)'


class Output:
    directory = 'warpends-out/two_ends'


class Expect:
    curvature = {'signs': 'negative',
                 'k_min': (-1.000001, -0.999999),
                 'k_max': (-1.000001, -0.999999)}
    criterion = {'verdict': 'Solvable'}
    exhaust = {'verdict': 'Converged', 'bounds': 'ok'}
    liouville = {'witness': 'nonconstant', 'verdict': 'Converged', 'bounds': 'ok'}
