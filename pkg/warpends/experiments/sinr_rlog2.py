"""phi = sin r + r log^2 r: curvature of both signs, yet the Dirichlet problem is solvable"""


class Manifold:
    cross_section = 'circle'
    warp = 'sin(r) + r * log(r)^2'
    r_start = 2.0
    boundary = 'cos(theta)'
    inner = '0'


class Curvature:
    r_min = 10.0
    r_max = 500.0
    samples = 1000


class Barrier:
    r_max = 40.0


class Solver:
    omega_nodes = 16
    dr = 0.05
    grading = 'graded'


class Exhaustion:
    schedule = (1e2, 1e4, 1e8, 1e16, 1e32, 1e64)
    probe_radius = 3.0
    tolerance = 1e-2


class Output:
    directory = 'warpends-out/sinr_rlog2'


class Expect:
    curvature = {'signs': 'both', 'summary': 'both signs present on [10,500]'}
    criterion = {'verdict': 'Solvable', 'integral': 'Convergent'}
    barrier_audit = {'passed': True}
    exhaust = {'verdict': 'Converged', 'bounds': 'ok'}
