"""phi = r log^2 r in two dimensions: the barrier 1 - sigma cos(theta) is harmonic"""


class Manifold:
    cross_section = 'circle'
    warp = 'r * log(r)^2'
    r_start = 2.0
    boundary = 'cos(theta)'
    inner = '0'


class Barrier:
    omega_nodes = 33
    radial_nodes = 129
    r_max = 60.0
    rho = 0.5


class Output:
    directory = 'warpends-out/rlog2_2d'


class Expect:
    curvature = {'signs': 'negative'}
    criterion = {'verdict': 'Solvable', 'integral': 'Convergent'}
    barrier_audit = {'passed': True, 'order_min': (1.8, 2.5), 'positivity_ok': True}
