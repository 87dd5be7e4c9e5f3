"""phi = 2 sinh(r/2 + 1): constant curvature -1/4, compared through the hyperbolic warp"""


class Manifold:
    cross_section = 'torus'
    warp = '2 * sinh(0.5 * r + 1)'
    r_start = 0.0
    boundary = 'cos(u) * cos(v)'


class Comparison:
    a = 0.5


class Curvature:
    r_min = 0.0
    r_max = 30.0


class Output:
    directory = 'warpends-out/alpha_sinh'


class Expect:
    curvature = {'signs': 'negative',
                 'k_min': (-0.2500001, -0.2499999),
                 'k_max': (-0.2500001, -0.2499999)}
    criterion = {'verdict': 'Solvable', 'hyperbolic_a': (0.4999999, 0.5000001)}
