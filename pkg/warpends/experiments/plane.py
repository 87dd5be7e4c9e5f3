"""The flat plane outside the unit disc: parabolic, bounded harmonic functions forget f"""


class Manifold:
    cross_section = 'circle'
    warp = 'r'
    r_start = 1.0
    boundary = 'cos(theta)'
    inner = '0'


class Curvature:
    r_min = 1.0
    r_max = 100.0


class Solver:
    omega_nodes = 64
    dr = 0.05


class Exhaustion:
    schedule = (4.0, 8.0, 16.0, 32.0)
    probe_radius = 2.0


class Output:
    directory = 'warpends-out/plane'


class Expect:
    curvature = {'signs': 'zero'}
    criterion = {'verdict': 'NotEstablished', 'integral': 'Divergent'}
    solve = {'bounds': 'ok'}
    exhaust = {'verdict': 'NotConverged', 'bounds': 'ok'}
