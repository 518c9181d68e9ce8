"""Reference computations that share no code with the package under test."""
from __future__ import annotations

import math

import numpy as np


def stepping_closest_approach(p_os, v_os, p_tv, v_tv, t_lo, t_hi, dt=0.01):
    """Brute-force (time, distance) of minimum separation on a time grid."""
    t = np.arange(t_lo, t_hi + dt, dt)
    dn = (p_tv[0] - p_os[0]) + t * (v_tv[0] - v_os[0])
    de = (p_tv[1] - p_os[1]) + t * (v_tv[1] - v_os[1])
    d = np.hypot(dn, de)
    k = int(np.argmin(d))
    return float(t[k]), float(d[k])


def compass_velocity(speed, heading_deg):
    h = math.radians(heading_deg)
    return speed * math.cos(h), speed * math.sin(h)


def fillet_radius(radius_of_acceptance, course_change_deg):
    """Radius of the circle tangent to both legs at distance R_i from the corner.

    The legs meet at interior angle pi - delta; the tangent length from the
    corner is R_i, so the fillet radius is R_i * tan((pi - delta) / 2).
    """
    delta = math.radians(course_change_deg)
    return radius_of_acceptance * math.tan(0.5 * (math.pi - delta))


def ellipse_quadrant_area(a, b, r_min, theta):
    """Area of {ellipse minus disk} between polar angles 0 and theta, by quadrature."""
    from scipy.integrate import quad

    def integrand(t):
        r = a * b / math.hypot(b * math.cos(t), a * math.sin(t))
        return 0.5 * (r * r - r_min * r_min)

    return quad(integrand, 0.0, theta, epsabs=1e-12, epsrel=1e-12)[0]


def brute_nearest(points, q):
    best, best_d = None, math.inf
    for i, (n, e) in enumerate(points):
        d = math.hypot(n - q[0], e - q[1])
        if d < best_d:
            best, best_d = i, d
    return best


def domain_form(os_n, os_e, tv_n, tv_e, tv_heading, a_sd, b_sd):
    """Left-hand side of the elliptical comfort-zone test, written out directly."""
    dn = os_n - tv_n
    de = os_e - tv_e
    along = dn * math.cos(tv_heading) + de * math.sin(tv_heading)
    across = -dn * math.sin(tv_heading) + de * math.cos(tv_heading)
    return (along / (a_sd / 2)) ** 2 + (across / (b_sd / 2)) ** 2
