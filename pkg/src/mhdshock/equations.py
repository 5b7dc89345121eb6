"""Pointwise evaluation of the steady cylindrical MHD system.

Fields come in the order (U1, U2, U3, P, S, kappa). The caller passes values
and first derivatives (radial, d/dtheta, d/dx3); density, field and
Bernoulli derivatives are formed by the chain rule. The rows are affine in
the radial derivatives, which the upstream marcher uses to extract the
coefficient matrix.
"""
import numpy as np

NAMES = ("U1", "U2", "U3", "P", "S", "kappa")


def _rho_d(rho, P, S, dP, dS, g):
    return rho * (dP / (g * P) - dS / (g * S))


def cyl_rows(r, f, dr, dt, dz, gamma):
    U1, U2, U3, P, S, K = f
    g = gamma
    rho = (P / S) ** (1.0 / g)
    U = (U1, U2, U3)

    def dens(d):
        return _rho_d(rho, P, S, d[3], d[4], g)

    def H(d, j):
        # derivative of kappa rho U_j
        return K * rho * d[j] + rho * U[j] * d[5] + K * U[j] * dens(d)

    def bern(d):
        drho = dens(d)
        return (U1 * d[0] + U2 * d[1] + U3 * d[2]
                + g / (g - 1.0) * (d[3] / rho - P * drho / rho ** 2))

    rdt = [x / r for x in dt]          # (1/r) d/dtheta
    adv = [U1 * dr[i] + U2 * rdt[i] + U3 * dz[i] for i in range(6)]
    H0 = [K * rho * u for u in U]
    # curl of h = kappa rho u in cylindrical components
    om1 = H(rdt, 2) - H(dz, 1)
    om2 = H(dz, 0) - H(dr, 2)
    om3 = H(dr, 1) + H0[1] / r - H(rdt, 0)
    cont = (rho * dr[0] + U1 * dens(dr) + rho * U1 / r
            + rho * rdt[1] + U2 * dens(rdt) + rho * dz[2] + U3 * dens(dz))
    m1 = adv[0] + dr[3] / rho - U2 * U2 / r - (-K * U2 * om3 + K * U3 * om2)
    m2 = adv[1] + rdt[3] / rho + U1 * U2 / r - (K * U1 * om3 - K * U3 * om1)
    m3 = adv[2] + dz[3] / rho - (K * U2 * om1 - K * U1 * om2)
    bb = U1 * bern(dr) + U2 * bern(rdt) + U3 * bern(dz)
    kk = adv[5]
    return [cont, m1, m2, m3, bb, kk]


def radial_system(r, f, dt, dz, gamma):
    """Coefficient matrix A and right side b with rows = A @ dr - b.

    Shapes: A (..., 6, 6), b (..., 6). The seven evaluations (zero slope and
    the six unit slopes) are done in one broadcast call.
    """
    eye = np.vstack([np.zeros(6), np.eye(6)])
    nd = np.ndim(f[0])
    dr = [eye[:, j].reshape((7,) + (1,) * nd) for j in range(6)]
    rows = cyl_rows(r, f, dr, dt, dz, gamma)
    rows = [np.broadcast_to(x, (7,) + np.shape(f[0])) for x in rows]
    R = np.stack(rows, axis=-1)                  # (7, ..., 6 rows)
    A = np.stack([R[1 + j] - R[0] for j in range(6)], axis=-1)
    b = -R[0]
    return A, b
