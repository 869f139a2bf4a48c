"""Independent reference implementations used by the tests.

Nothing here imports the code under test beyond plain data types.
"""
import numpy as np


def random_spd(rng, dim, kappa):
    """Random SPD matrix with spectrum in [1/kappa, 1], both ends attained."""
    q, _ = np.linalg.qr(rng.normal(size=(dim, dim)))
    lam = np.concatenate([[1.0 / kappa, 1.0], rng.uniform(1.0 / kappa, 1.0, dim - 2)])
    return (q * lam) @ q.T


def plane_stress_D(E, nu):
    return E / (1 - nu * nu) * np.array([[1, nu, 0], [nu, 1, 0], [0, 0, (1 - nu) / 2]])


def quad_stiffness_gauss(coords, E, nu, thickness=1.0, order=4):
    """Bilinear quad stiffness by ``order``-point Gauss-Legendre in each direction."""
    pts, wts = np.polynomial.legendre.leggauss(order)
    D = plane_stress_D(E, nu)
    K = np.zeros((8, 8))
    for xi, wx in zip(pts, wts):
        for eta, we in zip(pts, wts):
            dN = 0.25 * np.array([
                [-(1 - eta), (1 - eta), (1 + eta), -(1 + eta)],
                [-(1 - xi), -(1 + xi), (1 + xi), (1 - xi)],
            ])
            J = dN @ coords
            dNx = np.linalg.solve(J, dN)
            B = np.zeros((3, 8))
            B[0, 0::2] = dNx[0]
            B[1, 1::2] = dNx[1]
            B[2, 0::2] = dNx[1]
            B[2, 1::2] = dNx[0]
            K += B.T @ D @ B * np.linalg.det(J) * wx * we * thickness
    return K


def qsp_matrix_product(phases, x):
    """``e^{i phi_0 Z} W(x) e^{i phi_1 Z} ... W(x) e^{i phi_d Z}`` as explicit 2x2 products."""
    s = np.sqrt(1 - x * x)
    W = np.array([[x, 1j * s], [1j * s, x]])
    U = np.diag([np.exp(1j * phases[0]), np.exp(-1j * phases[0])])
    for p in phases[1:]:
        U = U @ W @ np.diag([np.exp(1j * p), np.exp(-1j * p)])
    return U


def cheb_project(values_fn, degree, n=4096):
    """Chebyshev coefficients by Gauss-Chebyshev quadrature (independent of the fitter)."""
    k = np.arange(n)
    theta = np.pi * (k + 0.5) / n
    v = values_fn(np.cos(theta))
    c = np.array([2.0 / n * np.sum(v * np.cos(j * theta)) for j in range(degree + 1)])
    c[0] /= 2
    return c
