"""Grid realizations of the differential operators.

Everything here is a dense or banded matrix on a uniform grid with Dirichlet
boundaries.  Conventions shared by the rest of the package:

* spinor (x) grid ordering: a grid spinor v has layout
  ``v = [upper component (N values), lower component (N values)]``,
  i.e. operators are built with ``np.kron(spinor_2x2, grid_NxN)``.
* quadrature: uniform-weight sum h*sum(...), equal to the trapezoid rule up
  to boundary terms that vanish for Dirichlet-decayed functions.
* stencils: fourth-order central differences.  The first-derivative matrix
  is exactly antisymmetric and the second-derivative matrix exactly
  symmetric, so discrete adjoints are exact transposes.

The key factorized structure: with M(x) = p_y - e W(x) and the ladder
operators

    A  = D1 + M,        A^T = -D1 + M,

the spatial Dirac operator ("bold" gamma.Pi, the one entering
H = gamma^0 (gamma.Pi + m)) is

    X = kron(gamma^1, -i D1) + kron(gamma^2, M)
      = [[0, A], [-A^T, 0]]          (first representation)
      = [[0, -A^T], [A, 0]]          (second representation)

which is exactly real antisymmetric for both representations, and
Pi-tilde^2 = (gamma^0 X)^2 = -X^2 is block diagonal with the partner
Hamiltonians -d^2/dx^2 + V_sigma on the two spinor slots (which slot hosts
which channel depends on the representation).
"""

from __future__ import annotations

import numpy as np

from .clifford import GammaRep
from .field_profiles import FieldProfile, evaluate_potential, susy_partner_potentials

__all__ = [
    "first_derivative",
    "second_derivative_banded",
    "channel_hamiltonian_banded",
    "kinetic_diagonal",
    "gamma_dot_pi_spatial",
    "pi_tilde_squared",
    "dirac_hamiltonian",
    "gamma_dot_pi_full",
    "channel_slots",
    "GridOperators",
    "build_operators",
]

# ----------------------------------------------------------------------
# finite-difference stencils
# ----------------------------------------------------------------------


def first_derivative(N: int, h: float) -> np.ndarray:
    """Fourth-order central first derivative, exactly antisymmetric (Dirichlet)."""
    D = np.zeros((N, N))
    c1 = 8.0 / (12.0 * h)
    c2 = -1.0 / (12.0 * h)
    idx = np.arange(N)
    D[idx[:-1], idx[:-1] + 1] = c1
    D[idx[1:], idx[1:] - 1] = -c1
    D[idx[:-2], idx[:-2] + 2] = c2
    D[idx[2:], idx[2:] - 2] = -c2
    return D


def second_derivative_banded(N: int, h: float) -> np.ndarray:
    """Fourth-order -d^2/dx^2 in LAPACK lower-banded form, shape (3, N)."""
    ab = np.zeros((3, N))
    ab[0, :] = 30.0 / (12.0 * h * h)
    ab[1, :] = -16.0 / (12.0 * h * h)
    ab[2, :] = 1.0 / (12.0 * h * h)
    return ab


def channel_hamiltonian_banded(V: np.ndarray, h: float) -> np.ndarray:
    """Banded form of H = -d^2/dx^2 + diag(V)."""
    ab = second_derivative_banded(V.size, h)
    ab[0, :] += V
    return ab


def banded_to_dense(ab: np.ndarray) -> np.ndarray:
    """Expand a symmetric lower-banded matrix to a dense one."""
    N = ab.shape[1]
    H = np.diag(ab[0])
    for k in range(1, ab.shape[0]):
        H += np.diag(ab[k, : N - k], -k) + np.diag(ab[k, : N - k], k)
    return H


# ----------------------------------------------------------------------
# gauge-covariant building blocks
# ----------------------------------------------------------------------


def kinetic_diagonal(profile: FieldProfile, p_y: float, e: float, x: np.ndarray) -> np.ndarray:
    """M(x) = p_y - e W(x), the y-momentum shifted by the gauge function."""
    W, _ = evaluate_potential(profile, x)
    return p_y - e * W


def _realify(mat: np.ndarray) -> np.ndarray:
    """Drop a numerically zero imaginary part (sanity-checked)."""
    if np.iscomplexobj(mat):
        imax = float(np.abs(mat.imag).max()) if mat.size else 0.0
        if imax > 1e-12:
            raise AssertionError(f"operator expected real, max imag {imax}")
        return np.ascontiguousarray(mat.real)
    return mat


def channel_slots(rep: GammaRep) -> dict:
    """Map spin channel sigma -> spinor slot index for this representation.

    Pi-tilde^2 = -X^2 is diag(H_+, H_-) in the first representation and
    diag(H_-, H_+) in the second, so sigma=+1 lives on slot 0 ("first")
    or slot 1 ("second").
    """
    if rep.variant == "first":
        return {+1: 0, -1: 1}
    return {+1: 1, -1: 0}


def gamma_dot_pi_spatial(rep: GammaRep, D1: np.ndarray, M: np.ndarray) -> np.ndarray:
    """X = kron(gamma^1, -i D1) + kron(gamma^2, diag(M)); real antisymmetric."""
    X = np.kron(rep.gamma[1], -1j * D1) + np.kron(rep.gamma[2], np.diag(M))
    return _realify(X)


def pi_tilde_squared(
    rep: GammaRep, profile: FieldProfile, p_y: float, e: float, x: np.ndarray, h: float
) -> np.ndarray:
    """Dense (2N)x(2N) realization of Pi-tilde^2 = Pi^2 - e sigma_3-like W'.

    Built from the solved channel form blockdiag(-D2 + V_sigma) with the
    slot assignment of the representation.
    """
    Vp, Vm = susy_partner_potentials(profile, p_y, e)
    slots = channel_slots(rep)
    N = x.size
    out = np.zeros((2 * N, 2 * N))
    for sigma, V in ((+1, Vp), (-1, Vm)):
        s = slots[sigma]
        out[s * N:(s + 1) * N, s * N:(s + 1) * N] = banded_to_dense(
            channel_hamiltonian_banded(V(x), h)
        )
    return out


def dirac_hamiltonian(rep: GammaRep, X: np.ndarray, m: float) -> np.ndarray:
    """H_D = gamma^0 (gamma.Pi + m) on the grid; real symmetric."""
    N2 = X.shape[0]
    G0 = _realify(np.kron(rep.gamma[0], np.eye(N2 // 2)))
    return G0 @ (X + m * np.eye(N2))


def gamma_dot_pi_full(rep: GammaRep, X: np.ndarray, p0: float) -> np.ndarray:
    """Covariant contraction gamma.Pi = gamma^0 p0 - X at fixed energy p0."""
    N2 = X.shape[0]
    G0 = _realify(np.kron(rep.gamma[0], np.eye(N2 // 2)))
    return p0 * G0 - X


# ----------------------------------------------------------------------
# one-stop bundle
# ----------------------------------------------------------------------


class GridOperators:
    """Precomputed grid operators for one (rep, profile, p_y, e, grid) combo.

    Attributes: x, h, w (quadrature weights), D1, M, A (=D1+M), X, G0,
    PiTilde2.  All real dense arrays.
    """

    def __init__(self, rep: GammaRep, profile: FieldProfile, p_y: float, e: float, grid):
        self.rep = rep
        self.profile = profile
        self.p_y = float(p_y)
        self.e = float(e)
        self.grid = grid
        x = grid.x
        h = grid.h
        self.x, self.h = x, h
        self.w = np.full(x.size, h)
        self.D1 = first_derivative(x.size, h)
        self.M = kinetic_diagonal(profile, p_y, e, x)
        self.A = self.D1 + np.diag(self.M)
        self.X = gamma_dot_pi_spatial(rep, self.D1, self.M)
        self.G0 = _realify(np.kron(rep.gamma[0], np.eye(x.size)))
        self.PiTilde2 = pi_tilde_squared(rep, profile, p_y, e, x, h)

    def dirac_hamiltonian(self, m: float) -> np.ndarray:
        return dirac_hamiltonian(self.rep, self.X, m)

    def gamma_dot_pi(self, p0: float) -> np.ndarray:
        return gamma_dot_pi_full(self.rep, self.X, p0)


def build_operators(rep, profile, p_y, e, grid) -> GridOperators:
    return GridOperators(rep, profile, p_y, e, grid)
