"""Phase-twisted transition matrices and their spectral analysis.

For integer frequency m, the matrix A_m has entries

    A_m[k, j] = p(j|k) * exp(-2 pi i m log2 p(j|k))

(zero where the transition is impossible) and the companion vector c_m has
entries p_k * exp(-2 pi i m log2 p_k).  Powers of A_m generate the
characteristic function of -log2 mu(X^n):

    E{exp(-2 pi i m log2 mu(X^n))} = c_m^T A_m^(n-1) d,    d = (1, ..., 1)^T.

Because the entries of the stochastic matrix P are the moduli of the entries
of A_m, the spectral radius rho(A_m) never exceeds 1, and it equals 1 exactly
when A_m is similar to exp(2 pi i s) P under a diagonal phase matrix
diag(exp(2 pi i w_j)).  Scanning m for rho(A_m) = 1 separates the oscillatory
redundancy mode from the convergent one and yields the phase s and weights w.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DefectiveMatrix, ReducibleChain
from .exact import ZERO, ExactProb, frac_part, wrap_unit
from .sources import MarkovSource, classify_structure

MAX_EIGEN_DIM = 16
UNIT_RADIUS_TOL_EXACT = 1e-9
UNIT_RADIUS_TOL_FLOAT = 1e-6


def _phase_mod1(v, m: int) -> float:
    """Fractional part of -m * log2(p) computed from exact pieces if possible."""
    if isinstance(v, ExactProb):
        rat = frac_part(Fraction(-m) * v.exp2)
        irr = -m * (math.log2(v.mantissa.numerator) - math.log2(v.mantissa.denominator))
        return (float(rat) + irr) % 1.0
    return (-m * math.log2(v)) % 1.0


def phase_matrix(source: MarkovSource, m: int) -> np.ndarray:
    """A_m; reduces to the plain transition matrix at m = 0."""
    r = source.r
    out = np.zeros((r, r), dtype=complex)
    for k in range(r):
        for j in range(r):
            v = source.transitions[k][j]
            if v is ZERO:
                continue
            p = source.prob_float(v)
            if m == 0:
                out[k, j] = p
            else:
                out[k, j] = p * cmath.exp(2j * math.pi * _phase_mod1(v, m))
    return out


def initial_phase_vector(source: MarkovSource, m: int) -> np.ndarray:
    """c_m built from the initial state probabilities."""
    out = np.zeros(source.r, dtype=complex)
    for k, v in enumerate(source.initial):
        if v is ZERO:
            continue
        p = source.prob_float(v)
        out[k] = p if m == 0 else p * cmath.exp(2j * math.pi * _phase_mod1(v, m))
    return out


@dataclass(frozen=True)
class SpectralReport:
    """Eigenvalues sorted by non-increasing modulus with bi-orthonormal vectors.

    Ties in modulus are broken by ascending principal argument in [0, 2 pi).
    right[:, j] and left[j, :] satisfy left[j] @ right[:, j] == 1 and
    left[j] @ right[:, k] == 0 for j != k, so sum_j lam_j r_j l_j^T
    reconstructs the matrix.
    """

    eigenvalues: np.ndarray
    right: np.ndarray
    left: np.ndarray

    def spectral_radius(self) -> float:
        return float(np.abs(self.eigenvalues[0]))

    def apply_power(self, n_minus_1: int, d: np.ndarray) -> np.ndarray:
        """A^(n-1) d through the spectral representation."""
        coeffs = self.eigenvalues**n_minus_1 * (self.left @ d)
        return self.right @ coeffs

    def to_json_dict(self) -> dict:
        return {
            "eigenvalues": [[z.real, z.imag] for z in self.eigenvalues],
            "right": [[[z.real, z.imag] for z in col] for col in self.right.T],
            "left": [[[z.real, z.imag] for z in row] for row in self.left],
        }


def eigen(matrix: np.ndarray, cond_limit: float = 1e10) -> SpectralReport:
    """Full eigen-decomposition with left vectors from the inverse basis.

    Raises DefectiveMatrix when the eigenvector basis is too ill-conditioned
    to bi-orthogonalize; callers then fall back to direct matrix powers.
    """
    matrix = np.asarray(matrix, dtype=complex)
    r = matrix.shape[0]
    if matrix.shape != (r, r) or r > MAX_EIGEN_DIM:
        raise ValueError(f"expected a square matrix with r <= {MAX_EIGEN_DIM}")
    vals, right = np.linalg.eig(matrix)
    if not np.all(np.isfinite(right)) or np.linalg.cond(right) > cond_limit:
        raise DefectiveMatrix("eigenvector basis is numerically defective")
    left = np.linalg.inv(right)
    order = sorted(
        range(r),
        key=lambda j: (-round(abs(vals[j]), 12), round(np.angle(vals[j]) % (2 * math.pi), 12)),
    )
    vals = vals[order]
    right = right[:, order]
    left = left[order, :]
    recon = (right * vals) @ left
    scale = max(1.0, float(np.abs(matrix).max()))
    if np.abs(recon - matrix).max() > 1e-8 * scale:
        raise DefectiveMatrix("spectral reconstruction residual too large")
    return SpectralReport(eigenvalues=vals, right=right, left=left)


def spectral_radius(matrix: np.ndarray) -> float:
    return float(np.abs(np.linalg.eigvals(matrix)).max())


def char_fn(source: MarkovSource, m: int, n: int, mode: str = "direct") -> complex:
    """E{exp(-2 pi i m log2 mu(X^n))} via matrix powers or the eigenbasis."""
    if n < 1:
        raise ValueError("block length must be >= 1")
    A = phase_matrix(source, m)
    c = initial_phase_vector(source, m)
    if mode == "direct":
        v = c.copy()
        for _ in range(n - 1):
            v = v @ A
        return complex(v.sum())
    if mode == "spectral":
        rep = eigen(A)
        d = np.ones(source.r, dtype=complex)
        coeffs = rep.eigenvalues ** (n - 1) * (rep.left @ d) * (c @ rep.right)
        return complex(coeffs.sum())
    raise ValueError(f"unknown mode {mode!r}")


@dataclass(frozen=True)
class OscillationSearch:
    """Outcome of scanning m = 1..m_max for a unit spectral radius.

    order is None when no frequency hit within the scan budget; that outcome
    only means "no oscillation detected up to m_max" and is therefore always
    heuristic, never a proof of the convergent mode.
    """

    order: int | None
    phase: float | None
    weights: tuple | None
    heuristic: bool
    rho_history: tuple

    @property
    def is_infinite(self) -> bool:
        return self.order is None


def default_unit_radius_tol(source: MarkovSource) -> float:
    return UNIT_RADIUS_TOL_EXACT if source.exact else UNIT_RADIUS_TOL_FLOAT


def find_oscillation_order(
    source: MarkovSource, m_max: int = 64, tol: float | None = None
) -> OscillationSearch:
    """Smallest m >= 1 with rho(A_m) = 1, plus the phase and weight vector.

    The phase is arg of the dominant eigenvalue over 2 pi, relabeled into
    [0, 1/d) for a chain of period d; the weights are the component arguments
    of the corresponding right eigenvector normalized to weight 0 at state 0.
    """
    structure = classify_structure(source)
    if not structure.irreducible:
        raise ReducibleChain(structure.reducible_note or "chain is reducible")
    d = structure.period
    if tol is None:
        tol = default_unit_radius_tol(source)

    history = []
    for m in range(1, m_max + 1):
        A = phase_matrix(source, m)
        rho = spectral_radius(A)
        history.append(rho)
        if abs(rho - 1.0) > tol:
            continue
        rep = eigen(A)
        unit = [j for j, lam in enumerate(rep.eigenvalues) if abs(lam) >= 1.0 - tol]
        # all unit-circle phases agree modulo 1/d; relabel into [0, 1/d)
        raw = (np.angle(rep.eigenvalues[unit[0]]) / (2 * math.pi)) % 1.0
        s = raw % (1.0 / d)
        if 1.0 / d - s < 1e-9:
            s = 0.0
        target = cmath.exp(2j * math.pi * s)
        pick = min(unit, key=lambda j: abs(rep.eigenvalues[j] - target))
        x = rep.right[:, pick]
        if np.abs(x).min() < 1e-12 * np.abs(x).max():
            raise DefectiveMatrix("dominant eigenvector has a vanishing component")
        x = x / x[0]
        w = tuple(wrap_unit(float(a)) for a in np.angle(x) / (2 * math.pi))
        return OscillationSearch(order=m, phase=float(s), weights=w, heuristic=False, rho_history=tuple(history))

    return OscillationSearch(order=None, phase=None, weights=None, heuristic=True, rho_history=tuple(history))


def verify_similarity(source: MarkovSource, m: int, s: float, w, tol: float = 1e-8):
    """Check -m log2 p(j|k) = (s + w_k - w_j) mod 1 over the support.

    Returns (ok, residual) where the residual is the largest circular
    distance of the congruence defect from an integer.
    """
    residual = 0.0
    for k in range(source.r):
        for j in range(source.r):
            v = source.transitions[k][j]
            if v is ZERO:
                continue
            defect = (_phase_mod1(v, m) - s - w[k] + w[j]) % 1.0
            residual = max(residual, min(defect, 1.0 - defect))
    return residual <= tol, residual
