"""Ableitungen des Cholesky-Faktors L von Sigma = L L^T (Vorwärts- und Rückwärtsregel)."""
import numpy as np
from scipy.linalg import solve_triangular


def phi(matrix: np.ndarray) -> np.ndarray:
    """Unteres Dreieck mit halbierter Diagonale."""
    result = np.tril(matrix)
    result[np.diag_indices_from(result)] *= 0.5
    return result


def chol_jvp(chol: np.ndarray, dcov: np.ndarray) -> np.ndarray:
    """dL = L Phi(L^-1 dSigma L^-T) für eine symmetrische Störung dSigma."""
    inner = solve_triangular(chol, dcov, lower=True)
    inner = solve_triangular(chol, inner.T, lower=True).T
    return chol @ phi(inner)


def chol_vjp(chol: np.ndarray, chol_bar: np.ndarray) -> np.ndarray:
    """Symmetrischer Gradient nach Sigma aus dem Gradienten nach L.

    Sigma_bar = L^-T sym(Phi(L^T L_bar)) L^-1; nur das untere Dreieck von
    L_bar geht ein.
    """
    inner = phi(chol.T @ np.tril(chol_bar))
    inner = 0.5 * (inner + inner.T)
    left = solve_triangular(chol, inner, lower=True, trans='T')
    return solve_triangular(chol, left.T, lower=True, trans='T').T
