"""
Principal components of a configuration-density matrix.

Conventions: rows are configurations, columns are graphs; covariance and
standard deviations use the 1/N divisor, so after unit-sd standardization
the covariance is a correlation matrix.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from app.services.errors import ConvergenceError, DegenerateDataError

logger = logging.getLogger(__name__)

ZERO_SD = 1e-14
MAX_DIM = 64
MAX_SWEEPS = 100
HUGE_THETA = 1e150


@dataclass
class DensityMatrix:
    """
    Row-standardized p x N density matrix plus what is needed to undo it.

    row_means / row_sds hold the statistics of the retained rows before the
    transform; dropped_rows lists (config name, reason) for removed rows.
    """

    values: np.ndarray
    row_names: List[str]
    col_ids: List[str]
    row_means: np.ndarray
    row_sds: np.ndarray
    standardized: bool = True
    unit_sd: bool = True
    dropped_rows: List[Tuple[str, str]] = field(default_factory=list)
    raw: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def p(self) -> int:
        return self.values.shape[0]

    @property
    def N(self) -> int:
        return self.values.shape[1]


@dataclass
class PcaResult:
    """Eigenpairs of the density covariance with per-graph scores."""

    eigenvalues: np.ndarray
    loadings: np.ndarray
    scores: np.ndarray
    r: int
    variance_explained: np.ndarray
    row_names: List[str]
    col_ids: List[str]
    near_degenerate: List[int] = field(default_factory=list)
    all_scores: Optional[np.ndarray] = field(default=None, repr=False)

    def loading(self, component: int) -> np.ndarray:
        """Loading vector of 1-based component."""
        return self.loadings[:, component - 1]


def standardize_rows(
    m: np.ndarray,
    unit_sd: bool = True,
    row_names: Optional[Sequence[str]] = None,
    col_ids: Optional[Sequence[str]] = None,
) -> DensityMatrix:
    """
    Center every row and, when unit_sd, scale it to standard deviation 1.

    Rows with standard deviation below 1e-14 carry no information and are
    dropped (recorded in dropped_rows).

    Raises:
        ValueError: fewer than 2 columns
        DegenerateDataError: every row is constant
    """
    raw = np.array(m, dtype=float)
    if raw.ndim != 2:
        raise ValueError("density matrix must be two-dimensional")
    p, n_cols = raw.shape
    if n_cols < 2:
        raise ValueError(f"need at least 2 graphs (columns), got {n_cols}")
    names = list(row_names) if row_names is not None else [f"row{j + 1}" for j in range(p)]
    ids = list(col_ids) if col_ids is not None else [str(i) for i in range(n_cols)]

    means = raw.mean(axis=1)
    sds = raw.std(axis=1)
    keep = sds >= ZERO_SD
    dropped = [(names[j], "zero variance") for j in range(p) if not keep[j]]
    for name, reason in dropped:
        logger.warning(f"dropping row {name}: {reason}")
    if not keep.any():
        raise DegenerateDataError("every row has zero variance; nothing to analyze")

    centered = raw[keep] - means[keep][:, None]
    values = centered / sds[keep][:, None] if unit_sd else centered
    return DensityMatrix(
        values=values,
        row_names=[names[j] for j in range(p) if keep[j]],
        col_ids=ids,
        row_means=means[keep],
        row_sds=sds[keep],
        standardized=True,
        unit_sd=unit_sd,
        dropped_rows=dropped,
        raw=raw,
    )


def covariance(d: DensityMatrix) -> np.ndarray:
    """(1/N) S S^T, built from the upper triangle and mirrored so it is exactly symmetric."""
    values = d.values
    p, n_cols = values.shape
    sigma = np.zeros((p, p))
    for j in range(p):
        for k in range(j, p):
            sigma[j, k] = float(np.dot(values[j], values[k])) / n_cols
            sigma[k, j] = sigma[j, k]
    return sigma


def _off_diagonal_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return math.sqrt(float(np.sum(off * off)))


def _sign_normalize(vectors: np.ndarray) -> np.ndarray:
    out = vectors.copy()
    for col in range(out.shape[1]):
        pivot = int(np.argmax(np.abs(out[:, col])))
        if out[pivot, col] < 0:
            out[:, col] = -out[:, col]
    return out


def symmetric_eigen(sigma: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Full eigendecomposition of a small symmetric matrix by cyclic Jacobi rotations.

    Returns:
        (eigenvalues descending, eigenvectors as columns). Each eigenvector's
        largest-magnitude entry is positive (lowest index wins ties).

    Raises:
        ValueError: not square, not symmetric, or larger than 64 x 64
        ConvergenceError: 100 sweeps without convergence, or a residual check failed
    """
    a = np.array(sigma, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    p = a.shape[0]
    if p > MAX_DIM:
        raise ValueError(f"dense Jacobi is limited to {MAX_DIM} x {MAX_DIM}, got {p}")
    if np.max(np.abs(a - a.T), initial=0.0) > 1e-12:
        raise ValueError("matrix is not symmetric")
    a = (a + a.T) / 2
    v = np.eye(p)
    norm = float(np.linalg.norm(a))
    tol = 1e-14 * norm

    previous = math.inf
    for sweep in range(MAX_SWEEPS + 1):
        off = _off_diagonal_norm(a)
        if off <= tol or (off <= 1e-12 * norm and off >= previous):
            break
        if sweep == MAX_SWEEPS:
            raise ConvergenceError(
                f"Jacobi did not converge in {MAX_SWEEPS} sweeps (off-diagonal {off:.3e})"
            )
        previous = off
        for i in range(p - 1):
            for j in range(i + 1, p):
                aij = a[i, j]
                if aij == 0.0:
                    continue
                theta = (a[j, j] - a[i, i]) / (2.0 * aij)
                if theta == 0:
                    t = 1.0
                elif abs(theta) > HUGE_THETA:
                    # theta * theta would overflow
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                ai, aj = a[:, i].copy(), a[:, j].copy()
                a[:, i], a[:, j] = c * ai - s * aj, s * ai + c * aj
                ai, aj = a[i, :].copy(), a[j, :].copy()
                a[i, :], a[j, :] = c * ai - s * aj, s * ai + c * aj
                a[i, j] = a[j, i] = 0.0
                vi, vj = v[:, i].copy(), v[:, j].copy()
                v[:, i], v[:, j] = c * vi - s * vj, s * vi + c * vj

    eigenvalues = np.diag(a).copy()
    order = np.argsort(-eigenvalues, kind="stable")
    eigenvalues = eigenvalues[order]
    vectors = _sign_normalize(v[:, order])

    sigma_sym = np.array(sigma, dtype=float)
    bound = 1e-10 * max(1.0, norm)
    for col in range(p):
        residual = np.linalg.norm(sigma_sym @ vectors[:, col] - eigenvalues[col] * vectors[:, col])
        if residual > bound:
            raise ConvergenceError(f"eigenpair {col + 1} residual {residual:.3e} exceeds {bound:.3e}")
    gram = vectors.T @ vectors
    if np.max(np.abs(gram - np.eye(p)), initial=0.0) > 1e-10:
        raise ConvergenceError("eigenvectors lost orthonormality")
    return eigenvalues, vectors


def scores(d: DensityMatrix, loadings: np.ndarray, r: int) -> np.ndarray:
    """N x r matrix; column l is S^T v_l."""
    p = d.values.shape[0]
    if not 0 <= r <= min(p, loadings.shape[1]):
        raise ValueError(f"r must be between 0 and {p}, got {r}")
    return d.values.T @ loadings[:, :r]


def _clamped(eigenvalues: np.ndarray) -> np.ndarray:
    return np.clip(np.asarray(eigenvalues, dtype=float), 0.0, None)


def variance_explained(eigenvalues: Sequence[float], r: int) -> float:
    """Share of total variance carried by the first r components."""
    lam = _clamped(np.asarray(eigenvalues))
    if not 0 <= r <= lam.size:
        raise ValueError(f"r must be between 0 and {lam.size}, got {r}")
    total = float(lam.sum())
    if total <= 0:
        raise DegenerateDataError("all eigenvalues are zero")
    if r == lam.size:
        return 1.0
    return float(lam[:r].sum()) / total


def explained_ratios(eigenvalues: Sequence[float]) -> np.ndarray:
    """Per-component variance share (the scree values)."""
    lam = _clamped(np.asarray(eigenvalues))
    total = float(lam.sum())
    if total <= 0:
        raise DegenerateDataError("all eigenvalues are zero")
    return lam / total


def contributions(loading: Sequence[float]) -> np.ndarray:
    """Percentage contribution of each configuration: 100 |v_j| / sum |v_k|."""
    weights = np.abs(np.asarray(loading, dtype=float))
    total = float(weights.sum())
    if total == 0:
        raise ValueError("loading vector is zero")
    return 100.0 * weights / total


def near_degenerate_gaps(eigenvalues: np.ndarray, rel_tol: float = 1e-8) -> List[int]:
    """1-based l with lambda_l - lambda_(l+1) < rel_tol * lambda_1."""
    if eigenvalues.size < 2:
        return []
    scale = max(float(eigenvalues[0]), 0.0)
    gaps = eigenvalues[:-1] - eigenvalues[1:]
    return [int(i) + 1 for i in np.flatnonzero(gaps < rel_tol * scale)]


def resolve_r(r: Union[int, str, None], p: int) -> int:
    if r is None or (isinstance(r, str) and r.strip().lower() == "all"):
        return p
    r = int(r)
    if not 1 <= r <= p:
        raise ValueError(f"r must be between 1 and {p} (or 'all'), got {r}")
    return r


def pca(d: DensityMatrix, r: Union[int, str, None] = "all") -> PcaResult:
    """Covariance, eigendecomposition and scores of a standardized density matrix."""
    sigma = covariance(d)
    eigenvalues, loadings = symmetric_eigen(sigma)
    p = eigenvalues.size
    keep = resolve_r(r, p)
    all_scores = scores(d, loadings, p)
    flagged = near_degenerate_gaps(eigenvalues) if eigenvalues[0] > 0 else list(range(1, p))
    if flagged:
        logger.warning(f"near-degenerate eigenvalue gaps after component(s) {flagged}")
    return PcaResult(
        eigenvalues=eigenvalues,
        loadings=loadings,
        scores=all_scores[:, :keep],
        r=keep,
        variance_explained=explained_ratios(eigenvalues),
        row_names=list(d.row_names),
        col_ids=list(d.col_ids),
        near_degenerate=flagged,
        all_scores=all_scores,
    )


def reconstruct(result: PcaResult, r: int) -> np.ndarray:
    """
    Rank-r approximation of the standardized matrix:
    entry (j, i) = sum over l <= r of score[i][l] * loading_l[j].
    """
    full = result.all_scores if result.all_scores is not None else result.scores
    p = result.loadings.shape[0]
    if not 0 <= r <= min(p, full.shape[1]):
        raise ValueError(f"r must be between 0 and {min(p, full.shape[1])}, got {r}")
    return (full[:, :r] @ result.loadings[:, :r].T).T


def reconstruction_errors(result: PcaResult, d: DensityMatrix, r: int) -> np.ndarray:
    """Per-graph Euclidean distance between a density column and its rank-r reconstruction."""
    residual = d.values - reconstruct(result, r)
    return np.sqrt(np.sum(residual * residual, axis=0))


def unstandardize(d: DensityMatrix, matrix: np.ndarray) -> np.ndarray:
    """Map a matrix on the standardized scale back to raw densities."""
    scaled = matrix * d.row_sds[:, None] if d.unit_sd else np.array(matrix, dtype=float)
    return scaled + d.row_means[:, None]
