"""Dense diagonalization, functional calculus, and eigenfunction correlators.

Every observable in the package reduces to sums over the eigenpairs of the
effective one-particle matrix h: ``h = O diag(g2) O^T`` with O orthogonal
and eigenvalues ``g2 = gamma^2 > 0`` in ascending order.  Matrix elements
of functions of h are

    <x| phi(h) |y> = sum_k O[x, k] phi(g2_k) O[y, k]

and the eigenfunction correlator with exponent ``alpha`` is the closed-form
supremum over all functions u with |u| <= 1,

    Q_alpha(x, y) = sup_u |<x| h^alpha u(h) |y>|
                  = sum_clusters rep^alpha |sum_{k in cluster} O[x,k] O[y,k]|,

where clusters group numerically coincident eigenvalues (u must take a
single value on a degenerate eigenvalue, hence the cluster projections).
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, EvaluationError, NumericalError, PositivityError

POSITIVITY_TOL = 1e-12
CLUSTER_TOL = 1e-10
ORTHO_TOL = 1e-10
RECON_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class SpectralData:
    """Eigenvalues (ascending, positive) and orthogonal eigenvectors of h.

    Column k of ``eigenvectors`` belongs to ``eigenvalues[k]``; ``gammas``
    are the positive square roots, i.e. half the mode frequencies.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        for name in ("eigenvalues", "eigenvectors"):
            a = np.asarray(getattr(self, name), dtype=float)
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @property
    def n(self) -> int:
        return len(self.eigenvalues)

    @property
    def gammas(self) -> np.ndarray:
        return np.sqrt(self.eigenvalues)


def diagonalize(h: np.ndarray, ptol: float = POSITIVITY_TOL,
                validate: bool = True) -> SpectralData:
    """Diagonalize a symmetric positive definite matrix.

    Raises :class:`PositivityError` if the smallest eigenvalue does not
    exceed ``ptol * ||h||``, reporting the offending eigenvalue.  With
    ``validate`` the orthogonality and reconstruction residuals are
    checked (max norms 1e-10 and 1e-8 ||h||).
    """
    h = np.asarray(h, dtype=float)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ConfigurationError(f"expected a square matrix, got shape {h.shape}")
    scale = np.abs(h).max() or 1.0
    asym = np.abs(h - h.T).max()
    if asym > 1e-12 * scale:
        raise ConfigurationError(
            f"matrix is not symmetric: relative asymmetry {asym / scale:.3e}")
    eigenvalues, eigenvectors = np.linalg.eigh(h)
    hnorm = max(abs(eigenvalues[0]), abs(eigenvalues[-1]))
    threshold = ptol * hnorm
    if eigenvalues[0] <= threshold:
        raise PositivityError(eigenvalues[0], threshold)
    spec = SpectralData(eigenvalues, eigenvectors)
    if validate:
        ortho = np.abs(eigenvectors.T @ eigenvectors - np.eye(spec.n)).max()
        if ortho > ORTHO_TOL:
            raise NumericalError(f"eigenvector orthogonality residual {ortho:.3e}")
        recon = np.abs((eigenvectors * eigenvalues) @ eigenvectors.T - h).max()
        if recon > RECON_TOL * hnorm:
            raise NumericalError(f"spectral reconstruction residual {recon:.3e}")
    return spec


def matel_values(spec: SpectralData, values: np.ndarray, x: int, y: int):
    """Matrix element ``<x| phi(h) |y>`` from per-eigenvalue ``phi`` values."""
    values = np.asarray(values)
    if not np.all(np.isfinite(values)):
        bad = int(np.flatnonzero(~np.isfinite(values))[0])
        raise EvaluationError(
            f"function is not finite at eigenvalue {spec.eigenvalues[bad]!r} "
            f"(index {bad})")
    weights = spec.eigenvectors[x] * spec.eigenvectors[y]
    out = np.sum(weights * values)
    return complex(out) if np.iscomplexobj(values) else float(out)


def matel(spec: SpectralData, phi, x: int, y: int):
    """Matrix element ``<x| phi(h) |y>`` for a vectorized scalar function.

    ``phi`` receives the eigenvalue array and must return finite values at
    every eigenvalue; otherwise an :class:`EvaluationError` names the
    offender.
    """
    return matel_values(spec, phi(spec.eigenvalues), x, y)


@dataclass(frozen=True)
class EigenvalueClusters:
    """Partition of eigenvalue indices into numerically degenerate groups.

    ``bounds[c]:bounds[c+1]`` are the member indices of cluster c and
    ``representatives[c]`` is the cluster mean eigenvalue.
    """

    bounds: tuple[int, ...]
    representatives: np.ndarray

    @property
    def n_clusters(self) -> int:
        return len(self.bounds) - 1

    def members(self, c: int) -> range:
        return range(self.bounds[c], self.bounds[c + 1])


def cluster_eigenvalues(spec: SpectralData, ctol: float = CLUSTER_TOL) -> EigenvalueClusters:
    """Group eigenvalues that coincide within ``ctol * max(eigenvalue)``.

    Clusters are maximal runs in ascending order whose consecutive gaps and
    total spread stay within the absolute tolerance, so the within-group
    spread never exceeds it.  ``ctol = 0`` disables clustering entirely.
    """
    if not 0 <= ctol <= 1e-6:
        raise ConfigurationError(f"ctol must be in [0, 1e-6], got {ctol}")
    w = spec.eigenvalues
    n = len(w)
    if ctol == 0.0:
        bounds = tuple(range(n + 1))
        return EigenvalueClusters(bounds, w.copy())
    tol = ctol * w[-1]
    bounds = [0]
    start = 0
    for i in range(1, n):
        if w[i] - w[i - 1] > tol or w[i] - w[start] > tol:
            bounds.append(i)
            start = i
    bounds.append(n)
    reps = np.array([w[a:b].mean() for a, b in zip(bounds[:-1], bounds[1:])])
    return EigenvalueClusters(tuple(bounds), reps)


def correlator_q(spec: SpectralData, alpha: float, x: int, y: int,
                 window: tuple[float, float] | None = None,
                 ctol: float = CLUSTER_TOL,
                 clusters: EigenvalueClusters | None = None) -> float:
    """Eigenfunction correlator ``sup_{|u|<=1} |<x| h^alpha u(h) chi_W(h) |y>|``.

    The supremum is exact: the optimal u aligns the phase of each cluster
    projection.  A window ``(lo, hi)`` restricts to clusters whose
    representative eigenvalue lies in the closed interval; membership is
    decided per cluster, so summing over a partition of windows that does
    not straddle a cluster reproduces the unwindowed value exactly.
    """
    if clusters is None:
        clusters = cluster_eigenvalues(spec, ctol)
    starts = np.fromiter(clusters.bounds[:-1], dtype=int)
    proj = np.add.reduceat(spec.eigenvectors[x] * spec.eigenvectors[y], starts)
    terms = clusters.representatives ** alpha * np.abs(proj)
    if window is not None:
        lo, hi = window
        mask = (clusters.representatives >= lo) & (clusters.representatives <= hi)
        terms = terms[mask]
    return float(terms.sum())
