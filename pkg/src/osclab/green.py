"""Resolvent matrix elements and disorder-averaged fractional moments.

The Green function of the one-particle matrix at a complex shift z is

    G(x, y; z) = <x| (h - z)^{-1} |y>,

computed by a direct shifted solve (never through the eigendecomposition,
which serves as an independent cross-check route elsewhere).  In finite
volume a real shift is legitimate: any fixed energy is an eigenvalue with
probability zero under continuous disorder, and a conditioning guard turns
the measure-zero exceptions into errors.

``fractional_moment_estimate`` averages ``|G|^s`` (0 < s < 1) over seeded
disorder realizations; exponential decay of this average in |x - y| is the
operative definition of localized s-moments.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConditioningError, ConfigurationError, NumericalError
from .model import DisorderSpec, Lattice, assemble_h, sample_params
from .parallel import map_ordered

RESIDUAL_RTOL = 1e-10
MAX_RESAMPLE_FRACTION = 0.01


def green_column(h: np.ndarray, y: int, z: complex,
                 rtol: float = RESIDUAL_RTOL) -> np.ndarray:
    """Column ``(h - z)^{-1} e_y`` with a residual guard.

    Raises :class:`ConditioningError` carrying the distance from z to the
    nearest eigenvalue when the residual exceeds ``rtol (1 + |z|)``.
    """
    h = np.asarray(h)
    n = h.shape[0]
    z = complex(z)
    shift = z.real if z.imag == 0.0 else z
    a = h - shift * np.eye(n)
    rhs = np.zeros(n, dtype=a.dtype)
    rhs[y] = 1.0
    try:
        g = np.linalg.solve(a, rhs)
        residual = float(np.linalg.norm(a @ g - rhs))
    except np.linalg.LinAlgError:
        g, residual = None, np.inf
    if residual > rtol * (1.0 + abs(z)):
        distance = float(np.min(np.abs(np.linalg.eigvalsh(h) - z)))
        raise ConditioningError(
            f"shift z = {z} is too close to the spectrum "
            f"(distance {distance:.3e}, residual {residual:.3e})",
            distance=distance)
    return g


def green_function(h: np.ndarray, x: int, y: int, z: complex,
                   rtol: float = RESIDUAL_RTOL) -> complex:
    """Green function ``<x| (h - z)^{-1} |y>`` via a shifted linear solve."""
    return complex(green_column(h, y, z, rtol)[x])


@dataclass(frozen=True)
class FractionalMomentEstimate:
    mean: float
    stderr: float
    n_realizations: int
    n_resampled: int


def jackknife_stderr(values: np.ndarray) -> float:
    """Leave-one-out jackknife standard error of the sample mean."""
    values = np.asarray(values, dtype=float)
    n = len(values)
    if n < 2:
        return 0.0
    total = values.sum()
    loo = (total - values) / (n - 1)
    return float(np.sqrt((n - 1) / n * np.sum((loo - loo.mean()) ** 2)))


def _moment_task(args):
    spec, lattice, s, ix, iy, z, rtol, realization = args
    for attempt in (0, 1):
        params = sample_params(spec, lattice, realization, attempt=attempt)
        try:
            g = green_function(assemble_h(params), ix, iy, z, rtol)
        except ConditioningError:
            continue
        return abs(g) ** s, attempt
    raise NumericalError(
        f"realization {realization} hit the spectrum at z = {z} even after "
        f"resampling")


def fractional_moment_estimate(spec: DisorderSpec, lattice: Lattice, s: float,
                               x, y, z: complex, n_realizations: int,
                               workers: int = 1,
                               rtol: float = RESIDUAL_RTOL) -> FractionalMomentEstimate:
    """Monte Carlo estimate of ``E |G(x, y; z)|^s`` with jackknife errors.

    Realizations follow the seeded substream scheme of
    :func:`osclab.model.sample_params`, so the estimate is a pure function
    of (spec, inputs) for any worker count.  A realization whose shifted
    solve fails is resampled once from its reserved substream and counted;
    more than 1% resampled realizations raises
    :class:`~osclab.errors.StatisticalValidityError`.
    """
    if not 0.0 < s < 1.0:
        raise ConfigurationError(f"moment exponent s must be in (0, 1), got {s}")
    if n_realizations < 2:
        raise ConfigurationError(
            f"need at least 2 realizations, got {n_realizations}")
    ix, iy = lattice.index_of(x), lattice.index_of(y)
    tasks = [(spec, lattice, s, ix, iy, complex(z), rtol, i)
             for i in range(n_realizations)]
    results = map_ordered(_moment_task, tasks, workers)
    values = np.array([v for v, _ in results])
    n_resampled = sum(a for _, a in results)
    _check_resample_budget(n_resampled, n_realizations)
    return FractionalMomentEstimate(
        mean=float(values.mean()),
        stderr=jackknife_stderr(values),
        n_realizations=n_realizations,
        n_resampled=n_resampled)


def _check_resample_budget(n_resampled: int, n_total: int):
    from .errors import StatisticalValidityError

    if n_resampled > MAX_RESAMPLE_FRACTION * n_total:
        raise StatisticalValidityError(
            f"{n_resampled} of {n_total} realizations required resampling, "
            f"exceeding the {MAX_RESAMPLE_FRACTION:.0%} budget")
