"""Lattice geometry, disorder sampling, and one-particle matrix assembly.

A model lives on the box ``[-L, L]^d`` (optionally with periodic wrap).
Site x carries a mass ``m_x > 0`` and a spring constant ``k_x >= 0``; each
nearest-neighbor edge {x, y} carries a coupling ``lam_{x,y} >= 0``.  The
assembled matrices are::

    h0[x, x] = k_x / 2 + sum of lam over edges at x
    h0[x, y] = -lam_{x,y}        on edges, 0 elsewhere
    h        = D h0 D,  D = diag(1 / sqrt(2 m_x))

so that the quadratic form satisfies

    f^T h0 f = sum_edges lam (f(y) - f(x))^2 + sum_x (k_x / 2) f(x)^2

and ``||h|| <= (4 d lam_max + k_max / 2) / (2 m_min)``.

Disordered springs are drawn i.i.d. uniform on ``[base, base + width]``
from a counter-based generator keyed by (master seed, realization), so
sampling is reproducible bit-for-bit regardless of evaluation order or
worker count.
"""

import itertools
from dataclasses import dataclass, field

import numpy as np
from numpy.random import Generator, Philox

from .errors import ConfigurationError, LatticeSizeError

MAX_SITES = 4096

Site = tuple[int, ...]


@dataclass(frozen=True)
class Lattice:
    """Finite graph of sites in canonical (lexicographic) order.

    Edges are stored as index pairs ``(i, j)`` with ``i < j`` into the
    canonical site order, which makes the edge set independent of
    construction order.  Use :func:`build_lattice` for the standard
    ``[-L, L]^d`` box and :func:`chain` for small irregular oracles.
    """

    dimension: int
    sites: tuple[Site, ...]
    edges: tuple[tuple[int, int], ...]
    periodic: bool = False
    half_width: int | None = None
    _index: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if not self._index:
            self._index.update({s: i for i, s in enumerate(self.sites)})

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    def index_of(self, site) -> int:
        """Canonical index of a site given as a coordinate tuple.

        A bare int is accepted as a 1D coordinate when ``dimension == 1``.
        """
        if isinstance(site, (int, np.integer)):
            if self.dimension != 1:
                raise ConfigurationError(
                    f"site {site!r} is scalar but the lattice has dimension "
                    f"{self.dimension}"
                )
            site = (int(site),)
        else:
            site = tuple(int(c) for c in site)
        try:
            return self._index[site]
        except KeyError:
            raise ConfigurationError(f"site {site!r} is not on the lattice") from None

    @property
    def center_index(self) -> int:
        """Index of the origin for boxes, of the middle site otherwise."""
        if self.half_width is not None:
            return self.index_of((0,) * self.dimension)
        return self.n_sites // 2

    def separation(self, i: int, j: int) -> int:
        """l1 distance between sites ``i`` and ``j`` (wrapped if periodic)."""
        a, b = self.sites[i], self.sites[j]
        if self.periodic and self.half_width is not None:
            side = 2 * self.half_width + 1
            return int(sum(min(abs(p - q) % side, side - abs(p - q) % side)
                           for p, q in zip(a, b)))
        return int(sum(abs(p - q) for p, q in zip(a, b)))

    def shift(self, i: int, axis: int, delta: int) -> int | None:
        """Index of site ``i`` moved by ``delta`` along ``axis``, or None.

        Periodic boxes wrap the coordinate; otherwise a move off the
        lattice returns None.
        """
        c = list(self.sites[i])
        c[axis] += delta
        if self.periodic and self.half_width is not None:
            side = 2 * self.half_width + 1
            c[axis] = (c[axis] + self.half_width) % side - self.half_width
        return self._index.get(tuple(c))


def build_lattice(dimension: int, half_width: int, periodic: bool = False,
                  max_sites: int = MAX_SITES) -> Lattice:
    """Build the box ``[-L, L]^d`` with nearest-neighbor edges.

    Open boundary drops edges leaving the box; periodic boundary wraps them
    around (a ring for d=1).  Sites are enumerated lexicographically; the
    open box has ``d (2L+1)^(d-1) 2L`` edges.
    """
    if dimension < 1:
        raise ConfigurationError(f"dimension must be >= 1, got {dimension}")
    if half_width < 0:
        raise ConfigurationError(f"half_width must be >= 0, got {half_width}")
    side = 2 * half_width + 1
    if side ** dimension > max_sites:
        raise LatticeSizeError(
            f"lattice would have {side ** dimension} sites, "
            f"exceeding the limit of {max_sites}"
        )
    axis = range(-half_width, half_width + 1)
    sites = tuple(itertools.product(axis, repeat=dimension))
    index = {s: i for i, s in enumerate(sites)}
    edges = set()
    for s in sites:
        for ax in range(dimension):
            c = list(s)
            c[ax] += 1
            if c[ax] > half_width:
                if not periodic or side < 3:
                    continue
                c[ax] = -half_width
            j = index[tuple(c)]
            i = index[s]
            edges.add((min(i, j), max(i, j)))
    return Lattice(dimension=dimension, sites=sites, edges=tuple(sorted(edges)),
                   periodic=periodic, half_width=half_width)


def chain(n_sites: int) -> Lattice:
    """Open 1D path with sites (0,), (1,), ..., used for hand-sized oracles."""
    if n_sites < 1:
        raise ConfigurationError(f"chain needs at least one site, got {n_sites}")
    sites = tuple((i,) for i in range(n_sites))
    edges = tuple((i, i + 1) for i in range(n_sites - 1))
    return Lattice(dimension=1, sites=sites, edges=edges)


@dataclass(frozen=True)
class DisorderSpec:
    """Disorder model: springs i.i.d. uniform on ``[base, base + width]``.

    Masses and couplings stay at their constant values; only the springs
    are random (``target="spring"`` is the single supported choice).
    ``width = 0`` degenerates to the deterministic model with all springs
    at ``base``.
    """

    width: float
    seed: int
    mass: float = 0.5
    coupling: float = 1.0
    base: float = 0.0
    target: str = "spring"

    def __post_init__(self):
        if not self.width >= 0:
            raise ConfigurationError(f"disorder width must be >= 0, got {self.width}")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ConfigurationError(f"seed must be a 64-bit non-negative int, got {self.seed}")
        if not self.mass > 0:
            raise ConfigurationError(f"mass must be > 0, got {self.mass}")
        if not self.coupling >= 0:
            raise ConfigurationError(f"coupling must be >= 0, got {self.coupling}")
        if not self.base >= 0:
            raise ConfigurationError(f"spring base must be >= 0, got {self.base}")
        if self.target != "spring":
            raise ConfigurationError(
                f"only 'spring' disorder is supported, got {self.target!r}"
            )

    @property
    def spring_max(self) -> float:
        return self.base + self.width


@dataclass(frozen=True, eq=False)
class ModelParams:
    """Per-site masses and springs plus per-edge couplings on a lattice."""

    lattice: Lattice
    masses: np.ndarray
    springs: np.ndarray
    couplings: np.ndarray

    def __post_init__(self):
        n, ne = self.lattice.n_sites, len(self.lattice.edges)
        for name, arr, want in (("masses", self.masses, n),
                                ("springs", self.springs, n),
                                ("couplings", self.couplings, ne)):
            a = np.asarray(arr, dtype=float)
            if a.shape != (want,):
                raise ConfigurationError(
                    f"{name} must have shape ({want},), got {a.shape}")
            if not np.all(np.isfinite(a)):
                raise ConfigurationError(f"{name} contains non-finite values")
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        if not np.all(self.masses > 0):
            raise ConfigurationError("all masses must be > 0")
        if not np.all(self.springs >= 0):
            raise ConfigurationError("all springs must be >= 0")
        if not np.all(self.couplings >= 0):
            raise ConfigurationError("all couplings must be >= 0")

    def norm_bound(self, m_min: float | None = None, k_max: float | None = None,
                   lam_max: float | None = None) -> float:
        """Upper bound ``(4 d lam_max + k_max / 2) / (2 m_min)`` on ``||h||``.

        Defaults use the realized parameter extremes, which never exceed
        the configured bounds.
        """
        m_min = float(self.masses.min()) if m_min is None else m_min
        k_max = float(self.springs.max()) if k_max is None else k_max
        if lam_max is None:
            lam_max = float(self.couplings.max()) if len(self.couplings) else 0.0
        d = self.lattice.dimension
        return (4 * d * lam_max + k_max / 2) / (2 * m_min)


def constant_params(lattice: Lattice, mass: float, spring: float,
                    coupling: float) -> ModelParams:
    """Translation-invariant parameters, e.g. for plane-wave oracles."""
    n, ne = lattice.n_sites, len(lattice.edges)
    return ModelParams(lattice,
                       np.full(n, float(mass)),
                       np.full(n, float(spring)),
                       np.full(ne, float(coupling)))


def sample_params(spec: DisorderSpec, lattice: Lattice, realization: int,
                  attempt: int = 0) -> ModelParams:
    """Draw one disorder realization of the model parameters.

    The generator is Philox keyed by ``(seed, realization)`` with the
    attempt number in the counter, and springs are filled in canonical
    site order: the same inputs give bit-identical parameters in any
    execution context.  ``attempt = 1`` is the reserved resample stream
    for realizations that turn out degenerate.
    """
    if realization < 0:
        raise ConfigurationError(f"realization index must be >= 0, got {realization}")
    gen = Generator(Philox(key=[int(spec.seed), int(realization)],
                           counter=[0, 0, 0, int(attempt)]))
    springs = spec.base + gen.uniform(0.0, spec.width, lattice.n_sites)
    return ModelParams(lattice,
                       np.full(lattice.n_sites, float(spec.mass)),
                       springs,
                       np.full(len(lattice.edges), float(spec.coupling)))


def assemble_h0(params: ModelParams) -> np.ndarray:
    """Spring/coupling matrix: diag k/2 plus the coupling graph Laplacian."""
    n = params.lattice.n_sites
    h0 = np.zeros((n, n))
    h0[np.diag_indices(n)] = params.springs / 2.0
    for (i, j), lam in zip(params.lattice.edges, params.couplings):
        h0[i, i] += lam
        h0[j, j] += lam
        h0[i, j] -= lam
        h0[j, i] -= lam
    return h0


def assemble_h(params: ModelParams) -> np.ndarray:
    """Effective one-particle matrix ``D h0 D`` with ``D = 1/sqrt(2 m)``."""
    d = 1.0 / np.sqrt(2.0 * params.masses)
    h0 = assemble_h0(params)
    return d[:, None] * h0 * d[None, :]
