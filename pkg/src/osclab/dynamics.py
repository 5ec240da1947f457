"""Weyl-symbol dynamics and exact commutator norms.

A Weyl operator ``W(f) = exp(i sum_x Re f(x) q_x + Im f(x) p_x)`` is labeled
by a complex symbol f on the lattice.  Under the harmonic evolution the
symbol moves linearly, ``f -> f_t``, with (P = diag(1/sqrt(2 m)) and
H = h^(1/2))::

    Re f_t = P^-1 cos(2tH) P Re f  -  P^-1 H sin(2tH) P^-1 Im f
    Im f_t = P   cos(2tH) P^-1 Im f  +  P H^-1 sin(2tH) P Re f

Throughout the package the complex pairing is linear in its FIRST slot,

    <a, b> = sum_x a(x) conj(b(x)),

which fixes all signs below; see :func:`im_product`.  The commutator of
Weyl operators has the exact norm

    || [W(f_t), W(g)] || = |exp(-i theta) - 1| = 2 |sin(theta / 2)|,

with ``theta = Im <f_t, g>`` expanded in functional calculus by
:func:`im_pairing`.  The corresponding commutators of bare positions and
momenta are scalar multiples of the identity collected in a 2x2 matrix by
:func:`pq_commutator_matrix`; per-mode amplitude sums give sharp,
time-uniform bounds (:func:`pq_commutator_sup`) that are attained for
rationally independent mode frequencies.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .model import Lattice, ModelParams
from .spectral import SpectralData

ENTRY_INDEX = {"qq": (0, 0), "qp": (0, 1), "pq": (1, 0), "pp": (1, 1)}


@dataclass(frozen=True, eq=False)
class WeylSymbol:
    """Complex function on the lattice labeling a Weyl operator.

    The real part multiplies positions and the imaginary part momenta in
    the exponent; the zero symbol labels the identity.
    """

    lattice: Lattice
    values: np.ndarray = field(compare=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=complex)
        if v.shape != (self.lattice.n_sites,):
            raise ConfigurationError(
                f"symbol must have one value per site "
                f"({self.lattice.n_sites}), got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ConfigurationError("symbol contains non-finite values")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def zero(cls, lattice: Lattice) -> "WeylSymbol":
        return cls(lattice, np.zeros(lattice.n_sites, dtype=complex))

    @classmethod
    def point(cls, lattice: Lattice, site, amplitude: complex = 1.0) -> "WeylSymbol":
        v = np.zeros(lattice.n_sites, dtype=complex)
        v[lattice.index_of(site)] = amplitude
        return cls(lattice, v)

    @classmethod
    def from_dict(cls, lattice: Lattice, amplitudes: dict) -> "WeylSymbol":
        v = np.zeros(lattice.n_sites, dtype=complex)
        for site, a in amplitudes.items():
            v[lattice.index_of(site)] = a
        return cls(lattice, v)


def im_product(f: WeylSymbol, g: WeylSymbol) -> float:
    """``Im <f, g>`` with the first-slot-linear pairing.

    This is the phase in the Weyl composition law and the symplectic form
    the dynamics preserves.
    """
    return float(np.imag(np.sum(f.values * np.conj(g.values))))


def _check_consistent(spec: SpectralData, params: ModelParams, *symbols: WeylSymbol):
    n = params.lattice.n_sites
    if spec.n != n:
        raise ConfigurationError(
            f"spectral data has {spec.n} modes but the lattice has {n} sites")
    for s in symbols:
        if s.lattice.n_sites != n or s.lattice.sites != params.lattice.sites:
            raise ConfigurationError("symbol lives on a different lattice")


def _mode_parts(spec: SpectralData, params: ModelParams, f: WeylSymbol):
    """Eigenbasis components (O^T P Re f, O^T P^-1 Im f)."""
    p = 1.0 / np.sqrt(2.0 * params.masses)
    a = spec.eigenvectors.T @ (p * f.values.real)
    b = spec.eigenvectors.T @ (f.values.imag / p)
    return a, b


def evolve_symbol(spec: SpectralData, params: ModelParams, f: WeylSymbol,
                  t: float) -> WeylSymbol:
    """Harmonically evolved symbol f_t (f at t = 0, exactly)."""
    _check_consistent(spec, params, f)
    a, b = _mode_parts(spec, params, f)
    gam = spec.gammas
    c, s = np.cos(2.0 * gam * t), np.sin(2.0 * gam * t)
    p = 1.0 / np.sqrt(2.0 * params.masses)
    re = (spec.eigenvectors @ (c * a - gam * s * b)) / p
    im = (spec.eigenvectors @ (s / gam * a + c * b)) * p
    return WeylSymbol(f.lattice, re + 1j * im)


def im_pairing(spec: SpectralData, params: ModelParams, f: WeylSymbol,
               g: WeylSymbol, t: float) -> float:
    """``Im <f_t, g>`` via functional calculus of h.

    Expands into four terms sandwiching ``h^(-1/2) sin(2tH)``, ``cos(2tH)``
    and ``h^(1/2) sin(2tH)`` between mass-weighted real/imaginary parts;
    agrees with ``im_product(evolve_symbol(f, t), g)`` to rounding.
    """
    _check_consistent(spec, params, f, g)
    af, bf = _mode_parts(spec, params, f)
    ag, bg = _mode_parts(spec, params, g)
    gam = spec.gammas
    c, s = np.cos(2.0 * gam * t), np.sin(2.0 * gam * t)
    return float(np.sum(s / gam * af * ag) + np.sum(c * bf * ag)
                 - np.sum(c * af * bg) + np.sum(gam * s * bf * bg))


def weyl_commutator_norm(spec: SpectralData, params: ModelParams, f: WeylSymbol,
                         g: WeylSymbol, t: float) -> float:
    """Exact norm ``|| [W(f) at t, W(g)] || = 2 |sin(theta/2)|`` in [0, 2]."""
    theta = im_pairing(spec, params, f, g, t)
    return 2.0 * abs(np.sin(0.5 * theta))


def weyl_commutator_sup(spec: SpectralData, params: ModelParams, f: WeylSymbol,
                        g: WeylSymbol) -> float:
    """Time supremum of the Weyl commutator norm, in closed form.

    The pairing phase is ``theta(t) = sum_k R_k sin(2 gamma_k t + phi_k)``;
    its supremum is ``sum_k R_k`` (attained a.s. for rationally independent
    frequencies, an upper bound always), so the norm supremum is
    ``2 sin(min(sum R, pi) / 2)``.
    """
    _check_consistent(spec, params, f, g)
    af, bf = _mode_parts(spec, params, f)
    ag, bg = _mode_parts(spec, params, g)
    gam = spec.gammas
    sin_amp = af * ag / gam + gam * bf * bg
    cos_amp = bf * ag - af * bg
    theta_max = float(np.sum(np.hypot(sin_amp, cos_amp)))
    return 2.0 * float(np.sin(0.5 * min(theta_max, np.pi)))


def _pair_prefactors(params: ModelParams, x: int, y: int):
    mx, my = params.masses[x], params.masses[y]
    return (0.5 / np.sqrt(mx * my), np.sqrt(my / mx),
            np.sqrt(mx / my), 2.0 * np.sqrt(mx * my))


def pq_commutator_matrix(spec: SpectralData, params: ModelParams, x, y,
                         t: float) -> np.ndarray:
    """Scalar commutator coefficients of positions/momenta at time t.

    Returns the 2x2 matrix of coefficients of ``-i [tau_t(a_x), b_y]`` for
    (a, b) in {q, p} x {q, p}; at t = 0 this is ``delta_{xy} [[0,1],[-1,0]]``.
    """
    _check_consistent(spec, params)
    ix, iy = params.lattice.index_of(x), params.lattice.index_of(y)
    w = spec.eigenvectors[ix] * spec.eigenvectors[iy]
    gam = spec.gammas
    c, s = np.cos(2.0 * gam * t), np.sin(2.0 * gam * t)
    cqq, cqp, cpq, cpp = _pair_prefactors(params, ix, iy)
    return np.array([
        [-cqq * np.sum(w * s / gam), cqp * np.sum(w * c)],
        [-cpq * np.sum(w * c), -cpp * np.sum(w * gam * s)],
    ])


def pq_commutator_sup(spec: SpectralData, params: ModelParams, x, y) -> np.ndarray:
    """Entrywise time suprema of :func:`pq_commutator_matrix`.

    Each entry is the sum of its per-mode coefficient magnitudes: a
    rigorous upper bound for all t, sharp for rationally independent mode
    frequencies (almost surely under continuous disorder).
    """
    _check_consistent(spec, params)
    ix, iy = params.lattice.index_of(x), params.lattice.index_of(y)
    w = np.abs(spec.eigenvectors[ix] * spec.eigenvectors[iy])
    gam = spec.gammas
    cqq, cqp, cpq, cpp = _pair_prefactors(params, ix, iy)
    return np.array([
        [cqq * np.sum(w / gam), cqp * np.sum(w)],
        [cpq * np.sum(w), cpp * np.sum(w * gam)],
    ])
