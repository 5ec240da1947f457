"""Ground-state and thermal expectations and correlations.

All expectations are Gaussian and reduce to mode sums through the map

    V f = gamma^(-1/2) O^T P Re f + i gamma^(1/2) O^T P^-1 Im f,

with P = diag(1/sqrt(2 m)).  The ground state gives
``<W(f)> = exp(-||Vf||^2 / 4)``; a thermal state at inverse temperature
beta inserts the weight ``coth(beta gamma_k)`` per mode.  ``beta = inf``
selects the ground state everywhere (coth -> 1).

Dynamic correlations use ``V f_t = e^{2 i gamma t} V f`` and split into a
phase ``Im <f_t, g>`` (see :mod:`.dynamics` for the pairing convention)
and a real overlap ``Re <A V f_t, V g>`` computable two independent ways:
as a plain mode sum, or through functional calculus with the kernels

    phi1(s) = s^(-1/2) coth(beta sqrt(s)) cos(2 t sqrt(s))
    phi2(s) =          coth(beta sqrt(s)) sin(2 t sqrt(s))
    phi3(s) = s phi1(s).

Position/momentum correlations come out in closed form, e.g.

    <tau_t(q_x) q_y>      = (1/4)(m_x m_y)^(-1/2) <x| h^(-1/2) e^{-2itH} |y>
    <tau_t(q_x) q_y>_beta = (1/4)(m_x m_y)^(-1/2)
                             <x| phi1(h) - i h^(-1/2) sin(2tH) |y>

and analogously for qp, pq, pp with weights 1, 1, h^(1/2).
"""

import math

import numpy as np

from .dynamics import WeylSymbol, _check_consistent, _mode_parts, im_pairing
from .errors import ConfigurationError
from .model import ModelParams
from .spectral import SpectralData

COTH_SMALL = 1e-4


def coth(x):
    """Numerically stable coth on positive arguments (array-safe).

    Uses the Laurent form ``1/x + x/3`` below 1e-4; for large arguments
    ``1/tanh`` saturates to exactly 1.
    """
    x = np.asarray(x, dtype=float)
    small = x < COTH_SMALL
    safe = np.where(small, 1.0, x)
    out = np.where(small, 1.0 / np.where(small, x, 1.0) + x / 3.0,
                   1.0 / np.tanh(safe))
    return out if out.ndim else float(out)


def _check_beta(beta: float) -> float:
    beta = float(beta)
    if not beta > 0:
        raise ConfigurationError(f"beta must be > 0 (inf for ground state), got {beta}")
    return beta


def _mode_weights(spec: SpectralData, beta: float) -> np.ndarray:
    """Per-mode thermal weights coth(beta gamma); ones in the ground state."""
    if math.isinf(beta):
        return np.ones(spec.n)
    return coth(beta * spec.gammas)


def v_map(spec: SpectralData, params: ModelParams, f: WeylSymbol) -> np.ndarray:
    """Mode-space image V f of a symbol (complex vector indexed by mode)."""
    _check_consistent(spec, params, f)
    a, b = _mode_parts(spec, params, f)
    rg = np.sqrt(spec.gammas)
    return a / rg + 1j * rg * b


def gs_weyl_expectation(spec: SpectralData, params: ModelParams,
                        f: WeylSymbol) -> float:
    """Ground-state expectation ``<W(f)> = exp(-||Vf||^2 / 4)``."""
    v = v_map(spec, params, f)
    return float(np.exp(-0.25 * np.sum(np.abs(v) ** 2)))


def thermal_weyl_expectation(spec: SpectralData, params: ModelParams,
                             f: WeylSymbol, beta: float) -> float:
    """Thermal expectation ``exp(-sum_k coth(beta gamma_k) |Vf_k|^2 / 4)``."""
    beta = _check_beta(beta)
    v = v_map(spec, params, f)
    w = _mode_weights(spec, beta)
    return float(np.exp(-0.25 * np.sum(w * np.abs(v) ** 2)))


def v_overlap_re(spec: SpectralData, params: ModelParams, f: WeylSymbol,
                 g: WeylSymbol, t: float, beta: float = math.inf) -> float:
    """``Re <A Vf_t, Vg>`` as a mode sum (A = coth weights, 1 at beta=inf)."""
    beta = _check_beta(beta)
    vf = v_map(spec, params, f) * np.exp(2j * spec.gammas * t)
    vg = v_map(spec, params, g)
    w = _mode_weights(spec, beta)
    return float(np.sum(w * np.real(vf * np.conj(vg))))


def v_overlap_re_matel(spec: SpectralData, params: ModelParams, f: WeylSymbol,
                       g: WeylSymbol, t: float, beta: float = math.inf) -> float:
    """``Re <A Vf_t, Vg>`` through the phi1/phi2/phi3 functional calculus.

    Independent cross-check of :func:`v_overlap_re`; the two agree to
    rounding.
    """
    beta = _check_beta(beta)
    _check_consistent(spec, params, f, g)
    af, bf = _mode_parts(spec, params, f)
    ag, bg = _mode_parts(spec, params, g)
    gam = spec.gammas
    w = _mode_weights(spec, beta)
    c, s = np.cos(2.0 * gam * t), np.sin(2.0 * gam * t)
    phi1 = w * c / gam
    phi2 = w * s
    phi3 = gam * w * c
    return float(np.sum(af * phi1 * ag) - np.sum(bf * phi2 * ag)
                 + np.sum(af * phi2 * bg) + np.sum(bf * phi3 * bg))


def _weyl_correlation(spec, params, f, g, t, beta):
    _check_consistent(spec, params, f, g)
    if np.all(f.values == 0) or np.all(g.values == 0):
        return 0.0 + 0.0j
    theta = im_pairing(spec, params, f, g, t)
    overlap = v_overlap_re(spec, params, f, g, t, beta)
    w = _mode_weights(spec, beta)
    vf = v_map(spec, params, f)
    vg = v_map(spec, params, g)
    envelope = np.exp(-0.25 * (np.sum(w * np.abs(vf) ** 2)
                               + np.sum(w * np.abs(vg) ** 2)))
    return complex((np.exp(-0.5j * theta) * np.exp(-0.5 * overlap) - 1.0) * envelope)


def gs_weyl_correlation(spec: SpectralData, params: ModelParams, f: WeylSymbol,
                        g: WeylSymbol, t: float) -> complex:
    """Connected ground-state correlation of evolved W(f) with W(g).

    Returns ``(e^{-i theta/2} e^{-Re<Vf_t,Vg>/2} - 1)
    e^{-(||Vf||^2 + ||Vg||^2)/4}``; its magnitude is at most
    ``(|theta| + |Re<Vf_t,Vg>|) / 2``.
    """
    return _weyl_correlation(spec, params, f, g, t, math.inf)


def thermal_weyl_correlation(spec: SpectralData, params: ModelParams,
                             f: WeylSymbol, g: WeylSymbol, t: float,
                             beta: float) -> complex:
    """Connected thermal correlation of Weyl operators (beta=inf: ground)."""
    _check_beta(beta)
    return _weyl_correlation(spec, params, f, g, t, beta)


def _pq_prefactors(params: ModelParams, ix: int, iy: int):
    mx, my = params.masses[ix], params.masses[iy]
    return (0.25 / np.sqrt(mx * my), 0.5j * np.sqrt(my / mx),
            -0.5j * np.sqrt(mx / my), np.sqrt(mx * my))


def gs_pq_correlations(spec: SpectralData, params: ModelParams, x, y,
                       t: float) -> np.ndarray:
    """2x2 matrix of ground-state correlations of evolved q_x, p_x with q_y, p_y.

    Entries are ``<tau_t(a_x) b_y>`` for (a, b) in {q, p} x {q, p}; each is
    a mode sum with weight ``gamma^(2 alpha) e^{-2 i gamma t}`` and
    alpha = -1/2, 0, 0, +1/2 respectively.
    """
    _check_consistent(spec, params)
    ix, iy = params.lattice.index_of(x), params.lattice.index_of(y)
    w = spec.eigenvectors[ix] * spec.eigenvectors[iy]
    gam = spec.gammas
    ph = np.exp(-2j * gam * t)
    cqq, cqp, cpq, cpp = _pq_prefactors(params, ix, iy)
    mid = np.sum(w * ph)
    return np.array([
        [cqq * np.sum(w * ph / gam), cqp * mid],
        [cpq * mid, cpp * np.sum(w * ph * gam)],
    ])


def thermal_pq_correlations(spec: SpectralData, params: ModelParams, x, y,
                            t: float, beta: float) -> np.ndarray:
    """Thermal analogue of :func:`gs_pq_correlations`.

    The qq entry carries ``phi1 - i h^(-1/2) sin(2tH)``, the mixed entries
    ``cos(2tH) - i phi2``, and pp ``phi3 - i h^(1/2) sin(2tH)``; as
    beta -> inf all reduce to the ground-state formulas.
    """
    beta = _check_beta(beta)
    _check_consistent(spec, params)
    ix, iy = params.lattice.index_of(x), params.lattice.index_of(y)
    w = spec.eigenvectors[ix] * spec.eigenvectors[iy]
    gam = spec.gammas
    cw = _mode_weights(spec, beta)
    c, s = np.cos(2.0 * gam * t), np.sin(2.0 * gam * t)
    cqq, cqp, cpq, cpp = _pq_prefactors(params, ix, iy)
    qq = cqq * np.sum(w * (cw * c - 1j * s) / gam)
    mixed = np.sum(w * (c - 1j * cw * s))
    pp = cpp * np.sum(w * gam * (cw * c - 1j * s))
    return np.array([[qq, cqp * mixed], [cpq * mixed, pp]])


def gs_pq_sup(spec: SpectralData, params: ModelParams, x, y) -> np.ndarray:
    """Entrywise time suprema of ground-state pq correlation magnitudes.

    Per-mode amplitude sums; sharp under rationally independent mode
    frequencies, an upper bound always.
    """
    _check_consistent(spec, params)
    ix, iy = params.lattice.index_of(x), params.lattice.index_of(y)
    w = np.abs(spec.eigenvectors[ix] * spec.eigenvectors[iy])
    gam = spec.gammas
    cqq, cqp, cpq, cpp = _pq_prefactors(params, ix, iy)
    mid = np.sum(w)
    return np.array([
        [cqq * np.sum(w / gam), abs(cqp) * mid],
        [abs(cpq) * mid, cpp * np.sum(w * gam)],
    ], dtype=float)


def thermal_pq_sup(spec: SpectralData, params: ModelParams, x, y,
                   beta: float) -> np.ndarray:
    """Entrywise time suprema of thermal pq correlation magnitudes.

    Each mode orbit is an ellipse with semi-axes (coth, 1) in suitable
    units, so the amplitude picks up the coth weight relative to the
    ground-state case.
    """
    beta = _check_beta(beta)
    _check_consistent(spec, params)
    ix, iy = params.lattice.index_of(x), params.lattice.index_of(y)
    w = np.abs(spec.eigenvectors[ix] * spec.eigenvectors[iy])
    gam = spec.gammas
    cw = _mode_weights(spec, beta)
    cqq, cqp, cpq, cpp = _pq_prefactors(params, ix, iy)
    mid = np.sum(w * cw)
    return np.array([
        [cqq * np.sum(w * cw / gam), abs(cqp) * mid],
        [abs(cpq) * mid, cpp * np.sum(w * cw * gam)],
    ], dtype=float)
