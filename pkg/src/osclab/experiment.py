"""Disorder-averaged estimation, decay-rate fitting, and regime presets.

An experiment fixes a lattice, a disorder model, and one observable, then
averages the observable (raised to a per-realization exponent r) over
seeded realizations and over site pairs sharing an l1 separation.  The
default pair policy anchors one site at the box center and walks the other
along the axes, which keeps every sample at a boundary-uniform distance;
an all-pairs policy is available behind a flag.

The resulting table is a pure function of (configuration, master seed):
realizations are independent work units keyed by their index, and the
reduction is ordered by index, so any worker count reproduces the same
bytes.  Exponential decay rates are extracted by weighted least squares on
log(mean) versus separation.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import dynamics, states
from .errors import (ConditioningError, ConfigurationError, FitDomainError,
                     NumericalError, PositivityError)
from .green import MAX_RESAMPLE_FRACTION, _check_resample_budget, green_column
from .model import DisorderSpec, Lattice, ModelParams, assemble_h, sample_params
from .parallel import map_ordered
from .spectral import SpectralData, cluster_eigenvalues, correlator_q, diagonalize

OBSERVABLE_KINDS = (
    "q_correlator",
    "weyl_commutator_sup",
    "pq_commutator_sup",
    "gs_pq_sup",
    "thermal_pq_sup",
    "static_gs",
    "static_thermal",
    "green_moment",
)

_THERMAL_KINDS = {"thermal_pq_sup", "static_thermal"}
_ENTRY_KINDS = {"pq_commutator_sup", "gs_pq_sup", "thermal_pq_sup",
                "static_gs", "static_thermal"}


@dataclass(frozen=True)
class ObservableSpec:
    """One observable from the library, with its averaging exponent.

    ``exponent`` is the fractional power r in (0, 1] applied to the value
    of each realization before averaging (never after).  Fields not used
    by ``kind`` are carried but ignored.
    """

    kind: str = "q_correlator"
    exponent: float = 1.0
    alpha: float = -0.5
    window: tuple[float, float] | None = None
    entry: str = "qq"
    beta: float = 1.0
    moment: float = 0.5
    energy: float = 0.0
    epsilon: float = 0.0

    def __post_init__(self):
        if self.kind not in OBSERVABLE_KINDS:
            raise ConfigurationError(
                f"unknown observable kind {self.kind!r}; "
                f"choose from {', '.join(OBSERVABLE_KINDS)}")
        if not 0.0 < self.exponent <= 1.0:
            raise ConfigurationError(
                f"exponent must be in (0, 1], got {self.exponent}")
        if not math.isfinite(self.alpha):
            raise ConfigurationError(f"alpha must be finite, got {self.alpha}")
        if self.window is not None:
            lo, hi = self.window
            if not lo <= hi:
                raise ConfigurationError(f"window must satisfy lo <= hi, got {self.window}")
            object.__setattr__(self, "window", (float(lo), float(hi)))
        if self.kind in _ENTRY_KINDS and self.entry not in dynamics.ENTRY_INDEX:
            raise ConfigurationError(
                f"entry must be one of qq, qp, pq, pp, got {self.entry!r}")
        if self.kind in _THERMAL_KINDS and not self.beta > 0:
            raise ConfigurationError(f"beta must be > 0, got {self.beta}")
        if self.kind == "green_moment":
            if not 0.0 < self.moment < 1.0:
                raise ConfigurationError(
                    f"moment exponent s must be in (0, 1), got {self.moment}")
            if not (math.isfinite(self.energy) and math.isfinite(self.epsilon)):
                raise ConfigurationError("green_moment shift must be finite")

    @property
    def shift(self) -> complex:
        return complex(self.energy, self.epsilon)

    def describe(self) -> str:
        extra = {
            "q_correlator": f"alpha={self.alpha}" + (
                f", window={self.window}" if self.window else ""),
            "weyl_commutator_sup": "",
            "pq_commutator_sup": self.entry,
            "gs_pq_sup": self.entry,
            "thermal_pq_sup": f"{self.entry}, beta={self.beta}",
            "static_gs": self.entry,
            "static_thermal": f"{self.entry}, beta={self.beta}",
            "green_moment": f"s={self.moment}, z={self.shift}",
        }[self.kind]
        body = f"{self.kind}({extra})" if extra else f"{self.kind}"
        return body if self.exponent == 1.0 else f"{body}^{self.exponent}"


def center_pairs(lattice: Lattice, max_separation: int | None = None):
    """Pairs (center, center +- s e_axis) for every axis, grouped by s."""
    c = lattice.center_index
    pairs = {(c, c): 0}
    for axis in range(lattice.dimension):
        for sgn in (1, -1):
            s = 1
            while max_separation is None or s <= max_separation:
                j = lattice.shift(c, axis, sgn * s)
                if j is None:
                    break
                sep = lattice.separation(c, j)
                if sep < s:
                    break  # periodic wrap folding back on itself
                pairs[(c, j)] = sep
                s += 1
    rows = sorted(pairs.items(), key=lambda kv: (kv[1], kv[0][1]))
    xs = tuple(k[0] for k, _ in rows)
    ys = tuple(k[1] for k, _ in rows)
    seps = tuple(s for _, s in rows)
    return xs, ys, seps


def all_pairs(lattice: Lattice, max_separation: int | None = None):
    """Every unordered site pair (boundary distances mix; prefer center)."""
    rows = []
    for i in range(lattice.n_sites):
        for j in range(i, lattice.n_sites):
            sep = lattice.separation(i, j)
            if max_separation is None or sep <= max_separation:
                rows.append((sep, i, j))
    rows.sort()
    return (tuple(r[1] for r in rows), tuple(r[2] for r in rows),
            tuple(r[0] for r in rows))


@dataclass(frozen=True, eq=False)
class EstimateTable:
    """Disorder-averaged observable values keyed by site separation."""

    separations: np.ndarray
    means: np.ndarray
    stderrs: np.ndarray
    counts: np.ndarray
    meta: dict = field(default_factory=dict)

    CSV_HEADER = "separation,mean,stderr,count"

    def __post_init__(self):
        object.__setattr__(self, "separations",
                           np.asarray(self.separations, dtype=int))
        object.__setattr__(self, "means", np.asarray(self.means, dtype=float))
        object.__setattr__(self, "stderrs", np.asarray(self.stderrs, dtype=float))
        object.__setattr__(self, "counts", np.asarray(self.counts, dtype=int))

    def to_csv_text(self) -> str:
        lines = [self.CSV_HEADER]
        for s, m, e, c in zip(self.separations, self.means, self.stderrs,
                              self.counts):
            lines.append(f"{int(s)},{m!r},{e!r},{int(c)}")
        return "\n".join(lines) + "\n"

    def write_csv(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_csv_text())

    @classmethod
    def from_csv_text(cls, text: str) -> "EstimateTable":
        lines = [ln for ln in text.strip().splitlines() if ln.strip()]
        if not lines or lines[0].strip() != cls.CSV_HEADER:
            raise ConfigurationError(
                f"table CSV must start with header {cls.CSV_HEADER!r}")
        rows = []
        for ln in lines[1:]:
            parts = ln.split(",")
            if len(parts) != 4:
                raise ConfigurationError(f"malformed table row: {ln!r}")
            rows.append((int(parts[0]), float(parts[1]), float(parts[2]),
                         int(parts[3])))
        if not rows:
            raise ConfigurationError("table CSV has no data rows")
        sep, mean, err, cnt = zip(*rows)
        return cls(np.array(sep), np.array(mean), np.array(err), np.array(cnt))

    @classmethod
    def read_csv(cls, path) -> "EstimateTable":
        with open(path, encoding="utf-8") as fh:
            return cls.from_csv_text(fh.read())


@dataclass(frozen=True)
class _Job:
    disorder: DisorderSpec
    lattice: Lattice
    observable: ObservableSpec
    pair_x: tuple
    pair_y: tuple
    group_index: tuple
    n_groups: int
    group_sizes: tuple


def _prepare_realization(obs: ObservableSpec, job: _Job, h: np.ndarray,
                         spec: SpectralData):
    """Per-realization precomputation; may raise ConditioningError."""
    if obs.kind == "q_correlator":
        return cluster_eigenvalues(spec)
    if obs.kind == "green_moment":
        return {ix: green_column(h, ix, obs.shift)
                for ix in sorted(set(job.pair_x))}
    return None


def _pair_value(obs: ObservableSpec, params: ModelParams, spec: SpectralData,
                extras, ix: int, iy: int) -> float:
    kind = obs.kind
    if kind == "q_correlator":
        return correlator_q(spec, obs.alpha, ix, iy, obs.window,
                            clusters=extras)
    if kind == "green_moment":
        return abs(extras[ix][iy]) ** obs.moment
    sx, sy = params.lattice.sites[ix], params.lattice.sites[iy]
    if kind == "weyl_commutator_sup":
        # point symbols f = delta_x, g = delta_y: the pairing amplitude is
        # exactly the qq commutator supremum
        theta = dynamics.pq_commutator_sup(spec, params, sx, sy)[0, 0]
        return 2.0 * float(np.sin(0.5 * min(theta, np.pi)))
    e = dynamics.ENTRY_INDEX[obs.entry]
    if kind == "pq_commutator_sup":
        return float(dynamics.pq_commutator_sup(spec, params, sx, sy)[e])
    if kind == "gs_pq_sup":
        return float(states.gs_pq_sup(spec, params, sx, sy)[e])
    if kind == "thermal_pq_sup":
        return float(states.thermal_pq_sup(spec, params, sx, sy, obs.beta)[e])
    if kind == "static_gs":
        return abs(states.gs_pq_correlations(spec, params, sx, sy, 0.0)[e])
    if kind == "static_thermal":
        return abs(states.thermal_pq_correlations(spec, params, sx, sy, 0.0,
                                                  obs.beta)[e])
    raise ConfigurationError(f"unknown observable kind {kind!r}")


def _realization_task(args):
    job, realization = args
    obs = job.observable
    for attempt in (0, 1):
        params = sample_params(job.disorder, job.lattice, realization, attempt)
        h = assemble_h(params)
        try:
            spec = diagonalize(h)
            extras = _prepare_realization(obs, job, h, spec)
        except (PositivityError, ConditioningError):
            continue
        vals = np.array([_pair_value(obs, params, spec, extras, ix, iy)
                         for ix, iy in zip(job.pair_x, job.pair_y)])
        vals = vals ** obs.exponent
        sums = np.bincount(np.asarray(job.group_index), weights=vals,
                           minlength=job.n_groups)
        return sums / np.asarray(job.group_sizes, dtype=float), attempt
    raise NumericalError(
        f"realization {realization} stayed degenerate after resampling")


def run_experiment(config) -> EstimateTable:
    """Estimate the configured observable, disorder averaged.

    Parameters
    ----------
    config : RunConfig
        Full run configuration (model, observable, execution blocks).

    Returns
    -------
    EstimateTable
        One row per distinct site separation under the pair policy, with
        the across-realization mean of the per-separation pair averages,
        its standard error (0 for a single realization), and the total
        sample count N * pairs.

    Degenerate realizations (positivity or conditioning failures) are
    resampled once from their reserved substream; more than 1% of them
    raises a statistical-validity error, and a realization that stays
    degenerate aborts the run.
    """
    model, obs, ex = config.model, config.observable, config.execution
    lattice = model.build_lattice()
    disorder = model.disorder(ex.seed)
    policy = all_pairs if ex.pairs == "all" else center_pairs
    xs, ys, seps = policy(lattice, ex.max_separation)
    unique = sorted(set(seps))
    sep_pos = {s: i for i, s in enumerate(unique)}
    group_index = tuple(sep_pos[s] for s in seps)
    group_sizes = tuple(np.bincount(np.asarray(group_index),
                                    minlength=len(unique)).tolist())
    job = _Job(disorder, lattice, obs, xs, ys, group_index, len(unique),
               group_sizes)
    results = map_ordered(_realization_task,
                          [(job, i) for i in range(ex.realizations)],
                          ex.workers)
    acc = np.stack([v for v, _ in results])
    n_resampled = sum(a for _, a in results)
    _check_resample_budget(n_resampled, ex.realizations)
    n = ex.realizations
    means = acc.mean(axis=0)
    stderrs = (acc.std(axis=0, ddof=1) / np.sqrt(n) if n > 1
               else np.zeros(len(unique)))
    counts = n * np.asarray(group_sizes)
    meta = {
        "observable": obs.describe(),
        "seed": ex.seed,
        "realizations": n,
        "resampled": n_resampled,
        "dimension": model.dimension,
        "half_width": model.half_width,
        "boundary": model.boundary,
        "pairs": ex.pairs,
    }
    return EstimateTable(np.asarray(unique), means, stderrs, counts, meta)


@dataclass(frozen=True)
class DecayFit:
    """Fitted exponential-decay model ``mean ~ C' exp(-mu' * separation)``."""

    c_prime: float
    mu_prime: float
    r_squared: float
    window: tuple[float, float]
    mu_stderr: float
    n_points: int


def fit_exponential_decay(table: EstimateTable, r_min: float,
                          r_max: float) -> DecayFit:
    """Weighted log-linear least squares on a decay table.

    Rows with separation in ``[r_min, r_max]`` enter with weight
    ``(mean / stderr)^2`` (delta method for log means); zero-stderr rows
    get the largest finite weight.  Requires at least 4 distinct
    separations, all with positive mean, inside the window.
    """
    mask = (table.separations >= r_min) & (table.separations <= r_max)
    if np.any(mask & (table.means <= 0)):
        bad = table.separations[mask & (table.means <= 0)]
        raise FitDomainError(
            f"non-positive means at separations {bad.tolist()} inside the fit "
            f"window; shrink the window")
    x = table.separations[mask].astype(float)
    if len(np.unique(x)) < 4:
        raise FitDomainError(
            f"need at least 4 distinct separations with positive mean in "
            f"[{r_min}, {r_max}], found {len(np.unique(x))}")
    mean = table.means[mask]
    err = table.stderrs[mask]
    y = np.log(mean)
    with np.errstate(divide="ignore"):
        w = np.where(err > 0, (mean / np.where(err > 0, err, 1.0)) ** 2, np.inf)
    finite = np.isfinite(w)
    w[~finite] = w[finite].max() if np.any(finite) else 1.0
    wsum = w.sum()
    xb = np.sum(w * x) / wsum
    yb = np.sum(w * y) / wsum
    sxx = np.sum(w * (x - xb) ** 2)
    slope = np.sum(w * (x - xb) * (y - yb)) / sxx
    intercept = yb - slope * xb
    resid = y - (intercept + slope * x)
    ss_res = np.sum(w * resid ** 2)
    ss_tot = np.sum(w * (y - yb) ** 2)
    r_squared = float(1.0 - ss_res / ss_tot) if ss_tot > 0 else 0.0
    dof = len(x) - 2
    mu_stderr = float(np.sqrt(max(ss_res, 0.0) / dof / sxx)) if dof > 0 else 0.0
    return DecayFit(c_prime=float(np.exp(intercept)), mu_prime=float(-slope),
                    r_squared=r_squared, window=(float(r_min), float(r_max)),
                    mu_stderr=mu_stderr, n_points=int(len(x)))


PRESET_NAMES = ("band_edge_static", "large_disorder", "one_dimensional")


def regime_preset(name: str):
    """Full experiment configuration for a documented disorder regime.

    ``band_edge_static``: static ground-state correlations in 2D at
    moderate disorder (localization holds near the spectral bottom in any
    dimension).  ``large_disorder``: time-sup Weyl commutators with r = 1
    at large width.  ``one_dimensional``: time-sup qq commutators with
    r = 1/2 at moderate width in 1D; p-involving observables there take
    r = 1.
    """
    from .config import ExecutionConfig, ModelConfig, RunConfig

    if name == "band_edge_static":
        return RunConfig(
            model=ModelConfig(dimension=2, half_width=8, mass=0.5,
                              coupling=1.0, disorder_width=4.0),
            observable=ObservableSpec(kind="static_gs", entry="qq",
                                      exponent=1.0),
            execution=ExecutionConfig(realizations=200, seed=7001,
                                      output="band_edge_static"))
    if name == "large_disorder":
        return RunConfig(
            model=ModelConfig(dimension=1, half_width=50, mass=0.5,
                              coupling=1.0, disorder_width=32.0),
            observable=ObservableSpec(kind="weyl_commutator_sup",
                                      exponent=1.0),
            execution=ExecutionConfig(realizations=200, seed=7002,
                                      output="large_disorder"))
    if name == "one_dimensional":
        return RunConfig(
            model=ModelConfig(dimension=1, half_width=101, mass=0.5,
                              coupling=1.0, disorder_width=8.0),
            observable=ObservableSpec(kind="pq_commutator_sup", entry="qq",
                                      exponent=0.5),
            execution=ExecutionConfig(realizations=500, seed=7003,
                                      output="one_dimensional"))
    raise ConfigurationError(
        f"unknown preset {name!r}; choose from {', '.join(PRESET_NAMES)}")
