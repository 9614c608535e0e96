"""Four-plane alternating-projection phase retrieval.

One iteration visits the planes ww -> wt -> tt -> tw -> ww, replacing the
magnitude with the measured one at each active plane while keeping the phase,
and moving between planes with the single-photon Fourier transforms.  The
FROG-trace error against the ww constraint is recorded every iteration.
"""

from dataclasses import dataclass, field

import numpy as np

from .grids import (
    FREQUENCY,
    IDLER,
    SIGNAL,
    TIME,
    TO_FREQUENCY,
    TO_TIME,
    ComplexGrid2D,
    IntensityGrid2D,
    conjugate_axis,
    transform_photon,
)

PLANES = ("ww", "wt", "tw", "tt")


class RetrievalError(RuntimeError):
    """Retrieval aborted (non-finite values encountered)."""


@dataclass(frozen=True)
class MeasurementSet:
    """The four intensity constraints on mutually conjugate axes."""

    i_ww: IntensityGrid2D
    i_wt: IntensityGrid2D
    i_tw: IntensityGrid2D
    i_tt: IntensityGrid2D
    coverage_warning: bool = False

    def __post_init__(self):
        fs, fi = self.i_ww.axis_s, self.i_ww.axis_i
        ts, ti = conjugate_axis(fs), conjugate_axis(fi)
        if fs.domain != FREQUENCY or fi.domain != FREQUENCY:
            raise ValueError("i_ww must live on frequency-frequency axes")
        checks = [
            (self.i_wt, fs, ti),
            (self.i_tw, ts, fi),
            (self.i_tt, ts, ti),
        ]
        for grid, want_s, want_i in checks:
            if not (grid.axis_s.compatible_with(want_s) and grid.axis_i.compatible_with(want_i)):
                raise ValueError("measurement axes are not mutually conjugate")
        for grid in (self.i_ww, self.i_wt, self.i_tw, self.i_tt):
            if np.any(grid.values < 0):
                raise ValueError("measured intensities must be nonnegative")

    def grids(self):
        return {"ww": self.i_ww, "wt": self.i_wt, "tw": self.i_tw, "tt": self.i_tt}


@dataclass(frozen=True)
class RetrievalConfig:
    iterations: int = 1000
    seed: int = 0
    init: str = "random_phase"  # random_phase | flat_phase | supplied
    zero_magnitude_epsilon: float = 1e-12
    constraint_mask: frozenset = frozenset(PLANES)
    initial_guess: ComplexGrid2D | None = None

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        object.__setattr__(self, "constraint_mask", frozenset(self.constraint_mask))
        unknown = self.constraint_mask - set(PLANES)
        if unknown:
            raise ValueError(f"unknown constraint planes {sorted(unknown)}")
        if self.init == "supplied" and self.initial_guess is None:
            raise ValueError("init='supplied' needs an initial_guess")


@dataclass(frozen=True)
class RetrievalResult:
    jsa: ComplexGrid2D
    error_history_ww: np.ndarray
    error_final_tt: float
    seed: int
    iterations_run: int


def project_magnitude(f: ComplexGrid2D, i: IntensityGrid2D, eps: float = 1e-12) -> ComplexGrid2D:
    """Replace |f| with sqrt(i), keeping the phase.  Where |f| < eps the
    phase factor is taken as 1 so the output is real sqrt(i)."""
    if not (f.axis_s.compatible_with(i.axis_s) and f.axis_i.compatible_with(i.axis_i)):
        raise ValueError("projection axes do not match")
    mag = np.abs(f.values)
    phase = np.where(mag < eps, 1.0 + 0.0j, f.values / np.where(mag < eps, 1.0, mag))
    return f.with_values(phase * np.sqrt(i.values))


def frog_error(i_meas: IntensityGrid2D, i_rec) -> float:
    """RMS per-pixel error between unit-peak normalized intensities with the
    closed-form optimal scale applied to the reconstruction."""
    m = np.asarray(i_meas.values if isinstance(i_meas, IntensityGrid2D) else i_meas, dtype=float)
    r = np.asarray(i_rec.values if isinstance(i_rec, IntensityGrid2D) else i_rec, dtype=float)
    if m.shape != r.shape:
        raise ValueError("grid shapes do not match")
    peak = m.max()
    if peak <= 0:
        raise ValueError("measured grid is identically zero")
    m = m / peak
    rpeak = r.max()
    if rpeak > 0:
        r = r / rpeak
    denom = np.sum(r * r)
    mu = np.sum(m * r) / denom if denom > 0 else 0.0
    return float(np.sqrt(np.mean((m - mu * r) ** 2)))


def _initial_state(m: MeasurementSet, cfg: RetrievalConfig) -> ComplexGrid2D:
    if cfg.init == "supplied":
        g = cfg.initial_guess
        if not (
            g.axis_s.compatible_with(m.i_ww.axis_s) and g.axis_i.compatible_with(m.i_ww.axis_i)
        ):
            raise ValueError("supplied initial guess axes do not match the measurements")
        return g
    amp = np.sqrt(m.i_ww.values)
    if cfg.init == "flat_phase":
        values = amp.astype(complex)
    elif cfg.init == "random_phase":
        rng = np.random.default_rng(cfg.seed)
        values = amp * np.exp(2j * np.pi * rng.random(amp.shape))
    else:
        raise ValueError(f"unknown init {cfg.init!r}")
    return ComplexGrid2D(m.i_ww.axis_s, m.i_ww.axis_i, values)


def run_retrieval(m: MeasurementSet, cfg: RetrievalConfig) -> RetrievalResult:
    """Run the alternating-projection loop for cfg.iterations iterations.

    The ww-plane error is evaluated on the estimate returned to the ww plane
    at the end of each cycle (before the next projection), which is the
    quantity the algorithm never increases when all four constraints are on.
    """
    eps = cfg.zero_magnitude_epsilon
    mask = cfg.constraint_mask
    f = _initial_state(m, cfg)
    history = np.empty(cfg.iterations)

    for k in range(cfg.iterations):
        if "ww" in mask:
            f = project_magnitude(f, m.i_ww, eps)
        f = transform_photon(f, IDLER, TO_TIME)
        if "wt" in mask:
            f = project_magnitude(f, m.i_wt, eps)
        f = transform_photon(f, SIGNAL, TO_TIME)
        if "tt" in mask:
            f = project_magnitude(f, m.i_tt, eps)
        f = transform_photon(f, IDLER, TO_FREQUENCY)
        if "tw" in mask:
            f = project_magnitude(f, m.i_tw, eps)
        f = transform_photon(f, SIGNAL, TO_FREQUENCY)
        if not np.all(np.isfinite(f.values)):
            raise RetrievalError(f"non-finite state after iteration {k + 1}")
        history[k] = frog_error(m.i_ww, np.abs(f.values) ** 2)

    f_tt = transform_photon(transform_photon(f, IDLER, TO_TIME), SIGNAL, TO_TIME)
    err_tt = frog_error(m.i_tt, np.abs(f_tt.values) ** 2)
    return RetrievalResult(
        jsa=f,
        error_history_ww=history,
        error_final_tt=err_tt,
        seed=cfg.seed,
        iterations_run=cfg.iterations,
    )


def gauge_fix(g: ComplexGrid2D) -> ComplexGrid2D:
    """Rotate the global phase so the peak-intensity pixel is real positive."""
    idx = np.unravel_index(np.argmax(np.abs(g.values)), g.values.shape)
    ref = g.values[idx]
    if ref == 0:
        return g
    return g.with_values(g.values * np.exp(-1j * np.angle(ref)))
