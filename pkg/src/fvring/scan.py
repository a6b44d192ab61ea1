"""Phase-diagram sweeps over (h, g), resonance-peak refinement, and
disorder-ensemble averaging.

Grid points are enumerated row-major with h fastest and evaluated
independently, so results are identical for any worker count; failures are
recorded per point and never abort a sweep.
"""

import os
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import spectra, states
from .dynamics import TimeGrid, min_return, quench_series
from .errors import BracketingError, FvringError, ResolutionWarning
from .model import DisorderSpec, ModelSpec, build_hamiltonian


def default_jobs():
    return int(os.environ.get("FVRING_JOBS", "1"))


@dataclass(frozen=True)
class Axis:
    start: float
    stop: float
    steps: int

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("axis needs at least one step")

    def values(self):
        if self.steps == 1:
            return np.array([self.start])
        return np.linspace(self.start, self.stop, self.steps)

    def to_json(self):
        return {"start": self.start, "stop": self.stop, "steps": self.steps}


@dataclass(frozen=True)
class MinReturnMetric:
    """Minimum return probability over a fixed time window."""

    window: float = 400.0
    dt: float = 0.25
    tol: float = 1e-8
    name: str = field(default="minret", init=False)

    def to_json(self):
        return {"name": self.name, "window": self.window, "dt": self.dt, "tol": self.tol}


@dataclass(frozen=True)
class SubLeadingMetric:
    """Second-largest overlap weight of the reference state, via the dense
    eigensystem (L <= 14) or Fourier peak extraction."""

    method: str = "dense"
    t_max: float | None = None
    dt: float | None = None
    tol: float = 1e-7
    name: str = field(default="psub", init=False)

    def __post_init__(self):
        if self.method not in ("dense", "fft"):
            raise ValueError("method must be 'dense' or 'fft'")

    def to_json(self):
        return {
            "name": self.name,
            "method": self.method,
            "t_max": self.t_max,
            "dt": self.dt,
            "tol": self.tol,
        }


@dataclass(frozen=True)
class ScanGrid:
    spec: ModelSpec
    h_axis: Axis
    g_axis: Axis
    metric: object
    reference: tuple | None = None  # flip pattern; None = false vacuum

    def points(self):
        """Row-major enumeration, h fastest."""
        return [
            (h, g) for g in self.g_axis.values() for h in self.h_axis.values()
        ]

    def to_json(self):
        return {
            "spec": self.spec.to_json(),
            "h_axis": self.h_axis.to_json(),
            "g_axis": self.g_axis.to_json(),
            "metric": self.metric.to_json(),
            "reference": [list(s) for s in self.reference] if self.reference else None,
        }


@dataclass
class ScanPoint:
    h: float
    g: float
    value: float
    p1: float
    p2: float
    status: str
    seconds: float


@dataclass
class ScanResult:
    grid: ScanGrid
    points: list


@lru_cache(maxsize=8)
def _cached_reference(spec_key, reference):
    spec = ModelSpec.from_json(_unfreeze(spec_key))
    if reference is None:
        return states.false_vacuum(spec.clean())
    return states.symmetric_pattern_state(spec.L, reference)


def _freeze(doc):
    if isinstance(doc, dict):
        return tuple(sorted((k, _freeze(v)) for k, v in doc.items()))
    if isinstance(doc, list):
        return tuple(_freeze(v) for v in doc)
    return doc


def _unfreeze(frozen):
    if isinstance(frozen, tuple) and all(
        isinstance(kv, tuple) and len(kv) == 2 and isinstance(kv[0], str)
        for kv in frozen
    ):
        return {k: _unfreeze(v) for k, v in frozen}
    if isinstance(frozen, tuple):
        return [_unfreeze(v) for v in frozen]
    return frozen


def reference_state(spec, reference=None):
    """Reference state for overlap metrics: the false vacuum at the point's
    transverse field (h plays no role in preparation), or a flip pattern.
    Cached per process, since sweeps vary h much faster than g."""
    key_spec = spec.with_fields(h=0.0).clean()
    return _cached_reference(_freeze(key_spec.to_json()), reference)


def _fft_t_max(spec, metric):
    if metric.t_max is not None:
        return metric.t_max
    if spec.interaction.kind == "nn":
        try:
            from .effective import predicted_period

            return float(np.clip(20.0 * predicted_period(spec.L, spec.h, spec.g),
                                 512.0, 40000.0))
        except FvringError:
            pass
    return spectra.FFT_DEFAULT_T_MAX


def evaluate_point(spec, metric, reference=None):
    """Metric value plus top-two weight diagnostics at a single (h, g) point."""
    H = build_hamiltonian(spec)
    if isinstance(metric, MinReturnMetric):
        psi0 = reference_state(spec, reference)
        value = min_return(H, psi0, window=metric.window, dt=metric.dt, tol=metric.tol)
        return value, np.nan, np.nan, "ok"
    psi0 = reference_state(spec, reference)
    status = "ok"
    method = metric.method
    if method == "dense" and spec.L > spectra.DENSE_CAP_L:
        method = "fft"
        status = "fft-fallback"
    if method == "dense":
        spectrum = spectra.overlap_spectrum(psi0, _cached_eigensystem_for(spec))
    else:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ResolutionWarning)
            spectrum = spectra.spectral_weights_fft(
                H, psi0, t_max=_fft_t_max(spec, metric), dt=metric.dt, tol=metric.tol
            )
    p1 = float(spectrum.weights[0]) if spectrum.weights.size else np.nan
    p2 = spectra.sub_leading(spectrum) if spectrum.weights.size else np.nan
    return p2, p1, p2, status


@lru_cache(maxsize=2)
def _cached_eigensystem(spec_key):
    spec = ModelSpec.from_json(_unfreeze(spec_key))
    return spectra.eigen_decompose(build_hamiltonian(spec))


def _cached_eigensystem_for(spec):
    return _cached_eigensystem(_freeze(spec.to_json()))


def _scan_worker(args):
    grid, h, g = args
    spec = grid.spec.with_fields(h=float(h), g=float(g))
    t0 = time.perf_counter()
    try:
        value, p1, p2, status = evaluate_point(spec, grid.metric, grid.reference)
    except FvringError as exc:
        value, p1, p2 = np.nan, np.nan, np.nan
        status = f"error:{type(exc).__name__}"
    return ScanPoint(
        h=float(h), g=float(g), value=value, p1=p1, p2=p2,
        status=status, seconds=time.perf_counter() - t0,
    )


def grid_scan(grid, jobs=None):
    """Evaluate the metric at every grid point; output order and values are
    independent of the worker count."""
    jobs = default_jobs() if jobs is None else jobs
    tasks = [(grid, h, g) for h, g in grid.points()]
    if jobs <= 1 or len(tasks) == 1:
        points = [_scan_worker(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            points = list(pool.map(_scan_worker, tasks, chunksize=1))
    return ScanResult(grid=grid, points=points)


def _golden_max(fn, lo, hi, xtol):
    """Golden-section maximization on [lo, hi]."""
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fn(c), fn(d)
    while (b - a) > xtol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fn(d)
    return (c, fc) if fc >= fd else (d, fd)


def maximize_scalar(fn, lo, hi, coarse=13, zoom=9, xtol=1e-5):
    """Locate the interior maximum of fn on [lo, hi]: a coarse grid to bracket,
    one zoom grid, then golden-section. Raises BracketingError when the coarse
    maximum sits on the window edge."""
    xs = np.linspace(lo, hi, coarse)
    vals = np.array([fn(x) for x in xs])
    i = int(np.argmax(vals))
    if i == 0 or i == coarse - 1:
        raise BracketingError(
            f"maximum at window edge h={xs[i]:.6g}; widen [{lo}, {hi}]"
        )
    step = xs[1] - xs[0]
    zs = np.linspace(xs[i] - step, xs[i] + step, zoom)
    zvals = np.array([fn(z) for z in zs])
    j = int(np.argmax(zvals))
    j = min(max(j, 1), zoom - 2)
    x_star, f_star = _golden_max(fn, zs[j - 1], zs[j + 1], xtol)
    if zvals[j] > f_star:
        x_star, f_star = zs[j], zvals[j]
    return float(x_star), float(f_star)


def find_resonance(spec, h_lo, h_hi, reference=None, metric=None, xtol=1e-5):
    """Maximize the sub-leading overlap over h in [h_lo, h_hi] at fixed g.

    Returns (h_star, peak_value). The reference state is prepared once (it
    does not depend on h).
    """
    metric = metric or SubLeadingMetric()
    psi0 = reference_state(spec, reference)

    def fn(h):
        pt = spec.with_fields(h=float(h))
        H = build_hamiltonian(pt)
        if metric.method == "dense" and pt.L <= spectra.DENSE_CAP_L:
            spectrum = spectra.overlap_spectrum(psi0, spectra.eigen_decompose(H))
        else:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", ResolutionWarning)
                spectrum = spectra.spectral_weights_fft(
                    H, psi0, t_max=_fft_t_max(pt, metric), dt=metric.dt, tol=metric.tol
                )
        return spectra.sub_leading(spectrum)

    return maximize_scalar(fn, h_lo, h_hi, xtol=xtol)


@dataclass(frozen=True)
class EnsembleSpec:
    sigma: float
    n_real: int
    seed: int

    def __post_init__(self):
        if self.n_real < 1:
            raise ValueError("need at least one realization")


@dataclass
class EnsembleSeries:
    """Disorder-averaged time series with standard-error bands."""

    times: np.ndarray
    mean: dict
    stderr: dict
    n_real: int
    failures: list


def _ensemble_worker(args):
    spec, k, psi0, grid, observables, tol = args
    try:
        series = quench_series(
            build_hamiltonian(spec), psi0, grid, tol=tol,
            observables=tuple(o for o in observables if o != "p_ret"),
            amplitude="p_ret" in observables,
        )
        return k, {o: series.values[o] for o in observables}, None
    except FvringError as exc:
        return k, None, f"{type(exc).__name__}: {exc}"


def disorder_ensemble(
    spec, ensemble, grid, observables=("p_ret", "m"), tol=1e-8, jobs=None
):
    """Per-time mean and standard error over disorder realizations.

    Realization k draws couplings with DisorderSpec(sigma, seed, k); the
    initial state is the clean-model false vacuum. Failed realizations are
    excluded and reported.
    """
    if spec.interaction.kind != "nn":
        raise ValueError("disorder ensembles are defined for the NN interaction")
    bad = set(observables) - {"p_ret", "m"}
    if bad:
        raise ValueError(f"ensemble averaging supports p_ret and m, got {sorted(bad)}")
    jobs = default_jobs() if jobs is None else jobs
    psi0 = states.false_vacuum(spec.clean())
    tasks = [
        (
            spec.with_fields(
                disorder=DisorderSpec(ensemble.sigma, ensemble.seed, k)
                if ensemble.sigma > 0
                else None
            ),
            k,
            psi0,
            grid,
            tuple(observables),
            tol,
        )
        for k in range(ensemble.n_real)
    ]
    if jobs <= 1 or len(tasks) == 1:
        rows = [_ensemble_worker(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_ensemble_worker, tasks, chunksize=4))
    rows.sort(key=lambda r: r[0])
    failures = [(k, msg) for k, values, msg in rows if values is None]
    good = [values for _, values, msg in rows if values is not None]
    if not good:
        raise FvringError("every disorder realization failed")
    times = grid.times()
    mean, stderr = {}, {}
    n = len(good)
    for obs in observables:
        stack = np.vstack([np.asarray(v[obs], dtype=np.float64) for v in good])
        mean[obs] = stack.mean(axis=0)
        stderr[obs] = (
            stack.std(axis=0, ddof=1) / np.sqrt(n) if n > 1 else np.zeros(times.size)
        )
    return EnsembleSeries(
        times=times, mean=mean, stderr=stderr, n_real=n, failures=failures
    )
