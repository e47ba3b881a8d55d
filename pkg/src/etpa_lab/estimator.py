"""Recover sigma_E from coincidence-count data.

Pipeline, per experiment:

1. summarize every series (mean rate, sample std, stderr of the mean);
2. calibrate pump power against the solvent coincidence rate;
3. form R_abs = R_solvent - R_sample at each pump power;
4. fit R_abs against calibrated R_solvent with a weighted,
   origin-forced straight line;
5. convert the slope to sigma_E and tabulate across concentrations.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Literal, Sequence

import numpy as np

from .model import ExperimentGeometry
from .source import Dataset, MeasurementSeries
from .units import molar_to_number_density

__all__ = [
    "AnalysisOptions",
    "ConcentrationDegeneracyError",
    "ConcentrationTable",
    "DegenerateDesignError",
    "ExperimentAnalysis",
    "FitResult",
    "PairingError",
    "ProductComparison",
    "RateSummary",
    "SampleAnalysis",
    "SigmaEResult",
    "analyze_dataset",
    "calibrate_pump",
    "compute_r_abs",
    "concentration_series",
    "fit_linear",
    "fit_through_origin",
    "sigma_e_from_slope",
    "summarize_series",
]


class DegenerateDesignError(ValueError):
    """The regressors cannot identify a slope."""


class PairingError(ValueError):
    """Solvent and sample summaries were taken at different pump powers."""


class ConcentrationDegeneracyError(ZeroDivisionError):
    pass


@dataclass(frozen=True)
class RateSummary:
    mean: float
    std: float
    stderr: float
    n_bins: int
    pump_power_mw: float | None = None

    def sigma(self, weights: str = "std") -> float:
        if weights == "std":
            return self.std
        if weights == "stderr":
            return self.stderr
        raise ValueError(f"unknown weighting {weights!r}")


def summarize_series(
    series: MeasurementSeries,
    channel: str = "coincidences",
    accidental_window_s: float | None = None,
) -> RateSummary:
    """Mean rate with the bin-to-bin sample std and the stderr of the mean.

    With ``accidental_window_s`` set, each bin's coincidence rate has
    s1*s2*tau subtracted before averaging.
    """
    if series.n_bins == 0:
        raise ValueError("cannot summarize an empty series")
    rates = series.rates(channel).astype(float)
    if accidental_window_s is not None:
        if channel != "coincidences":
            raise ValueError("accidental subtraction only applies to coincidences")
        rates = rates - series.rates("singles1") * series.rates("singles2") * accidental_window_s
    n = len(rates)
    std = float(rates.std(ddof=1)) if n > 1 else 0.0
    return RateSummary(float(rates.mean()), std, std / math.sqrt(n), n, series.pump_power_mw)


@dataclass(frozen=True)
class FitResult:
    slope: float
    slope_stderr: float
    n_points: int
    chi2_reduced: float
    forced_through_origin: bool = True
    weighted: bool = True
    intercept: float = 0.0
    intercept_stderr: float = 0.0

    def predict(self, x):
        return self.intercept + self.slope * np.asarray(x, dtype=float)


def _as_arrays(x, y, sigma):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-D arrays of equal length")
    if len(x) < 2:
        raise DegenerateDesignError(f"need at least 2 points, got {len(x)}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("x and y must be finite")
    if sigma is None:
        return x, y, None
    sigma = np.asarray(sigma, dtype=float)
    if sigma.shape != x.shape:
        raise ValueError("sigma must match x in length")
    # any missing or non-positive uncertainty drops the fit to unweighted mode
    if not np.all(np.isfinite(sigma) & (sigma > 0)):
        return x, y, None
    return x, y, sigma


def fit_through_origin(x, y, sigma=None) -> FitResult:
    """Weighted least squares for y = b*x.

    With weights w = 1/sigma^2: b = sum(w x y)/sum(w x^2) and
    stderr = 1/sqrt(sum(w x^2)). Without usable sigmas the fit is
    unweighted and the stderr comes from the residual scatter.
    """
    x, y, sigma = _as_arrays(x, y, sigma)
    n = len(x)
    w = np.ones_like(x) if sigma is None else sigma**-2
    sxx = float(np.sum(w * x * x))
    if sxx == 0:
        raise DegenerateDesignError("all x are zero; slope through the origin is undefined")
    slope = float(np.sum(w * x * y)) / sxx
    chi2 = float(np.sum(w * (y - slope * x) ** 2)) / (n - 1)
    if sigma is None:
        stderr = math.sqrt(chi2 / sxx)
    else:
        stderr = 1.0 / math.sqrt(sxx)
    return FitResult(slope, stderr, n, chi2, True, sigma is not None)


def fit_linear(x, y, sigma=None) -> FitResult:
    """Weighted least squares for y = a + b*x."""
    x, y, sigma = _as_arrays(x, y, sigma)
    n = len(x)
    if n < 3 and sigma is None:
        raise DegenerateDesignError("an unweighted line with intercept needs at least 3 points")
    w = np.ones_like(x) if sigma is None else sigma**-2
    s, sx, sy = w.sum(), np.sum(w * x), np.sum(w * y)
    xm = x - sx / s
    stt = float(np.sum(w * xm * xm))
    if stt == 0:
        raise DegenerateDesignError("all x are identical")
    slope = float(np.sum(w * xm * y)) / stt
    intercept = float((sy - sx * slope) / s)
    dof = max(n - 2, 1)
    chi2 = float(np.sum(w * (y - intercept - slope * x) ** 2)) / dof
    scale = chi2 if sigma is None else 1.0
    var_b = scale / stt
    var_a = scale * (1.0 / s + (sx / s) ** 2 / stt)
    return FitResult(slope, math.sqrt(var_b), n, chi2, False, sigma is not None,
                     intercept, math.sqrt(var_a))


def calibrate_pump(points: Sequence[tuple[float, float, float]], through_origin: bool = True) -> FitResult:
    """Fit solvent coincidence rate against pump power (mW).

    ``points`` are (power, mean rate, rate uncertainty) triples. The
    returned slope maps mW to pairs/s.
    """
    p = np.array([pt[0] for pt in points], dtype=float)
    if len(np.unique(p)) < 2:
        raise DegenerateDesignError("calibration needs at least two distinct pump powers")
    r = [pt[1] for pt in points]
    s = [pt[2] for pt in points]
    return fit_through_origin(p, r, s) if through_origin else fit_linear(p, r, s)


@dataclass(frozen=True)
class AbsorbedRate:
    value: float
    std: float
    stderr: float
    pump_power_mw: float | None = None

    @property
    def negative(self) -> bool:
        return self.value < 0

    def sigma(self, weights: str = "std") -> float:
        if weights not in ("std", "stderr"):
            raise ValueError(f"unknown weighting {weights!r}")
        return self.std if weights == "std" else self.stderr


def compute_r_abs(solvent: RateSummary, sample: RateSummary) -> AbsorbedRate:
    """R_solvent - R_sample with uncertainties added in quadrature.

    Negative differences are kept as-is; check ``.negative``.
    """
    p1, p2 = solvent.pump_power_mw, sample.pump_power_mw
    if p1 is not None and p2 is not None and not math.isclose(p1, p2, rel_tol=1e-9, abs_tol=1e-12):
        raise PairingError(f"pump powers differ: solvent {p1} mW, sample {p2} mW")
    return AbsorbedRate(
        solvent.mean - sample.mean,
        math.hypot(solvent.std, sample.std),
        math.hypot(solvent.stderr, sample.stderr),
        p1 if p1 is not None else p2,
    )


@dataclass(frozen=True)
class SigmaEResult:
    sigma_e: float
    sigma_e_uncertainty: float
    concentration: float
    label: str = ""


def sigma_e_from_slope(
    slope: float,
    slope_stderr: float,
    concentration: float,
    geometry: ExperimentGeometry,
    label: str = "",
    geometry_uncertainty: float = 0.0,
) -> SigmaEResult:
    """Invert slope = n*V*sigma_E/A for sigma_E.

    ``geometry_uncertainty`` is a fractional uncertainty on A/V, added in
    quadrature to the fit uncertainty. A negative slope (noise) gives a
    negative estimate rather than being clipped.
    """
    n = molar_to_number_density(concentration)
    if n == 0:
        raise ConcentrationDegeneracyError(
            "concentration is zero: the slope only fixes the product sigma_E*c, "
            "so sigma_E cannot be separated from c"
        )
    if slope_stderr < 0 or geometry_uncertainty < 0:
        raise ValueError("uncertainties must be non-negative")
    factor = geometry.area / (n * geometry.volume)
    sigma = slope * factor
    unc = math.hypot(slope_stderr * factor, sigma * geometry_uncertainty)
    return SigmaEResult(sigma, unc, concentration, label)


@dataclass(frozen=True)
class ProductComparison:
    label_a: str
    label_b: str
    product_a: float  # sigma_E * c, cm^2 molecule^-1 mol L^-1
    product_b: float

    @property
    def relative_difference(self) -> float:
        """|a - b| relative to their mean."""
        mean = (self.product_a + self.product_b) / 2
        return abs(self.product_a - self.product_b) / mean if mean else 0.0


@dataclass(frozen=True)
class ConcentrationTable:
    rows: tuple[SigmaEResult, ...]
    products: tuple[ProductComparison, ...]
    decay_violations: tuple[tuple[str, str], ...]

    @property
    def monotonic_decay(self) -> bool:
        return not self.decay_violations

    def product_of(self, label_a: str, label_b: str) -> ProductComparison:
        for pc in self.products:
            if {pc.label_a, pc.label_b} == {label_a, label_b}:
                return pc
        raise KeyError((label_a, label_b))


def concentration_series(results: Sequence[SigmaEResult]) -> ConcentrationTable:
    """Sort by concentration and compare sigma_E*c across every pair of rows.

    A decay violation is an adjacent pair where sigma_E does not drop as
    the concentration rises.
    """
    if not results:
        raise ValueError("no results to tabulate")
    rows = sorted(results, key=lambda r: r.concentration)
    for a, b in zip(rows, rows[1:]):
        if a.concentration == b.concentration:
            raise ValueError(f"duplicate concentration {a.concentration} ({a.label!r}, {b.label!r})")
    products = tuple(
        ProductComparison(a.label, b.label, a.sigma_e * a.concentration, b.sigma_e * b.concentration)
        for a, b in combinations(rows, 2)
    )
    violations = tuple((a.label, b.label) for a, b in zip(rows, rows[1:]) if b.sigma_e >= a.sigma_e)
    return ConcentrationTable(tuple(rows), products, violations)


# --------------------------------------------------------------------------
# whole-dataset analysis


@dataclass(frozen=True)
class AnalysisOptions:
    weights: Literal["std", "stderr"] = "std"
    subtract_accidentals: bool = False
    coincidence_window_s: float = 9e-9
    geometry_uncertainty: float = 0.0
    # x-axis for the R_abs fit: "calibrated" uses the pump calibration line,
    # "measured" the solvent mean at the same power
    x_source: Literal["calibrated", "measured"] = "calibrated"

    def __post_init__(self) -> None:
        if self.weights not in ("std", "stderr"):
            raise ValueError(f"weights must be 'std' or 'stderr', got {self.weights!r}")
        if self.x_source not in ("calibrated", "measured"):
            raise ValueError(f"x_source must be 'calibrated' or 'measured', got {self.x_source!r}")
        if self.geometry_uncertainty < 0:
            raise ValueError("geometry_uncertainty must be >= 0")


@dataclass(frozen=True)
class SampleAnalysis:
    label: str
    concentration: float
    pump_powers_mw: tuple[float, ...]
    r_solvent: tuple[float, ...]  # fit x values
    r_abs: tuple[AbsorbedRate, ...]
    fit: FitResult
    sigma_e: SigmaEResult | None  # None for a zero-concentration sample

    @property
    def negative_points(self) -> int:
        return sum(r.negative for r in self.r_abs)


@dataclass
class ExperimentAnalysis:
    reference_label: str
    calibration: FitResult
    solvent: tuple[RateSummary, ...]
    sample_summaries: dict[str, tuple[RateSummary, ...]]
    samples: list[SampleAnalysis]
    table: ConcentrationTable | None = None
    options: AnalysisOptions = field(default_factory=AnalysisOptions)


def analyze_dataset(
    dataset: Dataset,
    geometry: ExperimentGeometry,
    options: AnalysisOptions | None = None,
) -> ExperimentAnalysis:
    opts = options or AnalysisOptions()
    window = opts.coincidence_window_s if opts.subtract_accidentals else None

    def summaries(label: str) -> dict[float, RateSummary]:
        out = {}
        for s in dataset.for_label(label):
            if s.pump_power_mw in out:
                raise PairingError(f"{label!r}: pump power {s.pump_power_mw} mW appears twice")
            out[s.pump_power_mw] = summarize_series(s, accidental_window_s=window)
        return out

    ref = dataset.reference_label
    solvent = summaries(ref)
    calibration = calibrate_pump([(p, r.mean, r.sigma(opts.weights)) for p, r in solvent.items()])

    analyses: list[SampleAnalysis] = []
    sample_summaries: dict[str, tuple[RateSummary, ...]] = {}
    for label in dataset.sample_labels:
        conc = dataset.concentration(label)
        samp = summaries(label)
        missing = set(samp) ^ set(solvent)
        if missing:
            raise PairingError(f"{label!r}: pump powers without a solvent/sample partner: {sorted(missing)}")
        powers = tuple(sorted(samp))
        r_abs = tuple(compute_r_abs(solvent[p], samp[p]) for p in powers)
        if opts.x_source == "calibrated":
            x = tuple(float(v) for v in calibration.predict(powers))
        else:
            x = tuple(solvent[p].mean for p in powers)
        fit = fit_through_origin(x, [r.value for r in r_abs], [r.sigma(opts.weights) for r in r_abs])
        sig = None
        if conc > 0:
            sig = sigma_e_from_slope(fit.slope, fit.slope_stderr, conc, geometry, label,
                                     opts.geometry_uncertainty)
        sample_summaries[label] = tuple(samp[p] for p in powers)
        analyses.append(SampleAnalysis(label, conc, powers, x, r_abs, fit, sig))

    rows = [a.sigma_e for a in analyses if a.sigma_e is not None]
    table = concentration_series(rows) if rows else None
    return ExperimentAnalysis(
        ref,
        calibration,
        tuple(solvent[p] for p in sorted(solvent)),
        sample_summaries,
        analyses,
        table,
        opts,
    )
