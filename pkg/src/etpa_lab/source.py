"""Monte Carlo model of the SPDC source and coincidence-counting chain.

Counts are drawn per bin from closed-form mean rates; no photon
timestamps are simulated. Detection chain, per pump power P:

    pairs at sample     N   = k_cal * P * T_solvent
    surviving pairs     N_s = N * (1 - f)          f = absorption fraction
    singles, each arm   R_i = N_s * eta * eta_c + dark
    true coincidences   C   = N_s * (eta * eta_c)^2 / 2   (50/50 splitter)
    accidentals         A   = R_1 * R_2 * tau

Random streams come from numpy's Philox4x64-10 counter-based generator,
keyed by ``SeedSequence((seed, stream, sample_index, power_index))`` so
each (sample, power) point is independent of the order points are
simulated in. ``stream`` separates experiments that share a master seed.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .model import ExperimentGeometry, ModelBreakdownWarning, SampleSpec, absorption_fraction

__all__ = [
    "CHANNELS",
    "ConfigurationError",
    "Dataset",
    "ExpectedRates",
    "MeasurementSeries",
    "SourceConfig",
    "expected_rates",
    "pair_flux_density",
    "pair_rate_from_pump",
    "point_rng",
    "run_experiment",
    "simulate_series",
]

CHANNELS = ("singles1", "singles2", "coincidences")

# Largest mean count per bin we will hand to the Poisson sampler; beyond
# this float64 no longer represents every integer.
MAX_MEAN_COUNT = float(2**53)


class ConfigurationError(ValueError):
    pass


def _default_powers() -> tuple[float, ...]:
    return tuple(float(p) for p in range(1, 21))


@dataclass(frozen=True)
class SourceConfig:
    """Source, detection and acquisition parameters.

    Defaults put the detected singles near 5e5 s^-1 (both detectors
    together) at 20 mW, with a 9 ns coincidence window and 60 one-second
    bins per pump power.
    """

    pump_powers_mw: tuple[float, ...] = field(default_factory=_default_powers)
    pairs_per_mw: float = 2.5e5
    detector_efficiency: float = 0.5
    coupling_efficiency: float = 0.1
    coincidence_window_s: float = 9e-9
    bin_duration_s: float = 1.0
    bins_per_point: int = 60
    solvent_transmission: float = 1.0
    dark_count_rate: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        powers = tuple(float(p) for p in self.pump_powers_mw)
        object.__setattr__(self, "pump_powers_mw", powers)
        if not powers:
            raise ConfigurationError("pump_powers_mw is empty")
        if any(not math.isfinite(p) or p < 0 for p in powers):
            raise ConfigurationError(f"pump powers must be finite and >= 0: {powers}")
        for name in ("detector_efficiency", "coupling_efficiency"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise ConfigurationError(f"{name} must lie in [0, 1], got {v}")
        if not 0 < self.solvent_transmission <= 1:
            raise ConfigurationError(f"solvent_transmission must lie in (0, 1], got {self.solvent_transmission}")
        if not (math.isfinite(self.pairs_per_mw) and self.pairs_per_mw >= 0):
            raise ConfigurationError(f"pairs_per_mw must be >= 0, got {self.pairs_per_mw}")
        if not (math.isfinite(self.dark_count_rate) and self.dark_count_rate >= 0):
            raise ConfigurationError(f"dark_count_rate must be >= 0, got {self.dark_count_rate}")
        if not self.coincidence_window_s > 0 or not self.bin_duration_s > 0:
            raise ConfigurationError("coincidence window and bin duration must be positive")
        if int(self.bins_per_point) != self.bins_per_point or self.bins_per_point < 1:
            raise ConfigurationError(f"bins_per_point must be a positive integer, got {self.bins_per_point}")
        if not isinstance(self.seed, (int, np.integer)) or not 0 <= self.seed < 2**64:
            raise ConfigurationError(f"seed must be an integer in [0, 2**64), got {self.seed!r}")

    @property
    def detection_probability(self) -> float:
        """Probability that one photon leaving the sample produces a click."""
        return self.detector_efficiency * self.coupling_efficiency


def pair_rate_from_pump(power_mw: float, pairs_per_mw: float) -> float:
    if power_mw < 0 or pairs_per_mw < 0:
        raise ValueError("pump power and pairs_per_mw must be non-negative")
    return pairs_per_mw * power_mw


def pair_flux_density(config: SourceConfig, geometry: ExperimentGeometry, pump_power_mw: float) -> float:
    """Pairs s^-1 cm^-2 entering the sample; the photon flux density is twice this."""
    return pair_rate_from_pump(pump_power_mw, config.pairs_per_mw) / geometry.area


@dataclass(frozen=True)
class ExpectedRates:
    pump_power_mw: float
    pair_rate: float  # pairs/s arriving at the sample
    absorption_fraction: float
    singles1: float
    singles2: float
    true_coincidences: float
    accidentals: float

    @property
    def coincidences(self) -> float:
        return self.true_coincidences + self.accidentals

    @property
    def breakdown(self) -> bool:
        return self.absorption_fraction >= 1

    @property
    def singles_total(self) -> float:
        return self.singles1 + self.singles2


def expected_rates(
    config: SourceConfig,
    sample: SampleSpec,
    geometry: ExperimentGeometry,
    pump_power_mw: float,
) -> ExpectedRates:
    """Mean count rates (s^-1) for one sample at one pump power."""
    pairs = pair_rate_from_pump(pump_power_mw, config.pairs_per_mw) * config.solvent_transmission
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ModelBreakdownWarning)
        f = absorption_fraction(sample.concentration, geometry, sample.sigma_e)
    if caught:
        warnings.warn(
            f"sample {sample.label!r}: absorption fraction {f:.4g} >= 1, "
            "no pairs survive in the simulation",
            ModelBreakdownWarning,
            stacklevel=2,
        )
    surviving = pairs * max(0.0, 1.0 - f)
    eta = config.detection_probability
    singles = surviving * eta + config.dark_count_rate
    true_c = surviving * eta**2 / 2
    acc = singles * singles * config.coincidence_window_s
    return ExpectedRates(pump_power_mw, pairs, f, singles, singles, true_c, acc)


@dataclass
class MeasurementSeries:
    """Per-bin counts for one sample at one pump power.

    ``counts`` has one row per bin and columns (singles1, singles2,
    coincidences).
    """

    label: str
    concentration: float
    pump_power_mw: float
    bin_duration_s: float
    counts: np.ndarray

    def __post_init__(self) -> None:
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.ndim != 2 or counts.shape[1] != 3:
            raise ValueError(f"counts must have shape (n, 3), got {counts.shape}")
        if (counts < 0).any():
            raise ValueError("counts must be non-negative")
        if len(counts) and (counts[:, 2] > counts[:, :2].min(axis=1)).any():
            raise ValueError("coincidences exceed singles in some bin")
        self.counts = counts

    @property
    def n_bins(self) -> int:
        return len(self.counts)

    @property
    def singles1(self) -> np.ndarray:
        return self.counts[:, 0]

    @property
    def singles2(self) -> np.ndarray:
        return self.counts[:, 1]

    @property
    def coincidences(self) -> np.ndarray:
        return self.counts[:, 2]

    def rates(self, channel: str) -> np.ndarray:
        return self.counts[:, CHANNELS.index(channel)] / self.bin_duration_s

    @property
    def summary(self) -> dict[str, tuple[float, float]]:
        """(mean rate, sample standard deviation) per channel, in s^-1."""
        out = {}
        for ch in CHANNELS:
            r = self.rates(ch)
            std = float(r.std(ddof=1)) if len(r) > 1 else 0.0
            out[ch] = (float(r.mean()), std)
        return out


@dataclass
class Dataset:
    """All series from one experiment. The first pure-solvent label is the reference."""

    series: list[MeasurementSeries]

    def __post_init__(self) -> None:
        if not self.series:
            raise ValueError("dataset is empty")

    @property
    def labels(self) -> list[str]:
        return list(dict.fromkeys(s.label for s in self.series))

    def concentration(self, label: str) -> float:
        return self.for_label(label)[0].concentration

    def for_label(self, label: str) -> list[MeasurementSeries]:
        out = [s for s in self.series if s.label == label]
        if not out:
            raise KeyError(label)
        return out

    @property
    def reference_label(self) -> str:
        for label in self.labels:
            if self.concentration(label) == 0:
                return label
        raise ConfigurationError("dataset has no pure-solvent (c = 0) reference")

    @property
    def sample_labels(self) -> list[str]:
        ref = self.reference_label
        return [lb for lb in self.labels if lb != ref]


def point_rng(seed: int, sample_index: int, power_index: int, stream: int = 0) -> np.random.Generator:
    ss = np.random.SeedSequence((int(seed), int(stream), int(sample_index), int(power_index)))
    return np.random.Generator(np.random.Philox(ss))


def _sample_bins(rates: ExpectedRates, config: SourceConfig, rng: np.random.Generator) -> np.ndarray:
    n, T = int(config.bins_per_point), config.bin_duration_s
    # Singles are built from shared true coincidences plus independent extra
    # clicks, so the marginals stay Poisson with the right means while every
    # bin satisfies coincidences <= min(singles).
    means = np.array([
        rates.true_coincidences,
        rates.singles1 - rates.true_coincidences,
        rates.singles2 - rates.true_coincidences,
        rates.accidentals,
    ]) * T
    if not np.all(np.isfinite(means)) or means.max() > MAX_MEAN_COUNT:
        raise ConfigurationError(
            f"expected counts per bin ({means.max():.3g}) exceed the representable range"
        )
    draws = rng.poisson(np.clip(means, 0.0, None), size=(n, 4))
    true_c, extra1, extra2, acc = draws.T
    # accidental pairs are made of extra clicks, so they cannot outnumber them
    acc = np.minimum(acc, np.minimum(extra1, extra2))
    return np.column_stack([true_c + extra1, true_c + extra2, true_c + acc]).astype(np.int64)


def simulate_series(
    config: SourceConfig,
    sample: SampleSpec,
    geometry: ExperimentGeometry,
    sample_index: int = 0,
    stream: int = 0,
) -> list[MeasurementSeries]:
    """One MeasurementSeries per configured pump power."""
    out = []
    for j, power in enumerate(config.pump_powers_mw):
        rates = expected_rates(config, sample, geometry, power)
        rng = point_rng(config.seed, sample_index, j, stream)
        out.append(
            MeasurementSeries(
                sample.label,
                sample.concentration,
                power,
                config.bin_duration_s,
                _sample_bins(rates, config, rng),
            )
        )
    return out


def run_experiment(
    config: SourceConfig,
    samples: Sequence[SampleSpec] | Iterable[SampleSpec],
    geometry: ExperimentGeometry,
    stream: int = 0,
) -> Dataset:
    """Simulate every sample at every pump power.

    Exactly one label must be the solvent reference: the first sample with
    zero concentration. It is written first in the returned dataset.
    """
    samples = list(samples)
    labels = [s.label for s in samples]
    if len(set(labels)) != len(labels):
        raise ConfigurationError(f"duplicate sample labels: {labels}")
    solvents = [i for i, s in enumerate(samples) if s.is_solvent]
    if not solvents:
        raise ConfigurationError("no pure-solvent reference (concentration 0) among samples")
    order = [solvents[0]] + [i for i in range(len(samples)) if i != solvents[0]]
    series: list[MeasurementSeries] = []
    for i in order:
        # sub-seeds follow the caller's sample index, not the output order
        series.extend(simulate_series(config, samples[i], geometry, sample_index=i, stream=stream))
    return Dataset(series)
