"""Run configuration: a sectioned key = value file.

Example::

    [run]
    mode = roundtrip
    seed = 7
    format = table

    [geometry]
    beam_waist = 61 um
    wavelength = 808 nm
    path_length = 10 mm
    area = 2e-4 cm2

    [source]
    pump_powers_mW = 1..20
    pairs_per_mW = 2.5e5
    detector_efficiency = 0.5
    coupling_efficiency = 0.1
    coincidence_window = 9 ns
    bin_duration = 1 s
    bins_per_point = 60

    [analysis]
    weights = std
    subtract_accidentals = no
    geometry_uncertainty = 0

    [io]
    dataset = dataset.csv
    out_dir = out

    [sample:toluene]
    concentration = 0

    [sample:ZnTPP-63uM]
    concentration = 63 uM
    sigma_e = 5.1e-18 cm2/molecule

Dimensioned values take an optional unit from ``units.UNITS``; a bare
number is read in the key's default unit (shown above).
"""
from __future__ import annotations

import configparser
import hashlib
import os
from dataclasses import dataclass, field, replace
from pathlib import Path

from .estimator import AnalysisOptions
from .model import ExperimentGeometry, SampleSpec
from .source import ConfigurationError, SourceConfig
from .units import UNITS, Dimension, DimensionError, DomainError, Quantity

__all__ = ["MODES", "RunConfig", "default_samples", "load_config", "parse_config", "resolve_seed"]

MODES = ("simulate", "analyze", "roundtrip", "demo")
FORMATS = ("table", "kv")
SEED_ENV = "ETPA_LAB_SEED"

_SECTION_KEYS = {
    "run": {"mode", "seed", "format"},
    "geometry": {"beam_waist", "wavelength", "path_length", "area"},
    "source": {
        "pump_powers_mW", "pairs_per_mW", "detector_efficiency", "coupling_efficiency",
        "coincidence_window", "bin_duration", "bins_per_point", "solvent_transmission",
        "dark_count_rate",
    },
    "analysis": {"weights", "subtract_accidentals", "geometry_uncertainty", "x_source"},
    "io": {"dataset", "out_dir"},
}
_SAMPLE_KEYS = {"concentration", "sigma_e", "delta_r"}


def default_samples() -> tuple[SampleSpec, ...]:
    return (SampleSpec("toluene"), SampleSpec("ZnTPP-63uM", 63e-6, 5.1e-18))


@dataclass(frozen=True)
class RunConfig:
    mode: str = "roundtrip"
    geometry: ExperimentGeometry = field(default_factory=ExperimentGeometry.standard)
    source: SourceConfig = field(default_factory=SourceConfig)
    samples: tuple[SampleSpec, ...] = field(default_factory=default_samples)
    analysis: AnalysisOptions = field(default_factory=AnalysisOptions)
    dataset: str | None = None
    out_dir: str = "etpa_out"
    format: str = "table"

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ConfigurationError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.format not in FORMATS:
            raise ConfigurationError(f"format must be one of {FORMATS}, got {self.format!r}")
        if not self.out_dir:
            raise ConfigurationError("out_dir is empty")
        if self.dataset is not None and not self.dataset:
            raise ConfigurationError("dataset path is empty")
        if self.mode == "analyze" and self.dataset is None:
            raise ConfigurationError("analyze mode needs a dataset path")
        if self.mode in ("simulate", "roundtrip"):
            labels = [s.label for s in self.samples]
            if len(set(labels)) != len(labels):
                raise ConfigurationError(f"duplicate sample labels: {labels}")
            if not any(s.is_solvent for s in self.samples):
                raise ConfigurationError("samples need a pure-solvent reference (concentration = 0)")
        if self.analysis.coincidence_window_s != self.source.coincidence_window_s:
            object.__setattr__(
                self, "analysis",
                replace(self.analysis, coincidence_window_s=self.source.coincidence_window_s),
            )

    @property
    def seed(self) -> int:
        return self.source.seed

    def with_overrides(self, **kw) -> RunConfig:
        """Copy with top-level fields replaced; ``seed`` and analysis options are routed."""
        seed = kw.pop("seed", None)
        source = self.source if seed is None else replace(self.source, seed=seed)
        analysis_kw = {k: kw.pop(k) for k in ("weights", "subtract_accidentals") if k in kw}
        analysis = replace(self.analysis, **analysis_kw)
        return replace(self, source=source, analysis=analysis, **kw)

    def to_ini(self, include_io: bool = True) -> str:
        """Canonical text form. ``include_io=False`` drops file locations."""
        g, s, a = self.geometry, self.source, self.analysis
        lines = [
            "[run]",
            f"mode = {self.mode}",
            f"seed = {s.seed}",
            f"format = {self.format}",
            "",
            "[geometry]",
            f"beam_waist = {g.beam_waist_um!r} um",
            f"wavelength = {g.wavelength_nm!r} nm",
            f"path_length = {g.path_length_mm!r} mm",
        ]
        if g.area_cm2 is not None:
            lines.append(f"area = {g.area_cm2!r} cm2")
        lines += [
            "",
            "[source]",
            "pump_powers_mW = " + ", ".join(repr(p) for p in s.pump_powers_mw),
            f"pairs_per_mW = {s.pairs_per_mw!r}",
            f"detector_efficiency = {s.detector_efficiency!r}",
            f"coupling_efficiency = {s.coupling_efficiency!r}",
            f"coincidence_window = {s.coincidence_window_s!r} s",
            f"bin_duration = {s.bin_duration_s!r} s",
            f"bins_per_point = {int(s.bins_per_point)}",
            f"solvent_transmission = {s.solvent_transmission!r}",
            f"dark_count_rate = {s.dark_count_rate!r}",
            "",
            "[analysis]",
            f"weights = {a.weights}",
            f"subtract_accidentals = {'yes' if a.subtract_accidentals else 'no'}",
            f"geometry_uncertainty = {a.geometry_uncertainty!r}",
            f"x_source = {a.x_source}",
        ]
        if include_io:
            lines += ["", "[io]", f"out_dir = {self.out_dir}"]
            if self.dataset is not None:
                lines.append(f"dataset = {self.dataset}")
        for sm in self.samples:
            lines += [
                "",
                f"[sample:{sm.label}]",
                f"concentration = {sm.concentration!r} M",
                f"sigma_e = {sm.sigma_e!r} cm2/molecule",
                f"delta_r = {sm.delta_r!r} cm4s",
            ]
        return "\n".join(lines) + "\n"

    @property
    def sha256(self) -> str:
        """Identifies the run; output and input locations are not part of it."""
        return hashlib.sha256(self.to_ini(include_io=False).encode("utf-8")).hexdigest()


def _value(text: str, dim: Dimension, target_unit: str, key: str) -> float:
    """Parse ``number [unit]`` and express it in ``target_unit``."""
    parts = text.split()
    if len(parts) not in (1, 2):
        raise ConfigurationError(f"{key}: cannot parse {text!r}")
    unit = parts[1] if len(parts) == 2 else target_unit
    try:
        number = float(parts[0])
        if UNITS.get(unit, (None,))[0] is not dim:
            raise DimensionError(f"unit {unit!r} is not a {dim.name.lower()}")
        q = Quantity.of(number, unit)
    except (ValueError, DimensionError, DomainError) as exc:
        raise ConfigurationError(f"{key}: {exc}") from None
    # no conversion when the unit already matches, so values survive verbatim
    return number if unit == target_unit else q.to(target_unit)


def _float(text: str, key: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ConfigurationError(f"{key}: not a number: {text!r}") from None


def _int(text: str, key: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ConfigurationError(f"{key}: not an integer: {text!r}") from None


def _bool(text: str, key: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "yes", "true", "on"):
        return True
    if low in ("0", "no", "false", "off"):
        return False
    raise ConfigurationError(f"{key}: not a boolean: {text!r}")


def _powers(text: str) -> tuple[float, ...]:
    text = text.strip()
    if ".." in text and "," not in text:
        lo, hi = text.split("..")
        a, b = _int(lo, "pump_powers_mW"), _int(hi, "pump_powers_mW")
        if b < a:
            raise ConfigurationError(f"pump_powers_mW: empty range {text!r}")
        return tuple(float(p) for p in range(a, b + 1))
    return tuple(_float(p, "pump_powers_mW") for p in text.split(",") if p.strip())


def parse_config(text: str, base_dir: str | os.PathLike | None = None) -> RunConfig:
    """Parse and validate configuration text. Relative paths resolve against ``base_dir``."""
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str  # keep key case (pairs_per_mW)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigurationError(f"config syntax: {exc}") from None

    samples = []
    for name in cp.sections():
        if name.startswith("sample:"):
            extra = set(cp[name]) - _SAMPLE_KEYS
            if extra:
                raise ConfigurationError(f"[{name}]: unknown keys {sorted(extra)}")
        elif name not in _SECTION_KEYS:
            raise ConfigurationError(f"unknown section [{name}]")
        else:
            extra = set(cp[name]) - _SECTION_KEYS[name]
            if extra:
                raise ConfigurationError(f"[{name}]: unknown keys {sorted(extra)}")

    def get(section: str, key: str) -> str | None:
        return cp.get(section, key, fallback=None) if cp.has_section(section) else None

    kw: dict = {}
    for key in ("mode", "format"):
        if (v := get("run", key)) is not None:
            kw[key] = v.strip()

    geo = {}
    for key, field_name, unit in (
        ("beam_waist", "beam_waist_um", "um"),
        ("wavelength", "wavelength_nm", "nm"),
        ("path_length", "path_length_mm", "mm"),
    ):
        if (v := get("geometry", key)) is not None:
            geo[field_name] = _value(v, Dimension.LENGTH, unit, key)
    if (v := get("geometry", "area")) is not None:
        geo["area_cm2"] = _value(v, Dimension.AREA, "cm2", "area")
    try:
        kw["geometry"] = replace(ExperimentGeometry.standard(), **geo) if geo else ExperimentGeometry.standard()
    except (DomainError, DimensionError) as exc:
        raise ConfigurationError(f"[geometry]: {exc}") from None

    src: dict = {}
    if (v := get("source", "pump_powers_mW")) is not None:
        src["pump_powers_mw"] = _powers(v)
    for key, field_name in (
        ("pairs_per_mW", "pairs_per_mw"),
        ("detector_efficiency", "detector_efficiency"),
        ("coupling_efficiency", "coupling_efficiency"),
        ("solvent_transmission", "solvent_transmission"),
        ("dark_count_rate", "dark_count_rate"),
    ):
        if (v := get("source", key)) is not None:
            src[field_name] = _float(v, key)
    if (v := get("source", "coincidence_window")) is not None:
        src["coincidence_window_s"] = _value(v if len(v.split()) == 2 else f"{v} ns", Dimension.TIME, "s",
                                            "coincidence_window")
    if (v := get("source", "bin_duration")) is not None:
        src["bin_duration_s"] = _value(v, Dimension.TIME, "s", "bin_duration")
    if (v := get("source", "bins_per_point")) is not None:
        src["bins_per_point"] = _int(v, "bins_per_point")
    if (v := get("run", "seed")) is not None:
        src["seed"] = _int(v, "seed")
    else:
        src["seed"] = resolve_seed(None, None)
    kw["source"] = SourceConfig(**src)

    ana: dict = {}
    for key in ("weights", "x_source"):
        if (v := get("analysis", key)) is not None:
            ana[key] = v.strip()
    if (v := get("analysis", "subtract_accidentals")) is not None:
        ana["subtract_accidentals"] = _bool(v, "subtract_accidentals")
    if (v := get("analysis", "geometry_uncertainty")) is not None:
        ana["geometry_uncertainty"] = _float(v, "geometry_uncertainty")
    try:
        kw["analysis"] = AnalysisOptions(**ana)
    except ValueError as exc:
        raise ConfigurationError(f"[analysis]: {exc}") from None

    base = Path(base_dir) if base_dir is not None else None

    def path(v: str) -> str:
        v = v.strip()
        if base is not None and v and not os.path.isabs(v):
            return str(base / v)
        return v

    if (v := get("io", "dataset")) is not None:
        kw["dataset"] = path(v)
    if (v := get("io", "out_dir")) is not None:
        kw["out_dir"] = path(v)

    for name in cp.sections():
        if not name.startswith("sample:"):
            continue
        sec = cp[name]
        label = name[len("sample:"):].strip()
        try:
            samples.append(SampleSpec(
                label,
                _value(sec.get("concentration", "0"), Dimension.CONCENTRATION, "M", "concentration"),
                _value(sec.get("sigma_e", "0"), Dimension.CROSS_SECTION_E, "cm2/molecule", "sigma_e"),
                _value(sec.get("delta_r", "0"), Dimension.CROSS_SECTION_R, "cm4s", "delta_r"),
            ))
        except ValueError as exc:
            raise ConfigurationError(f"[{name}]: {exc}") from None
    if samples:
        kw["samples"] = tuple(samples)
    return RunConfig(**kw)


def load_config(path: str | os.PathLike) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, base_dir=path.parent)


def resolve_seed(cli_seed: int | None, config_seed: int | None) -> int:
    """--seed beats the config file, which beats $ETPA_LAB_SEED; fallback 0."""
    if cli_seed is not None:
        return cli_seed
    if config_seed is not None:
        return config_seed
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise ConfigurationError(f"{SEED_ENV} is not an integer: {env!r}") from None
    return 0
