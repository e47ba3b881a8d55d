"""Report assembly and emission (human table, key=value, plot data)."""
from __future__ import annotations

import math
import os
import re
import warnings
from dataclasses import dataclass, field
from pathlib import Path

from .estimator import ExperimentAnalysis, ProductComparison, SampleAnalysis, sigma_e_from_slope
from .model import ExperimentGeometry, SampleSpec, absorption_fraction, is_breakdown
from .reference_data import REFERENCE_ROWS, ReferenceRow

__all__ = [
    "ReferenceCheck",
    "compare_to_truth",
    "reference_checks",
    "Report",
    "ReportError",
    "TruthComparison",
    "emit_report",
    "format_concentration",
    "render_kv",
    "render_table",
]


class ReportError(ValueError):
    pass


@dataclass(frozen=True)
class TruthComparison:
    label: str
    truth: float
    estimate: float
    uncertainty: float
    absorption_fraction: float

    @property
    def z(self) -> float:
        if self.uncertainty == 0:
            return 0.0 if self.estimate == self.truth else math.inf
        return (self.estimate - self.truth) / self.uncertainty

    @property
    def within_3sigma(self) -> bool:
        return abs(self.z) <= 3

    @property
    def breakdown(self) -> bool:
        return is_breakdown(self.absorption_fraction)


@dataclass(frozen=True)
class ReferenceCheck:
    """A tabulated (c, sigma_E) row pushed through fraction -> slope -> sigma_E."""

    row: ReferenceRow
    absorption_fraction: float
    recovered: float

    @property
    def relative_error(self) -> float:
        return abs(self.recovered - self.row.sigma_e) / self.row.sigma_e

    @property
    def breakdown(self) -> bool:
        return is_breakdown(self.absorption_fraction)


@dataclass
class Report:
    experiments: list[ExperimentAnalysis]
    provenance: dict[str, str]
    truth: list[TruthComparison] = field(default_factory=list)
    reference_checks: list[ReferenceCheck] = field(default_factory=list)
    reference_products: list[ProductComparison] = field(default_factory=list)

    def is_empty(self) -> bool:
        return not (self.experiments or self.reference_checks)

    def sample(self, label: str) -> SampleAnalysis:
        for exp in self.experiments:
            for s in exp.samples:
                if s.label == label:
                    return s
        raise KeyError(label)

    def truth_for(self, label: str) -> TruthComparison:
        for t in self.truth:
            if t.label == label:
                return t
        raise KeyError(label)


def compare_to_truth(
    experiments: list[ExperimentAnalysis],
    samples: list[SampleSpec],
    geometry: ExperimentGeometry,
) -> list[TruthComparison]:
    truth = {s.label: s for s in samples}
    out = []
    for exp in experiments:
        for sa in exp.samples:
            spec = truth.get(sa.label)
            if spec is None or sa.sigma_e is None:
                continue
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                f = absorption_fraction(spec.concentration, geometry, spec.sigma_e)
            out.append(TruthComparison(sa.label, spec.sigma_e, sa.sigma_e.sigma_e,
                                       sa.sigma_e.sigma_e_uncertainty, f))
    return out


def format_concentration(c: float) -> str:
    if c < 2e-3:
        return f"{c * 1e6:.4g} µM"
    return f"{c * 1e3:.4g} mM"


def _e18(x: float) -> str:
    return f"{x / 1e-18:.3g}"


def render_table(report: Report) -> str:
    if report.is_empty():
        raise ReportError("report is empty")
    p = report.provenance
    out = [
        "ETPA cross-section report",
        "  " + "  ".join(f"{k}: {v}" for k, v in p.items()),
        "",
    ]
    truth = {t.label: t for t in report.truth}
    for exp in report.experiments:
        cal = exp.calibration
        out.append(
            f"Solvent reference {exp.reference_label}: R_solvent = ({cal.slope:.5g} ± {cal.slope_stderr:.2g}) "
            f"pairs s^-1 per mW  [{cal.n_points} powers, reduced chi2 {cal.chi2_reduced:.3g}]"
        )
        out.append(f"  {'c':<12}  sigma_E x 1e-18 (cm^2 molecule^-1)   slope (R_abs/R_solvent)   chi2_red")
        for sa in sorted(exp.samples, key=lambda s: s.concentration):
            fit = sa.fit
            if sa.sigma_e is None:
                sig = "(pure solvent)"
            else:
                sig = f"{_e18(sa.sigma_e.sigma_e)} ± {_e18(sa.sigma_e.sigma_e_uncertainty)}"
            slope = f"{fit.slope:.4g} ± {fit.slope_stderr:.2g}"
            line = (f"  {format_concentration(sa.concentration) + ',':<12}  {sig:<36}  "
                    f"{slope:<24}  {fit.chi2_reduced:.3g}")
            t = truth.get(sa.label)
            if t is not None:
                line += f"   truth {_e18(t.truth)}, z = {t.z:+.2f}"
                if t.breakdown:
                    line += "  [model breakdown: absorption fraction >= 1]"
            if sa.negative_points:
                line += f"  [{sa.negative_points} negative R_abs points]"
            out.append(line)
        if exp.table is not None and len(exp.table.rows) > 1:
            if exp.table.monotonic_decay:
                out.append("  sigma_E decreases monotonically with concentration")
            else:
                pairs = ", ".join(f"{a} -> {b}" for a, b in exp.table.decay_violations)
                out.append(f"  sigma_E decay violated between: {pairs}")
            for pc in exp.table.products:
                if pc.relative_difference < 0.05:
                    out.append(f"  equal sigma_E*c: {pc.label_a} vs {pc.label_b}, "
                               f"relative difference {pc.relative_difference:.1%}")
        out.append("")
    if report.reference_checks:
        out.append("Tabulated values: c, sigma_E x 1e-18 -> absorption fraction -> recovered sigma_E")
        for rc in report.reference_checks:
            r = rc.row
            flag = "  [model breakdown]" if rc.breakdown else ""
            out.append(
                f"  {r.molecule:<6} {format_concentration(r.concentration)}, "
                f"{r.sigma_e / 1e-18:.2g} ± {r.sigma_e_uncertainty / 1e-18:.2g}   "
                f"fraction {rc.absorption_fraction:.4f}   recovered {_e18(rc.recovered)} "
                f"(rel. error {rc.relative_error:.1e}){flag}"
            )
        for pc in report.reference_products:
            out.append(f"  sigma_E*c {pc.label_a}: {pc.product_a:.3e}, {pc.label_b}: {pc.product_b:.3e}, "
                       f"relative difference {pc.relative_difference:.1%}")
        out.append("")
    return "\n".join(out)


def _r(x: float) -> str:
    return repr(float(x))


def render_kv(report: Report) -> str:
    """Line-oriented ``key=value``; keys are stable across runs."""
    if report.is_empty():
        raise ReportError("report is empty")
    lines = [f"{k}={v}" for k, v in report.provenance.items()]
    for i, exp in enumerate(report.experiments):
        pre = f"experiment.{i}"
        cal = exp.calibration
        lines += [
            f"{pre}.reference={exp.reference_label}",
            f"{pre}.calibration.slope={_r(cal.slope)}",
            f"{pre}.calibration.slope_stderr={_r(cal.slope_stderr)}",
            f"{pre}.calibration.chi2_reduced={_r(cal.chi2_reduced)}",
            f"{pre}.calibration.n_points={cal.n_points}",
        ]
        for sa in exp.samples:
            sp = f"sample.{sa.label}"
            lines += [
                f"{sp}.experiment={i}",
                f"{sp}.concentration_molar={_r(sa.concentration)}",
                f"{sp}.fit.slope={_r(sa.fit.slope)}",
                f"{sp}.fit.slope_stderr={_r(sa.fit.slope_stderr)}",
                f"{sp}.fit.chi2_reduced={_r(sa.fit.chi2_reduced)}",
                f"{sp}.fit.n_points={sa.fit.n_points}",
                f"{sp}.fit.negative_points={sa.negative_points}",
            ]
            if sa.sigma_e is not None:
                lines += [
                    f"{sp}.sigma_e={_r(sa.sigma_e.sigma_e)}",
                    f"{sp}.sigma_e_uncertainty={_r(sa.sigma_e.sigma_e_uncertainty)}",
                ]
        if exp.table is not None:
            lines.append(f"{pre}.monotonic_decay={'yes' if exp.table.monotonic_decay else 'no'}")
            lines.append(f"{pre}.decay_violations=" + ";".join(f"{a}>{b}" for a, b in exp.table.decay_violations))
            for pc in exp.table.products:
                lines.append(f"{pre}.product.{pc.label_a}|{pc.label_b}.relative_difference={_r(pc.relative_difference)}")
    for t in report.truth:
        sp = f"sample.{t.label}.truth"
        lines += [
            f"{sp}.sigma_e={_r(t.truth)}",
            f"{sp}.absorption_fraction={_r(t.absorption_fraction)}",
            f"{sp}.z={_r(t.z)}",
            f"{sp}.within_3sigma={'yes' if t.within_3sigma else 'no'}",
            f"{sp}.breakdown={'yes' if t.breakdown else 'no'}",
        ]
    for rc in report.reference_checks:
        sp = f"reference.{rc.row.label}"
        lines += [
            f"{sp}.concentration_molar={_r(rc.row.concentration)}",
            f"{sp}.sigma_e={_r(rc.row.sigma_e)}",
            f"{sp}.absorption_fraction={_r(rc.absorption_fraction)}",
            f"{sp}.breakdown={'yes' if rc.breakdown else 'no'}",
            f"{sp}.sigma_e_recovered={_r(rc.recovered)}",
            f"{sp}.relative_error={_r(rc.relative_error)}",
        ]
    for pc in report.reference_products:
        lines.append(f"reference.product.{pc.label_a}|{pc.label_b}.relative_difference={_r(pc.relative_difference)}")
    return "\n".join(lines) + "\n"


_UNSAFE = re.compile(r"[^A-Za-z0-9._-]+")


def _safe(name: str) -> str:
    return _UNSAFE.sub("_", name)


def _write(path: Path, text: str) -> Path:
    try:
        path.write_bytes(text.encode("utf-8"))
    except OSError as exc:
        raise ReportError(f"cannot write {path}: {exc}") from exc
    return path


def emit_report(report: Report, out_dir: str | os.PathLike, fmt: str = "table") -> list[Path]:
    """Write the report plus plot-data CSVs into ``out_dir``; return the paths written.

    Plot data, one file per figure analogue:
      pump_<ref>.csv      sample_label, pump_power_mW, rate, std
      rabs_<label>.csv    R_solvent, R_abs, sigma
      sigma_vs_c_<ref>.csv concentration_molar, sigma_e, sigma_e_uncertainty, sample_label
    """
    if report.is_empty():
        raise ReportError("report is empty")
    if fmt not in ("table", "kv"):
        raise ReportError(f"unknown report format {fmt!r}")
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ReportError(f"cannot create {out}: {exc}") from exc

    written = []
    if fmt == "table":
        written.append(_write(out / "report.txt", render_table(report)))
    else:
        written.append(_write(out / "report.kv", render_kv(report)))

    for exp in report.experiments:
        weights = exp.options.weights
        rows = ["sample_label,pump_power_mW,rate,std"]
        for s in exp.solvent:
            rows.append(f"{exp.reference_label},{_r(s.pump_power_mw)},{_r(s.mean)},{_r(s.std)}")
        for label, summaries in exp.sample_summaries.items():
            for s in summaries:
                rows.append(f"{label},{_r(s.pump_power_mw)},{_r(s.mean)},{_r(s.std)}")
        written.append(_write(out / f"pump_{_safe(exp.reference_label)}.csv", "\n".join(rows) + "\n"))

        for sa in exp.samples:
            rows = ["R_solvent,R_abs,sigma"]
            rows += [f"{_r(x)},{_r(r.value)},{_r(r.sigma(weights))}" for x, r in zip(sa.r_solvent, sa.r_abs)]
            written.append(_write(out / f"rabs_{_safe(sa.label)}.csv", "\n".join(rows) + "\n"))

        if exp.table is not None:
            rows = ["concentration_molar,sigma_e,sigma_e_uncertainty,sample_label"]
            rows += [f"{_r(r.concentration)},{_r(r.sigma_e)},{_r(r.sigma_e_uncertainty)},{r.label}"
                     for r in exp.table.rows]
            written.append(_write(out / f"sigma_vs_c_{_safe(exp.reference_label)}.csv", "\n".join(rows) + "\n"))
    return written


def reference_checks(geometry: ExperimentGeometry, rows=REFERENCE_ROWS) -> list[ReferenceCheck]:
    """Push every tabulated row through absorption_fraction and back."""
    out = []
    for row in rows:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            f = absorption_fraction(row.concentration, geometry, row.sigma_e)
        rec = sigma_e_from_slope(f, 0.0, row.concentration, geometry).sigma_e
        out.append(ReferenceCheck(row, f, rec))
    return out
