//! Config-driven experiments: kernel audits, figure tables, convergence
//! metrics with theorem-inequality checks and classical comparisons.
//!
//! Every command is a pure function of its config and returns an
//! [`Outcome`]: the report plus the text of each artifact. Writing them to
//! disk is a separate step, so reruns are byte-for-byte reproducible.

pub mod config;
pub mod output;

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::funcdsl::PiecewiseFunction;
use crate::kernels::{audit_all, AuditSettings, ConditionReport};
use crate::operators::{apply, apply_grid, mellin_mean_prefactor, OperatorSpec, Variant};
use crate::orlicz::{error_metrics, luxemburg_norm, lp_norm, modular, ModularDistance, PhiFunction};
use crate::signal::{Combination, Memoized, Signal};

pub use config::{
    load_config, parse_config, ExperimentConfig, GridConfig, KernelConfig, MetricsConfig, ModularMetric,
    OperatorConfig, OutputConfig, PhiConfig, SignalConfig,
};
pub use output::{table_to_svg, Table};

pub const PRESET_NAMES: [&str; 3] = ["fig3", "fig4", "fig5"];

/// The bundled JSON text of a figure preset.
pub fn preset_text(name: &str) -> Option<&'static str> {
    Some(match name {
        "fig3" => include_str!("../../presets/fig3.json"),
        "fig4" => include_str!("../../presets/fig4.json"),
        "fig5" => include_str!("../../presets/fig5.json"),
        _ => return None,
    })
}

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let text = preset_text(name)
        .ok_or_else(|| Error::config("preset", format!("unknown preset `{name}` (fig3, fig4, fig5)")))?;
    parse_config(text)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRow {
    pub w: f64,
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub skipped: bool,
    pub detail: String,
    pub rows: Vec<CheckRow>,
}

impl CheckResult {
    fn skipped(name: &str, detail: impl Into<String>) -> Self {
        CheckResult {
            name: name.to_string(),
            passed: true,
            skipped: true,
            detail: detail.into(),
            rows: Vec::new(),
        }
    }

    fn from_rows(name: &str, detail: impl Into<String>, rows: Vec<CheckRow>) -> Self {
        CheckResult {
            name: name.to_string(),
            passed: rows.iter().all(|r| r.holds),
            skipped: false,
            detail: detail.into(),
            rows,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LuxemburgDistance {
    pub phi: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricRow {
    pub w: f64,
    pub sup: Option<f64>,
    pub lp: Vec<(f64, f64)>,
    pub modular: Vec<ModularDistance>,
    pub luxemburg: Vec<LuxemburgDistance>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub w: f64,
    /// `sup_z |Kantorovich − classical|` over the grid.
    pub gap: f64,
    /// Mellin only: `(1/w)/ln(1 + 1/w)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prefactor: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub command: String,
    pub config: ExperimentConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub audit: Option<ConditionReport>,
    pub metrics: Vec<MetricRow>,
    pub comparison: Vec<ComparisonRow>,
    pub checks: Vec<CheckResult>,
    pub artifacts: Vec<String>,
}

impl ExperimentReport {
    fn new(command: &str, config: &ExperimentConfig) -> Self {
        ExperimentReport {
            command: command.to_string(),
            config: config.clone(),
            audit: None,
            metrics: Vec::new(),
            comparison: Vec::new(),
            checks: Vec::new(),
            artifacts: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.audit.as_ref().is_none_or(|a| a.passed()) && self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Plain-text summary for terminals.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        let name = self.config.name.as_deref().unwrap_or("experiment");
        out.push_str(&format!("{} `{}`: {}\n", self.command, name, verdict(self.passed())));
        if let Some(a) = &self.audit {
            out.push_str(&format!("  audit {} kernel {}\n", a.variant, a.kernel));
            for e in &a.entries {
                out.push_str(&format!(
                    "    {:<3} {:<5} {} = {:.6e} (threshold {:.3e}) {}\n",
                    e.condition,
                    verdict(e.passed),
                    e.quantity,
                    e.measured,
                    e.threshold,
                    e.detail
                ));
            }
            let c_hat = a.c_hat.map_or("n/a".to_string(), |c| format!("{c:.6e}"));
            out.push_str(&format!("    M̂ = {:.6e}, Ĉ = {c_hat}\n", a.m_hat));
        }
        for m in &self.metrics {
            out.push_str(&format!("  w = {}:", m.w));
            if let Some(s) = m.sup {
                out.push_str(&format!(" sup {s:.6e}"));
            }
            for (p, v) in &m.lp {
                out.push_str(&format!(" L^{p} {v:.6e}"));
            }
            for d in &m.modular {
                match d.value {
                    Some(v) => out.push_str(&format!(" I[{}; λ={}] {v:.6e}", d.phi, d.lambda)),
                    None => out.push_str(&format!(" I[{}; λ={}] overflow", d.phi, d.lambda)),
                }
            }
            for l in &m.luxemburg {
                out.push_str(&format!(" ‖·‖[{}] {:.6e}", l.phi, l.value));
            }
            out.push('\n');
        }
        for c in &self.comparison {
            out.push_str(&format!("  w = {}: gap {:.6e}", c.w, c.gap));
            if let Some(p) = c.prefactor {
                out.push_str(&format!(" prefactor {p:.9}"));
            }
            out.push('\n');
        }
        for c in &self.checks {
            let state = if c.skipped { "skip" } else { verdict(c.passed) };
            out.push_str(&format!("  check {:<22} {state:<5} {}\n", c.name, c.detail));
            for r in c.rows.iter().filter(|r| !r.holds) {
                out.push_str(&format!(
                    "      violated at w = {} [{}]: lhs {:.9e} > rhs {:.9e}\n",
                    r.w, r.label, r.lhs, r.rhs
                ));
            }
        }
        for a in &self.artifacts {
            out.push_str(&format!("  wrote {a}\n"));
        }
        out
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}

/// A report and the artifacts it names, not yet on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: ExperimentReport,
    pub files: Vec<(String, String)>,
}

impl Outcome {
    fn new(mut report: ExperimentReport, mut files: Vec<(String, String)>) -> Result<Self> {
        let stem = report
            .config
            .output
            .stem
            .clone()
            .or_else(|| report.config.name.clone().filter(|n| config::is_plain_stem(n)))
            .unwrap_or_else(|| report.command.clone());
        for (name, _) in files.iter_mut() {
            *name = format!("{stem}{name}");
        }
        report.artifacts = files.iter().map(|(n, _)| n.clone()).collect();
        report.artifacts.push(format!("{stem}.report.json"));
        let json = serde_json::to_string_pretty(&report)? + "\n";
        files.push((format!("{stem}.report.json"), json));
        Ok(Outcome { report, files })
    }

    pub fn file(&self, suffix: &str) -> Option<&str> {
        self.files
            .iter()
            .find(|(n, _)| n.ends_with(suffix))
            .map(|(_, c)| c.as_str())
    }

    pub fn write(&self, out_dir: &Path) -> Result<()> {
        std::fs::create_dir_all(out_dir)?;
        for (name, content) in &self.files {
            std::fs::write(out_dir.join(name), content)?;
        }
        Ok(())
    }
}

fn audit_settings(cfg: &ExperimentConfig, spec: &OperatorSpec) -> AuditSettings {
    let mut settings = AuditSettings::for_spec(spec, cfg.w_list.clone());
    if let Some(t) = cfg.audit_tolerance {
        settings.tolerance = t;
    }
    settings
}

fn run_audit(cfg: &ExperimentConfig) -> Result<ConditionReport> {
    let spec = cfg.spec(cfg.w_list[0])?;
    audit_all(&spec, &audit_settings(cfg, &spec))
}

/// Runs χ2–χ6 on the config's `w_list`.
pub fn cmd_audit(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut report = ExperimentReport::new("audit-kernel", cfg);
    report.audit = Some(run_audit(cfg)?);
    Outcome::new(report, Vec::new())
}

fn metric_window(cfg: &ExperimentConfig, f: &PiecewiseFunction) -> (f64, f64) {
    cfg.metrics.window_for(f.domain())
}

/// `S_w f` as a cached signal.
fn operator_signal<'a>(
    spec: &'a OperatorSpec,
    f: &'a PiecewiseFunction,
) -> Memoized<impl Fn(f64) -> Result<f64> + Sync + 'a> {
    Memoized::new(f.domain(), f.breakpoints().to_vec(), move |z| apply(spec, f, z))
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|p| p[1] < p[0])
}

fn decreasing_rows(w_list: &[f64], label: &str, values: &[f64]) -> Vec<CheckRow> {
    // row i compares value(w_{i+1}) against value(w_i)
    w_list
        .windows(2)
        .zip(values.windows(2))
        .map(|(w, v)| CheckRow {
            w: w[1],
            label: label.to_string(),
            lhs: v[1],
            rhs: v[0],
            holds: v[1] < v[0],
        })
        .collect()
}

fn is_continuous(f: &PiecewiseFunction) -> bool {
    f.breakpoints().iter().all(|&b| {
        let h = 1e-9 * b.abs().max(1.0);
        match (f.eval(b - h), f.eval(b)) {
            (Ok(l), Ok(r)) => (l - r).abs() <= 1e-6,
            _ => true,
        }
    })
}

/// Reference curve and one `S_w f` curve per `w` on the grid, as CSV and
/// SVG, plus L¹ errors over the plotted range.
pub fn cmd_figure(cfg: &ExperimentConfig) -> Result<Outcome> {
    let f = cfg.signal()?;
    let grid = cfg.grid.points();
    let mut table = Table::new("z", grid.clone());
    table.push("f", grid.iter().map(|&z| f.eval(z)).collect::<Result<Vec<_>>>()?);
    let mut labels = vec!["f".to_string()];
    let window = match cfg.metrics.window {
        Some([a, b]) => (a, b),
        None => (grid[0], grid[grid.len() - 1]),
    };
    let mut report = ExperimentReport::new("figure", cfg);
    let mut l1 = Vec::new();
    for &w in &cfg.w_list {
        let spec = cfg.spec(w)?;
        let curve = apply_grid(&spec, &f, &grid)?;
        table.push(format!("w={w}"), curve.values);
        labels.push(format!("S_w, w={w}"));
        let sw = operator_signal(&spec, &f);
        let mut p_list = vec![1.0];
        p_list.extend(cfg.metrics.lp.iter().copied().filter(|&p| p != 1.0));
        let m = error_metrics(&sw, &f, &grid, window, &p_list, &cfg.phis()?, cfg.metrics.tolerance)?;
        l1.push(m.lp[0].1);
        report.metrics.push(MetricRow {
            w,
            sup: cfg.metrics.sup.then_some(m.sup),
            lp: m.lp,
            modular: m.modular,
            luxemburg: Vec::new(),
        });
    }
    report.checks.push(CheckResult::from_rows(
        "l1_error_decreasing",
        format!("L¹ error over [{}, {}] strictly decreasing in w", window.0, window.1),
        decreasing_rows(&cfg.w_list, "L1", &l1),
    ));
    let title = format!(
        "{}: variant {}",
        cfg.name.as_deref().unwrap_or("figure"),
        cfg.operator.variant.label()
    );
    let svg = table_to_svg(&table, &title, &labels);
    Outcome::new(report, vec![(".csv".into(), table.to_csv()), (".svg".into(), svg)])
}

struct PerW {
    row: MetricRow,
    // (p, ‖S_w f‖_p, ‖f‖_p)
    lp_pairs: Vec<(f64, f64, f64)>,
    // (phi index, λ, I_φ[λ S_w f] or None, I_φ[λ M̂ f] or None)
    modular_pairs: Vec<(usize, f64, Option<f64>, Option<f64>)>,
    // per phi, per scan λ: I_φ[λ(S_w f − f)]
    scan: Vec<Vec<Option<f64>>>,
}

fn overflow_as_none(r: Result<f64>) -> Result<Option<f64>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::Overflow { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn convergence_for_w(
    cfg: &ExperimentConfig,
    f: &PiecewiseFunction,
    phis: &[(PhiFunction, Vec<f64>)],
    m_hat: f64,
    w: f64,
) -> Result<PerW> {
    let spec = cfg.spec(w)?;
    let grid = cfg.grid.points();
    let window = metric_window(cfg, f);
    let tol = cfg.metrics.tolerance;
    let sw = operator_signal(&spec, f);
    grid.par_iter().try_for_each(|&z| sw.value(z).map(|_| ()))?;
    let m = error_metrics(&sw, f, &grid, window, &cfg.metrics.lp, phis, tol)?;
    let diff = Combination::new(1.0, &sw, -1.0, f)?;
    let luxemburg = phis
        .iter()
        .map(|(phi, _)| {
            Ok(LuxemburgDistance {
                phi: phi.to_string(),
                value: luxemburg_norm(phi, &diff, window, cfg.luxemburg, tol)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let lp_pairs = cfg
        .metrics
        .lp
        .iter()
        .map(|&p| Ok((p, lp_norm(&sw, window, p, tol)?, lp_norm(f, window, p, tol)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut modular_pairs = Vec::new();
    for (i, (phi, lambdas)) in phis.iter().enumerate() {
        if !phi.is_convex() {
            continue;
        }
        for &lambda in lambdas {
            let lhs = overflow_as_none(modular(phi, &sw, window, lambda, tol).map(|r| r.value))?;
            let rhs = overflow_as_none(modular(phi, f, window, lambda * m_hat, tol).map(|r| r.value))?;
            modular_pairs.push((i, lambda, lhs, rhs));
        }
    }
    let scan = phis
        .iter()
        .map(|(phi, _)| {
            cfg.metrics
                .lambda_grid()
                .iter()
                .map(|&l| overflow_as_none(modular(phi, &diff, window, l, tol).map(|r| r.value)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PerW {
        row: MetricRow {
            w,
            sup: cfg.metrics.sup.then_some(m.sup),
            lp: m.lp,
            modular: m.modular,
            luxemburg,
        },
        lp_pairs,
        modular_pairs,
        scan,
    })
}

/// Metric table over `w_list` and the theorem checks:
/// `sup_error_decreasing`, `lp_inequality`, `modular_boundedness` and
/// `modular_convergence_scan`.
pub fn cmd_convergence(cfg: &ExperimentConfig) -> Result<Outcome> {
    let f = cfg.signal()?;
    let phis = cfg.phis()?;
    let audit = run_audit(cfg)?;
    let (m_hat, c_hat) = (audit.m_hat, audit.c_hat);
    let per_w = cfg
        .w_list
        .iter()
        .map(|&w| convergence_for_w(cfg, &f, &phis, m_hat, w))
        .collect::<Result<Vec<_>>>()?;
    let mut report = ExperimentReport::new("convergence", cfg);
    let slack = 1.0 + 10.0 * cfg.metrics.tolerance;

    // (a)
    report.checks.push(if !cfg.metrics.sup {
        CheckResult::skipped("sup_error_decreasing", "sup metric not requested")
    } else if !is_continuous(&f) {
        CheckResult::skipped("sup_error_decreasing", "signal has jumps; uniform convergence not expected")
    } else {
        let sups: Vec<f64> = per_w.iter().map(|r| r.row.sup.unwrap_or(f64::NAN)).collect();
        CheckResult::from_rows(
            "sup_error_decreasing",
            "sup_z |S_w f − f| strictly decreasing in w",
            decreasing_rows(&cfg.w_list, "sup", &sups),
        )
    });

    // (b)
    report.checks.push(match c_hat {
        _ if cfg.metrics.lp.is_empty() => CheckResult::skipped("lp_inequality", "no p requested"),
        None => CheckResult::skipped("lp_inequality", "no Ĉ for classical operators"),
        Some(c) => {
            let rows = per_w
                .iter()
                .flat_map(|r| {
                    r.lp_pairs.iter().map(move |&(p, lhs, fp)| {
                        let rhs = (c * m_hat.powf(p - 1.0)).powf(1.0 / p) * fp;
                        CheckRow {
                            w: r.row.w,
                            label: format!("p={p}"),
                            lhs,
                            rhs,
                            holds: lhs <= rhs * slack,
                        }
                    })
                })
                .collect();
            CheckResult::from_rows(
                "lp_inequality",
                format!("‖S_w f‖_p ≤ (Ĉ·M̂^(p−1))^(1/p)·‖f‖_p with Ĉ = {c:.6e}, M̂ = {m_hat:.6e}"),
                rows,
            )
        }
    });

    // (c)
    let any_convex = phis.iter().any(|(p, _)| p.is_convex());
    report.checks.push(match c_hat {
        _ if !any_convex => CheckResult::skipped("modular_boundedness", "no convex φ requested"),
        None => CheckResult::skipped("modular_boundedness", "no Ĉ for classical operators"),
        Some(c) => {
            let mut rows = Vec::new();
            for r in &per_w {
                for &(i, lambda, lhs, rhs) in &r.modular_pairs {
                    let label = format!("{}; λ={lambda}", phis[i].0);
                    let (lhs, rhs, holds) = match (lhs, rhs) {
                        (_, None) => (lhs.unwrap_or(f64::INFINITY), f64::INFINITY, true),
                        (None, Some(b)) => (f64::INFINITY, c / m_hat * b, false),
                        (Some(a), Some(b)) => {
                            let rhs = c / m_hat * b;
                            (a, rhs, a <= rhs * slack)
                        }
                    };
                    rows.push(CheckRow {
                        w: r.row.w,
                        label,
                        lhs,
                        rhs,
                        holds,
                    });
                }
            }
            CheckResult::from_rows(
                "modular_boundedness",
                "I_φ[λ S_w f] ≤ (Ĉ/M̂)·I_φ[λ M̂ f]",
                rows,
            )
        }
    });

    // (d)
    report.checks.push(if phis.is_empty() {
        CheckResult::skipped("modular_convergence_scan", "no φ requested")
    } else {
        let lambdas = cfg.metrics.lambda_grid();
        let mut rows = Vec::new();
        let mut found = Vec::new();
        for (i, (phi, _)) in phis.iter().enumerate() {
            // largest λ whose distances are finite, strictly decreasing and ≤ 1 at the largest w
            let hit = lambdas.iter().enumerate().find_map(|(j, &l)| {
                let v: Option<Vec<f64>> = per_w.iter().map(|r| r.scan[i][j]).collect();
                let v = v?;
                (strictly_decreasing(&v) && *v.last()? <= 1.0).then_some((l, v))
            });
            match hit {
                Some((l, v)) => {
                    found.push(format!("{phi}: λ = {l}"));
                    rows.extend(cfg.w_list.iter().zip(&v).map(|(&w, &val)| CheckRow {
                        w,
                        label: format!("{phi}; λ={l}"),
                        lhs: val,
                        rhs: 1.0,
                        holds: true,
                    }));
                }
                None => {
                    found.push(format!("{phi}: none"));
                    rows.push(CheckRow {
                        w: *cfg.w_list.last().unwrap_or(&0.0),
                        label: format!("{phi}; no λ in scan"),
                        lhs: f64::NAN,
                        rhs: 1.0,
                        holds: false,
                    });
                }
            }
        }
        CheckResult::from_rows("modular_convergence_scan", found.join(", "), rows)
    });

    report.checks.insert(
        0,
        CheckResult {
            name: "kernel_audit".into(),
            passed: audit.passed(),
            skipped: false,
            detail: format!("χ2–χ6 on w_list, M̂ = {m_hat:.6e}"),
            rows: Vec::new(),
        },
    );
    report.audit = Some(audit);
    report.metrics = per_w.into_iter().map(|r| r.row).collect();
    let mut table = Table::new("w", cfg.w_list.clone());
    if cfg.metrics.sup {
        table.push("sup", report.metrics.iter().map(|m| m.sup.unwrap_or(f64::NAN)).collect());
    }
    for (k, p) in cfg.metrics.lp.iter().enumerate() {
        table.push(format!("L{p}"), report.metrics.iter().map(|m| m.lp[k].1).collect());
    }
    let n_modular = report.metrics.first().map_or(0, |m| m.modular.len());
    for k in 0..n_modular {
        let head = &report.metrics[0].modular[k];
        table.push(
            format!("I[{}; lambda={}]", head.phi, head.lambda),
            report.metrics.iter().map(|m| m.modular[k].value.unwrap_or(f64::INFINITY)).collect(),
        );
    }
    for (k, (phi, _)) in phis.iter().enumerate() {
        table.push(
            format!("luxemburg[{phi}]"),
            report.metrics.iter().map(|m| m.luxemburg[k].value).collect(),
        );
    }
    Outcome::new(report, vec![(".csv".into(), table.to_csv())])
}

/// `sup_z |S_w f − C_w f|` over the grid, `C_w` the classical operator.
pub fn cmd_compare_classical(cfg: &ExperimentConfig) -> Result<Outcome> {
    let variant = cfg.operator.variant;
    if !matches!(
        variant,
        Variant::SamplingKantorovich
            | Variant::SamplingKantorovichSymmetric
            | Variant::ConvKantorovichUnit
            | Variant::MellinKantorovich
    ) {
        return Err(Error::config(
            "operator.variant",
            format!("variant {} has no classical comparator; use 1, 1,1, 3 or 4", variant.label()),
        ));
    }
    let f = cfg.signal()?;
    let grid = cfg.grid.points();
    let mut table = Table::new("z", grid.clone());
    let mut report = ExperimentReport::new("compare-classical", cfg);
    let mut gaps = Vec::new();
    for &w in &cfg.w_list {
        let spec = cfg.spec(w)?;
        let k = apply_grid(&spec, &f, &grid)?.values;
        let c = apply_grid(&spec.classical_counterpart()?, &f, &grid)?.values;
        let gap = k.iter().zip(&c).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        gaps.push(gap);
        report.comparison.push(ComparisonRow {
            w,
            gap,
            prefactor: variant.is_mellin().then(|| mellin_mean_prefactor(w)).transpose()?,
        });
        table.push(format!("kantorovich w={w}"), k);
        table.push(format!("classical w={w}"), c);
    }
    let values: Vec<f64> = grid.iter().map(|&z| f.eval(z)).collect::<Result<_>>()?;
    let constant = values.iter().all(|&v| v == values[0]) && f.breakpoints().is_empty();
    report.checks.push(if constant {
        let bound = 2.0 * cfg.tolerance;
        CheckResult::from_rows(
            "constant_gap",
            format!("both operators reproduce constants: gap ≤ {bound:e}"),
            cfg.w_list
                .iter()
                .zip(&gaps)
                .map(|(&w, &g)| CheckRow {
                    w,
                    label: "gap".into(),
                    lhs: g,
                    rhs: bound,
                    holds: g <= bound,
                })
                .collect(),
        )
    } else if is_continuous(&f) {
        CheckResult::from_rows(
            "gap_decreasing",
            "sup gap strictly decreasing in w",
            decreasing_rows(&cfg.w_list, "gap", &gaps),
        )
    } else {
        CheckResult::skipped("gap_decreasing", "signal has jumps; the gap need not shrink")
    });
    Outcome::new(report, vec![(".csv".into(), table.to_csv())])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hat_config(variant: &str, w_list: &str) -> ExperimentConfig {
        parse_config(&format!(
            r#"{{
                "name": "hat",
                "operator": {{"variant": "{variant}"}},
                "signal": {{"preset": "hat"}},
                "w_list": {w_list},
                "grid": {{"min": -3, "max": 3, "count": 121}},
                "metrics": {{"lp": [1, 2], "window": [-6, 6],
                             "modular": [{{"phi": {{"kind": "power", "p": 2}}}}]}}
            }}"#
        ))
        .unwrap()
    }

    #[test]
    fn presets_parse() {
        for name in PRESET_NAMES {
            let cfg = preset(name).unwrap();
            assert_eq!(cfg.output.stem.as_deref(), Some(name));
        }
        assert!(preset("fig9").is_err());
    }

    #[test]
    fn convergence_on_hat() {
        let out = cmd_convergence(&hat_config("2", "[5, 10, 20]")).unwrap();
        let r = &out.report;
        assert!(r.passed(), "{}", r.summary());
        assert!(!r.check("sup_error_decreasing").unwrap().skipped);
        assert!(!r.check("lp_inequality").unwrap().rows.is_empty());
        let csv = out.file(".csv").unwrap();
        assert_eq!(csv.lines().count(), 4);
        assert!(out.file(".report.json").unwrap().contains("\"command\": \"convergence\""));
    }

    #[test]
    fn compare_classical_gap_shrinks() {
        let out = cmd_compare_classical(&hat_config("3", "[5, 10, 20, 40]")).unwrap();
        assert!(out.report.passed(), "{}", out.report.summary());
        let err = cmd_compare_classical(&hat_config("2", "[5]")).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn audit_of_unnormalized_kernel_fails() {
        let cfg = parse_config(
            r#"{"operator": {"variant": "1", "kernel": {"name": "bspline", "order": 3}, "amplitude": 2},
                "signal": {"preset": "f1"}, "w_list": [5, 10],
                "grid": {"min": -1, "max": 1, "count": 3}}"#,
        )
        .unwrap();
        let out = cmd_audit(&cfg).unwrap();
        assert!(!out.report.passed());
        let chi2 = out.report.audit.as_ref().unwrap().entry("chi2").unwrap();
        assert!((chi2.measured - 1.0).abs() < 1e-6);
    }
}
