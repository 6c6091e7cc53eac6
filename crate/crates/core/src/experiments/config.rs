//! JSON experiment configuration: schema, validation and resolution into
//! operator specs, signals and φ-functions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcdsl::{parse_expression, parse_piecewise, presets, Domain, PieceSpec, PiecewiseFunction};
use crate::group_model::SampleSequence;
use crate::kernels::{Kernel, KernelFamily, Scaling};
use crate::operators::{OperatorSpec, Variant};
use crate::orlicz::{LuxemburgConvention, PhiFunction};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub operator: OperatorConfig,
    pub signal: SignalConfig,
    pub w_list: Vec<f64>,
    pub grid: GridConfig,
    #[serde(default)]
    pub metrics: MetricsConfig,
    /// Accuracy of each operator evaluation.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// χ2 tolerance for the kernel audits; per-kernel default when absent.
    #[serde(default)]
    pub audit_tolerance: Option<f64>,
    #[serde(default)]
    pub luxemburg: LuxemburgConvention,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_tolerance() -> f64 {
    1e-9
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorConfig {
    pub variant: Variant,
    #[serde(default)]
    pub kernel: Option<KernelConfig>,
    /// Multiplies the base kernel.
    #[serde(default)]
    pub amplitude: Option<f64>,
    #[serde(default)]
    pub scaling: Option<Scaling>,
    #[serde(default)]
    pub sequence: Option<SampleSequence>,
    #[serde(default)]
    pub dimension: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelConfig {
    /// `M = 4M₃ − 3M₄`.
    Combo,
    Bspline {
        order: u32,
    },
    Fejer,
    Sinc,
    Mellin,
    Custom {
        expr: String,
        #[serde(default)]
        support: Option<[f64; 2]>,
        #[serde(default)]
        tail_constant: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SignalConfig {
    /// `f1`, `f2`, `f3` or `hat`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pieces: Option<Vec<PieceSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<Domain>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    /// Grid `(min, max]`: `count` points with `min` left out.
    #[serde(default)]
    pub exclude_min: bool,
}

impl GridConfig {
    pub fn points(&self) -> Vec<f64> {
        let (a, b, n) = (self.min, self.max, self.count);
        if self.exclude_min {
            (1..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
        } else {
            (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PhiConfig {
    Power { p: f64 },
    Interpolation { alpha: f64, beta: f64 },
    Exponential { alpha: f64 },
    Custom { expr: String, convex: bool },
}

impl PhiConfig {
    pub fn resolve(&self) -> Result<PhiFunction> {
        match self {
            PhiConfig::Power { p } => PhiFunction::power(*p),
            PhiConfig::Interpolation { alpha, beta } => PhiFunction::interpolation(*alpha, *beta),
            PhiConfig::Exponential { alpha } => PhiFunction::exponential(*alpha),
            PhiConfig::Custom { expr, convex } => PhiFunction::custom(expr, *convex),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModularMetric {
    pub phi: PhiConfig,
    #[serde(default = "default_lambdas")]
    pub lambdas: Vec<f64>,
}

fn default_lambdas() -> Vec<f64> {
    vec![1.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsConfig {
    #[serde(default = "yes")]
    pub sup: bool,
    #[serde(default)]
    pub lp: Vec<f64>,
    #[serde(default)]
    pub modular: Vec<ModularMetric>,
    /// Integration window of the `L^p` and modular metrics; defaults to
    /// `[-40, 40]` on ℝ and `[1e-8, 1e4]` on ℝ⁺.
    #[serde(default)]
    pub window: Option<[f64; 2]>,
    /// λ grid of the modular-convergence scan; `2⁰ … 2⁻¹⁰` when absent.
    #[serde(default)]
    pub lambda_scan: Option<Vec<f64>>,
    /// Accuracy of the metric integrals.
    #[serde(default = "default_metric_tolerance")]
    pub tolerance: f64,
}

fn yes() -> bool {
    true
}

fn default_metric_tolerance() -> f64 {
    1e-7
}

impl Default for MetricsConfig {
    fn default() -> Self {
        MetricsConfig {
            sup: true,
            lp: Vec::new(),
            modular: Vec::new(),
            window: None,
            lambda_scan: None,
            tolerance: default_metric_tolerance(),
        }
    }
}

impl MetricsConfig {
    pub fn window_for(&self, domain: Domain) -> (f64, f64) {
        match (self.window, domain) {
            (Some([a, b]), _) => (a, b),
            (None, Domain::Real) => (-40.0, 40.0),
            (None, Domain::Positive) => (1e-8, 1e4),
        }
    }

    pub fn lambda_grid(&self) -> Vec<f64> {
        self.lambda_scan
            .clone()
            .unwrap_or_else(|| (0..=10).map(|j| 0.5f64.powi(j)).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// File stem of the emitted artifacts; the config name, then the command
    /// name, when absent.
    #[serde(default)]
    pub stem: Option<String>,
}

/// Parses a config document; errors carry the JSON path of the bad field.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::config(if path == "." { "<root>".to_string() } else { path }, e.into_inner().to_string())
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &std::path::Path) -> Result<ExperimentConfig> {
    parse_config(&std::fs::read_to_string(path)?)
}

/// ASCII letters, digits, `-`, `_` and inner dots.
pub(crate) fn is_plain_stem(stem: &str) -> bool {
    !stem.is_empty()
        && stem.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
        && !stem.starts_with('.')
}

fn positive_finite(x: f64) -> bool {
    x > 0.0 && x.is_finite()
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.w_list.is_empty() {
            return Err(Error::config("w_list", "needs at least one value"));
        }
        for (i, &w) in self.w_list.iter().enumerate() {
            if !positive_finite(w) {
                return Err(Error::config(format!("w_list[{i}]"), format!("{w} is not a positive number")));
            }
            if i > 0 && w <= self.w_list[i - 1] {
                return Err(Error::config(format!("w_list[{i}]"), "w_list must be strictly increasing"));
            }
        }
        let g = &self.grid;
        if g.count < 2 {
            return Err(Error::config("grid.count", format!("need at least 2 points, got {}", g.count)));
        }
        if !(g.min.is_finite() && g.max.is_finite() && g.min < g.max) {
            return Err(Error::config("grid", format!("bad range [{}, {}]", g.min, g.max)));
        }
        let variant = self.operator.variant;
        if variant.is_mellin() && !(g.min > 0.0 || (g.exclude_min && g.min >= 0.0)) {
            return Err(Error::config(
                "grid.min",
                "Mellin experiments need grid min > 0 (or min = 0 with exclude_min)",
            ));
        }
        if variant == Variant::MultiDimSamplingKantorovich {
            return Err(Error::config(
                "operator.variant",
                "variant (5) acts on ℝᴺ; the experiment runner handles one-dimensional variants",
            ));
        }
        if !(self.tolerance > 0.0 && self.tolerance < 1e-2) {
            return Err(Error::config("tolerance", format!("{} is outside (0, 1e-2)", self.tolerance)));
        }
        if let Some(t) = self.audit_tolerance {
            if !(t > 0.0 && t < 1.0) {
                return Err(Error::config("audit_tolerance", format!("{t} is outside (0, 1)")));
            }
        }
        let m = &self.metrics;
        for (i, &p) in m.lp.iter().enumerate() {
            if !(p >= 1.0 && p.is_finite()) {
                return Err(Error::config(format!("metrics.lp[{i}]"), format!("p = {p} must be ≥ 1")));
            }
        }
        for (i, mm) in m.modular.iter().enumerate() {
            mm.phi
                .resolve()
                .map_err(|e| Error::config(format!("metrics.modular[{i}].phi"), e.to_string()))?;
            for (j, &l) in mm.lambdas.iter().enumerate() {
                if !positive_finite(l) {
                    return Err(Error::config(
                        format!("metrics.modular[{i}].lambdas[{j}]"),
                        format!("λ = {l} must be positive"),
                    ));
                }
            }
        }
        if let Some([a, b]) = m.window {
            let ok = a.is_finite() && b.is_finite() && a < b && (!variant.is_mellin() || a > 0.0);
            if !ok {
                return Err(Error::config("metrics.window", format!("bad window [{a}, {b}]")));
            }
        }
        if let Some(scan) = &m.lambda_scan {
            if scan.is_empty() || scan.iter().any(|l| !positive_finite(*l)) {
                return Err(Error::config("metrics.lambda_scan", "needs positive values"));
            }
        }
        if !(m.tolerance > 0.0 && m.tolerance < 1.0) {
            return Err(Error::config("metrics.tolerance", format!("{} is outside (0, 1)", m.tolerance)));
        }
        if let Some(stem) = &self.output.stem {
            if !is_plain_stem(stem) {
                return Err(Error::config("output.stem", format!("`{stem}` is not a plain file stem")));
            }
        }
        let signal = self.signal()?;
        if signal.domain() != variant.signal_domain() {
            return Err(Error::config(
                "signal.domain",
                format!(
                    "variant {} acts on {:?} signals, got {:?}",
                    variant.label(),
                    variant.signal_domain(),
                    signal.domain()
                ),
            ));
        }
        self.spec(self.w_list[0])?;
        Ok(())
    }

    pub fn signal(&self) -> Result<PiecewiseFunction> {
        let s = &self.signal;
        match (&s.preset, &s.pieces) {
            (Some(name), None) => {
                let (pieces, domain) = presets::spec(name).ok_or_else(|| {
                    Error::config("signal.preset", format!("unknown preset `{name}` (f1, f2, f3, hat)"))
                })?;
                if let Some(d) = s.domain {
                    if d != domain {
                        return Err(Error::config("signal.domain", format!("preset `{name}` lives on {domain:?}")));
                    }
                }
                Ok(parse_piecewise(&pieces, domain)?)
            }
            (None, Some(pieces)) => {
                let domain = s.domain.unwrap_or(self.operator.variant.signal_domain());
                parse_piecewise(pieces, domain).map_err(|e| Error::config("signal.pieces", e.to_string()))
            }
            _ => Err(Error::config("signal", "give exactly one of `preset` and `pieces`")),
        }
    }

    pub fn family(&self) -> Result<KernelFamily> {
        let op = &self.operator;
        let variant = op.variant;
        let kernel_cfg = op.kernel.clone().unwrap_or(if variant.is_mellin() {
            KernelConfig::Mellin
        } else {
            KernelConfig::Combo
        });
        let path = "operator.kernel";
        let base = match &kernel_cfg {
            KernelConfig::Combo => Kernel::combo(),
            KernelConfig::Bspline { order } => {
                Kernel::bspline(*order).map_err(|e| Error::config(path, e.to_string()))?
            }
            KernelConfig::Fejer => Kernel::fejer(),
            KernelConfig::Sinc => Kernel::sinc(),
            KernelConfig::Mellin => return self.mellin_family(),
            KernelConfig::Custom {
                expr,
                support,
                tail_constant,
            } => {
                let e = parse_expression(expr).map_err(|e| Error::config(format!("{path}.expr"), e.to_string()))?;
                Kernel::custom(e, support.map(|[a, b]| (a, b)), *tail_constant)
                    .map_err(|e| Error::config(path, e.to_string()))?
            }
        };
        let base = match op.amplitude {
            Some(a) if a.is_finite() && a != 0.0 => base.scaled(a),
            Some(a) => return Err(Error::config("operator.amplitude", format!("bad amplitude {a}"))),
            None => base,
        };
        let scaling = op.scaling.unwrap_or(variant.default_scaling());
        KernelFamily::new(base, scaling, op.dimension.unwrap_or(1)).map_err(|e| Error::config("operator", e.to_string()))
    }

    fn mellin_family(&self) -> Result<KernelFamily> {
        if !self.operator.variant.is_mellin() {
            return Err(Error::config("operator.kernel", "the Mellin kernel goes with Mellin variants"));
        }
        if self.operator.amplitude.is_some() || self.operator.dimension.unwrap_or(1) != 1 {
            return Err(Error::config("operator", "the Mellin kernel takes no amplitude or dimension"));
        }
        if matches!(self.operator.scaling, Some(s) if s != Scaling::MellinPower) {
            return Err(Error::config("operator.scaling", "the Mellin kernel uses mellin_power"));
        }
        Ok(KernelFamily::mellin())
    }

    /// The operator at a given `w`.
    pub fn spec(&self, w: f64) -> Result<OperatorSpec> {
        let family = self.family()?;
        let mut spec = OperatorSpec::new(self.operator.variant, family)
            .map_err(|e| Error::config("operator", e.to_string()))?;
        if let Some(seq) = self.operator.sequence {
            spec = spec
                .with_sequence(seq)
                .map_err(|e| Error::config("operator.sequence", e.to_string()))?;
        }
        spec.with_tolerance(self.tolerance)?.with_w(w)
    }

    pub fn phis(&self) -> Result<Vec<(PhiFunction, Vec<f64>)>> {
        self.metrics
            .modular
            .iter()
            .map(|m| Ok((m.phi.resolve()?, m.lambdas.clone())))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{
        "operator": {"variant": "2"},
        "signal": {"preset": "f1"},
        "w_list": [5, 10],
        "grid": {"min": -4, "max": 4, "count": 9}
    }"#;

    #[test]
    fn minimal_config_resolves() {
        let cfg = parse_config(BASE).unwrap();
        assert_eq!(cfg.operator.variant, Variant::ConvKantorovichScaled);
        assert_eq!(cfg.grid.points()[4], 0.0);
        let spec = cfg.spec(10.0).unwrap();
        assert_eq!(spec.w(), 10.0);
        assert_eq!(spec.family().scaling(), Scaling::DilateArgument);
    }

    fn err_path(text: &str) -> String {
        match parse_config(text).unwrap_err() {
            Error::Config { path, .. } => path,
            e => panic!("expected a config error, got {e}"),
        }
    }

    #[test]
    fn errors_name_the_field() {
        assert_eq!(err_path(&BASE.replace("[5, 10]", "[10, 5]")), "w_list[1]");
        assert_eq!(err_path(&BASE.replace("\"count\": 9", "\"count\": 1")), "grid.count");
        assert_eq!(err_path(&BASE.replace("\"count\": 9", "\"count\": \"x\"")), "grid.count");
        assert_eq!(err_path(&BASE.replace("\"2\"", "\"7\"")), "operator.variant");
        assert_eq!(err_path(&BASE.replace("f1", "f9")), "signal.preset");
        assert_eq!(err_path(&BASE.replace("\"f1\"", "\"f1\", \"colour\": 1")), "signal.colour");
        let mellin = BASE.replace("\"2\"", "\"4\"").replace("f1", "f3");
        assert_eq!(err_path(&mellin), "grid.min");
        let bad_phi = BASE.replace(
            "\"grid\"",
            "\"metrics\": {\"modular\": [{\"phi\": {\"kind\": \"power\", \"p\": 0.5}}]}, \"grid\"",
        );
        assert_eq!(err_path(&bad_phi), "metrics.modular[0].phi");
    }

    #[test]
    fn open_grid_excludes_min() {
        let g = GridConfig {
            min: 0.0,
            max: 8.0,
            count: 800,
            exclude_min: true,
        };
        let p = g.points();
        assert_eq!(p.len(), 800);
        assert_eq!(p[0], 0.01);
        assert_eq!(p[799], 8.0);
    }
}
