//! Numerical audits of the kernel conditions χ2–χ6 for a concrete operator.
//!
//! χ1 (measurability and integrability) holds by construction and is not
//! audited. All sup-over-z quantities are maxima over an ordered probe list,
//! so reruns with the same settings give bitwise-identical reports.

use serde::{Deserialize, Serialize};

use super::{kernel_l1_norm, Kernel, Scaling, Support};
use crate::error::{Error, Result};
use crate::operators::{continuous_radius, lattice_window, mellin_radius, OperatorSpec, Variant};
use crate::quadrature::{IntegrationRequest, Measure};

/// Grids and thresholds shared by the audits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditSettings {
    pub w_grid: Vec<f64>,
    /// Absolute tolerance of the χ2 deviation.
    pub tolerance: f64,
    /// Half-width `γ` of `K` (`[1/γ, γ]` in the Mellin case); a default is
    /// picked per variant when absent.
    pub gamma: Option<f64>,
    /// Target `ε` of the χ5 truncation search.
    pub epsilon: f64,
    /// Explicit probe points; a default grid is used when absent.
    pub probes: Option<Vec<f64>>,
    /// χ3 estimates above this value count as divergent.
    pub m_cap: f64,
}

impl AuditSettings {
    pub const DEFAULT_TOLERANCE: f64 = 1e-8;
    /// Series with unbounded kernels are truncated with certified tails;
    /// tighter than this they become too long to sum.
    pub const UNBOUNDED_TOLERANCE: f64 = 1e-6;

    pub fn for_spec(spec: &OperatorSpec, w_grid: Vec<f64>) -> Self {
        let unbounded = spec.kernel().support_radius().is_none();
        AuditSettings {
            w_grid,
            tolerance: if unbounded {
                Self::UNBOUNDED_TOLERANCE
            } else {
                Self::DEFAULT_TOLERANCE
            },
            gamma: None,
            epsilon: 1e-3,
            probes: None,
            m_cap: 1e6,
        }
    }

    fn quad_tolerance(&self) -> f64 {
        (self.tolerance * 1e-2).clamp(1e-13, 1e-9)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionEntry {
    pub condition: String,
    pub quantity: String,
    pub w_grid: Vec<f64>,
    /// One value per `w` in `w_grid`.
    pub values: Vec<f64>,
    /// The summary compared against `threshold`.
    pub measured: f64,
    pub threshold: f64,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub variant: String,
    pub kernel: String,
    pub scaling: Scaling,
    pub entries: Vec<ConditionEntry>,
    /// `M̂`: max over the grid of `m_{0,π}(χ_w)`.
    pub m_hat: f64,
    /// `Ĉ`: the χ6 constant, absent for classical operators.
    pub c_hat: Option<f64>,
}

impl ConditionReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }

    pub fn entry(&self, condition: &str) -> Option<&ConditionEntry> {
        self.entries.iter().find(|e| e.condition == condition)
    }
}

pub(crate) fn describe_kernel(k: &Kernel) -> String {
    let base = match k.profile() {
        super::Profile::BSpline(n) => format!("M{n}"),
        super::Profile::Combo => "M".to_string(),
        super::Profile::Fejer => "fejer".to_string(),
        super::Profile::Sinc => "sinc".to_string(),
        super::Profile::Mellin { .. } => "mellin".to_string(),
        super::Profile::Custom { expr, .. } => format!("custom({expr})"),
    };
    if k.amplitude() == 1.0 {
        base
    } else {
        format!("{}*{base}", k.amplitude())
    }
}

fn default_gamma(spec: &OperatorSpec) -> f64 {
    if spec.variant().is_mellin() {
        2.0
    } else {
        0.5
    }
}

/// Probe points at which sup-over-z quantities are estimated for a given `w`.
pub fn default_probes(spec: &OperatorSpec, w: f64) -> Vec<f64> {
    let unbounded = spec.kernel().support_radius().is_none();
    let v = spec.variant();
    if v.is_mellin() {
        return (0..9).map(|j| 10f64.powf(-1.0 + j as f64 * 0.25)).collect();
    }
    if !v.is_lattice() {
        return vec![-1.3, 0.0, 0.7, 2.9];
    }
    let periodic = spec.sequence().is_uniform()
        && matches!(
            spec.family().scaling(),
            Scaling::DilateArgument | Scaling::DilateAndWeight
        );
    if periodic {
        // z ↦ Σ_k χ(wz − k) has period 1/w
        let n = if unbounded { 16 } else { 64 };
        (0..n).map(|j| j as f64 / (n as f64 * w)).collect()
    } else {
        let n = if unbounded { 41 } else { 401 };
        (0..n).map(|j| -10.0 + 20.0 * j as f64 / (n - 1) as f64).collect()
    }
}

fn probes_for(spec: &OperatorSpec, settings: &AuditSettings, w: f64) -> Vec<f64> {
    settings
        .probes
        .clone()
        .unwrap_or_else(|| default_probes(spec, w))
}

/// `∫_H χ_w(z − h_w(t)) dμ_H(t)` (with `|χ_w|` when `abs`) at one probe.
fn kernel_mass(spec: &OperatorSpec, z: f64, abs: bool, budget: f64, quad_tol: f64) -> Result<f64> {
    let kernel = spec.kernel();
    let w = spec.w();
    let eval = |u: f64| {
        let v = kernel.eval(u);
        if abs {
            v.abs()
        } else {
            v
        }
    };
    let v = spec.variant();
    if v.is_lattice() {
        let n = spec.dimension();
        let per_axis = budget / n as f64;
        let seq = spec.sequence();
        let window = lattice_window(&kernel, &seq, w, z, per_axis)?;
        let mut sum = 0.0;
        for k in window.range().clone() {
            sum += eval(z - seq.t(k) / w);
        }
        // tensor kernels factorize: the ℤᴺ sum at (z,…,z) is the N-th power
        return Ok(sum.powi(n as i32));
    }
    if v.is_mellin() {
        let (s, _) = mellin_radius(&kernel, w, budget);
        let est = IntegrationRequest::new(z, z * s.exp())
            .measure(Measure::Logarithmic)
            .tolerance(quad_tol)
            .integrate(|t| eval(z / t))?;
        return Ok(est);
    }
    let scaled = v == Variant::ConvKantorovichScaled;
    let weight = if scaled { w } else { 1.0 };
    let (r, _) = continuous_radius(&kernel, weight, budget)?;
    // integrate in the anchor variable t, with h_w(t) = t/w or t
    let (lo, hi, knots): (f64, f64, Vec<f64>) = if scaled {
        (
            w * (z - r),
            w * (z + r),
            kernel.knots().iter().map(|k| w * (z - k)).collect(),
        )
    } else {
        (z - r, z + r, kernel.knots().iter().map(|k| z - k).collect())
    };
    let est = IntegrationRequest::new(lo, hi)
        .breakpoints(knots)
        .tolerance(quad_tol)
        .max_panels(200_000)
        .integrate(|t| if scaled { eval(z - t / w) } else { eval(z - t) })?;
    Ok(est)
}

/// χ2: `max_z |∫_H χ_w(z − h_w(t)) dμ_H(t) − 1|` over the probes.
pub fn audit_chi2(spec: &OperatorSpec, w: f64, probes: &[f64], tolerance: f64) -> Result<f64> {
    if probes.is_empty() {
        return Err(Error::invalid("χ2 audit needs at least one probe"));
    }
    let spec = spec.clone().with_w(w)?;
    let quad_tol = (tolerance * 1e-2).clamp(1e-13, 1e-9);
    let mut dev: f64 = 0.0;
    for &z in probes {
        let m = kernel_mass(&spec, z, false, 0.5 * tolerance, quad_tol)?;
        dev = dev.max((m - 1.0).abs());
    }
    Ok(dev)
}

fn check_grid(w_grid: &[f64]) -> Result<()> {
    if w_grid.is_empty() {
        return Err(Error::invalid("audit needs a nonempty w grid"));
    }
    if w_grid.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
        return Err(Error::invalid("w grid values must be positive and finite"));
    }
    Ok(())
}

fn chi2_entry(spec: &OperatorSpec, settings: &AuditSettings) -> Result<ConditionEntry> {
    check_grid(&settings.w_grid)?;
    let mut values = Vec::with_capacity(settings.w_grid.len());
    for &w in &settings.w_grid {
        values.push(audit_chi2(spec, w, &probes_for(spec, settings, w), settings.tolerance)?);
    }
    let measured = values.iter().copied().fold(0.0, f64::max);
    Ok(ConditionEntry {
        condition: "chi2".into(),
        quantity: "max_z |∫ χ_w(z − h_w(t)) dμ_H(t) − 1|".into(),
        w_grid: settings.w_grid.clone(),
        values,
        measured,
        threshold: settings.tolerance,
        passed: measured <= settings.tolerance,
        detail: String::new(),
    })
}

/// χ3: per-w `m_{0,π}(χ_w)`; `measured` is the bound `M̂`.
pub fn audit_chi3(spec: &OperatorSpec, settings: &AuditSettings) -> Result<ConditionEntry> {
    check_grid(&settings.w_grid)?;
    let mut values = Vec::with_capacity(settings.w_grid.len());
    for &w in &settings.w_grid {
        let s = spec.clone().with_w(w)?;
        let mut m: f64 = 0.0;
        for z in probes_for(spec, settings, w) {
            m = m.max(kernel_mass(&s, z, true, 0.5 * settings.tolerance, settings.quad_tolerance())?);
        }
        values.push(m);
    }
    let m_hat = values.iter().copied().fold(0.0, f64::max);
    let passed = m_hat.is_finite() && m_hat <= settings.m_cap;
    Ok(ConditionEntry {
        condition: "chi3".into(),
        quantity: "m_{0,π}(χ_w) = sup_z ∫ |χ_w(z − h_w(t))| dμ_H(t)".into(),
        w_grid: settings.w_grid.clone(),
        values,
        measured: m_hat,
        threshold: settings.m_cap,
        passed,
        detail: if passed {
            String::new()
        } else {
            format!("estimate {m_hat} exceeds the cap {}", settings.m_cap)
        },
    })
}

/// `∫_r^∞ |χ|` and `∫_{-∞}^{-r} |χ|` (upper bounds from the tail for unbounded kernels).
fn one_sided_masses(kernel: &Kernel, r: f64, quad_tol: f64) -> Result<(f64, f64)> {
    match kernel.support() {
        Support::Compact { lo, hi } => {
            let knots = kernel.knots();
            let side = |a: f64, b: f64| -> Result<f64> {
                if a >= b {
                    return Ok(0.0);
                }
                Ok(IntegrationRequest::new(a, b)
                    .breakpoints(knots.iter().copied())
                    .tolerance(quad_tol)
                    .integrate(|u| kernel.eval(u).abs())?)
            };
            Ok((side(r.max(lo), hi)?, side(lo, (-r).min(hi))?))
        }
        Support::Unbounded { .. } => {
            let m = kernel
                .tail_mass(r)
                .ok_or_else(|| Error::invalid("unbounded kernel without tail bound"))?;
            Ok((m, m))
        }
    }
}

/// `∫_0^{x} |χ(u)| du/u` for a kernel on ℝ⁺.
fn log_mass_below(kernel: &Kernel, w: f64, x: f64, quad_tol: f64) -> Result<f64> {
    let (s, tail) = mellin_radius(kernel, w, quad_tol);
    let lo = (-s).exp();
    if x <= lo {
        return Ok(kernel.log_tail_mass(-x.ln()).unwrap_or(tail));
    }
    let body = IntegrationRequest::new(lo, x.min(1.0))
        .measure(Measure::Logarithmic)
        .tolerance(quad_tol)
        .integrate(|u| kernel.eval(u).abs())?;
    Ok(body + tail)
}

fn tail_value(spec: &OperatorSpec, gamma: f64, settings: &AuditSettings) -> Result<f64> {
    let kernel = spec.kernel();
    let w = spec.w();
    let v = spec.variant();
    let quad_tol = settings.quad_tolerance();
    if v.is_mellin() {
        // z/t ∉ [1/γ, γ] with z/t < 1 means z/t < 1/γ
        return log_mass_below(&kernel, w, 1.0 / gamma, quad_tol);
    }
    if v.is_lattice() {
        let n = spec.dimension();
        let seq = spec.sequence();
        let mut sup: f64 = 0.0;
        for z in probes_for(spec, settings, w) {
            let window = lattice_window(&kernel, &seq, w, z, 0.5 * settings.tolerance / n as f64)?;
            let (mut inside, mut total) = (0.0, 0.0);
            for k in window.range().clone() {
                let u = z - seq.t(k) / w;
                let a = kernel.eval(u).abs();
                total += a;
                if u.abs() <= gamma {
                    inside += a;
                }
            }
            // ℤᴺ terms with sup-distance > γ: total^N − inside^N
            let t = total.powi(n as i32) - f64::powi(inside, n as i32)
                + window.tail_bound() * n as f64 * total.max(1.0).powi(n as i32 - 1);
            sup = sup.max(t);
        }
        return Ok(sup);
    }
    let weight = if v == Variant::ConvKantorovichScaled { w } else { 1.0 };
    let (right, left) = one_sided_masses(&kernel, gamma, quad_tol)?;
    Ok(weight * (right + left))
}

/// χ4: per-w sup over z of the kernel mass farther than `γ` from `z`.
pub fn audit_chi4(spec: &OperatorSpec, gamma: f64, settings: &AuditSettings) -> Result<ConditionEntry> {
    check_grid(&settings.w_grid)?;
    check_gamma(spec, gamma)?;
    let mut values = Vec::with_capacity(settings.w_grid.len());
    for &w in &settings.w_grid {
        values.push(tail_value(&spec.clone().with_w(w)?, gamma, settings)?);
    }
    let first = values[0];
    let last = values[values.len() - 1];
    let slack = 1e-12 * first.abs().max(1e-300);
    let nonincreasing = values.windows(2).all(|p| p[1] <= p[0] + slack);
    let decreasing = last == 0.0 || last < first || values.len() == 1;
    let passed = nonincreasing && decreasing && values.iter().all(|v| v.is_finite());
    Ok(ConditionEntry {
        condition: "chi4".into(),
        quantity: format!("sup_z tail mass beyond γ = {gamma}"),
        w_grid: settings.w_grid.clone(),
        values,
        measured: last,
        threshold: first,
        passed,
        detail: if passed {
            String::new()
        } else {
            "tail mass does not decrease along the w grid".into()
        },
    })
}

fn check_gamma(spec: &OperatorSpec, gamma: f64) -> Result<()> {
    let ok = gamma.is_finite() && if spec.variant().is_mellin() { gamma > 1.0 } else { gamma > 0.0 };
    if ok {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "γ = {gamma} is not valid for variant {}",
            spec.variant().label()
        )))
    }
}

/// The rewritten χ5 quantity at radius `m`: an upper bound on
/// `sup_{h_w(t) ∈ K} ∫_{z ∉ C} weight·|χ_w(z − h_w(t))| dz`.
fn truncated_mass(spec: &OperatorSpec, gamma: f64, m: f64, quad_tol: f64) -> Result<f64> {
    let kernel = spec.kernel();
    let w = spec.w();
    if spec.variant().is_mellin() {
        // z < 1/M, t ≥ 1/γ ⇒ z/t < γ/M; z > M ≥ γ ≥ t ⇒ z/t > 1
        return log_mass_below(&kernel, w, gamma / m, quad_tol);
    }
    let weight = match spec.variant() {
        Variant::ConvKantorovichUnit | Variant::ClassicalConvolution => 1.0,
        _ => w,
    };
    let (right, left) = one_sided_masses(&kernel, m - gamma, quad_tol)?;
    Ok(weight * (right + left))
}

/// χ5: the smallest probed radius `M` (geometric steps of `2^{1/8}` from `γ`)
/// whose truncated mass is below `ε` for every `w` in the grid.
pub fn audit_chi5(
    spec: &OperatorSpec,
    gamma: f64,
    epsilon: f64,
    settings: &AuditSettings,
) -> Result<ConditionEntry> {
    check_grid(&settings.w_grid)?;
    check_gamma(spec, gamma)?;
    if !(epsilon > 0.0) {
        return Err(Error::invalid("ε must be positive"));
    }
    let quad_tol = settings.quad_tolerance();
    let specs = settings
        .w_grid
        .iter()
        .map(|&w| spec.clone().with_w(w))
        .collect::<Result<Vec<_>>>()?;
    let ratio = 2f64.powf(0.125);
    let max_radius = gamma + 1e6;
    let mut m = gamma * ratio;
    let mut best = f64::INFINITY;
    while m <= max_radius {
        let values = specs
            .iter()
            .map(|s| truncated_mass(s, gamma, m, quad_tol))
            .collect::<Result<Vec<_>>>()?;
        let worst = values.iter().copied().fold(0.0, f64::max);
        best = best.min(worst);
        if worst < epsilon {
            return Ok(ConditionEntry {
                condition: "chi5".into(),
                quantity: format!("truncation radius M for γ = {gamma}, ε = {epsilon}"),
                w_grid: settings.w_grid.clone(),
                values,
                measured: m,
                threshold: epsilon,
                passed: true,
                detail: format!("worst truncated mass at M: {worst:e}"),
            });
        }
        m *= ratio;
    }
    Ok(ConditionEntry {
        condition: "chi5".into(),
        quantity: format!("truncation radius M for γ = {gamma}, ε = {epsilon}"),
        w_grid: settings.w_grid.clone(),
        values: vec![best; settings.w_grid.len()],
        measured: f64::INFINITY,
        threshold: epsilon,
        passed: false,
        detail: format!("no radius up to {max_radius} reaches ε; best truncated mass {best:e}"),
    })
}

/// Factor from the cell geometry: `1/δ` for forward cells, the covering
/// multiplicity `⌈2/δ⌉/2` for symmetric cells of length `2/w`.
fn coverage_factor(spec: &OperatorSpec) -> f64 {
    let delta = spec.sequence().min_spacing();
    match spec.variant() {
        Variant::SamplingKantorovich => 1.0 / delta,
        Variant::SamplingKantorovichSymmetric => (2.0 / delta).ceil() / 2.0,
        Variant::MultiDimSamplingKantorovich => delta.recip().powi(spec.dimension() as i32),
        _ => 1.0,
    }
}

/// χ6: `w·‖χ_w‖₁` for (1), (1,1), (2) and (5), `‖χ_w‖₁` for (3) and (4);
/// `measured` is the constant `Ĉ`.
pub fn audit_chi6(spec: &OperatorSpec, settings: &AuditSettings) -> Result<ConditionEntry> {
    check_grid(&settings.w_grid)?;
    if spec.variant().is_classical() {
        return Err(Error::invalid("χ6 reduces to a kernel condition only for Kantorovich variants"));
    }
    let weighted = !matches!(
        spec.variant(),
        Variant::ConvKantorovichUnit | Variant::MellinKantorovich
    );
    let n = spec.dimension() as i32;
    let tol = settings.quad_tolerance().max(1e-9);
    let mut values = Vec::with_capacity(settings.w_grid.len());
    for &w in &settings.w_grid {
        let norm = kernel_l1_norm(&spec.family().at(w), tol)?;
        let q = if weighted { w * norm } else { norm };
        values.push(q.powi(n));
    }
    let half = values.len() / 2;
    let growth = if values.len() >= 2 {
        let first = values[..half.max(1)].iter().copied().fold(0.0, f64::max);
        let second = values[half.max(1)..].iter().copied().fold(0.0, f64::max);
        second > 2.0 * first
    } else {
        false
    };
    let limsup = values.iter().copied().fold(0.0, f64::max);
    let c_hat = limsup * coverage_factor(spec);
    let passed = !growth && c_hat.is_finite();
    Ok(ConditionEntry {
        condition: "chi6".into(),
        quantity: if weighted { "w·‖χ_w‖₁" } else { "‖χ_w‖₁" }.into(),
        w_grid: settings.w_grid.clone(),
        values,
        measured: c_hat,
        threshold: f64::INFINITY,
        passed,
        detail: if growth {
            "quantity grows along the w grid".into()
        } else {
            format!("max over grid {limsup}, coverage factor {}", coverage_factor(spec))
        },
    })
}

/// Runs every applicable audit with the given settings.
pub fn audit_all(spec: &OperatorSpec, settings: &AuditSettings) -> Result<ConditionReport> {
    let gamma = settings.gamma.unwrap_or_else(|| default_gamma(spec));
    let mut entries = vec![chi2_entry(spec, settings)?];
    let chi3 = audit_chi3(spec, settings)?;
    let m_hat = chi3.measured;
    entries.push(chi3);
    entries.push(audit_chi4(spec, gamma, settings)?);
    entries.push(audit_chi5(spec, gamma, settings.epsilon, settings)?);
    let mut c_hat = None;
    if !spec.variant().is_classical() {
        let chi6 = audit_chi6(spec, settings)?;
        c_hat = Some(chi6.measured);
        entries.push(chi6);
    }
    Ok(ConditionReport {
        variant: spec.variant().label().to_string(),
        kernel: describe_kernel(spec.family().base()),
        scaling: spec.family().scaling(),
        entries,
        m_hat,
        c_hat,
    })
}
