//! The Kantorovich operators `S_w^{(1)}`, `S_w^{(1,1)}`, `S_w^{(2)}`,
//! `S_w^{(3)}`, `S_w^{(4)}`, `S_w^{(5)}` and their classical counterparts.
//!
//! Every variant has the shape "kernel weight times the mean of `f` over a
//! cell", summed over a lattice or integrated over a continuous anchor set:
//!
//! | variant | anchors | kernel factor | cell |
//! |---|---|---|---|
//! | (1) | `k ∈ ℤ` | `χ_w(z − t_k/w)` | `[t_k/w, t_{k+1}/w]` |
//! | (1,1) | `k ∈ ℤ` | `χ_w(z − s_k/w)` | `[s_k/w − 1/w, s_k/w + 1/w]` |
//! | (2) | `t ∈ ℝ` | `χ_w(z − t/w)` | `[(t−1)/w, (t+1)/w]` |
//! | (3) | `t ∈ ℝ` | `χ_w(z − t)` | `[t − 1/w, t + 1/w]` |
//! | (4) | `t ∈ ℝ⁺` | `χ_w(z/t)` | `[t·w/(w+1), t·(w+1)/w]` |
//! | (5) | `𝐤 ∈ ℤᴺ` | `∏ χ_w(zᵢ − t_{kᵢ}/w)` | `∏ [t_{kᵢ}/w, t_{kᵢ+1}/w]` |
//!
//! Variant (2) is integrated in the variable `s = t/w`, which turns `dt`
//! into `w·ds`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcdsl::Domain;
use crate::group_model::{check_w, Anchor, CellFamily, SampleSequence};
use crate::kernels::{Kernel, KernelFamily, Scaling, Support};
use crate::quadrature::{IntegrationRequest, LatticeWindow, Measure, DEFAULT_TOLERANCE};
use crate::signal::{Signal, SignalNd};

/// Largest lattice window a single evaluation may use.
pub const MAX_LATTICE_TERMS: f64 = 4.0e6;
const MAX_PANELS: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    #[serde(alias = "1")]
    SamplingKantorovich,
    #[serde(alias = "1,1")]
    SamplingKantorovichSymmetric,
    #[serde(alias = "2")]
    ConvKantorovichScaled,
    #[serde(alias = "3")]
    ConvKantorovichUnit,
    #[serde(alias = "4")]
    MellinKantorovich,
    #[serde(alias = "5")]
    MultiDimSamplingKantorovich,
    ClassicalSampling,
    ClassicalConvolution,
    ClassicalMellin,
}

impl Variant {
    pub const KANTOROVICH: [Variant; 6] = [
        Variant::SamplingKantorovich,
        Variant::SamplingKantorovichSymmetric,
        Variant::ConvKantorovichScaled,
        Variant::ConvKantorovichUnit,
        Variant::MellinKantorovich,
        Variant::MultiDimSamplingKantorovich,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Variant::SamplingKantorovich => "(1)",
            Variant::SamplingKantorovichSymmetric => "(1,1)",
            Variant::ConvKantorovichScaled => "(2)",
            Variant::ConvKantorovichUnit => "(3)",
            Variant::MellinKantorovich => "(4)",
            Variant::MultiDimSamplingKantorovich => "(5)",
            Variant::ClassicalSampling => "classical sampling",
            Variant::ClassicalConvolution => "classical convolution",
            Variant::ClassicalMellin => "classical Mellin",
        }
    }

    /// The scaling used with this variant's reference kernel.
    pub fn default_scaling(self) -> Scaling {
        match self {
            Variant::ConvKantorovichUnit | Variant::ClassicalConvolution => Scaling::DilateAndWeight,
            Variant::MellinKantorovich | Variant::ClassicalMellin => Scaling::MellinPower,
            _ => Scaling::DilateArgument,
        }
    }

    pub fn is_mellin(self) -> bool {
        matches!(self, Variant::MellinKantorovich | Variant::ClassicalMellin)
    }

    /// Anchors form a lattice (the operator is a series).
    pub fn is_lattice(self) -> bool {
        matches!(
            self,
            Variant::SamplingKantorovich
                | Variant::SamplingKantorovichSymmetric
                | Variant::MultiDimSamplingKantorovich
                | Variant::ClassicalSampling
        )
    }

    pub fn is_classical(self) -> bool {
        matches!(
            self,
            Variant::ClassicalSampling | Variant::ClassicalConvolution | Variant::ClassicalMellin
        )
    }

    pub fn signal_domain(self) -> Domain {
        if self.is_mellin() {
            Domain::Positive
        } else {
            Domain::Real
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSpec {
    variant: Variant,
    family: KernelFamily,
    sequence: SampleSequence,
    w: f64,
    tolerance: f64,
}

impl OperatorSpec {
    pub fn new(variant: Variant, family: KernelFamily) -> Result<Self> {
        let spec = OperatorSpec {
            variant,
            family,
            sequence: SampleSequence::Uniform,
            w: 1.0,
            tolerance: DEFAULT_TOLERANCE,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// The variant with its reference kernel: `M(wu)` for the sampling and
    /// scaled-convolution forms, `w·M(wu)` for the unit convolution, `𝓜_w`
    /// for Mellin, and the planar tensor kernel for (5).
    pub fn standard(variant: Variant) -> Self {
        let family = match variant {
            Variant::MellinKantorovich | Variant::ClassicalMellin => KernelFamily::mellin(),
            Variant::MultiDimSamplingKantorovich => {
                KernelFamily::new(Kernel::combo(), Scaling::DilateArgument, 2).expect("valid family")
            }
            v => KernelFamily::new(Kernel::combo(), v.default_scaling(), 1).expect("valid family"),
        };
        OperatorSpec::new(variant, family).expect("reference spec is valid")
    }

    pub fn with_w(mut self, w: f64) -> Result<Self> {
        self.w = w;
        self.validate()?;
        Ok(self)
    }

    pub fn with_sequence(mut self, sequence: SampleSequence) -> Result<Self> {
        self.sequence = sequence;
        self.validate()?;
        Ok(self)
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Result<Self> {
        self.tolerance = tolerance;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        check_w(self.w)?;
        if !(self.tolerance > 0.0 && self.tolerance < 1.0) {
            return Err(Error::invalid(format!(
                "tolerance must lie in (0, 1), got {}",
                self.tolerance
            )));
        }
        self.sequence.validate()?;
        let mellin_family = self.family.scaling() == Scaling::MellinPower;
        if self.variant.is_mellin() != mellin_family {
            return Err(Error::invalid(format!(
                "variant {} needs {} kernel family",
                self.variant.label(),
                if self.variant.is_mellin() { "the Mellin" } else { "an additive" }
            )));
        }
        let dim = self.family.tensor_dim();
        match self.variant {
            Variant::MultiDimSamplingKantorovich if dim < 2 => {
                return Err(Error::invalid("variant (5) needs a tensor kernel of dimension 2 or 3"))
            }
            Variant::MultiDimSamplingKantorovich => {}
            v if dim != 1 => {
                return Err(Error::invalid(format!(
                    "variant {} is one-dimensional, kernel has dimension {dim}",
                    v.label()
                )))
            }
            _ => {}
        }
        if !self.variant.is_lattice() && !self.sequence.is_uniform() {
            return Err(Error::invalid(format!(
                "variant {} has no sample sequence; only the uniform default is accepted",
                self.variant.label()
            )));
        }
        Ok(())
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn family(&self) -> &KernelFamily {
        &self.family
    }

    pub fn sequence(&self) -> SampleSequence {
        self.sequence
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn dimension(&self) -> usize {
        self.family.tensor_dim()
    }

    /// The one-dimensional factor `χ_w` at the current `w`.
    pub fn kernel(&self) -> Kernel {
        self.family.at(self.w)
    }

    /// `B_w(t)` and `h_w` for the Kantorovich variants; `None` for classical ones.
    pub fn cell_family(&self) -> Option<CellFamily> {
        Some(match self.variant {
            Variant::SamplingKantorovich => CellFamily::SamplingForward(self.sequence),
            Variant::SamplingKantorovichSymmetric => CellFamily::SamplingSymmetric(self.sequence),
            Variant::ConvKantorovichScaled => CellFamily::ConvolutionScaled,
            Variant::ConvKantorovichUnit => CellFamily::ConvolutionUnit,
            Variant::MellinKantorovich => CellFamily::Mellin,
            Variant::MultiDimSamplingKantorovich => CellFamily::MultiSampling {
                sequence: self.sequence,
                dim: self.dimension(),
            },
            _ => return None,
        })
    }

    /// The pointwise operator the Kantorovich variant is compared with.
    pub fn classical_counterpart(&self) -> Result<OperatorSpec> {
        let variant = match self.variant {
            Variant::SamplingKantorovich | Variant::SamplingKantorovichSymmetric => {
                Variant::ClassicalSampling
            }
            Variant::ConvKantorovichUnit => Variant::ClassicalConvolution,
            Variant::MellinKantorovich => Variant::ClassicalMellin,
            v if v.is_classical() => v,
            v => {
                return Err(Error::invalid(format!(
                    "variant {} has no classical comparator",
                    v.label()
                )))
            }
        };
        Ok(OperatorSpec {
            variant,
            ..self.clone()
        })
    }
}

/// How a single evaluation was truncated.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointDiagnostics {
    /// Index range for series, integration interval for integrals.
    pub window: (f64, f64),
    /// Lattice terms summed or quadrature panels used.
    pub terms: usize,
    /// Bound on the discarded part, relative to `sup|f|`.
    pub tail_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationResult {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub diagnostics: Vec<PointDiagnostics>,
    pub tolerance: f64,
}

/// Indices `k` whose term `χ_w(z − t_k/w)` is nonzero, or a certified
/// window whose discarded terms sum (in absolute value) to at most `budget`.
pub(crate) fn lattice_window(
    kernel: &Kernel,
    sequence: &SampleSequence,
    w: f64,
    z: f64,
    budget: f64,
) -> Result<LatticeWindow> {
    match kernel.support() {
        Support::Compact { lo, hi } => {
            let r = lo.abs().max(hi.abs());
            Ok(LatticeWindow::Exact(sequence.indices_in(w * (z - r), w * (z + r))))
        }
        Support::Unbounded { tail: None } => Err(Error::invalid(
            "kernel has unbounded support and no tail bound; cannot truncate the series",
        )),
        Support::Unbounded { tail: Some(_) } => {
            // points z − t_k/w are at least δ/w apart, so beyond radius R the
            // one-sided sum of a decreasing bound g is ≤ g(R) + (w/δ)∫_R^∞ g
            let gap = sequence.min_spacing() / w;
            let mut r = 1.0 / w;
            loop {
                let sup = kernel.tail_sup(r).unwrap_or(f64::INFINITY);
                let mass = kernel.tail_mass(r).unwrap_or(f64::INFINITY);
                let bound = 2.0 * sup + 2.0 * mass / gap;
                if bound <= budget {
                    return Ok(LatticeWindow::Certified {
                        range: sequence.indices_in(w * (z - r), w * (z + r)),
                        tail_bound: bound,
                    });
                }
                r *= 2.0;
                if 2.0 * r / gap > MAX_LATTICE_TERMS {
                    return Err(Error::Truncation(format!(
                        "series needs more than {MAX_LATTICE_TERMS:e} terms for budget {budget:e}"
                    )));
                }
            }
        }
    }
}

/// Radius `R` of `u ∈ [−R, R]` outside which `weight·∫|χ_w|` is at most `budget`.
pub(crate) fn continuous_radius(kernel: &Kernel, weight: f64, budget: f64) -> Result<(f64, f64)> {
    match kernel.support() {
        Support::Compact { lo, hi } => Ok((lo.abs().max(hi.abs()), 0.0)),
        Support::Unbounded { tail: None } => Err(Error::invalid(
            "kernel has unbounded support and no tail bound; cannot truncate the integral",
        )),
        Support::Unbounded { tail: Some(_) } => {
            let mut r = 1.0;
            loop {
                let bound = 2.0 * weight * kernel.tail_mass(r).unwrap_or(f64::INFINITY);
                if bound <= budget {
                    return Ok((r, bound));
                }
                r *= 2.0;
                if r > crate::kernels::MAX_TRUNCATION_RADIUS {
                    return Err(Error::Truncation(format!(
                        "integral needs a radius beyond {:e} for budget {budget:e}",
                        crate::kernels::MAX_TRUNCATION_RADIUS
                    )));
                }
            }
        }
    }
}

/// Log-radius `S` with `∫_0^{e^{-S}} |𝓜_w(u)| du/u ≤ budget`, and that mass.
pub(crate) fn mellin_radius(kernel: &Kernel, w: f64, budget: f64) -> (f64, f64) {
    let amp = kernel.amplitude().abs().max(f64::MIN_POSITIVE);
    let s = ((amp / budget).ln() / w).max(1.0 / w);
    (s, kernel.log_tail_mass(s).unwrap_or(0.0))
}

fn check_domain<S: Signal + ?Sized>(spec: &OperatorSpec, f: &S) -> Result<()> {
    let want = spec.variant.signal_domain();
    if f.domain() != want {
        return Err(Error::invalid(format!(
            "variant {} acts on signals over {want:?}, got {:?}",
            spec.variant.label(),
            f.domain()
        )));
    }
    Ok(())
}

/// The factor multiplying `χ_w(z − t_k/w)` in the series variants.
fn lattice_sample<S: Signal + ?Sized>(spec: &OperatorSpec, f: &S, k: i64) -> Result<f64> {
    match spec.cell_family() {
        Some(family) => {
            let cell = family.cell_of(spec.w, &Anchor::Index(k))?;
            f.mean(&cell, spec.tolerance)
        }
        None => f.value(spec.sequence.t(k) / spec.w),
    }
}

struct SampleCache {
    first: i64,
    values: Vec<f64>,
}

fn lattice_point<S: Signal + ?Sized>(
    spec: &OperatorSpec,
    f: &S,
    kernel: &Kernel,
    z: f64,
    cache: Option<&SampleCache>,
) -> Result<(f64, PointDiagnostics)> {
    let window = lattice_window(kernel, &spec.sequence, spec.w, z, spec.tolerance)?;
    let range = window.range().clone();
    let mut total = 0.0;
    let mut terms = 0;
    for k in range.clone() {
        terms += 1;
        let weight = kernel.eval(z - spec.sequence.t(k) / spec.w);
        if weight == 0.0 {
            continue;
        }
        let sample = match cache {
            Some(c) => c.values[(k - c.first) as usize],
            None => lattice_sample(spec, f, k)?,
        };
        total += weight * sample;
    }
    Ok((
        total,
        PointDiagnostics {
            window: (*range.start() as f64, *range.end() as f64),
            terms,
            tail_bound: window.tail_bound(),
        },
    ))
}

fn extra_knots(z: f64, r: f64, w: f64) -> Vec<f64> {
    // guide the quadrature through oscillating tails one kernel period at a time
    let n = (r * w).ceil() as i64;
    if n > 4000 {
        return Vec::new();
    }
    (-n..=n).map(|j| z + j as f64 / w).collect()
}

fn convolution_point<S: Signal + ?Sized>(
    spec: &OperatorSpec,
    f: &S,
    kernel: &Kernel,
    z: f64,
) -> Result<(f64, PointDiagnostics)> {
    let w = spec.w;
    let tol = spec.tolerance;
    let weight = if spec.variant == Variant::ConvKantorovichScaled { w } else { 1.0 };
    let (r, tail) = continuous_radius(kernel, weight, tol)?;
    let (lo, hi) = (z - r, z + r);
    let mut bps: Vec<f64> = kernel.knots().iter().map(|k| z - k).collect();
    if kernel.support_radius().is_none() {
        bps.extend(extra_knots(z, r, w));
    }
    let est = if spec.variant == Variant::ClassicalConvolution {
        bps.extend_from_slice(f.breakpoints());
        IntegrationRequest::new(lo, hi)
            .breakpoints(bps)
            .tolerance(tol)
            .max_panels(MAX_PANELS)
            .try_integrate(|t| {
                let k = kernel.eval(z - t);
                if k == 0.0 {
                    return Ok::<_, Error>(0.0);
                }
                Ok(k * f.value(t)?)
            })?
    } else {
        let h = 1.0 / w;
        bps.extend(f.breakpoints().iter().flat_map(|&b| [b - h, b + h]));
        IntegrationRequest::new(lo, hi)
            .breakpoints(bps)
            .tolerance(tol)
            .max_panels(MAX_PANELS)
            .try_integrate(|s| {
                let k = kernel.eval(z - s);
                if k == 0.0 {
                    return Ok::<_, Error>(0.0);
                }
                let mean = f.integral(s - h, s + h, tol)? * (0.5 * w);
                Ok(weight * k * mean)
            })?
    };
    Ok((
        est.value,
        PointDiagnostics {
            window: (lo, hi),
            terms: est.panels,
            tail_bound: tail,
        },
    ))
}

fn mellin_point<S: Signal + ?Sized>(
    spec: &OperatorSpec,
    f: &S,
    kernel: &Kernel,
    z: f64,
) -> Result<(f64, PointDiagnostics)> {
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::invalid(format!(
            "Mellin operators are evaluated at z > 0, got {z}"
        )));
    }
    let w = spec.w;
    let tol = spec.tolerance;
    let (s, tail) = mellin_radius(kernel, w, tol);
    // 𝓜_w(z/t) vanishes for t ≤ z
    let (lo, hi) = (z, z * s.exp());
    let est = if spec.variant == Variant::ClassicalMellin {
        IntegrationRequest::new(lo, hi)
            .measure(Measure::Logarithmic)
            .breakpoints(f.breakpoints().iter().copied())
            .tolerance(tol)
            .max_panels(MAX_PANELS)
            .try_integrate(|t| Ok::<_, Error>(kernel.eval(z / t) * f.value(t)?))?
    } else {
        let down = w / (w + 1.0);
        let up = (w + 1.0) / w;
        let measure = 2.0 * (1.0 / w).ln_1p();
        let bps = f.breakpoints().iter().flat_map(|&b| [b * down, b * up]);
        IntegrationRequest::new(lo, hi)
            .measure(Measure::Logarithmic)
            .breakpoints(bps)
            .tolerance(tol)
            .max_panels(MAX_PANELS)
            .try_integrate(|t| {
                let k = kernel.eval(z / t);
                if k == 0.0 {
                    return Ok::<_, Error>(0.0);
                }
                Ok(k * f.integral(t * down, t * up, tol)? / measure)
            })?
    };
    Ok((
        est.value,
        PointDiagnostics {
            window: (lo, hi),
            terms: est.panels,
            tail_bound: tail,
        },
    ))
}

fn evaluate_point<S: Signal + ?Sized>(
    spec: &OperatorSpec,
    f: &S,
    z: f64,
    cache: Option<&SampleCache>,
) -> Result<(f64, PointDiagnostics)> {
    if !z.is_finite() {
        return Err(Error::invalid(format!("evaluation point must be finite, got {z}")));
    }
    let kernel = spec.kernel();
    match spec.variant {
        Variant::SamplingKantorovich
        | Variant::SamplingKantorovichSymmetric
        | Variant::ClassicalSampling => lattice_point(spec, f, &kernel, z, cache),
        Variant::ConvKantorovichScaled | Variant::ConvKantorovichUnit | Variant::ClassicalConvolution => {
            convolution_point(spec, f, &kernel, z)
        }
        Variant::MellinKantorovich | Variant::ClassicalMellin => mellin_point(spec, f, &kernel, z),
        Variant::MultiDimSamplingKantorovich => Err(Error::invalid(
            "variant (5) acts on functions of several variables; use apply_nd",
        )),
    }
}

/// `S_w f(z)`.
pub fn apply<S: Signal + ?Sized>(spec: &OperatorSpec, f: &S, z: f64) -> Result<f64> {
    check_domain(spec, f)?;
    Ok(evaluate_point(spec, f, z, None)?.0)
}

/// Evaluates `S_w f` on a grid. Lattice samples (cell means) are computed
/// once per index and shared by all grid points.
pub fn apply_grid<S: Signal + ?Sized>(
    spec: &OperatorSpec,
    f: &S,
    grid: &[f64],
) -> Result<EvaluationResult> {
    check_domain(spec, f)?;
    let cache = if spec.variant.is_lattice() && !grid.is_empty() {
        let kernel = spec.kernel();
        let windows = grid
            .iter()
            .map(|&z| lattice_window(&kernel, &spec.sequence, spec.w, z, spec.tolerance))
            .collect::<Result<Vec<_>>>()?;
        let first = windows.iter().map(|w| *w.range().start()).min().unwrap_or(0);
        let last = windows.iter().map(|w| *w.range().end()).max().unwrap_or(-1);
        let values = (first..=last.max(first - 1))
            .into_par_iter()
            .map(|k| lattice_sample(spec, f, k))
            .collect::<Result<Vec<_>>>()?;
        Some(SampleCache { first, values })
    } else {
        None
    };
    let points = grid
        .par_iter()
        .map(|&z| evaluate_point(spec, f, z, cache.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    let (values, diagnostics) = points.into_iter().unzip();
    Ok(EvaluationResult {
        grid: grid.to_vec(),
        values,
        diagnostics,
        tolerance: spec.tolerance,
    })
}

/// `S_w^{(5)} f(𝐳)` for a function on ℝᴺ.
pub fn apply_nd<S: SignalNd + ?Sized>(spec: &OperatorSpec, f: &S, z: &[f64]) -> Result<f64> {
    if spec.variant != Variant::MultiDimSamplingKantorovich {
        return Err(Error::invalid("apply_nd evaluates variant (5) only"));
    }
    let n = spec.dimension();
    if z.len() != n || f.dim() != n {
        return Err(Error::invalid(format!(
            "dimension mismatch: kernel {n}, point {}, signal {}",
            z.len(),
            f.dim()
        )));
    }
    let kernel = spec.kernel();
    let (w, seq) = (spec.w, spec.sequence);
    // per-axis index ranges and kernel weights
    let mut axes: Vec<Vec<(i64, f64)>> = Vec::with_capacity(n);
    let mut per_axis_budget = spec.tolerance / n as f64;
    if kernel.support_radius().is_none() {
        per_axis_budget /= 2.0;
    }
    for &zi in z {
        if !zi.is_finite() {
            return Err(Error::invalid("evaluation point must be finite"));
        }
        let window = lattice_window(&kernel, &seq, w, zi, per_axis_budget)?;
        axes.push(
            window
                .range()
                .clone()
                .map(|k| (k, kernel.eval(zi - seq.t(k) / w)))
                .filter(|(_, v)| *v != 0.0)
                .collect(),
        );
    }
    let mut total = 0.0;
    let mut idx = vec![0usize; n];
    if axes.iter().any(|a| a.is_empty()) {
        return Ok(0.0);
    }
    loop {
        let mut weight = 1.0;
        let mut bounds = Vec::with_capacity(n);
        for (axis, &i) in idx.iter().enumerate() {
            let (k, v) = axes[axis][i];
            weight *= v;
            bounds.push((seq.t(k) / w, seq.t(k + 1) / w));
        }
        let volume: f64 = bounds.iter().map(|(a, b)| b - a).product();
        total += weight * f.box_integral(&bounds, spec.tolerance)? / volume;
        // odometer increment, last axis fastest
        let mut axis = n;
        loop {
            if axis == 0 {
                return Ok(total);
            }
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] < axes[axis].len() {
                break;
            }
            idx[axis] = 0;
        }
    }
}

/// The classical operator paired with the spec's variant, evaluated at `z`.
pub fn classical_comparator<S: Signal + ?Sized>(spec: &OperatorSpec, f: &S, z: f64) -> Result<f64> {
    apply(&spec.classical_counterpart()?, f, z)
}

/// `(1/w) / ln(1 + 1/w)`, the factor relating the Mellin cell mean to a point value.
pub fn mellin_mean_prefactor(w: f64) -> Result<f64> {
    check_w(w)?;
    Ok((1.0 / w) / (1.0 / w).ln_1p())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcdsl::presets;
    use crate::signal::{constant, FnSignal, TensorSignal};

    #[test]
    fn constants_are_reproduced() {
        let one = constant(Domain::Real, 1.0);
        let pos = constant(Domain::Positive, 1.0);
        for v in Variant::KANTOROVICH.into_iter().filter(|v| *v != Variant::MultiDimSamplingKantorovich) {
            let spec = OperatorSpec::standard(v).with_w(7.0).unwrap();
            for z in [0.3, 1.7, 2.9] {
                let y = if v.is_mellin() {
                    apply(&spec, &pos, z).unwrap()
                } else {
                    apply(&spec, &one, z - 1.0).unwrap()
                };
                assert!((y - 1.0).abs() < 1e-8, "{v:?} z={z}: {y}");
            }
        }
    }

    #[test]
    fn mollifier_with_unit_mass() {
        let fam = KernelFamily::new(Kernel::bspline(3).unwrap(), Scaling::DilateAndWeight, 1).unwrap();
        let spec = OperatorSpec::new(Variant::ConvKantorovichUnit, fam)
            .unwrap()
            .with_w(8.0)
            .unwrap();
        let y = apply(&spec, &constant(Domain::Real, 1.0), 0.0).unwrap();
        assert!((y - 1.0).abs() < 1e-9);
    }

    #[test]
    fn sampling_matches_hand_sum() {
        // S^(1) of the hat function: Σ_k M(wz − k) · mean over [k/w, (k+1)/w]
        let f = presets::hat();
        let spec = OperatorSpec::standard(Variant::SamplingKantorovich).with_w(4.0).unwrap();
        let z = 0.37;
        let mut expect = 0.0;
        for k in -20..20 {
            let (a, b) = (k as f64 / 4.0, (k + 1) as f64 / 4.0);
            // exact mean of a piecewise-linear function on a cell avoiding its kinks
            let mean = if b <= -1.0 || a >= 1.0 {
                0.0
            } else {
                let g = |x: f64| (1.0 - x.abs()).max(0.0);
                0.5 * (g(a) + g(b))
            };
            expect += crate::kernels::combo_kernel_eval(4.0 * z - k as f64) * mean;
        }
        let got = apply(&spec, &f, z).unwrap();
        assert!((got - expect).abs() < 1e-12, "{got} vs {expect}");
    }

    #[test]
    fn grid_matches_pointwise_and_permutation() {
        let f = presets::f1();
        let spec = OperatorSpec::standard(Variant::SamplingKantorovichSymmetric).with_w(5.0).unwrap();
        let grid: Vec<f64> = (0..21).map(|i| -2.0 + 0.2 * i as f64).collect();
        let res = apply_grid(&spec, &f, &grid).unwrap();
        for (z, v) in grid.iter().zip(&res.values) {
            assert_eq!(*v, apply(&spec, &f, *z).unwrap());
        }
        let mut rev = grid.clone();
        rev.reverse();
        let res2 = apply_grid(&spec, &f, &rev).unwrap();
        let mut back = res2.values.clone();
        back.reverse();
        assert_eq!(back, res.values);
    }

    #[test]
    fn classical_sampling_partition_of_unity() {
        let spec = OperatorSpec::standard(Variant::SamplingKantorovichSymmetric).with_w(3.0).unwrap();
        let one = constant(Domain::Real, 1.0);
        for z in [-0.41, 0.0, 0.77] {
            let y = classical_comparator(&spec, &one, z).unwrap();
            assert!((y - 1.0).abs() < 1e-12);
        }
        let spec2 = OperatorSpec::standard(Variant::ConvKantorovichScaled);
        assert!(spec2.classical_counterpart().is_err());
    }

    #[test]
    fn mellin_requires_positive_points() {
        let spec = OperatorSpec::standard(Variant::MellinKantorovich).with_w(5.0).unwrap();
        let f = presets::f3();
        assert!(matches!(apply(&spec, &f, 0.0), Err(Error::InvalidInput(_))));
        assert!(matches!(apply(&spec, &f, -1.0), Err(Error::InvalidInput(_))));
        let g = presets::f1();
        assert!(apply(&spec, &g, 1.0).is_err());
    }

    #[test]
    fn prefactor_values() {
        assert!((mellin_mean_prefactor(1.0).unwrap() - 1.0 / 2f64.ln()).abs() < 1e-15);
        assert!((mellin_mean_prefactor(1000.0).unwrap() - 1.0).abs() < 5e-4);
        let mut prev = f64::INFINITY;
        for w in 1..=1000 {
            let p = mellin_mean_prefactor(w as f64).unwrap();
            assert!(p < prev);
            prev = p;
        }
        assert!(mellin_mean_prefactor(0.0).is_err());
    }

    #[test]
    fn fejer_series_is_certified() {
        let fam = KernelFamily::new(Kernel::fejer(), Scaling::DilateArgument, 1).unwrap();
        let spec = OperatorSpec::new(Variant::SamplingKantorovich, fam)
            .unwrap()
            .with_w(5.0)
            .unwrap()
            .with_tolerance(1e-5)
            .unwrap();
        let one = constant(Domain::Real, 1.0);
        let res = apply_grid(&spec, &one, &[0.1]).unwrap();
        assert!((res.values[0] - 1.0).abs() <= 1e-5);
        assert!(res.diagnostics[0].tail_bound <= 1e-5);
        assert!(res.diagnostics[0].tail_bound > 0.0);
        let tight = spec.clone().with_tolerance(1e-12).unwrap();
        assert!(matches!(apply(&tight, &one, 0.1), Err(Error::Truncation(_))));
    }

    #[test]
    fn multidim_tensor_consistency() {
        let g = presets::hat();
        let h = presets::f2();
        let spec5 = OperatorSpec::standard(Variant::MultiDimSamplingKantorovich).with_w(4.0).unwrap();
        let spec1 = OperatorSpec::standard(Variant::SamplingKantorovich).with_w(4.0).unwrap();
        let t = TensorSignal::new(vec![g.clone(), h.clone()]).unwrap();
        for (x, y) in [(0.1, -0.6), (0.5, 1.9)] {
            let a = apply_nd(&spec5, &t, &[x, y]).unwrap();
            let b = apply(&spec1, &g, x).unwrap() * apply(&spec1, &h, y).unwrap();
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn translation_covariance_of_unit_convolution() {
        let spec = OperatorSpec::standard(Variant::ConvKantorovichUnit).with_w(6.0).unwrap();
        let f = presets::f2();
        let a = 0.37;
        let shifted = FnSignal::new(
            Domain::Real,
            f.breakpoints().iter().map(|b| b + a).collect(),
            |x| f.eval(x - a).unwrap(),
        );
        for z in [-0.8, 0.4, 1.9] {
            let lhs = apply(&spec, &shifted, z).unwrap();
            let rhs = apply(&spec, &f, z - a).unwrap();
            assert!((lhs - rhs).abs() < 1e-8, "{lhs} vs {rhs}");
        }
    }
}
