//! Kernel toolkit: central B-splines, the combination `M = 4M₃ − 3M₄`, the
//! Fejér and sinc functions, the Mellin kernel `𝓜_w`, user-defined
//! expression kernels, and the scaling rules that turn a base kernel into a
//! family `χ_w`.

pub mod audit;

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcdsl::Expression;
use crate::group_model::GroupSpace;
use crate::quadrature::{IntegrationRequest, Measure};

pub use audit::{
    audit_all, audit_chi2, audit_chi3, audit_chi4, audit_chi5, audit_chi6, AuditSettings,
    ConditionEntry, ConditionReport,
};

pub const MAX_BSPLINE_ORDER: u32 = 10;

/// Central B-spline `M_n(x) = 1/(n-1)! Σ_{j=0}^{n} (-1)^j C(n,j) (n/2 + x - j)_+^{n-1}`.
pub fn bspline_eval(n: u32, x: f64) -> Result<f64> {
    if !(1..=MAX_BSPLINE_ORDER).contains(&n) {
        return Err(Error::invalid(format!(
            "B-spline order must be in 1..={MAX_BSPLINE_ORDER}, got {n}"
        )));
    }
    Ok(bspline(n, x))
}

fn bspline(n: u32, x: f64) -> f64 {
    // evaluate at |x| so evenness is exact
    let x = x.abs();
    let half = n as f64 / 2.0;
    if !(x < half) {
        return 0.0;
    }
    let mut sum = 0.0;
    let mut binom = 1.0;
    let mut factorial = 1.0;
    for j in 1..n {
        factorial *= j as f64;
    }
    for j in 0..=n {
        let t = half + x - j as f64;
        if t > 0.0 {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * binom * t.powi(n as i32 - 1);
        }
        binom = binom * (n - j) as f64 / (j + 1) as f64;
    }
    sum / factorial
}

/// `M(x) = 4·M₃(x) − 3·M₄(x)`, supported on `[-2, 2]`.
pub fn combo_kernel_eval(x: f64) -> f64 {
    4.0 * bspline(3, x) - 3.0 * bspline(4, x)
}

pub fn sinc_eval(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = PI * x;
        px.sin() / px
    }
}

/// Fejér kernel `F(x) = ½·sinc²(x/2)`.
pub fn fejer_eval(x: f64) -> f64 {
    let s = sinc_eval(0.5 * x);
    0.5 * s * s
}

/// `𝓜_w(u) = w·u^w` on `(0, 1)`, zero elsewhere on ℝ⁺.
pub fn mellin_kernel_eval(w: f64, u: f64) -> Result<f64> {
    if !(w > 0.0 && w.is_finite()) {
        return Err(Error::invalid(format!("w must be positive, got {w}")));
    }
    if !(u > 0.0) {
        return Err(Error::invalid(format!("Mellin kernel needs u > 0, got {u}")));
    }
    Ok(mellin(w, u))
}

fn mellin(w: f64, u: f64) -> f64 {
    if u > 0.0 && u < 1.0 {
        w * u.powf(w)
    } else {
        0.0
    }
}

/// Analytic bound on the tail of an unbounded-support profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailBound {
    /// `F(x) ≤ min(½, 2/(π²x²))`.
    Fejer,
    /// `|χ(x)| ≤ c/x²` for all `x ≠ 0`.
    InverseSquare { c: f64 },
}

impl TailBound {
    /// Bound on `sup_{|x| ≥ r} |χ(x)|`.
    pub fn sup_beyond(&self, r: f64) -> f64 {
        match *self {
            TailBound::Fejer => (2.0 / (PI * PI * r * r)).min(0.5),
            TailBound::InverseSquare { c } => c / (r * r),
        }
    }

    /// Bound on the one-sided mass `∫_r^∞ |χ|`.
    pub fn mass_beyond(&self, r: f64) -> f64 {
        match *self {
            TailBound::Fejer => (2.0 / (PI * PI * r)).min(0.5),
            TailBound::InverseSquare { c } => c / r,
        }
    }

    /// Estimate of the one-sided mass with a certified error radius.
    pub fn mass_estimate(&self, r: f64) -> (f64, f64) {
        match *self {
            // ∫_r^∞ (1 − cos πx)/(π²x²) dx = 1/(π²r) − (1/π²)∫_r^∞ cos(πx)/x² dx,
            // and the oscillatory part is at most 2/(π r²) in absolute value.
            TailBound::Fejer if r >= 1.0 => (1.0 / (PI * PI * r), 2.0 / (PI * PI * PI * r * r)),
            bound => {
                let m = bound.mass_beyond(r);
                (0.5 * m, 0.5 * m)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Support {
    Compact { lo: f64, hi: f64 },
    Unbounded { tail: Option<TailBound> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    BSpline(u32),
    Combo,
    Fejer,
    Sinc,
    /// `𝓜_w` on the multiplicative group.
    Mellin { w: f64 },
    Custom {
        expr: Arc<Expression>,
        support: Option<(f64, f64)>,
        tail_constant: Option<f64>,
    },
}

impl Profile {
    fn eval(&self, x: f64) -> f64 {
        match self {
            Profile::BSpline(n) => bspline(*n, x),
            Profile::Combo => combo_kernel_eval(x),
            Profile::Fejer => fejer_eval(x),
            Profile::Sinc => sinc_eval(x),
            Profile::Mellin { w } => mellin(*w, x),
            Profile::Custom { expr, support, .. } => match support {
                Some((lo, hi)) if x < *lo || x > *hi => 0.0,
                _ => expr.eval(x),
            },
        }
    }

    fn support(&self) -> Support {
        match self {
            Profile::BSpline(n) => {
                let h = *n as f64 / 2.0;
                Support::Compact { lo: -h, hi: h }
            }
            Profile::Combo => Support::Compact { lo: -2.0, hi: 2.0 },
            Profile::Fejer => Support::Unbounded {
                tail: Some(TailBound::Fejer),
            },
            Profile::Sinc => Support::Unbounded { tail: None },
            Profile::Mellin { .. } => Support::Compact { lo: 0.0, hi: 1.0 },
            Profile::Custom {
                support,
                tail_constant,
                ..
            } => match support {
                Some((lo, hi)) => Support::Compact { lo: *lo, hi: *hi },
                None => Support::Unbounded {
                    tail: tail_constant.map(|c| TailBound::InverseSquare { c }),
                },
            },
        }
    }

    fn knots(&self) -> Vec<f64> {
        match self {
            Profile::BSpline(n) => {
                let h = *n as f64 / 2.0;
                (0..=*n).map(|j| j as f64 - h).collect()
            }
            Profile::Combo => (-4..=4).map(|j| j as f64 * 0.5).collect(),
            Profile::Custom {
                support: Some((lo, hi)),
                ..
            } => vec![*lo, *hi],
            _ => Vec::new(),
        }
    }
}

/// A kernel `x ↦ amplitude · profile(dilation · x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    profile: Profile,
    amplitude: f64,
    dilation: f64,
}

impl Kernel {
    fn from_profile(profile: Profile) -> Self {
        Kernel {
            profile,
            amplitude: 1.0,
            dilation: 1.0,
        }
    }

    pub fn bspline(order: u32) -> Result<Self> {
        bspline_eval(order, 0.0)?;
        Ok(Kernel::from_profile(Profile::BSpline(order)))
    }

    pub fn combo() -> Self {
        Kernel::from_profile(Profile::Combo)
    }

    pub fn fejer() -> Self {
        Kernel::from_profile(Profile::Fejer)
    }

    /// Not integrable; kept for comparison and to exercise tail-bound checks.
    pub fn sinc() -> Self {
        Kernel::from_profile(Profile::Sinc)
    }

    pub fn mellin(w: f64) -> Result<Self> {
        mellin_kernel_eval(w, 0.5)?;
        Ok(Kernel::from_profile(Profile::Mellin { w }))
    }

    /// Expression kernel with either a compact support `[lo, hi]` or a
    /// declared bound `|χ(x)| ≤ c/x²`. With neither, integrals over it are
    /// rejected.
    pub fn custom(
        expr: Expression,
        support: Option<(f64, f64)>,
        tail_constant: Option<f64>,
    ) -> Result<Self> {
        if let Some((lo, hi)) = support {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::invalid(format!("bad kernel support [{lo}, {hi}]")));
            }
        }
        if let Some(c) = tail_constant {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::invalid(format!("tail constant must be positive, got {c}")));
            }
        }
        Ok(Kernel::from_profile(Profile::Custom {
            expr: Arc::new(expr),
            support,
            tail_constant,
        }))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Kernel {
            amplitude: self.amplitude * factor,
            ..self.clone()
        }
    }

    /// `x ↦ χ(factor · x)`. Mellin kernels are not dilated.
    pub fn dilated(&self, factor: f64) -> Self {
        match self.profile {
            Profile::Mellin { .. } => self.clone(),
            _ => Kernel {
                dilation: self.dilation * factor,
                ..self.clone()
            },
        }
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.amplitude * self.profile.eval(self.dilation * x)
    }

    pub fn space(&self) -> GroupSpace {
        match self.profile {
            Profile::Mellin { .. } => GroupSpace::PositiveRealsLog,
            _ => GroupSpace::RealLine,
        }
    }

    pub fn support(&self) -> Support {
        match self.profile.support() {
            Support::Compact { lo, hi } if !matches!(self.profile, Profile::Mellin { .. }) => {
                Support::Compact {
                    lo: lo / self.dilation,
                    hi: hi / self.dilation,
                }
            }
            other => other,
        }
    }

    /// Breakpoints of the kernel inside its support (piece boundaries).
    pub fn knots(&self) -> Vec<f64> {
        self.profile.knots().into_iter().map(|k| k / self.dilation).collect()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.amplitude >= 0.0
            && matches!(
                self.profile,
                Profile::BSpline(_) | Profile::Fejer | Profile::Mellin { .. }
            )
    }

    pub fn tail_bound(&self) -> Option<TailBound> {
        match self.profile.support() {
            Support::Unbounded { tail } => tail,
            Support::Compact { .. } => None,
        }
    }

    /// Bound on `sup_{|x| ≥ r} |χ(x)|`, `Some(0)` beyond a compact support.
    pub fn tail_sup(&self, r: f64) -> Option<f64> {
        match self.support() {
            Support::Compact { lo, hi } => {
                if r > lo.abs().max(hi.abs()) {
                    Some(0.0)
                } else {
                    None
                }
            }
            Support::Unbounded { tail } => {
                tail.map(|t| self.amplitude.abs() * t.sup_beyond(self.dilation * r))
            }
        }
    }

    /// Bound on the one-sided mass `∫_r^∞ |χ|` (and its mirror image).
    pub fn tail_mass(&self, r: f64) -> Option<f64> {
        match self.support() {
            Support::Compact { lo, hi } => {
                if r >= lo.abs().max(hi.abs()) {
                    Some(0.0)
                } else {
                    None
                }
            }
            Support::Unbounded { tail } => tail.map(|t| {
                self.amplitude.abs() / self.dilation * t.mass_beyond(self.dilation * r)
            }),
        }
    }

    /// For Mellin kernels: `∫_0^{e^{-s}} |χ(u)| du/u`.
    pub fn log_tail_mass(&self, s: f64) -> Option<f64> {
        match self.profile {
            Profile::Mellin { w } => Some(self.amplitude.abs() * (-w * s).exp()),
            _ => None,
        }
    }

    pub fn support_radius(&self) -> Option<f64> {
        match self.support() {
            Support::Compact { lo, hi } => Some(lo.abs().max(hi.abs())),
            Support::Unbounded { .. } => None,
        }
    }
}

/// `∫|χ| dμ` over the kernel's own space, to `tolerance`.
pub fn kernel_l1_norm(kernel: &Kernel, tolerance: f64) -> Result<f64> {
    if !(tolerance > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let abs = |x: f64| kernel.eval(x).abs();
    if let Profile::Mellin { w } = kernel.profile {
        // discard ∫_0^{e^{-s}} with mass ≤ tolerance/2
        let s = ((2.0 * kernel.amplitude.abs() / tolerance).ln() / w).max(1.0);
        let v = IntegrationRequest::new((-s).exp(), 1.0)
            .measure(Measure::Logarithmic)
            .tolerance(tolerance * 0.25)
            .integrate(abs)?;
        return Ok(v);
    }
    match kernel.support() {
        Support::Compact { lo, hi } => Ok(IntegrationRequest::new(lo, hi)
            .breakpoints(kernel.knots())
            .tolerance(tolerance * 0.5)
            .integrate(abs)?),
        Support::Unbounded { tail: None } => Err(Error::invalid(
            "kernel has unbounded support and no tail bound; refusing to truncate",
        )),
        Support::Unbounded { tail: Some(tail) } => {
            let d = kernel.dilation;
            let a = kernel.amplitude.abs();
            // work in profile coordinates: ∫|χ| = (a/d) ∫|profile|
            let mut r: f64 = 1.0;
            while 2.0 * a / d * tail.mass_estimate(r).1 > 0.5 * tolerance {
                r *= 2.0;
                if r > MAX_TRUNCATION_RADIUS {
                    return Err(Error::Truncation(format!(
                        "tail bound needs a radius beyond {MAX_TRUNCATION_RADIUS} for tolerance {tolerance}"
                    )));
                }
            }
            let knots = (-(r as i64)..=(r as i64)).map(|j| j as f64);
            let core = IntegrationRequest::new(-r, r)
                .breakpoints(knots)
                .tolerance(0.25 * tolerance * d / a.max(f64::MIN_POSITIVE))
                .max_panels(8 * r as usize + 1000)
                .integrate(|u| kernel.profile.eval(u).abs())?;
            Ok(a / d * (core + 2.0 * tail.mass_estimate(r).0))
        }
    }
}

pub(crate) const MAX_TRUNCATION_RADIUS: f64 = 1.0e6;

/// How a base kernel becomes the family `χ_w`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scaling {
    /// `χ_w(u) = χ(wu)`.
    DilateArgument,
    /// `χ_w(u) = w·χ(wu)`.
    DilateAndWeight,
    /// `χ_w = 𝓜_w`.
    MellinPower,
    /// `χ_w = χ`.
    Unscaled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelFamily {
    base: Kernel,
    scaling: Scaling,
    tensor_dim: usize,
}

impl KernelFamily {
    pub fn new(base: Kernel, scaling: Scaling, tensor_dim: usize) -> Result<Self> {
        let mellin_base = matches!(base.profile, Profile::Mellin { .. });
        if mellin_base != (scaling == Scaling::MellinPower) {
            return Err(Error::invalid(
                "the Mellin power scaling goes with the Mellin kernel and nothing else",
            ));
        }
        if !(1..=3).contains(&tensor_dim) {
            return Err(Error::invalid(format!(
                "tensor dimension must be 1, 2 or 3, got {tensor_dim}"
            )));
        }
        if mellin_base && tensor_dim != 1 {
            return Err(Error::invalid("Mellin kernels are one-dimensional"));
        }
        Ok(KernelFamily {
            base,
            scaling,
            tensor_dim,
        })
    }

    /// The Mellin family `𝓜_w`.
    pub fn mellin() -> Self {
        KernelFamily {
            base: Kernel::from_profile(Profile::Mellin { w: 1.0 }),
            scaling: Scaling::MellinPower,
            tensor_dim: 1,
        }
    }

    pub fn base(&self) -> &Kernel {
        &self.base
    }

    pub fn scaling(&self) -> Scaling {
        self.scaling
    }

    pub fn tensor_dim(&self) -> usize {
        self.tensor_dim
    }

    pub fn space(&self) -> GroupSpace {
        match (self.base.space(), self.tensor_dim) {
            (GroupSpace::PositiveRealsLog, _) => GroupSpace::PositiveRealsLog,
            (_, 1) => GroupSpace::RealLine,
            (_, dim) => GroupSpace::RealSpace { dim },
        }
    }

    /// The one-dimensional factor `χ_w`.
    pub fn at(&self, w: f64) -> Kernel {
        match self.scaling {
            Scaling::DilateArgument => self.base.dilated(w),
            Scaling::DilateAndWeight => self.base.dilated(w).scaled(w),
            Scaling::MellinPower => Kernel {
                profile: Profile::Mellin { w },
                amplitude: self.base.amplitude,
                dilation: 1.0,
            },
            Scaling::Unscaled => self.base.clone(),
        }
    }

    /// Tensor-product evaluation `∏ χ_w(uᵢ)`.
    pub fn eval_nd(&self, w: f64, u: &[f64]) -> f64 {
        let k = self.at(w);
        u.iter().map(|&x| k.eval(x)).product()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent route: centered recurrence
    /// `M_n(x) = ((n/2 + x) M_{n-1}(x + ½) + (n/2 − x) M_{n-1}(x − ½)) / (n − 1)`.
    fn bspline_recurrence(n: u32, x: f64) -> f64 {
        if n == 1 {
            return if (-0.5..0.5).contains(&x) { 1.0 } else { 0.0 };
        }
        let h = n as f64 / 2.0;
        ((h + x) * bspline_recurrence(n - 1, x + 0.5) + (h - x) * bspline_recurrence(n - 1, x - 0.5))
            / (n - 1) as f64
    }

    #[test]
    fn bspline_values() {
        assert!((bspline_eval(3, 0.0).unwrap() - 0.75).abs() < 1e-15);
        assert!((bspline_eval(4, 0.0).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(bspline_eval(3, 2.0).unwrap(), 0.0);
        assert_eq!(bspline_eval(3, 1.5).unwrap(), 0.0);
        assert!(bspline_eval(0, 0.0).is_err());
        assert!(bspline_eval(11, 0.0).is_err());
    }

    #[test]
    fn bspline_matches_recurrence() {
        for n in 2..=8 {
            for i in -100..=100 {
                let x = i as f64 * 0.0537;
                let a = bspline_eval(n, x).unwrap();
                let b = bspline_recurrence(n, x);
                assert!((a - b).abs() < 1e-12, "n={n} x={x}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn combo_values_and_symmetry() {
        assert!((combo_kernel_eval(0.0) - 1.0).abs() < 1e-15);
        assert_eq!(combo_kernel_eval(2.5), 0.0);
        assert_eq!(combo_kernel_eval(-2.0), 0.0);
        for i in 0..400 {
            let x = i as f64 * 0.0123;
            assert!((combo_kernel_eval(x) - combo_kernel_eval(-x)).abs() <= 1e-12);
            assert!((fejer_eval(x) - fejer_eval(-x)).abs() <= 1e-12);
        }
        assert!(combo_kernel_eval(1.5) < 0.0);
    }

    #[test]
    fn sinc_and_fejer() {
        assert_eq!(sinc_eval(0.0), 1.0);
        assert_eq!(fejer_eval(0.0), 0.5);
        for k in [-3i32, -1, 1, 2, 7] {
            assert!(sinc_eval(k as f64).abs() < 1e-15);
        }
        for i in 1..2000 {
            let x = i as f64 * 0.37;
            assert!(fejer_eval(x) <= TailBound::Fejer.sup_beyond(x) + 1e-18);
        }
    }

    #[test]
    fn mellin_values() {
        assert!((mellin_kernel_eval(5.0, 0.5).unwrap() - 0.15625).abs() < 1e-15);
        assert_eq!(mellin_kernel_eval(5.0, 1.2).unwrap(), 0.0);
        assert!(mellin_kernel_eval(5.0, 0.0).is_err());
        assert!(mellin_kernel_eval(5.0, -1.0).is_err());
    }

    #[test]
    fn l1_norms() {
        let m3 = kernel_l1_norm(&Kernel::bspline(3).unwrap(), 1e-12).unwrap();
        assert!((m3 - 1.0).abs() < 1e-9);
        let m = kernel_l1_norm(&Kernel::combo(), 1e-12).unwrap();
        assert!(m > 1.0 + 1e-3, "{m}");
        let f = kernel_l1_norm(&Kernel::fejer(), 1e-7).unwrap();
        assert!((f - 1.0).abs() < 1e-6, "{f}");
        for w in [5.0, 20.0, 30.0] {
            let v = kernel_l1_norm(&Kernel::mellin(w).unwrap(), 1e-11).unwrap();
            assert!((v - 1.0).abs() < 1e-10, "{v}");
        }
        assert!(matches!(
            kernel_l1_norm(&Kernel::sinc(), 1e-6),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn dilation_scales_the_norm() {
        let base = Kernel::combo();
        let n = kernel_l1_norm(&base, 1e-12).unwrap();
        for w in [2.0, 5.0, 10.0] {
            let nw = kernel_l1_norm(&base.dilated(w), 1e-12).unwrap();
            assert!((nw - n / w).abs() < 1e-10);
        }
    }

    #[test]
    fn family_scaling_rules() {
        let fam = KernelFamily::new(Kernel::combo(), Scaling::DilateAndWeight, 1).unwrap();
        let k = fam.at(4.0);
        assert_eq!(k.support(), Support::Compact { lo: -0.5, hi: 0.5 });
        assert!((k.eval(0.0) - 4.0).abs() < 1e-15);
        let fam = KernelFamily::new(Kernel::bspline(3).unwrap(), Scaling::DilateArgument, 2).unwrap();
        assert!((fam.eval_nd(2.0, &[0.0, 0.0]) - 0.5625).abs() < 1e-15);
        assert!(KernelFamily::new(Kernel::combo(), Scaling::MellinPower, 1).is_err());
        let mel = KernelFamily::mellin();
        assert!((mel.at(5.0).eval(0.5) - 0.15625).abs() < 1e-15);
    }
}
