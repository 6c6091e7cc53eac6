//! φ-functions, modulars `I_φ[λg] = ∫ φ(λ|g|) dμ`, Luxemburg norms, the Δ₂
//! audit and the error metrics shared by the convergence experiments.
//!
//! The measure is taken from the signal's domain: Lebesgue on ℝ, `dt/t` on ℝ⁺.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::funcdsl::{parse_expression, Expression};
use crate::quadrature::IntegrationRequest;
use crate::signal::{Combination, Signal};

#[derive(Debug, Clone, PartialEq)]
pub enum PhiFunction {
    /// `u^p`, `p ≥ 1`.
    Power(f64),
    /// `u^α·ln^β(e + u)`, `α ≥ 1`, `β > 0`.
    Interpolation { alpha: f64, beta: f64 },
    /// `exp(u^α) − 1`, `α > 0`.
    Exponential(f64),
    /// A user expression in `x` standing for `u`.
    Custom {
        expr: Arc<Expression>,
        text: String,
        convex: bool,
    },
}

impl fmt::Display for PhiFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhiFunction::Power(p) => write!(f, "u^{p}"),
            PhiFunction::Interpolation { alpha, beta } => write!(f, "u^{alpha}*ln^{beta}(e+u)"),
            PhiFunction::Exponential(a) => write!(f, "exp(u^{a})-1"),
            PhiFunction::Custom { text, .. } => write!(f, "{text}"),
        }
    }
}

impl Serialize for PhiFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl PhiFunction {
    pub fn power(p: f64) -> Result<Self> {
        let phi = PhiFunction::Power(p);
        phi.validate()?;
        Ok(phi)
    }

    pub fn interpolation(alpha: f64, beta: f64) -> Result<Self> {
        let phi = PhiFunction::Interpolation { alpha, beta };
        phi.validate()?;
        Ok(phi)
    }

    pub fn exponential(alpha: f64) -> Result<Self> {
        let phi = PhiFunction::Exponential(alpha);
        phi.validate()?;
        Ok(phi)
    }

    /// Parses `text` as an expression in `x`; the φ axioms are checked on a
    /// probe grid, convexity is the caller's declaration.
    pub fn custom(text: &str, convex: bool) -> Result<Self> {
        let expr = parse_expression(text)?;
        let phi = PhiFunction::Custom {
            expr: Arc::new(expr),
            text: text.to_string(),
            convex,
        };
        phi.validate()?;
        Ok(phi)
    }

    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        match self {
            PhiFunction::Power(p) => u.powf(*p),
            PhiFunction::Interpolation { alpha, beta } => {
                u.powf(*alpha) * (std::f64::consts::E + u).ln().powf(*beta)
            }
            PhiFunction::Exponential(a) => u.powf(*a).exp_m1(),
            PhiFunction::Custom { expr, .. } => expr.eval(u),
        }
    }

    pub fn is_convex(&self) -> bool {
        match self {
            PhiFunction::Power(_) | PhiFunction::Interpolation { .. } => true,
            PhiFunction::Exponential(a) => *a >= 1.0,
            PhiFunction::Custom { convex, .. } => *convex,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            PhiFunction::Power(p) => p.is_finite() && p >= 1.0,
            PhiFunction::Interpolation { alpha, beta } => {
                alpha.is_finite() && beta.is_finite() && alpha >= 1.0 && beta > 0.0
            }
            PhiFunction::Exponential(a) => a.is_finite() && a > 0.0,
            PhiFunction::Custom { .. } => true,
        };
        if !ok {
            return Err(Error::invalid(format!("parameters out of range for φ = {self}")));
        }
        self.check_axioms()
    }

    /// `φ(0) = 0`, `φ > 0` and nondecreasing on a geometric grid, and
    /// unbounded growth across it.
    pub fn check_axioms(&self) -> Result<()> {
        if self.eval(0.0) != 0.0 {
            return Err(Error::invalid(format!("φ(0) = {} ≠ 0 for φ = {self}", self.eval(0.0))));
        }
        let mut prev = 0.0;
        for j in 0..=120 {
            let u = 10f64.powf(-6.0 + j as f64 * 0.1);
            let v = self.eval(u);
            if v.is_nan() || !(v > 0.0) || v < prev {
                return Err(Error::invalid(format!(
                    "φ = {self} is not positive and nondecreasing at u = {u:e}"
                )));
            }
            prev = v;
        }
        if !(self.eval(1e6) > 1e3 * self.eval(1.0)) {
            return Err(Error::invalid(format!("φ = {self} does not grow without bound")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModularReport {
    pub phi: String,
    pub lambda: f64,
    pub value: f64,
    pub window: (f64, f64),
    pub tolerance: f64,
}

/// `I_φ[λg] = ∫_window φ(λ|g|) dμ`.
pub fn modular<S: Signal + ?Sized>(
    phi: &PhiFunction,
    g: &S,
    window: (f64, f64),
    lambda: f64,
    tolerance: f64,
) -> Result<ModularReport> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!("λ must be positive, got {lambda}")));
    }
    let est = IntegrationRequest::new(window.0, window.1)
        .measure(g.domain().measure())
        .breakpoints(g.breakpoints().iter().copied())
        .tolerance(tolerance)
        .try_integrate(|x| {
            let v = phi.eval(lambda * g.value(x)?.abs());
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Overflow { lambda })
            }
        })?;
    if !est.value.is_finite() {
        return Err(Error::Overflow { lambda });
    }
    Ok(ModularReport {
        phi: phi.to_string(),
        lambda,
        value: est.value,
        window,
        tolerance,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LuxemburgConvention {
    /// `inf{λ > 0 : I_φ(g/λ) ≤ 1}`.
    #[default]
    Standard,
    /// `inf{λ > 0 : I_φ(g/λ) ≤ λ}`.
    #[serde(alias = "paper")]
    PaperVariant,
}

const LUXEMBURG_REL_TOL: f64 = 1e-10;

/// Luxemburg norm by bracketing and bisection on `λ ↦ I_φ(g/λ)`.
pub fn luxemburg_norm<S: Signal + ?Sized>(
    phi: &PhiFunction,
    g: &S,
    window: (f64, f64),
    convention: LuxemburgConvention,
    tolerance: f64,
) -> Result<f64> {
    // I(g/λ) ≤ target(λ); overflow counts as +∞
    let admissible = |lam: f64| -> Result<bool> {
        let target = match convention {
            LuxemburgConvention::Standard => 1.0,
            LuxemburgConvention::PaperVariant => lam,
        };
        match modular(phi, g, window, 1.0 / lam, tolerance) {
            Ok(r) => Ok(r.value <= target),
            Err(Error::Overflow { .. }) => Ok(false),
            Err(e) => Err(e),
        }
    };
    match modular(phi, g, window, 1.0, tolerance) {
        Ok(r) if r.value == 0.0 => return Ok(0.0),
        Ok(_) | Err(Error::Overflow { .. }) => {}
        Err(e) => return Err(e),
    }
    let (mut lo, mut hi) = (1.0, 1.0);
    if admissible(1.0)? {
        let mut steps = 0;
        loop {
            lo *= 0.5;
            steps += 1;
            if !admissible(lo)? {
                break;
            }
            hi = lo;
            if steps > 1100 {
                return Ok(0.0);
            }
        }
    } else {
        let mut steps = 0;
        loop {
            hi *= 2.0;
            steps += 1;
            if admissible(hi)? {
                break;
            }
            lo = hi;
            if steps > 1000 {
                return Err(Error::Bracketing(format!(
                    "I_φ(g/λ) stays above its target for every λ up to {hi:e}"
                )));
            }
        }
    }
    while hi - lo > LUXEMBURG_REL_TOL * hi {
        let mid = 0.5 * (lo + hi);
        if admissible(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// `(∫ |g|^p dμ)^{1/p}` over the window.
pub fn lp_norm<S: Signal + ?Sized>(g: &S, window: (f64, f64), p: f64, tolerance: f64) -> Result<f64> {
    let phi = PhiFunction::power(p)?;
    Ok(modular(&phi, g, window, 1.0, tolerance)?.value.powf(1.0 / p))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Delta2Report {
    pub phi: String,
    pub grid: Vec<f64>,
    pub ratios: Vec<f64>,
    pub sup_ratio: f64,
    pub median_ratio: f64,
    pub ratio_at_max_u: f64,
    pub satisfied: bool,
}

/// Geometric grid from 10⁻³ to 20.
pub fn default_delta2_grid() -> Vec<f64> {
    let n = 200;
    let (a, b) = (1e-3f64.ln(), 20f64.ln());
    (0..n)
        .map(|j| (a + (b - a) * j as f64 / (n - 1) as f64).exp())
        .collect()
}

/// `sup φ(2u)/φ(u)` on the grid; "satisfied on grid" iff the ratio at the
/// largest `u` stays within 10× of the median ratio.
pub fn delta2_audit(phi: &PhiFunction, grid: Option<&[f64]>) -> Result<Delta2Report> {
    let grid = grid.map(<[f64]>::to_vec).unwrap_or_else(default_delta2_grid);
    if grid.is_empty() || grid.iter().any(|u| !(*u > 0.0 && u.is_finite())) {
        return Err(Error::invalid("Δ₂ grid must be nonempty and positive"));
    }
    let ratios: Vec<f64> = grid.iter().map(|&u| phi.eval(2.0 * u) / phi.eval(u)).collect();
    let mut sorted = ratios.clone();
    sorted.sort_by(f64::total_cmp);
    let median_ratio = sorted[sorted.len() / 2];
    let sup_ratio = sorted[sorted.len() - 1];
    let imax = grid
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let ratio_at_max_u = ratios[imax];
    let satisfied = ratios.iter().all(|r| r.is_finite()) && ratio_at_max_u <= 10.0 * median_ratio;
    Ok(Delta2Report {
        phi: phi.to_string(),
        grid,
        ratios,
        sup_ratio,
        median_ratio,
        ratio_at_max_u,
        satisfied,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModularDistance {
    pub phi: String,
    pub lambda: f64,
    /// `None` when `φ(λ|f − g|)` overflows at working precision.
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorMetrics {
    pub sup: f64,
    pub lp: Vec<(f64, f64)>,
    pub modular: Vec<ModularDistance>,
}

/// Sup error on `grid`, `L^p` errors and modular distances `I_φ[λ(f − g)]`
/// over `window`.
pub fn error_metrics<A: Signal, B: Signal>(
    f: A,
    g: B,
    grid: &[f64],
    window: (f64, f64),
    p_list: &[f64],
    phis: &[(PhiFunction, Vec<f64>)],
    tolerance: f64,
) -> Result<ErrorMetrics> {
    let diff = Combination::new(1.0, f, -1.0, g)?;
    let mut sup: f64 = 0.0;
    for &x in grid {
        sup = sup.max(diff.value(x)?.abs());
    }
    let lp = p_list
        .iter()
        .map(|&p| Ok((p, lp_norm(&diff, window, p, tolerance)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut modular_rows = Vec::new();
    for (phi, lambdas) in phis {
        for &lambda in lambdas {
            let value = match modular(phi, &diff, window, lambda, tolerance) {
                Ok(r) => Some(r.value),
                Err(Error::Overflow { .. }) => None,
                Err(e) => return Err(e),
            };
            modular_rows.push(ModularDistance {
                phi: phi.to_string(),
                lambda,
                value,
            });
        }
    }
    Ok(ErrorMetrics {
        sup,
        lp,
        modular: modular_rows,
    })
}
