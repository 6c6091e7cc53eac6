//! Functions the operators act on: one-dimensional signals on ℝ or ℝ⁺ and
//! tensor-style signals on ℝᴺ.

use std::collections::HashMap;
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::funcdsl::{Domain, PiecewiseFunction};
use crate::group_model::Cell;
use crate::quadrature::{integrate_box, IntegrationRequest};

/// A real function on ℝ (Lebesgue) or ℝ⁺ (`dt/t`) with known kinks.
pub trait Signal: Sync {
    fn domain(&self) -> Domain;

    fn value(&self, x: f64) -> Result<f64>;

    /// Sorted interior discontinuities or kinks.
    fn breakpoints(&self) -> &[f64];

    /// `∫_a^b f dμ` with the domain's measure.
    fn integral(&self, a: f64, b: f64, tolerance: f64) -> Result<f64> {
        let est = IntegrationRequest::new(a, b)
            .measure(self.domain().measure())
            .breakpoints(self.breakpoints().iter().copied())
            .tolerance(tolerance)
            .try_integrate(|x| self.value(x))?;
        Ok(est.value)
    }

    /// Mean over a one-dimensional cell with the cell's Haar measure.
    fn mean(&self, cell: &Cell, tolerance: f64) -> Result<f64> {
        let (a, b) = cell.bounds()[0];
        Ok(self.integral(a, b, tolerance)? / cell.haar_measure())
    }
}

impl Signal for PiecewiseFunction {
    fn domain(&self) -> Domain {
        PiecewiseFunction::domain(self)
    }

    fn value(&self, x: f64) -> Result<f64> {
        self.eval(x)
    }

    fn breakpoints(&self) -> &[f64] {
        PiecewiseFunction::breakpoints(self)
    }

    fn integral(&self, a: f64, b: f64, tolerance: f64) -> Result<f64> {
        PiecewiseFunction::integral(self, a, b, self.domain().measure(), tolerance)
    }
}

impl<S: Signal + ?Sized> Signal for &S {
    fn domain(&self) -> Domain {
        (**self).domain()
    }
    fn value(&self, x: f64) -> Result<f64> {
        (**self).value(x)
    }
    fn breakpoints(&self) -> &[f64] {
        (**self).breakpoints()
    }
    fn integral(&self, a: f64, b: f64, tolerance: f64) -> Result<f64> {
        (**self).integral(a, b, tolerance)
    }
}

/// A closure with a declared domain and breakpoints.
#[derive(Clone)]
pub struct FnSignal<F> {
    f: F,
    domain: Domain,
    breakpoints: Vec<f64>,
}

impl<F: Fn(f64) -> f64 + Sync> FnSignal<F> {
    pub fn new(domain: Domain, breakpoints: Vec<f64>, f: F) -> Self {
        let mut breakpoints = breakpoints;
        breakpoints.sort_by(f64::total_cmp);
        breakpoints.dedup();
        FnSignal {
            f,
            domain,
            breakpoints,
        }
    }
}

impl<F: Fn(f64) -> f64 + Sync> Signal for FnSignal<F> {
    fn domain(&self) -> Domain {
        self.domain
    }

    fn value(&self, x: f64) -> Result<f64> {
        if !self.domain.contains(x) {
            return Err(Error::invalid(format!(
                "x = {x} is outside the {:?} domain",
                self.domain
            )));
        }
        let v = (self.f)(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite { x, value: v })
        }
    }

    fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }
}

/// The constant function on a domain.
pub fn constant(domain: Domain, c: f64) -> FnSignal<impl Fn(f64) -> f64 + Sync + Clone> {
    FnSignal::new(domain, Vec::new(), move |_| c)
}

/// A function on ℝᴺ (N ≤ 3) with per-axis breakpoints.
pub trait SignalNd: Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> Result<f64>;

    fn breakpoints(&self, axis: usize) -> Vec<f64>;

    fn box_integral(&self, bounds: &[(f64, f64)], tolerance: f64) -> Result<f64> {
        let bps: Vec<Vec<f64>> = (0..bounds.len()).map(|i| self.breakpoints(i)).collect();
        integrate_box(&|x: &[f64]| self.value(x), bounds, &bps, tolerance)
    }
}

/// `f(x₁,…,x_N) = ∏ gᵢ(xᵢ)` for real-line factors; box integrals factorize.
#[derive(Clone)]
pub struct TensorSignal {
    factors: Vec<PiecewiseFunction>,
}

impl TensorSignal {
    pub fn new(factors: Vec<PiecewiseFunction>) -> Result<Self> {
        if !(1..=3).contains(&factors.len()) {
            return Err(Error::invalid("tensor signals have 1 to 3 factors"));
        }
        if factors.iter().any(|f| f.domain() != Domain::Real) {
            return Err(Error::invalid("tensor signal factors must live on the real line"));
        }
        Ok(TensorSignal { factors })
    }

    pub fn factors(&self) -> &[PiecewiseFunction] {
        &self.factors
    }
}

impl SignalNd for TensorSignal {
    fn dim(&self) -> usize {
        self.factors.len()
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        let mut v = 1.0;
        for (f, &xi) in self.factors.iter().zip(x) {
            v *= f.eval(xi)?;
        }
        Ok(v)
    }

    fn breakpoints(&self, axis: usize) -> Vec<f64> {
        self.factors[axis].breakpoints().to_vec()
    }

    fn box_integral(&self, bounds: &[(f64, f64)], tolerance: f64) -> Result<f64> {
        let mut v = 1.0;
        for (f, &(a, b)) in self.factors.iter().zip(bounds) {
            v *= Signal::integral(f, a, b, tolerance)?;
        }
        Ok(v)
    }
}

/// A closure on ℝᴺ.
pub struct FnSignalNd<F> {
    dim: usize,
    f: F,
    breakpoints: Vec<Vec<f64>>,
}

impl<F: Fn(&[f64]) -> f64 + Sync> FnSignalNd<F> {
    pub fn new(dim: usize, breakpoints: Vec<Vec<f64>>, f: F) -> Self {
        FnSignalNd { dim, f, breakpoints }
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> SignalNd for FnSignalNd<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        let v = (self.f)(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite { x: x[0], value: v })
        }
    }

    fn breakpoints(&self, axis: usize) -> Vec<f64> {
        self.breakpoints.get(axis).cloned().unwrap_or_default()
    }
}

/// Wraps a pointwise evaluator and remembers every value it produced, keyed
/// by the exact bit pattern of the argument. Used to integrate `S_w f` for
/// several metrics without re-evaluating the operator.
pub struct Memoized<F> {
    eval: F,
    domain: Domain,
    breakpoints: Vec<f64>,
    cache: Mutex<HashMap<u64, f64>>,
}

impl<F: Fn(f64) -> Result<f64> + Sync> Memoized<F> {
    pub fn new(domain: Domain, breakpoints: Vec<f64>, eval: F) -> Self {
        Memoized {
            eval,
            domain,
            breakpoints,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn evaluations(&self) -> usize {
        self.cache.lock().map(|c| c.len()).unwrap_or(0)
    }
}

impl<F: Fn(f64) -> Result<f64> + Sync> Signal for Memoized<F> {
    fn domain(&self) -> Domain {
        self.domain
    }

    fn value(&self, x: f64) -> Result<f64> {
        let key = x.to_bits();
        if let Some(v) = self.cache.lock().ok().and_then(|c| c.get(&key).copied()) {
            return Ok(v);
        }
        let v = (self.eval)(x)?;
        if let Ok(mut c) = self.cache.lock() {
            c.insert(key, v);
        }
        Ok(v)
    }

    fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }
}

/// `a·f + b·g` on a common domain.
pub struct Combination<A, B> {
    a: f64,
    f: A,
    b: f64,
    g: B,
    breakpoints: Vec<f64>,
}

impl<A: Signal, B: Signal> Combination<A, B> {
    pub fn new(a: f64, f: A, b: f64, g: B) -> Result<Self> {
        if f.domain() != g.domain() {
            return Err(Error::invalid("cannot combine signals on different domains"));
        }
        let mut breakpoints: Vec<f64> = f.breakpoints().iter().chain(g.breakpoints()).copied().collect();
        breakpoints.sort_by(f64::total_cmp);
        breakpoints.dedup();
        Ok(Combination {
            a,
            f,
            b,
            g,
            breakpoints,
        })
    }
}

impl<A: Signal, B: Signal> Signal for Combination<A, B> {
    fn domain(&self) -> Domain {
        self.f.domain()
    }

    fn value(&self, x: f64) -> Result<f64> {
        Ok(self.a * self.f.value(x)? + self.b * self.g.value(x)?)
    }

    fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcdsl::presets;

    #[test]
    fn piecewise_mean_over_cells() {
        let f = presets::f1();
        let c = Cell::interval(0.25, 0.75).unwrap();
        assert_eq!(f.mean(&c, 1e-12).unwrap(), 2.0);
        let c = Cell::interval(-0.5, 0.5).unwrap();
        assert!((f.mean(&c, 1e-12).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn log_mean_of_constant() {
        let one = constant(Domain::Positive, 1.0);
        let c = Cell::log_interval(2.0 * 5.0 / 6.0, 2.0 * 6.0 / 5.0).unwrap();
        assert!((one.mean(&c, 1e-12).unwrap() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn memoized_reuses_values() {
        let m = Memoized::new(Domain::Real, vec![], |x: f64| Ok(x * x));
        let a = m.integral(0.0, 1.0, 1e-12).unwrap();
        let n = m.evaluations();
        let b = m.integral(0.0, 1.0, 1e-12).unwrap();
        assert_eq!(a, b);
        assert_eq!(m.evaluations(), n);
        assert!((a - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn tensor_box_integral_factorizes() {
        let t = TensorSignal::new(vec![presets::hat(), presets::hat()]).unwrap();
        let v = t.box_integral(&[(-1.0, 1.0), (-1.0, 0.0)], 1e-12).unwrap();
        assert!((v - 0.5).abs() < 1e-14);
        let generic = FnSignalNd::new(2, vec![vec![-1.0, 0.0, 1.0]; 2], |x: &[f64]| {
            (1.0 - x[0].abs()).max(0.0) * (1.0 - x[1].abs()).max(0.0)
        });
        let g = generic.box_integral(&[(-1.0, 1.0), (-1.0, 0.0)], 1e-10).unwrap();
        assert!((g - 0.5).abs() < 1e-9);
    }
}
