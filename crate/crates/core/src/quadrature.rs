//! Adaptive Gauss–Kronrod integration for Lebesgue and logarithmic measures.
//!
//! The interval is first split at the declared breakpoints, then panels are
//! bisected globally (largest error estimate first) until the summed error
//! estimate satisfies `error <= tolerance * max(1, |result|)`.
//!
//! Integrals against the logarithmic measure `dt/t` are computed through the
//! substitution `x = ln t`, so both measures share the same core.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::RangeInclusive;

use thiserror::Error;

use crate::group_model::Cell;

pub const DEFAULT_TOLERANCE: f64 = 1e-9;
const DEFAULT_MAX_PANELS: usize = 20_000;

// 15-point Kronrod abscissae; odd indices are the 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error(
        "subdivision limit of {panels} panels reached: best estimate {estimate}, \
         achieved error {achieved:e}, requested {requested:e}"
    )]
    SubdivisionLimit {
        estimate: f64,
        achieved: f64,
        requested: f64,
        panels: usize,
    },
    #[error("integrand is not finite at x = {x}")]
    NonFinite { x: f64 },
    #[error("invalid integration request: {0}")]
    InvalidRequest(String),
}

/// Measure against which an interval is integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Lebesgue,
    /// `dt/t` on the positive half-line.
    Logarithmic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationRequest {
    a: f64,
    b: f64,
    measure: Measure,
    breakpoints: Vec<f64>,
    tolerance: f64,
    max_panels: usize,
}

impl IntegrationRequest {
    pub fn new(a: f64, b: f64) -> Self {
        IntegrationRequest {
            a,
            b,
            measure: Measure::Lebesgue,
            breakpoints: Vec::new(),
            tolerance: DEFAULT_TOLERANCE,
            max_panels: DEFAULT_MAX_PANELS,
        }
    }

    pub fn measure(mut self, measure: Measure) -> Self {
        self.measure = measure;
        self
    }

    pub fn tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn max_panels(mut self, max_panels: usize) -> Self {
        self.max_panels = max_panels;
        self
    }

    /// Declares interior discontinuities or kinks. Points outside the open
    /// interval are dropped; the rest are sorted and deduplicated.
    pub fn breakpoints<I: IntoIterator<Item = f64>>(mut self, points: I) -> Self {
        let (a, b) = (self.a, self.b);
        let mut pts: Vec<f64> = points
            .into_iter()
            .filter(|p| p.is_finite() && *p > a && *p < b)
            .collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        self.breakpoints = pts;
        self
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn declared_breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn integrate<F>(&self, mut f: F) -> Result<f64, QuadratureError>
    where
        F: FnMut(f64) -> f64,
    {
        self.try_integrate(|x| Ok::<_, QuadratureError>(f(x)))
            .map(|e| e.value)
    }

    /// Integrates a fallible integrand; integrand errors abort immediately.
    pub fn try_integrate<F, E>(&self, mut f: F) -> Result<Estimate, E>
    where
        F: FnMut(f64) -> Result<f64, E>,
        E: From<QuadratureError>,
    {
        let (a, b) = (self.a, self.b);
        if !a.is_finite() || !b.is_finite() {
            return Err(QuadratureError::InvalidRequest(format!(
                "interval [{a}, {b}] must be finite"
            ))
            .into());
        }
        if a > b {
            return Err(QuadratureError::InvalidRequest(format!(
                "reversed interval [{a}, {b}]"
            ))
            .into());
        }
        if !(self.tolerance > 0.0) {
            return Err(QuadratureError::InvalidRequest(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            ))
            .into());
        }
        if a == b {
            return Ok(Estimate {
                value: 0.0,
                error: 0.0,
                panels: 0,
            });
        }
        match self.measure {
            Measure::Lebesgue => {
                let mut cuts = Vec::with_capacity(self.breakpoints.len() + 2);
                cuts.push(a);
                cuts.extend_from_slice(&self.breakpoints);
                cuts.push(b);
                adaptive(&mut f, &cuts, self.tolerance, self.max_panels)
            }
            Measure::Logarithmic => {
                if !(a > 0.0) {
                    return Err(QuadratureError::InvalidRequest(format!(
                        "logarithmic measure needs a positive interval, got [{a}, {b}]"
                    ))
                    .into());
                }
                let mut cuts = Vec::with_capacity(self.breakpoints.len() + 2);
                cuts.push(a.ln());
                cuts.extend(self.breakpoints.iter().map(|p| p.ln()));
                cuts.push(b.ln());
                cuts.dedup();
                let mut g = |x: f64| f(x.exp());
                adaptive(&mut g, &cuts, self.tolerance, self.max_panels)
            }
        }
    }
}

/// Convenience wrapper for [`IntegrationRequest::integrate`].
pub fn integrate<F>(req: &IntegrationRequest, f: F) -> Result<f64, QuadratureError>
where
    F: FnMut(f64) -> f64,
{
    req.integrate(f)
}

/// `(1/μ(B)) ∫_B f dμ` over a one-dimensional cell, using the cell's own measure.
pub fn mean_value<F, E>(
    f: F,
    cell: &Cell,
    breakpoints: &[f64],
    tolerance: f64,
) -> Result<f64, E>
where
    F: FnMut(f64) -> Result<f64, E>,
    E: From<QuadratureError>,
{
    let (a, b) = cell.bounds().first().copied().ok_or_else(|| {
        E::from(QuadratureError::InvalidRequest("empty cell".into()))
    })?;
    if cell.bounds().len() != 1 {
        return Err(QuadratureError::InvalidRequest(
            "mean_value expects a one-dimensional cell; use integrate_box".into(),
        )
        .into());
    }
    let measure = cell.space().continuous_measure().ok_or_else(|| {
        E::from(QuadratureError::InvalidRequest(
            "lattice cells have no continuous mean".into(),
        ))
    })?;
    let req = IntegrationRequest::new(a, b)
        .measure(measure)
        .breakpoints(breakpoints.iter().copied())
        .tolerance(tolerance);
    let total = req.try_integrate(f)?.value;
    Ok(total / cell.haar_measure())
}

/// Iterated integral over a box `∏[aᵢ, bᵢ]` (N ≤ 3) with per-axis breakpoints.
pub fn integrate_box<F, E>(
    f: &F,
    bounds: &[(f64, f64)],
    breakpoints: &[Vec<f64>],
    tolerance: f64,
) -> Result<f64, E>
where
    F: Fn(&[f64]) -> Result<f64, E>,
    E: From<QuadratureError>,
{
    if bounds.is_empty() || bounds.len() > 3 {
        return Err(QuadratureError::InvalidRequest(format!(
            "box cubature supports 1 to 3 dimensions, got {}",
            bounds.len()
        ))
        .into());
    }
    let mut point = vec![0.0; bounds.len()];
    box_level(f, bounds, breakpoints, tolerance, 0, &mut point)
}

fn box_level<F, E>(
    f: &F,
    bounds: &[(f64, f64)],
    breakpoints: &[Vec<f64>],
    tolerance: f64,
    axis: usize,
    point: &mut Vec<f64>,
) -> Result<f64, E>
where
    F: Fn(&[f64]) -> Result<f64, E>,
    E: From<QuadratureError>,
{
    let (a, b) = bounds[axis];
    let req = IntegrationRequest::new(a, b)
        .breakpoints(breakpoints.get(axis).into_iter().flatten().copied())
        .tolerance(tolerance);
    let last = axis + 1 == bounds.len();
    let inner_tol = tolerance * 0.1;
    let est = req.try_integrate(|x| {
        point[axis] = x;
        if last {
            f(point)
        } else {
            let mut p = point.clone();
            box_level(f, bounds, breakpoints, inner_tol, axis + 1, &mut p)
        }
    })?;
    Ok(est.value)
}

/// Summation window for [`sum_over_lattice`].
#[derive(Debug, Clone, PartialEq)]
pub enum LatticeWindow {
    /// Every nonzero term lies in the range; the sum is exact.
    Exact(RangeInclusive<i64>),
    /// Terms outside the range are bounded in absolute sum by `tail_bound`.
    Certified {
        range: RangeInclusive<i64>,
        tail_bound: f64,
    },
}

impl LatticeWindow {
    pub fn range(&self) -> &RangeInclusive<i64> {
        match self {
            LatticeWindow::Exact(r) => r,
            LatticeWindow::Certified { range, .. } => range,
        }
    }

    pub fn tail_bound(&self) -> f64 {
        match self {
            LatticeWindow::Exact(_) => 0.0,
            LatticeWindow::Certified { tail_bound, .. } => *tail_bound,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeSum {
    pub value: f64,
    pub terms: usize,
    pub tail_bound: f64,
}

/// Sums `term(k)` over the window in increasing `k` (fixed order, so repeated
/// calls are bitwise identical).
pub fn sum_over_lattice<F, E>(mut term: F, window: &LatticeWindow) -> Result<LatticeSum, E>
where
    F: FnMut(i64) -> Result<f64, E>,
{
    let range = window.range().clone();
    let mut value = 0.0;
    let mut terms = 0usize;
    for k in range {
        value += term(k)?;
        terms += 1;
    }
    Ok(LatticeSum {
        value,
        terms,
        tail_bound: window.tail_bound(),
    })
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        // largest error first; ties broken by position for determinism
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn adaptive<F, E>(f: &mut F, cuts: &[f64], tol: f64, max_panels: usize) -> Result<Estimate, E>
where
    F: FnMut(f64) -> Result<f64, E>,
    E: From<QuadratureError>,
{
    let mut heap = BinaryHeap::with_capacity(cuts.len() * 4);
    for w in cuts.windows(2) {
        if w[1] > w[0] {
            heap.push(kronrod15(f, w[0], w[1])?);
        }
    }
    let limit = max_panels.max(heap.len() * 4);
    let (mut value, mut error) = totals(&heap);
    loop {
        let target = tol * value.abs().max(1.0);
        if error <= target {
            // running sums drift; confirm with an ordered recomputation
            let (v, e) = totals(&heap);
            if e <= tol * v.abs().max(1.0) {
                return Ok(Estimate {
                    value: v,
                    error: e,
                    panels: heap.len(),
                });
            }
            value = v;
            error = e;
            continue;
        }
        let worst = match heap.peek() {
            Some(p) => *p,
            None => {
                return Ok(Estimate {
                    value: 0.0,
                    error: 0.0,
                    panels: 0,
                })
            }
        };
        let mid = 0.5 * (worst.a + worst.b);
        if heap.len() >= limit || !(mid > worst.a && mid < worst.b) {
            let (v, e) = totals(&heap);
            return Err(QuadratureError::SubdivisionLimit {
                estimate: v,
                achieved: e,
                requested: tol * v.abs().max(1.0),
                panels: heap.len(),
            }
            .into());
        }
        heap.pop();
        let left = kronrod15(f, worst.a, mid)?;
        let right = kronrod15(f, mid, worst.b)?;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
}

fn totals(heap: &BinaryHeap<Panel>) -> (f64, f64) {
    // Sum in position order so the result does not depend on heap layout.
    let mut panels: Vec<&Panel> = heap.iter().collect();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    panels
        .iter()
        .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error))
}

fn kronrod15<F, E>(f: &mut F, a: f64, b: f64) -> Result<Panel, E>
where
    F: FnMut(f64) -> Result<f64, E>,
    E: From<QuadratureError>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut eval = |x: f64| -> Result<f64, E> {
        let v = f(x)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(QuadratureError::NonFinite { x }.into())
        }
    };
    let fc = eval(center)?;
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = eval(center - x)?;
        let f2 = eval(center + x)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = res_k * 0.5;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let abs_half = half.abs();
    let value = res_k * half;
    let res_abs = res_abs * abs_half;
    let res_asc = res_asc * abs_half;
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok(Panel { a, b, value, error })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group_model::Cell;
    use crate::kernels::combo_kernel_eval;

    #[test]
    fn polynomial_is_exact() {
        let v = IntegrationRequest::new(0.0, 1.0)
            .tolerance(1e-12)
            .integrate(|u| u * u)
            .unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn log_measure_of_unit_decade() {
        let v = IntegrationRequest::new(1.0, std::f64::consts::E)
            .measure(Measure::Logarithmic)
            .tolerance(1e-12)
            .integrate(|_| 1.0)
            .unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn combo_kernel_has_unit_mass() {
        let knots: Vec<f64> = (-4..=4).map(|j| j as f64 * 0.5).collect();
        let v = IntegrationRequest::new(-2.0, 2.0)
            .breakpoints(knots)
            .tolerance(1e-12)
            .integrate(combo_kernel_eval)
            .unwrap();
        assert!((v - 1.0).abs() < 1e-9, "{v}");
    }

    #[test]
    fn mean_values() {
        let cell = Cell::interval(2.0, 5.0).unwrap();
        let m = mean_value(|_| Ok::<_, QuadratureError>(4.5), &cell, &[], 1e-12).unwrap();
        assert!((m - 4.5).abs() < 1e-12);
        let m = mean_value(|u| Ok::<_, QuadratureError>(u), &cell, &[], 1e-12).unwrap();
        assert!((m - 3.5).abs() < 1e-12);
        let w = 10.0;
        let cell = Cell::interval(1.0 - 1.0 / w, 1.0 + 1.0 / w).unwrap();
        let m = mean_value(|u| Ok::<_, QuadratureError>(u * u), &cell, &[], 1e-13).unwrap();
        assert!((m - (1.0 + 1.0 / (3.0 * w * w))).abs() < 1e-12);
    }

    #[test]
    fn declared_step_converges_tightly() {
        let step = |x: f64| if x < 0.3 { 1.0 } else { -2.0 };
        let exact = 0.3 - 2.0 * 0.7;
        let v = IntegrationRequest::new(0.0, 1.0)
            .breakpoints([0.3])
            .tolerance(1e-12)
            .integrate(step)
            .unwrap();
        assert!((v - exact).abs() < 1e-12);
        let v = IntegrationRequest::new(0.0, 1.0)
            .tolerance(1e-8)
            .integrate(step)
            .unwrap();
        assert!((v - exact).abs() < 1e-6);
    }

    #[test]
    fn subdivision_limit_reports_best_estimate() {
        let err = IntegrationRequest::new(0.0, 1.0)
            .tolerance(1e-15)
            .max_panels(4)
            .integrate(|x| if x < 1.0 / 3.0 { 0.0 } else { 1.0 })
            .unwrap_err();
        match err {
            QuadratureError::SubdivisionLimit { estimate, .. } => {
                assert!((estimate - 2.0 / 3.0).abs() < 0.1)
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_finite_integrand_is_an_error() {
        let err = IntegrationRequest::new(-1.0, 1.0)
            .integrate(|x| if x > 0.5 { f64::NAN } else { x })
            .unwrap_err();
        assert!(matches!(err, QuadratureError::NonFinite { .. }));
    }

    #[test]
    fn lattice_sums() {
        let s = sum_over_lattice(
            |k| Ok::<_, ()>(combo_kernel_eval(0.3 - k as f64)),
            &LatticeWindow::Exact(-3..=3),
        )
        .unwrap();
        assert!((s.value - 1.0).abs() < 1e-12);
        assert_eq!(s.terms, 7);
        let z = sum_over_lattice(|_| Ok::<_, ()>(0.0), &LatticeWindow::Exact(-5..=5)).unwrap();
        assert_eq!(z.value, 0.0);
    }

    #[test]
    fn rejects_bad_requests() {
        assert!(IntegrationRequest::new(1.0, 0.0).integrate(|x| x).is_err());
        assert!(IntegrationRequest::new(0.0, 1.0)
            .measure(Measure::Logarithmic)
            .integrate(|x| x)
            .is_err());
        assert!(IntegrationRequest::new(0.0, f64::INFINITY)
            .integrate(|x| x)
            .is_err());
    }

    #[test]
    fn box_cubature_of_separable_product() {
        let f = |p: &[f64]| Ok::<_, QuadratureError>(p[0] * p[1] * p[1]);
        let v = integrate_box(&f, &[(0.0, 1.0), (0.0, 2.0)], &[], 1e-12).unwrap();
        assert!((v - 0.5 * 8.0 / 3.0).abs() < 1e-11);
    }
}
