//! Concrete group/measure settings and the cell families `B_w(t)` that every
//! operator variant is built on.
//!
//! Five settings are supported: `(ℤ, +)` and `(ℤᴺ, +)` with counting measure,
//! `(ℝ, +)` and `(ℝᴺ, +)` with Lebesgue measure, and `(ℝ⁺, ·)` with the
//! logarithmic measure `dt/t`. Neighborhoods of the neutral element are the
//! symmetric intervals `[-ε, ε]` (boxes in ℝᴺ) or `[1/(1+ε), 1+ε]` on ℝ⁺.

use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::Measure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GroupSpace {
    IntegerLattice { dim: usize },
    RealLine,
    RealSpace { dim: usize },
    PositiveRealsLog,
}

/// The Haar measure attached to a [`GroupSpace`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Haar {
    Counting,
    Lebesgue,
    Logarithmic,
}

impl GroupSpace {
    pub fn dim(&self) -> usize {
        match *self {
            GroupSpace::IntegerLattice { dim } | GroupSpace::RealSpace { dim } => dim,
            GroupSpace::RealLine | GroupSpace::PositiveRealsLog => 1,
        }
    }

    pub fn haar(&self) -> Haar {
        match self {
            GroupSpace::IntegerLattice { .. } => Haar::Counting,
            GroupSpace::RealLine | GroupSpace::RealSpace { .. } => Haar::Lebesgue,
            GroupSpace::PositiveRealsLog => Haar::Logarithmic,
        }
    }

    /// Measure used for integration, `None` for the lattices.
    pub fn continuous_measure(&self) -> Option<Measure> {
        match self.haar() {
            Haar::Counting => None,
            Haar::Lebesgue => Some(Measure::Lebesgue),
            Haar::Logarithmic => Some(Measure::Logarithmic),
        }
    }

    pub fn neutral(&self) -> Vec<f64> {
        match self {
            GroupSpace::PositiveRealsLog => vec![1.0],
            other => vec![0.0; other.dim()],
        }
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim()
            && p.iter().all(|x| x.is_finite())
            && match self {
                GroupSpace::IntegerLattice { .. } => p.iter().all(|x| x.fract() == 0.0),
                GroupSpace::PositiveRealsLog => p[0] > 0.0,
                _ => true,
            }
    }

    pub fn operate(&self, a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
        self.check(a)?;
        self.check(b)?;
        Ok(match self {
            GroupSpace::PositiveRealsLog => vec![a[0] * b[0]],
            _ => a.iter().zip(b).map(|(x, y)| x + y).collect(),
        })
    }

    pub fn inverse(&self, a: &[f64]) -> Result<Vec<f64>> {
        self.check(a)?;
        Ok(match self {
            GroupSpace::PositiveRealsLog => vec![1.0 / a[0]],
            _ => a.iter().map(|x| -x).collect(),
        })
    }

    /// Distance of `p` from the neutral element in the ε-radius sense used by
    /// the neighborhood base: sup-norm on the additive groups, `exp|ln p| - 1`
    /// on ℝ⁺.
    pub fn radius_of(&self, p: &[f64]) -> f64 {
        match self {
            GroupSpace::PositiveRealsLog => p[0].ln().abs().exp_m1(),
            _ => p.iter().fold(0.0, |m, x| m.max(x.abs())),
        }
    }

    fn check(&self, p: &[f64]) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::invalid(format!("{p:?} is not a point of {self:?}")))
        }
    }
}

/// An interval, log-interval or box with strictly positive, finite Haar measure.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    space: GroupSpace,
    bounds: Vec<(f64, f64)>,
}

impl Cell {
    pub fn new(space: GroupSpace, bounds: Vec<(f64, f64)>) -> Result<Self> {
        if bounds.len() != space.dim() {
            return Err(Error::invalid(format!(
                "{} bounds given for a {}-dimensional space",
                bounds.len(),
                space.dim()
            )));
        }
        for &(a, b) in &bounds {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(Error::invalid(format!("degenerate cell [{a}, {b}]")));
            }
        }
        if space == GroupSpace::PositiveRealsLog && !(bounds[0].0 > 0.0) {
            return Err(Error::invalid(format!(
                "log-interval must start above 0, got {}",
                bounds[0].0
            )));
        }
        let cell = Cell { space, bounds };
        if !(cell.haar_measure() > 0.0) {
            return Err(Error::invalid("cell contains no lattice points"));
        }
        Ok(cell)
    }

    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Cell::new(GroupSpace::RealLine, vec![(a, b)])
    }

    pub fn log_interval(a: f64, b: f64) -> Result<Self> {
        Cell::new(GroupSpace::PositiveRealsLog, vec![(a, b)])
    }

    pub fn boxed(bounds: Vec<(f64, f64)>) -> Result<Self> {
        let space = if bounds.len() == 1 {
            GroupSpace::RealLine
        } else {
            GroupSpace::RealSpace { dim: bounds.len() }
        };
        Cell::new(space, bounds)
    }

    pub fn space(&self) -> GroupSpace {
        self.space
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.bounds.len()
            && p.iter()
                .zip(&self.bounds)
                .all(|(x, (a, b))| *a <= *x && *x <= *b)
    }

    pub fn haar_measure(&self) -> f64 {
        match self.space.haar() {
            Haar::Lebesgue => self.bounds.iter().map(|(a, b)| b - a).product(),
            Haar::Logarithmic => {
                let (a, b) = self.bounds[0];
                (b / a).ln()
            }
            Haar::Counting => self
                .bounds
                .iter()
                .map(|(a, b)| (b.floor() - a.ceil() + 1.0).max(0.0))
                .product(),
        }
    }
}

pub fn haar_measure(cell: &Cell) -> f64 {
    cell.haar_measure()
}

/// Sample sequence `(t_k)` with `δ <= t_{k+1} - t_k <= Δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SampleSequence {
    /// `t_k = k`.
    #[default]
    Uniform,
    /// `t_k = k + amplitude·sin(k)`.
    Perturbed { amplitude: f64 },
}

impl SampleSequence {
    pub const PERTURBED_AMPLITUDE: f64 = 0.3;

    pub fn perturbed() -> Self {
        SampleSequence::Perturbed {
            amplitude: Self::PERTURBED_AMPLITUDE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let SampleSequence::Perturbed { amplitude } = *self {
            if !(amplitude.is_finite() && amplitude >= 0.0 && 1.0 - 2.0 * amplitude * 0.5f64.sin() > 0.0)
            {
                return Err(Error::invalid(format!(
                    "perturbation amplitude {amplitude} breaks monotonicity of t_k"
                )));
            }
        }
        Ok(())
    }

    pub fn t(&self, k: i64) -> f64 {
        let kf = k as f64;
        match *self {
            SampleSequence::Uniform => kf,
            SampleSequence::Perturbed { amplitude } => kf + amplitude * kf.sin(),
        }
    }

    /// Certified lower bound δ of the spacing.
    pub fn min_spacing(&self) -> f64 {
        // sin(k+1) - sin(k) = 2 cos(k + 1/2) sin(1/2)
        match *self {
            SampleSequence::Uniform => 1.0,
            SampleSequence::Perturbed { amplitude } => 1.0 - 2.0 * amplitude * 0.5f64.sin(),
        }
    }

    /// Certified upper bound Δ of the spacing.
    pub fn max_spacing(&self) -> f64 {
        match *self {
            SampleSequence::Uniform => 1.0,
            SampleSequence::Perturbed { amplitude } => 1.0 + 2.0 * amplitude * 0.5f64.sin(),
        }
    }

    pub fn spacing(&self, k: i64) -> f64 {
        self.t(k + 1) - self.t(k)
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self, SampleSequence::Uniform)
            || matches!(self, SampleSequence::Perturbed { amplitude } if *amplitude == 0.0)
    }

    fn max_offset(&self) -> f64 {
        match *self {
            SampleSequence::Uniform => 0.0,
            SampleSequence::Perturbed { amplitude } => amplitude,
        }
    }

    /// Exactly the indices `k` with `t_k ∈ [lo, hi]` (an empty range when none).
    #[allow(clippy::reversed_empty_ranges)]
    pub fn indices_in(&self, lo: f64, hi: f64) -> RangeInclusive<i64> {
        if !(lo <= hi) {
            return 1..=0;
        }
        let off = self.max_offset();
        let mut k_lo = (lo - off).ceil() as i64;
        let mut k_hi = (hi + off).floor() as i64;
        while k_lo <= k_hi && self.t(k_lo) < lo {
            k_lo += 1;
        }
        while k_hi >= k_lo && self.t(k_hi) > hi {
            k_hi -= 1;
        }
        k_lo..=k_hi
    }
}

/// A point of the index group `H`.
#[derive(Debug, Clone, PartialEq)]
pub enum Anchor {
    Index(i64),
    Point(f64),
    Multi(Vec<i64>),
}

/// Rule `(w, t) ↦ B_w(t)` together with the anchor map `h_w`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CellFamily {
    /// `h_w(k) = t_k/w`, `B_w(k) = [t_k/w, t_{k+1}/w]`.
    SamplingForward(SampleSequence),
    /// `h_w(k) = s_k/w`, `B_w(k) = [h_w(k) - 1/w, h_w(k) + 1/w]`.
    SamplingSymmetric(SampleSequence),
    /// `h_w(t) = t/w`, `B_w(t) = [(t-1)/w, (t+1)/w]`.
    ConvolutionScaled,
    /// `h_w(t) = t`, `B_w(t) = [t - 1/w, t + 1/w]`.
    ConvolutionUnit,
    /// `h_w(t) = t`, `B_w(t) = [t·w/(w+1), t·(w+1)/w]` on ℝ⁺.
    Mellin,
    /// `h_w(𝐤) = 𝐭_𝐤/w`, `B_w(𝐤) = ∏[t_{kᵢ}/w, t_{kᵢ+1}/w]`.
    MultiSampling { sequence: SampleSequence, dim: usize },
}

/// Symmetric compact set `K` around the neutral element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CompactSet {
    /// `[-γ, γ]`.
    Symmetric { gamma: f64 },
    /// `[1/γ, γ]`, γ > 1.
    LogSymmetric { gamma: f64 },
    /// `[-γ, γ]ᴺ`.
    Cube { gamma: f64, dim: usize },
}

impl CellFamily {
    pub fn anchor_space(&self) -> GroupSpace {
        match *self {
            CellFamily::SamplingForward(_) | CellFamily::SamplingSymmetric(_) => {
                GroupSpace::IntegerLattice { dim: 1 }
            }
            CellFamily::ConvolutionScaled | CellFamily::ConvolutionUnit => GroupSpace::RealLine,
            CellFamily::Mellin => GroupSpace::PositiveRealsLog,
            CellFamily::MultiSampling { dim, .. } => GroupSpace::IntegerLattice { dim },
        }
    }

    pub fn target_space(&self) -> GroupSpace {
        match *self {
            CellFamily::Mellin => GroupSpace::PositiveRealsLog,
            CellFamily::MultiSampling { dim, .. } => GroupSpace::RealSpace { dim },
            _ => GroupSpace::RealLine,
        }
    }

    /// `h_w(t)`.
    pub fn anchor_image(&self, w: f64, anchor: &Anchor) -> Result<Vec<f64>> {
        check_w(w)?;
        match (*self, anchor) {
            (CellFamily::SamplingForward(seq), Anchor::Index(k))
            | (CellFamily::SamplingSymmetric(seq), Anchor::Index(k)) => Ok(vec![seq.t(*k) / w]),
            (CellFamily::ConvolutionScaled, Anchor::Point(t)) if t.is_finite() => Ok(vec![t / w]),
            (CellFamily::ConvolutionUnit, Anchor::Point(t)) if t.is_finite() => Ok(vec![*t]),
            (CellFamily::Mellin, Anchor::Point(t)) if t.is_finite() && *t > 0.0 => Ok(vec![*t]),
            (CellFamily::MultiSampling { sequence, dim }, Anchor::Multi(ks)) if ks.len() == dim => {
                Ok(ks.iter().map(|&k| sequence.t(k) / w).collect())
            }
            (family, anchor) => Err(Error::invalid(format!(
                "anchor {anchor:?} is not in the index group of {family:?}"
            ))),
        }
    }

    pub fn cell_of(&self, w: f64, anchor: &Anchor) -> Result<Cell> {
        let h = self.anchor_image(w, anchor)?;
        match (*self, anchor) {
            (CellFamily::SamplingForward(seq), Anchor::Index(k)) => {
                Cell::interval(h[0], seq.t(k + 1) / w)
            }
            (CellFamily::SamplingSymmetric(_), _) | (CellFamily::ConvolutionUnit, _) => {
                Cell::interval(h[0] - 1.0 / w, h[0] + 1.0 / w)
            }
            (CellFamily::ConvolutionScaled, Anchor::Point(t)) => {
                Cell::interval((t - 1.0) / w, (t + 1.0) / w)
            }
            (CellFamily::Mellin, _) => Cell::log_interval(h[0] * w / (w + 1.0), h[0] * (w + 1.0) / w),
            (CellFamily::MultiSampling { sequence, .. }, Anchor::Multi(ks)) => Cell::boxed(
                ks.iter()
                    .map(|&k| (sequence.t(k) / w, sequence.t(k + 1) / w))
                    .collect(),
            ),
            _ => unreachable!("anchor validated by anchor_image"),
        }
    }

    /// Smallest ε with `h_w(t) - B_w(t)` (ratio on ℝ⁺) inside the ε-neighborhood
    /// of the neutral element.
    pub fn neighborhood_radius(&self, w: f64, anchor: &Anchor) -> Result<f64> {
        let h = self.anchor_image(w, anchor)?;
        let cell = self.cell_of(w, anchor)?;
        let space = self.target_space();
        let mut radius: f64 = 0.0;
        for (i, &(a, b)) in cell.bounds().iter().enumerate() {
            for end in [a, b] {
                let r = match space {
                    GroupSpace::PositiveRealsLog => space.radius_of(&[h[i] / end]),
                    _ => (h[i] - end).abs(),
                };
                radius = radius.max(r);
            }
        }
        Ok(radius)
    }
}

pub fn cell_of(family: &CellFamily, w: f64, anchor: &Anchor) -> Result<Cell> {
    family.cell_of(w, anchor)
}

/// `Υ_w(K) = μ_H{t : h_w(t) ∈ K}` in closed form.
pub fn upsilon(family: &CellFamily, w: f64, set: &CompactSet) -> Result<f64> {
    check_w(w)?;
    let count = |seq: &SampleSequence, gamma: f64| {
        let r = seq.indices_in(-gamma * w, gamma * w);
        (r.end() - r.start() + 1).max(0) as f64
    };
    match (*family, *set) {
        (_, CompactSet::Symmetric { gamma } | CompactSet::Cube { gamma, .. })
        | (_, CompactSet::LogSymmetric { gamma })
            if !(gamma > 0.0 && gamma.is_finite()) =>
        {
            Err(Error::invalid(format!("gamma must be positive and finite, got {gamma}")))
        }
        (CellFamily::ConvolutionScaled, CompactSet::Symmetric { gamma }) => Ok(2.0 * gamma * w),
        (CellFamily::ConvolutionUnit, CompactSet::Symmetric { gamma }) => Ok(2.0 * gamma),
        (CellFamily::Mellin, CompactSet::LogSymmetric { gamma }) if gamma > 1.0 => {
            Ok(2.0 * gamma.ln())
        }
        (CellFamily::SamplingForward(seq), CompactSet::Symmetric { gamma })
        | (CellFamily::SamplingSymmetric(seq), CompactSet::Symmetric { gamma }) => {
            Ok(count(&seq, gamma))
        }
        (CellFamily::MultiSampling { sequence, dim }, CompactSet::Cube { gamma, dim: d })
            if d == dim =>
        {
            Ok(count(&sequence, gamma).powi(dim as i32))
        }
        (family, set) => Err(Error::invalid(format!(
            "compact set {set:?} is not supported for {family:?}"
        ))),
    }
}

/// Result of the shrinking-cell audit over a w-grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShrinkAudit {
    pub w_grid: Vec<f64>,
    /// Max over anchors of the neighborhood radius, one entry per w.
    pub radii: Vec<f64>,
    pub nonincreasing: bool,
    /// First w at which the radius is below the requested ε.
    pub below_epsilon_from: Option<f64>,
}

pub fn audit_shrinking_cells(
    family: &CellFamily,
    w_grid: &[f64],
    anchors: &[Anchor],
    epsilon: f64,
) -> Result<ShrinkAudit> {
    if anchors.is_empty() || w_grid.is_empty() {
        return Err(Error::invalid("need at least one anchor and one w"));
    }
    let mut radii = Vec::with_capacity(w_grid.len());
    for &w in w_grid {
        let mut r: f64 = 0.0;
        for a in anchors {
            r = r.max(family.neighborhood_radius(w, a)?);
        }
        radii.push(r);
    }
    let nonincreasing = radii.windows(2).all(|p| p[1] <= p[0]);
    let below_epsilon_from = w_grid
        .iter()
        .zip(&radii)
        .find(|(_, r)| **r < epsilon)
        .map(|(w, _)| *w);
    Ok(ShrinkAudit {
        w_grid: w_grid.to_vec(),
        radii,
        nonincreasing,
        below_epsilon_from,
    })
}

pub(crate) fn check_w(w: f64) -> Result<()> {
    if w > 0.0 && w.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("w must be positive and finite, got {w}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn measures_of_basic_cells() {
        assert_eq!(Cell::interval(0.0, 3.0).unwrap().haar_measure(), 3.0);
        assert_eq!(
            Cell::boxed(vec![(0.0, 1.0), (0.0, 2.0)]).unwrap().haar_measure(),
            2.0
        );
        let w = 5.0;
        for t in [0.1, 1.0, 7.5] {
            let c = CellFamily::Mellin.cell_of(w, &Anchor::Point(t)).unwrap();
            assert!((c.haar_measure() - 2.0 * (6.0f64 / 5.0).ln()).abs() < 1e-14);
            assert!((c.haar_measure() - 0.364_643).abs() < 1e-6);
        }
        let lattice = Cell::new(GroupSpace::IntegerLattice { dim: 1 }, vec![(-0.5, 3.2)]).unwrap();
        assert_eq!(lattice.haar_measure(), 4.0);
    }

    #[test]
    fn degenerate_cells_rejected() {
        assert!(Cell::interval(1.0, 1.0).is_err());
        assert!(Cell::interval(2.0, 1.0).is_err());
        assert!(Cell::log_interval(0.0, 1.0).is_err());
        assert!(Cell::new(GroupSpace::IntegerLattice { dim: 1 }, vec![(0.2, 0.8)]).is_err());
    }

    #[test]
    fn family_examples() {
        let c = CellFamily::SamplingForward(SampleSequence::Uniform)
            .cell_of(10.0, &Anchor::Index(3))
            .unwrap();
        let (a, b) = c.bounds()[0];
        assert!((a - 0.3).abs() < 1e-15 && (b - 0.4).abs() < 1e-15);

        let c = CellFamily::Mellin.cell_of(5.0, &Anchor::Point(2.0)).unwrap();
        let (a, b) = c.bounds()[0];
        assert!((a - 5.0 / 3.0).abs() < 1e-15 && (b - 12.0 / 5.0).abs() < 1e-15);

        let c = CellFamily::ConvolutionUnit
            .cell_of(4.0, &Anchor::Point(0.0))
            .unwrap();
        assert_eq!(c.bounds()[0], (-0.25, 0.25));
    }

    #[test]
    fn upsilon_closed_forms() {
        let k = CompactSet::Symmetric { gamma: 3.0 };
        assert_eq!(upsilon(&CellFamily::ConvolutionScaled, 10.0, &k).unwrap(), 60.0);
        assert_eq!(upsilon(&CellFamily::ConvolutionUnit, 10.0, &k).unwrap(), 6.0);
        assert_eq!(upsilon(&CellFamily::ConvolutionUnit, 0.5, &k).unwrap(), 6.0);
        let e2 = std::f64::consts::E.powi(2);
        let m = upsilon(&CellFamily::Mellin, 7.0, &CompactSet::LogSymmetric { gamma: e2 }).unwrap();
        assert!((m - 4.0).abs() < 1e-14);
        // t_k = k with w = 2, γ = 1.5: k ∈ [-3, 3]
        let s = upsilon(
            &CellFamily::SamplingForward(SampleSequence::Uniform),
            2.0,
            &CompactSet::Symmetric { gamma: 1.5 },
        )
        .unwrap();
        assert_eq!(s, 7.0);
        assert!(upsilon(&CellFamily::Mellin, 2.0, &k).is_err());
    }

    #[test]
    fn perturbed_spacing_is_within_bounds() {
        let seq = SampleSequence::perturbed();
        assert!(seq.min_spacing() >= 0.4 && seq.max_spacing() <= 1.6);
        for k in -500..500 {
            let d = seq.spacing(k);
            assert!(d >= seq.min_spacing() - 1e-12 && d <= seq.max_spacing() + 1e-12);
        }
        assert!(SampleSequence::Perturbed { amplitude: 2.0 }.validate().is_err());
    }

    #[test]
    fn index_windows_are_exact() {
        for seq in [SampleSequence::Uniform, SampleSequence::perturbed()] {
            let (lo, hi) = (-3.7, 5.2);
            let r = seq.indices_in(lo, hi);
            for k in -20..20 {
                let inside = seq.t(k) >= lo && seq.t(k) <= hi;
                assert_eq!(r.contains(&k), inside, "k = {k}");
            }
        }
        assert!(SampleSequence::Uniform.indices_in(0.2, 0.8).is_empty());
    }

    #[test]
    fn group_operations() {
        let g = GroupSpace::PositiveRealsLog;
        assert_eq!(g.operate(&[2.0], &[3.0]).unwrap(), vec![6.0]);
        assert_eq!(g.inverse(&[4.0]).unwrap(), vec![0.25]);
        assert_eq!(g.neutral(), vec![1.0]);
        assert!(g.operate(&[-1.0], &[1.0]).is_err());
        let z = GroupSpace::IntegerLattice { dim: 2 };
        assert_eq!(z.operate(&[1.0, 2.0], &[3.0, -4.0]).unwrap(), vec![4.0, -2.0]);
        assert!(z.operate(&[0.5, 0.0], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn shrinking_cells_for_mellin() {
        let grid: Vec<f64> = (0..9).map(|j| 2f64.powi(j)).collect();
        let anchors: Vec<Anchor> = [0.5, 1.0, 3.0].iter().map(|&t| Anchor::Point(t)).collect();
        let audit = audit_shrinking_cells(&CellFamily::Mellin, &grid, &anchors, 0.01).unwrap();
        assert!(audit.nonincreasing);
        for (w, r) in grid.iter().zip(&audit.radii) {
            assert!((r - 1.0 / w).abs() < 1e-12);
        }
        assert_eq!(audit.below_epsilon_from, Some(128.0));
    }
}
