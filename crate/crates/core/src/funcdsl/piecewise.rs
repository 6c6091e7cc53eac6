use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::expr::Expression;
use super::parser::{parse_expression, ParseError};
use crate::error::{Error, Result};
use crate::quadrature::{IntegrationRequest, Measure};

/// Domain a signal is defined on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    #[default]
    Real,
    /// `(0, ∞)` with the logarithmic measure.
    Positive,
}

impl Domain {
    pub fn measure(self) -> Measure {
        match self {
            Domain::Real => Measure::Lebesgue,
            Domain::Positive => Measure::Logarithmic,
        }
    }

    pub fn contains(self, x: f64) -> bool {
        match self {
            Domain::Real => x.is_finite(),
            Domain::Positive => x.is_finite() && x > 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PiecewiseError {
    #[error("bad interval `{text}`: {message}")]
    Interval { text: String, message: String },
    #[error("piece {index}: {source}")]
    Expression {
        index: usize,
        #[source]
        source: ParseError,
    },
    #[error("gap between pieces at boundary {boundary}")]
    Gap { boundary: f64 },
    #[error("pieces overlap at boundary {boundary}")]
    Overlap { boundary: f64 },
    #[error("pieces do not cover the domain: {0}")]
    Coverage(String),
}

/// Textual form of one piece, as written in config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PieceSpec {
    pub interval: String,
    pub expr: String,
}

impl PieceSpec {
    pub fn new(interval: &str, expr: &str) -> Self {
        PieceSpec {
            interval: interval.to_string(),
            expr: expr.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Piece {
    lo: f64,
    hi: f64,
    expr: Expression,
    constant: Option<f64>,
}

/// Ordered, consecutive pieces `[lo, hi)` covering the declared domain.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseFunction {
    pieces: Arc<Vec<Piece>>,
    domain: Domain,
    breakpoints: Vec<f64>,
}

/// Parses the interval micro-syntax: `a<=x<b`, `x<b`, `x>=a`, or `all`.
pub fn parse_interval(text: &str) -> Result<(f64, f64), PiecewiseError> {
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = |message: &str| PiecewiseError::Interval {
        text: text.to_string(),
        message: message.to_string(),
    };
    let bound = |s: &str| -> Result<f64, PiecewiseError> {
        let e = parse_expression(s).map_err(|e| bad(&e.to_string()))?;
        if !e.is_constant() {
            return Err(bad("interval endpoints must be constants"));
        }
        let v = e.eval(0.0);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(bad("interval endpoint is not finite"))
        }
    };
    if compact == "all" {
        return Ok((f64::NEG_INFINITY, f64::INFINITY));
    }
    if let Some(rest) = compact.strip_prefix("x>=") {
        return Ok((bound(rest)?, f64::INFINITY));
    }
    if let Some(rest) = compact.strip_prefix("x<") {
        if rest.starts_with('=') {
            return Err(bad("pieces are right-open; write `x<b`"));
        }
        return Ok((f64::NEG_INFINITY, bound(rest)?));
    }
    if let Some(idx) = compact.find("<=x<") {
        let lo = bound(&compact[..idx])?;
        let upper = &compact[idx + 4..];
        if upper.starts_with('=') {
            return Err(bad("pieces are right-open; write `a<=x<b`"));
        }
        let hi = bound(upper)?;
        if !(lo < hi) {
            return Err(bad("empty interval"));
        }
        return Ok((lo, hi));
    }
    Err(bad("expected `a<=x<b`, `x<b`, `x>=a` or `all`"))
}

pub fn parse_piecewise(specs: &[PieceSpec], domain: Domain) -> Result<PiecewiseFunction, PiecewiseError> {
    if specs.is_empty() {
        return Err(PiecewiseError::Coverage("no pieces given".into()));
    }
    let mut pieces = Vec::with_capacity(specs.len());
    for (index, spec) in specs.iter().enumerate() {
        let (lo, hi) = parse_interval(&spec.interval)?;
        let expr = parse_expression(&spec.expr)
            .map_err(|source| PiecewiseError::Expression { index, source })?;
        let constant = expr.is_constant().then(|| expr.eval(0.0));
        pieces.push(Piece {
            lo,
            hi,
            expr,
            constant,
        });
    }
    pieces.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    for pair in pieces.windows(2) {
        let (left, right) = (&pair[0], &pair[1]);
        if left.hi < right.lo {
            return Err(PiecewiseError::Gap { boundary: left.hi });
        }
        if left.hi > right.lo {
            return Err(PiecewiseError::Overlap { boundary: right.lo });
        }
    }
    let first = pieces[0].lo;
    let last = pieces[pieces.len() - 1].hi;
    match domain {
        Domain::Real if first != f64::NEG_INFINITY => {
            return Err(PiecewiseError::Coverage(format!(
                "real-line signal must start with `x<b`, first piece starts at {first}"
            )))
        }
        Domain::Positive if first > 0.0 => {
            return Err(PiecewiseError::Coverage(format!(
                "positive-axis signal leaves (0, {first}) uncovered"
            )))
        }
        _ => {}
    }
    if last != f64::INFINITY {
        return Err(PiecewiseError::Coverage(format!(
            "last piece must extend to +∞, ends at {last}"
        )));
    }
    let breakpoints = pieces
        .iter()
        .skip(1)
        .map(|p| p.lo)
        .filter(|&b| domain.contains(b))
        .collect();
    Ok(PiecewiseFunction {
        pieces: Arc::new(pieces),
        domain,
        breakpoints,
    })
}

impl PiecewiseFunction {
    pub fn domain(&self) -> Domain {
        self.domain
    }

    /// Interior piece boundaries, sorted.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    fn piece_index(&self, x: f64) -> usize {
        // last piece with lo <= x (left-closed)
        self.pieces.partition_point(|p| p.lo <= x).saturating_sub(1)
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if !self.domain.contains(x) {
            return Err(Error::invalid(format!(
                "x = {x} is outside the {:?} domain",
                self.domain
            )));
        }
        let v = self.pieces[self.piece_index(x)].expr.eval(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite { x, value: v })
        }
    }

    /// `∫_a^b f dμ` piece by piece; constant pieces are integrated exactly.
    pub fn integral(&self, a: f64, b: f64, measure: Measure, tolerance: f64) -> Result<f64> {
        if !(a <= b) {
            return Err(Error::invalid(format!("reversed interval [{a}, {b}]")));
        }
        let inside = a.is_finite()
            && b.is_finite()
            && match self.domain {
                Domain::Real => true,
                Domain::Positive => a >= 0.0,
            };
        if !inside {
            return Err(Error::invalid(format!(
                "[{a}, {b}] is outside the {:?} domain",
                self.domain
            )));
        }
        let mut total = 0.0;
        let start = self.piece_index(a);
        for piece in &self.pieces[start..] {
            if piece.lo >= b {
                break;
            }
            let lo = piece.lo.max(a);
            let hi = piece.hi.min(b);
            if hi <= lo {
                continue;
            }
            total += match (piece.constant, measure) {
                (Some(c), Measure::Lebesgue) => c * (hi - lo),
                (Some(c), Measure::Logarithmic) => c * (hi / lo).ln(),
                (None, _) => IntegrationRequest::new(lo, hi)
                    .measure(measure)
                    .tolerance(tolerance)
                    .try_integrate(|x| {
                        let v = piece.expr.eval(x);
                        if v.is_finite() {
                            Ok(v)
                        } else {
                            Err(Error::NonFinite { x, value: v })
                        }
                    })?
                    .value,
            };
        }
        Ok(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcdsl::presets;

    #[test]
    fn interval_syntax() {
        assert_eq!(parse_interval("-1<=x<0").unwrap(), (-1.0, 0.0));
        assert_eq!(parse_interval("x < -1").unwrap(), (f64::NEG_INFINITY, -1.0));
        assert_eq!(parse_interval("x>=2").unwrap(), (2.0, f64::INFINITY));
        assert_eq!(parse_interval("all").unwrap(), (f64::NEG_INFINITY, f64::INFINITY));
        assert!(parse_interval("0<x<1").is_err());
        assert!(parse_interval("0<=x<=1").is_err());
        assert!(parse_interval("x<=1").is_err());
        assert!(parse_interval("1<=x<1").is_err());
        assert!(parse_interval("y<1").is_err());
    }

    #[test]
    fn first_signal_values() {
        let f = presets::f1();
        assert_eq!(f.eval(-1.0).unwrap(), -1.0);
        assert_eq!(f.eval(0.0).unwrap(), 2.0);
        assert_eq!(f.eval(1.5).unwrap(), 1.5);
        assert_eq!(f.breakpoints(), &[-1.0, 0.0, 1.0, 2.0]);
    }

    #[test]
    fn single_piece_identity() {
        let f = parse_piecewise(&[PieceSpec::new("all", "x")], Domain::Real).unwrap();
        for x in [-3.0, 0.0, 2.5] {
            assert_eq!(f.eval(x).unwrap(), x);
        }
        assert!(f.breakpoints().is_empty());
    }

    #[test]
    fn gaps_and_overlaps_name_the_boundary() {
        let gap = parse_piecewise(
            &[PieceSpec::new("x<0", "1"), PieceSpec::new("0.5<=x<1", "2"), PieceSpec::new("x>=1", "3")],
            Domain::Real,
        )
        .unwrap_err();
        assert_eq!(gap, PiecewiseError::Gap { boundary: 0.0 });
        let overlap = parse_piecewise(
            &[PieceSpec::new("x<1", "1"), PieceSpec::new("x>=0.5", "2")],
            Domain::Real,
        )
        .unwrap_err();
        assert_eq!(overlap, PiecewiseError::Overlap { boundary: 0.5 });
        assert!(matches!(
            parse_piecewise(&[PieceSpec::new("x>=0", "1")], Domain::Real),
            Err(PiecewiseError::Coverage(_))
        ));
        assert!(matches!(
            parse_piecewise(&[PieceSpec::new("x<0", "1")], Domain::Real),
            Err(PiecewiseError::Coverage(_))
        ));
    }

    #[test]
    fn positive_domain_rejects_nonpositive_points() {
        let f = presets::f3();
        assert_eq!(f.eval(3.0).unwrap(), 1.0);
        assert!(f.eval(0.0).is_err());
        assert!(f.eval(-1.0).is_err());
        assert_eq!(f.breakpoints(), &[2.0, 4.0]);
    }

    #[test]
    fn runtime_guard_on_non_finite_values() {
        let f = parse_piecewise(&[PieceSpec::new("all", "1/x")], Domain::Real).unwrap();
        assert!(matches!(f.eval(0.0), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn piecewise_integrals() {
        let f = presets::f1();
        // ∫_{-1}^{2} f = -1 + 2 + 1.5
        let v = f.integral(-1.0, 2.0, Measure::Lebesgue, 1e-12).unwrap();
        assert!((v - 2.5).abs() < 1e-12);
        let v = f.integral(-3.0, -1.0, Measure::Lebesgue, 1e-12).unwrap();
        let exact = 3.0 * ((-1.0f64).exp() - (-3.0f64).exp());
        assert!((v - exact).abs() < 1e-12);
        let g = presets::f3();
        // ∫_1^3 f dt/t = ∫_1^2 2 dt + ∫_2^3 dt/t
        let v = g.integral(1.0, 3.0, Measure::Logarithmic, 1e-12).unwrap();
        assert!((v - (2.0 + (1.5f64).ln())).abs() < 1e-12);
    }
}
