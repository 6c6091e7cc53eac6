//! Expression language and piecewise signals used to define test functions.
//!
//! Pieces are left-closed and right-open (`a<=x<b`); the first piece may be
//! unbounded below (`x<b`) and the last unbounded above (`x>=a`). The grammar
//! is documented on [`parse_expression`].

mod expr;
mod parser;
mod piecewise;

pub use expr::{BinOp, Expression, Func};
pub use parser::{parse_expression, ParseError};
pub use piecewise::{parse_interval, parse_piecewise, Domain, PieceSpec, PiecewiseError, PiecewiseFunction};

/// The discontinuous test signals used by the figure presets, plus a
/// continuous hat function for rate experiments.
pub mod presets {
    use super::{parse_piecewise, Domain, PieceSpec, PiecewiseFunction};

    pub fn f1_spec() -> Vec<PieceSpec> {
        vec![
            PieceSpec::new("x<-1", "3*exp(x)"),
            PieceSpec::new("-1<=x<0", "-1"),
            PieceSpec::new("0<=x<1", "2"),
            PieceSpec::new("1<=x<2", "x"),
            PieceSpec::new("x>=2", "-2*exp(-x)"),
        ]
    }

    pub fn f2_spec() -> Vec<PieceSpec> {
        vec![
            PieceSpec::new("x<-1", "3*exp(x)"),
            PieceSpec::new("-1<=x<0", "-1"),
            PieceSpec::new("0<=x<2", "2"),
            PieceSpec::new("x>=2", "-2*exp(-x)"),
        ]
    }

    pub fn f3_spec() -> Vec<PieceSpec> {
        vec![
            PieceSpec::new("0<=x<2", "2*x"),
            PieceSpec::new("2<=x<4", "1"),
            PieceSpec::new("x>=4", "-25/x^3"),
        ]
    }

    pub fn hat_spec() -> Vec<PieceSpec> {
        vec![
            PieceSpec::new("x<-1", "0"),
            PieceSpec::new("-1<=x<0", "1+x"),
            PieceSpec::new("0<=x<1", "1-x"),
            PieceSpec::new("x>=1", "0"),
        ]
    }

    /// Returns the pieces and domain of a named preset (`f1`, `f2`, `f3`, `hat`).
    pub fn spec(name: &str) -> Option<(Vec<PieceSpec>, Domain)> {
        Some(match name {
            "f1" => (f1_spec(), Domain::Real),
            "f2" => (f2_spec(), Domain::Real),
            "f3" => (f3_spec(), Domain::Positive),
            "hat" => (hat_spec(), Domain::Real),
            _ => return None,
        })
    }

    pub fn by_name(name: &str) -> Option<PiecewiseFunction> {
        let (pieces, domain) = spec(name)?;
        Some(parse_piecewise(&pieces, domain).expect("bundled preset is valid"))
    }

    pub fn f1() -> PiecewiseFunction {
        by_name("f1").unwrap()
    }

    pub fn f2() -> PiecewiseFunction {
        by_name("f2").unwrap()
    }

    pub fn f3() -> PiecewiseFunction {
        by_name("f3").unwrap()
    }

    pub fn hat() -> PiecewiseFunction {
        by_name("hat").unwrap()
    }
}
