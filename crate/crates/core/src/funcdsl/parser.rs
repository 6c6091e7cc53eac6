//! Recursive-descent parser for the expression grammar:
//!
//! ```text
//! expr    = term { ("+" | "-") term } ;
//! term    = unary { ("*" | "/") unary } ;
//! unary   = "-" unary | power ;
//! power   = primary [ "^" unary ] ;
//! primary = number | "x" | func "(" expr ")" | "(" expr ")" ;
//! func    = "exp" | "ln" | "sin" | "cos" | "abs" | "sinc" ;
//! number  = digits [ "." digits ] [ ("e" | "E") [ "+" | "-" ] digits ]
//!         | "." digits [ exponent ] ;
//! ```

use std::fmt;

use thiserror::Error;

use super::expr::{BinOp, Expression, Func};

const MAX_DEPTH: usize = 200;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    /// Byte offset of the offending token.
    pub offset: usize,
    pub expected: Vec<&'static str>,
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "syntax error at offset {}: found {}, expected one of: {}",
            self.offset,
            self.found,
            self.expected.join(", ")
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Sym(c) => format!("`{c}`"),
            Tok::End => "end of input".to_string(),
        }
    }
}

const OPERAND: &[&str] = &["number", "x", "function", "(", "-"];
const AFTER_OPERAND: &[&str] = &["+", "-", "*", "/", "^", ")", "end of input"];

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == b'.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'.' {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let lit = &text[start..i];
            let v: f64 = lit.parse().map_err(|_| ParseError {
                offset: start,
                expected: vec!["number"],
                found: format!("`{lit}`"),
            })?;
            if !v.is_finite() {
                return Err(ParseError {
                    offset: start,
                    expected: vec!["finite number"],
                    found: format!("`{lit}`"),
                });
            }
            out.push((start, Tok::Num(v)));
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(text[start..i].to_string())));
        } else if b"+-*/^()".contains(&c) {
            out.push((i, Tok::Sym(c as char)));
            i += 1;
        } else {
            let ch = text[i..].chars().next().unwrap_or('?');
            return Err(ParseError {
                offset: i,
                expected: OPERAND.to_vec(),
                found: format!("`{ch}`"),
            });
        }
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    depth: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn error(&self, expected: &[&'static str]) -> ParseError {
        ParseError {
            offset: self.offset(),
            expected: expected.to_vec(),
            found: self.peek().describe(),
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if *self.peek() == Tok::Sym(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            Err(ParseError {
                offset: self.offset(),
                expected: vec!["shallower nesting"],
                found: format!("nesting deeper than {MAX_DEPTH}"),
            })
        } else {
            Ok(())
        }
    }

    fn expr(&mut self) -> Result<Expression, ParseError> {
        self.enter()?;
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat('+') {
                BinOp::Add
            } else if self.eat('-') {
                BinOp::Sub
            } else {
                break;
            };
            let rhs = self.term()?;
            lhs = Expression::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expression, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat('*') {
                BinOp::Mul
            } else if self.eat('/') {
                BinOp::Div
            } else {
                break;
            };
            let rhs = self.unary()?;
            lhs = Expression::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expression, ParseError> {
        if self.eat('-') {
            self.enter()?;
            let inner = self.unary()?;
            self.depth -= 1;
            Ok(Expression::Neg(Box::new(inner)))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expression, ParseError> {
        let base = self.primary()?;
        if self.eat('^') {
            self.enter()?;
            let exponent = self.unary()?;
            self.depth -= 1;
            Ok(Expression::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)))
        } else {
            Ok(base)
        }
    }

    fn primary(&mut self) -> Result<Expression, ParseError> {
        match self.peek().clone() {
            Tok::Num(v) => {
                self.pos += 1;
                Ok(Expression::Literal(v))
            }
            Tok::Ident(name) if name == "x" => {
                self.pos += 1;
                Ok(Expression::Var)
            }
            Tok::Ident(name) => {
                let Some(func) = Func::from_name(&name) else {
                    return Err(self.error(OPERAND));
                };
                self.pos += 1;
                if !self.eat('(') {
                    return Err(self.error(&["("]));
                }
                let arg = self.expr()?;
                if !self.eat(')') {
                    return Err(self.error(&[")", "+", "-", "*", "/", "^"]));
                }
                Ok(Expression::Call(func, Box::new(arg)))
            }
            Tok::Sym('(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(')') {
                    return Err(self.error(&[")", "+", "-", "*", "/", "^"]));
                }
                Ok(inner)
            }
            _ => Err(self.error(OPERAND)),
        }
    }
}

pub fn parse_expression(text: &str) -> Result<Expression, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        depth: 0,
    };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.error(AFTER_OPERAND));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(text: &str, x: f64) -> f64 {
        parse_expression(text).unwrap().eval(x)
    }

    #[test]
    fn basic_values() {
        assert_eq!(eval("3*exp(x)", 0.0), 3.0);
        assert!((eval("-25/x^3", 5.0) + 0.2).abs() < 1e-15);
        assert_eq!(eval("sinc(x)", 0.0), 1.0);
        assert_eq!(eval("abs(x) - ln(1)", -2.5), 2.5);
        assert_eq!(eval(".5e1 + 1E-1", 0.0), 5.1);
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(eval("-x^2", 3.0), -9.0);
        assert_eq!(eval("2^3^2", 0.0), 512.0);
        assert_eq!(eval("2^-1", 0.0), 0.5);
        assert_eq!(eval("8/4/2", 0.0), 1.0);
        assert_eq!(eval("1-2-3", 0.0), -4.0);
        assert_eq!(eval("2*-x", 3.0), -6.0);
        assert_eq!(eval("1+2*3^2", 0.0), 19.0);
    }

    #[test]
    fn error_offsets() {
        let e = parse_expression("2*x-+").unwrap_err();
        assert_eq!(e.offset, 4);
        assert!(e.expected.contains(&"number"));
        assert_eq!(parse_expression("").unwrap_err().offset, 0);
        assert_eq!(parse_expression("foo(x)").unwrap_err().offset, 0);
        assert_eq!(parse_expression("exp x").unwrap_err().offset, 4);
        assert_eq!(parse_expression("(x+1").unwrap_err().offset, 4);
        assert_eq!(parse_expression("x 2").unwrap_err().offset, 2);
        assert_eq!(parse_expression("1e999").unwrap_err().offset, 0);
        assert_eq!(parse_expression("x # 2").unwrap_err().offset, 2);
    }

    #[test]
    fn deep_nesting_is_an_error_not_a_crash() {
        let text = "(".repeat(600) + "x" + &")".repeat(600);
        assert!(parse_expression(&text).is_err());
        let text = "-".repeat(900) + "x";
        assert!(parse_expression(&text).is_err());
    }

    #[test]
    fn display_round_trip() {
        for text in ["3*exp(x)", "-25/x^3", "2^3^2", "-(x-1)*sin(x/2)", "0.5*sinc(x/2)^2", "1e-7+x"] {
            let e = parse_expression(text).unwrap();
            let again = parse_expression(&e.to_string()).unwrap();
            assert_eq!(e, again, "{text} -> {e}");
        }
    }
}
