//! Recursive-descent parser for product expressions.
//!
//! ```text
//! Expr := Term ('*' Term)*
//! Term := 'x^' INT | Atom
//! Atom := 'delta' | 'pv(1/x)' | '(x+i0)^-' INT | '(x-i0)^-' INT | '1' | 'd(' Atom ')'
//! ```
//!
//! A power `x^r` attaches to the next atom as its prefactor; a trailing one
//! becomes a standalone `x^r` factor.

use crate::boundary::HyperfunctionPair;
use crate::error::{Error, Result};
use crate::pairing::ProductExpression;

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

enum Term {
    Power(u32),
    Atom(HyperfunctionPair),
}

impl<'a> Parser<'a> {
    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn eat(&mut self, lit: &str) -> bool {
        if self.rest().starts_with(lit) {
            self.pos += lit.len();
            true
        } else {
            false
        }
    }

    fn syntax<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Syntax { offset: self.pos, message: message.into() })
    }

    fn int(&mut self) -> Result<u32> {
        let digits = self.rest().bytes().take_while(u8::is_ascii_digit).count();
        if digits == 0 {
            return self.syntax("expected an integer");
        }
        let start = self.pos;
        let text = &self.src[start..start + digits];
        self.pos += digits;
        text.parse().map_err(|_| Error::Syntax {
            offset: start,
            message: format!("integer `{text}` out of range"),
        })
    }

    fn term(&mut self) -> Result<Term> {
        if self.eat("x^") {
            return Ok(Term::Power(self.int()?));
        }
        Ok(Term::Atom(self.atom()?))
    }

    fn atom(&mut self) -> Result<HyperfunctionPair> {
        let start = self.pos;
        if self.eat("delta") {
            return Ok(HyperfunctionPair::delta());
        }
        if self.eat("pv(1/x)") {
            return Ok(HyperfunctionPair::pv_inv_x());
        }
        for (lit, plus) in [("(x+i0)^-", true), ("(x-i0)^-", false)] {
            if self.eat(lit) {
                let at = self.pos;
                let k = self.int()?;
                if k == 0 {
                    return Err(Error::Syntax { offset: at, message: "power must be at least 1".into() });
                }
                let pair = if plus { HyperfunctionPair::plus_i0_pow(k) } else { HyperfunctionPair::minus_i0_pow(k) };
                return pair;
            }
        }
        if self.eat("d(") {
            self.skip_ws();
            let inner = self.atom()?;
            self.skip_ws();
            if !self.eat(")") {
                return self.syntax("expected `)`");
            }
            return Ok(inner.derivative());
        }
        if self.rest().starts_with('1') && !self.rest()[1..].starts_with(|c: char| c.is_ascii_alphanumeric()) {
            self.pos += 1;
            return Ok(HyperfunctionPair::one());
        }
        let name: String = self
            .rest()
            .chars()
            .take_while(|c| !c.is_whitespace() && *c != '*')
            .collect();
        if name.is_empty() {
            return self.syntax("expected a factor");
        }
        Err(Error::UnknownAtom { offset: start, name })
    }
}

/// Parses `text` into a product. Factors keep their textual order.
pub fn parse_expression(text: &str) -> Result<ProductExpression> {
    let mut parser = Parser { src: text, pos: 0 };
    let mut factors = Vec::new();
    let mut pending: Option<u32> = None;
    loop {
        parser.skip_ws();
        match parser.term()? {
            Term::Power(r) => *pending.get_or_insert(0) += r,
            Term::Atom(pair) => factors.push((pair, pending.take().unwrap_or(0))),
        }
        parser.skip_ws();
        if parser.rest().is_empty() {
            break;
        }
        if !parser.eat("*") {
            return parser.syntax("expected `*`");
        }
    }
    if let Some(r) = pending {
        factors.push((HyperfunctionPair::monomial(r), 0));
    }
    ProductExpression::with_powers(factors)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_factor_product() {
        let e = parse_expression("delta * pv(1/x)").unwrap();
        assert_eq!(e, ProductExpression::new(vec![HyperfunctionPair::delta(), HyperfunctionPair::pv_inv_x()]).unwrap());
    }

    #[test]
    fn leading_power_folds_into_next_factor() {
        let e = parse_expression("x^2 * delta * delta").unwrap();
        assert_eq!(e.len(), 2);
        assert_eq!(e.total_power(), 2);
        assert_eq!(e.factors()[0].power, 2);
        assert_eq!(parse_expression("x^1 * x^2 * delta").unwrap().total_power(), 3);
    }

    #[test]
    fn trailing_power_is_a_monomial_factor() {
        let e = parse_expression("delta * x^1").unwrap();
        assert_eq!(e.factors()[1].pair, HyperfunctionPair::monomial(1));
        assert_eq!(e.total_power(), 0);
    }

    #[test]
    fn i0_powers() {
        let e = parse_expression("(x+i0)^-1 * (x+i0)^-1").unwrap();
        let p = HyperfunctionPair::plus_i0_pow(1).unwrap();
        assert_eq!(e, ProductExpression::new(vec![p.clone(), p]).unwrap());
        let m = parse_expression("(x-i0)^-3").unwrap();
        assert_eq!(m.factors()[0].pair, HyperfunctionPair::minus_i0_pow(3).unwrap());
    }

    #[test]
    fn derivatives_nest() {
        let e = parse_expression("d(d(delta))").unwrap();
        assert_eq!(e.factors()[0].pair, HyperfunctionPair::delta().derivative().derivative());
        assert_eq!(e.to_string(), "d(d(delta))");
    }

    #[test]
    fn whitespace_is_optional() {
        assert_eq!(parse_expression("delta*1").unwrap(), parse_expression("  delta  *  1 ").unwrap());
    }

    #[test]
    fn errors_carry_offsets() {
        match parse_expression("delta * theta").unwrap_err() {
            Error::UnknownAtom { offset, name } => {
                assert_eq!(offset, 8);
                assert_eq!(name, "theta");
            }
            e => panic!("unexpected {e:?}"),
        }
        assert!(matches!(parse_expression("delta pv(1/x)"), Err(Error::Syntax { offset: 6, .. })));
        assert!(matches!(parse_expression("x^ * delta"), Err(Error::Syntax { offset: 2, .. })));
        assert!(matches!(parse_expression(""), Err(Error::Syntax { offset: 0, .. })));
        assert!(matches!(parse_expression("delta *"), Err(Error::Syntax { offset: 7, .. })));
        assert!(matches!(parse_expression("(x+i0)^-0"), Err(Error::Syntax { offset: 8, .. })));
        assert!(matches!(parse_expression("d(delta"), Err(Error::Syntax { offset: 7, .. })));
        assert!(matches!(parse_expression("12"), Err(Error::UnknownAtom { offset: 0, .. })));
    }
}
