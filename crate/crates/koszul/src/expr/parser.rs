//! Recursive-descent parser for the scalar expression grammar.
//!
//! Grammar (whitespace insensitive):
//!
//! ```text
//! expr     := term (('+' | '-') term)*
//! term     := factor (('*' | '/') factor)*
//! factor   := '-' factor | power
//! power    := primary ('^' exponent)?
//! exponent := '-'? integer | '(' '-'? integer ')'
//! primary  := number | func '(' expr ')' | coordinate | '(' expr ')'
//! func     := 'exp' | 'ln' | 'sin' | 'cos'
//! ```
//!
//! Numeric literals parse to exact rationals whenever the decimal fits in
//! `i64`; printing uses the same grammar, so print -> parse -> print is a
//! fixed point.

use super::{Expr, Number};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown identifier `{name}` at byte {position}")]
    UnknownIdentifier { name: String, position: usize },
    #[error("`^` expects an integer exponent at byte {position}")]
    NonIntegerExponent { position: usize },
}

struct Parser<'a> {
    input: &'a [u8],
    pos: usize,
    names: &'a [String],
}

/// Parse `text` against the given coordinate names.
pub fn parse_expr(text: &str, names: &[String]) -> Result<Expr, ParseError> {
    let mut p = Parser {
        input: text.as_bytes(),
        pos: 0,
        names,
    };
    p.skip_ws();
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.input.len() {
        return Err(ParseError::Syntax {
            position: p.pos,
            message: format!("unexpected `{}`", p.current_char()),
        });
    }
    Ok(e)
}

impl<'a> Parser<'a> {
    fn current_char(&self) -> char {
        self.input.get(self.pos).map(|b| *b as char).unwrap_or('\0')
    }

    fn skip_ws(&mut self) {
        while matches!(self.input.get(self.pos), Some(b' ' | b'\t' | b'\n' | b'\r')) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.input.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            self.skip_ws();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                acc = acc.add(&self.term()?);
            } else if self.eat(b'-') {
                acc = acc.sub(&self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.factor()?;
        loop {
            if self.eat(b'*') {
                acc = acc.mul(&self.factor()?);
            } else if self.eat(b'/') {
                acc = acc.div(&self.factor()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if self.eat(b'-') {
            return Ok(self.factor()?.neg());
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if self.eat(b'^') {
            let exp = self.exponent()?;
            return Ok(base.powi(exp));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<i32, ParseError> {
        let parens = self.eat(b'(');
        let neg = self.eat(b'-');
        let start = self.pos;
        let mut digits = String::new();
        while let Some(b @ b'0'..=b'9') = self.peek() {
            digits.push(b as char);
            self.pos += 1;
        }
        // reject "2.5" style exponents explicitly
        if self.peek() == Some(b'.') || digits.is_empty() {
            return Err(ParseError::NonIntegerExponent { position: start });
        }
        self.skip_ws();
        if parens && !self.eat(b')') {
            return Err(ParseError::Syntax {
                position: self.pos,
                message: "expected `)` after exponent".into(),
            });
        }
        let value: i32 = digits
            .parse()
            .map_err(|_| ParseError::NonIntegerExponent { position: start })?;
        Ok(if neg { -value } else { value })
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        self.skip_ws();
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                self.skip_ws();
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(ParseError::Syntax {
                        position: self.pos,
                        message: "expected `)`".into(),
                    });
                }
                Ok(e)
            }
            Some(b'0'..=b'9' | b'.') => self.number(),
            Some(b) if b.is_ascii_alphabetic() || b == b'_' || b == b'#' => self.identifier(),
            _ => Err(ParseError::Syntax {
                position: self.pos,
                message: format!("expected expression, found `{}`", self.current_char()),
            }),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let mut int_part = String::new();
        let mut frac_part = String::new();
        let mut exp_part: Option<i32> = None;
        while let Some(b @ b'0'..=b'9') = self.peek() {
            int_part.push(b as char);
            self.pos += 1;
        }
        if self.peek() == Some(b'.') {
            self.pos += 1;
            while let Some(b @ b'0'..=b'9') = self.peek() {
                frac_part.push(b as char);
                self.pos += 1;
            }
        }
        if matches!(self.peek(), Some(b'e' | b'E')) {
            // scientific notation only when followed by digits or sign+digits,
            // so `2exp(x)`-style adjacency still errors cleanly below
            let save = self.pos;
            self.pos += 1;
            let mut sign = 1i32;
            if self.peek() == Some(b'-') {
                sign = -1;
                self.pos += 1;
            } else if self.peek() == Some(b'+') {
                self.pos += 1;
            }
            let mut digits = String::new();
            while let Some(b @ b'0'..=b'9') = self.peek() {
                digits.push(b as char);
                self.pos += 1;
            }
            if digits.is_empty() {
                self.pos = save;
            } else {
                exp_part = Some(sign * digits.parse::<i32>().unwrap_or(0));
            }
        }
        self.skip_ws();
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(ParseError::Syntax {
                position: start,
                message: "malformed number".into(),
            });
        }
        let digits: String = format!("{int_part}{frac_part}");
        let scale = frac_part.len() as i32;
        let exp10 = exp_part.unwrap_or(0) - scale;
        if let Ok(mantissa) = digits.parse::<i64>() {
            let mut n = Number::int(mantissa);
            if exp10 >= 0 {
                if let Some(p) = Number::int(10).powi(exp10) {
                    n = n.mul(p);
                }
            } else if let Some(p) = Number::int(10).powi(-exp10) {
                n = n.div(p);
            }
            return Ok(Expr::constant(n));
        }
        let text = std::str::from_utf8(&self.input[start..self.pos])
            .unwrap_or("")
            .trim();
        let value: f64 = text.parse().map_err(|_| ParseError::Syntax {
            position: start,
            message: "malformed number".into(),
        })?;
        Ok(Expr::float(value))
    }

    fn identifier(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        // `#i` placeholders round-trip printed expressions without names
        if self.peek() == Some(b'#') {
            self.pos += 1;
            let mut digits = String::new();
            while let Some(b @ b'0'..=b'9') = self.peek() {
                digits.push(b as char);
                self.pos += 1;
            }
            self.skip_ws();
            let index: usize = digits.parse().map_err(|_| ParseError::Syntax {
                position: start,
                message: "malformed coordinate placeholder".into(),
            })?;
            return Ok(Expr::coord(index));
        }
        let mut name = String::new();
        while let Some(b) = self.peek() {
            if b.is_ascii_alphanumeric() || b == b'_' {
                name.push(b as char);
                self.pos += 1;
            } else {
                break;
            }
        }
        self.skip_ws();
        let is_call = self.peek() == Some(b'(');
        if is_call {
            let ctor: Option<fn(&Expr) -> Expr> = match name.as_str() {
                "exp" => Some(Expr::exp),
                "ln" => Some(Expr::ln),
                "sin" => Some(Expr::sin),
                "cos" => Some(Expr::cos),
                _ => None,
            };
            if let Some(ctor) = ctor {
                self.pos += 1;
                self.skip_ws();
                let arg = self.expr()?;
                if !self.eat(b')') {
                    return Err(ParseError::Syntax {
                        position: self.pos,
                        message: format!("expected `)` to close {name}(...)"),
                    });
                }
                return Ok(ctor(&arg));
            }
            return Err(ParseError::UnknownIdentifier {
                name,
                position: start,
            });
        }
        if let Some(index) = self.names.iter().position(|n| *n == name) {
            return Ok(Expr::coord(index));
        }
        Err(ParseError::UnknownIdentifier {
            name,
            position: start,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::render;

    fn names(list: &[&str]) -> Vec<String> {
        list.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn direct_grammar_reading() {
        let ns = names(&["x", "y"]);
        let e = parse_expr("y*exp(x)", &ns).unwrap();
        assert_eq!(e, Expr::coord(1).mul(&Expr::coord(0).exp()));

        let e2 = parse_expr("x^2 + 1/2", &ns).unwrap();
        assert_eq!(e2, Expr::coord(0).powi(2).add(&Expr::rat(1, 2)));
    }

    #[test]
    fn form_syntax_is_not_scalar_syntax() {
        let ns = names(&["x", "y", "z"]);
        let err = parse_expr("dz - y*dx", &ns).unwrap_err();
        assert_eq!(
            err,
            ParseError::UnknownIdentifier {
                name: "dz".into(),
                position: 0
            }
        );
    }

    #[test]
    fn non_integer_exponent_rejected() {
        let ns = names(&["x"]);
        assert!(matches!(
            parse_expr("x^2.5", &ns),
            Err(ParseError::NonIntegerExponent { .. })
        ));
        assert!(parse_expr("x^-2", &ns).is_ok());
        assert!(parse_expr("x^(-2)", &ns).is_ok());
    }

    #[test]
    fn syntax_error_has_position() {
        let ns = names(&["x"]);
        match parse_expr("x + ", &ns) {
            Err(ParseError::Syntax { position, .. }) => assert_eq!(position, 4),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn print_parse_print_fixed_point() {
        let ns = names(&["x", "y", "z"]);
        let cases = [
            "x^2 + 1/2",
            "-1/2*x + y*exp(x)",
            "sin(x*y) - cos(z)^3",
            "x/(y + 2)",
            "exp(-x)*(y + z)",
            "2*exp(2*x)",
        ];
        for case in cases {
            let e = parse_expr(case, &ns).unwrap();
            let printed = render(&e, &ns);
            let reparsed = parse_expr(&printed, &ns).unwrap();
            assert_eq!(render(&reparsed, &ns), printed, "not a fixed point: {case}");
            // and evaluation agrees with the original
            let p = [0.3, -0.7, 1.1];
            let a = e.eval(&p).unwrap();
            let b = reparsed.eval(&p).unwrap();
            assert!((a - b).abs() < 1e-14 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn decimal_literals_become_exact_rationals() {
        let ns = names(&["x"]);
        let e = parse_expr("0.5", &ns).unwrap();
        assert_eq!(e.as_const(), Some(Number::Rat(1, 2)));
        let e2 = parse_expr("1e3", &ns).unwrap();
        assert_eq!(e2.as_const(), Some(Number::Rat(1000, 1)));
    }
}
