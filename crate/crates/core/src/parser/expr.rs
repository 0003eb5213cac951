//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr    := term (("+" | "-") term)*
//! term    := unary (("*" | "/") unary)*
//! unary   := "-" unary | power
//! power   := primary ("^" exponent)?
//! exponent:= "-"? INT | "(" "-"? INT ")"
//! primary := NUMBER | IDENT | IDENT "(" expr ")" | "(" expr ")"
//! ```
//!
//! Numbers are exact: `0.25` and `1e-3` become rationals.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::ParseError;
use crate::jetexpr::{Expr, Func, Rational, Var};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Rational),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(n) => format!("number {n}"),
        Tok::Ident(s) => format!("identifier `{s}`"),
        Tok::Plus => "`+`".into(),
        Tok::Minus => "`-`".into(),
        Tok::Star => "`*`".into(),
        Tok::Slash => "`/`".into(),
        Tok::Caret => "`^`".into(),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::End => "end of input".into(),
    }
}

fn lex(src: &str, line: usize, col0: usize) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let column = col0 + i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let single = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Token { tok, line, column });
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            // optional exponent
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text: String = chars[start..i].iter().collect();
            let value = parse_number(&text).ok_or_else(|| ParseError::Syntax {
                line,
                column,
                message: format!("malformed number `{text}`"),
            })?;
            out.push(Token {
                tok: Tok::Num(value),
                line,
                column,
            });
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                line,
                column,
            });
            continue;
        }
        return Err(ParseError::Syntax {
            line,
            column,
            message: format!("unexpected character `{c}`"),
        });
    }
    out.push(Token {
        tok: Tok::End,
        line,
        column: col0 + chars.len(),
    });
    Ok(out)
}

/// Exact value of a decimal literal such as `12`, `0.25` or `1.5e-3`.
pub(crate) fn parse_number(text: &str) -> Option<Rational> {
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(p) => (&text[..p], text[p + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((a, b)) => (a, b),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let n: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().ok()?
    };
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        Rational::from_integer(n * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(n, num_traits::pow(ten, (-scale) as usize))
    };
    Some(value)
}

/// How identifiers that are neither variables nor functions are treated.
pub(crate) trait Symbols {
    /// `Ok(Some(e))` to substitute, `Ok(None)` to reject as unknown.
    fn lookup(&self, name: &str) -> Option<Expr>;
}

/// Accept every identifier as a free parameter.
pub(crate) struct AnyParam;

impl Symbols for AnyParam {
    fn lookup(&self, name: &str) -> Option<Expr> {
        Some(Expr::param(name))
    }
}

/// Resolve a variable name: `x`, `t`, `u`, `u_x`…`u_xxxxxxxxx`, `u_t`,
/// `u_tt`…, `z<i>`, `w<j>`.
pub fn resolve_var(name: &str) -> Option<Var> {
    match name {
        "x" => return Some(Var::X),
        "t" => return Some(Var::T),
        "u" => return Some(Var::Z(0)),
        _ => {}
    }
    if let Some(sub) = name.strip_prefix("u_") {
        if !sub.is_empty() && sub.len() <= 9 && sub.chars().all(|c| c == 'x') {
            return Some(Var::Z(sub.len() as u32));
        }
        if !sub.is_empty() && sub.chars().all(|c| c == 't') {
            return Some(Var::W(sub.len() as u32));
        }
        return None;
    }
    let digits = |s: &str| -> Option<u32> {
        if !s.is_empty() && s.chars().all(|c| c.is_ascii_digit()) {
            s.parse().ok()
        } else {
            None
        }
    };
    if let Some(i) = name.strip_prefix('z').and_then(digits) {
        return Some(Var::Z(i));
    }
    if let Some(j) = name.strip_prefix('w').and_then(digits) {
        if j >= 1 {
            return Some(Var::W(j));
        }
    }
    None
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    symbols: &'a dyn Symbols,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, message: String) -> ParseError {
        let t = self.peek();
        ParseError::Syntax {
            line: t.line,
            column: t.column,
            message,
        }
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        if self.peek().tok == want {
            self.bump();
            Ok(())
        } else {
            Err(self.error_here(format!(
                "expected {}, found {}",
                describe(&want),
                describe(&self.peek().tok)
            )))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut terms = vec![self.term()?];
        loop {
            match self.peek().tok {
                Tok::Plus => {
                    self.bump();
                    terms.push(self.term()?);
                }
                Tok::Minus => {
                    self.bump();
                    terms.push(self.term()?.neg());
                }
                _ => break,
            }
        }
        Ok(Expr::sum(terms))
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.unary()?;
        let mut factors: Vec<Expr> = Vec::new();
        loop {
            match self.peek().tok {
                Tok::Star => {
                    self.bump();
                    factors.push(self.unary()?);
                }
                Tok::Slash => {
                    self.bump();
                    let rhs = self.unary()?;
                    if !factors.is_empty() {
                        let mut all = vec![acc];
                        all.append(&mut factors);
                        acc = Expr::product(all);
                    }
                    acc = Expr::div(acc, rhs);
                }
                _ => break,
            }
        }
        if !factors.is_empty() {
            let mut all = vec![acc];
            all.append(&mut factors);
            acc = Expr::product(all);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek().tok == Tok::Minus {
            self.bump();
            let inner = self.unary()?;
            return Ok(match inner.as_const() {
                Some(c) => Expr::constant(-c.clone()),
                None => inner.neg(),
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if self.peek().tok != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let n = self.exponent()?;
        Ok(Expr::pow(base, n))
    }

    fn exponent(&mut self) -> Result<i32, ParseError> {
        let paren = self.peek().tok == Tok::LParen;
        if paren {
            self.bump();
        }
        let negative = self.peek().tok == Tok::Minus;
        if negative {
            self.bump();
        }
        let value = match &self.peek().tok {
            Tok::Num(q) if q.is_integer() => {
                let v = q.to_integer();
                let v: i32 = v
                    .try_into()
                    .map_err(|_| self.error_here("exponent too large".into()))?;
                self.bump();
                v
            }
            other => {
                return Err(self.error_here(format!(
                    "exponent must be an integer literal, found {}",
                    describe(other)
                )))
            }
        };
        if paren {
            self.expect(Tok::RParen)?;
        }
        Ok(if negative { -value } else { value })
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let t = self.bump();
        match t.tok {
            Tok::Num(q) => Ok(Expr::constant(q)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if self.peek().tok == Tok::LParen {
                    let f = Func::from_name(&name).ok_or(ParseError::UnknownIdentifier {
                        name: name.clone(),
                        line: t.line,
                        column: t.column,
                    })?;
                    self.bump();
                    let arg = self.expr()?;
                    self.expect(Tok::RParen)?;
                    return Ok(Expr::apply(f, arg));
                }
                if let Some(v) = resolve_var(&name) {
                    return Ok(Expr::var(v));
                }
                if Func::from_name(&name).is_some() || name.starts_with("u_") {
                    return Err(ParseError::UnknownIdentifier {
                        name,
                        line: t.line,
                        column: t.column,
                    });
                }
                self.symbols
                    .lookup(&name)
                    .ok_or(ParseError::UnknownIdentifier {
                        name,
                        line: t.line,
                        column: t.column,
                    })
            }
            other => Err(ParseError::Syntax {
                line: t.line,
                column: t.column,
                message: format!("unexpected {}", describe(&other)),
            }),
        }
    }
}

/// Parse `src`, which sits at `line`, starting at 1-based column `col0`.
pub(crate) fn parse_at(
    src: &str,
    line: usize,
    col0: usize,
    symbols: &dyn Symbols,
) -> Result<Expr, ParseError> {
    let toks = lex(src, line, col0)?;
    let mut p = Parser {
        toks,
        pos: 0,
        symbols,
    };
    let e = p.expr()?;
    if p.peek().tok != Tok::End {
        return Err(p.error_here(format!("unexpected {}", describe(&p.peek().tok))));
    }
    Ok(e)
}

/// Parse an expression; unknown identifiers become free parameters.
pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    parse_at(src, 1, 1, &AnyParam)
}

/// Parse a signed rational literal (`-3`, `1/2`, `0.25`).
pub(crate) fn parse_rational_literal(text: &str) -> Option<Rational> {
    let text = text.trim();
    let (sign, body) = match text.strip_prefix('-') {
        Some(rest) => (-Rational::one(), rest.trim()),
        None => (
            Rational::one(),
            text.strip_prefix('+').unwrap_or(text).trim(),
        ),
    };
    let value = match body.split_once('/') {
        Some((a, b)) => {
            let a = parse_number(a.trim())?;
            let b = parse_number(b.trim())?;
            if b.is_zero() {
                return None;
            }
            a / b
        }
        None => parse_number(body)?,
    };
    Some(sign * value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jetexpr::normalize;

    #[test]
    fn quotient_of_sine_and_parameter() {
        let e = parse_expr("sin(u)/eta").unwrap();
        assert_eq!(e, Expr::div(Expr::sin(Expr::z(0)), Expr::param("eta")));
    }

    #[test]
    fn unterminated_call_reports_column() {
        match parse_expr("sin(") {
            Err(ParseError::Syntax { line, column, .. }) => {
                assert_eq!((line, column), (1, 5));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn aliases_resolve() {
        assert_eq!(resolve_var("u_xxx"), Some(Var::Z(3)));
        assert_eq!(resolve_var("z3"), Some(Var::Z(3)));
        assert_eq!(resolve_var("z10"), Some(Var::Z(10)));
        assert_eq!(resolve_var("u_t"), Some(Var::W(1)));
        assert_eq!(resolve_var("w2"), Some(Var::W(2)));
        assert_eq!(resolve_var("u_xt"), None);
        assert_eq!(resolve_var("w0"), None);
    }

    #[test]
    fn mixed_subscript_is_unknown() {
        assert!(matches!(
            parse_expr("u_xt + 1"),
            Err(ParseError::UnknownIdentifier { .. })
        ));
        assert!(matches!(
            parse_expr("frob(u)"),
            Err(ParseError::UnknownIdentifier { .. })
        ));
    }

    #[test]
    fn exact_decimals() {
        assert_eq!(
            parse_number("0.25"),
            Some(Rational::new(1.into(), 4.into()))
        );
        assert_eq!(
            parse_number("1e-3"),
            Some(Rational::new(1.into(), 1000.into()))
        );
        assert_eq!(
            parse_number("2.5E2"),
            Some(Rational::from_integer(250.into()))
        );
        assert_eq!(
            parse_rational_literal("-3/4"),
            Some(Rational::new((-3).into(), 4.into()))
        );
    }

    #[test]
    fn precedence_and_negative_powers() {
        let e = parse_expr("-x^2 + 2*x^-1").unwrap();
        let want = Expr::pow(Expr::x(), 2).neg() + Expr::int(2) * Expr::pow(Expr::x(), -1);
        assert_eq!(normalize(&e), normalize(&want));
        assert!(parse_expr("x^(1/2)").is_err());
    }

    #[test]
    fn phi_augmented_coefficient_parses() {
        let src = "u_xxx + (m1+2*m0)*u_xx + B*u_x - u^2/2 + 2*m0*B";
        let e = parse_expr(src).unwrap();
        assert_eq!(
            e.params(),
            ["B", "m0", "m1"].iter().map(|s| s.to_string()).collect()
        );
        let vars = e.variables();
        assert!(vars.contains(&Var::Z(3)) && vars.contains(&Var::Z(0)));
    }
}
