//! Scalar expressions over chart coordinates: text parser, printer, exact
//! symbolic differentiation and plain `f64` evaluation.
//!
//! The grammar is deliberately small (see the EBNF in the README): literals,
//! declared coordinates, `+ - * /`, powers with constant real exponents,
//! unary negation and the elementary functions `exp log sin cos tan sinh
//! cosh sqrt`. Precedence is `^` > unary `-` > `* /` > `+ -`, with `^`
//! right-associative. No simplification beyond constant folding of numeric
//! subtrees is ever performed; downstream consumers evaluate, they do not
//! rewrite.

use std::fmt;
use thiserror::Error;

/// Elementary functions of one argument.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Sqrt,
}

impl Func {
    pub const ALL: [Func; 8] = [
        Func::Exp,
        Func::Log,
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Sinh,
        Func::Cosh,
        Func::Sqrt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Sqrt => "sqrt",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Func::ALL.iter().copied().find(|f| f.name() == name)
    }
}

/// Expression tree over a chart. Coordinates are stored by index into the
/// chart's coordinate list; power exponents are numeric literals.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Coord(usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, f64),
    Neg(Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown identifier `{name}` at byte {pos}")]
    UnknownIdentifier { pos: usize, name: String },
    #[error("function `{func}` applied to {got} arguments at byte {pos}, expected 1")]
    Arity { pos: usize, func: String, got: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("log of non-positive value {arg}")]
    LogDomain { arg: f64 },
    #[error("sqrt of negative value {arg}")]
    SqrtDomain { arg: f64 },
    #[error("division by zero")]
    DivByZero,
    #[error("power {base}^{exp} outside real domain")]
    PowDomain { base: f64, exp: f64 },
    #[error("evaluation produced a non-finite value")]
    NonFinite,
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    Eof,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn next(&mut self) -> Result<(usize, Tok), ParseError> {
        self.skip_ws();
        let start = self.pos;
        if self.pos >= self.src.len() {
            return Ok((start, Tok::Eof));
        }
        let c = self.src[self.pos];
        let tok = match c {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b',' => Tok::Comma,
            b'0'..=b'9' => return self.lex_number(),
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => return self.lex_ident(),
            other => {
                return Err(ParseError::Syntax {
                    pos: start,
                    msg: format!("unexpected character `{}`", other as char),
                })
            }
        };
        self.pos += 1;
        Ok((start, tok))
    }

    fn lex_number(&mut self) -> Result<(usize, Tok), ParseError> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
        }
        if self.pos < self.src.len() && (self.src[self.pos] == b'e' || self.src[self.pos] == b'E') {
            // An exponent only counts if digits follow (with optional sign);
            // otherwise `2e` lexes as number `2` then identifier `e`.
            let mut probe = self.pos + 1;
            if probe < self.src.len() && (self.src[probe] == b'+' || self.src[probe] == b'-') {
                probe += 1;
            }
            if probe < self.src.len() && self.src[probe].is_ascii_digit() {
                self.pos = probe;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let value: f64 = text.parse().map_err(|_| ParseError::Syntax {
            pos: start,
            msg: format!("bad numeric literal `{text}`"),
        })?;
        Ok((start, Tok::Num(value)))
    }

    fn lex_ident(&mut self) -> Result<(usize, Tok), ParseError> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        Ok((start, Tok::Ident(text.to_owned())))
    }
}

// ---------------------------------------------------------------------------
// Parser (recursive descent)
// ---------------------------------------------------------------------------

struct Parser<'a> {
    lexer: Lexer<'a>,
    look: (usize, Tok),
    coords: &'a [&'a str],
}

impl<'a> Parser<'a> {
    fn new(src: &'a str, coords: &'a [&'a str]) -> Result<Self, ParseError> {
        let mut lexer = Lexer::new(src);
        let look = lexer.next()?;
        Ok(Parser {
            lexer,
            look,
            coords,
        })
    }

    fn bump(&mut self) -> Result<(usize, Tok), ParseError> {
        let next = self.lexer.next()?;
        Ok(std::mem::replace(&mut self.look, next))
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        if self.look.1 == want {
            self.bump()?;
            Ok(())
        } else {
            Err(ParseError::Syntax {
                pos: self.look.0,
                msg: format!("expected {what}, found {:?}", self.look.1),
            })
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.look.1 {
                Tok::Plus => {
                    self.bump()?;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump()?;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            match self.look.1 {
                Tok::Star => {
                    self.bump()?;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Tok::Slash => {
                    self.bump()?;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if self.look.1 == Tok::Minus {
            self.bump()?;
            // Fold negated literals so `(-5)` is the literal -5.
            return Ok(match self.factor()? {
                Expr::Num(v) => Expr::Num(-v),
                other => Expr::Neg(Box::new(other)),
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.look.1 == Tok::Caret {
            self.bump()?;
            let exp = self.exponent()?;
            return Ok(Expr::Pow(Box::new(base), exp));
        }
        Ok(base)
    }

    /// Exponents must be numeric constants. Parenthesized constant
    /// subexpressions fold (`x^(1/2)`), and `^` chains associate to the
    /// right (`x^2^3` is `x^8`).
    fn exponent(&mut self) -> Result<f64, ParseError> {
        let pos = self.look.0;
        let base = match self.look.1.clone() {
            Tok::Minus => {
                self.bump()?;
                return Ok(-self.exponent()?);
            }
            Tok::Num(v) => {
                self.bump()?;
                v
            }
            Tok::LParen => {
                self.bump()?;
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                match fold_constant(&inner) {
                    Some(v) => v,
                    None => {
                        return Err(ParseError::Syntax {
                            pos,
                            msg: "power exponent must be a numeric constant".into(),
                        })
                    }
                }
            }
            other => {
                return Err(ParseError::Syntax {
                    pos,
                    msg: format!("power exponent must be a numeric constant, found {other:?}"),
                })
            }
        };
        if self.look.1 == Tok::Caret {
            self.bump()?;
            let rhs = self.exponent()?;
            return Ok(base.powf(rhs));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let (pos, tok) = self.bump()?;
        match tok {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                // Declared coordinates shadow function names.
                if let Some(idx) = self.coords.iter().position(|c| *c == name) {
                    return Ok(Expr::Coord(idx));
                }
                if let Some(func) = Func::from_name(&name) {
                    self.expect(Tok::LParen, "`(` after function name")?;
                    let mut args = vec![self.expr()?];
                    while self.look.1 == Tok::Comma {
                        self.bump()?;
                        args.push(self.expr()?);
                    }
                    self.expect(Tok::RParen, "`)`")?;
                    if args.len() != 1 {
                        return Err(ParseError::Arity {
                            pos,
                            func: name,
                            got: args.len(),
                        });
                    }
                    return Ok(Expr::Call(func, Box::new(args.pop().unwrap())));
                }
                Err(ParseError::UnknownIdentifier { pos, name })
            }
            other => Err(ParseError::Syntax {
                pos,
                msg: format!("expected a value, found {other:?}"),
            }),
        }
    }
}

/// Folds an expression with no coordinates to its numeric value.
fn fold_constant(e: &Expr) -> Option<f64> {
    match e {
        Expr::Num(v) => Some(*v),
        Expr::Coord(_) => None,
        Expr::Add(a, b) => Some(fold_constant(a)? + fold_constant(b)?),
        Expr::Sub(a, b) => Some(fold_constant(a)? - fold_constant(b)?),
        Expr::Mul(a, b) => Some(fold_constant(a)? * fold_constant(b)?),
        Expr::Div(a, b) => Some(fold_constant(a)? / fold_constant(b)?),
        Expr::Pow(a, e) => Some(fold_constant(a)?.powf(*e)),
        Expr::Neg(a) => Some(-fold_constant(a)?),
        Expr::Call(f, a) => {
            let v = fold_constant(a)?;
            Some(match f {
                Func::Exp => v.exp(),
                Func::Log => v.ln(),
                Func::Sin => v.sin(),
                Func::Cos => v.cos(),
                Func::Tan => v.tan(),
                Func::Sinh => v.sinh(),
                Func::Cosh => v.cosh(),
                Func::Sqrt => v.sqrt(),
            })
        }
    }
}

/// Parses `text` against the declared coordinate names.
pub fn parse_expression(text: &str, coords: &[&str]) -> Result<Expr, ParseError> {
    let mut parser = Parser::new(text, coords)?;
    let expr = parser.expr()?;
    if parser.look.1 != Tok::Eof {
        return Err(ParseError::Syntax {
            pos: parser.look.0,
            msg: format!("trailing input, found {:?}", parser.look.1),
        });
    }
    Ok(expr)
}

// ---------------------------------------------------------------------------
// Printer
// ---------------------------------------------------------------------------

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Mul(..) | Expr::Div(..) => 2,
        Expr::Neg(..) => 3,
        Expr::Pow(..) => 4,
        Expr::Num(v) if *v < 0.0 => 3,
        _ => 5,
    }
}

/// Renders `e` with coordinate names; reparsing the result yields an
/// equivalent tree.
pub fn print_expression(e: &Expr, coords: &[&str]) -> String {
    fn go(e: &Expr, coords: &[&str], out: &mut String, min_prec: u8) {
        let prec = precedence(e);
        let parens = prec < min_prec;
        if parens {
            out.push('(');
        }
        match e {
            Expr::Num(v) => {
                if *v < 0.0 {
                    out.push('(');
                    out.push_str(&format!("{v}"));
                    out.push(')');
                } else {
                    out.push_str(&format!("{v}"));
                }
            }
            Expr::Coord(i) => out.push_str(coords[*i]),
            Expr::Add(a, b) => {
                go(a, coords, out, 1);
                out.push_str(" + ");
                go(b, coords, out, 2);
            }
            Expr::Sub(a, b) => {
                go(a, coords, out, 1);
                out.push_str(" - ");
                go(b, coords, out, 2);
            }
            Expr::Mul(a, b) => {
                go(a, coords, out, 2);
                out.push('*');
                go(b, coords, out, 3);
            }
            Expr::Div(a, b) => {
                go(a, coords, out, 2);
                go_den(b, coords, out);
            }
            Expr::Neg(a) => {
                out.push('-');
                go(a, coords, out, 3);
            }
            Expr::Pow(a, e) => {
                go(a, coords, out, 5);
                out.push('^');
                if *e < 0.0 {
                    out.push_str(&format!("({e})"));
                } else {
                    out.push_str(&format!("{e}"));
                }
            }
            Expr::Call(f, a) => {
                out.push_str(f.name());
                out.push('(');
                go(a, coords, out, 0);
                out.push(')');
            }
        }
        if parens {
            out.push(')');
        }
    }
    // Denominators need parens around `*` and `/` as well since `/` is
    // left-associative.
    fn go_den(e: &Expr, coords: &[&str], out: &mut String) {
        out.push('/');
        go(e, coords, out, 3);
    }
    let mut out = String::new();
    go(e, coords, &mut out, 0);
    out
}

impl fmt::Display for Expr {
    /// Rendering with `#i` placeholders for coordinates; use
    /// [`print_expression`] when coordinate names are at hand.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (0..max_coord(self).map_or(0, |m| m + 1))
            .map(|i| format!("#{i}"))
            .collect();
        let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        f.write_str(&print_expression(self, &refs))
    }
}

fn max_coord(e: &Expr) -> Option<usize> {
    match e {
        Expr::Num(_) => None,
        Expr::Coord(i) => Some(*i),
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
            match (max_coord(a), max_coord(b)) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (x, y) => x.or(y),
            }
        }
        Expr::Pow(a, _) | Expr::Neg(a) | Expr::Call(_, a) => max_coord(a),
    }
}

// ---------------------------------------------------------------------------
// Differentiation
// ---------------------------------------------------------------------------

fn is_zero(e: &Expr) -> bool {
    matches!(e, Expr::Num(v) if *v == 0.0)
}

fn is_one(e: &Expr) -> bool {
    matches!(e, Expr::Num(v) if *v == 1.0)
}

// Smart constructors folding the 0/1 cases so derivative trees stay small.
fn add(a: Expr, b: Expr) -> Expr {
    if is_zero(&a) {
        return b;
    }
    if is_zero(&b) {
        return a;
    }
    Expr::Add(Box::new(a), Box::new(b))
}

fn sub(a: Expr, b: Expr) -> Expr {
    if is_zero(&b) {
        return a;
    }
    if is_zero(&a) {
        return Expr::Neg(Box::new(b));
    }
    Expr::Sub(Box::new(a), Box::new(b))
}

fn mul(a: Expr, b: Expr) -> Expr {
    if is_zero(&a) || is_zero(&b) {
        return Expr::Num(0.0);
    }
    if is_one(&a) {
        return b;
    }
    if is_one(&b) {
        return a;
    }
    Expr::Mul(Box::new(a), Box::new(b))
}

fn div(a: Expr, b: Expr) -> Expr {
    if is_zero(&a) {
        return Expr::Num(0.0);
    }
    if is_one(&b) {
        return a;
    }
    Expr::Div(Box::new(a), Box::new(b))
}

/// Exact symbolic partial derivative with respect to coordinate `coord`.
pub fn differentiate(e: &Expr, coord: usize) -> Expr {
    match e {
        Expr::Num(_) => Expr::Num(0.0),
        Expr::Coord(i) => Expr::Num(if *i == coord { 1.0 } else { 0.0 }),
        Expr::Add(a, b) => add(differentiate(a, coord), differentiate(b, coord)),
        Expr::Sub(a, b) => sub(differentiate(a, coord), differentiate(b, coord)),
        Expr::Mul(a, b) => add(
            mul(differentiate(a, coord), (**b).clone()),
            mul((**a).clone(), differentiate(b, coord)),
        ),
        Expr::Div(a, b) => {
            // (a/b)' = a'/b - a b'/b^2
            let da = differentiate(a, coord);
            let db = differentiate(b, coord);
            sub(
                div(da, (**b).clone()),
                div(
                    mul((**a).clone(), db),
                    Expr::Pow(Box::new((**b).clone()), 2.0),
                ),
            )
        }
        Expr::Pow(a, exp) => {
            if *exp == 0.0 {
                return Expr::Num(0.0);
            }
            let da = differentiate(a, coord);
            let inner = if *exp == 1.0 {
                Expr::Num(1.0)
            } else if *exp == 2.0 {
                mul(Expr::Num(2.0), (**a).clone())
            } else {
                mul(
                    Expr::Num(*exp),
                    Expr::Pow(Box::new((**a).clone()), exp - 1.0),
                )
            };
            mul(inner, da)
        }
        Expr::Neg(a) => {
            let da = differentiate(a, coord);
            if is_zero(&da) {
                Expr::Num(0.0)
            } else {
                Expr::Neg(Box::new(da))
            }
        }
        Expr::Call(f, a) => {
            let da = differentiate(a, coord);
            if is_zero(&da) {
                return Expr::Num(0.0);
            }
            let outer = match f {
                Func::Exp => Expr::Call(Func::Exp, a.clone()),
                Func::Log => return div(da, (**a).clone()),
                Func::Sin => Expr::Call(Func::Cos, a.clone()),
                Func::Cos => Expr::Neg(Box::new(Expr::Call(Func::Sin, a.clone()))),
                Func::Tan => {
                    // tan' = 1 / cos^2
                    return div(
                        da,
                        Expr::Pow(Box::new(Expr::Call(Func::Cos, a.clone())), 2.0),
                    );
                }
                Func::Sinh => Expr::Call(Func::Cosh, a.clone()),
                Func::Cosh => Expr::Call(Func::Sinh, a.clone()),
                Func::Sqrt => {
                    return div(da, mul(Expr::Num(2.0), Expr::Call(Func::Sqrt, a.clone())));
                }
            };
            mul(outer, da)
        }
    }
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

/// Evaluates `e` at the point `p`; every value along the way must stay
/// finite and inside the real domain of the elementary functions.
pub fn evaluate(e: &Expr, p: &[f64]) -> Result<f64, EvalError> {
    let v = eval_inner(e, p)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::NonFinite)
    }
}

fn eval_inner(e: &Expr, p: &[f64]) -> Result<f64, EvalError> {
    Ok(match e {
        Expr::Num(v) => *v,
        Expr::Coord(i) => p[*i],
        Expr::Add(a, b) => eval_inner(a, p)? + eval_inner(b, p)?,
        Expr::Sub(a, b) => eval_inner(a, p)? - eval_inner(b, p)?,
        Expr::Mul(a, b) => eval_inner(a, p)? * eval_inner(b, p)?,
        Expr::Div(a, b) => {
            let den = eval_inner(b, p)?;
            if den == 0.0 {
                return Err(EvalError::DivByZero);
            }
            eval_inner(a, p)? / den
        }
        Expr::Pow(a, exp) => {
            let base = eval_inner(a, p)?;
            pow_checked(base, *exp)?
        }
        Expr::Neg(a) => -eval_inner(a, p)?,
        Expr::Call(f, a) => {
            let v = eval_inner(a, p)?;
            match f {
                Func::Exp => v.exp(),
                Func::Log => {
                    if v <= 0.0 {
                        return Err(EvalError::LogDomain { arg: v });
                    }
                    v.ln()
                }
                Func::Sin => v.sin(),
                Func::Cos => v.cos(),
                Func::Tan => v.tan(),
                Func::Sinh => v.sinh(),
                Func::Cosh => v.cosh(),
                Func::Sqrt => {
                    if v < 0.0 {
                        return Err(EvalError::SqrtDomain { arg: v });
                    }
                    v.sqrt()
                }
            }
        }
    })
}

pub(crate) fn pow_checked(base: f64, exp: f64) -> Result<f64, EvalError> {
    if exp == exp.trunc() && exp.abs() <= 1e9 {
        if base == 0.0 && exp < 0.0 {
            return Err(EvalError::DivByZero);
        }
        Ok(base.powf(exp))
    } else {
        if base < 0.0 || (base == 0.0 && exp < 0.0) {
            return Err(EvalError::PowDomain { base, exp });
        }
        Ok(base.powf(exp))
    }
}

/// Lists every coordinate index referenced by `e`, sorted.
pub fn coords_used(e: &Expr) -> Vec<usize> {
    fn walk(e: &Expr, out: &mut Vec<usize>) {
        match e {
            Expr::Num(_) => {}
            Expr::Coord(i) => {
                if !out.contains(i) {
                    out.push(*i);
                }
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                walk(a, out);
                walk(b, out);
            }
            Expr::Pow(a, _) | Expr::Neg(a) | Expr::Call(_, a) => walk(a, out),
        }
    }
    let mut out = Vec::new();
    walk(e, &mut out);
    out.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn parse(text: &str, coords: &[&str]) -> Expr {
        parse_expression(text, coords).unwrap()
    }

    /// 5-point central stencil, the independent oracle for symbolic
    /// derivatives.
    fn central_diff5(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
    }

    #[test]
    fn parses_standard_precedence() {
        let e = parse("x^2 + sin(y)", &["x", "y"]);
        assert_eq!(
            e,
            Expr::Add(
                Box::new(Expr::Pow(Box::new(Expr::Coord(0)), 2.0)),
                Box::new(Expr::Call(Func::Sin, Box::new(Expr::Coord(1))))
            )
        );
    }

    #[test]
    fn parses_constant_zero() {
        let e = parse("0", &["t"]);
        assert_eq!(e, Expr::Num(0.0));
        assert_eq!(evaluate(&e, &[123.0]).unwrap(), 0.0);
    }

    #[test]
    fn stereographic_factor_at_origin() {
        let e = parse("4/(1+x^2+y^2)^2", &["x", "y"]);
        assert_relative_eq!(evaluate(&e, &[0.0, 0.0]).unwrap(), 4.0);
    }

    #[test]
    fn unary_minus_binds_below_power() {
        let e = parse("-x^2", &["x"]);
        assert_eq!(evaluate(&e, &[3.0]).unwrap(), -9.0);
    }

    #[test]
    fn power_right_associative_and_constant_folded() {
        let e = parse("x^2^3", &["x"]);
        assert_eq!(e, Expr::Pow(Box::new(Expr::Coord(0)), 8.0));
        let e = parse("x^(1/2)", &["x"]);
        assert_eq!(e, Expr::Pow(Box::new(Expr::Coord(0)), 0.5));
        let e = parse("x^-2", &["x"]);
        assert_eq!(evaluate(&e, &[2.0]).unwrap(), 0.25);
    }

    #[test]
    fn rejects_symbolic_exponent() {
        let err = parse_expression("x^(y)", &["x", "y"]).unwrap_err();
        assert!(matches!(err, ParseError::Syntax { .. }), "{err:?}");
    }

    #[test]
    fn reports_unknown_identifier_with_position() {
        let err = parse_expression("x + foo", &["x"]).unwrap_err();
        assert_eq!(
            err,
            ParseError::UnknownIdentifier {
                pos: 4,
                name: "foo".into()
            }
        );
    }

    #[test]
    fn reports_arity_error() {
        let err = parse_expression("sin(x, y)", &["x", "y"]).unwrap_err();
        assert!(matches!(err, ParseError::Arity { got: 2, .. }), "{err:?}");
    }

    #[test]
    fn reports_syntax_error_position() {
        let err = parse_expression("x + ", &["x"]).unwrap_err();
        assert!(matches!(err, ParseError::Syntax { pos: 4, .. }), "{err:?}");
    }

    #[test]
    fn derivative_of_square() {
        let e = parse("x^2", &["x"]);
        let d = differentiate(&e, 0);
        assert_eq!(evaluate(&d, &[3.0]).unwrap(), 6.0);
    }

    #[test]
    fn derivative_of_sine_at_zero() {
        let e = parse("sin(y)", &["y"]);
        let d = differentiate(&e, 0);
        assert_eq!(evaluate(&d, &[0.0]).unwrap(), 1.0);
    }

    #[test]
    fn derivative_matches_stencil_on_rational() {
        let e = parse("4/(1+x^2)^2", &["x"]);
        let d = differentiate(&e, 0);
        let sym = evaluate(&d, &[1.0]).unwrap();
        // d/dx 4(1+x^2)^{-2} = -16x(1+x^2)^{-3}; at x=1: -16/8 = -2
        assert_relative_eq!(sym, -2.0, epsilon = 1e-12);
        let fd = central_diff5(|x| evaluate(&e, &[x]).unwrap(), 1.0, 1e-3);
        assert!(
            (sym - fd).abs() <= 1e-7 * (1.0 + sym.abs()),
            "sym={sym} fd={fd}"
        );
    }

    #[test]
    fn derivatives_match_stencil_across_functions() {
        let coords = ["x"];
        let cases = [
            ("exp(x)", 0.7),
            ("log(x)", 1.3),
            ("sin(x)", 0.4),
            ("cos(x)", 0.4),
            ("tan(x)", 0.5),
            ("sinh(x)", 0.9),
            ("cosh(x)", 0.9),
            ("sqrt(x)", 2.2),
            ("x^3 - 2*x + 1", 1.1),
            ("x/(1 + x^2)", 0.8),
            ("exp(-x^2/4)*sin(2*x)", 0.6),
        ];
        for (src, x0) in cases {
            let e = parse(src, &coords);
            let d = differentiate(&e, 0);
            let sym = evaluate(&d, &[x0]).unwrap();
            let fd = central_diff5(|x| evaluate(&e, &[x]).unwrap(), x0, 1e-4);
            assert!(
                (sym - fd).abs() <= 1e-6 * (1.0 + sym.abs()),
                "{src} at {x0}: sym={sym} fd={fd}"
            );
        }
    }

    #[test]
    fn evaluation_domain_errors() {
        let coords = ["x"];
        assert!(matches!(
            evaluate(&parse("log(x)", &coords), &[-1.0]),
            Err(EvalError::LogDomain { .. })
        ));
        assert!(matches!(
            evaluate(&parse("sqrt(x)", &coords), &[-1.0]),
            Err(EvalError::SqrtDomain { .. })
        ));
        assert!(matches!(
            evaluate(&parse("1/x", &coords), &[0.0]),
            Err(EvalError::DivByZero)
        ));
        assert!(matches!(
            evaluate(&parse("x^0.5", &coords), &[-2.0]),
            Err(EvalError::PowDomain { .. })
        ));
    }

    #[test]
    fn printer_round_trips() {
        let coords = ["x", "y", "t"];
        let sources = [
            "x^2 + sin(y)",
            "4/(1+x^2+y^2)^2",
            "-x^2 - -y",
            "(x + y)*(x - y)/(1 + t^2)",
            "exp(-(x^2 + y^2)/4)*cos(t)",
            "2*sin(x)^2*cos(y)^2",
            "x^-2 + t^0.5",
            "1e-3*x + 2.5E2",
            "x/(y*t)/2",
            "x - (y - t)",
        ];
        for src in sources {
            let e = parse(src, &coords);
            let printed = print_expression(&e, &coords);
            let reparsed = parse(&printed, &coords);
            assert_eq!(e, reparsed, "printed as `{printed}`");
        }
    }

    proptest::proptest! {
        /// Random expression trees round-trip through print + parse.
        #[test]
        fn printer_round_trips_random(e in arb_expr()) {
            let coords = ["x", "y", "z"];
            let printed = print_expression(&e, &coords);
            let reparsed = parse_expression(&printed, &coords).unwrap();
            // The parser folds negated literals, so normalize before comparing.
            proptest::prop_assert_eq!(fold_neg_nums(e), reparsed);
        }
    }

    fn fold_neg_nums(e: Expr) -> Expr {
        fn b(e: Expr) -> Box<Expr> {
            Box::new(fold_neg_nums(e))
        }
        match e {
            Expr::Neg(a) => match fold_neg_nums(*a) {
                Expr::Num(v) => Expr::Num(-v),
                other => Expr::Neg(Box::new(other)),
            },
            Expr::Add(x, y) => Expr::Add(b(*x), b(*y)),
            Expr::Sub(x, y) => Expr::Sub(b(*x), b(*y)),
            Expr::Mul(x, y) => Expr::Mul(b(*x), b(*y)),
            Expr::Div(x, y) => Expr::Div(b(*x), b(*y)),
            Expr::Pow(x, p) => Expr::Pow(b(*x), p),
            Expr::Call(f, x) => Expr::Call(f, b(*x)),
            leaf => leaf,
        }
    }

    fn arb_expr() -> impl proptest::strategy::Strategy<Value = Expr> {
        use proptest::prelude::*;
        let leaf = prop_oneof![
            (0.0..10.0f64).prop_map(Expr::Num),
            (0usize..3).prop_map(Expr::Coord),
        ];
        leaf.prop_recursive(3, 24, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Expr::Add(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Expr::Sub(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Expr::Mul(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Expr::Div(Box::new(a), Box::new(b))),
                (inner.clone(), -3.0..3.0f64).prop_map(|(a, e)| Expr::Pow(Box::new(a), e)),
                inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
                (inner, 0usize..8).prop_map(|(a, f)| Expr::Call(Func::ALL[f], Box::new(a))),
            ]
        })
    }
}
