//! Metric-entry expressions: a small recursive-descent parser and an
//! evaluator generic over forward-mode dual numbers.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Scalar field the evaluator and the coframe construction run over.
pub trait Real:
    Copy
    + fmt::Debug
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn cst(x: f64) -> Self;
    fn value(&self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn sinh(self) -> Self;
    fn cosh(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;

    fn powi(self, n: i32) -> Self {
        let mut acc = Self::cst(1.0);
        for _ in 0..n.unsigned_abs() {
            acc = acc * self;
        }
        if n < 0 {
            Self::cst(1.0) / acc
        } else {
            acc
        }
    }

    fn powr(self, e: Self) -> Self {
        (e * self.ln()).exp()
    }
}

impl Real for f64 {
    fn cst(x: f64) -> Self {
        x
    }
    fn value(&self) -> f64 {
        *self
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn sinh(self) -> Self {
        f64::sinh(self)
    }
    fn cosh(self) -> Self {
        f64::cosh(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
    fn powr(self, e: Self) -> Self {
        f64::powf(self, e)
    }
}

/// `re + du * eps` with `eps^2 = 0`. Nesting gives mixed second derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<T> {
    pub re: T,
    pub du: T,
}

impl<T: Real> Dual<T> {
    pub fn new(re: T, du: T) -> Self {
        Self { re, du }
    }

    pub fn variable(re: T) -> Self {
        Self {
            re,
            du: T::cst(1.0),
        }
    }

    pub fn constant(re: T) -> Self {
        Self {
            re,
            du: T::cst(0.0),
        }
    }
}

impl<T: Real> Add for Dual<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.re + o.re, self.du + o.du)
    }
}

impl<T: Real> Sub for Dual<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.re - o.re, self.du - o.du)
    }
}

impl<T: Real> Mul for Dual<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(self.re * o.re, self.du * o.re + self.re * o.du)
    }
}

impl<T: Real> Div for Dual<T> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let q = self.re / o.re;
        Self::new(q, (self.du - q * o.du) / o.re)
    }
}

impl<T: Real> Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.re, -self.du)
    }
}

impl<T: Real> Real for Dual<T> {
    fn cst(x: f64) -> Self {
        Self::constant(T::cst(x))
    }
    fn value(&self) -> f64 {
        self.re.value()
    }
    fn sin(self) -> Self {
        Self::new(self.re.sin(), self.du * self.re.cos())
    }
    fn cos(self) -> Self {
        Self::new(self.re.cos(), -(self.du * self.re.sin()))
    }
    fn sinh(self) -> Self {
        Self::new(self.re.sinh(), self.du * self.re.cosh())
    }
    fn cosh(self) -> Self {
        Self::new(self.re.cosh(), self.du * self.re.sinh())
    }
    fn exp(self) -> Self {
        let e = self.re.exp();
        Self::new(e, self.du * e)
    }
    fn ln(self) -> Self {
        Self::new(self.re.ln(), self.du / self.re)
    }
    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        Self::new(s, self.du / (T::cst(2.0) * s))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Sinh,
    Cosh,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    fn apply<T: Real>(self, x: T) -> T {
        match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Sinh => x.sinh(),
            Func::Cosh => x.cosh(),
            Func::Exp => x.exp(),
            Func::Log => x.ln(),
            Func::Sqrt => x.sqrt(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Const(f64),
    Var(usize),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    /// Integer exponents are kept apart so negative bases stay well defined.
    PowInt(Box<Node>, i32),
    Pow(Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

impl Node {
    fn eval<T: Real>(&self, vars: &[T]) -> T {
        match self {
            Node::Const(c) => T::cst(*c),
            Node::Var(i) => vars[*i],
            Node::Neg(a) => -a.eval(vars),
            Node::Add(a, b) => a.eval(vars) + b.eval(vars),
            Node::Sub(a, b) => a.eval(vars) - b.eval(vars),
            Node::Mul(a, b) => a.eval(vars) * b.eval(vars),
            Node::Div(a, b) => a.eval(vars) / b.eval(vars),
            Node::PowInt(a, n) => a.eval(vars).powi(*n),
            Node::Pow(a, b) => a.eval(vars).powr(b.eval(vars)),
            Node::Call(f, a) => f.apply(a.eval(vars)),
        }
    }
}

/// A parsed expression together with its source text and variable names.
#[derive(Clone, Debug, PartialEq)]
pub struct Expression {
    source: String,
    variables: Vec<String>,
    root: Node,
}

impl Expression {
    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn eval<T: Real>(&self, vars: &[T]) -> T {
        assert_eq!(vars.len(), self.variables.len(), "variable count mismatch");
        self.root.eval(vars)
    }

    /// Value and exact gradient at `x`.
    pub fn gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let mut grad = Vec::with_capacity(x.len());
        let mut value = 0.0;
        for k in 0..x.len() {
            let seeded: Vec<Dual<f64>> = x
                .iter()
                .enumerate()
                .map(|(i, &xi)| Dual::new(xi, if i == k { 1.0 } else { 0.0 }))
                .collect();
            let r = self.eval(&seeded);
            value = r.re;
            grad.push(r.du);
        }
        if x.is_empty() {
            value = self.eval::<f64>(&[]);
        }
        (value, grad)
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    End,
}

struct Parser<'a> {
    vars: &'a [String],
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
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
            let text = &src[start..i];
            let v: f64 = text.parse().map_err(|_| Error::ParseError {
                offset: start,
                message: format!("malformed number '{text}'"),
            })?;
            out.push((Tok::Num(v), start));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), start));
        } else if "+-*/^()".contains(c) {
            out.push((Tok::Op(c), i));
            i += 1;
        } else {
            return Err(Error::ParseError {
                offset: i,
                message: format!("unexpected character '{c}'"),
            });
        }
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::ParseError {
            offset: self.offset(),
            message: message.into(),
        })
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Op('+') => {
                    self.bump();
                    lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Op('-') => {
                    self.bump();
                    lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Op('*') => {
                    self.bump();
                    lhs = Node::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Tok::Op('/') => {
                    self.bump();
                    lhs = Node::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Node> {
        if let Tok::Op('-') = self.peek() {
            self.bump();
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.primary()?;
        if let Tok::Op('^') = self.peek() {
            self.bump();
            let exponent = self.unary()?;
            return Ok(match integer_exponent(&exponent) {
                Some(n) => Node::PowInt(Box::new(base), n),
                None => Node::Pow(Box::new(base), Box::new(exponent)),
            });
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Node> {
        let (tok, at) = self.bump();
        match tok {
            Tok::Num(v) => Ok(Node::Const(v)),
            Tok::Op('(') => {
                let inner = self.expr()?;
                self.expect_close()?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                if let Some(i) = self.vars.iter().position(|v| *v == name) {
                    return Ok(Node::Var(i));
                }
                if name == "pi" {
                    return Ok(Node::Const(std::f64::consts::PI));
                }
                if let Some(f) = Func::from_name(&name) {
                    if !matches!(self.peek(), Tok::Op('(')) {
                        return self.error(format!("expected '(' after '{name}'"));
                    }
                    self.bump();
                    let arg = self.expr()?;
                    self.expect_close()?;
                    return Ok(Node::Call(f, Box::new(arg)));
                }
                Err(Error::UnknownSymbol { name, offset: at })
            }
            Tok::End => Err(Error::ParseError {
                offset: at,
                message: "unexpected end of input".into(),
            }),
            Tok::Op(c) => Err(Error::ParseError {
                offset: at,
                message: format!("unexpected '{c}'"),
            }),
        }
    }

    fn expect_close(&mut self) -> Result<()> {
        if let Tok::Op(')') = self.peek() {
            self.bump();
            Ok(())
        } else {
            self.error("expected ')'")
        }
    }
}

fn integer_exponent(node: &Node) -> Option<i32> {
    let v = match node {
        Node::Const(c) => *c,
        Node::Neg(inner) => match inner.as_ref() {
            Node::Const(c) => -*c,
            _ => return None,
        },
        _ => return None,
    };
    (v.fract() == 0.0 && v.abs() <= 64.0).then_some(v as i32)
}

/// Parses `src` over the given variable names.
///
/// Precedence from tightest: `^` (right-associative), unary minus, `* /`,
/// `+ -`. So `-u^2` is `-(u^2)`.
pub fn parse_expression(src: &str, variables: &[&str]) -> Result<Expression> {
    let vars: Vec<String> = variables.iter().map(|s| s.to_string()).collect();
    let toks = lex(src)?;
    let mut p = Parser {
        vars: &vars,
        toks,
        pos: 0,
    };
    let root = p.expr()?;
    if !matches!(p.peek(), Tok::End) {
        return p.error("unexpected trailing input");
    }
    Ok(Expression {
        source: src.to_string(),
        variables: vars,
        root,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn uv(src: &str) -> Expression {
        parse_expression(src, &["u", "v"]).unwrap()
    }

    #[test]
    fn sum_of_squares() {
        assert_eq!(uv("u^2+v^2").eval(&[1.0, 1.0]), 2.0);
    }

    #[test]
    fn product_rule() {
        let (val, grad) = uv("u*v").gradient(&[3.0, 5.0]);
        assert_eq!(val, 15.0);
        assert_eq!(grad, vec![5.0, 3.0]);
    }

    #[test]
    fn unclosed_parenthesis_reports_end_offset() {
        let err = parse_expression("2*(u+", &["u"]).unwrap_err();
        assert!(
            matches!(err, Error::ParseError { offset: 5, .. }),
            "{err:?}"
        );
    }

    #[test]
    fn unknown_identifier() {
        let err = parse_expression("u + w", &["u"]).unwrap_err();
        assert_eq!(
            err,
            Error::UnknownSymbol {
                name: "w".into(),
                offset: 4
            }
        );
    }

    #[test]
    fn precedence() {
        assert_eq!(uv("-u^2").eval(&[3.0, 0.0]), -9.0);
        assert_eq!(uv("2^3^2").eval(&[0.0, 0.0]), 512.0);
        assert_eq!(uv("1-2-3").eval(&[0.0, 0.0]), -4.0);
        assert_eq!(uv("8/2/2").eval(&[0.0, 0.0]), 2.0);
        assert_eq!(uv("2*-u").eval(&[3.0, 0.0]), -6.0);
        assert_eq!(uv("u^-1").eval(&[4.0, 0.0]), 0.25);
    }

    #[test]
    fn negative_base_with_integer_power() {
        assert_eq!(uv("u^3").eval(&[-2.0, 0.0]), -8.0);
        let (_, g) = uv("u^2").gradient(&[-3.0, 0.0]);
        assert_eq!(g[0], -6.0);
    }

    #[test]
    fn constants_and_functions() {
        let e = uv("sin(pi/2) + cos(0) + exp(0) + log(1) + sqrt(4) + sinh(0) + cosh(0)");
        assert!((e.eval(&[0.0, 0.0]) - 6.0).abs() < 1e-15);
        assert_eq!(uv("1.5e2").eval(&[0.0, 0.0]), 150.0);
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        assert!(matches!(
            parse_expression("u +* v", &["u", "v"]),
            Err(Error::ParseError { offset: 3, .. })
        ));
        assert!(matches!(
            parse_expression("u v", &["u", "v"]),
            Err(Error::ParseError { offset: 2, .. })
        ));
        assert!(matches!(
            parse_expression("sin u", &["u"]),
            Err(Error::ParseError { offset: 4, .. })
        ));
        assert!(matches!(
            parse_expression("u $ 2", &["u"]),
            Err(Error::ParseError { offset: 2, .. })
        ));
    }

    #[test]
    fn second_derivative_by_nesting() {
        let e = uv("sin(u)*v^2");
        let x = [
            Dual::new(Dual::new(0.7, 1.0), Dual::new(1.0, 0.0)),
            Dual::cst(2.0),
        ];
        let r = e.eval(&x);
        // d2/du2 of sin(u) v^2 = -sin(u) v^2
        assert!((r.du.du + 0.7f64.sin() * 4.0).abs() < 1e-14);
    }

    const SAMPLES: &[&str] = &[
        "u^2+v^2",
        "sin(u)*cosh(v)",
        "exp(u*v)/(1+u^2)",
        "sqrt(1+u^2+v^2)",
        "log(2+sin(u)) - v^3",
        "1/(u^2+v^2)",
        "(1+0.3*u^2)*sin(u)^2",
        "u^v",
        "sinh(u)-cos(v)",
    ];

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn dual_gradient_matches_central_difference(
            idx in 0..SAMPLES.len(),
            u in 0.3f64..2.0,
            v in 0.3f64..2.0,
        ) {
            let e = uv(SAMPLES[idx]);
            let (_, grad) = e.gradient(&[u, v]);
            let h = 1e-5;
            for k in 0..2 {
                let mut xp = [u, v];
                let mut xm = [u, v];
                xp[k] += h;
                xm[k] -= h;
                let fd = (e.eval(&xp) - e.eval(&xm)) / (2.0 * h);
                prop_assert!((fd - grad[k]).abs() <= 1e-6 * (1.0 + grad[k].abs()));
            }
        }

        #[test]
        fn evaluation_is_deterministic(idx in 0..SAMPLES.len(), u in 0.3f64..2.0, v in 0.3f64..2.0) {
            let e = uv(SAMPLES[idx]);
            prop_assert_eq!(e.eval(&[u, v]).to_bits(), e.eval(&[u, v]).to_bits());
        }
    }
}
