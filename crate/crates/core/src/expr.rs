//! Expression grammar for metric entries and sections.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?
//! atom   := number | 'i' | 'pi' | 'z'k | 'zb'k | func '(' expr ')' | '(' expr ')'
//! func   := exp | log | sqrt | conj
//! ```
//! `z1..zn` are the chart coordinates and `zb1..zbn` their conjugates.
//! Constant subexpressions are folded while parsing.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grassmann::Coeff;
use crate::jets::{Jet, JetSpace};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sqrt,
    Conj,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Conj => "conj",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(Complex64),
    Z(usize),
    Zb(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        let mut p = Parser {
            chars: src.chars().collect(),
            pos: 0,
        };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos < p.chars.len() {
            return Err(p.error(format!("unexpected '{}'", p.chars[p.pos])));
        }
        Ok(e)
    }

    pub fn constant(c: Complex64) -> Expr {
        Expr::Num(c)
    }

    /// Largest coordinate index used, plus one.
    pub fn dim(&self) -> usize {
        match self {
            Expr::Num(_) => 0,
            Expr::Z(i) | Expr::Zb(i) => i + 1,
            Expr::Neg(a) | Expr::Call(_, a) => a.dim(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.dim().max(b.dim())
            }
        }
    }

    /// True when no `zb` or `conj` occurs.
    pub fn is_syntactically_holomorphic(&self) -> bool {
        match self {
            Expr::Num(_) | Expr::Z(_) => true,
            Expr::Zb(_) | Expr::Call(Func::Conj, _) => false,
            Expr::Neg(a) | Expr::Call(_, a) => a.is_syntactically_holomorphic(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.is_syntactically_holomorphic() && b.is_syntactically_holomorphic()
            }
        }
    }

    pub fn eval(&self, z: &[Complex64]) -> Result<Complex64> {
        Ok(match self {
            Expr::Num(c) => *c,
            Expr::Z(i) => *coord(z, *i)?,
            Expr::Zb(i) => coord(z, *i)?.conj(),
            Expr::Neg(a) => -a.eval(z)?,
            Expr::Add(a, b) => a.eval(z)? + b.eval(z)?,
            Expr::Sub(a, b) => a.eval(z)? - b.eval(z)?,
            Expr::Mul(a, b) => a.eval(z)? * b.eval(z)?,
            Expr::Div(a, b) => a.eval(z)? / b.eval(z)?,
            Expr::Pow(a, b) => {
                let base = a.eval(z)?;
                match as_natural(b) {
                    Some(k) => base.powi(k as i32),
                    None => base.powc(b.eval(z)?),
                }
            }
            Expr::Call(f, a) => {
                let x = a.eval(z)?;
                match f {
                    Func::Exp => x.exp(),
                    Func::Log => x.ln(),
                    Func::Sqrt => x.sqrt(),
                    Func::Conj => x.conj(),
                }
            }
        })
    }

    pub fn jet(&self, space: &Arc<JetSpace>) -> Result<Jet> {
        Ok(match self {
            Expr::Num(c) => space.constant(*c),
            Expr::Z(i) => {
                check_dim(space, *i)?;
                space.z(*i)
            }
            Expr::Zb(i) => {
                check_dim(space, *i)?;
                space.zbar(*i)
            }
            Expr::Neg(a) => a.jet(space)?.neg(),
            Expr::Add(a, b) => a.jet(space)?.add(&b.jet(space)?),
            Expr::Sub(a, b) => a.jet(space)?.sub(&b.jet(space)?),
            Expr::Mul(a, b) => a.jet(space)?.mul(&b.jet(space)?),
            Expr::Div(a, b) => a.jet(space)?.mul(&b.jet(space)?.inv()?),
            Expr::Pow(a, b) => {
                let base = a.jet(space)?;
                match as_natural(b) {
                    Some(k) => base.powi(k),
                    None => match b.as_const() {
                        Some(mu) => base.powc(mu)?,
                        None => base.log()?.mul(&b.jet(space)?).exp_jet(),
                    },
                }
            }
            Expr::Call(f, a) => {
                let x = a.jet(space)?;
                match f {
                    Func::Exp => x.exp_jet(),
                    Func::Log => x.log()?,
                    Func::Sqrt => x.sqrt()?,
                    Func::Conj => x.conj(),
                }
            }
        })
    }

    fn as_const(&self) -> Option<Complex64> {
        match self {
            Expr::Num(c) => Some(*c),
            _ => None,
        }
    }
}

fn coord(z: &[Complex64], i: usize) -> Result<&Complex64> {
    z.get(i).ok_or_else(|| {
        Error::InvalidArgument(format!("coordinate z{} used in dimension {}", i + 1, z.len()))
    })
}

fn check_dim(space: &JetSpace, i: usize) -> Result<()> {
    if i >= space.dim() {
        return Err(Error::InvalidArgument(format!(
            "coordinate z{} used in dimension {}",
            i + 1,
            space.dim()
        )));
    }
    Ok(())
}

fn as_natural(e: &Expr) -> Option<u32> {
    match e {
        Expr::Num(c) if c.im == 0.0 && c.re >= 0.0 && c.re.fract() == 0.0 && c.re <= 64.0 => {
            Some(c.re as u32)
        }
        _ => None,
    }
}

fn fmt_num(c: Complex64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let real = |x: f64, f: &mut fmt::Formatter<'_>| {
        if x < 0.0 || (x == 0.0 && x.is_sign_negative()) {
            write!(f, "(-{:?})", -x)
        } else {
            write!(f, "{:?}", x)
        }
    };
    if c.im == 0.0 {
        real(c.re, f)
    } else if c.re == 0.0 && !c.re.is_sign_negative() {
        write!(f, "(")?;
        real(c.im, f)?;
        write!(f, "*i)")
    } else {
        write!(f, "(")?;
        real(c.re, f)?;
        write!(f, "+")?;
        real(c.im, f)?;
        write!(f, "*i)")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(c) => fmt_num(*c, f),
            Expr::Z(i) => write!(f, "z{}", i + 1),
            Expr::Zb(i) => write!(f, "zb{}", i + 1),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, b) => write!(f, "({a} ^ {b})"),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn error(&self, message: String) -> Error {
        Error::Parse {
            line: 1,
            column: self.pos + 1,
            message,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(c) = self.peek() {
            if c != '+' && c != '-' {
                break;
            }
            self.pos += 1;
            let rhs = self.term()?;
            lhs = fold(if c == '+' {
                Expr::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Sub(Box::new(lhs), Box::new(rhs))
            });
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(c) = self.peek() {
            if c != '*' && c != '/' {
                break;
            }
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = fold(if c == '*' {
                Expr::Mul(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Div(Box::new(lhs), Box::new(rhs))
            });
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek() == Some('-') {
            self.pos += 1;
            let inner = self.unary()?;
            return Ok(fold(Expr::Neg(Box::new(inner))));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek() == Some('^') {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(fold(Expr::Pow(Box::new(base), Box::new(exp))));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let c = match self.peek() {
            Some(c) => c,
            None => return Err(self.error("unexpected end of expression".into())),
        };
        if c == '(' {
            self.pos += 1;
            let e = self.expr()?;
            if self.peek() != Some(')') {
                return Err(self.error("expected ')'".into()));
            }
            self.pos += 1;
            return Ok(e);
        }
        if c.is_ascii_digit() || c == '.' {
            return self.number();
        }
        if c.is_ascii_alphabetic() {
            let start = self.pos;
            while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_alphanumeric() {
                self.pos += 1;
            }
            let word: String = self.chars[start..self.pos].iter().collect();
            return self.identifier(&word, start);
        }
        Err(self.error(format!("unexpected '{c}'")))
    }

    fn identifier(&mut self, word: &str, start: usize) -> Result<Expr> {
        let index = |digits: &str| -> Option<usize> {
            let k: usize = digits.parse().ok()?;
            (k >= 1).then_some(k - 1)
        };
        match word {
            "i" => return Ok(Expr::Num(Complex64::new(0.0, 1.0))),
            "pi" => return Ok(Expr::Num(Complex64::new(std::f64::consts::PI, 0.0))),
            "exp" | "log" | "sqrt" | "conj" => {
                let func = match word {
                    "exp" => Func::Exp,
                    "log" => Func::Log,
                    "sqrt" => Func::Sqrt,
                    _ => Func::Conj,
                };
                if self.peek() != Some('(') {
                    return Err(self.error(format!("expected '(' after {word}")));
                }
                self.pos += 1;
                let arg = self.expr()?;
                if self.peek() != Some(')') {
                    return Err(self.error("expected ')'".into()));
                }
                self.pos += 1;
                return Ok(fold(Expr::Call(func, Box::new(arg))));
            }
            _ => {}
        }
        if let Some(rest) = word.strip_prefix("zb") {
            if let Some(k) = index(rest) {
                return Ok(Expr::Zb(k));
            }
        } else if let Some(rest) = word.strip_prefix('z') {
            if let Some(k) = index(rest) {
                return Ok(Expr::Z(k));
            }
        }
        self.pos = start;
        Err(self.error(format!("unknown identifier '{word}'")))
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        let digits = |p: &mut Parser| {
            while p.pos < p.chars.len() && p.chars[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
        };
        digits(self);
        if self.pos < self.chars.len() && self.chars[self.pos] == '.' {
            self.pos += 1;
            digits(self);
        }
        if self.pos < self.chars.len() && (self.chars[self.pos] == 'e' || self.chars[self.pos] == 'E') {
            let save = self.pos;
            self.pos += 1;
            if self.pos < self.chars.len() && (self.chars[self.pos] == '+' || self.chars[self.pos] == '-') {
                self.pos += 1;
            }
            if self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
                digits(self);
            } else {
                self.pos = save;
            }
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        text.parse::<f64>()
            .map(|x| Expr::Num(Complex64::new(x, 0.0)))
            .map_err(|_| {
                self.pos = start;
                self.error(format!("bad number '{text}'"))
            })
    }
}

fn fold(e: Expr) -> Expr {
    use Expr::*;
    let folded = match &e {
        Neg(a) => a.as_const().map(|x| -x),
        Add(a, b) => a.as_const().zip(b.as_const()).map(|(x, y)| x + y),
        Sub(a, b) => a.as_const().zip(b.as_const()).map(|(x, y)| x - y),
        Mul(a, b) => a.as_const().zip(b.as_const()).map(|(x, y)| x * y),
        Div(a, b) => a.as_const().zip(b.as_const()).map(|(x, y)| x / y),
        Pow(a, b) => match (a.as_const(), as_natural(b)) {
            (Some(x), Some(k)) => Some(x.powi(k as i32)),
            (Some(x), None) => b.as_const().map(|y| x.powc(y)),
            _ => None,
        },
        Call(f, a) => a.as_const().map(|x| match f {
            Func::Exp => x.exp(),
            Func::Log => x.ln(),
            Func::Sqrt => x.sqrt(),
            Func::Conj => x.conj(),
        }),
        _ => None,
    };
    folded.map(Num).unwrap_or(e)
}

/// Sparse polynomial in `z_1..z_n` with complex coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    n: usize,
    terms: BTreeMap<Vec<u32>, Complex64>,
}

impl Poly {
    pub fn zero(n: usize) -> Poly {
        Poly {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: Complex64) -> Poly {
        let mut p = Poly::zero(n);
        p.push(vec![0; n], c);
        p
    }

    pub fn var(n: usize, i: usize) -> Poly {
        let mut e = vec![0; n];
        e[i] = 1;
        let mut p = Poly::zero(n);
        p.push(e, Complex64::new(1.0, 0.0));
        p
    }

    fn push(&mut self, e: Vec<u32>, c: Complex64) {
        let slot = self.terms.entry(e).or_insert(Complex64::new(0.0, 0.0));
        *slot += c;
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Complex64)> {
        self.terms.iter().filter(|t| t.1.norm() != 0.0)
    }

    pub fn degree(&self) -> u32 {
        self.terms()
            .map(|(e, _)| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    /// Converts a holomorphic polynomial expression.
    pub fn from_expr(e: &Expr, n: usize) -> Result<Poly> {
        let unsupported =
            |what: &str| Error::Unsupported(format!("{what} in a polynomial section entry"));
        Ok(match e {
            Expr::Num(c) => Poly::constant(n, *c),
            Expr::Z(i) if *i < n => Poly::var(n, *i),
            Expr::Z(i) => {
                return Err(Error::InvalidArgument(format!(
                    "coordinate z{} used in dimension {n}",
                    i + 1
                )))
            }
            Expr::Zb(_) => return Err(unsupported("zb")),
            Expr::Neg(a) => Poly::from_expr(a, n)?.scale(Complex64::new(-1.0, 0.0)),
            Expr::Add(a, b) => Poly::from_expr(a, n)?.add(&Poly::from_expr(b, n)?),
            Expr::Sub(a, b) => Poly::from_expr(a, n)?
                .add(&Poly::from_expr(b, n)?.scale(Complex64::new(-1.0, 0.0))),
            Expr::Mul(a, b) => Poly::from_expr(a, n)?.mul(&Poly::from_expr(b, n)?),
            Expr::Div(a, b) => match b.as_const() {
                Some(c) => Poly::from_expr(a, n)?.scale(1.0 / c),
                None => return Err(unsupported("division")),
            },
            Expr::Pow(a, b) => match as_natural(b) {
                Some(k) => {
                    let base = Poly::from_expr(a, n)?;
                    let mut out = Poly::constant(n, Complex64::new(1.0, 0.0));
                    for _ in 0..k {
                        out = out.mul(&base);
                    }
                    out
                }
                None => return Err(unsupported("non-integer power")),
            },
            Expr::Call(f, _) => return Err(unsupported(f.name())),
        })
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.push(e.clone(), *c);
        }
        out
    }

    pub fn scale(&self, c: Complex64) -> Poly {
        Poly {
            n: self.n,
            terms: self.terms.iter().map(|(e, x)| (e.clone(), x * c)).collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero(self.n);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                out.push(e, ca * cb);
            }
        }
        out
    }

    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        self.terms()
            .map(|(e, c)| {
                e.iter()
                    .zip(z)
                    .fold(*c, |acc, (&k, x)| acc * x.powi(k as i32))
            })
            .sum()
    }

    pub fn jet(&self, space: &Arc<JetSpace>) -> Result<Jet> {
        if space.dim() != self.n {
            return Err(Error::InvalidArgument(format!(
                "polynomial in {} variables expanded in dimension {}",
                self.n,
                space.dim()
            )));
        }
        let maxdeg = self
            .terms()
            .flat_map(|(e, _)| e.iter().copied())
            .max()
            .unwrap_or(0);
        let powers: Vec<Vec<Jet>> = (0..self.n)
            .map(|i| {
                let z = space.z(i);
                let mut row = vec![space.constant(Complex64::new(1.0, 0.0))];
                for k in 1..=maxdeg as usize {
                    let next = row[k - 1].mul(&z);
                    row.push(next);
                }
                row
            })
            .collect();
        let mut acc = space.constant(Complex64::new(0.0, 0.0));
        for (e, c) in self.terms() {
            let mut t = space.constant(*c);
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    t = t.mul(&powers[i][k as usize]);
                }
            }
            acc = acc.add(&t);
        }
        Ok(acc)
    }

    /// `z_0^d P(z'/z_0)` as a polynomial in `z_0..z_n`; requires `deg P ≤ d`.
    pub fn homogenize(&self, d: u32) -> Result<Poly> {
        if self.degree() > d {
            return Err(Error::InvalidArgument(format!(
                "polynomial of degree {} declared with degree {d}",
                self.degree()
            )));
        }
        let mut out = Poly::zero(self.n + 1);
        for (e, c) in self.terms() {
            let mut h = vec![d - e.iter().sum::<u32>()];
            h.extend_from_slice(e);
            out.push(h, *c);
        }
        Ok(out)
    }

    /// Restriction of a homogeneous polynomial to the chart `z_i = 1`.
    pub fn dehomogenize(&self, chart: usize) -> Poly {
        let mut out = Poly::zero(self.n - 1);
        for (e, c) in self.terms() {
            let mut a = e.clone();
            a.remove(chart);
            out.push(a, *c);
        }
        out
    }

    pub fn to_expr(&self) -> Expr {
        let mut acc: Option<Expr> = None;
        for (e, c) in self.terms() {
            let mut t = Expr::Num(*c);
            for (i, &k) in e.iter().enumerate() {
                let v = Expr::Z(i);
                let f = if k == 1 {
                    v
                } else {
                    Expr::Pow(Box::new(v), Box::new(Expr::Num(Complex64::new(k as f64, 0.0))))
                };
                if k > 0 {
                    t = Expr::Mul(Box::new(t), Box::new(f));
                }
            }
            acc = Some(match acc {
                None => t,
                Some(a) => Expr::Add(Box::new(a), Box::new(t)),
            });
        }
        acc.unwrap_or(Expr::Num(Complex64::new(0.0, 0.0)))
    }
}
