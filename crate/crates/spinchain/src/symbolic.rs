//! Exact phases: rational linear combinations of π, the composite-pulse angles
//! and named pulse phases.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_rational::Rational64;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::CompositeParams;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Symbol {
    Theta,
    CapTheta,
    Gamma,
    ThetaRho,
    CapThetaRho,
    GammaRho,
    Phase(String),
}

impl Symbol {
    fn parse_ident(s: &str) -> Symbol {
        match s {
            "theta" | "θ" => Symbol::Theta,
            "Theta" | "Θ" => Symbol::CapTheta,
            "gamma" | "γ" => Symbol::Gamma,
            "theta_r" | "θ_ρ" => Symbol::ThetaRho,
            "Theta_r" | "Θ_ρ" => Symbol::CapThetaRho,
            "gamma_r" | "γ_ρ" => Symbol::GammaRho,
            other => Symbol::Phase(other.to_string()),
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Theta => f.write_str("θ"),
            Symbol::CapTheta => f.write_str("Θ"),
            Symbol::Gamma => f.write_str("γ"),
            Symbol::ThetaRho => f.write_str("θ_ρ"),
            Symbol::CapThetaRho => f.write_str("Θ_ρ"),
            Symbol::GammaRho => f.write_str("γ_ρ"),
            Symbol::Phase(name) => f.write_str(name),
        }
    }
}

/// `pi·π + Σ c_s·s`; zero coefficients are never stored, so structural
/// equality is exact equality.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct SymbolicPhase {
    pi: Rational64,
    terms: BTreeMap<Symbol, Rational64>,
}

impl SymbolicPhase {
    pub fn zero() -> Self {
        Self::default()
    }

    /// `num/den`·π.
    pub fn pi(num: i64, den: i64) -> Self {
        SymbolicPhase { pi: Rational64::new(num, den), terms: BTreeMap::new() }
    }

    pub fn symbol(s: Symbol) -> Self {
        Self::zero().with_term(s, Rational64::one())
    }

    pub fn named(name: &str) -> Self {
        Self::symbol(Symbol::Phase(name.to_string()))
    }

    pub fn theta() -> Self {
        Self::symbol(Symbol::Theta)
    }

    pub fn cap_theta() -> Self {
        Self::symbol(Symbol::CapTheta)
    }

    pub fn gamma() -> Self {
        Self::symbol(Symbol::Gamma)
    }

    fn with_term(mut self, s: Symbol, c: Rational64) -> Self {
        self.add_term(s, c);
        self
    }

    fn add_term(&mut self, s: Symbol, c: Rational64) {
        let entry = self.terms.entry(s.clone()).or_insert_with(Rational64::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&s);
        }
    }

    pub fn pi_coefficient(&self) -> Rational64 {
        self.pi
    }

    pub fn coefficient(&self, s: &Symbol) -> Rational64 {
        self.terms.get(s).copied().unwrap_or_else(Rational64::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Symbol, &Rational64)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.pi.is_zero() && self.terms.is_empty()
    }

    /// No symbols, only a multiple of π.
    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self, c: Rational64) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        SymbolicPhase { pi: self.pi * c, terms: self.terms.iter().map(|(s, v)| (s.clone(), v * c)).collect() }
    }

    /// Constant part folded into (−π, π].
    pub fn reduced(&self) -> Self {
        let two = Rational64::from_integer(2);
        let mut pi = self.pi - two * (self.pi / two).floor();
        if pi > Rational64::one() {
            pi -= two;
        }
        SymbolicPhase { pi, terms: self.terms.clone() }
    }

    /// Equal as phases: identical symbolic parts, constants equal mod 2π.
    pub fn equivalent(&self, other: &Self) -> bool {
        (self.clone() - other.clone()).reduced().is_zero()
    }

    pub fn named_phases(&self) -> Vec<String> {
        self.terms
            .keys()
            .filter_map(|s| match s {
                Symbol::Phase(n) => Some(n.clone()),
                _ => None,
            })
            .collect()
    }

    /// Replaces the named phase by an expression.
    pub fn substitute(&self, name: &str, value: &SymbolicPhase) -> Self {
        let key = Symbol::Phase(name.to_string());
        let mut out = self.clone();
        if let Some(c) = out.terms.remove(&key) {
            out += value.scale(c);
        }
        out
    }

    pub fn eval(&self, values: &PhaseValues) -> Result<f64> {
        let mut total = rat_f64(self.pi) * std::f64::consts::PI;
        for (s, c) in &self.terms {
            total += rat_f64(*c) * values.get(s)?;
        }
        Ok(total)
    }
}

fn rat_f64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

impl Add for SymbolicPhase {
    type Output = SymbolicPhase;
    fn add(mut self, rhs: SymbolicPhase) -> SymbolicPhase {
        self += rhs;
        self
    }
}

impl AddAssign for SymbolicPhase {
    fn add_assign(&mut self, rhs: SymbolicPhase) {
        self.pi += rhs.pi;
        for (s, c) in rhs.terms {
            self.add_term(s, c);
        }
    }
}

impl Sub for SymbolicPhase {
    type Output = SymbolicPhase;
    fn sub(self, rhs: SymbolicPhase) -> SymbolicPhase {
        self + (-rhs)
    }
}

impl SubAssign for SymbolicPhase {
    fn sub_assign(&mut self, rhs: SymbolicPhase) {
        *self += -rhs;
    }
}

impl Neg for SymbolicPhase {
    type Output = SymbolicPhase;
    fn neg(self) -> SymbolicPhase {
        self.scale(-Rational64::one())
    }
}

impl Mul<i64> for SymbolicPhase {
    type Output = SymbolicPhase;
    fn mul(self, rhs: i64) -> SymbolicPhase {
        self.scale(Rational64::from_integer(rhs))
    }
}

impl fmt::Display for SymbolicPhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<(Rational64, String)> = Vec::new();
        if !self.pi.is_zero() {
            parts.push((self.pi, "π".into()));
        }
        parts.extend(self.terms.iter().map(|(s, c)| (*c, s.to_string())));
        if parts.is_empty() {
            return f.write_str("0");
        }
        for (n, (c, name)) in parts.iter().enumerate() {
            let sign = if c.is_negative() { "−" } else { "+" };
            match (n, c.is_negative()) {
                (0, false) => {}
                (0, true) => f.write_str("−")?,
                _ => write!(f, " {sign} ")?,
            }
            let a = c.abs();
            match (*a.numer(), *a.denom()) {
                (1, 1) => f.write_str(name)?,
                (p, 1) => write!(f, "{p}{name}")?,
                (1, q) => write!(f, "{name}/{q}")?,
                (p, q) => write!(f, "{p}{name}/{q}")?,
            }
        }
        Ok(())
    }
}

/// Numeric values of every symbol that may appear.
#[derive(Debug, Clone, Default)]
pub struct PhaseValues {
    pub theta: f64,
    pub cap_theta: f64,
    pub gamma: f64,
    pub theta_rho: f64,
    pub cap_theta_rho: f64,
    pub gamma_rho: f64,
    pub named: HashMap<String, f64>,
}

impl PhaseValues {
    pub fn new(full: &CompositeParams, partial: &CompositeParams) -> Self {
        PhaseValues {
            theta: full.theta,
            cap_theta: full.cap_theta,
            gamma: full.gamma,
            theta_rho: partial.theta,
            cap_theta_rho: partial.cap_theta,
            gamma_rho: partial.gamma,
            named: HashMap::new(),
        }
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.named.insert(name.to_string(), value);
        self
    }

    fn get(&self, s: &Symbol) -> Result<f64> {
        Ok(match s {
            Symbol::Theta => self.theta,
            Symbol::CapTheta => self.cap_theta,
            Symbol::Gamma => self.gamma,
            Symbol::ThetaRho => self.theta_rho,
            Symbol::CapThetaRho => self.cap_theta_rho,
            Symbol::GammaRho => self.gamma_rho,
            Symbol::Phase(n) => *self.named.get(n).ok_or_else(|| Error::Params(format!("no value for phase '{n}'")))?,
        })
    }
}

/// Linear expressions such as `3pi/4 + 2theta - 4Theta + 2gamma` or
/// `-2(gamma + 2theta + gamma_r + theta_r)`. Identifiers other than pi,
/// theta, Theta, gamma and their `_r` (ρ) variants are named pulse phases.
impl FromStr for SymbolicPhase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let tokens = tokenize(s)?;
        let mut parser = Parser { tokens, pos: 0 };
        let value = parser.expr()?;
        if parser.pos != parser.tokens.len() {
            return Err(Error::Parse(format!("trailing input in '{s}'")));
        }
        value.linear().ok_or_else(|| Error::Parse(format!("'{s}' is not a phase")))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(Rational64),
    Ident(String),
    Op(char),
}

fn tokenize(s: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            let n: i64 = text.parse().map_err(|_| Error::Parse(format!("bad number '{text}'")))?;
            out.push(Token::Num(Rational64::from_integer(n)));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token::Ident(chars[start..i].iter().collect()));
        } else if "+-−*/()".contains(c) {
            out.push(Token::Op(if c == '−' { '-' } else { c }));
            i += 1;
        } else {
            return Err(Error::Parse(format!("unexpected '{c}' in '{s}'")));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
enum Value {
    Num(Rational64),
    Lin(SymbolicPhase),
}

impl Value {
    fn linear(self) -> Option<SymbolicPhase> {
        match self {
            Value::Lin(p) => Some(p),
            Value::Num(n) if n.is_zero() => Some(SymbolicPhase::zero()),
            Value::Num(_) => None,
        }
    }

    fn add(self, rhs: Value, sign: i64) -> Result<Value> {
        Ok(match (self, rhs) {
            (Value::Num(a), Value::Num(b)) => Value::Num(a + b * sign),
            (a, b) => {
                let (a, b) = (a.linear(), b.linear());
                match (a, b) {
                    (Some(a), Some(b)) => Value::Lin(a + b * sign),
                    _ => return Err(Error::Parse("cannot add a bare number to a phase".into())),
                }
            }
        })
    }

    fn mul(self, rhs: Value) -> Result<Value> {
        Ok(match (self, rhs) {
            (Value::Num(a), Value::Num(b)) => Value::Num(a * b),
            (Value::Num(a), Value::Lin(p)) | (Value::Lin(p), Value::Num(a)) => Value::Lin(p.scale(a)),
            _ => return Err(Error::Parse("product of two phases".into())),
        })
    }

    fn div(self, rhs: Value) -> Result<Value> {
        match rhs {
            Value::Num(b) if !b.is_zero() => self.mul(Value::Num(b.recip())),
            _ => Err(Error::Parse("division by a phase or zero".into())),
        }
    }
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn expr(&mut self) -> Result<Value> {
        let mut acc = self.term()?;
        while let Some(Token::Op(op @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = acc.add(rhs, if op == '+' { 1 } else { -1 })?;
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Value> {
        let mut acc = self.unary()?;
        loop {
            match self.peek().cloned() {
                Some(Token::Op('*')) => {
                    self.pos += 1;
                    acc = acc.mul(self.unary()?)?;
                }
                Some(Token::Op('/')) => {
                    self.pos += 1;
                    acc = acc.div(self.unary()?)?;
                }
                // juxtaposition: 2theta, 3pi, 2(…)
                Some(Token::Num(_)) | Some(Token::Ident(_)) | Some(Token::Op('(')) => {
                    acc = acc.mul(self.unary()?)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Value> {
        match self.peek().cloned() {
            Some(Token::Op('-')) => {
                self.pos += 1;
                self.unary()?.mul(Value::Num(-Rational64::one()))
            }
            Some(Token::Op('+')) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Value> {
        let tok = self.peek().cloned().ok_or_else(|| Error::Parse("unexpected end of phase".into()))?;
        self.pos += 1;
        match tok {
            Token::Num(n) => Ok(Value::Num(n)),
            Token::Ident(name) if name == "pi" || name == "π" => Ok(Value::Lin(SymbolicPhase::pi(1, 1))),
            Token::Ident(name) => Ok(Value::Lin(SymbolicPhase::symbol(Symbol::parse_ident(&name)))),
            Token::Op('(') => {
                let v = self.expr()?;
                match self.peek() {
                    Some(Token::Op(')')) => {
                        self.pos += 1;
                        Ok(v)
                    }
                    _ => Err(Error::Parse("missing ')'".into())),
                }
            }
            Token::Op(c) => Err(Error::Parse(format!("unexpected '{c}'"))),
        }
    }
}

/// Parses a phase written in the notation above; panics on malformed input.
/// For literal tables in code.
pub fn ph(s: &str) -> SymbolicPhase {
    s.parse().unwrap_or_else(|e| panic!("bad phase literal '{s}': {e}"))
}
