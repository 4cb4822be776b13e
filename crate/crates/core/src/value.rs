//! Index domains and their values.
//!
//! The universe is closed: unit, booleans, finite enumerations, natural
//! numbers, unbounded and bounded integers, exact rationals, products,
//! labelled sums, dependent pairs over a finite base, and closed terms of a
//! functor code. `1 + A` is the labelled sum `sum{fail: unit, ok: A}`.
//!
//! Canonical enumeration order: `false < true`; enum labels and sum
//! variants in declaration order; ranges ascending; products and dependent
//! pairs lexicographically with the leftmost component varying slowest;
//! terms by size, then constructor declaration order.

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::code::{FunctorCode, Term};
use crate::error::{DomainError, EvalError, Loc};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Unit,
    Bool(bool),
    Label(String),
    Int(BigInt),
    Rat(BigRational),
    Tuple(Vec<Value>),
    Tagged(String, Box<Value>),
    Pair(Box<Value>, Box<Value>),
    Term(Box<Term>),
}

impl Value {
    pub fn int(n: i64) -> Value {
        Value::Int(BigInt::from(n))
    }

    pub fn rat(num: i64, den: i64) -> Value {
        Value::Rat(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn label(l: &str) -> Value {
        Value::Label(l.to_string())
    }

    pub fn tagged(l: &str, v: Value) -> Value {
        Value::Tagged(l.to_string(), Box::new(v))
    }

    pub fn ok(v: Value) -> Value {
        Value::tagged("ok", v)
    }

    pub fn fail() -> Value {
        Value::tagged("fail", Value::Unit)
    }

    pub fn pair(a: Value, b: Value) -> Value {
        Value::Pair(Box::new(a), Box::new(b))
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<&BigInt> {
        match self {
            Value::Int(n) => Some(n),
            _ => None,
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, Value::Int(_) | Value::Rat(_))
    }

    fn to_rat(&self) -> Option<BigRational> {
        match self {
            Value::Int(n) => Some(BigRational::from_integer(n.clone())),
            Value::Rat(r) => Some(r.clone()),
            _ => None,
        }
    }

    /// Equality that identifies an integer with the rational of the same
    /// magnitude. Everything else is structural.
    pub fn sem_eq(&self, other: &Value) -> bool {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => a == b,
            (a, b) if a.is_numeric() && b.is_numeric() => a.to_rat() == b.to_rat(),
            (Value::Tuple(xs), Value::Tuple(ys)) => {
                xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| x.sem_eq(y))
            }
            (Value::Tagged(l, x), Value::Tagged(m, y)) => l == m && x.sem_eq(y),
            (Value::Pair(a, b), Value::Pair(c, d)) => a.sem_eq(c) && b.sem_eq(d),
            (a, b) => a == b,
        }
    }

    pub fn num_cmp(&self, other: &Value) -> Option<Ordering> {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => Some(a.cmp(b)),
            _ => Some(self.to_rat()?.cmp(&other.to_rat()?)),
        }
    }

    /// Tokens are printed on one line; used for counterexamples and reports.
    fn fmt_atom(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let needs_parens = match self {
            Value::Int(n) => n.is_negative(),
            Value::Rat(r) => r.is_negative(),
            Value::Tagged(_, p) => **p != Value::Unit,
            _ => false,
        };
        if needs_parens {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Unit => f.write_str("()"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Label(l) => f.write_str(l),
            Value::Int(n) => write!(f, "{n}"),
            Value::Rat(r) => {
                if r.denom().is_one() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Value::Tuple(vs) => {
                f.write_str("(")?;
                for (i, v) in vs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str(")")
            }
            Value::Tagged(l, p) => {
                f.write_str(l)?;
                if **p != Value::Unit {
                    f.write_str(" ")?;
                    p.fmt_atom(f)?;
                }
                Ok(())
            }
            Value::Pair(a, b) => write!(f, "({a}, {b})"),
            Value::Term(t) => write!(f, "{t}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
            ArithOp::Div => "/",
        }
    }
}

/// Exact arithmetic. Two integers stay integral except under division;
/// any rational operand makes the result rational.
pub fn arith(op: ArithOp, x: &Value, y: &Value, loc: Loc) -> Result<Value, EvalError> {
    if let (Value::Int(a), Value::Int(b), false) = (x, y, op == ArithOp::Div) {
        return Ok(Value::Int(match op {
            ArithOp::Add => a + b,
            ArithOp::Sub => a - b,
            ArithOp::Mul => a * b,
            ArithOp::Div => unreachable!(),
        }));
    }
    let (a, b) = match (x.to_rat(), y.to_rat()) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(EvalError::Mismatch(alloc::format!(
                "{} applied to {x} and {y}",
                op.symbol()
            )))
        }
    };
    Ok(Value::Rat(match op {
        ArithOp::Add => a + b,
        ArithOp::Sub => a - b,
        ArithOp::Mul => a * b,
        ArithOp::Div => {
            if b.is_zero() {
                return Err(EvalError::DivisionByZero(loc));
            }
            a / b
        }
    }))
}

/// A family of domains over a finite base, given as an explicit table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Family {
    pub name: String,
    pub base: Domain,
    pub fibres: Vec<(Value, Domain)>,
}

impl Family {
    pub fn fibre(&self, at: &Value) -> Option<&Domain> {
        self.fibres
            .iter()
            .find(|(b, _)| b.sem_eq(at))
            .map(|(_, d)| d)
    }

    /// Whether every fibre is the same domain.
    pub fn is_constant(&self) -> Option<&Domain> {
        let first = &self.fibres.first()?.1;
        self.fibres.iter().all(|(_, d)| d == first).then_some(first)
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        let base = self.base.enumerate().map_err(|_| {
            DomainError::Invalid(alloc::format!(
                "family {} has infinite base {}",
                self.name,
                self.base
            ))
        })?;
        for b in &base {
            let n = self.fibres.iter().filter(|(v, _)| v == b).count();
            if n != 1 {
                return Err(DomainError::Invalid(alloc::format!(
                    "family {} must give exactly one fibre at {b} (found {n})",
                    self.name
                )));
            }
        }
        for (v, d) in &self.fibres {
            if !self.base.contains(v) {
                return Err(DomainError::Invalid(alloc::format!(
                    "family {}: {v} is not in the base {}",
                    self.name,
                    self.base
                )));
            }
            d.validate()?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Domain {
    Unit,
    Bool,
    Enum(Vec<String>),
    /// Non-negative integers.
    Nat,
    Int,
    /// Inclusive bounds.
    IntRange(BigInt, BigInt),
    Rational,
    Product(Vec<Domain>),
    Sum(Vec<(String, Domain)>),
    DepPair(Box<Family>),
    Term(Arc<FunctorCode>),
}

impl Domain {
    pub fn range(lo: i64, hi: i64) -> Domain {
        Domain::IntRange(BigInt::from(lo), BigInt::from(hi))
    }

    pub fn enumeration(labels: &[&str]) -> Domain {
        Domain::Enum(labels.iter().map(|l| l.to_string()).collect())
    }

    /// `1 + A` as `sum{fail: unit, ok: A}`.
    pub fn maybe(a: Domain) -> Domain {
        Domain::Sum(vec![("fail".into(), Domain::Unit), ("ok".into(), a)])
    }

    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Domain::Nat | Domain::Int | Domain::IntRange(..) | Domain::Rational
        )
    }

    pub fn is_integral(&self) -> bool {
        matches!(self, Domain::Nat | Domain::Int | Domain::IntRange(..))
    }

    pub fn is_finite(&self) -> bool {
        match self {
            Domain::Unit | Domain::Bool | Domain::Enum(_) | Domain::IntRange(..) => true,
            Domain::Nat | Domain::Int | Domain::Rational => false,
            Domain::Product(ds) => ds.iter().all(Domain::is_finite),
            Domain::Sum(vs) => vs.iter().all(|(_, d)| d.is_finite()),
            Domain::DepPair(fam) => {
                fam.base.is_finite() && fam.fibres.iter().all(|(_, d)| d.is_finite())
            }
            Domain::Term(code) => code.ctors.iter().all(|c| {
                c.recs().next().is_none()
                    && c.consts().all(|(_, d)| d.is_finite())
                    && c.exvars.iter().all(|x| match &x.domain {
                        crate::code::VarDomain::Plain(d) => d.is_finite(),
                        crate::code::VarDomain::Fibre { family, .. } => {
                            family.fibres.iter().all(|(_, d)| d.is_finite())
                        }
                    })
            }),
        }
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        match self {
            Domain::Enum(ls) => {
                if ls.is_empty() {
                    return Err(DomainError::Invalid("empty enum".into()));
                }
                for (i, l) in ls.iter().enumerate() {
                    if ls[..i].contains(l) {
                        return Err(DomainError::Invalid(alloc::format!(
                            "duplicate enum label {l}"
                        )));
                    }
                }
                Ok(())
            }
            Domain::IntRange(lo, hi) if lo > hi => Err(DomainError::Invalid(alloc::format!(
                "empty range({lo}, {hi})"
            ))),
            Domain::Product(ds) => ds.iter().try_for_each(Domain::validate),
            Domain::Sum(vs) => {
                for (i, (l, d)) in vs.iter().enumerate() {
                    if vs[..i].iter().any(|(m, _)| m == l) {
                        return Err(DomainError::Invalid(alloc::format!(
                            "duplicate variant {l}"
                        )));
                    }
                    d.validate()?;
                }
                Ok(())
            }
            Domain::DepPair(fam) => fam.validate(),
            _ => Ok(()),
        }
    }

    /// Strict membership: an integer is not a member of `rat`.
    pub fn contains(&self, v: &Value) -> bool {
        match (self, v) {
            (Domain::Unit, Value::Unit) => true,
            (Domain::Bool, Value::Bool(_)) => true,
            (Domain::Enum(ls), Value::Label(l)) => ls.contains(l),
            (Domain::Nat, Value::Int(n)) => !n.is_negative(),
            (Domain::Int, Value::Int(_)) => true,
            (Domain::IntRange(lo, hi), Value::Int(n)) => lo <= n && n <= hi,
            (Domain::Rational, Value::Rat(_)) => true,
            (Domain::Product(ds), Value::Tuple(vs)) => {
                ds.len() == vs.len() && ds.iter().zip(vs).all(|(d, v)| d.contains(v))
            }
            (Domain::Sum(vs), Value::Tagged(l, p)) => vs
                .iter()
                .find(|(m, _)| m == l)
                .is_some_and(|(_, d)| d.contains(p)),
            (Domain::DepPair(fam), Value::Pair(b, x)) => {
                fam.base.contains(b) && fam.fibre(b).is_some_and(|d| d.contains(x))
            }
            (Domain::Term(code), Value::Term(t)) => crate::code::check_term(code, t).is_ok(),
            _ => false,
        }
    }

    /// Converts a value of a subtype into this domain's canonical form
    /// (integers become rationals where a rational is expected). Returns
    /// `None` if the value does not belong.
    pub fn coerce(&self, v: Value) -> Option<Value> {
        match (self, v) {
            (Domain::Rational, Value::Int(n)) => Some(Value::Rat(BigRational::from_integer(n))),
            (Domain::Product(ds), Value::Tuple(vs)) if ds.len() == vs.len() => ds
                .iter()
                .zip(vs)
                .map(|(d, v)| d.coerce(v))
                .collect::<Option<Vec<_>>>()
                .map(Value::Tuple),
            (Domain::Sum(vs), Value::Tagged(l, p)) => {
                let d = &vs.iter().find(|(m, _)| *m == l)?.1;
                Some(Value::Tagged(l, Box::new(d.coerce(*p)?)))
            }
            (Domain::DepPair(fam), Value::Pair(b, x)) => {
                let b = fam.base.coerce(*b)?;
                let x = fam.fibre(&b)?.coerce(*x)?;
                Some(Value::Pair(Box::new(b), Box::new(x)))
            }
            (d, v) => d.contains(&v).then_some(v),
        }
    }

    pub fn cardinality(&self) -> Option<usize> {
        if !self.is_finite() {
            return None;
        }
        match self {
            Domain::Unit => Some(1),
            Domain::Bool => Some(2),
            Domain::Enum(ls) => Some(ls.len()),
            Domain::IntRange(lo, hi) => (hi - lo + 1u32).to_usize(),
            Domain::Product(ds) => ds
                .iter()
                .try_fold(1usize, |acc, d| acc.checked_mul(d.cardinality()?)),
            Domain::Sum(vs) => vs
                .iter()
                .try_fold(0usize, |acc, (_, d)| acc.checked_add(d.cardinality()?)),
            Domain::DepPair(fam) => fam
                .fibres
                .iter()
                .try_fold(0usize, |acc, (_, d)| acc.checked_add(d.cardinality()?)),
            _ => self.enumerate().ok().map(|v| v.len()),
        }
    }

    /// All inhabitants in canonical order.
    pub fn enumerate(&self) -> Result<Vec<Value>, DomainError> {
        if !self.is_finite() {
            return Err(DomainError::Infinite(self.to_string()));
        }
        Ok(match self {
            Domain::Unit => vec![Value::Unit],
            Domain::Bool => vec![Value::Bool(false), Value::Bool(true)],
            Domain::Enum(ls) => ls.iter().map(|l| Value::Label(l.clone())).collect(),
            Domain::IntRange(lo, hi) => {
                let mut out = Vec::new();
                let mut n = lo.clone();
                while &n <= hi {
                    out.push(Value::Int(n.clone()));
                    n += 1u32;
                }
                out
            }
            Domain::Product(ds) => {
                let parts = ds
                    .iter()
                    .map(Domain::enumerate)
                    .collect::<Result<Vec<_>, _>>()?;
                cartesian(&parts).into_iter().map(Value::Tuple).collect()
            }
            Domain::Sum(vs) => {
                let mut out = Vec::new();
                for (l, d) in vs {
                    for v in d.enumerate()? {
                        out.push(Value::Tagged(l.clone(), Box::new(v)));
                    }
                }
                out
            }
            Domain::DepPair(fam) => {
                let mut out = Vec::new();
                for b in fam.base.enumerate()? {
                    let fibre = fam
                        .fibre(&b)
                        .ok_or_else(|| DomainError::Invalid(alloc::format!("no fibre at {b}")))?;
                    for x in fibre.enumerate()? {
                        out.push(Value::pair(b.clone(), x));
                    }
                }
                out
            }
            Domain::Term(code) => crate::enumerate::enumerate_terms(code, 1)
                .map_err(|e| DomainError::Invalid(e.to_string()))?
                .into_iter()
                .map(|t| Value::Term(Box::new(t)))
                .collect(),
            Domain::Nat | Domain::Int | Domain::Rational => unreachable!(),
        })
    }

    /// A small finite stand-in: the whole domain when finite, otherwise a
    /// few representative values. Used where a check is uniform in the
    /// domain (distributive laws, liftings).
    pub fn sample(&self) -> Vec<Value> {
        if let Ok(all) = self.enumerate() {
            return all;
        }
        match self {
            Domain::Nat => vec![Value::int(0), Value::int(1)],
            Domain::Int => vec![Value::int(-1), Value::int(1)],
            Domain::Rational => vec![Value::rat(1, 2), Value::rat(1, 1)],
            Domain::Product(ds) => {
                let parts: Vec<_> = ds.iter().map(Domain::sample).collect();
                cartesian(&parts).into_iter().map(Value::Tuple).collect()
            }
            Domain::Sum(vs) => vs
                .iter()
                .flat_map(|(l, d)| {
                    d.sample()
                        .into_iter()
                        .map(move |v| Value::Tagged(l.clone(), Box::new(v)))
                })
                .collect(),
            Domain::DepPair(fam) => fam
                .fibres
                .iter()
                .flat_map(|(b, d)| {
                    d.sample()
                        .into_iter()
                        .map(move |x| Value::pair(b.clone(), x))
                })
                .collect(),
            Domain::Term(code) => crate::enumerate::enumerate_terms(code, 2)
                .map(|ts| {
                    ts.into_iter()
                        .take(3)
                        .map(|t| Value::Term(Box::new(t)))
                        .collect()
                })
                .unwrap_or_default(),
            _ => Vec::new(),
        }
    }
}

/// Lexicographic cartesian product, leftmost factor varying slowest.
pub fn cartesian<T: Clone>(parts: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out: Vec<Vec<T>> = vec![Vec::new()];
    for part in parts {
        let mut next = Vec::with_capacity(out.len() * part.len());
        for prefix in &out {
            for x in part {
                let mut row = prefix.clone();
                row.push(x.clone());
                next.push(row);
            }
        }
        out = next;
    }
    out
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Unit => f.write_str("unit"),
            Domain::Bool => f.write_str("bool"),
            Domain::Enum(ls) => write!(f, "enum{{{}}}", ls.join(", ")),
            Domain::Nat => f.write_str("nat"),
            Domain::Int => f.write_str("int"),
            Domain::IntRange(lo, hi) => write!(f, "range({lo}, {hi})"),
            Domain::Rational => f.write_str("rat"),
            Domain::Product(ds) => {
                f.write_str("(")?;
                for (i, d) in ds.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{d}")?;
                }
                f.write_str(")")
            }
            Domain::Sum(vs) => {
                f.write_str("sum{")?;
                for (i, (l, d)) in vs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{l}: {d}")?;
                }
                f.write_str("}")
            }
            Domain::DepPair(fam) => write!(f, "dpair({})", fam.name),
            Domain::Term(code) => write!(f, "term {}", code.name),
        }
    }
}
