//! Bidirectional checking of expressions against domains.
//!
//! Checking also elaborates: unresolved names become variables, enum labels
//! or nullary tags, and unresolved applications become tags, forget calls or
//! term constructions, guided by the expected domain.
//!
//! Numeric subtyping: `range(a, b) <= nat` when `a >= 0`, and every integral
//! domain is below `int`, which is below `rat`. Enums and sums are ordered
//! by inclusion of labels; products componentwise.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Signed;

use crate::code::{FunctorCode, VarDomain};
use crate::error::{Error, Result};
use crate::eval::{eval, Env};
use crate::expr::{Branch, CmpOp, Expr};
use crate::value::{ArithOp, Domain, Value};

/// Typing context.
///
/// `known` holds values for variables that have been instantiated to
/// resolve dependent types (the fibre of a family at a variable).
#[derive(Clone, Debug, Default)]
pub struct Scope {
    vars: Vec<(String, Domain)>,
    pub known: BTreeMap<String, Value>,
    /// Forget functions in scope with their codomains.
    pub forgets: Vec<(String, Domain)>,
    /// Variables a forget function may be applied to.
    pub rec_vars: Vec<String>,
    /// Codes whose constructors may appear in expressions.
    pub codes: Vec<Arc<FunctorCode>>,
}

impl Scope {
    pub fn new() -> Self {
        Scope::default()
    }

    pub fn push(&mut self, name: &str, d: Domain) {
        self.vars.push((name.to_string(), d));
    }

    pub fn pop(&mut self) {
        self.vars.pop();
    }

    pub fn lookup(&self, name: &str) -> Option<&Domain> {
        self.vars
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, d)| d)
    }

    pub fn known_env(&self) -> Env {
        let mut env = Env::new();
        for (k, v) in &self.known {
            env.bind(k, v.clone());
        }
        env
    }

    fn forget_codomain(&self, name: &str) -> Option<&Domain> {
        self.forgets.iter().find(|(n, _)| n == name).map(|(_, d)| d)
    }

    fn find_ctor(&self, name: &str) -> Option<Arc<FunctorCode>> {
        self.codes.iter().find(|c| c.ctor(name).is_some()).cloned()
    }

    /// Domain of an existential variable under the current instantiation.
    pub fn resolve(&self, vd: &VarDomain) -> Result<Domain> {
        match vd {
            VarDomain::Plain(d) => Ok(d.clone()),
            VarDomain::Fibre { family, at } => {
                if let Some(d) = family.is_constant() {
                    return Ok(d.clone());
                }
                let v = eval(at, &self.known_env()).map_err(|_| {
                    Error::Type(format!(
                        "cannot determine the fibre of {} at {at}",
                        family.name
                    ))
                })?;
                family.fibre(&v).cloned().ok_or_else(|| {
                    Error::Type(format!("{v} is outside the base of {}", family.name))
                })
            }
        }
    }

    pub fn infer(&mut self, e: &Expr) -> Result<(Expr, Domain)> {
        match e {
            Expr::Lit(v) => Ok((e.clone(), self.type_of_value(v)?)),
            Expr::Var(x) => match self.lookup(x) {
                Some(d) => Ok((e.clone(), d.clone())),
                None => Err(Error::Type(format!("unbound variable {x}"))),
            },
            Expr::Name(x) => match self.lookup(x) {
                Some(d) => Ok((Expr::Var(x.clone()), d.clone())),
                None => Ok((
                    Expr::Lit(Value::Label(x.clone())),
                    Domain::Enum(vec![x.clone()]),
                )),
            },
            Expr::Apply { name, exvars, args } => {
                if let Some(r) = self.try_forget(name, exvars, args)? {
                    return Ok(r);
                }
                if let Some(code) = self.find_ctor(name) {
                    let built = self.build(&code, name, exvars, args)?;
                    return Ok((built, Domain::Term(code)));
                }
                if !exvars.is_empty() || args.is_empty() {
                    return Err(Error::Type(format!("unknown constructor {name}")));
                }
                let payload = tuple_of(args);
                let (p, d) = self.infer(&payload)?;
                Ok((
                    Expr::Tag(name.clone(), Box::new(p)),
                    Domain::Sum(vec![(name.clone(), d)]),
                ))
            }
            Expr::Arith(op, a, b, loc) => {
                let (a, da) = self.infer(a)?;
                let (b, db) = self.infer(b)?;
                let d = arith_type(*op, &da, &db).ok_or_else(|| {
                    Error::Type(format!(
                        "operator {} expects numbers, found {da} and {db}",
                        op.symbol()
                    ))
                })?;
                Ok((Expr::Arith(*op, Box::new(a), Box::new(b), *loc), d))
            }
            Expr::Neg(a) => {
                let (a, d) = self.infer(a)?;
                let r = if d.is_integral() {
                    Domain::Int
                } else if d.is_numeric() {
                    Domain::Rational
                } else {
                    return Err(Error::Type(format!("negation expects a number, found {d}")));
                };
                Ok((Expr::Neg(Box::new(a)), r))
            }
            Expr::Cmp(op, a, b) => {
                let (a, b, da, db) = self.infer_pair(a, b)?;
                match op {
                    CmpOp::Eq | CmpOp::Ne => {
                        if join(&da, &db).is_none() {
                            return Err(Error::Type(format!(
                                "cannot compare {da} with {db} in {e}"
                            )));
                        }
                    }
                    _ => {
                        if !da.is_numeric() || !db.is_numeric() {
                            return Err(Error::Type(format!(
                                "ordering needs numbers, found {da} and {db}"
                            )));
                        }
                    }
                }
                Ok((Expr::Cmp(*op, Box::new(a), Box::new(b)), Domain::Bool))
            }
            Expr::And(a, b) => Ok((
                Expr::And(
                    Box::new(self.check(a, &Domain::Bool)?),
                    Box::new(self.check(b, &Domain::Bool)?),
                ),
                Domain::Bool,
            )),
            Expr::Or(a, b) => Ok((
                Expr::Or(
                    Box::new(self.check(a, &Domain::Bool)?),
                    Box::new(self.check(b, &Domain::Bool)?),
                ),
                Domain::Bool,
            )),
            Expr::Not(a) => Ok((
                Expr::Not(Box::new(self.check(a, &Domain::Bool)?)),
                Domain::Bool,
            )),
            Expr::If(c, t, f) => {
                let c = self.check(c, &Domain::Bool)?;
                let (t, dt) = self.infer(t)?;
                let (f, df) = self.infer(f)?;
                let d = join(&dt, &df).ok_or_else(|| {
                    Error::Type(format!("branches have incompatible types {dt} and {df}"))
                })?;
                Ok((Expr::If(Box::new(c), Box::new(t), Box::new(f)), d))
            }
            Expr::Case(s, bs) => self.case(s, bs, None),
            Expr::Tuple(es) => {
                let mut out = Vec::new();
                let mut ds = Vec::new();
                for e in es {
                    let (e, d) = self.infer(e)?;
                    out.push(e);
                    ds.push(d);
                }
                Ok((Expr::Tuple(out), Domain::Product(ds)))
            }
            Expr::Proj(a, i) => {
                let (a, d) = self.infer(a)?;
                let r = match (&d, *i) {
                    (Domain::Product(ds), i) if i < ds.len() => ds[i].clone(),
                    (Domain::DepPair(fam), 0) => fam.base.clone(),
                    (Domain::DepPair(fam), 1) => match fam.is_constant() {
                        Some(d) => d.clone(),
                        None => {
                            let v = eval(&Expr::Proj(Box::new(a.clone()), 0), &self.known_env())
                                .map_err(|_| {
                                    Error::Type(format!(
                                        "cannot determine the fibre of {} in {e}",
                                        fam.name
                                    ))
                                })?;
                            fam.fibre(&v).cloned().ok_or_else(|| {
                                Error::Type(format!("{v} is outside the base of {}", fam.name))
                            })?
                        }
                    },
                    _ => return Err(Error::Type(format!("cannot project .{i} out of {d}"))),
                };
                Ok((Expr::Proj(Box::new(a), *i), r))
            }
            Expr::Tag(l, a) => {
                let (a, d) = self.infer(a)?;
                Ok((
                    Expr::Tag(l.clone(), Box::new(a)),
                    Domain::Sum(vec![(l.clone(), d)]),
                ))
            }
            Expr::DPair(..) => Err(Error::Type(format!(
                "the type of {e} cannot be inferred; it needs a dependent pair context"
            ))),
            Expr::Build {
                ctor, exvars, args, ..
            } => {
                let code = self
                    .find_ctor(ctor)
                    .ok_or_else(|| Error::UnknownConstructor(ctor.clone()))?;
                let built = self.build(&code, ctor, exvars, args)?;
                Ok((built, Domain::Term(code)))
            }
            Expr::Forget { func, arg } => {
                let d = self
                    .forget_codomain(func)
                    .cloned()
                    .ok_or_else(|| Error::Type(format!("unknown forget function {func}")))?;
                match &**arg {
                    Expr::Var(x) if self.rec_vars.contains(x) => Ok((e.clone(), d)),
                    other => Err(Error::Type(format!(
                        "{func} applies only to recursive fields, not {other}"
                    ))),
                }
            }
        }
    }

    pub fn check(&mut self, e: &Expr, want: &Domain) -> Result<Expr> {
        match (e, want) {
            (Expr::Name(x), _) if self.lookup(x).is_none() => resolve_label(x, want),
            (Expr::Apply { name, exvars, args }, Domain::Sum(vs))
                if exvars.is_empty()
                    && !args.is_empty()
                    && self.forget_codomain(name).is_none()
                    && vs.iter().any(|(l, _)| l == name) =>
            {
                let payload_dom = &vs.iter().find(|(l, _)| l == name).unwrap().1;
                let p = self.check(&tuple_of(args), payload_dom)?;
                Ok(Expr::Tag(name.clone(), Box::new(p)))
            }
            (Expr::Apply { name, exvars, args }, Domain::Term(code))
                if code.ctor(name).is_some() =>
            {
                self.build(code, name, exvars, args)
            }
            (
                Expr::Build {
                    ctor, exvars, args, ..
                },
                Domain::Term(code),
            ) if code.ctor(ctor).is_some() => self.build(code, ctor, exvars, args),
            (Expr::Tag(l, a), Domain::Sum(vs)) => {
                let d = &vs
                    .iter()
                    .find(|(m, _)| m == l)
                    .ok_or_else(|| Error::Type(format!("{l} is not a variant of {want}")))?
                    .1;
                Ok(Expr::Tag(l.clone(), Box::new(self.check(a, d)?)))
            }
            (Expr::Tuple(es), Domain::Product(ds)) if es.len() == ds.len() => Ok(Expr::Tuple(
                es.iter()
                    .zip(ds)
                    .map(|(e, d)| self.check(e, d))
                    .collect::<Result<_>>()?,
            )),
            (Expr::Tuple(es), Domain::DepPair(_)) if es.len() == 2 => self.check(
                &Expr::DPair(Box::new(es[0].clone()), Box::new(es[1].clone())),
                want,
            ),
            (Expr::DPair(a, b), Domain::DepPair(fam)) => {
                let a = self.check(a, &fam.base)?;
                let fibre = match fam.is_constant() {
                    Some(d) => d.clone(),
                    None => {
                        let v = eval(&a, &self.known_env()).map_err(|_| {
                            Error::Unsupported(format!(
                                "the first component {a} of a dependent pair must be determined by finite variables"
                            ))
                        })?;
                        fam.fibre(&v)
                            .cloned()
                            .ok_or_else(|| Error::Type(format!("{v} is outside {}", fam.base)))?
                    }
                };
                let b = self.check(b, &fibre)?;
                Ok(Expr::DPair(Box::new(a), Box::new(b)))
            }
            (Expr::If(c, t, f), _) => Ok(Expr::If(
                Box::new(self.check(c, &Domain::Bool)?),
                Box::new(self.check(t, want)?),
                Box::new(self.check(f, want)?),
            )),
            (Expr::Case(s, bs), _) => Ok(self.case(s, bs, Some(want))?.0),
            (Expr::Lit(v), _) if want.coerce(v.clone()).is_some() => Ok(e.clone()),
            _ => {
                let (e2, got) = self.infer(e)?;
                if subtype(&got, want) {
                    Ok(e2)
                } else {
                    Err(Error::Type(format!("expected {want}, found {got} in {e}")))
                }
            }
        }
    }

    /// Infers both sides of a binary operator, letting a bare label on one
    /// side be resolved against the type of the other.
    fn infer_pair(&mut self, a: &Expr, b: &Expr) -> Result<(Expr, Expr, Domain, Domain)> {
        let bare = |s: &Self, e: &Expr| matches!(e, Expr::Name(x) if s.lookup(x).is_none());
        if bare(self, a) && !bare(self, b) {
            let (b, db) = self.infer(b)?;
            let a = self.check(a, &db)?;
            return Ok((a, b, db.clone(), db));
        }
        let (a, da) = self.infer(a)?;
        if bare(self, b) && !matches!(da, Domain::Enum(_)) {
            let b = self.check(b, &da)?;
            return Ok((a, b, da.clone(), da));
        }
        let (b, db) = self.infer(b)?;
        Ok((a, b, da, db))
    }

    fn case(&mut self, s: &Expr, bs: &[Branch], want: Option<&Domain>) -> Result<(Expr, Domain)> {
        let (s, ds) = self.infer(s)?;
        let variants: Vec<(String, Option<Domain>)> = match &ds {
            Domain::Enum(ls) => ls.iter().map(|l| (l.clone(), None)).collect(),
            Domain::Bool => {
                return Err(Error::Type(
                    "case over bool is not supported; use if".to_string(),
                ))
            }
            Domain::Sum(vs) => vs
                .iter()
                .map(|(l, d)| (l.clone(), Some(d.clone())))
                .collect(),
            other => {
                return Err(Error::Type(format!(
                    "case needs an enum or sum scrutinee, found {other}"
                )))
            }
        };
        for b in bs {
            if !variants.iter().any(|(l, _)| *l == b.label) {
                return Err(Error::Type(format!("{} is not a variant of {ds}", b.label)));
            }
        }
        let mut out = Vec::new();
        let mut result: Option<Domain> = None;
        for (l, payload) in &variants {
            let mut matching = bs.iter().filter(|b| b.label == *l);
            let b = matching
                .next()
                .ok_or_else(|| Error::Type(format!("case is missing a branch for {l}")))?;
            if matching.next().is_some() {
                return Err(Error::Type(format!("case has two branches for {l}")));
            }
            let pushed = match (&b.binder, payload) {
                (Some(x), Some(d)) => {
                    self.push(x, d.clone());
                    true
                }
                (Some(x), None) => {
                    return Err(Error::Type(format!(
                        "branch {l} binds {x} but the variant carries no payload"
                    )))
                }
                (None, _) => false,
            };
            let body = match want {
                Some(w) => self.check(&b.body, w).map(|e| (e, w.clone())),
                None => self.infer(&b.body),
            };
            if pushed {
                self.pop();
            }
            let (body, d) = body?;
            result = Some(match result {
                None => d,
                Some(r) => join(&r, &d).ok_or_else(|| {
                    Error::Type(format!("case branches have incompatible types {r} and {d}"))
                })?,
            });
            out.push(Branch {
                label: l.clone(),
                binder: b.binder.clone(),
                body,
            });
        }
        Ok((Expr::Case(Box::new(s), out), result.unwrap_or(Domain::Unit)))
    }

    fn try_forget(
        &mut self,
        name: &str,
        exvars: &[Expr],
        args: &[Expr],
    ) -> Result<Option<(Expr, Domain)>> {
        let Some(d) = self.forget_codomain(name).cloned() else {
            return Ok(None);
        };
        if !exvars.is_empty() || args.len() != 1 {
            return Err(Error::Type(format!("{name} takes exactly one argument")));
        }
        match &args[0] {
            Expr::Name(x) | Expr::Var(x) if self.rec_vars.contains(x) => Ok(Some((
                Expr::Forget {
                    func: name.to_string(),
                    arg: Box::new(Expr::Var(x.clone())),
                },
                d,
            ))),
            other => Err(Error::Type(format!(
                "{name} applies only to recursive fields, not {other}"
            ))),
        }
    }

    fn build(
        &mut self,
        code: &Arc<FunctorCode>,
        ctor: &str,
        exvars: &[Expr],
        args: &[Expr],
    ) -> Result<Expr> {
        let spec = code
            .ctor(ctor)
            .ok_or_else(|| Error::UnknownConstructor(ctor.to_string()))?;
        if exvars.len() != spec.exvars.len() || args.len() != spec.fields.len() {
            return Err(Error::Type(format!(
                "{ctor} takes {} index arguments and {} fields",
                spec.exvars.len(),
                spec.fields.len()
            )));
        }
        let mut ex = Vec::new();
        for (e, x) in exvars.iter().zip(&spec.exvars) {
            let d = match &x.domain {
                VarDomain::Plain(d) => d.clone(),
                VarDomain::Fibre { family, .. } => {
                    family.is_constant().cloned().ok_or_else(|| {
                        Error::Unsupported(format!(
                            "building {ctor} with a dependently typed index argument"
                        ))
                    })?
                }
            };
            ex.push(self.check(e, &d)?);
        }
        let mut out = Vec::new();
        let mut mask = Vec::new();
        for (a, f) in args.iter().zip(&spec.fields) {
            match f {
                crate::code::Field::Const { domain, .. } => {
                    out.push(self.check(a, domain)?);
                    mask.push(false);
                }
                crate::code::Field::Rec { .. } => {
                    out.push(self.check(a, &Domain::Term(code.clone()))?);
                    mask.push(true);
                }
            }
        }
        Ok(Expr::Build {
            ctor: ctor.to_string(),
            exvars: ex,
            args: out,
            rec_mask: mask,
        })
    }

    fn type_of_value(&self, v: &Value) -> Result<Domain> {
        Ok(match v {
            Value::Unit => Domain::Unit,
            Value::Bool(_) => Domain::Bool,
            Value::Label(l) => Domain::Enum(vec![l.clone()]),
            Value::Int(n) => Domain::IntRange(n.clone(), n.clone()),
            Value::Rat(_) => Domain::Rational,
            Value::Tuple(vs) => Domain::Product(
                vs.iter()
                    .map(|v| self.type_of_value(v))
                    .collect::<Result<_>>()?,
            ),
            Value::Tagged(l, p) => Domain::Sum(vec![(l.clone(), self.type_of_value(p)?)]),
            Value::Pair(..) => {
                return Err(Error::Type(format!(
                    "the type of the pair literal {v} cannot be inferred"
                )))
            }
            Value::Term(t) => Domain::Term(
                self.find_ctor(&t.ctor)
                    .ok_or_else(|| Error::UnknownConstructor(t.ctor.clone()))?,
            ),
        })
    }
}

fn tuple_of(args: &[Expr]) -> Expr {
    if args.len() == 1 {
        args[0].clone()
    } else {
        Expr::Tuple(args.to_vec())
    }
}

fn resolve_label(x: &str, want: &Domain) -> Result<Expr> {
    match want {
        Domain::Enum(ls) if ls.iter().any(|l| l == x) => Ok(Expr::Lit(Value::label(x))),
        Domain::Sum(vs) if vs.iter().any(|(l, d)| l == x && *d == Domain::Unit) => {
            Ok(Expr::Tag(x.to_string(), Box::new(Expr::Lit(Value::Unit))))
        }
        Domain::Term(code)
            if code
                .ctor(x)
                .is_some_and(|c| c.fields.is_empty() && c.exvars.is_empty()) =>
        {
            Ok(Expr::Build {
                ctor: x.to_string(),
                exvars: Vec::new(),
                args: Vec::new(),
                rec_mask: Vec::new(),
            })
        }
        Domain::Enum(_) | Domain::Sum(_) => Err(Error::Type(format!(
            "{x} is neither a variable nor a label of {want}"
        ))),
        _ => Err(Error::Type(format!("unbound variable {x}"))),
    }
}

fn natlike(d: &Domain) -> bool {
    match d {
        Domain::Nat => true,
        Domain::IntRange(lo, _) => !lo.is_negative(),
        _ => false,
    }
}

fn arith_type(op: ArithOp, a: &Domain, b: &Domain) -> Option<Domain> {
    if !a.is_numeric() || !b.is_numeric() {
        return None;
    }
    let integral = a.is_integral() && b.is_integral();
    Some(match op {
        ArithOp::Add | ArithOp::Mul if natlike(a) && natlike(b) => Domain::Nat,
        ArithOp::Add | ArithOp::Mul | ArithOp::Sub if integral => Domain::Int,
        _ => Domain::Rational,
    })
}

pub fn subtype(a: &Domain, b: &Domain) -> bool {
    if a == b {
        return true;
    }
    match (a, b) {
        (Domain::IntRange(l1, h1), Domain::IntRange(l2, h2)) => l2 <= l1 && h1 <= h2,
        (Domain::IntRange(lo, _), Domain::Nat) => !lo.is_negative(),
        (Domain::IntRange(..) | Domain::Nat, Domain::Int) => true,
        (x, Domain::Rational) => x.is_integral(),
        (Domain::Enum(ls), Domain::Enum(ms)) => ls.iter().all(|l| ms.contains(l)),
        (Domain::Sum(vs), Domain::Sum(ws)) => vs.iter().all(|(l, d)| {
            ws.iter()
                .find(|(m, _)| m == l)
                .is_some_and(|(_, e)| subtype(d, e))
        }),
        (Domain::Product(xs), Domain::Product(ys)) => {
            xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| subtype(x, y))
        }
        (Domain::Term(c), Domain::Term(d)) => c.name == d.name,
        _ => false,
    }
}

/// Least common supertype, when one exists.
pub fn join(a: &Domain, b: &Domain) -> Option<Domain> {
    if subtype(a, b) {
        return Some(b.clone());
    }
    if subtype(b, a) {
        return Some(a.clone());
    }
    match (a, b) {
        (Domain::IntRange(l1, h1), Domain::IntRange(l2, h2)) => {
            Some(Domain::IntRange(l1.min(l2).clone(), h1.max(h2).clone()))
        }
        (x, y) if x.is_integral() && y.is_integral() => Some(if natlike(x) && natlike(y) {
            Domain::Nat
        } else {
            Domain::Int
        }),
        (x, y) if x.is_numeric() && y.is_numeric() => Some(Domain::Rational),
        (Domain::Enum(ls), Domain::Enum(ms)) => {
            let mut out = ls.clone();
            out.extend(ms.iter().filter(|m| !ls.contains(m)).cloned());
            Some(Domain::Enum(out))
        }
        (Domain::Sum(vs), Domain::Sum(ws)) => {
            let mut out: Vec<(String, Domain)> = Vec::new();
            for (l, d) in vs {
                match ws.iter().find(|(m, _)| m == l) {
                    Some((_, e)) => out.push((l.clone(), join(d, e)?)),
                    None => out.push((l.clone(), d.clone())),
                }
            }
            for (l, d) in ws {
                if !vs.iter().any(|(m, _)| m == l) {
                    out.push((l.clone(), d.clone()));
                }
            }
            Some(Domain::Sum(out))
        }
        (Domain::Product(xs), Domain::Product(ys)) if xs.len() == ys.len() => {
            Some(Domain::Product(
                xs.iter()
                    .zip(ys)
                    .map(|(x, y)| join(x, y))
                    .collect::<Option<_>>()?,
            ))
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{add, lit_int, var};

    fn ty() -> Domain {
        Domain::enumeration(&["int", "bool"])
    }

    #[test]
    fn labels_resolve_against_the_other_side() {
        let mut s = Scope::new();
        s.push("t1", ty());
        let e = Expr::Cmp(
            CmpOp::Eq,
            Box::new(Expr::Name("t1".into())),
            Box::new(Expr::Name("int".into())),
        );
        let (e, d) = s.infer(&e).unwrap();
        assert_eq!(d, Domain::Bool);
        assert_eq!(
            e,
            Expr::Cmp(
                CmpOp::Eq,
                Box::new(var("t1")),
                Box::new(Expr::Lit(Value::label("int")))
            )
        );
    }

    #[test]
    fn partial_results_check_against_maybe() {
        let mut s = Scope::new();
        let want = Domain::maybe(ty());
        let e = Expr::If(
            Box::new(Expr::Lit(Value::Bool(true))),
            Box::new(Expr::Apply {
                name: "ok".into(),
                exvars: vec![],
                args: vec![Expr::Name("int".into())],
            }),
            Box::new(Expr::Name("fail".into())),
        );
        let e = s.check(&e, &want).unwrap();
        assert_eq!(e.to_string(), "if true then ok int else fail");
        assert!(e.is_resolved());
    }

    #[test]
    fn numeric_typing() {
        let mut s = Scope::new();
        s.push("n", Domain::Nat);
        let (_, d) = s.infer(&add(var("n"), lit_int(1))).unwrap();
        assert_eq!(d, Domain::Nat);
        assert!(s
            .check(&add(var("n"), lit_int(1)), &Domain::Rational)
            .is_ok());
        let e = Expr::Arith(
            ArithOp::Div,
            Box::new(var("n")),
            Box::new(lit_int(2)),
            Default::default(),
        );
        assert!(s.check(&e, &Domain::Nat).is_err());
        let err = s.check(&Expr::Name("m".into()), &Domain::Nat).unwrap_err();
        assert!(err.to_string().contains("unbound variable m"));
    }

    #[test]
    fn join_and_subtype() {
        assert!(subtype(&Domain::range(0, 1), &Domain::Nat));
        assert!(!subtype(&Domain::range(-1, 1), &Domain::Nat));
        assert_eq!(
            join(&Domain::Nat, &Domain::Rational),
            Some(Domain::Rational)
        );
        assert_eq!(
            join(&Domain::enumeration(&["R"]), &Domain::enumeration(&["B"])),
            Some(Domain::enumeration(&["R", "B"]))
        );
        assert_eq!(join(&Domain::Bool, &Domain::Nat), None);
    }
}
