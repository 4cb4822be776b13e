//! Clause and index expressions.
//!
//! The parser produces [`Expr::Name`] and [`Expr::Apply`] for identifiers it
//! cannot classify on its own (a variable, an enum label, a nullary tag, a
//! constructor or a forget call all look alike). The type checker rewrites
//! them into the resolved forms; evaluation rejects unresolved nodes.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::error::Loc;
use crate::value::{ArithOp, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Branch {
    pub label: String,
    pub binder: Option<String>,
    pub body: Expr,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    Lit(Value),
    Var(String),
    /// Identifier awaiting resolution.
    Name(String),
    /// `f{ex..}(args..)` awaiting resolution.
    Apply {
        name: String,
        exvars: Vec<Expr>,
        args: Vec<Expr>,
    },
    Arith(ArithOp, Box<Expr>, Box<Expr>, Loc),
    Neg(Box<Expr>),
    Cmp(CmpOp, Box<Expr>, Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
    If(Box<Expr>, Box<Expr>, Box<Expr>),
    Case(Box<Expr>, Vec<Branch>),
    Tuple(Vec<Expr>),
    Proj(Box<Expr>, usize),
    Tag(String, Box<Expr>),
    DPair(Box<Expr>, Box<Expr>),
    /// Builds a closed term; `rec_mask[i]` marks recursive argument positions.
    Build {
        ctor: String,
        exvars: Vec<Expr>,
        args: Vec<Expr>,
        rec_mask: Vec<bool>,
    },
    /// Companion value of a recursive variable of an inductive-recursive type.
    Forget {
        func: String,
        arg: Box<Expr>,
    },
}

pub fn var(name: &str) -> Expr {
    Expr::Var(name.to_string())
}

pub fn lit_int(n: i64) -> Expr {
    Expr::Lit(Value::int(n))
}

pub fn unit() -> Expr {
    Expr::Lit(Value::Unit)
}

pub fn label(l: &str) -> Expr {
    Expr::Lit(Value::label(l))
}

pub fn arith(op: ArithOp, a: Expr, b: Expr) -> Expr {
    Expr::Arith(op, Box::new(a), Box::new(b), Loc::default())
}

pub fn add(a: Expr, b: Expr) -> Expr {
    arith(ArithOp::Add, a, b)
}

pub fn eq(a: Expr, b: Expr) -> Expr {
    Expr::Cmp(CmpOp::Eq, Box::new(a), Box::new(b))
}

pub fn tag(l: &str, e: Expr) -> Expr {
    Expr::Tag(l.to_string(), Box::new(e))
}

pub fn and_all(mut conjuncts: Vec<Expr>) -> Expr {
    match conjuncts.len() {
        0 => Expr::Lit(Value::Bool(true)),
        _ => {
            let mut acc = conjuncts.remove(0);
            for c in conjuncts {
                acc = Expr::And(Box::new(acc), Box::new(c));
            }
            acc
        }
    }
}

impl Expr {
    pub fn is_unit_lit(&self) -> bool {
        matches!(self, Expr::Lit(Value::Unit))
    }

    /// Flattens nested conjunctions.
    pub fn conjuncts(&self) -> Vec<&Expr> {
        match self {
            Expr::And(a, b) => {
                let mut v = a.conjuncts();
                v.extend(b.conjuncts());
                v
            }
            e => alloc::vec![e],
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Expr::Lit(_) => {}
            Expr::Var(x) | Expr::Name(x) => {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
            }
            Expr::Apply { exvars, args, .. } => {
                for e in exvars.iter().chain(args) {
                    e.collect_free(bound, out);
                }
            }
            Expr::Arith(_, a, b, _)
            | Expr::Cmp(_, a, b)
            | Expr::And(a, b)
            | Expr::Or(a, b)
            | Expr::DPair(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Expr::Neg(a) | Expr::Not(a) | Expr::Proj(a, _) | Expr::Tag(_, a) => {
                a.collect_free(bound, out)
            }
            Expr::Forget { arg, .. } => arg.collect_free(bound, out),
            Expr::If(c, t, e) => {
                c.collect_free(bound, out);
                t.collect_free(bound, out);
                e.collect_free(bound, out);
            }
            Expr::Case(s, bs) => {
                s.collect_free(bound, out);
                for b in bs {
                    if let Some(x) = &b.binder {
                        bound.push(x.clone());
                        b.body.collect_free(bound, out);
                        bound.pop();
                    } else {
                        b.body.collect_free(bound, out);
                    }
                }
            }
            Expr::Tuple(es) => es.iter().for_each(|e| e.collect_free(bound, out)),
            Expr::Build { exvars, args, .. } => {
                for e in exvars.iter().chain(args) {
                    e.collect_free(bound, out);
                }
            }
        }
    }

    pub fn mentions(&self, name: &str) -> bool {
        self.free_vars().contains(name)
    }

    /// Capture-avoiding simultaneous substitution of free variables.
    pub fn subst(&self, map: &BTreeMap<String, Expr>) -> Expr {
        if map.is_empty() {
            return self.clone();
        }
        let rec = |e: &Expr| Box::new(e.subst(map));
        match self {
            Expr::Var(x) | Expr::Name(x) => map.get(x).cloned().unwrap_or_else(|| self.clone()),
            Expr::Lit(_) => self.clone(),
            Expr::Apply { name, exvars, args } => Expr::Apply {
                name: name.clone(),
                exvars: exvars.iter().map(|e| e.subst(map)).collect(),
                args: args.iter().map(|e| e.subst(map)).collect(),
            },
            Expr::Arith(op, a, b, l) => Expr::Arith(*op, rec(a), rec(b), *l),
            Expr::Neg(a) => Expr::Neg(rec(a)),
            Expr::Cmp(op, a, b) => Expr::Cmp(*op, rec(a), rec(b)),
            Expr::And(a, b) => Expr::And(rec(a), rec(b)),
            Expr::Or(a, b) => Expr::Or(rec(a), rec(b)),
            Expr::Not(a) => Expr::Not(rec(a)),
            Expr::If(c, t, e) => Expr::If(rec(c), rec(t), rec(e)),
            Expr::Case(s, bs) => {
                let incoming: BTreeSet<String> = map.values().flat_map(|e| e.free_vars()).collect();
                let branches = bs
                    .iter()
                    .map(|b| match &b.binder {
                        None => Branch {
                            label: b.label.clone(),
                            binder: None,
                            body: b.body.subst(map),
                        },
                        Some(x) => {
                            let mut inner = map.clone();
                            inner.remove(x);
                            let mut binder = x.clone();
                            if incoming.contains(x) {
                                let avoid: BTreeSet<String> =
                                    incoming.iter().cloned().chain(b.body.free_vars()).collect();
                                binder = fresh_name(x, &avoid);
                                inner.insert(x.clone(), Expr::Var(binder.clone()));
                            }
                            Branch {
                                label: b.label.clone(),
                                binder: Some(binder),
                                body: b.body.subst(&inner),
                            }
                        }
                    })
                    .collect();
                Expr::Case(rec(s), branches)
            }
            Expr::Tuple(es) => Expr::Tuple(es.iter().map(|e| e.subst(map)).collect()),
            Expr::Proj(a, i) => Expr::Proj(rec(a), *i),
            Expr::Tag(l, a) => Expr::Tag(l.clone(), rec(a)),
            Expr::DPair(a, b) => Expr::DPair(rec(a), rec(b)),
            Expr::Build {
                ctor,
                exvars,
                args,
                rec_mask,
            } => Expr::Build {
                ctor: ctor.clone(),
                exvars: exvars.iter().map(|e| e.subst(map)).collect(),
                args: args.iter().map(|e| e.subst(map)).collect(),
                rec_mask: rec_mask.clone(),
            },
            Expr::Forget { func, arg } => Expr::Forget {
                func: func.clone(),
                arg: rec(arg),
            },
        }
    }

    pub fn subst1(&self, name: &str, by: &Expr) -> Expr {
        let mut m = BTreeMap::new();
        m.insert(name.to_string(), by.clone());
        self.subst(&m)
    }

    /// Whether the expression contains an unresolved node.
    pub fn is_resolved(&self) -> bool {
        let mut ok = true;
        self.visit(&mut |e| {
            if matches!(e, Expr::Name(_) | Expr::Apply { .. }) {
                ok = false;
            }
        });
        ok
    }

    pub fn visit(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Lit(_) | Expr::Var(_) | Expr::Name(_) => {}
            Expr::Apply { exvars, args, .. } | Expr::Build { exvars, args, .. } => {
                for e in exvars.iter().chain(args) {
                    e.visit(f);
                }
            }
            Expr::Arith(_, a, b, _)
            | Expr::Cmp(_, a, b)
            | Expr::And(a, b)
            | Expr::Or(a, b)
            | Expr::DPair(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Expr::Neg(a) | Expr::Not(a) | Expr::Proj(a, _) | Expr::Tag(_, a) => a.visit(f),
            Expr::Forget { arg, .. } => arg.visit(f),
            Expr::If(c, t, e) => {
                c.visit(f);
                t.visit(f);
                e.visit(f);
            }
            Expr::Case(s, bs) => {
                s.visit(f);
                for b in bs {
                    b.body.visit(f);
                }
            }
            Expr::Tuple(es) => es.iter().for_each(|e| e.visit(f)),
        }
    }

    fn prec(&self) -> u8 {
        match self {
            Expr::If(..) | Expr::Case(..) => 0,
            Expr::Or(..) => 1,
            Expr::And(..) => 2,
            Expr::Not(..) => 3,
            Expr::Cmp(..) => 4,
            Expr::Arith(ArithOp::Add | ArithOp::Sub, ..) => 5,
            Expr::Arith(ArithOp::Mul | ArithOp::Div, ..) => 6,
            Expr::Neg(..) => 7,
            Expr::Lit(Value::Int(n)) if n < &num_bigint::BigInt::from(0) => 7,
            Expr::Lit(Value::Rat(_)) => 6,
            Expr::Tag(_, p) if !p.is_unit_lit() => 8,
            _ => 9,
        }
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.prec() < min {
            f.write_str("(")?;
            self.fmt_at(f, 0)?;
            return f.write_str(")");
        }
        match self {
            Expr::Lit(v) => fmt_value_expr(v, f),
            Expr::Var(x) | Expr::Name(x) => f.write_str(x),
            Expr::Apply { name, exvars, args } => fmt_call(f, name, exvars, args),
            Expr::Build {
                ctor, exvars, args, ..
            } => fmt_call(f, ctor, exvars, args),
            Expr::Arith(op, a, b, _) => {
                let p = self.prec();
                a.fmt_at(f, p)?;
                write!(f, " {} ", op.symbol())?;
                b.fmt_at(f, p + 1)
            }
            Expr::Neg(a) => {
                f.write_str("-")?;
                a.fmt_at(f, 8)
            }
            Expr::Cmp(op, a, b) => {
                a.fmt_at(f, 5)?;
                write!(f, " {} ", op.symbol())?;
                b.fmt_at(f, 5)
            }
            Expr::And(a, b) => {
                a.fmt_at(f, 2)?;
                f.write_str(" && ")?;
                b.fmt_at(f, 3)
            }
            Expr::Or(a, b) => {
                a.fmt_at(f, 1)?;
                f.write_str(" || ")?;
                b.fmt_at(f, 2)
            }
            Expr::Not(a) => {
                f.write_str("not ")?;
                a.fmt_at(f, 3)
            }
            Expr::If(c, t, e) => {
                f.write_str("if ")?;
                c.fmt_at(f, 0)?;
                f.write_str(" then ")?;
                t.fmt_at(f, 0)?;
                f.write_str(" else ")?;
                e.fmt_at(f, 0)
            }
            Expr::Case(s, bs) => {
                f.write_str("case ")?;
                s.fmt_at(f, 0)?;
                f.write_str(" of { ")?;
                for (i, b) in bs.iter().enumerate() {
                    if i > 0 {
                        f.write_str("; ")?;
                    }
                    f.write_str(&b.label)?;
                    if let Some(x) = &b.binder {
                        write!(f, " {x}")?;
                    }
                    f.write_str(" => ")?;
                    b.body.fmt_at(f, 0)?;
                }
                f.write_str(" }")
            }
            Expr::Tuple(es) => {
                f.write_str("(")?;
                for (i, e) in es.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    e.fmt_at(f, 0)?;
                }
                f.write_str(")")
            }
            Expr::Proj(a, i) => {
                a.fmt_at(f, 9)?;
                write!(f, ".{i}")
            }
            Expr::Tag(l, p) => {
                f.write_str(l)?;
                if !p.is_unit_lit() {
                    f.write_str(" ")?;
                    p.fmt_at(f, 9)?;
                }
                Ok(())
            }
            Expr::DPair(a, b) => {
                f.write_str("pair(")?;
                a.fmt_at(f, 0)?;
                f.write_str(", ")?;
                b.fmt_at(f, 0)?;
                f.write_str(")")
            }
            Expr::Forget { func, arg } => {
                write!(f, "{func}(")?;
                arg.fmt_at(f, 0)?;
                f.write_str(")")
            }
        }
    }
}

fn fmt_call(f: &mut fmt::Formatter<'_>, name: &str, exvars: &[Expr], args: &[Expr]) -> fmt::Result {
    f.write_str(name)?;
    if !exvars.is_empty() {
        f.write_str("{")?;
        for (i, e) in exvars.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            e.fmt_at(f, 0)?;
        }
        f.write_str("}")?;
    }
    if !args.is_empty() {
        f.write_str("(")?;
        for (i, e) in args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            e.fmt_at(f, 0)?;
        }
        f.write_str(")")?;
    }
    Ok(())
}

/// Prints a value in expression syntax, so that it parses back.
fn fmt_value_expr(v: &Value, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match v {
        Value::Rat(r) if !num_traits::One::is_one(r.denom()) => {
            write!(f, "{} / {}", r.numer(), r.denom())
        }
        Value::Tuple(vs) => {
            f.write_str("(")?;
            for (i, v) in vs.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                fmt_value_expr(v, f)?;
            }
            f.write_str(")")
        }
        Value::Tagged(l, p) => {
            f.write_str(l)?;
            if **p != Value::Unit {
                f.write_str(" ")?;
                let atomic = !matches!(**p, Value::Tagged(..) | Value::Rat(_) | Value::Int(_))
                    || matches!(&**p, Value::Int(n) if n >= &num_bigint::BigInt::from(0))
                    || matches!(&**p, Value::Tagged(_, q) if **q == Value::Unit);
                if atomic {
                    fmt_value_expr(p, f)?;
                } else {
                    f.write_str("(")?;
                    fmt_value_expr(p, f)?;
                    f.write_str(")")?;
                }
            }
            Ok(())
        }
        Value::Pair(a, b) => {
            f.write_str("pair(")?;
            fmt_value_expr(a, f)?;
            f.write_str(", ")?;
            fmt_value_expr(b, f)?;
            f.write_str(")")
        }
        other => write!(f, "{other}"),
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(f, 0)
    }
}

/// Binding patterns for clause arguments.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pat {
    Var(String),
    Wild,
    Tuple(Vec<Pat>),
}

impl Pat {
    pub fn var(x: &str) -> Pat {
        Pat::Var(x.to_string())
    }

    pub fn names(&self) -> Vec<&str> {
        match self {
            Pat::Var(x) => alloc::vec![x.as_str()],
            Pat::Wild => Vec::new(),
            Pat::Tuple(ps) => ps.iter().flat_map(Pat::names).collect(),
        }
    }

    /// Substitution that binds the pattern's variables to parts of `e`.
    /// Tuple patterns against a syntactic tuple split it; otherwise the
    /// variables are bound to projections.
    pub fn bind(&self, e: &Expr, into: &mut BTreeMap<String, Expr>) {
        match (self, e) {
            (Pat::Var(x), _) => {
                into.insert(x.clone(), e.clone());
            }
            (Pat::Wild, _) => {}
            (Pat::Tuple(ps), Expr::Tuple(es)) if ps.len() == es.len() => {
                for (p, e) in ps.iter().zip(es) {
                    p.bind(e, into);
                }
            }
            (Pat::Tuple(ps), _) => {
                for (i, p) in ps.iter().enumerate() {
                    p.bind(&Expr::Proj(Box::new(e.clone()), i), into);
                }
            }
        }
    }

    /// Binds the pattern against a value; `None` on shape mismatch.
    pub fn match_value(&self, v: &Value, into: &mut BTreeMap<String, Value>) -> Option<()> {
        match (self, v) {
            (Pat::Var(x), _) => {
                into.insert(x.clone(), v.clone());
                Some(())
            }
            (Pat::Wild, _) => Some(()),
            (Pat::Tuple(ps), Value::Tuple(vs)) if ps.len() == vs.len() => {
                for (p, v) in ps.iter().zip(vs) {
                    p.match_value(v, into)?;
                }
                Some(())
            }
            (Pat::Tuple(ps), Value::Pair(a, b)) if ps.len() == 2 => {
                ps[0].match_value(a, into)?;
                ps[1].match_value(b, into)
            }
            _ => None,
        }
    }
}

impl fmt::Display for Pat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pat::Var(x) => f.write_str(x),
            Pat::Wild => f.write_str("_"),
            Pat::Tuple(ps) => {
                f.write_str("(")?;
                for (i, p) in ps.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{p}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// `base`, or `base` followed by the least numeric suffix avoiding `taken`.
pub fn fresh_name(base: &str, taken: &BTreeSet<String>) -> String {
    if !taken.contains(base) {
        return base.to_string();
    }
    (1..)
        .map(|i| format!("{base}{i}"))
        .find(|n| !taken.contains(n))
        .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn printing_respects_precedence() {
        let e = arith(
            ArithOp::Mul,
            add(
                Expr::Forget {
                    func: "forget".into(),
                    arg: Box::new(var("x")),
                },
                lit_int(1),
            ),
            var("n1"),
        );
        assert_eq!(e.to_string(), "(forget(x) + 1) * n1");
        let e = arith(
            ArithOp::Sub,
            var("a"),
            arith(ArithOp::Sub, var("b"), var("c")),
        );
        assert_eq!(e.to_string(), "a - (b - c)");
        let e = tag("ok", Expr::Tuple(vec![label("R"), var("n1")]));
        assert_eq!(e.to_string(), "ok (R, n1)");
        assert_eq!(tag("fail", unit()).to_string(), "fail");
    }

    #[test]
    fn substitution_avoids_capture() {
        let body = Expr::Case(
            Box::new(var("v")),
            vec![
                Branch {
                    label: "fail".into(),
                    binder: None,
                    body: tag("fail", unit()),
                },
                Branch {
                    label: "ok".into(),
                    binder: Some("y".into()),
                    body: add(var("y"), var("x")),
                },
            ],
        );
        let out = body.subst1("x", &var("y"));
        let fv = out.free_vars();
        assert!(fv.contains("y") && fv.contains("v"));
        assert_eq!(
            out.to_string(),
            "case v of { fail => fail; ok y1 => y1 + y }"
        );
    }

    #[test]
    fn tuple_patterns_split_syntactic_tuples() {
        let p = Pat::Tuple(vec![
            Pat::Tuple(vec![Pat::var("s"), Pat::var("l")]),
            Pat::Wild,
        ]);
        let mut m = BTreeMap::new();
        p.bind(&var("z"), &mut m);
        assert_eq!(m["s"].to_string(), "z.0.0");
        let mut m = BTreeMap::new();
        p.bind(
            &Expr::Tuple(vec![Expr::Tuple(vec![var("a"), var("b")]), var("c")]),
            &mut m,
        );
        assert_eq!(m["l"], var("b"));
    }
}
