//! Algebras over functor codes: total, partial (into `1 + A`) and the main
//! half of a zygomorphism, plus the constructions built from them.
//!
//! A clause gives one binder pattern per field, in field order. Constant
//! fields bind their payload; recursive fields bind the result of the
//! recursive call (for the main half of a zygomorphism, a pair of the helper
//! result and the main result). Index variables of the constructor are in
//! scope under the names listed in `exvars`.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::code::{exvar_domain, Arg, ConstructorSpec, Field, FunctorCode, Node, VarDomain};
use crate::error::{Error, Result};
use crate::eval::{eval, Env};
use crate::expr::{fresh_name, unit, Branch, Expr, Pat};
use crate::typing::Scope;
use crate::value::{cartesian, Domain, Family, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AlgebraKind {
    Total,
    Partial,
    ZygoGamma,
}

/// Carrier of an algebra: a single domain, or a family over the index of
/// an indexed code.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Carrier {
    Plain(Domain),
    Family(Family),
}

impl Carrier {
    pub fn at(&self, index: &Value) -> Option<Domain> {
        match self {
            Carrier::Plain(d) => Some(d.clone()),
            Carrier::Family(f) => f.fibre(index).cloned(),
        }
    }

    pub fn map(&self, f: impl Fn(&Domain) -> Domain) -> Carrier {
        match self {
            Carrier::Plain(d) => Carrier::Plain(f(d)),
            Carrier::Family(fam) => Carrier::Family(Family {
                name: fam.name.clone(),
                base: fam.base.clone(),
                fibres: fam.fibres.iter().map(|(b, d)| (b.clone(), f(d))).collect(),
            }),
        }
    }

    /// Coerces `v` into the carrier, trying fibres in order for families.
    pub fn coerce(&self, v: Value) -> Option<Value> {
        match self {
            Carrier::Plain(d) => d.coerce(v),
            Carrier::Family(f) => {
                if f.fibres.iter().any(|(_, d)| d.contains(&v)) {
                    return Some(v);
                }
                f.fibres.iter().find_map(|(_, d)| d.coerce(v.clone()))
            }
        }
    }
}

impl fmt::Display for Carrier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Carrier::Plain(d) => write!(f, "{d}"),
            Carrier::Family(fam) => f.write_str(&fam.name),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clause {
    pub ctor: String,
    /// Names for the constructor's index variables, in order.
    pub exvars: Vec<String>,
    /// One binder per field, in field order.
    pub binders: Vec<Pat>,
    pub body: Expr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgebraSpec {
    pub name: String,
    /// Name of the code the algebra is over.
    pub code: String,
    pub kind: AlgebraKind,
    pub carrier: Carrier,
    /// Helper carrier `D`, for the main half of a zygomorphism.
    pub companion: Option<Domain>,
    pub clauses: Vec<Clause>,
}

impl AlgebraSpec {
    pub fn clause(&self, ctor: &str) -> Option<&Clause> {
        self.clauses.iter().find(|c| c.ctor == ctor)
    }
}

/// A zygomorphism: the main half `gamma` sees, at each recursive position,
/// the pair of the helper folds and its own result. Each helper is named
/// after the forget function it induces on the refined type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZygoPair {
    pub gamma: AlgebraSpec,
    pub deltas: Vec<(String, AlgebraSpec)>,
}

impl ZygoPair {
    /// The helper carrier: a single helper's carrier, or their product.
    pub fn companion(&self) -> Domain {
        companion_of(&self.deltas)
    }
}

fn companion_of(deltas: &[(String, AlgebraSpec)]) -> Domain {
    let ds: Vec<Domain> = deltas
        .iter()
        .map(|(_, d)| match &d.carrier {
            Carrier::Plain(d) => d.clone(),
            Carrier::Family(f) => Domain::DepPair(Box::new(f.clone())),
        })
        .collect();
    if ds.len() == 1 {
        ds.into_iter().next().unwrap()
    } else {
        Domain::Product(ds)
    }
}

fn instances(
    code: &FunctorCode,
    spec: &ConstructorSpec,
    carrier: &Carrier,
) -> Result<Vec<BTreeMap<String, Value>>> {
    let dependent = matches!(carrier, Carrier::Family(f) if f.is_constant().is_none());
    if !dependent {
        return crate::code::instances(&code.index, spec);
    }
    let mut names = Vec::new();
    let mut parts = Vec::new();
    for x in &spec.exvars {
        if let VarDomain::Plain(d) = &x.domain {
            if d.is_finite() {
                names.push(x.name.clone());
                parts.push(d.enumerate()?);
            }
        }
    }
    Ok(cartesian(&parts)
        .into_iter()
        .map(|row| names.iter().cloned().zip(row).collect())
        .collect())
}

fn bind_pat(scope: &mut Scope, p: &Pat, d: &Domain) -> Result<()> {
    match (p, d) {
        (Pat::Var(x), _) => {
            scope.push(x, d.clone());
            Ok(())
        }
        (Pat::Wild, _) => Ok(()),
        (Pat::Tuple(ps), Domain::Product(ds)) if ps.len() == ds.len() => {
            for (p, d) in ps.iter().zip(ds) {
                bind_pat(scope, p, d)?;
            }
            Ok(())
        }
        (Pat::Tuple(ps), Domain::DepPair(fam)) if ps.len() == 2 => match fam.is_constant() {
            Some(fd) => {
                bind_pat(scope, &ps[0], &fam.base)?;
                bind_pat(scope, &ps[1], fd)
            }
            None => Err(Error::Unsupported(format!(
                "tuple pattern {p} over the dependent pair domain {d}"
            ))),
        },
        _ => Err(Error::Type(format!("pattern {p} does not fit {d}"))),
    }
}

/// Checks clause coverage and types, resolving names in clause bodies.
/// For the main half of a zygomorphism, `companion` must be set.
pub fn elaborate_algebra(
    code: &FunctorCode,
    alg: &AlgebraSpec,
    codes: &[Arc<FunctorCode>],
) -> Result<AlgebraSpec> {
    if let Carrier::Family(f) = &alg.carrier {
        if f.base != code.index {
            return Err(Error::Type(format!(
                "{}: family {} is over {}, but {} is indexed by {}",
                alg.name, f.name, f.base, code.name, code.index
            )));
        }
        f.validate()?;
    }
    if alg.kind == AlgebraKind::ZygoGamma && alg.companion.is_none() {
        return Err(Error::Type(format!("{} has no helper carrier", alg.name)));
    }
    for c in &alg.clauses {
        if code.ctor(&c.ctor).is_none() {
            return Err(Error::UnknownConstructor(format!(
                "{} (in a clause of {})",
                c.ctor, alg.name
            )));
        }
    }
    let mut out = alg.clone();
    out.clauses.clear();
    for spec in &code.ctors {
        let hits: Vec<&Clause> = alg.clauses.iter().filter(|c| c.ctor == spec.name).collect();
        let clause = match hits.as_slice() {
            [c] => *c,
            [] => {
                return Err(Error::ClauseMismatch(format!(
                    "{} has no clause for {}",
                    alg.name, spec.name
                )))
            }
            _ => {
                return Err(Error::ClauseMismatch(format!(
                    "{} has {} clauses for {}",
                    alg.name,
                    hits.len(),
                    spec.name
                )))
            }
        };
        out.clauses
            .push(
                elaborate_clause(code, spec, alg, clause, codes).map_err(|e| match e {
                    Error::Type(m) => Error::Type(format!("{} {}: {m}", alg.name, spec.name)),
                    other => other,
                })?,
            );
    }
    Ok(out)
}

fn elaborate_clause(
    code: &FunctorCode,
    spec: &ConstructorSpec,
    alg: &AlgebraSpec,
    clause: &Clause,
    codes: &[Arc<FunctorCode>],
) -> Result<Clause> {
    let mut clause = clause.clone();
    if clause.exvars.is_empty() {
        clause.exvars = spec.exvars.iter().map(|x| x.name.clone()).collect();
    }
    if clause.exvars.len() != spec.exvars.len() {
        return Err(Error::ClauseMismatch(format!(
            "{} binds {} index variables of {}, which has {}",
            alg.name,
            clause.exvars.len(),
            spec.name,
            spec.exvars.len()
        )));
    }
    if clause.binders.len() != spec.fields.len() {
        return Err(Error::ClauseMismatch(format!(
            "{} binds {} fields of {}, which has {}",
            alg.name,
            clause.binders.len(),
            spec.name,
            spec.fields.len()
        )));
    }
    let mut seen = BTreeSet::new();
    for n in clause
        .exvars
        .iter()
        .map(String::as_str)
        .chain(clause.binders.iter().flat_map(|p| p.names()))
    {
        if !seen.insert(n) {
            return Err(Error::Type(format!("{n} is bound twice")));
        }
    }
    if alg.kind == AlgebraKind::Partial {
        check_normal_form(&clause.body)
            .map_err(|why| Error::NotNormalForm(format!("{}.{}", alg.name, spec.name), why))?;
    }
    let mut first = None;
    for inst in instances(code, spec, &alg.carrier)? {
        let mut scope = Scope::new();
        scope.codes = codes.to_vec();
        let mut known = inst.clone();
        for (x, b) in spec.exvars.iter().zip(&clause.exvars) {
            if let Some(v) = inst.get(&x.name) {
                known.insert(b.clone(), v.clone());
            }
        }
        scope.known = inst;
        let mut doms = Vec::new();
        for x in &spec.exvars {
            doms.push(scope.resolve(&x.domain)?);
        }
        let idx_env = scope.known_env();
        scope.known = known;
        for (b, d) in clause.exvars.iter().zip(doms) {
            scope.push(b, d);
        }
        for (f, p) in spec.fields.iter().zip(&clause.binders) {
            match f {
                Field::Const { domain, .. } => bind_pat(&mut scope, p, domain)?,
                Field::Rec { name, index } => {
                    let a = carrier_at(&alg.carrier, index, &idx_env, name)?;
                    let d = match alg.kind {
                        AlgebraKind::ZygoGamma => {
                            Domain::Product(vec![alg.companion.clone().unwrap(), a])
                        }
                        _ => a,
                    };
                    bind_pat(&mut scope, p, &d)?;
                }
            }
        }
        let a = carrier_at(&alg.carrier, &spec.result, &idx_env, "the result")?;
        let want = match alg.kind {
            AlgebraKind::Partial => Domain::maybe(a),
            _ => a,
        };
        let body = scope.check(&clause.body, &want)?;
        first.get_or_insert(body);
    }
    clause.body = first.ok_or_else(|| Error::Type("no instance of the index variables".into()))?;
    Ok(clause)
}

fn carrier_at(carrier: &Carrier, index: &Expr, env: &Env, what: &str) -> Result<Domain> {
    match carrier {
        Carrier::Plain(d) => Ok(d.clone()),
        Carrier::Family(f) => {
            if let Some(d) = f.is_constant() {
                return Ok(d.clone());
            }
            let v = eval(index, env).map_err(|_| {
                Error::Unsupported(format!(
                    "the index {index} of {what} must be determined by finite index variables"
                ))
            })?;
            f.fibre(&v)
                .cloned()
                .ok_or_else(|| Error::Type(format!("{v} is outside the base of {}", f.name)))
        }
    }
}

/// Decision-tree normal form: nested `if` and label `case` with leaves
/// `ok e` or `fail`.
pub fn check_normal_form(e: &Expr) -> core::result::Result<(), String> {
    match e {
        Expr::Tag(l, _) if l == "ok" => Ok(()),
        Expr::Tag(l, p) if l == "fail" && p.is_unit_lit() => Ok(()),
        Expr::Name(l) if l == "fail" => Ok(()),
        Expr::Apply { name, exvars, args }
            if name == "ok" && exvars.is_empty() && !args.is_empty() =>
        {
            Ok(())
        }
        Expr::If(_, t, f) => {
            check_normal_form(t)?;
            check_normal_form(f)
        }
        Expr::Case(_, bs) => {
            for b in bs {
                if let Some(x) = &b.binder {
                    return Err(format!(
                        "case branch {} binds {x}; only label cases are allowed",
                        b.label
                    ));
                }
                check_normal_form(&b.body)?;
            }
            Ok(())
        }
        other => Err(format!("{other} is not an ok/fail leaf, if or case")),
    }
}

/// Evaluates one clause on a layer whose recursive positions already hold
/// results. `args` are in field order.
pub fn apply_clause(
    spec: &ConstructorSpec,
    clause: &Clause,
    exvars: &[Value],
    args: &[Value],
) -> Result<Value> {
    let mut env = Env::new();
    for (b, v) in clause.exvars.iter().zip(exvars) {
        env.bind(b, v.clone());
    }
    for (p, v) in clause.binders.iter().zip(args) {
        p.match_value(v, &mut env.vars)
            .ok_or_else(|| Error::Type(format!("{} cannot bind {v} in {}", p, spec.name)))?;
    }
    Ok(eval(&clause.body, &env)?)
}

/// Folds a term with a total algebra (or, for a partial one, evaluates the
/// clauses on recursive results, failing if one is not `ok`; use
/// [`totalize`] for the fail-propagating fold).
pub fn fold<A>(code: &FunctorCode, alg: &AlgebraSpec, t: &Node<A>) -> Result<Value> {
    let spec = code
        .ctor(&t.ctor)
        .ok_or_else(|| Error::UnknownConstructor(t.ctor.clone()))?;
    let clause = alg.clause(&t.ctor).ok_or_else(|| {
        Error::ClauseMismatch(format!("{} has no clause for {}", alg.name, t.ctor))
    })?;
    let mut args = Vec::with_capacity(t.args.len());
    for a in &t.args {
        args.push(match a {
            Arg::Val(v) => v.clone(),
            Arg::Sub(n) => fold(code, alg, n)?,
        });
    }
    let v = apply_clause(spec, clause, &t.exvars, &args)?;
    let c = match alg.kind {
        AlgebraKind::Partial => alg.carrier.map(|d| Domain::maybe(d.clone())),
        _ => alg.carrier.clone(),
    };
    c.coerce(v.clone())
        .ok_or_else(|| Error::Type(format!("{}: {v} is outside {c}", alg.name)))
}

/// Evaluates a partial algebra's clause given an environment of field and
/// recursive-result bindings (by binder name). The result is `ok a` or
/// `fail`.
pub fn eval_partial_clause(kappa: &AlgebraSpec, ctor: &str, env: &Env) -> Result<Value> {
    let clause = kappa
        .clause(ctor)
        .ok_or_else(|| Error::ClauseMismatch(format!("{} has no clause for {ctor}", kappa.name)))?;
    Ok(eval(&clause.body, env)?)
}

/// The clause body with its binders replaced: index variables by the
/// code's names, constant binders by the field names, and recursive
/// binders by the given expressions (one per recursive field).
pub fn instantiate(spec: &ConstructorSpec, clause: &Clause, recs: &[Expr]) -> Expr {
    let mut map = BTreeMap::new();
    for (b, x) in clause.exvars.iter().zip(&spec.exvars) {
        if *b != x.name {
            map.insert(b.clone(), Expr::Var(x.name.clone()));
        }
    }
    let mut k = 0;
    for (f, p) in spec.fields.iter().zip(&clause.binders) {
        match f {
            Field::Const { name, .. } => p.bind(&Expr::Var(name.clone()), &mut map),
            Field::Rec { .. } => {
                p.bind(&recs[k], &mut map);
                k += 1;
            }
        }
    }
    map.retain(|k, v| !matches!(v, Expr::Var(x) if x == k));
    clause.body.subst(&map)
}

fn plain_clause(spec: &ConstructorSpec, body: Expr) -> Clause {
    Clause {
        ctor: spec.name.clone(),
        exvars: spec.exvars.iter().map(|x| x.name.clone()).collect(),
        binders: spec
            .fields
            .iter()
            .map(|f| Pat::Var(f.name().to_string()))
            .collect(),
        body,
    }
}

/// `[fail, kappa] . lambda`: the total algebra on `1 + A` that fails as
/// soon as a recursive result fails.
pub fn totalize(code: &FunctorCode, kappa: &AlgebraSpec) -> Result<AlgebraSpec> {
    let mut clauses = Vec::new();
    for spec in &code.ctors {
        let clause = kappa.clause(&spec.name).ok_or_else(|| {
            Error::ClauseMismatch(format!("{} has no clause for {}", kappa.name, spec.name))
        })?;
        let mut taken = spec.bound_names();
        taken.extend(clause.body.free_vars());
        let mut oks = Vec::new();
        for (name, _) in spec.recs() {
            let p = fresh_name(&format!("{name}_ok"), &taken);
            taken.insert(p.clone());
            oks.push((name.to_string(), p));
        }
        let inner: Vec<Expr> = oks.iter().map(|(_, p)| Expr::Var(p.clone())).collect();
        let mut body = instantiate(spec, clause, &inner);
        for (x, p) in oks.iter().rev() {
            body = Expr::Case(
                Box::new(Expr::Var(x.clone())),
                vec![
                    Branch {
                        label: "fail".into(),
                        binder: None,
                        body: Expr::Tag("fail".into(), Box::new(unit())),
                    },
                    Branch {
                        label: "ok".into(),
                        binder: Some(p.clone()),
                        body,
                    },
                ],
            );
        }
        clauses.push(plain_clause(spec, body));
    }
    Ok(AlgebraSpec {
        name: format!("{}_total", kappa.name),
        code: code.name.clone(),
        kind: AlgebraKind::Total,
        carrier: kappa.carrier.map(|d| Domain::maybe(d.clone())),
        companion: None,
        clauses,
    })
}

/// `<delta . F pi1, gamma>`: folds to the pair of the helper result and
/// the zygomorphism.
pub fn pair_algebra(code: &FunctorCode, z: &ZygoPair) -> Result<AlgebraSpec> {
    let a = match &z.gamma.carrier {
        Carrier::Plain(d) => d.clone(),
        Carrier::Family(_) => {
            return Err(Error::Unsupported(
                "zygomorphisms with a family carrier".into(),
            ))
        }
    };
    let d = z.companion();
    let mut clauses = Vec::new();
    for spec in &code.ctors {
        let g = z.gamma.clause(&spec.name).ok_or_else(|| {
            Error::ClauseMismatch(format!("{} has no clause for {}", z.gamma.name, spec.name))
        })?;
        let recs: Vec<Expr> = spec.recs().map(|(n, _)| Expr::Var(n.to_string())).collect();
        let gpart = instantiate(spec, g, &recs);
        let mut dparts = Vec::new();
        for (i, (_, delta)) in z.deltas.iter().enumerate() {
            let dc = delta.clause(&spec.name).ok_or_else(|| {
                Error::ClauseMismatch(format!("{} has no clause for {}", delta.name, spec.name))
            })?;
            let first: Vec<Expr> = recs
                .iter()
                .map(|r| {
                    let p = Expr::Proj(Box::new(r.clone()), 0);
                    if z.deltas.len() == 1 {
                        p
                    } else {
                        Expr::Proj(Box::new(p), i)
                    }
                })
                .collect();
            dparts.push(instantiate(spec, dc, &first));
        }
        let dpart = if dparts.len() == 1 {
            dparts.pop().unwrap()
        } else {
            Expr::Tuple(dparts)
        };
        clauses.push(plain_clause(spec, Expr::Tuple(vec![dpart, gpart])));
    }
    Ok(AlgebraSpec {
        name: format!("{}_pair", z.gamma.name),
        code: code.name.clone(),
        kind: AlgebraKind::Total,
        carrier: Carrier::Plain(Domain::Product(vec![d, a])),
        companion: None,
        clauses,
    })
}

/// The constructors themselves, as an algebra on closed terms.
pub fn initial_algebra_as_algebra(code: &Arc<FunctorCode>) -> AlgebraSpec {
    let clauses = code
        .ctors
        .iter()
        .map(|spec| {
            plain_clause(
                spec,
                Expr::Build {
                    ctor: spec.name.clone(),
                    exvars: spec
                        .exvars
                        .iter()
                        .map(|x| Expr::Var(x.name.clone()))
                        .collect(),
                    args: spec
                        .fields
                        .iter()
                        .map(|f| Expr::Var(f.name().to_string()))
                        .collect(),
                    rec_mask: spec.rec_mask(),
                },
            )
        })
        .collect();
    AlgebraSpec {
        name: "in".into(),
        code: code.name.clone(),
        kind: AlgebraKind::Total,
        carrier: Carrier::Plain(Domain::Term(code.clone())),
        companion: None,
        clauses,
    }
}

/// The algebra into `unit`.
pub fn bang_algebra(code: &FunctorCode) -> AlgebraSpec {
    let clauses = code
        .ctors
        .iter()
        .map(|spec| Clause {
            ctor: spec.name.clone(),
            exvars: spec.exvars.iter().map(|x| x.name.clone()).collect(),
            binders: spec.fields.iter().map(|_| Pat::Wild).collect(),
            body: unit(),
        })
        .collect();
    AlgebraSpec {
        name: "bang".into(),
        code: code.name.clone(),
        kind: AlgebraKind::Total,
        carrier: Carrier::Plain(Domain::Unit),
        companion: None,
        clauses,
    }
}

/// One constructor layer whose recursive positions hold arbitrary values.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Layer {
    pub ctor: String,
    pub exvars: Vec<Value>,
    pub args: Vec<LayerArg>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum LayerArg {
    Const(Value),
    Rec(Value),
}

impl Layer {
    pub fn map_recs(&self, f: impl Fn(&Value) -> Value) -> Layer {
        Layer {
            ctor: self.ctor.clone(),
            exvars: self.exvars.clone(),
            args: self
                .args
                .iter()
                .map(|a| match a {
                    LayerArg::Const(v) => LayerArg::Const(v.clone()),
                    LayerArg::Rec(v) => LayerArg::Rec(f(v)),
                })
                .collect(),
        }
    }

    pub fn recs(&self) -> impl Iterator<Item = &Value> {
        self.args.iter().filter_map(|a| match a {
            LayerArg::Rec(v) => Some(v),
            LayerArg::Const(_) => None,
        })
    }
}

impl fmt::Display for Layer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.ctor)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                match a {
                    LayerArg::Const(v) | LayerArg::Rec(v) => write!(f, "{v}")?,
                }
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// The canonical distributive law `F(1 + A) -> 1 + F A`: `None` (fail) if
/// any recursive position is `fail`, otherwise the layer with the `ok`
/// tags removed.
pub fn dist_law(x: &Layer) -> Option<Layer> {
    let mut args = Vec::with_capacity(x.args.len());
    for a in &x.args {
        args.push(match a {
            LayerArg::Const(v) => LayerArg::Const(v.clone()),
            LayerArg::Rec(Value::Tagged(l, p)) if l == "ok" => LayerArg::Rec((**p).clone()),
            LayerArg::Rec(_) => return None,
        });
    }
    Some(Layer {
        ctor: x.ctor.clone(),
        exvars: x.exvars.clone(),
        args,
    })
}

/// Every layer of the code with recursive positions drawn from `over`.
/// Infinite constant and index domains are replaced by finite samples.
pub fn layers(code: &FunctorCode, over: &[Value]) -> Vec<Layer> {
    let mut out = Vec::new();
    for spec in &code.ctors {
        let mut exrows: Vec<Vec<Value>> = vec![Vec::new()];
        for x in &spec.exvars {
            let mut next = Vec::new();
            for row in &exrows {
                let mut env = Env::new();
                for (y, v) in spec.exvars.iter().zip(row) {
                    env.bind(&y.name, v.clone());
                }
                let d = match exvar_domain(x, &env) {
                    Ok(d) => d,
                    Err(_) => continue,
                };
                for v in d.sample() {
                    let mut r = row.clone();
                    r.push(v);
                    next.push(r);
                }
            }
            exrows = next;
        }
        let parts: Vec<Vec<LayerArg>> = spec
            .fields
            .iter()
            .map(|f| match f {
                Field::Const { domain, .. } => {
                    domain.sample().into_iter().map(LayerArg::Const).collect()
                }
                Field::Rec { .. } => over.iter().cloned().map(LayerArg::Rec).collect(),
            })
            .collect();
        for ex in &exrows {
            for args in cartesian(&parts) {
                out.push(Layer {
                    ctor: spec.name.clone(),
                    exvars: ex.clone(),
                    args,
                });
            }
        }
    }
    out
}

/// Exhaustive check of `lambda x = ok y  <=>  x = F ok y` over every layer
/// built from `a` (and `1 + a` on the left). Returns the first violating
/// pair.
pub fn check_non_introduction(
    code: &FunctorCode,
    a: &[Value],
) -> core::result::Result<usize, String> {
    let mut over: Vec<Value> = vec![Value::fail()];
    over.extend(a.iter().cloned().map(Value::ok));
    let xs = layers(code, &over);
    let ys = layers(code, a);
    let all_y: BTreeSet<&Layer> = ys.iter().collect();
    // F ok y  |->  every y it comes from
    let mut preimage: BTreeMap<Layer, Vec<&Layer>> = BTreeMap::new();
    for y in &ys {
        preimage
            .entry(y.map_recs(|v| Value::ok(v.clone())))
            .or_default()
            .push(y);
    }
    for x in &xs {
        let lx = dist_law(x);
        // {y | lambda x = ok y} against {y | x = F ok y}
        let left: Vec<&Layer> = lx.iter().filter(|y| all_y.contains(y)).collect();
        let right: Vec<&Layer> = preimage.get(x).cloned().unwrap_or_default();
        if left != right {
            let y = left.first().or(right.first()).copied().unwrap_or(x);
            return Err(format!(
                "lambda({x}) = {} but F ok ({y}) = {}",
                lx.as_ref()
                    .map_or_else(|| "fail".to_string(), |l| format!("ok {l}")),
                y.map_recs(|v| Value::ok(v.clone()))
            ));
        }
    }
    let checked = xs.len() * ys.len();
    // unit law
    for y in &ys {
        if dist_law(&y.map_recs(|v| Value::ok(v.clone()))).as_ref() != Some(y) {
            return Err(format!("unit law fails at {y}"));
        }
    }
    Ok(checked)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::fixtures::{cons, list, two};
    use crate::code::Term;
    use crate::expr::{add, arith, lit_int, var};
    use crate::value::ArithOp;

    pub(crate) fn lengthalg() -> AlgebraSpec {
        AlgebraSpec {
            name: "lengthalg".into(),
            code: "List".into(),
            kind: AlgebraKind::Total,
            carrier: Carrier::Plain(Domain::Nat),
            companion: None,
            clauses: vec![
                Clause {
                    ctor: "Nil".into(),
                    exvars: vec![],
                    binders: vec![],
                    body: lit_int(0),
                },
                Clause {
                    ctor: "Cons".into(),
                    exvars: vec![],
                    binders: vec![Pat::var("b"), Pat::var("n")],
                    body: add(var("n"), lit_int(1)),
                },
            ],
        }
    }

    fn nat() -> FunctorCode {
        FunctorCode {
            name: "Nat".into(),
            params: vec![],
            index: Domain::Unit,
            ctors: vec![
                ConstructorSpec {
                    name: "zero".into(),
                    exvars: vec![],
                    fields: vec![],
                    premises: vec![],
                    result: unit(),
                },
                ConstructorSpec {
                    name: "succ".into(),
                    exvars: vec![],
                    fields: vec![Field::Rec {
                        name: "x".into(),
                        index: unit(),
                    }],
                    premises: vec![],
                    result: unit(),
                },
            ],
        }
    }

    fn natalg() -> AlgebraSpec {
        AlgebraSpec {
            name: "natalg".into(),
            code: "Nat".into(),
            kind: AlgebraKind::Total,
            carrier: Carrier::Plain(Domain::Nat),
            companion: None,
            clauses: vec![
                Clause {
                    ctor: "zero".into(),
                    exvars: vec![],
                    binders: vec![],
                    body: lit_int(0),
                },
                Clause {
                    ctor: "succ".into(),
                    exvars: vec![],
                    binders: vec![Pat::var("n")],
                    body: add(var("n"), lit_int(1)),
                },
            ],
        }
    }

    fn fact() -> ZygoPair {
        ZygoPair {
            gamma: AlgebraSpec {
                name: "fact".into(),
                code: "Nat".into(),
                kind: AlgebraKind::ZygoGamma,
                carrier: Carrier::Plain(Domain::Nat),
                companion: Some(Domain::Nat),
                clauses: vec![
                    Clause {
                        ctor: "zero".into(),
                        exvars: vec![],
                        binders: vec![],
                        body: lit_int(1),
                    },
                    Clause {
                        ctor: "succ".into(),
                        exvars: vec![],
                        binders: vec![Pat::Tuple(vec![Pat::var("n"), Pat::var("x")])],
                        body: arith(ArithOp::Mul, add(var("n"), lit_int(1)), var("x")),
                    },
                ],
            },
            deltas: vec![("forget".into(), natalg())],
        }
    }

    fn nat_term(k: usize) -> Term {
        let mut t = Term::leaf("zero");
        for _ in 0..k {
            t = Term::new("succ", vec![Term::sub(t)]);
        }
        t
    }

    #[test]
    fn length_fold() {
        let l = list(two());
        let alg = elaborate_algebra(&l, &lengthalg(), &[]).unwrap();
        let t = cons("a", cons("a", Term::leaf("Nil"), (), vec![]), (), vec![]);
        assert_eq!(fold(&l, &alg, &t).unwrap(), Value::int(2));
    }

    #[test]
    fn paired_factorial_fold() {
        let n = nat();
        let z = fact();
        let gamma = elaborate_algebra(&n, &z.gamma, &[]).unwrap();
        let z = ZygoPair { gamma, ..z };
        let p = elaborate_algebra(&n, &pair_algebra(&n, &z).unwrap(), &[]).unwrap();
        let pair = |a: i64, b: i64| Value::Tuple(vec![Value::int(a), Value::int(b)]);
        assert_eq!(fold(&n, &p, &nat_term(0)).unwrap(), pair(0, 1));
        assert_eq!(fold(&n, &p, &nat_term(2)).unwrap(), pair(2, 2));
        assert_eq!(fold(&n, &p, &nat_term(3)).unwrap(), pair(3, 6));
    }

    #[test]
    fn bang_and_initial() {
        let l = Arc::new(list(two()));
        let t = cons("b", Term::leaf("Nil"), (), vec![]);
        assert_eq!(fold(&l, &bang_algebra(&l), &t).unwrap(), Value::Unit);
        let init = elaborate_algebra(&l, &initial_algebra_as_algebra(&l), &[]).unwrap();
        assert_eq!(fold(&l, &init, &t).unwrap(), Value::Term(Box::new(t)));
    }

    #[test]
    fn distributive_law() {
        let mk = |v: Value| Layer {
            ctor: "Cons".into(),
            exvars: vec![],
            args: vec![LayerArg::Const(Value::label("a")), LayerArg::Rec(v)],
        };
        assert_eq!(dist_law(&mk(Value::fail())), None);
        assert_eq!(
            dist_law(&mk(Value::ok(Value::int(3)))),
            Some(mk(Value::int(3)))
        );
        let nil = Layer {
            ctor: "Nil".into(),
            exvars: vec![],
            args: vec![],
        };
        assert_eq!(dist_law(&nil), Some(nil));
        let three: Vec<Value> = (0..3).map(Value::int).collect();
        assert!(check_non_introduction(&list(two()), &three).is_ok());
    }

    #[test]
    fn normal_form_rejects_payload_binders() {
        let e = Expr::Case(
            Box::new(var("v")),
            vec![Branch {
                label: "ok".into(),
                binder: Some("p".into()),
                body: Expr::Tag("ok".into(), Box::new(var("p"))),
            }],
        );
        assert!(check_normal_form(&e).is_err());
        assert!(check_normal_form(&add(var("a"), var("b"))).is_err());
    }
}
