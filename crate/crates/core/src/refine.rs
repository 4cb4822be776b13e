//! Refinement of a code by an algebra.
//!
//! Every recursive field gets fresh index variables standing for the
//! algebra's value on the subterm; the field is re-indexed by them and the
//! constructor's result index becomes the algebra clause with the recursive
//! binders replaced by those variables. For an already indexed code the
//! new index pairs the old index with the algebra value.
//!
//! Fresh variables take the clause's binder names where possible (a tuple
//! pattern over a product carrier gives one variable per component) and
//! `n1`, `n2`, ... otherwise.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::algebra::{instantiate, AlgebraKind, AlgebraSpec, Carrier, Clause, ZygoPair};
use crate::code::{
    elaborate_code, Arg, ConstructorSpec, Exvar, Field, ForgetFn, FunctorCode, Node, Term,
    VarDomain,
};
use crate::error::{Error, Result};
use crate::eval::eval_closed;
use crate::expr::{fresh_name, CmpOp, Expr, Pat};
use crate::typing::Scope;
use crate::value::{Domain, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RefineKind {
    Total,
    Partial,
    Zygo,
}

/// Where an index variable of the source constructor went.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExvarOrigin {
    /// Kept as the refined constructor's index variable at this position.
    Kept(usize),
    /// Fixed by a guard.
    Fixed(Value),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CtorOrigin {
    pub source: String,
    pub exvars: Vec<ExvarOrigin>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefinedSpec {
    pub code: Arc<FunctorCode>,
    pub source: Arc<FunctorCode>,
    pub algebra: String,
    pub kind: RefineKind,
    /// Parallel to `code.ctors`.
    pub origins: Vec<CtorOrigin>,
}

/// A refined type defined together with its forget functions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefinedIRSpec {
    pub data: RefinedSpec,
    pub forget: Vec<ForgetFn>,
}

impl RefinedIRSpec {
    pub fn companion(&self) -> Domain {
        if self.forget.len() == 1 {
            self.forget[0].codomain.clone()
        } else {
            Domain::Product(self.forget.iter().map(|f| f.codomain.clone()).collect())
        }
    }
}

impl RefinedSpec {
    pub fn origin(&self, ctor: &str) -> Option<&CtorOrigin> {
        self.code.position(ctor).map(|i| &self.origins[i])
    }

    /// The underlying term of the source code.
    pub fn erase<A>(&self, rt: &Node<A>) -> Term {
        let o = self
            .origin(&rt.ctor)
            .unwrap_or_else(|| panic!("{} is not a constructor of {}", rt.ctor, self.code.name));
        Node {
            ctor: o.source.clone(),
            exvars: o
                .exvars
                .iter()
                .map(|x| match x {
                    ExvarOrigin::Kept(i) => rt.exvars[*i].clone(),
                    ExvarOrigin::Fixed(v) => v.clone(),
                })
                .collect(),
            args: rt
                .args
                .iter()
                .map(|a| match a {
                    Arg::Val(v) => Arg::Val(v.clone()),
                    Arg::Sub(n) => Arg::Sub(Box::new(self.erase(n))),
                })
                .collect(),
            ann: (),
        }
    }

    /// Whether refined indices pair a source index with an algebra value.
    pub fn is_indexed_source(&self) -> bool {
        !self.source.is_unit_indexed()
    }
}

/// Whether two codes agree up to the names of their index variables.
pub fn alpha_equivalent(a: &FunctorCode, b: &FunctorCode) -> bool {
    a.index == b.index
        && a.ctors.len() == b.ctors.len()
        && a.ctors
            .iter()
            .zip(&b.ctors)
            .all(|(x, y)| canonical(x) == canonical(y))
}

fn canonical(spec: &ConstructorSpec) -> ConstructorSpec {
    let mut map = BTreeMap::new();
    for (i, x) in spec.exvars.iter().enumerate() {
        map.insert(x.name.clone(), Expr::Var(format!("#{i}")));
    }
    let mut out = rename(spec, &map);
    for (i, x) in out.exvars.iter_mut().enumerate() {
        x.name = format!("#{i}");
    }
    out
}

fn rename(spec: &ConstructorSpec, map: &BTreeMap<String, Expr>) -> ConstructorSpec {
    ConstructorSpec {
        name: spec.name.clone(),
        exvars: spec
            .exvars
            .iter()
            .map(|x| Exvar {
                name: x.name.clone(),
                domain: match &x.domain {
                    VarDomain::Plain(d) => VarDomain::Plain(d.clone()),
                    VarDomain::Fibre { family, at } => VarDomain::Fibre {
                        family: family.clone(),
                        at: at.subst(map),
                    },
                },
            })
            .collect(),
        fields: spec
            .fields
            .iter()
            .map(|f| match f {
                Field::Const { .. } => f.clone(),
                Field::Rec { name, index } => Field::Rec {
                    name: name.clone(),
                    index: index.subst(map),
                },
            })
            .collect(),
        premises: spec.premises.iter().map(|p| p.subst(map)).collect(),
        result: spec.result.subst(map),
    }
}

/// Fresh index variables for one recursive field, and the expression
/// standing for the algebra value there.
struct Slot {
    exvars: Vec<Exvar>,
    value: Expr,
}

fn next_free(k: &mut usize, taken: &BTreeSet<String>) -> String {
    loop {
        let n = format!("n{k}");
        *k += 1;
        if !taken.contains(&n) {
            return n;
        }
    }
}

/// Domain of the algebra value at a recursive position with source index
/// `at`.
fn carrier_domain(
    carrier: &Carrier,
    unit_src: bool,
    at: &Expr,
    consts: &BTreeSet<String>,
) -> Result<VarDomain> {
    match carrier {
        Carrier::Plain(d) => Ok(VarDomain::Plain(d.clone())),
        Carrier::Family(f) => {
            if let Some(d) = f.is_constant() {
                return Ok(VarDomain::Plain(d.clone()));
            }
            if unit_src {
                return f
                    .fibre(&Value::Unit)
                    .cloned()
                    .map(VarDomain::Plain)
                    .ok_or_else(|| Error::Type(format!("{} has no fibre at ()", f.name)));
            }
            if at.free_vars().iter().any(|x| consts.contains(x)) {
                return Err(Error::Unsupported(format!(
                    "the index {at} depends on a constant field, so the fibre of {} cannot be an index variable",
                    f.name
                )));
            }
            Ok(VarDomain::Fibre {
                family: f.clone(),
                at: at.clone(),
            })
        }
    }
}

fn make_slot(
    pat: Option<&Pat>,
    domain: VarDomain,
    counter: &mut usize,
    taken: &mut BTreeSet<String>,
) -> Slot {
    if let (Some(Pat::Tuple(ps)), VarDomain::Plain(Domain::Product(ds))) = (pat, &domain) {
        let names: Option<Vec<&String>> = ps
            .iter()
            .map(|p| match p {
                Pat::Var(x) if !taken.contains(x) => Some(x),
                _ => None,
            })
            .collect();
        if let Some(names) = names.filter(|n| n.len() == ds.len()) {
            let exvars: Vec<Exvar> = names
                .iter()
                .zip(ds)
                .map(|(n, d)| Exvar::plain(n, d.clone()))
                .collect();
            for x in &exvars {
                taken.insert(x.name.clone());
            }
            let value = Expr::Tuple(exvars.iter().map(|x| Expr::Var(x.name.clone())).collect());
            return Slot { exvars, value };
        }
    }
    let name = match pat {
        Some(Pat::Var(x)) if !taken.contains(x) => x.clone(),
        _ => next_free(counter, taken),
    };
    taken.insert(name.clone());
    Slot {
        value: Expr::Var(name.clone()),
        exvars: vec![Exvar { name, domain }],
    }
}

fn pair_index(indexed: bool, family: bool, src: &Expr, v: Expr) -> Expr {
    match (indexed, family) {
        (false, _) => v,
        (true, true) => Expr::DPair(Box::new(src.clone()), Box::new(v)),
        (true, false) => Expr::Tuple(vec![src.clone(), v]),
    }
}

/// Index domain of the refined code.
fn refined_index(source: &FunctorCode, carrier: &Carrier) -> Result<Domain> {
    if source.is_unit_indexed() {
        return match carrier {
            Carrier::Plain(d) => Ok(d.clone()),
            Carrier::Family(f) => f
                .fibre(&Value::Unit)
                .cloned()
                .ok_or_else(|| Error::Type(format!("{} has no fibre at ()", f.name))),
        };
    }
    Ok(match carrier {
        Carrier::Plain(d) => Domain::Product(vec![source.index.clone(), d.clone()]),
        Carrier::Family(f) => Domain::DepPair(Box::new(f.clone())),
    })
}

fn uses_dpair(source: &FunctorCode, carrier: &Carrier) -> bool {
    !source.is_unit_indexed() && matches!(carrier, Carrier::Family(_))
}

/// A constructor under construction, before guards are resolved.
struct Draft {
    spec: ConstructorSpec,
    /// Per source index variable: its current name, or the value it was
    /// fixed to.
    origin: Vec<core::result::Result<String, Value>>,
}

impl Draft {
    fn finish(self, source: &str) -> (ConstructorSpec, CtorOrigin) {
        let exvars = self
            .origin
            .into_iter()
            .map(|o| match o {
                Ok(n) => ExvarOrigin::Kept(
                    self.spec
                        .exvars
                        .iter()
                        .position(|x| x.name == n)
                        .expect("kept index variable"),
                ),
                Err(v) => ExvarOrigin::Fixed(v),
            })
            .collect();
        (
            self.spec,
            CtorOrigin {
                source: source.to_string(),
                exvars,
            },
        )
    }
}

/// Re-indexes the recursive fields of `spec`, returning the draft (with
/// the source result index still in place) and the expressions the
/// recursive binders stand for.
fn draft(
    source: &FunctorCode,
    spec: &ConstructorSpec,
    carrier: &Carrier,
    rec_pats: &[Option<&Pat>],
    companion: impl Fn(&str) -> Option<Expr>,
) -> Result<(Draft, Vec<Expr>)> {
    let unit_src = source.is_unit_indexed();
    let family = uses_dpair(source, carrier);
    let consts: BTreeSet<String> = spec.consts().map(|(n, _)| n.to_string()).collect();
    let mut taken = spec.bound_names();
    let mut counter = 1;
    let mut out = spec.clone();
    let mut binds = Vec::new();
    let mut k = 0;
    for (i, f) in spec.fields.iter().enumerate() {
        if let Field::Rec { name, index } = f {
            let d = carrier_domain(carrier, unit_src, index, &consts)?;
            let slot = make_slot(rec_pats[k], d, &mut counter, &mut taken);
            k += 1;
            out.exvars.extend(slot.exvars);
            out.fields[i] = Field::Rec {
                name: name.clone(),
                index: pair_index(!unit_src, family, index, slot.value.clone()),
            };
            binds.push(match companion(name) {
                Some(c) => Expr::Tuple(vec![c, slot.value]),
                None => slot.value,
            });
        }
    }
    let origin = spec.exvars.iter().map(|x| Ok(x.name.clone())).collect();
    Ok((Draft { spec: out, origin }, binds))
}

fn rec_patterns<'a>(spec: &ConstructorSpec, clause: &'a Clause) -> Vec<Option<&'a Pat>> {
    spec.fields
        .iter()
        .zip(&clause.binders)
        .filter(|(f, _)| f.is_rec())
        .map(|(_, p)| Some(p))
        .collect()
}

fn find_clause<'a>(alg: &'a AlgebraSpec, spec: &ConstructorSpec) -> Result<&'a Clause> {
    alg.clause(&spec.name).ok_or_else(|| {
        Error::ClauseMismatch(format!("{} has no clause for {}", alg.name, spec.name))
    })
}

fn check_clauses(code: &FunctorCode, alg: &AlgebraSpec) -> Result<()> {
    for c in &alg.clauses {
        if code.ctor(&c.ctor).is_none() {
            return Err(Error::UnknownConstructor(format!(
                "{} (in a clause of {})",
                c.ctor, alg.name
            )));
        }
    }
    if alg.clauses.len() != code.ctors.len() {
        return Err(Error::ClauseMismatch(format!(
            "{} has {} clauses for the {} constructors of {}",
            alg.name,
            alg.clauses.len(),
            code.ctors.len(),
            code.name
        )));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    name: &str,
    source: &Arc<FunctorCode>,
    index: Domain,
    ctors: Vec<(ConstructorSpec, CtorOrigin)>,
    forgets: &[(String, Domain)],
    codes: &[Arc<FunctorCode>],
    algebra: &str,
    kind: RefineKind,
) -> Result<RefinedSpec> {
    let (ctors, origins): (Vec<_>, Vec<_>) = ctors.into_iter().unzip();
    let raw = FunctorCode {
        name: name.to_string(),
        params: source.params.clone(),
        index,
        ctors,
    };
    let mut all = codes.to_vec();
    if !all.iter().any(|c| c.name == source.name) {
        all.push(source.clone());
    }
    let code = elaborate_code(&raw, forgets, &all).map_err(|es| {
        Error::Type(format!(
            "refined code {name} is ill-typed: {}",
            es.join("; ")
        ))
    })?;
    Ok(RefinedSpec {
        code: Arc::new(code),
        source: source.clone(),
        algebra: algebra.to_string(),
        kind,
        origins,
    })
}

/// `F^alpha` for a total algebra (elaborated against `source`).
pub fn refine(
    source: &Arc<FunctorCode>,
    alg: &AlgebraSpec,
    name: &str,
    codes: &[Arc<FunctorCode>],
) -> Result<RefinedSpec> {
    if alg.kind != AlgebraKind::Total {
        return Err(Error::Type(format!("{} is not a total algebra", alg.name)));
    }
    check_clauses(source, alg)?;
    let index = refined_index(source, &alg.carrier)?;
    let family = uses_dpair(source, &alg.carrier);
    let mut ctors = Vec::new();
    for spec in &source.ctors {
        let clause = find_clause(alg, spec)?;
        let (mut d, binds) = draft(
            source,
            spec,
            &alg.carrier,
            &rec_patterns(spec, clause),
            |_| None,
        )?;
        let body = instantiate(spec, clause, &binds);
        d.spec.result = pair_index(!source.is_unit_indexed(), family, &spec.result, body);
        ctors.push(d.finish(&spec.name));
    }
    assemble(
        name,
        source,
        index,
        ctors,
        &[],
        codes,
        &alg.name,
        RefineKind::Total,
    )
}

/// One `ok` leaf of a decision tree: its guards, the case labels on the
/// way, and the payload.
struct Leaf {
    guards: Vec<Expr>,
    labels: Vec<String>,
    payload: Expr,
}

fn leaves(
    e: &Expr,
    scope: &mut Scope,
    guards: &mut Vec<Expr>,
    labels: &mut Vec<String>,
    out: &mut Vec<Leaf>,
) {
    match e {
        Expr::Tag(l, p) if l == "ok" => out.push(Leaf {
            guards: guards.clone(),
            labels: labels.clone(),
            payload: (**p).clone(),
        }),
        Expr::Lit(Value::Tagged(l, p)) if l == "ok" => out.push(Leaf {
            guards: guards.clone(),
            labels: labels.clone(),
            payload: Expr::Lit((**p).clone()),
        }),
        Expr::If(c, t, f) => {
            guards.push((**c).clone());
            leaves(t, scope, guards, labels, out);
            guards.pop();
            guards.push(Expr::Not(c.clone()));
            leaves(f, scope, guards, labels, out);
            guards.pop();
        }
        Expr::Case(s, bs) => {
            let sum = matches!(scope.infer(s), Ok((_, Domain::Sum(_))));
            for b in bs {
                let lit = if sum {
                    Value::tagged(&b.label, Value::Unit)
                } else {
                    Value::label(&b.label)
                };
                guards.push(Expr::Cmp(CmpOp::Eq, s.clone(), Box::new(Expr::Lit(lit))));
                labels.push(b.label.clone());
                leaves(&b.body, scope, guards, labels, out);
                labels.pop();
                guards.pop();
            }
        }
        _ => {}
    }
}

fn is_closed(e: &Expr) -> bool {
    let mut forget = false;
    e.visit(&mut |x| forget |= matches!(x, Expr::Forget { .. }));
    !forget && e.free_vars().is_empty()
}

fn subst_spec(spec: &mut ConstructorSpec, x: &str, by: &Expr) {
    let mut map = BTreeMap::new();
    map.insert(x.to_string(), by.clone());
    *spec = rename(spec, &map);
}

/// Resolves the guards of a leaf into `d`: closed conjuncts are decided,
/// `x = e` with `x` an index variable and `e` closed is inlined, and the
/// rest become premises. `None` if a guard is false.
fn resolve_guards(mut d: Draft, guards: Vec<Expr>) -> Option<Draft> {
    let mut todo: Vec<Expr> = guards
        .iter()
        .flat_map(|g| g.conjuncts().into_iter().cloned())
        .collect();
    let mut kept = Vec::new();
    while let Some(g) = todo.first().cloned() {
        todo.remove(0);
        if is_closed(&g) {
            match eval_closed(&g) {
                Ok(Value::Bool(true)) => continue,
                Ok(Value::Bool(false)) => return None,
                _ => {
                    kept.push(g);
                    continue;
                }
            }
        }
        let inline = match &g {
            Expr::Cmp(CmpOp::Eq, a, b) => match (&**a, &**b) {
                (Expr::Var(x), e) | (e, Expr::Var(x))
                    if is_closed(e) && d.spec.exvar(x).is_some() =>
                {
                    Some((x.clone(), e.clone()))
                }
                _ => None,
            },
            _ => None,
        };
        let Some((x, e)) = inline else {
            kept.push(g);
            continue;
        };
        let pos = d.spec.exvars.iter().position(|v| v.name == x).unwrap();
        let dom = match &d.spec.exvars[pos].domain {
            VarDomain::Plain(dom) => Some(dom.clone()),
            VarDomain::Fibre { family, at } => {
                eval_closed(at).ok().and_then(|b| family.fibre(&b).cloned())
            }
        };
        let (Some(dom), Ok(v)) = (dom, eval_closed(&e)) else {
            kept.push(g);
            continue;
        };
        let v = dom.coerce(v)?;
        // later fibres may not depend on it; substitute everywhere
        d.spec.exvars.remove(pos);
        let lit = Expr::Lit(v.clone());
        subst_spec(&mut d.spec, &x, &lit);
        for o in d.origin.iter_mut() {
            if matches!(o, Ok(n) if *n == x) {
                *o = Err(v.clone());
            }
        }
        todo = todo.iter().map(|t| t.subst1(&x, &lit)).collect();
        kept = kept.iter().map(|t| t.subst1(&x, &lit)).collect();
        // kept conjuncts may have become closed
        todo.append(&mut kept);
    }
    d.spec.premises.extend(kept);
    Some(d)
}

/// Typing scope with the index variables and constant fields of a draft
/// constructor, for typing case scrutinees.
fn draft_scope(spec: &ConstructorSpec) -> Scope {
    let mut scope = Scope::new();
    for x in &spec.exvars {
        let d = match &x.domain {
            VarDomain::Plain(d) => d.clone(),
            VarDomain::Fibre { family, .. } => match family.is_constant() {
                Some(d) => d.clone(),
                None => continue,
            },
        };
        scope.push(&x.name, d);
    }
    for (n, d) in spec.consts() {
        scope.push(n, d.clone());
    }
    scope
}

/// `F^?kappa` for a partial algebra in decision-tree normal form: one
/// constructor per `ok` leaf, guarded by the conditions leading to it.
pub fn partial_refine(
    source: &Arc<FunctorCode>,
    kappa: &AlgebraSpec,
    name: &str,
    codes: &[Arc<FunctorCode>],
) -> Result<RefinedSpec> {
    if kappa.kind != AlgebraKind::Partial {
        return Err(Error::Type(format!(
            "{} is not a partial algebra",
            kappa.name
        )));
    }
    check_clauses(source, kappa)?;
    let index = refined_index(source, &kappa.carrier)?;
    let family = uses_dpair(source, &kappa.carrier);
    let mut ctors: Vec<(ConstructorSpec, CtorOrigin)> = Vec::new();
    let mut names: BTreeSet<String> = source.ctors.iter().map(|c| c.name.clone()).collect();
    for spec in &source.ctors {
        let clause = find_clause(kappa, spec)?;
        crate::algebra::check_normal_form(&clause.body)
            .map_err(|why| Error::NotNormalForm(format!("{}.{}", kappa.name, spec.name), why))?;
        let (d, binds) = draft(
            source,
            spec,
            &kappa.carrier,
            &rec_patterns(spec, clause),
            |_| None,
        )?;
        let body = instantiate(spec, clause, &binds);
        let mut found = Vec::new();
        leaves(
            &body,
            &mut draft_scope(&d.spec),
            &mut Vec::new(),
            &mut Vec::new(),
            &mut found,
        );
        let mut kept: Vec<(Leaf, Draft)> = Vec::new();
        for leaf in found {
            let fresh = Draft {
                spec: d.spec.clone(),
                origin: d.origin.clone(),
            };
            let guards = leaf.guards.clone();
            // the payload follows inlining through the result slot
            let mut fresh = fresh;
            fresh.spec.result = leaf.payload.clone();
            if let Some(r) = resolve_guards(fresh, guards) {
                kept.push((leaf, r));
            }
        }
        let many = kept.len() > 1;
        let distinct_labels = {
            let ls: BTreeSet<&Vec<String>> = kept.iter().map(|(l, _)| &l.labels).collect();
            ls.len() == kept.len() && kept.iter().all(|(l, _)| !l.labels.is_empty())
        };
        for (ordinal, (leaf, mut r)) in kept.into_iter().enumerate() {
            let base = if !many {
                spec.name.clone()
            } else if distinct_labels {
                format!("{}_{}", spec.name, leaf.labels.join("_"))
            } else {
                format!("{}_{}", spec.name, ordinal + 1)
            };
            let cname = if many {
                fresh_name(&base, &names)
            } else {
                base
            };
            names.insert(cname.clone());
            r.spec.name = cname;
            let payload = core::mem::replace(&mut r.spec.result, Expr::Lit(Value::Unit));
            let src_result = {
                let mut s = spec.clone();
                for (o, x) in r.origin.iter().zip(&spec.exvars) {
                    if let Err(v) = o {
                        subst_spec(&mut s, &x.name, &Expr::Lit(v.clone()));
                    }
                }
                s.result
            };
            r.spec.result = pair_index(!source.is_unit_indexed(), family, &src_result, payload);
            ctors.push(r.finish(&spec.name));
        }
    }
    assemble(
        name,
        source,
        index,
        ctors,
        &[],
        codes,
        &kappa.name,
        RefineKind::Partial,
    )
}

/// `F^{gamma,delta}`: the refined type together with one forget function
/// per helper algebra. The main clause sees, at recursive field `x`, the
/// pair of the forget values of `x` and the index of `x`.
pub fn zygo_refine(
    source: &Arc<FunctorCode>,
    z: &ZygoPair,
    name: &str,
    codes: &[Arc<FunctorCode>],
) -> Result<RefinedIRSpec> {
    if !source.is_unit_indexed() {
        return Err(Error::Unsupported(format!(
            "zygomorphic refinement of the indexed code {}",
            source.name
        )));
    }
    let gamma = &z.gamma;
    if gamma.kind != AlgebraKind::ZygoGamma {
        return Err(Error::Type(format!(
            "{} is not the main half of a zygomorphism",
            gamma.name
        )));
    }
    check_clauses(source, gamma)?;
    for (_, delta) in &z.deltas {
        if delta.kind != AlgebraKind::Total {
            return Err(Error::Type(format!(
                "helper {} is not a total algebra",
                delta.name
            )));
        }
        check_clauses(source, delta)?;
    }
    let d = z.companion();
    if let Some(c) = &gamma.companion {
        if *c != d {
            return Err(Error::Type(format!(
                "{} expects helper values in {c}, but the helpers give {d}",
                gamma.name
            )));
        }
    }
    let index = refined_index(source, &gamma.carrier)?;
    let forget_of = |x: &str| -> Expr {
        let fs: Vec<Expr> = z
            .deltas
            .iter()
            .map(|(f, _)| Expr::Forget {
                func: f.clone(),
                arg: Box::new(Expr::Var(x.to_string())),
            })
            .collect();
        if fs.len() == 1 {
            fs.into_iter().next().unwrap()
        } else {
            Expr::Tuple(fs)
        }
    };
    let mut ctors = Vec::new();
    for spec in &source.ctors {
        let clause = find_clause(gamma, spec)?;
        let pats: Vec<Option<&Pat>> = rec_patterns(spec, clause)
            .into_iter()
            .map(|p| match p {
                Some(Pat::Tuple(ps)) if ps.len() == 2 => Some(&ps[1]),
                _ => None,
            })
            .collect();
        let (mut dr, binds) = draft(source, spec, &gamma.carrier, &pats, |x| Some(forget_of(x)))?;
        dr.spec.result = instantiate(spec, clause, &binds);
        ctors.push(dr.finish(&spec.name));
    }
    let mut forget = Vec::new();
    for (f, delta) in &z.deltas {
        let mut clauses = Vec::new();
        for spec in &source.ctors {
            let clause = find_clause(delta, spec)?;
            let recs: Vec<Expr> = spec
                .recs()
                .map(|(x, _)| Expr::Forget {
                    func: f.clone(),
                    arg: Box::new(Expr::Var(x.to_string())),
                })
                .collect();
            clauses.push((spec.name.clone(), instantiate(spec, clause, &recs)));
        }
        let codomain = match &delta.carrier {
            Carrier::Plain(d) => d.clone(),
            Carrier::Family(_) => {
                return Err(Error::Unsupported(format!(
                    "helper {} with a family carrier",
                    delta.name
                )))
            }
        };
        forget.push(ForgetFn {
            name: f.clone(),
            codomain,
            clauses,
        });
    }
    let sigs: Vec<(String, Domain)> = forget
        .iter()
        .map(|f| (f.name.clone(), f.codomain.clone()))
        .collect();
    let data = assemble(
        name,
        source,
        index,
        ctors,
        &sigs,
        codes,
        &gamma.name,
        RefineKind::Zygo,
    )?;
    let forget = forget
        .iter()
        .map(|f| crate::code::elaborate_forget(&data.code, f, &sigs, codes))
        .collect::<Result<Vec<_>>>()?;
    Ok(RefinedIRSpec { data, forget })
}

/// Values of the forget functions on a refined term, recomputed from its
/// subterms (for cross-checking cached annotations).
pub fn forget_values(ir: &RefinedIRSpec, rt: &Node<crate::code::Ann>) -> Result<Vec<Value>> {
    let (_, comps) = crate::code::check_with(&ir.data.code, &ir.forget, rt)?;
    Ok(comps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{
        bang_algebra, elaborate_algebra, fold, initial_algebra_as_algebra, Clause,
    };
    use crate::code::fixtures::{list, two, vector};
    use crate::enumerate::enumerate_refined;
    use crate::expr::{add, lit_int, var};

    fn lengthalg() -> AlgebraSpec {
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

    #[test]
    fn list_by_length_is_vector() {
        let l = Arc::new(list(two()));
        let alg = elaborate_algebra(&l, &lengthalg(), &[]).unwrap();
        let rs = refine(&l, &alg, "Vector", &[]).unwrap();
        assert!(alpha_equivalent(&rs.code, &vector(two())));
        assert_eq!(rs.code.ctors[1].exvars[0].name, "n");
        let pool = enumerate_refined(&rs.code, &[], 4).unwrap();
        for rt in pool.iter() {
            let t = rs.erase(rt);
            assert_eq!(t.size(), rt.size());
            assert_eq!(fold(&l, &alg, &t).unwrap(), rt.ann.index);
        }
    }

    #[test]
    fn binder_clash_falls_back() {
        let l = Arc::new(list(two()));
        let mut alg = lengthalg();
        alg.clauses[1].binders[1] = Pat::var("b2");
        alg.clauses[1].binders[0] = Pat::var("x");
        alg.clauses[1].body = add(var("b2"), lit_int(1));
        let alg = elaborate_algebra(&l, &alg, &[]).unwrap();
        let rs = refine(&l, &alg, "V", &[]).unwrap();
        assert_eq!(rs.code.ctors[1].exvars[0].name, "b2");
        let rs = refine(&l, &bang_algebra(&l), "L", &[]).unwrap();
        assert_eq!(rs.code.ctors[1].exvars[0].name, "n1");
        assert_eq!(rs.code.index, Domain::Unit);
    }

    #[test]
    fn initial_refinement_indexes_by_term() {
        let l = Arc::new(list(two()));
        let init = elaborate_algebra(&l, &initial_algebra_as_algebra(&l), &[]).unwrap();
        let rs = refine(&l, &init, "Self", &[]).unwrap();
        let pool = enumerate_refined(&rs.code, &[], 3).unwrap();
        assert_eq!(pool.len(), 7);
        for rt in pool.iter() {
            assert_eq!(rt.ann.index, Value::Term(Box::new(rs.erase(rt))));
        }
    }

    #[test]
    fn mismatched_clauses() {
        let l = Arc::new(list(two()));
        let mut alg = lengthalg();
        alg.clauses.pop();
        assert!(matches!(
            refine(&l, &alg, "V", &[]),
            Err(Error::ClauseMismatch(_))
        ));
        let mut alg = lengthalg();
        alg.clauses[0].ctor = "Empty".into();
        assert!(matches!(
            refine(&l, &alg, "V", &[]),
            Err(Error::UnknownConstructor(_))
        ));
    }
}
