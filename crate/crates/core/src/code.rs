//! Indexed polynomial functor codes and their terms.
//!
//! A code is a list of constructors. Each constructor has existential index
//! variables, fields in declaration order (constant payload or recursive
//! positions carrying an index expression), boolean premises, and a result
//! index. A plain inductive type is a code indexed by `unit`.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result, TermError};
use crate::eval::{eval, truth, Env};
use crate::expr::Expr;
use crate::typing::Scope;
use crate::value::{cartesian, Domain, Family, Value};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VarDomain {
    Plain(Domain),
    /// The fibre of a family at an index computed from earlier variables.
    Fibre {
        family: Family,
        at: Expr,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Exvar {
    pub name: String,
    pub domain: VarDomain,
}

impl Exvar {
    pub fn plain(name: &str, d: Domain) -> Self {
        Exvar {
            name: name.to_string(),
            domain: VarDomain::Plain(d),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Field {
    Const { name: String, domain: Domain },
    Rec { name: String, index: Expr },
}

impl Field {
    pub fn name(&self) -> &str {
        match self {
            Field::Const { name, .. } | Field::Rec { name, .. } => name,
        }
    }

    pub fn is_rec(&self) -> bool {
        matches!(self, Field::Rec { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstructorSpec {
    pub name: String,
    pub exvars: Vec<Exvar>,
    pub fields: Vec<Field>,
    pub premises: Vec<Expr>,
    pub result: Expr,
}

impl ConstructorSpec {
    pub fn consts(&self) -> impl Iterator<Item = (&str, &Domain)> {
        self.fields.iter().filter_map(|f| match f {
            Field::Const { name, domain } => Some((name.as_str(), domain)),
            Field::Rec { .. } => None,
        })
    }

    pub fn recs(&self) -> impl Iterator<Item = (&str, &Expr)> {
        self.fields.iter().filter_map(|f| match f {
            Field::Rec { name, index } => Some((name.as_str(), index)),
            Field::Const { .. } => None,
        })
    }

    pub fn rec_mask(&self) -> Vec<bool> {
        self.fields.iter().map(Field::is_rec).collect()
    }

    pub fn exvar(&self, name: &str) -> Option<&Exvar> {
        self.exvars.iter().find(|x| x.name == name)
    }

    /// Every name bound in the constructor: exvars then fields.
    pub fn bound_names(&self) -> BTreeSet<String> {
        self.exvars
            .iter()
            .map(|x| x.name.clone())
            .chain(self.fields.iter().map(|f| f.name().to_string()))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctorCode {
    pub name: String,
    /// Named parameters, already instantiated; kept for printing.
    pub params: Vec<(String, Domain)>,
    pub index: Domain,
    pub ctors: Vec<ConstructorSpec>,
}

impl FunctorCode {
    pub fn ctor(&self, name: &str) -> Option<&ConstructorSpec> {
        self.ctors.iter().find(|c| c.name == name)
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.ctors.iter().position(|c| c.name == name)
    }

    pub fn is_unit_indexed(&self) -> bool {
        self.index == Domain::Unit
    }

    pub fn is_recursive(&self) -> bool {
        self.ctors.iter().any(|c| c.recs().next().is_some())
    }
}

/// A recursively defined function on the terms of a code, one clause per
/// constructor. Clauses may apply the function to recursive fields.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForgetFn {
    pub name: String,
    pub codomain: Domain,
    pub clauses: Vec<(String, Expr)>,
}

impl ForgetFn {
    pub fn clause(&self, ctor: &str) -> Option<&Expr> {
        self.clauses.iter().find(|(c, _)| c == ctor).map(|(_, e)| e)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Arg<A> {
    Val(Value),
    Sub(Box<Node<A>>),
}

/// A term node; `ann` is `()` for plain terms and [`Ann`] for refined ones.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Node<A> {
    pub ctor: String,
    pub exvars: Vec<Value>,
    pub args: Vec<Arg<A>>,
    pub ann: A,
}

/// Cached index of a refined node and the values of the forget functions.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ann {
    pub index: Value,
    pub companions: Vec<Value>,
}

pub type Term = Node<()>;
pub type RefinedTerm = Node<Ann>;

impl<A> Node<A> {
    /// Number of constructor nodes.
    pub fn size(&self) -> usize {
        1 + self.subs().map(|s| s.size()).sum::<usize>()
    }

    pub fn subs(&self) -> impl Iterator<Item = &Node<A>> {
        self.args.iter().filter_map(|a| match a {
            Arg::Sub(n) => Some(&**n),
            Arg::Val(_) => None,
        })
    }

    pub fn map_ann<B>(&self, f: &mut impl FnMut(&Node<A>) -> B) -> Node<B> {
        Node {
            ctor: self.ctor.clone(),
            exvars: self.exvars.clone(),
            args: self
                .args
                .iter()
                .map(|a| match a {
                    Arg::Val(v) => Arg::Val(v.clone()),
                    Arg::Sub(n) => Arg::Sub(Box::new(n.map_ann(f))),
                })
                .collect(),
            ann: f(self),
        }
    }

    pub fn strip(&self) -> Term {
        self.map_ann(&mut |_| ())
    }
}

impl Term {
    pub fn leaf(ctor: &str) -> Term {
        Node {
            ctor: ctor.to_string(),
            exvars: Vec::new(),
            args: Vec::new(),
            ann: (),
        }
    }

    pub fn new(ctor: &str, args: Vec<Arg<()>>) -> Term {
        Node {
            ctor: ctor.to_string(),
            exvars: Vec::new(),
            args,
            ann: (),
        }
    }

    pub fn sub(t: Term) -> Arg<()> {
        Arg::Sub(Box::new(t))
    }
}

impl<A> fmt::Display for Node<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.ctor)?;
        if !self.exvars.is_empty() {
            f.write_str("{")?;
            for (i, v) in self.exvars.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{v}")?;
            }
            f.write_str("}")?;
        }
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                match a {
                    Arg::Val(v) => write!(f, "{v}")?,
                    Arg::Sub(n) => write!(f, "{n}")?,
                }
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// Domain of an existential variable given the values bound so far.
pub fn exvar_domain(x: &Exvar, env: &Env) -> core::result::Result<Domain, String> {
    match &x.domain {
        VarDomain::Plain(d) => Ok(d.clone()),
        VarDomain::Fibre { family, at } => {
            let b = eval(at, env).map_err(|e| e.to_string())?;
            family
                .fibre(&b)
                .cloned()
                .ok_or_else(|| format!("{b} is outside the base of {}", family.name))
        }
    }
}

/// Computes the index of a term, checking every constraint on the way.
pub fn check_term<A>(code: &FunctorCode, t: &Node<A>) -> core::result::Result<Value, TermError> {
    check_with(code, &[], t).map(|(i, _)| i)
}

/// Like [`check_term`], also evaluating the forget functions at every node.
pub fn check_with<A>(
    code: &FunctorCode,
    forgets: &[ForgetFn],
    t: &Node<A>,
) -> core::result::Result<(Value, Vec<Value>), TermError> {
    let mut path = Vec::new();
    check_node(code, forgets, t, &mut path)
}

fn check_node<A>(
    code: &FunctorCode,
    forgets: &[ForgetFn],
    t: &Node<A>,
    path: &mut Vec<usize>,
) -> core::result::Result<(Value, Vec<Value>), TermError> {
    let spec = code
        .ctor(&t.ctor)
        .ok_or_else(|| TermError::at(path, format!("unknown constructor {}", t.ctor)))?;
    if t.exvars.len() != spec.exvars.len() {
        return Err(TermError::at(
            path,
            format!(
                "{} expects {} index arguments, got {}",
                spec.name,
                spec.exvars.len(),
                t.exvars.len()
            ),
        ));
    }
    if t.args.len() != spec.fields.len() {
        return Err(TermError::at(
            path,
            format!(
                "{} expects {} fields, got {}",
                spec.name,
                spec.fields.len(),
                t.args.len()
            ),
        ));
    }
    let mut env = Env::new();
    for (x, v) in spec.exvars.iter().zip(&t.exvars) {
        let d = exvar_domain(x, &env).map_err(|r| TermError::at(path, r))?;
        if !d.contains(v) {
            return Err(TermError::at(
                path,
                format!("index argument {} = {v} is not in {d}", x.name),
            ));
        }
        env.bind(&x.name, v.clone());
    }
    let mut subs = Vec::new();
    for (i, (f, a)) in spec.fields.iter().zip(&t.args).enumerate() {
        match (f, a) {
            (Field::Const { name, domain }, Arg::Val(v)) => {
                if !domain.contains(v) {
                    return Err(TermError::at(
                        path,
                        format!("field {name} = {v} is not in {domain}"),
                    ));
                }
                env.bind(name, v.clone());
            }
            (Field::Rec { name, .. }, Arg::Sub(n)) => {
                path.push(i);
                let r = check_node(code, forgets, n, path)?;
                path.pop();
                subs.push((name.clone(), r));
            }
            (f, _) => {
                return Err(TermError::at(
                    path,
                    format!("field {} has the wrong kind of argument", f.name()),
                ))
            }
        }
    }
    for ((name, index), (_, (got, comps))) in spec.recs().zip(&subs) {
        let want = eval(index, &env).map_err(|e| TermError::at(path, e.to_string()))?;
        if !want.sem_eq(got) {
            return Err(TermError::at(
                path,
                format!("subterm {name} has index {got}, required {want} ({index})"),
            ));
        }
        for (f, c) in forgets.iter().zip(comps) {
            env.companions
                .insert((f.name.clone(), name.to_string()), c.clone());
        }
    }
    for p in &spec.premises {
        match truth(p, &env) {
            Ok(true) => {}
            Ok(false) => return Err(TermError::at(path, format!("premise {p} does not hold"))),
            Err(e) => return Err(TermError::at(path, e.to_string())),
        }
    }
    let raw = eval(&spec.result, &env).map_err(|e| TermError::at(path, e.to_string()))?;
    let index = code
        .index
        .coerce(raw.clone())
        .ok_or_else(|| TermError::at(path, format!("index {raw} is outside {}", code.index)))?;
    let mut comps = Vec::new();
    for f in forgets {
        let clause = f.clause(&spec.name).ok_or_else(|| {
            TermError::at(path, format!("{} has no clause for {}", f.name, spec.name))
        })?;
        let v = eval(clause, &env).map_err(|e| TermError::at(path, e.to_string()))?;
        comps.push(f.codomain.coerce(v.clone()).ok_or_else(|| {
            TermError::at(path, format!("{}: {v} is outside {}", f.name, f.codomain))
        })?);
    }
    Ok((index, comps))
}

/// Result of [`wellformed_code`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CodeReport {
    pub violations: Vec<String>,
    /// No constructor can be built without a recursive argument.
    pub uninhabited: bool,
}

impl CodeReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn wellformed_code(code: &FunctorCode) -> CodeReport {
    match elaborate_code(code, &[], &[]) {
        Ok(c) => CodeReport {
            violations: Vec::new(),
            uninhabited: !c.ctors.iter().any(|k| k.recs().next().is_none()),
        },
        Err(violations) => CodeReport {
            violations,
            uninhabited: !code.ctors.iter().any(|k| k.recs().next().is_none()),
        },
    }
}

/// Whether checking a constructor needs its finite exvars instantiated
/// (some type depends on a value through a non-constant family).
fn needs_instances(index: &Domain, spec: &ConstructorSpec) -> bool {
    let dep_index = matches!(index, Domain::DepPair(f) if f.is_constant().is_none());
    dep_index
        || spec.exvars.iter().any(|x| {
            matches!(&x.domain, VarDomain::Fibre { family, .. } if family.is_constant().is_none())
        })
}

/// Assignments of the finite plain exvars of a constructor, or a single
/// empty assignment when nothing depends on them.
pub fn instances(
    index: &Domain,
    spec: &ConstructorSpec,
) -> Result<Vec<alloc::collections::BTreeMap<String, Value>>> {
    if !needs_instances(index, spec) {
        return Ok(vec![Default::default()]);
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

/// Type checks every expression of a code, resolving names. `forgets`
/// lists forget functions the result indices may use, `codes` the codes
/// whose constructors may be built. Returns every violation found.
pub fn elaborate_code(
    code: &FunctorCode,
    forgets: &[(String, Domain)],
    codes: &[Arc<FunctorCode>],
) -> core::result::Result<FunctorCode, Vec<String>> {
    let mut errors = Vec::new();
    if let Err(e) = code.index.validate() {
        errors.push(format!("{}: {e}", code.name));
    }
    for (i, c) in code.ctors.iter().enumerate() {
        if code.ctors[..i].iter().any(|d| d.name == c.name) {
            errors.push(format!("duplicate constructor {}", c.name));
        }
    }
    let mut out = code.clone();
    for (k, spec) in code.ctors.iter().enumerate() {
        match elaborate_ctor(code, spec, forgets, codes) {
            Ok(s) => out.ctors[k] = s,
            Err(es) => errors.extend(
                es.into_iter()
                    .map(|e| format!("{}.{}: {e}", code.name, spec.name)),
            ),
        }
    }
    if errors.is_empty() {
        Ok(out)
    } else {
        Err(errors)
    }
}

fn elaborate_ctor(
    code: &FunctorCode,
    spec: &ConstructorSpec,
    forgets: &[(String, Domain)],
    codes: &[Arc<FunctorCode>],
) -> core::result::Result<ConstructorSpec, Vec<String>> {
    let mut errors = Vec::new();
    let mut seen = BTreeSet::new();
    for n in spec
        .exvars
        .iter()
        .map(|x| x.name.as_str())
        .chain(spec.fields.iter().map(Field::name))
    {
        if !seen.insert(n) {
            errors.push(format!("name {n} is bound twice"));
        }
    }
    for f in &spec.fields {
        if let Field::Const { name, domain } = f {
            if let Err(e) = domain.validate() {
                errors.push(format!("field {name}: {e}"));
            }
        }
    }
    if !errors.is_empty() {
        return Err(errors);
    }
    // exvar fibres first: they only see earlier exvars
    let mut out = spec.clone();
    let mut scope = Scope::new();
    scope.codes = codes.to_vec();
    for (i, x) in spec.exvars.iter().enumerate() {
        match &x.domain {
            VarDomain::Plain(d) => {
                if let Err(e) = d.validate() {
                    errors.push(format!("exvar {}: {e}", x.name));
                }
                scope.push(&x.name, d.clone());
            }
            VarDomain::Fibre { family, at } => {
                match scope.check(at, &family.base) {
                    Ok(at) => {
                        out.exvars[i].domain = VarDomain::Fibre {
                            family: family.clone(),
                            at,
                        }
                    }
                    Err(e) => errors.push(format!("exvar {}: {e}", x.name)),
                }
                scope.push(&x.name, family.base.clone());
            }
        }
    }
    if !errors.is_empty() {
        return Err(errors);
    }
    let insts = match instances(&code.index, &out) {
        Ok(i) => i,
        Err(e) => return Err(vec![e.to_string()]),
    };
    let mut first: Option<ConstructorSpec> = None;
    for inst in insts {
        let mut scope = Scope::new();
        scope.codes = codes.to_vec();
        scope.forgets = forgets.to_vec();
        scope.known = inst;
        for x in &out.exvars {
            match scope.resolve(&x.domain) {
                Ok(d) => scope.push(&x.name, d),
                Err(e) => {
                    errors.push(format!("exvar {}: {e}", x.name));
                    scope.push(&x.name, Domain::Unit);
                }
            }
        }
        for (name, d) in spec.consts() {
            scope.push(name, d.clone());
        }
        let mut this = out.clone();
        for (k, f) in spec.fields.iter().enumerate() {
            if let Field::Rec { name, index } = f {
                match scope.check(index, &code.index) {
                    Ok(e) => {
                        this.fields[k] = Field::Rec {
                            name: name.clone(),
                            index: e,
                        }
                    }
                    Err(e) => errors.push(format!("index of {name}: {e}")),
                }
            }
        }
        for (name, _) in spec.recs() {
            scope.rec_vars.push(name.to_string());
        }
        for (k, p) in spec.premises.iter().enumerate() {
            match scope.check(p, &Domain::Bool) {
                Ok(e) => this.premises[k] = e,
                Err(e) => errors.push(format!("premise {p}: {e}")),
            }
        }
        match scope.check(&spec.result, &code.index) {
            Ok(e) => this.result = e,
            Err(e) => errors.push(format!("result index: {e}")),
        }
        if !errors.is_empty() {
            return Err(errors);
        }
        first.get_or_insert(this);
    }
    first.ok_or_else(|| vec![String::from("no instance of the index variables")])
}

/// Checks that the forget clauses cover the code and are well typed.
pub fn elaborate_forget(
    code: &FunctorCode,
    f: &ForgetFn,
    all: &[(String, Domain)],
    codes: &[Arc<FunctorCode>],
) -> Result<ForgetFn> {
    let mut out = f.clone();
    for c in &f.clauses {
        if code.ctor(&c.0).is_none() {
            return Err(Error::ClauseMismatch(format!(
                "{} has a clause for unknown constructor {}",
                f.name, c.0
            )));
        }
    }
    for spec in &code.ctors {
        let hits: Vec<_> = f.clauses.iter().filter(|(c, _)| *c == spec.name).collect();
        if hits.len() != 1 {
            return Err(Error::ClauseMismatch(format!(
                "{} needs exactly one clause for {} (found {})",
                f.name,
                spec.name,
                hits.len()
            )));
        }
        let mut scope = Scope::new();
        scope.codes = codes.to_vec();
        scope.forgets = all.to_vec();
        for x in &spec.exvars {
            let d = match &x.domain {
                VarDomain::Plain(d) => d.clone(),
                VarDomain::Fibre { family, .. } => match family.is_constant() {
                    Some(d) => d.clone(),
                    None => {
                        return Err(Error::Unsupported(format!(
                            "forget function over {} with dependently typed index variables",
                            code.name
                        )))
                    }
                },
            };
            scope.push(&x.name, d);
        }
        for (name, d) in spec.consts() {
            scope.push(name, d.clone());
        }
        for (name, _) in spec.recs() {
            scope.rec_vars.push(name.to_string());
        }
        let body = scope
            .check(&hits[0].1, &f.codomain)
            .map_err(|e| Error::Type(format!("{} {}: {e}", f.name, spec.name)))?;
        let pos = f.clauses.iter().position(|(c, _)| *c == spec.name).unwrap();
        out.clauses[pos].1 = body;
    }
    // clause order follows the constructors
    out.clauses
        .sort_by_key(|(c, _)| code.position(c).unwrap_or(usize::MAX));
    Ok(out)
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use crate::expr::{add, lit_int, unit, var};

    pub fn list(b: Domain) -> FunctorCode {
        FunctorCode {
            name: "List".into(),
            params: vec![("B".into(), b.clone())],
            index: Domain::Unit,
            ctors: vec![
                ConstructorSpec {
                    name: "Nil".into(),
                    exvars: vec![],
                    fields: vec![],
                    premises: vec![],
                    result: unit(),
                },
                ConstructorSpec {
                    name: "Cons".into(),
                    exvars: vec![],
                    fields: vec![
                        Field::Const {
                            name: "b".into(),
                            domain: b,
                        },
                        Field::Rec {
                            name: "x".into(),
                            index: unit(),
                        },
                    ],
                    premises: vec![],
                    result: unit(),
                },
            ],
        }
    }

    pub fn vector(b: Domain) -> FunctorCode {
        FunctorCode {
            name: "Vector".into(),
            params: vec![("B".into(), b.clone())],
            index: Domain::Nat,
            ctors: vec![
                ConstructorSpec {
                    name: "Nil".into(),
                    exvars: vec![],
                    fields: vec![],
                    premises: vec![],
                    result: lit_int(0),
                },
                ConstructorSpec {
                    name: "Cons".into(),
                    exvars: vec![Exvar::plain("n", Domain::Nat)],
                    fields: vec![
                        Field::Const {
                            name: "b".into(),
                            domain: b,
                        },
                        Field::Rec {
                            name: "x".into(),
                            index: var("n"),
                        },
                    ],
                    premises: vec![],
                    result: add(var("n"), lit_int(1)),
                },
            ],
        }
    }

    pub fn two() -> Domain {
        Domain::enumeration(&["a", "b"])
    }

    pub fn cons<A: Clone>(b: &str, x: Node<A>, ann: A, exvars: Vec<Value>) -> Node<A> {
        Node {
            ctor: "Cons".into(),
            exvars,
            args: vec![Arg::Val(Value::label(b)), Arg::Sub(Box::new(x))],
            ann,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn list_and_vector_are_wellformed() {
        assert!(wellformed_code(&list(two())).is_valid());
        assert!(wellformed_code(&vector(two())).is_valid());
    }

    #[test]
    fn unbound_variable_in_result() {
        let mut v = vector(two());
        v.ctors[1].result = Expr::Name("m".into());
        let r = wellformed_code(&v);
        assert!(!r.is_valid());
        assert!(
            r.violations
                .iter()
                .any(|m| m.contains("unbound variable m")),
            "{r:?}"
        );
    }

    #[test]
    fn uninhabited_codes_are_flagged() {
        let mut l = list(two());
        l.ctors.remove(0);
        let r = wellformed_code(&l);
        assert!(r.is_valid() && r.uninhabited);
    }

    #[test]
    fn vector_indices() {
        let v = vector(two());
        let nil = Term::leaf("Nil");
        let t = cons(
            "a",
            cons("b", nil.clone(), (), vec![Value::int(0)]),
            (),
            vec![Value::int(1)],
        );
        assert_eq!(check_term(&v, &t).unwrap(), Value::int(2));
        let bad = cons("a", nil, (), vec![Value::int(5)]);
        let err = check_term(&v, &bad).unwrap_err();
        assert_eq!(err.path, Vec::<usize>::new());
        assert!(err.reason.contains("index 0, required 5"), "{err}");
        let l = list(two());
        let t = cons("a", cons("b", Term::leaf("Nil"), (), vec![]), (), vec![]);
        assert_eq!(check_term(&l, &t).unwrap(), Value::Unit);
        assert_eq!(t.to_string(), "Cons(a, Cons(b, Nil))");
        assert_eq!(t.size(), 3);
    }

    #[test]
    fn errors_are_located() {
        let l = list(two());
        let t = cons("a", cons("c", Term::leaf("Nil"), (), vec![]), (), vec![]);
        let err = check_term(&l, &t).unwrap_err();
        assert_eq!(err.path, vec![1]);
        assert!(
            err.to_string().starts_with("ill-formed term at root.1:"),
            "{err}"
        );
    }
}
