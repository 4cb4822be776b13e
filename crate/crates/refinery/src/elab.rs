//! Elaboration of parsed files into codes, algebras and refinements.
//!
//! Declarations are processed in order; a `refine` directive makes the
//! refined type available to later declarations under its new name.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use refinery_core::algebra::{
    bang_algebra, elaborate_algebra, initial_algebra_as_algebra, AlgebraKind, AlgebraSpec, Carrier,
    Clause, ZygoPair,
};
use refinery_core::code::{
    elaborate_code, elaborate_forget, ConstructorSpec, Exvar, Field, ForgetFn, FunctorCode,
    VarDomain,
};
use refinery_core::error::{Error, Loc};
use refinery_core::eval::eval_closed;
use refinery_core::expr::{unit, Expr};
use refinery_core::refine::{partial_refine, refine, zygo_refine, RefinedSpec};
use refinery_core::typing::Scope;
use refinery_core::value::{Domain, Family, Value};
use refinery_core::verify::Oracle;

use crate::ast::*;
use crate::lex::SyntaxError;
use crate::parse::parse;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    Syntax,
    UnknownName,
    UnknownConstructor,
    Duplicate,
    ClauseMismatch,
    TypeError,
    NotNormalForm,
    Unsupported,
    Evaluation,
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ErrorKind::Syntax => "SyntaxError",
            ErrorKind::UnknownName => "UnknownName",
            ErrorKind::UnknownConstructor => "UnknownConstructor",
            ErrorKind::Duplicate => "Duplicate",
            ErrorKind::ClauseMismatch => "ClauseMismatch",
            ErrorKind::TypeError => "TypeError",
            ErrorKind::NotNormalForm => "NotNormalForm",
            ErrorKind::Unsupported => "Unsupported",
            ErrorKind::Evaluation => "EvaluationError",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ElabError {
    pub kind: ErrorKind,
    pub line: u32,
    pub col: u32,
    pub message: String,
}

impl ElabError {
    pub fn new(kind: ErrorKind, loc: Loc, message: impl Into<String>) -> Self {
        ElabError {
            kind,
            line: loc.line,
            col: loc.col,
            message: message.into(),
        }
    }

    fn core(e: Error, loc: Loc) -> Self {
        let kind = match &e {
            Error::UnknownConstructor(_) => ErrorKind::UnknownConstructor,
            Error::ClauseMismatch(_) => ErrorKind::ClauseMismatch,
            Error::Type(_) | Error::Term(_) => ErrorKind::TypeError,
            Error::NotNormalForm(..) => ErrorKind::NotNormalForm,
            Error::Unsupported(_) | Error::InfiniteField { .. } => ErrorKind::Unsupported,
            Error::Eval(_) | Error::Domain(_) => ErrorKind::Evaluation,
        };
        ElabError::new(kind, loc, e.to_string())
    }
}

impl fmt::Display for ElabError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: {}: {}",
            self.line, self.col, self.kind, self.message
        )
    }
}

impl std::error::Error for ElabError {}

impl From<SyntaxError> for ElabError {
    fn from(e: SyntaxError) -> Self {
        ElabError {
            kind: ErrorKind::Syntax,
            line: e.line,
            col: e.col,
            message: format!("expected {}, found {}", e.expected, e.found),
        }
    }
}

type EResult<T> = Result<T, ElabError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Total,
    Partial,
    Zygo,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Total => "total",
            Mode::Partial => "partial",
            Mode::Zygo => "zygo",
        })
    }
}

#[derive(Clone, Debug)]
pub struct Algebra {
    pub spec: AlgebraSpec,
    /// Forget function names and helper algebras of a zygomorphism.
    pub helpers: Vec<(String, String)>,
    pub loc: Loc,
}

impl Algebra {
    pub fn mode(&self) -> Mode {
        match self.spec.kind {
            AlgebraKind::Total => Mode::Total,
            AlgebraKind::Partial => Mode::Partial,
            AlgebraKind::ZygoGamma => Mode::Zygo,
        }
    }
}

/// A refined type with everything needed to print and verify it.
#[derive(Clone, Debug)]
pub struct Refinement {
    pub name: String,
    pub mode: Mode,
    pub data: RefinedSpec,
    pub forget: Vec<ForgetFn>,
    pub oracle: Oracle,
}

#[derive(Clone, Debug)]
pub enum Directive {
    Verify {
        name: String,
        bound: Option<usize>,
        loc: Loc,
    },
    Emit {
        name: String,
        style: Style,
        loc: Loc,
    },
}

/// Options of a refinement requested outside the file.
#[derive(Clone, Debug, Default)]
pub struct RefineOpts {
    pub mode: Option<Mode>,
    /// Replaces the helpers declared with a zygomorphism.
    pub helpers: Option<Vec<(String, String)>>,
    pub name: Option<String>,
}

#[derive(Clone, Debug, Default)]
pub struct Module {
    pub domains: Vec<(String, Domain)>,
    pub families: Vec<Family>,
    pub codes: Vec<Arc<FunctorCode>>,
    /// Forget functions defined with a code, by code name.
    pub forgets: BTreeMap<String, Vec<ForgetFn>>,
    pub algebras: Vec<Algebra>,
    pub refinements: Vec<Refinement>,
    pub directives: Vec<Directive>,
    /// Names a `refine` directive gave to (type, algebra) pairs.
    pub refine_names: Vec<(String, String, String)>,
}

/// Parses and elaborates a whole file.
pub fn load(src: &str) -> EResult<Module> {
    let file = parse(src)?;
    elaborate(&file)
}

pub fn elaborate(file: &SpecFile) -> EResult<Module> {
    let mut m = Module::default();
    for d in &file.decls {
        m.decl(d, file)?;
    }
    Ok(m)
}

impl Module {
    pub fn code(&self, name: &str) -> Option<&Arc<FunctorCode>> {
        self.codes.iter().find(|c| c.name == name)
    }

    pub fn family(&self, name: &str) -> Option<&Family> {
        self.families.iter().find(|f| f.name == name)
    }

    pub fn algebra(&self, name: &str) -> Option<&Algebra> {
        self.algebras.iter().find(|a| a.spec.name == name)
    }

    pub fn refinement(&self, name: &str) -> Option<&Refinement> {
        self.refinements.iter().find(|r| r.name == name)
    }

    pub fn forgets_of(&self, code: &str) -> &[ForgetFn] {
        self.forgets.get(code).map_or(&[], Vec::as_slice)
    }

    fn taken(&self, name: &str) -> bool {
        self.domains.iter().any(|(n, _)| n == name) || self.family(name).is_some()
    }

    fn decl(&mut self, d: &Decl, file: &SpecFile) -> EResult<()> {
        match d {
            Decl::Domain { name, def, loc } => {
                if self.taken(name) {
                    return Err(dup(*loc, "domain", name));
                }
                let dom = self.domain(def, &[], *loc)?;
                self.domains.push((name.clone(), dom));
            }
            Decl::Family {
                name,
                var: _,
                base,
                fibres,
                loc,
            } => {
                if self.taken(name) {
                    return Err(dup(*loc, "domain", name));
                }
                let fam = self.family_decl(name, base, fibres, *loc)?;
                self.families.push(fam);
            }
            Decl::Type(t) => {
                if self.code(&t.name).is_some() {
                    return Err(dup(t.loc, "type", &t.name));
                }
                let code = self.type_decl(t, file)?;
                self.codes.push(Arc::new(code));
            }
            Decl::Algebra(a) => {
                if self.algebra(&a.name).is_some() {
                    return Err(dup(a.loc, "algebra", &a.name));
                }
                let alg = self.algebra_decl(a)?;
                self.algebras.push(alg);
            }
            Decl::Forget(f) => {
                let code = self
                    .code(&f.ty)
                    .cloned()
                    .ok_or_else(|| unknown(f.loc, "type", &f.ty))?;
                if self.forgets_of(&code.name).iter().any(|g| g.name == f.name) {
                    return Err(dup(f.loc, "forget function", &f.name));
                }
                let g = self.forget_decl(&code, f, file)?;
                self.forgets.entry(code.name.clone()).or_default().push(g);
            }
            Decl::Refine { name, ty, alg, loc } => {
                let r = self.refine(
                    ty,
                    alg,
                    &RefineOpts {
                        name: Some(name.clone()),
                        ..Default::default()
                    },
                    *loc,
                )?;
                self.refine_names
                    .push((ty.clone(), alg.clone(), name.clone()));
                self.add_refinement(r, *loc)?;
            }
            Decl::Verify { name, bound, loc } => {
                if self.refinement(name).is_none() {
                    return Err(unknown(*loc, "refinement", name));
                }
                self.directives.push(Directive::Verify {
                    name: name.clone(),
                    bound: *bound,
                    loc: *loc,
                });
            }
            Decl::Emit { name, style, loc } => {
                if self.refinement(name).is_none() {
                    return Err(unknown(*loc, "refinement", name));
                }
                self.directives.push(Directive::Emit {
                    name: name.clone(),
                    style: *style,
                    loc: *loc,
                });
            }
        }
        Ok(())
    }

    pub fn add_refinement(&mut self, r: Refinement, loc: Loc) -> EResult<()> {
        if self.code(&r.name).is_some() {
            return Err(dup(loc, "type", &r.name));
        }
        self.codes.push(r.data.code.clone());
        if !r.forget.is_empty() {
            self.forgets.insert(r.name.clone(), r.forget.clone());
        }
        self.refinements.push(r);
        Ok(())
    }

    /// Resolves a domain; `locals` are type parameters.
    pub fn domain(&self, d: &DomainExpr, locals: &[(String, Domain)], loc: Loc) -> EResult<Domain> {
        let out = match d {
            DomainExpr::Unit => Domain::Unit,
            DomainExpr::Bool => Domain::Bool,
            DomainExpr::Nat => Domain::Nat,
            DomainExpr::Int => Domain::Int,
            DomainExpr::Rat => Domain::Rational,
            DomainExpr::Range(lo, hi) => Domain::IntRange(lo.clone(), hi.clone()),
            DomainExpr::Enum(ls) => Domain::Enum(ls.clone()),
            DomainExpr::Product(ds) => Domain::Product(
                ds.iter()
                    .map(|d| self.domain(d, locals, loc))
                    .collect::<EResult<_>>()?,
            ),
            DomainExpr::Sum(vs) => Domain::Sum(
                vs.iter()
                    .map(|(l, d)| Ok((l.clone(), self.domain(d, locals, loc)?)))
                    .collect::<EResult<_>>()?,
            ),
            DomainExpr::Maybe(d) => Domain::maybe(self.domain(d, locals, loc)?),
            DomainExpr::DPair(n) => Domain::DepPair(Box::new(
                self.family(n)
                    .cloned()
                    .ok_or_else(|| unknown(loc, "family", n))?,
            )),
            DomainExpr::Term(n) => Domain::Term(
                self.code(n)
                    .cloned()
                    .ok_or_else(|| unknown(loc, "type", n))?,
            ),
            DomainExpr::Named(n, l) => {
                if let Some((_, d)) = locals.iter().rev().find(|(x, _)| x == n) {
                    d.clone()
                } else if let Some((_, d)) = self.domains.iter().find(|(x, _)| x == n) {
                    d.clone()
                } else if self.family(n).is_some() {
                    return Err(ElabError::new(
                        ErrorKind::TypeError,
                        *l,
                        format!("family {n} needs an argument here"),
                    ));
                } else {
                    return Err(unknown(*l, "domain", n));
                }
            }
            DomainExpr::Fibre(n, _, l) => {
                return Err(ElabError::new(
                    ErrorKind::Unsupported,
                    *l,
                    format!("the fibre {n}(..) is only allowed for index variables"),
                ))
            }
        };
        out.validate()
            .map_err(|e| ElabError::new(ErrorKind::TypeError, loc, e.to_string()))?;
        Ok(out)
    }

    fn var_domain(
        &self,
        d: &DomainExpr,
        locals: &[(String, Domain)],
        loc: Loc,
    ) -> EResult<VarDomain> {
        match d {
            DomainExpr::Fibre(n, e, l) => {
                let family = self
                    .family(n)
                    .cloned()
                    .ok_or_else(|| unknown(*l, "family", n))?;
                Ok(VarDomain::Fibre {
                    family,
                    at: e.clone(),
                })
            }
            _ => Ok(VarDomain::Plain(self.domain(d, locals, loc)?)),
        }
    }

    fn family_decl(
        &self,
        name: &str,
        base: &DomainExpr,
        fibres: &[(Expr, DomainExpr)],
        loc: Loc,
    ) -> EResult<Family> {
        let base = self.domain(base, &[], loc)?;
        let points = base.enumerate().map_err(|_| {
            ElabError::new(
                ErrorKind::TypeError,
                loc,
                format!("the base {base} of family {name} must be finite"),
            )
        })?;
        let mut table: Vec<(Value, Domain)> = Vec::new();
        for (k, d) in fibres {
            let v = Scope::new()
                .check(k, &base)
                .map_err(|e| ElabError::core(e, loc))
                .and_then(|e| {
                    eval_closed(&e)
                        .map_err(|e| ElabError::new(ErrorKind::Evaluation, loc, e.to_string()))
                })?;
            if table.iter().any(|(w, _)| *w == v) {
                return Err(ElabError::new(
                    ErrorKind::Duplicate,
                    loc,
                    format!("family {name} gives the fibre at {v} twice"),
                ));
            }
            table.push((v, self.domain(d, &[], loc)?));
        }
        let mut ordered = Vec::new();
        for p in points {
            match table.iter().position(|(v, _)| *v == p) {
                Some(i) => ordered.push(table.remove(i)),
                None => {
                    return Err(ElabError::new(
                        ErrorKind::ClauseMismatch,
                        loc,
                        format!("family {name} has no fibre at {p}"),
                    ))
                }
            }
        }
        let fam = Family {
            name: name.to_string(),
            base,
            fibres: ordered,
        };
        fam.validate()
            .map_err(|e| ElabError::new(ErrorKind::TypeError, loc, e.to_string()))?;
        Ok(fam)
    }

    fn type_decl(&self, t: &TypeDecl, file: &SpecFile) -> EResult<FunctorCode> {
        let mut params = Vec::new();
        for (x, d) in &t.params {
            let d = self.domain(d, &params, t.loc)?;
            params.push((x.clone(), d));
        }
        let index = match &t.index {
            Some(d) => self.domain(d, &params, t.loc)?,
            None => Domain::Unit,
        };
        let mut ctors = Vec::new();
        for c in &t.ctors {
            if ctors.iter().any(|k: &ConstructorSpec| k.name == c.name) {
                return Err(dup(c.loc, "constructor", &c.name));
            }
            let mut exvars = Vec::new();
            for (x, d) in &c.exvars {
                exvars.push(Exvar {
                    name: x.clone(),
                    domain: self.var_domain(d, &params, c.loc)?,
                });
            }
            let mut fields = Vec::new();
            for f in &c.fields {
                fields.push(match &f.kind {
                    FieldKind::Const(d) => Field::Const {
                        name: f.name.clone(),
                        domain: self.domain(d, &params, c.loc)?,
                    },
                    FieldKind::Rec(i) => Field::Rec {
                        name: f.name.clone(),
                        index: i.clone().unwrap_or_else(unit),
                    },
                });
            }
            ctors.push(ConstructorSpec {
                name: c.name.clone(),
                exvars,
                fields,
                premises: c.premises.clone(),
                result: c.result.clone().unwrap_or_else(unit),
            });
        }
        let code = FunctorCode {
            name: t.name.clone(),
            params,
            index,
            ctors,
        };
        let sigs = self.forget_sigs(&t.name, file)?;
        elaborate_code(&code, &sigs, &self.codes).map_err(|errs| {
            let first = &errs[0];
            let loc = t
                .ctors
                .iter()
                .find(|c| first.starts_with(&format!("{}.{}:", t.name, c.name)))
                .map_or(t.loc, |c| c.loc);
            ElabError::new(ErrorKind::TypeError, loc, errs.join("; "))
        })
    }

    /// Signatures of the forget functions declared for `ty` anywhere in
    /// the file, so the type may mention them before their clauses.
    fn forget_sigs(&self, ty: &str, file: &SpecFile) -> EResult<Vec<(String, Domain)>> {
        let mut out = Vec::new();
        for d in &file.decls {
            if let Decl::Forget(f) = d {
                if f.ty == ty {
                    out.push((f.name.clone(), self.domain(&f.codomain, &[], f.loc)?));
                }
            }
        }
        Ok(out)
    }

    fn forget_decl(
        &self,
        code: &Arc<FunctorCode>,
        f: &ForgetDecl,
        file: &SpecFile,
    ) -> EResult<ForgetFn> {
        let codomain = self.domain(&f.codomain, &[], f.loc)?;
        for c in &f.clauses {
            let spec = code.ctor(&c.ctor).ok_or_else(|| {
                ElabError::new(ErrorKind::UnknownConstructor, c.loc, c.ctor.clone())
            })?;
            let names: Vec<&str> = spec.fields.iter().map(Field::name).collect();
            if names != c.fields.iter().map(String::as_str).collect::<Vec<_>>() {
                return Err(ElabError::new(
                    ErrorKind::ClauseMismatch,
                    c.loc,
                    format!(
                        "the clause must name the fields of {} as ({})",
                        c.ctor,
                        names.join(", ")
                    ),
                ));
            }
        }
        let g = ForgetFn {
            name: f.name.clone(),
            codomain,
            clauses: f
                .clauses
                .iter()
                .map(|c| (c.ctor.clone(), c.body.clone()))
                .collect(),
        };
        let sigs = self.forget_sigs(&code.name, file)?;
        elaborate_forget(code, &g, &sigs, &self.codes).map_err(|e| ElabError::core(e, f.loc))
    }

    fn algebra_decl(&self, a: &AlgebraDecl) -> EResult<Algebra> {
        let code = self
            .code(&a.ty)
            .cloned()
            .ok_or_else(|| unknown(a.loc, "type", &a.ty))?;
        let carrier = match &a.carrier {
            DomainExpr::Named(n, _) if self.family(n).is_some() => {
                Carrier::Family(self.family(n).unwrap().clone())
            }
            d => Carrier::Plain(self.domain(d, &[], a.loc)?),
        };
        for (i, c) in a.clauses.iter().enumerate() {
            if code.ctor(&c.ctor).is_none() {
                return Err(ElabError::new(
                    ErrorKind::UnknownConstructor,
                    c.loc,
                    format!("{} is not a constructor of {}", c.ctor, code.name),
                ));
            }
            if a.clauses[..i].iter().any(|d| d.ctor == c.ctor) {
                return Err(ElabError::new(
                    ErrorKind::ClauseMismatch,
                    c.loc,
                    format!("second clause for {} in {}", c.ctor, a.name),
                ));
            }
        }
        if let Some(spec) = code
            .ctors
            .iter()
            .find(|s| !a.clauses.iter().any(|c| c.ctor == s.name))
        {
            return Err(ElabError::new(
                ErrorKind::ClauseMismatch,
                a.loc,
                format!("{} has no clause for {}", a.name, spec.name),
            ));
        }
        let (kind, companion) = match a.kind {
            AlgKind::Total => (AlgebraKind::Total, None),
            AlgKind::Partial => (AlgebraKind::Partial, None),
            AlgKind::Zygo => {
                let deltas = self.helpers(&a.helpers, &code, a.loc)?;
                let z = ZygoPair {
                    gamma: AlgebraSpec {
                        name: a.name.clone(),
                        code: code.name.clone(),
                        kind: AlgebraKind::ZygoGamma,
                        carrier: carrier.clone(),
                        companion: None,
                        clauses: Vec::new(),
                    },
                    deltas,
                };
                (AlgebraKind::ZygoGamma, Some(z.companion()))
            }
        };
        let spec = AlgebraSpec {
            name: a.name.clone(),
            code: code.name.clone(),
            kind,
            carrier,
            companion,
            clauses: a
                .clauses
                .iter()
                .map(|c| Clause {
                    ctor: c.ctor.clone(),
                    exvars: c.exvars.clone(),
                    binders: c.binders.clone(),
                    body: c.body.clone(),
                })
                .collect(),
        };
        let spec = elaborate_algebra(&code, &spec, &self.codes).map_err(|e| {
            let msg = e.to_string();
            let loc = a
                .clauses
                .iter()
                .find(|c| {
                    msg.contains(&format!("{} {}:", a.name, c.ctor))
                        || msg.contains(&format!("{}.{}", a.name, c.ctor))
                })
                .map_or(a.loc, |c| c.loc);
            ElabError::core(e, loc)
        })?;
        Ok(Algebra {
            spec,
            helpers: a.helpers.clone(),
            loc: a.loc,
        })
    }

    fn helpers(
        &self,
        hs: &[(String, String)],
        code: &FunctorCode,
        loc: Loc,
    ) -> EResult<Vec<(String, AlgebraSpec)>> {
        let mut out: Vec<(String, AlgebraSpec)> = Vec::new();
        for (f, h) in hs {
            if out.iter().any(|(g, _)| g == f) {
                return Err(dup(loc, "forget function", f));
            }
            let spec = self.algebra_spec(h, code, loc)?;
            if spec.kind != AlgebraKind::Total {
                return Err(ElabError::new(
                    ErrorKind::TypeError,
                    loc,
                    format!("helper {h} must be a total algebra"),
                ));
            }
            out.push((f.clone(), spec));
        }
        Ok(out)
    }

    /// A declared algebra over `code`, or one of the built-in algebras
    /// `in` and `bang`.
    fn algebra_spec(&self, name: &str, code: &FunctorCode, loc: Loc) -> EResult<AlgebraSpec> {
        if let Some(a) = self.algebra(name) {
            if a.spec.code != code.name {
                return Err(ElabError::new(
                    ErrorKind::TypeError,
                    loc,
                    format!(
                        "{name} is an algebra over {}, not {}",
                        a.spec.code, code.name
                    ),
                ));
            }
            return Ok(a.spec.clone());
        }
        let code = self
            .code(&code.name)
            .cloned()
            .ok_or_else(|| unknown(loc, "type", &code.name))?;
        let spec = match name {
            "in" => initial_algebra_as_algebra(&code),
            "bang" => bang_algebra(&code),
            _ => return Err(unknown(loc, "algebra", name)),
        };
        elaborate_algebra(&code, &spec, &self.codes).map_err(|e| ElabError::core(e, loc))
    }

    /// The name a refinement of `ty` by `alg` gets when none is given.
    pub fn default_name(&self, ty: &str, alg: &str) -> String {
        self.refine_names
            .iter()
            .find(|(t, a, _)| t == ty && a == alg)
            .map(|(_, _, n)| n.clone())
            .unwrap_or_else(|| format!("{ty}_{alg}"))
    }

    /// Refines `ty` by `alg`. The mode must agree with the algebra.
    pub fn refine(&self, ty: &str, alg: &str, opts: &RefineOpts, loc: Loc) -> EResult<Refinement> {
        let code = self
            .code(ty)
            .cloned()
            .ok_or_else(|| unknown(loc, "type", ty))?;
        let spec = self.algebra_spec(alg, &code, loc)?;
        let declared = match spec.kind {
            AlgebraKind::Total => Mode::Total,
            AlgebraKind::Partial => Mode::Partial,
            AlgebraKind::ZygoGamma => Mode::Zygo,
        };
        let mode = opts.mode.unwrap_or(declared);
        if mode != declared {
            return Err(ElabError::new(
                ErrorKind::TypeError,
                loc,
                format!("{alg} is a {declared} algebra, not a {mode} one"),
            ));
        }
        let name = opts
            .name
            .clone()
            .unwrap_or_else(|| self.default_name(ty, alg));
        let core = |e| ElabError::core(e, loc);
        match mode {
            Mode::Total => Ok(Refinement {
                name: name.clone(),
                mode,
                data: refine(&code, &spec, &name, &self.codes).map_err(core)?,
                forget: Vec::new(),
                oracle: Oracle::total(&spec),
            }),
            Mode::Partial => Ok(Refinement {
                name: name.clone(),
                mode,
                data: partial_refine(&code, &spec, &name, &self.codes).map_err(core)?,
                forget: Vec::new(),
                oracle: Oracle::partial(&code, &spec).map_err(core)?,
            }),
            Mode::Zygo => {
                let declared = self
                    .algebra(alg)
                    .map(|a| a.helpers.clone())
                    .unwrap_or_default();
                let hs = opts.helpers.clone().unwrap_or(declared);
                let z = ZygoPair {
                    gamma: spec,
                    deltas: self.helpers(&hs, &code, loc)?,
                };
                let ir = zygo_refine(&code, &z, &name, &self.codes).map_err(core)?;
                Ok(Refinement {
                    name,
                    mode,
                    data: ir.data,
                    forget: ir.forget,
                    oracle: Oracle::zygo(&code, &z).map_err(core)?,
                })
            }
        }
    }

    /// The declared name of a domain, for printing.
    pub fn domain_name(&self, d: &Domain) -> Option<&str> {
        self.domains
            .iter()
            .find(|(_, e)| e == d)
            .map(|(n, _)| n.as_str())
    }
}

fn dup(loc: Loc, what: &str, name: &str) -> ElabError {
    ElabError::new(
        ErrorKind::Duplicate,
        loc,
        format!("{what} {name} is already defined"),
    )
}

fn unknown(loc: Loc, what: &str, name: &str) -> ElabError {
    ElabError::new(
        ErrorKind::UnknownName,
        loc,
        format!("unknown {what} {name}"),
    )
}
