//! Syntax trees of `.rfn` files and their printing.
//!
//! Locations compare equal, so a tree equals its reparsed printout.

use std::fmt::{self, Display, Write};

use num_bigint::BigInt;
use refinery_core::error::Loc;
use refinery_core::expr::{Expr, Pat};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DomainExpr {
    Unit,
    Bool,
    Nat,
    Int,
    Rat,
    Range(BigInt, BigInt),
    Enum(Vec<String>),
    Product(Vec<DomainExpr>),
    Sum(Vec<(String, DomainExpr)>),
    /// `1 + D`, the sum of `fail` and `ok D`.
    Maybe(Box<DomainExpr>),
    DPair(String),
    Term(String),
    /// A declared domain or type parameter.
    Named(String, Loc),
    /// The fibre of a declared family: `T(e)`.
    Fibre(String, Expr, Loc),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FieldKind {
    Const(DomainExpr),
    Rec(Option<Expr>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldDecl {
    pub name: String,
    pub kind: FieldKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CtorDecl {
    pub name: String,
    pub exvars: Vec<(String, DomainExpr)>,
    pub fields: Vec<FieldDecl>,
    pub premises: Vec<Expr>,
    pub result: Option<Expr>,
    pub loc: Loc,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeDecl {
    pub name: String,
    pub params: Vec<(String, DomainExpr)>,
    pub index: Option<DomainExpr>,
    pub ctors: Vec<CtorDecl>,
    pub loc: Loc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlgKind {
    Total,
    Partial,
    Zygo,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClauseDecl {
    pub ctor: String,
    pub exvars: Vec<String>,
    pub binders: Vec<Pat>,
    pub body: Expr,
    pub loc: Loc,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgebraDecl {
    pub name: String,
    pub kind: AlgKind,
    pub ty: String,
    pub carrier: DomainExpr,
    /// Zygomorphisms: forget function name and helper algebra.
    pub helpers: Vec<(String, String)>,
    pub clauses: Vec<ClauseDecl>,
    pub loc: Loc,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForgetClause {
    pub ctor: String,
    pub fields: Vec<String>,
    pub body: Expr,
    pub loc: Loc,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForgetDecl {
    pub name: String,
    pub ty: String,
    pub codomain: DomainExpr,
    pub clauses: Vec<ForgetClause>,
    pub loc: Loc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Style {
    AgdaLike,
    Internal,
}

impl Style {
    pub fn parse(s: &str) -> Option<Style> {
        match s {
            "agda-like" | "agda" => Some(Style::AgdaLike),
            "internal" => Some(Style::Internal),
            _ => None,
        }
    }
}

impl Display for Style {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Style::AgdaLike => "agda-like",
            Style::Internal => "internal",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decl {
    Domain {
        name: String,
        def: DomainExpr,
        loc: Loc,
    },
    Family {
        name: String,
        var: String,
        base: DomainExpr,
        fibres: Vec<(Expr, DomainExpr)>,
        loc: Loc,
    },
    Type(TypeDecl),
    Algebra(AlgebraDecl),
    Forget(ForgetDecl),
    Refine {
        name: String,
        ty: String,
        alg: String,
        loc: Loc,
    },
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

impl Decl {
    pub fn loc(&self) -> Loc {
        match self {
            Decl::Domain { loc, .. }
            | Decl::Family { loc, .. }
            | Decl::Refine { loc, .. }
            | Decl::Verify { loc, .. }
            | Decl::Emit { loc, .. } => *loc,
            Decl::Type(t) => t.loc,
            Decl::Algebra(a) => a.loc,
            Decl::Forget(f) => f.loc,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SpecFile {
    pub decls: Vec<Decl>,
}

fn list<T>(
    f: &mut fmt::Formatter<'_>,
    xs: &[T],
    sep: &str,
    g: impl Fn(&mut fmt::Formatter<'_>, &T) -> fmt::Result,
) -> fmt::Result {
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            f.write_str(sep)?;
        }
        g(f, x)?;
    }
    Ok(())
}

impl Display for DomainExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainExpr::Unit => f.write_str("unit"),
            DomainExpr::Bool => f.write_str("bool"),
            DomainExpr::Nat => f.write_str("nat"),
            DomainExpr::Int => f.write_str("int"),
            DomainExpr::Rat => f.write_str("rat"),
            DomainExpr::Range(lo, hi) => write!(f, "range({lo}, {hi})"),
            DomainExpr::Enum(ls) => write!(f, "enum{{{}}}", ls.join(", ")),
            DomainExpr::Product(ds) => {
                f.write_str("(")?;
                list(f, ds, ", ", |f, d| write!(f, "{d}"))?;
                f.write_str(")")
            }
            DomainExpr::Sum(vs) => {
                f.write_str("sum{")?;
                list(f, vs, ", ", |f, (l, d)| write!(f, "{l}: {d}"))?;
                f.write_str("}")
            }
            DomainExpr::Maybe(d) => write!(f, "1 + {d}"),
            DomainExpr::DPair(n) => write!(f, "dpair({n})"),
            DomainExpr::Term(n) => write!(f, "term {n}"),
            DomainExpr::Named(n, _) => f.write_str(n),
            DomainExpr::Fibre(n, e, _) => write!(f, "{n}({e})"),
        }
    }
}

impl Display for CtorDecl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        if !self.exvars.is_empty() {
            f.write_str("{")?;
            list(f, &self.exvars, ", ", |f, (x, d)| write!(f, "{x}: {d}"))?;
            f.write_str("}")?;
        }
        if !self.fields.is_empty() {
            f.write_str("(")?;
            list(f, &self.fields, ", ", |f, fd| match &fd.kind {
                FieldKind::Const(d) => write!(f, "{}: {d}", fd.name),
                FieldKind::Rec(None) => write!(f, "{}: rec", fd.name),
                FieldKind::Rec(Some(e)) => write!(f, "{}: rec @ {e}", fd.name),
            })?;
            f.write_str(")")?;
        }
        if !self.premises.is_empty() {
            f.write_str(" if ")?;
            list(f, &self.premises, ", ", |f, e| write!(f, "{e}"))?;
        }
        if let Some(r) = &self.result {
            write!(f, " @ {r}")?;
        }
        Ok(())
    }
}

impl Display for TypeDecl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "type {}", self.name)?;
        if !self.params.is_empty() {
            f.write_str("(")?;
            list(f, &self.params, ", ", |f, (x, d)| write!(f, "{x}: {d}"))?;
            f.write_str(")")?;
        }
        if let Some(i) = &self.index {
            write!(f, " : {i}")?;
        }
        f.write_str(" =")?;
        for (i, c) in self.ctors.iter().enumerate() {
            let bar = if i == 0 { ' ' } else { '|' };
            write!(f, "\n  {bar} {c}")?;
        }
        Ok(())
    }
}

fn clause_head(
    f: &mut fmt::Formatter<'_>,
    ctor: &str,
    exvars: &[String],
    binders: &[Pat],
) -> fmt::Result {
    f.write_str(ctor)?;
    if !exvars.is_empty() {
        write!(f, "{{{}}}", exvars.join(", "))?;
    }
    if !binders.is_empty() {
        f.write_str("(")?;
        list(f, binders, ", ", |f, p| write!(f, "{p}"))?;
        f.write_str(")")?;
    }
    Ok(())
}

impl Display for AlgebraDecl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kw = match self.kind {
            AlgKind::Total => "algebra",
            AlgKind::Partial => "partial algebra",
            AlgKind::Zygo => "zygo",
        };
        write!(f, "{kw} {} : {} -> {}", self.name, self.ty, self.carrier)?;
        if !self.helpers.is_empty() {
            f.write_str(" with ")?;
            list(f, &self.helpers, ", ", |f, (n, a)| write!(f, "{n} = {a}"))?;
        }
        f.write_str(" {")?;
        for (i, c) in self.clauses.iter().enumerate() {
            f.write_str(if i == 0 { "\n  " } else { ";\n  " })?;
            clause_head(f, &c.ctor, &c.exvars, &c.binders)?;
            write!(f, " => {}", c.body)?;
        }
        f.write_str("\n}")
    }
}

impl Display for ForgetDecl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "forget {} : {} -> {} {{",
            self.name, self.ty, self.codomain
        )?;
        for (i, c) in self.clauses.iter().enumerate() {
            f.write_str(if i == 0 { "\n  " } else { ";\n  " })?;
            f.write_str(&c.ctor)?;
            if !c.fields.is_empty() {
                write!(f, "({})", c.fields.join(", "))?;
            }
            write!(f, " => {}", c.body)?;
        }
        f.write_str("\n}")
    }
}

impl Display for Decl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Decl::Domain { name, def, .. } => write!(f, "domain {name} = {def}"),
            Decl::Family {
                name,
                var,
                base,
                fibres,
                ..
            } => {
                write!(f, "domain {name}({var}: {base}) = case {var} of {{ ")?;
                list(f, fibres, "; ", |f, (k, d)| write!(f, "{k} => {d}"))?;
                f.write_str(" }")
            }
            Decl::Type(t) => write!(f, "{t}"),
            Decl::Algebra(a) => write!(f, "{a}"),
            Decl::Forget(g) => write!(f, "{g}"),
            Decl::Refine { name, ty, alg, .. } => write!(f, "refine {name} = {ty} by {alg}"),
            Decl::Verify { name, bound, .. } => match bound {
                Some(b) => write!(f, "verify {name} bound {b}"),
                None => write!(f, "verify {name}"),
            },
            Decl::Emit { name, style, .. } => write!(f, "emit {name} {style}"),
        }
    }
}

impl Display for SpecFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        for (i, d) in self.decls.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            writeln!(out, "{d}")?;
        }
        f.write_str(&out)
    }
}
