//! Printing refined types.

use std::collections::BTreeSet;
use std::fmt::Write;

use refinery_core::code::{ConstructorSpec, Field, ForgetFn, FunctorCode, VarDomain};
use refinery_core::expr::{CmpOp, Expr};
use refinery_core::value::{ArithOp, Domain, Family, Value};

use crate::ast::Style;
use crate::elab::{Module, Refinement};

pub fn emit(m: &Module, r: &Refinement, style: Style) -> String {
    match style {
        Style::AgdaLike => agda(m, &r.data.code, &r.forget),
        Style::Internal => internal(&r.data.code, &r.forget),
    }
}

// ---- internal style ----

/// The refined type as `.rfn` declarations, together with every family
/// and type its domains mention.
pub fn internal(code: &FunctorCode, forget: &[ForgetFn]) -> String {
    let mut families = Vec::new();
    let mut codes = Vec::new();
    collect_code(code, &mut families, &mut codes, true);
    let mut out = String::new();
    for f in &families {
        writeln!(out, "{}", family_decl(f)).unwrap();
        out.push('\n');
    }
    for c in &codes {
        writeln!(out, "{}", type_decl(c)).unwrap();
        out.push('\n');
    }
    writeln!(out, "{}", type_decl(code)).unwrap();
    for g in forget {
        out.push('\n');
        writeln!(out, "{}", forget_decl(code, g)).unwrap();
    }
    out
}

fn collect_code(
    code: &FunctorCode,
    fams: &mut Vec<Family>,
    codes: &mut Vec<FunctorCode>,
    root: bool,
) {
    let mut doms: Vec<&Domain> = vec![&code.index];
    doms.extend(code.params.iter().map(|(_, d)| d));
    for c in &code.ctors {
        for x in &c.exvars {
            match &x.domain {
                VarDomain::Plain(d) => doms.push(d),
                VarDomain::Fibre { family, .. } => collect_family(family, fams, codes),
            }
        }
        doms.extend(c.consts().map(|(_, d)| d));
    }
    for d in doms {
        collect_domain(d, fams, codes);
    }
    if !root && !codes.iter().any(|c| c.name == code.name) {
        codes.push(code.clone());
    }
}

fn collect_family(f: &Family, fams: &mut Vec<Family>, codes: &mut Vec<FunctorCode>) {
    collect_domain(&f.base, fams, codes);
    for (_, d) in &f.fibres {
        collect_domain(d, fams, codes);
    }
    if !fams.iter().any(|g| g.name == f.name) {
        fams.push(f.clone());
    }
}

fn collect_domain(d: &Domain, fams: &mut Vec<Family>, codes: &mut Vec<FunctorCode>) {
    match d {
        Domain::Product(ds) => ds.iter().for_each(|d| collect_domain(d, fams, codes)),
        Domain::Sum(vs) => vs.iter().for_each(|(_, d)| collect_domain(d, fams, codes)),
        Domain::DepPair(f) => collect_family(f, fams, codes),
        Domain::Term(c) if !codes.iter().any(|k| k.name == c.name) => {
            collect_code(c, fams, codes, false)
        }
        _ => {}
    }
}

fn family_decl(f: &Family) -> String {
    let mut s = format!("domain {}(i: {}) = case i of {{ ", f.name, f.base);
    for (k, (v, d)) in f.fibres.iter().enumerate() {
        if k > 0 {
            s.push_str("; ");
        }
        write!(s, "{} => {d}", Expr::Lit(v.clone())).unwrap();
    }
    s.push_str(" }");
    s
}

fn var_domain(d: &VarDomain) -> String {
    match d {
        VarDomain::Plain(d) => d.to_string(),
        VarDomain::Fibre { family, at } => format!("{}({at})", family.name),
    }
}

fn ctor_decl(c: &ConstructorSpec, unit_index: bool) -> String {
    let mut s = c.name.clone();
    if !c.exvars.is_empty() {
        let xs: Vec<String> = c
            .exvars
            .iter()
            .map(|x| format!("{}: {}", x.name, var_domain(&x.domain)))
            .collect();
        write!(s, "{{{}}}", xs.join(", ")).unwrap();
    }
    if !c.fields.is_empty() {
        let fs: Vec<String> = c
            .fields
            .iter()
            .map(|f| match f {
                Field::Const { name, domain } => format!("{name}: {domain}"),
                Field::Rec { name, .. } if unit_index => format!("{name}: rec"),
                Field::Rec { name, index } => format!("{name}: rec @ {index}"),
            })
            .collect();
        write!(s, "({})", fs.join(", ")).unwrap();
    }
    if !c.premises.is_empty() {
        let ps: Vec<String> = c.premises.iter().map(|p| p.to_string()).collect();
        write!(s, " if {}", ps.join(", ")).unwrap();
    }
    if !unit_index {
        write!(s, " @ {}", c.result).unwrap();
    }
    s
}

fn type_decl(code: &FunctorCode) -> String {
    let mut s = format!("type {}", code.name);
    if !code.params.is_empty() {
        let ps: Vec<String> = code
            .params
            .iter()
            .map(|(x, d)| format!("{x}: {d}"))
            .collect();
        write!(s, "({})", ps.join(", ")).unwrap();
    }
    let unit_index = code.is_unit_indexed();
    if !unit_index {
        write!(s, " : {}", code.index).unwrap();
    }
    s.push_str(" =");
    for c in &code.ctors {
        write!(s, "\n  | {}", ctor_decl(c, unit_index)).unwrap();
    }
    s
}

fn forget_decl(code: &FunctorCode, g: &ForgetFn) -> String {
    let mut s = format!("forget {} : {} -> {} {{", g.name, code.name, g.codomain);
    for (k, (ctor, body)) in g.clauses.iter().enumerate() {
        s.push_str(if k == 0 { "\n  " } else { ";\n  " });
        s.push_str(ctor);
        if let Some(spec) = code.ctor(ctor) {
            if !spec.fields.is_empty() {
                let names: Vec<&str> = spec.fields.iter().map(Field::name).collect();
                write!(s, "({})", names.join(", ")).unwrap();
            }
        }
        write!(s, " => {body}").unwrap();
    }
    s.push_str("\n}");
    s
}

// ---- agda-like style ----

struct Agda<'a> {
    m: &'a Module,
    code: &'a FunctorCode,
}

/// An Agda-like `data` declaration, or a `mutual` block with the forget
/// functions when there are any.
pub fn agda(m: &Module, code: &FunctorCode, forget: &[ForgetFn]) -> String {
    let a = Agda { m, code };
    let data = a.data();
    if forget.is_empty() {
        return data;
    }
    let mut out = String::from("mutual\n");
    for line in data.lines() {
        writeln!(out, "  {line}").unwrap();
    }
    for g in forget {
        out.push('\n');
        for line in a.forget_fn(g).lines() {
            writeln!(out, "  {line}").unwrap();
        }
    }
    out
}

impl Agda<'_> {
    fn data(&self) -> String {
        let mut head = format!("data {}", self.code.name);
        for (p, _) in &self.code.params {
            write!(head, " ({p} : Set)").unwrap();
        }
        write!(head, " : {}Set where", self.index_telescope()).unwrap();
        let width = self
            .code
            .ctors
            .iter()
            .map(|c| c.name.len())
            .max()
            .unwrap_or(0);
        let mut out = head;
        for c in &self.code.ctors {
            let parts = self.signature(c);
            let pad = " ".repeat(width - c.name.len());
            let indent = " ".repeat(2 + width + 3);
            write!(out, "\n  {}{pad} : ", c.name).unwrap();
            let one_line = parts.join(" -> ");
            if one_line.len() + indent.len() <= 76 {
                out.push_str(&one_line);
            } else {
                for (k, p) in parts.iter().enumerate() {
                    if k > 0 {
                        write!(out, "\n{indent}").unwrap();
                    }
                    out.push_str(p);
                    if k + 1 < parts.len() {
                        out.push_str(" ->");
                    }
                }
            }
        }
        out.push('\n');
        out
    }

    fn index_telescope(&self) -> String {
        match &self.code.index {
            Domain::Unit => String::new(),
            Domain::DepPair(f) => {
                let base = self.domain(&f.base);
                let v = base
                    .chars()
                    .next()
                    .map_or("i".to_string(), |c| c.to_lowercase().to_string());
                format!("({v} : {base}) -> {} {v} -> ", f.name)
            }
            Domain::Product(ds) => ds
                .iter()
                .map(|d| format!("{} -> ", self.domain(d)))
                .collect(),
            d => format!("{} -> ", self.domain(d)),
        }
    }

    fn ty(&self, index: &Expr) -> String {
        let mut s = self.code.name.clone();
        for (p, _) in &self.code.params {
            write!(s, " {p}").unwrap();
        }
        if self.code.is_unit_indexed() {
            return s;
        }
        for part in index_parts(index) {
            write!(s, " {}", self.expr_at(&part, APP + 1)).unwrap();
        }
        s
    }

    /// The parts of a constructor type, ending in its result.
    fn signature(&self, c: &ConstructorSpec) -> Vec<String> {
        let later = |from: usize| {
            let mut names = BTreeSet::new();
            for f in &c.fields[from..] {
                if let Field::Rec { index, .. } = f {
                    names.extend(index.free_vars());
                }
            }
            for p in &c.premises {
                names.extend(p.free_vars());
            }
            names.extend(c.result.free_vars());
            names
        };
        let mut parts = Vec::new();
        let mut k = 0;
        while k < c.exvars.len() {
            let d = &c.exvars[k].domain;
            // a unit index carries nothing
            if *d == VarDomain::Plain(Domain::Unit) {
                k += 1;
                continue;
            }
            let mut names = vec![c.exvars[k].name.clone()];
            while k + 1 < c.exvars.len() && c.exvars[k + 1].domain == *d {
                k += 1;
                names.push(c.exvars[k].name.clone());
            }
            let d = match d {
                VarDomain::Plain(d) => self.domain(d),
                VarDomain::Fibre { family, at } => {
                    format!("{} {}", family.name, self.expr_at(at, APP + 1))
                }
            };
            parts.push(format!("{{{} : {d}}}", names.join(" ")));
            k += 1;
        }
        for (i, f) in c.fields.iter().enumerate() {
            let needed = later(i + 1);
            match f {
                Field::Const { name, domain } => {
                    let d = self.domain(domain);
                    if needed.contains(name) {
                        parts.push(format!("({name} : {d})"));
                    } else {
                        parts.push(d);
                    }
                }
                Field::Rec { name, index } => {
                    let t = self.ty(index);
                    if needed.contains(name) || self.forget_mentions(c, name) {
                        parts.push(format!("({name} : {t})"));
                    } else {
                        parts.push(t);
                    }
                }
            }
        }
        let many = c.premises.len() > 1;
        for (i, p) in c.premises.iter().enumerate() {
            let eq = if many {
                format!("eq{}", i + 1)
            } else {
                "eq".to_string()
            };
            let (l, r) = match p {
                Expr::Cmp(CmpOp::Eq, l, r) => (self.expr_at(l, CMP + 1), self.expr_at(r, CMP + 1)),
                e => (self.expr_at(e, CMP + 1), "true".to_string()),
            };
            parts.push(format!("({eq} : {l} == {r})"));
        }
        parts.push(self.ty(&c.result));
        parts
    }

    fn forget_mentions(&self, c: &ConstructorSpec, field: &str) -> bool {
        let mut found = false;
        c.result.visit(&mut |e| {
            if let Expr::Forget { arg, .. } = e {
                if matches!(&**arg, Expr::Var(x) if x == field) {
                    found = true;
                }
            }
        });
        found
    }

    fn forget_fn(&self, g: &ForgetFn) -> String {
        let v = match &self.code.index {
            Domain::Nat => "n",
            _ => "a",
        };
        let mut out = format!(
            "{} : {{{v} : {}}} -> {} {v} -> {}\n",
            g.name,
            self.domain(&self.code.index),
            self.code.name,
            self.domain(&g.codomain)
        );
        let heads: Vec<String> = g
            .clauses
            .iter()
            .map(|(ctor, _)| {
                let spec = self.code.ctor(ctor);
                let fields: Vec<&str> = spec
                    .map(|s| s.fields.iter().map(Field::name).collect())
                    .unwrap_or_default();
                if fields.is_empty() {
                    format!("{} {ctor}", g.name)
                } else {
                    format!("{} ({ctor} {})", g.name, fields.join(" "))
                }
            })
            .collect();
        let width = heads.iter().map(String::len).max().unwrap_or(0);
        for (h, (_, body)) in heads.iter().zip(&g.clauses) {
            writeln!(out, "{h:width$} = {}", self.expr(body)).unwrap();
        }
        out
    }

    fn domain(&self, d: &Domain) -> String {
        if let Some((p, _)) = self.code.params.iter().find(|(_, e)| e == d) {
            return p.clone();
        }
        if let Some(n) = self.m.domain_name(d) {
            return n.to_string();
        }
        match d {
            Domain::Unit => "Unit".into(),
            Domain::Bool => "Boolean".into(),
            Domain::Nat => "Nat".into(),
            Domain::Int => "Integer".into(),
            Domain::Rational => "Rational".into(),
            Domain::IntRange(lo, hi) => format!("Range {lo} {hi}"),
            Domain::Enum(ls) => format!("enum{{{}}}", ls.join(", ")),
            Domain::Product(ds) => ds
                .iter()
                .map(|d| self.domain_atom(d))
                .collect::<Vec<_>>()
                .join(" * "),
            Domain::Sum(vs) if vs.len() == 2 && vs[0].1 == Domain::Unit => {
                format!("1 + {}", self.domain_atom(&vs[1].1))
            }
            Domain::Sum(vs) => vs
                .iter()
                .map(|(_, d)| self.domain_atom(d))
                .collect::<Vec<_>>()
                .join(" + "),
            Domain::DepPair(f) => format!("Sigma {} {}", self.domain_atom(&f.base), f.name),
            Domain::Term(c) => {
                let mut s = c.name.clone();
                for (p, _) in &c.params {
                    write!(s, " {p}").unwrap();
                }
                s
            }
        }
    }

    fn domain_atom(&self, d: &Domain) -> String {
        let s = self.domain(d);
        if s.contains(' ') && !s.starts_with("enum{") {
            format!("({s})")
        } else {
            s
        }
    }

    fn expr(&self, e: &Expr) -> String {
        self.expr_at(e, 0)
    }

    fn expr_at(&self, e: &Expr, min: u8) -> String {
        let p = prec(e);
        let s = self.expr_raw(e);
        if p < min {
            format!("({s})")
        } else {
            s
        }
    }

    fn expr_raw(&self, e: &Expr) -> String {
        let app = |head: &str, args: &[&Expr]| {
            let mut s = head.to_string();
            for a in args {
                write!(s, " {}", self.expr_at(a, APP + 1)).unwrap();
            }
            s
        };
        match e {
            Expr::Lit(v) => value(v),
            Expr::Var(x) | Expr::Name(x) => x.clone(),
            Expr::Apply { name, exvars, args }
            | Expr::Build {
                ctor: name,
                exvars,
                args,
                ..
            } => {
                let all: Vec<&Expr> = if matches!(e, Expr::Build { .. }) {
                    args.iter().collect()
                } else {
                    exvars.iter().chain(args).collect()
                };
                app(name, &all)
            }
            Expr::Arith(op, a, b, _) => {
                let p = prec(e);
                let sym = match op {
                    ArithOp::Add => "+",
                    ArithOp::Sub => "-",
                    ArithOp::Mul => "*",
                    ArithOp::Div => "/",
                };
                format!("{} {sym} {}", self.expr_at(a, p), self.expr_at(b, p + 1))
            }
            Expr::Neg(a) => format!("- {}", self.expr_at(a, APP)),
            Expr::Cmp(op, a, b) => {
                let sym = match op {
                    CmpOp::Eq => "==",
                    other => other.symbol(),
                };
                format!(
                    "{} {sym} {}",
                    self.expr_at(a, CMP + 1),
                    self.expr_at(b, CMP + 1)
                )
            }
            Expr::And(a, b) => format!("{} && {}", self.expr_at(a, 2), self.expr_at(b, 3)),
            Expr::Or(a, b) => format!("{} || {}", self.expr_at(a, 1), self.expr_at(b, 2)),
            Expr::Not(a) => format!("not {}", self.expr_at(a, APP + 1)),
            Expr::If(c, t, f) => format!(
                "if {} then {} else {}",
                self.expr(c),
                self.expr(t),
                self.expr(f)
            ),
            Expr::Case(s, bs) => {
                let arms: Vec<String> = bs
                    .iter()
                    .map(|b| match &b.binder {
                        Some(x) => format!("{} {x} -> {}", b.label, self.expr(&b.body)),
                        None => format!("{} -> {}", b.label, self.expr(&b.body)),
                    })
                    .collect();
                format!("case {} of {{ {} }}", self.expr(s), arms.join("; "))
            }
            Expr::Tuple(es) => {
                let xs: Vec<String> = es.iter().map(|e| self.expr(e)).collect();
                format!("({})", xs.join(", "))
            }
            Expr::Proj(a, i) => format!("{}.{i}", self.expr_at(a, APP + 1)),
            Expr::Tag(l, p) if p.is_unit_lit() => l.clone(),
            Expr::Tag(l, p) => app(l, &[p]),
            Expr::DPair(a, b) => format!("({}, {})", self.expr(a), self.expr(b)),
            Expr::Forget { func, arg } => app(func, &[arg]),
        }
    }
}

const CMP: u8 = 4;
const APP: u8 = 8;

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::If(..) | Expr::Case(..) => 0,
        Expr::Or(..) => 1,
        Expr::And(..) => 2,
        Expr::Not(..) => 3,
        Expr::Cmp(..) => CMP,
        Expr::Arith(ArithOp::Add | ArithOp::Sub, ..) => 5,
        Expr::Arith(ArithOp::Mul | ArithOp::Div, ..) => 6,
        Expr::Neg(..) => 7,
        Expr::Lit(Value::Int(n)) if n.sign() == num_bigint::Sign::Minus => 7,
        Expr::Lit(Value::Rat(r)) if !r.is_integer() => 6,
        Expr::Lit(Value::Tagged(_, p)) if **p != Value::Unit => APP,
        Expr::Tag(_, p) if !p.is_unit_lit() => APP,
        Expr::Build { args, .. } if !args.is_empty() => APP,
        Expr::Apply { args, exvars, .. } if !args.is_empty() || !exvars.is_empty() => APP,
        Expr::Forget { .. } => APP,
        _ => 9,
    }
}

fn value(v: &Value) -> String {
    match v {
        Value::Tagged(l, p) if **p == Value::Unit => l.clone(),
        Value::Tagged(l, p) => {
            let inner = value(p);
            if inner.contains(' ') && !inner.starts_with('(') {
                format!("{l} ({inner})")
            } else {
                format!("{l} {inner}")
            }
        }
        Value::Tuple(vs) => format!("({})", vs.iter().map(value).collect::<Vec<_>>().join(", ")),
        Value::Pair(a, b) => format!("({}, {})", value(a), value(b)),
        other => other.to_string(),
    }
}

/// Index arguments, with tuples and dependent pairs spread out.
fn index_parts(e: &Expr) -> Vec<Expr> {
    match e {
        Expr::Lit(Value::Unit) => vec![],
        Expr::Tuple(es) => es.clone(),
        Expr::DPair(a, b) => vec![(**a).clone(), (**b).clone()],
        Expr::Lit(Value::Tuple(vs)) => vs.iter().cloned().map(Expr::Lit).collect(),
        Expr::Lit(Value::Pair(a, b)) => vec![Expr::Lit((**a).clone()), Expr::Lit((**b).clone())],
        e => vec![e.clone()],
    }
}
