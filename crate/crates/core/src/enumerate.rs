//! Bounded exhaustive enumeration of terms by size.
//!
//! Terms are built bottom-up. Index variables are never drawn from their
//! domain when a recursive position determines them: the index expression
//! of each recursive field is matched against the index the chosen subterm
//! already carries. Only variables left undetermined are enumerated, and
//! only constant fields need finite domains.
//!
//! Order within one size: constructors in declaration order, then constant
//! field values (canonical order, first field slowest), then the split of
//! the remaining size among recursive fields (lexicographic), then the
//! subterms in pool order.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::code::{
    exvar_domain, Ann, Arg, ConstructorSpec, Field, ForgetFn, FunctorCode, Node, Term,
};
use crate::error::{Error, Result};
use crate::eval::{eval, truth, Env};
use crate::expr::Expr;
use crate::value::{cartesian, Value};

/// Terms grouped by size; `by_size[k]` holds the terms with `k + 1` nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pool<A> {
    pub by_size: Vec<Vec<Node<A>>>,
}

pub type EnumerationPool = Pool<()>;
pub type RefinedPool = Pool<Ann>;

impl<A> Pool<A> {
    pub fn bound(&self) -> usize {
        self.by_size.len()
    }

    pub fn len(&self) -> usize {
        self.by_size.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = &Node<A>> {
        self.by_size.iter().flatten()
    }

    pub fn of_size(&self, size: usize) -> &[Node<A>] {
        if size == 0 || size > self.by_size.len() {
            &[]
        } else {
            &self.by_size[size - 1]
        }
    }
}

/// All ways to write `n` as an ordered sum of `k` positive parts.
pub fn compositions(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return if n == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    if n < k {
        return out;
    }
    for first in 1..=n - (k - 1) {
        for mut rest in compositions(n - first, k - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Every well-formed term of at most `bound` nodes, with indices and
/// forget values cached at every node.
pub fn enumerate_refined(
    code: &FunctorCode,
    forgets: &[ForgetFn],
    bound: usize,
) -> Result<RefinedPool> {
    let consts: Vec<Vec<Vec<Value>>> = code
        .ctors
        .iter()
        .map(|spec| {
            spec.consts()
                .map(|(name, d)| {
                    d.enumerate().map_err(|_| Error::InfiniteField {
                        what: format!("field {name} of {}", spec.name),
                        domain: format!("{d}"),
                    })
                })
                .collect::<Result<Vec<_>>>()
                .map(|parts| cartesian(&parts))
        })
        .collect::<Result<_>>()?;
    let mut pool: RefinedPool = Pool {
        by_size: Vec::new(),
    };
    for size in 1..=bound {
        let mut level = Vec::new();
        for (spec, const_rows) in code.ctors.iter().zip(&consts) {
            let r = spec.recs().count();
            let splits = if r == 0 {
                if size == 1 {
                    vec![Vec::new()]
                } else {
                    Vec::new()
                }
            } else {
                compositions(size - 1, r)
            };
            for row in const_rows {
                for split in &splits {
                    let mut chosen = Vec::with_capacity(r);
                    build(
                        code,
                        forgets,
                        spec,
                        row,
                        split,
                        &pool,
                        &mut chosen,
                        &mut level,
                    )?;
                }
            }
        }
        pool.by_size.push(level);
    }
    Ok(pool)
}

#[allow(clippy::too_many_arguments)]
fn build<'p>(
    code: &FunctorCode,
    forgets: &[ForgetFn],
    spec: &ConstructorSpec,
    consts: &[Value],
    split: &[usize],
    pool: &'p RefinedPool,
    chosen: &mut Vec<&'p Node<Ann>>,
    out: &mut Vec<Node<Ann>>,
) -> Result<()> {
    if chosen.len() < split.len() {
        for sub in pool.of_size(split[chosen.len()]) {
            chosen.push(sub);
            build(code, forgets, spec, consts, split, pool, chosen, out)?;
            chosen.pop();
        }
        return Ok(());
    }
    assemble(code, forgets, spec, consts, chosen, out)
}

/// Outcome of matching an index expression against a known index.
enum Step {
    Done,
    Fail,
    Stuck,
}

fn match_index(
    e: &Expr,
    v: &Value,
    env: &mut Env,
    unknown: &mut BTreeSet<String>,
    work: &mut Vec<(Expr, Value)>,
) -> Result<Step> {
    if e.free_vars().iter().all(|x| !unknown.contains(x)) {
        let got = eval(e, env)?;
        return Ok(if got.sem_eq(v) {
            Step::Done
        } else {
            Step::Fail
        });
    }
    Ok(match (e, v) {
        (Expr::Var(x), _) if unknown.contains(x) => {
            unknown.remove(x);
            env.bind(x, v.clone());
            Step::Done
        }
        (Expr::Tuple(es), Value::Tuple(vs)) if es.len() == vs.len() => {
            for (e, v) in es.iter().zip(vs) {
                work.push((e.clone(), v.clone()));
            }
            Step::Done
        }
        (Expr::Tuple(_), _) => Step::Fail,
        (Expr::DPair(a, b), Value::Pair(x, y)) => {
            work.push(((**a).clone(), (**x).clone()));
            work.push(((**b).clone(), (**y).clone()));
            Step::Done
        }
        (Expr::DPair(..), _) => Step::Fail,
        (Expr::Tag(l, p), Value::Tagged(m, q)) => {
            if l == m {
                work.push(((**p).clone(), (**q).clone()));
                Step::Done
            } else {
                Step::Fail
            }
        }
        (Expr::Tag(..), _) => Step::Fail,
        _ => Step::Stuck,
    })
}

fn assemble(
    code: &FunctorCode,
    forgets: &[ForgetFn],
    spec: &ConstructorSpec,
    consts: &[Value],
    subs: &[&Node<Ann>],
    out: &mut Vec<Node<Ann>>,
) -> Result<()> {
    let mut env = Env::new();
    let mut ci = 0;
    for f in &spec.fields {
        if let Field::Const { name, .. } = f {
            env.bind(name, consts[ci].clone());
            ci += 1;
        }
    }
    let mut unknown: BTreeSet<String> = spec.exvars.iter().map(|x| x.name.clone()).collect();
    let mut work: Vec<(Expr, Value)> = spec
        .recs()
        .zip(subs)
        .map(|((_, e), s)| (e.clone(), s.ann.index.clone()))
        .collect();
    work.reverse();
    let mut stuck: Vec<(Expr, Value)> = Vec::new();
    loop {
        let mut progress = false;
        while let Some((e, v)) = work.pop() {
            match match_index(&e, &v, &mut env, &mut unknown, &mut work)? {
                Step::Done => progress = true,
                Step::Fail => return Ok(()),
                Step::Stuck => stuck.push((e, v)),
            }
        }
        if !progress || stuck.is_empty() {
            break;
        }
        stuck.reverse();
        work.append(&mut stuck);
    }
    // undetermined index variables range over their (finite) domains
    let mut envs = vec![env];
    for x in &spec.exvars {
        if !unknown.contains(&x.name) {
            continue;
        }
        let mut next = Vec::new();
        for env in envs {
            let d = exvar_domain(x, &env).map_err(Error::Type)?;
            let values = d.enumerate().map_err(|_| Error::InfiniteField {
                what: format!("index variable {} of {}", x.name, spec.name),
                domain: format!("{d}"),
            })?;
            for v in values {
                next.push(env.clone().with(&x.name, v));
            }
        }
        envs = next;
    }
    'candidates: for mut env in envs {
        for (e, v) in &stuck {
            if !eval(e, &env)?.sem_eq(v) {
                continue 'candidates;
            }
        }
        let mut exvals = Vec::with_capacity(spec.exvars.len());
        for x in &spec.exvars {
            let d = match exvar_domain(x, &env) {
                Ok(d) => d,
                Err(_) => continue 'candidates,
            };
            let raw = env.get(&x.name).cloned().unwrap();
            match d.coerce(raw) {
                Some(v) => {
                    env.bind(&x.name, v.clone());
                    exvals.push(v);
                }
                None => continue 'candidates,
            }
        }
        for ((name, _), s) in spec.recs().zip(subs) {
            for (f, c) in forgets.iter().zip(&s.ann.companions) {
                env.companions
                    .insert((f.name.clone(), String::from(name)), c.clone());
            }
        }
        for p in &spec.premises {
            if !truth(p, &env)? {
                continue 'candidates;
            }
        }
        let raw = eval(&spec.result, &env)?;
        let index = code.index.coerce(raw.clone()).ok_or_else(|| {
            Error::Type(format!(
                "{}: result index {raw} is outside {}",
                spec.name, code.index
            ))
        })?;
        let mut companions = Vec::with_capacity(forgets.len());
        for f in forgets {
            let clause = f.clause(&spec.name).ok_or_else(|| {
                Error::ClauseMismatch(format!("{} has no clause for {}", f.name, spec.name))
            })?;
            let v = eval(clause, &env)?;
            companions.push(f.codomain.coerce(v.clone()).ok_or_else(|| {
                Error::Type(format!("{}: {v} is outside {}", f.name, f.codomain))
            })?);
        }
        let mut ci = 0;
        let mut si = 0;
        let args = spec
            .fields
            .iter()
            .map(|f| match f {
                Field::Const { .. } => {
                    ci += 1;
                    Arg::Val(consts[ci - 1].clone())
                }
                Field::Rec { .. } => {
                    si += 1;
                    Arg::Sub(Box::new(subs[si - 1].clone()))
                }
            })
            .collect();
        out.push(Node {
            ctor: spec.name.clone(),
            exvars: exvals,
            args,
            ann: Ann { index, companions },
        });
    }
    Ok(())
}

/// Plain terms of at most `bound` nodes, grouped by size.
pub fn term_pool(code: &FunctorCode, bound: usize) -> Result<EnumerationPool> {
    let refined = enumerate_refined(code, &[], bound)?;
    Ok(Pool {
        by_size: refined
            .by_size
            .iter()
            .map(|level| level.iter().map(Node::strip).collect())
            .collect(),
    })
}

/// Plain terms of at most `bound` nodes, smallest first.
pub fn enumerate_terms(code: &FunctorCode, bound: usize) -> Result<Vec<Term>> {
    Ok(term_pool(code, bound)?
        .by_size
        .into_iter()
        .flatten()
        .collect())
}
