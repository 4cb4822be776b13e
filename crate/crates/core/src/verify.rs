//! Bounded check that a refined type is what it should be: erasure must
//! biject its terms of each index onto the source terms the algebra folds
//! to that index.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::algebra::{fold, pair_algebra, totalize, AlgebraSpec, Carrier, ZygoPair};
use crate::code::{check_term, ForgetFn, FunctorCode, Term};
use crate::enumerate::{enumerate_refined, enumerate_terms};
use crate::error::{Error, Result};
use crate::refine::RefinedSpec;
use crate::value::Value;

/// The global function a refinement is checked against.
#[derive(Clone, Debug)]
pub enum Oracle {
    Total(AlgebraSpec),
    /// The totalized partial algebra; only `ok` results are kept.
    Partial(AlgebraSpec),
    /// The paired algebra; its first component is the helper value.
    Zygo(AlgebraSpec),
}

/// One term with the index it is classified under.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Observed {
    pub term: Term,
    pub key: Value,
    pub companion: Option<Value>,
    /// Size of the term the observation came from.
    pub size: usize,
}

impl Oracle {
    pub fn total(alg: &AlgebraSpec) -> Oracle {
        Oracle::Total(alg.clone())
    }

    pub fn partial(code: &FunctorCode, kappa: &AlgebraSpec) -> Result<Oracle> {
        Ok(Oracle::Partial(totalize(code, kappa)?))
    }

    pub fn zygo(code: &FunctorCode, z: &ZygoPair) -> Result<Oracle> {
        Ok(Oracle::Zygo(pair_algebra(code, z)?))
    }

    fn algebra(&self) -> &AlgebraSpec {
        match self {
            Oracle::Total(a) | Oracle::Partial(a) | Oracle::Zygo(a) => a,
        }
    }

    /// Index and helper value of `t`, or `None` if the partial algebra
    /// fails on it.
    pub fn classify(&self, code: &FunctorCode, t: &Term) -> Result<Option<(Value, Option<Value>)>> {
        let v = fold(code, self.algebra(), t)?;
        let (a, d) = match (self, v) {
            (Oracle::Total(_), v) => (v, None),
            (Oracle::Partial(_), Value::Tagged(l, p)) if l == "ok" => (*p, None),
            (Oracle::Partial(_), _) => return Ok(None),
            (Oracle::Zygo(_), Value::Tuple(mut ps)) if ps.len() == 2 => {
                let a = ps.pop().unwrap();
                (a, ps.pop())
            }
            (Oracle::Zygo(alg), v) => {
                return Err(Error::Type(format!("{} gave {v}, not a pair", alg.name)))
            }
        };
        if code.is_unit_indexed() {
            return Ok(Some((a, d)));
        }
        let i = check_term(code, t)?;
        let key = match self.algebra().carrier {
            Carrier::Family(_) => Value::pair(i, a),
            Carrier::Plain(_) => Value::Tuple(alloc::vec![i, a]),
        };
        Ok(Some((key, d)))
    }

    pub fn observe(&self, code: &FunctorCode, terms: &[Term]) -> Result<Vec<Observed>> {
        let mut out = Vec::new();
        for t in terms {
            if let Some((key, companion)) = self.classify(code, t)? {
                out.push(Observed {
                    size: t.size(),
                    term: t.clone(),
                    key,
                    companion,
                });
            }
        }
        Ok(out)
    }
}

/// Source terms grouped by the index the oracle gives them.
pub fn global_oracle(
    code: &FunctorCode,
    oracle: &Oracle,
    bound: usize,
) -> Result<BTreeMap<Value, Vec<Term>>> {
    let mut out: BTreeMap<Value, Vec<Term>> = BTreeMap::new();
    for o in oracle.observe(code, &enumerate_terms(code, bound)?)? {
        out.entry(o.key).or_default().push(o.term);
    }
    Ok(out)
}

/// Refined terms, erased, with their cached indices and forget values.
pub fn refined_side(rs: &RefinedSpec, forgets: &[ForgetFn], bound: usize) -> Result<Vec<Observed>> {
    let pool = enumerate_refined(&rs.code, forgets, bound)?;
    Ok(pool
        .iter()
        .map(|rt| Observed {
            term: rs.erase(rt),
            key: rt.ann.index.clone(),
            companion: match rt.ann.companions.len() {
                0 => None,
                1 => Some(rt.ann.companions[0].clone()),
                _ => Some(Value::Tuple(rt.ann.companions.clone())),
            },
            size: rt.size(),
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassLine {
    pub index: Value,
    pub left: usize,
    pub right: usize,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mismatch {
    pub index: Value,
    pub term: Term,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BijectionReport {
    pub bound: usize,
    pub classes: Vec<ClassLine>,
    /// Smallest counterexamples first.
    pub mismatches: Vec<Mismatch>,
    /// Refined terms whose forget values were compared with the helper.
    pub forget_checked: usize,
}

impl BijectionReport {
    pub fn pass(&self) -> bool {
        self.mismatches.is_empty()
    }

    pub fn left_total(&self) -> usize {
        self.classes.iter().map(|c| c.left).sum()
    }

    pub fn right_total(&self) -> usize {
        self.classes.iter().map(|c| c.right).sum()
    }

    pub fn class(&self, index: &Value) -> Option<&ClassLine> {
        self.classes.iter().find(|c| c.index == *index)
    }

    /// One tab-separated record per class: index, refined count, oracle
    /// count, status.
    pub fn records(&self) -> String {
        let mut s = String::new();
        for c in &self.classes {
            s.push_str(&format!(
                "{}\t{}\t{}\t{}\n",
                c.index,
                c.left,
                c.right,
                if c.ok { "ok" } else { "mismatch" }
            ));
        }
        s
    }
}

impl fmt::Display for BijectionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "bound {}", self.bound)?;
        for c in &self.classes {
            writeln!(
                f,
                "  {:<24} refined {:>6}  oracle {:>6}  {}",
                c.index.to_string(),
                c.left,
                c.right,
                if c.ok { "ok" } else { "MISMATCH" }
            )?;
        }
        for m in &self.mismatches {
            writeln!(f, "counterexample at {}: {}: {}", m.index, m.term, m.reason)?;
        }
        if self.forget_checked > 0 {
            writeln!(f, "forget values checked on {} terms", self.forget_checked)?;
        }
        write!(
            f,
            "{}: {} classes, {} refined terms, {} oracle terms",
            if self.pass() { "pass" } else { "FAIL" },
            self.classes.len(),
            self.left_total(),
            self.right_total()
        )
    }
}

/// Compares the two sides class by class. Neither side needs to be in any
/// particular order; counterexamples are sorted by size.
pub fn compare(bound: usize, left: &[Observed], right: &[Observed]) -> BijectionReport {
    let mut right_by_term: BTreeMap<&Term, &Observed> = BTreeMap::new();
    let mut counts: BTreeMap<Value, (usize, usize)> = BTreeMap::new();
    for o in right {
        right_by_term.insert(&o.term, o);
        counts.entry(o.key.clone()).or_default().1 += 1;
    }
    let mut mismatches = Vec::new();
    let mut seen: BTreeSet<&Term> = BTreeSet::new();
    let mut forget_checked = 0;
    for o in left {
        counts.entry(o.key.clone()).or_default().0 += 1;
        let bad = |reason: String| Mismatch {
            index: o.key.clone(),
            term: o.term.clone(),
            reason,
        };
        if o.term.size() != o.size {
            mismatches.push(bad(format!(
                "erasure changes the size from {} to {}",
                o.size,
                o.term.size()
            )));
            continue;
        }
        if !seen.insert(&o.term) {
            mismatches.push(bad("two refined terms erase to it".into()));
            continue;
        }
        match right_by_term.get(&o.term) {
            None => mismatches.push(bad("refined term, but the algebra fails on it".into())),
            Some(r) if !r.key.sem_eq(&o.key) => mismatches.push(bad(format!(
                "refined index, but the algebra gives {}",
                r.key
            ))),
            Some(r) => {
                if let (Some(c), Some(d)) = (&o.companion, &r.companion) {
                    forget_checked += 1;
                    if !c.sem_eq(d) {
                        mismatches
                            .push(bad(format!("forget gives {c}, the helper fold gives {d}")));
                    }
                }
            }
        }
    }
    for o in right {
        if !seen.contains(&o.term) {
            mismatches.push(Mismatch {
                index: o.key.clone(),
                term: o.term.clone(),
                reason: "the algebra indexes it here, but no refined term erases to it".into(),
            });
        }
    }
    mismatches.sort_by(|a, b| {
        (a.term.size(), a.term.to_string(), &a.index).cmp(&(
            b.term.size(),
            b.term.to_string(),
            &b.index,
        ))
    });
    let bad_keys: BTreeSet<&Value> = mismatches.iter().map(|m| &m.index).collect();
    let classes = counts
        .iter()
        .map(|(k, (l, r))| ClassLine {
            index: k.clone(),
            left: *l,
            right: *r,
            ok: l == r && !bad_keys.contains(k),
        })
        .collect();
    BijectionReport {
        bound,
        classes,
        mismatches,
        forget_checked,
    }
}

/// Enumerates both sides up to `bound` nodes and compares them.
pub fn check_refinement(
    rs: &RefinedSpec,
    forgets: &[ForgetFn],
    oracle: &Oracle,
    bound: usize,
) -> Result<BijectionReport> {
    let left = refined_side(rs, forgets, bound)?;
    let right = oracle.observe(&rs.source, &enumerate_terms(&rs.source, bound)?)?;
    Ok(compare(bound, &left, &right))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{bang_algebra, elaborate_algebra, AlgebraKind, Clause};
    use crate::code::fixtures::{list, two};
    use crate::expr::{add, lit_int, var, Pat};
    use crate::refine::refine;
    use crate::value::Domain;
    use alloc::sync::Arc;
    use alloc::vec;

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
    fn vector_bijects_lists() {
        let l = Arc::new(list(two()));
        let alg = elaborate_algebra(&l, &lengthalg(), &[]).unwrap();
        let rs = refine(&l, &alg, "Vector", &[]).unwrap();
        let r = check_refinement(&rs, &[], &Oracle::total(&alg), 5).unwrap();
        assert!(r.pass(), "{r}");
        for k in 0..5 {
            let c = r.class(&Value::int(k)).unwrap();
            assert_eq!(c.left, 1 << k);
        }
        let oracle = global_oracle(&l, &Oracle::total(&alg), 3).unwrap();
        assert_eq!(oracle.len(), 3);
        assert_eq!(oracle[&Value::int(2)].len(), 4);
    }

    #[test]
    fn bang_has_one_class() {
        let l = Arc::new(list(two()));
        let bang = bang_algebra(&l);
        let rs = refine(&l, &bang, "L", &[]).unwrap();
        let r = check_refinement(&rs, &[], &Oracle::total(&bang), 3).unwrap();
        assert!(r.pass());
        assert_eq!(r.classes.len(), 1);
        assert_eq!(r.classes[0].left, 7);
    }

    #[test]
    fn wrong_result_is_caught() {
        let l = Arc::new(list(two()));
        let alg = elaborate_algebra(&l, &lengthalg(), &[]).unwrap();
        let mut rs = refine(&l, &alg, "Vector", &[]).unwrap();
        let mut code = (*rs.code).clone();
        code.ctors[1].result = add(var("n"), lit_int(2));
        rs.code = Arc::new(code);
        let r = check_refinement(&rs, &[], &Oracle::total(&alg), 3).unwrap();
        assert!(!r.pass());
        assert_eq!(r.mismatches[0].term.size(), 2);
        assert!(r.records().contains("mismatch"));
    }
}
