//! Randomized checks of the lifting lemmas on finite families.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use refinery_core::algebra::check_non_introduction;
use refinery_core::code::FunctorCode;
use refinery_core::families::{
    check_lift_opreindex, check_lift_reindex, check_phi_psi, check_psi_phi,
    check_very_strong_coproducts, lift, points, random_family, random_map, random_product_family,
    random_slice, truth,
};

use crate::elab::load;

/// Functor shapes the suite always runs on.
pub const SHAPES: &str = "
domain B = enum{a, b}
type List = Nil | Cons(b: B, x: rec)
type Tree = Leaf(z: range(0, 1)) | Node(l: rec, r: rec)
type Id = In(x: rec)
type Square = Pair(l: rec, r: rec)
type Const = K(b: B)
type Nat = zero | succ(x: rec)
type Exp = IntConst(z: range(0, 1)) | BoolConst(b: bool) | Add(x1: rec, x2: rec) | If(x1: rec, x2: rec, x3: rec)
type CTree = Leaf | Br(c: enum{R, B}, l: rec, r: rec)
";

pub fn shapes() -> Vec<Arc<FunctorCode>> {
    load(SHAPES).expect("built-in shapes elaborate").codes
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LemmaLine {
    pub shape: String,
    pub check: &'static str,
    pub trials: usize,
    pub failure: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LemmaReport {
    pub lines: Vec<LemmaLine>,
}

impl LemmaReport {
    pub fn pass(&self) -> bool {
        self.lines.iter().all(|l| l.failure.is_none())
    }
}

impl fmt::Display for LemmaReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.lines {
            match &l.failure {
                None => writeln!(
                    f,
                    "ok    {:<10} {:<24} {} trials",
                    l.shape, l.check, l.trials
                )?,
                Some(why) => writeln!(f, "FAIL  {:<10} {:<24} {why}", l.shape, l.check)?,
            }
        }
        write!(
            f,
            "{}",
            if self.pass() {
                "all lemma checks pass"
            } else {
                "lemma checks FAILED"
            }
        )
    }
}

fn rng(seed: u64, salt: usize, trial: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ ((salt as u64) << 32) ^ trial as u64)
}

fn run(
    shape: &str,
    check: &'static str,
    trials: usize,
    mut one: impl FnMut(usize) -> Result<(), String>,
) -> LemmaLine {
    let failure = (0..trials).find_map(|t| one(t).err().map(|e| format!("trial {t}: {e}")));
    LemmaLine {
        shape: shape.to_string(),
        check,
        trials,
        failure,
    }
}

/// Every unit-indexed code gets the lifting checks; every code gets the
/// distributive law check. The equivalence of slices and product
/// families is checked once, independently of the codes.
pub fn check_lemmas(codes: &[Arc<FunctorCode>], seed: u64, trials: usize) -> LemmaReport {
    let mut lines = Vec::new();
    for (salt, code) in codes.iter().enumerate() {
        let name = code.name.as_str();
        if code.is_unit_indexed() {
            lines.push(run(name, "lift-reindex", trials, |t| {
                let mut r = rng(seed, salt * 8, t);
                let (a, b) = (points(r.gen_range(1..=3)), points(r.gen_range(1..=3)));
                let f = random_map(&mut r, &a, &b);
                let q = random_family(&mut r, &b, 2);
                check_lift_reindex(code, &f, &q, &a)
                    .map(drop)
                    .map_err(|m| format!("at {}: {}", m.at, m.reason))
            }));
            lines.push(run(name, "lift-opreindex", trials, |t| {
                let mut r = rng(seed, salt * 8 + 1, t);
                let (a, b) = (points(r.gen_range(1..=3)), points(r.gen_range(1..=3)));
                let f = random_map(&mut r, &a, &b);
                let p = random_family(&mut r, &a, 2);
                check_lift_opreindex(code, &f, &p, &b)
                    .map(drop)
                    .map_err(|m| format!("at {}: {}", m.at, m.reason))
            }));
            lines.push(run(name, "very-strong-coproducts", trials, |t| {
                let mut r = rng(seed, salt * 8 + 2, t);
                let (a, b) = (points(r.gen_range(1..=4)), points(r.gen_range(1..=3)));
                let f = random_map(&mut r, &a, &b);
                let p = random_family(&mut r, &a, 3);
                check_very_strong_coproducts(&f, &p, &b)
                    .map(drop)
                    .map_err(|m| format!("at {}: {}", m.at, m.reason))
            }));
            lines.push(run(name, "truth-preservation", 1, |_| {
                let lifted = lift(code, &truth(&points(3)));
                match lifted
                    .base
                    .iter()
                    .zip(&lifted.fibres)
                    .find(|(_, f)| f.len() != 1)
                {
                    None => Ok(()),
                    Some((x, f)) => Err(format!("fibre over {x} has {} tokens", f.len())),
                }
            }));
        }
        lines.push(run(name, "non-introduction", 1, |_| {
            check_non_introduction(code, &points(3)).map(drop)
        }));
    }
    lines.push(run("slices", "phi-psi", trials, |t| {
        let mut r = rng(seed, usize::MAX >> 33, t);
        let (d, a) = (points(r.gen_range(1..=3)), points(r.gen_range(1..=3)));
        let x = random_product_family(&mut r, &d, &a, 3);
        check_phi_psi(&x, &d, &a)
            .map(drop)
            .map_err(|m| format!("at {}: {}", m.at, m.reason))
    }));
    lines.push(run("slices", "psi-phi", trials, |t| {
        let mut r = rng(seed, (usize::MAX >> 33) - 1, t);
        let (d, a) = (points(r.gen_range(1..=3)), points(r.gen_range(1..=3)));
        let s = random_slice(&mut r, &a, &d, 3);
        check_psi_phi(&s, &d)
            .map(drop)
            .map_err(|m| format!("at {}: {}", m.at, m.reason))
    }));
    LemmaReport { lines }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes_pass_a_few_trials() {
        let r = check_lemmas(&shapes(), 7, 5);
        assert!(r.pass(), "{r}");
        assert_eq!(r.lines.len(), 8 * 5 + 2);
    }

    #[test]
    fn seeded_runs_repeat() {
        let a = check_lemmas(&shapes()[..2], 1, 3);
        assert_eq!(a, check_lemmas(&shapes()[..2], 1, 3));
    }
}
