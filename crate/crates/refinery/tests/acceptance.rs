//! One line per acceptance criterion. Expected values come from small
//! brute-force models written here, not from the library.

use std::collections::BTreeMap;
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use refinery::ast::Style;
use refinery::elab::{load, Module, RefineOpts, Refinement};
use refinery::emit::emit;
use refinery::lemmas::{check_lemmas, shapes};
use refinery::parse::parse;
use refinery::run::verify;
use refinery_core::algebra::check_non_introduction;
use refinery_core::code::{Arg, FunctorCode, Term};
use refinery_core::error::Loc;
use refinery_core::families::{
    check_phi_psi, check_psi_phi, points, random_product_family, random_slice,
};
use refinery_core::refine::alpha_equivalent;
use refinery_core::value::Value;
use refinery_core::verify::{global_oracle, refined_side, BijectionReport};

fn dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn module(name: &str) -> Module {
    let p = dir().join("examples").join(name);
    load(&fs::read_to_string(&p).unwrap()).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

fn refined(m: &Module, ty: &str, alg: &str) -> Refinement {
    m.refine(ty, alg, &RefineOpts::default(), Loc::default())
        .unwrap_or_else(|e| panic!("{ty} by {alg}: {e}"))
}

fn check(r: &Refinement, bound: usize) -> BijectionReport {
    let rep = verify(r, bound, 2).unwrap();
    assert!(rep.pass(), "{} at bound {bound}\n{rep}", r.name);
    assert!(
        rep.classes.iter().all(|c| c.ok && c.left == c.right),
        "{rep}"
    );
    rep
}

fn counts(rep: &BijectionReport) -> BTreeMap<Value, usize> {
    rep.classes
        .iter()
        .map(|c| (c.index.clone(), c.left))
        .collect()
}

fn sub(a: &Arg<()>) -> Option<&Term> {
    match a {
        Arg::Sub(t) => Some(t),
        Arg::Val(_) => None,
    }
}

fn val(a: &Arg<()>) -> &Value {
    match a {
        Arg::Val(v) => v,
        Arg::Sub(_) => panic!("expected a value"),
    }
}

fn small(v: &Value) -> i64 {
    match v {
        Value::Int(n) => i64::try_from(n).unwrap(),
        other => panic!("{other} is not an integer"),
    }
}

// ---- 1 ----

fn vector() {
    let m = module("list.rfn");
    let r = m.refinement("Vector").unwrap();
    let hand = module("vector.rfn");
    let by_hand = hand.code("Vector").unwrap();
    assert!(
        alpha_equivalent(&r.data.code, by_hand),
        "{:?}\n{:?}",
        r.data.code,
        by_hand
    );
    let golden = fs::read_to_string(dir().join("tests/golden/vector.agda")).unwrap();
    assert_eq!(emit(&m, r, Style::AgdaLike), golden);
}

// ---- 2 ----

#[derive(Clone)]
enum Tree {
    Leaf(i64),
    Node(Box<Tree>, Box<Tree>),
}

/// Every tree with exactly `n` nodes and leaves in {0, 1}.
fn trees(n: usize) -> Vec<Tree> {
    if n == 1 {
        return vec![Tree::Leaf(0), Tree::Leaf(1)];
    }
    let mut out = Vec::new();
    for k in 1..n.saturating_sub(1) {
        for l in trees(k) {
            for r in trees(n - 1 - k) {
                out.push(Tree::Node(Box::new(l.clone()), Box::new(r)));
            }
        }
    }
    out
}

fn tree_sum(t: &Tree) -> i64 {
    match t {
        Tree::Leaf(z) => *z,
        Tree::Node(l, r) => tree_sum(l) + tree_sum(r),
    }
}

fn bijections() {
    let m = module("list.rfn");
    let vec = m.refinement("Vector").unwrap();
    let t = module("tree.rfn");
    let sum = t.refinement("SumTree").unwrap();
    for bound in 1..=6 {
        let want: BTreeMap<Value, usize> =
            (0..bound).map(|k| (Value::int(k as i64), 1 << k)).collect();
        assert_eq!(counts(&check(vec, bound)), want, "List at {bound}");

        let mut want: BTreeMap<Value, usize> = BTreeMap::new();
        for n in 1..=bound {
            for t in trees(n) {
                *want.entry(Value::int(tree_sum(&t))).or_default() += 1;
            }
        }
        assert_eq!(counts(&check(sum, bound)), want, "Tree at {bound}");
    }
}

// ---- 3 ----

fn limiting_cases() {
    let m = module("list.rfn");
    let initial = refined(&m, "List", "in");
    let rep = check(&initial, 4);
    assert_eq!(rep.classes.len(), 15);
    assert!(rep.classes.iter().all(|c| c.left == 1));
    for c in &rep.classes {
        // the index is the term itself
        assert!(matches!(c.index, Value::Term(_)), "{}", c.index);
    }
    let bang = refined(&m, "List", "bang");
    let rep = check(&bang, 3);
    assert_eq!(rep.classes.len(), 1);
    assert_eq!(rep.classes[0].left, 7);
    let golden = fs::read_to_string(dir().join("tests/golden/list_bang.agda")).unwrap();
    let mut named = bang.clone();
    let mut code = (*named.data.code).clone();
    code.name = "ListB".into();
    named.data.code = Arc::new(code);
    assert_eq!(emit(&m, &named, Style::AgdaLike), golden);
}

// ---- 4 and 6 ----

fn every_code() -> Vec<Arc<FunctorCode>> {
    let mut codes = shapes();
    let mut names: Vec<PathBuf> = fs::read_dir(dir().join("examples"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "rfn"))
        .collect();
    names.sort();
    for p in names {
        let m = module(p.file_name().unwrap().to_str().unwrap());
        for c in &m.codes {
            if !codes.iter().any(|d| **d == **c) {
                codes.push(c.clone());
            }
        }
    }
    codes
}

fn lemma_suite() {
    let codes: Vec<_> = every_code()
        .into_iter()
        .filter(|c| c.is_unit_indexed())
        .collect();
    let rep = check_lemmas(&codes, 2024, 100);
    assert!(rep.pass(), "{rep}");
    let lifted: Vec<_> = rep
        .lines
        .iter()
        .filter(|l| l.check == "lift-reindex")
        .collect();
    assert_eq!(lifted.len(), codes.len());
    assert!(
        rep.lines
            .iter()
            .filter(|l| l.check == "truth-preservation")
            .count()
            == codes.len()
    );
    assert!(lifted.iter().all(|l| l.trials == 100));
}

fn non_introduction() {
    for code in every_code() {
        let n = check_non_introduction(&code, &points(3))
            .unwrap_or_else(|e| panic!("{}: {e}", code.name));
        assert!(n > 0, "{}", code.name);
    }
}

// ---- 5 ----

#[derive(Clone, Debug)]
enum Exp {
    Int(i64),
    Bool(bool),
    Add(Box<Exp>, Box<Exp>),
    If(Box<Exp>, Box<Exp>, Box<Exp>),
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Ty {
    Int,
    Bool,
}

fn exps(n: usize) -> Vec<Exp> {
    let mut out = Vec::new();
    if n == 1 {
        out.extend([Exp::Int(0), Exp::Int(1), Exp::Bool(false), Exp::Bool(true)]);
    }
    for k in 1..n.saturating_sub(1) {
        for a in exps(k) {
            for b in exps(n - 1 - k) {
                out.push(Exp::Add(Box::new(a.clone()), Box::new(b)));
            }
        }
    }
    for i in 1..n {
        for j in 1..n {
            if i + j + 1 >= n {
                continue;
            }
            let k = n - 1 - i - j;
            for a in exps(i) {
                for b in exps(j) {
                    for c in exps(k) {
                        out.push(Exp::If(
                            Box::new(a.clone()),
                            Box::new(b.clone()),
                            Box::new(c),
                        ));
                    }
                }
            }
        }
    }
    out
}

fn type_of(e: &Exp) -> Option<Ty> {
    match e {
        Exp::Int(_) => Some(Ty::Int),
        Exp::Bool(_) => Some(Ty::Bool),
        Exp::Add(a, b) => (type_of(a)? == Ty::Int && type_of(b)? == Ty::Int).then_some(Ty::Int),
        Exp::If(c, t, f) => {
            let (c, t, f) = (type_of(c)?, type_of(t)?, type_of(f)?);
            (c == Ty::Bool && t == f).then_some(t)
        }
    }
}

fn to_exp(t: &Term) -> Exp {
    let s = |i: usize| Box::new(to_exp(sub(&t.args[i]).unwrap()));
    match t.ctor.as_str() {
        "IntConst" => Exp::Int(small(val(&t.args[0]))),
        "BoolConst" => Exp::Bool(*val(&t.args[0]) == Value::Bool(true)),
        "Add" => Exp::Add(s(0), s(1)),
        "If" => Exp::If(s(0), s(1), s(2)),
        other => panic!("{other}"),
    }
}

fn has_bool_add(e: &Exp) -> bool {
    match e {
        Exp::Int(_) | Exp::Bool(_) => false,
        Exp::Add(a, b) => {
            type_of(a) == Some(Ty::Bool)
                || type_of(b) == Some(Ty::Bool)
                || has_bool_add(a)
                || has_bool_add(b)
        }
        Exp::If(c, t, f) => has_bool_add(c) || has_bool_add(t) || has_bool_add(f),
    }
}

/// Evaluates a term; `None` when it goes wrong.
fn run_exp(e: &Exp) -> Option<Exp> {
    match e {
        Exp::Int(_) | Exp::Bool(_) => Some(e.clone()),
        Exp::Add(a, b) => match (run_exp(a)?, run_exp(b)?) {
            (Exp::Int(x), Exp::Int(y)) => Some(Exp::Int(x + y)),
            _ => None,
        },
        Exp::If(c, t, f) => match run_exp(c)? {
            Exp::Bool(true) => run_exp(t),
            Exp::Bool(false) => run_exp(f),
            _ => None,
        },
    }
}

fn ty_value(t: Ty) -> Value {
    Value::label(match t {
        Ty::Int => "int",
        Ty::Bool => "bool",
    })
}

#[derive(Clone, Debug)]
enum CTree {
    Leaf,
    Br(bool, Box<CTree>, Box<CTree>),
}

fn ctrees(n: usize) -> Vec<CTree> {
    if n == 1 {
        return vec![CTree::Leaf];
    }
    let mut out = Vec::new();
    for red in [true, false] {
        for k in 1..n.saturating_sub(1) {
            for l in ctrees(k) {
                for r in ctrees(n - 1 - k) {
                    out.push(CTree::Br(red, Box::new(l.clone()), Box::new(r)));
                }
            }
        }
    }
    out
}

fn is_black(t: &CTree) -> bool {
    !matches!(t, CTree::Br(true, ..))
}

/// Black nodes on every path from `t` down to a leaf, leaf included.
fn path_counts(t: &CTree, out: &mut Vec<usize>, acc: usize) {
    let here = acc + usize::from(is_black(t));
    match t {
        CTree::Leaf => out.push(here),
        CTree::Br(_, l, r) => {
            path_counts(l, out, here);
            path_counts(r, out, here);
        }
    }
}

/// The three conditions, checked at every node separately.
fn red_black(t: &CTree) -> bool {
    let mut paths = Vec::new();
    path_counts(t, &mut paths, 0);
    let balanced = paths.windows(2).all(|w| w[0] == w[1]);
    match t {
        CTree::Leaf => true,
        CTree::Br(red, l, r) => {
            balanced && (!red || (is_black(l) && is_black(r))) && red_black(l) && red_black(r)
        }
    }
}

fn to_ctree(t: &Term) -> CTree {
    match t.ctor.as_str() {
        "Leaf" => CTree::Leaf,
        "Br" => CTree::Br(
            *val(&t.args[0]) == Value::label("R"),
            Box::new(to_ctree(sub(&t.args[1]).unwrap())),
            Box::new(to_ctree(sub(&t.args[2]).unwrap())),
        ),
        other => panic!("{other}"),
    }
}

fn partial() {
    let m = module("exp.rfn");
    let r = m.refinement("WTExp").unwrap();
    let rep = check(r, 5);
    let mut want: BTreeMap<Value, usize> = BTreeMap::new();
    for n in 1..=5 {
        for e in exps(n) {
            if let Some(t) = type_of(&e) {
                *want.entry(ty_value(t)).or_default() += 1;
            }
        }
    }
    assert_eq!(counts(&rep), want);
    let left = refined_side(&r.data, &r.forget, 5).unwrap();
    let right = global_oracle(&r.data.source, &r.oracle, 5).unwrap();
    for o in &left {
        let e = to_exp(&o.term);
        assert!(!has_bool_add(&e), "{e:?}");
        let t = type_of(&e).unwrap();
        assert!(o.key.sem_eq(&ty_value(t)));
        assert_eq!(run_exp(&e).as_ref().and_then(type_of), Some(t), "{e:?}");
    }
    for ts in right.values() {
        assert!(ts.iter().all(|t| !has_bool_add(&to_exp(t))));
    }
    let all_bool_adds = (1..=5).flat_map(exps).filter(has_bool_add).count();
    assert!(all_bool_adds > 0);

    let m = module("ctree.rfn");
    let r = m.refinement("RBTree").unwrap();
    check(r, 5);
    let left = refined_side(&r.data, &r.forget, 5).unwrap();
    for o in &left {
        assert!(red_black(&to_ctree(&o.term)), "{}", o.term);
    }
    let valid = (1..=5).flat_map(ctrees).filter(red_black).count();
    assert_eq!(left.len(), valid);
}

// ---- 7 ----

fn succs(t: &Term) -> i64 {
    match t.ctor.as_str() {
        "zero" => 0,
        _ => 1 + succs(sub(&t.args[0]).unwrap()),
    }
}

fn list_of(t: &Term) -> Vec<i64> {
    match t.ctor.as_str() {
        "Nil" => vec![],
        _ => {
            let mut rest = list_of(sub(&t.args[1]).unwrap());
            rest.insert(0, small(val(&t.args[0])));
            rest
        }
    }
}

fn zygo() {
    let m = module("nat.rfn");
    let r = m.refinement("FactorialNat").unwrap();
    let rep = check(r, 6);
    assert!(rep.forget_checked > 0);
    let mut classes: BTreeMap<i64, Vec<i64>> = BTreeMap::new();
    for o in refined_side(&r.data, &r.forget, 6).unwrap() {
        let n = succs(&o.term);
        assert_eq!(o.companion, Some(Value::int(n)), "forget of {}", o.term);
        classes.entry(small(&o.key)).or_default().push(n);
    }
    for ns in classes.values_mut() {
        ns.sort();
    }
    let factorial = |n: i64| (1..=n).product::<i64>();
    let mut want: BTreeMap<i64, Vec<i64>> = BTreeMap::new();
    for n in 0..6 {
        want.entry(factorial(n)).or_default().push(n);
    }
    assert_eq!(classes, want);
    assert_eq!(want[&1], vec![0, 1]);

    let m = module("avglist.rfn");
    let r = m.refinement("AvgList").unwrap();
    check(r, 4);
    let left = refined_side(&r.data, &r.forget, 4).unwrap();
    assert_eq!(left.len(), 1 + 2 + 4 + 8);
    for o in &left {
        let xs = list_of(&o.term);
        let want = if xs.is_empty() {
            Value::Tagged("empty".into(), Box::new(Value::Unit))
        } else {
            let total: i64 = xs.iter().sum();
            let avg = BigRational::new(BigInt::from(total), BigInt::from(xs.len()));
            Value::Tagged("avg".into(), Box::new(Value::Rat(avg)))
        };
        assert!(
            o.key.sem_eq(&want),
            "{} has index {}, want {want}",
            o.term,
            o.key
        );
    }
}

// ---- 8 ----

#[derive(Debug, PartialEq)]
enum Sem {
    I(i64),
    B(bool),
}

fn eval(t: &Term) -> Sem {
    let s = |i: usize| eval(sub(&t.args[i]).unwrap());
    match t.ctor.as_str() {
        "IntConst" => Sem::I(small(val(&t.args[0]))),
        "BoolConst" => Sem::B(*val(&t.args[0]) == Value::Bool(true)),
        "Add" => match (s(0), s(1)) {
            (Sem::I(a), Sem::I(b)) => Sem::I(a + b),
            other => panic!("ill-typed {other:?}"),
        },
        "If" => match s(0) {
            Sem::B(c) => {
                if c {
                    s(1)
                } else {
                    s(2)
                }
            }
            other => panic!("ill-typed {other:?}"),
        },
        other => panic!("{other}"),
    }
}

fn iterated() {
    let m = module("wtexp.rfn");
    let r = m.refinement("WTExpSem").unwrap();
    check(r, 4);
    let left = refined_side(&r.data, &r.forget, 4).unwrap();
    let mut well_typed = 0;
    for n in 1..=4 {
        well_typed += exps(n).iter().filter(|e| type_of(e).is_some()).count();
    }
    assert_eq!(left.len(), well_typed);
    for o in &left {
        let want = match eval(&o.term) {
            Sem::I(z) => Value::pair(Value::label("int"), Value::int(z)),
            Sem::B(b) => Value::pair(Value::label("bool"), Value::Bool(b)),
        };
        assert!(
            o.key.sem_eq(&want),
            "{} has index {}, want {want}",
            o.term,
            o.key
        );
    }
    assert!(matches!(
        r.data.code.index,
        refinery_core::value::Domain::DepPair(_)
    ));
    let second = m.refinement("SizedSem").unwrap();
    let rep = check(second, 3);
    assert!(rep.left_total() > 0);
    for o in refined_side(&second.data, &second.forget, 3).unwrap() {
        let Value::Tuple(parts) = &o.key else {
            panic!("{}", o.key)
        };
        assert_eq!(parts[1], Value::int(o.size as i64));
    }
}

// ---- 9 ----

fn psi_phi() {
    for t in 0..50u64 {
        let mut r = ChaCha8Rng::seed_from_u64(9000 + t);
        let (d, a) = (points(r.gen_range(1..=3)), points(r.gen_range(1..=4)));
        let x = random_product_family(&mut r, &d, &a, 3);
        check_phi_psi(&x, &d, &a).unwrap_or_else(|m| panic!("trial {t}: {m:?}"));
        let s = random_slice(&mut r, &a, &d, 3);
        check_psi_phi(&s, &d).unwrap_or_else(|m| panic!("trial {t}: {m:?}"));
    }
}

// ---- 10 ----

const TOKENS: &[&str] = &[
    "type", "domain", "algebra", "partial", "zygo", "refine", "verify", "emit", "forget", "by",
    "with", "rec", "if", "then", "else", "case", "of", "ok", "fail", "nat", "int", "enum{",
    "range(", "(", ")", "{", "}", "|", "=>", "->", "@", ",", ";", ":", "=", "+", "*", "/", "-",
    "--", "\n", " ", "List", "Nil", "Cons", "x", "0", "1", "bound", "_", ".", "&&", "||", "<=",
    "\"", "\u{e9}",
];

fn fuzz_and_workers() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xf00d);
    let mut located = 0;
    for i in 0..10_000 {
        let text = if i % 2 == 0 {
            let bytes: Vec<u8> = (0..rng.gen_range(0..80)).map(|_| rng.gen()).collect();
            String::from_utf8_lossy(&bytes).into_owned()
        } else {
            (0..rng.gen_range(0..40))
                .map(|_| TOKENS[rng.gen_range(0..TOKENS.len())])
                .collect()
        };
        let lines = text.split('\n').count() as u32;
        match panic::catch_unwind(|| parse(&text)) {
            Ok(Ok(_)) => {}
            Ok(Err(e)) => {
                assert!(
                    e.line >= 1 && e.line <= lines && e.col >= 1,
                    "{e} for {text:?}"
                );
                located += 1;
            }
            Err(_) => panic!("parser panicked on {text:?}"),
        }
        assert!(
            panic::catch_unwind(|| load(&text).map(drop)).is_ok(),
            "panic on {text:?}"
        );
    }
    assert!(located > 9_000);

    for (file, ty, alg, extra) in [
        ("ctree.rfn", "CTree", "checkRB", "--partial"),
        ("tree.rfn", "Tree", "sumAlg", "--mode=total"),
        ("nat.rfn", "Nat", "fact", "--zygo"),
    ] {
        let spec = dir().join("examples").join(file);
        let report = |w: &str| {
            let (mut out, mut err) = (Vec::new(), Vec::new());
            let args = [
                "verify",
                "--spec",
                spec.to_str().unwrap(),
                "--type",
                ty,
                "--algebra",
                alg,
                extra,
                "--bound",
                "5",
                "--workers",
                w,
            ];
            let code = refinery::cli::run(args, &mut out, &mut err);
            assert_eq!(code, 0, "{}", String::from_utf8_lossy(&err));
            out
        };
        assert_eq!(report("1"), report("4"), "{file}");
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, fn()); 10] = [
        ("vector derivation and golden emission", vector),
        ("bijections at bounds 1..6 for List and Tree", bijections),
        (
            "limiting cases: initial and terminal algebras",
            limiting_cases,
        ),
        ("lifting lemmas on random finite families", lemma_suite),
        ("partial refinement of Exp and CTree", partial),
        ("non-introduction of failure", non_introduction),
        ("zygomorphic refinement: FactorialNat and AvgList", zygo),
        ("iterated refinement of indexed expressions", iterated),
        ("slice and product family round trips", psi_phi),
        ("parser fuzzing and worker independence", fuzz_and_workers),
    ];
    let hook = panic::take_hook();
    panic::set_hook(Box::new(|_| {}));
    let mut failed = Vec::new();
    let mut lines = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(f));
        let secs = start.elapsed().as_secs_f64();
        let status = match &outcome {
            Ok(()) if secs < 60.0 => "PASS",
            _ => "FAIL",
        };
        lines.push(format!(
            "criterion {:>2}: {status}  {name} ({secs:.1}s)",
            i + 1
        ));
        if let Err(e) = outcome {
            let why = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            failed.push(format!("criterion {}: {why}", i + 1));
        } else if status == "FAIL" {
            failed.push(format!("criterion {}: took {secs:.1}s", i + 1));
        }
        println!("{}", lines.last().unwrap());
    }
    panic::set_hook(hook);
    for f in &failed {
        eprintln!("{f}");
    }
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
