//! Families of finite sets over finite bases, with reindexing, dependent
//! sums along a map, truth, comprehension and the everywhere lifting of a
//! code's layer functor. The checkers compare two constructions fibre by
//! fibre through an explicit bijection, never by token equality.
//!
//! Tokens are values; a dependent-sum token is the pair `(a, p)` and a
//! lifted token is a layer over comprehension pairs.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::algebra::{layers, Layer, LayerArg};
use crate::code::FunctorCode;
use crate::value::Value;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteFamily {
    pub base: Vec<Value>,
    /// Parallel to `base`.
    pub fibres: Vec<Vec<Value>>,
}

impl FiniteFamily {
    pub fn new(base: Vec<Value>, fibres: Vec<Vec<Value>>) -> Result<Self, String> {
        let fam = FiniteFamily { base, fibres };
        fam.validate()?;
        Ok(fam)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.base.len() != self.fibres.len() {
            return Err(format!(
                "{} base points but {} fibres",
                self.base.len(),
                self.fibres.len()
            ));
        }
        let mut seen = BTreeSet::new();
        for (a, fib) in self.base.iter().zip(&self.fibres) {
            if !seen.insert(a) {
                return Err(format!("base point {a} is repeated"));
            }
            let toks: BTreeSet<&Value> = fib.iter().collect();
            if toks.len() != fib.len() {
                return Err(format!("the fibre at {a} repeats a token"));
            }
        }
        Ok(())
    }

    pub fn fibre(&self, a: &Value) -> Option<&[Value]> {
        self.base
            .iter()
            .position(|b| b == a)
            .map(|i| self.fibres[i].as_slice())
    }

    pub fn total(&self) -> usize {
        self.fibres.iter().map(Vec::len).sum()
    }
}

/// A function between finite bases, as a table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BaseMap {
    pub table: BTreeMap<Value, Value>,
}

impl BaseMap {
    pub fn new(pairs: impl IntoIterator<Item = (Value, Value)>) -> Self {
        BaseMap {
            table: pairs.into_iter().collect(),
        }
    }

    pub fn identity(base: &[Value]) -> Self {
        BaseMap::new(base.iter().map(|a| (a.clone(), a.clone())))
    }

    pub fn apply(&self, a: &Value) -> Option<&Value> {
        self.table.get(a)
    }
}

/// `f* Q`: the fibre at `a` is the fibre of `Q` at `f a`.
pub fn reindex(f: &BaseMap, q: &FiniteFamily, base: &[Value]) -> Result<FiniteFamily, String> {
    let mut fibres = Vec::new();
    for a in base {
        let b = f
            .apply(a)
            .ok_or_else(|| format!("the map is undefined at {a}"))?;
        let fib = q
            .fibre(b)
            .ok_or_else(|| format!("the map sends {a} to {b}, outside the base"))?;
        fibres.push(fib.to_vec());
    }
    Ok(FiniteFamily {
        base: base.to_vec(),
        fibres,
    })
}

/// `Sigma_f P`: the fibre at `b` holds `(a, p)` for every `a` with
/// `f a = b` and `p` in `P a`.
pub fn op_reindex(f: &BaseMap, p: &FiniteFamily, base: &[Value]) -> FiniteFamily {
    let fibres = base
        .iter()
        .map(|b| {
            p.base
                .iter()
                .zip(&p.fibres)
                .filter(|(a, _)| f.apply(a) == Some(b))
                .flat_map(|(a, fib)| {
                    fib.iter()
                        .map(move |t| Value::Tuple(vec![a.clone(), t.clone()]))
                })
                .collect()
        })
        .collect();
    FiniteFamily {
        base: base.to_vec(),
        fibres,
    }
}

/// The family with one token over every point.
pub fn truth(base: &[Value]) -> FiniteFamily {
    FiniteFamily {
        base: base.to_vec(),
        fibres: base.iter().map(|_| vec![Value::Unit]).collect(),
    }
}

/// All pairs `(a, p)`; the projection is the first component.
pub fn comprehension(p: &FiniteFamily) -> Vec<(Value, Value)> {
    p.base
        .iter()
        .zip(&p.fibres)
        .flat_map(|(a, fib)| fib.iter().map(move |t| (a.clone(), t.clone())))
        .collect()
}

pub fn layer_value(l: &Layer) -> Value {
    Value::tagged(
        &l.ctor,
        Value::Tuple(
            l.exvars
                .iter()
                .cloned()
                .chain(l.args.iter().map(|a| match a {
                    LayerArg::Const(v) | LayerArg::Rec(v) => v.clone(),
                }))
                .collect(),
        ),
    )
}

/// `F f` on a layer: `f` applied at every recursive position.
pub fn map_layer(l: &Layer, f: impl Fn(&Value) -> Value) -> Layer {
    l.map_recs(f)
}

/// The lifting of `P` along the layer functor of a plain code: over each
/// layer `x` on the base, the layers on comprehension pairs whose
/// projection is `x`. Infinite constant fields are sampled.
pub fn lift(code: &FunctorCode, p: &FiniteFamily) -> FiniteFamily {
    let base_layers = layers(code, &p.base);
    let pairs: Vec<Value> = comprehension(p)
        .into_iter()
        .map(|(a, t)| Value::Tuple(vec![a, t]))
        .collect();
    let mut fibres: BTreeMap<Layer, Vec<Value>> = BTreeMap::new();
    for y in layers(code, &pairs) {
        let x = y.map_recs(first);
        fibres.entry(x).or_default().push(layer_value(&y));
    }
    FiniteFamily {
        base: base_layers.iter().map(layer_value).collect(),
        fibres: base_layers
            .iter()
            .map(|x| fibres.remove(x).unwrap_or_default())
            .collect(),
    }
}

fn first(v: &Value) -> Value {
    match v {
        Value::Tuple(vs) => vs[0].clone(),
        other => other.clone(),
    }
}

/// Rebuilds a layer from its encoding, given the code's field layout.
fn decode_layer(code: &FunctorCode, v: &Value) -> Option<Layer> {
    let Value::Tagged(c, body) = v else {
        return None;
    };
    let Value::Tuple(parts) = &**body else {
        return None;
    };
    let spec = code.ctor(c)?;
    let k = spec.exvars.len();
    if parts.len() != k + spec.fields.len() {
        return None;
    }
    Some(Layer {
        ctor: c.clone(),
        exvars: parts[..k].to_vec(),
        args: spec
            .fields
            .iter()
            .zip(&parts[k..])
            .map(|(f, v)| {
                if f.is_rec() {
                    LayerArg::Rec(v.clone())
                } else {
                    LayerArg::Const(v.clone())
                }
            })
            .collect(),
    })
}

/// Where two families over the same base first differ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FibreMismatch {
    pub at: Value,
    pub reason: String,
}

/// Checks that `phi` maps each fibre of `left` bijectively onto the fibre
/// of `right` at the same point.
fn fibrewise_bijection(
    left: &FiniteFamily,
    right: &FiniteFamily,
    phi: impl Fn(&Value, &Value) -> Option<Value>,
) -> Result<usize, FibreMismatch> {
    if left.base.len() != right.base.len() {
        return Err(FibreMismatch {
            at: Value::Unit,
            reason: format!(
                "the bases differ in size ({} and {})",
                left.base.len(),
                right.base.len()
            ),
        });
    }
    let mut checked = 0;
    for (x, lf) in left.base.iter().zip(&left.fibres) {
        let rf = right.fibre(x).ok_or_else(|| FibreMismatch {
            at: x.clone(),
            reason: "missing on the right".into(),
        })?;
        if lf.len() != rf.len() {
            return Err(FibreMismatch {
                at: x.clone(),
                reason: format!("{} tokens on the left, {} on the right", lf.len(), rf.len()),
            });
        }
        let targets: BTreeSet<&Value> = rf.iter().collect();
        let mut hit = BTreeSet::new();
        for t in lf {
            let u = phi(x, t).ok_or_else(|| FibreMismatch {
                at: x.clone(),
                reason: format!("no image for {t}"),
            })?;
            if !targets.contains(&u) || !hit.insert(u.clone()) {
                return Err(FibreMismatch {
                    at: x.clone(),
                    reason: format!(
                        "{t} maps to {u}, which is not a fresh token of the right fibre"
                    ),
                });
            }
        }
        checked += 1;
    }
    Ok(checked)
}

/// Lifting commutes with reindexing: `lift(f* Q)` and `(F f)* lift(Q)`
/// over the layers on `base`. `base` is the domain of `f`.
pub fn check_lift_reindex(
    code: &FunctorCode,
    f: &BaseMap,
    q: &FiniteFamily,
    base: &[Value],
) -> Result<usize, FibreMismatch> {
    let err = |r: String| FibreMismatch {
        at: Value::Unit,
        reason: r,
    };
    let left = lift(code, &reindex(f, q, base).map_err(err)?);
    let lifted = lift(code, q);
    let ff = BaseMap::new(layers(code, base).iter().map(|x| {
        let y = x.map_recs(|a| f.apply(a).cloned().unwrap_or(Value::Unit));
        (layer_value(x), layer_value(&y))
    }));
    let right = reindex(&ff, &lifted, &left.base).map_err(err)?;
    // (a, p) with p over f a  |->  (f a, p)
    fibrewise_bijection(&left, &right, |_, t| {
        let y = decode_layer(code, t)?;
        let z = y.map_recs(|pair| match pair {
            Value::Tuple(ab) if ab.len() == 2 => Value::Tuple(vec![
                f.apply(&ab[0]).cloned().unwrap_or(Value::Unit),
                ab[1].clone(),
            ]),
            other => other.clone(),
        });
        Some(layer_value(&z))
    })
}

/// The signature of a dependent-sum construction, so a faulty one can be
/// plugged into [`check_lift_opreindex_with`].
pub type OpReindex = dyn Fn(&BaseMap, &FiniteFamily, &[Value]) -> FiniteFamily;

/// Lifting commutes with dependent sums: `lift(Sigma_f P)` and
/// `Sigma_{F f} lift(P)` over the layers on `target`.
pub fn check_lift_opreindex(
    code: &FunctorCode,
    f: &BaseMap,
    p: &FiniteFamily,
    target: &[Value],
) -> Result<usize, FibreMismatch> {
    check_lift_opreindex_with(code, f, p, target, &op_reindex)
}

pub fn check_lift_opreindex_with(
    code: &FunctorCode,
    f: &BaseMap,
    p: &FiniteFamily,
    target: &[Value],
    sigma: &OpReindex,
) -> Result<usize, FibreMismatch> {
    let left = lift(code, &sigma(f, p, target));
    let lifted = lift(code, p);
    let ff = BaseMap::new(layers(code, &p.base).iter().map(|x| {
        let y = x.map_recs(|a| f.apply(a).cloned().unwrap_or(Value::Unit));
        (layer_value(x), layer_value(&y))
    }));
    let target_layers: Vec<Value> = layers(code, target).iter().map(layer_value).collect();
    let right = sigma(&ff, &lifted, &target_layers);
    // layer over (b, (a, p))  |->  (layer over a, layer over (a, p))
    fibrewise_bijection(&left, &right, |_, t| {
        let y = decode_layer(code, t)?;
        let inner = y.map_recs(|v| match v {
            Value::Tuple(bt) if bt.len() == 2 => bt[1].clone(),
            other => other.clone(),
        });
        let x = inner.map_recs(first);
        Some(Value::Tuple(vec![layer_value(&x), layer_value(&inner)]))
    })
}

/// The comprehension of `Sigma_f P` is the comprehension of `P`, over `f`:
/// `(a, p) |-> (f a, (a, p))` is a bijection commuting with projections.
pub fn check_very_strong_coproducts(
    f: &BaseMap,
    p: &FiniteFamily,
    target: &[Value],
) -> Result<usize, FibreMismatch> {
    let sum = op_reindex(f, p, target);
    let left = comprehension(p);
    let right: BTreeSet<(Value, Value)> = comprehension(&sum).into_iter().collect();
    if left.len() != right.len() {
        return Err(FibreMismatch {
            at: Value::Unit,
            reason: format!("{} pairs against {}", left.len(), right.len()),
        });
    }
    let mut hit = BTreeSet::new();
    for (a, t) in &left {
        let b = f.apply(a).cloned().ok_or_else(|| FibreMismatch {
            at: a.clone(),
            reason: "the map is undefined here".into(),
        })?;
        let img = (b, Value::Tuple(vec![a.clone(), t.clone()]));
        // the projection of the image is f of the projection
        if !right.contains(&img) || !hit.insert(img.clone()) {
            return Err(FibreMismatch {
                at: a.clone(),
                reason: format!("({a}, {t}) has no fresh image"),
            });
        }
    }
    Ok(left.len())
}

/// A family over `D x A` (base points are pairs `(d, a)`).
pub type ProductFamily = FiniteFamily;

/// A family over `A` together with a map from its comprehension to `D`
/// (`labels` is parallel to the fibres).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SliceFamily {
    pub family: FiniteFamily,
    pub labels: Vec<Vec<Value>>,
}

/// `Psi(X) = (a |-> {(d, x) | x in X(d, a)}, (a, (d, x)) |-> d)`.
pub fn psi(x: &ProductFamily, a_base: &[Value]) -> SliceFamily {
    let mut fibres = Vec::new();
    let mut labels = Vec::new();
    for a in a_base {
        let mut fib = Vec::new();
        let mut lab = Vec::new();
        for (da, toks) in x.base.iter().zip(&x.fibres) {
            if let Value::Tuple(p) = da {
                if p.len() == 2 && p[1] == *a {
                    for t in toks {
                        fib.push(Value::Tuple(vec![p[0].clone(), t.clone()]));
                        lab.push(p[0].clone());
                    }
                }
            }
        }
        fibres.push(fib);
        labels.push(lab);
    }
    SliceFamily {
        family: FiniteFamily {
            base: a_base.to_vec(),
            fibres,
        },
        labels,
    }
}

/// `Phi(X, f) = (d, a) |-> {x in X a | f(a, x) = d}`.
pub fn phi(s: &SliceFamily, d_base: &[Value]) -> ProductFamily {
    let mut base = Vec::new();
    let mut fibres = Vec::new();
    for d in d_base {
        for (i, a) in s.family.base.iter().enumerate() {
            base.push(Value::Tuple(vec![d.clone(), a.clone()]));
            fibres.push(
                s.family.fibres[i]
                    .iter()
                    .zip(&s.labels[i])
                    .filter(|(_, l)| *l == d)
                    .map(|(t, _)| t.clone())
                    .collect(),
            );
        }
    }
    FiniteFamily { base, fibres }
}

/// `Phi(Psi(X))` against `X`, through `(d, x) |-> x`.
pub fn check_phi_psi(
    x: &ProductFamily,
    d_base: &[Value],
    a_base: &[Value],
) -> Result<usize, FibreMismatch> {
    let back = phi(&psi(x, a_base), d_base);
    fibrewise_bijection(&back, x, |da, t| match (da, t) {
        (Value::Tuple(p), Value::Tuple(dx)) if dx.len() == 2 && dx[0] == p[0] => {
            Some(dx[1].clone())
        }
        _ => None,
    })
}

/// `Psi(Phi(X, f))` against `(X, f)`, through `(d, x) |-> x`, checking
/// that the map to `D` is preserved.
pub fn check_psi_phi(s: &SliceFamily, d_base: &[Value]) -> Result<usize, FibreMismatch> {
    let back = psi(&phi(s, d_base), &s.family.base);
    for (i, a) in back.family.base.iter().enumerate() {
        for (t, d) in back.family.fibres[i].iter().zip(&back.labels[i]) {
            let Value::Tuple(dx) = t else {
                return Err(FibreMismatch {
                    at: a.clone(),
                    reason: format!("token {t} is not a pair"),
                });
            };
            let j = s.family.fibres[i].iter().position(|x| *x == dx[1]);
            if j.map(|j| &s.labels[i][j]) != Some(d) {
                return Err(FibreMismatch {
                    at: a.clone(),
                    reason: format!("{t} is sent to {d}, not to the original label"),
                });
            }
        }
    }
    fibrewise_bijection(&back.family, &s.family, |_, t| match t {
        Value::Tuple(dx) if dx.len() == 2 => Some(dx[1].clone()),
        _ => None,
    })
}

/// `n` points `0 .. n-1`.
pub fn points(n: usize) -> Vec<Value> {
    (0..n as i64).map(Value::int).collect()
}

/// A family over `base` with up to `max_tokens` tokens per fibre.
pub fn random_family<R: Rng>(rng: &mut R, base: &[Value], max_tokens: usize) -> FiniteFamily {
    FiniteFamily {
        base: base.to_vec(),
        fibres: base
            .iter()
            .map(|_| points(rng.gen_range(0..=max_tokens)))
            .collect(),
    }
}

pub fn random_map<R: Rng>(rng: &mut R, from: &[Value], to: &[Value]) -> BaseMap {
    BaseMap::new(
        from.iter()
            .map(|a| (a.clone(), to[rng.gen_range(0..to.len())].clone())),
    )
}

/// A random slice object over `a_base` with labels in `d_base`.
pub fn random_slice<R: Rng>(
    rng: &mut R,
    a_base: &[Value],
    d_base: &[Value],
    max_tokens: usize,
) -> SliceFamily {
    let family = random_family(rng, a_base, max_tokens);
    let labels = family
        .fibres
        .iter()
        .map(|fib| {
            fib.iter()
                .map(|_| d_base[rng.gen_range(0..d_base.len())].clone())
                .collect()
        })
        .collect();
    SliceFamily { family, labels }
}

/// A random family over the pairs of `d_base` and `a_base`.
pub fn random_product_family<R: Rng>(
    rng: &mut R,
    d_base: &[Value],
    a_base: &[Value],
    max_tokens: usize,
) -> ProductFamily {
    let base: Vec<Value> = d_base
        .iter()
        .flat_map(|d| {
            a_base
                .iter()
                .map(move |a| Value::Tuple(vec![d.clone(), a.clone()]))
        })
        .collect();
    random_family(rng, &base, max_tokens)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::fixtures::{list, two};
    use crate::code::{ConstructorSpec, Field};
    use crate::expr::unit;
    use crate::value::Domain;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn single(name: &str, fields: Vec<Field>) -> FunctorCode {
        FunctorCode {
            name: name.into(),
            params: vec![],
            index: Domain::Unit,
            ctors: vec![ConstructorSpec {
                name: "C".into(),
                exvars: vec![],
                fields,
                premises: vec![],
                result: unit(),
            }],
        }
    }

    fn rec(n: &str) -> Field {
        Field::Rec {
            name: n.into(),
            index: unit(),
        }
    }

    #[test]
    fn sums_along_a_map() {
        let a = points(2);
        let b = points(1);
        let p = FiniteFamily::new(a.clone(), vec![points(2), points(3)]).unwrap();
        let f = BaseMap::new(a.iter().map(|x| (x.clone(), Value::int(0))));
        assert_eq!(op_reindex(&f, &p, &b).fibres[0].len(), 5);
        let q = FiniteFamily::new(b.clone(), vec![points(3)]).unwrap();
        let r = reindex(&f, &q, &a).unwrap();
        assert!(r.fibres.iter().all(|fib| fib.len() == 3));
        assert_eq!(reindex(&BaseMap::identity(&a), &p, &a).unwrap(), p);
    }

    #[test]
    fn truth_and_comprehension() {
        let a = points(2);
        assert!(truth(&a).fibres.iter().all(|f| f.len() == 1));
        assert_eq!(comprehension(&truth(&a)).len(), 2);
        let p = FiniteFamily::new(a, vec![points(2), vec![]]).unwrap();
        let c = comprehension(&p);
        assert_eq!(c.len(), 2);
        assert!(c.iter().all(|(x, _)| *x == Value::int(0)));
    }

    #[test]
    fn lifting_polynomials() {
        let id = single("Id", vec![rec("x")]);
        let p = FiniteFamily::new(points(2), vec![points(2), points(1)]).unwrap();
        let l = lift(&id, &p);
        assert_eq!(
            l.fibres.iter().map(Vec::len).collect::<Vec<_>>(),
            vec![2, 1]
        );
        let sq = single("Sq", vec![rec("x"), rec("y")]);
        let p = FiniteFamily::new(points(2), vec![points(1), vec![]]).unwrap();
        let l = lift(&sq, &p);
        assert_eq!(
            l.fibres.iter().map(Vec::len).collect::<Vec<_>>(),
            vec![1, 0, 0, 0]
        );
        let k = single(
            "K",
            vec![Field::Const {
                name: "b".into(),
                domain: two(),
            }],
        );
        assert!(lift(&k, &p).fibres.iter().all(|f| f.len() == 1));
    }

    #[test]
    fn lemmas_on_lists() {
        let code = list(two());
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let a = points(rng.gen_range(1..=3));
            let b = points(rng.gen_range(1..=3));
            let f = random_map(&mut rng, &a, &b);
            let q = random_family(&mut rng, &b, 2);
            check_lift_reindex(&code, &f, &q, &a).unwrap();
            let p = random_family(&mut rng, &a, 2);
            check_lift_opreindex(&code, &f, &p, &b).unwrap();
            check_very_strong_coproducts(&f, &p, &b).unwrap();
        }
    }

    #[test]
    fn dropped_token_is_located() {
        let code = list(two());
        let a = points(2);
        let b = points(1);
        let f = BaseMap::new(a.iter().map(|x| (x.clone(), Value::int(0))));
        let p = FiniteFamily::new(a, vec![points(1), points(2)]).unwrap();
        let faulty = |f: &BaseMap, p: &FiniteFamily, base: &[Value]| {
            let mut s = op_reindex(f, p, base);
            if let Some(fib) = s.fibres.iter_mut().find(|f| !f.is_empty()) {
                fib.pop();
            }
            s
        };
        let err = check_lift_opreindex_with(&code, &f, &p, &b, &faulty).unwrap_err();
        assert!(err.reason.contains("tokens"), "{err:?}");
    }

    #[test]
    fn psi_phi_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (d, a) = (points(2), points(3));
        let x = random_product_family(&mut rng, &d, &a, 3);
        check_phi_psi(&x, &d, &a).unwrap();
        let s = random_slice(&mut rng, &a, &d, 3);
        check_psi_phi(&s, &d).unwrap();
    }
}
