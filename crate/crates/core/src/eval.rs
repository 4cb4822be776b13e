//! Call-by-value evaluation of resolved expressions.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::code::{Arg, Node};
use crate::error::EvalError;
use crate::expr::{CmpOp, Expr};
use crate::value::{arith, Value};

/// Variable bindings, plus the companion values of recursive variables
/// (what a forget function returns on the subterm bound to that variable).
#[derive(Clone, Debug, Default)]
pub struct Env {
    pub vars: BTreeMap<String, Value>,
    pub companions: BTreeMap<(String, String), Value>,
}

impl Env {
    pub fn new() -> Self {
        Env::default()
    }

    pub fn bind(&mut self, name: &str, v: Value) {
        self.vars.insert(name.to_string(), v);
    }

    pub fn with(mut self, name: &str, v: Value) -> Self {
        self.bind(name, v);
        self
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.vars.get(name)
    }
}

pub fn eval(e: &Expr, env: &Env) -> Result<Value, EvalError> {
    match e {
        Expr::Lit(v) => Ok(v.clone()),
        Expr::Var(x) => env
            .vars
            .get(x)
            .cloned()
            .ok_or_else(|| EvalError::Unbound(x.clone())),
        Expr::Name(x) => Err(EvalError::Unresolved(x.clone())),
        Expr::Apply { name, .. } => Err(EvalError::Unresolved(name.clone())),
        Expr::Arith(op, a, b, loc) => arith(*op, &eval(a, env)?, &eval(b, env)?, *loc),
        Expr::Neg(a) => match eval(a, env)? {
            Value::Int(n) => Ok(Value::Int(-n)),
            Value::Rat(r) => Ok(Value::Rat(-r)),
            v => Err(EvalError::Mismatch(format!("negation of {v}"))),
        },
        Expr::Cmp(op, a, b) => {
            let (x, y) = (eval(a, env)?, eval(b, env)?);
            let r = match op {
                CmpOp::Eq => x.sem_eq(&y),
                CmpOp::Ne => !x.sem_eq(&y),
                _ => {
                    let ord = x
                        .num_cmp(&y)
                        .ok_or_else(|| EvalError::Mismatch(format!("ordering {x} and {y}")))?;
                    match op {
                        CmpOp::Lt => ord.is_lt(),
                        CmpOp::Le => ord.is_le(),
                        CmpOp::Gt => ord.is_gt(),
                        CmpOp::Ge => ord.is_ge(),
                        CmpOp::Eq | CmpOp::Ne => unreachable!(),
                    }
                }
            };
            Ok(Value::Bool(r))
        }
        Expr::And(a, b) => {
            if truth(a, env)? {
                Ok(Value::Bool(truth(b, env)?))
            } else {
                Ok(Value::Bool(false))
            }
        }
        Expr::Or(a, b) => {
            if truth(a, env)? {
                Ok(Value::Bool(true))
            } else {
                Ok(Value::Bool(truth(b, env)?))
            }
        }
        Expr::Not(a) => Ok(Value::Bool(!truth(a, env)?)),
        Expr::If(c, t, f) => {
            if truth(c, env)? {
                eval(t, env)
            } else {
                eval(f, env)
            }
        }
        Expr::Case(s, branches) => {
            let (label, payload) = match eval(s, env)? {
                Value::Label(l) => (l, None),
                Value::Tagged(l, p) => (l, Some(*p)),
                v => return Err(EvalError::Mismatch(format!("case on {v}"))),
            };
            let b = branches
                .iter()
                .find(|b| b.label == label)
                .ok_or_else(|| EvalError::NoBranch(label.clone()))?;
            match (&b.binder, payload) {
                (Some(x), Some(p)) => {
                    let mut inner = env.clone();
                    inner.bind(x, p);
                    eval(&b.body, &inner)
                }
                _ => eval(&b.body, env),
            }
        }
        Expr::Tuple(es) => Ok(Value::Tuple(
            es.iter().map(|e| eval(e, env)).collect::<Result<_, _>>()?,
        )),
        Expr::Proj(a, i) => match (eval(a, env)?, *i) {
            (Value::Tuple(mut vs), i) if i < vs.len() => Ok(vs.swap_remove(i)),
            (Value::Pair(x, _), 0) => Ok(*x),
            (Value::Pair(_, y), 1) => Ok(*y),
            (v, i) => Err(EvalError::Mismatch(format!("projection .{i} of {v}"))),
        },
        Expr::Tag(l, a) => Ok(Value::Tagged(l.clone(), Box::new(eval(a, env)?))),
        Expr::DPair(a, b) => Ok(Value::pair(eval(a, env)?, eval(b, env)?)),
        Expr::Build {
            ctor,
            exvars,
            args,
            rec_mask,
        } => {
            let exvars = exvars
                .iter()
                .map(|e| eval(e, env))
                .collect::<Result<Vec<_>, _>>()?;
            let mut out = Vec::with_capacity(args.len());
            for (a, is_rec) in args.iter().zip(rec_mask) {
                let v = eval(a, env)?;
                out.push(if *is_rec {
                    match v {
                        Value::Term(t) => Arg::Sub(t),
                        v => {
                            return Err(EvalError::Mismatch(format!(
                                "recursive argument of {ctor} is not a term: {v}"
                            )))
                        }
                    }
                } else {
                    Arg::Val(v)
                });
            }
            Ok(Value::Term(Box::new(Node {
                ctor: ctor.clone(),
                exvars,
                args: out,
                ann: (),
            })))
        }
        Expr::Forget { func, arg } => match &**arg {
            Expr::Var(x) => env
                .companions
                .get(&(func.clone(), x.clone()))
                .cloned()
                .ok_or_else(|| EvalError::NoCompanion(format!("{func}({x})"))),
            other => Err(EvalError::Mismatch(format!(
                "{func} applied to {other}, expected a recursive variable"
            ))),
        },
    }
}

pub fn truth(e: &Expr, env: &Env) -> Result<bool, EvalError> {
    match eval(e, env)? {
        Value::Bool(b) => Ok(b),
        v => Err(EvalError::Mismatch(format!("expected a boolean, got {v}"))),
    }
}

/// Evaluates an expression with no free variables.
pub fn eval_closed(e: &Expr) -> Result<Value, EvalError> {
    eval(e, &Env::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Loc;
    use crate::expr::{add, arith as mk_arith, lit_int, var};
    use crate::value::ArithOp;

    #[test]
    fn factorial_clause() {
        let body = mk_arith(ArithOp::Mul, add(var("n"), lit_int(1)), var("x"));
        let env = Env::new().with("n", Value::int(2)).with("x", Value::int(2));
        assert_eq!(eval(&body, &env).unwrap(), Value::int(6));
    }

    #[test]
    fn average_clause() {
        let body = Expr::Tag(
            "avg".into(),
            Box::new(mk_arith(
                ArithOp::Div,
                add(var("q"), var("s")),
                add(var("l"), lit_int(1)),
            )),
        );
        let env = Env::new()
            .with("q", Value::int(1))
            .with("s", Value::int(2))
            .with("l", Value::int(1));
        assert_eq!(
            eval(&body, &env).unwrap(),
            Value::tagged("avg", Value::rat(3, 2))
        );
    }

    #[test]
    fn conditionals_and_errors() {
        let e = Expr::If(
            Box::new(Expr::Lit(Value::Bool(true))),
            Box::new(lit_int(0)),
            Box::new(lit_int(1)),
        );
        assert_eq!(eval_closed(&e).unwrap(), Value::int(0));
        let loc = Loc::new(3, 7);
        let e = Expr::Arith(
            ArithOp::Div,
            Box::new(lit_int(1)),
            Box::new(lit_int(0)),
            loc,
        );
        match eval_closed(&e) {
            Err(EvalError::DivisionByZero(l)) => assert_eq!(l.line, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(eval_closed(&var("m")), Err(EvalError::Unbound(_))));
    }
}
