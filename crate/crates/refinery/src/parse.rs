//! Recursive-descent parser for `.rfn` files.
//!
//! Expressions are parsed without knowing what identifiers denote; the
//! elaborator resolves `Name` and `Apply` nodes against the declarations.
//! `f e` (juxtaposition) and `f(e1, e2)` both produce an application.

use num_bigint::BigInt;
use refinery_core::error::Loc;
use refinery_core::expr::{Branch, CmpOp, Expr, Pat};
use refinery_core::value::{ArithOp, Value};

use crate::ast::*;
use crate::lex::{lex, SyntaxError, Tok, Token};

/// Words that can never be identifiers in an expression.
const RESERVED: &[&str] = &[
    "if", "then", "else", "case", "of", "not", "true", "false", "rec", "domain", "type", "algebra",
    "partial", "zygo", "refine", "verify", "emit", "forget",
];

/// Deepest nesting accepted before giving up, so hostile input cannot
/// exhaust the stack.
const MAX_DEPTH: usize = 64;

pub fn parse(src: &str) -> Result<SpecFile, SyntaxError> {
    let toks = lex(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        depth: 0,
    };
    let mut decls = Vec::new();
    while p.peek() != &Tok::Eof {
        decls.push(p.decl()?);
    }
    Ok(SpecFile { decls })
}

/// Parses a single expression (used by tests and the command line).
pub fn parse_expr(src: &str) -> Result<Expr, SyntaxError> {
    let toks = lex(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        depth: 0,
    };
    let e = p.expr()?;
    p.expect_eof()?;
    Ok(e)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    depth: usize,
}

type PResult<T> = Result<T, SyntaxError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn loc(&self) -> Loc {
        self.toks[self.pos].loc
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, expected: &str) -> PResult<T> {
        Err(SyntaxError::new(
            self.loc(),
            expected,
            self.peek().to_string(),
        ))
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(t) if *t == s)
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Tok::Ident(t) if t == w)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_word(&mut self, w: &str) -> bool {
        if self.is_word(w) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.err(&format!("`{s}`"))
        }
    }

    fn word(&mut self, w: &str) -> PResult<()> {
        if self.eat_word(w) {
            Ok(())
        } else {
            self.err(&format!("`{w}`"))
        }
    }

    fn expect_eof(&self) -> PResult<()> {
        if self.peek() == &Tok::Eof {
            Ok(())
        } else {
            self.err("end of input")
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek() {
            Tok::Ident(s) if !RESERVED.contains(&s.as_str()) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => self.err("an identifier"),
        }
    }

    fn nat(&mut self) -> PResult<BigInt> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(n)
            }
            _ => self.err("a number"),
        }
    }

    fn signed(&mut self) -> PResult<BigInt> {
        if self.eat_sym("-") {
            Ok(-self.nat()?)
        } else {
            self.nat()
        }
    }

    fn enter(&mut self) -> PResult<()> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return self.err("less deeply nested input");
        }
        Ok(())
    }

    fn leave(&mut self) {
        self.depth -= 1;
    }

    /// `item (sep item)*` up to and including `close`; empty allowed.
    fn sep_until<T>(
        &mut self,
        sep: &str,
        close: &str,
        mut item: impl FnMut(&mut Self) -> PResult<T>,
    ) -> PResult<Vec<T>> {
        let mut out = Vec::new();
        if self.eat_sym(close) {
            return Ok(out);
        }
        loop {
            out.push(item(self)?);
            if self.eat_sym(close) {
                return Ok(out);
            }
            if !self.eat_sym(sep) {
                return self.err(&format!("`{sep}` or `{close}`"));
            }
            // trailing separator
            if self.eat_sym(close) {
                return Ok(out);
            }
        }
    }

    fn decl(&mut self) -> PResult<Decl> {
        let loc = self.loc();
        let kw = match self.peek() {
            Tok::Ident(s) => s.clone(),
            _ => return self.err("a declaration"),
        };
        match kw.as_str() {
            "domain" => {
                self.bump();
                self.domain_decl(loc)
            }
            "type" => {
                self.bump();
                Ok(Decl::Type(self.type_decl(loc)?))
            }
            "algebra" => {
                self.bump();
                Ok(Decl::Algebra(self.algebra_decl(AlgKind::Total, loc)?))
            }
            "partial" => {
                self.bump();
                self.word("algebra")?;
                Ok(Decl::Algebra(self.algebra_decl(AlgKind::Partial, loc)?))
            }
            "zygo" => {
                self.bump();
                Ok(Decl::Algebra(self.algebra_decl(AlgKind::Zygo, loc)?))
            }
            "forget" => {
                self.bump();
                Ok(Decl::Forget(self.forget_decl(loc)?))
            }
            "refine" => {
                self.bump();
                let name = self.ident()?;
                self.sym("=")?;
                let ty = self.ident()?;
                self.word("by")?;
                let alg = self.ident()?;
                Ok(Decl::Refine { name, ty, alg, loc })
            }
            "verify" => {
                self.bump();
                let name = self.ident()?;
                let bound = if self.eat_word("bound") {
                    let n = self.nat()?;
                    Some(usize::try_from(n).or_else(|_| self.err("a small bound"))?)
                } else {
                    None
                };
                Ok(Decl::Verify { name, bound, loc })
            }
            "emit" => {
                self.bump();
                let name = self.ident()?;
                let style = match self.peek() {
                    Tok::Ident(s) if s == "agda" || s == "internal" => {
                        let mut s = s.clone();
                        self.bump();
                        if self.is_sym("-") && matches!(self.peek_at(1), Tok::Ident(w) if w == "like") {
                            self.bump();
                            self.bump();
                            s.push_str("-like");
                        }
                        Style::parse(&s).map_or_else(|| self.err("`agda-like` or `internal`"), Ok)?
                    }
                    _ => Style::AgdaLike,
                };
                Ok(Decl::Emit { name, style, loc })
            }
            _ => self.err("a declaration (domain, type, algebra, partial, zygo, forget, refine, verify or emit)"),
        }
    }

    fn domain_decl(&mut self, loc: Loc) -> PResult<Decl> {
        let name = self.ident()?;
        if self.eat_sym("(") {
            let var = self.ident()?;
            self.sym(":")?;
            let base = self.domain()?;
            self.sym(")")?;
            self.sym("=")?;
            self.word("case")?;
            self.word(&var)?;
            self.word("of")?;
            self.sym("{")?;
            let fibres = self.sep_until(";", "}", |p| {
                let k = p.expr()?;
                p.sym("=>")?;
                let d = p.domain()?;
                Ok((k, d))
            })?;
            return Ok(Decl::Family {
                name,
                var,
                base,
                fibres,
                loc,
            });
        }
        self.sym("=")?;
        let def = self.domain()?;
        Ok(Decl::Domain { name, def, loc })
    }

    pub fn domain(&mut self) -> PResult<DomainExpr> {
        self.enter()?;
        let d = self.domain_inner();
        self.leave();
        d
    }

    fn domain_inner(&mut self) -> PResult<DomainExpr> {
        let loc = self.loc();
        match self.peek().clone() {
            Tok::Int(n) if n == BigInt::from(1) => {
                self.bump();
                self.sym("+")?;
                Ok(DomainExpr::Maybe(Box::new(self.domain()?)))
            }
            Tok::Sym("(") => {
                self.bump();
                let mut ds = self.sep_until(",", ")", |p| p.domain())?;
                match ds.len() {
                    0 => Ok(DomainExpr::Unit),
                    1 => Ok(ds.pop().unwrap()),
                    _ => Ok(DomainExpr::Product(ds)),
                }
            }
            Tok::Ident(w) => {
                self.bump();
                match w.as_str() {
                    "unit" => Ok(DomainExpr::Unit),
                    "bool" => Ok(DomainExpr::Bool),
                    "nat" => Ok(DomainExpr::Nat),
                    "int" => Ok(DomainExpr::Int),
                    "rat" => Ok(DomainExpr::Rat),
                    "range" => {
                        self.sym("(")?;
                        let lo = self.signed()?;
                        self.sym(",")?;
                        let hi = self.signed()?;
                        self.sym(")")?;
                        Ok(DomainExpr::Range(lo, hi))
                    }
                    "enum" => {
                        self.sym("{")?;
                        Ok(DomainExpr::Enum(self.sep_until(",", "}", |p| p.ident())?))
                    }
                    "sum" => {
                        self.sym("{")?;
                        Ok(DomainExpr::Sum(self.sep_until(",", "}", |p| {
                            let l = p.ident()?;
                            p.sym(":")?;
                            Ok((l, p.domain()?))
                        })?))
                    }
                    "dpair" => {
                        self.sym("(")?;
                        let n = self.ident()?;
                        self.sym(")")?;
                        Ok(DomainExpr::DPair(n))
                    }
                    "term" => Ok(DomainExpr::Term(self.ident()?)),
                    _ if RESERVED.contains(&w.as_str()) => {
                        self.pos -= 1;
                        self.err("a domain")
                    }
                    _ => {
                        if self.eat_sym("(") {
                            let e = self.expr()?;
                            self.sym(")")?;
                            Ok(DomainExpr::Fibre(w, e, loc))
                        } else {
                            Ok(DomainExpr::Named(w, loc))
                        }
                    }
                }
            }
            _ => self.err("a domain"),
        }
    }

    fn type_decl(&mut self, loc: Loc) -> PResult<TypeDecl> {
        let name = self.ident()?;
        let params = if self.eat_sym("(") {
            self.sep_until(",", ")", |p| {
                let x = p.ident()?;
                p.sym(":")?;
                Ok((x, p.domain()?))
            })?
        } else {
            Vec::new()
        };
        let index = if self.eat_sym(":") {
            Some(self.domain()?)
        } else {
            None
        };
        self.sym("=")?;
        self.eat_sym("|");
        let mut ctors = vec![self.ctor_decl()?];
        while self.eat_sym("|") {
            ctors.push(self.ctor_decl()?);
        }
        Ok(TypeDecl {
            name,
            params,
            index,
            ctors,
            loc,
        })
    }

    fn ctor_decl(&mut self) -> PResult<CtorDecl> {
        let loc = self.loc();
        let name = self.ident()?;
        let exvars = if self.eat_sym("{") {
            self.sep_until(",", "}", |p| {
                let x = p.ident()?;
                p.sym(":")?;
                Ok((x, p.domain()?))
            })?
        } else {
            Vec::new()
        };
        let fields = if self.eat_sym("(") {
            self.sep_until(",", ")", |p| {
                let name = p.ident()?;
                p.sym(":")?;
                let kind = if p.eat_word("rec") {
                    if p.eat_sym("@") {
                        FieldKind::Rec(Some(p.expr()?))
                    } else {
                        FieldKind::Rec(None)
                    }
                } else {
                    FieldKind::Const(p.domain()?)
                };
                Ok(FieldDecl { name, kind })
            })?
        } else {
            Vec::new()
        };
        let mut premises = Vec::new();
        if self.eat_word("if") {
            premises.push(self.expr()?);
            while self.eat_sym(",") {
                premises.push(self.expr()?);
            }
        }
        let result = if self.eat_sym("@") {
            Some(self.expr()?)
        } else {
            None
        };
        Ok(CtorDecl {
            name,
            exvars,
            fields,
            premises,
            result,
            loc,
        })
    }

    fn algebra_decl(&mut self, kind: AlgKind, loc: Loc) -> PResult<AlgebraDecl> {
        let name = self.ident()?;
        self.sym(":")?;
        let ty = self.ident()?;
        self.sym("->")?;
        let carrier = self.domain()?;
        let mut helpers = Vec::new();
        if kind == AlgKind::Zygo {
            self.word("with")?;
            loop {
                let f = match self.peek() {
                    // `forget` is the customary helper name
                    Tok::Ident(s) if s == "forget" => {
                        self.bump();
                        "forget".to_string()
                    }
                    _ => self.ident()?,
                };
                self.sym("=")?;
                helpers.push((f, self.ident()?));
                if !self.eat_sym(",") {
                    break;
                }
            }
        }
        self.sym("{")?;
        let clauses = self.sep_until(";", "}", |p| p.clause())?;
        Ok(AlgebraDecl {
            name,
            kind,
            ty,
            carrier,
            helpers,
            clauses,
            loc,
        })
    }

    fn clause(&mut self) -> PResult<ClauseDecl> {
        let loc = self.loc();
        let ctor = self.ident()?;
        let exvars = if self.eat_sym("{") {
            self.sep_until(",", "}", |p| p.ident())?
        } else {
            Vec::new()
        };
        let binders = if self.eat_sym("(") {
            self.sep_until(",", ")", |p| p.pat())?
        } else {
            Vec::new()
        };
        self.sym("=>")?;
        let body = self.expr()?;
        Ok(ClauseDecl {
            ctor,
            exvars,
            binders,
            body,
            loc,
        })
    }

    fn pat(&mut self) -> PResult<Pat> {
        self.enter()?;
        let p = if self.eat_sym("_") {
            Ok(Pat::Wild)
        } else if self.eat_sym("(") {
            let mut ps = self.sep_until(",", ")", |p| p.pat())?;
            match ps.len() {
                1 => Ok(ps.pop().unwrap()),
                0 => self.err("a pattern"),
                _ => Ok(Pat::Tuple(ps)),
            }
        } else {
            self.ident().map(Pat::Var)
        };
        self.leave();
        p
    }

    fn forget_decl(&mut self, loc: Loc) -> PResult<ForgetDecl> {
        let name = self.fun_name()?;
        self.sym(":")?;
        let ty = self.ident()?;
        self.sym("->")?;
        let codomain = self.domain()?;
        self.sym("{")?;
        let clauses = self.sep_until(";", "}", |p| {
            let loc = p.loc();
            let ctor = p.ident()?;
            let fields = if p.eat_sym("(") {
                p.sep_until(",", ")", |p| p.ident())?
            } else {
                Vec::new()
            };
            p.sym("=>")?;
            let body = p.expr()?;
            Ok(ForgetClause {
                ctor,
                fields,
                body,
                loc,
            })
        })?;
        Ok(ForgetDecl {
            name,
            ty,
            codomain,
            clauses,
            loc,
        })
    }

    /// A function name; `forget` itself is allowed here.
    fn fun_name(&mut self) -> PResult<String> {
        if self.eat_word("forget") {
            return Ok("forget".into());
        }
        self.ident()
    }

    pub fn expr(&mut self) -> PResult<Expr> {
        self.enter()?;
        let e = self.expr_inner();
        self.leave();
        e
    }

    fn expr_inner(&mut self) -> PResult<Expr> {
        if self.eat_word("if") {
            let c = self.expr()?;
            self.word("then")?;
            let t = self.expr()?;
            self.word("else")?;
            let f = self.expr()?;
            return Ok(Expr::If(Box::new(c), Box::new(t), Box::new(f)));
        }
        if self.eat_word("case") {
            let s = self.expr()?;
            self.word("of")?;
            self.sym("{")?;
            let bs = self.sep_until(";", "}", |p| {
                let label = p.ident()?;
                let binder = if p.is_sym("=>") {
                    None
                } else {
                    Some(p.ident()?)
                };
                p.sym("=>")?;
                let body = p.expr()?;
                Ok(Branch {
                    label,
                    binder,
                    body,
                })
            })?;
            return Ok(Expr::Case(Box::new(s), bs));
        }
        self.or()
    }

    fn or(&mut self) -> PResult<Expr> {
        let mut a = self.and()?;
        while self.eat_sym("||") {
            let b = self.and()?;
            a = Expr::Or(Box::new(a), Box::new(b));
        }
        Ok(a)
    }

    fn and(&mut self) -> PResult<Expr> {
        let mut a = self.not()?;
        while self.eat_sym("&&") {
            let b = self.not()?;
            a = Expr::And(Box::new(a), Box::new(b));
        }
        Ok(a)
    }

    fn not(&mut self) -> PResult<Expr> {
        if self.eat_word("not") {
            self.enter()?;
            let a = self.not();
            self.leave();
            return Ok(Expr::Not(Box::new(a?)));
        }
        self.cmp()
    }

    fn cmp(&mut self) -> PResult<Expr> {
        let a = self.additive()?;
        let op = match self.peek() {
            Tok::Sym("=") => CmpOp::Eq,
            Tok::Sym("!=") => CmpOp::Ne,
            Tok::Sym("<") => CmpOp::Lt,
            Tok::Sym("<=") => CmpOp::Le,
            Tok::Sym(">") => CmpOp::Gt,
            Tok::Sym(">=") => CmpOp::Ge,
            _ => return Ok(a),
        };
        self.bump();
        let b = self.additive()?;
        Ok(Expr::Cmp(op, Box::new(a), Box::new(b)))
    }

    fn additive(&mut self) -> PResult<Expr> {
        let mut a = self.multiplicative()?;
        loop {
            let loc = self.loc();
            let op = if self.eat_sym("+") {
                ArithOp::Add
            } else if self.eat_sym("-") {
                ArithOp::Sub
            } else {
                return Ok(a);
            };
            let b = self.multiplicative()?;
            a = Expr::Arith(op, Box::new(a), Box::new(b), loc);
        }
    }

    fn multiplicative(&mut self) -> PResult<Expr> {
        let mut a = self.unary()?;
        loop {
            let loc = self.loc();
            let op = if self.eat_sym("*") {
                ArithOp::Mul
            } else if self.eat_sym("/") {
                ArithOp::Div
            } else {
                return Ok(a);
            };
            let b = self.unary()?;
            a = Expr::Arith(op, Box::new(a), Box::new(b), loc);
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.eat_sym("-") {
            if let Tok::Int(n) = self.peek().clone() {
                self.bump();
                return self.postfix(Expr::Lit(Value::Int(-n)));
            }
            self.enter()?;
            let a = self.unary();
            self.leave();
            return Ok(Expr::Neg(Box::new(a?)));
        }
        self.application()
    }

    fn starts_atom(&self) -> bool {
        match self.peek() {
            Tok::Int(_) => true,
            Tok::Sym(s) => *s == "(",
            Tok::Ident(w) => w == "true" || w == "false" || !RESERVED.contains(&w.as_str()),
            Tok::Eof => false,
        }
    }

    /// `f e` binds tighter than arithmetic and nests to the right.
    fn application(&mut self) -> PResult<Expr> {
        let callee = match self.peek() {
            Tok::Ident(w)
                if !RESERVED.contains(&w.as_str())
                    || (w == "forget" && matches!(self.peek_at(1), Tok::Sym("("))) =>
            {
                w.clone()
            }
            _ => return self.atom(),
        };
        self.bump();
        let mut exvars = Vec::new();
        if self.eat_sym("{") {
            exvars = self.sep_until(",", "}", |p| p.expr())?;
        }
        if self.eat_sym("(") {
            let args = self.sep_until(",", ")", |p| p.expr())?;
            if callee == "pair" && exvars.is_empty() && args.len() == 2 {
                let mut it = args.into_iter();
                let a = it.next().unwrap();
                let b = it.next().unwrap();
                return self.postfix(Expr::DPair(Box::new(a), Box::new(b)));
            }
            return self.postfix(apply(callee, exvars, args));
        }
        if exvars.is_empty() && self.starts_atom() {
            self.enter()?;
            let arg = self.application();
            self.leave();
            return Ok(apply(callee, Vec::new(), vec![arg?]));
        }
        self.postfix(apply(callee, exvars, Vec::new()))
    }

    fn atom(&mut self) -> PResult<Expr> {
        let e = match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Expr::Lit(Value::Int(n))
            }
            Tok::Ident(w) if w == "true" || w == "false" => {
                self.bump();
                Expr::Lit(Value::Bool(w == "true"))
            }
            Tok::Sym("(") => {
                self.bump();
                let mut es = self.sep_until(",", ")", |p| p.expr())?;
                match es.len() {
                    0 => Expr::Lit(Value::Unit),
                    1 => es.pop().unwrap(),
                    _ => Expr::Tuple(es),
                }
            }
            Tok::Ident(w) if w == "if" || w == "case" => self.expr()?,
            _ => return self.err("an expression"),
        };
        self.postfix(e)
    }

    fn postfix(&mut self, mut e: Expr) -> PResult<Expr> {
        while self.is_sym(".") {
            self.bump();
            let i = self.nat()?;
            let i = usize::try_from(i).or_else(|_| self.err("a small projection index"))?;
            e = Expr::Proj(Box::new(e), i);
        }
        Ok(e)
    }
}

fn apply(name: String, exvars: Vec<Expr>, args: Vec<Expr>) -> Expr {
    if exvars.is_empty() && args.is_empty() {
        Expr::Name(name)
    } else {
        Expr::Apply { name, exvars, args }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn list_type() {
        let f = parse("type List(B: enum{a,b}) = Nil | Cons(b: B, x: rec)").unwrap();
        let Decl::Type(t) = &f.decls[0] else { panic!() };
        assert_eq!(t.name, "List");
        assert_eq!(t.ctors.len(), 2);
        assert_eq!(t.ctors[1].fields[1].kind, FieldKind::Rec(None));
        assert_eq!(
            t.params[0].1,
            DomainExpr::Enum(vec!["a".into(), "b".into()])
        );
    }

    #[test]
    fn algebra_clauses() {
        let f = parse("algebra lengthalg : List -> nat { Nil => 0; Cons(b, n) => n + 1 }").unwrap();
        let Decl::Algebra(a) = &f.decls[0] else {
            panic!()
        };
        assert_eq!(a.clauses.len(), 2);
        assert_eq!(a.clauses[1].body.to_string(), "n + 1");
    }

    #[test]
    fn partial_algebra_guards() {
        let src = "partial algebra tyInfer : Exp -> Ty {
            Add(t1, t2) => if t1 = int && t2 = int then ok int else fail
        }";
        let f = parse(src).unwrap();
        let Decl::Algebra(a) = &f.decls[0] else {
            panic!()
        };
        assert_eq!(a.kind, AlgKind::Partial);
        assert_eq!(
            a.clauses[0].body.to_string(),
            "if t1 = int && t2 = int then ok(int) else fail"
        );
    }

    #[test]
    fn application_forms() {
        let e = parse_expr("avg((q + s) / (l + 1))").unwrap();
        assert!(matches!(&e, Expr::Apply { args, .. } if args.len() == 1));
        let e = parse_expr("ok avg x + 1").unwrap();
        assert_eq!(e.to_string(), "ok(avg(x)) + 1");
        let e = parse_expr("forget(x) * n1").unwrap();
        assert_eq!(e.to_string(), "forget(x) * n1");
        let e = parse_expr("pair(int, 3).1").unwrap();
        assert!(matches!(e, Expr::Proj(..)));
        assert_eq!(parse_expr("-2 - -x").unwrap().to_string(), "-2 - -x");
    }

    #[test]
    fn errors_are_located() {
        let e = parse("type List = Nil |\n  Cons(b: , x: rec)").unwrap_err();
        assert_eq!((e.line, e.col), (2, 11));
        assert_eq!(e.expected, "a domain");
        let e = parse("algebra f : List -> nat { Nil => }").unwrap_err();
        assert_eq!(e.expected, "an expression");
    }

    #[test]
    fn deep_nesting_is_rejected() {
        let src = format!("algebra f : L -> nat {{ N => {}1 }}", "(".repeat(5000));
        assert!(parse(&src).is_err());
    }
}
