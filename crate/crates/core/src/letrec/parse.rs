use std::collections::BTreeSet;

use super::{Decl, LtrTerm, LtrType, Pattern};
use crate::kernel::{FreshSupply, Name};
use crate::syntax::{Cursor, Pos, SyntaxError};

const KEYWORDS: [&str; 5] = ["letrec", "let", "in", "be", "pi"];
const POLARITY: [char; 2] = ['+', '-'];

/// A parsed `x₁:σ₁, …, xₙ:σₙ |- M` judgement.
#[derive(Debug, Clone, PartialEq)]
pub struct LtrJudgement {
    pub ctx: Vec<(Name, LtrType)>,
    pub term: LtrTerm,
}

pub fn parse_ltr_type(text: &str) -> Result<LtrType, SyntaxError> {
    let mut st = State {
        cur: Cursor::new(text),
    };
    let ty = st.ty()?;
    st.finish()?;
    Ok(ty)
}

/// Parses a term, keeping `let` and tuple patterns as written.
pub fn parse_ltr(text: &str, supply: &mut FreshSupply) -> Result<LtrTerm, SyntaxError> {
    let mut st = State {
        cur: Cursor::new(text),
    };
    let raw = st.term()?;
    st.finish()?;
    Ok(resolve(&raw, &mut Vec::new(), supply))
}

pub fn parse_ltr_judgement(
    text: &str,
    supply: &mut FreshSupply,
) -> Result<LtrJudgement, SyntaxError> {
    let mut st = State {
        cur: Cursor::new(text),
    };
    let mut ctx = Vec::new();
    let mut seen = BTreeSet::new();
    if !st.cur.looking_at("|-") {
        loop {
            let at = st.cur.pos();
            let name = st.ident()?;
            if !seen.insert(name.clone()) {
                return err_at(at, format!("duplicate context variable `{name}`"));
            }
            st.cur.expect(":")?;
            ctx.push((Name::free(&name), st.ty()?));
            if !st.cur.eat(",") {
                break;
            }
        }
    }
    st.cur.expect("|-")?;
    let raw = st.term()?;
    st.finish()?;
    Ok(LtrJudgement {
        ctx,
        term: resolve(&raw, &mut Vec::new(), supply),
    })
}

fn err_at<T>(at: Pos, message: String) -> Result<T, SyntaxError> {
    Err(SyntaxError {
        line: at.line,
        col: at.col,
        message,
    })
}

/// Turns the all-free names produced by the parser into bound names with
/// fresh uids, following lexical scope (every `letrec` name scopes over all
/// of its declarations).
fn resolve(raw: &LtrTerm, scope: &mut Vec<(String, Name)>, supply: &mut FreshSupply) -> LtrTerm {
    fn bind(pat: &Pattern, scope: &mut Vec<(String, Name)>, supply: &mut FreshSupply) -> Pattern {
        match pat {
            Pattern::Var { name, ty } => {
                let fresh = supply.fresh(name.text());
                scope.push((name.text().to_string(), fresh.clone()));
                Pattern::var(fresh, ty.clone())
            }
            Pattern::Wild { .. } => pat.clone(),
            Pattern::Tuple { items } => Pattern::Tuple {
                items: items.iter().map(|p| bind(p, scope, supply)).collect(),
            },
        }
    }
    let depth = scope.len();
    let out = match raw {
        LtrTerm::Var { name } => {
            let found = scope.iter().rev().find(|(t, _)| t == name.text());
            LtrTerm::var(found.map_or_else(|| name.clone(), |(_, n)| n.clone()))
        }
        LtrTerm::Lam { pat, body } => {
            let pat = bind(pat, scope, supply);
            LtrTerm::lam(pat, resolve(body, scope, supply))
        }
        LtrTerm::App { fun, arg } => {
            LtrTerm::app(resolve(fun, scope, supply), resolve(arg, scope, supply))
        }
        LtrTerm::Tuple { items } => {
            LtrTerm::tuple(items.iter().map(|t| resolve(t, scope, supply)).collect())
        }
        LtrTerm::Proj { index, tuple } => LtrTerm::proj(*index, resolve(tuple, scope, supply)),
        LtrTerm::Letrec { decls, body } => {
            let pats: Vec<Pattern> = decls.iter().map(|d| bind(&d.pat, scope, supply)).collect();
            let decls = pats
                .into_iter()
                .zip(decls)
                .map(|(p, d)| Decl::new(p, resolve(&d.term, scope, supply)))
                .collect();
            LtrTerm::letrec(decls, resolve(body, scope, supply))
        }
        LtrTerm::Let { pat, bound, body } => {
            let bound = resolve(bound, scope, supply);
            let pat = bind(pat, scope, supply);
            LtrTerm::let_in(pat, bound, resolve(body, scope, supply))
        }
    };
    scope.truncate(depth);
    out
}

struct State<'a> {
    cur: Cursor<'a>,
}

impl State<'_> {
    fn finish(&mut self) -> Result<(), SyntaxError> {
        if self.cur.at_end() {
            Ok(())
        } else {
            let found = self.cur.describe_next();
            self.cur.error(format!("unexpected {found}"))
        }
    }

    fn ident(&mut self) -> Result<String, SyntaxError> {
        match self.cur.peek_ident(&[]) {
            Some(id) if !is_keyword(id) => {
                self.cur.advance(id.len());
                Ok(id.to_string())
            }
            Some(id) => self.cur.error(format!("keyword `{id}` used as identifier")),
            None => {
                let found = self.cur.describe_next();
                self.cur
                    .error(format!("expected identifier, found {found}"))
            }
        }
    }

    fn keyword(&mut self, kw: &str) -> bool {
        if self.cur.peek_ident(&[]) == Some(kw) {
            self.cur.advance(kw.len());
            true
        } else {
            false
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), SyntaxError> {
        if self.keyword(kw) {
            Ok(())
        } else {
            let found = self.cur.describe_next();
            self.cur.error(format!("expected `{kw}`, found {found}"))
        }
    }

    fn ty(&mut self) -> Result<LtrType, SyntaxError> {
        let lhs = self.ty_prod()?;
        if self.cur.eat("=>") {
            Ok(LtrType::fun(lhs, self.ty()?))
        } else {
            Ok(lhs)
        }
    }

    fn ty_prod(&mut self) -> Result<LtrType, SyntaxError> {
        let mut parts = vec![self.ty_atom()?];
        while self.cur.eat("*") {
            parts.push(self.ty_atom()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            LtrType::product(parts)
        })
    }

    fn ty_atom(&mut self) -> Result<LtrType, SyntaxError> {
        if self.cur.eat("(") {
            let t = self.ty()?;
            self.cur.expect(")")?;
            return Ok(t);
        }
        if self.cur.eat("1") {
            return Ok(LtrType::unit());
        }
        match self.cur.peek_ident(&POLARITY) {
            Some(id) => {
                self.cur.advance(id.len());
                Ok(LtrType::base(id))
            }
            None => {
                let found = self.cur.describe_next();
                self.cur.error(format!("expected type, found {found}"))
            }
        }
    }

    fn pattern(&mut self, seen: &mut BTreeSet<String>) -> Result<Pattern, SyntaxError> {
        if self.cur.eat("(") {
            let mut items = Vec::new();
            if !self.cur.eat(")") {
                loop {
                    items.push(self.pattern(seen)?);
                    if !self.cur.eat(",") {
                        break;
                    }
                }
                self.cur.expect(")")?;
            }
            return Ok(Pattern::tuple(items));
        }
        if self.cur.eat("_") {
            self.cur.expect(":")?;
            return Ok(Pattern::Wild { ty: self.ty()? });
        }
        let at = self.cur.pos();
        let name = self.ident()?;
        if !seen.insert(name.clone()) {
            return err_at(at, format!("variable `{name}` bound twice"));
        }
        self.cur.expect(":")?;
        Ok(Pattern::var(Name::free(&name), self.ty()?))
    }

    fn term(&mut self) -> Result<LtrTerm, SyntaxError> {
        if self.cur.eat("\\") {
            let pat = self.pattern(&mut BTreeSet::new())?;
            self.cur.expect(".")?;
            return Ok(LtrTerm::lam(pat, self.term()?));
        }
        if self.keyword("letrec") {
            let mut seen = BTreeSet::new();
            let mut decls = Vec::new();
            loop {
                let pat = self.pattern(&mut seen)?;
                self.expect_keyword("be")?;
                decls.push(Decl::new(pat, self.term()?));
                if !self.cur.eat(",") {
                    break;
                }
            }
            self.expect_keyword("in")?;
            return Ok(LtrTerm::letrec(decls, self.term()?));
        }
        if self.keyword("let") {
            let pat = self.pattern(&mut BTreeSet::new())?;
            self.cur.expect("=")?;
            let bound = self.term()?;
            self.expect_keyword("in")?;
            return Ok(LtrTerm::let_in(pat, bound, self.term()?));
        }
        let mut acc = self.prefix()?;
        loop {
            if self.cur.looking_at("\\") {
                let arg = self.term()?;
                return Ok(LtrTerm::app(acc, arg));
            }
            if !self.starts_prefix() {
                return Ok(acc);
            }
            acc = LtrTerm::app(acc, self.prefix()?);
        }
    }

    fn starts_prefix(&mut self) -> bool {
        match self.cur.peek_ident(&[]) {
            Some(id) => !is_keyword(id) || projection_index(id).is_some() || id == "pi",
            None => self.cur.peek_char() == Some('('),
        }
    }

    fn prefix(&mut self) -> Result<LtrTerm, SyntaxError> {
        if let Some(id) = self.cur.peek_ident(&[]) {
            let at = self.cur.pos();
            let index = if id == "pi" {
                self.cur.advance(2);
                match self.cur.nat() {
                    Some(i) => Some(i),
                    None => return self.cur.error("expected projection index after `pi`"),
                }
            } else {
                let i = projection_index(id);
                if i.is_some() {
                    self.cur.advance(id.len());
                }
                i
            };
            if let Some(index) = index {
                if index == 0 {
                    return err_at(at, "projection indices start at 1".to_string());
                }
                return Ok(LtrTerm::proj(index, self.prefix()?));
            }
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<LtrTerm, SyntaxError> {
        if self.cur.eat("(") {
            let mut items = Vec::new();
            let mut trailing = false;
            if !self.cur.eat(")") {
                loop {
                    items.push(self.term()?);
                    if !self.cur.eat(",") {
                        break;
                    }
                    if self.cur.looking_at(")") {
                        trailing = true;
                        break;
                    }
                }
                self.cur.expect(")")?;
            }
            return Ok(if items.len() == 1 && !trailing {
                items.pop().unwrap()
            } else {
                LtrTerm::tuple(items)
            });
        }
        let id = self.ident()?;
        Ok(LtrTerm::var(Name::free(&id)))
    }
}

fn projection_index(id: &str) -> Option<usize> {
    let digits = id.strip_prefix("pi")?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

fn is_keyword(id: &str) -> bool {
    KEYWORDS.contains(&id) || projection_index(id).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{alpha_eq, fv};

    fn free(n: &str) -> LtrTerm {
        LtrTerm::var(Name::free(n))
    }

    #[test]
    fn types() {
        let t = parse_ltr_type("b- => b+ * (b * 1) * c").unwrap();
        let expected = LtrType::fun(
            LtrType::base("b-"),
            LtrType::Prod(vec![
                LtrType::base("b+"),
                LtrType::base("b"),
                LtrType::base("c"),
            ]),
        );
        assert_eq!(t, expected);
        assert_eq!(parse_ltr_type("1 * 1").unwrap(), LtrType::unit());
        assert_eq!(
            parse_ltr_type("a => b => c").unwrap().to_string(),
            "a => b => c"
        );
    }

    #[test]
    fn lambda_with_tuple_body() {
        let mut s = FreshSupply::new();
        let t = parse_ltr("\\k:b. (y, k)", &mut s).unwrap();
        let LtrTerm::Lam {
            pat: Pattern::Var { name, ty },
            body,
        } = &t
        else {
            panic!("{t:?}")
        };
        assert_eq!(ty, &LtrType::base("b"));
        assert_eq!(
            **body,
            LtrTerm::tuple(vec![free("y"), LtrTerm::var(name.clone())])
        );
    }

    #[test]
    fn unit_let_and_projection() {
        let mut s = FreshSupply::new();
        assert_eq!(parse_ltr("()", &mut s).unwrap(), LtrTerm::unit());
        let t = parse_ltr("let x:b = m in n x", &mut s).unwrap();
        assert!(matches!(t, LtrTerm::Let { .. }));
        let p = parse_ltr("pi2 f (pi 1 z)", &mut s).unwrap();
        assert_eq!(
            p,
            LtrTerm::app(LtrTerm::proj(2, free("f")), LtrTerm::proj(1, free("z")))
        );
    }

    #[test]
    fn letrec_scopes_forward() {
        let mut s = FreshSupply::new();
        let t = parse_ltr(
            "\\k:d. letrec (u:t, z:s) be f (x, h), (v:d, h:t) be g (u, k) in (v, z)",
            &mut s,
        )
        .unwrap();
        assert_eq!(
            fv(&t),
            BTreeSet::from([Name::free("f"), Name::free("g"), Name::free("x")])
        );
    }

    #[test]
    fn letrec_shadows_outer_binder() {
        let mut s = FreshSupply::new();
        let t = parse_ltr("\\h:b. letrec x:b be h, h:b be x in x", &mut s).unwrap();
        let LtrTerm::Lam { pat, body } = &t else {
            panic!()
        };
        let outer = pat.names()[0].clone();
        assert_eq!(body.occurrences(&outer), 0);
    }

    #[test]
    fn errors() {
        let mut s = FreshSupply::new();
        let e = parse_ltr("letrec x:b be x, x:b be x in x", &mut s).unwrap_err();
        assert_eq!((e.line, e.col), (1, 18));
        let e = parse_ltr("pi0 x", &mut s).unwrap_err();
        assert!(e.message.contains("start at 1"));
        assert!(parse_ltr("letrec in x", &mut s).is_err());
        assert!(parse_ltr("", &mut s).is_err());
    }

    #[test]
    fn judgement() {
        let mut s = FreshSupply::new();
        let j = parse_ltr_judgement("x:b |- letrec y:b be x in y", &mut s).unwrap();
        assert_eq!(j.ctx, vec![(Name::free("x"), LtrType::base("b"))]);
        assert!(parse_ltr_judgement("|- ()", &mut s).unwrap().ctx.is_empty());
        assert!(parse_ltr_judgement("x:b, x:b |- x", &mut s).is_err());
    }

    #[test]
    fn round_trip() {
        let mut s = FreshSupply::new();
        for src in [
            "\\k:b. (y, k)",
            "\\(x:a, _:1, y:b => c). f (pi2 z) (x, y, ())",
            "letrec (u:t, z:s) be f (x, h), (v:d, h:t) be g (u, k) in (v, z)",
            "let p:a * b = (m, n) in pi1 p",
            "(f x,)",
            "\\x:a. \\x:a. (x, \\x:a. x)",
        ] {
            let t = parse_ltr(src, &mut s).unwrap();
            let back = parse_ltr(&t.pretty(), &mut s).unwrap();
            assert!(alpha_eq(&t, &back), "{src} -> {}", t.pretty());
        }
    }
}
