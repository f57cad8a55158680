use std::collections::BTreeSet;

use super::{DcllTerm, DcllType};
use crate::dcll::check::DualContext;
use crate::kernel::{FreshSupply, Name};
use crate::syntax::{Cursor, SyntaxError};

/// A parsed `Γ ; Δ |- M` judgement.
#[derive(Debug, Clone, PartialEq)]
pub struct Judgement {
    pub ctx: DualContext,
    pub term: DcllTerm,
}

/// Parser configuration: optionally restricts base types to a declared set.
#[derive(Debug, Clone, Default)]
pub struct DcllParser {
    pub bases: Option<BTreeSet<String>>,
}

pub fn parse_dcll_type(text: &str) -> Result<DcllType, SyntaxError> {
    DcllParser::default().parse_type(text)
}

pub fn parse_dcll_term(text: &str, supply: &mut FreshSupply) -> Result<DcllTerm, SyntaxError> {
    DcllParser::default().parse_term(text, supply)
}

pub fn parse_dcll_judgement(
    text: &str,
    supply: &mut FreshSupply,
) -> Result<Judgement, SyntaxError> {
    DcllParser::default().parse_judgement(text, supply)
}

impl DcllParser {
    pub fn with_bases(bases: impl IntoIterator<Item = String>) -> Self {
        DcllParser {
            bases: Some(bases.into_iter().collect()),
        }
    }

    pub fn parse_type(&self, text: &str) -> Result<DcllType, SyntaxError> {
        let mut st = State {
            cur: Cursor::new(text),
            cfg: self,
            scope: Vec::new(),
        };
        let ty = st.ty()?;
        st.finish()?;
        Ok(ty)
    }

    pub fn parse_term(
        &self,
        text: &str,
        supply: &mut FreshSupply,
    ) -> Result<DcllTerm, SyntaxError> {
        let mut st = State {
            cur: Cursor::new(text),
            cfg: self,
            scope: Vec::new(),
        };
        let term = st.term(supply)?;
        st.finish()?;
        Ok(term)
    }

    pub fn parse_judgement(
        &self,
        text: &str,
        supply: &mut FreshSupply,
    ) -> Result<Judgement, SyntaxError> {
        let mut st = State {
            cur: Cursor::new(text),
            cfg: self,
            scope: Vec::new(),
        };
        let gamma = st.bindings(&[";"])?;
        st.cur.expect(";")?;
        let delta = st.bindings(&["|-"])?;
        st.cur.expect("|-")?;
        let ctx = match DualContext::new(gamma, delta) {
            Ok(ctx) => ctx,
            Err(e) => return st.cur.error(e.to_string()),
        };
        let term = st.term(supply)?;
        st.finish()?;
        Ok(Judgement { ctx, term })
    }
}

struct State<'a, 'c> {
    cur: Cursor<'a>,
    cfg: &'c DcllParser,
    scope: Vec<Name>,
}

impl State<'_, '_> {
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
            Some(id) => {
                self.cur.advance(id.len());
                Ok(id.to_string())
            }
            None => {
                let found = self.cur.describe_next();
                self.cur
                    .error(format!("expected identifier, found {found}"))
            }
        }
    }

    fn bindings(&mut self, stop: &[&str]) -> Result<Vec<(Name, DcllType)>, SyntaxError> {
        let mut out = Vec::new();
        if stop.iter().any(|s| self.cur.looking_at(s)) {
            return Ok(out);
        }
        loop {
            let name = self.ident()?;
            self.cur.expect(":")?;
            let ty = self.ty()?;
            out.push((Name::free(&name), ty));
            if !self.cur.eat(",") {
                return Ok(out);
            }
        }
    }

    fn ty(&mut self) -> Result<DcllType, SyntaxError> {
        let lhs = self.ty_atom()?;
        if self.cur.eat("-o") {
            Ok(DcllType::lolli(lhs, self.ty()?))
        } else if self.cur.eat("->") {
            Ok(DcllType::arrow(lhs, self.ty()?))
        } else {
            Ok(lhs)
        }
    }

    fn ty_atom(&mut self) -> Result<DcllType, SyntaxError> {
        if self.cur.eat("(") {
            let t = self.ty()?;
            self.cur.expect(")")?;
            return Ok(t);
        }
        let pos_err = self.cur.pos();
        let id = self.ident()?;
        if id == "bot" {
            return Ok(DcllType::Bottom);
        }
        if let Some(bases) = &self.cfg.bases {
            if !bases.contains(&id) {
                return Err(SyntaxError {
                    line: pos_err.line,
                    col: pos_err.col,
                    message: format!("unknown base type `{id}`"),
                });
            }
        }
        Ok(DcllType::Base(id))
    }

    fn term(&mut self, supply: &mut FreshSupply) -> Result<DcllTerm, SyntaxError> {
        if self.cur.looking_at("\\") {
            return self.lambda(supply);
        }
        let mut acc = self.prefix(supply)?;
        loop {
            if self.cur.eat("@") {
                let arg = if self.cur.looking_at("\\") {
                    self.lambda(supply)?
                } else {
                    self.prefix(supply)?
                };
                acc = DcllTerm::nonlin_app(acc, arg);
            } else if self.cur.looking_at("\\") {
                let arg = self.lambda(supply)?;
                acc = DcllTerm::lin_app(acc, arg);
            } else if self.starts_prefix() {
                let arg = self.prefix(supply)?;
                acc = DcllTerm::lin_app(acc, arg);
            } else {
                return Ok(acc);
            }
        }
    }

    fn starts_prefix(&mut self) -> bool {
        matches!(self.cur.peek_char(), Some(c) if c == '(' || c.is_ascii_alphabetic())
    }

    fn lambda(&mut self, supply: &mut FreshSupply) -> Result<DcllTerm, SyntaxError> {
        let nonlinear = self.cur.eat("\\\\");
        if !nonlinear {
            self.cur.expect("\\")?;
        }
        let text = self.ident()?;
        self.cur.expect(":")?;
        let ty = self.ty()?;
        self.cur.expect(".")?;
        let var = supply.fresh(&text);
        self.scope.push(var.clone());
        let body = self.term(supply);
        self.scope.pop();
        let body = body?;
        Ok(if nonlinear {
            DcllTerm::nonlin_lam(var, ty, body)
        } else {
            DcllTerm::lin_lam(var, ty, body)
        })
    }

    fn prefix(&mut self, supply: &mut FreshSupply) -> Result<DcllTerm, SyntaxError> {
        if self.cur.looking_at("C") {
            if let Some("C") = self.cur.peek_ident(&[]) {
                self.cur.advance(1);
                if self.cur.eat("[") {
                    let ty = self.ty()?;
                    self.cur.expect("]")?;
                    let body = self.prefix(supply)?;
                    return Ok(DcllTerm::c_elim(ty, body));
                }
                return Ok(self.resolve("C"));
            }
        }
        self.atom(supply)
    }

    fn atom(&mut self, supply: &mut FreshSupply) -> Result<DcllTerm, SyntaxError> {
        if self.cur.eat("(") {
            let t = self.term(supply)?;
            self.cur.expect(")")?;
            return Ok(t);
        }
        let id = self.ident()?;
        Ok(self.resolve(&id))
    }

    fn resolve(&self, text: &str) -> DcllTerm {
        let name = self
            .scope
            .iter()
            .rev()
            .find(|n| n.text() == text)
            .cloned()
            .unwrap_or_else(|| Name::free(text));
        DcllTerm::var(name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::alpha_eq;

    fn b() -> DcllType {
        DcllType::base("b")
    }

    #[test]
    fn types() {
        assert_eq!(
            parse_dcll_type("b -o b").unwrap(),
            DcllType::lolli(b(), b())
        );
        assert_eq!(
            parse_dcll_type("(b -> bot) -o bot").unwrap(),
            DcllType::lolli(DcllType::arrow(b(), DcllType::Bottom), DcllType::Bottom)
        );
        assert_eq!(
            parse_dcll_type("b -o b -o bot").unwrap(),
            DcllType::lolli(b(), DcllType::lolli(b(), DcllType::Bottom))
        );
        // no whitespace needed around `-o`
        assert_eq!(
            parse_dcll_type("s-os").unwrap(),
            parse_dcll_type("s -o s").unwrap()
        );
    }

    #[test]
    fn unknown_base_type_is_rejected() {
        let p = DcllParser::with_bases(["b".to_string()]);
        let err = p.parse_type("b -o c").unwrap_err();
        assert_eq!((err.line, err.col), (1, 6));
        assert!(err.message.contains("unknown base type"));
    }

    #[test]
    fn terms() {
        let mut s = FreshSupply::new();
        let t = parse_dcll_term("\\x:b. x", &mut s).unwrap();
        match &t {
            DcllTerm::LinLam { var, ty, body } => {
                assert_eq!(var.text(), "x");
                assert_eq!(ty, &b());
                assert_eq!(**body, DcllTerm::var(var.clone()));
            }
            other => panic!("{other:?}"),
        }
        let g = parse_dcll_term("g (f x)", &mut s).unwrap();
        let v = |n: &str| DcllTerm::var(Name::free(n));
        assert_eq!(
            g,
            DcllTerm::lin_app(v("g"), DcllTerm::lin_app(v("f"), v("x")))
        );
        let nl = parse_dcll_term("\\\\x:b. M @ x", &mut s).unwrap();
        match nl {
            DcllTerm::NonLinLam { body, .. } => {
                assert!(matches!(*body, DcllTerm::NonLinApp { .. }))
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn application_is_left_associative() {
        let mut s = FreshSupply::new();
        let v = |n: &str| DcllTerm::var(Name::free(n));
        let t = parse_dcll_term("f x @ y z", &mut s).unwrap();
        let expected = DcllTerm::lin_app(
            DcllTerm::nonlin_app(DcllTerm::lin_app(v("f"), v("x")), v("y")),
            v("z"),
        );
        assert_eq!(t, expected);
    }

    #[test]
    fn c_elim_takes_a_type_and_an_atom() {
        let mut s = FreshSupply::new();
        let t = parse_dcll_term("C[b] m k", &mut s).unwrap();
        let v = |n: &str| DcllTerm::var(Name::free(n));
        assert_eq!(t, DcllTerm::lin_app(DcllTerm::c_elim(b(), v("m")), v("k")));
        // a variable may still be called C
        assert_eq!(
            parse_dcll_term("C x", &mut s).unwrap(),
            DcllTerm::lin_app(v("C"), v("x"))
        );
    }

    #[test]
    fn judgements() {
        let mut s = FreshSupply::new();
        let j = parse_dcll_judgement("f:s-os, g:s-os ; x:s |- g (f x)", &mut s).unwrap();
        assert_eq!(j.ctx.gamma.len(), 2);
        assert_eq!(j.ctx.delta, vec![(Name::free("x"), DcllType::base("s"))]);
        let empty = parse_dcll_judgement("; |- \\x:b. x", &mut s).unwrap();
        assert!(empty.ctx.gamma.is_empty() && empty.ctx.delta.is_empty());
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let mut s = FreshSupply::new();
        let e = parse_dcll_term("\\x:b x", &mut s).unwrap_err();
        assert_eq!((e.line, e.col), (1, 6));
        let e = parse_dcll_term("", &mut s).unwrap_err();
        assert_eq!((e.line, e.col), (1, 1));
        let e = parse_dcll_judgement("x:b |- x", &mut s).unwrap_err();
        assert!(e.message.contains("`;`"));
    }

    #[test]
    fn print_parse_round_trip() {
        let mut s = FreshSupply::new();
        for src in [
            "\\x:b. \\\\y:b -> b. y @ x",
            "C[b] (\\k:b -o bot. k x)",
            "(\\x:b. x) (f y)",
            "f (C[b] m) @ (\\\\z:b. z)",
            "\\x:b. \\x:b. x",
        ] {
            let t = parse_dcll_term(src, &mut s).unwrap();
            let printed = t.pretty();
            let back = parse_dcll_term(&printed, &mut s).unwrap();
            assert!(alpha_eq(&t, &back), "{src} -> {printed}");
        }
    }
}
