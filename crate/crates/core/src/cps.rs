//! Call-by-name CPS translation of the pure non-linear fragment, written
//! independently of [`crate::translate`], and a syntactic comparison of the
//! two.

use serde::Serialize;
use thiserror::Error;

use crate::dcll::{typecheck_dcll, DcllTerm, DcllType, DualContext};
use crate::kernel::{path_string, FreshSupply, Name};
use crate::letrec::{LtrTerm, Pattern};
use crate::translate::{translate, translate_type, BaseTypeEnv, PolarType, TranslateError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CpsError {
    #[error("term is outside the pure non-linear fragment at {location}: {construct}")]
    NotPure { construct: String, location: String },
    #[error("unbound variable `{0}`")]
    UnboundVariable(Name),
    #[error("ill-typed at {location}: {message}")]
    IllTyped { message: String, location: String },
    #[error(transparent)]
    Translate(#[from] TranslateError),
}

/// `⟦x⟧ = λk. x k`, `⟦λλx.M⟧ = λ(x,k). ⟦M⟧ k`, `⟦M@N⟧ = λk. ⟦M⟧ (⟦N⟧, k)`.
pub fn cbn_cps(
    gamma: &[(Name, DcllType)],
    term: &DcllTerm,
    env: &BaseTypeEnv,
    supply: &mut FreshSupply,
) -> Result<LtrTerm, CpsError> {
    let mut scope = gamma.to_vec();
    Ok(Cps { env, supply }.go(&mut scope, term, &mut Vec::new())?.0)
}

struct Cps<'a> {
    env: &'a BaseTypeEnv,
    supply: &'a mut FreshSupply,
}

impl Cps<'_> {
    fn polar(&self, t: &DcllType) -> Result<PolarType, CpsError> {
        Ok(translate_type(t, self.env)?)
    }

    /// The translation together with the source type.
    fn go(
        &mut self,
        scope: &mut Vec<(Name, DcllType)>,
        term: &DcllTerm,
        path: &mut Vec<usize>,
    ) -> Result<(LtrTerm, DcllType), CpsError> {
        match term {
            DcllTerm::Var { name } => {
                let ty = scope
                    .iter()
                    .rev()
                    .find(|(n, _)| n == name)
                    .map(|(_, t)| t.clone())
                    .ok_or_else(|| CpsError::UnboundVariable(name.clone()))?;
                let k = self.supply.fresh("k");
                let body = LtrTerm::app(LtrTerm::var(name.clone()), LtrTerm::var(k.clone()));
                Ok((
                    LtrTerm::lam(Pattern::var(k, self.polar(&ty)?.neg), body),
                    ty,
                ))
            }
            DcllTerm::NonLinLam { var, ty, body } => {
                scope.push((var.clone(), ty.clone()));
                path.push(0);
                let inner = self.go(scope, body, path);
                path.pop();
                scope.pop();
                let (m, res) = inner?;
                let k = self.supply.fresh("k");
                let pat = Pattern::tuple(vec![
                    Pattern::var(var.clone(), self.polar(ty)?.neg_to_pos()),
                    Pattern::var(k.clone(), self.polar(&res)?.neg),
                ]);
                let lam = LtrTerm::lam(pat, LtrTerm::app(m, LtrTerm::var(k)));
                Ok((lam, DcllType::arrow(ty.clone(), res)))
            }
            DcllTerm::NonLinApp { fun, arg } => {
                path.push(0);
                let f = self.go(scope, fun, path);
                path.pop();
                let (m, fty) = f?;
                path.push(1);
                let a = self.go(scope, arg, path);
                path.pop();
                let (n, aty) = a?;
                let res = match fty {
                    DcllType::Arrow(d, r) if *d == aty => *r,
                    other => {
                        return Err(CpsError::IllTyped {
                            message: format!("cannot apply {other} to {aty}"),
                            location: path_string(path),
                        })
                    }
                };
                let k = self.supply.fresh("k");
                let body = LtrTerm::app(m, LtrTerm::tuple(vec![n, LtrTerm::var(k.clone())]));
                Ok((
                    LtrTerm::lam(Pattern::var(k, self.polar(&res)?.neg), body),
                    res,
                ))
            }
            other => Err(CpsError::NotPure {
                construct: construct_name(other).to_string(),
                location: path_string(path),
            }),
        }
    }
}

fn construct_name(t: &DcllTerm) -> &'static str {
    match t {
        DcllTerm::LinLam { .. } => "linear abstraction",
        DcllTerm::LinApp { .. } => "linear application",
        DcllTerm::CElim { .. } => "C",
        _ => "non-linear construct",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mismatch {
    pub path: String,
    pub translated: String,
    pub cps: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CpsReport {
    pub translated: LtrTerm,
    pub cps: LtrTerm,
    pub coincide: bool,
    pub mismatch: Option<Mismatch>,
}

/// Runs both translations on `Γ ; ∅ ⊢ term` and compares them up to α.
pub fn check_cps_coincidence(
    gamma: &[(Name, DcllType)],
    term: &DcllTerm,
    env: &BaseTypeEnv,
    supply: &mut FreshSupply,
) -> Result<CpsReport, CpsError> {
    let cps = cbn_cps(gamma, term, env, supply)?;
    let ctx = DualContext::new(gamma.to_vec(), Vec::new()).map_err(TranslateError::from)?;
    let typed = typecheck_dcll(&ctx, term).map_err(TranslateError::from)?;
    let translated = translate(&typed, env, supply)?.sugared;
    let a = translated.canonical_binders();
    let b = cps.canonical_binders();
    let mismatch = first_mismatch(&a, &b, &mut Vec::new());
    Ok(CpsReport {
        coincide: mismatch.is_none(),
        translated,
        cps,
        mismatch,
    })
}

fn first_mismatch(a: &LtrTerm, b: &LtrTerm, path: &mut Vec<usize>) -> Option<Mismatch> {
    if a == b {
        return None;
    }
    let same_shape = match (a, b) {
        (LtrTerm::Lam { pat: p, .. }, LtrTerm::Lam { pat: q, .. }) => p == q,
        (LtrTerm::App { .. }, LtrTerm::App { .. }) => true,
        (LtrTerm::Tuple { items: x }, LtrTerm::Tuple { items: y }) => x.len() == y.len(),
        (LtrTerm::Proj { index: i, .. }, LtrTerm::Proj { index: j, .. }) => i == j,
        _ => false,
    };
    if same_shape {
        for (i, (x, y)) in a.children().into_iter().zip(b.children()).enumerate() {
            path.push(i);
            let found = first_mismatch(x, y, path);
            path.pop();
            if found.is_some() {
                return found;
            }
        }
    }
    Some(Mismatch {
        path: path_string(path),
        translated: a.to_string(),
        cps: b.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dcll::parse_dcll_judgement;
    use crate::kernel::alpha_eq;
    use crate::letrec::parse_ltr;

    fn run(src: &str) -> CpsReport {
        let mut s = FreshSupply::new();
        let j = parse_dcll_judgement(src, &mut s).unwrap();
        check_cps_coincidence(&j.ctx.gamma, &j.term, &BaseTypeEnv::polarized(), &mut s).unwrap()
    }

    fn cps_of(src: &str) -> LtrTerm {
        let mut s = FreshSupply::new();
        let j = parse_dcll_judgement(src, &mut s).unwrap();
        cbn_cps(&j.ctx.gamma, &j.term, &BaseTypeEnv::polarized(), &mut s).unwrap()
    }

    fn same(t: &LtrTerm, src: &str) {
        let mut s = FreshSupply::new();
        let e = parse_ltr(src, &mut s).unwrap();
        assert!(alpha_eq(t, &e), "got {t}, expected {e}");
    }

    #[test]
    fn clauses() {
        same(&cps_of("x:b ; |- x"), "\\k:b-. x k");
        same(
            &cps_of("; |- \\\\x:b. x"),
            "\\(x:b- => b+, k:b-). (\\k:b-. x k) k",
        );
        same(
            &cps_of("m:b -> b, n:b ; |- m @ n"),
            "\\k:b-. (\\k:(b- => b+) * b-. m k) (\\k:b-. n k, k)",
        );
    }

    #[test]
    fn coincidence() {
        assert!(run("x:b ; |- x").coincide);
        assert!(run("; |- \\\\x:b. \\\\y:b. x").coincide);
        assert!(run("y:b ; |- (\\\\x:b. x) @ y").coincide);
    }

    #[test]
    fn linear_constructs_are_rejected() {
        let mut s = FreshSupply::new();
        let j = parse_dcll_judgement("; |- \\x:b. x", &mut s).unwrap();
        let e = cbn_cps(&j.ctx.gamma, &j.term, &BaseTypeEnv::polarized(), &mut s).unwrap_err();
        assert!(matches!(e, CpsError::NotPure { ref location, .. } if location == "/"));
    }

    #[test]
    fn mismatch_points_at_the_difference() {
        let mut s = FreshSupply::new();
        let a = parse_ltr("\\k:b. (f k, g k)", &mut s)
            .unwrap()
            .canonical_binders();
        let b = parse_ltr("\\k:b. (f k, h k)", &mut s)
            .unwrap()
            .canonical_binders();
        let m = first_mismatch(&a, &b, &mut Vec::new()).unwrap();
        assert_eq!(m.path, "/0/1/0");
    }
}
