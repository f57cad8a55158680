use std::collections::BTreeMap;

use super::{Decl, LtrTerm, LtrType, Pattern};
use crate::kernel::{FreshSupply, Name};

/// True when no `let` and no non-variable pattern remains.
pub fn is_core(term: &LtrTerm) -> bool {
    match term {
        LtrTerm::Let { .. } => false,
        LtrTerm::Lam { pat, body } => matches!(pat, Pattern::Var { .. }) && is_core(body),
        LtrTerm::Letrec { decls, body } => {
            decls
                .iter()
                .all(|d| matches!(d.pat, Pattern::Var { .. }) && is_core(&d.term))
                && is_core(body)
        }
        _ => term.children().into_iter().all(is_core),
    }
}

/// For each variable of `pat`, the expression selecting its part out of a
/// value `z` of type `pat.ty()`, indexed over the flattened components.
pub fn pattern_projections(pat: &Pattern, z: &Name) -> Vec<(Name, LtrType, LtrTerm)> {
    let total = pat.ty().width();
    let mut out = Vec::new();
    let mut offset = 0;
    walk(pat, z, total, &mut offset, &mut out);
    out
}

fn walk(
    pat: &Pattern,
    z: &Name,
    total: usize,
    offset: &mut usize,
    out: &mut Vec<(Name, LtrType, LtrTerm)>,
) {
    match pat {
        Pattern::Tuple { items } => items.iter().for_each(|p| walk(p, z, total, offset, out)),
        Pattern::Wild { ty } => *offset += ty.width(),
        Pattern::Var { name, ty } => {
            let w = ty.width();
            let expr = if w == 0 {
                LtrTerm::unit()
            } else if total == 1 {
                LtrTerm::var(z.clone())
            } else if w == 1 {
                LtrTerm::proj(*offset + 1, LtrTerm::var(z.clone()))
            } else {
                LtrTerm::tuple(
                    (*offset + 1..=*offset + w)
                        .map(|i| LtrTerm::proj(i, LtrTerm::var(z.clone())))
                        .collect(),
                )
            };
            *offset += w;
            out.push((name.clone(), ty.clone(), expr));
        }
    }
}

/// Expands `let` into a β-redex and tuple patterns into a single variable
/// plus projections. Already-core terms are returned unchanged.
pub fn desugar(term: &LtrTerm, supply: &mut FreshSupply) -> LtrTerm {
    match term {
        LtrTerm::Var { .. } => term.clone(),
        LtrTerm::Let { pat, bound, body } => {
            let lam = LtrTerm::lam(pat.clone(), (**body).clone());
            desugar(&LtrTerm::app(lam, (**bound).clone()), supply)
        }
        LtrTerm::Lam { pat, body } => {
            let body = desugar(body, supply);
            match pat {
                Pattern::Var { .. } => LtrTerm::lam(pat.clone(), body),
                _ => {
                    let z = supply.fresh("z");
                    let map: BTreeMap<Name, LtrTerm> = pattern_projections(pat, &z)
                        .into_iter()
                        .map(|(x, _, e)| (x, e))
                        .collect();
                    let body = body.subst_many(&map, supply);
                    LtrTerm::lam(Pattern::var(z, pat.ty()), body)
                }
            }
        }
        LtrTerm::App { fun, arg } => LtrTerm::app(desugar(fun, supply), desugar(arg, supply)),
        LtrTerm::Tuple { items } => {
            LtrTerm::tuple(items.iter().map(|t| desugar(t, supply)).collect())
        }
        LtrTerm::Proj { index, tuple } => LtrTerm::proj(*index, desugar(tuple, supply)),
        LtrTerm::Letrec { decls, body } => {
            let mut out = Vec::new();
            for d in decls {
                let m = desugar(&d.term, supply);
                match &d.pat {
                    Pattern::Var { .. } => out.push(Decl::new(d.pat.clone(), m)),
                    pat => {
                        let z = supply.fresh("z");
                        out.push(Decl::new(Pattern::var(z.clone(), pat.ty()), m));
                        for (x, ty, e) in pattern_projections(pat, &z) {
                            out.push(Decl::new(Pattern::var(x, ty), e));
                        }
                    }
                }
            }
            LtrTerm::letrec(out, desugar(body, supply))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::alpha_eq;
    use crate::letrec::parse_ltr;

    fn p(src: &str, s: &mut FreshSupply) -> LtrTerm {
        parse_ltr(src, s).unwrap()
    }

    #[test]
    fn let_becomes_redex() {
        let mut s = FreshSupply::new();
        let t = desugar(&p("let x:b = m in n x", &mut s), &mut s);
        assert!(alpha_eq(&t, &p("(\\x:b. n x) m", &mut s)));
    }

    #[test]
    fn pair_pattern_lambda() {
        let mut s = FreshSupply::new();
        let t = desugar(&p("\\(x:a, y:b). f x y", &mut s), &mut s);
        assert!(alpha_eq(&t, &p("\\z:a * b. f (pi1 z) (pi2 z)", &mut s)));
    }

    #[test]
    fn pattern_letrec() {
        let mut s = FreshSupply::new();
        let t = desugar(&p("letrec (x:a, y:b) be m in n x y", &mut s), &mut s);
        let expected = p(
            "letrec z:a * b be m, x:a be pi1 z, y:b be pi2 z in n x y",
            &mut s,
        );
        assert!(alpha_eq(&t, &expected), "{t}");
    }

    #[test]
    fn nested_and_unit_components_flatten() {
        let mut s = FreshSupply::new();
        let t = desugar(
            &p("\\(x:a, (u:1, y:b * c), _:d). (x, y, u)", &mut s),
            &mut s,
        );
        let expected = p("\\z:a * b * c * d. (pi1 z, (pi2 z, pi3 z), ())", &mut s);
        assert!(alpha_eq(&t, &expected), "{t}");
        // a single non-unit component: the variable is z itself
        let t = desugar(&p("\\(u:1, x:a). x", &mut s), &mut s);
        assert!(alpha_eq(&t, &p("\\z:a. z", &mut s)), "{t}");
    }

    #[test]
    fn idempotent() {
        let mut s = FreshSupply::new();
        let t = p(
            "let (a:b, c:b) = m in letrec (x:b, y:b) be (c, a) in \\(p:b, q:b). (x, y, p, q)",
            &mut s,
        );
        let once = desugar(&t, &mut s);
        assert!(is_core(&once));
        let twice = desugar(&once, &mut s);
        assert!(alpha_eq(&once, &twice));
    }
}
