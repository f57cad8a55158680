use thiserror::Error;

use super::{LtrTerm, LtrType, Pattern};
use crate::kernel::{path_string, Name};

/// An ordered typing context; later entries shadow earlier ones.
pub type LtrContext = Vec<(Name, LtrType)>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LtrTypeError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(Name),
    #[error("type mismatch at {location}: expected {expected}, found {found}")]
    TypeMismatch {
        expected: String,
        found: LtrType,
        location: String,
    },
    #[error("projection pi{index} at {location} out of range for a {arity}-tuple")]
    ProjectionOutOfRange {
        index: usize,
        arity: usize,
        location: String,
    },
    #[error("letrec at {location} has no declarations")]
    EmptyLetrec { location: String },
}

/// The unique type of `term` under `ctx`. Sugar (`let`, tuple patterns) is
/// checked directly, so the result agrees with checking the desugared term.
pub fn typecheck_ltr(ctx: &[(Name, LtrType)], term: &LtrTerm) -> Result<LtrType, LtrTypeError> {
    let mut env = ctx.to_vec();
    infer_type(&mut env, term, &mut Vec::new())
}

/// Inference with an explicit, restored-on-return context and the current
/// path (used for error locations).
pub fn infer_type(
    env: &mut LtrContext,
    term: &LtrTerm,
    path: &mut Vec<usize>,
) -> Result<LtrType, LtrTypeError> {
    let mismatch = |expected: String, found: LtrType, path: &[usize]| LtrTypeError::TypeMismatch {
        expected,
        found,
        location: path_string(path),
    };
    let child = |env: &mut LtrContext, i: usize, t: &LtrTerm, path: &mut Vec<usize>| {
        path.push(i);
        let r = infer_type(env, t, path);
        path.pop();
        r
    };
    match term {
        LtrTerm::Var { name } => env
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, t)| t.clone())
            .ok_or_else(|| LtrTypeError::UnboundVariable(name.clone())),
        LtrTerm::Lam { pat, body } => {
            let n = push_pattern(env, pat);
            let res = child(env, 0, body, path);
            env.truncate(env.len() - n);
            Ok(LtrType::fun(pat.ty(), res?))
        }
        LtrTerm::App { fun, arg } => {
            let f = child(env, 0, fun, path)?;
            let a = child(env, 1, arg, path)?;
            match f {
                LtrType::Fun(dom, res) => {
                    if *dom == a {
                        Ok(*res)
                    } else {
                        path.push(1);
                        let e = mismatch(dom.to_string(), a, path);
                        path.pop();
                        Err(e)
                    }
                }
                other => {
                    path.push(0);
                    let e = mismatch("a function type".into(), other, path);
                    path.pop();
                    Err(e)
                }
            }
        }
        LtrTerm::Tuple { items } => {
            let mut tys = Vec::with_capacity(items.len());
            for (i, t) in items.iter().enumerate() {
                tys.push(child(env, i, t, path)?);
            }
            Ok(LtrType::product(tys))
        }
        LtrTerm::Proj { index, tuple } => {
            let t = child(env, 0, tuple, path)?;
            match t {
                LtrType::Prod(cs) => {
                    if *index == 0 || *index > cs.len() {
                        Err(LtrTypeError::ProjectionOutOfRange {
                            index: *index,
                            arity: cs.len(),
                            location: path_string(path),
                        })
                    } else {
                        Ok(cs[index - 1].clone())
                    }
                }
                other => {
                    path.push(0);
                    let e = mismatch("a product type".into(), other, path);
                    path.pop();
                    Err(e)
                }
            }
        }
        LtrTerm::Letrec { decls, body } => {
            if decls.is_empty() {
                return Err(LtrTypeError::EmptyLetrec {
                    location: path_string(path),
                });
            }
            let n: usize = decls.iter().map(|d| push_pattern(env, &d.pat)).sum();
            let result = (|| {
                for (i, d) in decls.iter().enumerate() {
                    let t = child(env, i, &d.term, path)?;
                    let expected = d.pat.ty();
                    if t != expected {
                        path.push(i);
                        let e = mismatch(expected.to_string(), t, path);
                        path.pop();
                        return Err(e);
                    }
                }
                child(env, decls.len(), body, path)
            })();
            env.truncate(env.len() - n);
            result
        }
        LtrTerm::Let { pat, bound, body } => {
            let t = child(env, 0, bound, path)?;
            let expected = pat.ty();
            if t != expected {
                path.push(0);
                let e = mismatch(expected.to_string(), t, path);
                path.pop();
                return Err(e);
            }
            let n = push_pattern(env, pat);
            let res = child(env, 1, body, path);
            env.truncate(env.len() - n);
            res
        }
    }
}

fn push_pattern(env: &mut LtrContext, pat: &Pattern) -> usize {
    let vars = pat.vars();
    let n = vars.len();
    env.extend(vars);
    n
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::FreshSupply;
    use crate::letrec::{desugar, parse_ltr, parse_ltr_judgement, parse_ltr_type};

    fn check(src: &str) -> Result<LtrType, LtrTypeError> {
        let mut s = FreshSupply::new();
        let j = parse_ltr_judgement(src, &mut s).unwrap();
        typecheck_ltr(&j.ctx, &j.term)
    }

    fn ty(src: &str) -> LtrType {
        parse_ltr_type(src).unwrap()
    }

    #[test]
    fn nonlinear_axiom_shape() {
        assert_eq!(check("x:b- => b+ |- \\k:b-. x k").unwrap(), ty("b- => b+"));
    }

    #[test]
    fn letrec_single_declaration() {
        assert_eq!(check("x:b |- letrec y:b be x in y").unwrap(), ty("b"));
    }

    #[test]
    fn recursive_declarations_see_each_other() {
        let t = check("f:b * c => c * b |- letrec (u:c, v:b) be f (v, u) in (u, v)").unwrap();
        assert_eq!(t, ty("c * b"));
    }

    #[test]
    fn projection_out_of_range() {
        let e = check("x:a, y:b |- pi3 (x, y)").unwrap_err();
        assert_eq!(
            e,
            LtrTypeError::ProjectionOutOfRange {
                index: 3,
                arity: 2,
                location: "/".into()
            }
        );
        assert!(matches!(
            check("x:a |- pi1 x"),
            Err(LtrTypeError::TypeMismatch { .. })
        ));
    }

    #[test]
    fn mismatch_and_unbound() {
        let e = check("f:a => b, y:b |- f y").unwrap_err();
        assert!(matches!(e, LtrTypeError::TypeMismatch { ref location, .. } if location == "/1"));
        assert!(matches!(
            check("|- x"),
            Err(LtrTypeError::UnboundVariable(_))
        ));
    }

    #[test]
    fn empty_letrec() {
        let t = LtrTerm::letrec(vec![], LtrTerm::unit());
        assert!(matches!(
            typecheck_ltr(&[], &t),
            Err(LtrTypeError::EmptyLetrec { .. })
        ));
    }

    #[test]
    fn sugar_agrees_with_desugared() {
        let mut s = FreshSupply::new();
        let ctx = vec![
            (Name::free("m"), ty("a * b")),
            (Name::free("f"), ty("b => a => c")),
        ];
        for src in [
            "let (x:a, y:b) = m in f y x",
            "\\(x:a, _:1, y:b). f y x",
            "letrec (x:a, y:b) be m in (f y x, y)",
        ] {
            let t = parse_ltr(src, &mut s).unwrap();
            let d = desugar(&t, &mut s);
            assert_eq!(
                typecheck_ltr(&ctx, &t).unwrap(),
                typecheck_ltr(&ctx, &d).unwrap(),
                "{src}"
            );
        }
    }
}
