use super::{Normalized, RewriteConfig};
use crate::dcll::{DcllTerm, DcllType, DualContext};
use crate::kernel::{path_string, Binding, FreshSupply, Name};

type Env = Vec<(Name, DcllType)>;

/// β⊸, β→ and C₂ as reductions; η⊸, η→ as contractions; C₁ oriented
/// `L (C M) → M L`.
pub fn normalize_dcll(
    ctx: &DualContext,
    term: &DcllTerm,
    cfg: &RewriteConfig,
    supply: &mut FreshSupply,
) -> Normalized<DcllTerm> {
    let mut n = Normalizer {
        cfg,
        supply,
        env: ctx.gamma.iter().chain(ctx.delta.iter()).cloned().collect(),
        steps: 0,
        exhausted: false,
        trace: Vec::new(),
    };
    let term = n.norm(term.clone(), &mut Vec::new());
    Normalized {
        term,
        steps: n.steps,
        exhausted: n.exhausted,
        trace: n.trace,
    }
}

/// Every term reachable by a single rule application at any position.
pub fn one_step_reducts_dcll(
    ctx: &DualContext,
    term: &DcllTerm,
    supply: &mut FreshSupply,
) -> Vec<DcllTerm> {
    let mut env: Env = ctx.gamma.iter().chain(ctx.delta.iter()).cloned().collect();
    let mut out = Vec::new();
    reducts(&mut env, term, supply, &mut out);
    out
}

fn reducts(env: &mut Env, t: &DcllTerm, supply: &mut FreshSupply, out: &mut Vec<DcllTerm>) {
    if let Some((_, r)) = root_step(env, t, supply) {
        out.push(r);
    }
    match t {
        DcllTerm::Var { .. } => {}
        DcllTerm::LinLam { var, ty, body } | DcllTerm::NonLinLam { var, ty, body } => {
            env.push((var.clone(), ty.clone()));
            let mut inner = Vec::new();
            reducts(env, body, supply, &mut inner);
            env.pop();
            let linear = matches!(t, DcllTerm::LinLam { .. });
            out.extend(inner.into_iter().map(|b| {
                if linear {
                    DcllTerm::lin_lam(var.clone(), ty.clone(), b)
                } else {
                    DcllTerm::nonlin_lam(var.clone(), ty.clone(), b)
                }
            }));
        }
        DcllTerm::LinApp { fun, arg } | DcllTerm::NonLinApp { fun, arg } => {
            let linear = matches!(t, DcllTerm::LinApp { .. });
            let rebuild = |f: DcllTerm, a: DcllTerm| {
                if linear {
                    DcllTerm::lin_app(f, a)
                } else {
                    DcllTerm::nonlin_app(f, a)
                }
            };
            let mut inner = Vec::new();
            reducts(env, fun, supply, &mut inner);
            out.extend(inner.into_iter().map(|f| rebuild(f, (**arg).clone())));
            let mut inner = Vec::new();
            reducts(env, arg, supply, &mut inner);
            out.extend(inner.into_iter().map(|a| rebuild((**fun).clone(), a)));
        }
        DcllTerm::CElim { ty, body } => {
            let mut inner = Vec::new();
            reducts(env, body, supply, &mut inner);
            out.extend(inner.into_iter().map(|b| DcllTerm::c_elim(ty.clone(), b)));
        }
    }
}

struct Normalizer<'a> {
    cfg: &'a RewriteConfig,
    supply: &'a mut FreshSupply,
    env: Env,
    steps: usize,
    exhausted: bool,
    trace: Vec<String>,
}

impl Normalizer<'_> {
    fn norm(&mut self, mut t: DcllTerm, path: &mut Vec<usize>) -> DcllTerm {
        loop {
            t = self.norm_children(t, path);
            if self.exhausted {
                return t;
            }
            let Some((rule, next)) = root_step(&mut self.env, &t, self.supply) else {
                return t;
            };
            if self.steps >= self.cfg.max_steps {
                self.exhausted = true;
                return t;
            }
            self.steps += 1;
            if self.cfg.trace {
                self.trace.push(format!("{rule} @ {}", path_string(path)));
            }
            t = next;
        }
    }

    fn at(&mut self, i: usize, t: DcllTerm, path: &mut Vec<usize>) -> DcllTerm {
        path.push(i);
        let r = self.norm(t, path);
        path.pop();
        r
    }

    fn norm_children(&mut self, t: DcllTerm, path: &mut Vec<usize>) -> DcllTerm {
        match t {
            DcllTerm::Var { .. } => t,
            DcllTerm::LinLam { var, ty, body } => {
                self.env.push((var.clone(), ty.clone()));
                let body = self.at(0, *body, path);
                self.env.pop();
                DcllTerm::lin_lam(var, ty, body)
            }
            DcllTerm::NonLinLam { var, ty, body } => {
                self.env.push((var.clone(), ty.clone()));
                let body = self.at(0, *body, path);
                self.env.pop();
                DcllTerm::nonlin_lam(var, ty, body)
            }
            DcllTerm::LinApp { fun, arg } => {
                let f = self.at(0, *fun, path);
                DcllTerm::lin_app(f, self.at(1, *arg, path))
            }
            DcllTerm::NonLinApp { fun, arg } => {
                let f = self.at(0, *fun, path);
                DcllTerm::nonlin_app(f, self.at(1, *arg, path))
            }
            DcllTerm::CElim { ty, body } => DcllTerm::c_elim(ty, self.at(0, *body, path)),
        }
    }
}

fn root_step(
    env: &mut Env,
    t: &DcllTerm,
    supply: &mut FreshSupply,
) -> Option<(&'static str, DcllTerm)> {
    match t {
        DcllTerm::LinApp { fun, arg } => {
            if let DcllTerm::LinLam { var, body, .. } = &**fun {
                return Some(("beta-lolli", body.subst(var, arg, supply)));
            }
            if let DcllTerm::CElim { body, .. } = &**arg {
                if synth(env, t) == Some(DcllType::Bottom) {
                    return Some(("c1", DcllTerm::lin_app((**body).clone(), (**fun).clone())));
                }
            }
            None
        }
        DcllTerm::NonLinApp { fun, arg } => match &**fun {
            DcllTerm::NonLinLam { var, body, .. } => {
                Some(("beta-arrow", body.subst(var, arg, supply)))
            }
            _ => None,
        },
        DcllTerm::CElim { body, .. } => {
            let DcllTerm::LinLam {
                var: k,
                body: inner,
                ..
            } = &**body
            else {
                return None;
            };
            let DcllTerm::LinApp { fun, arg } = &**inner else {
                return None;
            };
            match &**fun {
                DcllTerm::Var { name } if name == k && !arg.free_vars().contains(k) => {
                    Some(("c2", (**arg).clone()))
                }
                _ => None,
            }
        }
        DcllTerm::LinLam { var, body, .. } => match &**body {
            DcllTerm::LinApp { fun, arg }
                if matches!(&**arg, DcllTerm::Var { name } if name == var)
                    && !fun.free_vars().contains(var) =>
            {
                Some(("eta-lolli", (**fun).clone()))
            }
            _ => None,
        },
        DcllTerm::NonLinLam { var, body, .. } => match &**body {
            DcllTerm::NonLinApp { fun, arg }
                if matches!(&**arg, DcllTerm::Var { name } if name == var)
                    && !fun.free_vars().contains(var) =>
            {
                Some(("eta-arrow", (**fun).clone()))
            }
            _ => None,
        },
        DcllTerm::Var { .. } => None,
    }
}

/// Simple type synthesis (linearity is not rechecked).
fn synth(env: &mut Env, t: &DcllTerm) -> Option<DcllType> {
    match t {
        DcllTerm::Var { name } => env
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, t)| t.clone()),
        DcllTerm::LinLam { var, ty, body } | DcllTerm::NonLinLam { var, ty, body } => {
            env.push((var.clone(), ty.clone()));
            let r = synth(env, body);
            env.pop();
            let r = r?;
            Some(if matches!(t, DcllTerm::LinLam { .. }) {
                DcllType::lolli(ty.clone(), r)
            } else {
                DcllType::arrow(ty.clone(), r)
            })
        }
        DcllTerm::LinApp { fun, .. } | DcllTerm::NonLinApp { fun, .. } => match synth(env, fun)? {
            DcllType::Lolli(_, r) | DcllType::Arrow(_, r) => Some(*r),
            _ => None,
        },
        DcllTerm::CElim { ty, .. } => Some(ty.clone()),
    }
}

/// A rendering invariant under renaming of bound variables.
pub fn dcll_key(t: &DcllTerm) -> String {
    fn go(t: &DcllTerm, scope: &mut Vec<Name>, out: &mut String) {
        match t {
            DcllTerm::Var { name } => match scope.iter().rposition(|n| n == name) {
                Some(i) => out.push_str(&format!("#{}", scope.len() - i)),
                None => out.push_str(&name.to_string()),
            },
            DcllTerm::LinLam { var, ty, body } | DcllTerm::NonLinLam { var, ty, body } => {
                let tag = if matches!(t, DcllTerm::LinLam { .. }) {
                    "\\"
                } else {
                    "\\\\"
                };
                out.push_str(&format!("{tag}:{ty}."));
                scope.push(var.clone());
                go(body, scope, out);
                scope.pop();
            }
            DcllTerm::LinApp { fun, arg } | DcllTerm::NonLinApp { fun, arg } => {
                let tag = if matches!(t, DcllTerm::LinApp { .. }) {
                    " "
                } else {
                    " @ "
                };
                out.push('(');
                go(fun, scope, out);
                out.push_str(tag);
                go(arg, scope, out);
                out.push(')');
            }
            DcllTerm::CElim { ty, body } => {
                out.push_str(&format!("C[{ty}]("));
                go(body, scope, out);
                out.push(')');
            }
        }
    }
    let mut out = String::new();
    go(t, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dcll::{parse_dcll_judgement, parse_dcll_term};
    use crate::kernel::alpha_eq;

    fn norm(src: &str) -> (DcllTerm, Vec<String>) {
        let mut s = FreshSupply::new();
        let j = parse_dcll_judgement(src, &mut s).unwrap();
        let out = normalize_dcll(&j.ctx, &j.term, &RewriteConfig::default().traced(), &mut s);
        (out.term, out.trace)
    }

    fn same(t: &DcllTerm, src: &str) {
        let mut s = FreshSupply::new();
        let e = parse_dcll_term(src, &mut s).unwrap();
        assert!(alpha_eq(t, &e), "got {t}, expected {e}");
    }

    #[test]
    fn beta_rules() {
        let (t, trace) = norm("; y:b |- (\\x:b. x) y");
        same(&t, "y");
        assert_eq!(trace, vec!["beta-lolli @ /"]);
        same(&norm("f:b -> b, y:b ; |- (\\\\x:b. f @ x) @ y").0, "f @ y");
    }

    #[test]
    fn duality_rules() {
        same(&norm("; m:b |- C[b] (\\k:b -o bot. k m)").0, "m");
        let (t, trace) = norm("; l:b -o bot, m:(b -o bot) -o bot |- l (C[b] m)");
        same(&t, "m l");
        assert_eq!(trace, vec!["c1 @ /"]);
        // not applicable when the result type is not bot
        let (t, _) = norm("; l:b -o b, m:(b -o bot) -o bot |- l (C[b] m)");
        assert!(matches!(t, DcllTerm::LinApp { .. }));
    }

    #[test]
    fn eta_rules() {
        same(&norm("; f:b -o b |- \\x:b. f x").0, "f");
        same(&norm("f:b -> b ; |- \\\\x:b. f @ x").0, "f");
    }

    #[test]
    fn keys_ignore_binder_names() {
        let mut s = FreshSupply::new();
        let a = parse_dcll_term("\\x:b. \\y:b. x", &mut s).unwrap();
        let b = parse_dcll_term("\\u:b. \\v:b. u", &mut s).unwrap();
        let c = parse_dcll_term("\\u:b. \\v:b. v", &mut s).unwrap();
        assert_eq!(dcll_key(&a), dcll_key(&b));
        assert_ne!(dcll_key(&a), dcll_key(&c));
    }
}
