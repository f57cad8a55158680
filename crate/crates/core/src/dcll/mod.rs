//! The dual-context linear lambda calculus: types, terms, printing and binding.

mod check;
mod parse;

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::kernel::{AlphaEnv, Binding, DisplayScope, FreshSupply, Name};

pub use check::{
    linear_split, typecheck_dcll, CheckError, DualContext, Rule, Split, TypedDcll, TypedNode,
};
pub use parse::{parse_dcll_judgement, parse_dcll_term, parse_dcll_type, DcllParser, Judgement};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(tag = "kind", content = "args")]
pub enum DcllType {
    Base(String),
    Bottom,
    /// Linear implication `σ -o τ`.
    Lolli(Box<DcllType>, Box<DcllType>),
    /// Non-linear implication `σ -> τ`.
    Arrow(Box<DcllType>, Box<DcllType>),
}

impl DcllType {
    pub fn base(name: &str) -> Self {
        DcllType::Base(name.to_string())
    }

    pub fn lolli(arg: DcllType, res: DcllType) -> Self {
        DcllType::Lolli(Box::new(arg), Box::new(res))
    }

    pub fn arrow(arg: DcllType, res: DcllType) -> Self {
        DcllType::Arrow(Box::new(arg), Box::new(res))
    }

    /// `(σ -o bot) -o bot`, the type a `C[σ]` body must have.
    pub fn double_negation(self) -> Self {
        DcllType::lolli(DcllType::lolli(self, DcllType::Bottom), DcllType::Bottom)
    }

    /// The unit `I = bot -o bot`.
    pub fn unit() -> Self {
        DcllType::lolli(DcllType::Bottom, DcllType::Bottom)
    }

    /// `!σ = (σ -> bot) -o bot`.
    pub fn bang(self) -> Self {
        DcllType::lolli(DcllType::arrow(self, DcllType::Bottom), DcllType::Bottom)
    }

    pub fn base_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_bases(&mut out);
        out
    }

    fn collect_bases(&self, out: &mut BTreeSet<String>) {
        match self {
            DcllType::Base(b) => {
                out.insert(b.clone());
            }
            DcllType::Bottom => {}
            DcllType::Lolli(a, r) | DcllType::Arrow(a, r) => {
                a.collect_bases(out);
                r.collect_bases(out);
            }
        }
    }

    /// True when no `->` occurs anywhere in the type.
    pub fn is_linear_only(&self) -> bool {
        match self {
            DcllType::Base(_) | DcllType::Bottom => true,
            DcllType::Lolli(a, r) => a.is_linear_only() && r.is_linear_only(),
            DcllType::Arrow(..) => false,
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            DcllType::Base(_) | DcllType::Bottom => 0,
            DcllType::Lolli(a, r) | DcllType::Arrow(a, r) => 1 + a.depth().max(r.depth()),
        }
    }
}

impl fmt::Display for DcllType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DcllType::Base(b) => write!(f, "{b}"),
            DcllType::Bottom => write!(f, "bot"),
            DcllType::Lolli(a, r) | DcllType::Arrow(a, r) => {
                let op = if matches!(self, DcllType::Lolli(..)) {
                    "-o"
                } else {
                    "->"
                };
                if matches!(**a, DcllType::Lolli(..) | DcllType::Arrow(..)) {
                    write!(f, "({a}) {op} {r}")
                } else {
                    write!(f, "{a} {op} {r}")
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum DcllTerm {
    Var {
        name: Name,
    },
    /// Linear abstraction `\x:σ. M`.
    LinLam {
        var: Name,
        ty: DcllType,
        body: Box<DcllTerm>,
    },
    /// Linear application `M N`.
    LinApp {
        fun: Box<DcllTerm>,
        arg: Box<DcllTerm>,
    },
    /// Non-linear abstraction `\\x:σ. M`.
    NonLinLam {
        var: Name,
        ty: DcllType,
        body: Box<DcllTerm>,
    },
    /// Non-linear application `M @ N`.
    NonLinApp {
        fun: Box<DcllTerm>,
        arg: Box<DcllTerm>,
    },
    /// Double-negation elimination `C[σ] M`.
    CElim {
        ty: DcllType,
        body: Box<DcllTerm>,
    },
}

impl DcllTerm {
    pub fn var(name: Name) -> Self {
        DcllTerm::Var { name }
    }

    pub fn lin_lam(var: Name, ty: DcllType, body: DcllTerm) -> Self {
        DcllTerm::LinLam {
            var,
            ty,
            body: Box::new(body),
        }
    }

    pub fn lin_app(fun: DcllTerm, arg: DcllTerm) -> Self {
        DcllTerm::LinApp {
            fun: Box::new(fun),
            arg: Box::new(arg),
        }
    }

    pub fn nonlin_lam(var: Name, ty: DcllType, body: DcllTerm) -> Self {
        DcllTerm::NonLinLam {
            var,
            ty,
            body: Box::new(body),
        }
    }

    pub fn nonlin_app(fun: DcllTerm, arg: DcllTerm) -> Self {
        DcllTerm::NonLinApp {
            fun: Box::new(fun),
            arg: Box::new(arg),
        }
    }

    pub fn c_elim(ty: DcllType, body: DcllTerm) -> Self {
        DcllTerm::CElim {
            ty,
            body: Box::new(body),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            DcllTerm::Var { .. } => 1,
            DcllTerm::LinLam { body, .. }
            | DcllTerm::NonLinLam { body, .. }
            | DcllTerm::CElim { body, .. } => 1 + body.size(),
            DcllTerm::LinApp { fun, arg } | DcllTerm::NonLinApp { fun, arg } => {
                1 + fun.size() + arg.size()
            }
        }
    }

    /// Direct subterms, left to right; paths index into this list.
    pub fn children(&self) -> Vec<&DcllTerm> {
        match self {
            DcllTerm::Var { .. } => vec![],
            DcllTerm::LinLam { body, .. }
            | DcllTerm::NonLinLam { body, .. }
            | DcllTerm::CElim { body, .. } => vec![body],
            DcllTerm::LinApp { fun, arg } | DcllTerm::NonLinApp { fun, arg } => vec![fun, arg],
        }
    }

    /// Only non-linear variables, `\\` and `@`.
    pub fn is_pure(&self) -> bool {
        match self {
            DcllTerm::Var { .. } => true,
            DcllTerm::NonLinLam { body, .. } => body.is_pure(),
            DcllTerm::NonLinApp { fun, arg } => fun.is_pure() && arg.is_pure(),
            _ => false,
        }
    }

    /// No `\\`, `@`.
    pub fn is_purely_linear(&self) -> bool {
        match self {
            DcllTerm::Var { .. } => true,
            DcllTerm::LinLam { ty, body, .. } => ty.is_linear_only() && body.is_purely_linear(),
            DcllTerm::LinApp { fun, arg } => fun.is_purely_linear() && arg.is_purely_linear(),
            DcllTerm::CElim { ty, body } => ty.is_linear_only() && body.is_purely_linear(),
            DcllTerm::NonLinLam { .. } | DcllTerm::NonLinApp { .. } => false,
        }
    }

    fn collect_fv(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        match self {
            DcllTerm::Var { name } => {
                if !bound.contains(name) {
                    out.insert(name.clone());
                }
            }
            DcllTerm::LinLam { var, body, .. } | DcllTerm::NonLinLam { var, body, .. } => {
                bound.push(var.clone());
                body.collect_fv(bound, out);
                bound.pop();
            }
            DcllTerm::LinApp { fun, arg } | DcllTerm::NonLinApp { fun, arg } => {
                fun.collect_fv(bound, out);
                arg.collect_fv(bound, out);
            }
            DcllTerm::CElim { body, .. } => body.collect_fv(bound, out),
        }
    }

    fn rename_var(&self, from: &Name, to: &Name) -> DcllTerm {
        match self {
            DcllTerm::Var { name } if name == from => DcllTerm::var(to.clone()),
            DcllTerm::Var { .. } => self.clone(),
            DcllTerm::LinLam { var, .. } | DcllTerm::NonLinLam { var, .. } if var == from => {
                self.clone()
            }
            DcllTerm::LinLam { var, ty, body } => {
                DcllTerm::lin_lam(var.clone(), ty.clone(), body.rename_var(from, to))
            }
            DcllTerm::NonLinLam { var, ty, body } => {
                DcllTerm::nonlin_lam(var.clone(), ty.clone(), body.rename_var(from, to))
            }
            DcllTerm::LinApp { fun, arg } => {
                DcllTerm::lin_app(fun.rename_var(from, to), arg.rename_var(from, to))
            }
            DcllTerm::NonLinApp { fun, arg } => {
                DcllTerm::nonlin_app(fun.rename_var(from, to), arg.rename_var(from, to))
            }
            DcllTerm::CElim { ty, body } => DcllTerm::c_elim(ty.clone(), body.rename_var(from, to)),
        }
    }

    fn alpha_eq_in(&self, other: &DcllTerm, env: &mut AlphaEnv) -> bool {
        use DcllTerm::*;
        match (self, other) {
            (Var { name: a }, Var { name: b }) => env.vars_match(a, b),
            (
                LinLam {
                    var: x,
                    ty: s,
                    body: m,
                },
                LinLam {
                    var: y,
                    ty: t,
                    body: n,
                },
            )
            | (
                NonLinLam {
                    var: x,
                    ty: s,
                    body: m,
                },
                NonLinLam {
                    var: y,
                    ty: t,
                    body: n,
                },
            ) => {
                if s != t {
                    return false;
                }
                env.push(x.clone(), y.clone());
                let eq = m.alpha_eq_in(n, env);
                env.pop(1);
                eq
            }
            (LinApp { fun: f, arg: a }, LinApp { fun: g, arg: b })
            | (NonLinApp { fun: f, arg: a }, NonLinApp { fun: g, arg: b }) => {
                f.alpha_eq_in(g, env) && a.alpha_eq_in(b, env)
            }
            (CElim { ty: s, body: m }, CElim { ty: t, body: n }) => s == t && m.alpha_eq_in(n, env),
            _ => false,
        }
    }

    fn subst_binder(
        var: &Name,
        body: &DcllTerm,
        target: &Name,
        replacement: &DcllTerm,
        repl_fv: &BTreeSet<Name>,
        supply: &mut FreshSupply,
    ) -> (Name, DcllTerm) {
        if var == target {
            return (var.clone(), body.clone());
        }
        if repl_fv.contains(var) {
            let fresh = supply.refresh(var);
            let renamed = body.rename_var(var, &fresh);
            let body = renamed.subst_with(target, replacement, repl_fv, supply);
            (fresh, body)
        } else {
            (
                var.clone(),
                body.subst_with(target, replacement, repl_fv, supply),
            )
        }
    }

    fn subst_with(
        &self,
        target: &Name,
        replacement: &DcllTerm,
        repl_fv: &BTreeSet<Name>,
        supply: &mut FreshSupply,
    ) -> DcllTerm {
        match self {
            DcllTerm::Var { name } if name == target => replacement.clone(),
            DcllTerm::Var { .. } => self.clone(),
            DcllTerm::LinLam { var, ty, body } => {
                let (v, b) = Self::subst_binder(var, body, target, replacement, repl_fv, supply);
                DcllTerm::lin_lam(v, ty.clone(), b)
            }
            DcllTerm::NonLinLam { var, ty, body } => {
                let (v, b) = Self::subst_binder(var, body, target, replacement, repl_fv, supply);
                DcllTerm::nonlin_lam(v, ty.clone(), b)
            }
            DcllTerm::LinApp { fun, arg } => DcllTerm::lin_app(
                fun.subst_with(target, replacement, repl_fv, supply),
                arg.subst_with(target, replacement, repl_fv, supply),
            ),
            DcllTerm::NonLinApp { fun, arg } => DcllTerm::nonlin_app(
                fun.subst_with(target, replacement, repl_fv, supply),
                arg.subst_with(target, replacement, repl_fv, supply),
            ),
            DcllTerm::CElim { ty, body } => DcllTerm::c_elim(
                ty.clone(),
                body.subst_with(target, replacement, repl_fv, supply),
            ),
        }
    }

    /// Renders the term in concrete syntax that the parser accepts back.
    pub fn pretty(&self) -> String {
        let free = self.free_vars();
        let mut scope = DisplayScope::new(free.iter());
        let mut out = String::new();
        self.write(&mut out, &mut scope, Prec::Term);
        out
    }

    fn write(&self, out: &mut String, scope: &mut DisplayScope, prec: Prec) {
        match self {
            DcllTerm::Var { name } => out.push_str(&scope.lookup(name)),
            DcllTerm::LinLam { var, ty, body } | DcllTerm::NonLinLam { var, ty, body } => {
                let open = prec != Prec::Term;
                if open {
                    out.push('(');
                }
                out.push_str(if matches!(self, DcllTerm::LinLam { .. }) {
                    "\\"
                } else {
                    "\\\\"
                });
                let shown = scope.bind(var);
                out.push_str(&format!("{shown}:{ty}. "));
                body.write(out, scope, Prec::Term);
                scope.unbind(1);
                if open {
                    out.push(')');
                }
            }
            DcllTerm::LinApp { fun, arg } | DcllTerm::NonLinApp { fun, arg } => {
                let open = prec == Prec::Atom;
                if open {
                    out.push('(');
                }
                fun.write(out, scope, Prec::App);
                out.push_str(if matches!(self, DcllTerm::LinApp { .. }) {
                    " "
                } else {
                    " @ "
                });
                arg.write(out, scope, Prec::Atom);
                if open {
                    out.push(')');
                }
            }
            DcllTerm::CElim { ty, body } => {
                let open = prec == Prec::Atom;
                if open {
                    out.push('(');
                }
                out.push_str(&format!("C[{ty}] "));
                body.write(out, scope, Prec::Atom);
                if open {
                    out.push(')');
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Prec {
    Term,
    App,
    Atom,
}

impl fmt::Display for DcllTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pretty())
    }
}

impl Binding for DcllTerm {
    fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_fv(&mut Vec::new(), &mut out);
        out
    }

    fn subst(&self, var: &Name, replacement: &Self, supply: &mut FreshSupply) -> Self {
        let repl_fv = replacement.free_vars();
        self.subst_with(var, replacement, &repl_fv, supply)
    }

    fn alpha_eq(&self, other: &Self) -> bool {
        self.alpha_eq_in(other, &mut AlphaEnv::new())
    }
}
