//! The lambda calculus with cyclic sharing: strictly associative n-ary
//! products, tuple patterns, `let` sugar and mutually recursive `letrec`.

mod check;
mod desugar;
mod parse;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::kernel::{AlphaEnv, Binding, DisplayScope, FreshSupply, Name};

pub use check::{infer_type, typecheck_ltr, LtrContext, LtrTypeError};
pub use desugar::{desugar, is_core, pattern_projections};
pub use parse::{parse_ltr, parse_ltr_judgement, parse_ltr_type, LtrJudgement};

/// Types in canonical form: a `Prod` is never nested, never has exactly one
/// component, and contains no unit components; `Prod([])` is the unit `1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(tag = "kind", content = "args")]
pub enum LtrType {
    Base(String),
    Fun(Box<LtrType>, Box<LtrType>),
    Prod(Vec<LtrType>),
}

impl LtrType {
    pub fn base(name: &str) -> Self {
        LtrType::Base(name.to_string())
    }

    pub fn unit() -> Self {
        LtrType::Prod(Vec::new())
    }

    pub fn fun(arg: LtrType, res: LtrType) -> Self {
        LtrType::Fun(Box::new(arg), Box::new(res))
    }

    /// The canonical product of `components`: nested products are spliced,
    /// units dropped and a single survivor returned as is.
    pub fn product(components: impl IntoIterator<Item = LtrType>) -> Self {
        let mut flat = Vec::new();
        for c in components {
            match c {
                LtrType::Prod(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        if flat.len() == 1 {
            flat.pop().unwrap()
        } else {
            LtrType::Prod(flat)
        }
    }

    pub fn is_unit(&self) -> bool {
        matches!(self, LtrType::Prod(cs) if cs.is_empty())
    }

    /// Number of canonical components: 0 for the unit, 1 for a non-product.
    pub fn width(&self) -> usize {
        match self {
            LtrType::Prod(cs) => cs.len(),
            _ => 1,
        }
    }

    /// Canonical components (a non-product is its own single component).
    pub fn components(&self) -> Vec<LtrType> {
        match self {
            LtrType::Prod(cs) => cs.clone(),
            other => vec![other.clone()],
        }
    }

    /// Checks the flattened, unit-stripped invariant recursively.
    pub fn is_canonical(&self) -> bool {
        match self {
            LtrType::Base(_) => true,
            LtrType::Fun(a, r) => a.is_canonical() && r.is_canonical(),
            LtrType::Prod(cs) => {
                cs.len() != 1
                    && cs
                        .iter()
                        .all(|c| !matches!(c, LtrType::Prod(_)) && c.is_canonical())
            }
        }
    }

    pub fn contains_fun(&self) -> bool {
        match self {
            LtrType::Base(_) => false,
            LtrType::Fun(..) => true,
            LtrType::Prod(cs) => cs.iter().any(LtrType::contains_fun),
        }
    }
}

impl fmt::Display for LtrType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LtrType::Base(b) => write!(f, "{b}"),
            LtrType::Fun(a, r) => {
                if matches!(**a, LtrType::Fun(..)) {
                    write!(f, "({a}) => {r}")
                } else {
                    write!(f, "{a} => {r}")
                }
            }
            LtrType::Prod(cs) if cs.is_empty() => write!(f, "1"),
            LtrType::Prod(cs) => {
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        write!(f, " * ")?;
                    }
                    if matches!(c, LtrType::Fun(..)) {
                        write!(f, "({c})")?;
                    } else {
                        write!(f, "{c}")?;
                    }
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum Pattern {
    Var { name: Name, ty: LtrType },
    Tuple { items: Vec<Pattern> },
    Wild { ty: LtrType },
}

impl Pattern {
    pub fn var(name: Name, ty: LtrType) -> Self {
        Pattern::Var { name, ty }
    }

    /// Tuple pattern; a single component stands for itself.
    pub fn tuple(mut items: Vec<Pattern>) -> Self {
        if items.len() == 1 {
            items.pop().unwrap()
        } else {
            Pattern::Tuple { items }
        }
    }

    pub fn ty(&self) -> LtrType {
        match self {
            Pattern::Var { ty, .. } | Pattern::Wild { ty } => ty.clone(),
            Pattern::Tuple { items } => LtrType::product(items.iter().map(Pattern::ty)),
        }
    }

    /// Bound variables, left to right.
    pub fn vars(&self) -> Vec<(Name, LtrType)> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<(Name, LtrType)>) {
        match self {
            Pattern::Var { name, ty } => out.push((name.clone(), ty.clone())),
            Pattern::Wild { .. } => {}
            Pattern::Tuple { items } => items.iter().for_each(|p| p.collect_vars(out)),
        }
    }

    pub fn names(&self) -> Vec<Name> {
        self.vars().into_iter().map(|(n, _)| n).collect()
    }

    fn rename(&self, map: &BTreeMap<Name, Name>) -> Pattern {
        match self {
            Pattern::Var { name, ty } => Pattern::Var {
                name: map.get(name).cloned().unwrap_or_else(|| name.clone()),
                ty: ty.clone(),
            },
            Pattern::Wild { .. } => self.clone(),
            Pattern::Tuple { items } => Pattern::Tuple {
                items: items.iter().map(|p| p.rename(map)).collect(),
            },
        }
    }

    /// Structural equality with binders paired into `env`; returns the
    /// number of pairs pushed, or `None` on mismatch.
    fn alpha_bind(&self, other: &Pattern, env: &mut AlphaEnv) -> Option<usize> {
        match (self, other) {
            (Pattern::Var { name: a, ty: s }, Pattern::Var { name: b, ty: t }) if s == t => {
                env.push(a.clone(), b.clone());
                Some(1)
            }
            (Pattern::Wild { ty: s }, Pattern::Wild { ty: t }) if s == t => Some(0),
            (Pattern::Tuple { items: xs }, Pattern::Tuple { items: ys })
                if xs.len() == ys.len() =>
            {
                let mut pushed = 0;
                for (x, y) in xs.iter().zip(ys) {
                    match x.alpha_bind(y, env) {
                        Some(n) => pushed += n,
                        None => {
                            env.pop(pushed);
                            return None;
                        }
                    }
                }
                Some(pushed)
            }
            _ => None,
        }
    }

    fn write(&self, out: &mut String, scope: &mut DisplayScope) -> usize {
        match self {
            Pattern::Var { name, ty } => {
                let shown = scope.bind(name);
                out.push_str(&format!("{shown}:{ty}"));
                1
            }
            Pattern::Wild { ty } => {
                out.push_str(&format!("_:{ty}"));
                0
            }
            Pattern::Tuple { items } => {
                out.push('(');
                let mut bound = 0;
                for (i, p) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    bound += p.write(out, scope);
                }
                out.push(')');
                bound
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Decl {
    pub pat: Pattern,
    pub term: LtrTerm,
}

impl Decl {
    pub fn new(pat: Pattern, term: LtrTerm) -> Self {
        Decl { pat, term }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum LtrTerm {
    Var {
        name: Name,
    },
    Lam {
        pat: Pattern,
        body: Box<LtrTerm>,
    },
    App {
        fun: Box<LtrTerm>,
        arg: Box<LtrTerm>,
    },
    /// `(M₁, …, Mₙ)`; the empty tuple is `*`.
    Tuple {
        items: Vec<LtrTerm>,
    },
    /// `πᵢ M`, 1-based over the canonical components of `M`'s type.
    Proj {
        index: usize,
        tuple: Box<LtrTerm>,
    },
    Letrec {
        decls: Vec<Decl>,
        body: Box<LtrTerm>,
    },
    /// `let p = M in N`, sugar for `(\p. N) M`.
    Let {
        pat: Pattern,
        bound: Box<LtrTerm>,
        body: Box<LtrTerm>,
    },
}

impl LtrTerm {
    pub fn var(name: Name) -> Self {
        LtrTerm::Var { name }
    }

    pub fn lam(pat: Pattern, body: LtrTerm) -> Self {
        LtrTerm::Lam {
            pat,
            body: Box::new(body),
        }
    }

    pub fn app(fun: LtrTerm, arg: LtrTerm) -> Self {
        LtrTerm::App {
            fun: Box::new(fun),
            arg: Box::new(arg),
        }
    }

    pub fn tuple(items: Vec<LtrTerm>) -> Self {
        LtrTerm::Tuple { items }
    }

    /// Tuple that collapses a single component to itself.
    pub fn tuple_or_single(mut items: Vec<LtrTerm>) -> Self {
        if items.len() == 1 {
            items.pop().unwrap()
        } else {
            LtrTerm::Tuple { items }
        }
    }

    pub fn unit() -> Self {
        LtrTerm::Tuple { items: Vec::new() }
    }

    pub fn proj(index: usize, tuple: LtrTerm) -> Self {
        LtrTerm::Proj {
            index,
            tuple: Box::new(tuple),
        }
    }

    pub fn letrec(decls: Vec<Decl>, body: LtrTerm) -> Self {
        LtrTerm::Letrec {
            decls,
            body: Box::new(body),
        }
    }

    pub fn let_in(pat: Pattern, bound: LtrTerm, body: LtrTerm) -> Self {
        LtrTerm::Let {
            pat,
            bound: Box::new(bound),
            body: Box::new(body),
        }
    }

    /// Syntactic values: variables, abstractions, tuples of values, `*` and
    /// projections of values.
    pub fn is_value(&self) -> bool {
        match self {
            LtrTerm::Var { .. } | LtrTerm::Lam { .. } => true,
            LtrTerm::Tuple { items } => items.iter().all(LtrTerm::is_value),
            LtrTerm::Proj { tuple, .. } => tuple.is_value(),
            LtrTerm::App { .. } | LtrTerm::Letrec { .. } | LtrTerm::Let { .. } => false,
        }
    }

    pub fn contains_letrec(&self) -> bool {
        match self {
            LtrTerm::Letrec { .. } => true,
            _ => self.children().iter().any(|c| c.contains_letrec()),
        }
    }

    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    /// Direct subterms, left to right; paths index into this list.
    pub fn children(&self) -> Vec<&LtrTerm> {
        match self {
            LtrTerm::Var { .. } => vec![],
            LtrTerm::Lam { body, .. } => vec![body],
            LtrTerm::App { fun, arg } => vec![fun, arg],
            LtrTerm::Tuple { items } => items.iter().collect(),
            LtrTerm::Proj { tuple, .. } => vec![tuple],
            LtrTerm::Letrec { decls, body } => decls
                .iter()
                .map(|d| &d.term)
                .chain(std::iter::once(&**body))
                .collect(),
            LtrTerm::Let { bound, body, .. } => vec![bound, body],
        }
    }

    fn collect_fv(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
        match self {
            LtrTerm::Var { name } => {
                if !bound.contains(name) {
                    out.insert(name.clone());
                }
            }
            LtrTerm::Lam { pat, body } => {
                let names = pat.names();
                let n = names.len();
                bound.extend(names);
                body.collect_fv(bound, out);
                bound.truncate(bound.len() - n);
            }
            LtrTerm::Letrec { decls, body } => {
                let names: Vec<Name> = decls.iter().flat_map(|d| d.pat.names()).collect();
                let n = names.len();
                bound.extend(names);
                for d in decls {
                    d.term.collect_fv(bound, out);
                }
                body.collect_fv(bound, out);
                bound.truncate(bound.len() - n);
            }
            LtrTerm::Let {
                pat,
                bound: m,
                body,
            } => {
                m.collect_fv(bound, out);
                let names = pat.names();
                let n = names.len();
                bound.extend(names);
                body.collect_fv(bound, out);
                bound.truncate(bound.len() - n);
            }
            _ => {
                for c in self.children() {
                    c.collect_fv(bound, out);
                }
            }
        }
    }

    /// Number of free occurrences of `var`.
    pub fn occurrences(&self, var: &Name) -> usize {
        match self {
            LtrTerm::Var { name } => usize::from(name == var),
            LtrTerm::Lam { pat, body } => {
                if pat.names().contains(var) {
                    0
                } else {
                    body.occurrences(var)
                }
            }
            LtrTerm::Letrec { decls, body } => {
                if decls.iter().any(|d| d.pat.names().contains(var)) {
                    0
                } else {
                    decls.iter().map(|d| d.term.occurrences(var)).sum::<usize>()
                        + body.occurrences(var)
                }
            }
            LtrTerm::Let { pat, bound, body } => {
                bound.occurrences(var)
                    + if pat.names().contains(var) {
                        0
                    } else {
                        body.occurrences(var)
                    }
            }
            _ => self.children().iter().map(|c| c.occurrences(var)).sum(),
        }
    }

    /// Simultaneous capture-avoiding substitution.
    pub fn subst_many(&self, map: &BTreeMap<Name, LtrTerm>, supply: &mut FreshSupply) -> LtrTerm {
        if map.is_empty() {
            return self.clone();
        }
        let avoid: BTreeSet<Name> = map.values().flat_map(|t| t.free_vars()).collect();
        self.subst_in(map, &avoid, supply)
    }

    /// Removes keys shadowed by `binders` and renames binders that would
    /// capture a free variable of a replacement.
    fn enter_scope(
        map: &BTreeMap<Name, LtrTerm>,
        binders: &[Name],
        avoid: &BTreeSet<Name>,
        supply: &mut FreshSupply,
    ) -> (BTreeMap<Name, LtrTerm>, BTreeMap<Name, Name>) {
        let mut inner = map.clone();
        for b in binders {
            inner.remove(b);
        }
        let mut renames = BTreeMap::new();
        if !inner.is_empty() {
            for b in binders {
                if avoid.contains(b) {
                    let fresh = supply.refresh(b);
                    inner.insert(b.clone(), LtrTerm::var(fresh.clone()));
                    renames.insert(b.clone(), fresh);
                }
            }
        }
        (inner, renames)
    }

    fn subst_in(
        &self,
        map: &BTreeMap<Name, LtrTerm>,
        avoid: &BTreeSet<Name>,
        supply: &mut FreshSupply,
    ) -> LtrTerm {
        if map.is_empty() {
            return self.clone();
        }
        match self {
            LtrTerm::Var { name } => map.get(name).cloned().unwrap_or_else(|| self.clone()),
            LtrTerm::Lam { pat, body } => {
                let (inner, renames) = Self::enter_scope(map, &pat.names(), avoid, supply);
                LtrTerm::lam(pat.rename(&renames), body.subst_in(&inner, avoid, supply))
            }
            LtrTerm::App { fun, arg } => LtrTerm::app(
                fun.subst_in(map, avoid, supply),
                arg.subst_in(map, avoid, supply),
            ),
            LtrTerm::Tuple { items } => LtrTerm::tuple(
                items
                    .iter()
                    .map(|t| t.subst_in(map, avoid, supply))
                    .collect(),
            ),
            LtrTerm::Proj { index, tuple } => {
                LtrTerm::proj(*index, tuple.subst_in(map, avoid, supply))
            }
            LtrTerm::Letrec { decls, body } => {
                let names: Vec<Name> = decls.iter().flat_map(|d| d.pat.names()).collect();
                let (inner, renames) = Self::enter_scope(map, &names, avoid, supply);
                let decls = decls
                    .iter()
                    .map(|d| {
                        Decl::new(
                            d.pat.rename(&renames),
                            d.term.subst_in(&inner, avoid, supply),
                        )
                    })
                    .collect();
                LtrTerm::letrec(decls, body.subst_in(&inner, avoid, supply))
            }
            LtrTerm::Let { pat, bound, body } => {
                let bound = bound.subst_in(map, avoid, supply);
                let (inner, renames) = Self::enter_scope(map, &pat.names(), avoid, supply);
                LtrTerm::let_in(
                    pat.rename(&renames),
                    bound,
                    body.subst_in(&inner, avoid, supply),
                )
            }
        }
    }

    /// Renames every binder to a fresh name, so that copies of a term never
    /// share binder identities.
    pub fn refresh_binders(&self, supply: &mut FreshSupply) -> LtrTerm {
        self.refresh_in(&BTreeMap::new(), supply, None)
    }

    /// Renames binders to `v#1`, `v#2`, ... in traversal order, so that
    /// α-equivalent terms become structurally equal.
    pub fn canonical_binders(&self) -> LtrTerm {
        self.refresh_in(&BTreeMap::new(), &mut FreshSupply::new(), Some("v"))
    }

    fn refresh_in(
        &self,
        map: &BTreeMap<Name, Name>,
        supply: &mut FreshSupply,
        text: Option<&str>,
    ) -> LtrTerm {
        let fresh_for = |names: Vec<Name>, supply: &mut FreshSupply| {
            let mut inner = map.clone();
            let mut local = BTreeMap::new();
            for n in names {
                let f = match text {
                    Some(t) => supply.fresh(t),
                    None => supply.refresh(&n),
                };
                inner.insert(n.clone(), f.clone());
                local.insert(n, f);
            }
            (inner, local)
        };
        match self {
            LtrTerm::Var { name } => {
                LtrTerm::var(map.get(name).cloned().unwrap_or_else(|| name.clone()))
            }
            LtrTerm::Lam { pat, body } => {
                let (inner, local) = fresh_for(pat.names(), supply);
                LtrTerm::lam(pat.rename(&local), body.refresh_in(&inner, supply, text))
            }
            LtrTerm::App { fun, arg } => LtrTerm::app(
                fun.refresh_in(map, supply, text),
                arg.refresh_in(map, supply, text),
            ),
            LtrTerm::Tuple { items } => LtrTerm::tuple(
                items
                    .iter()
                    .map(|t| t.refresh_in(map, supply, text))
                    .collect(),
            ),
            LtrTerm::Proj { index, tuple } => {
                LtrTerm::proj(*index, tuple.refresh_in(map, supply, text))
            }
            LtrTerm::Letrec { decls, body } => {
                let names = decls.iter().flat_map(|d| d.pat.names()).collect();
                let (inner, local) = fresh_for(names, supply);
                let decls = decls
                    .iter()
                    .map(|d| {
                        Decl::new(
                            d.pat.rename(&local),
                            d.term.refresh_in(&inner, supply, text),
                        )
                    })
                    .collect();
                LtrTerm::letrec(decls, body.refresh_in(&inner, supply, text))
            }
            LtrTerm::Let { pat, bound, body } => {
                let bound = bound.refresh_in(map, supply, text);
                let (inner, local) = fresh_for(pat.names(), supply);
                LtrTerm::let_in(
                    pat.rename(&local),
                    bound,
                    body.refresh_in(&inner, supply, text),
                )
            }
        }
    }

    fn alpha_eq_in(&self, other: &LtrTerm, env: &mut AlphaEnv) -> bool {
        use LtrTerm::*;
        match (self, other) {
            (Var { name: a }, Var { name: b }) => env.vars_match(a, b),
            (Lam { pat: p, body: m }, Lam { pat: q, body: n }) => match p.alpha_bind(q, env) {
                Some(k) => {
                    let eq = m.alpha_eq_in(n, env);
                    env.pop(k);
                    eq
                }
                None => false,
            },
            (App { fun: f, arg: a }, App { fun: g, arg: b }) => {
                f.alpha_eq_in(g, env) && a.alpha_eq_in(b, env)
            }
            (Tuple { items: xs }, Tuple { items: ys }) => {
                xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| x.alpha_eq_in(y, env))
            }
            (Proj { index: i, tuple: m }, Proj { index: j, tuple: n }) => {
                i == j && m.alpha_eq_in(n, env)
            }
            (Letrec { decls: ds, body: m }, Letrec { decls: es, body: n }) => {
                if ds.len() != es.len() {
                    return false;
                }
                let mut pushed = 0;
                for (d, e) in ds.iter().zip(es) {
                    match d.pat.alpha_bind(&e.pat, env) {
                        Some(k) => pushed += k,
                        None => {
                            env.pop(pushed);
                            return false;
                        }
                    }
                }
                let eq = ds
                    .iter()
                    .zip(es)
                    .all(|(d, e)| d.term.alpha_eq_in(&e.term, env))
                    && m.alpha_eq_in(n, env);
                env.pop(pushed);
                eq
            }
            (
                Let {
                    pat: p,
                    bound: a,
                    body: m,
                },
                Let {
                    pat: q,
                    bound: b,
                    body: n,
                },
            ) => {
                if !a.alpha_eq_in(b, env) {
                    return false;
                }
                match p.alpha_bind(q, env) {
                    Some(k) => {
                        let eq = m.alpha_eq_in(n, env);
                        env.pop(k);
                        eq
                    }
                    None => false,
                }
            }
            _ => false,
        }
    }

    /// Concrete syntax accepted by [`parse_ltr`], with binders renamed where
    /// needed to keep the text unambiguous.
    pub fn pretty(&self) -> String {
        let free = self.free_vars();
        let mut scope = DisplayScope::new(free.iter());
        let mut out = String::new();
        self.write(&mut out, &mut scope, Prec::Term);
        out
    }

    fn write(&self, out: &mut String, scope: &mut DisplayScope, prec: Prec) {
        let open = |out: &mut String, needed: bool| {
            if needed {
                out.push('(');
            }
        };
        let close = |out: &mut String, needed: bool| {
            if needed {
                out.push(')');
            }
        };
        match self {
            LtrTerm::Var { name } => out.push_str(&scope.lookup(name)),
            LtrTerm::Lam { pat, body } => {
                let paren = prec != Prec::Term;
                open(out, paren);
                out.push('\\');
                let n = pat.write(out, scope);
                out.push_str(". ");
                body.write(out, scope, Prec::Term);
                scope.unbind(n);
                close(out, paren);
            }
            LtrTerm::App { fun, arg } => {
                let paren = prec == Prec::Atom;
                open(out, paren);
                fun.write(out, scope, Prec::App);
                out.push(' ');
                arg.write(out, scope, Prec::Atom);
                close(out, paren);
            }
            LtrTerm::Tuple { items } => {
                out.push('(');
                for (i, t) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    t.write(out, scope, Prec::Term);
                }
                if items.len() == 1 {
                    // a parenthesised single term is not a tuple
                    out.push(',');
                }
                out.push(')');
            }
            LtrTerm::Proj { index, tuple } => {
                let paren = prec == Prec::Atom;
                open(out, paren);
                out.push_str(&format!("pi{index} "));
                tuple.write(out, scope, Prec::Atom);
                close(out, paren);
            }
            LtrTerm::Letrec { decls, body } => {
                let paren = prec != Prec::Term;
                open(out, paren);
                out.push_str("letrec ");
                let mut bound = 0;
                let mut pats = Vec::new();
                for d in decls {
                    let mut p = String::new();
                    bound += d.pat.write(&mut p, scope);
                    pats.push(p);
                }
                for (i, (d, p)) in decls.iter().zip(pats).enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    out.push_str(&p);
                    out.push_str(" be ");
                    d.term.write(out, scope, Prec::Term);
                }
                out.push_str(" in ");
                body.write(out, scope, Prec::Term);
                scope.unbind(bound);
                close(out, paren);
            }
            LtrTerm::Let { pat, bound, body } => {
                let paren = prec != Prec::Term;
                open(out, paren);
                out.push_str("let ");
                let mut p = String::new();
                // the bound term is outside the pattern's scope
                let mut b = String::new();
                bound.write(&mut b, scope, Prec::Term);
                let n = pat.write(&mut p, scope);
                out.push_str(&p);
                out.push_str(" = ");
                out.push_str(&b);
                out.push_str(" in ");
                body.write(out, scope, Prec::Term);
                scope.unbind(n);
                close(out, paren);
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

impl fmt::Display for LtrTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pretty())
    }
}

impl Binding for LtrTerm {
    fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_fv(&mut Vec::new(), &mut out);
        out
    }

    fn subst(&self, var: &Name, replacement: &Self, supply: &mut FreshSupply) -> Self {
        let map = BTreeMap::from([(var.clone(), replacement.clone())]);
        self.subst_many(&map, supply)
    }

    fn alpha_eq(&self, other: &Self) -> bool {
        self.alpha_eq_in(other, &mut AlphaEnv::new())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{alpha_eq, fv, subst};

    fn b() -> LtrType {
        LtrType::base("b")
    }

    #[test]
    fn products_are_canonical() {
        let nested = LtrType::product([
            LtrType::product([b(), LtrType::unit()]),
            LtrType::product([b(), LtrType::base("c")]),
        ]);
        assert_eq!(nested, LtrType::Prod(vec![b(), b(), LtrType::base("c")]));
        assert_eq!(LtrType::product([LtrType::unit(), b()]), b());
        assert_eq!(LtrType::product([]), LtrType::unit());
        assert!(nested.is_canonical());
        assert!(!LtrType::Prod(vec![b()]).is_canonical());
        assert!(!LtrType::Prod(vec![b(), LtrType::Prod(vec![b(), b()])]).is_canonical());
    }

    #[test]
    fn type_display() {
        let t = LtrType::fun(
            LtrType::product([b(), LtrType::fun(b(), b())]),
            LtrType::unit(),
        );
        assert_eq!(t.to_string(), "b * (b => b) => 1");
    }

    #[test]
    fn letrec_binds_in_declarations_and_body() {
        // letrec x be f x in x
        let mut s = FreshSupply::new();
        let x = s.fresh("x");
        let f = Name::free("f");
        let t = LtrTerm::letrec(
            vec![Decl::new(
                Pattern::var(x.clone(), b()),
                LtrTerm::app(LtrTerm::var(f.clone()), LtrTerm::var(x.clone())),
            )],
            LtrTerm::var(x),
        );
        assert_eq!(fv(&t), BTreeSet::from([f]));
    }

    #[test]
    fn subst_skips_shadowed_letrec() {
        let mut s = FreshSupply::new();
        let x = s.fresh("x");
        let t = LtrTerm::letrec(
            vec![Decl::new(
                Pattern::var(x.clone(), b()),
                LtrTerm::var(x.clone()),
            )],
            LtrTerm::var(x.clone()),
        );
        let out = subst(&t, &Name::free("y"), &LtrTerm::unit(), &mut s);
        assert_eq!(out, t);
        let out = subst(&t, &x, &LtrTerm::unit(), &mut s);
        assert_eq!(out, t);
    }

    #[test]
    fn subst_renames_pattern_binders() {
        let mut s = FreshSupply::new();
        let y = s.fresh("y");
        let k = s.fresh("k");
        // \(y, k). (x, y, k) with x := y_free
        let yf = Name::free("y");
        let lam = LtrTerm::lam(
            Pattern::tuple(vec![
                Pattern::var(y.clone(), b()),
                Pattern::var(k.clone(), b()),
            ]),
            LtrTerm::tuple(vec![
                LtrTerm::var(Name::free("x")),
                LtrTerm::var(y.clone()),
                LtrTerm::var(k),
            ]),
        );
        // no capture possible: bound y has a uid, free y has none
        let out = subst(&lam, &Name::free("x"), &LtrTerm::var(yf.clone()), &mut s);
        assert!(fv(&out).contains(&yf));
        // force a capture: substitute the bound name itself as a free variable
        let out = subst(&lam, &Name::free("x"), &LtrTerm::var(y.clone()), &mut s);
        assert!(fv(&out).contains(&y));
        assert_eq!(out.occurrences(&y), 1);
    }

    #[test]
    fn alpha_eq_letrec() {
        let mut s = FreshSupply::new();
        let (x, z) = (s.fresh("x"), s.fresh("z"));
        let m = LtrTerm::var(Name::free("m"));
        let t1 = LtrTerm::letrec(
            vec![Decl::new(Pattern::var(x.clone(), b()), m.clone())],
            LtrTerm::var(x),
        );
        let t2 = LtrTerm::letrec(
            vec![Decl::new(Pattern::var(z.clone(), b()), m)],
            LtrTerm::var(z),
        );
        assert!(alpha_eq(&t1, &t2));
    }

    #[test]
    fn values() {
        let x = LtrTerm::var(Name::free("x"));
        assert!(LtrTerm::tuple(vec![x.clone(), LtrTerm::proj(1, x.clone())]).is_value());
        assert!(!LtrTerm::tuple(vec![LtrTerm::app(x.clone(), x.clone())]).is_value());
        assert!(LtrTerm::unit().is_value());
    }
}
