use std::collections::{BTreeMap, BTreeSet};

use super::{Normalized, RewriteConfig, RewriteError};
use crate::kernel::{path_string, Binding, FreshSupply, Name};
use crate::letrec::{desugar, infer_type, Decl, LtrContext, LtrTerm, LtrType, Pattern};

/// Normalizes a well-typed term under `ctx`. The input is desugared first;
/// the result has every `letrec` in canonical declaration order.
pub fn normalize_ltr(
    ctx: &[(Name, LtrType)],
    term: &LtrTerm,
    cfg: &RewriteConfig,
    supply: &mut FreshSupply,
) -> Result<Normalized<LtrTerm>, RewriteError> {
    let core = desugar(term, supply);
    let mut env = ctx.to_vec();
    infer_type(&mut env, &core, &mut Vec::new())
        .map_err(|e| RewriteError::IllTyped(e.to_string()))?;
    let mut n = Normalizer {
        cfg,
        supply,
        env,
        steps: 0,
        exhausted: false,
        trace: Vec::new(),
    };
    let out = n.norm(core, &mut Vec::new())?;
    Ok(Normalized {
        term: canonicalize_decls(&out),
        steps: n.steps,
        exhausted: n.exhausted,
        trace: n.trace,
    })
}

type Step = Option<(&'static str, LtrTerm)>;

struct Normalizer<'a> {
    cfg: &'a RewriteConfig,
    supply: &'a mut FreshSupply,
    env: LtrContext,
    steps: usize,
    exhausted: bool,
    trace: Vec<String>,
}

impl Normalizer<'_> {
    fn norm(&mut self, mut t: LtrTerm, path: &mut Vec<usize>) -> Result<LtrTerm, RewriteError> {
        loop {
            t = self.norm_children(t, path)?;
            if self.exhausted {
                return Ok(t);
            }
            let Some((rule, next)) = self.rewrite_root(&t)? else {
                return Ok(t);
            };
            if self.steps >= self.cfg.max_steps {
                self.exhausted = true;
                return Ok(t);
            }
            self.steps += 1;
            if self.cfg.trace {
                self.trace.push(format!("{rule} @ {}", path_string(path)));
                self.check_preserved(rule, path, &t, &next)?;
            }
            t = next;
        }
    }

    fn at(&mut self, i: usize, t: LtrTerm, path: &mut Vec<usize>) -> Result<LtrTerm, RewriteError> {
        path.push(i);
        let r = self.norm(t, path);
        path.pop();
        r
    }

    fn norm_children(
        &mut self,
        t: LtrTerm,
        path: &mut Vec<usize>,
    ) -> Result<LtrTerm, RewriteError> {
        Ok(match t {
            LtrTerm::Var { .. } => t,
            LtrTerm::Lam { pat, body } => {
                let n = self.bind(&pat);
                let body = self.at(0, *body, path);
                self.unbind(n);
                LtrTerm::lam(pat, body?)
            }
            LtrTerm::App { fun, arg } => {
                let fun = self.at(0, *fun, path)?;
                LtrTerm::app(fun, self.at(1, *arg, path)?)
            }
            LtrTerm::Tuple { items } => {
                let mut out = Vec::with_capacity(items.len());
                for (i, item) in items.into_iter().enumerate() {
                    out.push(self.at(i, item, path)?);
                }
                LtrTerm::tuple(out)
            }
            LtrTerm::Proj { index, tuple } => LtrTerm::proj(index, self.at(0, *tuple, path)?),
            LtrTerm::Letrec { decls, body } => {
                let n: usize = decls.iter().map(|d| self.bind(&d.pat)).sum();
                let count = decls.len();
                let result = (|| {
                    let mut out = Vec::with_capacity(count);
                    for (i, d) in decls.into_iter().enumerate() {
                        out.push(Decl::new(d.pat, self.at(i, d.term, path)?));
                    }
                    Ok(LtrTerm::letrec(out, self.at(count, *body, path)?))
                })();
                self.unbind(n);
                result?
            }
            LtrTerm::Let { pat, bound, body } => {
                let bound = self.at(0, *bound, path)?;
                let n = self.bind(&pat);
                let body = self.at(1, *body, path);
                self.unbind(n);
                LtrTerm::let_in(pat, bound, body?)
            }
        })
    }

    fn bind(&mut self, pat: &Pattern) -> usize {
        let vars = pat.vars();
        let n = vars.len();
        self.env.extend(vars);
        n
    }

    fn unbind(&mut self, n: usize) {
        self.env.truncate(self.env.len() - n);
    }

    fn lookup(&self, name: &Name) -> Option<&LtrType> {
        self.env
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, t)| t)
    }

    fn type_of(&self, t: &LtrTerm) -> Result<LtrType, RewriteError> {
        infer_type(&mut self.env.clone(), t, &mut Vec::new())
            .map_err(|e| RewriteError::IllTyped(e.to_string()))
    }

    fn check_preserved(
        &self,
        rule: &str,
        path: &[usize],
        before: &LtrTerm,
        after: &LtrTerm,
    ) -> Result<(), RewriteError> {
        let b = self.type_of(before)?;
        let a = self.type_of(after);
        match a {
            Ok(a) if a == b => Ok(()),
            other => Err(RewriteError::TypeNotPreserved {
                rule: rule.to_string(),
                path: path_string(path),
                before: b.to_string(),
                after: match other {
                    Ok(a) => a.to_string(),
                    Err(e) => e.to_string(),
                },
            }),
        }
    }

    /// Number of canonical components of a value.
    fn width(&self, v: &LtrTerm) -> Result<usize, RewriteError> {
        Ok(match v {
            LtrTerm::Lam { .. } | LtrTerm::Proj { .. } => 1,
            LtrTerm::Tuple { items } => {
                let mut w = 0;
                for i in items {
                    w += self.width(i)?;
                }
                w
            }
            LtrTerm::Var { name } => match self.lookup(name) {
                Some(t) => t.width(),
                None => return Err(RewriteError::IllTyped(format!("unbound variable `{name}`"))),
            },
            other => self.type_of(other)?.width(),
        })
    }

    fn rewrite_root(&mut self, t: &LtrTerm) -> Result<Step, RewriteError> {
        match t {
            LtrTerm::Var { name } => Ok(match self.lookup(name) {
                Some(ty) if ty.is_unit() => Some(("beta-unit", LtrTerm::unit())),
                _ => None,
            }),
            LtrTerm::Lam { pat, body } => Ok(eta_fun(pat, body)),
            LtrTerm::App { fun, arg } => self.rewrite_app(fun, arg),
            LtrTerm::Tuple { items } => self.rewrite_tuple(items),
            LtrTerm::Proj { index, tuple } => self.rewrite_proj(*index, tuple),
            LtrTerm::Letrec { decls, body } => Ok(self.rewrite_letrec(decls, body)),
            LtrTerm::Let { .. } => Ok(None),
        }
    }

    fn rewrite_app(&mut self, fun: &LtrTerm, arg: &LtrTerm) -> Result<Step, RewriteError> {
        if let LtrTerm::Letrec { decls, body } = fun {
            let (decls, body) = self.hoistable(decls, body, &[arg]);
            return Ok(Some((
                "comm-letrec",
                LtrTerm::letrec(decls, LtrTerm::app(body, arg.clone())),
            )));
        }
        if let LtrTerm::Letrec { decls, body } = arg {
            let (decls, body) = self.hoistable(decls, body, &[fun]);
            return Ok(Some((
                "comm-letrec",
                LtrTerm::letrec(decls, LtrTerm::app(fun.clone(), body)),
            )));
        }
        if let LtrTerm::Lam {
            pat: Pattern::Var { name, ty },
            body,
        } = fun
        {
            if arg.is_value() {
                let map = BTreeMap::from([(name.clone(), arg.clone())]);
                return Ok(Some(("beta-fun", body.subst_many(&map, self.supply))));
            }
            let (x, body) = if arg.free_vars().contains(name) {
                let fresh = self.supply.refresh(name);
                let map = BTreeMap::from([(name.clone(), LtrTerm::var(fresh.clone()))]);
                (fresh, body.subst_many(&map, self.supply))
            } else {
                (name.clone(), (**body).clone())
            };
            let decl = Decl::new(Pattern::var(x, ty.clone()), arg.clone());
            return Ok(Some(("letify", LtrTerm::letrec(vec![decl], body))));
        }
        if !fun.is_value() {
            let (w, decl) = self.name(fun)?;
            return Ok(Some((
                "comm-let",
                LtrTerm::letrec(vec![decl], LtrTerm::app(w, arg.clone())),
            )));
        }
        if !arg.is_value() {
            let (w, decl) = self.name(arg)?;
            return Ok(Some((
                "comm-let",
                LtrTerm::letrec(vec![decl], LtrTerm::app(fun.clone(), w)),
            )));
        }
        Ok(None)
    }

    fn rewrite_tuple(&mut self, items: &[LtrTerm]) -> Result<Step, RewriteError> {
        if items.len() == 1 || items.iter().any(|i| matches!(i, LtrTerm::Tuple { .. })) {
            let mut flat = Vec::new();
            for i in items {
                match i {
                    LtrTerm::Tuple { items } => flat.extend(items.iter().cloned()),
                    other => flat.push(other.clone()),
                }
            }
            return Ok(Some(("tuple-assoc", LtrTerm::tuple_or_single(flat))));
        }
        if let Some(pos) = items
            .iter()
            .position(|i| matches!(i, LtrTerm::Letrec { .. }))
        {
            let LtrTerm::Letrec { decls, body } = &items[pos] else {
                unreachable!()
            };
            let siblings: Vec<&LtrTerm> = items
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != pos)
                .map(|(_, t)| t)
                .collect();
            let (decls, body) = self.hoistable(decls, body, &siblings);
            let mut out = items.to_vec();
            out[pos] = body;
            return Ok(Some((
                "comm-letrec",
                LtrTerm::letrec(decls, LtrTerm::tuple(out)),
            )));
        }
        if let Some(pos) = items.iter().position(|i| !i.is_value()) {
            let (w, decl) = self.name(&items[pos])?;
            let mut out = items.to_vec();
            out[pos] = w;
            return Ok(Some((
                "comm-let",
                LtrTerm::letrec(vec![decl], LtrTerm::tuple(out)),
            )));
        }
        for j in 0..items.len() {
            let LtrTerm::Proj { index: 1, tuple: v } = &items[j] else {
                continue;
            };
            let w = self.width(v)?;
            if w < 2 || j + w > items.len() {
                continue;
            }
            let run = (0..w).all(|k| {
                matches!(&items[j + k], LtrTerm::Proj { index, tuple } if *index == k + 1 && tuple.alpha_eq(v))
            });
            if run {
                let mut out = items[..j].to_vec();
                out.push((**v).clone());
                out.extend(items[j + w..].iter().cloned());
                return Ok(Some(("eta-prod", LtrTerm::tuple_or_single(out))));
            }
        }
        Ok(None)
    }

    fn rewrite_proj(&mut self, index: usize, tuple: &LtrTerm) -> Result<Step, RewriteError> {
        let LtrTerm::Tuple { items } = tuple else {
            return Ok(None);
        };
        if !items.iter().all(LtrTerm::is_value) {
            return Ok(None);
        }
        let mut offset = 0;
        for item in items {
            let w = self.width(item)?;
            if index > offset && index <= offset + w {
                let out = if w == 1 {
                    item.clone()
                } else {
                    LtrTerm::proj(index - offset, item.clone())
                };
                return Ok(Some(("beta-prod", out)));
            }
            offset += w;
        }
        Ok(None)
    }

    fn rewrite_letrec(&mut self, decls: &[Decl], body: &LtrTerm) -> Step {
        if let LtrTerm::Letrec {
            decls: inner,
            body: m,
        } = body
        {
            let mut guard: Vec<&LtrTerm> = decls.iter().map(|d| &d.term).collect();
            let outer_names: BTreeSet<Name> = decls.iter().flat_map(|d| d.pat.names()).collect();
            let placeholder: Vec<LtrTerm> = outer_names.iter().cloned().map(LtrTerm::var).collect();
            guard.extend(placeholder.iter());
            let (inner, m) = self.hoistable(inner, m, &guard);
            let mut all = decls.to_vec();
            all.extend(inner);
            return Some(("assoc2", LtrTerm::letrec(all, m)));
        }
        if let Some(pos) = decls
            .iter()
            .position(|d| matches!(d.term, LtrTerm::Letrec { .. }))
        {
            let LtrTerm::Letrec {
                decls: inner,
                body: m,
            } = &decls[pos].term
            else {
                unreachable!()
            };
            let outer_names: BTreeSet<Name> = decls.iter().flat_map(|d| d.pat.names()).collect();
            let placeholder: Vec<LtrTerm> = outer_names.iter().cloned().map(LtrTerm::var).collect();
            let mut guard: Vec<&LtrTerm> = decls
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != pos)
                .map(|(_, d)| &d.term)
                .collect();
            guard.push(body);
            guard.extend(placeholder.iter());
            let (inner, m) = self.hoistable(inner, m, &guard);
            let mut all = decls[..pos].to_vec();
            all.extend(inner);
            all.push(Decl::new(decls[pos].pat.clone(), m));
            all.extend(decls[pos + 1..].iter().cloned());
            return Some(("assoc1", LtrTerm::letrec(all, body.clone())));
        }
        for (i, d) in decls.iter().enumerate() {
            let Pattern::Var { name, .. } = &d.pat else {
                continue;
            };
            if !d.term.is_value() || d.term.free_vars().contains(name) {
                continue;
            }
            let map = BTreeMap::from([(name.clone(), d.term.clone())]);
            let rest: Vec<Decl> = decls
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, e)| Decl::new(e.pat.clone(), e.term.subst_many(&map, self.supply)))
                .collect();
            let body = body.subst_many(&map, self.supply);
            let out = if rest.is_empty() {
                body
            } else {
                LtrTerm::letrec(rest, body)
            };
            return Some(("sigma1", out));
        }
        if let LtrTerm::Var { name } = body {
            let found = decls
                .iter()
                .position(|d| matches!(&d.pat, Pattern::Var { name: n, .. } if n == name));
            if let Some(i) = found {
                let used_elsewhere = decls.iter().any(|d| d.term.free_vars().contains(name));
                if !used_elsewhere {
                    let rest: Vec<Decl> = decls
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != i)
                        .map(|(_, d)| d.clone())
                        .collect();
                    let a = decls[i].term.clone();
                    let out = if rest.is_empty() {
                        a
                    } else {
                        LtrTerm::letrec(rest, a)
                    };
                    return Some(("tail", out));
                }
            }
        }
        None
    }

    /// A fresh variable bound to `t` by a one-declaration `letrec`.
    fn name(&mut self, t: &LtrTerm) -> Result<(LtrTerm, Decl), RewriteError> {
        let ty = self.type_of(t)?;
        let w = self.supply.fresh("w");
        Ok((
            LtrTerm::var(w.clone()),
            Decl::new(Pattern::var(w, ty), t.clone()),
        ))
    }

    /// Renames the declared names when moving them outward would capture a
    /// free variable of `siblings`.
    fn hoistable(
        &mut self,
        decls: &[Decl],
        body: &LtrTerm,
        siblings: &[&LtrTerm],
    ) -> (Vec<Decl>, LtrTerm) {
        let names: Vec<Name> = decls.iter().flat_map(|d| d.pat.names()).collect();
        let free: BTreeSet<Name> = siblings.iter().flat_map(|s| s.free_vars()).collect();
        if !names.iter().any(|n| free.contains(n)) {
            return (decls.to_vec(), body.clone());
        }
        let renames: BTreeMap<Name, Name> = names
            .iter()
            .map(|n| (n.clone(), self.supply.refresh(n)))
            .collect();
        let map: BTreeMap<Name, LtrTerm> = renames
            .iter()
            .map(|(k, v)| (k.clone(), LtrTerm::var(v.clone())))
            .collect();
        let decls = decls
            .iter()
            .map(|d| {
                Decl::new(
                    rename_pattern(&d.pat, &renames),
                    d.term.subst_many(&map, self.supply),
                )
            })
            .collect();
        (decls, body.subst_many(&map, self.supply))
    }
}

fn rename_pattern(p: &Pattern, renames: &BTreeMap<Name, Name>) -> Pattern {
    match p {
        Pattern::Var { name, ty } => Pattern::var(
            renames.get(name).cloned().unwrap_or_else(|| name.clone()),
            ty.clone(),
        ),
        Pattern::Wild { .. } => p.clone(),
        Pattern::Tuple { items } => Pattern::Tuple {
            items: items.iter().map(|q| rename_pattern(q, renames)).collect(),
        },
    }
}

/// `λx. V x → V` and, for a unit-typed `x` already replaced by `*`,
/// `λx. V * → V`.
fn eta_fun(pat: &Pattern, body: &LtrTerm) -> Step {
    let Pattern::Var { name, ty } = pat else {
        return None;
    };
    let LtrTerm::App { fun, arg } = body else {
        return None;
    };
    let matches_arg = match &**arg {
        LtrTerm::Var { name: n } => n == name,
        LtrTerm::Tuple { items } => items.is_empty() && ty.is_unit(),
        _ => false,
    };
    if matches_arg && fun.is_value() && !fun.free_vars().contains(name) {
        Some(("eta-fun", (**fun).clone()))
    } else {
        None
    }
}

/// Sorts the declarations of every `letrec`: dependencies first (mutually
/// recursive groups kept together), ties broken by a name-insensitive key.
pub fn canonicalize_decls(t: &LtrTerm) -> LtrTerm {
    match t {
        LtrTerm::Var { .. } => t.clone(),
        LtrTerm::Lam { pat, body } => LtrTerm::lam(pat.clone(), canonicalize_decls(body)),
        LtrTerm::App { fun, arg } => LtrTerm::app(canonicalize_decls(fun), canonicalize_decls(arg)),
        LtrTerm::Tuple { items } => LtrTerm::tuple(items.iter().map(canonicalize_decls).collect()),
        LtrTerm::Proj { index, tuple } => LtrTerm::proj(*index, canonicalize_decls(tuple)),
        LtrTerm::Let { pat, bound, body } => LtrTerm::let_in(
            pat.clone(),
            canonicalize_decls(bound),
            canonicalize_decls(body),
        ),
        LtrTerm::Letrec { decls, body } => {
            let decls: Vec<Decl> = decls
                .iter()
                .map(|d| Decl::new(d.pat.clone(), canonicalize_decls(&d.term)))
                .collect();
            LtrTerm::letrec(order_decls(decls), canonicalize_decls(body))
        }
    }
}

fn order_decls(decls: Vec<Decl>) -> Vec<Decl> {
    let n = decls.len();
    let names: Vec<BTreeSet<Name>> = decls
        .iter()
        .map(|d| d.pat.names().into_iter().collect())
        .collect();
    let fvs: Vec<BTreeSet<Name>> = decls.iter().map(|d| d.term.free_vars()).collect();
    let keys: Vec<String> = decls.iter().map(decl_key).collect();
    // reach[i][j]: declaration i depends, possibly transitively, on j
    let mut reach = vec![vec![false; n]; n];
    for i in 0..n {
        for j in 0..n {
            reach[i][j] = !names[j].is_disjoint(&fvs[i]);
        }
    }
    for k in 0..n {
        let via = reach[k].clone();
        for row in reach.iter_mut().filter(|row| row[k]) {
            for (cell, &hop) in row.iter_mut().zip(&via) {
                *cell |= hop;
            }
        }
    }
    let same_group = |i: usize, j: usize| i == j || (reach[i][j] && reach[j][i]);
    let mut placed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        let ready: Vec<usize> = (0..n)
            .filter(|&i| !placed[i])
            .filter(|&i| (0..n).all(|j| placed[j] || same_group(i, j) || !reach[i][j]))
            .collect();
        let pick = *ready
            .iter()
            .min_by(|&&a, &&b| keys[a].cmp(&keys[b]).then(a.cmp(&b)))
            .expect("dependency groups form a DAG");
        let mut group: Vec<usize> = (0..n)
            .filter(|&j| !placed[j] && same_group(pick, j))
            .collect();
        group.sort_by(|&a, &b| keys[a].cmp(&keys[b]).then(a.cmp(&b)));
        for j in group {
            placed[j] = true;
            order.push(j);
        }
    }
    let mut slots: Vec<Option<Decl>> = decls.into_iter().map(Some).collect();
    order
        .into_iter()
        .map(|i| slots[i].take().unwrap())
        .collect()
}

fn decl_key(d: &Decl) -> String {
    let mut out = String::new();
    write_pattern_key(&d.pat, &mut out);
    out.push_str(" be ");
    write_key(&d.term, &mut out);
    out
}

/// Rendering in which generated names are erased; used only for ordering.
pub fn ltr_key(t: &LtrTerm) -> String {
    let mut out = String::new();
    write_key(t, &mut out);
    out
}

fn write_pattern_key(p: &Pattern, out: &mut String) {
    match p {
        Pattern::Var { ty, .. } | Pattern::Wild { ty } => out.push_str(&format!("_:{ty}")),
        Pattern::Tuple { items } => {
            out.push('(');
            for i in items {
                write_pattern_key(i, out);
                out.push(',');
            }
            out.push(')');
        }
    }
}

fn write_key(t: &LtrTerm, out: &mut String) {
    match t {
        LtrTerm::Var { name } => {
            if name.is_generated() {
                out.push('_');
            } else {
                out.push_str(name.text());
            }
        }
        LtrTerm::Lam { pat, body } => {
            out.push('\\');
            write_pattern_key(pat, out);
            out.push('.');
            write_key(body, out);
        }
        LtrTerm::App { fun, arg } => {
            out.push('(');
            write_key(fun, out);
            out.push(' ');
            write_key(arg, out);
            out.push(')');
        }
        LtrTerm::Tuple { items } => {
            out.push('<');
            for i in items {
                write_key(i, out);
                out.push(',');
            }
            out.push('>');
        }
        LtrTerm::Proj { index, tuple } => {
            out.push_str(&format!("pi{index}("));
            write_key(tuple, out);
            out.push(')');
        }
        LtrTerm::Letrec { decls, body } => {
            out.push_str("letrec{");
            for d in decls {
                out.push_str(&decl_key(d));
                out.push(';');
            }
            out.push('}');
            write_key(body, out);
        }
        LtrTerm::Let { pat, bound, body } => {
            out.push_str("let{");
            write_pattern_key(pat, out);
            out.push('=');
            write_key(bound, out);
            out.push('}');
            write_key(body, out);
        }
    }
}
