//! Seeded, type-directed generation of well-typed DCLL judgements.
//!
//! Terms are built top-down against a target type. Linear variables bound by
//! an enclosing `\` are passed down as an obligation list that must be
//! consumed exactly once, and every leaf that is not such a variable
//! introduces a fresh free variable into `Γ` or `Δ`, so the produced context
//! is exactly what the term needs.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dcll::{typecheck_dcll, DcllTerm, DcllType, DualContext, Rule, TypedDcll};
use crate::kernel::{FreshSupply, Name};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fragment {
    /// Every construct.
    Full,
    /// Non-linear variables, `\\` and `@` over `->`-types.
    Pure,
    /// Linear variables, `\` and application over `-o`-types, empty `Γ`.
    Linear,
}

#[derive(Debug, Clone)]
pub struct GenConfig {
    pub fragment: Fragment,
    /// Maximum height of the term tree (a variable has height 0).
    pub max_depth: usize,
    pub bases: Vec<String>,
    /// Maximum number of constructors in an invented type.
    pub max_type_size: usize,
}

impl GenConfig {
    pub fn new(fragment: Fragment) -> Self {
        GenConfig {
            fragment,
            max_depth: 6,
            bases: vec!["a".into(), "b".into()],
            max_type_size: 3,
        }
    }
}

/// A generated judgement `Γ ; Δ ⊢ term : ty` with its derivation and the
/// supply to continue drawing names from.
#[derive(Debug, Clone)]
pub struct Generated {
    pub typed: TypedDcll,
    pub supply: FreshSupply,
}

impl Generated {
    pub fn judgement(&self) -> String {
        let ctx = &self.typed.ctx;
        let show = |es: &[(Name, DcllType)]| {
            es.iter()
                .map(|(n, t)| format!("{n}:{t}"))
                .collect::<Vec<_>>()
                .join(", ")
        };
        format!(
            "{} ; {} |- {}",
            show(&ctx.gamma),
            show(&ctx.delta),
            self.typed.term
        )
    }
}

/// Rule counters accumulated over many derivations.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Coverage(pub BTreeMap<Rule, usize>);

impl Coverage {
    pub fn add(&mut self, typed: &TypedDcll) {
        for (r, n) in typed.rule_counts() {
            *self.0.entry(r).or_insert(0) += n;
        }
    }

    pub fn missing(&self) -> Vec<Rule> {
        Rule::ALL
            .iter()
            .copied()
            .filter(|r| self.0.get(r).copied().unwrap_or(0) == 0)
            .collect()
    }
}

pub fn height(t: &DcllTerm) -> usize {
    t.children()
        .into_iter()
        .map(|c| 1 + height(c))
        .max()
        .unwrap_or(0)
}

pub struct Generator {
    cfg: GenConfig,
    rng: ChaCha8Rng,
}

impl Generator {
    pub fn new(seed: u64, cfg: GenConfig) -> Self {
        Generator {
            cfg,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// A well-typed judgement of a random type.
    pub fn judgement(&mut self) -> Generated {
        loop {
            let ty = self.ty(self.cfg.max_type_size);
            if let Some(g) = self.attempt(&ty, false) {
                return g;
            }
        }
    }

    /// A judgement whose term is an application (linear in the linear and
    /// full fragments, non-linear in the pure one).
    pub fn application(&mut self) -> Generated {
        loop {
            let ty = self.ty(self.cfg.max_type_size);
            if let Some(g) = self.attempt(&ty, true) {
                return g;
            }
        }
    }

    fn attempt(&mut self, ty: &DcllType, app_root: bool) -> Option<Generated> {
        let mut st = State::default();
        let term = {
            let mut b = Builder {
                gen: self,
                st: &mut st,
            };
            if app_root {
                b.application(ty, Vec::new(), true, b.gen.cfg.max_depth)?
            } else {
                b.term(ty, Vec::new(), true, b.gen.cfg.max_depth)?
            }
        };
        let mut delta = st.delta;
        delta.shuffle(&mut self.rng);
        let ctx = DualContext::new(st.gamma, delta).ok()?;
        let typed = typecheck_dcll(&ctx, &term).expect("generator produces well-typed terms");
        Some(Generated {
            typed,
            supply: st.supply,
        })
    }

    fn ty(&mut self, size: usize) -> DcllType {
        let base = |g: &mut Self| {
            let i = g.rng.gen_range(0..g.cfg.bases.len());
            DcllType::base(&g.cfg.bases[i])
        };
        if size <= 1 || self.rng.gen_bool(0.4) {
            return match self.cfg.fragment {
                Fragment::Full if self.rng.gen_bool(0.15) => DcllType::Bottom,
                _ => base(self),
            };
        }
        let left = self.rng.gen_range(1..size);
        let (a, r) = (self.ty(left), self.ty(size - left));
        match self.cfg.fragment {
            Fragment::Pure => DcllType::arrow(a, r),
            Fragment::Linear => DcllType::lolli(a, r),
            Fragment::Full => {
                if self.rng.gen_bool(0.5) {
                    DcllType::lolli(a, r)
                } else {
                    DcllType::arrow(a, r)
                }
            }
        }
    }
}

#[derive(Default)]
struct State {
    gamma: Vec<(Name, DcllType)>,
    delta: Vec<(Name, DcllType)>,
    /// Non-linear variables bound by an enclosing `\\`.
    bound: Vec<(Name, DcllType)>,
    supply: FreshSupply,
}

struct Builder<'a> {
    gen: &'a mut Generator,
    st: &'a mut State,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Choice {
    Leaf,
    Intro,
    LinApp,
    NonLinApp,
    Duality,
}

impl Builder<'_> {
    /// A term of type `ty` using each of `must` exactly once; `linear`
    /// allows fresh free linear variables.
    fn term(
        &mut self,
        ty: &DcllType,
        must: Vec<(Name, DcllType)>,
        linear: bool,
        depth: usize,
    ) -> Option<DcllTerm> {
        if must.len() == 1 && must[0].1 == *ty && (depth == 0 || self.gen.rng.gen_bool(0.5)) {
            return Some(DcllTerm::var(must[0].0.clone()));
        }
        if depth == 0 {
            return must.is_empty().then(|| self.leaf(ty, linear));
        }
        let frag = self.gen.cfg.fragment;
        let mut options = Vec::new();
        if must.is_empty() {
            options.push((Choice::Leaf, if depth <= 2 { 4 } else { 1 }));
        }
        match ty {
            DcllType::Lolli(..) | DcllType::Arrow(..) => options.push((Choice::Intro, 4)),
            _ => {}
        }
        if frag != Fragment::Pure {
            options.push((Choice::LinApp, 3));
        }
        if frag != Fragment::Linear {
            options.push((Choice::NonLinApp, 3));
        }
        if frag == Fragment::Full && depth >= 2 {
            options.push((Choice::Duality, 1));
        }
        let choice = options.choose_weighted(&mut self.gen.rng, |o| o.1).ok()?.0;
        match choice {
            Choice::Leaf => Some(self.leaf(ty, linear)),
            Choice::Intro => self.intro(ty, must, linear, depth),
            Choice::LinApp => self.lin_app(ty, must, linear, depth),
            Choice::NonLinApp => self.nonlin_app(ty, must, linear, depth),
            Choice::Duality => {
                let body = self.term(&ty.clone().double_negation(), must, linear, depth - 1)?;
                Some(DcllTerm::c_elim(ty.clone(), body))
            }
        }
    }

    fn application(
        &mut self,
        ty: &DcllType,
        must: Vec<(Name, DcllType)>,
        linear: bool,
        depth: usize,
    ) -> Option<DcllTerm> {
        if self.gen.cfg.fragment == Fragment::Pure {
            self.nonlin_app(ty, must, linear, depth)
        } else {
            self.lin_app(ty, must, linear, depth)
        }
    }

    fn leaf(&mut self, ty: &DcllType, linear: bool) -> DcllTerm {
        let frag = self.gen.cfg.fragment;
        let reusable: Vec<Name> = self
            .st
            .bound
            .iter()
            .chain(self.st.gamma.iter())
            .filter(|(_, t)| t == ty)
            .map(|(n, _)| n.clone())
            .collect();
        if frag != Fragment::Linear && !reusable.is_empty() && self.gen.rng.gen_bool(0.6) {
            return DcllTerm::var(reusable.choose(&mut self.gen.rng).unwrap().clone());
        }
        let make_linear = match frag {
            Fragment::Linear => true,
            Fragment::Pure => false,
            Fragment::Full => linear && self.gen.rng.gen_bool(0.6),
        };
        let n = self.st.gamma.len() + self.st.delta.len();
        if make_linear {
            let name = Name::free(&format!("l{n}"));
            self.st.delta.push((name.clone(), ty.clone()));
            DcllTerm::var(name)
        } else {
            let name = Name::free(&format!("g{n}"));
            self.st.gamma.push((name.clone(), ty.clone()));
            DcllTerm::var(name)
        }
    }

    fn intro(
        &mut self,
        ty: &DcllType,
        mut must: Vec<(Name, DcllType)>,
        linear: bool,
        depth: usize,
    ) -> Option<DcllTerm> {
        match ty {
            DcllType::Lolli(a, r) => {
                let y = self.st.supply.fresh("y");
                must.push((y.clone(), (**a).clone()));
                let body = self.term(r, must, linear, depth - 1)?;
                Some(DcllTerm::lin_lam(y, (**a).clone(), body))
            }
            DcllType::Arrow(a, r) => {
                let x = self.st.supply.fresh("x");
                self.st.bound.push((x.clone(), (**a).clone()));
                let body = self.term(r, must, linear, depth - 1);
                self.st.bound.pop();
                Some(DcllTerm::nonlin_lam(x, (**a).clone(), body?))
            }
            _ => None,
        }
    }

    fn lin_app(
        &mut self,
        ty: &DcllType,
        must: Vec<(Name, DcllType)>,
        linear: bool,
        depth: usize,
    ) -> Option<DcllTerm> {
        let size = self.gen.cfg.max_type_size.saturating_sub(1).max(1);
        let a = self.gen.ty(size);
        let (mut left, mut right) = (Vec::new(), Vec::new());
        for m in must {
            if self.gen.rng.gen_bool(0.5) {
                left.push(m);
            } else {
                right.push(m);
            }
        }
        let f = self.term(
            &DcllType::lolli(a.clone(), ty.clone()),
            left,
            linear,
            depth - 1,
        )?;
        let x = self.term(&a, right, linear, depth - 1)?;
        Some(DcllTerm::lin_app(f, x))
    }

    fn nonlin_app(
        &mut self,
        ty: &DcllType,
        must: Vec<(Name, DcllType)>,
        linear: bool,
        depth: usize,
    ) -> Option<DcllTerm> {
        let size = self.gen.cfg.max_type_size.saturating_sub(1).max(1);
        let a = self.gen.ty(size);
        let f = self.term(
            &DcllType::arrow(a.clone(), ty.clone()),
            must,
            linear,
            depth - 1,
        )?;
        let x = self.term(&a, Vec::new(), false, depth - 1)?;
        Some(DcllTerm::nonlin_app(f, x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_seed() {
        let a = Generator::new(7, GenConfig::new(Fragment::Full))
            .judgement()
            .judgement();
        let b = Generator::new(7, GenConfig::new(Fragment::Full))
            .judgement()
            .judgement();
        assert_eq!(a, b);
    }

    #[test]
    fn fragments_are_respected() {
        let mut g = Generator::new(1, GenConfig::new(Fragment::Pure));
        for _ in 0..50 {
            let t = g.judgement();
            assert!(t.typed.term.is_pure());
            assert!(t.typed.ctx.delta.is_empty());
            assert!(height(&t.typed.term) <= 6);
        }
        let mut g = Generator::new(1, GenConfig::new(Fragment::Linear));
        for _ in 0..50 {
            let t = g.application();
            assert!(t.typed.term.is_purely_linear());
            assert!(t.typed.ctx.gamma.is_empty());
            assert!(matches!(t.typed.term, DcllTerm::LinApp { .. }));
        }
    }

    #[test]
    fn full_fragment_covers_every_rule() {
        let mut g = Generator::new(3, GenConfig::new(Fragment::Full));
        let mut cov = Coverage::default();
        for _ in 0..100 {
            cov.add(&g.judgement().typed);
        }
        assert_eq!(cov.missing(), Vec::<Rule>::new());
    }
}
