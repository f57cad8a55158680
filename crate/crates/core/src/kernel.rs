//! Names, fresh-name supply and the binding operations shared by both calculi.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

/// A variable symbol.
///
/// Source-level free names carry uid `0`; every binder introduced by a parser
/// or by a term transformation draws a nonzero uid from a [`FreshSupply`], so
/// two binders never share an identity even when their text coincides.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Name {
    text: Arc<str>,
    uid: u32,
}

impl Name {
    /// A free (context) name as written in source text.
    pub fn free(text: &str) -> Self {
        Name {
            text: Arc::from(text),
            uid: 0,
        }
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn uid(&self) -> u32 {
        self.uid
    }

    pub fn is_generated(&self) -> bool {
        self.uid != 0
    }
}

impl Serialize for Name {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("Name", 2)?;
        st.serialize_field("text", &*self.text)?;
        st.serialize_field("uid", &self.uid)?;
        st.end()
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Unambiguous rendering: generated names show their uid after a `#`, which
/// no parser accepts inside an identifier.
impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.uid == 0 {
            write!(f, "{}", self.text)
        } else {
            write!(f, "{}#{}", self.text, self.uid)
        }
    }
}

/// Monotone source of binder identities.
#[derive(Debug, Default, Clone)]
pub struct FreshSupply {
    counter: u32,
}

impl FreshSupply {
    pub fn new() -> Self {
        FreshSupply { counter: 0 }
    }

    /// Draws a new name with the given display text.
    pub fn fresh(&mut self, text: &str) -> Name {
        self.counter += 1;
        Name {
            text: Arc::from(text),
            uid: self.counter,
        }
    }

    /// Draws a new name sharing the text of `like`.
    pub fn refresh(&mut self, like: &Name) -> Name {
        self.counter += 1;
        Name {
            text: like.text.clone(),
            uid: self.counter,
        }
    }

    /// The last uid handed out (0 if none).
    pub fn last(&self) -> u32 {
        self.counter
    }
}

/// Binding structure common to the two term languages.
pub trait Binding: Sized {
    fn free_vars(&self) -> BTreeSet<Name>;

    /// Capture-avoiding substitution of `replacement` for the free
    /// occurrences of `var`.
    fn subst(&self, var: &Name, replacement: &Self, supply: &mut FreshSupply) -> Self;

    fn alpha_eq(&self, other: &Self) -> bool;
}

pub fn fv<T: Binding>(term: &T) -> BTreeSet<Name> {
    term.free_vars()
}

pub fn subst<T: Binding>(term: &T, var: &Name, replacement: &T, supply: &mut FreshSupply) -> T {
    term.subst(var, replacement, supply)
}

pub fn alpha_eq<T: Binding>(a: &T, b: &T) -> bool {
    a.alpha_eq(b)
}

/// Root-to-node position as `/i/j/...`, child indices as listed by each
/// calculus' `children` order; the root is `/`.
pub fn path_string(path: &[usize]) -> String {
    if path.is_empty() {
        return "/".to_string();
    }
    path.iter().map(|i| format!("/{i}")).collect()
}

/// Pairs of binders in scope during a parallel traversal of two terms.
#[derive(Debug, Default)]
pub struct AlphaEnv {
    pairs: Vec<(Name, Name)>,
}

impl AlphaEnv {
    pub fn new() -> Self {
        AlphaEnv { pairs: Vec::new() }
    }

    pub fn push(&mut self, left: Name, right: Name) {
        self.pairs.push((left, right));
    }

    pub fn pop(&mut self, n: usize) {
        let len = self.pairs.len();
        self.pairs.truncate(len - n);
    }

    /// Two occurrences correspond when both are bound by the same binder
    /// pair, or both are free and identical.
    pub fn vars_match(&self, left: &Name, right: &Name) -> bool {
        let l = self.pairs.iter().rposition(|(a, _)| a == left);
        let r = self.pairs.iter().rposition(|(_, b)| b == right);
        match (l, r) {
            (Some(i), Some(j)) => i == j,
            (None, None) => left == right,
            _ => false,
        }
    }
}

/// Chooses readable, re-parseable display names for binders: a binder keeps
/// its source text unless that would collide with a free name or with a
/// binder already in scope, in which case a numeric suffix is appended.
#[derive(Debug, Default)]
pub(crate) struct DisplayScope {
    free: BTreeSet<String>,
    scope: Vec<(Name, String)>,
}

impl DisplayScope {
    pub(crate) fn new<'a>(free: impl IntoIterator<Item = &'a Name>) -> Self {
        DisplayScope {
            free: free.into_iter().map(|n| n.text().to_string()).collect(),
            scope: Vec::new(),
        }
    }

    pub(crate) fn bind(&mut self, name: &Name) -> String {
        let base = name.text();
        let taken = |c: &str| self.free.contains(c) || self.scope.iter().any(|(_, d)| d == c);
        let mut candidate = base.to_string();
        let mut n = 1;
        while taken(&candidate) {
            candidate = format!("{base}{n}");
            n += 1;
        }
        self.scope.push((name.clone(), candidate.clone()));
        candidate
    }

    pub(crate) fn unbind(&mut self, n: usize) {
        let len = self.scope.len();
        self.scope.truncate(len - n);
    }

    pub(crate) fn lookup(&self, name: &Name) -> String {
        match self.scope.iter().rev().find(|(n, _)| n == name) {
            Some((_, d)) => d.clone(),
            None => name.to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn supply_is_strictly_increasing() {
        let mut s = FreshSupply::new();
        let a = s.fresh("x");
        let b = s.refresh(&a);
        let c = s.fresh("y");
        assert!(a.uid() < b.uid() && b.uid() < c.uid());
        assert_eq!(b.text(), "x");
        assert_ne!(a, b);
    }

    #[test]
    fn free_names_compare_by_text() {
        assert_eq!(Name::free("f"), Name::free("f"));
        assert_ne!(Name::free("f"), Name::free("g"));
        assert!(!Name::free("f").is_generated());
    }

    #[test]
    fn alpha_env_respects_shadowing() {
        let mut s = FreshSupply::new();
        let (x1, x2, y) = (s.fresh("x"), s.fresh("x"), s.fresh("y"));
        let mut env = AlphaEnv::new();
        env.push(x1.clone(), y.clone());
        env.push(x2.clone(), x1.clone());
        // innermost right binder x1 pairs with left x2
        assert!(env.vars_match(&x2, &x1));
        assert!(!env.vars_match(&x1, &x1));
        assert!(env.vars_match(&x1, &y));
        env.pop(2);
        assert!(env.vars_match(&x1, &x1));
    }

    #[test]
    fn display_scope_avoids_free_and_bound_clashes() {
        let mut s = FreshSupply::new();
        let free = [Name::free("y")];
        let mut scope = DisplayScope::new(free.iter());
        let y = s.fresh("y");
        let y2 = s.fresh("y");
        assert_eq!(scope.bind(&y), "y1");
        assert_eq!(scope.bind(&y2), "y2");
        assert_eq!(scope.lookup(&y), "y1");
        assert_eq!(scope.lookup(&Name::free("y")), "y");
        scope.unbind(2);
        assert_eq!(scope.bind(&y2), "y1");
    }
}
