//! Syntax-directed dual-context type checking with inferred linear splits.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::{DcllTerm, DcllType};
use crate::kernel::{path_string, Binding, Name};

/// A context entry `x : σ`.
pub type Entry = (Name, DcllType);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(Name),
    #[error("linear variable `{0}` is never used")]
    LinearVariableUnused(Name),
    #[error("linear variable `{0}` is used more than once")]
    LinearVariableDuplicated(Name),
    #[error("type mismatch at {location}: expected {expected}, found {found}")]
    TypeMismatch {
        expected: String,
        found: DcllType,
        location: String,
    },
    #[error("argument of non-linear application at {location} uses linear variable `{var}`")]
    NonEmptyLinearContextInNonLinArg { var: Name, location: String },
    #[error("C[{ty}] at {location} expects a body of type {expected}, found {found}")]
    DualityTypeMismatch {
        ty: DcllType,
        expected: DcllType,
        found: DcllType,
        location: String,
    },
    #[error("linear variable `{0}` is assigned to both sides of a split")]
    SharedLinearVariable(Name),
    #[error("variable `{0}` is bound twice in the context")]
    DuplicateBinding(Name),
}

/// `Γ ; Δ`: a non-linear zone and an ordered linear zone.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DualContext {
    pub gamma: Vec<Entry>,
    pub delta: Vec<Entry>,
}

impl DualContext {
    pub fn new(gamma: Vec<Entry>, delta: Vec<Entry>) -> Result<Self, CheckError> {
        let mut seen = BTreeSet::new();
        for (n, _) in gamma.iter().chain(delta.iter()) {
            if !seen.insert(n.clone()) {
                return Err(CheckError::DuplicateBinding(n.clone()));
            }
        }
        Ok(DualContext { gamma, delta })
    }

    pub fn empty() -> Self {
        DualContext::default()
    }

    pub fn base_names(&self) -> BTreeSet<String> {
        self.gamma
            .iter()
            .chain(self.delta.iter())
            .flat_map(|(_, t)| t.base_names())
            .collect()
    }
}

impl std::fmt::Display for DualContext {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let show = |zone: &[Entry]| {
            zone.iter()
                .map(|(n, t)| format!("{n}:{t}"))
                .collect::<Vec<_>>()
                .join(", ")
        };
        write!(f, "{} ; {}", show(&self.gamma), show(&self.delta))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    AxNonLinear,
    AxLinear,
    LolliIntro,
    LolliElim,
    ArrowIntro,
    ArrowElim,
    Duality,
}

impl Rule {
    pub const ALL: [Rule; 7] = [
        Rule::AxNonLinear,
        Rule::AxLinear,
        Rule::LolliIntro,
        Rule::LolliElim,
        Rule::ArrowIntro,
        Rule::ArrowElim,
        Rule::Duality,
    ];
}

/// The order-preserving decomposition `Δ = Δ₁ ♯ Δ₂` chosen at a linear
/// application: `left` goes to the function, `right` to the argument.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub left: Vec<Entry>,
    pub right: Vec<Entry>,
}

/// One node of a typing derivation.
#[derive(Debug, Clone, PartialEq)]
pub struct TypedNode {
    pub rule: Rule,
    pub ty: DcllType,
    pub gamma: Vec<Entry>,
    pub delta: Vec<Entry>,
    /// The variable for axioms, the bound variable for abstractions.
    pub var: Option<Name>,
    /// Present on `LolliElim` nodes.
    pub split: Option<Split>,
    pub children: Vec<TypedNode>,
}

impl TypedNode {
    fn walk<'a>(&'a self, path: &mut Vec<usize>, f: &mut dyn FnMut(&[usize], &'a TypedNode)) {
        f(path, self);
        for (i, c) in self.children.iter().enumerate() {
            path.push(i);
            c.walk(path, f);
            path.pop();
        }
    }

    /// Rebuilds the judgement this node derives, as a fresh context.
    pub fn context(&self) -> DualContext {
        DualContext {
            gamma: self.gamma.clone(),
            delta: self.delta.clone(),
        }
    }
}

/// A well-typed judgement together with its derivation.
#[derive(Debug, Clone, PartialEq)]
pub struct TypedDcll {
    pub term: DcllTerm,
    pub ctx: DualContext,
    pub ty: DcllType,
    pub root: TypedNode,
}

impl TypedDcll {
    /// Splits keyed by the path of each linear application.
    pub fn splits(&self) -> BTreeMap<Vec<usize>, Split> {
        let mut out = BTreeMap::new();
        self.root.walk(&mut Vec::new(), &mut |p, n| {
            if let Some(s) = &n.split {
                out.insert(p.to_vec(), s.clone());
            }
        });
        out
    }

    pub fn rule_counts(&self) -> BTreeMap<Rule, usize> {
        let mut out = BTreeMap::new();
        self.root.walk(&mut Vec::new(), &mut |_, n| {
            *out.entry(n.rule).or_insert(0) += 1
        });
        out
    }

    pub fn nodes(&self) -> Vec<(Vec<usize>, &TypedNode)> {
        let mut out = Vec::new();
        self.root
            .walk(&mut Vec::new(), &mut |p, n| out.push((p.to_vec(), n)));
        out
    }
}

/// Splits `delta` into the variables used by the function (`used_left`) and
/// by the argument (`used_right`), each keeping `delta`'s relative order.
pub fn linear_split(
    delta: &[Entry],
    used_left: &BTreeSet<Name>,
    used_right: &BTreeSet<Name>,
) -> Result<Split, CheckError> {
    if let Some(shared) = used_left.intersection(used_right).next() {
        return Err(CheckError::SharedLinearVariable(shared.clone()));
    }
    let pick = |set: &BTreeSet<Name>| {
        delta
            .iter()
            .filter(|(n, _)| set.contains(n))
            .cloned()
            .collect::<Vec<_>>()
    };
    Ok(Split {
        left: pick(used_left),
        right: pick(used_right),
    })
}

pub fn typecheck_dcll(ctx: &DualContext, term: &DcllTerm) -> Result<TypedDcll, CheckError> {
    let ctx = DualContext::new(ctx.gamma.clone(), ctx.delta.clone())?;
    let root = check(&ctx.gamma, &ctx.delta, term, &mut Vec::new())?;
    Ok(TypedDcll {
        term: term.clone(),
        ty: root.ty.clone(),
        ctx,
        root,
    })
}

fn lookup<'a>(zone: &'a [Entry], name: &Name) -> Option<&'a DcllType> {
    zone.iter().rev().find(|(n, _)| n == name).map(|(_, t)| t)
}

fn check(
    gamma: &[Entry],
    delta: &[Entry],
    term: &DcllTerm,
    path: &mut Vec<usize>,
) -> Result<TypedNode, CheckError> {
    let node = |rule, ty, var, split, children| TypedNode {
        rule,
        ty,
        gamma: gamma.to_vec(),
        delta: delta.to_vec(),
        var,
        split,
        children,
    };
    match term {
        DcllTerm::Var { name } => {
            if let Some(ty) = lookup(delta, name) {
                if let Some((other, _)) = delta.iter().find(|(n, _)| n != name) {
                    return Err(CheckError::LinearVariableUnused(other.clone()));
                }
                Ok(node(
                    Rule::AxLinear,
                    ty.clone(),
                    Some(name.clone()),
                    None,
                    vec![],
                ))
            } else if let Some(ty) = lookup(gamma, name) {
                if let Some((unused, _)) = delta.first() {
                    return Err(CheckError::LinearVariableUnused(unused.clone()));
                }
                Ok(node(
                    Rule::AxNonLinear,
                    ty.clone(),
                    Some(name.clone()),
                    None,
                    vec![],
                ))
            } else {
                Err(CheckError::UnboundVariable(name.clone()))
            }
        }
        DcllTerm::LinLam { var, ty, body } => {
            if delta.iter().any(|(n, _)| n == var) {
                return Err(CheckError::LinearVariableUnused(var.clone()));
            }
            let inner_gamma: Vec<_> = gamma.iter().filter(|(n, _)| n != var).cloned().collect();
            // The bound variable goes first so that the body's `Δ⁻` lines up
            // with `(σ -o τ)⁺ = τ⁺ × σ⁻` followed by the outer `Δ⁻`.
            let mut inner_delta = vec![(var.clone(), ty.clone())];
            inner_delta.extend(delta.iter().cloned());
            path.push(0);
            let b = check(&inner_gamma, &inner_delta, body, path)?;
            path.pop();
            let fun_ty = DcllType::lolli(ty.clone(), b.ty.clone());
            Ok(node(
                Rule::LolliIntro,
                fun_ty,
                Some(var.clone()),
                None,
                vec![b],
            ))
        }
        DcllTerm::NonLinLam { var, ty, body } => {
            if delta.iter().any(|(n, _)| n == var) {
                return Err(CheckError::LinearVariableUnused(var.clone()));
            }
            let mut inner_gamma: Vec<_> = gamma.iter().filter(|(n, _)| n != var).cloned().collect();
            inner_gamma.push((var.clone(), ty.clone()));
            path.push(0);
            let b = check(&inner_gamma, delta, body, path)?;
            path.pop();
            let fun_ty = DcllType::arrow(ty.clone(), b.ty.clone());
            Ok(node(
                Rule::ArrowIntro,
                fun_ty,
                Some(var.clone()),
                None,
                vec![b],
            ))
        }
        DcllTerm::LinApp { fun, arg } => {
            let names: BTreeSet<Name> = delta.iter().map(|(n, _)| n.clone()).collect();
            let left: BTreeSet<Name> = fun.free_vars().intersection(&names).cloned().collect();
            let arg_used: BTreeSet<Name> = arg.free_vars().intersection(&names).cloned().collect();
            if let Some(dup) = left.intersection(&arg_used).next() {
                return Err(CheckError::LinearVariableDuplicated(dup.clone()));
            }
            let right: BTreeSet<Name> = names.difference(&left).cloned().collect();
            let split = linear_split(delta, &left, &right)?;
            path.push(0);
            let f = check(gamma, &split.left, fun, path)?;
            path.pop();
            let (dom, cod) = match &f.ty {
                DcllType::Lolli(d, c) => ((**d).clone(), (**c).clone()),
                other => {
                    path.push(0);
                    let location = path_string(path);
                    path.pop();
                    return Err(CheckError::TypeMismatch {
                        expected: "a linear function type `_ -o _`".into(),
                        found: other.clone(),
                        location,
                    });
                }
            };
            path.push(1);
            let a = check(gamma, &split.right, arg, path)?;
            if a.ty != dom {
                let location = path_string(path);
                path.pop();
                return Err(CheckError::TypeMismatch {
                    expected: dom.to_string(),
                    found: a.ty.clone(),
                    location,
                });
            }
            path.pop();
            Ok(node(Rule::LolliElim, cod, None, Some(split), vec![f, a]))
        }
        DcllTerm::NonLinApp { fun, arg } => {
            let names: BTreeSet<Name> = delta.iter().map(|(n, _)| n.clone()).collect();
            if let Some(var) = arg.free_vars().intersection(&names).next() {
                path.push(1);
                let location = path_string(path);
                path.pop();
                return Err(CheckError::NonEmptyLinearContextInNonLinArg {
                    var: var.clone(),
                    location,
                });
            }
            path.push(0);
            let f = check(gamma, delta, fun, path)?;
            path.pop();
            let (dom, cod) = match &f.ty {
                DcllType::Arrow(d, c) => ((**d).clone(), (**c).clone()),
                other => {
                    path.push(0);
                    let location = path_string(path);
                    path.pop();
                    return Err(CheckError::TypeMismatch {
                        expected: "a non-linear function type `_ -> _`".into(),
                        found: other.clone(),
                        location,
                    });
                }
            };
            path.push(1);
            let a = check(gamma, &[], arg, path)?;
            if a.ty != dom {
                let location = path_string(path);
                path.pop();
                return Err(CheckError::TypeMismatch {
                    expected: dom.to_string(),
                    found: a.ty.clone(),
                    location,
                });
            }
            path.pop();
            Ok(node(Rule::ArrowElim, cod, None, None, vec![f, a]))
        }
        DcllTerm::CElim { ty, body } => {
            path.push(0);
            let b = check(gamma, delta, body, path)?;
            path.pop();
            let expected = ty.clone().double_negation();
            if b.ty != expected {
                return Err(CheckError::DualityTypeMismatch {
                    ty: ty.clone(),
                    expected,
                    found: b.ty.clone(),
                    location: path_string(path),
                });
            }
            Ok(node(Rule::Duality, ty.clone(), None, None, vec![b]))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dcll::parse_dcll_judgement;
    use crate::kernel::FreshSupply;

    fn run(src: &str) -> Result<TypedDcll, CheckError> {
        let mut s = FreshSupply::new();
        let j = parse_dcll_judgement(src, &mut s).expect("parses");
        typecheck_dcll(&j.ctx, &j.term)
    }

    fn names(zone: &[Entry]) -> Vec<&str> {
        zone.iter().map(|(n, _)| n.text()).collect()
    }

    #[test]
    fn linear_axiom() {
        let t = run("; x:s |- x").unwrap();
        assert_eq!(t.ty, DcllType::base("s"));
        assert!(t.splits().is_empty());
        assert_eq!(t.root.rule, Rule::AxLinear);
    }

    #[test]
    fn composition_example_splits() {
        let t = run("f:s -o t, g:t -o d ; x:s |- g (f x)").unwrap();
        assert_eq!(t.ty, DcllType::base("d"));
        let splits = t.splits();
        assert_eq!(splits.len(), 2);
        let outer = &splits[&vec![]];
        assert!(outer.left.is_empty());
        assert_eq!(names(&outer.right), ["x"]);
        let inner = &splits[&vec![1]];
        assert!(inner.left.is_empty());
        assert_eq!(names(&inner.right), ["x"]);
    }

    #[test]
    fn duplicated_linear_variable() {
        let err = run("; x:b |- \\k:b -o bot. k x k").unwrap_err();
        assert!(matches!(err, CheckError::LinearVariableDuplicated(ref n) if n.text() == "k"));
    }

    #[test]
    fn unused_and_unbound() {
        assert!(matches!(
            run("; x:b, y:b |- x").unwrap_err(),
            CheckError::LinearVariableUnused(ref n) if n.text() == "y"
        ));
        assert!(matches!(
            run("f:b ; y:b |- f").unwrap_err(),
            CheckError::LinearVariableUnused(_)
        ));
        assert!(matches!(
            run("; |- z").unwrap_err(),
            CheckError::UnboundVariable(_)
        ));
        assert!(matches!(
            run("; |- \\x:b. \\y:b. x").unwrap_err(),
            CheckError::LinearVariableUnused(ref n) if n.text() == "y"
        ));
    }

    #[test]
    fn nonlinear_argument_must_not_use_linear_context() {
        let err = run("f:b -> b ; x:b |- f @ x").unwrap_err();
        assert!(matches!(
            err,
            CheckError::NonEmptyLinearContextInNonLinArg { .. }
        ));
        let ok = run("f:b -> b, x:b ; |- f @ x").unwrap();
        assert_eq!(ok.root.rule, Rule::ArrowElim);
    }

    #[test]
    fn type_mismatch_reports_location() {
        let err = run("f:b -o b ; x:c |- f x").unwrap_err();
        match err {
            CheckError::TypeMismatch {
                expected,
                found,
                location,
            } => {
                assert_eq!(expected, "b");
                assert_eq!(found, DcllType::base("c"));
                assert_eq!(location, "/1");
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn duality() {
        let t = run("; m:(b -o bot) -o bot |- C[b] m").unwrap();
        assert_eq!(t.ty, DcllType::base("b"));
        assert!(matches!(
            run("; m:b -o bot |- C[b] m").unwrap_err(),
            CheckError::DualityTypeMismatch { .. }
        ));
    }

    #[test]
    fn lambda_binds_linear_variable_first() {
        let t = run("; y:b |- \\x:c. f x y").unwrap_err();
        assert!(matches!(t, CheckError::UnboundVariable(_)));
        let t = run("f:c -o b -o d ; y:b |- \\x:c. f x y").unwrap();
        assert_eq!(names(&t.root.children[0].delta), ["x", "y"]);
    }

    #[test]
    fn split_examples() {
        let (x, y, z) = (Name::free("x"), Name::free("y"), Name::free("z"));
        let b = DcllType::base("b");
        let set = |v: &[&Name]| v.iter().map(|n| (*n).clone()).collect::<BTreeSet<_>>();
        let delta = vec![(x.clone(), b.clone()), (y.clone(), b.clone())];
        let s = linear_split(&delta, &set(&[&y]), &set(&[&x])).unwrap();
        assert_eq!((names(&s.left), names(&s.right)), (vec!["y"], vec!["x"]));
        let s = linear_split(&delta[..1], &set(&[]), &set(&[&x])).unwrap();
        assert!(s.left.is_empty());
        let delta3 = vec![
            (x.clone(), b.clone()),
            (y.clone(), b.clone()),
            (z.clone(), b),
        ];
        let s = linear_split(&delta3, &set(&[&x, &z]), &set(&[&y])).unwrap();
        assert_eq!(
            (names(&s.left), names(&s.right)),
            (vec!["x", "z"], vec!["y"])
        );
        assert!(matches!(
            linear_split(&delta3, &set(&[&x]), &set(&[&x])),
            Err(CheckError::SharedLinearVariable(_))
        ));
    }
}
