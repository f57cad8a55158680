//! Directed rewriting for both equational theories and a bounded
//! equivalence check built on it.

mod dcll;
mod ltr;

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

pub use dcll::{dcll_key, normalize_dcll, one_step_reducts_dcll};
pub use ltr::{canonicalize_decls, ltr_key, normalize_ltr};

use crate::dcll::{DcllTerm, DualContext};
use crate::kernel::{Binding, FreshSupply, Name};
use crate::letrec::{LtrTerm, LtrType};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RewriteConfig {
    /// Upper bound on rule applications in one normalization.
    pub max_steps: usize,
    /// Record a `<rule> @ <path>` line per step and check each step
    /// preserves the type of the rewritten subterm.
    pub trace: bool,
}

impl Default for RewriteConfig {
    fn default() -> Self {
        RewriteConfig {
            max_steps: 10_000,
            trace: false,
        }
    }
}

impl RewriteConfig {
    pub fn with_budget(max_steps: usize) -> Self {
        RewriteConfig {
            max_steps,
            trace: false,
        }
    }

    pub fn traced(mut self) -> Self {
        self.trace = true;
        self
    }
}

/// Result of a normalization: the last term reached, whether the budget ran
/// out before a fixpoint, the number of steps and (if requested) the trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Normalized<T> {
    pub term: T,
    pub steps: usize,
    pub exhausted: bool,
    pub trace: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RewriteError {
    #[error("step {rule} @ {path} changed the type from {before} to {after}")]
    TypeNotPreserved {
        rule: String,
        path: String,
        before: String,
        after: String,
    },
    #[error("term is ill-typed: {0}")]
    IllTyped(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict")]
pub enum EqVerdict<T> {
    Equal { normal_form: T },
    NotEqualWitness { left: T, right: T },
    Unknown { left: T, right: T },
}

impl<T> EqVerdict<T> {
    pub fn is_equal(&self) -> bool {
        matches!(self, EqVerdict::Equal { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            EqVerdict::Equal { .. } => "Equal",
            EqVerdict::NotEqualWitness { .. } => "NotEqual",
            EqVerdict::Unknown { .. } => "Unknown",
        }
    }
}

/// Normalizes both sides; distinct normal forms reached within budget are
/// reported as a witness pair.
pub fn check_equal_ltr(
    ctx: &[(Name, LtrType)],
    a: &LtrTerm,
    b: &LtrTerm,
    cfg: &RewriteConfig,
    supply: &mut FreshSupply,
) -> Result<EqVerdict<LtrTerm>, RewriteError> {
    let na = normalize_ltr(ctx, a, cfg, supply)?;
    let nb = normalize_ltr(ctx, b, cfg, supply)?;
    Ok(if na.term.alpha_eq(&nb.term) {
        EqVerdict::Equal {
            normal_form: na.term,
        }
    } else if na.exhausted || nb.exhausted {
        EqVerdict::Unknown {
            left: na.term,
            right: nb.term,
        }
    } else {
        EqVerdict::NotEqualWitness {
            left: na.term,
            right: nb.term,
        }
    })
}

/// Normalizes both sides, then explores every one-step reduct of either
/// term (in any position, by any oriented rule). Joinable sets give `Equal`;
/// two exhausted, disjoint sets give a witness; otherwise `Unknown`.
pub fn check_equal_dcll(
    ctx: &DualContext,
    a: &DcllTerm,
    b: &DcllTerm,
    cfg: &RewriteConfig,
    supply: &mut FreshSupply,
) -> EqVerdict<DcllTerm> {
    let na = normalize_dcll(ctx, a, cfg, supply);
    let nb = normalize_dcll(ctx, b, cfg, supply);
    if na.term.alpha_eq(&nb.term) {
        return EqVerdict::Equal {
            normal_form: na.term,
        };
    }
    let left = explore(ctx, a, cfg.max_steps, supply);
    let right = explore(ctx, b, cfg.max_steps, supply);
    let keys: BTreeSet<&String> = left.seen.iter().collect();
    if right.seen.iter().any(|k| keys.contains(k)) {
        return EqVerdict::Equal {
            normal_form: na.term,
        };
    }
    if left.complete && right.complete && !na.exhausted && !nb.exhausted {
        EqVerdict::NotEqualWitness {
            left: na.term,
            right: nb.term,
        }
    } else {
        EqVerdict::Unknown {
            left: na.term,
            right: nb.term,
        }
    }
}

struct Explored {
    seen: BTreeSet<String>,
    complete: bool,
}

fn explore(
    ctx: &DualContext,
    start: &DcllTerm,
    budget: usize,
    supply: &mut FreshSupply,
) -> Explored {
    let mut seen = BTreeSet::from([dcll_key(start)]);
    let mut frontier = vec![start.clone()];
    while let Some(t) = frontier.pop() {
        for r in one_step_reducts_dcll(ctx, &t, supply) {
            if seen.insert(dcll_key(&r)) {
                if seen.len() > budget {
                    return Explored {
                        seen,
                        complete: false,
                    };
                }
                frontier.push(r);
            }
        }
    }
    Explored {
        seen,
        complete: true,
    }
}
