//! Type checkers for DCLL (a dual-context linear lambda calculus for MELL)
//! and for a simply typed lambda calculus with cyclic sharing (`letrec`),
//! together with the GoI-style translation from the former into the latter.

pub mod cps;
pub mod dcll;
pub mod generate;
pub mod goi;
pub mod kernel;
pub mod letrec;
pub mod rewrite;
pub mod syntax;
pub mod translate;
