//! One PASS/FAIL line per acceptance criterion. Runs without the libtest
//! harness so the report is always printed; exits non-zero on any failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use dcll_letrec::cps::check_cps_coincidence;
use dcll_letrec::dcll::{parse_dcll_judgement, typecheck_dcll, DcllType, DualContext, Rule};
use dcll_letrec::generate::{height, Coverage, Fragment, GenConfig, Generator};
use dcll_letrec::goi::{compose_application, read_permutation, wiring_of};
use dcll_letrec::kernel::{alpha_eq, FreshSupply};
use dcll_letrec::letrec::{parse_ltr, typecheck_ltr, LtrType};
use dcll_letrec::rewrite::{check_equal_dcll, check_equal_ltr, normalize_ltr, RewriteConfig};
use dcll_letrec::translate::{
    translate, translate_ctx, translate_judgement, translate_type, BaseTypeEnv, PolarType,
    TranslationOutput,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn env() -> BaseTypeEnv {
    BaseTypeEnv::polarized()
}

fn tr(src: &str, s: &mut FreshSupply) -> Result<TranslationOutput, String> {
    translate_judgement(src, &env(), s).map_err(|e| format!("{src}: {e}"))
}

fn type_soundness() -> Outcome {
    let start = Instant::now();
    let mut gen = Generator::new(2024, GenConfig::new(Fragment::Full));
    let mut cov = Coverage::default();
    let n = 500;
    for _ in 0..n {
        let g = gen.judgement();
        if height(&g.typed.term) > 6 {
            return Err(format!("generated term deeper than 6: {}", g.judgement()));
        }
        cov.add(&g.typed);
        let mut s = g.supply.clone();
        let out =
            translate(&g.typed, &env(), &mut s).map_err(|e| format!("{}: {e}", g.judgement()))?;
        let polar = translate_type(&g.typed.ty, &env()).map_err(|e| e.to_string())?;
        let (gamma, delta, delta_neg) =
            translate_ctx(&g.typed.ctx, &env()).map_err(|e| e.to_string())?;
        let expected = LtrType::fun(polar.neg, LtrType::product([polar.pos, delta_neg]));
        let ctx: Vec<_> = gamma.into_iter().chain(delta).collect();
        let found =
            typecheck_ltr(&ctx, &out.term).map_err(|e| format!("{}: {e}", g.judgement()))?;
        if found != expected {
            return Err(format!(
                "{}: type {found}, expected {expected}",
                g.judgement()
            ));
        }
    }
    let missing = cov.missing();
    if !missing.is_empty() {
        return Err(format!("rules never exercised: {missing:?}"));
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(10) {
        return Err(format!("took {elapsed:?}"));
    }
    let counts: Vec<String> = Rule::ALL
        .iter()
        .map(|r| format!("{r:?}={}", cov.0[r]))
        .collect();
    Ok(format!("{n} terms in {elapsed:.2?}; {}", counts.join(" ")))
}

fn nonlinear_golden() -> Outcome {
    let mut s = FreshSupply::new();
    let out = tr("f:s -o t, g:t -o d ; x:s |- g (f x)", &mut s)?;
    let expected_ty = "d- => d+ * s-";
    if out.ty.to_string() != expected_ty {
        return Err(format!("type {}, expected {expected_ty}", out.ty));
    }
    let reference = parse_ltr(
        "\\k:d-. letrec (u:t+, z:s-) be f (x, h), (v:d+, h:t-) be g (u, k) in (v, z)",
        &mut s,
    )
    .map_err(|e| e.to_string())?;
    let ctx = out.ctx();
    let cfg = RewriteConfig::default();
    let a = normalize_ltr(&ctx, &out.term, &cfg, &mut s).map_err(|e| e.to_string())?;
    let b = normalize_ltr(&ctx, &reference, &cfg, &mut s).map_err(|e| e.to_string())?;
    if a.exhausted || b.exhausted {
        return Err("normalization ran out of budget".into());
    }
    if !alpha_eq(&a.term, &b.term) {
        return Err(format!("{} differs from {}", a.term, b.term));
    }
    if !a.term.contains_letrec() {
        return Err("letrec was eliminated".into());
    }
    Ok(format!("normal form {}", a.term))
}

fn linear_golden() -> Outcome {
    let mut s = FreshSupply::new();
    let out = tr("; f:s -o t, g:t -o d, x:s |- g (f x)", &mut s)?;
    let nf = normalize_ltr(&out.ctx(), &out.term, &RewriteConfig::default(), &mut s)
        .map_err(|e| e.to_string())?;
    let expected = parse_ltr("\\k:d-. (pi1 g, x, pi2 g, pi1 f, k, pi2 f)", &mut s)
        .map_err(|e| e.to_string())?;
    if !alpha_eq(&nf.term, &expected) {
        return Err(format!("normal form {}", nf.term));
    }
    let w = wiring_of(&out).map_err(|e| e.to_string())?;
    let sources = w.sources();
    if sources != ["g.1", "x.1", "g.2", "f.1", "k.1", "f.2"] {
        return Err(format!("wiring sources {sources:?}"));
    }
    let read = read_permutation(&out, &nf.term).map_err(|e| e.to_string())?;
    if !read.same_permutation(&w) {
        return Err("permutation of the normal form differs from the wiring".into());
    }
    Ok(format!("{} ; wiring {}", nf.term, sources.join(" ")))
}

fn cps_coincidence() -> Outcome {
    let mut gen = Generator::new(6, GenConfig::new(Fragment::Pure));
    let n = 200;
    for _ in 0..n {
        let g = gen.judgement();
        let mut s = g.supply.clone();
        let r = check_cps_coincidence(&g.typed.ctx.gamma, &g.typed.term, &env(), &mut s)
            .map_err(|e| format!("{}: {e}", g.judgement()))?;
        if !r.coincide {
            return Err(format!("{}: {:?}", g.judgement(), r.mismatch));
        }
    }
    Ok(format!("{n} pure terms"))
}

const AXIOMS: &[(&str, &str, &str, &str)] = &[
    ("beta-lolli", "; y:b", "(\\x:b. x) y", "y"),
    ("beta-lolli", "; f:b -o c, y:b", "(\\x:b. f x) y", "f y"),
    (
        "beta-lolli",
        "; f:b -o b -o c, y:b, z:b",
        "(\\x:b. f x z) y",
        "f y z",
    ),
    ("eta-lolli", "; f:b -o c", "\\x:b. f x", "f"),
    ("eta-lolli", "; f:(b -o c) -o d", "\\x:b -o c. f x", "f"),
    ("eta-lolli", "; f:b -o c -o d, y:b", "\\x:c. f y x", "f y"),
    ("beta-arrow", "y:b ;", "(\\\\x:b. x) @ y", "y"),
    (
        "beta-arrow",
        "f:b -> c, y:b ;",
        "(\\\\x:b. f @ x) @ y",
        "f @ y",
    ),
    (
        "beta-arrow",
        "g:b -> b -> c, y:b ;",
        "(\\\\x:b. g @ x @ x) @ y",
        "g @ y @ y",
    ),
    ("eta-arrow", "f:b -> c ;", "\\\\x:b. f @ x", "f"),
    ("eta-arrow", "; f:b -> c", "\\\\x:b. f @ x", "f"),
    (
        "eta-arrow",
        "g:b -> b -> c, y:b ;",
        "\\\\x:b. g @ y @ x",
        "g @ y",
    ),
    (
        "c1",
        "; l:b -o bot, m:(b -o bot) -o bot",
        "l (C[b] m)",
        "m l",
    ),
    (
        "c1",
        "; f:c -o b -o bot, z:c, m:(b -o bot) -o bot",
        "f z (C[b] m)",
        "m (f z)",
    ),
    (
        "c1",
        "; l:(b -o c) -o bot, m:((b -o c) -o bot) -o bot",
        "l (C[b -o c] m)",
        "m l",
    ),
    ("c2", "; m:b", "C[b] (\\k:b -o bot. k m)", "m"),
    (
        "c2",
        "; f:c -o b, z:c",
        "C[b] (\\k:b -o bot. k (f z))",
        "f z",
    ),
    (
        "c2",
        "; m:b -o c",
        "C[b -o c] (\\k:(b -o c) -o bot. k m)",
        "m",
    ),
];

fn judgement(ctx: &str, term: &str) -> String {
    if ctx.contains(';') {
        format!("{ctx} |- {term}")
    } else {
        format!("{ctx} ; |- {term}")
    }
}

fn equational_soundness() -> Outcome {
    let cfg = RewriteConfig::with_budget(10_000);
    let mut per_axiom = std::collections::BTreeMap::new();
    for (axiom, ctx, lhs, rhs) in AXIOMS {
        let mut s = FreshSupply::new();
        let l = tr(&judgement(ctx, lhs), &mut s)?;
        let r = tr(&judgement(ctx, rhs), &mut s)?;
        if l.ty != r.ty {
            return Err(format!("{axiom}: sides translate at {} and {}", l.ty, r.ty));
        }
        let v =
            check_equal_ltr(&l.ctx(), &l.term, &r.term, &cfg, &mut s).map_err(|e| e.to_string())?;
        if !v.is_equal() {
            return Err(format!("{axiom}: {lhs} = {rhs} gave {}: {v:?}", v.label()));
        }
        *per_axiom.entry(*axiom).or_insert(0) += 1;
    }
    if per_axiom.len() != 6 || per_axiom.values().any(|&n| n < 3) {
        return Err(format!("instance counts {per_axiom:?}"));
    }
    Ok(format!("{} instances Equal: {per_axiom:?}", AXIOMS.len()))
}

fn test_types() -> Vec<DcllType> {
    let (a, b) = (DcllType::base("a"), DcllType::base("b"));
    vec![
        a.clone(),
        DcllType::Bottom,
        DcllType::unit(),
        DcllType::lolli(a.clone(), b.clone()),
        DcllType::arrow(a.clone(), b.clone()),
        DcllType::lolli(DcllType::arrow(a.clone(), DcllType::Bottom), b.clone()),
        DcllType::arrow(
            DcllType::lolli(a.clone(), b.clone()),
            DcllType::lolli(b.clone(), a.clone()),
        ),
        a.clone().bang(),
        a.clone().double_negation(),
    ]
}

fn duality_degeneracy() -> Outcome {
    let types = test_types();
    for t in &types {
        let p = translate_type(t, &env()).map_err(|e| e.to_string())?;
        let q = translate_type(&t.clone().double_negation(), &env()).map_err(|e| e.to_string())?;
        if p != q {
            return Err(format!(
                "{t}: ({}, {}) vs ({}, {})",
                p.pos, p.neg, q.pos, q.neg
            ));
        }
    }
    Ok(format!("{} types", types.len()))
}

fn bang_encoding() -> Outcome {
    let p = translate_type(&DcllType::base("b").bang(), &env()).map_err(|e| e.to_string())?;
    let b = |s: &str| LtrType::base(s);
    let expected = PolarType::new(LtrType::fun(b("b-"), b("b+")), LtrType::unit());
    if p == expected {
        Ok(format!("({}, {})", p.pos, p.neg))
    } else {
        Err(format!("got ({}, {})", p.pos, p.neg))
    }
}

fn triple_unit() -> Outcome {
    let unit = "(bot -o bot)";
    let ctx = format!("; a:((s -o {unit}) -o {unit}) -o {unit}");
    let one = "a".to_string();
    let two = format!("\\g:(s -o {unit}) -o {unit}. g (\\x:s. a (\\f:s -o {unit}. f x))");
    let mut s = FreshSupply::new();
    let l = tr(&judgement(&ctx, &one), &mut s)?;
    let r = tr(&judgement(&ctx, &two), &mut s)?;
    let v = check_equal_ltr(
        &l.ctx(),
        &l.term,
        &r.term,
        &RewriteConfig::default(),
        &mut s,
    )
    .map_err(|e| e.to_string())?;
    if !v.is_equal() {
        return Err(format!("translations gave {}: {v:?}", v.label()));
    }
    let j1 = parse_dcll_judgement(&judgement(&ctx, &one), &mut s).map_err(|e| e.to_string())?;
    let j2 = parse_dcll_judgement(&judgement(&ctx, &two), &mut s).map_err(|e| e.to_string())?;
    let (t1, t2) = (
        typecheck_dcll(&j1.ctx, &j1.term).map_err(|e| e.to_string())?,
        typecheck_dcll(&j2.ctx, &j2.term).map_err(|e| e.to_string())?,
    );
    if t1.ty != t2.ty {
        return Err(format!("proofs have types {} and {}", t1.ty, t2.ty));
    }
    let d = check_equal_dcll(
        &j1.ctx,
        &j1.term,
        &j2.term,
        &RewriteConfig::default(),
        &mut s,
    );
    if d.is_equal() {
        return Err("the DCLL rewriter identified the two proofs".into());
    }
    Ok(format!("translations Equal; DCLL proofs {}", d.label()))
}

fn wiring_functoriality() -> Outcome {
    let mut gen = Generator::new(11, GenConfig::new(Fragment::Linear));
    let n = 50;
    for _ in 0..n {
        let g = gen.application();
        let mut s = g.supply.clone();
        let whole = translate(&g.typed, &env(), &mut s).map_err(|e| e.to_string())?;
        let root = &g.typed.root;
        let split = root.split.as_ref().ok_or("application without split")?;
        let dcll_letrec::dcll::DcllTerm::LinApp { fun, arg } = &g.typed.term else {
            return Err("generated term is not an application".into());
        };
        let part = |delta: &[(dcll_letrec::kernel::Name, DcllType)], t, s: &mut FreshSupply| {
            let ctx =
                DualContext::new(root.gamma.clone(), delta.to_vec()).map_err(|e| e.to_string())?;
            let typed = typecheck_dcll(&ctx, t).map_err(|e| e.to_string())?;
            let out = translate(&typed, &env(), s).map_err(|e| e.to_string())?;
            wiring_of(&out).map_err(|e| e.to_string())
        };
        let m = part(&split.left, fun, &mut s)?;
        let a = part(&split.right, arg, &mut s)?;
        let w = wiring_of(&whole).map_err(|e| format!("{}: {e}", g.judgement()))?;
        let c = compose_application(&m, &a).map_err(|e| format!("{}: {e}", g.judgement()))?;
        for x in [&m, &a, &w, &c] {
            x.validate()
                .map_err(|e| format!("{}: {e}", g.judgement()))?;
        }
        if !c.same_permutation(&w) {
            return Err(format!(
                "{}: {:?} vs {:?}",
                g.judgement(),
                c.pairs(),
                w.pairs()
            ));
        }
    }
    Ok(format!("{n} linear applications"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("type soundness on generated terms", type_soundness),
        ("nonlinear composition golden", nonlinear_golden),
        ("linear composition golden and wiring", linear_golden),
        ("CPS coincidence on pure terms", cps_coincidence),
        ("equational soundness spot suite", equational_soundness),
        ("duality degeneracy", duality_degeneracy),
        ("exponential encoding", bang_encoding),
        ("triple-unit identification", triple_unit),
        ("wiring functoriality and bijectivity", wiring_functoriality),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let result = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        match result {
            Ok(detail) => println!("criterion {}: PASS {name} ({detail})", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL {name} ({why})", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
