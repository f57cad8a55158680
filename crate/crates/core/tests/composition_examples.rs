use dcll_letrec::kernel::{alpha_eq, FreshSupply};
use dcll_letrec::letrec::{parse_ltr, LtrTerm};
use dcll_letrec::rewrite::{normalize_ltr, RewriteConfig};
use dcll_letrec::translate::{translate_judgement, BaseTypeEnv};

fn normal(
    out_ctx: &[(dcll_letrec::kernel::Name, dcll_letrec::letrec::LtrType)],
    t: &LtrTerm,
    s: &mut FreshSupply,
) -> LtrTerm {
    let n = normalize_ltr(out_ctx, t, &RewriteConfig::default().traced(), s).unwrap();
    assert!(!n.exhausted);
    n.term
}

#[test]
fn nonlinear_composition_keeps_its_letrec() {
    let mut s = FreshSupply::new();
    let out = translate_judgement(
        "f:s -o t, g:t -o d ; x:s |- g (f x)",
        &BaseTypeEnv::polarized(),
        &mut s,
    )
    .unwrap();
    let reference = parse_ltr(
        "\\k:d-. letrec (u:t+, z:s-) be f (x, h), (v:d+, h:t-) be g (u, k) in (v, z)",
        &mut s,
    )
    .unwrap();
    let ctx = out.ctx();
    let a = normal(&ctx, &out.term, &mut s);
    let b = normal(&ctx, &reference, &mut s);
    println!("{a}\n{b}");
    assert!(alpha_eq(&a, &b));
    assert!(a.contains_letrec());
}

#[test]
fn linear_composition_is_a_wiring() {
    let mut s = FreshSupply::new();
    let out = translate_judgement(
        "; f:s -o t, g:t -o d, x:s |- g (f x)",
        &BaseTypeEnv::polarized(),
        &mut s,
    )
    .unwrap();
    let ctx = out.ctx();
    let a = normal(&ctx, &out.term, &mut s);
    println!("{a}");
    let expected = parse_ltr("\\k:d-. (pi1 g, x, pi2 g, pi1 f, k, pi2 f)", &mut s).unwrap();
    assert!(alpha_eq(&a, &expected));
}
