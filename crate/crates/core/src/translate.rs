//! The GoI-style translation of DCLL into the cyclic sharing calculus.
//!
//! A type `σ` becomes a pair `(σ⁺, σ⁻)`; a derivation of `Γ ; Δ ⊢ M : σ`
//! becomes a term of type `σ⁻ ⇒ (σ⁺ × Δ⁻)` under `Γ^{−⇒+}, Δ⁺`.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::dcll::{
    typecheck_dcll, CheckError, DcllParser, DcllTerm, DcllType, DualContext, Rule, TypedDcll,
    TypedNode,
};
use crate::kernel::{FreshSupply, Name};
use crate::letrec::{desugar, typecheck_ltr, Decl, LtrTerm, LtrType, Pattern};
use crate::syntax::SyntaxError;

/// Version tag carried by every JSON document this crate's tools emit.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PolarType {
    pub pos: LtrType,
    pub neg: LtrType,
}

impl PolarType {
    pub fn new(pos: LtrType, neg: LtrType) -> Self {
        PolarType { pos, neg }
    }

    /// `σ⁻ ⇒ σ⁺`, the translation of a non-linear hypothesis.
    pub fn neg_to_pos(&self) -> LtrType {
        LtrType::fun(self.neg.clone(), self.pos.clone())
    }
}

/// Interpretation of DCLL base types. Unless strict, a base `b` not listed
/// explicitly is sent to the pair of base types `(b+, b-)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BaseTypeEnv {
    map: BTreeMap<String, PolarType>,
    strict: bool,
}

impl BaseTypeEnv {
    pub fn polarized() -> Self {
        BaseTypeEnv {
            map: BTreeMap::new(),
            strict: false,
        }
    }

    pub fn strict() -> Self {
        BaseTypeEnv {
            map: BTreeMap::new(),
            strict: true,
        }
    }

    pub fn with(mut self, base: &str, pos: LtrType, neg: LtrType) -> Self {
        self.insert(base, pos, neg);
        self
    }

    pub fn insert(&mut self, base: &str, pos: LtrType, neg: LtrType) {
        self.map.insert(base.to_string(), PolarType::new(pos, neg));
    }

    pub fn get(&self, base: &str) -> Result<PolarType, TranslateError> {
        match self.map.get(base) {
            Some(p) => Ok(p.clone()),
            None if !self.strict => Ok(PolarType::new(
                LtrType::base(&format!("{base}+")),
                LtrType::base(&format!("{base}-")),
            )),
            None => Err(TranslateError::MissingBaseType(base.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TranslateError {
    #[error("no interpretation for base type `{0}`")]
    MissingBaseType(String),
    #[error("internal error: translation is ill-typed: {message}\n  term: {term}")]
    InternalTypeError { term: String, message: String },
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Check(#[from] CheckError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TranslationOutput {
    /// The translation as built, with tuple patterns.
    pub sugared: LtrTerm,
    /// `sugared` after desugaring; this is the term that was re-typechecked.
    pub term: LtrTerm,
    /// `Γ^{−⇒+}`.
    pub gamma: Vec<(Name, LtrType)>,
    /// `Δ⁺`.
    pub delta: Vec<(Name, LtrType)>,
    /// `Δ⁻`.
    pub delta_neg: LtrType,
    /// `Δ⁻` split per variable.
    pub delta_negs: Vec<(Name, LtrType)>,
    /// `(σ⁺, σ⁻)` of the source type.
    pub polar: PolarType,
    /// `σ⁻ ⇒ (σ⁺ × Δ⁻)`.
    pub ty: LtrType,
}

impl TranslationOutput {
    /// The typing context `Γ^{−⇒+}, Δ⁺`.
    pub fn ctx(&self) -> Vec<(Name, LtrType)> {
        self.gamma
            .iter()
            .chain(self.delta.iter())
            .cloned()
            .collect()
    }
}

pub fn translate_type(t: &DcllType, env: &BaseTypeEnv) -> Result<PolarType, TranslateError> {
    Ok(match t {
        DcllType::Base(b) => env.get(b)?,
        DcllType::Bottom => PolarType::new(LtrType::unit(), LtrType::unit()),
        DcllType::Lolli(a, r) => {
            let (a, r) = (translate_type(a, env)?, translate_type(r, env)?);
            PolarType::new(
                LtrType::product([r.pos, a.neg]),
                LtrType::product([a.pos, r.neg]),
            )
        }
        DcllType::Arrow(a, r) => {
            let (a, r) = (translate_type(a, env)?, translate_type(r, env)?);
            PolarType::new(r.pos, LtrType::product([a.neg_to_pos(), r.neg]))
        }
    })
}

/// `(Γ^{−⇒+}, Δ⁺, Δ⁻)`.
#[allow(clippy::type_complexity)]
pub fn translate_ctx(
    ctx: &DualContext,
    env: &BaseTypeEnv,
) -> Result<(Vec<(Name, LtrType)>, Vec<(Name, LtrType)>, LtrType), TranslateError> {
    let mut gamma = Vec::new();
    for (x, t) in &ctx.gamma {
        gamma.push((x.clone(), translate_type(t, env)?.neg_to_pos()));
    }
    let mut delta = Vec::new();
    let mut negs = Vec::new();
    for (y, t) in &ctx.delta {
        let p = translate_type(t, env)?;
        delta.push((y.clone(), p.pos));
        negs.push(p.neg);
    }
    Ok((gamma, delta, LtrType::product(negs)))
}

pub fn translate(
    typed: &TypedDcll,
    env: &BaseTypeEnv,
    supply: &mut FreshSupply,
) -> Result<TranslationOutput, TranslateError> {
    let sugared = Translator { env, supply }.term(&typed.root, &typed.term)?;
    let term = desugar(&sugared, supply);
    let (gamma, delta, delta_neg) = translate_ctx(&typed.ctx, env)?;
    let polar = translate_type(&typed.ty, env)?;
    let mut delta_negs = Vec::new();
    for (y, t) in &typed.ctx.delta {
        delta_negs.push((y.clone(), translate_type(t, env)?.neg));
    }
    let ty = LtrType::fun(
        polar.neg.clone(),
        LtrType::product([polar.pos.clone(), delta_neg.clone()]),
    );
    let out = TranslationOutput {
        sugared,
        term,
        gamma,
        delta,
        delta_neg,
        delta_negs,
        polar,
        ty,
    };
    match typecheck_ltr(&out.ctx(), &out.term) {
        Ok(found) if found == out.ty => Ok(out),
        Ok(found) => Err(TranslateError::InternalTypeError {
            term: out.term.to_string(),
            message: format!("expected {}, found {found}", out.ty),
        }),
        Err(e) => Err(TranslateError::InternalTypeError {
            term: out.term.to_string(),
            message: e.to_string(),
        }),
    }
}

/// Parses, typechecks and translates a DCLL judgement `Γ ; Δ |- M`.
pub fn translate_judgement(
    src: &str,
    env: &BaseTypeEnv,
    supply: &mut FreshSupply,
) -> Result<TranslationOutput, TranslateError> {
    let judgement = DcllParser::default().parse_judgement(src, supply)?;
    let typed = typecheck_dcll(&judgement.ctx, &judgement.term)?;
    translate(&typed, env, supply)
}

struct Translator<'a> {
    env: &'a BaseTypeEnv,
    supply: &'a mut FreshSupply,
}

impl Translator<'_> {
    fn polar(&self, t: &DcllType) -> Result<PolarType, TranslateError> {
        translate_type(t, self.env)
    }

    fn term(&mut self, node: &TypedNode, term: &DcllTerm) -> Result<LtrTerm, TranslateError> {
        let sigma = self.polar(&node.ty)?;
        let var = |n: &Name| LtrTerm::var(n.clone());
        match (node.rule, term) {
            (Rule::AxNonLinear, DcllTerm::Var { name }) => {
                let k = self.supply.fresh("k");
                Ok(LtrTerm::lam(
                    Pattern::var(k.clone(), sigma.neg),
                    LtrTerm::app(var(name), var(&k)),
                ))
            }
            (Rule::AxLinear, DcllTerm::Var { name }) => {
                let k = self.supply.fresh("k");
                Ok(LtrTerm::lam(
                    Pattern::var(k.clone(), sigma.neg),
                    LtrTerm::tuple(vec![var(name), var(&k)]),
                ))
            }
            (Rule::ArrowIntro, DcllTerm::NonLinLam { var: x, ty, body }) => {
                let arg = self.polar(ty)?;
                let res = self.polar(&node.children[0].ty)?;
                let m = self.term(&node.children[0], body)?;
                let k = self.supply.fresh("k");
                let pat = Pattern::tuple(vec![
                    Pattern::var(x.clone(), arg.neg_to_pos()),
                    Pattern::var(k.clone(), res.neg),
                ]);
                Ok(LtrTerm::lam(pat, LtrTerm::app(m, var(&k))))
            }
            (Rule::ArrowElim, DcllTerm::NonLinApp { fun, arg }) => {
                let m = self.term(&node.children[0], fun)?;
                let n = self.term(&node.children[1], arg)?;
                let k = self.supply.fresh("k");
                Ok(LtrTerm::lam(
                    Pattern::var(k.clone(), sigma.neg),
                    LtrTerm::app(m, LtrTerm::tuple(vec![n, var(&k)])),
                ))
            }
            (Rule::LolliIntro, DcllTerm::LinLam { var: y, ty, body }) => {
                let arg = self.polar(ty)?;
                let res = self.polar(&node.children[0].ty)?;
                let m = self.term(&node.children[0], body)?;
                let k = self.supply.fresh("k");
                let pat = Pattern::tuple(vec![
                    Pattern::var(y.clone(), arg.pos),
                    Pattern::var(k.clone(), res.neg),
                ]);
                Ok(LtrTerm::lam(pat, LtrTerm::app(m, var(&k))))
            }
            (Rule::LolliElim, DcllTerm::LinApp { fun, arg }) => self.lin_app(node, fun, arg, sigma),
            (Rule::Duality, DcllTerm::CElim { body, .. }) => self.term(&node.children[0], body),
            (rule, term) => Err(TranslateError::InternalTypeError {
                term: term.to_string(),
                message: format!("derivation node {rule:?} does not match the term"),
            }),
        }
    }

    /// `λk. letrec (u, z₂⃗) be ⟦N⟧ h, (v, h, z₁⃗) be ⟦M⟧ (u, k) in (v, z₁⃗♯z₂⃗)`
    /// with the `z`s re-interleaved in the order of the enclosing `Δ`.
    fn lin_app(
        &mut self,
        node: &TypedNode,
        fun: &DcllTerm,
        arg: &DcllTerm,
        tau: PolarType,
    ) -> Result<LtrTerm, TranslateError> {
        let split = node
            .split
            .as_ref()
            .expect("linear application carries its split");
        let sigma = self.polar(&node.children[1].ty)?;
        let m = self.term(&node.children[0], fun)?;
        let n = self.term(&node.children[1], arg)?;

        let mut zs: BTreeMap<Name, Name> = BTreeMap::new();
        let mut z_pats = |entries: &[(Name, DcllType)], this: &mut Self| {
            let mut pats = Vec::new();
            for (y, t) in entries {
                let z = this.supply.fresh("z");
                zs.insert(y.clone(), z.clone());
                pats.push(Pattern::var(z, this.polar(t)?.neg));
            }
            Ok::<_, TranslateError>(pats)
        };
        let z1 = z_pats(&split.left, self)?;
        let z2 = z_pats(&split.right, self)?;

        let k = self.supply.fresh("k");
        let u = self.supply.fresh("u");
        let v = self.supply.fresh("v");
        let h = self.supply.fresh("h");
        let var = |n: &Name| LtrTerm::var(n.clone());

        let mut arg_pat = vec![Pattern::var(u.clone(), sigma.pos)];
        arg_pat.extend(z2);
        let mut fun_pat = vec![
            Pattern::var(v.clone(), tau.pos),
            Pattern::var(h.clone(), sigma.neg),
        ];
        fun_pat.extend(z1);

        let mut result = vec![var(&v)];
        result.extend(node.delta.iter().map(|(y, _)| var(&zs[y])));

        Ok(LtrTerm::lam(
            Pattern::var(k.clone(), tau.neg),
            LtrTerm::letrec(
                vec![
                    Decl::new(Pattern::tuple(arg_pat), LtrTerm::app(n, var(&h))),
                    Decl::new(
                        Pattern::tuple(fun_pat),
                        LtrTerm::app(m, LtrTerm::tuple(vec![var(&u), var(&k)])),
                    ),
                ],
                LtrTerm::tuple_or_single(result),
            ),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dcll::parse_dcll_type;
    use crate::kernel::alpha_eq;
    use crate::letrec::{parse_ltr, parse_ltr_type};

    fn dt(s: &str) -> DcllType {
        parse_dcll_type(s).unwrap()
    }

    fn lt(s: &str) -> LtrType {
        parse_ltr_type(s).unwrap()
    }

    fn pm() -> BaseTypeEnv {
        BaseTypeEnv::strict().with("b", lt("p"), lt("m"))
    }

    #[test]
    fn type_table() {
        let env = pm();
        assert_eq!(
            translate_type(&dt("bot"), &env).unwrap(),
            PolarType::new(lt("1"), lt("1"))
        );
        assert_eq!(
            translate_type(&dt("b -o b"), &env).unwrap(),
            PolarType::new(lt("p * m"), lt("p * m"))
        );
        assert_eq!(
            translate_type(&dt("(b -> bot) -o bot"), &env).unwrap(),
            PolarType::new(lt("m => p"), lt("1"))
        );
        assert_eq!(
            translate_type(&dt("b -> b"), &env).unwrap(),
            PolarType::new(lt("p"), lt("(m => p) * m"))
        );
    }

    #[test]
    fn missing_base_type() {
        assert_eq!(
            translate_type(&dt("c"), &pm()),
            Err(TranslateError::MissingBaseType("c".into()))
        );
        let lax = BaseTypeEnv::polarized();
        assert_eq!(
            translate_type(&dt("c"), &lax).unwrap(),
            PolarType::new(lt("c+"), lt("c-"))
        );
    }

    #[test]
    fn contexts() {
        let env = pm();
        let x = Name::free("x");
        let (g, d, n) = translate_ctx(
            &DualContext::new(vec![(x.clone(), dt("b"))], vec![]).unwrap(),
            &env,
        )
        .unwrap();
        assert_eq!(
            (g, d, n),
            (vec![(x.clone(), lt("m => p"))], vec![], lt("1"))
        );
        let y = Name::free("y");
        let (_, d, n) = translate_ctx(
            &DualContext::new(vec![], vec![(y.clone(), dt("bot"))]).unwrap(),
            &env,
        )
        .unwrap();
        assert_eq!((d, n), (vec![(y, lt("1"))], lt("1")));
        let ctx = DualContext::new(
            vec![],
            vec![(Name::free("y1"), dt("b")), (Name::free("y2"), dt("b"))],
        )
        .unwrap();
        let (_, d, n) = translate_ctx(&ctx, &env).unwrap();
        assert_eq!(
            d.iter().map(|(_, t)| t.clone()).collect::<Vec<_>>(),
            vec![lt("p"), lt("p")]
        );
        assert_eq!(n, lt("m * m"));
    }

    fn run(src: &str) -> TranslationOutput {
        let mut s = FreshSupply::new();
        translate_judgement(src, &BaseTypeEnv::polarized(), &mut s).unwrap()
    }

    fn same(out: &LtrTerm, expected: &str) {
        let mut s = FreshSupply::new();
        let e = parse_ltr(expected, &mut s).unwrap();
        assert!(alpha_eq(out, &e), "got {out}\nexpected {e}");
    }

    #[test]
    fn variables() {
        same(&run("; y:b |- y").term, "\\k:b-. (y, k)");
        same(&run("x:b ; |- x").term, "\\k:b-. x k");
    }

    #[test]
    fn nonlinear_golden() {
        let out = run("f:s -o t, g:t -o d ; x:s |- g (f x)");
        // the literal translation, before the administrative redexes
        // introduced by the variable clauses are contracted
        same(
            &out.sugared,
            "\\k:d-. letrec (u:t+, z:s-) be (\\k:t-. letrec (u:s+, z:s-) be (\\k:s-. (x, k)) h, \
             (v:t+, h:s-) be (\\k:s+ * t-. f k) (u, k) in (v, z)) h, \
             (v:d+, h:t-) be (\\k:t+ * d-. g k) (u, k) in (v, z)",
        );
        assert_eq!(out.ty, lt("d- => d+ * s-"));
    }

    #[test]
    fn lambda_and_nonlinear_application() {
        let out = run("f:b -> b ; |- \\\\x:b. f @ x");
        same(
            &out.sugared,
            "\\(x:b- => b+, k:b-). (\\k:b-. (\\k:(b- => b+) * b-. f k) (\\k:b-. x k, k)) k",
        );
        let out = run("; |- \\y:b. y");
        same(&out.sugared, "\\(y:b+, k:b-). (\\k:b-. (y, k)) k");
        assert_eq!(out.ty, lt("b+ * b- => b+ * b-"));
    }

    #[test]
    fn duality_is_identity() {
        let plain = run("; m:(b -o bot) -o bot |- m");
        let dual = run("; m:(b -o bot) -o bot |- C[b] m");
        assert!(alpha_eq(&plain.term, &dual.term));
        assert_eq!(
            plain.polar,
            translate_type(&dt("b"), &BaseTypeEnv::polarized()).unwrap()
        );
    }

    #[test]
    fn linear_application_restores_context_order() {
        // Δ = x, f, y with f taking x and leaving y to the argument side
        let out = run("; x:b, f:b -o b -o b, y:b |- f x y");
        assert_eq!(out.delta_neg, lt("b- * b+ * b+ * b- * b-"));
        let LtrTerm::Lam { body, .. } = &out.sugared else {
            panic!()
        };
        let LtrTerm::Letrec { body, .. } = &**body else {
            panic!()
        };
        let LtrTerm::Tuple { items } = &**body else {
            panic!()
        };
        assert_eq!(items.len(), 4);
    }

    #[test]
    fn syntax_errors_surface() {
        let mut s = FreshSupply::new();
        let e = translate_judgement("; |- \\x:b x", &BaseTypeEnv::polarized(), &mut s).unwrap_err();
        assert!(matches!(e, TranslateError::Syntax(_)));
    }
}
