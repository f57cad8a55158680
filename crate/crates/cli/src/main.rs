mod config;

use std::io::Read as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use dcll_letrec::cps::{check_cps_coincidence, CpsError};
use dcll_letrec::dcll::{
    parse_dcll_judgement, parse_dcll_term, typecheck_dcll, CheckError, Judgement,
};
use dcll_letrec::goi::{to_dot, wiring_of_term, Wiring, WiringError};
use dcll_letrec::kernel::FreshSupply;
use dcll_letrec::letrec::{parse_ltr, parse_ltr_judgement, typecheck_ltr, LtrTypeError};
use dcll_letrec::rewrite::{
    check_equal_dcll, check_equal_ltr, normalize_dcll, normalize_ltr, EqVerdict, RewriteConfig,
    RewriteError,
};
use dcll_letrec::syntax::SyntaxError;
use dcll_letrec::translate::{
    translate, BaseTypeEnv, TranslateError, TranslationOutput, SCHEMA_VERSION,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use config::Config;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    User(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::User(_) => 1,
            CliError::Internal(_) => 3,
        }
    }
}

macro_rules! user_errors {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::User(e.to_string())
            }
        }
    )*};
}
user_errors!(SyntaxError, CheckError, LtrTypeError);

impl From<TranslateError> for CliError {
    fn from(e: TranslateError) -> Self {
        match e {
            TranslateError::InternalTypeError { .. } => CliError::Internal(e.to_string()),
            other => CliError::User(other.to_string()),
        }
    }
}

impl From<RewriteError> for CliError {
    fn from(e: RewriteError) -> Self {
        match e {
            RewriteError::TypeNotPreserved { .. } => CliError::Internal(e.to_string()),
            other => CliError::User(other.to_string()),
        }
    }
}

impl From<CpsError> for CliError {
    fn from(e: CpsError) -> Self {
        match e {
            CpsError::Translate(t) => t.into(),
            other => CliError::User(other.to_string()),
        }
    }
}

impl From<WiringError> for CliError {
    fn from(e: WiringError) -> Self {
        match e {
            WiringError::NotLinear(_) | WiringError::HigherOrderAtom(_) => {
                CliError::User(e.to_string())
            }
            other => CliError::Internal(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Json,
    Dot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Calculus {
    Dcll,
    Letrec,
}

/// Type checking, translation, rewriting and wiring semantics for DCLL and
/// the letrec calculus.
///
/// Inputs are judgements `Γ ; Δ |- M` (DCLL) or `Γ |- t` (letrec), given
/// inline, as `@path` to read a file, or as `-` to read standard input.
#[derive(Debug, Parser)]
#[command(name = "dcll", version)]
struct Cli {
    /// Output format; `dot` is only meaningful for wirings.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Maximum number of rewrite steps.
    #[arg(long, global = true)]
    budget: Option<usize>,
    /// TOML configuration file.
    #[arg(long, global = true, env = "DCLL_CONFIG")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and typecheck a judgement.
    Check { calculus: Calculus, input: String },
    /// Translate a DCLL judgement into the letrec calculus.
    Translate {
        input: String,
        /// Normalize the translation.
        #[arg(long)]
        normalize: bool,
    },
    /// Normalize a judgement's term.
    Normalize {
        calculus: Calculus,
        input: String,
        /// Print one `rule @ path` line per step.
        #[arg(long)]
        trace: bool,
    },
    /// Decide equality of two terms in the context of the left judgement.
    Eq {
        calculus: Calculus,
        lhs: String,
        /// A term over the left judgement's context.
        rhs: String,
        /// Compare the translations of two DCLL terms instead.
        #[arg(long)]
        via_translation: bool,
    },
    /// Compare the translation with call-by-name CPS on a pure term.
    Cps { input: String },
    /// Compute the port permutation of a purely linear DCLL judgement.
    Wiring { input: String },
}

struct Run {
    format: Format,
    rewrite: RewriteConfig,
    env: BaseTypeEnv,
    supply: FreshSupply,
}

/// Printed output and the exit code it carries.
struct Report {
    text: String,
    code: u8,
}

impl Report {
    fn ok(text: String) -> Self {
        Report { text, code: 0 }
    }
}

fn read_input(arg: &str) -> Result<String, CliError> {
    if arg == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| CliError::User(format!("cannot read standard input: {e}")))?;
        Ok(s)
    } else if let Some(path) = arg.strip_prefix('@') {
        std::fs::read_to_string(path)
            .map_err(|e| CliError::User(format!("cannot read {path}: {e}")))
    } else {
        Ok(arg.to_string())
    }
}

fn json_out(kind: &str, body: Value) -> String {
    let mut v = json!({ "schema_version": SCHEMA_VERSION, "kind": kind });
    if let (Value::Object(dst), Value::Object(src)) = (&mut v, body) {
        dst.extend(src);
    }
    serde_json::to_string_pretty(&v).expect("values serialize")
}

fn to_value(v: &impl Serialize) -> Value {
    serde_json::to_value(v).expect("values serialize")
}

impl Run {
    fn dcll(&mut self, input: &str) -> Result<Judgement, CliError> {
        Ok(parse_dcll_judgement(&read_input(input)?, &mut self.supply)?)
    }

    fn translation(&mut self, input: &str) -> Result<TranslationOutput, CliError> {
        let j = self.dcll(input)?;
        let typed = typecheck_dcll(&j.ctx, &j.term)?;
        Ok(translate(&typed, &self.env, &mut self.supply)?)
    }

    fn no_dot(&self, what: &str) -> Result<(), CliError> {
        if self.format == Format::Dot {
            return Err(CliError::User(format!(
                "--format dot is not available for {what}"
            )));
        }
        Ok(())
    }

    fn check(&mut self, calculus: Calculus, input: &str) -> Result<Report, CliError> {
        self.no_dot("check")?;
        let (term, ty) = match calculus {
            Calculus::Dcll => {
                let j = self.dcll(input)?;
                let t = typecheck_dcll(&j.ctx, &j.term)?;
                (t.term.to_string(), t.ty.to_string())
            }
            Calculus::Letrec => {
                let j = parse_ltr_judgement(&read_input(input)?, &mut self.supply)?;
                let ty = typecheck_ltr(&j.ctx, &j.term)?;
                (j.term.to_string(), ty.to_string())
            }
        };
        Ok(Report::ok(match self.format {
            Format::Json => json_out("check", json!({ "term": term, "type": ty })),
            _ => ty,
        }))
    }

    fn translate(&mut self, input: &str, normalize: bool) -> Result<Report, CliError> {
        let out = self.translation(input)?;
        let normal = if normalize {
            Some(normalize_ltr(
                &out.ctx(),
                &out.term,
                &self.rewrite,
                &mut self.supply,
            )?)
        } else {
            None
        };
        let code = if normal.as_ref().is_some_and(|n| n.exhausted) {
            2
        } else {
            0
        };
        let text = match self.format {
            Format::Dot => {
                let term = normal.as_ref().map_or(&out.sugared, |n| &n.term);
                let (w, fb) = wiring_of_term(&out, term)?;
                to_dot(&w, &fb)
            }
            Format::Json => json_out(
                "translation",
                json!({ "translation": to_value(&out), "normal_form": to_value(&normal) }),
            ),
            Format::Text => {
                let term = normal.as_ref().map_or(&out.sugared, |n| &n.term);
                format!("{term}\n: {}", out.ty)
            }
        };
        Ok(Report { text, code })
    }

    fn normalize(
        &mut self,
        calculus: Calculus,
        input: &str,
        trace: bool,
    ) -> Result<Report, CliError> {
        self.no_dot("normalize")?;
        let cfg = if trace {
            self.rewrite.traced()
        } else {
            self.rewrite
        };
        let (term, value, exhausted, lines) = match calculus {
            Calculus::Dcll => {
                let j = self.dcll(input)?;
                typecheck_dcll(&j.ctx, &j.term)?;
                let n = normalize_dcll(&j.ctx, &j.term, &cfg, &mut self.supply);
                (n.term.to_string(), to_value(&n), n.exhausted, n.trace)
            }
            Calculus::Letrec => {
                let j = parse_ltr_judgement(&read_input(input)?, &mut self.supply)?;
                typecheck_ltr(&j.ctx, &j.term)?;
                let n = normalize_ltr(&j.ctx, &j.term, &cfg, &mut self.supply)?;
                (n.term.to_string(), to_value(&n), n.exhausted, n.trace)
            }
        };
        let text = match self.format {
            Format::Json => json_out("normal_form", json!({ "result": value })),
            _ => {
                let mut s = lines.join("\n");
                if !s.is_empty() {
                    s.push('\n');
                }
                if exhausted {
                    s.push_str("budget exhausted\n");
                }
                s + &term
            }
        };
        Ok(Report {
            text,
            code: if exhausted { 2 } else { 0 },
        })
    }

    fn eq(
        &mut self,
        calculus: Calculus,
        lhs: &str,
        rhs: &str,
        via: bool,
    ) -> Result<Report, CliError> {
        self.no_dot("eq")?;
        let rhs = read_input(rhs)?;
        let (label, value, text) = match (calculus, via) {
            (Calculus::Letrec, true) => {
                return Err(CliError::User(
                    "--via-translation applies to dcll only".into(),
                ))
            }
            (Calculus::Letrec, false) => {
                let j = parse_ltr_judgement(&read_input(lhs)?, &mut self.supply)?;
                let r = parse_ltr(&rhs, &mut self.supply)?;
                let (a, b) = (typecheck_ltr(&j.ctx, &j.term)?, typecheck_ltr(&j.ctx, &r)?);
                if a != b {
                    return Err(CliError::User(format!("sides have types {a} and {b}")));
                }
                let v = check_equal_ltr(&j.ctx, &j.term, &r, &self.rewrite, &mut self.supply)?;
                (v.label(), to_value(&v), verdict_text(&v))
            }
            (Calculus::Dcll, _) => {
                let j = self.dcll(lhs)?;
                let r = parse_dcll_term(&rhs, &mut self.supply)?;
                let (a, b) = (
                    typecheck_dcll(&j.ctx, &j.term)?,
                    typecheck_dcll(&j.ctx, &r)?,
                );
                if a.ty != b.ty {
                    return Err(CliError::User(format!(
                        "sides have types {} and {}",
                        a.ty, b.ty
                    )));
                }
                if via {
                    let ta = translate(&a, &self.env, &mut self.supply)?;
                    let tb = translate(&b, &self.env, &mut self.supply)?;
                    let v = check_equal_ltr(
                        &ta.ctx(),
                        &ta.term,
                        &tb.term,
                        &self.rewrite,
                        &mut self.supply,
                    )?;
                    (v.label(), to_value(&v), verdict_text(&v))
                } else {
                    let v = check_equal_dcll(&j.ctx, &j.term, &r, &self.rewrite, &mut self.supply);
                    (v.label(), to_value(&v), verdict_text(&v))
                }
            }
        };
        let code = match label {
            "Equal" => 0,
            "Unknown" => 2,
            _ => 4,
        };
        let text = match self.format {
            Format::Json => json_out("equality", json!({ "result": value })),
            _ => text,
        };
        Ok(Report { text, code })
    }

    fn cps(&mut self, input: &str) -> Result<Report, CliError> {
        self.no_dot("cps")?;
        let j = self.dcll(input)?;
        if !j.ctx.delta.is_empty() {
            return Err(CliError::User(
                "the CPS comparison needs an empty linear context".into(),
            ));
        }
        let r = check_cps_coincidence(&j.ctx.gamma, &j.term, &self.env, &mut self.supply)?;
        let text = match self.format {
            Format::Json => json_out("cps", json!({ "result": to_value(&r) })),
            _ => {
                let verdict = match &r.mismatch {
                    None => "coincide".to_string(),
                    Some(m) => format!("differ at {}: {} vs {}", m.path, m.translated, m.cps),
                };
                format!(
                    "translation: {}\ncps:         {}\n{verdict}",
                    r.translated, r.cps
                )
            }
        };
        Ok(Report {
            text,
            code: if r.coincide { 0 } else { 4 },
        })
    }

    fn wiring(&mut self, input: &str) -> Result<Report, CliError> {
        let out = self.translation(input)?;
        let (w, fb) = wiring_of_term(&out, &out.sugared)?;
        w.validate()?;
        Ok(Report::ok(match self.format {
            Format::Dot => to_dot(&w, &fb),
            Format::Json => json_out(
                "wiring",
                json!({ "wiring": to_value(&w), "feedback": to_value(&fb) }),
            ),
            Format::Text => wiring_text(&w),
        }))
    }
}

fn wiring_text(w: &Wiring) -> String {
    w.outputs
        .iter()
        .zip(w.sources())
        .map(|(o, i)| format!("{i} -> {}", o.name))
        .collect::<Vec<_>>()
        .join("\n")
}

fn verdict_text<T: std::fmt::Display>(v: &EqVerdict<T>) -> String {
    match v {
        EqVerdict::Equal { normal_form } => format!("Equal\nnormal form: {normal_form}"),
        EqVerdict::NotEqualWitness { left, right } => {
            format!("NotEqual\nleft:  {left}\nright: {right}")
        }
        EqVerdict::Unknown { left, right } => format!("Unknown\nleft:  {left}\nright: {right}"),
    }
}

fn run(cli: Cli) -> Result<Report, CliError> {
    let cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let budget = cli
        .budget
        .or(cfg.rewrite_budget)
        .unwrap_or(RewriteConfig::default().max_steps);
    if budget == 0 {
        return Err(CliError::User("--budget must be positive".into()));
    }
    let mut r = Run {
        format: cli.format.or(cfg.output_format).unwrap_or(Format::Text),
        rewrite: RewriteConfig::with_budget(budget),
        env: cfg.base_env()?,
        supply: FreshSupply::new(),
    };
    match &cli.command {
        Command::Check { calculus, input } => r.check(*calculus, input),
        Command::Translate { input, normalize } => r.translate(input, *normalize),
        Command::Normalize {
            calculus,
            input,
            trace,
        } => r.normalize(*calculus, input, *trace),
        Command::Eq {
            calculus,
            lhs,
            rhs,
            via_translation,
        } => r.eq(*calculus, lhs, rhs, *via_translation),
        Command::Cps { input } => r.cps(input),
        Command::Wiring { input } => r.wiring(input),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(report) => {
            println!("{}", report.text.trim_end());
            ExitCode::from(report.code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
