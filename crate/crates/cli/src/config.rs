use std::collections::BTreeMap;
use std::path::Path;

use dcll_letrec::letrec::parse_ltr_type;
use dcll_letrec::translate::BaseTypeEnv;
use serde::Deserialize;

use crate::{CliError, Format};

/// Contents of the TOML configuration file. Every key is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    /// `name = ["<positive type>", "<negative type>"]`.
    #[serde(default)]
    pub base_types: BTreeMap<String, [String; 2]>,
    /// Reject base types missing from `base_types` instead of polarizing them.
    #[serde(default)]
    pub strict_base_types: bool,
    pub rewrite_budget: Option<usize>,
    pub output_format: Option<Format>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::User(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Config =
            toml::from_str(text).map_err(|e| CliError::User(format!("invalid config: {e}")))?;
        if cfg.rewrite_budget == Some(0) {
            return Err(CliError::User("rewrite_budget must be positive".into()));
        }
        for name in cfg.base_types.keys() {
            let mut chars = name.chars();
            let ok = chars.next().is_some_and(|c| c.is_ascii_alphabetic())
                && chars.all(|c| c.is_ascii_alphanumeric() || c == '_');
            if !ok {
                return Err(CliError::User(format!("invalid base type name `{name}`")));
            }
        }
        Ok(cfg)
    }

    pub fn base_env(&self) -> Result<BaseTypeEnv, CliError> {
        let mut env = if self.strict_base_types {
            BaseTypeEnv::strict()
        } else {
            BaseTypeEnv::polarized()
        };
        for (name, [pos, neg]) in &self.base_types {
            let parse = |t: &str| {
                parse_ltr_type(t).map_err(|e| CliError::User(format!("base type {name}: {e}")))
            };
            env.insert(name, parse(pos)?, parse(neg)?);
        }
        Ok(env)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use dcll_letrec::letrec::LtrType;

    #[test]
    fn parses_all_keys() {
        let cfg = Config::parse(
            "rewrite_budget = 50\noutput_format = \"json\"\n[base_types]\no = [\"1\", \"o\"]\n",
        )
        .unwrap();
        assert_eq!(cfg.rewrite_budget, Some(50));
        assert_eq!(cfg.output_format, Some(Format::Json));
        let p = cfg.base_env().unwrap().get("o").unwrap();
        assert_eq!(p.pos, LtrType::unit());
    }

    #[test]
    fn rejects_bad_values() {
        assert!(Config::parse("rewrite_budget = 0").is_err());
        assert!(Config::parse("[base_types]\n\"9x\" = [\"a\", \"b\"]").is_err());
        assert!(Config::parse("colour = 1").is_err());
    }
}
