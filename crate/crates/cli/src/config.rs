//! `key=value` experiment files: one pair per line, `#` starts a comment.

use std::fmt;
use std::path::PathBuf;

pub const KEYS: [&str; 8] = [
    "spec",
    "a",
    "b",
    "input_seed",
    "model",
    "seed",
    "trials",
    "out",
];

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExperimentConfig {
    /// Scheme specification string.
    pub spec: Option<String>,
    /// Matrix files in the field text format; random inputs when absent.
    pub a: Option<PathBuf>,
    pub b: Option<PathBuf>,
    pub input_seed: Option<u64>,
    /// Straggler model, e.g. `adversarial:0,3`, `random:2@7`, `delay:0.5,1@7`.
    pub model: Option<String>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn number<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<T, ConfigError> {
    v.parse().map_err(|_| {
        ConfigError(format!(
            "line {line}: {key} must be a non-negative integer, got {v:?}"
        ))
    })
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<ExperimentConfig, ConfigError> {
        let mut cfg = ExperimentConfig::default();
        let mut seen = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split_once('#').map_or(raw, |(b, _)| b).trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body
                .split_once('=')
                .ok_or_else(|| ConfigError(format!("line {line}: expected key=value")))?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(ConfigError(format!("line {line}: unknown key {key:?}")));
            }
            if seen.contains(&key) {
                return Err(ConfigError(format!("line {line}: duplicate key {key:?}")));
            }
            seen.push(key);
            match key {
                "spec" => cfg.spec = Some(value.to_string()),
                "a" => cfg.a = Some(value.into()),
                "b" => cfg.b = Some(value.into()),
                "input_seed" => cfg.input_seed = Some(number(line, key, value)?),
                "model" => cfg.model = Some(value.to_string()),
                "seed" => cfg.seed = Some(number(line, key, value)?),
                "trials" => cfg.trials = Some(number(line, key, value)?),
                _ => cfg.out = Some(value.into()),
            }
        }
        Ok(cfg)
    }

    /// Fields set in `other` win.
    pub fn overridden_by(mut self, other: ExperimentConfig) -> ExperimentConfig {
        macro_rules! take {
            ($($f:ident),*) => { $(if other.$f.is_some() { self.$f = other.$f; })* };
        }
        take!(spec, a, b, input_seed, model, seed, trials, out);
        self
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                s.push_str(&format!("{k}={v}\n"));
            }
        };
        put("spec", self.spec.clone());
        put("a", self.a.as_ref().map(|p| p.display().to_string()));
        put("b", self.b.as_ref().map(|p| p.display().to_string()));
        put("input_seed", self.input_seed.map(|v| v.to_string()));
        put("model", self.model.clone());
        put("seed", self.seed.map(|v| v.to_string()));
        put("trials", self.trials.map(|v| v.to_string()));
        put("out", self.out.as_ref().map(|p| p.display().to_string()));
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        let text = "# demo\nspec=kind=ag-c3;curve=hermitian:u=2;t=4;r=4;s=4;m=1;n=1;p=2;N=6;seed=7\n\nseed = 3 # inline\nmodel=random:1@2\n";
        let cfg = ExperimentConfig::parse(text).unwrap();
        assert_eq!(cfg.seed, Some(3));
        assert_eq!(cfg.model.as_deref(), Some("random:1@2"));
        assert_eq!(ExperimentConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        assert!(ExperimentConfig::parse("colour=red").is_err());
        assert!(ExperimentConfig::parse("seed").is_err());
        assert!(ExperimentConfig::parse("seed=-1").is_err());
        assert!(ExperimentConfig::parse("seed=1\nseed=2").is_err());
    }

    #[test]
    fn overrides() {
        let base = ExperimentConfig::parse("seed=1\ntrials=5").unwrap();
        let cli = ExperimentConfig {
            seed: Some(9),
            ..Default::default()
        };
        let merged = base.overridden_by(cli);
        assert_eq!((merged.seed, merged.trials), (Some(9), Some(5)));
    }
}
