use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::{ExperimentError, Scenario};

/// Declarative experiment description, read from TOML. Relative paths are
/// resolved against the directory holding the config file.
///
/// ```toml
/// folds = ["folds/fold_00.conll", "folds/fold_01.conll"]
/// out_of_domain = "buscape.conll"
///
/// [baseline]
/// scenario = "pt-only"
///
/// [[model]]
/// name = "brbert-base"
/// scenario = "pt-only"
/// folds = ["em/brbert_f0.tsv", "em/brbert_f1.tsv"]
/// out_of_domain = ["em/brbert_ood_f0.tsv", "em/brbert_ood_f1.tsv"]
/// ```
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Gold test folds, in fold order.
    pub folds: Vec<PathBuf>,
    /// Gold out-of-domain corpus.
    #[serde(default)]
    pub out_of_domain: Option<PathBuf>,
    #[serde(default)]
    pub baseline: Option<Baseline>,
    /// Aggregate with pooled counts instead of per-fold means.
    #[serde(default)]
    pub pooled: bool,
    #[serde(rename = "model", default)]
    pub models: Vec<ModelEntry>,
}

/// Reference row for delta-F1 columns. Without `model`, each row is compared
/// with the same model's run in `scenario`.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Baseline {
    #[serde(default)]
    pub model: Option<String>,
    pub scenario: Scenario,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelEntry {
    pub name: String,
    pub scenario: Scenario,
    /// Emission file per test fold, aligned with the top-level `folds`.
    pub folds: Vec<PathBuf>,
    /// Out-of-domain emissions: none, one shared file, or one per fold model.
    #[serde(default)]
    pub out_of_domain: Vec<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self, ExperimentError> {
        let mut cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))?;
        cfg.resolve(base_dir);
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path).map_err(|source| ExperimentError::Io {
            path: path.to_owned(),
            source,
        })?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::from_toml(&text, base)
    }

    fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        self.folds.iter_mut().for_each(fix);
        if let Some(p) = self.out_of_domain.as_mut() {
            fix(p);
        }
        for m in &mut self.models {
            m.folds.iter_mut().for_each(fix);
            m.out_of_domain.iter_mut().for_each(fix);
        }
    }

    fn check(&self) -> Result<(), ExperimentError> {
        let bad = |m: String| Err(ExperimentError::Config(m));
        if self.folds.is_empty() {
            return bad("no folds listed".into());
        }
        let mut seen = std::collections::BTreeSet::new();
        for m in &self.models {
            if m.name.is_empty() || m.name.chars().any(char::is_whitespace) {
                return bad(format!("model name {:?} must be non-empty without whitespace", m.name));
            }
            if !seen.insert((m.name.as_str(), m.scenario)) {
                return bad(format!("model {} listed twice for scenario {}", m.name, m.scenario));
            }
            if m.folds.len() != self.folds.len() {
                return bad(format!(
                    "model {} lists {} fold emission files for {} folds",
                    m.name,
                    m.folds.len(),
                    self.folds.len()
                ));
            }
            let n = m.out_of_domain.len();
            if n > 0 && self.out_of_domain.is_none() {
                return bad(format!("model {} has out-of-domain emissions but no out_of_domain corpus", m.name));
            }
            if n > 1 && n != self.folds.len() {
                return bad(format!(
                    "model {} lists {n} out-of-domain files; expected 1 or {}",
                    m.name,
                    self.folds.len()
                ));
            }
        }
        Ok(())
    }
}
