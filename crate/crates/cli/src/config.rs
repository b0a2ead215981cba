//! Run configuration: a JSON file, overridden by `GAZESCORE_SEED`, then by
//! command-line flags.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};

use gazescore::corpus::{Regime, TestKind};
use gazescore::features::{FeatureSet, FeatureSpec};
use gazescore::scoring::DEFAULT_LAMBDA_GRID;
use gazescore::simulate::SimulationConfig;

use crate::error::CliError;

pub const SEED_ENV: &str = "GAZESCORE_SEED";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub tokens: Option<PathBuf>,
    pub fixations: Option<PathBuf>,
    pub scores: Option<PathBuf>,
    /// Plain text, one tokenized sentence per line.
    pub lm_corpus: Option<PathBuf>,
    pub lm_model: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub feature_set: String,
    pub regime: String,
    pub speed_normalized: bool,
    pub include_self_transitions: bool,
    pub lambda: f64,
    /// When set, the penalty is tuned over this grid by cross-validation.
    pub lambda_grid: Option<Vec<f64>>,
    pub folds: usize,
    pub held_out_language: Option<String>,
    pub per_language_sample: usize,
    pub loocv: bool,
    pub seed: u64,
    pub test: Option<String>,
    pub max_score: Option<f64>,
    pub clamp: bool,
    pub min_count: u64,
    pub simulation: SimulationSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            tokens: None,
            fixations: None,
            scores: None,
            lm_corpus: None,
            lm_model: None,
            out_dir: None,
            feature_set: "wfc".into(),
            regime: "FIXED".into(),
            speed_normalized: true,
            include_self_transitions: false,
            lambda: 1.0,
            lambda_grid: None,
            folds: 10,
            held_out_language: None,
            per_language_sample: 7,
            loocv: false,
            seed: 0,
            test: None,
            max_score: None,
            clamp: true,
            min_count: 1,
            simulation: SimulationSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationSection {
    pub sentences: usize,
    pub words_per_sentence: usize,
    /// The cohort seed is replaced by the run seed.
    pub cohort: SimulationConfig,
}

impl Default for SimulationSection {
    fn default() -> Self {
        SimulationSection {
            sentences: 40,
            words_per_sentence: 12,
            cohort: SimulationConfig::default(),
        }
    }
}

/// Flags shared by the pipeline subcommands; each one overrides the
/// matching config field.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub tokens: Option<PathBuf>,
    #[arg(long)]
    pub fixations: Option<PathBuf>,
    #[arg(long)]
    pub scores: Option<PathBuf>,
    #[arg(long)]
    pub lm_corpus: Option<PathBuf>,
    #[arg(long)]
    pub lm_model: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// wp, sclusters, transitions or wfc.
    #[arg(long)]
    pub feature_set: Option<String>,
    /// FIXED or ANY.
    #[arg(long)]
    pub regime: Option<String>,
    #[arg(long)]
    pub speed_normalized: Option<bool>,
    #[arg(long)]
    pub include_self_transitions: Option<bool>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Comma-separated penalties to tune over.
    #[arg(long, value_delimiter = ',')]
    pub lambda_grid: Option<Vec<f64>>,
    /// Tune over the default grid.
    #[arg(long, conflicts_with = "lambda_grid")]
    pub tune: bool,
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long)]
    pub held_out_language: Option<String>,
    #[arg(long)]
    pub per_language_sample: Option<usize>,
    #[arg(long)]
    pub loocv: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    /// MET, TOEFL or SYNTHETIC.
    #[arg(long)]
    pub test: Option<String>,
    #[arg(long)]
    pub max_score: Option<f64>,
    #[arg(long)]
    pub no_clamp: bool,
    #[arg(long)]
    pub min_count: Option<u64>,
}

impl Overrides {
    /// Reads the config file (if any) and applies the environment and flags.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut c = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
                serde_json::from_str(&text)
                    .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))?
            }
            None => RunConfig::default(),
        };
        if let Ok(raw) = std::env::var(SEED_ENV) {
            c.seed = raw
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("{SEED_ENV} must be a non-negative integer, got `{raw}`")))?;
        }
        macro_rules! set {
            ($($field:ident),+) => {
                $(if let Some(v) = &self.$field { c.$field = v.clone().into(); })+
            };
        }
        set!(tokens, fixations, scores, lm_corpus, lm_model, out_dir, held_out_language, test);
        if let Some(v) = &self.feature_set {
            c.feature_set = v.clone();
        }
        if let Some(v) = &self.regime {
            c.regime = v.clone();
        }
        if let Some(v) = self.speed_normalized {
            c.speed_normalized = v;
        }
        if let Some(v) = self.include_self_transitions {
            c.include_self_transitions = v;
        }
        if let Some(v) = self.lambda {
            c.lambda = v;
        }
        if let Some(v) = &self.lambda_grid {
            c.lambda_grid = Some(v.clone());
        }
        if self.tune {
            c.lambda_grid = Some(DEFAULT_LAMBDA_GRID.to_vec());
        }
        if let Some(v) = self.folds {
            c.folds = v;
        }
        if let Some(v) = self.per_language_sample {
            c.per_language_sample = v;
        }
        if self.loocv {
            c.loocv = true;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = self.max_score {
            c.max_score = Some(v);
        }
        if self.no_clamp {
            c.clamp = false;
        }
        if let Some(v) = self.min_count {
            c.min_count = v;
        }
        Ok(c)
    }
}

fn required<'a>(value: &'a Option<PathBuf>, field: &str) -> Result<&'a Path, CliError> {
    value
        .as_deref()
        .ok_or_else(|| CliError::Usage(format!("config field `{field}` is required")))
}

impl RunConfig {
    /// A path that must already exist.
    pub fn input(&self, field: &str) -> Result<&Path, CliError> {
        let path = required(self.path_field(field), field)?;
        if !path.exists() {
            return Err(CliError::Usage(format!("config field `{field}`: {} does not exist", path.display())));
        }
        Ok(path)
    }

    /// An input that may be absent, but must exist when given.
    pub fn optional_input(&self, field: &str) -> Result<Option<&Path>, CliError> {
        match self.path_field(field) {
            None => Ok(None),
            Some(_) => self.input(field).map(Some),
        }
    }

    /// A path the command will write to.
    pub fn output(&self, field: &str) -> Result<&Path, CliError> {
        required(self.path_field(field), field)
    }

    fn path_field(&self, field: &str) -> &Option<PathBuf> {
        match field {
            "tokens" => &self.tokens,
            "fixations" => &self.fixations,
            "scores" => &self.scores,
            "lm_corpus" => &self.lm_corpus,
            "lm_model" => &self.lm_model,
            "out_dir" => &self.out_dir,
            other => unreachable!("no path field `{other}`"),
        }
    }

    pub fn feature_spec(&self) -> Result<FeatureSpec, CliError> {
        let set: FeatureSet = self
            .feature_set
            .parse()
            .map_err(|e| CliError::Usage(format!("config field `feature_set`: {e}")))?;
        let regime: Regime = self
            .regime
            .parse()
            .map_err(|e| CliError::Usage(format!("config field `regime`: {e}")))?;
        let spec = FeatureSpec {
            include_self_transitions: self.include_self_transitions,
            ..FeatureSpec::new(set, regime, self.speed_normalized)
        };
        spec.validate()
            .map_err(|e| CliError::Usage(format!("{e}: feature set `{set}` needs the FIXED regime")))?;
        Ok(spec)
    }

    pub fn test_kind(&self) -> Result<Option<TestKind>, CliError> {
        self.test
            .as_deref()
            .map(|t| t.parse().map_err(|e| CliError::Usage(format!("config field `test`: {e}"))))
            .transpose()
    }

    /// Checks the penalty settings shared by the prediction commands.
    pub fn check_ridge(&self) -> Result<(), CliError> {
        let bad = |l: f64| !(l.is_finite() && l >= 0.0);
        if bad(self.lambda) {
            return Err(CliError::Usage(format!("config field `lambda` must be >= 0, got {}", self.lambda)));
        }
        if let Some(grid) = &self.lambda_grid {
            if grid.is_empty() || grid.iter().any(|&l| bad(l)) {
                return Err(CliError::Usage("config field `lambda_grid` must hold values >= 0".into()));
            }
        }
        if self.folds < 2 {
            return Err(CliError::Usage("config field `folds` must be at least 2".into()));
        }
        if let Some(m) = self.max_score {
            if !(m.is_finite() && m > 0.0) {
                return Err(CliError::Usage("config field `max_score` must be positive".into()));
            }
        }
        Ok(())
    }
}
