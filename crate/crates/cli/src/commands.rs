use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use cofin::builder::{self, BuildConfig, BuildError, HitGoal};
use cofin::eval::GroundRep;
use cofin::poset::PosetMode;
use cofin::suites::{self, GroupPoset};
use cofin::suslin::{self, SuslinPoset};
use cofin::templates::{self, BrendleParams, TemplateFile, TemplateOrder};

pub const SCHEMA: &str = "1";
pub const REPORT_DIR_VAR: &str = "COFIN_REPORT_DIR";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

fn config_err(msg: impl ToString) -> CliError {
    CliError::Config(msg.to_string())
}

fn required<T>(v: Option<T>, flag: &str) -> Result<T, CliError> {
    v.ok_or_else(|| config_err(format!("missing --{flag}")))
}

fn positive<T: PartialOrd + Default>(v: T, flag: &str) -> Result<T, CliError> {
    if v > T::default() {
        Ok(v)
    } else {
        Err(config_err(format!("--{flag} must be positive")))
    }
}

pub struct Outcome {
    /// File name stem derived from the effective config.
    pub stem: String,
    pub config: Value,
    pub passed: bool,
    pub report: Value,
    pub csv: Option<String>,
}

pub trait Command: DeserializeOwned + Default {
    const NAME: &'static str;
    /// Fills unset flags from the config file.
    fn or(self, file: Self) -> Self;
    fn execute(self) -> Result<Outcome, CliError>;
}

pub struct Written {
    pub path: PathBuf,
    pub passed: bool,
}

pub fn run<C: Command>(args: C, config: Option<&Path>, out: Option<PathBuf>) -> Result<Written, CliError> {
    let args = match config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
            let file: C = serde_json::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
            args.or(file)
        }
        None => args,
    };
    let outcome = args.execute()?;
    let path = out.unwrap_or_else(|| {
        let dir = std::env::var_os(REPORT_DIR_VAR).map_or_else(|| PathBuf::from("reports"), PathBuf::from);
        dir.join(format!("{}.json", outcome.stem))
    });
    let envelope = json!({
        "schema": SCHEMA,
        "command": C::NAME,
        "config": outcome.config,
        "passed": outcome.passed,
        "report": outcome.report,
    });
    let io = |source| CliError::Io {
        path: path.clone(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io)?;
    }
    let mut text = serde_json::to_string_pretty(&envelope).expect("report serializes");
    text.push('\n');
    fs::write(&path, text).map_err(io)?;
    if let Some(csv) = outcome.csv {
        let csv_path = path.with_extension("csv");
        fs::write(&csv_path, csv).map_err(|source| CliError::Io {
            path: csv_path.clone(),
            source,
        })?;
        eprintln!("summary written to {}", csv_path.display());
    }
    Ok(Written {
        path,
        passed: outcome.passed,
    })
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report serializes")
}

#[derive(Args, Default, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct BuildArgs {
    /// cofinitary, adp, edf or mad.
    #[arg(long)]
    pub mode: Option<PosetMode>,
    #[arg(long)]
    pub generators: Option<u32>,
    /// Every map must cover `[0, points)`.
    #[arg(long)]
    pub points: Option<u64>,
    /// Freeze every word up to this length.
    #[arg(long)]
    pub max_word_len: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Largest value a chooser may pick.
    #[arg(long)]
    pub ceiling: Option<u64>,
    /// Also write a per-word CSV summary next to the report.
    #[arg(long)]
    pub csv: bool,
    /// Hit goals; config file only.
    #[arg(skip)]
    pub hits: Option<Vec<HitGoal>>,
}

impl Command for BuildArgs {
    const NAME: &'static str = "build-group";

    fn or(self, file: Self) -> Self {
        BuildArgs {
            mode: self.mode.or(file.mode),
            generators: self.generators.or(file.generators),
            points: self.points.or(file.points),
            max_word_len: self.max_word_len.or(file.max_word_len),
            seed: self.seed.or(file.seed),
            ceiling: self.ceiling.or(file.ceiling),
            csv: self.csv || file.csv,
            hits: self.hits.or(file.hits),
        }
    }

    fn execute(self) -> Result<Outcome, CliError> {
        let mode = self.mode.unwrap_or(PosetMode::Cofinitary);
        let generators = positive(required(self.generators, "generators")?, "generators")?;
        let points = positive(required(self.points, "points")?, "points")?;
        let words = positive(required(self.max_word_len, "max-word-len")?, "max-word-len")?;
        let seed = required(self.seed, "seed")?;
        let mut config = BuildConfig::new(mode, generators, points, words, seed);
        config.value_ceiling = self.ceiling;
        config.hits = self.hits.unwrap_or_default();
        let stem = format!("build-group-{mode}-g{generators}-p{points}-w{words}-s{seed}");
        let rho = GroundRep::empty();
        let (report, violations, error) = match builder::build(&config, &rho) {
            Ok(report) => {
                let mut v = builder::check_totality(&report);
                let laws = match mode {
                    PosetMode::Cofinitary => builder::verify_cofinitary(&report, &rho),
                    _ => builder::verify_variant(&report, &rho),
                };
                v.extend(laws.err().unwrap_or_default());
                v.extend(builder::check_hits(&report, &config));
                (Some(report), v, None)
            }
            Err(BuildError::InvalidConfig(msg)) => return Err(config_err(msg)),
            Err(e) => {
                eprintln!("build aborted: {e}");
                (e.partial().cloned(), Vec::new(), Some(e.to_string()))
            }
        };
        for v in violations.iter().take(10) {
            eprintln!("violation: {v}");
        }
        let passed = error.is_none() && violations.is_empty();
        Ok(Outcome {
            stem,
            config: to_value(&config),
            passed,
            csv: self.csv.then(|| report.as_ref().map(|r| r.csv_summary())).flatten(),
            report: json!({
                "error": error,
                "violations": to_value(&violations),
                "build": to_value(&report),
            }),
        })
    }
}

#[derive(Args, Default, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct TemplateArgs {
    /// Level sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub lambdas: Option<Vec<u32>>,
    #[arg(long)]
    pub omega1: Option<u32>,
    /// Length of the first coordinate; defaults to the largest level.
    #[arg(long)]
    pub lambda: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Check a template read from this JSON file instead.
    #[arg(long, conflicts_with_all = ["lambdas", "omega1", "lambda"])]
    pub file: Option<PathBuf>,
}

#[derive(Serialize)]
struct TemplateSummary {
    elements: usize,
    l0: usize,
    l1: usize,
    ideal: usize,
    axioms_ok: bool,
    violations: Vec<templates::AxiomViolation>,
    rank: Option<usize>,
}

fn summarize(t: &TemplateOrder) -> TemplateSummary {
    let (axioms_ok, violations) = match t.check_axioms() {
        Ok(()) => (true, Vec::new()),
        Err(v) => (false, v),
    };
    for v in &violations {
        eprintln!("axiom violated: {v}");
    }
    TemplateSummary {
        elements: t.len(),
        l0: t.l0().count_ones(..),
        l1: t.l1().count_ones(..),
        ideal: t.ideal().len(),
        axioms_ok,
        violations,
        rank: if axioms_ok { t.rank().ok() } else { None },
    }
}

impl Command for TemplateArgs {
    const NAME: &'static str = "template";

    fn or(self, file: Self) -> Self {
        TemplateArgs {
            lambdas: self.lambdas.or(file.lambdas),
            omega1: self.omega1.or(file.omega1),
            lambda: self.lambda.or(file.lambda),
            seed: self.seed.or(file.seed),
            file: self.file.or(file.file),
        }
    }

    fn execute(self) -> Result<Outcome, CliError> {
        if let Some(path) = self.file {
            let text = fs::read_to_string(&path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
            let file: TemplateFile =
                serde_json::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
            let t = file.into_template().map_err(config_err)?;
            let summary = summarize(&t);
            let stem = path
                .file_stem()
                .map_or("template".into(), |s| s.to_string_lossy().into_owned());
            return Ok(Outcome {
                stem: format!("template-{stem}"),
                config: json!({ "file": path }),
                passed: summary.axioms_ok,
                report: to_value(&summary),
                csv: None,
            });
        }
        let lambdas = required(self.lambdas, "lambdas")?;
        let omega1 = required(self.omega1, "omega1")?;
        let seed = required(self.seed, "seed")?;
        let mut params = BrendleParams::seeded(lambdas, omega1, seed).map_err(config_err)?;
        if self.lambda.is_some() {
            params.lambda = self.lambda;
            params.validate().map_err(config_err)?;
        }
        let stem = format!(
            "template-{}-w{omega1}-s{seed}",
            params.lambdas.iter().map(u32::to_string).collect::<Vec<_>>().join("_")
        );
        let (layout, t) = templates::brendle_build(&params).map_err(config_err)?;
        let summary = summarize(&t);
        let nesting = layout.nesting_violations();
        for v in nesting.iter().take(10) {
            eprintln!("nesting violated: {} {} ({})", v.x, v.y, v.detail);
        }
        Ok(Outcome {
            stem,
            config: json!({ "params": params, "seed": seed }),
            passed: summary.axioms_ok && nesting.is_empty() && summary.rank.is_some(),
            report: json!({
                "positions": layout.len(),
                "relevant": layout.relevant_indices().len(),
                "nesting_violations": nesting,
                "template": summary,
            }),
            csv: None,
        })
    }
}

#[derive(Args, Default, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct SuslinArgs {
    /// hechler or localization.
    #[arg(long)]
    pub poset: Option<SuslinPoset>,
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl Command for SuslinArgs {
    const NAME: &'static str = "suslin";

    fn or(self, file: Self) -> Self {
        SuslinArgs {
            poset: self.poset.or(file.poset),
            n: self.n.or(file.n),
            samples: self.samples.or(file.samples),
            seed: self.seed.or(file.seed),
        }
    }

    fn execute(self) -> Result<Outcome, CliError> {
        let poset = required(self.poset, "poset")?;
        let n = positive(required(self.n, "n")?, "n")?;
        let samples = positive(self.samples.unwrap_or(10_000), "samples")?;
        let seed = required(self.seed, "seed")?;
        let report = suslin::n_suslin_trial(poset, n, samples, seed);
        eprintln!("{} failures, {} unsound meets", report.failures, report.unsound_meets);
        Ok(Outcome {
            stem: format!(
                "suslin-{}-n{n}-k{samples}-s{seed}",
                to_value(&poset).as_str().unwrap_or("poset")
            ),
            config: json!({ "poset": poset, "n": n, "samples": samples, "seed": seed }),
            passed: report.failures == 0 && report.unsound_meets == 0,
            report: to_value(&report),
            csv: None,
        })
    }
}

#[derive(Args, Default, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct FfpArgs {
    /// cofinitary, adp, edf or mad.
    #[arg(long)]
    pub mode: Option<PosetMode>,
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl Command for FfpArgs {
    const NAME: &'static str = "ffp-suite";

    fn or(self, file: Self) -> Self {
        FfpArgs {
            mode: self.mode.or(file.mode),
            samples: self.samples.or(file.samples),
            seed: self.seed.or(file.seed),
        }
    }

    fn execute(self) -> Result<Outcome, CliError> {
        let mode = required(self.mode, "mode")?;
        let samples = positive(self.samples.unwrap_or(500), "samples")?;
        let seed = required(self.seed, "seed")?;
        let poset = GroupPoset {
            mode,
            rho: GroundRep::empty(),
        };
        let report = suites::ffp_axiom_suite(&poset, samples, seed);
        for c in report.clauses.iter().filter(|c| c.failures > 0) {
            eprintln!("{}: {} of {} failed", c.clause, c.failures, c.checked);
        }
        Ok(Outcome {
            stem: format!("ffp-suite-{mode}-k{samples}-s{seed}"),
            config: json!({ "mode": mode, "samples": samples, "seed": seed }),
            passed: report.passed(),
            report: to_value(&report),
            csv: None,
        })
    }
}

#[derive(Args, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HitArgs {
    #[arg(long)]
    pub generators: Option<u32>,
    /// Side words per sampled condition.
    #[arg(long)]
    pub words: Option<usize>,
    /// Search above every N up to this bound.
    #[arg(long = "maxN")]
    #[serde(rename = "maxN")]
    pub max_n: Option<u64>,
    #[arg(long)]
    pub window: Option<u64>,
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl Command for HitArgs {
    const NAME: &'static str = "hit-density";

    fn or(self, file: Self) -> Self {
        HitArgs {
            generators: self.generators.or(file.generators),
            words: self.words.or(file.words),
            max_n: self.max_n.or(file.max_n),
            window: self.window.or(file.window),
            samples: self.samples.or(file.samples),
            seed: self.seed.or(file.seed),
        }
    }

    fn execute(self) -> Result<Outcome, CliError> {
        let generators = positive(required(self.generators, "generators")?, "generators")?;
        let words = self.words.unwrap_or(4);
        let max_n = required(self.max_n, "maxN")?;
        let window = positive(required(self.window, "window")?, "window")?;
        let samples = positive(self.samples.unwrap_or(100), "samples")?;
        let seed = required(self.seed, "seed")?;
        let report = suites::hit_density_suite(generators, words, max_n, window, samples, seed);
        eprintln!(
            "{} searches, {} not found, {} errors",
            report.searches, report.not_found, report.errors
        );
        Ok(Outcome {
            stem: format!("hit-density-g{generators}-w{words}-n{max_n}-win{window}-k{samples}-s{seed}"),
            config: json!({
                "generators": generators,
                "words": words,
                "maxN": max_n,
                "window": window,
                "samples": samples,
                "seed": seed,
            }),
            passed: report.passed(),
            report: to_value(&report),
            csv: None,
        })
    }
}
