use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use specforge_core::config::RunConfig;
use specforge_core::corpus::{load_corpus_unchecked, load_taxonomy, load_territories, validate_corpus, Level};
use specforge_core::normalize::AiiMode;
use specforge_core::pipeline::{self, data_path, Written};
use specforge_core::specialization::read_report_csv;
use specforge_core::strength::read_strength_csv;
use specforge_core::synth::{self, SynthSpec};
use specforge_core::{analytics, Error};

#[derive(Parser, Debug)]
#[command(name = "specforge", version, about = "Territorial scientific specialization indicators")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct Common {
    /// TOML run configuration (or a run_manifest.json to replay).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    pubs: Option<PathBuf>,
    #[arg(long, global = true)]
    orgs: Option<PathBuf>,
    #[arg(long, global = true)]
    territories: Option<PathBuf>,
    #[arg(long, global = true)]
    taxonomy: Option<PathBuf>,
    /// Comma-separated list of province, region.
    #[arg(long, global = true, value_delimiter = ',')]
    level: Option<Vec<Level>>,
    #[arg(long, global = true)]
    aii_mode: Option<AiiMode>,
    #[arg(long, global = true)]
    threshold_region: Option<u32>,
    #[arg(long, global = true)]
    threshold_province: Option<u32>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    high_cut: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    low_cut: Option<f64>,
    #[arg(long, global = true)]
    top_k: Option<usize>,
    #[arg(long, global = true, env = "SPECFORGE_WORKERS")]
    workers: Option<usize>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for `synth`, overriding the spec file.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check corpus invariants and print a violation summary.
    Validate,
    /// Compute strength, specialization and activity data files.
    Compute,
    /// Top-k tables from computed specialization data.
    Rank,
    /// Extreme-specialization ratio tables from computed data.
    Extremes,
    /// Radar chart from computed specialization data.
    Radar {
        /// Subject categories to draw (comma-separated).
        #[arg(long, value_delimiter = ',')]
        sc: Vec<String>,
    },
    /// Map-joinable CSVs from computed data.
    Map {
        /// Subject categories to export (comma-separated); default all.
        #[arg(long, value_delimiter = ',')]
        sc: Vec<String>,
    },
    /// Generate a synthetic corpus with planted specialization.
    Synth {
        /// TOML or JSON generator spec; defaults apply when omitted.
        #[arg(long)]
        synth_spec: Option<PathBuf>,
    },
    /// Run every stage and write a run manifest.
    All,
}

enum Failure {
    Core(Error),
    Usage(String),
    Validation { violations: usize },
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Validation { .. } => 1,
            Failure::Core(e) => match e {
                Error::Parse { .. } | Error::Config(_) | Error::Spec(_) | Error::UnknownSc(_) => 2,
                _ => 1,
            },
        }
    }

    fn to_json(&self) -> serde_json::Value {
        match self {
            Failure::Core(e) => json!({"error": e.kind(), "module": e.module(), "message": e.to_string()}),
            Failure::Usage(m) => json!({"error": "UsageError", "module": "cli", "message": m}),
            Failure::Validation { violations } => json!({
                "error": "ValidationError",
                "module": "corpus",
                "message": format!("{violations} invariant violations"),
            }),
        }
    }
}

fn build_config(common: &Common) -> Result<RunConfig, Failure> {
    let mut config = match &common.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    let c = common;
    macro_rules! set {
        ($($field:ident),*) => {
            $(if let Some(v) = &c.$field { config.$field = v.clone().into(); })*
        };
    }
    set!(pubs, orgs, territories, taxonomy, aii_mode, threshold_region, threshold_province, high_cut, low_cut, top_k);
    if let Some(levels) = &c.level {
        let mut levels = levels.clone();
        levels.dedup();
        config.levels = levels;
    }
    if c.workers.is_some() {
        config.workers = c.workers;
    }
    if c.seed.is_some() {
        config.seed = c.seed;
    }
    if c.out.is_some() {
        config.out = c.out.clone();
    }
    config.absolutize_inputs();
    config.validate()?;
    Ok(config)
}

fn out_dir(config: &RunConfig) -> Result<PathBuf, Failure> {
    config
        .out
        .clone()
        .ok_or_else(|| Failure::Usage("--out is required for this command".into()))
}

fn written_json(out: &Path, written: &Written, warnings: &[String]) -> serde_json::Value {
    json!({
        "out": out.display().to_string(),
        "written": written.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
        "warnings": warnings,
    })
}

fn run(cli: Cli) -> Result<serde_json::Value, Failure> {
    if let Command::Synth { synth_spec } = &cli.command {
        return run_synth(&cli.common, synth_spec.as_deref());
    }
    let mut config = build_config(&cli.common)?;
    let workers = config.workers;
    let command = cli.command;
    pipeline::with_workers(workers, move || -> Result<serde_json::Value, Failure> {
        match command {
            Command::Validate => {
                let p = config.input_paths()?;
                let corpus = load_corpus_unchecked(p.pubs, p.orgs, p.territories, p.taxonomy, &config)?;
                let report = validate_corpus(&corpus);
                let summary = serde_json::to_value(&report).expect("report serializes");
                println!("{}", serde_json::to_string_pretty(&summary).expect("json"));
                if report.is_clean() {
                    Ok(json!(null))
                } else {
                    Err(Failure::Validation {
                        violations: report.total_violations(),
                    })
                }
            }
            Command::Compute => {
                let out = out_dir(&config)?;
                let corpus = pipeline::load(&config)?;
                let analysis = pipeline::analyze(&corpus, &config)?;
                let written = pipeline::write_compute(&out, &corpus, &analysis, &config)?;
                Ok(written_json(&out, &written, &analysis.warnings))
            }
            Command::Rank => {
                let out = out_dir(&config)?;
                let taxonomy = match &config.taxonomy {
                    Some(p) => load_taxonomy(p)?,
                    None => Default::default(),
                };
                let mut written = Vec::new();
                for &level in &config.levels {
                    let (report, _) = read_report_csv(&data_path(&out, "specialization", level))?;
                    written.extend(pipeline::write_rank(&out, &report, &taxonomy, &config)?);
                }
                Ok(written_json(&out, &written, &[]))
            }
            Command::Extremes => {
                let out = out_dir(&config)?;
                let mut written = Vec::new();
                for &level in &config.levels {
                    let (report, _) = read_report_csv(&data_path(&out, "specialization", level))?;
                    let profiles =
                        analytics::read_activity_csv(&data_path(&out, "activity", level), config.threshold(level))?;
                    written.extend(pipeline::write_extremes(&out, &report, &profiles, &config)?);
                }
                Ok(written_json(&out, &written, &[]))
            }
            Command::Radar { sc } => {
                let out = out_dir(&config)?;
                if !sc.is_empty() {
                    config.radar_scs = sc;
                }
                let registry = config.territories.as_deref().map(load_territories).transpose()?;
                let taxonomy = config.taxonomy.as_deref().map(load_taxonomy).transpose()?;
                let (report, _) = read_report_csv(&data_path(&out, "specialization", config.radar_level))?;
                let mut warnings = Vec::new();
                let written = pipeline::write_radar(
                    &out,
                    &report,
                    registry.as_ref(),
                    taxonomy.as_ref(),
                    &config,
                    &mut warnings,
                )?;
                Ok(written_json(&out, &written, &warnings))
            }
            Command::Map { sc } => {
                let out = out_dir(&config)?;
                if !sc.is_empty() {
                    config.map_scs = sc;
                }
                let path = config
                    .territories
                    .as_deref()
                    .ok_or_else(|| Failure::Usage("map needs --territories for populations".into()))?;
                let registry = load_territories(path)?;
                let mut written = Vec::new();
                for &level in &config.levels {
                    let (strength, _) = read_strength_csv(&data_path(&out, "strength", level))?;
                    let (report, _) = read_report_csv(&data_path(&out, "specialization", level))?;
                    written.extend(pipeline::write_maps(&out, &strength, &report, &registry, &config)?);
                }
                Ok(written_json(&out, &written, &[]))
            }
            Command::All => {
                let out = out_dir(&config)?;
                let summary = pipeline::run_all(&config, &out)?;
                Ok(json!({
                    "out": out.display().to_string(),
                    "outputs": summary.written.len(),
                    "manifest": summary.manifest.display().to_string(),
                    "warnings": summary.warnings,
                }))
            }
            Command::Synth { .. } => unreachable!("handled before the worker pool starts"),
        }
    })?
}

fn run_synth(common: &Common, spec_path: Option<&Path>) -> Result<serde_json::Value, Failure> {
    let mut spec = match spec_path {
        None => SynthSpec::default(),
        Some(path) => SynthSpec::from_file(path)?,
    };
    if let Some(seed) = common.seed {
        spec.seed = seed;
    }
    let out = common
        .out
        .clone()
        .ok_or_else(|| Failure::Usage("--out is required for synth".into()))?;
    std::fs::create_dir_all(&out).map_err(|e| Error::Io {
        path: out.clone(),
        source: e,
    })?;
    let generated = pipeline::with_workers(common.workers, || synth::generate(&spec))??;
    let files = synth::write_synth(&generated, &out)?;
    Ok(json!({
        "out": out.display().to_string(),
        "publications": generated.corpus.len(),
        "pubs": files.pubs.display().to_string(),
        "orgs": files.orgs.display().to_string(),
        "territories": files.territories.display().to_string(),
        "taxonomy": files.taxonomy.display().to_string(),
        "ground_truth": out.join(synth::GROUND_TRUTH_FILE).display().to_string(),
    }))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let failure = Failure::Usage(e.render().to_string().trim().to_owned());
            eprintln!("{}", failure.to_json());
            return ExitCode::from(failure.exit_code());
        }
    };
    match run(cli) {
        Ok(value) => {
            if !value.is_null() {
                println!("{}", serde_json::to_string_pretty(&value).expect("json"));
            }
            ExitCode::SUCCESS
        }
        Err(failure) => {
            eprintln!("{}", failure.to_json());
            ExitCode::from(failure.exit_code())
        }
    }
}
