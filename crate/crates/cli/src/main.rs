use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use regconv::pipeline::{
    run_pipeline, run_stage, RunConfig, RunOptions, Stage, StageReport, ELBOW,
};
use regconv::Error;

/// Compare regulatory corpora: segment, embed, cluster, analyze
/// convergence, project and evaluate.
#[derive(Debug, Parser)]
#[command(name = "regconv", version)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Run configuration (TOML).
    #[arg(long, short, global = true, env = "REGCONV_CONFIG")]
    config: Option<PathBuf>,
    /// Output directory; overrides `output_dir` from the config.
    #[arg(long, global = true, env = "REGCONV_OUT_DIR")]
    out: Option<PathBuf>,
    /// Global seed; overrides `seed` from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads. Results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Use upstream artifacts even if they came from a different config.
    #[arg(long, global = true)]
    force: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load and label the corpora.
    Ingest,
    /// Tokenize, lemmatize, tag and filter provisions.
    Preprocess,
    /// Embed provisions (TF-IDF or an external EMB1 file).
    Embed,
    /// WCSS curve over a K range and the selected K.
    Elbow {
        #[arg(long)]
        k_min: Option<usize>,
        #[arg(long)]
        k_max: Option<usize>,
    },
    /// Spherical K-means.
    Cluster {
        /// Fixed K; without it the `elbow` result is used.
        #[arg(long)]
        k: Option<usize>,
    },
    /// Convergence report.
    Analyze {
        #[arg(long)]
        top_pairs: Option<usize>,
    },
    /// t-SNE projection and scatter plot.
    Project {
        #[arg(long)]
        perplexity: Option<f64>,
        #[arg(long)]
        iterations: Option<usize>,
    },
    /// Cross-validated linear classifier on labeled provisions.
    Evaluate {
        #[arg(long)]
        folds: Option<usize>,
        /// Training preset (`default`, `bert-base`).
        #[arg(long)]
        preset: Option<String>,
    },
    /// Every stage in order.
    Run,
}

fn load_config(g: &GlobalArgs) -> Result<RunConfig, Error> {
    let path = g
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("no config given (use --config or REGCONV_CONFIG)".into()))?;
    let mut cfg = RunConfig::load(path)?;
    if let Some(out) = &g.out {
        cfg.output_dir = std::env::current_dir()
            .map(|d| d.join(out))
            .unwrap_or_else(|_| out.clone());
    }
    if let Some(seed) = g.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn print_report(r: &StageReport) {
    match (&r.skipped, &r.message) {
        (Some(reason), _) => eprintln!("{}: skipped ({reason})", r.stage),
        (None, Some(msg)) => eprintln!("{}: {msg}", r.stage),
        (None, None) => eprintln!("{}: done", r.stage),
    }
    for note in &r.notes {
        eprintln!("{}: note: {note}", r.stage);
    }
}

fn execute(cli: Cli) -> Result<(), Error> {
    let mut cfg = load_config(&cli.global)?;
    let opts = RunOptions {
        force: cli.global.force,
        threads: cli.global.threads,
    };
    let stage = match cli.command {
        Command::Run => {
            let (manifest, reports) = run_pipeline(&cfg, &opts)?;
            reports.iter().for_each(print_report);
            eprintln!(
                "run: {} artifacts in {}",
                manifest.artifacts.len(),
                cfg.output_dir().display()
            );
            return Ok(());
        }
        Command::Ingest => Stage::Ingest,
        Command::Preprocess => Stage::Preprocess,
        Command::Embed => Stage::Embed,
        Command::Elbow { k_min, k_max } => {
            if let Some(k) = k_min {
                cfg.cluster.k_min = k;
            }
            if let Some(k) = k_max {
                cfg.cluster.k_max = k;
            }
            Stage::Elbow
        }
        Command::Cluster { k } => {
            if k.is_some() {
                cfg.cluster.k = k;
            }
            Stage::Cluster
        }
        Command::Analyze { top_pairs } => {
            if let Some(n) = top_pairs {
                cfg.analyze.top_pairs = n;
            }
            Stage::Analyze
        }
        Command::Project {
            perplexity,
            iterations,
        } => {
            if let Some(p) = perplexity {
                cfg.projection.perplexity = p;
            }
            if let Some(i) = iterations {
                cfg.projection.iterations = i;
            }
            Stage::Project
        }
        Command::Evaluate { folds, preset } => {
            if let Some(f) = folds {
                cfg.eval.folds = f;
            }
            if let Some(p) = preset {
                cfg.eval.preset = p;
            }
            Stage::Evaluate
        }
    };
    let report = run_stage(&cfg, stage, &opts)?;
    print_report(&report);
    if stage == Stage::Elbow {
        let path = cfg.output_dir().join(ELBOW);
        let curve = std::fs::read_to_string(&path).map_err(|e| Error::Io { path, source: e })?;
        print!("{curve}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // messages already embed their causes
            eprintln!("error: {e}");
            ExitCode::from(e.kind().exit_code() as u8)
        }
    }
}
