//! `spml` — spectral clustering of signed graphs with power mean Laplacians
//! and a signed stochastic block model laboratory.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use spml_cli::config::KvConfig;
use spml_cli::experiments;
use spml_cli::methods::{parse_method, ShiftChoice};

#[derive(Parser)]
#[command(
    name = "spml",
    about = "Signed power mean Laplacian clustering and block model experiments",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Base random seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Flat key-value config file; command line flags override file keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Diagonal shift: a number or "auto" for log10(1+|p|)+1e-6.
    #[arg(long)]
    shift: Option<String>,
    /// Methods, comma separated: pm:<p>, sn, bn, am, gm, bethe.
    #[arg(long)]
    method: Option<String>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    threads: Option<usize>,
}

impl CommonArgs {
    fn merged_config(&self) -> Result<KvConfig> {
        let mut cfg = match &self.config {
            Some(path) => KvConfig::from_file(path)?,
            None => KvConfig::new(),
        };
        if let Some(seed) = self.seed {
            cfg.set("seed", &seed.to_string());
        }
        if let Some(shift) = &self.shift {
            cfg.set("shift", shift);
        }
        if let Some(methods) = &self.method {
            cfg.set("methods", methods);
        }
        if let Some(threads) = self.threads {
            cfg.set("threads", &threads.to_string());
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Sample a block model graph into a signed edge list file.
    Generate {
        #[command(flatten)]
        common: CommonArgs,
        /// Model: ssbm, lsbm, or cbm (parameters via --config or defaults).
        #[arg(long, default_value = "ssbm")]
        model: String,
        /// Ground-truth labels output path.
        #[arg(long)]
        labels_out: Option<PathBuf>,
    },
    /// Cluster a signed edge list file.
    Cluster {
        #[command(flatten)]
        common: CommonArgs,
        /// Input edge list path.
        #[arg(long, value_name = "FILE")]
        input: PathBuf,
        /// Number of clusters.
        #[arg(short, long)]
        k: usize,
        /// Force or forbid the matrix-free path (default: automatic).
        #[arg(long)]
        matrix_free: Option<bool>,
        /// Drop vertices isolated in either layer before clustering.
        #[arg(long)]
        drop_isolated: bool,
    },
    /// Clustering-error map over the block model parameter grid.
    PhaseDiagram {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// One layer fixed, the other swept; also emits an embedding panel.
    LayerSweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Embedding panel output path (default: <out>.embedding.csv).
        #[arg(long)]
        embedding_out: Option<PathBuf>,
    },
    /// Censored block model noise and sparsity sweeps.
    CbmSweep {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Operator-norm and eigenspace concentration measurements.
    Concentration {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Proportion of parameter space with guaranteed expected recovery.
    Regions {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Matrix-free vs dense eigensolver wall times (single-threaded).
    Timing {
        #[command(flatten)]
        common: CommonArgs,
    },
}

/// Exit codes: 0 success, 1 numeric/data failure, 2 usage errors.
fn classify(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<spml::Error>() {
            return match e {
                spml::Error::Parameter(_) | spml::Error::UnsupportedPower(_) => 2,
                _ => 1,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return 1;
        }
    }
    // config/flag-level problems are usage errors
    2
}

fn emit(doc: &spml_cli::CsvDoc, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(path) => doc.write_to(path),
        None => {
            print!("{}", doc.render());
            Ok(())
        }
    }
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Generate { common, model, labels_out } => {
            let mut cfg = common.merged_config()?;
            cfg.set("model", &model);
            let params = experiments::generate_params(&cfg)?;
            let seed = cfg.u64_or("seed", 0)?;
            let sample = spml::ssbm::sample(&params, seed)?;
            let out = common.out.clone().context("generate requires --out")?;
            let mut buf = Vec::new();
            spml::graph::write_edge_list(&sample.graph, &mut buf)?;
            std::fs::write(&out, buf).with_context(|| format!("writing {}", out.display()))?;
            if let Some(labels_path) = labels_out {
                let mut text = String::new();
                for v in 0..params.n() {
                    text.push_str(&format!("{v} {}\n", sample.truth.get(v)));
                }
                std::fs::write(&labels_path, text)
                    .with_context(|| format!("writing {}", labels_path.display()))?;
            }
            eprintln!(
                "wrote n={} graph with {}+{} edges to {}",
                params.n(),
                sample.graph.positive().edge_count(),
                sample.graph.negative().edge_count(),
                out.display()
            );
            Ok(())
        }
        Command::Cluster { common, input, k, matrix_free, drop_isolated } => {
            let cfg = common.merged_config()?;
            if k < 2 {
                anyhow::bail!("need at least two clusters, got k = {k}");
            }
            let shift = ShiftChoice::parse(&cfg.get_or("shift", "auto"))?;
            let method_name = cfg.get("methods").map(str::to_string).unwrap_or_else(|| "pm:-1".into());
            let method = parse_method(&method_name, shift, matrix_free)?;
            let seed = cfg.u64_or("seed", 0)?;
            let outcome = experiments::cluster_file(&input, &method, k, seed, drop_isolated)?;
            match &common.out {
                Some(path) => std::fs::write(path, &outcome.rendered)
                    .with_context(|| format!("writing {}", path.display()))?,
                None => print!("{}", outcome.rendered),
            }
            Ok(())
        }
        Command::PhaseDiagram { common } => {
            let cfg = common.merged_config()?;
            let doc = experiments::phase_diagram(&cfg)?;
            emit(&doc, common.out.as_ref())
        }
        Command::LayerSweep { common, embedding_out } => {
            let cfg = common.merged_config()?;
            let output = experiments::layer_sweep(&cfg)?;
            emit(&output.sweep, common.out.as_ref())?;
            let embed_path = embedding_out.or_else(|| {
                common.out.as_ref().map(|p| {
                    let mut s = p.as_os_str().to_owned();
                    s.push(".embedding.csv");
                    PathBuf::from(s)
                })
            });
            match embed_path {
                Some(path) => output.embedding.write_to(&path),
                None => {
                    print!("{}", output.embedding.render());
                    Ok(())
                }
            }
        }
        Command::CbmSweep { common } => {
            let cfg = common.merged_config()?;
            let doc = experiments::cbm_sweep(&cfg)?;
            emit(&doc, common.out.as_ref())
        }
        Command::Concentration { common } => {
            let cfg = common.merged_config()?;
            let doc = experiments::concentration(&cfg)?;
            emit(&doc, common.out.as_ref())
        }
        Command::Regions { common } => {
            let cfg = common.merged_config()?;
            let doc = experiments::regions(&cfg)?;
            emit(&doc, common.out.as_ref())
        }
        Command::Timing { common } => {
            let cfg = common.merged_config()?;
            let doc = experiments::timing(&cfg)?;
            emit(&doc, common.out.as_ref())
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(classify(&err))
        }
    }
}
