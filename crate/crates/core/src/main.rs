use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use treegraph::commands::{
    cmd_evaluate, cmd_reconstruct, cmd_segment, cmd_synth, DbhInput, EvalInput, EvalOptions, ReconstructInput,
    ReconstructOptions, SynthOptions,
};
use treegraph::io::MeshFormat;
use treegraph::synth::{Degradation, SceneParams};
use treegraph::{DbhSource, RunConfig};

#[derive(Parser)]
#[command(name = "treegraph", version, about = "Tree segmentation, skeletons and biomass from forest point clouds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run configuration JSON; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(short, long, default_value = "out")]
    out: PathBuf,
}

impl Common {
    fn config(&self) -> anyhow::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(t) = self.threads {
            cfg.threads = t;
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Split a plot cloud into per-tree clouds and a label file.
    Segment {
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Skeleton, radii, volume and AGB per tree.
    Reconstruct(ReconstructArgs),
    /// MAD, MAPD and regression of estimated vs reference AGB.
    Evaluate {
        /// Pairs CSV `tree_id,agb_est_kg,agb_ref_kg`, or a reconstruct report.json.
        input: PathBuf,
        /// Scene manifest to match a reconstruct report against.
        #[arg(long)]
        reference: Option<PathBuf>,
        /// Add the grouped-sum table for group sizes 5..30.
        #[arg(long)]
        cumulative: bool,
        /// Write scatter.svg.
        #[arg(long)]
        plot: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Generate a synthetic plot with ground truth.
    Synth {
        /// Scene parameters JSON.
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        n_trees: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Surface sampling density, points per square meter.
        #[arg(long)]
        density: Option<f64>,
        /// Leaf points as a share of wood points.
        #[arg(long)]
        leaf_fraction: Option<f64>,
        /// `uls`, `sparsify:<fraction>` or `crop:<height>`.
        #[arg(long)]
        degrade: Option<String>,
        #[arg(short, long, default_value = "out")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct ReconstructArgs {
    /// Tree clouds, a segment.json, or a plot cloud with --segment.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Treat a single cloud input as a plot and segment it first.
    #[arg(long)]
    segment: bool,
    #[arg(long)]
    leaf_on: bool,
    #[arg(long)]
    freq_threshold: Option<u64>,
    /// Measured DBH in meters, used for every tree.
    #[arg(long, conflicts_with_all = ["dbh_csv", "dbh_allometry"])]
    dbh: Option<f64>,
    /// `tree_id,dbh_m` table.
    #[arg(long, conflicts_with = "dbh_allometry")]
    dbh_csv: Option<PathBuf>,
    /// `a,b` for dbh_cm = a * height_m^b.
    #[arg(long, value_delimiter = ',', num_args = 2)]
    dbh_allometry: Option<Vec<f64>>,
    /// kg/m^3; enables AGB.
    #[arg(long)]
    wood_density: Option<f64>,
    /// Also write a mesh per tree (obj or ply).
    #[arg(long, num_args = 0..=1, default_missing_value = "obj")]
    mesh: Option<String>,
    /// Also write per-point leaf labels per tree.
    #[arg(long)]
    labels: bool,
    #[command(flatten)]
    common: Common,
}

fn parse_degradation(s: &str) -> anyhow::Result<Degradation> {
    let (mode, arg) = s.split_once(':').unwrap_or((s, ""));
    let num = || arg.parse::<f64>().map_err(|_| anyhow::anyhow!("--degrade {s}: expected a number after ':'"));
    Ok(match mode {
        "uls" => Degradation::uls(),
        "sparsify" => Degradation::Sparsify { fraction: num()? },
        "crop" => Degradation::CropBelow { height: num()? },
        _ => anyhow::bail!("unknown degradation '{s}'"),
    })
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Segment { input, common } => {
            let m = cmd_segment(&input, &common.out, &common.config()?)?;
            println!(
                "{} trees, {} understory points, written to {}",
                m.tree_count,
                m.understory_points,
                common.out.display()
            );
            Ok(true)
        }
        Command::Reconstruct(a) => {
            let mut cfg = a.common.config()?;
            cfg.leaf_on |= a.leaf_on;
            if let Some(f) = a.freq_threshold {
                cfg.freq_threshold = f;
            }
            if let Some(d) = a.wood_density {
                cfg.wood_density = Some(d);
            }
            if let Some(ab) = &a.dbh_allometry {
                cfg.dbh_allometry = Some([ab[0], ab[1]]);
                cfg.dbh_source = DbhSource::Allometric;
            }
            let dbh = match (a.dbh, a.dbh_csv) {
                (Some(d), _) => DbhInput::Value(d),
                (None, Some(p)) => DbhInput::Csv(p),
                (None, None) => DbhInput::None,
            };
            let mesh = match a.mesh.as_deref() {
                None => None,
                Some("obj") => Some(MeshFormat::Obj),
                Some("ply") => Some(MeshFormat::Ply),
                Some(other) => anyhow::bail!("--mesh {other}: expected obj or ply"),
            };
            let input = if a.inputs.len() == 1 {
                ReconstructInput::from_path(&a.inputs[0], a.segment)
            } else {
                anyhow::ensure!(!a.segment, "--segment takes a single plot cloud");
                ReconstructInput::Trees(a.inputs.clone())
            };
            let opts = ReconstructOptions {
                dbh,
                mesh,
                labels: a.labels,
            };
            let report = cmd_reconstruct(&input, &a.common.out, &cfg, &opts)?;
            print!("{}", report.table());
            if !report.ok() {
                eprintln!("{}", serde_json::to_string(&report.failures)?);
            }
            Ok(report.ok())
        }
        Command::Evaluate {
            input,
            reference,
            cumulative,
            plot,
            common,
        } => {
            let cfg = common.config()?;
            let input = match reference {
                Some(r) => EvalInput::Plot {
                    report: input,
                    reference: r,
                },
                None => EvalInput::Pairs(input),
            };
            let report = cmd_evaluate(&input, &common.out, &cfg, &EvalOptions { cumulative, plot })?;
            print!("{}", report.table());
            Ok(true)
        }
        Command::Synth {
            params,
            n_trees,
            seed,
            density,
            leaf_fraction,
            degrade,
            out,
        } => {
            let mut p: SceneParams = match params {
                Some(path) => serde_json::from_str(&std::fs::read_to_string(&path)?)?,
                None => SceneParams::default(),
            };
            if let Some(n) = n_trees {
                p.n_trees = n;
            }
            if let Some(s) = seed {
                p.seed = s;
            }
            if let Some(d) = density {
                p.sample.density = d;
            }
            if let Some(f) = leaf_fraction {
                p.sample.leaf_fraction = f;
            }
            let opts = SynthOptions {
                degradation: degrade.as_deref().map(parse_degradation).transpose()?,
            };
            let m = cmd_synth(&p, &out, &opts)?;
            println!("{} trees, {} points, written to {}", m.trees.len(), m.total_points, out.display());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
