use std::path::PathBuf;

use aca_core::attack::Strategy;
use aca_core::detect::DetectorKind;
use aca_core::game::AttackProbability;
use aca_core::synth::Model;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "aca",
    version,
    about = "Community detection under a single evading node"
)]
pub struct Cli {
    /// Worker threads (default: logical cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic dataset bundle: graph, labels, attributes, metadata.
    Generate(GenerateArgs),
    /// Play the detector/attack game and write records and curves.
    Game(Box<GameArgs>),
    /// Re-run the plans of a finished game and compare every curve.
    Replay(ReplayArgs),
}

/// Generator overrides shared by `generate` and `game --model`.
#[derive(Debug, Clone, Args)]
pub struct SynthTuning {
    #[arg(long, default_value_t = 10.0)]
    pub avg_degree: f64,
    /// Watts-Strogatz rewiring probability.
    #[arg(long)]
    pub beta: Option<f64>,
    /// LFR mixing parameter.
    #[arg(long)]
    pub mu: Option<f64>,
    /// Watts-Strogatz lattice degree.
    #[arg(long)]
    pub ws_k: Option<usize>,
    /// Barabasi-Albert edges per new node.
    #[arg(long)]
    pub ba_m: Option<usize>,
    /// Swap labels until within-minus-cross edges drop to this value.
    #[arg(long, allow_hyphen_values = true)]
    pub target_delta: Option<i64>,
    #[arg(long, default_value_t = 100_000)]
    pub max_swaps: usize,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub model: Model,
    /// Number of nodes.
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Bundle directory, created if missing.
    #[arg(long)]
    pub out_dir: PathBuf,
    /// GLRT accuracy the attribute profile is calibrated to.
    #[arg(long, default_value_t = 0.7)]
    pub accuracy: f64,
    #[command(flatten)]
    pub tuning: SynthTuning,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Capability {
    /// Allow edges between new contacts and the target's neighbours.
    SsNbr,
}

#[derive(Debug, Args)]
pub struct GameArgs {
    /// Registry name under ACA_DATA_DIR, a graph file, or a bundle directory.
    #[arg(long, conflicts_with = "model", required_unless_present = "model")]
    pub data: Option<String>,
    /// Generate a synthetic graph instead of loading one.
    #[arg(long, requires = "n")]
    pub model: Option<Model>,
    #[arg(long, requires = "model")]
    pub n: Option<usize>,
    #[command(flatten)]
    pub tuning: SynthTuning,

    /// Edge budget (default 50, or 51 with the ss-nbr capability).
    #[arg(long)]
    pub budget: Option<usize>,
    /// Number of targets drawn from homogeneous stable structures.
    #[arg(long, default_value_t = 10)]
    pub targets: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "louvain,leiden,cp,hlc,umst,bp-overlap"
    )]
    pub detectors: Vec<DetectorKind>,
    #[arg(long, value_delimiter = ',', default_value = "cl,ss,emb,mod,bih")]
    pub attacks: Vec<Strategy>,
    #[arg(long, value_enum, value_delimiter = ',')]
    pub capability: Vec<Capability>,
    /// Attack probabilities for the mixed objective, e.g. 0,0.25,1/3,1.
    #[arg(long, value_delimiter = ',')]
    pub attack_prob_grid: Vec<AttackProbability>,
    /// Run directory for records, curves and the manifest.
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Make every target hot instead of drawing its temperature.
    #[arg(long)]
    pub force_target_hot: bool,

    /// Detector runs behind the stable-structure attacks (default 8).
    #[arg(long)]
    pub stable_trials: Option<usize>,
    #[arg(long)]
    pub embedding_dim: Option<usize>,
    #[arg(long)]
    pub epa_population: Option<usize>,
    #[arg(long)]
    pub epa_generations: Option<usize>,
    /// Clique percolation clique size.
    #[arg(long)]
    pub cp_k: Option<usize>,
    /// HLC similarity cut (default: partition-density maximum).
    #[arg(long)]
    pub hlc_threshold: Option<f64>,
    /// UMST overlap coefficient at which groups merge.
    #[arg(long)]
    pub umst_overlap: Option<f64>,
    /// BP-Overlap dimension (default: Louvain community count).
    #[arg(long)]
    pub bp_dim: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    /// manifest.json of a game run.
    pub manifest: PathBuf,
}
