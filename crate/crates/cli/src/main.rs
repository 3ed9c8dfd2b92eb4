//! `pompom`: build, convert, synthesize and evaluate testers from JSON files.

mod artifact;
mod commands;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pompom_core::{ratio, Caps, Overrides, Ratio};

use crate::artifact::Context;
use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(name = "pompom", version, about = "Non-adaptive to sample-based tester conversion toolkit")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Main input file (JSON).
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Master seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Threshold override `key=value`; repeatable.
    #[arg(long = "override", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Largest number of words enumerated.
    #[arg(long, global = true)]
    pub cap_enum: Option<u64>,
    /// Largest number of core assignments enumerated.
    #[arg(long, global = true)]
    pub cap_sigma: Option<u64>,
    /// Largest product formula materialized by amplification.
    #[arg(long, global = true)]
    pub cap_amp: Option<u64>,
    /// Monte Carlo trials.
    #[arg(long, global = true, default_value_t = 10_000)]
    pub trials: usize,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate or check properties.
    #[command(subcommand)]
    Property(PropertyCmd),
    /// Check or canonize probabilistic formulas.
    #[command(subcommand)]
    Formula(FormulaCmd),
    /// Apply transforms to a formula.
    #[command(subcommand)]
    Transform(TransformCmd),
    /// Extract decompositions, constellations and pompoms.
    #[command(subcommand)]
    Structure(StructureCmd),
    /// Build sample-based testers.
    #[command(subcommand)]
    Synthesize(SynthesizeCmd),
    /// Run testers on a word.
    #[command(subcommand)]
    Run(RunCmd),
    /// Exact and Monte Carlo evaluation, bounds and calculations.
    #[command(subcommand)]
    Eval(EvalCmd),
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum GenKind {
    /// The single all-zero word.
    Zeros,
    /// Every word.
    All,
    /// Words whose letter sum is divisible by the alphabet size.
    Even,
    /// The indicator of one block of `width` indices.
    Block,
    /// `members` distinct random words.
    Random,
}

#[derive(Subcommand, Debug)]
pub enum PropertyCmd {
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "01")]
        alphabet: String,
        #[arg(long, value_enum, default_value = "zeros")]
        kind: GenKind,
        #[arg(long, default_value_t = 4)]
        members: usize,
        #[arg(long, default_value_t = 1)]
        width: usize,
        #[arg(long, default_value_t = 0)]
        block: usize,
    },
    /// Load the property from `--input`; with `--outer`, also check nesting.
    Validate {
        #[arg(long)]
        outer: Option<PathBuf>,
    },
}

/// A test declaration: the pair and the parameters `(ε, δ, q)`.
#[derive(Args, Debug, Clone)]
pub struct Declaration {
    /// Property the test must accept (defaults to `--outer`).
    #[arg(long)]
    pub inner: Option<PathBuf>,
    /// Property the rejected words are far from.
    #[arg(long)]
    pub outer: Option<PathBuf>,
    #[arg(long, value_parser = parse_ratio)]
    pub epsilon: Option<Ratio>,
    #[arg(long, value_parser = parse_ratio)]
    pub delta: Option<Ratio>,
    #[arg(long)]
    pub q: Option<usize>,
    #[arg(long, value_enum, default_value = "two")]
    pub sided: Side,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    One,
    Two,
}

#[derive(Subcommand, Debug)]
pub enum FormulaCmd {
    /// Parse and check a formula; with a declaration, check it is a valid test.
    Validate {
        /// Also require zero-one values and uniform weights.
        #[arg(long)]
        combinatorial: bool,
        #[command(flatten)]
        decl: Declaration,
    },
    /// Merge constraints that share a query set.
    Canonize,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum Stage {
    ZeroOne,
    Quantize,
    Equitable,
    Prune,
    Linearize,
    Condition,
}

#[derive(Subcommand, Debug)]
pub enum TransformCmd {
    /// One transform stage.
    Stage {
        #[arg(value_enum)]
        stage: Stage,
        #[command(flatten)]
        decl: Declaration,
        /// Constraint indices to condition on, comma-separated.
        #[arg(long, value_delimiter = ',')]
        subset: Vec<usize>,
    },
    /// Full pipeline to a combinatorial test.
    Combi {
        #[command(flatten)]
        decl: Declaration,
    },
    /// Effective 1-sided test.
    Effective1 {
        #[command(flatten)]
        decl: Declaration,
    },
    /// Effective 2-sided test.
    Effective2 {
        #[command(flatten)]
        decl: Declaration,
    },
}

#[derive(Subcommand, Debug)]
pub enum StructureCmd {
    /// Decomposition of the formula's support.
    Scm,
    /// Constellation found from the decomposition.
    Constellation,
    /// Discerning pompoms, or revealing ones with `--property` and `--word`.
    Pompoms {
        #[arg(long, value_parser = parse_ratio)]
        epsilon: Ratio,
        #[arg(long)]
        property: Option<PathBuf>,
        #[arg(long)]
        word: Option<String>,
    },
}

#[derive(Subcommand, Debug)]
pub enum SynthesizeCmd {
    /// 1-sided tester for the property in `--input`.
    OneSided {
        /// Sampling rate; computed from `--q` and `--epsilon` when absent.
        #[arg(long, value_parser = parse_ratio)]
        p: Option<Ratio>,
        #[arg(long)]
        q: Option<usize>,
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// 2-sided tester for the combinatorial formula in `--input`.
    TwoSided {
        #[command(flatten)]
        decl: Declaration,
    },
}

#[derive(Subcommand, Debug)]
pub enum RunCmd {
    /// One run of the tester in `--input`.
    Sample {
        #[arg(long)]
        word: String,
    },
    /// Several testers on one shared sample.
    Multitest {
        #[arg(long = "tester", required = true)]
        testers: Vec<PathBuf>,
        #[arg(long)]
        word: String,
        #[arg(long, value_parser = parse_ratio, default_value = "1/2")]
        delta: Ratio,
        #[arg(long, value_delimiter = ',')]
        reps: Vec<usize>,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum QualityMethodArg {
    Exact,
    Mc,
}

#[derive(Subcommand, Debug)]
pub enum EvalCmd {
    /// Exact acceptance probability of the tester in `--input`.
    Exact {
        #[arg(long)]
        word: String,
    },
    /// Monte Carlo acceptance estimate.
    Mc {
        #[arg(long)]
        word: String,
    },
    /// Empirical check of the large-deviation bound.
    Devbound {
        /// Values in [0,1], comma-separated.
        #[arg(long, value_delimiter = ',')]
        gammas: Vec<f64>,
        /// Use the alternating 0/1 sequence of this length instead.
        #[arg(long)]
        alternating: Option<usize>,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        c: f64,
        #[arg(long)]
        eta: f64,
    },
    /// Threshold calculations over the default grid or `--input`.
    Calc {
        /// Also print a summary table to stderr.
        #[arg(long)]
        table: bool,
    },
    /// Completeness and soundness of a formula or tester.
    Quality {
        #[command(flatten)]
        decl: Declaration,
        #[arg(long, value_enum, default_value = "exact")]
        method: QualityMethodArg,
    },
}

fn parse_ratio(s: &str) -> Result<Ratio, String> {
    ratio::parse(s).map_err(|e| e.0)
}

fn command_name(c: &Command) -> String {
    let (a, b) = match c {
        Command::Property(p) => ("property", match p {
            PropertyCmd::Gen { .. } => "gen",
            PropertyCmd::Validate { .. } => "validate",
        }),
        Command::Formula(f) => ("formula", match f {
            FormulaCmd::Validate { .. } => "validate",
            FormulaCmd::Canonize => "canonize",
        }),
        Command::Transform(t) => ("transform", match t {
            TransformCmd::Stage { .. } => "stage",
            TransformCmd::Combi { .. } => "combi",
            TransformCmd::Effective1 { .. } => "effective1",
            TransformCmd::Effective2 { .. } => "effective2",
        }),
        Command::Structure(s) => ("structure", match s {
            StructureCmd::Scm => "scm",
            StructureCmd::Constellation => "constellation",
            StructureCmd::Pompoms { .. } => "pompoms",
        }),
        Command::Synthesize(s) => ("synthesize", match s {
            SynthesizeCmd::OneSided { .. } => "one-sided",
            SynthesizeCmd::TwoSided { .. } => "two-sided",
        }),
        Command::Run(r) => ("run", match r {
            RunCmd::Sample { .. } => "sample",
            RunCmd::Multitest { .. } => "multitest",
        }),
        Command::Eval(e) => ("eval", match e {
            EvalCmd::Exact { .. } => "exact",
            EvalCmd::Mc { .. } => "mc",
            EvalCmd::Devbound { .. } => "devbound",
            EvalCmd::Calc { .. } => "calc",
            EvalCmd::Quality { .. } => "quality",
        }),
    };
    format!("{a} {b}")
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut overrides = Overrides::new();
    for kv in &cli.global.overrides {
        overrides.parse_pair(kv)?;
    }
    let mut caps = Caps::default();
    if let Some(c) = cli.global.cap_enum {
        caps.enumeration = c;
    }
    if let Some(c) = cli.global.cap_sigma {
        caps.sigma = c;
    }
    if let Some(c) = cli.global.cap_amp {
        caps.amplification = c;
    }
    let mut ctx = Context::new(
        command_name(&cli.command),
        cli.global.seed,
        overrides.0.clone(),
        caps,
        cli.global.output.clone(),
    );
    let env = commands::Env {
        input: cli.global.input.clone(),
        seed: cli.global.seed,
        overrides,
        caps,
        trials: cli.global.trials,
    };
    commands::dispatch(&cli.command, &env, &mut ctx)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error ({}): {e}", e.label());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
