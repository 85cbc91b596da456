use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gravclass::{
    evaluate, load_csv, load_universe, save_universe, CsvSchema, EvalPlan, Metric, Modes, Scale, SplitMode,
    SplitSpec, Universe, UniverseConfig,
};

#[derive(Parser)]
#[command(name = "gravclass", version, about = "Gravitational clustering classifier")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a universe on a CSV file and write it to disk.
    Train(TrainArgs),
    /// Classify one comma-separated feature vector with a saved universe.
    Predict(PredictArgs),
    /// Split a CSV file, train, and report accuracy of both predictors.
    Evaluate(EvaluateArgs),
}

#[derive(Args)]
struct DataArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value = "label")]
    label_col: String,
    #[arg(long)]
    weight_col: Option<String>,
}

impl DataArgs {
    fn schema(&self) -> CsvSchema {
        CsvSchema {
            label_column: self.label_col.clone(),
            weight_column: self.weight_col.clone(),
        }
    }
}

#[derive(Args)]
struct ModelArgs {
    /// Radius of newly created planets.
    #[arg(long, default_value_t = 50.0)]
    r_init: f64,
    /// Length of each simulation step.
    #[arg(long, default_value_t = 0.01)]
    alpha: f64,
    /// Number of simulation steps.
    #[arg(long, default_value_t = 100)]
    beta: u32,
    #[arg(long, default_value = "euclidean")]
    metric: Metric,
    /// Check for capture after every simulation step.
    #[arg(long)]
    early_stop_collision: bool,
}

impl ModelArgs {
    fn config(&self) -> UniverseConfig {
        let mut c = UniverseConfig::new(self.r_init, self.alpha, self.beta).with_metric(self.metric);
        c.early_stop_on_collision = self.early_stop_collision;
        c
    }
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// Train in a seeded random order instead of file order.
    #[arg(long)]
    shuffle_seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    /// Feature vector, e.g. `5.1,3.5,1.4,0.2`.
    #[arg(allow_hyphen_values = true)]
    query: String,
    #[arg(long, default_value = "sim")]
    mode: Modes,
    #[arg(long)]
    early_stop_collision: bool,
    #[arg(long)]
    verbose: bool,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value = "both")]
    mode: Modes,
    /// `frac:<f>`, `one-per-class` or `kfold:<k>`.
    #[arg(long, default_value = "frac:0.3")]
    split: SplitMode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    shuffle_seed: Option<u64>,
    #[arg(long, default_value = "none")]
    scale: Scale,
    /// Also write the report as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn train(args: TrainArgs) -> gravclass::Result<()> {
    let mut ds = load_csv(&args.data.data, &args.data.schema())?;
    if let Some(seed) = args.shuffle_seed {
        ds = ds.shuffled(seed);
    }
    let mut universe = Universe::new(args.model.config())?;
    universe.train_batch(&ds.samples)?;
    save_universe(&universe, &args.out)?;
    println!("planets={} total_mass={}", universe.len(), universe.total_mass());
    Ok(())
}

fn predict(args: PredictArgs) -> gravclass::Result<()> {
    let mut universe = load_universe(&args.model)?;
    universe.config_mut().early_stop_on_collision = args.early_stop_collision;
    let query = args
        .query
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| gravclass::Error::InvalidConfig(format!("bad query component `{v}`")))
        })
        .collect::<gravclass::Result<Vec<f64>>>()?;

    if args.mode.sim() {
        let trace = universe.predict_sim(&query)?;
        println!("sim {}", trace.predicted_class);
        if args.verbose {
            let pos: Vec<String> = trace.final_position.iter().map(|x| x.to_string()).collect();
            println!("  final_position {}", pos.join(","));
            println!("  steps {}", trace.steps_taken);
            println!("  capture {}", trace.capture.as_str());
        }
    }
    if args.mode.prob() {
        let scores = universe.class_scores(&query)?;
        println!("prob {}", scores[0].class_label);
        if args.verbose {
            for s in &scores {
                println!("  class {} score {} planets {}", s.class_label, s.score, s.planet_count);
            }
        }
    }
    Ok(())
}

fn run_evaluate(args: EvaluateArgs) -> gravclass::Result<()> {
    let ds = load_csv(&args.data.data, &args.data.schema())?;
    let plan = EvalPlan {
        split: SplitSpec::new(args.split, args.seed),
        config: args.model.config(),
        modes: args.mode,
        scale: args.scale,
        shuffle_seed: args.shuffle_seed,
    };
    let report = evaluate(&ds, &plan)?;
    print!("{report}");
    if let Some(out) = &args.out {
        report.save(out)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(a) => train(a),
        Command::Predict(a) => predict(a),
        Command::Evaluate(a) => run_evaluate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
