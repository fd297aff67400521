use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use trs_core::data::{load_features, save_features, synthesize, Dataset, SyntheticSpec};
use trs_core::eval::evaluate;
use trs_core::training::{
    load_checkpoint, save_checkpoint, write_metrics_csv, ComponentToggles, TrainConfig, Trainer,
};
use trs_core::{Error, Result};

#[derive(Parser)]
#[command(name = "trs", version, about = "Teacher-reference-student score regression")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic AQAF dataset.
    Synth(SynthArgs),
    /// Train on an AQAF dataset (unscored samples are the unlabeled set).
    Train(TrainArgs),
    /// Score a labeled AQAF set with a trained student.
    Eval(EvalArgs),
    /// Run the component ablation grid and print a comparison table.
    Ablate(AblateArgs),
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    t: usize,
    #[arg(long)]
    d: usize,
    #[arg(long = "label-frac")]
    label_frac: f64,
    #[arg(long, default_value_t = 1.0)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    out: PathBuf,
    /// Also write this many labeled held-out samples.
    #[arg(long = "n-test", default_value_t = 0)]
    n_test: usize,
    #[arg(long = "test-out", requires = "n_test")]
    test_out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long = "burn-in")]
    burn_in: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long = "batch-size")]
    batch_size: Option<usize>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<TrainConfig> {
        let mut cfg = TrainConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_kv_text(&fs::read_to_string(path)?)?;
        }
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got {kv:?}")))?;
            cfg.set(k, v)?;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.epochs {
            cfg.max_epochs = v;
        }
        if let Some(v) = self.burn_in {
            cfg.burn_in_epochs = v;
        }
        if let Some(v) = self.lr {
            cfg.learning_rate = v;
        }
        if let Some(v) = self.batch_size {
            cfg.batch_size = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    data: PathBuf,
    /// Labeled validation set for per-epoch Spearman.
    #[arg(long)]
    val: Option<PathBuf>,
    /// Checkpoint directory.
    #[arg(short, long)]
    out: PathBuf,
    /// Metrics CSV path (default: <out>/metrics.csv).
    #[arg(long)]
    metrics: Option<PathBuf>,
    /// Continue from the checkpoint in `--out`; `--epochs` may extend the run.
    #[arg(long)]
    resume: bool,
    #[arg(long = "no-reference-network")]
    no_reference_network: bool,
    #[arg(long = "no-teacher-memory")]
    no_teacher_memory: bool,
    #[arg(long = "no-reference-memory")]
    no_reference_memory: bool,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct EvalArgs {
    /// Checkpoint directory written by `train`.
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// Per-sample predictions CSV.
    #[arg(long)]
    predictions: Option<PathBuf>,
}

#[derive(Args)]
struct AblateArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    test: PathBuf,
    /// Write the table as CSV here as well.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArgs,
}

fn split(path: &Path) -> Result<(Dataset, Dataset)> {
    let data = load_features(path)?;
    if data.labeled().next().is_none() {
        return Err(Error::Config(format!("{} has no labeled samples", path.display())));
    }
    Ok(data.partition())
}

fn synth(a: SynthArgs) -> Result<()> {
    let spec = SyntheticSpec {
        num_samples: a.n,
        seq_len: a.t,
        feat_dim: a.d,
        label_fraction: a.label_frac,
        noise_std: a.noise,
        seed: a.seed,
    };
    let out = synthesize(&spec, a.n_test)?;
    save_features(&out.train, &a.out)?;
    println!(
        "wrote {} samples ({} labeled) to {}",
        out.train.len(),
        out.train.labeled().count(),
        a.out.display()
    );
    match (a.test_out, a.n_test) {
        (Some(path), n) if n > 0 => {
            save_features(&out.test, &path)?;
            println!("wrote {n} test samples to {}", path.display());
        }
        (None, n) if n > 0 => return Err(Error::Config("--n-test needs --test-out".into())),
        _ => {}
    }
    Ok(())
}

fn train(a: TrainArgs) -> Result<()> {
    let (labeled, unlabeled) = split(&a.data)?;
    let val = a.val.as_deref().map(load_features).transpose()?;
    let trainer = if a.resume {
        let (mut state, metrics) = load_checkpoint(&a.out)?;
        // Only the horizon may change on resume; everything else is fixed by the checkpoint.
        if let Some(e) = a.config.epochs {
            state.config.max_epochs = e;
            state.config.validate()?;
        }
        eprintln!("resuming at epoch {}", state.epoch);
        Trainer::resume(state, metrics, &labeled, &unlabeled, val.as_ref())?
    } else {
        let mut cfg = a.config.resolve()?;
        let t = &mut cfg.toggles;
        t.reference_network &= !a.no_reference_network;
        t.teacher_memory &= !a.no_teacher_memory;
        t.reference_memory &= !a.no_reference_memory;
        Trainer::new(cfg, &labeled, &unlabeled, val.as_ref())?
    };
    let metrics_path = a.metrics.unwrap_or_else(|| a.out.join("metrics.csv"));
    let out = trainer.run(|state, rows| {
        save_checkpoint(&a.out, state, rows)?;
        let last = rows.last().expect("one row per epoch");
        eprintln!(
            "epoch {:>4}  total {:.6}{}",
            last.epoch,
            last.losses.total,
            last.val_spearman.map(|r| format!("  val ρ {r:.4}")).unwrap_or_default()
        );
        Ok(())
    })?;
    write_metrics_csv(&out.metrics, fs::File::create(&metrics_path)?)?;
    println!("metrics: {}", metrics_path.display());
    println!("checkpoint: {}", a.out.display());
    Ok(())
}

fn eval(a: EvalArgs) -> Result<()> {
    let (state, _) = load_checkpoint(&a.checkpoint)?;
    let student = state
        .theta_s
        .ok_or_else(|| Error::Config("checkpoint has no student yet".into()))?;
    let test = load_features(&a.data)?;
    let result = evaluate(&student, &state.network, &test)?;
    println!("spearman: {:.6}", result.spearman);
    if let Some(path) = a.predictions {
        result.write_csv(fs::File::create(&path)?)?;
    }
    Ok(())
}

pub const ABLATION_GRID: [(&str, ComponentToggles); 5] = [
    ("Base", ComponentToggles::NONE),
    (
        "Base+TM",
        ComponentToggles {
            reference_network: false,
            teacher_memory: true,
            reference_memory: false,
        },
    ),
    (
        "Base+RN",
        ComponentToggles {
            reference_network: true,
            teacher_memory: false,
            reference_memory: false,
        },
    ),
    (
        "Base+RN+TM",
        ComponentToggles {
            reference_network: true,
            teacher_memory: true,
            reference_memory: false,
        },
    ),
    ("full", ComponentToggles::ALL),
];

fn ablate(a: AblateArgs) -> Result<()> {
    let (labeled, unlabeled) = split(&a.data)?;
    let test = load_features(&a.test)?;
    let base = a.config.resolve()?;
    let mut rows = Vec::new();
    println!("{:<12} {:>9}", "config", "spearman");
    for (name, toggles) in ABLATION_GRID {
        let mut cfg = base.clone();
        cfg.toggles = toggles;
        let out = trs_core::training::train(&cfg, &labeled, &unlabeled, None)?;
        let rho = evaluate(&out.theta_s, &out.network, &test)?.spearman;
        println!("{name:<12} {rho:>9.4}");
        rows.push(format!("{name},{rho}"));
    }
    if let Some(path) = a.csv {
        fs::write(path, format!("config,spearman\n{}\n", rows.join("\n")))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth(a) => synth(a),
        Command::Train(a) => train(a),
        Command::Eval(a) => eval(a),
        Command::Ablate(a) => ablate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
