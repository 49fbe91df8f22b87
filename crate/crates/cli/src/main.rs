//! `freqpred`: dataset generation, training, prediction, estimation and
//! benchmark sweeps.
//!
//! Exit codes: 0 success, 1 I/O error, 2 usage or parameter error,
//! 3 training divergence, 4 under-resolution.

mod args;
mod samples;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use serde::Serialize;

use freqpred::datagen::{generate, read_dataset, write_dataset, Dataset, DatasetRecipe, Manifest, RecipeId};
use freqpred::experiments::{emit, load_config, run_config};
use freqpred::neural::{load_params, predict_window, save_params, train_with, ArchitectureSpec, TrainConfig, TrainError};
use freqpred::signal::{concat, SampleWindow};
use freqpred::{rng, Error};

use args::{BenchArgs, Cli, Command, EstimateArgs, GenDataArgs, PredictArgs, TrainArgs};

const EXIT_IO: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_DIVERGED: u8 = 3;
const EXIT_UNRESOLVED: u8 = 4;

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io { .. } => EXIT_IO,
            Error::UnderResolution { .. } => EXIT_UNRESOLVED,
            _ => EXIT_USAGE,
        };
        Failure { code, message: e.to_string() }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_USAGE, message: message.into() }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(EXIT_USAGE);
        }
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().expect("thread pool configured once");
    }
    let outcome = match cli.command {
        Command::GenData(a) => gen_data(a),
        Command::Train(a) => train_cmd(a),
        Command::Predict(a) => predict(a),
        Command::Estimate(a) => estimate(a),
        Command::Bench(a) => bench(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn print_resolved<T: Serialize>(command: &str, resolved: &T) {
    let body = toml::to_string(resolved).unwrap_or_else(|e| format!("# unprintable: {e}\n"));
    eprint!("# freqpred {command}: resolved configuration\n{body}");
}

fn required<T>(v: Option<T>, flag: &str) -> Result<T, Failure> {
    v.ok_or_else(|| usage(format!("missing required --{flag}")))
}

#[derive(Serialize)]
struct GenDataResolved {
    out: PathBuf,
    recipes: Vec<DatasetRecipe>,
}

fn gen_data(a: GenDataArgs) -> Result<(), Failure> {
    let a = a.resolve()?;
    let names: Vec<String> = required(a.recipe, "recipe")?.split(',').map(|s| s.trim().to_string()).collect();
    let seed = a.seed.unwrap_or(0);
    let mut recipes = Vec::new();
    for name in &names {
        let id: RecipeId = name.parse()?;
        // Several recipes in one file get independent child seeds.
        let recipe_seed = if names.len() == 1 { seed } else { rng::derive_seed(seed, &[rng::tag(id.name())]) };
        let mut recipe = DatasetRecipe::new(id, a.n.unwrap_or(150), a.m.unwrap_or(50), recipe_seed);
        if let Some(s) = a.snr {
            recipe.snr_db = s;
        }
        if let Some(k) = a.instances {
            recipe.noise_instances = k;
        }
        if let Some(s) = a.set_size {
            recipe.set_size = s;
        }
        if let Some(j) = a.amplitude_jitter {
            recipe.amplitude_jitter = j;
        }
        recipes.push(recipe);
    }
    let resolved = GenDataResolved { out: required(a.out, "out")?, recipes };
    print_resolved("gen-data", &resolved);
    let mut ds: Option<Dataset> = None;
    for recipe in &resolved.recipes {
        let part = generate(recipe)?;
        ds = Some(match ds {
            None => part,
            Some(d) => d.merge(part)?,
        });
    }
    let ds = ds.expect("at least one recipe");
    write_dataset(&ds, &resolved.out)?;
    let manifest = Manifest::of(&ds);
    for c in &manifest.counts {
        println!("{} signals={} examples={}", c.recipe, c.signals, c.examples);
    }
    println!("total examples={}", manifest.examples);
    eprintln!("wrote {} and {}", resolved.out.display(), Manifest::path_for(&resolved.out).display());
    Ok(())
}

#[derive(Serialize)]
struct TrainResolved {
    data: PathBuf,
    arch: String,
    out: PathBuf,
    history: PathBuf,
    seed: u64,
    train: TrainConfig,
}

fn history_path(weights: &Path) -> PathBuf {
    weights.with_extension("loss.csv")
}

fn train_cmd(a: TrainArgs) -> Result<(), Failure> {
    let a = a.resolve()?;
    let seed = a.seed.unwrap_or(0);
    let defaults = TrainConfig::default();
    let out = required(a.out, "out")?;
    let resolved = TrainResolved {
        data: required(a.data, "data")?,
        arch: a.arch.unwrap_or_else(|| "desk".into()),
        history: history_path(&out),
        out,
        seed,
        train: TrainConfig {
            epochs: a.epochs.unwrap_or(defaults.epochs),
            batch_size: a.batch.unwrap_or(defaults.batch_size),
            learning_rate: a.lr.unwrap_or(defaults.learning_rate),
            init_seed: rng::derive_seed(seed, &[rng::tag("init")]),
            shuffle_seed: rng::derive_seed(seed, &[rng::tag("shuffle")]),
            ..defaults
        },
    };
    print_resolved("train", &resolved);
    resolved.train.validate()?;
    let ds = read_dataset(&resolved.data)?;
    let (m, out_len) = (ds.m(), ds.n() - ds.m());
    let arch = match resolved.arch.as_str() {
        "desk" => ArchitectureSpec::desk(m, out_len),
        "full" => ArchitectureSpec::full(m, out_len),
        other => return Err(usage(format!("unknown --arch '{other}' (expected desk or full)"))),
    };
    eprintln!("{} examples, architecture {}", ds.len(), arch.describe());
    let components = ds.examples.first().map(|e| e.truth.count());
    let uniform_l = components.filter(|&l| ds.examples.iter().all(|e| e.truth.count() == l));

    let pairs = ds.pairs();
    let epochs = resolved.train.epochs;
    let outcome = train_with(&pairs, &arch, &resolved.train, |epoch, loss| {
        eprintln!("epoch {}/{epochs} loss {loss:.6e}", epoch + 1);
    });
    let (mut params, history) = match outcome {
        Ok(t) => (t.params, t.history),
        Err(TrainError::Invalid(e)) => return Err(e.into()),
        Err(TrainError::Diverged(d)) => {
            let path = resolved.out.with_extension("diverged.fpw");
            let mut checkpoint = d.checkpoint;
            checkpoint.components = uniform_l;
            save_params(&checkpoint, &path)?;
            write_history(&resolved.history, &d.history)?;
            return Err(Failure {
                code: EXIT_DIVERGED,
                message: format!(
                    "training diverged in epoch {}; last finite checkpoint saved to {}",
                    d.epoch + 1,
                    path.display()
                ),
            });
        }
    };
    params.components = uniform_l;
    save_params(&params, &resolved.out)?;
    write_history(&resolved.history, &history)?;
    println!("{}", resolved.out.display());
    Ok(())
}

fn write_history(path: &Path, history: &[f64]) -> Result<(), Failure> {
    let mut body = String::from("epoch,mean_loss\n");
    for (i, l) in history.iter().enumerate() {
        body.push_str(&format!("{},{l}\n", i + 1));
    }
    std::fs::write(path, body).map_err(|e| Error::Io { path: path.into(), source: e }.into())
}

#[derive(Serialize)]
struct PredictResolved {
    input: PathBuf,
    weights: PathBuf,
    out: PathBuf,
}

fn predict(a: PredictArgs) -> Result<(), Failure> {
    let a = a.resolve()?;
    let r = PredictResolved {
        input: required(a.input, "input")?,
        weights: required(a.weights, "weights")?,
        out: required(a.out, "out")?,
    };
    print_resolved("predict", &r);
    let params = load_params(&r.weights)?;
    let x_a = SampleWindow::observed(samples::read(&r.input)?)?;
    let y = predict_window(&params, &x_a)?;
    samples::write(&r.out, y.samples())?;
    println!("{}", r.out.display());
    Ok(())
}

#[derive(Serialize)]
struct EstimateResolved {
    input: PathBuf,
    method: freqpred::hrse::Estimator,
    l: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    weights: Option<PathBuf>,
}

fn estimate(a: EstimateArgs) -> Result<(), Failure> {
    let a = a.resolve()?;
    let r = EstimateResolved {
        input: required(a.input, "input")?,
        method: a.method.as_deref().unwrap_or("esprit").parse()?,
        l: required(a.l, "l")?,
        weights: a.weights,
    };
    print_resolved("estimate", &r);
    if r.l == 0 {
        return Err(usage("--l must be at least 1"));
    }
    let window = SampleWindow::observed(samples::read(&r.input)?)?;
    let window = match &r.weights {
        None => window,
        Some(path) => {
            let params = load_params(path)?;
            if let Some(c) = params.components.filter(|&c| c != r.l) {
                return Err(usage(format!("weights were trained on {c}-component signals, --l is {}", r.l)));
            }
            let m = params.architecture().input_len();
            if window.len() != m {
                return Err(usage(format!("weights expect {m} input samples, file has {}", window.len())));
            }
            let predicted = predict_window(&params, &window)?;
            concat(&window, &predicted)?
        }
    };
    let est = r.method.estimate(&window, r.l)?;
    let line: Vec<String> = est.frequencies.iter().map(|f| format!("{f:.6}")).collect();
    println!("{}", line.join(" "));
    Ok(())
}

fn bench(a: BenchArgs) -> Result<(), Failure> {
    let path = required(a.config, "config")?;
    let mut cfg = load_config(&path)?;
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(out) = a.out {
        cfg.out_dir = out;
    }
    if let Some(t) = a.trials {
        cfg.trials = t;
    }
    print_resolved("bench", &cfg);
    let started = std::time::Instant::now();
    let result = run_config(&cfg)?;
    for files in emit(&result, &cfg.out_dir)? {
        println!("{}", files.display());
    }
    eprintln!("{} trials in {:.1} s", cfg.trials, started.elapsed().as_secs_f64());
    Ok(())
}
