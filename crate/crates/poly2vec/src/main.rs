//! Command-line surface: dataset generation, geometry encoding, training,
//! evaluation, self-verification, and the fusion-variant ablation.
//!
//! Exit codes: 0 success, 1 usage/config problem, 2 data problem,
//! 3 verification failure.

use std::fs;
use std::io::{BufReader, BufWriter, Write as _};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use poly2vec::cft::{encode_spectrum, write_spectra};
use poly2vec::config::{ConfigError, RunConfig};
use poly2vec::geometry::from_geojson_value;
use poly2vec::nn::FusionVariant;
use poly2vec::tasks::{gen_pairs, Dataset, GenSpec, PairType, Task, TaskError};
use poly2vec::train::{
    ablate, embed, evaluate, fresh_model, load_checkpoint, save_checkpoint, side_features,
    train, Model, TrainError,
};
use poly2vec::verify::{run_verify, Tolerances};

#[derive(Parser)]
#[command(
    name = "poly2vec",
    version,
    about = "Spectral geometry embeddings: exact 2D Fourier features fused by a learned magnitude/phase network"
)]
struct Cli {
    /// TOML config file; built-in defaults apply when omitted.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(flatten)]
    over: Overrides,
    #[command(subcommand)]
    cmd: Cmd,
}

/// Per-flag config overrides, applied on top of the file (or defaults).
#[derive(Args)]
struct Overrides {
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// topology | direction | distance
    #[arg(long, global = true, value_parser = Task::from_str)]
    task: Option<Task>,
    /// e.g. point-polygon, polyline-polygon, polygon-polygon
    #[arg(long, global = true, value_parser = PairType::from_str)]
    pair_type: Option<PairType>,
    /// learned | mag_only | phase_only | concat
    #[arg(long, global = true, value_parser = FusionVariant::from_str)]
    variant: Option<FusionVariant>,
    #[arg(long, global = true)]
    per_class: Option<usize>,
    #[arg(long, global = true)]
    epochs: Option<usize>,
    #[arg(long, global = true)]
    lr: Option<f64>,
    #[arg(long, global = true)]
    weight_decay: Option<f64>,
    #[arg(long, global = true)]
    batch_size: Option<usize>,
    /// Embedding dimension.
    #[arg(long, global = true)]
    d: Option<usize>,
    #[arg(long, global = true)]
    w_axis: Option<usize>,
    #[arg(long, global = true)]
    f_min: Option<f64>,
    #[arg(long, global = true)]
    f_max: Option<f64>,
    #[arg(long, global = true)]
    path_hidden: Option<usize>,
    #[arg(long, global = true)]
    final_hidden: Option<usize>,
    #[arg(long, global = true)]
    head_hidden: Option<usize>,
    #[arg(long, global = true)]
    init_gain: Option<f64>,
    #[arg(long, global = true)]
    out_dir: Option<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a labeled pair dataset and print its class histogram.
    Gendata {
        /// Output JSONL path (default: <out_dir>/pairs.jsonl).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Embed geometries from a file with one GeoJSON geometry per line.
    Encode {
        /// Input geometry file.
        #[arg(long)]
        input: PathBuf,
        /// Embedding CSV output (default: <out_dir>/embeddings.csv).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Checkpoint to embed with; omitted = fresh seeded parameters.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Also write the raw magnitude/phase feature rows to this CSV.
        #[arg(long)]
        features: Option<PathBuf>,
        /// Also write the raw complex spectra to this binary file.
        #[arg(long)]
        spectra: Option<PathBuf>,
        /// Also write the frequency grid to this CSV.
        #[arg(long)]
        grid_csv: Option<PathBuf>,
    },
    /// Train on a generated dataset; writes a checkpoint and reports.
    Train {
        /// Dataset path (default: <out_dir>/pairs.jsonl).
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Evaluate a checkpoint on a dataset without updating it.
    Eval {
        /// Checkpoint path (default: <out_dir>/model.p2vm).
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Dataset path (default: <out_dir>/pairs.jsonl).
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Run the oracle comparisons, property suites, and gradient checks.
    Verify {
        /// Scale every tolerance by this factor.
        #[arg(long, default_value_t = 1.0)]
        tol_scale: f64,
        /// Negative control: corrupt the segment kernel; the oracle
        /// comparison must then fail for this command to succeed.
        #[arg(long)]
        mutation: bool,
        /// Also write the report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Train every fusion variant across several seeds and compare.
    Ablate {
        /// Dataset path (default: <out_dir>/pairs.jsonl).
        #[arg(long)]
        data: Option<PathBuf>,
        /// Number of consecutive seeds, starting at the config seed.
        #[arg(long, default_value_t = 5)]
        seeds: usize,
    },
}

enum CliError {
    Usage(String),
    Data(String),
    VerifyFailed,
}

impl CliError {
    fn exit(&self) -> ExitCode {
        match self {
            CliError::Usage(_) => ExitCode::from(1),
            CliError::Data(_) => ExitCode::from(2),
            CliError::VerifyFailed => ExitCode::from(3),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<TaskError> for CliError {
    fn from(e: TaskError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<TrainError> for CliError {
    fn from(e: TrainError) -> Self {
        CliError::Data(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help/--version render to stdout and succeed; everything
            // else is a usage error.
            let code = if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Usage(msg) | CliError::Data(msg) => eprintln!("error: {msg}"),
                CliError::VerifyFailed => eprintln!("error: verification failed"),
            }
            e.exit()
        }
    }
}

fn effective_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path).map_err(|e| match e {
            ConfigError::Io(e) => {
                CliError::Usage(format!("config {}: {e}", path.display()))
            }
            other => CliError::Usage(format!("config {}: {other}", path.display())),
        })?,
        None => RunConfig::default(),
    };
    let o = &cli.over;
    macro_rules! set {
        ($($field:ident),*) => {
            $(if let Some(v) = &o.$field { cfg.$field = v.clone(); })*
        };
    }
    set!(
        seed, task, pair_type, variant, per_class, epochs, lr, weight_decay, batch_size, d,
        w_axis, f_min, f_max, path_hidden, final_hidden, head_hidden, init_gain, out_dir
    );
    cfg.validate()?;
    Ok(cfg)
}

/// Resolve a path inside the output directory, creating the directory.
fn out_path(cfg: &RunConfig, file: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(&cfg.out_dir)
        .map_err(|e| CliError::Data(format!("create {}: {e}", cfg.out_dir)))?;
    Ok(Path::new(&cfg.out_dir).join(file))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::Data(format!("write {}: {e}", path.display())))
}

fn load_dataset(path: &Path) -> Result<Dataset, CliError> {
    let f = fs::File::open(path)
        .map_err(|e| CliError::Data(format!("dataset {}: {e}", path.display())))?;
    Ok(Dataset::read_jsonl(BufReader::new(f))?)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = effective_config(&cli)?;
    match cli.cmd {
        Cmd::Gendata { out } => cmd_gendata(&cfg, out),
        Cmd::Encode { input, out, checkpoint, features, spectra, grid_csv } => {
            cmd_encode(&cfg, &input, out, checkpoint, features, spectra, grid_csv)
        }
        Cmd::Train { data } => cmd_train(&cfg, data),
        Cmd::Eval { checkpoint, data } => cmd_eval(&cfg, checkpoint, data),
        Cmd::Verify { tol_scale, mutation, json } => cmd_verify(&cfg, tol_scale, mutation, json),
        Cmd::Ablate { data, seeds } => cmd_ablate(&cfg, data, seeds),
    }
}

fn cmd_gendata(cfg: &RunConfig, out: Option<PathBuf>) -> Result<(), CliError> {
    let ds = gen_pairs(&GenSpec {
        task: cfg.task,
        pair_type: cfg.pair_type,
        per_class: cfg.per_class,
        seed: cfg.seed,
        config_hash: cfg.hash_hex(),
    })?;
    let path = match out {
        Some(p) => p,
        None => out_path(cfg, "pairs.jsonl")?,
    };
    let f = fs::File::create(&path)
        .map_err(|e| CliError::Data(format!("create {}: {e}", path.display())))?;
    let mut w = BufWriter::new(f);
    ds.write_jsonl(&mut w)?;
    w.flush().map_err(|e| CliError::Data(e.to_string()))?;

    println!("task {}  pairs {}  seed {}", ds.task.name(), ds.pair_type.name(), ds.seed);
    let names = ds.class_names();
    if names.is_empty() {
        let dists: Vec<f64> = ds.pairs.iter().filter_map(|p| p.dist).collect();
        let (mut lo, mut hi, mut sum) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
        for &d in &dists {
            lo = lo.min(d);
            hi = hi.max(d);
            sum += d;
        }
        println!(
            "  {} pairs, centroid distance min {:.4} mean {:.4} max {:.4}",
            dists.len(),
            lo,
            sum / dists.len() as f64,
            hi
        );
    } else {
        for (k, name) in names.iter().enumerate() {
            let n = ds.pairs.iter().filter(|p| p.class() == Some(k as u8)).count();
            println!("  {name:<12} {n}");
        }
    }
    println!("wrote {} pairs -> {}", ds.pairs.len(), path.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_encode(
    cfg: &RunConfig,
    input: &Path,
    out: Option<PathBuf>,
    checkpoint: Option<PathBuf>,
    features: Option<PathBuf>,
    spectra: Option<PathBuf>,
    grid_csv: Option<PathBuf>,
) -> Result<(), CliError> {
    let text = fs::read_to_string(input)
        .map_err(|e| CliError::Data(format!("input {}: {e}", input.display())))?;
    let mut geoms = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let at = |e: &dyn std::fmt::Display| {
            CliError::Data(format!("{}:{}: {e}", input.display(), idx + 1))
        };
        let value: serde_json::Value = serde_json::from_str(line).map_err(|e| at(&e))?;
        geoms.push(from_geojson_value(&value).map_err(|e| at(&e))?);
    }
    if geoms.is_empty() {
        return Err(CliError::Data(format!("{}: no geometries", input.display())));
    }

    // A checkpoint carries its own config, which is the authority on grid
    // and shapes; without one, the CLI config plus fresh init applies.
    let (model_cfg, model): (RunConfig, Model) = match checkpoint {
        Some(ckpt) => {
            let f = fs::File::open(&ckpt)
                .map_err(|e| CliError::Data(format!("checkpoint {}: {e}", ckpt.display())))?;
            let (c, m) = load_checkpoint(&mut BufReader::new(f))?;
            (c, m)
        }
        None => {
            let grid = cfg.grid()?;
            (cfg.clone(), fresh_model(cfg, grid.len()))
        }
    };
    let grid = model_cfg.grid()?;
    let feats = side_features(geoms.iter(), &grid)?;
    let rows: Vec<usize> = (0..geoms.len()).collect();
    let emb = embed(&model, &feats, &rows);
    let hash = model_cfg.hash_hex();

    let path = match out {
        Some(p) => p,
        None => out_path(cfg, "embeddings.csv")?,
    };
    let mut csv = format!("# config: {hash}\n");
    csv.push_str("index");
    for j in 0..emb.ncols() {
        csv.push_str(&format!(",e{j}"));
    }
    csv.push('\n');
    for (i, row) in emb.outer_iter().enumerate() {
        csv.push_str(&i.to_string());
        for x in row.iter() {
            csv.push_str(&format!(",{x}"));
        }
        csv.push('\n');
    }
    write_file(&path, csv.as_bytes())?;
    println!("encoded {} geometries (d={}) -> {}", geoms.len(), emb.ncols(), path.display());

    if let Some(p) = features {
        let w = grid.len();
        let mut csv = format!("# config: {hash}\n");
        csv.push_str("index");
        for j in 0..w {
            csv.push_str(&format!(",z{j}"));
        }
        for j in 0..w {
            csv.push_str(&format!(",phi{j}"));
        }
        csv.push('\n');
        for i in 0..geoms.len() {
            csv.push_str(&i.to_string());
            for j in 0..w {
                csv.push_str(&format!(",{}", feats.z[(i, j)]));
            }
            for j in 0..w {
                csv.push_str(&format!(",{}", feats.phi[(i, j)]));
            }
            csv.push('\n');
        }
        write_file(&p, csv.as_bytes())?;
        println!("features -> {}", p.display());
    }

    if let Some(p) = spectra {
        let mut specs = Vec::with_capacity(geoms.len());
        for g in &geoms {
            specs.push(encode_spectrum(g, &grid).map_err(|e| CliError::Data(e.to_string()))?);
        }
        let f = fs::File::create(&p)
            .map_err(|e| CliError::Data(format!("create {}: {e}", p.display())))?;
        let mut w = BufWriter::new(f);
        write_spectra(&mut w, &specs, &model_cfg.hash_bytes())
            .map_err(|e| CliError::Data(e.to_string()))?;
        w.flush().map_err(|e| CliError::Data(e.to_string()))?;
        println!("spectra -> {}", p.display());
    }

    if let Some(p) = grid_csv {
        write_file(&p, grid.to_csv().as_bytes())?;
        println!("grid -> {}", p.display());
    }
    Ok(())
}

fn cmd_train(cfg: &RunConfig, data: Option<PathBuf>) -> Result<(), CliError> {
    let data_path = match data {
        Some(p) => p,
        None => out_path(cfg, "pairs.jsonl")?,
    };
    let ds = load_dataset(&data_path)?;
    let trained = train(cfg, &ds)?;

    let ckpt_path = out_path(cfg, "model.p2vm")?;
    let f = fs::File::create(&ckpt_path)
        .map_err(|e| CliError::Data(format!("create {}: {e}", ckpt_path.display())))?;
    let mut w = BufWriter::new(f);
    save_checkpoint(&mut w, &trained.model, cfg)?;
    w.flush().map_err(|e| CliError::Data(e.to_string()))?;

    let json = serde_json::to_string_pretty(&trained.report)
        .map_err(|e| CliError::Data(e.to_string()))?;
    write_file(&out_path(cfg, "train_report.json")?, json.as_bytes())?;
    let text = trained.report.render_text();
    write_file(&out_path(cfg, "train_report.txt")?, text.as_bytes())?;

    print!("{text}");
    println!("checkpoint -> {}", ckpt_path.display());
    Ok(())
}

fn cmd_eval(
    cfg: &RunConfig,
    checkpoint: Option<PathBuf>,
    data: Option<PathBuf>,
) -> Result<(), CliError> {
    let ckpt_path = match checkpoint {
        Some(p) => p,
        None => out_path(cfg, "model.p2vm")?,
    };
    let data_path = match data {
        Some(p) => p,
        None => out_path(cfg, "pairs.jsonl")?,
    };
    let f = fs::File::open(&ckpt_path)
        .map_err(|e| CliError::Data(format!("checkpoint {}: {e}", ckpt_path.display())))?;
    let (model_cfg, model) = load_checkpoint(&mut BufReader::new(f))?;
    let ds = load_dataset(&data_path)?;
    let report = evaluate(&model_cfg, &model, &ds)?;

    let json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Data(e.to_string()))?;
    write_file(&out_path(cfg, "eval_report.json")?, json.as_bytes())?;
    let text = report.render_text();
    write_file(&out_path(cfg, "eval_report.txt")?, text.as_bytes())?;
    print!("{text}");
    Ok(())
}

fn cmd_verify(
    cfg: &RunConfig,
    tol_scale: f64,
    mutation: bool,
    json: Option<PathBuf>,
) -> Result<(), CliError> {
    if !(tol_scale > 0.0 && tol_scale.is_finite()) {
        return Err(CliError::Usage(format!("tol-scale must be positive, got {tol_scale}")));
    }
    let tol = Tolerances::scaled(tol_scale);
    let report = run_verify(cfg, &tol, mutation);
    print!("{}", report.render_text());
    if let Some(p) = json {
        let body =
            serde_json::to_string_pretty(&report).map_err(|e| CliError::Data(e.to_string()))?;
        write_file(&p, body.as_bytes())?;
    }
    if report.all_passed() {
        Ok(())
    } else {
        Err(CliError::VerifyFailed)
    }
}

fn cmd_ablate(cfg: &RunConfig, data: Option<PathBuf>, seeds: usize) -> Result<(), CliError> {
    if seeds == 0 {
        return Err(CliError::Usage("seeds must be at least 1".into()));
    }
    let data_path = match data {
        Some(p) => p,
        None => out_path(cfg, "pairs.jsonl")?,
    };
    let ds = load_dataset(&data_path)?;
    let seed_list: Vec<u64> = (0..seeds as u64).map(|i| cfg.seed.wrapping_add(i)).collect();
    let report = ablate(cfg, &ds, &seed_list)?;

    let json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Data(e.to_string()))?;
    write_file(&out_path(cfg, "ablation_report.json")?, json.as_bytes())?;
    let text = report.render_text();
    write_file(&out_path(cfg, "ablation_report.txt")?, text.as_bytes())?;
    print!("{text}");
    Ok(())
}
