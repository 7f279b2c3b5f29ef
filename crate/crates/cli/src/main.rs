use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use wsm_core::bench::{rank_aggregate, run_bench, write_rows, BenchConfig, BenchRow};
use wsm_core::imageio::{load_image, save_image, write_palette, ImageFormat};
use wsm_core::pipeline::{run_quantize, Method, QuantizeConfig};
use wsm_core::{SamplingMode, Termination};

#[derive(Parser)]
#[command(name = "wsmq", version, about = "Color quantization with Weighted Sort-Means")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Quantize a single image.
    Quantize(QuantizeArgs),
    /// Run every method on every image and k, then rank the methods.
    Bench(BenchArgs),
}

#[derive(Args)]
struct IterArgs {
    /// Relative SSE change below which iteration stops.
    #[arg(long, default_value_t = 0.001)]
    epsilon: f64,
    #[arg(long, default_value_t = 100)]
    max_iters: usize,
    /// Run exactly this many iterations, ignoring --epsilon.
    #[arg(long)]
    fixed_iters: Option<usize>,
}

impl IterArgs {
    fn termination(&self) -> Result<Termination> {
        Ok(match self.fixed_iters {
            Some(n) => Termination::fixed(n),
            None => Termination::new(self.epsilon, self.max_iters)?,
        })
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Json,
    Csv,
}

#[derive(Args)]
struct QuantizeArgs {
    #[arg(long)]
    input: PathBuf,
    /// Palette size.
    #[arg(long = "colors")]
    k: usize,
    /// mc, ott, oct, wan, wu, bs, wsm-<x>, or wsm together with --init.
    #[arg(long)]
    method: String,
    /// Initializer for --method wsm: fgy, lbg, mmx, den, var, sff, kpp or a preclusterer.
    #[arg(long)]
    init: Option<String>,
    #[arg(long, default_value = "unique")]
    sampling: SamplingMode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    iters: IterArgs,
    /// Quantized image (.png or .ppm).
    #[arg(long)]
    output: PathBuf,
    #[arg(long)]
    palette_out: Option<PathBuf>,
    /// Print the run report to stdout.
    #[arg(long)]
    report: Option<ReportFormat>,
}

#[derive(Args)]
struct BenchArgs {
    /// Directory of .png/.ppm images.
    #[arg(long)]
    images: PathBuf,
    /// Comma-separated method tokens, or `all`.
    #[arg(long, value_delimiter = ',', required = true)]
    methods: Vec<String>,
    #[arg(long = "colors", value_delimiter = ',', required = true)]
    ks: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    runs: usize,
    /// Seed of run 0; run i uses seed + i.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "unique")]
    sampling: SamplingMode,
    #[command(flatten)]
    iters: IterArgs,
    #[arg(long)]
    csv: PathBuf,
    /// Rank summary CSV; printed to stdout as well.
    #[arg(long)]
    ranks: Option<PathBuf>,
    /// Write 0 for every time so that repeated runs give identical files.
    #[arg(long)]
    no_time: bool,
}

fn quantize(args: &QuantizeArgs) -> Result<()> {
    let method = Method::from_parts(&args.method, args.init.as_deref())?;
    if ImageFormat::from_path(&args.output).is_none() {
        bail!("cannot infer image format from {}", args.output.display());
    }
    let loaded = load_image(&args.input)?;
    let name = wsm_core::bench::image_name(&args.input);
    let cfg = QuantizeConfig {
        method,
        k: args.k,
        sampling: args.sampling,
        seed: args.seed,
        termination: args.iters.termination()?,
        timing: true,
    };
    let q = run_quantize(&loaded.image, &name, &cfg)?;
    save_image(&q.mapped.image, &args.output)?;
    if let Some(p) = &args.palette_out {
        write_palette(&q.palette, p)?;
    }
    log::info!("{name}: {} colors, mse {:.4}", q.report.actual_k, q.report.mse);
    match args.report {
        Some(ReportFormat::Json) => println!("{}", q.report.to_json()?),
        Some(ReportFormat::Csv) => print!("{}", q.report.to_csv()?),
        None => {}
    }
    Ok(())
}

fn list_images(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))? {
        let path = entry?.path();
        if path.is_file() && ImageFormat::from_path(&path).is_some() {
            out.push(path);
        }
    }
    out.sort();
    if out.is_empty() {
        bail!("no .png or .ppm images in {}", dir.display());
    }
    Ok(out)
}

fn parse_methods(tokens: &[String]) -> Result<Vec<Method>> {
    let mut out = Vec::new();
    for t in tokens {
        if t == "all" {
            out.extend(Method::all());
        } else {
            out.push(t.parse()?);
        }
    }
    out.dedup();
    Ok(out)
}

fn bench(args: &BenchArgs) -> Result<()> {
    let mut cfg = BenchConfig::new(list_images(&args.images)?, parse_methods(&args.methods)?, args.ks.clone());
    cfg.runs = args.runs;
    cfg.seed_base = args.seed;
    cfg.sampling = args.sampling;
    cfg.termination = args.iters.termination()?;
    cfg.record_time = !args.no_time;
    let rows = run_bench(&cfg)?;
    let file = File::create(&args.csv).with_context(|| format!("creating {}", args.csv.display()))?;
    write_rows(&rows, BufWriter::new(file))?;
    let failed = rows.iter().filter(|r| matches!(r, BenchRow::Failed { .. })).count();
    if failed > 0 {
        log::warn!("{failed} of {} cells failed", rows.len());
    }
    let table = rank_aggregate(&rows);
    if let Some(p) = &args.ranks {
        table.write_csv(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?))?;
    }
    let mut out = io::stdout().lock();
    writeln!(out, "{:<10} {:>5} {:>9} {:>9} {:>9}", "method", "k", "mse_rank", "time_rank", "overall")?;
    for e in &table.entries {
        let k = e.k.map_or_else(|| "all".to_owned(), |k| k.to_string());
        writeln!(out, "{:<10} {:>5} {:>9.2} {:>9.2} {:>9.3}", e.method, k, e.mse_rank, e.time_rank, e.overall)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Quantize(a) => quantize(a),
        Command::Bench(a) => bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
