use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use elscreen::baselines::baseline_screen;
use elscreen::iterative::{iterative_screen, IterativeConfig};
use elscreen::simgen::{run_experiment_with, MethodConfig, SimulationSpec};
use elscreen::{
    el_logratio, el_logratio_bruteforce, load_csv, screen, vc_screen, Bandwidth, CsvOptions,
    Method, RescaleMode, ScreenError, ScreeningConfig, Selection, VcConfig,
};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

#[derive(Parser)]
#[command(name = "elscreen", version, about = "Local empirical-likelihood feature screening")]
struct Cli {
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Screen the predictors of a CSV file.
    Screen(ScreenArgs),
    /// Run a simulation design and tabulate selection frequencies.
    Simulate(SimulateArgs),
    /// Compare the EL solver against the brute-force dual and time both.
    BenchEl(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Rescale {
    None,
    Minmax,
    Rank,
}

impl From<Rescale> for RescaleMode {
    fn from(r: Rescale) -> Self {
        match r {
            Rescale::None => RescaleMode::None,
            Rescale::Minmax => RescaleMode::Minmax,
            Rescale::Rank => RescaleMode::Rank,
        }
    }
}

#[derive(Args, Serialize)]
struct ScreenArgs {
    #[arg(long)]
    input: PathBuf,
    /// Response column name.
    #[arg(long)]
    response: String,
    /// Index column for varying-coefficient screening.
    #[arg(long)]
    index: Option<String>,
    #[arg(long, default_value = "el", value_parser = parse_method)]
    method: Method,
    #[arg(long, default_value_t = 20)]
    top_d: usize,
    /// `auto` for the default bandwidth rule, or a fixed positive value.
    #[arg(long, default_value = "auto")]
    bandwidth: String,
    /// Per-predictor rescaling applied before smoothing.
    #[arg(long, value_enum, default_value = "none")]
    rescale: Rescale,
    /// Keep the response uncentred.
    #[arg(long)]
    no_center: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct SimulateArgs {
    #[arg(long)]
    example: u8,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: usize,
    /// Noise level; defaults to the design's own.
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long, default_value_t = 100)]
    reps: usize,
    /// Defaults to `vc_el` for design 5 and `el` otherwise.
    #[arg(long, value_parser = parse_method)]
    method: Option<Method>,
    #[arg(long, default_value_t = 2024)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    top_d: usize,
    /// Design 2 only: constant noise variance.
    #[arg(long)]
    homoscedastic: bool,
    #[arg(long, value_enum, default_value = "none")]
    rescale: Rescale,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Largest instance size; sizes are drawn from 2..=n.
    #[arg(long, default_value_t = 12)]
    n: usize,
    #[arg(long, default_value_t = 1000)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse::<Method>().map_err(|e| e.to_string())
}

enum Failure {
    Usage(String),
    Internal(String),
}

impl From<ScreenError> for Failure {
    fn from(e: ScreenError) -> Self {
        if e.is_validation() {
            Failure::Usage(e.to_string())
        } else {
            Failure::Internal(e.to_string())
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Usage(format!("{}: {e}", path.display()))
}

fn json_failure(e: serde_json::Error) -> Failure {
    Failure::Internal(e.to_string())
}

#[derive(Serialize)]
struct ScreenMetadata<'a> {
    command: &'static str,
    version: &'static str,
    argv: Vec<String>,
    args: &'a ScreenArgs,
    n: usize,
    p: usize,
    config: serde_json::Value,
}

fn bandwidth_policy(raw: &str) -> Result<Option<f64>, Failure> {
    if raw == "auto" {
        return Ok(None);
    }
    match raw.parse::<f64>() {
        Ok(h) if h > 0.0 && h.is_finite() => Ok(Some(h)),
        _ => Err(Failure::Usage(format!(
            "--bandwidth must be `auto` or a positive number, got `{raw}`"
        ))),
    }
}

fn create_out(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))
}

fn write_file(path: PathBuf, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(&path, bytes).map_err(|e| io_failure(&path, e))
}

fn run_screen(args: &ScreenArgs) -> Result<(), Failure> {
    if args.method == Method::VcEl && args.index.is_none() {
        return Err(Failure::Usage(
            "method vc_el requires --index naming the index column".into(),
        ));
    }
    if args.top_d == 0 {
        return Err(Failure::Usage("--top-d must be at least 1".into()));
    }
    let fixed = bandwidth_policy(&args.bandwidth)?;
    let opts = CsvOptions {
        index_col: args.index.as_deref(),
        center_response: !args.no_center,
        ..CsvOptions::new(&args.response)
    };
    let data = load_csv(&args.input, &opts)?;
    let selection = Selection::TopD(args.top_d);
    let mut scfg = ScreeningConfig {
        selection,
        rescale: args.rescale.into(),
        ..Default::default()
    };
    if let Some(h) = fixed {
        scfg.kernel.bandwidth = Bandwidth::Fixed(h);
    }
    create_out(&args.out)?;
    let start = Instant::now();

    let (report, config) = match args.method {
        Method::El => (screen(&data, &scfg)?, to_json(&scfg)?),
        Method::VcEl => {
            let mut vcfg = VcConfig {
                selection,
                ..Default::default()
            };
            if let Some(h) = fixed {
                vcfg.kernel_z.bandwidth = Bandwidth::Fixed(h);
            }
            (vc_screen(&data, &vcfg)?, to_json(&vcfg)?)
        }
        Method::Sirs | Method::Dcsis | Method::ParametricEl => {
            let r = baseline_screen(&data, args.method, selection)?;
            (r, serde_json::json!({ "selection": selection }))
        }
        Method::IterativeEl => {
            let mut icfg = IterativeConfig::for_n(data.n());
            icfg.selector.seed = args.seed;
            let result = iterative_screen(&data, &scfg, &icfg)?;
            let mut trace = Vec::new();
            result.write_trace_csv(&mut trace)?;
            write_file(args.out.join("trace.csv"), &trace)?;
            let mut csv = String::from("feature,selected\n");
            for (j, name) in data.feature_names().iter().enumerate() {
                let kept = result.final_set.contains(&j) as u8;
                csv.push_str(&format!("{name},{kept}\n"));
            }
            write_file(args.out.join("report.csv"), csv.as_bytes())?;
            let config = serde_json::json!({ "screening": scfg, "iterative": icfg });
            write_metadata(args, &data, config)?;
            eprintln!(
                "kept {} of {} features in {} rounds ({:.2} s)",
                result.final_set.len(),
                data.p(),
                result.rounds(),
                start.elapsed().as_secs_f64()
            );
            return Ok(());
        }
    };
    let mut buf = Vec::new();
    report.write_csv(&mut buf)?;
    write_file(args.out.join("report.csv"), &buf)?;
    write_metadata(args, &data, config)?;
    for (j, msg) in &report.diagnostics {
        eprintln!("warning: {}: {msg}", data.feature_names()[*j]);
    }
    eprintln!(
        "screened {} features, selected {} ({:.2} s)",
        data.p(),
        report.selected.len(),
        start.elapsed().as_secs_f64()
    );
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> Result<serde_json::Value, Failure> {
    serde_json::to_value(v).map_err(json_failure)
}

fn write_metadata(
    args: &ScreenArgs,
    data: &elscreen::Dataset,
    config: serde_json::Value,
) -> Result<(), Failure> {
    let meta = ScreenMetadata {
        command: "screen",
        version: env!("CARGO_PKG_VERSION"),
        argv: std::env::args().skip(1).collect(),
        args,
        n: data.n(),
        p: data.p(),
        config,
    };
    let text = serde_json::to_string_pretty(&meta).map_err(json_failure)?;
    write_file(args.out.join("metadata.json"), text.as_bytes())
}

fn run_simulate(args: &SimulateArgs) -> Result<(), Failure> {
    let mut spec = SimulationSpec::new(args.example, args.n, args.p);
    spec.reps = args.reps;
    spec.seed = args.seed;
    spec.top_d = args.top_d;
    spec.heteroscedastic = !args.homoscedastic;
    if let Some(noise) = args.noise {
        spec.noise = noise;
    }
    if let Some(m) = args.method {
        spec.method = m;
    }
    spec.validate()?;
    let mut cfg = MethodConfig::default();
    cfg.screening.rescale = args.rescale.into();
    create_out(&args.out)?;
    let table = run_experiment_with(&spec, &cfg)?;
    let mut buf = Vec::new();
    table.write_csv(&mut buf)?;
    write_file(args.out.join("frequency.csv"), &buf)?;
    let echo = serde_json::json!({
        "command": "simulate",
        "version": env!("CARGO_PKG_VERSION"),
        "argv": std::env::args().skip(1).collect::<Vec<_>>(),
        "spec": spec,
        "config": cfg,
    });
    let text = serde_json::to_string_pretty(&echo).map_err(json_failure)?;
    write_file(args.out.join("spec.json"), text.as_bytes())?;
    println!(
        "{} example {} n={} p={} reps={}: counts {:?}, inactive mean {:.4}",
        spec.method, spec.example_id, spec.n, spec.p, spec.reps, table.counts, table.inactive_mean
    );
    eprintln!("{:.1} s", table.runtime_secs);
    Ok(())
}

fn run_bench(args: &BenchArgs) -> Result<(), Failure> {
    if !(2..=20).contains(&args.n) || args.reps == 0 {
        return Err(Failure::Usage(
            "bench-el needs 2 <= --n <= 20 and --reps >= 1".into(),
        ));
    }
    let mut rng = elscreen::rng::stream_rng(args.seed, 0xbe, 0, 0);
    let mut worst: f64 = 0.0;
    let (mut finite, mut infinite, mut mismatched) = (0usize, 0usize, 0usize);
    let (mut fast_secs, mut slow_secs) = (0.0, 0.0);
    for _ in 0..args.reps {
        let n = rng.gen_range(2..=args.n);
        let v: Vec<f64> = (0..n)
            .map(|_| if rng.gen_bool(0.25) { 0.0 } else { rng.sample(StandardNormal) })
            .collect();
        let t = Instant::now();
        let fast = el_logratio(&v)?.logratio;
        fast_secs += t.elapsed().as_secs_f64();
        let t = Instant::now();
        let slow = el_logratio_bruteforce(&v, 200_001);
        slow_secs += t.elapsed().as_secs_f64();
        if fast.is_finite() && slow.is_finite() {
            finite += 1;
            worst = worst.max((fast - slow).abs());
        } else if fast == slow {
            infinite += 1;
        } else {
            mismatched += 1;
        }
    }
    let per = |s: f64| 1e6 * s / args.reps as f64;
    println!("instances        {}", args.reps);
    println!("finite           {finite}");
    println!("infinite agreed  {infinite}");
    println!("mismatched       {mismatched}");
    println!("max abs diff     {worst:.3e}");
    println!("solver us/call   {:.3}", per(fast_secs));
    println!("brute us/call    {:.1}", per(slow_secs));
    if mismatched > 0 || worst > 1e-6 {
        return Err(Failure::Internal("solver disagrees with the brute-force dual".into()));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match &cli.command {
        Command::Screen(a) => run_screen(a),
        Command::Simulate(a) => run_simulate(a),
        Command::BenchEl(a) => run_bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(2)
        }
    }
}
