//! Command-line front end: generate signals, decompose them, move data in
//! and out, and time the spatial stage.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on data or format errors.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use mdmvfif::dataio::{export_plotdata, export_result, export_stfif, import_csv_stack, read_cube, write_cube, PlotSelector};
use mdmvfif::oscillation::{axis_extrema_counts, local_extrema, min_support_over_time};
use mdmvfif::scaling::{measure, runtime_slope};
use mdmvfif::temporal::{rotation_angles, temporal_filter_length};
use mdmvfif::{
    decompose, extend_boundary, gen_example1, gen_example2, gen_separable, st_fif, trim_boundary,
    DecompositionResult, Error, SignalCube, StFifResult, StopConfig,
};

/// Every tunable constant the command line falls back to.
pub mod defaults {
    pub const XI: f64 = 1.6;
    /// Relative-change threshold of the inner loop. This is `sqrt(1e-3)`,
    /// i.e. `1e-3` on the squared norm ratio.
    pub const DELTA: f64 = 0.0316;
    pub const MAX_INNER: usize = 200;
    pub const MAX_IMFS: usize = 9;
    pub const EXTEND: super::Extend = super::Extend::None;
    pub const SEED: u64 = 0;
    /// Time steps of every cube timed by `bench`.
    pub const BENCH_TIME_LEN: usize = 64;
    pub const BENCH_REPEATS: usize = 3;
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Example1,
    Example2,
    Separable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Extend {
    None,
    Reflect,
}

#[derive(Parser, Debug)]
#[command(name = "mdmvfif", version, about = "Space-time decomposition by fast iterative filtering")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct DecomposeArgs {
    #[arg(long = "in", value_name = "PATH")]
    input: PathBuf,
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    #[arg(long, default_value_t = defaults::XI)]
    xi: f64,
    #[arg(long, default_value_t = defaults::DELTA)]
    delta: f64,
    #[arg(long, default_value_t = defaults::MAX_INNER)]
    max_inner: usize,
    #[arg(long, default_value_t = defaults::MAX_IMFS)]
    max_imfs: usize,
    #[arg(long, value_enum, default_value_t = defaults::EXTEND)]
    extend: Extend,
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a synthetic cube.
    Generate {
        #[arg(long, value_enum)]
        preset: Preset,
        #[arg(long, value_name = "NX,NY,NT")]
        dims: List,
        #[arg(long, default_value_t = defaults::SEED)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Alternating spatial/temporal decomposition.
    Decompose(DecomposeArgs),
    /// Separable decomposition with one space-time kernel per IMF.
    Stfif(DecomposeArgs),
    /// Stack the CSV grids listed in a manifest into a cube file.
    Import {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// CSV of one time slice or one location's time series.
    ExportPlot {
        #[arg(long = "in", value_name = "PATH")]
        input: PathBuf,
        #[arg(long, conflicts_with = "series", required_unless_present = "series")]
        slice: Option<usize>,
        #[arg(long, value_name = "V1,V2")]
        series: Option<List>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Time one spatial IMF on square grids and write a size/runtime table.
    Bench {
        #[arg(long, value_name = "LIST")]
        sizes: List,
        #[arg(long)]
        out: PathBuf,
    },
    /// Dimensions, extrema and rotation-angle summary of a cube.
    Info {
        #[arg(long = "in", value_name = "PATH")]
        input: PathBuf,
    },
}

/// Comma-separated unsigned integers, e.g. `128,128,256`.
#[derive(Debug, Clone, PartialEq, Eq)]
struct List(Vec<usize>);

impl std::str::FromStr for List {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split(',')
            .map(|p| p.trim().parse::<usize>().map_err(|e| format!("{p:?}: {e}")))
            .collect::<Result<_, _>>()
            .map(List)
    }
}

fn init_logging() {
    let _ = env_logger::Builder::new()
        .filter_level(log::LevelFilter::Info)
        .parse_default_env()
        .target(env_logger::Target::Stderr)
        .format_timestamp(None)
        .try_init();
}

/// Parses `argv` (program name first) and runs the subcommand.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    init_logging();
    match execute(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            EXIT_DATA
        }
    }
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn execute(command: Command) -> Result<(), Error> {
    match command {
        Command::Generate { preset, dims, seed, out } => generate(preset, &dims.0, seed, &out),
        Command::Decompose(args) => with_threads(args.threads, || run_decompose(&args)),
        Command::Stfif(args) => with_threads(args.threads, || run_stfif(&args)),
        Command::Import { manifest, out } => {
            let cube = import_csv_stack(&manifest)?;
            write_cube(&cube, &out)?;
            eprintln!("imported {:?} into {}", cube.dims(), out.display());
            Ok(())
        }
        Command::ExportPlot { input, slice, series, out } => {
            let cube = read_cube(&input)?;
            let selector = match (slice, series) {
                (Some(t), _) => PlotSelector::Slice(t),
                (None, Some(v)) => PlotSelector::Series(v.0),
                (None, None) => unreachable!("clap requires one selector"),
            };
            let text = export_plotdata(&cube, &selector)?;
            fs::write(&out, text).map_err(|e| io_err(&out, e))
        }
        Command::Bench { sizes, out } => bench(&sizes.0, &out),
        Command::Info { input } => info(&input),
    }
}

fn with_threads(threads: Option<usize>, job: impl FnOnce() -> Result<(), Error> + Send) -> Result<(), Error> {
    match threads {
        None => job(),
        Some(0) => Err(Error::InvalidConfig("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?
            .install(job),
    }
}

fn generate(preset: Preset, dims: &[usize], seed: u64, out: &Path) -> Result<(), Error> {
    let [nx, ny, nt] = dims else {
        return Err(Error::InvalidDims(dims.to_vec()));
    };
    let (nx, ny, nt) = (*nx, *ny, *nt);
    let (cube, _) = match preset {
        Preset::Example1 => gen_example1(nx, ny, nt, seed)?,
        Preset::Example2 => gen_example2(nx, ny, nt, seed)?,
        // one cycle per 16 samples on x and t
        Preset::Separable => gen_separable(nx, ny, nt, (nx / 16).max(1), (nt / 16).max(1))?,
    };
    write_cube(&cube, out)?;
    eprintln!("wrote {preset:?} {:?} to {}", cube.dims(), out.display());
    Ok(())
}

fn stop_config(args: &DecomposeArgs) -> Result<StopConfig, Error> {
    StopConfig::new(args.delta, args.max_inner, args.max_imfs)
}

fn reflect_pad(cube: &SignalCube) -> Vec<usize> {
    cube.dims().iter().map(|n| (n - 1) / 2).collect()
}

fn load_input(args: &DecomposeArgs) -> Result<(SignalCube, Option<Vec<usize>>), Error> {
    let cube = read_cube(&args.input)?;
    match args.extend {
        Extend::None => Ok((cube, None)),
        Extend::Reflect => {
            let pad = reflect_pad(&cube);
            Ok((extend_boundary(&cube, &pad)?, Some(pad)))
        }
    }
}

fn trim_all(cubes: &mut [SignalCube], pad: &[usize]) -> Result<(), Error> {
    for c in cubes.iter_mut() {
        *c = trim_boundary(c, pad)?;
    }
    Ok(())
}

fn run_decompose(args: &DecomposeArgs) -> Result<(), Error> {
    let stop = stop_config(args)?;
    let (cube, pad) = load_input(args)?;
    let mut result: DecompositionResult = decompose(&cube, args.xi, &stop)?;
    if let Some(pad) = pad {
        trim_all(&mut result.spatial_imfs, &pad)?;
        trim_all(&mut result.temporal_imfs, &pad)?;
        result.residual = trim_boundary(&result.residual, &pad)?;
    }
    for r in &result.diagnostics {
        eprintln!("{} round {}: {} iterations={} clamped={}", r.stage, r.round, r.scale, r.iterations, r.clamped_bins);
    }
    let manifest = export_result(&result, &args.out)?;
    eprintln!(
        "{} spatial + {} temporal IMFs, manifest {}",
        result.spatial_imfs.len(),
        result.temporal_imfs.len(),
        manifest.display()
    );
    Ok(())
}

fn run_stfif(args: &DecomposeArgs) -> Result<(), Error> {
    let stop = stop_config(args)?;
    let (cube, pad) = load_input(args)?;
    let mut result: StFifResult = st_fif(&cube, args.xi, &stop)?;
    if let Some(pad) = pad {
        trim_all(&mut result.imfs, &pad)?;
        result.residual = trim_boundary(&result.residual, &pad)?;
    }
    for r in &result.diagnostics {
        eprintln!("{} round {}: {} iterations={} clamped={}", r.stage, r.round, r.scale, r.iterations, r.clamped_bins);
    }
    let manifest = export_stfif(&result, &args.out)?;
    eprintln!("{} space-time IMFs, manifest {}", result.imfs.len(), manifest.display());
    Ok(())
}

fn bench(sizes: &[usize], out: &Path) -> Result<(), Error> {
    if sizes.is_empty() {
        return Err(Error::InvalidConfig("--sizes is empty".into()));
    }
    let stop = StopConfig::new(defaults::DELTA, defaults::MAX_INNER, 1)?;
    let points = measure(sizes, defaults::BENCH_TIME_LEN, defaults::BENCH_REPEATS, &stop)?;
    let mut table = String::from("size,samples,seconds,iterations\n");
    for p in &points {
        writeln!(table, "{},{},{:.6},{}", p.size, p.samples(), p.runtime.as_secs_f64(), p.iterations)
            .expect("string write");
        eprintln!("{:>5}  {:>10} samples  {:>10.4} s  {} iterations", p.size, p.samples(), p.runtime.as_secs_f64(), p.iterations);
    }
    if let Some(slope) = runtime_slope(&points) {
        eprintln!("log-log slope of runtime vs samples: {slope:.3}");
    }
    fs::write(out, table).map_err(|e| io_err(out, e))
}

fn info(input: &Path) -> Result<(), Error> {
    let cube = read_cube(input)?;
    let mut text = String::new();
    let w = &mut text;
    writeln!(w, "dims: {:?} (time last)", cube.dims()).expect("string write");
    writeln!(w, "range: [{:.6}, {:.6}], mean {:.6}", cube.values().iter().cloned().fold(f64::INFINITY, f64::min), cube.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max), cube.mean()).expect("string write");
    let first = axis_extrema_counts(&cube.time_slice(0));
    let last = axis_extrema_counts(&cube.time_slice(cube.time_len() - 1));
    writeln!(w, "spatial extrema per axis: first slice {first:?}, last slice {last:?}").expect("string write");
    match min_support_over_time(&cube, defaults::XI) {
        Ok(s) => writeln!(w, "minimal spatial support (xi {}): {s}", defaults::XI),
        Err(e) => writeln!(w, "minimal spatial support: unavailable ({e})"),
    }
    .expect("string write");
    match rotation_angles(&cube) {
        Ok(theta) => {
            let a = theta.angles();
            let mean = a.iter().sum::<f64>() / a.len() as f64;
            let min = a.iter().cloned().fold(f64::INFINITY, f64::min);
            let extrema = local_extrema(a).map(|r| r.count()).unwrap_or(0);
            writeln!(w, "theta: {} angles in [{min:.6}, {:.6}] rad, mean {mean:.6}, {extrema} extrema", a.len(), theta.max())
                .expect("string write");
            match temporal_filter_length(&theta) {
                Ok(l) => writeln!(w, "theta filter length (2x mean extrema spacing): {l}"),
                Err(e) => writeln!(w, "theta filter length: none ({e})"),
            }
            .expect("string write");
        }
        Err(e) => writeln!(w, "theta: unavailable ({e})").expect("string write"),
    }
    print!("{text}");
    Ok(())
}
