//! `wb` — randomized Wasserstein barycenters from the command line.
//!
//! Subcommands: `gen`, `sample`, `ot`, `bary exact`, `bary sua`, `frechet`,
//! `bound`, `sweep`, `render`, `lpsize`. Every run prints its effective
//! seed on stderr; randomized outputs are reproducible from `--seed`
//! regardless of `--threads`.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use wb_core::bounds;
use wb_core::datasets::{self, DatasetSpec, Family};
use wb_core::lp_oracle;
use wb_core::measures::{self, DiscreteMeasure};
use wb_core::ot;
use wb_core::pipeline::{self, CombineRule, SolverChoice};
use wb_core::sua::{StepSchedule, SuaConfig};

#[derive(Parser)]
#[command(name = "wb", version, about = "Wasserstein barycenters by randomized resampling")]
struct Cli {
    /// Worker threads (default: machine parallelism; env WB_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset family as measure CSVs.
    Gen(GenArgs),
    /// Resample a measure into an empirical measure.
    Sample(SampleArgs),
    /// Exact optimal transport between two measures; prints W_p.
    Ot(OtArgs),
    /// Barycenter solvers.
    #[command(subcommand)]
    Bary(BaryCommand),
    /// Fréchet functional of a candidate against data measures.
    Frechet(FrechetArgs),
    /// Evaluate every explicit error bound for a set of measures.
    Bound(BoundArgs),
    /// Full factorial (S, R) experiment sweep with CSV output.
    Sweep(SweepArgs),
    /// Render a 2D measure as a PGM heatmap and optional SVG scatter.
    Render(RenderArgs),
    /// Exact size of the full barycenter LP, in big integers.
    Lpsize(LpsizeArgs),
}

#[derive(Subcommand)]
enum BaryCommand {
    /// Exact LP barycenter on the centroid set (oracle scale).
    Exact(BaryExactArgs),
    /// Resample → descend → average (squared Euclidean cost).
    Sua(BarySuaArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Family: crescents | ellipses | nested-ellipses |
    /// multi-nested-ellipses | gaussians | cauchy-grid | dirichlet-grid |
    /// dirichlet-uniform | torsos | pentagonal-prisms.
    #[arg(long)]
    family: String,
    /// Number of measures.
    #[arg(long, default_value_t = 10)]
    n: usize,
    /// Atoms per measure (perfect square for grid families).
    #[arg(long, default_value_t = 64)]
    m: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Smallest shape semi-axis / radius.
    #[arg(long, default_value_t = 0.08)]
    axis_min: f64,
    /// Largest shape semi-axis / radius.
    #[arg(long, default_value_t = 0.28)]
    axis_max: f64,
    /// Ring count for the nested families.
    #[arg(long)]
    rings: Option<usize>,
    /// Dirichlet concentration for the weight families.
    #[arg(long, default_value_t = 1.0)]
    concentration: f64,
    /// Output directory for measure_###.csv files.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SampleArgs {
    /// Input measure CSV.
    #[arg(long)]
    input: PathBuf,
    /// Sample size.
    #[arg(long)]
    s: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output measure CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct OtArgs {
    /// Source measure CSV.
    a: PathBuf,
    /// Target measure CSV.
    b: PathBuf,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// Write the optimal plan as a dense CSV matrix.
    #[arg(long)]
    plan: Option<PathBuf>,
}

#[derive(Args)]
struct BaryExactArgs {
    /// Input measure CSVs.
    #[arg(long, num_args = 1.., required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// Candidate support CSV (weights column ignored); default: centroid set.
    #[arg(long)]
    support: Option<PathBuf>,
    /// LP variable cap.
    #[arg(long, default_value_t = lp_oracle::LP_VARIABLE_CAP)]
    cap: usize,
    /// Output barycenter CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BarySuaArgs {
    /// Input measure CSVs.
    #[arg(long, num_args = 1.., required = true)]
    inputs: Vec<PathBuf>,
    /// Resample size per measure.
    #[arg(long)]
    s: usize,
    /// Resampling repeats; the estimator is their linear average.
    #[arg(long, default_value_t = 1)]
    r: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Stochastic warmstart steps (default: two epochs, 2N).
    #[arg(long)]
    warmstart_steps: Option<usize>,
    /// Step schedule: `constant:A` or `harmonic:A,B`.
    #[arg(long, default_value = "constant:0.5")]
    step_schedule: String,
    /// Displacement tolerance relative to the support diameter.
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
    /// Keep the best repeat instead of the linear average.
    #[arg(long)]
    best_of_r: bool,
    /// Output barycenter CSV.
    #[arg(long)]
    out: PathBuf,
    /// Optional per-repeat records CSV.
    #[arg(long)]
    records: Option<PathBuf>,
}

#[derive(Args)]
struct FrechetArgs {
    /// Candidate measure CSV.
    #[arg(long)]
    candidate: PathBuf,
    /// Data measure CSVs.
    #[arg(long, num_args = 1.., required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
}

#[derive(Args)]
struct BoundArgs {
    /// Input measure CSVs.
    #[arg(long, num_args = 1.., required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// Sample size the bounds are evaluated at.
    #[arg(long)]
    s: usize,
    /// Also write the report as a key,value CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Synthetic family to sweep over (alternative to --inputs).
    #[arg(long, conflicts_with = "inputs")]
    family: Option<String>,
    /// Number of generated measures (with --family).
    #[arg(long, default_value_t = 10)]
    n: usize,
    /// Atoms per generated measure (with --family).
    #[arg(long, default_value_t = 64)]
    m: usize,
    /// Input measure CSVs (alternative to --family).
    #[arg(long, num_args = 1..)]
    inputs: Vec<PathBuf>,
    /// Sample sizes, comma separated.
    #[arg(long = "S", value_delimiter = ',', required = true)]
    sample_sizes: Vec<usize>,
    /// Repeat counts, comma separated.
    #[arg(long = "R", value_delimiter = ',', default_value = "1")]
    repeat_counts: Vec<usize>,
    /// Pipeline executions per (S, R) cell.
    #[arg(long, default_value_t = 10)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// Empirical solver: sua | exact.
    #[arg(long, default_value = "sua")]
    solver: String,
    /// Write measured runtimes into the records CSV (breaks byte-level
    /// reproducibility of the output).
    #[arg(long)]
    timings: bool,
    /// Output directory for records.csv and summary.csv.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct RenderArgs {
    /// Input measure CSV (2D).
    #[arg(long)]
    input: PathBuf,
    /// Raster side length.
    #[arg(long, default_value_t = 64)]
    grid: usize,
    /// Output PGM path.
    #[arg(long)]
    out: PathBuf,
    /// Optional SVG scatter path.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct LpsizeArgs {
    /// Number of measures.
    #[arg(long)]
    n: u64,
    /// Support sizes: one value broadcast to all measures, or N values.
    #[arg(long, value_delimiter = ',')]
    m: Vec<u64>,
    /// Common grid side; switches to the N-times-finer-grid support count.
    #[arg(long)]
    grid: Option<u64>,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_threads(cli.threads);
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eout(format!("error: {err:#}"));
            ExitCode::FAILURE
        }
    }
}

fn init_threads(flag: Option<usize>) {
    let threads = flag.or_else(|| {
        std::env::var("WB_THREADS").ok().and_then(|v| v.parse().ok())
    });
    if let Some(t) = threads {
        // A later duplicate initialization only matters in tests.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Gen(args) => gen(args),
        Command::Sample(args) => sample(args),
        Command::Ot(args) => transport(args),
        Command::Bary(BaryCommand::Exact(args)) => bary_exact(args),
        Command::Bary(BaryCommand::Sua(args)) => bary_sua(args),
        Command::Frechet(args) => frechet(args),
        Command::Bound(args) => bound(args),
        Command::Sweep(args) => run_sweep(args),
        Command::Render(args) => render(args),
        Command::Lpsize(args) => lpsize(args),
    }
}

fn print_seed(seed: u64) {
    eout(format!("seed: {seed}"));
}

/// Print a stdout line, exiting quietly if the pipe is gone (e.g. `| head`).
fn out(line: String) {
    use std::io::Write;
    if writeln!(std::io::stdout(), "{line}").is_err() {
        std::process::exit(0);
    }
}

/// Same for stderr.
fn eout(line: String) {
    use std::io::Write;
    let _ = writeln!(std::io::stderr(), "{line}");
}

fn load_measures(paths: &[PathBuf]) -> Result<Vec<DiscreteMeasure>> {
    paths
        .iter()
        .map(|path| {
            let mu = DiscreteMeasure::read_csv_path(path)
                .with_context(|| format!("loading {}", path.display()))?;
            if let Some(mass) = mu.original_mass() {
                eout(format!(
                    "warning: {} had total mass {mass}; weights renormalized",
                    path.display()
                ));
            }
            Ok(mu)
        })
        .collect()
}

fn gen(args: GenArgs) -> Result<()> {
    print_seed(args.seed);
    let family: Family = args.family.parse()?;
    let mut spec = DatasetSpec::new(family, args.n, args.m, args.seed);
    spec.axis_range = (args.axis_min, args.axis_max);
    if let Some(rings) = args.rings {
        spec.rings = rings;
    }
    spec.concentration = args.concentration;
    let measures = datasets::generate(&spec)?;
    std::fs::create_dir_all(&args.out_dir)?;
    for (i, mu) in measures.iter().enumerate() {
        let path = args.out_dir.join(format!("measure_{i:03}.csv"));
        mu.write_csv_path(&path)?;
    }
    out(format!("wrote {} {} measures to {}", measures.len(), family, args.out_dir.display()));
    Ok(())
}

fn sample(args: SampleArgs) -> Result<()> {
    print_seed(args.seed);
    if args.s == 0 {
        bail!("sample size must be at least 1");
    }
    let mu = DiscreteMeasure::read_csv_path(&args.input)?;
    let empirical = measures::sample_empirical(&mu, args.s, args.seed);
    empirical.measure().write_csv_path(&args.out)?;
    out(format!("wrote {} samples to {}", args.s, args.out.display()));
    Ok(())
}

fn transport(args: OtArgs) -> Result<()> {
    print_seed(0);
    let mu = DiscreteMeasure::read_csv_path(&args.a)?;
    let nu = DiscreteMeasure::read_csv_path(&args.b)?;
    let (plan, value) = ot::solve_ot(&mu, &nu, args.p)?;
    let distance = value.max(0.0).powf(1.0 / args.p);
    out(format!("{distance:?}"));
    if let Some(path) = args.plan {
        let mut out = String::new();
        for j in 0..plan.rows() {
            let row: Vec<String> =
                (0..plan.cols()).map(|k| plan.at(j, k).to_string()).collect();
            let _ = writeln!(out, "{}", row.join(","));
        }
        std::fs::write(&path, out)?;
        eout(format!("plan written to {}", path.display()));
    }
    Ok(())
}

fn bary_exact(args: BaryExactArgs) -> Result<()> {
    print_seed(0);
    let measures = load_measures(&args.inputs)?;
    let support = match &args.support {
        Some(path) => Some(DiscreteMeasure::read_csv_path(path)?.points().clone()),
        None => None,
    };
    let (bary, value) =
        lp_oracle::exact_barycenter_with_cap(&measures, args.p, support.as_ref(), args.cap)?;
    bary.write_csv_path(&args.out)?;
    out(format!("{value:?}"));
    eout(format!("support size: {}", bary.len()));
    Ok(())
}

fn parse_schedule(text: &str) -> Result<StepSchedule> {
    let (kind, rest) = text
        .split_once(':')
        .with_context(|| format!("bad schedule `{text}`; want constant:A or harmonic:A,B"))?;
    match kind {
        "constant" => Ok(StepSchedule::Constant(rest.parse()?)),
        "harmonic" => {
            let (a, b) = rest
                .split_once(',')
                .with_context(|| format!("harmonic schedule needs A,B in `{text}`"))?;
            Ok(StepSchedule::Harmonic { a: a.parse()?, b: b.parse()? })
        }
        other => bail!("unknown schedule `{other}`"),
    }
}

fn bary_sua(args: BarySuaArgs) -> Result<()> {
    print_seed(args.seed);
    let measures = load_measures(&args.inputs)?;
    let mut config = SuaConfig::for_measures(measures.len(), args.s, args.seed);
    config.repeats = args.r;
    config.schedule = parse_schedule(&args.step_schedule)?;
    if let Some(w) = args.warmstart_steps {
        config.warmstart_steps = w;
    }
    config.tolerance = args.tol;
    config.max_iters = args.max_iter;
    let rule = if args.best_of_r { CombineRule::BestOfR } else { CombineRule::LinearAverage };
    let outcome =
        pipeline::randomized_barycenter(&measures, 2.0, &config, SolverChoice::Sua, rule, None)?;
    outcome.barycenter.write_csv_path(&args.out)?;
    out(format!("{:?}", outcome.frechet));
    if let Some(path) = args.records {
        std::fs::write(&path, pipeline::records_to_csv(&outcome.records, true))?;
    }
    Ok(())
}

fn frechet(args: FrechetArgs) -> Result<()> {
    print_seed(0);
    let candidate = DiscreteMeasure::read_csv_path(&args.candidate)?;
    let measures = load_measures(&args.inputs)?;
    let value = pipeline::frechet_value(&candidate, &measures, args.p)?;
    out(format!("{value:?}"));
    Ok(())
}

fn bound(args: BoundArgs) -> Result<()> {
    print_seed(0);
    if args.s == 0 {
        bail!("sample size must be at least 1");
    }
    let measures = load_measures(&args.inputs)?;
    let report = bounds::bound_report(&measures, args.p, args.s);
    let mut rows: Vec<(String, String)> = vec![
        ("p".into(), format!("{:?}", report.p)),
        ("S".into(), report.sample_size.to_string()),
        ("diameter".into(), format!("{:?}", report.diameter)),
        ("E_joint".into(), format!("{:?}", report.e_joint.value)),
        ("E_joint_q".into(), format!("{:?}", report.e_joint.q)),
        ("E_joint_lmax".into(), report.e_joint.l_max.to_string()),
        ("empirical_bound".into(), format!("{:?}", report.empirical_bound)),
        ("gap_bound".into(), format!("{:?}", report.gap_bound)),
        ("gap_bound_euclidean_q2".into(), format!("{:?}", report.gap_bound_euclidean)),
        ("eq_p2".into(), format!("{:?}", report.eq_p2)),
        ("composed_p2".into(), format!("{:?}", report.composed_p2)),
        ("binomial_exact".into(), format!("{:?}", report.binomial.exact)),
        ("binomial_closed_form".into(), format!("{:?}", report.binomial.closed_form)),
    ];
    for (i, e) in report.e_per_measure.iter().enumerate() {
        rows.push((format!("E_measure_{i}"), format!("{:?}", e.value)));
    }
    for (key, value) in &rows {
        out(format!("{key}: {value}"));
    }
    if let Some(path) = args.csv {
        let mut out = String::from("key,value\n");
        for (key, value) in &rows {
            let _ = writeln!(out, "{key},{value}");
        }
        std::fs::write(path, out)?;
    }
    Ok(())
}

fn run_sweep(args: SweepArgs) -> Result<()> {
    print_seed(args.seed);
    let measures = if let Some(family) = &args.family {
        let family: Family = family.parse()?;
        let spec = DatasetSpec::new(family, args.n, args.m, args.seed);
        datasets::generate(&spec)?
    } else if !args.inputs.is_empty() {
        load_measures(&args.inputs)?
    } else {
        bail!("sweep needs --family or --inputs");
    };
    let solver = match args.solver.as_str() {
        "sua" => SolverChoice::Sua,
        "exact" => SolverChoice::Exact,
        other => bail!("unknown solver `{other}` (want sua or exact)"),
    };
    let result = pipeline::sweep(
        &measures,
        args.p,
        &args.sample_sizes,
        &args.repeat_counts,
        args.reps,
        args.seed,
        solver,
    )?;
    std::fs::create_dir_all(&args.out_dir)?;
    let records_path = args.out_dir.join("records.csv");
    let summary_path = args.out_dir.join("summary.csv");
    std::fs::write(&records_path, pipeline::records_to_csv(&result.records, args.timings))?;
    std::fs::write(&summary_path, pipeline::summaries_to_csv(&result.summaries))?;
    eout(format!("oracle: {} (value {:?})", result.oracle.label(), result.oracle_value));
    out(format!("wrote {} and {}", records_path.display(), summary_path.display()));
    Ok(())
}

fn render(args: RenderArgs) -> Result<()> {
    print_seed(0);
    let mu = DiscreteMeasure::read_csv_path(&args.input)?;
    let (image, clamped) = datasets::to_image(&mu, args.grid)?;
    if clamped > 0 {
        eout(format!("warning: {clamped} coordinates clamped into [0,1]^2"));
    }
    image.write_pgm(std::fs::File::create(&args.out)?)?;
    if let Some(path) = &args.svg {
        std::fs::write(path, scatter_svg(&mu))?;
    }
    out(format!("wrote {}", args.out.display()));
    Ok(())
}

/// Minimal scatter plot: one circle per atom, area proportional to weight,
/// y axis pointing up.
fn scatter_svg(mu: &DiscreteMeasure) -> String {
    let size = 1000.0;
    let peak = mu.weights().iter().fold(0.0f64, |a, &w| a.max(w));
    let mut out = String::from(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 1000 1000\">\n\
         <rect width=\"1000\" height=\"1000\" fill=\"white\"/>\n",
    );
    for k in 0..mu.len() {
        let p = mu.point(k);
        let x = p[0] * size;
        let y = (1.0 - p[1]) * size;
        let radius = 2.0 + 8.0 * (mu.weights()[k] / peak).sqrt();
        let _ = writeln!(
            out,
            "<circle cx=\"{x}\" cy=\"{y}\" r=\"{radius}\" fill=\"steelblue\" fill-opacity=\"0.7\"/>"
        );
    }
    out.push_str("</svg>\n");
    out
}

fn lpsize(args: LpsizeArgs) -> Result<()> {
    print_seed(0);
    if args.grid.is_none() && args.m.is_empty() {
        bail!("lpsize needs --m or --grid");
    }
    let size = lp_oracle::lp_size_estimate(args.n, &args.m, args.grid, args.p);
    out(format!("centroids: {}", size.centroids));
    out(format!("variables: {}", size.variables));
    out(format!("constraints: {}", size.constraints));
    Ok(())
}
