use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hdloc::analysis::{are_table, are_table_kinds};
use hdloc::simharness::report::render_markdown;
use hdloc::simharness::store::ResultStore;
use hdloc::simharness::tables::{
    are_cells, describe, run_table_with_progress, ComparedCell, TableArtifact, TableId, TableOverrides,
};
use hdloc::simharness::{run_experiment, ExperimentConfig, PowerTable};
use hdloc::stat_tests::run_test;
use hdloc::{TestKind, TraceMode, DEFAULT_SEED};
use hdloc_cli::check::{run_checks, CheckOptions};
use hdloc_cli::{config, data, output};

#[derive(Parser)]
#[command(name = "hdloc", version, about = "High-dimensional one-sample location tests")]
struct Cli {
    /// Master seed; falls back to HDLOC_SEED, then the built-in default.
    #[arg(long, global = true, env = "HDLOC_SEED")]
    seed: Option<u64>,
    /// Worker threads: a count or "auto".
    #[arg(long, global = true, default_value = "auto")]
    threads: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one test on a numeric CSV file (rows are observations).
    Test(TestArgs),
    /// Reproduce a table, or run one experiment from a config file.
    Simulate(SimulateArgs),
    /// Estimate asymptotic relative efficiencies.
    Are(AreArgs),
    /// Run the self-check suite.
    Check(CheckArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Md,
}

#[derive(Args)]
struct TestArgs {
    data: PathBuf,
    #[arg(long, value_parser = parse_test, default_value = "sr")]
    test: TestKind,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, value_parser = parse_trace_mode, default_value = "reduced")]
    trace_mode: TraceMode,
    /// Skip one header row.
    #[arg(long)]
    header: bool,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_parser = parse_table, conflicts_with = "config", required_unless_present = "config")]
    table: Option<TableId>,
    /// Experiment file with `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    null_reps: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, value_parser = parse_trace_mode)]
    trace_mode: Option<TraceMode>,
    /// Dimension for T1.
    #[arg(long)]
    are_p: Option<usize>,
    /// Replications for T1.
    #[arg(long)]
    are_reps: Option<usize>,
    /// Directory for CSV and Markdown files and the resumable result store.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Rendering printed to stdout.
    #[arg(long, value_enum, default_value = "md")]
    format: Format,
}

#[derive(Args)]
struct AreArgs {
    #[arg(long, default_value_t = 2000)]
    p: usize,
    #[arg(long, default_value_t = 10_000)]
    reps: usize,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "md")]
    format: Format,
}

#[derive(Args)]
struct CheckArgs {
    /// Evaluate the fast signed-rank path with a corrupted constant; the
    /// oracle check must then fail.
    #[arg(long, hide = true)]
    corrupt_fast_path: bool,
}

fn parse_test(s: &str) -> Result<TestKind, String> {
    s.parse().map_err(|e: hdloc::Error| e.to_string())
}

fn parse_trace_mode(s: &str) -> Result<TraceMode, String> {
    s.parse().map_err(|e: hdloc::Error| e.to_string())
}

fn parse_table(s: &str) -> Result<TableId, String> {
    s.parse().map_err(|e: hdloc::Error| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let threads = match cli.threads.as_str() {
        "auto" => 0,
        t => match t.parse::<usize>() {
            Ok(n) if n > 0 => n,
            _ => bail!("--threads must be a positive count or \"auto\", got {t:?}"),
        },
    };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
    let seed = cli.seed.unwrap_or(DEFAULT_SEED);
    pool.install(|| match cli.command {
        Command::Test(a) => cmd_test(a),
        Command::Simulate(a) => cmd_simulate(a, cli.seed, seed),
        Command::Are(a) => cmd_are(a, seed),
        Command::Check(a) => cmd_check(a, seed),
    })
}

fn cmd_test(a: TestArgs) -> Result<ExitCode> {
    let x = data::read_matrix(&a.data, a.header)?;
    let r = run_test(a.test, &x, a.alpha, a.trace_mode)?;
    let decision = if r.reject { "reject" } else { "do not reject" };
    println!("test        {}", r.test);
    println!("n           {}", x.n());
    println!("p           {}", x.p());
    println!("statistic   {:.6e}", r.raw);
    println!("sigma       {:.6e}", r.sigma_hat);
    println!("z           {:.4}", r.z);
    println!("p-value     {:.4e}", r.p_value);
    println!("decision    {decision} H0 at alpha = {}", r.alpha);
    if r.diagnostics.zero_signs > 0 {
        println!("zero signs  {}", r.diagnostics.zero_signs);
    }
    Ok(ExitCode::SUCCESS)
}

fn write_file(dir: &Path, name: &str, contents: &[u8]) -> Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(path)
}

fn power_csv(cells: &[ComparedCell]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    output::write_power_csv(&mut buf, cells)?;
    Ok(buf)
}

fn emit(format: Format, csv: &[u8], md: &str, out_dir: Option<&Path>, stem: &str) -> Result<()> {
    if let Some(dir) = out_dir {
        let c = write_file(dir, &format!("{stem}.csv"), csv)?;
        let m = write_file(dir, &format!("{stem}.md"), md.as_bytes())?;
        eprintln!("wrote {} and {}", c.display(), m.display());
    }
    let mut out = std::io::stdout().lock();
    match format {
        Format::Csv => out.write_all(csv)?,
        Format::Md => out.write_all(md.as_bytes())?,
    }
    Ok(())
}

fn summary_line(config: &ExperimentConfig, table: &PowerTable, cached: bool) -> String {
    let rates: Vec<String> =
        table.rows.iter().map(|r| format!("{} {:.1}%", r.test, 100.0 * r.rejection_rate)).collect();
    let when = if cached {
        "stored".to_string()
    } else {
        format!("{:.2} s", table.rows.first().map_or(0.0, |r| r.wall_time))
    };
    format!("{}: {} [{when}]", describe(config), rates.join("  "))
}

fn cmd_simulate(a: SimulateArgs, seed_override: Option<u64>, seed: u64) -> Result<ExitCode> {
    let store = a.out_dir.as_deref().map(ResultStore::open).transpose()?;
    if let Some(path) = &a.config {
        let mut c = config::read_config(path, seed)?;
        if let Some(s) = seed_override {
            c.master_seed = s;
        }
        if let Some(r) = a.reps {
            c.reps = r;
        }
        if let Some(r) = a.null_reps {
            c.null_reps = r;
        }
        if let Some(al) = a.alpha {
            c.alpha = al;
        }
        if let Some(m) = a.trace_mode {
            c.trace_mode = m;
        }
        let stored = store.as_ref().map(|s| s.get(&c.hash())).transpose()?.flatten();
        let (table, cached) = match stored {
            Some(rec) => (PowerTable { rows: rec.rows }, true),
            None => {
                let t = run_experiment(&c).with_context(|| describe(&c))?;
                if let Some(s) = &store {
                    s.append(&c, &t)?;
                }
                (t, false)
            }
        };
        eprintln!("{}", summary_line(&c, &table, cached));
        let cells: Vec<ComparedCell> = table.rows.into_iter().map(ComparedCell::new).collect();
        let md = experiment_markdown(&c, &cells);
        emit(a.format, &power_csv(&cells)?, &md, a.out_dir.as_deref(), &format!("experiment-{}", c.hash()))?;
        return Ok(ExitCode::SUCCESS);
    }
    let id = a.table.expect("clap requires --table without --config");
    let overrides = TableOverrides {
        reps: a.reps,
        null_reps: a.null_reps,
        seed: Some(seed),
        alpha: a.alpha,
        trace_mode: a.trace_mode,
        are_p: a.are_p,
        are_reps: a.are_reps,
    };
    let artifact = run_table_with_progress(id, &overrides, store.as_ref(), &mut |c, t, cached| {
        eprintln!("{}", summary_line(c, t, cached));
    })?;
    let csv = match &artifact {
        TableArtifact::Power { cells, .. } => power_csv(cells)?,
        TableArtifact::Are { cells, .. } => {
            let mut buf = Vec::new();
            output::write_are_csv(&mut buf, cells)?;
            buf
        }
    };
    emit(a.format, &csv, &render_markdown(&artifact), a.out_dir.as_deref(), &id.to_string())?;
    Ok(ExitCode::SUCCESS)
}

fn experiment_markdown(c: &ExperimentConfig, cells: &[ComparedCell]) -> String {
    let mut s = format!("{} (signal {}, {} replications, seed {})\n\n", describe(c), c.signal, c.reps, c.master_seed);
    s.push_str("| test | rejection rate (%) | MC s.e. | published |\n|---|---|---|---|\n");
    for cell in cells {
        let published = cell.reference.map_or("-".to_string(), |r| format!("{r:.1}"));
        s.push_str(&format!(
            "| {} | {:.1} | {:.2} | {published} |\n",
            cell.row.test,
            100.0 * cell.row.rejection_rate,
            100.0 * cell.row.mc_stderr
        ));
    }
    s
}

fn cmd_are(a: AreArgs, seed: u64) -> Result<ExitCode> {
    let rows = are_table(&are_table_kinds(), a.p, a.reps, seed)?;
    let cells = are_cells(&rows);
    let artifact = TableArtifact::Are { p: a.p, reps: a.reps, seed, rows, cells };
    let TableArtifact::Are { cells, .. } = &artifact else { unreachable!() };
    let mut csv = Vec::new();
    output::write_are_csv(&mut csv, cells)?;
    emit(a.format, &csv, &render_markdown(&artifact), a.out_dir.as_deref(), "are")?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_check(a: CheckArgs, seed: u64) -> Result<ExitCode> {
    let outcomes = run_checks(CheckOptions { seed, corrupt_fast_path: a.corrupt_fast_path });
    for o in &outcomes {
        println!("{o}");
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!("{} of {} checks passed", outcomes.len() - failed, outcomes.len());
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}
