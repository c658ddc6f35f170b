//! Command-line entry points.

use std::ffi::OsString;
use std::fs;
use std::io::{self, BufRead, Write};
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use isneak::engine::{AutoOracle, Oracle, Search, SearchConfig};
use isneak::evalkit::{bench, sweep_s, Algorithm, BenchModel};
use isneak::model_io::generate_synthetic_model;
use isneak::preprocess::{encode_pool, EncodedPool};
use isneak::ranking::{Choice, Question};

use crate::models::{self, discover, entry_for, features_path, objectives_path};
use crate::server::{serve, ServerConfig};

#[derive(Parser, Debug)]
#[command(name = "isneak", version, about = "Interactive search over constrained configuration spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a synthetic feature model with objective sidecars.
    Gen {
        #[arg(long)]
        features: usize,
        /// Cross-tree constraints per feature.
        #[arg(long)]
        ccr: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// DIMACS output; sidecars are written next to it.
        #[arg(long)]
        out: PathBuf,
    },
    /// Enumerate valid configurations of a model into a candidate CSV.
    Enumerate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        count: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one interactive search and print its result as JSON.
    Run {
        #[arg(long)]
        pool: PathBuf,
        /// Objective sidecar; defaults to `<pool stem>.objectives.json`.
        #[arg(long)]
        objectives: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OracleKind::Auto)]
        oracle: OracleKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Largest number of attributes per question.
        #[arg(long, default_value_t = isneak::ranking::DEFAULT_QUESTION_SIZE)]
        cap: usize,
        /// Write the cluster tree as JSON.
        #[arg(long)]
        dump_tree: Option<PathBuf>,
    },
    /// Run every algorithm over every model for several seeds.
    Bench {
        #[arg(long, env = "ISNEAK_MODELS_DIR")]
        models: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "isneak,flash,nga")]
        algorithms: Vec<Algorithm>,
        #[arg(long, default_value_t = 20)]
        repeats: usize,
        #[arg(long, default_value_t = 1)]
        seed0: u64,
        #[arg(long, default_value_t = crate::server::DEFAULT_POOL_SIZE)]
        pool_size: usize,
        /// Report CSV; per-run JSON goes to `<out stem>_runs/`.
        #[arg(long)]
        out: PathBuf,
        /// Leave the `ms` column empty so reports compare byte for byte.
        #[arg(long)]
        no_timing: bool,
    },
    /// Median interaction count as a function of the question size cap.
    Sweep {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,6,8,12")]
        s: Vec<usize>,
        #[arg(long, default_value_t = 20)]
        repeats: usize,
        #[arg(long, default_value_t = 1)]
        seed0: u64,
        #[arg(long, default_value_t = crate::server::DEFAULT_POOL_SIZE)]
        pool_size: usize,
    },
    /// Serve the session API and the web client.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
        #[arg(long, env = "ISNEAK_MODELS_DIR", default_value = "models")]
        models: PathBuf,
        /// Idle seconds before a session is dropped.
        #[arg(long, default_value_t = 3600)]
        ttl_secs: u64,
        /// Directory for per-session crash-recovery snapshots.
        #[arg(long)]
        snapshots: Option<PathBuf>,
        /// Static client served under `/ui/`.
        #[arg(long, default_value = "web/dist")]
        ui: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OracleKind {
    Auto,
    Interactive,
}

/// Parses `argv`, runs the command and returns the process exit code:
/// 0 on success, 2 on usage errors, 1 on anything else.
pub fn main_with<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

pub fn execute(command: Command) -> Result<()> {
    match command {
        Command::Gen {
            features,
            ccr,
            seed,
            out,
        } => gen(features, ccr, seed, &out),
        Command::Enumerate { model, count, seed, out } => {
            let pool = entry_for(&model)?.load_pool(count, seed)?;
            models::write(&out, &pool.pool().to_csv()?)?;
            models::write(&objectives_path(&out), &pool.pool().objectives().to_sidecar_json())?;
            eprintln!("wrote {} candidates to {}", pool.len(), out.display());
            Ok(())
        }
        Command::Run {
            pool,
            objectives,
            oracle,
            seed,
            cap,
            dump_tree,
        } => {
            let objectives = objectives.unwrap_or_else(|| objectives_path(&pool));
            let table = models::load_table(&pool, &objectives)?;
            let encoded = Arc::new(encode_pool(table).with_context(|| format!("{}", pool.display()))?);
            let name = pool.file_stem().unwrap_or_default().to_string_lossy().into_owned();
            let config = SearchConfig { seed, question_cap: cap };
            let json = match oracle {
                OracleKind::Auto => {
                    let mut o = AutoOracle::new(&encoded, seed);
                    run_search(encoded, &mut o, config, &name, dump_tree.as_deref())?
                }
                OracleKind::Interactive => {
                    let mut o = TerminalOracle::new(io::stdin().lock(), io::stderr());
                    run_search(encoded, &mut o, config, &name, dump_tree.as_deref())?
                }
            };
            emit(&json)
        }
        Command::Bench {
            models,
            algorithms,
            repeats,
            seed0,
            pool_size,
            out,
            no_timing,
        } => run_bench(&models, &algorithms, repeats, seed0, pool_size, &out, !no_timing),
        Command::Sweep {
            model,
            s,
            repeats,
            seed0,
            pool_size,
        } => {
            let pool = Arc::new(entry_for(&model)?.load_pool(pool_size, 1)?);
            let rows = sweep_s(&pool, &s, repeats, seed0)?;
            let mut text = String::from("S,median_I,I\n");
            for r in rows {
                let all: Vec<String> = r.interactions.iter().map(|i| i.to_string()).collect();
                text.push_str(&format!("{},{},{}\n", r.s, r.median_i, all.join(" ")));
            }
            emit(text.trim_end())
        }
        Command::Serve {
            port,
            host,
            models,
            ttl_secs,
            snapshots,
            ui,
        } => {
            let config = ServerConfig {
                models_dir: models,
                ttl: Duration::from_secs(ttl_secs),
                snapshot_dir: snapshots,
                ui_dir: ui,
            };
            let rt = tokio::runtime::Runtime::new().context("cannot start the async runtime")?;
            rt.block_on(serve(SocketAddr::new(host, port), config))
        }
    }
}

/// Prints to stdout; a closed pipe (`| head`) is not an error.
fn emit(text: &str) -> Result<()> {
    match writeln!(io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn gen(features: usize, ccr: f64, seed: u64, out: &Path) -> Result<()> {
    let s = generate_synthetic_model(features, ccr, seed)?;
    models::write(out, &s.model.to_dimacs())?;
    models::write(&objectives_path(out), &s.objectives.to_sidecar_json())?;
    let table = s
        .objectives
        .feature_table_csv(&s.model.var_names)
        .context("generated model lacks a feature value table")?;
    models::write(&features_path(out), &table)?;
    eprintln!(
        "wrote {} ({} features, {} clauses, {} cross-tree)",
        out.display(),
        s.model.num_vars,
        s.model.clauses.len(),
        s.cross_tree
    );
    Ok(())
}

fn run_search(
    pool: Arc<EncodedPool>,
    oracle: &mut dyn Oracle,
    config: SearchConfig,
    name: &str,
    dump_tree: Option<&Path>,
) -> Result<String> {
    let mut search = Search::new(pool.clone(), config)?;
    if let Some(path) = dump_tree {
        let tree = serde_json::to_string(search.tree())?;
        models::write(path, &tree)?;
    }
    while let Some(q) = search.next_question() {
        let q = q.clone();
        let choice = oracle.answer(&pool, &q)?;
        search.answer(choice)?;
    }
    Ok(search.finish()?.with_model(name).to_json())
}

fn run_bench(
    dir: &Path,
    algorithms: &[Algorithm],
    repeats: usize,
    seed0: u64,
    pool_size: usize,
    out: &Path,
    timing: bool,
) -> Result<()> {
    let entries = discover(dir)?;
    if entries.is_empty() {
        bail!("no models found in {}", dir.display());
    }
    let started = Instant::now();
    let models = entries
        .iter()
        .map(|e| {
            Ok(BenchModel {
                name: e.id.clone(),
                pool: Arc::new(e.load_pool(pool_size, 1)?),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let report = bench(&models, algorithms, repeats, seed0)?;
    models::write(out, &report.to_csv(timing)?)?;

    let stem = out.file_stem().unwrap_or_default().to_string_lossy().into_owned();
    let runs_dir = out.with_file_name(format!("{stem}_runs"));
    fs::create_dir_all(&runs_dir).with_context(|| format!("cannot create {}", runs_dir.display()))?;
    for (row, run) in report.rows.iter().zip(&report.runs) {
        if let Some(run) = run {
            let run = if timing { run.clone() } else { run.without_timing() };
            let path = runs_dir.join(format!("{}_{}_{}.json", row.model, row.algorithm, row.seed));
            models::write(&path, &run.to_json())?;
        }
    }
    eprintln!("model,algorithm,runs,failed,median_d2h,median_I,median_S,valid,median_y_evals");
    for s in report.summary() {
        eprintln!(
            "{},{},{},{},{:.4},{},{},{:.2},{}",
            s.model, s.algorithm, s.runs, s.failed, s.median_d2h, s.median_i, s.median_s, s.median_valid_fraction, s.median_y_evals
        );
    }
    eprintln!("bench finished in {:.1}s", started.elapsed().as_secs_f64());
    Ok(())
}

/// Asks a person on a terminal. Questions are printed as two lettered
/// columns and answered with `A` or `B`.
pub struct TerminalOracle<R, W> {
    input: R,
    output: W,
}

impl<R: BufRead, W: Write> TerminalOracle<R, W> {
    pub fn new(input: R, output: W) -> Self {
        Self { input, output }
    }

    fn render(&mut self, pool: &EncodedPool, q: &Question) -> io::Result<()> {
        let view = q.to_view(pool);
        let name_w = view.option_a.iter().map(|r| r.attr.len()).max().unwrap_or(0).max(9);
        let val_w = view.option_a.iter().map(|r| r.value.len()).max().unwrap_or(0).max(1);
        writeln!(self.output, "\nQuestion {} ({} attributes)", view.id + 1, q.size())?;
        writeln!(self.output, "  {:name_w$}  {:val_w$}  B", "attribute", "A")?;
        for (a, b) in view.option_a.iter().zip(&view.option_b) {
            writeln!(self.output, "  {:name_w$}  {:val_w$}  {}", a.attr, a.value, b.value)?;
        }
        Ok(())
    }
}

impl<R: BufRead, W: Write> Oracle for TerminalOracle<R, W> {
    fn answer(&mut self, pool: &EncodedPool, question: &Question) -> isneak::Result<Choice> {
        let oracle_err = |e: io::Error| isneak::Error::Oracle(e.to_string());
        self.render(pool, question).map_err(oracle_err)?;
        loop {
            write!(self.output, "Prefer A or B? ").map_err(oracle_err)?;
            self.output.flush().map_err(oracle_err)?;
            let mut line = String::new();
            if self.input.read_line(&mut line).map_err(oracle_err)? == 0 {
                return Err(isneak::Error::Oracle("input closed before an answer".into()));
            }
            match line.trim().to_ascii_uppercase().as_str() {
                "A" => return Ok(Choice::A),
                "B" => return Ok(Choice::B),
                _ => writeln!(self.output, "please type A or B").map_err(oracle_err)?,
            }
        }
    }
}
