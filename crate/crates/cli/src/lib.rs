//! Command layer for the `semidyn` binary.
//!
//! Exit codes: 0 on success, 1 when any check fails, 2 on usage or
//! configuration errors.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use semidyn::checks::{self, CheckConfig, CheckReport, Verdict};
use semidyn::config::SceneConfig;
use semidyn::grid::{IndicatorGrid, PixelClass};
use semidyn::julia::backward_ifs_sample_chains;
use semidyn::output::{write_pgm, write_report};
use semidyn::{approximate_escaping_set, approximate_julia_union, Error, SemigroupSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

pub const THREADS_ENV: &str = "SEMIDYN_THREADS";

#[derive(Debug, Parser)]
#[command(name = "semidyn", version, about = "Fatou, Julia and escaping sets of finitely generated semigroups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Scene file.
    #[arg(long)]
    config: PathBuf,
    /// Overrides `[output] seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads, 0 = one per core. Falls back to SEMIDYN_THREADS.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Julia-band / Fatou mask as a PGM image.
    RenderJulia {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Escaping-candidate mask as a PGM image.
    RenderEscaping {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Backward-IFS point cloud as CSV.
    SampleIfs {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs a check suite and writes a report.
    Check {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Prints the generator grammar.
    Catalog,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Invariance,
    Identities,
    References,
    All,
}

/// Failures that end a command before any check verdict.
#[derive(Debug)]
struct Usage(String);

impl From<Error> for Usage {
    fn from(e: Error) -> Self {
        Usage(e.to_string())
    }
}

/// Parses `argv` (program name first) and runs the command.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
    }
}

fn dispatch(command: Command) -> Result<i32, Usage> {
    match command {
        Command::Catalog => {
            print!("{}", semidyn::catalog::MAP_GRAMMAR);
            Ok(EXIT_OK)
        }
        Command::RenderJulia { common, out } => {
            let scene = Scene::load(&common)?;
            let out = output_path(out, &scene.config.output.pgm, "--out or [output] pgm")?;
            let grid = scene.run(|s| approximate_julia_union(&s.spec, &s.config.grid, &s.config.julia_params()))?;
            let grid = scene.tag(grid);
            write_pgm(&grid, &out)?;
            println!(
                "{}: julia band {:.6} of {} pixels -> {}",
                scene.spec.label(),
                grid.fraction(PixelClass::JuliaBand),
                grid.classes.len(),
                out.display()
            );
            Ok(EXIT_OK)
        }
        Command::RenderEscaping { common, out } => {
            let scene = Scene::load(&common)?;
            let out = output_path(out, &scene.config.output.pgm, "--out or [output] pgm")?;
            if let Some(note) = semidyn::escape::escape_note(&scene.spec) {
                eprintln!("note: {note}");
            }
            let grid = scene.run(|s| approximate_escaping_set(&s.spec, &s.config.grid, &s.config.escape_params()))?;
            let grid = scene.tag(grid);
            write_pgm(&grid, &out)?;
            println!(
                "{}: escaping candidates {:.6} of {} pixels ({}) -> {}",
                scene.spec.label(),
                grid.fraction(PixelClass::Escaping),
                grid.classes.len(),
                scene.config.escape_params().echo(),
                out.display()
            );
            Ok(EXIT_OK)
        }
        Command::SampleIfs { common, out } => {
            let scene = Scene::load(&common)?;
            let out = output_path(out, &scene.config.output.csv, "--out or [output] csv")?;
            let ifs = scene.config.ifs;
            let cloud = scene.run(|s| {
                backward_ifs_sample_chains(&s.spec, ifs.count, ifs.burn_in, s.seed, ifs.chains)
            })?;
            cloud.write_csv(&out)?;
            println!(
                "{}: {} points (burn-in {}, {} chains, seed {}) -> {}",
                scene.spec.label(),
                cloud.points.len(),
                ifs.burn_in,
                ifs.chains,
                scene.seed,
                out.display()
            );
            Ok(EXIT_OK)
        }
        Command::Check {
            common,
            suite,
            report,
        } => {
            let scene = Scene::load(&common)?;
            let reports = scene.run(|s| run_suite(s, suite))?;
            for r in &reports {
                for n in &r.notes {
                    eprintln!("{}: {n}", r.name);
                }
            }
            if let Some(path) = report.or_else(|| scene.config.output.report.clone()) {
                write_report(&reports, &path)?;
            }
            let count = |v| reports.iter().filter(|r| r.verdict == v).count();
            println!(
                "{}: {} checks, {} pass, {} fail, {} informational",
                scene.spec.label(),
                reports.len(),
                count(Verdict::Pass),
                count(Verdict::Fail),
                count(Verdict::Informational)
            );
            Ok(if reports.iter().any(CheckReport::failed) {
                EXIT_CHECK_FAILED
            } else {
                EXIT_OK
            })
        }
    }
}

fn output_path(flag: Option<PathBuf>, configured: &Option<PathBuf>, what: &str) -> Result<PathBuf, Usage> {
    flag.or_else(|| configured.clone())
        .ok_or_else(|| Usage(format!("no output path: pass {what}")))
}

struct Scene {
    config: SceneConfig,
    spec: SemigroupSpec,
    seed: u64,
    pool: rayon::ThreadPool,
}

impl Scene {
    fn load(common: &Common) -> Result<Self, Usage> {
        let threads = resolve_threads(common.threads)?;
        let config = SceneConfig::load(&common.config)?;
        let spec = config.spec()?;
        let seed = common.seed.unwrap_or(config.output.seed);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Usage(format!("thread pool: {e}")))?;
        Ok(Scene {
            config,
            spec,
            seed,
            pool,
        })
    }

    fn run<T: Send>(&self, work: impl FnOnce(&Scene) -> semidyn::Result<T> + Send) -> Result<T, Usage> {
        Ok(self.pool.install(|| work(self))?)
    }

    fn tag(&self, mut grid: IndicatorGrid) -> IndicatorGrid {
        grid.meta.seed = self.seed;
        grid
    }

    fn checks(&self) -> CheckConfig {
        self.config.check_config(self.seed)
    }
}

fn resolve_threads(flag: Option<usize>) -> Result<usize, Usage> {
    if let Some(n) = flag {
        return Ok(n);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .map_err(|_| Usage(format!("{THREADS_ENV}={v} is not a thread count"))),
        _ => Ok(0),
    }
}

fn run_suite(scene: &Scene, suite: Suite) -> semidyn::Result<Vec<CheckReport>> {
    let spec = &scene.spec;
    let g = &scene.config.grid;
    let jp = scene.config.julia_params();
    let esc = scene.config.escape_params();
    let cfg = scene.checks();
    let wants = |s: Suite| suite == Suite::All || suite == s;

    let mut reports = Vec::new();
    let needs_grids = wants(Suite::Invariance) || wants(Suite::Identities);
    let (julia, escaping) = if needs_grids {
        (
            Some(approximate_julia_union(spec, g, &jp)?),
            Some(approximate_escaping_set(spec, g, &esc)?),
        )
    } else {
        (None, None)
    };
    if let (true, Some(j), Some(e)) = (wants(Suite::Invariance), &julia, &escaping) {
        reports.push(checks::check_forward_invariance(j, PixelClass::Fatou, spec, &cfg));
        reports.push(checks::check_backward_invariance(j, PixelClass::Fatou, spec, &cfg));
        reports.push(checks::check_forward_invariance(e, PixelClass::Escaping, spec, &cfg));
        reports.push(checks::check_escaping_forward_invariance(spec, g, &esc, &cfg)?);
    }
    if let (true, Some(j), Some(e)) = (wants(Suite::Identities), &julia, &escaping) {
        reports.push(checks::check_union_identity(j, spec, &cfg));
        reports.push(checks::check_intersection_identity(j, PixelClass::Fatou, spec, &cfg));
        reports.push(checks::check_intersection_identity(e, PixelClass::Escaping, spec, &cfg));
        reports.push(checks::check_abelian_equalities(spec, g, &jp, &cfg)?);
        reports.push(checks::check_inclusions(spec, &scene.config.inclusion_word()?, g, &jp, &cfg)?);
        reports.push(checks::commutator_report(spec, &cfg));
    }
    if wants(Suite::References) {
        reports.push(checks::annulus_reference_check(scene.config.checks.annulus_a, g, &jp, &cfg)?);
    }
    reports.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(reports)
}

