//! `gsadmm run | sweep | check | gen | report`

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use super::check::check;
use super::document::{parse_policy, ConfigDoc, Instance};
use super::output::{self, Report};
use super::run::{run_instance, write_outcome};
use super::sweep::{sweep, Grid, SweepSpec};
use super::{exit_code, Source, EXIT_OK, EXIT_RUNTIME, EXIT_VALIDATION};
use crate::error::{Error, Result};
use crate::generators::{self, Family, GenSpec};
use crate::model::{validate_config, SolverConfig};

#[derive(Debug, Parser)]
#[command(name = "gsadmm", version, about = "Generalized symmetric ADMM solver and verification harness")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one instance and write trace.csv and report.json.
    Run(RunArgs),
    /// Sweep a (tau, s) grid and write atlas.csv.
    Sweep(SweepArgs),
    /// Validate structural matrices for an instance and configuration.
    Check(CheckArgs),
    /// Generate an instance document with its reference solution.
    Gen(GenArgs),
    /// Summarize a run directory, or replay the bundled catalog.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SizeArgs {
    /// Number of x blocks, used with --dims.
    #[arg(long)]
    pub p: Option<usize>,
    /// Number of y blocks, used with --dims.
    #[arg(long)]
    pub q: Option<usize>,
    /// Common block dimension, used with --p and --q.
    #[arg(long)]
    pub dims: Option<usize>,
    /// Comma-separated x block dimensions.
    #[arg(long, value_delimiter = ',', conflicts_with = "dims")]
    pub x_dims: Option<Vec<usize>>,
    /// Comma-separated y block dimensions.
    #[arg(long, value_delimiter = ',', conflicts_with = "dims")]
    pub y_dims: Option<Vec<usize>>,
    /// Number of coupling constraints.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

impl SizeArgs {
    pub fn spec(&self) -> GenSpec {
        let d = self.dims.unwrap_or(2);
        let x = self.x_dims.clone().unwrap_or_else(|| vec![d; self.p.unwrap_or(1)]);
        let y = self.y_dims.clone().unwrap_or_else(|| vec![d; self.q.unwrap_or(1)]);
        let n = self.n.unwrap_or_else(|| x.iter().chain(&y).copied().max().unwrap_or(1));
        GenSpec::new(x, y, n)
    }
}

#[derive(Debug, Clone, Args)]
pub struct SourceArgs {
    /// Instance document to load.
    #[arg(long, conflicts_with_all = ["gen", "bundled"])]
    pub instance: Option<PathBuf>,
    /// Generate an instance: quadratic, l1 or boxqp.
    #[arg(long, conflicts_with = "bundled")]
    pub gen: Option<String>,
    /// Bundled instance by name (qp1, l1-scalar, box-scalar, quadratic-42, ...).
    #[arg(long)]
    pub bundled: Option<String>,
    #[command(flatten)]
    pub sizes: SizeArgs,
}

impl SourceArgs {
    pub fn source(&self) -> Result<Source> {
        if let Some(p) = &self.instance {
            return Ok(Source::File(p.clone()));
        }
        if let Some(g) = &self.gen {
            let family = parse_family(g)?;
            return Ok(Source::Generated { family, spec: self.sizes.spec(), seed: self.sizes.seed });
        }
        Ok(Source::Bundled(self.bundled.clone().unwrap_or_else(|| "qp1".into())))
    }
}

#[derive(Debug, Clone, Args)]
pub struct ConfigArgs {
    /// JSON solver configuration; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub sigma1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub sigma2: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub tau: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub s: Option<f64>,
    /// D requires (tau, s) in region D; G allows region G.
    #[arg(long)]
    pub policy: Option<String>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
}

impl ConfigArgs {
    pub fn resolve(&self, instance: &Instance) -> Result<SolverConfig> {
        let mut cfg = SolverConfig::for_problem(&instance.problem);
        if let Some(path) = &self.config {
            ConfigDoc::read(path)?.apply(&mut cfg)?;
        }
        let flags = ConfigDoc {
            beta: self.beta,
            tau: self.tau,
            s: self.s,
            sigma1: self.sigma1,
            sigma2: self.sigma2,
            max_iters: self.max_iters,
            tol: self.tol,
            policy: self.policy.clone(),
        };
        flags.apply(&mut cfg)?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Also write Q, M, G, H as CSV.
    #[arg(long)]
    pub export_matrices: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long, default_value_t = -1.5, allow_hyphen_values = true)]
    pub tau_min: f64,
    #[arg(long, default_value_t = 1.5, allow_hyphen_values = true)]
    pub tau_max: f64,
    #[arg(long, default_value_t = 21)]
    pub tau_count: usize,
    #[arg(long, default_value_t = -1.5, allow_hyphen_values = true)]
    pub s_min: f64,
    #[arg(long, default_value_t = 1.5, allow_hyphen_values = true)]
    pub s_max: f64,
    #[arg(long, default_value_t = 21)]
    pub s_count: usize,
    /// Skip the solver; record structural quantities only.
    #[arg(long)]
    pub no_solve: bool,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Use the fixture parameters beta = 1, sigma1 = sigma2 = 0.5, tau = 0.3, s = 0.4
    /// before applying other flags.
    #[arg(long)]
    pub golden: bool,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// quadratic, l1 or boxqp
    pub generator: String,
    #[command(flatten)]
    pub sizes: SizeArgs,
    /// Output file, or an existing directory for `<name>.json`.
    #[arg(long, default_value = "instance.json")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Run directory holding report.json and trace.csv.
    #[arg(required_unless_present = "catalog")]
    pub dir: Option<PathBuf>,
    /// Run every bundled instance and print one summary line each.
    #[arg(long, conflicts_with = "dir")]
    pub catalog: bool,
    #[arg(long)]
    pub max_iters: Option<usize>,
}

fn parse_family(s: &str) -> Result<Family> {
    Family::parse(s).ok_or_else(|| Error::Document(format!("generator must be quadratic, l1 or boxqp, got {s:?}")))
}

/// Parses `args` and runs the command, writing human output to `out` and
/// diagnostics to `err`. Returns the process exit status.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<u8> {
    match cmd {
        Command::Run(a) => cmd_run(a, out, err),
        Command::Sweep(a) => cmd_sweep(a, out),
        Command::Check(a) => cmd_check(a, out),
        Command::Gen(a) => cmd_gen(a, out),
        Command::Report(a) => cmd_report(a, out),
    }
}

fn validated_config(args: &ConfigArgs, instance: &Instance, err: &mut dyn Write) -> Result<SolverConfig> {
    let cfg = args.resolve(instance)?;
    let report = validate_config(&cfg, &instance.problem);
    for w in &report.warnings {
        writeln!(err, "warning: {w}")?;
    }
    report.into_result()?;
    Ok(cfg)
}

fn cmd_run(a: RunArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<u8> {
    let instance = a.source.source()?.load()?;
    let cfg = validated_config(&a.config, &instance, err)?;
    let outcome = run_instance(&instance, &cfg)?;
    write_outcome(&outcome, &a.out, a.export_matrices)?;
    let r = &outcome.report;
    writeln!(
        out,
        "{}: {} after {} iterations; identity max ratio {:e}; dist_H {}",
        instance.name,
        r.get("termination").and_then(|v| v.as_str()).unwrap_or("?"),
        outcome.trace.len(),
        r.get_f64("identity.max_ratio").unwrap_or(f64::NAN),
        r.get_f64("final.dist_H").map_or("n/a".to_string(), |d| format!("{d:e}")),
    )?;
    writeln!(out, "wrote {}", a.out.display())?;
    if outcome.report.get_bool("identity.check_ok") == Some(false) {
        writeln!(err, "identity check failed")?;
        return Ok(EXIT_RUNTIME);
    }
    Ok(EXIT_OK)
}

fn cmd_sweep(a: SweepArgs, out: &mut dyn Write) -> Result<u8> {
    let instance = a.source.source()?.load()?;
    let mut base = a.config.resolve(&instance)?;
    base.region_policy = parse_policy("G")?;
    let spec = SweepSpec {
        tau: Grid::new(a.tau_min, a.tau_max, a.tau_count)?,
        s: Grid::new(a.s_min, a.s_max, a.s_count)?,
        solve: !a.no_solve,
    };
    let rows = sweep(&instance, &base, &spec);
    fs::create_dir_all(&a.out)?;
    let path = a.out.join("atlas.csv");
    output::write_atlas(fs::File::create(&path)?, &rows)?;
    let in_d = rows.iter().filter(|r| r.in_d).count();
    let pd = rows.iter().filter(|r| r.in_d && r.lambda_min_g > 0.0).count();
    writeln!(out, "{} points, {in_d} in D, {pd} of those with G positive definite", rows.len())?;
    writeln!(out, "wrote {}", path.display())?;
    Ok(EXIT_OK)
}

fn cmd_check(a: CheckArgs, out: &mut dyn Write) -> Result<u8> {
    let instance = a.source.source()?.load()?;
    let mut cfg = if a.golden {
        generators::golden_config(&instance.problem)
    } else {
        SolverConfig::for_problem(&instance.problem)
    };
    if let Some(path) = &a.config.config {
        ConfigDoc::read(path)?.apply(&mut cfg)?;
    }
    let flags = ConfigArgs { config: None, ..a.config.clone() };
    let overlay = ConfigDoc {
        beta: flags.beta,
        tau: flags.tau,
        s: flags.s,
        sigma1: flags.sigma1,
        sigma2: flags.sigma2,
        max_iters: flags.max_iters,
        tol: flags.tol,
        policy: flags.policy,
    };
    overlay.apply(&mut cfg)?;
    let items = check(&instance, &cfg);
    let mut ok = true;
    for it in &items {
        ok &= it.passed;
        let detail = if it.detail.is_empty() { String::new() } else { format!(": {}", it.detail.replace('\n', "; ")) };
        writeln!(out, "{} {}{detail}", if it.passed { "PASS" } else { "FAIL" }, it.name)?;
    }
    Ok(if ok { EXIT_OK } else { EXIT_VALIDATION })
}

fn cmd_gen(a: GenArgs, out: &mut dyn Write) -> Result<u8> {
    let family = parse_family(&a.generator)?;
    let bundle = family.generate(&a.sizes.spec(), a.sizes.seed)?;
    let path = if a.out.is_dir() { a.out.join(format!("{}.json", bundle.name)) } else { a.out.clone() };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    Instance::from_bundle(&bundle).write(&path)?;
    writeln!(out, "{}: KKT residual {:e}, {}", bundle.name, bundle.kkt_residual, bundle.certificate.as_str())?;
    writeln!(out, "wrote {}", path.display())?;
    Ok(EXIT_OK)
}

fn summarize_dir(dir: &Path, out: &mut dyn Write) -> Result<u8> {
    let report = Report::read(&dir.join("report.json"))?;
    let trace = fs::read_to_string(dir.join("trace.csv"))?;
    let rows = trace.lines().count().saturating_sub(1);
    for (k, v) in &report.0 {
        writeln!(out, "{k} = {v}")?;
    }
    writeln!(out, "trace rows = {rows}")?;
    let failed: Vec<&String> = report.0.iter().filter(|(k, v)| k.ends_with("_ok") && v.as_bool() == Some(false)).map(|(k, _)| k).collect();
    if failed.is_empty() {
        Ok(EXIT_OK)
    } else {
        writeln!(out, "failed checks: {}", failed.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", "))?;
        Ok(EXIT_RUNTIME)
    }
}

fn cmd_report(a: ReportArgs, out: &mut dyn Write) -> Result<u8> {
    if let Some(dir) = &a.dir {
        return summarize_dir(dir, out);
    }
    let mut all_ok = true;
    for bundle in generators::catalog() {
        let instance = Instance::from_bundle(&bundle);
        let mut cfg = SolverConfig::for_problem(&instance.problem);
        if let Some(m) = a.max_iters {
            cfg.max_iters = m;
        }
        let outcome = run_instance(&instance, &cfg)?;
        let ok = outcome.checks_passed();
        all_ok &= ok;
        let r = &outcome.report;
        writeln!(
            out,
            "{} {:<14} iters={:<5} dist_H={:<10.3e} r_hat={}",
            if ok { "PASS" } else { "FAIL" },
            instance.name,
            outcome.trace.len(),
            r.get_f64("final.dist_H").unwrap_or(f64::NAN),
            r.get_f64("rate.r_hat").map_or("n/a".to_string(), |v| format!("{v:.4}")),
        )?;
    }
    Ok(if all_ok { EXIT_OK } else { EXIT_RUNTIME })
}
