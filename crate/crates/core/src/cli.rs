//! Command-line front end. [`run`] parses arguments, writes JSON to `out`
//! and diagnostics to `err`, and returns the process exit code:
//! 0 optimal (or success), 2 invalid input, 3 near-optimal with a bound,
//! 4 not certified, 1 internal inconsistency.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::certifier::{certify, certify_objective, hykl_check, Verdict};
use crate::choi::q2c_choi;
use crate::conjecture::{run_conjecture, ConjectureConfig, ConjectureRecord, ConjectureSummary};
use crate::io::{
    to_json_string, CertificateOutput, ChannelFile, Dims, EnsembleFile, HyklOutput, JsonMatrix, ObjectiveFile,
    ProblemFile, SolveOutput, SCHEMA_VERSION,
};
use crate::linalg::Tolerances;
use crate::objectives::discrimination_objective;
use crate::oracle::{helstrom, random_instance, solve, Instance, InstanceDims, InstanceKind, RandomSource, SolverConfig, StepRule};
use crate::{Error, Result};

pub const EXIT_OPTIMAL: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NEAR_OPTIMAL: i32 = 3;
pub const EXIT_NOT_CERTIFIED: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "chancert", version, about = "Certify optimality of quantum channels")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// PSD tolerance (relative)
    #[arg(long, global = true)]
    pub tol_psd: Option<f64>,
    /// Hermiticity tolerance (relative)
    #[arg(long, global = true)]
    pub tol_herm: Option<f64>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Spaces per indentation level; 0 writes compact JSON
    #[arg(long, global = true, default_value_t = 2)]
    pub json_indent: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Certify the channel in a problem file
    Certify { file: PathBuf },
    /// Run the projected-subgradient oracle on a problem file
    Solve {
        file: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Check measurement optimality conditions for a discrimination problem
    Hykl {
        file: PathBuf,
        /// Also run the general certifier and require the same verdict
        #[arg(long)]
        via_choi: bool,
    },
    /// Trace-distance sign-witness experiment on random instances
    Conjecture {
        #[arg(long, default_value_t = 2)]
        d_x: usize,
        #[arg(long, default_value_t = 2)]
        d_y: usize,
        #[arg(long, default_value_t = 2)]
        d_z: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Write a random problem file
    Gen {
        #[arg(long, value_enum)]
        kind: GenKind,
        #[arg(long, default_value_t = 2)]
        d_x: usize,
        #[arg(long, default_value_t = 2)]
        d_y: usize,
        #[arg(long, default_value_t = 1)]
        d_z: usize,
        /// State-pair objective family
        #[arg(long, value_enum, default_value_t = PairFamily::TraceDistance)]
        family: PairFamily,
        /// Output path; standard output if absent
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum GenKind {
    /// Discrimination problem with `d_y` random states and its Helstrom measurement when d_y = 2
    Ensemble,
    StatePair,
    /// Random linear objective with a random channel
    Channel,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PairFamily {
    Fidelity,
    TraceDistance,
    RelativeEntropy,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    #[arg(long, default_value_t = SolverConfig::default().max_iters)]
    pub max_iters: usize,
    /// Step scale c (constant steps c, or c/√t with --diminishing-step)
    #[arg(long, default_value_t = 1.0)]
    pub step: f64,
    #[arg(long)]
    pub diminishing_step: bool,
    #[arg(long, default_value_t = SolverConfig::default().tol_gap)]
    pub tol_gap: f64,
}

impl SolverArgs {
    fn config(&self, seed: u64) -> SolverConfig {
        SolverConfig {
            max_iters: self.max_iters,
            step: if self.diminishing_step { StepRule::Diminishing(self.step) } else { StepRule::Constant(self.step) },
            tol_gap: self.tol_gap,
            seed,
            ..SolverConfig::default()
        }
    }
}

struct Io<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
    indent: usize,
}

impl Io<'_> {
    fn emit<T: Serialize>(&mut self, value: &T) -> Result<()> {
        let s = to_json_string(value, self.indent)?;
        writeln!(self.out, "{s}")?;
        Ok(())
    }
}

fn tolerances(global: &GlobalArgs, file: Option<&ProblemFile>) -> Result<Tolerances> {
    let mut tol = file.and_then(|f| f.tolerances).unwrap_or_default();
    if let Some(v) = global.tol_psd {
        tol.psd = v;
    }
    if let Some(v) = global.tol_herm {
        tol.herm = v;
    }
    tol.validate()?;
    Ok(tol)
}

fn verdict_code(v: Verdict) -> i32 {
    match v {
        Verdict::CertifiedOptimal => EXIT_OPTIMAL,
        Verdict::CertifiedNearOptimal => EXIT_NEAR_OPTIMAL,
        Verdict::NotCertified => EXIT_NOT_CERTIFIED,
    }
}

fn load(path: &Path, global: &GlobalArgs) -> Result<(crate::io::Problem, Tolerances)> {
    let file = ProblemFile::load(path)?;
    let tol = tolerances(global, Some(&file))?;
    Ok((file.build(&tol)?, tol))
}

fn cmd_certify(path: &Path, global: &GlobalArgs, io: &mut Io) -> Result<i32> {
    let (problem, tol) = load(path, global)?;
    let j = problem
        .channel
        .as_ref()
        .ok_or_else(|| Error::Schema("certify needs a channel in the problem file".into()))?;
    let (sub, cert) = certify_objective(&problem.spec, j, &tol)?;
    io.emit(&CertificateOutput::new(problem.family, &sub, &cert))?;
    Ok(verdict_code(cert.verdict))
}

fn cmd_solve(path: &Path, solver: &SolverArgs, global: &GlobalArgs, io: &mut Io) -> Result<i32> {
    let (problem, tol) = load(path, global)?;
    let trace = solve(&problem.spec, &solver.config(global.seed), &tol)?;
    io.emit(&SolveOutput::new(problem.family, &trace))?;
    Ok(EXIT_OPTIMAL)
}

fn cmd_hykl(path: &Path, via_choi: bool, global: &GlobalArgs, io: &mut Io) -> Result<i32> {
    let (problem, tol) = load(path, global)?;
    let (Some(ens), Some(povm)) = (&problem.ensemble, &problem.povm) else {
        return Err(Error::Schema("hykl needs a discrimination objective and a povm channel".into()));
    };
    let report = hykl_check(ens, povm, &tol)?;
    let mut out = HyklOutput::new(&report, ens.error_probability(povm));
    let mut code = if report.optimal { EXIT_OPTIMAL } else { EXIT_NOT_CERTIFIED };
    if via_choi {
        let h0 = discrimination_objective(ens);
        let j = q2c_choi(povm);
        let sub = crate::objectives::linear_eval(&h0, &j)?;
        let cert = certify(&h0, &j, &tol)?;
        let agrees = (cert.verdict == Verdict::CertifiedOptimal) == report.optimal;
        if !agrees {
            writeln!(io.err, "measurement conditions and the general certifier disagree")?;
            code = EXIT_INTERNAL;
        }
        out.via_choi = Some(CertificateOutput::new("discrimination", &sub, &cert));
    }
    io.emit(&out)?;
    Ok(code)
}

#[derive(Serialize)]
struct ConjectureOutput {
    config: ConjectureConfig,
    records: Vec<ConjectureRecord>,
    summary: ConjectureSummary,
}

fn cmd_conjecture(dims: (usize, usize, usize), trials: usize, solver: &SolverArgs, global: &GlobalArgs, io: &mut Io) -> Result<i32> {
    let tol = tolerances(global, None)?;
    for d in [dims.0, dims.1, dims.2] {
        if d == 0 || d > crate::oracle::DIM_CAP {
            return Err(Error::DimsTooLarge { dim: d, cap: crate::oracle::DIM_CAP });
        }
    }
    let cfg = ConjectureConfig { dims, trials, seed: global.seed, solver: solver.config(global.seed), ..Default::default() };
    let (records, summary) = run_conjecture(&cfg, &tol);
    io.emit(&ConjectureOutput { config: cfg, records, summary })?;
    Ok(EXIT_OPTIMAL)
}

fn cmd_gen(kind: GenKind, d: Dims, family: PairFamily, out: Option<&PathBuf>, global: &GlobalArgs, io: &mut Io) -> Result<i32> {
    let tol = tolerances(global, None)?;
    let dims = InstanceDims { d_x: d.d_x, d_y: d.d_y, d_z: d.d_z, outcomes: d.d_y };
    let file = match kind {
        GenKind::Ensemble => {
            let Instance::Ensemble(ens) = random_instance(InstanceKind::Ensemble, dims, global.seed)? else { unreachable!() };
            let channel = if ens.len() == 2 {
                let p = helstrom(&ens, &tol)?;
                Some(ChannelFile::Povm(p.elements().iter().map(JsonMatrix::from).collect()))
            } else {
                None
            };
            ProblemFile {
                version: SCHEMA_VERSION.into(),
                dims: Dims { d_z: 1, ..d },
                objective: ObjectiveFile::Discrimination {
                    ensemble: EnsembleFile { probs: ens.probs().to_vec(), states: ens.states().iter().map(JsonMatrix::from).collect() },
                },
                channel,
                tolerances: None,
            }
        }
        GenKind::StatePair => {
            let Instance::StatePair { rho, sigma } = random_instance(InstanceKind::StatePair, dims, global.seed)? else { unreachable!() };
            let (rho, sigma) = (JsonMatrix::from(rho.op()), JsonMatrix::from(sigma.op()));
            let objective = match family {
                PairFamily::Fidelity => ObjectiveFile::Fidelity { rho, sigma },
                PairFamily::TraceDistance => ObjectiveFile::TraceDistance { rho, sigma },
                PairFamily::RelativeEntropy => ObjectiveFile::RelativeEntropy { rho, sigma },
            };
            ProblemFile { version: SCHEMA_VERSION.into(), dims: d, objective, channel: None, tolerances: None }
        }
        GenKind::Channel => {
            let Instance::Channel(j) = random_instance(InstanceKind::Channel, dims, global.seed)? else { unreachable!() };
            let h0 = RandomSource::new(global.seed.wrapping_add(1)).hermitian(d.d_x * d.d_y);
            ProblemFile {
                version: SCHEMA_VERSION.into(),
                dims: Dims { d_z: 1, ..d },
                objective: ObjectiveFile::Linear { h0: (&h0).into() },
                channel: Some(ChannelFile::Choi(j.op().into())),
                tolerances: None,
            }
        }
    };
    match out {
        Some(path) => std::fs::write(path, to_json_string(&file, io.indent)? + "\n")?,
        None => io.emit(&file)?,
    }
    Ok(EXIT_OPTIMAL)
}

/// Runs the CLI on `args` (including the program name).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OPTIMAL };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
            } else {
                let _ = write!(out, "{text}");
            }
            return code;
        }
    };
    let mut io = Io { out, err, indent: cli.global.json_indent };
    let g = &cli.global;
    let result = match &cli.command {
        Command::Certify { file } => cmd_certify(file, g, &mut io),
        Command::Solve { file, solver } => cmd_solve(file, solver, g, &mut io),
        Command::Hykl { file, via_choi } => cmd_hykl(file, *via_choi, g, &mut io),
        Command::Conjecture { d_x, d_y, d_z, trials, solver } => cmd_conjecture((*d_x, *d_y, *d_z), *trials, solver, g, &mut io),
        Command::Gen { kind, d_x, d_y, d_z, family, out } => {
            cmd_gen(*kind, Dims { d_x: *d_x, d_y: *d_y, d_z: *d_z }, *family, out.as_ref(), g, &mut io)
        }
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(io.err, "error: {e}");
            EXIT_INVALID
        }
    }
}
