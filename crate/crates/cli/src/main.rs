//! `sofkit` — synthesis and verification of static output feedback gains.
//!
//! Exit codes: 0 stabilizing/success, 2 SDP infeasible, 3 feasible but not
//! stabilizing (or verification failed), 4 input error, 5 numerical failure.

mod io;
mod registry;
mod report;

use clap::{Args, Parser, Subcommand};
use sofkit_core::care::{care_residual, lqr_gain, lqr_sdp, solve_care, SystemMode, Weights};
use sofkit_core::eig::general_eig;
use sofkit_core::matrix::Matrix;
use sofkit_core::sim::{check_dissipation, closed_loop_matrix, simulate_closed_loop};
use sofkit_core::sof::{
    precheck_structure, synthesize_sof, synthesize_sof_feedthrough, SofOptions, SofResult,
    SofStatus,
};
use sofkit_core::Error as CoreError;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use crate::io::{load_gain, matrix_to_rows, resolve_weights, SystemFile};
use crate::report::{
    spectrum_pairs, PrecheckSection, Report, ResultSection, RiccatiSection, SimulationSection,
    VerifySection,
};

const EXIT_INFEASIBLE: u8 = 2;
const EXIT_UNSTABLE: u8 = 3;
const EXIT_INPUT: u8 = 4;
const EXIT_NUMERICAL: u8 = 5;

#[derive(Debug)]
pub struct CliError {
    message: String,
    code: u8,
}

impl CliError {
    pub fn input(message: String) -> Self {
        CliError {
            message,
            code: EXIT_INPUT,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let code = match &e {
            CoreError::DimensionMismatch { .. }
            | CoreError::NotSquare { .. }
            | CoreError::NotSymmetric { .. }
            | CoreError::NotPositiveSemidefinite { .. }
            | CoreError::AssumptionViolated(_)
            | CoreError::InvalidInput(_) => EXIT_INPUT,
            CoreError::SdpInfeasible { .. } => EXIT_INFEASIBLE,
            _ => EXIT_NUMERICAL,
        };
        CliError {
            message: e.to_string(),
            code,
        }
    }
}

#[derive(Parser)]
#[command(name = "sofkit", version, about = "Static output feedback synthesis toolkit")]
struct Cli {
    /// Path to the system file.
    #[arg(long, global = true)]
    system: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Report format.
    #[arg(long, global = true, value_parser = ["machine", "human"], default_value = "machine")]
    format: String,
    /// Omit wall time so repeated runs are byte-identical.
    #[arg(long, global = true)]
    deterministic: bool,
    /// Stability threshold: verdicts require spectral abscissa < -tol.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the LQR problem: Riccati solution P, gain K, residual.
    Lqr(LqrArgs),
    /// Synthesize a static output feedback gain.
    Sof(SofArgs),
    /// Certify a given gain (and optionally audit it by simulation).
    Verify(VerifyArgs),
    /// Simulate a closed loop under a seeded disturbance.
    Simulate(SimulateArgs),
    /// List or run the bundled benchmark systems.
    Examples(ExamplesArgs),
}

#[derive(Args)]
struct WeightArgs {
    /// State weight: "identity", "diag:v1,v2,...", or a file path.
    #[arg(long = "Q")]
    q: Option<String>,
    /// Input weight: same syntax as --Q.
    #[arg(long = "R")]
    r: Option<String>,
}

#[derive(Args)]
struct LqrArgs {
    #[command(flatten)]
    weights: WeightArgs,
    /// Solve via the trace-maximization SDP instead of the Riccati solver.
    #[arg(long)]
    via_sdp: bool,
}

#[derive(Args)]
struct SofArgs {
    #[command(flatten)]
    weights: WeightArgs,
    /// Treat Q as a decision variable with 0 <= Q <= Q0.
    #[arg(long)]
    q_variable: bool,
    /// Drop the quadratic-in-P disturbance term from the LMI.
    #[arg(long)]
    drop_n: bool,
    /// Alpha required for success under --strict.
    #[arg(long, default_value_t = 0.0)]
    alpha_margin: f64,
    /// Enforce controllability/observability hypotheses and alpha-margin.
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    weights: WeightArgs,
    /// File holding the gain F to certify.
    #[arg(long)]
    gain: PathBuf,
    /// Also run a seeded disturbance simulation and dissipation audit.
    #[arg(long)]
    simulate: bool,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 0.0)]
    dt: f64,
    #[arg(long = "T", default_value_t = 0.0)]
    t_final: f64,
    /// Disturbance amplitude bound.
    #[arg(long, default_value_t = 1.0)]
    amplitude: f64,
}

#[derive(Args)]
struct SimulateArgs {
    /// File holding the gain F to close the loop with.
    #[arg(long)]
    gain: PathBuf,
    /// Initial state, comma-separated (default: all ones).
    #[arg(long)]
    x0: Option<String>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 0.0)]
    dt: f64,
    #[arg(long = "T", default_value_t = 0.0)]
    t_final: f64,
    #[arg(long, default_value_t = 0.0)]
    amplitude: f64,
}

#[derive(Args)]
struct ExamplesArgs {
    /// Name of the example to run; omit to list.
    name: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let outcome = dispatch(&cli);
    match outcome {
        Ok((mut rep, code)) => {
            if !cli.deterministic {
                rep.wall_time_ms = Some(start.elapsed().as_secs_f64() * 1e3);
            }
            let text = if cli.format == "human" {
                rep.to_human()
            } else {
                rep.to_machine()
            };
            if let Some(path) = &cli.out {
                if let Err(e) = std::fs::write(path, &text) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(EXIT_INPUT);
                }
            } else {
                print!("{text}");
            }
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<(Report, u8), CliError> {
    match &cli.command {
        Command::Lqr(args) => run_lqr(cli, args, &load_required_system(cli)?),
        Command::Sof(args) => run_sof(cli, args, &load_required_system(cli)?),
        Command::Verify(args) => run_verify(cli, args, &load_required_system(cli)?),
        Command::Simulate(args) => run_simulate(cli, args, &load_required_system(cli)?),
        Command::Examples(args) => run_examples(cli, args),
    }
}

fn load_required_system(cli: &Cli) -> Result<SystemFile, CliError> {
    let path = cli
        .system
        .as_ref()
        .ok_or_else(|| CliError::input("--system is required for this command".into()))?;
    SystemFile::load(path)
}

fn status_string(status: SofStatus) -> &'static str {
    match status {
        SofStatus::Stabilizing => "stabilizing",
        SofStatus::FeasibleButUnstable => "feasible-but-unstable",
        SofStatus::Infeasible => "infeasible",
    }
}

fn status_exit(status: SofStatus) -> u8 {
    match status {
        SofStatus::Stabilizing => 0,
        SofStatus::FeasibleButUnstable => EXIT_UNSTABLE,
        SofStatus::Infeasible => EXIT_INFEASIBLE,
    }
}

fn run_lqr(_cli: &Cli, args: &LqrArgs, file: &SystemFile) -> Result<(Report, u8), CliError> {
    let sys = file.to_system()?;
    let weights = resolve_weights(file, args.weights.q.as_deref(), args.weights.r.as_deref())?;
    let (p, k) = if args.via_sdp {
        let p = lqr_sdp(&sys.a, &sys.b, &weights.q, &weights.r)?;
        let k = lqr_gain(&p, &sys.b, &weights.r)?;
        (p, k)
    } else {
        let sol = solve_care(&sys.a, &sys.b, &weights.q, &weights.r)?;
        (sol.p, sol.k)
    };
    let residual = care_residual(&sys.a, &sys.b, &weights.q, &weights.r, &p)?;
    let a_cl = &sys.a + &sys.b.matmul(&k);
    let spectrum = general_eig(&a_cl)?;

    let mut rep = Report::new("lqr", file.clone());
    rep.q = Some(matrix_to_rows(&weights.q));
    rep.r = Some(matrix_to_rows(&weights.r));
    rep.riccati = Some(RiccatiSection {
        p: matrix_to_rows(&p),
        residual,
        k: Some(matrix_to_rows(&k)),
    });
    rep.result = Some(ResultSection {
        f: matrix_to_rows(&k),
        f_bar: None,
        alpha: 0.0,
        certificate_min_eig: 0.0,
        closed_loop_spectrum: spectrum_pairs(&spectrum),
        closed_loop_abscissa: spectrum.max_real(),
        status: "stabilizing".into(),
    });
    Ok((rep, 0))
}

fn synthesize(file: &SystemFile, args: &SofArgs) -> Result<(SofResult<f64>, Weights<f64>), CliError> {
    let sys = file.to_system()?;
    let weights = resolve_weights(file, args.weights.q.as_deref(), args.weights.r.as_deref())?;
    let opts = SofOptions {
        q_variable: args.q_variable,
        drop_n_term: args.drop_n,
        alpha_margin: args.alpha_margin,
        strict: args.strict,
    };
    let res = match sys.mode {
        SystemMode::DirectFeedthrough => synthesize_sof_feedthrough(&sys, &weights, &opts)?,
        _ => synthesize_sof(&sys, &weights, &opts)?,
    };
    Ok((res, weights))
}

fn run_sof(_cli: &Cli, args: &SofArgs, file: &SystemFile) -> Result<(Report, u8), CliError> {
    let sys = file.to_system()?;
    let (res, weights) = synthesize(file, args)?;
    let pre = precheck_structure(&sys, &res.p, &weights.r)?;
    let residual = care_residual(&sys.a, &sys.b, &weights.q, &weights.r, &res.p)?;
    let a_cl = closed_loop_matrix(&sys, &res.f)?;
    let spectrum = general_eig(&a_cl)?;

    let mut rep = Report::new("sof", file.clone());
    rep.q = Some(matrix_to_rows(&weights.q));
    rep.r = Some(matrix_to_rows(&weights.r));
    rep.riccati = Some(RiccatiSection {
        p: matrix_to_rows(&res.p),
        residual,
        k: None,
    });
    rep.precheck = Some(PrecheckSection {
        cb: matrix_to_rows(&pre.cb_product),
        obstruction: pre.obstruction,
        bpb_min_eig: pre.bpb_min_eig,
        structure_residual: pre.structure_residual,
    });
    rep.result = Some(ResultSection {
        f: matrix_to_rows(&res.f),
        f_bar: res.f_bar.as_ref().map(matrix_to_rows),
        alpha: res.alpha,
        certificate_min_eig: res.certificate_min_eig,
        closed_loop_spectrum: spectrum_pairs(&spectrum),
        closed_loop_abscissa: res.closed_loop_abscissa,
        status: status_string(res.status).into(),
    });
    let code = status_exit(res.status);
    Ok((rep, code))
}

/// Deterministic xorshift64* stream mapped to [-amplitude, amplitude].
fn disturbance_signal(seed: u64, amplitude: f64, samples: usize, dim: usize) -> Vec<Vec<f64>> {
    let mut state = seed.wrapping_mul(0x9E3779B97F4A7C15).max(1);
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        let u = (state.wrapping_mul(0x2545F4914F6CDD1D) >> 11) as f64 / (1u64 << 53) as f64;
        (2.0 * u - 1.0) * amplitude
    };
    (0..samples).map(|_| (0..dim).map(|_| next()).collect()).collect()
}

fn run_verify(cli: &Cli, args: &VerifyArgs, file: &SystemFile) -> Result<(Report, u8), CliError> {
    let sys = file.to_system()?;
    let weights = resolve_weights(file, args.weights.q.as_deref(), args.weights.r.as_deref())?;
    let f = load_gain(&args.gain, file.m, file.p)?;
    let care = solve_care(&sys.a, &sys.b, &weights.q, &weights.r)?;
    let cert = sofkit_core::sim::certify_all(&sys, &weights, &f, &care.p)?;
    let stable = cert.closed_loop_abscissa < -cli.tol;

    let mut dissipation_ok = None;
    let mut dissipation_max = None;
    let mut sim_section = None;
    if args.simulate {
        let a_cl = closed_loop_matrix(&sys, &f)?;
        let n = a_cl.rows();
        // audit storage: closed-loop Lyapunov certificate (always valid for
        // a stable loop, unlike the CARE P when alpha < 0)
        let p_audit = if stable {
            sofkit_core::care::solve_lyapunov(&a_cl, &Matrix::identity(n))?
        } else {
            care.p.clone()
        };
        let scale = a_cl.fro_norm().max(1.0);
        let dt = if args.dt > 0.0 { args.dt } else { 1e-3 / scale };
        let t_final = if args.t_final > 0.0 { args.t_final } else { 20.0 / scale };
        let steps = (t_final / dt).ceil() as usize + 1;
        let w = disturbance_signal(args.seed, args.amplitude, steps, file.m);
        let x0 = vec![1.0; n];
        let traj = simulate_closed_loop(&sys, &f, Some(&p_audit), &w, &x0, dt, t_final)?;
        let audit = check_dissipation(&traj, &p_audit, &weights.r)?;
        dissipation_ok = Some(audit.ok && !traj.diverged());
        dissipation_max = Some(audit.max_violation);
        let last = traj.states.last().unwrap().clone();
        let norm = last.iter().map(|v| v * v).sum::<f64>().sqrt();
        sim_section = Some(SimulationSection {
            samples: traj.times.len(),
            dt,
            t_final,
            terminal_state: last,
            terminal_norm: norm,
            diverged: traj.diverged(),
            diverged_at: traj.diverged_at,
        });
    }
    let pass = stable && cert.equivalence_consistent && dissipation_ok.unwrap_or(true);

    let mut rep = Report::new("verify", file.clone());
    rep.q = Some(matrix_to_rows(&weights.q));
    rep.r = Some(matrix_to_rows(&weights.r));
    rep.riccati = Some(RiccatiSection {
        p: matrix_to_rows(&care.p),
        residual: care.residual_norm,
        k: None,
    });
    rep.verify = Some(VerifySection {
        theorem1_max_eig: cert.theorem1_max_eig,
        theorem2_min_eig: cert.theorem2_min_eig,
        closed_loop_abscissa: cert.closed_loop_abscissa,
        equivalence_consistent: cert.equivalence_consistent,
        dissipation_max_violation: dissipation_max,
        dissipation_ok,
        pass,
    });
    rep.simulation = sim_section;
    Ok((rep, if pass { 0 } else { EXIT_UNSTABLE }))
}

fn run_simulate(
    _cli: &Cli,
    args: &SimulateArgs,
    file: &SystemFile,
) -> Result<(Report, u8), CliError> {
    let sys = file.to_system()?;
    let f = load_gain(&args.gain, file.m, file.p)?;
    let a_cl = closed_loop_matrix(&sys, &f)?;
    let n = a_cl.rows();
    let x0: Vec<f64> = match &args.x0 {
        Some(spec) => {
            let vals: Result<Vec<f64>, _> = spec.split(',').map(|s| s.trim().parse()).collect();
            vals.map_err(|e| CliError::input(format!("--x0: {e}")))?
        }
        None => vec![1.0; n],
    };
    let scale = a_cl.fro_norm().max(1.0);
    let dt = if args.dt > 0.0 { args.dt } else { 1e-3 / scale };
    let t_final = if args.t_final > 0.0 { args.t_final } else { 20.0 / scale };
    let steps = (t_final / dt).ceil() as usize + 1;
    let w = disturbance_signal(args.seed, args.amplitude, steps, file.m);
    let traj = simulate_closed_loop(&sys, &f, None, &w, &x0, dt, t_final)?;
    let last = traj.states.last().unwrap().clone();
    let norm = last.iter().map(|v| v * v).sum::<f64>().sqrt();

    let mut rep = Report::new("simulate", file.clone());
    rep.simulation = Some(SimulationSection {
        samples: traj.times.len(),
        dt,
        t_final,
        terminal_state: last,
        terminal_norm: norm,
        diverged: traj.diverged(),
        diverged_at: traj.diverged_at,
    });
    let code = if traj.diverged() { EXIT_UNSTABLE } else { 0 };
    Ok((rep, code))
}

fn run_examples(cli: &Cli, args: &ExamplesArgs) -> Result<(Report, u8), CliError> {
    match &args.name {
        None => {
            for (name, desc, _) in registry::EXAMPLES {
                println!("{name}: {desc}");
            }
            std::process::exit(0);
        }
        Some(name) => {
            let entry = registry::EXAMPLES
                .iter()
                .find(|(n, _, _)| n == name)
                .ok_or_else(|| {
                    CliError::input(format!(
                        "unknown example {name:?}; available: {}",
                        registry::EXAMPLES
                            .iter()
                            .map(|(n, _, _)| *n)
                            .collect::<Vec<_>>()
                            .join(", ")
                    ))
                })?;
            let file = SystemFile::parse(entry.2)?;
            let sof_args = SofArgs {
                weights: WeightArgs { q: None, r: None },
                q_variable: false,
                drop_n: false,
                alpha_margin: 0.0,
                strict: false,
            };
            let (mut rep, code) = run_sof(cli, &sof_args, &file)?;
            rep.command = format!("examples {name}");
            Ok((rep, code))
        }
    }
}
