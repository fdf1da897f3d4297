//! Command-line front end: `porolab <subcommand> --config FILE [--out DIR]`.
//!
//! Exit codes: 0 when every invariant passes, 2 when a run finished but an invariant
//! failed, 1 on any error.

pub mod config;
mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::constitutive::inequalities::{log_grid, log_ratio_sup, power_ratio_sup};
use crate::constitutive::MaterialModel;
use crate::error::{Error, Result};
use crate::experiments::{self, AuditRow, MoserSequence, SweepRow};
use crate::linear_solver::{dissipation_excess, energy_balance_residual, Ordering};
use crate::nonlinear_solver::check_dissipation_inequality;

pub use config::{parse_config, parse_config_str, ProblemConfig, SCHEMA_VERSION};
use output::{Invariant, Report};

#[derive(Parser, Debug)]
#[command(
    name = "porolab",
    version,
    about = "Finite-strain poro-visco-elastic solver and its small-strain limit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Problem configuration (JSON)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides the config's output_dir
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override the strain scale eps
    #[arg(long, global = true)]
    eps: Option<f64>,
    /// Override the time step
    #[arg(long, global = true)]
    tau: Option<f64>,
    /// Override the number of cells
    #[arg(long, global = true)]
    cells: Option<usize>,
    /// Suppress the per-invariant report on stdout
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Finite-strain run at the configured eps
    SimulateNonlinear,
    /// Linear Biot run plus a re-solve uniqueness check
    SimulateLinear,
    /// Static equilibrium of the linear system at t_final
    Static,
    /// eps-sweep against the linear limit with scaling audit
    SweepEps,
    /// Constitutive derivative, tensor and scalar-inequality checks
    Verify,
    /// Norm cascade of the concentration along a nonlinear run
    MoserDiag,
    /// Long-time decay towards the static state (constant loads)
    Decay,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::SimulateNonlinear => "simulate-nonlinear",
            Command::SimulateLinear => "simulate-linear",
            Command::Static => "static",
            Command::SweepEps => "sweep-eps",
            Command::Verify => "verify",
            Command::MoserDiag => "moser-diag",
            Command::Decay => "decay",
        }
    }

    fn system(self) -> &'static str {
        match self {
            Command::SimulateNonlinear | Command::MoserDiag => "nonlinear",
            Command::SimulateLinear | Command::Static | Command::Decay => "linear",
            Command::SweepEps => "nonlinear+linear",
            Command::Verify => "constitutive",
        }
    }
}

/// Entry point for the binary.
pub fn main() -> ! {
    std::process::exit(run(std::env::args_os()))
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(rep) => {
            if !cli.quiet {
                print!("{}", rep.text());
            }
            if rep.passed() {
                0
            } else {
                for inv in rep.invariants.iter().filter(|i| !i.passed) {
                    eprintln!(
                        "invariant failed: {} (value {}, threshold {})",
                        inv.name, inv.value, inv.threshold
                    );
                }
                2
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn load(cli: &Cli) -> Result<ProblemConfig> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| Error::Parse("missing --config".into()))?;
    let mut cfg = parse_config(path)?;
    if let Some(e) = cli.eps {
        cfg.eps = e;
    }
    if let Some(t) = cli.tau {
        cfg.time.tau = t;
    }
    if let Some(n) = cli.cells {
        cfg.grid.n_cells = n;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn out_dir(cli: &Cli, cfg: &ProblemConfig) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| cfg.output_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn execute(cli: &Cli) -> Result<Report> {
    let cfg = load(cli)?;
    let dir = out_dir(cli, &cfg);
    let mut rep = Report::new(cli.command.name(), cli.command.system(), &cfg);
    match cli.command {
        Command::SimulateNonlinear => simulate_nonlinear(&cfg, &mut rep)?,
        Command::SimulateLinear => simulate_linear(&cfg, &mut rep)?,
        Command::Static => static_state(&cfg, &mut rep)?,
        Command::SweepEps => sweep(&cfg, &mut rep)?,
        Command::Verify => verify(&cfg, &mut rep)?,
        Command::MoserDiag => moser(&cfg, &mut rep)?,
        Command::Decay => decay(&cfg, &mut rep)?,
    }
    rep.write(&dir)?;
    Ok(rep)
}

/// Indices of the stored states closest to each checkpoint; every state when none are given.
fn checkpoint_indices(times: &[f64], checkpoints: &[f64]) -> Vec<usize> {
    if checkpoints.is_empty() {
        return (0..times.len()).collect();
    }
    let mut out: Vec<usize> = checkpoints
        .iter()
        .map(|c| {
            times
                .iter()
                .enumerate()
                .min_by(|a, b| (a.1 - c).abs().total_cmp(&(b.1 - c).abs()))
                .map(|(i, _)| i)
                .unwrap_or(0)
        })
        .collect();
    out.dedup();
    out
}

fn simulate_nonlinear(cfg: &ProblemConfig, rep: &mut Report) -> Result<()> {
    let sc = cfg.scenario();
    let run = sc.run_nonlinear(cfg.eps)?;
    let led = &run.ledger;
    let n = run.grid.n_cells();
    let times: Vec<f64> = run.states.iter().map(|s| s.t).collect();
    let mut header = vec!["t".to_string()];
    header.extend((0..=n).map(|i| format!("w_{i}")));
    header.extend((0..n).map(|k| format!("c_{k}")));
    let rows = checkpoint_indices(&times, &cfg.time.checkpoints).into_iter().map(|i| {
        let s = &run.states[i];
        let mut r = vec![s.t];
        r.extend(&s.w.values);
        r.extend(&s.c.values);
        r
    });
    rep.add_table("trajectory.csv", &header, rows);
    output::nonlinear_ledger(rep, led);
    let min_f = led.min_f.iter().cloned().fold(f64::INFINITY, f64::min);
    let min_c = led.min_c.iter().cloned().fold(f64::INFINITY, f64::min);
    rep.check(Invariant::above("orientation_min_F", min_f, 0.0));
    rep.check(Invariant::above("positivity_min_c", min_c, 0.0));
    if cfg.boundary.kappa == 0.0 {
        rep.check(Invariant::below("mass_drift", led.mass_drift(), 1e-12));
    } else {
        rep.metric("mass_drift", led.mass_drift());
    }
    rep.check(Invariant::below(
        "dissipation_inequality_violation",
        check_dissipation_inequality(led),
        1e-9,
    ));
    rep.check(Invariant::below(
        "max_step_residual",
        led.max_residual(),
        cfg.solver.tol,
    ));
    rep.metric("final_energy", *led.energy.last().unwrap_or(&f64::NAN));
    Ok(())
}

fn simulate_linear(cfg: &ProblemConfig, rep: &mut Report) -> Result<()> {
    let sc = cfg.scenario();
    let run = sc.run_linear(Ordering::Interleaved, Some(cfg.seed))?;
    let n = run.grid.n_cells();
    let times: Vec<f64> = run.states.iter().map(|s| s.t).collect();
    let mut header = vec!["t".to_string()];
    header.extend((0..=n).map(|i| format!("u_{i}")));
    header.extend((0..n).map(|k| format!("rho_{k}")));
    let rows = checkpoint_indices(&times, &cfg.time.checkpoints).into_iter().map(|i| {
        let s = &run.states[i];
        let mut r = vec![s.t];
        r.extend(&s.u.values);
        r.extend(&s.rho.values);
        r
    });
    rep.add_table("trajectory.csv", &header, rows);
    let l = &run.ledger;
    let cols: Vec<String> = ["t", "energy", "mech_dissipation", "diff_dissipation", "loading_power"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let rows = (0..l.times.len()).map(|k| {
        vec![
            l.times[k],
            l.energy[k],
            l.mech_dissipation[k],
            l.diff_dissipation[k],
            l.loading_power[k],
        ]
    });
    rep.add_table("ledger.csv", &cols, rows);
    rep.metric("energy_balance_residual", energy_balance_residual(l));
    rep.check(Invariant::below("dissipation_excess", dissipation_excess(l), 1e-10));
    let other = sc.run_linear(Ordering::Reversed, Some(cfg.seed ^ 0x9e37_79b9_7f4a_7c15))?;
    rep.check(Invariant::below(
        "resolve_discrepancy",
        experiments::run_discrepancy(&run, &other),
        1e-10,
    ));
    Ok(())
}

fn static_state(cfg: &ProblemConfig, rep: &mut Report) -> Result<()> {
    let sc = cfg.scenario();
    let forcing = sc.loading.scaled(1.0);
    let pb = sc.linear_problem(&forcing)?;
    let init = sc.linear_initial()?;
    let mass = pb.grid.integrate(&init.rho)?;
    let st = pb.static_solve(cfg.time.t_final, mass)?;
    let n = pb.grid.n_cells();
    let mut header = vec!["t".to_string()];
    header.extend((0..=n).map(|i| format!("u_{i}")));
    header.extend((0..n).map(|k| format!("rho_{k}")));
    let mut row = vec![cfg.time.t_final];
    row.extend(&st.v.values);
    row.extend(&st.xi.values);
    rep.add_table("trajectory.csv", &header, std::iter::once(row));
    rep.metric("chemical_potential", st.nu);
    rep.check(Invariant::below("static_residual", st.residual, 1e-10));
    Ok(())
}

fn sweep(cfg: &ProblemConfig, rep: &mut Report) -> Result<()> {
    let sc = cfg.scenario();
    let r = experiments::eps_sweep(&sc, &cfg.eps_list)?;
    rep.add_raw("sweep.csv", r.to_csv());
    for (j, name) in SweepRow::ERROR_COLUMNS.iter().enumerate() {
        for (w, o) in r.orders.iter().enumerate() {
            rep.metric(&format!("order_{name}_{w}"), o[j]);
        }
    }
    rep.check(Invariant::flag("errors_strictly_decreasing", r.errors_decreasing()));
    for (name, ratio) in AuditRow::COLUMNS.iter().zip(r.audit_ratios()) {
        rep.check(Invariant::below(&format!("audit_ratio_{name}"), ratio, 3.0));
    }
    rep.check(Invariant::below(
        "max_dissipation_violation",
        r.max_dissipation_violation(),
        1e-9,
    ));
    let drift = r.rows.iter().map(|x| x.mass_drift).fold(0.0, f64::max);
    rep.check(Invariant::below("max_mass_drift", drift, 1e-12));
    rep.metric("linear_energy_balance_residual", r.linear_energy_residual);
    rep.check(Invariant::below(
        "linear_dissipation_excess",
        r.linear_dissipation_excess,
        1e-10,
    ));
    Ok(())
}

fn verify(cfg: &ProblemConfig, rep: &mut Report) -> Result<()> {
    let model = MaterialModel::new(cfg.material.clone())?;
    let audit = model.finite_difference_audit(50, cfg.seed);
    rep.check(Invariant::below("derivative_fd_relative_error", audit.max(), 1e-6));
    let lin = model.linearize();
    let fd = model.finite_difference_tensors(1e-5);
    rep.check(Invariant::below("linearization_fd_error", lin.max_abs_diff(&fd), 1e-6));
    if let Some(c) = lin.coefficients_1d() {
        for (name, v) in [("C", c.c), ("K", c.k), ("L", c.l), ("D", c.d), ("M_eq", c.m_eq)] {
            rep.metric(&format!("linear_{name}"), v);
        }
    }
    let mut p2 = cfg.material.clone().with_dim(2);
    p2.q_det = p2.q_det.max(p2.p * 2.0 / (p2.p - 2.0));
    let m2 = MaterialModel::new(p2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut skew = 0.0f64;
    for _ in 0..10 {
        let a: f64 = rng.gen_range(-1.0..1.0);
        let (c, d) = m2.verify_symmetry_action(&[0.0, a, -a, 0.0]);
        skew = skew.max(c).max(d);
    }
    rep.check(Invariant::below("skew_action_2d", skew, 1e-6));
    rep.check(Invariant::above(
        "min_sym_eigenvalue_2d",
        m2.verify_positive_definiteness(),
        0.0,
    ));
    let ceq = cfg.material.c_eq;
    let grid = |n| log_grid::<f64>(1e-4 * ceq, 1e4 * ceq, n);
    if cfg.material.m > 0.0 && cfg.material.m < 2.0 {
        let a = log_ratio_sup(cfg.material.m, ceq, &grid(2001))?;
        let b = log_ratio_sup(cfg.material.m, ceq, &grid(4001))?;
        rep.metric("log_ratio_sup", b);
        rep.check(Invariant::below(
            "log_ratio_refinement_change",
            ((a - b) / b).abs(),
            0.05,
        ));
    }
    let a = power_ratio_sup(cfg.material.r, ceq, &grid(2001))?;
    let b = power_ratio_sup(cfg.material.r, ceq, &grid(4001))?;
    rep.metric("power_ratio_sup", b);
    rep.check(Invariant::below(
        "power_ratio_refinement_change",
        ((a - b) / b).abs(),
        0.05,
    ));
    if cfg.material.r == 0.0 {
        rep.check(Invariant::below("power_ratio_sup_r0", b, 1.0 + 1e-9));
    }
    Ok(())
}

fn moser(cfg: &ProblemConfig, rep: &mut Report) -> Result<()> {
    let sc = cfg.scenario();
    let run = sc.run_nonlinear(cfg.eps)?;
    let seq = MoserSequence::for_material(&cfg.material)?;
    let cs: Vec<_> = run.states.iter().map(|s| s.c.clone()).collect();
    let m = experiments::moser_diagnostic(&run.grid, &cs, seq, cfg.moser_levels)?;
    rep.add_raw("moser.csv", m.to_csv());
    output::nonlinear_ledger(rep, &run.ledger);
    rep.metric("linf", m.linf);
    rep.check(Invariant::flag("norms_nondecreasing", m.nondecreasing()));
    rep.check(Invariant::flag("norms_bounded_by_linf", m.bounded()));
    rep.check(Invariant::below("relative_gap", m.relative_gap(), 0.01));
    Ok(())
}

fn decay(cfg: &ProblemConfig, rep: &mut Report) -> Result<()> {
    let sc = cfg.scenario();
    let d = experiments::long_time_decay(&sc, cfg.decay.tau, cfg.decay.t_final)?;
    rep.add_raw("decay.csv", d.to_csv());
    rep.metric("initial_distance", d.curve[0]);
    rep.check(Invariant::below("static_residual", d.static_residual, 1e-10));
    rep.check(Invariant::flag("curve_nonincreasing", d.nonincreasing(1e-12)));
    rep.check(Invariant::below("final_over_initial", d.ratio(), 1e-6));
    Ok(())
}
