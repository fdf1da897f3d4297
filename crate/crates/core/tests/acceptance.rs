//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

mod common;

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use porolab::constitutive::inequalities::{log_grid, log_ratio_sup, power_ratio_sup};
use porolab::constitutive::{min_sym_eigenvalue, MaterialModel, MaterialParams};
use porolab::experiments::{self, MoserSequence};
use porolab::linear_solver::{energy_balance_residual, Ordering};
use porolab::nonlinear_solver::check_dissipation_inequality;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn constitutive() -> Outcome {
    let model = MaterialModel::new(MaterialParams::unit_biot()).unwrap();
    let audit = model.finite_difference_audit(50, 7).max();
    let lin = model.linearize();
    let c = lin.coefficients_1d().unwrap();
    let expected: [(f64, f64); 5] = [(c.c, 2.6), (c.k, -1.0), (c.l, 2.0), (c.d, 1.0), (c.m_eq, 1.0)];
    let coeff_err = expected.iter().map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let fd_err = lin.max_abs_diff(&model.finite_difference_tensors(1e-5));
    outcome(
        audit <= 1e-6 && coeff_err <= 1e-12 && fd_err <= 1e-6,
        format!("max FD rel err {audit:.2e}, coefficient err {coeff_err:.2e}, tensor FD err {fd_err:.2e}"),
    )
}

fn tensor_structure() -> Outcome {
    let model = MaterialModel::new(MaterialParams::unit_biot_2d()).unwrap();
    let lin = model.linearize();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let a: f64 = rng.gen_range(-1.0..1.0);
        let w = [0.0, a, -a, 0.0];
        let (cw, dw) = model.verify_symmetry_action(&w);
        let analytic = lin
            .c
            .apply(&w)
            .into_iter()
            .chain(lin.d.apply(&w))
            .fold(0.0, |m: f64, v| m.max(v.abs()));
        worst = worst.max(cw).max(dw).max(analytic);
    }
    let eig = min_sym_eigenvalue(&lin.c);
    outcome(
        worst <= 1e-6 && eig > 0.0,
        format!("max |C:W|,|D:W| {worst:.2e}, min sym eigenvalue {eig:.4}"),
    )
}

fn scalar_inequalities() -> Outcome {
    let g1 = log_grid::<f64>(1e-4, 1e4, 2001);
    let g2 = log_grid::<f64>(1e-4, 1e4, 4001);
    let a1 = log_ratio_sup(1.0, 1.0, &g1).unwrap();
    let b1 = log_ratio_sup(1.0, 1.0, &g2).unwrap();
    let a2 = power_ratio_sup(0.0, 1.0, &g1).unwrap();
    let b2 = power_ratio_sup(0.0, 1.0, &g2).unwrap();
    let stable = |a: f64, b: f64| a.is_finite() && b.is_finite() && ((a - b) / b).abs() <= 0.05;
    outcome(
        stable(a1, b1) && stable(a2, b2) && b2 <= 1.0 + 1e-9,
        format!("log-ratio sup {b1:.6}, power-ratio sup {b2:.12}"),
    )
}

fn nonlinear_structure() -> Outcome {
    let cfg = common::default_config();
    let run = cfg.scenario().run_nonlinear(0.1).unwrap();
    let led = &run.ledger;
    let min_f = led.min_f.iter().cloned().fold(f64::INFINITY, f64::min);
    let min_c = led.min_c.iter().cloned().fold(f64::INFINITY, f64::min);
    let drift = led.mass_drift();
    let viol = check_dissipation_inequality(led);
    let res = led.max_residual();
    outcome(
        min_f > 0.0 && min_c > 0.0 && drift <= 1e-12 && viol <= 1e-9 && res <= 1e-10,
        format!("min F {min_f:.4}, min c {min_c:.4}, mass drift {drift:.1e}, violation {viol:.1e}, residual {res:.1e}"),
    )
}

fn limit_passage() -> Outcome {
    let cfg = common::default_config();
    let rep = experiments::eps_sweep(&cfg.scenario(), &[0.2, 0.1, 0.05, 0.025]).unwrap();
    let ratios = rep.audit_ratios();
    let worst = ratios.iter().cloned().fold(0.0, f64::max);
    let orders: Vec<String> = rep.orders.iter().map(|o| format!("{:.2}", o[0])).collect();
    outcome(
        rep.errors_decreasing() && worst <= 3.0 && rep.max_dissipation_violation() <= 1e-9,
        format!(
            "errors decreasing {}, max audit ratio {worst:.3}, u-H1 orders [{}]",
            rep.errors_decreasing(),
            orders.join(", ")
        ),
    )
}

fn linear_energy_balance() -> Outcome {
    let mut sc = common::default_config().scenario();
    let res: Vec<f64> = [4e-3, 2e-3, 1e-3]
        .iter()
        .map(|tau| {
            sc.tau = *tau;
            energy_balance_residual(&sc.run_linear(Ordering::Interleaved, None).unwrap().ledger)
        })
        .collect();
    let order = (res[0] / res[1]).log2().min((res[1] / res[2]).log2());
    outcome(
        order >= 0.9,
        format!(
            "residuals {:.3e} {:.3e} {:.3e}, min order {order:.3}",
            res[0], res[1], res[2]
        ),
    )
}

fn manufactured_convergence() -> Outcome {
    let errs: Vec<(f64, f64)> = [32, 64, 128]
        .iter()
        .map(|n| common::manufactured_errors(common::unit_coefficients(), *n, 0.01, 0.1))
        .collect();
    let mut order = f64::INFINITY;
    for w in errs.windows(2) {
        order = order.min((w[0].0 / w[1].0).log2()).min((w[0].1 / w[1].1).log2());
    }
    outcome(
        order >= 1.9,
        format!(
            "u errors {:.3e} {:.3e} {:.3e}, rho errors {:.3e} {:.3e} {:.3e}, min order {order:.3}",
            errs[0].0, errs[1].0, errs[2].0, errs[0].1, errs[1].1, errs[2].1
        ),
    )
}

fn uniqueness_and_decay() -> Outcome {
    let cfg = common::default_config();
    let disc = experiments::uniqueness_test(&cfg.scenario(), cfg.seed).unwrap();
    let dcfg = common::decay_config();
    let d = experiments::long_time_decay(&dcfg.scenario(), dcfg.decay.tau, 50.0).unwrap();
    outcome(
        disc <= 1e-10 && d.nonincreasing(1e-12) && d.ratio() <= 1e-6,
        format!(
            "re-solve discrepancy {disc:.2e}, decay nonincreasing {}, final/initial {:.2e}",
            d.nonincreasing(1e-12),
            d.ratio()
        ),
    )
}

fn moser() -> Outcome {
    let cfg = common::default_config();
    let run = cfg.scenario().run_nonlinear(0.1).unwrap();
    let m = cfg.material.m;
    let seq = MoserSequence::for_material(&cfg.material).unwrap();
    let cs: Vec<_> = run.states.iter().map(|s| s.c.clone()).collect();
    let rep = experiments::moser_diagnostic(&run.grid, &cs, seq, 8).unwrap();
    let exact = rep
        .exponents
        .iter()
        .enumerate()
        .all(|(n, q)| *q == 2f64.powi(n as i32) * (2.0 - m) + m - 1.0);
    outcome(
        exact && rep.nondecreasing() && rep.bounded() && rep.relative_gap() < 0.01,
        format!(
            "exponents exact {exact}, q_8 = {}, nondecreasing {}, gap {:.3}%",
            rep.exponents[8],
            rep.nondecreasing(),
            100.0 * rep.relative_gap()
        ),
    )
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome, Duration);
    let criteria: [Criterion; 9] = [
        ("constitutive correctness", constitutive, Duration::from_secs(1)),
        ("tensor structure", tensor_structure, Duration::from_secs(1)),
        ("scalar inequalities", scalar_inequalities, Duration::from_secs(1)),
        (
            "nonlinear structure preservation",
            nonlinear_structure,
            Duration::from_secs(30),
        ),
        ("limit passage", limit_passage, Duration::from_secs(300)),
        ("linear energy balance", linear_energy_balance, Duration::from_secs(30)),
        (
            "manufactured convergence",
            manufactured_convergence,
            Duration::from_secs(30),
        ),
        ("uniqueness and decay", uniqueness_and_decay, Duration::from_secs(60)),
        ("moser diagnostic", moser, Duration::from_secs(5)),
    ];
    let mut failed = 0;
    for (i, (name, f, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = f();
        let dt = start.elapsed();
        let pass = out.pass && dt <= *budget;
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {} {:<34} {} ({:.2}s of {}s) {}",
            i + 1,
            name,
            if pass { "PASS" } else { "FAIL" },
            dt.as_secs_f64(),
            budget.as_secs(),
            out.detail
        );
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
