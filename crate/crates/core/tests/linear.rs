mod common;

use proptest::prelude::*;

use porolab::discretization::Location;
use porolab::linear_solver::{dissipation_excess, energy_balance_residual, LinearProblem, LinearState, Ordering};
use porolab::loading::{LoadingSpec, Profile};
use porolab::Grid1D;

#[test]
fn zero_data_stays_zero() {
    let mut sc = common::default_config().scenario();
    sc.loading = LoadingSpec::none();
    sc.rho0 = Profile::Zero;
    sc.t_final = 0.05;
    let run = sc.run_linear(Ordering::Interleaved, None).unwrap();
    assert!(run
        .states
        .iter()
        .all(|s| s.u.max_abs() == 0.0 && s.rho.max_abs() == 0.0));
    assert_eq!(energy_balance_residual(&run.ledger), 0.0);
}

#[test]
fn mass_is_conserved() {
    let sc = common::default_config().scenario();
    let run = sc.run_linear(Ordering::Interleaved, None).unwrap();
    let m0 = run.grid.integrate(&run.states[0].rho).unwrap();
    for w in run.states.windows(2) {
        let a = run.grid.integrate(&w[0].rho).unwrap();
        let b = run.grid.integrate(&w[1].rho).unwrap();
        assert!((a - b).abs() <= 1e-13);
    }
    let last = run.grid.integrate(&run.states.last().unwrap().rho).unwrap();
    assert!((last - m0).abs() <= 1e-12);
}

#[test]
fn manufactured_solution_is_second_order_in_space() {
    let c = common::unit_coefficients();
    let (u1, r1) = common::manufactured_errors(c, 16, 0.02, 0.1);
    let (u2, r2) = common::manufactured_errors(c, 32, 0.02, 0.1);
    assert!(
        (u1 / u2).log2() > 1.9 && (r1 / r2).log2() > 1.9,
        "{u1:e} {u2:e} {r1:e} {r2:e}"
    );
}

#[test]
fn manufactured_solution_with_other_coefficients() {
    let mut c = common::unit_coefficients();
    c.c = 4.0;
    c.k = 0.7;
    c.l = 1.5;
    c.d = 0.3;
    c.m_eq = 2.0;
    let (u1, r1) = common::manufactured_errors(c, 32, 0.01, 0.05);
    let (u2, r2) = common::manufactured_errors(c, 64, 0.01, 0.05);
    assert!((u1 / u2).log2() > 1.9 && (r1 / r2).log2() > 1.9);
}

#[test]
fn energy_balance_residual_halves_with_tau() {
    let mut sc = common::default_config().scenario();
    let mut res = Vec::new();
    for tau in [4e-3, 2e-3, 1e-3] {
        sc.tau = tau;
        let run = sc.run_linear(Ordering::Interleaved, None).unwrap();
        assert!(dissipation_excess(&run.ledger) <= 1e-12);
        res.push(energy_balance_residual(&run.ledger));
    }
    for w in res.windows(2) {
        let r = w[1] / w[0];
        assert!((0.4..=0.6).contains(&r), "{res:?}");
    }
}

#[test]
fn corrupted_viscosity_inflates_residual() {
    let mut sc = common::default_config().scenario();
    sc.tau = 2.5e-4;
    let run = sc.run_linear(Ordering::Interleaved, None).unwrap();
    let clean = energy_balance_residual(&run.ledger);
    let mut bad = run.ledger.clone();
    for v in bad.mech_dissipation.iter_mut() {
        *v *= 1.1;
    }
    let corrupted = energy_balance_residual(&bad);
    assert!(corrupted > 10.0 * clean, "{corrupted:e} vs {clean:e}");
}

#[test]
fn halving_tau_changes_final_state_by_first_order() {
    let mut sc = common::default_config().scenario();
    let finals: Vec<_> = [4e-3, 2e-3, 1e-3]
        .iter()
        .map(|tau| {
            sc.tau = *tau;
            sc.run_linear(Ordering::Interleaved, None)
                .unwrap()
                .states
                .pop()
                .unwrap()
        })
        .collect();
    let d = |a: &LinearState<f64>, b: &LinearState<f64>| a.u.sub(&b.u).max_abs().max(a.rho.sub(&b.rho).max_abs());
    let ratio = d(&finals[0], &finals[1]) / d(&finals[1], &finals[2]);
    assert!((1.6..2.5).contains(&ratio), "{ratio}");
}

#[test]
fn unloaded_energy_is_nonincreasing() {
    let mut sc = common::default_config().scenario();
    sc.loading = LoadingSpec::none();
    let run = sc.run_linear(Ordering::Interleaved, None).unwrap();
    for w in run.ledger.energy.windows(2) {
        assert!(w[1] <= w[0] + 1e-15);
    }
}

#[test]
fn static_solutions() {
    let spec = LoadingSpec::none();
    let forcing = spec.scaled(1.0);
    let c = common::unit_coefficients();
    let pb = LinearProblem {
        coeffs: c,
        grid: Grid1D::new(32).unwrap(),
        forcing: &forcing,
    };
    let z = pb.static_solve(0.0, 0.0).unwrap();
    assert_eq!(z.v.max_abs(), 0.0);
    assert_eq!(z.xi.max_abs(), 0.0);
    assert_eq!(z.nu, 0.0);
    let big_r = 0.3;
    let s = pb.static_solve(0.0, big_r).unwrap();
    assert!(s.residual <= 1e-12);
    assert!(s.xi.values.iter().all(|x| (x - big_r).abs() <= 1e-13));
    let slope = -c.k / c.c * big_r;
    for (i, x) in pb.grid.coordinates(Location::Nodes).iter().enumerate() {
        assert!((s.v.values[i] - slope * x).abs() <= 1e-13);
    }
    let loaded = common::default_config();
    let lf = loaded.loading.scaled(1.0);
    let pb2 = LinearProblem {
        coeffs: c,
        grid: Grid1D::new(64).unwrap(),
        forcing: &lf,
    };
    assert!(pb2.static_solve(1.0, 0.0).unwrap().residual <= 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn orderings_and_seeds_agree(
        cc in 1.5f64..5.0,
        k in -1.0f64..1.0,
        l in 1.0f64..3.0,
        d in 0.1f64..2.0,
        m in 0.2f64..3.0,
        seed in any::<u64>(),
    ) {
        let coeffs = porolab::LinearCoefficients { c: cc, k, l, d, m_eq: m };
        let spec = common::default_config().loading;
        let forcing = spec.scaled(1.0);
        let grid = Grid1D::new(24).unwrap();
        let pb = LinearProblem { coeffs, grid, forcing: &forcing };
        let init = LinearState {
            t: 0.0,
            u: grid.zeros(Location::Nodes),
            rho: grid.sample(Location::Cells, |x| 0.5 * (std::f64::consts::PI * x).cos()),
        };
        let a = pb.run(init.clone(), 1e-2, 0.1, Ordering::Interleaved, Some(seed)).unwrap();
        let b = pb.run(init, 1e-2, 0.1, Ordering::Reversed, Some(seed.wrapping_add(1))).unwrap();
        prop_assert!(porolab::experiments::run_discrepancy(&a, &b) <= 1e-10);
    }
}
