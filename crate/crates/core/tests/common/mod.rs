#![allow(dead_code)]

use std::f64::consts::PI;
use std::path::PathBuf;

use porolab::cli::{parse_config, ProblemConfig};
use porolab::discretization::Location;
use porolab::linear_solver::{LinearProblem, LinearState, Ordering};
use porolab::loading::Forcing;
use porolab::{Grid1D, LinearCoefficients};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn default_config() -> ProblemConfig {
    parse_config(&fixture("biot_default.json")).expect("default fixture parses")
}

pub fn decay_config() -> ProblemConfig {
    parse_config(&fixture("biot_decay.json")).expect("decay fixture parses")
}

/// Forcing for `u = (1 + t) sin(pi x)`, `rho = (1 + t) cos(pi x)`.
pub struct Manufactured {
    pub c: LinearCoefficients,
}

impl Manufactured {
    pub fn u(&self, x: f64, t: f64) -> f64 {
        (1.0 + t) * (PI * x).sin()
    }

    pub fn rho(&self, x: f64, t: f64) -> f64 {
        (1.0 + t) * (PI * x).cos()
    }
}

impl Forcing<f64> for Manufactured {
    fn body_force(&self, x: f64, t: f64) -> f64 {
        let k = &self.c;
        (k.c * (1.0 + t) * PI * PI + k.d * PI * PI + k.k * (1.0 + t) * PI) * (PI * x).sin()
    }

    fn traction(&self, t: f64) -> f64 {
        let k = &self.c;
        -(k.c * (1.0 + t) * PI + k.d * PI + k.k * (1.0 + t))
    }

    fn mass_source(&self, x: f64, t: f64) -> f64 {
        let k = &self.c;
        (1.0 + k.m_eq * (1.0 + t) * (k.k * PI.powi(3) + k.l * PI * PI)) * (PI * x).cos()
    }
}

/// Final-time `(||u_h - u||_{L^2}, ||rho_h - rho||_{L^2})` on `n` cells.
pub fn manufactured_errors(coeffs: LinearCoefficients, n: usize, tau: f64, t_final: f64) -> (f64, f64) {
    let mms = Manufactured { c: coeffs };
    let grid = Grid1D::new(n).unwrap();
    let pb = LinearProblem {
        coeffs,
        grid,
        forcing: &mms,
    };
    let init = LinearState {
        t: 0.0,
        u: grid.sample(Location::Nodes, |x| mms.u(x, 0.0)),
        rho: grid.sample(Location::Cells, |x| mms.rho(x, 0.0)),
    };
    let run = pb.run(init, tau, t_final, Ordering::Interleaved, None).unwrap();
    let last = run.states.last().unwrap();
    let t = last.t;
    let eu = last.u.sub(&grid.sample(Location::Nodes, |x| mms.u(x, t)));
    let er = last.rho.sub(&grid.sample(Location::Cells, |x| mms.rho(x, t)));
    (grid.lq_norm(&eu, 2.0).unwrap(), grid.lq_norm(&er, 2.0).unwrap())
}

pub fn unit_coefficients() -> LinearCoefficients {
    LinearCoefficients {
        c: 2.6,
        k: -1.0,
        l: 2.0,
        d: 1.0,
        m_eq: 1.0,
    }
}
