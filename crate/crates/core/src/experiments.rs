//! Reproducible experiments built on both solvers: the small-strain sweep, a-priori
//! scaling audits, the Moser norm cascade, long-time decay and re-solve uniqueness.

use rayon::prelude::*;
use serde::Serialize;

use crate::constitutive::{GrowthCase, MaterialModel, MaterialParams};
use crate::discretization::{Field, Grid1D, Location, SpaceNorm, TimeNorm};
use crate::error::{Error, Result};
use crate::linear_solver::{
    dissipation_excess, energy_balance_residual, LinearProblem, LinearRun, LinearState, Ordering, StaticSolution,
};
use crate::loading::{BCSpec, LoadingSpec, Profile};
use crate::nonlinear_solver::{
    check_dissipation_inequality, initial_state, NonlinearProblem, NonlinearRun, SolverSettings,
};

/// Everything needed to run either solver on one configuration.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub material: MaterialParams<f64>,
    pub n_cells: usize,
    pub tau: f64,
    pub t_final: f64,
    pub loading: LoadingSpec,
    pub bc: BCSpec,
    pub u0: Profile,
    pub rho0: Profile,
    pub solver: SolverSettings,
}

impl Scenario {
    pub fn model(&self) -> Result<MaterialModel<f64>> {
        MaterialModel::new(self.material.clone())
    }

    pub fn grid(&self) -> Result<Grid1D<f64>> {
        Grid1D::new(self.n_cells)
    }

    /// Nonlinear run from `(id + eps u0, c_eq + eps rho0)` under loads scaled by `eps`.
    pub fn run_nonlinear(&self, eps: f64) -> Result<NonlinearRun<f64>> {
        let model = self.model()?;
        let forcing = self.loading.scaled(eps);
        let pb = NonlinearProblem {
            model: &model,
            grid: self.grid()?,
            forcing: &forcing,
            kappa: self.bc.kappa,
            mu_ext: self.bc.mu_ext,
            settings: self.solver,
        };
        let s0 = initial_state(
            &pb.grid,
            self.material.c_eq,
            eps,
            |x| self.u0.eval(x),
            |x| self.rho0.eval(x),
        );
        pb.run(s0, self.tau, self.t_final, eps)
    }

    pub fn linear_initial(&self) -> Result<LinearState<f64>> {
        let g = self.grid()?;
        let mut u = g.sample(Location::Nodes, |x| self.u0.eval(x));
        u.values[0] = 0.0;
        Ok(LinearState {
            t: 0.0,
            u,
            rho: g.sample(Location::Cells, |x| self.rho0.eval(x)),
        })
    }

    /// Runs the linearized system with the given unknown ordering and assembly seed.
    pub fn run_linear(&self, ordering: Ordering, seed: Option<u64>) -> Result<LinearRun<f64>> {
        self.run_linear_from(self.linear_initial()?, self.tau, self.t_final, ordering, seed)
    }

    pub fn run_linear_from(
        &self,
        initial: LinearState<f64>,
        tau: f64,
        t_final: f64,
        ordering: Ordering,
        seed: Option<u64>,
    ) -> Result<LinearRun<f64>> {
        let forcing = self.loading.scaled(1.0);
        let pb = self.linear_problem(&forcing)?;
        pb.run(initial, tau, t_final, ordering, seed)
    }

    pub fn linear_problem<'a>(&self, forcing: &'a dyn crate::loading::Forcing<f64>) -> Result<LinearProblem<'a, f64>> {
        let coeffs = self
            .model()?
            .linearize()
            .coefficients_1d()
            .ok_or_else(|| Error::Domain("the solvers are one-dimensional; set dim = 1".into()))?;
        Ok(LinearProblem {
            coeffs,
            grid: self.grid()?,
            forcing,
        })
    }
}

/// Uniform-boundedness columns for one sweep member.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct AuditRow {
    pub eps: f64,
    /// `max_t ||u||_{H^1}`
    pub u_h1: f64,
    /// `||grad u_dot||_{L^2(L^2)}`
    pub grad_rate: f64,
    /// `eps^(1-2/p) max_t ||D^2 u||_{L^p}`
    pub d2u: f64,
    /// `eps^-2 max_t int (c log(c/c_eq) - c + c_eq)`
    pub llogl: f64,
    /// `max_t ||rho||_{L^2}`
    pub rho_l2: f64,
    /// `max_t ||c||_{L^inf}`
    pub c_linf: f64,
    /// `||M grad mu / eps||_{L^2(L^2)}`
    pub flux_l2: f64,
}

impl AuditRow {
    pub const COLUMNS: [&'static str; 7] = ["u_h1", "grad_rate", "d2u", "llogl", "rho_l2", "c_linf", "flux_l2"];

    pub fn values(&self) -> [f64; 7] {
        [
            self.u_h1,
            self.grad_rate,
            self.d2u,
            self.llogl,
            self.rho_l2,
            self.c_linf,
            self.flux_l2,
        ]
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SweepRow {
    pub eps: f64,
    /// `max_t ||u_eps - u||_{H^1}`
    pub err_u_h1: f64,
    /// `max_t ||u_eps - u||_{L^2}`
    pub err_u_l2: f64,
    /// `max_t ||rho_eps - rho||_{L^2}`
    pub err_rho_l2: f64,
    /// `||J_eps - J||_{L^2(L^2)}`
    pub err_flux: f64,
    pub audit: AuditRow,
    pub dissipation_violation: f64,
    pub mass_drift: f64,
    pub max_residual: f64,
}

impl SweepRow {
    pub const ERROR_COLUMNS: [&'static str; 4] = ["err_u_h1", "err_u_l2", "err_rho_l2", "err_flux"];

    pub fn errors(&self) -> [f64; 4] {
        [self.err_u_h1, self.err_u_l2, self.err_rho_l2, self.err_flux]
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    /// Richardson orders between consecutive members, one entry per error column.
    pub orders: Vec<[f64; 4]>,
    pub linear_energy_residual: f64,
    pub linear_dissipation_excess: f64,
}

impl SweepReport {
    /// Every error column strictly decreases along the (decreasing) eps list.
    pub fn errors_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| {
            w[0].errors()
                .iter()
                .zip(w[1].errors())
                .all(|(a, b)| b < *a || (*a == 0.0 && b == 0.0))
        })
    }

    /// `max/min` of each audit column over the sweep (1 for columns that vanish identically).
    pub fn audit_ratios(&self) -> [f64; 7] {
        let mut out = [1.0; 7];
        for (j, r) in out.iter_mut().enumerate() {
            let col: Vec<f64> = self.rows.iter().map(|row| row.audit.values()[j]).collect();
            let hi = col.iter().cloned().fold(f64::MIN, f64::max);
            let lo = col.iter().cloned().fold(f64::MAX, f64::min);
            *r = if hi == 0.0 {
                1.0
            } else if lo <= 0.0 {
                f64::INFINITY
            } else {
                hi / lo
            };
        }
        out
    }

    pub fn audit_bounded(&self, max_ratio: f64) -> bool {
        self.audit_ratios().iter().all(|r| *r <= max_ratio)
    }

    pub fn max_dissipation_violation(&self) -> f64 {
        self.rows.iter().map(|r| r.dissipation_violation).fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "eps[-],err_u_h1[-],err_u_l2[-],err_rho_l2[-],err_flux[-],u_h1[-],grad_rate[-],d2u[-],llogl[-],rho_l2[-],c_linf[-],flux_l2[-],dissipation_violation[-],mass_drift[-],max_residual[-]\n",
        );
        for r in &self.rows {
            let mut vals = vec![r.eps];
            vals.extend(r.errors());
            vals.extend(r.audit.values());
            vals.extend([r.dissipation_violation, r.mass_drift, r.max_residual]);
            let line: Vec<String> = vals.iter().map(|v| crate::scalar::fmt17(*v)).collect();
            s.push_str(&line.join(","));
            s.push('\n');
        }
        s
    }
}

fn require_sweep_list(eps_list: &[f64]) -> Result<()> {
    if eps_list.len() < 3 {
        return Err(Error::Domain(format!(
            "eps list needs at least 3 entries, got {}",
            eps_list.len()
        )));
    }
    if eps_list.iter().any(|e| !(*e > 0.0)) || eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Domain(
            "eps list must be positive and strictly decreasing".into(),
        ));
    }
    Ok(())
}

/// Rescaled nonlinear runs at each `eps` against one linear run on the same grid and step.
pub fn eps_sweep(base: &Scenario, eps_list: &[f64]) -> Result<SweepReport> {
    require_sweep_list(eps_list)?;
    if base.bc.kappa != 0.0 {
        return Err(Error::Domain(
            "the sweep compares against the closed linear system; set kappa = 0".into(),
        ));
    }
    let lin = base.run_linear(Ordering::Interleaved, None)?;
    let forcing = base.loading.scaled(1.0);
    let lin_pb = base.linear_problem(&forcing)?;
    let lin_flux: Vec<Field<f64>> = lin
        .states
        .iter()
        .map(|s| lin_pb.flux(&s.u.values, &s.rho.values))
        .collect();
    let rows: Vec<Result<SweepRow>> = eps_list
        .par_iter()
        .map(|&eps| {
            let run = base.run_nonlinear(eps).map_err(|e| Error::StepFailed {
                time: f64::NAN,
                source: Box::new(Error::Domain(format!("eps = {eps}: {e}"))),
            })?;
            sweep_row(base, &run, &lin, &lin_flux)
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let orders = rows
        .windows(2)
        .map(|w| {
            let r = (w[0].eps / w[1].eps).ln();
            let mut o = [0.0; 4];
            for (j, (a, b)) in w[0].errors().iter().zip(w[1].errors()).enumerate() {
                o[j] = if *a > 0.0 && b > 0.0 {
                    (a / b).ln() / r
                } else {
                    f64::NAN
                };
            }
            o
        })
        .collect();
    Ok(SweepReport {
        rows,
        orders,
        linear_energy_residual: energy_balance_residual(&lin.ledger),
        linear_dissipation_excess: dissipation_excess(&lin.ledger),
    })
}

fn sweep_row(
    base: &Scenario,
    run: &NonlinearRun<f64>,
    lin: &LinearRun<f64>,
    lin_flux: &[Field<f64>],
) -> Result<SweepRow> {
    let g = &run.grid;
    let eps = run.eps;
    if run.states.len() != lin.states.len() {
        return Err(Error::Domain(
            "nonlinear and linear runs have different step counts".into(),
        ));
    }
    let model = base.model()?;
    let forcing = base.loading.scaled(eps);
    let pb = NonlinearProblem {
        model: &model,
        grid: *g,
        forcing: &forcing,
        kappa: base.bc.kappa,
        mu_ext: base.bc.mu_ext,
        settings: base.solver,
    };
    let times: Vec<f64> = run.states.iter().map(|s| s.t).collect();
    let resc: Vec<_> = run.states.iter().map(|s| pb.rescale(s, eps)).collect();
    let du: Vec<Field<f64>> = resc.iter().zip(&lin.states).map(|(r, l)| r.u.sub(&l.u)).collect();
    let drho: Vec<Field<f64>> = resc.iter().zip(&lin.states).map(|(r, l)| r.rho.sub(&l.rho)).collect();
    let dflux: Vec<Field<f64>> = resc.iter().zip(lin_flux).map(|(r, j)| r.flux_direct.sub(j)).collect();
    let rhos: Vec<Field<f64>> = resc.iter().map(|r| r.rho.clone()).collect();
    let fluxes: Vec<Field<f64>> = resc.iter().map(|r| r.flux_direct.clone()).collect();
    let led = &run.ledger;
    let p = base.material.p;
    let grad_rate = times
        .windows(2)
        .zip(led.rate_sq.iter().skip(1))
        .map(|(t, r)| (t[1] - t[0]) * r)
        .sum::<f64>()
        .sqrt();
    let maxv = |v: &[f64]| v.iter().cloned().fold(0.0, f64::max);
    let audit = AuditRow {
        eps,
        u_h1: maxv(&led.h1_u),
        grad_rate,
        d2u: eps.powf(1.0 - 2.0 / p) * maxv(&led.lp_d2u),
        llogl: maxv(&led.llogl) / (eps * eps),
        rho_l2: g.bochner_norm(&times, &rhos, TimeNorm::Max, SpaceNorm::Lq(2.0))?,
        c_linf: maxv(&led.linf_c),
        flux_l2: g.bochner_norm(&times, &fluxes, TimeNorm::L2, SpaceNorm::Lq(2.0))?,
    };
    Ok(SweepRow {
        eps,
        err_u_h1: g.bochner_norm(&times, &du, TimeNorm::Max, SpaceNorm::H1)?,
        err_u_l2: g.bochner_norm(&times, &du, TimeNorm::Max, SpaceNorm::Lq(2.0))?,
        err_rho_l2: g.bochner_norm(&times, &drho, TimeNorm::Max, SpaceNorm::Lq(2.0))?,
        err_flux: g.bochner_norm(&times, &dflux, TimeNorm::L2, SpaceNorm::Lq(2.0))?,
        audit,
        dissipation_violation: check_dissipation_inequality(led),
        mass_drift: led.mass_drift(),
        max_residual: led.max_residual(),
    })
}

/// Exponent sequences of the norm cascade.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum MoserSequence {
    /// `2^n (2 - m) + m - 1`
    CaseI { m: f64 },
    /// `2^n (3 + r - m) + m - 1`
    CaseIIa { m: f64, r: f64 },
    /// `2^n (2 - m) + m + r`
    CaseIIb { m: f64, r: f64 },
}

impl MoserSequence {
    /// Case I when `m` lies in its window, otherwise the material's own case.
    pub fn for_material(p: &MaterialParams<f64>) -> Result<Self> {
        if p.m >= 1.0 && p.m <= 2.0 - p.eta {
            return Ok(MoserSequence::CaseI { m: p.m });
        }
        match p.growth_case() {
            Some(GrowthCase::IIa) => Ok(MoserSequence::CaseIIa { m: p.m, r: p.r }),
            Some(GrowthCase::IIb) => Ok(MoserSequence::CaseIIb { m: p.m, r: p.r }),
            _ => Err(Error::Domain(format!(
                "mobility exponent m = {} lies outside every growth-case window",
                p.m
            ))),
        }
    }

    pub fn exponent(&self, n: u32) -> f64 {
        let two = 2f64.powi(n as i32);
        match *self {
            MoserSequence::CaseI { m } => two * (2.0 - m) + m - 1.0,
            MoserSequence::CaseIIa { m, r } => two * (3.0 + r - m) + m - 1.0,
            MoserSequence::CaseIIb { m, r } => two * (2.0 - m) + m + r,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            MoserSequence::CaseI { m } => (1.0..2.0).contains(&m),
            MoserSequence::CaseIIa { m, r } => m > 0.0 && m < 3.0 + r && r > -1.0,
            MoserSequence::CaseIIb { m, r } => m > 0.0 && m < 2.0 && r > -1.0,
        };
        if ok && self.exponent(0) >= 1.0 {
            Ok(())
        } else {
            Err(Error::Domain(format!("{self:?} lies outside its admissible window")))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MoserReport {
    pub sequence: MoserSequence,
    pub exponents: Vec<f64>,
    /// `sup_t ||c(t)||_{L^{q_n}}`
    pub norms: Vec<f64>,
    pub linf: f64,
    /// `linf - norms[N]`
    pub gap: f64,
}

impl MoserReport {
    pub fn relative_gap(&self) -> f64 {
        if self.linf == 0.0 {
            0.0
        } else {
            self.gap / self.linf
        }
    }

    pub fn nondecreasing(&self) -> bool {
        self.norms.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-12))
    }

    pub fn bounded(&self) -> bool {
        self.norms.iter().all(|v| *v <= self.linf * (1.0 + 1e-8))
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("n[-],q_n[-],sup_norm[-]\n");
        for (n, (q, v)) in self.exponents.iter().zip(&self.norms).enumerate() {
            s.push_str(&format!(
                "{n},{},{}\n",
                crate::scalar::fmt17(*q),
                crate::scalar::fmt17(*v)
            ));
        }
        s
    }
}

/// `(q_n, sup_t ||c||_{L^{q_n}})` for `n = 0..=n_max` on a stored concentration trajectory.
pub fn moser_diagnostic(
    grid: &Grid1D<f64>,
    c: &[Field<f64>],
    sequence: MoserSequence,
    n_max: u32,
) -> Result<MoserReport> {
    sequence.validate()?;
    if c.is_empty() {
        return Err(Error::Domain("empty trajectory".into()));
    }
    if c.iter().any(|f| f.min() < 0.0) {
        return Err(Error::Domain("concentration must be nonnegative".into()));
    }
    let exponents: Vec<f64> = (0..=n_max).map(|n| sequence.exponent(n)).collect();
    let mut norms = Vec::with_capacity(exponents.len());
    for q in &exponents {
        let mut sup: f64 = 0.0;
        for f in c {
            sup = sup.max(grid.lq_norm(f, *q)?);
        }
        norms.push(sup);
    }
    let linf = c.iter().map(|f| f.max_abs()).fold(0.0, f64::max);
    let gap = linf - norms.last().copied().unwrap_or(0.0);
    Ok(MoserReport {
        sequence,
        exponents,
        norms,
        linf,
        gap,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayReport {
    pub times: Vec<f64>,
    /// Quadratic energy of the distance to the static state.
    pub curve: Vec<f64>,
    pub static_residual: f64,
    pub nu: f64,
}

impl DecayReport {
    pub fn nonincreasing(&self, slack: f64) -> bool {
        self.curve.windows(2).all(|w| w[1] <= w[0] + slack)
    }

    pub fn ratio(&self) -> f64 {
        let first = self.curve[0];
        if first == 0.0 {
            0.0
        } else {
            self.curve.last().copied().unwrap_or(0.0) / first
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("t[-],distance_energy[-]\n");
        for (t, e) in self.times.iter().zip(&self.curve) {
            s.push_str(&format!("{},{}\n", crate::scalar::fmt17(*t), crate::scalar::fmt17(*e)));
        }
        s
    }
}

/// Linear run under time-independent loads, measured against the static state of equal mass.
pub fn long_time_decay(sc: &Scenario, tau: f64, t_final: f64) -> Result<DecayReport> {
    let initial = sc.linear_initial()?;
    decay_from(sc, initial, tau, t_final)
}

pub fn decay_from(sc: &Scenario, initial: LinearState<f64>, tau: f64, t_final: f64) -> Result<DecayReport> {
    if !sc.loading.is_time_independent() {
        return Err(Error::Domain("decay needs constant loading amplitudes".into()));
    }
    let forcing = sc.loading.scaled(1.0);
    let pb = sc.linear_problem(&forcing)?;
    let g = pb.grid;
    let mass = g.integrate(&initial.rho)?;
    let st: StaticSolution<f64> = pb.static_solve(0.0, mass)?;
    let run = pb.run(initial, tau, t_final, Ordering::Interleaved, None)?;
    let curve = run
        .states
        .iter()
        .map(|s| pb.quadratic_energy(&s.u.sub(&st.v).values, &s.rho.sub(&st.xi).values))
        .collect();
    Ok(DecayReport {
        times: run.states.iter().map(|s| s.t).collect(),
        curve,
        static_residual: st.residual,
        nu: st.nu,
    })
}

/// Largest state difference over time between two linear runs.
pub fn run_discrepancy(a: &LinearRun<f64>, b: &LinearRun<f64>) -> f64 {
    a.states
        .iter()
        .zip(&b.states)
        .map(|(x, y)| x.u.sub(&y.u).max_abs().max(x.rho.sub(&y.rho).max_abs()))
        .fold(0.0, f64::max)
}

/// Two full linear runs with opposite unknown orderings and different assembly seeds.
pub fn uniqueness_test(sc: &Scenario, seed: u64) -> Result<f64> {
    let a = sc.run_linear(Ordering::Interleaved, Some(seed))?;
    let b = sc.run_linear(Ordering::Reversed, Some(seed ^ 0x9e37_79b9_7f4a_7c15))?;
    Ok(run_discrepancy(&a, &b))
}

/// Same as [`uniqueness_test`] but the second run starts from `rho0 + shift`.
pub fn perturbed_discrepancy(sc: &Scenario, seed: u64, shift: f64) -> Result<f64> {
    let a = sc.run_linear(Ordering::Interleaved, Some(seed))?;
    let mut init = sc.linear_initial()?;
    init.rho = init.rho.map(|v| v + shift);
    let b = sc.run_linear_from(
        init,
        sc.tau,
        sc.t_final,
        Ordering::Reversed,
        Some(seed ^ 0x9e37_79b9_7f4a_7c15),
    )?;
    Ok(run_discrepancy(&a, &b))
}
