//! Staggered time stepping of the finite-strain problem in 1-D.
//!
//! Each step first minimizes the incremental mechanical energy with the
//! concentration frozen, then solves implicit Euler for the concentration
//! with the new deformation frozen. The viscous increment uses the
//! dissipation potential at the previous deformation, which makes the
//! incremental problem quadratic in the rate.

use serde::{Deserialize, Serialize};

use crate::constitutive::MaterialModel;
use crate::discretization::{BandMatrix, Field, Grid1D, Location};
use crate::error::{Error, Result};
use crate::loading::Forcing;
use crate::scalar::{lit, Scalar};

/// Newton controls shared by both sub-steps.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSettings {
    pub tol: f64,
    pub max_newton: usize,
    pub max_halvings: usize,
    pub tikhonov: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            tol: 1e-10,
            max_newton: 50,
            max_halvings: 40,
            tikhonov: 1e-10,
        }
    }
}

/// Everything a step needs besides the state.
pub struct NonlinearProblem<'a, T: Scalar> {
    pub model: &'a MaterialModel<T>,
    pub grid: Grid1D<T>,
    pub forcing: &'a dyn Forcing<T>,
    pub kappa: T,
    pub mu_ext: T,
    pub settings: SolverSettings,
}

/// Displacement `chi - id` at nodes (zero at `x = 0`) and concentration at cells.
#[derive(Clone, Debug, PartialEq)]
pub struct NonlinearState<T> {
    pub t: T,
    pub w: Field<T>,
    pub c: Field<T>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepReport<T> {
    pub iterations: usize,
    pub residual: T,
}

/// Per-step energy bookkeeping, scaled by `1/eps^2` (`eps = 1` gives physical values).
///
/// Index 0 is the initial state; rate entries at index 0 are zero.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EnergyLedger<T> {
    pub eps: T,
    pub times: Vec<T>,
    pub energy: Vec<T>,
    pub mech_dissipation: Vec<T>,
    pub diff_dissipation: Vec<T>,
    pub boundary_work: Vec<T>,
    pub loading_power: Vec<T>,
    /// `int |grad u_dot|^2` for the scaled displacement.
    pub rate_sq: Vec<T>,
    pub linf_c: Vec<T>,
    pub llogl: Vec<T>,
    pub h1_u: Vec<T>,
    pub lp_d2u: Vec<T>,
    pub mass: Vec<T>,
    pub min_f: Vec<T>,
    pub min_c: Vec<T>,
    pub mech_residual: Vec<T>,
    pub diff_residual: Vec<T>,
}

impl<T: Scalar> EnergyLedger<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Largest `|mass(t) - mass(0)|`.
    pub fn mass_drift(&self) -> T {
        let m0 = self.mass[0];
        self.mass.iter().fold(T::zero(), |m, v| m.max((*v - m0).abs()))
    }

    pub fn max_residual(&self) -> T {
        self.mech_residual
            .iter()
            .chain(&self.diff_residual)
            .fold(T::zero(), |m, v| m.max(*v))
    }
}

/// A completed run: every accepted state plus the ledger.
#[derive(Clone, Debug)]
pub struct NonlinearRun<T> {
    pub grid: Grid1D<T>,
    pub eps: T,
    pub states: Vec<NonlinearState<T>>,
    pub ledger: EnergyLedger<T>,
}

/// Linear-scale view of a nonlinear state.
#[derive(Clone, Debug)]
pub struct Rescaled<T> {
    pub u: Field<T>,
    pub rho: Field<T>,
    pub mu_star: Field<T>,
    /// `M grad mu / eps` at nodes from the chain rule.
    pub flux: Field<T>,
    /// The same flux from differences of the cell chemical potentials.
    pub flux_direct: Field<T>,
}

/// `F_k = 1 + (w_{k+1} - w_k)/h` on each cell.
pub fn deformation_gradient<T: Scalar>(grid: &Grid1D<T>, w: &[T]) -> Vec<T> {
    let h = grid.h();
    w.windows(2).map(|p| T::one() + (p[1] - p[0]) / h).collect()
}

fn second_differences<T: Scalar>(grid: &Grid1D<T>, w: &[T]) -> Vec<T> {
    let h2 = grid.h() * grid.h();
    let n = grid.n_cells();
    let mut g = vec![T::zero(); n + 1];
    for i in 1..n {
        g[i] = (w[i + 1] - lit::<T>(2.0) * w[i] + w[i - 1]) / h2;
    }
    g
}

fn min_of<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::infinity(), |m, x| m.min(*x))
}

fn max_abs<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

impl<'a, T: Scalar> NonlinearProblem<'a, T> {
    fn tol(&self) -> T {
        lit(self.settings.tol)
    }

    /// Nodal load coefficients: `<l(t), w> = sum_i loads[i] w[i]`.
    pub fn load_vector(&self, t: T) -> Vec<T> {
        let g = &self.grid;
        let wts = g.weights(Location::Nodes);
        let mut l: Vec<T> = (0..g.n_nodes())
            .map(|i| wts[i] * self.forcing.body_force(g.node(i), t))
            .collect();
        l[0] = T::zero();
        let n = g.n_cells();
        l[n] = l[n] + self.forcing.traction(t);
        l
    }

    /// `sum h Phi(F, c) + sum h H(D^2 chi)`.
    pub fn stored_energy(&self, w: &[T], c: &[T]) -> T {
        let h = self.grid.h();
        let f = deformation_gradient(&self.grid, w);
        let bulk: T = f.iter().zip(c).map(|(f, c)| h * self.model.phi_unchecked(*f, *c)).sum();
        let hyper: T = second_differences(&self.grid, w)
            .iter()
            .map(|g| h * self.model.hyper_1d(*g).0)
            .sum();
        bulk + hyper
    }

    /// Total energy `stored - <l(t), w>`.
    pub fn energy(&self, w: &[T], c: &[T], t: T) -> T {
        let l = self.load_vector(t);
        self.stored_energy(w, c) - l.iter().zip(w).map(|(a, b)| *a * *b).sum()
    }

    fn incremental_energy(&self, w: &[T], fp: &[T], cp: &[T], loads: &[T], tau: T) -> T {
        let h = self.grid.h();
        let f = deformation_gradient(&self.grid, w);
        let visc: T = f
            .iter()
            .zip(fp)
            .zip(cp)
            .map(|((f, fp), c)| h * tau * self.model.zeta(*fp, (*f - *fp) / tau, *c).0)
            .sum();
        self.stored_energy(w, cp) + visc - loads.iter().zip(w).map(|(a, b)| *a * *b).sum()
    }

    fn incremental_gradient(&self, w: &[T], fp: &[T], cp: &[T], loads: &[T], tau: T) -> Vec<T> {
        let n = self.grid.n_cells();
        let h = self.grid.h();
        let f = deformation_gradient(&self.grid, w);
        let mut g: Vec<T> = loads.iter().map(|l| -*l).collect();
        for k in 0..n {
            let s = self.model.sigma_el_unchecked(f[k], cp[k]) + self.model.zeta(fp[k], (f[k] - fp[k]) / tau, cp[k]).1;
            g[k + 1] = g[k + 1] + s;
            g[k] = g[k] - s;
        }
        let d2 = second_differences(&self.grid, w);
        for i in 1..n {
            let hh = self.model.hyper_1d(d2[i]).1 / h;
            g[i - 1] = g[i - 1] + hh;
            g[i] = g[i] - lit::<T>(2.0) * hh;
            g[i + 1] = g[i + 1] + hh;
        }
        g[0] = T::zero();
        g
    }

    fn incremental_hessian(&self, w: &[T], fp: &[T], cp: &[T], tau: T) -> BandMatrix<T> {
        let n = self.grid.n_cells();
        let h = self.grid.h();
        let f = deformation_gradient(&self.grid, w);
        let mut a = BandMatrix::zeros(n, 2, 2);
        // unknown j <-> node j + 1
        let mut add = |i: usize, j: usize, v: T| {
            if i > 0 && j > 0 {
                a.add(i - 1, j - 1, v);
            }
        };
        for k in 0..n {
            let s = (self.model.d2_ff(f[k]) + self.model.zeta_rate_stiffness(fp[k], cp[k]) / tau) / h;
            add(k, k, s);
            add(k + 1, k + 1, s);
            add(k, k + 1, -s);
            add(k + 1, k, -s);
        }
        let d2 = second_differences(&self.grid, w);
        let shift = lit::<T>(self.settings.tikhonov);
        let h3 = h * h * h;
        for i in 1..n {
            let s = (self.model.hyper_1d(d2[i]).2 + shift) / h3;
            let st = [T::one(), -lit::<T>(2.0), T::one()];
            for (a_, ia) in (i - 1..=i + 1).enumerate() {
                for (b_, ib) in (i - 1..=i + 1).enumerate() {
                    add(ia, ib, s * st[a_] * st[b_]);
                }
            }
        }
        a
    }

    /// Minimizes the incremental energy at `t_prev + tau` with the concentration frozen.
    pub fn mechanical_step(&self, prev: &NonlinearState<T>, tau: T) -> Result<(Field<T>, StepReport<T>)> {
        let t_new = prev.t + tau;
        let fp = deformation_gradient(&self.grid, &prev.w.values);
        let cp = &prev.c.values;
        let loads = self.load_vector(t_new);
        let mut w = prev.w.values.clone();
        let s = &self.settings;
        let armijo = lit::<T>(1e-4);
        for it in 0..=s.max_newton {
            let g = self.incremental_gradient(&w, &fp, cp, &loads, tau);
            let res = max_abs(&g);
            if res <= self.tol() {
                return Ok((
                    Field::new(Location::Nodes, w),
                    StepReport {
                        iterations: it,
                        residual: res,
                    },
                ));
            }
            if it == s.max_newton {
                break;
            }
            let hess = self.incremental_hessian(&w, &fp, cp, tau);
            let rhs: Vec<T> = g[1..].iter().map(|v| -*v).collect();
            let dz = hess.solve(&rhs)?;
            let slope: T = dz.iter().zip(&g[1..]).map(|(a, b)| *a * *b).sum();
            let e0 = self.incremental_energy(&w, &fp, cp, &loads, tau);
            let roundoff = lit::<T>(1e-13) * (T::one() + e0.abs());
            let mut alpha = T::one();
            let mut accepted = None;
            let mut orientation_failed = true;
            for _ in 0..=s.max_halvings {
                let mut trial = w.clone();
                for (j, d) in dz.iter().enumerate() {
                    trial[j + 1] = trial[j + 1] + alpha * *d;
                }
                let ft = deformation_gradient(&self.grid, &trial);
                if min_of(&ft) > T::zero() {
                    orientation_failed = false;
                    let e1 = self.incremental_energy(&trial, &fp, cp, &loads, tau);
                    if e1 <= e0 + armijo * alpha * slope || (slope.abs() <= roundoff && e1 <= e0 + roundoff) {
                        accepted = Some(trial);
                        break;
                    }
                }
                alpha = alpha * lit(0.5);
            }
            match accepted {
                Some(trial) => w = trial,
                None if orientation_failed => {
                    let ft = deformation_gradient(&self.grid, &w);
                    return Err(Error::OrientationLoss {
                        min_f: min_of(&ft).to_f64().unwrap_or(f64::NAN),
                    });
                }
                None => {
                    return Err(Error::NoConvergence {
                        stage: "mechanical step line search",
                        iterations: it,
                        residual: res.to_f64().unwrap_or(f64::NAN),
                    })
                }
            }
        }
        let g = self.incremental_gradient(&w, &fp, cp, &loads, tau);
        Err(Error::NoConvergence {
            stage: "mechanical step",
            iterations: s.max_newton,
            residual: max_abs(&g).to_f64().unwrap_or(f64::NAN),
        })
    }

    /// Cell chemical potentials, cell mobilities and the nodal flux `M dmu/dx`.
    ///
    /// Boundary entries carry the Robin flux.
    pub fn fluxes(&self, f: &[T], c: &[T]) -> (Vec<T>, Vec<T>, Vec<T>) {
        let n = self.grid.n_cells();
        let h = self.grid.h();
        let mu: Vec<T> = f.iter().zip(c).map(|(f, c)| self.model.mu_unchecked(*f, *c)).collect();
        let mob: Vec<T> = f
            .iter()
            .zip(c)
            .map(|(f, c)| self.model.mobility_unchecked(*f, *c))
            .collect();
        let mut j = vec![T::zero(); n + 1];
        for i in 1..n {
            j[i] = lit::<T>(0.5) * (mob[i - 1] + mob[i]) * (mu[i] - mu[i - 1]) / h;
        }
        j[0] = -self.kappa * (self.mu_ext - mu[0]);
        j[n] = self.kappa * (self.mu_ext - mu[n - 1]);
        (mu, mob, j)
    }

    fn diffusion_residual(&self, f: &[T], c: &[T], c_old: &[T], tau: T) -> Vec<T> {
        let h = self.grid.h();
        let (_, _, j) = self.fluxes(f, c);
        (0..c.len())
            .map(|k| h * (c[k] - c_old[k]) / tau - (j[k + 1] - j[k]))
            .collect()
    }

    fn diffusion_jacobian(&self, f: &[T], c: &[T], tau: T) -> BandMatrix<T> {
        let n = self.grid.n_cells();
        let h = self.grid.h();
        let half = lit::<T>(0.5);
        let (mu, mob, _) = self.fluxes(f, c);
        let dmu: Vec<T> = c.iter().map(|c| self.model.d2_cc(*c)).collect();
        let dmob: Vec<T> = f.iter().zip(c).map(|(f, c)| self.model.mobility_dc(*f, *c)).collect();
        let mut a = BandMatrix::zeros(n, 1, 1);
        for k in 0..n {
            a.add(k, k, h / tau);
        }
        for i in 1..n {
            let mface = half * (mob[i - 1] + mob[i]);
            let dm = (mu[i] - mu[i - 1]) / h;
            let dj_left = half * dmob[i - 1] * dm - mface * dmu[i - 1] / h;
            let dj_right = half * dmob[i] * dm + mface * dmu[i] / h;
            // row i-1 gets -J_i, row i gets +J_i
            a.add(i - 1, i - 1, -dj_left);
            a.add(i - 1, i, -dj_right);
            a.add(i, i - 1, dj_left);
            a.add(i, i, dj_right);
        }
        // J_0 = kappa (mu_0 - mu_ext) enters row 0 with +; J_n = kappa (mu_ext - mu_{n-1}) with -
        a.add(0, 0, self.kappa * dmu[0]);
        a.add(n - 1, n - 1, self.kappa * dmu[n - 1]);
        a
    }

    /// Implicit Euler for the concentration with the deformation frozen at `f_new`.
    pub fn diffusion_step(&self, f_new: &[T], c_old: &[T], tau: T) -> Result<(Vec<T>, StepReport<T>)> {
        let s = &self.settings;
        let mut c = c_old.to_vec();
        let mut r = self.diffusion_residual(f_new, &c, c_old, tau);
        let mut res = max_abs(&r);
        for it in 0..=s.max_newton {
            if res <= self.tol() {
                return Ok((
                    c,
                    StepReport {
                        iterations: it,
                        residual: res,
                    },
                ));
            }
            if it == s.max_newton {
                break;
            }
            let jac = self.diffusion_jacobian(f_new, &c, tau);
            let rhs: Vec<T> = r.iter().map(|v| -*v).collect();
            let dc = jac.solve(&rhs)?;
            let mut alpha = T::one();
            let mut accepted = false;
            let mut positive_seen = false;
            for _ in 0..=s.max_halvings {
                let trial: Vec<T> = c.iter().zip(&dc).map(|(a, d)| *a + alpha * *d).collect();
                if min_of(&trial) > T::zero() {
                    positive_seen = true;
                    let rt = self.diffusion_residual(f_new, &trial, c_old, tau);
                    let rest = max_abs(&rt);
                    if rest < res || rest <= self.tol() {
                        c = trial;
                        r = rt;
                        res = rest;
                        accepted = true;
                        break;
                    }
                }
                alpha = alpha * lit(0.5);
            }
            if !accepted {
                if !positive_seen {
                    return Err(Error::PositivityLoss {
                        min_c: min_of(&c).to_f64().unwrap_or(f64::NAN),
                    });
                }
                return Err(Error::NoConvergence {
                    stage: "diffusion step line search",
                    iterations: it,
                    residual: res.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        Err(Error::NoConvergence {
            stage: "diffusion step",
            iterations: s.max_newton,
            residual: res.to_f64().unwrap_or(f64::NAN),
        })
    }

    /// One staggered step.
    pub fn step(&self, prev: &NonlinearState<T>, tau: T) -> Result<(NonlinearState<T>, StepReport<T>, StepReport<T>)> {
        let (w, mech) = self.mechanical_step(prev, tau)?;
        let f = deformation_gradient(&self.grid, &w.values);
        let (c, diff) = self.diffusion_step(&f, &prev.c.values, tau)?;
        Ok((
            NonlinearState {
                t: prev.t + tau,
                w,
                c: Field::new(Location::Cells, c),
            },
            mech,
            diff,
        ))
    }

    fn check_initial(&self, s: &NonlinearState<T>) -> Result<()> {
        let g = &self.grid;
        if s.w.loc != Location::Nodes
            || s.w.len() != g.n_nodes()
            || s.c.loc != Location::Cells
            || s.c.len() != g.n_cells()
        {
            return Err(Error::Domain("initial state does not match the grid".into()));
        }
        if s.w.values[0] != T::zero() {
            return Err(Error::Domain("initial displacement must vanish at x = 0".into()));
        }
        let f = deformation_gradient(g, &s.w.values);
        if !(min_of(&f) > T::zero()) {
            return Err(Error::OrientationLoss {
                min_f: min_of(&f).to_f64().unwrap_or(f64::NAN),
            });
        }
        if !(s.c.min() > T::zero()) {
            return Err(Error::PositivityLoss {
                min_c: s.c.min().to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn record(
        &self,
        led: &mut EnergyLedger<T>,
        prev: Option<&NonlinearState<T>>,
        s: &NonlinearState<T>,
        eps: T,
        tau: T,
        mech: T,
        diff: T,
    ) -> Result<()> {
        let g = &self.grid;
        let h = g.h();
        let e2 = eps * eps;
        let f = deformation_gradient(g, &s.w.values);
        let (mu, _, j) = self.fluxes(&f, &s.c.values);
        led.times.push(s.t);
        led.energy.push(self.energy(&s.w.values, &s.c.values, s.t) / e2);
        match prev {
            Some(p) => {
                let fp = deformation_gradient(g, &p.w.values);
                let mut rd = T::zero();
                let mut rate = T::zero();
                for k in 0..f.len() {
                    let fdot = (f[k] - fp[k]) / tau;
                    rd = rd + h * self.model.zeta(fp[k], fdot, p.c.values[k]).0;
                    rate = rate + h * fdot * fdot;
                }
                led.mech_dissipation.push(rd / e2);
                led.rate_sq.push(rate / e2);
                let mut dd = T::zero();
                for i in 1..g.n_cells() {
                    let grad = (mu[i] - mu[i - 1]) / h;
                    dd = dd + h * j[i] * grad;
                }
                led.diff_dissipation.push(dd / e2);
                let n = g.n_cells();
                let bw =
                    self.kappa * (self.mu_ext - mu[0]) * mu[0] + self.kappa * (self.mu_ext - mu[n - 1]) * mu[n - 1];
                led.boundary_work.push(bw / e2);
                let l1 = self.load_vector(s.t);
                let l0 = self.load_vector(p.t);
                let pw: T = l1
                    .iter()
                    .zip(&l0)
                    .zip(&p.w.values)
                    .map(|((a, b), w)| (*a - *b) / tau * *w)
                    .sum();
                led.loading_power.push(pw / e2);
            }
            None => {
                for v in [
                    &mut led.mech_dissipation,
                    &mut led.rate_sq,
                    &mut led.diff_dissipation,
                    &mut led.boundary_work,
                    &mut led.loading_power,
                ] {
                    v.push(T::zero());
                }
            }
        }
        let u = s.w.map(|v| v / eps);
        let d2u = Field::new(Location::Nodes, second_differences(g, &u.values));
        led.linf_c.push(s.c.max_abs());
        led.llogl.push(g.llogl_deviation(&s.c, self.model.params().c_eq)?);
        led.h1_u.push(g.h1_norm(&u)?);
        let p = self.model.params().p.to_f64().unwrap_or(3.0);
        led.lp_d2u.push(g.lq_norm(&d2u, p)?);
        led.mass.push(g.integrate(&s.c)?);
        led.min_f.push(min_of(&f));
        led.min_c.push(s.c.min());
        led.mech_residual.push(mech);
        led.diff_residual.push(diff);
        Ok(())
    }

    /// Runs `ceil(t_final / tau)` steps from `initial`; ledger entries are scaled by `1/eps^2`.
    pub fn run(&self, initial: NonlinearState<T>, tau: T, t_final: T, eps: T) -> Result<NonlinearRun<T>> {
        if !(tau > T::zero() && t_final > T::zero() && eps > T::zero()) {
            return Err(Error::Domain("tau, t_final and eps must be > 0".into()));
        }
        self.check_initial(&initial)?;
        let steps = (t_final / tau - lit(1e-9)).ceil().to_usize().unwrap_or(0).max(1);
        let mut led = EnergyLedger {
            eps,
            ..EnergyLedger::default()
        };
        self.record(&mut led, None, &initial, eps, tau, T::zero(), T::zero())?;
        let mut states = Vec::with_capacity(steps + 1);
        states.push(initial);
        for k in 1..=steps {
            let prev = states.last().expect("non-empty");
            let t_new = lit::<T>(k as f64) * tau;
            let dt = t_new - prev.t;
            let (mut next, mech, diff) = self.step(prev, dt).map_err(|e| Error::StepFailed {
                time: t_new.to_f64().unwrap_or(f64::NAN),
                source: Box::new(e),
            })?;
            next.t = t_new;
            self.record(&mut led, Some(prev), &next, eps, dt, mech.residual, diff.residual)?;
            states.push(next);
        }
        Ok(NonlinearRun {
            grid: self.grid,
            eps,
            states,
            ledger: led,
        })
    }

    /// Linear-scale fields `u = w/eps`, `rho = (c - c_eq)/eps`, `mu/eps` and fluxes.
    pub fn rescale(&self, s: &NonlinearState<T>, eps: T) -> Rescaled<T> {
        let g = &self.grid;
        let n = g.n_cells();
        let h = g.h();
        let ceq = self.model.params().c_eq;
        let f = deformation_gradient(g, &s.w.values);
        let c = &s.c.values;
        let (mu, mob, j) = self.fluxes(&f, c);
        let d2 = second_differences(g, &s.w.values);
        let mut chain = vec![T::zero(); n + 1];
        for i in 1..n {
            let cf = lit::<T>(0.5) * (c[i - 1] + c[i]);
            let grad = self.model.d2_fc() * d2[i] + self.model.d2_cc(cf) * (c[i] - c[i - 1]) / h;
            chain[i] = lit::<T>(0.5) * (mob[i - 1] + mob[i]) * grad / eps;
        }
        chain[0] = j[0] / eps;
        chain[n] = j[n] / eps;
        Rescaled {
            u: s.w.map(|v| v / eps),
            rho: s.c.map(|v| (v - ceq) / eps),
            mu_star: Field::new(Location::Cells, mu.iter().map(|v| *v / eps).collect()),
            flux: Field::new(Location::Nodes, chain),
            flux_direct: Field::new(Location::Nodes, j.iter().map(|v| *v / eps).collect()),
        }
    }
}

/// `max_t [E(t) + sum tau (diff + 2 mech - boundary) - E(0) + sum tau <l_dot, u>]`, at least 0.
pub fn check_dissipation_inequality<T: Scalar>(led: &EnergyLedger<T>) -> T {
    let mut cum = T::zero();
    let mut worst = T::zero();
    for k in 1..led.len() {
        let tau = led.times[k] - led.times[k - 1];
        cum = cum
            + tau
                * (led.diff_dissipation[k] + lit::<T>(2.0) * led.mech_dissipation[k] - led.boundary_work[k]
                    + led.loading_power[k]);
        worst = worst.max(led.energy[k] + cum - led.energy[0]);
    }
    worst
}

/// State `(id + eps u0, c_eq + eps rho0)` sampled on the grid.
pub fn initial_state<T: Scalar>(
    grid: &Grid1D<T>,
    c_eq: T,
    eps: T,
    u0: impl Fn(T) -> T,
    rho0: impl Fn(T) -> T,
) -> NonlinearState<T> {
    let mut w = grid.sample(Location::Nodes, |x| eps * u0(x));
    w.values[0] = T::zero();
    NonlinearState {
        t: T::zero(),
        w,
        c: grid.sample(Location::Cells, |x| c_eq + eps * rho0(x)),
    }
}
