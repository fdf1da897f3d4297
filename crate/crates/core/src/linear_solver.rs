//! Monolithic implicit Euler for the linear Biot-type limit system in 1-D.
//!
//! Unknowns are nodal displacements `u_1..u_n` (`u_0 = 0`) and cell
//! concentrations `rho_0..rho_{n-1}`; the chemical flux vanishes at both ends.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::constitutive::LinearCoefficients;
use crate::discretization::{BandMatrix, Field, Grid1D, Location};
use crate::error::{Error, Result};
use crate::loading::Forcing;
use crate::scalar::{lit, Scalar};

/// Unknown ordering of the banded system.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ordering {
    /// `rho_0, u_1, rho_1, u_2, ...`
    Interleaved,
    /// The interleaved ordering reversed.
    Reversed,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearState<T> {
    pub t: T,
    pub u: Field<T>,
    pub rho: Field<T>,
}

/// Per-step energy bookkeeping; index 0 is the initial state.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinearLedger<T> {
    pub times: Vec<T>,
    pub energy: Vec<T>,
    pub mech_dissipation: Vec<T>,
    pub diff_dissipation: Vec<T>,
    pub loading_power: Vec<T>,
}

#[derive(Clone, Debug)]
pub struct LinearRun<T> {
    pub grid: Grid1D<T>,
    pub states: Vec<LinearState<T>>,
    pub ledger: LinearLedger<T>,
}

/// Equilibrium with prescribed total concentration.
#[derive(Clone, Debug, PartialEq)]
pub struct StaticSolution<T> {
    pub v: Field<T>,
    pub xi: Field<T>,
    /// Constant chemical potential.
    pub nu: T,
    /// Largest residual of the discrete equilibrium equations.
    pub residual: T,
}

pub struct LinearProblem<'a, T: Scalar> {
    pub coeffs: LinearCoefficients<T>,
    pub grid: Grid1D<T>,
    pub forcing: &'a dyn Forcing<T>,
}

#[derive(Clone, Copy)]
enum Piece {
    Cell(usize),
    Face(usize),
}

fn strains<T: Scalar>(grid: &Grid1D<T>, u: &[T]) -> Vec<T> {
    let h = grid.h();
    u.windows(2).map(|p| (p[1] - p[0]) / h).collect()
}

impl<'a, T: Scalar> LinearProblem<'a, T> {
    fn pos(&self, ordering: Ordering, p: usize) -> usize {
        match ordering {
            Ordering::Interleaved => p,
            Ordering::Reversed => 2 * self.grid.n_cells() - 1 - p,
        }
    }

    fn pos_u(&self, ordering: Ordering, i: usize) -> usize {
        self.pos(ordering, 2 * i - 1)
    }

    fn pos_rho(&self, ordering: Ordering, k: usize) -> usize {
        self.pos(ordering, 2 * k)
    }

    /// Nodal load coefficients of `<l(t), u>`.
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

    /// Cell chemical potentials `K e(u) + L rho`.
    pub fn mu_star(&self, u: &[T], rho: &[T]) -> Vec<T> {
        strains(&self.grid, u)
            .iter()
            .zip(rho)
            .map(|(e, r)| self.coeffs.k * *e + self.coeffs.l * *r)
            .collect()
    }

    /// Nodal flux `M_eq dmu/dx`, zero at both ends.
    pub fn flux(&self, u: &[T], rho: &[T]) -> Field<T> {
        let n = self.grid.n_cells();
        let mu = self.mu_star(u, rho);
        let mut j = vec![T::zero(); n + 1];
        for i in 1..n {
            j[i] = self.coeffs.m_eq * (mu[i] - mu[i - 1]) / self.grid.h();
        }
        Field::new(Location::Nodes, j)
    }

    /// `sum h (C e^2/2 + K e rho + L rho^2/2)`.
    pub fn quadratic_energy(&self, u: &[T], rho: &[T]) -> T {
        let h = self.grid.h();
        let half = lit::<T>(0.5);
        let k = &self.coeffs;
        strains(&self.grid, u)
            .iter()
            .zip(rho)
            .map(|(e, r)| h * (half * k.c * *e * *e + k.k * *e * *r + half * k.l * *r * *r))
            .sum()
    }

    pub fn energy(&self, u: &[T], rho: &[T], t: T) -> T {
        let l = self.load_vector(t);
        self.quadratic_energy(u, rho) - l.iter().zip(u).map(|(a, b)| *a * *b).sum()
    }

    /// One implicit Euler step with a single banded solve.
    ///
    /// `assembly_seed` shuffles the order in which element contributions are summed.
    pub fn step(
        &self,
        prev: &LinearState<T>,
        tau: T,
        ordering: Ordering,
        assembly_seed: Option<u64>,
    ) -> Result<LinearState<T>> {
        let g = &self.grid;
        let n = g.n_cells();
        let h = g.h();
        let k = &self.coeffs;
        let t = prev.t + tau;
        let e_old = strains(g, &prev.u.values);
        let mut a = BandMatrix::zeros(2 * n, 3, 3);
        let mut b = vec![T::zero(); 2 * n];
        let loads = self.load_vector(t);
        for i in 1..=n {
            b[self.pos_u(ordering, i)] = loads[i];
        }
        let mut pieces: Vec<Piece> = (0..n).map(Piece::Cell).chain((1..n).map(Piece::Face)).collect();
        if let Some(seed) = assembly_seed {
            pieces.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        }
        let stiff = k.c + k.d / tau;
        for piece in pieces {
            match piece {
                Piece::Cell(c) => {
                    // stress s_c = stiff (u_{c+1} - u_c)/h + K rho_c - D e_old/tau, tested with +1 at c+1, -1 at c
                    let known = k.d * e_old[c] / tau;
                    let r = self.pos_rho(ordering, c);
                    for (node, sign) in [(c + 1, T::one()), (c, -T::one())] {
                        if node == 0 {
                            continue;
                        }
                        let row = self.pos_u(ordering, node);
                        a.add(row, self.pos_u(ordering, c + 1), sign * stiff / h);
                        if c >= 1 {
                            a.add(row, self.pos_u(ordering, c), -sign * stiff / h);
                        }
                        a.add(row, r, sign * k.k);
                        b[row] = b[row] + sign * known;
                    }
                    a.add(r, r, h / tau);
                    b[r] = b[r] + h / tau * prev.rho.values[c] + h * self.forcing.mass_source(g.cell_center(c), t);
                }
                Piece::Face(i) => {
                    // J_i = M (mu_i - mu_{i-1})/h enters row rho_i with +, row rho_{i-1} with -
                    let w = k.m_eq / h;
                    for (row_cell, sign) in [(i, T::one()), (i - 1, -T::one())] {
                        let row = self.pos_rho(ordering, row_cell);
                        for (cell, s2) in [(i, T::one()), (i - 1, -T::one())] {
                            let coef = sign * s2 * w;
                            a.add(row, self.pos_rho(ordering, cell), coef * k.l);
                            a.add(row, self.pos_u(ordering, cell + 1), coef * k.k / h);
                            if cell >= 1 {
                                a.add(row, self.pos_u(ordering, cell), -coef * k.k / h);
                            }
                        }
                    }
                }
            }
        }
        let x = a.solve(&b)?;
        let mut u = vec![T::zero(); n + 1];
        for (i, ui) in u.iter_mut().enumerate().skip(1) {
            *ui = x[self.pos_u(ordering, i)];
        }
        let rho = (0..n).map(|c| x[self.pos_rho(ordering, c)]).collect();
        Ok(LinearState {
            t,
            u: Field::new(Location::Nodes, u),
            rho: Field::new(Location::Cells, rho),
        })
    }

    fn record(&self, led: &mut LinearLedger<T>, prev: Option<&LinearState<T>>, s: &LinearState<T>) {
        let h = self.grid.h();
        led.times.push(s.t);
        led.energy.push(self.energy(&s.u.values, &s.rho.values, s.t));
        let Some(p) = prev else {
            led.mech_dissipation.push(T::zero());
            led.diff_dissipation.push(T::zero());
            led.loading_power.push(T::zero());
            return;
        };
        let tau = s.t - p.t;
        let e1 = strains(&self.grid, &s.u.values);
        let e0 = strains(&self.grid, &p.u.values);
        let rd: T = e1
            .iter()
            .zip(&e0)
            .map(|(a, b)| h * lit::<T>(0.5) * self.coeffs.d * ((*a - *b) / tau).powi(2))
            .sum();
        led.mech_dissipation.push(rd);
        let j = self.flux(&s.u.values, &s.rho.values);
        let dd: T = j.values.iter().map(|v| h * *v * *v / self.coeffs.m_eq).sum();
        led.diff_dissipation.push(dd);
        let l1 = self.load_vector(s.t);
        let l0 = self.load_vector(p.t);
        let pw: T = l1
            .iter()
            .zip(&l0)
            .zip(&p.u.values)
            .map(|((a, b), u)| (*a - *b) / tau * *u)
            .sum();
        led.loading_power.push(pw);
    }

    pub fn run(
        &self,
        initial: LinearState<T>,
        tau: T,
        t_final: T,
        ordering: Ordering,
        assembly_seed: Option<u64>,
    ) -> Result<LinearRun<T>> {
        if !(tau > T::zero() && t_final > T::zero()) {
            return Err(Error::Domain("tau and t_final must be > 0".into()));
        }
        let g = &self.grid;
        if initial.u.len() != g.n_nodes() || initial.rho.len() != g.n_cells() || initial.u.values[0] != T::zero() {
            return Err(Error::Domain("initial state must match the grid with u(0) = 0".into()));
        }
        let steps = (t_final / tau - lit(1e-9)).ceil().to_usize().unwrap_or(0).max(1);
        let mut led = LinearLedger::default();
        self.record(&mut led, None, &initial);
        let mut states = Vec::with_capacity(steps + 1);
        states.push(initial);
        for k in 1..=steps {
            let prev = states.last().expect("non-empty");
            let t_new = lit::<T>(k as f64) * tau;
            let seed = assembly_seed.map(|s| s.wrapping_add(k as u64));
            let mut next = self
                .step(prev, t_new - prev.t, ordering, seed)
                .map_err(|e| Error::StepFailed {
                    time: t_new.to_f64().unwrap_or(f64::NAN),
                    source: Box::new(e),
                })?;
            next.t = t_new;
            self.record(&mut led, Some(prev), &next);
            states.push(next);
        }
        Ok(LinearRun {
            grid: self.grid,
            states,
            ledger: led,
        })
    }

    /// Equilibrium with constant chemical potential and `sum h xi = total_mass`.
    pub fn static_solve(&self, t: T, total_mass: T) -> Result<StaticSolution<T>> {
        let g = &self.grid;
        let n = g.n_cells();
        let h = g.h();
        let k = &self.coeffs;
        let c_eff = k.c - k.k * k.k / k.l;
        let mut a = BandMatrix::zeros(n, 1, 1);
        for c in 0..n {
            let s = c_eff / h;
            a.add(c, c, s);
            if c >= 1 {
                a.add(c - 1, c - 1, s);
                a.add(c - 1, c, -s);
                a.add(c, c - 1, -s);
            }
        }
        let loads = self.load_vector(t);
        let va = a.solve(&loads[1..])?;
        let mut eb = vec![T::zero(); n];
        eb[n - 1] = -k.k / k.l;
        let vb = a.solve(&eb)?;
        let denom = T::one() - k.k * vb[n - 1];
        if denom.abs() <= T::epsilon() {
            return Err(Error::SingularSystem { pivot: n });
        }
        let nu = (k.l * total_mass + k.k * va[n - 1]) / denom;
        let mut v = vec![T::zero(); n + 1];
        for i in 1..=n {
            v[i] = va[i - 1] + nu * vb[i - 1];
        }
        let e = strains(g, &v);
        let xi: Vec<T> = e.iter().map(|e| (nu - k.k * *e) / k.l).collect();
        let sigma: Vec<T> = e.iter().zip(&xi).map(|(e, x)| k.c * *e + k.k * *x).collect();
        let mut residual = T::zero();
        for i in 1..=n {
            let right = if i < n { sigma[i] } else { T::zero() };
            residual = residual.max((sigma[i - 1] - right - loads[i]).abs());
        }
        let mass: T = xi.iter().map(|x| h * *x).sum();
        residual = residual.max((mass - total_mass).abs());
        for (e, x) in e.iter().zip(&xi) {
            residual = residual.max((k.k * *e + k.l * *x - nu).abs());
        }
        Ok(StaticSolution {
            v: Field::new(Location::Nodes, v),
            xi: Field::new(Location::Cells, xi),
            nu,
            residual,
        })
    }
}

/// `max_t |E(t) + sum tau (2 R + diff) - E(0) + sum tau <l_dot, u>|`.
pub fn energy_balance_residual<T: Scalar>(led: &LinearLedger<T>) -> T {
    let mut cum = T::zero();
    let mut worst = T::zero();
    for k in 1..led.times.len() {
        let tau = led.times[k] - led.times[k - 1];
        cum = cum + tau * (lit::<T>(2.0) * led.mech_dissipation[k] + led.diff_dissipation[k] + led.loading_power[k]);
        worst = worst.max((led.energy[k] + cum - led.energy[0]).abs());
    }
    worst
}

/// Signed counterpart of [`energy_balance_residual`]: `max_t [E(t) + sum tau (...) - E(0)]`, at least 0.
///
/// Implicit Euler only adds numerical dissipation, so this stays at round-off level.
pub fn dissipation_excess<T: Scalar>(led: &LinearLedger<T>) -> T {
    let mut cum = T::zero();
    let mut worst = T::zero();
    for k in 1..led.times.len() {
        let tau = led.times[k] - led.times[k - 1];
        cum = cum + tau * (lit::<T>(2.0) * led.mech_dissipation[k] + led.diff_dissipation[k] + led.loading_power[k]);
        worst = worst.max(led.energy[k] + cum - led.energy[0]);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::{MaterialModel, MaterialParams};
    use crate::loading::{Amplitude, LoadingSpec, Profile};

    fn coeffs() -> LinearCoefficients<f64> {
        MaterialModel::new(MaterialParams::unit_biot())
            .unwrap()
            .linearize()
            .coefficients_1d()
            .unwrap()
    }

    #[test]
    fn static_uniform_concentration() {
        let spec = LoadingSpec::none();
        let f = spec.scaled(1.0);
        let pb = LinearProblem {
            coeffs: coeffs(),
            grid: Grid1D::new(16).unwrap(),
            forcing: &f,
        };
        let s = pb.static_solve(0.0, 0.3).unwrap();
        assert!(s.residual < 1e-12);
        for x in &s.xi.values {
            assert!((x - 0.3).abs() < 1e-12);
        }
        let e = strains(&pb.grid, &s.v.values);
        for e in e {
            assert!((e - 0.3 / 2.6).abs() < 1e-12);
        }
    }

    #[test]
    fn orderings_agree() {
        let spec = LoadingSpec {
            body_force: Profile::Sine {
                amplitude: 1.0,
                modes: 1,
            },
            traction: 0.5,
            force_amplitude: Amplitude::Constant,
            traction_amplitude: Amplitude::Constant,
        };
        let f = spec.scaled(1.0);
        let pb = LinearProblem {
            coeffs: coeffs(),
            grid: Grid1D::new(32).unwrap(),
            forcing: &f,
        };
        let s0 = LinearState {
            t: 0.0,
            u: pb.grid.zeros(Location::Nodes),
            rho: pb.grid.sample(Location::Cells, |x| (std::f64::consts::PI * x).cos()),
        };
        let a = pb.step(&s0, 1e-2, Ordering::Interleaved, None).unwrap();
        let b = pb.step(&s0, 1e-2, Ordering::Reversed, Some(9)).unwrap();
        assert!(a.u.sub(&b.u).max_abs() < 1e-12);
        assert!(a.rho.sub(&b.rho).max_abs() < 1e-12);
        let m0 = pb.grid.integrate(&s0.rho).unwrap();
        let m1 = pb.grid.integrate(&a.rho).unwrap();
        assert!((m1 - m0).abs() < 1e-13);
    }

    #[test]
    fn zero_stiffness_is_singular() {
        let spec = LoadingSpec::none();
        let f = spec.scaled(1.0);
        let mut k = coeffs();
        k.c = 0.0;
        k.d = 0.0;
        k.k = 0.0;
        let pb = LinearProblem {
            coeffs: k,
            grid: Grid1D::new(8).unwrap(),
            forcing: &f,
        };
        let s0 = LinearState {
            t: 0.0,
            u: pb.grid.zeros(Location::Nodes),
            rho: pb.grid.zeros(Location::Cells),
        };
        assert!(matches!(
            pb.step(&s0, 0.1, Ordering::Interleaved, None),
            Err(Error::SingularSystem { .. })
        ));
    }
}
