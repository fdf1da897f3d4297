//! Free energy, dissipation, hyperstress and mobility of the finite-strain model,
//! plus their linearization at the stress-free equilibrium.

pub mod inequalities;
pub mod tensor;

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};
pub use tensor::{sym_basis, symmetric_eigenvalues, Mat2, Tensor4};

/// Reference mobility `M0`: a scalar multiple of the identity or a full 2x2 tensor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MobilityScale<T> {
    Scalar(T),
    Tensor([[T; 2]; 2]),
}

impl<T: Scalar> MobilityScale<T> {
    /// Value used by the one-dimensional model.
    pub fn scalar(&self) -> T {
        match self {
            MobilityScale::Scalar(s) => *s,
            MobilityScale::Tensor(m) => m[0][0],
        }
    }

    pub fn matrix(&self) -> Mat2<T> {
        match self {
            MobilityScale::Scalar(s) => Mat2::identity().scale(*s),
            MobilityScale::Tensor(m) => Mat2(*m),
        }
    }
}

/// Material parameters of the Biot-type free energy
/// `kappa_e dist^2(F, SO(d)) + delta (J^-q + q J - q - 1) + M_B/2 (c - c_eq - beta (J - 1))^2
///  + k (c log(c/c_eq) - c + c_eq)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialParams<T> {
    #[serde(rename = "M_B")]
    pub m_b: T,
    pub beta: T,
    pub k: T,
    pub c_eq: T,
    pub kappa_e: T,
    pub delta: T,
    pub q_det: T,
    pub nu_h: T,
    pub p: T,
    #[serde(rename = "D_tilde")]
    pub d_tilde: T,
    #[serde(rename = "M0")]
    pub m0: MobilityScale<T>,
    pub m: T,
    pub r: T,
    pub alpha: T,
    pub gamma1: T,
    pub gamma2: T,
    pub eta: T,
    pub dim: usize,
}

/// Growth regime of `d2_cc Phi` with the mobility window that applies to it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GrowthCase {
    I,
    IIa,
    IIb,
}

impl<T: Scalar> MaterialParams<T> {
    /// Unit Biot parameters in one space dimension.
    pub fn unit_biot() -> Self {
        MaterialParams {
            m_b: T::one(),
            beta: T::one(),
            k: T::one(),
            c_eq: T::one(),
            kappa_e: lit(0.5),
            delta: lit(0.1),
            q_det: lit(2.0),
            nu_h: lit(0.01),
            p: lit(3.0),
            d_tilde: lit(0.25),
            m0: MobilityScale::Scalar(T::one()),
            m: T::one(),
            r: T::zero(),
            alpha: T::zero(),
            gamma1: T::one(),
            gamma2: T::one(),
            eta: lit(1e-3),
            dim: 1,
        }
    }

    /// Unit Biot parameters in two dimensions, with the volumetric exponent raised
    /// to the coercivity threshold `p d/(p - d) = 6`.
    pub fn unit_biot_2d() -> Self {
        let mut p = Self::unit_biot();
        p.dim = 2;
        p.q_det = lit(6.0);
        p
    }

    pub fn with_dim(mut self, dim: usize) -> Self {
        self.dim = dim;
        self
    }

    /// Growth case selected by the declared constants, if its windows hold.
    pub fn growth_case(&self) -> Option<GrowthCase> {
        let zero = T::zero();
        let (m, r, a, eta) = (self.m, self.r, self.alpha, self.eta);
        if self.gamma1 == zero && self.gamma2 == zero {
            let ok = m >= T::one() && m <= lit::<T>(2.0) - eta && m + lit::<T>(2.0) * a >= zero;
            return ok.then_some(GrowthCase::I);
        }
        if !(self.gamma1 > zero && self.gamma2 >= self.gamma1) {
            return None;
        }
        let two_a = lit::<T>(2.0) * a;
        let iia = m > zero && m <= lit::<T>(3.0) + r - eta && m + two_a >= zero && m + two_a < m + T::one() + r;
        if iia {
            return Some(GrowthCase::IIa);
        }
        let iib = m > zero
            && m <= lit::<T>(2.0) - eta
            && m + two_a >= zero
            && m + two_a < m + lit::<T>(2.0) + lit::<T>(2.0) * r;
        iib.then_some(GrowthCase::IIb)
    }

    /// Upper bound on `m + alpha` from the coupling growth condition of the active case.
    pub fn alpha_upper_bound(&self) -> Option<T> {
        let case = self.growth_case()?;
        let d: T = lit(self.dim as f64);
        let (m, r, p) = (self.m, self.r, self.p);
        let two = lit::<T>(2.0);
        let s = match case {
            GrowthCase::I => (m * d + two) / (m * d + T::one()),
            _ => {
                let s1 = (m * d + two * (r + two)) / (m * d + r + two);
                let s2 = (d * (m + r + T::one()) + two * (r + two)) / (d * (m + r + T::one()) + r + two);
                s1.min(s2)
            }
        };
        let base = (p - s) / (p * s);
        Some(match case {
            GrowthCase::I => base,
            _ => (two + r) * base,
        })
    }

    /// Whether `0 <= m + alpha <= alpha_upper_bound()` holds.
    pub fn alpha_window_satisfied(&self) -> bool {
        match self.alpha_upper_bound() {
            Some(ub) => {
                let s = self.m + self.alpha;
                s >= T::zero() && s <= ub
            }
            None => false,
        }
    }

    /// Checks every structural and exponent condition; returns all violations.
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        let zero = T::zero();
        let two = lit::<T>(2.0);
        let f = |x: T| x.to_f64().unwrap_or(f64::NAN);
        let positive = [
            ("k", self.k),
            ("c_eq", self.c_eq),
            ("kappa_e", self.kappa_e),
            ("delta", self.delta),
            ("nu_h", self.nu_h),
            ("D_tilde", self.d_tilde),
            ("eta", self.eta),
        ];
        for (name, v) in positive {
            if !(v > zero) || !v.is_finite() {
                errs.push(format!("{name} must be finite and > 0 (got {})", f(v)));
            }
        }
        if !(self.m_b >= zero) {
            errs.push(format!("M_B must be >= 0 (got {})", f(self.m_b)));
        }
        if !self.beta.is_finite() {
            errs.push("beta must be finite".into());
        }
        if self.dim != 1 && self.dim != 2 {
            errs.push(format!("dim must be 1 or 2 (got {})", self.dim));
        }
        let (lo, _) = self.m0.matrix().sym_eigenvalues();
        let m0_ok = match &self.m0 {
            MobilityScale::Scalar(s) => *s > zero,
            MobilityScale::Tensor(m) => lo > zero && m[0][1] == m[1][0],
        };
        if !m0_ok {
            errs.push("mobility tensor bounds require M0 symmetric positive definite".into());
        }
        let d: T = lit(self.dim.max(1) as f64);
        if !(self.p >= lit(3.0) && self.p > d) {
            errs.push(format!(
                "hyperstress growth requires p >= 3 and p > d (p = {})",
                f(self.p)
            ));
        } else {
            let qmin = self.p * d / (self.p - d);
            if !(self.q_det >= qmin) {
                errs.push(format!(
                    "free-energy coercivity requires q_det >= p d/(p - d) = {} (q_det = {})",
                    f(qmin),
                    f(self.q_det)
                ));
            }
        }
        if !(self.r > -T::one() && self.r + self.m >= zero) {
            errs.push(format!(
                "free-energy growth requires -1 < r and r + m >= 0 (r = {}, m = {})",
                f(self.r),
                f(self.m)
            ));
        }
        if !(self.alpha >= -T::one()) {
            errs.push(format!(
                "coupling growth requires alpha >= -1 (alpha = {})",
                f(self.alpha)
            ));
        }
        let (m, eta) = (f(self.m), f(self.eta));
        if self.gamma1 == zero && self.gamma2 == zero {
            if !(self.m >= T::one() && self.m <= two - self.eta) {
                errs.push(format!(
                    "free-energy growth Case I requires 1 <= m <= 2 - eta (m = {m}, eta = {eta})"
                ));
            }
            if !(self.m + two * self.alpha >= zero) {
                errs.push("coupling growth Case I requires m + 2 alpha >= 0".into());
            }
        } else if self.gamma1 > zero && self.gamma2 >= self.gamma1 {
            if self.growth_case().is_none() {
                errs.push(format!(
                    "free-energy growth Case II requires 0 < m <= 3 + r - eta with 0 <= m + 2 alpha < m + 1 + r (Case IIa) \
                     or 0 < m <= 2 - eta with 0 <= m + 2 alpha < m + 2 + 2r (Case IIb) (m = {m}, r = {}, alpha = {})",
                    f(self.r),
                    f(self.alpha)
                ));
            }
        } else {
            errs.push(format!(
                "growth constants must satisfy gamma1 = gamma2 = 0 (Case I) or gamma2 >= gamma1 > 0 (Case II) \
                 (gamma1 = {}, gamma2 = {})",
                f(self.gamma1),
                f(self.gamma2)
            ));
        }
        if errs.is_empty() && !self.growth_bracket_holds() {
            errs.push(format!(
                "free-energy growth bracket k/c + gamma1 c^r <= d2_cc Phi <= k/c + gamma2 c^r fails for M_B = {}",
                f(self.m_b)
            ));
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParams(errs))
        }
    }

    /// Samples `d2_cc Phi = M_B + k/c` against the declared bracket on `c in [1e-3, 1e3]`.
    pub fn growth_bracket_holds(&self) -> bool {
        let tol = lit::<T>(1e-12);
        (0..=120).all(|i| {
            let c: T = lit(10f64.powf(-3.0 + 6.0 * i as f64 / 120.0));
            let d2 = self.m_b + self.k / c;
            let lo = self.k / c + self.gamma1 * c.powf(self.r);
            let hi = self.k / c + self.gamma2 * c.powf(self.r);
            d2 >= lo - tol * lo.abs().max(T::one()) && d2 <= hi + tol * hi.abs().max(T::one())
        })
    }
}

/// Weight `D~(C, c)` of the quadratic viscous potential `1/2 C' : D~ C'`.
pub trait ViscosityWeight<T>: Send + Sync {
    /// `cg_trace` is the trace of the right Cauchy-Green tensor.
    fn weight(&self, cg_trace: T, c: T) -> T;
}

/// Constant viscosity weight.
#[derive(Clone, Copy, Debug)]
pub struct ConstantViscosity<T>(pub T);

impl<T: Scalar> ViscosityWeight<T> for ConstantViscosity<T> {
    fn weight(&self, _cg_trace: T, _c: T) -> T {
        self.0
    }
}

/// Linearized tensors at `(I, c_eq)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearizedTensors<T> {
    pub dim: usize,
    /// Elasticity `d2_FF Phi`.
    pub c: Tensor4<T>,
    /// Coupling `d2_Fc Phi`, flattened `d x d`.
    pub k: Vec<T>,
    /// Chemical stiffness `d2_cc Phi`.
    pub l: T,
    /// Viscosity `d2_(F'F') zeta`.
    pub d: Tensor4<T>,
    /// Equilibrium mobility, flattened `d x d`.
    pub m_eq: Vec<T>,
}

/// Scalar coefficients of the one-dimensional linear system.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearCoefficients<T> {
    pub c: T,
    pub k: T,
    pub l: T,
    pub d: T,
    pub m_eq: T,
}

impl<T: Scalar> LinearizedTensors<T> {
    pub fn coefficients_1d(&self) -> Option<LinearCoefficients<T>> {
        (self.dim == 1).then(|| LinearCoefficients {
            c: self.c.get(0, 0),
            k: self.k[0],
            l: self.l,
            d: self.d.get(0, 0),
            m_eq: self.m_eq[0],
        })
    }

    /// Largest entrywise discrepancy against another set of tensors.
    pub fn max_abs_diff(&self, o: &Self) -> T {
        let vec_diff = |a: &[T], b: &[T]| a.iter().zip(b).fold(T::zero(), |m, (x, y)| m.max((*x - *y).abs()));
        self.c
            .max_abs_diff(&o.c)
            .max(self.d.max_abs_diff(&o.d))
            .max(vec_diff(&self.k, &o.k))
            .max(vec_diff(&self.m_eq, &o.m_eq))
            .max((self.l - o.l).abs())
    }
}

/// Worst relative discrepancies found by [`MaterialModel::finite_difference_audit`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FdAudit {
    pub sigma_el: f64,
    pub mu: f64,
    pub hessian: f64,
    pub hyper: f64,
    pub sigma_vi: f64,
    pub sigma_el_2d: f64,
    pub sigma_vi_2d: f64,
    pub points: usize,
}

impl FdAudit {
    pub fn max(&self) -> f64 {
        [
            self.sigma_el,
            self.mu,
            self.hessian,
            self.hyper,
            self.sigma_vi,
            self.sigma_el_2d,
            self.sigma_vi_2d,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Relative error with a unit floor on the scale.
fn rel_err<T: Scalar>(a: T, b: T) -> f64 {
    let scale = a.abs().max(b.abs()).max(T::one());
    ((a - b).abs() / scale).to_f64().unwrap_or(f64::INFINITY)
}

/// Constitutive model: validated parameters plus an optional viscosity weight.
#[derive(Clone)]
pub struct MaterialModel<T> {
    params: MaterialParams<T>,
    viscosity: Arc<dyn ViscosityWeight<T>>,
}

impl<T: Scalar> std::fmt::Debug for MaterialModel<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MaterialModel").field("params", &self.params).finish()
    }
}

impl<T: Scalar> MaterialModel<T> {
    pub fn new(params: MaterialParams<T>) -> Result<Self> {
        params.validate()?;
        let viscosity = Arc::new(ConstantViscosity(params.d_tilde));
        Ok(MaterialModel { params, viscosity })
    }

    /// Replaces the constant viscosity weight.
    pub fn with_viscosity(mut self, weight: Arc<dyn ViscosityWeight<T>>) -> Self {
        self.viscosity = weight;
        self
    }

    pub fn params(&self) -> &MaterialParams<T> {
        &self.params
    }

    fn check_point(&self, f: T, c: T, need_positive_c: bool) -> Result<()> {
        if !(f > T::zero()) {
            return Err(Error::Domain(format!("det F must be > 0 (got {f})")));
        }
        if !(c >= T::zero()) || (need_positive_c && c == T::zero()) {
            return Err(Error::Domain(format!("concentration out of domain (got {c})")));
        }
        Ok(())
    }

    // ---- one-dimensional model -------------------------------------------------

    fn vol(&self, j: T) -> (T, T, T) {
        let p = &self.params;
        let q = p.q_det;
        let jq = j.powf(-q);
        let e = p.delta * (jq + q * j - (q + T::one()));
        let d1 = p.delta * q * (T::one() - jq / j);
        let d2 = p.delta * q * (q + T::one()) * jq / (j * j);
        (e, d1, d2)
    }

    fn entropy(&self, c: T) -> T {
        let p = &self.params;
        let s = if c == T::zero() {
            T::zero()
        } else {
            c * (c / p.c_eq).ln()
        };
        p.k * (s - c + p.c_eq)
    }

    fn coupling_arg(&self, j: T, c: T) -> T {
        let p = &self.params;
        c - p.c_eq - p.beta * (j - T::one())
    }

    /// Free energy `Phi(F, c)`; `c = 0` uses `0 log 0 = 0`.
    pub fn phi_unchecked(&self, f: T, c: T) -> T {
        let p = &self.params;
        let a = self.coupling_arg(f, c);
        p.kappa_e * (f - T::one()).powi(2) + self.vol(f).0 + lit::<T>(0.5) * p.m_b * a * a + self.entropy(c)
    }

    pub fn phi(&self, f: T, c: T) -> Result<T> {
        self.check_point(f, c, false)?;
        Ok(self.phi_unchecked(f, c))
    }

    pub fn sigma_el_unchecked(&self, f: T, c: T) -> T {
        let p = &self.params;
        lit::<T>(2.0) * p.kappa_e * (f - T::one()) + self.vol(f).1 - p.m_b * p.beta * self.coupling_arg(f, c)
    }

    /// Elastic stress `d_F Phi`.
    pub fn sigma_el(&self, f: T, c: T) -> Result<T> {
        self.check_point(f, c, false)?;
        Ok(self.sigma_el_unchecked(f, c))
    }

    pub fn mu_unchecked(&self, f: T, c: T) -> T {
        let p = &self.params;
        p.m_b * self.coupling_arg(f, c) + p.k * (c / p.c_eq).ln()
    }

    /// Chemical potential `d_c Phi`.
    pub fn mu(&self, f: T, c: T) -> Result<T> {
        self.check_point(f, c, true)?;
        Ok(self.mu_unchecked(f, c))
    }

    pub fn d2_ff(&self, f: T) -> T {
        let p = &self.params;
        lit::<T>(2.0) * p.kappa_e + self.vol(f).2 + p.m_b * p.beta * p.beta
    }

    pub fn d2_fc(&self) -> T {
        -self.params.m_b * self.params.beta
    }

    pub fn d2_cc(&self, c: T) -> T {
        self.params.m_b + self.params.k / c
    }

    /// Hessian `[[d2_FF, d2_Fc], [d2_cF, d2_cc]]`.
    pub fn hessian(&self, f: T, c: T) -> Result<[[T; 2]; 2]> {
        self.check_point(f, c, true)?;
        let fc = self.d2_fc();
        Ok([[self.d2_ff(f), fc], [fc, self.d2_cc(c)]])
    }

    /// Hyperstress potential and hyperstress for a (flattened) second gradient.
    pub fn hyper(&self, g: &[T]) -> (T, Vec<T>) {
        let p = &self.params;
        let n2: T = g.iter().map(|x| *x * *x).sum();
        let n = n2.sqrt();
        let e = p.nu_h / p.p * n.powf(p.p);
        let w = if n == T::zero() {
            T::zero()
        } else {
            p.nu_h * n.powf(p.p - lit(2.0))
        };
        (e, g.iter().map(|x| w * *x).collect())
    }

    /// One-dimensional hyperstress `(H(G), h(G), h'(G))`.
    pub fn hyper_1d(&self, g: T) -> (T, T, T) {
        let p = &self.params;
        let a = g.abs();
        let e = p.nu_h / p.p * a.powf(p.p);
        let pw = if a == T::zero() {
            T::zero()
        } else {
            a.powf(p.p - lit(2.0))
        };
        (e, p.nu_h * pw * g, p.nu_h * (p.p - T::one()) * pw)
    }

    fn d_tilde_1d(&self, f: T, c: T) -> T {
        self.viscosity.weight(f * f, c)
    }

    /// Dissipation potential and viscous stress in 1-D, `(zeta, sigma_vi)`.
    pub fn zeta(&self, f: T, fdot: T, c: T) -> (T, T) {
        let w = self.d_tilde_1d(f, c);
        let cdot = lit::<T>(2.0) * f * fdot;
        (lit::<T>(0.5) * w * cdot * cdot, lit::<T>(2.0) * w * f * cdot)
    }

    /// `d2_(F'F') zeta` in 1-D.
    pub fn zeta_rate_stiffness(&self, f: T, c: T) -> T {
        lit::<T>(4.0) * self.d_tilde_1d(f, c) * f * f
    }

    /// Lagrangian mobility `M(F, c)` in 1-D.
    pub fn mobility_unchecked(&self, f: T, c: T) -> T {
        let p = &self.params;
        if c <= T::zero() {
            return T::zero();
        }
        (c / f).powf(p.m) * p.m0.scalar() / f
    }

    pub fn mobility(&self, f: T, c: T) -> Result<T> {
        self.check_point(f, c, false)?;
        Ok(self.mobility_unchecked(f, c))
    }

    /// `d_c M(F, c)` in 1-D.
    pub fn mobility_dc(&self, f: T, c: T) -> T {
        let p = &self.params;
        if c <= T::zero() {
            return T::zero();
        }
        p.m * c.powf(p.m - T::one()) * p.m0.scalar() / f.powf(p.m + T::one())
    }

    // ---- two-dimensional model ---------------------------------------------

    pub fn phi_2d(&self, f: &Mat2<T>, c: T) -> Result<T> {
        let j = f.det();
        self.check_point(j, c, false)?;
        let p = &self.params;
        let dist2 = (*f - f.nearest_rotation()).ddot(&(*f - f.nearest_rotation()));
        let a = self.coupling_arg(j, c);
        Ok(p.kappa_e * dist2 + self.vol(j).0 + lit::<T>(0.5) * p.m_b * a * a + self.entropy(c))
    }

    pub fn sigma_el_2d(&self, f: &Mat2<T>, c: T) -> Result<Mat2<T>> {
        let j = f.det();
        self.check_point(j, c, false)?;
        let p = &self.params;
        let dj = self.vol(j).1 - p.m_b * p.beta * self.coupling_arg(j, c);
        Ok((*f - f.nearest_rotation()).scale(lit::<T>(2.0) * p.kappa_e) + f.cofactor().scale(dj))
    }

    pub fn mu_2d(&self, f: &Mat2<T>, c: T) -> Result<T> {
        let j = f.det();
        self.check_point(j, c, true)?;
        Ok(self.mu_unchecked(j, c))
    }

    /// Dissipation potential and viscous stress `2 D~ F C'` in 2-D.
    pub fn zeta_2d(&self, f: &Mat2<T>, fdot: &Mat2<T>, c: T) -> (T, Mat2<T>) {
        let cg = f.transpose() * *f;
        let w = self.viscosity.weight(cg.trace(), c);
        let cdot = fdot.transpose() * *f + f.transpose() * *fdot;
        let z = lit::<T>(0.5) * w * cdot.ddot(&cdot);
        (z, (*f * cdot).scale(lit::<T>(2.0) * w))
    }

    /// Lagrangian mobility `Cof F^T M(F, c/det F) Cof F / det F` in 2-D.
    pub fn mobility_2d(&self, f: &Mat2<T>, c: T) -> Result<Mat2<T>> {
        let j = f.det();
        self.check_point(j, c, false)?;
        let p = &self.params;
        let eul = p.m0.matrix().scale((c / j).powf(p.m));
        let cof = f.cofactor();
        Ok((cof.transpose() * eul * cof).scale(T::one() / j))
    }

    /// Constants `(C0, C1)` with `C0 c^m |xi|^2 <= xi.M xi` and `|M| <= C1 c^m` on `F_R`.
    pub fn mobility_bounds(&self, radius: T) -> (T, T) {
        let p = &self.params;
        let d: T = lit(p.dim as f64);
        let (lo, hi) = p.m0.matrix().sym_eigenvalues();
        let (lo, hi) = if p.dim == 1 {
            let s = p.m0.scalar();
            (s, s)
        } else {
            (lo, hi)
        };
        let e = T::one() - p.m;
        let a = radius.powf(-e);
        let b = radius.powf(d * e);
        let (jmin, jmax) = (a.min(b), a.max(b));
        let r2 = radius * radius;
        let scale = if p.dim == 1 { T::one() } else { lit::<T>(2.0).sqrt() };
        (lo / r2 * jmin, hi * r2 * jmax * scale)
    }

    // ---- linearization -----------------------------------------------------

    /// Analytic tensors at `(I, c_eq)`.
    pub fn linearize(&self) -> LinearizedTensors<T> {
        let p = &self.params;
        let dim = p.dim;
        let n = dim * dim;
        let lam = p.delta * p.q_det * (p.q_det + T::one()) + p.m_b * p.beta * p.beta;
        let d_eq = self.viscosity.weight(lit(dim as f64), p.c_eq);
        let mut c = Tensor4::zeros(dim);
        let mut dt = Tensor4::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    for l in 0..dim {
                        let kd = |a: usize, b: usize| if a == b { T::one() } else { T::zero() };
                        let psym = lit::<T>(0.5) * (kd(i, k) * kd(j, l) + kd(i, l) * kd(j, k));
                        let a = i * dim + j;
                        let b = k * dim + l;
                        c.set(a, b, lit::<T>(2.0) * p.kappa_e * psym + lam * kd(i, j) * kd(k, l));
                        dt.set(a, b, lit::<T>(4.0) * d_eq * psym);
                    }
                }
            }
        }
        let mut k = vec![T::zero(); n];
        let mut m_eq = vec![T::zero(); n];
        let m0 = p.m0.matrix();
        let ceqm = p.c_eq.powf(p.m);
        for i in 0..dim {
            k[i * dim + i] = -p.m_b * p.beta;
            for j in 0..dim {
                m_eq[i * dim + j] = if dim == 1 {
                    ceqm * p.m0.scalar()
                } else {
                    ceqm * m0.get(i, j)
                };
            }
        }
        LinearizedTensors {
            dim,
            c,
            k,
            l: p.m_b + p.k / p.c_eq,
            d: dt,
            m_eq,
        }
    }

    /// Tensors at `(I, c_eq)` from central differences of the analytic first derivatives.
    pub fn finite_difference_tensors(&self, step: T) -> LinearizedTensors<T> {
        let p = &self.params;
        let dim = p.dim;
        let n = dim * dim;
        let two_h = lit::<T>(2.0) * step;
        let ceq = p.c_eq;
        let mut c = Tensor4::zeros(dim);
        let mut d = Tensor4::zeros(dim);
        let mut k = vec![T::zero(); n];
        let l = (self.mu_unchecked(T::one(), ceq + step) - self.mu_unchecked(T::one(), ceq - step)) / two_h;
        if dim == 1 {
            let one = T::one();
            c.set(
                0,
                0,
                (self.sigma_el_unchecked(one + step, ceq) - self.sigma_el_unchecked(one - step, ceq)) / two_h,
            );
            d.set(
                0,
                0,
                (self.zeta(one, step, ceq).1 - self.zeta(one, -step, ceq).1) / two_h,
            );
            k[0] = (self.sigma_el_unchecked(one, ceq + step) - self.sigma_el_unchecked(one, ceq - step)) / two_h;
        } else {
            let id = Mat2::identity();
            let zero = Mat2::zero();
            for b in 0..n {
                let e = Mat2::unit(b / 2, b % 2).scale(step);
                let sp = self.sigma_el_2d(&(id + e), ceq).expect("near identity");
                let sm = self.sigma_el_2d(&(id - e), ceq).expect("near identity");
                let vp = self.zeta_2d(&id, &(zero + e), ceq).1;
                let vm = self.zeta_2d(&id, &(zero - e), ceq).1;
                for a in 0..n {
                    let (i, j) = (a / 2, a % 2);
                    c.set(a, b, (sp.get(i, j) - sm.get(i, j)) / two_h);
                    d.set(a, b, (vp.get(i, j) - vm.get(i, j)) / two_h);
                }
            }
            let sp = self.sigma_el_2d(&id, ceq + step).expect("near identity");
            let sm = self.sigma_el_2d(&id, ceq - step).expect("near identity");
            for a in 0..n {
                k[a] = (sp.get(a / 2, a % 2) - sm.get(a / 2, a % 2)) / two_h;
            }
        }
        let mut lin = self.linearize();
        lin.c = c;
        lin.d = d;
        lin.k = k;
        lin.l = l;
        lin
    }

    /// `(max |C:W|, max |D:W|)` for an antisymmetric direction, using difference Hessians.
    pub fn verify_symmetry_action(&self, w: &[T]) -> (T, T) {
        let lin = self.finite_difference_tensors(lit(1e-5));
        let amax = |v: Vec<T>| v.into_iter().fold(T::zero(), |m, x| m.max(x.abs()));
        (amax(lin.c.apply(w)), amax(lin.d.apply(w)))
    }

    /// Smallest eigenvalue of the analytic `C` restricted to symmetric matrices.
    pub fn verify_positive_definiteness(&self) -> T {
        min_sym_eigenvalue(&self.linearize().c)
    }

    /// Compares analytic derivatives with central differences at random admissible points.
    pub fn finite_difference_audit(&self, points: usize, seed: u64) -> FdAudit {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = lit::<T>(1e-5);
        let two_h = lit::<T>(2.0) * h;
        let mut a = FdAudit {
            points,
            ..FdAudit::default()
        };
        for _ in 0..points {
            let f: T = lit(rng.gen_range(0.5..2.0));
            let c: T = lit(rng.gen_range(0.2..3.0));
            let fdot: T = lit(rng.gen_range(-1.0..1.0));
            let g: T = lit(rng.gen_range(-2.0..2.0));

            let fd_s = (self.phi_unchecked(f + h, c) - self.phi_unchecked(f - h, c)) / two_h;
            a.sigma_el = a.sigma_el.max(rel_err(self.sigma_el_unchecked(f, c), fd_s));
            let fd_mu = (self.phi_unchecked(f, c + h) - self.phi_unchecked(f, c - h)) / two_h;
            a.mu = a.mu.max(rel_err(self.mu_unchecked(f, c), fd_mu));
            let fd_ff = (self.sigma_el_unchecked(f + h, c) - self.sigma_el_unchecked(f - h, c)) / two_h;
            let fd_fc = (self.sigma_el_unchecked(f, c + h) - self.sigma_el_unchecked(f, c - h)) / two_h;
            let fd_cf = (self.mu_unchecked(f + h, c) - self.mu_unchecked(f - h, c)) / two_h;
            let fd_cc = (self.mu_unchecked(f, c + h) - self.mu_unchecked(f, c - h)) / two_h;
            let hs = [
                rel_err(self.d2_ff(f), fd_ff),
                rel_err(self.d2_fc(), fd_fc),
                rel_err(self.d2_fc(), fd_cf),
                rel_err(self.d2_cc(c), fd_cc),
            ];
            a.hessian = hs.into_iter().fold(a.hessian, f64::max);
            let fd_h = (self.hyper_1d(g + h).0 - self.hyper_1d(g - h).0) / two_h;
            let fd_hh = (self.hyper_1d(g + h).1 - self.hyper_1d(g - h).1) / two_h;
            a.hyper = a
                .hyper
                .max(rel_err(self.hyper_1d(g).1, fd_h))
                .max(rel_err(self.hyper_1d(g).2, fd_hh));
            let fd_v = (self.zeta(f, fdot + h, c).0 - self.zeta(f, fdot - h, c).0) / two_h;
            a.sigma_vi = a.sigma_vi.max(rel_err(self.zeta(f, fdot, c).1, fd_v));

            let fm = Mat2([
                [lit(rng.gen_range(0.8..1.3)), lit(rng.gen_range(-0.3..0.3))],
                [lit(rng.gen_range(-0.3..0.3)), lit(rng.gen_range(0.8..1.3))],
            ]);
            let rate = Mat2([
                [lit(rng.gen_range(-1.0..1.0)), lit(rng.gen_range(-1.0..1.0))],
                [lit(rng.gen_range(-1.0..1.0)), lit(rng.gen_range(-1.0..1.0))],
            ]);
            if fm.det() <= T::zero() {
                continue;
            }
            let s2 = self.sigma_el_2d(&fm, c).expect("admissible point");
            let (_, v2) = self.zeta_2d(&fm, &rate, c);
            for b in 0..4 {
                let e = Mat2::unit(b / 2, b % 2).scale(h);
                let fd = (self.phi_2d(&(fm + e), c).expect("admissible")
                    - self.phi_2d(&(fm - e), c).expect("admissible"))
                    / two_h;
                a.sigma_el_2d = a.sigma_el_2d.max(rel_err(s2.get(b / 2, b % 2), fd));
                let fdz = (self.zeta_2d(&fm, &(rate + e), c).0 - self.zeta_2d(&fm, &(rate - e), c).0) / two_h;
                a.sigma_vi_2d = a.sigma_vi_2d.max(rel_err(v2.get(b / 2, b % 2), fdz));
            }
        }
        a
    }
}

/// Smallest eigenvalue of a fourth-order tensor on the symmetric subspace.
pub fn min_sym_eigenvalue<T: Scalar>(c: &Tensor4<T>) -> T {
    let basis = sym_basis::<T>(c.dim);
    let gram: Vec<Vec<T>> = basis
        .iter()
        .map(|a| basis.iter().map(|b| c.bilinear(a, b)).collect())
        .collect();
    symmetric_eigenvalues(&gram)[0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::{prop_assert, proptest};

    fn unit() -> MaterialModel<f64> {
        MaterialModel::new(MaterialParams::unit_biot()).unwrap()
    }

    #[test]
    fn phi_reference_values() {
        let m = unit();
        assert_relative_eq!(m.phi(2.0, 1.0).unwrap(), 1.125, epsilon = 1e-14);
        let expect = 0.5 + 2.0 * 2f64.ln() - 1.0;
        assert_relative_eq!(m.phi(1.0, 2.0).unwrap(), expect, epsilon = 1e-14);
        assert_eq!(m.phi(1.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn phi_rejects_bad_points() {
        let m = unit();
        assert!(matches!(m.phi(-1.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(m.phi(0.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(m.phi(1.0, -0.1), Err(Error::Domain(_))));
        assert!(m.phi(1.0, 0.0).is_ok());
        assert!(matches!(m.mu(1.0, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn stress_free_and_normalized_at_equilibrium() {
        let m = unit();
        assert_eq!(m.sigma_el(1.0, 1.0).unwrap(), 0.0);
        assert_eq!(m.mu(1.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn sigma_without_volumetric_term_is_linear() {
        let mut p = MaterialParams::unit_biot();
        p.delta = 1e-300;
        let m = MaterialModel::new(p).unwrap();
        for f in [0.7, 1.0, 1.4, 2.5] {
            assert_relative_eq!(m.sigma_el_unchecked(f, 1.0), 2.0 * (f - 1.0), epsilon = 1e-12);
        }
    }

    #[test]
    fn mu_reference_value() {
        let m = unit();
        let e = std::f64::consts::E;
        assert_relative_eq!(m.mu(1.0, e).unwrap(), e, epsilon = 1e-14);
    }

    #[test]
    fn hessian_matches_differences() {
        let m = unit();
        let (f, c) = (1.2, 0.7);
        let h = m.hessian(f, c).unwrap();
        let s = 1e-5;
        let fd_ff = (m.sigma_el_unchecked(f + s, c) - m.sigma_el_unchecked(f - s, c)) / (2.0 * s);
        let fd_fc = (m.sigma_el_unchecked(f, c + s) - m.sigma_el_unchecked(f, c - s)) / (2.0 * s);
        let fd_cc = (m.mu_unchecked(f, c + s) - m.mu_unchecked(f, c - s)) / (2.0 * s);
        assert_relative_eq!(h[0][0], fd_ff, max_relative = 1e-8);
        assert_relative_eq!(h[0][1], fd_fc, max_relative = 1e-8);
        assert_relative_eq!(h[1][1], fd_cc, max_relative = 1e-8);
        assert_eq!(h[0][1], h[1][0]);
        assert_relative_eq!(m.hessian(1.0, 1.0).unwrap()[0][1], -1.0);
    }

    #[test]
    fn hyper_reference_values() {
        let m = unit();
        let (e, h) = m.hyper(&[2.0]);
        assert_relative_eq!(e, 0.08 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(h[0], 0.04, epsilon = 1e-15);
        let (e0, h0) = m.hyper(&[0.0]);
        assert_eq!((e0, h0[0]), (0.0, 0.0));
    }

    #[test]
    fn zeta_reference_values() {
        let m = unit();
        let (z, s) = m.zeta(1.0, 1.0, 1.0);
        assert_relative_eq!(z, 0.5, epsilon = 1e-15);
        assert_relative_eq!(s, 1.0, epsilon = 1e-15);
        assert_eq!(m.zeta(1.3, 0.0, 1.0), (0.0, 0.0));
    }

    #[test]
    fn zeta_invariant_under_spin() {
        let m = MaterialModel::new(MaterialParams::unit_biot_2d()).unwrap();
        let f = Mat2([[1.1, 0.2], [-0.1, 0.9]]);
        let w = Mat2([[0.0, 0.7], [-0.7, 0.0]]);
        let (z, _): (f64, _) = m.zeta_2d(&f, &(w * f), 1.0);
        assert!(z.abs() < 1e-14);
    }

    #[test]
    fn mobility_reference_value() {
        let m = unit();
        assert_relative_eq!(m.mobility(2.0, 3.0).unwrap(), 0.75, epsilon = 1e-15);
        assert_eq!(m.mobility(1.5, 0.0).unwrap(), 0.0);
        assert!(m.mobility(0.0, 1.0).is_err());
    }

    #[test]
    fn mobility_bounds_hold_on_bounded_set() {
        let mut p = MaterialParams::unit_biot_2d();
        p.m0 = MobilityScale::Tensor([[2.0, 0.3], [0.3, 1.0]]);
        let m = MaterialModel::new(p).unwrap();
        let radius = 2.0;
        let (c0, c1) = m.mobility_bounds(radius);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut tested = 0;
        while tested < 200 {
            let f = Mat2([
                [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)],
                [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)],
            ]);
            let inside = f.det() >= 1.0 / radius
                && f.norm() <= radius
                && f.inverse().map(|i| i.norm() <= radius).unwrap_or(false);
            if !inside {
                continue;
            }
            tested += 1;
            let c: f64 = rng.gen_range(0.1..5.0);
            let mm = m.mobility_2d(&f, c).unwrap().scale(1.0 / c);
            let (lo, _) = mm.sym_eigenvalues();
            assert!(lo >= c0 * (1.0 - 1e-12), "lower bound {lo} < {c0}");
            assert!(mm.norm() <= c1 * (1.0 + 1e-12), "upper bound {} > {c1}", mm.norm());
        }
    }

    #[test]
    fn linearize_unit_biot() {
        let lin = unit().linearize();
        let k = lin.coefficients_1d().unwrap();
        assert_relative_eq!(k.c, 2.6, epsilon = 1e-14);
        assert_relative_eq!(k.k, -1.0);
        assert_relative_eq!(k.l, 2.0);
        assert_relative_eq!(k.d, 1.0);
        assert_relative_eq!(k.m_eq, 1.0);
    }

    #[test]
    fn linearize_matches_finite_differences() {
        for dim in [1, 2] {
            let p = if dim == 1 {
                MaterialParams::unit_biot()
            } else {
                MaterialParams::unit_biot_2d()
            };
            let m = MaterialModel::new(p).unwrap();
            let a = m.linearize();
            let b = m.finite_difference_tensors(1e-5);
            assert!(a.max_abs_diff(&b) < 1e-6, "dim {dim}: {}", a.max_abs_diff(&b));
        }
    }

    #[test]
    fn linearized_elasticity_ignores_skew_directions() {
        let m = MaterialModel::new(MaterialParams::unit_biot_2d()).unwrap();
        let lin = m.linearize();
        let u = [0.3, -0.2, 0.5, 0.1];
        let w = [0.0, 0.4, -0.4, 0.0];
        let uw: Vec<f64> = u.iter().zip(&w).map(|(a, b)| a + b).collect();
        let (cu, cuw) = (lin.c.apply(&u), lin.c.apply(&uw));
        for (a, b) in cu.iter().zip(&cuw) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn symmetry_action_vanishes_on_skew() {
        let m = MaterialModel::new(MaterialParams::unit_biot_2d()).unwrap();
        let (c, d) = m.verify_symmetry_action(&[0.0, 1.0, -1.0, 0.0]);
        assert!(c <= 1e-6 && d <= 1e-6, "{c} {d}");
    }

    #[test]
    fn sym_eigenvalues_match_moduli() {
        let m = MaterialModel::new(MaterialParams::unit_biot_2d()).unwrap();
        let fd = m.finite_difference_tensors(1e-5);
        let basis = sym_basis::<f64>(2);
        let gram: Vec<Vec<f64>> = basis
            .iter()
            .map(|a| basis.iter().map(|b| fd.c.bilinear(a, b)).collect())
            .collect();
        let ev = symmetric_eigenvalues(&gram);
        let lam = 0.1 * 6.0 * 7.0 + 1.0;
        assert_relative_eq!(ev[0], 1.0, max_relative = 1e-6);
        assert_relative_eq!(ev[1], 1.0, max_relative = 1e-6);
        assert_relative_eq!(ev[2], 1.0 + 2.0 * lam, max_relative = 1e-6);
        assert_relative_eq!(m.verify_positive_definiteness(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn validation_names_case_window() {
        let mut p = MaterialParams::<f64>::unit_biot();
        p.m = 3.0;
        p.gamma1 = 0.0;
        p.gamma2 = 0.0;
        let err = p.validate().unwrap_err().to_string();
        assert!(err.contains("Case I requires 1 <= m <= 2 - eta"), "{err}");
    }

    #[test]
    fn validation_rejects_low_p_and_q() {
        let mut p = MaterialParams::<f64>::unit_biot();
        p.p = 2.5;
        assert!(p.validate().unwrap_err().to_string().contains("p >= 3"));
        let mut p = MaterialParams::<f64>::unit_biot_2d();
        p.q_det = 5.0;
        assert!(p.validate().unwrap_err().to_string().contains("q_det"));
    }

    #[test]
    fn unit_biot_is_case_iia() {
        let p = MaterialParams::<f64>::unit_biot();
        assert_eq!(p.growth_case(), Some(GrowthCase::IIa));
        assert!(p.validate().is_ok());
    }

    #[test]
    fn fd_audit_passes() {
        let audit = unit().finite_difference_audit(50, 11);
        assert!(audit.max() <= 1e-6, "{audit:?}");
    }

    proptest! {
        #[test]
        fn phi_dominates_distance(f in 0.05f64..5.0, c in 0.0f64..10.0) {
            let m = unit();
            let phi = m.phi(f, c).unwrap();
            prop_assert!(phi >= 0.5 * (f - 1.0).powi(2) - 1e-12);
        }

        #[test]
        fn d2cc_times_c_bounded_below(c in 1e-6f64..1e3) {
            let m = unit();
            prop_assert!(m.d2_cc(c) * c >= 1.0 - 1e-12);
        }

        #[test]
        fn zeta_quadratic_bounds(f in 0.2f64..3.0, fdot in -2.0f64..2.0) {
            let m = unit();
            let cdot = 2.0 * f * fdot;
            let (z, _) = m.zeta(f, fdot, 1.0);
            prop_assert!((z - 0.125 * cdot * cdot).abs() <= 1e-12 * (1.0 + z));
        }
    }
}
