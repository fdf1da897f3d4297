//! Spatial profiles, time amplitudes and boundary data shared by both solvers.

use serde::{Deserialize, Serialize};

use crate::scalar::{lit, Scalar};

/// Scalar profile on `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    Zero,
    Constant {
        value: f64,
    },
    /// `amplitude * cos(modes * pi * x)`
    Cosine {
        amplitude: f64,
        modes: u32,
    },
    /// `amplitude * sin(modes * pi * x)`
    Sine {
        amplitude: f64,
        modes: u32,
    },
    /// `sum_j coeffs[j] x^j`
    Polynomial {
        coeffs: Vec<f64>,
    },
}

impl Profile {
    pub fn eval<T: Scalar>(&self, x: T) -> T {
        let pi = T::PI();
        match self {
            Profile::Zero => T::zero(),
            Profile::Constant { value } => lit(*value),
            Profile::Cosine { amplitude, modes } => lit::<T>(*amplitude) * (lit::<T>(*modes as f64) * pi * x).cos(),
            Profile::Sine { amplitude, modes } => lit::<T>(*amplitude) * (lit::<T>(*modes as f64) * pi * x).sin(),
            Profile::Polynomial { coeffs } => coeffs.iter().rev().fold(T::zero(), |acc, a| acc * x + lit(*a)),
        }
    }

    /// Derivative, used for admissibility checks of initial displacements.
    pub fn derivative<T: Scalar>(&self, x: T) -> T {
        let pi = T::PI();
        match self {
            Profile::Zero | Profile::Constant { .. } => T::zero(),
            Profile::Cosine { amplitude, modes } => {
                let k = lit::<T>(*modes as f64) * pi;
                -lit::<T>(*amplitude) * k * (k * x).sin()
            }
            Profile::Sine { amplitude, modes } => {
                let k = lit::<T>(*modes as f64) * pi;
                lit::<T>(*amplitude) * k * (k * x).cos()
            }
            Profile::Polynomial { coeffs } => coeffs
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(T::zero(), |acc, (j, a)| acc * x + lit::<T>(*a * j as f64)),
        }
    }
}

/// Time amplitude multiplying a profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Amplitude {
    Constant,
    /// `min(t / t_ramp, 1)`
    Ramp {
        t_ramp: f64,
    },
    /// `sin(omega t)`
    Sine {
        omega: f64,
    },
}

impl Amplitude {
    pub fn eval<T: Scalar>(&self, t: T) -> T {
        match self {
            Amplitude::Constant => T::one(),
            Amplitude::Ramp { t_ramp } => (t / lit(*t_ramp)).min(T::one()).max(T::zero()),
            Amplitude::Sine { omega } => (lit::<T>(*omega) * t).sin(),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Amplitude::Constant)
    }
}

/// Body force and end traction of the unscaled problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadingSpec {
    pub body_force: Profile,
    pub traction: f64,
    pub force_amplitude: Amplitude,
    pub traction_amplitude: Amplitude,
}

impl LoadingSpec {
    pub fn none() -> Self {
        LoadingSpec {
            body_force: Profile::Zero,
            traction: 0.0,
            force_amplitude: Amplitude::Constant,
            traction_amplitude: Amplitude::Constant,
        }
    }

    pub fn is_time_independent(&self) -> bool {
        self.force_amplitude.is_constant() && self.traction_amplitude.is_constant()
    }

    /// The loading multiplied by `scale`.
    pub fn scaled<T: Scalar>(&self, scale: T) -> ScaledLoading<'_, T> {
        ScaledLoading { spec: self, scale }
    }
}

/// Right-hand sides of the balance laws on `(0, 1)`.
pub trait Forcing<T: Scalar>: Send + Sync {
    fn body_force(&self, x: T, t: T) -> T;
    /// Traction at `x = 1`.
    fn traction(&self, t: T) -> T;
    /// Volumetric mass source; only manufactured solutions use it.
    fn mass_source(&self, _x: T, _t: T) -> T {
        T::zero()
    }
}

pub struct ScaledLoading<'a, T> {
    spec: &'a LoadingSpec,
    scale: T,
}

impl<T: Scalar> Forcing<T> for ScaledLoading<'_, T> {
    fn body_force(&self, x: T, t: T) -> T {
        self.scale * self.spec.body_force.eval(x) * self.spec.force_amplitude.eval(t)
    }

    fn traction(&self, t: T) -> T {
        self.scale * lit(self.spec.traction) * self.spec.traction_amplitude.eval(t)
    }
}

/// Robin data `M dmu/dn + kappa mu = kappa mu_ext` at both ends.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BCSpec {
    pub kappa: f64,
    pub mu_ext: f64,
}

impl Default for BCSpec {
    fn default() -> Self {
        BCSpec {
            kappa: 0.0,
            mu_ext: 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_and_derivative() {
        let p = Profile::Polynomial {
            coeffs: vec![1.0, 2.0, 3.0],
        };
        assert_eq!(p.eval(2.0f64), 17.0);
        assert_eq!(p.derivative(2.0f64), 14.0);
    }

    #[test]
    fn trig_derivatives() {
        let h = 1e-6;
        for p in [
            Profile::Cosine {
                amplitude: 0.3,
                modes: 2,
            },
            Profile::Sine {
                amplitude: -1.2,
                modes: 1,
            },
        ] {
            let x = 0.37f64;
            let fd = (p.eval(x + h) - p.eval(x - h)) / (2.0 * h);
            assert!((fd - p.derivative(x)).abs() < 1e-8);
        }
    }

    #[test]
    fn ramp_saturates() {
        let a = Amplitude::Ramp { t_ramp: 0.5 };
        assert_eq!(a.eval(0.25f64), 0.5);
        assert_eq!(a.eval(2.0f64), 1.0);
        assert_eq!(a.eval(0.0f64), 0.0);
    }

    #[test]
    fn spec_roundtrips_through_json() {
        let spec = LoadingSpec {
            body_force: Profile::Sine {
                amplitude: 1.0,
                modes: 1,
            },
            traction: 0.5,
            force_amplitude: Amplitude::Ramp { t_ramp: 0.5 },
            traction_amplitude: Amplitude::Constant,
        };
        let s = serde_json::to_string(&spec).unwrap();
        let back: LoadingSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(spec, back);
    }
}
