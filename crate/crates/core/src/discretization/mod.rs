//! Uniform grid on the unit interval, nodal and cell fields, discrete norms.
//!
//! Displacements live at the `n + 1` nodes; concentrations and chemical
//! potentials live at the `n` cell centres, collocated with the cellwise
//! deformation gradient.

pub mod banded;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{fmt17, idx, lit, Scalar};
pub use banded::BandMatrix;

/// Where the values of a [`Field`] sit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Location {
    Nodes,
    Cells,
}

/// Uniform grid on `(0, 1)`; `x = 0` carries the Dirichlet condition, `x = 1` the traction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid1D<T> {
    n_cells: usize,
    h: T,
}

/// Grid values with their location.
#[derive(Clone, Debug, PartialEq)]
pub struct Field<T> {
    pub loc: Location,
    pub values: Vec<T>,
}

/// Outer (time) norm of a Bochner norm.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TimeNorm {
    Max,
    L2,
}

/// Inner (space) norm of a Bochner norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpaceNorm {
    Lq(f64),
    H1Seminorm,
    H1,
}

impl<T: Scalar> Field<T> {
    pub fn new(loc: Location, values: Vec<T>) -> Self {
        Field { loc, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> T {
        self.values.iter().fold(T::infinity(), |m, v| m.min(*v))
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.loc, other.loc);
        Field::new(
            self.loc,
            self.values.iter().zip(&other.values).map(|(a, b)| *a - *b).collect(),
        )
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Field::new(self.loc, self.values.iter().map(|v| f(*v)).collect())
    }
}

impl<T: Scalar> Grid1D<T> {
    pub fn new(n_cells: usize) -> Result<Self> {
        if n_cells < 4 {
            return Err(Error::Domain(format!("grid needs at least 4 cells (got {n_cells})")));
        }
        Ok(Grid1D {
            n_cells,
            h: T::one() / idx(n_cells),
        })
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn n_nodes(&self) -> usize {
        self.n_cells + 1
    }

    pub fn h(&self) -> T {
        self.h
    }

    pub fn node(&self, i: usize) -> T {
        idx::<T>(i) * self.h
    }

    pub fn cell_center(&self, k: usize) -> T {
        (idx::<T>(k) + lit(0.5)) * self.h
    }

    pub fn len_of(&self, loc: Location) -> usize {
        match loc {
            Location::Nodes => self.n_nodes(),
            Location::Cells => self.n_cells,
        }
    }

    pub fn coordinates(&self, loc: Location) -> Vec<T> {
        match loc {
            Location::Nodes => (0..self.n_nodes()).map(|i| self.node(i)).collect(),
            Location::Cells => (0..self.n_cells).map(|k| self.cell_center(k)).collect(),
        }
    }

    /// Samples `f` at the nodes or cell centres.
    pub fn sample(&self, loc: Location, f: impl Fn(T) -> T) -> Field<T> {
        Field::new(loc, self.coordinates(loc).into_iter().map(f).collect())
    }

    pub fn zeros(&self, loc: Location) -> Field<T> {
        Field::new(loc, vec![T::zero(); self.len_of(loc)])
    }

    fn check(&self, f: &Field<T>) -> Result<()> {
        if f.len() != self.len_of(f.loc) {
            return Err(Error::Domain(format!(
                "{:?} field has {} values, grid expects {}",
                f.loc,
                f.len(),
                self.len_of(f.loc)
            )));
        }
        Ok(())
    }

    /// Quadrature weights: trapezoidal at nodes, midpoint at cells.
    pub fn weights(&self, loc: Location) -> Vec<T> {
        match loc {
            Location::Nodes => {
                let mut w = vec![self.h; self.n_nodes()];
                w[0] = self.h * lit(0.5);
                w[self.n_cells] = self.h * lit(0.5);
                w
            }
            Location::Cells => vec![self.h; self.n_cells],
        }
    }

    pub fn integrate(&self, f: &Field<T>) -> Result<T> {
        self.check(f)?;
        Ok(self.weights(f.loc).iter().zip(&f.values).map(|(w, v)| *w * *v).sum())
    }

    pub fn inner(&self, a: &Field<T>, b: &Field<T>) -> Result<T> {
        self.check(a)?;
        self.check(b)?;
        if a.loc != b.loc {
            return Err(Error::Domain("inner product of fields at different locations".into()));
        }
        Ok(self
            .weights(a.loc)
            .iter()
            .zip(a.values.iter().zip(&b.values))
            .map(|(w, (x, y))| *w * *x * *y)
            .sum())
    }

    /// Forward differences: nodes to cells, or cells to nodes with zero boundary entries.
    pub fn gradient(&self, f: &Field<T>) -> Result<Field<T>> {
        self.check(f)?;
        let v = &f.values;
        Ok(match f.loc {
            Location::Nodes => Field::new(Location::Cells, v.windows(2).map(|w| (w[1] - w[0]) / self.h).collect()),
            Location::Cells => {
                let mut g = vec![T::zero(); self.n_nodes()];
                for i in 1..self.n_cells {
                    g[i] = (v[i] - v[i - 1]) / self.h;
                }
                Field::new(Location::Nodes, g)
            }
        })
    }

    /// Central second differences at interior nodes; endpoint values are zero.
    pub fn second_derivative(&self, f: &Field<T>) -> Result<Field<T>> {
        self.check(f)?;
        if f.loc != Location::Nodes {
            return Err(Error::Domain("second derivative needs a nodal field".into()));
        }
        let v = &f.values;
        let h2 = self.h * self.h;
        let mut g = vec![T::zero(); self.n_nodes()];
        for i in 1..self.n_cells {
            g[i] = (v[i + 1] - lit::<T>(2.0) * v[i] + v[i - 1]) / h2;
        }
        Ok(Field::new(Location::Nodes, g))
    }

    /// Backward differences of a cell field at interior nodes; endpoint values are zero.
    pub fn divergence(&self, g: &Field<T>) -> Result<Field<T>> {
        if g.loc != Location::Cells {
            return Err(Error::Domain("divergence needs a cell field".into()));
        }
        self.gradient(g)
    }

    /// Discrete `L^q` norm; `q = f64::INFINITY` gives the max norm.
    pub fn lq_norm(&self, f: &Field<T>, q: f64) -> Result<T> {
        self.check(f)?;
        if !(q >= 1.0) {
            return Err(Error::Domain(format!("L^q norm needs q >= 1 (got {q})")));
        }
        if q.is_infinite() {
            return Ok(f.max_abs());
        }
        let qt: T = lit(q);
        let s: T = self
            .weights(f.loc)
            .iter()
            .zip(&f.values)
            .map(|(w, v)| *w * v.abs().powf(qt))
            .sum();
        Ok(s.powf(T::one() / qt))
    }

    /// `L^q` norm computed relative to the max entry, safe for large `q`.
    pub fn lq_norm_scaled(&self, f: &Field<T>, q: f64) -> Result<T> {
        let m = f.max_abs();
        if m == T::zero() || q.is_infinite() {
            return self.lq_norm(f, q);
        }
        Ok(m * self.lq_norm(&f.map(|v| v / m), q)?)
    }

    pub fn h1_seminorm(&self, f: &Field<T>) -> Result<T> {
        let g = self.gradient(f)?;
        let s: T = match f.loc {
            Location::Nodes => g.values.iter().map(|v| self.h * *v * *v).sum(),
            Location::Cells => g.values[1..self.n_cells].iter().map(|v| self.h * *v * *v).sum(),
        };
        Ok(s.sqrt())
    }

    pub fn h1_norm(&self, f: &Field<T>) -> Result<T> {
        let l2 = self.lq_norm(f, 2.0)?;
        let s = self.h1_seminorm(f)?;
        Ok((l2 * l2 + s * s).sqrt())
    }

    pub fn space_norm(&self, f: &Field<T>, norm: SpaceNorm) -> Result<T> {
        match norm {
            SpaceNorm::Lq(q) => self.lq_norm(f, q),
            SpaceNorm::H1Seminorm => self.h1_seminorm(f),
            SpaceNorm::H1 => self.h1_norm(f),
        }
    }

    /// `int c log(c/c_eq) - c + c_eq` with `0 log 0 = 0`.
    pub fn llogl_deviation(&self, c: &Field<T>, c_eq: T) -> Result<T> {
        self.check(c)?;
        if let Some(bad) = c.values.iter().find(|v| !(**v >= T::zero())) {
            return Err(Error::Domain(format!("negative concentration {bad}")));
        }
        Ok(self
            .weights(c.loc)
            .iter()
            .zip(&c.values)
            .map(|(w, v)| {
                let s = if *v == T::zero() {
                    T::zero()
                } else {
                    *v * (*v / c_eq).ln()
                };
                *w * (s - *v + c_eq)
            })
            .sum())
    }

    /// Bochner norm of a trajectory sampled at `times` (the first entry is the initial time).
    ///
    /// The time-`L2` norm uses the right-endpoint rule of implicit Euler.
    pub fn bochner_norm(&self, times: &[T], fields: &[Field<T>], outer: TimeNorm, inner: SpaceNorm) -> Result<T> {
        if times.len() != fields.len() || fields.is_empty() {
            return Err(Error::Domain(
                "trajectory times and fields must match and be non-empty".into(),
            ));
        }
        match outer {
            TimeNorm::Max => fields
                .iter()
                .try_fold(T::zero(), |m, f| Ok(m.max(self.space_norm(f, inner)?))),
            TimeNorm::L2 => {
                let mut s = T::zero();
                for k in 1..fields.len() {
                    let v = self.space_norm(&fields[k], inner)?;
                    s = s + (times[k] - times[k - 1]) * v * v;
                }
                Ok(s.sqrt())
            }
        }
    }

    /// CSV with an `x` column and a value column.
    pub fn to_csv(&self, f: &Field<T>, name: &str) -> Result<String> {
        self.check(f)?;
        let mut out = format!("x[-],{name}[-]\n");
        for (x, v) in self.coordinates(f.loc).into_iter().zip(&f.values) {
            out.push_str(&format!("{},{}\n", fmt17(x), fmt17(*v)));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn grid_rejects_small() {
        assert!(Grid1D::<f64>::new(3).is_err());
        assert!(Grid1D::<f64>::new(4).is_ok());
    }

    #[test]
    fn linear_field_norms() {
        let g = Grid1D::<f64>::new(8).unwrap();
        let f = g.sample(Location::Nodes, |x| x);
        assert_relative_eq!(g.h1_seminorm(&f).unwrap(), 1.0, epsilon = 1e-14);
        let grad = g.gradient(&f).unwrap();
        assert!(grad.values.iter().all(|v| (v - 1.0).abs() < 1e-13));
        let d2 = g.second_derivative(&f).unwrap();
        assert!(d2.max_abs() < 1e-11);
    }

    #[test]
    fn constant_field_norms() {
        let g = Grid1D::<f64>::new(8).unwrap();
        for loc in [Location::Nodes, Location::Cells] {
            let f = g.sample(loc, |_| 2.0);
            for q in [1.0, 2.0, 7.5, f64::INFINITY] {
                assert_relative_eq!(g.lq_norm(&f, q).unwrap(), 2.0, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn rejects_sub_unit_exponent() {
        let g = Grid1D::<f64>::new(8).unwrap();
        assert!(g.lq_norm(&g.zeros(Location::Nodes), 0.5).is_err());
    }

    #[test]
    fn llogl_constant() {
        let g = Grid1D::<f64>::new(8).unwrap();
        let c = g.sample(Location::Cells, |_| 2.0);
        assert_relative_eq!(
            g.llogl_deviation(&c, 1.0).unwrap(),
            2.0 * 2f64.ln() - 1.0,
            epsilon = 1e-14
        );
        let z = g.zeros(Location::Cells);
        assert_relative_eq!(g.llogl_deviation(&z, 1.0).unwrap(), 1.0, epsilon = 1e-14);
        let neg = g.sample(Location::Cells, |x| x - 0.5);
        assert!(g.llogl_deviation(&neg, 1.0).is_err());
    }

    #[test]
    fn hat_l1_converges_first_order() {
        let hat = |x: f64| (1.0 - (x - 1.0 / 3.0).abs() * 6.0).max(0.0);
        let mut errs = Vec::new();
        for n in [30, 60, 120, 240] {
            let g = Grid1D::<f64>::new(n).unwrap();
            let f = g.sample(Location::Nodes, hat);
            errs.push((g.lq_norm(&f, 1.0).unwrap() - 1.0 / 6.0).abs());
        }
        for (k, e) in errs.iter().enumerate() {
            let h = 1.0 / (30.0 * 2f64.powi(k as i32));
            assert!(*e <= h, "{e} > {h}");
        }
    }

    #[test]
    fn bochner_max_and_l2() {
        let g = Grid1D::<f64>::new(4).unwrap();
        let f1 = g.sample(Location::Cells, |_| 1.0);
        let f2 = g.sample(Location::Cells, |_| 3.0);
        let times = [0.0, 0.5, 1.0];
        let fields = [f1.clone(), f1, f2];
        let m = g
            .bochner_norm(&times, &fields, TimeNorm::Max, SpaceNorm::Lq(2.0))
            .unwrap();
        assert_relative_eq!(m, 3.0, epsilon = 1e-14);
        let l2 = g
            .bochner_norm(&times, &fields, TimeNorm::L2, SpaceNorm::Lq(2.0))
            .unwrap();
        assert_relative_eq!(l2, (0.5f64 + 4.5).sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let g = Grid1D::<f64>::new(4).unwrap();
        let s = g.to_csv(&g.sample(Location::Nodes, |x| x), "u").unwrap();
        assert_eq!(s.lines().count(), 6);
        assert!(s.starts_with("x[-],u[-]"));
    }

    proptest! {
        #[test]
        fn summation_by_parts(vals in proptest::collection::vec(-10.0f64..10.0, 2 * 9 + 1)) {
            let n = 9;
            let g = Grid1D::<f64>::new(n).unwrap();
            let f = Field::new(Location::Nodes, vals[..n + 1].to_vec());
            let w = Field::new(Location::Cells, vals[n + 1..].to_vec());
            let lhs = g.inner(&g.gradient(&f).unwrap(), &w).unwrap();
            let div = g.divergence(&w).unwrap();
            let interior: f64 = (1..n).map(|i| g.h() * f.values[i] * div.values[i]).sum();
            let rhs = f.values[n] * w.values[n - 1] - f.values[0] * w.values[0] - interior;
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
        }

        #[test]
        fn lq_monotone_in_q(vals in proptest::collection::vec(0.0f64..5.0, 16)) {
            let g = Grid1D::<f64>::new(16).unwrap();
            let f = Field::new(Location::Cells, vals);
            let mut prev = 0.0;
            for q in [1.0, 2.0, 4.0, 8.0, 64.0] {
                let v = g.lq_norm_scaled(&f, q).unwrap();
                prop_assert!(v >= prev * (1.0 - 1e-12));
                prev = v;
            }
            prop_assert!(prev <= f.max_abs() * (1.0 + 1e-12));
        }
    }
}
