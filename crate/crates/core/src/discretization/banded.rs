//! Banded LU with partial pivoting.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Square band matrix with `kl` sub- and `ku` super-diagonals.
///
/// Each row reserves `kl` extra columns on the right for pivoting fill-in.
#[derive(Clone, Debug)]
pub struct BandMatrix<T> {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<T>,
}

impl<T: Scalar> BandMatrix<T> {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        BandMatrix {
            n,
            kl,
            ku,
            width,
            data: vec![T::zero(); n * width],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn pos(&self, i: usize, j: usize) -> usize {
        debug_assert!(
            j + self.kl >= i && j + self.kl - i < self.width,
            "({i},{j}) outside band"
        );
        i * self.width + (j + self.kl - i)
    }

    #[inline]
    fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && j + self.kl >= i && j <= i + self.ku
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        if self.in_band(i, j) {
            self.data[self.pos(i, j)]
        } else {
            T::zero()
        }
    }

    /// Adds `v` to entry `(i, j)`, which must lie inside the band.
    pub fn add(&mut self, i: usize, j: usize, v: T) {
        assert!(
            self.in_band(i, j),
            "entry ({i},{j}) outside band kl={} ku={}",
            self.kl,
            self.ku
        );
        let p = self.pos(i, j);
        self.data[p] = self.data[p] + v;
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    /// Solves `A x = b`; fails on a pivot at round-off level.
    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        let mut a = self.data.clone();
        let mut x = b.to_vec();
        let scale = a.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        let tiny = scale * T::epsilon();
        let reach = self.kl + self.ku;
        let at = |i: usize, j: usize| i * self.width + (j + self.kl - i);
        for j in 0..n {
            let last = (j + self.kl).min(n - 1);
            let mut p = j;
            let mut best = a[at(j, j)].abs();
            for i in (j + 1)..=last {
                let v = a[at(i, j)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if !(best > tiny) || !best.is_finite() {
                return Err(Error::SingularSystem { pivot: j });
            }
            let cend = (j + reach).min(n - 1);
            if p != j {
                for col in j..=cend {
                    a.swap(at(j, col), at(p, col));
                }
                x.swap(j, p);
            }
            let piv = a[at(j, j)];
            for i in (j + 1)..=last {
                let factor = a[at(i, j)] / piv;
                if factor == T::zero() {
                    continue;
                }
                a[at(i, j)] = T::zero();
                for col in (j + 1)..=cend {
                    a[at(i, col)] = a[at(i, col)] - factor * a[at(j, col)];
                }
                x[i] = x[i] - factor * x[j];
            }
        }
        for i in (0..n).rev() {
            let cend = (i + reach).min(n - 1);
            let mut s = x[i];
            for col in (i + 1)..=cend {
                s = s - a[at(i, col)] * x[col];
            }
            x[i] = s / a[at(i, i)];
        }
        Ok(x)
    }
}
