//! Direct solves for (block-)tridiagonal complex systems by the Thomas
//! elimination, with the factorization split out so one assembly serves
//! many right-hand sides (Green's columns, channel sweeps).

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::{Error, Result};

/// LU-style factorization of a scalar tridiagonal system.
///
/// Row `i` reads `sub[i-1]·x_{i-1} + diag[i]·x_i + sup[i]·x_{i+1} = b_i`.
pub struct ScalarFactor {
    lower: Vec<Complex64>,
    pivot: Vec<Complex64>,
    upper: Vec<Complex64>,
}

impl ScalarFactor {
    pub fn new(sub: &[Complex64], diag: &[Complex64], sup: &[Complex64]) -> Result<Self> {
        let m = diag.len();
        assert!(m >= 1 && sub.len() == m - 1 && sup.len() == m - 1);
        let scale = diag.iter().map(|d| d.norm()).fold(0.0, f64::max).max(1.0);
        let floor = 1e-14 * scale;
        let mut lower = vec![Complex64::default(); m.saturating_sub(1)];
        let mut pivot = vec![Complex64::default(); m];
        pivot[0] = diag[0];
        if pivot[0].norm() < floor {
            return Err(Error::SingularSystem(pivot[0]));
        }
        for i in 1..m {
            let l = sub[i - 1] / pivot[i - 1];
            lower[i - 1] = l;
            pivot[i] = diag[i] - l * sup[i - 1];
            if pivot[i].norm() < floor {
                return Err(Error::SingularSystem(pivot[i]));
            }
        }
        Ok(ScalarFactor { lower, pivot, upper: sup.to_vec() })
    }

    /// Solves in place.
    pub fn solve(&self, rhs: &mut [Complex64]) {
        let m = self.pivot.len();
        assert_eq!(rhs.len(), m);
        for i in 1..m {
            let correction = self.lower[i - 1] * rhs[i - 1];
            rhs[i] -= correction;
        }
        rhs[m - 1] /= self.pivot[m - 1];
        for i in (0..m - 1).rev() {
            let correction = self.upper[i] * rhs[i + 1];
            rhs[i] = (rhs[i] - correction) / self.pivot[i];
        }
    }
}

/// Block variant with `N×N` complex blocks.
pub struct BlockFactor {
    lower: Vec<DMatrix<Complex64>>,
    pivot_inv: Vec<DMatrix<Complex64>>,
    upper: Vec<DMatrix<Complex64>>,
    block: usize,
}

impl BlockFactor {
    pub fn new(
        sub: &[DMatrix<Complex64>],
        diag: &[DMatrix<Complex64>],
        sup: &[DMatrix<Complex64>],
    ) -> Result<Self> {
        let m = diag.len();
        assert!(m >= 1 && sub.len() == m - 1 && sup.len() == m - 1);
        let n = diag[0].nrows();
        let mut lower = Vec::with_capacity(m - 1);
        let mut pivot_inv = Vec::with_capacity(m);
        let mut pivot = diag[0].clone();
        let inv = pivot
            .clone()
            .try_inverse()
            .ok_or(Error::SingularSystem(Complex64::default()))?;
        pivot_inv.push(inv);
        for i in 1..m {
            let l = &sub[i - 1] * &pivot_inv[i - 1];
            pivot = &diag[i] - &l * &sup[i - 1];
            let inv = pivot
                .clone()
                .try_inverse()
                .ok_or(Error::SingularSystem(Complex64::default()))?;
            lower.push(l);
            pivot_inv.push(inv);
        }
        Ok(BlockFactor { lower, pivot_inv, upper: sup.to_vec(), block: n })
    }

    /// Solves in place; `rhs` is the concatenation of the `m` block vectors.
    pub fn solve(&self, rhs: &mut [Complex64]) {
        let n = self.block;
        let m = self.pivot_inv.len();
        assert_eq!(rhs.len(), m * n);
        let mut tmp = vec![Complex64::default(); n];
        for i in 1..m {
            let (prev, cur) = rhs.split_at_mut(i * n);
            let prev = &prev[(i - 1) * n..];
            let l = &self.lower[i - 1];
            for a in 0..n {
                let mut acc = Complex64::default();
                for b in 0..n {
                    acc += l[(a, b)] * prev[b];
                }
                cur[a] -= acc;
            }
        }
        apply_block(&self.pivot_inv[m - 1], &mut rhs[(m - 1) * n..], &mut tmp);
        for i in (0..m - 1).rev() {
            let (cur, next) = rhs.split_at_mut((i + 1) * n);
            let cur = &mut cur[i * n..];
            let u = &self.upper[i];
            for a in 0..n {
                let mut acc = Complex64::default();
                for b in 0..n {
                    acc += u[(a, b)] * next[b];
                }
                cur[a] -= acc;
            }
            apply_block(&self.pivot_inv[i], cur, &mut tmp);
        }
    }
}

fn apply_block(m: &DMatrix<Complex64>, v: &mut [Complex64], tmp: &mut [Complex64]) {
    let n = m.nrows();
    for a in 0..n {
        let mut acc = Complex64::default();
        for b in 0..n {
            acc += m[(a, b)] * v[b];
        }
        tmp[a] = acc;
    }
    v[..n].copy_from_slice(&tmp[..n]);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn scalar_matches_dense_solve() {
        let m = 12;
        let sub: Vec<Complex64> = (0..m - 1).map(|i| c(0.3 + 0.1 * i as f64, -0.2)).collect();
        let diag: Vec<Complex64> = (0..m).map(|i| c(4.0 + i as f64 * 0.05, 1.0)).collect();
        let sup: Vec<Complex64> = (0..m - 1).map(|i| c(-0.5, 0.3 * i as f64)).collect();
        let rhs: Vec<Complex64> = (0..m).map(|i| c(1.0 + i as f64, -0.7)).collect();

        let mut dense = DMatrix::<Complex64>::zeros(m, m);
        for i in 0..m {
            dense[(i, i)] = diag[i];
            if i + 1 < m {
                dense[(i + 1, i)] = sub[i];
                dense[(i, i + 1)] = sup[i];
            }
        }
        let mut x = rhs.clone();
        ScalarFactor::new(&sub, &diag, &sup).unwrap().solve(&mut x);
        let xd = dense
            .lu()
            .solve(&nalgebra::DVector::from_vec(rhs))
            .unwrap();
        for i in 0..m {
            assert!((x[i] - xd[i]).norm() < 1e-12, "mismatch at {i}");
        }
    }

    #[test]
    fn block_matches_dense_solve() {
        let m = 7;
        let n = 3;
        let mk = |seed: usize| {
            DMatrix::from_fn(n, n, |a, b| {
                c(
                    ((seed * 7 + a * 3 + b) % 11) as f64 * 0.17 + if a == b { 5.0 } else { 0.0 },
                    ((seed * 5 + a + 2 * b) % 7) as f64 * 0.09,
                )
            })
        };
        let sub: Vec<_> = (0..m - 1).map(|i| mk(i + 1).scale(0.2)).collect();
        let diag: Vec<_> = (0..m).map(|i| mk(i + 20)).collect();
        let sup: Vec<_> = (0..m - 1).map(|i| mk(i + 40).scale(0.2)).collect();
        let rhs: Vec<Complex64> = (0..m * n).map(|i| c(i as f64 * 0.3 - 1.0, 0.4)).collect();

        let mut dense = DMatrix::<Complex64>::zeros(m * n, m * n);
        for i in 0..m {
            dense.view_mut((i * n, i * n), (n, n)).copy_from(&diag[i]);
            if i + 1 < m {
                dense.view_mut(((i + 1) * n, i * n), (n, n)).copy_from(&sub[i]);
                dense.view_mut((i * n, (i + 1) * n), (n, n)).copy_from(&sup[i]);
            }
        }
        let mut x = rhs.clone();
        BlockFactor::new(&sub, &diag, &sup).unwrap().solve(&mut x);
        let xd = dense.lu().solve(&nalgebra::DVector::from_vec(rhs)).unwrap();
        for i in 0..m * n {
            assert!((x[i] - xd[i]).norm() < 1e-10, "mismatch at {i}");
        }
    }

    #[test]
    fn singular_system_detected() {
        let sub = vec![c(1.0, 0.0)];
        let diag = vec![c(1.0, 0.0), c(1.0, 0.0)];
        let sup = vec![c(1.0, 0.0)];
        // pivot_2 = 1 - 1*1 = 0
        assert!(matches!(
            ScalarFactor::new(&sub, &diag, &sup),
            Err(Error::SingularSystem(_))
        ));
    }
}
