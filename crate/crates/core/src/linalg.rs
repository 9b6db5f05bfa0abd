//! Dense symmetric positive-definite algebra for small `K x K` matrices.

use rand::Rng;

use crate::error::{Error, Result};
use crate::stats::standard_normal;

/// Relative pivot threshold below which a matrix is declared not SPD.
pub const SPD_PIVOT_TOL: f64 = 1e-12;

/// A symmetric matrix stored densely in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    /// Builds a matrix from rows, requiring exact symmetry.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::domain("matrix dimension must be at least 1"));
        }
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        for i in 0..dim {
            for j in 0..i {
                if data[i * dim + j] != data[j * dim + i] {
                    return Err(Error::domain(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::domain("matrix entries must be finite"));
        }
        Ok(SymMatrix { dim, data })
    }

    /// Builds a matrix from `f(i, j)` evaluated on the upper triangle `i <= j`.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(dim >= 1, "matrix dimension must be at least 1");
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in i..dim {
                let v = f(i, j);
                data[i * dim + j] = v;
                data[j * dim + i] = v;
            }
        }
        SymMatrix { dim, data }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        Self::from_fn(diag.len(), |i, j| if i == j { diag[i] } else { 0.0 })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn scaled(&self, c: f64) -> Self {
        SymMatrix {
            dim: self.dim,
            data: self.data.iter().map(|x| x * c).collect(),
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn max_diagonal(&self) -> f64 {
        (0..self.dim)
            .map(|i| self.get(i, i))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Lower-triangular Cholesky factor `L` with `L Lᵀ = m`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cholesky {
    dim: usize,
    lower: Vec<f64>,
}

impl Cholesky {
    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.lower[i * self.dim + j]
    }

    /// Solves `L z = b`.
    pub fn forward(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.check_len(b.len())?;
        let n = self.dim;
        let mut z = vec![0.0; n];
        for i in 0..n {
            let row = &self.lower[i * n..i * n + i];
            let s: f64 = row.iter().zip(&z).map(|(l, z)| l * z).sum();
            z[i] = (b[i] - s) / self.lower[i * n + i];
        }
        Ok(z)
    }

    /// Solves `Lᵀ x = z`.
    fn backward(&self, z: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = z[i];
            for k in i + 1..n {
                s -= self.lower[k * n + i] * x[k];
            }
            x[i] = s / self.lower[i * n + i];
        }
        x
    }

    /// Solves `m x = b`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let z = self.forward(b)?;
        Ok(self.backward(&z))
    }

    /// `rᵀ m⁻¹ r = ‖L⁻¹ r‖²`.
    pub fn quad_form_inv(&self, r: &[f64]) -> Result<f64> {
        Ok(self.forward(r)?.iter().map(|z| z * z).sum())
    }

    /// `L z`, used to color standard normal vectors.
    pub fn mul_lower(&self, z: &[f64]) -> Vec<f64> {
        let n = self.dim;
        (0..n)
            .map(|i| {
                self.lower[i * n..=i * n + i]
                    .iter()
                    .zip(z)
                    .map(|(l, z)| l * z)
                    .sum()
            })
            .collect()
    }

    /// Reassembles `L Lᵀ`.
    pub fn reconstruct(&self) -> SymMatrix {
        let n = self.dim;
        SymMatrix::from_fn(n, |i, j| (0..=i.min(j)).map(|k| self.get(i, k) * self.get(j, k)).sum())
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len == self.dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim,
                found: len,
            })
        }
    }
}

/// Cholesky factorization; fails with [`Error::NotSpd`] when a pivot is at
/// or below `SPD_PIVOT_TOL * max diagonal`.
pub fn cholesky(m: &SymMatrix) -> Result<Cholesky> {
    let n = m.dim();
    let tol = SPD_PIVOT_TOL * m.max_diagonal().max(0.0);
    let mut lower = vec![0.0; n * n];
    for j in 0..n {
        let mut pivot = m.get(j, j);
        for k in 0..j {
            pivot -= lower[j * n + k] * lower[j * n + k];
        }
        if !(pivot > tol) {
            return Err(Error::NotSpd {
                pivot: j,
                value: pivot,
            });
        }
        let d = pivot.sqrt();
        lower[j * n + j] = d;
        for i in j + 1..n {
            let mut s = m.get(i, j);
            for k in 0..j {
                s -= lower[i * n + k] * lower[j * n + k];
            }
            lower[i * n + j] = s / d;
        }
    }
    Ok(Cholesky { dim: n, lower })
}

pub fn solve_spd(m: &SymMatrix, b: &[f64]) -> Result<Vec<f64>> {
    cholesky(m)?.solve(b)
}

pub fn quad_form_inv(m: &SymMatrix, r: &[f64]) -> Result<f64> {
    cholesky(m)?.quad_form_inv(r)
}

/// One draw from `N(0, m)`.
pub fn sample_mvn_zero<R: Rng + ?Sized>(rng: &mut R, m: &SymMatrix) -> Result<Vec<f64>> {
    let chol = cholesky(m)?;
    Ok(sample_mvn_with(rng, &chol))
}

/// One draw from `N(0, L Lᵀ)` given a precomputed factor.
pub fn sample_mvn_with<R: Rng + ?Sized>(rng: &mut R, chol: &Cholesky) -> Vec<f64> {
    let z: Vec<f64> = (0..chol.dim()).map(|_| standard_normal(rng)).collect();
    chol.mul_lower(&z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::RngStream;
    use proptest::prelude::*;
    use rand::Rng;

    fn max_abs_diff(a: &SymMatrix, b: &SymMatrix) -> f64 {
        let n = a.dim();
        let mut m = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                m = m.max((a.get(i, j) - b.get(i, j)).abs());
            }
        }
        m
    }

    #[test]
    fn identity_factor() {
        let l = cholesky(&SymMatrix::identity(3)).unwrap();
        assert_eq!(l.reconstruct(), SymMatrix::identity(3));
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(l.get(i, j), if i == j { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn two_by_two_by_hand() {
        let m = SymMatrix::from_rows(&[vec![4.0, 2.0], vec![2.0, 3.0]]).unwrap();
        let l = cholesky(&m).unwrap();
        assert_eq!(l.get(0, 0), 2.0);
        assert_eq!(l.get(1, 0), 1.0);
        assert!((l.get(1, 1) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(l.get(0, 1), 0.0);
    }

    #[test]
    fn rejects_asymmetric_and_singular() {
        assert!(SymMatrix::from_rows(&[vec![1.0, 2.0], vec![2.1, 1.0]]).is_err());
        let singular = SymMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert!(matches!(cholesky(&singular), Err(Error::NotSpd { pivot: 1, .. })));
        let indefinite = SymMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(matches!(cholesky(&indefinite), Err(Error::NotSpd { .. })));
    }

    #[test]
    fn simple_solves() {
        let b = [1.0, -2.0, 3.5];
        assert_eq!(solve_spd(&SymMatrix::identity(3), &b).unwrap(), b.to_vec());
        let x = solve_spd(&SymMatrix::diagonal(&[2.0, 2.0]), &[1.0, 1.0]).unwrap();
        assert!(x.iter().all(|v| (v - 0.5).abs() < 1e-15));
        assert!(solve_spd(&SymMatrix::identity(2), &[1.0]).is_err());
    }

    #[test]
    fn quad_forms() {
        let r = [1.0, 2.0, -2.0];
        assert!((quad_form_inv(&SymMatrix::identity(3), &r).unwrap() - 9.0).abs() < 1e-14);
        assert_eq!(quad_form_inv(&SymMatrix::identity(3), &[0.0; 3]).unwrap(), 0.0);
        assert_eq!(quad_form_inv(&SymMatrix::diagonal(&[4.0]), &[2.0]).unwrap(), 1.0);
    }

    #[test]
    fn mvn_identity_uncorrelated() {
        let mut rng = RngStream::new(5, 0).rng();
        let m = SymMatrix::identity(2);
        let chol = cholesky(&m).unwrap();
        let reps = 100_000;
        let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
        for _ in 0..reps {
            let z = sample_mvn_with(&mut rng, &chol);
            sxy += z[0] * z[1];
            sxx += z[0] * z[0];
            syy += z[1] * z[1];
        }
        let corr = sxy / (sxx * syy).sqrt();
        assert!(corr.abs() < 0.02, "corr = {corr}");
    }

    #[test]
    fn mvn_matches_covariance() {
        let mut rng = RngStream::new(5, 1).rng();
        let m = SymMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let chol = cholesky(&m).unwrap();
        let reps = 100_000;
        let mut s = [0.0; 3];
        for _ in 0..reps {
            let z = sample_mvn_with(&mut rng, &chol);
            s[0] += z[0] * z[0];
            s[1] += z[0] * z[1];
            s[2] += z[1] * z[1];
        }
        let r = reps as f64;
        assert!((s[2] / r - 2.0).abs() < 0.05);
        assert!((s[1] / r - 1.0).abs() < 0.05);
        assert!((s[0] / r - 1.0).abs() < 0.05);
        let bad = SymMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(sample_mvn_zero(&mut rng, &bad).is_err());
    }

    fn random_spd(k: usize, entries: &[f64]) -> SymMatrix {
        // A Aᵀ + 0.1 I
        SymMatrix::from_fn(k, |i, j| {
            let dot: f64 = (0..k).map(|t| entries[i * k + t] * entries[j * k + t]).sum();
            dot + if i == j { 0.1 } else { 0.0 }
        })
    }

    proptest! {
        #[test]
        fn cholesky_round_trip(k in 2usize..=20, seed in any::<u64>()) {
            let mut rng = RngStream::new(seed, 0).rng();
            let entries: Vec<f64> = (0..k * k).map(|_| rng.random_range(-1.0..1.0)).collect();
            let m = random_spd(k, &entries);
            let l = cholesky(&m).unwrap();
            let scale = m.max_diagonal();
            prop_assert!(max_abs_diff(&l.reconstruct(), &m) <= 1e-10 * scale);

            let b: Vec<f64> = (0..k).map(|_| rng.random_range(-5.0..5.0)).collect();
            let x = l.solve(&b).unwrap();
            let back = m.mul_vec(&x);
            let bmax = b.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
            for (u, v) in back.iter().zip(&b) {
                prop_assert!((u - v).abs() <= 1e-9 * bmax);
            }

            // rᵀ (c m)⁻¹ r = rᵀ m⁻¹ r / c
            let c = rng.random_range(0.01..100.0);
            let q = quad_form_inv(&m, &b).unwrap();
            let qc = quad_form_inv(&m.scaled(c), &b).unwrap();
            prop_assert!(q >= 0.0);
            prop_assert!((qc - q / c).abs() <= 1e-9 * (q / c).max(1e-300));
            // quad form agrees with rᵀ x for x = m⁻¹ r
            let rx: f64 = b.iter().zip(&x).map(|(a, b)| a * b).sum();
            prop_assert!((rx - q).abs() <= 1e-9 * q.max(1.0));
        }
    }
}
