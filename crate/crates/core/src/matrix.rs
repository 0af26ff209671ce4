//! Minimal dense matrix support for the model-fitting kernels.
//!
//! The design matrices here are tall and narrow (tens of columns), so a
//! row-major store with a Cholesky solve covers everything the crate needs
//! without pulling in a linear-algebra dependency. All routines are generic
//! over [`Scalar`].

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Mat<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![S::zero(); rows * cols] }
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Self {
        let n = rows.len();
        let p = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(n * p);
        for r in &rows {
            assert_eq!(r.len(), p, "ragged rows");
            data.extend_from_slice(r);
        }
        Mat { rows: n, cols: p, data }
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [S] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> S {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: S) {
        self.data[i * self.cols + j] = v;
    }

    /// `self^T * diag(w) * self` — the weighted Gram matrix (p x p).
    pub fn weighted_gram(&self, w: &[S]) -> Mat<S> {
        assert_eq!(w.len(), self.rows);
        let p = self.cols;
        let mut out = Mat::zeros(p, p);
        for (i, &wi) in w.iter().enumerate() {
            let row = self.row(i);
            for a in 0..p {
                let wa = wi * row[a];
                if wa == S::zero() {
                    continue;
                }
                let upper = &mut out.data[a * p + a..(a + 1) * p];
                for (o, &rb) in upper.iter_mut().zip(&row[a..]) {
                    *o += wa * rb;
                }
            }
        }
        // Mirror the upper triangle.
        for a in 0..p {
            for b in 0..a {
                out.data[a * p + b] = out.data[b * p + a];
            }
        }
        out
    }

    /// `self^T * v` for a length-`rows` vector.
    pub fn t_mul_vec(&self, v: &[S]) -> Vec<S> {
        assert_eq!(v.len(), self.rows);
        let mut out = vec![S::zero(); self.cols];
        for (i, &vi) in v.iter().enumerate() {
            if vi == S::zero() {
                continue;
            }
            for (j, &x) in self.row(i).iter().enumerate() {
                out[j] += x * vi;
            }
        }
        out
    }

    /// `self * v` for a length-`cols` vector.
    pub fn mul_vec(&self, v: &[S]) -> Vec<S> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }
}

pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Cholesky factorisation of a symmetric positive-definite matrix.
///
/// Errors with `singular-information` when a pivot is not strictly positive.
#[derive(Debug)]
pub struct Cholesky<S> {
    l: Mat<S>,
}

impl<S: Scalar> Cholesky<S> {
    pub fn new(a: &Mat<S>) -> Result<Self> {
        assert_eq!(a.nrows(), a.ncols(), "Cholesky needs a square matrix");
        let n = a.nrows();
        let mut l = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let mut sum = a.get(i, j);
                for k in 0..j {
                    sum -= l.get(i, k) * l.get(j, k);
                }
                if i == j {
                    if sum <= S::zero() || !sum.is_finite() {
                        return Err(Error::SingularInformation);
                    }
                    l.set(i, j, sum.sqrt());
                } else {
                    l.set(i, j, sum / l.get(j, j));
                }
            }
        }
        Ok(Cholesky { l })
    }

    /// Solve `A x = b`.
    pub fn solve(&self, b: &[S]) -> Vec<S> {
        let n = self.l.nrows();
        assert_eq!(b.len(), n);
        // Forward: L y = b
        let mut y = vec![S::zero(); n];
        for i in 0..n {
            let mut sum = b[i];
            for (k, &yk) in y.iter().enumerate().take(i) {
                sum -= self.l.get(i, k) * yk;
            }
            y[i] = sum / self.l.get(i, i);
        }
        // Backward: L^T x = y
        let mut x = vec![S::zero(); n];
        for i in (0..n).rev() {
            let mut sum = y[i];
            for (k, &xk) in x.iter().enumerate().skip(i + 1) {
                sum -= self.l.get(k, i) * xk;
            }
            x[i] = sum / self.l.get(i, i);
        }
        x
    }

    /// Dense inverse of `A`, column by column.
    pub fn inverse(&self) -> Mat<S> {
        let n = self.l.nrows();
        let mut inv = Mat::zeros(n, n);
        let mut e = vec![S::zero(); n];
        for j in 0..n {
            e[j] = S::one();
            let col = self.solve(&e);
            e[j] = S::zero();
            for (i, &v) in col.iter().enumerate() {
                inv.set(i, j, v);
            }
        }
        inv
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gram_and_matvec_agree_with_hand_results() {
        let x = Mat::from_rows(vec![vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]);
        let w = vec![1.0, 1.0, 1.0];
        let g = x.weighted_gram(&w);
        assert_eq!(g.get(0, 0), 35.0);
        assert_eq!(g.get(0, 1), 44.0);
        assert_eq!(g.get(1, 0), 44.0);
        assert_eq!(g.get(1, 1), 56.0);
        assert_eq!(x.t_mul_vec(&[1.0, 0.0, 1.0]), vec![6.0, 8.0]);
        assert_eq!(x.mul_vec(&[1.0, 1.0]), vec![3.0, 7.0, 11.0]);
    }

    #[test]
    fn cholesky_solves_a_known_spd_system() {
        // A = [[4,2],[2,3]], b = [2,5] -> x = [-1/2, 2]
        let a: Mat<f64> = Mat::from_rows(vec![vec![4.0, 2.0], vec![2.0, 3.0]]);
        let x = Cholesky::new(&a).unwrap().solve(&[2.0, 5.0]);
        assert!((x[0] + 0.5).abs() < 1e-12 && (x[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn inverse_matches_the_adjugate_formula() {
        let a: Mat<f64> = Mat::from_rows(vec![vec![4.0, 2.0], vec![2.0, 3.0]]);
        let inv = Cholesky::new(&a).unwrap().inverse();
        // det = 8; inverse = [[3, -2], [-2, 4]] / 8
        for (got, want) in [
            (inv.get(0, 0), 3.0 / 8.0),
            (inv.get(0, 1), -2.0 / 8.0),
            (inv.get(1, 0), -2.0 / 8.0),
            (inv.get(1, 1), 4.0 / 8.0),
        ] {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_matrices_are_reported() {
        let a: Mat<f64> = Mat::from_rows(vec![vec![1.0, 1.0], vec![1.0, 1.0]]);
        assert_eq!(Cholesky::new(&a).unwrap_err().tag(), "singular-information");
    }

    #[test]
    fn kernels_run_at_f32() {
        let a = Mat::from_rows(vec![vec![4.0f32, 2.0], vec![2.0, 3.0]]);
        let x = Cholesky::new(&a).unwrap().solve(&[2.0, 5.0]);
        assert!((x[0] + 0.5).abs() < 1e-5 && (x[1] - 2.0).abs() < 1e-5);
    }
}
