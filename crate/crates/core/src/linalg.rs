//! Dense vector helpers, the constraint Jacobian and the nonnegative dual vector.
//!
//! Decision vectors are plain `Vec<T>`; the functions here operate on slices so
//! callers never need to clone just to take a norm or a dot product.

use crate::error::{LlpError, Result};
use crate::scalar::Scalar;

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

pub fn norm<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

pub fn dist<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum::<T>().sqrt()
}

pub fn sub<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

pub fn add<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x + y).collect()
}

pub fn scale<T: Scalar>(a: &[T], s: T) -> Vec<T> {
    a.iter().map(|&x| x * s).collect()
}

/// `y += s * x`
pub fn axpy<T: Scalar>(y: &mut [T], s: T, x: &[T]) {
    debug_assert_eq!(y.len(), x.len());
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi = *yi + s * xi;
    }
}

pub fn add_assign<T: Scalar>(y: &mut [T], x: &[T]) {
    axpy(y, T::one(), x);
}

/// Elementwise `max(0, v_i)`, the Euclidean projection onto the nonnegative orthant.
pub fn positive_part<T: Scalar>(v: &[T]) -> Vec<T> {
    v.iter().map(|&x| x.max(T::zero())).collect()
}

pub fn is_finite<T: Scalar>(v: &[T]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Rescales `v` in place so that `‖v‖ ≤ radius`.
pub fn clip_norm<T: Scalar>(v: &mut [T], radius: T) {
    let n = norm(v);
    if n > radius && n > T::zero() {
        let s = radius / n;
        v.iter_mut().for_each(|x| *x = *x * s);
    }
}

/// Row-major `rows × cols` matrix holding `∂g_j/∂x_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jacobian<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Jacobian<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Jacobian {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            LlpError::check_dim("jacobian row", c, row.len())?;
            data.extend(row);
        }
        Ok(Jacobian { rows: r, cols: c, data })
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        LlpError::check_dim("jacobian data", rows * cols, data.len())?;
        Ok(Jacobian { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, j: usize) -> &[T] {
        &self.data[j * self.cols..(j + 1) * self.cols]
    }

    pub fn row_mut(&mut self, j: usize) -> &mut [T] {
        &mut self.data[j * self.cols..(j + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    /// `J x`, a `rows`-vector.
    pub fn apply(&self, x: &[T]) -> Vec<T> {
        (0..self.rows).map(|j| dot(self.row(j), x)).collect()
    }

    /// `Jᵀ w`, a `cols`-vector. This is the `δᵀλ` contraction used throughout.
    pub fn transpose_apply(&self, w: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.cols];
        for (j, &wj) in w.iter().enumerate() {
            if wj != T::zero() {
                axpy(&mut out, wj, self.row(j));
            }
        }
        out
    }

    pub fn sub(&self, other: &Jacobian<T>) -> Jacobian<T> {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Jacobian {
            rows: self.rows,
            cols: self.cols,
            data: sub(&self.data, &other.data),
        }
    }

    pub fn add(&self, other: &Jacobian<T>) -> Jacobian<T> {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Jacobian {
            rows: self.rows,
            cols: self.cols,
            data: add(&self.data, &other.data),
        }
    }

    pub fn scaled(&self, s: T) -> Jacobian<T> {
        Jacobian {
            rows: self.rows,
            cols: self.cols,
            data: scale(&self.data, s),
        }
    }

    /// Frobenius norm; an upper bound on the spectral norm.
    pub fn frobenius(&self) -> T {
        norm(&self.data)
    }

    pub fn is_finite(&self) -> bool {
        is_finite(&self.data)
    }
}

/// Lagrange multipliers, every entry nonnegative and finite.
#[derive(Debug, Clone, PartialEq)]
pub struct DualVector<T>(Vec<T>);

impl<T: Scalar> DualVector<T> {
    pub fn zeros(d: usize) -> Self {
        DualVector(vec![T::zero(); d])
    }

    pub fn new(entries: Vec<T>) -> Result<Self> {
        if entries.iter().all(|&x| x >= T::zero() && x.is_finite()) {
            Ok(DualVector(entries))
        } else {
            Err(LlpError::config("dual vector entries must be finite and nonnegative"))
        }
    }

    /// Builds a dual vector by projecting onto the nonnegative orthant.
    pub fn from_positive_part(v: &[T]) -> Self {
        DualVector(positive_part(v))
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn norm(&self) -> T {
        norm(&self.0)
    }

    pub fn into_inner(self) -> Vec<T> {
        self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positive_part_examples() {
        assert_eq!(positive_part(&[3.0, -2.0]), vec![3.0, 0.0]);
        assert_eq!(positive_part(&[0.0, 0.0]), vec![0.0, 0.0]);
        assert_eq!(positive_part(&[-1.0, -1.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn transpose_apply_contracts_rows() {
        let j = Jacobian::from_rows(vec![vec![0.5, 0.5], vec![1.0, -1.0]]).unwrap();
        assert_eq!(j.transpose_apply(&[2.0, 0.0]), vec![1.0, 1.0]);
        assert_eq!(j.apply(&[1.0, 1.0]), vec![1.0, 0.0]);
    }

    #[test]
    fn ragged_rows_rejected() {
        assert!(Jacobian::from_rows(vec![vec![1.0], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn dual_vector_rejects_negative() {
        assert!(DualVector::new(vec![1.0, -0.1]).is_err());
        assert!(DualVector::new(vec![f64::NAN]).is_err());
        assert_eq!(DualVector::from_positive_part(&[-1.0, 2.0]).as_slice(), &[0.0, 2.0]);
    }

    #[test]
    fn clip_norm_scales_down_only() {
        let mut v: Vec<f64> = vec![3.0, 4.0];
        clip_norm(&mut v, 10.0);
        assert_eq!(v, vec![3.0, 4.0]);
        clip_norm(&mut v, 1.0);
        assert!((v[0] - 0.6).abs() < 1e-15 && (v[1] - 0.8).abs() < 1e-15);
    }
}
