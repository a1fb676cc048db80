//! Lower-triangular Toeplitz algebra.
//!
//! A lower-triangular Toeplitz matrix of order `p` is stored by its first
//! column `(x_1, ..., x_p)`; entry `(i, j)` is `x_{i-j+1}` for `i >= j` and
//! zero above the diagonal. These matrices form a commutative algebra that is
//! closed under products and inverses, so products and solves are again
//! expressed on first columns only.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Leading elements smaller than this in magnitude are treated as singular.
pub const SINGULAR_THRESHOLD: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq)]
pub struct LowerToeplitz<T> {
    column: Vec<T>,
}

impl<T: Real> LowerToeplitz<T> {
    pub fn new(column: Vec<T>) -> Result<Self> {
        if column.is_empty() {
            return Err(Error::InvalidInput(
                "lower Toeplitz column must have at least one entry".into(),
            ));
        }
        Ok(Self { column })
    }

    pub fn identity(p: usize) -> Self {
        assert!(p >= 1, "identity of order zero");
        let mut column = vec![T::zero(); p];
        column[0] = T::one();
        Self { column }
    }

    pub fn dim(&self) -> usize {
        self.column.len()
    }

    pub fn column(&self) -> &[T] {
        &self.column
    }

    pub fn into_column(self) -> Vec<T> {
        self.column
    }

    /// Entry `(i, j)` with 0-based indices.
    pub fn entry(&self, i: usize, j: usize) -> T {
        if i >= j {
            self.column[i - j]
        } else {
            T::zero()
        }
    }

    /// Row-major dense copy of the matrix.
    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let p = self.dim();
        (0..p)
            .map(|i| (0..p).map(|j| self.entry(i, j)).collect())
            .collect()
    }

    /// Matrix-vector product. Symmetric in its arguments: `T(x) y == T(y) x`.
    pub fn matvec(&self, y: &[T]) -> Result<Vec<T>> {
        check_dim(self.dim(), y.len())?;
        Ok(convolve_lower(&self.column, y))
    }

    /// Product of two lower Toeplitz matrices, `T(x) T(y) = T(T(x) y)`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        Ok(Self {
            column: convolve_lower(&self.column, &other.column),
        })
    }

    /// Solves `T(x) y = rhs` by forward substitution in `O(p^2)`.
    pub fn solve(&self, rhs: &[T]) -> Result<Vec<T>> {
        check_dim(self.dim(), rhs.len())?;
        let lead = self.column[0];
        if !(lead.abs().as_f64() >= SINGULAR_THRESHOLD) {
            return Err(Error::Singular {
                value: lead.as_f64(),
            });
        }
        let mut y = Vec::with_capacity(rhs.len());
        for (i, &r) in rhs.iter().enumerate() {
            let acc = y
                .iter()
                .enumerate()
                .fold(r, |acc, (j, &yj)| acc - self.column[i - j] * yj);
            y.push(acc.quot(lead));
        }
        Ok(y)
    }

    /// First column of the inverse, which is again lower Toeplitz.
    pub fn inverse(&self) -> Result<Self> {
        let mut e1 = vec![T::zero(); self.dim()];
        e1[0] = T::one();
        Ok(Self {
            column: self.solve(&e1)?,
        })
    }
}

/// The diagonal scaling matrix `diag(0, 1, ..., p-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScalingDiag {
    pub p: usize,
}

impl ScalingDiag {
    pub fn new(p: usize) -> Self {
        Self { p }
    }

    pub fn apply<T: Real>(&self, x: &[T]) -> Result<Vec<T>> {
        check_dim(self.p, x.len())?;
        Ok(lambda_apply(x))
    }
}

/// `(Λx)_i = (i-1) x_i` for 1-based `i`.
pub fn lambda_apply<T: Real>(x: &[T]) -> Vec<T> {
    x.iter()
        .enumerate()
        .map(|(i, &v)| T::from_usize(i) * v)
        .collect()
}

fn convolve_lower<T: Real>(x: &[T], y: &[T]) -> Vec<T> {
    (0..x.len())
        .map(|i| (0..=i).fold(T::zero(), |acc, j| acc + x[i - j] * y[j]))
        .collect()
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Dimension { expected, found })
    }
}
