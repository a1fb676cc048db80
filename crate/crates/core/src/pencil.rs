//! Hankel pencils and their generalized eigenvalues.
//!
//! From `g = (g_1, ..., g_2n)` we form `H1(i,j) = g_{i+j-1}` and
//! `H2(i,j) = g_{i+j}` (1-based). When `g` is generated by `n` distinct nodes,
//! the monic polynomial `c_0 + ... + c_{n-1} x^{n-1} + x^n` satisfying
//! `sum_{i=0}^{n} c_i g_{i+k} = 0` for `k = 1..n` has exactly the
//! generalized eigenvalues of `H2 v = u H1 v` as roots. We compute the
//! eigenvalues that way: one `n x n` Hankel solve plus polynomial rooting.

use num_complex::{Complex, Complex64};

use crate::error::{Error, Result};
use crate::newton::{roots_of_monic, MonicPolynomial};
use crate::scalar::{max_abs, Real};

/// Default rank-deficiency threshold on the pivot ratio of the Hankel solve.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct HankelPencil<T> {
    source: Vec<T>,
    n: usize,
}

/// Eigenvalues of a pencil together with what was discarded to get them.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T> {
    /// Real parts, sorted ascending.
    pub values: Vec<T>,
    /// Largest imaginary part among the roots.
    pub imag_max: f64,
    /// Smallest over largest pivot of the Hankel factorization.
    pub pivot_ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PencilOptions {
    /// Absolute tolerance on imaginary parts; `None` selects
    /// `1e-6 * max(1, max |g_i|)`.
    pub imag_tol: Option<f64>,
    pub rank_tol: f64,
}

impl Default for PencilOptions {
    fn default() -> Self {
        Self {
            imag_tol: None,
            rank_tol: DEFAULT_RANK_TOL,
        }
    }
}

pub fn build_pencil<T: Real>(g: &[T]) -> Result<HankelPencil<T>> {
    HankelPencil::new(g.to_vec())
}

impl<T: Real> HankelPencil<T> {
    pub fn new(source: Vec<T>) -> Result<Self> {
        if source.is_empty() || !source.len().is_multiple_of(2) {
            return Err(Error::InvalidInput(format!(
                "Hankel pencil needs an even, nonzero number of entries; got {}",
                source.len()
            )));
        }
        let n = source.len() / 2;
        Ok(Self { source, n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn source(&self) -> &[T] {
        &self.source
    }

    /// `H1` as rows, entry `(i, j) = g_{i+j-1}` (1-based).
    pub fn h1(&self) -> Vec<Vec<T>> {
        self.hankel(0)
    }

    /// `H2` as rows, entry `(i, j) = g_{i+j}` (1-based).
    pub fn h2(&self) -> Vec<Vec<T>> {
        self.hankel(1)
    }

    fn hankel(&self, shift: usize) -> Vec<Vec<T>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.source[i + j + shift]).collect())
            .collect()
    }

    /// `max |g_i|`, the scale used by the default tolerances.
    pub fn scale(&self) -> f64 {
        max_abs(&self.source)
    }

    /// Monic polynomial annihilating the shifted windows of `g`, returned with
    /// the pivot ratio of the solve.
    pub fn char_coeffs(&self, rank_tol: f64) -> Result<(MonicPolynomial<T>, f64)> {
        let n = self.n;
        let rhs: Vec<T> = (0..n).map(|k| -self.source[n + k]).collect();
        let (lower, pivot_ratio) = lu_solve(self.h1(), rhs)?;
        if !(pivot_ratio >= rank_tol) {
            return Err(Error::Degenerate {
                pivot_ratio,
                threshold: rank_tol,
            });
        }
        Ok((MonicPolynomial::from_lower(lower)?, pivot_ratio))
    }

    /// Residuals `sum_{i=0}^{n} c_i g_{i+k}` for `k = 1..n`.
    pub fn annihilation_residuals(&self, p: &MonicPolynomial<T>) -> Vec<f64> {
        let c = p.coeffs();
        (0..self.n)
            .map(|k| {
                c.iter()
                    .enumerate()
                    .fold(T::zero(), |acc, (i, &ci)| acc + ci * self.source[i + k])
                    .abs()
                    .as_f64()
            })
            .collect()
    }

    pub fn default_imag_tol(&self) -> f64 {
        1e-6 * self.scale().max(1.0)
    }

    /// Real generalized eigenvalues of `(H2, H1)`, sorted ascending.
    pub fn generalized_eigenvalues(&self, opts: &PencilOptions) -> Result<Spectrum<T>> {
        let (poly, pivot_ratio) = self.char_coeffs(opts.rank_tol)?;
        let roots = roots_of_monic(&poly)?;
        let imag_tol = opts.imag_tol.unwrap_or_else(|| self.default_imag_tol());
        let imag_max = roots
            .iter()
            .map(|z| z.im.abs().as_f64())
            .fold(0.0, f64::max);
        if !(imag_max <= imag_tol) {
            let roots = roots
                .iter()
                .filter(|z| !(z.im.abs().as_f64() <= imag_tol))
                .map(to_complex64)
                .collect();
            return Err(Error::Infeasible { roots, imag_tol });
        }
        let mut values: Vec<T> = roots.iter().map(|z| z.re).collect();
        values.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        Ok(Spectrum {
            values,
            imag_max,
            pivot_ratio,
        })
    }
}

fn to_complex64<T: Real>(z: &Complex<T>) -> Complex64 {
    Complex64::new(z.re.as_f64(), z.im.as_f64())
}

/// Gaussian elimination with partial pivoting. Returns the solution and the
/// ratio of smallest to largest pivot magnitude.
pub(crate) fn lu_solve<T: Real>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Result<(Vec<T>, f64)> {
    let n = b.len();
    if a.len() != n {
        return Err(Error::Dimension {
            expected: n,
            found: a.len(),
        });
    }
    let mut pivots = Vec::with_capacity(n);
    for col in 0..n {
        let (best, _) =
            (col..n)
                .map(|r| (r, a[r][col].abs()))
                .fold(
                    (col, T::zero()),
                    |acc, cur| if cur.1 > acc.1 { cur } else { acc },
                );
        a.swap(col, best);
        b.swap(col, best);
        let piv = a[col][col];
        pivots.push(piv.abs().as_f64());
        if piv == T::zero() || !piv.is_finite() {
            return Ok((vec![T::nan(); n], 0.0));
        }
        for r in (col + 1)..n {
            let f = a[r][col].quot(piv);
            if f == T::zero() {
                continue;
            }
            let (upper, lower) = a.split_at_mut(r);
            for (x, &v) in lower[0][col..].iter_mut().zip(&upper[col][col..]) {
                *x = *x - f * v;
            }
            let v = b[col];
            b[r] = b[r] - f * v;
        }
    }
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let acc = ((i + 1)..n).fold(b[i], |acc, j| acc - a[i][j] * x[j]);
        x[i] = acc.quot(a[i][i]);
    }
    let largest = pivots.iter().copied().fold(0.0, f64::max);
    let smallest = pivots.iter().copied().fold(f64::INFINITY, f64::min);
    let ratio = if largest > 0.0 {
        smallest / largest
    } else {
        0.0
    };
    Ok((x, ratio))
}
