//! Monic polynomials, power sums and Newton's relations.
//!
//! For `P(x) = c_0 + c_1 x + ... + c_n x^n` with roots `x_1..x_n` and power
//! sums `S_k = sum_j x_j^k` (`S_0 = n`), Newton's relations read
//!
//! ```text
//! c_k S_0 + c_{k+1} S_1 + ... + c_n S_{n-k} = k c_k,   k = 0..n.
//! ```
//!
//! Everything here is normalised to `c_n = 1`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{max_abs, Real};

/// Iteration budget for [`roots_of_monic`].
pub const ROOT_ITERATIONS: usize = 500;

#[derive(Debug, Clone, PartialEq)]
pub struct MonicPolynomial<T> {
    coeffs: Vec<T>,
}

impl<T: Real> MonicPolynomial<T> {
    /// Builds from `(c_0, ..., c_n)`. The last coefficient must be exactly one.
    pub fn new(coeffs: Vec<T>) -> Result<Self> {
        if coeffs.len() < 2 {
            return Err(Error::InvalidInput(
                "monic polynomial must have degree at least 1".into(),
            ));
        }
        if coeffs[coeffs.len() - 1] != T::one() {
            return Err(Error::InvalidInput(format!(
                "leading coefficient must be 1, got {:?}",
                coeffs[coeffs.len() - 1]
            )));
        }
        Ok(Self { coeffs })
    }

    /// Builds from the lower coefficients `(c_0, ..., c_{n-1})`, appending `c_n = 1`.
    pub fn from_lower(mut lower: Vec<T>) -> Result<Self> {
        lower.push(T::one());
        Self::new(lower)
    }

    /// `prod_j (x - r_j)`.
    pub fn from_roots(roots: &[T]) -> Result<Self> {
        let mut coeffs = vec![T::one()];
        for &r in roots {
            let mut next = vec![T::zero(); coeffs.len() + 1];
            for (i, &c) in coeffs.iter().enumerate() {
                next[i + 1] = next[i + 1] + c;
                next[i] = next[i] - r * c;
            }
            coeffs = next;
        }
        Self::new(coeffs)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// Coefficients from the leading one down, `(c_n, ..., c_0)`.
    pub fn reversed(&self) -> Vec<T> {
        self.coeffs.iter().rev().copied().collect()
    }

    /// Horner evaluation.
    pub fn eval(&self, x: T) -> T {
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, &c| acc * x + c)
    }

    pub fn eval_complex(&self, z: Complex<T>) -> Complex<T> {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex::new(T::zero(), T::zero()), |acc, &c| {
                acc * z + Complex::new(c, T::zero())
            })
    }
}

/// Power sums `(S_0, S_1, ..., S_m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSums<T> {
    values: Vec<T>,
}

impl<T: Real> PowerSums<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        let Some(&s0) = values.first() else {
            return Err(Error::InvalidInput("power sums need at least S_0".into()));
        };
        if !(s0 >= T::zero()) || s0.fract() != T::zero() {
            return Err(Error::InvalidInput(format!(
                "S_0 must be a nonnegative integer, got {s0:?}"
            )));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// The count `S_0`.
    pub fn count(&self) -> usize {
        self.values[0].as_f64() as usize
    }

    /// Highest power present.
    pub fn max_power(&self) -> usize {
        self.values.len() - 1
    }
}

pub fn power_sums_from_roots<T: Real>(roots: &[T], m_max: usize) -> PowerSums<T> {
    let mut values = vec![T::zero(); m_max + 1];
    values[0] = T::from_usize(roots.len());
    for &r in roots {
        let mut pw = T::one();
        for v in values.iter_mut().skip(1) {
            pw = pw * r;
            *v = *v + pw;
        }
    }
    PowerSums { values }
}

/// Solves Newton's relations for the monic polynomial whose roots have the
/// given power sums `S_0..S_n`.
pub fn coeffs_from_power_sums<T: Real>(s: &PowerSums<T>) -> Result<MonicPolynomial<T>> {
    let n = s.count();
    if n == 0 || s.max_power() != n {
        return Err(Error::InvalidInput(format!(
            "need exactly S_0..S_n with S_0 = n >= 1; got S_0 = {n} and {} sums",
            s.values.len()
        )));
    }
    let sv = &s.values;
    let mut c = vec![T::zero(); n + 1];
    c[n] = T::one();
    // Relation k: (S_0 - k) c_k = -sum_{i>k} c_i S_{i-k}.
    for k in (0..n).rev() {
        let acc = ((k + 1)..=n).fold(T::zero(), |acc, i| acc + c[i] * sv[i - k]);
        c[k] = (-acc).quot(T::from_usize(n - k));
    }
    MonicPolynomial::new(c)
}

/// Power sums `S_0..S_{m_max}` of the roots of `p`, by the Newton recurrence
/// (extended past `n` via `x^{m-n} p(x)`).
pub fn power_sums_from_coeffs<T: Real>(p: &MonicPolynomial<T>, m_max: usize) -> PowerSums<T> {
    let n = p.degree();
    let c = p.coeffs();
    let mut s = vec![T::zero(); m_max + 1];
    s[0] = T::from_usize(n);
    for m in 1..=m_max {
        s[m] = if m <= n {
            let tail = (1..m).fold(T::zero(), |acc, j| acc + c[n - m + j] * s[j]);
            -(T::from_usize(m) * c[n - m]) - tail
        } else {
            -(0..n).fold(T::zero(), |acc, i| acc + c[i] * s[m - n + i])
        };
    }
    PowerSums { values: s }
}

/// Residuals of the `n+1` Newton relations for coefficients `p` and sums `s`.
pub fn newton_residuals<T: Real>(p: &MonicPolynomial<T>, s: &PowerSums<T>) -> Vec<f64> {
    let n = p.degree();
    let c = p.coeffs();
    let sv = s.values();
    (0..=n)
        .map(|k| {
            let lhs = (k..=n).fold(T::zero(), |acc, i| acc + c[i] * sv[i - k]);
            (lhs - T::from_usize(k) * c[k]).abs().as_f64()
        })
        .collect()
}

pub fn poly_eval<T: Real>(p: &MonicPolynomial<T>, x: T) -> T {
    p.eval(x)
}

/// All `n` complex roots, by Aberth-Ehrlich simultaneous iteration.
pub fn roots_of_monic<T: Real>(p: &MonicPolynomial<T>) -> Result<Vec<Complex<T>>> {
    let n = p.degree();
    let c = p.coeffs();
    let zero = T::zero();
    if n == 1 {
        return Ok(vec![Complex::new(-c[0], zero)]);
    }

    // Fujiwara-type radius: all roots lie within 2 max |c_k|^(1/(n-k)).
    let radius = (0..n)
        .map(|k| c[k].abs().as_f64().powf(1.0 / (n - k) as f64))
        .fold(0.0, f64::max);
    if radius == 0.0 {
        return Ok(vec![Complex::new(zero, zero); n]);
    }
    let center = (-c[n - 1]).quot(T::from_usize(n));
    let mut z: Vec<Complex<T>> = (0..n)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4;
            Complex::new(
                center + T::real(radius * theta.cos()),
                T::real(radius * theta.sin()),
            )
        })
        .collect();

    let abs_coeffs: Vec<T> = c.iter().map(|v| v.abs()).collect();
    let roundoff = T::real(4.0 * (n as f64 + 1.0) * T::UNIT_ROUNDOFF);
    let step_tol = T::real(4.0 * T::UNIT_ROUNDOFF);
    let mut done = vec![false; n];
    let one = Complex::new(T::one(), zero);

    for _ in 0..ROOT_ITERATIONS {
        for k in 0..n {
            if done[k] {
                continue;
            }
            let zk = z[k];
            let (val, deriv) = horner_with_derivative(c, zk);
            let modulus = zk.norm();
            // Rounding-error bound of Horner's scheme at |z|.
            let bound = abs_coeffs
                .iter()
                .rev()
                .fold(zero, |acc, &a| acc * modulus + a)
                * roundoff;
            if val.norm() <= bound {
                done[k] = true;
                continue;
            }
            let ratio = cdiv(val, deriv);
            let repulse = (0..n)
                .filter(|&j| j != k)
                .fold(Complex::new(zero, zero), |acc, j| {
                    acc + cdiv(one, zk - z[j])
                });
            let step = cdiv(ratio, one - ratio * repulse);
            if !(step.re.is_finite() && step.im.is_finite()) {
                continue;
            }
            z[k] = zk - step;
            if step.norm() <= step_tol * z[k].norm() {
                done[k] = true;
            }
        }
        if done.iter().all(|&d| d) {
            return Ok(z);
        }
    }

    let scale = T::real(1e-8 * max_abs(c).max(1.0));
    if z.iter().all(|&r| p.eval_complex(r).norm() <= scale) {
        return Ok(z);
    }
    Err(Error::NonConvergence {
        coeffs: c.iter().map(|v| v.as_f64()).collect(),
        iterations: ROOT_ITERATIONS,
    })
}

fn horner_with_derivative<T: Real>(c: &[T], z: Complex<T>) -> (Complex<T>, Complex<T>) {
    let zero = Complex::new(T::zero(), T::zero());
    c.iter().rev().fold((zero, zero), |(val, der), &ck| {
        (val * z + Complex::new(ck, T::zero()), der * z + val)
    })
}

/// Complex division with magnitude scaling (Smith's algorithm).
fn cdiv<T: Real>(a: Complex<T>, b: Complex<T>) -> Complex<T> {
    if b.re.abs() >= b.im.abs() {
        let r = b.im.quot(b.re);
        let den = b.re + b.im * r;
        Complex::new((a.re + a.im * r).quot(den), (a.im - a.re * r).quot(den))
    } else {
        let r = b.re.quot(b.im);
        let den = b.re * r + b.im;
        Complex::new((a.re * r + a.im).quot(den), (a.im * r - a.re).quot(den))
    }
}

/// Sorts complex values by real part, then imaginary part.
pub fn sort_complex<T: Real>(xs: &mut [Complex<T>]) {
    xs.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.im.partial_cmp(&b.im).unwrap_or(std::cmp::Ordering::Equal))
    });
}
