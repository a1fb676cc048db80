//! Forward and inverse finite Markov moment problem.
//!
//! A density taking values in `{0, 1}` on `]0, X[`, equal to one on
//! `(u_1, u_2), (u_3, u_4), ..., (u_{K-1}, u_K)`, has scaled moments
//!
//! ```text
//! m_k = k * int_0^X f(t) t^(k-1) dt = sum_j u_{2j}^k - u_{2j-1}^k,   k = 1..K.
//! ```
//!
//! The inverse map solves two lower-triangular systems `A a = m`, `B b = -m`
//! whose matrices carry `k` on the diagonal and `-m`, `+m` below it; the
//! generalized eigenvalues of the Hankel pencil built from `b` are the left
//! endpoints `u_1, u_3, ...` and those of the pencil built from `a` are the
//! right endpoints `u_2, u_4, ...`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use twofloat::TwoFloat;

use crate::error::{Error, Result};
use crate::pencil::{HankelPencil, PencilOptions};
use crate::scalar::{lift, lower, max_abs, Real};
use crate::toeplitz::{lambda_apply, LowerToeplitz};

/// Relative tolerance below which out-of-order recovered points are swapped back.
pub const DEFAULT_TIE_TOL: f64 = 1e-9;

/// Relative tolerance on the `A a = m`, `B b = -m` postcondition.
pub const AUX_RESIDUAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct MomentVector {
    values: Vec<f64>,
}

impl MomentVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || !values.len().is_multiple_of(2) {
            return Err(Error::InvalidInput(format!(
                "the number of moments K must be even and at least 2 (odd K is not supported); got K = {}",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("moment {v} is not finite")));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `K`.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `n = K / 2`.
    pub fn intervals(&self) -> usize {
        self.values.len() / 2
    }

    /// Moments of the same problem with every switch point multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        let mut pw = 1.0;
        let values = self
            .values
            .iter()
            .map(|m| {
                pw *= s;
                m * pw
            })
            .collect();
        Self { values }
    }

    /// `(0, m_1, ..., m_K)`.
    pub fn augmented<T: Real>(&self) -> Vec<T> {
        std::iter::once(T::zero())
            .chain(self.values.iter().map(|&v| T::real(v)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwitchConfiguration {
    points: Vec<f64>,
}

impl SwitchConfiguration {
    /// Requires an even, nonempty list with `0 <= u_1 <= ... <= u_K`.
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() || !points.len().is_multiple_of(2) {
            return Err(Error::InvalidInput(format!(
                "switch configuration needs an even, nonzero number of points; got {}",
                points.len()
            )));
        }
        if let Some(v) = points.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "switch point {v} is not finite"
            )));
        }
        if points[0] < 0.0 {
            return Err(Error::InvalidInput(format!(
                "switch points must be nonnegative; u_1 = {}",
                points[0]
            )));
        }
        if let Some(i) = points.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::InvalidInput(format!(
                "switch points must be nondecreasing; u_{} = {} > u_{} = {}",
                i + 1,
                points[i],
                i + 2,
                points[i + 1]
            )));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Right end of the support, `X = u_K`.
    pub fn support_end(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    /// Left endpoints `x_j = u_{2j-1}`.
    pub fn left_points(&self) -> Vec<f64> {
        self.points.iter().step_by(2).copied().collect()
    }

    /// Right endpoints `y_j = u_{2j}`.
    pub fn right_points(&self) -> Vec<f64> {
        self.points.iter().skip(1).step_by(2).copied().collect()
    }

    /// Smallest distance between consecutive points.
    pub fn min_gap(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            points: self.points.iter().map(|u| u * s).collect(),
        }
    }

    /// `max_i |u_i - other_i|`.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        if self.len() != other.len() {
            return Err(Error::Dimension {
                expected: self.len(),
                found: other.len(),
            });
        }
        Ok(self
            .points
            .iter()
            .zip(&other.points)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

/// Solutions of `A a = m` and `B b = -m`.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxVectors<T> {
    pub a: Vec<T>,
    pub b: Vec<T>,
}

impl<T: Real> AuxVectors<T> {
    /// `(1, a_1, ..., a_K)`.
    pub fn a_augmented(&self) -> Vec<T> {
        std::iter::once(T::one())
            .chain(self.a.iter().copied())
            .collect()
    }

    /// `(1, b_1, ..., b_K)`.
    pub fn b_augmented(&self) -> Vec<T> {
        std::iter::once(T::one())
            .chain(self.b.iter().copied())
            .collect()
    }

    /// Max-norm residuals of `T(m~) a~ = Λ a~` and `T(m~) b~ = -Λ b~`.
    pub fn identity_residuals(&self, m: &MomentVector) -> Result<(f64, f64)> {
        let tm = LowerToeplitz::new(m.augmented::<T>())?;
        let (ta, tb) = (self.a_augmented(), self.b_augmented());
        let ra = diff_norm(&tm.matvec(&ta)?, &lambda_apply(&ta), T::one());
        let rb = diff_norm(&tm.matvec(&tb)?, &lambda_apply(&tb), -T::one());
        Ok((ra, rb))
    }
}

fn diff_norm<T: Real>(lhs: &[T], rhs: &[T], sign: T) -> f64 {
    lhs.iter()
        .zip(rhs)
        .map(|(&l, &r)| (l - sign * r).abs().as_f64())
        .fold(0.0, f64::max)
}

/// Forward substitution for `A a = m` (`sign = 1`) or `B b = -m` (`sign = -1`).
fn solve_shifted<T: Real>(m: &[T], sign: T) -> Vec<T> {
    let mut x: Vec<T> = Vec::with_capacity(m.len());
    for k in 0..m.len() {
        let acc = (0..k).fold(m[k], |acc, j| acc + m[k - 1 - j] * x[j]);
        x.push((sign * acc).quot(T::from_usize(k + 1)));
    }
    x
}

pub fn solve_ab<T: Real>(m: &MomentVector) -> Result<AuxVectors<T>> {
    let mv: Vec<T> = lift(m.values());
    let aux = AuxVectors {
        a: solve_shifted(&mv, T::one()),
        b: solve_shifted(&mv, -T::one()),
    };
    if aux.a.iter().chain(&aux.b).any(|v| !v.is_finite()) {
        return Err(Error::Scaling(
            "non-finite entries in the auxiliary vectors".into(),
        ));
    }
    let (ra, rb) = aux.identity_residuals(m)?;
    let scale_a = 1.0 + max_abs(m.values()) * (1.0 + l1(&aux.a));
    let scale_b = 1.0 + max_abs(m.values()) * (1.0 + l1(&aux.b));
    if !(ra <= AUX_RESIDUAL_TOL * scale_a && rb <= AUX_RESIDUAL_TOL * scale_b) {
        return Err(Error::Scaling(format!(
            "triangular solve residuals {ra:e}, {rb:e} exceed tolerance"
        )));
    }
    Ok(aux)
}

fn l1<T: Real>(xs: &[T]) -> f64 {
    xs.iter().map(|v| v.abs().as_f64()).sum()
}

/// `m_k = sum_j u_{2j}^k - u_{2j-1}^k`, accumulated in double-double and
/// rounded once.
pub fn forward_moments(u: &SwitchConfiguration) -> MomentVector {
    let pts: Vec<TwoFloat> = lift(u.points());
    MomentVector {
        values: lower(&interval_moments(
            pts.chunks(2).map(|w| (w[0], w[1])),
            u.len(),
        )),
    }
}

/// Same map in working precision `T`, for callers that want the unrounded values.
pub fn forward_moments_in<T: Real>(points: &[T]) -> Vec<T> {
    interval_moments(points.chunks(2).map(|w| (w[0], w[1])), points.len())
}

fn interval_moments<T: Real>(intervals: impl Iterator<Item = (T, T)>, k_max: usize) -> Vec<T> {
    let mut m = vec![T::zero(); k_max];
    for (start, end) in intervals {
        let (mut ps, mut pe) = (T::one(), T::one());
        for mk in m.iter_mut() {
            ps = ps * start;
            pe = pe * end;
            *mk = *mk + (pe - ps);
        }
    }
    m
}

/// A `{0, 1}`-valued density on `]0, X[`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepDensity {
    support_end: f64,
    intervals: Vec<(f64, f64)>,
}

impl StepDensity {
    /// Intervals where the density is one: disjoint, ordered, inside `[0, X]`.
    pub fn new(support_end: f64, intervals: Vec<(f64, f64)>) -> Result<Self> {
        if !(support_end.is_finite() && support_end >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "support end must be finite and nonnegative, got {support_end}"
            )));
        }
        let mut prev_end = 0.0;
        for &(s, e) in &intervals {
            if !(s.is_finite() && e.is_finite() && prev_end <= s && s <= e && e <= support_end) {
                return Err(Error::InvalidInput(format!(
                    "interval ({s}, {e}) is not ordered, disjoint and inside [0, {support_end}]"
                )));
            }
            prev_end = e;
        }
        Ok(Self {
            support_end,
            intervals,
        })
    }

    pub fn support_end(&self) -> f64 {
        self.support_end
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn value_at(&self, t: f64) -> f64 {
        if self.intervals.iter().any(|&(s, e)| s < t && t < e) {
            1.0
        } else {
            0.0
        }
    }
}

/// `k * int_0^X f(t) t^(k-1) dt` for `k = 1..K`, in closed form per interval.
pub fn moments_from_density(f: &StepDensity, k: usize) -> Result<MomentVector> {
    if k == 0 || !k.is_multiple_of(2) {
        return Err(Error::InvalidInput(format!(
            "the number of moments K must be even and at least 2 (odd K is not supported); got K = {k}"
        )));
    }
    let intervals = f
        .intervals
        .iter()
        .map(|&(s, e)| (TwoFloat::from(s), TwoFloat::from(e)));
    MomentVector::new(lower(&interval_moments(intervals, k)))
}

pub fn density_from_switches(u: &SwitchConfiguration) -> StepDensity {
    let intervals = u
        .points()
        .chunks(2)
        .filter(|w| w[1] > w[0])
        .map(|w| (w[0], w[1]))
        .collect();
    StepDensity {
        support_end: u.support_end(),
        intervals,
    }
}

/// `max_k |m_k - forward_moments(u)_k|`.
pub fn residual(m: &MomentVector, u: &SwitchConfiguration) -> Result<f64> {
    if m.len() != u.len() {
        return Err(Error::Dimension {
            expected: m.len(),
            found: u.len(),
        });
    }
    let fwd = forward_moments(u);
    Ok(m.values()
        .iter()
        .zip(fwd.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Precision {
    Double,
    #[default]
    DoubleDouble,
}

impl Precision {
    /// Default pivot-ratio threshold for declaring a Hankel pencil degenerate.
    pub fn default_rank_tol(self) -> f64 {
        match self {
            Precision::Double => crate::pencil::DEFAULT_RANK_TOL,
            Precision::DoubleDouble => 1e-14,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InversionOptions {
    /// Imaginary-part tolerance; `None` uses `1e-6 * max(1, max |g|)` per pencil.
    pub imag_tol: Option<f64>,
    /// Residual above which the report carries a warning; `None` uses
    /// `1e-8 * max(1, max |m_k|)`.
    pub residual_tol: Option<f64>,
    /// Pivot-ratio threshold; `None` uses the precision's default.
    pub rank_tol: Option<f64>,
    /// Ordering violations below `tie_tol * X` are reordered silently.
    pub tie_tol: f64,
    pub precision: Precision,
}

impl Default for InversionOptions {
    fn default() -> Self {
        Self {
            imag_tol: None,
            residual_tol: None,
            rank_tol: None,
            tie_tol: DEFAULT_TIE_TOL,
            precision: Precision::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InversionStatus {
    Ok,
    IllConditionedWarning,
}

impl InversionStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            InversionStatus::Ok => "ok",
            InversionStatus::IllConditionedWarning => "ill_conditioned_warning",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InversionReport {
    pub residual_inf: f64,
    pub min_gap: f64,
    pub eig_imag_max: f64,
    /// Smaller of the two Hankel pivot ratios.
    pub pivot_ratio: f64,
    pub status: InversionStatus,
}

pub fn invert_moments(
    m: &MomentVector,
    opts: &InversionOptions,
) -> Result<(SwitchConfiguration, InversionReport)> {
    match opts.precision {
        Precision::Double => invert_in::<f64>(m, opts),
        Precision::DoubleDouble => invert_in::<TwoFloat>(m, opts),
    }
}

fn invert_in<T: Real>(
    m: &MomentVector,
    opts: &InversionOptions,
) -> Result<(SwitchConfiguration, InversionReport)> {
    let aux = solve_ab::<T>(m)?;
    let pencil_opts = PencilOptions {
        imag_tol: opts.imag_tol,
        rank_tol: opts.rank_tol.unwrap_or(opts.precision.default_rank_tol()),
    };
    let right = HankelPencil::new(aux.a)?.generalized_eigenvalues(&pencil_opts)?;
    let left = HankelPencil::new(aux.b)?.generalized_eigenvalues(&pencil_opts)?;

    let mut points: Vec<f64> = left
        .values
        .iter()
        .zip(&right.values)
        .flat_map(|(x, y)| [x.as_f64(), y.as_f64()])
        .collect();
    settle_order(&mut points, opts.tie_tol)?;
    let u = SwitchConfiguration::new(points)?;

    let residual_inf = residual(m, &u)?;
    let residual_tol = opts
        .residual_tol
        .unwrap_or(1e-8 * max_abs(m.values()).max(1.0));
    let status = if residual_inf <= residual_tol {
        InversionStatus::Ok
    } else {
        InversionStatus::IllConditionedWarning
    };
    let report = InversionReport {
        residual_inf,
        min_gap: u.min_gap().max(0.0),
        eig_imag_max: left.imag_max.max(right.imag_max),
        pivot_ratio: left.pivot_ratio.min(right.pivot_ratio),
        status,
    };
    Ok((u, report))
}

/// Checks interleaving `u_1 <= u_2 <= ...` and `u_1 >= 0`, repairing
/// violations no larger than `tie_tol * X`.
fn settle_order(points: &mut [f64], tie_tol: f64) -> Result<()> {
    let extent = points.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = tie_tol * extent;
    if let Some(i) = points.windows(2).position(|w| w[1] < w[0] - tol) {
        return Err(Error::Inconsistent(format!(
            "recovered points do not interleave: u_{} = {} > u_{} = {}",
            i + 1,
            points[i],
            i + 2,
            points[i + 1]
        )));
    }
    points.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    if points[0] < -tol {
        return Err(Error::Inconsistent(format!(
            "recovered point u_1 = {} is negative",
            points[0]
        )));
    }
    for p in points.iter_mut() {
        if *p < 0.0 {
            *p = 0.0;
        }
    }
    Ok(())
}

/// Crude support estimate `max_k |m_k|^(1/k)`, used when rescaling to `[0, 1]`.
pub fn estimate_support_end(m: &MomentVector) -> f64 {
    m.values()
        .iter()
        .enumerate()
        .map(|(i, v)| v.abs().powf(1.0 / (i + 1) as f64))
        .fold(0.0, f64::max)
}

/// Inverts after mapping the problem to roughly `[0, 1]` via `u -> u / X`.
/// `support_end` defaults to [`estimate_support_end`].
pub fn invert_rescaled(
    m: &MomentVector,
    support_end: Option<f64>,
    opts: &InversionOptions,
) -> Result<(SwitchConfiguration, InversionReport)> {
    let x = support_end.unwrap_or_else(|| estimate_support_end(m));
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::InvalidInput(format!(
            "domain scale must be positive and finite, got {x}"
        )));
    }
    let unit = m.scaled(1.0 / x);
    let unit_opts = InversionOptions {
        residual_tol: None,
        ..*opts
    };
    let (u_unit, unit_report) = invert_moments(&unit, &unit_opts)?;
    let u = u_unit.scaled(x);
    let residual_inf = residual(m, &u)?;
    let residual_tol = opts
        .residual_tol
        .unwrap_or(1e-8 * max_abs(m.values()).max(1.0));
    let status = if residual_inf <= residual_tol {
        unit_report.status
    } else {
        InversionStatus::IllConditionedWarning
    };
    let report = InversionReport {
        residual_inf,
        min_gap: u.min_gap().max(0.0),
        status,
        ..unit_report
    };
    Ok((u, report))
}

/// Random configuration on `[0, 1]` with `2n` points and all consecutive gaps
/// at least `gap`, uniform among such configurations.
pub fn random_configuration<R: Rng + ?Sized>(
    n: usize,
    gap: f64,
    rng: &mut R,
) -> Result<SwitchConfiguration> {
    let k = 2 * n;
    if n == 0 || !(gap >= 0.0 && gap * (k as f64) < 1.0) {
        return Err(Error::InvalidInput(format!(
            "need n >= 1 and 0 <= gap * 2n < 1; got n = {n}, gap = {gap}"
        )));
    }
    let slack = 1.0 - gap * (k - 1) as f64;
    let mut base: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..slack)).collect();
    base.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let points = base
        .iter()
        .enumerate()
        .map(|(i, b)| b + gap * i as f64)
        .collect();
    SwitchConfiguration::new(points)
}

/// Generator for trial `trial` of a seeded study, independent of how many
/// other trials run or in which order.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrialOutcome {
    Recovered { error: f64 },
    Failed { reason: String },
}

impl TrialOutcome {
    pub fn error(&self) -> Option<f64> {
        match self {
            TrialOutcome::Recovered { error } => Some(*error),
            TrialOutcome::Failed { .. } => None,
        }
    }

    pub fn status(&self) -> &str {
        match self {
            TrialOutcome::Recovered { .. } => "ok",
            TrialOutcome::Failed { reason } => reason,
        }
    }
}

/// Aggregate over trials. `worst` and `mean` cover recovered trials only and
/// are NaN when every trial failed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialStats {
    pub worst: f64,
    pub mean: f64,
    pub failures: usize,
}

impl TrialStats {
    pub fn from_outcomes(trials: &[TrialOutcome]) -> Self {
        let errors: Vec<f64> = trials.iter().filter_map(TrialOutcome::error).collect();
        let failures = trials.len() - errors.len();
        let (worst, mean) = if errors.is_empty() {
            (f64::NAN, f64::NAN)
        } else {
            (
                errors.iter().copied().fold(0.0, f64::max),
                errors.iter().sum::<f64>() / errors.len() as f64,
            )
        };
        Self {
            worst,
            mean,
            failures,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditioningSummary {
    /// Recovery from the unperturbed moments.
    pub baseline: TrialOutcome,
    pub trials: Vec<TrialOutcome>,
    pub stats: TrialStats,
}

pub fn failure_reason(e: &Error) -> &'static str {
    match e {
        Error::Infeasible { .. } => "infeasible",
        Error::Degenerate { .. } => "degenerate",
        Error::Inconsistent(_) => "inconsistent",
        Error::NonConvergence { .. } => "nonconvergence",
        Error::Scaling(_) => "scaling",
        _ => "input",
    }
}

fn recover(m: &MomentVector, truth: &SwitchConfiguration, opts: &InversionOptions) -> TrialOutcome {
    match invert_moments(m, opts).and_then(|(u, _)| truth.distance(&u)) {
        Ok(error) => TrialOutcome::Recovered { error },
        Err(e) => TrialOutcome::Failed {
            reason: failure_reason(&e).into(),
        },
    }
}

/// Recovery error of `u` when every moment is perturbed by uniform noise in
/// `[-eps, eps]`.
pub fn perturbation_probe(
    u: &SwitchConfiguration,
    eps: f64,
    trials: usize,
    seed: u64,
    opts: &InversionOptions,
) -> Result<ConditioningSummary> {
    if !(eps >= 0.0 && eps.is_finite()) || trials == 0 {
        return Err(Error::InvalidInput(format!(
            "need eps >= 0 and trials >= 1; got eps = {eps}, trials = {trials}"
        )));
    }
    let m = forward_moments(u);
    let baseline = recover(&m, u, opts);
    let outcomes = (0..trials)
        .map(|t| {
            let mut rng = trial_rng(seed, t as u64);
            let noisy: Vec<f64> = m
                .values()
                .iter()
                .map(|&v| v + eps * rng.random_range(-1.0..=1.0))
                .collect();
            recover(&MomentVector { values: noisy }, u, opts)
        })
        .collect::<Vec<_>>();
    Ok(ConditioningSummary {
        baseline,
        stats: TrialStats::from_outcomes(&outcomes),
        trials: outcomes,
    })
}

/// One seeded roundtrip trial: draw a configuration, compute its moments,
/// invert them.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundtripTrial {
    pub truth: SwitchConfiguration,
    pub outcome: TrialOutcome,
}

/// `trials` independent forward/inverse roundtrips of random configurations
/// with `n` intervals and minimum gap `gap` on `[0, 1]`.
pub fn roundtrip_study(
    n: usize,
    trials: usize,
    gap: f64,
    seed: u64,
    opts: &InversionOptions,
) -> Result<Vec<RoundtripTrial>> {
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be at least 1".into()));
    }
    (0..trials)
        .map(|t| {
            let truth = random_configuration(n, gap, &mut trial_rng(seed, t as u64))?;
            let outcome = recover(&forward_moments(&truth), &truth, opts);
            Ok(RoundtripTrial { truth, outcome })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(points: &[f64]) -> SwitchConfiguration {
        SwitchConfiguration::new(points.to_vec()).unwrap()
    }

    fn m(values: &[f64]) -> MomentVector {
        MomentVector::new(values.to_vec()).unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn forward_examples() {
        let x: f64 = 1.7;
        let full = forward_moments(&u(&[0.0, x]));
        assert!(close(full.values(), &[x, x * x], 1e-15));
        assert_eq!(forward_moments(&u(&[0.25, 0.75])).values(), &[0.5, 0.5]);
        assert!(close(
            forward_moments(&u(&[0.1, 0.3, 0.6, 0.9])).values(),
            &[0.5, 0.53, 0.539, 0.5345],
            1e-15
        ));
    }

    #[test]
    fn configuration_validation() {
        assert!(SwitchConfiguration::new(vec![0.5, 0.25]).is_err());
        assert!(SwitchConfiguration::new(vec![-0.1, 0.25]).is_err());
        assert!(SwitchConfiguration::new(vec![0.1, 0.2, 0.3]).is_err());
        assert!(SwitchConfiguration::new(vec![]).is_err());
        assert!(SwitchConfiguration::new(vec![0.1, f64::NAN]).is_err());
        assert!(SwitchConfiguration::new(vec![0.2, 0.2]).is_ok());
        assert!(MomentVector::new(vec![1.0, 2.0, 3.0]).is_err());
        assert!(MomentVector::new(vec![]).is_err());
    }

    #[test]
    fn density_roundtrip() {
        let f = StepDensity::new(2.0, vec![(0.0, 2.0)]).unwrap();
        assert!(close(
            moments_from_density(&f, 2).unwrap().values(),
            &[2.0, 4.0],
            0.0
        ));
        let f = StepDensity::new(0.75, vec![(0.25, 0.75)]).unwrap();
        assert_eq!(moments_from_density(&f, 2).unwrap().values(), &[0.5, 0.5]);
        assert!(moments_from_density(&f, 3).is_err());

        let cfg = u(&[0.1, 0.3, 0.6, 0.9]);
        let f = density_from_switches(&cfg);
        assert_eq!(f.intervals(), &[(0.1, 0.3), (0.6, 0.9)]);
        assert_eq!(f.support_end(), 0.9);
        assert_eq!(f.value_at(0.2), 1.0);
        assert_eq!(f.value_at(0.45), 0.0);
        let a = moments_from_density(&f, 4).unwrap();
        assert!(close(a.values(), forward_moments(&cfg).values(), 1e-12));

        assert_eq!(
            density_from_switches(&u(&[0.0, 3.0])).intervals(),
            &[(0.0, 3.0)]
        );
        assert_eq!(
            density_from_switches(&u(&[0.25, 0.75])).intervals(),
            &[(0.25, 0.75)]
        );
        let dropped = density_from_switches(&u(&[0.1, 0.1, 0.4, 0.6]));
        assert_eq!(dropped.intervals(), &[(0.4, 0.6)]);

        assert!(StepDensity::new(1.0, vec![(0.5, 0.2)]).is_err());
        assert!(StepDensity::new(1.0, vec![(0.1, 0.5), (0.4, 0.6)]).is_err());
        assert!(StepDensity::new(1.0, vec![(0.1, 1.5)]).is_err());
    }

    #[test]
    fn aux_vectors_k2() {
        let aux = solve_ab::<f64>(&m(&[0.0, 0.0])).unwrap();
        assert_eq!(aux.a, vec![0.0, 0.0]);
        assert_eq!(aux.b, vec![0.0, 0.0]);
        let aux = solve_ab::<f64>(&m(&[0.5, 0.5])).unwrap();
        assert_eq!(aux.a, vec![0.5, 0.375]);
        assert_eq!(aux.b, vec![-0.5, -0.125]);
    }

    #[test]
    fn aux_vectors_reject_overflow() {
        let err = solve_ab::<f64>(&m(&[1e300, 1e300, 1e300, 1e300])).unwrap_err();
        assert!(matches!(err, Error::Scaling(_)), "{err:?}");
    }

    #[test]
    fn residual_examples() {
        let cfg = u(&[0.1, 0.3, 0.6, 0.9]);
        assert_eq!(residual(&forward_moments(&cfg), &cfg).unwrap(), 0.0);
        assert_eq!(residual(&m(&[0.5, 0.5]), &u(&[0.25, 0.75])).unwrap(), 0.0);
        let r = residual(&m(&[0.5, 0.6]), &u(&[0.25, 0.75])).unwrap();
        assert!((r - 0.1).abs() < 1e-15);
        assert!(residual(&m(&[0.5, 0.5]), &cfg).is_err());
    }

    #[test]
    fn invert_k2_both_precisions() {
        for precision in [Precision::Double, Precision::DoubleDouble] {
            let opts = InversionOptions {
                precision,
                ..Default::default()
            };
            let (cfg, report) = invert_moments(&m(&[0.5, 0.5]), &opts).unwrap();
            assert!(close(cfg.points(), &[0.25, 0.75], 1e-12));
            assert!(report.residual_inf <= 1e-12);
            assert_eq!(report.status, InversionStatus::Ok);
        }
    }

    #[test]
    fn invert_k4() {
        let (cfg, report) =
            invert_moments(&m(&[0.5, 0.53, 0.539, 0.5345]), &Default::default()).unwrap();
        assert!(close(cfg.points(), &[0.1, 0.3, 0.6, 0.9], 1e-8), "{cfg:?}");
        assert!((report.min_gap - 0.2).abs() < 1e-8);
    }

    #[test]
    fn error_paths() {
        let err = invert_moments(&m(&[1.0, -1.0]), &Default::default()).unwrap_err();
        assert!(
            matches!(err, Error::Infeasible { .. } | Error::Inconsistent(_)),
            "{err:?}"
        );
        let dup = forward_moments(&u(&[0.1, 0.3, 0.6, 0.6]));
        let err = invert_moments(&dup, &Default::default()).unwrap_err();
        assert!(matches!(err, Error::Degenerate { .. }), "{err:?}");
    }

    #[test]
    fn order_settling() {
        let mut p = vec![0.1, 0.3 + 1e-12, 0.3, 0.5];
        settle_order(&mut p, 1e-9).unwrap();
        assert_eq!(p, vec![0.1, 0.3, 0.3 + 1e-12, 0.5]);
        let mut p = vec![0.4, 0.3, 0.6, 0.7];
        assert!(matches!(
            settle_order(&mut p, 1e-9),
            Err(Error::Inconsistent(_))
        ));
        let mut p = vec![-1e-15, 0.3];
        settle_order(&mut p, 1e-9).unwrap();
        assert_eq!(p[0], 0.0);
        let mut p = vec![-0.1, 0.3];
        assert!(settle_order(&mut p, 1e-9).is_err());
    }

    #[test]
    fn rescaled_inversion_far_from_unit_interval() {
        let truth = u(&[10.0, 30.0, 60.0, 90.0]);
        let moments = forward_moments(&truth);
        let (cfg, _) = invert_rescaled(&moments, None, &Default::default()).unwrap();
        assert!(truth.distance(&cfg).unwrap() < 9e-5);
        let (cfg, _) = invert_rescaled(&moments, Some(100.0), &Default::default()).unwrap();
        assert!(truth.distance(&cfg).unwrap() < 9e-5);
        assert!(invert_rescaled(&moments, Some(0.0), &Default::default()).is_err());
    }

    #[test]
    fn probe_is_deterministic() {
        let cfg = u(&[0.1, 0.3, 0.6, 0.9]);
        let a = perturbation_probe(&cfg, 1e-10, 5, 42, &Default::default()).unwrap();
        let b = perturbation_probe(&cfg, 1e-10, 5, 42, &Default::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.stats.failures, 0);
        assert!(perturbation_probe(&cfg, -1.0, 5, 42, &Default::default()).is_err());
        assert!(perturbation_probe(&cfg, 1e-3, 0, 42, &Default::default()).is_err());
    }

    #[test]
    fn probe_without_noise_matches_baseline() {
        let cfg = u(&[0.1, 0.3, 0.6, 0.9]);
        let s = perturbation_probe(&cfg, 0.0, 1, 7, &Default::default()).unwrap();
        assert_eq!(s.trials[0], s.baseline);
        assert_eq!(Some(s.stats.worst), s.baseline.error());
    }

    #[test]
    fn roundtrip_study_small() {
        let trials = roundtrip_study(2, 20, 0.1, 9, &Default::default()).unwrap();
        assert_eq!(trials.len(), 20);
        let outcomes: Vec<_> = trials.iter().map(|t| t.outcome.clone()).collect();
        let stats = TrialStats::from_outcomes(&outcomes);
        assert_eq!(stats.failures, 0);
        assert!(stats.worst < 1e-10);
        assert_eq!(
            trials,
            roundtrip_study(2, 20, 0.1, 9, &Default::default()).unwrap()
        );
        assert!(roundtrip_study(2, 0, 0.1, 9, &Default::default()).is_err());
    }

    #[test]
    fn random_configuration_respects_gap() {
        let mut rng = trial_rng(3, 0);
        for n in 1..=8 {
            let cfg = random_configuration(n, 0.05, &mut rng).unwrap();
            assert_eq!(cfg.len(), 2 * n);
            assert!(cfg.min_gap() >= 0.05 - 1e-15);
            assert!(cfg.points()[0] >= 0.0 && cfg.support_end() <= 1.0);
        }
        assert!(random_configuration(5, 0.1, &mut rng).is_err());
        assert!(random_configuration(0, 0.1, &mut rng).is_err());
    }
}
