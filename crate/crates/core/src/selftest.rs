//! Embedded invariant suite behind `markov-moment selftest`.

use rand::Rng;
use twofloat::TwoFloat;

use crate::markov::{
    forward_moments, invert_moments, random_configuration, solve_ab, trial_rng, AuxVectors,
    InversionOptions, MomentVector, SwitchConfiguration,
};
use crate::newton::{
    coeffs_from_power_sums, newton_residuals, power_sums_from_roots, MonicPolynomial,
};
use crate::scalar::{max_abs, Real};
use crate::toeplitz::{lambda_apply, LowerToeplitz};

/// A switch configuration with its expected moments.
#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub name: String,
    pub switches: Vec<f64>,
    pub moments: Vec<f64>,
    /// Max-norm tolerance on the recovered switch points.
    pub tol: f64,
}

pub fn default_fixtures() -> Vec<Fixture> {
    vec![
        Fixture {
            name: "fixture_k2".into(),
            switches: vec![0.25, 0.75],
            moments: vec![0.5, 0.5],
            tol: 1e-12,
        },
        Fixture {
            name: "fixture_k4".into(),
            switches: vec![0.1, 0.3, 0.6, 0.9],
            moments: vec![0.5, 0.53, 0.539, 0.5345],
            tol: 1e-8,
        },
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &str, outcome: Result<String, String>) -> Self {
        let (passed, detail) = match outcome {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        Self {
            name: name.into(),
            passed,
            detail,
        }
    }
}

const RANDOM_CASES: u64 = 200;

pub fn run(fixtures: &[Fixture], seed: u64) -> Vec<CheckResult> {
    let mut results = vec![
        CheckResult::new("toeplitz_matvec_symmetry", check_matvec_symmetry(seed)),
        CheckResult::new("toeplitz_product_commutes", check_product(seed)),
        CheckResult::new("toeplitz_lambda_commutator", check_commutator(seed)),
        CheckResult::new("newton_relations", check_newton(seed)),
        CheckResult::new("inverse_pair_identity", check_inverse_pair(seed)),
        CheckResult::new("coefficient_map_identity", check_coefficient_map(seed)),
    ];
    results.extend(
        fixtures
            .iter()
            .map(|f| CheckResult::new(&f.name, check_fixture(f))),
    );
    results
}

fn random_vec(rng: &mut impl Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn dense(x: &[f64]) -> Vec<Vec<f64>> {
    LowerToeplitz::new(x.to_vec()).expect("nonempty").to_dense()
}

fn dense_mv(m: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    m.iter()
        .map(|r| r.iter().zip(y).map(|(a, b)| a * b).sum())
        .collect()
}

fn worst_case(
    seed: u64,
    stream: u64,
    tol: f64,
    mut case: impl FnMut(&mut rand_chacha::ChaCha8Rng) -> f64,
) -> Result<String, String> {
    let mut rng = trial_rng(seed, stream);
    let worst = (0..RANDOM_CASES)
        .map(|_| case(&mut rng))
        .fold(0.0, f64::max);
    if worst <= tol {
        Ok(format!("max deviation {worst:.3e} <= {tol:.0e}"))
    } else {
        Err(format!("max deviation {worst:.3e} > {tol:.0e}"))
    }
}

fn check_matvec_symmetry(seed: u64) -> Result<String, String> {
    worst_case(seed, 1, 1e-12, |rng| {
        let p = rng.random_range(1..=12);
        let (x, y) = (random_vec(rng, p), random_vec(rng, p));
        let fast = LowerToeplitz::new(x.clone()).unwrap().matvec(&y).unwrap();
        let swapped = dense_mv(&dense(&y), &x);
        fast.iter()
            .zip(&swapped)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    })
}

fn check_product(seed: u64) -> Result<String, String> {
    worst_case(seed, 2, 1e-12, |rng| {
        let p = rng.random_range(1..=12);
        let tx = LowerToeplitz::new(random_vec(rng, p)).unwrap();
        let ty = LowerToeplitz::new(random_vec(rng, p)).unwrap();
        let (dx, dy) = (tx.to_dense(), ty.to_dense());
        let xy = tx.mul(&ty).unwrap().to_dense();
        let yx = ty.mul(&tx).unwrap().to_dense();
        let mut worst = 0.0f64;
        for i in 0..p {
            for j in 0..p {
                let d: f64 = (0..p).map(|k| dx[i][k] * dy[k][j]).sum();
                worst = worst
                    .max((xy[i][j] - d).abs())
                    .max((xy[i][j] - yx[i][j]).abs());
            }
        }
        worst
    })
}

fn check_commutator(seed: u64) -> Result<String, String> {
    worst_case(seed, 3, 1e-12, |rng| {
        let p = rng.random_range(1..=12);
        let x = random_vec(rng, p);
        let dx = dense(&x);
        let lhs = dense(&lambda_apply(&x));
        let mut worst = 0.0f64;
        for i in 0..p {
            for j in 0..p {
                let rhs = (i as f64 - j as f64) * dx[i][j];
                worst = worst.max((lhs[i][j] - rhs).abs());
            }
        }
        worst
    })
}

fn check_newton(seed: u64) -> Result<String, String> {
    worst_case(seed, 4, 1e-10, |rng| {
        let n = rng.random_range(1..=10);
        let roots = random_vec(rng, n);
        let s = power_sums_from_roots(&roots, n);
        match coeffs_from_power_sums(&s) {
            Ok(p) => {
                let scale = 1.0 + max_abs(s.values());
                newton_residuals(&p, &s).into_iter().fold(0.0, f64::max) / scale
            }
            Err(_) => f64::INFINITY,
        }
    })
}

fn feasible_cases(seed: u64, stream: u64) -> impl Iterator<Item = SwitchConfiguration> {
    let mut rng = trial_rng(seed, stream);
    (0..RANDOM_CASES / 4).map(move |i| {
        let n = 1 + (i as usize % 6);
        random_configuration(n, 0.05, &mut rng).expect("valid parameters")
    })
}

/// `max |T(a~) T(b~) - I|` entrywise on first columns.
pub fn inverse_pair_residual<T: Real>(aux: &AuxVectors<T>) -> f64 {
    let ta = LowerToeplitz::new(aux.a_augmented()).expect("nonempty");
    let tb = LowerToeplitz::new(aux.b_augmented()).expect("nonempty");
    let prod = ta.mul(&tb).expect("same dimension");
    prod.column()
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let want = if i == 0 { T::one() } else { T::zero() };
            (v - want).abs().as_f64()
        })
        .fold(0.0, f64::max)
}

/// `max |T(a~) c - d|` where `c`, `d` are the reversed, zero-padded
/// coefficient vectors of `prod (x - u_{2j})` and `prod (x - u_{2j-1})`.
pub fn coefficient_map_residual<T: Real>(aux: &AuxVectors<T>, u: &SwitchConfiguration) -> f64 {
    let padded = |roots: Vec<f64>| -> Vec<T> {
        let roots: Vec<T> = roots.into_iter().map(T::real).collect();
        let mut v = MonicPolynomial::from_roots(&roots)
            .expect("monic")
            .reversed();
        v.resize(u.len() + 1, T::zero());
        v
    };
    let c = padded(u.right_points());
    let d = padded(u.left_points());
    let ta = LowerToeplitz::new(aux.a_augmented()).expect("nonempty");
    ta.matvec(&c)
        .expect("same dimension")
        .iter()
        .zip(&d)
        .map(|(&l, &r)| (l - r).abs().as_f64())
        .fold(0.0, f64::max)
}

fn check_inverse_pair(seed: u64) -> Result<String, String> {
    let tol = 1e-8;
    let mut worst = 0.0f64;
    for u in feasible_cases(seed, 5) {
        let aux = solve_ab::<TwoFloat>(&forward_moments(&u)).map_err(|e| e.to_string())?;
        worst = worst.max(inverse_pair_residual(&aux));
    }
    threshold(worst, tol)
}

fn check_coefficient_map(seed: u64) -> Result<String, String> {
    let tol = 1e-7;
    let mut worst = 0.0f64;
    for u in feasible_cases(seed, 6) {
        let aux = solve_ab::<TwoFloat>(&forward_moments(&u)).map_err(|e| e.to_string())?;
        worst = worst.max(coefficient_map_residual(&aux, &u));
    }
    threshold(worst, tol)
}

fn threshold(worst: f64, tol: f64) -> Result<String, String> {
    if worst <= tol {
        Ok(format!("max deviation {worst:.3e} <= {tol:.0e}"))
    } else {
        Err(format!("max deviation {worst:.3e} > {tol:.0e}"))
    }
}

fn check_fixture(f: &Fixture) -> Result<String, String> {
    let u = SwitchConfiguration::new(f.switches.clone()).map_err(|e| e.to_string())?;
    let m = MomentVector::new(f.moments.clone()).map_err(|e| e.to_string())?;
    let fwd = forward_moments(&u);
    let fwd_err = fwd
        .values()
        .iter()
        .zip(m.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let moment_tol = 1e-14 * max_abs(m.values()).max(1.0);
    if fwd_err > moment_tol {
        return Err(format!(
            "forward moments differ from the fixture by {fwd_err:.3e}"
        ));
    }
    let (rec, _) = invert_moments(&m, &InversionOptions::default()).map_err(|e| e.to_string())?;
    let err = u.distance(&rec).map_err(|e| e.to_string())?;
    if err <= f.tol {
        Ok(format!("recovery error {err:.3e} <= {:.0e}", f.tol))
    } else {
        Err(format!("recovery error {err:.3e} > {:.0e}", f.tol))
    }
}
