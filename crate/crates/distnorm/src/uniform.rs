//! Exact and Monte-Carlo evaluation of the isotropic (uniform) POVM's bias
//! functionals.
//!
//! The uniform POVM maps a Hermitian operator `xi` to the outcome density
//! `d <psi| xi |psi>` over Haar-random unit vectors, so its induced l1 value
//! is `d E|tr(psi xi)|`. On a rank-(a,b) direction this expectation has the
//! closed form `1 - (1/(a+b)) sum_{k<a, l<b} p^k (1-p)^l C(k+l, k)` with
//! `p = a/(a+b)`; minimizing over splits gives the lower domination
//! constant of the uniform POVM, and the (1,1) split gives the upper one,
//! exactly 1/2.

use rayon::prelude::*;

use crate::op::{haar_state, HermitianOp};
use crate::rng::RngStream;
use crate::{Error, Result};

/// A rank split `(a, b)` in canonical form `a <= b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RankSplit {
    a: usize,
    b: usize,
}

impl RankSplit {
    pub fn new(a: usize, b: usize) -> Result<Self> {
        if a == 0 || b == 0 {
            return Err(Error::InvalidArgument(
                "rank split requires a, b >= 1".into(),
            ));
        }
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        Ok(Self { a, b })
    }

    pub fn a(&self) -> usize {
        self.a
    }

    pub fn b(&self) -> usize {
        self.b
    }

    pub fn dim(&self) -> usize {
        self.a + self.b
    }

    /// Weight of the positive block, `a / (a + b)`.
    pub fn p(&self) -> f64 {
        self.a as f64 / self.dim() as f64
    }

    /// The canonical direction `(1/2a) P - (1/2b) Q` in the computational
    /// basis of `C^(a+b)`: traceless with trace norm 1.
    pub fn direction(&self) -> HermitianOp {
        let mut diag = Vec::with_capacity(self.dim());
        diag.extend(std::iter::repeat_n(0.5 / self.a as f64, self.a));
        diag.extend(std::iter::repeat_n(-0.5 / self.b as f64, self.b));
        HermitianOp::from_diagonal(&diag)
    }
}

/// A Monte-Carlo mean with its standard error.
#[derive(Clone, Copy, Debug)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
    pub seed: u64,
}

impl McEstimate {
    pub(crate) fn from_sums(sum: f64, sumsq: f64, n: usize, seed: u64) -> Self {
        let mean = sum / n as f64;
        let var = (sumsq / n as f64 - mean * mean).max(0.0);
        let std_error = if n > 1 { (var / n as f64).sqrt() } else { 0.0 };
        Self {
            mean,
            std_error,
            samples: n,
            seed,
        }
    }
}

/// Uniform-POVM bias of the rank-(a,b) direction:
/// `1 - (1/(a+b)) sum_{k<a, l<b} p^k (1-p)^l C(k+l, k)`.
///
/// The double sum is evaluated by the multiplicative term recurrence
/// `t_{k,l+1} = t_{k,l} (1-p) (k+l+1)/(l+1)`, so no factorial ever
/// overflows; this stays accurate into the thousands of dimensions.
pub fn split_bias_closed_form(split: RankSplit) -> f64 {
    let (a, b) = (split.a, split.b);
    let p = split.p();
    let q = 1.0 - p;
    // hoist the 1/l divisions out of the quadratic loop
    let inv: Vec<f64> = (0..b)
        .map(|l| if l == 0 { 0.0 } else { 1.0 / l as f64 })
        .collect();
    let mut total = 0.0;
    let mut row_head = 1.0; // p^k C(k+0, k)
    for k in 0..a {
        let mut term = row_head;
        let mut acc = term;
        for (l, inv_l) in inv.iter().enumerate().take(b).skip(1) {
            term *= q * (k + l) as f64 * inv_l;
            acc += term;
        }
        total += acc;
        row_head *= p;
    }
    1.0 - total / split.dim() as f64
}

/// The lower domination constant of the uniform POVM in dimension `d`,
/// with its minimizing split. All splits `1 <= a <= d/2` are enumerated;
/// the balanced split is conjectured minimal but never assumed.
pub fn lambda_uniform(d: usize) -> Result<(f64, RankSplit)> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!(
            "lambda is defined for d >= 2, got {d}"
        )));
    }
    let mut best = f64::INFINITY;
    let mut best_split = RankSplit::new(1, d - 1)?;
    for a in 1..=d / 2 {
        let split = RankSplit::new(a, d - a)?;
        let v = split_bias_closed_form(split);
        if v < best {
            best = v;
            best_split = split;
        }
    }
    Ok((best, best_split))
}

/// For even `d` the balanced-split value collapses, via the binomial
/// identity behind [`binomial_partial_sum`], to
/// `(1/d) sum_{k < d/2} 2^(-2k) C(2k, k)`.
pub fn lambda_uniform_even_form(d: usize) -> Result<f64> {
    if d < 2 || !d.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "even form needs even d >= 2, got {d}"
        )));
    }
    let mut term = 1.0; // 2^(-2k) C(2k, k)
    let mut sum = term;
    for k in 1..d / 2 {
        term *= (2 * k - 1) as f64 / (2 * k) as f64;
        sum += term;
    }
    Ok(sum / d as f64)
}

/// Partial binomial sum `S_k = sum_{l=0..k} 2^-(k+l) C(k+l, l)`;
/// identically 1 for every k.
pub fn binomial_partial_sum(k: usize) -> f64 {
    let mut term = 0.5_f64.powi(k as i32);
    let mut sum = term;
    for l in 1..=k {
        term *= 0.5 * (k + l) as f64 / l as f64;
        sum += term;
    }
    sum
}

/// Monte-Carlo estimate of `||U(xi)||_1 = d E|tr(psi xi)|` over Haar states.
pub fn mc_uniform_bias(
    xi: &HermitianOp,
    samples: usize,
    rng: &mut RngStream,
) -> Result<McEstimate> {
    let d = xi.dim();
    mc_expectation(samples, rng, |stream| {
        let psi = haar_state(d, stream).expect("dimension checked");
        d as f64 * psi.expectation(xi).abs()
    })
}

const MC_MIN_SAMPLES: usize = 100;
const MC_CHUNK: usize = 4096;

/// Chunked Monte-Carlo mean of `f` over split child streams of `rng`.
///
/// Chunks may evaluate in parallel but are reduced in chunk order, so the
/// result depends only on the seed, never on the worker count.
pub(crate) fn mc_expectation<F>(samples: usize, rng: &mut RngStream, f: F) -> Result<McEstimate>
where
    F: Fn(&mut RngStream) -> f64 + Sync,
{
    if samples < MC_MIN_SAMPLES {
        return Err(Error::TooFewSamples {
            got: samples,
            min: MC_MIN_SAMPLES,
        });
    }
    let base = rng.derive();
    let chunks: Vec<(u64, usize)> = (0..samples.div_ceil(MC_CHUNK))
        .map(|i| (i as u64, MC_CHUNK.min(samples - i * MC_CHUNK)))
        .collect();
    let partials: Vec<(f64, f64)> = chunks
        .into_par_iter()
        .map(|(index, count)| {
            let mut stream = base.split(index);
            let mut sum = 0.0;
            let mut sumsq = 0.0;
            for _ in 0..count {
                let v = f(&mut stream);
                sum += v;
                sumsq += v * v;
            }
            (sum, sumsq)
        })
        .collect();
    let (sum, sumsq) = partials
        .into_iter()
        .fold((0.0, 0.0), |(s, q), (ps, pq)| (s + ps, q + pq));
    Ok(McEstimate::from_sums(sum, sumsq, samples, rng.seed()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use num::bigint::BigInt;
    use num::rational::BigRational;
    use num::{One, ToPrimitive, Zero};

    #[test]
    fn closed_form_small_splits() {
        assert_abs_diff_eq!(
            split_bias_closed_form(RankSplit::new(1, 1).unwrap()),
            0.5,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            split_bias_closed_form(RankSplit::new(2, 2).unwrap()),
            0.375,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            split_bias_closed_form(RankSplit::new(1, 3).unwrap()),
            0.421875,
            epsilon = 1e-15
        );
    }

    #[test]
    fn split_is_canonicalized() {
        let s = RankSplit::new(3, 1).unwrap();
        assert_eq!((s.a(), s.b()), (1, 3));
        assert!(RankSplit::new(0, 2).is_err());
    }

    #[test]
    fn lambda_uniform_small_dimensions() {
        let (v, s) = lambda_uniform(2).unwrap();
        assert_abs_diff_eq!(v, 0.5, epsilon = 1e-15);
        assert_eq!((s.a(), s.b()), (1, 1));
        let (v, s) = lambda_uniform(3).unwrap();
        assert_abs_diff_eq!(v, 4.0 / 9.0, epsilon = 1e-15);
        assert_eq!((s.a(), s.b()), (1, 2));
        let (v, s) = lambda_uniform(4).unwrap();
        assert_abs_diff_eq!(v, 0.375, epsilon = 1e-15);
        assert_eq!((s.a(), s.b()), (2, 2));
    }

    #[test]
    fn even_form_matches_enumeration() {
        assert_abs_diff_eq!(lambda_uniform_even_form(2).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(lambda_uniform_even_form(4).unwrap(), 0.375, epsilon = 1e-15);
        for d in (2..=60).step_by(2) {
            let (v, _) = lambda_uniform(d).unwrap();
            assert_abs_diff_eq!(v, lambda_uniform_even_form(d).unwrap(), epsilon = 1e-12);
        }
        assert!(lambda_uniform_even_form(3).is_err());
    }

    #[test]
    fn asymptotic_ratio_approaches_one() {
        let target = |d: usize| (2.0 / (std::f64::consts::PI * d as f64)).sqrt();
        let mut prev = 0.0;
        for d in [50usize, 100, 200, 400] {
            let v = lambda_uniform_even_form(d).unwrap();
            let ratio = v / target(d);
            assert!(ratio > prev, "ratio not monotone at d={d}");
            prev = ratio;
        }
        let v200 = lambda_uniform_even_form(200).unwrap();
        assert!((v200 / target(200) - 1.0).abs() < 0.05);
    }

    #[test]
    fn lambda_never_exceeds_mu() {
        for d in 2..=30 {
            let (v, _) = lambda_uniform(d).unwrap();
            assert!(v <= 0.5 + 1e-15);
        }
        assert_abs_diff_eq!(lambda_uniform(2).unwrap().0, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn binomial_sums_are_one() {
        assert_abs_diff_eq!(binomial_partial_sum(0), 1.0, epsilon = 0.0);
        assert_abs_diff_eq!(binomial_partial_sum(2), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(binomial_partial_sum(30), 1.0, epsilon = 1e-12);
    }

    fn binom(n: usize, k: usize) -> BigInt {
        let mut acc = BigInt::one();
        for i in 0..k {
            acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
        }
        acc
    }

    fn pow(x: &BigRational, n: usize) -> BigRational {
        let mut acc = BigRational::one();
        for _ in 0..n {
            acc *= x.clone();
        }
        acc
    }

    // exact oracle for the closed form: no recurrences, pure rationals
    fn rational_split_bias(a: usize, b: usize) -> BigRational {
        let d = BigInt::from(a + b);
        let pa = BigRational::new(BigInt::from(a), d.clone());
        let pb = BigRational::new(BigInt::from(b), d.clone());
        let mut sum = BigRational::zero();
        for k in 0..a {
            for l in 0..b {
                sum += pow(&pa, k) * pow(&pb, l) * BigRational::from(binom(k + l, k));
            }
        }
        BigRational::one() - sum / BigRational::from(d)
    }

    #[test]
    fn recurrence_matches_exact_rational_arithmetic() {
        for d in 2..=40 {
            for a in 1..=d / 2 {
                let fast = split_bias_closed_form(RankSplit::new(a, d - a).unwrap());
                let exact = rational_split_bias(a, d - a).to_f64().unwrap();
                assert!(
                    (fast - exact).abs() < 1e-12,
                    "(a,b)=({a},{}) fast={fast} exact={exact}",
                    d - a
                );
            }
        }
    }

    #[test]
    fn mc_matches_mu_uniform() {
        let mut rng = RngStream::from_seed(101);
        for d in [2usize, 5] {
            let mut diag = vec![0.0; d];
            diag[0] = 0.5;
            diag[1] = -0.5;
            let xi = HermitianOp::from_diagonal(&diag);
            let est = mc_uniform_bias(&xi, 20_000, &mut rng).unwrap();
            assert!(
                (est.mean - 0.5).abs() < 5.0 * est.std_error,
                "d={d}: {} +- {}",
                est.mean,
                est.std_error
            );
        }
    }

    #[test]
    fn mc_matches_closed_form_on_split_directions() {
        let mut rng = RngStream::from_seed(102);
        for (a, b) in [(1usize, 2usize), (2, 3)] {
            let split = RankSplit::new(a, b).unwrap();
            let est = mc_uniform_bias(&split.direction(), 20_000, &mut rng).unwrap();
            let exact = split_bias_closed_form(split);
            assert!(
                (est.mean - exact).abs() < 5.0 * est.std_error,
                "split ({a},{b}): {} vs {exact}",
                est.mean
            );
        }
    }

    #[test]
    fn mc_of_zero_is_zero() {
        let mut rng = RngStream::from_seed(103);
        let zero = HermitianOp::zeros(3, None).unwrap();
        let est = mc_uniform_bias(&zero, 200, &mut rng).unwrap();
        assert_eq!(est.mean, 0.0);
        assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn mc_rejects_tiny_sample_counts() {
        let mut rng = RngStream::from_seed(104);
        let xi = HermitianOp::from_diagonal(&[0.5, -0.5]);
        assert!(matches!(
            mc_uniform_bias(&xi, 10, &mut rng),
            Err(Error::TooFewSamples { .. })
        ));
    }

    #[test]
    fn mc_is_reproducible_and_unitarily_invariant() {
        let mut rng = RngStream::from_seed(105);
        let xi = RankSplit::new(1, 2).unwrap().direction();
        let mut rng2 = RngStream::from_seed(105);
        let a = mc_uniform_bias(&xi, 5000, &mut rng).unwrap();
        let b = mc_uniform_bias(&xi, 5000, &mut rng2).unwrap();
        assert_eq!(a.mean, b.mean);

        let mut urng = RngStream::from_seed(106);
        let u = crate::op::haar_unitary(3, &mut urng);
        let rotated = xi.conjugate_by(&u).unwrap();
        let mut rng3 = RngStream::from_seed(107);
        let c = mc_uniform_bias(&rotated, 20_000, &mut rng3).unwrap();
        let combined = (a.std_error.powi(2) + c.std_error.powi(2)).sqrt();
        assert!((a.mean - c.mean).abs() < 5.0 * combined);
    }
}
