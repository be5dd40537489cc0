//! Certainty relations, accessible-information lower bounds, and the
//! l1/inner-product inequality for distributions and density operators.
//!
//! Logarithms are base 2 throughout; the natural-log constants
//! `1/(18 ln 2)`, `1/(306 ln 2)`, `1/(6 ln 2)` are kept in that form and
//! converted exactly once.

use std::f64::consts::LN_2;

use crate::designs::{design_povm, mub_design, WeightedDesign};
use crate::op::{haar_state, hs_inner, HermitianOp, PureState};
use crate::rng::RngStream;
use crate::uniform::{mc_expectation, McEstimate};
use crate::{Error, Result};

/// Entropy order selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EntropyOrder {
    Shannon,
    Renyi2,
}

fn check_distribution(p: &[f64]) -> Result<()> {
    if p.iter().any(|v| *v < 0.0 || !v.is_finite()) {
        return Err(Error::BadDistribution(
            "negative or non-finite entry".into(),
        ));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::BadDistribution(format!("sum {sum} is not 1")));
    }
    Ok(())
}

/// Shannon or collision entropy in bits.
pub fn entropy(dist: &[f64], order: EntropyOrder) -> Result<f64> {
    check_distribution(dist)?;
    Ok(match order {
        EntropyOrder::Shannon => dist
            .iter()
            .filter(|p| **p > 0.0)
            .map(|p| -p * p.log2())
            .sum(),
        EntropyOrder::Renyi2 => -dist.iter().map(|p| p * p).sum::<f64>().log2(),
    })
}

/// `D(p||q) - (1/(2 ln 2)) ||p - q||_1^2`, which Pinsker's inequality
/// keeps nonnegative. A support violation makes the divergence infinite
/// and is reported as such.
pub fn pinsker_gap(p: &[f64], q: &[f64]) -> Result<f64> {
    check_distribution(p)?;
    check_distribution(q)?;
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    let mut divergence = 0.0;
    for (pi, qi) in p.iter().zip(q.iter()) {
        if *pi > 0.0 {
            if *qi == 0.0 {
                return Ok(f64::INFINITY);
            }
            divergence += pi * (pi / qi).log2();
        }
    }
    let l1: f64 = p.iter().zip(q.iter()).map(|(a, b)| (a - b).abs()).sum();
    Ok(divergence - l1 * l1 / (2.0 * LN_2))
}

/// `||p - q||_1 - (1 - n p.q)`; nonnegative for any two distributions on
/// `n` points.
pub fn l1_inner_gap(p: &[f64], q: &[f64]) -> Result<f64> {
    check_distribution(p)?;
    check_distribution(q)?;
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    let n = p.len() as f64;
    let l1: f64 = p.iter().zip(q.iter()).map(|(a, b)| (a - b).abs()).sum();
    let dot: f64 = p.iter().zip(q.iter()).map(|(a, b)| a * b).sum();
    Ok(l1 - (1.0 - n * dot))
}

/// Quantum form: `||rho - sigma||_1 - (1 - n tr(rho sigma))` on an
/// n-dimensional space.
pub fn quantum_l1_inner_gap(rho: &HermitianOp, sigma: &HermitianOp) -> Result<f64> {
    rho.check_density()?;
    sigma.check_density()?;
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: sigma.dim(),
        });
    }
    let n = rho.dim() as f64;
    let l1 = rho.sub(sigma)?.trace_norm();
    Ok(l1 - (1.0 - n * hs_inner(rho, sigma)?))
}

/// The sharpness family for the l1/inner-product inequality:
/// `p = (x, 0, u, ..., u)`, `q = (0, x, u, ..., u)` with
/// `u = (1-x)/(n-2)`.
pub fn sharpness_pair(n: usize, x: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if n < 3 || x <= 0.0 || x >= 1.0 {
        return Err(Error::InvalidArgument("need n >= 3 and 0 < x < 1".into()));
    }
    let u = (1.0 - x) / (n - 2) as f64;
    let mut p = vec![u; n];
    let mut q = vec![u; n];
    p[0] = x;
    p[1] = 0.0;
    q[0] = 0.0;
    q[1] = x;
    Ok((p, q))
}

/// Ratio `(1 - n p.q) / ||p - q||_1` for the sharpness family; approaches
/// 1 for large `n` and small `x`, so no constant below 1 fixes the
/// inequality.
pub fn sharpness_ratio(n: usize, x: f64) -> Result<f64> {
    let (p, q) = sharpness_pair(n, x)?;
    let nn = n as f64;
    let dot: f64 = p.iter().zip(q.iter()).map(|(a, b)| a * b).sum();
    let l1: f64 = p.iter().zip(q.iter()).map(|(a, b)| (a - b).abs()).sum();
    Ok((1.0 - nn * dot) / l1)
}

/// Outcome of the MUB certainty-relation check for one pure state.
#[derive(Clone, Debug)]
pub struct CertaintyReport {
    pub dim: usize,
    /// `sum_b S_2(B_b(phi))` over the d+1 bases, in bits.
    pub renyi_sum: f64,
    /// `(d+1) log2((d+1)/2)`.
    pub lower: f64,
    /// `(d+1) log2 d - log2(d-1)`; the trivial maximum at d = 2.
    pub upper: f64,
    pub pass: bool,
}

/// Check `(d+1) log((d+1)/2) <= sum_b S_2(B_b(phi)) <= (d+1) log d -
/// log(d-1)` on the complete MUB set for prime `d`.
pub fn mub_certainty_check(d: usize, state: &PureState) -> Result<CertaintyReport> {
    let design = mub_design(d)?;
    mub_certainty_check_with(&design, state)
}

/// Same check reusing a prebuilt MUB design.
pub fn mub_certainty_check_with(
    design: &WeightedDesign,
    state: &PureState,
) -> Result<CertaintyReport> {
    let d = design.dim();
    if state.dim() != d {
        return Err(Error::DimensionMismatch {
            left: state.dim(),
            right: d,
        });
    }
    let mut renyi_sum = 0.0;
    for basis in 0..(d + 1) {
        let mut collision = 0.0;
        for s in 0..d {
            let prob = design.items()[basis * d + s]
                .vector
                .overlap(state)
                .norm_sqr();
            collision += prob * prob;
        }
        renyi_sum += -collision.log2();
    }
    let df = d as f64;
    let lower = (df + 1.0) * ((df + 1.0) / 2.0).log2();
    let upper = (df + 1.0) * df.log2() - (df - 1.0).log2();
    let pass = renyi_sum >= lower - 1e-9 && renyi_sum <= upper + 1e-9;
    Ok(CertaintyReport {
        dim: d,
        renyi_sum,
        lower,
        upper,
        pass,
    })
}

/// The certainty chain for a proper 2-design POVM on one pure state.
#[derive(Clone, Debug)]
pub struct DesignCertaintyReport {
    pub dim: usize,
    pub outcomes: usize,
    /// `log2 n - S_2(M(phi))`.
    pub renyi_gap: f64,
    /// `log2 n - S(M(phi))`.
    pub shannon_gap: f64,
    /// `(1/(2 ln 2)) ||M(phi - 1/d)||_1^2`.
    pub pinsker_term: f64,
    /// `(1/(4 ln 2)) (d-1)/(d (d+1)^2)`.
    pub design_constant: f64,
    /// `(1/(6 ln 2)) 1/(d+1)^2`.
    pub final_constant: f64,
    pub pass: bool,
}

/// Evaluate `log n - S_2 >= log n - S >= Pinsker term >= (1/(4 ln 2))
/// (d-1)/(d(d+1)^2) >= (1/(6 ln 2))/(d+1)^2` for a proper 2-design.
///
/// The arithmetic link between the two constants only holds for `d >= 3`
/// (at `d = 2` the latter is the larger); there the chain is closed by
/// comparing the Pinsker term against the final constant directly.
pub fn design_certainty_check(
    design: &WeightedDesign,
    state: &PureState,
) -> Result<DesignCertaintyReport> {
    if !design.proper() {
        return Err(Error::InvalidArgument(
            "certainty chain requires a proper design".into(),
        ));
    }
    let defect = crate::designs::design_defect(design, 2)?;
    if defect > 1e-6 {
        return Err(Error::NotDesign { t: 2, defect });
    }
    let d = design.dim();
    if state.dim() != d {
        return Err(Error::DimensionMismatch {
            left: state.dim(),
            right: d,
        });
    }
    let povm = design_povm(design)?;
    let rho = state.projector();
    let probs = povm.apply(&rho)?;
    let n = probs.len() as f64;
    let renyi_gap = n.log2() - entropy(&probs, EntropyOrder::Renyi2)?;
    let shannon_gap = n.log2() - entropy(&probs, EntropyOrder::Shannon)?;
    let mixed = HermitianOp::identity(d).scale(1.0 / d as f64);
    let diff = rho.sub(&mixed)?;
    let l1 = povm.l1_of_image(&diff)?;
    let pinsker_term = l1 * l1 / (2.0 * LN_2);
    let df = d as f64;
    let design_constant = (df - 1.0) / (df * (df + 1.0) * (df + 1.0)) / (4.0 * LN_2);
    let final_constant = 1.0 / ((df + 1.0) * (df + 1.0)) / (6.0 * LN_2);
    let tol = 1e-9;
    let mut pass = renyi_gap >= shannon_gap - tol
        && shannon_gap >= pinsker_term - tol
        && pinsker_term >= design_constant - tol;
    if d >= 3 {
        pass = pass && design_constant >= final_constant - tol;
    } else {
        pass = pass && pinsker_term >= final_constant - tol;
    }
    Ok(DesignCertaintyReport {
        dim: d,
        outcomes: probs.len(),
        renyi_gap,
        shannon_gap,
        pinsker_term,
        design_constant,
        final_constant,
        pass,
    })
}

/// Linear entropy `1 - tr(rho^2)`.
pub fn linear_entropy(rho: &HermitianOp) -> Result<f64> {
    rho.check_density()?;
    Ok(1.0 - rho.hs_norm().powi(2))
}

/// An ensemble of states with preparation probabilities.
#[derive(Clone, Debug)]
pub struct Ensemble {
    items: Vec<(f64, HermitianOp)>,
    average: HermitianOp,
}

impl Ensemble {
    pub fn new(items: Vec<(f64, HermitianOp)>) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::EmptyFamily);
        }
        let total: f64 = items.iter().map(|(p, _)| *p).sum();
        if items.iter().any(|(p, _)| *p < 0.0) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::BadWeights { sum: total });
        }
        let dim = items[0].1.dim();
        let mut avg = HermitianOp::zeros(dim, items[0].1.shape())?;
        for (p, rho) in &items {
            rho.check_density()?;
            if rho.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: rho.dim(),
                });
            }
            avg = avg.add(&rho.scale(*p))?;
        }
        Ok(Self {
            items,
            average: avg,
        })
    }

    pub fn items(&self) -> &[(f64, HermitianOp)] {
        &self.items
    }

    pub fn average(&self) -> &HermitianOp {
        &self.average
    }

    pub fn dim(&self) -> usize {
        self.average.dim()
    }

    /// `S_L(rho) - sum_x p_x S_L(rho_x)`, the Holevo-style linear-entropy
    /// gap driving the accessible-information bounds.
    pub fn linear_entropy_gap(&self) -> f64 {
        let avg_purity = self.average.hs_norm().powi(2);
        let mean_purity: f64 = self
            .items
            .iter()
            .map(|(p, rho)| p * rho.hs_norm().powi(2))
            .sum();
        mean_purity - avg_purity
    }
}

/// Which measurement the mutual-information estimate refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AccInfoMode {
    /// The single-system uniform POVM.
    Single,
    /// The tensor product of local uniform POVMs.
    Bipartite,
}

/// Monte-Carlo accessible-information lower-bound audit.
#[derive(Clone, Debug)]
pub struct AccInfoReport {
    pub mode: AccInfoMode,
    /// Estimated `I(X : U)` in bits.
    pub estimate: McEstimate,
    /// `(1/(18 ln 2))` (single) or `(1/(306 ln 2))` (bipartite) times the
    /// linear-entropy gap.
    pub bound: f64,
    pub pass: bool,
}

/// Estimate `I(X : U)` by importance sampling with the Haar measure as
/// proposal: each sample contributes
/// `sum_x p_x w_x(psi) log2(w_x(psi) / w(psi))` with outcome densities
/// `w_x = d <psi|rho_x|psi>`. Asserts the linear-entropy lower bound
/// within five standard errors.
pub fn mc_accessible_info_lower(
    ensemble: &Ensemble,
    mode: AccInfoMode,
    samples: usize,
    rng: &mut RngStream,
) -> Result<AccInfoReport> {
    let dim = ensemble.dim();
    let shape = match mode {
        AccInfoMode::Single => None,
        AccInfoMode::Bipartite => {
            let shape = ensemble
                .items()
                .iter()
                .find_map(|(_, rho)| rho.shape())
                .ok_or(Error::MissingShape)?;
            Some(shape)
        }
    };
    let items = ensemble.items();
    let average = ensemble.average();
    let estimate = mc_expectation(samples, rng, |stream| {
        let outcome = match shape {
            None => haar_state(dim, stream).expect("dim >= 1"),
            Some((da, db)) => {
                let phi = haar_state(da, stream).expect("da >= 1");
                let psi = haar_state(db, stream).expect("db >= 1");
                let mut amps = crate::op::CVec::zeros(da * db);
                for i in 0..da {
                    for j in 0..db {
                        amps[i * db + j] = phi.amplitudes()[i] * psi.amplitudes()[j];
                    }
                }
                PureState::new(amps).expect("product of unit vectors")
            }
        };
        let avg_density = dim as f64 * outcome.expectation(average);
        if avg_density <= 0.0 {
            return 0.0;
        }
        let mut value = 0.0;
        for (p, rho) in items {
            let dens = dim as f64 * outcome.expectation(rho);
            if dens > 0.0 {
                value += p * dens * (dens / avg_density).log2();
            }
        }
        value
    })?;
    let constant = match mode {
        AccInfoMode::Single => 1.0 / (18.0 * LN_2),
        AccInfoMode::Bipartite => 1.0 / (306.0 * LN_2),
    };
    let bound = constant * ensemble.linear_entropy_gap();
    let pass = estimate.mean >= bound - 5.0 * estimate.std_error;
    Ok(AccInfoReport {
        mode,
        estimate,
        bound,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::op::haar_orthogonal_pair;
    use approx::assert_abs_diff_eq;

    #[test]
    fn entropy_examples() {
        let uniform4 = vec![0.25; 4];
        assert_abs_diff_eq!(
            entropy(&uniform4, EntropyOrder::Shannon).unwrap(),
            2.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            entropy(&uniform4, EntropyOrder::Renyi2).unwrap(),
            2.0,
            epsilon = 1e-12
        );
        let point = vec![1.0, 0.0, 0.0];
        assert_abs_diff_eq!(
            entropy(&point, EntropyOrder::Shannon).unwrap(),
            0.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            entropy(&point, EntropyOrder::Renyi2).unwrap(),
            0.0,
            epsilon = 1e-12
        );
        let mub_out = vec![1.0 / 3.0, 0.0, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0];
        assert_abs_diff_eq!(
            entropy(&mub_out, EntropyOrder::Renyi2).unwrap(),
            (9.0_f64 / 2.0).log2(),
            epsilon = 1e-12
        );
        assert!(entropy(&[0.5, -0.5, 1.0], EntropyOrder::Shannon).is_err());
    }

    #[test]
    fn pinsker_examples() {
        let p = vec![0.5, 0.5];
        assert_abs_diff_eq!(pinsker_gap(&p, &p).unwrap(), 0.0, epsilon = 1e-12);
        let point = vec![1.0, 0.0];
        let gap = pinsker_gap(&point, &p).unwrap();
        assert_abs_diff_eq!(gap, 1.0 - 1.0 / (2.0 * LN_2), epsilon = 1e-12);
        let q = vec![0.0, 1.0];
        assert!(pinsker_gap(&point, &q).unwrap().is_infinite());
    }

    #[test]
    fn pinsker_never_negative_on_random_pairs() {
        let mut rng = RngStream::from_seed(81);
        for _ in 0..20_000 {
            let n = 2 + rng.below(6);
            let p = random_dist(n, &mut rng);
            let q = random_dist(n, &mut rng);
            let gap = pinsker_gap(&p, &q).unwrap();
            assert!(gap >= -1e-12, "gap {gap}");
        }
    }

    fn random_dist(n: usize, rng: &mut RngStream) -> Vec<f64> {
        let mut v: Vec<f64> = (0..n).map(|_| -rng.uniform().max(1e-300).ln()).collect();
        let s: f64 = v.iter().sum();
        v.iter_mut().for_each(|x| *x /= s);
        v
    }

    #[test]
    fn l1_gap_examples() {
        let p = vec![1.0, 0.0];
        let q = vec![0.0, 1.0];
        assert_abs_diff_eq!(l1_inner_gap(&p, &q).unwrap(), 1.0, epsilon = 1e-12);
        let u = vec![0.25; 4];
        assert_abs_diff_eq!(l1_inner_gap(&u, &u).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn sharpness_example_values() {
        let (p, q) = sharpness_pair(100, 0.1).unwrap();
        let gap = l1_inner_gap(&p, &q).unwrap();
        assert_abs_diff_eq!(gap, 0.2 - (1.0 - 81.0 / 98.0), epsilon = 1e-12);
        assert!(sharpness_ratio(100, 0.1).unwrap() > 0.85);
    }

    #[test]
    fn sharpness_ratio_grows_with_n() {
        let xs: Vec<f64> = (1..=20).map(|i| 0.01 * i as f64).collect();
        let mut last_sup = 0.0;
        for n in [100usize, 1000, 10_000] {
            let sup = xs
                .iter()
                .map(|x| sharpness_ratio(n, *x).unwrap())
                .fold(0.0_f64, f64::max);
            assert!(sup >= last_sup - 1e-12);
            last_sup = sup;
        }
        assert!(last_sup >= 0.95, "sup ratio {last_sup}");
    }

    #[test]
    fn l1_gap_random_sweeps() {
        let mut rng = RngStream::from_seed(82);
        for _ in 0..20_000 {
            let n = 2 + rng.below(8);
            let p = random_dist(n, &mut rng);
            let q = random_dist(n, &mut rng);
            assert!(l1_inner_gap(&p, &q).unwrap() >= -1e-12);
            // fidelity step of the same proof
            let l1: f64 = p.iter().zip(q.iter()).map(|(a, b)| (a - b).abs()).sum();
            let bhatt: f64 = p.iter().zip(q.iter()).map(|(a, b)| (a * b).sqrt()).sum();
            assert!(0.5 * l1 >= 1.0 - bhatt - 1e-12);
        }
    }

    #[test]
    fn quantum_l1_gap_on_random_pairs() {
        let mut rng = RngStream::from_seed(83);
        for _ in 0..500 {
            let d = 2 + rng.below(4);
            let rho = random_density(d, &mut rng);
            let sigma = random_density(d, &mut rng);
            assert!(quantum_l1_inner_gap(&rho, &sigma).unwrap() >= -1e-12);
        }
    }

    pub(crate) fn random_density(d: usize, rng: &mut RngStream) -> HermitianOp {
        let k = 1 + rng.below(d);
        let mut acc = HermitianOp::zeros(d, None).unwrap();
        let weights = {
            let mut w: Vec<f64> = (0..k).map(|_| -rng.uniform().max(1e-300).ln()).collect();
            let s: f64 = w.iter().sum();
            w.iter_mut().for_each(|x| *x /= s);
            w
        };
        for w in weights {
            let psi = haar_state(d, rng).unwrap();
            acc = acc.add(&psi.projector().scale(w)).unwrap();
        }
        acc
    }

    #[test]
    fn mub_certainty_for_eigenstate() {
        let report = mub_certainty_check(2, &PureState::basis_vector(2, 0)).unwrap();
        assert_abs_diff_eq!(report.renyi_sum, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(report.lower, 3.0 * 1.5_f64.log2(), epsilon = 1e-12);
        assert_abs_diff_eq!(report.upper, 3.0, epsilon = 1e-12);
        assert!(report.pass);
    }

    #[test]
    fn mub_certainty_on_haar_states() {
        let mut rng = RngStream::from_seed(84);
        for d in [2usize, 3, 5, 7] {
            let design = mub_design(d).unwrap();
            for _ in 0..200 {
                let psi = haar_state(d, &mut rng).unwrap();
                let report = mub_certainty_check_with(&design, &psi).unwrap();
                assert!(report.pass, "d={d}: {report:?}");
            }
        }
    }

    #[test]
    fn design_certainty_for_mub2() {
        let design = mub_design(2).unwrap();
        let report = design_certainty_check(&design, &PureState::basis_vector(2, 0)).unwrap();
        // log2 6 - S_2 = log2(4/3) for every pure state at d = 2
        assert_abs_diff_eq!(report.renyi_gap, (4.0_f64 / 3.0).log2(), epsilon = 1e-12);
        assert!(report.renyi_gap >= 1.0 / (6.0 * LN_2 * 9.0) - 1e-12);
        assert!(report.pass, "{report:?}");
    }

    #[test]
    fn design_certainty_sweeps() {
        let mut rng = RngStream::from_seed(85);
        for d in [2usize, 3, 5] {
            let design = mub_design(d).unwrap();
            for _ in 0..100 {
                let psi = haar_state(d, &mut rng).unwrap();
                let report = design_certainty_check(&design, &psi).unwrap();
                assert!(report.pass, "d={d}: {report:?}");
            }
        }
        // the SIC tetrahedron is a proper 2-design too
        let sic = WeightedDesign::from_vectors(
            crate::designs::qubit_sic_tetrahedron()
                .into_iter()
                .map(|v| (0.25, v))
                .collect(),
            2,
        )
        .unwrap();
        let report = design_certainty_check(&sic, &PureState::basis_vector(2, 0)).unwrap();
        assert!(report.pass);
    }

    #[test]
    fn certainty_rejects_improper_designs() {
        let mub = mub_design(2).unwrap();
        let sic = crate::designs::qubit_sic_tetrahedron();
        let mut items: Vec<(f64, PureState)> = mub
            .items()
            .iter()
            .map(|it| (0.5 * it.weight, it.vector.clone()))
            .collect();
        items.extend(sic.into_iter().map(|v| (0.5 * 0.25, v)));
        let weighted = WeightedDesign::from_vectors(items, 2).unwrap();
        assert!(design_certainty_check(&weighted, &PureState::basis_vector(2, 0)).is_err());
    }

    #[test]
    fn linear_entropy_examples() {
        let pure = PureState::basis_vector(3, 0).projector();
        assert_abs_diff_eq!(linear_entropy(&pure).unwrap(), 0.0, epsilon = 1e-12);
        let mixed = HermitianOp::identity(4).scale(0.25);
        assert_abs_diff_eq!(linear_entropy(&mixed).unwrap(), 0.75, epsilon = 1e-12);
        let sym = crate::bipartite::hiding_pair(2).unwrap().sym;
        assert_abs_diff_eq!(linear_entropy(&sym).unwrap(), 2.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn accinfo_on_orthogonal_qubit_ensemble() {
        let mut rng = RngStream::from_seed(86);
        let ensemble = Ensemble::new(vec![
            (0.5, PureState::basis_vector(2, 0).projector()),
            (0.5, PureState::basis_vector(2, 1).projector()),
        ])
        .unwrap();
        assert_abs_diff_eq!(ensemble.linear_entropy_gap(), 0.5, epsilon = 1e-12);
        let report =
            mc_accessible_info_lower(&ensemble, AccInfoMode::Single, 20_000, &mut rng).unwrap();
        assert_abs_diff_eq!(report.bound, 0.5 / (18.0 * LN_2), epsilon = 1e-12);
        assert!(report.pass, "{report:?}");
        assert!(report.estimate.mean > report.bound);
    }

    #[test]
    fn accinfo_single_state_bound_is_zero() {
        let mut rng = RngStream::from_seed(87);
        let ensemble =
            Ensemble::new(vec![(1.0, PureState::basis_vector(2, 0).projector())]).unwrap();
        let report =
            mc_accessible_info_lower(&ensemble, AccInfoMode::Single, 1000, &mut rng).unwrap();
        assert_eq!(report.bound, 0.0);
        assert!(report.pass);
    }

    #[test]
    fn accinfo_bipartite_random_ensembles() {
        let mut rng = RngStream::from_seed(88);
        for _ in 0..3 {
            let states: Vec<(f64, HermitianOp)> = (0..3)
                .map(|_| {
                    let (a, b) = haar_orthogonal_pair(4, &mut rng).unwrap();
                    let rho = a
                        .projector()
                        .scale(0.5)
                        .add(&b.projector().scale(0.5))
                        .unwrap()
                        .with_shape(Some((2, 2)))
                        .unwrap();
                    (1.0 / 3.0, rho)
                })
                .collect();
            let ensemble = Ensemble::new(states).unwrap();
            let report =
                mc_accessible_info_lower(&ensemble, AccInfoMode::Bipartite, 20_000, &mut rng)
                    .unwrap();
            assert!(report.pass, "{report:?}");
        }
    }

    #[test]
    fn ensemble_validation() {
        assert!(Ensemble::new(vec![]).is_err());
        let not_norm = HermitianOp::identity(2);
        assert!(Ensemble::new(vec![(1.0, not_norm)]).is_err());
        let ok = Ensemble::new(vec![
            (0.7, PureState::basis_vector(2, 0).projector()),
            (0.3, HermitianOp::identity(2).scale(0.5)),
        ]);
        assert!(ok.is_ok());
    }
}
