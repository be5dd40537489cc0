//! POVMs, their induced classical maps and biases, the two-outcome
//! reduction, convex combinations, and norm evaluation / domination
//! estimation over finite measurement families.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::op::{
    check_unitary, haar_orthogonal_pair, haar_unitary, hs_inner, random_traceless_direction, CMat,
    HermitianOp, C64,
};
use crate::rng::RngStream;
use crate::{Error, Result};

/// Eigenvalue tolerance for effect positivity.
pub const EFFECT_TOL: f64 = 1e-9;
/// Frobenius tolerance for completeness.
pub const COMPLETENESS_TOL: f64 = 1e-9;

/// A validated positive operator-valued measure.
#[derive(Clone, Debug)]
pub struct Povm {
    effects: Vec<HermitianOp>,
    dim: usize,
}

impl Povm {
    /// Validate effects: equal dimensions, positive semidefinite within
    /// [`EFFECT_TOL`], summing to the identity within [`COMPLETENESS_TOL`].
    pub fn new(effects: Vec<HermitianOp>) -> Result<Self> {
        if effects.is_empty() {
            return Err(Error::EmptyFamily);
        }
        let dim = effects[0].dim();
        let mut sum = CMat::zeros(dim, dim);
        for (index, m) in effects.iter().enumerate() {
            if m.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: m.dim(),
                });
            }
            let min_eig = m.min_eigenvalue();
            if min_eig < -EFFECT_TOL {
                return Err(Error::NegativeEffect { index, min_eig });
            }
            sum += m.matrix();
        }
        let residual = (&sum - CMat::identity(dim, dim)).norm();
        if residual > COMPLETENESS_TOL {
            return Err(Error::Incomplete { residual });
        }
        Ok(Self { effects, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn effects(&self) -> &[HermitianOp] {
        &self.effects
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    /// Outcome functionals `tr(H M_k)`; a probability vector when `H` is a state.
    pub fn apply(&self, h: &HermitianOp) -> Result<Vec<f64>> {
        if h.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                left: h.dim(),
                right: self.dim,
            });
        }
        self.effects.iter().map(|m| hs_inner(h, m)).collect()
    }

    /// Bias on the state pair: `sum_k |tr((rho - sigma) M_k)| / 2`.
    pub fn bias(&self, rho: &HermitianOp, sigma: &HermitianOp) -> Result<f64> {
        rho.check_density()?;
        sigma.check_density()?;
        let xi = rho.sub(sigma)?;
        Ok(0.5 * self.l1_of_image(&xi)?)
    }

    /// `||M(xi)||_1 = sum_k |tr(xi M_k)|`.
    pub fn l1_of_image(&self, xi: &HermitianOp) -> Result<f64> {
        Ok(self.apply(xi)?.iter().map(|v| v.abs()).sum())
    }

    /// Group outcomes by the sign of `tr(xi M_k)`; ties go to the positive
    /// group. The resulting test satisfies
    /// `|tr(xi (2M - 1))| = sum_k |tr(xi M_k)|`.
    pub fn two_outcome_reduce(&self, xi: &HermitianOp) -> Result<TwoOutcomeTest> {
        let values = self.apply(xi)?;
        let mut m = CMat::zeros(self.dim, self.dim);
        for (v, eff) in values.iter().zip(self.effects.iter()) {
            if *v >= 0.0 {
                m += eff.matrix();
            }
        }
        Ok(TwoOutcomeTest {
            effect: HermitianOp::new(m, xi.shape())?,
        })
    }

    /// Conjugated POVM with effects `U M_k U^dag`.
    pub fn conjugate(&self, u: &CMat) -> Result<Povm> {
        check_unitary(u, 1e-10)?;
        let effects = self
            .effects
            .iter()
            .map(|m| m.conjugate_by(u))
            .collect::<Result<Vec<_>>>()?;
        Povm::new(effects)
    }

    /// Projective measurement onto the columns of a unitary.
    pub fn projective(basis: &CMat) -> Result<Povm> {
        check_unitary(basis, 1e-10)?;
        let dim = basis.nrows();
        let mut effects = Vec::with_capacity(dim);
        for k in 0..dim {
            let col = basis.column(k);
            let mut m = CMat::zeros(dim, dim);
            for r in 0..dim {
                for c in 0..dim {
                    m[(r, c)] = col[r] * col[c].conj();
                }
            }
            effects.push(HermitianOp::new(m, None)?);
        }
        Povm::new(effects)
    }

    /// The computational-basis measurement.
    pub fn computational(dim: usize) -> Povm {
        let effects = (0..dim)
            .map(|k| {
                let mut m = CMat::zeros(dim, dim);
                m[(k, k)] = C64::new(1.0, 0.0);
                HermitianOp::new(m, None).unwrap()
            })
            .collect();
        Povm::new(effects).unwrap()
    }
}

/// A two-outcome test `(M, 1 - M)` represented by its first effect.
#[derive(Clone, Debug)]
pub struct TwoOutcomeTest {
    effect: HermitianOp,
}

impl TwoOutcomeTest {
    pub fn new(effect: HermitianOp) -> Result<Self> {
        let vals = effect.eigh().0;
        let lo = vals.first().copied().unwrap_or(0.0);
        let hi = vals.last().copied().unwrap_or(0.0);
        if lo < -EFFECT_TOL || hi > 1.0 + EFFECT_TOL {
            return Err(Error::InvalidArgument(format!(
                "two-outcome effect spectrum [{lo:.3e}, {hi:.3e}] escapes [0, 1]"
            )));
        }
        Ok(Self { effect })
    }

    pub fn effect(&self) -> &HermitianOp {
        &self.effect
    }

    /// `tr(xi (2M - 1))`.
    pub fn signed_bias(&self, xi: &HermitianOp) -> Result<f64> {
        Ok(2.0 * hs_inner(xi, &self.effect)? - xi.trace())
    }

    /// The pair `(M, 1 - M)` as a POVM.
    pub fn into_povm(self) -> Result<Povm> {
        let dim = self.effect.dim();
        let complement = HermitianOp::new(
            CMat::identity(dim, dim) - self.effect.matrix(),
            self.effect.shape(),
        )?;
        Povm::new(vec![self.effect, complement])
    }
}

/// A finite set of POVMs on one dimension.
#[derive(Clone, Debug)]
pub struct MeasurementFamily {
    povms: Vec<Povm>,
    label: String,
}

impl MeasurementFamily {
    pub fn new(povms: Vec<Povm>, label: impl Into<String>) -> Result<Self> {
        if povms.is_empty() {
            return Err(Error::EmptyFamily);
        }
        let dim = povms[0].dim();
        for p in &povms {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: p.dim(),
                });
            }
        }
        Ok(Self {
            povms,
            label: label.into(),
        })
    }

    pub fn dim(&self) -> usize {
        self.povms[0].dim()
    }

    pub fn povms(&self) -> &[Povm] {
        &self.povms
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// The family norm `max_P sum_k |tr(xi M_k)|`.
    pub fn norm(&self, xi: &HermitianOp) -> Result<f64> {
        let mut best = f64::NEG_INFINITY;
        for p in &self.povms {
            best = best.max(p.l1_of_image(xi)?);
        }
        Ok(best)
    }

    /// True iff the real span of all effects is the full Hermitian space.
    pub fn is_separating(&self) -> bool {
        let dim = self.dim();
        let coords = dim * dim;
        let rows: usize = self.povms.iter().map(|p| p.len()).sum();
        let mut m = DMatrix::<f64>::zeros(rows, coords);
        let mut row = 0;
        for p in &self.povms {
            for eff in p.effects() {
                let mat = eff.matrix();
                let mut col = 0;
                for i in 0..dim {
                    m[(row, col)] = mat[(i, i)].re;
                    col += 1;
                }
                let sqrt2 = 2.0_f64.sqrt();
                for i in 0..dim {
                    for j in (i + 1)..dim {
                        m[(row, col)] = sqrt2 * mat[(i, j)].re;
                        m[(row, col + 1)] = sqrt2 * mat[(i, j)].im;
                        col += 2;
                    }
                }
                row += 1;
            }
        }
        let svd = m.svd(false, false);
        let rank = svd.singular_values.iter().filter(|s| **s > 1e-9).count();
        rank == coords
    }
}

/// Direct-sum convex combination of POVMs with effects `p_i M_k^(i)`.
pub fn convex_combine(parts: &[(f64, Povm)]) -> Result<Povm> {
    if parts.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let total: f64 = parts.iter().map(|(p, _)| *p).sum();
    if parts.iter().any(|(p, _)| *p < 0.0) || (total - 1.0).abs() > 1e-12 {
        return Err(Error::BadWeights { sum: total });
    }
    let mut effects = Vec::new();
    for (p, povm) in parts {
        for eff in povm.effects() {
            effects.push(eff.scale(*p));
        }
    }
    Povm::new(effects)
}

/// Certified brackets for the domination constants of a family.
#[derive(Clone, Debug)]
pub struct DominationEstimate {
    /// Achieved by `lambda_witness`; an upper bound on lambda.
    pub lambda_upper: f64,
    /// Optional analytic lower bound supplied by the caller's theory.
    pub lambda_lower: Option<f64>,
    /// Achieved by `mu_witness`; a lower bound on mu.
    pub mu_lower: f64,
    /// Analytic upper bound (1 for any set of POVMs).
    pub mu_upper: f64,
    /// Traceless, trace-norm-1 direction achieving `lambda_upper`.
    pub lambda_witness: HermitianOp,
    /// Rank-1 orthogonal pair direction achieving `mu_lower`.
    pub mu_witness: HermitianOp,
}

/// Estimate the domination constants of a separating family by random
/// restarts with local refinement.
///
/// `lambda_upper` is the smallest family norm found over traceless
/// trace-norm-1 directions: each restart draws random spectral splits with
/// Haar bases, then runs coordinate descent over split ranks and local
/// unitary perturbations with step-halving, stopping once a full pass
/// improves by less than a relative 1e-6. `mu_lower` is the largest value
/// found over rank-1 orthogonal pair directions. Both bounds are certified
/// by their returned witnesses. Restarts run on independent split streams
/// and are merged by min/max.
pub fn estimate_domination(
    family: &MeasurementFamily,
    samples: usize,
    restarts: usize,
    rng: &mut RngStream,
) -> Result<DominationEstimate> {
    if !family.is_separating() {
        return Err(Error::NotSeparating);
    }
    let dim = family.dim();
    let restarts = restarts.max(1);
    let lambda_runs: Vec<(f64, HermitianOp)> = (0..restarts)
        .map(|i| rng.split(i as u64))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|mut stream| refine_lambda(family, dim, samples, &mut stream))
        .collect::<Result<Vec<_>>>()?;
    let (lambda_upper, lambda_witness) = lambda_runs
        .into_iter()
        .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
        .unwrap();

    let mu_runs: Vec<(f64, HermitianOp)> = (0..restarts)
        .map(|i| rng.split((restarts + i) as u64))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|mut stream| refine_mu(family, dim, samples, &mut stream))
        .collect::<Result<Vec<_>>>()?;
    let (mu_lower, mu_witness) = mu_runs
        .into_iter()
        .max_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
        .unwrap();

    Ok(DominationEstimate {
        lambda_upper,
        lambda_lower: None,
        mu_lower,
        mu_upper: 1.0,
        lambda_witness,
        mu_witness,
    })
}

fn split_spectrum(dim: usize, a: usize) -> Vec<f64> {
    let b = dim - a;
    let mut diag = Vec::with_capacity(dim);
    diag.extend(std::iter::repeat_n(0.5 / a as f64, a));
    diag.extend(std::iter::repeat_n(-0.5 / b as f64, b));
    diag
}

fn refine_lambda(
    family: &MeasurementFamily,
    dim: usize,
    samples: usize,
    rng: &mut RngStream,
) -> Result<(f64, HermitianOp)> {
    let mut best_xi = random_traceless_direction(dim, rng)?;
    let mut best = family.norm(&best_xi)?;
    for _ in 1..samples.max(1) {
        let xi = random_traceless_direction(dim, rng)?;
        let v = family.norm(&xi)?;
        if v < best {
            best = v;
            best_xi = xi;
        }
    }

    let (_, mut frame) = best_xi.eigh();
    let mut split = dim / 2;
    loop {
        let before = best;
        for a in 1..=dim / 2 {
            let xi = crate::op::conjugated_diagonal(&split_spectrum(dim, a), &frame)?;
            let v = family.norm(&xi)?;
            if v < best {
                best = v;
                best_xi = xi;
                split = a;
            }
        }
        let mut step = 0.5;
        while step > 1e-7 {
            let mut improved = false;
            for _ in 0..8 {
                let rot = small_rotation(dim, step, rng);
                let cand_frame = &rot * &frame;
                let xi = crate::op::conjugated_diagonal(&split_spectrum(dim, split), &cand_frame)?;
                let v = family.norm(&xi)?;
                if v < best {
                    best = v;
                    best_xi = xi;
                    frame = cand_frame;
                    improved = true;
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        if before - best < 1e-6 * before.max(1e-12) {
            break;
        }
    }
    Ok((best, best_xi))
}

fn refine_mu(
    family: &MeasurementFamily,
    dim: usize,
    samples: usize,
    rng: &mut RngStream,
) -> Result<(f64, HermitianOp)> {
    let pair_direction = |u: &CMat| -> Result<HermitianOp> {
        let mut diag = vec![0.0; dim];
        diag[0] = 0.5;
        diag[1] = -0.5;
        crate::op::conjugated_diagonal(&diag, u)
    };
    let mut frame = pair_frame(dim, rng)?;
    let mut best_xi = pair_direction(&frame)?;
    let mut best = family.norm(&best_xi)?;
    for _ in 1..samples.max(1) {
        let f = pair_frame(dim, rng)?;
        let xi = pair_direction(&f)?;
        let v = family.norm(&xi)?;
        if v > best {
            best = v;
            best_xi = xi;
            frame = f;
        }
    }
    let mut step = 0.5;
    while step > 1e-7 {
        let mut improved = false;
        for _ in 0..8 {
            let rot = small_rotation(dim, step, rng);
            let cand = &rot * &frame;
            let xi = pair_direction(&cand)?;
            let v = family.norm(&xi)?;
            if v > best {
                best = v;
                best_xi = xi;
                frame = cand;
                improved = true;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok((best, best_xi))
}

fn pair_frame(dim: usize, rng: &mut RngStream) -> Result<CMat> {
    let (a, b) = haar_orthogonal_pair(dim, rng)?;
    let mut m = haar_unitary(dim, rng);
    m.set_column(0, a.amplitudes());
    m.set_column(1, b.amplitudes());
    // Gram-Schmidt the remaining columns against the pair
    for c in 2..dim {
        for prev in 0..c {
            let proj = m.column(prev).dotc(&m.column(c));
            let corrected = m.column(c) - m.column(prev) * proj;
            m.set_column(c, &corrected);
        }
        let n = m.column(c).norm();
        let scaled = m.column(c).unscale(n);
        m.set_column(c, &scaled);
    }
    Ok(m)
}

/// `exp(i step G)` for a random Hermitian G, used as a local move.
fn small_rotation(dim: usize, step: f64, rng: &mut RngStream) -> CMat {
    let g = haar_unitary(dim, rng);
    let herm = (&g + g.adjoint()).scale(0.5);
    let (vals, vecs) = crate::op::eigh(&herm);
    let mut rot = CMat::zeros(dim, dim);
    for (i, &v) in vals.iter().enumerate() {
        let phase = C64::new(0.0, step * v).exp();
        let col = vecs.column(i);
        for r in 0..dim {
            for c in 0..dim {
                rot[(r, c)] += col[r] * col[c].conj() * phase;
            }
        }
    }
    rot
}
