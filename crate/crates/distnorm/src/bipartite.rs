//! Bipartite machinery: data-hiding states, the symmetry-reduced PPT
//! linear program, local-uniform-POVM moments, the `1/sqrt(153)` bias
//! floor, separability bounds, and the domination-constant chain.

use crate::op::{haar_state, haar_unitary, CMat, CVec, HermitianOp, Party, C64};
use crate::rng::RngStream;
use crate::uniform::{mc_expectation, McEstimate};
use crate::{Error, Result, DIM_CAP};

/// The swap operator `F` on `C^d (x) C^d`.
pub fn swap_operator(d: usize) -> Result<HermitianOp> {
    let dim = d * d;
    if dim > DIM_CAP {
        return Err(Error::DimensionCap { dim, cap: DIM_CAP });
    }
    let mut m = CMat::zeros(dim, dim);
    for i in 0..d {
        for j in 0..d {
            m[(i * d + j, j * d + i)] = C64::new(1.0, 0.0);
        }
    }
    HermitianOp::new(m, Some((d, d)))
}

/// Normalized projectors onto the symmetric and antisymmetric subspaces of
/// `C^d (x) C^d`: perfectly distinguishable globally, data hiding locally.
#[derive(Clone, Debug)]
pub struct HidingPair {
    pub sym: HermitianOp,
    pub anti: HermitianOp,
    pub dim_per_party: usize,
}

pub fn hiding_pair(d: usize) -> Result<HidingPair> {
    if d < 2 {
        return Err(Error::InvalidArgument(
            "hiding pair needs local dimension >= 2".into(),
        ));
    }
    let f = swap_operator(d)?;
    let dim = d * d;
    let id = CMat::identity(dim, dim);
    let sym = HermitianOp::new(
        (&id + f.matrix()).scale(1.0 / (d * (d + 1)) as f64),
        Some((d, d)),
    )?;
    let anti = HermitianOp::new(
        (&id - f.matrix()).scale(1.0 / (d * (d - 1)) as f64),
        Some((d, d)),
    )?;
    Ok(HidingPair {
        sym,
        anti,
        dim_per_party: d,
    })
}

impl HidingPair {
    /// The normalized hiding direction `(sym - anti)/2`, traceless with
    /// trace norm 1.
    pub fn direction(&self) -> HermitianOp {
        self.sym.sub(&self.anti).unwrap().scale(0.5)
    }
}

/// An operator in the commutant of `U (x) U`: `x1 * 1 + xf * F`.
#[derive(Clone, Copy, Debug)]
pub struct UUInvariantOp {
    pub coeff_id: f64,
    pub coeff_swap: f64,
    pub dim_per_party: usize,
}

impl UUInvariantOp {
    pub fn new(coeff_id: f64, coeff_swap: f64, d: usize) -> Self {
        Self {
            coeff_id,
            coeff_swap,
            dim_per_party: d,
        }
    }

    /// Project a bipartite operator onto span{1, F} and verify the residual.
    pub fn from_operator(h: &HermitianOp) -> Result<Self> {
        let (da, db) = h.shape().ok_or(Error::MissingShape)?;
        if da != db {
            return Err(Error::BadShape {
                da,
                db,
                dim: h.dim(),
            });
        }
        let d = da;
        let f = swap_operator(d)?;
        let tr_h = h.trace();
        let tr_hf = crate::op::hs_inner(h, &f)?;
        // Gram system for span{1, F}: tr(1 1) = d^2, tr(1 F) = d, tr(F F) = d^2
        let dd = (d * d) as f64;
        let det = dd * dd - (d as f64) * (d as f64);
        let coeff_id = (dd * tr_h - d as f64 * tr_hf) / det;
        let coeff_swap = (dd * tr_hf - d as f64 * tr_h) / det;
        let candidate = Self::new(coeff_id, coeff_swap, d);
        let rebuilt = candidate.to_operator()?;
        let resid = rebuilt.sub(h)?.hs_norm();
        if resid > 1e-9 * (1.0 + h.hs_norm()) {
            return Err(Error::InvalidArgument(format!(
                "operator is not U(x)U-invariant (projection residual {resid:.3e})"
            )));
        }
        Ok(candidate)
    }

    pub fn to_operator(&self) -> Result<HermitianOp> {
        let d = self.dim_per_party;
        let f = swap_operator(d)?;
        let id = CMat::identity(d * d, d * d);
        HermitianOp::new(
            id.scale(self.coeff_id) + f.matrix().scale(self.coeff_swap),
            Some((d, d)),
        )
    }

    pub fn trace(&self) -> f64 {
        let d = self.dim_per_party as f64;
        self.coeff_id * d * d + self.coeff_swap * d
    }
}

/// Frobenius distance between `h` and its empirical `U (x) U` twirl over
/// `rounds` random local unitaries; a cheap probabilistic invariance
/// certificate.
pub fn twirl_residual(h: &HermitianOp, rounds: usize, rng: &mut RngStream) -> Result<f64> {
    let (da, db) = h.shape().ok_or(Error::MissingShape)?;
    if da != db {
        return Err(Error::BadShape {
            da,
            db,
            dim: h.dim(),
        });
    }
    let mut avg = CMat::zeros(h.dim(), h.dim());
    for _ in 0..rounds {
        let u = haar_unitary(da, rng);
        let uu = u.kronecker(&u);
        avg += uu.adjoint() * h.matrix() * &uu;
    }
    avg /= C64::new(rounds as f64, 0.0);
    Ok((avg - h.matrix()).norm())
}

/// Result of the symmetry-reduced PPT optimization.
#[derive(Clone, Debug)]
pub struct PptValue {
    /// `max |tr(xi (2M - 1))|` over invariant PPT two-outcome tests.
    pub value: f64,
    /// Optimal `M = x Pi_sym + y Pi_anti`.
    pub witness: (f64, f64),
}

/// Exact `||xi||_PPT` for a `U (x) U`-invariant direction.
///
/// Two-outcome tests can be twirled into `M = x Pi_sym + y Pi_anti`
/// without changing the value, and the PPT conditions on `M` and `1 - M`
/// reduce via `F^Gamma = d Phi` to two extra half-planes in `(x, y)`. The
/// 2-D feasible polygon is solved by vertex enumeration.
pub fn ppt_norm_uu_invariant(xi: &UUInvariantOp) -> Result<PptValue> {
    let d = xi.dim_per_party as f64;
    if xi.dim_per_party < 2 {
        return Err(Error::InvalidArgument("need local dimension >= 2".into()));
    }
    let dim_sym = d * (d + 1.0) / 2.0;
    let dim_anti = d * (d - 1.0) / 2.0;
    let tr_sym = (xi.coeff_id + xi.coeff_swap) * dim_sym;
    let tr_anti = (xi.coeff_id - xi.coeff_swap) * dim_anti;
    let trace = xi.trace();
    // objective: f(x, y) = 2 (x tr_sym + y tr_anti) - tr(xi)
    let objective = |x: f64, y: f64| 2.0 * (x * tr_sym + y * tr_anti) - trace;

    // half-planes a x + b y <= c
    let constraints: [(f64, f64, f64); 6] = [
        (-1.0, 0.0, 0.0),
        (1.0, 0.0, 1.0),
        (0.0, -1.0, 0.0),
        (0.0, 1.0, 1.0),
        // M^Gamma >= 0 on the maximally entangled vector
        (-(1.0 + d), -(1.0 - d), 0.0),
        // (1 - M)^Gamma >= 0 on the same vector
        (1.0 + d, 1.0 - d, 2.0),
    ];
    let feasible = |x: f64, y: f64| {
        constraints
            .iter()
            .all(|(a, b, c)| a * x + b * y <= c + 1e-12)
    };
    let mut best = 0.0_f64;
    let mut best_signed = 0.0_f64;
    let mut witness = (0.0, 0.0);
    for i in 0..constraints.len() {
        for j in (i + 1)..constraints.len() {
            let (a1, b1, c1) = constraints[i];
            let (a2, b2, c2) = constraints[j];
            let det = a1 * b2 - a2 * b1;
            if det.abs() < 1e-14 {
                continue;
            }
            let x = (c1 * b2 - c2 * b1) / det;
            let y = (a1 * c2 - a2 * c1) / det;
            if !feasible(x, y) {
                continue;
            }
            let signed = objective(x, y);
            let v = signed.abs();
            // M and 1 - M tie in |bias|; prefer the positively biased test
            if v > best + 1e-12 || (v > best - 1e-12 && signed > best_signed) {
                best = v;
                best_signed = signed;
                witness = (x, y);
            }
        }
    }
    Ok(PptValue {
        value: best,
        witness,
    })
}

/// Gurvits-Barnum separability bounds: `(2/2^(n/2)) ||xi||_2` and
/// `(2/2^(n/2)) ||xi||_1 / sqrt(D)` lower-bound the separable norm.
pub fn sep_l2_lower_bound(xi: &HermitianOp, parties: usize) -> (f64, f64) {
    let coeff = 2.0 / 2.0_f64.powf(parties as f64 / 2.0);
    let l2 = coeff * xi.hs_norm();
    let l1 = coeff * xi.trace_norm() / (xi.dim() as f64).sqrt();
    (l2, l1)
}

/// `t = tr(xi^2)`, `a = tr(xi_A^2)`, `b = tr(xi_B^2)`.
pub fn marginal_traces(xi: &HermitianOp) -> Result<(f64, f64, f64)> {
    let t = xi.hs_norm().powi(2);
    let a = xi.partial_trace(Party::A)?.hs_norm().powi(2);
    let b = xi.partial_trace(Party::B)?.hs_norm().powi(2);
    Ok((t, a, b))
}

/// The exact second moment of `S = D tr((phi (x) psi) xi)` under
/// independent local Haar states.
#[derive(Clone, Debug)]
pub struct SecondMomentFormula {
    pub value: f64,
    pub prefactor: f64,
    pub t: f64,
    pub a: f64,
    pub b: f64,
}

/// `E S^2 = dA dB / ((dA+1)(dB+1)) (tr xi_A^2 + tr xi_B^2 + tr xi^2)` for
/// traceless bipartite `xi`.
pub fn local_uniform_second_moment(xi: &HermitianOp) -> Result<SecondMomentFormula> {
    if xi.trace().abs() > 1e-10 {
        return Err(Error::NotTraceless { trace: xi.trace() });
    }
    let (da, db) = xi.shape().ok_or(Error::MissingShape)?;
    let (t, a, b) = marginal_traces(xi)?;
    let prefactor = (da * db) as f64 / ((da + 1) * (db + 1)) as f64;
    Ok(SecondMomentFormula {
        value: prefactor * (t + a + b),
        prefactor,
        t,
        a,
        b,
    })
}

/// Right-hand sides of the fourth-moment diagram bound.
#[derive(Clone, Debug)]
pub struct DiagramBound {
    /// `153 t^2 + 126 ta + 126 tb + 9 a^2 + 9 b^2 + 30 ab`, term by term.
    pub detailed: f64,
    /// The weaker envelope `153 (t + a + b)^2`.
    pub envelope: f64,
    pub t: f64,
    pub a: f64,
    pub b: f64,
}

pub fn diagram_bound_rhs(xi: &HermitianOp) -> Result<DiagramBound> {
    if xi.trace().abs() > 1e-10 {
        return Err(Error::NotTraceless { trace: xi.trace() });
    }
    let (t, a, b) = marginal_traces(xi)?;
    let detailed =
        153.0 * t * t + 126.0 * t * a + 126.0 * t * b + 9.0 * a * a + 9.0 * b * b + 30.0 * a * b;
    let envelope = 153.0 * (t + a + b) * (t + a + b);
    Ok(DiagramBound {
        detailed,
        envelope,
        t,
        a,
        b,
    })
}

/// Guaranteed lower bounds on the local-uniform bias of a state difference.
#[derive(Clone, Debug)]
pub struct LocalBiasBounds {
    /// `(1/sqrt(153)) ||xi||_2`.
    pub l2_bound: f64,
    /// `(1/sqrt(153 D)) ||xi||_1`.
    pub l1_bound: f64,
}

pub fn local_bias_lower_bound(xi: &HermitianOp) -> Result<LocalBiasBounds> {
    let (_, _) = xi.shape().ok_or(Error::MissingShape)?;
    let root = 153.0_f64.sqrt();
    Ok(LocalBiasBounds {
        l2_bound: xi.hs_norm() / root,
        l1_bound: xi.trace_norm() / (root * (xi.dim() as f64).sqrt()),
    })
}

/// Bias floor for a hiding pair with one state of rank at most `r`.
#[derive(Clone, Debug)]
pub struct RankHidingBound {
    pub rank: usize,
    /// The l2 route: `(1/sqrt(153)) max(||rho||_2, ||sigma||_2) >=
    /// 1/sqrt(153 r)`.
    pub l2_route: f64,
    /// The quoted figure `1/(13 r)`, which decays faster in `r`; printed
    /// for comparison, not derived here.
    pub quoted: f64,
}

/// Rank-based form of the bias floor for orthogonal states `rho`, `sigma`.
pub fn rank_hiding_bound(rho: &HermitianOp, sigma: &HermitianOp) -> Result<RankHidingBound> {
    rho.check_density()?;
    sigma.check_density()?;
    let rank = |h: &HermitianOp| h.eigh().0.iter().filter(|v| **v > 1e-9).count();
    let r = rank(rho).min(rank(sigma)).max(1);
    let best_l2 = rho.hs_norm().max(sigma.hs_norm());
    Ok(RankHidingBound {
        rank: r,
        l2_route: best_l2 / 153.0_f64.sqrt(),
        quoted: 1.0 / (13.0 * r as f64),
    })
}

fn product_state(phi: &CVec, psi: &CVec) -> CVec {
    let (da, db) = (phi.len(), psi.len());
    let mut out = CVec::zeros(da * db);
    for i in 0..da {
        for j in 0..db {
            out[i * db + j] = phi[i] * psi[j];
        }
    }
    out
}

fn local_sample(xi: &HermitianOp, da: usize, db: usize, stream: &mut RngStream) -> f64 {
    let phi = haar_state(da, stream).expect("da >= 1");
    let psi = haar_state(db, stream).expect("db >= 1");
    let prod = product_state(phi.amplitudes(), psi.amplitudes());
    let hv = xi.matrix() * &prod;
    (da * db) as f64 * prod.dotc(&hv).re
}

/// Monte-Carlo estimate of `||(U_A (x) U_B)(xi)||_1 = D E|tr((phi (x) psi)
/// xi)|` over independent local Haar pairs.
pub fn mc_local_uniform_bias(
    xi: &HermitianOp,
    samples: usize,
    rng: &mut RngStream,
) -> Result<McEstimate> {
    let (da, db) = xi.shape().ok_or(Error::MissingShape)?;
    mc_expectation(samples, rng, |stream| {
        local_sample(xi, da, db, stream).abs()
    })
}

/// Measured absolute first, second and fourth moments of the local-uniform
/// outcome variable.
#[derive(Clone, Debug)]
pub struct LocalMomentAudit {
    pub abs_first: McEstimate,
    pub second: McEstimate,
    pub fourth: McEstimate,
}

pub fn mc_local_uniform_moments(
    xi: &HermitianOp,
    samples: usize,
    rng: &mut RngStream,
) -> Result<LocalMomentAudit> {
    let (da, db) = xi.shape().ok_or(Error::MissingShape)?;
    let abs_first = mc_expectation(samples, &mut rng.split(0), |s| {
        local_sample(xi, da, db, s).abs()
    })?;
    let second = mc_expectation(samples, &mut rng.split(1), |s| {
        local_sample(xi, da, db, s).powi(2)
    })?;
    let fourth = mc_expectation(samples, &mut rng.split(2), |s| {
        local_sample(xi, da, db, s).powi(4)
    })?;
    Ok(LocalMomentAudit {
        abs_first,
        second,
        fourth,
    })
}

/// How a chain entry was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    Analytic,
    MonteCarlo,
    Lp,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::Analytic => "analytic",
            Provenance::MonteCarlo => "monte_carlo",
            Provenance::Lp => "lp",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ChainEntry {
    pub bound_name: String,
    pub value: f64,
    pub provenance: Provenance,
    pub std_error: Option<f64>,
}

/// The numeric chain of locality-restricted domination bounds on a
/// `d x d` system, evaluated on the hiding direction.
#[derive(Clone, Debug)]
pub struct ChainReport {
    pub dim_per_party: usize,
    pub entries: Vec<ChainEntry>,
    pub monotone: bool,
    pub samples: usize,
    pub seed: u64,
}

/// Build the chain on the hiding direction: the two analytic floor forms,
/// the Monte-Carlo local-uniform bias, the Gurvits-Barnum separability
/// floor `1/d`, the exact PPT value from the linear program, and the
/// analytic data-hiding ceiling `2/(d+1)`.
pub fn chain_report(d: usize, samples: usize, rng: &mut RngStream) -> Result<ChainReport> {
    let pair = hiding_pair(d)?;
    let xi = pair.direction();
    let df = d as f64;
    let root153 = 153.0_f64.sqrt();

    let l1_floor = 1.0 / (root153 * df);
    let l2_floor = xi.hs_norm() / root153;
    let mc = mc_local_uniform_bias(&xi, samples, rng)?;
    let sep_floor = 1.0 / df;
    let invariant = UUInvariantOp::from_operator(&xi)?;
    let lp = ppt_norm_uu_invariant(&invariant)?;
    let ceiling = 2.0 / (df + 1.0);

    let entries = vec![
        ChainEntry {
            bound_name: "local_uniform_floor_l1".into(),
            value: l1_floor,
            provenance: Provenance::Analytic,
            std_error: None,
        },
        ChainEntry {
            bound_name: "local_uniform_floor_l2".into(),
            value: l2_floor,
            provenance: Provenance::Analytic,
            std_error: None,
        },
        ChainEntry {
            bound_name: "local_uniform_bias_mc".into(),
            value: mc.mean,
            provenance: Provenance::MonteCarlo,
            std_error: Some(mc.std_error),
        },
        ChainEntry {
            bound_name: "sep_gurvits_barnum_floor".into(),
            value: sep_floor,
            provenance: Provenance::Analytic,
            std_error: None,
        },
        ChainEntry {
            bound_name: "ppt_hiding_value_lp".into(),
            value: lp.value,
            provenance: Provenance::Lp,
            std_error: None,
        },
        ChainEntry {
            bound_name: "ppt_data_hiding_ceiling".into(),
            value: ceiling,
            provenance: Provenance::Analytic,
            std_error: None,
        },
    ];
    let mut monotone = true;
    for w in entries.windows(2) {
        let slack = 1e-9 + 5.0 * (w[0].std_error.unwrap_or(0.0) + w[1].std_error.unwrap_or(0.0));
        if w[0].value > w[1].value + slack {
            monotone = false;
        }
    }
    Ok(ChainReport {
        dim_per_party: d,
        entries,
        monotone,
        samples,
        seed: rng.seed(),
    })
}
