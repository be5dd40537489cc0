//! Dense Hermitian operators: spectral functionals, bipartite structure
//! maps, and Haar sampling.

use nalgebra::{Complex, DMatrix, DVector};

use crate::rng::RngStream;
use crate::{Error, Result, DIM_CAP};

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Relative Hermiticity tolerance at construction.
pub const HERM_TOL: f64 = 1e-10;
/// Eigenvalue floor used when testing positive semidefiniteness.
pub const PSD_TOL: f64 = 1e-9;

/// A dense Hermitian operator with optional bipartite shape metadata.
///
/// Construction symmetrizes `(H + H^dag)/2` when the input is Hermitian
/// within [`HERM_TOL`] (relative to the largest entry magnitude) and rejects
/// it otherwise, so floating-point drift is absorbed without masking bugs.
#[derive(Clone, Debug)]
pub struct HermitianOp {
    dim: usize,
    shape: Option<(usize, usize)>,
    mat: CMat,
}

impl HermitianOp {
    pub fn new(mat: CMat, shape: Option<(usize, usize)>) -> Result<Self> {
        let (rows, cols) = mat.shape();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        let dim = rows;
        if let Some((da, db)) = shape {
            if da * db != dim || da == 0 || db == 0 {
                return Err(Error::BadShape { da, db, dim });
            }
        }
        let mut scale: f64 = 0.0;
        for (r, c) in mat
            .iter()
            .enumerate()
            .map(|(k, v)| ((k % dim, k / dim), v))
            .map(|(p, _)| p)
        {
            let v = mat[(r, c)];
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::NonFinite { row: r, col: c });
            }
            scale = scale.max(v.norm());
        }
        let mut residual: f64 = 0.0;
        for r in 0..dim {
            for c in r..dim {
                residual = residual.max((mat[(r, c)] - mat[(c, r)].conj()).norm());
            }
        }
        if scale > 0.0 && residual > HERM_TOL * scale {
            return Err(Error::NotHermitian {
                residual: residual / scale,
                tol: HERM_TOL,
            });
        }
        let herm = (&mat + mat.adjoint()).scale(0.5);
        Ok(Self {
            dim,
            shape,
            mat: herm,
        })
    }

    /// Zero operator of dimension `dim`.
    pub fn zeros(dim: usize, shape: Option<(usize, usize)>) -> Result<Self> {
        Self::new(CMat::zeros(dim, dim), shape)
    }

    /// Identity operator.
    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            shape: None,
            mat: CMat::identity(dim, dim),
        }
    }

    /// Build from a real diagonal.
    pub fn from_diagonal(diag: &[f64]) -> Self {
        let dim = diag.len();
        let mut mat = CMat::zeros(dim, dim);
        for (i, &v) in diag.iter().enumerate() {
            mat[(i, i)] = C64::new(v, 0.0);
        }
        Self {
            dim,
            shape: None,
            mat,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> Option<(usize, usize)> {
        self.shape
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    /// Same operator with different shape metadata.
    pub fn with_shape(&self, shape: Option<(usize, usize)>) -> Result<Self> {
        if let Some((da, db)) = shape {
            if da * db != self.dim || da == 0 || db == 0 {
                return Err(Error::BadShape {
                    da,
                    db,
                    dim: self.dim,
                });
            }
        }
        Ok(Self {
            dim: self.dim,
            shape,
            mat: self.mat.clone(),
        })
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.mat[(i, i)].re).sum()
    }

    /// Ascending eigenvalues and matching orthonormal eigenvector columns.
    pub fn eigh(&self) -> (Vec<f64>, CMat) {
        eigh(&self.mat)
    }

    /// Eigenvalues sorted descending.
    pub fn spectrum(&self) -> Spectrum {
        let (mut vals, _) = self.eigh();
        vals.reverse();
        Spectrum { eigenvalues: vals }
    }

    /// Trace norm: the sum of absolute eigenvalues.
    pub fn trace_norm(&self) -> f64 {
        self.eigh().0.iter().map(|v| v.abs()).sum()
    }

    /// Hilbert-Schmidt norm.
    pub fn hs_norm(&self) -> f64 {
        self.mat.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest absolute eigenvalue.
    pub fn operator_norm(&self) -> f64 {
        self.eigh()
            .0
            .iter()
            .fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            shape: self.shape,
            mat: self.mat.scale(factor),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(Self {
            dim: self.dim,
            shape: self.shape.or(other.shape),
            mat: &self.mat + &other.mat,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    /// Smallest eigenvalue.
    pub fn min_eigenvalue(&self) -> f64 {
        self.eigh().0[0]
    }

    /// Density-matrix test: PSD within [`PSD_TOL`] and unit trace within 1e-9.
    pub fn check_density(&self) -> Result<()> {
        let tr = self.trace();
        if (tr - 1.0).abs() > 1e-9 {
            return Err(Error::NotDensity {
                reason: format!("trace {tr:.12} is not 1"),
            });
        }
        let min = self.min_eigenvalue();
        if min < -PSD_TOL {
            return Err(Error::NotDensity {
                reason: format!("minimum eigenvalue {min:.3e}"),
            });
        }
        Ok(())
    }

    /// Partial trace over the discarded party.
    pub fn partial_trace(&self, side: Party) -> Result<Self> {
        let (da, db) = self.shape.ok_or(Error::MissingShape)?;
        let mat = match side {
            // keep A, trace out B
            Party::A => {
                let mut out = CMat::zeros(da, da);
                for a1 in 0..da {
                    for a2 in 0..da {
                        let mut acc = C64::new(0.0, 0.0);
                        for b in 0..db {
                            acc += self.mat[(a1 * db + b, a2 * db + b)];
                        }
                        out[(a1, a2)] = acc;
                    }
                }
                out
            }
            // keep B, trace out A
            Party::B => {
                let mut out = CMat::zeros(db, db);
                for b1 in 0..db {
                    for b2 in 0..db {
                        let mut acc = C64::new(0.0, 0.0);
                        for a in 0..da {
                            acc += self.mat[(a * db + b1, a * db + b2)];
                        }
                        out[(b1, b2)] = acc;
                    }
                }
                out
            }
        };
        HermitianOp::new(mat, None)
    }

    /// Partial transpose on party B in the computational basis.
    pub fn partial_transpose(&self) -> Result<Self> {
        let (da, db) = self.shape.ok_or(Error::MissingShape)?;
        let mut out = CMat::zeros(self.dim, self.dim);
        for a1 in 0..da {
            for a2 in 0..da {
                for b1 in 0..db {
                    for b2 in 0..db {
                        out[(a1 * db + b2, a2 * db + b1)] = self.mat[(a1 * db + b1, a2 * db + b2)];
                    }
                }
            }
        }
        HermitianOp::new(out, self.shape)
    }

    /// Kronecker product, recording the bipartite shape.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let dim = self.dim * other.dim;
        if dim > DIM_CAP {
            return Err(Error::DimensionCap { dim, cap: DIM_CAP });
        }
        let mat = self.mat.kronecker(&other.mat);
        Ok(Self {
            dim,
            shape: Some((self.dim, other.dim)),
            mat,
        })
    }

    /// Conjugate by a unitary: `U H U^dag`.
    pub fn conjugate_by(&self, u: &CMat) -> Result<Self> {
        check_unitary(u, 1e-10)?;
        if u.nrows() != self.dim {
            return Err(Error::DimensionMismatch {
                left: u.nrows(),
                right: self.dim,
            });
        }
        HermitianOp::new(u * &self.mat * u.adjoint(), self.shape)
    }
}

/// Which party a bipartite map keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Party {
    A,
    B,
}

/// Real eigenvalues sorted descending.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
}

/// A unit vector in `C^d`.
#[derive(Clone, Debug)]
pub struct PureState {
    amps: CVec,
}

impl PureState {
    pub fn new(amps: CVec) -> Result<Self> {
        let norm = amps.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "state vector norm {norm:.15} is not 1"
            )));
        }
        Ok(Self { amps })
    }

    /// Normalize an arbitrary nonzero vector.
    pub fn normalized(amps: CVec) -> Result<Self> {
        let norm = amps.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidArgument(
                "cannot normalize zero vector".into(),
            ));
        }
        Ok(Self {
            amps: amps.unscale(norm),
        })
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amps
    }

    pub fn overlap(&self, other: &Self) -> C64 {
        self.amps.dotc(&other.amps)
    }

    /// Rank-1 projector `|psi><psi|`.
    pub fn projector(&self) -> HermitianOp {
        let dim = self.dim();
        let mut mat = CMat::zeros(dim, dim);
        for r in 0..dim {
            for c in 0..dim {
                mat[(r, c)] = self.amps[r] * self.amps[c].conj();
            }
        }
        HermitianOp {
            dim,
            shape: None,
            mat,
        }
    }

    /// `<psi| H |psi>` (real part; the imaginary part vanishes for Hermitian H).
    pub fn expectation(&self, h: &HermitianOp) -> f64 {
        let hv = h.matrix() * &self.amps;
        self.amps.dotc(&hv).re
    }

    pub fn basis_vector(dim: usize, index: usize) -> Self {
        let mut amps = CVec::zeros(dim);
        amps[index] = C64::new(1.0, 0.0);
        Self { amps }
    }
}

/// Hilbert-Schmidt inner product `tr(AB)`, real for Hermitian arguments.
pub fn hs_inner(a: &HermitianOp, b: &HermitianOp) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    let mut acc = 0.0;
    let (am, bm) = (a.matrix(), b.matrix());
    for r in 0..a.dim() {
        for c in 0..a.dim() {
            // tr(AB) = sum_rc A[r,c] B[c,r]; both Hermitian, so this is
            // sum_rc A[r,c] conj(B[r,c]) whose total is real.
            acc += (am[(r, c)] * bm[(c, r)]).re;
        }
    }
    Ok(acc)
}

pub fn hs_norm(a: &HermitianOp) -> f64 {
    a.hs_norm()
}

/// Trace norm of a Hermitian operator.
pub fn trace_norm(h: &HermitianOp) -> f64 {
    h.trace_norm()
}

/// Helstrom bias `||rho - sigma||_1 / 2` together with the optimal
/// two-outcome projector (onto the positive eigenspace of the difference).
pub fn helstrom_bias(rho: &HermitianOp, sigma: &HermitianOp) -> Result<(f64, HermitianOp)> {
    rho.check_density()?;
    sigma.check_density()?;
    let diff = rho.sub(sigma)?;
    let (vals, vecs) = diff.eigh();
    let bias = 0.5 * vals.iter().map(|v| v.abs()).sum::<f64>();
    let dim = diff.dim();
    let mut proj = CMat::zeros(dim, dim);
    for (i, &v) in vals.iter().enumerate() {
        if v > 0.0 {
            let col = vecs.column(i);
            for r in 0..dim {
                for c in 0..dim {
                    proj[(r, c)] += col[r] * col[c].conj();
                }
            }
        }
    }
    Ok((bias, HermitianOp::new(proj, rho.shape())?))
}

/// Haar-random unit vector via a normalized complex Gaussian.
pub fn haar_state(dim: usize, rng: &mut RngStream) -> Result<PureState> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension 0".into()));
    }
    let mut amps = CVec::zeros(dim);
    for i in 0..dim {
        amps[i] = C64::new(rng.normal(), rng.normal());
    }
    PureState::normalized(amps)
}

/// Haar-random unitary: QR of a complex Gaussian matrix with the phase fix.
pub fn haar_unitary(dim: usize, rng: &mut RngStream) -> CMat {
    let mut g = CMat::zeros(dim, dim);
    for r in 0..dim {
        for c in 0..dim {
            g[(r, c)] = C64::new(rng.normal(), rng.normal());
        }
    }
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for c in 0..dim {
        let d = r[(c, c)];
        let phase = if d.norm() == 0.0 {
            C64::new(1.0, 0.0)
        } else {
            d.unscale(d.norm())
        };
        for rr in 0..dim {
            q[(rr, c)] *= phase.conj();
        }
    }
    q
}

/// A pair of Haar-random orthonormal vectors.
pub fn haar_orthogonal_pair(dim: usize, rng: &mut RngStream) -> Result<(PureState, PureState)> {
    if dim < 2 {
        return Err(Error::InvalidArgument("need dimension >= 2".into()));
    }
    loop {
        let v1 = haar_state(dim, rng)?.amps;
        let mut v2 = haar_state(dim, rng)?.amps;
        let overlap = v1.dotc(&v2);
        v2 -= v1.clone() * overlap;
        let norm = v2.norm();
        if norm > 1e-8 {
            return Ok((PureState::new(v1)?, PureState::normalized(v2)?));
        }
    }
}

/// Random direction `xi = (rho - sigma)/2` for Haar-random orthogonal states
/// `rho` and `sigma` with a random spectral split; `tr(xi) = 0` and
/// `||xi||_1 = 1` by construction.
pub fn random_traceless_direction(dim: usize, rng: &mut RngStream) -> Result<HermitianOp> {
    if dim < 2 {
        return Err(Error::InvalidArgument("need dimension >= 2".into()));
    }
    let a = 1 + rng.below(dim - 1);
    random_split_direction(dim, a, rng)
}

/// Like [`random_traceless_direction`] with the positive rank fixed to `a`.
pub fn random_split_direction(dim: usize, a: usize, rng: &mut RngStream) -> Result<HermitianOp> {
    if a == 0 || a >= dim {
        return Err(Error::InvalidArgument(format!(
            "positive rank {a} must lie strictly between 0 and {dim}"
        )));
    }
    let b = dim - a;
    let spec_pos = dirichlet(a, rng);
    let spec_neg = dirichlet(b, rng);
    let u = haar_unitary(dim, rng);
    let mut diag = Vec::with_capacity(dim);
    diag.extend(spec_pos.iter().map(|p| p / 2.0));
    diag.extend(spec_neg.iter().map(|q| -q / 2.0));
    conjugated_diagonal(&diag, &u)
}

/// `U diag(d) U^dag` as a validated Hermitian operator.
pub fn conjugated_diagonal(diag: &[f64], u: &CMat) -> Result<HermitianOp> {
    let dim = diag.len();
    let mut m = CMat::zeros(dim, dim);
    for r in 0..dim {
        for c in 0..dim {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..dim {
                acc += u[(r, k)] * u[(c, k)].conj() * C64::new(diag[k], 0.0);
            }
            m[(r, c)] = acc;
        }
    }
    HermitianOp::new(m, None)
}

fn dirichlet(n: usize, rng: &mut RngStream) -> Vec<f64> {
    // flat Dirichlet via normalized exponentials
    let mut e: Vec<f64> = (0..n)
        .map(|_| -rng.uniform().max(f64::MIN_POSITIVE).ln())
        .collect();
    let total: f64 = e.iter().sum();
    for v in &mut e {
        *v /= total;
    }
    e
}

pub(crate) fn check_unitary(u: &CMat, tol: f64) -> Result<()> {
    let dim = u.nrows();
    if dim != u.ncols() {
        return Err(Error::NotSquare {
            rows: dim,
            cols: u.ncols(),
        });
    }
    let gram = u.adjoint() * u;
    let mut residual: f64 = 0.0;
    for r in 0..dim {
        for c in 0..dim {
            let expect = if r == c { 1.0 } else { 0.0 };
            residual = residual.max((gram[(r, c)] - C64::new(expect, 0.0)).norm());
        }
    }
    if residual > tol {
        return Err(Error::NotUnitary { residual });
    }
    Ok(())
}

/// Ascending eigenvalues with matching eigenvector columns.
pub(crate) fn eigh(mat: &CMat) -> (Vec<f64>, CMat) {
    let dim = mat.nrows();
    let se = mat.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| se.eigenvalues[i].partial_cmp(&se.eigenvalues[j]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vecs = CMat::zeros(dim, dim);
    for (pos, &i) in order.iter().enumerate() {
        vecs.set_column(pos, &se.eigenvectors.column(i));
    }
    (vals, vecs)
}
