//! Cross-module invariants: data-processing contraction, the relation
//! between the traceless and unrestricted domination constants, and
//! symmetrisation monotonicity of the lambda estimate.

use distnorm::designs::{design_povm, mub_design, qubit_sic_tetrahedron, WeightedDesign};
use distnorm::op::{haar_state, haar_unitary, CMat, HermitianOp, C64};
use distnorm::povm::{convex_combine, estimate_domination, MeasurementFamily, Povm};
use distnorm::rng::RngStream;

fn random_hermitian(dim: usize, rng: &mut RngStream) -> HermitianOp {
    let mut m = CMat::zeros(dim, dim);
    for r in 0..dim {
        for c in 0..dim {
            m[(r, c)] = C64::new(rng.normal(), rng.normal());
        }
    }
    HermitianOp::new((&m + m.adjoint()).scale(0.5), None).unwrap()
}

fn random_povm(dim: usize, outcomes: usize, rng: &mut RngStream) -> Povm {
    // random rank-1 pieces renormalized by S^{-1/2} to close the POVM
    let mut raw = Vec::with_capacity(outcomes);
    let mut sum = CMat::zeros(dim, dim);
    for _ in 0..outcomes {
        let p = haar_state(dim, rng).unwrap().projector();
        sum += p.matrix();
        raw.push(p);
    }
    let s = HermitianOp::new(sum, None).unwrap();
    let (vals, vecs) = s.eigh();
    let mut inv_sqrt = CMat::zeros(dim, dim);
    for (i, v) in vals.iter().enumerate() {
        let col = vecs.column(i);
        let w = C64::new(1.0 / v.sqrt(), 0.0);
        for r in 0..dim {
            for c in 0..dim {
                inv_sqrt[(r, c)] += col[r] * col[c].conj() * w;
            }
        }
    }
    let effects = raw
        .into_iter()
        .map(|p| HermitianOp::new(&inv_sqrt * p.matrix() * &inv_sqrt, None).unwrap())
        .collect();
    Povm::new(effects).unwrap()
}

#[test]
fn measurement_contracts_trace_norm() {
    let mut rng = RngStream::from_seed(901);
    for trial in 0..1000 {
        let dim = 2 + (trial % 3);
        let povm = random_povm(dim, dim + 2, &mut rng);
        let x = random_hermitian(dim, &mut rng);
        let image_l1 = povm.l1_of_image(&x).unwrap();
        assert!(
            image_l1 <= x.trace_norm() + 1e-9,
            "trial {trial}: {image_l1} > {}",
            x.trace_norm()
        );
    }
}

#[test]
fn unrestricted_constant_dominates_half_traceless_constant() {
    // lambda_1 >= lambda / 2, probed with matched sample sets
    let mut rng = RngStream::from_seed(902);
    let povm = design_povm(&mub_design(2).unwrap()).unwrap();
    let family = MeasurementFamily::new(vec![povm], "mub2").unwrap();
    let samples = 400;
    let mut min_any = f64::INFINITY;
    let mut min_traceless = f64::INFINITY;
    for _ in 0..samples {
        // arbitrary unit-trace-norm direction
        let h = random_hermitian(2, &mut rng);
        let scaled = h.scale(1.0 / h.trace_norm());
        min_any = min_any.min(family.norm(&scaled).unwrap());
        let xi = distnorm::op::random_traceless_direction(2, &mut rng).unwrap();
        min_traceless = min_traceless.min(family.norm(&xi).unwrap());
    }
    assert!(
        min_any >= 0.5 * min_traceless - 0.05,
        "{min_any} vs half of {min_traceless}"
    );
}

#[test]
fn symmetrised_family_has_no_smaller_lambda() {
    let mut rng = RngStream::from_seed(903);
    // a deliberately lopsided separating POVM
    let base = {
        let sic = design_povm(
            &WeightedDesign::from_vectors(
                qubit_sic_tetrahedron()
                    .into_iter()
                    .map(|v| (0.25, v))
                    .collect(),
                2,
            )
            .unwrap(),
        )
        .unwrap();
        let z = Povm::computational(2);
        convex_combine(&[(0.8, z), (0.2, sic)]).unwrap()
    };
    let original = MeasurementFamily::new(vec![base.clone()], "base").unwrap();
    let est_orig = estimate_domination(&original, 60, 6, &mut rng).unwrap();

    let conjugates = 12;
    let parts: Vec<(f64, Povm)> = (0..conjugates)
        .map(|_| {
            let u = haar_unitary(2, &mut rng);
            (1.0 / conjugates as f64, base.conjugate(&u).unwrap())
        })
        .collect();
    let averaged = convex_combine(&parts).unwrap();
    let avg_family = MeasurementFamily::new(vec![averaged], "averaged").unwrap();
    let est_avg = estimate_domination(&avg_family, 60, 6, &mut rng).unwrap();

    // allow the search noise of both estimates
    assert!(
        est_avg.lambda_upper >= est_orig.lambda_upper - 0.02,
        "averaged {} vs original {}",
        est_avg.lambda_upper,
        est_orig.lambda_upper
    );
}
