//! Seeded sampling helpers used by property checks, scans and tests.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_vector(rng: &mut Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| StandardNormal.sample(rng))
}

/// Symmetric matrix with independent standard normal upper triangle.
pub fn gaussian_symmetric(rng: &mut Rng, n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let x: f64 = StandardNormal.sample(rng);
            m[(i, j)] = x;
            m[(j, i)] = x;
        }
    }
    m
}

/// Gaussian symmetric operator on `∧²ℝⁿ` with its `∧⁴` component removed,
/// i.e. an algebraic curvature operator.
pub fn gaussian_bianchi_free(rng: &mut Rng, n: usize) -> crate::SymmetricBivectorOperator {
    let frame = crate::BivectorFrame::new(n);
    let s = crate::SymmetricBivectorOperator::from_matrix(
        frame.clone(),
        gaussian_symmetric(rng, frame.dim()),
        "random",
    )
    .expect("matching size");
    let b = s.bianchi().to_operator();
    s.sub(&b)
        .expect("same frame")
        .with_construction("random bianchi-free")
}
