//! Seed handling and random matrix draws.
//!
//! The RNG contract for the whole crate: ChaCha12 seeded from a 64-bit
//! value, with derived seeds produced by the splitmix64 finalizer applied
//! to (master ^ index * golden-ratio constant). Results are therefore
//! independent of any parallel schedule.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::linalg::{ComplexMatrix, HermitianOperator};

pub type CoreRng = ChaCha12Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// splitmix64 finalizer; a fixed 64-bit mixer.
fn finalize(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive an independent stream seed from a master seed and an index.
pub fn mix_seed(master: u64, index: u64) -> u64 {
    finalize(master ^ index.wrapping_mul(GOLDEN).wrapping_add(GOLDEN))
}

pub fn rng_from_seed(seed: u64) -> CoreRng {
    ChaCha12Rng::seed_from_u64(seed)
}

pub fn standard_normal(rng: &mut CoreRng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn random_complex_gaussian(rng: &mut CoreRng) -> Complex64 {
    Complex64::new(standard_normal(rng), standard_normal(rng))
}

/// Random Hermitian matrix with Gaussian entries, (G + G^dag)/2.
pub fn random_hermitian(dim: usize, rng: &mut CoreRng) -> HermitianOperator {
    let g = DMatrix::from_fn(dim, dim, |_, _| random_complex_gaussian(rng));
    let h = (&g + g.adjoint()) * Complex64::new(0.5, 0.0);
    HermitianOperator::new(ComplexMatrix::from_dmatrix(h).expect("finite by construction"))
        .expect("Hermitian by construction")
}

/// Flat Dirichlet draw via normalized exponentials.
pub fn flat_dirichlet(len: usize, rng: &mut CoreRng) -> Vec<f64> {
    let mut w: Vec<f64> = (0..len)
        .map(|_| {
            let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            -u.ln()
        })
        .collect();
    let total: f64 = w.iter().sum();
    for x in &mut w {
        *x /= total;
    }
    w
}
