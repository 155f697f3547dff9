use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use super::CMatrix;
use crate::scalar::{cast, Real};

/// Seeded random stream. Equal `(seed, stream)` pairs replay identical draws;
/// distinct stream ids select independent ChaCha keystreams.
#[derive(Debug, Clone)]
pub struct RandomSource {
    seed: u64,
    stream: u64,
    rng: ChaCha12Rng,
}

impl RandomSource {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Uniform draw on `[lo, hi]`; a point range returns `lo`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        let u: f64 = self.rng.random();
        lo + (hi - lo) * u
    }

    /// One circularly symmetric complex Gaussian with total variance `variance`.
    pub fn complex_gaussian<T: Real>(&mut self, variance: f64) -> Complex<T> {
        let sd = (variance / 2.0).sqrt();
        let re: f64 = self.rng.sample(StandardNormal);
        let im: f64 = self.rng.sample(StandardNormal);
        Complex::new(cast(re * sd), cast(im * sd))
    }
}

/// `n` i.i.d. CN(0, variance) entries as a column vector.
pub fn draw_complex_gaussian<T: Real>(rng: &mut RandomSource, n: usize, variance: f64) -> CMatrix<T> {
    assert!(variance >= 0.0, "variance must be nonnegative");
    CMatrix::from_fn(n, 1, |_, _| rng.complex_gaussian(variance))
}
