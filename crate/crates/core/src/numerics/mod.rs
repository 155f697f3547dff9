//! Complex dense linear algebra and seeded Gaussian sampling.

mod eig;
mod lstsq;
mod matrix;
mod random;

pub use eig::{hermitian_eig, HermitianEig};
pub use lstsq::{cholesky, hpd_inverse, ls_solve, solve_spd};
pub use matrix::{dot_conj, CMatrix};
pub use random::{draw_complex_gaussian, RandomSource};
