//! Shared numerical kernels: log-factorials, Gauss-Legendre rules,
//! symmetric tridiagonal eigensolves, Lanczos extremal eigenvalues,
//! and log-log line fits.

pub mod fit;
pub mod gauss;
pub mod lanczos;
pub mod logfact;
pub mod tridiag;

pub use fit::{line_fit, loglog_fit};
pub use gauss::gauss_legendre;
pub use lanczos::{hermitian_extremes, operator_norm};
pub use logfact::{factorial_u128, ln_binomial, ln_factorial};
pub use tridiag::{eigenvalue_by_index, lowest_two, sturm_count};
