//! Exact computation of normal form equations for bivariate polynomial germs
//! with non-degenerate Newton boundary: Newton polygon geometry, regular
//! bases of the local algebra, and the iterative elimination of terms above
//! the boundary, all over exact rational arithmetic.

pub mod gb;
mod linalg;
pub mod moduli;
pub mod newton;
pub mod poly;
pub mod regbasis;
pub mod report;
