//! Numeric support: float shims, special functions, quadrature, random
//! draws, tiny dense linear algebra, and a BFGS maximizer.

pub mod linalg;
pub mod math;
pub mod optim;
pub mod quad;
pub mod rng;
pub mod special;
