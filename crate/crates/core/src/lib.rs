//! Singularities of generalized timelike minimal surfaces in Lorentz–Minkowski
//! 3-space, classified from their real Weierstrass data.

pub mod expr;
pub mod jets;
pub mod quad;
pub mod surface;
pub mod roots;
pub mod quantities;
pub mod singular;
pub mod classify;
pub mod oracle;
pub mod specfile;
pub mod fixtures;
pub mod fuzz;
pub mod report;
