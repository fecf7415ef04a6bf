//! Default tolerances.

/// Identities that hold exactly on jets (residuals are pure roundoff).
pub const ALGEBRAIC: f64 = 1e-9;
/// Fiber-integral identities in dimension 2.
pub const QUADRATURE_2D: f64 = 1e-6;
/// Fiber-integral identities in dimensions 3 and 4.
pub const QUADRATURE: f64 = 1e-5;
/// Einstein, weakly-Landsberg and quadraticity thresholds.
pub const CLASSIFICATION: f64 = 1e-6;
/// Spread of `ρ` over a base grid for the constancy theorems.
pub const RHO_SPREAD: f64 = 1e-7;
/// Boundary-free integrals on the torus, normalised by the torus volume.
pub const STOKES: f64 = 1e-6;
/// Relative change of the fiber volume under a change of section.
pub const SECTION_INVARIANCE: f64 = 1e-12;

/// Default tolerance of the fiber-integral identities in dimension `n`.
pub fn quadrature(n: usize) -> f64 {
    if n <= 2 {
        QUADRATURE_2D
    } else {
        QUADRATURE
    }
}
