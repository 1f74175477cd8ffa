//! Exponents attached to the critical power nonlinearity in three space
//! dimensions.
//!
//! The critical exponent is the positive root of 2p² - 4p - 2 = 0, i.e.
//! p = 1 + √2.  Everything downstream (test-function exponent q, Hölder
//! conjugate, iteration growth rates) is derived from it; the struct keeps the
//! values together so the algebraic identities between them can be asserted in
//! one place.

/// Exponent bundle for the three-dimensional critical wave equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StraussConstants {
    /// Critical exponent p = 1 + √2.
    pub p: f64,
    /// Test-function exponent q = 1 - 1/p = 2 - √2.
    pub q: f64,
    /// Hölder conjugate p' = p/(p-1).
    pub p_conj: f64,
    /// Space dimension.
    pub dim: u32,
}

impl StraussConstants {
    pub fn new() -> Self {
        let p = 1.0 + std::f64::consts::SQRT_2;
        StraussConstants {
            p,
            q: 1.0 - 1.0 / p,
            p_conj: p / (p - 1.0),
            dim: 3,
        }
    }

    /// Residual of the defining quadratic (n-1)p² - (n+1)p - 2 at n = 3.
    pub fn critical_residual(&self) -> f64 {
        2.0 * self.p * self.p - 4.0 * self.p - 2.0
    }
}

impl Default for StraussConstants {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-12;

    #[test]
    fn critical_exponent_solves_quadratic() {
        let c = StraussConstants::new();
        assert!(
            c.critical_residual().abs() < TOL,
            "2p^2 - 4p - 2 = {:e}",
            c.critical_residual()
        );
    }

    #[test]
    fn exponent_identities() {
        let c = StraussConstants::new();
        assert!((c.q - (2.0 - std::f64::consts::SQRT_2)).abs() < TOL);
        assert!((c.q - 1.0 / c.p_conj).abs() < TOL, "q = 1/p'");
        assert!((c.p / c.p_conj - (c.p - 1.0)).abs() < TOL, "p/p' = p - 1");
        assert!(((2.0 - c.p) - (-1.0 / c.p)).abs() < TOL, "2 - p = -1/p");
    }
}
