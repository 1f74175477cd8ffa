//! The exponential test-function family used by the weighted functionals.
//!
//! Building blocks: Φ(x) = 4π sinh|x|/|x| (the closed form of the sphere
//! integral ∫_{S²} e^{x·ω} dσ, an eigenfunction of Δ), the modified log
//! product M_k(λ) = (log 1/λ)⋯(log^{k-1} 1/λ), and the auxiliary kernel
//!
//!   η_q^k(t, s, x) = ∫₀^{λ_k} e^{-λ(1+t)} K(λ(t-s)) Φ(λ|x|) λ^q M_k^{-q}(λ) dλ
//!
//! with K(z) = sinh(z)/z.  The two sinh factors and the decaying exponential
//! are combined into a single exponent before exponentiation, so the kernel
//! never overflows even when λ|x| is large.
//!
//! Two-sided bracket bounds on η are checked numerically over sample sets.
//! The bracket weight ⟨x⟩ = (shift² + |x|²)^{1/2} carries a per-depth shift:
//! the calibration log^{k+1} R_k = 3 pins R₁ = e^{e³} ≈ 5.29e8, but its k = 2
//! value e^{R₁} overflows any float, and a shift that large is constant over
//! every reachable t anyway, collapsing ratio statistics.  The default shift
//! is therefore 1 for k = 1 and 1/λ_k for k ≥ 2, which keeps ⟨x⟩^{-1} inside
//! the domain of M_k; the calibrated R₁ stays available for reference.

use std::f64::consts::PI;

use crate::constants::StraussConstants;
use crate::modulus::{iterated_exp, lambda_k};
use crate::quad::adaptive_simpson;
use crate::{Error, Result};

/// Φ(|x|) = 4π sinh|x|/|x|, with the series used near the removable
/// singularity.  Grows like e^{|x|}, so direct use is limited to |x| ≲ 700;
/// the η integrand goes through [`stable_kernel`] instead.
pub fn phi(x_norm: f64) -> f64 {
    assert!(x_norm >= 0.0, "Φ takes a radius");
    if x_norm < 1e-4 {
        let x2 = x_norm * x_norm;
        4.0 * PI * (1.0 + x2 / 6.0 + x2 * x2 / 120.0)
    } else {
        4.0 * PI * x_norm.sinh() / x_norm
    }
}

/// (1 - e^{-2v})/(2v), the bounded part of sinh(v)/v = e^v (1-e^{-2v})/(2v).
fn half_ratio(v: f64) -> f64 {
    if v < 1e-4 {
        // series of (1 - e^{-2v})/(2v)
        1.0 - v + 2.0 * v * v / 3.0 - v * v * v / 3.0
    } else {
        -(-2.0 * v).exp_m1() / (2.0 * v)
    }
}

/// K(z)·Φ(w)·e^{-λ(1+t)} with the three exponentials fused: the factor is
/// 4π · [(1-e^{-2z})/2z] · [(1-e^{-2w})/2w] · e^{z + w - λ(1+t)}.
fn stable_kernel(z: f64, w: f64, damp: f64) -> f64 {
    4.0 * PI * half_ratio(z) * half_ratio(w) * (z + w - damp).exp()
}

/// M_k(λ) = Π_{i=1..k-1} log^i(1/λ); M₁ ≡ 1.
pub fn m_k_eval(k: u32, lambda: f64) -> Result<f64> {
    let lam_k = lambda_k(k)?;
    if !(lambda > 0.0 && lambda <= lam_k * (1.0 + 1e-12)) {
        return Err(Error::domain(format!(
            "M_{k} defined on (0, {lam_k:e}], got λ = {lambda:e}"
        )));
    }
    let mut prod = 1.0;
    let mut v = -lambda.ln();
    for _ in 1..k {
        prod *= v;
        v = v.ln();
    }
    Ok(prod)
}

/// Parameters of the depth-k auxiliary kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunctionParams {
    pub k: u32,
    pub q: f64,
    pub lambda_k: f64,
    pub bracket_shift: f64,
    pub quad_tol: f64,
}

impl TestFunctionParams {
    pub fn new(k: u32) -> Result<Self> {
        let lam = lambda_k(k)?;
        let shift = if k == 1 { 1.0 } else { 1.0 / lam };
        Ok(TestFunctionParams {
            k,
            q: StraussConstants::new().q,
            lambda_k: lam,
            bracket_shift: shift,
            quad_tol: 1e-10,
        })
    }

    pub fn with_quad_tol(mut self, tol: f64) -> Self {
        self.quad_tol = tol;
        self
    }

    pub fn with_bracket_shift(mut self, shift: f64) -> Result<Self> {
        if !(shift > 0.0) {
            return Err(Error::validation(format!("bracket shift must be positive, got {shift}")));
        }
        if self.k >= 2 && shift < 1.0 / self.lambda_k {
            return Err(Error::validation(format!(
                "bracket shift {shift} too small: ⟨x⟩^(-1) must stay within (0, λ_{}]",
                self.k
            )));
        }
        self.bracket_shift = shift;
        Ok(self)
    }

    /// The calibrated reference value R_k with log^{k+1} R_k = 3, when it is
    /// representable (k = 1 only: R₁ = e^{e³}; already e^{R₁} overflows).
    pub fn calibrated_r_k(&self) -> Option<f64> {
        if self.k == 1 {
            Some(iterated_exp(2, 3.0))
        } else {
            None
        }
    }

    /// ⟨x⟩ = (shift² + |x|²)^{1/2}.
    pub fn bracket(&self, x: f64) -> f64 {
        (self.bracket_shift * self.bracket_shift + x * x).sqrt()
    }

    /// M_k(⟨x⟩^{-1}), the log-product factor of the bracket bounds.  Unlike
    /// [`m_k_eval`] this needs no domain clamp: the shift keeps ⟨x⟩^{-1}
    /// inside (0, λ_k] for k ≥ 2, and M₁ ≡ 1.
    pub fn m_k_at_inverse_bracket(&self, x: f64) -> f64 {
        if self.k == 1 {
            return 1.0;
        }
        let mut prod = 1.0;
        let mut v = self.bracket(x).ln();
        for _ in 1..self.k {
            prod *= v;
            v = v.ln();
        }
        prod
    }

    /// η_q^k(t, s, |x|) by adaptive quadrature.
    pub fn eta(&self, t: f64, s: f64, x_norm: f64) -> Result<f64> {
        if !(0.0 <= s && s <= t) {
            return Err(Error::domain(format!("need 0 ≤ s ≤ t, got s = {s}, t = {t}")));
        }
        if !(x_norm >= 0.0) {
            return Err(Error::domain(format!("radius must be non-negative, got {x_norm}")));
        }
        let q = self.q;
        let k = self.k;
        let lam_k = self.lambda_k;
        let f = |lam: f64| -> f64 {
            if lam <= 0.0 {
                return 0.0;
            }
            let z = lam * (t - s);
            let w = lam * x_norm;
            let damp = lam * (1.0 + t);
            let mut mkq = 1.0f64;
            let mut v = -lam.ln();
            for _ in 1..k {
                mkq *= v;
                v = v.ln();
            }
            stable_kernel(z, w, damp) * lam.powf(q) * mkq.powf(-q)
        };
        let r = adaptive_simpson(f, 0.0, lam_k, self.quad_tol, 1e-300, "eta quadrature")?;
        Ok(r.value)
    }

    /// Brute-force trapezoid evaluation of the same integrand; oracle only.
    pub fn eta_trapezoid(&self, t: f64, s: f64, x_norm: f64, panels: usize) -> f64 {
        let q = self.q;
        let k = self.k;
        let f = |lam: f64| -> f64 {
            if lam <= 0.0 {
                return 0.0;
            }
            let z = lam * (t - s);
            let w = lam * x_norm;
            let damp = lam * (1.0 + t);
            let mut mkq = 1.0f64;
            let mut v = -lam.ln();
            for _ in 1..k {
                mkq *= v;
                v = v.ln();
            }
            stable_kernel(z, w, damp) * lam.powf(q) * mkq.powf(-q)
        };
        crate::quad::trapezoid(f, 0.0, self.lambda_k, panels)
    }

    /// Ratio statistics for the two-sided bracket bounds.
    ///
    /// For (t, s, x) samples with s < t the lower-bound ratio is
    /// r₁ = η(t,s,x) · ⟨t⟩ ⟨s⟩^q M_k^q(⟨s⟩^{-1}); for diagonal samples
    /// (t, x) the two-sided ratio is r₂ = η(t,t,x) · ⟨t⟩ ⟨t-|x|⟩^q
    /// M_k^q(⟨t-|x|⟩^{-1}).
    pub fn eta_bounds_check(
        &self,
        ts_samples: &[(f64, f64, f64)],
        tt_samples: &[(f64, f64)],
    ) -> Result<BoundRatioReport> {
        let q = self.q;
        let mut report = BoundRatioReport::default();
        for &(t, s, x) in ts_samples {
            if !(s >= 0.0 && s < t && x <= 1.0 + s && x >= 0.0) {
                return Err(Error::domain(format!(
                    "off-diagonal sample needs 0 ≤ s < t and |x| ≤ 1+s, got ({t}, {s}, {x})"
                )));
            }
            let eta = self.eta(t, s, x)?;
            let bound = self.bracket(t).recip()
                * self.bracket(s).powf(-q)
                * self.m_k_at_inverse_bracket(s).powf(-q);
            let ratio = eta / bound;
            report.push_r1(RatioSample { t, s, x, eta, bound, ratio });
        }
        for &(t, x) in tt_samples {
            if !(t >= 0.0 && x >= 0.0 && x <= 1.0 + t) {
                return Err(Error::domain(format!(
                    "diagonal sample needs |x| ≤ 1+t, got ({t}, {x})"
                )));
            }
            let eta = self.eta(t, t, x)?;
            let bound = self.bracket(t).recip()
                * self.bracket(t - x).powf(-q)
                * self.m_k_at_inverse_bracket(t - x).powf(-q);
            let ratio = eta / bound;
            report.push_r2(RatioSample { t, s: t, x, eta, bound, ratio });
        }
        Ok(report)
    }

    /// Checks that λ^{q-1} M_k^{-q} strictly decreases and λ^q M_k^{-q}
    /// strictly increases across consecutive samples in (0, λ_k].
    pub fn monotonicity_check(&self, lambda_samples: &[f64]) -> Result<()> {
        let mut sorted: Vec<f64> = lambda_samples.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let q = self.q;
        let mut prev: Option<(f64, f64, f64)> = None;
        for &lam in &sorted {
            let mk = m_k_eval(self.k, lam)?;
            let dec = lam.powf(q - 1.0) * mk.powf(-q);
            let inc = lam.powf(q) * mk.powf(-q);
            if let Some((plam, pdec, pinc)) = prev {
                if dec >= pdec {
                    return Err(Error::validation(format!(
                        "λ^(q-1) M_k^(-q) fails to decrease between λ = {plam:e} and {lam:e}"
                    )));
                }
                if inc <= pinc {
                    return Err(Error::validation(format!(
                        "λ^q M_k^(-q) fails to increase between λ = {plam:e} and {lam:e}"
                    )));
                }
            }
            prev = Some((lam, dec, inc));
        }
        Ok(())
    }

    /// (k-1)/(2 e^{k-2}), the margin that keeps both monotonicities at depth
    /// k; equals 1/2 at k = 2 and 1/e at k = 3.
    pub fn monotonicity_margin(&self) -> f64 {
        (self.k as f64 - 1.0) / (2.0 * ((self.k as f64) - 2.0).exp())
    }
}

/// One evaluated bound sample; the raw rows behind the ratio report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioSample {
    pub t: f64,
    pub s: f64,
    pub x: f64,
    pub eta: f64,
    pub bound: f64,
    pub ratio: f64,
}

/// Min/max ratio statistics for the bracket bounds, with raw samples kept
/// for export.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BoundRatioReport {
    pub r1_min: Option<f64>,
    pub r1_max: Option<f64>,
    pub r2_min: Option<f64>,
    pub r2_max: Option<f64>,
    pub samples: Vec<RatioSample>,
}

impl BoundRatioReport {
    fn push_r1(&mut self, s: RatioSample) {
        self.r1_min = Some(self.r1_min.map_or(s.ratio, |m| m.min(s.ratio)));
        self.r1_max = Some(self.r1_max.map_or(s.ratio, |m| m.max(s.ratio)));
        self.samples.push(s);
    }

    fn push_r2(&mut self, s: RatioSample) {
        self.r2_min = Some(self.r2_min.map_or(s.ratio, |m| m.min(s.ratio)));
        self.r2_max = Some(self.r2_max.map_or(s.ratio, |m| m.max(s.ratio)));
        self.samples.push(s);
    }

    /// Lower bound holds and the diagonal ratio is confined.
    pub fn passes(&self) -> bool {
        matches!(self.r1_min, Some(m) if m > 0.0)
            && matches!((self.r2_min, self.r2_max), (Some(lo), Some(hi)) if lo > 0.0 && hi.is_finite())
    }
}
