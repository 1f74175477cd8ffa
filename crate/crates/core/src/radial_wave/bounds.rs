//! Bound checks on computed fields: the bootstrap comparison against the
//! decaying ansatz weight, and the pointwise lower-bound fits near the light
//! cone and deep inside it.

use crate::constants::StraussConstants;
use crate::modulus::ModulusSpec;
use crate::{Error, Result};

use super::{AnsatzWeight, SolutionField};

/// sup over the stored grid of |u| / (ε C₀ Φ₀).  A value ≤ 2 means the field
/// stays inside the bootstrap tube of the weight.
pub fn ansatz_margin(sol: &SolutionField, weight: &AnsatzWeight) -> Result<f64> {
    if sol.epsilon == 0.0 {
        return Err(Error::domain("margin is undefined at zero amplitude"));
    }
    let scale = sol.epsilon.abs() * weight.c0;
    let mut sup = 0.0f64;
    for i in 0..sol.n_t() {
        let t = sol.t_of(i);
        for m in 0..sol.n_r {
            let phi = weight.phi0(t, sol.r_of(m))?;
            sup = sup.max(sol.u_at(i, m).abs() / (scale * phi));
        }
    }
    Ok(sup)
}

/// Slope fraction of the interior cone r ≥ k₀·t used by the deep-region fit.
pub const CONE_SLOPE: f64 = 63.0 / 65.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerBoundParams {
    /// Width of the shallow region behind the light cone: 0 < t − r < r_0.
    /// Keep it below the data's support radius; at the support edge the
    /// radial mass vanishes and the fitted constant degenerates to zero.
    pub r_0: f64,
    /// Depth threshold of the cone region: t − r > r_big (must exceed 2).
    pub r_big: f64,
    /// Upper end of the bisection range for the cone constant.
    pub c_max: f64,
}

impl Default for LowerBoundParams {
    fn default() -> Self {
        LowerBoundParams { r_0: 0.5, r_big: 2.05, c_max: 0.5 }
    }
}

/// Strictly-negative slack: discrete positivity allows dips of size o(1) in
/// h near the support edge, but inside the fitted regions anything below
/// this counts as a violation.
const NEG_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerBoundReport {
    /// Largest C with u ≥ C(t+r)⁻¹ over the shallow region, None if the
    /// region contains no grid point.
    pub c_shallow: Option<f64>,
    /// Smallest of the per-point largest constants in the deep-cone bound,
    /// None if the region contains no grid point.
    pub c_cone: Option<f64>,
    pub shallow_points: usize,
    pub cone_points: usize,
    /// Grid points in either region where u is strictly negative.
    pub violations: usize,
    /// Set when the horizon is too short for the cone region to exist.
    pub insufficient_horizon: bool,
}

/// ∫_a^b μ^p(λ)/λ dλ evaluated as ∫ μ^p(e^{-τ}) dτ, with the flat clamped
/// stretch above λ_max handled in closed form.
fn critical_window(spec: &ModulusSpec, p: f64, a: f64, b: f64) -> Result<f64> {
    if !(0.0 < a && a < b) {
        return Err(Error::domain(format!("need 0 < a < b, got [{a}, {b}]")));
    }
    let lam_max = spec.lambda_max();
    let mut total = 0.0f64;
    if b > lam_max {
        total += spec.mu_eval(lam_max)?.powf(p) * (b / a.max(lam_max)).ln();
    }
    let b_in = b.min(lam_max);
    if a < b_in {
        let t_lo = (1.0 / b_in).ln();
        let t_hi = (1.0 / a).ln();
        let panels = 64usize;
        let dt = (t_hi - t_lo) / panels as f64;
        let mut acc = spec.mu_eval((-t_lo).exp())?.powf(p) + spec.mu_eval((-t_hi).exp())?.powf(p);
        for j in 1..panels {
            let tau = t_lo + j as f64 * dt;
            let v = spec.mu_eval((-tau).exp())?.powf(p);
            acc += if j % 2 == 1 { 4.0 * v } else { 2.0 * v };
        }
        total += acc * dt / 3.0;
    }
    Ok(total)
}

/// Fits the lower-bound constants of the computed field in two regions:
/// (i) the shallow strip 0 < t−r < r_0 with t+r > 1, where the bound is
/// u ≥ C (t+r)⁻¹, and (ii) the interior cone r ≥ k₀ t with t−r > r_big,
/// where u ≥ C (t+r)⁻¹ (t−r)^{-1/p} μ((t−r)⁻²) ∫_{C/(t−r)}^{C/2} μ^p(λ)/λ dλ
/// and the right side is strictly increasing in C, so the largest admissible
/// C is found by bisection.
pub fn pointwise_lowerbound_check(
    sol: &SolutionField,
    spec: &ModulusSpec,
    params: &LowerBoundParams,
) -> Result<LowerBoundReport> {
    if !(params.r_0 > 0.0) {
        return Err(Error::validation(format!("shallow width must be positive, got {}", params.r_0)));
    }
    if !(params.r_big > 2.0) {
        return Err(Error::validation(format!(
            "cone depth must exceed 2 so the fit window is nonempty, got {}",
            params.r_big
        )));
    }
    if !(params.c_max > 0.0 && params.c_max <= 1.0) {
        return Err(Error::validation(format!("c_max must lie in (0, 1], got {}", params.c_max)));
    }
    let p = StraussConstants::new().p;
    let mut report = LowerBoundReport {
        c_shallow: None,
        c_cone: None,
        shallow_points: 0,
        cone_points: 0,
        violations: 0,
        insufficient_horizon: false,
    };

    for i in 0..sol.n_t() {
        let t = sol.t_of(i);
        for m in 0..sol.n_r {
            let r = sol.r_of(m);
            let d = t - r;
            if d > 0.0 && d < params.r_0 && t + r > 1.0 {
                let u = sol.u_at(i, m);
                report.shallow_points += 1;
                if u < -NEG_SLACK {
                    report.violations += 1;
                }
                let c = u * (t + r);
                report.c_shallow = Some(report.c_shallow.map_or(c, |prev: f64| prev.min(c)));
            }
        }
    }

    for i in 0..sol.n_t() {
        let t = sol.t_of(i);
        for m in 0..sol.n_r {
            let r = sol.r_of(m);
            let d = t - r;
            if !(r >= CONE_SLOPE * t && d > params.r_big) {
                continue;
            }
            report.cone_points += 1;
            let u = sol.u_at(i, m).max(0.0);
            if sol.u_at(i, m) < -NEG_SLACK {
                report.violations += 1;
                report.c_cone = Some(0.0);
                continue;
            }
            let prefactor = (t + r).recip() * d.powf(-1.0 / p) * spec.mu_eval((d * d).recip())?;
            let rhs = |c: f64| -> Result<f64> {
                Ok(prefactor * critical_window(spec, p, c / d, c / 2.0)?)
            };
            // The window integral vanishes only like 1/log(1/C) as C → 0,
            // so small field values correspond to exponentially small
            // constants; bisect in log scale.
            let c_floor = 1e-300;
            let c_star = if u >= rhs(params.c_max)? {
                params.c_max
            } else if u <= rhs(c_floor)? {
                0.0
            } else {
                let mut lo = c_floor.ln();
                let mut hi = params.c_max.ln();
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if u >= rhs(mid.exp())? {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                lo.exp()
            };
            report.c_cone = Some(report.c_cone.map_or(c_star, |prev: f64| prev.min(c_star)));
        }
    }

    report.insufficient_horizon = report.cone_points == 0;
    Ok(report)
}
