//! Picard iteration on the Duhamel form u = ε u⁰ + L F(u), with the wave
//! propagator L evaluated through a prefix-sum factorization: for each source
//! time s the inner integral ∫ F(u(s,λ)) λ dλ is a cumulative trapezoid
//! Q_s(x), and on the unit-CFL grid every argument t − s ± r lands exactly on
//! a λ node, so L collapses to differences of prefix sums.

use crate::constants::StraussConstants;
use crate::modulus::ModulusSpec;
use crate::{Error, Result};

use super::leapfrog::critical_force;
use super::{homogeneous_solution, CharacteristicGrid, InitialData, Scheme, SolutionField};

pub fn picard_iterate(
    data: &InitialData,
    spec: &ModulusSpec,
    grid: &CharacteristicGrid,
    n_iter: usize,
    u_max: f64,
) -> Result<SolutionField> {
    if !data.is_compact() {
        return Err(Error::validation(
            "Picard iteration requires compactly supported data",
        ));
    }
    if !grid.contains_light_cone(data.support_radius) {
        return Err(Error::validation(format!(
            "grid radius {} does not contain the light cone of support {} up to t = {}",
            grid.r_max, data.support_radius, grid.t_max
        )));
    }
    if !(u_max > 0.0) {
        return Err(Error::validation(format!("divergence threshold must be positive, got {u_max}")));
    }
    let h = grid.h;
    let n = grid.n_t();
    let m = grid.n_r();
    let np = n + 1;
    let mp = m + 1;
    let p = StraussConstants::new().p;

    let mut linear = vec![0.0f64; np * mp];
    for i in 0..np {
        for j in 0..mp {
            linear[i * mp + j] = homogeneous_solution(data, i as f64 * h, j as f64 * h)?;
        }
    }

    let mut cur = linear.clone();
    let mut increments = Vec::with_capacity(n_iter);
    let mut g = vec![0.0f64; np * mp];
    let mut q = vec![0.0f64; np * mp];

    for it in 1..=n_iter {
        for s in 0..np {
            let row = s * mp;
            for j in 0..mp {
                g[row + j] = (j as f64 * h) * critical_force(spec, p, cur[row + j])?;
            }
            q[row] = 0.0;
            for j in 1..mp {
                q[row + j] = q[row + j - 1] + 0.5 * h * (g[row + j - 1] + g[row + j]);
            }
        }

        let mut next = vec![0.0f64; np * mp];
        for i in 0..np {
            let mut acc = 0.0f64;
            for s in 0..=i {
                let wgt = if s == 0 || s == i { 0.5 } else { 1.0 };
                acc += wgt * g[s * mp + (i - s)];
            }
            next[i * mp] = linear[i * mp] + h * acc;

            for mm in 1..mp {
                let mut acc = 0.0f64;
                for s in 0..=i {
                    let wgt = if s == 0 || s == i { 0.5 } else { 1.0 };
                    let up = (i - s + mm).min(m);
                    let dn = (i as isize - s as isize - mm as isize).unsigned_abs();
                    acc += wgt * (q[s * mp + up] - q[s * mp + dn]);
                }
                next[i * mp + mm] = linear[i * mp + mm] + h * acc / (2.0 * mm as f64 * h);
            }
        }

        let mut inc = 0.0f64;
        let mut sup = 0.0f64;
        for idx in 0..np * mp {
            inc = inc.max((next[idx] - cur[idx]).abs());
            sup = sup.max(next[idx].abs());
        }
        if !sup.is_finite() || sup > u_max {
            return Err(Error::PicardDivergence { iterate: it, sup });
        }
        increments.push(inc);
        cur = next;
    }

    let mut w = vec![0.0f64; np * mp];
    for i in 0..np {
        for j in 1..mp {
            w[i * mp + j] = (j as f64 * h) * cur[i * mp + j];
        }
    }
    let axis: Vec<f64> = (0..np).map(|i| cur[i * mp]).collect();
    let mut field =
        SolutionField::from_rows(h, mp, Scheme::Picard, data.support_radius, data.epsilon, w, axis);
    field.cauchy_increments = increments;
    field.nonlinear = n_iter > 0;
    Ok(field)
}

/// Single-point evaluation of L F(u) by direct two-dimensional quadrature,
/// used as an independent cross-check of the prefix-sum evaluation.  For
/// r ≥ t the (s, λ) form is integrated as written; for r < t the integral is
/// taken in null coordinates α = s − λ, β = s + λ over the region
/// {t−r ≤ β ≤ t+r, −β ≤ α ≤ t−r}.
pub fn duhamel_direct(
    u: &dyn Fn(f64, f64) -> f64,
    spec: &ModulusSpec,
    t: f64,
    r: f64,
    panels: usize,
) -> Result<f64> {
    if !(t >= 0.0 && r > 0.0) {
        return Err(Error::domain(format!("need t ≥ 0 and r > 0, got ({t}, {r})")));
    }
    if panels == 0 {
        return Err(Error::validation("need at least one quadrature panel"));
    }
    let p = StraussConstants::new().p;
    let gl = 1.0 / 3.0f64.sqrt();

    if r >= t {
        let ds = t / panels as f64;
        let mut outer = 0.0f64;
        for ks in 0..panels {
            let s_mid = (ks as f64 + 0.5) * ds;
            for &s in &[s_mid - 0.5 * ds * gl, s_mid + 0.5 * ds * gl] {
                let lo = r - (t - s);
                let hi = r + (t - s);
                let dl = (hi - lo) / panels as f64;
                let mut inner = 0.0f64;
                for kl in 0..panels {
                    let l_mid = lo + (kl as f64 + 0.5) * dl;
                    for &lam in &[l_mid - 0.5 * dl * gl, l_mid + 0.5 * dl * gl] {
                        inner += 0.5 * dl * critical_force(spec, p, u(s, lam))? * lam;
                    }
                }
                outer += 0.5 * ds * inner;
            }
        }
        Ok(outer / (2.0 * r))
    } else {
        let db = 2.0 * r / panels as f64;
        let mut outer = 0.0f64;
        for kb in 0..panels {
            let b_mid = t - r + (kb as f64 + 0.5) * db;
            for &beta in &[b_mid - 0.5 * db * gl, b_mid + 0.5 * db * gl] {
                let lo = -beta;
                let hi = t - r;
                let da = (hi - lo) / panels as f64;
                let mut inner = 0.0f64;
                for ka in 0..panels {
                    let a_mid = lo + (ka as f64 + 0.5) * da;
                    for &alpha in &[a_mid - 0.5 * da * gl, a_mid + 0.5 * da * gl] {
                        let s = 0.5 * (beta + alpha);
                        let lam = 0.5 * (beta - alpha);
                        inner += 0.5 * da * critical_force(spec, p, u(s, lam))? * (beta - alpha);
                    }
                }
                outer += 0.5 * db * inner;
            }
        }
        Ok(outer / (8.0 * r))
    }
}
