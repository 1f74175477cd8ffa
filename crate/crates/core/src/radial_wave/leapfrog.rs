//! Characteristic leapfrog on w = r·u at unit CFL, where the homogeneous
//! update w(t+h, r) = w(t, r−h) + w(t, r+h) − w(t−h, r) reproduces
//! d'Alembert exactly and the forcing enters through the characteristic
//! diamond's midpoint value h²·(r·F + G).

use crate::constants::StraussConstants;
use crate::modulus::ModulusSpec;
use crate::{Error, Result};

use super::{
    BlowupEvent, BlowupReason, CharacteristicGrid, InitialData, Scheme, SolutionField,
};

/// Right-hand side fed to the solver.
pub enum Forcing<'a> {
    /// Pure linear propagation.
    None,
    /// F(u) = |u|^p μ(|u|) with the given modulus.
    Critical(&'a ModulusSpec),
    /// An explicit source G(t, r) added to w_tt − w_rr, for convergence
    /// studies against manufactured solutions.
    Source(&'a dyn Fn(f64, f64) -> f64),
}

/// |u|^p μ(|u|), with the zero value pinned explicitly.
pub(crate) fn critical_force(spec: &ModulusSpec, p: f64, u: f64) -> Result<f64> {
    let a = u.abs();
    if a == 0.0 {
        return Ok(0.0);
    }
    Ok(a.powf(p) * spec.mu_eval(a)?)
}

pub fn solve_leapfrog(
    data: &InitialData,
    grid: &CharacteristicGrid,
    forcing: Forcing<'_>,
    u_max: f64,
) -> Result<SolutionField> {
    if !(u_max > 0.0) {
        return Err(Error::validation(format!("detection threshold must be positive, got {u_max}")));
    }
    if data.is_compact() && !grid.contains_light_cone(data.support_radius) {
        return Err(Error::validation(format!(
            "grid radius {} does not contain the light cone of support {} up to t = {}",
            grid.r_max, data.support_radius, grid.t_max
        )));
    }
    let h = grid.h;
    let n_t = grid.n_t();
    let n_r = grid.n_r() + 1;
    let m_last = n_r - 1;
    let p = StraussConstants::new().p;
    let eps = data.epsilon;
    let rr = data.support_radius;

    let force = |t: f64, r: f64, u: f64| -> Result<f64> {
        match forcing {
            Forcing::None => Ok(0.0),
            Forcing::Critical(spec) => Ok(r * critical_force(spec, p, u)?),
            Forcing::Source(g) => Ok(g(t, r)),
        }
    };

    let mut w: Vec<f64> = Vec::with_capacity((n_t + 1) * n_r);
    let mut axis: Vec<f64> = Vec::with_capacity(n_t + 1);

    let mut row0: Vec<f64> = (0..n_r)
        .map(|m| {
            let r = m as f64 * h;
            eps * r * data.u0.eval(r, rr)
        })
        .collect();
    row0[0] = 0.0;
    row0[m_last] = 0.0;

    let mut row1 = vec![0.0; n_r];
    for m in 1..m_last {
        let r = m as f64 * h;
        let w_rr = row0[m - 1] - 2.0 * row0[m] + row0[m + 1];
        let u_here = eps * data.u0.eval(r, rr);
        row1[m] = row0[m]
            + h * eps * r * data.u1.eval(r, rr)
            + 0.5 * (w_rr + h * h * force(0.0, r, u_here)?);
    }

    let axis_value = |row: &[f64]| (4.0 * row[1] - row[2]) / (2.0 * h);

    let mut blowup = None;
    let scan = |row: &[f64], t: f64| -> Option<BlowupEvent> {
        let ax = axis_value(row);
        let mut peak = ax.abs();
        let mut r_star = 0.0;
        if !ax.is_finite() {
            return Some(BlowupEvent { t_star: t, r_star, peak: ax, reason: BlowupReason::NonFinite });
        }
        for m in 1..row.len() {
            let u = row[m] / (m as f64 * h);
            if !u.is_finite() {
                return Some(BlowupEvent {
                    t_star: t,
                    r_star: m as f64 * h,
                    peak: u,
                    reason: BlowupReason::NonFinite,
                });
            }
            if u.abs() > peak {
                peak = u.abs();
                r_star = m as f64 * h;
            }
        }
        if peak > u_max {
            Some(BlowupEvent { t_star: t, r_star, peak, reason: BlowupReason::Threshold })
        } else {
            None
        }
    };

    axis.push(axis_value(&row0));
    w.extend_from_slice(&row0);
    if let Some(ev) = scan(&row0, 0.0) {
        blowup = Some(ev);
    }

    if blowup.is_none() && n_t >= 1 {
        axis.push(axis_value(&row1));
        w.extend_from_slice(&row1);
        if let Some(ev) = scan(&row1, h) {
            blowup = Some(ev);
        }

        let mut prev = row0;
        let mut cur = row1;
        let mut i = 1usize;
        while blowup.is_none() && i < n_t {
            let t = i as f64 * h;
            let mut next = vec![0.0; n_r];
            for m in 1..m_last {
                let r = m as f64 * h;
                let u_here = cur[m] / r;
                next[m] = cur[m - 1] + cur[m + 1] - prev[m]
                    + h * h * force(t, r, u_here)?;
            }
            axis.push(axis_value(&next));
            w.extend_from_slice(&next);
            if let Some(ev) = scan(&next, t + h) {
                blowup = Some(ev);
            }
            prev = cur;
            cur = next;
            i += 1;
        }
    }

    let mut field = SolutionField::from_rows(h, n_r, Scheme::Leapfrog, rr, eps, w, axis);
    field.blowup = blowup;
    field.nonlinear = matches!(forcing, Forcing::Critical(_));
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modulus::ModulusSpec;
    use crate::radial_wave::{CharacteristicGrid, InitialData, Profile};

    fn grid(h: f64, t_max: f64, r_max: f64) -> CharacteristicGrid {
        CharacteristicGrid::new(h, t_max, r_max).unwrap()
    }

    // u1 ≡ 1 gives u(t, r) = t exactly; the march reproduces it to roundoff
    // away from the contaminated outer boundary.
    #[test]
    fn constant_velocity_field_is_exact() {
        let data = InitialData::new(Profile::Zero, Profile::Const(1.0), 1.0, 1.0).unwrap();
        let g = grid(0.05, 1.0, 3.0);
        let sol = solve_leapfrog(&data, &g, Forcing::None, 1e8).unwrap();
        assert!(sol.blowup.is_none());
        for i in 0..sol.n_t() {
            let t = sol.t_of(i);
            assert!((sol.u_at(i, 0) - t).abs() < 1e-12, "axis at t = {t}");
            for m in 1..sol.n_r {
                let r = sol.r_of(m);
                if r < g.r_max - t - g.h {
                    assert!(
                        (sol.w_at(i, m) - r * t).abs() < 1e-12,
                        "w at ({t}, {r}): {}",
                        sol.w_at(i, m)
                    );
                }
            }
        }
    }

    // With zero data and unit source, w_tt − w_rr = 1 with w(t, 0) = 0 has
    // the closed form w = t²/2 − (t−r)₊²/2, piecewise quadratic along
    // characteristics, and the diamond rule reproduces it exactly.
    #[test]
    fn uniform_source_is_exact() {
        let data = InitialData::new(Profile::Zero, Profile::Zero, 1.0, 0.0).unwrap();
        let g = grid(0.1, 1.0, 3.0);
        let src = |_t: f64, _r: f64| 1.0;
        let sol = solve_leapfrog(&data, &g, Forcing::Source(&src), 1e8).unwrap();
        for i in 0..sol.n_t() {
            let t = sol.t_of(i);
            for m in 1..sol.n_r {
                let r = sol.r_of(m);
                if r < g.r_max - t - g.h {
                    let exact = 0.5 * t * t - 0.5 * (t - r).max(0.0).powi(2);
                    assert!(
                        (sol.w_at(i, m) - exact).abs() < 1e-12 * (1.0 + t * t),
                        "w at ({t}, {r}): {} vs {exact}",
                        sol.w_at(i, m)
                    );
                }
            }
        }
    }

    #[test]
    fn finite_propagation_is_exact() {
        let data =
            InitialData::new(Profile::Zero, Profile::Bump { amplitude: 0.5 }, 1.0, 1.0).unwrap();
        let g = grid(0.02, 2.0, 4.0);
        let spec = ModulusSpec::iterated_log(1).unwrap();
        let sol = solve_leapfrog(&data, &g, Forcing::Critical(&spec), 1e8).unwrap();
        let mut inside = 0usize;
        for i in 0..sol.n_t() {
            let t = sol.t_of(i);
            for m in 1..sol.n_r {
                let r = sol.r_of(m);
                if r > t + data.support_radius + 1e-9 {
                    assert_eq!(sol.w_at(i, m), 0.0, "support leak at ({t}, {r})");
                } else if sol.w_at(i, m) != 0.0 {
                    inside += 1;
                }
            }
        }
        assert!(inside > 100);
    }

    #[test]
    fn nonnegative_data_stays_essentially_nonnegative() {
        let data =
            InitialData::new(Profile::Zero, Profile::PolyBump { amplitude: 1.0 }, 1.0, 1.0)
                .unwrap();
        let g = grid(0.02, 3.0, 5.0);
        let spec = ModulusSpec::iterated_log(1).unwrap();
        let sol = solve_leapfrog(&data, &g, Forcing::Critical(&spec), 1e8).unwrap();
        let mut min_u = f64::INFINITY;
        for i in 0..sol.n_t() {
            for m in 0..sol.n_r {
                min_u = min_u.min(sol.u_at(i, m));
            }
        }
        assert!(min_u > -1e-6, "min u = {min_u}");
    }

    #[test]
    fn threshold_crossing_truncates_field() {
        let data =
            InitialData::new(Profile::Zero, Profile::Bump { amplitude: 0.5 }, 1.0, 20.0).unwrap();
        let g = grid(0.02, 6.0, 8.0);
        let spec = ModulusSpec::iterated_log(1).unwrap();
        let sol = solve_leapfrog(&data, &g, Forcing::Critical(&spec), 1e3).unwrap();
        let ev = sol.blowup.expect("expected threshold crossing");
        assert_eq!(ev.reason, BlowupReason::Threshold);
        assert!(ev.peak > 1e3);
        assert!(ev.t_star > 0.0 && ev.t_star < 6.0);
        assert!((sol.n_t() as f64 - 1.0) * g.h - ev.t_star < 1e-12);
        assert!(sol.n_t() < g.n_t() + 1);
    }

    #[test]
    fn rejects_grid_smaller_than_light_cone() {
        let data =
            InitialData::new(Profile::Zero, Profile::Bump { amplitude: 0.5 }, 1.0, 1.0).unwrap();
        let g = grid(0.1, 4.0, 4.0);
        assert!(solve_leapfrog(&data, &g, Forcing::None, 1e8).is_err());
    }
}

