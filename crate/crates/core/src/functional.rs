//! Weighted space integrals of computed fields against the decaying test
//! functions: the functional H(t), its companion 𝒰(t), the Duhamel integral
//! identity residual, the Jensen step, the weight integrals with their decay
//! fits, and the iteration-frame constant fits.
//!
//! All ball integrals over B_{1+t} use a cell-aligned two-point Gauss rule
//! with the field interpolated linearly, matching the solver's order; the
//! standalone weight integrals use adaptive quadrature so they remain usable
//! far beyond any grid horizon.

use std::collections::HashMap;

use crate::constants::StraussConstants;
use crate::modulus::{iterated_log, ModulusSpec};
use crate::quad::adaptive_simpson;
use crate::radial_wave::{InitialData, SolutionField};
use crate::testfunc::TestFunctionParams;
use crate::{Error, Result};

const GAUSS: f64 = 0.577_350_269_189_625_8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FunctionalSample {
    pub t: f64,
    pub h: f64,
    pub u_script: f64,
    pub weight_integral: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityResidual {
    pub t: f64,
    pub lhs: f64,
    pub data_term: f64,
    pub duhamel_term: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JensenReport {
    pub margin: f64,
    pub convexity_violations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightReport {
    pub w1: f64,
    pub c1_fit: f64,
    pub w2: Option<f64>,
    pub c2_fit: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameFit {
    pub c_k: f64,
    pub b_k: f64,
    pub t_0: f64,
    pub stable: bool,
}

/// μ^{1/p}(|v|), continuously extended by 0 at v = 0.
fn mu_root(spec: &ModulusSpec, p: f64, v: f64) -> Result<f64> {
    let a = v.abs();
    if a == 0.0 {
        return Ok(0.0);
    }
    Ok(spec.mu_eval(a)?.powf(1.0 / p))
}

/// Time-interpolation coefficients: row index and blend weight.
fn row_blend(sol: &SolutionField, t: f64) -> Result<(usize, f64)> {
    let horizon = (sol.n_t() - 1) as f64 * sol.h;
    if !(0.0..=horizon + 1e-12).contains(&t) {
        return Err(Error::horizon(format!(
            "t = {t} outside the stored horizon [0, {horizon}]"
        )));
    }
    let x = t / sol.h;
    let i = (x.floor() as usize).min(sol.n_t() - 1);
    let theta = x - i as f64;
    if theta < 1e-12 || i + 1 >= sol.n_t() {
        Ok((i, 0.0))
    } else {
        Ok((i, theta))
    }
}

fn u_interp(sol: &SolutionField, i: usize, theta: f64, r: f64) -> f64 {
    let x = r / sol.h;
    let m = (x.floor() as usize).min(sol.n_r - 2);
    let xi = x - m as f64;
    let at = |row: usize| (1.0 - xi) * sol.u_at(row, m) + xi * sol.u_at(row, m + 1);
    if theta == 0.0 {
        at(i)
    } else {
        (1.0 - theta) * at(i) + theta * at(i + 1)
    }
}

/// Σ over grid cells of [0, upper] of f(r, u(t, r)) by two-point Gauss, with
/// u linear in each cell.
fn ball_rule(
    sol: &SolutionField,
    i: usize,
    theta: f64,
    upper: f64,
    f: &mut dyn FnMut(f64, f64) -> Result<f64>,
) -> Result<f64> {
    let h = sol.h;
    let r_top = (sol.n_r - 1) as f64 * h;
    if upper > r_top + 1e-12 {
        return Err(Error::horizon(format!(
            "ball radius {upper} exceeds the stored grid radius {r_top}"
        )));
    }
    let mut acc = 0.0f64;
    let mut m = 0usize;
    loop {
        let a = m as f64 * h;
        if a >= upper {
            break;
        }
        let b = ((m + 1) as f64 * h).min(upper);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for &r in &[mid - half * GAUSS, mid + half * GAUSS] {
            acc += half * f(r, u_interp(sol, i, theta, r))?;
        }
        m += 1;
    }
    Ok(acc)
}

fn ball_radius(sol: &SolutionField, t: f64) -> Result<f64> {
    if sol.support_radius > 1.0 + 1e-12 {
        return Err(Error::validation(format!(
            "functionals integrate over the unit-data ball B(1+t); support radius {} exceeds 1",
            sol.support_radius
        )));
    }
    Ok(1.0 + t)
}

/// H(t) = 4π ∫₀^{1+t} u(t,r) η(t,t,r) r² dr.
pub fn h_of_t(sol: &SolutionField, params: &TestFunctionParams, t: f64) -> Result<f64> {
    let upper = ball_radius(sol, t)?;
    let (i, theta) = row_blend(sol, t)?;
    let v = ball_rule(sol, i, theta, upper, &mut |r, u| {
        Ok(u * params.eta(t, t, r)? * r * r)
    })?;
    Ok(4.0 * std::f64::consts::PI * v)
}

/// 𝒰(t) = 4π ∫₀^{1+t} u μ^{1/p}(|u|) η(t,t,r) r² dr.
pub fn u_script_of_t(
    sol: &SolutionField,
    params: &TestFunctionParams,
    spec: &ModulusSpec,
    t: f64,
) -> Result<f64> {
    let p = StraussConstants::new().p;
    let upper = ball_radius(sol, t)?;
    let (i, theta) = row_blend(sol, t)?;
    let v = ball_rule(sol, i, theta, upper, &mut |r, u| {
        Ok(u * mu_root(spec, p, u)? * params.eta(t, t, r)? * r * r)
    })?;
    Ok(4.0 * std::f64::consts::PI * v)
}

/// ∫_{B_{1+t}} η(t,t,x) dx on the same cell rule as the functionals, so the
/// Jensen comparison is exact for constant fields.
pub fn weight_integral_cells(
    sol: &SolutionField,
    params: &TestFunctionParams,
    t: f64,
) -> Result<f64> {
    let upper = ball_radius(sol, t)?;
    let (i, theta) = row_blend(sol, t)?;
    let v = ball_rule(sol, i, theta, upper, &mut |r, _| Ok(params.eta(t, t, r)? * r * r))?;
    Ok(4.0 * std::f64::consts::PI * v)
}

pub fn functional_sample(
    sol: &SolutionField,
    params: &TestFunctionParams,
    spec: &ModulusSpec,
    t: f64,
) -> Result<FunctionalSample> {
    Ok(FunctionalSample {
        t,
        h: h_of_t(sol, params, t)?,
        u_script: u_script_of_t(sol, params, spec, t)?,
        weight_integral: weight_integral_cells(sol, params, t)?,
    })
}

/// Residual of the Duhamel identity
/// H(t) = ε t ∫ u1 η(t,0,x) dx + ∫₀^t (t−s) ∫ F(u) η(t,s,x) dx ds
/// for fields launched from u0 = 0.
pub fn identity_residual(
    sol: &SolutionField,
    params: &TestFunctionParams,
    spec: &ModulusSpec,
    data: &InitialData,
    t: f64,
) -> Result<IdentityResidual> {
    if !matches!(data.u0, crate::radial_wave::Profile::Zero) {
        return Err(Error::validation("identity requires u0 = 0 data"));
    }
    let steps = t / sol.h;
    if (steps - steps.round()).abs() > 1e-9 {
        return Err(Error::validation(format!(
            "identity evaluation needs a grid-aligned time, got t = {t} with h = {}",
            sol.h
        )));
    }
    let i_t = steps.round() as usize;
    let p = StraussConstants::new().p;
    let four_pi = 4.0 * std::f64::consts::PI;

    let lhs = h_of_t(sol, params, t)?;

    let rr = data.support_radius;
    let mut data_int = 0.0f64;
    {
        let h = sol.h;
        let mut m = 0usize;
        loop {
            let a = m as f64 * h;
            if a >= rr {
                break;
            }
            let b = ((m + 1) as f64 * h).min(rr);
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            for &r in &[mid - half * GAUSS, mid + half * GAUSS] {
                data_int += half * data.u1.eval(r, rr) * params.eta(t, 0.0, r)? * r * r;
            }
            m += 1;
        }
    }
    let data_term = data.epsilon * t * four_pi * data_int;

    let mut duhamel = 0.0f64;
    if sol.nonlinear {
        for n in 0..i_t {
            let s = n as f64 * sol.h;
            let wgt = if n == 0 { 0.5 } else { 1.0 };
            let inner = ball_rule(sol, n, 0.0, 1.0 + s, &mut |r, u| {
                let a = u.abs();
                let f = if a == 0.0 { 0.0 } else { a.powf(p) * spec.mu_eval(a)? };
                Ok(f * params.eta(t, s, r)? * r * r)
            })?;
            duhamel += wgt * sol.h * (t - s) * four_pi * inner;
        }
    }

    Ok(IdentityResidual {
        t,
        lhs,
        data_term,
        duhamel_term: duhamel,
        residual: lhs - data_term - duhamel,
    })
}

/// Jensen step margin 𝒰(t) − H(t)·μ^{1/p}(H(t)/W1(t)), plus a numerical
/// convexity scan of g(τ) = τ·μ^{1/p}(τ/W1) over the occupied value range.
pub fn jensen_check(
    sol: &SolutionField,
    params: &TestFunctionParams,
    spec: &ModulusSpec,
    t: f64,
) -> Result<JensenReport> {
    let p = StraussConstants::new().p;
    let h = h_of_t(sol, params, t)?;
    let u_s = u_script_of_t(sol, params, spec, t)?;
    let w1 = weight_integral_cells(sol, params, t)?;
    let margin = u_s - h * mu_root(spec, p, h / w1)?;

    let (i, theta) = row_blend(sol, t)?;
    let upper = ball_radius(sol, t)?;
    let mut u_max = 0.0f64;
    let mut m = 0usize;
    while (m as f64) * sol.h < upper {
        u_max = u_max.max(u_interp(sol, i, theta, m as f64 * sol.h).abs());
        m += 1;
    }

    let mut violations = 0usize;
    if u_max > 0.0 {
        let tau_top = w1 * u_max;
        let n = 64usize;
        let g = |tau: f64| -> Result<f64> { Ok(tau * mu_root(spec, p, tau / w1)?) };
        let mut vals = Vec::with_capacity(n + 1);
        for j in 0..=n {
            vals.push(g(tau_top * j as f64 / n as f64)?);
        }
        let scale = vals.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        for j in 1..n {
            if vals[j - 1] + vals[j + 1] - 2.0 * vals[j] < -1e-12 * scale {
                violations += 1;
            }
        }
    }

    Ok(JensenReport { margin, convexity_violations: violations })
}

/// W1(s) = ∫_{B_{1+s}} η(s,s,x) dx and, when a later time t is supplied,
/// W2(s,t) = ∫_{B_{1+s}} [η(s,s,x)/η(t,s,x)^{1/p}]^{p′} dx, by adaptive
/// quadrature, together with the fitted constants of their decay bounds
/// W1 ≤ C ⟨s⟩^{1+1/p} M_k^{-q}(⟨s⟩⁻¹) and
/// W2 ≤ C ⟨t⟩^{p′/p} ⟨s⟩^{p′/p} M_k^{1/p}(⟨s⟩⁻¹) log^k⟨s⟩.
pub fn weight_integrals(
    params: &TestFunctionParams,
    s: f64,
    t_for_w2: Option<f64>,
) -> Result<WeightReport> {
    if !(s >= 0.0) {
        return Err(Error::domain(format!("need s ≥ 0, got {s}")));
    }
    let c = StraussConstants::new();
    let (p, p_conj, q) = (c.p, c.p_conj, c.q);
    let four_pi = 4.0 * std::f64::consts::PI;

    params.eta(s, s, 0.0)?;
    params.eta(s, s, 1.0 + s)?;
    let w1 = four_pi
        * adaptive_simpson(
            |r| params.eta(s, s, r).unwrap_or(f64::NAN) * r * r,
            0.0,
            1.0 + s,
            1e-9,
            1e-300,
            "diagonal weight integral",
        )?
        .value;

    let br = params.bracket(s);
    let shape1 = br.powf(1.0 + 1.0 / p) * params.m_k_at_inverse_bracket(s).powf(-q);
    let c1_fit = w1 / shape1;

    let (w2, c2_fit) = match t_for_w2 {
        None => (None, None),
        Some(t) => {
            if !(t > s) {
                return Err(Error::domain(format!("need t > s for the ratio weight, got t = {t}")));
            }
            params.eta(t, s, 0.0)?;
            params.eta(t, s, 1.0 + s)?;
            let w2 = four_pi
                * adaptive_simpson(
                    |r| {
                        let num = params.eta(s, s, r).unwrap_or(f64::NAN);
                        let den = params.eta(t, s, r).unwrap_or(f64::NAN);
                        (num / den.powf(1.0 / p)).powf(p_conj) * r * r
                    },
                    0.0,
                    1.0 + s,
                    1e-9,
                    1e-300,
                    "ratio weight integral",
                )?
                .value;
            let logs = iterated_log(params.k, br)?;
            if !(logs > 0.0) {
                return Err(Error::domain(format!(
                    "s = {s} too small for the depth-{} log factor in the ratio bound",
                    params.k
                )));
            }
            let shape2 = (params.bracket(t)).powf(p_conj / p)
                * br.powf(p_conj / p)
                * params.m_k_at_inverse_bracket(s).powf(1.0 / p)
                * logs;
            (Some(w2), Some(w2 / shape2))
        }
    };

    Ok(WeightReport { w1, c1_fit, w2, c2_fit })
}

/// Both sides of the Hölder factorization 𝒰(s)^p ≤ [∫ F(u) η(t,s,x) dx] ·
/// W2(s,t)^{p/p′}, all three integrals on the shared cell rule so the
/// inequality is the literal discrete Hölder inequality.
pub fn holder_chain_sides(
    sol: &SolutionField,
    params: &TestFunctionParams,
    spec: &ModulusSpec,
    s: f64,
    t: f64,
) -> Result<(f64, f64)> {
    if !(t > s) {
        return Err(Error::domain(format!("need t > s, got ({s}, {t})")));
    }
    let c = StraussConstants::new();
    let (p, p_conj) = (c.p, c.p_conj);
    let four_pi = 4.0 * std::f64::consts::PI;
    let upper = ball_radius(sol, s)?;
    let (i, theta) = row_blend(sol, s)?;

    let u_script = four_pi
        * ball_rule(sol, i, theta, upper, &mut |r, u| {
            Ok(u * mu_root(spec, p, u)? * params.eta(s, s, r)? * r * r)
        })?;
    let force_int = four_pi
        * ball_rule(sol, i, theta, upper, &mut |r, u| {
            let a = u.abs();
            let f = if a == 0.0 { 0.0 } else { a.powf(p) * spec.mu_eval(a)? };
            Ok(f * params.eta(t, s, r)? * r * r)
        })?;
    let w2 = four_pi
        * ball_rule(sol, i, theta, upper, &mut |r, _| {
            let num = params.eta(s, s, r)?;
            let den = params.eta(t, s, r)?;
            Ok((num / den.powf(1.0 / p)).powf(p_conj) * r * r)
        })?;

    Ok((u_script.powf(p), force_int * w2.powf(p / p_conj)))
}

/// Fits the iteration-frame constants on a nonlinear run:
/// C_k from H(t) ≥ C ⟨t⟩⁻¹ ∫₀^t (t−s) ⟨s⟩⁻¹ M_k^{-q}(⟨s⟩⁻¹)
/// (log^k⟨s⟩)^{-p/p′} H^p(s) μ(H(s)⟨s⟩⁻²) ds, B_k from
/// H(t) ≥ B (log^k t)(log^{k+1} t) μ̃(t⁻²), and t_0 as the first grid time
/// where both ratios are positive and within a factor 2 of their final
/// values.
pub fn fit_frame_constants(
    sol: &SolutionField,
    params: &TestFunctionParams,
    spec: &ModulusSpec,
    t_grid: &[f64],
) -> Result<FrameFit> {
    if !sol.nonlinear {
        return Err(Error::validation(
            "frame constants are defined by the nonlinear Duhamel term; run with the critical forcing",
        ));
    }
    if spec.log_depth() != Some(params.k) {
        return Err(Error::validation(
            "frame fit requires an iterated-log modulus matching the test-function depth",
        ));
    }
    if t_grid.is_empty() {
        return Err(Error::validation("empty fit grid"));
    }
    let c = StraussConstants::new();
    let (p, p_conj, q) = (c.p, c.p_conj, c.q);
    let k = params.k;

    let mut h_cache: HashMap<usize, f64> = HashMap::new();
    let mut h_at = |row: usize| -> Result<f64> {
        if let Some(&v) = h_cache.get(&row) {
            return Ok(v);
        }
        let v = h_of_t(sol, params, row as f64 * sol.h)?;
        h_cache.insert(row, v);
        Ok(v)
    };

    let denom_integrand = |s: f64, h_s: f64| -> Result<f64> {
        if h_s <= 0.0 {
            return Ok(0.0);
        }
        let br = params.bracket(s);
        let logs = iterated_log(k, br)?;
        if !(logs > 0.0) {
            return Ok(0.0);
        }
        let arg = h_s * br.powi(-2);
        Ok(br.recip()
            * params.m_k_at_inverse_bracket(s).powf(-q)
            * logs.powf(-p / p_conj)
            * h_s.powf(p)
            * spec.mu_eval(arg)?)
    };

    let horizon_rows = sol.n_t() - 1;
    let stride = (horizon_rows / 160).max(1);

    let mut ratios_c: Vec<(f64, f64)> = Vec::new();
    let mut ratios_b: Vec<(f64, f64)> = Vec::new();
    for &t in t_grid {
        let steps = t / sol.h;
        if (steps - steps.round()).abs() > 1e-9 {
            return Err(Error::validation(format!("fit time {t} is not grid-aligned")));
        }
        let row = steps.round() as usize;
        if row > horizon_rows {
            return Err(Error::horizon(format!("fit time {t} beyond the stored horizon")));
        }

        let mut rows: Vec<usize> = (0..row).step_by(stride).collect();
        rows.push(row);
        let mut integral = 0.0f64;
        for w in rows.windows(2) {
            let (na, nb) = (w[0], w[1]);
            let (sa, sb) = (na as f64 * sol.h, nb as f64 * sol.h);
            let fa = (t - sa) * denom_integrand(sa, h_at(na)?)?;
            let fb = (t - sb) * denom_integrand(sb, h_at(nb)?)?;
            integral += 0.5 * (sb - sa) * (fa + fb);
        }
        let denom_c = params.bracket(t).recip() * integral;
        let h_t = h_at(row)?;
        if denom_c > 0.0 {
            ratios_c.push((t, h_t / denom_c));
        }

        if let Ok(l1) = iterated_log(k, t) {
            if let Ok(l2) = iterated_log(k + 1, t) {
                if l1 > 0.0 && l2 > 0.0 {
                    let denom_b = l1 * l2 * spec.mu_tilde(t.powi(-2))?;
                    ratios_b.push((t, h_t / denom_b));
                }
            }
        }
    }

    if ratios_c.is_empty() || ratios_b.is_empty() {
        return Err(Error::horizon(
            "no fit time produced both frame ratios; horizon or fit grid too small",
        ));
    }

    let min_of = |v: &[(f64, f64)]| v.iter().fold(f64::INFINITY, |a, &(_, r)| a.min(r));
    let c_k = min_of(&ratios_c);
    let b_k = min_of(&ratios_b);

    let final_c = ratios_c.last().unwrap().1;
    let final_b = ratios_b.last().unwrap().1;
    let stable_at = |t: f64| -> bool {
        let rc = ratios_c.iter().find(|&&(tt, _)| tt >= t).map(|&(_, r)| r);
        let rb = ratios_b.iter().find(|&&(tt, _)| tt >= t).map(|&(_, r)| r);
        match (rc, rb) {
            (Some(rc), Some(rb)) => {
                rc > 0.0
                    && rb > 0.0
                    && rc / final_c < 2.0
                    && final_c / rc < 2.0
                    && rb / final_b < 2.0
                    && final_b / rb < 2.0
            }
            _ => false,
        }
    };

    let mut t_0 = f64::NAN;
    let mut stable = false;
    for &(t, _) in &ratios_b {
        if stable_at(t) {
            t_0 = t;
            stable = true;
            break;
        }
    }

    Ok(FrameFit { c_k, b_k, t_0, stable })
}
