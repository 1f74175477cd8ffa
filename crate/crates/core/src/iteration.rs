//! The discrete blow-up iteration: exponent sequences and their closed forms,
//! the iterated lower bound for log N_j, and the divergence-onset estimator.
//!
//! Onset times are double-exponentially large, so every onset comparison is
//! carried out in the variable τ = log^{k+1} t.  In that scale the logarithm
//! of the bracket A_k (log^k t)^{1/(p-1)} (log^{k+1} t) μ̃^{p/(p-1)}(t^{-2})
//! collapses to  log A_k − c_k/(p−1) + log τ,  where c_k is the correction
//! chain c₁ = log 2, c_{i+1} = log(1 + c_i / log^{i+1} t) accounting for
//! log^k(t²) versus log^k t; the chain saturates to 0 on its own once the
//! inner logs overflow to infinity.

use crate::constants::StraussConstants;
use crate::modulus::{iterated_exp, iterated_log, ModulusSpec};
use crate::{Error, Result};

/// m_j = 2 − 2^{−(j+1)}: the time-dilation sequence, increasing from 3/2
/// towards 2.
pub fn m_seq(j: u32) -> f64 {
    2.0 - 2f64.powi(-(j as i32) - 1)
}

/// State of the exponent iteration at step j.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationState {
    pub j: u32,
    pub a: f64,
    pub l: f64,
    pub b: f64,
    pub sigma: f64,
    pub log_n: f64,
    /// m_{2j}, the dilation used at this step.
    pub m: f64,
}

impl IterationState {
    /// (a, l, b, σ) = (1, 0, 1, 1) with N₀ = B_k.
    pub fn initial(b_k: f64) -> Result<Self> {
        if !(b_k > 0.0 && b_k.is_finite()) {
            return Err(Error::validation(format!("need B_k > 0, got {b_k}")));
        }
        Ok(IterationState {
            j: 0,
            a: 1.0,
            l: 0.0,
            b: 1.0,
            sigma: 1.0,
            log_n: b_k.ln(),
            m: m_seq(0),
        })
    }

    /// One step of the exponent recursion with amplitude gain
    /// N_{j+1} = C_k (m_{2j+2} − m_{2j}) / (L_k (a_j p + 1) m_{2j+2}) · N_j^p.
    pub fn advance(&self, c_k: f64, l_k: f64) -> Result<IterationState> {
        if !(c_k > 0.0 && l_k > 0.0) {
            return Err(Error::validation(format!(
                "need positive iteration constants, got C = {c_k}, L = {l_k}"
            )));
        }
        let p = StraussConstants::new().p;
        let m_next = m_seq(2 * (self.j + 1));
        // m_{2j+2} - m_{2j} = (3/4)·2^{-(2j+1)}, kept in closed form: the
        // direct difference underflows to 0 once 2^{-(2j+1)} drops below an
        // ulp of 2.
        let m_diff = 0.75 * 2f64.powi(-2 * self.j as i32 - 1);
        let gain = c_k * m_diff / (l_k * (self.a * p + 1.0) * m_next);
        Ok(IterationState {
            j: self.j + 1,
            a: self.a * p + 1.0,
            l: self.l * p + (p - 1.0),
            b: self.b * p,
            sigma: self.sigma * p + 1.0,
            log_n: gain.ln() + p * self.log_n,
            m: m_next,
        })
    }
}

/// (a_j, l_j, b_j, σ_j) in closed form:
/// a_j = σ_j = (p^{j+1} − 1)/(p − 1), l_j = p^j − 1, b_j = p^j.
pub fn closed_forms(j: u32) -> (f64, f64, f64, f64) {
    let p = StraussConstants::new().p;
    let pj = p.powi(j as i32);
    let a = (pj * p - 1.0) / (p - 1.0);
    (a, pj - 1.0, pj, a)
}

/// Partial sums Σ_{l=1}^{j} l·p^{−l} and Σ_{l=1}^{j} p^{−l}.
pub fn geometric_partial_sums(j: u32) -> (f64, f64) {
    let x = StraussConstants::new().p.recip();
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    let mut xl = 1.0;
    for l in 1..=j {
        xl *= x;
        s1 += l as f64 * xl;
        s2 += xl;
    }
    (s1, s2)
}

/// The j → ∞ limits of the partial sums: x/(1−x)² ≈ 1.20711 and
/// x/(1−x) ≈ 0.70711 with x = 1/p.
pub fn geometric_sum_limits() -> (f64, f64) {
    let x = StraussConstants::new().p.recip();
    (x / ((1.0 - x) * (1.0 - x)), x / (1.0 - x))
}

/// The telescoped bound
/// log N_j ≥ p^j (log N₀ − log(4p) Σ l p^{−l} + log(3C/(8L)) Σ p^{−l}).
pub fn log_n_lower(j: u32, log_n0: f64, c_k: f64, l_k: f64) -> Result<f64> {
    if !(c_k > 0.0 && l_k > 0.0) {
        return Err(Error::validation(format!(
            "need positive iteration constants, got C = {c_k}, L = {l_k}"
        )));
    }
    let p = StraussConstants::new().p;
    let (s1, s2) = geometric_partial_sums(j);
    Ok(p.powi(j as i32) * (log_n0 - (4.0 * p).ln() * s1 + (3.0 * c_k / (8.0 * l_k)).ln() * s2))
}

/// The limit C̃_∞ of the per-step coefficient C̃_j in log N_j ≥ C̃_j p^j.
pub fn c_tilde_limit(log_n0: f64, c_k: f64, l_k: f64) -> Result<f64> {
    if !(c_k > 0.0 && l_k > 0.0) {
        return Err(Error::validation(format!(
            "need positive iteration constants, got C = {c_k}, L = {l_k}"
        )));
    }
    let p = StraussConstants::new().p;
    let (s1, s2) = geometric_sum_limits();
    Ok(log_n0 - (4.0 * p).ln() * s1 + (3.0 * c_k / (8.0 * l_k)).ln() * s2)
}

/// Frame constants feeding the onset estimator.  L_k and A_k have no
/// effective value in the source analysis; `with_unit_factors` defaults them
/// to 1, which shifts the onset but preserves every monotonicity property.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OnsetConstants {
    pub b_k: f64,
    pub c_k: f64,
    pub l_k: f64,
    pub a_k: f64,
    pub t_0: f64,
}

impl OnsetConstants {
    pub fn with_unit_factors(b_k: f64, c_k: f64, t_0: f64) -> Self {
        OnsetConstants { b_k, c_k, l_k: 1.0, a_k: 1.0, t_0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OnsetRepresentation {
    /// The onset time itself is representable (t < 1e300).
    Plain,
    /// Only log log t (or a deeper iterate) is representable.
    LogLog,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlowupEstimate {
    pub k: u32,
    pub constants: OnsetConstants,
    pub c_tilde_inf: f64,
    /// log log of the onset time; infinite when even that overflows (k ≥ 2).
    pub onset_loglog: f64,
    /// The onset in log^{k+1} scale, always finite.
    pub onset_tau: f64,
    pub representation: OnsetRepresentation,
}

impl BlowupEstimate {
    /// The onset time in plain scale, when representable.
    pub fn onset_plain(&self) -> Option<f64> {
        match self.representation {
            OnsetRepresentation::Plain => Some(iterated_exp(self.k + 1, self.onset_tau)),
            OnsetRepresentation::LogLog => None,
        }
    }
}

/// log of the onset bracket at τ = log^{k+1} t:
/// log A − c_k(τ)/(p−1) + log τ.
fn log_bracket(k: u32, a_k: f64, tau: f64) -> f64 {
    let p = StraussConstants::new().p;
    let mut c = std::f64::consts::LN_2;
    for i in 1..k {
        let v = iterated_exp(k - i, tau);
        c = (c / v).ln_1p();
    }
    a_k.ln() - c / (p - 1.0) + tau.ln()
}

/// Smallest τ ≥ τ₀ with C̃_∞ + log bracket(τ) > 0, by monotone bisection in
/// the log^{k+1} variable.
pub fn divergence_onset_tau(c_tilde_inf: f64, a_k: f64, k: u32, tau_0: f64) -> Result<f64> {
    if !(a_k > 0.0 && tau_0 > 0.0) {
        return Err(Error::domain(format!(
            "need A_k > 0 and log^{}(t_0) > 0, got {a_k} and {tau_0}",
            k + 1
        )));
    }
    let phi = |tau: f64| c_tilde_inf + log_bracket(k, a_k, tau);
    if phi(tau_0) > 0.0 {
        return Ok(tau_0);
    }
    let mut lo = tau_0;
    let mut hi = tau_0;
    let mut phi_hi = phi(hi);
    for _ in 0..1100 {
        let next = hi * 2.0;
        let phi_next = phi(next);
        if phi_next < phi_hi - 1e-12 {
            return Err(Error::unsupported(
                "onset bracket is not monotone over the search range",
            ));
        }
        lo = hi;
        hi = next;
        phi_hi = phi_next;
        if phi_hi > 0.0 {
            break;
        }
    }
    if phi_hi <= 0.0 {
        return Err(Error::domain(format!(
            "onset bracket stays non-positive out to τ = {hi:e}"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if phi(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Divergence onset of the iterated lower-bound envelope: the smallest
/// t > t_0 at which C̃_∞ + log[A_k (log^k t)^{1/(p−1)} (log^{k+1} t)
/// μ̃^{p/(p−1)}(t^{−2})] turns positive.  A non-negative C̃_∞ already makes
/// the envelope diverge, so the onset is reported at t_0 itself.
pub fn blowup_onset(constants: &OnsetConstants, spec: &ModulusSpec) -> Result<BlowupEstimate> {
    let k = spec.log_depth().ok_or_else(|| {
        Error::unsupported("the onset estimator needs an iterated-log modulus")
    })?;
    let OnsetConstants { b_k, c_k, l_k, a_k, t_0 } = *constants;
    if !(b_k > 0.0 && c_k > 0.0 && l_k > 0.0 && a_k > 0.0) {
        return Err(Error::validation(format!(
            "onset constants must be positive, got B = {b_k}, C = {c_k}, L = {l_k}, A = {a_k}"
        )));
    }
    let tau_0 = iterated_log(k + 1, t_0)?;
    if !(tau_0 > 0.0) {
        return Err(Error::domain(format!(
            "t_0 = {t_0} too small: log^{}(t_0) must be positive",
            k + 1
        )));
    }
    let c_tilde_inf = c_tilde_limit(b_k.ln(), c_k, l_k)?;
    let tau = if c_tilde_inf >= 0.0 {
        tau_0
    } else {
        divergence_onset_tau(c_tilde_inf, a_k, k, tau_0)?
    };
    let onset_loglog = iterated_exp(k - 1, tau);
    let plain = iterated_exp(k + 1, tau);
    let representation = if plain.is_finite() && plain < 1e300 {
        OnsetRepresentation::Plain
    } else {
        OnsetRepresentation::LogLog
    };
    Ok(BlowupEstimate {
        k,
        constants: *constants,
        c_tilde_inf,
        onset_loglog,
        onset_tau: tau,
        representation,
    })
}

/// The bracketed expression whose uniform-in-j bound is the constant L_k:
///
///   Π_{l<k} log^l s / log^l(r_k s / (m_{2j} t_0))
///   + (b_j p)/(a_j p + 1) · log^k(r_k s/(m_{2j} t_0)) / log^k((m_0/m_{2j}) s)
///     · Π_{l<k} log^l s / log^l((m_0/m_{2j}) s) · (log^{k+1}(m_0 t_0))^{−1}
///
/// for s ≥ m_{2j} t_0, with log^k r_k = 0.
pub fn l_bracket(k: u32, j: u32, t_0: f64, s: f64) -> Result<f64> {
    let p = StraussConstants::new().p;
    let m0 = m_seq(0);
    let m2j = m_seq(2 * j);
    if !(t_0 > 0.0) || s < m2j * t_0 * (1.0 - 1e-12) {
        return Err(Error::domain(format!(
            "bracket defined for s ≥ m_2j t_0, got s = {s}, m_2j t_0 = {}",
            m2j * t_0
        )));
    }
    let tail = iterated_log(k + 1, m0 * t_0)?;
    if !(tail > 0.0) {
        return Err(Error::domain(format!(
            "t_0 = {t_0} too small: log^{}(m_0 t_0) must be positive",
            k + 1
        )));
    }
    let r_k = iterated_exp(k, 0.0);
    let arg1 = r_k * s / (m2j * t_0);
    let arg2 = m0 / m2j * s;
    let mut first = 1.0;
    for l in 1..k {
        first *= iterated_log(l, s)? / iterated_log(l, arg1)?;
    }
    let (a_j, _, b_j, _) = closed_forms(j);
    let mut second = b_j * p / (a_j * p + 1.0) * iterated_log(k, arg1)? / iterated_log(k, arg2)?;
    for l in 1..k {
        second *= iterated_log(l, s)? / iterated_log(l, arg2)?;
    }
    Ok(first + second / tail)
}

/// Spot check of the uniform bound: the maximum of the bracket over
/// j ≤ 10 and a geometric ladder of s values starting at m_{2j} t_0.
pub fn l_uniform_spotcheck(k: u32, t_0: f64) -> Result<f64> {
    let mut max = 0.0f64;
    for j in 0..=10 {
        let base = m_seq(2 * j) * t_0;
        for mult in [1.0, 1.5, 2.0, 5.0, 10.0, 100.0, 1e4] {
            max = max.max(l_bracket(k, j, t_0, base * mult)?);
        }
    }
    Ok(max)
}
