//! Modulus-of-continuity families and their analytic probes.
//!
//! A modulus here is a continuous non-decreasing function μ on (0, λ_max]
//! with μ(0+) = 0, extended by clamping above λ_max (the nonlinearity only
//! needs μ up to a fixed amplitude scale).  Families:
//!
//! * `PowerLog { gamma, c_l }`:  μ(λ) = c_l (log 1/λ)^(-γ)
//! * `IteratedLog { k }`:        μ_k(λ) = Π_{i=1..k} (log^i 1/λ)^(-1/p)
//! * `LogProduct { exponents }`: μ(λ) = Π_i (log^i 1/λ)^(-e_i)  (raw e_i)
//! * `Custom { table }`:         sampled values, log-log interpolated
//!
//! log^i denotes the i-times iterated natural logarithm (log^0 = identity).
//! Internally everything analytic is evaluated in τ = log(1/λ), which stays
//! representable long after λ itself would underflow.
//!
//! The borderline convergence classifier for ∫_0 μ^p(λ)/λ dλ lives in
//! [`classify`].

mod classify;
mod serde_impl;

pub use classify::{
    classify_custom_tail, Classification, CriticalIntegralReport, LevelFit, TailShape,
};

use crate::constants::StraussConstants;
use crate::{Error, Result};

/// Maximum nesting depth for iterated-log families: the domain anchor for
/// depth 4, exp(-exp(exp(2))), already underflows an f64.
pub const MAX_LOG_DEPTH: u32 = 3;

/// Applies the natural logarithm `k` times; `k = 0` returns `x`.
pub fn iterated_log(k: u32, x: f64) -> Result<f64> {
    let mut v = x;
    for i in 0..k {
        if v <= 0.0 {
            return Err(Error::domain(format!(
                "iterated log of depth {k} undefined at {x}: level {i} reached {v}"
            )));
        }
        v = v.ln();
    }
    Ok(v)
}

/// Applies exp `k` times; saturates to +inf on overflow.
pub fn iterated_exp(k: u32, x: f64) -> f64 {
    let mut v = x;
    for _ in 0..k {
        v = v.exp();
    }
    v
}

/// Domain anchor λ_k defined by log^(k-1)(1/λ_k) = 2; λ_1 = 1/2, λ_2 = e^-2.
pub fn lambda_k(k: u32) -> Result<f64> {
    if k < 1 || k > MAX_LOG_DEPTH {
        return Err(Error::domain(format!(
            "iterated-log depth must lie in 1..={MAX_LOG_DEPTH}, got {k}"
        )));
    }
    Ok(1.0 / iterated_exp(k - 1, 2.0))
}

/// Behaviour above the calibrated domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extension {
    /// μ(λ) = μ(λ_max) for λ > λ_max.
    ClampAtDomainUpper,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    PowerLog { gamma: f64, c_l: f64 },
    IteratedLog { k: u32 },
    LogProduct { exponents: Vec<f64> },
    Custom { table: Vec<(f64, f64)> },
}

/// A validated modulus of continuity.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulusSpec {
    family: Family,
    lambda_max: f64,
    extension: Extension,
}

impl ModulusSpec {
    /// μ(λ) = c_l (log 1/λ)^(-gamma) on (0, 1/2] by default.
    pub fn power_log(gamma: f64, c_l: f64) -> Result<Self> {
        Self::with_family(Family::PowerLog { gamma, c_l }, None)
    }

    /// μ_k(λ) = Π_{i=1..k} (log^i 1/λ)^(-1/p) on (0, λ_k].
    pub fn iterated_log(k: u32) -> Result<Self> {
        Self::with_family(Family::IteratedLog { k }, None)
    }

    /// μ(λ) = Π_i (log^i 1/λ)^(-exponents[i-1]) with raw exponents.
    pub fn log_product(exponents: Vec<f64>) -> Result<Self> {
        Self::with_family(Family::LogProduct { exponents }, None)
    }

    /// Sampled modulus; entries are (λ, μ(λ)) sorted by λ ascending.
    pub fn custom(table: Vec<(f64, f64)>) -> Result<Self> {
        Self::with_family(Family::Custom { table }, None)
    }

    /// Same family with an explicit domain upper end.
    pub fn with_lambda_max(self, lambda_max: f64) -> Result<Self> {
        Self::with_family(self.family, Some(lambda_max))
    }

    pub fn with_family(family: Family, lambda_max: Option<f64>) -> Result<Self> {
        let default_upper = match &family {
            Family::PowerLog { gamma, c_l } => {
                if !(*gamma > 0.0) {
                    return Err(Error::validation(format!("power-log exponent must be positive, got {gamma}")));
                }
                if !(*c_l > 0.0) {
                    return Err(Error::validation(format!("power-log coefficient must be positive, got {c_l}")));
                }
                0.5
            }
            Family::IteratedLog { k } => lambda_k(*k)?,
            Family::LogProduct { exponents } => {
                if exponents.is_empty() {
                    return Err(Error::validation("log-product needs at least one exponent"));
                }
                if exponents.len() as u32 > MAX_LOG_DEPTH {
                    return Err(Error::validation(format!(
                        "log-product depth limited to {MAX_LOG_DEPTH} factors, got {}",
                        exponents.len()
                    )));
                }
                match exponents.iter().find(|e| **e != 0.0) {
                    Some(e) if *e > 0.0 => {}
                    _ => {
                        return Err(Error::validation(
                            "log-product exponents must be lexicographically positive so that μ(0+) = 0",
                        ))
                    }
                }
                lambda_k(exponents.len() as u32)?
            }
            Family::Custom { table } => {
                if table.len() < 2 {
                    return Err(Error::validation("sample table needs at least two points"));
                }
                for w in table.windows(2) {
                    if !(w[0].0 > 0.0) || !(w[1].0 > w[0].0) {
                        return Err(Error::validation("sample abscissae must be positive and strictly increasing"));
                    }
                    if !(w[0].1 > 0.0) || w[1].1 < w[0].1 {
                        return Err(Error::validation("sample values must be positive and non-decreasing"));
                    }
                }
                table.last().unwrap().0
            }
        };
        let lambda_max = lambda_max.unwrap_or(default_upper);
        if !(lambda_max > 0.0) || lambda_max >= 1.0 {
            return Err(Error::validation(format!("domain upper end must lie in (0, 1), got {lambda_max}")));
        }
        let spec = ModulusSpec {
            family,
            lambda_max,
            extension: Extension::ClampAtDomainUpper,
        };
        spec.check_domain()?;
        spec.check_sampled_monotonicity()?;
        Ok(spec)
    }

    fn check_domain(&self) -> Result<()> {
        // The deepest iterated-log factor must be positive at λ_max; the
        // shallower ones then are as well.
        let tau_min = -self.lambda_max.ln();
        let depth = match &self.family {
            Family::PowerLog { .. } => 1,
            Family::IteratedLog { k } => *k,
            Family::LogProduct { exponents } => exponents.len() as u32,
            Family::Custom { table } => {
                if self.lambda_max > table.last().unwrap().0 {
                    return Err(Error::validation("λ_max beyond the last table sample"));
                }
                return Ok(());
            }
        };
        let deepest = iterated_log(depth - 1, tau_min).unwrap_or(f64::NEG_INFINITY);
        if deepest <= 0.0 {
            return Err(Error::validation(format!(
                "λ_max = {} too large: log^{depth}(1/λ) not positive on the domain",
                self.lambda_max
            )));
        }
        Ok(())
    }

    /// Mixed-sign log-product exponents can break monotonicity near λ_max;
    /// sample the domain to catch that at construction time.
    fn check_sampled_monotonicity(&self) -> Result<()> {
        if let Family::LogProduct { exponents } = &self.family {
            if exponents.iter().any(|e| *e < 0.0) {
                // Non-monotone stretches of mixed-sign products sit next to
                // λ_max, so the τ samples are packed quadratically there.
                let tau_min = -self.lambda_max.ln();
                let mut prev = f64::INFINITY;
                for j in 0..=512 {
                    let t = j as f64 / 512.0;
                    let tau = tau_min + 120.0 * t * t;
                    let v = self.ln_mu_of_tau(tau)?;
                    if v > prev + 1e-12 {
                        return Err(Error::validation(format!(
                            "log-product modulus is not monotone on (0, {}]",
                            self.lambda_max
                        )));
                    }
                    prev = v;
                }
            }
        }
        Ok(())
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    pub fn extension(&self) -> Extension {
        self.extension
    }

    /// log μ evaluated at τ = log(1/λ); the natural variable for analytic
    /// families (no clamping applied, τ must satisfy τ ≥ log(1/λ_max)).
    pub(crate) fn ln_mu_of_tau(&self, tau: f64) -> Result<f64> {
        match &self.family {
            Family::PowerLog { gamma, c_l } => {
                if tau <= 0.0 {
                    return Err(Error::domain(format!("power-log modulus undefined at τ = {tau}")));
                }
                Ok(c_l.ln() - gamma * tau.ln())
            }
            Family::IteratedLog { k } => {
                let p = StraussConstants::new().p;
                let mut acc = 0.0;
                let mut v = tau;
                for i in 0..*k {
                    if v <= 0.0 {
                        return Err(Error::domain(format!(
                            "iterated-log modulus depth {k} undefined at τ = {tau} (level {i})"
                        )));
                    }
                    acc -= v.ln() / p;
                    v = v.ln();
                }
                Ok(acc)
            }
            Family::LogProduct { exponents } => {
                let mut acc = 0.0;
                let mut v = tau;
                for (i, e) in exponents.iter().enumerate() {
                    if v <= 0.0 {
                        return Err(Error::domain(format!(
                            "log-product modulus undefined at τ = {tau} (level {i})"
                        )));
                    }
                    acc -= e * v.ln();
                    v = v.ln();
                }
                Ok(acc)
            }
            Family::Custom { table } => {
                let lambda = (-tau).exp();
                let first = table.first().unwrap();
                if lambda < first.0 * (1.0 - 1e-12) {
                    return Err(Error::domain(format!(
                        "sample table does not reach λ = {lambda:e} (first sample {:e})",
                        first.0
                    )));
                }
                let lambda = lambda.max(first.0);
                let idx = table.partition_point(|(l, _)| *l < lambda).min(table.len() - 1).max(1);
                let (l0, m0) = table[idx - 1];
                let (l1, m1) = table[idx];
                let t = (lambda.ln() - l0.ln()) / (l1.ln() - l0.ln());
                Ok(m0.ln() + t * (m1.ln() - m0.ln()))
            }
        }
    }

    /// μ(λ) with the clamped extension above λ_max.  Rejects λ ≤ 0.
    pub fn mu_eval(&self, lambda: f64) -> Result<f64> {
        if !(lambda > 0.0) {
            return Err(Error::domain(format!("modulus undefined at λ = {lambda}")));
        }
        let lam = lambda.min(self.lambda_max);
        Ok(self.ln_mu_of_tau(-lam.ln())?.exp())
    }

    /// sup of λ|μ'(λ)|/μ(λ) over [lo, hi] ⊂ (0, λ_max].
    ///
    /// For the analytic families the ratio has the closed form
    /// |Σ_i e_i / (ℓ_1 ⋯ ℓ_i)| with ℓ_i = log^i(1/λ); it is evaluated on a
    /// grid plus the endpoints.  Unsupported for sampled tables.
    pub fn mu_log_derivative_ratio(&self, lo: f64, hi: f64) -> Result<f64> {
        if !(lo > 0.0 && hi >= lo) {
            return Err(Error::domain(format!("invalid range [{lo}, {hi}]")));
        }
        if hi > self.lambda_max * (1.0 + 1e-12) {
            return Err(Error::domain(format!(
                "range end {hi} beyond domain upper end {}",
                self.lambda_max
            )));
        }
        let exps: Vec<f64> = match &self.family {
            Family::PowerLog { gamma, .. } => vec![*gamma],
            Family::IteratedLog { k } => {
                let p = StraussConstants::new().p;
                vec![1.0 / p; *k as usize]
            }
            Family::LogProduct { exponents } => exponents.clone(),
            Family::Custom { .. } => {
                return Err(Error::unsupported(
                    "log-derivative ratio is undefined for sampled tables; supply an analytic family",
                ))
            }
        };
        let ratio_at = |tau: f64| -> Result<f64> {
            let mut acc = 0.0;
            let mut prod = 1.0;
            let mut v = tau;
            for e in &exps {
                if v <= 0.0 {
                    return Err(Error::domain(format!("ratio undefined at τ = {tau}")));
                }
                prod *= v;
                acc += e / prod;
                v = v.ln();
            }
            Ok(acc.abs())
        };
        let tau_hi = -lo.ln();
        let tau_lo = -hi.ln();
        let mut sup = f64::NEG_INFINITY;
        let n = 128;
        for j in 0..=n {
            let tau = tau_lo + (tau_hi - tau_lo) * j as f64 / n as f64;
            sup = sup.max(ratio_at(tau)?);
        }
        Ok(sup)
    }

    /// Convergence/divergence report for ∫_ε^{λ0} μ^p(λ)/λ dλ as ε → 0.
    pub fn critical_integral(&self, lambda0: f64, floors: &[f64]) -> Result<CriticalIntegralReport> {
        classify::critical_integral(self, lambda0, floors)
    }

    /// lim_{λ→0+} μ(λ) (log 1/λ)^(1/p): the scale-invariant index separating
    /// power-log moduli at the critical rate.
    pub fn c_str_index(&self) -> CStrIndex {
        let p = StraussConstants::new().p;
        let inv_p = 1.0 / p;
        const EXP_TOL: f64 = 1e-12;
        match &self.family {
            Family::PowerLog { gamma, c_l } => {
                if (gamma - inv_p).abs() < EXP_TOL {
                    CStrIndex::Finite(*c_l)
                } else if *gamma > inv_p {
                    CStrIndex::Finite(0.0)
                } else {
                    CStrIndex::Infinite
                }
            }
            Family::IteratedLog { k } => {
                if *k == 1 {
                    CStrIndex::Finite(1.0)
                } else {
                    CStrIndex::Finite(0.0)
                }
            }
            Family::LogProduct { exponents } => {
                let lead = exponents[0];
                if (lead - inv_p).abs() < EXP_TOL {
                    match exponents[1..].iter().find(|e| e.abs() >= EXP_TOL) {
                        None => CStrIndex::Finite(1.0),
                        Some(e) if *e > 0.0 => CStrIndex::Finite(0.0),
                        Some(_) => CStrIndex::Infinite,
                    }
                } else if lead > inv_p {
                    CStrIndex::Finite(0.0)
                } else {
                    CStrIndex::Infinite
                }
            }
            Family::Custom { table } => {
                // Sampled extrapolation along the table's small-λ end.
                let vals: Vec<f64> = table
                    .iter()
                    .take_while(|(l, _)| *l < 1.0)
                    .map(|(l, m)| m * (-l.ln()).powf(inv_p))
                    .collect();
                if vals.len() < 4 {
                    return CStrIndex::Inconclusive;
                }
                let head: Vec<f64> = vals.iter().take(4).cloned().collect();
                let drift = (head[0] - head[3]).abs() / head[3].abs().max(1e-300);
                if drift < 0.05 {
                    CStrIndex::Finite(head[0])
                } else if head.windows(2).all(|w| w[0] > w[1]) {
                    // Values grow as λ shrinks (table is λ-ascending).
                    CStrIndex::Infinite
                } else {
                    CStrIndex::Inconclusive
                }
            }
        }
    }

    /// Sampled boundedness of the two decay-rate ratios used to place a
    /// modulus relative to the known sufficient conditions:
    ///
    /// * two-log:   μ(λ) (log 1/λ)^(1/p) · log^2(1/λ)             bounded?
    /// * three-log: μ(λ) (log 1/λ)^(1/p) (log^2 1/λ)^(1/p) · log^3(1/λ) bounded?
    pub fn decay_predicates(&self, probes: &[f64]) -> Result<DecayReport> {
        if probes.len() < 4 {
            return Err(Error::domain("need at least four probe values"));
        }
        let mut taus: Vec<f64> = Vec::with_capacity(probes.len());
        for &lambda in probes {
            if !(lambda > 0.0) {
                return Err(Error::domain(format!("probe λ = {lambda} not positive")));
            }
            let tau = -lambda.ln();
            // All three iterated logs must be defined: log^3(1/λ) > 0.
            if iterated_log(2, tau).map(|v| v <= 0.0).unwrap_or(true) {
                return Err(Error::domain(format!(
                    "probe λ = {lambda:e} too large: triple iterated log not positive"
                )));
            }
            taus.push(tau);
        }
        taus.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let p = StraussConstants::new().p;
        let inv_p = 1.0 / p;
        let mut two_log = Vec::with_capacity(taus.len());
        let mut three_log = Vec::with_capacity(taus.len());
        for &tau in &taus {
            let ln_mu = self.ln_mu_of_tau(tau)?;
            let l2 = tau.ln();
            let l3 = l2.ln();
            two_log.push((ln_mu + inv_p * tau.ln() + l2.ln()).exp());
            three_log.push((ln_mu + inv_p * tau.ln() + inv_p * l2.ln() + l3.ln()).exp());
        }
        Ok(DecayReport {
            two_log: bounded_verdict(&two_log),
            three_log: bounded_verdict(&three_log),
            two_log_ratios: two_log,
            three_log_ratios: three_log,
        })
    }

    /// ti-style modulus for iterated-log families:
    /// ti(λ) = Π_{i=1..k-1} (log^i 1/λ)^(1/p) · μ(λ), which collapses to
    /// (log^k 1/λ)^(-1/p).  Evaluated through the product form.
    pub fn mu_tilde(&self, lambda: f64) -> Result<f64> {
        let k = match &self.family {
            Family::IteratedLog { k } => *k,
            _ => {
                return Err(Error::unsupported(
                    "the tilde-weighted modulus is defined for iterated-log families",
                ))
            }
        };
        if !(lambda > 0.0 && lambda <= self.lambda_max) {
            return Err(Error::domain(format!("λ = {lambda} outside (0, {}]", self.lambda_max)));
        }
        let p = StraussConstants::new().p;
        let tau = -lambda.ln();
        let mut acc = self.ln_mu_of_tau(tau)?;
        let mut v = tau;
        for _ in 1..k {
            acc += v.ln() / p;
            v = v.ln();
        }
        Ok(acc.exp())
    }

    /// Iterated-log depth when the family has one.
    pub fn log_depth(&self) -> Option<u32> {
        match &self.family {
            Family::IteratedLog { k } => Some(*k),
            Family::LogProduct { exponents } => Some(exponents.len() as u32),
            _ => None,
        }
    }

    /// Closed-form shape of log μ^p in τ = log(1/λ) for the tail classifier.
    pub(crate) fn tail_shape(&self) -> Option<TailShape> {
        let p = StraussConstants::new().p;
        match &self.family {
            Family::PowerLog { gamma, c_l } => Some(TailShape::new(p * c_l.ln(), vec![gamma * p])),
            Family::IteratedLog { k } => Some(TailShape::new(0.0, vec![1.0; *k as usize])),
            Family::LogProduct { exponents } => {
                Some(TailShape::new(0.0, exponents.iter().map(|e| e * p).collect()))
            }
            Family::Custom { .. } => None,
        }
    }
}

/// Limit value of μ(λ)(log 1/λ)^(1/p).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CStrIndex {
    Finite(f64),
    Infinite,
    Inconclusive,
}

/// Three-way verdict for sampled boundedness checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

/// Boundedness of the two decay ratios along the probe sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    pub two_log: Verdict,
    pub three_log: Verdict,
    pub two_log_ratios: Vec<f64>,
    pub three_log_ratios: Vec<f64>,
}

/// A ratio sequence is flagged unbounded when it grows monotonically by a
/// definite factor across the probes; bounded when its deep end does not
/// overshoot what was already seen; oscillating otherwise.
fn bounded_verdict(ratios: &[f64]) -> Verdict {
    let first = ratios[0];
    let last = *ratios.last().unwrap();
    let monotone = ratios.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-9));
    if monotone && last > 1.5 * first {
        return Verdict::Fails;
    }
    let max_before = ratios[..ratios.len() - 1]
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    if last <= 1.25 * max_before {
        Verdict::Holds
    } else {
        Verdict::Inconclusive
    }
}
