//! Radial 3-D wave machinery: exact linear propagation, two independent
//! nonlinear solvers (characteristic leapfrog and Picard iteration on the
//! Duhamel form), and the bound checks built on top of them.
//!
//! Everything works on the reduced unknown w(t, r) = r·u(t, r), which turns
//! the radial Laplacian into a plain second derivative: w_tt = w_rr + r·F(u).

mod bounds;
mod leapfrog;
mod picard;

pub use bounds::{
    ansatz_margin, pointwise_lowerbound_check, LowerBoundParams, LowerBoundReport,
};
pub use leapfrog::{solve_leapfrog, Forcing};
pub use picard::{duhamel_direct, picard_iterate};

use crate::constants::StraussConstants;
use crate::modulus::ModulusSpec;
use crate::quad::adaptive_simpson;
use crate::{Error, Result};

/// Radial data profile.  `Bump` and `PolyBump` are the compactly supported
/// shapes used in experiments; `Const` and `Gaussian` exist for closed-form
/// checks and are exempt from the support invariant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    Zero,
    Const(f64),
    /// amplitude · exp(1 − 1/(1 − (r/R)²)) inside r < R, C^∞ with peak value
    /// `amplitude` at the origin.
    Bump { amplitude: f64 },
    /// amplitude · (1 − (r/R)²)³ inside r < R, C².
    PolyBump { amplitude: f64 },
    /// exp(−decay·r²), supported everywhere.
    Gaussian { decay: f64 },
}

impl Profile {
    pub fn eval(&self, r: f64, support: f64) -> f64 {
        match *self {
            Profile::Zero => 0.0,
            Profile::Const(c) => c,
            Profile::Bump { amplitude } => {
                let s = r / support;
                if s.abs() >= 1.0 {
                    0.0
                } else {
                    amplitude * (1.0 - 1.0 / (1.0 - s * s)).exp()
                }
            }
            Profile::PolyBump { amplitude } => {
                let s = r / support;
                if s.abs() >= 1.0 {
                    0.0
                } else {
                    amplitude * (1.0 - s * s).powi(3)
                }
            }
            Profile::Gaussian { decay } => (-decay * r * r).exp(),
        }
    }

    pub fn derivative(&self, r: f64, support: f64) -> f64 {
        match *self {
            Profile::Zero | Profile::Const(_) => 0.0,
            Profile::Bump { amplitude } => {
                let s = r / support;
                if s.abs() >= 1.0 {
                    0.0
                } else {
                    let den = 1.0 - s * s;
                    amplitude * (1.0 - 1.0 / den).exp() * (-2.0 * s / (den * den)) / support
                }
            }
            Profile::PolyBump { amplitude } => {
                let s = r / support;
                if s.abs() >= 1.0 {
                    0.0
                } else {
                    amplitude * 3.0 * (1.0 - s * s).powi(2) * (-2.0 * s) / support
                }
            }
            Profile::Gaussian { decay } => -2.0 * decay * r * (-decay * r * r).exp(),
        }
    }

    pub fn is_compact(&self) -> bool {
        matches!(self, Profile::Zero | Profile::Bump { .. } | Profile::PolyBump { .. })
    }

    pub fn is_nonnegative(&self) -> bool {
        match *self {
            Profile::Zero => true,
            Profile::Const(c) => c >= 0.0,
            Profile::Bump { amplitude } | Profile::PolyBump { amplitude } => amplitude >= 0.0,
            Profile::Gaussian { .. } => true,
        }
    }
}

/// Cauchy data (u, u_t)|_{t=0} = ε·(u0, u1) with support radius R.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialData {
    pub u0: Profile,
    pub u1: Profile,
    pub support_radius: f64,
    pub epsilon: f64,
}

impl InitialData {
    pub fn new(u0: Profile, u1: Profile, support_radius: f64, epsilon: f64) -> Result<Self> {
        if !(support_radius > 0.0) {
            return Err(Error::validation(format!(
                "support radius must be positive, got {support_radius}"
            )));
        }
        if !epsilon.is_finite() {
            return Err(Error::validation(format!("amplitude must be finite, got {epsilon}")));
        }
        Ok(InitialData { u0, u1, support_radius, epsilon })
    }

    /// Both profiles vanish beyond the support radius.
    pub fn is_compact(&self) -> bool {
        self.u0.is_compact() && self.u1.is_compact()
    }

    /// The configuration of the blow-up experiments: u0 ≡ 0, u1 ≥ 0 and
    /// not identically zero.
    pub fn is_blowup_class(&self) -> bool {
        matches!(self.u0, Profile::Zero)
            && self.u1.is_nonnegative()
            && !matches!(self.u1, Profile::Zero)
    }
}

/// Unit-CFL space-time grid: Δt = Δr = h.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacteristicGrid {
    pub h: f64,
    pub t_max: f64,
    pub r_max: f64,
}

impl CharacteristicGrid {
    pub fn new(h: f64, t_max: f64, r_max: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::validation(format!("step must be positive, got {h}")));
        }
        if !(t_max > 0.0 && r_max > 0.0) {
            return Err(Error::validation(format!(
                "horizon and radius must be positive, got T = {t_max}, r_max = {r_max}"
            )));
        }
        Ok(CharacteristicGrid { h, t_max, r_max })
    }

    pub fn n_t(&self) -> usize {
        (self.t_max / self.h).round() as usize
    }

    pub fn n_r(&self) -> usize {
        (self.r_max / self.h).round() as usize
    }

    /// The support of compactly supported data never reaches the outer
    /// boundary before t_max.
    pub fn contains_light_cone(&self, support_radius: f64) -> bool {
        self.r_max >= self.t_max + support_radius
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Leapfrog,
    Picard,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlowupReason {
    /// max|u| crossed the detection threshold.
    Threshold,
    /// a non-finite value appeared first.
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlowupEvent {
    pub t_star: f64,
    pub r_star: f64,
    pub peak: f64,
    pub reason: BlowupReason,
}

/// A computed field w(t, r) = r·u(t, r) on the characteristic grid, with the
/// axis values of u stored separately (each scheme knows its own best way to
/// produce them).
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionField {
    pub h: f64,
    pub n_r: usize,
    pub scheme: Scheme,
    pub support_radius: f64,
    pub epsilon: f64,
    w: Vec<f64>,
    axis_u: Vec<f64>,
    pub blowup: Option<BlowupEvent>,
    /// sup-norm distances between consecutive iterates (Picard only).
    pub cauchy_increments: Vec<f64>,
    /// Whether the field was computed with the critical nonlinearity.
    pub nonlinear: bool,
}

impl SolutionField {
    pub(crate) fn from_rows(
        h: f64,
        n_r: usize,
        scheme: Scheme,
        support_radius: f64,
        epsilon: f64,
        w: Vec<f64>,
        axis_u: Vec<f64>,
    ) -> Self {
        assert_eq!(w.len() % n_r, 0);
        assert_eq!(axis_u.len(), w.len() / n_r);
        SolutionField {
            h,
            n_r,
            scheme,
            support_radius,
            epsilon,
            w,
            axis_u,
            blowup: None,
            cauchy_increments: Vec::new(),
            nonlinear: false,
        }
    }

    /// Synthetic field u ≡ value on the whole grid.  No wave dynamics behind
    /// it; the weighted functionals of such a field have closed forms, which
    /// makes it the reference input for diagnostic checks.
    pub fn uniform(value: f64, h: f64, t_max: f64, r_max: f64) -> Result<Self> {
        let grid = CharacteristicGrid::new(h, t_max, r_max)?;
        let n_t = grid.n_t();
        let n_r = grid.n_r() + 1;
        let mut w = Vec::with_capacity((n_t + 1) * n_r);
        let mut axis = Vec::with_capacity(n_t + 1);
        for _ in 0..=n_t {
            for m in 0..n_r {
                w.push(value * m as f64 * h);
            }
            axis.push(value);
        }
        Ok(SolutionField::from_rows(h, n_r, Scheme::Leapfrog, 1.0, 1.0, w, axis))
    }

    /// Number of stored time rows (a blow-up truncates the field).
    pub fn n_t(&self) -> usize {
        self.w.len() / self.n_r
    }

    pub fn t_of(&self, i: usize) -> f64 {
        i as f64 * self.h
    }

    pub fn r_of(&self, m: usize) -> f64 {
        m as f64 * self.h
    }

    pub fn w_at(&self, i: usize, m: usize) -> f64 {
        self.w[i * self.n_r + m]
    }

    pub fn u_at(&self, i: usize, m: usize) -> f64 {
        if m == 0 {
            self.axis_u[i]
        } else {
            self.w[i * self.n_r + m] / self.r_of(m)
        }
    }

    /// Largest |u| over the stored field.
    pub fn sup_u(&self) -> f64 {
        let mut sup = 0.0f64;
        for i in 0..self.n_t() {
            for m in 0..self.n_r {
                sup = sup.max(self.u_at(i, m).abs());
            }
        }
        sup
    }
}

/// ε·[∂_t S(t)u0 + S(t)u1](r): the exact solution of the linear problem via
/// the radial d'Alembert formula, quadrature only over the u1 profile.
pub fn homogeneous_solution(data: &InitialData, t: f64, r: f64) -> Result<f64> {
    if !(t >= 0.0 && r >= 0.0) {
        return Err(Error::domain(format!("need t, r ≥ 0, got ({t}, {r})")));
    }
    let rr = data.support_radius;
    let eps = data.epsilon;
    if r < 1e-12 {
        // Even-extension limits at the axis.
        let u1_term = t * data.u1.eval(t, rr);
        let u0_term = data.u0.eval(t, rr) + t * data.u0.derivative(t, rr);
        return Ok(eps * (u1_term + u0_term));
    }
    let lo = (t - r).abs();
    let hi = t + r;

    let mut u1_term = 0.0;
    if !matches!(data.u1, Profile::Zero) {
        let (a, b) = if data.u1.is_compact() {
            (lo.min(rr), hi.min(rr))
        } else {
            (lo, hi)
        };
        if b > a {
            let profile = data.u1;
            let integral = adaptive_simpson(
                |lam| profile.eval(lam, rr) * lam,
                a,
                b,
                1e-11,
                1e-300,
                "linear propagation",
            )?;
            u1_term = integral.value / (2.0 * r);
        }
    }

    let u0_term = ((t + r) * data.u0.eval(t + r, rr)
        - (t - r).signum() * lo * data.u0.eval(lo, rr))
        / (2.0 * r);

    Ok(eps * (u1_term + u0_term))
}

/// max over the samples of |u⁰(t, r)|·⟨t+r⟩ inside the strip |t−r| ≤ R,
/// where ⟨y⟩ = (s_shift^{-2} + y²)^{1/2}; checks that u⁰ vanishes outside
/// the strip (strong Huygens).
pub fn dispersive_fit(data: &InitialData, samples: &[(f64, f64)], s_shift: f64) -> Result<f64> {
    if !data.is_compact() {
        return Err(Error::domain(
            "dispersive profile requires compactly supported data",
        ));
    }
    if !(s_shift > 0.0) {
        return Err(Error::domain(format!("shift must be positive, got {s_shift}")));
    }
    let inv2 = 1.0 / (s_shift * s_shift);
    let rr = data.support_radius;
    let mut n = 0.0f64;
    for &(t, r) in samples {
        let u = homogeneous_solution(data, t, r)?;
        if (t - r).abs() <= rr {
            n = n.max(u.abs() * (inv2 + (t + r) * (t + r)).sqrt());
        } else if u.abs() > 1e-12 * (1.0 + data.epsilon.abs()) {
            return Err(Error::domain(format!(
                "linear field fails to vanish outside the light shell: u({t}, {r}) = {u:e}"
            )));
        }
    }
    Ok(n)
}

/// Uniform sample grid covering the strip |t−r| ≤ R plus a margin outside it.
pub fn strip_samples(data: &InitialData, t_max: f64, nt: usize, nr: usize) -> Vec<(f64, f64)> {
    let rr = data.support_radius;
    let mut out = Vec::with_capacity(nt * (nr + 2));
    for i in 0..nt {
        let t = t_max * (i as f64 + 0.5) / nt as f64;
        for j in 0..nr {
            let y = -rr + 2.0 * rr * j as f64 / (nr - 1) as f64;
            let r = t - y;
            if r >= 0.0 {
                out.push((t, r));
            }
        }
        // Just outside the shell on both sides.
        out.push((t, t + rr + 0.25));
        if t - rr - 0.25 >= 0.0 {
            out.push((t, t - rr - 0.25));
        }
    }
    out
}

/// The decaying comparison weight of the global-existence ansatz:
/// Φ₀(t, r) = ⟨t+r⟩^{-1} ⟨t−r⟩^{-1/p} μ(⟨t−r⟩^{-1}).
#[derive(Debug, Clone, PartialEq)]
pub struct AnsatzWeight {
    pub c0: f64,
    pub s_shift: f64,
    pub modulus: ModulusSpec,
}

impl AnsatzWeight {
    pub fn new(c0: f64, s_shift: f64, modulus: ModulusSpec) -> Result<Self> {
        if !(c0 > 0.0) || !(s_shift > 0.0) {
            return Err(Error::validation(format!(
                "weight constants must be positive, got C0 = {c0}, shift = {s_shift}"
            )));
        }
        Ok(AnsatzWeight { c0, s_shift, modulus })
    }

    /// ⟨y⟩ = (s_shift^{-2} + y²)^{1/2}.
    pub fn bracket(&self, y: f64) -> f64 {
        (1.0 / (self.s_shift * self.s_shift) + y * y).sqrt()
    }

    pub fn phi0(&self, t: f64, r: f64) -> Result<f64> {
        let out = self.bracket(t + r);
        let inn = self.bracket(t - r);
        Ok(out.recip() * inn.powf(-1.0 / StraussConstants::new().p) * self.modulus.mu_eval(inn.recip())?)
    }

    /// Calibrates C0 so that the linear field obeys |u⁰| ≤ ε C0 Φ₀ exactly
    /// at the fitted constant: C0 = N / inf_{|y| ≤ R} ⟨y⟩^{-1/p} μ(⟨y⟩^{-1}).
    pub fn from_dispersive(
        n: f64,
        s_shift: f64,
        modulus: ModulusSpec,
        support_radius: f64,
    ) -> Result<Self> {
        if !(n > 0.0) {
            return Err(Error::validation(format!("dispersive constant must be positive, got {n}")));
        }
        let p = StraussConstants::new().p;
        let inv2 = 1.0 / (s_shift * s_shift);
        let mut inf = f64::INFINITY;
        for j in 0..=512 {
            let y = support_radius * j as f64 / 512.0;
            let b = (inv2 + y * y).sqrt();
            let g = b.powf(-1.0 / p) * modulus.mu_eval(b.recip())?;
            inf = inf.min(g);
        }
        AnsatzWeight::new(n / inf, s_shift, modulus)
    }
}
