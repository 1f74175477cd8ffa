//! Fast invariant suite behind the `verify` command.  The checks are fixed
//! and self-seeding; the experiment config only chooses where the summary
//! lands.

use critwave_core::export::{fnv1a_64, format_float};
use critwave_core::functional::jensen_check;
use critwave_core::iteration;
use critwave_core::modulus::{CStrIndex, Classification, ModulusSpec};
use critwave_core::radial_wave::{
    homogeneous_solution, solve_leapfrog, CharacteristicGrid, Forcing, InitialData, Profile,
};
use critwave_core::testfunc::{phi, TestFunctionParams};
use critwave_core::StraussConstants;

pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn check(
    name: &'static str,
    run: impl FnOnce() -> Result<(bool, String), critwave_core::Error>,
) -> Check {
    match run() {
        Ok((pass, detail)) => Check { name, pass, detail },
        Err(e) => Check {
            name,
            pass: false,
            detail: format!("error: {e}"),
        },
    }
}

fn exponent_identities() -> Result<(bool, String), critwave_core::Error> {
    let c = StraussConstants::new();
    let worst = c
        .critical_residual()
        .abs()
        .max((c.q - 1.0 / c.p_conj).abs())
        .max((c.p / c.p_conj - (c.p - 1.0)).abs());
    Ok((worst <= 1e-12, format!("max identity residual {worst:.3e}")))
}

fn classifier_dichotomy() -> Result<(bool, String), critwave_core::Error> {
    let floors = [(-25f64).exp(), (-50f64).exp(), (-100f64).exp()];
    let diverging = ModulusSpec::power_log(0.40, 1.0)?;
    let d = diverging.critical_integral((-1f64).exp(), &floors)?;
    let converging = ModulusSpec::power_log(1.0, 1.0)?;
    let conv = converging.critical_integral((-1f64).exp(), &floors)?;
    let closed = match conv.value_if_convergent {
        Some(v) => (v - std::f64::consts::FRAC_1_SQRT_2).abs() <= 1e-6,
        None => false,
    };
    let mu1 = ModulusSpec::iterated_log(1)?;
    let m = mu1.critical_integral((-2f64).exp(), &floors)?;
    let partial = m.partial_values[2].1;
    let pass = d.classification == Classification::Divergent
        && conv.classification == Classification::Convergent
        && closed
        && m.classification == Classification::Divergent
        && (partial - 50f64.ln()).abs() <= 1e-6
        && matches!(mu1.c_str_index(), CStrIndex::Finite(v) if (v - 1.0).abs() <= 1e-12);
    Ok((
        pass,
        format!(
            "γ=0.40 {:?}, γ=1.0 {:?} value {:?}, μ₁ partial {partial:.6}",
            d.classification, conv.classification, conv.value_if_convergent
        ),
    ))
}

fn linear_error(h: f64) -> Result<f64, critwave_core::Error> {
    let data = InitialData::new(Profile::Zero, Profile::Bump { amplitude: 1.0 }, 1.0, 1.0)?;
    let grid = CharacteristicGrid::new(h, 1.0, 2.5)?;
    let sol = solve_leapfrog(&data, &grid, Forcing::None, 1e8)?;
    let i = sol.n_t() - 1;
    let t = sol.t_of(i);
    let mut sup = 0.0f64;
    for m in 0..sol.n_r {
        let exact = homogeneous_solution(&data, t, sol.r_of(m))?;
        sup = sup.max((sol.u_at(i, m) - exact).abs());
    }
    Ok(sup)
}

fn linear_propagation() -> Result<(bool, String), critwave_core::Error> {
    let coarse = linear_error(0.04)?;
    let fine = linear_error(0.02)?;
    let ratio = coarse / fine;
    let pass = fine < 1e-2 && ratio > 3.0;
    Ok((
        pass,
        format!("sup errors {coarse:.3e} → {fine:.3e}, ratio {ratio:.2}"),
    ))
}

fn kernel_values() -> Result<(bool, String), critwave_core::Error> {
    let phi_err = (phi(1.0) - 4.0 * std::f64::consts::PI * 1f64.sinh()).abs();
    let params = TestFunctionParams::new(1)?;
    let mut ts = Vec::new();
    let mut tt = Vec::new();
    for &t in &[2.0, 10.0, 100.0] {
        let s = t / 2.0;
        ts.push((t, s, 0.0));
        ts.push((t, s, 0.5 * (1.0 + s)));
        tt.push((t, 0.5 * (1.0 + t)));
    }
    let report = params.eta_bounds_check(&ts, &tt)?;
    Ok((
        phi_err <= 1e-10 && report.passes(),
        format!(
            "|Φ(1) - 4π sinh 1| = {phi_err:.2e}, ratio window [{:?}, {:?}]",
            report.r1_min, report.r2_max
        ),
    ))
}

fn jensen_margin() -> Result<(bool, String), critwave_core::Error> {
    let spec = ModulusSpec::iterated_log(1)?;
    let data = InitialData::new(Profile::Zero, Profile::Bump { amplitude: 0.5 }, 1.0, 0.6)?;
    let grid = CharacteristicGrid::new(0.04, 2.0, 3.5)?;
    let sol = solve_leapfrog(&data, &grid, Forcing::Critical(&spec), 1e8)?;
    let params = TestFunctionParams::new(1)?.with_quad_tol(1e-10);
    let mut worst = f64::INFINITY;
    let mut violations = 0usize;
    for &t in &[0.6, 1.2, 1.8] {
        let rep = jensen_check(&sol, &params, &spec, t)?;
        worst = worst.min(rep.margin);
        violations += rep.convexity_violations;
    }
    Ok((
        worst >= -1e-10 && violations == 0,
        format!("min margin {worst:.3e}, convexity violations {violations}"),
    ))
}

fn iteration_forms() -> Result<(bool, String), critwave_core::Error> {
    let mut st = iteration::IterationState::initial(1.0)?;
    let mut worst = 0.0f64;
    for _ in 0..10 {
        st = st.advance(1.0, 1.0)?;
        let (a, l, b, sigma) = iteration::closed_forms(st.j);
        worst = worst
            .max((st.a - a).abs() / a)
            .max((st.l - l).abs() / l)
            .max((st.b - b).abs() / b)
            .max((st.sigma - sigma).abs() / sigma);
    }
    let (weighted, plain) = iteration::geometric_sum_limits();
    let lim_err = (weighted - (1.0 + 2f64.sqrt()) / 2.0)
        .abs()
        .max((plain - std::f64::consts::FRAC_1_SQRT_2).abs());
    let tau = iteration::divergence_onset_tau(-5.0, 1.0, 1, 0.5)?;
    let toy_err = (tau - 242.2887).abs();
    Ok((
        worst <= 1e-10 && lim_err <= 1e-10 && toy_err <= 0.1,
        format!("closed-form residual {worst:.2e}, limit residual {lim_err:.2e}, toy onset τ {tau:.4}"),
    ))
}

fn wire_determinism() -> Result<(bool, String), critwave_core::Error> {
    let x = std::f64::consts::PI;
    let round: f64 = format_float(x).parse().unwrap_or(f64::NAN);
    let fnv_ok = fnv1a_64(b"") == 0xcbf2_9ce4_8422_2325
        && fnv1a_64(b"foobar") == 0x8594_4171_f739_67e8;
    let spec = ModulusSpec::iterated_log(2)?;
    let text = serde_json::to_string(&spec).expect("wire form");
    let back: ModulusSpec = serde_json::from_str(&text).expect("wire form");
    Ok((
        round == x && fnv_ok && back == spec,
        format!("float roundtrip {}, fnv {fnv_ok}", round == x),
    ))
}

pub fn run_suite() -> Vec<Check> {
    vec![
        check("exponent_identities", exponent_identities),
        check("classifier_dichotomy", classifier_dichotomy),
        check("linear_propagation", linear_propagation),
        check("kernel_values", kernel_values),
        check("jensen_margin", jensen_margin),
        check("iteration_closed_forms", iteration_forms),
        check("wire_determinism", wire_determinism),
    ]
}
