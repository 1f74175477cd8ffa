//! End-to-end acceptance suite.  Each test covers one numbered criterion and
//! prints a single `criterion NN <name>: PASS/FAIL (<measurements>)` line;
//! all tolerances are pinned inline next to the quantities they bound.

use std::time::Instant;

use critwave_core::functional::{identity_residual, jensen_check};
use critwave_core::iteration::{
    blowup_onset, closed_forms, geometric_partial_sums, geometric_sum_limits, IterationState,
    OnsetConstants, OnsetRepresentation,
};
use critwave_core::modulus::{Classification, ModulusSpec};
use critwave_core::radial_wave::{
    homogeneous_solution, picard_iterate, pointwise_lowerbound_check, solve_leapfrog,
    CharacteristicGrid, Forcing, InitialData, LowerBoundParams, Profile, SolutionField,
};
use critwave_core::testfunc::{phi, TestFunctionParams};
use critwave_core::StraussConstants;

fn report(n: u32, name: &str, pass: bool, detail: &str) {
    println!(
        "criterion {n:02} {name}: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {n} {name}: {detail}");
}

fn mu1() -> ModulusSpec {
    ModulusSpec::iterated_log(1).unwrap()
}

fn bump_velocity(amplitude: f64, epsilon: f64) -> InitialData {
    InitialData::new(Profile::Zero, Profile::Bump { amplitude }, 1.0, epsilon).unwrap()
}

#[test]
fn criterion_01_constants() {
    let c = StraussConstants::new();
    let quad = c.critical_residual().abs();
    let q_conj = (c.q - 1.0 / c.p_conj).abs();
    let ratio = (c.p / c.p_conj - (c.p - 1.0)).abs();
    let worst = quad.max(q_conj).max(ratio);
    report(
        1,
        "constants",
        worst <= 1e-12,
        &format!("p = 1+√2 quadratic {quad:.2e}, q vs 1/p' {q_conj:.2e}, p/p' vs p-1 {ratio:.2e}"),
    );
}

#[test]
fn criterion_02_classifier_dichotomy() {
    let start = Instant::now();
    let p = StraussConstants::new().p;
    let floors = [(-30f64).exp(), (-60f64).exp()];
    let mut dichotomy_ok = true;
    let mut seen = Vec::new();
    for &gamma in &[0.30, 0.40, 0.45, 1.0] {
        let spec = ModulusSpec::power_log(gamma, 1.0).unwrap();
        let rep = spec.critical_integral((-1f64).exp(), &floors).unwrap();
        let expect = if gamma > 1.0 / p {
            Classification::Convergent
        } else {
            Classification::Divergent
        };
        dichotomy_ok &= rep.classification == expect;
        seen.push((gamma, rep.classification));
    }

    let sharp = ModulusSpec::power_log(1.0, 1.0).unwrap();
    let value = sharp
        .critical_integral((-1f64).exp(), &floors)
        .unwrap()
        .value_if_convergent
        .unwrap_or(f64::NAN);
    let closed_err = (value - std::f64::consts::FRAC_1_SQRT_2).abs();

    let mut iterated_ok = true;
    let mut partial_err = f64::NAN;
    for k in 1..=3u32 {
        let spec = ModulusSpec::iterated_log(k).unwrap();
        let lambda0 = (-2f64).exp().min(spec.lambda_max());
        let rep = spec
            .critical_integral(lambda0, &[(-50f64).exp(), (-100f64).exp()])
            .unwrap();
        iterated_ok &= rep.classification == Classification::Divergent;
        if k == 1 {
            partial_err = (rep.partial_values[1].1 - 50f64.ln()).abs();
        }
    }
    let elapsed = start.elapsed();
    let pass = dichotomy_ok
        && closed_err <= 1e-6
        && iterated_ok
        && partial_err <= 1e-6
        && elapsed.as_secs_f64() < 1.0;
    report(
        2,
        "classifier_dichotomy",
        pass,
        &format!(
            "{seen:?}, closed-form gap {closed_err:.2e}, μ₁ partial gap {partial_err:.2e}, {elapsed:?}"
        ),
    );
}

fn linear_sup_error(h: f64) -> f64 {
    let data = bump_velocity(1.0, 1.0);
    let grid = CharacteristicGrid::new(h, 2.0, 3.2).unwrap();
    let sol = solve_leapfrog(&data, &grid, Forcing::None, 1e8).unwrap();
    let stride = (0.04 / h).round() as usize;
    let mut err = 0.0f64;
    for i in (0..sol.n_t()).step_by(stride) {
        let t = sol.t_of(i);
        for m in (0..sol.n_r).step_by(stride) {
            let exact = homogeneous_solution(&data, t, sol.r_of(m)).unwrap();
            err = err.max((sol.u_at(i, m) - exact).abs());
        }
    }
    err
}

fn manufactured_sup_error(h: f64) -> f64 {
    let data = InitialData::new(Profile::Gaussian { decay: 4.0 }, Profile::Zero, 1.0, 1.0).unwrap();
    let source =
        |t: f64, r: f64| (2.0 * t).cos() * (-4.0 * r * r).exp() * (20.0 * r - 64.0 * r * r * r);
    let grid = CharacteristicGrid::new(h, 1.5, 8.0).unwrap();
    let sol = solve_leapfrog(&data, &grid, Forcing::Source(&source), 1e8).unwrap();
    let mut err = 0.0f64;
    for i in 0..sol.n_t() {
        let t = sol.t_of(i);
        for m in 0..sol.n_r {
            let r = sol.r_of(m);
            let exact = (-4.0 * r * r).exp() * (2.0 * t).cos();
            err = err.max((sol.u_at(i, m) - exact).abs());
        }
    }
    err
}

fn pairwise_orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

#[test]
fn criterion_03_linear_solver_order() {
    let start = Instant::now();
    let hs = [0.04, 0.02, 0.01];
    let linear: Vec<f64> = hs.iter().map(|&h| linear_sup_error(h)).collect();
    let mms: Vec<f64> = hs.iter().map(|&h| manufactured_sup_error(h)).collect();
    let lin_orders = pairwise_orders(&linear);
    let mms_orders = pairwise_orders(&mms);
    let in_window = |orders: &[f64]| orders.iter().all(|&o| (1.8..=2.2).contains(&o));
    let elapsed = start.elapsed();
    let pass = in_window(&lin_orders) && in_window(&mms_orders) && elapsed.as_secs_f64() < 30.0;
    report(
        3,
        "linear_solver_order",
        pass,
        &format!("exact-solution orders {lin_orders:?}, manufactured orders {mms_orders:?}, {elapsed:?}"),
    );
}

#[test]
fn criterion_04_picard_cross_validation() {
    let spec = mu1();
    let data = bump_velocity(1.0, 1.0);
    let grid = CharacteristicGrid::new(0.005, 1.0, 2.5).unwrap();
    let leapfrog = solve_leapfrog(&data, &grid, Forcing::Critical(&spec), 1e8).unwrap();
    let picard = picard_iterate(&data, &spec, &grid, 6, 1e8).unwrap();
    let mut sup = 0.0f64;
    for i in 0..leapfrog.n_t().min(picard.n_t()) {
        for m in 0..leapfrog.n_r.min(picard.n_r) {
            sup = sup.max((leapfrog.u_at(i, m) - picard.u_at(i, m)).abs());
        }
    }
    report(
        4,
        "picard_cross_validation",
        sup <= 1e-3,
        &format!("sup gap {sup:.3e} on [0,1] at h = 0.005"),
    );
}

#[test]
fn criterion_05_blowup_demonstration() {
    let spec = mu1();
    let grid = CharacteristicGrid::new(0.02, 4.0, 5.5).unwrap();
    let run = |eps: f64| {
        let data = InitialData::new(Profile::Zero, Profile::Bump { amplitude: 2.0 }, 1.0, eps)
            .unwrap();
        solve_leapfrog(&data, &grid, Forcing::Critical(&spec), 1e8).unwrap()
    };
    let five = run(5.0);
    let ten = run(10.0);
    let t5 = five.blowup.map(|e| e.t_star);
    let t10 = ten.blowup.map(|e| e.t_star);
    let pass = match (t5, t10) {
        (Some(a), Some(b)) => a.is_finite() && b.is_finite() && b < a,
        _ => false,
    };
    report(
        5,
        "blowup_demonstration",
        pass,
        &format!("t*(ε=5) = {t5:?}, t*(ε=10) = {t10:?}"),
    );
}

#[test]
fn criterion_06_test_function_kernel() {
    let phi_err = (phi(1.0) - 4.0 * std::f64::consts::PI * 1f64.sinh()).abs();

    let params = TestFunctionParams::new(1).unwrap();
    let mut oracle_points = 0usize;
    let mut oracle_worst = 0.0f64;
    for &t in &[1.0, 2.5, 5.0, 10.0] {
        for &s in &[0.0, t / 2.0] {
            for &frac in &[0.0, 0.45, 0.9] {
                let x = frac * (1.0 + s);
                let fast = params.eta(t, s, x).unwrap();
                let slow = params.eta_trapezoid(t, s, x, 500_000);
                oracle_worst = oracle_worst.max((fast - slow).abs() / slow.abs());
                oracle_points += 1;
            }
        }
    }

    let mut ratios_ok = true;
    let mut windows = Vec::new();
    for k in 1..=2u32 {
        let params = TestFunctionParams::new(k).unwrap();
        let mut ts = Vec::new();
        let mut tt = Vec::new();
        for i in 0..25 {
            let t = 2.0 * (1000f64 / 2.0).powf(i as f64 / 24.0);
            ts.push((t, t / 4.0, 0.0));
            ts.push((t, t / 2.0, 0.5 * (1.0 + t / 2.0)));
            tt.push((t, 0.3 * (1.0 + t)));
            tt.push((t, 0.8 * (1.0 + t)));
            tt.push((t, 1.0 + t));
            tt.push((t, 0.0));
            ts.push((t, 0.9 * t, 0.25 * (1.0 + 0.9 * t)));
            ts.push((t, 0.1 * t, 0.7 * (1.0 + 0.1 * t)));
        }
        assert_eq!(ts.len() + tt.len(), 200);
        let rep = params.eta_bounds_check(&ts, &tt).unwrap();
        ratios_ok &= rep.passes();
        windows.push((k, rep.r1_min, rep.r2_min, rep.r2_max));
    }

    let pass = phi_err <= 1e-10 && oracle_points >= 20 && oracle_worst <= 1e-6 && ratios_ok;
    report(
        6,
        "test_function_kernel",
        pass,
        &format!(
            "|Φ(1)-4π sinh 1| = {phi_err:.2e}, oracle gap {oracle_worst:.2e} over {oracle_points} points, ratio windows {windows:?}"
        ),
    );
}

fn identity_residuals(forcing_critical: bool) -> Vec<(f64, f64)> {
    let spec = mu1();
    let params = TestFunctionParams::new(1).unwrap().with_quad_tol(1e-10);
    let data = if forcing_critical {
        bump_velocity(0.5, 4.0)
    } else {
        bump_velocity(1.0, 1.0)
    };
    [0.04, 0.02, 0.01]
        .iter()
        .map(|&h| {
            let grid = CharacteristicGrid::new(h, 2.0, 3.5).unwrap();
            let forcing = if forcing_critical {
                Forcing::Critical(&spec)
            } else {
                Forcing::None
            };
            let sol = solve_leapfrog(&data, &grid, forcing, 1e8).unwrap();
            let res = identity_residual(&sol, &params, &spec, &data, 1.6).unwrap();
            (res.residual.abs(), (res.residual / res.lhs).abs())
        })
        .collect()
}

#[test]
fn criterion_07_integral_identity_refinement() {
    let linear = identity_residuals(false);
    let nonlinear = identity_residuals(true);
    let orders = |rows: &[(f64, f64)]| -> Vec<f64> {
        rows.windows(2).map(|w| (w[0].0 / w[1].0).log2()).collect()
    };
    let lin_orders = orders(&linear);
    let nl_orders = orders(&nonlinear);
    let order_ok =
        lin_orders.iter().chain(&nl_orders).all(|&o| o >= 1.8);
    let rel_default = linear.last().unwrap().1.max(nonlinear.last().unwrap().1);
    let pass = order_ok && rel_default < 1e-2;
    report(
        7,
        "integral_identity_refinement",
        pass,
        &format!(
            "linear orders {lin_orders:?}, nonlinear orders {nl_orders:?}, relative residual {rel_default:.2e} at h = 0.01"
        ),
    );
}

#[test]
fn criterion_08_jensen_margin() {
    let spec = mu1();
    let params = TestFunctionParams::new(1).unwrap().with_quad_tol(1e-11);

    let data = bump_velocity(0.5, 0.6);
    let grid = CharacteristicGrid::new(0.04, 3.0, 4.5).unwrap();
    let sol = solve_leapfrog(&data, &grid, Forcing::Critical(&spec), 1e8).unwrap();
    assert!(sol.sup_u() < 0.5, "amplitude must stay below the modulus clamp");
    let mut run_worst = f64::INFINITY;
    let mut violations = 0usize;
    for &t in &[0.4, 1.0, 1.6, 2.2, 2.8] {
        let rep = jensen_check(&sol, &params, &spec, t).unwrap();
        run_worst = run_worst.min(rep.margin);
        violations += rep.convexity_violations;
    }

    let constant = SolutionField::uniform(0.1, 0.05, 2.0, 4.0).unwrap();
    let mut const_worst = 0.0f64;
    for &t in &[0.5, 1.25, 2.0] {
        let rep = jensen_check(&constant, &params, &spec, t).unwrap();
        const_worst = const_worst.max(rep.margin.abs());
        violations += rep.convexity_violations;
    }

    let pass = run_worst >= -1e-10 && const_worst <= 1e-13 && violations == 0;
    report(
        8,
        "jensen_margin",
        pass,
        &format!(
            "run margin ≥ {run_worst:.3e}, constant-field |margin| ≤ {const_worst:.3e} (roundoff-exact zero), violations {violations}"
        ),
    );
}

#[test]
fn criterion_09_iteration_engine() {
    let mut st = IterationState::initial(1.0).unwrap();
    let mut recursion_worst = 0.0f64;
    for _ in 0..30 {
        st = st.advance(1.0, 1.0).unwrap();
        let (a, l, b, sigma) = closed_forms(st.j);
        recursion_worst = recursion_worst
            .max((st.a - a).abs() / a)
            .max((st.l - l).abs() / l)
            .max((st.b - b).abs() / b)
            .max((st.sigma - sigma).abs() / sigma);
    }

    let (weighted, plain) = geometric_sum_limits();
    let limit_err = (weighted - (1.0 + 2f64.sqrt()) / 2.0)
        .abs()
        .max((plain - std::f64::consts::FRAC_1_SQRT_2).abs());
    let (pw, pp) = geometric_partial_sums(60);
    let partial_err = (pw - weighted).abs().max((pp - plain).abs());

    let p = StraussConstants::new().p;
    let spec = mu1();
    // B chosen so the limiting prefactor is exactly -5 with C = 8/3, L = A = 1.
    let b = (-5.0 + (4.0 * p).ln() * (1.0 + 2f64.sqrt()) / 2.0).exp();
    let constants = OnsetConstants {
        b_k: b,
        c_k: 8.0 / 3.0,
        l_k: 1.0,
        a_k: 1.0,
        t_0: 10.0,
    };
    let est = blowup_onset(&constants, &spec).unwrap();
    let toy_target = (5.0 + std::f64::consts::LN_2 / 2f64.sqrt()).exp();
    let toy_err = (est.onset_loglog - 242.3).abs();
    let toy_exact_gap = (est.onset_loglog - toy_target).abs() / toy_target;
    let loglog_repr = est.representation == OnsetRepresentation::LogLog;
    let prefactor_err = (est.c_tilde_inf + 5.0).abs();

    let base = OnsetConstants {
        b_k: 0.05,
        c_k: 1.0,
        l_k: 1.0,
        a_k: 1.0,
        t_0: 10.0,
    };
    let tau_of = |c: &OnsetConstants| blowup_onset(c, &spec).unwrap().onset_tau;
    let tau0 = tau_of(&base);
    let monotone = tau_of(&OnsetConstants { b_k: 0.06, ..base }) < tau0
        && tau_of(&OnsetConstants { c_k: 1.2, ..base }) < tau0
        && tau_of(&OnsetConstants { a_k: 1.2, ..base }) < tau0
        && tau_of(&OnsetConstants { l_k: 1.2, ..base }) > tau0;

    let pass = recursion_worst <= 1e-10
        && limit_err <= 1e-10
        && partial_err <= 1e-10
        && loglog_repr
        && toy_err <= 0.1
        && toy_exact_gap <= 1e-6
        && prefactor_err <= 1e-9
        && monotone;
    report(
        9,
        "iteration_engine",
        pass,
        &format!(
            "recursion gap {recursion_worst:.2e} (j ≤ 30), limit gaps {limit_err:.2e}/{partial_err:.2e}, toy log log t = {:.4} (target 242.3), monotone {monotone}",
            est.onset_loglog
        ),
    );
}

#[test]
fn criterion_10_pointwise_lower_bound() {
    let spec = mu1();
    let fit = |h: f64| {
        let data =
            InitialData::new(Profile::Zero, Profile::Bump { amplitude: 2.0 }, 1.0, 5.0).unwrap();
        let grid = CharacteristicGrid::new(h, 2.0, 3.5).unwrap();
        let sol = solve_leapfrog(&data, &grid, Forcing::Critical(&spec), 1e8).unwrap();
        pointwise_lowerbound_check(&sol, &spec, &LowerBoundParams::default()).unwrap()
    };
    let coarse = fit(0.1);
    let fine = fit(0.05);
    let pass = match (coarse.c_shallow, fine.c_shallow) {
        (Some(a), Some(b)) => {
            let ratio = a / b;
            a > 0.0
                && b > 0.0
                && (0.5..=2.0).contains(&ratio)
                && coarse.violations == 0
                && fine.violations == 0
        }
        _ => false,
    };
    report(
        10,
        "pointwise_lower_bound",
        pass,
        &format!(
            "near-cone C: {:?} (h = 0.1) vs {:?} (h = 0.05)",
            coarse.c_shallow, fine.c_shallow
        ),
    );
}

#[test]
fn criterion_11_cli_determinism() {
    let configs = [
        r#"{"command":"classify","modulus":{"family":"iterated_log","k":1}}"#,
        r#"{"command":"functional","modulus":{"family":"iterated_log","k":1},
            "grid":{"h":0.05,"t_max":3.0}}"#,
        r#"{"command":"solve","modulus":{"family":"iterated_log","k":1},
            "data":{"u1":{"profile":"bump","amplitude":2.0},"epsilon":5.0},
            "grid":{"h":0.02,"t_max":4.0}}"#,
    ];
    let mut compared = 0usize;
    let mut identical = true;
    for text in configs {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("config.json");
        std::fs::write(&cfg, text).unwrap();
        let mut outputs = Vec::new();
        for run in 0..2 {
            let out = dir.path().join(format!("out{run}"));
            let status = std::process::Command::new(env!("CARGO_BIN_EXE_critwave"))
                .arg("--config")
                .arg(&cfg)
                .arg("--output")
                .arg(&out)
                .arg("--threads")
                .arg("1")
                .status()
                .unwrap();
            assert_eq!(status.code(), Some(0));
            let mut files: Vec<_> = std::fs::read_dir(&out)
                .unwrap()
                .map(|e| e.unwrap().path())
                .collect();
            files.sort();
            outputs.push(
                files
                    .into_iter()
                    .map(|p| {
                        (
                            p.file_name().unwrap().to_owned(),
                            std::fs::read(&p).unwrap(),
                        )
                    })
                    .collect::<Vec<_>>(),
            );
        }
        compared += outputs[0].len();
        identical &= outputs[0] == outputs[1];
    }
    report(
        11,
        "cli_determinism",
        identical && compared >= 5,
        &format!("{compared} artifacts byte-compared across repeated runs"),
    );
}
