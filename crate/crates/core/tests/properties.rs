use critwave_core::constants::StraussConstants;
use critwave_core::modulus::{Family, ModulusSpec};
use proptest::prelude::*;

fn analytic_spec() -> impl Strategy<Value = ModulusSpec> {
    prop_oneof![
        (0.1f64..3.0, 0.2f64..5.0).prop_map(|(g, c)| ModulusSpec::power_log(g, c).unwrap()),
        (1u32..=3u32).prop_map(|k| ModulusSpec::iterated_log(k).unwrap()),
        proptest::collection::vec(0.1f64..1.2, 1..=3)
            .prop_map(|e| ModulusSpec::log_product(e).unwrap()),
    ]
}

fn custom_spec() -> impl Strategy<Value = ModulusSpec> {
    proptest::collection::vec((0.01f64..1.0, 0.0f64..0.5), 2..=5).prop_map(|pairs| {
        let total: f64 = pairs.iter().map(|(gap, _)| gap).sum();
        let mut acc = 0.0;
        let mut mu = 0.01;
        let mut table = Vec::with_capacity(pairs.len());
        for (gap, rise) in &pairs {
            acc += gap;
            mu += rise;
            table.push((0.9 * acc / total, mu));
        }
        ModulusSpec::custom(table).unwrap()
    })
}

fn any_spec() -> impl Strategy<Value = ModulusSpec> {
    prop_oneof![3 => analytic_spec(), 1 => custom_spec()]
}

fn sample_floor(spec: &ModulusSpec) -> f64 {
    match spec.family() {
        Family::Custom { table } => table[0].0,
        _ => spec.lambda_max() * (-250f64).exp(),
    }
}

proptest! {
    #[test]
    fn modulus_is_nondecreasing(spec in any_spec(), x in 0.0f64..1.0, y in 0.0f64..1.0) {
        let floor = sample_floor(&spec);
        let top = spec.lambda_max();
        let at = |t: f64| floor * (top / floor).powf(t);
        let (lo, hi) = if x <= y { (at(x), at(y)) } else { (at(y), at(x)) };
        let mu_lo = spec.mu_eval(lo).unwrap();
        let mu_hi = spec.mu_eval(hi).unwrap();
        prop_assert!(mu_lo <= mu_hi * (1.0 + 1e-9), "μ({lo:e}) = {mu_lo:e} > μ({hi:e}) = {mu_hi:e}");
        prop_assert!(mu_lo > 0.0);
    }

    #[test]
    fn clamp_extension_is_constant_above_domain(spec in any_spec(), t in 0.0f64..1.0) {
        let top = spec.lambda_max();
        let above = top + t * (0.999 - top);
        let at_top = spec.mu_eval(top).unwrap();
        let clamped = spec.mu_eval(above).unwrap();
        prop_assert_eq!(clamped, at_top);
    }

    #[test]
    fn iterated_log_is_the_uniform_log_product(k in 1u32..=3, x in 0.0f64..200.0) {
        let p = StraussConstants::new().p;
        let iterated = ModulusSpec::iterated_log(k).unwrap();
        let product = ModulusSpec::log_product(vec![1.0 / p; k as usize]).unwrap();
        prop_assert_eq!(iterated.lambda_max(), product.lambda_max());
        let lambda = iterated.lambda_max() * (-x).exp();
        let a = iterated.mu_eval(lambda).unwrap();
        let b = product.mu_eval(lambda).unwrap();
        prop_assert!((a - b).abs() <= 1e-11 * a.abs(), "{a:e} vs {b:e} at λ = {lambda:e}");
    }

    #[test]
    fn wire_form_round_trips(spec in any_spec()) {
        let text = serde_json::to_string(&spec).unwrap();
        let back: ModulusSpec = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(&back, &spec);
        let again = serde_json::to_string(&back).unwrap();
        prop_assert_eq!(again, text);
    }
}
