//! Deterministic artifact serialization: CSV tables with full-precision
//! floats, JSON reports, a provenance hash of the modulus, and atomic file
//! writes.
//!
//! Floats in CSV are printed as `{:.16e}` (17 significant digits), enough to
//! reproduce every bit from the text.  JSON goes through `serde_json`, whose
//! shortest-roundtrip float printing is likewise lossless; non-finite values
//! become `null` there, so reports carrying possibly-infinite quantities also
//! include a finite companion field.

use std::fs;
use std::path::Path;

use serde_json::json;

use crate::functional::FunctionalSample;
use crate::iteration::{BlowupEstimate, OnsetRepresentation};
use crate::modulus::{
    Classification, CStrIndex, CriticalIntegralReport, DecayReport, ModulusSpec, Verdict,
};
use crate::radial_wave::{BlowupEvent, BlowupReason, Scheme, SolutionField};

/// Canonical float for CSV cells.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// FNV-1a, 64-bit.
pub fn fnv1a_64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Hash of the canonical JSON form of a modulus, used in artifact headers so
/// outputs are traceable to the exact nonlinearity they were computed with.
pub fn modulus_hash(spec: &ModulusSpec) -> String {
    let canonical = serde_json::to_string(spec).expect("canonical modulus form is serializable");
    format!("{:016x}", fnv1a_64(canonical.as_bytes()))
}

fn scheme_name(scheme: Scheme) -> &'static str {
    match scheme {
        Scheme::Leapfrog => "leapfrog",
        Scheme::Picard => "picard",
    }
}

/// The full field as `t,r,u` rows with a provenance header.
pub fn solution_csv(sol: &SolutionField, modulus_label: &str) -> String {
    let mut out = String::new();
    out.push_str("# solution field u(t, r)\n");
    out.push_str(&format!("# h = {}\n", format_float(sol.h)));
    out.push_str(&format!("# epsilon = {}\n", format_float(sol.epsilon)));
    out.push_str(&format!("# scheme = {}\n", scheme_name(sol.scheme)));
    out.push_str(&format!("# modulus = {modulus_label}\n"));
    out.push_str("t,r,u\n");
    for i in 0..sol.n_t() {
        for m in 0..sol.n_r {
            out.push_str(&format_float(sol.t_of(i)));
            out.push(',');
            out.push_str(&format_float(sol.r_of(m)));
            out.push(',');
            out.push_str(&format_float(sol.u_at(i, m)));
            out.push('\n');
        }
    }
    out
}

/// Functional time series `t,H,U,W1,residual`; pass NaN for times without a
/// residual evaluation (printed as `nan`, parsed back as NaN).
pub fn functional_csv(rows: &[(FunctionalSample, f64)], modulus_label: &str) -> String {
    let mut out = String::new();
    out.push_str("# weighted functionals over B(1+t)\n");
    out.push_str(&format!("# modulus = {modulus_label}\n"));
    out.push_str("t,H,U,W1,residual\n");
    for (s, residual) in rows {
        for (idx, v) in [s.t, s.h, s.u_script, s.weight_integral, *residual]
            .into_iter()
            .enumerate()
        {
            if idx > 0 {
                out.push(',');
            }
            out.push_str(&format_float(v));
        }
        out.push('\n');
    }
    out
}

/// `{"t_star", "r_star", "peak", "reason"}` with the reason spelled
/// `"threshold"` or `"numerical"`.
pub fn blowup_json(event: &BlowupEvent) -> String {
    let reason = match event.reason {
        BlowupReason::Threshold => "threshold",
        BlowupReason::NonFinite => "numerical",
    };
    json!({
        "t_star": event.t_star,
        "r_star": event.r_star,
        "peak": event.peak,
        "reason": reason,
    })
    .to_string()
}

/// Onset estimate report.  `onset_value` is the time itself for a plain
/// representation and log log t otherwise; `onset_tau` (log^{k+1} scale) is
/// always finite.
pub fn estimate_json(est: &BlowupEstimate) -> String {
    let (repr, value) = match est.representation {
        OnsetRepresentation::Plain => ("plain", est.onset_plain().unwrap_or(f64::NAN)),
        OnsetRepresentation::LogLog => ("loglog", est.onset_loglog),
    };
    json!({
        "k": est.k,
        "constants": {
            "b_k": est.constants.b_k,
            "c_k": est.constants.c_k,
            "l_k": est.constants.l_k,
            "a_k": est.constants.a_k,
            "t_0": est.constants.t_0,
        },
        "c_tilde_inf": est.c_tilde_inf,
        "onset_representation": repr,
        "onset_value": value,
        "onset_tau": est.onset_tau,
    })
    .to_string()
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Holds => "holds",
        Verdict::Fails => "fails",
        Verdict::Inconclusive => "inconclusive",
    }
}

/// Classification report for the critical integral, with the scale-invariant
/// index and optional decay predicates.
pub fn classify_json(
    report: &CriticalIntegralReport,
    c_str: &CStrIndex,
    decay: Option<&DecayReport>,
) -> String {
    let classification = match report.classification {
        Classification::Convergent => "convergent",
        Classification::Divergent => "divergent",
        Classification::Inconclusive => "inconclusive",
    };
    let partials: Vec<_> = report
        .partial_values
        .iter()
        .map(|&(eps, v)| json!({"floor": eps, "value": v}))
        .collect();
    let levels: Vec<_> = report
        .levels
        .iter()
        .map(|l| {
            json!({
                "level": l.level,
                "exponent": l.exponent,
                "decided": l.decided,
            })
        })
        .collect();
    let c_str_value = match c_str {
        CStrIndex::Finite(v) => json!({"kind": "finite", "value": v}),
        CStrIndex::Infinite => json!({"kind": "infinite"}),
        CStrIndex::Inconclusive => json!({"kind": "inconclusive"}),
    };
    let decay_value = match decay {
        None => serde_json::Value::Null,
        Some(d) => json!({
            "two_log": verdict_name(d.two_log),
            "three_log": verdict_name(d.three_log),
        }),
    };
    json!({
        "classification": classification,
        "partial_values": partials,
        "tail_exponent_fit": report.tail_exponent_fit,
        "value_if_convergent": report.value_if_convergent,
        "levels": levels,
        "c_str": c_str_value,
        "decay": decay_value,
    })
    .to_string()
}

/// Writes through a sibling temp file and renames, so a crash never leaves a
/// half-written artifact under the final name.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let mut tmp_name = path
        .file_name()
        .ok_or_else(|| std::io::Error::new(std::io::ErrorKind::InvalidInput, "path has no file name"))?
        .to_os_string();
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    fs::write(&tmp, contents)?;
    match fs::rename(&tmp, path) {
        Ok(()) => Ok(()),
        Err(e) => {
            let _ = fs::remove_file(&tmp);
            Err(e)
        }
    }
}
