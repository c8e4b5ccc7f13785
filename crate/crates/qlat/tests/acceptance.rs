//! End-to-end acceptance battery. Each test prints one summary line
//! (`criterion N: PASS/FAIL - ...`) and asserts the outcome, so the suite
//! doubles as a human-readable report under `--nocapture`.
//!
//! All reference values, trace bounds, and tolerances are pinned inside
//! `qlat::checks`; nothing here is tunable.

use qlat::checks;

fn report(n: usize, out: &checks::CheckOutcome) {
    println!(
        "criterion {n}: {} - {} [{}] ({:.2}s)",
        if out.ok { "PASS" } else { "FAIL" },
        out.name,
        out.detail.trim_end_matches([' ', ';']),
        out.seconds
    );
}

#[test]
fn criterion_1_theta_reference_values() {
    let out = checks::theta_reference(None).expect("battery ran");
    report(1, &out);
    assert!(out.ok, "{}", out.detail);
    assert!(out.seconds < 10.0, "took {:.2}s, budget 10s", out.seconds);
}

#[test]
fn criterion_2_factorization_battery() {
    let out = checks::factorization_battery(None).expect("battery ran");
    report(2, &out);
    // Five of the six cells complete exactly. The sixth (both factors of
    // rank 8, two-variable series, trace bound 6) needs ~2.26e12
    // enumeration steps by the engine's own estimate: the series
    // coefficients of the rank-16 sum grow past 1.3e8 by trace 6 and every
    // lattice vector behind them must be visited. That is hours of CPU,
    // not the 60-second budget, so the engine refuses up front and this
    // test records the refusal as an honest failure rather than loosening
    // the bound. The same identity is verified exactly at trace 3 (about
    // 6e7 steps) as a diagnostic.
    assert!(
        out.detail.contains("A1+A1 d=1") || out.ok,
        "unexpected shape: {}",
        out.detail
    );
    assert!(out.ok, "{}", out.detail);
}

#[test]
fn criterion_3_metaplectic_relations() {
    let out = checks::metaplectic_battery().expect("battery ran");
    report(3, &out);
    assert!(out.ok, "{}", out.detail);
    assert!(out.seconds < 5.0, "took {:.2}s, budget 5s", out.seconds);
}

#[test]
fn criterion_4_genus1_modularity() {
    let out = checks::modularity_battery(None).expect("battery ran");
    report(4, &out);
    assert!(out.ok, "{}", out.detail);
    assert!(out.seconds < 30.0, "took {:.2}s, budget 30s", out.seconds);
}

#[test]
fn criterion_5_genus2_jacobi() {
    let out = checks::jacobi_battery(None).expect("battery ran");
    report(5, &out);
    assert!(out.ok, "{}", out.detail);
    assert!(out.seconds < 60.0, "took {:.2}s, budget 60s", out.seconds);
}

#[test]
fn criterion_6_cycle_algebra() {
    let out = checks::cycles_battery().expect("battery ran");
    report(6, &out);
    assert!(out.ok, "{}", out.detail);
    assert!(out.seconds < 120.0, "took {:.2}s, budget 120s", out.seconds);
}

#[test]
fn criterion_7_embeddings() {
    let out = checks::embeddings_battery().expect("battery ran");
    report(7, &out);
    assert!(out.ok, "{}", out.detail);
    assert!(out.seconds < 30.0, "took {:.2}s, budget 30s", out.seconds);
}

#[test]
fn criterion_8_key_congruences() {
    let out = checks::congruence_property().expect("battery ran");
    report(8, &out);
    assert!(out.ok, "{}", out.detail);
}

#[test]
fn criterion_9_substitution_invariance() {
    let out = checks::gl_invariance_property().expect("battery ran");
    report(9, &out);
    assert!(out.ok, "{}", out.detail);
}
