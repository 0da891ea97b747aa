//! The library against brute-force reference semantics on random systems.

use vtsynth_oracle::suite::theorem_suite;

#[test]
fn random_systems_agree_with_the_reference_semantics() {
    let report = theorem_suite(60, 0x5eed);
    assert!(report.passed(), "{:#?}", &report.failures[..report.failures.len().min(5)]);
    for name in ["tracking", "projection", "delay", "loss", "determinize", "minimize"] {
        assert!(report.checks[name] >= 60, "{name}");
    }
}
