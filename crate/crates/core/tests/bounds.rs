//! Survey counts can never exceed the closed-form ceiling, whatever the
//! channel; GHZ channels attain it in the three-party single-qubit cases.

use qis::channels;
use qis::counting::{max_protocols, CountQuery};
use qis::feasibility::{audit_security, survey, SearchConfig, VerdictStatus};
use qis::protocol::classical_cost;

#[test]
fn survey_counts_never_exceed_the_formula() {
    let config = SearchConfig::default();
    let mut cases = Vec::new();
    for n in 3..=6usize {
        cases.push((channels::ghz(n).unwrap(), 1usize, 3usize));
    }
    cases.push((channels::ghz(5).unwrap(), 2, 3));
    cases.push((channels::ghz(6).unwrap(), 2, 3));
    cases.push((channels::ghz(5).unwrap(), 1, 4));
    cases.push((channels::ghz(6).unwrap(), 1, 4));
    cases.push((channels::cluster4(), 1, 3));
    cases.push((channels::cluster4(), 2, 3));

    for (channel, secret, parties) in cases {
        let report = survey(&channel, secret, parties, &config).unwrap();
        let bound = max_protocols(&CountQuery::new(channel.num_qubits, secret, parties).unwrap());
        assert_eq!(report.bound, bound);
        assert!(
            (report.feasible_count as u64) <= bound,
            "{} n={secret} k={parties}: {} > {bound}",
            channel.name,
            report.feasible_count,
        );
    }
}

#[test]
fn ghz6_four_parties_attains_the_bound() {
    let channel = channels::ghz(6).unwrap();
    let report = survey(&channel, 1, 4, &SearchConfig::default()).unwrap();
    assert_eq!(report.bound, 6);
    assert_eq!(report.feasible_count, 6);
}

/// Any protocol the search certifies must broadcast at least 2n bits from
/// the dealer, and must pass the secret-independence and completeness
/// audits.
#[test]
fn feasible_protocols_cost_enough_and_audit_clean() {
    let config = SearchConfig::default();
    let mut feasible = 0usize;
    for (channel, secret, parties) in [
        (channels::ghz(3).unwrap(), 1usize, 3usize),
        (channels::ghz(4).unwrap(), 1, 3),
        (channels::ghz(5).unwrap(), 1, 3),
        (channels::ghz(5).unwrap(), 1, 4),
    ] {
        let report = survey(&channel, secret, parties, &config).unwrap();
        for verdict in &report.verdicts {
            let VerdictStatus::Feasible(spec) = &verdict.status else {
                continue;
            };
            feasible += 1;
            let cost = classical_cost(spec);
            assert!(
                cost.dealer_bits() >= 2 * secret,
                "{} sizes {:?}: dealer announces {} bits",
                channel.name,
                verdict.assignment.sizes(),
                cost.dealer_bits()
            );
            let audit = audit_security(&channel, spec).unwrap();
            assert!(audit.independence_ok(), "{}: {audit:?}", channel.name);
            assert!(audit.completeness_ok(), "{}: {audit:?}", channel.name);
        }
    }
    assert!(feasible >= 8, "sweep found only {feasible} protocols");
}
