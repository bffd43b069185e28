use splitgauge::audit::*;
use splitgauge::embed::FeatureMatrix;
use splitgauge::Error;

#[test]
fn minimal_capacity() {
    let t = sample_subsets(2, 1, 1, 0).unwrap();
    assert_eq!(t.train_prime.len(), 1);
    assert_eq!(t.train_double_prime.len(), 1);
    assert_ne!(t.train_prime, t.train_double_prime);
    assert_eq!(t.test_prime, vec![0]);
}

#[test]
fn capacity_errors_name_split() {
    assert!(matches!(
        sample_subsets(3, 10, 2, 0),
        Err(Error::Capacity { split: "train", .. })
    ));
    assert!(matches!(
        sample_subsets(10, 1, 2, 0),
        Err(Error::Capacity { split: "test", .. })
    ));
}

#[test]
fn deterministic_and_disjoint() {
    let a = sample_subsets(1000, 300, 200, 17).unwrap();
    assert_eq!(a, sample_subsets(1000, 300, 200, 17).unwrap());
    assert_ne!(a, sample_subsets(1000, 300, 200, 18).unwrap());
    let mut all: Vec<usize> = a.train_prime.iter().chain(&a.train_double_prime).copied().collect();
    all.sort_unstable();
    all.dedup();
    assert_eq!(all.len(), 400);
    assert!(a.test_prime.iter().all(|&i| i < 300));
}

#[test]
fn decision_rule_regions() {
    let r = DecisionRule::default();
    // published SVHN-like and CIFAR-like aggregates
    assert_eq!(r.decide(16.687 / 3.309, (16.687 - 3.309) / (0.029f64.powi(2) + 0.325f64.powi(2)).sqrt()), Verdict::Mismatch);
    assert_eq!(r.decide(5.206 / 5.196, (5.206 - 5.196) / (0.04f64.powi(2) + 0.031f64.powi(2)).sqrt()), Verdict::Match);
    assert_eq!(r.decide(1.3, 1.0), Verdict::Inconclusive);
    assert_eq!(r.decide(2.0, 1.0), Verdict::Inconclusive);
}

#[test]
fn aggregation_recomputes_exactly() {
    let rows = vec![
        SeedRow { seed: 1, fid_within: 1.0, fid_cross: 2.0 },
        SeedRow { seed: 2, fid_within: 3.0, fid_cross: 2.0 },
    ];
    let r = AuditReport::from_rows(rows, AuditConfig::default()).unwrap();
    assert_eq!(r.within_mean, 2.0);
    assert_eq!(r.within_std, 2.0f64.sqrt());
    assert_eq!(r.cross_std, 0.0);
    assert_eq!(r.gap_ratio, 1.0);
    assert_eq!(r.z_gap, 0.0);
}

#[test]
fn degenerate_ratios() {
    assert_eq!(gap_ratio(0.0, 0.0), 1.0);
    assert_eq!(gap_ratio(0.0, 1.0), f64::INFINITY);
    assert_eq!(z_gap(1.0, 0.0, 2.0, 0.0), f64::INFINITY);
}

#[test]
fn rejects_duplicate_and_single_seeds() {
    let f = FeatureMatrix::from_rows(&vec![vec![0.0]; 10]).unwrap();
    let mut cfg = AuditConfig { m: 2, seeds: vec![1, 1], ..Default::default() };
    assert!(audit(&f, &f, &cfg).is_err());
    cfg.seeds = vec![1];
    assert!(audit(&f, &f, &cfg).is_err());
}
