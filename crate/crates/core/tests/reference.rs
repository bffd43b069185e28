use splitgauge::reference::*;
use splitgauge::audit::{DecisionRule, Verdict};

#[test]
fn reference_rows_classify_as_published() {
    let rule = DecisionRule::default();
    let verdict = |r: &ReferenceRow| {
        let ratio = r.fid_cross.mean / r.fid_within.mean;
        let z = (r.fid_cross.mean - r.fid_within.mean)
            / (r.fid_within.std.powi(2) + r.fid_cross.std.powi(2)).sqrt();
        rule.decide(ratio, z)
    };
    assert_eq!(verdict(&SVHN), Verdict::Mismatch);
    assert_eq!(verdict(&SVHN_REMIX), Verdict::Match);
    assert_eq!(verdict(&CIFAR10), Verdict::Match);
    assert!((SVHN.fid_cross.mean / SVHN.fid_within.mean - 5.04).abs() < 0.01);
}

#[test]
fn lookup_is_case_insensitive() {
    assert_eq!(lookup("SVHN").unwrap().dataset, "svhn");
    assert!(lookup("mnist").is_none());
}

// Needs Inception pool features of the real SVHN splits, for example:
// SPLITGAUGE_SVHN_TRAIN=train.fm SPLITGAUGE_SVHN_TEST=test.fm \
//     cargo test -p splitgauge --test reference -- --ignored
#[test]
#[ignore = "requires externally computed SVHN Inception features"]
fn svhn_features_land_in_reference_bands() {
    let (Ok(train), Ok(test)) = (std::env::var("SPLITGAUGE_SVHN_TRAIN"), std::env::var("SPLITGAUGE_SVHN_TEST"))
    else {
        panic!("set SPLITGAUGE_SVHN_TRAIN and SPLITGAUGE_SVHN_TEST to feature files");
    };
    let train = splitgauge::ingest::read_features(train).unwrap();
    let test = splitgauge::ingest::read_features(test).unwrap();
    assert_eq!((train.rows(), test.rows()), (SVHN_TRAIN_SIZE, SVHN_TEST_SIZE));
    let report = splitgauge::audit(&train, &test, &splitgauge::AuditConfig::default()).unwrap();
    assert_eq!(report.verdict, Verdict::Mismatch);
    let c = check(&report, &SVHN, 3.0);
    assert!(c.within_in_band && c.cross_in_band, "{report:?}");
}
