use splitgauge::report::*;
use splitgauge::audit::AuditReport;
use splitgauge::audit::{AuditConfig, SeedRow};

fn report() -> AuditReport {
    AuditReport::from_rows(
        vec![
            SeedRow { seed: 1, fid_within: 0.0, fid_cross: 0.5 },
            SeedRow { seed: 2, fid_within: 0.0, fid_cross: 0.7 },
        ],
        AuditConfig::default(),
    )
    .unwrap()
}

#[test]
fn infinite_ratio_round_trips() {
    let r = report();
    assert!(r.gap_ratio.is_infinite());
    let env = ReportEnvelope::new("audit", serde_json::json!({}), now(), Payload::Audit(r));
    let text = serde_json::to_string(&env).unwrap();
    assert!(text.contains("\"gap_ratio\":\"inf\""));
    let back: ReportEnvelope = serde_json::from_str(&text).unwrap();
    assert_eq!(back, env);
}

#[test]
fn svg_has_one_pair_of_bars_per_seed() {
    let svg = audit_svg(&report());
    assert_eq!(svg.matches("<rect").count(), 4);
    assert!(svg.starts_with("<svg"));
}
