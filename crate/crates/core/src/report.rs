//! JSON report envelope shared by every CLI command, and the SVG chart for
//! audit reports.

use serde::{Deserialize, Serialize};

use crate::audit::AuditReport;
use crate::density::BpdResult;
use crate::metrics::{FoldedIs, IsResult};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// `f64` fields that may legitimately be infinite are written as the strings
/// `"inf"`, `"-inf"` or `"nan"`; JSON has no literal for them.
pub mod float {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("invalid float `{other}`"))),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timestamps {
    pub started: String,
    pub finished: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemixSummary {
    pub seed: u64,
    pub new_train: usize,
    pub new_test: usize,
    pub moved_to_train: usize,
    pub moved_to_test: usize,
    pub train_class_counts: Vec<usize>,
    pub test_class_counts: Vec<usize>,
    pub plan_path: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbedSummary {
    pub rows: usize,
    pub dim: usize,
    pub embedder_id: String,
    pub output: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensitySummary {
    pub components: usize,
    pub dim: usize,
    pub iterations: usize,
    pub converged: bool,
    pub final_mean_log_likelihood: f64,
    pub model_path: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSummary {
    pub mode: String,
    pub strength: f64,
    pub train_rows: usize,
    pub test_rows: usize,
    pub train_component_counts: Vec<usize>,
    pub test_component_counts: Vec<usize>,
    pub outputs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BpdPair {
    pub train: BpdResult,
    pub test: Option<BpdResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "data", rename_all = "snake_case")]
pub enum Payload {
    Audit(AuditReport),
    InceptionScore(IsResult),
    InceptionScoreFolds(FoldedIs),
    Remix(RemixSummary),
    Bpd(BpdPair),
    Embed(EmbedSummary),
    FitDensity(DensitySummary),
    Synth(SynthSummary),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEnvelope {
    pub schema_version: u32,
    pub tool_version: String,
    pub command: String,
    pub config: serde_json::Value,
    pub timestamps: Timestamps,
    pub payload: Payload,
}

impl ReportEnvelope {
    pub fn new(command: &str, config: serde_json::Value, started: String, payload: Payload) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool_version: TOOL_VERSION.to_string(),
            command: command.to_string(),
            config,
            timestamps: Timestamps {
                started,
                finished: now(),
            },
            payload,
        }
    }
}

pub fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

/// Grouped bar chart: within vs cross FID for each seed.
pub fn audit_svg(report: &AuditReport) -> String {
    const W: f64 = 640.0;
    const H: f64 = 360.0;
    const PAD: f64 = 48.0;
    let rows = &report.per_seed;
    let top = rows
        .iter()
        .flat_map(|r| [r.fid_within, r.fid_cross])
        .filter(|v| v.is_finite())
        .fold(0.0f64, f64::max)
        .max(1e-12)
        * 1.1;
    let group = (W - 2.0 * PAD) / rows.len().max(1) as f64;
    let bar = group * 0.35;
    let y = |v: f64| H - PAD - (v / top) * (H - 2.0 * PAD);
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    );
    s.push_str(&format!(
        "<text x=\"{}\" y=\"20\" text-anchor=\"middle\">FID per seed (verdict: {:?}, ratio {:.3})</text>\n",
        W / 2.0,
        report.verdict,
        report.gap_ratio
    ));
    s.push_str(&format!(
        "<line x1=\"{PAD}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"black\"/>\n",
        H - PAD,
        W - PAD
    ));
    s.push_str(&format!(
        "<line x1=\"{PAD}\" y1=\"{PAD}\" x2=\"{PAD}\" y2=\"{}\" stroke=\"black\"/>\n",
        H - PAD
    ));
    for (i, r) in rows.iter().enumerate() {
        let x0 = PAD + i as f64 * group + group * 0.15;
        for (j, (v, color)) in [(r.fid_within, "#4c72b0"), (r.fid_cross, "#c44e52")].into_iter().enumerate() {
            let v = if v.is_finite() { v } else { top };
            let x = x0 + j as f64 * bar;
            s.push_str(&format!(
                "<rect x=\"{x:.2}\" y=\"{:.2}\" width=\"{bar:.2}\" height=\"{:.2}\" fill=\"{color}\"/>\n",
                y(v),
                H - PAD - y(v)
            ));
        }
        s.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
            x0 + bar,
            H - PAD + 16.0,
            r.seed
        ));
    }
    s.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" fill=\"#4c72b0\">within</text><text x=\"{}\" y=\"{}\" fill=\"#c44e52\">cross</text>\n",
        W - PAD - 90.0,
        PAD,
        W - PAD - 40.0,
        PAD
    ));
    s.push_str(&format!("<text x=\"8\" y=\"{PAD}\">{top:.3}</text>\n"));
    s.push_str("</svg>\n");
    s
}
