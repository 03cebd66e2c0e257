//! Machine-readable outputs: count report, run manifest and the error
//! envelope. Field order is fixed so identical runs serialize identically.

use bmc_core::classification::EvalReport;
use bmc_core::imgcore::Roi;
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct CountReport {
    pub classes: Vec<String>,
    pub total: usize,
    pub per_class: Vec<usize>,
    pub cells: Vec<CellRecord>,
    pub skipped: Vec<SkipRecord>,
}

#[derive(Debug, Serialize)]
pub struct CellRecord {
    pub id: usize,
    pub roi: Roi,
    pub label: String,
    pub votes: Vec<usize>,
    pub quality_flagged: bool,
}

#[derive(Debug, Serialize)]
pub struct SkipRecord {
    pub roi: Roi,
    pub reason: String,
}

/// Every tunable that affects output, plus input digests. Stage timings are
/// only present when explicitly requested so default outputs stay
/// byte-reproducible.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    pub parameters: Vec<(String, String)>,
    pub inputs: Vec<(String, String)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<Vec<(String, u128)>>,
}

impl RunManifest {
    pub fn new(command: &str) -> RunManifest {
        RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            parameters: Vec::new(),
            inputs: Vec::new(),
            timings_ms: None,
        }
    }
}

/// Previously published reference results (proprietary clinical dataset);
/// attached to evaluation reports for context only.
#[derive(Debug, Serialize)]
pub struct PublishedReference {
    pub note: &'static str,
    pub classes: [&'static str; 5],
    pub per_class_recall: [f64; 5],
    pub arr: f64,
}

pub fn published_reference() -> PublishedReference {
    PublishedReference {
        note: "previously published results on a proprietary clinical dataset; \
               not comparable with synthetic benchmarks",
        classes: ["NSTG", "NSBG", "MBE", "MLS", "OCS"],
        per_class_recall: [0.8743, 0.8706, 0.8124, 0.8252, 0.9922],
        arr: 0.8749,
    }
}

#[derive(Debug, Serialize)]
pub struct EvalOutput {
    #[serde(flatten)]
    pub report: EvalReport,
    pub published_reference: PublishedReference,
}

#[derive(Debug, Serialize)]
pub struct ErrorEnvelope {
    pub error: ErrorBody,
}

#[derive(Debug, Serialize)]
pub struct ErrorBody {
    pub kind: String,
    pub message: String,
}

pub fn error_envelope(kind: &str, message: &str) -> String {
    let env = ErrorEnvelope {
        error: ErrorBody {
            kind: kind.to_string(),
            message: message.to_string(),
        },
    };
    serde_json::to_string(&env).expect("error envelope serializes")
}
