use floquet_core::FloquetError;
use serde_json::{json, Value};

pub const EXIT_INVALID: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

/// Failure of a run, carrying the exit status and a JSON diagnostic.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub diagnostic: Value,
}

impl Failure {
    pub fn invalid(kind: &str, message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INVALID,
            diagnostic: json!({ "status": "invalid", "kind": kind, "message": message.into() }),
        }
    }

    pub fn io(path: &str, err: std::io::Error) -> Self {
        let mut f = Failure::invalid("Io", err.to_string());
        f.diagnostic["file"] = json!(path);
        f
    }
}

fn kind(e: &FloquetError) -> &'static str {
    use FloquetError::*;
    match e {
        InvalidCoefficients(_) => "InvalidCoefficients",
        Parse { .. } => "Parse",
        UnresolvableSign { .. } => "UnresolvableSign",
        IntegratorFailure { .. } => "IntegratorFailure",
        BoxCountUnstable { .. } => "BoxCountUnstable",
        MaxRootsExceeded { .. } => "MaxRootsExceeded",
        SeedExhaustion { .. } => "SeedExhaustion",
        NotSpectral { .. } => "NotSpectral",
        NearCritical { .. } => "NearCritical",
        CurveMissing { .. } => "CurveMissing",
        ResolventPole { .. } => "ResolventPole",
        DegenerateEigenvector { .. } => "DegenerateEigenvector",
        InvalidInput(_) => "InvalidInput",
    }
}

/// Problems with the input data map to exit 2, everything the engine could
/// not compute to exit 3.
fn is_validation(e: &FloquetError) -> bool {
    matches!(
        e,
        FloquetError::InvalidCoefficients(_)
            | FloquetError::Parse { .. }
            | FloquetError::UnresolvableSign { .. }
            | FloquetError::InvalidInput(_)
    )
}

impl From<FloquetError> for Failure {
    fn from(e: FloquetError) -> Self {
        let validation = is_validation(&e);
        let mut d = json!({
            "status": if validation { "invalid" } else { "numerical_failure" },
            "kind": kind(&e),
            "message": e.to_string(),
        });
        match &e {
            FloquetError::Parse { path, .. } => d["path"] = json!(path),
            FloquetError::InvalidCoefficients(report) => d["violations"] = json!(report.violations),
            FloquetError::UnresolvableSign { segment } => d["segment"] = json!(segment),
            FloquetError::BoxCountUnstable { bbox } => d["box"] = json!(bbox),
            FloquetError::SeedExhaustion { uncovered } => d["uncovered"] = json!(uncovered),
            FloquetError::CurveMissing { lambda0 } => d["lambda0"] = json!(lambda0),
            FloquetError::DegenerateEigenvector { lambda } => d["lambda"] = json!(lambda),
            _ => {}
        }
        Failure {
            code: if validation { EXIT_INVALID } else { EXIT_NUMERICAL },
            diagnostic: d,
        }
    }
}
