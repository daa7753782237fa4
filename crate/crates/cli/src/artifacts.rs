//! Payloads of the files the CLI writes.

use serde::{Deserialize, Serialize};
use sphereforge::design::{DesignSolveReport, WeightOutcome};
use sphereforge::mixture::InstanceChecks;
use sphereforge::sq::{DistinguisherReport, PowerRow};
use sphereforge::{MixtureInstance, WeightedDesign};

pub const DESIGN: &str = "design";
pub const WEIGHT_SOLUTION: &str = "weight-solution";
pub const INSTANCE: &str = "instance";
pub const SQ_REPORT: &str = "sq-report";
pub const POWER: &str = "power";
pub const VERIFY_REPORT: &str = "verify-report";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DesignFile {
    #[serde(flatten)]
    pub design: WeightedDesign,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solve: Option<DesignSolveReport>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightSolutionFile {
    pub k: u32,
    pub points: Vec<Vec<f64>>,
    pub outcome: WeightOutcome,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceFile {
    pub instance: MixtureInstance,
    pub checks: InstanceChecks,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SqFile {
    /// `instance` or `null`.
    pub source: String,
    pub n: usize,
    pub reports: Vec<DistinguisherReport>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PowerFile {
    pub source: String,
    pub rows: Vec<PowerRow>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyFile {
    pub k: u32,
    pub tolerance: f64,
    /// `(odd degree, residual)` on the sphere side.
    pub sphere: Vec<(u32, f64)>,
    /// Same, against Gaussian-orthonormal Hermite bases.
    pub gaussian: Vec<(u32, f64)>,
    pub passed: bool,
}
