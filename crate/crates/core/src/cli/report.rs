//! JSON run report.

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use crate::critical::{CriticalCluster, CriticalPoint};
use crate::morse::{LevelSurface, MorseCode, VerificationReport};

/// Bumped whenever a field is renamed, removed or changes meaning.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnotSummary {
    /// Parametrization as parsed, in the curve grammar.
    pub source: String,
    pub length: f64,
    pub max_speed: f64,
    /// Exclusion radius of the base quadrature rule.
    pub min_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSummary {
    pub value: f64,
    /// Positions in `critical_points`.
    pub members: Vec<usize>,
    pub m: usize,
    pub n: usize,
}

impl ClusterSummary {
    pub fn from_clusters(clusters: &[CriticalCluster]) -> Vec<ClusterSummary> {
        let mut next = 0;
        clusters
            .iter()
            .map(|c| {
                let members = (next..next + c.points.len()).collect();
                next += c.points.len();
                ClusterSummary {
                    value: c.value,
                    members,
                    m: c.m,
                    n: c.n,
                }
            })
            .collect()
    }
}

/// Wall-clock seconds per stage. Not part of the determinism contract.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub critical: f64,
    pub surfaces: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub config: RunConfig,
    pub knot: KnotSummary,
    /// Sorted by value, so each cluster's members are contiguous.
    pub critical_points: Vec<CriticalPoint>,
    pub cluster_tol: f64,
    pub clusters: Vec<ClusterSummary>,
    pub regular_values: Vec<f64>,
    pub surfaces: Vec<LevelSurface>,
    pub morse_code: MorseCode,
    pub verification: VerificationReport,
    pub timings: Timings,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report fields are plain data")
    }

    /// The report with timings zeroed, for comparing runs.
    pub fn without_timings(&self) -> RunReport {
        RunReport {
            timings: Timings::default(),
            ..self.clone()
        }
    }
}
