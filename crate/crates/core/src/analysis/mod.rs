//! Whole-geometry probes: completeness, Trotter products, geodesic
//! connectivity in Klein models and geodesic maps, plus the named
//! verification suites behind the command-line `verify`.

pub mod completeness;
pub mod connect;
pub mod geodesic_map;
pub mod suites;
pub mod trotter;

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

pub use completeness::{
    completeness_report, completeness_report_with, CompletenessReport, CompletenessVerdict,
    DirectionRecord,
};
pub use connect::{connect_by_geodesic, sl2_in_exp_image, ConnectOutcome};
pub use geodesic_map::{
    mutation_relation_residual, verify_geodesic_map, GeodesicMapSpec, MapReport, DEFAULT_T_GRID,
};
pub use suites::{random_hyperbolic_sl2, run_suite, run_suites, suite_names};
pub use trotter::{error_ratios, trotter_probe};

/// Uniform JSON summary of a verification run.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub suite: String,
    pub verdict: String,
    pub witnesses: Vec<Value>,
    pub residuals: BTreeMap<String, f64>,
    pub seed: u64,
    pub budget: BTreeMap<String, Value>,
}

impl Report {
    pub fn new(suite: impl Into<String>, seed: u64) -> Self {
        Self {
            suite: suite.into(),
            verdict: "pass".into(),
            witnesses: Vec::new(),
            residuals: BTreeMap::new(),
            seed,
            budget: BTreeMap::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == "pass"
    }

    /// Records a residual and fails the report when it exceeds `bound`.
    pub fn bound(&mut self, key: &str, value: f64, bound: f64) {
        self.residuals.insert(key.to_string(), value);
        if !(value <= bound) {
            self.fail();
        }
    }

    /// Records a value that must be at least `floor`.
    pub fn floor(&mut self, key: &str, value: f64, floor: f64) {
        self.residuals.insert(key.to_string(), value);
        if !(value >= floor) {
            self.fail();
        }
    }

    pub fn require(&mut self, condition: bool) {
        if !condition {
            self.fail();
        }
    }

    pub fn fail(&mut self) {
        self.verdict = "fail".into();
    }
}
