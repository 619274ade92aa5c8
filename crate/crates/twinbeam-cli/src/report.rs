//! Full criterion battery over one run's histograms, serialized as a
//! self-describing JSON report plus a K_n series in CSV.

use serde::{Deserialize, Serialize};
use twinbeam::{
    combined_test, gamma_wdsby, klyshko_scan, mandel_q, significance_table, Axis, CountHistogram,
    CriterionResult, JointCountHistogram, KlyshkoPoint, LeeCell, NbarPolicy,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub metadata: Metadata,
    /// K_n over every order the single-beam range supports.
    pub klyshko: Vec<KlyshkoPoint>,
    pub gamma: CriterionResult,
    pub combined: CriterionResult,
    pub mandel_q: CriterionResult,
    /// Conditional-form Lee table over the configured working points.
    pub lee: Vec<LeeCell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    pub inputs: Inputs,
    pub options: OptionsEcho,
    pub trials: Trials,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inputs {
    pub joint: String,
    pub single: Option<String>,
    /// Leading comment lines of the input files, carried along so a
    /// report stays traceable to the runs that produced it.
    pub joint_provenance: Vec<String>,
    pub single_provenance: Vec<String>,
}

/// Where the single-beam histogram for the K_n / Gamma / Q battery came
/// from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SingleSource {
    File,
    SignalMarginal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptionsEcho {
    pub nbar: NbarPolicy,
    pub lee_n1: [usize; 2],
    pub lee_n2: [usize; 2],
    pub single_source: SingleSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trials {
    pub joint: u64,
    pub single: u64,
}

pub struct ReportSpec<'a> {
    pub joint: &'a JointCountHistogram,
    pub joint_path: String,
    pub joint_provenance: Vec<String>,
    /// Single-beam histogram with its path and provenance; when absent
    /// the battery runs on the signal marginal of the joint data.
    pub single: Option<(CountHistogram, String, Vec<String>)>,
    pub nbar: NbarPolicy,
    pub lee_n1: (usize, usize),
    pub lee_n2: (usize, usize),
}

pub fn build_report(spec: ReportSpec<'_>) -> twinbeam::Result<Report> {
    let lee = significance_table(spec.joint, spec.lee_n1, spec.lee_n2, spec.nbar)?;
    let (single_hist, single_path, single_provenance, source) = match spec.single {
        Some((hist, path, prov)) => (hist, Some(path), prov, SingleSource::File),
        None => (
            spec.joint.marginal(Axis::Signal),
            None,
            Vec::new(),
            SingleSource::SignalMarginal,
        ),
    };
    Ok(Report {
        metadata: Metadata {
            tool: "twinbeam".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            inputs: Inputs {
                joint: spec.joint_path,
                single: single_path,
                joint_provenance: spec.joint_provenance,
                single_provenance,
            },
            options: OptionsEcho {
                nbar: spec.nbar,
                lee_n1: [spec.lee_n1.0, spec.lee_n1.1],
                lee_n2: [spec.lee_n2.0, spec.lee_n2.1],
                single_source: source,
            },
            trials: Trials {
                joint: spec.joint.trials(),
                single: single_hist.trials(),
            },
        },
        klyshko: klyshko_scan(&single_hist),
        gamma: gamma_wdsby(&single_hist),
        combined: combined_test(&single_hist),
        mandel_q: mandel_q(&single_hist),
        lee,
    })
}

/// K_n series as CSV: `n,K,sigma,status`. An undefined K renders as
/// NaN, a missing error bar as an empty field.
pub fn klyshko_csv(series: &[KlyshkoPoint]) -> String {
    let mut out = String::from("n,K,sigma,status\n");
    for point in series {
        let sigma = point
            .result
            .std_error
            .map(|s| s.to_string())
            .unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{}\n",
            point.n, point.result.value, sigma, point.result.status
        ));
    }
    out
}
