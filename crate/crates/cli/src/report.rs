//! Serializable reports. Every scalar is written as an exact string ("a/b" in
//! rational mode) and every ratio also carries its natural log.

use std::collections::BTreeMap;

use pml_core::guarantees::{GuaranteeReport, WorstEvent, Witness};
use pml_core::io::ModelFile;
use pml_core::leakage::LeakageDistribution;
use pml_core::{Joint, Scalar};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub schema_version: u32,
    pub command: String,
    pub mode: String,
    pub result: T,
}

/// A ratio exp(ε) and ε itself; `nats` is absent for an infinite ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ratio {
    pub ratio: String,
    pub nats: Option<f64>,
}

impl Ratio {
    pub fn of<S: Scalar>(v: &S) -> Self {
        Ratio {
            ratio: v.to_repr(),
            nats: Some(v.ln()),
        }
    }

    pub fn show(&self) -> String {
        match self.nats {
            Some(n) => format!("{} (ε = {:.6})", self.ratio, n),
            None => "inf".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeakageRow {
    pub output: String,
    pub mass: String,
    pub leakage: Ratio,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_leakage: Option<Ratio>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeakageReport {
    pub outputs: Vec<LeakageRow>,
    pub unsupported: Vec<String>,
    pub max: Ratio,
    pub maximal_leakage: Ratio,
    pub expected_leakage_nats: f64,
}

impl LeakageReport {
    pub fn new<S: Scalar>(joint: &Joint<S>, d: &LeakageDistribution<S>) -> Self {
        let ml = d.expected_ratio();
        LeakageReport {
            outputs: d
                .entries
                .iter()
                .map(|e| LeakageRow {
                    output: joint.label_y(e.y).to_string(),
                    mass: e.mass.to_repr(),
                    leakage: Ratio::of(&e.ratio),
                    g_leakage: None,
                })
                .collect(),
            unsupported: d.unsupported.iter().map(|&y| joint.label_y(y).to_string()).collect(),
            max: Ratio::of(&d.max_ratio()),
            maximal_leakage: Ratio::of(&ml),
            expected_leakage_nats: d.expected_leakage(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub output: String,
    pub zeta: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum WitnessReport {
    /// Outputs of the original channel.
    Outputs { outputs: Vec<String> },
    /// An event over the reduced channel.
    Event {
        input: String,
        alternatives: Vec<String>,
        members: Vec<String>,
        split: Option<Split>,
        leakage: Ratio,
        description: String,
    },
}

impl WitnessReport {
    pub fn event<S: Scalar>(w: &WorstEvent<S>) -> Self {
        let reduced = &w.reduced.joint;
        WitnessReport::Event {
            input: reduced.label_x(w.x).to_string(),
            alternatives: w.alternatives.iter().map(|&x| reduced.label_x(x).to_string()).collect(),
            members: w.event.members().iter().map(|&y| reduced.label_y(y).to_string()).collect(),
            split: w.event.split().map(|(y, z)| Split {
                output: reduced.label_y(*y).to_string(),
                zeta: z.to_repr(),
            }),
            leakage: Ratio::of(&w.leakage()),
            description: w.describe(),
        }
    }

    pub fn show(&self) -> String {
        match self {
            WitnessReport::Outputs { outputs } if outputs.is_empty() => "none".into(),
            WitnessReport::Outputs { outputs } => outputs.join(", "),
            WitnessReport::Event { description, .. } => description.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuaranteeDto {
    pub kind: String,
    pub epsilon: Ratio,
    pub delta: String,
    pub holds: bool,
    /// Smallest ε for which the guarantee holds at this δ.
    pub level: Ratio,
    pub witness: WitnessReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

impl GuaranteeDto {
    pub fn new<S: Scalar>(joint: &Joint<S>, r: &GuaranteeReport<S>) -> Self {
        let witness = match &r.witness {
            Witness::Outcome(y) => WitnessReport::Outputs {
                outputs: vec![joint.label_y(*y).to_string()],
            },
            Witness::Outcomes(ys) => WitnessReport::Outputs {
                outputs: ys.iter().map(|&y| joint.label_y(y).to_string()).collect(),
            },
            Witness::Event(w) => WitnessReport::event(w),
        };
        GuaranteeDto {
            kind: r.kind.as_str().to_string(),
            epsilon: Ratio::of(&r.epsilon_ratio),
            delta: r.delta.to_repr(),
            holds: r.holds,
            level: Ratio::of(&r.level),
            witness,
            diagnostic: r.diagnostic.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputValue {
    pub input: String,
    pub value: Ratio,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmlReport {
    pub delta: String,
    pub kappa: Ratio,
    pub h: Vec<InputValue>,
    pub worst_event: WitnessReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guarantee: Option<GuaranteeDto>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmlToPmlReport {
    pub eml_holds: bool,
    pub high_leakage: Vec<String>,
    pub high_leakage_mass: String,
    pub common_maximizer: Option<String>,
    pub pml_follows: bool,
    pub pml_holds: bool,
    pub diagnostic: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuaranteeSet {
    pub reports: Vec<GuaranteeDto>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eml_to_pml: Option<EmlToPmlReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Class {
    pub output: String,
    pub members: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReduceReport {
    pub classes: Vec<Class>,
    pub dropped: Vec<String>,
    pub model: ModelFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub epsilon: Ratio,
    pub delta: String,
}

impl Params {
    pub fn of<S: Scalar>(eps: &S, delta: &S) -> Self {
        Params {
            epsilon: Ratio::of(eps),
            delta: delta.to_repr(),
        }
    }

    pub fn show(&self) -> String {
        format!("({}, {})", self.epsilon.ratio, self.delta)
    }
}

/// A composition rule applied to guarantees verified on each stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleReport {
    pub rule: String,
    pub first: Params,
    pub second: Params,
    pub bound: Params,
    /// The composed mechanism's own smallest ε at the bound's δ.
    pub achieved: Ratio,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComposeReport {
    pub outputs: usize,
    pub leakage: LeakageReport,
    pub rules: Vec<RuleReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureReportDto {
    pub measure: String,
    /// Exact value, "inf", "true"/"false", or a float in nats.
    pub value: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nats: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub implied_pml_bound: Option<Ratio>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub bounds: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub delta: String,
    pub delta_pml: Ratio,
    pub eml: Ratio,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub model_digest: String,
    pub model: ModelFile,
    pub leakage: LeakageReport,
    pub levels: Vec<Level>,
    pub guarantees: Vec<GuaranteeDto>,
    pub measures: Vec<MeasureReportDto>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
}
