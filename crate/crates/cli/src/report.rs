//! Reports and the JSON encoding of groups, modules, cochains and witnesses.

use std::sync::Arc;

use obslab_core::cochain::Cochain;
use obslab_core::group::FiniteGroup;
use obslab_core::module::FlowModule;
use obslab_core::standard::StandardThree;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::problem::Entry;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroupJson {
    pub label: String,
    pub order: usize,
    pub table: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModuleJson {
    pub moduli: Vec<u64>,
    pub theta: Vec<Vec<i64>>,
    pub torus_generator: usize,
    /// One matrix per group element.
    pub action: Vec<Vec<Vec<i64>>>,
}

/// Enough data to rebuild a coefficient module over a group.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FlowJson {
    pub group: GroupJson,
    pub module: ModuleJson,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct CochainJson {
    pub degree: usize,
    pub entries: Vec<Entry>,
}

/// A certificate that `oracle-compare` can check without rerunning the command.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Witness {
    /// `target` is a cocycle.
    Cocycle { flow: FlowJson, target: CochainJson },
    /// `d primitive = target`.
    Coboundary { flow: FlowJson, target: CochainJson, primitive: CochainJson },
    /// `(target_c, target_d1)` is the standard coboundary of `primitive`.
    StandardCoboundary {
        flow: FlowJson,
        target_c: CochainJson,
        target_d1: CochainJson,
        primitive: CochainJson,
    },
    /// `target - d primitive` takes values in `Im(theta - 1)`.
    ThetaCoboundary { flow: FlowJson, target: CochainJson, primitive: CochainJson },
}

pub fn group_json(g: &FiniteGroup) -> GroupJson {
    GroupJson {
        label: g.label().to_string(),
        order: g.order(),
        table: g.table(),
    }
}

pub fn flow_json(f: &Arc<FlowModule>) -> FlowJson {
    FlowJson {
        group: group_json(f.group()),
        module: ModuleJson {
            moduli: f.module().moduli().to_vec(),
            theta: f.theta_aut().matrix().to_vec(),
            torus_generator: f.torus_generator(),
            action: f.group().elements().map(|g| f.action().aut(g).matrix().to_vec()).collect(),
        },
    }
}

pub fn cochain_json(c: &Cochain) -> CochainJson {
    CochainJson {
        degree: c.degree(),
        entries: c.entries().into_iter().map(|(at, value)| Entry { at, value }).collect(),
    }
}

pub fn coboundary_witness(target: &Cochain, primitive: &Cochain) -> Witness {
    Witness::Coboundary {
        flow: flow_json(target.flow()),
        target: cochain_json(target),
        primitive: cochain_json(primitive),
    }
}

pub fn standard_witness(target: &StandardThree, primitive: &Cochain) -> Witness {
    Witness::StandardCoboundary {
        flow: flow_json(target.flow()),
        target_c: cochain_json(&target.c),
        target_d1: cochain_json(&target.d1),
        primitive: cochain_json(primitive),
    }
}

/// Verdict lines that mean a mathematical violation (exit 1).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    Violation,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub input_digest: String,
    pub results: serde_json::Map<String, Value>,
    pub verdict: String,
    pub witnesses: Vec<Witness>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub timing_ms: Option<u64>,
    #[serde(skip)]
    order: Vec<String>,
    #[serde(skip)]
    pub status: Option<Status>,
}

impl Report {
    pub fn new(command: String, input: &[u8]) -> Self {
        let digest = Sha256::digest(input);
        Report {
            command,
            input_digest: digest.iter().map(|b| format!("{b:02x}")).collect(),
            results: serde_json::Map::new(),
            verdict: String::new(),
            witnesses: Vec::new(),
            timing_ms: None,
            order: Vec::new(),
            status: None,
        }
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) {
        if self.results.insert(key.to_string(), value.into()).is_none() {
            self.order.push(key.to_string());
        }
    }

    pub fn set_json(&mut self, key: &str, value: impl Serialize) {
        self.set(key, serde_json::to_value(value).expect("serializable"));
    }

    pub fn verdict(&mut self, text: impl Into<String>, status: Status) {
        self.verdict = text.into();
        self.status = Some(status);
    }

    pub fn witness(&mut self, w: Witness) {
        self.witnesses.push(w);
    }

    pub fn status(&self) -> Status {
        self.status.unwrap_or(Status::Ok)
    }

    pub fn render_text(&self) -> String {
        let mut out = format!("command: {}\ninput: sha256 {}\n", self.command, self.input_digest);
        for key in &self.order {
            let v = &self.results[key];
            let text = match v {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            out.push_str(&format!("{key}: {text}\n"));
        }
        for w in &self.witnesses {
            let kind = serde_json::to_value(w).expect("serializable")["kind"].as_str().unwrap_or("").to_string();
            out.push_str(&format!("witness: {kind}\n"));
        }
        if let Some(t) = self.timing_ms {
            out.push_str(&format!("timing: {t} ms\n"));
        }
        out.push_str(&format!("verdict: {}\n", self.verdict));
        out
    }

    pub fn render_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }
}

pub fn class_json(factors: &[u64]) -> Value {
    json!({ "invariant_factors": factors })
}
