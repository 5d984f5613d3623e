//! Scenario files: JSON with a `schema: 1` field.
//!
//! Potentials and observables are tables from words to values. A word is
//! written as its symbols joined by commas, `"0,1"`, with the original
//! (unpruned) symbol numbers. Words missing from a table take the value 0.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;
pub const MAX_ORDER: usize = 6;
pub const MAX_DEPTH: usize = 10;
pub const MIN_GRID: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    ShiftPerturbation,
    Gdms,
    GapAudit,
}

impl Kind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Kind::ShiftPerturbation => "shift-perturbation",
            Kind::Gdms => "gdms",
            Kind::GapAudit => "gap-audit",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: u32,
    pub name: String,
    pub kind: Kind,
    /// Expansion order `n`.
    pub order: usize,
    /// Minimum word depth of the operator, or the coding depth for GDMS.
    #[serde(default = "one")]
    pub depth: usize,
    pub grid: Grid,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<ShiftSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<ThetaSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub observables: Vec<Observable>,
    /// Seed for randomized norm brackets.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub outputs: Outputs,
}

fn one() -> usize {
    1
}

/// `start, start·ratio, …`, `count` points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub start: f64,
    pub ratio: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShiftSpec {
    pub transition: Vec<Vec<u8>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Table {
    pub depth: usize,
    pub values: BTreeMap<String, f64>,
}

/// `φ(ε) = base + Σ_k coefficients[k−1]·ε^k + Σ ε^power·table`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub base: Table,
    #[serde(default)]
    pub coefficients: Vec<Table>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tail: Vec<TailTerm>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailTerm {
    pub power: f64,
    pub table: Table,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ThetaSpec {
    Fixed {
        theta: f64,
    },
    /// `θ(ε) = max(base, 1 − ε^exponent)`.
    Power {
        base: f64,
        exponent: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Observable {
    Cylinder(Vec<usize>),
    Table(Table),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    /// One seed interval per vertex.
    pub seeds: Vec<[f64; 2]>,
    pub contraction: f64,
    pub edges: Vec<EdgeSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpec {
    pub from: usize,
    pub to: usize,
    pub map: MapSpec,
}

/// Map coefficients are jets in `ε`, lowest order first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "lowercase", deny_unknown_fields)]
pub enum MapSpec {
    Affine { r: Vec<f64>, c: Vec<f64> },
    Moebius { a: Vec<f64>, b: Vec<f64>, c: Vec<f64>, d: Vec<f64> },
}

/// File names, relative to the output directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Outputs {
    pub coefficients: String,
    pub remainders: String,
    pub verdict: String,
}

impl Default for Outputs {
    fn default() -> Self {
        Outputs {
            coefficients: "coefficients.txt".into(),
            remainders: "remainders.csv".into(),
            verdict: "verdict.json".into(),
        }
    }
}

fn schema(msg: impl Into<String>) -> CliError {
    CliError::Schema(msg.into())
}

/// Parses a word key such as `"0,1"`.
pub fn parse_word(key: &str) -> Result<Vec<usize>, CliError> {
    key.split(',').map(|s| s.trim().parse::<usize>().map_err(|_| schema(format!("bad word key {key:?}")))).collect()
}

pub fn format_word(w: &[usize]) -> String {
    w.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",")
}

impl Table {
    fn validate(&self, what: &str) -> Result<(), CliError> {
        if self.depth == 0 || self.depth > MAX_DEPTH {
            return Err(schema(format!("{what}: depth must lie in 1..={MAX_DEPTH}")));
        }
        for (k, v) in &self.values {
            if parse_word(k)?.len() != self.depth {
                return Err(schema(format!("{what}: word {k:?} does not have length {}", self.depth)));
            }
            if !v.is_finite() {
                return Err(schema(format!("{what}: value at {k:?} is not finite")));
            }
        }
        Ok(())
    }
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let sc: Scenario = serde_json::from_str(text).map_err(|e| schema(e.to_string()))?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| schema(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// Checks everything that does not need the numerical core.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema != SCHEMA_VERSION {
            return Err(schema(format!("unsupported schema {} (expected {SCHEMA_VERSION})", self.schema)));
        }
        if self.grid.count < MIN_GRID {
            return Err(schema(format!("grid count ≥ {MIN_GRID} required (got {})", self.grid.count)));
        }
        let g = self.grid;
        if !(g.start > 0.0 && g.start < 1.0 && g.ratio > 0.0 && g.ratio < 1.0) {
            return Err(schema("grid start and ratio must lie in (0,1)"));
        }
        if self.order > MAX_ORDER {
            return Err(schema(format!("order {} exceeds {MAX_ORDER}", self.order)));
        }
        if self.depth == 0 || self.depth > MAX_DEPTH {
            return Err(schema(format!("depth must lie in 1..={MAX_DEPTH}")));
        }
        if self.name.is_empty() {
            return Err(schema("name must not be empty"));
        }
        for (i, o) in self.observables.iter().enumerate() {
            match o {
                Observable::Cylinder(w) if w.is_empty() => {
                    return Err(schema(format!("observable {i}: empty cylinder")))
                }
                Observable::Cylinder(_) => {}
                Observable::Table(t) => t.validate(&format!("observable {i}"))?,
            }
        }
        match self.kind {
            Kind::ShiftPerturbation | Kind::GapAudit => {
                if self.shift.is_none() {
                    return Err(schema(format!("kind {} needs a shift", self.kind.as_str())));
                }
                let p = self
                    .potential
                    .as_ref()
                    .ok_or_else(|| schema(format!("kind {} needs a potential", self.kind.as_str())))?;
                p.base.validate("potential base")?;
                if p.coefficients.len() != self.order {
                    return Err(schema(format!(
                        "order {} needs {} coefficient tables, got {}",
                        self.order,
                        self.order,
                        p.coefficients.len()
                    )));
                }
                for (k, c) in p.coefficients.iter().enumerate() {
                    c.validate(&format!("coefficient {}", k + 1))?;
                }
                for (k, t) in p.tail.iter().enumerate() {
                    t.table.validate(&format!("tail term {k}"))?;
                    if !(t.power > 0.0) {
                        return Err(schema(format!("tail term {k}: power must be positive")));
                    }
                }
                if self.graph.is_some() {
                    return Err(schema("graph is only valid for kind gdms"));
                }
            }
            Kind::Gdms => {
                let g = self.graph.as_ref().ok_or_else(|| schema("kind gdms needs a graph"))?;
                if g.edges.is_empty() || g.seeds.is_empty() {
                    return Err(schema("graph needs seeds and edges"));
                }
                if self.shift.is_some() || self.potential.is_some() {
                    return Err(schema("kind gdms takes its shift and potential from the graph"));
                }
            }
        }
        if self.kind == Kind::GapAudit && !matches!(self.theta, Some(ThetaSpec::Power { .. })) {
            return Err(schema("kind gap-audit needs a power theta schedule"));
        }
        Ok(())
    }

    /// The decreasing `ε` grid.
    pub fn grid_points(&self) -> Vec<f64> {
        perturbex::perturb::geometric_grid(self.grid.start, self.grid.ratio, self.grid.count)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> String {
        r#"{
            "schema": 1, "name": "t", "kind": "shift-perturbation", "order": 1,
            "grid": {"start": 0.1, "ratio": 0.1, "count": 4},
            "shift": {"transition": [[1,1],[1,1]]},
            "potential": {"base": {"depth": 1, "values": {}},
                          "coefficients": [{"depth": 1, "values": {"0": 1.0}}]}
        }"#
        .into()
    }

    #[test]
    fn parses_minimal() {
        let sc = Scenario::from_json(&minimal()).unwrap();
        assert_eq!(sc.depth, 1);
        assert_eq!(sc.outputs, Outputs::default());
        assert_eq!(Scenario::from_json(&sc.to_json()).unwrap(), sc);
    }

    #[test]
    fn rejects_small_grid() {
        let text = minimal().replace("\"count\": 4", "\"count\": 0");
        let err = Scenario::from_json(&text).unwrap_err();
        assert!(err.to_string().contains("grid count ≥ 4 required"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn rejects_unknown_fields_and_versions() {
        let text = minimal().replace("\"order\": 1", "\"order\": 1, \"extra\": 3");
        assert!(Scenario::from_json(&text).is_err());
        let text = minimal().replace("\"schema\": 1", "\"schema\": 2");
        assert!(Scenario::from_json(&text).is_err());
    }

    #[test]
    fn word_keys() {
        assert_eq!(parse_word("0,12").unwrap(), vec![0, 12]);
        assert!(parse_word("0;1").is_err());
        assert_eq!(format_word(&[1, 0]), "1,0");
    }
}
