//! Scenario files: the batch interface.
//!
//! A scenario bundles a finite space, named set functions, named
//! integrands, an ordered task list, and numeric configuration. Rationals
//! travel as `"p/q"` strings so inputs never round-trip through floats;
//! measurable sets are arrays of atom indices; set-function tables are
//! keyed by comma-separated atom index lists (the empty string is the
//! empty set).

use crate::convex::ConvexBody;
use crate::gould::Integrand;
use crate::rat::{parse_rat, Rat};
use crate::setfn::{MultiSetFn, ScalarSetFn};
use crate::space::{FiniteSpace, Guards, MSet};
use num::traits::Signed;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("task {task} references unknown name {name:?}")]
    UnknownName { task: usize, name: String },
}

/// Raw file form, kept separate from the validated [`Scenario`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub space: SpaceJson,
    #[serde(default)]
    pub measures: BTreeMap<String, MeasureJson>,
    #[serde(default)]
    pub integrands: BTreeMap<String, IntegrandJson>,
    #[serde(default)]
    pub tasks: Vec<Task>,
    #[serde(default)]
    pub config: ConfigJson,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpaceJson {
    pub points: Vec<String>,
    pub atoms: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasureJson {
    pub kind: MeasureKind,
    #[serde(default)]
    pub generator: Generator,
    pub values: BTreeMap<String, ValueJson>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureKind {
    Scalar,
    Multi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Generator {
    #[default]
    Tabulated,
    AdditiveFromAtoms,
}

/// A table entry: a rational string for scalar measures, a body for
/// set-valued ones.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ValueJson {
    Scalar(String),
    Body(ConvexBody),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntegrandJson {
    /// Point name to rational string.
    pub values: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ConfigJson {
    pub tolerance: Option<String>,
    pub max_atoms: Option<usize>,
    pub max_tag_choices: Option<u64>,
    pub max_ob_sums: Option<u64>,
    pub seed: Option<u64>,
    pub approx_stages: Option<usize>,
}

/// One executable task. Operations mirror the library surface; optional
/// `expect*` fields turn informational runs into pass/fail checks.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Task {
    Classify {
        measure: String,
    },
    VariationCheck {
        measure: String,
    },
    Integrate {
        integrand: String,
        measure: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        set: Option<Vec<usize>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect_integrable: Option<bool>,
    },
    IntegralFunction {
        measure: String,
    },
    EquivalenceSuite {
        integrand: String,
        measure: String,
    },
    IntegrateMultimeasure {
        measure: String,
    },
    VariationOfIntegral {
        measure: String,
    },
    TotallyMeasurable {
        integrand: String,
        measure: String,
        epsilon: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect: Option<bool>,
    },
    SimpleApprox {
        integrand: String,
        measure: String,
    },
    ObBound {
        integrand: String,
        measure: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        set: Option<Vec<usize>>,
    },
    ChainEstimator {
        integrand: String,
        measure: String,
        /// Explicit chain as lists of blocks of atom indices; a dyadic
        /// halving chain is used when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        chain: Option<Vec<Vec<Vec<usize>>>>,
    },
    SeriesIntegral {
        coeffs: Vec<String>,
        sets: Vec<Vec<usize>>,
        measure: String,
    },
    ApproximateRange {
        gamma: String,
        #[serde(rename = "M")]
        m: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        set: Option<Vec<usize>>,
        alpha: String,
    },
    StrongAc {
        gamma: String,
        #[serde(rename = "M")]
        m: String,
    },
    Rn {
        gamma: String,
        #[serde(rename = "M")]
        m: String,
        tol: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect: Option<RnExpectation>,
    },
    VerifyRn {
        gamma: String,
        #[serde(rename = "M")]
        m: String,
        integrand: String,
        tol: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RnExpectation {
    Success,
    HypothesisFailed,
}

/// Validated configuration.
#[derive(Debug, Clone)]
pub struct Config {
    pub tolerance: Rat,
    pub tolerance_f64: f64,
    pub guards: Guards,
    pub seed: u64,
    pub approx_stages: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            tolerance: parse_rat("1e-9").unwrap(),
            tolerance_f64: 1e-9,
            guards: Guards::default(),
            seed: 0,
            approx_stages: 20,
        }
    }
}

/// A fully validated scenario: every set-function invariant checked, every
/// task reference resolved.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub description: Option<String>,
    pub space: FiniteSpace,
    pub scalars: BTreeMap<String, ScalarSetFn>,
    pub multis: BTreeMap<String, MultiSetFn>,
    pub integrands: BTreeMap<String, Integrand>,
    pub tasks: Vec<Task>,
    pub config: Config,
}

impl Scenario {
    pub fn has_measure(&self, name: &str) -> bool {
        self.scalars.contains_key(name) || self.multis.contains_key(name)
    }

    /// Resolves a task's `set` field, the whole space when absent.
    pub fn resolve_set(&self, set: &Option<Vec<usize>>) -> Result<MSet, ScenarioError> {
        match set {
            None => Ok(self.space.full_set()),
            Some(atoms) => MSet::from_atoms(atoms, self.space.atom_count())
                .map_err(|e| ScenarioError::Invariant(e.to_string())),
        }
    }
}

/// Loads and fully validates a scenario file.
pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let file: ScenarioFile =
        serde_json::from_str(&text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
    file.validate()
}

impl ScenarioFile {
    pub fn validate(&self) -> Result<Scenario, ScenarioError> {
        let space = FiniteSpace::new(self.space.points.clone(), self.space.atoms.clone())
            .map_err(|e| ScenarioError::Invariant(e.to_string()))?;
        let k = space.atom_count();

        let mut scalars = BTreeMap::new();
        let mut multis = BTreeMap::new();
        for (name, mj) in &self.measures {
            match mj.kind {
                MeasureKind::Scalar => {
                    let table = build_table(name, mj, k, |v| match v {
                        ValueJson::Scalar(s) => parse_rat(s)
                            .map_err(|e| ScenarioError::Parse(format!("measure {name:?}: {e}"))),
                        ValueJson::Body(_) => Err(ScenarioError::Invariant(format!(
                            "scalar measure {name:?} has a set-valued entry"
                        ))),
                    })?;
                    let mu = match mj.generator {
                        Generator::Tabulated => {
                            ScalarSetFn::from_table(k, full_table(name, table, Rat::from_integer(0.into()))?)
                        }
                        Generator::AdditiveFromAtoms => {
                            let atoms = atoms_only(name, table)?;
                            ScalarSetFn::additive_from_atoms(&atoms)
                        }
                    }
                    .map_err(|e| ScenarioError::Invariant(format!("measure {name:?}: {e}")))?;
                    mu.classify();
                    scalars.insert(name.clone(), mu);
                }
                MeasureKind::Multi => {
                    let table = build_table(name, mj, k, |v| match v {
                        ValueJson::Body(b) => Ok(b.clone()),
                        ValueJson::Scalar(_) => Err(ScenarioError::Invariant(format!(
                            "set-valued measure {name:?} has a scalar entry"
                        ))),
                    })?;
                    let m = match mj.generator {
                        Generator::Tabulated => {
                            let dim = table
                                .iter()
                                .flatten()
                                .next()
                                .map(|b| b.dim())
                                .unwrap_or(1);
                            MultiSetFn::from_table(
                                k,
                                full_table(name, table, ConvexBody::zero(dim))?,
                            )
                        }
                        Generator::AdditiveFromAtoms => {
                            let atoms = atoms_only(name, table)?;
                            MultiSetFn::additive_from_atoms(&atoms)
                        }
                    }
                    .map_err(|e| ScenarioError::Invariant(format!("measure {name:?}: {e}")))?;
                    m.classify();
                    multis.insert(name.clone(), m);
                }
            }
        }

        let mut integrands = BTreeMap::new();
        for (name, ij) in &self.integrands {
            let mut values = Vec::with_capacity(space.point_count());
            for p in 0..space.point_count() {
                let pname = space.point_name(p);
                let raw = ij.values.get(pname).ok_or_else(|| {
                    ScenarioError::Invariant(format!(
                        "integrand {name:?} missing a value for point {pname:?}"
                    ))
                })?;
                values.push(
                    parse_rat(raw)
                        .map_err(|e| ScenarioError::Parse(format!("integrand {name:?}: {e}")))?,
                );
            }
            integrands.insert(
                name.clone(),
                Integrand::new(&space, values)
                    .map_err(|e| ScenarioError::Invariant(e.to_string()))?,
            );
        }

        let config = self.config.validate()?;

        // Every task must reference declared names only.
        let scenario = Scenario {
            description: self.description.clone(),
            space,
            scalars,
            multis,
            integrands,
            tasks: self.tasks.clone(),
            config,
        };
        for (i, task) in scenario.tasks.iter().enumerate() {
            for name in task.measure_refs() {
                if !scenario.has_measure(name) {
                    return Err(ScenarioError::UnknownName {
                        task: i,
                        name: name.to_string(),
                    });
                }
            }
            for name in task.integrand_refs() {
                if !scenario.integrands.contains_key(name) {
                    return Err(ScenarioError::UnknownName {
                        task: i,
                        name: name.to_string(),
                    });
                }
            }
        }
        Ok(scenario)
    }
}

impl ConfigJson {
    fn validate(&self) -> Result<Config, ScenarioError> {
        let mut config = Config::default();
        if let Some(t) = &self.tolerance {
            let tol =
                parse_rat(t).map_err(|e| ScenarioError::Parse(format!("tolerance: {e}")))?;
            if !tol.is_positive() {
                return Err(ScenarioError::Invariant(
                    "config tolerance must be positive".into(),
                ));
            }
            config.tolerance_f64 = crate::rat::rat_to_f64(&tol);
            config.tolerance = tol;
        }
        if let Some(m) = self.max_atoms {
            if m == 0 {
                return Err(ScenarioError::Invariant(
                    "config max_atoms must be positive".into(),
                ));
            }
            config.guards.max_atoms = m;
        }
        if let Some(m) = self.max_tag_choices {
            if m == 0 {
                return Err(ScenarioError::Invariant(
                    "config max_tag_choices must be positive".into(),
                ));
            }
            config.guards.max_tag_choices = m;
        }
        if let Some(m) = self.max_ob_sums {
            if m == 0 {
                return Err(ScenarioError::Invariant(
                    "config max_ob_sums must be positive".into(),
                ));
            }
            config.guards.max_ob_sums = m;
        }
        if let Some(s) = self.seed {
            config.seed = s;
        }
        if let Some(s) = self.approx_stages {
            if s == 0 {
                return Err(ScenarioError::Invariant(
                    "config approx_stages must be positive".into(),
                ));
            }
            config.approx_stages = s;
        }
        Ok(config)
    }
}

fn build_table<T>(
    name: &str,
    mj: &MeasureJson,
    atom_count: usize,
    mut parse: impl FnMut(&ValueJson) -> Result<T, ScenarioError>,
) -> Result<Vec<Option<T>>, ScenarioError> {
    let mut table: Vec<Option<T>> = (0..(1usize << atom_count)).map(|_| None).collect();
    for (key, value) in &mj.values {
        let mask = parse_set_key(key, atom_count)
            .map_err(|e| ScenarioError::Invariant(format!("measure {name:?}: {e}")))?;
        table[mask as usize] = Some(parse(value)?);
    }
    Ok(table)
}

/// A tabulated measure must cover the whole algebra; only the empty set may
/// be omitted (it defaults to the zero value the invariant requires).
fn full_table<T>(name: &str, table: Vec<Option<T>>, zero: T) -> Result<Vec<T>, ScenarioError> {
    let mut out = Vec::with_capacity(table.len());
    let mut zero = Some(zero);
    for (mask, slot) in table.into_iter().enumerate() {
        match slot {
            Some(v) => out.push(v),
            None if mask == 0 => out.push(zero.take().expect("empty set is slot zero")),
            None => {
                return Err(ScenarioError::Invariant(format!(
                    "measure {name:?} is missing the value of set mask {mask}"
                )))
            }
        }
    }
    Ok(out)
}

/// Atom-generated measures use exactly the singleton entries.
fn atoms_only<T>(name: &str, table: Vec<Option<T>>) -> Result<Vec<T>, ScenarioError> {
    let len = table.len();
    let atom_count = len.trailing_zeros() as usize;
    let mut slots: Vec<Option<T>> = table;
    let mut atoms = Vec::with_capacity(atom_count);
    for a in 0..atom_count {
        let v = slots[1usize << a].take().ok_or_else(|| {
            ScenarioError::Invariant(format!("measure {name:?} missing the value of atom {a}"))
        })?;
        atoms.push(v);
    }
    Ok(atoms)
}

fn parse_set_key(key: &str, atom_count: usize) -> Result<u64, String> {
    let key = key.trim();
    if key.is_empty() {
        return Ok(0);
    }
    let mut mask = 0u64;
    for part in key.split(',') {
        let idx: usize = part
            .trim()
            .parse()
            .map_err(|_| format!("bad atom index {part:?} in set key {key:?}"))?;
        if idx >= atom_count {
            return Err(format!("atom index {idx} out of range in set key {key:?}"));
        }
        mask |= 1u64 << idx;
    }
    Ok(mask)
}

/// Canonical key for a set in the table serialization.
pub fn set_key(set: MSet) -> String {
    set.atom_indices()
        .iter()
        .map(|a| a.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Serializes in-memory objects back to the file form (used when the audit
/// dumps counterexample scenarios).
pub fn scenario_file_from_parts(
    description: Option<String>,
    space: &FiniteSpace,
    scalars: &BTreeMap<String, ScalarSetFn>,
    multis: &BTreeMap<String, MultiSetFn>,
    integrands: &BTreeMap<String, Integrand>,
    tasks: Vec<Task>,
) -> ScenarioFile {
    let mut measures = BTreeMap::new();
    for (name, mu) in scalars {
        let mut values = BTreeMap::new();
        for e in space.all_sets() {
            values.insert(
                set_key(e),
                ValueJson::Scalar(crate::rat::fmt_rat(mu.value(e))),
            );
        }
        measures.insert(
            name.clone(),
            MeasureJson {
                kind: MeasureKind::Scalar,
                generator: Generator::Tabulated,
                values,
            },
        );
    }
    for (name, m) in multis {
        let mut values = BTreeMap::new();
        for e in space.all_sets() {
            values.insert(set_key(e), ValueJson::Body(m.value(e).clone()));
        }
        measures.insert(
            name.clone(),
            MeasureJson {
                kind: MeasureKind::Multi,
                generator: Generator::Tabulated,
                values,
            },
        );
    }
    let integrands = integrands
        .iter()
        .map(|(name, f)| {
            let values = (0..space.point_count())
                .map(|p| {
                    (
                        space.point_name(p).to_string(),
                        crate::rat::fmt_rat(f.value(p)),
                    )
                })
                .collect();
            (name.clone(), IntegrandJson { values })
        })
        .collect();
    ScenarioFile {
        description,
        space: SpaceJson {
            points: space.point_names().to_vec(),
            atoms: space.atoms().to_vec(),
        },
        measures,
        integrands,
        tasks,
        config: ConfigJson::default(),
    }
}

impl Task {
    fn measure_refs(&self) -> Vec<&str> {
        match self {
            Task::Classify { measure }
            | Task::VariationCheck { measure }
            | Task::Integrate { measure, .. }
            | Task::IntegralFunction { measure }
            | Task::EquivalenceSuite { measure, .. }
            | Task::IntegrateMultimeasure { measure }
            | Task::VariationOfIntegral { measure }
            | Task::TotallyMeasurable { measure, .. }
            | Task::SimpleApprox { measure, .. }
            | Task::ObBound { measure, .. }
            | Task::ChainEstimator { measure, .. }
            | Task::SeriesIntegral { measure, .. } => vec![measure],
            Task::ApproximateRange { gamma, m, .. }
            | Task::StrongAc { gamma, m }
            | Task::Rn { gamma, m, .. }
            | Task::VerifyRn { gamma, m, .. } => vec![gamma, m],
        }
    }

    fn integrand_refs(&self) -> Vec<&str> {
        match self {
            Task::Integrate { integrand, .. }
            | Task::EquivalenceSuite { integrand, .. }
            | Task::TotallyMeasurable { integrand, .. }
            | Task::SimpleApprox { integrand, .. }
            | Task::ObBound { integrand, .. }
            | Task::ChainEstimator { integrand, .. }
            | Task::VerifyRn { integrand, .. } => vec![integrand],
            _ => vec![],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat_int;

    const MINIMAL: &str = r#"{
        "space": {"points": ["t0"], "atoms": [[0]]}
    }"#;

    #[test]
    fn minimal_scenario_loads() {
        let file: ScenarioFile = serde_json::from_str(MINIMAL).unwrap();
        let sc = file.validate().unwrap();
        assert_eq!(sc.space.atom_count(), 1);
        assert!(sc.tasks.is_empty());
    }

    #[test]
    fn scalar_and_multi_measures_load() {
        let text = r#"{
            "space": {"points": ["a", "b", "c"], "atoms": [[0, 1], [2]]},
            "measures": {
                "mu": {"kind": "scalar", "generator": "tabulated",
                       "values": {"": "0", "0": "1", "1": "2", "0,1": "5/2"}},
                "nu": {"kind": "scalar", "generator": "additive-from-atoms",
                       "values": {"0": "1/2", "1": "3"}},
                "M": {"kind": "multi", "generator": "additive-from-atoms",
                      "values": {"0": {"dim": 1, "lo": "0", "hi": "1"},
                                  "1": {"dim": 1, "lo": "-1", "hi": "2"}}}
            },
            "integrands": {"f": {"values": {"a": "1", "b": "1/2", "c": "-2"}}},
            "tasks": [
                {"op": "integrate", "integrand": "f", "measure": "mu"},
                {"op": "rn", "gamma": "M", "M": "M", "tol": "1e-6"}
            ],
            "config": {"tolerance": "1e-9", "seed": 7}
        }"#;
        let file: ScenarioFile = serde_json::from_str(text).unwrap();
        let sc = file.validate().unwrap();
        assert_eq!(sc.scalars.len(), 2);
        assert_eq!(sc.multis.len(), 1);
        assert!(!sc.scalars["mu"].classify().additive);
        assert!(sc.scalars["nu"].classify().additive);
        assert_eq!(sc.integrands["f"].value(2), &rat_int(-2));
        assert_eq!(sc.config.seed, 7);
        assert_eq!(sc.tasks.len(), 2);
    }

    #[test]
    fn broken_empty_set_invariant_is_named() {
        let text = r#"{
            "space": {"points": ["a"], "atoms": [[0]]},
            "measures": {
                "M": {"kind": "multi", "generator": "tabulated",
                      "values": {"": {"dim": 1, "lo": "0", "hi": "1"},
                                  "0": {"dim": 1, "lo": "0", "hi": "1"}}}
            }
        }"#;
        let file: ScenarioFile = serde_json::from_str(text).unwrap();
        let err = file.validate().unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("empty set"), "message names the clause: {msg}");
        assert!(msg.contains("{0}"), "message names the required value: {msg}");
    }

    #[test]
    fn unknown_task_names_are_rejected() {
        let text = r#"{
            "space": {"points": ["a"], "atoms": [[0]]},
            "tasks": [{"op": "classify", "measure": "ghost"}]
        }"#;
        let file: ScenarioFile = serde_json::from_str(text).unwrap();
        assert!(matches!(
            file.validate().unwrap_err(),
            ScenarioError::UnknownName { task: 0, .. }
        ));
    }

    #[test]
    fn parse_errors_carry_location() {
        let err = serde_json::from_str::<ScenarioFile>("{ not json")
            .map_err(|e| ScenarioError::Parse(e.to_string()))
            .unwrap_err();
        assert!(err.to_string().contains("line"));
    }

    #[test]
    fn missing_table_entries_are_rejected() {
        let text = r#"{
            "space": {"points": ["a", "b"], "atoms": [[0], [1]]},
            "measures": {
                "mu": {"kind": "scalar", "generator": "tabulated",
                       "values": {"": "0", "0": "1"}}
            }
        }"#;
        let file: ScenarioFile = serde_json::from_str(text).unwrap();
        assert!(file.validate().is_err());
    }

    #[test]
    fn round_trip_through_parts() {
        let file: ScenarioFile = serde_json::from_str(
            r#"{
            "space": {"points": ["a", "b"], "atoms": [[0], [1]]},
            "measures": {
                "mu": {"kind": "scalar", "generator": "additive-from-atoms",
                       "values": {"0": "1", "1": "2"}},
                "M": {"kind": "multi", "generator": "additive-from-atoms",
                      "values": {"0": {"dim": 1, "lo": "0", "hi": "1"},
                                  "1": {"dim": 1, "lo": "0", "hi": "2"}}}
            },
            "integrands": {"f": {"values": {"a": "1", "b": "2"}}}
        }"#,
        )
        .unwrap();
        let sc = file.validate().unwrap();
        let dumped = scenario_file_from_parts(
            None,
            &sc.space,
            &sc.scalars,
            &sc.multis,
            &sc.integrands,
            vec![],
        );
        let reparsed = dumped.validate().unwrap();
        for e in sc.space.all_sets() {
            assert_eq!(sc.scalars["mu"].value(e), reparsed.scalars["mu"].value(e));
            assert_eq!(sc.multis["M"].value(e), reparsed.multis["M"].value(e));
        }
        assert_eq!(
            sc.integrands["f"].values(),
            reparsed.integrands["f"].values()
        );
    }
}
