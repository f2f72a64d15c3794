//! Scenario configs. Optional fields are materialized to explicit values
//! before anything runs, and the materialized struct is what gets echoed,
//! so no hidden default can affect numeric output silently.

use serde::{Deserialize, Serialize};

use pcaf_core::conditions::CorpusExample;
use pcaf_core::continuum::KernelModel;
use pcaf_core::funcspec::FunctionSpec;
use pcaf_core::simulate::{BinGrid, ProcessModel, Weight};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Scenario {
    OracleSuite(OracleConfig),
    Metric(MetricConfig),
    Classify(ClassifyConfig),
    McConvergence(McScenario),
    Conditions(ConditionsConfig),
    Martingale(MartingaleScenario),
}

impl Scenario {
    pub fn kind(&self) -> &'static str {
        match self {
            Scenario::OracleSuite(_) => "oracle-suite",
            Scenario::Metric(_) => "metric",
            Scenario::Classify(_) => "classify",
            Scenario::McConvergence(_) => "mc-convergence",
            Scenario::Conditions(_) => "conditions",
            Scenario::Martingale(_) => "martingale",
        }
    }

    /// Fill unset options with their defaults.
    pub fn materialize(&mut self) {
        match self {
            Scenario::OracleSuite(c) => c.materialize(),
            Scenario::Metric(c) => c.materialize(),
            Scenario::Classify(c) => c.materialize(),
            Scenario::McConvergence(c) => c.materialize(),
            Scenario::Conditions(c) => c.materialize(),
            Scenario::Martingale(c) => c.materialize(),
        }
    }

    pub fn output(&self) -> Option<&str> {
        let o = match self {
            Scenario::OracleSuite(c) => &c.output,
            Scenario::Metric(c) => &c.output,
            Scenario::Classify(c) => &c.output,
            Scenario::McConvergence(c) => &c.output,
            Scenario::Conditions(c) => &c.output,
            Scenario::Martingale(c) => &c.output,
        };
        o.as_deref()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    pub forms: usize,
    pub max_vertices: usize,
    pub seed: u64,
    /// Metric-equivalence probes.
    pub alphas: Option<Vec<f64>>,
    pub tolerance: Option<f64>,
    /// Random instances carry killing with this probability.
    pub killing_prob: Option<f64>,
    pub output: Option<String>,
}

impl OracleConfig {
    fn materialize(&mut self) {
        self.alphas.get_or_insert_with(|| vec![0.1, 0.5, 2.0, 10.0]);
        self.tolerance.get_or_insert(1e-10);
        self.killing_prob.get_or_insert(0.25);
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricConfig {
    pub model: KernelModel,
    pub alpha: Option<f64>,
    /// Measure documents in the external JSON schema.
    pub measures: Vec<serde_json::Value>,
    pub labels: Option<Vec<String>>,
    pub output: Option<String>,
}

impl MetricConfig {
    fn materialize(&mut self) {
        self.alpha.get_or_insert(1.0);
        if self.labels.is_none() {
            self.labels =
                Some((0..self.measures.len()).map(|i| format!("mu{i}")).collect());
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyConfig {
    pub model: KernelModel,
    pub measures: Vec<serde_json::Value>,
    pub labels: Option<Vec<String>>,
    pub probe_grid: Option<Vec<Vec<f64>>>,
    pub output: Option<String>,
}

impl ClassifyConfig {
    fn materialize(&mut self) {
        if self.labels.is_none() {
            self.labels =
                Some((0..self.measures.len()).map(|i| format!("mu{i}")).collect());
        }
        if self.probe_grid.is_none() {
            // default probes along the first axis
            let dim = self.model.dim();
            let mut grid = Vec::new();
            for i in -20..=20 {
                let mut p = vec![0.0; dim];
                p[0] = i as f64 * 0.25;
                grid.push(p);
            }
            self.probe_grid = Some(grid);
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum McFamilyConfig {
    /// `f_n = min(f, cap_n)` against `min(f, f_cap)`.
    DensityCaps { base: FunctionSpec, caps: Vec<f64>, f_cap: Option<f64>, weight: Option<Weight> },
    /// Uniform windows `[-1/n, 1/n]` against the point mass at 0, through a
    /// shared local-time field.
    UniformWindows { ns: Vec<u32>, bins: Option<BinGrid>, cells_per_window: Option<usize> },
}

// no deny_unknown_fields here: the flattened family tag owns the leftovers
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct McScenario {
    pub model: ProcessModel,
    pub t_max: f64,
    pub dt: f64,
    pub horizon: Option<f64>,
    pub paths: usize,
    pub master_seed: u64,
    pub x0: Option<Vec<f64>>,
    #[serde(flatten)]
    pub family: McFamilyConfig,
    /// Assert the decreasing-trend criteria (strict decrease, paired
    /// two-stderr separation, negative slope).
    pub assert_decreasing: Option<bool>,
    pub output: Option<String>,
}

impl McScenario {
    fn materialize(&mut self) {
        self.horizon.get_or_insert(self.t_max);
        let dim = self.model.dim();
        self.x0.get_or_insert_with(|| vec![0.0; dim]);
        self.assert_decreasing.get_or_insert(true);
        match &mut self.family {
            McFamilyConfig::DensityCaps { f_cap, weight, .. } => {
                f_cap.get_or_insert(1e6);
                weight.get_or_insert(Weight::One);
            }
            McFamilyConfig::UniformWindows { ns, bins, cells_per_window } => {
                cells_per_window.get_or_insert(8);
                if bins.is_none() {
                    // default bin width 10 sqrt(dt), window sized to hold a
                    // Brownian horizon excursion comfortably
                    let width = 10.0 * self.dt.sqrt();
                    let extent = 4.0 * self.t_max.sqrt().max(1.0);
                    *bins = Some(BinGrid::centered_at_zero(extent, width));
                }
                ns.sort_unstable();
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionsConfig {
    /// Either a named corpus entry or an explicit family document.
    pub corpus: Option<CorpusExample>,
    pub family: Option<pcaf_core::conditions::DensityFamily>,
    pub indices: Option<Vec<u32>>,
    pub constants: Option<Vec<f64>>,
    /// Expected membership verdict; when present it becomes an assertion.
    pub expect_in_class: Option<bool>,
    pub output: Option<String>,
}

impl ConditionsConfig {
    fn materialize(&mut self) {
        self.indices
            .get_or_insert_with(|| pcaf_core::conditions::DEFAULT_INDICES.to_vec());
        self.constants
            .get_or_insert_with(|| pcaf_core::conditions::DEFAULT_CONSTANTS.to_vec());
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MartingaleScenario {
    pub f: FunctionSpec,
    pub t_max: f64,
    pub dt: f64,
    pub paths: usize,
    pub master_seed: u64,
    pub x0: Option<f64>,
    pub checkpoints: Option<Vec<f64>>,
    pub output: Option<String>,
}

impl MartingaleScenario {
    fn materialize(&mut self) {
        self.x0.get_or_insert(0.0);
        self.checkpoints
            .get_or_insert_with(|| vec![self.t_max / 4.0, self.t_max / 2.0, self.t_max]);
    }
}

/// Apply `--set key=value` overrides onto the raw JSON document.
pub fn apply_overrides(
    doc: &mut serde_json::Value,
    sets: &[String],
) -> Result<(), String> {
    for entry in sets {
        let (path, raw) = entry
            .split_once('=')
            .ok_or_else(|| format!("override '{entry}' is not key=value"))?;
        let value: serde_json::Value = serde_json::from_str(raw)
            .unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));
        let mut cursor = &mut *doc;
        let segments: Vec<&str> = path.split('.').collect();
        for (i, seg) in segments.iter().enumerate() {
            let last = i + 1 == segments.len();
            if let Ok(idx) = seg.parse::<usize>() {
                let arr = cursor
                    .as_array_mut()
                    .ok_or_else(|| format!("'{path}': segment {seg} indexes a non-array"))?;
                if idx >= arr.len() {
                    return Err(format!("'{path}': index {idx} out of bounds"));
                }
                if last {
                    arr[idx] = value.clone();
                    break;
                }
                cursor = &mut arr[idx];
            } else {
                let obj = cursor
                    .as_object_mut()
                    .ok_or_else(|| format!("'{path}': segment {seg} of a non-object"))?;
                if last {
                    obj.insert(seg.to_string(), value.clone());
                    break;
                }
                cursor = obj
                    .get_mut(*seg)
                    .ok_or_else(|| format!("'{path}': missing key {seg}"))?;
            }
        }
    }
    Ok(())
}
