//! Scenario files: TOML with one table per model, optional sweeps and
//! environment overrides.

use std::path::{Path, PathBuf};

use fockspin::eprb::AnalyzerPair;
use fockspin::field::{CouplingProfile, FieldScenario, LatticeConfig, LatticeScenario, Wavepacket};
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::{CliError, CliResult};
use crate::output::Format;

pub const ENV_PREFIX: &str = "FOCKSPIN_";

pub const DEFAULT_EPRB4: &str = include_str!("../configs/eprb4.toml");
pub const DEFAULT_LATTICE: &str = include_str!("../configs/lattice.toml");
pub const DEFAULT_CONTINUUM: &str = include_str!("../configs/continuum.toml");

pub const DEFAULT_EPSILONS: [f64; 4] = [1e-1, 3e-2, 1e-2, 3e-3];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Eprb4,
    Lattice,
    Continuum,
}

impl Model {
    pub fn key(self) -> &'static str {
        match self {
            Model::Eprb4 => "eprb4",
            Model::Lattice => "lattice",
            Model::Continuum => "continuum",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzerInput {
    pub n1: [f64; 3],
    pub n2: [f64; 3],
}

impl AnalyzerInput {
    pub fn pair(&self) -> fockspin::Result<AnalyzerPair> {
        AnalyzerPair::normalized(self.n1, self.n2)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EprbInput {
    pub gamma: f64,
    #[serde(default)]
    pub analyzers: Option<AnalyzerInput>,
    /// Number of Fibonacci-grid analyzer pairs to evaluate instead of `analyzers`.
    #[serde(default)]
    pub analyzer_grid: Option<usize>,
    #[serde(default)]
    pub noise: f64,
}

impl EprbInput {
    pub fn analyzer_pairs(&self) -> CliResult<Vec<AnalyzerPair>> {
        match (&self.analyzers, self.analyzer_grid) {
            (Some(a), None) => Ok(vec![a.pair()?]),
            (None, Some(n)) if n >= 1 => {
                let dirs = fockspin::eprb::sphere_grid(n);
                Ok((0..n).map(|k| AnalyzerPair { n1: dirs[k], n2: dirs[(7 * k + 3) % n] }).collect())
            }
            (None, Some(_)) => Err(CliError::Usage("analyzer_grid must be at least 1".into())),
            _ => Err(CliError::Usage("eprb4 needs exactly one of `analyzers` and `analyzer_grid`".into())),
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        if !self.gamma.is_finite() {
            return Err(CliError::Usage(format!("gamma must be finite, got {}", self.gamma)));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return Err(CliError::Usage(format!("noise must be nonnegative, got {}", self.noise)));
        }
        self.analyzer_pairs().map(|_| ())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeInput {
    pub sites: usize,
    #[serde(default = "one")]
    pub spacing: f64,
    #[serde(default = "one")]
    pub mass: f64,
    pub packet1: Wavepacket,
    pub packet2: Wavepacket,
    #[serde(default)]
    pub kappa: Option<f64>,
    #[serde(default)]
    pub coupling: Option<Vec<f64>>,
    pub epsilon: f64,
    #[serde(default)]
    pub t0: f64,
    pub t: f64,
    pub analyzers: AnalyzerInput,
}

fn one() -> f64 {
    1.0
}

impl LatticeInput {
    pub fn scenario(&self) -> CliResult<LatticeScenario> {
        let config = LatticeConfig::new(self.sites, self.spacing, self.mass)?;
        let coupling = match (&self.kappa, &self.coupling) {
            (Some(k), None) => vec![*k; self.sites],
            (None, Some(c)) => c.clone(),
            _ => return Err(CliError::Usage("lattice needs exactly one of `kappa` and `coupling`".into())),
        };
        let sc = LatticeScenario {
            config,
            packet1: self.packet1,
            packet2: self.packet2,
            coupling,
            epsilon: self.epsilon,
            t0: self.t0,
            t: self.t,
            analyzers: self.analyzers.pair()?,
        };
        sc.validate()?;
        Ok(sc)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinuumInput {
    pub wp1: Wavepacket,
    pub wp2: Wavepacket,
    pub coupling: CouplingProfile,
    pub epsilon: f64,
    #[serde(default)]
    pub t0: f64,
    pub t: f64,
    pub analyzers: AnalyzerInput,
}

impl ContinuumInput {
    pub fn scenario(&self) -> CliResult<FieldScenario> {
        let s = FieldScenario {
            wp1: self.wp1,
            wp2: self.wp2,
            coupling: self.coupling.clone(),
            epsilon: self.epsilon,
            t0: self.t0,
            t: self.t,
            analyzers: self.analyzers.pair()?,
        };
        s.validate()?;
        Ok(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: String,
    #[serde(default)]
    pub values: Option<Vec<f64>>,
    #[serde(default)]
    pub start: Option<f64>,
    #[serde(default)]
    pub stop: Option<f64>,
    #[serde(default)]
    pub steps: Option<usize>,
}

impl SweepSpec {
    pub fn points(&self) -> CliResult<Vec<f64>> {
        let bad = |msg: &str| CliError::Usage(format!("sweep '{}': {msg}", self.parameter));
        let pts = match (&self.values, self.start, self.stop, self.steps) {
            (Some(v), None, None, None) => v.clone(),
            (None, Some(a), Some(b), Some(n)) => match n {
                0 => return Err(bad("steps must be at least 1")),
                1 => vec![a],
                _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
            },
            _ => return Err(bad("give either `values` or all of `start`, `stop`, `steps`")),
        };
        if pts.is_empty() {
            return Err(bad("range is empty"));
        }
        if pts.iter().any(|v| !v.is_finite()) {
            return Err(bad("values must be finite"));
        }
        Ok(pts)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<Format>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeCompareSection {
    pub epsilons: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    model: Model,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    output: OutputSection,
    #[serde(default)]
    sweep: Vec<SweepSpec>,
    #[serde(default)]
    eprb4: Option<EprbInput>,
    #[serde(default)]
    lattice: Option<LatticeInput>,
    #[serde(default)]
    continuum: Option<ContinuumInput>,
    #[serde(default)]
    lattice_compare: Option<LatticeCompareSection>,
}

/// A loaded scenario file with the model table kept as a TOML tree so sweep
/// points can be substituted into it.
#[derive(Clone, Debug)]
pub struct ScenarioConfig {
    pub model: Model,
    pub seed: Option<u64>,
    pub output: OutputSection,
    pub sweeps: Vec<SweepSpec>,
    pub lattice_compare: Option<LatticeCompareSection>,
    section: Value,
}

/// One resolved point of the sweep grid.
#[derive(Clone, Debug)]
pub struct SweepPoint {
    pub index: usize,
    /// (parameter, value) for every sweep, in declaration order.
    pub params: Vec<(String, f64)>,
    pub section: Value,
}

impl ScenarioConfig {
    pub fn from_path(path: &Path, env: &[(String, String)]) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path.display().to_string(), e))?;
        Self::from_str(&path.display().to_string(), &text, env)
    }

    pub fn from_str(source: &str, text: &str, env: &[(String, String)]) -> CliResult<Self> {
        let mut table: Table = text.parse().map_err(|e| CliError::parse(source, e))?;
        let overrides = env_overrides(env)?;
        // Without overrides, deserialising the text keeps line numbers in errors.
        let file: ConfigFile = if overrides.is_empty() {
            toml::from_str(text).map_err(|e| CliError::parse(source, e))?
        } else {
            for (path, value) in &overrides {
                set_path(&mut table, path, value.clone())
                    .map_err(|m| CliError::parse("environment", format!("{}: {m}", path.join("."))))?;
            }
            Value::Table(table.clone())
                .try_into()
                .map_err(|e| CliError::parse(format!("{source} (with environment overrides)"), e))?
        };
        let key = file.model.key();
        let present = match file.model {
            Model::Eprb4 => file.eprb4.as_ref().map(|e| e.validate()).transpose()?.is_some(),
            Model::Lattice => file.lattice.is_some(),
            Model::Continuum => file.continuum.is_some(),
        };
        if !present {
            return Err(CliError::parse(source, format!("model is '{key}' but there is no [{key}] table")));
        }
        let section = table.get(key).cloned().expect("checked above");
        for s in &file.sweep {
            s.points()?;
            let leaf = get_path(&section, &split_path(&s.parameter))
                .ok_or_else(|| CliError::Usage(format!("sweep parameter '{}' does not exist in [{key}]", s.parameter)))?;
            if !matches!(leaf, Value::Float(_) | Value::Integer(_)) {
                return Err(CliError::Usage(format!("sweep parameter '{}' is not a number", s.parameter)));
            }
        }
        if let Some(lc) = &file.lattice_compare {
            if lc.epsilons.is_empty() || lc.epsilons.iter().any(|e| !e.is_finite()) {
                return Err(CliError::Usage("lattice_compare.epsilons must be a nonempty list of finite values".into()));
            }
        }
        Ok(ScenarioConfig {
            model: file.model,
            seed: file.seed,
            output: file.output,
            sweeps: file.sweep,
            lattice_compare: file.lattice_compare,
            section,
        })
    }

    /// The built-in example for `model`.
    pub fn default_for(model: Model, env: &[(String, String)]) -> CliResult<Self> {
        let text = match model {
            Model::Eprb4 => DEFAULT_EPRB4,
            Model::Lattice => DEFAULT_LATTICE,
            Model::Continuum => DEFAULT_CONTINUUM,
        };
        Self::from_str(&format!("built-in {} example", model.key()), text, env)
    }

    #[cfg(test)]
    pub fn section(&self) -> &Value {
        &self.section
    }

    /// Cartesian product of the sweeps, first sweep outermost. A config
    /// without sweeps has a single point.
    pub fn points(&self) -> CliResult<Vec<SweepPoint>> {
        let axes: Vec<(String, Vec<f64>)> =
            self.sweeps.iter().map(|s| Ok((s.parameter.clone(), s.points()?))).collect::<CliResult<_>>()?;
        let total: usize = axes.iter().map(|(_, v)| v.len()).product();
        let mut out = Vec::with_capacity(total);
        for index in 0..total {
            let mut rem = index;
            let mut params = vec![(String::new(), 0.0); axes.len()];
            for (k, (name, vals)) in axes.iter().enumerate().rev() {
                params[k] = (name.clone(), vals[rem % vals.len()]);
                rem /= vals.len();
            }
            let mut section = self.section.clone();
            for (name, v) in &params {
                substitute(&mut section, name, *v)?;
            }
            out.push(SweepPoint { index, params, section });
        }
        Ok(out)
    }
}

impl SweepPoint {
    pub fn decode<T: serde::de::DeserializeOwned>(&self) -> CliResult<T> {
        self.section
            .clone()
            .try_into()
            .map_err(|e| CliError::Usage(format!("sweep point {} {:?}: {e}", self.index, self.params)))
    }
}

fn split_path(p: &str) -> Vec<String> {
    p.split('.').map(str::to_string).collect()
}

fn get_path<'a>(v: &'a Value, path: &[String]) -> Option<&'a Value> {
    path.iter().try_fold(v, |cur, seg| match cur {
        Value::Table(t) => t.get(seg),
        Value::Array(a) => seg.parse::<usize>().ok().and_then(|i| a.get(i)),
        _ => None,
    })
}

/// Replace an existing numeric leaf; integer leaves only take integral values.
fn substitute(section: &mut Value, name: &str, v: f64) -> CliResult<()> {
    let path = split_path(name);
    let mut cur = section;
    for seg in &path {
        cur = match cur {
            Value::Table(t) => t.get_mut(seg),
            Value::Array(a) => seg.parse::<usize>().ok().and_then(|i| a.get_mut(i)),
            _ => None,
        }
        .ok_or_else(|| CliError::Usage(format!("sweep parameter '{name}' does not exist")))?;
    }
    *cur = match cur {
        Value::Integer(_) if v.fract() == 0.0 && v.abs() < 9.0e15 => Value::Integer(v as i64),
        Value::Integer(_) => return Err(CliError::Usage(format!("sweep parameter '{name}' needs integer values, got {v}"))),
        _ => Value::Float(v),
    };
    Ok(())
}

/// `FOCKSPIN_A__B=v` sets key `a.b`; the value is read as TOML and falls back
/// to a plain string.
pub fn env_overrides(env: &[(String, String)]) -> CliResult<Vec<(Vec<String>, Value)>> {
    let mut out = Vec::new();
    for (k, v) in env {
        let Some(rest) = k.strip_prefix(ENV_PREFIX) else { continue };
        let path: Vec<String> = rest.split("__").map(|s| s.to_ascii_lowercase()).collect();
        if path.iter().any(String::is_empty) {
            return Err(CliError::parse("environment", format!("malformed override key {k}")));
        }
        let value = format!("v = {v}")
            .parse::<Table>()
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| Value::String(v.clone()));
        out.push((path, value));
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out)
}

/// Set `path` in `table`, creating intermediate tables.
fn set_path(table: &mut Table, path: &[String], value: Value) -> Result<(), String> {
    let (first, rest) = path.split_first().ok_or("empty key")?;
    let Some((last, mid)) = rest.split_last() else {
        table.insert(first.clone(), value);
        return Ok(());
    };
    let mut cur = table.entry(first.clone()).or_insert_with(|| Value::Table(Table::new()));
    for seg in mid {
        cur = match cur {
            Value::Table(t) => t.entry(seg.clone()).or_insert_with(|| Value::Table(Table::new())),
            Value::Array(a) => array_slot(a, seg)?,
            _ => return Err(format!("'{seg}' is below a non-table value")),
        };
    }
    match cur {
        Value::Table(t) => {
            t.insert(last.clone(), value);
        }
        Value::Array(a) => *array_slot(a, last)? = value,
        _ => return Err(format!("'{last}' is below a non-table value")),
    }
    Ok(())
}

fn array_slot<'a>(a: &'a mut [Value], seg: &str) -> Result<&'a mut Value, String> {
    let i: usize = seg.parse().map_err(|_| format!("'{seg}' is not an array index"))?;
    a.get_mut(i).ok_or_else(|| format!("index {i} out of range"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn built_in_examples_load() {
        for m in [Model::Eprb4, Model::Lattice, Model::Continuum] {
            let c = ScenarioConfig::default_for(m, &[]).unwrap();
            assert_eq!(c.model, m);
            assert!(!c.points().unwrap().is_empty());
        }
    }

    #[test]
    fn sweep_grid_order_and_substitution() {
        let text = r#"
model = "eprb4"
[eprb4]
gamma = 0.0
analyzers = { n1 = [0.0, 0.0, 1.0], n2 = [1.0, 0.0, 0.0] }
[[sweep]]
parameter = "gamma"
values = [0.1, 0.2]
[[sweep]]
parameter = "analyzers.n2.2"
start = 0.0
stop = 1.0
steps = 3
"#;
        let c = ScenarioConfig::from_str("t", text, &[]).unwrap();
        let pts = c.points().unwrap();
        assert_eq!(pts.len(), 6);
        assert_eq!(pts[4].params, vec![("gamma".to_string(), 0.2), ("analyzers.n2.2".to_string(), 0.5)]);
        let e: EprbInput = pts[4].decode().unwrap();
        assert_eq!(e.gamma, 0.2);
        assert_eq!(e.analyzers.unwrap().n2, [1.0, 0.0, 0.5]);
    }

    #[test]
    fn parse_errors_carry_location() {
        let text = "model = \"eprb4\"\n[eprb4]\ngamma = \"x\"\nanalyzers = { n1 = [0.0, 0.0, 1.0], n2 = [0.0, 0.0, 1.0] }\n";
        let err = ScenarioConfig::from_str("cfg.toml", text, &[]).unwrap_err().to_string();
        assert!(err.contains("cfg.toml") && err.contains("line 3"), "{err}");
        let err = ScenarioConfig::from_str("cfg.toml", "model = [", &[]).unwrap_err().to_string();
        assert!(err.contains("line 1"), "{err}");
    }

    #[test]
    fn unknown_and_missing_parameters_rejected() {
        let base = "model = \"eprb4\"\n[eprb4]\ngamma = 0.1\nanalyzer_grid = 4\n";
        assert!(matches!(
            ScenarioConfig::from_str("t", &format!("{base}[[sweep]]\nparameter = \"theta\"\nvalues = [1.0]\n"), &[]),
            Err(CliError::Usage(_))
        ));
        assert!(matches!(
            ScenarioConfig::from_str("t", &format!("{base}[[sweep]]\nparameter = \"gamma\"\nvalues = []\n"), &[]),
            Err(CliError::Usage(_))
        ));
        assert!(matches!(ScenarioConfig::from_str("t", "model = \"lattice\"\n", &[]), Err(CliError::Parse { .. })));
        assert!(ScenarioConfig::from_str("t", &format!("{base}typo = 1\n"), &[]).is_err());
    }

    #[test]
    fn environment_overrides_nested_keys() {
        let e = env(&[("FOCKSPIN_EPRB4__GAMMA", "0.5"), ("FOCKSPIN_SEED", "9"), ("OTHER", "x")]);
        let c = ScenarioConfig::default_for(Model::Eprb4, &e).unwrap();
        assert_eq!(c.seed, Some(9));
        assert_eq!(c.section().get("gamma").unwrap().as_float(), Some(0.5));
        let e = env(&[("FOCKSPIN_LATTICE__PACKET1__CENTER__0", "2.0")]);
        let c = ScenarioConfig::default_for(Model::Lattice, &e).unwrap();
        let l: LatticeInput = c.points().unwrap()[0].decode().unwrap();
        assert_eq!(l.packet1.center[0], 2.0);
        let e = env(&[("FOCKSPIN_EPRB4__BOGUS", "1")]);
        assert!(ScenarioConfig::default_for(Model::Eprb4, &e).is_err());
    }

    #[test]
    fn integer_leaves_take_integral_values() {
        let c = ScenarioConfig::default_for(Model::Lattice, &[]).unwrap();
        let mut s = c.section().clone();
        substitute(&mut s, "sites", 6.0).unwrap();
        assert_eq!(s.get("sites").unwrap().as_integer(), Some(6));
        assert!(substitute(&mut s, "sites", 6.5).is_err());
    }
}
