use std::fmt;

use serde::Deserialize;

use crate::agents::{MeasurementEvent, Scenario};
use crate::bell::{make_phi_plus, make_product};
use crate::linalg::{ComplexMatrix, ComplexVector, C64};
use crate::microcausality::LatticeNet;
use crate::quantum::{DensityOperator, MeasurementModel, Target};
use crate::spacetime::{Event, Region, WorldLine};

/// A configuration problem, located by its JSON path.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl fmt::Display) -> Self {
        Self {
            path: path.into(),
            message: message.to_string(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() || self.path == "." {
            write!(f, "{}", self.message)
        } else {
            write!(f, "at `{}`: {}", self.path, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub preparation: Option<PreparationConfig>,
    #[serde(default)]
    pub geometry: Option<GeometryConfig>,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub net: Option<NetConfig>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreparationConfig {
    pub state: StateSpec,
    /// Second preparation for `do(Λ)` comparisons.
    #[serde(default)]
    pub alternative: Option<StateSpec>,
}

/// Either a named state (`"phi_plus"`, `"product(θ1,θ2)"`, `"polarized(θ)"`,
/// `"bell_pairs(n)"`) or an explicit density matrix.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum StateSpec {
    Named(String),
    Density(DensitySpec),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensitySpec {
    pub density: Vec<Vec<[f64; 2]>>,
    #[serde(default)]
    pub dims: Option<Vec<usize>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    #[serde(default = "default_spatial_dims")]
    pub spatial_dims: usize,
    pub preparation_region: RegionConfig,
    pub events: Vec<EventConfig>,
    #[serde(default)]
    pub agents: Vec<AgentConfig>,
}

fn default_spatial_dims() -> usize {
    1
}

/// Box region; `half_widths[0]` is temporal.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionConfig {
    pub t: f64,
    pub x: Vec<f64>,
    pub half_widths: Vec<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointConfig {
    pub t: f64,
    pub x: Vec<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventConfig {
    pub label: String,
    pub t: f64,
    pub x: Vec<f64>,
    #[serde(default)]
    pub setting_angle: Option<f64>,
    #[serde(default = "default_kind")]
    pub kind: String,
    /// Subsystem index; omitted means the operators act on the whole register.
    #[serde(default)]
    pub target: Option<usize>,
    #[serde(default)]
    pub operators: Vec<OperatorConfig>,
    pub outcome: String,
}

fn default_kind() -> String {
    "projective_polarization".into()
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorConfig {
    pub outcome: String,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentConfig {
    pub name: String,
    pub points: Vec<PointConfig>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Restricts the report to these check keys.
    #[serde(default)]
    pub checks: Option<Vec<String>>,
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub alice_angles: Option<AngleSpec>,
    #[serde(default)]
    pub bob_angles: Option<AngleSpec>,
    /// Bob settings for the `do(b)` sweep.
    #[serde(default)]
    pub b_sweep: Option<AngleSpec>,
    /// Points per axis of the CHSH optimizer's starting grid.
    #[serde(default)]
    pub chsh_grid: Option<usize>,
    /// Number of random setting quadruples checked against the Tsirelson bound.
    #[serde(default)]
    pub chsh_samples: Option<usize>,
}

/// Explicit `values`, or `start`/`stop`/`step` with `stop` excluded.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AngleSpec {
    #[serde(default)]
    pub values: Option<Vec<f64>>,
    #[serde(default)]
    pub start: Option<f64>,
    #[serde(default)]
    pub stop: Option<f64>,
    #[serde(default)]
    pub step: Option<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetConfig {
    pub sites: Vec<PointConfig>,
    #[serde(default = "default_site_dim")]
    pub site_dim: usize,
    pub regions: Vec<NamedRegionConfig>,
    #[serde(default)]
    pub support_overrides: Vec<SupportOverride>,
    #[serde(default)]
    pub state: Option<StateSpec>,
    #[serde(default)]
    pub bell_pairs: Vec<[String; 2]>,
    /// Fails the run if a Bell search finds less than this.
    #[serde(default)]
    pub bell_min: Option<f64>,
}

fn default_site_dim() -> usize {
    2
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedRegionConfig {
    pub name: String,
    pub t: f64,
    pub x: Vec<f64>,
    pub half_widths: Vec<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SupportOverride {
    pub region: String,
    pub sites: Vec<usize>,
}

impl ScenarioConfig {
    /// Parses a JSON document; errors carry the field path and line/column.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            ConfigError::new(path, e.into_inner())
        })?;
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if let Some(tol) = self.analysis.tolerance {
            check_tolerance(tol, "analysis.tolerance")?;
        }
        for (spec, path) in [
            (&self.analysis.alice_angles, "analysis.alice_angles"),
            (&self.analysis.bob_angles, "analysis.bob_angles"),
            (&self.analysis.b_sweep, "analysis.b_sweep"),
        ] {
            if let Some(spec) = spec {
                spec.expand(path)?;
            }
        }
        Ok(())
    }

    pub fn preparation(&self) -> Result<&PreparationConfig, ConfigError> {
        self.preparation
            .as_ref()
            .ok_or_else(|| ConfigError::new("preparation", "missing section"))
    }

    pub fn state(&self) -> Result<DensityOperator, ConfigError> {
        self.preparation()?.state.build("preparation.state")
    }

    pub fn alice_angles(&self) -> Result<Vec<f64>, ConfigError> {
        expand_or_zero(&self.analysis.alice_angles, "analysis.alice_angles")
    }

    pub fn bob_angles(&self) -> Result<Vec<f64>, ConfigError> {
        expand_or_zero(&self.analysis.bob_angles, "analysis.bob_angles")
    }

    /// Builds the measurement scenario from the `geometry` section.
    pub fn scenario(&self) -> Result<Scenario, ConfigError> {
        let geometry = self
            .geometry
            .as_ref()
            .ok_or_else(|| ConfigError::new("geometry", "missing section"))?;
        let state = self.state()?;
        let d = geometry.spatial_dims;
        let prep = geometry
            .preparation_region
            .build(d, "geometry.preparation_region")?;
        let events = geometry
            .events
            .iter()
            .enumerate()
            .map(|(i, ev)| ev.build(d, &format!("geometry.events[{i}]")))
            .collect::<Result<Vec<_>, _>>()?;
        let agents = geometry
            .agents
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let path = format!("geometry.agents[{i}]");
                let points = a
                    .points
                    .iter()
                    .enumerate()
                    .map(|(k, p)| p.build(d, &format!("{path}.points[{k}]")))
                    .collect::<Result<Vec<_>, _>>()?;
                let line = WorldLine::new(points).map_err(|e| ConfigError::new(&path, e))?;
                Ok((a.name.clone(), line))
            })
            .collect::<Result<Vec<_>, ConfigError>>()?;
        Scenario::new(state, prep, events, agents).map_err(|e| ConfigError::new("geometry", e))
    }

    pub fn net(&self) -> Result<&NetConfig, ConfigError> {
        self.net
            .as_ref()
            .ok_or_else(|| ConfigError::new("net", "missing section"))
    }
}

fn check_tolerance(tol: f64, path: &str) -> Result<(), ConfigError> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::new(path, format!("tolerance must be positive, got {tol}")))
    }
}

pub(crate) fn check_cli_tolerance(tol: f64) -> Result<(), ConfigError> {
    check_tolerance(tol, "--tol")
}

fn expand_or_zero(spec: &Option<AngleSpec>, path: &str) -> Result<Vec<f64>, ConfigError> {
    match spec {
        Some(s) => s.expand(path),
        None => Ok(vec![0.0]),
    }
}

impl AngleSpec {
    pub fn expand(&self, path: &str) -> Result<Vec<f64>, ConfigError> {
        let angles = match (&self.values, self.start, self.stop, self.step) {
            (Some(v), None, None, None) => v.clone(),
            (None, Some(start), Some(stop), Some(step)) => {
                if !(step > 0.0 && step.is_finite()) || !start.is_finite() || !stop.is_finite() {
                    return Err(ConfigError::new(
                        format!("{path}.step"),
                        "step must be positive and bounds finite",
                    ));
                }
                let n = ((stop - start) / step - 1e-9).ceil().max(0.0) as usize;
                if n > 100_000 {
                    return Err(ConfigError::new(path, format!("{n} angles is too many")));
                }
                (0..n).map(|k| start + k as f64 * step).collect()
            }
            _ => {
                return Err(ConfigError::new(
                    path,
                    "give either `values` or all of `start`, `stop`, `step`",
                ))
            }
        };
        if angles.is_empty() {
            return Err(ConfigError::new(path, "empty angle grid"));
        }
        if let Some(k) = angles.iter().position(|a| !a.is_finite()) {
            return Err(ConfigError::new(format!("{path}.values[{k}]"), "angle is not finite"));
        }
        Ok(angles)
    }
}

impl StateSpec {
    /// Label used in reports.
    pub fn name(&self) -> String {
        match self {
            StateSpec::Named(n) => n.split_whitespace().collect(),
            StateSpec::Density(_) => "density".into(),
        }
    }

    pub fn build(&self, path: &str) -> Result<DensityOperator, ConfigError> {
        match self {
            StateSpec::Named(name) => named_state(name).map_err(|m| ConfigError::new(path, m)),
            StateSpec::Density(spec) => {
                let matrix = complex_matrix(&spec.density, &format!("{path}.density"))?;
                let dims = match &spec.dims {
                    Some(d) => d.clone(),
                    None => qubit_dims(matrix.rows()).ok_or_else(|| {
                        ConfigError::new(format!("{path}.dims"), "needed for non-qubit registers")
                    })?,
                };
                DensityOperator::new(matrix, dims).map_err(|e| ConfigError::new(path, e))
            }
        }
    }
}

fn qubit_dims(n: usize) -> Option<Vec<usize>> {
    (n >= 2 && n.is_power_of_two()).then(|| vec![2; n.trailing_zeros() as usize])
}

fn named_state(name: &str) -> Result<DensityOperator, String> {
    let name = name.trim();
    if name == "phi_plus" {
        return Ok(make_phi_plus());
    }
    let (head, args) = name
        .strip_suffix(')')
        .and_then(|s| s.split_once('('))
        .ok_or_else(|| format!("unknown state `{name}`"))?;
    let numbers = args
        .split(',')
        .map(|a| a.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| format!("bad argument in `{name}`: {e}"))?;
    match (head.trim(), numbers.as_slice()) {
        ("product", &[l, r]) if l.is_finite() && r.is_finite() => Ok(make_product(l, r)),
        ("polarized", &[theta]) if theta.is_finite() => {
            let ket = ComplexVector::from_real(&[theta.cos(), theta.sin()]);
            DensityOperator::pure(&ket, vec![2]).map_err(|e| e.to_string())
        }
        ("bell_pairs", &[n]) if (1.0..=3.0).contains(&n) && n.fract() == 0.0 => {
            let phi = make_phi_plus();
            let copies = vec![&phi; n as usize];
            Ok(DensityOperator::product(&copies))
        }
        _ => Err(format!("unknown state `{name}`")),
    }
}

fn complex_matrix(rows: &[Vec<[f64; 2]>], path: &str) -> Result<ComplexMatrix, ConfigError> {
    let n = rows.len();
    let mut data = Vec::with_capacity(n * n);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(ConfigError::new(
                format!("{path}[{i}]"),
                format!("row has {} entries, expected {n}", row.len()),
            ));
        }
        data.extend(row.iter().map(|&[re, im]| C64::new(re, im)));
    }
    ComplexMatrix::new(n, n, data).map_err(|e| ConfigError::new(path, e))
}

impl PointConfig {
    pub fn build(&self, spatial_dims: usize, path: &str) -> Result<Event, ConfigError> {
        event(self.t, &self.x, spatial_dims, path)
    }
}

fn event(t: f64, x: &[f64], spatial_dims: usize, path: &str) -> Result<Event, ConfigError> {
    if x.len() != spatial_dims {
        return Err(ConfigError::new(
            format!("{path}.x"),
            format!("expected {spatial_dims} spatial coordinates, got {}", x.len()),
        ));
    }
    let e = Event::new(t, x.to_vec());
    if !e.is_finite() {
        return Err(ConfigError::new(path, "coordinates must be finite"));
    }
    Ok(e)
}

impl RegionConfig {
    pub fn build(&self, spatial_dims: usize, path: &str) -> Result<Region, ConfigError> {
        let center = event(self.t, &self.x, spatial_dims, path)?;
        Region::new(center, self.half_widths.clone())
            .map_err(|e| ConfigError::new(format!("{path}.half_widths"), e))
    }
}

impl NamedRegionConfig {
    pub fn build(&self, spatial_dims: usize, path: &str) -> Result<Region, ConfigError> {
        RegionConfig {
            t: self.t,
            x: self.x.clone(),
            half_widths: self.half_widths.clone(),
        }
        .build(spatial_dims, path)
    }
}

impl EventConfig {
    pub fn build(&self, spatial_dims: usize, path: &str) -> Result<MeasurementEvent, ConfigError> {
        let location = event(self.t, &self.x, spatial_dims, path)?;
        let target = self.target.map_or(Target::Full, Target::Subsystem);
        let (model, setting) = match self.kind.as_str() {
            "projective_polarization" => {
                let theta = self.setting_angle.ok_or_else(|| {
                    ConfigError::new(format!("{path}.setting_angle"), "required for polarization events")
                })?;
                if !theta.is_finite() {
                    return Err(ConfigError::new(format!("{path}.setting_angle"), "angle is not finite"));
                }
                (MeasurementModel::polarization(theta, target), format!("{theta}"))
            }
            "operators" => {
                let ops = self
                    .operators
                    .iter()
                    .enumerate()
                    .map(|(k, op)| {
                        let m = complex_matrix(&op.matrix, &format!("{path}.operators[{k}].matrix"))?;
                        Ok((op.outcome.clone(), m))
                    })
                    .collect::<Result<Vec<_>, ConfigError>>()?;
                let model = MeasurementModel::new(self.label.clone(), ops, target)
                    .map_err(|e| ConfigError::new(format!("{path}.operators"), e))?;
                let setting = self
                    .setting_angle
                    .map_or_else(|| model.label().to_string(), |a| format!("{a}"));
                (model, setting)
            }
            other => {
                return Err(ConfigError::new(
                    format!("{path}.kind"),
                    format!("unknown kind `{other}`"),
                ))
            }
        };
        let outcome = model
            .outcome_index(&self.outcome)
            .map_err(|e| ConfigError::new(format!("{path}.outcome"), e))?;
        MeasurementEvent::new(self.label.clone(), location, model, outcome)
            .map(|e| e.with_setting_label(setting))
            .map_err(|e| ConfigError::new(path, e))
    }
}

impl NetConfig {
    pub fn build(&self) -> Result<(LatticeNet, Vec<(String, Region)>), ConfigError> {
        let d = self.sites.first().map_or(1, |s| s.x.len());
        let sites = self
            .sites
            .iter()
            .enumerate()
            .map(|(i, s)| s.build(d, &format!("net.sites[{i}]")))
            .collect::<Result<Vec<_>, _>>()?;
        let mut net = LatticeNet::new(sites, self.site_dim).map_err(|e| ConfigError::new("net.sites", e))?;
        let mut regions: Vec<(String, Region)> = Vec::with_capacity(self.regions.len());
        for (i, r) in self.regions.iter().enumerate() {
            let path = format!("net.regions[{i}]");
            if regions.iter().any(|(n, _)| *n == r.name) {
                return Err(ConfigError::new(format!("{path}.name"), format!("duplicate region `{}`", r.name)));
            }
            regions.push((r.name.clone(), r.build(d, &path)?));
        }
        for (i, o) in self.support_overrides.iter().enumerate() {
            let path = format!("net.support_overrides[{i}]");
            let region = lookup_region(&regions, &o.region, &format!("{path}.region"))?;
            if let Some(&s) = o.sites.iter().find(|&&s| s >= self.sites.len()) {
                return Err(ConfigError::new(format!("{path}.sites"), format!("no site {s}")));
            }
            net = net.with_support_override(region.clone(), o.sites.iter().copied().collect());
        }
        for (i, [r1, r2]) in self.bell_pairs.iter().enumerate() {
            lookup_region(&regions, r1, &format!("net.bell_pairs[{i}][0]"))?;
            lookup_region(&regions, r2, &format!("net.bell_pairs[{i}][1]"))?;
        }
        Ok((net, regions))
    }

    pub fn state(&self, net: &LatticeNet) -> Result<Option<DensityOperator>, ConfigError> {
        let Some(spec) = &self.state else {
            return Ok(None);
        };
        let state = spec.build("net.state")?;
        if state.dims() != net.dims().as_slice() {
            return Err(ConfigError::new(
                "net.state",
                format!("state has factors {:?}, net has {:?}", state.dims(), net.dims()),
            ));
        }
        Ok(Some(state))
    }
}

pub(crate) fn lookup_region<'a>(
    regions: &'a [(String, Region)],
    name: &str,
    path: &str,
) -> Result<&'a Region, ConfigError> {
    regions
        .iter()
        .find(|(n, _)| n == name)
        .map(|(_, r)| r)
        .ok_or_else(|| ConfigError::new(path, format!("unknown region `{name}`")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn malformed_angle_reports_its_path() {
        let text = r#"{"preparation": {"state": "phi_plus"},
                       "analysis": {"alice_angles": {"values": [0.0, "wide"]}}}"#;
        let err = ScenarioConfig::from_json(text).unwrap_err();
        assert_eq!(err.path, "analysis.alice_angles.values[1]");
        assert!(err.message.contains("line 2"), "{}", err.message);
    }

    #[test]
    fn range_grid_excludes_stop() {
        let spec = AngleSpec {
            start: Some(0.0),
            stop: Some(std::f64::consts::PI),
            step: Some(std::f64::consts::PI / 36.0),
            ..Default::default()
        };
        assert_eq!(spec.expand("g").unwrap().len(), 36);
    }

    #[test]
    fn named_states() {
        assert_eq!(named_state("phi_plus").unwrap().dims(), &[2, 2]);
        assert_eq!(named_state("product(0, 1.5)").unwrap().dims(), &[2, 2]);
        assert_eq!(named_state("polarized(0.3)").unwrap().dims(), &[2]);
        assert_eq!(named_state("bell_pairs(2)").unwrap().dims(), &[2, 2, 2, 2]);
        assert!(named_state("product(0)").is_err());
        assert!(named_state("ghz").is_err());
    }

    #[test]
    fn explicit_density_defaults_to_qubits() {
        let text = r#"{"preparation": {"state": {"density": [
            [[0.5,0],[0,0],[0,0],[0.5,0]],
            [[0,0],[0,0],[0,0],[0,0]],
            [[0,0],[0,0],[0,0],[0,0]],
            [[0.5,0],[0,0],[0,0],[0.5,0]]]}}}"#;
        let cfg = ScenarioConfig::from_json(text).unwrap();
        let rho = cfg.state().unwrap();
        assert_eq!(rho.dims(), &[2, 2]);
        assert!(rho.matrix().approx_eq(make_phi_plus().matrix(), 1e-15));
    }

    #[test]
    fn nonpositive_tolerance_is_rejected() {
        let err = ScenarioConfig::from_json(r#"{"analysis": {"tolerance": 0}}"#).unwrap_err();
        assert_eq!(err.path, "analysis.tolerance");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let err = ScenarioConfig::from_json(r#"{"analysis": {"tolerence": 1e-9}}"#).unwrap_err();
        assert_eq!(err.path, "analysis.tolerence");
    }
}
