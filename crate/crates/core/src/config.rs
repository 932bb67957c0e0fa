//! Declarative run configuration, loaded from JSON.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize};
use sha2::{Digest, Sha256};

use crate::dynamics::{IntegratorConfig, SystemKind, SystemSpec};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::presets::Preset;
use crate::snapshot::{load_snapshot, read_header, SnapshotHeader};
use crate::state::{Params, WaveState};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Points per axis.
    pub n: Vec<usize>,
    /// Period per axis.
    pub length: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotRef {
    pub snapshot: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum InitialData {
    Preset(Preset),
    Snapshot(SnapshotRef),
}

// Dispatch on the `snapshot` key so that preset errors keep serde's field names.
impl<'de> Deserialize<'de> for InitialData {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let value = serde_json::Value::deserialize(d)?;
        if value.get("snapshot").is_some() {
            serde_json::from_value(value).map(InitialData::Snapshot).map_err(D::Error::custom)
        } else {
            serde_json::from_value(value).map(InitialData::Preset).map_err(D::Error::custom)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    Kappa,
    Mu,
    N,
    Dt,
    Amplitude,
}

/// Norm used to compare a sweep point against its reference run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "norm", rename_all = "snake_case", deny_unknown_fields)]
pub enum ComparisonNorm {
    /// `(||theta||^2_{L^2} + ||K^-1 w||^2_{L^2})^{1/2}`.
    L2xH12,
    /// The energy norm with `kappa = 1`, `s = 1/2`.
    H1xH12,
    /// `H_kappa^{s+1/2} x H^s`.
    HsKappa { s: f64, kappa: f64 },
    /// `H^{r+1/2} x H^r`.
    Sobolev { r: f64 },
}

/// Study-specific settings. Each study reads the keys it needs and fills
/// the rest with defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep_param: Option<SweepParam>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comparison_norm: Option<ComparisonNorm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub kappas: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sizes: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemKind,
    pub grid: GridConfig,
    pub params: Params,
    pub initial_data: InitialData,
    pub integrator: IntegratorConfig,
    pub horizon: f64,
    pub report_every: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    /// Write a WBSNAP1 file at every report time.
    #[serde(default)]
    pub snapshots: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub study: Option<StudyConfig>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| {
            let line = text.lines().nth(e.line().saturating_sub(1)).unwrap_or("").trim();
            Error::Config(format!("{e}; near `{line}`"))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)?;
        // relative snapshot paths are taken relative to the config file
        if let InitialData::Snapshot(s) = &mut cfg.initial_data {
            if s.snapshot.is_relative() {
                if let Some(dir) = path.parent() {
                    s.snapshot = dir.join(&s.snapshot);
                }
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let dim = self.system.dim();
        if self.grid.n.len() != dim || self.grid.length.len() != dim {
            return Err(Error::Config(format!(
                "grid: system {:?} needs {dim} entries in `n` and `length`",
                self.system
            )));
        }
        self.grid()?;
        self.spec()?;
        self.integrator.validate()?;
        if !(self.horizon >= 0.0 && self.horizon.is_finite()) {
            return Err(Error::param("horizon", self.horizon, "must be finite and >= 0"));
        }
        if !(self.report_every > 0.0 && self.report_every.is_finite()) {
            return Err(Error::param("report_every", self.report_every, "must be positive and finite"));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Arc<Grid>> {
        Grid::new(&self.grid.n, &self.grid.length)
    }

    pub fn spec(&self) -> Result<SystemSpec> {
        let dim = self.system.dim();
        match self.system {
            SystemKind::Wb1dRegularized => SystemSpec::new(dim, self.params, true),
            SystemKind::Wb1d if self.params.mu > 0.0 => Err(Error::param(
                "mu",
                self.params.mu,
                "system wb1d is unregularized; use wb1d_regularized for mu > 0",
            )),
            _ => SystemSpec::from_params(dim, self.params),
        }
    }

    pub fn initial_state(&self) -> Result<WaveState> {
        let grid = self.grid()?;
        match &self.initial_data {
            InitialData::Preset(p) => p.build(&grid),
            InitialData::Snapshot(s) => {
                let st = load_snapshot(&s.snapshot)?;
                if st.grid().shape() != grid.shape() || st.grid().lengths() != grid.lengths() {
                    return Err(Error::Config(format!(
                        "initial_data: snapshot {} has grid {:?} x {:?}, config asks for {:?} x {:?}",
                        s.snapshot.display(),
                        st.grid().shape(),
                        st.grid().lengths(),
                        grid.shape(),
                        grid.lengths()
                    )));
                }
                // rebind to the config's grid so that states compare as same-grid
                let eta = crate::field::Field::new(grid.clone(), st.eta.values().to_vec())?;
                let vel = st
                    .vel
                    .iter()
                    .map(|v| crate::field::Field::new(grid.clone(), v.values().to_vec()))
                    .collect::<Result<Vec<_>>>()?;
                WaveState::new(eta, vel, st.time)
            }
        }
    }

    pub fn snapshot_header(&self) -> Result<Option<SnapshotHeader>> {
        match &self.initial_data {
            InitialData::Snapshot(s) => {
                let mut f = std::io::BufReader::new(std::fs::File::open(&s.snapshot)?);
                read_header(&mut f).map(Some)
            }
            InitialData::Preset(_) => Ok(None),
        }
    }

    /// SHA-256 of the canonical JSON serialization.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn study(&self) -> StudyConfig {
        self.study.clone().unwrap_or_default()
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) const SMALL: &str = r#"{
        "system": "wb1d",
        "grid": {"n": [64], "length": [6.283185307179586]},
        "params": {"kappa": 1.0},
        "initial_data": {"preset": "single_mode", "amplitude": 0.1, "mode": 1},
        "integrator": {"method": "exponential_rk4", "dt": 0.01},
        "horizon": 1.0,
        "report_every": 0.25
    }"#;

    #[test]
    fn parses_and_builds() {
        let cfg = RunConfig::from_json(SMALL).unwrap();
        assert_eq!(cfg.seed, 0);
        let st = cfg.initial_state().unwrap();
        assert_eq!(st.grid().len(), 64);
        assert_eq!(cfg.spec().unwrap().kind(), SystemKind::Wb1d);
        assert_eq!(cfg.hash().len(), 64);
        assert_eq!(cfg.hash(), RunConfig::from_json(SMALL).unwrap().hash());
    }

    #[test]
    fn errors_name_the_field() {
        let bad = SMALL.replace(r#""kappa": 1.0"#, r#""kappa": 1.0, "mu": 1.5"#);
        let e = RunConfig::from_json(&bad).unwrap_err().to_string();
        assert!(e.contains("mu"), "{e}");
        let bad = SMALL.replace(r#""horizon""#, r#""horizn""#);
        let e = RunConfig::from_json(&bad).unwrap_err().to_string();
        assert!(e.contains("horizn"), "{e}");
        let bad = SMALL.replace(r#""mode": 1"#, r#""mode": 1, "phase": 0"#);
        let e = RunConfig::from_json(&bad).unwrap_err().to_string();
        assert!(e.contains("phase"), "{e}");
        let bad = SMALL.replace("[64]", "[64, 64]");
        assert!(RunConfig::from_json(&bad).is_err());
    }

    #[test]
    fn snapshot_initial_data() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig::from_json(SMALL).unwrap();
        let st = cfg.initial_state().unwrap().with_time(0.5);
        crate::snapshot::save_snapshot(dir.path().join("u0.wbsnap"), &st).unwrap();
        let text = SMALL.replace(
            r#"{"preset": "single_mode", "amplitude": 0.1, "mode": 1}"#,
            r#"{"snapshot": "u0.wbsnap"}"#,
        );
        let path = dir.path().join("run.json");
        std::fs::write(&path, text).unwrap();
        let cfg = RunConfig::load(&path).unwrap();
        let back = cfg.initial_state().unwrap();
        assert_eq!(back.time, 0.5);
        assert_eq!(back.eta.values(), st.eta.values());
        assert_eq!(cfg.snapshot_header().unwrap().unwrap().n, vec![64]);
    }
}
