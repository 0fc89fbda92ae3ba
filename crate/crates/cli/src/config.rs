//! Strict JSON run configurations, one schema per subcommand.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use nohair::channel::{make_family, ChannelFamily, ChannelFamilySpec};
use nohair::{Channel, CMat, C64};

use crate::CliError;

fn default_tolerance() -> f64 {
    1e-6
}
fn default_restarts() -> usize {
    32
}
fn default_samples() -> usize {
    256
}
fn default_models() -> usize {
    1000
}
fn default_dim_f() -> Vec<usize> {
    vec![2]
}
fn default_dim_bh() -> Vec<usize> {
    vec![2, 4]
}
fn default_pivot_samples() -> usize {
    32
}
fn default_dim() -> usize {
    2
}
fn default_instances() -> usize {
    100
}

/// How campaign models are generated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// Haar-random `U`, canonical embedding.
    Random,
    /// `U = V ⊗ H` with Haar `V`, `H`.
    Ideal,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Random => "random",
            Preset::Ideal => "ideal",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyFile {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_pivot_samples")]
    pub pivot_samples: usize,
    #[serde(default = "default_models")]
    pub models: usize,
    #[serde(default = "default_dim_f")]
    pub dim_f: Vec<usize>,
    #[serde(default = "default_dim_bh")]
    pub dim_bh: Vec<usize>,
    #[serde(default = "Preset::random")]
    pub preset: Preset,
}

impl Preset {
    fn random() -> Self {
        Preset::Random
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_pivot_samples")]
    pub pivot_samples: usize,
    pub family: ChannelFamily,
    #[serde(default = "default_dim")]
    pub dim: usize,
    pub params: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntangleFile {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_pivot_samples")]
    pub pivot_samples: usize,
    #[serde(default = "default_instances")]
    pub instances: usize,
    #[serde(default = "default_dim_f")]
    pub dim_f: Vec<usize>,
    #[serde(default = "default_dim_bh")]
    pub dim_bh: Vec<usize>,
    #[serde(default = "Preset::random")]
    pub preset: Preset,
    /// Schmidt spectra; every pair of equal length is compared on every model.
    pub spectra: Vec<Vec<f64>>,
    /// Additional pairs of random spectra of length `dim_f` per model.
    #[serde(default)]
    pub random_pairs: usize,
}

/// A channel given inline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelSpec {
    Family { family: ChannelFamily, dim: usize, param: f64 },
    Identity { dim: usize },
    /// Kraus operators as row-major nested lists of `[re, im]` entries.
    Kraus { operators: Vec<Vec<Vec<[f64; 2]>>> },
}

impl ChannelSpec {
    pub fn build(&self) -> Result<Channel, CliError> {
        let channel = match self {
            ChannelSpec::Family { family, dim, param } => make_family(&ChannelFamilySpec::new(*family, *dim, *param)?)?,
            ChannelSpec::Identity { dim } => {
                if *dim == 0 {
                    return Err(CliError::Config("identity channel needs dim ≥ 1".into()));
                }
                Channel::identity(*dim)
            }
            ChannelSpec::Kraus { operators } => {
                let mut ops = Vec::with_capacity(operators.len());
                for (k, rows) in operators.iter().enumerate() {
                    let nrows = rows.len();
                    let ncols = rows.first().map_or(0, Vec::len);
                    if nrows == 0 || ncols == 0 || rows.iter().any(|r| r.len() != ncols) {
                        return Err(CliError::Config(format!("Kraus operator {k} is not a rectangular matrix")));
                    }
                    ops.push(CMat::from_fn(nrows, ncols, |i, j| C64::new(rows[i][j][0], rows[i][j][1])));
                }
                Channel::from_kraus(ops)?
            }
        };
        Ok(channel)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiamondFile {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default = "default_samples")]
    pub samples: usize,
    pub a: ChannelSpec,
    pub b: ChannelSpec,
}

pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    parse(&text)
}

pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
}

pub(crate) fn check_common(tolerance: f64, restarts: usize) -> Result<(), CliError> {
    if !(tolerance > 0.0) {
        return Err(CliError::Config(format!("tolerance must be positive, got {tolerance}")));
    }
    if restarts == 0 {
        return Err(CliError::Config("restarts must be at least 1".into()));
    }
    Ok(())
}

pub(crate) fn check_dims(name: &str, dims: &[usize], min: usize) -> Result<(), CliError> {
    if dims.is_empty() || dims.iter().any(|&d| d < min) {
        return Err(CliError::Config(format!("{name} must be a nonempty list of dimensions ≥ {min}")));
    }
    Ok(())
}

impl VerifyFile {
    pub fn validate(&self) -> Result<(), CliError> {
        check_common(self.tolerance, self.restarts)?;
        check_dims("dim_f", &self.dim_f, 1)?;
        check_dims("dim_bh", &self.dim_bh, 1)?;
        if self.models == 0 {
            return Err(CliError::Config("models must be at least 1".into()));
        }
        Ok(())
    }
}

impl SweepFile {
    pub fn validate(&self) -> Result<(), CliError> {
        check_common(self.tolerance, self.restarts)?;
        if self.params.is_empty() {
            return Err(CliError::Config("params must not be empty".into()));
        }
        for &p in &self.params {
            ChannelFamilySpec::new(self.family, self.dim, p)?;
        }
        Ok(())
    }
}

impl EntangleFile {
    pub fn validate(&self) -> Result<(), CliError> {
        check_common(self.tolerance, self.restarts)?;
        check_dims("dim_f", &self.dim_f, 1)?;
        check_dims("dim_bh", &self.dim_bh, 1)?;
        if self.spectra.is_empty() {
            return Err(CliError::Config("spectra must not be empty".into()));
        }
        let min_f = *self.dim_f.iter().min().expect("checked nonempty");
        for s in &self.spectra {
            nohair::entangled::SchmidtInput::new(s.clone())?;
            if s.len() > min_f {
                return Err(CliError::Config(format!("spectrum of length {} exceeds dim_f {min_f}", s.len())));
            }
        }
        if self.instances == 0 {
            return Err(CliError::Config("instances must be at least 1".into()));
        }
        Ok(())
    }
}

impl DiamondFile {
    pub fn validate(&self) -> Result<(Channel, Channel), CliError> {
        check_common(self.tolerance, self.restarts)?;
        let (a, b) = (self.a.build()?, self.b.build()?);
        if a.dim_in() != b.dim_in() || a.dim_out() != b.dim_out() {
            return Err(CliError::Config(format!(
                "channels {}→{} and {}→{} are not comparable",
                a.dim_in(),
                a.dim_out(),
                b.dim_in(),
                b.dim_out()
            )));
        }
        Ok((a, b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_in() {
        let v: VerifyFile = parse(r#"{"seed": 3}"#).unwrap();
        assert_eq!((v.models, v.restarts, v.samples, v.tolerance), (1000, 32, 256, 1e-6));
        assert_eq!((v.dim_f.as_slice(), v.dim_bh.as_slice(), v.preset), (&[2][..], &[2, 4][..], Preset::Random));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(parse::<VerifyFile>(r#"{"tolerence": 1e-6}"#).is_err());
        assert!(parse::<DiamondFile>(
            r#"{"a": {"kind": "identity", "dim": 2, "extra": 1}, "b": {"kind": "identity", "dim": 2}}"#
        )
        .is_err());
    }

    #[test]
    fn validation() {
        let mut v: VerifyFile = parse("{}").unwrap();
        v.tolerance = 0.0;
        assert!(v.validate().is_err());
        let e: EntangleFile = parse(r#"{"spectra": []}"#).unwrap();
        assert!(e.validate().is_err());
        let e: EntangleFile = parse(r#"{"spectra": [[0.5, 0.5], [1.0, 0.0]]}"#).unwrap();
        assert!(e.validate().is_ok());
        let s: SweepFile = parse(r#"{"family": "amplitude_damping", "dim": 3, "params": [0.1]}"#).unwrap();
        assert!(s.validate().is_err());
        let bad = r#"{"a": {"kind": "kraus", "operators": [[[[1,0],[0,0]],[[0,0],[0.5,0]]]]},
                      "b": {"kind": "identity", "dim": 2}}"#;
        assert!(parse::<DiamondFile>(bad).unwrap().validate().is_err());
    }
}
