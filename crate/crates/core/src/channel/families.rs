use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Channel, KRAUS_DROP_TOL};
use crate::spectral::eye;
use crate::{CMat, Error, Result, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelFamily {
    /// `(1 − p)ρ + p·1/d`
    Depolarizing,
    /// `(1 − p)ρ + p Σ_k |k⟩⟨k|ρ|k⟩⟨k|`
    Dephasing,
    /// Qubit decay `|1⟩ → |0⟩` with probability `γ`.
    AmplitudeDamping,
}

impl ChannelFamily {
    pub const ALL: [ChannelFamily; 3] =
        [ChannelFamily::Depolarizing, ChannelFamily::Dephasing, ChannelFamily::AmplitudeDamping];

    pub fn name(self) -> &'static str {
        match self {
            ChannelFamily::Depolarizing => "depolarizing",
            ChannelFamily::Dephasing => "dephasing",
            ChannelFamily::AmplitudeDamping => "amplitude_damping",
        }
    }
}

impl fmt::Display for ChannelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ChannelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ChannelFamily::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown channel family `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFamilySpec {
    pub family: ChannelFamily,
    pub dim: usize,
    pub param: f64,
}

impl ChannelFamilySpec {
    pub fn new(family: ChannelFamily, dim: usize, param: f64) -> Result<Self> {
        let spec = Self { family, dim, param };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.param) {
            return Err(Error::InvalidParameter(format!("parameter {} outside [0, 1]", self.param)));
        }
        if self.dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        if self.family == ChannelFamily::AmplitudeDamping && self.dim != 2 {
            return Err(Error::InvalidParameter(format!("amplitude damping is a qubit channel, got dim {}", self.dim)));
        }
        Ok(())
    }
}

/// Weyl operator `X^a Z^b` on `C^d`.
fn weyl(d: usize, a: usize, b: usize) -> CMat {
    let omega = 2.0 * std::f64::consts::PI / d as f64;
    CMat::from_fn(d, d, |row, col| {
        if row == (col + a) % d {
            C64::from_polar(1.0, omega * (b * col) as f64)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Kraus form of a named family, with zero-weight operators dropped.
pub fn make_family(spec: &ChannelFamilySpec) -> Result<Channel> {
    spec.validate()?;
    let (d, p) = (spec.dim, spec.param);
    let ops: Vec<CMat> = match spec.family {
        ChannelFamily::Depolarizing => {
            // the Weyl twirl (1/d²) Σ W ρ W† is the completely depolarizing map
            let d2 = (d * d) as f64;
            let mut ops = vec![eye(d).scale((1.0 - p + p / d2).sqrt())];
            for a in 0..d {
                for b in 0..d {
                    if (a, b) != (0, 0) {
                        ops.push(weyl(d, a, b).scale((p / d2).sqrt()));
                    }
                }
            }
            ops
        }
        ChannelFamily::Dephasing => {
            let mut ops = vec![eye(d).scale((1.0 - p).sqrt())];
            for k in 0..d {
                let mut proj = CMat::zeros(d, d);
                proj[(k, k)] = C64::new(p.sqrt(), 0.0);
                ops.push(proj);
            }
            ops
        }
        ChannelFamily::AmplitudeDamping => {
            let z = C64::new(0.0, 0.0);
            let r = |x: f64| C64::new(x, 0.0);
            vec![
                CMat::from_row_slice(2, 2, &[r(1.0), z, z, r((1.0 - p).sqrt())]),
                CMat::from_row_slice(2, 2, &[z, r(p.sqrt()), z, z]),
            ]
        }
    };
    let ops: Vec<CMat> = ops.into_iter().filter(|k| k.norm() > KRAUS_DROP_TOL).collect();
    Channel::from_kraus(ops)
}
