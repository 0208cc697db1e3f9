//! Run configuration: JSON ingestion, flag overrides, and the config hash
//! embedded in every output file.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::operator::{ComplexMatrix, HermitianOperator};
use crate::path::{builtin_path, ParameterPath, PathSegment};
use crate::protocol::{four_step_protocol, generalized_protocol, StepProtocol};
use crate::spin::{spin_potentials, DriveConstants};

/// How the driving potentials are supplied.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PotentialSpec {
    /// The spin-1/2 family parameterized by four drive constants.
    SpinC { constants: [f64; 4] },
    /// Explicit Hermitian matrices; each entry is a row list of [re, im].
    Explicit { matrices: Vec<Vec<Vec<[f64; 2]>>> },
}

impl PotentialSpec {
    pub fn build(&self) -> Result<Vec<HermitianOperator>> {
        match self {
            PotentialSpec::SpinC { constants } => {
                let c = DriveConstants::new(
                    constants[0],
                    constants[1],
                    constants[2],
                    constants[3],
                )?;
                Ok(spin_potentials(c).into_iter().collect())
            }
            PotentialSpec::Explicit { matrices } => matrices
                .iter()
                .map(|rows| {
                    let dim = rows.len();
                    let mut data = Vec::with_capacity(dim * dim);
                    for row in rows {
                        if row.len() != dim {
                            return Err(Error::Config(format!(
                                "potential matrix is not square: {} x {}",
                                dim,
                                row.len()
                            )));
                        }
                        for &[re, im] in row {
                            data.push(Complex64::new(re, im));
                        }
                    }
                    HermitianOperator::new(ComplexMatrix::new(dim, data)?)
                })
                .collect(),
        }
    }

    /// Drive constants, when the spin family is in use.
    pub fn drive_constants(&self) -> Result<DriveConstants> {
        match self {
            PotentialSpec::SpinC { constants } => DriveConstants::new(
                constants[0],
                constants[1],
                constants[2],
                constants[3],
            ),
            PotentialSpec::Explicit { .. } => Err(Error::Config(
                "this command needs the spin-c potential family (drive constants)".into(),
            )),
        }
    }
}

/// Driving protocol descriptor.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum ProtocolDescriptor {
    FourStep {
        alpha: f64,
        beta: f64,
        potentials: PotentialSpec,
    },
    Generalized {
        alphas: Vec<f64>,
        potentials: PotentialSpec,
    },
}

impl ProtocolDescriptor {
    pub fn build(&self) -> Result<StepProtocol> {
        match self {
            ProtocolDescriptor::FourStep {
                alpha,
                beta,
                potentials,
            } => {
                let v = potentials.build()?;
                let four: [HermitianOperator; 4] = v
                    .try_into()
                    .map_err(|_| Error::Config("four-step protocol needs 4 potentials".into()))?;
                four_step_protocol(*alpha, *beta, four)
            }
            ProtocolDescriptor::Generalized { alphas, potentials } => {
                let params = crate::protocol::PartitionParams::new(alphas.clone())?;
                generalized_protocol(&params, potentials.build()?)
            }
        }
    }

    pub fn potentials(&self) -> &PotentialSpec {
        match self {
            ProtocolDescriptor::FourStep { potentials, .. } => potentials,
            ProtocolDescriptor::Generalized { potentials, .. } => potentials,
        }
    }

    pub fn partition(&self) -> Option<(f64, f64)> {
        match self {
            ProtocolDescriptor::FourStep { alpha, beta, .. } => Some((*alpha, *beta)),
            ProtocolDescriptor::Generalized { .. } => None,
        }
    }
}

/// Path selection: by catalog name or by explicit segments.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PathSpec {
    Builtin { builtin: String },
    Explicit { segments: Vec<PathSegment> },
}

impl PathSpec {
    pub fn build(&self) -> Result<ParameterPath> {
        match self {
            PathSpec::Builtin { builtin } => builtin_path(builtin),
            PathSpec::Explicit { segments } => ParameterPath::new(segments.clone()),
        }
    }
}

/// Whether the first-order model carries the drive's one-period average.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Averaging {
    /// First-order commutator term only.
    Paper,
    /// Include the duration-weighted average of the drive.
    Corrected,
}

/// State convention for energy costs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StateChoice {
    Fixed,
    Ground,
}

/// Sizes for the verification suite.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifySizes {
    pub cases: usize,
    pub j_max: usize,
    pub kick_j_max: usize,
    pub seed: u64,
}

impl Default for VerifySizes {
    fn default() -> Self {
        let s = crate::verify::VerifySettings::default();
        Self {
            cases: s.cases,
            j_max: s.j_max,
            kick_j_max: s.kick_j_max,
            seed: s.seed,
        }
    }
}

/// Full run configuration. Unknown fields are rejected so typos fail fast.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub protocol: ProtocolDescriptor,
    pub omega: f64,
    pub inertia: f64,
    pub grid_n: usize,
    pub path: PathSpec,
    pub samples: usize,
    pub out_dir: String,
    pub averaging: Averaging,
    pub state: StateChoice,
    /// Spinor [[re, im], [re, im]] used by the fixed-state mode.
    pub fixed_state: Option<[[f64; 2]; 2]>,
    pub verify: VerifySizes,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            protocol: ProtocolDescriptor::FourStep {
                alpha: 0.5,
                beta: 0.5,
                potentials: PotentialSpec::SpinC {
                    constants: [1.0, 1.0, 1.0, 1.0],
                },
            },
            omega: 100.0,
            inertia: 1.0,
            grid_n: 64,
            path: PathSpec::Builtin {
                builtin: "fig4b".into(),
            },
            samples: 1001,
            out_dir: "out".into(),
            averaging: Averaging::Paper,
            state: StateChoice::Ground,
            fixed_state: None,
            verify: VerifySizes::default(),
        }
    }
}

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<String>,
    pub grid: Option<usize>,
    pub samples: Option<usize>,
    pub omega: Option<f64>,
    pub mode: Option<Averaging>,
    pub state: Option<StateChoice>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: Option<&std::path::Path>) -> Result<Self> {
        match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)?;
                Self::from_json(&text)
            }
            None => Ok(Self::default()),
        }
    }

    pub fn apply(&mut self, over: &Overrides) {
        if let Some(out) = &over.out {
            self.out_dir = out.clone();
        }
        if let Some(grid) = over.grid {
            self.grid_n = grid;
        }
        if let Some(samples) = over.samples {
            self.samples = samples;
        }
        if let Some(omega) = over.omega {
            self.omega = omega;
        }
        if let Some(mode) = over.mode {
            self.averaging = mode;
        }
        if let Some(state) = over.state {
            self.state = state;
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0) {
            return Err(Error::Config(format!("omega must be > 0, got {}", self.omega)));
        }
        if !(self.inertia > 0.0) {
            return Err(Error::Config(format!(
                "inertia must be > 0, got {}",
                self.inertia
            )));
        }
        if self.grid_n < 2 {
            return Err(Error::Config(format!(
                "grid_n must be at least 2, got {}",
                self.grid_n
            )));
        }
        if self.samples < 2 {
            return Err(Error::Config(format!(
                "samples must be at least 2, got {}",
                self.samples
            )));
        }
        Ok(())
    }

    /// Hash of the effective configuration (after overrides), for output
    /// provenance headers. The output directory is excluded so the same
    /// physics configuration hashes identically regardless of where results
    /// are written.
    pub fn digest(&self) -> String {
        let mut hashed = self.clone();
        hashed.out_dir = String::new();
        let canon = serde_json::to_string(&hashed).expect("config always serializes");
        let mut hasher = Sha256::new();
        hasher.update(canon.as_bytes());
        let bytes = hasher.finalize();
        bytes.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn fixed_spinor(&self) -> Result<Option<[Complex64; 2]>> {
        match (self.state, self.fixed_state) {
            (StateChoice::Fixed, Some(raw)) => Ok(Some([
                Complex64::new(raw[0][0], raw[0][1]),
                Complex64::new(raw[1][0], raw[1][1]),
            ])),
            (StateChoice::Fixed, None) => Err(Error::Config(
                "state = fixed requires a fixed_state spinor".into(),
            )),
            (StateChoice::Ground, _) => Ok(None),
        }
    }
}
