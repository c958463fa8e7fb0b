//! JSON experiment configuration.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use cwikel_core::io::load_grid;
use cwikel_core::profiles::random_density;
use cwikel_core::{Domain, Profile, SampledFunction};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Rearrange,
    Cover,
    Approx,
    Spectrum,
    Sweep,
    Counterexample,
    Equivalence,
    BsCount,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Rearrange => "rearrange",
            Self::Cover => "cover",
            Self::Approx => "approx",
            Self::Spectrum => "spectrum",
            Self::Sweep => "sweep",
            Self::Counterexample => "counterexample",
            Self::Equivalence => "equivalence",
            Self::BsCount => "bs-count",
        }
    }
}

/// Where a field comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum FieldSource {
    File {
        path: PathBuf,
    },
    /// A closed-form profile; a torus grid unless `half_width` is given.
    Profile {
        #[serde(flatten)]
        profile: Profile,
        dim: usize,
        resolution: usize,
        #[serde(default)]
        half_width: Option<f64>,
    },
    /// `exp(scale · g)` for a seeded band-limited `g` on the torus.
    Random {
        dim: usize,
        resolution: usize,
        band: i64,
        scale: f64,
    },
}

impl FieldSource {
    pub fn load(&self, seed: Option<u64>, base: &Path) -> Result<SampledFunction, CliError> {
        match self {
            FieldSource::File { path } => Ok(load_grid(&base.join(path))?),
            FieldSource::Profile { profile, dim, resolution, half_width } => {
                let domain = match half_width {
                    Some(l) => Domain::Box { half_width: *l },
                    None => Domain::Torus,
                };
                Ok(profile.sample(*dim, domain, *resolution)?)
            }
            FieldSource::Random { dim, resolution, band, scale } => {
                let seed = seed.ok_or_else(|| CliError::Config("random inputs need a seed".into()))?;
                Ok(random_density(*dim, *resolution, *band, *scale, seed)?)
            }
        }
    }
}

fn default_p() -> f64 {
    1.0
}

fn default_tol() -> f64 {
    cwikel_core::covering::DEFAULT_TOL
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    /// Names output files; defaults to the kind.
    #[serde(default)]
    pub id: Option<String>,
    #[serde(default)]
    pub inputs: Vec<FieldSource>,
    /// Test function for `approx`.
    #[serde(default)]
    pub u: Option<FieldSource>,
    /// Budget counts for `cover` and `approx`.
    #[serde(default)]
    pub n: Vec<usize>,
    /// Lattice cutoffs.
    #[serde(default, rename = "N")]
    pub cutoffs: Vec<usize>,
    /// Weak Schatten exponent for `spectrum`.
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default, rename = "d")]
    pub dim: Option<usize>,
    #[serde(default)]
    pub ns: Vec<usize>,
    /// Grid resolution for generated counterexample fields.
    #[serde(default)]
    pub resolution: Option<usize>,
    /// Coupling constants for `bs-count`.
    #[serde(default)]
    pub couplings: Vec<f64>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind) -> Self {
        Self {
            kind,
            id: None,
            inputs: Vec::new(),
            u: None,
            n: Vec::new(),
            cutoffs: Vec::new(),
            p: default_p(),
            dim: None,
            ns: Vec::new(),
            resolution: None,
            couplings: Vec::new(),
            tol: default_tol(),
            seed: None,
            out_dir: None,
        }
    }

    pub fn id(&self) -> String {
        self.id.clone().unwrap_or_else(|| self.kind.name().to_string())
    }

    pub fn from_json(s: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(s).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Checks the knobs each kind needs against the kernels' preconditions.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: &str| Err(CliError::Config(format!("{}: {m}", self.kind.name())));
        let randomized = self.inputs.iter().chain(self.u.iter()).any(|s| matches!(s, FieldSource::Random { .. }));
        if randomized && self.seed.is_none() {
            return bad("random inputs need a seed");
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return bad("tol must lie in (0, 1)");
        }
        use ExperimentKind::*;
        match self.kind {
            Rearrange | Equivalence if self.inputs.is_empty() => bad("needs at least one input"),
            Cover | Approx | Spectrum | BsCount if self.inputs.len() != 1 => bad("needs exactly one input"),
            Cover | Approx if self.n.is_empty() || self.n.contains(&0) => bad("needs positive n"),
            Approx if self.u.is_none() => bad("needs a test function u"),
            Spectrum | BsCount if self.cutoffs.len() != 1 => bad("needs exactly one N"),
            Spectrum if !(self.p > 0.0) => bad("p must be positive"),
            Sweep if self.inputs.is_empty() || self.cutoffs.is_empty() => bad("needs inputs and N values"),
            BsCount if self.couplings.is_empty() || self.couplings.iter().any(|t| !(*t > 0.0)) => {
                bad("needs positive couplings")
            }
            Counterexample => {
                if !matches!(self.dim, Some(1..=3)) {
                    return bad("d must be 1, 2 or 3");
                }
                if self.ns.is_empty() || self.ns[0] < 2 || self.ns.windows(2).any(|w| w[1] <= w[0]) {
                    return bad("ns must be increasing and at least 2");
                }
                if self.cutoffs.len() != 1 {
                    return bad("needs exactly one N");
                }
                let r = self.counterexample_resolution();
                if (r as f64).powi(self.dim.unwrap() as i32) > (1u64 << 24) as f64 {
                    return bad(&format!("resolution {r} is too large for d={}", self.dim.unwrap()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Explicit resolution, or the smallest power of two that passes the
    /// alias guard and puts eight cells across the smallest ball radius.
    pub fn counterexample_resolution(&self) -> usize {
        if let Some(r) = self.resolution {
            return r;
        }
        let max_n = self.ns.last().copied().unwrap_or(2);
        let cutoff = self.cutoffs.first().copied().unwrap_or(1);
        let half_width = (max_n + 1) as f64;
        let alias = 2 * (2 * cutoff + 1);
        let resolve = (2.0 * half_width * 8.0 * max_n as f64).ceil() as usize;
        alias.max(resolve).next_power_of_two()
    }
}
