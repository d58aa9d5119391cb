//! Run configuration and the material and stack files it references.
//!
//! Everything is TOML. Physical quantities carry their SI unit in the key
//! name (`omega_rad_s`, `thickness_m`, ...). Material and stack references
//! are either a file path or an inline table of the same shape as the file.

use std::path::{Path, PathBuf};

use kkqed::{DielectricStack, Layer, LorentzModel, LorentzTerm, PermittivityModel, TabulatedModel};
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::error::{CliError, Result};

/// Environment variable listing extra directories searched for material files.
pub const MATERIAL_PATH_ENV: &str = "KKQED_MATERIAL_PATH";

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub eps: Option<EpsConfig>,
    pub device: Option<DeviceConfig>,
    pub decay: Option<DecayConfig>,
    pub verify: Option<VerifyConfig>,
}

#[derive(Debug, Clone, Copy, Deserialize, Default, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Log,
    Linear,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpsConfig {
    pub material: MaterialRef,
    pub omega_min_rad_s: f64,
    pub omega_max_rad_s: f64,
    pub points: usize,
    #[serde(default)]
    pub spacing: Spacing,
    /// Restrict the KK integral to the sweep range instead of a grid
    /// extended three decades on either side.
    #[serde(default)]
    pub truncated_grid: bool,
    #[serde(default = "default_kk_points")]
    pub kk_points: usize,
}

fn default_kk_points() -> usize {
    20_000
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceConfig {
    pub omega_rad_s: Option<f64>,
    pub cutoff: Option<usize>,
    pub stack: Option<StackRef>,
    pub matrices: Option<MatrixConfig>,
    /// Two-mode squeezer with equal gain `r` in both channels.
    pub squeeze_r: Option<f64>,
    #[serde(default)]
    pub input: InputConfig,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixConfig {
    pub kind: DeviceKindConfig,
    /// Row-major 2×2 matrix of `[re, im]` pairs.
    pub t: [[[f64; 2]; 2]; 2],
    /// Required for amplifiers; absorbers default to the Hermitian gauge.
    pub a: Option<[[[f64; 2]; 2]; 2]>,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum DeviceKindConfig {
    Absorbing,
    Amplifying,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct InputConfig {
    /// Photon numbers `[a₁, a₂]` or `[a₁, a₂, g₁, g₂]`.
    pub fock: Option<Vec<usize>>,
    /// Four-mode density matrix file in the library's text format.
    pub density: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayConfig {
    pub material: MaterialRef,
    pub omega_rad_s: f64,
    pub moment_c_m: [f64; 3],
    pub z_min_m: f64,
    pub z_max_m: f64,
    pub points: usize,
    pub rel_tol: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub stack: StackRef,
    pub omega_rad_s: f64,
    /// Source and observation points `[x, x′]`.
    pub points_m: Vec<[f64; 2]>,
    pub nodes_per_wavelength: Option<usize>,
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum MaterialRef {
    Path(String),
    Inline(MaterialFile),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum MaterialFile {
    /// Each term is `[ω_p, ω_T, γ]` in rad/s; `ω_T = 0` gives a Drude term.
    Lorentz { terms: Vec<[f64; 3]> },
    Tabulated { grid: Vec<f64>, re: Vec<f64>, im: Vec<f64> },
    Constant { re: f64, im: f64 },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum StackRef {
    Path(String),
    Inline(StackFile),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StackFile {
    pub left: Option<MaterialRef>,
    pub right: Option<MaterialRef>,
    #[serde(default)]
    pub layers: Vec<LayerFile>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerFile {
    pub thickness_m: f64,
    pub material: MaterialRef,
}

/// Reads and parses a TOML file, reporting the line of any syntax or schema error.
pub fn read_toml<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    parse_toml(&text, path)
}

fn parse_toml<T: DeserializeOwned>(text: &str, path: &Path) -> Result<T> {
    toml::from_str(text).map_err(|e| {
        let line = e.span().map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1).unwrap_or(1);
        CliError::Parse { path: path.to_path_buf(), line, message: e.message().to_string() }
    })
}

/// Resolves references relative to the directory of the file that contains them.
pub struct Resolver {
    base: PathBuf,
    search: Vec<PathBuf>,
}

impl Resolver {
    pub fn for_file(path: &Path) -> Self {
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let search = std::env::var_os(MATERIAL_PATH_ENV).map(|v| std::env::split_paths(&v).collect()).unwrap_or_default();
        Self { base, search }
    }

    /// Directory that relative paths are resolved against.
    pub fn base(&self) -> &Path {
        &self.base
    }

    fn nested(&self, path: &Path) -> Self {
        Self { base: path.parent().map(Path::to_path_buf).unwrap_or_default(), search: self.search.clone() }
    }

    fn locate(&self, name: &str) -> Option<PathBuf> {
        let direct = self.base.join(name);
        if direct.is_file() {
            return Some(direct);
        }
        self.search.iter().map(|d| d.join(name)).find(|p| p.is_file())
    }

    pub fn material(&self, r: &MaterialRef) -> Result<PermittivityModel> {
        match r {
            MaterialRef::Path(name) if name == "vacuum" => Ok(PermittivityModel::vacuum()),
            MaterialRef::Path(name) => {
                let path = self.locate(name).ok_or_else(|| CliError::MaterialNotFound(name.clone()))?;
                build_material(read_toml(&path)?)
            }
            MaterialRef::Inline(m) => build_material(m.clone()),
        }
    }

    pub fn stack(&self, r: &StackRef) -> Result<DielectricStack> {
        let (file, resolver) = match r {
            StackRef::Path(name) => {
                let path = self.base.join(name);
                (read_toml::<StackFile>(&path)?, self.nested(&path))
            }
            StackRef::Inline(s) => (s.clone(), Self { base: self.base.clone(), search: self.search.clone() }),
        };
        let side = |m: &Option<MaterialRef>| match m {
            Some(m) => resolver.material(m),
            None => Ok(PermittivityModel::vacuum()),
        };
        let layers = file
            .layers
            .iter()
            .map(|l| Ok(Layer::new(l.thickness_m, resolver.material(&l.material)?)?))
            .collect::<Result<Vec<_>>>()?;
        Ok(DielectricStack::new(side(&file.left)?, side(&file.right)?, layers))
    }
}

pub fn build_material(m: MaterialFile) -> Result<PermittivityModel> {
    Ok(match m {
        MaterialFile::Lorentz { terms } => PermittivityModel::Lorentz(LorentzModel::new(
            terms.iter().map(|t| LorentzTerm::new(t[0], t[1], t[2])).collect(),
        )?),
        MaterialFile::Tabulated { grid, re, im } => {
            if re.len() != im.len() {
                return Err(CliError::Invalid("tabulated material: re and im lengths differ".into()));
            }
            let values = re.iter().zip(&im).map(|(&r, &i)| Complex64::new(r, i)).collect();
            PermittivityModel::Tabulated(TabulatedModel::new(grid, values)?)
        }
        MaterialFile::Constant { re, im } => PermittivityModel::constant(re, im),
    })
}

/// Logarithmic or linear sweep of `n` points over `[lo, hi]`.
pub fn sweep(lo: f64, hi: f64, n: usize, spacing: Spacing) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && hi > lo) {
        return Err(CliError::Invalid(format!("sweep range must satisfy 0 < min < max, got [{lo}, {hi}]")));
    }
    if n < 2 {
        return Err(CliError::Invalid(format!("sweep needs at least 2 points, got {n}")));
    }
    Ok(match spacing {
        Spacing::Log => kkqed::permittivity::log_grid(lo, hi, n),
        Spacing::Linear => (0..n).map(|i| if i == n - 1 { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect(),
    })
}
