//! File formats.
//!
//! - Fields: CSV (header `value`, one node per row) or flat little-endian
//!   `f64` binary (`.bin`), in lexicographic node order, with a JSON sidecar
//!   `{"dim": .., "n": ..}` next to the data file (same stem, `.json`).
//! - Measures: `{"atoms": [{"x": [..], "w": ..}], "density_file": ".."}`;
//!   relative density paths resolve against the measure file's directory.
//! - Problems: see [`ProblemSpec`].

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::control::{ControlProblem, OptimizeConfig};
use crate::domain::{Grid, ScalarField};
use crate::error::{Error, Result};
use crate::measures::{Atom, DiscreteMeasure};
use crate::solver::{Nonlinearity, SolverOptions};

pub const SCHEMA_VERSION: u32 = 1;

/// Sidecar path of a field file: same stem, `.json` extension.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

#[derive(Serialize, Deserialize)]
struct FieldMeta {
    dim: usize,
    n: usize,
}

pub fn write_field(path: &Path, field: &ScalarField) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let grid = field.grid();
    let meta = FieldMeta {
        dim: grid.dim(),
        n: grid.n(),
    };
    let sidecar = sidecar_path(path);
    let meta_json = serde_json::to_string_pretty(&meta).expect("plain struct");
    fs::write(&sidecar, meta_json + "\n").map_err(|e| Error::io(&sidecar, e))?;
    if is_binary(path) {
        let bytes: Vec<u8> = field.values().iter().flat_map(|v| v.to_le_bytes()).collect();
        fs::write(path, bytes).map_err(|e| Error::io(path, e))
    } else {
        let mut out = String::with_capacity(field.len() * 24 + 6);
        out.push_str("value\n");
        for v in field.values() {
            out.push_str(&format!("{v}\n"));
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }
}

pub fn read_field(path: &Path) -> Result<ScalarField> {
    let sidecar = sidecar_path(path);
    let meta_text = fs::read_to_string(&sidecar).map_err(|e| Error::io(&sidecar, e))?;
    let meta: FieldMeta = serde_json::from_str(&meta_text).map_err(|e| Error::parse(&sidecar, e))?;
    let grid = Grid::new(meta.dim, meta.n)?;
    let values = if is_binary(path) {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        if bytes.len() % 8 != 0 {
            return Err(Error::parse(path, "binary field length is not a multiple of 8"));
        }
        bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect()
    } else {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut values = Vec::with_capacity(grid.len());
        for (k, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (k == 0 && line.parse::<f64>().is_err()) {
                continue;
            }
            values.push(
                line.parse::<f64>()
                    .map_err(|e| Error::parse(path, format!("line {}: {e}", k + 1)))?,
            );
        }
        values
    };
    ScalarField::from_values(grid, values).map_err(|e| Error::parse(path, e))
}

fn is_binary(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "bin")
}

/// JSON form of a measure.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct MeasureFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default)]
    pub atoms: Vec<AtomEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AtomEntry {
    pub x: Vec<f64>,
    pub w: f64,
}

impl MeasureFile {
    /// Builds the measure; `base` resolves a relative density path.
    pub fn into_measure(self, base: Option<&Path>) -> Result<DiscreteMeasure> {
        let density = match &self.density_file {
            Some(p) => {
                let full = match base {
                    Some(b) if p.is_relative() => b.join(p),
                    _ => p.clone(),
                };
                Some(read_field(&full)?)
            }
            None => None,
        };
        let dim = self
            .dim
            .or_else(|| self.atoms.first().map(|a| a.x.len()))
            .or_else(|| density.as_ref().map(|d| d.grid().dim()))
            .ok_or_else(|| Error::InvalidMeasure("cannot infer the dimension of an empty measure".into()))?;
        let mut atoms = Vec::with_capacity(self.atoms.len());
        for a in &self.atoms {
            if a.x.len() != dim {
                return Err(Error::InvalidMeasure(format!(
                    "atom with {} coordinates in a {dim}D measure",
                    a.x.len()
                )));
            }
            let mut x = [0.0; 3];
            x[..dim].copy_from_slice(&a.x);
            atoms.push(Atom { x, w: a.w });
        }
        DiscreteMeasure::new(dim, atoms, density)
    }
}

pub fn read_measure(path: &Path) -> Result<DiscreteMeasure> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: MeasureFile = serde_json::from_str(&text).map_err(|e| Error::parse(path, e))?;
    file.into_measure(path.parent())
}

/// Writes the measure as JSON; a density goes to `<stem>_density.csv`.
pub fn write_measure(path: &Path, m: &DiscreteMeasure) -> Result<()> {
    let density_file = match m.density() {
        Some(d) => {
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("measure");
            let name = PathBuf::from(format!("{stem}_density.csv"));
            let full = path.parent().map_or(name.clone(), |p| p.join(&name));
            write_field(&full, d)?;
            Some(name)
        }
        None => None,
    };
    let file = MeasureFile {
        dim: Some(m.dim()),
        atoms: m
            .atoms()
            .iter()
            .map(|a| AtomEntry {
                x: a.x[..m.dim()].to_vec(),
                w: a.w,
            })
            .collect(),
        density_file,
    };
    let text = serde_json::to_string_pretty(&file).expect("plain struct");
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

/// Serialized nonlinearity: `{"kind": "power", "q": 3}`,
/// `{"kind": "linear", "lambda": 1}`, `{"kind": "table", "points": [[t, g], ..]}`
/// or `{"kind": "zero"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NonlinearitySpec {
    Power { q: f64 },
    Linear { lambda: f64 },
    Table { points: Vec<[f64; 2]> },
    Zero,
}

impl NonlinearitySpec {
    pub fn build(&self) -> Result<Nonlinearity> {
        match self {
            NonlinearitySpec::Power { q } => Nonlinearity::power(*q),
            NonlinearitySpec::Linear { lambda } => Nonlinearity::linear(*lambda),
            NonlinearitySpec::Table { points } => {
                Nonlinearity::table(points.iter().map(|p| (p[0], p[1])).collect())
            }
            NonlinearitySpec::Zero => Ok(Nonlinearity::zero()),
        }
    }
}

/// A misfit exponent: a number `>= 1` or the string `"inf"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExponentSpec {
    Finite(f64),
    Named(String),
}

impl Default for ExponentSpec {
    fn default() -> Self {
        ExponentSpec::Finite(2.0)
    }
}

impl ExponentSpec {
    pub fn value(&self) -> Result<f64> {
        let p = match self {
            ExponentSpec::Finite(p) => *p,
            ExponentSpec::Named(s) => match s.to_ascii_lowercase().as_str() {
                "inf" | "infinity" => f64::INFINITY,
                other => other
                    .parse()
                    .map_err(|_| Error::InvalidConfig(format!("bad exponent `{s}`")))?,
            },
        };
        crate::domain::check_exponent(p)?;
        Ok(p)
    }
}

/// Desired state: a field file or a named generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FieldSource {
    File { file: PathBuf },
    Generator(FieldGenerator),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case")]
pub enum FieldGenerator {
    Zero,
    Constant { value: f64 },
    /// `amplitude · Π sin(π x_k)`.
    Sine { amplitude: f64 },
    /// `height · bump(|x − center| / radius)` with the unnormalized bump.
    Bump { center: Vec<f64>, radius: f64, height: f64 },
}

impl FieldGenerator {
    pub fn sample(&self, grid: Grid) -> Result<ScalarField> {
        use std::f64::consts::PI;
        Ok(match self {
            FieldGenerator::Zero => ScalarField::zeros(grid),
            FieldGenerator::Constant { value } => ScalarField::constant(grid, *value),
            FieldGenerator::Sine { amplitude } => {
                ScalarField::from_fn(grid, |x| amplitude * x.iter().map(|c| (PI * c).sin()).product::<f64>())
            }
            FieldGenerator::Bump { center, radius, height } => {
                if center.len() != grid.dim() || !(*radius > 0.0) {
                    return Err(Error::InvalidConfig("bump needs a center of the grid dimension and a positive radius".into()));
                }
                ScalarField::from_fn(grid, |x| {
                    let r = x.iter().zip(center).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                    height * crate::measures::bump(r / radius) * std::f64::consts::E
                })
            }
        })
    }
}

impl FieldSource {
    pub fn resolve(&self, grid: Grid, base: Option<&Path>) -> Result<ScalarField> {
        match self {
            FieldSource::File { file } => {
                let full = match base {
                    Some(b) if file.is_relative() => b.join(file),
                    _ => file.clone(),
                };
                let f = read_field(&full)?;
                if f.grid() != &grid {
                    return Err(Error::GridMismatch(format!(
                        "{} is not on the problem grid",
                        full.display()
                    )));
                }
                Ok(f)
            }
            FieldSource::Generator(g) => g.sample(grid),
        }
    }
}

/// A measure given inline or as a path to a measure file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MeasureSource {
    Path(PathBuf),
    Inline(MeasureFile),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridSpec {
    pub dim: usize,
    pub n: usize,
}

/// Problem file shared by `solve` and `optimize`:
///
/// ```json
/// {"schema": 1, "grid": {"dim": 2, "n": 31}, "g": {"kind": "power", "q": 3},
///  "p": 2, "alpha": 0.05, "u_d": {"generator": "sine", "amplitude": 0.5},
///  "measure": {"atoms": [{"x": [0.5, 0.5], "w": 1.0}]}}
/// ```
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemSpec {
    #[serde(default = "default_schema")]
    pub schema: u32,
    pub grid: GridSpec,
    pub g: NonlinearitySpec,
    #[serde(default)]
    pub p: ExponentSpec,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub u_d: Option<FieldSource>,
    /// State-equation datum for `solve`.
    #[serde(default)]
    pub measure: Option<MeasureSource>,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default)]
    pub optimizer: OptimizeConfig,
}

fn default_schema() -> u32 {
    SCHEMA_VERSION
}

/// A problem file together with the directory relative paths resolve in.
#[derive(Debug, Clone)]
pub struct LoadedProblem {
    pub spec: ProblemSpec,
    pub base: Option<PathBuf>,
}

impl LoadedProblem {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let spec: ProblemSpec = serde_json::from_str(&text).map_err(|e| Error::parse(path, e))?;
        if spec.schema != SCHEMA_VERSION {
            return Err(Error::InvalidConfig(format!(
                "unsupported schema version {} (expected {SCHEMA_VERSION})",
                spec.schema
            )));
        }
        Ok(LoadedProblem {
            spec,
            base: path.parent().map(Path::to_path_buf),
        })
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.spec.grid.dim, self.spec.grid.n)
    }

    pub fn nonlinearity(&self) -> Result<Nonlinearity> {
        self.spec.g.build()
    }

    pub fn measure(&self) -> Result<DiscreteMeasure> {
        let dim = self.spec.grid.dim;
        match &self.spec.measure {
            None => Err(Error::InvalidConfig("problem has no `measure`".into())),
            Some(MeasureSource::Path(p)) => {
                let full = match &self.base {
                    Some(b) if p.is_relative() => b.join(p),
                    _ => p.clone(),
                };
                read_measure(&full)
            }
            Some(MeasureSource::Inline(file)) => {
                let mut file = file.clone();
                file.dim.get_or_insert(dim);
                file.into_measure(self.base.as_deref())
            }
        }
    }

    pub fn control_problem(&self) -> Result<ControlProblem> {
        let grid = self.grid()?;
        let alpha = self
            .spec
            .alpha
            .ok_or_else(|| Error::InvalidConfig("problem has no `alpha`".into()))?;
        let u_d = match &self.spec.u_d {
            Some(src) => src.resolve(grid, self.base.as_deref())?,
            None => return Err(Error::InvalidConfig("problem has no `u_d`".into())),
        };
        Ok(ControlProblem::new(self.nonlinearity()?, u_d, self.spec.p.value()?, alpha)?
            .with_solver(self.spec.solver))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_round_trip_csv_and_binary() {
        let dir = tempfile::tempdir().unwrap();
        let grid = Grid::new(2, 4).unwrap();
        let f = ScalarField::from_fn(grid, |x| x[0].exp() - 1.0 / 3.0 * x[1]);
        for name in ["f.csv", "f.bin"] {
            let path = dir.path().join(name);
            write_field(&path, &f).unwrap();
            assert_eq!(read_field(&path).unwrap(), f);
        }
        let meta = fs::read_to_string(dir.path().join("f.json")).unwrap();
        assert!(meta.contains("\"dim\": 2") && meta.contains("\"n\": 4"));
    }

    #[test]
    fn measure_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let grid = Grid::new(2, 5).unwrap();
        let m = DiscreteMeasure::new(
            2,
            vec![Atom { x: [0.25, 0.5, 0.0], w: -1.5 }],
            Some(ScalarField::from_fn(grid, |x| x[0])),
        )
        .unwrap();
        let path = dir.path().join("m.json");
        write_measure(&path, &m).unwrap();
        assert_eq!(read_measure(&path).unwrap(), m);
    }

    #[test]
    fn exponent_parsing() {
        let p: ExponentSpec = serde_json::from_str("\"inf\"").unwrap();
        assert_eq!(p.value().unwrap(), f64::INFINITY);
        let p: ExponentSpec = serde_json::from_str("3").unwrap();
        assert_eq!(p.value().unwrap(), 3.0);
        let p: ExponentSpec = serde_json::from_str("0.5").unwrap();
        assert!(p.value().is_err());
    }

    #[test]
    fn problem_spec_parses() {
        let text = r#"{"schema": 1, "grid": {"dim": 2, "n": 7}, "g": {"kind": "power", "q": 3},
            "p": 2, "alpha": 0.1, "u_d": {"generator": "sine", "amplitude": 0.5},
            "measure": {"atoms": [{"x": [0.5, 0.5], "w": 1.0}]}}"#;
        let spec: ProblemSpec = serde_json::from_str(text).unwrap();
        let loaded = LoadedProblem { spec, base: None };
        let prob = loaded.control_problem().unwrap();
        assert_eq!(prob.alpha, 0.1);
        assert_eq!(loaded.measure().unwrap().tv_norm(), 1.0);
    }
}
