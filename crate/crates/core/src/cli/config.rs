use std::path::Path;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::algebra::{Matrix, Vector, C64};
use crate::error::{Error, Result};
use crate::genfunc::{parse_rational, BoundaryLayers};
use crate::hicks::{HicksParams, SecondOrderBoundary};
use crate::lattice::{MultiIndex, Window};
use crate::recurrence::{BoundaryData, CoefficientProvider, DiagonalRecurrence, Extension, FaceTable, ForcingProvider, Provider};

/// A real number or `[re, im]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    fn value(self) -> C64 {
        match self {
            Entry::Real(re) => C64::new(re, 0.0),
            Entry::Complex([re, im]) => C64::new(re, im),
        }
    }
}

pub type MatrixSpec = Vec<Vec<Entry>>;
pub type VectorSpec = Vec<Entry>;

pub fn matrix(spec: &MatrixSpec) -> Result<Matrix> {
    Matrix::from_rows(spec.iter().map(|r| r.iter().map(|e| e.value()).collect()).collect())
}

pub fn vector(spec: &VectorSpec) -> Vector {
    spec.iter().map(|e| e.value()).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProviderSpec<V> {
    Constant { value: V },
    DiagonalPhase { phases: Vec<V> },
    Componentwise { periods: Vec<u64>, table: Vec<V> },
}

impl<V> ProviderSpec<V> {
    fn build<T: Clone>(&self, f: impl Fn(&V) -> Result<T>) -> Result<Provider<T>> {
        match self {
            ProviderSpec::Constant { value } => Ok(Provider::Constant(f(value)?)),
            ProviderSpec::DiagonalPhase { phases } => Provider::diagonal_phase(phases.iter().map(f).collect::<Result<_>>()?),
            ProviderSpec::Componentwise { periods, table } => {
                Provider::componentwise(periods.clone(), table.iter().map(f).collect::<Result<_>>()?)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaceSpec {
    pub extent: Vec<u64>,
    /// Lexicographic over the face rectangle.
    pub values: Vec<VectorSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BoundarySpec {
    Faces {
        faces: Vec<FaceSpec>,
        #[serde(default)]
        extension: Extension,
    },
    Uniform {
        uniform: VectorSpec,
        extent: u64,
        #[serde(default)]
        extension: Extension,
    },
}

impl BoundarySpec {
    pub fn build(&self, m: usize, n: usize) -> Result<BoundaryData> {
        let data = match self {
            BoundarySpec::Faces { faces, extension } => {
                let tables = faces
                    .iter()
                    .map(|f| FaceTable::new(f.extent.clone(), f.values.iter().map(vector).collect()))
                    .collect::<Result<Vec<_>>>()?;
                BoundaryData::new(n, tables, *extension)?
            }
            BoundarySpec::Uniform { uniform, extent, extension } => {
                let v = vector(uniform);
                BoundaryData::from_point_fn(m, n, *extent, *extension, |_| v.clone())?
            }
        };
        if data.m() != m {
            return Err(Error::Validation(format!("boundary has {} faces but m = {m}", data.m())));
        }
        if data.n() != n {
            return Err(Error::Validation(format!("boundary values have length {} but n = {n}", data.n())));
        }
        Ok(data)
    }
}

/// A number or an exact rational string such as `"3/8"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Float(f64),
    Text(String),
}

impl Number {
    pub fn to_f64(&self) -> Result<f64> {
        match self {
            Number::Float(x) => Ok(*x),
            Number::Text(s) => Ok(crate::genfunc::Coeff::to_f64(&parse_rational(s)?)),
        }
    }

    /// Floats go through their shortest decimal form, so `0.1` becomes `1/10`.
    pub fn to_rational(&self) -> Result<BigRational> {
        match self {
            Number::Float(x) if x.is_finite() => parse_rational(&format!("{x}")),
            Number::Float(x) => Err(Error::Validation(format!("{x} is not a finite number"))),
            Number::Text(s) => parse_rational(s),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Number::Text(_))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalars {
    One(Number),
    Many(Vec<Number>),
}

impl Scalars {
    pub fn items(&self) -> Vec<Number> {
        match self {
            Scalars::One(x) => vec![x.clone()],
            Scalars::Many(v) => v.clone(),
        }
    }

    /// `"0.5"` or `"0.5,0.6"` from a flag.
    pub fn parse_flag(s: &str) -> Result<Self> {
        let items: Vec<Number> = s
            .split(',')
            .map(|p| {
                let p = p.trim();
                p.parse::<f64>().map(Number::Float).or_else(|_| parse_rational(p).map(|_| Number::Text(p.into())))
            })
            .collect::<Result<_>>()?;
        Ok(if items.len() == 1 { Scalars::One(items[0].clone()) } else { Scalars::Many(items) })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayersSpec {
    #[serde(default)]
    pub row0: Vec<Number>,
    #[serde(default)]
    pub col0: Vec<Number>,
    #[serde(default)]
    pub row1: Vec<Number>,
    #[serde(default)]
    pub col1: Vec<Number>,
}

impl LayersSpec {
    fn all(&self) -> impl Iterator<Item = &Number> {
        self.row0.iter().chain(&self.col0).chain(&self.row1).chain(&self.col1)
    }

    pub fn is_exact(&self) -> bool {
        self.all().any(Number::is_exact)
    }

    pub fn to_f64(&self) -> Result<BoundaryLayers<f64>> {
        let c = |v: &[Number]| v.iter().map(Number::to_f64).collect::<Result<Vec<_>>>();
        BoundaryLayers::new(c(&self.row0)?, c(&self.col0)?, c(&self.row1)?, c(&self.col1)?)
    }

    pub fn to_rational(&self) -> Result<BoundaryLayers<BigRational>> {
        let c = |v: &[Number]| v.iter().map(Number::to_rational).collect::<Result<Vec<_>>>();
        BoundaryLayers::new(c(&self.row0)?, c(&self.col0)?, c(&self.row1)?, c(&self.col1)?)
    }
}

/// Income layers: either the two-time row/column form or general scalar boundaries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IncomeSpec {
    Layers(LayersSpec),
    Faces { layer0: BoundarySpec, layer1: BoundarySpec },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HicksSpec {
    pub gamma: Option<Scalars>,
    pub alpha: Option<Scalars>,
    pub income: Option<IncomeSpec>,
    /// Raw consumption layers for the (Y, C) system; derived from income otherwise.
    pub consumption: Option<BoundarySpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GfSpec {
    pub layers: Option<LayersSpec>,
    pub variant: Option<u8>,
    pub expand: Option<[usize; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaySpec {
    /// One affine step per time axis, applied in axis order.
    pub steps: Vec<MatrixSpec>,
    #[serde(default)]
    pub offsets: Option<Vec<VectorSpec>>,
    pub x0: VectorSpec,
    pub t: Vec<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { residual: 1e-8 }
    }
}

/// One JSON document describing a job; every block is optional and only the
/// blocks a subcommand needs are validated.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub m: Option<usize>,
    pub n: Option<usize>,
    pub coefficients: Option<ProviderSpec<MatrixSpec>>,
    pub forcing: Option<ProviderSpec<VectorSpec>>,
    pub boundary: Option<BoundarySpec>,
    pub period: Option<u64>,
    pub window: Option<Vec<u64>>,
    pub hicks: Option<HicksSpec>,
    pub gf: Option<GfSpec>,
    pub way: Option<WaySpec>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn missing(what: &str) -> Error {
    Error::Validation(format!("config has no {what}"))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Validation(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Validation(format!("{}: {e}", path.display())))
}

pub fn parse_config(path: &Path) -> Result<JobConfig> {
    read_json(path)
}

impl JobConfig {
    pub fn window(&self) -> Result<Window> {
        Window::new(self.window.clone().ok_or_else(|| missing("window"))?)
    }

    pub fn coefficient_provider(&self) -> Result<CoefficientProvider> {
        let spec = self.coefficients.as_ref().ok_or_else(|| missing("coefficients"))?;
        let a = spec.build(matrix)?;
        let n = self.n.ok_or_else(|| missing("n"))?;
        let sample = a.at(&MultiIndex::zeros(self.dim()?));
        if sample.rows() != n || sample.cols() != n {
            return Err(Error::Validation(format!("coefficient matrices are {}×{} but n = {n}", sample.rows(), sample.cols())));
        }
        Ok(a)
    }

    pub fn dim(&self) -> Result<usize> {
        let m = self.m.ok_or_else(|| missing("m"))?;
        if m < 2 {
            return Err(Error::Validation(format!("recurrence jobs need m ≥ 2, got {m}")));
        }
        Ok(m)
    }

    pub fn boundary_data(&self) -> Result<BoundaryData> {
        let spec = self.boundary.as_ref().ok_or_else(|| missing("boundary"))?;
        spec.build(self.dim()?, self.n.ok_or_else(|| missing("n"))?)
    }

    /// Zero forcing when the config has none.
    pub fn recurrence(&self) -> Result<DiagonalRecurrence> {
        let forcing: Option<ForcingProvider> = self.forcing.as_ref().map(|f| f.build(|v| Ok(vector(v)))).transpose()?;
        DiagonalRecurrence::new(self.coefficient_provider()?, forcing, self.boundary_data()?)
    }

    pub fn hicks_params(&self, gamma: Option<&Scalars>, alpha: Option<&Scalars>) -> Result<HicksParams> {
        let block = self.hicks.as_ref();
        let pick = |flag: Option<&Scalars>, cfg: Option<&Scalars>, name: &str| -> Result<Vec<f64>> {
            let s = flag.or(cfg).ok_or_else(|| missing(name))?;
            s.items().iter().map(Number::to_f64).collect()
        };
        let g = pick(gamma, block.and_then(|h| h.gamma.as_ref()), "gamma")?;
        let a = pick(alpha, block.and_then(|h| h.alpha.as_ref()), "alpha")?;
        if let Some(x) = g.iter().find(|&&x| !(x > 0.0 && x < 1.0)) {
            return Err(Error::Validation(format!("gamma out of (0,1): {x}")));
        }
        HicksParams::new(g, a)
    }

    pub fn exact_params(&self, gamma: Option<&Scalars>, alpha: Option<&Scalars>) -> Result<(Number, Number)> {
        let block = self.hicks.as_ref();
        let one = |flag: Option<&Scalars>, cfg: Option<&Scalars>, name: &str| -> Result<Number> {
            let items = flag.or(cfg).ok_or_else(|| missing(name))?.items();
            match items.as_slice() {
                [x] => Ok(x.clone()),
                _ => Err(Error::Validation(format!("generating functions need a single {name}"))),
            }
        };
        Ok((one(gamma, block.and_then(|h| h.gamma.as_ref()), "gamma")?, one(alpha, block.and_then(|h| h.alpha.as_ref()), "alpha")?))
    }

    pub fn income(&self, override_spec: Option<&IncomeSpec>, window: &Window) -> Result<SecondOrderBoundary> {
        let spec = override_spec.or(self.hicks.as_ref().and_then(|h| h.income.as_ref())).ok_or_else(|| missing("hicks.income"))?;
        match spec {
            IncomeSpec::Layers(l) => {
                if window.dim() != 2 {
                    return Err(Error::Validation("row/column layers describe two-time models only".into()));
                }
                let extent = window.extents().iter().copied().max().unwrap_or(0);
                l.to_f64()?.to_second_order(extent)
            }
            IncomeSpec::Faces { layer0, layer1 } => {
                SecondOrderBoundary::new(layer0.build(window.dim(), 1)?, layer1.build(window.dim(), 1)?)
            }
        }
    }
}
