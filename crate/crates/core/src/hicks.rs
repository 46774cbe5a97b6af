//! Multitime Samuelson-Hicks models.
//!
//! Income `Y` obeys `Y(t+2·1) − (γ+α)Y(t+1) + αY(t) = 0` along diagonals. The
//! same dynamics are available as the (Y, C) consumption system and as the
//! (Y, Z) companion system with `Z(t) = Y(t+1)`.
//!
//! Periodic parameters are functions of the phase `μ(t) mod T` only, so
//! `γ(t − 1)` on a face wraps to phase `T − 1`.

use serde::{Deserialize, Serialize};

use crate::algebra::{real_vector, solve_quadratic, Matrix, Quadratic, Vector, C64};
use crate::error::{Error, Result};
use crate::floquet::monodromy;
use crate::lattice::{MultiIndex, Window};
use crate::recurrence::{
    compare_faces, solve_iterative, BoundaryData, CoefficientProvider, CompatibilityReport, DiagonalRecurrence,
    Extension, FaceTable, Provider, SolutionField,
};

/// Relative tolerance used to call a discriminant zero.
const DOUBLE_ROOT_TOL: f64 = 1e-12;

/// `γ` and `α` as phase tables; a table of length one is a constant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HicksParams {
    gamma: Vec<f64>,
    alpha: Vec<f64>,
}

impl HicksParams {
    pub fn new(gamma: Vec<f64>, alpha: Vec<f64>) -> Result<Self> {
        if gamma.is_empty() || alpha.is_empty() {
            return Err(Error::Validation("γ and α need at least one phase".into()));
        }
        if gamma.len() != alpha.len() && gamma.len() != 1 && alpha.len() != 1 {
            return Err(Error::Validation(format!(
                "phase lengths disagree: γ has {}, α has {}",
                gamma.len(),
                alpha.len()
            )));
        }
        if let Some(g) = gamma.iter().find(|&&g| !(g > 0.0 && g < 1.0)) {
            return Err(Error::Validation(format!("γ = {g} is outside (0, 1)")));
        }
        if let Some(a) = alpha.iter().find(|&&a| !(a > 0.0 && a.is_finite())) {
            return Err(Error::Validation(format!("α = {a} must be positive")));
        }
        Ok(HicksParams { gamma, alpha })
    }

    pub fn constant(gamma: f64, alpha: f64) -> Result<Self> {
        HicksParams::new(vec![gamma], vec![alpha])
    }

    pub fn period(&self) -> usize {
        self.gamma.len().max(self.alpha.len())
    }

    pub fn is_constant(&self) -> bool {
        self.period() == 1
    }

    /// `γ` at phase `p` (taken mod T, so −1 is the last phase).
    pub fn gamma(&self, p: i64) -> f64 {
        self.gamma[p.rem_euclid(self.gamma.len() as i64) as usize]
    }

    pub fn alpha(&self, p: i64) -> f64 {
        self.alpha[p.rem_euclid(self.alpha.len() as i64) as usize]
    }

    /// `∏ α` over one period.
    pub fn alpha_product(&self) -> f64 {
        (0..self.period() as i64).map(|p| self.alpha(p)).product()
    }

    fn require_constant(&self) -> Result<()> {
        if self.is_constant() {
            Ok(())
        } else {
            Err(Error::Validation("operation needs constant parameters".into()))
        }
    }
}

fn system_matrix_at(p: &HicksParams, phase: i64) -> Matrix {
    let (g, a) = (p.gamma(phase), p.alpha(phase));
    Matrix::real(&[[g + a, -a / p.gamma(phase - 1)], [g, 0.0]])
}

fn companion_matrix_at(p: &HicksParams, phase: i64) -> Matrix {
    let (g, a) = (p.gamma(phase + 1), p.alpha(phase + 1));
    Matrix::real(&[[0.0, 1.0], [-a, g + a]])
}

/// `[[γ+α, −α/γ], [γ, 0]]` for constant parameters.
pub fn constant_system_matrix(p: &HicksParams) -> Result<Matrix> {
    p.require_constant()?;
    Ok(system_matrix_at(p, 0))
}

fn phase_provider(p: &HicksParams, f: impl Fn(&HicksParams, i64) -> Matrix) -> CoefficientProvider {
    if p.is_constant() {
        Provider::Constant(f(p, 0))
    } else {
        Provider::DiagonalPhase((0..p.period() as i64).map(|ph| f(p, ph)).collect())
    }
}

/// The (Y, C) system `[[γ(t)+α(t), −α(t)/γ(t−1)], [γ(t), 0]]`.
pub fn periodic_system_provider(p: &HicksParams) -> CoefficientProvider {
    phase_provider(p, system_matrix_at)
}

/// The (Y, Z) companion system `[[0, 1], [−α(t+1), γ(t+1)+α(t+1)]]`.
pub fn companion_provider(p: &HicksParams) -> CoefficientProvider {
    phase_provider(p, companion_matrix_at)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RootKind {
    RealDistinct,
    RealDouble,
    ComplexPair,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AcceleratorClass {
    Decelerator,
    Keeper,
    Accelerator,
}

impl AcceleratorClass {
    pub fn of(alpha: f64) -> Self {
        if alpha < 1.0 {
            AcceleratorClass::Decelerator
        } else if alpha == 1.0 {
            AcceleratorClass::Keeper
        } else {
            AcceleratorClass::Accelerator
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HicksClassification {
    pub discriminant: f64,
    pub root_kind: RootKind,
    pub roots: Quadratic,
    pub stable: bool,
    pub accelerator_class: AcceleratorClass,
}

/// Characteristic roots of `λ² − (γ+α)λ + α` and what they say about the model.
pub fn classify(p: &HicksParams) -> Result<HicksClassification> {
    p.require_constant()?;
    let (g, a) = (p.gamma(0), p.alpha(0));
    let s = g + a;
    let discriminant = s * s - 4.0 * a;
    let root_kind = if discriminant.abs() <= DOUBLE_ROOT_TOL * (s * s).max(4.0 * a) {
        RootKind::RealDouble
    } else if discriminant > 0.0 {
        RootKind::RealDistinct
    } else {
        RootKind::ComplexPair
    };
    let roots = solve_quadratic(C64::new(1.0, 0.0), C64::new(-s, 0.0), C64::new(a, 0.0))?;
    // Jury conditions for z² − sz + α: |α| < 1, 1 − s + α > 0, 1 + s + α > 0
    let stable = a.abs() < 1.0 && 1.0 - s + a > 0.0 && 1.0 + s + a > 0.0;
    Ok(HicksClassification { discriminant, root_kind, roots, stable, accelerator_class: AcceleratorClass::of(a) })
}

/// Income layers on the faces `t^β = 0` and `t^β = 1` (scalar tables).
#[derive(Clone, Debug, PartialEq)]
pub struct SecondOrderBoundary {
    pub layer0: BoundaryData,
    pub layer1: BoundaryData,
}

impl SecondOrderBoundary {
    pub fn new(layer0: BoundaryData, layer1: BoundaryData) -> Result<Self> {
        if layer0.n() != 1 || layer1.n() != 1 {
            return Err(Error::Validation("income layers must be scalar".into()));
        }
        if layer0.m() != layer1.m() {
            return Err(Error::DimensionMismatch { expected: layer0.m(), found: layer1.m() });
        }
        Ok(SecondOrderBoundary { layer0, layer1 })
    }

    /// Both layers read off a function of the full point, which is always compatible.
    pub fn from_point_fn(m: usize, extent: u64, extension: Extension, f: impl Fn(&MultiIndex) -> f64) -> Result<Self> {
        let layer = |level: u64| {
            let faces = (0..m)
                .map(|beta| {
                    FaceTable::from_fn(vec![extent; m - 1], |r| real_vector(&[f(&MultiIndex::insert_axis(r, beta, level))]))
                })
                .collect();
            BoundaryData::new(1, faces, extension)
        };
        SecondOrderBoundary::new(layer(0)?, layer(1)?)
    }

    pub fn m(&self) -> usize {
        self.layer0.m()
    }

    /// Agreement of layer-0 faces pairwise, of layer-1 faces pairwise, and of
    /// layer-0 against layer-1 where `t^α = 0` meets `t^β = 1`.
    pub fn check(&self) -> CompatibilityReport {
        let m = self.m();
        let mut report = CompatibilityReport::default();
        for a in 0..m {
            for b in a + 1..m {
                report.violations.extend(compare_faces(&self.layer0, a, 0, &self.layer0, b, 0));
                report.violations.extend(compare_faces(&self.layer1, a, 1, &self.layer1, b, 1));
            }
        }
        for a in 0..m {
            for b in (0..m).filter(|&b| b != a) {
                report.violations.extend(compare_faces(&self.layer0, a, 0, &self.layer1, b, 1));
            }
        }
        report
    }

    fn require_compatible(&self) -> Result<()> {
        let report = self.check();
        match report.violations.first() {
            None => Ok(()),
            Some(v) => Err(Error::Validation(format!(
                "{} layer mismatches; first between faces {} (level {}) and {} (level {}) at {}",
                report.violations.len(),
                v.alpha,
                v.levels.0,
                v.beta,
                v.levels.1,
                v.point
            ))),
        }
    }

    /// `Y(t)` for `μ(t) = 0` from layer 0, for `μ(t) = 1` from layer 1.
    pub fn value(&self, t: &MultiIndex) -> Result<f64> {
        let comps = t.components();
        let v = match t.mu() {
            0 => self.layer0.value_at(t)?,
            1 => {
                let beta = comps.iter().position(|&c| c == 1).expect("μ = 1");
                self.layer1.face_value(beta, &t.drop_axis(beta), 1)?
            }
            _ => return Err(Error::Contract(format!("{t} is not on a layer"))),
        };
        Ok(v[0].re)
    }
}

fn check_window(p: &SecondOrderBoundary, window: &Window) -> Result<()> {
    if window.dim() != p.m() {
        return Err(Error::DimensionMismatch { expected: p.m(), found: window.dim() });
    }
    p.require_compatible()
}

/// Per-diagonal scalar iteration `Y(s+2) = (γ+α)(s+1)·Y(s+1) − α(s+1)·Y(s)`.
pub fn solve_second_order(p: &HicksParams, boundary: &SecondOrderBoundary, window: &Window) -> Result<SolutionField> {
    check_window(boundary, window)?;
    let mut values = vec![Vec::new(); window.len()];
    for base in window.diagonal_bases() {
        let mut prev = boundary.value(&base)?;
        values[window.offset(&base).expect("in window")] = real_vector(&[prev]);
        let first = base.up(1);
        let Some(off) = window.offset(&first) else { continue };
        let mut cur = boundary.value(&first)?;
        values[off] = real_vector(&[cur]);
        let mut k = 2u64;
        while let Some(off) = window.offset(&base.up(k)) {
            let ph = (k - 1) as i64;
            let next = (p.gamma(ph) + p.alpha(ph)) * cur - p.alpha(ph) * prev;
            values[off] = real_vector(&[next]);
            (prev, cur) = (cur, next);
            k += 1;
        }
    }
    SolutionField::new(window.clone(), 1, values)
}

/// `Y(b+1)` for a base `b`, or 0 when it is neither in the window nor in the tables.
fn next_income(boundary: &SecondOrderBoundary, window: &Window, base: &MultiIndex) -> Result<f64> {
    let next = base.up(1);
    match boundary.value(&next) {
        Ok(v) => Ok(v),
        Err(Error::BoundaryUnavailable { .. }) if !window.contains(&next) => Ok(0.0),
        Err(e) => Err(e),
    }
}

fn faces_over_window(window: &Window, n: usize, mut f: impl FnMut(&MultiIndex) -> Result<Vector>) -> Result<BoundaryData> {
    let m = window.dim();
    let mut faces = Vec::with_capacity(m);
    for beta in 0..m {
        let mut extent = window.extents().to_vec();
        extent.remove(beta);
        let mut err = None;
        let table = FaceTable::from_fn(extent, |r| {
            f(&MultiIndex::insert_axis(r, beta, 0)).unwrap_or_else(|e| {
                err.get_or_insert(e);
                vec![C64::new(0.0, 0.0); n]
            })
        });
        if let Some(e) = err {
            return Err(e);
        }
        faces.push(table);
    }
    BoundaryData::new(n, faces, Extension::Strict)
}

/// The (Y, Z) companion recurrence seeded with `Z(b) = Y(b+1)` on the window faces.
pub fn companion_recurrence(p: &HicksParams, boundary: &SecondOrderBoundary, window: &Window) -> Result<DiagonalRecurrence> {
    check_window(boundary, window)?;
    let faces = faces_over_window(window, 2, |b| {
        Ok(real_vector(&[boundary.value(b)?, next_income(boundary, window, b)?]))
    })?;
    DiagonalRecurrence::homogeneous(companion_provider(p), faces)
}

/// How the consumption faces of the (Y, C) system are obtained.
#[derive(Clone, Debug, PartialEq)]
pub enum ConsumptionSeed {
    /// `C(b) = γ(b−1)·((γ+α)(b)·Y(b) − Y(b+1))/α(b)`, which reproduces the income layers.
    Derived,
    /// Raw consumption faces `t^β = 0`.
    Layers(BoundaryData),
}

pub fn system_recurrence(
    p: &HicksParams,
    boundary: &SecondOrderBoundary,
    seed: &ConsumptionSeed,
    window: &Window,
) -> Result<DiagonalRecurrence> {
    check_window(boundary, window)?;
    if let ConsumptionSeed::Layers(c) = seed {
        if c.n() != 1 || c.m() != boundary.m() {
            return Err(Error::Validation("consumption layers must be scalar faces of the same dimension".into()));
        }
        let report = crate::recurrence::check_compatibility(c);
        if !report.is_compatible() {
            return Err(Error::Validation(format!("{} consumption face mismatches", report.violations.len())));
        }
    }
    let faces = faces_over_window(window, 2, |b| {
        let y = boundary.value(b)?;
        let c = match seed {
            ConsumptionSeed::Derived => {
                let y1 = next_income(boundary, window, b)?;
                p.gamma(-1) * ((p.gamma(0) + p.alpha(0)) * y - y1) / p.alpha(0)
            }
            ConsumptionSeed::Layers(c) => c.value_at(b)?[0].re,
        };
        Ok(real_vector(&[y, c]))
    })?;
    DiagonalRecurrence::homogeneous(periodic_system_provider(p), faces)
}

/// (Y, Z) field on the window.
pub fn solve_companion(p: &HicksParams, boundary: &SecondOrderBoundary, window: &Window) -> Result<SolutionField> {
    solve_iterative(&companion_recurrence(p, boundary, window)?, window)
}

/// (Y, C) field on the window.
pub fn solve_system(
    p: &HicksParams,
    boundary: &SecondOrderBoundary,
    seed: &ConsumptionSeed,
    window: &Window,
) -> Result<SolutionField> {
    solve_iterative(&system_recurrence(p, boundary, seed, window)?, window)
}

/// A negative income or consumption value; economics expects neither.
#[derive(Clone, Debug, PartialEq)]
pub struct SignWarning {
    pub point: MultiIndex,
    pub component: usize,
    pub value: f64,
}

pub fn negativity_warnings(field: &SolutionField) -> Vec<SignWarning> {
    field
        .iter()
        .flat_map(|(t, v)| {
            v.iter()
                .enumerate()
                .filter(|(_, z)| z.re < 0.0)
                .map(move |(k, z)| SignWarning { point: t.clone(), component: k, value: z.re })
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Multipliers as roots of `z² − tr(D)·z + det(D)`, with `det D` next to `∏ α`.
#[derive(Clone, Debug, PartialEq)]
pub struct HicksMultipliers {
    pub base: MultiIndex,
    pub monodromy: Matrix,
    pub trace: f64,
    pub det: f64,
    pub alpha_product: f64,
    pub quadratic: Quadratic,
}

pub fn hicks_floquet_multipliers(p: &HicksParams, t: &MultiIndex) -> Result<HicksMultipliers> {
    let d = monodromy(&companion_provider(p), p.period() as u64, t)?;
    let trace = d.trace().re;
    let det = d.determinant()?.re;
    let quadratic = solve_quadratic(C64::new(1.0, 0.0), C64::new(-trace, 0.0), C64::new(det, 0.0))?;
    Ok(HicksMultipliers { base: t.base(), monodromy: d, trace, det, alpha_product: p.alpha_product(), quadratic })
}
