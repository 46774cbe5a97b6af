use serde::{Deserialize, Serialize};

use crate::algebra::{vectors_close, Vector, C64};
use crate::error::{Error, Result};
use crate::lattice::MultiIndex;

/// What a finite face table answers outside its window.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Extension {
    Zero,
    #[default]
    Strict,
}

/// One face function `f_β` tabulated over a rectangle in ℕ^{m−1}.
#[derive(Clone, Debug, PartialEq)]
pub struct FaceTable {
    extent: Vec<u64>,
    values: Vec<Vector>,
}

impl FaceTable {
    pub fn new(extent: Vec<u64>, values: Vec<Vector>) -> Result<Self> {
        let expected = extent.iter().product::<u64>() as usize;
        if values.len() != expected {
            return Err(Error::DimensionMismatch { expected, found: values.len() });
        }
        Ok(FaceTable { extent, values })
    }

    pub fn from_fn(extent: Vec<u64>, mut f: impl FnMut(&[u64]) -> Vector) -> Self {
        let total = extent.iter().product::<u64>() as usize;
        let mut values = Vec::with_capacity(total);
        let mut idx = vec![0u64; extent.len()];
        for _ in 0..total {
            values.push(f(&idx));
            for (slot, e) in idx.iter_mut().zip(&extent).rev() {
                *slot += 1;
                if *slot < *e {
                    break;
                }
                *slot = 0;
            }
        }
        FaceTable { extent, values }
    }

    pub fn constant(extent: Vec<u64>, v: Vector) -> Self {
        FaceTable::from_fn(extent, |_| v.clone())
    }

    pub fn extent(&self) -> &[u64] {
        &self.extent
    }

    pub fn values(&self) -> &[Vector] {
        &self.values
    }

    pub fn get(&self, idx: &[u64]) -> Option<&Vector> {
        if idx.len() != self.extent.len() {
            return None;
        }
        let mut off = 0usize;
        for (c, e) in idx.iter().zip(&self.extent) {
            if c >= e {
                return None;
            }
            off = off * (*e as usize) + *c as usize;
        }
        self.values.get(off)
    }
}

/// The m face functions `f_β = x|_{t^β = level}` (level 0 for first-order data).
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryData {
    m: usize,
    n: usize,
    faces: Vec<FaceTable>,
    extension: Extension,
}

impl BoundaryData {
    pub fn new(n: usize, faces: Vec<FaceTable>, extension: Extension) -> Result<Self> {
        let m = faces.len();
        if m < 2 {
            return Err(Error::Validation(format!("boundary needs m ≥ 2 faces, got {m}")));
        }
        for f in &faces {
            if f.extent.len() != m - 1 {
                return Err(Error::DimensionMismatch { expected: m - 1, found: f.extent.len() });
            }
            if let Some(v) = f.values.iter().find(|v| v.len() != n) {
                return Err(Error::DimensionMismatch { expected: n, found: v.len() });
            }
        }
        Ok(BoundaryData { m, n, faces, extension })
    }

    /// Every face filled from a function of the full boundary point.
    pub fn from_point_fn(
        m: usize,
        n: usize,
        extent: u64,
        extension: Extension,
        f: impl Fn(&MultiIndex) -> Vector,
    ) -> Result<Self> {
        let faces = (0..m)
            .map(|beta| FaceTable::from_fn(vec![extent; m - 1], |r| f(&MultiIndex::insert_axis(r, beta, 0))))
            .collect();
        BoundaryData::new(n, faces, extension)
    }

    pub fn uniform(m: usize, extent: u64, value: Vector) -> Result<Self> {
        let n = value.len();
        BoundaryData::from_point_fn(m, n, extent, Extension::Strict, |_| value.clone())
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn extension(&self) -> Extension {
        self.extension
    }

    pub fn faces(&self) -> &[FaceTable] {
        &self.faces
    }

    /// `f_β(reduced)`.
    pub fn face_value(&self, beta: usize, reduced: &[u64], level: u64) -> Result<Vector> {
        match self.faces[beta].get(reduced) {
            Some(v) => Ok(v.clone()),
            None => match self.extension {
                Extension::Zero => Ok(vec![C64::new(0.0, 0.0); self.n]),
                Extension::Strict => {
                    Err(Error::BoundaryUnavailable { face: beta, point: MultiIndex::insert_axis(reduced, beta, level) })
                }
            },
        }
    }

    /// Value at a level-0 point, read from the first face containing it.
    pub fn value_at(&self, t: &MultiIndex) -> Result<Vector> {
        let beta = t.components().iter().position(|&c| c == 0).ok_or_else(|| {
            Error::Contract(format!("point {t} is not on a face t^β = 0"))
        })?;
        self.face_value(beta, &t.drop_axis(beta), 0)
    }

    /// Value at a point with `t^β = level` read from face β.
    pub(crate) fn value_on_face(&self, beta: usize, t: &MultiIndex, level: u64) -> Result<Vector> {
        debug_assert_eq!(t.components()[beta], level);
        self.face_value(beta, &t.drop_axis(beta), level)
    }
}

/// A pair of face readings that disagree at a shared point.
#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub alpha: usize,
    pub beta: usize,
    /// Levels of the two faces (`t^α = levels.0`, `t^β = levels.1`).
    pub levels: (u64, u64),
    pub point: MultiIndex,
    pub left: Vector,
    pub right: Vector,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CompatibilityReport {
    pub violations: Vec<Violation>,
}

impl CompatibilityReport {
    pub fn is_compatible(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn merge(&mut self, other: CompatibilityReport) {
        self.violations.extend(other.violations);
    }
}

const COMPAT_TOL: f64 = 1e-12;

/// Compare face α of `left` (at `t^α = la`) with face β of `right` (at `t^β = lb`)
/// on every shared point the two tables determine.
pub(crate) fn compare_faces(
    left: &BoundaryData,
    alpha: usize,
    la: u64,
    right: &BoundaryData,
    beta: usize,
    lb: u64,
) -> Vec<Violation> {
    let m = left.m;
    let zero_ext = left.extension == Extension::Zero && right.extension == Extension::Zero;
    // bounds on every axis other than α and β
    let mut bounds = vec![0u64; m];
    for (axis, bound) in bounds.iter_mut().enumerate() {
        if axis == alpha || axis == beta {
            continue;
        }
        let ea = left.faces[alpha].extent[if axis < alpha { axis } else { axis - 1 }];
        let eb = right.faces[beta].extent[if axis < beta { axis } else { axis - 1 }];
        *bound = if zero_ext { ea.max(eb) } else { ea.min(eb) };
    }
    bounds[alpha] = 1;
    bounds[beta] = 1;
    let mut out = Vec::new();
    let total: u64 = bounds.iter().product();
    let mut idx = vec![0u64; m];
    for _ in 0..total {
        let mut comps = idx.clone();
        comps[alpha] = la;
        comps[beta] = lb;
        let t = MultiIndex::new(comps).expect("m ≥ 2");
        let a = left.face_value(alpha, &t.drop_axis(alpha), la);
        let b = right.face_value(beta, &t.drop_axis(beta), lb);
        if let (Ok(a), Ok(b)) = (a, b) {
            if !vectors_close(&a, &b, COMPAT_TOL, COMPAT_TOL) {
                out.push(Violation { alpha, beta, levels: (la, lb), point: t, left: a, right: b });
            }
        }
        for (slot, e) in idx.iter_mut().zip(&bounds).rev() {
            *slot += 1;
            if *slot < *e {
                break;
            }
            *slot = 0;
        }
    }
    out
}

/// Pairwise agreement `f_α|_{t^β=0} = f_β|_{t^α=0}` for all α < β.
pub fn check_compatibility(boundary: &BoundaryData) -> CompatibilityReport {
    let mut violations = Vec::new();
    for alpha in 0..boundary.m {
        for beta in alpha + 1..boundary.m {
            violations.extend(compare_faces(boundary, alpha, 0, boundary, beta, 0));
        }
    }
    CompatibilityReport { violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::real_vector;

    fn scalar_face(values: &[f64]) -> FaceTable {
        FaceTable::new(vec![values.len() as u64], values.iter().map(|&v| real_vector(&[v])).collect()).unwrap()
    }

    #[test]
    fn identity_faces_compatible() {
        let f: Vec<f64> = (0..5).map(|k| k as f64).collect();
        let b = BoundaryData::new(1, vec![scalar_face(&f), scalar_face(&f)], Extension::Strict).unwrap();
        assert!(check_compatibility(&b).is_compatible());
    }

    #[test]
    fn mismatched_corner_reported() {
        let b = BoundaryData::new(1, vec![scalar_face(&[1.0, 2.0]), scalar_face(&[0.0, 2.0])], Extension::Strict)
            .unwrap();
        let r = check_compatibility(&b);
        assert_eq!(r.violations.len(), 1);
        let v = &r.violations[0];
        assert_eq!((v.alpha, v.beta), (0, 1));
        assert_eq!(v.point, MultiIndex::zeros(2));
    }

    #[test]
    fn constant_faces_in_three_dims() {
        let b = BoundaryData::uniform(3, 4, real_vector(&[2.5, -1.0])).unwrap();
        assert!(check_compatibility(&b).is_compatible());
    }

    #[test]
    fn three_dim_edge_mismatch() {
        // f₁ and f₂ disagree along the t³ axis at t³ = 2
        let faces: Vec<FaceTable> = (0..3)
            .map(|beta| {
                FaceTable::from_fn(vec![3, 3], |r| {
                    let t = MultiIndex::insert_axis(r, beta, 0);
                    let bump = if beta == 1 && t.components() == [0, 0, 2] { 1.0 } else { 0.0 };
                    real_vector(&[t.components().iter().sum::<u64>() as f64 + bump])
                })
            })
            .collect();
        let b = BoundaryData::new(1, faces, Extension::Strict).unwrap();
        let r = check_compatibility(&b);
        assert_eq!(r.violations.len(), 1);
        assert_eq!((r.violations[0].alpha, r.violations[0].beta), (0, 1));
        assert_eq!(r.violations[0].point.components(), [0, 0, 2]);
    }

    #[test]
    fn strict_and_zero_extension() {
        let strict = BoundaryData::new(1, vec![scalar_face(&[1.0]), scalar_face(&[1.0])], Extension::Strict).unwrap();
        assert!(matches!(strict.face_value(0, &[3], 0), Err(Error::BoundaryUnavailable { face: 0, .. })));
        let zero = BoundaryData::new(1, vec![scalar_face(&[1.0]), scalar_face(&[1.0])], Extension::Zero).unwrap();
        assert_eq!(zero.face_value(0, &[3], 0).unwrap(), real_vector(&[0.0]));
    }

    #[test]
    fn face_table_indexing() {
        let f = FaceTable::from_fn(vec![2, 3], |r| real_vector(&[(10 * r[0] + r[1]) as f64]));
        assert_eq!(f.get(&[1, 2]).unwrap(), &real_vector(&[12.0]));
        assert!(f.get(&[2, 0]).is_none());
    }
}
