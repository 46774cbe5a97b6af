//! Path-ordered ("way required") recurrences: all t¹ steps from `x₀`, then all t² steps.
//!
//! More than two axes are handled by chaining the axes in index order. That
//! is an extension; only the two-time case carries the closed form
//! `x(t¹,t²) = A₂^{t²}·A₁^{t¹}·x₀`.

use std::fmt;
use std::sync::Arc;

use crate::algebra::{vec_add_assign, Matrix, Vector, C64};
use crate::error::{Error, Result};
use crate::lattice::MultiIndex;

/// `x ↦ M·x + c`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineMap {
    pub matrix: Matrix,
    pub offset: Vector,
}

impl AffineMap {
    pub fn new(matrix: Matrix, offset: Vector) -> Result<Self> {
        let n = matrix.require_square()?;
        if offset.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: offset.len() });
        }
        Ok(AffineMap { matrix, offset })
    }

    pub fn linear(matrix: Matrix) -> Result<Self> {
        let n = matrix.require_square()?;
        AffineMap::new(matrix, vec![C64::new(0.0, 0.0); n])
    }

    pub fn apply(&self, x: &[C64]) -> Vector {
        let mut y = self.matrix.mul_vec(x);
        vec_add_assign(&mut y, &self.offset);
        y
    }
}

/// One step map `F_β(t, x)`.
#[derive(Clone)]
pub enum StepMap {
    Affine(AffineMap),
    Custom(Arc<dyn Fn(&MultiIndex, &[C64]) -> Vector + Send + Sync>),
}

impl fmt::Debug for StepMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepMap::Affine(a) => f.debug_tuple("Affine").field(a).finish(),
            StepMap::Custom(_) => f.write_str("Custom"),
        }
    }
}

impl StepMap {
    pub fn custom(f: impl Fn(&MultiIndex, &[C64]) -> Vector + Send + Sync + 'static) -> Self {
        StepMap::Custom(Arc::new(f))
    }

    fn apply(&self, t: &MultiIndex, x: &[C64]) -> Vector {
        match self {
            StepMap::Affine(a) => a.apply(x),
            StepMap::Custom(f) => f(t, x),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PathRecurrence {
    steps: Vec<StepMap>,
    x0: Vector,
}

impl PathRecurrence {
    pub fn two_time(f1: StepMap, f2: StepMap, x0: Vector) -> Result<Self> {
        PathRecurrence::chained(vec![f1, f2], x0)
    }

    /// One step map per axis, applied in axis order.
    pub fn chained(steps: Vec<StepMap>, x0: Vector) -> Result<Self> {
        if steps.len() < 2 {
            return Err(Error::Validation("a path recurrence needs at least two axes".into()));
        }
        for s in &steps {
            if let StepMap::Affine(a) = s {
                if a.offset.len() != x0.len() {
                    return Err(Error::DimensionMismatch { expected: x0.len(), found: a.offset.len() });
                }
            }
        }
        Ok(PathRecurrence { steps, x0 })
    }

    pub fn dim(&self) -> usize {
        self.steps.len()
    }

    pub fn x0(&self) -> &Vector {
        &self.x0
    }
}

/// Walk the path to `t`, one step at a time.
pub fn solve_path(rec: &PathRecurrence, t: &MultiIndex) -> Result<Vector> {
    if t.dim() != rec.dim() {
        return Err(Error::DimensionMismatch { expected: rec.dim(), found: t.dim() });
    }
    let mut x = rec.x0.clone();
    let mut at = vec![0u64; t.dim()];
    for (axis, (&target, step)) in t.components().iter().zip(&rec.steps).enumerate() {
        for _ in 0..target {
            let here = MultiIndex::new(at.clone())?;
            x = step.apply(&here, &x);
            if x.len() != rec.x0.len() {
                return Err(Error::DimensionMismatch { expected: rec.x0.len(), found: x.len() });
            }
            at[axis] += 1;
        }
    }
    Ok(x)
}

/// `A₂^{t²}·A₁^{t¹}·x₀` by repeated squaring.
pub fn closed_form_constant(a1: &Matrix, a2: &Matrix, x0: &[C64], t: &MultiIndex) -> Result<Vector> {
    if t.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: t.dim() });
    }
    closed_form_chained(&[a1.clone(), a2.clone()], x0, t)
}

/// `A_m^{t^m}···A₁^{t¹}·x₀` for the chained extension.
pub fn closed_form_chained(mats: &[Matrix], x0: &[C64], t: &MultiIndex) -> Result<Vector> {
    if t.dim() != mats.len() {
        return Err(Error::DimensionMismatch { expected: mats.len(), found: t.dim() });
    }
    let mut x = x0.to_vec();
    for (a, &k) in mats.iter().zip(t.components()) {
        let n = a.require_square()?;
        if n != x.len() {
            return Err(Error::DimensionMismatch { expected: x.len(), found: n });
        }
        x = a.pow(k)?.mul_vec(&x);
    }
    Ok(x)
}
