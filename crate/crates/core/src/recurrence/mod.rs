//! Diagonal recurrences `x(t+1) = A(t)x(t) + b(t)` on ℕ^m with face data.

mod boundary;
mod field;
mod provider;

use rayon::prelude::*;

pub use boundary::{check_compatibility, BoundaryData, CompatibilityReport, Extension, FaceTable, Violation};
pub(crate) use boundary::compare_faces;
pub use field::{format_number, relative_error, SolutionField, Tolerance};
pub use provider::{lcm, CoefficientProvider, ForcingProvider, Provider};

use crate::algebra::{vec_add_assign, Matrix, Vector, C64};
use crate::error::{Error, Result};
use crate::lattice::{MultiIndex, Window};

#[derive(Clone, Debug)]
pub struct DiagonalRecurrence {
    m: usize,
    n: usize,
    coefficients: CoefficientProvider,
    forcing: Option<ForcingProvider>,
    boundary: BoundaryData,
}

impl DiagonalRecurrence {
    pub fn new(
        coefficients: CoefficientProvider,
        forcing: Option<ForcingProvider>,
        boundary: BoundaryData,
    ) -> Result<Self> {
        let (m, n) = (boundary.m(), boundary.n());
        if m < 2 {
            return Err(Error::Validation(format!("diagonal recurrences need m ≥ 2, got {m}")));
        }
        if n == 0 {
            return Err(Error::Validation("order n must be at least 1".into()));
        }
        coefficients.check_shape(n, m)?;
        if let Some(b) = &forcing {
            b.check_shape(n, m)?;
        }
        Ok(DiagonalRecurrence { m, n, coefficients, forcing, boundary })
    }

    pub fn homogeneous(coefficients: CoefficientProvider, boundary: BoundaryData) -> Result<Self> {
        DiagonalRecurrence::new(coefficients, None, boundary)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coefficients(&self) -> &CoefficientProvider {
        &self.coefficients
    }

    pub fn forcing(&self) -> Option<&ForcingProvider> {
        self.forcing.as_ref()
    }

    pub fn boundary(&self) -> &BoundaryData {
        &self.boundary
    }

    pub fn is_homogeneous(&self) -> bool {
        self.forcing.as_ref().is_none_or(ForcingProvider::is_zero)
    }

    fn check_point(&self, t: &MultiIndex) -> Result<()> {
        if t.dim() != self.m {
            return Err(Error::DimensionMismatch { expected: self.m, found: t.dim() });
        }
        Ok(())
    }

    fn step(&self, t: &MultiIndex, x: &[C64]) -> Vector {
        let mut next = self.coefficients.at(t).mul_vec(x);
        if let Some(b) = &self.forcing {
            vec_add_assign(&mut next, &b.at(t));
        }
        next
    }

    /// The base value `f_β(t − μ·1 without axis β)` for the first argmin axis β.
    fn base_value(&self, t: &MultiIndex) -> Result<Vector> {
        let dec = t.diag_decompose();
        let beta = t.argmin();
        self.boundary.value_on_face(beta, &dec.base, 0)
    }
}

/// `x(t)` from the closed formula: product chain on the base value plus the
/// telescoped forcing, built with running prefix products.
pub fn solve_explicit(rec: &DiagonalRecurrence, t: &MultiIndex) -> Result<Vector> {
    rec.check_point(t)?;
    let level = t.mu();
    if level == 0 {
        return rec.boundary.value_at(t);
    }
    let f = rec.base_value(t)?;
    let mut prefix = Matrix::identity(rec.n);
    let mut sum = vec![C64::new(0.0, 0.0); rec.n];
    for k in 1..=level {
        let s = t.down(k);
        if let Some(b) = &rec.forcing {
            vec_add_assign(&mut sum, &prefix.mul_vec(&b.at(&s)));
        }
        prefix = &prefix * &rec.coefficients.at(&s);
    }
    let mut x = prefix.mul_vec(&f);
    vec_add_assign(&mut x, &sum);
    Ok(x)
}

/// The single-factor form valid on the first diagonal layer: `A(t−1)f_β + b(t−1)`.
pub fn solve_level_one(rec: &DiagonalRecurrence, t: &MultiIndex) -> Result<Vector> {
    rec.check_point(t)?;
    if t.mu() != 1 {
        return Err(Error::Contract(format!("point {t} is not on level 1")));
    }
    let f = rec.base_value(t)?;
    Ok(rec.step(&t.down(1), &f))
}

/// `Φ(t) = A(t−1)A(t−2)···A(t−μ(t)·1)`, identity on the faces.
pub fn fundamental_matrix(rec: &DiagonalRecurrence, t: &MultiIndex) -> Result<Matrix> {
    rec.check_point(t)?;
    Ok(phi(&rec.coefficients, rec.n, t))
}

pub(crate) fn phi(coefficients: &CoefficientProvider, n: usize, t: &MultiIndex) -> Matrix {
    let mut out = Matrix::identity(n);
    for k in 1..=t.mu() {
        out = &out * &coefficients.at(&t.down(k));
    }
    out
}

/// `Φ(t)·f_β(base)`; only meaningful without forcing.
pub fn solve_homogeneous_via_phi(rec: &DiagonalRecurrence, t: &MultiIndex) -> Result<Vector> {
    rec.check_point(t)?;
    if !rec.is_homogeneous() {
        return Err(Error::Contract("homogeneous solve requested for a forced recurrence".into()));
    }
    if t.mu() == 0 {
        return rec.boundary.value_at(t);
    }
    Ok(phi(&rec.coefficients, rec.n, t).mul_vec(&rec.base_value(t)?))
}

/// Dependency-respecting visiting orders for the forward sweep.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SweepOrder {
    /// Level 0 from the faces, then level k+1 from level k.
    #[default]
    ByLevel,
    /// Plain lexicographic order; `t − 1` always precedes `t`.
    Lexicographic,
}

/// Brute-force forward iteration over a window.
pub fn solve_iterative(rec: &DiagonalRecurrence, window: &Window) -> Result<SolutionField> {
    solve_iterative_ordered(rec, window, SweepOrder::ByLevel)
}

pub fn solve_iterative_ordered(rec: &DiagonalRecurrence, window: &Window, order: SweepOrder) -> Result<SolutionField> {
    if window.dim() != rec.m {
        return Err(Error::DimensionMismatch { expected: rec.m, found: window.dim() });
    }
    let mut points: Vec<MultiIndex> = window.points().collect();
    if order == SweepOrder::ByLevel {
        // stable sort keeps lexicographic order within a level
        points.sort_by_key(MultiIndex::mu);
    }
    let mut values: Vec<Option<Vector>> = vec![None; window.len()];
    for t in points {
        let x = if t.mu() == 0 {
            rec.boundary.value_at(&t)?
        } else {
            let prev = t.down(1);
            let off = window.offset(&prev).expect("predecessor lies in the window");
            let xp = values[off].as_ref().expect("sweep order respects dependencies");
            rec.step(&prev, xp)
        };
        let off = window.offset(&t).expect("point in window");
        values[off] = Some(x);
    }
    SolutionField::new(window.clone(), rec.n, values.into_iter().map(Option::unwrap).collect())
}

/// Forward iteration with diagonals distributed over `jobs` worker threads.
pub fn solve_iterative_parallel(rec: &DiagonalRecurrence, window: &Window, jobs: usize) -> Result<SolutionField> {
    if jobs <= 1 {
        return solve_iterative(rec, window);
    }
    if window.dim() != rec.m {
        return Err(Error::DimensionMismatch { expected: rec.m, found: window.dim() });
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Validation(format!("cannot start worker pool: {e}")))?;
    let bases: Vec<MultiIndex> = window.diagonal_bases().collect();
    let walks: Vec<Vec<(usize, Vector)>> = pool.install(|| {
        bases
            .par_iter()
            .map(|base| {
                let mut out = Vec::new();
                let mut x = rec.boundary.value_at(base)?;
                let mut t = base.clone();
                loop {
                    out.push((window.offset(&t).expect("diagonal inside window"), x.clone()));
                    let next = t.up(1);
                    if !window.contains(&next) {
                        break;
                    }
                    x = rec.step(&t, &x);
                    t = next;
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut values = vec![Vec::new(); window.len()];
    for (off, x) in walks.into_iter().flatten() {
        values[off] = x;
    }
    SolutionField::new(window.clone(), rec.n, values)
}
