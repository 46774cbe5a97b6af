//! Floquet structure of T-diagonal-periodic recurrences.
//!
//! With `A(t + T·1) = A(t)` the fundamental matrix factors as
//! `Φ(t) = P(t)·B(t)^{μ(t)}` where `B(t)^T = D(t)` is the monodromy and `P`
//! is `T·1`-periodic. `D`, `B` and the multipliers only depend on the
//! diagonal base `t − μ(t)·1`.

use std::collections::HashMap;
use std::sync::Arc;

use crate::algebra::{eigenvalues, matrix_root, Matrix, MatrixRoot, Spectrum, Vector};
use crate::error::{Error, Result};
use crate::lattice::{MultiIndex, Window};
use crate::recurrence::{phi, relative_error, CoefficientProvider, DiagonalRecurrence, Provider, SolutionField};

const PERIODICITY_TOL: f64 = 1e-12;
/// Scaled residual above which an input field is not accepted as a solution.
const TRANSPORT_ACCEPT: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicityCheck {
    pub periodic: bool,
    /// First `t` (lexicographic) with `A(t + T·1) ≠ A(t)`.
    pub counterexample: Option<MultiIndex>,
    pub period: u64,
    pub window: Window,
}

fn root_degree(period: u64) -> Result<u32> {
    if period == 0 {
        return Err(Error::Domain("diagonal period must be positive".into()));
    }
    u32::try_from(period).map_err(|_| Error::Domain(format!("period {period} too large")))
}

/// Tests `A(t + T·1) = A(t)` for every `t` in the window.
pub fn check_diagonal_periodicity(a: &CoefficientProvider, period: u64, window: &Window) -> PeriodicityCheck {
    let exact = a.is_tabulated();
    let counterexample = window.points().find(|t| {
        let (lo, hi) = (a.at(t), a.at(&t.up(period)));
        if exact {
            lo != hi
        } else {
            hi.relative_diff(&lo) > PERIODICITY_TOL
        }
    });
    PeriodicityCheck { periodic: counterexample.is_none(), counterexample, period, window: window.clone() }
}

/// `Ã(t) = A(t+(T−1)·1)·A(t+(T−2)·1)···A(t)`.
pub fn tilde_a(a: &CoefficientProvider, period: u64, t: &MultiIndex) -> Result<Matrix> {
    root_degree(period)?;
    let mut out = a.at(&t.up(period - 1));
    for j in (0..period - 1).rev() {
        out = &out * &a.at(&t.up(j));
    }
    Ok(out)
}

/// `D(t) = Ã(t − μ(t)·1)`.
pub fn monodromy(a: &CoefficientProvider, period: u64, t: &MultiIndex) -> Result<Matrix> {
    tilde_a(a, period, &t.base())
}

/// The principal T-th root of the monodromy, with its spectral data.
pub fn floquet_root(a: &CoefficientProvider, period: u64, t: &MultiIndex) -> Result<MatrixRoot> {
    let degree = root_degree(period)?;
    matrix_root(&monodromy(a, period, t)?, degree)
}

/// `B(t)` with `B(t)^T = D(t)`.
pub fn floquet_b(a: &CoefficientProvider, period: u64, t: &MultiIndex) -> Result<Matrix> {
    Ok(floquet_root(a, period, t)?.root)
}

/// `P(t) = Φ(t)·B(t)^{−μ(t)}`.
pub fn floquet_p(rec: &DiagonalRecurrence, period: u64, t: &MultiIndex) -> Result<Matrix> {
    let root = floquet_root(rec.coefficients(), period, t)?;
    Ok(&phi(rec.coefficients(), rec.n(), t) * &root.pow(-(t.mu() as i64)))
}

/// Relative Frobenius residual of `Φ(t + kT·1) = Φ(t)·D(t)^k`, the left side by
/// a direct product chain and the right side through the monodromy power.
pub fn verify_proposition_power(a: &CoefficientProvider, period: u64, t: &MultiIndex, k: u64) -> Result<f64> {
    if k == 0 {
        return Err(Error::Domain("power k must be at least 1".into()));
    }
    let n = a.at(t).rows();
    let left = phi(a, n, &t.up(k * period));
    let right = &phi(a, n, t) * &monodromy(a, period, t)?.pow(k)?;
    Ok(left.relative_diff(&right))
}

/// Eigenvalues of `D(t)`.
pub fn floquet_multipliers(a: &CoefficientProvider, period: u64, t: &MultiIndex) -> Result<Spectrum> {
    eigenvalues(&monodromy(a, period, t)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// `x = P·y`: from the B-recurrence to the A-recurrence.
    Forward,
    /// `y = P⁻¹·x`.
    Inverse,
}

/// Per-base Floquet data.
#[derive(Clone, Debug)]
pub struct BaseRecord {
    pub monodromy: Matrix,
    pub root: MatrixRoot,
    pub multipliers: Spectrum,
}

/// `D`, `B` and multipliers keyed by diagonal base, plus `P` on a window.
#[derive(Clone, Debug)]
pub struct FloquetDecomposition {
    period: u64,
    n: usize,
    coefficients: CoefficientProvider,
    window: Window,
    records: Arc<HashMap<MultiIndex, BaseRecord>>,
    p: Vec<Matrix>,
}

impl FloquetDecomposition {
    pub fn build(a: &CoefficientProvider, period: u64, window: &Window) -> Result<Self> {
        let degree = root_degree(period)?;
        let mut records = HashMap::new();
        for base in window.diagonal_bases() {
            let d = tilde_a(a, period, &base)?;
            let root = matrix_root(&d, degree)?;
            let multipliers = eigenvalues(&d)?;
            records.insert(base, BaseRecord { monodromy: d, root, multipliers });
        }
        let n = a.at(&MultiIndex::zeros(window.dim())).rows();
        // Φ grows along each diagonal, so P is filled diagonal by diagonal
        let mut p = vec![Matrix::zeros(n, n); window.len()];
        for (base, rec) in &records {
            let inv_b = rec.root.pow(-1);
            let mut phi_t = Matrix::identity(n);
            let mut inv_pow = Matrix::identity(n);
            let mut t = base.clone();
            while let Some(off) = window.offset(&t) {
                let pt = &phi_t * &inv_pow;
                pt.inverse()?;
                p[off] = pt;
                phi_t = &a.at(&t) * &phi_t;
                inv_pow = &inv_pow * &inv_b;
                t = t.up(1);
            }
        }
        Ok(FloquetDecomposition { period, n, coefficients: a.clone(), window: window.clone(), records: Arc::new(records), p })
    }

    pub fn period(&self) -> u64 {
        self.period
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn record(&self, t: &MultiIndex) -> Option<&BaseRecord> {
        self.records.get(&t.base())
    }

    /// Records sorted by base, lexicographically.
    pub fn records(&self) -> Vec<(&MultiIndex, &BaseRecord)> {
        let mut out: Vec<_> = self.records.iter().collect();
        out.sort_by(|a, b| a.0.components().cmp(b.0.components()));
        out
    }

    pub fn d(&self, t: &MultiIndex) -> Option<&Matrix> {
        self.record(t).map(|r| &r.monodromy)
    }

    pub fn b(&self, t: &MultiIndex) -> Option<&Matrix> {
        self.record(t).map(|r| &r.root.root)
    }

    pub fn p(&self, t: &MultiIndex) -> Option<&Matrix> {
        self.window.offset(t).map(|i| &self.p[i])
    }

    /// `B(·)` as a coefficient provider. Bases outside the window are solved on demand.
    pub fn b_provider(&self) -> CoefficientProvider {
        let records = Arc::clone(&self.records);
        let a = self.coefficients.clone();
        let period = self.period;
        Provider::custom(move |t| match records.get(&t.base()) {
            Some(r) => r.root.root.clone(),
            None => floquet_b(&a, period, t).expect("Floquet root exists at every queried base"),
        })
    }

    /// Worst relative residual of `Φ(t) = P(t)·B(t)^{μ(t)}` over the window.
    pub fn reconstruction_residual(&self) -> f64 {
        self.window
            .points()
            .map(|t| {
                let rec = self.record(&t).expect("base cached");
                let rebuilt = self.p(&t).expect("in window") * &rec.root.pow(t.mu() as i64);
                phi(&self.coefficients, self.n, &t).relative_diff(&rebuilt)
            })
            .fold(0.0, f64::max)
    }

    /// Worst relative residual of `P(t + T·1) = P(t)` over checkable window points.
    pub fn periodicity_residual(&self) -> f64 {
        self.window
            .points()
            .filter_map(|t| Some(self.p(&t.up(self.period))?.relative_diff(self.p(&t)?)))
            .fold(0.0, f64::max)
    }

    /// Worst [`verify_proposition_power`] residual over the window for each `k`.
    pub fn proposition_residual(&self, ks: &[u64]) -> Result<f64> {
        let mut worst = 0.0f64;
        for t in self.window.points() {
            for &k in ks {
                let left = phi(&self.coefficients, self.n, &t.up(k * self.period));
                let d = self.d(&t).expect("base cached");
                let right = &phi(&self.coefficients, self.n, &t) * &d.pow(k)?;
                worst = worst.max(left.relative_diff(&right));
            }
        }
        Ok(worst)
    }
}

fn max_step_residual(field: &SolutionField, coefficient: impl Fn(&MultiIndex) -> Matrix) -> f64 {
    let mut worst = 0.0f64;
    for (t, v) in field.iter() {
        if let Some(next) = field.get(&t.up(1)) {
            worst = worst.max(relative_error(next, &coefficient(&t).mul_vec(v), 1e-12));
        }
    }
    worst
}

/// Carries solutions between `y(t+1) = B(t)y(t)` and `x(t+1) = A(t)x(t)` through `P`.
pub fn transport_solution(
    rec_x: &DiagonalRecurrence,
    period: u64,
    field: &SolutionField,
    direction: Direction,
) -> Result<SolutionField> {
    if !rec_x.is_homogeneous() {
        return Err(Error::Contract("transport applies to homogeneous recurrences".into()));
    }
    if field.n() != rec_x.n() {
        return Err(Error::DimensionMismatch { expected: rec_x.n(), found: field.n() });
    }
    let fd = FloquetDecomposition::build(rec_x.coefficients(), period, field.window())?;
    let a = rec_x.coefficients();
    let residual = match direction {
        Direction::Forward => max_step_residual(field, |t| fd.b(t).expect("base cached").clone()),
        Direction::Inverse => max_step_residual(field, |t| a.at(t)),
    };
    if residual > TRANSPORT_ACCEPT {
        return Err(Error::Contract(format!(
            "input field does not solve its recurrence (scaled residual {residual:e})"
        )));
    }
    let values = field
        .iter()
        .map(|(t, v)| {
            let p = fd.p(&t).expect("in window");
            Ok(match direction {
                Direction::Forward => p.mul_vec(v),
                Direction::Inverse => p.inverse()?.mul_vec(v),
            })
        })
        .collect::<Result<Vec<Vector>>>()?;
    SolutionField::new(field.window().clone(), field.n(), values)
}

/// Largest scaled residual of `x(t+1) = A(t)x(t)` on a homogeneous field.
pub fn homogeneous_residual(a: &CoefficientProvider, field: &SolutionField) -> f64 {
    max_step_residual(field, |t| a.at(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{mat_product_chain, real_vector, C64};
    use crate::recurrence::{solve_iterative, BoundaryData, Extension};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn mi(v: &[u64]) -> MultiIndex {
        MultiIndex::new(v.to_vec()).unwrap()
    }

    fn table_23() -> CoefficientProvider {
        let table = (0..6).map(|k| Matrix::real(&[[1.0 + k as f64, 0.0], [0.5, 2.0]])).collect();
        Provider::componentwise(vec![2, 3], table).unwrap()
    }

    /// Invertible, well-conditioned 2×2 factors with periods (2,2).
    fn random_periodic(seed: u64) -> CoefficientProvider {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let table = (0..4)
            .map(|_| {
                let mut u = || rng.gen_range(-0.5..0.5);
                Matrix::real(&[[1.0 + u(), u()], [u(), 1.0 + u()]])
            })
            .collect();
        Provider::componentwise(vec![2, 2], table).unwrap()
    }

    fn rec_with(a: CoefficientProvider, n: usize, extent: u64) -> DiagonalRecurrence {
        let boundary = BoundaryData::from_point_fn(2, n, extent, Extension::Strict, |t| {
            let s = (t.components()[0] + 2 * t.components()[1]) as f64;
            real_vector(&(0..n).map(|k| (0.7 * s + k as f64).cos()).collect::<Vec<_>>())
        })
        .unwrap();
        DiagonalRecurrence::homogeneous(a, boundary).unwrap()
    }

    #[test]
    fn periodicity_checks() {
        let w = Window::cube(2, 8);
        let c = Provider::Constant(Matrix::real(&[[0.3, 1.0], [2.0, -1.0]]));
        assert!(check_diagonal_periodicity(&c, 5, &w).periodic);
        assert!(check_diagonal_periodicity(&table_23(), 6, &w).periodic);
        let bad = check_diagonal_periodicity(&table_23(), 2, &w);
        assert!(!bad.periodic);
        // residues of (0,0) and (2,2) differ in the second axis
        assert_eq!(bad.counterexample, Some(mi(&[0, 0])));
    }

    #[test]
    fn custom_periodicity_uses_tolerance() {
        let a: CoefficientProvider =
            Provider::custom(|t| Matrix::real(&[[(std::f64::consts::PI * t.mu() as f64).cos()]]));
        assert!(check_diagonal_periodicity(&a, 2, &Window::cube(2, 6)).periodic);
        assert!(!check_diagonal_periodicity(&a, 1, &Window::cube(2, 6)).periodic);
    }

    #[test]
    fn tilde_a_examples() {
        let c = Matrix::real(&[[1.0, 1.0], [0.0, 2.0]]);
        let pc = Provider::Constant(c.clone());
        assert_eq!(tilde_a(&pc, 1, &mi(&[4, 1])).unwrap(), c);
        assert!(tilde_a(&pc, 3, &mi(&[0, 7])).unwrap().relative_diff(&c.pow(3).unwrap()) < 1e-15);
        let a = table_23();
        let oracle = mat_product_chain(2, &[a.at(&mi(&[2, 1])), a.at(&mi(&[1, 0]))]).unwrap();
        assert_eq!(tilde_a(&a, 2, &mi(&[1, 0])).unwrap(), oracle);
    }

    #[test]
    fn monodromy_is_constant_along_diagonals() {
        let a = random_periodic(7);
        let d0 = monodromy(&a, 2, &mi(&[0, 3])).unwrap();
        for k in 0..5 {
            assert_eq!(monodromy(&a, 2, &mi(&[k, 3 + k])).unwrap(), d0);
        }
        assert_eq!(monodromy(&a, 1, &mi(&[2, 5])).unwrap(), a.at(&mi(&[0, 3])));
    }

    #[test]
    fn diagonal_root() {
        // Ã = A² for constant A, so the square root gives A back
        let a = Provider::Constant(Matrix::real(&[[4.0, 0.0], [0.0, 9.0]]));
        let b = floquet_b(&a, 2, &mi(&[3, 3])).unwrap();
        assert!(b.relative_diff(&Matrix::real(&[[4.0, 0.0], [0.0, 9.0]])) < 1e-14);
        // phases (diag(4,9), I) make Ã = diag(4,9) on every diagonal
        let phased = Provider::diagonal_phase(vec![Matrix::real(&[[4.0, 0.0], [0.0, 9.0]]), Matrix::identity(2)]).unwrap();
        let b = floquet_b(&phased, 2, &mi(&[5, 2])).unwrap();
        assert!(b.relative_diff(&Matrix::real(&[[2.0, 0.0], [0.0, 3.0]])) < 1e-14);
    }

    #[test]
    fn p_collapses_for_constant_first_order_period() {
        let a = Matrix::real(&[[0.9, 0.2], [-0.3, 1.1]]);
        let rec = rec_with(Provider::Constant(a), 2, 8);
        for t in Window::cube(2, 5).points() {
            let p = floquet_p(&rec, 1, &t).unwrap();
            assert!(p.relative_diff(&Matrix::identity(2)) < 1e-12, "P({t}) = {p:?}");
        }
        assert_eq!(floquet_p(&rec, 3, &mi(&[0, 4])).unwrap().relative_diff(&Matrix::identity(2)), 0.0);
    }

    #[test]
    fn proposition_for_constant_system() {
        let a = Provider::Constant(Matrix::real(&[[2.0, 1.0], [0.0, 3.0]]));
        for k in 1..4 {
            assert!(verify_proposition_power(&a, 1, &mi(&[2, 3]), k).unwrap() < 1e-15);
        }
    }

    #[test]
    fn constant_hicks_multipliers() {
        let a = Provider::Constant(Matrix::real(&[[0.0, 1.0], [-0.5, 1.0]]));
        let s = floquet_multipliers(&a, 1, &mi(&[3, 1])).unwrap();
        let vals = s.values();
        assert!((vals[0] - C64::new(0.5, 0.5)).norm() < 1e-12);
        assert!((vals[1] - C64::new(0.5, -0.5)).norm() < 1e-12);
        assert!(vals.iter().all(|z| (z.norm() - 0.5f64.sqrt()).abs() < 1e-12));
    }

    #[test]
    fn identity_transport_is_identity() {
        let rec = rec_with(Provider::Constant(Matrix::identity(2)), 2, 6);
        let y = solve_iterative(&rec, &Window::cube(2, 5)).unwrap();
        let x = transport_solution(&rec, 1, &y, Direction::Forward).unwrap();
        assert!(x.max_relative_error(&y, 1e-300).unwrap() < 1e-15);
    }

    #[test]
    fn transport_rejects_non_solutions() {
        let rec = rec_with(random_periodic(3), 2, 8);
        let garbage = SolutionField::from_fn(Window::cube(2, 4), 2, |t| real_vector(&[t.mu() as f64, 1.0])).unwrap();
        assert!(matches!(transport_solution(&rec, 2, &garbage, Direction::Inverse), Err(Error::Contract(_))));
        assert!(matches!(transport_solution(&rec, 2, &garbage, Direction::Forward), Err(Error::Contract(_))));
    }

    #[test]
    fn decomposition_caches_by_base() {
        let a = random_periodic(11);
        let fd = FloquetDecomposition::build(&a, 2, &Window::cube(2, 6)).unwrap();
        assert_eq!(fd.records().len(), 11);
        for t in fd.window().points() {
            assert_eq!(fd.d(&t).unwrap(), &monodromy(&a, 2, &t).unwrap());
            let b = fd.b(&t).unwrap();
            assert_eq!(b, &floquet_b(&a, 2, &t).unwrap());
            assert!((b * b).relative_diff(fd.d(&t).unwrap()) < 1e-8);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn floquet_invariants(seed in any::<u64>()) {
            let a = random_periodic(seed);
            let fd = FloquetDecomposition::build(&a, 2, &Window::cube(2, 6)).unwrap();
            prop_assert!(fd.reconstruction_residual() < 1e-8);
            prop_assert!(fd.periodicity_residual() < 1e-8);
            prop_assert!(fd.proposition_residual(&[1, 2, 3]).unwrap() < 1e-8);
            for t in fd.window().points() {
                let r = fd.record(&t).unwrap();
                prop_assert!(r.root.pow(2).relative_diff(&r.monodromy) < 1e-8);
                prop_assert_eq!(fd.b(&t.up(1)).cloned(), floquet_b(&a, 2, &t).ok());
            }
        }

        #[test]
        fn p_is_periodic_pointwise(seed in any::<u64>()) {
            let rec = rec_with(random_periodic(seed), 2, 12);
            for t in Window::cube(2, 4).points() {
                let p0 = floquet_p(&rec, 2, &t).unwrap();
                let p1 = floquet_p(&rec, 2, &t.up(2)).unwrap();
                prop_assert!(p1.relative_diff(&p0) < 1e-8);
            }
        }

        #[test]
        fn proposition_residuals(seed in any::<u64>()) {
            let a = random_periodic(seed);
            for t in Window::cube(2, 4).points() {
                for k in 1..=3 {
                    prop_assert!(verify_proposition_power(&a, 2, &t, k).unwrap() < 1e-8);
                }
            }
        }

        #[test]
        fn multipliers_depend_only_on_base(seed in any::<u64>(), k in 1u64..5) {
            let a = random_periodic(seed);
            let t = mi(&[1, 3]);
            let s0 = floquet_multipliers(&a, 2, &t).unwrap().values();
            let s1 = floquet_multipliers(&a, 2, &t.up(k)).unwrap().values();
            for (x, y) in s0.iter().zip(&s1) {
                prop_assert!((x - y).norm() <= 1e-9);
            }
        }

        #[test]
        fn transport_round_trip(seed in any::<u64>()) {
            let rec = rec_with(random_periodic(seed), 2, 8);
            let window = Window::cube(2, 6);
            let x = solve_iterative(&rec, &window).unwrap();
            let y = transport_solution(&rec, 2, &x, Direction::Inverse).unwrap();
            let fd = FloquetDecomposition::build(rec.coefficients(), 2, &window).unwrap();
            prop_assert!(max_step_residual(&y, |t| fd.b(t).unwrap().clone()) < 1e-8);
            let back = transport_solution(&rec, 2, &y, Direction::Forward).unwrap();
            prop_assert!(homogeneous_residual(rec.coefficients(), &back) < 1e-8);
            prop_assert!(back.max_relative_error(&x, 1e-12).unwrap() < 1e-8);
        }
    }
}
