//! Eigenvalues of small dense matrices and principal matrix roots.
//!
//! The characteristic polynomial comes from the Faddeev–LeVerrier recursion and
//! its roots from Durand–Kerner simultaneous iteration. Roots that land close
//! together are grouped and the group is tested for semisimplicity by a rank
//! test on `M − λI`; matrix roots are then assembled from an eigenbasis.

use std::f64::consts::PI;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::matrix::{vec_norm, Matrix, Vector, C64};
use super::quadratic::root_order;
use crate::error::{Error, Result};

pub const MAX_EIGEN_SIZE: usize = 8;

const DK_MAX_ITER: usize = 500;
const DK_TOL: f64 = 1e-13;
const DK_SEED: u64 = 0x5eed_f10e;

/// Roots closer than this (relative to the spectral scale) are grouped.
const CLUSTER_TOL: f64 = 1e-4;
/// A group whose spread exceeds this is separated roots, not one multiple root.
const SPLIT_TOL: f64 = 1e-6;
/// Pivot threshold for the rank test on `M − λI`.
const RANK_TOL: f64 = 1e-8;
/// Eigenbases worse conditioned than this are treated as defective.
const MAX_BASIS_COND: f64 = 1e10;

#[derive(Clone, Debug, PartialEq)]
pub struct Eigenvalue {
    pub value: C64,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<Eigenvalue>,
    pub diagonalizable: bool,
}

impl Spectrum {
    /// Eigenvalues repeated by algebraic multiplicity.
    pub fn values(&self) -> Vec<C64> {
        self.eigenvalues.iter().flat_map(|e| std::iter::repeat_n(e.value, e.multiplicity)).collect()
    }

    pub fn product(&self) -> C64 {
        self.values().iter().product()
    }

    pub fn sum(&self) -> C64 {
        self.values().iter().sum()
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.iter().map(|e| e.multiplicity).sum()
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().map(|e| e.value.norm()).fold(0.0, f64::max)
    }
}

/// Coefficients `c₀..c_n` (ascending, `c_n = 1`) of `det(λI − M)`.
pub fn characteristic_polynomial(m: &Matrix) -> Result<Vec<C64>> {
    let n = m.require_square()?;
    let mut coeffs = vec![C64::zero(); n + 1];
    coeffs[n] = C64::one();
    let mut mk = Matrix::zeros(n, n);
    for k in 1..=n {
        // M_k = M·M_{k−1} + c_{n−k+1}·I
        let mut next = m * &mk;
        for i in 0..n {
            next[(i, i)] += coeffs[n - k + 1];
        }
        mk = next;
        coeffs[n - k] = -(m * &mk).trace() / k as f64;
    }
    Ok(coeffs)
}

fn horner(coeffs: &[C64], z: C64) -> C64 {
    coeffs.iter().rev().fold(C64::zero(), |acc, c| acc * z + c)
}

/// All roots of the monic polynomial with ascending coefficients `coeffs`.
/// Initial points lie on a circle of the Fujiwara radius with a seeded
/// perturbation, so repeated runs are bit-identical.
pub fn durand_kerner(coeffs: &[C64]) -> Vec<C64> {
    let n = coeffs.len() - 1;
    let lead = coeffs[n];
    let monic: Vec<C64> = coeffs.iter().map(|c| c / lead).collect();
    if n == 1 {
        return vec![-monic[0]];
    }
    let radius = (0..n)
        .map(|k| {
            let c = monic[k].norm();
            if k == 0 {
                (c / 2.0).powf(1.0 / n as f64)
            } else {
                c.powf(1.0 / (n - k) as f64)
            }
        })
        .fold(0.0, f64::max)
        * 2.0;
    let radius = if radius > 0.0 { radius } else { 1.0 };
    let mut rng = ChaCha8Rng::seed_from_u64(DK_SEED);
    let mut z: Vec<C64> = (0..n)
        .map(|k| {
            let angle = 2.0 * PI * k as f64 / n as f64 + 0.4 + rng.gen_range(-0.1..0.1);
            C64::from_polar(radius * (1.0 + rng.gen_range(-0.05..0.05)), angle)
        })
        .collect();
    for _ in 0..DK_MAX_ITER {
        let mut max_step = 0.0f64;
        for i in 0..n {
            let mut denom = C64::one();
            for j in 0..n {
                if i != j {
                    let d = z[i] - z[j];
                    denom *= if d.is_zero() { C64::new(1e-300, 0.0) } else { d };
                }
            }
            let step = horner(&monic, z[i]) / denom;
            if step.is_finite() {
                z[i] -= step;
                max_step = max_step.max(step.norm() / z[i].norm().max(1.0));
            }
        }
        if max_step <= DK_TOL {
            break;
        }
    }
    z
}

struct RootGroup {
    members: Vec<C64>,
}

impl RootGroup {
    fn centroid(&self) -> C64 {
        self.members.iter().sum::<C64>() / self.members.len() as f64
    }

    fn spread(&self) -> f64 {
        let c = self.centroid();
        self.members.iter().map(|z| (z - c).norm()).fold(0.0, f64::max)
    }
}

fn derivative(coeffs: &[C64]) -> Vec<C64> {
    coeffs.iter().enumerate().skip(1).map(|(k, c)| c * k as f64).collect()
}

/// A k-fold root is a simple root of the (k−1)-th derivative; Newton on that
/// derivative recovers it to working precision from the group centroid.
fn sharpen_multiple_root(coeffs: &[C64], k: usize, start: C64) -> C64 {
    let mut d = coeffs.to_vec();
    for _ in 0..k - 1 {
        d = derivative(&d);
    }
    let dd = derivative(&d);
    let mut z = start;
    for _ in 0..50 {
        let f = horner(&d, z);
        let fp = horner(&dd, z);
        if fp.is_zero() {
            break;
        }
        let step = f / fp;
        z -= step;
        if step.norm() <= 1e-16 * z.norm().max(1.0) {
            break;
        }
    }
    if (z - start).norm().is_finite() {
        z
    } else {
        start
    }
}

fn group_roots(roots: &[C64], tol: f64) -> Vec<RootGroup> {
    // single linkage via union-find on index pairs
    let n = roots.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        p[i] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if (roots[i] - roots[j]).norm() <= tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: Vec<(usize, RootGroup)> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        match groups.iter_mut().find(|(k, _)| *k == r) {
            Some((_, g)) => g.members.push(roots[i]),
            None => groups.push((r, RootGroup { members: vec![roots[i]] })),
        }
    }
    groups.into_iter().map(|(_, g)| g).collect()
}

/// Null space of `a` by full-pivoting elimination; pivots below `tol` count as zero.
fn null_space(a: &Matrix, tol: f64) -> Vec<Vector> {
    let n = a.rows();
    let c = a.cols();
    let mut w: Vec<Vec<C64>> = (0..n).map(|i| (0..c).map(|j| a[(i, j)]).collect()).collect();
    let mut col_perm: Vec<usize> = (0..c).collect();
    let mut rank = 0;
    while rank < n.min(c) {
        let mut best = (rank, rank, 0.0f64);
        for (i, row) in w.iter().enumerate().skip(rank) {
            for (j, v) in row.iter().enumerate().skip(rank) {
                if v.norm() > best.2 {
                    best = (i, j, v.norm());
                }
            }
        }
        if best.2 <= tol {
            break;
        }
        w.swap(rank, best.0);
        for row in w.iter_mut() {
            row.swap(rank, best.1);
        }
        col_perm.swap(rank, best.1);
        let piv = w[rank][rank];
        for j in rank..c {
            w[rank][j] /= piv;
        }
        for i in 0..n {
            if i != rank {
                let f = w[i][rank];
                if !f.is_zero() {
                    for j in rank..c {
                        let v = w[rank][j];
                        w[i][j] -= f * v;
                    }
                }
            }
        }
        rank += 1;
    }
    // reduced form: x_pivot = −Σ w[p][free]·x_free
    (rank..c)
        .map(|free| {
            let mut x = vec![C64::zero(); c];
            x[col_perm[free]] = C64::one();
            for p in 0..rank {
                x[col_perm[p]] = -w[p][free];
            }
            let nrm = vec_norm(&x);
            x.iter().map(|v| v / nrm).collect()
        })
        .collect()
}

fn shifted(m: &Matrix, lambda: C64) -> Matrix {
    let mut s = m.clone();
    for i in 0..m.rows() {
        s[(i, i)] -= lambda;
    }
    s
}

fn inverse_iteration(m: &Matrix, lambda: C64, scale: f64) -> Vector {
    let n = m.rows();
    let s = shifted(m, lambda);
    let mut x: Vector = (0..n).map(|i| C64::new(1.0 + 0.37 * i as f64, 0.11 * (i as f64 + 1.0))).collect();
    for _ in 0..3 {
        let y = s.solve_nudged(&x, 1e-15 * scale);
        let nrm = vec_norm(&y);
        if !(nrm.is_finite() && nrm > 0.0) {
            break;
        }
        x = y.iter().map(|v| v / nrm).collect();
    }
    x
}

/// `M = V·diag(λ)·V⁻¹`.
#[derive(Clone, Debug)]
pub struct Eigendecomposition {
    pub values: Vec<C64>,
    pub vectors: Matrix,
    pub inverse: Matrix,
}

enum Analysis {
    /// Decomposition plus the `(start, len)` ranges of grouped eigenvalues.
    Diagonalizable(Eigendecomposition, Vec<(usize, usize)>),
    Defective(Vec<Eigenvalue>),
}

fn analyse(m: &Matrix) -> Result<Analysis> {
    let n = m.require_square()?;
    if n > MAX_EIGEN_SIZE {
        return Err(Error::UnsupportedSize { n, max: MAX_EIGEN_SIZE });
    }
    let charpoly = characteristic_polynomial(m)?;
    let roots = durand_kerner(&charpoly);
    let scale = roots.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let mscale = m.max_abs().max(1.0);

    let mut values: Vec<C64> = Vec::with_capacity(n);
    let mut vectors: Vec<Vector> = Vec::with_capacity(n);
    let mut defective = false;
    let mut groups: Vec<Eigenvalue> = Vec::new();
    let mut ranges: Vec<(usize, usize)> = Vec::new();

    for g in group_roots(&roots, CLUSTER_TOL * scale) {
        let k = g.members.len();
        let c = g.centroid();
        if k == 1 {
            ranges.push((values.len(), 1));
            values.push(c);
            vectors.push(inverse_iteration(m, c, mscale));
            groups.push(Eigenvalue { value: c, multiplicity: 1 });
            continue;
        }
        let sharp = sharpen_multiple_root(&charpoly, k, c);
        let c = if (sharp - c).norm() <= CLUSTER_TOL * scale { sharp } else { c };
        let basis = null_space(&shifted(m, c), RANK_TOL * mscale);
        if basis.len() >= k {
            ranges.push((values.len(), k));
            for v in basis.into_iter().take(k) {
                values.push(c);
                vectors.push(v);
            }
            groups.push(Eigenvalue { value: c, multiplicity: k });
        } else if g.spread() > SPLIT_TOL * scale {
            for z in &g.members {
                ranges.push((values.len(), 1));
                values.push(*z);
                vectors.push(inverse_iteration(m, *z, mscale));
                groups.push(Eigenvalue { value: *z, multiplicity: 1 });
            }
        } else {
            groups.push(Eigenvalue { value: c, multiplicity: k });
            defective = true;
        }
    }

    if defective {
        groups.sort_by(|a, b| root_order(&a.value, &b.value));
        return Ok(Analysis::Defective(groups));
    }

    let v = Matrix::from_columns(&vectors)?;
    let v_inv = match v.inverse() {
        Ok(inv) => inv,
        Err(_) => return Ok(Analysis::Defective(regroup(&roots, scale))),
    };
    if v.frobenius_norm() * v_inv.frobenius_norm() > MAX_BASIS_COND {
        return Ok(Analysis::Defective(regroup(&roots, scale)));
    }
    // diag(V⁻¹MV) sharpens the eigenvalues to the accuracy of the basis
    let refined = &(&v_inv * m) * &v;
    let values: Vec<C64> = (0..n).map(|i| refined[(i, i)]).collect();
    Ok(Analysis::Diagonalizable(Eigendecomposition { values, vectors: v, inverse: v_inv }, ranges))
}

fn regroup(roots: &[C64], scale: f64) -> Vec<Eigenvalue> {
    let mut out: Vec<Eigenvalue> = group_roots(roots, CLUSTER_TOL * scale)
        .into_iter()
        .map(|g| Eigenvalue { value: g.centroid(), multiplicity: g.members.len() })
        .collect();
    out.sort_by(|a, b| root_order(&a.value, &b.value));
    out
}

/// Eigenvalues with multiplicities and a diagonalizability verdict. `n ≤ 8`.
pub fn eigenvalues(m: &Matrix) -> Result<Spectrum> {
    Ok(match analyse(m)? {
        Analysis::Diagonalizable(d, ranges) => {
            let mut eig: Vec<Eigenvalue> = ranges
                .into_iter()
                .map(|(start, len)| Eigenvalue {
                    value: d.values[start..start + len].iter().sum::<C64>() / len as f64,
                    multiplicity: len,
                })
                .collect();
            eig.sort_by(|a, b| root_order(&a.value, &b.value));
            Spectrum { eigenvalues: eig, diagonalizable: true }
        }
        Analysis::Defective(eigenvalues) => Spectrum { eigenvalues, diagonalizable: false },
    })
}

pub fn eigendecompose(m: &Matrix) -> Result<Eigendecomposition> {
    match analyse(m)? {
        Analysis::Diagonalizable(d, _) => Ok(d),
        Analysis::Defective(_) => Err(Error::Defective),
    }
}

/// Principal T-th root `exp(log|λ|/T + i·arg(λ)/T)` with `arg ∈ (−π, π]`.
pub fn principal_root(lambda: C64, t: u32) -> C64 {
    let mut arg = lambda.im.atan2(lambda.re);
    if arg <= -PI {
        arg = PI;
    }
    C64::from_polar(lambda.norm().powf(1.0 / t as f64), arg / t as f64)
}

/// A T-th root `R = V·diag(ρ)·V⁻¹` of a diagonalizable invertible matrix.
#[derive(Clone, Debug)]
pub struct MatrixRoot {
    pub degree: u32,
    pub root: Matrix,
    /// Eigenvalues of the root; empty for a defective first root.
    pub root_values: Vec<C64>,
    basis: Option<(Matrix, Matrix)>,
}

impl MatrixRoot {
    pub fn matrix(&self) -> &Matrix {
        &self.root
    }

    /// `R^k` for any integer `k`, evaluated spectrally.
    pub fn pow(&self, k: i64) -> Matrix {
        if k == 0 {
            return Matrix::identity(self.root.rows());
        }
        match &self.basis {
            Some((v, v_inv)) => {
                let k = i32::try_from(k).expect("exponent fits in i32");
                let d: Vec<C64> = self.root_values.iter().map(|r| r.powi(k)).collect();
                &(v * &Matrix::diagonal(&d)) * v_inv
            }
            None if k >= 0 => self.root.pow(k as u64).expect("square"),
            None => self.root.inverse().expect("invertible root").pow(k.unsigned_abs()).expect("square"),
        }
    }
}

/// Principal-branch T-th root. Rejects singular and defective inputs.
pub fn matrix_root(m: &Matrix, t: u32) -> Result<MatrixRoot> {
    let n = m.require_square()?;
    if t == 0 {
        return Err(Error::Domain("root degree must be positive".into()));
    }
    // singularity is judged on the matrix itself, before any spectral work
    m.inverse()?;
    if t == 1 {
        // the first root is the matrix itself, defective or not
        return Ok(match eigendecompose(m) {
            Ok(e) => MatrixRoot { degree: 1, root: m.clone(), root_values: e.values, basis: Some((e.vectors, e.inverse)) },
            Err(Error::Defective) => MatrixRoot { degree: 1, root: m.clone(), root_values: Vec::new(), basis: None },
            Err(e) => return Err(e),
        });
    }
    let e = eigendecompose(m)?;
    if e.values.iter().any(|v| v.norm() < 1e-300) {
        return Err(Error::Singular { pivot: 0.0 });
    }
    let rho: Vec<C64> = e.values.iter().map(|&l| principal_root(l, t)).collect();
    let root = &(&e.vectors * &Matrix::diagonal(&rho)) * &e.inverse;
    debug_assert_eq!(root.rows(), n);
    Ok(MatrixRoot { degree: t, root, root_values: rho, basis: Some((e.vectors, e.inverse)) })
}
