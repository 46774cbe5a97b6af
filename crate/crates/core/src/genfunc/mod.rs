//! Generating functions of the constant-coefficient two-time Hicks recurrence.
//!
//! With `s = γ + α`, the income grid `Y_mn` has `F(x,y) = Σ Y_mn x^m y^n = G/Q`
//! where `Q = 1 − s·xy + α·x²y²` and `G` is a polynomial built from the
//! layers `n ∈ {0,1}` and `m ∈ {0,1}`.

mod series;

pub use series::{parse_rational, BivariatePolynomial, BivariateSeries, Coeff};

use crate::algebra::{real_vector, solve_quadratic, C64};
use crate::error::{Error, Result};
use crate::hicks::{HicksParams, SecondOrderBoundary};
use crate::recurrence::{BoundaryData, Extension, FaceTable};

/// Default bound on either truncation order in [`expand`].
pub const EXPANSION_CAP: usize = 64;

/// Constant `γ`, `α` over a coefficient field.
#[derive(Clone, Debug, PartialEq)]
pub struct GfParams<C> {
    pub gamma: C,
    pub alpha: C,
}

impl<C: Coeff> GfParams<C> {
    pub fn new(gamma: C, alpha: C) -> Self {
        GfParams { gamma, alpha }
    }

    pub fn s(&self) -> C {
        self.gamma.clone() + self.alpha.clone()
    }

    /// `1 − (γ+α)xy + αx²y²`.
    pub fn denominator(&self) -> BivariatePolynomial<C> {
        BivariatePolynomial::from_terms([((0, 0), C::one()), ((1, 1), -self.s()), ((2, 2), self.alpha.clone())])
    }

    /// `λ² − (γ+α)λ + α` as `[c0, c1, c2]`.
    pub fn characteristic(&self) -> [C; 3] {
        [self.alpha.clone(), -self.s(), C::one()]
    }
}

impl GfParams<f64> {
    pub fn from_hicks(p: &HicksParams) -> Result<Self> {
        if !p.is_constant() {
            return Err(Error::Validation("generating functions need constant γ and α".into()));
        }
        Ok(GfParams::new(p.gamma(0), p.alpha(0)))
    }
}

/// Finite layer sequences. `row0[m] = Y_m0`, `col0[n] = Y_0n`,
/// `row1[k] = Y_{k+1,1}`, `col1[k] = Y_{1,k+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryLayers<C> {
    row0: Vec<C>,
    col0: Vec<C>,
    row1: Vec<C>,
    col1: Vec<C>,
}

fn at<C: Coeff>(v: &[C], k: usize) -> C {
    v.get(k).cloned().unwrap_or_else(C::zero)
}

impl<C: Coeff> BoundaryLayers<C> {
    pub fn new(row0: Vec<C>, col0: Vec<C>, row1: Vec<C>, col1: Vec<C>) -> Result<Self> {
        if at(&row0, 0) != at(&col0, 0) {
            return Err(Error::Validation(format!("corner Y00 differs: {} vs {}", at(&row0, 0), at(&col0, 0))));
        }
        if at(&row1, 0) != at(&col1, 0) {
            return Err(Error::Validation(format!("corner Y11 differs: {} vs {}", at(&row1, 0), at(&col1, 0))));
        }
        Ok(BoundaryLayers { row0, col0, row1, col1 })
    }

    /// `Y00` on both zero layers and `Y11` as the only entry of both unit layers.
    pub fn particular(y00: C, y11: C) -> Self {
        BoundaryLayers { row0: vec![y00.clone()], col0: vec![y00], row1: vec![y11.clone()], col1: vec![y11] }
    }

    pub fn zero() -> Self {
        BoundaryLayers { row0: vec![], col0: vec![], row1: vec![], col1: vec![] }
    }

    pub fn y00(&self) -> C {
        at(&self.row0, 0)
    }

    pub fn y11(&self) -> C {
        at(&self.row1, 0)
    }

    pub fn y_m0(&self, m: usize) -> C {
        at(&self.row0, m)
    }

    pub fn y_0n(&self, n: usize) -> C {
        at(&self.col0, n)
    }

    /// `Y_m1`, `m ≥ 1`.
    pub fn y_m1(&self, m: usize) -> C {
        assert!(m >= 1);
        at(&self.row1, m - 1)
    }

    /// `Y_1n`, `n ≥ 1`.
    pub fn y_1n(&self, n: usize) -> C {
        assert!(n >= 1);
        at(&self.col1, n - 1)
    }

    pub fn phi0(&self) -> BivariatePolynomial<C> {
        BivariatePolynomial::from_terms(self.row0.iter().enumerate().map(|(m, c)| ((m, 0), c.clone())))
    }

    pub fn psi0(&self) -> BivariatePolynomial<C> {
        BivariatePolynomial::from_terms(self.col0.iter().enumerate().map(|(n, c)| ((0, n), c.clone())))
    }

    /// `Σ_{m≥1} Y_m1 x^m` (no `y` factor).
    pub fn phi1(&self) -> BivariatePolynomial<C> {
        BivariatePolynomial::from_terms(self.row1.iter().enumerate().map(|(k, c)| ((k + 1, 0), c.clone())))
    }

    /// `Σ_{n≥1} Y_1n y^n` (no `x` factor).
    pub fn psi1(&self) -> BivariatePolynomial<C> {
        BivariatePolynomial::from_terms(self.col1.iter().enumerate().map(|(k, c)| ((0, k + 1), c.clone())))
    }

    /// Longest layer length.
    pub fn support(&self) -> usize {
        [&self.row0, &self.col0, &self.row1, &self.col1].iter().map(|v| v.len()).max().unwrap_or(0)
    }

    /// Scalar face tables of length `extent` for the two-time solvers.
    pub fn to_second_order(&self, extent: u64) -> Result<SecondOrderBoundary> {
        let f = |c: C| real_vector(&[c.to_f64()]);
        let table = |g: &dyn Fn(usize) -> C| FaceTable::from_fn(vec![extent], |r| f(g(r[0] as usize)));
        let layer0 = BoundaryData::new(1, vec![table(&|n| self.y_0n(n)), table(&|m| self.y_m0(m))], Extension::Strict)?;
        let layer1 = BoundaryData::new(
            1,
            vec![
                table(&|n| if n == 0 { self.y_m0(1) } else { self.y_1n(n) }),
                table(&|m| if m == 0 { self.y_0n(1) } else { self.y_m1(m) }),
            ],
            Extension::Strict,
        )?;
        SecondOrderBoundary::new(layer0, layer1)
    }

    pub fn map<D: Coeff>(&self, f: impl Fn(&C) -> D) -> BoundaryLayers<D> {
        let g = |v: &[C]| v.iter().map(&f).collect();
        BoundaryLayers { row0: g(&self.row0), col0: g(&self.col0), row1: g(&self.row1), col1: g(&self.col1) }
    }
}

/// `G = K − U` split of a numerator.
#[derive(Clone, Debug, PartialEq)]
pub struct GfParts<C: Coeff> {
    pub k: BivariatePolynomial<C>,
    pub u: BivariatePolynomial<C>,
}

/// `F = G/Q` with `Q(0,0) = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalGF<C: Coeff> {
    numerator: BivariatePolynomial<C>,
    denominator: BivariatePolynomial<C>,
    parts: Option<GfParts<C>>,
}

impl<C: Coeff> RationalGF<C> {
    pub fn new(numerator: BivariatePolynomial<C>, denominator: BivariatePolynomial<C>) -> Result<Self> {
        if !denominator.coeff(0, 0).is_one() {
            return Err(Error::Validation(format!("denominator constant term is {}, not 1", denominator.coeff(0, 0))));
        }
        Ok(RationalGF { numerator, denominator, parts: None })
    }

    pub fn with_parts(mut self, parts: GfParts<C>) -> Self {
        self.parts = Some(parts);
        self
    }

    pub fn numerator(&self) -> &BivariatePolynomial<C> {
        &self.numerator
    }

    pub fn denominator(&self) -> &BivariatePolynomial<C> {
        &self.denominator
    }

    pub fn parts(&self) -> Option<&GfParts<C>> {
        self.parts.as_ref()
    }
}

/// `G = −s·xy·E − xy·Y11 + yφ₁ + xψ₁ + E` with `E = φ₀ + ψ₀ − Y00`.
pub fn build_gf_variant1<C: Coeff>(p: &GfParams<C>, layers: &BoundaryLayers<C>) -> Result<RationalGF<C>> {
    let e = layers.phi0().add(&layers.psi0()).sub(&BivariatePolynomial::constant(layers.y00()));
    let k = e.shift(1, 1).scale(&-p.s()).sub(&BivariatePolynomial::monomial(layers.y11(), 1, 1));
    let u = layers.phi1().shift(0, 1).add(&layers.psi1().shift(1, 0)).add(&e).neg();
    let g = k.sub(&u);
    Ok(RationalGF::new(g, p.denominator())?.with_parts(GfParts { k, u }))
}

/// Per-diagonal seeds: `Σ_{k≥0} [Y_0k + (Y_{1,k+1} − sY_0k)xy] y^k + Σ_{k≥1} [Y_k0 + (Y_{k+1,1} − sY_k0)xy] x^k`.
pub fn build_gf_variant2<C: Coeff>(p: &GfParams<C>, layers: &BoundaryLayers<C>) -> Result<RationalGF<C>> {
    let s = p.s();
    let mut g = BivariatePolynomial::zero();
    for k in 0..layers.support().max(1) {
        let y0k = layers.y_0n(k);
        g.add_term(0, k, y0k.clone());
        g.add_term(1, k + 1, layers.y_1n(k + 1) - s.clone() * y0k);
    }
    for k in 1..layers.support().max(1) {
        let yk0 = layers.y_m0(k);
        g.add_term(k, 0, yk0.clone());
        g.add_term(k + 1, 1, layers.y_m1(k + 1) - s.clone() * yk0);
    }
    RationalGF::new(g, p.denominator())
}

/// `F(x) = (a₀ + (a₁ − s·a₀)x) / (1 − s·x + α·x²)` as coefficient lists.
#[derive(Clone, Debug, PartialEq)]
pub struct UnivariateGF<C> {
    pub numerator: Vec<C>,
    pub denominator: Vec<C>,
}

impl<C: Coeff> UnivariateGF<C> {
    pub fn expand(&self, len: usize) -> Vec<C> {
        let mut out: Vec<C> = Vec::with_capacity(len);
        for n in 0..len {
            let mut acc = at(&self.numerator, n);
            for (k, q) in self.denominator.iter().enumerate().skip(1).take(n) {
                acc = acc - q.clone() * out[n - k].clone();
            }
            out.push(acc / self.denominator[0].clone());
        }
        out
    }
}

pub fn build_gf_univariate<C: Coeff>(alpha: C, gamma: C, a0: C, a1: C) -> UnivariateGF<C> {
    let s = gamma + alpha.clone();
    UnivariateGF { numerator: vec![a0.clone(), a1 - s.clone() * a0], denominator: vec![C::one(), -s, alpha] }
}

fn is_hicks_form<C: Coeff>(q: &BivariatePolynomial<C>) -> bool {
    q.iter().all(|(k, _)| matches!(k, (0, 0) | (1, 1) | (2, 2)))
}

/// `G · Σ_k (1 − Q)^k`, in closed binomial form when `Q = 1 − s·xy + α·x²y²`.
fn geometric_expansion<C: Coeff>(g: &BivariatePolynomial<C>, q: &BivariatePolynomial<C>, m: usize, n: usize) -> BivariateSeries<C> {
    let gs = BivariateSeries::from_polynomial(g, m, n);
    if is_hicks_form(q) {
        // 1/Q = Σ_k (xy)^k (s − α·xy)^k, so the xy^d coefficient is Σ_{k+j=d} C(k,j) s^{k−j} (−α)^j.
        let s = -q.coeff(1, 1);
        let a = -q.coeff(2, 2);
        let dmax = m.min(n);
        let mut c = vec![C::zero(); dmax + 1];
        for k in 0..=dmax {
            let mut binom = C::one();
            for j in 0..=k.min(dmax - k) {
                let term = binom.clone() * num_traits::pow(s.clone(), k - j) * num_traits::pow(a.clone(), j);
                c[k + j] = c[k + j].clone() + term;
                binom = binom * from_usize::<C>(k - j) / from_usize::<C>(j + 1);
            }
        }
        return BivariateSeries::from_fn(m, n, |i, j| {
            (0..=i.min(j)).fold(C::zero(), |acc, d| acc + gs.get(i - d, j - d).clone() * c[d].clone())
        });
    }
    let one = BivariateSeries::from_polynomial(&BivariatePolynomial::constant(C::one()), m, n);
    let r = BivariateSeries::from_polynomial(&BivariatePolynomial::constant(C::one()).sub(q), m, n);
    let mut power = one.clone();
    let mut sum = one;
    for _ in 0..m + n {
        power = power.mul(&r).expect("same orders");
        sum = sum.add(&power).expect("same orders");
    }
    gs.mul(&sum).expect("same orders")
}

fn from_usize<C: Coeff>(k: usize) -> C {
    (0..k).fold(C::zero(), |acc, _| acc + C::one())
}

/// Taylor coefficients up to `x^M y^N` with the default cap.
pub fn expand<C: Coeff>(gf: &RationalGF<C>, m: usize, n: usize) -> Result<BivariateSeries<C>> {
    expand_with_cap(gf, m, n, EXPANSION_CAP)
}

/// Series division and the geometric expansion, cross-checked before returning.
///
/// Exact fields must agree cell for cell; doubles must agree to `1e-12` of the
/// same expansion run on absolute values.
pub fn expand_with_cap<C: Coeff>(gf: &RationalGF<C>, m: usize, n: usize, cap: usize) -> Result<BivariateSeries<C>> {
    if m.max(n) > cap {
        return Err(Error::TruncationCap { requested: m.max(n), cap });
    }
    let g = BivariateSeries::from_polynomial(gf.numerator(), m, n);
    let q = BivariateSeries::from_polynomial(gf.denominator(), m, n);
    let divided = g.divide(&q)?;
    let geometric = geometric_expansion(gf.numerator(), gf.denominator(), m, n);
    if C::EXACT {
        if let Some((i, j, _)) = divided.cells().find(|(i, j, c)| *c != geometric.get(*i, *j)) {
            return Err(Error::Contract(format!("expansion routes disagree at ({i},{j})")));
        }
    } else {
        let abs_g = gf.numerator().map(|c| c.to_f64().abs());
        let abs_q = BivariatePolynomial::constant(1.0)
            .sub(&BivariatePolynomial::constant(1.0).sub(&gf.denominator().map(|c| c.to_f64())).map(|c| c.abs()));
        let bound = geometric_expansion(&abs_g, &abs_q, m, n);
        for (i, j, b) in bound.cells() {
            let diff = (divided.get(i, j).to_f64() - geometric.get(i, j).to_f64()).abs();
            if diff > 1e-12 * b || !diff.is_finite() {
                return Err(Error::Contract(format!("expansion routes disagree at ({i},{j}) by {diff:e}")));
            }
        }
    }
    Ok(divided)
}

/// Max-abs residuals of `Q·F − G` and, when split, of `K − (Q·F + U)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FunctionalResidual {
    pub qf_minus_g: f64,
    pub k_identity: Option<f64>,
}

impl FunctionalResidual {
    pub fn max(&self) -> f64 {
        self.qf_minus_g.max(self.k_identity.unwrap_or(0.0))
    }
}

pub fn verify_functional_equation<C: Coeff>(gf: &RationalGF<C>, series: &BivariateSeries<C>) -> FunctionalResidual {
    let (m, n) = series.orders();
    let trunc = |p: &BivariatePolynomial<C>| BivariateSeries::from_polynomial(p, m, n);
    let qf = trunc(gf.denominator()).mul(series).expect("same orders");
    let qf_minus_g = qf.sub(&trunc(gf.numerator())).expect("same orders").max_abs();
    let k_identity = gf.parts().map(|parts| {
        let rhs = qf.add(&trunc(&parts.u)).expect("same orders");
        trunc(&parts.k).sub(&rhs).expect("same orders").max_abs()
    });
    FunctionalResidual { qf_minus_g, k_identity }
}

/// `Y_nn = (1/α)(A/r1^{n+1} + B/r2^{n+1})` for the data `Y00`, `Y11` on the diagonal only.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalClosedForm {
    pub r1: f64,
    pub r2: f64,
    pub a: f64,
    pub b: f64,
    pub alpha: f64,
    /// Set when `1 − s·u + α·u²` has two distinct real roots.
    pub valid: bool,
}

impl DiagonalClosedForm {
    pub fn value(&self, n: u32) -> Option<f64> {
        self.valid.then(|| (self.a / self.r1.powi(n as i32 + 1) + self.b / self.r2.powi(n as i32 + 1)) / self.alpha)
    }

    pub fn diagonal(&self, len: u32) -> Option<Vec<f64>> {
        (0..len).map(|n| self.value(n)).collect()
    }
}

/// Roots of `α·u² − s·u + 1` and the residues of `N(u) = Y00 + (Y11 − s·Y00)u` at them.
pub fn diagonal_closed_form(p: &HicksParams, y00: f64, y11: f64) -> Result<DiagonalClosedForm> {
    let gp = GfParams::from_hicks(p)?;
    let (s, alpha) = (gp.s(), gp.alpha);
    let invalid = DiagonalClosedForm { r1: f64::NAN, r2: f64::NAN, a: f64::NAN, b: f64::NAN, alpha, valid: false };
    if alpha == 0.0 || s * s - 4.0 * alpha <= 0.0 {
        return Ok(invalid);
    }
    let q = solve_quadratic(C64::new(alpha, 0.0), C64::new(-s, 0.0), C64::new(1.0, 0.0))?;
    let (mut r1, mut r2) = (q.roots[0].re, q.roots[1].re);
    if r1 > r2 {
        std::mem::swap(&mut r1, &mut r2);
    }
    let num = |u: f64| y00 + (y11 - s * y00) * u;
    Ok(DiagonalClosedForm { r1, r2, a: num(r1) / (r2 - r1), b: num(r2) / (r1 - r2), alpha, valid: r1 != r2 })
}
