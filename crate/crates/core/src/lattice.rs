//! Multi-index geometry of ℕ^m.
//!
//! A point `t = (t¹, …, t^m)` sits on the diagonal line through its base
//! `t − μ(t)·1`, where `μ(t)` is the smallest component. Diagonal recurrences
//! only ever move along these lines, so most of the crate is phrased in terms
//! of [`MultiIndex::mu`] and [`MultiIndex::diag_decompose`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of ℕ^m.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct MultiIndex(Vec<u64>);

/// `t = base + level·1` with `base` on the boundary of ℕ^m.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DiagonalDecomposition {
    pub base: MultiIndex,
    pub level: u64,
}

impl DiagonalDecomposition {
    pub fn reconstruct(&self) -> MultiIndex {
        MultiIndex(self.base.0.iter().map(|c| c + self.level).collect())
    }
}

impl MultiIndex {
    pub fn new(components: Vec<u64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Domain("multi-index needs at least one component".into()));
        }
        Ok(MultiIndex(components))
    }

    pub fn zeros(m: usize) -> Self {
        assert!(m >= 1, "multi-index dimension must be positive");
        MultiIndex(vec![0; m])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[u64] {
        &self.0
    }

    /// Diagonal level: the minimum component.
    pub fn mu(&self) -> u64 {
        *self.0.iter().min().expect("non-empty")
    }

    /// First axis attaining the minimum.
    pub fn argmin(&self) -> usize {
        let mu = self.mu();
        self.0.iter().position(|&c| c == mu).expect("non-empty")
    }

    pub fn diag_decompose(&self) -> DiagonalDecomposition {
        let level = self.mu();
        DiagonalDecomposition { base: MultiIndex(self.0.iter().map(|c| c - level).collect()), level }
    }

    pub fn base(&self) -> MultiIndex {
        self.diag_decompose().base
    }

    /// `t + k·1`. Fails if any component would leave ℕ or overflow.
    pub fn shift(&self, k: i64) -> Result<MultiIndex> {
        let mut out = Vec::with_capacity(self.0.len());
        for &c in &self.0 {
            let v = if k >= 0 {
                c.checked_add(k as u64)
            } else {
                c.checked_sub(k.unsigned_abs())
            };
            match v {
                Some(v) => out.push(v),
                None => {
                    return Err(Error::Domain(format!("shift of {self} by {k} leaves ℕ^{}", self.dim())))
                }
            }
        }
        Ok(MultiIndex(out))
    }

    /// `t + k·1` for `k ≥ 0`; panics on overflow, which desk-scale windows never reach.
    pub fn up(&self, k: u64) -> MultiIndex {
        MultiIndex(self.0.iter().map(|c| c + k).collect())
    }

    /// `t − k·1`; caller guarantees `k ≤ μ(t)`.
    pub fn down(&self, k: u64) -> MultiIndex {
        debug_assert!(k <= self.mu());
        MultiIndex(self.0.iter().map(|c| c - k).collect())
    }

    /// The m−1 coordinates left after removing axis `beta`.
    pub fn drop_axis(&self, beta: usize) -> Vec<u64> {
        self.0.iter().enumerate().filter(|&(i, _)| i != beta).map(|(_, &c)| c).collect()
    }

    /// Inverse of [`MultiIndex::drop_axis`].
    pub fn insert_axis(reduced: &[u64], beta: usize, value: u64) -> MultiIndex {
        let mut v = Vec::with_capacity(reduced.len() + 1);
        v.extend_from_slice(&reduced[..beta]);
        v.push(value);
        v.extend_from_slice(&reduced[beta..]);
        MultiIndex(v)
    }

    pub fn is_boundary(&self) -> bool {
        self.mu() == 0
    }
}

impl TryFrom<Vec<u64>> for MultiIndex {
    type Error = Error;
    fn try_from(v: Vec<u64>) -> Result<Self> {
        MultiIndex::new(v)
    }
}

impl From<MultiIndex> for Vec<u64> {
    fn from(t: MultiIndex) -> Self {
        t.0
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for MultiIndex {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let comps = s
            .split(',')
            .map(|p| {
                p.trim().parse::<u64>().map_err(|e| Error::Validation(format!("bad multi-index component {p:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        MultiIndex::new(comps)
    }
}

/// A rectangular window `[0, e₁) × … × [0, e_m)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Window {
    extents: Vec<u64>,
}

impl Window {
    pub fn new(extents: Vec<u64>) -> Result<Self> {
        if extents.is_empty() {
            return Err(Error::Domain("window needs at least one axis".into()));
        }
        Ok(Window { extents })
    }

    pub fn cube(m: usize, side: u64) -> Self {
        Window { extents: vec![side; m] }
    }

    pub fn dim(&self) -> usize {
        self.extents.len()
    }

    pub fn extents(&self) -> &[u64] {
        &self.extents
    }

    pub fn len(&self) -> usize {
        self.extents.iter().product::<u64>() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, t: &MultiIndex) -> bool {
        t.dim() == self.dim() && t.components().iter().zip(&self.extents).all(|(c, e)| c < e)
    }

    /// Row-major offset with t¹ varying slowest.
    pub fn offset(&self, t: &MultiIndex) -> Option<usize> {
        if !self.contains(t) {
            return None;
        }
        let mut off = 0usize;
        for (c, e) in t.components().iter().zip(&self.extents) {
            off = off * (*e as usize) + *c as usize;
        }
        Some(off)
    }

    /// Every point in lexicographic order.
    pub fn points(&self) -> impl Iterator<Item = MultiIndex> + '_ {
        let total = self.len();
        (0..total).map(move |mut off| {
            let mut comps = vec![0u64; self.extents.len()];
            for (slot, e) in comps.iter_mut().zip(&self.extents).rev() {
                *slot = (off as u64) % e;
                off /= *e as usize;
            }
            MultiIndex(comps)
        })
    }

    /// Boundary points (μ = 0) inside the window: one per diagonal that meets it.
    pub fn diagonal_bases(&self) -> impl Iterator<Item = MultiIndex> + '_ {
        self.points().filter(|t| t.is_boundary())
    }
}

impl FromStr for Window {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let t: MultiIndex = s.parse()?;
        Window::new(t.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mi(v: &[u64]) -> MultiIndex {
        MultiIndex::new(v.to_vec()).unwrap()
    }

    #[test]
    fn mu_examples() {
        assert_eq!(mi(&[0, 0]).mu(), 0);
        assert_eq!(mi(&[3, 1, 2]).mu(), 1);
        assert_eq!(mi(&[5, 5]).mu(), 5);
    }

    #[test]
    fn decompose_examples() {
        let d = mi(&[3, 1, 2]).diag_decompose();
        assert_eq!(d.base, mi(&[2, 0, 1]));
        assert_eq!(d.level, 1);
        let d = mi(&[4, 4]).diag_decompose();
        assert_eq!((d.base, d.level), (mi(&[0, 0]), 4));
        let d = mi(&[0, 7]).diag_decompose();
        assert_eq!((d.base, d.level), (mi(&[0, 7]), 0));
    }

    #[test]
    fn shift_examples() {
        assert_eq!(mi(&[1, 2]).shift(2).unwrap(), mi(&[3, 4]));
        assert_eq!(mi(&[1, 2]).shift(-1).unwrap(), mi(&[0, 1]));
        assert!(matches!(mi(&[0, 2]).shift(-1), Err(Error::Domain(_))));
        assert!(matches!(mi(&[u64::MAX, 0]).shift(1), Err(Error::Domain(_))));
    }

    #[test]
    fn parse_and_display() {
        let t: MultiIndex = "3,1,2".parse().unwrap();
        assert_eq!(t, mi(&[3, 1, 2]));
        assert_eq!(t.to_string(), "3,1,2");
        assert!("3,-1".parse::<MultiIndex>().is_err());
        assert!("".parse::<MultiIndex>().is_err());
    }

    #[test]
    fn axis_roundtrip() {
        let t = mi(&[4, 0, 9]);
        let r = t.drop_axis(1);
        assert_eq!(r, vec![4, 9]);
        assert_eq!(MultiIndex::insert_axis(&r, 1, 0), t);
    }

    #[test]
    fn window_enumeration_is_lexicographic() {
        let w = Window::new(vec![2, 3]).unwrap();
        let pts: Vec<String> = w.points().map(|t| t.to_string()).collect();
        assert_eq!(pts, ["0,0", "0,1", "0,2", "1,0", "1,1", "1,2"]);
        for (i, t) in w.points().enumerate() {
            assert_eq!(w.offset(&t), Some(i));
        }
        assert_eq!(w.diagonal_bases().count(), 4);
    }

    proptest! {
        #[test]
        fn shift_raises_level(v in proptest::collection::vec(0u64..1000, 1..5), k in 0i64..1000) {
            let t = MultiIndex::new(v).unwrap();
            prop_assert_eq!(t.shift(k).unwrap().mu(), t.mu() + k as u64);
        }

        #[test]
        fn decompose_reconstructs(v in proptest::collection::vec(0u64..1000, 1..5)) {
            let t = MultiIndex::new(v).unwrap();
            let d = t.diag_decompose();
            prop_assert!(d.base.is_boundary());
            prop_assert_eq!(d.reconstruct(), t);
        }

        #[test]
        fn same_diagonal_differs_by_multiple_of_one(v in proptest::collection::vec(0u64..50, 2..4), a in 0u64..20, b in 0u64..20) {
            let base = MultiIndex::new(v).unwrap().base();
            let s = base.up(a);
            let u = base.up(b);
            prop_assert_eq!(s.base(), u.base());
            let diff: Vec<i64> = s.components().iter().zip(u.components()).map(|(x, y)| *x as i64 - *y as i64).collect();
            prop_assert!(diff.iter().all(|d| *d == a as i64 - b as i64));
        }
    }
}
