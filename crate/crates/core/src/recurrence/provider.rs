use std::fmt;
use std::sync::Arc;

use crate::algebra::{Matrix, Vector};
use crate::error::{Error, Result};
use crate::lattice::MultiIndex;

/// A value-valued function on ℕ^m: `A(t)` for coefficients, `b(t)` for forcing.
#[derive(Clone)]
pub enum Provider<V> {
    Constant(V),
    /// `table[t¹ mod p₁, …, t^m mod p_m]`, residues in lexicographic order.
    Componentwise { periods: Vec<u64>, table: Vec<V> },
    /// `phases[μ(t) mod T]`: uniform across diagonals, periodic along them.
    DiagonalPhase(Vec<V>),
    Custom(Arc<dyn Fn(&MultiIndex) -> V + Send + Sync>),
}

pub type CoefficientProvider = Provider<Matrix>;
pub type ForcingProvider = Provider<Vector>;

impl<V> fmt::Debug for Provider<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provider::Constant(_) => f.write_str("Provider::Constant"),
            Provider::Componentwise { periods, .. } => write!(f, "Provider::Componentwise{periods:?}"),
            Provider::DiagonalPhase(p) => write!(f, "Provider::DiagonalPhase(T={})", p.len()),
            Provider::Custom(_) => f.write_str("Provider::Custom"),
        }
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn lcm(values: &[u64]) -> u64 {
    values.iter().fold(1, |acc, &p| acc / gcd(acc, p) * p)
}

impl<V: Clone> Provider<V> {
    pub fn componentwise(periods: Vec<u64>, table: Vec<V>) -> Result<Self> {
        if periods.is_empty() || periods.contains(&0) {
            return Err(Error::Validation("componentwise periods must be positive".into()));
        }
        let expected = periods.iter().product::<u64>() as usize;
        if table.len() != expected {
            return Err(Error::DimensionMismatch { expected, found: table.len() });
        }
        Ok(Provider::Componentwise { periods, table })
    }

    pub fn diagonal_phase(phases: Vec<V>) -> Result<Self> {
        if phases.is_empty() {
            return Err(Error::Validation("diagonal-phase table needs at least one phase".into()));
        }
        Ok(Provider::DiagonalPhase(phases))
    }

    pub fn custom(f: impl Fn(&MultiIndex) -> V + Send + Sync + 'static) -> Self {
        Provider::Custom(Arc::new(f))
    }

    pub fn at(&self, t: &MultiIndex) -> V {
        match self {
            Provider::Constant(v) => v.clone(),
            Provider::Componentwise { periods, table } => {
                assert_eq!(periods.len(), t.dim(), "componentwise provider dimension mismatch");
                let mut off = 0usize;
                for (c, p) in t.components().iter().zip(periods) {
                    off = off * (*p as usize) + (c % p) as usize;
                }
                table[off].clone()
            }
            Provider::DiagonalPhase(phases) => phases[(t.mu() % phases.len() as u64) as usize].clone(),
            Provider::Custom(f) => f(t),
        }
    }

    /// Table-backed providers compare exactly in periodicity checks.
    pub fn is_tabulated(&self) -> bool {
        !matches!(self, Provider::Custom(_))
    }

    /// The smallest diagonal period the provider guarantees by construction.
    pub fn structural_period(&self) -> Option<u64> {
        match self {
            Provider::Constant(_) => Some(1),
            Provider::Componentwise { periods, .. } => Some(lcm(periods)),
            Provider::DiagonalPhase(p) => Some(p.len() as u64),
            Provider::Custom(_) => None,
        }
    }

    /// Every tabulated value; empty for custom providers.
    pub(crate) fn tabulated_values(&self) -> Vec<&V> {
        match self {
            Provider::Constant(v) => vec![v],
            Provider::Componentwise { table, .. } => table.iter().collect(),
            Provider::DiagonalPhase(p) => p.iter().collect(),
            Provider::Custom(_) => Vec::new(),
        }
    }
}

impl CoefficientProvider {
    pub(crate) fn check_shape(&self, n: usize, m: usize) -> Result<()> {
        for a in self.tabulated_values() {
            if a.rows() != n || a.cols() != n {
                return Err(Error::DimensionMismatch { expected: n, found: a.rows().max(a.cols()) });
            }
        }
        if let Provider::Componentwise { periods, .. } = self {
            if periods.len() != m {
                return Err(Error::DimensionMismatch { expected: m, found: periods.len() });
            }
        }
        let probe = self.at(&MultiIndex::zeros(m));
        if probe.rows() != n || probe.cols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: probe.rows() });
        }
        Ok(())
    }
}

impl ForcingProvider {
    pub(crate) fn check_shape(&self, n: usize, m: usize) -> Result<()> {
        for b in self.tabulated_values() {
            if b.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: b.len() });
            }
        }
        if let Provider::Componentwise { periods, .. } = self {
            if periods.len() != m {
                return Err(Error::DimensionMismatch { expected: m, found: periods.len() });
            }
        }
        let probe = self.at(&MultiIndex::zeros(m));
        if probe.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: probe.len() });
        }
        Ok(())
    }

    /// True only when zero is known by construction; custom forcing never is.
    pub fn is_zero(&self) -> bool {
        self.is_tabulated() && self.tabulated_values().iter().all(|v| v.iter().all(|z| z.re == 0.0 && z.im == 0.0))
    }
}
