use std::io::{Read, Write};

use crate::algebra::{vec_norm, vec_sub, Matrix, Vector, C64};
use crate::error::{Error, Result};
use crate::lattice::{MultiIndex, Window};

use super::provider::{CoefficientProvider, ForcingProvider};

/// Relative tolerance with an absolute floor: `|a − b| ≤ rel·max(|a|,|b|) + abs`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Tolerance {
    pub const FIELD: Tolerance = Tolerance { rel: 1e-9, abs: 1e-12 };

    pub fn close(&self, a: &[C64], b: &[C64]) -> bool {
        vec_norm(&vec_sub(a, b)) <= self.rel * vec_norm(a).max(vec_norm(b)) + self.abs
    }
}

/// Scaled discrepancy `|a − b| / (max(|a|,|b|) + floor)`.
pub fn relative_error(a: &[C64], b: &[C64], floor: f64) -> f64 {
    vec_norm(&vec_sub(a, b)) / (vec_norm(a).max(vec_norm(b)) + floor)
}

/// Dense grid of n-vectors over a window, lexicographic in t.
#[derive(Clone, Debug, PartialEq)]
pub struct SolutionField {
    window: Window,
    n: usize,
    values: Vec<Vector>,
}

impl SolutionField {
    pub fn new(window: Window, n: usize, values: Vec<Vector>) -> Result<Self> {
        if values.len() != window.len() {
            return Err(Error::DimensionMismatch { expected: window.len(), found: values.len() });
        }
        if let Some(v) = values.iter().find(|v| v.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: v.len() });
        }
        Ok(SolutionField { window, n, values })
    }

    pub fn from_fn(window: Window, n: usize, mut f: impl FnMut(&MultiIndex) -> Vector) -> Result<Self> {
        let values: Vec<Vector> = window.points().map(|t| f(&t)).collect();
        SolutionField::new(window, n, values)
    }

    pub fn try_from_fn(window: Window, n: usize, mut f: impl FnMut(&MultiIndex) -> Result<Vector>) -> Result<Self> {
        let values = window.points().map(|t| f(&t)).collect::<Result<Vec<_>>>()?;
        SolutionField::new(window, n, values)
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[Vector] {
        &self.values
    }

    pub fn get(&self, t: &MultiIndex) -> Option<&Vector> {
        self.window.offset(t).map(|i| &self.values[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (MultiIndex, &Vector)> + '_ {
        self.window.points().zip(self.values.iter())
    }

    /// The scalar field of one component.
    pub fn component(&self, k: usize) -> SolutionField {
        SolutionField { window: self.window.clone(), n: 1, values: self.values.iter().map(|v| vec![v[k]]).collect() }
    }

    pub fn is_real(&self) -> bool {
        self.values.iter().flatten().all(|z| z.im == 0.0)
    }

    /// Largest [`relative_error`] against another field on the same window.
    pub fn max_relative_error(&self, other: &SolutionField, floor: f64) -> Result<f64> {
        if self.window != other.window || self.n != other.n {
            return Err(Error::Contract("fields live on different windows".into()));
        }
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| relative_error(a, b, floor)).fold(0.0, f64::max))
    }

    pub fn agrees(&self, other: &SolutionField, tol: Tolerance) -> bool {
        self.window == other.window
            && self.n == other.n
            && self.values.iter().zip(&other.values).all(|(a, b)| tol.close(a, b))
    }

    /// Worst scaled residual of `x(t+1) = A(t)x(t) + b(t)` over interior points.
    pub fn interior_residual(&self, coefficients: &CoefficientProvider, forcing: Option<&ForcingProvider>) -> f64 {
        let mut worst = 0.0f64;
        for (t, x) in self.iter() {
            let next = t.up(1);
            let Some(x_next) = self.get(&next) else { continue };
            let a: Matrix = coefficients.at(&t);
            let mut predicted = a.mul_vec(x);
            if let Some(b) = forcing {
                for (p, bv) in predicted.iter_mut().zip(b.at(&t)) {
                    *p += bv;
                }
            }
            worst = worst.max(relative_error(x_next, &predicted, 1e-12));
        }
        worst
    }

    /// CSV with header `t1,…,tm,component,value`; an `imag` column is appended
    /// only when some entry has a nonzero imaginary part.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let complex = !self.is_real();
        let mut w = csv::Writer::from_writer(writer);
        let m = self.window.dim();
        let mut header: Vec<String> = (1..=m).map(|i| format!("t{i}")).collect();
        header.push("component".into());
        header.push("value".into());
        if complex {
            header.push("imag".into());
        }
        w.write_record(&header)?;
        for (t, v) in self.iter() {
            for (k, z) in v.iter().enumerate() {
                let mut rec: Vec<String> = t.components().iter().map(u64::to_string).collect();
                rec.push(k.to_string());
                rec.push(format_number(z.re));
                if complex {
                    rec.push(format_number(z.im));
                }
                w.write_record(&rec)?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Inverse of [`SolutionField::write_csv`]; the window is the bounding box of the rows.
    pub fn read_csv<R: Read>(reader: R) -> Result<SolutionField> {
        let mut r = csv::Reader::from_reader(reader);
        let header = r.headers()?.clone();
        let m = header.iter().take_while(|h| h.starts_with('t')).count();
        let complex = header.iter().any(|h| h == "imag");
        if m == 0 || header.get(m) != Some("component") || header.get(m + 1) != Some("value") {
            return Err(Error::Validation(format!("unexpected field CSV header {header:?}")));
        }
        let parse_err = |e: String| Error::Validation(format!("bad field CSV row: {e}"));
        let mut rows: Vec<(Vec<u64>, usize, C64)> = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let t = (0..m)
                .map(|i| rec[i].parse::<u64>().map_err(|e| parse_err(e.to_string())))
                .collect::<Result<Vec<_>>>()?;
            let k = rec[m].parse::<usize>().map_err(|e| parse_err(e.to_string()))?;
            let re = rec[m + 1].parse::<f64>().map_err(|e| parse_err(e.to_string()))?;
            let im = if complex { rec[m + 2].parse::<f64>().map_err(|e| parse_err(e.to_string()))? } else { 0.0 };
            rows.push((t, k, C64::new(re, im)));
        }
        let mut extents = vec![0u64; m];
        let mut n = 0usize;
        for (t, k, _) in &rows {
            for (e, c) in extents.iter_mut().zip(t) {
                *e = (*e).max(c + 1);
            }
            n = n.max(k + 1);
        }
        let window = Window::new(extents)?;
        let mut values = vec![vec![C64::new(f64::NAN, 0.0); n]; window.len()];
        for (t, k, z) in rows {
            let off = window.offset(&MultiIndex::new(t)?).expect("inside bounding box");
            values[off][k] = z;
        }
        if values.iter().flatten().any(|z| z.re.is_nan()) {
            return Err(Error::Validation("field CSV does not cover its bounding window".into()));
        }
        SolutionField::new(window, n, values)
    }
}

/// Shortest decimal that parses back to the same double.
pub fn format_number(x: f64) -> String {
    let s = format!("{x}");
    debug_assert_eq!(s.parse::<f64>().ok(), Some(x).filter(|v| !v.is_nan()).or(s.parse().ok()));
    s
}
