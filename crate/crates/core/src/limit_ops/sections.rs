use nalgebra::DMatrix;

use crate::band::{BandOperator, Interval};
use crate::entry::{C64, ZERO};
use crate::error::BandError;

/// Anything whose finite blocks `χ_R A χ_C` can be materialized, banded or not.
pub trait FiniteSections: Send + Sync {
    /// Scalar size of one entry.
    fn entry_dim(&self) -> usize;
    /// Columns that can carry nonzero entries in the given rows.
    fn cols_touching(&self, rows: Interval) -> Vec<Interval>;
    /// Rows that can carry nonzero entries in the given columns.
    fn rows_touching(&self, cols: Interval) -> Vec<Interval>;
    /// Dense block with rows and columns listed piece by piece.
    fn block(&self, rows: &[Interval], cols: &[Interval]) -> Result<DMatrix<C64>, BandError>;
}

impl FiniteSections for BandOperator {
    fn entry_dim(&self) -> usize {
        self.d()
    }

    fn cols_touching(&self, rows: Interval) -> Vec<Interval> {
        vec![rows.dilate(self.band_width())]
    }

    fn rows_touching(&self, cols: Interval) -> Vec<Interval> {
        vec![cols.dilate(self.band_width())]
    }

    fn block(&self, rows: &[Interval], cols: &[Interval]) -> Result<DMatrix<C64>, BandError> {
        if self.is_abstract() {
            return Err(BandError::AbstractEntriesNotMaterializable);
        }
        let d = self.d();
        let nr: usize = rows.iter().map(|r| r.len()).sum();
        let nc: usize = cols.iter().map(|c| c.len()).sum();
        let mut m = DMatrix::from_element(nr * d, nc * d, ZERO);
        let mut ri = 0;
        for rp in rows {
            for i in rp.iter() {
                let mut cj = 0;
                for cp in cols {
                    for j in cp.iter() {
                        if (i - j).unsigned_abs() as usize <= self.band_width() {
                            for a in 0..d {
                                for b in 0..d {
                                    m[(ri * d + a, cj * d + b)] = self.elem(i, a, j, b);
                                }
                            }
                        }
                        cj += 1;
                    }
                }
                ri += 1;
            }
        }
        Ok(m)
    }
}

/// Sorted union of intervals with touching pieces merged.
pub(crate) fn merge(mut v: Vec<Interval>) -> Vec<Interval> {
    v.sort();
    let mut out: Vec<Interval> = Vec::with_capacity(v.len());
    for p in v {
        match out.last_mut() {
            Some(last) if p.lo <= last.hi + 1 => last.hi = last.hi.max(p.hi),
            _ => out.push(p),
        }
    }
    out
}

/// Spectral norm; exact for matrices with at most one nonzero per row and column.
pub(crate) fn spectral_norm(m: &DMatrix<C64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let monomial = (0..m.nrows()).all(|r| m.row(r).iter().filter(|z| **z != ZERO).count() <= 1)
        && (0..m.ncols()).all(|c| m.column(c).iter().filter(|z| **z != ZERO).count() <= 1);
    if monomial {
        return m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    }
    m.clone().singular_values().iter().cloned().fold(0.0, f64::max)
}
