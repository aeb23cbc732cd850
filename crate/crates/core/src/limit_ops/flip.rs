use nalgebra::DMatrix;

use super::sections::{merge, FiniteSections};
use crate::band::Interval;
use crate::entry::{C64, ZERO};
use crate::error::BandError;

/// `a·I + b·V_{−j} J V_j` where `J : (x_i) ↦ (x_{−i})` is the flip.
///
/// Entry (i, k) equals `a·[i = k] + b·[k = −i − 2j]`. Not band-dominated, so it lives
/// outside `BandOperator` and supports only shifts and finite blocks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlipOperator {
    pub a: C64,
    pub b: C64,
    pub j: i64,
}

impl FlipOperator {
    /// The flip J itself.
    pub fn flip() -> FlipOperator {
        FlipOperator {
            a: ZERO,
            b: C64::new(1.0, 0.0),
            j: 0,
        }
    }

    /// `V_{−j'} (this) V_{j'}`.
    pub fn shift_conjugate(&self, j: i64) -> FlipOperator {
        FlipOperator { j: self.j + j, ..*self }
    }

    pub fn entry(&self, i: i64, k: i64) -> C64 {
        let mut z = ZERO;
        if i == k {
            z += self.a;
        }
        if k == -i - 2 * self.j {
            z += self.b;
        }
        z
    }

    fn mirror(&self, iv: Interval) -> Interval {
        Interval {
            lo: -iv.hi - 2 * self.j,
            hi: -iv.lo - 2 * self.j,
        }
    }

    fn touching(&self, iv: Interval) -> Vec<Interval> {
        let mut v = Vec::new();
        if self.a != ZERO {
            v.push(iv);
        }
        if self.b != ZERO {
            v.push(self.mirror(iv));
        }
        merge(v)
    }
}

impl FiniteSections for FlipOperator {
    fn entry_dim(&self) -> usize {
        1
    }

    fn cols_touching(&self, rows: Interval) -> Vec<Interval> {
        self.touching(rows)
    }

    fn rows_touching(&self, cols: Interval) -> Vec<Interval> {
        // k = −i − 2j is an involution on indices, so the relation is symmetric.
        self.touching(cols)
    }

    fn block(&self, rows: &[Interval], cols: &[Interval]) -> Result<DMatrix<C64>, BandError> {
        let ri: Vec<i64> = rows.iter().flat_map(|r| r.iter()).collect();
        let ci: Vec<i64> = cols.iter().flat_map(|c| c.iter()).collect();
        Ok(DMatrix::from_fn(ri.len(), ci.len(), |r, c| self.entry(ri[r], ci[c])))
    }
}
