//! Closed-form block layouts for the gallery operators.
//!
//! Both layouts start at index 0 and fill the half-line with the blocks
//! `D_1, D_2, …, D_{n_max}` (or `C_1, C_2, …` for the abstract variant). Every index
//! outside that range carries the identity.

use nalgebra::DMatrix;

use crate::entry::{Entry, EntryDim, C64, ONE, ZERO};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    /// diag(…, I, I, C_1, C_2, …) with C_n = diag(B_1×n, …, B_n×n) and abstract B_k = b_k I.
    Example13,
    /// diag(…, I, I, D_1, D_2, …) with D_n = diag(C_1×n, …, C_n×n) and C_k = I − k/(k+1)·B_k.
    Example14,
}

impl SchemeKind {
    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::Example13 => "example13",
            SchemeKind::Example14 => "example14",
        }
    }

    pub fn from_name(name: &str) -> Option<SchemeKind> {
        match name {
            "example13" => Some(SchemeKind::Example13),
            "example14" => Some(SchemeKind::Example14),
            _ => None,
        }
    }
}

/// One square diagonal block: indices `start .. start + size`, of type `k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Block {
    pub start: i64,
    pub size: usize,
    pub k: usize,
}

impl Block {
    pub fn end(&self) -> i64 {
        self.start + self.size as i64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockScheme {
    kind: SchemeKind,
    n_max: usize,
    blocks: Vec<Block>,
    total: i64,
}

impl BlockScheme {
    pub fn new(kind: SchemeKind, n_max: usize) -> BlockScheme {
        assert!(n_max >= 1, "n_max must be positive");
        let mut blocks = Vec::new();
        let mut pos = 0i64;
        for n in 1..=n_max {
            for k in 1..=n {
                let size = match kind {
                    SchemeKind::Example13 => 1,
                    SchemeKind::Example14 => k,
                };
                for _ in 0..n {
                    blocks.push(Block { start: pos, size, k });
                    pos += size as i64;
                }
            }
        }
        BlockScheme {
            kind,
            n_max,
            blocks,
            total: pos,
        }
    }

    pub fn kind(&self) -> SchemeKind {
        self.kind
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// Half-open index range `[0, total)` covered by blocks.
    pub fn region(&self) -> (i64, i64) {
        (0, self.total)
    }

    pub fn entry_dim(&self) -> EntryDim {
        match self.kind {
            SchemeKind::Example13 => EntryDim::Abstract,
            SchemeKind::Example14 => EntryDim::Finite(1),
        }
    }

    pub fn band_width(&self) -> usize {
        match self.kind {
            SchemeKind::Example13 => 0,
            SchemeKind::Example14 => self.n_max - 1,
        }
    }

    /// Declared bound on the operator norm, valid for every p.
    pub fn sup_bound(&self) -> Option<f64> {
        match self.kind {
            // sup_k ‖B_k‖ = sup_k (2 + 1/k) = 3
            SchemeKind::Example13 => Some(3.0),
            // ‖C_k‖ ≤ 1 + k/(k+1)·‖B_k‖ < 2
            SchemeKind::Example14 => Some(2.0),
        }
    }

    /// Largest block size, used for probe windows.
    pub fn max_block(&self) -> usize {
        self.blocks.iter().map(|b| b.size).max().unwrap_or(1)
    }

    pub fn block_at(&self, i: i64) -> Option<&Block> {
        if i < 0 || i >= self.total {
            return None;
        }
        let idx = self.blocks.partition_point(|b| b.start <= i) - 1;
        Some(&self.blocks[idx])
    }

    /// Entry (i, j) in scheme coordinates.
    pub fn entry(&self, i: i64, j: i64) -> Entry {
        match self.kind {
            SchemeKind::Example13 => {
                if i != j {
                    return Entry::zero(EntryDim::Abstract);
                }
                match self.block_at(i) {
                    Some(b) => example13_entry(b.k),
                    None => Entry::identity(EntryDim::Abstract),
                }
            }
            SchemeKind::Example14 => Entry::Scalar(self.scalar(i, j)),
        }
    }

    #[inline]
    pub(crate) fn scalar(&self, i: i64, j: i64) -> C64 {
        match (self.block_at(i), self.block_at(j)) {
            (None, None) if i == j => ONE,
            (Some(a), Some(b)) if a.start == b.start => {
                let off = C64::new(1.0 / (a.k as f64 + 1.0), 0.0);
                if i == j {
                    ONE - off
                } else {
                    -off
                }
            }
            _ => ZERO,
        }
    }
}

/// B_k = b_k I with b_k(t) = 1/k + 1 + sin(2πkt): sup b_k = 2 + 1/k, inf b_k = 1/k.
pub fn example13_entry(k: usize) -> Entry {
    let kf = k as f64;
    Entry::abstract_entry(format!("B_{k}"), 2.0 + 1.0 / kf, 1.0 / kf)
}

/// The n×n averaging block B_n = (1/n)·ones.
pub fn block_b(n: usize) -> DMatrix<C64> {
    DMatrix::from_element(n, n, C64::new(1.0 / n as f64, 0.0))
}

/// C_k = I − k/(k+1)·B_k.
pub fn block_c(k: usize) -> DMatrix<C64> {
    let factor = C64::new(k as f64 / (k as f64 + 1.0), 0.0);
    DMatrix::identity(k, k) - block_b(k) * factor
}
