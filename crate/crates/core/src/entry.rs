use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::BandError;

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Dimension of the local space X that matrix entries act on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EntryDim {
    Finite(usize),
    Abstract,
}

impl EntryDim {
    pub fn finite(self) -> Option<usize> {
        match self {
            EntryDim::Finite(d) => Some(d),
            EntryDim::Abstract => None,
        }
    }
}

/// An operator on an infinite-dimensional X, known only through its norm and lower norm.
#[derive(Clone, Debug, PartialEq)]
pub struct AbstractEntry {
    pub label: String,
    pub norm: f64,
    pub lower_norm: f64,
}

/// A single generalized matrix entry a_ij.
#[derive(Clone, Debug, PartialEq)]
pub enum Entry {
    Scalar(C64),
    Matrix(DMatrix<C64>),
    Abstract(AbstractEntry),
}

impl Entry {
    pub fn scalar(re: f64, im: f64) -> Entry {
        Entry::Scalar(C64::new(re, im))
    }

    pub fn real(re: f64) -> Entry {
        Entry::Scalar(C64::new(re, 0.0))
    }

    pub fn abstract_entry(label: impl Into<String>, norm: f64, lower_norm: f64) -> Entry {
        Entry::Abstract(AbstractEntry {
            label: label.into(),
            norm,
            lower_norm,
        })
    }

    /// The zero entry of the given dimension. For abstract spaces this is `Abstract("0", 0, 0)`.
    pub fn zero(dim: EntryDim) -> Entry {
        match dim {
            EntryDim::Finite(1) => Entry::Scalar(ZERO),
            EntryDim::Finite(d) => Entry::Matrix(DMatrix::zeros(d, d)),
            EntryDim::Abstract => Entry::abstract_entry("0", 0.0, 0.0),
        }
    }

    pub fn identity(dim: EntryDim) -> Entry {
        match dim {
            EntryDim::Finite(1) => Entry::Scalar(ONE),
            EntryDim::Finite(d) => Entry::Matrix(DMatrix::identity(d, d)),
            EntryDim::Abstract => Entry::abstract_entry("I", 1.0, 1.0),
        }
    }

    pub fn dim(&self) -> EntryDim {
        match self {
            Entry::Scalar(_) => EntryDim::Finite(1),
            Entry::Matrix(m) => EntryDim::Finite(m.nrows()),
            Entry::Abstract(_) => EntryDim::Abstract,
        }
    }

    /// Component (a, b) of a finite entry; scalars are 1×1.
    #[inline]
    pub fn elem(&self, a: usize, b: usize) -> C64 {
        match self {
            Entry::Scalar(z) => *z,
            Entry::Matrix(m) => m[(a, b)],
            Entry::Abstract(_) => panic!("abstract entries have no components"),
        }
    }

    /// Bound on the operator norm of the entry, valid on C^d with any p-norm.
    ///
    /// For matrices this is max(‖·‖₁, ‖·‖∞), which dominates every ‖·‖_p by Riesz–Thorin.
    pub fn norm_bound(&self) -> f64 {
        match self {
            Entry::Scalar(z) => z.norm(),
            Entry::Matrix(m) => {
                let col = (0..m.ncols())
                    .map(|c| m.column(c).iter().map(|z| z.norm()).sum::<f64>())
                    .fold(0.0, f64::max);
                let row = (0..m.nrows())
                    .map(|r| m.row(r).iter().map(|z| z.norm()).sum::<f64>())
                    .fold(0.0, f64::max);
                col.max(row)
            }
            Entry::Abstract(a) => a.norm,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Entry::Scalar(z) => *z == ZERO,
            Entry::Matrix(m) => m.iter().all(|z| *z == ZERO),
            Entry::Abstract(a) => a.norm == 0.0,
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Result<Entry, BandError> {
        match self {
            Entry::Scalar(z) => Ok(Entry::Scalar(z.conj())),
            Entry::Matrix(m) => Ok(Entry::Matrix(m.adjoint())),
            Entry::Abstract(_) => Err(BandError::AbstractEntriesNotMaterializable),
        }
    }

    /// Entry-wise comparison with absolute tolerance.
    pub fn approx_eq(&self, other: &Entry, tol: f64) -> bool {
        match (self, other) {
            (Entry::Abstract(a), Entry::Abstract(b)) => {
                (a.norm - b.norm).abs() <= tol && (a.lower_norm - b.lower_norm).abs() <= tol
            }
            (Entry::Abstract(_), _) | (_, Entry::Abstract(_)) => false,
            _ => {
                let (da, db) = (self.dim(), other.dim());
                if da != db {
                    return false;
                }
                let d = da.finite().unwrap_or(1);
                (0..d).all(|a| (0..d).all(|b| (self.elem(a, b) - other.elem(a, b)).norm() <= tol))
            }
        }
    }

    pub fn validate(&self) -> Result<(), BandError> {
        match self {
            Entry::Scalar(z) if !(z.re.is_finite() && z.im.is_finite()) => {
                Err(BandError::InvalidEntry("non-finite scalar".into()))
            }
            Entry::Matrix(m) if m.nrows() == 0 || m.nrows() != m.ncols() => {
                Err(BandError::InvalidEntry("matrix entries must be square with d ≥ 1".into()))
            }
            Entry::Matrix(m) if m.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) => {
                Err(BandError::InvalidEntry("non-finite matrix component".into()))
            }
            Entry::Abstract(a)
                if !(a.lower_norm >= 0.0 && a.lower_norm <= a.norm && a.norm.is_finite()) =>
            {
                Err(BandError::InvalidEntry(format!(
                    "abstract entry {} needs 0 <= lowerNorm <= norm",
                    a.label
                )))
            }
            _ => Ok(()),
        }
    }
}

impl From<C64> for Entry {
    fn from(z: C64) -> Self {
        Entry::Scalar(z)
    }
}

impl From<f64> for Entry {
    fn from(x: f64) -> Self {
        Entry::real(x)
    }
}
