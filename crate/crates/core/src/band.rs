//! Banded infinite matrices `A = Σ_α a_α V_α` over Z.
//!
//! Convention: `(V_α x)_i = x_{i−α}`, so the diagonal with offset α holds the entries
//! `A(i, i−α) = a_α(i)`.

use std::borrow::Cow;
use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::entry::{Entry, EntryDim, C64, ZERO};
use crate::error::BandError;
use crate::scheme::{Block, BlockScheme};

/// Inclusive integer interval `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
pub struct Interval {
    pub lo: i64,
    pub hi: i64,
}

impl Interval {
    pub fn new(lo: i64, hi: i64) -> Result<Interval, BandError> {
        if lo > hi {
            return Err(BandError::InvalidWindow(format!("empty interval [{lo}, {hi}]")));
        }
        Ok(Interval { lo, hi })
    }

    /// Centered window `{−⌊s/2⌋, …, ⌊s/2⌋}`.
    pub fn centered(s: u64) -> Interval {
        let h = (s / 2) as i64;
        Interval { lo: -h, hi: h }
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn diam(&self) -> u64 {
        (self.hi - self.lo) as u64
    }

    pub fn contains(&self, i: i64) -> bool {
        self.lo <= i && i <= self.hi
    }

    pub fn dilate(&self, w: usize) -> Interval {
        Interval {
            lo: self.lo - w as i64,
            hi: self.hi + w as i64,
        }
    }

    pub fn shift(&self, j: i64) -> Interval {
        Interval {
            lo: self.lo + j,
            hi: self.hi + j,
        }
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }

    pub fn iter(&self) -> std::ops::RangeInclusive<i64> {
        self.lo..=self.hi
    }
}

/// A subset F of Z on which restrictions `A|_F = A χ_F` live.
#[derive(Clone, Debug, PartialEq)]
pub enum Window {
    All,
    Interval(Interval),
    Union(Vec<Interval>),
}

impl Window {
    pub fn interval(lo: i64, hi: i64) -> Result<Window, BandError> {
        Ok(Window::Interval(Interval::new(lo, hi)?))
    }

    /// Normalized union: sorted, disjoint, non-adjacent pieces are kept; touching pieces merge.
    pub fn union(mut parts: Vec<Interval>) -> Result<Window, BandError> {
        if parts.is_empty() {
            return Err(BandError::InvalidWindow("empty union".into()));
        }
        parts.sort();
        for w in parts.windows(2) {
            if w[1].lo <= w[0].hi {
                return Err(BandError::InvalidWindow(format!(
                    "intervals [{}, {}] and [{}, {}] overlap",
                    w[0].lo, w[0].hi, w[1].lo, w[1].hi
                )));
            }
        }
        let mut merged: Vec<Interval> = Vec::with_capacity(parts.len());
        for p in parts {
            match merged.last_mut() {
                Some(last) if last.hi + 1 == p.lo => last.hi = p.hi,
                _ => merged.push(p),
            }
        }
        if merged.len() == 1 {
            Ok(Window::Interval(merged[0]))
        } else {
            Ok(Window::Union(merged))
        }
    }

    pub fn is_finite(&self) -> bool {
        !matches!(self, Window::All)
    }

    /// Finite pieces, sorted.
    pub fn pieces(&self) -> Option<Vec<Interval>> {
        match self {
            Window::All => None,
            Window::Interval(i) => Some(vec![*i]),
            Window::Union(v) => Some(v.clone()),
        }
    }

    /// Convex hull of a finite window.
    pub fn hull(&self) -> Option<Interval> {
        let p = self.pieces()?;
        Some(Interval {
            lo: p[0].lo,
            hi: p[p.len() - 1].hi,
        })
    }

    pub fn shift(&self, j: i64) -> Window {
        match self {
            Window::All => Window::All,
            Window::Interval(i) => Window::Interval(i.shift(j)),
            Window::Union(v) => Window::Union(v.iter().map(|i| i.shift(j)).collect()),
        }
    }

    /// F ∩ [lo, hi] as a list of pieces (possibly empty).
    pub fn clip(&self, range: Interval) -> Vec<Interval> {
        match self {
            Window::All => vec![range],
            Window::Interval(i) => i.intersect(&range).into_iter().collect(),
            Window::Union(v) => v.iter().filter_map(|i| i.intersect(&range)).collect(),
        }
    }

    pub fn contains(&self, i: i64) -> bool {
        match self {
            Window::All => true,
            Window::Interval(iv) => iv.contains(i),
            Window::Union(v) => v.iter().any(|iv| iv.contains(i)),
        }
    }
}

/// Which p-norm a vector or estimate refers to. `Zero` stands for c_0 (sup norm).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PNorm {
    Zero,
    Finite(f64),
    Infinity,
}

impl PNorm {
    pub const TWO: PNorm = PNorm::Finite(2.0);

    pub fn validate(self) -> Result<PNorm, String> {
        match self {
            PNorm::Finite(p) if !(p >= 1.0 && p.is_finite()) => {
                Err(format!("p must lie in {{0}} ∪ [1, ∞], got {p}"))
            }
            _ => Ok(self),
        }
    }

    pub fn is_two(self) -> bool {
        self == PNorm::TWO
    }

    pub fn label(self) -> String {
        match self {
            PNorm::Zero => "0".into(),
            PNorm::Finite(p) => format!("{p}"),
            PNorm::Infinity => "inf".into(),
        }
    }

    /// Norm of a finite list of local norms.
    pub fn combine(self, local: impl Iterator<Item = f64>) -> f64 {
        match self {
            PNorm::Zero | PNorm::Infinity => local.fold(0.0, f64::max),
            PNorm::Finite(p) => local.map(|v| v.powf(p)).sum::<f64>().powf(1.0 / p),
        }
    }
}

/// A finitely supported vector `x_offset, …, x_{offset+len−1}` with entries in C^d.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorSegment {
    pub offset: i64,
    pub dim: usize,
    /// Row-major: component `a` of `x_{offset+t}` sits at `t·dim + a`.
    pub data: Vec<C64>,
    pub p_norm: PNorm,
}

impl VectorSegment {
    pub fn new(offset: i64, dim: usize, data: Vec<C64>, p_norm: PNorm) -> VectorSegment {
        assert!(dim >= 1 && data.len() % dim == 0);
        VectorSegment {
            offset,
            dim,
            data,
            p_norm,
        }
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn at(&self, i: i64) -> &[C64] {
        let t = (i - self.offset) as usize;
        &self.data[t * self.dim..(t + 1) * self.dim]
    }

    fn local_norm(&self, t: usize) -> f64 {
        self.data[t * self.dim..(t + 1) * self.dim]
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn norm(&self) -> f64 {
        self.p_norm.combine((0..self.len()).map(|t| self.local_norm(t)))
    }

    /// Support `[first, last]` of nonzero positions, or `None` for the zero vector.
    pub fn support(&self) -> Option<Interval> {
        let nz: Vec<usize> = (0..self.len()).filter(|&t| self.local_norm(t) > 0.0).collect();
        Some(Interval {
            lo: self.offset + *nz.first()? as i64,
            hi: self.offset + *nz.last()? as i64,
        })
    }

    pub fn diam_supp(&self) -> u64 {
        self.support().map_or(0, |s| s.diam())
    }

    /// Translate: the result satisfies `y_{i+j} = x_i`.
    pub fn shifted(&self, j: i64) -> VectorSegment {
        VectorSegment {
            offset: self.offset + j,
            ..self.clone()
        }
    }

    /// Drop leading and trailing zero positions.
    pub fn trimmed(&self) -> VectorSegment {
        match self.support() {
            None => self.clone(),
            Some(s) => {
                let a = (s.lo - self.offset) as usize * self.dim;
                let b = (s.hi - self.offset + 1) as usize * self.dim;
                VectorSegment::new(s.lo, self.dim, self.data[a..b].to_vec(), self.p_norm)
            }
        }
    }
}

/// A p-periodic coefficient table, anchored so that index i reads `table[i mod q]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Periodic {
    table: Vec<Entry>,
}

impl Periodic {
    pub fn new(table: Vec<Entry>) -> Result<Periodic, BandError> {
        if table.is_empty() {
            return Err(BandError::InvalidOperator("periodic table must be nonempty".into()));
        }
        Ok(Periodic { table })
    }

    pub fn constant(e: Entry) -> Periodic {
        Periodic { table: vec![e] }
    }

    pub fn q(&self) -> usize {
        self.table.len()
    }

    pub fn table(&self) -> &[Entry] {
        &self.table
    }

    #[inline]
    pub fn at(&self, i: i64) -> &Entry {
        &self.table[i.rem_euclid(self.table.len() as i64) as usize]
    }

    fn rotated(&self, j: i64) -> Periodic {
        let q = self.q() as i64;
        Periodic {
            table: (0..q).map(|t| self.at(t + j).clone()).collect(),
        }
    }

    fn map(&self, f: &impl Fn(&Entry) -> Result<Entry, BandError>) -> Result<Periodic, BandError> {
        Ok(Periodic {
            table: self.table.iter().map(f).collect::<Result<_, _>>()?,
        })
    }
}

/// Diagonal read from a block scheme: `a(i) = S(i+s, i+s−β)`, or `S(i+s−β, i+s)^H` for adjoints.
#[derive(Clone, Debug)]
pub struct SchemeSeq {
    pub scheme: Arc<BlockScheme>,
    pub beta: i64,
    pub shift: i64,
    pub adjoint: bool,
}

impl PartialEq for SchemeSeq {
    fn eq(&self, other: &Self) -> bool {
        *self.scheme == *other.scheme
            && self.beta == other.beta
            && self.shift == other.shift
            && self.adjoint == other.adjoint
    }
}

impl SchemeSeq {
    fn get(&self, i: i64) -> Entry {
        let s = self.shift;
        if self.adjoint {
            match self.scheme.entry(i + s - self.beta, i + s) {
                Entry::Scalar(z) => Entry::Scalar(z.conj()),
                e => e,
            }
        } else {
            self.scheme.entry(i + s, i + s - self.beta)
        }
    }

    #[inline]
    fn scalar(&self, i: i64) -> C64 {
        let s = self.shift;
        if self.adjoint {
            self.scheme.scalar(i + s - self.beta, i + s).conj()
        } else {
            self.scheme.scalar(i + s, i + s - self.beta)
        }
    }

    /// Half-open row range outside which this diagonal is the identity (β = 0) or zero.
    fn zone(&self) -> (i64, i64) {
        let (a, b) = self.scheme.region();
        (a - self.shift + self.beta.min(0), b - self.shift + self.beta.max(0))
    }
}

/// Coefficient sequence of one diagonal.
#[derive(Clone, Debug, PartialEq)]
pub enum CoeffSeq {
    Constant(Entry),
    Periodic(Periodic),
    /// `left` for i < core_start, `core` on `core_start .. core_start + core.len()`, `right` after.
    EventuallyPeriodic {
        left: Periodic,
        core_start: i64,
        core: Vec<Entry>,
        right: Periodic,
    },
    Scheme(SchemeSeq),
}

impl CoeffSeq {
    pub fn get(&self, i: i64) -> Cow<'_, Entry> {
        match self {
            CoeffSeq::Constant(e) => Cow::Borrowed(e),
            CoeffSeq::Periodic(p) => Cow::Borrowed(p.at(i)),
            CoeffSeq::EventuallyPeriodic {
                left,
                core_start,
                core,
                right,
            } => {
                if i < *core_start {
                    Cow::Borrowed(left.at(i))
                } else if i < core_start + core.len() as i64 {
                    Cow::Borrowed(&core[(i - core_start) as usize])
                } else {
                    Cow::Borrowed(right.at(i))
                }
            }
            CoeffSeq::Scheme(s) => Cow::Owned(s.get(i)),
        }
    }

    /// Scalar fast path; only valid for entryDim 1.
    #[inline]
    pub(crate) fn scalar(&self, i: i64) -> C64 {
        match self {
            CoeffSeq::Scheme(s) => s.scalar(i),
            _ => self.get(i).elem(0, 0),
        }
    }

    /// The sequence `i ↦ a(i + j)`.
    pub fn shifted(&self, j: i64) -> CoeffSeq {
        match self {
            CoeffSeq::Constant(e) => CoeffSeq::Constant(e.clone()),
            CoeffSeq::Periodic(p) => CoeffSeq::Periodic(p.rotated(j)),
            CoeffSeq::EventuallyPeriodic {
                left,
                core_start,
                core,
                right,
            } => CoeffSeq::EventuallyPeriodic {
                left: left.rotated(j),
                core_start: core_start - j,
                core: core.clone(),
                right: right.rotated(j),
            },
            CoeffSeq::Scheme(s) => CoeffSeq::Scheme(SchemeSeq {
                shift: s.shift + j,
                ..s.clone()
            }),
        }
    }

    fn map_entries(
        &self,
        f: &impl Fn(&Entry) -> Result<Entry, BandError>,
    ) -> Result<CoeffSeq, BandError> {
        Ok(match self {
            CoeffSeq::Constant(e) => CoeffSeq::Constant(f(e)?),
            CoeffSeq::Periodic(p) => CoeffSeq::Periodic(p.map(f)?),
            CoeffSeq::EventuallyPeriodic {
                left,
                core_start,
                core,
                right,
            } => CoeffSeq::EventuallyPeriodic {
                left: left.map(f)?,
                core_start: *core_start,
                core: core.iter().map(f).collect::<Result<_, _>>()?,
                right: right.map(f)?,
            },
            CoeffSeq::Scheme(_) => {
                return Err(BandError::SchemeNotSupported("entry-wise maps".into()))
            }
        })
    }

    /// Sequence of the adjoint operator on diagonal −α, given this sequence sits on α.
    fn adjoint_on(&self, alpha: i64) -> Result<CoeffSeq, BandError> {
        match self {
            CoeffSeq::Scheme(s) => {
                if s.scheme.entry_dim() == EntryDim::Abstract {
                    return Err(BandError::AbstractEntriesNotMaterializable);
                }
                // a'(i) = a_α(i + α)^H
                Ok(CoeffSeq::Scheme(SchemeSeq {
                    scheme: s.scheme.clone(),
                    beta: -s.beta,
                    shift: s.shift,
                    adjoint: !s.adjoint,
                }))
            }
            _ => self.shifted(alpha).map_entries(&|e| e.adjoint()),
        }
    }

    /// Largest entry norm bound; `None` for scheme diagonals, which declare their own bound.
    fn sup_norm(&self) -> Option<f64> {
        let max = |it: &mut dyn Iterator<Item = &Entry>| it.map(|e| e.norm_bound()).fold(0.0, f64::max);
        match self {
            CoeffSeq::Constant(e) => Some(e.norm_bound()),
            CoeffSeq::Periodic(p) => Some(max(&mut p.table.iter())),
            CoeffSeq::EventuallyPeriodic {
                left, core, right, ..
            } => Some(max(&mut left.table.iter().chain(core).chain(&right.table))),
            CoeffSeq::Scheme(_) => None,
        }
    }

    fn entries(&self) -> Vec<&Entry> {
        match self {
            CoeffSeq::Constant(e) => vec![e],
            CoeffSeq::Periodic(p) => p.table.iter().collect(),
            CoeffSeq::EventuallyPeriodic {
                left, core, right, ..
            } => left.table.iter().chain(core).chain(&right.table).collect(),
            CoeffSeq::Scheme(_) => vec![],
        }
    }

    /// Half-open range `[lo, hi)` of irregular indices; periodic on each side.
    fn zone(&self) -> Option<(i64, i64)> {
        match self {
            CoeffSeq::Constant(_) | CoeffSeq::Periodic(_) => None,
            CoeffSeq::EventuallyPeriodic {
                core_start, core, ..
            } => Some((*core_start, core_start + core.len() as i64)),
            CoeffSeq::Scheme(s) => Some(s.zone()),
        }
    }

    fn periods(&self) -> (u64, u64) {
        match self {
            CoeffSeq::Constant(_) | CoeffSeq::Scheme(_) => (1, 1),
            CoeffSeq::Periodic(p) => (p.q() as u64, p.q() as u64),
            CoeffSeq::EventuallyPeriodic { left, right, .. } => (left.q() as u64, right.q() as u64),
        }
    }

    fn validate(&self, dim: EntryDim) -> Result<(), BandError> {
        if let CoeffSeq::Scheme(s) = self {
            if s.scheme.entry_dim() != dim {
                return Err(BandError::InvalidOperator("scheme entry dimension mismatch".into()));
            }
            return Ok(());
        }
        for e in self.entries() {
            e.validate()?;
            if e.dim() != dim {
                return Err(BandError::InvalidOperator(format!(
                    "entry dimension {:?} does not match operator dimension {:?}",
                    e.dim(),
                    dim
                )));
            }
        }
        Ok(())
    }
}

/// Where an operator stops being periodic: rows `< zone.0` follow a `left_period`-periodic
/// pattern and rows `>= zone.1` a `right_period`-periodic one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TailStructure {
    pub zone: Option<(i64, i64)>,
    pub left_period: u64,
    pub right_period: u64,
}

impl TailStructure {
    /// Common period of both tails.
    pub fn joint_period(&self) -> u64 {
        lcm(self.left_period, self.right_period)
    }
}

pub(crate) fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub(crate) fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

/// Block-diagonal layout of a pure scheme operator, in operator coordinates.
#[derive(Clone, Debug)]
pub struct BlockLayout {
    pub scheme: Arc<BlockScheme>,
    /// Operator index = scheme index − offset.
    pub offset: i64,
    pub adjoint: bool,
}

impl BlockLayout {
    pub fn blocks(&self) -> impl Iterator<Item = Block> + '_ {
        self.scheme.blocks().iter().map(move |b| Block {
            start: b.start - self.offset,
            ..*b
        })
    }
}

/// A band operator over Z with finitely many nonzero diagonals.
#[derive(Clone, Debug, PartialEq)]
pub struct BandOperator {
    diagonals: BTreeMap<i64, CoeffSeq>,
    band_width: usize,
    entry_dim: EntryDim,
}

impl BandOperator {
    pub fn new(
        entry_dim: EntryDim,
        diagonals: impl IntoIterator<Item = (i64, CoeffSeq)>,
    ) -> Result<BandOperator, BandError> {
        let mut map = BTreeMap::new();
        for (alpha, seq) in diagonals {
            seq.validate(entry_dim)?;
            if map.insert(alpha, seq).is_some() {
                return Err(BandError::InvalidOperator(format!("duplicate diagonal {alpha}")));
            }
        }
        if entry_dim == EntryDim::Abstract && map.keys().any(|&a| a != 0) {
            return Err(BandError::InvalidOperator(
                "abstract entries are only allowed on the main diagonal".into(),
            ));
        }
        if let EntryDim::Finite(0) = entry_dim {
            return Err(BandError::InvalidOperator("entry dimension must be positive".into()));
        }
        let band_width = map.keys().map(|a| a.unsigned_abs() as usize).max().unwrap_or(0);
        Ok(BandOperator {
            diagonals: map,
            band_width,
            entry_dim,
        })
    }

    /// Scalar Laurent (constant-diagonal) operator `Σ c_α V_α`.
    pub fn laurent(coeffs: &[(i64, C64)]) -> BandOperator {
        Self::new(
            EntryDim::Finite(1),
            coeffs.iter().map(|&(a, c)| (a, CoeffSeq::Constant(Entry::Scalar(c)))),
        )
        .expect("scalar Laurent operators are always valid")
    }

    pub fn identity(dim: EntryDim) -> BandOperator {
        Self::new(dim, [(0, CoeffSeq::Constant(Entry::identity(dim)))]).expect("identity is valid")
    }

    /// Pure diagonal operator with the given sequence.
    pub fn diagonal(dim: EntryDim, seq: CoeffSeq) -> Result<BandOperator, BandError> {
        Self::new(dim, [(0, seq)])
    }

    /// Operator whose diagonals are all read from a block scheme.
    pub fn from_scheme(scheme: Arc<BlockScheme>) -> BandOperator {
        let w = scheme.band_width() as i64;
        let dim = scheme.entry_dim();
        Self::new(
            dim,
            (-w..=w).map(|beta| {
                (
                    beta,
                    CoeffSeq::Scheme(SchemeSeq {
                        scheme: scheme.clone(),
                        beta,
                        shift: 0,
                        adjoint: false,
                    }),
                )
            }),
        )
        .expect("scheme operators are valid")
    }

    pub fn diagonals(&self) -> &BTreeMap<i64, CoeffSeq> {
        &self.diagonals
    }

    pub fn band_width(&self) -> usize {
        self.band_width
    }

    pub fn entry_dim(&self) -> EntryDim {
        self.entry_dim
    }

    /// Scalar dimension d of one entry; 1 for abstract operators.
    pub fn d(&self) -> usize {
        self.entry_dim.finite().unwrap_or(1)
    }

    pub fn is_abstract(&self) -> bool {
        self.entry_dim == EntryDim::Abstract
    }

    pub fn is_diagonal(&self) -> bool {
        self.diagonals.keys().all(|&a| a == 0)
    }

    pub fn has_scheme(&self) -> bool {
        self.diagonals.values().any(|s| matches!(s, CoeffSeq::Scheme(_)))
    }

    /// Generalized matrix entry a_ij; the zero entry off the band.
    pub fn entry_at(&self, i: i64, j: i64) -> Entry {
        match self.diagonals.get(&(i - j)) {
            Some(seq) => seq.get(i).into_owned(),
            None => Entry::zero(self.entry_dim),
        }
    }

    /// Scalar component `(a, b)` of entry `(i, j)`.
    #[inline]
    pub(crate) fn elem(&self, i: i64, a: usize, j: i64, b: usize) -> C64 {
        match self.diagonals.get(&(i - j)) {
            None => ZERO,
            Some(seq) => {
                if self.entry_dim == EntryDim::Finite(1) {
                    seq.scalar(i)
                } else {
                    seq.get(i).elem(a, b)
                }
            }
        }
    }

    /// Dense `(|rows|·d) × (|cols|·d)` block `χ_rows A χ_cols`.
    pub fn materialize_block(&self, rows: Interval, cols: Interval) -> Result<DMatrix<C64>, BandError> {
        self.materialize_cols(rows, &[cols])
    }

    /// Dense block with rows `rows` and the columns of several pieces, concatenated in order.
    pub fn materialize_cols(&self, rows: Interval, cols: &[Interval]) -> Result<DMatrix<C64>, BandError> {
        if self.is_abstract() {
            return Err(BandError::AbstractEntriesNotMaterializable);
        }
        let d = self.d();
        let ncols: usize = cols.iter().map(|c| c.len()).sum();
        let mut m = DMatrix::zeros(rows.len() * d, ncols * d);
        let w = self.band_width as i64;
        let mut cbase = 0;
        for piece in cols {
            for (cj, j) in piece.iter().enumerate() {
                let lo = rows.lo.max(j - w);
                let hi = rows.hi.min(j + w);
                for i in lo..=hi {
                    let Some(seq) = self.diagonals.get(&(i - j)) else { continue };
                    let e = seq.get(i);
                    let ri = (i - rows.lo) as usize;
                    for a in 0..d {
                        for b in 0..d {
                            m[(ri * d + a, (cbase + cj) * d + b)] = e.elem(a, b);
                        }
                    }
                }
            }
            cbase += piece.len();
        }
        Ok(m)
    }

    /// `V_{−j} A V_j`: entry (i, k) of the result is entry (i + j, k + j) of A.
    pub fn shift_conjugate(&self, j: i64) -> BandOperator {
        BandOperator {
            diagonals: self
                .diagonals
                .iter()
                .map(|(&a, s)| (a, s.shifted(j)))
                .collect(),
            band_width: self.band_width,
            entry_dim: self.entry_dim,
        }
    }

    pub fn adjoint(&self) -> Result<BandOperator, BandError> {
        if self.is_abstract() {
            return Err(BandError::AbstractEntriesNotMaterializable);
        }
        let diagonals = self
            .diagonals
            .iter()
            .map(|(&a, s)| Ok((-a, s.adjoint_on(a)?)))
            .collect::<Result<BTreeMap<_, _>, BandError>>()?;
        Ok(BandOperator {
            diagonals,
            band_width: self.band_width,
            entry_dim: self.entry_dim,
        })
    }

    /// `Σ_α sup_i ‖a_α(i)‖`; scheme diagonals contribute the scheme's declared bound once.
    pub fn wiener_norm_bound(&self) -> Result<f64, BandError> {
        let mut total = 0.0;
        let mut schemes: Vec<(&BlockScheme, i64, bool)> = Vec::new();
        for seq in self.diagonals.values() {
            match seq {
                CoeffSeq::Scheme(s) => {
                    let key = (&*s.scheme, s.shift, s.adjoint);
                    if !schemes.iter().any(|k| std::ptr::eq(k.0, key.0) && k.1 == key.1 && k.2 == key.2) {
                        let b = s
                            .scheme
                            .sup_bound()
                            .ok_or_else(|| BandError::UnboundedScheme(s.scheme.kind().name().into()))?;
                        total += b;
                        schemes.push(key);
                    }
                }
                other => total += other.sup_norm().unwrap_or(0.0),
            }
        }
        Ok(total)
    }

    /// Periodicity outside a finite irregular zone, merged over all diagonals.
    pub fn tail_structure(&self) -> TailStructure {
        let mut zone: Option<(i64, i64)> = None;
        let (mut lp, mut rp) = (1u64, 1u64);
        for seq in self.diagonals.values() {
            let (l, r) = seq.periods();
            lp = lcm(lp, l);
            rp = lcm(rp, r);
            if let Some((a, b)) = seq.zone() {
                zone = Some(match zone {
                    None => (a, b),
                    Some((x, y)) => (x.min(a), y.max(b)),
                });
            }
        }
        TailStructure {
            zone,
            left_period: lp,
            right_period: rp,
        }
    }

    /// Block structure when every diagonal reads the same scheme with the same placement.
    pub fn block_layout(&self) -> Option<BlockLayout> {
        let mut found: Option<BlockLayout> = None;
        for seq in self.diagonals.values() {
            let CoeffSeq::Scheme(s) = seq else { return None };
            match &found {
                None => {
                    found = Some(BlockLayout {
                        scheme: s.scheme.clone(),
                        offset: s.shift,
                        adjoint: s.adjoint,
                    })
                }
                Some(f) => {
                    if !Arc::ptr_eq(&f.scheme, &s.scheme) || f.offset != s.shift || f.adjoint != s.adjoint {
                        return None;
                    }
                }
            }
        }
        found
    }

    /// `A + λI`; not available for scheme or abstract operators.
    pub fn plus_identity(&self, lambda: C64) -> Result<BandOperator, BandError> {
        if self.is_abstract() {
            return Err(BandError::AbstractEntriesNotMaterializable);
        }
        if self.has_scheme() {
            return Err(BandError::SchemeNotSupported("adding multiples of I".into()));
        }
        let id = Entry::identity(self.entry_dim);
        let add = |e: &Entry| -> Result<Entry, BandError> {
            Ok(match (e, &id) {
                (Entry::Scalar(z), _) => Entry::Scalar(z + lambda),
                (Entry::Matrix(m), Entry::Matrix(i)) => Entry::Matrix(m + i * lambda),
                _ => unreachable!(),
            })
        };
        let mut diagonals = self.diagonals.clone();
        let main = match diagonals.remove(&0) {
            Some(seq) => seq.map_entries(&add)?,
            None => CoeffSeq::Constant(add(&Entry::zero(self.entry_dim))?),
        };
        diagonals.insert(0, main);
        BandOperator::new(self.entry_dim, diagonals)
    }

    /// Entry-wise equality on `probe × probe.dilate(w)`.
    pub fn approx_eq_on(&self, other: &BandOperator, probe: Interval, tol: f64) -> bool {
        if self.entry_dim != other.entry_dim {
            return false;
        }
        let w = self.band_width.max(other.band_width) as i64;
        probe.iter().all(|i| {
            (i - w..=i + w).all(|j| self.entry_at(i, j).approx_eq(&other.entry_at(i, j), tol))
        })
    }

    /// ‖A x‖₂ for a finitely supported x.
    pub fn apply_norm(&self, x: &VectorSegment) -> f64 {
        self.apply(x).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// A x on rows `supp ⊕ w`, flattened row-major.
    pub fn apply(&self, x: &VectorSegment) -> Vec<C64> {
        let d = self.d();
        assert_eq!(d, x.dim);
        let n = x.len() as i64;
        let w = self.band_width as i64;
        let rows = Interval {
            lo: x.offset - w,
            hi: x.offset + n - 1 + w,
        };
        let mut out = vec![ZERO; rows.len() * d];
        for (&alpha, seq) in &self.diagonals {
            for t in 0..n {
                let j = x.offset + t;
                let i = j + alpha;
                let xs = x.at(j);
                if xs.iter().all(|z| *z == ZERO) {
                    continue;
                }
                let e = seq.get(i);
                let ri = (i - rows.lo) as usize;
                for a in 0..d {
                    let mut acc = ZERO;
                    for (b, xb) in xs.iter().enumerate() {
                        acc += e.elem(a, b) * xb;
                    }
                    out[ri * d + a] += acc;
                }
            }
        }
        out
    }

    /// Entry on the main diagonal at row i.
    pub(crate) fn diagonal_entry(&self, i: i64) -> Entry {
        match self.diagonals.get(&0) {
            Some(seq) => seq.get(i).into_owned(),
            None => Entry::zero(self.entry_dim),
        }
    }
}

/// Lower norm of a single entry as a map on X (2-norm on C^d).
pub(crate) fn entry_lower_norm(e: &Entry) -> f64 {
    match e {
        Entry::Scalar(z) => z.norm(),
        Entry::Matrix(m) => {
            let sv = m.clone().singular_values();
            sv.iter().cloned().fold(f64::INFINITY, f64::min)
        }
        Entry::Abstract(a) => a.lower_norm,
    }
}
