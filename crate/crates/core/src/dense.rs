//! Dense singular values of column sections `A χ_S`.

use nalgebra::{DMatrix, DVector, SVD};

use crate::band::{BandOperator, Interval};
use crate::entry::{C64, ZERO};

/// Sorted, merged rows `S ⊕ w`: every row that can be nonzero in `A χ_S`.
pub(crate) fn row_pieces(pieces: &[Interval], w: usize) -> Vec<Interval> {
    let mut out: Vec<Interval> = Vec::new();
    for p in pieces {
        let q = p.dilate(w);
        match out.last_mut() {
            Some(last) if q.lo <= last.hi + 1 => last.hi = last.hi.max(q.hi),
            _ => out.push(q),
        }
    }
    out
}

pub(crate) fn scalar_cols(pieces: &[Interval], d: usize) -> usize {
    pieces.iter().map(|p| p.len()).sum::<usize>() * d
}

/// `A χ_S` restricted to the rows `S ⊕ w`, columns in the order of `pieces`.
pub(crate) fn section_matrix(op: &BandOperator, pieces: &[Interval]) -> DMatrix<C64> {
    let d = op.d();
    let w = op.band_width() as i64;
    let rows = row_pieces(pieces, op.band_width());
    let nrows: usize = rows.iter().map(|r| r.len()).sum::<usize>() * d;
    let ncols = scalar_cols(pieces, d);
    let mut m = DMatrix::from_element(nrows, ncols, ZERO);
    let row_pos = |i: i64| -> usize {
        let mut base = 0;
        for r in &rows {
            if r.contains(i) {
                return base + (i - r.lo) as usize;
            }
            base += r.len();
        }
        unreachable!("row outside dilated window")
    };
    let mut col = 0usize;
    for p in pieces {
        for j in p.iter() {
            for i in j - w..=j + w {
                let Some(seq) = op.diagonals().get(&(i - j)) else { continue };
                let e = seq.get(i);
                let ri = row_pos(i) * d;
                for a in 0..d {
                    for b in 0..d {
                        m[(ri + a, col * d + b)] = e.elem(a, b);
                    }
                }
            }
            col += 1;
        }
    }
    m
}

/// SVD with a convergence threshold well below machine epsilon. With the default threshold
/// nalgebra can stop early when singular vectors are requested, leaving the smallest
/// singular value off by ~1e-7 relative.
pub(crate) fn svd(m: DMatrix<C64>, want_u: bool, want_v: bool) -> SVD<C64, nalgebra::Dyn, nalgebra::Dyn> {
    let max_iter = 100 * m.nrows().max(m.ncols()).max(10);
    match SVD::try_new(m.clone(), want_u, want_v, f64::EPSILON * 1e-2, max_iter) {
        Some(s) => s,
        None => SVD::new(m, want_u, want_v),
    }
}

/// Smallest singular value and a unit right singular vector of a tall matrix.
///
/// nalgebra's SVD occasionally deflates early and reports σ_min too large by up to ~1e-7
/// relative. The vector it returns is still close, so a few steps of inverse iteration
/// through the triangular factor of `m = QR` restore full accuracy; the value reported is
/// `‖m x‖`, which never undercuts σ_min.
pub(crate) fn smallest_singular(m: DMatrix<C64>) -> (f64, DVector<C64>) {
    let n = m.ncols();
    if n == 0 {
        return (f64::INFINITY, DVector::zeros(0));
    }
    let dec = svd(m.clone(), false, true);
    let (idx, s) = dec
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
    let vt = dec.v_t.expect("requested right singular vectors");
    // Rows of V^H are conjugated right singular vectors.
    let mut x: DVector<C64> = vt.row(idx).transpose().map(|z| z.conj());
    if m.nrows() < n {
        return (s, x);
    }
    let r = m.qr().r();
    let rh = r.adjoint();
    for _ in 0..8 {
        let Some(y) = rh.solve_lower_triangular(&x) else { break };
        let Some(z) = r.solve_upper_triangular(&y) else { break };
        let nz = z.norm();
        if !(nz.is_finite() && nz > 0.0) {
            break;
        }
        let z = z / C64::new(nz, 0.0);
        let overlap = x.dotc(&z).norm();
        x = z;
        if overlap >= 1.0 - 1e-15 {
            break;
        }
    }
    ((&r * &x).norm(), x)
}

/// Smallest singular value of `A χ_S`.
pub(crate) fn sigma_min(op: &BandOperator, pieces: &[Interval]) -> f64 {
    smallest_singular(section_matrix(op, pieces)).0
}

/// Smallest singular value with its right singular vector (unit 2-norm, scalar-expanded).
pub(crate) fn sigma_min_witness(op: &BandOperator, pieces: &[Interval]) -> (f64, Vec<C64>) {
    let (s, x) = smallest_singular(section_matrix(op, pieces));
    (s, x.iter().cloned().collect())
}
