//! Maximum-likelihood detectors.

use super::constellation::Constellation;
use super::stbc::qostbc_equivalent_channel;
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector};
use crate::Complex64;

pub const SEARCH_LIMIT: u128 = 1_000_000;

fn check_search_space(size: usize, n_symbols: usize) -> Result<()> {
    let total = (size as u128).checked_pow(n_symbols as u32).unwrap_or(u128::MAX);
    if total > SEARCH_LIMIT {
        return Err(Error::SearchSpace { size: total, limit: SEARCH_LIMIT });
    }
    Ok(())
}

/// Visits every label tuple in lexicographic order and returns the one with
/// the smallest cost (first one on ties).
fn argmin_tuples<F: FnMut(&[usize]) -> f64>(size: usize, n: usize, mut cost: F) -> Vec<usize> {
    let mut cur = vec![0usize; n];
    let mut best = cur.clone();
    let mut best_c = f64::INFINITY;
    loop {
        let c = cost(&cur);
        if c < best_c {
            best_c = c;
            best.copy_from_slice(&cur);
        }
        let mut k = n;
        loop {
            if k == 0 {
                return best;
            }
            k -= 1;
            cur[k] += 1;
            if cur[k] < size {
                break;
            }
            cur[k] = 0;
        }
    }
}

/// Exhaustive ML for `y = H s + n`: the label tuple minimizing `‖y − Hs‖`.
pub fn ml_detect_exhaustive(
    y: &CVector,
    h: &CMatrix,
    constellation: &Constellation,
    n_symbols: usize,
) -> Result<Vec<usize>> {
    if h.ncols() != n_symbols {
        return Err(Error::DimensionMismatch { expected: n_symbols, got: h.ncols() });
    }
    if h.nrows() != y.len() {
        return Err(Error::DimensionMismatch { expected: h.nrows(), got: y.len() });
    }
    check_search_space(constellation.size(), n_symbols)?;
    let pts = constellation.points();
    let mut s = CVector::zeros(n_symbols);
    Ok(argmin_tuples(constellation.size(), n_symbols, |t| {
        for (k, &l) in t.iter().enumerate() {
            s[k] = pts[l];
        }
        (y - h * &s).norm_squared()
    }))
}

fn qostbc_unknowns_of(pts: &[Complex64], t: &[usize]) -> CVector {
    CVector::from_column_slice(&[pts[t[0]], pts[t[3]], pts[t[1]].conj(), pts[t[2]].conj()])
}

/// Full `|C|⁴` search over the QOSTBC block.
pub fn qostbc_detect_full(
    y_tilde: &CVector,
    a: [Complex64; 4],
    constellation: &Constellation,
) -> Result<Vec<usize>> {
    check_search_space(constellation.size(), 4)?;
    let h = qostbc_equivalent_channel(a);
    let pts = constellation.points();
    Ok(argmin_tuples(constellation.size(), 4, |t| (y_tilde - &h * qostbc_unknowns_of(pts, t)).norm_squared()))
}

/// ML over `{s1, s4}` and `{s2, s3}` separately.
///
/// The equivalent channel's Gram matrix has no coupling between the two
/// pairs, so the ML metric splits into two independent terms.
pub fn qostbc_detect_pairwise(
    y_tilde: &CVector,
    a: [Complex64; 4],
    constellation: &Constellation,
) -> Vec<usize> {
    let h = qostbc_equivalent_channel(a);
    let gram = h.adjoint() * &h;
    let z = h.adjoint() * y_tilde;
    let pts = constellation.points();
    // metric(x) = xᴴGx − 2 Re(xᴴz) restricted to one pair of unknowns
    let pair_metric = |i: usize, j: usize, xi: Complex64, xj: Complex64| {
        let quad = gram[(i, i)].re * xi.norm_sqr()
            + gram[(j, j)].re * xj.norm_sqr()
            + 2.0 * (xi.conj() * gram[(i, j)] * xj).re;
        quad - 2.0 * (xi.conj() * z[i] + xj.conj() * z[j]).re
    };
    let m = constellation.size();
    // unknowns (x0, x1) = (s1, s4)
    let p14 = argmin_tuples(m, 2, |t| pair_metric(0, 1, pts[t[0]], pts[t[1]]));
    // unknowns (x2, x3) = (s2*, s3*)
    let p23 = argmin_tuples(m, 2, |t| pair_metric(2, 3, pts[t[0]].conj(), pts[t[1]].conj()));
    vec![p14[0], p23[0], p23[1], p14[1]]
}
