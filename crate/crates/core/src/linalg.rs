//! Small dense complex linear-algebra helpers on top of nalgebra.
//!
//! Every rank decision goes through a singular-value (or eigenvalue)
//! threshold relative to the largest one, so the tolerance policy lives here.

use nalgebra::DMatrix;

use crate::C64;

pub type CMatrix = DMatrix<C64>;

pub(crate) fn czero() -> C64 {
    C64::new(0.0, 0.0)
}

pub(crate) fn cone() -> C64 {
    C64::new(1.0, 0.0)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_slice(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest singular value; zero for empty matrices.
pub fn op_norm(m: &CMatrix) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

/// Eigen-decomposition of the Hermitian part of `h`, eigenvalues descending.
pub fn hermitian_eigen(h: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = h.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let herm = (h + h.adjoint()) * C64::new(0.5, 0.0);
    let eig = herm.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

struct Svd {
    u: CMatrix,
    s: Vec<f64>,
    v: CMatrix,
}

/// Full right-singular basis even for wide inputs (zero-padded to square).
fn svd_full(m: &CMatrix) -> Svd {
    let (r, c) = m.shape();
    let padded = if r < c {
        let mut p = CMatrix::zeros(c, c);
        p.view_mut((0, 0), (r, c)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(true, true);
    let u = svd.u.expect("u requested");
    let v = svd.v_t.expect("v_t requested").adjoint();
    Svd {
        u: u.rows(0, r).into_owned(),
        s: svd.singular_values.iter().cloned().collect(),
        v,
    }
}

fn threshold(s: &[f64], rel_tol: f64) -> f64 {
    let smax = s.iter().cloned().fold(0.0, f64::max);
    rel_tol * smax.max(f64::MIN_POSITIVE)
}

/// Orthonormal basis (as columns) of the numerical kernel of `m`.
///
/// Singular values `<= rel_tol * sigma_max` count as zero. A matrix whose
/// entries are all below `abs_floor` is treated as exactly zero.
pub fn null_space(m: &CMatrix, rel_tol: f64, abs_floor: f64) -> CMatrix {
    let c = m.ncols();
    if c == 0 {
        return CMatrix::zeros(0, 0);
    }
    if m.nrows() == 0 || max_abs(m) <= abs_floor {
        return CMatrix::identity(c, c);
    }
    let svd = svd_full(m);
    let thr = threshold(&svd.s, rel_tol);
    let cols: Vec<usize> = (0..svd.s.len()).filter(|&i| svd.s[i] <= thr).collect();
    let mut out = CMatrix::zeros(c, cols.len());
    for (j, &i) in cols.iter().enumerate() {
        out.set_column(j, &svd.v.column(i));
    }
    out
}

pub fn rank(m: &CMatrix, rel_tol: f64, abs_floor: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 || max_abs(m) <= abs_floor {
        return 0;
    }
    let svd = svd_full(m);
    let thr = threshold(&svd.s, rel_tol);
    svd.s.iter().filter(|&&s| s > thr).count()
}

/// Minimum-norm least-squares solution of `a x = b` and the max-abs residual.
pub fn least_squares(a: &CMatrix, b: &CMatrix, rel_tol: f64) -> (CMatrix, f64) {
    let (r, c) = a.shape();
    if r == 0 || c == 0 || max_abs(a) == 0.0 {
        let x = CMatrix::zeros(c, b.ncols());
        return (x, max_abs(b));
    }
    let svd = svd_full(a);
    let thr = threshold(&svd.s, rel_tol);
    let k = svd.s.len().min(svd.u.ncols()).min(svd.v.ncols());
    let mut x = CMatrix::zeros(c, b.ncols());
    for i in 0..k {
        if svd.s[i] > thr {
            let ui = svd.u.column(i);
            let vi = svd.v.column(i);
            let coef = ui.adjoint() * b / C64::new(svd.s[i], 0.0);
            x += vi * coef;
        }
    }
    let residual = max_abs(&(a * &x - b));
    (x, residual)
}

/// Reduced row-echelon basis of the span of `rows`.
///
/// The result is canonical for a given span (up to the pivot tolerance), which
/// makes it suitable for comparing subspaces coefficient-by-coefficient.
pub fn rref(rows: &[Vec<C64>], n: usize, tol: f64) -> Vec<Vec<C64>> {
    let mut m: Vec<Vec<C64>> = rows.iter().filter(|r| r.len() == n).cloned().collect();
    let scale = m
        .iter()
        .map(|r| max_abs_slice(r))
        .fold(0.0, f64::max)
        .max(1.0);
    let eps = tol * scale;
    let mut pivot_row = 0;
    for col in 0..n {
        if pivot_row >= m.len() {
            break;
        }
        let (best, best_abs) = (pivot_row..m.len())
            .map(|r| (r, m[r][col].norm()))
            .fold((pivot_row, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best_abs <= eps {
            continue;
        }
        m.swap(pivot_row, best);
        let p = m[pivot_row][col];
        for z in m[pivot_row].iter_mut() {
            *z /= p;
        }
        m[pivot_row][col] = cone();
        let prow = m[pivot_row].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r == pivot_row {
                continue;
            }
            let f = row[col];
            if f != czero() {
                for (z, pz) in row.iter_mut().zip(&prow) {
                    *z -= f * pz;
                }
                row[col] = czero();
            }
        }
        pivot_row += 1;
    }
    m.truncate(pivot_row);
    for row in m.iter_mut() {
        for z in row.iter_mut() {
            if z.re.abs() <= eps {
                z.re = 0.0;
            }
            if z.im.abs() <= eps {
                z.im = 0.0;
            }
        }
    }
    m
}

/// Rounds components lying within a few ulps of an integer, so coordinates of
/// exact table entries survive a least-squares solve unchanged.
pub(crate) fn snap(z: C64) -> C64 {
    let fix = |x: f64| {
        let r = x.round();
        if (x - r).abs() <= 64.0 * f64::EPSILON * r.abs().max(1.0) {
            r + 0.0
        } else {
            x
        }
    };
    C64::new(fix(z.re), fix(z.im))
}

/// Columns of `vectors` as an `n x k` matrix.
pub fn columns(vectors: &[Vec<C64>], n: usize) -> CMatrix {
    let mut m = CMatrix::zeros(n, vectors.len());
    for (j, v) in vectors.iter().enumerate() {
        for i in 0..n {
            m[(i, j)] = v[i];
        }
    }
    m
}

/// Least-squares slope of `ln y` against `ln x`; `None` unless every y is
/// above `floor` and there are at least two points.
pub fn loglog_slope(x: &[f64], y: &[f64], floor: f64) -> Option<f64> {
    if x.len() < 2 || x.len() != y.len() || y.iter().any(|&v| !(v > floor)) {
        return None;
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn null_space_of_wide_matrix() {
        let m = CMatrix::from_row_slice(1, 3, &[c(1.0), c(1.0), c(0.0)]);
        let ns = null_space(&m, 1e-12, 0.0);
        assert_eq!(ns.ncols(), 2);
        assert!(max_abs(&(&m * &ns)) < 1e-12);
    }

    #[test]
    fn rref_is_canonical() {
        let a = rref(&[vec![c(2.0), c(4.0)], vec![c(1.0), c(3.0)]], 2, 1e-12);
        assert_eq!(a, vec![vec![c(1.0), c(0.0)], vec![c(0.0), c(1.0)]]);
        let b = rref(&[vec![c(0.0), c(3.0), c(0.0)], vec![c(2.0), c(1.0), c(0.0)]], 3, 1e-12);
        assert_eq!(b[0], vec![c(1.0), c(0.0), c(0.0)]);
        assert_eq!(b[1], vec![c(0.0), c(1.0), c(0.0)]);
    }

    #[test]
    fn least_squares_recovers_solution() {
        let a = CMatrix::from_row_slice(3, 2, &[c(1.0), c(0.0), c(0.0), c(1.0), c(1.0), c(1.0)]);
        let x0 = CMatrix::from_row_slice(2, 1, &[c(2.0), C64::new(0.0, -1.0)]);
        let (x, res) = least_squares(&a, &(&a * &x0), 1e-12);
        assert!(res < 1e-12);
        assert!(max_abs(&(x - x0)) < 1e-12);
    }

    #[test]
    fn slope_of_power_law() {
        let x = [0.1, 0.01, 0.001];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(1.5)).collect();
        assert!((loglog_slope(&x, &y, 0.0).unwrap() - 1.5).abs() < 1e-12);
        assert_eq!(loglog_slope(&x, &[0.0, 1.0, 1.0], 0.0), None);
    }
}
