//! Kolmogorov/GNS factorization: the canonical quadruple `(l, k, k†, i)`,
//! the triangular Minkowski representation and the four seminorms.

use serde::Serialize;

use crate::algebra::{Element, ItoAlgebra};
use crate::error::{Error, Result};
use crate::ideal;
use crate::linalg::{self, cone, czero, CMatrix};
use crate::report::{Check, Report};
use crate::C64;

/// `(2 + d•) × (2 + d•)` matrix `[[0, k†, l], [0, i, k], [0, 0, 0]]`, rows and
/// columns ordered `(-, •, +)`.
pub type TriangularMatrix = CMatrix;

/// The canonical quadruple for every basis element.
#[derive(Clone, Debug)]
pub struct FundamentalRep {
    hdim: usize,
    labels: Vec<String>,
    l: Vec<C64>,
    k: Vec<Vec<C64>>,
    kdag: Vec<Vec<C64>>,
    i: Vec<CMatrix>,
    eigenvalues: Vec<f64>,
    /// Kept Gram eigenvectors as columns (`n × d•`).
    eigenvectors: CMatrix,
    tol: f64,
}

/// `(‖a‖, ‖a‖₊, ‖a‖⁻, ‖a‖₊⁻)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Seminorms {
    pub norm: f64,
    pub plus: f64,
    pub minus: f64,
    pub plus_minus: f64,
}

impl FundamentalRep {
    /// Factors the Gram matrix and solves the covariance relation for `i`.
    pub fn build(alg: &ItoAlgebra) -> Result<Self> {
        let ideal = ideal::faithfulness_ideal(alg);
        if !ideal.is_empty() {
            return Err(Error::NotFaithful {
                ideal_dim: ideal.len(),
            });
        }
        let n = alg.dim();
        let tol = alg.tol();
        let (values, vectors) = linalg::hermitian_eigen(&alg.gram());
        let lmax = values.first().copied().unwrap_or(0.0);
        let kept: Vec<usize> = if lmax <= tol {
            Vec::new()
        } else {
            (0..n).filter(|&r| values[r] > tol * lmax).collect()
        };
        let hdim = kept.len();
        let kept_values: Vec<f64> = kept.iter().map(|&r| values[r]).collect();
        let u = canonical_eigenbasis(&kept_values, &vectors.select_columns(&kept), lmax);

        // K = Λ^{1/2} U†, column j is k(a_j); K⁺ = U Λ^{-1/2}.
        let kmat = CMatrix::from_fn(hdim, n, |r, j| u[(j, r)].conj() * kept_values[r].sqrt());
        let kplus = CMatrix::from_fn(n, hdim, |j, r| u[(j, r)] / kept_values[r].sqrt());
        let k: Vec<Vec<C64>> = (0..n).map(|j| kmat.column(j).iter().cloned().collect()).collect();
        let kdag: Vec<Vec<C64>> = (0..n)
            .map(|j| {
                (0..hdim)
                    .map(|r| (0..n).map(|m| alg.s(j, m) * k[m][r]).sum::<C64>().conj())
                    .collect()
            })
            .collect();
        let mut i = Vec::with_capacity(n);
        let mut worst: f64 = 0.0;
        for j in 0..n {
            let km = &kmat * alg.left_mult(j);
            let ij = &km * &kplus;
            let res = linalg::max_abs(&(&ij * &kmat - &km));
            worst = worst.max(res / linalg::max_abs(&km).max(1.0));
            i.push(ij);
        }
        if worst > tol {
            return Err(Error::CovarianceResidual { residual: worst });
        }
        Ok(Self {
            hdim,
            labels: alg.labels().to_vec(),
            l: alg.state().to_vec(),
            k,
            kdag,
            i,
            eigenvalues: kept_values,
            eigenvectors: u,
            tol,
        })
    }

    /// Dimension `d•` of the Hilbert space.
    pub fn hdim(&self) -> usize {
        self.hdim
    }

    /// Dimension of the underlying algebra.
    pub fn dim(&self) -> usize {
        self.l.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    /// Basis quadruple `(l_j, k_j, k†_j, i_j)`.
    pub fn quadruple(&self, j: usize) -> (C64, &[C64], &[C64], &CMatrix) {
        (self.l[j], &self.k[j], &self.kdag[j], &self.i[j])
    }

    pub fn l_of(&self, a: &Element) -> C64 {
        a.coeffs().iter().zip(&self.l).map(|(x, l)| x * l).sum()
    }

    pub fn k_of(&self, a: &Element) -> Vec<C64> {
        self.combine(a, &self.k)
    }

    pub fn kdag_of(&self, a: &Element) -> Vec<C64> {
        self.combine(a, &self.kdag)
    }

    pub fn i_of(&self, a: &Element) -> CMatrix {
        let mut out = CMatrix::zeros(self.hdim, self.hdim);
        for (x, m) in a.coeffs().iter().zip(&self.i) {
            if *x != czero() {
                out += m * *x;
            }
        }
        out
    }

    fn combine(&self, a: &Element, parts: &[Vec<C64>]) -> Vec<C64> {
        let mut out = vec![czero(); self.hdim];
        for (x, v) in a.coeffs().iter().zip(parts) {
            for (o, z) in out.iter_mut().zip(v) {
                *o += x * z;
            }
        }
        out
    }

    pub fn triangular(&self, a: &Element) -> TriangularMatrix {
        let d = self.hdim;
        let mut m = CMatrix::zeros(d + 2, d + 2);
        m[(0, d + 1)] = self.l_of(a);
        for (r, z) in self.kdag_of(a).into_iter().enumerate() {
            m[(0, 1 + r)] = z;
        }
        for (r, z) in self.k_of(a).into_iter().enumerate() {
            m[(1 + r, d + 1)] = z;
        }
        m.view_mut((1, 1), (d, d)).copy_from(&self.i_of(a));
        m
    }

    pub fn seminorms(&self, a: &Element) -> Seminorms {
        let i = self.i_of(a);
        Seminorms {
            norm: linalg::op_norm(&i),
            plus: vec_norm(&self.k_of(a)),
            minus: vec_norm(&self.kdag_of(a)),
            plus_minus: self.l_of(a).norm(),
        }
    }

    /// Kolmogorov, covariance, adjointness and death identities over all
    /// basis pairs.
    pub fn verify_identities(&self, alg: &ItoAlgebra) -> Report {
        let n = alg.dim();
        let tol = self.tol;
        let mut report = Report::default();
        for a in 0..n {
            let ea = alg.basis_element(a);
            let astar = alg.star(&ea).expect("same algebra");
            for b in 0..n {
                let eb = alg.basis_element(b);
                let ab = alg.multiply(&ea, &eb).expect("same algebra");
                let lhs = self.l_of(&ab);
                let rhs: C64 = self.kdag[a].iter().zip(&self.k[b]).map(|(x, y)| x * y).sum();
                report.accumulate("kolmogorov", (lhs - rhs).norm() / lhs.norm().max(1.0), tol);
                let kab = self.k_of(&ab);
                let ik = &self.i[a] * CMatrix::from_column_slice(self.hdim, 1, &self.k[b]);
                let res = kab
                    .iter()
                    .zip(ik.iter())
                    .map(|(x, y)| (x - y).norm())
                    .fold(0.0, f64::max);
                report.accumulate("covariance", res / linalg::max_abs_slice(&kab).max(1.0), tol);
            }
            let kstar = self.k_of(&astar);
            let res = kstar
                .iter()
                .zip(&self.kdag[a])
                .map(|(x, y)| (x.conj() - y).norm())
                .fold(0.0, f64::max);
            report.accumulate("kdag_adjoint", res, tol);
            let istar = self.i_of(&astar);
            report.accumulate(
                "i_star_adjoint",
                linalg::max_abs(&(istar - self.i[a].adjoint())),
                tol,
            );
        }
        let d = alg.death();
        let trivial = vec_norm(&self.k_of(&d))
            .max(vec_norm(&self.kdag_of(&d)))
            .max(linalg::max_abs(&self.i_of(&d)))
            .max((self.l_of(&d) - cone()).norm());
        report.push(Check::within("death_trivial", trivial, tol));
        report
    }

    /// Star symmetries, submultiplicativity and the B*-equalities on the
    /// given sample elements (pairs are formed cyclically).
    pub fn verify_bstar(&self, alg: &ItoAlgebra, samples: &[Element], tol: f64) -> Report {
        let mut report = Report::default();
        for name in [
            "star_norm",
            "star_plus_minus",
            "star_state",
            "submult_norm",
            "submult_plus",
            "submult_minus",
            "submult_state",
            "bstar_norm",
            "bstar_state",
        ] {
            report.push(Check::within(name, 0.0, tol));
        }
        let rel = |x: f64, y: f64| (x - y).abs() / x.abs().max(y.abs()).max(1.0);
        let excess = |lhs: f64, rhs: f64| (lhs - rhs).max(0.0) / rhs.abs().max(1.0);
        for (s, a) in samples.iter().enumerate() {
            let c = &samples[(s + 1) % samples.len()];
            let astar = alg.star(a).expect("same algebra");
            let na = self.seminorms(a);
            let nas = self.seminorms(&astar);
            let nc = self.seminorms(c);
            report.accumulate("star_norm", rel(nas.norm, na.norm), tol);
            report.accumulate("star_plus_minus", rel(nas.plus, na.minus), tol);
            report.accumulate("star_state", rel(nas.plus_minus, na.plus_minus), tol);

            let nac = self.seminorms(&alg.multiply(a, c).expect("same algebra"));
            report.accumulate("submult_norm", excess(nac.norm, na.norm * nc.norm), tol);
            report.accumulate("submult_plus", excess(nac.plus, na.norm * nc.plus), tol);
            report.accumulate("submult_minus", excess(nac.minus, na.minus * nc.norm), tol);
            report.accumulate("submult_state", excess(nac.plus_minus, na.minus * nc.plus), tol);

            let naa = self.seminorms(&alg.multiply(a, &astar).expect("same algebra"));
            report.accumulate("bstar_norm", rel(naa.norm, na.norm * nas.norm), tol);
            report.accumulate("bstar_state", rel(naa.plus_minus, na.minus * nas.plus), tol);
        }
        report
    }
}

fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Minkowski metric `G`: ones on the two corners, identity on the middle block.
pub fn metric(hdim: usize) -> CMatrix {
    let n = hdim + 2;
    let mut g = CMatrix::zeros(n, n);
    g[(0, n - 1)] = cone();
    g[(n - 1, 0)] = cone();
    for r in 1..=hdim {
        g[(r, r)] = cone();
    }
    g
}

/// `G M† G`.
pub fn minkowski_adjoint(m: &CMatrix) -> CMatrix {
    let g = metric(m.nrows().saturating_sub(2));
    &g * m.adjoint() * &g
}

/// Pins an orthonormal eigenbasis: inside each cluster of equal eigenvalues
/// the algebra basis vectors are projected and orthonormalized in index
/// order; every column is then rotated so that its largest component is real
/// and positive.
fn canonical_eigenbasis(values: &[f64], vectors: &CMatrix, lmax: f64) -> CMatrix {
    let (n, d) = vectors.shape();
    let mut out = CMatrix::zeros(n, d);
    let cluster_tol = 1e-8 * lmax.max(f64::MIN_POSITIVE);
    let mut start = 0;
    while start < d {
        let mut end = start + 1;
        while end < d && (values[start] - values[end]).abs() <= cluster_tol {
            end += 1;
        }
        let block = vectors.columns(start, end - start).into_owned();
        let proj = &block * block.adjoint();
        let mut accepted: Vec<nalgebra::DVector<C64>> = Vec::new();
        for e in 0..n {
            if accepted.len() == end - start {
                break;
            }
            let mut v: nalgebra::DVector<C64> = proj.column(e).into_owned();
            for q in &accepted {
                let overlap = q.dotc(&v);
                v -= q * overlap;
            }
            let norm = v.norm();
            if norm > 1e-6 {
                accepted.push(v / C64::new(norm, 0.0));
            }
        }
        for (off, v) in accepted.into_iter().enumerate() {
            out.set_column(start + off, &fix_phase(v));
        }
        start = end;
    }
    out
}

fn fix_phase(v: nalgebra::DVector<C64>) -> nalgebra::DVector<C64> {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let pivot = v
        .iter()
        .position(|z| z.norm() >= max * (1.0 - 1e-9))
        .unwrap_or(0);
    let z = v[pivot];
    if z.norm() == 0.0 {
        return v;
    }
    let phase = z.conj() / z.norm();
    let mut w = v * phase;
    w[pivot] = C64::new(w[pivot].norm(), 0.0);
    w
}
