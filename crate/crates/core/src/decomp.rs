//! Splitting an algebra into orthogonal Brownian and Lévy components.

use serde::Serialize;

use crate::algebra::{Element, ItoAlgebra};
use crate::error::{Error, Result};
use crate::gns::FundamentalRep;
use crate::linalg::{self, czero, CMatrix};
use crate::report::{Check, Report};
use crate::C64;

/// Support projector `P`, its complement `E = I - P`, and the two component
/// bases (each in reduced row-echelon form and containing the death).
#[derive(Clone, Debug, Serialize)]
pub struct Decomposition {
    #[serde(skip)]
    pub projector: CMatrix,
    #[serde(skip)]
    pub complement: CMatrix,
    pub brownian: Vec<Element>,
    pub levy: Vec<Element>,
    pub report: Report,
}

impl Decomposition {
    pub fn brownian_algebra(&self, alg: &ItoAlgebra) -> Result<ItoAlgebra> {
        alg.subalgebra(format!("{}_brownian", alg.name()), &self.brownian)
    }

    pub fn levy_algebra(&self, alg: &ItoAlgebra) -> Result<ItoAlgebra> {
        alg.subalgebra(format!("{}_levy", alg.name()), &self.levy)
    }

    pub fn is_purely_brownian(&self) -> bool {
        self.levy.len() == 1
    }

    pub fn is_purely_levy(&self) -> bool {
        self.brownian.len() == 1
    }
}

/// Orthogonal projector onto the common kernel of every `i(a_j)` and `i(a_j)†`.
pub fn support_projector(rep: &FundamentalRep) -> CMatrix {
    let d = rep.hdim();
    let n = rep.dim();
    if d == 0 {
        return CMatrix::zeros(0, 0);
    }
    let mut stacked = CMatrix::zeros(2 * n * d, d);
    for j in 0..n {
        let i = rep.quadruple(j).3;
        stacked.view_mut((2 * j * d, 0), (d, d)).copy_from(i);
        stacked.view_mut(((2 * j + 1) * d, 0), (d, d)).copy_from(&i.adjoint());
    }
    let ns = linalg::null_space(&stacked, rep.tol(), rep.tol());
    &ns * ns.adjoint()
}

/// `(l, k, k†, vec i)` of an element, stacked into one column.
fn components(l: C64, k: &[C64], kdag: &[C64], i: &CMatrix) -> Vec<C64> {
    let mut v = Vec::with_capacity(1 + 2 * k.len() + i.len());
    v.push(l);
    v.extend_from_slice(k);
    v.extend_from_slice(kdag);
    v.extend(i.iter().cloned());
    v
}

fn mat_vec(m: &CMatrix, v: &[C64]) -> Vec<C64> {
    (m * CMatrix::from_column_slice(v.len(), 1, v)).iter().cloned().collect()
}

fn row_mat(v: &[C64], m: &CMatrix) -> Vec<C64> {
    (CMatrix::from_row_slice(1, v.len(), v) * m).iter().cloned().collect()
}

struct Splitter<'a> {
    alg: &'a ItoAlgebra,
    rep: &'a FundamentalRep,
    p: CMatrix,
    e: CMatrix,
    phi: CMatrix,
    worst: f64,
}

impl Splitter<'_> {
    fn solve(&mut self, target: &[C64]) -> Element {
        let rhs = CMatrix::from_column_slice(target.len(), 1, target);
        let (x, res) = linalg::least_squares(&self.phi, &rhs, self.alg.tol());
        self.worst = self.worst.max(res / linalg::max_abs_slice(target).max(1.0));
        Element::new(x.iter().map(|z| linalg::snap(*z)).collect())
    }

    /// Preimages of `π(x)` and `ε(x)` for `x = a - l(a) d_t`.
    fn split(&mut self, a: &Element) -> (Element, Element) {
        let x = self.alg.zero_mean(a).expect("same algebra");
        let k = self.rep.k_of(&x);
        let kdag = self.rep.kdag_of(&x);
        let i = self.rep.i_of(&x);
        let d = self.rep.hdim();
        let pi = components(czero(), &mat_vec(&self.p, &k), &row_mat(&kdag, &self.p), &CMatrix::zeros(d, d));
        let eps = components(czero(), &mat_vec(&self.e, &k), &row_mat(&kdag, &self.e), &i);
        (self.solve(&pi), self.solve(&eps))
    }
}

fn canonical_span(alg: &ItoAlgebra, extra: &[Element]) -> Vec<Element> {
    let mut rows = vec![alg.death().into_coeffs()];
    rows.extend(extra.iter().map(|e| e.coeffs().to_vec()));
    linalg::rref(&rows, alg.dim(), alg.tol())
        .into_iter()
        .map(Element::new)
        .collect()
}

fn span_rank(alg: &ItoAlgebra, vectors: &[Vec<C64>], n: usize) -> usize {
    linalg::rank(&linalg::columns(vectors, n), alg.tol(), alg.tol())
}

/// Decomposes a faithful algebra into Brownian and Lévy parts and verifies
/// the defining properties of the split.
pub fn decompose(alg: &ItoAlgebra) -> Result<Decomposition> {
    let rep = FundamentalRep::build(alg)?;
    let n = alg.dim();
    let d = rep.hdim();
    let tol = alg.tol();
    let p = support_projector(&rep);
    let e = CMatrix::identity(d, d) - &p;
    let mut phi = CMatrix::zeros(1 + 2 * d + d * d, n);
    for j in 0..n {
        let (l, k, kdag, i) = rep.quadruple(j);
        for (r, z) in components(l, k, kdag, i).into_iter().enumerate() {
            phi[(r, j)] = z;
        }
    }
    let mut sp = Splitter {
        alg,
        rep: &rep,
        p: p.clone(),
        e: e.clone(),
        phi,
        worst: 0.0,
    };
    let basis: Vec<Element> = (0..n).map(|j| alg.basis_element(j)).collect();
    let (ys, zs): (Vec<Element>, Vec<Element>) = basis.iter().map(|a| sp.split(a)).unzip();
    if sp.worst > tol {
        return Err(Error::PreimageResidual { residual: sp.worst });
    }
    let brownian = canonical_span(alg, &ys);
    let levy = canonical_span(alg, &zs);

    let mut report = Report::default();
    let mul = |a: &Element, b: &Element| alg.multiply(a, b).expect("same algebra");
    let star = |a: &Element| alg.star(a).expect("same algebra");
    let state = |a: &Element| alg.state_of(a).expect("same algebra");
    let mod_death = |a: &Element| alg.zero_mean(a).expect("same algebra").max_abs();

    if d > 0 {
        report.push(Check::within("projector_idempotent", linalg::max_abs(&(&p * &p - &p)), tol));
        report.push(Check::within("projector_hermitian", linalg::max_abs(&(&p - p.adjoint())), tol));
    } else {
        report.push(Check::within("projector_idempotent", 0.0, tol));
        report.push(Check::within("projector_hermitian", 0.0, tol));
    }
    report.push(Check::within("projector_kills_i", 0.0, tol));
    for j in 0..n {
        let i = rep.quadruple(j).3;
        if d > 0 {
            let res = linalg::max_abs(&(i * &p)).max(linalg::max_abs(&(&p * i)));
            report.accumulate("projector_kills_i", res / linalg::max_abs(i).max(1.0), tol);
        }
    }

    report.push(Check::within("brownian_in_support", 0.0, tol));
    for y in &brownian {
        let x = alg.zero_mean(y).expect("same algebra");
        let i = linalg::max_abs(&rep.i_of(&x));
        let k_off = linalg::max_abs_slice(&mat_vec(&e, &rep.k_of(&x)));
        let kd_off = linalg::max_abs_slice(&row_mat(&rep.kdag_of(&x), &e));
        report.accumulate("brownian_in_support", i.max(k_off).max(kd_off), tol);
    }

    let mut cross: f64 = 0.0;
    let mut orth_plus: f64 = 0.0;
    let mut orth_minus: f64 = 0.0;
    for y in &brownian {
        for z in &levy {
            cross = cross.max(mul(y, z).max_abs()).max(mul(z, y).max_abs());
            // Only zero-mean parts pair: the shared death is excluded.
            let (y0, z0) = (alg.zero_mean(y).unwrap(), alg.zero_mean(z).unwrap());
            orth_plus = orth_plus.max(state(&mul(&star(&y0), &z0)).norm());
            orth_minus = orth_minus.max(state(&mul(&z0, &star(&y0))).norm());
        }
    }
    report.push(Check::within("cross_products_vanish", cross, tol));
    report.push(Check::within("orthogonal_plus", orth_plus, tol));
    report.push(Check::within("orthogonal_minus", orth_minus, tol));

    let rows: Vec<Vec<C64>> = brownian.iter().chain(&levy).map(|v| v.coeffs().to_vec()).collect();
    let meet = brownian.len() + levy.len() - span_rank(alg, &rows, n);
    report.push(Check::flag("intersection_is_death", meet == 1));

    let mut nil: f64 = 0.0;
    for y in &brownian {
        for y2 in &brownian {
            nil = nil.max(mod_death(&mul(y, y2)));
        }
    }
    report.push(Check::within("brownian_nilpotent", nil, tol));

    let levy_ok = {
        // Orthonormal basis of the range of E.
        let range_e = if d == 0 { CMatrix::zeros(0, 0) } else { range_basis(&e, tol) };
        let r = range_e.ncols();
        if r == 0 {
            true
        } else {
            let mut stacked = CMatrix::zeros(0, r);
            for z in &levy {
                let i = rep.i_of(z);
                for m in [&i * &range_e, i.adjoint() * &range_e] {
                    let rows = stacked.nrows();
                    stacked = stacked.resize_vertically(rows + d, czero());
                    stacked.view_mut((rows, 0), (d, r)).copy_from(&m);
                }
            }
            linalg::rank(&stacked, tol, tol) == r
        }
    };
    report.push(Check::flag("levy_nondegenerate", levy_ok));

    let mut recon: f64 = 0.0;
    for (j, a) in basis.iter().enumerate() {
        let sum = &(&alg.death().scale(state(a)) + &ys[j]) + &zs[j];
        recon = recon.max((a - &sum).max_abs());
    }
    report.push(Check::within("reconstruction", recon, tol));

    let mut pi_prod: f64 = 0.0;
    let mut pi_hom: f64 = 0.0;
    let mut eps_hom: f64 = 0.0;
    let mut star_hom: f64 = 0.0;
    for a in 0..n {
        let (ya, za) = (&ys[a], &zs[a]);
        let xa = alg.zero_mean(&basis[a]).unwrap();
        let (ysa, zsa) = sp.split(&star(&xa));
        star_hom = star_hom.max((&ysa - &star(ya)).max_abs()).max((&zsa - &star(za)).max_abs());
        for b in 0..n {
            let xb = alg.zero_mean(&basis[b]).unwrap();
            let (yp, zp) = sp.split(&mul(&xa, &xb));
            pi_prod = pi_prod.max(yp.max_abs());
            pi_hom = pi_hom.max(mod_death(&(&mul(ya, &ys[b]) - &yp)));
            eps_hom = eps_hom.max(mod_death(&(&mul(za, &zs[b]) - &zp)));
        }
    }
    report.push(Check::within("pi_kills_products", pi_prod, tol));
    report.push(Check::within("pi_homomorphism", pi_hom, tol));
    report.push(Check::within("epsilon_homomorphism", eps_hom, tol));
    report.push(Check::within("star_preserved", star_hom, tol));

    let hd = d.max(1);
    let mut products: Vec<Vec<C64>> = Vec::new();
    for a in 0..n {
        for b in 0..n {
            let v = rep.k_of(&mul(&basis[a], &basis[b]));
            products.push(if d == 0 { vec![czero()] } else { v });
        }
    }
    let levy_k: Vec<Vec<C64>> = levy
        .iter()
        .map(|z| if d == 0 { vec![czero()] } else { rep.k_of(z) })
        .collect();
    let both: Vec<Vec<C64>> = products.iter().chain(&levy_k).cloned().collect();
    let rp = span_rank(alg, &products, hd);
    let rl = span_rank(alg, &levy_k, hd);
    let rb = span_rank(alg, &both, hd);
    report.push(Check::flag("products_dense_in_levy", rp == rl && rl == rb));

    Ok(Decomposition {
        projector: p,
        complement: e,
        brownian,
        levy,
        report,
    })
}

fn range_basis(m: &CMatrix, tol: f64) -> CMatrix {
    let (values, vectors) = linalg::hermitian_eigen(m);
    let lmax = values.first().copied().unwrap_or(0.0);
    let keep: Vec<usize> = (0..values.len()).filter(|&r| values[r] > tol * lmax.max(1.0)).collect();
    vectors.select_columns(&keep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins;

    fn unit(n: usize, i: usize) -> Element {
        Element::basis(n, i)
    }

    #[test]
    fn wiener_plus_poisson_splits_into_summands() {
        let s = builtins::orthogonal_sum(&builtins::wiener(), &builtins::poisson()).unwrap();
        let dec = decompose(&s).unwrap();
        assert!(dec.report.passed(), "{}", dec.report);
        assert_eq!(dec.brownian, vec![unit(3, 0), unit(3, 1)]);
        assert_eq!(dec.levy, vec![unit(3, 0), unit(3, 2)]);
        let p = &dec.projector;
        assert_eq!(p.shape(), (2, 2));
        assert!((p.trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn support_projector_examples() {
        let w = FundamentalRep::build(&builtins::wiener()).unwrap();
        assert!((support_projector(&w)[(0, 0)].re - 1.0).abs() < 1e-12);
        let h = FundamentalRep::build(&builtins::hp(1).unwrap()).unwrap();
        assert!(linalg::max_abs(&support_projector(&h)) < 1e-12);
    }

    #[test]
    fn pure_cases() {
        let h = builtins::hp(1).unwrap();
        let dec = decompose(&h).unwrap();
        assert!(dec.report.passed(), "{}", dec.report);
        assert!(dec.is_purely_levy());
        assert_eq!(dec.levy.len(), 4);

        let tb = builtins::thermal_brownian(2.0, 0.5).unwrap();
        let dec = decompose(&tb).unwrap();
        assert!(dec.report.passed(), "{}", dec.report);
        assert!(dec.is_purely_brownian());
        assert_eq!(dec.brownian.len(), 3);

        let tm = builtins::thermal_matrix(2, &[2.0 / 3.0, 1.0 / 3.0]).unwrap();
        let dec = decompose(&tm).unwrap();
        assert!(dec.report.passed(), "{}", dec.report);
        assert!(dec.is_purely_levy());
    }

    #[test]
    fn vacuum_subalgebra_is_brownian() {
        let h = builtins::hp(1).unwrap();
        let vac = h
            .subalgebra("vac", &[h.death(), h.element("em").unwrap(), h.element("ep").unwrap()])
            .unwrap();
        let dec = decompose(&vac).unwrap();
        assert!(dec.report.passed(), "{}", dec.report);
        assert!(dec.is_purely_brownian());
    }

    #[test]
    fn components_are_idempotent() {
        let s = builtins::orthogonal_sum(&builtins::wiener(), &builtins::poisson()).unwrap();
        let dec = decompose(&s).unwrap();
        let b = dec.brownian_algebra(&s).unwrap();
        let again = decompose(&b).unwrap();
        assert_eq!(again.brownian.len(), b.dim());
        assert!(again.is_purely_brownian());
        let c = dec.levy_algebra(&s).unwrap();
        let again = decompose(&c).unwrap();
        assert_eq!(again.levy.len(), c.dim());
        assert!(again.is_purely_levy());
    }

    #[test]
    fn non_faithful_input_is_rejected() {
        let z = builtins::zero_intensity_poisson();
        assert!(matches!(decompose(&z), Err(Error::NotFaithful { .. })));
    }

    #[test]
    fn catalog_decompositions_verify() {
        for alg in builtins::catalog() {
            if alg.name() == "zero_intensity_poisson" {
                continue;
            }
            let dec = decompose(&alg).unwrap();
            assert!(dec.report.passed(), "{}:\n{}", alg.name(), dec.report);
        }
    }
}
