//! Finite-dimensional Itô *-algebras given by structure constants.
//!
//! An algebra is stored as its basis data: the product tensor
//! `a_i · a_j = Σ_k c[i][j][k] a_k`, the star matrix `a_i* = Σ_k S[i][k] a_k`,
//! a death vector `d_t` and the state values `l(a_i)`. Elements are plain
//! coefficient vectors in that basis.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, czero, CMatrix};
use crate::report::{Check, Report};
use crate::C64;

pub const DEFAULT_TOL: f64 = 1e-9;

/// A member of an algebra, as coefficients over its basis.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Element {
    coeffs: Vec<C64>,
}

impl Element {
    pub fn new(coeffs: Vec<C64>) -> Self {
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn zero(dim: usize) -> Self {
        Self::new(vec![czero(); dim])
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut e = Self::zero(dim);
        e.coeffs[index] = C64::new(1.0, 0.0);
        e
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C64> {
        self.coeffs
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self::new(self.coeffs.iter().map(|z| z * factor).collect())
    }

    pub fn max_abs(&self) -> f64 {
        linalg::max_abs_slice(&self.coeffs)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|z| *z == czero())
    }

    /// Index `i` when this is exactly the basis vector `e_i`.
    pub fn as_basis_index(&self) -> Option<usize> {
        let mut found = None;
        for (i, z) in self.coeffs.iter().enumerate() {
            if *z == C64::new(1.0, 0.0) {
                if found.is_some() {
                    return None;
                }
                found = Some(i);
            } else if *z != czero() {
                return None;
            }
        }
        found
    }

    fn zip_with(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Self {
        assert_eq!(self.dim(), other.dim(), "element dimension mismatch");
        Self::new(
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        )
    }
}

impl Add for &Element {
    type Output = Element;
    fn add(self, rhs: &Element) -> Element {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &Element {
    type Output = Element;
    fn sub(self, rhs: &Element) -> Element {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Neg for &Element {
    type Output = Element;
    fn neg(self) -> Element {
        self.scale(C64::new(-1.0, 0.0))
    }
}

impl Mul<&Element> for C64 {
    type Output = Element;
    fn mul(self, rhs: &Element) -> Element {
        rhs.scale(self)
    }
}

/// A finite-dimensional Itô *-algebra with state.
#[derive(Clone, Debug, PartialEq)]
pub struct ItoAlgebra {
    name: String,
    labels: Vec<String>,
    /// `mult[(i * n + j) * n + k] = c_{ij}^k`
    mult: Vec<C64>,
    /// `star[i * n + k] = S[i][k]`
    star: Vec<C64>,
    death: Vec<C64>,
    state: Vec<C64>,
    tol: f64,
}

impl ItoAlgebra {
    /// Assembles an algebra from raw tables. Only shapes are validated here;
    /// use [`ItoAlgebra::verify_axioms`] for the algebraic conditions.
    pub fn new(
        name: impl Into<String>,
        labels: Vec<String>,
        mult: Vec<C64>,
        star: Vec<C64>,
        death: Vec<C64>,
        state: Vec<C64>,
    ) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::InvalidParameter("empty basis".into()));
        }
        let expect = |len: usize, want: usize| {
            if len == want {
                Ok(())
            } else {
                Err(Error::DimensionMismatch {
                    expected: want,
                    found: len,
                })
            }
        };
        expect(mult.len(), n * n * n)?;
        expect(star.len(), n * n)?;
        expect(death.len(), n)?;
        expect(state.len(), n)?;
        for (i, a) in labels.iter().enumerate() {
            if labels[..i].contains(a) {
                return Err(Error::InvalidParameter(format!("duplicate label `{a}`")));
            }
        }
        if death.iter().all(|z| *z == czero()) {
            return Err(Error::InvalidParameter("death is the zero vector".into()));
        }
        Ok(Self {
            name: name.into(),
            labels,
            mult,
            star,
            death,
            state,
            tol: DEFAULT_TOL,
        })
    }

    /// Starts a table with zero products, self-adjoint basis, zero state and
    /// the death at basis index 0 with `l(d_t) = 1`.
    pub fn builder(name: impl Into<String>, labels: Vec<String>) -> TableBuilder {
        TableBuilder::new(name.into(), labels)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    /// Structure constant `c_{ij}^k`.
    pub fn c(&self, i: usize, j: usize, k: usize) -> C64 {
        let n = self.dim();
        self.mult[(i * n + j) * n + k]
    }

    pub fn mult_table(&self) -> &[C64] {
        &self.mult
    }

    /// `S[i][k]`: coefficient of `a_k` in `a_i*`.
    pub fn s(&self, i: usize, k: usize) -> C64 {
        self.star[i * self.dim() + k]
    }

    pub fn star_table(&self) -> &[C64] {
        &self.star
    }

    pub fn state(&self) -> &[C64] {
        &self.state
    }

    pub fn death(&self) -> Element {
        Element::new(self.death.clone())
    }

    /// The death's basis index, when it is a basis vector.
    pub fn death_index(&self) -> Option<usize> {
        self.death().as_basis_index()
    }

    pub fn basis_element(&self, i: usize) -> Element {
        Element::basis(self.dim(), i)
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn element(&self, label: &str) -> Option<Element> {
        self.label_index(label).map(|i| self.basis_element(i))
    }

    fn check_dim(&self, a: &Element) -> Result<()> {
        if a.dim() == self.dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: a.dim(),
            })
        }
    }

    /// Relative-tolerance comparison used for every equality decision.
    pub fn close(&self, residual: f64, scale: f64) -> bool {
        residual <= self.tol * scale.max(1.0)
    }

    pub fn multiply(&self, a: &Element, b: &Element) -> Result<Element> {
        self.check_dim(a)?;
        self.check_dim(b)?;
        let n = self.dim();
        let mut out = vec![czero(); n];
        for (i, ai) in a.coeffs.iter().enumerate() {
            if *ai == czero() {
                continue;
            }
            for (j, bj) in b.coeffs.iter().enumerate() {
                if *bj == czero() {
                    continue;
                }
                let f = ai * bj;
                let base = (i * n + j) * n;
                for (k, o) in out.iter_mut().enumerate() {
                    *o += f * self.mult[base + k];
                }
            }
        }
        Ok(Element::new(out))
    }

    /// Antilinear involution: `(Σ λ_i a_i)* = Σ conj(λ_i) a_i*`.
    pub fn star(&self, a: &Element) -> Result<Element> {
        self.check_dim(a)?;
        let n = self.dim();
        let mut out = vec![czero(); n];
        for (i, ai) in a.coeffs.iter().enumerate() {
            if *ai == czero() {
                continue;
            }
            let f = ai.conj();
            for (k, o) in out.iter_mut().enumerate() {
                *o += f * self.star[i * n + k];
            }
        }
        Ok(Element::new(out))
    }

    pub fn state_of(&self, a: &Element) -> Result<C64> {
        self.check_dim(a)?;
        Ok(a.coeffs.iter().zip(&self.state).map(|(x, l)| x * l).sum())
    }

    /// `a - l(a) d_t`.
    pub fn zero_mean(&self, a: &Element) -> Result<Element> {
        let l = self.state_of(a)?;
        Ok(a - &self.death().scale(l))
    }

    /// `T[i][j] = l(a_i · a_j)`.
    pub fn pair_state(&self) -> CMatrix {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| {
            (0..n)
                .map(|m| self.mult[(i * n + j) * n + m] * self.state[m])
                .sum()
        })
    }

    /// Matrix of `S`.
    pub fn star_matrix(&self) -> CMatrix {
        let n = self.dim();
        DMatrix::from_row_slice(n, n, &self.star)
    }

    /// Gram matrix `H[i][j] = l(a_i* · a_j)`.
    pub fn gram(&self) -> CMatrix {
        self.star_matrix() * self.pair_state()
    }

    /// Left multiplication by `a_i` as a matrix acting on coefficient columns.
    pub fn left_mult(&self, i: usize) -> CMatrix {
        let n = self.dim();
        DMatrix::from_fn(n, n, |k, j| self.mult[(i * n + j) * n + k])
    }

    /// Runs every axiom check. Residuals are relative to the largest
    /// magnitude entering each comparison (floored at 1).
    pub fn verify_axioms(&self) -> Report {
        let n = self.dim();
        let tol = self.tol;
        let rel = |lhs: C64, rhs: C64| (lhs - rhs).norm() / lhs.norm().max(rhs.norm()).max(1.0);
        let mut report = Report::default();

        let mut assoc: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for r in 0..n {
                        let mut lhs = czero();
                        let mut rhs = czero();
                        for m in 0..n {
                            lhs += self.c(i, j, m) * self.c(m, k, r);
                            rhs += self.c(j, k, m) * self.c(i, m, r);
                        }
                        assoc = assoc.max(rel(lhs, rhs));
                    }
                }
            }
        }
        report.push(Check::within("associativity", assoc, tol));

        let s = self.star_matrix();
        let invol = s.map(|z| z.conj()) * &s - CMatrix::identity(n, n);
        let scale = linalg::max_abs(&s).powi(2).max(1.0);
        report.push(Check::within("star_involution", linalg::max_abs(&invol) / scale, tol));

        let mut anti: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let ai = self.basis_element(i);
                let aj = self.basis_element(j);
                let lhs = self.star(&self.multiply(&ai, &aj).unwrap()).unwrap();
                let rhs = self
                    .multiply(&self.star(&aj).unwrap(), &self.star(&ai).unwrap())
                    .unwrap();
                for (x, y) in lhs.coeffs.iter().zip(&rhs.coeffs) {
                    anti = anti.max(rel(*x, *y));
                }
            }
        }
        report.push(Check::within("star_antimultiplicative", anti, tol));

        let d = self.death();
        let dstar = self.star(&d).unwrap();
        let mut dres: f64 = 0.0;
        for (x, y) in dstar.coeffs.iter().zip(&d.coeffs) {
            dres = dres.max(rel(*x, *y));
        }
        report.push(Check::within("death_self_adjoint", dres, tol));

        let mut ann: f64 = 0.0;
        let dscale = d.max_abs().max(1.0);
        for i in 0..n {
            let a = self.basis_element(i);
            let left = self.multiply(&a, &d).unwrap();
            let right = self.multiply(&d, &a).unwrap();
            ann = ann.max(left.max_abs() / dscale).max(right.max_abs() / dscale);
        }
        report.push(Check::within("death_annihilates", ann, tol));

        let mut sres: f64 = 0.0;
        for i in 0..n {
            let li = self.state[i];
            let lstar = self.state_of(&self.star(&self.basis_element(i)).unwrap()).unwrap();
            sres = sres.max(rel(lstar, li.conj()));
        }
        report.push(Check::within("state_star", sres, tol));

        let ld = self.state_of(&d).unwrap();
        report.push(Check::within(
            "state_normalized",
            rel(ld, C64::new(1.0, 0.0)),
            tol,
        ));

        let (eigs, _) = linalg::hermitian_eigen(&self.gram());
        let max_eig = eigs.iter().cloned().fold(0.0, f64::max);
        let min_eig = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
        let neg = (-min_eig).max(0.0) / max_eig.max(1.0);
        report.push(Check::within("state_positive", neg, tol));

        report
    }

    /// Whether `a_i · a_j = a_j · a_i` for every basis pair.
    pub fn is_commutative(&self) -> bool {
        let n = self.dim();
        for i in 0..n {
            for j in (i + 1)..n {
                for k in 0..n {
                    let x = self.c(i, j, k);
                    let y = self.c(j, i, k);
                    let scale = x.norm().max(y.norm());
                    if !self.close((x - y).norm(), scale) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Restricts the algebra to the span of `basis`, which must be linearly
    /// independent, closed under product and star, and contain the death.
    pub fn subalgebra(&self, name: impl Into<String>, basis: &[Element]) -> Result<ItoAlgebra> {
        self.rebase(name, basis, None)
    }

    /// Same as [`ItoAlgebra::subalgebra`] with explicit labels.
    pub fn rebase(
        &self,
        name: impl Into<String>,
        basis: &[Element],
        labels: Option<Vec<String>>,
    ) -> Result<ItoAlgebra> {
        let n = self.dim();
        for b in basis {
            self.check_dim(b)?;
        }
        let r = basis.len();
        if r == 0 {
            return Err(Error::InvalidParameter("empty basis".into()));
        }
        let cols: Vec<Vec<C64>> = basis.iter().map(|b| b.coeffs.clone()).collect();
        let bmat = linalg::columns(&cols, n);
        if linalg::rank(&bmat, self.tol, 0.0) < r {
            return Err(Error::InvalidParameter("basis is linearly dependent".into()));
        }
        let mut worst: f64 = 0.0;
        let mut coords = |v: &Element| -> Vec<C64> {
            let rhs = CMatrix::from_column_slice(n, 1, &v.coeffs);
            let (x, res) = linalg::least_squares(&bmat, &rhs, self.tol);
            worst = worst.max(res / v.max_abs().max(1.0));
            x.iter().map(|z| linalg::snap(*z)).collect()
        };
        let mut mult = Vec::with_capacity(r * r * r);
        for p in 0..r {
            for q in 0..r {
                let prod = self.multiply(&basis[p], &basis[q])?;
                mult.extend(coords(&prod));
            }
        }
        let mut star = Vec::with_capacity(r * r);
        for b in basis {
            star.extend(coords(&self.star(b)?));
        }
        let death = coords(&self.death());
        if worst > self.tol {
            return Err(Error::NotSubalgebra { residual: worst });
        }
        let state = basis
            .iter()
            .map(|b| self.state_of(b))
            .collect::<Result<Vec<_>>>()?;
        let labels = labels.unwrap_or_else(|| {
            basis
                .iter()
                .enumerate()
                .map(|(p, b)| match b.as_basis_index() {
                    Some(i) => self.labels[i].clone(),
                    None if Element::new(death.clone()).as_basis_index() == Some(p) => {
                        "dt".to_string()
                    }
                    None => format!("b{p}"),
                })
                .collect()
        });
        let mut out = ItoAlgebra::new(name, labels, mult, star, death, state)?;
        out.tol = self.tol;
        Ok(out)
    }

    /// An equivalent algebra whose basis element 0 is the death.
    pub fn with_death_first(&self) -> Result<ItoAlgebra> {
        let n = self.dim();
        if self.death_index() == Some(0) {
            return Ok(self.clone());
        }
        let pivot = match self.death_index() {
            Some(p) => p,
            None => (0..n)
                .max_by(|&a, &b| {
                    self.death[a]
                        .norm()
                        .partial_cmp(&self.death[b].norm())
                        .unwrap()
                })
                .unwrap(),
        };
        let mut basis = vec![self.death()];
        let mut labels = vec![if self.death_index().is_some() {
            self.labels[pivot].clone()
        } else {
            "dt".to_string()
        }];
        for j in (0..n).filter(|&j| j != pivot) {
            basis.push(self.basis_element(j));
            labels.push(self.labels[j].clone());
        }
        if self.death_index().is_none() && labels[1..].contains(&labels[0]) {
            labels[0] = "dt_".to_string();
        }
        self.rebase(self.name.clone(), &basis, Some(labels))
    }

    /// Bitwise equality of every table entry (the tolerance is ignored).
    pub fn bit_eq(&self, other: &ItoAlgebra) -> bool {
        fn same(a: &[C64], b: &[C64]) -> bool {
            a.len() == b.len()
                && a.iter()
                    .zip(b)
                    .all(|(x, y)| x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits())
        }
        self.labels == other.labels
            && same(&self.mult, &other.mult)
            && same(&self.star, &other.star)
            && same(&self.death, &other.death)
            && same(&self.state, &other.state)
    }
}

/// Incremental construction of a structure-constant table.
#[derive(Clone, Debug)]
pub struct TableBuilder {
    name: String,
    labels: Vec<String>,
    mult: Vec<C64>,
    star: Vec<C64>,
    death: Vec<C64>,
    state: Vec<C64>,
}

impl TableBuilder {
    fn new(name: String, labels: Vec<String>) -> Self {
        let n = labels.len();
        let mut star = vec![czero(); n * n];
        for i in 0..n {
            star[i * n + i] = C64::new(1.0, 0.0);
        }
        let mut death = vec![czero(); n];
        let mut state = vec![czero(); n];
        if n > 0 {
            death[0] = C64::new(1.0, 0.0);
            state[0] = C64::new(1.0, 0.0);
        }
        Self {
            name,
            labels,
            mult: vec![czero(); n * n * n],
            star,
            death,
            state,
        }
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    /// Adds `coef * a_k` to `a_i · a_j`.
    pub fn add_product(&mut self, i: usize, j: usize, k: usize, coef: C64) -> &mut Self {
        let n = self.dim();
        self.mult[(i * n + j) * n + k] += coef;
        self
    }

    pub fn set_star(&mut self, i: usize, terms: &[(usize, C64)]) -> &mut Self {
        let n = self.dim();
        for k in 0..n {
            self.star[i * n + k] = czero();
        }
        for &(k, z) in terms {
            self.star[i * n + k] += z;
        }
        self
    }

    pub fn set_state(&mut self, i: usize, value: C64) -> &mut Self {
        self.state[i] = value;
        self
    }

    pub fn set_death(&mut self, death: Vec<C64>) -> &mut Self {
        self.death = death;
        self
    }

    pub fn build(&self) -> Result<ItoAlgebra> {
        ItoAlgebra::new(
            self.name.clone(),
            self.labels.clone(),
            self.mult.clone(),
            self.star.clone(),
            self.death.clone(),
            self.state.clone(),
        )
    }
}
