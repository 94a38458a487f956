//! The faithfulness ideal of `(𝔞, l)` and the quotient by it.

use serde::Serialize;

use crate::algebra::{Element, ItoAlgebra};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::C64;

/// Basis of the largest ideal on which every `l(y)`, `l(a y)`, `l(y c)` and
/// `l(a y c)` vanish. Stored in reduced row-echelon form.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdealBasis {
    pub elements: Vec<Element>,
}

impl IdealBasis {
    pub fn empty() -> Self {
        Self {
            elements: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }
}

/// Null space of the stacked conditions `l(x)`, `l(a_i x)`, `l(x a_j)`,
/// `l(a_i x a_j)` over unknown coefficient vectors `x`.
pub fn faithfulness_ideal(alg: &ItoAlgebra) -> IdealBasis {
    let n = alg.dim();
    let t = alg.pair_state();
    let mut rows: Vec<Vec<C64>> = Vec::with_capacity(1 + 2 * n + n * n);
    rows.push(alg.state().to_vec());
    for i in 0..n {
        rows.push((0..n).map(|m| t[(i, m)]).collect());
        rows.push((0..n).map(|m| t[(m, i)]).collect());
    }
    for i in 0..n {
        for j in 0..n {
            rows.push(
                (0..n)
                    .map(|m| (0..n).map(|p| alg.c(i, m, p) * t[(p, j)]).sum())
                    .collect(),
            );
        }
    }
    let mut stacked = CMatrix::zeros(rows.len(), n);
    for (r, row) in rows.iter().enumerate() {
        for (c, z) in row.iter().enumerate() {
            stacked[(r, c)] = *z;
        }
    }
    let ns = linalg::null_space(&stacked, alg.tol(), 0.0);
    let vectors: Vec<Vec<C64>> = (0..ns.ncols())
        .map(|j| ns.column(j).iter().cloned().collect())
        .collect();
    IdealBasis {
        elements: linalg::rref(&vectors, n, alg.tol())
            .into_iter()
            .map(Element::new)
            .collect(),
    }
}

/// The quotient algebra together with the data of the quotient map.
#[derive(Clone, Debug)]
pub struct Quotient {
    pub algebra: ItoAlgebra,
    /// Representatives in the original algebra of the quotient basis.
    pub complement: Vec<Element>,
    pub ideal: IdealBasis,
    /// `[B | Y]`: complement columns followed by ideal columns.
    solve: CMatrix,
}

impl Quotient {
    /// Builds the quotient after checking that `ideal` is a two-sided *-ideal
    /// not containing the death.
    pub fn new(alg: &ItoAlgebra, ideal: &IdealBasis) -> Result<Self> {
        let n = alg.dim();
        let tol = alg.tol();
        let ycols: Vec<Vec<C64>> = ideal.elements.iter().map(|y| y.coeffs().to_vec()).collect();
        let ymat = linalg::columns(&ycols, n);
        let in_span = |v: &Element| -> f64 {
            if ycols.is_empty() {
                return v.max_abs();
            }
            let rhs = CMatrix::from_column_slice(n, 1, v.coeffs());
            linalg::least_squares(&ymat, &rhs, tol).1 / v.max_abs().max(1.0)
        };
        let mut worst: f64 = 0.0;
        for y in &ideal.elements {
            worst = worst.max(in_span(&alg.star(y)?));
            for i in 0..n {
                let a = alg.basis_element(i);
                worst = worst.max(in_span(&alg.multiply(&a, y)?));
                worst = worst.max(in_span(&alg.multiply(y, &a)?));
            }
        }
        if worst > tol {
            return Err(Error::NotAnIdeal { residual: worst });
        }
        let death = alg.death();
        if !ycols.is_empty() && in_span(&death) <= tol {
            return Err(Error::DeathInIdeal);
        }

        let mut accepted: Vec<Vec<C64>> = ycols.clone();
        let mut complement: Vec<Element> = Vec::new();
        let candidates = std::iter::once(death.clone()).chain((0..n).map(|i| alg.basis_element(i)));
        for cand in candidates {
            if accepted.len() == n {
                break;
            }
            let mut trial = accepted.clone();
            trial.push(cand.coeffs().to_vec());
            if linalg::rank(&linalg::columns(&trial, n), tol, 0.0) == trial.len() {
                accepted = trial;
                complement.push(cand);
            }
        }
        let r = complement.len();
        let mut solve_cols: Vec<Vec<C64>> = complement.iter().map(|b| b.coeffs().to_vec()).collect();
        solve_cols.extend(ycols.iter().cloned());
        let solve = linalg::columns(&solve_cols, n);

        let coords = |v: &Element| -> Vec<C64> {
            let rhs = CMatrix::from_column_slice(n, 1, v.coeffs());
            let (z, _) = linalg::least_squares(&solve, &rhs, tol);
            (0..r).map(|p| linalg::snap(z[(p, 0)])).collect()
        };
        let mut mult = Vec::with_capacity(r * r * r);
        for p in 0..r {
            for q in 0..r {
                mult.extend(coords(&alg.multiply(&complement[p], &complement[q])?));
            }
        }
        let mut star = Vec::with_capacity(r * r);
        for b in &complement {
            star.extend(coords(&alg.star(b)?));
        }
        let qdeath = coords(&death);
        let state = complement
            .iter()
            .map(|b| alg.state_of(b))
            .collect::<Result<Vec<_>>>()?;
        let labels: Vec<String> = complement
            .iter()
            .enumerate()
            .map(|(p, b)| match b.as_basis_index() {
                Some(i) => alg.labels()[i].clone(),
                None if p == 0 => "dt".to_string(),
                None => format!("q{p}"),
            })
            .collect();
        let name = if ideal.is_empty() {
            alg.name().to_string()
        } else {
            format!("{}_quotient", alg.name())
        };
        let algebra = ItoAlgebra::new(name, labels, mult, star, qdeath, state)?.with_tol(tol);
        Ok(Self {
            algebra,
            complement,
            ideal: ideal.clone(),
            solve,
        })
    }

    /// The quotient map `q: 𝔞 → 𝔞/𝔦`.
    pub fn map(&self, a: &Element) -> Element {
        let n = self.solve.nrows();
        let r = self.complement.len();
        let rhs = CMatrix::from_column_slice(n, 1, a.coeffs());
        let (z, _) = linalg::least_squares(&self.solve, &rhs, self.algebra.tol());
        Element::new((0..r).map(|p| z[(p, 0)]).collect())
    }
}

/// The quotient algebra `𝔞/𝔦`. An empty ideal returns the algebra unchanged
/// (up to moving the death to the front of the basis).
pub fn quotient(alg: &ItoAlgebra, ideal: &IdealBasis) -> Result<ItoAlgebra> {
    if ideal.is_empty() {
        return Ok(alg.clone());
    }
    Ok(Quotient::new(alg, ideal)?.algebra)
}
