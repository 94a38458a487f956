//! Constructors for the standard algebras. Every builtin puts the death at
//! basis index 0 with `l(d_t) = 1`.

use crate::algebra::{ItoAlgebra, TableBuilder};
use crate::error::{Error, Result};
use crate::group::FiniteGroup;
use crate::linalg::{self, czero, CMatrix};
use crate::C64;

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn labels(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn built(b: &TableBuilder) -> ItoAlgebra {
    b.build().expect("builtin tables are well-formed")
}

/// `ℂ d_t` with `d_t² = 0`.
pub fn newton() -> ItoAlgebra {
    built(&ItoAlgebra::builder("newton", labels(&["dt"])))
}

/// `dw² = dt`.
pub fn wiener() -> ItoAlgebra {
    let mut b = ItoAlgebra::builder("wiener", labels(&["dt", "dw"]));
    b.add_product(1, 1, 0, re(1.0));
    built(&b)
}

/// `dm² = dm + dt`.
pub fn poisson() -> ItoAlgebra {
    let mut b = ItoAlgebra::builder("poisson", labels(&["dt", "dm"]));
    b.add_product(1, 1, 1, re(1.0)).add_product(1, 1, 0, re(1.0));
    built(&b)
}

/// `e² = e` with `l(e) = 0`: faithful only after dividing out `e`.
pub fn zero_intensity_poisson() -> ItoAlgebra {
    let mut b = ItoAlgebra::builder("zero_intensity_poisson", labels(&["dt", "e"]));
    b.add_product(1, 1, 1, re(1.0));
    built(&b)
}

/// Hudson–Parthasarathy algebra of multiplicity `d`, realized by matrix units
/// `E_ab` over the index set `{-, 1..d, +}` with `a ∈ {-, •}`, `b ∈ {•, +}`.
///
/// Basis order: `dt = E_{-+}`, `e_-^i = E_{-i}`, `e^+_j = E_{j+}`, `e^i_j = E_{ij}`.
/// The star is `E_ab ↦ E_{-b,-a}` where `-` and `+` swap and inner indices stay.
pub fn hp(d: usize) -> Result<ItoAlgebra> {
    if d == 0 {
        return Err(Error::InvalidParameter("hp multiplicity must be at least 1".into()));
    }
    // Outer index 0 is `-`, 1..=d inner, d+1 is `+`.
    let plus = d + 1;
    let index = |a: usize, b: usize| -> usize {
        match (a, b) {
            (0, b) if b == plus => 0,
            (0, j) => j,
            (i, b) if b == plus => d + i,
            (i, j) => 1 + 2 * d + (i - 1) * d + (j - 1),
        }
    };
    let mut units = vec![(0, plus)];
    units.extend((1..=d).map(|i| (0, i)));
    units.extend((1..=d).map(|j| (j, plus)));
    for i in 1..=d {
        units.extend((1..=d).map(|j| (i, j)));
    }
    let names: Vec<String> = units
        .iter()
        .map(|&(a, b)| match (a, b) {
            (0, b) if b == plus => "dt".to_string(),
            (0, _) if d == 1 => "em".to_string(),
            (0, j) => format!("em{j}"),
            (_, b) if b == plus && d == 1 => "ep".to_string(),
            (i, b) if b == plus => format!("ep{i}"),
            _ if d == 1 => "e".to_string(),
            (i, j) => format!("e{i}_{j}"),
        })
        .collect();
    let mut b = ItoAlgebra::builder(format!("hp{d}"), names);
    for (p, &(a1, b1)) in units.iter().enumerate() {
        debug_assert_eq!(index(a1, b1), p);
        for (q, &(a2, b2)) in units.iter().enumerate() {
            if b1 == a2 {
                b.add_product(p, q, index(a1, b2), re(1.0));
            }
        }
        let flip = |x: usize| if x == 0 { plus } else if x == plus { 0 } else { x };
        b.set_star(p, &[(index(flip(b1), flip(a1)), re(1.0))]);
    }
    Ok(built(&b))
}

/// Noncommutative Brownian pair: `dw·dw* = ρ₊ dt`, `dw*·dw = ρ₋ dt`.
pub fn thermal_brownian(rho_plus: f64, rho_minus: f64) -> Result<ItoAlgebra> {
    if !(rho_plus.is_finite() && rho_plus > 0.0) {
        return Err(Error::InvalidParameter(format!("rho_plus must be positive, got {rho_plus}")));
    }
    if !(rho_minus.is_finite() && rho_minus >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "rho_minus must be nonnegative, got {rho_minus}"
        )));
    }
    let mut b = ItoAlgebra::builder("thermal_brownian", labels(&["dt", "dw", "dw_adj"]));
    b.add_product(1, 2, 0, re(rho_plus))
        .add_product(2, 1, 0, re(rho_minus))
        .set_star(1, &[(2, re(1.0))])
        .set_star(2, &[(1, re(1.0))]);
    Ok(built(&b))
}

/// Truncated periodic Wiener family with modes `k = ±1..±K`.
///
/// `rho[k-1]` is `ρ_k`; negative modes use `ρ_{-k} = 1/ρ_k`. The only nonzero
/// products are `d_k · d_{-k} = ρ_k dt`, and `d_k* = d_{-k}`.
/// Basis order: `dt, d1, dm1, d2, dm2, ...`.
pub fn periodic_wiener(k: usize, rho: &[f64]) -> Result<ItoAlgebra> {
    if k == 0 {
        return Err(Error::InvalidParameter("K must be at least 1".into()));
    }
    if rho.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            found: rho.len(),
        });
    }
    if let Some(bad) = rho.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
        return Err(Error::InvalidParameter(format!("rho must be positive, got {bad}")));
    }
    let mut names = vec!["dt".to_string()];
    for m in 1..=k {
        names.push(format!("d{m}"));
        names.push(format!("dm{m}"));
    }
    let mut b = ItoAlgebra::builder("periodic_wiener", names);
    for m in 1..=k {
        let (pos, neg) = (2 * m - 1, 2 * m);
        let r = rho[m - 1];
        b.add_product(pos, neg, 0, re(r))
            .add_product(neg, pos, 0, re(1.0 / r))
            .set_star(pos, &[(neg, re(1.0))])
            .set_star(neg, &[(pos, re(1.0))]);
    }
    Ok(built(&b))
}

/// Group Lévy algebra over a finite group: `d_g · d_h = λ_{gh} dt + d_{gh}`,
/// `d_g* = d_{g⁻¹}`, `l(d_g) = 0`.
///
/// `lambda` must satisfy `λ_{g⁻¹} = conj(λ_g)`, be its own inverse under
/// `[λ̄ ∗ λ]_g = Σ_h conj(λ_{gh⁻¹}) λ_h = δ_g`, and have a positive
/// semidefinite Gram form `[λ_{g⁻¹h}]`.
pub fn group_levy(group: &FiniteGroup, lambda: &[C64]) -> Result<ItoAlgebra> {
    let n = group.order();
    if lambda.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: lambda.len(),
        });
    }
    let tol = crate::algebra::DEFAULT_TOL;
    let scale = linalg::max_abs_slice(lambda).max(1.0);
    for g in 0..n {
        let dev = (lambda[group.inv(g)] - lambda[g].conj()).norm();
        if dev > tol * scale {
            return Err(Error::InvalidGroupFunction(format!(
                "lambda(g^-1) != conj(lambda(g)) at element {g} (deviation {dev:.3e})"
            )));
        }
    }
    for g in 0..n {
        let conv: C64 = (0..n)
            .map(|h| lambda[group.mul(g, group.inv(h))].conj() * lambda[h])
            .sum();
        let target = if g == group.identity() { re(1.0) } else { czero() };
        let dev = (conv - target).norm();
        if dev > tol * scale * scale {
            return Err(Error::InvalidGroupFunction(format!(
                "lambda is not self-inverse under convolution at element {g} (deviation {dev:.3e})"
            )));
        }
    }
    let gram = CMatrix::from_fn(n, n, |g, h| lambda[group.mul(group.inv(g), h)]);
    let (eigs, _) = linalg::hermitian_eigen(&gram);
    let min = eigs.last().copied().unwrap_or(0.0);
    if min < -tol * scale {
        return Err(Error::InvalidGroupFunction(format!(
            "lambda is not positive definite (eigenvalue {min:.3e})"
        )));
    }
    let mut names = vec!["dt".to_string()];
    names.extend((0..n).map(|g| format!("dg{g}")));
    let mut b = ItoAlgebra::builder(format!("group_levy_{}", group.name()), names);
    for g in 0..n {
        for h in 0..n {
            let gh = group.mul(g, h);
            b.add_product(1 + g, 1 + h, 0, lambda[gh])
                .add_product(1 + g, 1 + h, 1 + gh, re(1.0));
        }
        b.set_star(1 + g, &[(1 + group.inv(g), re(1.0))]);
    }
    Ok(built(&b))
}

/// The delta function at the identity, the canonical admissible `λ`.
pub fn delta(group: &FiniteGroup) -> Vec<C64> {
    (0..group.order())
        .map(|g| if g == group.identity() { re(1.0) } else { czero() })
        .collect()
}

/// Thermal matrix algebra on `n×n` matrix units with diagonal weights `ρ`:
/// `ξ_pq · ξ_rs = δ_qr (ξ_ps + δ_ps ρ_p dt)`, `ξ_pq* = ξ_qp`, so that
/// `l(ξ* ζ) = tr(diag(ρ) ξ† ζ)`. Labels `x{p}_{q}` are 1-based.
pub fn thermal_matrix(n: usize, rho: &[f64]) -> Result<ItoAlgebra> {
    if n == 0 {
        return Err(Error::InvalidParameter("matrix size must be at least 1".into()));
    }
    if rho.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: rho.len(),
        });
    }
    if let Some(bad) = rho.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
        return Err(Error::InvalidParameter(format!("weights must be positive, got {bad}")));
    }
    let idx = |p: usize, q: usize| 1 + p * n + q;
    let mut names = vec!["dt".to_string()];
    for p in 0..n {
        names.extend((0..n).map(|q| format!("x{}_{}", p + 1, q + 1)));
    }
    let mut b = ItoAlgebra::builder("thermal_matrix", names);
    for p in 0..n {
        for q in 0..n {
            for s in 0..n {
                b.add_product(idx(p, q), idx(q, s), idx(p, s), re(1.0));
                if p == s {
                    b.add_product(idx(p, q), idx(q, s), 0, re(rho[p]));
                }
            }
            b.set_star(idx(p, q), &[(idx(q, p), re(1.0))]);
        }
    }
    Ok(built(&b))
}

/// Orthogonal sum sharing the death: zero-mean parts are direct-summed and
/// every cross product vanishes. Labels of the second summand that collide
/// get a `_b` suffix.
pub fn orthogonal_sum(a1: &ItoAlgebra, a2: &ItoAlgebra) -> Result<ItoAlgebra> {
    let a1 = a1.with_death_first()?;
    let a2 = a2.with_death_first()?;
    let (n1, n2) = (a1.dim(), a2.dim());
    let n = n1 + n2 - 1;
    // Position of a summand's basis element in the sum.
    let pos1 = |i: usize| i;
    let pos2 = |i: usize| if i == 0 { 0 } else { n1 + i - 1 };
    let mut names: Vec<String> = a1.labels().to_vec();
    for l in &a2.labels()[1..] {
        let mut name = l.clone();
        while names.contains(&name) {
            name.push_str("_b");
        }
        names.push(name);
    }
    let mut mult = vec![czero(); n * n * n];
    let mut star = vec![czero(); n * n];
    let mut state = vec![czero(); n];
    for i in 0..n1 {
        for j in 0..n1 {
            for k in 0..n1 {
                mult[(pos1(i) * n + pos1(j)) * n + pos1(k)] = a1.c(i, j, k);
            }
        }
        for k in 0..n1 {
            star[pos1(i) * n + pos1(k)] = a1.s(i, k);
        }
        state[pos1(i)] = a1.state()[i];
    }
    // The second summand contributes only its zero-mean rows; its death is shared.
    for i in 1..n2 {
        for j in 1..n2 {
            for k in 0..n2 {
                mult[(pos2(i) * n + pos2(j)) * n + pos2(k)] = a2.c(i, j, k);
            }
        }
        for k in 0..n2 {
            star[pos2(i) * n + pos2(k)] = a2.s(i, k);
        }
        state[pos2(i)] = a2.state()[i];
    }
    let mut death = vec![czero(); n];
    death[0] = re(1.0);
    let out = ItoAlgebra::new(
        format!("{}+{}", a1.name(), a2.name()),
        names,
        mult,
        star,
        death,
        state,
    )?;
    Ok(out.with_tol(a1.tol().max(a2.tol())))
}

/// Every builtin at its default parameters.
pub fn catalog() -> Vec<ItoAlgebra> {
    let s3 = FiniteGroup::symmetric(3).expect("S3");
    vec![
        newton(),
        wiener(),
        poisson(),
        zero_intensity_poisson(),
        hp(1).expect("hp1"),
        hp(2).expect("hp2"),
        hp(3).expect("hp3"),
        thermal_brownian(2.0, 0.5).expect("thermal_brownian"),
        periodic_wiener(2, &[2.0, 3.0]).expect("periodic_wiener"),
        group_levy(&s3, &delta(&s3)).expect("group_levy"),
        thermal_matrix(2, &[2.0 / 3.0, 1.0 / 3.0]).expect("thermal_matrix"),
        orthogonal_sum(&wiener(), &poisson()).expect("orthogonal_sum"),
    ]
}

/// Names accepted by [`by_name`].
pub const NAMES: &[&str] = &[
    "newton",
    "wiener",
    "poisson",
    "zero_intensity_poisson",
    "hp",
    "thermal_brownian",
    "periodic_wiener",
    "group_levy",
    "group_levy_cyclic",
    "thermal_matrix",
    "orthogonal_sum",
];

/// Builds a builtin from its name and numeric parameters; empty `params`
/// selects the defaults used by [`catalog`].
///
/// Parameters: `hp d`, `thermal_brownian ρ₊ ρ₋`, `periodic_wiener ρ_1..ρ_K`,
/// `group_levy n` (symmetric group `S_n`, `λ = δ`), `group_levy_cyclic n`,
/// `thermal_matrix ρ_1..ρ_n`.
pub fn by_name(name: &str, params: &[f64]) -> Result<ItoAlgebra> {
    let none = |alg: ItoAlgebra| {
        if params.is_empty() {
            Ok(alg)
        } else {
            Err(Error::InvalidParameter(format!("`{name}` takes no parameters")))
        }
    };
    let count = |x: f64| -> Result<usize> {
        if x.fract() == 0.0 && (1.0..=64.0).contains(&x) {
            Ok(x as usize)
        } else {
            Err(Error::InvalidParameter(format!("expected a small positive integer, got {x}")))
        }
    };
    let one = |default: f64| -> Result<f64> {
        match params {
            [] => Ok(default),
            [x] => Ok(*x),
            _ => Err(Error::InvalidParameter(format!("`{name}` takes one parameter"))),
        }
    };
    match name {
        "newton" => none(newton()),
        "wiener" => none(wiener()),
        "poisson" => none(poisson()),
        "zero_intensity_poisson" => none(zero_intensity_poisson()),
        "orthogonal_sum" => none(orthogonal_sum(&wiener(), &poisson())?),
        "hp" => hp(count(one(1.0)?)?),
        "thermal_brownian" => match params {
            [] => thermal_brownian(2.0, 0.5),
            [p, m] => thermal_brownian(*p, *m),
            _ => Err(Error::InvalidParameter("thermal_brownian takes ρ₊ ρ₋".into())),
        },
        "periodic_wiener" => {
            if params.is_empty() {
                periodic_wiener(2, &[2.0, 3.0])
            } else {
                periodic_wiener(params.len(), params)
            }
        }
        "group_levy" => {
            let g = FiniteGroup::symmetric(count(one(3.0)?)?)?;
            group_levy(&g, &delta(&g))
        }
        "group_levy_cyclic" => {
            let g = FiniteGroup::cyclic(count(one(2.0)?)?)?;
            group_levy(&g, &delta(&g))
        }
        "thermal_matrix" => {
            if params.is_empty() {
                thermal_matrix(2, &[2.0 / 3.0, 1.0 / 3.0])
            } else {
                thermal_matrix(params.len(), params)
            }
        }
        other => Err(Error::InvalidParameter(format!(
            "unknown builtin `{other}`; known: {}",
            NAMES.join(", ")
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Element;

    #[test]
    fn catalog_passes_axioms() {
        for alg in catalog() {
            let report = alg.verify_axioms();
            assert!(report.passed(), "{}:\n{report}", alg.name());
            assert_eq!(alg.death_index(), Some(0));
        }
    }

    #[test]
    fn hp_dimensions_and_labels() {
        for d in 1..=3 {
            assert_eq!(hp(d).unwrap().dim(), 1 + 2 * d + d * d);
        }
        assert_eq!(hp(1).unwrap().labels(), &["dt", "em", "ep", "e"]);
        assert_eq!(
            hp(2).unwrap().labels(),
            &["dt", "em1", "em2", "ep1", "ep2", "e1_1", "e1_2", "e2_1", "e2_2"]
        );
        assert!(hp(0).is_err());
    }

    #[test]
    fn hp2_mismatched_creation_annihilation() {
        let h = hp(2).unwrap();
        let p = h.multiply(&h.element("em1").unwrap(), &h.element("ep2").unwrap()).unwrap();
        assert!(p.is_zero());
        let q = h.multiply(&h.element("em1").unwrap(), &h.element("ep1").unwrap()).unwrap();
        assert_eq!(q, h.death());
        let r = h.multiply(&h.element("em1").unwrap(), &h.element("e1_2").unwrap()).unwrap();
        assert_eq!(r, h.element("em2").unwrap());
        assert_eq!(h.star(&h.element("e1_2").unwrap()).unwrap(), h.element("e2_1").unwrap());
    }

    #[test]
    fn thermal_brownian_matches_vacuum_pair_at_zero_temperature() {
        let tb = thermal_brownian(1.0, 0.0).unwrap();
        let h = hp(1).unwrap();
        let vac = h
            .subalgebra("vac", &[h.death(), h.element("em").unwrap(), h.element("ep").unwrap()])
            .unwrap();
        assert_eq!(tb.mult_table(), vac.mult_table());
        assert_eq!(tb.star_table(), vac.star_table());
        assert!(thermal_brownian(0.0, 1.0).is_err());
        assert!(thermal_brownian(1.0, -1.0).is_err());
    }

    #[test]
    fn periodic_wiener_commutativity() {
        assert!(periodic_wiener(1, &[1.0]).unwrap().is_commutative());
        assert!(!periodic_wiener(1, &[2.0]).unwrap().is_commutative());
        assert!(periodic_wiener(2, &[1.0]).is_err());
        assert!(periodic_wiener(1, &[-1.0]).is_err());
    }

    #[test]
    fn group_levy_commutativity_follows_group() {
        let z3 = FiniteGroup::cyclic(3).unwrap();
        assert!(group_levy(&z3, &delta(&z3)).unwrap().is_commutative());
        let s3 = FiniteGroup::symmetric(3).unwrap();
        let alg = group_levy(&s3, &delta(&s3)).unwrap();
        assert_eq!(alg.dim(), 7);
        assert!(!alg.is_commutative());
    }

    #[test]
    fn group_levy_rejects_bad_lambda() {
        let z2 = FiniteGroup::cyclic(2).unwrap();
        let err = group_levy(&z2, &[re(1.0), re(0.5)]).unwrap_err();
        assert!(matches!(err, Error::InvalidGroupFunction(_)));
        let z3 = FiniteGroup::cyclic(3).unwrap();
        let err = group_levy(&z3, &[re(1.0), C64::new(0.0, 0.3), C64::new(0.0, 0.3)]).unwrap_err();
        assert!(matches!(err, Error::InvalidGroupFunction(_)));
        assert!(group_levy(&z2, &[re(1.0)]).is_err());
    }

    #[test]
    fn thermal_matrix_is_thermal() {
        let alg = thermal_matrix(2, &[2.0 / 3.0, 1.0 / 3.0]).unwrap();
        let (eigs, _) = linalg::hermitian_eigen(&alg.gram());
        // Every zero-mean direction is strictly positive; only the death is null.
        assert_eq!(eigs.iter().filter(|&&e| e > 1e-9).count(), 4);
        let one = thermal_matrix(1, &[1.0]).unwrap();
        let x = one.element("x1_1").unwrap();
        assert_eq!(one.multiply(&x, &x).unwrap(), &x + &one.death());
    }

    #[test]
    fn orthogonal_sum_layout() {
        let s = orthogonal_sum(&wiener(), &poisson()).unwrap();
        assert_eq!(s.labels(), &["dt", "dw", "dm"]);
        assert!(s.is_commutative());
        let dw = s.element("dw").unwrap();
        let dm = s.element("dm").unwrap();
        assert!(s.multiply(&dw, &dm).unwrap().is_zero());
        assert_eq!(s.multiply(&dm, &dm).unwrap(), &dm + &s.death());
        let same = orthogonal_sum(&wiener(), &wiener()).unwrap();
        assert_eq!(same.labels(), &["dt", "dw", "dw_b"]);
        let w = wiener();
        assert!(orthogonal_sum(&w, &newton()).unwrap().bit_eq(&w));
    }

    #[test]
    fn by_name_round_trips_catalog() {
        assert!(by_name("hp", &[2.0]).unwrap().bit_eq(&hp(2).unwrap()));
        assert!(by_name("group_levy", &[]).unwrap().bit_eq(&catalog()[9]));
        assert!(by_name("nope", &[]).is_err());
        assert!(by_name("wiener", &[1.0]).is_err());
        assert!(by_name("hp", &[1.5]).is_err());
        let zero = Element::zero(3);
        assert_eq!(by_name("group_levy_cyclic", &[]).unwrap().dim(), zero.dim());
    }
}
