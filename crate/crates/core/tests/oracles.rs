//! Independent oracles: raw structure-constant loops, hand-derived GNS data,
//! and a dense tensor-product model of the toy Fock space.

use itoalg_core::builtins;
use itoalg_core::focksim::{slot_increment, vacuum_moments};
use itoalg_core::gns::FundamentalRep;
use itoalg_core::linalg::{op_norm, CMatrix};
use itoalg_core::{Element, ItoAlgebra, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn faithful_catalog() -> Vec<(ItoAlgebra, FundamentalRep)> {
    builtins::catalog()
        .into_iter()
        .filter_map(|a| FundamentalRep::build(&a).ok().map(|r| (a, r)))
        .collect()
}

/// `l(a_x a_y a_z)` straight from the tables.
fn triple_state(alg: &ItoAlgebra, x: usize, y: usize, z: usize) -> C64 {
    let n = alg.dim();
    let mut out = C64::new(0.0, 0.0);
    for m in 0..n {
        let xy = alg.c(x, y, m);
        if xy == C64::new(0.0, 0.0) {
            continue;
        }
        for k in 0..n {
            out += xy * alg.c(m, z, k) * alg.state()[k];
        }
    }
    out
}

/// `H[i][j] = l(a_i* a_j)` straight from the tables.
fn raw_gram(alg: &ItoAlgebra) -> Vec<Vec<C64>> {
    let n = alg.dim();
    let mut h = vec![vec![C64::new(0.0, 0.0); n]; n];
    for (i, row) in h.iter_mut().enumerate() {
        for (j, h_ij) in row.iter_mut().enumerate() {
            for m in 0..n {
                let s = alg.s(i, m);
                for k in 0..n {
                    *h_ij += s * alg.c(m, j, k) * alg.state()[k];
                }
            }
        }
    }
    h
}

/// Rank by Gaussian elimination with full pivoting.
fn elimination_rank(mut m: Vec<Vec<C64>>, tol: f64) -> usize {
    let n = m.len();
    let scale = m.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0;
    }
    let mut rank = 0;
    let mut used_cols = vec![false; n];
    for _ in 0..n {
        let mut best = (0.0, 0, 0);
        for (r, row) in m.iter().enumerate().skip(rank) {
            for (c, z) in row.iter().enumerate() {
                if !used_cols[c] && z.norm() > best.0 {
                    best = (z.norm(), r, c);
                }
            }
        }
        if best.0 <= tol * scale {
            break;
        }
        let (_, pr, pc) = best;
        m.swap(rank, pr);
        used_cols[pc] = true;
        let pivot = m[rank][pc];
        for r in rank + 1..n {
            let f = m[r][pc] / pivot;
            for c in 0..n {
                let v = m[rank][c];
                m[r][c] -= f * v;
            }
        }
        rank += 1;
    }
    rank
}

fn dot(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn norm(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[test]
fn gram_rank_matches_hilbert_dimension() {
    for (alg, rep) in faithful_catalog() {
        let rank = elimination_rank(raw_gram(&alg), 1e-9);
        assert_eq!(rank, rep.hdim(), "{}", alg.name());
    }
}

#[test]
fn triple_products_factor_through_the_representation() {
    for (alg, rep) in faithful_catalog() {
        let n = alg.dim();
        let mut worst: f64 = 0.0;
        for x in 0..n {
            let kd = rep.kdag_of(&alg.basis_element(x));
            for y in 0..n {
                let iy = rep.i_of(&alg.basis_element(y));
                for z in 0..n {
                    let k = CMatrix::from_column_slice(rep.hdim(), 1, &rep.k_of(&alg.basis_element(z)));
                    let mid = &iy * k;
                    let got = dot(&kd, mid.as_slice());
                    worst = worst.max((got - triple_state(&alg, x, y, z)).norm());
                }
            }
        }
        assert!(worst < 1e-9, "{}: {worst:e}", alg.name());
    }
}

#[test]
fn thermal_brownian_by_hand() {
    // l(dw* dw) = ρ₋, l(dw dw*) = ρ₊, every other zero-mean product vanishes.
    let alg = builtins::thermal_brownian(2.0, 0.5).unwrap();
    let rep = FundamentalRep::build(&alg).unwrap();
    assert_eq!(rep.hdim(), 2);
    let dw = rep.seminorms(&alg.element("dw").unwrap());
    assert!((dw.plus - 0.5f64.sqrt()).abs() < 1e-12);
    assert!((dw.minus - 2f64.sqrt()).abs() < 1e-12);
    assert!(dw.norm < 1e-12 && dw.plus_minus == 0.0);
    let adj = rep.seminorms(&alg.element("dw_adj").unwrap());
    assert!((adj.plus - 2f64.sqrt()).abs() < 1e-12);
    assert!((adj.minus - 0.5f64.sqrt()).abs() < 1e-12);
    let k1 = rep.k_of(&alg.element("dw").unwrap());
    let k2 = rep.k_of(&alg.element("dw_adj").unwrap());
    assert!(dot(&k1.iter().map(|z| z.conj()).collect::<Vec<_>>(), &k2).norm() < 1e-12);
}

#[test]
fn periodic_wiener_by_hand() {
    // |k(d_k)|² = l(d_{-k} d_k) = ρ_{-k} = 1/ρ_k.
    let alg = builtins::periodic_wiener(2, &[2.0, 3.0]).unwrap();
    let rep = FundamentalRep::build(&alg).unwrap();
    assert_eq!(rep.hdim(), 4);
    for (label, sq) in [("d1", 0.5), ("dm1", 2.0), ("d2", 1.0 / 3.0), ("dm2", 3.0)] {
        let k = rep.k_of(&alg.element(label).unwrap());
        assert!((norm(&k).powi(2) - sq).abs() < 1e-12, "{label}");
    }
}

#[test]
fn thermal_matrix_by_hand() {
    // l(ξ* ζ) = tr(diag(ρ) ξ† ζ): |k(x_pq)|² = ρ_q and i(x_pq) is a partial isometry.
    let rho = [2.0 / 3.0, 1.0 / 3.0];
    let alg = builtins::thermal_matrix(2, &rho).unwrap();
    let rep = FundamentalRep::build(&alg).unwrap();
    assert_eq!(rep.hdim(), 4);
    for p in 1..=2 {
        for q in 1..=2 {
            let a = alg.element(&format!("x{p}_{q}")).unwrap();
            assert!((norm(&rep.k_of(&a)).powi(2) - rho[q - 1]).abs() < 1e-12);
            assert!((op_norm(&rep.i_of(&a)) - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn hp_by_hand() {
    for d in 1..=3 {
        let alg = builtins::hp(d).unwrap();
        let rep = FundamentalRep::build(&alg).unwrap();
        assert_eq!(rep.hdim(), d);
        let single = |s: &str| if d == 1 { s.to_string() } else { format!("{s}1") };
        let em = alg.element(&single("em")).unwrap();
        let ep = alg.element(&single("ep")).unwrap();
        assert!(norm(&rep.k_of(&em)) < 1e-12);
        assert!((norm(&rep.k_of(&ep)) - 1.0).abs() < 1e-12);
        assert!((norm(&rep.kdag_of(&em)) - 1.0).abs() < 1e-12);
        let e = if d == 1 { alg.element("e").unwrap() } else { alg.element("e1_1").unwrap() };
        let i = rep.i_of(&e);
        assert!(op_norm(&(&i * &i - &i)) < 1e-12);
        assert!((op_norm(&i) - 1.0).abs() < 1e-12);
    }
}

fn random_element(rng: &mut ChaCha8Rng, dim: usize) -> Element {
    Element::new(
        (0..dim)
            .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect(),
    )
}

#[test]
fn dense_fock_model_agrees() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for (alg, rep) in faithful_catalog().into_iter().filter(|(_, r)| r.hdim() <= 2) {
        let a = random_element(&mut rng, alg.dim());
        let (t, slots) = (0.9, 3);
        let s = slot_increment(&rep, &a, t / slots as f64).unwrap().matrix;
        let w = s.nrows();
        let id = CMatrix::identity(w, w);
        let mut total = CMatrix::zeros(w.pow(slots as u32), w.pow(slots as u32));
        for j in 0..slots {
            let mut term = CMatrix::identity(1, 1);
            for p in 0..slots {
                term = term.kronecker(if p == j { &s } else { &id });
            }
            total += term;
        }
        let psi = total.column(0);
        let r = vacuum_moments(&rep, &alg, &a, t, slots).unwrap();
        let mean = C64::new(r.get("mean_re").unwrap().value, r.get("mean_im").unwrap().value);
        assert!((mean - psi[0]).norm() < 1e-12, "{}", alg.name());
        let second = psi.iter().map(|z| z.norm_sqr()).sum::<f64>();
        assert!((r.get("second_moment").unwrap().value - second).abs() < 1e-12, "{}", alg.name());
    }
}

#[test]
fn second_moment_has_a_closed_form() {
    // ‖Λ_N Ω‖² = |l(a)|² t² + t l(a* a) for every N: no i-block contribution.
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for (alg, rep) in faithful_catalog() {
        let a = random_element(&mut rng, alg.dim());
        let l = alg.state_of(&a).unwrap();
        let lsq = alg.state_of(&alg.multiply(&alg.star(&a).unwrap(), &a).unwrap()).unwrap().re;
        for n in [1, 2, 5, 17, 64] {
            let t = 1.3;
            let r = vacuum_moments(&rep, &alg, &a, t, n).unwrap();
            let want = l.norm_sqr() * t * t + t * lsq;
            let got = r.get("second_moment").unwrap().value;
            assert!((got - want).abs() < 1e-10 * want.max(1.0), "{} N={n}: {got} vs {want}", alg.name());
        }
    }
}
