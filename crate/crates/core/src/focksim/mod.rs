//! Numerical cross-checks of the multiplication table: a discrete toy-Fock
//! model of the integrators and a classical Monte Carlo sampler.
//!
//! One time slot carries the space `ℂ ⊕ 𝓗•`. The increment of `Λ(a)` on a
//! slot of length `Δt` is `[[l(a)Δt, k†(a)√Δt], [k(a)√Δt, i(a)]]`.

mod classical;
mod fock;
mod report;

use std::time::Instant;

pub use classical::classical_paths;
pub use fock::{second_moment_convergence, vacuum_moments, vacuum_moments_with_cap, DEFAULT_STATE_CAP};
pub use report::{Estimate, Series, SimReport, Slope};

use crate::algebra::{Element, ItoAlgebra};
use crate::error::{Error, Result};
use crate::gns::FundamentalRep;
use crate::linalg::{self, CMatrix};
use crate::report::Check;
use crate::C64;

/// `(1 + d•) × (1 + d•)` increment on one slot.
#[derive(Clone, Debug, PartialEq)]
pub struct SlotIncrement {
    pub matrix: CMatrix,
    pub dt: f64,
}

pub fn slot_increment(rep: &FundamentalRep, a: &Element, dt: f64) -> Result<SlotIncrement> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidParameter(format!("time step must be positive, got {dt}")));
    }
    if a.dim() != rep.dim() {
        return Err(Error::DimensionMismatch {
            expected: rep.dim(),
            found: a.dim(),
        });
    }
    let d = rep.hdim();
    let s = C64::new(dt.sqrt(), 0.0);
    let mut m = CMatrix::zeros(d + 1, d + 1);
    m[(0, 0)] = rep.l_of(a) * dt;
    for (r, z) in rep.kdag_of(a).into_iter().enumerate() {
        m[(0, 1 + r)] = z * s;
    }
    for (r, z) in rep.k_of(a).into_iter().enumerate() {
        m[(1 + r, 0)] = z * s;
    }
    m.view_mut((1, 1), (d, d)).copy_from(&rep.i_of(a));
    Ok(SlotIncrement { matrix: m, dt })
}

/// Blockwise mismatch `S(a)S(b) - S(a·b)` over a decreasing list of steps.
///
/// The corner mismatch is `l(a)l(b)Δt²`, the off-diagonal blocks are
/// `O(Δt^{3/2})`, and the exchange block carries `k(a)k†(b)Δt`; the first two
/// are checked, the exchange block is only reported.
pub fn ito_product_check(
    rep: &FundamentalRep,
    alg: &ItoAlgebra,
    a: &Element,
    b: &Element,
    dts: &[f64],
) -> Result<SimReport> {
    let start = Instant::now();
    if dts.len() < 2 || dts.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidParameter("time steps must be strictly decreasing, at least two".into()));
    }
    let ab = alg.multiply(a, b)?;
    let mut corner = Vec::with_capacity(dts.len());
    let mut off = Vec::with_capacity(dts.len());
    let mut exchange = Vec::with_capacity(dts.len());
    let mut closed: f64 = 0.0;
    let lab = (rep.l_of(a) * rep.l_of(b)).norm();
    for &dt in dts {
        let sa = slot_increment(rep, a, dt)?.matrix;
        let sb = slot_increment(rep, b, dt)?.matrix;
        let sab = slot_increment(rep, &ab, dt)?.matrix;
        let diff = &sa * &sb - sab;
        let d = rep.hdim();
        let c = diff[(0, 0)].norm();
        let row = if d > 0 { linalg::max_abs(&diff.view((0, 1), (1, d)).into_owned()) } else { 0.0 };
        let col = if d > 0 { linalg::max_abs(&diff.view((1, 0), (d, 1)).into_owned()) } else { 0.0 };
        let ex = if d > 0 { linalg::op_norm(&diff.view((1, 1), (d, d)).into_owned()) } else { 0.0 };
        closed = closed.max((c - lab * dt * dt).abs() / (lab.max(1.0) * dt * dt));
        corner.push(c);
        off.push(row.max(col));
        exchange.push(ex);
    }
    let floor = 1e-13;
    let mut report = SimReport::new("ito_product", alg.name());
    report.input("steps", dts.len() as f64);
    report.input("dt_max", dts[0]);
    report.input("dt_min", dts[dts.len() - 1]);
    let corner_slope = linalg::loglog_slope(dts, &corner, floor);
    let off_slope = linalg::loglog_slope(dts, &off, floor);
    let ex_slope = linalg::loglog_slope(dts, &exchange, floor);
    let order_ok = |slope: Option<f64>, ys: &[f64], lo: f64, hi: f64| match slope {
        Some(s) => s >= lo && s <= hi,
        None => ys.iter().all(|&y| y <= floor),
    };
    report.checks.push(Check::within("corner_closed_form", closed, 1e-6));
    report.checks.push(Check::flag("corner_order", order_ok(corner_slope, &corner, 1.8, 2.2)));
    report.checks.push(Check::flag("offdiag_order", order_ok(off_slope, &off, 1.3, 1.7)));
    report.slopes = vec![
        Slope { name: "corner".into(), value: corner_slope },
        Slope { name: "offdiag".into(), value: off_slope },
        Slope { name: "exchange".into(), value: ex_slope },
    ];
    for (name, ys) in [("corner", corner), ("offdiag", off), ("exchange", exchange)] {
        report.series.push(Series {
            name: name.into(),
            x: dts.to_vec(),
            y: ys,
        });
    }
    report.runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(report)
}

/// Steps `2^-lo ..= 2^-hi`.
pub fn dyadic_steps(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|e| 2f64.powi(-e)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins;

    fn rep(alg: &ItoAlgebra) -> FundamentalRep {
        FundamentalRep::build(alg).unwrap()
    }

    #[test]
    fn death_increment_is_a_corner() {
        let w = builtins::wiener();
        let s = slot_increment(&rep(&w), &w.death(), 0.25).unwrap().matrix;
        assert_eq!(s[(0, 0)], C64::new(0.25, 0.0));
        assert_eq!(s.iter().filter(|z| z.norm() != 0.0).count(), 1);
        assert!(slot_increment(&rep(&w), &w.death(), 0.0).is_err());
    }

    #[test]
    fn wiener_increment_scaling() {
        let w = builtins::wiener();
        let s = slot_increment(&rep(&w), &w.element("dw").unwrap(), 0.01).unwrap().matrix;
        assert!((s[(0, 1)].norm() - 0.1).abs() < 1e-15);
        assert!((s[(1, 0)].norm() - 0.1).abs() < 1e-15);
        assert_eq!(s[(0, 0)].norm() + s[(1, 1)].norm(), 0.0);
    }

    #[test]
    fn adjoint_covariance() {
        let h = builtins::hp(1).unwrap();
        let r = rep(&h);
        let em = slot_increment(&r, &h.element("em").unwrap(), 0.3).unwrap().matrix;
        let ep = slot_increment(&r, &h.element("ep").unwrap(), 0.3).unwrap().matrix;
        assert!(linalg::max_abs(&(em.adjoint() - ep)) < 1e-15);
    }

    #[test]
    fn product_check_cases() {
        let dts = dyadic_steps(4, 10);
        let w = builtins::wiener();
        let dw = w.element("dw").unwrap();
        let rep_w = rep(&w);
        let r = ito_product_check(&rep_w, &w, &dw, &dw, &dts).unwrap();
        assert!(r.passed(), "{:?}", r.checks);
        assert!(r.series[0].y.iter().all(|&c| c < 1e-15));

        let h = builtins::hp(1).unwrap();
        let e = h.element("e").unwrap();
        let r = ito_product_check(&rep(&h), &h, &e, &e, &dts).unwrap();
        assert!(r.passed());
        assert!(r.series[2].y.iter().all(|&c| c < 1e-15));

        let p = builtins::poisson();
        let x = &p.death() + &p.element("dm").unwrap();
        let r = ito_product_check(&rep(&p), &p, &x, &x, &dts).unwrap();
        assert!(r.passed(), "{:?}", r.checks);
        let slope = r.slope("corner").unwrap();
        assert!((slope - 2.0).abs() < 1e-6);
        assert!((r.slope("offdiag").unwrap() - 1.5).abs() < 1e-6);
        assert!(ito_product_check(&rep_w, &w, &dw, &dw, &[0.1, 0.2]).is_err());
    }
}
