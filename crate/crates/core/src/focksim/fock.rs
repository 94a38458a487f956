//! Vacuum moments of `Λ_N(t, a) = Σ_j S_j(a)` on `N` slots.
//!
//! States are kept sparse: a configuration lists the excited slots and their
//! mode in `𝓗•`, all other slots sitting in the vacuum `ℂ` component.

use std::collections::BTreeMap;
use std::time::Instant;

use super::report::{Series, SimReport, Slope};
use super::slot_increment;
use crate::algebra::{Element, ItoAlgebra};
use crate::error::{Error, Result};
use crate::gns::FundamentalRep;
use crate::linalg::{self, czero, CMatrix};
use crate::report::Check;
use crate::C64;

/// Default bound on stored amplitudes.
pub const DEFAULT_STATE_CAP: usize = 1 << 20;

/// Sorted `(slot, mode)` pairs with `mode >= 1`.
type Config = Vec<(u32, u32)>;

#[derive(Clone, Debug, Default)]
pub(crate) struct FockState {
    amps: BTreeMap<Config, C64>,
}

impl FockState {
    pub(crate) fn vacuum() -> Self {
        let mut amps = BTreeMap::new();
        amps.insert(Vec::new(), C64::new(1.0, 0.0));
        Self { amps }
    }

    pub(crate) fn len(&self) -> usize {
        self.amps.len()
    }

    pub(crate) fn norm_sqr(&self) -> f64 {
        self.amps.values().map(|z| z.norm_sqr()).sum()
    }

    pub(crate) fn vacuum_amplitude(&self) -> C64 {
        self.amps.get(&Vec::new()).copied().unwrap_or(czero())
    }

    /// Applies `Σ_j S_j` where `S_j` acts as `s` on slot `j`.
    pub(crate) fn apply_sum(&self, s: &CMatrix, slots: usize, cap: usize) -> Result<Self> {
        let width = s.nrows();
        let mut out: BTreeMap<Config, C64> = BTreeMap::new();
        for (cfg, amp) in &self.amps {
            for slot in 0..slots as u32 {
                let pos = cfg.binary_search_by_key(&slot, |&(sl, _)| sl);
                let local = match pos {
                    Ok(p) => cfg[p].1 as usize,
                    Err(_) => 0,
                };
                for target in 0..width {
                    let coef = s[(target, local)];
                    if coef == czero() {
                        continue;
                    }
                    let mut next = cfg.clone();
                    match (pos, target) {
                        (Ok(p), 0) => {
                            next.remove(p);
                        }
                        (Ok(p), t) => next[p].1 = t as u32,
                        (Err(_), 0) => {}
                        (Err(p), t) => next.insert(p, (slot, t as u32)),
                    }
                    *out.entry(next).or_insert(czero()) += amp * coef;
                    if out.len() > cap {
                        return Err(Error::MemoryCap {
                            required: out.len(),
                            cap,
                        });
                    }
                }
            }
        }
        Ok(Self { amps: out })
    }
}

/// [`vacuum_moments_with_cap`] at [`DEFAULT_STATE_CAP`].
pub fn vacuum_moments(
    rep: &FundamentalRep,
    alg: &ItoAlgebra,
    a: &Element,
    t: f64,
    slots: usize,
) -> Result<SimReport> {
    vacuum_moments_with_cap(rep, alg, a, t, slots, DEFAULT_STATE_CAP)
}

/// Vacuum mean `⟨Λ⟩` and second moment `⟨Λ†Λ⟩` of `Λ_N(t, a)`.
pub fn vacuum_moments_with_cap(
    rep: &FundamentalRep,
    alg: &ItoAlgebra,
    a: &Element,
    t: f64,
    slots: usize,
    cap: usize,
) -> Result<SimReport> {
    let start = Instant::now();
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::InvalidParameter(format!("horizon must be positive, got {t}")));
    }
    if slots == 0 {
        return Err(Error::InvalidParameter("at least one slot is required".into()));
    }
    let required = 1 + slots * rep.hdim();
    if required > cap {
        return Err(Error::MemoryCap { required, cap });
    }
    let dt = t / slots as f64;
    let s = slot_increment(rep, a, dt)?.matrix;
    let psi = FockState::vacuum().apply_sum(&s, slots, cap)?;
    let mean = psi.vacuum_amplitude();
    let second = psi.norm_sqr();
    let la = alg.state_of(a)?;
    let target_mean = la * t;
    let lsq = alg.state_of(&alg.multiply(&alg.star(a)?, a)?)?.re;
    let target_second = lsq * t;

    let mut report = SimReport::new("fock", alg.name());
    report.input("t", t);
    report.input("slots", slots as f64);
    report.input("dt", dt);
    report.input("states", psi.len() as f64);
    report.estimate("mean_re", mean.re, 0.0, Some(target_mean.re));
    report.estimate("mean_im", mean.im, 0.0, Some(target_mean.im));
    report.estimate("second_moment", second, 0.0, Some(target_second));
    report.estimate("second_moment_deviation", second - target_second, 0.0, None);
    let mean_err = (mean - target_mean).norm() / target_mean.norm().max(1.0);
    report.checks.push(Check::within("mean_exact", mean_err, 1e-12));
    report.runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(report)
}

/// Second-moment deviation from `l(a*·a)t` across slot counts, fitted against
/// `Δt = t/N`; first order means a slope in `[0.8, 1.2]`.
pub fn second_moment_convergence(
    rep: &FundamentalRep,
    alg: &ItoAlgebra,
    a: &Element,
    t: f64,
    slot_counts: &[usize],
) -> Result<SimReport> {
    let start = Instant::now();
    let mut dts = Vec::with_capacity(slot_counts.len());
    let mut devs = Vec::with_capacity(slot_counts.len());
    let mut mean_err: f64 = 0.0;
    for &n in slot_counts {
        let r = vacuum_moments(rep, alg, a, t, n)?;
        dts.push(t / n as f64);
        devs.push(r.get("second_moment_deviation").map(|e| e.value.abs()).unwrap_or(f64::NAN));
        mean_err = mean_err.max(r.check("mean_exact").map(|c| c.residual).unwrap_or(f64::NAN));
    }
    let slope = linalg::loglog_slope(&dts, &devs, 1e-13);
    let mut report = SimReport::new("fock_convergence", alg.name());
    report.input("t", t);
    report.input("runs", slot_counts.len() as f64);
    report.checks.push(Check::within("mean_exact", mean_err, 1e-12));
    report.checks.push(Check::flag(
        "second_moment_first_order",
        matches!(slope, Some(s) if (0.8..=1.2).contains(&s)),
    ));
    report.slopes.push(Slope {
        name: "second_moment_deviation".into(),
        value: slope,
    });
    report.series.push(Series {
        name: "second_moment_deviation".into(),
        x: dts,
        y: devs,
    });
    report.runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins;

    #[test]
    fn death_moments() {
        let w = builtins::wiener();
        let rep = FundamentalRep::build(&w).unwrap();
        let r = vacuum_moments(&rep, &w, &w.death(), 2.0, 8).unwrap();
        assert_eq!(r.get("mean_re").unwrap().value, 2.0);
        assert!((r.get("second_moment").unwrap().value - 4.0).abs() < 1e-12);
    }

    #[test]
    fn wiener_second_moment_is_exact() {
        let w = builtins::wiener();
        let rep = FundamentalRep::build(&w).unwrap();
        for e in 1..=6 {
            let r = vacuum_moments(&rep, &w, &w.element("dw").unwrap(), 1.0, 1 << e).unwrap();
            assert!((r.get("second_moment").unwrap().value - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn memory_cap_is_enforced() {
        let h = builtins::hp(3).unwrap();
        let rep = FundamentalRep::build(&h).unwrap();
        let err = vacuum_moments_with_cap(&rep, &h, &h.element("ep1").unwrap(), 1.0, 100, 50).unwrap_err();
        assert_eq!(err, Error::MemoryCap { required: 301, cap: 50 });
    }

    #[test]
    fn repeated_application_matches_dense_square() {
        // Λ² Ω against a dense two-slot computation.
        let p = builtins::poisson();
        let rep = FundamentalRep::build(&p).unwrap();
        let a = &p.death() + &p.element("dm").unwrap();
        let s = slot_increment(&rep, &a, 0.5).unwrap().matrix;
        let psi = FockState::vacuum().apply_sum(&s, 2, 1 << 10).unwrap();
        let psi2 = psi.apply_sum(&s, 2, 1 << 10).unwrap();
        let id = CMatrix::identity(2, 2);
        let big = s.kronecker(&id) + id.kronecker(&s);
        let mut vac = CMatrix::zeros(4, 1);
        vac[(0, 0)] = C64::new(1.0, 0.0);
        let dense = &big * &big * &vac;
        let dense_norm: f64 = dense.iter().map(|z| z.norm_sqr()).sum();
        assert!((psi2.norm_sqr() - dense_norm).abs() < 1e-12);
        assert!((psi2.vacuum_amplitude() - dense[(0, 0)]).norm() < 1e-12);
    }
}
