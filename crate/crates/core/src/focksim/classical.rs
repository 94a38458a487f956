//! Monte Carlo paths for commutative algebras with a self-adjoint basis.
//!
//! Each zero-mean direction is driven by independent Wiener processes on the
//! Brownian support `P𝓗•` and compensated Poisson processes on the joint
//! eigenvectors of `i(·)` in `E𝓗•`:
//! `Δx = l(x)Δt + Σ_o β_o(x) ΔW_o + Σ_r χ_r(x) (ΔN_r - ν_r Δt)`.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use rayon::prelude::*;

use super::report::SimReport;
use crate::algebra::ItoAlgebra;
use crate::decomp;
use crate::error::{Error, Result};
use crate::gns::FundamentalRep;
use crate::linalg::{self, CMatrix};
use crate::report::Check;
use crate::C64;

const CHUNK: usize = 1024;

/// Real noise model: drifts, Gaussian loadings and jump data per direction.
#[derive(Clone, Debug)]
struct NoiseModel {
    labels: Vec<String>,
    drift: Vec<f64>,
    /// `gauss[o][x]`
    gauss: Vec<Vec<f64>>,
    /// `(ν_r, χ_r(x) for each x)`
    jumps: Vec<(f64, Vec<f64>)>,
    /// `l(x·y)` for the variance and covariance targets.
    pair: Vec<Vec<f64>>,
}

fn unsupported(msg: impl Into<String>) -> Error {
    Error::Unsupported(msg.into())
}

fn real(z: C64, what: &str, tol: f64) -> Result<f64> {
    if z.im.abs() > tol * z.norm().max(1.0) {
        Err(unsupported(format!("{what} is not real ({z})")))
    } else {
        Ok(z.re)
    }
}

fn noise_model(alg: &ItoAlgebra) -> Result<NoiseModel> {
    if !alg.is_commutative() {
        return Err(unsupported("classical paths need a commutative algebra"));
    }
    let tol = alg.tol();
    let death = alg.death_index().ok_or_else(|| unsupported("death must be a basis element"))?;
    let dirs: Vec<usize> = (0..alg.dim()).filter(|&j| j != death).collect();
    for &j in &dirs {
        let a = alg.basis_element(j);
        if (&alg.star(&a)? - &a).max_abs() > tol {
            return Err(unsupported(format!("basis element `{}` is not self-adjoint", alg.labels()[j])));
        }
    }
    let rep = FundamentalRep::build(alg)?;
    let d = rep.hdim();
    let dec = decomp::decompose(alg)?;
    let p = &dec.projector;
    let e = &dec.complement;

    // Brownian directions: orthonormal real basis of span{P k(x)}.
    let mut gauss_dirs: Vec<nalgebra::DVector<C64>> = Vec::new();
    for &j in &dirs {
        let k = rep.k_of(&alg.basis_element(j));
        let mut v = p * nalgebra::DVector::from_vec(k);
        for o in &gauss_dirs {
            let c = o.dotc(&v);
            v -= o * c;
        }
        let norm = v.norm();
        if norm > tol.sqrt() {
            gauss_dirs.push(v / C64::new(norm, 0.0));
        }
    }
    let mut gauss = Vec::with_capacity(gauss_dirs.len());
    for o in &gauss_dirs {
        let mut row = Vec::with_capacity(dirs.len());
        for &j in &dirs {
            let a = alg.basis_element(j);
            let kd = CMatrix::from_row_slice(1, d, &rep.kdag_of(&a));
            let k = nalgebra::DVector::from_vec(rep.k_of(&a));
            let left = (kd * o)[(0, 0)];
            let right = o.dotc(&k);
            if (left - right).norm() > tol.sqrt() {
                return Err(unsupported("Gaussian loadings are inconsistent with the star"));
            }
            row.push(real(left, "Gaussian loading", tol.sqrt())?);
        }
        gauss.push(row);
    }

    // Jump directions: joint eigenvectors of i(·) on the range of E.
    let (evals, evecs) = linalg::hermitian_eigen(e);
    let range: Vec<usize> = (0..evals.len()).filter(|&r| evals[r] > 0.5).collect();
    let q = evecs.select_columns(&range);
    let mut jumps = Vec::new();
    if !range.is_empty() {
        // A generic real combination separates the joint eigenspaces.
        let mut mix = CMatrix::zeros(range.len(), range.len());
        for (c, &j) in dirs.iter().enumerate() {
            let w = 1.0 + 0.6180339887498949 * (c as f64 + 1.0).sqrt();
            mix += q.adjoint() * rep.i_of(&alg.basis_element(j)) * &q * C64::new(w, 0.0);
        }
        let (_, u) = linalg::hermitian_eigen(&mix);
        let basis = &q * u;
        for r in 0..basis.ncols() {
            let ur = basis.column(r).into_owned();
            let mut chis = Vec::with_capacity(dirs.len());
            let mut nu: Option<C64> = None;
            for &j in &dirs {
                let a = alg.basis_element(j);
                let iu = rep.i_of(&a) * &ur;
                let chi = ur.dotc(&iu);
                if (iu - &ur * chi).norm() > tol.sqrt() {
                    return Err(unsupported("GNS operators are not jointly diagonal"));
                }
                let chi = real(chi, "jump size", tol.sqrt())?;
                if chi.abs() > tol.sqrt() {
                    let kr = ur.dotc(&nalgebra::DVector::from_vec(rep.k_of(&a)));
                    let kdr = (CMatrix::from_row_slice(1, d, &rep.kdag_of(&a)) * &ur)[(0, 0)];
                    let candidate = kr * kdr / (chi * chi);
                    if let Some(prev) = nu {
                        if (prev - candidate).norm() > tol.sqrt() * prev.norm().max(1.0) {
                            return Err(unsupported("jump intensity differs between directions"));
                        }
                    } else {
                        nu = Some(candidate);
                    }
                }
                chis.push(chi);
            }
            let nu = nu.ok_or_else(|| unsupported("jump direction without support"))?;
            let nu = real(nu, "jump intensity", tol.sqrt())?;
            if nu <= 0.0 {
                return Err(unsupported(format!("jump intensity {nu} is not positive")));
            }
            jumps.push((nu, chis));
        }
    }

    let drift = dirs
        .iter()
        .map(|&j| real(alg.state()[j], "state", tol))
        .collect::<Result<Vec<_>>>()?;
    let mut pair = vec![vec![0.0; dirs.len()]; dirs.len()];
    for (x, &jx) in dirs.iter().enumerate() {
        for (y, &jy) in dirs.iter().enumerate() {
            let prod = alg.multiply(&alg.basis_element(jx), &alg.basis_element(jy))?;
            pair[x][y] = real(alg.state_of(&prod)?, "second moment", tol)?;
        }
    }
    Ok(NoiseModel {
        labels: dirs.iter().map(|&j| alg.labels()[j].clone()).collect(),
        drift,
        gauss,
        jumps,
        pair,
    })
}

/// Per-path output: terminal values and step averages of `ΔxΔy/Δt`.
struct PathStats {
    terminal: Vec<f64>,
    cross: Vec<f64>,
}

fn simulate_chunk(model: &NoiseModel, seed: u64, task: usize, paths: usize, steps: usize, dt: f64) -> Vec<PathStats> {
    let m = model.drift.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(task as u64);
    let normal = Normal::new(0.0, dt.sqrt()).expect("positive step");
    let poissons: Vec<Option<Poisson<f64>>> = model
        .jumps
        .iter()
        .map(|(nu, _)| Poisson::new(nu * dt).ok())
        .collect();
    let mut out = Vec::with_capacity(paths);
    let mut dx = vec![0.0; m];
    for _ in 0..paths {
        let mut x = vec![0.0; m];
        let mut cross = vec![0.0; m * m];
        for _ in 0..steps {
            for (v, drift) in dx.iter_mut().zip(&model.drift) {
                *v = drift * dt;
            }
            for row in &model.gauss {
                let w = normal.sample(&mut rng);
                for (v, b) in dx.iter_mut().zip(row) {
                    *v += b * w;
                }
            }
            for ((nu, chis), dist) in model.jumps.iter().zip(&poissons) {
                let count = dist.as_ref().map(|p| p.sample(&mut rng)).unwrap_or(0.0);
                let comp = count - nu * dt;
                for (v, chi) in dx.iter_mut().zip(chis) {
                    *v += chi * comp;
                }
            }
            for a in 0..m {
                x[a] += dx[a];
                for b in 0..m {
                    cross[a * m + b] += dx[a] * dx[b] / dt;
                }
            }
        }
        for c in cross.iter_mut() {
            *c /= steps as f64;
        }
        out.push(PathStats { terminal: x, cross });
    }
    out
}

fn mean_and_se(values: impl Iterator<Item = f64> + Clone, n: usize) -> (f64, f64) {
    let nf = n as f64;
    let mean = values.clone().sum::<f64>() / nf;
    let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / (nf - 1.0).max(1.0);
    (mean, (var / nf).sqrt())
}

/// Samples `n_paths` paths on `[0, t]` with step `dt` and reports, for every
/// non-death basis element `x`, the mean and variance of `x(t)` and the step
/// averages `E[ΔxΔy]/Δt` against `l(x·y)`, each with standard errors.
pub fn classical_paths(alg: &ItoAlgebra, t: f64, dt: f64, n_paths: usize, seed: u64) -> Result<SimReport> {
    let start = Instant::now();
    if !(t.is_finite() && t > 0.0 && dt.is_finite() && dt > 0.0 && dt <= t) {
        return Err(Error::InvalidParameter(format!("need 0 < dt <= t, got t={t}, dt={dt}")));
    }
    if n_paths < 2 {
        return Err(Error::InvalidParameter("need at least two paths".into()));
    }
    let model = noise_model(alg)?;
    let steps = (t / dt).round().max(1.0) as usize;
    let dt = t / steps as f64;
    let tasks: Vec<(usize, usize)> = (0..n_paths.div_ceil(CHUNK))
        .map(|c| (c, CHUNK.min(n_paths - c * CHUNK)))
        .collect();
    let chunks: Vec<Vec<PathStats>> = tasks
        .par_iter()
        .map(|&(task, count)| simulate_chunk(&model, seed, task, count, steps, dt))
        .collect();
    let stats: Vec<PathStats> = chunks.into_iter().flatten().collect();

    let m = model.labels.len();
    let mut report = SimReport::new("classical", alg.name());
    report.input("t", t);
    report.input("dt", dt);
    report.input("paths", n_paths as f64);
    report.input("steps", steps as f64);
    report.seed = Some(seed);
    let within = |report: &mut SimReport, name: String, value: f64, se: f64, target: f64| {
        report.estimate(name.clone(), value, se, Some(target));
        let z = if se > 0.0 { (value - target).abs() / se } else if value == target { 0.0 } else { f64::INFINITY };
        report.checks.push(Check::within(format!("within_3se:{name}"), z, 3.0));
    };
    for a in 0..m {
        let label = &model.labels[a];
        let xs = stats.iter().map(|s| s.terminal[a]);
        let (mean, se) = mean_and_se(xs.clone(), n_paths);
        within(&mut report, format!("mean:{label}"), mean, se, model.drift[a] * t);
        let nf = n_paths as f64;
        let m2 = xs.clone().map(|v| (v - mean).powi(2)).sum::<f64>() / nf;
        let m4 = xs.map(|v| (v - mean).powi(4)).sum::<f64>() / nf;
        let var = m2 * nf / (nf - 1.0);
        let var_se = ((m4 - m2 * m2).max(0.0) / nf).sqrt();
        within(&mut report, format!("var:{label}"), var, var_se, model.pair[a][a] * t);
    }
    for a in 0..m {
        for b in a..m {
            let name = format!("cov:{}:{}", model.labels[a], model.labels[b]);
            let (mean, se) = mean_and_se(stats.iter().map(|s| s.cross[a * m + b]), n_paths);
            let target = model.pair[a][b] + model.drift[a] * model.drift[b] * dt;
            within(&mut report, name, mean, se, target);
        }
    }
    report.runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins;

    #[test]
    fn noncommutative_is_unsupported() {
        let h = builtins::hp(1).unwrap();
        assert!(matches!(classical_paths(&h, 1.0, 0.1, 100, 1), Err(Error::Unsupported(_))));
    }

    #[test]
    fn non_self_adjoint_basis_is_unsupported() {
        let pw = builtins::periodic_wiener(1, &[1.0]).unwrap();
        assert!(matches!(classical_paths(&pw, 1.0, 0.1, 100, 1), Err(Error::Unsupported(_))));
    }

    #[test]
    fn noise_model_of_sum() {
        let s = builtins::orthogonal_sum(&builtins::wiener(), &builtins::poisson()).unwrap();
        let m = noise_model(&s).unwrap();
        assert_eq!(m.labels, vec!["dw", "dm"]);
        assert_eq!(m.gauss.len(), 1);
        assert!((m.gauss[0][0].abs() - 1.0).abs() < 1e-12);
        assert!(m.gauss[0][1].abs() < 1e-12);
        assert_eq!(m.jumps.len(), 1);
        assert!((m.jumps[0].0 - 1.0).abs() < 1e-12);
        assert!((m.jumps[0].1[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reproducible_for_a_seed() {
        let w = builtins::wiener();
        let a = classical_paths(&w, 1.0, 0.1, 3000, 7).unwrap();
        let b = classical_paths(&w, 1.0, 0.1, 3000, 7).unwrap();
        assert_eq!(a.estimates, b.estimates);
        let c = classical_paths(&w, 1.0, 0.1, 3000, 8).unwrap();
        assert_ne!(a.estimates, c.estimates);
    }

    #[test]
    fn scaled_poisson_intensity() {
        let tm = builtins::thermal_matrix(1, &[2.5]).unwrap();
        let m = noise_model(&tm).unwrap();
        assert!((m.jumps[0].0 - 2.5).abs() < 1e-12);
    }
}
