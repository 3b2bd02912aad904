//! Rank-one recovery from relaxed beamforming covariances.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Thresholds;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, psd_sqrt, CVector, HermitianMatrix, PSD_TOL};
use crate::scenario::{complex_normal, secrecy_rate_from_sinrs, sinr_eve, user_sinrs, Scenario};

/// Principal component `√λmax · u` with the first nonzero entry rotated to
/// the positive real axis, and the defect `1 - λmax / tr W`.
pub fn extract_rank1(w: &HermitianMatrix) -> Result<(CVector, f64)> {
    let n = w.dim();
    let tr = w.trace();
    let scale = w.frobenius_norm();
    if scale == 0.0 {
        return Ok((CVector::zeros(n), 0.0));
    }
    let eig = hermitian_eig(w)?;
    if eig.min_value() < -PSD_TOL * scale.max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "matrix is not PSD (min eigenvalue {:.3e})",
            eig.min_value()
        )));
    }
    let lam = eig.values[0].max(0.0);
    let mut v = eig.vector(0) * Complex64::new(lam.sqrt(), 0.0);
    fix_phase(&mut v);
    let defect = if tr > 0.0 { (1.0 - lam / tr).clamp(0.0, 1.0) } else { 0.0 };
    Ok((v, defect))
}

/// Rotates `v` so its first entry that is not negligible is real positive.
fn fix_phase(v: &mut CVector) {
    let peak = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return;
    }
    if let Some(z) = v.iter().find(|z| z.norm() > 1e-9 * peak).copied() {
        let rot = z.conj() / z.norm();
        v.iter_mut().for_each(|e| *e *= rot);
    }
}

#[derive(Debug, Clone)]
pub struct RandomizationOutcome {
    pub w_vecs: Vec<CVector>,
    pub secrecy_rate: f64,
    pub min_user_sinr: f64,
    pub sinr_eve: f64,
    /// Candidates that met every user SINR floor.
    pub feasible_trials: usize,
}

/// Draws `trials` candidate sets `ξ_i ~ CN(0, W_i)`, rescales each `ξ_i` to
/// power `tr W_i`, keeps those meeting the user SINR floor (with `R_N`
/// fixed) and returns the one with the highest secrecy rate at θ0. `None`
/// when no candidate is feasible.
pub fn gaussian_randomization(
    scn: &Scenario,
    thr: &Thresholds,
    w_list: &[HermitianMatrix],
    r_n: &HermitianMatrix,
    trials: usize,
    seed: u64,
) -> Result<Option<RandomizationOutcome>> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be >= 1".into()));
    }
    let n = r_n.dim();
    let roots = w_list.iter().map(psd_sqrt).collect::<Result<Vec<_>>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<RandomizationOutcome> = None;
    let mut feasible = 0;
    // Relaxed solutions sit on the SINR boundary; allow solver round-off.
    let floor = thr.gamma_b * (1.0 - 1e-7);
    for _ in 0..trials {
        let mut vecs = Vec::with_capacity(w_list.len());
        for (w, root) in w_list.iter().zip(&roots) {
            let z = CVector::from_fn(n, |_, _| complex_normal(&mut rng));
            let mut xi = root * z;
            let norm = xi.norm();
            if norm > 0.0 {
                xi *= Complex64::new(w.trace().max(0.0).sqrt() / norm, 0.0);
            }
            fix_phase(&mut xi);
            vecs.push(xi);
        }
        let cand: Vec<HermitianMatrix> = vecs.iter().map(HermitianMatrix::outer).collect();
        let users = user_sinrs(scn, &cand, r_n)?;
        let min_user = users.iter().copied().fold(f64::INFINITY, f64::min);
        if min_user < floor {
            continue;
        }
        feasible += 1;
        let eve = sinr_eve(scn, scn.target.theta0(), &cand, r_n)?;
        let sr = secrecy_rate_from_sinrs(&users, eve);
        if best.as_ref().is_none_or(|b| sr > b.secrecy_rate) {
            best = Some(RandomizationOutcome {
                w_vecs: vecs,
                secrecy_rate: sr,
                min_user_sinr: min_user,
                sinr_eve: eve,
                feasible_trials: 0,
            });
        }
    }
    Ok(best.map(|mut b| {
        b.feasible_trials = feasible;
        b
    }))
}
