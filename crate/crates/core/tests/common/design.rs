//! Design fixtures and the exhaustive N = 2, K = 1 grid oracle.

use std::f64::consts::PI;

use num_complex::Complex64;
use secure_dfrc::beampattern::{rect_pattern, solve_desired_covariance};
use secure_dfrc::conic::SolverOptions;
use secure_dfrc::linalg::{ComplexMatrix, HermitianMatrix};
use secure_dfrc::scenario::{sample_channel, AngularGrid, Scenario, TargetModel, UlaGeometry};

pub const SIGMA2: f64 = 1e-3;
pub const P0: f64 = 1.0;

pub fn scenario(n: usize, k: usize, seed: u64, delta_theta_deg: f64) -> Scenario {
    Scenario::new(
        UlaGeometry::half_wavelength(n).unwrap(),
        sample_channel(k, n, seed).unwrap(),
        SIGMA2,
        TargetModel::new(0.0, delta_theta_deg.to_radians(), Complex64::new(1.0, 0.0)).unwrap(),
        P0,
        32,
    )
    .unwrap()
}

pub fn grid() -> AngularGrid {
    AngularGrid::full_range(1.0).unwrap()
}

/// Desired covariance for a ±10° rectangular mainlobe at broadside.
pub fn desired(n: usize, p0: f64) -> HermitianMatrix {
    let geom = UlaGeometry::half_wavelength(n).unwrap();
    let pat = rect_pattern(&grid(), 0.0, 10f64.to_radians()).unwrap();
    solve_desired_covariance(&pat, &geom, p0, &SolverOptions::default()).unwrap().r_d
}

/// Two-antenna, one-user scenario with σ² = 0.1 and the target at
/// broadside.
pub fn two_antenna(seed: u64) -> Scenario {
    Scenario::new(
        UlaGeometry::half_wavelength(2).unwrap(),
        sample_channel(1, 2, seed).unwrap(),
        0.1,
        TargetModel::new(0.0, 0.0, Complex64::new(1.0, 0.0)).unwrap(),
        1.0,
        32,
    )
    .unwrap()
}

/// A user SINR floor halfway between what a beam with a null at broadside
/// can deliver and the matched-filter maximum, so the eavesdropper cannot be
/// nulled outright.
pub fn unnullable_gamma_b(scn: &Scenario) -> f64 {
    let h = row(&scn.channel);
    let p0 = scn.power_budget;
    // w ⟂ a(0) = (1, 1) means w ∝ (1, -1)/√2.
    let null = (h[0] - h[1]).norm_sqr() / 2.0;
    let full = h[0].norm_sqr() + h[1].norm_sqr();
    p0 * (null + 0.5 * (full - null)) / scn.noise_power
}

fn row(h: &ComplexMatrix) -> [Complex64; 2] {
    [h.get(0, 0), h.get(0, 1)]
}

/// Unit vector `(cos φ, sin φ e^{jψ})`.
fn unit(phi: f64, psi: f64) -> [Complex64; 2] {
    [Complex64::new(phi.cos(), 0.0), Complex64::from_polar(phi.sin(), psi)]
}

/// `|x^T v|²` for the user term `h^T W h^*` with `W = v v^H`.
fn user_gain(h: &[Complex64; 2], v: &[Complex64; 2]) -> f64 {
    (h[0] * v[0] + h[1] * v[1]).norm_sqr()
}

/// `|a^H v|²` with `a_n = exp(jπ n sin θ)`.
fn steer_gain(theta: f64, v: &[Complex64; 2]) -> f64 {
    let a1 = Complex64::from_polar(1.0, PI * theta.sin());
    (v[0] + a1.conj() * v[1]).norm_sqr()
}

struct Dir {
    g: f64,
    a0: f64,
    /// `a0 - a_m` per sidelobe angle (at most two).
    gap: [f64; 2],
}

fn directions(h: &[Complex64; 2], sidelobes: &[f64], points: usize) -> Vec<Dir> {
    let mut out = Vec::with_capacity(points * points);
    for i in 0..points {
        let phi = 0.5 * PI * i as f64 / (points - 1) as f64;
        for j in 0..points {
            let psi = 2.0 * PI * j as f64 / points as f64;
            let v = unit(phi, psi);
            out.push(Dir {
                g: user_gain(h, &v),
                a0: steer_gain(0.0, &v),
                gap: [0, 1].map(|m| sidelobes.get(m).map_or(f64::INFINITY, |&t| steer_gain(0.0, &v) - steer_gain(t, &v))),
            });
        }
    }
    out
}

/// Smallest eavesdropper SINR at broadside over `w = √p (cos φ, sin φ e^{jψ})`
/// and `R_N = (P0 - p) u u^H` with `u` parameterized the same way, subject to
/// the user SINR floor and, for each sidelobe angle, the gap
/// `a0^H R_X a0 - a_m^H R_X a_m ≥ γ_s`. `points` grid values per parameter;
/// `p` runs over `P0·k/points`, k = 1..points.
pub fn grid_min_sinr_eve(scn: &Scenario, gamma_b: f64, sidelobes: &[f64], gamma_s: f64, points: usize) -> Option<f64> {
    assert!(sidelobes.len() <= 2);
    let h = row(&scn.channel);
    let p0 = scn.power_budget;
    let s2 = scn.noise_power;
    let g2 = scn.target.gain_sq();
    let mut dirs = directions(&h, sidelobes, points);
    let mut best = f64::INFINITY;
    if sidelobes.is_empty() {
        // Only the user floor couples w and u: the best u is the one with
        // the largest broadside gain among those whose user leakage fits.
        dirs.sort_by(|x, y| x.g.total_cmp(&y.g));
        let mut prefix = Vec::with_capacity(dirs.len());
        let mut m = f64::NEG_INFINITY;
        for d in &dirs {
            m = m.max(d.a0);
            prefix.push(m);
        }
        for k in 1..=points {
            let p = p0 * k as f64 / points as f64;
            let q = p0 - p;
            for w in &dirs {
                let budget = p * w.g / gamma_b - s2;
                if budget < 0.0 {
                    continue;
                }
                let au = if q <= 0.0 {
                    0.0
                } else {
                    let cap = budget / q;
                    let idx = dirs.partition_point(|d| d.g <= cap);
                    if idx == 0 {
                        continue;
                    }
                    prefix[idx - 1]
                };
                best = best.min(g2 * p * w.a0 / (g2 * q * au + s2));
            }
        }
    } else {
        let max_a0 = dirs.iter().map(|d| d.a0).fold(0.0, f64::max);
        for k in 1..=points {
            let p = p0 * k as f64 / points as f64;
            let q = p0 - p;
            for w in &dirs {
                let budget = p * w.g / gamma_b - s2;
                // Skip beams that cannot beat the incumbent even with the
                // strongest possible jamming at broadside.
                if budget < 0.0 || g2 * p * w.a0 / (g2 * q * max_a0 + s2) >= best {
                    continue;
                }
                for u in &dirs {
                    if q * u.g > budget
                        || p * w.gap[0] + q * u.gap[0] < gamma_s
                        || p * w.gap[1] + q * u.gap[1] < gamma_s
                    {
                        continue;
                    }
                    best = best.min(g2 * p * w.a0 / (g2 * q * u.a0 + s2));
                }
            }
        }
    }
    best.is_finite().then_some(best)
}
