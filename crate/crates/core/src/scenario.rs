//! System model: array geometry, steering vectors, channels, the transmit
//! covariance, SINR and secrecy-rate metrics, and waveform synthesis.
//!
//! Angles are radians here; degree conversion happens at the config/CSV
//! boundary.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, psd_sqrt, quadratic_form, CVector, ComplexMatrix, HermitianMatrix};

/// Rank-1 tolerance used by waveform synthesis: `1 - λmax/tr`.
pub const RANK1_TOL: f64 = 1e-6;

/// Slack on angle range checks, so grids built in degrees survive the
/// round trip through `to_radians`.
const ANGLE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UlaGeometry {
    n_antennas: usize,
    /// Element spacing in wavelengths.
    spacing: f64,
}

impl UlaGeometry {
    pub fn new(n_antennas: usize, spacing: f64) -> Result<Self> {
        if n_antennas < 2 {
            return Err(Error::InvalidArgument(format!("ULA needs at least 2 antennas, got {n_antennas}")));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::InvalidArgument(format!("antenna spacing must be positive, got {spacing}")));
        }
        Ok(Self { n_antennas, spacing })
    }

    pub fn half_wavelength(n_antennas: usize) -> Result<Self> {
        Self::new(n_antennas, 0.5)
    }

    pub fn n_antennas(&self) -> usize {
        self.n_antennas
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn steering(&self, theta: f64) -> CVector {
        steering_vector(self, theta)
    }
}

/// `a(θ)_n = exp(j 2π n Δ sin θ)`, n = 0..N-1.
pub fn steering_vector(geom: &UlaGeometry, theta: f64) -> CVector {
    let phase = 2.0 * PI * geom.spacing * theta.sin();
    CVector::from_fn(geom.n_antennas, |n, _| Complex64::from_polar(1.0, phase * n as f64))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetModel {
    theta0: f64,
    delta_theta: f64,
    gain: Complex64,
}

impl TargetModel {
    pub fn new(theta0: f64, delta_theta: f64, gain: Complex64) -> Result<Self> {
        if !(theta0 > -FRAC_PI_2 && theta0 < FRAC_PI_2) {
            return Err(Error::InvalidArgument(format!("theta0 = {theta0} rad is outside (-pi/2, pi/2)")));
        }
        if !(delta_theta >= 0.0) {
            return Err(Error::InvalidArgument(format!("delta_theta must be >= 0, got {delta_theta}")));
        }
        if theta0 - delta_theta < -FRAC_PI_2 - ANGLE_EPS || theta0 + delta_theta > FRAC_PI_2 + ANGLE_EPS {
            return Err(Error::InvalidArgument("uncertainty interval leaves [-pi/2, pi/2]".into()));
        }
        if !(gain.norm() > 0.0) {
            return Err(Error::DegenerateTarget);
        }
        Ok(Self {
            theta0,
            delta_theta,
            gain,
        })
    }

    pub fn theta0(&self) -> f64 {
        self.theta0
    }

    pub fn delta_theta(&self) -> f64 {
        self.delta_theta
    }

    pub fn gain(&self) -> Complex64 {
        self.gain
    }

    /// `|α|²`.
    pub fn gain_sq(&self) -> f64 {
        self.gain.norm_sqr()
    }

    pub fn with_delta_theta(&self, delta_theta: f64) -> Result<Self> {
        Self::new(self.theta0, delta_theta, self.gain)
    }

    /// Angles of the uncertainty interval `[θ0 - Δθ, θ0 + Δθ]` sampled at
    /// `θ0 + k·resolution`, so `θ0` itself is always included.
    pub fn uncertainty_angles(&self, resolution: f64) -> Vec<f64> {
        let steps = (self.delta_theta / resolution + 1e-9).floor() as i64;
        (-steps..=steps).map(|k| self.theta0 + k as f64 * resolution).collect()
    }
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub geometry: UlaGeometry,
    /// `K × N`; row `i` is `h_i`.
    pub channel: ComplexMatrix,
    /// σ² in watts.
    pub noise_power: f64,
    pub target: TargetModel,
    /// P0 in watts.
    pub power_budget: f64,
    pub frame_length: usize,
}

impl Scenario {
    pub fn new(
        geometry: UlaGeometry,
        channel: ComplexMatrix,
        noise_power: f64,
        target: TargetModel,
        power_budget: f64,
        frame_length: usize,
    ) -> Result<Self> {
        if channel.cols() != geometry.n_antennas() || channel.rows() == 0 {
            return Err(Error::DimensionMismatch {
                expected: format!("K x {}", geometry.n_antennas()),
                found: format!("{} x {}", channel.rows(), channel.cols()),
            });
        }
        if !(noise_power > 0.0 && noise_power.is_finite()) {
            return Err(Error::InvalidArgument(format!("noise power must be positive, got {noise_power}")));
        }
        if !(power_budget > 0.0 && power_budget.is_finite()) {
            return Err(Error::InvalidArgument(format!("power budget must be positive, got {power_budget}")));
        }
        if frame_length == 0 {
            return Err(Error::InvalidArgument("frame length must be >= 1".into()));
        }
        Ok(Self {
            geometry,
            channel,
            noise_power,
            target,
            power_budget,
            frame_length,
        })
    }

    pub fn n_antennas(&self) -> usize {
        self.geometry.n_antennas()
    }

    pub fn n_users(&self) -> usize {
        self.channel.rows()
    }

    /// `h_i` as a column vector (0-based user index).
    pub fn user_channel(&self, i: usize) -> CVector {
        self.channel.row_vector(i)
    }

    /// The vector `g` with `g^H W g = h_i^T W h_i^*`, i.e. `conj(h_i)`.
    /// User-side quadratic forms all go through this.
    pub fn user_response(&self, i: usize) -> CVector {
        self.user_channel(i).map(|z| z.conj())
    }

    pub fn steering(&self, theta: f64) -> CVector {
        self.geometry.steering(theta)
    }

    pub fn with_target(&self, target: TargetModel) -> Self {
        Self { target, ..self.clone() }
    }

    pub fn with_power_budget(&self, p0: f64) -> Result<Self> {
        Self::new(self.geometry, self.channel.clone(), self.noise_power, self.target, p0, self.frame_length)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AngularGrid {
    angles: Vec<f64>,
}

impl AngularGrid {
    pub fn new(angles: Vec<f64>) -> Result<Self> {
        if angles.is_empty() {
            return Err(Error::InvalidArgument("angular grid is empty".into()));
        }
        if angles.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("grid angles must be strictly increasing".into()));
        }
        if angles[0] < -FRAC_PI_2 - ANGLE_EPS || angles[angles.len() - 1] > FRAC_PI_2 + ANGLE_EPS {
            return Err(Error::InvalidArgument("grid leaves [-pi/2, pi/2]".into()));
        }
        Ok(Self { angles })
    }

    /// `lo, lo + step, ..., hi` in degrees, stored in radians.
    pub fn uniform_degrees(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || hi < lo {
            return Err(Error::InvalidArgument(format!("bad grid [{lo}, {hi}] step {step}")));
        }
        let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
        Self::new((0..count).map(|k| (lo + k as f64 * step).to_radians()).collect())
    }

    /// The default detection grid: 1° over [-90°, 90°].
    pub fn full_range(step_deg: f64) -> Result<Self> {
        Self::uniform_degrees(-90.0, 90.0, step_deg)
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn degrees(&self) -> Vec<f64> {
        self.angles.iter().map(|a| a.to_degrees()).collect()
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    /// Smallest spacing between neighbours (0 for a single angle).
    pub fn resolution(&self) -> f64 {
        if self.angles.len() < 2 {
            return 0.0;
        }
        self.angles.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    }
}

/// `K × N` channel with i.i.d. CN(0, 1) entries.
pub fn sample_channel(k: usize, n: usize, seed: u64) -> Result<ComplexMatrix> {
    if k == 0 || n == 0 {
        return Err(Error::InvalidArgument(format!("channel needs K, N >= 1, got {k} x {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = DMatrix::from_fn(k, n, |_, _| complex_normal(&mut rng));
    ComplexMatrix::from_matrix(m)
}

/// CN(0, 1): real and imaginary parts each N(0, 1/2).
pub(crate) fn complex_normal<R: Rng>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) / SQRT_2
}

fn check_dims(w_list: &[HermitianMatrix], r_n: &HermitianMatrix, n: usize) -> Result<()> {
    for m in w_list.iter().chain(std::iter::once(r_n)) {
        if m.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: format!("{n} x {n}"),
                found: format!("{0} x {0}", m.dim()),
            });
        }
    }
    Ok(())
}

/// `R_X = Σ W_i + R_N`.
pub fn transmit_covariance(w_list: &[HermitianMatrix], r_n: &HermitianMatrix) -> Result<HermitianMatrix> {
    check_dims(w_list, r_n, r_n.dim())?;
    w_list.iter().try_fold(r_n.clone(), |acc, w| acc.add(w))
}

/// SINR of user `i` (0-based).
pub fn sinr_user(scn: &Scenario, i: usize, w_list: &[HermitianMatrix], r_n: &HermitianMatrix) -> Result<f64> {
    let k = scn.n_users();
    if i >= k {
        return Err(Error::InvalidArgument(format!("user index {i} out of range for K = {k}")));
    }
    if w_list.len() != k {
        return Err(Error::DimensionMismatch {
            expected: format!("{k} beamforming matrices"),
            found: w_list.len().to_string(),
        });
    }
    check_dims(w_list, r_n, scn.n_antennas())?;
    let g = scn.user_response(i);
    let signal = quadratic_form(&g, &w_list[i])?;
    let mut interference = quadratic_form(&g, r_n)? + scn.noise_power;
    for (k, w) in w_list.iter().enumerate() {
        if k != i {
            interference += quadratic_form(&g, w)?;
        }
    }
    Ok(signal / interference)
}

/// SINR of every user.
pub fn user_sinrs(scn: &Scenario, w_list: &[HermitianMatrix], r_n: &HermitianMatrix) -> Result<Vec<f64>> {
    (0..scn.n_users()).map(|i| sinr_user(scn, i, w_list, r_n)).collect()
}

/// Eavesdropper SINR if the target sits at `theta`.
pub fn sinr_eve(scn: &Scenario, theta: f64, w_list: &[HermitianMatrix], r_n: &HermitianMatrix) -> Result<f64> {
    check_dims(w_list, r_n, scn.n_antennas())?;
    let a = scn.steering(theta);
    let g2 = scn.target.gain_sq();
    let mut signal = 0.0;
    for w in w_list {
        signal += quadratic_form(&a, w)?;
    }
    Ok(g2 * signal / (g2 * quadratic_form(&a, r_n)? + scn.noise_power))
}

/// Largest eavesdropper SINR over the given angles.
pub fn sinr_eve_worst(scn: &Scenario, angles: &[f64], w_list: &[HermitianMatrix], r_n: &HermitianMatrix) -> Result<f64> {
    let mut worst = f64::NEG_INFINITY;
    for &t in angles {
        worst = worst.max(sinr_eve(scn, t, w_list, r_n)?);
    }
    Ok(worst)
}

/// `0.5 · max(0, min_i log2(1 + SINR_i) - log2(1 + SINR_E))`.
pub fn secrecy_rate_from_sinrs(user_sinrs: &[f64], eve_sinr: f64) -> f64 {
    let worst_user = user_sinrs.iter().copied().fold(f64::INFINITY, f64::min);
    0.5 * ((1.0 + worst_user).log2() - (1.0 + eve_sinr).log2()).max(0.0)
}

/// Secrecy rate with the eavesdropper at the nominal angle θ0.
pub fn secrecy_rate(scn: &Scenario, w_list: &[HermitianMatrix], r_n: &HermitianMatrix) -> Result<f64> {
    let users = user_sinrs(scn, w_list, r_n)?;
    let eve = sinr_eve(scn, scn.target.theta0(), w_list, r_n)?;
    Ok(secrecy_rate_from_sinrs(&users, eve))
}

/// Draws `X = Σ_i w_i s_i^T + R_N^{1/2} V` with unit-power QPSK symbols and
/// CN(0, I) columns `V`. Each `W_i` must be rank one.
pub fn synthesize_waveform(
    w_list: &[HermitianMatrix],
    r_n: &HermitianMatrix,
    frame_length: usize,
    seed: u64,
) -> Result<ComplexMatrix> {
    if frame_length == 0 {
        return Err(Error::InvalidArgument("frame length must be >= 1".into()));
    }
    let n = r_n.dim();
    check_dims(w_list, r_n, n)?;
    let mut beams = Vec::with_capacity(w_list.len());
    for w in w_list {
        let tr = w.trace();
        if tr <= 0.0 {
            beams.push(CVector::zeros(n));
            continue;
        }
        let eig = hermitian_eig(w)?;
        let defect = 1.0 - eig.values[0] / tr;
        if defect > RANK1_TOL {
            return Err(Error::NotRankOne { defect });
        }
        beams.push(eig.vector(0) * Complex64::new(eig.values[0].max(0.0).sqrt(), 0.0));
    }
    let root = psd_sqrt(r_n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let qpsk = [
        Complex64::new(1.0, 1.0) / SQRT_2,
        Complex64::new(-1.0, 1.0) / SQRT_2,
        Complex64::new(-1.0, -1.0) / SQRT_2,
        Complex64::new(1.0, -1.0) / SQRT_2,
    ];
    let mut x = DMatrix::<Complex64>::zeros(n, frame_length);
    for l in 0..frame_length {
        let mut col = CVector::zeros(n);
        for w in &beams {
            let s = qpsk[rng.random_range(0..4)];
            col += w * s;
        }
        let v = CVector::from_fn(n, |_, _| complex_normal(&mut rng));
        col += &root * v;
        x.set_column(l, &col);
    }
    ComplexMatrix::from_matrix(x)
}

/// Sample covariance `(1/L) X X^H`.
pub fn sample_covariance(x: &ComplexMatrix) -> Result<HermitianMatrix> {
    let m = x.as_matrix();
    HermitianMatrix::new(m * m.adjoint() / Complex64::new(m.ncols() as f64, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::J;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: &CVector, b: &[Complex64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).norm() < tol)
    }

    fn scenario(h: &[Complex64], k: usize, n: usize, gain_sq: f64) -> Scenario {
        Scenario::new(
            UlaGeometry::half_wavelength(n.max(2)).unwrap(),
            ComplexMatrix::from_row_slice(k, n, h).unwrap(),
            1.0,
            TargetModel::new(0.0, 0.0, c(gain_sq.sqrt(), 0.0)).unwrap(),
            1.0,
            30,
        )
        .unwrap()
    }

    #[test]
    fn steering_examples() {
        let g4 = UlaGeometry::half_wavelength(4).unwrap();
        assert!(close(&steering_vector(&g4, 0.0), &[c(1.0, 0.0); 4], 1e-15));
        let g2 = UlaGeometry::half_wavelength(2).unwrap();
        assert!(close(&steering_vector(&g2, FRAC_PI_2), &[c(1.0, 0.0), c(-1.0, 0.0)], 1e-15));
        let g3 = UlaGeometry::half_wavelength(3).unwrap();
        assert!(close(&steering_vector(&g3, PI / 6.0), &[c(1.0, 0.0), J, c(-1.0, 0.0)], 1e-15));
    }

    #[test]
    fn channel_is_deterministic_and_rejects_empty() {
        assert_eq!(sample_channel(3, 4, 9).unwrap(), sample_channel(3, 4, 9).unwrap());
        assert!(sample_channel(0, 4, 9).is_err());
    }

    #[test]
    fn channel_power_is_unit() {
        let h = sample_channel(1000, 1, 42).unwrap();
        let p: Vec<f64> = h.as_matrix().iter().map(|z| z.norm_sqr()).collect();
        let mean = p.iter().sum::<f64>() / 1000.0;
        let var = p.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 999.0;
        let se = (var / 1000.0).sqrt();
        assert!((mean - 1.0).abs() < 3.0 * se, "mean {mean}, se {se}");
    }

    #[test]
    fn covariance_examples() {
        let i2 = HermitianMatrix::identity(2);
        let r = transmit_covariance(&[i2.clone()], &i2).unwrap();
        assert_eq!(r, i2.scale(2.0));
        let z = HermitianMatrix::zeros(2);
        assert_eq!(transmit_covariance(&[z.clone(), z.clone()], &z).unwrap(), z);
        let w = HermitianMatrix::outer(&CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]));
        let rn = HermitianMatrix::from_real_diagonal(&[0.0, 1.0]);
        assert_eq!(transmit_covariance(&[w], &rn).unwrap(), i2);
        assert!(transmit_covariance(&[HermitianMatrix::zeros(3)], &i2).is_err());
    }

    #[test]
    fn user_sinr_examples() {
        let s = scenario(&[c(1.0, 0.0), c(0.0, 0.0)], 1, 2, 1.0);
        let w = HermitianMatrix::from_real_diagonal(&[4.0, 0.0]);
        assert_eq!(sinr_user(&s, 0, &[w], &HermitianMatrix::zeros(2)).unwrap(), 4.0);
        assert_eq!(
            sinr_user(&s, 0, &[HermitianMatrix::zeros(2)], &HermitianMatrix::zeros(2)).unwrap(),
            0.0
        );
        assert!(sinr_user(&s, 1, &[HermitianMatrix::zeros(2)], &HermitianMatrix::zeros(2)).is_err());
    }

    #[test]
    fn eve_sinr_examples() {
        let s = scenario(&[c(1.0, 0.0), c(0.0, 0.0)], 1, 2, 1.0);
        let z = HermitianMatrix::zeros(2);
        assert_eq!(sinr_eve(&s, 0.3, &[z.clone()], &z).unwrap(), 0.0);
    }

    #[test]
    fn secrecy_examples() {
        assert!((secrecy_rate_from_sinrs(&[1.0, 1.0], 0.0) - 0.5).abs() < 1e-15);
        assert_eq!(secrecy_rate_from_sinrs(&[1.0, 2.0], 2.0), 0.0);
        assert!((secrecy_rate_from_sinrs(&[3.0, 3.0], 1.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn uncertainty_angles_include_center() {
        let t = TargetModel::new(0.1, 5f64.to_radians(), c(1.0, 0.0)).unwrap();
        let a = t.uncertainty_angles(1f64.to_radians());
        assert_eq!(a.len(), 11);
        assert!((a[5] - 0.1).abs() < 1e-15);
        let t0 = t.with_delta_theta(0.0).unwrap();
        assert_eq!(t0.uncertainty_angles(1f64.to_radians()), vec![0.1]);
    }

    #[test]
    fn target_validation() {
        assert!(matches!(TargetModel::new(0.0, 0.0, c(0.0, 0.0)), Err(Error::DegenerateTarget)));
        assert!(TargetModel::new(FRAC_PI_2, 0.0, c(1.0, 0.0)).is_err());
        assert!(TargetModel::new(1.5, 0.2, c(1.0, 0.0)).is_err());
    }

    #[test]
    fn grid_construction() {
        let g = AngularGrid::full_range(1.0).unwrap();
        assert_eq!(g.len(), 181);
        assert!((g.resolution() - 1f64.to_radians()).abs() < 1e-12);
        assert!(AngularGrid::new(vec![0.2, 0.1]).is_err());
        assert!(AngularGrid::new(vec![]).is_err());
    }

    #[test]
    fn waveform_examples() {
        let n = 3;
        let e1 = CVector::from_fn(n, |i, _| if i == 0 { c(1.0, 0.0) } else { c(0.0, 0.0) });
        let w = HermitianMatrix::outer(&e1);
        let x = synthesize_waveform(&[w.clone()], &HermitianMatrix::zeros(n), 4, 1).unwrap();
        for r in 1..n {
            for l in 0..4 {
                assert_eq!(x.get(r, l), c(0.0, 0.0));
            }
        }
        assert!(synthesize_waveform(&[w], &HermitianMatrix::zeros(n), 0, 1).is_err());
        assert!(matches!(
            synthesize_waveform(&[HermitianMatrix::identity(n)], &HermitianMatrix::zeros(n), 4, 1),
            Err(Error::NotRankOne { .. })
        ));
    }
}
