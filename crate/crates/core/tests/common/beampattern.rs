//! Exhaustive two-antenna beampattern fit.

use num_complex::Complex64;

/// Exhaustive search over `R = (P0/2)(I + x σx + y σy + z σz)`, ‖(x,y,z)‖ ≤ 1,
/// at step 0.01 with the optimal η for each R in closed form.
pub fn bloch_brute_force(angles_deg: &[f64], gains: &[f64], p0: f64) -> f64 {
    let steer: Vec<[Complex64; 2]> = angles_deg
        .iter()
        .map(|d| {
            let phi = std::f64::consts::PI * d.to_radians().sin();
            [Complex64::new(1.0, 0.0), Complex64::from_polar(1.0, phi)]
        })
        .collect();
    let pp: f64 = gains.iter().map(|p| p * p).sum();
    let mut best = f64::INFINITY;
    let steps = 200;
    for ix in 0..=steps {
        let x = -1.0 + 2.0 * ix as f64 / steps as f64;
        for iy in 0..=steps {
            let y = -1.0 + 2.0 * iy as f64 / steps as f64;
            for iz in 0..=steps {
                let z = -1.0 + 2.0 * iz as f64 / steps as f64;
                if x * x + y * y + z * z > 1.0 + 1e-12 {
                    continue;
                }
                let h = p0 / 2.0;
                let r = [
                    [Complex64::new(h * (1.0 + z), 0.0), Complex64::new(h * x, -h * y)],
                    [Complex64::new(h * x, h * y), Complex64::new(h * (1.0 - z), 0.0)],
                ];
                let q: Vec<f64> = steer
                    .iter()
                    .map(|a| {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for p in 0..2 {
                            for s in 0..2 {
                                acc += a[p].conj() * r[p][s] * a[s];
                            }
                        }
                        acc.re
                    })
                    .collect();
                let pq: f64 = gains.iter().zip(&q).map(|(p, v)| p * v).sum();
                let eta = (pq / pp).max(0.0);
                let obj: f64 = gains.iter().zip(&q).map(|(p, v)| (eta * p - v).powi(2)).sum();
                best = best.min(obj);
            }
        }
    }
    best
}
