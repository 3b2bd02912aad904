//! Cone kernels: Nesterov–Todd scaling, Jordan algebra and step-to-boundary
//! computations for the nonnegative orthant, second-order cones and real
//! PSD cones stored in scaled `svec` form.
//!
//! `svec` stacks the lower triangle column by column with off-diagonal
//! entries multiplied by `sqrt(2)`, so the Euclidean inner product of two
//! `svec`s equals the trace inner product of the matrices.

use nalgebra::{DMatrix, DVector};

const SQRT2: f64 = std::f64::consts::SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cone {
    Nonneg(usize),
    Soc(usize),
    /// Order of the symmetric matrix.
    Psd(usize),
}

impl Cone {
    pub fn dim(&self) -> usize {
        match *self {
            Cone::Nonneg(m) | Cone::Soc(m) => m,
            Cone::Psd(k) => k * (k + 1) / 2,
        }
    }

    pub fn degree(&self) -> usize {
        match *self {
            Cone::Nonneg(m) => m,
            Cone::Soc(_) => 1,
            Cone::Psd(k) => k,
        }
    }

    pub fn identity(&self) -> Vec<f64> {
        let mut e = vec![0.0; self.dim()];
        match *self {
            Cone::Nonneg(_) => e.iter_mut().for_each(|v| *v = 1.0),
            Cone::Soc(_) => e[0] = 1.0,
            Cone::Psd(k) => (0..k).for_each(|i| e[svec_index(k, i, i)] = 1.0),
        }
        e
    }

    /// Largest `t` such that `u - t e` stays in the closed cone (the
    /// smallest "eigenvalue" of `u`).
    pub fn margin(&self, u: &[f64]) -> f64 {
        match *self {
            Cone::Nonneg(_) => u.iter().copied().fold(f64::INFINITY, f64::min),
            Cone::Soc(_) => u[0] - norm(&u[1..]),
            Cone::Psd(k) => {
                if k == 0 {
                    return f64::INFINITY;
                }
                smat(u, k).symmetric_eigenvalues().min()
            }
        }
    }

    /// Jordan product `u ∘ v`.
    pub fn jordan_prod(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        match *self {
            Cone::Nonneg(_) => u.iter().zip(v).map(|(a, b)| a * b).collect(),
            Cone::Soc(_) => {
                let mut out = vec![0.0; u.len()];
                out[0] = dot(u, v);
                for i in 1..u.len() {
                    out[i] = u[0] * v[i] + v[0] * u[i];
                }
                out
            }
            Cone::Psd(k) => {
                let a = smat(u, k);
                let b = smat(v, k);
                let p = &a * &b;
                svec(&((&p + p.transpose()) * 0.5))
            }
        }
    }

    /// Solves `lambda ∘ x = v` for `x`. For PSD cones `lambda` must be
    /// diagonal, which is always the case for a Nesterov–Todd scaled point.
    pub fn jordan_div(&self, lambda: &[f64], v: &[f64]) -> Vec<f64> {
        match *self {
            Cone::Nonneg(_) => v.iter().zip(lambda).map(|(a, l)| a / l).collect(),
            Cone::Soc(_) => {
                let l0 = lambda[0];
                let l1 = &lambda[1..];
                let det = l0 * l0 - dot(l1, l1);
                let x0 = (l0 * v[0] - dot(l1, &v[1..])) / det;
                let mut out = vec![0.0; v.len()];
                out[0] = x0;
                for i in 1..v.len() {
                    out[i] = (v[i] - x0 * lambda[i]) / l0;
                }
                out
            }
            Cone::Psd(k) => {
                let diag: Vec<f64> = (0..k).map(|i| lambda[svec_index(k, i, i)]).collect();
                let mut out = vec![0.0; v.len()];
                for j in 0..k {
                    for i in j..k {
                        let idx = svec_index(k, i, j);
                        out[idx] = 2.0 * v[idx] / (diag[i] + diag[j]);
                    }
                }
                out
            }
        }
    }

    /// Largest step `t` with `lambda + t d` in the cone, `+inf` if unbounded.
    /// `lambda` is a scaled point (diagonal for PSD cones).
    pub fn max_step(&self, lambda: &[f64], d: &[f64]) -> f64 {
        match *self {
            Cone::Nonneg(_) => lambda
                .iter()
                .zip(d)
                .filter(|(_, &di)| di < 0.0)
                .map(|(l, di)| -l / di)
                .fold(f64::INFINITY, f64::min),
            Cone::Soc(_) => soc_step(lambda, d),
            Cone::Psd(k) => {
                let inv_sqrt: Vec<f64> = (0..k).map(|i| 1.0 / lambda[svec_index(k, i, i)].sqrt()).collect();
                let mut m = smat(d, k);
                for j in 0..k {
                    for i in 0..k {
                        m[(i, j)] *= inv_sqrt[i] * inv_sqrt[j];
                    }
                }
                let rho = m.symmetric_eigenvalues().min();
                if rho >= 0.0 {
                    f64::INFINITY
                } else {
                    -1.0 / rho
                }
            }
        }
    }
}

fn soc_step(lambda: &[f64], d: &[f64]) -> f64 {
    // q(t) = (l0 + t d0)^2 - ‖l1 + t d1‖^2 = a t^2 + 2 b t + c, c > 0.
    let a = d[0] * d[0] - dot(&d[1..], &d[1..]);
    let b = lambda[0] * d[0] - dot(&lambda[1..], &d[1..]);
    let c = lambda[0] * lambda[0] - dot(&lambda[1..], &lambda[1..]);
    let mut best = f64::INFINITY;
    if a.abs() <= 1e-300 {
        if b < 0.0 {
            best = -c / (2.0 * b);
        }
    } else {
        let disc = b * b - a * c;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            // Numerically stable pair of roots of a t^2 + 2 b t + c.
            let q = -(b + b.signum() * sq);
            let roots = [q / a, if q != 0.0 { c / q } else { f64::INFINITY }];
            for r in roots {
                if r > 0.0 && r < best {
                    best = r;
                }
            }
        }
    }
    // The first leading-component crossing also bounds the step.
    if d[0] < 0.0 {
        best = best.min(-lambda[0] / d[0]);
    }
    best
}

/// Nesterov–Todd scaling `W` of one cone, with `W z = W^{-T} s = lambda`.
#[derive(Debug, Clone)]
pub enum Scaling {
    Nonneg {
        d: Vec<f64>,
    },
    /// `W = eta [[w0, w1^T], [w1, I + w1 w1^T / (1 + w0)]]`, symmetric.
    Soc {
        eta: f64,
        w: Vec<f64>,
    },
    /// `W u = R^T U R`, `W^{-T} u = R^{-1} U R^{-T}`.
    Psd {
        k: usize,
        r: DMatrix<f64>,
        rinv: DMatrix<f64>,
    },
}

impl Scaling {
    pub fn identity(cone: Cone) -> Scaling {
        match cone {
            Cone::Nonneg(m) => Scaling::Nonneg { d: vec![1.0; m] },
            Cone::Soc(m) => {
                let mut w = vec![0.0; m];
                w[0] = 1.0;
                Scaling::Soc { eta: 1.0, w }
            }
            Cone::Psd(k) => Scaling::Psd {
                k,
                r: DMatrix::identity(k, k),
                rinv: DMatrix::identity(k, k),
            },
        }
    }

    /// Computes the scaling and the scaled point `lambda`. Returns `None`
    /// when `s` or `z` is not strictly interior.
    pub fn nesterov_todd(cone: Cone, s: &[f64], z: &[f64]) -> Option<(Scaling, Vec<f64>)> {
        match cone {
            Cone::Nonneg(_) => {
                if s.iter().chain(z).any(|&v| !(v > 0.0)) {
                    return None;
                }
                let d: Vec<f64> = s.iter().zip(z).map(|(a, b)| (a / b).sqrt()).collect();
                let lambda = s.iter().zip(z).map(|(a, b)| (a * b).sqrt()).collect();
                Some((Scaling::Nonneg { d }, lambda))
            }
            Cone::Soc(m) => {
                let sdet = s[0] * s[0] - dot(&s[1..], &s[1..]);
                let zdet = z[0] * z[0] - dot(&z[1..], &z[1..]);
                if !(s[0] > 0.0 && z[0] > 0.0 && sdet > 0.0 && zdet > 0.0) {
                    return None;
                }
                let sn = sdet.sqrt();
                let zn = zdet.sqrt();
                let sh: Vec<f64> = s.iter().map(|v| v / sn).collect();
                let zh: Vec<f64> = z.iter().map(|v| v / zn).collect();
                let gamma = ((1.0 + dot(&sh, &zh)) / 2.0).sqrt();
                let mut w = vec![0.0; m];
                w[0] = (sh[0] + zh[0]) / (2.0 * gamma);
                for i in 1..m {
                    w[i] = (sh[i] - zh[i]) / (2.0 * gamma);
                }
                let scaling = Scaling::Soc { eta: (sn / zn).sqrt(), w };
                let lambda = scaling.apply_w(z);
                Some((scaling, lambda))
            }
            Cone::Psd(k) => {
                if k == 0 {
                    return Some((Scaling::identity(cone), Vec::new()));
                }
                let ls = smat(s, k).cholesky()?.unpack();
                let lz = smat(z, k).cholesky()?.unpack();
                let svd = (lz.transpose() * &ls).try_svd(true, true, 1e-15, 1000)?;
                let v = svd.v_t?.transpose();
                let sig = svd.singular_values;
                if sig.iter().any(|&x| !(x > 0.0)) {
                    return None;
                }
                let inv_sqrt = DVector::from_iterator(k, sig.iter().map(|x| 1.0 / x.sqrt()));
                let sqrt = DVector::from_iterator(k, sig.iter().map(|x| x.sqrt()));
                let r = &ls * &v * DMatrix::from_diagonal(&inv_sqrt);
                let ls_inv = ls.solve_lower_triangular(&DMatrix::identity(k, k))?;
                let rinv = DMatrix::from_diagonal(&sqrt) * v.transpose() * ls_inv;
                let mut lambda = vec![0.0; k * (k + 1) / 2];
                for i in 0..k {
                    lambda[svec_index(k, i, i)] = sig[i];
                }
                Some((Scaling::Psd { k, r, rinv }, lambda))
            }
        }
    }

    /// `W u`.
    pub fn apply_w(&self, u: &[f64]) -> Vec<f64> {
        match self {
            Scaling::Nonneg { d } => u.iter().zip(d).map(|(a, b)| a * b).collect(),
            Scaling::Soc { eta, w } => soc_apply(*eta, w, u, false),
            Scaling::Psd { k, r, .. } => svec(&(r.transpose() * smat(u, *k) * r)),
        }
    }

    /// `W^T u`.
    pub fn apply_wt(&self, u: &[f64]) -> Vec<f64> {
        match self {
            Scaling::Psd { k, r, .. } => svec(&(r * smat(u, *k) * r.transpose())),
            _ => self.apply_w(u),
        }
    }

    /// `W^{-T} u`.
    pub fn apply_winv_t(&self, u: &[f64]) -> Vec<f64> {
        match self {
            Scaling::Nonneg { d } => u.iter().zip(d).map(|(a, b)| a / b).collect(),
            Scaling::Soc { eta, w } => soc_apply(*eta, w, u, true),
            Scaling::Psd { k, rinv, .. } => svec(&(rinv * smat(u, *k) * rinv.transpose())),
        }
    }

    /// `W^{-1} u`.
    pub fn apply_winv(&self, u: &[f64]) -> Vec<f64> {
        match self {
            Scaling::Psd { k, rinv, .. } => svec(&(rinv.transpose() * smat(u, *k) * rinv)),
            _ => self.apply_winv_t(u),
        }
    }

    /// `W^{-T} G_c` for a dense block of columns. PSD columns are applied
    /// through their sparse `svec` pattern.
    pub fn scale_columns(&self, g: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(g.nrows(), g.ncols());
        match self {
            Scaling::Nonneg { d } => {
                for j in 0..g.ncols() {
                    for i in 0..g.nrows() {
                        out[(i, j)] = g[(i, j)] / d[i];
                    }
                }
            }
            Scaling::Soc { .. } => {
                for j in 0..g.ncols() {
                    let col: Vec<f64> = g.column(j).iter().copied().collect();
                    let sc = self.apply_winv_t(&col);
                    out.set_column(j, &DVector::from_vec(sc));
                }
            }
            Scaling::Psd { k, rinv, .. } => {
                let k = *k;
                let pairs = svec_pairs(k);
                let mut acc = DMatrix::<f64>::zeros(k, k);
                for j in 0..g.ncols() {
                    acc.fill(0.0);
                    let mut nnz = 0;
                    for (idx, &(a, b)) in pairs.iter().enumerate() {
                        let val = g[(idx, j)];
                        if val == 0.0 {
                            continue;
                        }
                        nnz += 1;
                        let pa = rinv.column(a);
                        if a == b {
                            acc.ger(val, &pa, &pa, 1.0);
                        } else {
                            let pb = rinv.column(b);
                            let v = val / SQRT2;
                            acc.ger(v, &pa, &pb, 1.0);
                            acc.ger(v, &pb, &pa, 1.0);
                        }
                    }
                    if nnz > 0 {
                        out.set_column(j, &DVector::from_vec(svec(&acc)));
                    }
                }
            }
        }
        out
    }
}

fn soc_apply(eta: f64, w: &[f64], u: &[f64], inverse: bool) -> Vec<f64> {
    let sign = if inverse { -1.0 } else { 1.0 };
    let w1u1 = dot(&w[1..], &u[1..]);
    let mut out = vec![0.0; u.len()];
    out[0] = w[0] * u[0] + sign * w1u1;
    let coef = sign * u[0] + w1u1 / (1.0 + w[0]);
    for i in 1..u.len() {
        out[i] = u[i] + coef * w[i];
    }
    let k = if inverse { 1.0 / eta } else { eta };
    out.iter_mut().for_each(|v| *v *= k);
    out
}

pub fn svec_index(k: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i >= j { (i, j) } else { (j, i) };
    // Column j of the packed lower triangle starts at sum_{c<j} (k - c).
    j * k - j * j.saturating_sub(1) / 2 + (i - j)
}

/// `(row, col)` of each `svec` slot for order `k`.
pub fn svec_pairs(k: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(k * (k + 1) / 2);
    for j in 0..k {
        for i in j..k {
            out.push((i, j));
        }
    }
    out
}

pub fn svec(m: &DMatrix<f64>) -> Vec<f64> {
    let k = m.nrows();
    let mut out = Vec::with_capacity(k * (k + 1) / 2);
    for j in 0..k {
        for i in j..k {
            if i == j {
                out.push(m[(i, j)]);
            } else {
                out.push(0.5 * (m[(i, j)] + m[(j, i)]) * SQRT2);
            }
        }
    }
    out
}

pub fn smat(u: &[f64], k: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(k, k);
    let mut idx = 0;
    for j in 0..k {
        for i in j..k {
            if i == j {
                m[(i, j)] = u[idx];
            } else {
                let v = u[idx] / SQRT2;
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
            idx += 1;
        }
    }
    m
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
