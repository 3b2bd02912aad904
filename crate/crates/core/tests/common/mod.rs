//! Shared fixtures for integration tests: conic instances with optima known
//! by construction.

#![allow(dead_code)]

pub mod beampattern;
pub mod design;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use secure_dfrc::conic::{ConicProblem, LinExpr, Sense};
use secure_dfrc::linalg::HermitianMatrix;

pub struct OracleCase {
    pub name: String,
    pub problem: ConicProblem,
    pub optimum: f64,
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn random_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let m = DMatrix::from_fn(n, n, |_, _| normal(rng));
    m.qr().q()
}

fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
    let m = DMatrix::from_fn(n, n, |_, _| Complex64::new(normal(rng), normal(rng)));
    m.qr().q()
}

fn random_symmetric(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let m = DMatrix::from_fn(n, n, |_, _| normal(rng));
    (&m + m.transpose()) * 0.5
}

fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> HermitianMatrix {
    let m = DMatrix::from_fn(n, n, |_, _| Complex64::new(normal(rng), normal(rng)));
    HermitianMatrix::new(m).unwrap()
}

/// Complementary diagonal spectra: the first `r` entries belong to the
/// primal, the rest to the dual slack.
fn split_spectrum(n: usize, r: usize, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
    let x = (0..n).map(|i| if i < r { rng.random_range(0.5..2.0) } else { 0.0 }).collect();
    let s = (0..n).map(|i| if i >= r { rng.random_range(0.5..2.0) } else { 0.0 }).collect();
    (x, s)
}

/// `min <C, X>` s.t. `<A_i, X> = b_i`, `X ⪰ 0` (real symmetric).
pub fn real_sdp(n: usize, m: usize, seed: u64) -> OracleCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = random_orthogonal(n, &mut rng);
    let r = rng.random_range(1..=n.saturating_sub(1).max(1));
    let (xs, ss) = split_spectrum(n, r, &mut rng);
    let xstar = &q * DMatrix::from_diagonal(&DVector::from_vec(xs)) * q.transpose();
    let sstar = &q * DMatrix::from_diagonal(&DVector::from_vec(ss)) * q.transpose();
    let y: Vec<f64> = (0..m).map(|_| normal(&mut rng)).collect();
    let mut c = sstar.clone();
    let mut p = ConicProblem::new();
    let x = p.add_symmetric_block(n);
    for (i, yi) in y.iter().enumerate() {
        let a = random_symmetric(n, &mut rng);
        let b = (&a * &xstar).trace();
        c += &a * *yi;
        p.add_eq(format!("eq{i}"), x.inner(&a), b);
    }
    p.minimize(x.inner(&c));
    OracleCase {
        name: format!("real_sdp n={n} m={m} seed={seed}"),
        optimum: (&c * &xstar).trace(),
        problem: p,
    }
}

/// Hermitian analogue of [`real_sdp`].
pub fn hermitian_sdp(n: usize, m: usize, seed: u64) -> OracleCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = random_unitary(n, &mut rng);
    let r = rng.random_range(1..=n.saturating_sub(1).max(1));
    let (xs, ss) = split_spectrum(n, r, &mut rng);
    let diag = |v: Vec<f64>| DMatrix::from_diagonal(&DVector::from_iterator(n, v.into_iter().map(|a| Complex64::new(a, 0.0))));
    let xstar = HermitianMatrix::new(&u * diag(xs) * u.adjoint()).unwrap();
    let mut c = HermitianMatrix::new(&u * diag(ss) * u.adjoint()).unwrap();
    let mut p = ConicProblem::new();
    let x = p.add_hermitian_block(n);
    for i in 0..m {
        let yi = normal(&mut rng);
        let a = random_hermitian(n, &mut rng);
        let b = (a.as_matrix() * xstar.as_matrix()).trace().re;
        c = c.add(&a.scale(yi)).unwrap();
        p.add_eq(format!("eq{i}"), x.inner(&a), b);
    }
    p.minimize(x.inner(&c));
    OracleCase {
        name: format!("hermitian_sdp n={n} m={m} seed={seed}"),
        optimum: (c.as_matrix() * xstar.as_matrix()).trace().re,
        problem: p,
    }
}

/// Several second-order cones over free scalars with linear equalities.
pub fn socp(cone_dims: &[usize], m: usize, seed: u64) -> OracleCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n: usize = cone_dims.iter().sum();
    let mut xstar = Vec::with_capacity(n);
    let mut sstar = Vec::with_capacity(n);
    for (k, &d) in cone_dims.iter().enumerate() {
        let u: Vec<f64> = (0..d - 1).map(|_| normal(&mut rng)).collect();
        let nu = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        let case = if k == 0 { 0 } else { rng.random_range(0..3) };
        match case {
            // boundary primal, boundary dual
            0 => {
                let k = rng.random_range(0.5..2.0);
                xstar.push(nu);
                xstar.extend(u.iter().copied());
                sstar.push(k * nu);
                sstar.extend(u.iter().map(|v| -k * v));
            }
            // interior primal, zero dual
            1 => {
                xstar.push(nu + 1.0);
                xstar.extend(u.iter().copied());
                sstar.extend(std::iter::repeat_n(0.0, d));
            }
            // zero primal, interior dual
            _ => {
                xstar.extend(std::iter::repeat_n(0.0, d));
                sstar.push(nu + 1.0);
                sstar.extend(u.iter().copied());
            }
        }
    }
    let a = DMatrix::from_fn(m, n, |_, _| normal(&mut rng));
    let y = DVector::from_fn(m, |_, _| normal(&mut rng));
    let b = &a * DVector::from_column_slice(&xstar);
    let c = a.tr_mul(&y) + DVector::from_column_slice(&sstar);

    let mut p = ConicProblem::new();
    let vars: Vec<_> = (0..n).map(|_| p.add_scalar()).collect();
    let mut obj = LinExpr::zero();
    for j in 0..n {
        obj.add_term(vars[j].0, c[j]);
    }
    p.minimize(obj);
    for i in 0..m {
        let mut e = LinExpr::zero();
        for j in 0..n {
            e.add_term(vars[j].0, a[(i, j)]);
        }
        p.add_eq(format!("eq{i}"), e, b[i]);
    }
    let mut off = 0;
    for (k, &d) in cone_dims.iter().enumerate() {
        let v = (1..d).map(|t| vars[off + t].expr()).collect();
        p.add_soc(format!("soc{k}"), v, vars[off].expr());
        off += d;
    }
    OracleCase {
        name: format!("socp cones={cone_dims:?} m={m} seed={seed}"),
        optimum: c.dot(&DVector::from_column_slice(&xstar)),
        problem: p,
    }
}

/// `min c^T x` s.t. `A x = b`, `x >= 0`, with a complementary pair.
pub fn lp(n: usize, m: usize, seed: u64) -> OracleCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut xstar = vec![0.0; n];
    let mut sstar = vec![0.0; n];
    for j in 0..n {
        if j < m || rng.random_bool(0.3) {
            xstar[j] = rng.random_range(0.5..2.0);
        } else {
            sstar[j] = rng.random_range(0.5..2.0);
        }
    }
    let a = DMatrix::from_fn(m, n, |_, _| normal(&mut rng));
    let y = DVector::from_fn(m, |_, _| normal(&mut rng));
    let b = &a * DVector::from_column_slice(&xstar);
    let c = a.tr_mul(&y) + DVector::from_column_slice(&sstar);

    let mut p = ConicProblem::new();
    let vars: Vec<_> = (0..n).map(|_| p.add_scalar()).collect();
    let mut obj = LinExpr::zero();
    for j in 0..n {
        obj.add_term(vars[j].0, c[j]);
        p.add_ineq(format!("x{j}>=0"), vars[j].expr(), Sense::Ge, 0.0);
    }
    p.minimize(obj);
    for i in 0..m {
        let mut e = LinExpr::zero();
        for j in 0..n {
            e.add_term(vars[j].0, a[(i, j)]);
        }
        p.add_eq(format!("eq{i}"), e, b[i]);
    }
    OracleCase {
        name: format!("lp n={n} m={m} seed={seed}"),
        optimum: c.dot(&DVector::from_column_slice(&xstar)),
        problem: p,
    }
}

/// A real SDP block and a second-order cone coupled through shared
/// equalities. The block is tied to scalars `t_k = X_kk`.
pub fn mixed(n: usize, seed: u64) -> OracleCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Build from an SDP instance plus an SOC whose optimum is separable.
    let base = real_sdp(n, n, seed ^ 0x5eed);
    let soc = socp(&[3], 1, seed ^ 0xface);
    let mut p = base.problem.clone();
    let offset = p.num_vars();
    let extra: Vec<_> = (0..3).map(|_| p.add_scalar()).collect();
    let mut obj = p.objective().clone();
    for &(v, c) in soc.problem.objective().terms.iter() {
        obj.add_term(extra[v].0, c);
    }
    p.minimize(obj);
    for eq in soc.problem.eqs() {
        let mut e = LinExpr::zero();
        for &(v, c) in &eq.expr.terms {
            e.add_term(offset + v, c);
        }
        p.add_eq(eq.label.clone() + "_soc", e, eq.rhs);
    }
    let w = rng.random_range(0.5..1.5);
    p.add_soc(
        "mixed_soc",
        vec![extra[1].expr() * w, extra[2].expr() * w],
        extra[0].expr() * w,
    );
    OracleCase {
        name: format!("mixed n={n} seed={seed}"),
        optimum: base.optimum + soc.optimum,
        problem: p,
    }
}

/// The 50-instance suite used by the oracle and acceptance tests.
pub fn oracle_suite() -> Vec<OracleCase> {
    let mut out = Vec::new();
    for k in 0..15u64 {
        let n = 2 + (k as usize % 7);
        let m = 1 + (k as usize * 3) % (n * (n + 1) / 2);
        out.push(real_sdp(n, m, 100 + k));
    }
    for k in 0..10u64 {
        let n = 2 + (k as usize % 5);
        let m = 1 + (k as usize * 5) % (n * n);
        out.push(hermitian_sdp(n, m, 200 + k));
    }
    for k in 0..10u64 {
        let dims: Vec<usize> = (0..1 + k as usize % 3).map(|j| 2 + (k as usize + j) % 5).collect();
        let total: usize = dims.iter().sum();
        out.push(socp(&dims, 1 + (k as usize) % total, 300 + k));
    }
    for k in 0..10u64 {
        let n = 3 + k as usize % 6;
        out.push(lp(n, 1 + k as usize % (n - 1), 400 + k));
    }
    for k in 0..5u64 {
        out.push(mixed(2 + k as usize, 500 + k));
    }
    out
}
