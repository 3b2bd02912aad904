//! Primal-dual interior-point method on the homogeneous self-dual embedding
//! of
//!
//! ```text
//! minimize    c^T x
//! subject to  A x = b,   G x + s = h,   s in K
//! ```
//!
//! with Nesterov–Todd scaling and a Mehrotra predictor-corrector step. The
//! Newton systems are reduced to `[[G^T W^-1 W^-T G, A^T], [A, 0]]`, which is
//! factored with a Cholesky of the (1,1) block and a Schur complement on the
//! equality rows, plus iterative refinement.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::cones::{dot, norm, Cone, Scaling};
use super::problem::{ConicProblem, HermitianBlock, ScalarVar, StandardForm, SymmetricBlock};
use crate::error::{Error, Result};
use crate::linalg::HermitianMatrix;

#[derive(Debug, Clone)]
pub struct SolverOptions {
    /// Target primal/dual residual.
    pub feas_tol: f64,
    /// Target relative duality gap.
    pub gap_tol: f64,
    /// Looser tolerance accepted when progress stalls before reaching the
    /// targets. A solution reported optimal always satisfies this one, and
    /// so does an infeasibility or unboundedness ray once `tau` has collapsed.
    pub certify_tol: f64,
    pub max_iter: usize,
    /// Fraction of the step to the cone boundary.
    pub step_fraction: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            feas_tol: 1e-8,
            gap_tol: 1e-8,
            certify_tol: 1e-7,
            max_iter: 100,
            step_fraction: 0.99,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalFailure,
}

/// One row of the iteration log, in the un-homogenized scale.
#[derive(Debug, Clone, Copy)]
pub struct IterationLog {
    pub iteration: usize,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub gap: f64,
    pub tau: f64,
    pub kappa: f64,
    /// Step taken at the end of this iteration (0 for the final row).
    pub step: f64,
}

#[derive(Debug, Clone)]
pub struct ConicSolution {
    pub status: SolveStatus,
    /// Primal variable vector. For `Unbounded` this is a primal improving ray.
    pub x: Vec<f64>,
    /// Multipliers of the equality constraints, in declaration order.
    pub eq_duals: Vec<f64>,
    /// Multipliers of the inequality constraints (nonnegative).
    pub ineq_duals: Vec<f64>,
    /// Dual cone vectors of the second-order cone constraints, `(t, v)` order.
    pub soc_duals: Vec<Vec<f64>>,
    /// Dual matrices of the PSD blocks in the solver's real cone.
    pub psd_duals: Vec<DMatrix<f64>>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    /// Relative duality gap.
    pub gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
    pub min_step: f64,
    pub history: Vec<IterationLog>,
}

impl ConicSolution {
    pub fn scalar(&self, v: ScalarVar) -> f64 {
        self.x[v.0]
    }

    pub fn hermitian(&self, blk: &HermitianBlock) -> HermitianMatrix {
        blk.value(&self.x)
    }

    pub fn symmetric(&self, blk: &SymmetricBlock) -> DMatrix<f64> {
        blk.value(&self.x)
    }

    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    /// Turns anything but `Optimal` into an error carrying diagnostics.
    pub fn require_optimal(self) -> Result<Self> {
        if self.is_optimal() {
            return Ok(self);
        }
        let detail = format!(
            "pres {:.2e}, dres {:.2e}, gap {:.2e}, min step {:.2e}, last residuals {:?}",
            self.primal_residual,
            self.dual_residual,
            self.gap,
            self.min_step,
            self.history
                .iter()
                .rev()
                .take(3)
                .map(|h| (h.primal_residual, h.dual_residual, h.gap))
                .collect::<Vec<_>>()
        );
        Err(Error::Solver {
            status: self.status,
            iterations: self.iterations,
            detail,
        })
    }
}

#[derive(Clone)]
struct Iterate {
    x: Vec<f64>,
    y: Vec<f64>,
    s: Vec<Vec<f64>>,
    z: Vec<Vec<f64>>,
    tau: f64,
    kappa: f64,
}

struct Direction {
    dx: Vec<f64>,
    dy: Vec<f64>,
    dz: Vec<Vec<f64>>,
    /// `W dz` per cone.
    dz_scaled: Vec<Vec<f64>>,
}

impl Direction {
    fn axpy(&mut self, k: f64, other: &Direction) {
        axpy(&mut self.dx, k, &other.dx);
        axpy(&mut self.dy, k, &other.dy);
        for (a, b) in self.dz.iter_mut().zip(&other.dz) {
            axpy(a, k, b);
        }
        for (a, b) in self.dz_scaled.iter_mut().zip(&other.dz_scaled) {
            axpy(a, k, b);
        }
    }
}

/// Factored reduced KKT system for one set of scalings.
struct Kkt<'a> {
    sf: &'a StandardForm,
    scalings: &'a [Scaling],
    ghat: Vec<DMatrix<f64>>,
    h: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
    schur: Option<Cholesky<f64, Dyn>>,
}

impl<'a> Kkt<'a> {
    fn factor(sf: &'a StandardForm, scalings: &'a [Scaling]) -> Option<Self> {
        let n = sf.n;
        let mut h = DMatrix::zeros(n, n);
        let mut ghat = Vec::with_capacity(sf.cones.len());
        for (rows, w) in sf.cones.iter().zip(scalings) {
            let gh = w.scale_columns(&rows.g);
            let local = gh.tr_mul(&gh);
            for (jj, &cj) in rows.cols.iter().enumerate() {
                for (ii, &ci) in rows.cols.iter().enumerate() {
                    h[(ci, cj)] += local[(ii, jj)];
                }
            }
            ghat.push(gh);
        }
        let scale = (0..n).map(|i| h[(i, i)]).fold(1.0_f64, f64::max);
        let mut delta = 0.0;
        for attempt in 0..7 {
            if attempt == 1 {
                delta = 1e-13 * scale;
            }
            let mut hr = h.clone();
            for i in 0..n {
                hr[(i, i)] += delta;
            }
            if let Some(chol) = Cholesky::new(hr) {
                let p = sf.a.nrows();
                let schur = if p > 0 {
                    let l = chol.l();
                    let mut yt = sf.a.transpose();
                    l.solve_lower_triangular_mut(&mut yt);
                    let mut s = yt.tr_mul(&yt);
                    for i in 0..p {
                        s[(i, i)] += delta;
                    }
                    match Cholesky::new(s) {
                        Some(c) => Some(c),
                        None => {
                            delta *= 100.0;
                            continue;
                        }
                    }
                } else {
                    None
                };
                return Some(Self {
                    sf,
                    scalings,
                    ghat,
                    h,
                    chol,
                    schur,
                });
            }
            delta *= 100.0;
        }
        None
    }

    fn reg_solve(&self, r1: &[f64], r2: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let a = &self.sf.a;
        let r1v = DVector::from_column_slice(r1);
        match &self.schur {
            None => (self.chol.solve(&r1v).as_slice().to_vec(), Vec::new()),
            Some(schur) => {
                let u = self.chol.solve(&r1v);
                let rhs = a * &u - DVector::from_column_slice(r2);
                let dy = schur.solve(&rhs);
                let dx = self.chol.solve(&(r1v - a.tr_mul(&dy)));
                (dx.as_slice().to_vec(), dy.as_slice().to_vec())
            }
        }
    }

    /// Solves `[[H, A^T], [A, 0]] [dx; dy] = [r1; r2]`.
    fn reduced_solve(&self, r1: &[f64], r2: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let a = &self.sf.a;
        let (mut dx, mut dy) = self.reg_solve(r1, r2);
        let rnorm = norm(r1).max(norm(r2)).max(1e-300);
        for _ in 0..5 {
            let dxv = DVector::from_column_slice(&dx);
            let dyv = DVector::from_column_slice(&dy);
            let e1 = DVector::from_column_slice(r1) - &self.h * &dxv - a.tr_mul(&dyv);
            let e2 = DVector::from_column_slice(r2) - a * &dxv;
            let err = e1.amax().max(if e2.is_empty() { 0.0 } else { e2.amax() });
            if err <= 1e-15 * rnorm {
                break;
            }
            let (cx, cy) = self.reg_solve(e1.as_slice(), e2.as_slice());
            axpy(&mut dx, 1.0, &cx);
            axpy(&mut dy, 1.0, &cy);
        }
        (dx, dy)
    }

    /// Solves the full system
    /// `[[0, A^T, G^T], [A, 0, 0], [G, 0, -W^T W]] [dx; dy; dz] = [r1; r2; r3]`
    /// where `r3` is supplied pre-scaled as `W^{-T} r3`.
    fn solve(&self, r1: &[f64], r2: &[f64], r3_scaled: &[Vec<f64>]) -> Direction {
        let mut rhs1 = r1.to_vec();
        for ((rows, gh), r3) in self.sf.cones.iter().zip(&self.ghat).zip(r3_scaled) {
            let t = gh.tr_mul(&DVector::from_column_slice(r3));
            for (j, &col) in rows.cols.iter().enumerate() {
                rhs1[col] += t[j];
            }
        }
        let (dx, dy) = self.reduced_solve(&rhs1, r2);
        let mut dz = Vec::with_capacity(self.sf.cones.len());
        let mut dz_scaled = Vec::with_capacity(self.sf.cones.len());
        for (((rows, gh), r3), w) in self.sf.cones.iter().zip(&self.ghat).zip(r3_scaled).zip(self.scalings) {
            let xs = DVector::from_iterator(rows.cols.len(), rows.cols.iter().map(|&c| dx[c]));
            let mut v = (gh * xs).as_slice().to_vec();
            axpy(&mut v, -1.0, r3);
            dz.push(w.apply_winv(&v));
            dz_scaled.push(v);
        }
        Direction { dx, dy, dz, dz_scaled }
    }
}

fn axpy(y: &mut [f64], k: f64, x: &[f64]) {
    for (a, b) in y.iter_mut().zip(x) {
        *a += k * b;
    }
}

/// Iterations without improving the best residual score before a stalled
/// run is cut short.
const STALL_ITERS: usize = 3;

fn cat_norm(v: &[Vec<f64>]) -> f64 {
    v.iter().map(|c| dot(c, c)).sum::<f64>().sqrt()
}

fn cat_dot(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| dot(x, y)).sum()
}

/// Solves a conic problem. Malformed problems are reported as errors; every
/// other outcome, including numerical failure, comes back as a status.
pub fn solve(problem: &ConicProblem, opts: &SolverOptions) -> Result<ConicSolution> {
    problem.validate().map_err(Error::InvalidArgument)?;
    let sf = problem.to_standard_form();
    let (sf, scales) = equilibrate(sf);
    Ok(Ipm::new(&sf, &scales, opts).run(problem))
}

/// Row scalings applied before the solve; duals are mapped back with them.
struct RowScales {
    eq: Vec<f64>,
    cones: Vec<Vec<f64>>,
}

/// Scales equality and orthant rows to unit norm and each second-order cone
/// by one factor, so rows built from very different magnitudes (powers,
/// SINR-weighted channel gains) reach the termination tolerances together.
/// PSD cones are left alone.
fn equilibrate(mut sf: StandardForm) -> (StandardForm, RowScales) {
    let inv = |n: f64| if n > 0.0 && n.is_finite() { 1.0 / n } else { 1.0 };
    let mut eq = Vec::with_capacity(sf.b.len());
    for r in 0..sf.a.nrows() {
        let d = inv(sf.a.row(r).norm());
        sf.a.row_mut(r).scale_mut(d);
        sf.b[r] *= d;
        eq.push(d);
    }
    let mut cones = Vec::with_capacity(sf.cones.len());
    for c in &mut sf.cones {
        let m = c.g.nrows();
        let d: Vec<f64> = match c.cone {
            Cone::Nonneg(_) => (0..m).map(|r| inv(c.g.row(r).norm())).collect(),
            Cone::Soc(_) => {
                let widest = (0..m).map(|r| c.g.row(r).norm()).fold(0.0, f64::max);
                vec![inv(widest); m]
            }
            Cone::Psd(_) => vec![1.0; m],
        };
        for (r, &dr) in d.iter().enumerate() {
            c.g.row_mut(r).scale_mut(dr);
            c.h[r] *= dr;
        }
        cones.push(d);
    }
    (sf, RowScales { eq, cones })
}

struct Ipm<'a> {
    sf: &'a StandardForm,
    scales: &'a RowScales,
    opts: &'a SolverOptions,
    cones: Vec<Cone>,
    degree: usize,
    bnorm: f64,
    hnorm: f64,
    cnorm: f64,
}

impl<'a> Ipm<'a> {
    fn new(sf: &'a StandardForm, scales: &'a RowScales, opts: &'a SolverOptions) -> Self {
        let cones: Vec<Cone> = sf.cones.iter().map(|c| c.cone).collect();
        let degree = cones.iter().map(|c| c.degree()).sum();
        let hnorm = sf.cones.iter().map(|c| dot(&c.h, &c.h)).sum::<f64>().sqrt();
        Self {
            sf,
            scales,
            opts,
            cones,
            degree,
            bnorm: norm(&sf.b),
            hnorm,
            cnorm: norm(&sf.c),
        }
    }

    fn g_mul(&self, x: &[f64]) -> Vec<Vec<f64>> {
        self.sf.cones.iter().map(|c| c.g_mul(x)).collect()
    }

    fn gt_mul(&self, z: &[Vec<f64>]) -> Vec<f64> {
        let mut out = vec![0.0; self.sf.n];
        for (c, zc) in self.sf.cones.iter().zip(z) {
            c.gt_mul_add(zc, &mut out);
        }
        out
    }

    fn a_mul(&self, x: &[f64]) -> Vec<f64> {
        (&self.sf.a * DVector::from_column_slice(x)).as_slice().to_vec()
    }

    fn at_mul(&self, y: &[f64]) -> Vec<f64> {
        self.sf.a.tr_mul(&DVector::from_column_slice(y)).as_slice().to_vec()
    }

    fn h_dot(&self, z: &[Vec<f64>]) -> f64 {
        self.sf.cones.iter().zip(z).map(|(c, zc)| dot(&c.h, zc)).sum()
    }

    fn initial_point(&self) -> Option<Iterate> {
        let scalings: Vec<Scaling> = self.cones.iter().map(|&c| Scaling::identity(c)).collect();
        let kkt = Kkt::factor(self.sf, &scalings)?;
        let n = self.sf.n;

        let h: Vec<Vec<f64>> = self.sf.cones.iter().map(|c| c.h.clone()).collect();
        let primal = kkt.solve(&vec![0.0; n], &self.sf.b, &h);
        let mut s: Vec<Vec<f64>> = primal.dz.iter().map(|v| v.iter().map(|a| -a).collect()).collect();

        let zeros: Vec<Vec<f64>> = self.cones.iter().map(|c| vec![0.0; c.dim()]).collect();
        let neg_c: Vec<f64> = self.sf.c.iter().map(|v| -v).collect();
        let dual = kkt.solve(&neg_c, &vec![0.0; self.sf.b.len()], &zeros);
        let mut z = dual.dz;

        for v in [&mut s, &mut z] {
            let margin = self
                .cones
                .iter()
                .zip(v.iter())
                .map(|(c, vc)| c.margin(vc))
                .fold(f64::INFINITY, f64::min);
            let shift_needed = -margin;
            if !margin.is_finite() {
                continue;
            }
            if shift_needed >= -1e-8 * cat_norm(v).max(1.0) {
                for (c, vc) in self.cones.iter().zip(v.iter_mut()) {
                    axpy(vc, 1.0 + shift_needed, &c.identity());
                }
            }
        }
        Some(Iterate {
            x: primal.dx,
            y: dual.dy,
            s,
            z,
            tau: 1.0,
            kappa: 1.0,
        })
    }

    fn run(&self, problem: &ConicProblem) -> ConicSolution {
        let opts = self.opts;
        let mut history = Vec::new();
        let mut min_step = f64::INFINITY;
        let Some(mut it) = self.initial_point() else {
            return self.failure(problem, None, history, min_step, 0);
        };
        let nu = self.degree as f64 + 1.0;
        // Best iterate by residual score, kept in case later steps lose
        // accuracy near the boundary.
        let mut best: Option<(f64, Iterate, usize)> = None;
        let mut since_best = 0;

        for iter in 0..=opts.max_iter {
            // Residuals of the homogeneous system.
            let gtz = self.gt_mul(&it.z);
            let aty = self.at_mul(&it.y);
            let rx: Vec<f64> = (0..self.sf.n).map(|i| aty[i] + gtz[i] + self.sf.c[i] * it.tau).collect();
            let ax = self.a_mul(&it.x);
            let ry: Vec<f64> = ax.iter().zip(&self.sf.b).map(|(a, b)| -a + b * it.tau).collect();
            let gx = self.g_mul(&it.x);
            let rz: Vec<Vec<f64>> = (0..self.cones.len())
                .map(|k| {
                    (0..self.cones[k].dim())
                        .map(|i| it.s[k][i] + gx[k][i] - self.sf.cones[k].h[i] * it.tau)
                        .collect()
                })
                .collect();
            let cx = dot(&self.sf.c, &it.x);
            let by = dot(&self.sf.b, &it.y);
            let hz = self.h_dot(&it.z);
            let rt = it.kappa + cx + by + hz;
            let sz = cat_dot(&it.s, &it.z);
            let mu = (sz + it.tau * it.kappa) / nu;

            let pcost = cx / it.tau + self.sf.c0;
            let dcost = -(by + hz) / it.tau + self.sf.c0;
            let pres = (norm(&ry) / it.tau / self.bnorm.max(1.0)).max(cat_norm(&rz) / it.tau / self.hnorm.max(1.0));
            let dres = norm(&rx) / it.tau / self.cnorm.max(1.0);
            let gap_abs = sz / (it.tau * it.tau);
            let relgap = gap_abs / pcost.abs().min(dcost.abs()).max(1.0);
            history.push(IterationLog {
                iteration: iter,
                primal_objective: pcost,
                dual_objective: dcost,
                primal_residual: pres,
                dual_residual: dres,
                gap: relgap,
                tau: it.tau,
                kappa: it.kappa,
                step: 0.0,
            });

            log::trace!(
                "ipm {iter:3}: pres {pres:.2e} dres {dres:.2e} gap {relgap:.2e} pcost {pcost:.10e} tau {:.2e} kappa {:.2e}",
                it.tau,
                it.kappa
            );
            if pres <= opts.feas_tol && dres <= opts.feas_tol && relgap <= opts.gap_tol {
                return self.finish(problem, &it, SolveStatus::Optimal, history, min_step, iter, (pres, dres, relgap));
            }
            let score = (pres / opts.feas_tol).max(dres / opts.feas_tol).max(relgap / opts.gap_tol);
            if best.as_ref().is_none_or(|b| score < b.0) {
                best = Some((score, it.clone(), iter));
                since_best = 0;
            } else {
                since_best += 1;
                if since_best >= STALL_ITERS && self.certifiable(&history[best.as_ref().unwrap().2]) {
                    break;
                }
            }
            // Infeasibility certificates, only once the embedding leans
            // toward one (kappa dominating tau).
            // Once tau has collapsed the ray stops improving at round-off, so
            // the looser tolerance applies.
            let certifying = it.kappa > it.tau;
            let cert_tol = if it.tau < 1e-6 * it.kappa { opts.certify_tol } else { opts.feas_tol };
            if certifying && by + hz < 0.0 {
                let res = norm(&(0..self.sf.n).map(|i| aty[i] + gtz[i]).collect::<Vec<_>>()) / -(by + hz);
                if res <= cert_tol {
                    return self.finish(problem, &it, SolveStatus::Infeasible, history, min_step, iter, (pres, dres, relgap));
                }
            }
            if certifying && cx < 0.0 {
                let sg: Vec<Vec<f64>> = (0..self.cones.len())
                    .map(|k| it.s[k].iter().zip(&gx[k]).map(|(a, b)| a + b).collect())
                    .collect();
                let res = norm(&ax).max(cat_norm(&sg)) / -cx;
                if res <= cert_tol {
                    return self.finish(problem, &it, SolveStatus::Unbounded, history, min_step, iter, (pres, dres, relgap));
                }
            }
            if iter == opts.max_iter {
                break;
            }

            // Scalings.
            let mut scalings = Vec::with_capacity(self.cones.len());
            let mut lambda = Vec::with_capacity(self.cones.len());
            let mut ok = true;
            for (k, &cone) in self.cones.iter().enumerate() {
                match Scaling::nesterov_todd(cone, &it.s[k], &it.z[k]) {
                    Some((w, l)) => {
                        scalings.push(w);
                        lambda.push(l);
                    }
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if !ok {
                break;
            }
            let Some(kkt) = Kkt::factor(self.sf, &scalings) else {
                break;
            };

            let h_scaled: Vec<Vec<f64>> = self
                .sf
                .cones
                .iter()
                .zip(&scalings)
                .map(|(c, w)| w.apply_winv_t(&c.h))
                .collect();
            let neg_c: Vec<f64> = self.sf.c.iter().map(|v| -v).collect();
            let d1 = kkt.solve(&neg_c, &self.sf.b, &h_scaled);
            let denom = -it.kappa / it.tau + dot(&self.sf.c, &d1.dx) + dot(&self.sf.b, &d1.dy) + self.h_dot(&d1.dz);

            let rz_scaled: Vec<Vec<f64>> = rz.iter().zip(&scalings).map(|(r, w)| w.apply_winv_t(r)).collect();
            let lam_sq: Vec<Vec<f64>> = self
                .cones
                .iter()
                .zip(&lambda)
                .map(|(c, l)| c.jordan_prod(l, l).iter().map(|v| -v).collect())
                .collect();

            let newton = |eta: f64, ds_rhs: &[Vec<f64>], dk_rhs: f64| {
                let r1: Vec<f64> = rx.iter().map(|v| -eta * v).collect();
                let r2: Vec<f64> = ry.iter().map(|v| eta * v).collect();
                let lam_div: Vec<Vec<f64>> = self
                    .cones
                    .iter()
                    .zip(&lambda)
                    .zip(ds_rhs)
                    .map(|((c, l), d)| c.jordan_div(l, d))
                    .collect();
                let r3: Vec<Vec<f64>> = rz_scaled
                    .iter()
                    .zip(&lam_div)
                    .map(|(r, ld)| r.iter().zip(ld).map(|(a, b)| -eta * a - b).collect())
                    .collect();
                let mut d = kkt.solve(&r1, &r2, &r3);
                let num = -eta * rt - dk_rhs / it.tau
                    - (dot(&self.sf.c, &d.dx) + dot(&self.sf.b, &d.dy) + self.h_dot(&d.dz));
                let dtau = num / denom;
                d.axpy(dtau, &d1);
                let dkappa = (dk_rhs - it.kappa * dtau) / it.tau;
                // W^{-T} ds = lambda \ ds_rhs - W dz
                let ds_scaled: Vec<Vec<f64>> = lam_div
                    .iter()
                    .zip(&d.dz_scaled)
                    .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
                    .collect();
                (d, ds_scaled, dtau, dkappa)
            };

            let max_step = |d: &Direction, ds_scaled: &[Vec<f64>], dtau: f64, dkappa: f64| {
                let mut t = f64::INFINITY;
                for (k, c) in self.cones.iter().enumerate() {
                    t = t.min(c.max_step(&lambda[k], &ds_scaled[k]));
                    t = t.min(c.max_step(&lambda[k], &d.dz_scaled[k]));
                }
                if dtau < 0.0 {
                    t = t.min(-it.tau / dtau);
                }
                if dkappa < 0.0 {
                    t = t.min(-it.kappa / dkappa);
                }
                t
            };

            // Predictor.
            let (da, dsa, dtau_a, dkappa_a) = newton(1.0, &lam_sq, -it.tau * it.kappa);
            let alpha_aff = max_step(&da, &dsa, dtau_a, dkappa_a).min(1.0);
            let sigma = (1.0 - alpha_aff).powi(3).clamp(0.0, 1.0);

            // Corrector.
            let ds_rhs: Vec<Vec<f64>> = self
                .cones
                .iter()
                .enumerate()
                .map(|(k, c)| {
                    let second = c.jordan_prod(&dsa[k], &da.dz_scaled[k]);
                    let e = c.identity();
                    (0..c.dim()).map(|i| lam_sq[k][i] - second[i] + sigma * mu * e[i]).collect()
                })
                .collect();
            let dk_rhs = -it.tau * it.kappa - dtau_a * dkappa_a + sigma * mu;
            let (d, ds_scaled, dtau, dkappa) = newton(1.0 - sigma, &ds_rhs, dk_rhs);
            let alpha = (opts.step_fraction * max_step(&d, &ds_scaled, dtau, dkappa)).min(1.0);
            if !alpha.is_finite() || alpha <= 1e-10 {
                min_step = min_step.min(alpha.max(0.0));
                break;
            }
            min_step = min_step.min(alpha);
            if let Some(last) = history.last_mut() {
                last.step = alpha;
            }

            axpy(&mut it.x, alpha, &d.dx);
            axpy(&mut it.y, alpha, &d.dy);
            for k in 0..self.cones.len() {
                let ds = scalings[k].apply_wt(&ds_scaled[k]);
                axpy(&mut it.s[k], alpha, &ds);
                axpy(&mut it.z[k], alpha, &d.dz[k]);
            }
            it.tau += alpha * dtau;
            it.kappa += alpha * dkappa;
            if ![it.tau, it.kappa].iter().all(|v| v.is_finite() && *v > 0.0) {
                break;
            }
        }

        // Stalled or out of iterations: accept the best point if it is
        // certified to the looser tolerance.
        let iterations = history.len().saturating_sub(1);
        if let Some((_, b, k)) = best {
            let h = history[k];
            if self.certifiable(&h) {
                return self.finish(
                    problem,
                    &b,
                    SolveStatus::Optimal,
                    history,
                    min_step,
                    iterations,
                    (h.primal_residual, h.dual_residual, h.gap),
                );
            }
        }
        self.failure(problem, Some(&it), history, min_step, iterations)
    }

    fn certifiable(&self, h: &IterationLog) -> bool {
        let tol = self.opts.certify_tol;
        h.primal_residual <= tol && h.dual_residual <= tol && h.gap <= tol
    }

    fn failure(
        &self,
        problem: &ConicProblem,
        it: Option<&Iterate>,
        history: Vec<IterationLog>,
        min_step: f64,
        iterations: usize,
    ) -> ConicSolution {
        match it {
            Some(it) => {
                let (p, d, g) = history
                    .last()
                    .map(|h| (h.primal_residual, h.dual_residual, h.gap))
                    .unwrap_or((f64::NAN, f64::NAN, f64::NAN));
                self.finish(problem, it, SolveStatus::NumericalFailure, history, min_step, iterations, (p, d, g))
            }
            None => ConicSolution {
                status: SolveStatus::NumericalFailure,
                x: vec![0.0; self.sf.n],
                eq_duals: vec![0.0; self.sf.b.len()],
                ineq_duals: Vec::new(),
                soc_duals: Vec::new(),
                psd_duals: Vec::new(),
                primal_objective: f64::NAN,
                dual_objective: f64::NAN,
                gap: f64::NAN,
                primal_residual: f64::NAN,
                dual_residual: f64::NAN,
                iterations,
                min_step,
                history,
            },
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn finish(
        &self,
        problem: &ConicProblem,
        it: &Iterate,
        status: SolveStatus,
        history: Vec<IterationLog>,
        min_step: f64,
        iterations: usize,
        (pres, dres, gap): (f64, f64, f64),
    ) -> ConicSolution {
        // Certificates are normalized so the violated objective equals -1;
        // solutions are divided by tau.
        let (xs, zs) = match status {
            SolveStatus::Infeasible => (0.0, 1.0 / -(dot(&self.sf.b, &it.y) + self.h_dot(&it.z))),
            SolveStatus::Unbounded => (1.0 / -dot(&self.sf.c, &it.x), 0.0),
            _ => (1.0 / it.tau, 1.0 / it.tau),
        };
        let x: Vec<f64> = it.x.iter().map(|v| v * xs).collect();
        let y: Vec<f64> = it.y.iter().zip(&self.scales.eq).map(|(v, d)| v * zs * d).collect();
        let z: Vec<Vec<f64>> = it
            .z
            .iter()
            .zip(&self.scales.cones)
            .map(|(c, d)| c.iter().zip(d).map(|(v, dv)| v * zs * dv).collect())
            .collect();

        let mut k = 0;
        let ineq_duals = if problem.ineqs.is_empty() {
            Vec::new()
        } else {
            k += 1;
            z[0].clone()
        };
        let soc_duals: Vec<Vec<f64>> = z[k..k + problem.socs.len()].to_vec();
        k += problem.socs.len();
        let psd_duals = self.cones[k..]
            .iter()
            .zip(&z[k..])
            .map(|(c, zc)| match *c {
                Cone::Psd(order) => super::cones::smat(zc, order),
                _ => unreachable!("PSD cones are last"),
            })
            .collect();

        let (pobj, dobj) = match status {
            SolveStatus::Optimal | SolveStatus::NumericalFailure => (
                dot(&self.sf.c, &it.x) / it.tau + self.sf.c0,
                -(dot(&self.sf.b, &it.y) + self.h_dot(&it.z)) / it.tau + self.sf.c0,
            ),
            SolveStatus::Infeasible => (f64::INFINITY, f64::INFINITY),
            SolveStatus::Unbounded => (f64::NEG_INFINITY, f64::NEG_INFINITY),
        };
        ConicSolution {
            status,
            x,
            eq_duals: y,
            ineq_duals,
            soc_duals,
            psd_duals,
            primal_objective: pobj,
            dual_objective: dobj,
            gap,
            primal_residual: pres,
            dual_residual: dres,
            iterations,
            min_step,
            history,
        }
    }
}
