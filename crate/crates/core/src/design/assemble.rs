//! Conic assembly of the design subproblems.

use crate::conic::{
    hvec_constant, solve, ConicProblem, ConicSolution, HermitianBlock, LinExpr, ScalarVar, Sense, SolveStatus,
    SolverOptions,
};
use crate::error::{Error, Result};
use crate::linalg::{quadratic_form, CVector, HermitianMatrix};
use crate::scenario::{AngularGrid, Scenario};

use super::Thresholds;

/// The matrix variables `W_1..W_K` and `R_N` of one subproblem.
#[derive(Debug, Clone)]
pub struct DesignVars {
    pub w: Vec<HermitianBlock>,
    pub rn: HermitianBlock,
}

impl DesignVars {
    fn new(prob: &mut ConicProblem, n: usize, k: usize) -> Self {
        let w = (0..k).map(|_| prob.add_hermitian_block(n)).collect();
        let rn = prob.add_hermitian_block(n);
        Self { w, rn }
    }

    /// `a^H (Σ W_i) a`.
    pub fn signal_quad(&self, a: &CVector) -> LinExpr {
        let mut e = LinExpr::zero();
        for w in &self.w {
            e.add_scaled(&w.quad_form(a), 1.0);
        }
        e
    }

    /// `a^H R_X a`.
    pub fn rx_quad(&self, a: &CVector) -> LinExpr {
        self.signal_quad(a) + self.rn.quad_form(a)
    }

    pub fn trace_rx(&self) -> LinExpr {
        let mut e = self.rn.trace();
        for w in &self.w {
            e.add_scaled(&w.trace(), 1.0);
        }
        e
    }

    /// Isometric coordinates of `R_X`.
    fn rx_hvec(&self) -> Vec<LinExpr> {
        let mut acc = self.rn.hvec();
        for w in &self.w {
            for (a, b) in acc.iter_mut().zip(w.hvec()) {
                a.add_scaled(&b, 1.0);
            }
        }
        acc
    }

    pub fn values(&self, sol: &ConicSolution) -> (Vec<HermitianMatrix>, HermitianMatrix) {
        (self.w.iter().map(|b| sol.hermitian(b)).collect(), sol.hermitian(&self.rn))
    }
}

/// `SINR_i ≥ γ_b` multiplied through by its (positive) denominator:
/// `g^H W_i g - γ_b (Σ_{k≠i} g^H W_k g + g^H R_N g) ≥ γ_b σ²` with
/// `g = conj(h_i)`.
#[derive(Debug, Clone)]
pub struct LinearizedSinr {
    pub user: usize,
    pub gamma_b: f64,
    response: CVector,
    noise_power: f64,
}

pub fn linearized_user_sinr_constraint(scn: &Scenario, i: usize, gamma_b: f64) -> Result<LinearizedSinr> {
    if i >= scn.n_users() {
        return Err(Error::InvalidArgument(format!("user index {i} out of range for K = {}", scn.n_users())));
    }
    if !(gamma_b > 0.0) {
        return Err(Error::InvalidArgument(format!("gamma_b must be positive, got {gamma_b}")));
    }
    Ok(LinearizedSinr {
        user: i,
        gamma_b,
        response: scn.user_response(i),
        noise_power: scn.noise_power,
    })
}

impl LinearizedSinr {
    pub fn expr(&self, vars: &DesignVars) -> LinExpr {
        let g = &self.response;
        let mut e = vars.w[self.user].quad_form(g);
        for (k, w) in vars.w.iter().enumerate() {
            if k != self.user {
                e.add_scaled(&w.quad_form(g), -self.gamma_b);
            }
        }
        e.add_scaled(&vars.rn.quad_form(g), -self.gamma_b);
        e
    }

    pub fn rhs(&self) -> f64 {
        self.gamma_b * self.noise_power
    }

    /// Left side minus right side at given matrices.
    pub fn slack(&self, w_list: &[HermitianMatrix], r_n: &HermitianMatrix) -> Result<f64> {
        let g = &self.response;
        let mut interference = quadratic_form(g, r_n)? + self.noise_power;
        for (k, w) in w_list.iter().enumerate() {
            if k != self.user {
                interference += quadratic_form(g, w)?;
            }
        }
        Ok(quadratic_form(g, &w_list[self.user])? - self.gamma_b * interference)
    }
}

/// Uncertainty angles Φ and sidelobe angles Ω for the uncertain design.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternRegions {
    pub phi: Vec<f64>,
    pub omega: Vec<f64>,
}

impl PatternRegions {
    /// Φ samples `[θ0 - Δθ, θ0 + Δθ]` at the grid resolution around θ0; Ω is
    /// every grid angle farther than `Δθ + guard` from θ0.
    pub fn new(scn: &Scenario, grid: &AngularGrid, guard: f64) -> Result<Self> {
        let t = &scn.target;
        let res = grid.resolution();
        let phi = if t.delta_theta() == 0.0 {
            vec![t.theta0()]
        } else if res > 0.0 {
            t.uncertainty_angles(res)
        } else {
            Vec::new()
        };
        if phi.is_empty() {
            return Err(Error::InvalidArgument("uncertainty interval has no angle on the grid".into()));
        }
        let reach = t.delta_theta() + guard + 1e-9;
        let omega: Vec<f64> = grid
            .angles()
            .iter()
            .copied()
            .filter(|a| (a - t.theta0()).abs() > reach)
            .collect();
        if omega.is_empty() {
            return Err(Error::InvalidArgument("sidelobe region has no angle on the grid".into()));
        }
        Ok(Self { phi, omega })
    }
}

/// Constraint families, used to build partial problems when diagnosing
/// infeasibility.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Family {
    UserSinr,
    Beampattern,
    Sidelobe,
    Ripple,
}

impl Family {
    pub fn label(self) -> &'static str {
        match self {
            Family::UserSinr => "user SINR",
            Family::Beampattern => "beampattern mismatch",
            Family::Sidelobe => "sidelobe gap",
            Family::Ripple => "mainlobe ripple",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Subproblem {
    pub problem: ConicProblem,
    pub vars: DesignVars,
    /// Epigraph scalars `t_m ≤ √A(θ_m)` (quadratic-transform problems only).
    pub aux: Vec<ScalarVar>,
}

fn base(scn: &Scenario) -> (ConicProblem, DesignVars) {
    let mut prob = ConicProblem::new();
    let vars = DesignVars::new(&mut prob, scn.n_antennas(), scn.n_users());
    prob.add_eq("power", vars.trace_rx(), scn.power_budget);
    (prob, vars)
}

fn add_user_sinr(prob: &mut ConicProblem, vars: &DesignVars, scn: &Scenario, thr: &Thresholds) -> Result<()> {
    for i in 0..scn.n_users() {
        let row = linearized_user_sinr_constraint(scn, i, thr.gamma_b)?;
        prob.add_ineq(format!("user_sinr_{i}"), row.expr(vars), Sense::Ge, row.rhs());
    }
    Ok(())
}

fn add_beampattern(prob: &mut ConicProblem, vars: &DesignVars, r_d: &HermitianMatrix, gamma_bp: f64) {
    if !gamma_bp.is_finite() {
        return;
    }
    let target = hvec_constant(r_d);
    let v: Vec<LinExpr> = vars
        .rx_hvec()
        .into_iter()
        .zip(target)
        .map(|(e, c)| e - LinExpr::constant(c))
        .collect();
    prob.add_soc("beampattern", v, LinExpr::constant(gamma_bp.sqrt()));
}

fn add_pattern_shape(
    prob: &mut ConicProblem,
    vars: &DesignVars,
    scn: &Scenario,
    regions: &PatternRegions,
    thr: &Thresholds,
    families: &[Family],
) {
    let p0 = vars.rx_quad(&scn.steering(scn.target.theta0()));
    if families.contains(&Family::Sidelobe) {
        for (m, &theta) in regions.omega.iter().enumerate() {
            let e = p0.clone() - vars.rx_quad(&scn.steering(theta));
            prob.add_ineq(format!("sidelobe_{m}"), e, Sense::Ge, thr.gamma_s);
        }
    }
    if families.contains(&Family::Ripple) {
        for (k, &theta) in regions.phi.iter().enumerate() {
            let pk = vars.rx_quad(&scn.steering(theta));
            let upper = p0.scaled(1.0 + thr.ripple) - pk.clone();
            prob.add_ineq(format!("ripple_upper_{k}"), upper, Sense::Ge, 0.0);
            let lower = pk - p0.scaled(1.0 - thr.ripple);
            prob.add_ineq(format!("ripple_lower_{k}"), lower, Sense::Ge, 0.0);
        }
    }
}

fn check_r_d(scn: &Scenario, r_d: &HermitianMatrix) -> Result<()> {
    if r_d.dim() != scn.n_antennas() {
        return Err(Error::DimensionMismatch {
            expected: format!("{0} x {0}", scn.n_antennas()),
            found: format!("{0} x {0}", r_d.dim()),
        });
    }
    Ok(())
}

/// `M = |α|² a0^H (Σ W_i) a0` as an expression.
fn m_expr(scn: &Scenario, vars: &DesignVars) -> LinExpr {
    vars.signal_quad(&scn.steering(scn.target.theta0())).scaled(scn.target.gain_sq())
}

/// `N = |α|² a0^H R_N a0 + σ²` as an expression.
fn n_expr(scn: &Scenario, vars: &DesignVars) -> LinExpr {
    vars.rn.quad_form(&scn.steering(scn.target.theta0())).scaled(scn.target.gain_sq())
        + LinExpr::constant(scn.noise_power)
}

pub(crate) fn p8_problem(
    scn: &Scenario,
    r_d: &HermitianMatrix,
    thr: &Thresholds,
    c: Option<f64>,
    families: &[Family],
) -> Result<Subproblem> {
    check_r_d(scn, r_d)?;
    if !(scn.target.gain_sq() > 0.0) {
        return Err(Error::DegenerateTarget);
    }
    let (mut prob, vars) = base(scn);
    if families.contains(&Family::UserSinr) {
        add_user_sinr(&mut prob, &vars, scn, thr)?;
    }
    if families.contains(&Family::Beampattern) {
        add_beampattern(&mut prob, &vars, r_d, thr.gamma_bp);
    }
    if let Some(c) = c {
        prob.minimize(m_expr(scn, &vars) - n_expr(scn, &vars).scaled(c));
    }
    Ok(Subproblem {
        problem: prob,
        vars,
        aux: Vec::new(),
    })
}

/// The convex surrogate `min M - cN` over the relaxed precise-angle
/// constraint set (power, user SINR, beampattern mismatch, PSD).
pub fn assemble_p8_subproblem(scn: &Scenario, r_d: &HermitianMatrix, thr: &Thresholds, c: f64) -> Result<Subproblem> {
    if !(c >= 0.0 && c.is_finite()) {
        return Err(Error::InvalidArgument(format!("Dinkelbach parameter must be finite and >= 0, got {c}")));
    }
    p8_problem(scn, r_d, thr, Some(c), &[Family::UserSinr, Family::Beampattern])
}

pub(crate) fn p9_problem(
    scn: &Scenario,
    regions: &PatternRegions,
    thr: &Thresholds,
    y: Option<&[f64]>,
    families: &[Family],
) -> Result<Subproblem> {
    if !(scn.target.gain_sq() > 0.0) {
        return Err(Error::DegenerateTarget);
    }
    let (mut prob, vars) = base(scn);
    if families.contains(&Family::UserSinr) {
        add_user_sinr(&mut prob, &vars, scn, thr)?;
    }
    add_pattern_shape(&mut prob, &vars, scn, regions, thr, families);
    let mut aux = Vec::new();
    if let Some(y) = y {
        let g2 = scn.target.gain_sq();
        // Positive rescaling keeps the coefficients O(1) when some y_m is large.
        let ymax = y.iter().copied().fold(1.0, f64::max);
        let norm = 1.0 / (ymax * ymax);
        let mut obj = LinExpr::zero();
        for (m, (&theta, &ym)) in regions.phi.iter().zip(y).enumerate() {
            let a = scn.steering(theta);
            let t = prob.add_scalar();
            let a_m = vars.rn.quad_form(&a).scaled(g2) + LinExpr::constant(scn.noise_power);
            prob.add_rotated_soc(format!("sqrt_a_{m}"), t.expr(), a_m, LinExpr::constant(1.0));
            // maximize 2 y t - y² B  <=>  minimize y² B - 2 y t
            obj.add_scaled(&vars.signal_quad(&a), norm * ym * ym * g2);
            obj.add_term(t.0, -2.0 * norm * ym);
            aux.push(t);
        }
        prob.minimize(obj);
    }
    Ok(Subproblem { problem: prob, vars, aux })
}

/// The quadratic-transform surrogate
/// `max Σ_m 2 y_m √A(θ_m) - y_m² B(θ_m)` over the relaxed uncertain-angle
/// constraint set, posed as a minimization of the negated objective.
pub fn assemble_p9_subproblem(scn: &Scenario, regions: &PatternRegions, thr: &Thresholds, y: &[f64]) -> Result<Subproblem> {
    if y.len() != regions.phi.len() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} weights", regions.phi.len()),
            found: y.len().to_string(),
        });
    }
    if y.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidArgument("quadratic-transform weights must be positive".into()));
    }
    p9_problem(
        scn,
        regions,
        thr,
        Some(y),
        &[Family::UserSinr, Family::Sidelobe, Family::Ripple],
    )
}

/// Solves a subproblem, requiring an optimal status.
pub(crate) fn solve_sub(sub: &Subproblem, opts: &SolverOptions) -> Result<ConicSolution> {
    solve(&sub.problem, opts)?.require_optimal()
}

/// Phase-1 feasibility solve. On infeasibility, re-solves with one family
/// at a time to name the one that fails.
pub(crate) fn phase1<F>(build: F, families: &[Family], opts: &SolverOptions) -> Result<(Subproblem, ConicSolution)>
where
    F: Fn(&[Family]) -> Result<Subproblem>,
{
    let sub = build(families)?;
    let sol = solve(&sub.problem, opts)?;
    match sol.status {
        SolveStatus::Optimal => Ok((sub, sol)),
        SolveStatus::Infeasible => {
            let mut failing = Vec::new();
            for &f in families {
                let alone = build(&[f])?;
                if solve(&alone.problem, opts)?.status == SolveStatus::Infeasible {
                    failing.push(f.label());
                }
            }
            let family = if failing.is_empty() {
                let names: Vec<_> = families.iter().map(|f| f.label()).collect();
                format!("{} (jointly)", names.join(" + "))
            } else {
                failing.join(" + ")
            };
            Err(Error::Infeasible { family })
        }
        _ => Err(sol.require_optimal().unwrap_err()),
    }
}

/// `M` and `N` of the Dinkelbach ratio at given matrices.
pub(crate) fn ratio_terms(scn: &Scenario, w_list: &[HermitianMatrix], r_n: &HermitianMatrix) -> Result<(f64, f64)> {
    let a0 = scn.steering(scn.target.theta0());
    let g2 = scn.target.gain_sq();
    let mut m = 0.0;
    for w in w_list {
        m += quadratic_form(&a0, w)?;
    }
    Ok((g2 * m, g2 * quadratic_form(&a0, r_n)? + scn.noise_power))
}

/// `A(θ)` and `B(θ)` of the quadratic transform.
pub(crate) fn qt_terms(
    scn: &Scenario,
    theta: f64,
    w_list: &[HermitianMatrix],
    r_n: &HermitianMatrix,
) -> Result<(f64, f64)> {
    let a = scn.steering(theta);
    let g2 = scn.target.gain_sq();
    let mut b = 0.0;
    for w in w_list {
        b += quadratic_form(&a, w)?;
    }
    Ok((g2 * quadratic_form(&a, r_n)? + scn.noise_power, g2 * b))
}
