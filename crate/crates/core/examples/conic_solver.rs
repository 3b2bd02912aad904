//! A complex semidefinite program and an SOCP through the modeling layer.
//!
//! `min <C, X>` over `tr X = 1, X ⪰ 0` is the smallest eigenvalue of `C`, so
//! the answer can be checked against the eigensolver.

use nalgebra::DMatrix;
use num_complex::Complex64;
use secure_dfrc::conic::{solve, ConicProblem, LinExpr, Sense, SolverOptions};
use secure_dfrc::linalg::{min_eigenvalue, HermitianMatrix};

fn main() -> secure_dfrc::Result<()> {
    let c = |re, im| Complex64::new(re, im);
    let cost = HermitianMatrix::new(DMatrix::from_row_slice(
        3,
        3,
        &[c(1.0, 0.0), c(0.0, 2.0), c(0.5, 0.0), c(0.0, -2.0), c(3.0, 0.0), c(0.0, 0.0), c(0.5, 0.0), c(0.0, 0.0), c(-1.0, 0.0)],
    ))?;
    let mut p = ConicProblem::new();
    let x = p.add_hermitian_block(3);
    p.minimize(x.inner(&cost));
    p.add_eq("unit trace", x.trace(), 1.0);
    let sol = solve(&p, &SolverOptions::default())?.require_optimal()?;
    println!(
        "SDP: objective {:.9}, lambda_min {:.9}, {} iterations, gap {:.1e}",
        sol.primal_objective,
        min_eigenvalue(&cost)?,
        sol.iterations,
        sol.gap
    );

    // Closest point to (3, 4) in the unit disc, written as an SOC.
    let mut q = ConicProblem::new();
    let (u, v, t) = (q.add_scalar(), q.add_scalar(), q.add_scalar());
    q.minimize(t.expr());
    q.add_soc("distance", vec![u.expr() - LinExpr::constant(3.0), v.expr() - LinExpr::constant(4.0)], t.expr());
    q.add_soc("disc", vec![u.expr(), v.expr()], LinExpr::constant(1.0));
    q.add_ineq("u >= 0", u.expr(), Sense::Ge, 0.0);
    let s = solve(&q, &SolverOptions::default())?.require_optimal()?;
    println!("SOCP: point ({:.6}, {:.6}), distance {:.6} (expect 4)", s.scalar(u), s.scalar(v), s.scalar(t));
    Ok(())
}
