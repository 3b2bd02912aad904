mod common;

use nalgebra::{DMatrix, DVector};
use secure_dfrc::conic::{check_point, solve, ConicProblem, LinExpr, Sense, SolveStatus, SolverOptions};

#[test]
fn generated_suite_matches_constructed_optima() {
    let opts = SolverOptions::default();
    let mut failures = Vec::new();
    for case in common::oracle_suite() {
        let sol = solve(&case.problem, &opts).unwrap();
        let err = (sol.primal_objective - case.optimum).abs();
        if sol.status != SolveStatus::Optimal || err > 1e-6 {
            failures.push(format!(
                "{}: status {:?}, objective {} vs {}, iters {}",
                case.name, sol.status, sol.primal_objective, case.optimum, sol.iterations
            ));
        }
    }
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}


fn lp3() -> (ConicProblem, [f64; 3], [[f64; 3]; 2], [f64; 2]) {
    let c = [2.0, -1.0, 0.5];
    let a = [[1.0, 1.0, 1.0], [1.0, -2.0, 3.0]];
    let b = [4.0, 1.0];
    let mut p = ConicProblem::new();
    let x: Vec<_> = (0..3).map(|_| p.add_scalar()).collect();
    let mut obj = LinExpr::zero();
    for j in 0..3 {
        obj.add_term(x[j].0, c[j]);
        p.add_ineq(format!("x{j}"), x[j].expr(), Sense::Ge, 0.0);
    }
    p.minimize(obj);
    for i in 0..2 {
        let mut e = LinExpr::zero();
        for j in 0..3 {
            e.add_term(x[j].0, a[i][j]);
        }
        p.add_eq(format!("row{i}"), e, b[i]);
    }
    (p, c, a, b)
}

/// Minimum over basic feasible solutions: every pair of columns, solved by
/// Cramer's rule.
fn vertex_enumeration(c: [f64; 3], a: [[f64; 3]; 2], b: [f64; 2]) -> f64 {
    let mut best = f64::INFINITY;
    for (j, k) in [(0, 1), (0, 2), (1, 2)] {
        let det = a[0][j] * a[1][k] - a[0][k] * a[1][j];
        if det.abs() < 1e-12 {
            continue;
        }
        let xj = (b[0] * a[1][k] - a[0][k] * b[1]) / det;
        let xk = (a[0][j] * b[1] - b[0] * a[1][j]) / det;
        if xj >= -1e-12 && xk >= -1e-12 {
            best = best.min(c[j] * xj + c[k] * xk);
        }
    }
    best
}

#[test]
fn three_variable_lp_matches_vertex_enumeration() {
    let (p, c, a, b) = lp3();
    let expected = vertex_enumeration(c, a, b);
    assert!(expected.is_finite());
    let sol = solve(&p, &SolverOptions::default()).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal);
    assert!((sol.primal_objective - expected).abs() < 1e-7, "{} vs {expected}", sol.primal_objective);
}

fn lambda_min() -> (ConicProblem, secure_dfrc::conic::SymmetricBlock) {
    let mut p = ConicProblem::new();
    let x = p.add_symmetric_block(2);
    p.minimize(x.inner(&DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0]))));
    p.add_eq("trace", x.trace(), 1.0);
    (p, x)
}

#[test]
fn lambda_min_and_projection_are_exact() {
    let (p, x) = lambda_min();
    let sol = solve(&p, &SolverOptions::default()).unwrap();
    assert!((sol.primal_objective - 1.0).abs() <= 1e-8);
    let xv = sol.symmetric(&x);
    assert!((xv - DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.0]))).amax() <= 1e-8);

    let x0 = [0.3, -1.7, 2.2, 0.0];
    let mut p = ConicProblem::new();
    let t = p.add_scalar();
    let xs: Vec<_> = (0..4).map(|_| p.add_scalar()).collect();
    p.minimize(t.expr());
    p.add_soc("ball", xs.iter().zip(x0).map(|(v, c)| v.expr() - LinExpr::constant(c)).collect(), t.expr());
    let sol = solve(&p, &SolverOptions::default()).unwrap();
    assert!(sol.scalar(t).abs() <= 1e-8);
    for (v, c) in xs.iter().zip(x0) {
        assert!((sol.scalar(*v) - c).abs() <= 1e-8);
    }
}

#[test]
fn certificate_check_examples() {
    let (p, x) = lambda_min();
    let sol = solve(&p, &SolverOptions::default()).unwrap();
    assert!(check_point(&p, &sol.x, 1e-7).passed());

    // Perturbing the off-diagonal keeps the trace but breaks PSD-ness of the
    // rank-one optimum.
    let mut bumped = sol.x.clone();
    bumped[x.entry(1, 0).terms[0].0] += 0.1;
    let rep = check_point(&p, &bumped, 1e-7);
    assert!(!rep.passed());
    assert!(rep.psd_min_eigs[0] < -1e-3);

    let rep = check_point(&p, &vec![0.0; p.num_vars()], 1e-7);
    assert!((rep.eq_residuals[0] - 1.0).abs() < 1e-15);
    assert_eq!(rep.violated(&p), vec!["trace".to_string()]);
}

#[test]
fn perturbed_equality_is_flagged() {
    // X fixed entrywise: the off-diagonal perturbation shows up as an
    // equality residual.
    let mut p = ConicProblem::new();
    let x = p.add_symmetric_block(2);
    p.minimize(x.trace());
    p.add_eq("x00", x.entry(0, 0), 1.0);
    p.add_eq("x10", x.entry(1, 0), 0.0);
    p.add_eq("x11", x.entry(1, 1), 1.0);
    let sol = solve(&p, &SolverOptions::default()).unwrap();
    let mut bumped = sol.x.clone();
    bumped[x.entry(1, 0).terms[0].0] += 0.1;
    let rep = check_point(&p, &bumped, 1e-7);
    assert!((rep.eq_residuals[1] - 0.1).abs() < 1e-7);
    assert_eq!(rep.violated(&p), vec!["x10".to_string()]);
}

#[test]
fn infeasible_sdp_returns_farkas_certificate() {
    // X psd with X_00 + X_11 = -1 has no solution.
    let mut p = ConicProblem::new();
    let x = p.add_symmetric_block(2);
    p.minimize(x.entry(1, 0));
    p.add_eq("trace", x.trace(), -1.0);
    let sol = solve(&p, &SolverOptions::default()).unwrap();
    assert_eq!(sol.status, SolveStatus::Infeasible);
    // Certificate: b^T y = -1 (normalized), y * I in the dual cone.
    assert!((sol.eq_duals[0] * -1.0 + 1.0).abs() < 1e-6);
    assert!(sol.eq_duals[0] > 0.0);
    assert!(sol.psd_duals[0].symmetric_eigenvalues().min() > -1e-8);
}

#[test]
fn duality_gap_closes_with_dual_below_primal() {
    for case in common::oracle_suite().into_iter().take(20) {
        let sol = solve(&case.problem, &SolverOptions::default()).unwrap();
        let scale = 1.0 + case.optimum.abs();
        assert!(sol.dual_objective <= sol.primal_objective + 1e-7 * scale, "{}", case.name);
        assert!(sol.primal_objective - sol.dual_objective <= 1e-6 * scale, "{}", case.name);
    }
}

#[test]
fn dump_format_has_header_and_dense_rows() {
    let (p, _) = lambda_min();
    let mut buf = Vec::new();
    p.write_dump(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let first = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert!(first.starts_with("vars"), "{first}");
    assert!(text.lines().any(|l| l.starts_with("A 1 3")));
}
