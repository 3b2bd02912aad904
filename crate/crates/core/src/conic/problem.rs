//! Modeling layer: variables (free scalars and PSD matrix blocks), affine
//! expressions over them, and the constraint families the solver accepts.

use std::collections::BTreeMap;
use std::io::Write;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::cones::{svec_index, Cone};
use crate::linalg::{CVector, HermitianMatrix};

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Affine expression `sum_k coef_k * x[var_k] + constant`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinExpr {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl LinExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self {
            terms: Vec::new(),
            constant: c,
        }
    }

    pub fn term(var: usize, coef: f64) -> Self {
        Self {
            terms: vec![(var, coef)],
            constant: 0.0,
        }
    }

    pub fn add_term(&mut self, var: usize, coef: f64) {
        if coef != 0.0 {
            self.terms.push((var, coef));
        }
    }

    /// `self += k * other`.
    pub fn add_scaled(&mut self, other: &LinExpr, k: f64) {
        self.terms.extend(other.terms.iter().map(|&(v, c)| (v, c * k)));
        self.constant += k * other.constant;
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            terms: self.terms.iter().map(|&(v, c)| (v, c * k)).collect(),
            constant: self.constant * k,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|&(v, c)| c * x[v]).sum::<f64>()
    }

    /// Merged, sorted, zero-free coefficient list.
    pub fn compact(&self) -> Vec<(usize, f64)> {
        let mut map = BTreeMap::new();
        for &(v, c) in &self.terms {
            *map.entry(v).or_insert(0.0) += c;
        }
        map.into_iter().filter(|&(_, c)| c != 0.0).collect()
    }
}

impl Add for LinExpr {
    type Output = LinExpr;
    fn add(mut self, rhs: LinExpr) -> LinExpr {
        self.add_scaled(&rhs, 1.0);
        self
    }
}

impl Sub for LinExpr {
    type Output = LinExpr;
    fn sub(mut self, rhs: LinExpr) -> LinExpr {
        self.add_scaled(&rhs, -1.0);
        self
    }
}

impl Neg for LinExpr {
    type Output = LinExpr;
    fn neg(self) -> LinExpr {
        self.scaled(-1.0)
    }
}

impl Mul<f64> for LinExpr {
    type Output = LinExpr;
    fn mul(self, k: f64) -> LinExpr {
        self.scaled(k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScalarVar(pub usize);

impl ScalarVar {
    pub fn expr(self) -> LinExpr {
        LinExpr::term(self.0, 1.0)
    }
}

/// Real symmetric PSD variable. Coordinates are the lower-triangle entries
/// `X_ij` (`i >= j`), column by column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymmetricBlock {
    pub offset: usize,
    pub dim: usize,
}

impl SymmetricBlock {
    pub fn coords(&self) -> usize {
        self.dim * (self.dim + 1) / 2
    }

    pub fn entry(&self, i: usize, j: usize) -> LinExpr {
        LinExpr::term(self.offset + svec_index(self.dim, i, j), 1.0)
    }

    pub fn trace(&self) -> LinExpr {
        let mut e = LinExpr::zero();
        for i in 0..self.dim {
            e.add_term(self.offset + svec_index(self.dim, i, i), 1.0);
        }
        e
    }

    /// `tr(C X)` for symmetric `C`.
    pub fn inner(&self, c: &DMatrix<f64>) -> LinExpr {
        let mut e = LinExpr::zero();
        for j in 0..self.dim {
            for i in j..self.dim {
                let coef = if i == j { c[(i, i)] } else { c[(i, j)] + c[(j, i)] };
                e.add_term(self.offset + svec_index(self.dim, i, j), coef);
            }
        }
        e
    }

    pub fn value(&self, x: &[f64]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for j in 0..self.dim {
            for i in j..self.dim {
                let v = x[self.offset + svec_index(self.dim, i, j)];
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    }
}

/// Complex Hermitian PSD variable of order `n`, handled by the solver through
/// its real symmetric embedding of order `2n`. Coordinates: the `n` real
/// diagonal entries, then `(Re, Im)` of each strictly-lower entry `W_ij`
/// (`i > j`) column by column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HermitianBlock {
    pub offset: usize,
    pub dim: usize,
}

impl HermitianBlock {
    pub fn coords(&self) -> usize {
        self.dim * self.dim
    }

    fn diag_index(&self, i: usize) -> usize {
        self.offset + i
    }

    /// Coordinate of `Re W_ij`; `Im W_ij` follows it. Requires `i > j`.
    fn pair_index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i > j);
        let n = self.dim;
        // strictly-lower column j starts after sum_{c<j} (n - 1 - c) pairs
        let before = j * (n - 1) - j * j.saturating_sub(1) / 2;
        self.offset + n + 2 * (before + (i - j - 1))
    }

    /// `(Re W_ij, Im W_ij)` as expressions.
    pub fn entry(&self, i: usize, j: usize) -> (LinExpr, LinExpr) {
        use std::cmp::Ordering::*;
        match i.cmp(&j) {
            Equal => (LinExpr::term(self.diag_index(i), 1.0), LinExpr::zero()),
            Greater => {
                let p = self.pair_index(i, j);
                (LinExpr::term(p, 1.0), LinExpr::term(p + 1, 1.0))
            }
            Less => {
                let p = self.pair_index(j, i);
                (LinExpr::term(p, 1.0), LinExpr::term(p + 1, -1.0))
            }
        }
    }

    pub fn trace(&self) -> LinExpr {
        let mut e = LinExpr::zero();
        for i in 0..self.dim {
            e.add_term(self.diag_index(i), 1.0);
        }
        e
    }

    /// `a^H W a`.
    pub fn quad_form(&self, a: &CVector) -> LinExpr {
        let mut e = LinExpr::zero();
        for i in 0..self.dim {
            e.add_term(self.diag_index(i), a[i].norm_sqr());
        }
        for j in 0..self.dim {
            for i in (j + 1)..self.dim {
                // conj(a_i) a_j W_ij + c.c. = 2 Re(q W_ij)
                let q = a[i].conj() * a[j];
                let p = self.pair_index(i, j);
                e.add_term(p, 2.0 * q.re);
                e.add_term(p + 1, -2.0 * q.im);
            }
        }
        e
    }

    /// `tr(C W)` for Hermitian `C`.
    pub fn inner(&self, c: &HermitianMatrix) -> LinExpr {
        let mut e = LinExpr::zero();
        for i in 0..self.dim {
            e.add_term(self.diag_index(i), c.get(i, i).re);
        }
        for j in 0..self.dim {
            for i in (j + 1)..self.dim {
                // C_ji W_ij + C_ij W_ji = 2 Re(C_ji W_ij)
                let q = c.get(j, i);
                let p = self.pair_index(i, j);
                e.add_term(p, 2.0 * q.re);
                e.add_term(p + 1, -2.0 * q.im);
            }
        }
        e
    }

    /// Isometric real coordinates: `‖W‖_F^2` is the sum of their squares.
    pub fn hvec(&self) -> Vec<LinExpr> {
        let mut out = Vec::with_capacity(self.coords());
        for i in 0..self.dim {
            out.push(LinExpr::term(self.diag_index(i), 1.0));
        }
        for j in 0..self.dim {
            for i in (j + 1)..self.dim {
                let p = self.pair_index(i, j);
                out.push(LinExpr::term(p, SQRT2));
                out.push(LinExpr::term(p + 1, SQRT2));
            }
        }
        out
    }

    pub fn value(&self, x: &[f64]) -> HermitianMatrix {
        let n = self.dim;
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(x[self.diag_index(i)], 0.0);
        }
        for j in 0..n {
            for i in (j + 1)..n {
                let p = self.pair_index(i, j);
                let z = Complex64::new(x[p], x[p + 1]);
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        HermitianMatrix::new(m).expect("finite block values")
    }

    /// Writes the coordinates of `w` into `x`.
    pub fn set_value(&self, w: &HermitianMatrix, x: &mut [f64]) {
        for i in 0..self.dim {
            x[self.diag_index(i)] = w.get(i, i).re;
        }
        for j in 0..self.dim {
            for i in (j + 1)..self.dim {
                let p = self.pair_index(i, j);
                x[p] = w.get(i, j).re;
                x[p + 1] = w.get(i, j).im;
            }
        }
    }

    /// Entries `(coord, row, col, value)` of the real embedding of order `2n`
    /// (lower triangle only) produced by a unit change of each coordinate.
    fn embedding_pattern(&self) -> Vec<(usize, usize, usize, f64)> {
        let n = self.dim;
        let mut out = Vec::new();
        for i in 0..n {
            let c = self.diag_index(i);
            out.push((c, i, i, 1.0));
            out.push((c, n + i, n + i, 1.0));
        }
        for j in 0..n {
            for i in (j + 1)..n {
                let p = self.pair_index(i, j);
                // Re: E[i,j] = E[n+i,n+j] = u
                out.push((p, i, j, 1.0));
                out.push((p, n + i, n + j, 1.0));
                // Im: E[n+i,j] = v, E[n+j,i] = -v
                out.push((p + 1, n + i, j, 1.0));
                out.push((p + 1, n + j, i, -1.0));
            }
        }
        out
    }
}

/// Isometric real coordinates of a constant Hermitian matrix, in the same
/// order as [`HermitianBlock::hvec`].
pub fn hvec_constant(m: &HermitianMatrix) -> Vec<f64> {
    let n = m.dim();
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        out.push(m.get(i, i).re);
    }
    for j in 0..n {
        for i in (j + 1)..n {
            out.push(SQRT2 * m.get(i, j).re);
            out.push(SQRT2 * m.get(i, j).im);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    Symmetric,
    Hermitian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockSpec {
    pub kind: BlockKind,
    pub offset: usize,
    pub dim: usize,
}

impl BlockSpec {
    pub fn coords(&self) -> usize {
        match self.kind {
            BlockKind::Symmetric => self.dim * (self.dim + 1) / 2,
            BlockKind::Hermitian => self.dim * self.dim,
        }
    }

    /// Order of the real PSD cone that carries this block.
    pub fn cone_order(&self) -> usize {
        match self.kind {
            BlockKind::Symmetric => self.dim,
            BlockKind::Hermitian => 2 * self.dim,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    /// `expr <= rhs`
    Le,
    /// `expr >= rhs`
    Ge,
}

#[derive(Debug, Clone)]
pub struct EqConstraint {
    pub label: String,
    pub expr: LinExpr,
    pub rhs: f64,
}

#[derive(Debug, Clone)]
pub struct IneqConstraint {
    pub label: String,
    pub expr: LinExpr,
    pub sense: Sense,
    pub rhs: f64,
}

/// `‖vector‖_2 <= bound`.
#[derive(Debug, Clone)]
pub struct SocConstraint {
    pub label: String,
    pub vector: Vec<LinExpr>,
    pub bound: LinExpr,
}

/// A conic program: minimize a linear objective over free scalars and PSD
/// blocks subject to linear equalities, linear inequalities and
/// second-order cone constraints.
#[derive(Debug, Clone, Default)]
pub struct ConicProblem {
    pub(crate) blocks: Vec<BlockSpec>,
    pub(crate) n_vars: usize,
    pub(crate) n_scalars: usize,
    pub(crate) objective: LinExpr,
    pub(crate) eqs: Vec<EqConstraint>,
    pub(crate) ineqs: Vec<IneqConstraint>,
    pub(crate) socs: Vec<SocConstraint>,
}

impl ConicProblem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_scalar(&mut self) -> ScalarVar {
        let v = ScalarVar(self.n_vars);
        self.n_vars += 1;
        self.n_scalars += 1;
        v
    }

    pub fn add_symmetric_block(&mut self, dim: usize) -> SymmetricBlock {
        assert!(dim >= 1, "PSD block order must be at least 1");
        let spec = BlockSpec {
            kind: BlockKind::Symmetric,
            offset: self.n_vars,
            dim,
        };
        self.n_vars += spec.coords();
        self.blocks.push(spec);
        SymmetricBlock { offset: spec.offset, dim }
    }

    pub fn add_hermitian_block(&mut self, dim: usize) -> HermitianBlock {
        assert!(dim >= 1, "PSD block order must be at least 1");
        let spec = BlockSpec {
            kind: BlockKind::Hermitian,
            offset: self.n_vars,
            dim,
        };
        self.n_vars += spec.coords();
        self.blocks.push(spec);
        HermitianBlock { offset: spec.offset, dim }
    }

    /// Objective to minimize.
    pub fn minimize(&mut self, objective: LinExpr) {
        self.objective = objective;
    }

    pub fn add_eq(&mut self, label: impl Into<String>, expr: LinExpr, rhs: f64) -> usize {
        self.eqs.push(EqConstraint {
            label: label.into(),
            expr,
            rhs,
        });
        self.eqs.len() - 1
    }

    pub fn add_ineq(&mut self, label: impl Into<String>, expr: LinExpr, sense: Sense, rhs: f64) -> usize {
        self.ineqs.push(IneqConstraint {
            label: label.into(),
            expr,
            sense,
            rhs,
        });
        self.ineqs.len() - 1
    }

    pub fn add_soc(&mut self, label: impl Into<String>, vector: Vec<LinExpr>, bound: LinExpr) -> usize {
        self.socs.push(SocConstraint {
            label: label.into(),
            vector,
            bound,
        });
        self.socs.len() - 1
    }

    /// `x^2 <= y z`, `y, z >= 0`, as `‖(2x, y - z)‖ <= y + z`.
    pub fn add_rotated_soc(&mut self, label: impl Into<String>, x: LinExpr, y: LinExpr, z: LinExpr) -> usize {
        let vector = vec![x.scaled(2.0), y.clone() - z.clone()];
        self.add_soc(label, vector, y + z)
    }

    pub fn num_vars(&self) -> usize {
        self.n_vars
    }

    pub fn num_scalars(&self) -> usize {
        self.n_scalars
    }

    pub fn blocks(&self) -> &[BlockSpec] {
        &self.blocks
    }

    pub fn objective(&self) -> &LinExpr {
        &self.objective
    }

    pub fn eqs(&self) -> &[EqConstraint] {
        &self.eqs
    }

    pub fn ineqs(&self) -> &[IneqConstraint] {
        &self.ineqs
    }

    pub fn socs(&self) -> &[SocConstraint] {
        &self.socs
    }

    pub(crate) fn validate(&self) -> Result<(), String> {
        if self.n_vars == 0 {
            return Err("problem has no variables".into());
        }
        let check = |e: &LinExpr, what: &str| -> Result<(), String> {
            if let Some(&(v, _)) = e.terms.iter().find(|(v, _)| *v >= self.n_vars) {
                return Err(format!("{what} references variable {v} of {}", self.n_vars));
            }
            if e.terms.iter().any(|(_, c)| !c.is_finite()) || !e.constant.is_finite() {
                return Err(format!("{what} has non-finite coefficients"));
            }
            Ok(())
        };
        check(&self.objective, "objective")?;
        for c in &self.eqs {
            check(&c.expr, &c.label)?;
        }
        for c in &self.ineqs {
            check(&c.expr, &c.label)?;
        }
        for c in &self.socs {
            check(&c.bound, &c.label)?;
            for e in &c.vector {
                check(e, &c.label)?;
            }
        }
        Ok(())
    }

    /// Lowers to `min c^T x  s.t.  A x = b,  h - G x in K`.
    pub(crate) fn to_standard_form(&self) -> StandardForm {
        let n = self.n_vars;
        let mut c = vec![0.0; n];
        for (v, k) in self.objective.compact() {
            c[v] += k;
        }

        let p = self.eqs.len();
        let mut a = DMatrix::zeros(p, n);
        let mut b = vec![0.0; p];
        for (r, eq) in self.eqs.iter().enumerate() {
            for (v, k) in eq.expr.compact() {
                a[(r, v)] = k;
            }
            b[r] = eq.rhs - eq.expr.constant;
        }

        let mut cones = Vec::new();
        if !self.ineqs.is_empty() {
            let rows: Vec<(Vec<(usize, f64)>, f64)> = self
                .ineqs
                .iter()
                .map(|c| {
                    let terms = c.expr.compact();
                    match c.sense {
                        // s = rhs - expr
                        Sense::Le => (terms, c.rhs - c.expr.constant),
                        // s = expr - rhs  =>  G = -coef, h = const - rhs
                        Sense::Ge => (
                            terms.into_iter().map(|(v, k)| (v, -k)).collect(),
                            c.expr.constant - c.rhs,
                        ),
                    }
                })
                .collect();
            cones.push(ConeRows::from_rows(Cone::Nonneg(rows.len()), rows));
        }
        for soc in &self.socs {
            let mut rows = Vec::with_capacity(soc.vector.len() + 1);
            // s = expr  =>  G = -coef, h = constant
            for e in std::iter::once(&soc.bound).chain(&soc.vector) {
                rows.push((e.compact().into_iter().map(|(v, k)| (v, -k)).collect(), e.constant));
            }
            cones.push(ConeRows::from_rows(Cone::Soc(rows.len()), rows));
        }
        for blk in &self.blocks {
            cones.push(ConeRows::psd_block(blk));
        }

        StandardForm {
            n,
            c,
            c0: self.objective.constant,
            a,
            b,
            cones,
        }
    }

    /// Writes the lowered problem in a plain-text dense format: a header
    /// line per section followed by whitespace-separated rows.
    pub fn write_dump<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        let sf = self.to_standard_form();
        writeln!(out, "# conic problem: minimize c'x + c0 s.t. A x = b, h - G x in K")?;
        writeln!(out, "vars {}", sf.n)?;
        writeln!(out, "c0 {:.17e}", sf.c0)?;
        writeln!(out, "c 1 {}", sf.n)?;
        write_row(out, &sf.c)?;
        writeln!(out, "A {} {}", sf.a.nrows(), sf.n)?;
        for r in 0..sf.a.nrows() {
            let row: Vec<f64> = sf.a.row(r).iter().copied().collect();
            write_row(out, &row)?;
        }
        writeln!(out, "b {} 1", sf.b.len())?;
        for v in &sf.b {
            writeln!(out, "{v:.17e}")?;
        }
        writeln!(out, "cones {}", sf.cones.len())?;
        for cone in &sf.cones {
            let (kind, size) = match cone.cone {
                Cone::Nonneg(m) => ("nonneg", m),
                Cone::Soc(m) => ("soc", m),
                Cone::Psd(k) => ("psd", k),
            };
            writeln!(out, "cone {kind} {size}")?;
            let dense = cone.dense_g(sf.n);
            writeln!(out, "G {} {}", dense.nrows(), sf.n)?;
            for r in 0..dense.nrows() {
                let row: Vec<f64> = dense.row(r).iter().copied().collect();
                write_row(out, &row)?;
            }
            writeln!(out, "h {} 1", cone.h.len())?;
            for v in &cone.h {
                writeln!(out, "{v:.17e}")?;
            }
        }
        Ok(())
    }
}

fn write_row<W: Write>(out: &mut W, row: &[f64]) -> std::io::Result<()> {
    let line: Vec<String> = row.iter().map(|v| format!("{v:.17e}")).collect();
    writeln!(out, "{}", line.join(" "))
}

/// Rows of `G` and `h` belonging to one cone, stored densely over the subset
/// of variables the cone touches.
#[derive(Debug, Clone)]
pub(crate) struct ConeRows {
    pub cone: Cone,
    pub cols: Vec<usize>,
    pub g: DMatrix<f64>,
    pub h: Vec<f64>,
}

impl ConeRows {
    fn from_rows(cone: Cone, rows: Vec<(Vec<(usize, f64)>, f64)>) -> Self {
        let mut cols: Vec<usize> = rows.iter().flat_map(|(t, _)| t.iter().map(|&(v, _)| v)).collect();
        cols.sort_unstable();
        cols.dedup();
        let pos: BTreeMap<usize, usize> = cols.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut g = DMatrix::zeros(rows.len(), cols.len());
        let mut h = Vec::with_capacity(rows.len());
        for (r, (terms, hv)) in rows.into_iter().enumerate() {
            for (v, k) in terms {
                g[(r, pos[&v])] += k;
            }
            h.push(hv);
        }
        Self { cone, cols, g, h }
    }

    fn psd_block(blk: &BlockSpec) -> Self {
        let order = blk.cone_order();
        let cone = Cone::Psd(order);
        let cols: Vec<usize> = (blk.offset..blk.offset + blk.coords()).collect();
        let mut g = DMatrix::zeros(cone.dim(), cols.len());
        // s = svec(X)  =>  G = -svec map, h = 0
        let mut put = |coord: usize, i: usize, j: usize, val: f64| {
            let scale = if i == j { 1.0 } else { SQRT2 };
            g[(svec_index(order, i, j), coord - blk.offset)] -= scale * val;
        };
        match blk.kind {
            BlockKind::Symmetric => {
                for j in 0..blk.dim {
                    for i in j..blk.dim {
                        put(blk.offset + svec_index(blk.dim, i, j), i, j, 1.0);
                    }
                }
            }
            BlockKind::Hermitian => {
                let hb = HermitianBlock {
                    offset: blk.offset,
                    dim: blk.dim,
                };
                for (coord, i, j, val) in hb.embedding_pattern() {
                    put(coord, i, j, val);
                }
            }
        }
        Self {
            cone,
            cols,
            g,
            h: vec![0.0; cone.dim()],
        }
    }

    /// `G_c x` restricted to this cone.
    pub fn g_mul(&self, x: &[f64]) -> Vec<f64> {
        let xs: Vec<f64> = self.cols.iter().map(|&c| x[c]).collect();
        let mut out = vec![0.0; self.g.nrows()];
        for (j, xv) in xs.iter().enumerate() {
            if *xv == 0.0 {
                continue;
            }
            for (i, o) in out.iter_mut().enumerate() {
                *o += self.g[(i, j)] * xv;
            }
        }
        out
    }

    /// `acc += G_c^T z`.
    pub fn gt_mul_add(&self, z: &[f64], acc: &mut [f64]) {
        for (j, &col) in self.cols.iter().enumerate() {
            let mut s = 0.0;
            for (i, zv) in z.iter().enumerate() {
                s += self.g[(i, j)] * zv;
            }
            acc[col] += s;
        }
    }

    fn dense_g(&self, n: usize) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.g.nrows(), n);
        for (j, &col) in self.cols.iter().enumerate() {
            out.set_column(col, &self.g.column(j));
        }
        out
    }
}

#[derive(Debug, Clone)]
pub(crate) struct StandardForm {
    pub n: usize,
    pub c: Vec<f64>,
    pub c0: f64,
    pub a: DMatrix<f64>,
    pub b: Vec<f64>,
    pub cones: Vec<ConeRows>,
}
