//! Shared numerical kernels.
//!
//! Everything downstream (translation ranks, invariant flows, entropy
//! calculus) reduces to a handful of dense-matrix primitives that live here:
//!
//! * singular values by one-sided Jacobi, with a *relative* rank cutoff and
//!   an orthonormal nullspace basis read off the right singular vectors;
//! * central-difference Jacobians that fall back to one-sided differences
//!   when a probe point leaves the domain (needed on manifolds with
//!   boundary, where half of the probe directions may be forbidden);
//! * a fixed-step classical Runge–Kutta integrator that monitors a validity
//!   predicate and reports the last valid step boundary when the trajectory
//!   exits;
//! * a scaling-and-squaring matrix exponential used as an independent oracle
//!   against the flow-based exponential.
//!
//! Matrices are desk scale (tens of rows, not thousands), so the kernels are
//! written for clarity and determinism rather than cache behavior.

use crate::error::{Error, Result};

/// Numerical knobs shared by every approximate operation.
///
/// The defaults are deliberate, not placeholders: ranks use a *relative*
/// singular-value cutoff so that scaling a morphism never changes its rank,
/// the difference step balances truncation against cancellation for values
/// of order one, and 1000 steps per unit time keeps the classical
/// Runge–Kutta error far below every tolerance asserted in the tests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceConfig {
    /// Relative singular-value cutoff for rank decisions.
    pub rank_rel_tol: f64,
    /// Finite-difference step.
    pub fd_step: f64,
    /// Integration steps per unit of flow time.
    pub ode_steps: usize,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig {
            rank_rel_tol: 1e-8,
            fd_step: 1e-6,
            ode_steps: 1000,
        }
    }
}

/// Dense row-major matrix of `f64`.
///
/// The one matrix type used across the crate; charts, Jacobians, frames and
/// probability tables are all small enough that a flat `Vec` is the right
/// representation.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    /// Matrix of zeros.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Identity matrix.
    pub fn identity(n: usize) -> Self {
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Wrap a row-major buffer. Errors if the buffer length is not
    /// `rows * cols`.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                what: "row-major matrix buffer".into(),
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j] = v;
    }

    /// Row-major view of the entries.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Largest entry magnitude (zero for empty matrices).
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Operator infinity norm (max absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    /// Matrix product `self * other`.
    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(
            self.cols, other.rows,
            "inner dimensions must agree ({}x{} * {}x{})",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    /// Matrix-vector product.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, x.len(), "matvec dimension mismatch");
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    /// Copy of column `j`.
    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    fn scale_mut(&mut self, s: f64) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    fn add_assign(&mut self, other: &DenseMatrix) {
        assert_eq!(self.rows, other.rows);
        assert_eq!(self.cols, other.cols);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += *b;
        }
    }
}

/// Singular values (descending) and right singular vectors of `a`.
///
/// One-sided Jacobi: rotate column pairs of a working copy until all columns
/// are mutually orthogonal, accumulating the rotations into `v`. The column
/// norms are then the singular values and `v` is orthogonal with
/// `a = u * diag(sigma) * v^T`. Quadratically convergent and deterministic,
/// which is all we need at this scale.
fn jacobi_singular(a: &DenseMatrix) -> (Vec<f64>, DenseMatrix) {
    let m = a.rows;
    let n = a.cols;
    let mut work = a.clone();
    let mut v = DenseMatrix::identity(n);
    if m == 0 || n == 0 {
        return (vec![0.0; n], v);
    }
    const MAX_SWEEPS: usize = 64;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let mut app = 0.0;
                let mut aqq = 0.0;
                let mut apq = 0.0;
                for i in 0..m {
                    let xp = work.get(i, p);
                    let xq = work.get(i, q);
                    app += xp * xp;
                    aqq += xq * xq;
                    apq += xp * xq;
                }
                if apq.abs() <= 1e-15 * (app * aqq).sqrt() || apq == 0.0 {
                    continue;
                }
                rotated = true;
                // Jacobi rotation annihilating the (p,q) entry of the Gram
                // matrix of the columns.
                let tau = (aqq - app) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let xp = work.get(i, p);
                    let xq = work.get(i, q);
                    work.set(i, p, c * xp - s * xq);
                    work.set(i, q, s * xp + c * xq);
                }
                for i in 0..n {
                    let vp = v.get(i, p);
                    let vq = v.get(i, q);
                    v.set(i, p, c * vp - s * vq);
                    v.set(i, q, s * vp + c * vq);
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sigma: Vec<f64> = (0..n)
        .map(|j| (0..m).map(|i| work.get(i, j).powi(2)).sum::<f64>().sqrt())
        .collect();
    // Sort descending, carrying the columns of v along.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sigma[j].partial_cmp(&sigma[i]).unwrap());
    let sorted: Vec<f64> = order.iter().map(|&j| sigma[j]).collect();
    let mut v_sorted = DenseMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for i in 0..n {
            v_sorted.set(i, dst, v.get(i, src));
        }
    }
    sigma = sorted;
    (sigma, v_sorted)
}

/// Singular values of `m` in descending order.
pub fn singular_values(m: &DenseMatrix) -> Result<Vec<f64>> {
    if !m.is_finite() {
        return Err(Error::NonFinite {
            what: "singular value input".into(),
        });
    }
    Ok(jacobi_singular(m).0)
}

/// Number of singular values exceeding `rank_rel_tol` times the largest one.
///
/// The cutoff is relative, so `numerical_rank(c * m) == numerical_rank(m)`
/// for any nonzero scalar `c`, and the zero matrix has rank 0.
pub fn numerical_rank(m: &DenseMatrix, tol: &ToleranceConfig) -> Result<usize> {
    let sigma = singular_values(m)?;
    let largest = sigma.first().copied().unwrap_or(0.0);
    Ok(sigma.iter().filter(|&&s| s > tol.rank_rel_tol * largest).count())
}

/// Orthonormal basis of the (numerical) nullspace of `m`, as the columns of
/// the returned matrix.
///
/// Columns of the right singular factor whose singular values fall at or
/// below the relative cutoff. For a zero (or empty-row) matrix this is the
/// full identity. Each column's sign is normalized so its largest-magnitude
/// entry is positive, making the basis reproducible across platforms.
pub fn nullspace_basis(m: &DenseMatrix, tol: &ToleranceConfig) -> Result<DenseMatrix> {
    if !m.is_finite() {
        return Err(Error::NonFinite {
            what: "nullspace input".into(),
        });
    }
    let n = m.cols();
    if m.rows() == 0 {
        return Ok(DenseMatrix::identity(n));
    }
    let (sigma, v) = jacobi_singular(m);
    let largest = sigma.first().copied().unwrap_or(0.0);
    let kept: Vec<usize> = (0..n)
        .filter(|&j| sigma[j] <= tol.rank_rel_tol * largest)
        .collect();
    let mut basis = DenseMatrix::zeros(n, kept.len());
    for (dst, &src) in kept.iter().enumerate() {
        let col = v.column(src);
        // Fix the sign: largest-magnitude entry positive.
        let lead = col
            .iter()
            .cloned()
            .fold(0.0_f64, |a, b| if b.abs() > a.abs() { b } else { a });
        let flip = if lead < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            basis.set(i, dst, flip * col[i]);
        }
    }
    Ok(basis)
}

/// Minimum-norm least-squares solution of `a x = b` via the singular value
/// decomposition, together with the residual infinity norm.
///
/// Singular values at or below the relative cutoff are treated as zero.
pub fn solve_min_norm(a: &DenseMatrix, b: &[f64], tol: &ToleranceConfig) -> Result<(Vec<f64>, f64)> {
    if !a.is_finite() || b.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            what: "linear solve input".into(),
        });
    }
    if b.len() != a.rows() {
        return Err(Error::DimensionMismatch {
            what: "linear solve right-hand side".into(),
            expected: a.rows(),
            found: b.len(),
        });
    }
    let (sigma, v) = jacobi_singular(a);
    let largest = sigma.first().copied().unwrap_or(0.0);
    let mut x = vec![0.0; a.cols()];
    for (k, &s) in sigma.iter().enumerate() {
        if s <= tol.rank_rel_tol * largest || s == 0.0 {
            continue;
        }
        // u_k = a v_k / s, so (u_k . b) / s = (a v_k . b) / s^2.
        let vk = v.column(k);
        let avk = a.matvec(&vk);
        let coeff = avk.iter().zip(b).map(|(u, bb)| u * bb).sum::<f64>() / (s * s);
        for i in 0..x.len() {
            x[i] += coeff * vk[i];
        }
    }
    let ax = a.matvec(&x);
    let residual = ax
        .iter()
        .zip(b)
        .map(|(l, r)| (l - r).abs())
        .fold(0.0, f64::max);
    Ok((x, residual))
}

/// Determinant by LU factorization with partial pivoting.
pub fn determinant(m: &DenseMatrix) -> Result<f64> {
    if m.rows() != m.cols() {
        return Err(Error::BadDimension {
            detail: format!("determinant needs a square matrix, got {}x{}", m.rows(), m.cols()),
        });
    }
    if !m.is_finite() {
        return Err(Error::NonFinite {
            what: "determinant input".into(),
        });
    }
    let n = m.rows();
    let mut lu = m.clone();
    let mut det = 1.0;
    for k in 0..n {
        // Partial pivot.
        let mut pivot_row = k;
        let mut pivot_val = lu.get(k, k).abs();
        for i in (k + 1)..n {
            if lu.get(i, k).abs() > pivot_val {
                pivot_val = lu.get(i, k).abs();
                pivot_row = i;
            }
        }
        if pivot_val == 0.0 {
            return Ok(0.0);
        }
        if pivot_row != k {
            for j in 0..n {
                let a = lu.get(k, j);
                let b = lu.get(pivot_row, j);
                lu.set(k, j, b);
                lu.set(pivot_row, j, a);
            }
            det = -det;
        }
        det *= lu.get(k, k);
        for i in (k + 1)..n {
            let factor = lu.get(i, k) / lu.get(k, k);
            for j in (k + 1)..n {
                let v = lu.get(i, j) - factor * lu.get(k, j);
                lu.set(i, j, v);
            }
        }
    }
    Ok(det)
}

/// Jacobian of `f` at `x` by central differences with step `tol.fd_step`.
///
/// `f` returns `None` outside its domain. Central differences are used where
/// both probes are defined; where one side is out of domain the kernel falls
/// back to a one-sided difference through the base point, so boundary points
/// of half-spaces and entropy cones still get a Jacobian. Errors with
/// [`Error::DomainExit`] if `f` is undefined at `x` itself or at both probes
/// of some coordinate.
pub fn fd_jacobian<F>(f: F, x: &[f64], tol: &ToleranceConfig) -> Result<DenseMatrix>
where
    F: Fn(&[f64]) -> Option<Vec<f64>>,
{
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            what: "finite-difference base point".into(),
        });
    }
    let h = tol.fd_step;
    let f0 = f(x).ok_or_else(|| Error::DomainExit {
        t_reached: 0.0,
        state: x.to_vec(),
        detail: "map undefined at the base point".into(),
    })?;
    let rows = f0.len();
    let cols = x.len();
    let mut jac = DenseMatrix::zeros(rows, cols);
    let mut probe = x.to_vec();
    for j in 0..cols {
        probe[j] = x[j] + h;
        let plus = f(&probe);
        probe[j] = x[j] - h;
        let minus = f(&probe);
        probe[j] = x[j];
        let col: Vec<f64> = match (plus, minus) {
            (Some(p), Some(m)) => p
                .iter()
                .zip(&m)
                .map(|(a, b)| (a - b) / (2.0 * h))
                .collect(),
            (Some(p), None) => p.iter().zip(&f0).map(|(a, b)| (a - b) / h).collect(),
            (None, Some(m)) => f0.iter().zip(&m).map(|(a, b)| (a - b) / h).collect(),
            (None, None) => {
                return Err(Error::DomainExit {
                    t_reached: 0.0,
                    state: x.to_vec(),
                    detail: format!("both probes undefined in coordinate {j}"),
                })
            }
        };
        if col.len() != rows {
            return Err(Error::DimensionMismatch {
                what: "finite-difference output".into(),
                expected: rows,
                found: col.len(),
            });
        }
        if col.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: format!("finite-difference column {j}"),
            });
        }
        for i in 0..rows {
            jac.set(i, j, col[i]);
        }
    }
    Ok(jac)
}

/// Integrate `x' = field(x)` from `x0` over signed time `t` with classical
/// fixed-step fourth-order Runge–Kutta.
///
/// Uses `ceil(|t| * ode_steps)` equal steps. After every step the validity
/// predicate is checked; on failure the error carries the last valid state
/// and the time of the last valid step boundary, so the exit time is
/// resolved to one step width. The field itself must be evaluable along the
/// trajectory (invariant fields are, through their ambient chart formulas).
pub fn rk4_flow<F, V>(
    mut field: F,
    valid: V,
    x0: &[f64],
    t: f64,
    tol: &ToleranceConfig,
) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
    V: Fn(&[f64]) -> bool,
{
    if !t.is_finite() || x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            what: "flow initial data".into(),
        });
    }
    if !valid(x0) {
        return Err(Error::DomainExit {
            t_reached: 0.0,
            state: x0.to_vec(),
            detail: "initial state fails the validity predicate".into(),
        });
    }
    if t == 0.0 {
        return Ok(x0.to_vec());
    }
    let n_steps = ((t.abs() * tol.ode_steps as f64).ceil() as usize).max(1);
    let h = t / n_steps as f64;
    let dim = x0.len();
    let mut x = x0.to_vec();
    for k in 0..n_steps {
        let k1 = field(&x)?;
        let mut stage = vec![0.0; dim];
        for i in 0..dim {
            stage[i] = x[i] + 0.5 * h * k1[i];
        }
        let k2 = field(&stage)?;
        for i in 0..dim {
            stage[i] = x[i] + 0.5 * h * k2[i];
        }
        let k3 = field(&stage)?;
        for i in 0..dim {
            stage[i] = x[i] + h * k3[i];
        }
        let k4 = field(&stage)?;
        let mut next = vec![0.0; dim];
        for i in 0..dim {
            next[i] = x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let finite = next.iter().all(|v| v.is_finite());
        if !finite || !valid(&next) {
            return Err(Error::DomainExit {
                t_reached: k as f64 * h,
                state: x,
                detail: if finite {
                    "trajectory left the valid set".into()
                } else {
                    "trajectory became non-finite".into()
                },
            });
        }
        x = next;
    }
    Ok(x)
}

/// Matrix exponential by scaling and squaring with a truncated Taylor
/// series.
///
/// Independent of the flow-based exponential; this is the oracle the two
/// routes are compared against. Relative accuracy is far below 1e-10 for
/// the operator norms exercised here (the argument is pre-scaled to norm
/// at most 1/2 before the series is summed).
pub fn matrix_exp_oracle(a: &DenseMatrix) -> Result<DenseMatrix> {
    if a.rows() != a.cols() {
        return Err(Error::BadDimension {
            detail: format!(
                "matrix exponential needs a square matrix, got {}x{}",
                a.rows(),
                a.cols()
            ),
        });
    }
    if !a.is_finite() {
        return Err(Error::NonFinite {
            what: "matrix exponential input".into(),
        });
    }
    let n = a.rows();
    let norm = a.norm_inf();
    let s = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let mut b = a.clone();
    b.scale_mut(0.5_f64.powi(s as i32));
    // Taylor series of exp(b) with ||b|| <= 1/2: terms decay at least
    // geometrically with ratio 1/2, so 30 terms push truncation below 1e-18.
    let mut sum = DenseMatrix::identity(n);
    let mut term = DenseMatrix::identity(n);
    for k in 1..=30 {
        term = term.matmul(&b);
        term.scale_mut(1.0 / k as f64);
        sum.add_assign(&term);
        if term.max_abs() <= 1e-18 * sum.max_abs() {
            break;
        }
    }
    for _ in 0..s {
        sum = sum.matmul(&sum);
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: usize, cols: usize, data: &[f64]) -> DenseMatrix {
        DenseMatrix::from_row_major(rows, cols, data.to_vec()).unwrap()
    }

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn rank_of_identity_is_full() {
        assert_eq!(numerical_rank(&DenseMatrix::identity(3), &tol()).unwrap(), 3);
    }

    #[test]
    fn rank_of_zero_matrix_is_zero() {
        assert_eq!(numerical_rank(&DenseMatrix::zeros(2, 2), &tol()).unwrap(), 0);
    }

    #[test]
    fn rank_detects_proportional_rows() {
        let m = mat(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert_eq!(numerical_rank(&m, &tol()).unwrap(), 1);
    }

    #[test]
    fn rank_is_scale_invariant() {
        let m = mat(2, 3, &[1.0, 0.0, 2.0, 0.0, 1.0, -1.0]);
        let mut scaled = m.clone();
        scaled.scale_mut(3.7e-5);
        assert_eq!(
            numerical_rank(&m, &tol()).unwrap(),
            numerical_rank(&scaled, &tol()).unwrap()
        );
    }

    #[test]
    fn rank_rejects_non_finite_input() {
        let m = mat(1, 2, &[f64::NAN, 1.0]);
        assert!(matches!(
            numerical_rank(&m, &tol()),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn singular_values_of_diagonal() {
        let m = mat(2, 2, &[3.0, 0.0, 0.0, -4.0]);
        let sv = singular_values(&m).unwrap();
        assert!((sv[0] - 4.0).abs() < 1e-12);
        assert!((sv[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn nullspace_of_rank_one_2x2() {
        let m = mat(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        let ns = nullspace_basis(&m, &tol()).unwrap();
        assert_eq!(ns.cols(), 1);
        let col = ns.column(0);
        let norm: f64 = col.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
        let image = m.matvec(&col);
        assert!(image.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn nullspace_of_zero_matrix_is_everything() {
        let ns = nullspace_basis(&DenseMatrix::zeros(2, 2), &tol()).unwrap();
        assert_eq!(ns.cols(), 2);
        // Orthonormality.
        for i in 0..2 {
            for j in 0..2 {
                let dot: f64 = (0..2).map(|k| ns.get(k, i) * ns.get(k, j)).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn nullspace_of_empty_row_matrix_is_identity() {
        let ns = nullspace_basis(&DenseMatrix::zeros(0, 4), &tol()).unwrap();
        assert_eq!(ns.cols(), 4);
        assert_eq!(ns, DenseMatrix::identity(4));
    }

    #[test]
    fn min_norm_solve_recovers_solution() {
        let a = mat(2, 2, &[2.0, 1.0, 1.0, 3.0]);
        let (x, res) = solve_min_norm(&a, &[5.0, 10.0], &tol()).unwrap();
        assert!(res < 1e-12);
        assert!((x[0] - 1.0).abs() < 1e-12);
        assert!((x[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn min_norm_solve_reports_inconsistency() {
        // Rank-1 system with inconsistent right-hand side.
        let a = mat(2, 2, &[1.0, 0.0, 1.0, 0.0]);
        let (_, res) = solve_min_norm(&a, &[1.0, 2.0], &tol()).unwrap();
        assert!(res > 0.4);
    }

    #[test]
    fn determinant_of_triangular_product() {
        let m = mat(2, 2, &[3.0, 1.0, 0.0, 2.0]);
        assert!((determinant(&m).unwrap() - 6.0).abs() < 1e-12);
        let singular = mat(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(determinant(&singular).unwrap().abs() < 1e-12);
    }

    #[test]
    fn jacobian_of_affine_map_is_exact() {
        // f(x) = A x + b has Jacobian exactly A under central differences.
        let a = mat(2, 2, &[1.0, 2.0, -0.5, 3.0]);
        let f = |x: &[f64]| Some(vec![x[0] + 2.0 * x[1] + 7.0, -0.5 * x[0] + 3.0 * x[1] - 1.0]);
        let j = fd_jacobian(f, &[0.3, -0.4], &tol()).unwrap();
        for i in 0..2 {
            for jj in 0..2 {
                assert!((j.get(i, jj) - a.get(i, jj)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn jacobian_of_square_map() {
        let f = |x: &[f64]| Some(vec![x[0] * x[0]]);
        let j = fd_jacobian(f, &[3.0], &tol()).unwrap();
        assert!((j.get(0, 0) - 6.0).abs() < 1e-6);
    }

    #[test]
    fn jacobian_falls_back_to_one_sided_at_boundary() {
        // Domain is the half-line x >= 0; probe at the boundary point 0.
        let f = |x: &[f64]| {
            if x[0] >= 0.0 {
                Some(vec![2.0 * x[0] + 1.0])
            } else {
                None
            }
        };
        let j = fd_jacobian(f, &[0.0], &tol()).unwrap();
        assert!((j.get(0, 0) - 2.0).abs() < 1e-9);
    }

    #[test]
    fn jacobian_reports_domain_exit_when_boxed_in() {
        let f = |x: &[f64]| if x[0] == 0.0 { Some(vec![1.0]) } else { None };
        assert!(matches!(
            fd_jacobian(f, &[0.0], &tol()),
            Err(Error::DomainExit { .. })
        ));
    }

    #[test]
    fn rk4_zero_field_is_constant() {
        let out = rk4_flow(|x: &[f64]| Ok(vec![0.0; x.len()]), |_| true, &[1.0, 2.0], 5.0, &tol())
            .unwrap();
        assert_eq!(out, vec![1.0, 2.0]);
    }

    #[test]
    fn rk4_scalar_exponential_growth() {
        let out = rk4_flow(|x: &[f64]| Ok(vec![x[0]]), |_| true, &[1.0], 1.0, &tol()).unwrap();
        assert!((out[0] - 1.0_f64.exp()).abs() < 1e-10);
    }

    #[test]
    fn rk4_exits_at_half_line_boundary() {
        // x' = -1 from 0.5 on [0, inf) must exit near t = 0.5.
        let err = rk4_flow(
            |_: &[f64]| Ok(vec![-1.0]),
            |x| x[0] >= 0.0,
            &[0.5],
            1.0,
            &tol(),
        )
        .unwrap_err();
        match err {
            Error::DomainExit { t_reached, state, .. } => {
                assert!((t_reached - 0.5).abs() <= 2.0 / 1000.0);
                assert!(state[0] >= 0.0);
            }
            other => panic!("expected DomainExit, got {other:?}"),
        }
    }

    #[test]
    fn rk4_zero_time_returns_start() {
        let out = rk4_flow(|_: &[f64]| Ok(vec![1.0]), |_| true, &[3.0], 0.0, &tol()).unwrap();
        assert_eq!(out, vec![3.0]);
    }

    #[test]
    fn matrix_exp_of_zero_is_identity() {
        let e = matrix_exp_oracle(&DenseMatrix::zeros(3, 3)).unwrap();
        assert_eq!(e, DenseMatrix::identity(3));
    }

    #[test]
    fn matrix_exp_of_diagonal() {
        let m = mat(2, 2, &[1.0, 0.0, 0.0, -2.0]);
        let e = matrix_exp_oracle(&m).unwrap();
        assert!((e.get(0, 0) - 1.0_f64.exp()).abs() < 1e-12);
        assert!((e.get(1, 1) - (-2.0_f64).exp()).abs() < 1e-12);
        assert!(e.get(0, 1).abs() < 1e-15);
    }

    #[test]
    fn matrix_exp_of_nilpotent_truncates() {
        // exp([[0,1],[0,0]]) = I + N exactly.
        let n = mat(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let e = matrix_exp_oracle(&n).unwrap();
        assert!((e.get(0, 0) - 1.0).abs() < 1e-15);
        assert!((e.get(0, 1) - 1.0).abs() < 1e-15);
        assert!(e.get(1, 0).abs() < 1e-15);
        assert!((e.get(1, 1) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn matrix_exp_against_rotation_closed_form() {
        // exp(theta * J) is a rotation by theta for J = [[0,-1],[1,0]].
        let theta = 1.2;
        let m = mat(2, 2, &[0.0, -theta, theta, 0.0]);
        let e = matrix_exp_oracle(&m).unwrap();
        assert!((e.get(0, 0) - theta.cos()).abs() < 1e-12);
        assert!((e.get(0, 1) + theta.sin()).abs() < 1e-12);
        assert!((e.get(1, 0) - theta.sin()).abs() < 1e-12);
        assert!((e.get(1, 1) - theta.cos()).abs() < 1e-12);
    }

    #[test]
    fn matrix_exp_inverse_property() {
        let m = mat(2, 2, &[0.3, 1.1, -0.7, 0.2]);
        let mut neg = m.clone();
        neg.scale_mut(-1.0);
        let prod = matrix_exp_oracle(&m)
            .unwrap()
            .matmul(&matrix_exp_oracle(&neg).unwrap());
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((prod.get(i, j) - expect).abs() < 1e-9);
            }
        }
    }
}
