//! Dense real linear algebra and the accuracy / path-error metrics.
//!
//! This is the classical oracle layer: a partial-pivoting LU direct solver
//! plus the small set of vector helpers the rest of the crate builds on.

use crate::error::{Error, Result};

/// Real vector. Finite entries are assumed throughout.
pub type Vector = Vec<f64>;

/// Dense real matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows[0].len();
        let mut m = Matrix::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            m.data[i * c..(i + 1) * c].copy_from_slice(row);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn matvec(&self, x: &[f64]) -> Vector {
        assert_eq!(self.cols, x.len(), "matvec dimension mismatch");
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// Kronecker product `self (x) other`.
    pub fn kron(&self, other: &Matrix) -> Matrix {
        let mut m = Matrix::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                if a == 0.0 {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        m[(i * other.rows + k, j * other.cols + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, s: f64) -> Matrix {
        let mut m = self.clone();
        for v in &mut m.data {
            *v *= s;
        }
        m
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut m = self.clone();
        for (a, b) in m.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        m
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut m = self.clone();
        for (a, b) in m.data.iter_mut().zip(&other.data) {
            *a -= b;
        }
        m
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows);
        let mut m = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    m[(i, j)] += a * other[(k, j)];
                }
            }
        }
        m
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

pub fn scaled(v: &[f64], s: f64) -> Vector {
    v.iter().map(|x| x * s).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `a += s * b`
pub fn axpy(a: &mut [f64], s: f64, b: &[f64]) {
    for (x, y) in a.iter_mut().zip(b) {
        *x += s * y;
    }
}

/// LU factorization with partial pivoting.
pub struct LuFactors {
    n: usize,
    lu: Matrix,
    perm: Vec<usize>,
}

/// Relative pivot threshold below which the matrix is declared singular.
const SINGULAR_TOL: f64 = 1e-14;

pub fn lu_factor(k: &Matrix) -> Result<LuFactors> {
    if !k.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "lu_factor needs a square matrix, got {}x{}",
            k.rows(),
            k.cols()
        )));
    }
    let n = k.rows();
    let mut lu = k.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let scale = k.max_abs().max(f64::MIN_POSITIVE);
    for col in 0..n {
        // pivot search
        let (mut p, mut pmax) = (col, lu[(col, col)].abs());
        for r in col + 1..n {
            let v = lu[(r, col)].abs();
            if v > pmax {
                p = r;
                pmax = v;
            }
        }
        if pmax < SINGULAR_TOL * scale {
            return Err(Error::SingularMatrix { col, pivot: pmax });
        }
        if p != col {
            perm.swap(col, p);
            for j in 0..n {
                let tmp = lu[(col, j)];
                lu[(col, j)] = lu[(p, j)];
                lu[(p, j)] = tmp;
            }
        }
        let piv = lu[(col, col)];
        for r in col + 1..n {
            let f = lu[(r, col)] / piv;
            lu[(r, col)] = f;
            for j in col + 1..n {
                let v = f * lu[(col, j)];
                lu[(r, j)] -= v;
            }
        }
    }
    Ok(LuFactors { n, lu, perm })
}

impl LuFactors {
    pub fn solve(&self, f: &[f64]) -> Result<Vector> {
        if f.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "rhs length {} vs system size {}",
                f.len(),
                self.n
            )));
        }
        let n = self.n;
        let mut x: Vector = self.perm.iter().map(|&p| f[p]).collect();
        // forward
        for i in 1..n {
            for j in 0..i {
                x[i] -= self.lu[(i, j)] * x[j];
            }
        }
        // backward
        for i in (0..n).rev() {
            for j in i + 1..n {
                x[i] -= self.lu[(i, j)] * x[j];
            }
            x[i] /= self.lu[(i, i)];
        }
        Ok(x)
    }

    /// Sign of the determinant from the pivot signs and permutation parity.
    pub fn det_sign(&self) -> f64 {
        let mut seen = vec![false; self.n];
        let mut sign = 1.0f64;
        for start in 0..self.n {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                i = self.perm[i];
                len += 1;
            }
            if len % 2 == 0 {
                sign = -sign;
            }
        }
        for i in 0..self.n {
            sign *= self.lu[(i, i)].signum();
        }
        sign
    }
}

/// Direct solve of `K u = F` by partial-pivoting LU.
pub fn lu_solve(k: &Matrix, f: &[f64]) -> Result<Vector> {
    lu_factor(k)?.solve(f)
}

/// Solution accuracy in percent: `(1 - |u - u_ref| / |u_ref|) * 100`.
pub fn accuracy(u: &[f64], u_ref: &[f64]) -> Result<f64> {
    if u.len() != u_ref.len() {
        return Err(Error::DimensionMismatch(format!(
            "accuracy: lengths {} vs {}",
            u.len(),
            u_ref.len()
        )));
    }
    let nref = norm(u_ref);
    if nref == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok((1.0 - norm(&sub(u, u_ref)) / nref) * 100.0)
}

/// RMS path error in percent between a computed path and a reference path
/// sampled on the same lambda grid.
pub fn path_error(path: &[(f64, f64)], reference: &[(f64, f64)]) -> Result<f64> {
    if path.len() != reference.len() {
        return Err(Error::GridMismatch);
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (&(l, w), &(lr, wr)) in path.iter().zip(reference) {
        let tol = 1e-9 * (1.0 + l.abs().max(lr.abs()));
        if (l - lr).abs() > tol {
            return Err(Error::GridMismatch);
        }
        num += (w - wr) * (w - wr);
        den += wr * wr;
    }
    if den == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok((num / den).sqrt() * 100.0)
}
