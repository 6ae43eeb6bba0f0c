//! Small dense square matrices and Euclidean vector helpers.
//!
//! Everything in scope acts on dimensions 2..=4, so the representation is a
//! plain row-major `Vec<f64>` and the spectral norm uses closed forms for
//! n <= 3 with a power iteration fallback for larger n. No external linear
//! algebra dependency is warranted at this scale.

use serde::{Deserialize, Serialize};

/// Row-major square matrix of `f64`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// 2x2 counterclockwise rotation by `theta`.
    pub fn rotation2(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Matrix { n: 2, data: vec![c, -s, s, c] }
    }

    /// Block-diagonal assembly of square blocks.
    pub fn block_diag(blocks: &[Matrix]) -> Self {
        let n: usize = blocks.iter().map(|b| b.n).sum();
        let mut m = Matrix::zeros(n);
        let mut off = 0;
        for b in blocks {
            for i in 0..b.n {
                for j in 0..b.n {
                    m.data[(off + i) * n + (off + j)] = b.data[i * b.n + j];
                }
            }
            off += b.n;
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, String> {
        let n = rows.len();
        if n == 0 {
            return Err("matrix must be nonempty".into());
        }
        let mut data = Vec::with_capacity(n * n);
        for row in &rows {
            if row.len() != n {
                return Err(format!("expected {n} columns per row, got {}", row.len()));
            }
            data.extend_from_slice(row);
        }
        Ok(Matrix { n, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn entries(&self) -> &[f64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn transpose(&self) -> Matrix {
        let n = self.n;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j];
            }
        }
        out
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(self.n);
        self.mul_into(other, &mut out);
        out
    }

    /// Allocation-free product for hot loops; `out` is overwritten.
    pub fn mul_into(&self, other: &Matrix, out: &mut Matrix) {
        assert_eq!(self.n, other.n, "matrix dimensions must agree");
        assert_eq!(self.n, out.n, "output dimension must agree");
        let n = self.n;
        out.data.iter_mut().for_each(|x| *x = 0.0);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.n, v.len(), "matrix/vector dimensions must agree");
        let n = self.n;
        let mut out = vec![0.0; n];
        for i in 0..n {
            let mut s = 0.0;
            for j in 0..n {
                s += self.data[i * n + j] * v[j];
            }
            out[i] = s;
        }
        out
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.n, other.n, "matrix dimensions must agree");
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Matrix { n: self.n, data }
    }

    /// Max-entry distance; the element-matching metric throughout.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!(self.n, other.n, "matrix dimensions must agree");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Max-entry deviation of `self^T self` from the identity.
    pub fn orthogonality_defect(&self) -> f64 {
        let gram = self.transpose().mul(self);
        gram.max_abs_diff(&Matrix::identity(self.n))
    }
}

impl From<Matrix> for Vec<Vec<f64>> {
    fn from(m: Matrix) -> Vec<Vec<f64>> {
        (0..m.n)
            .map(|i| m.data[i * m.n..(i + 1) * m.n].to_vec())
            .collect()
    }
}

impl TryFrom<Vec<Vec<f64>>> for Matrix {
    type Error = String;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self, String> {
        Matrix::from_rows(rows)
    }
}

/// Largest singular value. Closed forms for n <= 3, power iteration above.
///
/// The closed forms go through the symmetric Gram matrix M^T M, whose largest
/// eigenvalue is the squared spectral norm. Power iteration runs 50 steps and
/// restarts from canonical basis vectors when a start vector lands in the
/// kernel or the Rayleigh quotient stagnates without converging.
pub fn spectral_norm(m: &Matrix) -> f64 {
    let n = m.dim();
    let gram = m.transpose().mul(m);
    let lambda = match n {
        1 => gram.get(0, 0),
        2 => sym2_max_eigenvalue(&gram),
        3 => sym3_max_eigenvalue(&gram),
        _ => power_iteration_max_eigenvalue(&gram),
    };
    lambda.max(0.0).sqrt()
}

fn sym2_max_eigenvalue(b: &Matrix) -> f64 {
    let (a, bb, c) = (b.get(0, 0), b.get(0, 1), b.get(1, 1));
    let mean = 0.5 * (a + c);
    let half_gap = 0.5 * (a - c);
    mean + (half_gap * half_gap + bb * bb).sqrt()
}

/// Trigonometric closed form for the largest eigenvalue of a symmetric 3x3.
fn sym3_max_eigenvalue(b: &Matrix) -> f64 {
    let p1 = b.get(0, 1).powi(2) + b.get(0, 2).powi(2) + b.get(1, 2).powi(2);
    let diag_max = b.get(0, 0).max(b.get(1, 1)).max(b.get(2, 2));
    if p1 <= 1e-30 * diag_max.abs().max(1.0) {
        return diag_max;
    }
    let q = (b.get(0, 0) + b.get(1, 1) + b.get(2, 2)) / 3.0;
    let p2 = (b.get(0, 0) - q).powi(2)
        + (b.get(1, 1) - q).powi(2)
        + (b.get(2, 2) - q).powi(2)
        + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let mut shifted = b.clone();
    for i in 0..3 {
        shifted.set(i, i, b.get(i, i) - q);
    }
    let r = (det3(&shifted) / (p * p * p)) / 2.0;
    let phi = r.clamp(-1.0, 1.0).acos() / 3.0;
    q + 2.0 * p * phi.cos()
}

fn det3(m: &Matrix) -> f64 {
    m.get(0, 0) * (m.get(1, 1) * m.get(2, 2) - m.get(1, 2) * m.get(2, 1))
        - m.get(0, 1) * (m.get(1, 0) * m.get(2, 2) - m.get(1, 2) * m.get(2, 0))
        + m.get(0, 2) * (m.get(1, 0) * m.get(2, 1) - m.get(1, 1) * m.get(2, 0))
}

fn power_iteration_max_eigenvalue(b: &Matrix) -> f64 {
    let n = b.dim();
    let mut best = 0.0f64;
    // start vectors: all-ones, then canonical basis vectors
    for start in 0..=n {
        let mut v = vec![0.0; n];
        if start == 0 {
            v.iter_mut().for_each(|x| *x = 1.0);
        } else {
            v[start - 1] = 1.0;
        }
        normalize(&mut v);
        let mut prev = f64::NAN;
        let mut stagnant = false;
        for _ in 0..50 {
            let w = b.matvec(&v);
            let nw = norm(&w);
            if nw < 1e-300 {
                // start vector sits in the kernel; restart
                stagnant = true;
                break;
            }
            v = w;
            normalize(&mut v);
            let lam = rayleigh(b, &v);
            // relative stagnation test: the eigenvalues here can be ~1e-12
            // (differences of near-identity isometries), where any absolute
            // floor would stop the iteration far from convergence
            if (lam - prev).abs() <= 1e-15 * lam.abs() {
                prev = lam;
                break;
            }
            prev = lam;
        }
        if !prev.is_nan() {
            best = best.max(prev);
        }
        // converged from a non-degenerate start: no restart needed
        if !stagnant && start == 0 && best > 0.0 {
            let residual = {
                let w = b.matvec(&v);
                let mut r = 0.0f64;
                for i in 0..n {
                    r = r.max((w[i] - best * v[i]).abs());
                }
                r
            };
            if residual <= 1e-12 * best {
                break;
            }
        }
    }
    best
}

fn rayleigh(b: &Matrix, v: &[f64]) -> f64 {
    dot(&b.matvec(v), v)
}

// --- vector helpers ---

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    norm(&sub(a, b))
}

pub fn normalize(v: &mut [f64]) {
    let n = norm(v);
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
}

/// Unit vector along `v`, or `None` when `v` is numerically zero.
pub fn unit(v: &[f64]) -> Option<Vec<f64>> {
    let n = norm(v);
    if n < 1e-300 {
        return None;
    }
    Some(scale(v, 1.0 / n))
}
