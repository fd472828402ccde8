//! Small dense linear algebra: square matrices, LU solves and eigenvalues.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Square row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Option<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return None;
        }
        Some(Self {
            n,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n.max(1)).map(|r| r.to_vec()).collect()
    }

    /// Determinant by partial-pivot elimination.
    pub fn determinant(&self) -> f64 {
        let n = self.n;
        let mut a = self.data.clone();
        let mut det = 1.0;
        for k in 0..n {
            let piv = (k..n)
                .max_by(|&i, &j| a[i * n + k].abs().total_cmp(&a[j * n + k].abs()))
                .unwrap();
            if a[piv * n + k] == 0.0 {
                return 0.0;
            }
            if piv != k {
                for j in 0..n {
                    a.swap(k * n + j, piv * n + j);
                }
                det = -det;
            }
            let d = a[k * n + k];
            det *= d;
            for i in k + 1..n {
                let f = a[i * n + k] / d;
                for j in k..n {
                    a[i * n + j] -= f * a[k * n + j];
                }
            }
        }
        det
    }
}

impl<const N: usize> From<[[f64; N]; N]> for DenseMatrix {
    fn from(rows: [[f64; N]; N]) -> Self {
        Self {
            n: N,
            data: rows.iter().flatten().copied().collect(),
        }
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// Solves `a·x = b` by Gaussian elimination with partial pivoting.
/// Returns `None` when a pivot vanishes.
pub fn solve<const N: usize>(mut a: [[f64; N]; N], mut b: [f64; N]) -> Option<[f64; N]> {
    for k in 0..N {
        let piv = (k..N).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))?;
        if a[piv][k] == 0.0 || !a[piv][k].is_finite() {
            return None;
        }
        a.swap(k, piv);
        b.swap(k, piv);
        for i in k + 1..N {
            let f = a[i][k] / a[k][k];
            if f != 0.0 {
                let pivot_row = a[k];
                for (aij, akj) in a[i][k..].iter_mut().zip(&pivot_row[k..]) {
                    *aij -= f * akj;
                }
                b[i] -= f * b[k];
            }
        }
    }
    let mut x = [0.0; N];
    for i in (0..N).rev() {
        let tail: f64 = (i + 1..N).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - tail) / a[i][i];
    }
    Some(x)
}

/// Largest supported dimension for [`eigenvalues`].
pub const MAX_EIGEN_DIM: usize = 16;

/// Eigenvalues of a real square matrix, sorted by descending real part
/// (ties broken by descending imaginary part).
///
/// Householder reduction to upper Hessenberg form followed by Francis
/// double-shift QR with deflation.
pub fn eigenvalues(matrix: &DenseMatrix) -> Result<Vec<Complex64>> {
    let n = matrix.dim();
    if n > MAX_EIGEN_DIM {
        return Err(Error::InvalidConfig(format!(
            "eigenvalue routine supports n <= {MAX_EIGEN_DIM}, got {n}"
        )));
    }
    if matrix.data.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { what: "matrix" });
    }
    let mut h = matrix.clone();
    reduce_to_hessenberg(&mut h);
    let mut values = hessenberg_qr(&mut h)?;
    values.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    Ok(values)
}

/// Largest eigenvalue modulus.
pub fn spectral_radius(matrix: &DenseMatrix) -> Result<f64> {
    Ok(eigenvalues(matrix)?.iter().fold(0.0, |acc: f64, z| acc.max(z.norm())))
}

fn reduce_to_hessenberg(a: &mut DenseMatrix) {
    let n = a.dim();
    if n < 3 {
        return;
    }
    let mut v = vec![0.0; n];
    for k in 0..n - 2 {
        let scale: f64 = (k + 1..n).map(|i| a[(i, k)].abs()).sum();
        if scale == 0.0 {
            continue;
        }
        let mut norm2 = 0.0;
        for i in k + 1..n {
            v[i] = a[(i, k)] / scale;
            norm2 += v[i] * v[i];
        }
        let alpha = -v[k + 1].signum() * norm2.sqrt();
        v[k + 1] -= alpha;
        let vnorm2: f64 = (k + 1..n).map(|i| v[i] * v[i]).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        // A <- (I - 2vvᵀ/vᵀv) A
        for j in 0..n {
            let dot: f64 = (k + 1..n).map(|i| v[i] * a[(i, j)]).sum();
            let f = 2.0 * dot / vnorm2;
            for i in k + 1..n {
                a[(i, j)] -= f * v[i];
            }
        }
        // A <- A (I - 2vvᵀ/vᵀv)
        for i in 0..n {
            let dot: f64 = (k + 1..n).map(|j| a[(i, j)] * v[j]).sum();
            let f = 2.0 * dot / vnorm2;
            for j in k + 1..n {
                a[(i, j)] -= f * v[j];
            }
        }
        for i in k + 2..n {
            a[(i, k)] = 0.0;
        }
    }
}

fn hessenberg_qr(a: &mut DenseMatrix) -> Result<Vec<Complex64>> {
    let n = a.dim();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    if n == 0 {
        return Ok(out);
    }
    let eps = f64::EPSILON;
    let budget = 30 * n * n;
    let mut total_iterations = 0usize;

    let mut anorm = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += a[(i, j)].abs();
        }
    }

    let mut nn = n as isize - 1;
    let mut t = 0.0;
    let mut its = 0usize;
    while nn >= 0 {
        let top = nn as usize;
        // look for a single small subdiagonal element
        let mut l = top;
        while l > 0 {
            let mut s = a[(l - 1, l - 1)].abs() + a[(l, l)].abs();
            if s == 0.0 {
                s = anorm;
            }
            if a[(l, l - 1)].abs() <= eps * s {
                a[(l, l - 1)] = 0.0;
                break;
            }
            l -= 1;
        }
        let mut x = a[(top, top)];
        if l == top {
            out[top] = Complex64::new(x + t, 0.0);
            nn -= 1;
            its = 0;
            continue;
        }
        let mut y = a[(top - 1, top - 1)];
        let mut w = a[(top, top - 1)] * a[(top - 1, top)];
        if l == top - 1 {
            let p = 0.5 * (y - x);
            let q = p * p + w;
            let z = q.abs().sqrt();
            x += t;
            if q >= 0.0 {
                let z = p + z.copysign(p);
                out[top - 1] = Complex64::new(x + z, 0.0);
                out[top] = if z != 0.0 {
                    Complex64::new(x - w / z, 0.0)
                } else {
                    Complex64::new(x + z, 0.0)
                };
            } else {
                out[top] = Complex64::new(x + p, -z);
                out[top - 1] = Complex64::new(x + p, z);
            }
            nn -= 2;
            its = 0;
            continue;
        }

        if total_iterations >= budget {
            return Err(Error::EigenNoConvergence {
                iterations: total_iterations,
            });
        }
        if its > 0 && its.is_multiple_of(10) {
            // exceptional shift
            t += x;
            for i in 0..=top {
                a[(i, i)] -= x;
            }
            let s = a[(top, top - 1)].abs() + a[(top - 1, top - 2)].abs();
            x = 0.75 * s;
            y = x;
            w = -0.4375 * s * s;
        }
        its += 1;
        total_iterations += 1;

        // look for two consecutive small subdiagonal elements
        let mut m = top - 2;
        let (mut p, mut q, mut r);
        loop {
            let z = a[(m, m)];
            let rr = x - z;
            let ss = y - z;
            p = (rr * ss - w) / a[(m + 1, m)] + a[(m, m + 1)];
            q = a[(m + 1, m + 1)] - z - rr - ss;
            r = a[(m + 2, m + 1)];
            let s = p.abs() + q.abs() + r.abs();
            p /= s;
            q /= s;
            r /= s;
            if m == l {
                break;
            }
            let u = a[(m, m - 1)].abs() * (q.abs() + r.abs());
            let v = p.abs() * (a[(m - 1, m - 1)].abs() + z.abs() + a[(m + 1, m + 1)].abs());
            if u <= eps * v {
                break;
            }
            m -= 1;
        }
        for i in m..top - 1 {
            a[(i + 2, i)] = 0.0;
            if i != m {
                a[(i + 2, i - 1)] = 0.0;
            }
        }

        // double QR step on rows l..=top, columns m..=top
        for k in m..top {
            if k != m {
                p = a[(k, k - 1)];
                q = a[(k + 1, k - 1)];
                r = if k + 1 != top { a[(k + 2, k - 1)] } else { 0.0 };
                x = p.abs() + q.abs() + r.abs();
                if x != 0.0 {
                    p /= x;
                    q /= x;
                    r /= x;
                }
            }
            let s = (p * p + q * q + r * r).sqrt().copysign(p);
            if s == 0.0 {
                continue;
            }
            if k == m {
                if l != m {
                    a[(k, k - 1)] = -a[(k, k - 1)];
                }
            } else {
                a[(k, k - 1)] = -s * x;
            }
            p += s;
            x = p / s;
            y = q / s;
            let z = r / s;
            q /= p;
            r /= p;
            for j in k..=top {
                let mut pp = a[(k, j)] + q * a[(k + 1, j)];
                if k + 1 != top {
                    pp += r * a[(k + 2, j)];
                    a[(k + 2, j)] -= pp * z;
                }
                a[(k + 1, j)] -= pp * y;
                a[(k, j)] -= pp * x;
            }
            let mmin = top.min(k + 3);
            for i in l..=mmin {
                let mut pp = x * a[(i, k)] + y * a[(i, k + 1)];
                if k + 1 != top {
                    pp += z * a[(i, k + 2)];
                    a[(i, k + 2)] -= pp * r;
                }
                a[(i, k + 1)] -= pp * q;
                a[(i, k)] -= pp;
            }
        }
    }
    Ok(out)
}
