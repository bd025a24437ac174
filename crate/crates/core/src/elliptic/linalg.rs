//! Symmetric 5-point operators on a rectangular index set, with a banded
//! Cholesky factorization and a Jacobi-preconditioned conjugate gradient.

/// Symmetric matrix with the sparsity of a 5-point stencil on `rows x m` nodes
/// (node `k = row * m + col`).
#[derive(Debug, Clone)]
pub struct FivePoint {
    pub m: usize,
    pub diag: Vec<f64>,
    /// Coupling between `k` and `k + 1` (zero at the end of a row).
    pub east: Vec<f64>,
    /// Coupling between `k` and `k + m`.
    pub north: Vec<f64>,
}

impl FivePoint {
    pub fn new(n: usize, m: usize) -> Self {
        FivePoint { m, diag: vec![0.0; n], east: vec![0.0; n], north: vec![0.0; n] }
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let (n, m) = (self.n(), self.m);
        for k in 0..n {
            let mut v = self.diag[k] * x[k];
            if k + 1 < n {
                v += self.east[k] * x[k + 1];
            }
            if k >= 1 {
                v += self.east[k - 1] * x[k - 1];
            }
            if k + m < n {
                v += self.north[k] * x[k + m];
            }
            if k >= m {
                v += self.north[k - m] * x[k - m];
            }
            y[k] = v;
        }
    }

    pub fn norm_inf(&self) -> f64 {
        let (n, m) = (self.n(), self.m);
        (0..n)
            .map(|k| {
                let mut s = self.diag[k].abs() + self.east[k].abs() + self.north[k].abs();
                if k >= 1 {
                    s += self.east[k - 1].abs();
                }
                if k >= m {
                    s += self.north[k - m].abs();
                }
                s
            })
            .fold(0.0, f64::max)
    }

    /// Zeroes row and column `k` and puts 1 on the diagonal.
    pub fn pin(&mut self, k: usize) {
        self.diag[k] = 1.0;
        self.east[k] = 0.0;
        self.north[k] = 0.0;
        if k >= 1 {
            self.east[k - 1] = 0.0;
        }
        if k >= self.m {
            self.north[k - self.m] = 0.0;
        }
    }

    /// Normwise backward error `|Ax - b| / (|A| |x| + |b|)` in the max norm.
    pub fn backward_error(&self, x: &[f64], b: &[f64]) -> f64 {
        let mut r = vec![0.0; self.n()];
        self.apply(x, &mut r);
        let res = r.iter().zip(b).fold(0.0, |m: f64, (a, c)| m.max((a - c).abs()));
        let xn = x.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        let bn = b.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        let den = self.norm_inf() * xn + bn;
        if den == 0.0 {
            0.0
        } else {
            res / den
        }
    }
}

/// Lower Cholesky factor of a symmetric positive definite band matrix with
/// half-bandwidth `p`. Row `k` stores columns `k-p ..= k` at offsets `0 ..= p`.
#[derive(Debug, Clone)]
pub struct BandCholesky {
    n: usize,
    p: usize,
    l: Vec<f64>,
}

impl BandCholesky {
    /// Returns `None` when a pivot is not positive.
    pub fn factor(a: &FivePoint) -> Option<Self> {
        let n = a.n();
        let p = a.m;
        let w = p + 1;
        let mut l = vec![0.0; n * w];
        for k in 0..n {
            l[k * w + p] = a.diag[k];
            if k >= 1 {
                l[k * w + p - 1] = a.east[k - 1];
            }
            if k >= p {
                l[k * w] = a.north[k - p];
            }
        }
        for k in 0..n {
            let j0 = k.saturating_sub(p);
            for j in j0..=k {
                let m0 = j0.max(j.saturating_sub(p));
                let rk = &l[k * w + (m0 + p - k)..k * w + (j + p - k)];
                let rj = &l[j * w + (m0 + p - j)..j * w + p];
                let dot: f64 = rk.iter().zip(rj).map(|(a, b)| a * b).sum();
                let s = l[k * w + (j + p - k)] - dot;
                if j < k {
                    l[k * w + (j + p - k)] = s / l[j * w + p];
                } else {
                    if s <= 0.0 || !s.is_finite() {
                        return None;
                    }
                    l[k * w + p] = s.sqrt();
                }
            }
        }
        Some(BandCholesky { n, p, l })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let (n, p) = (self.n, self.p);
        let w = p + 1;
        let mut y = b.to_vec();
        for k in 0..n {
            let m0 = k.saturating_sub(p);
            let row = &self.l[k * w + (m0 + p - k)..k * w + p];
            let dot: f64 = row.iter().zip(&y[m0..k]).map(|(a, b)| a * b).sum();
            y[k] = (y[k] - dot) / self.l[k * w + p];
        }
        for k in (0..n).rev() {
            let mut s = y[k];
            for i in k + 1..n.min(k + p + 1) {
                s -= self.l[i * w + (k + p - i)] * y[i];
            }
            y[k] = s / self.l[k * w + p];
        }
        y
    }
}

/// Jacobi-preconditioned CG. Returns the iterate and the final relative
/// residual `|r|_2 / |b|_2`.
pub fn conjugate_gradient(a: &FivePoint, b: &[f64], tol: f64, max_iter: usize) -> (Vec<f64>, f64) {
    let n = a.n();
    let bnorm = norm2(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return (x, 0.0);
    }
    let mut r = b.to_vec();
    let inv: Vec<f64> = a.diag.iter().map(|d| 1.0 / d).collect();
    let mut z: Vec<f64> = r.iter().zip(&inv).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut q = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut rel = 1.0;
    for _ in 0..max_iter {
        a.apply(&p, &mut q);
        let alpha = rz / dot(&p, &q);
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * q[k];
        }
        rel = norm2(&r) / bnorm;
        if rel <= tol {
            break;
        }
        for k in 0..n {
            z[k] = r[k] * inv[k];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for k in 0..n {
            p[k] = z[k] + beta * p[k];
        }
    }
    (x, rel)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
