//! Compressed sparse row matrices, Jacobi-preconditioned conjugate gradients
//! and a dense Cholesky solve used as a small-instance oracle.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub nrows: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from `(row, col, value)` triplets. Duplicates are summed in the
    /// order they were supplied, so the result only depends on that order.
    pub fn from_triplets(nrows: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0; nrows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len() / 2);
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len() / 2);
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in triplets {
            assert!(i < nrows && j < nrows, "triplet ({i}, {j}) outside {nrows}x{nrows}");
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self {
            nrows,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, (0..n).map(|i| (i, i, 1.0)).collect())
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(pos) => self.values[r.start + pos],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows).map(|i| self.get(i, i)).collect()
    }

    /// `y = A x`.
    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *yi = acc;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// Largest `|a_ij - a_ji|` relative to the largest `|a_ij|`.
    pub fn asymmetry(&self) -> f64 {
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut worst: f64 = 0.0;
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        if scale > 0.0 {
            worst / scale
        } else {
            0.0
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.nrows]; self.nrows];
        for (i, row) in d.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] = v;
            }
        }
        d
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgConfig {
    /// Stop when `||r|| <= rel_tol * ||b||`.
    pub rel_tol: f64,
    /// `None`: `50 sqrt(n) + 1000`.
    pub max_iterations: Option<usize>,
}

impl Default for CgConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            max_iterations: None,
        }
    }
}

impl CgConfig {
    pub fn iteration_limit(&self, n: usize) -> usize {
        self.max_iterations
            .unwrap_or_else(|| (50.0 * (n as f64).sqrt()).ceil() as usize + 1000)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgStats {
    pub iterations: usize,
    /// Recursively updated `||r|| / ||b||` at exit.
    pub relative_residual: f64,
}

/// Jacobi-preconditioned conjugate gradients from a zero initial guess.
pub fn pcg_jacobi(a: &CsrMatrix, b: &[f64], cfg: &CgConfig) -> Result<(Vec<f64>, CgStats)> {
    let n = a.nrows;
    assert_eq!(b.len(), n);
    let mut x = vec![0.0; n];
    let b_norm = dot(b, b).sqrt();
    if b_norm == 0.0 {
        return Ok((
            x,
            CgStats {
                iterations: 0,
                relative_residual: 0.0,
            },
        ));
    }
    let inv_diag: Vec<f64> = a
        .diagonal()
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            if d > 0.0 {
                Ok(1.0 / d)
            } else {
                Err(Error::NotPositiveDefinite { row: i, pivot: d })
            }
        })
        .collect::<Result<_>>()?;

    let limit = cfg.iteration_limit(n);
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut rel = 1.0;
    for it in 1..=limit {
        a.mul_vec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::NotPositiveDefinite { row: it, pivot: pap });
        }
        let step = rz / pap;
        let mut rr = 0.0;
        for i in 0..n {
            x[i] += step * p[i];
            r[i] -= step * ap[i];
            rr += r[i] * r[i];
        }
        rel = rr.sqrt() / b_norm;
        if rel <= cfg.rel_tol {
            return Ok((
                x,
                CgStats {
                    iterations: it,
                    relative_residual: rel,
                },
            ));
        }
        let mut rz_new = 0.0;
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
            rz_new += r[i] * z[i];
        }
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::MaxIterations {
        iterations: limit,
        residual: rel,
    })
}

/// Dense Cholesky factorisation and solve. Intended for small systems only.
pub fn dense_cholesky_solve(a: &[Vec<f64>], b: &[f64]) -> Result<Vec<f64>> {
    let n = b.len();
    let mut l = vec![vec![0.0; n]; n];
    for j in 0..n {
        let mut d = a[j][j];
        for k in 0..j {
            d -= l[j][k] * l[j][k];
        }
        if !(d > 0.0) {
            return Err(Error::NotPositiveDefinite { row: j, pivot: d });
        }
        let d = d.sqrt();
        l[j][j] = d;
        for i in j + 1..n {
            let mut s = a[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            l[i][j] = s / d;
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i][k] * y[k];
        }
        y[i] = s / l[i][i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[k][i] * x[k];
        }
        x[i] = s / l[i][i];
    }
    Ok(x)
}

/// Largest `max |i - j|` over the stored entries.
pub fn bandwidth(a: &CsrMatrix) -> usize {
    (0..a.nrows)
        .flat_map(|i| a.row(i).map(move |(j, _)| i.abs_diff(j)))
        .max()
        .unwrap_or(0)
}

/// Storage limit of the banded factor, in matrix entries.
pub const BANDED_ENTRY_CAP: u64 = 350_000_000;

/// Cholesky factor of a symmetric positive definite band matrix. Row `i`
/// holds `L[i][i - bw ..= i]` contiguously.
#[derive(Debug, Clone)]
pub struct BandedCholesky {
    n: usize,
    bw: usize,
    l: Vec<f64>,
}

impl BandedCholesky {
    /// Factors the lower band of `a`; the upper triangle is not read.
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.nrows;
        let bw = bandwidth(a);
        let w = bw + 1;
        let entries = n as u64 * w as u64;
        if entries > BANDED_ENTRY_CAP {
            return Err(Error::SizeCap {
                size: entries,
                cap: BANDED_ENTRY_CAP,
            });
        }
        let mut l = vec![0.0; n * w];
        for i in 0..n {
            for (j, v) in a.row(i) {
                if j <= i {
                    l[i * w + bw - (i - j)] = v;
                }
            }
        }
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            for j in lo..=i {
                // Overlap of rows i and j, columns k in [lo, j).
                let (ri, rj) = (i * w + bw - (i - lo), j * w + bw - (j - lo));
                let len = j - lo;
                let s = l[i * w + bw - (i - j)] - dot(&l[ri..ri + len], &l[rj..rj + len]);
                if i == j {
                    if !(s > 0.0) {
                        return Err(Error::NotPositiveDefinite { row: i, pivot: s });
                    }
                    l[i * w + bw] = s.sqrt();
                } else {
                    l[i * w + bw - (i - j)] = s / l[j * w + bw];
                }
            }
        }
        Ok(Self { n, bw, l })
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let (n, bw, w) = (self.n, self.bw, self.bw + 1);
        let mut y = b.to_vec();
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let row = &self.l[i * w + bw - (i - lo)..i * w + bw];
            y[i] = (y[i] - dot(row, &y[lo..i])) / self.l[i * w + bw];
        }
        for i in (0..n).rev() {
            y[i] /= self.l[i * w + bw];
            let yi = y[i];
            let lo = i.saturating_sub(bw);
            for (k, lik) in (lo..i).zip(&self.l[i * w + bw - (i - lo)..i * w + bw]) {
                y[k] -= lik * yi;
            }
        }
        y
    }
}

/// Direct banded solve; the returned stats report the true relative
/// residual and zero iterations.
pub fn banded_cholesky_solve(a: &CsrMatrix, b: &[f64]) -> Result<(Vec<f64>, CgStats)> {
    let x = BandedCholesky::factor(a)?.solve(b);
    let r: Vec<f64> = a.mul_vec(&x).iter().zip(b).map(|(ax, b)| b - ax).collect();
    let b_norm = dot(b, b).sqrt();
    let relative_residual = if b_norm > 0.0 { dot(&r, &r).sqrt() / b_norm } else { 0.0 };
    Ok((
        x,
        CgStats {
            iterations: 0,
            relative_residual,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplace_1d(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i > 0 {
                t.push((i, i - 1, -1.0));
            }
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, t)
    }

    #[test]
    fn duplicates_are_summed() {
        let a = CsrMatrix::from_triplets(2, vec![(1, 0, 1.0), (0, 0, 2.0), (1, 0, 0.5), (0, 1, 3.0)]);
        assert_eq!(a.row_ptr, vec![0, 2, 3]);
        assert_eq!(a.get(1, 0), 1.5);
        assert_eq!(a.get(1, 1), 0.0);
        assert_eq!(a.mul_vec(&[1.0, 1.0]), vec![5.0, 1.5]);
    }

    #[test]
    fn identity_in_one_iteration() {
        let r = vec![1.0, -2.0, 3.5, 0.25];
        let (x, stats) = pcg_jacobi(&CsrMatrix::identity(4), &r, &CgConfig::default()).unwrap();
        assert_eq!(x, r);
        assert_eq!(stats.iterations, 1);
    }

    #[test]
    fn zero_rhs() {
        let (x, stats) = pcg_jacobi(&laplace_1d(5), &[0.0; 5], &CgConfig::default()).unwrap();
        assert_eq!(x, vec![0.0; 5]);
        assert_eq!(stats.iterations, 0);
    }

    #[test]
    fn cg_matches_cholesky() {
        let a = laplace_1d(50);
        let b: Vec<f64> = (0..50).map(|i| ((i * 7) % 11) as f64 - 5.0).collect();
        let (x, _) = pcg_jacobi(&a, &b, &CgConfig::default()).unwrap();
        let y = dense_cholesky_solve(&a.to_dense(), &b).unwrap();
        let scale = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (p, q) in x.iter().zip(&y) {
            assert!((p - q).abs() < 1e-10 * scale);
        }
        assert_eq!(a.asymmetry(), 0.0);
    }

    #[test]
    fn iteration_cap() {
        let cfg = CgConfig {
            rel_tol: 1e-14,
            max_iterations: Some(3),
        };
        let b = vec![1.0; 40];
        assert!(matches!(pcg_jacobi(&laplace_1d(40), &b, &cfg), Err(Error::MaxIterations { iterations: 3, .. })));
        assert_eq!(CgConfig::default().iteration_limit(400), 2000);
    }

    #[test]
    fn banded_matches_dense() {
        // 2D five-point Laplacian on a 7x5 grid: bandwidth 7.
        let (nx, ny) = (7, 5);
        let mut t = Vec::new();
        for j in 0..ny {
            for i in 0..nx {
                let p = j * nx + i;
                t.push((p, p, 4.0 + 0.1 * (p % 3) as f64));
                if i > 0 {
                    t.push((p, p - 1, -1.0));
                    t.push((p - 1, p, -1.0));
                }
                if j > 0 {
                    t.push((p, p - nx, -1.0));
                    t.push((p - nx, p, -1.0));
                }
            }
        }
        let a = CsrMatrix::from_triplets(nx * ny, t);
        assert_eq!(bandwidth(&a), nx);
        let b: Vec<f64> = (0..nx * ny).map(|i| ((i * 5) % 7) as f64 - 3.0).collect();
        let (x, stats) = banded_cholesky_solve(&a, &b).unwrap();
        let y = dense_cholesky_solve(&a.to_dense(), &b).unwrap();
        for (p, q) in x.iter().zip(&y) {
            assert!((p - q).abs() < 1e-13);
        }
        assert!(stats.relative_residual < 1e-14);
        assert_eq!(BandedCholesky::factor(&laplace_1d(4)).unwrap().bandwidth(), 1);
    }

    #[test]
    fn indefinite_is_reported() {
        assert!(banded_cholesky_solve(&CsrMatrix::from_triplets(2, vec![(0, 0, 1.0), (1, 1, -1.0)]), &[1.0, 1.0]).is_err());
        let a = CsrMatrix::from_triplets(2, vec![(0, 0, 1.0), (1, 1, -1.0)]);
        assert!(matches!(pcg_jacobi(&a, &[1.0, 1.0], &CgConfig::default()), Err(Error::NotPositiveDefinite { .. })));
        assert!(dense_cholesky_solve(&a.to_dense(), &[1.0, 1.0]).is_err());
    }
}
