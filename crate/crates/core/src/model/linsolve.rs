//! Banded LU with partial pivoting, LAPACK-style band storage.
//!
//! The 2D convection-diffusion systems are banded (bandwidth = number of
//! nodes per grid line), nonsymmetric, and must be solved to tight
//! residuals for the finite-difference gradient checks to be meaningful,
//! so a direct factorization is used. Both `A x = b` and `A^T x = b`
//! solves are provided; the adjoint needs the transpose.

use crate::error::{Error, Result};

/// Square banded matrix with `kl` sub- and `ku` super-diagonals.
///
/// Storage holds `2*kl + ku + 1` rows per column so the factorization
/// fill-in fits in place: entry `(i, j)` lives at band row
/// `kl + ku + i - j` of column `j`.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    /// Column-major: `ab[j * ldab + band_row]`.
    ab: Vec<f64>,
}

impl BandMatrix {
    pub fn new(n: usize, kl: usize, ku: usize) -> BandMatrix {
        let ldab = 2 * kl + ku + 1;
        BandMatrix {
            n,
            kl,
            ku,
            ldab,
            ab: vec![0.0; ldab * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.n && j < self.n);
        debug_assert!(j as isize - i as isize <= self.ku as isize);
        debug_assert!(i as isize - j as isize <= self.kl as isize);
        j * self.ldab + (self.kl + self.ku + i - j)
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let idx = self.idx(i, j);
        self.ab[idx] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let idx = self.idx(i, j);
        self.ab[idx] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl < i || i + self.ku < j {
            return 0.0;
        }
        self.ab[j * self.ldab + (self.kl + self.ku + i - j)]
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for (j, &xj) in x.iter().enumerate() {
            if xj == 0.0 {
                continue;
            }
            let lo = j.saturating_sub(self.ku);
            let hi = (j + self.kl).min(self.n - 1);
            let col = &self.ab[j * self.ldab + (self.kl + self.ku + lo - j)..];
            for (yi, a) in y[lo..=hi].iter_mut().zip(col) {
                *yi += a * xj;
            }
        }
        y
    }

    pub fn matvec_transpose(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for (j, yj) in y.iter_mut().enumerate() {
            let lo = j.saturating_sub(self.ku);
            let hi = (j + self.kl).min(self.n - 1);
            let col = &self.ab[j * self.ldab + (self.kl + self.ku + lo - j)..];
            *yj = x[lo..=hi].iter().zip(col).map(|(x, a)| x * a).sum();
        }
        y
    }

    /// LU factorization with partial pivoting.
    pub fn factor(&self) -> Result<BandLu> {
        let n = self.n;
        let (kl, ku, ldab) = (self.kl, self.ku, self.ldab);
        let kv = kl + ku;
        let mut ab = self.ab.clone();
        let mut ipiv = vec![0usize; n];

        for j in 0..n {
            let km = kl.min(n - 1 - j);
            // pivot among A[j..=j+km][j], stored at band rows kv..=kv+km
            let mut piv_t = 0usize;
            let mut piv_v = ab[j * ldab + kv].abs();
            for t in 1..=km {
                let v = ab[j * ldab + kv + t].abs();
                if v > piv_v {
                    piv_v = v;
                    piv_t = t;
                }
            }
            if piv_v == 0.0 {
                return Err(Error::SolverFailure(format!(
                    "banded LU: zero pivot column {j} (matrix singular)"
                )));
            }
            ipiv[j] = j + piv_t;
            if piv_t != 0 {
                // swap rows j and j+piv_t over columns j..=min(j+kv, n-1)
                let hi = (j + kv).min(n - 1);
                for c in j..=hi {
                    let a_idx = c * ldab + (kv + j - c);
                    let b_idx = c * ldab + (kv + j + piv_t - c);
                    ab.swap(a_idx, b_idx);
                }
            }
            let diag = ab[j * ldab + kv];
            for t in 1..=km {
                let l = ab[j * ldab + kv + t] / diag;
                ab[j * ldab + kv + t] = l;
                if l != 0.0 {
                    let hi = (j + kv).min(n - 1);
                    for c in (j + 1)..=hi {
                        let piv_row = ab[c * ldab + (kv + j - c)];
                        if piv_row != 0.0 {
                            ab[c * ldab + (kv + j + t - c)] -= l * piv_row;
                        }
                    }
                }
            }
        }

        Ok(BandLu {
            n,
            kl,
            ku,
            ldab,
            ab,
            ipiv,
        })
    }
}

/// Factored form of a [`BandMatrix`].
#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    ab: Vec<f64>,
    ipiv: Vec<usize>,
}

impl BandLu {
    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let kv = self.kl + self.ku;
        let mut x = b.to_vec();
        // forward: pivots and L
        for j in 0..n {
            let jp = self.ipiv[j];
            if jp != j {
                x.swap(j, jp);
            }
            let km = self.kl.min(n - 1 - j);
            let xj = x[j];
            if xj != 0.0 {
                for t in 1..=km {
                    x[j + t] -= self.ab[j * self.ldab + kv + t] * xj;
                }
            }
        }
        // back substitution with U (bandwidth kv)
        for j in (0..n).rev() {
            x[j] /= self.ab[j * self.ldab + kv];
            let xj = x[j];
            if xj != 0.0 {
                let lo = j.saturating_sub(kv);
                let col = &self.ab[j * self.ldab + (kv + lo - j)..];
                for (xi, a) in x[lo..j].iter_mut().zip(col) {
                    *xi -= a * xj;
                }
            }
        }
        x
    }

    /// Solves `A^T x = b`.
    pub fn solve_transpose(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let kv = self.kl + self.ku;
        let mut x = b.to_vec();
        // U^T z = b: lower triangular forward solve
        for j in 0..n {
            let lo = j.saturating_sub(kv);
            let col = &self.ab[j * self.ldab + (kv + lo - j)..];
            let dot: f64 = x[lo..j].iter().zip(col).map(|(x, a)| x * a).sum();
            x[j] = (x[j] - dot) / self.ab[j * self.ldab + kv];
        }
        // L^T y = z with the row interchange undone right after each
        // step, mirroring the factorization order in reverse
        if n >= 2 {
            for j in (0..n - 1).rev() {
                let km = self.kl.min(n - 1 - j);
                let mut s = x[j];
                for t in 1..=km {
                    s -= self.ab[j * self.ldab + kv + t] * x[j + t];
                }
                x[j] = s;
                let jp = self.ipiv[j];
                if jp != j {
                    x.swap(j, jp);
                }
            }
        }
        x
    }
}
