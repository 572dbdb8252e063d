//! Banded LU factorization with partial pivoting (real and complex), a
//! bordered variant for phase-condition Newton systems, and a small dense
//! complex solver.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Scalar field for the banded kernels.
pub trait Field:
    Copy
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const ZERO: Self;
    fn modulus(self) -> f64;
}

impl Field for f64 {
    const ZERO: Self = 0.0;
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl Field for Complex64 {
    const ZERO: Self = Complex64::new(0.0, 0.0);
    fn modulus(self) -> f64 {
        self.norm()
    }
}

/// Banded matrix in LAPACK-style storage with room for pivoting fill:
/// entry (i, j) lives at `data[j * ld + kl + ku + i - j]` for
/// j - ku - kl <= i <= j + kl (the extra `kl` superdiagonals hold fill).
#[derive(Debug, Clone)]
pub struct BandedMatrix<T: Field> {
    pub n: usize,
    pub kl: usize,
    pub ku: usize,
    ld: usize,
    data: Vec<T>,
}

/// Real banded matrix (the common case in this crate).
pub type Banded = BandedMatrix<f64>;
/// Complex banded matrix, used by the shifted inverse-iteration polish.
pub type BandedC = BandedMatrix<Complex64>;

impl<T: Field> BandedMatrix<T> {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let ld = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            ld,
            data: vec![T::ZERO; ld * n],
        }
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        j * self.ld + self.kl + self.ku + i - j
    }

    #[inline]
    pub fn in_band(&self, i: usize, j: usize) -> bool {
        i + self.ku + self.kl >= j && j + self.kl >= i && i < self.n && j < self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        if self.in_band(i, j) {
            self.data[self.idx(i, j)]
        } else {
            T::ZERO
        }
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        debug_assert!(
            i + self.ku >= j && j + self.kl >= i,
            "entry ({i},{j}) outside the declared band"
        );
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: T) {
        let k = self.idx(i, j);
        self.data[k] = self.data[k] + v;
    }

    /// y = A x.
    pub fn matvec(&self, x: &[T], y: &mut [T]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        for i in 0..self.n {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(self.n - 1);
            let mut s = T::ZERO;
            for j in lo..=hi {
                s = s + self.get(i, j) * x[j];
            }
            y[i] = s;
        }
    }

    /// LU factorization with partial pivoting (unblocked dgbtrf).
    pub fn factor(mut self) -> Result<BandedLu<T>> {
        let n = self.n;
        let (kl, ku) = (self.kl, self.ku);
        let kv = kl + ku; // effective upper bandwidth after pivoting
        let mut ipiv = vec![0usize; n];
        for j in 0..n {
            let pmax = (j + kl).min(n - 1);
            let mut p = j;
            let mut pv = self.get(j, j).modulus();
            for i in (j + 1)..=pmax {
                let v = self.get(i, j).modulus();
                if v > pv {
                    pv = v;
                    p = i;
                }
            }
            if pv == 0.0 {
                return Err(Error::Domain(format!(
                    "banded matrix is numerically singular at column {j}"
                )));
            }
            ipiv[j] = p;
            if p != j {
                // swap rows p and j over columns j..=min(j+kv, n-1)
                let cmax = (j + kv).min(n - 1);
                for c in j..=cmax {
                    let a = self.get(j, c);
                    let b = self.get(p, c);
                    let ij = self.idx(j, c);
                    self.data[ij] = b;
                    let ip = self.idx(p, c);
                    self.data[ip] = a;
                }
            }
            let piv = self.get(j, j);
            for i in (j + 1)..=pmax {
                let m = self.get(i, j) / piv;
                let k = self.idx(i, j);
                self.data[k] = m;
                if m.modulus() != 0.0 {
                    let cmax = (j + kv).min(n - 1);
                    for c in (j + 1)..=cmax {
                        let v = self.get(j, c);
                        if v.modulus() != 0.0 {
                            let k = self.idx(i, c);
                            self.data[k] = self.data[k] - m * v;
                        }
                    }
                }
            }
        }
        Ok(BandedLu {
            n,
            kl,
            ku,
            ld: self.ld,
            data: self.data,
            ipiv,
        })
    }
}

impl Banded {
    /// Complex y = A x for a real banded A.
    pub fn matvec_complex(&self, x: &[Complex64], y: &mut [Complex64]) {
        for i in 0..self.n {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(self.n - 1);
            let mut s = Complex64::new(0.0, 0.0);
            for j in lo..=hi {
                s += self.get(i, j) * x[j];
            }
            y[i] = s;
        }
    }

    /// Complex copy shifted by sigma: A - sigma I.
    pub fn to_complex_shifted(&self, sigma: Complex64) -> BandedC {
        let mut out = BandedC::zeros(self.n, self.kl, self.ku);
        for i in 0..self.n {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(self.n - 1);
            for j in lo..=hi {
                let mut v = Complex64::new(self.get(i, j), 0.0);
                if i == j {
                    v -= sigma;
                }
                if i + self.ku >= j && j + self.kl >= i {
                    out.set(i, j, v);
                }
            }
        }
        out
    }
}

/// Factored banded matrix; multipliers stored in the subdiagonals.
#[derive(Debug, Clone)]
pub struct BandedLu<T: Field> {
    n: usize,
    kl: usize,
    ku: usize,
    ld: usize,
    data: Vec<T>,
    ipiv: Vec<usize>,
}

impl<T: Field> BandedLu<T> {
    #[inline]
    fn get(&self, i: usize, j: usize) -> T {
        self.data[j * self.ld + self.kl + self.ku + i - j]
    }

    /// Solve A x = b in place.
    pub fn solve(&self, b: &mut [T]) {
        let n = self.n;
        let kv = self.kl + self.ku;
        // forward
        for j in 0..n {
            let p = self.ipiv[j];
            if p != j {
                b.swap(p, j);
            }
            let bj = b[j];
            if bj.modulus() != 0.0 {
                let imax = (j + self.kl).min(n - 1);
                for i in (j + 1)..=imax {
                    b[i] = b[i] - self.get(i, j) * bj;
                }
            }
        }
        // backward
        for j in (0..n).rev() {
            b[j] = b[j] / self.get(j, j);
            let bj = b[j];
            if bj.modulus() != 0.0 {
                let lo = j.saturating_sub(kv);
                for i in lo..j {
                    b[i] = b[i] - self.get(i, j) * bj;
                }
            }
        }
    }
}

/// Banded matrix bordered by one dense column, one dense row and a corner:
/// `[[B, c], [r^T, d]]`. Factorization eliminates band columns with
/// partial pivoting among band rows (the border row is never chosen as a
/// pivot row, which keeps the band structure intact) while carrying the
/// dense column and row along.
#[derive(Debug, Clone)]
pub struct BorderedBanded {
    pub band: Banded,
    pub col: Vec<f64>,
    pub row: Vec<f64>,
    pub corner: f64,
}

impl BorderedBanded {
    pub fn new(band: Banded, col: Vec<f64>, row: Vec<f64>, corner: f64) -> Self {
        assert_eq!(col.len(), band.n);
        assert_eq!(row.len(), band.n);
        Self {
            band,
            col,
            row,
            corner,
        }
    }

    /// Solve the bordered system for rhs (length n + 1), in place.
    pub fn solve(&self, rhs: &mut [f64]) -> Result<()> {
        let n = self.band.n;
        assert_eq!(rhs.len(), n + 1);
        let mut band = self.band.clone();
        let mut col = self.col.clone();
        let mut row = self.row.clone();
        let mut corner = self.corner;
        let kv = band.kl + band.ku;
        let kl = band.kl;
        // elimination
        for j in 0..n {
            let pmax = (j + kl).min(n - 1);
            let mut p = j;
            let mut pv = band.get(j, j).abs();
            for i in (j + 1)..=pmax {
                let v = band.get(i, j).abs();
                if v > pv {
                    pv = v;
                    p = i;
                }
            }
            if pv == 0.0 {
                return Err(Error::Domain(format!(
                    "bordered banded matrix singular at column {j}"
                )));
            }
            if p != j {
                let cmax = (j + kv).min(n - 1);
                for c in j..=cmax {
                    let a = band.get(j, c);
                    let b2 = band.get(p, c);
                    let k = band.idx(j, c);
                    band.data[k] = b2;
                    let k = band.idx(p, c);
                    band.data[k] = a;
                }
                col.swap(j, p);
                rhs.swap(j, p);
            }
            let piv = band.get(j, j);
            let cmax = (j + kv).min(n - 1);
            for i in (j + 1)..=pmax {
                let m = band.get(i, j) / piv;
                if m != 0.0 {
                    for c in (j + 1)..=cmax {
                        let v = band.get(j, c);
                        if v != 0.0 {
                            let k = band.idx(i, c);
                            band.data[k] -= m * v;
                        }
                    }
                    col[i] -= m * col[j];
                    rhs[i] -= m * rhs[j];
                }
                let k = band.idx(i, j);
                band.data[k] = 0.0;
            }
            // eliminate the border row entry at column j
            let mb = row[j] / piv;
            if mb != 0.0 {
                for c in (j + 1)..=cmax {
                    row[c] -= mb * band.get(j, c);
                }
                corner -= mb * col[j];
                rhs[n] -= mb * rhs[j];
            }
            row[j] = 0.0;
        }
        if corner == 0.0 {
            return Err(Error::Domain("bordered system corner is zero".into()));
        }
        // back substitution: last unknown, then band unknowns
        let xl = rhs[n] / corner;
        rhs[n] = xl;
        for j in (0..n).rev() {
            let mut s = rhs[j] - col[j] * xl;
            for c in (j + 1)..=(j + kv).min(n - 1) {
                s -= band.get(j, c) * rhs[c];
            }
            rhs[j] = s / band.get(j, j);
        }
        Ok(())
    }
}

/// Solve the small dense complex system M x = b by LU with partial
/// pivoting; M is overwritten. Used for Ritz vectors of the Arnoldi
/// projection, so sizes stay below a few hundred.
pub fn solve_dense_complex(m: &mut [Vec<Complex64>], b: &mut [Complex64]) -> Result<()> {
    let n = b.len();
    for j in 0..n {
        let mut p = j;
        let mut pv = m[j][j].norm();
        for i in (j + 1)..n {
            if m[i][j].norm() > pv {
                pv = m[i][j].norm();
                p = i;
            }
        }
        if pv == 0.0 {
            return Err(Error::Domain("complex system singular".into()));
        }
        m.swap(j, p);
        b.swap(j, p);
        let piv = m[j][j];
        for i in (j + 1)..n {
            let f = m[i][j] / piv;
            if f.norm() != 0.0 {
                for k in (j + 1)..n {
                    let v = m[j][k];
                    m[i][k] -= f * v;
                }
                b[i] -= f * b[j];
            }
            m[i][j] = Complex64::new(0.0, 0.0);
        }
    }
    for j in (0..n).rev() {
        let mut s = b[j];
        for k in (j + 1)..n {
            s -= m[j][k] * b[k];
        }
        b[j] = s / m[j][j];
    }
    Ok(())
}
