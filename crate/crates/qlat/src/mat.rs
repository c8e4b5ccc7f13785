//! Dense exact matrices: rationals for geometry, big integers for unimodular
//! bookkeeping (Smith form, transforms), i64 for Gram matrices and GL words.
//!
//! Everything here is exact; floating point never enters. Sizes stay small
//! (rank <= 16 or so), so the simple O(n^3) algorithms are plenty.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::Error;

pub type Q = BigRational;
pub type Z = BigInt;

pub fn qz(n: i64) -> Q {
    Q::from_integer(Z::from(n))
}

pub fn qq(n: i64, d: i64) -> Q {
    assert!(d != 0);
    Q::new(Z::from(n), Z::from(d))
}

/// Parse "p/q" or a bare integer.
pub fn parse_q(s: &str) -> Result<Q, Error> {
    let s = s.trim();
    let bad = || Error::Parse(format!("bad rational `{s}`"));
    if let Some((num, den)) = s.split_once('/') {
        let n: Z = num.trim().parse().map_err(|_| bad())?;
        let d: Z = den.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        Ok(Q::new(n, d))
    } else {
        let n: Z = s.parse().map_err(|_| bad())?;
        Ok(Q::from_integer(n))
    }
}

pub fn fmt_q(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Row-major rational matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QMat {
    rows: usize,
    cols: usize,
    a: Vec<Q>,
}

impl std::fmt::Debug for QMat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "QMat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| fmt_q(self.at(i, j))).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl QMat {
    pub fn zero(rows: usize, cols: usize) -> Self {
        QMat { rows, cols, a: vec![Q::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.set(i, i, Q::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Q>>) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        QMat { rows: r, cols: c, a: rows.into_iter().flatten().collect() }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Q) -> Self {
        let mut m = Self::zero(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, i: usize, j: usize) -> &Q {
        &self.a[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Q) {
        self.a[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> Vec<Q> {
        (0..self.cols).map(|j| self.at(i, j).clone()).collect()
    }

    pub fn col(&self, j: usize) -> Vec<Q> {
        (0..self.rows).map(|i| self.at(i, j).clone()).collect()
    }

    pub fn transpose(&self) -> QMat {
        QMat::from_fn(self.cols, self.rows, |i, j| self.at(j, i).clone())
    }

    pub fn mul(&self, other: &QMat) -> QMat {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = QMat::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let lik = self.at(i, k);
                if lik.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.at(i, j) + lik * other.at(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Q]) -> Vec<Q> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.at(i, j) * &v[j]).sum())
            .collect()
    }

    pub fn add(&self, other: &QMat) -> QMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        QMat::from_fn(self.rows, self.cols, |i, j| self.at(i, j) + other.at(i, j))
    }

    pub fn sub(&self, other: &QMat) -> QMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        QMat::from_fn(self.rows, self.cols, |i, j| self.at(i, j) - other.at(i, j))
    }

    pub fn scale(&self, c: &Q) -> QMat {
        QMat::from_fn(self.rows, self.cols, |i, j| self.at(i, j) * c)
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..i).all(|j| self.at(i, j) == self.at(j, i)))
    }

    pub fn block_diag(blocks: &[&QMat]) -> QMat {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = QMat::zero(rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    out.set(r0 + i, c0 + j, b.at(i, j).clone());
                }
            }
            r0 += b.rows;
            c0 += b.cols;
        }
        out
    }

    /// Exact inverse by Gauss-Jordan; None if singular.
    pub fn inverse(&self) -> Option<QMat> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut m = self.clone();
        let mut inv = QMat::identity(n);
        for col in 0..n {
            let piv = (col..n).find(|&i| !m.at(i, col).is_zero())?;
            if piv != col {
                for j in 0..n {
                    let (a, b) = (m.at(piv, j).clone(), m.at(col, j).clone());
                    m.set(piv, j, b);
                    m.set(col, j, a);
                    let (a, b) = (inv.at(piv, j).clone(), inv.at(col, j).clone());
                    inv.set(piv, j, b);
                    inv.set(col, j, a);
                }
            }
            let d = m.at(col, col).clone();
            for j in 0..n {
                m.set(col, j, m.at(col, j) / &d);
                inv.set(col, j, inv.at(col, j) / &d);
            }
            for i in 0..n {
                if i == col || m.at(i, col).is_zero() {
                    continue;
                }
                let f = m.at(i, col).clone();
                for j in 0..n {
                    let v = m.at(i, j) - &f * m.at(col, j);
                    m.set(i, j, v);
                    let v = inv.at(i, j) - &f * inv.at(col, j);
                    inv.set(i, j, v);
                }
            }
        }
        Some(inv)
    }

    pub fn det(&self) -> Q {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut m = self.clone();
        let mut det = Q::one();
        for col in 0..n {
            let piv = match (col..n).find(|&i| !m.at(i, col).is_zero()) {
                Some(p) => p,
                None => return Q::zero(),
            };
            if piv != col {
                det = -det;
                for j in 0..n {
                    let (a, b) = (m.at(piv, j).clone(), m.at(col, j).clone());
                    m.set(piv, j, b);
                    m.set(col, j, a);
                }
            }
            let d = m.at(col, col).clone();
            det *= &d;
            for i in col + 1..n {
                if m.at(i, col).is_zero() {
                    continue;
                }
                let f = m.at(i, col) / &d;
                for j in col..n {
                    let v = m.at(i, j) - &f * m.at(col, j);
                    m.set(i, j, v);
                }
            }
        }
        det
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let (rows, cols) = (m.rows, m.cols);
        let mut rank = 0;
        for col in 0..cols {
            let piv = match (rank..rows).find(|&i| !m.at(i, col).is_zero()) {
                Some(p) => p,
                None => continue,
            };
            for j in 0..cols {
                let (a, b) = (m.at(piv, j).clone(), m.at(rank, j).clone());
                m.set(piv, j, b);
                m.set(rank, j, a);
            }
            let d = m.at(rank, col).clone();
            for i in rank + 1..rows {
                if m.at(i, col).is_zero() {
                    continue;
                }
                let f = m.at(i, col) / &d;
                for j in col..cols {
                    let v = m.at(i, j) - &f * m.at(rank, j);
                    m.set(i, j, v);
                }
            }
            rank += 1;
            if rank == rows {
                break;
            }
        }
        rank
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.at(i, j).to_f64().unwrap()).collect())
            .collect()
    }
}

/// Inertia of an exact symmetric matrix: (positive, negative, zero) eigenvalue
/// counts, computed by symmetric elimination with diagonal pivoting and a
/// hyperbolic 2x2 step when every active diagonal entry vanishes.
pub fn inertia(g: &QMat) -> (usize, usize, usize) {
    assert!(g.is_symmetric(), "inertia needs a symmetric matrix");
    let mut m = g.clone();
    let mut active: Vec<usize> = (0..g.rows()).collect();
    let (mut pos, mut neg, mut zero) = (0, 0, 0);
    while !active.is_empty() {
        if let Some(&i) = active.iter().find(|&&i| !m.at(i, i).is_zero()) {
            let d = m.at(i, i).clone();
            if d.is_positive() {
                pos += 1;
            } else {
                neg += 1;
            }
            active.retain(|&k| k != i);
            // Schur complement over the rank-1 pivot.
            for &r in &active {
                if m.at(r, i).is_zero() {
                    continue;
                }
                let f = m.at(r, i) / &d;
                for &c in &active {
                    let v = m.at(r, c) - &f * m.at(i, c);
                    m.set(r, c, v);
                }
            }
        } else {
            // all active diagonals are zero
            let mut off = None;
            'outer: for (ai, &i) in active.iter().enumerate() {
                for &j in &active[ai + 1..] {
                    if !m.at(i, j).is_zero() {
                        off = Some((i, j));
                        break 'outer;
                    }
                }
            }
            let (i, j) = match off {
                Some(p) => p,
                None => {
                    zero += active.len();
                    break;
                }
            };
            // [[0,a],[a,0]] block contributes signature (+1,-1)
            pos += 1;
            neg += 1;
            let a = m.at(i, j).clone();
            active.retain(|&k| k != i && k != j);
            for &r in &active {
                let (ri, rj) = (m.at(r, i).clone(), m.at(r, j).clone());
                if ri.is_zero() && rj.is_zero() {
                    continue;
                }
                for &c in &active {
                    let corr = (&ri * m.at(j, c) + &rj * m.at(i, c)) / &a;
                    let v = m.at(r, c) - corr;
                    m.set(r, c, v);
                }
            }
        }
    }
    (pos, neg, zero)
}

pub fn is_psd(g: &QMat) -> bool {
    let (_, neg, _) = inertia(g);
    neg == 0
}

pub fn is_positive_definite(g: &QMat) -> bool {
    let (pos, _, _) = inertia(g);
    pos == g.rows()
}

/// LDL^T of a positive definite symmetric matrix in the given basis order
/// (no pivoting): g = L D L^T with L unit lower triangular. Errors if a pivot
/// fails to be positive.
pub fn ldlt_pd(g: &QMat) -> Result<(QMat, Vec<Q>), Error> {
    assert!(g.is_symmetric());
    let n = g.rows();
    let mut l = QMat::identity(n);
    let mut d = vec![Q::zero(); n];
    let mut m = g.clone();
    for k in 0..n {
        let dk = m.at(k, k).clone();
        if !dk.is_positive() {
            return Err(Error::NotPositiveDefinite);
        }
        d[k] = dk.clone();
        for i in k + 1..n {
            l.set(i, k, m.at(i, k) / &dk);
        }
        for i in k + 1..n {
            let f = m.at(i, k) / &dk;
            for j in k + 1..=i {
                let v = m.at(i, j) - &f * m.at(j, k);
                m.set(i, j, v.clone());
                m.set(j, i, v);
            }
        }
    }
    Ok((l, d))
}

/// i64 matrix for Gram data and GL(Z) words. Arithmetic is checked; desk-scale
/// inputs never get near overflow, and if they do we want a loud failure.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct IMat {
    rows: usize,
    cols: usize,
    a: Vec<i64>,
}

impl IMat {
    pub fn zero(rows: usize, cols: usize) -> Self {
        IMat { rows, cols, a: vec![0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<i64>>) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        IMat { rows: r, cols: c, a: rows.into_iter().flatten().collect() }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> i64) -> Self {
        let mut m = Self::zero(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, i: usize, j: usize) -> i64 {
        self.a[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: i64) {
        self.a[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> Vec<i64> {
        self.a[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn transpose(&self) -> IMat {
        IMat::from_fn(self.cols, self.rows, |i, j| self.at(j, i))
    }

    pub fn mul(&self, other: &IMat) -> IMat {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        IMat::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols)
                .map(|k| {
                    self.at(i, k)
                        .checked_mul(other.at(k, j))
                        .expect("integer matrix overflow")
                })
                .fold(0i64, |acc, t| acc.checked_add(t).expect("integer matrix overflow"))
        })
    }

    pub fn mul_vec(&self, v: &[i64]) -> Vec<i64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|j| self.at(i, j).checked_mul(v[j]).expect("overflow"))
                    .fold(0i64, |acc, t| acc.checked_add(t).expect("overflow"))
            })
            .collect()
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..i).all(|j| self.at(i, j) == self.at(j, i)))
    }

    pub fn block_diag(blocks: &[&IMat]) -> IMat {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = IMat::zero(rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    out.set(r0 + i, c0 + j, b.at(i, j));
                }
            }
            r0 += b.rows;
            c0 += b.cols;
        }
        out
    }

    pub fn to_qmat(&self) -> QMat {
        QMat::from_fn(self.rows, self.cols, |i, j| qz(self.at(i, j)))
    }

    pub fn to_zmat(&self) -> ZMat {
        ZMat::from_fn(self.rows, self.cols, |i, j| Z::from(self.at(i, j)))
    }

    /// Determinant by fraction-free (Bareiss) elimination in i128.
    pub fn det(&self) -> i128 {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        if n == 0 {
            return 1;
        }
        let mut m: Vec<Vec<i128>> =
            (0..n).map(|i| (0..n).map(|j| self.at(i, j) as i128).collect()).collect();
        let mut sign = 1i128;
        let mut prev = 1i128;
        for k in 0..n - 1 {
            if m[k][k] == 0 {
                let swap = match (k + 1..n).find(|&i| m[i][k] != 0) {
                    Some(s) => s,
                    None => return 0,
                };
                m.swap(k, swap);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = m[i][j]
                        .checked_mul(m[k][k])
                        .and_then(|a| a.checked_sub(m[i][k].checked_mul(m[k][j]).expect("ovf")))
                        .expect("bareiss overflow");
                    m[i][j] = v / prev; // exact division, Bareiss invariant
                }
                m[i][k] = 0;
            }
            prev = m[k][k];
        }
        sign * m[n - 1][n - 1]
    }
}

/// BigInt matrix; only the operations the Smith form bookkeeping needs.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ZMat {
    rows: usize,
    cols: usize,
    a: Vec<Z>,
}

impl ZMat {
    pub fn zero(rows: usize, cols: usize) -> Self {
        ZMat { rows, cols, a: vec![Z::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.set(i, i, Z::one());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Z) -> Self {
        let mut m = Self::zero(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, i: usize, j: usize) -> &Z {
        &self.a[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Z) {
        self.a[i * self.cols + j] = v;
    }

    pub fn to_qmat(&self) -> QMat {
        QMat::from_fn(self.rows, self.cols, |i, j| Q::from_integer(self.at(i, j).clone()))
    }
}

/// Smith normal form of an integer matrix: returns the invariant factors
/// (nonnegative, each dividing the next, zeros trailing) together with the
/// inverse row transform. With row ops tracked as A -> E A, we accumulate
/// U^-1 so that A = uinv * D * vinv; `uinv` is what discriminant-group
/// generator extraction needs.
pub struct Snf {
    pub diag: Vec<Z>,
    pub uinv: ZMat,
}

pub fn smith_normal_form(a0: &ZMat) -> Snf {
    let (rows, cols) = (a0.rows(), a0.cols());
    let mut a = a0.clone();
    let mut uinv = ZMat::identity(rows);

    // row op: row_i -= k*row_j on `a`  =>  col_j += k*col_i on uinv
    fn row_sub(a: &mut ZMat, uinv: &mut ZMat, i: usize, j: usize, k: &Z) {
        for c in 0..a.cols() {
            let v = a.at(i, c) - k * a.at(j, c);
            a.set(i, c, v);
        }
        for r in 0..uinv.rows() {
            let v = uinv.at(r, j) + k * uinv.at(r, i);
            uinv.set(r, j, v);
        }
    }
    fn row_swap(a: &mut ZMat, uinv: &mut ZMat, i: usize, j: usize) {
        for c in 0..a.cols() {
            let (x, y) = (a.at(i, c).clone(), a.at(j, c).clone());
            a.set(i, c, y);
            a.set(j, c, x);
        }
        for r in 0..uinv.rows() {
            let (x, y) = (uinv.at(r, i).clone(), uinv.at(r, j).clone());
            uinv.set(r, i, y);
            uinv.set(r, j, x);
        }
    }
    fn row_neg(a: &mut ZMat, uinv: &mut ZMat, i: usize) {
        for c in 0..a.cols() {
            let v = -a.at(i, c);
            a.set(i, c, v);
        }
        for r in 0..uinv.rows() {
            let v = -uinv.at(r, i);
            uinv.set(r, i, v);
        }
    }
    fn col_sub(a: &mut ZMat, i: usize, j: usize, k: &Z) {
        for r in 0..a.rows() {
            let v = a.at(r, i) - k * a.at(r, j);
            a.set(r, i, v);
        }
    }
    fn col_swap(a: &mut ZMat, i: usize, j: usize) {
        for r in 0..a.rows() {
            let (x, y) = (a.at(r, i).clone(), a.at(r, j).clone());
            a.set(r, i, y);
            a.set(r, j, x);
        }
    }

    let t_max = rows.min(cols);
    let mut t = 0;
    while t < t_max {
        // locate minimal nonzero entry in the trailing submatrix
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if !a.at(i, j).is_zero()
                    && best
                        .map(|(bi, bj)| a.at(i, j).abs() < a.at(bi, bj).abs())
                        .unwrap_or(true)
                {
                    best = Some((i, j));
                }
            }
        }
        let (bi, bj) = match best {
            Some(b) => b,
            None => break, // all zero: done
        };
        if bi != t {
            row_swap(&mut a, &mut uinv, t, bi);
        }
        if bj != t {
            col_swap(&mut a, t, bj);
        }
        if a.at(t, t).is_negative() {
            row_neg(&mut a, &mut uinv, t);
        }

        // clear row and column by Euclidean steps
        let mut dirty = false;
        for i in t + 1..rows {
            if !a.at(i, t).is_zero() {
                let k = a.at(i, t).div_floor(a.at(t, t));
                row_sub(&mut a, &mut uinv, i, t, &k);
                if !a.at(i, t).is_zero() {
                    dirty = true;
                }
            }
        }
        for j in t + 1..cols {
            if !a.at(t, j).is_zero() {
                let k = a.at(t, j).div_floor(a.at(t, t));
                col_sub(&mut a, j, t, &k);
                if !a.at(t, j).is_zero() {
                    dirty = true;
                }
            }
        }
        if dirty {
            continue; // smaller remainder appeared; re-pivot
        }

        // pivot must divide the remaining submatrix for the invariant-factor
        // chain; if not, fold the offending row in and restart this pivot
        let mut fixed = true;
        'check: for i in t + 1..rows {
            for j in t + 1..cols {
                if !(a.at(i, j) % a.at(t, t)).is_zero() {
                    let one = Z::one();
                    let k = -&one;
                    row_sub(&mut a, &mut uinv, t, i, &k); // row_t += row_i
                    fixed = false;
                    break 'check;
                }
            }
        }
        if fixed {
            t += 1;
        }
    }

    let diag = (0..t_max).map(|i| a.at(i, i).clone()).collect();
    Snf { diag, uinv }
}

/// Elementary divisors of an integer matrix (the nonzero Smith diagonal).
pub fn elementary_divisors(m: &ZMat) -> Vec<Z> {
    smith_normal_form(m).diag.into_iter().filter(|d| !d.is_zero()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qm(rows: &[&[i64]]) -> QMat {
        QMat::from_rows(rows.iter().map(|r| r.iter().map(|&x| qz(x)).collect()).collect())
    }

    #[test]
    fn inverse_roundtrip() {
        let m = qm(&[&[2, 1], &[1, 2]]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), QMat::identity(2));
        assert_eq!(m.det(), qz(3));
    }

    #[test]
    fn singular_has_no_inverse() {
        let m = qm(&[&[1, 2], &[2, 4]]);
        assert!(m.inverse().is_none());
        assert_eq!(m.det(), qz(0));
        assert_eq!(m.rank(), 1);
    }

    #[test]
    fn inertia_hyperbolic_plane() {
        let h = qm(&[&[0, 1], &[1, 0]]);
        assert_eq!(inertia(&h), (1, 1, 0));
        assert!(!is_psd(&h));
    }

    #[test]
    fn inertia_mixed() {
        let g = qm(&[&[2, 0, 0], &[0, -2, 0], &[0, 0, 0]]);
        assert_eq!(inertia(&g), (1, 1, 1));
        let g = qm(&[&[2, 1], &[1, 2]]);
        assert_eq!(inertia(&g), (2, 0, 0));
        assert!(is_positive_definite(&g));
    }

    #[test]
    fn psd_degenerate() {
        let g = qm(&[&[1, 1], &[1, 1]]);
        assert_eq!(inertia(&g), (1, 0, 1));
        assert!(is_psd(&g));
        assert!(!is_positive_definite(&g));
    }

    #[test]
    fn ldlt_reconstructs() {
        let g = qm(&[&[2, 1, 0], &[1, 2, 1], &[0, 1, 2]]);
        let (l, d) = ldlt_pd(&g).unwrap();
        let mut dm = QMat::zero(3, 3);
        for i in 0..3 {
            dm.set(i, i, d[i].clone());
        }
        assert_eq!(l.mul(&dm).mul(&l.transpose()), g);
    }

    #[test]
    fn ldlt_rejects_indefinite() {
        let h = qm(&[&[0, 1], &[1, 0]]);
        assert!(ldlt_pd(&h).is_err());
    }

    #[test]
    fn bareiss_det() {
        let m = IMat::from_rows(vec![vec![2, 1], vec![1, 2]]);
        assert_eq!(m.det(), 3);
        let m = IMat::from_rows(vec![vec![0, 1], vec![1, 0]]);
        assert_eq!(m.det(), -1);
    }

    #[test]
    fn smith_form_basic() {
        // diag(2,6) has factors 2 | 6; a classic non-diagonal example too.
        let m = IMat::from_rows(vec![vec![2, 0], vec![0, 6]]).to_zmat();
        let s = smith_normal_form(&m);
        assert_eq!(s.diag, vec![Z::from(2), Z::from(6)]);

        let m = IMat::from_rows(vec![vec![2, 4, 4], vec![-6, 6, 12], vec![10, 4, 16]]).to_zmat();
        let s = smith_normal_form(&m);
        assert_eq!(s.diag, vec![Z::from(2), Z::from(2), Z::from(156)]);
    }

    #[test]
    fn smith_divisibility_chain() {
        let m = IMat::from_rows(vec![vec![4, 0], vec![0, 6]]).to_zmat();
        let s = smith_normal_form(&m);
        assert_eq!(s.diag, vec![Z::from(2), Z::from(12)]);
    }

    #[test]
    fn smith_uinv_consistency() {
        // A = uinv * D * vinv for some unimodular vinv; check columns of
        // uinv*D generate the same column lattice as A by elementary divisors.
        let a = IMat::from_rows(vec![vec![0, 1], vec![1, 0]]).to_zmat();
        let s = smith_normal_form(&a);
        assert_eq!(s.diag, vec![Z::one(), Z::one()]);
    }

    #[test]
    fn rectangular_divisors() {
        // primitive embedding matrix: all divisors 1
        let m = IMat::from_rows(vec![vec![1, 0], vec![0, 2], vec![0, 1]]).to_zmat();
        assert_eq!(elementary_divisors(&m), vec![Z::one(), Z::one()]);
        // imprimitive: divisor 2
        let m = IMat::from_rows(vec![vec![1, 0], vec![0, 2], vec![0, 0]]).to_zmat();
        assert_eq!(elementary_divisors(&m), vec![Z::one(), Z::from(2)]);
    }

    #[test]
    fn parse_and_format_rationals() {
        assert_eq!(parse_q("3/4").unwrap(), qq(3, 4));
        assert_eq!(parse_q("-7").unwrap(), qz(-7));
        assert_eq!(fmt_q(&qq(6, 8)), "3/4");
        assert_eq!(fmt_q(&qz(5)), "5");
        assert!(parse_q("1/0").is_err());
        assert!(parse_q("x").is_err());
    }
}
