//! Exact arithmetic in cyclotomic fields Q(zeta_n).
//!
//! Elements are polynomials in zeta_n of degree < phi(n) with rational
//! coefficients, reduced mod the cyclotomic polynomial. Field data (the
//! minimal polynomial and a full table of reduced powers zeta^k for k < n)
//! is cached per conductor behind a global lock; conductors in this crate
//! stay small (lcm of 8, the lattice level, and 4|D|), so the tables are a
//! few dozen short vectors.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use num_complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};
use once_cell::sync::Lazy;

use crate::mat::{Q, Z};
use crate::{Error, Result};

struct FieldData {
    n: u64,
    degree: usize,
    /// zeta^k in the power basis, for every k in 0..n
    zeta_pows: Vec<Vec<Q>>,
}

static FIELDS: Lazy<RwLock<HashMap<u64, Arc<FieldData>>>> =
    Lazy::new(|| RwLock::new(HashMap::new()));

fn euler_phi(mut n: u64) -> u64 {
    let mut result = n;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}

/// Cyclotomic polynomial over Z via the recursion
/// x^n - 1 = prod_{d | n} Phi_d(x), computed by exact division.
fn cyclotomic_poly(n: u64) -> Vec<Z> {
    fn poly_div_exact(num: &[Z], den: &[Z]) -> Vec<Z> {
        // num, den monic-leading (den leading coeff is 1 or -1 for these inputs)
        let mut rem: Vec<Z> = num.to_vec();
        let dlead = den.last().unwrap().clone();
        let dn = den.len() - 1;
        let qn = rem.len() - 1 - dn;
        let mut quot = vec![Z::zero(); qn + 1];
        for k in (0..=qn).rev() {
            let c = &rem[k + dn] / &dlead;
            quot[k] = c.clone();
            for i in 0..=dn {
                let t = &den[i] * &c;
                rem[k + i] -= t;
            }
        }
        assert!(rem.iter().all(|c| c.is_zero()), "cyclotomic division must be exact");
        quot
    }
    if n == 1 {
        return vec![-Z::one(), Z::one()]; // x - 1
    }
    let mut num = vec![Z::zero(); n as usize + 1];
    num[0] = -Z::one();
    num[n as usize] = Z::one();
    let mut acc = vec![Z::one()]; // product of proper divisors' polynomials
    for d in 1..n {
        if n % d == 0 {
            let phi_d = cyclotomic_poly(d);
            // multiply acc by phi_d
            let mut next = vec![Z::zero(); acc.len() + phi_d.len() - 1];
            for (i, a) in acc.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                for (j, b) in phi_d.iter().enumerate() {
                    next[i + j] += a * b;
                }
            }
            acc = next;
        }
    }
    poly_div_exact(&num, &acc)
}

fn field_data(n: u64) -> Arc<FieldData> {
    if let Some(d) = FIELDS.read().unwrap().get(&n) {
        return d.clone();
    }
    let degree = euler_phi(n) as usize;
    let minpoly: Vec<Q> = cyclotomic_poly(n).into_iter().map(Q::from).collect();
    assert_eq!(minpoly.len(), degree + 1);
    // powers of zeta reduced mod the minimal polynomial
    let mut zeta_pows: Vec<Vec<Q>> = Vec::with_capacity(n as usize);
    let mut cur = vec![Q::zero(); degree];
    cur[0] = Q::one();
    zeta_pows.push(cur.clone());
    for _ in 1..n {
        // multiply by x
        let lead = cur[degree - 1].clone();
        for i in (1..degree).rev() {
            cur[i] = cur[i - 1].clone();
        }
        cur[0] = Q::zero();
        if !lead.is_zero() {
            for i in 0..degree {
                let t = &minpoly[i] * &lead;
                cur[i] -= t;
            }
        }
        zeta_pows.push(cur.clone());
    }
    let data = Arc::new(FieldData { n, degree, zeta_pows });
    FIELDS.write().unwrap().insert(n, data.clone());
    data
}

/// An element of Q(zeta_n) in the power basis 1, zeta, ..., zeta^(phi(n)-1).
#[derive(Clone, PartialEq, Eq)]
pub struct Cyclo {
    n: u64,
    coeffs: Vec<Q>,
}

impl fmt::Debug for Cyclo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                if i == 0 {
                    terms.push(format!("{}", c));
                } else if i == 1 {
                    terms.push(format!("{}*z", c));
                } else {
                    terms.push(format!("{}*z^{}", c, i));
                }
            }
        }
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{} (z = zeta_{})", terms.join(" + "), self.n)
        }
    }
}

impl Cyclo {
    pub fn zero(n: u64) -> Cyclo {
        let d = field_data(n);
        Cyclo { n, coeffs: vec![Q::zero(); d.degree] }
    }

    pub fn one(n: u64) -> Cyclo {
        let mut c = Cyclo::zero(n);
        c.coeffs[0] = Q::one();
        c
    }

    pub fn from_q(n: u64, q: Q) -> Cyclo {
        let mut c = Cyclo::zero(n);
        c.coeffs[0] = q;
        c
    }

    pub fn from_int(n: u64, k: i64) -> Cyclo {
        Cyclo::from_q(n, Q::from(Z::from(k)))
    }

    /// e^(2 pi i k / n), any integer k.
    pub fn zeta_pow(n: u64, k: i64) -> Cyclo {
        let d = field_data(n);
        let idx = k.rem_euclid(n as i64) as usize;
        Cyclo { n, coeffs: d.zeta_pows[idx].clone() }
    }

    /// e^(2 pi i r) for rational r; the denominator must divide n.
    pub fn e_frac(n: u64, r: &Q) -> Result<Cyclo> {
        let den = r.denom();
        let nz = Z::from(n);
        if !(&nz % den).is_zero() {
            return Err(Error::Unsupported(format!(
                "exponent denominator {} does not divide conductor {}",
                den, n
            )));
        }
        let mult = &nz / den;
        let k = (r.numer() * mult) % &nz;
        let k = k.to_i64().expect("reduced exponent fits");
        Ok(Cyclo::zeta_pow(n, k))
    }

    pub fn conductor(&self) -> u64 {
        self.n
    }

    /// Coordinates in the reduced power basis 1, zeta, ..., zeta^(phi(n)-1).
    pub fn power_basis_coeffs(&self) -> &[Q] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn is_rational(&self) -> Option<Q> {
        if self.coeffs[1..].iter().all(|c| c.is_zero()) {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    pub fn add(&self, other: &Cyclo) -> Cyclo {
        assert_eq!(self.n, other.n, "conductor mismatch");
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        Cyclo { n: self.n, coeffs }
    }

    pub fn sub(&self, other: &Cyclo) -> Cyclo {
        assert_eq!(self.n, other.n, "conductor mismatch");
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a - b)
            .collect();
        Cyclo { n: self.n, coeffs }
    }

    pub fn neg(&self) -> Cyclo {
        Cyclo { n: self.n, coeffs: self.coeffs.iter().map(|a| -a).collect() }
    }

    pub fn scale(&self, q: &Q) -> Cyclo {
        Cyclo { n: self.n, coeffs: self.coeffs.iter().map(|a| a * q).collect() }
    }

    pub fn mul(&self, other: &Cyclo) -> Cyclo {
        assert_eq!(self.n, other.n, "conductor mismatch");
        let d = field_data(self.n);
        let deg = d.degree;
        let mut prod = vec![Q::zero(); 2 * deg - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    prod[i + j] += a * b;
                }
            }
        }
        // fold high powers down with the reduced-powers table; indexing mod n
        // is sound because zeta^n = 1
        let mut out = prod[..deg].to_vec();
        for k in deg..prod.len() {
            if prod[k].is_zero() {
                continue;
            }
            let red = &d.zeta_pows[k % d.n as usize];
            for i in 0..deg {
                if !red[i].is_zero() {
                    out[i] += &prod[k] * &red[i];
                }
            }
        }
        Cyclo { n: self.n, coeffs: out }
    }

    pub fn pow(&self, mut e: u64) -> Cyclo {
        let mut base = self.clone();
        let mut acc = Cyclo::one(self.n);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Galois twist zeta -> zeta^k for gcd(k, n) = 1.
    pub fn galois(&self, k: u64) -> Cyclo {
        assert_eq!(
            num_integer::gcd(k % self.n, self.n),
            1,
            "galois exponent must be coprime to the conductor"
        );
        let d = field_data(self.n);
        let mut out = vec![Q::zero(); d.degree];
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let red = &d.zeta_pows[((j as u64 * k) % self.n) as usize];
            for i in 0..d.degree {
                if !red[i].is_zero() {
                    out[i] += c * &red[i];
                }
            }
        }
        Cyclo { n: self.n, coeffs: out }
    }

    /// Complex conjugation (zeta -> zeta^(n-1)).
    pub fn conj(&self) -> Cyclo {
        self.galois(self.n - 1)
    }

    pub fn inverse(&self) -> Option<Cyclo> {
        if self.is_zero() {
            return None;
        }
        // solve (mult-by-self matrix) * y = e_0 by Gaussian elimination
        let d = field_data(self.n);
        let deg = d.degree;
        let mut cols: Vec<Vec<Q>> = Vec::with_capacity(deg);
        let mut basis = Cyclo::one(self.n);
        for j in 0..deg {
            cols.push(self.mul(&basis).coeffs);
            if j + 1 < deg {
                basis = basis.mul(&Cyclo::zeta_pow(self.n, 1));
            }
        }
        // augmented system rows
        let mut a = vec![vec![Q::zero(); deg + 1]; deg];
        for i in 0..deg {
            for j in 0..deg {
                a[i][j] = cols[j][i].clone();
            }
        }
        a[0][deg] = Q::one();
        for c in 0..deg {
            let piv = (c..deg).find(|&r| !a[r][c].is_zero())?;
            a.swap(c, piv);
            let p = a[c][c].clone();
            for j in c..=deg {
                a[c][j] = &a[c][j] / &p;
            }
            for r in 0..deg {
                if r != c && !a[r][c].is_zero() {
                    let f = a[r][c].clone();
                    for j in c..=deg {
                        let t = &a[c][j] * &f;
                        a[r][j] -= t;
                    }
                }
            }
        }
        let coeffs: Vec<Q> = (0..deg).map(|i| a[i][deg].clone()).collect();
        let inv = Cyclo { n: self.n, coeffs };
        debug_assert_eq!(self.mul(&inv), Cyclo::one(self.n));
        Some(inv)
    }

    pub fn to_complex(&self) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let x = c.numer().to_f64().unwrap() / c.denom().to_f64().unwrap();
            let ang = 2.0 * std::f64::consts::PI * (j as f64) / (self.n as f64);
            acc += Complex64::new(x * ang.cos(), x * ang.sin());
        }
        acc
    }

    /// Lift into a larger conductor m (n must divide m).
    pub fn lift(&self, m: u64) -> Result<Cyclo> {
        if m == self.n {
            return Ok(self.clone());
        }
        if m % self.n != 0 {
            return Err(Error::Unsupported(format!(
                "cannot lift from conductor {} to {}",
                self.n, m
            )));
        }
        let stride = (m / self.n) as i64;
        let mut acc = Cyclo::zero(m);
        for (j, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                acc = acc.add(&Cyclo::zeta_pow(m, j as i64 * stride).scale(c));
            }
        }
        Ok(acc)
    }
}

/// Exact square root of a positive integer, assembled from quadratic Gauss
/// sums; the conductor must be divisible by 8 and by every odd prime whose
/// exponent in m is odd. The sign is pinned to the positive real root.
pub fn sqrt_int(n: u64, m: u64) -> Result<Cyclo> {
    assert!(m > 0);
    if n % 8 != 0 {
        return Err(Error::Unsupported(format!(
            "conductor {n} lacks the 8th roots of unity needed for square roots"
        )));
    }
    let mut acc = Cyclo::one(n);
    let mut rest = m;
    let mut p = 2u64;
    while p * p <= rest || (rest > 1 && p <= rest) {
        if rest % p == 0 {
            let mut e = 0u64;
            while rest % p == 0 {
                rest /= p;
                e += 1;
            }
            // p^(e/2) outright, one loose factor of sqrt(p) if e is odd
            let whole = p.pow((e / 2) as u32) as i64;
            acc = acc.scale(&Q::from(Z::from(whole)));
            if e % 2 == 1 {
                acc = acc.mul(&sqrt_prime(n, p)?);
            }
        }
        p += 1;
        if rest == 1 {
            break;
        }
    }
    // exact square check plus a numeric sign check
    let sq = acc.mul(&acc);
    if sq.is_rational() != Some(Q::from(Z::from(m))) {
        return Err(Error::Verify(format!("square-root square check failed for {m}")));
    }
    if acc.to_complex().re < 0.0 {
        return Err(Error::Verify(format!("square root of {m} landed on the wrong branch")));
    }
    Ok(acc)
}

fn sqrt_prime(n: u64, p: u64) -> Result<Cyclo> {
    if p == 2 {
        // zeta_8 + zeta_8^-1 = sqrt(2)
        let k = (n / 8) as i64;
        return Ok(Cyclo::zeta_pow(n, k).add(&Cyclo::zeta_pow(n, -k)));
    }
    if n % p != 0 {
        return Err(Error::Unsupported(format!(
            "conductor {n} has no {p}-th roots of unity for sqrt({p})"
        )));
    }
    // Gauss sum: sum_a zeta_p^(a^2) equals sqrt(p) or i*sqrt(p)
    let stride = (n / p) as i64;
    let mut g = Cyclo::zero(n);
    for a in 0..p {
        let e = ((a * a) % p) as i64 * stride;
        g = g.add(&Cyclo::zeta_pow(n, e));
    }
    if p % 4 == 1 {
        Ok(g)
    } else {
        // g = i*sqrt(p); multiply by -i = zeta_4^-1
        let minus_i = Cyclo::zeta_pow(n, -((n / 4) as i64));
        Ok(g.mul(&minus_i))
    }
}

/// Dense matrix over a cyclotomic field.
#[derive(Clone, PartialEq, Eq)]
pub struct CMat {
    pub rows: usize,
    pub cols: usize,
    a: Vec<Cyclo>,
}

impl fmt::Debug for CMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                write!(f, "{:?}  ", self.at(i, j))?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl CMat {
    pub fn zero(n: u64, rows: usize, cols: usize) -> CMat {
        CMat { rows, cols, a: vec![Cyclo::zero(n); rows * cols] }
    }

    pub fn identity(n: u64, dim: usize) -> CMat {
        let mut m = CMat::zero(n, dim, dim);
        for i in 0..dim {
            m.set(i, i, Cyclo::one(n));
        }
        m
    }

    pub fn at(&self, i: usize, j: usize) -> &Cyclo {
        &self.a[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Cyclo) {
        self.a[i * self.cols + j] = v;
    }

    pub fn mul(&self, other: &CMat) -> CMat {
        assert_eq!(self.cols, other.rows);
        let n = self.a[0].conductor();
        let mut out = CMat::zero(n, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                if self.at(i, k).is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    if !other.at(k, j).is_zero() {
                        let t = self.at(i, k).mul(other.at(k, j));
                        let cur = out.at(i, j).add(&t);
                        out.set(i, j, cur);
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Cyclo]) -> Vec<Cyclo> {
        assert_eq!(self.cols, v.len());
        let n = self.a[0].conductor();
        (0..self.rows)
            .map(|i| {
                let mut acc = Cyclo::zero(n);
                for k in 0..self.cols {
                    if !self.at(i, k).is_zero() && !v[k].is_zero() {
                        acc = acc.add(&self.at(i, k).mul(&v[k]));
                    }
                }
                acc
            })
            .collect()
    }

    pub fn scale(&self, c: &Cyclo) -> CMat {
        let mut out = self.clone();
        for x in out.a.iter_mut() {
            *x = x.mul(c);
        }
        out
    }

    pub fn transpose(&self) -> CMat {
        let n = self.a[0].conductor();
        let mut out = CMat::zero(n, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.at(i, j).clone());
            }
        }
        out
    }

    pub fn conj_transpose(&self) -> CMat {
        let n = self.a[0].conductor();
        let mut out = CMat::zero(n, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.at(i, j).conj());
            }
        }
        out
    }

    pub fn entrywise_conj(&self) -> CMat {
        let mut out = self.clone();
        for x in out.a.iter_mut() {
            *x = x.conj();
        }
        out
    }

    pub fn inverse(&self) -> Option<CMat> {
        assert_eq!(self.rows, self.cols);
        let dim = self.rows;
        let n = self.a[0].conductor();
        let mut a = self.clone();
        let mut inv = CMat::identity(n, dim);
        for c in 0..dim {
            let piv = (c..dim).find(|&r| !a.at(r, c).is_zero())?;
            if piv != c {
                for j in 0..dim {
                    let (x, y) = (a.at(c, j).clone(), a.at(piv, j).clone());
                    a.set(c, j, y);
                    a.set(piv, j, x);
                    let (x, y) = (inv.at(c, j).clone(), inv.at(piv, j).clone());
                    inv.set(c, j, y);
                    inv.set(piv, j, x);
                }
            }
            let pinv = a.at(c, c).inverse()?;
            for j in 0..dim {
                a.set(c, j, a.at(c, j).mul(&pinv));
                inv.set(c, j, inv.at(c, j).mul(&pinv));
            }
            for r in 0..dim {
                if r != c && !a.at(r, c).is_zero() {
                    let f = a.at(r, c).clone();
                    for j in 0..dim {
                        let t = a.at(c, j).mul(&f);
                        a.set(r, j, a.at(r, j).sub(&t));
                        let t = inv.at(c, j).mul(&f);
                        inv.set(r, j, inv.at(r, j).sub(&t));
                    }
                }
            }
        }
        Some(inv)
    }

    pub fn is_identity(&self) -> bool {
        if self.rows != self.cols {
            return false;
        }
        let n = self.a[0].conductor();
        let one = Cyclo::one(n);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let want_one = i == j;
                if want_one && self.at(i, j) != &one {
                    return false;
                }
                if !want_one && !self.at(i, j).is_zero() {
                    return false;
                }
            }
        }
        true
    }

    /// If the matrix is c * I, return c.
    pub fn scalar_of(&self) -> Option<Cyclo> {
        if self.rows != self.cols || self.rows == 0 {
            return None;
        }
        let c = self.at(0, 0).clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                if i == j {
                    if self.at(i, j) != &c {
                        return None;
                    }
                } else if !self.at(i, j).is_zero() {
                    return None;
                }
            }
        }
        Some(c)
    }

    pub fn to_complex(&self) -> Vec<Vec<Complex64>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.at(i, j).to_complex()).collect())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat::qq;

    #[test]
    fn cyclotomic_polys() {
        assert_eq!(cyclotomic_poly(1), vec![Z::from(-1), Z::from(1)]);
        assert_eq!(cyclotomic_poly(2), vec![Z::from(1), Z::from(1)]);
        assert_eq!(cyclotomic_poly(4), vec![Z::from(1), Z::from(0), Z::from(1)]);
        assert_eq!(
            cyclotomic_poly(8),
            vec![Z::from(1), Z::from(0), Z::from(0), Z::from(0), Z::from(1)]
        );
        // Phi_12 = x^4 - x^2 + 1
        assert_eq!(
            cyclotomic_poly(12),
            vec![Z::from(1), Z::from(0), Z::from(-1), Z::from(0), Z::from(1)]
        );
    }

    #[test]
    fn zeta8_arithmetic() {
        let z = Cyclo::zeta_pow(8, 1);
        assert_eq!(z.pow(8), Cyclo::one(8));
        assert_eq!(z.pow(4), Cyclo::from_int(8, -1));
        // zeta_8^2 = i, and i^2 = -1
        let i = z.pow(2);
        assert_eq!(i.mul(&i), Cyclo::from_int(8, -1));
        // conjugation sends i to -i
        assert_eq!(i.conj(), i.neg());
    }

    #[test]
    fn e_frac_matches_zeta() {
        let a = Cyclo::e_frac(8, &qq(3, 8)).unwrap();
        assert_eq!(a, Cyclo::zeta_pow(8, 3));
        let b = Cyclo::e_frac(8, &qq(-1, 4)).unwrap();
        assert_eq!(b, Cyclo::zeta_pow(8, -2));
        assert!(Cyclo::e_frac(8, &qq(1, 3)).is_err());
    }

    #[test]
    fn inverse_roundtrip() {
        let x = Cyclo::zeta_pow(8, 1)
            .scale(&qq(2, 3))
            .add(&Cyclo::from_int(8, 5));
        let xi = x.inverse().unwrap();
        assert_eq!(x.mul(&xi), Cyclo::one(8));
        assert!(Cyclo::zero(8).inverse().is_none());
    }

    #[test]
    fn sqrt2_exact() {
        let s = sqrt_int(8, 2).unwrap();
        assert_eq!(s.mul(&s), Cyclo::from_int(8, 2));
        assert!((s.to_complex().re - 2.0_f64.sqrt()).abs() < 1e-12);
        assert!(s.to_complex().im.abs() < 1e-12);
    }

    #[test]
    fn sqrt_odd_primes() {
        for (n, m) in [(24u64, 3u64), (40, 5), (56, 7), (24, 12), (120, 15)] {
            let s = sqrt_int(n, m).unwrap();
            assert_eq!(s.mul(&s), Cyclo::from_int(n, m as i64), "m = {m}");
            let c = s.to_complex();
            assert!((c.re - (m as f64).sqrt()).abs() < 1e-9, "m = {m}");
            assert!(c.im.abs() < 1e-9);
        }
        // perfect square needs no extra roots
        let s = sqrt_int(8, 4).unwrap();
        assert_eq!(s, Cyclo::from_int(8, 2));
    }

    #[test]
    fn galois_permutes_roots() {
        let z = Cyclo::zeta_pow(16, 1);
        let g = z.galois(3);
        assert_eq!(g, Cyclo::zeta_pow(16, 3));
        // norm-like product over a full orbit lands in Q
        let x = z.add(&Cyclo::from_int(16, 2));
        let mut prod = Cyclo::one(16);
        for k in [1u64, 3, 5, 7, 9, 11, 13, 15] {
            prod = prod.mul(&x.galois(k));
        }
        assert!(prod.is_rational().is_some());
    }

    #[test]
    fn lift_conductor() {
        let a = Cyclo::zeta_pow(8, 1).lift(24).unwrap();
        assert_eq!(a, Cyclo::zeta_pow(24, 3));
        let b = Cyclo::from_int(8, 7).lift(24).unwrap();
        assert_eq!(b.is_rational(), Some(Q::from(Z::from(7))));
    }

    #[test]
    fn cmat_inverse() {
        let n = 8;
        let mut m = CMat::zero(n, 2, 2);
        m.set(0, 0, Cyclo::one(n));
        m.set(0, 1, Cyclo::zeta_pow(n, 1));
        m.set(1, 0, Cyclo::zeta_pow(n, 3));
        m.set(1, 1, Cyclo::from_int(n, 2));
        let mi = m.inverse().unwrap();
        assert!(m.mul(&mi).is_identity());
        assert!(mi.mul(&m).is_identity());
    }

    #[test]
    fn cmat_scalar_detection() {
        let n = 8;
        let i = Cyclo::zeta_pow(n, 2);
        let m = CMat::identity(n, 3).scale(&i);
        assert_eq!(m.scalar_of(), Some(i));
        let mut m2 = CMat::identity(n, 2);
        m2.set(0, 1, Cyclo::one(n));
        assert_eq!(m2.scalar_of(), None);
    }
}
