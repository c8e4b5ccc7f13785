//! Even integral lattices presented by a bilinear Gram matrix.
//!
//! Conventions: the Gram stores the bilinear pairing [x,y], so diagonals are
//! even and Q(x) = [x,x]/2. The dual L' sits inside L (x) Q via G^-1, and the
//! discriminant group L'/L is computed from the Smith form of G. Coset
//! representatives are normalized into the half-open box [0,1)^rank in
//! lattice coordinates, which makes them canonical and hashable.

use std::collections::HashMap;

use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::mat::{self, qz, IMat, QMat, Q, Z};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadLattice {
    gram: IMat,
    name: Option<String>,
}

impl QuadLattice {
    pub fn new(gram: IMat) -> Result<Self> {
        if !gram.is_symmetric() {
            return Err(Error::NotSymmetric);
        }
        for i in 0..gram.rows() {
            if gram.at(i, i).rem_euclid(2) != 0 {
                return Err(Error::OddDiagonal(i));
            }
        }
        if gram.rows() > 0 && gram.det() == 0 {
            return Err(Error::Degenerate);
        }
        Ok(QuadLattice { gram, name: None })
    }

    pub fn named(gram: IMat, name: &str) -> Result<Self> {
        let mut l = Self::new(gram)?;
        l.name = Some(name.to_string());
        Ok(l)
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn rank(&self) -> usize {
        self.gram.rows()
    }

    pub fn gram(&self) -> &IMat {
        &self.gram
    }

    pub fn det(&self) -> i128 {
        self.gram.det()
    }

    /// Q(x) = [x,x]/2 for an integer lattice vector; always an integer.
    pub fn quadratic_value_int(&self, x: &[i64]) -> i64 {
        let gx = self.gram.mul_vec(x);
        let two_q: i64 = x
            .iter()
            .zip(&gx)
            .map(|(a, b)| a.checked_mul(*b).expect("overflow"))
            .fold(0i64, |acc, t| acc.checked_add(t).expect("overflow"));
        debug_assert!(two_q % 2 == 0);
        two_q / 2
    }

    pub fn bilinear_value_int(&self, x: &[i64], y: &[i64]) -> i64 {
        let gy = self.gram.mul_vec(y);
        x.iter()
            .zip(&gy)
            .map(|(a, b)| a.checked_mul(*b).expect("overflow"))
            .fold(0i64, |acc, t| acc.checked_add(t).expect("overflow"))
    }

    /// Q extended to L (x) Q (rational coordinates).
    pub fn quadratic_value(&self, x: &[Q]) -> Q {
        self.bilinear_value(x, x) / qz(2)
    }

    pub fn bilinear_value(&self, x: &[Q], y: &[Q]) -> Q {
        assert_eq!(x.len(), self.rank());
        assert_eq!(y.len(), self.rank());
        let g = &self.gram;
        let mut acc = Q::zero();
        for i in 0..x.len() {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..y.len() {
                let gij = g.at(i, j);
                if gij != 0 && !y[j].is_zero() {
                    acc += &x[i] * &y[j] * qz(gij);
                }
            }
        }
        acc
    }

    pub fn signature(&self) -> (usize, usize) {
        let (p, n, z) = mat::inertia(&self.gram.to_qmat());
        debug_assert_eq!(z, 0);
        (p, n)
    }

    pub fn is_positive_definite(&self) -> bool {
        self.signature() == (self.rank(), 0)
    }

    pub fn is_selfdual(&self) -> bool {
        let d = self.det();
        d == 1 || d == -1
    }

    pub fn direct_sum(&self, other: &QuadLattice) -> QuadLattice {
        let gram = IMat::block_diag(&[&self.gram, &other.gram]);
        let name = match (&self.name, &other.name) {
            (Some(a), Some(b)) => Some(format!("{a}+{b}")),
            _ => None,
        };
        QuadLattice { gram, name }
    }

    pub fn discriminant_form(&self) -> DiscriminantForm {
        DiscriminantForm::new(self)
    }

    /// Smallest positive integer N with N * Q(v) integral for every dual
    /// vector v (computed over all discriminant cosets).
    pub fn level(&self) -> i64 {
        let disc = self.discriminant_form();
        let mut lev = Z::one();
        for idx in 0..disc.order() {
            lev = lev.lcm(disc.q_value(idx).denom());
        }
        lev.to_i64().expect("level overflow")
    }

    /// True when no integral overlattice exists at p: every nonzero p-torsion
    /// coset mu of the discriminant group must have q(mu) != 0 in Q/Z, since
    /// adjoining a representative of such a mu with q(mu) = 0 is exactly an
    /// integral index-p enlargement, and any integral enlargement contains one.
    pub fn is_maximal_at(&self, p: u64) -> Result<bool> {
        require_prime(p)?;
        let disc = self.discriminant_form();
        for idx in disc.torsion(p) {
            if idx != disc.zero() && disc.q_value(idx).is_zero() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Self-dual at p, or the odd-rank 2-adic case where the discriminant
    /// group has 2-part of order exactly 2.
    pub fn is_hyperspecial_at(&self, p: u64) -> Result<bool> {
        require_prime(p)?;
        let d = self.det().unsigned_abs();
        let mut ord = 0u32;
        let mut m = d;
        while m % (p as u128) == 0 {
            ord += 1;
            m /= p as u128;
        }
        if ord == 0 {
            return Ok(true);
        }
        Ok(p == 2 && self.rank() % 2 == 1 && ord == 1)
    }
}

pub fn require_prime(p: u64) -> Result<()> {
    if p < 2 {
        return Err(Error::NotPrime(p));
    }
    let mut k = 2u64;
    while k * k <= p {
        if p % k == 0 {
            return Err(Error::NotPrime(p));
        }
        k += 1;
    }
    Ok(())
}

/// The finite quadratic module L'/L: invariant factors, canonical coset
/// representatives, and the induced Q/Z-valued quadratic and bilinear forms.
/// Elements are referred to by index into a deterministic (lexicographic)
/// list of normalized representatives.
#[derive(Clone, Debug)]
pub struct DiscriminantForm {
    rank: usize,
    gram: IMat,
    invariant_factors: Vec<u64>,
    generators: Vec<Vec<Q>>,
    elements: Vec<Vec<Q>>,
    index: HashMap<Vec<Q>, usize>,
    q_vals: Vec<Q>,
    orders: Vec<u64>,
}

impl DiscriminantForm {
    fn new(lat: &QuadLattice) -> Self {
        let n = lat.rank();
        let g = lat.gram();
        let snf = mat::smith_normal_form(&g.to_zmat());
        let ginv = g.to_qmat().inverse().expect("nondegenerate");

        let mut invariant_factors = Vec::new();
        let mut generators = Vec::new();
        for (i, d) in snf.diag.iter().enumerate() {
            let d = d.to_u64().expect("factor overflow");
            assert!(d >= 1, "nondegenerate lattice has no zero factors");
            if d == 1 {
                continue;
            }
            invariant_factors.push(d);
            // generator: G^-1 * (column i of U^-1), normalized into [0,1)^n
            let col: Vec<Q> =
                (0..n).map(|r| Q::from_integer(snf.uinv.at(r, i).clone())).collect();
            generators.push(normalize_box(&ginv.mul_vec(&col)));
        }

        // enumerate the whole group through the generator tuple
        let mut elements: Vec<Vec<Q>> = Vec::new();
        let mut counters = vec![0u64; invariant_factors.len()];
        loop {
            let mut coords = vec![Q::zero(); n];
            for (k, &c) in counters.iter().enumerate() {
                for (x, gk) in coords.iter_mut().zip(&generators[k]) {
                    *x += qz(c as i64) * gk;
                }
            }
            elements.push(normalize_box(&coords));
            // odometer
            let mut k = 0;
            loop {
                if k == counters.len() {
                    break;
                }
                counters[k] += 1;
                if counters[k] < invariant_factors[k] {
                    break;
                }
                counters[k] = 0;
                k += 1;
            }
            if counters.iter().all(|&c| c == 0) {
                break;
            }
        }
        elements.sort();
        elements.dedup();
        let expected: u64 = invariant_factors.iter().product();
        assert_eq!(elements.len() as u64, expected, "group enumeration mismatch");

        let index: HashMap<Vec<Q>, usize> =
            elements.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        let q_vals: Vec<Q> =
            elements.iter().map(|e| frac_part(&lat.quadratic_value(e))).collect();
        let orders: Vec<u64> = elements
            .iter()
            .map(|e| {
                e.iter()
                    .fold(Z::one(), |acc, x| acc.lcm(x.denom()))
                    .to_u64()
                    .expect("order overflow")
            })
            .collect();

        DiscriminantForm {
            rank: n,
            gram: g.clone(),
            invariant_factors,
            generators,
            elements,
            index,
            q_vals,
            orders,
        }
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    /// Minimal number of generators.
    pub fn gamma(&self) -> usize {
        self.invariant_factors.len()
    }

    pub fn invariant_factors(&self) -> &[u64] {
        &self.invariant_factors
    }

    pub fn generators(&self) -> &[Vec<Q>] {
        &self.generators
    }

    /// Normalized representative in lattice coordinates, each entry in [0,1).
    pub fn rep(&self, idx: usize) -> &[Q] {
        &self.elements[idx]
    }

    pub fn zero(&self) -> usize {
        *self.index.get(&vec![Q::zero(); self.rank]).expect("zero coset present")
    }

    /// Index of the coset of an arbitrary dual vector (lattice coordinates).
    /// Errors if the vector does not pair integrally with the lattice.
    pub fn index_of(&self, coords: &[Q]) -> Result<usize> {
        if coords.len() != self.rank {
            return Err(Error::Dimension(format!(
                "coset vector has {} coordinates, lattice rank is {}",
                coords.len(),
                self.rank
            )));
        }
        let norm = normalize_box(coords);
        self.index.get(&norm).copied().ok_or_else(|| {
            Error::Parse(format!(
                "[{}] is not a dual vector for this lattice",
                norm.iter().map(mat::fmt_q).collect::<Vec<_>>().join(", ")
            ))
        })
    }

    /// q(mu) in [0,1) as a rational.
    pub fn q_value(&self, idx: usize) -> &Q {
        &self.q_vals[idx]
    }

    /// b(mu, nu) in [0,1): the bilinear pairing mod Z.
    pub fn b_value(&self, i: usize, j: usize) -> Q {
        let g = &self.gram;
        let (x, y) = (&self.elements[i], &self.elements[j]);
        let mut acc = Q::zero();
        for r in 0..self.rank {
            if x[r].is_zero() {
                continue;
            }
            for c in 0..self.rank {
                let grc = g.at(r, c);
                if grc != 0 && !y[c].is_zero() {
                    acc += &x[r] * &y[c] * qz(grc);
                }
            }
        }
        frac_part(&acc)
    }

    pub fn add(&self, i: usize, j: usize) -> usize {
        let coords: Vec<Q> =
            self.elements[i].iter().zip(&self.elements[j]).map(|(a, b)| a + b).collect();
        self.index[&normalize_box(&coords)]
    }

    pub fn neg(&self, i: usize) -> usize {
        let coords: Vec<Q> = self.elements[i].iter().map(|a| -a).collect();
        self.index[&normalize_box(&coords)]
    }

    pub fn scalar_mul(&self, k: i64, i: usize) -> usize {
        let coords: Vec<Q> = self.elements[i].iter().map(|a| a * qz(k)).collect();
        self.index[&normalize_box(&coords)]
    }

    pub fn element_order(&self, idx: usize) -> u64 {
        self.orders[idx]
    }

    /// Indices of elements killed by n.
    pub fn torsion(&self, n: u64) -> Vec<usize> {
        (0..self.order()).filter(|&i| n % self.orders[i] == 0).collect()
    }

    /// Exponent of the group (lcm of element orders; 1 for the trivial group).
    pub fn exponent(&self) -> u64 {
        self.orders.iter().fold(1u64, |acc, &o| acc.lcm(&o))
    }
}

/// Reduce each coordinate into [0,1).
pub fn normalize_box(coords: &[Q]) -> Vec<Q> {
    coords.iter().map(frac_part).collect()
}

pub fn frac_part(x: &Q) -> Q {
    x - x.floor()
}

/// Moment matrix of a tuple: entries [x_i, x_j]/2, so diagonals are the
/// quadratic values. Exact, symmetric; positive semidefinite for real tuples.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MomentMatrix {
    m: QMat,
}

impl MomentMatrix {
    pub fn new(m: QMat) -> Result<Self> {
        if !m.is_symmetric() {
            return Err(Error::NotSymmetric);
        }
        Ok(MomentMatrix { m })
    }

    pub fn of_tuple(lat: &QuadLattice, tuple: &[Vec<Q>]) -> Self {
        let d = tuple.len();
        let m = QMat::from_fn(d, d, |i, j| lat.bilinear_value(&tuple[i], &tuple[j]) / qz(2));
        MomentMatrix { m }
    }

    pub fn mat(&self) -> &QMat {
        &self.m
    }

    pub fn dim(&self) -> usize {
        self.m.rows()
    }

    pub fn rank(&self) -> usize {
        self.m.rank()
    }

    pub fn is_psd(&self) -> bool {
        mat::is_psd(&self.m)
    }

    pub fn trace(&self) -> Q {
        (0..self.m.rows()).map(|i| self.m.at(i, i).clone()).sum()
    }
}

pub mod catalog {
    use super::*;

    /// E8 in a basis where both the Gram and its inverse have diagonal 2;
    /// this keeps brute-force boxes small. (Construction A over the extended
    /// Hamming code, then primal/dual reduced.)
    const E8_GRAM: [[i64; 8]; 8] = [
        [2, 1, 1, 1, 1, 1, 1, -1],
        [1, 2, 1, 1, 1, 1, 1, -1],
        [1, 1, 2, 0, 1, 0, 1, -1],
        [1, 1, 0, 2, 1, 1, 0, 0],
        [1, 1, 1, 1, 2, 0, 0, 0],
        [1, 1, 0, 1, 0, 2, 1, -1],
        [1, 1, 1, 0, 0, 1, 2, -1],
        [-1, -1, -1, 0, 0, -1, -1, 2],
    ];

    pub fn by_name(name: &str) -> Option<QuadLattice> {
        let gram = match name {
            "H" => IMat::from_rows(vec![vec![0, 1], vec![1, 0]]),
            "A1" => IMat::from_rows(vec![vec![2]]),
            "A1-" => IMat::from_rows(vec![vec![-2]]),
            "E8" => IMat::from_rows(E8_GRAM.iter().map(|r| r.to_vec()).collect()),
            _ => return None,
        };
        Some(QuadLattice::named(gram, name).expect("catalog grams are valid"))
    }

    /// Parse sums of catalog names: "H", "A1-", "H^3", "E8+A1", "H^2+E8".
    pub fn parse_spec(spec: &str) -> Result<QuadLattice> {
        let mut acc: Option<QuadLattice> = None;
        for term in spec.split('+') {
            let term = term.trim();
            let (base, pow) = match term.split_once('^') {
                Some((b, p)) => {
                    let k: usize = p
                        .trim()
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad power in `{term}`")))?;
                    if k == 0 {
                        return Err(Error::Parse(format!("zero power in `{term}`")));
                    }
                    (b.trim(), k)
                }
                None => (term, 1),
            };
            let lat = by_name(base)
                .ok_or_else(|| Error::Parse(format!("unknown catalog lattice `{base}`")))?;
            for _ in 0..pow {
                acc = Some(match acc {
                    None => lat.clone(),
                    Some(a) => a.direct_sum(&lat),
                });
            }
        }
        acc.ok_or_else(|| Error::Parse("empty lattice spec".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat::qq;

    #[test]
    fn constructor_validates() {
        assert!(QuadLattice::new(IMat::from_rows(vec![vec![1]])).is_err()); // odd diag
        assert!(QuadLattice::new(IMat::from_rows(vec![vec![0, 1], vec![2, 0]])).is_err());
        assert!(QuadLattice::new(IMat::from_rows(vec![vec![2, 2], vec![2, 2]])).is_err());
        assert!(QuadLattice::new(IMat::from_rows(vec![vec![0, 1], vec![1, 0]])).is_ok());
    }

    #[test]
    fn bilinear_is_polarization_of_q() {
        // [x,y] = Q(x+y) - Q(x) - Q(y) for a non-diagonal gram
        let l = QuadLattice::new(IMat::from_rows(vec![vec![2, 1], vec![1, 4]])).unwrap();
        let x = vec![qz(1), qz(-2)];
        let y = vec![qz(3), qz(1)];
        let xy: Vec<Q> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        let lhs = l.bilinear_value(&x, &y);
        let rhs = l.quadratic_value(&xy) - l.quadratic_value(&x) - l.quadratic_value(&y);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn catalog_signatures_and_dets() {
        let h = catalog::by_name("H").unwrap();
        assert_eq!(h.signature(), (1, 1));
        assert_eq!(h.det(), -1);
        assert!(h.is_selfdual());

        let a1 = catalog::by_name("A1").unwrap();
        assert_eq!(a1.signature(), (1, 0));
        assert_eq!(a1.det(), 2);

        let a1m = catalog::by_name("A1-").unwrap();
        assert_eq!(a1m.signature(), (0, 1));

        let e8 = catalog::by_name("E8").unwrap();
        assert_eq!(e8.signature(), (8, 0));
        assert_eq!(e8.det(), 1);
        assert!(e8.is_selfdual());
    }

    #[test]
    fn parse_sums() {
        let l = catalog::parse_spec("H^2+E8").unwrap();
        assert_eq!(l.rank(), 12);
        assert_eq!(l.signature(), (10, 2));
        assert!(catalog::parse_spec("Q7").is_err());
        assert!(catalog::parse_spec("").is_err());
    }

    #[test]
    fn disc_form_a1() {
        let a1 = catalog::by_name("A1").unwrap();
        let d = a1.discriminant_form();
        assert_eq!(d.invariant_factors(), &[2]);
        assert_eq!(d.order(), 2);
        assert_eq!(d.gamma(), 1);
        // elements sorted lexicographically: [0], [1/2]
        assert_eq!(d.rep(0), &[Q::zero()]);
        assert_eq!(d.rep(1), &[qq(1, 2)]);
        assert_eq!(*d.q_value(1), qq(1, 4));
        assert_eq!(d.b_value(1, 1), qq(1, 2));
        assert_eq!(a1.level(), 4);
    }

    #[test]
    fn disc_form_unimodular_is_trivial() {
        for name in ["H", "E8"] {
            let l = catalog::by_name(name).unwrap();
            let d = l.discriminant_form();
            assert_eq!(d.order(), 1);
            assert_eq!(d.gamma(), 0);
            assert_eq!(l.level(), 1);
        }
    }

    #[test]
    fn disc_form_rescaled() {
        // [[4]]: Z/4 with q(k/4) = 2k^2/4... Q(x e) = 2x^2, dual gen 1/4, q = 1/8.
        let l = QuadLattice::new(IMat::from_rows(vec![vec![4]])).unwrap();
        let d = l.discriminant_form();
        assert_eq!(d.invariant_factors(), &[4]);
        assert_eq!(*d.q_value(d.index_of(&[qq(1, 4)]).unwrap()), qq(1, 8));
        assert_eq!(l.level(), 8);
    }

    #[test]
    fn disc_form_group_ops() {
        let l = catalog::parse_spec("A1+A1").unwrap();
        let d = l.discriminant_form();
        assert_eq!(d.order(), 4);
        assert_eq!(d.invariant_factors(), &[2, 2]);
        let g = d.index_of(&[qq(1, 2), Q::zero()]).unwrap();
        let h = d.index_of(&[Q::zero(), qq(1, 2)]).unwrap();
        let sum = d.add(g, h);
        assert_eq!(d.rep(sum), &[qq(1, 2), qq(1, 2)]);
        assert_eq!(d.add(sum, sum), d.zero());
        assert_eq!(d.neg(g), g);
        assert_eq!(d.element_order(sum), 2);
        assert_eq!(d.exponent(), 2);
    }

    #[test]
    fn maximality_examples() {
        // [[2p^2]] at p has the integral enlargement (1/p)Z: not maximal.
        for p in [3i64, 5] {
            let l = QuadLattice::new(IMat::from_rows(vec![vec![2 * p * p]])).unwrap();
            assert!(!l.is_maximal_at(p as u64).unwrap());
            assert!(l.is_maximal_at(2).unwrap());
        }
        // A1 is maximal at 2 and hyperspecial (odd rank, |disc| = 2).
        let a1 = catalog::by_name("A1").unwrap();
        assert!(a1.is_maximal_at(2).unwrap());
        assert!(a1.is_hyperspecial_at(2).unwrap());
        // E8 self-dual everywhere
        let e8 = catalog::by_name("E8").unwrap();
        for p in [2, 3, 5, 7] {
            assert!(e8.is_maximal_at(p).unwrap());
            assert!(e8.is_hyperspecial_at(p).unwrap());
        }
        // [[8]]: disc Z/8, 2-torsion element 4*(1/8)=1/2 with q = 2*(1/2)^2 = ...
        // Q(x) = 4x^2; q(1/2) = 1: integral => not maximal at 2.
        let l = QuadLattice::new(IMat::from_rows(vec![vec![8]])).unwrap();
        assert!(!l.is_maximal_at(2).unwrap());
        assert!(!l.is_hyperspecial_at(2).unwrap());
        assert!(l.is_maximal_at(3).unwrap());
    }

    #[test]
    fn hyperspecial_even_rank_needs_selfdual() {
        let l = catalog::parse_spec("A1+A1").unwrap(); // rank 2, |disc| 4
        assert!(!l.is_hyperspecial_at(2).unwrap());
        let h = catalog::by_name("H").unwrap();
        assert!(h.is_hyperspecial_at(2).unwrap());
    }

    #[test]
    fn moment_matrix_of_tuple() {
        let l = catalog::by_name("A1").unwrap();
        let t = vec![vec![qz(1)], vec![qz(1)]];
        let m = MomentMatrix::of_tuple(&l, &t);
        assert_eq!(*m.mat().at(0, 0), qz(1));
        assert_eq!(*m.mat().at(0, 1), qz(1));
        assert!(m.is_psd());
        assert_eq!(m.rank(), 1);
        assert_eq!(m.trace(), qz(2));
    }

    #[test]
    fn prime_guard() {
        let a1 = catalog::by_name("A1").unwrap();
        assert!(a1.is_maximal_at(4).is_err());
        assert!(a1.is_maximal_at(1).is_err());
        assert!(a1.is_maximal_at(13).is_ok());
    }
}
