//! Embedding algorithms over the integers: hyperbolic-pair search inside
//! indefinite lattices, certified primitive embeddings into self-dual
//! lattices, and two-sided bounds for the smallest self-dual overlattice
//! extension. Every positive result is wrapped in a certificate that a
//! stand-alone checker re-verifies from integer arithmetic alone; negative
//! results carry the exhausted search bound and, where available, an exact
//! divisibility witness.

use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::lattice::{frac_part, QuadLattice};
use crate::mat::{elementary_divisors, inertia, IMat, Q, Z};
use crate::{Error, Result};

/// A self-dual target lattice in the classical convention: the Gram matrix
/// is the matrix of the full bilinear pairing, with vector norm t(v) G v.
/// Even lattices (pairing from a `QuadLattice`) and odd diagonal lattices
/// both fit; `|det| = 1` is enforced at construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SelfDualTarget {
    gram: IMat,
    label: String,
}

impl SelfDualTarget {
    pub fn odd_diagonal(p: usize, q: usize) -> SelfDualTarget {
        let n = p + q;
        let gram = IMat::from_fn(n, n, |i, j| {
            if i != j {
                0
            } else if i < p {
                1
            } else {
                -1
            }
        });
        SelfDualTarget { gram, label: format!("I({p},{q})") }
    }

    /// Wrap an even self-dual lattice (e.g. E8 or hyperbolic-plane stacks).
    pub fn even_unimodular(lat: &QuadLattice) -> Result<SelfDualTarget> {
        if !lat.is_selfdual() {
            return Err(Error::Verify("lattice is not self-dual".into()));
        }
        Ok(SelfDualTarget {
            gram: lat.gram().clone(),
            label: lat.name().unwrap_or("even-unimodular").to_string(),
        })
    }

    pub fn gram(&self) -> &IMat {
        &self.gram
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn rank(&self) -> usize {
        self.gram.rows()
    }

    pub fn signature(&self) -> (usize, usize) {
        let (p, n, _) = inertia(&self.gram.to_qmat());
        (p, n)
    }

    pub fn is_even(&self) -> bool {
        (0..self.rank()).all(|i| self.gram.at(i, i) % 2 == 0)
    }

    pub fn pairing(&self, x: &[i64], y: &[i64]) -> i64 {
        let gx = self.gram.mul_vec(x);
        y.iter().zip(gx.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self, x: &[i64]) -> i64 {
        self.pairing(x, x)
    }
}

/// A verified embedding of an even lattice into a self-dual target. The
/// matrix columns are the images of the source basis; `primitive` means the
/// image is a direct summand (all elementary divisors 1).
#[derive(Clone, Debug)]
pub struct EmbeddingCertificate {
    pub source_gram: IMat,
    pub target: SelfDualTarget,
    pub matrix: IMat,
    pub primitive: bool,
}

/// Re-verify an embedding from scratch: exact pairing transport entry by
/// entry, then primitivity from the Smith normal form. The error message on
/// a transport failure names the first offending Gram entry.
pub fn check_embedding(
    source: &QuadLattice,
    target: &SelfDualTarget,
    matrix: &IMat,
) -> Result<EmbeddingCertificate> {
    let n = source.rank();
    let nt = target.rank();
    if matrix.rows() != nt || matrix.cols() != n {
        return Err(Error::Dimension(format!(
            "embedding matrix must be {nt}x{n}, got {}x{}",
            matrix.rows(),
            matrix.cols()
        )));
    }
    let mq = matrix.to_qmat();
    let transported = mq.transpose().mul(&target.gram.to_qmat()).mul(&mq);
    let src = source.gram().to_qmat();
    for i in 0..n {
        for j in 0..n {
            if transported.at(i, j) != src.at(i, j) {
                return Err(Error::Verify(format!(
                    "pairing transport fails at entry ({i},{j}): expected {}, got {}",
                    src.at(i, j),
                    transported.at(i, j)
                )));
            }
        }
    }
    let divs = elementary_divisors(&matrix.to_zmat());
    let primitive = divs.len() == n && divs.iter().all(|d| d.abs() == Z::from(1));
    Ok(EmbeddingCertificate {
        source_gram: source.gram().clone(),
        target: target.clone(),
        matrix: matrix.clone(),
        primitive,
    })
}

// ---------------------------------------------------------------------------
// Hyperbolic pairs
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub enum PairOutcome {
    Found {
        l: Vec<i64>,
        lstar: Vec<i64>,
    },
    /// No pair within the height bound. `min_pairing_content` is the
    /// smallest content of the pairing functional over the isotropic vectors
    /// seen: a content c > 1 is an exact witness that those vectors pair
    /// into cZ and admit no partner of pairing 1.
    NotFound {
        height: i64,
        min_pairing_content: Option<i64>,
    },
}

fn vec_content(w: &[i64]) -> i64 {
    w.iter().fold(0i64, |g, &x| g.gcd(&x))
}

/// Coefficients c with sum c_i w_i = 1, when the content of w is 1.
fn bezout_one(w: &[i64]) -> Option<Vec<i64>> {
    let mut g: i128 = 0;
    let mut coef: Vec<i128> = vec![0; w.len()];
    for (i, &wi) in w.iter().enumerate() {
        let wi = wi as i128;
        if wi == 0 {
            continue;
        }
        if g == 0 {
            g = wi.abs();
            coef[i] = wi.signum();
            continue;
        }
        let e = g.extended_gcd(&wi);
        let (mut gg, mut x, mut y) = (e.gcd, e.x, e.y);
        if gg < 0 {
            gg = -gg;
            x = -x;
            y = -y;
        }
        for c in coef.iter_mut() {
            *c *= x;
        }
        coef[i] = y;
        g = gg;
    }
    if g != 1 {
        return None;
    }
    Some(coef.into_iter().map(|c| i64::try_from(c).expect("bezout overflow")).collect())
}

/// Search an indefinite lattice for vectors l, l* with Q(l) = Q(l*) = 0 and
/// [l, l*] = 1, scanning primitive isotropic l by increasing coordinate
/// height. A partner, when the pairing functional of l is surjective, comes
/// from a Bezout combination corrected to be isotropic.
pub fn find_hyperbolic_pair(lat: &QuadLattice, max_height: i64) -> Result<PairOutcome> {
    let (p, m) = lat.signature();
    if p == 0 || m == 0 {
        return Err(Error::Unsupported(
            "definite lattice has no isotropic vectors".into(),
        ));
    }
    let n = lat.rank();
    let mut min_content: Option<i64> = None;
    for h in 1..=max_height {
        let mut x = vec![-h; n];
        'scan: loop {
            let at_height = x.iter().any(|&c| c.abs() == h);
            if at_height && vec_content(&x) == 1 && lat.quadratic_value_int(&x) == 0 {
                // pairing functional of x on lattice vectors
                let w = lat.gram().mul_vec(&x);
                let c = vec_content(&w).abs();
                min_content = Some(match min_content {
                    Some(m0) => m0.min(c),
                    None => c,
                });
                if let Some(coef) = bezout_one(&w) {
                    let qw = lat.quadratic_value_int(&coef);
                    let lstar: Vec<i64> =
                        coef.iter().zip(x.iter()).map(|(&a, &b)| a - qw * b).collect();
                    assert_eq!(lat.quadratic_value_int(&x), 0);
                    assert_eq!(lat.quadratic_value_int(&lstar), 0);
                    assert_eq!(lat.bilinear_value_int(&x, &lstar), 1);
                    return Ok(PairOutcome::Found { l: x, lstar });
                }
            }
            // odometer
            let mut k = 0;
            loop {
                if k == n {
                    break 'scan;
                }
                x[k] += 1;
                if x[k] <= h {
                    break;
                }
                x[k] = -h;
                k += 1;
            }
        }
    }
    Ok(PairOutcome::NotFound { height: max_height, min_pairing_content: min_content })
}

// ---------------------------------------------------------------------------
// Self-dual overlattice search
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub enum OverlatticeOutcome {
    Resolved(EmbeddingCertificate),
    Unresolved { reason: String },
}

/// All nonzero integer vectors v with t(v) G v = norm, coordinates bounded
/// by `cap`, and (for mixed-signature targets) positive/negative square
/// masses bounded by norm + slack and slack. Lexicographic order.
fn norm_candidates(target: &SelfDualTarget, norm: i64, cap: i64, slack: i64) -> Vec<Vec<i64>> {
    let n = target.rank();
    let mut out = Vec::new();
    let mut v = vec![-cap; n];
    loop {
        if v.iter().any(|&c| c != 0) {
            let sq: i64 = v.iter().map(|&c| c * c).sum();
            if sq <= norm.max(0) + 2 * slack && target.norm(&v) == norm {
                out.push(v.clone());
            }
        }
        let mut k = 0;
        loop {
            if k == n {
                return out;
            }
            v[k] += 1;
            if v[k] <= cap {
                break;
            }
            v[k] = -cap;
            k += 1;
        }
    }
}

fn columns_to_matrix(nt: usize, cols: &[Vec<i64>]) -> IMat {
    IMat::from_fn(nt, cols.len(), |i, j| cols[j][i])
}

/// Backtracking column assignment: the k-th column must reproduce row k of
/// the source Gram against all previous columns. Candidates are tried in
/// lexicographic order, so the first full assignment is the minimal one;
/// non-primitive assignments are rejected and the search continues.
pub fn certify_selfdual_overlattice(
    lat: &QuadLattice,
    target: &SelfDualTarget,
    coord_cap: i64,
) -> Result<OverlatticeOutcome> {
    let n = lat.rank();
    let nt = target.rank();
    if nt < n {
        return Ok(OverlatticeOutcome::Unresolved {
            reason: format!("target rank {nt} below source rank {n}"),
        });
    }
    let slack = coord_cap.max(1);
    let mut candidates: Vec<Vec<Vec<i64>>> = Vec::with_capacity(n);
    for k in 0..n {
        let cand = norm_candidates(target, lat.gram().at(k, k), coord_cap, slack);
        if cand.is_empty() {
            return Ok(OverlatticeOutcome::Unresolved {
                reason: format!(
                    "no target vector of norm {} within coordinate cap {coord_cap}",
                    lat.gram().at(k, k)
                ),
            });
        }
        candidates.push(cand);
    }

    fn descend(
        lat: &QuadLattice,
        target: &SelfDualTarget,
        candidates: &[Vec<Vec<i64>>],
        cols: &mut Vec<Vec<i64>>,
    ) -> Option<IMat> {
        let k = cols.len();
        if k == candidates.len() {
            let m = columns_to_matrix(target.rank(), cols);
            let divs = elementary_divisors(&m.to_zmat());
            if divs.len() == candidates.len() && divs.iter().all(|d| d.abs() == Z::from(1)) {
                return Some(m);
            }
            return None;
        }
        'next: for cand in &candidates[k] {
            for (j, prev) in cols.iter().enumerate() {
                if target.pairing(prev, cand) != lat.gram().at(j, k) {
                    continue 'next;
                }
            }
            cols.push(cand.clone());
            if let Some(m) = descend(lat, target, candidates, cols) {
                return Some(m);
            }
            cols.pop();
        }
        None
    }

    let mut cols = Vec::new();
    match descend(lat, target, &candidates, &mut cols) {
        Some(m) => {
            let cert = check_embedding(lat, target, &m)?;
            assert!(cert.primitive);
            Ok(OverlatticeOutcome::Resolved(cert))
        }
        None => Ok(OverlatticeOutcome::Unresolved {
            reason: format!("search exhausted at coordinate cap {coord_cap}"),
        }),
    }
}

/// Try the self-dual extension of the source signature (n, m) by r positive
/// slots. A self-dual source resolves immediately at r = 0 via the identity;
/// otherwise the odd diagonal target of signature (n + r, m) is searched.
pub fn overlattice_at_r(lat: &QuadLattice, r: usize, coord_cap: i64) -> Result<OverlatticeOutcome> {
    let (p, m) = lat.signature();
    if r == 0 && lat.is_selfdual() {
        let target = SelfDualTarget::even_unimodular(lat)?;
        let cert = check_embedding(lat, &target, &IMat::identity(lat.rank()))?;
        return Ok(OverlatticeOutcome::Resolved(cert));
    }
    let target = SelfDualTarget::odd_diagonal(p + r, m);
    certify_selfdual_overlattice(lat, &target, coord_cap)
}

/// Extend a certificate by one unit slot: same images inside the target
/// with one extra positive diagonal coordinate, re-verified from scratch.
pub fn pad_with_unit(cert: &EmbeddingCertificate) -> Result<EmbeddingCertificate> {
    let nt = cert.target.rank();
    let n = cert.matrix.cols();
    let old = cert.target.gram();
    let gram = IMat::from_fn(nt + 1, nt + 1, |i, j| {
        if i < nt && j < nt {
            old.at(i, j)
        } else if i == nt && j == nt {
            1
        } else {
            0
        }
    });
    let target = SelfDualTarget { gram, label: format!("{}+I(1,0)", cert.target.label) };
    let matrix = IMat::from_fn(nt + 1, n, |i, j| if i < nt { cert.matrix.at(i, j) } else { 0 });
    let source = QuadLattice::new(cert.source_gram.clone())?;
    check_embedding(&source, &target, &matrix)
}

// ---------------------------------------------------------------------------
// Bounds for the minimal self-dual extension
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct RCertificate {
    pub lower: usize,
    pub lower_witness: String,
    pub upper: Option<usize>,
    pub certificate: Option<EmbeddingCertificate>,
}

/// Two-sided bounds on the least r such that the lattice embeds primitively
/// into a self-dual lattice with r extra positive slots. Lower bound: the
/// orthogonal complement in any such extension has rank r and its
/// discriminant group is isomorphic to that of the source, so r is at least
/// the minimal generator count of the discriminant group. Upper bound: the
/// least r at or below `max_r` where the certified search succeeds.
pub fn r_bounds(lat: &QuadLattice, max_r: usize, coord_cap: i64) -> Result<RCertificate> {
    let disc = lat.discriminant_form();
    let lower = disc.gamma();
    let lower_witness = format!(
        "discriminant group {:?} needs {} generators; the rank-r complement \
         of a primitive embedding into a self-dual lattice carries an \
         isomorphic discriminant group, so r >= {}",
        disc.invariant_factors(),
        lower,
        lower
    );
    for r in lower..=max_r {
        if let OverlatticeOutcome::Resolved(cert) = overlattice_at_r(lat, r, coord_cap)? {
            return Ok(RCertificate {
                lower,
                lower_witness,
                upper: Some(r),
                certificate: Some(cert),
            });
        }
    }
    Ok(RCertificate { lower, lower_witness, upper: None, certificate: None })
}

// ---------------------------------------------------------------------------
// Hypothesis reporting for a supplied global embedding
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct AssemblyReport {
    pub gram_ok: bool,
    pub failing_entry: Option<(usize, usize, String, String)>,
    pub primitive_ok: bool,
    /// target rank at least source rank + 4
    pub rank_margin_ok: bool,
    pub target_indefinite: bool,
    /// per-prime confirmation of pairing transport at primes dividing
    /// 2 * det(source); implied by the exact global check, recomputed
    /// modulo prime powers as an independent pass
    pub prime_transport: Vec<(u64, bool)>,
}

impl AssemblyReport {
    pub fn verified(&self) -> bool {
        self.gram_ok && self.primitive_ok && self.prime_transport.iter().all(|&(_, ok)| ok)
    }
}

fn prime_factors(mut n: i128) -> Vec<u64> {
    let mut out = Vec::new();
    if n < 0 {
        n = -n;
    }
    let mut p = 2i128;
    while p * p <= n {
        if n % p == 0 {
            out.push(p as u64);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n as u64);
    }
    out
}

/// Verify a user- or search-supplied embedding and report which assembly
/// hypotheses hold. Construction from purely local data is out of scope;
/// this is the certification half: exact transport (globally and again
/// modulo powers of each bad prime), primitivity, and the rank/indefiniteness
/// side conditions.
pub fn local_global_assemble(
    lat: &QuadLattice,
    target: &SelfDualTarget,
    matrix: &IMat,
) -> Result<AssemblyReport> {
    let n = lat.rank();
    let nt = target.rank();
    if matrix.rows() != nt || matrix.cols() != n {
        return Err(Error::Dimension("embedding matrix shape".into()));
    }
    let mq = matrix.to_qmat();
    let transported = mq.transpose().mul(&target.gram.to_qmat()).mul(&mq);
    let src = lat.gram().to_qmat();
    let mut gram_ok = true;
    let mut failing_entry = None;
    'outer: for i in 0..n {
        for j in 0..n {
            if transported.at(i, j) != src.at(i, j) {
                gram_ok = false;
                failing_entry =
                    Some((i, j, src.at(i, j).to_string(), transported.at(i, j).to_string()));
                break 'outer;
            }
        }
    }
    let divs = elementary_divisors(&matrix.to_zmat());
    let primitive_ok = divs.len() == n && divs.iter().all(|d| d.abs() == Z::from(1));
    let (p, m) = target.signature();
    let target_indefinite = p > 0 && m > 0;
    let rank_margin_ok = nt >= n + 4;

    let mut prime_transport = Vec::new();
    for pr in prime_factors(2 * lat.det()) {
        // transport modulo pr^e for a modulus comfortably above the level
        let mut modulus = Z::from(1);
        let pz = Z::from(pr);
        let bound = Z::from(lat.det().unsigned_abs()) * Z::from(4u8);
        while modulus <= bound {
            modulus = &modulus * &pz;
        }
        let mut ok = true;
        'prime: for i in 0..n {
            for j in 0..n {
                let a = transported.at(i, j).to_integer();
                let b = src.at(i, j).to_integer();
                if (a - b).mod_floor(&modulus) != Z::zero() {
                    ok = false;
                    break 'prime;
                }
            }
        }
        prime_transport.push((pr, ok));
    }
    Ok(AssemblyReport {
        gram_ok,
        failing_entry,
        primitive_ok,
        rank_margin_ok,
        target_indefinite,
        prime_transport,
    })
}

// ---------------------------------------------------------------------------
// Orthogonal complement consistency
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct ComplementReport {
    pub complement_gram: IMat,
    pub complement_even: bool,
    pub det_matches: bool,
    /// glue group is the graph of a discriminant-group isomorphism
    pub graph_bijective: bool,
    /// pairings negate across the glue graph (mod 1)
    pub pairing_anti: bool,
    /// norms negate across the glue graph: mod 1 for even ambient, mod 1/2
    /// for odd ambient (the odd norm form only constrains twice the values)
    pub norm_anti: bool,
}

impl ComplementReport {
    pub fn consistent(&self) -> bool {
        self.det_matches && self.graph_bijective && self.pairing_anti && self.norm_anti
    }
}

/// Integer kernel of the pairing-with-image map, as rows. Computed from the
/// Smith form's row transform: the rows beyond the rank kill the matrix.
fn integer_kernel(a: &IMat) -> Result<Vec<Vec<i64>>> {
    use crate::mat::smith_normal_form;
    let at = a.transpose().to_zmat();
    let snf = smith_normal_form(&at);
    let rank = snf.diag.iter().filter(|d| !d.is_zero()).count();
    let uq = snf.uinv.to_qmat().inverse().ok_or(Error::Degenerate)?;
    let nrows = at.rows();
    let mut rows = Vec::new();
    for r in rank..nrows {
        let mut row = Vec::with_capacity(nrows);
        for c in 0..nrows {
            let v = uq.at(r, c);
            if !v.denom().abs().eq(&Z::from(1)) {
                return Err(Error::Verify("row transform is not integral".into()));
            }
            row.push(v.to_integer().to_i64().ok_or_else(|| {
                Error::Unsupported("kernel coordinates exceed i64".into())
            })?);
        }
        rows.push(row);
    }
    Ok(rows)
}

/// For a verified certificate, compute the orthogonal complement of the
/// image and check that its discriminant data mirrors the source's with
/// negated values, via the glue group of the sum inside the ambient lattice.
pub fn complement_check(
    lat: &QuadLattice,
    target: &SelfDualTarget,
    matrix: &IMat,
) -> Result<ComplementReport> {
    let cert = check_embedding(lat, target, matrix)?;
    if !cert.primitive {
        return Err(Error::Verify("complement analysis needs a primitive embedding".into()));
    }
    let n = lat.rank();
    let nt = target.rank();
    // pairing of ambient vectors with the image basis
    let pair_map = matrix.transpose().mul(target.gram());
    let kernel = integer_kernel(&pair_map)?;
    let r = kernel.len();
    if n + r != nt {
        return Err(Error::Verify("complement rank mismatch".into()));
    }
    let comp_gram =
        IMat::from_fn(r, r, |i, j| target.pairing(&kernel[i], &kernel[j]));
    let complement_even = (0..r).all(|i| comp_gram.at(i, i) % 2 == 0);
    let det_matches = comp_gram.det().abs() == lat.det().abs();

    let mut graph_bijective = false;
    let mut pairing_anti = false;
    let mut norm_anti = false;
    if complement_even && det_matches && r > 0 {
        let comp = QuadLattice::new(comp_gram.clone())?;
        let disc_l = lat.discriminant_form();
        let disc_n = comp.discriminant_form();
        // dual coordinates of the two projections of each ambient basis vector
        let gl_inv = lat.gram().to_qmat().inverse().ok_or(Error::Degenerate)?;
        let gn_inv = comp_gram.to_qmat().inverse().ok_or(Error::Degenerate)?;
        let mq = matrix.to_qmat();
        let kq = IMat::from_fn(r, nt, |i, j| kernel[i][j]).to_qmat();
        let gt = target.gram().to_qmat();
        let mut glue: Vec<(usize, usize)> = Vec::new();
        for e in 0..nt {
            let unit: Vec<Q> =
                (0..nt).map(|i| if i == e { Q::from(Z::from(1)) } else { Q::from(Z::from(0)) }).collect();
            let pav = gt.mul_vec(&unit);
            let lx = gl_inv.mul_vec(&mq.transpose().mul_vec(&pav));
            let nx = gn_inv.mul_vec(&kq.mul_vec(&pav));
            glue.push((disc_l.index_of(&lx)?, disc_n.index_of(&nx)?));
        }
        // close the glue under addition and test it is the graph of an
        // isomorphism of the discriminant groups
        let mut members = std::collections::BTreeSet::new();
        members.insert((disc_l.zero(), disc_n.zero()));
        let mut frontier = vec![(disc_l.zero(), disc_n.zero())];
        while let Some((a, b)) = frontier.pop() {
            for &(ga, gb) in &glue {
                let nx = (disc_l.add(a, ga), disc_n.add(b, gb));
                if members.insert(nx) {
                    frontier.push(nx);
                }
            }
        }
        let mut fwd = std::collections::BTreeMap::new();
        let mut rev = std::collections::BTreeMap::new();
        let mut single_valued = true;
        for &(a, b) in &members {
            if *fwd.entry(a).or_insert(b) != b || *rev.entry(b).or_insert(a) != a {
                single_valued = false;
            }
        }
        graph_bijective = single_valued
            && fwd.len() == disc_l.order()
            && rev.len() == disc_n.order()
            && disc_l.order() == disc_n.order();
        if graph_bijective {
            let half = Q::new(Z::from(1), Z::from(2));
            let norm_modulus = if target.is_even() { Q::from(Z::from(1)) } else { half };
            pairing_anti = true;
            norm_anti = true;
            for &(a, b) in &members {
                let qsum = disc_l.q_value(a) + disc_n.q_value(b);
                let rem = &qsum - (&qsum / &norm_modulus).floor() * &norm_modulus;
                if !rem.is_zero() {
                    norm_anti = false;
                }
                for &(a2, b2) in &members {
                    let bsum = disc_l.b_value(a, a2) + disc_n.b_value(b, b2);
                    if !frac_part(&bsum).is_zero() {
                        pairing_anti = false;
                    }
                }
            }
        }
    }
    Ok(ComplementReport {
        complement_gram: comp_gram,
        complement_even,
        det_matches,
        graph_bijective,
        pairing_anti,
        norm_anti,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::catalog;

    fn a1() -> QuadLattice {
        catalog::by_name("A1").unwrap()
    }

    fn h() -> QuadLattice {
        catalog::by_name("H").unwrap()
    }

    #[test]
    fn checker_accepts_and_rejects() {
        let l = a1();
        let t = SelfDualTarget::odd_diagonal(2, 1);
        let m = IMat::from_rows(vec![vec![1], vec![1], vec![0]]);
        let cert = check_embedding(&l, &t, &m).unwrap();
        assert!(cert.primitive);
        let bad = IMat::from_rows(vec![vec![1], vec![0], vec![0]]);
        let err = check_embedding(&l, &t, &bad).unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains("(0,0)"), "diagnostic names the entry: {msg}");
    }

    #[test]
    fn checker_flags_imprimitive() {
        // norm-8 vector (2,2) spans an index-2 sublattice of its saturation
        let l = QuadLattice::new(IMat::from_rows(vec![vec![8]])).unwrap();
        let t = SelfDualTarget::odd_diagonal(2, 0);
        let m = IMat::from_rows(vec![vec![2], vec![2]]);
        let cert = check_embedding(&l, &t, &m).unwrap();
        assert!(!cert.primitive);
    }

    #[test]
    fn hyperbolic_pair_in_h_blocks() {
        for lat in [h(), h().direct_sum(&catalog::by_name("E8").unwrap())] {
            match find_hyperbolic_pair(&lat, 3).unwrap() {
                PairOutcome::Found { l, lstar } => {
                    assert_eq!(lat.quadratic_value_int(&l), 0);
                    assert_eq!(lat.quadratic_value_int(&lstar), 0);
                    assert_eq!(lat.bilinear_value_int(&l, &lstar), 1);
                }
                PairOutcome::NotFound { .. } => panic!("pair must exist"),
            }
        }
    }

    #[test]
    fn hyperbolic_pair_scaled_plane_refused() {
        let lat = QuadLattice::new(IMat::from_rows(vec![vec![0, 3], vec![3, 0]])).unwrap();
        match find_hyperbolic_pair(&lat, 3).unwrap() {
            PairOutcome::Found { .. } => panic!("no unimodular pair in the scaled plane"),
            PairOutcome::NotFound { height, min_pairing_content } => {
                assert_eq!(height, 3);
                assert_eq!(min_pairing_content, Some(3));
            }
        }
    }

    #[test]
    fn hyperbolic_pair_rejects_definite() {
        assert!(find_hyperbolic_pair(&a1(), 2).is_err());
    }

    #[test]
    fn overlattice_a1() {
        // explicit mixed-signature target
        let t = SelfDualTarget::odd_diagonal(2, 1);
        match certify_selfdual_overlattice(&a1(), &t, 2).unwrap() {
            OverlatticeOutcome::Resolved(cert) => {
                assert!(cert.primitive);
                assert_eq!(cert.matrix.cols(), 1);
            }
            OverlatticeOutcome::Unresolved { reason } => panic!("expected certificate: {reason}"),
        }
        // signature-driven extension by one positive slot
        match overlattice_at_r(&a1(), 1, 2).unwrap() {
            OverlatticeOutcome::Resolved(cert) => assert!(cert.primitive),
            OverlatticeOutcome::Unresolved { reason } => panic!("expected certificate: {reason}"),
        }
    }

    #[test]
    fn overlattice_even_odd_obstruction() {
        // the hyperbolic plane is even; the odd unimodular plane cannot
        // contain it in rank 2 (any index-1 embedding is an isomorphism)
        let t = SelfDualTarget::odd_diagonal(1, 1);
        match certify_selfdual_overlattice(&h(), &t, 3).unwrap() {
            OverlatticeOutcome::Resolved(_) => panic!("even lattice inside the odd plane"),
            OverlatticeOutcome::Unresolved { .. } => {}
        }
        // at r = 0 the plane is its own self-dual overlattice
        match overlattice_at_r(&h(), 0, 2).unwrap() {
            OverlatticeOutcome::Resolved(cert) => {
                assert!(cert.primitive);
                assert_eq!(cert.matrix, IMat::identity(2));
            }
            OverlatticeOutcome::Unresolved { reason } => panic!("identity expected: {reason}"),
        }
    }

    #[test]
    fn overlattice_h_plus_a1() {
        let lat = h().direct_sum(&a1());
        match overlattice_at_r(&lat, 1, 2).unwrap() {
            OverlatticeOutcome::Resolved(cert) => {
                assert!(cert.primitive);
                assert_eq!(cert.target.signature(), (3, 1));
            }
            OverlatticeOutcome::Unresolved { reason } => panic!("expected certificate: {reason}"),
        }
    }

    #[test]
    fn padding_preserves_certificates() {
        let t = SelfDualTarget::odd_diagonal(2, 1);
        let m = IMat::from_rows(vec![vec![1], vec![1], vec![0]]);
        let cert = check_embedding(&a1(), &t, &m).unwrap();
        let padded = pad_with_unit(&cert).unwrap();
        assert!(padded.primitive);
        assert_eq!(padded.target.rank(), 4);
    }

    #[test]
    fn r_bounds_selfdual_is_zero() {
        let lat = h().direct_sum(&h());
        let rc = r_bounds(&lat, 2, 2).unwrap();
        assert_eq!(rc.lower, 0);
        assert_eq!(rc.upper, Some(0));
    }

    #[test]
    fn r_bounds_h_a1() {
        let lat = h().direct_sum(&a1());
        let rc = r_bounds(&lat, 2, 2).unwrap();
        assert_eq!(rc.lower, 1);
        assert_eq!(rc.upper, Some(1));
        assert!(rc.lower <= rc.upper.unwrap());
    }

    #[test]
    fn assembly_report_fields() {
        let l = a1();
        let t = SelfDualTarget::odd_diagonal(3, 2);
        let m = IMat::from_rows(vec![vec![1], vec![1], vec![0], vec![0], vec![0]]);
        let rep = local_global_assemble(&l, &t, &m).unwrap();
        assert!(rep.gram_ok && rep.primitive_ok && rep.verified());
        assert!(rep.rank_margin_ok, "rank 5 >= 1 + 4");
        assert!(rep.target_indefinite);
        assert!(rep.prime_transport.iter().any(|&(p, _)| p == 2));
        // deliberately wrong matrix: diagnostic names the entry
        let bad = IMat::from_rows(vec![vec![1], vec![0], vec![0], vec![0], vec![0]]);
        let rep = local_global_assemble(&l, &t, &bad).unwrap();
        assert!(!rep.gram_ok);
        let (i, j, want, got) = rep.failing_entry.clone().unwrap();
        assert_eq!((i, j), (0, 0));
        assert_eq!((want.as_str(), got.as_str()), ("2", "1"));
    }

    #[test]
    fn complement_mirror_for_a1() {
        let l = a1();
        let t = SelfDualTarget::odd_diagonal(2, 0);
        let m = IMat::from_rows(vec![vec![1], vec![1]]);
        let rep = complement_check(&l, &t, &m).unwrap();
        assert!(rep.complement_even);
        assert!(rep.det_matches);
        assert!(rep.graph_bijective);
        assert!(rep.pairing_anti);
        assert!(rep.norm_anti, "odd ambient: norms mirror mod 1/2");
    }

    #[test]
    fn complement_mirror_for_h_a1() {
        let lat = h().direct_sum(&a1());
        match overlattice_at_r(&lat, 1, 2).unwrap() {
            OverlatticeOutcome::Resolved(cert) => {
                let rep = complement_check(&lat, &cert.target, &cert.matrix).unwrap();
                assert!(rep.det_matches);
                if rep.complement_even {
                    assert!(rep.graph_bijective && rep.pairing_anti && rep.norm_anti);
                }
            }
            OverlatticeOutcome::Unresolved { reason } => panic!("{reason}"),
        }
    }
}
