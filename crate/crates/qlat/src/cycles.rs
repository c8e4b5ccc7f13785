//! Formal coefficient algebra for special-cycle generating series.
//!
//! The objects here are purely combinatorial: symbols indexed by a moment
//! matrix T and a coset tuple, identified when a GL_d(Z) substitution carries
//! one index to the other. The module implements the intersection product
//! (block-completion sums), the pullback along a self-dual direct summand
//! (representation-number weights), and the unipotent translation action,
//! which is verified against the Weil-representation matrices on every call.
//! No geometry is computed; the point is to check identities between
//! coefficients exactly.

use std::collections::{HashSet, VecDeque};
use std::collections::BTreeMap;

use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::cyclo::Cyclo;
use crate::lattice::{DiscriminantForm, QuadLattice};
use crate::mat::{is_psd, qz, IMat, QMat, Q, Z};
use crate::theta::representation_number;
use crate::weil::{MpGen, MpWord, WeilSpace};
use crate::{Error, Result};

/// Coefficient domain for formal series.
pub trait Coeff: Clone + PartialEq + std::fmt::Debug + Send + Sync {
    fn zero() -> Self;
    fn one() -> Self;
    fn add(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn is_zero(&self) -> bool;
    fn from_count(c: u128) -> Self;
}

impl Coeff for Q {
    fn zero() -> Self {
        qz(0)
    }
    fn one() -> Self {
        qz(1)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn from_count(c: u128) -> Self {
        Q::from(Z::from(c))
    }
}

fn common_conductor(a: &Cyclo, b: &Cyclo) -> u64 {
    a.conductor().lcm(&b.conductor())
}

impl Coeff for Cyclo {
    fn zero() -> Self {
        Cyclo::zero(1)
    }
    fn one() -> Self {
        Cyclo::one(1)
    }
    fn add(&self, o: &Self) -> Self {
        let n = common_conductor(self, o);
        self.lift(n).unwrap().add(&o.lift(n).unwrap())
    }
    fn mul(&self, o: &Self) -> Self {
        let n = common_conductor(self, o);
        Cyclo::mul(&self.lift(n).unwrap(), &o.lift(n).unwrap())
    }
    fn is_zero(&self) -> bool {
        Cyclo::is_zero(self)
    }
    fn from_count(c: u128) -> Self {
        Cyclo::from_q(1, Q::from(Z::from(c)))
    }
}

/// Semantic equality across conductors.
pub fn cyclo_eq(a: &Cyclo, b: &Cyclo) -> bool {
    let n = common_conductor(a, b);
    a.lift(n).unwrap() == b.lift(n).unwrap()
}

// ---------------------------------------------------------------------------
// Cycle keys and canonicalization
// ---------------------------------------------------------------------------

/// Index of one formal cycle class. `Zero` absorbs every index whose moment
/// matrix is not positive semidefinite or whose entries violate the coset
/// congruences (diagonal against q-values, pairings against b-values), since
/// such classes are empty.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum CycleKey {
    Zero,
    Cls {
        d: usize,
        /// row-major canonical moment matrix
        t: Vec<Q>,
        mu: Vec<usize>,
    },
}

impl CycleKey {
    pub fn moment(&self) -> Option<QMat> {
        match self {
            CycleKey::Zero => None,
            CycleKey::Cls { d, t, .. } => {
                Some(QMat::from_fn(*d, *d, |i, j| t[i * d + j].clone()))
            }
        }
    }

    pub fn tuple(&self) -> Option<&[usize]> {
        match self {
            CycleKey::Zero => None,
            CycleKey::Cls { mu, .. } => Some(mu),
        }
    }

    pub fn trace(&self) -> Q {
        match self {
            CycleKey::Zero => qz(0),
            CycleKey::Cls { d, t, .. } => {
                (0..*d).map(|i| t[i * d + i].clone()).fold(qz(0), |a, b| a + b)
            }
        }
    }
}

fn gl_generators(d: usize) -> Vec<IMat> {
    let mut gens = Vec::new();
    if d == 0 {
        return gens;
    }
    for i in 0..d {
        // sign flip on coordinate i
        gens.push(IMat::from_fn(d, d, |r, c| {
            if r == c {
                if r == i {
                    -1
                } else {
                    1
                }
            } else {
                0
            }
        }));
    }
    for i in 0..d {
        for j in 0..d {
            if i == j {
                continue;
            }
            for s in [1i64, -1] {
                gens.push(IMat::from_fn(d, d, |r, c| {
                    if r == c {
                        1
                    } else if r == i && c == j {
                        s
                    } else {
                        0
                    }
                }));
            }
        }
    }
    for i in 0..d {
        for j in i + 1..d {
            gens.push(IMat::from_fn(d, d, |r, c| {
                if (r == i && c == j) || (r == j && c == i) {
                    1
                } else if r == c && r != i && r != j {
                    1
                } else {
                    0
                }
            }));
        }
    }
    gens
}

type Node = (Vec<Q>, Vec<usize>);

fn node_trace(d: usize, t: &[Q]) -> Q {
    (0..d).map(|i| t[i * d + i].clone()).fold(qz(0), |a, b| a + b)
}

fn apply_subst(disc: &DiscriminantForm, d: usize, node: &Node, b: &IMat) -> Node {
    let t = QMat::from_fn(d, d, |i, j| node.0[i * d + j].clone());
    let bq = b.to_qmat();
    let t2 = bq.transpose().mul(&t).mul(&bq);
    let mut flat = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            flat.push(t2.at(i, j).clone());
        }
    }
    let mut mu2 = Vec::with_capacity(d);
    for k in 0..d {
        let mut acc = disc.zero();
        for i in 0..d {
            let c = b.at(i, k);
            if c != 0 {
                acc = disc.add(acc, disc.scalar_mul(c, node.1[i]));
            }
        }
        mu2.push(acc);
    }
    (flat, mu2)
}

fn node_cmp(d: usize, a: &Node, b: &Node) -> std::cmp::Ordering {
    node_trace(d, &a.0)
        .cmp(&node_trace(d, &b.0))
        .then_with(|| a.0.cmp(&b.0))
        .then_with(|| a.1.cmp(&b.1))
}

const ORBIT_CAP: usize = 200_000;

/// Canonical representative of the substitution orbit of (T, mu). The search
/// explores the orbit by elementary column operations, keeping every node
/// whose trace stays within a fixed margin of the best trace found, and picks
/// the ordering minimum. Restarts whenever the best trace improves, so the
/// final sweep always runs with the tightest ceiling.
pub fn canonicalize(
    lat: &QuadLattice,
    t: &QMat,
    mu: &[usize],
) -> Result<CycleKey> {
    let d = mu.len();
    if t.rows() != d || t.cols() != d {
        return Err(Error::Dimension("moment matrix vs tuple".into()));
    }
    if !t.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    let disc = lat.discriminant_form();
    if d == 0 {
        return Ok(CycleKey::Cls { d: 0, t: vec![], mu: vec![] });
    }
    if !is_psd(t) {
        return Ok(CycleKey::Zero);
    }
    // congruences: diagonal against q-values mod Z, pairings against b-values
    for i in 0..d {
        let diff = t.at(i, i) - disc.q_value(mu[i]);
        if !diff.denom().is_one() {
            return Ok(CycleKey::Zero);
        }
        for j in 0..d {
            if i == j {
                continue;
            }
            let diff = t.at(i, j) * Q::from(Z::from(2)) - disc.b_value(mu[i], mu[j]);
            if !diff.denom().is_one() {
                return Ok(CycleKey::Zero);
            }
        }
    }

    let gens = gl_generators(d);
    let start: Node = (
        {
            let mut f = Vec::with_capacity(d * d);
            for i in 0..d {
                for j in 0..d {
                    f.push(t.at(i, j).clone());
                }
            }
            f
        },
        mu.to_vec(),
    );
    let slack = Q::from(Z::from(4));
    let mut best = start;
    loop {
        let ceiling = node_trace(d, &best.0) + &slack;
        let mut seen: HashSet<Node> = HashSet::new();
        let mut queue: VecDeque<Node> = VecDeque::new();
        seen.insert(best.clone());
        queue.push_back(best.clone());
        let mut round_best = best.clone();
        while let Some(node) = queue.pop_front() {
            for g in &gens {
                let next = apply_subst(&disc, d, &node, g);
                if node_trace(d, &next.0) > ceiling {
                    continue;
                }
                if seen.contains(&next) {
                    continue;
                }
                if seen.len() >= ORBIT_CAP {
                    return Err(Error::Unsupported(
                        "canonicalization orbit exceeds the node cap".into(),
                    ));
                }
                if node_cmp(d, &next, &round_best) == std::cmp::Ordering::Less {
                    round_best = next.clone();
                }
                seen.insert(next.clone());
                queue.push_back(next);
            }
        }
        if round_best == best {
            break;
        }
        best = round_best;
    }
    Ok(CycleKey::Cls { d, t: best.0, mu: best.1 })
}

// ---------------------------------------------------------------------------
// Formal series
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct FormalSeries<C: Coeff> {
    lattice: QuadLattice,
    genus: usize,
    trunc: Q,
    coeffs: BTreeMap<CycleKey, C>,
}

impl<C: Coeff> FormalSeries<C> {
    pub fn new(lattice: &QuadLattice, genus: usize, trunc: Q) -> FormalSeries<C> {
        FormalSeries { lattice: lattice.clone(), genus, trunc, coeffs: BTreeMap::new() }
    }

    /// The genus-0 unit: a single empty index with coefficient one.
    pub fn unit(lattice: &QuadLattice, trunc: Q) -> FormalSeries<C> {
        let mut s = FormalSeries::new(lattice, 0, trunc);
        s.coeffs.insert(CycleKey::Cls { d: 0, t: vec![], mu: vec![] }, C::one());
        s
    }

    pub fn lattice(&self) -> &QuadLattice {
        &self.lattice
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn trunc(&self) -> &Q {
        &self.trunc
    }

    pub fn support(&self) -> impl Iterator<Item = (&CycleKey, &C)> {
        self.coeffs.iter()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn get(&self, key: &CycleKey) -> C {
        self.coeffs.get(key).cloned().unwrap_or_else(C::zero)
    }

    /// Canonicalize and accumulate; zero classes and zero coefficients drop.
    pub fn add_term(&mut self, t: &QMat, mu: &[usize], c: C) -> Result<()> {
        if mu.len() != self.genus {
            return Err(Error::Dimension("tuple length vs genus".into()));
        }
        let key = canonicalize(&self.lattice, t, mu)?;
        if key == CycleKey::Zero {
            return Ok(());
        }
        if key.trace() > self.trunc {
            return Err(Error::Verify(format!(
                "term of trace {} beyond the bound {}",
                key.trace(),
                self.trunc
            )));
        }
        self.accumulate(key, c);
        Ok(())
    }

    fn accumulate(&mut self, key: CycleKey, c: C) {
        if c.is_zero() || key == CycleKey::Zero {
            return;
        }
        let cur = self.coeffs.get(&key);
        let next = match cur {
            Some(v) => v.add(&c),
            None => c,
        };
        if next.is_zero() {
            self.coeffs.remove(&key);
        } else {
            self.coeffs.insert(key, next);
        }
    }

    pub fn equal(&self, other: &FormalSeries<C>) -> bool {
        self.genus == other.genus && self.coeffs == other.coeffs
    }
}

// ---------------------------------------------------------------------------
// Intersection product
// ---------------------------------------------------------------------------

/// Values s on the grid base + Z/2 with s^2 <= bound, by outward scan.
fn grid_values(base: &Q, bound: &Q) -> Vec<Q> {
    let half = Q::new(Z::one(), Z::from(2));
    // start near the minimizer of |base + k/2|
    let k0 = (-(base.clone()) / &half).round().to_integer();
    let mut out = Vec::new();
    let mut k = k0.clone();
    loop {
        let s = base + Q::new(k.clone(), Z::from(2));
        if &s * &s > *bound {
            break;
        }
        out.push(s);
        k += 1;
    }
    let mut k: Z = k0 - 1;
    loop {
        let s = base + Q::new(k.clone(), Z::from(2));
        if &s * &s > *bound {
            break;
        }
        out.push(s);
        k -= 1;
    }
    out.sort();
    out
}

/// Intersection product: coefficients multiply over all positive
/// semidefinite completions of the block-diagonal moment matrix, with the
/// off-diagonal block running over the congruence grid within the
/// Cauchy-Schwarz box.
pub fn intersect<C: Coeff>(
    a: &FormalSeries<C>,
    b: &FormalSeries<C>,
    trunc: &Q,
) -> Result<FormalSeries<C>> {
    if a.lattice.gram() != b.lattice.gram() {
        return Err(Error::Verify("intersection of series over different lattices".into()));
    }
    if trunc > &a.trunc || trunc > &b.trunc {
        return Err(Error::Verify("product bound exceeds an input bound".into()));
    }
    let da = a.genus;
    let db = b.genus;
    let disc = a.lattice.discriminant_form();
    let mut out = FormalSeries::new(&a.lattice, da + db, trunc.clone());
    for (ka, ca) in &a.coeffs {
        let (ta, mua) = match ka {
            CycleKey::Cls { t, mu, .. } => (t, mu),
            CycleKey::Zero => continue,
        };
        for (kb, cb) in &b.coeffs {
            let (tb, mub) = match kb {
                CycleKey::Cls { t, mu, .. } => (t, mu),
                CycleKey::Zero => continue,
            };
            let tr = ka.trace() + kb.trace();
            if tr > *trunc {
                continue;
            }
            let coeff = ca.mul(cb);
            if coeff.is_zero() {
                continue;
            }
            // per-cell grids for the off-diagonal block
            let mut cells: Vec<Vec<Q>> = Vec::with_capacity(da * db);
            for i in 0..da {
                for j in 0..db {
                    let base = disc.b_value(mua[i], mub[j]) / Q::from(Z::from(2));
                    let bound = &ta[i * da + i] * &tb[j * db + j];
                    cells.push(grid_values(&base, &bound));
                }
            }
            if cells.iter().any(|c| c.is_empty()) {
                continue;
            }
            let mut pick = vec![0usize; cells.len()];
            let mut mu = mua.clone();
            mu.extend_from_slice(mub);
            'outer: loop {
                // assemble the full moment matrix for the current picks
                let d = da + db;
                let tfull = QMat::from_fn(d, d, |i, j| {
                    if i < da && j < da {
                        ta[i * da + j].clone()
                    } else if i >= da && j >= da {
                        tb[(i - da) * db + (j - da)].clone()
                    } else if i < da {
                        cells[i * db + (j - da)][pick[i * db + (j - da)]].clone()
                    } else {
                        cells[j * db + (i - da)][pick[j * db + (i - da)]].clone()
                    }
                });
                if is_psd(&tfull) {
                    let key = canonicalize(&a.lattice, &tfull, &mu)?;
                    out.accumulate(key, coeff.clone());
                }
                // advance the odometer over cell picks
                let mut idx = 0;
                loop {
                    if idx == cells.len() {
                        break 'outer;
                    }
                    pick[idx] += 1;
                    if pick[idx] < cells[idx].len() {
                        break;
                    }
                    pick[idx] = 0;
                    idx += 1;
                }
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Pullback along a self-dual summand
// ---------------------------------------------------------------------------

/// Pull a series over L (+) K back to L, for K positive definite and
/// self-dual: coefficient at (T, mu) collects R_K(S) * c(T + S, mu) over all
/// psd blocks S on K's moment grid.
pub fn pullback<C: Coeff>(
    sharp: &FormalSeries<C>,
    l: &QuadLattice,
    k: &QuadLattice,
    trunc: &Q,
) -> Result<FormalSeries<C>> {
    if !k.is_positive_definite() || !k.is_selfdual() {
        return Err(Error::Verify("summand is not positive definite self-dual".into()));
    }
    let sum = l.direct_sum(k);
    if sum.gram() != sharp.lattice.gram() {
        return Err(Error::Verify("series is not over the expected direct sum".into()));
    }
    if trunc > &sharp.trunc {
        return Err(Error::Verify("pullback bound exceeds the input bound".into()));
    }
    let d = sharp.genus;
    let disc_sum = sharp.lattice.discriminant_form();
    let disc_l = l.discriminant_form();
    let nl = l.rank();
    // self-duality of K identifies the coset groups
    let mut to_l = Vec::with_capacity(disc_sum.order());
    for i in 0..disc_sum.order() {
        let rep = disc_sum.rep(i);
        to_l.push(disc_l.index_of(&rep[..nl])?);
    }

    let mut out = FormalSeries::new(l, d, trunc.clone());
    let zero_tuple = vec![0usize; d];
    for (ks, cs) in &sharp.coeffs {
        let (ts, mus) = match ks {
            CycleKey::Cls { t, mu, .. } => (t, mu),
            CycleKey::Zero => continue,
        };
        if ks.trace() > *trunc {
            continue;
        }
        let mu_l: Vec<usize> = mus.iter().map(|&m| to_l[m]).collect();
        let tsharp = QMat::from_fn(d, d, |i, j| ts[i * d + j].clone());
        for s in enumerate_selfdual_blocks(&tsharp, d) {
            let t = tsharp.sub(&s);
            if !is_psd(&t) {
                continue;
            }
            let r = if d == 0 { 1 } else { representation_number(k, &s, &zero_tuple, None)? };
            if r == 0 {
                continue;
            }
            let key = canonicalize(l, &t, &mu_l)?;
            out.accumulate(key, C::from_count(r).mul(cs));
        }
    }
    Ok(out)
}

/// All symmetric psd candidates S with integer diagonal, half-integer
/// pairings, 0 <= S_ii <= T_ii and S_ij^2 <= S_ii S_jj.
fn enumerate_selfdual_blocks(tsharp: &QMat, d: usize) -> Vec<QMat> {
    if d == 0 {
        return vec![QMat::zero(0, 0)];
    }
    let mut diag_ranges: Vec<Vec<i64>> = Vec::with_capacity(d);
    for i in 0..d {
        let cap = tsharp.at(i, i).floor().to_integer().to_i64().unwrap_or(0);
        diag_ranges.push((0..=cap.max(0)).collect());
    }
    let mut out = Vec::new();
    let mut diag_pick = vec![0usize; d];
    loop {
        let diag: Vec<i64> = (0..d).map(|i| diag_ranges[i][diag_pick[i]]).collect();
        // off-diagonal cells on Z/2 within Cauchy-Schwarz bounds
        let mut cells: Vec<Vec<Q>> = Vec::new();
        for i in 0..d {
            for j in i + 1..d {
                let bound = Q::from(Z::from(diag[i] * diag[j]));
                cells.push(grid_values(&qz(0), &bound));
            }
        }
        let mut pick = vec![0usize; cells.len()];
        loop {
            let s = QMat::from_fn(d, d, |i, j| {
                if i == j {
                    Q::from(Z::from(diag[i]))
                } else {
                    let (a, b) = if i < j { (i, j) } else { (j, i) };
                    let idx = a * d - a * (a + 1) / 2 + (b - a - 1);
                    cells[idx][pick[idx]].clone()
                }
            });
            if is_psd(&s) {
                out.push(s);
            }
            let mut idx = 0;
            loop {
                if idx == cells.len() {
                    break;
                }
                pick[idx] += 1;
                if pick[idx] < cells[idx].len() {
                    break;
                }
                pick[idx] = 0;
                idx += 1;
            }
            if idx == cells.len() {
                break;
            }
        }
        let mut idx = 0;
        loop {
            if idx == d {
                return out;
            }
            diag_pick[idx] += 1;
            if diag_pick[idx] < diag_ranges[idx].len() {
                break;
            }
            diag_pick[idx] = 0;
            idx += 1;
        }
    }
}

// ---------------------------------------------------------------------------
// Translation action
// ---------------------------------------------------------------------------

/// The unipotent word for the pair (x, y) of integer d-vectors at genus d+1:
/// a substitution token followed by an upper shear.
pub fn translation_word(d: usize, x: &[i64], y: &[i64]) -> MpWord {
    let g = d + 1;
    let a_prime = IMat::from_fn(g, g, |r, c| {
        if r == c {
            1
        } else if c == d && r < d {
            -y[r]
        } else {
            0
        }
    });
    let s_prime = IMat::from_fn(g, g, |r, c| {
        if r < d && c == d {
            x[r]
        } else if c < d && r == d {
            x[c]
        } else {
            0
        }
    });
    MpWord(vec![MpGen::Diag(a_prime, false), MpGen::Upper(s_prime)])
}

#[derive(Debug)]
pub struct TranslationReport {
    pub keys_checked: usize,
    pub vectors_compared: usize,
}

/// Apply the translation (x, y) to a genus-(d+1) series.
///
/// Two computations run in parallel: the explicit phase-and-substitution
/// formula (phase from the last column of each moment matrix, index
/// substitution by A = [[I, y], [0, 1]]), and the matrix of the dual Weil
/// action for the same word. They must agree exactly on every coefficient
/// vector touched; any discrepancy is an error, never a silent repair.
pub fn translation_action(
    series: &FormalSeries<Cyclo>,
    x: &[i64],
    y: &[i64],
) -> Result<(FormalSeries<Cyclo>, TranslationReport)> {
    let g = series.genus;
    if g == 0 || x.len() != g - 1 || y.len() != g - 1 {
        return Err(Error::Dimension("translation vectors vs genus".into()));
    }
    let d = g - 1;
    let lat = &series.lattice;
    let space = WeilSpace::new(lat, g)?;
    let n = space.conductor();
    let disc = lat.discriminant_form();
    let word = translation_word(d, x, y);
    let omega_star = space.contragredient_matrix(&word)?;

    // A = [[I_d, y], [0, 1]] acting on tuples from the right
    let subst = IMat::from_fn(g, g, |r, c| {
        if r == c {
            1
        } else if c == d && r < d {
            y[r]
        } else {
            0
        }
    });

    let mut out = FormalSeries::new(lat, g, series.trunc.clone());
    let mut keys_checked = 0;
    let mut vectors_compared = 0;
    for (key, c) in &series.coeffs {
        let (tflat, mu) = match key {
            CycleKey::Cls { t, mu, .. } => (t, mu),
            CycleKey::Zero => continue,
        };
        let tmat = QMat::from_fn(g, g, |i, j| tflat[i * g + j].clone());
        // phase exp(2 pi i x . alpha) with alpha_i = 2 T_{i,d}
        let mut xa = qz(0);
        for i in 0..d {
            xa += Q::from(Z::from(x[i])) * tmat.at(i, d) * Q::from(Z::from(2));
        }
        let phase = Cyclo::e_frac(n, &xa)?;
        // rational phases (always +/-1) descend to conductor 1, so identity
        // translations return coefficients bit-identical to the input
        let phase = match phase.is_rational() {
            Some(q) => Cyclo::from_q(1, q),
            None => phase,
        };

        // explicit side: substituted matrix and tuple
        let t_new = subst.to_qmat().transpose().mul(&tmat).mul(&subst.to_qmat());
        let mu_new: Vec<usize> = (0..g)
            .map(|k| {
                let mut acc = disc.zero();
                for i in 0..g {
                    let ce = subst.at(i, k);
                    if ce != 0 {
                        acc = disc.add(acc, disc.scalar_mul(ce, mu[i]));
                    }
                }
                acc
            })
            .collect();
        let target = canonicalize(lat, &t_new, &mu_new)?;
        debug_assert_eq!(&target, key, "substitution must preserve the class");
        out.accumulate(target, Coeff::mul(&phase, c));

        // cross-validation: dual Weil matrix against the formula, on the
        // whole coefficient vector attached to this moment matrix
        let dim = space.dim();
        let mut v = Vec::with_capacity(dim);
        for flat in 0..dim {
            let tuple = space.tuple_of(flat);
            let k = canonicalize(lat, &tmat, &tuple)?;
            v.push(series.get(&k).lift(n)?);
        }
        let w = omega_star.mul_vec(&v);
        for flat in 0..dim {
            let tuple = space.tuple_of(flat);
            let k = canonicalize(lat, &t_new, &tuple)?;
            let expected = Coeff::mul(&phase, &series.get(&k));
            if !cyclo_eq(&w[flat], &expected) {
                return Err(Error::Verify(format!(
                    "translation mismatch at flat index {flat} of key {key:?}"
                )));
            }
            vectors_compared += 1;
        }
        keys_checked += 1;
    }
    Ok((out, TranslationReport { keys_checked, vectors_compared }))
}

// ---------------------------------------------------------------------------
// Pullback vs product consistency
// ---------------------------------------------------------------------------

#[derive(Debug)]
pub struct HomReport {
    pub ok: bool,
    pub witness: Option<String>,
}

/// pullback(a * b) must equal pullback(a) * pullback(b), coefficientwise.
pub fn verify_pullback_ring_hom<C: Coeff>(
    l: &QuadLattice,
    k: &QuadLattice,
    a: &FormalSeries<C>,
    b: &FormalSeries<C>,
    trunc: &Q,
) -> Result<HomReport> {
    let prod = intersect(a, b, trunc)?;
    let lhs = pullback(&prod, l, k, trunc)?;
    let pa = pullback(a, l, k, trunc)?;
    let pb = pullback(b, l, k, trunc)?;
    let rhs = intersect(&pa, &pb, trunc)?;
    if lhs.equal(&rhs) {
        return Ok(HomReport { ok: true, witness: None });
    }
    let mut witness = None;
    for (key, v) in &lhs.coeffs {
        let o = rhs.get(key);
        if &o != v {
            witness = Some(format!("{key:?}: {v:?} vs {o:?}"));
            break;
        }
    }
    if witness.is_none() {
        for (key, v) in &rhs.coeffs {
            if lhs.coeffs.get(key).is_none() {
                witness = Some(format!("{key:?}: absent vs {v:?}"));
                break;
            }
        }
    }
    Ok(HomReport { ok: false, witness })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::catalog;
    use crate::mat::{qq, qz};

    fn a1() -> QuadLattice {
        catalog::by_name("A1").unwrap()
    }

    fn e8() -> QuadLattice {
        catalog::by_name("E8").unwrap()
    }

    #[test]
    fn canonical_zero_rules() {
        let l = a1();
        // negative definite 1x1: not psd
        let t = QMat::from_rows(vec![vec![qz(-1)]]);
        assert_eq!(canonicalize(&l, &t, &[0]).unwrap(), CycleKey::Zero);
        // congruence violation: q(mu=1) = 1/4, T = 1/2
        let t = QMat::from_rows(vec![vec![qq(1, 2)]]);
        assert_eq!(canonicalize(&l, &t, &[1]).unwrap(), CycleKey::Zero);
        // valid: T = 5/4 on coset 1
        let t = QMat::from_rows(vec![vec![qq(5, 4)]]);
        assert!(matches!(canonicalize(&l, &t, &[1]).unwrap(), CycleKey::Cls { .. }));
    }

    #[test]
    fn canonical_gl_invariance() {
        let l = a1();
        // d = 2 moment with a nontrivial coset pair
        let t = QMat::from_rows(vec![vec![qz(1), qq(1, 2)], vec![qq(1, 2), qq(5, 4)]]);
        let k1 = canonicalize(&l, &t, &[0, 1]).unwrap();
        // substitute by A = [[1, 1], [0, 1]]
        let a = IMat::from_rows(vec![vec![1, 1], vec![0, 1]]);
        let aq = a.to_qmat();
        let t2 = aq.transpose().mul(&t).mul(&aq);
        let disc = l.discriminant_form();
        let mu2 = vec![0, disc.add(disc.scalar_mul(1, 0), 1)];
        let k2 = canonicalize(&l, &t2, &mu2).unwrap();
        assert_eq!(k1, k2);
        // and by a sign flip
        let f = IMat::from_rows(vec![vec![-1, 0], vec![0, 1]]);
        let fq = f.to_qmat();
        let t3 = fq.transpose().mul(&t).mul(&fq);
        let mu3 = vec![disc.neg(0), 1];
        let k3 = canonicalize(&l, &t3, &mu3).unwrap();
        assert_eq!(k1, k3);
    }

    #[test]
    fn canonical_idempotent() {
        let l = a1();
        let t = QMat::from_rows(vec![vec![qz(2), qz(1)], vec![qz(1), qz(3)]]);
        let k = canonicalize(&l, &t, &[0, 0]).unwrap();
        if let CycleKey::Cls { d, t: tf, mu } = &k {
            let tm = QMat::from_fn(*d, *d, |i, j| tf[i * d + j].clone());
            let k2 = canonicalize(&l, &tm, mu).unwrap();
            assert_eq!(k, k2);
        } else {
            panic!("expected a class");
        }
    }

    #[test]
    fn intersect_e8_roots() {
        let l = e8();
        let mut a: FormalSeries<Q> = FormalSeries::new(&l, 1, qz(3));
        a.add_term(&QMat::from_rows(vec![vec![qz(1)]]), &[0], qz(1)).unwrap();
        let p = intersect(&a, &a, &qz(3)).unwrap();
        // completions [[1, s], [s, 1]] with s in {0, 1/2, 1} after sign
        // normalization, each +/- pair merging into one class
        assert_eq!(p.len(), 3);
        let mut coeffs: Vec<Q> = p.support().map(|(_, c)| c.clone()).collect();
        coeffs.sort();
        assert_eq!(coeffs, vec![qz(1), qz(2), qz(2)]);
    }

    #[test]
    fn intersect_unit() {
        let l = a1();
        let mut a: FormalSeries<Q> = FormalSeries::new(&l, 1, qz(3));
        a.add_term(&QMat::from_rows(vec![vec![qq(5, 4)]]), &[1], qz(7)).unwrap();
        let u = FormalSeries::unit(&l, qz(3));
        let p = intersect(&u, &a, &qz(3)).unwrap();
        assert!(p.equal(&a));
        let p = intersect(&a, &u, &qz(3)).unwrap();
        assert!(p.equal(&a));
    }

    #[test]
    fn intersect_commutes() {
        let l = a1();
        let mut a: FormalSeries<Q> = FormalSeries::new(&l, 1, qz(3));
        a.add_term(&QMat::from_rows(vec![vec![qz(1)]]), &[0], qz(1)).unwrap();
        a.add_term(&QMat::from_rows(vec![vec![qq(1, 4)]]), &[1], qz(3)).unwrap();
        let mut b: FormalSeries<Q> = FormalSeries::new(&l, 1, qz(3));
        b.add_term(&QMat::from_rows(vec![vec![qz(2)]]), &[0], qz(5)).unwrap();
        let ab = intersect(&a, &b, &qz(3)).unwrap();
        let ba = intersect(&b, &a, &qz(3)).unwrap();
        // products agree after canonicalization (swap is a permutation)
        assert_eq!(ab.len(), ba.len());
        for (k, v) in ab.support() {
            assert_eq!(&ba.get(k), v, "coefficient at {k:?}");
        }
    }

    #[test]
    fn pullback_delta_examples() {
        let l = a1();
        let k = e8();
        let sum = l.direct_sum(&k);
        // delta at the zero moment pulls back to itself
        let mut s: FormalSeries<Q> = FormalSeries::new(&sum, 1, qz(2));
        s.add_term(&QMat::from_rows(vec![vec![qz(0)]]), &[0], qz(1)).unwrap();
        let p = pullback(&s, &l, &k, &qz(2)).unwrap();
        assert_eq!(p.len(), 1);
        let zero_key = canonicalize(&l, &QMat::from_rows(vec![vec![qz(0)]]), &[0]).unwrap();
        assert_eq!(p.get(&zero_key), qz(1));
        // delta at T = (1): T = (1) keeps coefficient 1, T = (0) gets 240
        let mut s: FormalSeries<Q> = FormalSeries::new(&sum, 1, qz(2));
        s.add_term(&QMat::from_rows(vec![vec![qz(1)]]), &[0], qz(1)).unwrap();
        let p = pullback(&s, &l, &k, &qz(2)).unwrap();
        let one_key = canonicalize(&l, &QMat::from_rows(vec![vec![qz(1)]]), &[0]).unwrap();
        assert_eq!(p.get(&one_key), qz(1));
        assert_eq!(p.get(&zero_key), qz(240));
    }

    #[test]
    fn translation_identity_on_zero_vectors() {
        let l = a1();
        let mut s: FormalSeries<Cyclo> = FormalSeries::new(&l, 2, qz(4));
        s.add_term(
            &QMat::from_rows(vec![vec![qz(1), qq(1, 2)], vec![qq(1, 2), qq(5, 4)]]),
            &[0, 1],
            Cyclo::one(1),
        )
        .unwrap();
        let (t, rep) = translation_action(&s, &[0], &[0]).unwrap();
        assert!(t.equal(&s));
        assert_eq!(rep.keys_checked, 1);
    }

    #[test]
    fn translation_phase_only() {
        let l = a1();
        // mu = (1, 1): pairing 1/2, so alpha = 1/2 and x = 1 flips the sign
        let t = QMat::from_rows(vec![vec![qq(5, 4), qq(1, 4)], vec![qq(1, 4), qq(5, 4)]]);
        let mut s: FormalSeries<Cyclo> = FormalSeries::new(&l, 2, qz(4));
        s.add_term(&t, &[1, 1], Cyclo::one(1)).unwrap();
        let (out, _) = translation_action(&s, &[1], &[0]).unwrap();
        let key = canonicalize(&l, &t, &[1, 1]).unwrap();
        let got = out.get(&key);
        let minus_one = Cyclo::from_int(1, -1);
        assert!(cyclo_eq(&got, &minus_one), "expected -1, got {got:?}");
    }

    #[test]
    fn translation_with_substitution() {
        let l = a1();
        let t = QMat::from_rows(vec![vec![qz(1), qq(1, 2)], vec![qq(1, 2), qq(5, 4)]]);
        let mut s: FormalSeries<Cyclo> = FormalSeries::new(&l, 2, qz(8));
        s.add_term(&t, &[0, 1], Cyclo::one(1)).unwrap();
        // x = 0: pure substitution, coefficients move but keep value
        let (out, rep) = translation_action(&s, &[0], &[1]).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(rep.keys_checked, 1);
        let key = canonicalize(&l, &t, &[0, 1]).unwrap();
        assert!(cyclo_eq(&out.get(&key), &Cyclo::one(1)));
        // mixed x and y
        let (out2, _) = translation_action(&s, &[1], &[1]).unwrap();
        assert_eq!(out2.len(), 1);
    }

    #[test]
    fn pullback_hom_small() {
        let l = a1();
        let k = e8();
        let sum = l.direct_sum(&k);
        let mut a: FormalSeries<Q> = FormalSeries::new(&sum, 1, qz(2));
        a.add_term(&QMat::from_rows(vec![vec![qz(1)]]), &[0], qz(1)).unwrap();
        let mut b: FormalSeries<Q> = FormalSeries::new(&sum, 1, qz(2));
        b.add_term(&QMat::from_rows(vec![vec![qq(1, 4)]]), &[1], qz(1)).unwrap();
        let rep = verify_pullback_ring_hom(&l, &k, &a, &b, &qz(2)).unwrap();
        assert!(rep.ok, "witness: {:?}", rep.witness);
    }
}
