//! Theta series and representation numbers by exact lattice-point
//! enumeration.
//!
//! The enumerator is a pruned tree search driven by an exact LDL^T splitting
//! of the quadratic form. All comparisons are between integers: rational data
//! (the LDL entries and the coset offsets) is cleared to a common scaled
//! denominator up front, so no floating point ever decides whether a vector
//! is inside the bound. A second, independent routine counts points in a
//! plain coordinate box for cross-checks.
//!
//! Tuple (higher-genus) tables first enumerate the per-coset vector lists,
//! predict the exact number of leaf visits from the genus-1 marginals, and
//! refuse to start jobs that exceed the enumeration budget. The budget can
//! be overridden through QLAT_ENUM_BUDGET or per call.

use std::collections::{BTreeMap, HashMap};
use std::sync::Mutex;

use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use once_cell::sync::Lazy;
use rayon::prelude::*;

use crate::lattice::{DiscriminantForm, QuadLattice};
use crate::mat::{QMat, Q, Z};
use crate::weil::{word_orbit, CTau, MpWord, WeilSpace};
use crate::{Error, Result};

pub const DEFAULT_ENUM_BUDGET: u128 = 3_000_000_000;

fn enum_budget(override_budget: Option<u128>) -> u128 {
    if let Some(b) = override_budget {
        return b;
    }
    match std::env::var("QLAT_ENUM_BUDGET") {
        Ok(s) => s.trim().parse().unwrap_or(DEFAULT_ENUM_BUDGET),
        Err(_) => DEFAULT_ENUM_BUDGET,
    }
}

/// Key for one coefficient: flat coset-tuple index plus the scaled moment
/// data [lev*Q(x_1), ..., lev*Q(x_g), lev*b(x_1,x_2), lev*b(x_1,x_3), ...]
/// (diagonal first, then off-diagonal pairs in lex order).
pub type CoeffKey = (usize, Vec<i64>);

#[derive(Clone, Debug)]
pub struct ThetaTable {
    pub genus: usize,
    /// scaling denominator, the lattice level
    pub lev: i64,
    /// inclusive bound on lev * trace
    pub max_trace_scaled: i64,
    /// number of cosets, for flat-index decoding
    pub disc_order: usize,
    pub counts: BTreeMap<CoeffKey, u128>,
}

impl ThetaTable {
    pub fn tuple_flat(order: usize, tuple: &[usize]) -> usize {
        let mut f = 0usize;
        for &i in tuple {
            debug_assert!(i < order);
            f = f * order + i;
        }
        f
    }

    pub fn tuple_digits(order: usize, mut flat: usize, genus: usize) -> Vec<usize> {
        let mut t = vec![0usize; genus];
        for k in (0..genus).rev() {
            t[k] = flat % order;
            flat /= order;
        }
        t
    }

    /// Decode a scaled key into the rational moment matrix T
    /// (T_ii = Q(x_i), T_ij = b(x_i,x_j)/2).
    pub fn key_to_moment(&self, key: &[i64]) -> QMat {
        let g = self.genus;
        let lev = Z::from(self.lev);
        let mut m = QMat::zero(g, g);
        for i in 0..g {
            m.set(i, i, Q::new(Z::from(key[i]), lev.clone()));
        }
        let mut idx = g;
        for i in 0..g {
            for j in i + 1..g {
                let half = Q::new(Z::from(key[idx]), &lev * Z::from(2));
                m.set(i, j, half.clone());
                m.set(j, i, half);
                idx += 1;
            }
        }
        m
    }

    /// Inverse of key_to_moment; fails when T is not representable on the
    /// lattice's scaling grid.
    pub fn moment_to_key(&self, t: &QMat) -> Result<Vec<i64>> {
        let g = self.genus;
        if t.rows() != g || t.cols() != g {
            return Err(Error::Dimension("moment matrix size".into()));
        }
        let lev = Z::from(self.lev);
        let mut key = Vec::with_capacity(g * (g + 1) / 2);
        for i in 0..g {
            let v = t.at(i, i) * Q::from(lev.clone());
            if !v.denom().is_one() {
                return Err(Error::Parse(format!(
                    "diagonal entry {} is not a multiple of 1/{}",
                    t.at(i, i),
                    self.lev
                )));
            }
            key.push(v.numer().to_i64().ok_or_else(|| Error::Parse("entry too large".into()))?);
        }
        for i in 0..g {
            for j in i + 1..g {
                let v = t.at(i, j) * Q::from(&lev * Z::from(2));
                if !v.denom().is_one() {
                    return Err(Error::Parse(format!(
                        "pairing entry {} is not a multiple of 1/{}",
                        t.at(i, j),
                        2 * self.lev
                    )));
                }
                key.push(v.numer().to_i64().ok_or_else(|| Error::Parse("entry too large".into()))?);
            }
        }
        Ok(key)
    }

    pub fn count(&self, flat: usize, key: &[i64]) -> u128 {
        self.counts.get(&(flat, key.to_vec())).copied().unwrap_or(0)
    }

    /// Genus-1 marginal counts per (coset, scaled q), summed over cosets when
    /// asked for the trace profile.
    pub fn trace_profile(&self) -> BTreeMap<i64, u128> {
        let mut out = BTreeMap::new();
        for ((_, key), c) in &self.counts {
            let tr: i64 = key[..self.genus].iter().sum();
            *out.entry(tr).or_insert(0) += c;
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Exact pruned enumeration
// ---------------------------------------------------------------------------

struct FpContext {
    n: usize,
    lev: i64,
    /// per level: numerator of d_i and the integer scale CD/(dden_i*lden_i^2)
    dnum: Vec<i128>,
    dscale: Vec<i128>,
    /// lden_i and the cleared row coefficients lden_i * L_{ji} for j > i
    lden: Vec<i128>,
    lrow: Vec<Vec<i128>>, // lrow[i][j - i - 1]
    /// common denominator of all terms: lev^2 * lcm_i(dden_i * lden_i^2)
    cd_full: i128,
    /// cd_full / lev: converts leaf sums to lev-scaled q values
    q_div: i128,
}

fn big_to_i128(z: &Z) -> Result<i128> {
    z.to_i128()
        .ok_or_else(|| Error::Unsupported("enumeration denominators overflow i128".into()))
}

impl FpContext {
    fn new(lat: &QuadLattice) -> Result<FpContext> {
        if !lat.is_positive_definite() {
            return Err(Error::NotPositiveDefinite);
        }
        let n = lat.rank();
        let lev = lat.level();
        let a = lat.gram().to_qmat().scale(&Q::new(Z::one(), Z::from(2)));
        let (l, d) = crate::mat::ldlt_pd(&a)?;
        let mut lden = vec![Z::one(); n];
        for i in 0..n {
            for j in i + 1..n {
                lden[i] = lden[i].lcm(l.at(j, i).denom());
            }
        }
        // common denominator over levels
        let mut cd = Z::one();
        for i in 0..n {
            cd = cd.lcm(&(d[i].denom() * &lden[i] * &lden[i]));
        }
        let cd_full_big = &cd * Z::from(lev) * Z::from(lev);
        let cd_full = big_to_i128(&cd_full_big)?;
        let mut dnum = Vec::with_capacity(n);
        let mut dscale = Vec::with_capacity(n);
        let mut lrow = Vec::with_capacity(n);
        let mut lden_i128 = Vec::with_capacity(n);
        for i in 0..n {
            let sc = &cd / (d[i].denom() * &lden[i] * &lden[i]);
            dnum.push(big_to_i128(d[i].numer())?);
            dscale.push(big_to_i128(&sc)?);
            let mut row = Vec::new();
            for j in i + 1..n {
                let c = l.at(j, i) * Q::from(lden[i].clone());
                debug_assert!(c.denom().is_one());
                row.push(big_to_i128(c.numer())?);
            }
            lrow.push(row);
            lden_i128.push(big_to_i128(&lden[i])?);
        }
        Ok(FpContext {
            n,
            lev,
            dnum,
            dscale,
            lden: lden_i128,
            lrow,
            cd_full,
            q_div: cd_full / lev as i128,
        })
    }

    /// Visit every x = m + mu with Q(x) <= bound; the visitor receives the
    /// scaled coordinates X = lev * x and q_lev = lev * Q(x). Linear forms
    /// (integer coefficient vectors against X) are accumulated alongside.
    ///
    /// Levels are processed from n-1 (outermost) down to 0. Returns the
    /// number of leaves, or Err when the cap is exhausted.
    fn enumerate<F: FnMut(&[i64], i64, &[i128])>(
        &self,
        offsets_scaled: &[i64], // lev * mu_i
        bound: &Q,              // on Q(x)
        linforms: &[Vec<i64>],
        cap: u128,
        mut visit: F,
    ) -> Result<u128> {
        let n = self.n;
        assert_eq!(offsets_scaled.len(), n);
        let bound_scaled_big = bound * Q::from(Z::from(self.cd_full));
        if !bound_scaled_big.denom().is_one() {
            return Err(Error::Parse(format!(
                "trace bound {bound} is not on the lattice's 1/level grid"
            )));
        }
        let bound_scaled = big_to_i128(bound_scaled_big.numer())?;
        if bound_scaled < 0 {
            return Ok(0);
        }

        let mut xs = vec![0i64; n];
        // cacc[i] = sum over fixed j > i of lrow[i][j-i-1] * X_j
        let mut cacc = vec![0i128; n];
        let mut lfacc = vec![0i128; linforms.len()];
        let mut leaves: u128 = 0;

        // recursive descent via explicit helper
        struct St<'a> {
            ctx: &'a FpContext,
            offs: &'a [i64],
            linforms: &'a [Vec<i64>],
            cap: u128,
        }
        fn descend<F: FnMut(&[i64], i64, &[i128])>(
            st: &St,
            level: isize,
            rem: i128,
            used: i128,
            xs: &mut Vec<i64>,
            cacc: &mut Vec<i128>,
            lfacc: &mut Vec<i128>,
            leaves: &mut u128,
            visit: &mut F,
        ) -> Result<()> {
            let ctx = st.ctx;
            if level < 0 {
                *leaves += 1;
                if *leaves > st.cap {
                    return Err(Error::EnumBudget { needed: *leaves, cap: st.cap });
                }
                let q_lev = (used / ctx.q_div) as i64;
                debug_assert_eq!(used % ctx.q_div, 0);
                visit(xs, q_lev, lfacc);
                return Ok(());
            }
            let i = level as usize;
            let a = ctx.lden[i] * ctx.lev as i128; // coefficient of m in val
            let b0 = ctx.lden[i] * st.offs[i] as i128 + cacc[i];
            // minimizing integer m for |a m + b0|
            let m0 = {
                let q = (-b0).div_euclid(a);
                let v0 = (a * q + b0).abs();
                let v1 = (a * (q + 1) + b0).abs();
                if v0 <= v1 {
                    q
                } else {
                    q + 1
                }
            };
            let term_of = |m: i128| -> i128 {
                let val = a * m + b0;
                ctx.dnum[i] * val * val * ctx.dscale[i]
            };
            let step = |m: i128,
                            xs: &mut Vec<i64>,
                            cacc: &mut Vec<i128>,
                            lfacc: &mut Vec<i128>,
                            leaves: &mut u128,
                            visit: &mut F|
             -> Result<bool> {
                let t = term_of(m);
                if t > rem {
                    return Ok(false);
                }
                let x_scaled = (ctx.lev as i128 * m + st.offs[i] as i128) as i64;
                xs[i] = x_scaled;
                // push contributions of X_i to lower-level centers and forms
                for lower in 0..i {
                    cacc[lower] += ctx.lrow[lower][i - lower - 1] * x_scaled as i128;
                }
                for (k, lf) in st.linforms.iter().enumerate() {
                    lfacc[k] += lf[i] as i128 * x_scaled as i128;
                }
                let r = descend(st, level - 1, rem - t, used + t, xs, cacc, lfacc, leaves, visit);
                for lower in 0..i {
                    cacc[lower] -= ctx.lrow[lower][i - lower - 1] * x_scaled as i128;
                }
                for (k, lf) in st.linforms.iter().enumerate() {
                    lfacc[k] -= lf[i] as i128 * x_scaled as i128;
                }
                r?;
                Ok(true)
            };
            let mut m = m0;
            loop {
                if !step(m, xs, cacc, lfacc, leaves, visit)? {
                    break;
                }
                m += 1;
            }
            let mut m = m0 - 1;
            loop {
                if !step(m, xs, cacc, lfacc, leaves, visit)? {
                    break;
                }
                m -= 1;
            }
            Ok(())
        }

        let st = St { ctx: self, offs: offsets_scaled, linforms, cap };
        descend(
            &st,
            n as isize - 1,
            bound_scaled,
            0,
            &mut xs,
            &mut cacc,
            &mut lfacc,
            &mut leaves,
            &mut visit,
        )?;
        Ok(leaves)
    }
}

/// Gaussian heuristic for the number of lattice points with Q <= m; used only
/// to refuse obviously hopeless jobs before enumerating.
fn point_count_estimate(lat: &QuadLattice, m: f64) -> f64 {
    let n = lat.rank() as f64;
    if m <= 0.0 {
        return 1.0;
    }
    let det = (lat.det() as f64).abs().sqrt();
    let logv = (n / 2.0) * (2.0 * std::f64::consts::PI * m).ln() - ln_gamma(n / 2.0 + 1.0);
    (logv.exp() / det) * 2.0 + 1e4
}

fn ln_gamma(x: f64) -> f64 {
    // Stirling with correction terms; adequate for an estimate
    let coeffs = [
        76.18009172947146,
        -86.50532032941677,
        24.01409824083091,
        -1.231739572450155,
        0.1208650973866179e-2,
        -0.5395239384953e-5,
    ];
    let mut y = x;
    let tmp = x + 5.5 - (x + 0.5) * (x + 5.5).ln();
    let mut ser = 1.000000000190015;
    for c in coeffs {
        y += 1.0;
        ser += c / y;
    }
    -tmp + (2.5066282746310005 * ser / x).ln()
}

// ---------------------------------------------------------------------------
// Table construction
// ---------------------------------------------------------------------------

static TABLE_CACHE: Lazy<Mutex<HashMap<(String, usize, i64), std::sync::Arc<ThetaTable>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

fn gram_fingerprint(lat: &QuadLattice) -> String {
    let g = lat.gram();
    let mut s = format!("{}x{}", g.rows(), g.cols());
    for i in 0..g.rows() {
        for j in 0..g.cols() {
            s.push(',');
            s.push_str(&g.at(i, j).to_string());
        }
    }
    s
}

/// Scaled inclusive trace bound; requires max_trace on the 1/level grid.
fn scale_trace(lat: &QuadLattice, max_trace: &Q) -> Result<i64> {
    let v = max_trace * Q::from(Z::from(lat.level()));
    if !v.denom().is_one() {
        return Err(Error::Parse(format!(
            "trace bound {max_trace} is not a multiple of 1/{}",
            lat.level()
        )));
    }
    v.numer().to_i64().ok_or_else(|| Error::Parse("trace bound too large".into()))
}

/// All theta coefficients of genus g up to the given trace, as exact counts.
pub fn theta_table(
    lat: &QuadLattice,
    genus: usize,
    max_trace: &Q,
    budget: Option<u128>,
) -> Result<std::sync::Arc<ThetaTable>> {
    if genus == 0 {
        return Err(Error::BadGenus);
    }
    let max_scaled = scale_trace(lat, max_trace)?;
    let cache_key = (gram_fingerprint(lat), genus, max_scaled);
    if let Some(t) = TABLE_CACHE.lock().unwrap().get(&cache_key) {
        return Ok(t.clone());
    }
    let table = build_table(lat, genus, max_trace, budget)?;
    let arc = std::sync::Arc::new(table);
    TABLE_CACHE
        .lock()
        .unwrap()
        .insert(cache_key, arc.clone());
    Ok(arc)
}

fn build_table(
    lat: &QuadLattice,
    genus: usize,
    max_trace: &Q,
    budget: Option<u128>,
) -> Result<ThetaTable> {
    let cap = enum_budget(budget);
    let disc = lat.discriminant_form();
    let order = disc.order();
    let ctx = FpContext::new(lat)?;
    let lev = ctx.lev;
    let max_scaled = scale_trace(lat, max_trace)?;

    // volume-based sanity check before the genus-1 sweep
    let est = point_count_estimate(lat, max_trace.to_f64().unwrap_or(f64::INFINITY));
    if est > cap as f64 {
        return Err(Error::EnumBudget { needed: est as u128, cap });
    }

    // genus-1 sweep: dense buckets per coset
    let nbuckets = (max_scaled + 1) as usize;
    let mut buckets: Vec<Vec<u128>> = vec![vec![0; nbuckets]; order];
    let mut spent: u128 = 0;
    for ci in 0..order {
        let offs = scaled_offsets(&disc, ci, lev)?;
        let used = ctx.enumerate(&offs, max_trace, &[], cap - spent, |_, q_lev, _| {
            buckets[ci][q_lev as usize] += 1;
        })?;
        spent += used;
    }

    if genus == 1 {
        let mut counts = BTreeMap::new();
        for (ci, b) in buckets.iter().enumerate() {
            for (q, &c) in b.iter().enumerate() {
                if c > 0 {
                    counts.insert((ci, vec![q as i64]), c);
                }
            }
        }
        return Ok(ThetaTable {
            genus: 1,
            lev,
            max_trace_scaled: max_scaled,
            disc_order: order,
            counts,
        });
    }

    // tuple-visit prediction from the genus-1 marginals (exact)
    let marginal: Vec<u128> = (0..nbuckets)
        .map(|q| buckets.iter().map(|b| b[q]).sum())
        .collect();
    let predicted = predict_tuple_visits(&marginal, genus);
    if spent.saturating_add(predicted) > cap {
        return Err(Error::EnumBudget { needed: spent.saturating_add(predicted), cap });
    }

    // per-coset vector lists, sorted by scaled q
    let mut lists: Vec<Vec<(i64, Vec<i64>)>> = Vec::with_capacity(order);
    for ci in 0..order {
        let offs = scaled_offsets(&disc, ci, lev)?;
        let mut v: Vec<(i64, Vec<i64>)> = Vec::new();
        ctx.enumerate(&offs, max_trace, &[], cap, |xs, q_lev, _| {
            v.push((q_lev, xs.to_vec()));
        })?;
        v.sort();
        lists.push(v);
    }

    let counts = assemble_tuples(lat, genus, order, lev, max_scaled, &lists)?;
    Ok(ThetaTable { genus, lev, max_trace_scaled: max_scaled, disc_order: order, counts })
}

fn scaled_offsets(disc: &DiscriminantForm, coset: usize, lev: i64) -> Result<Vec<i64>> {
    disc.rep(coset)
        .iter()
        .map(|q| {
            let v = q * Q::from(Z::from(lev));
            if !v.denom().is_one() {
                return Err(Error::Verify("coset offset off the level grid".into()));
            }
            v.numer()
                .to_i64()
                .ok_or_else(|| Error::Unsupported("offset too large".into()))
        })
        .collect()
}

fn predict_tuple_visits(marginal: &[u128], genus: usize) -> u128 {
    // sum over t_1 + ... + t_g <= M of prod marginal[t_i], by iterated
    // truncated convolution of cumulative counts
    let m = marginal.len();
    let mut acc: Vec<u128> = marginal.to_vec(); // visits with given partial trace
    for _ in 1..genus {
        let mut next = vec![0u128; m];
        for t1 in 0..m {
            if acc[t1] == 0 {
                continue;
            }
            for t2 in 0..m - t1 {
                next[t1 + t2] = next[t1 + t2].saturating_add(acc[t1].saturating_mul(marginal[t2]));
            }
        }
        acc = next;
    }
    acc.iter().fold(0u128, |a, &b| a.saturating_add(b))
}

/// Assemble genus-g coefficients from per-coset vector lists. Parallelism is
/// over the outermost component; merge order is deterministic (BTreeMap).
fn assemble_tuples(
    lat: &QuadLattice,
    genus: usize,
    order: usize,
    lev: i64,
    max_scaled: i64,
    lists: &[Vec<(i64, Vec<i64>)>],
) -> Result<BTreeMap<CoeffKey, u128>> {
    let gram = lat.gram();
    let n = lat.rank();

    // one work item per (outer coset, outer vector index)
    let jobs: Vec<(usize, usize)> = (0..order)
        .flat_map(|c| (0..lists[c].len()).map(move |i| (c, i)))
        .collect();

    let maps: Vec<BTreeMap<CoeffKey, u128>> = jobs
        .par_iter()
        .fold(BTreeMap::new, |mut local, &(c0, i0)| {
            let (q0, x0) = &lists[c0][i0];
            let q0 = *q0;
            if q0 <= max_scaled {
                // W = X^T G, for pairings (X^T G Y)/lev
                let w0: Vec<i64> = (0..n)
                    .map(|j| (0..n).map(|i| x0[i] * gram.at(i, j)).sum())
                    .collect();
                let mut prefix_cosets = vec![c0];
                let mut prefix_q = vec![q0];
                let mut prefix_w = vec![w0];
                let mut prefix_b: Vec<i64> = Vec::new();
                tuple_rec(
                    lat,
                    genus,
                    order,
                    lev,
                    max_scaled,
                    lists,
                    &mut prefix_cosets,
                    &mut prefix_q,
                    &mut prefix_w,
                    &mut prefix_b,
                    &mut local,
                );
            }
            local
        })
        .collect();

    let mut out = BTreeMap::new();
    for m in maps {
        for (k, v) in m {
            *out.entry(k).or_insert(0) += v;
        }
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn tuple_rec(
    lat: &QuadLattice,
    genus: usize,
    order: usize,
    lev: i64,
    max_scaled: i64,
    lists: &[Vec<(i64, Vec<i64>)>],
    prefix_cosets: &mut Vec<usize>,
    prefix_q: &mut Vec<i64>,
    prefix_w: &mut Vec<Vec<i64>>,
    prefix_b: &mut Vec<i64>,
    local: &mut BTreeMap<CoeffKey, u128>,
) {
    let depth = prefix_cosets.len();
    let used: i64 = prefix_q.iter().sum();
    if depth == genus {
        let flat = ThetaTable::tuple_flat(order, prefix_cosets);
        let mut key = prefix_q.clone();
        // prefix_b holds b(i,j) grouped by j; the key wants lex (i,j) order
        for i in 0..genus {
            for j in i + 1..genus {
                key.push(prefix_b[j * (j - 1) / 2 + i]);
            }
        }
        *local.entry((flat, key)).or_insert(0) += 1;
        return;
    }
    let rem = max_scaled - used;
    let n = lat.rank();
    let gram = lat.gram();
    for c in 0..order {
        for (qy, y) in &lists[c] {
            if *qy > rem {
                break; // lists sorted by q
            }
            // pairings with all prefix components
            let start_b = prefix_b.len();
            for w in prefix_w.iter() {
                let mut dot: i128 = 0;
                for i in 0..n {
                    dot += w[i] as i128 * y[i] as i128;
                }
                debug_assert_eq!(dot % lev as i128, 0);
                prefix_b.push((dot / lev as i128) as i64);
            }
            prefix_cosets.push(c);
            prefix_q.push(*qy);
            let need_w = depth + 1 < genus;
            if need_w {
                let wy: Vec<i64> = (0..n)
                    .map(|j| (0..n).map(|i| y[i] * gram.at(i, j)).sum())
                    .collect();
                prefix_w.push(wy);
            }
            tuple_rec(
                lat, genus, order, lev, max_scaled, lists, prefix_cosets, prefix_q, prefix_w,
                prefix_b, local,
            );
            if need_w {
                prefix_w.pop();
            }
            prefix_q.pop();
            prefix_cosets.pop();
            prefix_b.truncate(start_b);
        }
    }
}

// ---------------------------------------------------------------------------
// Independent box-count oracle (genus 1)
// ---------------------------------------------------------------------------

/// Count vectors in L + mu with Q <= max_trace by scanning a coordinate box.
/// Deliberately naive; exists to cross-check the pruned enumerator.
pub fn box_counts(
    lat: &QuadLattice,
    coset: usize,
    max_trace: &Q,
) -> Result<BTreeMap<i64, u128>> {
    if !lat.is_positive_definite() {
        return Err(Error::NotPositiveDefinite);
    }
    let n = lat.rank();
    let lev = lat.level();
    let disc = lat.discriminant_form();
    let offs = scaled_offsets(&disc, coset, lev)?;
    let max_scaled = scale_trace(lat, max_trace)?;
    let ginv = lat
        .gram()
        .to_qmat()
        .inverse()
        .ok_or(Error::Degenerate)?;
    // x_i^2 <= 2 * B * (G^-1)_ii, with x = m + mu and mu in [0, 1)
    let bq = max_trace.clone();
    let mut ranges = Vec::with_capacity(n);
    for i in 0..n {
        let r2 = Q::from(Z::from(2)) * &bq * ginv.at(i, i);
        let mut r = 0i64;
        while Q::from(Z::from((r + 1) * (r + 1))) <= r2 {
            r += 1;
        }
        if offs[i] == 0 {
            ranges.push((-r, r));
        } else {
            ranges.push((-r - 1, r));
        }
    }
    let gram = lat.gram();
    let mut out: BTreeMap<i64, u128> = BTreeMap::new();
    let mut m = ranges.iter().map(|r| r.0).collect::<Vec<_>>();

    // maintain X = lev*m + off, w = G X and acc = X^T G X incrementally
    let xs: Vec<i128> = (0..n).map(|i| (lev * m[i] + offs[i]) as i128).collect();
    let mut w: Vec<i128> = (0..n)
        .map(|j| (0..n).map(|i| xs[i] * gram.at(i, j) as i128).sum())
        .collect();
    let mut acc: i128 = (0..n).map(|i| xs[i] * w[i]).sum();
    let two_lev = 2 * lev as i128;

    loop {
        debug_assert_eq!(acc % two_lev, 0);
        let q_lev = acc / two_lev;
        if q_lev >= 0 && q_lev <= max_scaled as i128 {
            *out.entry(q_lev as i64).or_insert(0) += 1;
        }
        // odometer with delta updates: X_k += delta shifts acc and w
        let mut k = 0;
        loop {
            if k == n {
                return Ok(out);
            }
            if m[k] < ranges[k].1 {
                m[k] += 1;
                let delta = lev as i128;
                acc += delta * (2 * w[k] + delta * gram.at(k, k) as i128);
                for j in 0..n {
                    w[j] += delta * gram.at(j, k) as i128;
                }
                break;
            }
            let delta = -(ranges[k].1 - ranges[k].0) as i128 * lev as i128;
            m[k] = ranges[k].0;
            if delta != 0 {
                acc += delta * (2 * w[k] + delta * gram.at(k, k) as i128);
                for j in 0..n {
                    w[j] += delta * gram.at(j, k) as i128;
                }
            }
            k += 1;
        }
    }
}

// ---------------------------------------------------------------------------
// Representation numbers
// ---------------------------------------------------------------------------

/// Number of tuples in the product of cosets with the given moment matrix.
pub fn representation_number(
    lat: &QuadLattice,
    moment: &QMat,
    coset_tuple: &[usize],
    budget: Option<u128>,
) -> Result<u128> {
    let g = coset_tuple.len();
    if moment.rows() != g || moment.cols() != g {
        return Err(Error::Dimension("moment matrix vs tuple length".into()));
    }
    let trace: Q = (0..g).map(|i| moment.at(i, i).clone()).fold(Q::zero(), |a, b| a + b);
    // round the trace up to the lattice's 1/level grid for the table bound
    let lev = Z::from(lat.level());
    let bound = Q::new((trace * Q::from(lev.clone())).ceil().to_integer(), lev);
    let table = theta_table(lat, g, &bound, budget)?;
    let key = match table.moment_to_key(moment) {
        Ok(k) => k,
        Err(_) => return Ok(0), // off-grid moment: nothing represents it
    };
    let order = table.disc_order;
    Ok(table.count(ThetaTable::tuple_flat(order, coset_tuple), &key))
}

// ---------------------------------------------------------------------------
// Factorization of theta series over direct sums
// ---------------------------------------------------------------------------

#[derive(Debug)]
pub struct FactorizationReport {
    pub cells_checked: usize,
    pub ok: bool,
    pub mismatch: Option<String>,
}

/// Verify that every genus-g coefficient of L (+) K equals the convolution of
/// the factor coefficients: r_{L+K}(T, (mu,nu)) = sum_{T1+T2=T} r_L(T1,mu) r_K(T2,nu).
pub fn factorization_check(
    left: &QuadLattice,
    right: &QuadLattice,
    genus: usize,
    max_trace: &Q,
    budget: Option<u128>,
) -> Result<FactorizationReport> {
    let sum = left.direct_sum(right);
    let table_sum = theta_table(&sum, genus, max_trace, budget)?;
    let table_l = theta_table(left, genus, max_trace, budget)?;
    let table_r = theta_table(right, genus, max_trace, budget)?;

    let disc_sum = sum.discriminant_form();
    let disc_l = left.discriminant_form();
    let disc_r = right.discriminant_form();
    let nl = left.rank();

    // coset map D(L+K) -> D(L) x D(R) by splitting dual coordinates
    let mut split = Vec::with_capacity(disc_sum.order());
    for i in 0..disc_sum.order() {
        let rep = disc_sum.rep(i);
        let li = disc_l.index_of(&rep[..nl])?;
        let ri = disc_r.index_of(&rep[nl..])?;
        split.push((li, ri));
    }

    // rescale factor keys to the joint level
    let lev = table_sum.lev;
    let fl = lev / table_l.lev;
    let fr = lev / table_r.lev;
    assert_eq!(table_l.lev * fl, lev);
    assert_eq!(table_r.lev * fr, lev);

    // expected coefficients by convolution
    let mut expected: BTreeMap<CoeffKey, u128> = BTreeMap::new();
    for ((tl_flat, kl), cl) in &table_l.counts {
        let tl = ThetaTable::tuple_digits(table_l.disc_order, *tl_flat, genus);
        let trl: i64 = kl[..genus].iter().map(|q| q * fl).sum();
        for ((tr_flat, kr), cr) in &table_r.counts {
            let trr: i64 = kr[..genus].iter().map(|q| q * fr).sum();
            if trl + trr > table_sum.max_trace_scaled {
                continue;
            }
            let tr = ThetaTable::tuple_digits(table_r.disc_order, *tr_flat, genus);
            // combined coset tuple through the split map (inverse direction)
            let mut combined = Vec::with_capacity(genus);
            let mut valid = true;
            for k in 0..genus {
                match split.iter().position(|&(a, b)| a == tl[k] && b == tr[k]) {
                    Some(ci) => combined.push(ci),
                    None => {
                        valid = false;
                        break;
                    }
                }
            }
            if !valid {
                return Err(Error::Verify("coset splitting is not onto".into()));
            }
            let key: Vec<i64> = kl
                .iter()
                .zip(kr)
                .map(|(a, b)| a * fl + b * fr)
                .collect();
            let flat = ThetaTable::tuple_flat(table_sum.disc_order, &combined);
            *expected.entry((flat, key)).or_insert(0) += cl * cr;
        }
    }

    let cells = expected.len().max(table_sum.counts.len());
    if expected == table_sum.counts {
        Ok(FactorizationReport { cells_checked: cells, ok: true, mismatch: None })
    } else {
        // find the first difference for the report
        let mut msg = String::from("coefficient mismatch");
        for (k, v) in &expected {
            let got = table_sum.counts.get(k).copied().unwrap_or(0);
            if got != *v {
                msg = format!("key {:?}: expected {v}, enumerated {got}", k);
                break;
            }
        }
        if msg == "coefficient mismatch" {
            for (k, v) in &table_sum.counts {
                if !expected.contains_key(k) {
                    msg = format!("key {:?}: enumerated {v}, expected absent", k);
                    break;
                }
            }
        }
        Ok(FactorizationReport { cells_checked: cells, ok: false, mismatch: Some(msg) })
    }
}

// ---------------------------------------------------------------------------
// Numeric evaluation with rigorous truncation bounds
// ---------------------------------------------------------------------------

/// Upper bound on sum_{k in Z} exp(-a k^2), valid for any real offset of the
/// summation grid (the centered grid dominates by Poisson summation).
fn theta1d_upper(a: f64) -> f64 {
    assert!(a > 0.0);
    let mut s = 1.0f64;
    let mut k = 1.0f64;
    loop {
        let t = (-a * k * k).exp();
        s += 2.0 * t;
        // geometric domination: next/current <= exp(-a(2k+1)) < 1 eventually
        let ratio = (-a * (2.0 * k + 1.0)).exp();
        if t < 1e-22 && ratio < 0.5 {
            s += 2.0 * t * ratio / (1.0 - ratio);
            break;
        }
        k += 1.0;
        if k > 1e7 {
            return f64::INFINITY;
        }
    }
    s * 1.000_000_1
}

/// Rigorous upper bound for sum over all x in L + any coset of
/// exp(-2 pi y Q(x)), via Q(x) >= |x|^2 / (2 s) with s = n * max|G^(-1)|.
fn gaussian_sum_upper(lat: &QuadLattice, y: f64) -> f64 {
    let n = lat.rank();
    let ginv = lat.gram().to_qmat().inverse().expect("nondegenerate");
    let mut maxabs: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let v = ginv.at(i, j).to_f64().unwrap_or(f64::INFINITY);
            maxabs = maxabs.max(v.abs());
        }
    }
    let s = n as f64 * maxabs * 1.000_000_1;
    let a = std::f64::consts::PI * y / s;
    theta1d_upper(a).powi(n as i32) * 1.000_000_1
}

/// Upper bound on the sum over every coset of exp(-2 pi y Q(x)), using exact
/// counts up to the table bound plus a crude remainder per coset.
fn theta_value_upper(lat: &QuadLattice, table: &ThetaTable, y: f64) -> f64 {
    assert_eq!(table.genus, 1);
    let lev = table.lev as f64;
    let mut s = 0.0f64;
    for ((_, key), c) in &table.counts {
        let t = key[0] as f64 / lev;
        s += (*c as f64) * (-2.0 * std::f64::consts::PI * y * t).exp();
    }
    let m = table.max_trace_scaled as f64 / lev;
    s * 1.000_000_1 + table.disc_order as f64 * truncation_remainder_crude(lat, m, y)
}

/// Crude bound for sum over Q(x) > m of exp(-2 pi y Q(x)), optimizing the
/// exponent split over a theta-parameter grid.
fn truncation_remainder_crude(lat: &QuadLattice, m: f64, y: f64) -> f64 {
    let mut best = f64::INFINITY;
    for k in 1..20 {
        let th = k as f64 / 20.0;
        let head = (-2.0 * std::f64::consts::PI * y * (1.0 - th) * m).exp();
        let bulk = gaussian_sum_upper(lat, th * y);
        best = best.min(head * bulk);
    }
    best * 1.000_000_1
}

/// Rigorous bound on the truncation error of a genus-g theta series cut at
/// trace m, evaluated where Im(tau) has smallest eigenvalue y.
pub fn tail_bound(
    lat: &QuadLattice,
    genus1_table: &ThetaTable,
    genus: usize,
    m: f64,
    y: f64,
) -> f64 {
    let mut best = f64::INFINITY;
    for k in 1..20 {
        let th = k as f64 / 20.0;
        let head = (-2.0 * std::f64::consts::PI * y * (1.0 - th) * m).exp();
        let factor = theta_value_upper(lat, genus1_table, th * y);
        best = best.min(head * factor.powi(genus as i32));
    }
    best * 1.000_000_1
}

/// Smallest eigenvalue of Im(tau), slightly rounded down.
pub fn y_min_of(tau: &CTau) -> f64 {
    let g = tau.len();
    let ymat: Vec<Vec<f64>> = (0..g).map(|i| (0..g).map(|j| tau[i][j].im).collect()).collect();
    let lam = match g {
        1 => ymat[0][0],
        2 => {
            let tr = ymat[0][0] + ymat[1][1];
            let det = ymat[0][0] * ymat[1][1] - ymat[0][1] * ymat[1][0];
            (tr - (tr * tr - 4.0 * det).max(0.0).sqrt()) / 2.0
        }
        _ => {
            // Gershgorin lower bound is enough at higher genus
            let mut lo = f64::INFINITY;
            for i in 0..g {
                let off: f64 = (0..g).filter(|&j| j != i).map(|j| ymat[i][j].abs()).sum();
                lo = lo.min(ymat[i][i] - off);
            }
            lo
        }
    };
    lam * (1.0 - 1e-12)
}

/// Evaluate the truncated theta component for one coset tuple at tau.
pub fn eval_component(table: &ThetaTable, flat: usize, tau: &CTau) -> Complex64 {
    let g = table.genus;
    let lev = table.lev as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for ((f, key), c) in &table.counts {
        if *f != flat {
            continue;
        }
        // tr(T tau) = sum_i Q_i tau_ii + sum_{i<j} b_ij tau_ij
        let mut e = Complex64::new(0.0, 0.0);
        for i in 0..g {
            e += tau[i][i] * (key[i] as f64 / lev);
        }
        let mut idx = g;
        for i in 0..g {
            for j in i + 1..g {
                e += tau[i][j] * (key[idx] as f64 / lev);
                idx += 1;
            }
        }
        let z = Complex64::new(0.0, 2.0 * std::f64::consts::PI) * e;
        acc += (*c as f64) * z.exp();
    }
    acc
}

pub fn eval_vector(table: &ThetaTable, tau: &CTau) -> Vec<Complex64> {
    let g = table.genus;
    let dim = table.disc_order.pow(g as u32);
    let lev = table.lev as f64;
    let mut out = vec![Complex64::new(0.0, 0.0); dim];
    for ((f, key), c) in &table.counts {
        let mut e = Complex64::new(0.0, 0.0);
        for i in 0..g {
            e += tau[i][i] * (key[i] as f64 / lev);
        }
        let mut idx = g;
        for i in 0..g {
            for j in i + 1..g {
                e += tau[i][j] * (key[idx] as f64 / lev);
                idx += 1;
            }
        }
        let z = Complex64::new(0.0, 2.0 * std::f64::consts::PI) * e;
        out[*f] += (*c as f64) * z.exp();
    }
    out
}

#[derive(Debug)]
pub struct ModularityReport {
    pub residual: f64,
    pub tail_allowance: f64,
    pub tolerance: f64,
    pub ok: bool,
}

/// Numeric transformation check: Theta(gamma tau) against
/// j(gamma,tau)^rank * (contragredient Weil action) Theta(tau), where the
/// scalar automorphy factor is accumulated token-wise along the same word
/// that produced the representation matrix, so both sides share one branch.
pub fn modularity_check(
    lat: &QuadLattice,
    genus: usize,
    word: &MpWord,
    tau0: &CTau,
    max_trace: &Q,
    num_tol: f64,
    budget: Option<u128>,
) -> Result<ModularityReport> {
    if !lat.is_positive_definite() {
        return Err(Error::NotPositiveDefinite);
    }
    let rank = lat.rank() as i32;
    let table = theta_table(lat, genus, max_trace, budget)?;
    let table1 = theta_table(lat, 1, max_trace, budget)?;
    let space = WeilSpace::new(lat, genus)?;
    let dim = space.dim();

    let theta0 = eval_vector(&table, tau0);
    let (tau1, j) = word_orbit(genus, word, tau0)?;
    let theta1 = eval_vector(&table, &tau1);

    let omega_dual = space.contragredient_matrix(word)?;
    let od = omega_dual.to_complex();
    let jr = j.powi(rank);
    let mut residual = 0.0f64;
    for r in 0..dim {
        let mut rhs = Complex64::new(0.0, 0.0);
        for c in 0..dim {
            rhs += od[r][c] * theta0[c];
        }
        residual = residual.max((theta1[r] - jr * rhs).norm());
    }

    let m = max_trace.to_f64().unwrap_or(0.0);
    let tail1 = tail_bound(lat, &table1, genus, m, y_min_of(&tau1));
    let tail0 = tail_bound(lat, &table1, genus, m, y_min_of(tau0));
    let tail_allowance = tail1 + jr.norm() * dim as f64 * tail0;
    let tolerance = num_tol + tail_allowance;
    Ok(ModularityReport { residual, tail_allowance, tolerance, ok: residual <= tolerance })
}

// ---------------------------------------------------------------------------
// Fourier-Jacobi slices (genus 2)
// ---------------------------------------------------------------------------

/// Extract the slice of a genus-2 table with fixed lower-right moment entry:
/// map (q1_scaled, b_scaled) -> count for entries with q2_scaled = t22.
pub fn fourier_jacobi_slice(
    table: &ThetaTable,
    flat: usize,
    t22_scaled: i64,
) -> Result<BTreeMap<(i64, i64), u128>> {
    if table.genus != 2 {
        return Err(Error::BadGenus);
    }
    let mut out = BTreeMap::new();
    for ((f, key), c) in &table.counts {
        if *f == flat && key[1] == t22_scaled {
            *out.entry((key[0], key[2])).or_insert(0) += c;
        }
    }
    Ok(out)
}

/// The slices must re-assemble exactly into the full table.
pub fn fourier_jacobi_consistency(table: &ThetaTable) -> Result<bool> {
    if table.genus != 2 {
        return Err(Error::BadGenus);
    }
    let mut total: u128 = 0;
    let t22s: std::collections::BTreeSet<i64> =
        table.counts.keys().map(|(_, k)| k[1]).collect();
    let flats: std::collections::BTreeSet<usize> =
        table.counts.keys().map(|(f, _)| *f).collect();
    for f in flats {
        for &t in &t22s {
            for (_, c) in fourier_jacobi_slice(table, f, t)? {
                total += c;
            }
        }
    }
    let direct: u128 = table.counts.values().sum();
    Ok(total == direct)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::catalog;
    use crate::mat::{qq, qz, IMat};

    fn a1() -> QuadLattice {
        catalog::by_name("A1").unwrap()
    }

    #[test]
    fn a1_genus1_counts() {
        let t = theta_table(&a1(), 1, &qz(9), None).unwrap();
        assert_eq!(t.lev, 4);
        // coset 0: Q = x^2 for x in Z: r(0)=1, r(1)=2, r(4)=2, r(9)=2
        assert_eq!(t.count(0, &[0]), 1);
        assert_eq!(t.count(0, &[4]), 2);
        assert_eq!(t.count(0, &[16]), 2);
        assert_eq!(t.count(0, &[36]), 2);
        assert_eq!(t.count(0, &[8]), 0);
        // coset 1/2: Q = (k+1/2)^2: 1/4, 9/4, 25/4 each twice; 49/4 > 9
        assert_eq!(t.count(1, &[1]), 2);
        assert_eq!(t.count(1, &[9]), 2);
        assert_eq!(t.count(1, &[25]), 2);
        assert_eq!(t.count(1, &[49]), 0);
    }

    #[test]
    fn e8_genus1_matches_frozen_and_box() {
        let e8 = catalog::by_name("E8").unwrap();
        let t = theta_table(&e8, 1, &qz(5), None).unwrap();
        let expect = [1u128, 240, 2160, 6720, 17520, 30240];
        for (k, &e) in expect.iter().enumerate() {
            assert_eq!(t.count(0, &[k as i64]), e, "coefficient {k}");
        }
        let b = box_counts(&e8, 0, &qz(5)).unwrap();
        for (k, &e) in expect.iter().enumerate() {
            assert_eq!(b.get(&(k as i64)).copied().unwrap_or(0), e, "box {k}");
        }
    }

    #[test]
    fn box_oracle_agrees_on_cosets() {
        let l = QuadLattice::new(IMat::from_rows(vec![vec![2, 1], vec![1, 4]])).unwrap();
        let t = theta_table(&l, 1, &qz(6), None).unwrap();
        let disc = l.discriminant_form();
        for ci in 0..disc.order() {
            let b = box_counts(&l, ci, &qz(6)).unwrap();
            for (q, c) in &b {
                assert_eq!(t.count(ci, &[*q]), *c, "coset {ci} q {q}");
            }
            let total_t: u128 = t
                .counts
                .iter()
                .filter(|((f, _), _)| *f == ci)
                .map(|(_, c)| *c)
                .sum();
            let total_b: u128 = b.values().sum();
            assert_eq!(total_t, total_b);
        }
    }

    #[test]
    fn indefinite_is_rejected() {
        let h = catalog::by_name("H").unwrap();
        assert!(matches!(theta_table(&h, 1, &qz(3), None), Err(Error::NotPositiveDefinite)));
    }

    #[test]
    fn a1_genus2_moments() {
        let t = theta_table(&a1(), 2, &qz(4), None).unwrap();
        // (x, y) = (1, 1): T = [[1, 1], [1, 1]] means q=(4,4) scaled, b = 2*4=8
        // pairs: (1,1), (-1,-1) -> 2
        assert_eq!(t.count(0, &[4, 4, 8]), 2);
        // (1,-1): b = -2
        assert_eq!(t.count(0, &[4, 4, -8]), 2);
        // orthogonal pairs of nonzero vectors in rank 1: none
        assert_eq!(t.count(0, &[4, 4, 0]), 0);
        // zero paired with anything: b = 0
        assert_eq!(t.count(0, &[0, 4, 0]), 2);
    }

    #[test]
    fn e8_genus2_orthogonal_roots() {
        let e8 = catalog::by_name("E8").unwrap();
        let t = theta_table(&e8, 2, &qz(2), None).unwrap();
        // pairs of roots: pairing distribution 1/56/126/56/1 over b = -2..2
        assert_eq!(t.count(0, &[1, 1, 0]), 240 * 126);
        assert_eq!(t.count(0, &[1, 1, 1]), 240 * 56);
        assert_eq!(t.count(0, &[1, 1, 2]), 240);
        assert_eq!(t.count(0, &[1, 1, -2]), 240);
    }

    #[test]
    fn representation_number_lookup() {
        let e8 = catalog::by_name("E8").unwrap();
        let m = QMat::from_rows(vec![vec![qz(1), qz(0)], vec![qz(0), qz(1)]]);
        let r = representation_number(&e8, &m, &[0, 0], None).unwrap();
        assert_eq!(r, 240 * 126);
        // off-grid moment: zero
        let m2 = QMat::from_rows(vec![vec![qq(1, 3), qz(0)], vec![qz(0), qz(1)]]);
        assert_eq!(representation_number(&e8, &m2, &[0, 0], None).unwrap(), 0);
    }

    #[test]
    fn budget_is_enforced() {
        let e8 = catalog::by_name("E8").unwrap();
        match theta_table(&e8, 2, &qz(4), Some(1000)) {
            Err(Error::EnumBudget { needed, cap }) => {
                assert!(needed > cap);
                assert_eq!(cap, 1000);
            }
            other => panic!("expected budget refusal, got {:?}", other.map(|t| t.counts.len())),
        }
    }

    #[test]
    fn factorization_small() {
        let r = factorization_check(&a1(), &a1(), 1, &qz(6), None).unwrap();
        assert!(r.ok, "{:?}", r.mismatch);
        let e8 = catalog::by_name("E8").unwrap();
        let r = factorization_check(&a1(), &e8, 1, &qz(3), None).unwrap();
        assert!(r.ok, "{:?}", r.mismatch);
    }

    #[test]
    fn congruence_of_keys() {
        // table keys must reduce to the discriminant-form data mod 1
        let l = catalog::parse_spec("A1+A1").unwrap();
        let t = theta_table(&l, 2, &qz(3), None).unwrap();
        let disc = l.discriminant_form();
        for ((flat, key), _) in &t.counts {
            let tup = ThetaTable::tuple_digits(t.disc_order, *flat, 2);
            for i in 0..2 {
                let q = disc.q_value(tup[i]);
                let diff = Q::new(Z::from(key[i]), Z::from(t.lev)) - q;
                assert!(diff.denom().is_one(), "diagonal congruence");
            }
            let b = disc.b_value(tup[0], tup[1]);
            let diff = Q::new(Z::from(key[2]), Z::from(t.lev)) - b;
            assert!(diff.denom().is_one(), "pairing congruence");
        }
    }

    #[test]
    fn tail_bound_is_small_at_strong_decay() {
        let e8 = catalog::by_name("E8").unwrap();
        let t1 = theta_table(&e8, 1, &qz(20), None).unwrap();
        let tb = tail_bound(&e8, &t1, 1, 20.0, 1.0);
        assert!(tb < 1e-12, "tail {tb}");
        assert!(tb > 0.0);
    }

    #[test]
    fn modularity_a1_t_and_s() {
        let tau0 = crate::weil::ctau_scalar(1, Complex64::new(0.0, 0.5));
        let t_word = MpWord::t(IMat::from_rows(vec![vec![1]]));
        let rep = modularity_check(&a1(), 1, &t_word, &tau0, &qz(20), 1e-8, None).unwrap();
        assert!(rep.ok, "T residual {} tol {}", rep.residual, rep.tolerance);
        let rep = modularity_check(&a1(), 1, &MpWord::s(), &tau0, &qz(20), 1e-8, None).unwrap();
        assert!(rep.ok, "S residual {} tol {}", rep.residual, rep.tolerance);
        assert!(rep.residual < 1e-9, "S residual should be tiny: {}", rep.residual);
    }

    #[test]
    fn modularity_e8_s() {
        let e8 = catalog::by_name("E8").unwrap();
        let tau0 = crate::weil::ctau_scalar(1, Complex64::new(0.0, 0.8));
        let rep = modularity_check(&e8, 1, &MpWord::s(), &tau0, &qz(12), 1e-8, None).unwrap();
        assert!(rep.ok, "residual {} tol {}", rep.residual, rep.tolerance);
    }

    #[test]
    fn fourier_jacobi_slices_consistent() {
        let e8 = catalog::by_name("E8").unwrap();
        let t = theta_table(&e8, 2, &qz(2), None).unwrap();
        assert!(fourier_jacobi_consistency(&t).unwrap());
        let s = fourier_jacobi_slice(&t, 0, 1).unwrap();
        // q2 = 1 slice: includes (q1=1, b) entries matching root pairings
        assert_eq!(s.get(&(1, 0)).copied(), Some(240 * 126));
        assert_eq!(s.get(&(0, 0)).copied(), Some(240));
    }

    #[test]
    fn trace_profile_sums() {
        let t = theta_table(&a1(), 1, &qz(4), None).unwrap();
        let p = t.trace_profile();
        // all vectors with x^2 <= 4 across both cosets: q_lev in {0,1,4,9,16}
        assert_eq!(p.get(&0).copied(), Some(1));
        assert_eq!(p.get(&1).copied(), Some(2));
        assert_eq!(p.get(&4).copied(), Some(2));
        assert_eq!(p.get(&16).copied(), Some(2));
    }
}
