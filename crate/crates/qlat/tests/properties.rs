//! Randomized invariants. Strategies build small even lattices as t(B) D B
//! with B unimodular, so every sample is admissible by construction and the
//! properties probe the library's algebra rather than input validation.

use num_traits::{One, Zero};
use proptest::prelude::*;

use qlat::cycles::{canonicalize, CycleKey, FormalSeries};
use qlat::cyclo::Cyclo;
use qlat::lattice::{catalog, QuadLattice};
use qlat::mat::{elementary_divisors, qz, IMat, QMat, Q, Z};
use qlat::padic::jordan_decompose;
use qlat::theta::{box_counts, factorization_check, theta_table};
use qlat::weil::{is_unitary, verify_metaplectic_relations, MpWord, WeilSpace};

// ---------------------------------------------------------------------------
// Strategies
// ---------------------------------------------------------------------------

/// Unimodular matrix from a short program of elementary operations.
fn unimodular(n: usize, ops: &[(u8, usize, usize, i8)]) -> IMat {
    let mut b = IMat::identity(n);
    for &(kind, i, j, s) in ops {
        let i = i % n;
        let j = j % n;
        match kind % 3 {
            0 => {
                let mut f = IMat::identity(n);
                f.set(i, i, -1);
                b = b.mul(&f);
            }
            1 if i != j => {
                let mut sw = IMat::zero(n, n);
                for k in 0..n {
                    let kk = if k == i {
                        j
                    } else if k == j {
                        i
                    } else {
                        k
                    };
                    sw.set(k, kk, 1);
                }
                b = b.mul(&sw);
            }
            _ if i != j => {
                let mut sh = IMat::identity(n);
                sh.set(i, j, if s >= 0 { 1 } else { -1 });
                b = b.mul(&sh);
            }
            _ => {}
        }
    }
    b
}

prop_compose! {
    fn ops(len: usize)
        (v in prop::collection::vec((any::<u8>(), 0usize..8, 0usize..8, any::<i8>()), len))
        -> Vec<(u8, usize, usize, i8)> {
        v
    }
}

prop_compose! {
    /// Positive-definite even lattice of rank 1..=3.
    fn even_lattice()
        (n in 1usize..=3)
        (n in Just(n),
         diag in prop::collection::vec(1i64..=3, n),
         program in ops(4))
        -> QuadLattice {
        let b = unimodular(n, &program);
        let d = IMat::from_fn(n, n, |i, j| if i == j { 2 * diag[i] } else { 0 });
        QuadLattice::new(b.transpose().mul(&d).mul(&b)).expect("even by construction")
    }
}

// ---------------------------------------------------------------------------
// Discriminant form
// ---------------------------------------------------------------------------

proptest! {
    #[test]
    fn disc_order_is_absolute_determinant(lat in even_lattice()) {
        let disc = lat.discriminant_form();
        prop_assert_eq!(disc.order() as i128, lat.det().abs());
    }

    #[test]
    fn disc_form_polarizes(lat in even_lattice(), a in 0usize..64, b in 0usize..64) {
        let disc = lat.discriminant_form();
        let a = a % disc.order();
        let b = b % disc.order();
        let sum = disc.add(a, b);
        // q(x+y) - q(x) - q(y) = b(x,y) in Q/Z
        let lhs = disc.q_value(sum) - disc.q_value(a) - disc.q_value(b);
        let diff = lhs - disc.b_value(a, b);
        prop_assert!(diff.denom().is_one(), "polarization failed: {}", diff);
    }

    #[test]
    fn disc_scalar_mul_matches_repeated_add(lat in even_lattice(), a in 0usize..64, k in 0i64..12) {
        let disc = lat.discriminant_form();
        let a = a % disc.order();
        let mut acc = disc.zero();
        for _ in 0..k {
            acc = disc.add(acc, a);
        }
        prop_assert_eq!(disc.scalar_mul(k, a), acc);
    }
}

// ---------------------------------------------------------------------------
// Matrix layer
// ---------------------------------------------------------------------------

proptest! {
    #[test]
    fn elementary_divisors_chain_and_product(lat in even_lattice()) {
        let divs = elementary_divisors(&lat.gram().to_zmat());
        for w in divs.windows(2) {
            prop_assert!((&w[1] % &w[0]).is_zero() || w[1] == Z::from(0));
        }
        let prod: Z = divs.iter().fold(Z::from(1), |x, y| x * y);
        prop_assert_eq!(prod, Z::from(lat.det().abs()));
    }
}

// ---------------------------------------------------------------------------
// Theta tables
// ---------------------------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pruned_enumeration_matches_box_oracle(lat in even_lattice()) {
        let table = theta_table(&lat, 1, &qz(2), None).expect("small table");
        let disc = lat.discriminant_form();
        for coset in 0..disc.order() {
            let boxed = box_counts(&lat, coset, &qz(2)).expect("box oracle");
            for (tr, count) in &boxed {
                let mut from_table = 0u128;
                for ((flat, key), c) in &table.counts {
                    if *flat == coset && key[0] == *tr {
                        from_table += c;
                    }
                }
                prop_assert_eq!(from_table, *count);
            }
        }
    }

    #[test]
    fn direct_sum_series_factor(lat in even_lattice()) {
        let a1 = catalog::by_name("A1").expect("catalog");
        let rep = factorization_check(&lat, &a1, 1, &qz(2), None).expect("small check");
        prop_assert!(rep.ok, "{:?}", rep.mismatch);
    }
}

// ---------------------------------------------------------------------------
// Cyclotomic arithmetic
// ---------------------------------------------------------------------------

proptest! {
    #[test]
    fn root_of_unity_exponents_add(p in -24i64..24, q in -24i64..24) {
        let a = Q::new(Z::from(p), Z::from(24));
        let b = Q::new(Z::from(q), Z::from(24));
        let ea = Cyclo::e_frac(24, &a).expect("conductor fits");
        let eb = Cyclo::e_frac(24, &b).expect("conductor fits");
        let eab = Cyclo::e_frac(24, &(a + b)).expect("conductor fits");
        prop_assert_eq!(ea.mul(&eb), eab);
    }

    #[test]
    fn conjugation_inverts_roots(p in -24i64..24) {
        let a = Q::new(Z::from(p), Z::from(24));
        let e = Cyclo::e_frac(24, &a).expect("conductor fits");
        prop_assert_eq!(e.mul(&e.conj()), Cyclo::one(24));
    }
}

// ---------------------------------------------------------------------------
// Weil representation
// ---------------------------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn generator_relations_hold_on_random_lattices(lat in even_lattice()) {
        let rep = verify_metaplectic_relations(&lat).expect("relations computable");
        prop_assert!(rep.all_hold());
        let space = WeilSpace::new(&lat, 1).expect("space");
        prop_assert!(is_unitary(&space.weil_matrix(&MpWord::s()).expect("matrix")));
    }
}

// ---------------------------------------------------------------------------
// Formal cycle keys
// ---------------------------------------------------------------------------

/// Dual-vector tuple built from coset representatives plus integer shifts;
/// its moment matrix satisfies the key congruences automatically.
fn tuple_from_shifts(lat: &QuadLattice, picks: &[(usize, i64)]) -> (QMat, Vec<usize>) {
    let disc = lat.discriminant_form();
    let n = lat.rank();
    let g = picks.len();
    let mut coords = Vec::with_capacity(g);
    let mut mu = Vec::with_capacity(g);
    for &(raw, shift) in picks {
        let idx = raw % disc.order();
        mu.push(idx);
        let mut v = disc.rep(idx).to_vec();
        for x in v.iter_mut().take(n) {
            *x += qz(shift);
        }
        coords.push(v);
    }
    let t = QMat::from_fn(g, g, |i, j| lat.bilinear_value(&coords[i], &coords[j]) / qz(2));
    (t, mu)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn canonical_key_is_substitution_invariant(
        picks in prop::collection::vec((0usize..4, -1i64..=1), 1..=2),
        program in ops(3),
    ) {
        let lat = catalog::parse_spec("A1+A1").expect("catalog");
        let (t, mu) = tuple_from_shifts(&lat, &picks);
        let d = picks.len();
        let key = canonicalize(&lat, &t, &mu).expect("canonical form");
        let a = unimodular(d, &program);
        let aq = a.to_qmat();
        let t2 = aq.transpose().mul(&t).mul(&aq);
        let disc = lat.discriminant_form();
        let mu2: Vec<usize> = (0..d)
            .map(|k| {
                let mut acc = disc.zero();
                for i in 0..d {
                    acc = disc.add(acc, disc.scalar_mul(a.at(i, k), mu[i]));
                }
                acc
            })
            .collect();
        let key2 = canonicalize(&lat, &t2, &mu2).expect("canonical form");
        prop_assert_eq!(key, key2);
    }

    #[test]
    fn canonicalization_is_idempotent(
        picks in prop::collection::vec((0usize..4, -1i64..=1), 1..=2),
    ) {
        let lat = catalog::parse_spec("A1+A1").expect("catalog");
        let (t, mu) = tuple_from_shifts(&lat, &picks);
        let key = canonicalize(&lat, &t, &mu).expect("canonical form");
        if let CycleKey::Cls { .. } = &key {
            let t1 = key.moment().expect("moment");
            let mu1 = key.tuple().expect("cosets").to_vec();
            let again = canonicalize(&lat, &t1, &mu1).expect("canonical form");
            prop_assert_eq!(key, again);
        }
    }

    #[test]
    fn identity_translation_fixes_series(
        picks in prop::collection::vec((0usize..2, -1i64..=1), 2),
        c in 1i64..6,
    ) {
        let lat = catalog::by_name("A1").expect("catalog");
        let (t, mu) = tuple_from_shifts(&lat, &picks);
        let trace = t.at(0, 0) + t.at(1, 1);
        let mut series: FormalSeries<Cyclo> = FormalSeries::new(&lat, 2, trace + qz(1));
        series.add_term(&t, &mu, Cyclo::from_q(1, qz(c))).expect("in range");
        let (out, _) = qlat::cycles::translation_action(&series, &[0], &[0])
            .expect("identity translation");
        prop_assert!(out.equal(&series));
    }
}

// ---------------------------------------------------------------------------
// Local decompositions
// ---------------------------------------------------------------------------

proptest! {
    #[test]
    fn jordan_block_ranks_tile_the_lattice(lat in even_lattice(), pi in 0usize..3) {
        let p = [2u64, 3, 5][pi];
        let dec = jordan_decompose(&lat, p).expect("decomposition");
        let total: usize = dec.blocks.iter().map(|b| b.rank()).sum();
        prop_assert_eq!(total, lat.rank());
    }
}
