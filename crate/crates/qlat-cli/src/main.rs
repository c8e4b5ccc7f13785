//! Batch command-line front end: every subcommand reads exact inputs
//! (rationals as "p/q", complex scalars as "a+bi"), prints one JSON document
//! to stdout, and encodes its verdict in the exit status.
//!
//! Exit codes: 0 success (including negative search results), 2 a
//! verification check failed or a resource cap refused the computation,
//! 1 malformed input or usage.

use std::fmt::Write as _;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Deserialize;
use serde_json::{json, Value};

use qlat::cycles::{
    intersect, pullback, translation_action, CycleKey, FormalSeries,
};
use qlat::cyclo::{CMat, Cyclo};
use qlat::embed::{
    certify_selfdual_overlattice, find_hyperbolic_pair, overlattice_at_r, r_bounds,
    EmbeddingCertificate, OverlatticeOutcome, PairOutcome, SelfDualTarget,
};
use qlat::lattice::{catalog, QuadLattice};
use qlat::mat::{fmt_q, parse_q, IMat, QMat, Q};
use qlat::theta::{
    factorization_check, fourier_jacobi_consistency, modularity_check, representation_number,
    theta_table, ThetaTable,
};
use qlat::weil::{
    ctau_scalar, is_unitary, verify_metaplectic_relations, CTau, MpWord, WeilSpace,
};
use qlat::Error;

const VERSION: &str = env!("CARGO_PKG_VERSION");

// ---------------------------------------------------------------------------
// Argument grammar
// ---------------------------------------------------------------------------

#[derive(Parser)]
#[command(
    name = "qlat",
    version,
    about = "Exact arithmetic for integral quadratic lattices: discriminant \
             forms, Weil representations, theta series, formal cycle algebra, \
             and embedding searches"
)]
struct Cli {
    /// Also write the JSON document to this file
    #[arg(long, global = true)]
    output: Option<String>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Discriminant group invariants of an even lattice
    Disc(DiscArgs),
    /// Theta-series coefficient table by exact enumeration
    Theta(ThetaArgs),
    /// Single representation number for a moment matrix and coset tuple
    Repnum(RepnumArgs),
    /// Weil representation: generator relations and optional word matrix
    Weil(WeilArgs),
    /// Numerical modularity check of the theta series under one word
    Modcheck(ModcheckArgs),
    /// Genus-2 slice consistency and transformation checks
    Jacobicheck(JacobicheckArgs),
    /// Exact coefficient check of the direct-sum factorization identity
    Factorcheck(FactorcheckArgs),
    /// Formal cycle-class series operations
    #[command(subcommand)]
    Cycles(CyclesCmd),
    /// Embedding searches and certificates
    #[command(subcommand)]
    Embed(EmbedCmd),
    /// Run the full verification battery
    VerifyAll(VerifyAllArgs),
}

#[derive(Args)]
struct DiscArgs {
    /// Catalog name ("E8", "H+A1^2"), inline rows ("2,1;1,4" or JSON), or file
    #[arg(long)]
    lattice: String,
}

#[derive(Args)]
struct ThetaArgs {
    #[arg(long)]
    lattice: String,
    #[arg(long, default_value_t = 1)]
    genus: usize,
    /// Inclusive trace bound, a rational like "6" or "13/4"
    #[arg(long, default_value = "3")]
    max_trace: String,
    /// Cap on enumeration steps (default from QLAT_ENUM_BUDGET or built-in)
    #[arg(long)]
    budget: Option<u128>,
}

#[derive(Args)]
struct RepnumArgs {
    #[arg(long)]
    lattice: String,
    /// Moment matrix rows, e.g. "1,1/2;1/2,1"
    #[arg(long)]
    moment: String,
    /// Coset indices, e.g. "0,1" (defaults to the zero coset)
    #[arg(long)]
    coset: Option<String>,
    #[arg(long)]
    budget: Option<u128>,
}

#[derive(Args)]
struct WeilArgs {
    #[arg(long)]
    lattice: String,
    #[arg(long, default_value_t = 1)]
    genus: usize,
    /// Word in the letters S and T, e.g. "ST" (omit for relations only)
    #[arg(long)]
    word: Option<String>,
}

#[derive(Args)]
struct ModcheckArgs {
    #[arg(long)]
    lattice: String,
    #[arg(long, default_value_t = 1)]
    genus: usize,
    /// Word in the letters S and T (embedded generators when genus > 1)
    #[arg(long)]
    word: String,
    /// Base point: scalar "0.3i"/"1+2i", or matrix rows "i,0.1i;0.1i,1.1i"
    #[arg(long, default_value = "i")]
    tau: String,
    #[arg(long, default_value = "8")]
    max_trace: String,
    /// Numerical slack added to the rigorous tail bound
    #[arg(long, default_value_t = 1e-8)]
    tolerance: f64,
    #[arg(long)]
    budget: Option<u128>,
}

#[derive(Args)]
struct JacobicheckArgs {
    #[arg(long)]
    lattice: String,
    #[arg(long, default_value = "4")]
    max_trace: String,
    /// Genus-2 base point (scalar or matrix rows)
    #[arg(long, default_value = "i,0.1i;0.1i,1.1i")]
    tau: String,
    #[arg(long, default_value_t = 1e-6)]
    tolerance: f64,
    /// Translation column x (defaults to 1)
    #[arg(long, default_value = "1")]
    x: String,
    /// Translation column y (defaults to 1)
    #[arg(long, default_value = "1")]
    y: String,
    #[arg(long)]
    budget: Option<u128>,
}

#[derive(Args)]
struct FactorcheckArgs {
    #[arg(long)]
    left: String,
    #[arg(long)]
    right: String,
    #[arg(long, default_value_t = 1)]
    genus: usize,
    #[arg(long, default_value = "4")]
    max_trace: String,
    #[arg(long)]
    budget: Option<u128>,
}

#[derive(Subcommand)]
enum CyclesCmd {
    /// Product of two coefficient series over the same lattice
    Intersect(IntersectArgs),
    /// Push a series over L + K down to L using representation numbers of K
    Pullback(PullbackArgs),
    /// Apply an integral translation (x, y) to a genus-(d+1) series
    Translate(TranslateArgs),
}

#[derive(Args)]
struct IntersectArgs {
    /// Path to the first series JSON file
    #[arg(long)]
    series_a: String,
    /// Path to the second series JSON file
    #[arg(long)]
    series_b: String,
    /// Truncation (inclusive trace bound) of the product
    #[arg(long)]
    trunc: String,
}

#[derive(Args)]
struct PullbackArgs {
    /// Path to the series JSON file over the direct sum L + K
    #[arg(long)]
    series: String,
    /// The lattice L the series is pushed down to
    #[arg(long)]
    lattice: String,
    /// The positive-definite self-dual factor K
    #[arg(long)]
    selfdual: String,
    #[arg(long)]
    trunc: String,
}

#[derive(Args)]
struct TranslateArgs {
    /// Path to the series JSON file (genus d+1)
    #[arg(long)]
    series: String,
    /// Integer column x, e.g. "1,0"
    #[arg(long)]
    x: String,
    /// Integer column y, e.g. "2,-1"
    #[arg(long)]
    y: String,
}

#[derive(Subcommand)]
enum EmbedCmd {
    /// Search for a hyperbolic pair (isotropic l, dual partner l*)
    Hyperbolic(HyperbolicArgs),
    /// Certify an embedding into a self-dual target
    Overlattice(OverlatticeArgs),
    /// Lower and upper bounds for the minimal hyperbolic padding
    Rbounds(RboundsArgs),
}

#[derive(Args)]
struct HyperbolicArgs {
    #[arg(long)]
    lattice: String,
    /// Maximum coordinate height of the isotropic vector search
    #[arg(long, default_value_t = 3)]
    budget: i64,
}

#[derive(Args)]
struct OverlatticeArgs {
    #[arg(long)]
    lattice: String,
    /// Explicit target: "odd:p,q" for the diagonal (+1)^p(-1)^q form, or a
    /// lattice spec for an even self-dual target
    #[arg(long, conflicts_with = "extra_hyperbolic")]
    target: Option<String>,
    /// Instead of a target, pad with this many hyperbolic planes
    #[arg(long)]
    extra_hyperbolic: Option<usize>,
    /// Coordinate bound of the column search
    #[arg(long, default_value_t = 3)]
    budget: i64,
}

#[derive(Args)]
struct RboundsArgs {
    #[arg(long)]
    lattice: String,
    /// Largest padding count to try
    #[arg(long, default_value_t = 2)]
    max_r: usize,
    /// Coordinate bound of the column search
    #[arg(long, default_value_t = 3)]
    budget: i64,
}

#[derive(Args)]
struct VerifyAllArgs {
    #[arg(long)]
    budget: Option<u128>,
}

// ---------------------------------------------------------------------------
// Input parsing helpers
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
struct LatticeFile {
    name: Option<String>,
    gram: Vec<Vec<i64>>,
}

fn gram_from_rows(rows: Vec<Vec<i64>>) -> Result<IMat, Error> {
    if rows.is_empty() || rows.iter().any(|r| r.len() != rows.len()) {
        return Err(Error::Dimension("Gram matrix must be square".into()));
    }
    Ok(IMat::from_rows(rows))
}

/// Lattice argument: inline JSON rows, "a,b;c,d" rows, a JSON file path, or
/// a catalog expression such as "H+A1^2".
fn parse_lattice(spec: &str) -> Result<QuadLattice, Error> {
    let s = spec.trim();
    if s.starts_with('[') {
        let rows: Vec<Vec<i64>> = serde_json::from_str(s)
            .map_err(|e| Error::Parse(format!("inline Gram `{s}`: {e}")))?;
        return QuadLattice::new(gram_from_rows(rows)?);
    }
    if s.contains(';')
        || (s.contains(',') && s.chars().all(|c| "0123456789,;- ".contains(c)))
    {
        let rows: Vec<Vec<i64>> = s
            .split(';')
            .map(|row| {
                row.split(',')
                    .map(|e| {
                        e.trim()
                            .parse::<i64>()
                            .map_err(|_| Error::Parse(format!("bad integer `{e}`")))
                    })
                    .collect()
            })
            .collect::<Result<_, _>>()?;
        return QuadLattice::new(gram_from_rows(rows)?);
    }
    if std::path::Path::new(s).is_file() {
        let text = std::fs::read_to_string(s)
            .map_err(|e| Error::Parse(format!("reading {s}: {e}")))?;
        let file: LatticeFile = serde_json::from_str(&text)
            .map_err(|e| Error::Parse(format!("lattice file {s}: {e}")))?;
        let gram = gram_from_rows(file.gram)?;
        return match file.name {
            Some(n) => QuadLattice::named(gram, &n),
            None => QuadLattice::new(gram),
        };
    }
    catalog::parse_spec(s)
}

fn parse_qmat(s: &str) -> Result<QMat, Error> {
    let rows: Vec<Vec<Q>> = s
        .split(';')
        .map(|row| row.split(',').map(|e| parse_q(e)).collect())
        .collect::<Result<_, _>>()?;
    if rows.is_empty() || rows.iter().any(|r| r.len() != rows.len()) {
        return Err(Error::Dimension("moment matrix must be square".into()));
    }
    Ok(QMat::from_rows(rows))
}

fn parse_usize_list(s: &str) -> Result<Vec<usize>, Error> {
    s.split(',')
        .map(|e| {
            e.trim()
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad index `{e}`")))
        })
        .collect()
}

fn parse_i64_list(s: &str) -> Result<Vec<i64>, Error> {
    s.split(',')
        .map(|e| {
            e.trim()
                .parse::<i64>()
                .map_err(|_| Error::Parse(format!("bad integer `{e}`")))
        })
        .collect()
}

/// "a+bi" with either part optional: "i", "-0.3i", "2", "1-0.5i".
fn parse_complex(s: &str) -> Result<Complex64, Error> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Parse(format!("bad complex number `{s}`"));
    if s.is_empty() {
        return Err(bad());
    }
    let parse_part = |p: &str| -> Result<f64, Error> {
        match p {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => p.parse::<f64>().map_err(|_| bad()),
        }
    };
    if let Some(body) = s.strip_suffix('i') {
        // split at the last +/- that is not leading and not an exponent sign
        let bytes = body.as_bytes();
        let mut split = None;
        for k in (1..bytes.len()).rev() {
            let c = bytes[k] as char;
            if (c == '+' || c == '-')
                && !matches!(bytes[k - 1] as char, 'e' | 'E')
            {
                split = Some(k);
                break;
            }
        }
        match split {
            Some(k) => {
                let re = body[..k].parse::<f64>().map_err(|_| bad())?;
                let im = parse_part(&body[k..])?;
                Ok(Complex64::new(re, im))
            }
            None => Ok(Complex64::new(0.0, parse_part(body)?)),
        }
    } else {
        Ok(Complex64::new(s.parse::<f64>().map_err(|_| bad())?, 0.0))
    }
}

/// Scalar complex (broadcast to z*I) or ";"-separated rows of complexes.
fn parse_tau(s: &str, genus: usize) -> Result<CTau, Error> {
    if s.contains(';') || s.contains(',') {
        let rows: Vec<Vec<Complex64>> = s
            .split(';')
            .map(|row| row.split(',').map(|e| parse_complex(e)).collect())
            .collect::<Result<_, _>>()?;
        if rows.len() != genus || rows.iter().any(|r| r.len() != genus) {
            return Err(Error::Dimension(format!(
                "tau must be a {genus}x{genus} matrix"
            )));
        }
        Ok(rows)
    } else {
        Ok(ctau_scalar(genus, parse_complex(s)?))
    }
}

/// Words over the letters S and T; at genus > 1 the letters act through the
/// embedded block generators.
fn parse_word(s: &str, genus: usize) -> Result<MpWord, Error> {
    let mut word: Option<MpWord> = None;
    for c in s.chars() {
        let g = match c {
            'S' | 's' => {
                if genus == 1 {
                    MpWord::s()
                } else {
                    MpWord::embedded_s1(genus)
                }
            }
            'T' | 't' => {
                if genus == 1 {
                    MpWord::t(IMat::identity(1))
                } else {
                    MpWord::embedded_t1(genus)
                }
            }
            _ => return Err(Error::Parse(format!("bad word letter `{c}` in `{s}`"))),
        };
        word = Some(match word {
            Some(w) => w.then(g),
            None => g,
        });
    }
    word.ok_or_else(|| Error::Parse("empty word".into()))
}

// ---------------------------------------------------------------------------
// Series file format
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
#[serde(untagged)]
enum CoeffFile {
    Rational(String),
    Cyclotomic { conductor: u64, coeffs: Vec<String> },
}

#[derive(Deserialize)]
struct TermFile {
    t: Vec<Vec<String>>,
    mu: Vec<usize>,
    c: CoeffFile,
}

#[derive(Deserialize)]
struct SeriesFile {
    lattice: String,
    genus: usize,
    trunc: String,
    terms: Vec<TermFile>,
}

fn read_series_file(path: &str) -> Result<SeriesFile, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("reading {path}: {e}")))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("series file {path}: {e}")))
}

fn term_moment(term: &TermFile, genus: usize) -> Result<QMat, Error> {
    if term.t.len() != genus || term.t.iter().any(|r| r.len() != genus) {
        return Err(Error::Dimension(format!("term moment must be {genus}x{genus}")));
    }
    let rows: Vec<Vec<Q>> = term
        .t
        .iter()
        .map(|r| r.iter().map(|e| parse_q(e)).collect())
        .collect::<Result<_, _>>()?;
    Ok(QMat::from_rows(rows))
}

fn load_series_q(path: &str) -> Result<FormalSeries<Q>, Error> {
    let file = read_series_file(path)?;
    let lat = parse_lattice(&file.lattice)?;
    let trunc = parse_q(&file.trunc)?;
    let mut s = FormalSeries::new(&lat, file.genus, trunc);
    for term in &file.terms {
        let t = term_moment(term, file.genus)?;
        let c = match &term.c {
            CoeffFile::Rational(r) => parse_q(r)?,
            CoeffFile::Cyclotomic { .. } => {
                return Err(Error::Parse(
                    "this operation takes rational coefficients only".into(),
                ))
            }
        };
        s.add_term(&t, &term.mu, c)?;
    }
    Ok(s)
}

fn load_series_cyclo(path: &str) -> Result<FormalSeries<Cyclo>, Error> {
    let file = read_series_file(path)?;
    let lat = parse_lattice(&file.lattice)?;
    let trunc = parse_q(&file.trunc)?;
    let mut s = FormalSeries::new(&lat, file.genus, trunc);
    for term in &file.terms {
        let t = term_moment(term, file.genus)?;
        let c = match &term.c {
            CoeffFile::Rational(r) => Cyclo::from_q(1, parse_q(r)?),
            CoeffFile::Cyclotomic { conductor, coeffs } => {
                let mut acc = Cyclo::zero(*conductor);
                for (k, e) in coeffs.iter().enumerate() {
                    acc = acc.add(&Cyclo::zeta_pow(*conductor, k as i64).scale(&parse_q(e)?));
                }
                acc
            }
        };
        s.add_term(&t, &term.mu, c)?;
    }
    Ok(s)
}

// ---------------------------------------------------------------------------
// JSON rendering helpers
// ---------------------------------------------------------------------------

fn qmat_json(m: &QMat) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|i| {
                Value::Array((0..m.cols()).map(|j| json!(fmt_q(m.at(i, j)))).collect())
            })
            .collect(),
    )
}

fn imat_json(m: &IMat) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|i| Value::Array((0..m.cols()).map(|j| json!(m.at(i, j))).collect()))
            .collect(),
    )
}

fn complex_str(z: Complex64) -> String {
    let mut s = String::new();
    let _ = write!(s, "{:+.12e}{:+.12e}i", z.re, z.im);
    s
}

fn cyclo_json(c: &Cyclo) -> Value {
    json!({
        "conductor": c.conductor(),
        "coeffs": c.power_basis_coeffs().iter().map(fmt_q).collect::<Vec<_>>(),
        "approx": complex_str(c.to_complex()),
    })
}

fn cmat_json(m: &CMat) -> Value {
    Value::Array(
        (0..m.rows)
            .map(|i| Value::Array((0..m.cols).map(|j| cyclo_json(m.at(i, j))).collect()))
            .collect(),
    )
}

fn key_json(key: &CycleKey) -> Value {
    match key {
        CycleKey::Zero => json!({ "zero": true }),
        CycleKey::Cls { .. } => {
            let t = key.moment().expect("class key has a moment");
            json!({ "t": qmat_json(&t), "mu": key.tuple().expect("class key has cosets") })
        }
    }
}

fn series_json_q(s: &FormalSeries<Q>) -> Value {
    let terms: Vec<Value> = s
        .support()
        .map(|(k, c)| {
            let mut v = key_json(k);
            v["c"] = json!(fmt_q(c));
            v
        })
        .collect();
    json!({
        "lattice": lattice_json(s.lattice()),
        "genus": s.genus(),
        "trunc": fmt_q(s.trunc()),
        "terms": terms,
    })
}

fn series_json_cyclo(s: &FormalSeries<Cyclo>) -> Value {
    let terms: Vec<Value> = s
        .support()
        .map(|(k, c)| {
            let mut v = key_json(k);
            v["c"] = cyclo_json(c);
            v
        })
        .collect();
    json!({
        "lattice": lattice_json(s.lattice()),
        "genus": s.genus(),
        "trunc": fmt_q(s.trunc()),
        "terms": terms,
    })
}

fn lattice_json(lat: &QuadLattice) -> Value {
    json!({
        "name": lat.name(),
        "gram": imat_json(lat.gram()),
    })
}

fn certificate_json(cert: &EmbeddingCertificate) -> Value {
    json!({
        "source_gram": imat_json(&cert.source_gram),
        "target": {
            "label": cert.target.label(),
            "gram": imat_json(cert.target.gram()),
        },
        "matrix": imat_json(&cert.matrix),
        "primitive": cert.primitive,
    })
}

// ---------------------------------------------------------------------------
// Command implementations: each returns (payload, exit code)
// ---------------------------------------------------------------------------

fn run_disc(a: &DiscArgs) -> Result<(Value, u8), Error> {
    let lat = parse_lattice(&a.lattice)?;
    let disc = lat.discriminant_form();
    let (pos, neg) = lat.signature();
    Ok((
        json!({
            "lattice": lattice_json(&lat),
            "rank": lat.rank(),
            "det": lat.det().to_string(),
            "signature": [pos, neg],
            "level": lat.level(),
            "order": disc.order(),
            "gamma": disc.gamma(),
            "invariant_factors": disc.invariant_factors(),
            "q_values": (0..disc.order()).take(64)
                .map(|i| fmt_q(disc.q_value(i))).collect::<Vec<_>>(),
        }),
        0,
    ))
}

fn run_theta(a: &ThetaArgs) -> Result<(Value, u8), Error> {
    let lat = parse_lattice(&a.lattice)?;
    let max_trace = parse_q(&a.max_trace)?;
    let table = theta_table(&lat, a.genus, &max_trace, a.budget)?;
    let disc = lat.discriminant_form();
    let terms: Vec<Value> = table
        .counts
        .iter()
        .map(|((flat, key), count)| {
            let mu = ThetaTable::tuple_digits(disc.order(), *flat, a.genus);
            json!({
                "T": qmat_json(&table.key_to_moment(key)),
                "mu": mu,
                "count": count.to_string(),
            })
        })
        .collect();
    let mut payload = json!({
        "lattice": lattice_json(&lat),
        "genus": a.genus,
        "max_trace": fmt_q(&max_trace),
        "num_terms": terms.len(),
        "terms": terms,
    });
    if a.genus == 1 {
        // convenience row: totals at integer traces 0, 1, ..., floor(max)
        let profile = table.trace_profile();
        let top = (max_trace.numer() / max_trace.denom())
            .to_string()
            .parse::<i64>()
            .unwrap_or(0);
        let counts: Vec<String> = (0..=top)
            .map(|n| profile.get(&(n * table.lev)).copied().unwrap_or(0).to_string())
            .collect();
        payload["counts"] = json!(counts);
    }
    Ok((payload, 0))
}

fn run_repnum(a: &RepnumArgs) -> Result<(Value, u8), Error> {
    let lat = parse_lattice(&a.lattice)?;
    let moment = parse_qmat(&a.moment)?;
    let coset = match &a.coset {
        Some(c) => parse_usize_list(c)?,
        None => vec![0; moment.rows()],
    };
    if coset.len() != moment.rows() {
        return Err(Error::Dimension(
            "coset tuple length must match the moment size".into(),
        ));
    }
    let count = representation_number(&lat, &moment, &coset, a.budget)?;
    Ok((
        json!({
            "lattice": lattice_json(&lat),
            "moment": qmat_json(&moment),
            "coset": coset,
            "count": count.to_string(),
        }),
        0,
    ))
}

fn run_weil(a: &WeilArgs) -> Result<(Value, u8), Error> {
    let lat = parse_lattice(&a.lattice)?;
    let rep = verify_metaplectic_relations(&lat)?;
    let space = WeilSpace::new(&lat, a.genus)?;
    let mut payload = json!({
        "lattice": lattice_json(&lat),
        "genus": a.genus,
        "conductor": space.conductor(),
        "dim": space.dim(),
        "relations": {
            "braid": rep.braid,
            "s2_flip": rep.s2_flip,
            "s2_central": rep.s2_central,
            "unitary": rep.unitary,
            "s2_scalar": rep.s2_scalar.as_ref().map(cyclo_json),
            "s4_scalar": rep.s4_scalar.as_ref().map(cyclo_json),
        },
    });
    let mut code = if rep.all_hold() { 0 } else { 2 };
    if let Some(word) = &a.word {
        let w = parse_word(word, a.genus)?;
        let m = space.weil_matrix(&w)?;
        let unitary = is_unitary(&m);
        payload["word"] = json!(word);
        payload["matrix"] = cmat_json(&m);
        payload["matrix_unitary"] = json!(unitary);
        if !unitary {
            code = 2;
        }
    }
    Ok((payload, code))
}

fn run_modcheck(a: &ModcheckArgs) -> Result<(Value, u8), Error> {
    let lat = parse_lattice(&a.lattice)?;
    let word = parse_word(&a.word, a.genus)?;
    let tau = parse_tau(&a.tau, a.genus)?;
    let max_trace = parse_q(&a.max_trace)?;
    let rep = modularity_check(&lat, a.genus, &word, &tau, &max_trace, a.tolerance, a.budget)?;
    Ok((
        json!({
            "lattice": lattice_json(&lat),
            "genus": a.genus,
            "word": a.word,
            "tau": a.tau,
            "max_trace": fmt_q(&max_trace),
            "residual": rep.residual,
            "tail_allowance": rep.tail_allowance,
            "tolerance": rep.tolerance,
            "verdict": if rep.ok { "PASS" } else { "FAIL" },
        }),
        if rep.ok { 0 } else { 2 },
    ))
}

fn run_jacobicheck(a: &JacobicheckArgs) -> Result<(Value, u8), Error> {
    let lat = parse_lattice(&a.lattice)?;
    let max_trace = parse_q(&a.max_trace)?;
    let tau = parse_tau(&a.tau, 2)?;
    let x = parse_i64_list(&a.x)?;
    let y = parse_i64_list(&a.y)?;
    if x.len() != 1 || y.len() != 1 {
        return Err(Error::Dimension(
            "genus-2 translation columns have one entry".into(),
        ));
    }
    let table = theta_table(&lat, 2, &max_trace, a.budget)?;
    let slices_ok = fourier_jacobi_consistency(&table)?;
    let words = [
        ("S1".to_string(), MpWord::embedded_s1(2)),
        ("T1".to_string(), MpWord::embedded_t1(2)),
        (
            format!("translate({},{})", x[0], y[0]),
            qlat::cycles::translation_word(1, &x, &y),
        ),
    ];
    let mut all_ok = slices_ok;
    let mut checks = Vec::new();
    for (name, word) in &words {
        let rep = modularity_check(&lat, 2, word, &tau, &max_trace, a.tolerance, a.budget)?;
        all_ok &= rep.ok;
        checks.push(json!({
            "word": name,
            "residual": rep.residual,
            "tail_allowance": rep.tail_allowance,
            "ok": rep.ok,
        }));
    }
    Ok((
        json!({
            "lattice": lattice_json(&lat),
            "max_trace": fmt_q(&max_trace),
            "tau": a.tau,
            "tolerance": a.tolerance,
            "slice_decomposition_ok": slices_ok,
            "transformations": checks,
            "verdict": if all_ok { "PASS" } else { "FAIL" },
        }),
        if all_ok { 0 } else { 2 },
    ))
}

fn run_factorcheck(a: &FactorcheckArgs) -> Result<(Value, u8), Error> {
    let left = parse_lattice(&a.left)?;
    let right = parse_lattice(&a.right)?;
    let max_trace = parse_q(&a.max_trace)?;
    let rep = factorization_check(&left, &right, a.genus, &max_trace, a.budget)?;
    Ok((
        json!({
            "left": lattice_json(&left),
            "right": lattice_json(&right),
            "genus": a.genus,
            "max_trace": fmt_q(&max_trace),
            "cells_checked": rep.cells_checked,
            "mismatch": rep.mismatch,
            "verdict": if rep.ok { "PASS" } else { "FAIL" },
        }),
        if rep.ok { 0 } else { 2 },
    ))
}

fn run_cycles(cmd: &CyclesCmd) -> Result<(Value, u8), Error> {
    match cmd {
        CyclesCmd::Intersect(a) => {
            let sa = load_series_q(&a.series_a)?;
            let sb = load_series_q(&a.series_b)?;
            let trunc = parse_q(&a.trunc)?;
            let prod = intersect(&sa, &sb, &trunc)?;
            Ok((json!({ "series": series_json_q(&prod) }), 0))
        }
        CyclesCmd::Pullback(a) => {
            let sharp = load_series_q(&a.series)?;
            let l = parse_lattice(&a.lattice)?;
            let k = parse_lattice(&a.selfdual)?;
            let trunc = parse_q(&a.trunc)?;
            let pulled = pullback(&sharp, &l, &k, &trunc)?;
            Ok((json!({ "series": series_json_q(&pulled) }), 0))
        }
        CyclesCmd::Translate(a) => {
            let s = load_series_cyclo(&a.series)?;
            let x = parse_i64_list(&a.x)?;
            let y = parse_i64_list(&a.y)?;
            let (out, rep) = translation_action(&s, &x, &y)?;
            Ok((
                json!({
                    "series": series_json_cyclo(&out),
                    "keys_checked": rep.keys_checked,
                    "vectors_compared": rep.vectors_compared,
                }),
                0,
            ))
        }
    }
}

fn run_embed(cmd: &EmbedCmd) -> Result<(Value, u8), Error> {
    match cmd {
        EmbedCmd::Hyperbolic(a) => {
            let lat = parse_lattice(&a.lattice)?;
            let payload = match find_hyperbolic_pair(&lat, a.budget)? {
                PairOutcome::Found { l, lstar } => json!({
                    "lattice": lattice_json(&lat),
                    "found": true,
                    "l": l,
                    "lstar": lstar,
                }),
                PairOutcome::NotFound { height, min_pairing_content } => json!({
                    "lattice": lattice_json(&lat),
                    "found": false,
                    "height_searched": height,
                    "min_pairing_content": min_pairing_content,
                }),
            };
            Ok((payload, 0))
        }
        EmbedCmd::Overlattice(a) => {
            let lat = parse_lattice(&a.lattice)?;
            let outcome = match (&a.target, a.extra_hyperbolic) {
                (Some(t), _) => {
                    let target = parse_target(t)?;
                    certify_selfdual_overlattice(&lat, &target, a.budget)?
                }
                (None, Some(r)) => overlattice_at_r(&lat, r, a.budget)?,
                (None, None) => {
                    return Err(Error::Parse(
                        "give either --target or --extra-hyperbolic".into(),
                    ))
                }
            };
            let payload = match &outcome {
                OverlatticeOutcome::Resolved(cert) => json!({
                    "lattice": lattice_json(&lat),
                    "resolved": true,
                    "certificate": certificate_json(cert),
                }),
                OverlatticeOutcome::Unresolved { reason } => json!({
                    "lattice": lattice_json(&lat),
                    "resolved": false,
                    "reason": reason,
                }),
            };
            Ok((payload, 0))
        }
        EmbedCmd::Rbounds(a) => {
            let lat = parse_lattice(&a.lattice)?;
            let rc = r_bounds(&lat, a.max_r, a.budget)?;
            Ok((
                json!({
                    "lattice": lattice_json(&lat),
                    "lower": rc.lower,
                    "lower_witness": rc.lower_witness,
                    "upper": rc.upper,
                    "certificate": rc.certificate.as_ref().map(certificate_json),
                }),
                0,
            ))
        }
    }
}

/// "odd:p,q" or a lattice spec naming an even self-dual lattice.
fn parse_target(s: &str) -> Result<SelfDualTarget, Error> {
    if let Some(body) = s.strip_prefix("odd:") {
        let parts = parse_usize_list(body)?;
        if parts.len() != 2 {
            return Err(Error::Parse(format!("target `{s}` needs two counts p,q")));
        }
        return Ok(SelfDualTarget::odd_diagonal(parts[0], parts[1]));
    }
    let lat = parse_lattice(s)?;
    SelfDualTarget::even_unimodular(&lat)
}

fn run_verify_all(a: &VerifyAllArgs) -> Result<(Value, u8), Error> {
    let outcomes = qlat::checks::run_all(a.budget)?;
    let mut all_ok = true;
    let results: Vec<Value> = outcomes
        .iter()
        .map(|o| {
            all_ok &= o.ok;
            eprintln!(
                "{}: {} - {}",
                if o.ok { "PASS" } else { "FAIL" },
                o.name,
                o.detail.trim_end_matches([' ', ';'])
            );
            json!({
                "name": o.name,
                "ok": o.ok,
                "detail": o.detail.trim_end_matches([' ', ';']),
                "seconds": o.seconds,
            })
        })
        .collect();
    Ok((
        json!({ "results": results, "all_ok": all_ok }),
        if all_ok { 0 } else { 2 },
    ))
}

// ---------------------------------------------------------------------------

/// Input-shaped failures exit 1; verification and resource failures exit 2.
fn classify(err: &Error) -> u8 {
    match err {
        Error::Parse(_)
        | Error::Dimension(_)
        | Error::NotSymmetric
        | Error::NotPositiveDefinite
        | Error::OddDiagonal(_)
        | Error::Degenerate
        | Error::NotPrime(_)
        | Error::BadGenus => 1,
        Error::EnumBudget { .. }
        | Error::Precision(_)
        | Error::Verify(_)
        | Error::Unsupported(_) => 2,
    }
}

fn emit(doc: &Value, output: Option<&str>) {
    let text = serde_json::to_string_pretty(doc).expect("JSON rendering");
    println!("{text}");
    if let Some(path) = output {
        if let Err(e) = std::fs::write(path, &text) {
            eprintln!("warning: could not write {path}: {e}");
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // help/version requests are success, everything else is usage
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let result = match &cli.cmd {
        Cmd::Disc(a) => run_disc(a),
        Cmd::Theta(a) => run_theta(a),
        Cmd::Repnum(a) => run_repnum(a),
        Cmd::Weil(a) => run_weil(a),
        Cmd::Modcheck(a) => run_modcheck(a),
        Cmd::Jacobicheck(a) => run_jacobicheck(a),
        Cmd::Factorcheck(a) => run_factorcheck(a),
        Cmd::Cycles(c) => run_cycles(c),
        Cmd::Embed(c) => run_embed(c),
        Cmd::VerifyAll(a) => run_verify_all(a),
    };
    match result {
        Ok((payload, code)) => {
            let mut doc = json!({
                "version": VERSION,
                "input": argv,
            });
            if let (Value::Object(base), Value::Object(extra)) = (&mut doc, payload) {
                base.extend(extra);
            }
            emit(&doc, cli.output.as_deref());
            ExitCode::from(code)
        }
        Err(err) => {
            let doc = json!({
                "version": VERSION,
                "input": argv,
                "error": err.to_string(),
            });
            emit(&doc, cli.output.as_deref());
            ExitCode::from(classify(&err))
        }
    }
}
