//! Batch front end: argument types, the command engines behind the
//! `kimgold` binary, and the exit-code contract.
//!
//! Every command is a plain function returning a serializable report, so the
//! same code paths are reachable from tests without spawning a process.

use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::ddt::{self, differential_uniformity, is_apn_with_scratch, FunctionTable};
use crate::equiv::{classify, RouteTag, Status};
use crate::error::{Error, Result};
use crate::field::{parse_int, FieldCtx, FieldSpec};
use crate::kim::{gamma_report, normalize_a1, KimCoeffs, Thetas, THEOREM_MIN_M};
use crate::linmap::{verify_witness, EquivWitness, LinMap, Target};

/// Environment variable seeding every sampled choice.
pub const SEED_ENV: &str = "KIMGOLD_SEED";
const DEFAULT_SEED: u64 = 0x4b49_4d47;

/// Process exit codes.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Exit {
    Ok = 0,
    Usage = 1,
    Verification = 2,
    Disagreement = 3,
}

impl Exit {
    pub fn code(self) -> i32 {
        self as i32
    }

    /// Which exit code an error surfaces as.
    pub fn of_error(e: &Error) -> Exit {
        match e {
            Error::InvariantViolation(_) => Exit::Verification,
            _ => Exit::Usage,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum OracleMode {
    #[default]
    Off,
    /// Every predicate-positive triple plus this many sampled negatives.
    Sample(u64),
    Positives,
    Full,
}

impl FromStr for OracleMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "off" => Ok(OracleMode::Off),
            "positives" => Ok(OracleMode::Positives),
            "full" => Ok(OracleMode::Full),
            _ => match s.strip_prefix("sample=") {
                Some(n) => Ok(OracleMode::Sample(parse_int(n)?)),
                None => Err(Error::Parse(format!("unknown oracle mode {s:?}"))),
            },
        }
    }
}

impl fmt::Display for OracleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleMode::Off => write!(f, "off"),
            OracleMode::Sample(n) => write!(f, "sample={n}"),
            OracleMode::Positives => write!(f, "positives"),
            OracleMode::Full => write!(f, "full"),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
    #[default]
    Text,
}

/// Which coefficient triples an enumeration visits. `a1` always ranges over
/// F_q.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stratum {
    /// `a2, a3 ∈ F_{q²}`.
    #[default]
    All,
    /// `a2 = 0`, `a3 ∈ F_{q²}`.
    A2Zero,
    /// `a2, a3 ∈ F_q`.
    Subfield,
}

#[derive(Parser, Debug)]
#[command(
    name = "kimgold",
    version,
    about = "APN Kim-type functions and their Gold equivalences"
)]
pub struct Cli {
    #[command(flatten)]
    pub field: FieldArgs,
    /// DDT cross-check: off, sample=N, positives, full.
    #[arg(long, global = true, default_value = "off")]
    pub oracle: OracleMode,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Destination for the main artifact (rows, witness); stdout if absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct FieldArgs {
    /// Subfield degree: the functions live on GF(2^(2m)).
    #[arg(long, global = true)]
    pub m: Option<u32>,
    /// Irreducible polynomial for GF(2^m) as a bitmask, e.g. 0x13.
    #[arg(long, global = true, value_parser = parse_u32)]
    pub fq_poly: Option<u32>,
    /// Trace-one element of GF(2^m) defining the quadratic extension.
    #[arg(long, global = true, value_parser = parse_u32)]
    pub nu: Option<u32>,
}

fn parse_u32(s: &str) -> std::result::Result<u32, String> {
    let v = parse_int(s).map_err(|e| e.to_string())?;
    u32::try_from(v).map_err(|_| format!("{s} does not fit in 32 bits"))
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sweep coefficient triples through the predicate.
    Enumerate {
        #[arg(long, value_enum, default_value_t = Stratum::All)]
        stratum: Stratum,
        /// Only emit rows for predicate-positive triples.
        #[arg(long)]
        positives_only: bool,
    },
    /// θ-constants, Γ flags and the APN verdict for one triple.
    Check { a1: String, a2: String, a3: String },
    /// Classify one triple and write its equivalence witness.
    Witness { a1: String, a2: String, a3: String },
    /// Re-verify a witness file written by `witness`.
    Verify { file: PathBuf },
    /// Differential uniformity of kim:A1,A2,A3 | exp:E | file:PATH.
    Ddt {
        function: String,
        /// Also write the function table (.csv, otherwise little-endian u32).
        #[arg(long)]
        export: Option<PathBuf>,
    },
    /// Differential uniformity of x^3 and x^(2^(m-1)+1).
    Gold,
    /// Quick end-to-end consistency run at m = 4.
    Selftest,
}

/// Everything a command needs besides its own positional arguments.
#[derive(Clone, Debug, Default)]
pub struct RunConfig {
    pub field: FieldArgs,
    pub oracle: OracleMode,
    pub format: OutputFormat,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    pub seed: u64,
}

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> Result<RunConfig> {
        Ok(RunConfig {
            field: cli.field.clone(),
            oracle: cli.oracle,
            format: cli.format,
            jobs: cli.jobs,
            out: cli.out.clone(),
            seed: seed_from_env()?,
        })
    }

    pub fn for_m(m: u32) -> RunConfig {
        RunConfig {
            field: FieldArgs {
                m: Some(m),
                ..FieldArgs::default()
            },
            seed: DEFAULT_SEED,
            ..RunConfig::default()
        }
    }

    pub fn field_ctx(&self) -> Result<FieldCtx> {
        let m = self
            .field
            .m
            .ok_or_else(|| Error::Parse("--m is required".into()))?;
        crate::field::make_field(m, self.field.fq_poly, self.field.nu)
    }

    /// As [`field_ctx`](Self::field_ctx), refusing `m` below the predicate's
    /// scope.
    pub fn theorem_ctx(&self) -> Result<FieldCtx> {
        let ctx = self.field_ctx()?;
        if ctx.m() < THEOREM_MIN_M {
            return Err(Error::BelowTheoremScope(ctx.m()));
        }
        Ok(ctx)
    }
}

/// `KIMGOLD_SEED` if set, else a fixed default.
pub fn seed_from_env() -> Result<u64> {
    match std::env::var(SEED_ENV) {
        Ok(s) => parse_int(&s),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn parse_triple(ctx: &FieldCtx, a1: &str, a2: &str, a3: &str) -> Result<KimCoeffs> {
    KimCoeffs::from_encodings(ctx, parse_int(a1)?, parse_int(a2)?, parse_int(a3)?)
}

// ---------------------------------------------------------------------------
// enumerate

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub struct TripleRow {
    pub a1: u32,
    pub a2: u32,
    pub a3: u32,
    pub gamma1: bool,
    pub gamma2: bool,
    pub apn: bool,
    /// DDT verdict, when the oracle looked at this triple.
    pub oracle: Option<bool>,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct EnumerateSummary {
    pub field_ctx: FieldSpec,
    pub stratum: Stratum,
    pub oracle_mode: String,
    pub triples: u64,
    pub gamma1: u64,
    pub gamma2: u64,
    pub gamma_both: u64,
    pub gamma_union: u64,
    pub apn: u64,
    pub oracle_checked: u64,
    pub oracle_checked_positive: u64,
    pub oracle_checked_negative: u64,
    pub disagreement_count: u64,
    /// The first disagreeing triples, at most 100.
    pub disagreements: Vec<[u32; 3]>,
}

impl EnumerateSummary {
    pub fn consistent(&self) -> bool {
        self.disagreement_count == 0
    }
}

/// How many `(a1, a2)` partitions are evaluated between ordered flushes.
const PARTITION_BATCH: usize = 64;
const MAX_REPORTED_DISAGREEMENTS: usize = 100;

fn stratum_dims(ctx: &FieldCtx, stratum: Stratum) -> (u32, u32) {
    match stratum {
        Stratum::All => (ctx.size(), ctx.size()),
        Stratum::A2Zero => (1, ctx.size()),
        Stratum::Subfield => (ctx.q(), ctx.q()),
    }
}

/// Draws `n` distinct predicate-negative triples uniformly from the stratum
/// by rejection sampling. Fewer are returned if the stratum has fewer
/// negatives.
pub fn sample_negatives(
    ctx: &FieldCtx,
    stratum: Stratum,
    n: u64,
    seed: u64,
) -> Result<HashSet<[u32; 3]>> {
    let (n2, n3) = stratum_dims(ctx, stratum);
    let total = ctx.q() as u64 * n2 as u64 * n3 as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = HashSet::new();
    let mut attempts = 0u64;
    while (out.len() as u64) < n && attempts < 64 * n.max(total) {
        attempts += 1;
        let t = [
            rng.gen_range(0..ctx.q()),
            rng.gen_range(0..n2),
            rng.gen_range(0..n3),
        ];
        let k = KimCoeffs::from_encodings(ctx, t[0] as u64, t[1] as u64, t[2] as u64)?;
        if !gamma_report(ctx, &k)?.apn {
            out.insert(t);
        }
    }
    Ok(out)
}

/// Sweeps the stratum through the predicate, optionally cross-checking with
/// the DDT oracle, and streams one CSV row per triple to `rows` (header
/// first). Rows come out in lexicographic `(a1, a2, a3)` order regardless of
/// the thread count.
pub fn enumerate(
    ctx: &FieldCtx,
    stratum: Stratum,
    oracle: OracleMode,
    seed: u64,
    positives_only: bool,
    rows: Option<&mut dyn Write>,
) -> Result<EnumerateSummary> {
    if ctx.m() < THEOREM_MIN_M {
        return Err(Error::BelowTheoremScope(ctx.m()));
    }
    let sampled = match oracle {
        OracleMode::Sample(n) => sample_negatives(ctx, stratum, n, seed)?,
        _ => HashSet::new(),
    };
    let (n2, n3) = stratum_dims(ctx, stratum);
    let mut writer = rows.map(csv::Writer::from_writer);
    let mut summary = EnumerateSummary {
        field_ctx: ctx.spec(),
        stratum,
        oracle_mode: oracle.to_string(),
        triples: 0,
        gamma1: 0,
        gamma2: 0,
        gamma_both: 0,
        gamma_union: 0,
        apn: 0,
        oracle_checked: 0,
        oracle_checked_positive: 0,
        oracle_checked_negative: 0,
        disagreement_count: 0,
        disagreements: Vec::new(),
    };
    if let Some(w) = writer.as_mut() {
        w.write_record(["a1", "a2", "a3", "gamma1", "gamma2", "apn", "oracle"])?;
    }
    let partitions: Vec<(u32, u32)> = (0..ctx.q())
        .flat_map(|a1| (0..n2).map(move |a2| (a1, a2)))
        .collect();
    let keep_rows = writer.is_some();
    for batch in partitions.chunks(PARTITION_BATCH) {
        let results: Vec<Result<Vec<TripleRow>>> = batch
            .par_iter()
            .map_init(
                || vec![0u32; ctx.size() as usize],
                |stamp, &(a1, a2)| {
                    let mut out = Vec::with_capacity(if keep_rows { n3 as usize } else { 0 });
                    let mut tally = Vec::new();
                    for a3 in 0..n3 {
                        let k = KimCoeffs::from_encodings(ctx, a1 as u64, a2 as u64, a3 as u64)?;
                        let rep = gamma_report(ctx, &k)?;
                        let check = match oracle {
                            OracleMode::Off => false,
                            OracleMode::Full => true,
                            OracleMode::Positives => rep.apn,
                            OracleMode::Sample(_) => rep.apn || sampled.contains(&[a1, a2, a3]),
                        };
                        let verdict =
                            check.then(|| is_apn_with_scratch(&ddt::table_of_kim(ctx, &k), stamp));
                        let row = TripleRow {
                            a1,
                            a2,
                            a3,
                            gamma1: rep.gamma1,
                            gamma2: rep.gamma2,
                            apn: rep.apn,
                            oracle: verdict,
                        };
                        if keep_rows {
                            out.push(row);
                        } else if row.gamma1 || row.gamma2 || row.oracle.is_some() {
                            tally.push(row);
                        }
                    }
                    // without a sink only rows that move a counter are kept
                    Ok(if keep_rows { out } else { tally })
                },
            )
            .collect();
        for part in results {
            for row in part? {
                tally_row(&mut summary, &row);
                if let Some(w) = writer.as_mut() {
                    if !positives_only || row.apn {
                        w.write_record(&[
                            row.a1.to_string(),
                            row.a2.to_string(),
                            row.a3.to_string(),
                            row.gamma1.to_string(),
                            row.gamma2.to_string(),
                            row.apn.to_string(),
                            row.oracle.map(|b| b.to_string()).unwrap_or_default(),
                        ])?;
                    }
                }
            }
        }
        summary.triples += batch.len() as u64 * n3 as u64;
    }
    if let Some(w) = writer.as_mut() {
        w.flush()?;
    }
    Ok(summary)
}

fn tally_row(s: &mut EnumerateSummary, row: &TripleRow) {
    s.gamma1 += row.gamma1 as u64;
    s.gamma2 += row.gamma2 as u64;
    s.gamma_both += (row.gamma1 && row.gamma2) as u64;
    s.gamma_union += (row.gamma1 || row.gamma2) as u64;
    s.apn += row.apn as u64;
    if let Some(v) = row.oracle {
        s.oracle_checked += 1;
        if row.apn {
            s.oracle_checked_positive += 1;
        } else {
            s.oracle_checked_negative += 1;
        }
        if v != row.apn {
            s.disagreement_count += 1;
            if s.disagreements.len() < MAX_REPORTED_DISAGREEMENTS {
                s.disagreements.push([row.a1, row.a2, row.a3]);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// check

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct CheckReport {
    pub field_ctx: FieldSpec,
    pub input: KimCoeffs,
    /// The triple after moving `a1` into F_q; equal to `input` if it was.
    pub normalized: KimCoeffs,
    pub thetas: Thetas,
    pub trace_ok: bool,
    pub gamma1: bool,
    pub gamma2: bool,
    pub apn: bool,
    pub oracle: Option<bool>,
}

impl CheckReport {
    pub fn consistent(&self) -> bool {
        self.oracle.is_none_or(|o| o == self.apn)
    }
}

pub fn check(ctx: &FieldCtx, k: &KimCoeffs, oracle: OracleMode) -> Result<CheckReport> {
    let (norm, _) = normalize_a1(ctx, k)?;
    let rep = gamma_report(ctx, &norm)?;
    let oracle =
        (oracle != OracleMode::Off).then(|| ddt::is_apn_bruteforce(&ddt::table_of_kim(ctx, k)));
    Ok(CheckReport {
        field_ctx: ctx.spec(),
        input: *k,
        normalized: norm,
        thetas: Thetas {
            t1: rep.theta1,
            t2: rep.theta2,
            t3: rep.theta3,
            t4: rep.theta4,
        },
        trace_ok: rep.trace_ok,
        gamma1: rep.gamma1,
        gamma2: rep.gamma2,
        apn: rep.apn,
        oracle,
    })
}

// ---------------------------------------------------------------------------
// witness / verify

/// A witness together with the field it lives in; the on-disk format.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct WitnessFile {
    #[serde(flatten)]
    pub witness: EquivWitness,
    pub field_ctx: FieldSpec,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct ClassifyReport {
    pub status: Status,
    pub target: Option<Target>,
    pub route: Vec<RouteTag>,
    pub witness: Option<WitnessFile>,
    pub field_ctx: FieldSpec,
    pub oracle: Option<bool>,
}

impl ClassifyReport {
    pub fn consistent(&self) -> bool {
        self.oracle
            .is_none_or(|o| o == (self.status == Status::APN))
    }
}

pub fn witness(ctx: &FieldCtx, k: &KimCoeffs, oracle: OracleMode) -> Result<ClassifyReport> {
    let res = classify(ctx, k)?;
    let oracle =
        (oracle != OracleMode::Off).then(|| ddt::is_apn_bruteforce(&ddt::table_of_kim(ctx, k)));
    Ok(ClassifyReport {
        status: res.status,
        target: res.target,
        route: res.route,
        witness: res.witness.map(|witness| WitnessFile {
            witness,
            field_ctx: ctx.spec(),
        }),
        field_ctx: ctx.spec(),
        oracle,
    })
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct VerifyReport {
    pub field_ctx: FieldSpec,
    pub target: Target,
    pub valid: bool,
    /// Why the witness was rejected, when it was.
    pub reason: Option<String>,
}

#[derive(Deserialize)]
struct RawWitness {
    target: Target,
    #[serde(rename = "L1")]
    l1: Vec<u64>,
    #[serde(rename = "L2")]
    l2: Vec<u64>,
    source: RawCoeffs,
    field_ctx: Option<FieldSpec>,
}

#[derive(Deserialize)]
struct RawCoeffs {
    a1: u64,
    a2: u64,
    a3: u64,
}

/// Checks a witness document: either a bare `{target, L1, L2, source,
/// field_ctx}` object or a full `witness` report. Only the field arithmetic,
/// the linear-map evaluator and the pointwise check are involved; none of
/// the construction code is. A document whose field cannot be determined is
/// an error; a well-formed document describing a false claim (including
/// out-of-range coefficients) is reported as invalid.
pub fn verify_document(doc: &Value, fallback: &FieldArgs) -> Result<VerifyReport> {
    let body = match doc.get("witness") {
        Some(Value::Null) => {
            return Err(Error::Parse(
                "the report carries no witness (status NotAPN)".into(),
            ));
        }
        Some(w) => w.clone(),
        None => doc.clone(),
    };
    let raw: RawWitness = serde_json::from_value(body)?;
    let spec = match (raw.field_ctx, doc.get("field_ctx")) {
        (Some(s), _) => s,
        (None, Some(s)) => serde_json::from_value(s.clone())?,
        (None, None) => {
            let m = fallback
                .m
                .ok_or_else(|| Error::Parse("witness has no field_ctx and --m is absent".into()))?;
            crate::field::make_field(m, fallback.fq_poly, fallback.nu)?.spec()
        }
    };
    let ctx = FieldCtx::from_spec(&spec)?;
    let invalid = |reason: String| VerifyReport {
        field_ctx: spec,
        target: raw.target,
        valid: false,
        reason: Some(reason),
    };
    let map = |c: &[u64]| -> Result<LinMap> {
        let coeffs = c.iter().map(|&v| ctx.elem(v)).collect::<Result<Vec<_>>>()?;
        LinMap::from_coeffs(&ctx, coeffs)
    };
    let parsed = map(&raw.l1).and_then(|l1| {
        let l2 = map(&raw.l2)?;
        let source = KimCoeffs::from_encodings(&ctx, raw.source.a1, raw.source.a2, raw.source.a3)?;
        Ok(EquivWitness {
            target: raw.target,
            l1,
            l2,
            source,
        })
    });
    let w = match parsed {
        Ok(w) => w,
        Err(e) => return Ok(invalid(e.to_string())),
    };
    if !w.l1.is_bijective(&ctx) || !w.l2.is_bijective(&ctx) {
        return Ok(invalid("a linear map is singular".into()));
    }
    if !verify_witness(&ctx, &w) {
        return Ok(invalid("target(x) != L1(f(L2(x))) at some x".into()));
    }
    Ok(VerifyReport {
        field_ctx: spec,
        target: w.target,
        valid: true,
        reason: None,
    })
}

pub fn verify_file(path: &Path, fallback: &FieldArgs) -> Result<VerifyReport> {
    let doc: Value = serde_json::from_reader(std::io::BufReader::new(File::open(path)?))?;
    verify_document(&doc, fallback)
}

// ---------------------------------------------------------------------------
// ddt / gold

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct DdtReport {
    pub function: String,
    pub n: u32,
    pub differential_uniformity: u32,
    pub apn: bool,
}

/// Builds the table named by `kim:A1,A2,A3`, `exp:E` or `file:PATH`. The
/// first two need a field (`m ≥ 2`); a file carries its own size.
pub fn function_table(spec: &str, field: &FieldArgs) -> Result<FunctionTable> {
    let ctx = || {
        let m = field
            .m
            .ok_or_else(|| Error::Parse(format!("{spec:?} needs --m")))?;
        crate::field::make_field(m, field.fq_poly, field.nu)
    };
    if let Some(rest) = spec.strip_prefix("kim:") {
        let parts: Vec<&str> = rest.split(',').collect();
        if parts.len() != 3 {
            return Err(Error::Parse(format!("expected kim:A1,A2,A3, got {spec:?}")));
        }
        let ctx = ctx()?;
        let k = parse_triple(&ctx, parts[0], parts[1], parts[2])?;
        Ok(ddt::table_of_kim(&ctx, &k))
    } else if let Some(e) = spec.strip_prefix("exp:") {
        Ok(ddt::table_of_exponent(&ctx()?, parse_int(e)?))
    } else if let Some(p) = spec.strip_prefix("file:") {
        FunctionTable::load(Path::new(p))
    } else {
        Err(Error::Parse(format!(
            "function spec must start with kim:, exp: or file:, got {spec:?}"
        )))
    }
}

pub fn ddt_report(spec: &str, t: &FunctionTable) -> DdtReport {
    let delta = differential_uniformity(t);
    DdtReport {
        function: spec.to_string(),
        n: t.n(),
        differential_uniformity: delta,
        apn: delta == 2,
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct GoldEntry {
    pub exponent: u64,
    pub differential_uniformity: u32,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct GoldReport {
    pub field_ctx: FieldSpec,
    pub n: u32,
    pub g1: GoldEntry,
    pub g2: GoldEntry,
}

impl GoldReport {
    pub fn all_apn(&self) -> bool {
        self.g1.differential_uniformity == 2 && self.g2.differential_uniformity == 2
    }
}

pub fn gold(ctx: &FieldCtx) -> GoldReport {
    let entry = |t: Target| {
        let e = t.exponent(ctx);
        GoldEntry {
            exponent: e,
            differential_uniformity: differential_uniformity(&ddt::table_of_exponent(ctx, e)),
        }
    };
    GoldReport {
        field_ctx: ctx.spec(),
        n: ctx.n(),
        g1: entry(Target::G1),
        g2: entry(Target::G2),
    }
}

// ---------------------------------------------------------------------------
// selftest

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct SelftestReport {
    pub m: u32,
    pub gold_apn: bool,
    pub stratum_triples: u64,
    pub predicate_apn: u64,
    pub oracle_disagreements: u64,
    pub witnesses_verified: u64,
    pub witness_failures: u64,
}

impl SelftestReport {
    pub fn exit(&self) -> Exit {
        if self.oracle_disagreements > 0 {
            Exit::Disagreement
        } else if self.witness_failures > 0 || !self.gold_apn {
            Exit::Verification
        } else {
            Exit::Ok
        }
    }
}

/// The `a2 = 0` stratum at `m = 4`: predicate against the DDT on every
/// triple, and a verified witness for every APN one.
pub fn selftest() -> Result<SelftestReport> {
    let ctx = FieldCtx::new(4)?;
    let summary = enumerate(
        &ctx,
        Stratum::A2Zero,
        OracleMode::Full,
        DEFAULT_SEED,
        false,
        None,
    )?;
    let mut verified = 0;
    let mut failures = 0;
    for a1 in ctx.subfield_elements() {
        for a3 in ctx.elements() {
            let k = KimCoeffs::new(&ctx, a1, crate::field::FieldElem::ZERO, a3);
            match classify(&ctx, &k) {
                Ok(r) if r.status == Status::APN => {
                    if r.witness.as_ref().is_some_and(|w| verify_witness(&ctx, w)) {
                        verified += 1;
                    } else {
                        failures += 1;
                    }
                }
                Ok(_) => {}
                Err(_) => failures += 1,
            }
        }
    }
    Ok(SelftestReport {
        m: 4,
        gold_apn: gold(&ctx).all_apn(),
        stratum_triples: summary.triples,
        predicate_apn: summary.apn,
        oracle_disagreements: summary.disagreement_count,
        witnesses_verified: verified,
        witness_failures: failures,
    })
}

// ---------------------------------------------------------------------------
// output and dispatch

/// Writes a single-record report as pretty JSON, `key: value` lines, or a
/// header plus one CSV row. Nested values are rendered as compact JSON.
pub fn emit<T: Serialize>(report: &T, format: OutputFormat, mut w: impl Write) -> Result<()> {
    let value = serde_json::to_value(report)?;
    match format {
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut w, &value)?;
            writeln!(w)?;
        }
        OutputFormat::Text => {
            for (k, v) in flat_fields(&value) {
                writeln!(w, "{k}: {v}")?;
            }
        }
        OutputFormat::Csv => {
            let fields = flat_fields(&value);
            let mut cw = csv::Writer::from_writer(&mut w);
            cw.write_record(fields.iter().map(|(k, _)| k))?;
            cw.write_record(fields.iter().map(|(_, v)| v))?;
            cw.flush()?;
        }
    }
    Ok(())
}

fn flat_fields(v: &Value) -> Vec<(String, String)> {
    let show = |v: &Value| match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    };
    match v {
        Value::Object(map) => map.iter().map(|(k, v)| (k.clone(), show(v))).collect(),
        other => vec![("value".into(), show(other))],
    }
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

/// Runs one parsed command line and returns the process exit code. Errors
/// are printed to stderr.
pub fn run(cli: Cli) -> i32 {
    let cfg = match RunConfig::from_cli(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return Exit::Usage.code();
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.unwrap_or(0))
        .build();
    let result = match pool {
        Ok(pool) => pool.install(|| dispatch(&cfg, &cli.command)),
        Err(e) => Err(Error::Precondition(e.to_string())),
    };
    match result {
        Ok(exit) => exit.code(),
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::BelowTheoremScope(_) = e {
                eprintln!("hint: the `ddt` subcommand works for any m >= 2");
            }
            Exit::of_error(&e).code()
        }
    }
}

pub fn dispatch(cfg: &RunConfig, cmd: &Command) -> Result<Exit> {
    let stdout = || std::io::stdout().lock();
    match cmd {
        Command::Enumerate {
            stratum,
            positives_only,
        } => {
            let ctx = cfg.theorem_ctx()?;
            // rows go to --out, or to stdout in csv format; the summary
            // then goes to stderr so the two streams stay separable
            let (summary, summary_to_stderr) = match (&cfg.out, cfg.format) {
                (Some(_), _) => {
                    let mut w = sink(&cfg.out)?;
                    (
                        enumerate(
                            &ctx,
                            *stratum,
                            cfg.oracle,
                            cfg.seed,
                            *positives_only,
                            Some(&mut w),
                        )?,
                        false,
                    )
                }
                (None, OutputFormat::Csv) => {
                    let mut w = stdout();
                    (
                        enumerate(
                            &ctx,
                            *stratum,
                            cfg.oracle,
                            cfg.seed,
                            *positives_only,
                            Some(&mut w),
                        )?,
                        true,
                    )
                }
                (None, _) => (
                    enumerate(&ctx, *stratum, cfg.oracle, cfg.seed, *positives_only, None)?,
                    false,
                ),
            };
            if summary_to_stderr {
                emit(&summary, OutputFormat::Json, std::io::stderr())?;
            } else {
                emit(&summary, cfg.format, stdout())?;
            }
            Ok(if summary.consistent() {
                Exit::Ok
            } else {
                Exit::Disagreement
            })
        }
        Command::Check { a1, a2, a3 } => {
            let ctx = cfg.theorem_ctx()?;
            let rep = check(&ctx, &parse_triple(&ctx, a1, a2, a3)?, cfg.oracle)?;
            emit(&rep, cfg.format, sink(&cfg.out)?)?;
            Ok(if rep.consistent() {
                Exit::Ok
            } else {
                Exit::Disagreement
            })
        }
        Command::Witness { a1, a2, a3 } => {
            let ctx = cfg.theorem_ctx()?;
            let rep = witness(&ctx, &parse_triple(&ctx, a1, a2, a3)?, cfg.oracle)?;
            // the witness file is always JSON: it is what `verify` reads
            let mut w = sink(&cfg.out)?;
            serde_json::to_writer_pretty(&mut w, &rep)?;
            writeln!(w)?;
            w.flush()?;
            Ok(if rep.consistent() {
                Exit::Ok
            } else {
                Exit::Disagreement
            })
        }
        Command::Verify { file } => {
            let rep = verify_file(file, &cfg.field)?;
            emit(&rep, cfg.format, sink(&cfg.out)?)?;
            Ok(if rep.valid {
                Exit::Ok
            } else {
                Exit::Verification
            })
        }
        Command::Ddt { function, export } => {
            let t = function_table(function, &cfg.field)?;
            if let Some(p) = export {
                t.save(p)?;
            }
            emit(&ddt_report(function, &t), cfg.format, sink(&cfg.out)?)?;
            Ok(Exit::Ok)
        }
        Command::Gold => {
            let rep = gold(&cfg.field_ctx()?);
            emit(&rep, cfg.format, sink(&cfg.out)?)?;
            Ok(if rep.all_apn() {
                Exit::Ok
            } else {
                Exit::Verification
            })
        }
        Command::Selftest => {
            let rep = selftest()?;
            emit(&rep, cfg.format, sink(&cfg.out)?)?;
            Ok(rep.exit())
        }
    }
}
