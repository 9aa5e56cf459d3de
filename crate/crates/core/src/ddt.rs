//! Brute-force differential analysis on raw truth tables.
//!
//! Nothing here knows about the tower or the Γ predicate: a table is a list
//! of `2^n` integers and field addition is XOR. That independence is what
//! lets it serve as the oracle for the predicate.

use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::FieldCtx;
use crate::kim::{eval_kim, KimCoeffs};

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FunctionTable {
    n: u32,
    values: Vec<u32>,
}

impl FunctionTable {
    pub fn new(n: u32, values: Vec<u32>) -> Result<FunctionTable> {
        if n > 24 || values.len() != 1usize << n {
            return Err(Error::Parse(format!(
                "a table over GF(2^{n}) needs {} entries, got {}",
                1u64 << n.min(63),
                values.len()
            )));
        }
        if let Some(&bad) = values.iter().find(|&&v| v >> n != 0) {
            return Err(Error::BadEncoding(bad as u64, 1 << n));
        }
        Ok(FunctionTable { n, values })
    }

    pub fn from_fn(n: u32, f: impl Fn(u32) -> u32 + Sync) -> Result<FunctionTable> {
        let values = (0..1u32 << n).into_par_iter().map(&f).collect();
        Self::new(n, values)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn get(&self, x: u32) -> u32 {
        self.values[x as usize]
    }

    /// Little-endian 32-bit entries, `2^n` of them.
    pub fn write_binary(&self, mut w: impl Write) -> Result<()> {
        let mut buf = Vec::with_capacity(self.values.len() * 4);
        for v in &self.values {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_binary(mut r: impl Read) -> Result<FunctionTable> {
        let mut buf = Vec::new();
        r.read_to_end(&mut buf)?;
        if buf.len() % 4 != 0 {
            return Err(Error::Parse(
                "binary table length is not a multiple of 4".into(),
            ));
        }
        let values: Vec<u32> = buf
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        let len = values.len();
        if !len.is_power_of_two() {
            return Err(Error::Parse(format!(
                "table length {len} is not a power of two"
            )));
        }
        Self::new(len.trailing_zeros(), values)
    }

    /// Rows `x,f(x)` in the integer encoding, no header.
    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut wr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
        for (x, v) in self.values.iter().enumerate() {
            wr.write_record(&[x.to_string(), v.to_string()])?;
        }
        wr.flush()?;
        Ok(())
    }

    /// Accepts rows `x,f(x)` in any order, decimal or `0x` hex; a
    /// non-numeric first row is taken as a header.
    pub fn read_csv(r: impl Read) -> Result<FunctionTable> {
        let mut rd = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(r);
        let mut pairs = Vec::new();
        for (i, rec) in rd.records().enumerate() {
            let rec = rec?;
            if rec.len() != 2 {
                return Err(Error::Parse(format!("row {}: expected 2 fields", i + 1)));
            }
            match (
                crate::field::parse_int(&rec[0]),
                crate::field::parse_int(&rec[1]),
            ) {
                (Ok(x), Ok(y)) => pairs.push((x, y)),
                _ if i == 0 => continue,
                (Err(e), _) | (_, Err(e)) => return Err(e),
            }
        }
        let len = pairs.len();
        if !len.is_power_of_two() {
            return Err(Error::Parse(format!("{len} rows is not a power of two")));
        }
        let mut values = vec![u32::MAX; len];
        for (x, y) in pairs {
            let slot = values
                .get_mut(x as usize)
                .ok_or_else(|| Error::Parse(format!("x = {x} out of range")))?;
            if *slot != u32::MAX {
                return Err(Error::Parse(format!("x = {x} appears twice")));
            }
            *slot = u32::try_from(y).map_err(|_| Error::BadEncoding(y, len as u64))?;
        }
        Self::new(len.trailing_zeros(), values)
    }

    /// Reads a table file: `.csv` as CSV, anything else as binary.
    pub fn load(path: &Path) -> Result<FunctionTable> {
        let file = std::fs::File::open(path)?;
        if path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
        {
            Self::read_csv(std::io::BufReader::new(file))
        } else {
            Self::read_binary(std::io::BufReader::new(file))
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::io::BufWriter::new(std::fs::File::create(path)?);
        if path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
        {
            self.write_csv(file)
        } else {
            self.write_binary(file)
        }
    }
}

pub fn table_of_kim(ctx: &FieldCtx, k: &KimCoeffs) -> FunctionTable {
    let values = ctx
        .elements()
        .map(|x| eval_kim(ctx, k, x).value())
        .collect();
    FunctionTable { n: ctx.n(), values }
}

pub fn table_of_exponent(ctx: &FieldCtx, e: u64) -> FunctionTable {
    let values = ctx.elements().map(|x| ctx.pow(x, e).value()).collect();
    FunctionTable { n: ctx.n(), values }
}

/// `counts[b] = #{x : f(x ⊕ a) ⊕ f(x) = b}`.
pub fn ddt_row(t: &FunctionTable, a: u32) -> Result<Vec<u32>> {
    if a == 0 || a >> t.n != 0 {
        return Err(Error::Precondition(format!(
            "row index a = {a} must be nonzero and < 2^{}",
            t.n
        )));
    }
    let mut counts = vec![0u32; t.values.len()];
    for (x, &fx) in t.values.iter().enumerate() {
        counts[(fx ^ t.values[x ^ a as usize]) as usize] += 1;
    }
    Ok(counts)
}

fn row_max(t: &FunctionTable, a: u32, counts: &mut [u32]) -> u32 {
    counts.fill(0);
    let hb = 1u32 << (31 - a.leading_zeros());
    let mut best = 0;
    // x and x ⊕ a give the same b; visit one of each pair
    for x in 0..t.values.len() as u32 {
        if x & hb != 0 {
            continue;
        }
        let b = (t.values[x as usize] ^ t.values[(x ^ a) as usize]) as usize;
        counts[b] += 2;
        best = best.max(counts[b]);
    }
    best
}

/// Maximum DDT entry over `a ≠ 0`; rows are spread across the rayon pool.
pub fn differential_uniformity(t: &FunctionTable) -> u32 {
    let size = t.values.len();
    (1..size as u32)
        .into_par_iter()
        .map_init(|| vec![0u32; size], |counts, a| row_max(t, a, counts))
        .max()
        .unwrap_or(0)
}

/// Early-exit APN test: stops at the first `b` reached by two distinct
/// pairs `{x, x ⊕ a}`.
pub fn is_apn_bruteforce(t: &FunctionTable) -> bool {
    let size = t.values.len();
    if size < 2 {
        return false;
    }
    let mut stamp = vec![0u32; size];
    is_apn_with_scratch(t, &mut stamp)
}

/// As [`is_apn_bruteforce`], reusing a caller-owned scratch buffer of length
/// `2^n` (contents are overwritten).
pub fn is_apn_with_scratch(t: &FunctionTable, stamp: &mut [u32]) -> bool {
    let size = t.values.len() as u32;
    stamp.fill(0);
    let v = &t.values;
    for a in 1..size {
        let hb = 1u32 << (31 - a.leading_zeros());
        for x in 0..size {
            if x & hb != 0 {
                continue;
            }
            let b = (v[x as usize] ^ v[(x ^ a) as usize]) as usize;
            if stamp[b] == a {
                return false;
            }
            stamp[b] = a;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldElem;
    use crate::linmap::LinMap;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_table() {
        let ctx = FieldCtx::new(3).unwrap();
        let t = table_of_exponent(&ctx, 1);
        assert_eq!(t.values(), (0..64).collect::<Vec<_>>().as_slice());
        for a in 1..64 {
            let row = ddt_row(&t, a).unwrap();
            for (b, &c) in row.iter().enumerate() {
                assert_eq!(c, if b as u32 == a { 64 } else { 0 });
            }
        }
        assert_eq!(differential_uniformity(&t), 64);
        assert!(!is_apn_bruteforce(&t));
        assert!(ddt_row(&t, 0).is_err());
    }

    #[test]
    fn rows_sum_to_size_and_are_even() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let vals: Vec<u32> = (0..256).map(|_| rng.gen_range(0..256)).collect();
        let t = FunctionTable::new(8, vals).unwrap();
        for a in 1..256 {
            let row = ddt_row(&t, a).unwrap();
            assert_eq!(row.iter().sum::<u32>(), 256);
            assert!(row.iter().all(|c| c % 2 == 0));
        }
        let brute = (1..256)
            .map(|a| *ddt_row(&t, a).unwrap().iter().max().unwrap())
            .max()
            .unwrap();
        assert_eq!(differential_uniformity(&t), brute);
        assert_eq!(is_apn_bruteforce(&t), brute == 2);
    }

    #[test]
    fn kim_table_matches_eval() {
        let ctx = FieldCtx::new(4).unwrap();
        let zero = FieldElem::ZERO;
        assert_eq!(
            table_of_kim(&ctx, &KimCoeffs::new(&ctx, zero, zero, zero)),
            table_of_exponent(&ctx, 3 * ctx.q() as u64)
        );
        let k = KimCoeffs::new(
            &ctx,
            FieldElem::from_raw(3),
            FieldElem::from_raw(200),
            FieldElem::from_raw(77),
        );
        let t = table_of_kim(&ctx, &k);
        for x in ctx.elements() {
            assert_eq!(t.get(x.value()), eval_kim(&ctx, &k, x).value());
        }
    }

    #[test]
    fn gold_rows_at_n8() {
        let ctx = FieldCtx::new(4).unwrap();
        let g1 = table_of_exponent(&ctx, 3);
        for a in 1..256 {
            assert_eq!(*ddt_row(&g1, a).unwrap().iter().max().unwrap(), 2);
        }
        assert!(is_apn_bruteforce(&g1));
        assert_eq!(differential_uniformity(&table_of_exponent(&ctx, 9)), 2);
    }

    #[test]
    fn uniformity_invariant_under_linear_bijections() {
        let ctx = FieldCtx::new(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let bij = |rng: &mut ChaCha8Rng| loop {
            let c = (0..8)
                .map(|_| FieldElem::from_raw(rng.gen_range(0..256)))
                .collect();
            let l = LinMap::from_coeffs(&ctx, c).unwrap();
            if l.is_bijective(&ctx) {
                break l;
            }
        };
        for e in [3u64, 7, 5, 21] {
            let t = table_of_exponent(&ctx, e);
            let d = differential_uniformity(&t);
            for _ in 0..3 {
                let (a, b) = (bij(&mut rng), bij(&mut rng));
                let composed = FunctionTable::new(
                    8,
                    ctx.elements()
                        .map(|x| {
                            a.eval(&ctx, FieldElem::from_raw(t.get(b.eval(&ctx, x).value())))
                                .value()
                        })
                        .collect(),
                )
                .unwrap();
                assert_eq!(differential_uniformity(&composed), d);
            }
        }
    }

    #[test]
    fn io_round_trip() {
        let ctx = FieldCtx::new(3).unwrap();
        let t = table_of_exponent(&ctx, 5);
        let mut bin = Vec::new();
        t.write_binary(&mut bin).unwrap();
        assert_eq!(bin.len(), 64 * 4);
        assert_eq!(FunctionTable::read_binary(bin.as_slice()).unwrap(), t);
        let mut csv = Vec::new();
        t.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv.clone()).unwrap();
        assert!(text.starts_with("0,0\n1,1\n"));
        assert_eq!(FunctionTable::read_csv(csv.as_slice()).unwrap(), t);
        let with_header = format!("x,f(x)\n{text}");
        assert_eq!(FunctionTable::read_csv(with_header.as_bytes()).unwrap(), t);
        assert!(FunctionTable::read_csv("0,1\n1,0\n2,2\n".as_bytes()).is_err());
        assert!(FunctionTable::new(2, vec![0, 1, 2, 4]).is_err());
    }
}
