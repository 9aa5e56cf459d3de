//! Classify one triple and print its equivalence witness as JSON.
//!
//!     cargo run --example witness -- 4 0 16 245

use kimgold::cli::{verify_document, witness, FieldArgs, OracleMode};
use kimgold::{FieldCtx, KimCoeffs};

fn main() -> kimgold::Result<()> {
    let args: Vec<u64> = std::env::args()
        .skip(1)
        .map(|s| kimgold::field::parse_int(&s))
        .collect::<Result<_, _>>()?;
    let (m, a1, a2, a3) = match args[..] {
        [m, a1, a2, a3] => (m as u32, a1, a2, a3),
        _ => (4, 0, 16, 245),
    };
    let ctx = FieldCtx::new(m)?;
    let k = KimCoeffs::from_encodings(&ctx, a1, a2, a3)?;
    let report = witness(&ctx, &k, OracleMode::Full)?;
    let json = serde_json::to_value(&report)?;
    println!("{}", serde_json::to_string_pretty(&json)?);
    if report.witness.is_some() {
        let check = verify_document(&json, &FieldArgs::default())?;
        eprintln!(
            "route {:?} -> {:?}; independent re-verification: {}",
            report.route, report.target, check.valid
        );
    }
    Ok(())
}
