//! Sweep a coefficient stratum through the predicate and cross-check the
//! positives with the DDT.
//!
//!     cargo run --release --example enumerate -- 5

use kimgold::cli::{enumerate, OracleMode, Stratum};
use kimgold::FieldCtx;

fn main() -> kimgold::Result<()> {
    let m = std::env::args()
        .nth(1)
        .map_or(Ok(4), |s| s.parse())
        .expect("m is an integer");
    let ctx = FieldCtx::new(m)?;
    for stratum in [Stratum::Subfield, Stratum::A2Zero] {
        let t0 = std::time::Instant::now();
        let s = enumerate(&ctx, stratum, OracleMode::Positives, 0, false, None)?;
        println!(
            "m = {m}, {stratum:?}: {} triples, |Γ1| = {}, |Γ2| = {}, APN = {}, DDT-checked {} with {} disagreements ({:.1?})",
            s.triples,
            s.gamma1,
            s.gamma2,
            s.apn,
            s.oracle_checked,
            s.disagreement_count,
            t0.elapsed()
        );
    }
    Ok(())
}
