//! The Γ predicate against the brute-force DDT on a handful of triples.
//!
//!     cargo run --example apn_check

use kimgold::ddt::{differential_uniformity, table_of_kim};
use kimgold::{gamma_report, FieldCtx, KimCoeffs};

fn main() -> kimgold::Result<()> {
    let ctx = FieldCtx::new(4)?;
    let triples = [
        (0, 0, 0),
        (3, 0, 0),
        (0, 0, 7),
        (0, 16, 245),
        (1, 1, 1),
        (5, 200, 17),
    ];
    println!(
        "{:>16}  {:>6} {:>6} {:>5}  {:>3}",
        "(a1, a2, a3)", "Γ1", "Γ2", "APN", "δ"
    );
    for (a1, a2, a3) in triples {
        let k = KimCoeffs::from_encodings(&ctx, a1, a2, a3)?;
        let r = gamma_report(&ctx, &k)?;
        let delta = differential_uniformity(&table_of_kim(&ctx, &k));
        println!(
            "{:>16}  {:>6} {:>6} {:>5}  {delta:>3}",
            format!("({a1}, {a2}, {a3})"),
            r.gamma1,
            r.gamma2,
            r.apn
        );
        assert_eq!(r.apn, delta == 2);
    }
    Ok(())
}
