//! Differential uniformity of the Gold functions and of the Kim function
//! x^3 + x^10 + u x^24 on GF(2^6).
//!
//!     cargo run --release --example gold_ddt

use kimgold::ddt::{differential_uniformity, table_of_exponent, FunctionTable};
use kimgold::{FieldCtx, Target};

fn main() -> kimgold::Result<()> {
    for m in [3, 4, 5, 6] {
        let ctx = FieldCtx::new(m)?;
        for t in [Target::G1, Target::G2] {
            let e = t.exponent(&ctx);
            let d = differential_uniformity(&table_of_exponent(&ctx, e));
            println!("n = {:>2}: δ(x^{e}) = {d}", ctx.n());
        }
    }

    let ctx = FieldCtx::new(3)?; // GF(64)
    let order = (ctx.size() - 1) as u64;
    let mut apn = Vec::new();
    for u in ctx.elements().skip(1) {
        if [3, 7]
            .iter()
            .any(|p| ctx.pow(u, order / p) == kimgold::FieldElem::ONE)
        {
            continue; // not primitive
        }
        let values = ctx
            .elements()
            .map(|x| (ctx.pow(x, 3) + ctx.pow(x, 10) + ctx.mul(u, ctx.pow(x, 24))).value());
        let t = FunctionTable::new(6, values.collect())?;
        if differential_uniformity(&t) == 2 {
            apn.push(u.value());
        }
    }
    println!("Kim function is APN for primitive u in {apn:?}");
    Ok(())
}
