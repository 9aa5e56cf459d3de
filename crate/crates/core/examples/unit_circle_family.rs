//! The (u, z) family with a1/a2 on the unit circle and its explicit G2
//! maps.
//!
//!     cargo run --example unit_circle_family

use kimgold::equiv::{family_maps, family_witness, recover_uz, uz_family};
use kimgold::kim::fit_kim_form;
use kimgold::{verify_witness, FieldCtx, Target};

fn main() -> kimgold::Result<()> {
    let ctx = FieldCtx::new(4)?;
    let circle = ctx.unit_circle();
    let (u, z) = (circle[3], circle[7]);
    let k = uz_family(&ctx, u, z)?;
    println!(
        "u = {}, z = {} give a1 = {}, a2 = {}, a3 = {}",
        u.elem(),
        z.elem(),
        k.a1,
        k.a2,
        k.a3
    );
    println!("a1/a2 on U: {}", ctx.in_unit_circle(ctx.div(k.a1, k.a2)?));

    let maps = family_maps(&ctx, u, z)?;
    println!("ω = {}, t = {}, s = {}", maps.omega, maps.t, maps.s);
    let fitted = fit_kim_form(&ctx, |x| {
        maps.l1
            .eval(&ctx, Target::G2.eval(&ctx, maps.l2.eval(&ctx, x)))
    });
    println!(
        "L1 ∘ G2 ∘ L2 coefficients {fitted:?}, closed forms {:?}",
        maps.c
    );

    if let Some((u2, z2)) = recover_uz(&ctx, &k) {
        println!(
            "recovered (u, z) = ({}, {}) from the coefficients",
            u2.elem(),
            z2.elem()
        );
    }
    let w = family_witness(&ctx, u, z)?;
    println!("G2 witness verifies: {}", verify_witness(&ctx, &w));
    Ok(())
}
