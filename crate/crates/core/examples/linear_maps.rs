//! Linearized polynomials as GF(2)-linear maps: composition, matrices,
//! inversion.
//!
//!     cargo run --example linear_maps

use kimgold::{FieldCtx, FieldElem, LinMap};

fn main() -> kimgold::Result<()> {
    let ctx = FieldCtx::new(4)?;
    // x^q + t x is bijective exactly when t is off the unit circle
    let t = ctx
        .elements()
        .find(|&t| !ctx.in_subfield(t) && !ctx.in_unit_circle(t))
        .unwrap();
    let l = LinMap::conj_plus(&ctx, t);
    println!("L = x^q + {t} x, coefficients {:?}", l.coeffs());
    println!(
        "t on the unit circle? {} -> L bijective? {}",
        ctx.in_unit_circle(t),
        l.is_bijective(&ctx)
    );
    println!("matrix (column j = L(2^j)):\n{:?}", l.to_matrix(&ctx));

    let inv = l.inverse(&ctx)?;
    println!("L^-1 coefficients {:?}", inv.coeffs());
    assert_eq!(inv.compose(&ctx, &l), LinMap::identity(&ctx));

    let f = LinMap::frobenius_power(&ctx, 3);
    let lf = l.compose(&ctx, &f);
    let x = FieldElem::from_raw(0xa5);
    assert_eq!(lf.eval(&ctx, x), l.eval(&ctx, f.eval(&ctx, x)));
    assert_eq!(
        lf.to_matrix(&ctx),
        l.to_matrix(&ctx).mul(&f.to_matrix(&ctx))
    );
    println!("(L ∘ x^8)({x}) = {}", lf.eval(&ctx, x));

    let singular = LinMap::conj_plus(&ctx, FieldElem::ONE);
    println!(
        "x^q + x (1 is on U) has rank {} of {}",
        singular.to_matrix(&ctx).rank(),
        ctx.n()
    );
    Ok(())
}
