//! The tower F_{q²} = F_q[β]/(β² + β + ν): encodings, conjugation, norm,
//! the unit circle and the small solvers built on them.
//!
//!     cargo run --example field_basics -- 4

use kimgold::{FieldCtx, FieldElem};

fn main() -> kimgold::Result<()> {
    let m = std::env::args()
        .nth(1)
        .map_or(Ok(4), |s| s.parse())
        .expect("m is an integer");
    let ctx = FieldCtx::new(m)?;
    println!("{ctx:?}");
    println!(
        "GF(2^{}) over GF(2^{m}): {} elements, |U| = {}",
        ctx.n(),
        ctx.size(),
        ctx.unit_circle().len()
    );

    let z = ctx.from_parts(3, 5); // 3 + 5β
    let zq = ctx.frobenius_q(z);
    println!(
        "z = {z} = ({}, {}), z^q = {zq}, N(z) = {}",
        ctx.lo(z),
        ctx.hi(z),
        ctx.norm(z)
    );

    let (x, y) = ctx.polar_decompose(z)?;
    println!(
        "polar: z = {x} * {} with {x} in F_q and N({}) = 1",
        y.elem(),
        y.elem()
    );

    // w² + w = c is solvable over F_q exactly when Tr(c) = 0
    for c in ctx.subfield_elements().step_by(3) {
        match ctx.solve_artin_schreier(c)? {
            Some(w) => println!("Tr({c}) = 0: w = {w} solves w^2 + w = {c}"),
            None => println!("Tr({c}) = 1: w^2 + w = {c} has no solution in F_q"),
        }
    }

    if let Some(w) = ctx.cube_root_of_unity() {
        println!(
            "primitive cube root of unity in F_q: {w}; on U? {}",
            ctx.in_unit_circle(w)
        );
    }
    let g = ctx.generator();
    println!(
        "generator {g}, g^(q^2-1) = {}",
        ctx.pow(g, ctx.size() as u64 - 1)
    );
    assert_eq!(ctx.mul(z, ctx.inv(z)?), FieldElem::ONE);
    Ok(())
}
