//! Algebraic laws on randomly drawn fields, elements and maps.

use kimgold::ddt::{is_apn_bruteforce, table_of_kim};
use kimgold::kim::{eval_kim, gamma_report, normalize_a1, substitute};
use kimgold::{FieldCtx, FieldElem, KimCoeffs, LinMap};
use proptest::prelude::*;

fn elem(ctx: &FieldCtx, raw: u32) -> FieldElem {
    FieldElem::from_raw(raw % ctx.size())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_axioms(m in 2u32..=8, a in any::<u32>(), b in any::<u32>(), c in any::<u32>()) {
        let ctx = FieldCtx::new(m).unwrap();
        let (a, b, c) = (elem(&ctx, a), elem(&ctx, b), elem(&ctx, c));
        prop_assert_eq!(ctx.mul(a, b), ctx.mul(b, a));
        prop_assert_eq!(ctx.mul(a, ctx.mul(b, c)), ctx.mul(ctx.mul(a, b), c));
        prop_assert_eq!(ctx.mul(a, b + c), ctx.mul(a, b) + ctx.mul(a, c));
        prop_assert_eq!(ctx.square(a + b), ctx.square(a) + ctx.square(b));
        prop_assert_eq!(ctx.pow(a, ctx.size() as u64), a);
        if !a.is_zero() {
            prop_assert_eq!(ctx.mul(a, ctx.inv(a).unwrap()), FieldElem::ONE);
            let (x, y) = ctx.polar_decompose(a).unwrap();
            prop_assert!(ctx.in_subfield(x));
            prop_assert_eq!(ctx.mul(x, y.elem()), a);
        }
        prop_assert!(ctx.in_subfield(ctx.norm(a)));
        prop_assert_eq!(ctx.frobenius_q(ctx.frobenius_q(a)), a);
    }

    #[test]
    fn linmap_composition_matches_evaluation(m in 2u32..=5, seed in any::<[u32; 20]>(), x in any::<u32>()) {
        let ctx = FieldCtx::new(m).unwrap();
        let n = ctx.n() as usize;
        let l = LinMap::from_coeffs(&ctx, seed[..n].iter().map(|&v| elem(&ctx, v)).collect()).unwrap();
        let k = LinMap::from_coeffs(&ctx, seed[10..10 + n].iter().map(|&v| elem(&ctx, v)).collect()).unwrap();
        let x = elem(&ctx, x);
        prop_assert_eq!(l.compose(&ctx, &k).eval(&ctx, x), l.eval(&ctx, k.eval(&ctx, x)));
        prop_assert_eq!(l.compose(&ctx, &k).to_matrix(&ctx), l.to_matrix(&ctx).mul(&k.to_matrix(&ctx)));
        prop_assert_eq!(LinMap::from_matrix(&ctx, &l.to_matrix(&ctx)), l.clone());
        if let Ok(inv) = l.inverse(&ctx) {
            prop_assert_eq!(inv.compose(&ctx, &l), LinMap::identity(&ctx));
        } else {
            prop_assert!(!l.is_bijective(&ctx));
        }
    }

    #[test]
    fn substitution_law(a1 in any::<u32>(), a2 in any::<u32>(), a3 in any::<u32>(), c in 1u32..256, x in any::<u32>()) {
        let ctx = FieldCtx::new(4).unwrap();
        let k = KimCoeffs::new(&ctx, elem(&ctx, a1), elem(&ctx, a2), elem(&ctx, a3));
        let c = FieldElem::from_raw(c);
        let x = elem(&ctx, x);
        let s = substitute(&ctx, &k, c).unwrap();
        // c^{-3q} f(c x) = f'(x)
        let c3q = ctx.frobenius_q(ctx.pow(c, 3));
        prop_assert_eq!(ctx.div(eval_kim(&ctx, &k, ctx.mul(c, x)), c3q).unwrap(), eval_kim(&ctx, &s, x));
    }

    #[test]
    fn normalization_preserves_apn(a1 in any::<u32>(), a2 in any::<u32>(), a3 in any::<u32>()) {
        let ctx = FieldCtx::new(4).unwrap();
        let k = KimCoeffs::new(&ctx, elem(&ctx, a1), elem(&ctx, a2), elem(&ctx, a3));
        let (norm, frag) = normalize_a1(&ctx, &k).unwrap();
        prop_assert!(norm.a1_in_subfield(&ctx));
        prop_assert!(frag.holds(&ctx, &k, &norm));
        let ddt = is_apn_bruteforce(&table_of_kim(&ctx, &k));
        prop_assert_eq!(gamma_report(&ctx, &norm).unwrap().apn, ddt);
    }
}
