//! Kim-type functions `f(x) = x^{3q} + a1 x^{2q+1} + a2 x^{q+2} + a3 x^3` on
//! F_{q²}, the θ-constants, and the Γ1/Γ2 APN characterization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldCtx, FieldElem};
use crate::linmap::{Fragment, LinMap};

/// The predicate is only a theorem for `m ≥ 4`.
pub const THEOREM_MIN_M: u32 = 4;

/// Coefficients of a Kim-type function. Immutable.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct KimCoeffs {
    pub a1: FieldElem,
    pub a2: FieldElem,
    pub a3: FieldElem,
}

impl KimCoeffs {
    pub fn new(ctx: &FieldCtx, a1: FieldElem, a2: FieldElem, a3: FieldElem) -> KimCoeffs {
        debug_assert!([a1, a2, a3].iter().all(|a| a.value() < ctx.size()));
        KimCoeffs { a1, a2, a3 }
    }

    /// Range-checked construction from integer encodings.
    pub fn from_encodings(ctx: &FieldCtx, a1: u64, a2: u64, a3: u64) -> Result<KimCoeffs> {
        Ok(KimCoeffs {
            a1: ctx.elem(a1)?,
            a2: ctx.elem(a2)?,
            a3: ctx.elem(a3)?,
        })
    }

    pub fn a1_in_subfield(&self, ctx: &FieldCtx) -> bool {
        ctx.in_subfield(self.a1)
    }

    pub fn all_in_subfield(&self, ctx: &FieldCtx) -> bool {
        [self.a1, self.a2, self.a3]
            .iter()
            .all(|&a| ctx.in_subfield(a))
    }

    fn check_range(&self, ctx: &FieldCtx) -> Result<()> {
        for a in [self.a1, self.a2, self.a3] {
            ctx.elem(a.value() as u64)?;
        }
        Ok(())
    }
}

/// `x̄³ + a1 x̄² x + a2 x̄ x² + a3 x³` with `x̄ = x^q`.
#[inline]
pub fn eval_kim(ctx: &FieldCtx, k: &KimCoeffs, x: FieldElem) -> FieldElem {
    let xb = ctx.frobenius_q(x);
    let xb2 = ctx.square(xb);
    let x2 = ctx.square(x);
    ctx.mul(xb2, xb)
        + ctx.mul(k.a1, ctx.mul(xb2, x))
        + ctx.mul(k.a2, ctx.mul(xb, x2))
        + ctx.mul(k.a3, ctx.mul(x2, x))
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Thetas {
    pub t1: FieldElem,
    pub t2: FieldElem,
    pub t3: FieldElem,
    pub t4: FieldElem,
}

pub fn thetas(ctx: &FieldCtx, k: &KimCoeffs) -> Thetas {
    let a1sq = ctx.square(k.a1);
    let n2 = ctx.norm(k.a2);
    let n3 = ctx.norm(k.a3);
    Thetas {
        t1: FieldElem::ONE + a1sq + n2 + n3,
        t2: k.a1 + ctx.mul(ctx.frobenius_q(k.a2), k.a3),
        t3: ctx.frobenius_q(k.a2) + ctx.mul(k.a1, ctx.frobenius_q(k.a3)),
        t4: a1sq + n2,
    }
}

/// `θ1²θ4 + θ1θ2θ̄2 + θ2²θ3 + θ̄2²θ̄3`.
pub fn gamma1_poly(ctx: &FieldCtx, th: &Thetas) -> FieldElem {
    let t1sq = ctx.square(th.t1);
    let t2b = ctx.frobenius_q(th.t2);
    let cross = ctx.mul(ctx.square(th.t2), th.t3);
    ctx.mul(t1sq, th.t4) + ctx.mul(th.t1, ctx.mul(th.t2, t2b)) + cross + ctx.frobenius_q(cross)
}

/// `θ1²θ3 + θ1θ̄2² + θ2²θ3 + θ̄2²θ̄3`.
pub fn gamma2_poly(ctx: &FieldCtx, th: &Thetas) -> FieldElem {
    let t1sq = ctx.square(th.t1);
    let t2b = ctx.frobenius_q(th.t2);
    let cross = ctx.mul(ctx.square(th.t2), th.t3);
    ctx.mul(t1sq, th.t3) + ctx.mul(th.t1, ctx.square(t2b)) + cross + ctx.frobenius_q(cross)
}

/// `θ1 ≠ 0` and `Tr_m(θ2^{q+1} / θ1²) = 0`, shared by both Γ sets.
fn trace_condition(ctx: &FieldCtx, th: &Thetas) -> Result<bool> {
    if th.t1.is_zero() {
        return Ok(false);
    }
    let arg = ctx.div(ctx.norm(th.t2), ctx.square(th.t1))?;
    if !ctx.in_subfield(arg) {
        return Err(Error::InvariantViolation(format!(
            "trace argument θ2^(q+1)/θ1² = {arg} is not in the subfield"
        )));
    }
    Ok(ctx.trace_m(arg)? == 0)
}

fn require_a1_subfield(ctx: &FieldCtx, k: &KimCoeffs) -> Result<()> {
    k.check_range(ctx)?;
    if !k.a1_in_subfield(ctx) {
        return Err(Error::A1NotInSubfield(k.a1.value()));
    }
    Ok(())
}

pub fn in_gamma1(ctx: &FieldCtx, k: &KimCoeffs) -> Result<bool> {
    require_a1_subfield(ctx, k)?;
    let th = thetas(ctx, k);
    Ok(trace_condition(ctx, &th)? && gamma1_poly(ctx, &th).is_zero())
}

pub fn in_gamma2(ctx: &FieldCtx, k: &KimCoeffs) -> Result<bool> {
    require_a1_subfield(ctx, k)?;
    let th = thetas(ctx, k);
    Ok(trace_condition(ctx, &th)? && gamma2_poly(ctx, &th).is_zero())
}

/// Everything the predicate looks at, in one pass.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct GammaReport {
    pub theta1: FieldElem,
    pub theta2: FieldElem,
    pub theta3: FieldElem,
    pub theta4: FieldElem,
    pub trace_ok: bool,
    pub gamma1: bool,
    pub gamma2: bool,
    pub apn: bool,
}

pub fn gamma_report(ctx: &FieldCtx, k: &KimCoeffs) -> Result<GammaReport> {
    if ctx.m() < THEOREM_MIN_M {
        return Err(Error::BelowTheoremScope(ctx.m()));
    }
    require_a1_subfield(ctx, k)?;
    let th = thetas(ctx, k);
    let trace_ok = trace_condition(ctx, &th)?;
    let gamma1 = trace_ok && gamma1_poly(ctx, &th).is_zero();
    let gamma2 = trace_ok && gamma2_poly(ctx, &th).is_zero();
    let apn = if ctx.m().is_multiple_of(2) {
        gamma1 || gamma2
    } else {
        gamma1
    };
    Ok(GammaReport {
        theta1: th.t1,
        theta2: th.t2,
        theta3: th.t3,
        theta4: th.t4,
        trace_ok,
        gamma1,
        gamma2,
        apn,
    })
}

/// APN decision by the Γ characterization: Γ1 ∪ Γ2 for even `m`, Γ1 alone
/// for odd `m`.
pub fn is_apn_by_theorem(ctx: &FieldCtx, k: &KimCoeffs) -> Result<bool> {
    Ok(gamma_report(ctx, k)?.apn)
}

/// Coefficients of `x ↦ c^{-3q} f(c x)`:
/// `(a1 c^{1-q}, a2 c^{2-2q}, a3 c^{3-3q})`.
pub fn substitute(ctx: &FieldCtx, k: &KimCoeffs, c: FieldElem) -> Result<KimCoeffs> {
    // c^{1-q} = c / c̄
    let ratio = ctx.div(c, ctx.frobenius_q(c))?;
    let r2 = ctx.square(ratio);
    Ok(KimCoeffs {
        a1: ctx.mul(k.a1, ratio),
        a2: ctx.mul(k.a2, r2),
        a3: ctx.mul(k.a3, ctx.mul(r2, ratio)),
    })
}

/// Brings `a1` into F_q by a substitution `x ↦ c x`: with `a1 = x·y` in
/// polar form, `c^{q-1} = y` makes `a1' = x`. Returns the new coefficients
/// and the fragment with `f' = outer ∘ f ∘ inner`, which is checked at every
/// point for fields up to 2^16 elements. Leaves `a2 = 0` at zero.
pub fn normalize_a1(ctx: &FieldCtx, k: &KimCoeffs) -> Result<(KimCoeffs, Fragment)> {
    k.check_range(ctx)?;
    if k.a1_in_subfield(ctx) {
        return Ok((*k, Fragment::identity(ctx)));
    }
    let (_, y) = ctx.polar_decompose(k.a1)?;
    let c = ctx.lift_q_minus_1(y);
    let out = substitute(ctx, k, c)?;
    let c3q = ctx.frobenius_q(ctx.pow(c, 3));
    let frag = Fragment {
        outer: LinMap::scale(ctx, ctx.inv(c3q)?)?,
        inner: LinMap::scale(ctx, c)?,
    };
    if !out.a1_in_subfield(ctx) {
        return Err(Error::InvariantViolation(format!(
            "normalized a1 = {} not in subfield",
            out.a1
        )));
    }
    if ctx.n() <= 16 && !frag.holds(ctx, k, &out) {
        return Err(Error::InvariantViolation(
            "a1 normalization does not hold pointwise".into(),
        ));
    }
    Ok((out, frag))
}

/// The four Kim-shape monomials `x^{3q}, x^{2q+1}, x^{q+2}, x^3` at `x`.
pub fn kim_monomials(ctx: &FieldCtx, x: FieldElem) -> [FieldElem; 4] {
    let xb = ctx.frobenius_q(x);
    let xb2 = ctx.square(xb);
    let x2 = ctx.square(x);
    [
        ctx.mul(xb2, xb),
        ctx.mul(xb2, x),
        ctx.mul(xb, x2),
        ctx.mul(x2, x),
    ]
}

/// Finds `[c0, c1, c2, c3]` with
/// `F(x) = c0 x^{3q} + c1 x^{2q+1} + c2 x^{q+2} + c3 x^3` for every `x`, or
/// `None` if `F` has no such form. The
/// coefficients are solved from the first points that give an invertible
/// system and then checked at every point.
pub fn fit_kim_form(ctx: &FieldCtx, f: impl Fn(FieldElem) -> FieldElem) -> Option<[FieldElem; 4]> {
    // Gauss-Jordan rows: (coefficients, rhs, pivot column)
    let mut rows: Vec<([FieldElem; 4], FieldElem, usize)> = Vec::with_capacity(4);
    for x in ctx.elements() {
        if rows.len() == 4 {
            break;
        }
        let mut row = kim_monomials(ctx, x);
        let mut rhs = f(x);
        for (prow, prhs, p) in &rows {
            let factor = row[*p];
            if !factor.is_zero() {
                for j in 0..4 {
                    row[j] += ctx.mul(factor, prow[j]);
                }
                rhs += ctx.mul(factor, *prhs);
            }
        }
        let Some(p) = (0..4).find(|&j| !row[j].is_zero()) else {
            continue;
        };
        let inv = ctx.inv(row[p]).expect("pivot is nonzero");
        for v in row.iter_mut() {
            *v = ctx.mul(*v, inv);
        }
        rhs = ctx.mul(rhs, inv);
        for (prow, prhs, _) in rows.iter_mut() {
            let factor = prow[p];
            if !factor.is_zero() {
                for j in 0..4 {
                    prow[j] += ctx.mul(factor, row[j]);
                }
                *prhs += ctx.mul(factor, rhs);
            }
        }
        rows.push((row, rhs, p));
    }
    if rows.len() < 4 {
        return None;
    }
    let mut c = [FieldElem::ZERO; 4];
    for (_, rhs, p) in &rows {
        c[*p] = *rhs;
    }
    let fits = ctx.elements().all(|x| {
        let mono = kim_monomials(ctx, x);
        let lhs = (0..4).fold(FieldElem::ZERO, |acc, j| acc + ctx.mul(c[j], mono[j]));
        lhs == f(x)
    });
    fits.then_some(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_elem(ctx: &FieldCtx, rng: &mut impl Rng) -> FieldElem {
        FieldElem::from_raw(rng.gen_range(0..ctx.size()))
    }

    fn rand_sub(ctx: &FieldCtx, rng: &mut impl Rng) -> FieldElem {
        FieldElem::from_raw(rng.gen_range(0..ctx.q()))
    }

    #[test]
    fn eval_matches_generic_powers() {
        let ctx = FieldCtx::new(4).unwrap();
        let q = ctx.q() as u64;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let zero = FieldElem::ZERO;
        let k0 = KimCoeffs::new(&ctx, zero, zero, zero);
        for x in ctx.elements() {
            assert_eq!(eval_kim(&ctx, &k0, x), ctx.pow(x, 3 * q));
        }
        for _ in 0..1000 {
            let k = KimCoeffs::new(
                &ctx,
                rand_elem(&ctx, &mut rng),
                rand_elem(&ctx, &mut rng),
                rand_elem(&ctx, &mut rng),
            );
            let x = rand_elem(&ctx, &mut rng);
            let oracle = ctx.pow(x, 3 * q)
                + ctx.mul(k.a1, ctx.pow(x, 2 * q + 1))
                + ctx.mul(k.a2, ctx.pow(x, q + 2))
                + ctx.mul(k.a3, ctx.pow(x, 3));
            assert_eq!(eval_kim(&ctx, &k, x), oracle);
            assert_eq!(eval_kim(&ctx, &k, zero), zero);
            assert_eq!(
                eval_kim(&ctx, &k, FieldElem::ONE),
                FieldElem::ONE + k.a1 + k.a2 + k.a3
            );
        }
    }

    #[test]
    fn theta_examples() {
        let ctx = FieldCtx::new(4).unwrap();
        let zero = FieldElem::ZERO;
        let th = thetas(&ctx, &KimCoeffs::new(&ctx, zero, zero, zero));
        assert_eq!(
            th,
            Thetas {
                t1: FieldElem::ONE,
                t2: zero,
                t3: zero,
                t4: zero
            }
        );
        for u in ctx.unit_circle() {
            let k = KimCoeffs::new(&ctx, zero, zero, u.elem());
            assert_eq!(thetas(&ctx, &k).t1, zero);
            assert!(!in_gamma1(&ctx, &k).unwrap());
            assert!(!in_gamma2(&ctx, &k).unwrap());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..500 {
            let k = KimCoeffs::new(
                &ctx,
                rand_sub(&ctx, &mut rng),
                rand_sub(&ctx, &mut rng),
                rand_sub(&ctx, &mut rng),
            );
            let th = thetas(&ctx, &k);
            assert_eq!(th.t1, ctx.square(FieldElem::ONE + k.a1 + k.a2 + k.a3));
        }
        for _ in 0..500 {
            let k = KimCoeffs::new(
                &ctx,
                rand_sub(&ctx, &mut rng),
                rand_elem(&ctx, &mut rng),
                rand_elem(&ctx, &mut rng),
            );
            let th = thetas(&ctx, &k);
            assert!(ctx.in_subfield(th.t1) && ctx.in_subfield(th.t4));
            assert_eq!(th, thetas(&ctx, &k));
        }
    }

    #[test]
    fn predicate_scope_and_basic_cases() {
        let c4 = FieldCtx::new(4).unwrap();
        let zero = FieldElem::ZERO;
        let k0 = KimCoeffs::new(&c4, zero, zero, zero);
        assert!(in_gamma1(&c4, &k0).unwrap());
        assert!(is_apn_by_theorem(&c4, &k0).unwrap());
        let c3 = FieldCtx::new(3).unwrap();
        assert!(matches!(
            is_apn_by_theorem(&c3, &k0),
            Err(Error::BelowTheoremScope(3))
        ));
        let kb = KimCoeffs::new(&c4, c4.beta(), zero, zero);
        assert!(matches!(
            in_gamma1(&c4, &kb),
            Err(Error::A1NotInSubfield(_))
        ));
        assert!(matches!(
            is_apn_by_theorem(&c4, &kb),
            Err(Error::A1NotInSubfield(_))
        ));
    }

    #[test]
    fn subfield_gamma_reduces_to_s_and_t() {
        let ctx = FieldCtx::new(4).unwrap();
        let one = FieldElem::ONE;
        for a1 in ctx.subfield_elements() {
            for a2 in ctx.subfield_elements() {
                for a3 in ctx.subfield_elements() {
                    let k = KimCoeffs::new(&ctx, a1, a2, a3);
                    let s = ctx.square(a1) + ctx.mul(a1, a3) + ctx.square(a2) + a2;
                    let t = ctx.mul(a1, a3) + a2 + ctx.square(a3) + one;
                    let th = thetas(&ctx, &k);
                    let tr = trace_condition(&ctx, &th).unwrap();
                    assert_eq!(in_gamma1(&ctx, &k).unwrap(), tr && s.is_zero());
                    assert_eq!(in_gamma2(&ctx, &k).unwrap(), tr && ctx.mul(s, t).is_zero());
                }
            }
        }
    }

    #[test]
    fn substitution_law_exhaustive_m4() {
        let ctx = FieldCtx::new(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..40 {
            let k = KimCoeffs::new(
                &ctx,
                rand_elem(&ctx, &mut rng),
                rand_elem(&ctx, &mut rng),
                rand_elem(&ctx, &mut rng),
            );
            let c = FieldElem::from_raw(rng.gen_range(1..ctx.size()));
            let k2 = substitute(&ctx, &k, c).unwrap();
            let scale = ctx.inv(ctx.pow(c, 3 * ctx.q() as u64)).unwrap();
            for x in ctx.elements() {
                assert_eq!(
                    eval_kim(&ctx, &k2, x),
                    ctx.mul(scale, eval_kim(&ctx, &k, ctx.mul(c, x)))
                );
            }
            let back = substitute(&ctx, &k2, ctx.inv(c).unwrap()).unwrap();
            assert_eq!(back, k);
        }
    }

    #[test]
    fn fit_recovers_coefficients() {
        let ctx = FieldCtx::new(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..20 {
            let c: [FieldElem; 4] = std::array::from_fn(|_| rand_elem(&ctx, &mut rng));
            let f = |x| {
                let m = kim_monomials(&ctx, x);
                (0..4).fold(FieldElem::ZERO, |acc, j| acc + ctx.mul(c[j], m[j]))
            };
            assert_eq!(fit_kim_form(&ctx, f), Some(c));
        }
        // x^5 is not of Kim shape
        assert_eq!(fit_kim_form(&ctx, |x| ctx.pow(x, 5)), None);
    }

    #[test]
    fn normalize_examples() {
        let ctx = FieldCtx::new(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let k = KimCoeffs::new(&ctx, FieldElem::from_raw(7), ctx.beta(), FieldElem::ONE);
        let (k2, frag) = normalize_a1(&ctx, &k).unwrap();
        assert_eq!(k2, k);
        assert_eq!(frag, Fragment::identity(&ctx));
        for _ in 0..200 {
            let a1 = rand_elem(&ctx, &mut rng);
            let a2 = if rng.gen_bool(0.3) {
                FieldElem::ZERO
            } else {
                rand_elem(&ctx, &mut rng)
            };
            let k = KimCoeffs::new(&ctx, a1, a2, rand_elem(&ctx, &mut rng));
            let (k2, frag) = normalize_a1(&ctx, &k).unwrap();
            assert!(k2.a1_in_subfield(&ctx));
            assert!(frag.holds(&ctx, &k, &k2));
            assert!(frag.outer.is_bijective(&ctx) && frag.inner.is_bijective(&ctx));
            if a2.is_zero() {
                assert!(k2.a2.is_zero());
            }
            // both predicates are stable under re-normalization
            let (k3, _) = normalize_a1(&ctx, &k2).unwrap();
            assert_eq!(k3, k2);
        }
    }
}
