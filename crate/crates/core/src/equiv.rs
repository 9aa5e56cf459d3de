//! Classification of APN Kim-type functions with an explicit, verified
//! linear equivalence to `G1(x) = x^3` or `G2(x) = x^{2^{m-1}+1}`.
//!
//! [`classify`] normalizes `a1` into F_q, gates on the Γ predicate, and then
//! dispatches on `a2` and `a1/a2`:
//!
//! * `a2 = 0`: either two coefficients vanish (`P23`) or the predicate forces
//!   `a3 ∈ F_q` (`P24`/`P25`) and the subfield constructions apply.
//! * `a1/a2 = a3^q` (`P28`): never APN with `a2 ≠ 0`.
//! * `a1/a2 ∈ U` (`P26`): subfield coefficients, or the `(u, z)` family with
//!   its explicit `G2` maps (`P27`).
//! * otherwise (`P22`): `x ↦ x^q + (a1/a2) x` kills `a2`, then back to the
//!   `a2 = 0` case.
//!
//! Each stage contributes a fragment `g = outer ∘ f ∘ inner`; the fragments
//! are composed into a single witness, which is verified at every point
//! before it is returned. Debug builds also verify every fragment as it is
//! produced. Any APN input that falls through a case the theory excludes
//! raises [`Error::InvariantViolation`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldCtx, FieldElem, UnitCircleElem};
use crate::kim::{self, fit_kim_form, gamma_report, is_apn_by_theorem, normalize_a1, KimCoeffs};
use crate::linmap::{verify_witness, EquivWitness, Fragment, LinMap, Target};

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum RouteTag {
    Normalize,
    P22,
    P23,
    P24,
    P25,
    #[serde(rename = "P26-subfield")]
    P26Subfield,
    #[serde(rename = "P26-family")]
    P26Family,
    P27,
    P28,
    #[serde(rename = "SmallField-i-S")]
    SmallFieldIS,
    #[serde(rename = "SmallField-i-T")]
    SmallFieldIT,
    #[serde(rename = "SmallField-ii")]
    SmallFieldII,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum Status {
    NotAPN,
    APN,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ClassifyResult {
    pub status: Status,
    pub target: Option<Target>,
    pub witness: Option<EquivWitness>,
    pub route: Vec<RouteTag>,
}

impl ClassifyResult {
    fn not_apn(route: Vec<RouteTag>) -> ClassifyResult {
        ClassifyResult {
            status: Status::NotAPN,
            target: None,
            witness: None,
            route,
        }
    }

    pub fn is_apn(&self) -> bool {
        self.status == Status::APN
    }
}

fn violation(msg: impl Into<String>) -> Error {
    Error::InvariantViolation(msg.into())
}

/// The final stage: `target = outer ∘ current ∘ inner`.
struct Terminal {
    target: Target,
    frag: Fragment,
}

/// Running composition from the original function to the current one.
struct Chain<'c> {
    ctx: &'c FieldCtx,
    source: KimCoeffs,
    current: KimCoeffs,
    frag: Fragment,
    route: Vec<RouteTag>,
}

impl<'c> Chain<'c> {
    fn new(ctx: &'c FieldCtx, source: KimCoeffs) -> Self {
        Chain {
            ctx,
            source,
            current: source,
            frag: Fragment::identity(ctx),
            route: Vec::new(),
        }
    }

    fn step(&mut self, next: KimCoeffs, step: Fragment, tag: RouteTag) -> Result<()> {
        if cfg!(debug_assertions) && !step.holds(self.ctx, &self.current, &next) {
            return Err(violation(format!(
                "{tag:?} fragment does not hold pointwise"
            )));
        }
        self.frag = self.frag.then(self.ctx, &step);
        self.current = next;
        self.route.push(tag);
        Ok(())
    }

    fn finish(self, term: Terminal) -> Result<ClassifyResult> {
        let ctx = self.ctx;
        let local = EquivWitness {
            target: term.target,
            l1: term.frag.outer,
            l2: term.frag.inner,
            source: self.current,
        };
        if cfg!(debug_assertions) && !verify_witness(ctx, &local) {
            return Err(violation(format!(
                "final stage after {:?} does not verify",
                self.route
            )));
        }
        let witness = local.pull_back(ctx, &self.frag, self.source);
        if !verify_witness(ctx, &witness) {
            return Err(violation(format!(
                "composed witness for route {:?} does not verify",
                self.route
            )));
        }
        Ok(ClassifyResult {
            status: Status::APN,
            target: Some(term.target),
            witness: Some(witness),
            route: self.route,
        })
    }
}

/// `x ↦ c0 x + cm x^q`.
fn q_binomial(ctx: &FieldCtx, c0: FieldElem, cm: FieldElem) -> LinMap {
    let mut coeffs = vec![FieldElem::ZERO; ctx.n() as usize];
    coeffs[0] = c0;
    coeffs[ctx.m() as usize] = cm;
    LinMap::from_coeffs(ctx, coeffs).expect("length is 2m")
}

fn scaled(ctx: &FieldCtx, c: FieldElem, l: &LinMap) -> Result<LinMap> {
    Ok(LinMap::scale(ctx, c)?.compose(ctx, l))
}

fn require_m_at_least_4(ctx: &FieldCtx) -> Result<()> {
    if ctx.m() < kim::THEOREM_MIN_M {
        return Err(Error::BelowTheoremScope(ctx.m()));
    }
    Ok(())
}

fn require_apn(ctx: &FieldCtx, k: &KimCoeffs, what: &str) -> Result<()> {
    if !is_apn_by_theorem(ctx, k)? {
        return Err(Error::Precondition(format!("{what}: {k:?} is not APN")));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// a2 = 0 with a1 = 0 or a3 = 0

fn two_zero_terminal(ctx: &FieldCtx, k: &KimCoeffs) -> Result<Terminal> {
    let zero = FieldElem::ZERO;
    if !k.a2.is_zero() || !(k.a1.is_zero() || k.a3.is_zero()) {
        return Err(Error::Precondition(
            "need a2 = 0 and (a1 = 0 or a3 = 0)".into(),
        ));
    }
    if k.a1.is_zero() {
        // (x^q + a3^q x) ∘ f = (a3^{q+1} + 1) x^3
        let lead = ctx.norm(k.a3) + FieldElem::ONE;
        if lead.is_zero() {
            return Err(Error::Precondition(
                "a3 on the unit circle: θ1 = 0, not APN".into(),
            ));
        }
        let outer = scaled(
            ctx,
            ctx.inv(lead)?,
            &LinMap::conj_plus(ctx, ctx.frobenius_q(k.a3)),
        )?;
        return Ok(Terminal {
            target: Target::G1,
            frag: Fragment {
                outer,
                inner: LinMap::identity(ctx),
            },
        });
    }
    // a3 = 0, a1 ≠ 0: the predicate reduces to a1^4 (a1 + 1)^2 = 0 and θ1 = (a1 + 1)^2
    if is_apn_by_theorem(ctx, &KimCoeffs::new(ctx, k.a1, zero, zero))? {
        return Err(violation(format!(
            "(a1, 0, 0) with a1 = {} passes the predicate",
            k.a1
        )));
    }
    Err(Error::Precondition(format!(
        "(a1, 0, 0) with a1 = {} is not APN",
        k.a1
    )))
}

/// Witness to `G1` when `a2 = 0` and `a1 = 0` or `a3 = 0`.
pub fn witness_g1_two_zero(ctx: &FieldCtx, k: &KimCoeffs) -> Result<EquivWitness> {
    require_m_at_least_4(ctx)?;
    let mut chain = Chain::new(ctx, *k);
    chain.route.push(RouteTag::P23);
    let term = two_zero_terminal(ctx, k)?;
    chain
        .finish(term)?
        .witness
        .ok_or_else(|| violation("missing witness"))
}

// ---------------------------------------------------------------------------
// all coefficients in F_q

fn find_r_g1(ctx: &FieldCtx, b: FieldElem) -> Option<FieldElem> {
    ctx.subfield_elements().find(|&r| {
        if ctx.pow(r, 4) == r {
            return false; // r ∈ F_4
        }
        let num = ctx.pow(r + FieldElem::ONE, 3);
        let den = ctx.pow(r, 3) + FieldElem::ONE;
        ctx.div(num, den).map(|bp| bp == b).unwrap_or(false)
    })
}

fn find_r_g2(ctx: &FieldCtx, d: FieldElem) -> Option<FieldElem> {
    ctx.subfield_elements().skip(2).find(|&r| {
        let num = ctx.square(r + FieldElem::ONE);
        ctx.div(num, r).map(|v| v == d).unwrap_or(false)
    })
}

/// Maps for `L2(G1(L1(x))) = (r^6+1) x^{3q} + (r^5+r) x^{2q+1} + (r^4+r^2) x^{q+2}`:
/// `L1 = x^q + r x`, `L2 = r^3 x^q + x`.
pub fn g1_display_maps(ctx: &FieldCtx, r: FieldElem) -> (LinMap, LinMap) {
    (
        LinMap::conj_plus(ctx, r),
        q_binomial(ctx, FieldElem::ONE, ctx.pow(r, 3)),
    )
}

/// Maps for `L(G2(L(x)^{2q})) = (r^3+r) x^{3q} + (r+1)^4 x^{2q+1} + (r^3+r) x^{q+2}`:
/// returns `(L, x ↦ L(x)^{2q})` with `L = x^q + r x`.
pub fn g2_display_maps(ctx: &FieldCtx, r: FieldElem) -> (LinMap, LinMap) {
    let l = LinMap::conj_plus(ctx, r);
    let inner = LinMap::frobenius_power(ctx, ctx.m() + 1).compose(ctx, &l);
    (l, inner)
}

fn form_i_terminal(chain: &mut Chain, c1: FieldElem, c2: FieldElem) -> Result<Terminal> {
    let ctx = chain.ctx;
    let one = FieldElem::ONE;
    let s = ctx.square(c1) + ctx.square(c2) + c2;
    if s.is_zero() {
        chain.route.push(RouteTag::SmallFieldIS);
        if c2.is_zero() {
            // f1 = x^{3q}, and f1^q = G1
            if !c1.is_zero() {
                return Err(violation("S = 0 and c2 = 0 but c1 ≠ 0"));
            }
            let frag = Fragment {
                outer: LinMap::frobenius_power(ctx, ctx.m()),
                inner: LinMap::identity(ctx),
            };
            return Ok(Terminal {
                target: Target::G1,
                frag,
            });
        }
        if c2 == one {
            return Err(violation(
                "form (i) with S = 0 and c2 = 1 has θ1 = 0 yet passed the predicate",
            ));
        }
        let b = ctx.sqrt(c2) + one;
        if c1 != ctx.square(b) + b {
            return Err(violation("S = 0 but c1 ≠ b² + b"));
        }
        let r = find_r_g1(ctx, b).ok_or_else(|| violation(format!("no r ∉ F_4 gives b' = {b}")))?;
        let (l1, l2) = g1_display_maps(ctx, r);
        let lead = ctx.pow(r, 6) + one;
        // f1 = lead^{-1} L2 ∘ G1 ∘ L1, so G1 = L2^{-1} ∘ lead ∘ f1 ∘ L1^{-1}
        let outer = l2.inverse(ctx)?.compose(ctx, &LinMap::scale(ctx, lead)?);
        let inner = l1.inverse(ctx)?;
        return Ok(Terminal {
            target: Target::G1,
            frag: Fragment { outer, inner },
        });
    }
    // S ≠ 0: only Γ2 can hold, which needs T = c2 + 1 = 0 and m even.
    chain.route.push(RouteTag::SmallFieldIT);
    if c2 != one || ctx.m() % 2 == 1 {
        return Err(violation(format!(
            "form (i) with S ≠ 0 needs c2 = 1 and m even (c2 = {c2})"
        )));
    }
    if c1.is_zero() {
        return Err(violation("form (i) with c1 = 0, c2 = 1 has θ1 = 0"));
    }
    let r = find_r_g2(ctx, c1).ok_or_else(|| violation(format!("no r ∉ F_2 gives d = {c1}")))?;
    let (l, inner_map) = g2_display_maps(ctx, r);
    let lead = ctx.pow(r, 3) + r;
    let outer = l.inverse(ctx)?.compose(ctx, &LinMap::scale(ctx, lead)?);
    let inner = inner_map.inverse(ctx)?;
    Ok(Terminal {
        target: Target::G2,
        frag: Fragment { outer, inner },
    })
}

fn form_ii_terminal(chain: &mut Chain, c2: FieldElem) -> Result<Terminal> {
    let ctx = chain.ctx;
    chain.route.push(RouteTag::SmallFieldII);
    if c2 != FieldElem::ONE {
        return Err(violation(format!(
            "form (ii) with c2 = {c2} ≠ 1 passed the predicate"
        )));
    }
    let omega = ctx
        .cube_root_of_unity()
        .ok_or_else(|| violation("form (ii) is APN only for even m"))?;
    // L(G1(L(x))) = (1 + ω) f2(x) with L = x^q + ω x
    let l_inv = LinMap::conj_plus(ctx, omega).inverse(ctx)?;
    let outer = l_inv.compose(ctx, &LinMap::scale(ctx, FieldElem::ONE + omega)?);
    Ok(Terminal {
        target: Target::G1,
        frag: Fragment {
            outer,
            inner: l_inv,
        },
    })
}

fn small_field_terminal(chain: &mut Chain) -> Result<Terminal> {
    let ctx = chain.ctx;
    let k = chain.current;
    let one = FieldElem::ONE;
    if !k.all_in_subfield(ctx) {
        return Err(Error::Precondition(
            "all coefficients must lie in F_q".into(),
        ));
    }
    if k.a3.is_zero() {
        return form_i_terminal(chain, k.a1, k.a2);
    }
    if k.a3 == one {
        if k.a1.is_zero() {
            return form_ii_terminal(chain, k.a2);
        }
        if k.a1 == k.a2 {
            return Err(violation(
                "a1 = a2 with a3 = 1 makes f F_q-valued, yet it passed the predicate",
            ));
        }
        // L(u) = (u^q + r u)/(r + 1), r = a2/a1, lands on form (ii)
        let r = ctx.div(k.a2, k.a1)?;
        let inv = ctx.inv(r + one)?;
        let outer = scaled(ctx, inv, &LinMap::conj_plus(ctx, r))?;
        let c2 = ctx.mul(k.a1 + ctx.mul(r, k.a2), inv);
        let next = KimCoeffs::new(ctx, FieldElem::ZERO, c2, one);
        chain.step(
            next,
            Fragment {
                outer,
                inner: LinMap::identity(ctx),
            },
            RouteTag::SmallFieldII,
        )?;
        chain.route.pop();
        return form_ii_terminal(chain, c2);
    }
    // a3 ∉ {0, 1}: L(u) = (a3 u^q + u)/(a3² + 1) lands on form (i)
    let inv = ctx.inv(ctx.square(k.a3) + one)?;
    let outer = scaled(ctx, inv, &q_binomial(ctx, one, k.a3))?;
    let c1 = ctx.mul(ctx.mul(k.a3, k.a2) + k.a1, inv);
    let c2 = ctx.mul(ctx.mul(k.a3, k.a1) + k.a2, inv);
    let next = KimCoeffs::new(ctx, c1, c2, FieldElem::ZERO);
    chain.step(
        next,
        Fragment {
            outer,
            inner: LinMap::identity(ctx),
        },
        RouteTag::SmallFieldIS,
    )?;
    chain.route.pop();
    form_i_terminal(chain, c1, c2)
}

/// Witness for an APN function whose coefficients all lie in F_q.
pub fn smallfield_witness(ctx: &FieldCtx, k: &KimCoeffs) -> Result<EquivWitness> {
    require_m_at_least_4(ctx)?;
    if !k.all_in_subfield(ctx) {
        return Err(Error::Precondition(
            "all coefficients must lie in F_q".into(),
        ));
    }
    require_apn(ctx, k, "smallfield_witness")?;
    let mut chain = Chain::new(ctx, *k);
    let term = small_field_terminal(&mut chain)?;
    chain
        .finish(term)?
        .witness
        .ok_or_else(|| violation("missing witness"))
}

// ---------------------------------------------------------------------------
// a2 ≠ 0, a1/a2 ∉ U, a1/a2 ≠ a3^q

fn p22_step(ctx: &FieldCtx, k: &KimCoeffs) -> Result<(KimCoeffs, Fragment)> {
    if !k.a1_in_subfield(ctx) {
        return Err(Error::A1NotInSubfield(k.a1.value()));
    }
    if k.a2.is_zero() {
        return Err(Error::Precondition("a2 must be nonzero".into()));
    }
    let t = ctx.div(k.a1, k.a2)?;
    let a3q = ctx.frobenius_q(k.a3);
    if ctx.in_unit_circle(t) || t == a3q {
        return Err(Error::Precondition(
            "need a1/a2 ∉ U and a1/a2 ≠ a3^q".into(),
        ));
    }
    // h0 = L ∘ f, L = z^q + t z:
    // (t + a3^q) x^{3q} + (a1²/a2 + a2^q) x^{2q+1} + (a1 a3/a2 + 1) x^3
    let lead = t + a3q;
    let inv = ctx.inv(lead)?;
    let a1h = ctx.mul(
        ctx.div(ctx.square(k.a1), k.a2)? + ctx.frobenius_q(k.a2),
        inv,
    );
    let a3h = ctx.mul(ctx.div(ctx.mul(k.a1, k.a3), k.a2)? + FieldElem::ONE, inv);
    let outer = scaled(ctx, inv, &LinMap::conj_plus(ctx, t))?;
    Ok((
        KimCoeffs::new(ctx, a1h, FieldElem::ZERO, a3h),
        Fragment {
            outer,
            inner: LinMap::identity(ctx),
        },
    ))
}

/// Removes the `x^{q+2}` term: returns `k'` with `a2' = 0`, `a1' ∈ F_q` and
/// the fragment `f' = outer ∘ f ∘ inner`.
pub fn reduce_a2_zero(ctx: &FieldCtx, k: &KimCoeffs) -> Result<(KimCoeffs, Fragment)> {
    let (h1, frag) = p22_step(ctx, k)?;
    let (h2, norm) = normalize_a1(ctx, &h1)?;
    Ok((h2, frag.then(ctx, &norm)))
}

// ---------------------------------------------------------------------------
// a1/a2 ∈ U: the (u, z) family

/// `a1 = (u³+z)²/(u(u²+z)²)`, `a2 = (u³+z)²/(u²+z)²`, `a3 = u z² (u+1)²/(u²+z)²`.
pub fn uz_family(ctx: &FieldCtx, u: UnitCircleElem, z: UnitCircleElem) -> Result<KimCoeffs> {
    let (u, z) = (u.elem(), z.elem());
    let den = ctx.square(ctx.square(u) + z);
    if den.is_zero() {
        return Err(Error::Precondition("u² = z".into()));
    }
    let den_inv = ctx.inv(den)?;
    let num = ctx.square(ctx.pow(u, 3) + z);
    let a2 = ctx.mul(num, den_inv);
    let a1 = ctx.div(a2, u)?;
    let a3 = ctx.mul(
        ctx.mul(u, ctx.square(z)),
        ctx.mul(ctx.square(u + FieldElem::ONE), den_inv),
    );
    Ok(KimCoeffs::new(ctx, a1, a2, a3))
}

/// Finds `(u, z) ∈ U × U`, `u² ≠ z`, whose family coefficients equal `k`.
/// Since `a2 = a1 u` in the family, `u = a2/a1` is forced when `a1 ≠ 0` and
/// only `z` is scanned; otherwise both range over U in encoding order.
pub fn recover_uz(ctx: &FieldCtx, k: &KimCoeffs) -> Option<(UnitCircleElem, UnitCircleElem)> {
    let circle = ctx.unit_circle();
    let candidates: Vec<UnitCircleElem> = if k.a1.is_zero() {
        circle.to_vec()
    } else {
        let u = ctx.div(k.a2, k.a1).ok()?;
        vec![ctx.unit_circle_elem(u).ok()?]
    };
    for &u in &candidates {
        for &z in circle {
            if ctx.square(u.elem()) == z.elem() {
                continue;
            }
            if uz_family(ctx, u, z).ok().as_ref() == Some(k) {
                return Some((u, z));
            }
        }
    }
    None
}

/// The explicit `G2` construction for the `(u, z)` family.
#[derive(Clone, Debug)]
pub struct FamilyMaps {
    pub omega: FieldElem,
    pub t: FieldElem,
    pub s: FieldElem,
    /// `x ↦ x^q + t x`
    pub l1: LinMap,
    /// `x ↦ x^{2q} + s x^2`
    pub l2: LinMap,
    /// Closed forms of the coefficients of `L1 ∘ G2 ∘ L2`.
    pub c: [FieldElem; 4],
}

/// Builds `L1`, `L2` and the closed-form `c0..c3` for `(u, z)`, checking
/// the preconditions (`m` even, `u ≠ z`, `u² ≠ z`, `u³ ≠ z`) and both
/// bijectivity arguments (`t^{q+1} ≠ 1`, `s^{q+1} = ω² ≠ 1`).
pub fn family_maps(ctx: &FieldCtx, u: UnitCircleElem, z: UnitCircleElem) -> Result<FamilyMaps> {
    let omega = ctx
        .cube_root_of_unity()
        .ok_or_else(|| Error::Precondition("the (u, z) construction needs even m".into()))?;
    let (u, z) = (u.elem(), z.elem());
    let u2 = ctx.square(u);
    let u3 = ctx.mul(u2, u);
    if u == z || u2 == z || u3 == z {
        return Err(Error::Precondition("need u ≠ z, u² ≠ z, u³ ≠ z".into()));
    }
    let w2 = ctx.square(omega);
    let d = ctx.square(ctx.mul(w2, u3) + ctx.mul(u + omega, z));
    if d.is_zero() {
        return Err(violation("D = (ω²u³ + (u+ω)z)² vanished"));
    }
    let t = ctx.div(
        ctx.square(ctx.mul(omega, u3) + ctx.mul(u + w2, z)),
        ctx.mul(u, d),
    )?;
    let s = ctx.mul(omega, u2);
    if ctx.in_unit_circle(t) {
        return Err(violation("t ∈ U although u ∉ {z, z^{1/3}}"));
    }
    if ctx.norm(s) != w2 {
        return Err(violation("s^{q+1} ≠ ω²"));
    }
    let l1 = LinMap::conj_plus(ctx, t);
    let l2 = LinMap::conj_plus(ctx, s).compose(ctx, &LinMap::frobenius_power(ctx, 1));
    let d_inv = ctx.inv(d)?;
    let num = ctx.square(u3 + z);
    let c = [
        ctx.mul(ctx.square(u2 + z), d_inv),
        ctx.div(ctx.mul(num, d_inv), u)?,
        ctx.mul(num, d_inv),
        ctx.mul(
            ctx.mul(u, ctx.square(z)),
            ctx.mul(ctx.square(u + FieldElem::ONE), d_inv),
        ),
    ];
    Ok(FamilyMaps {
        omega,
        t,
        s,
        l1,
        l2,
        c,
    })
}

fn family_terminal(
    ctx: &FieldCtx,
    k: &KimCoeffs,
    u: UnitCircleElem,
    z: UnitCircleElem,
) -> Result<Terminal> {
    let maps = family_maps(ctx, u, z)?;
    let expanded = fit_kim_form(ctx, |x| {
        maps.l1
            .eval(ctx, Target::G2.eval(ctx, maps.l2.eval(ctx, x)))
    })
    .ok_or_else(|| violation("L1 ∘ G2 ∘ L2 is not of Kim shape"))?;
    if expanded != maps.c {
        return Err(violation(
            "expansion of L1 ∘ G2 ∘ L2 disagrees with the closed forms",
        ));
    }
    let c0_inv = ctx.inv(maps.c[0])?;
    let ratios = KimCoeffs::new(
        ctx,
        ctx.mul(maps.c[1], c0_inv),
        ctx.mul(maps.c[2], c0_inv),
        ctx.mul(maps.c[3], c0_inv),
    );
    if ratios != *k {
        return Err(Error::Precondition(
            "coefficients are not the (u, z) family member".into(),
        ));
    }
    if !maps.l1.is_bijective(ctx) || !maps.l2.is_bijective(ctx) {
        return Err(violation("family maps are singular"));
    }
    // F = L1 ∘ G2 ∘ L2 = c0 f, so G2 = L1^{-1} ∘ c0 ∘ f ∘ L2^{-1}
    let outer = maps
        .l1
        .inverse(ctx)?
        .compose(ctx, &LinMap::scale(ctx, maps.c[0])?);
    let inner = maps.l2.inverse(ctx)?;
    Ok(Terminal {
        target: Target::G2,
        frag: Fragment { outer, inner },
    })
}

/// `G2` witness for the family member with parameters `(u, z)`.
pub fn family_witness(
    ctx: &FieldCtx,
    u: UnitCircleElem,
    z: UnitCircleElem,
) -> Result<EquivWitness> {
    require_m_at_least_4(ctx)?;
    let k = uz_family(ctx, u, z)?;
    let term = family_terminal(ctx, &k, u, z)?;
    let mut chain = Chain::new(ctx, k);
    chain.route.push(RouteTag::P27);
    chain
        .finish(term)?
        .witness
        .ok_or_else(|| violation("missing witness"))
}

// ---------------------------------------------------------------------------
// a1 = a2 a3^q

/// The stratum `a1 = a2 a3^q` (with `a1 ∈ F_q`): APN only when
/// `a1 = a2 = 0`, which then goes to `G1`.
pub fn a3q_case(ctx: &FieldCtx, k: &KimCoeffs) -> Result<ClassifyResult> {
    require_m_at_least_4(ctx)?;
    if k.a1 != ctx.mul(k.a2, ctx.frobenius_q(k.a3)) {
        return Err(Error::Precondition("need a1 = a2 a3^q".into()));
    }
    if !is_apn_by_theorem(ctx, k)? {
        return Ok(ClassifyResult::not_apn(vec![RouteTag::P28]));
    }
    if !k.a2.is_zero() {
        return Err(violation("a1 = a2 a3^q with a2 ≠ 0 passed the predicate"));
    }
    let mut chain = Chain::new(ctx, *k);
    chain.route.extend([RouteTag::P28, RouteTag::P23]);
    let term = two_zero_terminal(ctx, k)?;
    chain.finish(term)
}

// ---------------------------------------------------------------------------
// dispatch

fn dispatch_a2_zero(chain: &mut Chain) -> Result<Terminal> {
    let ctx = chain.ctx;
    let k = chain.current;
    debug_assert!(k.a2.is_zero() && k.a1_in_subfield(ctx));
    if k.a1.is_zero() || k.a3.is_zero() {
        chain.route.push(RouteTag::P23);
        return two_zero_terminal(ctx, &k);
    }
    let report = gamma_report(ctx, &k)?;
    chain.route.push(if report.gamma1 {
        RouteTag::P24
    } else {
        RouteTag::P25
    });
    if !ctx.in_subfield(k.a3) {
        return Err(violation(format!(
            "APN with a2 = 0, a1 ≠ 0 and a3 = {} ∉ F_q",
            k.a3
        )));
    }
    small_field_terminal(chain)
}

fn dispatch(chain: &mut Chain) -> Result<Terminal> {
    let ctx = chain.ctx;
    let k = chain.current;
    if k.a2.is_zero() {
        return dispatch_a2_zero(chain);
    }
    let t = ctx.div(k.a1, k.a2)?;
    if t == ctx.frobenius_q(k.a3) {
        chain.route.push(RouteTag::P28);
        return Err(violation("a1/a2 = a3^q with a2 ≠ 0 passed the predicate"));
    }
    if ctx.in_unit_circle(t) {
        if ctx.m() % 2 == 1 {
            return Err(violation("a1/a2 ∈ U with odd m passed the predicate"));
        }
        if k.all_in_subfield(ctx) {
            chain.route.push(RouteTag::P26Subfield);
            return small_field_terminal(chain);
        }
        let (u, z) = recover_uz(ctx, &k)
            .ok_or_else(|| violation("a1/a2 ∈ U, coefficients not in F_q and no (u, z) pair"))?;
        chain.route.extend([RouteTag::P26Family, RouteTag::P27]);
        return family_terminal(ctx, &k, u, z);
    }
    let (h1, frag) = p22_step(ctx, &k)?;
    chain.step(h1, frag, RouteTag::P22)?;
    let (h2, norm) = normalize_a1(ctx, &h1)?;
    if h2 != h1 {
        chain.step(h2, norm, RouteTag::Normalize)?;
    }
    if !is_apn_by_theorem(ctx, &h2)? {
        return Err(violation("predicate not preserved by the a2-elimination"));
    }
    dispatch_a2_zero(chain)
}

/// Decides APN-ness and, for APN inputs, returns a verified witness to `G1`
/// or `G2` together with the route taken.
pub fn classify(ctx: &FieldCtx, k: &KimCoeffs) -> Result<ClassifyResult> {
    require_m_at_least_4(ctx)?;
    let mut chain = Chain::new(ctx, *k);
    let (k1, frag) = normalize_a1(ctx, k)?;
    if k1 != *k {
        chain.step(k1, frag, RouteTag::Normalize)?;
    }
    if !is_apn_by_theorem(ctx, &k1)? {
        return Ok(ClassifyResult::not_apn(chain.route));
    }
    let term = dispatch(&mut chain)?;
    chain.finish(term)
}
