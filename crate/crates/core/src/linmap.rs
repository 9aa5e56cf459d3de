//! GF(2)-linear maps on F_{q²}, held as linearized polynomials
//! `L(x) = Σ_{i<2m} c_i x^{2^i}`, and the affine-equivalence witnesses built
//! from them.
//!
//! Matrices are a derived view: column `j` of [`LinMap::to_matrix`] is the
//! encoding of `L(2^j)`, i.e. the image of the `j`-th tower basis element
//! `y^j` (j < m) or `y^{j-m}β` (j ≥ m).

use serde::{Deserialize, Serialize};

use crate::bitmatrix::BitMatrix;
use crate::error::{Error, Result};
use crate::field::{FieldCtx, FieldElem};
use crate::kim::{eval_kim, KimCoeffs};

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LinMap {
    coeffs: Vec<FieldElem>,
}

impl LinMap {
    /// Takes exactly `2m` coefficients.
    pub fn from_coeffs(ctx: &FieldCtx, coeffs: Vec<FieldElem>) -> Result<LinMap> {
        if coeffs.len() != ctx.n() as usize {
            return Err(Error::Precondition(format!(
                "a linearized polynomial over GF(2^{}) has {} coefficients, got {}",
                ctx.n(),
                ctx.n(),
                coeffs.len()
            )));
        }
        for &c in &coeffs {
            ctx.elem(c.value() as u64)?;
        }
        Ok(LinMap { coeffs })
    }

    fn monomial(ctx: &FieldCtx, i: u32, c: FieldElem) -> LinMap {
        let mut coeffs = vec![FieldElem::ZERO; ctx.n() as usize];
        coeffs[(i % ctx.n()) as usize] = c;
        LinMap { coeffs }
    }

    pub fn identity(ctx: &FieldCtx) -> LinMap {
        Self::monomial(ctx, 0, FieldElem::ONE)
    }

    /// `x ↦ c x`.
    pub fn scale(ctx: &FieldCtx, c: FieldElem) -> Result<LinMap> {
        if c.is_zero() {
            return Err(Error::Precondition("scale(0) is not bijective".into()));
        }
        Ok(Self::monomial(ctx, 0, c))
    }

    /// `x ↦ x^{2^j}`.
    pub fn frobenius_power(ctx: &FieldCtx, j: u32) -> LinMap {
        Self::monomial(ctx, j, FieldElem::ONE)
    }

    /// `x ↦ x^q + t x`; bijective iff `t ∉ U`.
    pub fn conj_plus(ctx: &FieldCtx, t: FieldElem) -> LinMap {
        let mut l = Self::monomial(ctx, ctx.m(), FieldElem::ONE);
        l.coeffs[0] = t;
        l
    }

    pub fn coeffs(&self) -> &[FieldElem] {
        &self.coeffs
    }

    pub fn eval(&self, ctx: &FieldCtx, x: FieldElem) -> FieldElem {
        let mut acc = FieldElem::ZERO;
        let mut p = x;
        for &c in &self.coeffs {
            acc += ctx.mul(c, p);
            p = ctx.square(p);
        }
        acc
    }

    /// `compose(L, M)(x) = L(M(x))`.
    pub fn compose(&self, ctx: &FieldCtx, inner: &LinMap) -> LinMap {
        let n = ctx.n() as usize;
        let mut out = vec![FieldElem::ZERO; n];
        for (i, &l) in self.coeffs.iter().enumerate() {
            if l.is_zero() {
                continue;
            }
            for (j, &mj) in inner.coeffs.iter().enumerate() {
                out[(i + j) % n] += ctx.mul(l, ctx.frob(mj, i as u32));
            }
        }
        LinMap { coeffs: out }
    }

    pub fn to_matrix(&self, ctx: &FieldCtx) -> BitMatrix {
        let cols: Vec<u32> = (0..ctx.n())
            .map(|j| self.eval(ctx, FieldElem::from_raw(1 << j)).value())
            .collect();
        BitMatrix::from_columns(&cols)
    }

    /// Interpolates the linearized polynomial of a matrix through the trace
    /// dual basis: `L(x) = Σ_j L(e_j) Tr(d_j x)`.
    pub fn from_matrix(ctx: &FieldCtx, mat: &BitMatrix) -> LinMap {
        let n = ctx.n() as usize;
        assert_eq!(mat.dim(), n);
        let mut coeffs = vec![FieldElem::ZERO; n];
        for (j, &d) in ctx.dual_basis().iter().enumerate() {
            let image = FieldElem::from_raw(mat.column(j));
            if image.is_zero() {
                continue;
            }
            let mut dp = d;
            for c in coeffs.iter_mut() {
                *c += ctx.mul(image, dp);
                dp = ctx.square(dp);
            }
        }
        LinMap { coeffs }
    }

    pub fn is_bijective(&self, ctx: &FieldCtx) -> bool {
        self.to_matrix(ctx).rank() == ctx.n() as usize
    }

    pub fn inverse(&self, ctx: &FieldCtx) -> Result<LinMap> {
        let inv = self.to_matrix(ctx).inverse().ok_or(Error::Singular)?;
        Ok(Self::from_matrix(ctx, &inv))
    }
}

/// One step `g = outer ∘ f ∘ inner` of an equivalence chain.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Fragment {
    pub outer: LinMap,
    pub inner: LinMap,
}

impl Fragment {
    pub fn identity(ctx: &FieldCtx) -> Fragment {
        Fragment {
            outer: LinMap::identity(ctx),
            inner: LinMap::identity(ctx),
        }
    }

    /// `self` followed by `next`: if `g = A∘f∘B` and `h = C∘g∘D` then
    /// `h = (C∘A)∘f∘(B∘D)`.
    pub fn then(&self, ctx: &FieldCtx, next: &Fragment) -> Fragment {
        Fragment {
            outer: next.outer.compose(ctx, &self.outer),
            inner: self.inner.compose(ctx, &next.inner),
        }
    }

    /// Pointwise check that `to = outer ∘ from ∘ inner`.
    pub fn holds(&self, ctx: &FieldCtx, from: &KimCoeffs, to: &KimCoeffs) -> bool {
        ctx.elements().all(|x| {
            eval_kim(ctx, to, x)
                == self
                    .outer
                    .eval(ctx, eval_kim(ctx, from, self.inner.eval(ctx, x)))
        })
    }
}

/// Which Gold function a witness lands on.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum Target {
    /// `x^3`
    G1,
    /// `x^{2^{m-1}+1}`
    G2,
}

impl Target {
    pub fn exponent(self, ctx: &FieldCtx) -> u64 {
        match self {
            Target::G1 => 3,
            Target::G2 => (1u64 << (ctx.m() - 1)) + 1,
        }
    }

    pub fn eval(self, ctx: &FieldCtx, x: FieldElem) -> FieldElem {
        ctx.pow(x, self.exponent(ctx))
    }
}

/// The claim `target(x) = L1(f(L2(x)))` for every `x`, with `f` the Kim-type
/// function of `source`. Only [`verify_witness`] makes it a fact.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct EquivWitness {
    pub target: Target,
    #[serde(rename = "L1")]
    pub l1: LinMap,
    #[serde(rename = "L2")]
    pub l2: LinMap,
    pub source: KimCoeffs,
}

impl EquivWitness {
    /// Given `self` for `g` and a fragment `g = O ∘ f ∘ I`, returns the
    /// witness for `f`: `target = (L1 ∘ O) ∘ f ∘ (I ∘ L2)`.
    pub fn pull_back(&self, ctx: &FieldCtx, frag: &Fragment, source: KimCoeffs) -> EquivWitness {
        EquivWitness {
            target: self.target,
            l1: self.l1.compose(ctx, &frag.outer),
            l2: frag.inner.compose(ctx, &self.l2),
            source,
        }
    }
}

/// Checks both maps are bijective and the identity holds at every point of
/// F_{q²}.
pub fn verify_witness(ctx: &FieldCtx, w: &EquivWitness) -> bool {
    if w.l1.coeffs.len() != ctx.n() as usize || w.l2.coeffs.len() != ctx.n() as usize {
        return false;
    }
    if !w.l1.is_bijective(ctx) || !w.l2.is_bijective(ctx) {
        return false;
    }
    ctx.elements().all(|x| {
        let lhs = w.target.eval(ctx, x);
        let rhs = w.l1.eval(ctx, eval_kim(ctx, &w.source, w.l2.eval(ctx, x)));
        lhs == rhs
    })
}
