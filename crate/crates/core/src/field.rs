//! Arithmetic in the tower GF(2) ⊂ GF(2^m) = F_q ⊂ GF(2^{2m}) = F_{q²}.
//!
//! F_q is GF(2)[y]/(p(y)) for a degree-`m` irreducible `p`, and F_{q²} is
//! F_q[β]/(β² + β + ν) with Tr_m(ν) = 1. An element `lo + hi·β` is encoded as
//! the integer `lo + hi·2^m`, bit `i` of `lo` (resp. `hi`) holding the
//! coefficient of `y^i`. In this basis conjugation `z ↦ z^q` is the map
//! `(lo, hi) ↦ (lo + hi, hi)`, because β^q = β + 1.
//!
//! Multiplication goes through log/antilog tables over the whole of F_{q²};
//! the tables are built once, from a slow tower multiplication, when the
//! context is created.

use std::fmt;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bitmatrix::BitMatrix;
use crate::error::{Error, Result};

pub const MIN_M: u32 = 2;
pub const MAX_M: u32 = 10;

/// An element of F_{q²} in the tower encoding. Addition needs no context.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FieldElem(u32);

impl FieldElem {
    pub const ZERO: FieldElem = FieldElem(0);
    pub const ONE: FieldElem = FieldElem(1);

    /// Wraps a raw encoding without range checking; see [`FieldCtx::elem`].
    pub const fn from_raw(v: u32) -> Self {
        FieldElem(v)
    }

    pub const fn value(self) -> u32 {
        self.0
    }

    pub const fn is_zero(self) -> bool {
        self.0 == 0
    }
}

// addition in characteristic 2 is XOR of the encodings
impl Add for FieldElem {
    type Output = FieldElem;
    #[inline]
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn add(self, rhs: FieldElem) -> FieldElem {
        FieldElem(self.0 ^ rhs.0)
    }
}

impl AddAssign for FieldElem {
    #[inline]
    #[allow(clippy::suspicious_op_assign_impl)]
    fn add_assign(&mut self, rhs: FieldElem) {
        self.0 ^= rhs.0;
    }
}

impl fmt::Debug for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#x}", self.0)
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for FieldElem {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_u32(self.0)
    }
}

impl<'de> Deserialize<'de> for FieldElem {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(u64),
            Str(String),
        }
        let v = match Raw::deserialize(d)? {
            Raw::Num(n) => n,
            Raw::Str(s) => parse_int(&s).map_err(serde::de::Error::custom)?,
        };
        u32::try_from(v)
            .map(FieldElem)
            .map_err(|_| serde::de::Error::custom(format!("encoding {v} out of range")))
    }
}

/// Parses a decimal or `0x`-prefixed hexadecimal integer.
pub fn parse_int(s: &str) -> Result<u64> {
    let s = s.trim();
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse::<u64>(),
    };
    parsed.map_err(|e| Error::Parse(format!("{s:?}: {e}")))
}

/// An element of the norm-one subgroup U = { z : z^{q+1} = 1 }.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct UnitCircleElem(FieldElem);

impl UnitCircleElem {
    pub fn elem(self) -> FieldElem {
        self.0
    }
}

impl From<UnitCircleElem> for FieldElem {
    fn from(u: UnitCircleElem) -> FieldElem {
        u.0
    }
}

/// The serializable identity of a field context.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub m: u32,
    pub fq_poly: u32,
    pub nu: u32,
}

/// Default subfield polynomials, as bitmasks (bit i = coefficient of y^i).
pub fn default_poly(m: u32) -> Option<u32> {
    Some(match m {
        2 => 0b111,         // y^2 + y + 1
        3 => 0b1011,        // y^3 + y + 1
        4 => 0b1_0011,      // y^4 + y + 1
        5 => 0b10_0101,     // y^5 + y^2 + 1
        6 => 0b100_0011,    // y^6 + y + 1
        7 => 0b1000_0011,   // y^7 + y + 1
        8 => 0b1_0001_1101, // y^8 + y^4 + y^3 + y^2 + 1
        9 => 0x211,         // y^9 + y^4 + 1
        10 => 0x409,        // y^10 + y^3 + 1
        _ => return None,
    })
}

fn poly_degree(p: u32) -> i32 {
    31 - p.leading_zeros() as i32
}

fn poly_rem(mut a: u32, b: u32) -> u32 {
    let db = poly_degree(b);
    while a != 0 && poly_degree(a) >= db {
        a ^= b << (poly_degree(a) - db);
    }
    a
}

/// Trial division by every polynomial of degree 1..=deg/2.
pub fn is_irreducible(p: u32) -> bool {
    let d = poly_degree(p);
    if d < 1 {
        return false;
    }
    for deg in 1..=d / 2 {
        for low in 0..(1u32 << deg) {
            if poly_rem(p, (1 << deg) | low) == 0 {
                return false;
            }
        }
    }
    true
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Slow arithmetic used only to bootstrap the tables.
struct Bootstrap {
    m: u32,
    poly: u32,
    nu: u32,
}

impl Bootstrap {
    fn fq_mul(&self, mut a: u32, mut b: u32) -> u32 {
        let top = 1u32 << self.m;
        let mut r = 0;
        while b != 0 {
            if b & 1 == 1 {
                r ^= a;
            }
            b >>= 1;
            a <<= 1;
            if a & top != 0 {
                a ^= self.poly;
            }
        }
        r
    }

    fn fq_trace(&self, x: u32) -> u32 {
        let mut acc = 0;
        let mut p = x;
        for _ in 0..self.m {
            acc ^= p;
            p = self.fq_mul(p, p);
        }
        acc
    }

    fn mul(&self, a: u32, b: u32) -> u32 {
        let mask = (1u32 << self.m) - 1;
        let (a0, a1) = (a & mask, a >> self.m);
        let (b0, b1) = (b & mask, b >> self.m);
        let hh = self.fq_mul(a1, b1);
        let lo = self.fq_mul(a0, b0) ^ self.fq_mul(hh, self.nu);
        let hi = self.fq_mul(a0, b1) ^ self.fq_mul(a1, b0) ^ hh;
        lo | (hi << self.m)
    }

    fn pow(&self, a: u32, mut e: u64) -> u32 {
        let (mut base, mut acc) = (a, 1);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }
}

/// The tower F_q ⊂ F_{q²} with precomputed tables. Immutable once built.
#[derive(Clone)]
pub struct FieldCtx {
    m: u32,
    fq_poly: u32,
    nu: FieldElem,
    q: u32,
    size: u32,
    generator: FieldElem,
    exp: Vec<u32>,
    log: Vec<u32>,
    unit_circle: Vec<UnitCircleElem>,
    dual_basis: Vec<FieldElem>,
}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldCtx")
            .field("m", &self.m)
            .field("fq_poly", &format_args!("{:#x}", self.fq_poly))
            .field("nu", &self.nu)
            .finish()
    }
}

/// Builds a field context. Omitted arguments take the defaults: the
/// polynomial from [`default_poly`] and the smallest `nu` of trace one.
pub fn make_field(m: u32, fq_poly: Option<u32>, nu: Option<u32>) -> Result<FieldCtx> {
    if !(MIN_M..=MAX_M).contains(&m) {
        return Err(Error::DegreeOutOfRange(m));
    }
    let poly = match fq_poly {
        Some(p) => p,
        None => default_poly(m).expect("default exists for supported m"),
    };
    if poly_degree(poly) != m as i32 || !is_irreducible(poly) {
        return Err(Error::Reducible(poly, m));
    }
    let q = 1u32 << m;
    let probe = Bootstrap { m, poly, nu: 0 };
    let nu = match nu {
        Some(v) => {
            if v >= q || probe.fq_trace(v) != 1 {
                return Err(Error::BadNu(v));
            }
            v
        }
        None => (1..q)
            .find(|&v| probe.fq_trace(v) == 1)
            .expect("trace is onto"),
    };
    let boot = Bootstrap { m, poly, nu };

    let size = q * q;
    let order = (size - 1) as u64;
    let factors = prime_factors(order);
    let generator = (2..size)
        .find(|&g| factors.iter().all(|&p| boot.pow(g, order / p) != 1))
        .expect("a finite field has a primitive element");

    let n = (size - 1) as usize;
    let mut exp = vec![0u32; 2 * n];
    let mut log = vec![0u32; size as usize];
    let mut x = 1u32;
    for i in 0..n {
        exp[i] = x;
        exp[i + n] = x;
        log[x as usize] = i as u32;
        x = boot.mul(x, generator);
    }
    if x != 1 || (1..n).any(|i| exp[i] == 1) {
        return Err(Error::InvariantViolation(format!(
            "generator {generator} does not have order {order}"
        )));
    }

    let mut ctx = FieldCtx {
        m,
        fq_poly: poly,
        nu: FieldElem(nu),
        q,
        size,
        generator: FieldElem(generator),
        exp,
        log,
        unit_circle: Vec::new(),
        dual_basis: Vec::new(),
    };

    // F_q* is generated by g^{q+1}; U by g^{q-1}.
    let sub_gen = ctx.pow(ctx.generator, (q + 1) as u64);
    if !ctx.in_subfield(sub_gen) || (1..q - 1).any(|k| ctx.pow(sub_gen, k as u64) == FieldElem::ONE)
    {
        return Err(Error::InvariantViolation("subfield generator order".into()));
    }
    let step = ctx.pow(ctx.generator, (q - 1) as u64);
    let mut unit: Vec<UnitCircleElem> = (0..=q)
        .map(|k| UnitCircleElem(ctx.pow(step, k as u64)))
        .collect();
    unit.sort();
    ctx.unit_circle = unit;
    ctx.dual_basis = ctx.compute_dual_basis();
    Ok(ctx)
}

impl FieldCtx {
    pub fn new(m: u32) -> Result<FieldCtx> {
        make_field(m, None, None)
    }

    pub fn from_spec(spec: &FieldSpec) -> Result<FieldCtx> {
        make_field(spec.m, Some(spec.fq_poly), Some(spec.nu))
    }

    pub fn spec(&self) -> FieldSpec {
        FieldSpec {
            m: self.m,
            fq_poly: self.fq_poly,
            nu: self.nu.0,
        }
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// Extension degree of F_{q²} over GF(2), i.e. `2m`.
    pub fn n(&self) -> u32 {
        2 * self.m
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// Number of elements of F_{q²}.
    pub fn size(&self) -> u32 {
        self.size
    }

    pub fn fq_poly(&self) -> u32 {
        self.fq_poly
    }

    pub fn nu(&self) -> FieldElem {
        self.nu
    }

    pub fn generator(&self) -> FieldElem {
        self.generator
    }

    pub fn beta(&self) -> FieldElem {
        FieldElem(self.q)
    }

    /// Checked conversion from an integer encoding.
    pub fn elem(&self, v: u64) -> Result<FieldElem> {
        if v < self.size as u64 {
            Ok(FieldElem(v as u32))
        } else {
            Err(Error::BadEncoding(v, self.size as u64))
        }
    }

    pub fn from_parts(&self, lo: u32, hi: u32) -> FieldElem {
        debug_assert!(lo < self.q && hi < self.q);
        FieldElem(lo | (hi << self.m))
    }

    pub fn lo(&self, z: FieldElem) -> u32 {
        z.0 & (self.q - 1)
    }

    pub fn hi(&self, z: FieldElem) -> u32 {
        z.0 >> self.m
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElem> + Clone {
        (0..self.size).map(FieldElem)
    }

    pub fn subfield_elements(&self) -> impl Iterator<Item = FieldElem> + Clone {
        (0..self.q).map(FieldElem)
    }

    #[inline]
    pub fn mul(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        if a.0 == 0 || b.0 == 0 {
            return FieldElem::ZERO;
        }
        FieldElem(self.exp[(self.log[a.0 as usize] + self.log[b.0 as usize]) as usize])
    }

    #[inline]
    pub fn square(&self, a: FieldElem) -> FieldElem {
        self.mul(a, a)
    }

    pub fn inv(&self, a: FieldElem) -> Result<FieldElem> {
        if a.0 == 0 {
            return Err(Error::ZeroInverse);
        }
        let n = self.size - 1;
        Ok(FieldElem(
            self.exp[((n - self.log[a.0 as usize]) % n) as usize],
        ))
    }

    pub fn div(&self, a: FieldElem, b: FieldElem) -> Result<FieldElem> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// `a^e`, with `0^0 = 1`.
    pub fn pow(&self, a: FieldElem, e: u64) -> FieldElem {
        if e == 0 {
            return FieldElem::ONE;
        }
        if a.0 == 0 {
            return FieldElem::ZERO;
        }
        let n = (self.size - 1) as u64;
        let k = (self.log[a.0 as usize] as u64 * (e % n)) % n;
        FieldElem(self.exp[k as usize])
    }

    /// Discrete logarithm to the base [`Self::generator`].
    pub fn log(&self, a: FieldElem) -> Result<u32> {
        if a.0 == 0 {
            return Err(Error::ZeroInverse);
        }
        Ok(self.log[a.0 as usize])
    }

    /// Generator power `g^k`.
    pub fn exp(&self, k: u64) -> FieldElem {
        FieldElem(self.exp[(k % (self.size as u64 - 1)) as usize])
    }

    /// `z^{2^j}`.
    pub fn frob(&self, z: FieldElem, j: u32) -> FieldElem {
        let j = j % self.n();
        if z.0 == 0 || j == 0 {
            return z;
        }
        let n = (self.size - 1) as u64;
        let k = ((self.log[z.0 as usize] as u64) << j) % n;
        FieldElem(self.exp[k as usize])
    }

    /// Conjugation `z ↦ z^q`.
    #[inline]
    pub fn frobenius_q(&self, z: FieldElem) -> FieldElem {
        FieldElem(z.0 ^ (z.0 >> self.m))
    }

    pub fn norm(&self, z: FieldElem) -> FieldElem {
        self.mul(z, self.frobenius_q(z))
    }

    #[inline]
    pub fn in_subfield(&self, z: FieldElem) -> bool {
        z.0 < self.q
    }

    pub fn in_unit_circle(&self, z: FieldElem) -> bool {
        self.norm(z) == FieldElem::ONE
    }

    pub fn unit_circle_elem(&self, z: FieldElem) -> Result<UnitCircleElem> {
        if self.in_unit_circle(z) {
            Ok(UnitCircleElem(z))
        } else {
            Err(Error::NotOnUnitCircle(z.0))
        }
    }

    /// All `q + 1` elements of U, in increasing encoding order.
    pub fn unit_circle(&self) -> &[UnitCircleElem] {
        &self.unit_circle
    }

    /// Absolute trace Tr_m of a subfield element.
    pub fn trace_m(&self, x: FieldElem) -> Result<u8> {
        if !self.in_subfield(x) {
            return Err(Error::NotInSubfield(x.0));
        }
        let mut acc = FieldElem::ZERO;
        let mut p = x;
        for _ in 0..self.m {
            acc += p;
            p = self.square(p);
        }
        debug_assert!(acc.0 <= 1);
        Ok(acc.0 as u8)
    }

    /// Absolute trace of F_{q²} over GF(2).
    pub fn trace_abs(&self, z: FieldElem) -> u8 {
        let mut acc = FieldElem::ZERO;
        let mut p = z;
        for _ in 0..self.n() {
            acc += p;
            p = self.square(p);
        }
        debug_assert!(acc.0 <= 1);
        acc.0 as u8
    }

    /// Square root in F_{q²}: the inverse Frobenius `z^{2^{2m-1}}`.
    pub fn sqrt(&self, z: FieldElem) -> FieldElem {
        self.frob(z, self.n() - 1)
    }

    /// Square root of a subfield element, `x^{2^{m-1}}`.
    pub fn sqrt_fq(&self, x: FieldElem) -> Result<FieldElem> {
        if !self.in_subfield(x) {
            return Err(Error::NotInSubfield(x.0));
        }
        Ok(self.frob(x, self.m - 1))
    }

    /// The unique `z = x·y` with `x ∈ F_q*`, `y ∈ U`.
    pub fn polar_decompose(&self, z: FieldElem) -> Result<(FieldElem, UnitCircleElem)> {
        if z.is_zero() {
            return Err(Error::ZeroInverse);
        }
        let x = self.sqrt_fq(self.norm(z))?;
        let y = self.div(z, x)?;
        debug_assert!(self.in_unit_circle(y));
        Ok((x, UnitCircleElem(y)))
    }

    /// Returns `w ∈ F_q` with `w² + w = c` if one exists (iff Tr_m(c) = 0).
    /// The other solution is `w + 1`.
    pub fn solve_artin_schreier(&self, c: FieldElem) -> Result<Option<FieldElem>> {
        if self.trace_m(c)? == 1 {
            return Ok(None);
        }
        // w = Σ_{i=1}^{m-1} (Σ_{j<i} c^{2^j}) ν^{2^i}, valid since Tr_m(ν) = 1.
        let mut w = FieldElem::ZERO;
        let mut partial = FieldElem::ZERO;
        let mut c_pow = c;
        let mut nu_pow = self.nu;
        for _ in 1..self.m {
            partial += c_pow;
            c_pow = self.square(c_pow);
            nu_pow = self.square(nu_pow);
            w += self.mul(partial, nu_pow);
        }
        debug_assert_eq!(self.square(w) + w, c);
        Ok(Some(w))
    }

    /// All `z ∈ U ∖ {1}` with `A z² + B z + C = 0`, for `A, B, C ∈ F_q`.
    pub fn solve_quadratic_in_unit_circle(
        &self,
        a: FieldElem,
        b: FieldElem,
        c: FieldElem,
    ) -> Result<Vec<UnitCircleElem>> {
        for v in [a, b, c] {
            if !self.in_subfield(v) {
                return Err(Error::NotInSubfield(v.0));
            }
        }
        if a.is_zero() && b.is_zero() && c.is_zero() {
            return Err(Error::AllZero);
        }
        Ok(self
            .unit_circle
            .iter()
            .copied()
            .filter(|u| u.0 != FieldElem::ONE)
            .filter(|u| {
                let z = u.0;
                (self.mul(a, self.square(z)) + self.mul(b, z) + c).is_zero()
            })
            .collect())
    }

    /// Some `c ≠ 0` with `c^{q-1} = y`, read off the discrete log of `y`.
    pub fn lift_q_minus_1(&self, y: UnitCircleElem) -> FieldElem {
        let k = self.log[y.0 .0 as usize];
        debug_assert_eq!(k % (self.q - 1), 0);
        FieldElem(self.exp[(k / (self.q - 1)) as usize])
    }

    /// The smaller (by encoding) primitive cube root of unity in F_q, which
    /// exists iff `m` is even.
    pub fn cube_root_of_unity(&self) -> Option<FieldElem> {
        self.subfield_elements()
            .find(|&w| !w.is_zero() && (self.square(w) + w + FieldElem::ONE).is_zero())
    }

    /// Dual basis of the bit basis `e_j = 2^j` under the trace form.
    pub fn dual_basis(&self) -> &[FieldElem] {
        &self.dual_basis
    }

    fn compute_dual_basis(&self) -> Vec<FieldElem> {
        let n = self.n() as usize;
        let mut gram = BitMatrix::zero(n);
        for j in 0..n {
            for k in 0..n {
                let t = self.trace_abs(self.mul(FieldElem(1 << j), FieldElem(1 << k)));
                gram.set(j, k, t == 1);
            }
        }
        let inv = gram.inverse().expect("trace form is nondegenerate");
        (0..n).map(|j| FieldElem(inv.row(j))).collect()
    }
}
