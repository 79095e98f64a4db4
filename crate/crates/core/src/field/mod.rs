//! Exact arithmetic over the rationals and over finite fields `F_{p^m}`.
//!
//! A [`Field`] is a shared, immutable context (descriptor plus cached
//! Frobenius data); [`Elem`] values carry no descriptor and are only
//! meaningful together with the field that produced them. Containers that
//! hold elements (points, configurations, forms) also hold their `Field`,
//! and mixed-field operations are rejected there.

pub mod fp;
pub mod uni;

use std::fmt;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};
pub use fp::FpPoly;
pub use uni::{irreducible_factor_degrees, uni_roots, Root, UniPoly};

/// Serializable description of a field.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FieldDescriptor {
    Rational,
    Finite {
        p: u32,
        m: usize,
        /// Monic irreducible modulus, coefficients low-to-high (length m+1).
        modulus: Vec<u32>,
    },
}

/// A field element in canonical form.
///
/// Rationals are fully reduced with positive denominator; finite-field
/// elements are residue polynomials (low-to-high) with no trailing zeros,
/// so zero is the empty vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Elem {
    Rational(BigRational),
    Finite(SmallVec<[u32; 4]>),
}

struct Inner {
    desc: FieldDescriptor,
    /// `frob[j] = t^(j*p) mod modulus`; empty for the rationals.
    frob: Vec<FpPoly>,
}

#[derive(Clone)]
pub struct Field {
    inner: Arc<Inner>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.inner.desc {
            FieldDescriptor::Rational => write!(f, "Q"),
            FieldDescriptor::Finite { p, m, modulus } => write!(f, "F_{}^{} mod {:?}", p, m, modulus),
        }
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.inner.desc == other.inner.desc
    }
}
impl Eq for Field {}

impl Field {
    pub fn rational() -> Self {
        Field { inner: Arc::new(Inner { desc: FieldDescriptor::Rational, frob: Vec::new() }) }
    }

    /// The prime field `F_p`.
    pub fn prime(p: u32) -> Result<Self> {
        Self::finite(p, 1)
    }

    /// `F_{p^m}` with the lexicographically smallest monic irreducible
    /// modulus, comparing coefficient vectors `(c_0, .., c_{m-1})` from `c_0`.
    pub fn finite(p: u32, m: usize) -> Result<Self> {
        check_prime(p)?;
        if m == 0 {
            return Err(Error::InvalidField("extension degree must be >= 1".into()));
        }
        let modulus = smallest_irreducible(p, m);
        Ok(Self::build(p, m, modulus))
    }

    /// `F_p[t]/(modulus)` for a caller-supplied monic irreducible modulus.
    pub fn with_modulus(p: u32, modulus: Vec<u32>) -> Result<Self> {
        check_prime(p)?;
        let mut modulus = modulus;
        fp::trim(&mut modulus);
        if modulus.iter().any(|&c| c >= p) {
            return Err(Error::InvalidField("modulus coefficients must be reduced mod p".into()));
        }
        if modulus.len() < 2 || *modulus.last().unwrap() != 1 {
            return Err(Error::InvalidField("modulus must be monic of degree >= 1".into()));
        }
        if !fp::is_irreducible(&modulus, p) {
            return Err(Error::InvalidField(format!("modulus {:?} is reducible over F_{}", modulus, p)));
        }
        let m = modulus.len() - 1;
        Ok(Self::build(p, m, modulus))
    }

    pub fn from_descriptor(desc: &FieldDescriptor) -> Result<Self> {
        match desc {
            FieldDescriptor::Rational => Ok(Self::rational()),
            FieldDescriptor::Finite { p, m, modulus } => {
                let f = Self::with_modulus(*p, modulus.clone())?;
                if f.degree() != *m {
                    return Err(Error::InvalidField(format!("m = {} but modulus has degree {}", m, f.degree())));
                }
                Ok(f)
            }
        }
    }

    fn build(p: u32, m: usize, modulus: Vec<u32>) -> Self {
        let tp = fp::powmod_u64(&[0, 1], p as u64, &modulus, p);
        let mut frob = Vec::with_capacity(m);
        let mut cur: FpPoly = vec![1];
        for _ in 0..m {
            frob.push(cur.clone());
            cur = fp::mulmod(&cur, &tp, &modulus, p);
        }
        Field { inner: Arc::new(Inner { desc: FieldDescriptor::Finite { p, m, modulus }, frob }) }
    }

    pub fn descriptor(&self) -> &FieldDescriptor {
        &self.inner.desc
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.inner.desc, FieldDescriptor::Finite { .. })
    }

    /// Characteristic; 0 for the rationals.
    pub fn characteristic(&self) -> u32 {
        match self.inner.desc {
            FieldDescriptor::Rational => 0,
            FieldDescriptor::Finite { p, .. } => p,
        }
    }

    /// Extension degree over the prime field (1 for the rationals).
    pub fn degree(&self) -> usize {
        match self.inner.desc {
            FieldDescriptor::Rational => 1,
            FieldDescriptor::Finite { m, .. } => m,
        }
    }

    pub fn modulus(&self) -> Option<&[u32]> {
        match &self.inner.desc {
            FieldDescriptor::Rational => None,
            FieldDescriptor::Finite { modulus, .. } => Some(modulus),
        }
    }

    /// Number of elements, if finite.
    pub fn order(&self) -> Option<BigUint> {
        match self.inner.desc {
            FieldDescriptor::Rational => None,
            FieldDescriptor::Finite { p, m, .. } => Some(BigUint::from(p).pow(m as u32)),
        }
    }

    /// Number of elements if it fits in a `u64`.
    pub fn order_u64(&self) -> Option<u64> {
        self.order().and_then(|o| o.to_u64())
    }

    pub fn ensure_same(&self, other: &Field) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::FieldMismatch(format!("{:?} vs {:?}", self, other)))
        }
    }

    fn p(&self) -> u32 {
        self.characteristic()
    }

    pub fn zero(&self) -> Elem {
        match self.inner.desc {
            FieldDescriptor::Rational => Elem::Rational(BigRational::zero()),
            FieldDescriptor::Finite { .. } => Elem::Finite(SmallVec::new()),
        }
    }

    pub fn one(&self) -> Elem {
        self.from_i64(1)
    }

    pub fn from_i64(&self, v: i64) -> Elem {
        match self.inner.desc {
            FieldDescriptor::Rational => Elem::Rational(BigRational::from_integer(BigInt::from(v))),
            FieldDescriptor::Finite { p, .. } => self.from_prime(fp::reduce_i64(v, p)),
        }
    }

    /// Embeds a residue of the prime field.
    pub fn from_prime(&self, v: u32) -> Elem {
        let p = self.p();
        let v = if p == 0 { v } else { v % p };
        match self.inner.desc {
            FieldDescriptor::Rational => Elem::Rational(BigRational::from_integer(BigInt::from(v))),
            FieldDescriptor::Finite { .. } => {
                let mut s = SmallVec::new();
                if v != 0 {
                    s.push(v);
                }
                Elem::Finite(s)
            }
        }
    }

    /// Builds a finite-field element from a coefficient vector (reduced).
    pub fn from_coeffs(&self, coeffs: &[u32]) -> Result<Elem> {
        match &self.inner.desc {
            FieldDescriptor::Rational => Err(Error::UnsupportedField("coefficient vectors need a finite field".into())),
            FieldDescriptor::Finite { p, modulus, .. } => {
                let v: Vec<u32> = coeffs.iter().map(|&c| c % p).collect();
                Ok(Elem::Finite(fp::rem_monic(&v, modulus, *p).into_iter().collect()))
            }
        }
    }

    pub fn from_rational(&self, q: BigRational) -> Result<Elem> {
        match self.inner.desc {
            FieldDescriptor::Rational => Ok(Elem::Rational(q)),
            FieldDescriptor::Finite { .. } => {
                let n = self.from_bigint(q.numer());
                let d = self.from_bigint(q.denom());
                self.div(&n, &d)
            }
        }
    }

    fn from_bigint(&self, v: &BigInt) -> Elem {
        match self.inner.desc {
            FieldDescriptor::Rational => Elem::Rational(BigRational::from_integer(v.clone())),
            FieldDescriptor::Finite { p, .. } => {
                let r = ((v % BigInt::from(p)) + BigInt::from(p)) % BigInt::from(p);
                self.from_prime(r.to_u32().unwrap())
            }
        }
    }

    /// Coefficient vector of a finite-field element, padded to length m.
    pub fn coeffs(&self, a: &Elem) -> Vec<u32> {
        let m = self.degree();
        match a {
            Elem::Finite(v) => {
                let mut out = v.to_vec();
                out.resize(m, 0);
                out
            }
            Elem::Rational(_) => panic!("coeffs() on a rational element"),
        }
    }

    /// The residue if `a` lies in the prime subfield.
    pub fn to_prime(&self, a: &Elem) -> Option<u32> {
        match a {
            Elem::Finite(v) if v.len() <= 1 => Some(v.first().copied().unwrap_or(0)),
            _ => None,
        }
    }

    pub fn in_prime_subfield(&self, a: &Elem) -> bool {
        match a {
            Elem::Finite(v) => v.len() <= 1,
            Elem::Rational(_) => true,
        }
    }

    pub fn is_zero(&self, a: &Elem) -> bool {
        match a {
            Elem::Rational(q) => q.is_zero(),
            Elem::Finite(v) => v.is_empty(),
        }
    }

    pub fn is_one(&self, a: &Elem) -> bool {
        match a {
            Elem::Rational(q) => q.is_one(),
            Elem::Finite(v) => v.len() == 1 && v[0] == 1,
        }
    }

    pub fn add(&self, a: &Elem, b: &Elem) -> Elem {
        match (a, b) {
            (Elem::Rational(x), Elem::Rational(y)) => Elem::Rational(x + y),
            (Elem::Finite(x), Elem::Finite(y)) => Elem::Finite(fp::add(x, y, self.p()).into_iter().collect()),
            _ => panic!("mixed element kinds"),
        }
    }

    pub fn sub(&self, a: &Elem, b: &Elem) -> Elem {
        match (a, b) {
            (Elem::Rational(x), Elem::Rational(y)) => Elem::Rational(x - y),
            (Elem::Finite(x), Elem::Finite(y)) => Elem::Finite(fp::sub(x, y, self.p()).into_iter().collect()),
            _ => panic!("mixed element kinds"),
        }
    }

    pub fn neg(&self, a: &Elem) -> Elem {
        match a {
            Elem::Rational(x) => Elem::Rational(-x),
            Elem::Finite(x) => Elem::Finite(fp::neg(x, self.p()).into_iter().collect()),
        }
    }

    pub fn mul(&self, a: &Elem, b: &Elem) -> Elem {
        match (a, b) {
            (Elem::Rational(x), Elem::Rational(y)) => Elem::Rational(x * y),
            (Elem::Finite(x), Elem::Finite(y)) => {
                let p = self.p();
                if x.is_empty() || y.is_empty() {
                    return Elem::Finite(SmallVec::new());
                }
                if x.len() == 1 {
                    return Elem::Finite(fp::scale(y, x[0], p).into_iter().collect());
                }
                if y.len() == 1 {
                    return Elem::Finite(fp::scale(x, y[0], p).into_iter().collect());
                }
                let prod = fp::mul(x, y, p);
                let modulus = self.modulus().unwrap();
                Elem::Finite(fp::rem_monic(&prod, modulus, p).into_iter().collect())
            }
            _ => panic!("mixed element kinds"),
        }
    }

    pub fn inv(&self, a: &Elem) -> Result<Elem> {
        if self.is_zero(a) {
            return Err(Error::DivisionByZero);
        }
        Ok(match a {
            Elem::Rational(x) => Elem::Rational(x.recip()),
            Elem::Finite(x) => {
                let p = self.p();
                if x.len() == 1 {
                    let mut s = SmallVec::new();
                    s.push(fp::inv_mod(x[0], p));
                    Elem::Finite(s)
                } else {
                    let (g, s) = fp::gcd_ext_inverse(x, self.modulus().unwrap(), p);
                    debug_assert_eq!(g, vec![1]);
                    Elem::Finite(s.into_iter().collect())
                }
            }
        })
    }

    pub fn div(&self, a: &Elem, b: &Elem) -> Result<Elem> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    pub fn pow(&self, a: &Elem, mut e: u64) -> Elem {
        let mut base = a.clone();
        let mut r = self.one();
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(&r, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        r
    }

    pub fn pow_big(&self, a: &Elem, e: &BigUint) -> Elem {
        let mut r = self.one();
        for i in (0..e.bits()).rev() {
            r = self.mul(&r, &r);
            if e.bit(i) {
                r = self.mul(&r, a);
            }
        }
        r
    }

    /// The p-th power map. Applying it `m` times is the identity.
    pub fn frobenius(&self, a: &Elem) -> Result<Elem> {
        match a {
            Elem::Rational(_) => Err(Error::UnsupportedField("frobenius is undefined over Q".into())),
            Elem::Finite(x) => {
                if x.len() <= 1 {
                    return Ok(a.clone());
                }
                let p = self.p();
                let m = self.degree();
                let mut acc = vec![0u64; m];
                let budget = (u64::MAX / ((p as u64 - 1).pow(2).max(1))).max(1);
                let mut rows = 0;
                for (j, &c) in x.iter().enumerate() {
                    if c == 0 {
                        continue;
                    }
                    if rows == budget {
                        acc.iter_mut().for_each(|v| *v %= p as u64);
                        rows = 0;
                    }
                    for (i, &f) in self.inner.frob[j].iter().enumerate() {
                        acc[i] += c as u64 * f as u64;
                    }
                    rows += 1;
                }
                let mut v: Vec<u32> = acc.into_iter().map(|s| (s % p as u64) as u32).collect();
                fp::trim(&mut v);
                Ok(Elem::Finite(v.into_iter().collect()))
            }
        }
    }

    /// Applies the Frobenius `k` times.
    pub fn frobenius_pow(&self, a: &Elem, k: usize) -> Result<Elem> {
        let mut x = a.clone();
        for _ in 0..(k % self.degree().max(1)) {
            x = self.frobenius(&x)?;
        }
        Ok(x)
    }

    /// Uniform random element (finite), or a small random rational.
    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> Elem {
        match &self.inner.desc {
            FieldDescriptor::Rational => {
                let n: i64 = rng.gen_range(-30..=30);
                let d: i64 = rng.gen_range(1..=6);
                Elem::Rational(BigRational::new(BigInt::from(n), BigInt::from(d)))
            }
            FieldDescriptor::Finite { p, m, .. } => {
                let mut v: Vec<u32> = (0..*m).map(|_| rng.gen_range(0..*p)).collect();
                fp::trim(&mut v);
                Elem::Finite(v.into_iter().collect())
            }
        }
    }

    /// Uniform random element of the prime subfield (small integers over Q).
    pub fn random_prime<R: Rng + ?Sized>(&self, rng: &mut R) -> Elem {
        match self.inner.desc {
            FieldDescriptor::Rational => self.from_i64(rng.gen_range(-20..=20)),
            FieldDescriptor::Finite { p, .. } => self.from_prime(rng.gen_range(0..p)),
        }
    }

    /// All elements, for fields of at most `cap` elements.
    pub fn elements(&self, cap: u64) -> Result<Vec<Elem>> {
        let q = self
            .order_u64()
            .ok_or_else(|| Error::UnsupportedField("enumeration needs a finite field".into()))?;
        if q > cap {
            return Err(Error::UnsupportedField(format!("field of order {} exceeds enumeration cap {}", q, cap)));
        }
        let p = self.p();
        let m = self.degree();
        let mut out = Vec::with_capacity(q as usize);
        let mut digits = vec![0u32; m];
        for _ in 0..q {
            let mut v = digits.clone();
            fp::trim(&mut v);
            out.push(Elem::Finite(v.into_iter().collect()));
            for d in digits.iter_mut() {
                *d += 1;
                if *d == p {
                    *d = 0;
                } else {
                    break;
                }
            }
        }
        Ok(out)
    }

    /// Distinct elements `0, 1, t, 1+t, ...` usable as interpolation nodes.
    pub fn distinct_elements(&self, count: usize) -> Result<Vec<Elem>> {
        match &self.inner.desc {
            FieldDescriptor::Rational => Ok((0..count as i64).map(|i| self.from_i64(i)).collect()),
            FieldDescriptor::Finite { p, m, .. } => {
                let q = self.order_u64().unwrap_or(u64::MAX);
                if (count as u64) > q {
                    return Err(Error::UnsupportedField(format!("field has fewer than {} elements", count)));
                }
                let mut out = Vec::with_capacity(count);
                let mut digits = vec![0u32; *m];
                for _ in 0..count {
                    let mut v = digits.clone();
                    fp::trim(&mut v);
                    out.push(Elem::Finite(v.into_iter().collect()));
                    for d in digits.iter_mut() {
                        *d += 1;
                        if *d == *p {
                            *d = 0;
                        } else {
                            break;
                        }
                    }
                }
                Ok(out)
            }
        }
    }

    /// JSON form: rationals as `"num/den"`, prime-field residues as `"c"`,
    /// extension elements as coefficient arrays low-to-high.
    pub fn elem_to_json(&self, a: &Elem) -> serde_json::Value {
        match a {
            Elem::Rational(q) => serde_json::Value::String(format_rational(q)),
            Elem::Finite(v) => {
                if self.degree() == 1 {
                    serde_json::Value::String(v.first().copied().unwrap_or(0).to_string())
                } else {
                    serde_json::Value::Array(self.coeffs(a).into_iter().map(serde_json::Value::from).collect())
                }
            }
        }
    }

    pub fn elem_from_json(&self, v: &serde_json::Value) -> Result<Elem> {
        match v {
            serde_json::Value::String(s) => match &self.inner.desc {
                FieldDescriptor::Rational => Ok(Elem::Rational(parse_rational(s)?)),
                FieldDescriptor::Finite { .. } => {
                    let q = parse_rational(s)?;
                    self.from_rational(q)
                }
            },
            serde_json::Value::Number(n) => {
                let i = n.as_i64().ok_or_else(|| Error::Parse(format!("bad number {}", n)))?;
                Ok(self.from_i64(i))
            }
            serde_json::Value::Array(items) => {
                let mut cs = Vec::with_capacity(items.len());
                for it in items {
                    let c = it.as_i64().ok_or_else(|| Error::Parse(format!("bad coefficient {}", it)))?;
                    cs.push(fp::reduce_i64(c, self.p().max(1)));
                }
                self.from_coeffs(&cs)
            }
            other => Err(Error::Parse(format!("cannot read field element from {}", other))),
        }
    }

    pub fn format(&self, a: &Elem) -> String {
        match a {
            Elem::Rational(q) => format_rational(q),
            Elem::Finite(v) => {
                if self.degree() == 1 {
                    v.first().copied().unwrap_or(0).to_string()
                } else {
                    format!("{:?}", self.coeffs(a))
                }
            }
        }
    }
}

fn check_prime(p: u32) -> Result<()> {
    if !fp::is_prime(p) {
        return Err(Error::InvalidField(format!("{} is not prime", p)));
    }
    if p >= (1 << 31) {
        return Err(Error::InvalidField("primes must be below 2^31".into()));
    }
    Ok(())
}

fn smallest_irreducible(p: u32, m: usize) -> Vec<u32> {
    // odometer over (c_0, .., c_{m-1}) with c_0 most significant
    let mut c = vec![0u32; m];
    // constant term 0 means t divides the candidate
    if m > 1 {
        c[0] = 1;
    }
    loop {
        let mut cand = c.clone();
        cand.push(1);
        if fp::is_irreducible(&cand, p) {
            return cand;
        }
        let mut i = m;
        loop {
            if i == 0 {
                unreachable!("irreducible polynomials exist in every degree");
            }
            i -= 1;
            c[i] += 1;
            if c[i] < p {
                break;
            }
            c[i] = 0;
        }
    }
}

pub fn format_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| Error::Parse(format!("bad numerator in {:?}", s)))?;
    let d: BigInt = d.parse().map_err(|_| Error::Parse(format!("bad denominator in {:?}", s)))?;
    if d.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {:?}", s)));
    }
    let q = BigRational::new(n, d);
    debug_assert!(q.denom().is_positive());
    Ok(q)
}
