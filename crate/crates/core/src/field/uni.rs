//! Univariate polynomials over a [`Field`], root finding and factor degrees.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{fp, Elem, Field, FieldDescriptor};
use crate::error::{Error, Result};

/// Fields of at most this many elements are scanned exhaustively for roots.
pub const SCAN_LIMIT: u64 = 1 << 10;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniPoly {
    field: Field,
    coeffs: Vec<Elem>,
}

/// A root together with its multiplicity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Root {
    pub value: Elem,
    pub multiplicity: usize,
}

impl UniPoly {
    /// Coefficients low-to-high; trailing zeros are dropped.
    pub fn new(field: &Field, coeffs: Vec<Elem>) -> Self {
        let mut p = UniPoly { field: field.clone(), coeffs };
        p.trim();
        p
    }

    pub fn zero(field: &Field) -> Self {
        UniPoly { field: field.clone(), coeffs: Vec::new() }
    }

    pub fn constant(field: &Field, c: Elem) -> Self {
        Self::new(field, vec![c])
    }

    /// The monomial `t`.
    pub fn t(field: &Field) -> Self {
        Self::new(field, vec![field.zero(), field.one()])
    }

    /// Lifts a prime-field polynomial into `field`.
    pub fn from_fp(field: &Field, f: &[u32]) -> Self {
        Self::new(field, f.iter().map(|&c| field.from_prime(c)).collect())
    }

    pub fn from_i64(field: &Field, f: &[i64]) -> Self {
        Self::new(field, f.iter().map(|&c| field.from_i64(c)).collect())
    }

    /// Product of `(t - r)` over the given roots.
    pub fn from_roots(field: &Field, roots: &[Elem]) -> Self {
        let mut out = Self::constant(field, field.one());
        for r in roots {
            out = out.mul(&Self::new(field, vec![field.neg(r), field.one()]));
        }
        out
    }

    fn trim(&mut self) {
        while let Some(c) = self.coeffs.last() {
            if self.field.is_zero(c) {
                self.coeffs.pop();
            } else {
                break;
            }
        }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn coeffs(&self) -> &[Elem] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Elem {
        self.coeffs.get(i).cloned().unwrap_or_else(|| self.field.zero())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn lead(&self) -> Option<&Elem> {
        self.coeffs.last()
    }

    /// Prime-field coefficients, if every coefficient lies in `F_p`.
    pub fn to_fp(&self) -> Option<fp::FpPoly> {
        if !self.field.is_finite() {
            return None;
        }
        self.coeffs.iter().map(|c| self.field.to_prime(c)).collect()
    }

    pub fn eval(&self, x: &Elem) -> Elem {
        let f = &self.field;
        self.coeffs.iter().rev().fold(f.zero(), |acc, c| f.add(&f.mul(&acc, x), c))
    }

    pub fn add(&self, other: &Self) -> Self {
        let f = &self.field;
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new(f, (0..n).map(|i| f.add(&self.coeff(i), &other.coeff(i))).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        let f = &self.field;
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new(f, (0..n).map(|i| f.sub(&self.coeff(i), &other.coeff(i))).collect())
    }

    pub fn neg(&self) -> Self {
        Self::new(&self.field, self.coeffs.iter().map(|c| self.field.neg(c)).collect())
    }

    pub fn scale(&self, c: &Elem) -> Self {
        Self::new(&self.field, self.coeffs.iter().map(|a| self.field.mul(a, c)).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let f = &self.field;
        if self.is_zero() || other.is_zero() {
            return Self::zero(f);
        }
        let mut out = vec![f.zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if f.is_zero(a) {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = f.add(&out[i + j], &f.mul(a, b));
            }
        }
        Self::new(f, out)
    }

    pub fn divrem(&self, d: &Self) -> Result<(Self, Self)> {
        let f = &self.field;
        let dd = d.degree().ok_or(Error::DivisionByZero)?;
        if self.coeffs.len() <= dd {
            return Ok((Self::zero(f), self.clone()));
        }
        let inv = f.inv(d.lead().unwrap())?;
        let mut r = self.coeffs.clone();
        let mut q = vec![f.zero(); self.coeffs.len() - dd];
        for i in (dd..r.len()).rev() {
            let c = f.mul(&r[i], &inv);
            if f.is_zero(&c) {
                continue;
            }
            for (j, dj) in d.coeffs.iter().enumerate() {
                r[i - dd + j] = f.sub(&r[i - dd + j], &f.mul(&c, dj));
            }
            q[i - dd] = c;
        }
        r.truncate(dd);
        Ok((Self::new(f, q), Self::new(f, r)))
    }

    pub fn rem(&self, d: &Self) -> Result<Self> {
        Ok(self.divrem(d)?.1)
    }

    /// Exact quotient; errors if the division leaves a remainder.
    pub fn div_exact(&self, d: &Self) -> Result<Self> {
        let (q, r) = self.divrem(d)?;
        if !r.is_zero() {
            return Err(Error::MathAssertion("inexact polynomial division".into()));
        }
        Ok(q)
    }

    pub fn monic(&self) -> Self {
        match self.lead() {
            None => self.clone(),
            Some(lc) => self.scale(&self.field.inv(lc).expect("nonzero lead")),
        }
    }

    /// Monic gcd (zero if both inputs are zero).
    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b).expect("nonzero divisor");
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn derivative(&self) -> Self {
        let f = &self.field;
        Self::new(
            f,
            self.coeffs.iter().enumerate().skip(1).map(|(i, c)| f.mul(c, &f.from_i64(i as i64))).collect(),
        )
    }

    pub fn mulmod(&self, other: &Self, m: &Self) -> Self {
        self.mul(other).rem(m).expect("nonzero modulus")
    }

    pub fn powmod(&self, e: &BigUint, m: &Self) -> Self {
        let f = &self.field;
        let mut r = Self::constant(f, f.one()).rem(m).expect("nonzero modulus");
        let b = self.rem(m).expect("nonzero modulus");
        for i in (0..e.bits()).rev() {
            r = r.mulmod(&r, m);
            if e.bit(i) {
                r = r.mulmod(&b, m);
            }
        }
        r
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(self.coeffs.iter().map(|c| self.field.elem_to_json(c)).collect())
    }
}

/// All roots of `f` in `search`, each once, with multiplicities.
///
/// `f` may live over `search` itself or over its prime subfield. Over a
/// finite field the roots are found by exhaustive scan for small fields and
/// by `gcd(f, t^q - t)` plus random splitting otherwise; over the rationals
/// by the rational root test.
pub fn uni_roots(f: &UniPoly, search: &Field) -> Result<Vec<Root>> {
    if f.is_zero() {
        return Err(Error::Degenerate("roots of the zero polynomial".into()));
    }
    let g = lift_into(f, search)?;
    let mut roots = match search.descriptor() {
        FieldDescriptor::Rational => rational_roots(&g)?,
        FieldDescriptor::Finite { .. } => finite_roots(&g)?,
    };
    roots.sort();
    roots.dedup();
    let mut out = Vec::with_capacity(roots.len());
    for r in roots {
        let lin = UniPoly::new(search, vec![search.neg(&r), search.one()]);
        let mut rest = g.clone();
        let mut mult = 0;
        loop {
            let (q, rem) = rest.divrem(&lin)?;
            if !rem.is_zero() {
                break;
            }
            mult += 1;
            rest = q;
        }
        out.push(Root { value: r, multiplicity: mult });
    }
    Ok(out)
}

fn lift_into(f: &UniPoly, search: &Field) -> Result<UniPoly> {
    if f.field() == search {
        return Ok(f.clone());
    }
    if search.is_finite() && f.field().is_finite() && f.field().characteristic() == search.characteristic() {
        if let Some(c) = f.to_fp() {
            return Ok(UniPoly::from_fp(search, &c));
        }
    }
    Err(Error::FieldMismatch(format!("cannot search roots of a polynomial over {:?} in {:?}", f.field(), search)))
}

fn finite_roots(f: &UniPoly) -> Result<Vec<Elem>> {
    let field = f.field();
    if f.degree() == Some(0) {
        return Ok(Vec::new());
    }
    let q = field.order().unwrap();
    if q <= BigUint::from(SCAN_LIMIT) {
        let elems = field.elements(SCAN_LIMIT)?;
        return Ok(elems.into_iter().filter(|x| field.is_zero(&f.eval(x))).collect());
    }
    let fm = f.monic();
    let t = UniPoly::t(field);
    let tq = t.powmod(&q, &fm);
    let g = fm.gcd(&tq.sub(&t));
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut out = Vec::new();
    split_linear(&g, &q, &mut rng, &mut out);
    Ok(out)
}

// g is monic, squarefree and a product of distinct linear factors
fn split_linear<R: Rng>(g: &UniPoly, q: &BigUint, rng: &mut R, out: &mut Vec<Elem>) {
    let field = g.field();
    match g.degree() {
        None | Some(0) => return,
        Some(1) => {
            out.push(field.neg(&g.coeff(0)));
            return;
        }
        _ => {}
    }
    let p = field.characteristic();
    loop {
        let a = UniPoly::new(field, vec![field.random(rng), field.random(rng)]);
        if a.degree() != Some(1) {
            continue;
        }
        let h = if p == 2 {
            // trace map t -> t + t^2 + ... + t^(2^(m-1))
            let mut acc = a.rem(g).unwrap();
            let mut cur = acc.clone();
            for _ in 1..field.degree() {
                cur = cur.mulmod(&cur, g);
                acc = acc.add(&cur);
            }
            acc
        } else {
            let e = (q - 1u32) / 2u32;
            a.powmod(&e, g).sub(&UniPoly::constant(field, field.one()))
        };
        let d = g.gcd(&h);
        let dd = d.degree().unwrap_or(0);
        if dd > 0 && dd < g.degree().unwrap() {
            let other = g.divrem(&d).unwrap().0.monic();
            split_linear(&d, q, rng, out);
            split_linear(&other, q, rng, out);
            return;
        }
    }
}

fn rational_roots(f: &UniPoly) -> Result<Vec<Elem>> {
    let field = f.field();
    // clear denominators
    let mut lcm = BigInt::one();
    for c in f.coeffs() {
        if let Elem::Rational(q) = c {
            lcm = lcm.lcm(q.denom());
        }
    }
    let mut ints: Vec<BigInt> = f
        .coeffs()
        .iter()
        .map(|c| match c {
            Elem::Rational(q) => (q * BigRational::from_integer(lcm.clone())).to_integer(),
            Elem::Finite(_) => unreachable!(),
        })
        .collect();
    let mut out = Vec::new();
    if ints[0].is_zero() {
        out.push(field.zero());
        while ints.first().map(|c| c.is_zero()).unwrap_or(false) {
            ints.remove(0);
        }
    }
    if ints.len() <= 1 {
        return Ok(out);
    }
    let a0 = ints[0].abs();
    let an = ints.last().unwrap().abs();
    let nums = divisors(&a0)?;
    let dens = divisors(&an)?;
    let g = UniPoly::new(
        field,
        ints.iter().map(|c| Elem::Rational(BigRational::from_integer(c.clone()))).collect(),
    );
    for n in &nums {
        for d in &dens {
            if !n.gcd(d).is_one() {
                continue;
            }
            for s in [1i64, -1] {
                let cand = Elem::Rational(BigRational::new(n * BigInt::from(s), d.clone()));
                if field.is_zero(&g.eval(&cand)) {
                    out.push(cand);
                }
            }
        }
    }
    Ok(out)
}

fn divisors(n: &BigInt) -> Result<Vec<BigInt>> {
    let n = n
        .to_u64()
        .filter(|&v| v <= 1_000_000_000_000)
        .ok_or_else(|| Error::UnsupportedField("rational root test limited to coefficients below 10^12".into()))?;
    let mut out = Vec::new();
    let mut d = 1u64;
    while d * d <= n {
        if n % d == 0 {
            out.push(BigInt::from(d));
            if d * d != n {
                out.push(BigInt::from(n / d));
            }
        }
        d += 1;
    }
    Ok(out)
}

/// Degrees of the irreducible factors of a prime-field polynomial, with
/// multiplicity, sorted ascending.
pub fn irreducible_factor_degrees(f: &UniPoly) -> Result<Vec<usize>> {
    if f.is_zero() {
        return Err(Error::Degenerate("factor degrees of the zero polynomial".into()));
    }
    let c = f
        .to_fp()
        .ok_or_else(|| Error::UnsupportedField("factor degrees need prime-field coefficients".into()))?;
    let p = f.field().characteristic();
    let mut out = Vec::new();
    for (g, mult) in fp::squarefree_decomposition(&c, p) {
        for (h, d) in fp::distinct_degree(&g, p) {
            let count = (h.len() - 1) / d;
            for _ in 0..count * mult {
                out.push(d);
            }
        }
    }
    out.sort_unstable();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vals(rs: &[Root]) -> Vec<Elem> {
        rs.iter().map(|r| r.value.clone()).collect()
    }

    #[test]
    fn roots_over_prime_field() {
        let f7 = Field::prime(7).unwrap();
        let f = UniPoly::from_i64(&f7, &[-1, 0, 1]);
        let rs = uni_roots(&f, &f7).unwrap();
        assert_eq!(vals(&rs), vec![f7.from_i64(1), f7.from_i64(6)]);
        assert!(uni_roots(&UniPoly::from_i64(&f7, &[1, 0, 1]), &f7).unwrap().is_empty());
        assert!(uni_roots(&UniPoly::zero(&f7), &f7).is_err());
    }

    #[test]
    fn roots_in_extension_are_conjugate() {
        let f7 = Field::prime(7).unwrap();
        let f49 = Field::finite(7, 2).unwrap();
        let rs = uni_roots(&UniPoly::from_i64(&f7, &[1, 0, 1]), &f49).unwrap();
        assert_eq!(rs.len(), 2);
        assert_eq!(f49.frobenius(&rs[0].value).unwrap(), rs[1].value);
    }

    #[test]
    fn large_field_roots_match_scan() {
        // F_{7^4} has 2401 elements, above the scan limit
        let k = Field::finite(7, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let r1 = k.random(&mut rng);
        let r2 = k.random(&mut rng);
        let f = UniPoly::from_roots(&k, &[r1.clone(), r1.clone(), r2.clone()]);
        let rs = uni_roots(&f, &k).unwrap();
        let scan: Vec<Elem> = k.elements(1 << 12).unwrap().into_iter().filter(|x| k.is_zero(&f.eval(x))).collect();
        let mut got = vals(&rs);
        got.sort();
        let mut want = scan;
        want.sort();
        assert_eq!(got, want);
        let m1 = rs.iter().find(|r| r.value == r1).unwrap().multiplicity;
        assert_eq!(m1, if r1 == r2 { 3 } else { 2 });
    }

    #[test]
    fn rational_root_test() {
        let q = Field::rational();
        // (2t - 1)(t + 3) t
        let f = UniPoly::from_i64(&q, &[0, -3, 5, 2]);
        let rs = uni_roots(&f, &q).unwrap();
        let shown: Vec<String> = rs.iter().map(|r| q.format(&r.value)).collect();
        assert_eq!(shown, vec!["-3", "0", "1/2"]);
    }

    #[test]
    fn factor_degree_multisets() {
        let f5 = Field::prime(5).unwrap();
        assert_eq!(irreducible_factor_degrees(&UniPoly::from_i64(&f5, &[0, -1, 0, 1])).unwrap(), vec![1, 1, 1]);
        let f7 = Field::prime(7).unwrap();
        assert_eq!(irreducible_factor_degrees(&UniPoly::from_i64(&f7, &[1, 0, 1])).unwrap(), vec![2]);
        let g = UniPoly::from_i64(&f7, &[1, 0, 1]).mul(&UniPoly::from_i64(&f7, &[-3, 1]));
        assert_eq!(irreducible_factor_degrees(&g).unwrap(), vec![1, 2]);
        let f49 = Field::finite(7, 2).unwrap();
        let h = UniPoly::new(&f49, vec![f49.from_coeffs(&[0, 1]).unwrap(), f49.one()]);
        assert!(matches!(irreducible_factor_degrees(&h), Err(Error::UnsupportedField(_))));
    }
}
