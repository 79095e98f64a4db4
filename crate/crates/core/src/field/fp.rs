//! Dense polynomials over a prime field `F_p`, stored low-to-high as `u32`
//! residues with no trailing zeros. These are the workhorse for extension
//! field arithmetic and for factoring over the prime field.

use num_bigint::BigUint;
use rand::Rng;

pub type FpPoly = Vec<u32>;

#[inline]
pub fn trim(v: &mut Vec<u32>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

#[inline]
pub fn add_mod(a: u32, b: u32, p: u32) -> u32 {
    let s = a as u64 + b as u64;
    (if s >= p as u64 { s - p as u64 } else { s }) as u32
}

#[inline]
pub fn sub_mod(a: u32, b: u32, p: u32) -> u32 {
    if a >= b {
        a - b
    } else {
        (a as u64 + p as u64 - b as u64) as u32
    }
}

#[inline]
pub fn mul_mod(a: u32, b: u32, p: u32) -> u32 {
    ((a as u64 * b as u64) % p as u64) as u32
}

pub fn pow_mod(mut a: u32, mut e: u64, p: u32) -> u32 {
    let mut r = 1u32 % p;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, p);
        }
        a = mul_mod(a, a, p);
        e >>= 1;
    }
    r
}

/// Inverse of a nonzero residue.
pub fn inv_mod(a: u32, p: u32) -> u32 {
    debug_assert!(a % p != 0);
    pow_mod(a, p as u64 - 2, p)
}

pub fn reduce_i64(v: i64, p: u32) -> u32 {
    v.rem_euclid(p as i64) as u32
}

/// Number of products of two residues that fit in a `u64` accumulator.
#[inline]
fn lazy_budget(p: u32) -> u64 {
    let sq = (p as u64 - 1).max(1).pow(2);
    (u64::MAX / sq).saturating_sub(1).max(1)
}

pub fn add(a: &[u32], b: &[u32], p: u32) -> FpPoly {
    let n = a.len().max(b.len());
    let mut r = Vec::with_capacity(n);
    for i in 0..n {
        let x = a.get(i).copied().unwrap_or(0);
        let y = b.get(i).copied().unwrap_or(0);
        r.push(add_mod(x, y, p));
    }
    trim(&mut r);
    r
}

pub fn sub(a: &[u32], b: &[u32], p: u32) -> FpPoly {
    let n = a.len().max(b.len());
    let mut r = Vec::with_capacity(n);
    for i in 0..n {
        let x = a.get(i).copied().unwrap_or(0);
        let y = b.get(i).copied().unwrap_or(0);
        r.push(sub_mod(x, y, p));
    }
    trim(&mut r);
    r
}

pub fn neg(a: &[u32], p: u32) -> FpPoly {
    a.iter().map(|&x| if x == 0 { 0 } else { p - x }).collect()
}

pub fn scale(a: &[u32], c: u32, p: u32) -> FpPoly {
    if c == 0 {
        return Vec::new();
    }
    let mut r: Vec<u32> = a.iter().map(|&x| mul_mod(x, c, p)).collect();
    trim(&mut r);
    r
}

pub fn mul(a: &[u32], b: &[u32], p: u32) -> FpPoly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let budget = lazy_budget(p);
    let pp = p as u64;
    let mut acc = vec![0u64; a.len() + b.len() - 1];
    let mut rows = 0u64;
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        if rows == budget {
            acc.iter_mut().for_each(|v| *v %= pp);
            rows = 0;
        }
        let x = x as u64;
        for (j, &y) in b.iter().enumerate() {
            acc[i + j] += x * y as u64;
        }
        rows += 1;
    }
    let mut r: Vec<u32> = acc.into_iter().map(|v| (v % pp) as u32).collect();
    trim(&mut r);
    r
}

/// Remainder of `a` modulo a nonzero `m`.
pub fn rem(a: &[u32], m: &[u32], p: u32) -> FpPoly {
    divrem(a, m, p).1
}

pub fn divrem(a: &[u32], m: &[u32], p: u32) -> (FpPoly, FpPoly) {
    assert!(!m.is_empty(), "division by the zero polynomial");
    if a.len() < m.len() {
        return (Vec::new(), a.to_vec());
    }
    let dm = m.len() - 1;
    let lc_inv = inv_mod(m[dm], p);
    let mut r: Vec<u32> = a.to_vec();
    let mut q = vec![0u32; a.len() - dm];
    for i in (dm..a.len()).rev() {
        let c = mul_mod(r[i], lc_inv, p);
        if c == 0 {
            continue;
        }
        q[i - dm] = c;
        let nc = p - c;
        for j in 0..=dm {
            let t = mul_mod(nc, m[j], p);
            r[i - dm + j] = add_mod(r[i - dm + j], t, p);
        }
    }
    r.truncate(dm);
    trim(&mut r);
    trim(&mut q);
    (q, r)
}

/// Reduction modulo a monic polynomial, lazily accumulated.
pub fn rem_monic(a: &[u32], m: &[u32], p: u32) -> FpPoly {
    let dm = m.len() - 1;
    if a.len() <= dm {
        let mut r = a.to_vec();
        trim(&mut r);
        return r;
    }
    let pp = p as u64;
    let small = (pp - 1).saturating_mul(pp - 1).saturating_mul(2 * dm as u64 + 2) < (1u64 << 63);
    let mut r: Vec<u64> = a.iter().map(|&x| x as u64).collect();
    for i in (dm..a.len()).rev() {
        let c = r[i] % pp;
        if c == 0 {
            continue;
        }
        let nc = pp - c;
        if small {
            for j in 0..dm {
                r[i - dm + j] += nc * m[j] as u64;
            }
        } else {
            for j in 0..dm {
                r[i - dm + j] = (r[i - dm + j] + nc * m[j] as u64 % pp) % pp;
            }
        }
    }
    let mut out: Vec<u32> = r[..dm].iter().map(|&v| (v % pp) as u32).collect();
    trim(&mut out);
    out
}

pub fn mulmod(a: &[u32], b: &[u32], m: &[u32], p: u32) -> FpPoly {
    let prod = mul(a, b, p);
    if m.last() == Some(&1) {
        rem_monic(&prod, m, p)
    } else {
        rem(&prod, m, p)
    }
}

pub fn powmod(base: &[u32], e: &BigUint, m: &[u32], p: u32) -> FpPoly {
    let mut result: FpPoly = rem(&[1], m, p);
    let b = rem(base, m, p);
    let bits = e.bits();
    for i in (0..bits).rev() {
        result = mulmod(&result, &result, m, p);
        if e.bit(i) {
            result = mulmod(&result, &b, m, p);
        }
    }
    result
}

pub fn powmod_u64(base: &[u32], e: u64, m: &[u32], p: u32) -> FpPoly {
    powmod(base, &BigUint::from(e), m, p)
}

pub fn monic(a: &[u32], p: u32) -> FpPoly {
    match a.last() {
        None => Vec::new(),
        Some(&lc) => scale(a, inv_mod(lc, p), p),
    }
}

pub fn gcd(a: &[u32], b: &[u32], p: u32) -> FpPoly {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    trim(&mut x);
    trim(&mut y);
    while !y.is_empty() {
        let r = rem(&x, &y, p);
        x = y;
        y = r;
    }
    monic(&x, p)
}

/// Returns `(g, s)` with `g = gcd(a, m)` monic and `s*a = g mod m`.
pub fn gcd_ext_inverse(a: &[u32], m: &[u32], p: u32) -> (FpPoly, FpPoly) {
    let mut r0 = m.to_vec();
    let mut r1 = rem(a, m, p);
    let mut s0: FpPoly = Vec::new();
    let mut s1: FpPoly = vec![1];
    while !r1.is_empty() {
        let (q, r) = divrem(&r0, &r1, p);
        let s = sub(&s0, &mul(&q, &s1, p), p);
        r0 = r1;
        r1 = r;
        s0 = s1;
        s1 = s;
    }
    let lc = *r0.last().expect("nonzero modulus");
    let inv = inv_mod(lc, p);
    (scale(&r0, inv, p), rem(&scale(&s0, inv, p), m, p))
}

pub fn derivative(a: &[u32], p: u32) -> FpPoly {
    let mut r: Vec<u32> = a
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, &c)| mul_mod(c, (i as u64 % p as u64) as u32, p))
        .collect();
    trim(&mut r);
    r
}

pub fn eval(a: &[u32], x: u32, p: u32) -> u32 {
    a.iter().rev().fold(0u32, |acc, &c| add_mod(mul_mod(acc, x, p), c, p))
}

pub fn degree(a: &[u32]) -> Option<usize> {
    if a.is_empty() {
        None
    } else {
        Some(a.len() - 1)
    }
}

fn prime_factors(mut n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// `t^(p^k) mod f` computed by `k` successive p-th powers.
pub fn frobenius_power_of_t(f: &[u32], k: usize, p: u32) -> FpPoly {
    let mut x = rem(&[0, 1], f, p);
    for _ in 0..k {
        x = powmod_u64(&x, p as u64, f, p);
    }
    x
}

/// Rabin's irreducibility test for a polynomial of degree >= 1.
pub fn is_irreducible(f: &[u32], p: u32) -> bool {
    let n = match degree(f) {
        None | Some(0) => return false,
        Some(n) => n,
    };
    if n == 1 {
        return true;
    }
    let f = monic(f, p);
    if f[0] == 0 {
        return false;
    }
    // cheap root check first
    if (p as usize) <= 4096 && (0..p).any(|x| eval(&f, x, p) == 0) {
        return false;
    }
    let t = vec![0u32, 1];
    // powers t^(p^i) for i = 1..n, cached
    let mut pows = Vec::with_capacity(n);
    let mut x = rem(&t, &f, p);
    for _ in 0..n {
        x = powmod_u64(&x, p as u64, &f, p);
        pows.push(x.clone());
    }
    if pows[n - 1] != t {
        return false;
    }
    for q in prime_factors(n) {
        let h = sub(&pows[n / q - 1], &t, p);
        if gcd(&f, &h, p) != vec![1] {
            return false;
        }
    }
    true
}

/// Squarefree decomposition of a nonzero polynomial: pairs `(g_i, i)` with
/// `monic(f) = prod g_i^i` and each `g_i` squarefree.
pub fn squarefree_decomposition(f: &[u32], p: u32) -> Vec<(FpPoly, usize)> {
    let f = monic(f, p);
    let mut out = Vec::new();
    sqf_rec(&f, p, 1, &mut out);
    out.sort_by(|a, b| a.1.cmp(&b.1).then(a.0.cmp(&b.0)));
    out
}

fn sqf_rec(f: &[u32], p: u32, mult: usize, out: &mut Vec<(FpPoly, usize)>) {
    if f.len() <= 1 {
        return;
    }
    let df = derivative(f, p);
    if df.is_empty() {
        // f is a p-th power
        let root = pth_root(f, p);
        sqf_rec(&root, p, mult * p as usize, out);
        return;
    }
    let mut c = gcd(f, &df, p);
    let mut w = divrem(f, &c, p).0;
    let mut i = 1;
    while w.len() > 1 {
        let y = gcd(&w, &c, p);
        let z = divrem(&w, &y, p).0;
        if z.len() > 1 {
            out.push((monic(&z, p), i * mult));
        }
        i += 1;
        w = y;
        c = divrem(&c, &w, p).0;
    }
    if c.len() > 1 {
        let root = pth_root(&c, p);
        sqf_rec(&root, p, mult * p as usize, out);
    }
}

fn pth_root(f: &[u32], p: u32) -> FpPoly {
    let p = p as usize;
    let mut r: Vec<u32> = (0..f.len()).step_by(p).map(|i| f[i]).collect();
    trim(&mut r);
    r
}

/// Distinct-degree factorization of a monic squarefree polynomial:
/// pairs `(product of all irreducible factors of degree d, d)`.
pub fn distinct_degree(f: &[u32], p: u32) -> Vec<(FpPoly, usize)> {
    let mut out = Vec::new();
    let mut rest = monic(f, p);
    let t = vec![0u32, 1];
    let mut h = rem(&t, &rest, p);
    let mut d = 0;
    while rest.len() > 1 {
        d += 1;
        if 2 * d > rest.len() - 1 {
            let deg = rest.len() - 1;
            out.push((rest.clone(), deg));
            break;
        }
        h = powmod_u64(&h, p as u64, &rest, p);
        let g = gcd(&rest, &sub(&h, &t, p), p);
        if g.len() > 1 {
            rest = divrem(&rest, &g, p).0;
            h = rem(&h, &rest, p);
            out.push((g, d));
        }
    }
    out
}

/// Splits a monic squarefree product of irreducibles of common degree `d`
/// into its factors (Cantor-Zassenhaus, caller-owned RNG).
pub fn equal_degree<R: Rng>(f: &[u32], d: usize, p: u32, rng: &mut R) -> Vec<FpPoly> {
    let n = f.len() - 1;
    if n == d {
        return vec![monic(f, p)];
    }
    loop {
        let a: FpPoly = {
            let mut v: Vec<u32> = (0..n).map(|_| rng.gen_range(0..p)).collect();
            trim(&mut v);
            v
        };
        if a.len() <= 1 {
            continue;
        }
        let b = if p == 2 {
            // absolute trace-like map: sum of a^(2^i), i < d
            let mut acc = a.clone();
            let mut cur = a.clone();
            for _ in 1..d {
                cur = mulmod(&cur, &cur, f, p);
                acc = add(&acc, &cur, p);
            }
            acc
        } else {
            let e = (BigUint::from(p).pow(d as u32) - 1u32) / 2u32;
            let h = powmod(&a, &e, f, p);
            sub(&h, &[1], p)
        };
        let g = gcd(f, &b, p);
        if g.len() > 1 && g.len() < f.len() {
            let other = divrem(f, &g, p).0;
            let mut out = equal_degree(&g, d, p, rng);
            out.extend(equal_degree(&monic(&other, p), d, p, rng));
            return out;
        }
    }
}

/// Full factorization into monic irreducibles with multiplicities, sorted.
pub fn factor<R: Rng>(f: &[u32], p: u32, rng: &mut R) -> Vec<(FpPoly, usize)> {
    let mut out = Vec::new();
    for (g, mult) in squarefree_decomposition(f, p) {
        for (h, d) in distinct_degree(&g, p) {
            for irr in equal_degree(&h, d, p, rng) {
                out.push((irr, mult));
            }
        }
    }
    out.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
    out
}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n as u64 {
        if n as u64 % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn irreducibility_small_cases() {
        assert!(is_irreducible(&[1, 1, 1], 2));
        assert!(!is_irreducible(&[1, 0, 1], 2));
        assert!(is_irreducible(&[1, 0, 1], 7));
        assert!(!is_irreducible(&[1, 0, 1], 5));
        assert!(!is_irreducible(&[3, 1, 0, 1], 7));
        assert!(is_irreducible(&[3, 0, 0, 1], 7));
        assert!(is_irreducible(&[1, 0, 1, 1], 7));
    }

    #[test]
    fn factor_reconstructs_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = 7;
        // (t^2+1)(t-3)^2 (t+1)
        let f = mul(&mul(&[1, 0, 1], &mul(&[4, 1], &[4, 1], p), p), &[1, 1], p);
        let facs = factor(&f, p, &mut rng);
        let mut prod = vec![1u32];
        for (g, m) in &facs {
            for _ in 0..*m {
                prod = mul(&prod, g, p);
            }
        }
        assert_eq!(prod, monic(&f, p));
        let degs: Vec<usize> = facs.iter().flat_map(|(g, m)| std::iter::repeat(g.len() - 1).take(*m)).collect();
        let mut degs = degs;
        degs.sort();
        assert_eq!(degs, vec![1, 1, 1, 2]);
    }

    #[test]
    fn p_power_inputs_factor() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        // (t+1)^3 over F_3 = t^3 + 1
        let facs = factor(&[1, 0, 0, 1], 3, &mut rng);
        assert_eq!(facs, vec![(vec![1, 1], 3)]);
    }
}
