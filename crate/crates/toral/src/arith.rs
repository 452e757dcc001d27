//! Scalar number theory over machine words: modular arithmetic, deterministic
//! primality, factorisation, totient, Möbius, CRT and p-adic valuations.
//!
//! Everything here is exact. Moduli are `u64`; products go through `u128` so
//! no intermediate can overflow.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// `a * b mod n` without overflow.
#[inline]
pub fn mul_mod(a: u64, b: u64, n: u64) -> u64 {
    debug_assert!(n >= 1);
    ((a as u128 * b as u128) % n as u128) as u64
}

/// `a + b mod n` without overflow.
#[inline]
pub fn add_mod(a: u64, b: u64, n: u64) -> u64 {
    ((a as u128 + b as u128) % n as u128) as u64
}

/// `a - b mod n`, canonical residue.
#[inline]
pub fn sub_mod(a: u64, b: u64, n: u64) -> u64 {
    let (a, b) = (a % n, b % n);
    if a >= b {
        a - b
    } else {
        a + (n - b)
    }
}

/// `a^e mod n` by binary exponentiation.
pub fn pow_mod(a: u64, mut e: u128, n: u64) -> u64 {
    if n == 1 {
        return 0;
    }
    let mut base = a % n;
    let mut acc = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, base, n);
        }
        base = mul_mod(base, base, n);
        e >>= 1;
    }
    acc
}

pub fn gcd(a: u64, b: u64) -> u64 {
    num_integer::gcd(a, b)
}

/// Extended gcd over `i128`: returns `(g, x, y)` with `a*x + b*y = g >= 0`.
pub fn xgcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        if a < 0 {
            (-a, -1, 0)
        } else {
            (a, 1, 0)
        }
    } else {
        let (g, x, y) = xgcd(b, a.rem_euclid(b));
        (g, y, x - (a.div_euclid(b)) * y)
    }
}

/// Multiplicative inverse of `a` mod `n`, if `gcd(a, n) = 1`.
pub fn inv_mod(a: u64, n: u64) -> Option<u64> {
    if n == 1 {
        return Some(0);
    }
    let (g, x, _) = xgcd((a % n) as i128, n as i128);
    if g != 1 {
        return None;
    }
    Some(x.rem_euclid(n as i128) as u64)
}

/// Canonical residue of a (possibly huge) signed value.
#[inline]
pub fn reduce_i128(x: i128, n: u64) -> u64 {
    x.rem_euclid(n as i128) as u64
}

/// Deterministic Miller-Rabin for `u64`.
///
/// The base set {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37} is known to be
/// exact for all 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d as u128, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Brent-style Pollard rho; `n` must be odd composite and not a prime power
/// handled by trial division upstream.
fn pollard_rho(n: u64) -> u64 {
    if n.is_multiple_of(2) {
        return 2;
    }
    let mut c = 1u64;
    loop {
        let f = |x: u64| add_mod(mul_mod(x, x, n), c, n);
        let mut x = 2u64;
        let mut y = 2u64;
        let mut d = 1u64;
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = gcd(x.abs_diff(y), n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

/// Prime factorisation `n = prod p^e` as an ordered map.
pub fn factor(n: u64) -> BTreeMap<u64, u32> {
    let mut out = BTreeMap::new();
    let mut n = n;
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47] {
        while n.is_multiple_of(p) {
            *out.entry(p).or_insert(0) += 1;
            n /= p;
        }
    }
    let mut stack = vec![n];
    while let Some(m) = stack.pop() {
        if m == 1 {
            continue;
        }
        if is_prime(m) {
            *out.entry(m).or_insert(0) += 1;
            continue;
        }
        let d = pollard_rho(m);
        stack.push(d);
        stack.push(m / d);
    }
    out
}

/// Euler's totient.
pub fn euler_phi(n: u64) -> u64 {
    factor(n)
        .into_iter()
        .fold(1u64, |acc, (p, e)| acc * (p - 1) * p.pow(e - 1))
}

/// Möbius function.
pub fn moebius(n: u64) -> i64 {
    let f = factor(n);
    if f.values().any(|&e| e > 1) {
        0
    } else if f.len().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// All divisors of `n`, ascending.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut ds = vec![1u64];
    for (p, e) in factor(n) {
        let prev = ds.clone();
        let mut pk = 1u64;
        for _ in 0..e {
            pk *= p;
            ds.extend(prev.iter().map(|d| d * pk));
        }
    }
    ds.sort_unstable();
    ds
}

/// Splits `n >= 1` into its prime-power components `p^r || n`, ascending in `p`.
/// For `n = 1` the list is empty.
pub fn crt_split(n: u64) -> Vec<u64> {
    factor(n).into_iter().map(|(p, e)| p.pow(e)).collect()
}

/// Recombines residues `x_i mod m_i` (pairwise coprime moduli) into the
/// residue mod `prod m_i`.
pub fn crt_combine(parts: &[(u64, u64)]) -> Result<u64> {
    let mut x = 0u64;
    let mut m = 1u64;
    for &(r, q) in parts {
        if q == 0 {
            return Err(Error::Precondition("zero modulus in CRT".into()));
        }
        let g = gcd(m, q);
        if g != 1 {
            return Err(Error::Precondition(format!(
                "CRT moduli not coprime: gcd({m}, {q}) = {g}"
            )));
        }
        let mq = m
            .checked_mul(q)
            .ok_or(Error::Overflow("CRT modulus product"))?;
        // x' = x mod m, x' = r mod q
        let inv = inv_mod(m % q, q).expect("coprime by check above");
        let t = mul_mod(sub_mod(r % q, x % q, q), inv, q);
        x = (x as u128 + (t as u128) * (m as u128)) as u64 % mq;
        m = mq;
    }
    Ok(x)
}

/// p-adic valuation; `Infinite` encodes v_p(0).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Valuation {
    Finite(u32),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<u32> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }
}

pub fn p_adic_valuation(x: i64, p: u64) -> Valuation {
    assert!(p >= 2, "valuation needs p >= 2");
    if x == 0 {
        return Valuation::Infinite;
    }
    let mut v = 0u32;
    let mut x = (x as i128).unsigned_abs();
    let p = p as u128;
    while x.is_multiple_of(p) {
        x /= p;
        v += 1;
    }
    Valuation::Finite(v)
}

/// Multiplicative order of `a` mod `n`; requires `gcd(a, n) = 1`.
pub fn mult_order(a: u64, n: u64) -> Result<u64> {
    if n == 1 {
        return Ok(1);
    }
    let a = a % n;
    if gcd(a, n) != 1 {
        return Err(Error::NotAUnit {
            value: a,
            n,
            g: gcd(a, n),
        });
    }
    // The order divides phi(n); strip primes greedily.
    let mut o = euler_phi(n);
    for (q, _) in factor(o) {
        while o.is_multiple_of(q) && pow_mod(a, (o / q) as u128, n) == 1 {
            o /= q;
        }
    }
    Ok(o)
}

/// Legendre symbol (a/p) for an odd prime p.
pub fn legendre(a: i64, p: u64) -> i64 {
    debug_assert!(p >= 3 && is_prime(p));
    let a = reduce_i128(a as i128, p);
    if a == 0 {
        return 0;
    }
    if pow_mod(a, ((p - 1) / 2) as u128, p) == 1 {
        1
    } else {
        -1
    }
}

/// Square root of `a` mod an odd prime `p` (Tonelli-Shanks), if one exists.
pub fn sqrt_mod_p(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if p == 2 {
        return Some(a);
    }
    if a == 0 {
        return Some(0);
    }
    if legendre(a as i64, p) != 1 {
        return None;
    }
    if p % 4 == 3 {
        return Some(pow_mod(a, ((p + 1) / 4) as u128, p));
    }
    // Write p - 1 = q * 2^s with q odd.
    let mut q = p - 1;
    let mut s = 0u32;
    while q.is_multiple_of(2) {
        q /= 2;
        s += 1;
    }
    let z = (2..p).find(|&z| legendre(z as i64, p) == -1)?;
    let mut m = s;
    let mut c = pow_mod(z, q as u128, p);
    let mut t = pow_mod(a, q as u128, p);
    let mut r = pow_mod(a, q.div_ceil(2) as u128, p);
    while t != 1 {
        let mut i = 0u32;
        let mut tt = t;
        while tt != 1 {
            tt = mul_mod(tt, tt, p);
            i += 1;
        }
        let b = pow_mod(c, 1u128 << (m - i - 1), p);
        m = i;
        c = mul_mod(b, b, p);
        t = mul_mod(t, c, p);
        r = mul_mod(r, b, p);
    }
    Some(r)
}

/// lcm over u128 with overflow detection.
pub fn lcm_u128(a: u128, b: u128) -> Result<u128> {
    if a == 0 || b == 0 {
        return Ok(0);
    }
    let g = num_integer::gcd(a, b);
    (a / g).checked_mul(b).ok_or(Error::Overflow("lcm"))
}
