//! Small number-theoretic helpers shared across the crate: exact rational
//! parsing, p-adic valuations of rationals, centered residues, Legendre
//! symbols and trial-division factorization.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Parses a rational from the wire format `"n"` or `"n/d"` (base 10,
/// optional leading minus). The result is reduced with positive denominator.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let mk_err = || Error::Parse(format!("invalid rational: {s:?}"));
    let (num_s, den_s) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let num: BigInt = num_s.trim().parse().map_err(|_| mk_err())?;
    let den: BigInt = den_s.trim().parse().map_err(|_| mk_err())?;
    if den.is_zero() {
        return Err(Error::Parse(format!("zero denominator: {s:?}")));
    }
    Ok(BigRational::new(num, den))
}

pub fn big(n: i64) -> BigInt {
    BigInt::from(n)
}

pub fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// The exact p-adic valuation of a nonzero integer.
pub fn valuation_int(n: &BigInt, p: u64) -> i64 {
    assert!(!n.is_zero(), "valuation of zero is infinite");
    let p = BigInt::from(p);
    let mut n = n.clone();
    let mut v = 0i64;
    loop {
        let (q, r) = num_integer::Integer::div_rem(&n, &p);
        if r.is_zero() {
            v += 1;
            n = q;
        } else {
            return v;
        }
    }
}

/// The exact p-adic valuation of a nonzero rational.
pub fn valuation_rat(x: &BigRational, p: u64) -> i64 {
    valuation_int(x.numer(), p) - valuation_int(x.denom(), p)
}

/// True iff `n` is `p^k` for some k >= 0.
pub fn is_power_of(n: &BigInt, p: u64) -> bool {
    if n.is_zero() || n.is_negative() {
        return false;
    }
    let p = BigInt::from(p);
    let mut n = n.clone();
    while !n.is_one() {
        let (q, r) = num_integer::Integer::div_rem(&n, &p);
        if !r.is_zero() {
            return false;
        }
        n = q;
    }
    true
}

/// Residue of a rational with p-free denominator, as an integer in `0..p`.
pub fn residue_mod_p(x: &BigRational, p: u64) -> Result<u64> {
    let pb = BigInt::from(p);
    let num = x.numer().mod_floor_u(&pb);
    let den = x.denom().mod_floor_u(&pb);
    if den.is_zero() {
        return Err(Error::Internal(format!(
            "residue of {x} mod {p}: denominator is divisible by {p}"
        )));
    }
    let den_inv = inverse_mod(&den, &pb)
        .ok_or_else(|| Error::Internal(format!("no inverse of {den} mod {p}")))?;
    let r = (num * den_inv).mod_floor_u(&pb);
    Ok(u64::try_from(r).expect("residue fits in u64"))
}

/// Residue mapped to the centered range `-(p-1)/2 ..= (p-1)/2` (p odd).
pub fn centered_residue(x: &BigRational, p: u64) -> Result<i64> {
    let r = residue_mod_p(x, p)?;
    let half = (p - 1) / 2;
    Ok(if r <= half { r as i64 } else { r as i64 - p as i64 })
}

trait ModFloorU {
    fn mod_floor_u(&self, m: &BigInt) -> BigInt;
}

impl ModFloorU for BigInt {
    fn mod_floor_u(&self, m: &BigInt) -> BigInt {
        num_integer::Integer::mod_floor(self, m)
    }
}

/// Modular inverse via extended Euclid; `None` when gcd != 1.
pub fn inverse_mod(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = num_integer::Integer::extended_gcd(a, m);
    if e.gcd.is_one() {
        Some(num_integer::Integer::mod_floor(&e.x, m))
    } else {
        None
    }
}

/// Deterministic primality by trial division; inputs here are small.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Prime factors (without multiplicity) of a nonzero integer.
pub fn prime_factors(n: &BigInt) -> Vec<u64> {
    let mut n = n.abs();
    let mut out = Vec::new();
    let mut push = |p: u64, n: &mut BigInt| {
        let pb = BigInt::from(p);
        let mut hit = false;
        loop {
            let (q, r) = num_integer::Integer::div_rem(&*n, &pb);
            if r.is_zero() {
                hit = true;
                *n = q;
            } else {
                break;
            }
        }
        if hit {
            out.push(p);
        }
    };
    push(2, &mut n);
    let mut d = 3u64;
    while BigInt::from(d) * BigInt::from(d) <= n {
        push(d, &mut n);
        d += 2;
    }
    if n > BigInt::one() {
        let last = u64::try_from(&n).expect("prime factor exceeds u64; inputs expected small");
        out.push(last);
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Legendre symbol (a|p) for an odd prime p; 0 when p | a.
pub fn legendre(a: &BigInt, p: u64) -> i32 {
    debug_assert!(p % 2 == 1 && is_prime(p));
    let pb = BigInt::from(p);
    let a = num_integer::Integer::mod_floor(a, &pb);
    if a.is_zero() {
        return 0;
    }
    // Euler criterion: a^((p-1)/2) mod p.
    let e = (&pb - BigInt::one()) / BigInt::from(2);
    let r = a.modpow(&e, &pb);
    if r.is_one() {
        1
    } else {
        -1
    }
}
