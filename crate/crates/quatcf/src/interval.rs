//! Closed intervals with rational endpoints.
//!
//! Addition, subtraction and multiplication of rational intervals are exact;
//! only square roots need genuine enclosure, done with integer square roots
//! at a dyadic precision chosen from the requested width. Every operation
//! returns an interval containing the exact real result.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatInterval {
    lo: BigRational,
    hi: BigRational,
}

impl RatInterval {
    pub fn new(lo: BigRational, hi: BigRational) -> Self {
        assert!(lo <= hi, "interval endpoints out of order");
        RatInterval { lo, hi }
    }

    pub fn point(v: BigRational) -> Self {
        RatInterval { lo: v.clone(), hi: v }
    }

    pub fn lo(&self) -> &BigRational {
        &self.lo
    }

    pub fn hi(&self) -> &BigRational {
        &self.hi
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, v: &BigRational) -> bool {
        &self.lo <= v && v <= &self.hi
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn add(&self, other: &RatInterval) -> RatInterval {
        RatInterval::new(&self.lo + &other.lo, &self.hi + &other.hi)
    }

    pub fn sub(&self, other: &RatInterval) -> RatInterval {
        RatInterval::new(&self.lo - &other.hi, &self.hi - &other.lo)
    }

    pub fn mul(&self, other: &RatInterval) -> RatInterval {
        let products = [
            &self.lo * &other.lo,
            &self.lo * &other.hi,
            &self.hi * &other.lo,
            &self.hi * &other.hi,
        ];
        let lo = products.iter().min().unwrap().clone();
        let hi = products.iter().max().unwrap().clone();
        RatInterval::new(lo, hi)
    }

    pub fn neg(&self) -> RatInterval {
        RatInterval::new(-&self.hi, -&self.lo)
    }

    pub fn scale(&self, c: &BigRational) -> RatInterval {
        if c.is_negative() {
            RatInterval::new(c * &self.hi, c * &self.lo)
        } else {
            RatInterval::new(c * &self.lo, c * &self.hi)
        }
    }

    /// Pointwise maximum: encloses `max(x, y)` for x, y in the operands.
    pub fn max_with(&self, other: &RatInterval) -> RatInterval {
        RatInterval::new(
            self.lo.clone().max(other.lo.clone()),
            self.hi.clone().max(other.hi.clone()),
        )
    }

    /// Intersects with `[0, inf)`; valid when the enclosed quantity is known
    /// to be nonnegative.
    pub fn clamp_nonnegative(&self) -> RatInterval {
        let zero = BigRational::zero();
        RatInterval::new(self.lo.clone().max(zero.clone()), self.hi.clone().max(zero))
    }

    /// Encloses the square root to width at most `eps`. The input must not
    /// extend below zero. Endpoints that are exact rational squares map to
    /// their exact roots.
    pub fn sqrt(&self, eps: &BigRational) -> Result<RatInterval> {
        if self.lo.is_negative() {
            return Err(Error::NegativeInput);
        }
        let lo = sqrt_lower(&self.lo, eps);
        let hi = sqrt_upper(&self.hi, eps);
        Ok(RatInterval::new(lo, hi))
    }

    /// `[lo, hi]` as exact strings.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!([self.lo.to_string(), self.hi.to_string()])
    }
}

impl fmt::Display for RatInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// The exact root when `r` is a square of a rational.
pub fn exact_sqrt(r: &BigRational) -> Option<BigRational> {
    if r.is_negative() {
        return None;
    }
    let ns = r.numer().sqrt();
    let ds = r.denom().sqrt();
    if &(&ns * &ns) == r.numer() && &(&ds * &ds) == r.denom() {
        Some(BigRational::new(ns, ds))
    } else {
        None
    }
}

/// Dyadic precision (bit count) for a requested width.
fn bits_for(eps: &BigRational) -> u64 {
    assert!(eps.is_positive(), "eps must be positive");
    let inv = eps.recip();
    // Smallest k with 2^k >= 1/eps.
    let n = inv.ceil().to_integer();
    n.bits()
}

/// A rational lower bound on sqrt(r) within `eps`.
pub fn sqrt_lower(r: &BigRational, eps: &BigRational) -> BigRational {
    if let Some(s) = exact_sqrt(r) {
        return s;
    }
    let k = bits_for(eps);
    let scale = BigInt::one() << k;
    let scaled = (r * BigRational::from_integer(&scale * &scale)).floor().to_integer();
    BigRational::new(scaled.sqrt(), scale)
}

/// A rational upper bound on sqrt(r) within `eps`.
pub fn sqrt_upper(r: &BigRational, eps: &BigRational) -> BigRational {
    if let Some(s) = exact_sqrt(r) {
        return s;
    }
    let k = bits_for(eps);
    let scale = BigInt::one() << k;
    let scaled = (r * BigRational::from_integer(&scale * &scale)).floor().to_integer();
    BigRational::new(scaled.sqrt() + BigInt::one(), scale)
}

/// Encloses sqrt(n) for a nonnegative integer to width at most `eps`.
pub fn sqrt_int_interval(n: u64, eps: &BigRational) -> RatInterval {
    let r = BigRational::from_integer(BigInt::from(n));
    RatInterval::new(sqrt_lower(&r, eps), sqrt_upper(&r, eps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{rat, ratio};
    use proptest::prelude::*;

    fn tiny() -> BigRational {
        ratio(1, 1_000_000_000)
    }

    #[test]
    fn exact_square_roots() {
        assert_eq!(exact_sqrt(&ratio(25, 4)), Some(ratio(5, 2)));
        assert_eq!(exact_sqrt(&rat(0)), Some(rat(0)));
        assert_eq!(exact_sqrt(&rat(2)), None);
        assert_eq!(exact_sqrt(&rat(-4)), None);
        let i = RatInterval::point(ratio(9, 16)).sqrt(&tiny()).unwrap();
        assert!(i.is_point());
        assert_eq!(i.lo(), &ratio(3, 4));
    }

    #[test]
    fn sqrt_two_enclosure() {
        let eps = ratio(1, 1 << 30);
        let i = RatInterval::point(rat(2)).sqrt(&eps).unwrap();
        assert!(i.width() <= eps);
        // 1.41421356... lies inside.
        assert!(i.lo() < &ratio(141421357, 100000000));
        assert!(i.hi() > &ratio(141421356, 100000000));
        assert!(i.lo() * i.lo() <= rat(2));
        assert!(i.hi() * i.hi() >= rat(2));
    }

    #[test]
    fn negative_sqrt_rejected() {
        let i = RatInterval::new(rat(-1), rat(1));
        assert!(matches!(i.sqrt(&tiny()), Err(Error::NegativeInput)));
    }

    #[test]
    fn arithmetic_is_exact() {
        let a = RatInterval::new(ratio(1, 3), ratio(1, 2));
        let b = RatInterval::new(rat(-2), rat(5));
        let sum = a.add(&b);
        assert_eq!(sum.lo(), &ratio(-5, 3));
        assert_eq!(sum.hi(), &ratio(11, 2));
        let prod = a.mul(&b);
        assert_eq!(prod.lo(), &rat(-1));
        assert_eq!(prod.hi(), &ratio(5, 2));
        let neg = a.neg();
        assert_eq!(neg.hi(), &ratio(-1, 3));
    }

    proptest! {
        #[test]
        fn sqrt_of_square_contains_original(n in 0i64..100_000, d in 1i64..10_000) {
            let r = ratio(n, d);
            let sq = &r * &r;
            let enclosure = RatInterval::point(sq).sqrt(&tiny()).unwrap();
            prop_assert!(enclosure.contains(&r));
            // Exact squares come back as points.
            prop_assert!(enclosure.is_point());
        }

        #[test]
        fn sqrt_interval_is_sound(n in 0i64..100_000, d in 1i64..10_000, kbits in 4u32..40) {
            let r = ratio(n, d);
            let eps = BigRational::new(num_bigint::BigInt::one(), num_bigint::BigInt::one() << kbits);
            let i = RatInterval::point(r.clone()).sqrt(&eps).unwrap();
            prop_assert!(i.width() <= eps);
            prop_assert!(i.lo() * i.lo() <= r);
            prop_assert!(i.hi() * i.hi() >= r);
            prop_assert!(!i.lo().is_negative());
        }

        #[test]
        fn interval_product_contains_products(
            a in -50i64..50, b in -50i64..50, c in -50i64..50, d in -50i64..50,
        ) {
            let (alo, ahi) = (a.min(b), a.max(b));
            let (clo, chi) = (c.min(d), c.max(d));
            let x = RatInterval::new(rat(alo), rat(ahi));
            let y = RatInterval::new(rat(clo), rat(chi));
            let prod = x.mul(&y);
            for u in [alo, ahi] {
                for v in [clo, chi] {
                    prop_assert!(prod.contains(&rat(u * v)));
                }
            }
        }
    }
}
