//! Exact arithmetic in a rational quaternion algebra `B = (a, b / Q)`.
//!
//! Elements are stored over the standard basis `{1, i, j, ij}` with
//! `i^2 = a`, `j^2 = b`, `ij = -ji`. Coordinates are arbitrary-precision
//! rationals in lowest terms with positive denominator, so structural
//! equality and hashing agree with mathematical equality.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::arith::{self, parse_rational};
use crate::error::{Error, Result};
use crate::orders::{hilbert_symbol, Place};

/// An element of `B`, as coordinates over `{1, i, j, ij}`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Quat {
    coords: [BigRational; 4],
}

impl Quat {
    pub fn new(c0: BigRational, c1: BigRational, c2: BigRational, c3: BigRational) -> Self {
        Quat { coords: [c0, c1, c2, c3] }
    }

    pub fn from_coords(coords: [BigRational; 4]) -> Self {
        Quat { coords }
    }

    pub fn zero() -> Self {
        Quat::scalar(BigRational::zero())
    }

    pub fn one() -> Self {
        Quat::scalar(BigRational::one())
    }

    pub fn scalar(c: BigRational) -> Self {
        Quat::new(c, BigRational::zero(), BigRational::zero(), BigRational::zero())
    }

    pub fn basis_i() -> Self {
        Quat::new(arith::rat(0), arith::rat(1), arith::rat(0), arith::rat(0))
    }

    pub fn basis_j() -> Self {
        Quat::new(arith::rat(0), arith::rat(0), arith::rat(1), arith::rat(0))
    }

    pub fn basis_ij() -> Self {
        Quat::new(arith::rat(0), arith::rat(0), arith::rat(0), arith::rat(1))
    }

    pub fn coords(&self) -> &[BigRational; 4] {
        &self.coords
    }

    pub fn coord(&self, k: usize) -> &BigRational {
        &self.coords[k]
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    /// True iff the pure part (i, j, ij coordinates) vanishes.
    pub fn is_scalar(&self) -> bool {
        self.coords[1..].iter().all(|c| c.is_zero())
    }

    pub fn conj(&self) -> Quat {
        Quat::new(
            self.coords[0].clone(),
            -&self.coords[1],
            -&self.coords[2],
            -&self.coords[3],
        )
    }

    /// Reduced trace `x + conj(x) = 2 x0`, a scalar.
    pub fn trd(&self) -> BigRational {
        &self.coords[0] + &self.coords[0]
    }

    /// The component with zero scalar part.
    pub fn pure_part(&self) -> Quat {
        Quat::new(
            BigRational::zero(),
            self.coords[1].clone(),
            self.coords[2].clone(),
            self.coords[3].clone(),
        )
    }

    pub fn scale(&self, c: &BigRational) -> Quat {
        Quat::new(
            c * &self.coords[0],
            c * &self.coords[1],
            c * &self.coords[2],
            c * &self.coords[3],
        )
    }

    /// Largest bit length among all coordinate numerators and denominators.
    pub fn coeff_bits(&self) -> u64 {
        self.coords
            .iter()
            .flat_map(|c| [c.numer().bits(), c.denom().bits()])
            .max()
            .unwrap_or(0)
    }
}

impl Add for &Quat {
    type Output = Quat;
    fn add(self, rhs: &Quat) -> Quat {
        Quat::new(
            &self.coords[0] + &rhs.coords[0],
            &self.coords[1] + &rhs.coords[1],
            &self.coords[2] + &rhs.coords[2],
            &self.coords[3] + &rhs.coords[3],
        )
    }
}

impl Sub for &Quat {
    type Output = Quat;
    fn sub(self, rhs: &Quat) -> Quat {
        Quat::new(
            &self.coords[0] - &rhs.coords[0],
            &self.coords[1] - &rhs.coords[1],
            &self.coords[2] - &rhs.coords[2],
            &self.coords[3] - &rhs.coords[3],
        )
    }
}

impl Neg for &Quat {
    type Output = Quat;
    fn neg(self) -> Quat {
        Quat::new(
            -&self.coords[0],
            -&self.coords[1],
            -&self.coords[2],
            -&self.coords[3],
        )
    }
}

impl fmt::Display for Quat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{}",
            self.coords[0], self.coords[1], self.coords[2], self.coords[3]
        )
    }
}

impl fmt::Debug for Quat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Quat({self})")
    }
}

impl FromStr for Quat {
    type Err = Error;

    /// Parses the wire format `"x0,x1,x2,x3"` with each part `"n"` or `"n/d"`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').collect();
        if parts.len() != 4 {
            return Err(Error::Parse(format!(
                "expected 4 comma-separated rationals, got {}",
                parts.len()
            )));
        }
        Ok(Quat::new(
            parse_rational(parts[0])?,
            parse_rational(parts[1])?,
            parse_rational(parts[2])?,
            parse_rational(parts[3])?,
        ))
    }
}

/// The pair `(a, b)` defining `B = (a, b / Q)`, with its ramification data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Algebra {
    a: BigRational,
    b: BigRational,
    ramified: BTreeSet<u64>,
    ramified_at_infinity: bool,
    discriminant: BigInt,
}

impl Algebra {
    /// Builds the algebra and computes its ramified places. Only places
    /// dividing `2 * num(a) den(a) num(b) den(b)` (and infinity) can ramify.
    pub fn new(a: BigRational, b: BigRational) -> Result<Algebra> {
        if a.is_zero() || b.is_zero() {
            return Err(Error::BadParameters("a and b must be nonzero".into()));
        }
        let mut candidates: BTreeSet<u64> = BTreeSet::new();
        candidates.insert(2);
        for n in [a.numer(), a.denom(), b.numer(), b.denom()] {
            candidates.extend(arith::prime_factors(n));
        }
        let mut ramified = BTreeSet::new();
        for &p in &candidates {
            if hilbert_symbol(&a, &b, Place::Finite(p)) == -1 {
                ramified.insert(p);
            }
        }
        let ramified_at_infinity = hilbert_symbol(&a, &b, Place::Infinity) == -1;
        let mut discriminant = BigInt::one();
        for &p in &ramified {
            discriminant *= BigInt::from(p);
        }
        Ok(Algebra { a, b, ramified, ramified_at_infinity, discriminant })
    }

    pub fn from_ints(a: i64, b: i64) -> Result<Algebra> {
        Algebra::new(arith::rat(a), arith::rat(b))
    }

    pub fn a(&self) -> &BigRational {
        &self.a
    }

    pub fn b(&self) -> &BigRational {
        &self.b
    }

    pub fn ramified_primes(&self) -> &BTreeSet<u64> {
        &self.ramified
    }

    pub fn is_ramified_at(&self, p: u64) -> bool {
        self.ramified.contains(&p)
    }

    pub fn is_ramified_at_infinity(&self) -> bool {
        self.ramified_at_infinity
    }

    /// Product of the finite ramified primes.
    pub fn discriminant(&self) -> &BigInt {
        &self.discriminant
    }

    /// A quaternion algebra over Q is a division algebra iff it ramifies
    /// somewhere.
    pub fn is_division(&self) -> bool {
        !self.ramified.is_empty() || self.ramified_at_infinity
    }

    /// Quaternion product with `i^2 = a`, `j^2 = b`, `ij = -ji`.
    pub fn mul(&self, x: &Quat, y: &Quat) -> Quat {
        let (a, b) = (&self.a, &self.b);
        let ab = a * b;
        let (x0, x1, x2, x3) = (&x.coords[0], &x.coords[1], &x.coords[2], &x.coords[3]);
        let (y0, y1, y2, y3) = (&y.coords[0], &y.coords[1], &y.coords[2], &y.coords[3]);
        let c0 = x0 * y0 + a * (x1 * y1) + b * (x2 * y2) - &ab * (x3 * y3);
        let c1 = x0 * y1 + x1 * y0 - b * (x2 * y3) + b * (x3 * y2);
        let c2 = x0 * y2 + x2 * y0 + a * (x1 * y3) - a * (x3 * y1);
        let c3 = x0 * y3 + x3 * y0 + x1 * y2 - x2 * y1;
        Quat::new(c0, c1, c2, c3)
    }

    /// Reduced norm `x conj(x) = x0^2 - a x1^2 - b x2^2 + ab x3^2`, a scalar.
    pub fn nrd(&self, x: &Quat) -> BigRational {
        let (x0, x1, x2, x3) = (&x.coords[0], &x.coords[1], &x.coords[2], &x.coords[3]);
        x0 * x0 - &self.a * (x1 * x1) - &self.b * (x2 * x2) + &self.a * &self.b * (x3 * x3)
    }

    /// Conjugate, reduced trace and reduced norm in one call.
    pub fn reduced_invariants(&self, x: &Quat) -> (Quat, BigRational, BigRational) {
        (x.conj(), x.trd(), self.nrd(x))
    }

    /// `x^{-1} = conj(x) / nrd(x)`.
    pub fn inv(&self, x: &Quat) -> Result<Quat> {
        let n = self.nrd(x);
        if n.is_zero() {
            return Err(Error::ZeroDivisor);
        }
        Ok(x.conj().scale(&n.recip()))
    }

    /// Monic minimal polynomial over Q: `X - x0` for scalars, otherwise
    /// `X^2 - trd(x) X + nrd(x)`.
    pub fn min_poly(&self, x: &Quat) -> MinPoly {
        if x.is_scalar() {
            MinPoly::Linear { root: x.coords[0].clone() }
        } else {
            MinPoly::Quadratic { linear: -x.trd(), constant: self.nrd(x) }
        }
    }

    /// True iff every minimal-polynomial coefficient lies in `Z[1/p]`.
    pub fn is_p_integral(&self, x: &Quat, p: u64) -> bool {
        self.min_poly(x)
            .coefficients()
            .iter()
            .all(|c| arith::is_power_of(c.denom(), p))
    }

    /// True iff the minimal polynomial has integer coefficients.
    pub fn is_integral(&self, x: &Quat) -> bool {
        self.min_poly(x).is_integral()
    }

    /// `x^n` for n >= 0 by repeated squaring.
    pub fn pow(&self, x: &Quat, n: u32) -> Quat {
        let mut acc = Quat::one();
        let mut base = x.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            n >>= 1;
        }
        acc
    }
}

/// Monic minimal polynomial of degree 1 or 2.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MinPoly {
    /// `X - root`
    Linear { root: BigRational },
    /// `X^2 + linear X + constant`
    Quadratic { linear: BigRational, constant: BigRational },
}

impl MinPoly {
    /// Non-leading coefficients, constant term last.
    pub fn coefficients(&self) -> Vec<BigRational> {
        match self {
            MinPoly::Linear { root } => vec![-root],
            MinPoly::Quadratic { linear, constant } => vec![linear.clone(), constant.clone()],
        }
    }

    pub fn is_integral(&self) -> bool {
        self.coefficients().iter().all(|c| c.is_integer())
    }

    /// Evaluates the polynomial at a quaternion argument.
    pub fn eval(&self, alg: &Algebra, x: &Quat) -> Quat {
        match self {
            MinPoly::Linear { root } => &x.clone() - &Quat::scalar(root.clone()),
            MinPoly::Quadratic { linear, constant } => {
                let x2 = alg.mul(x, x);
                &(&x2 + &x.scale(linear)) + &Quat::scalar(constant.clone())
            }
        }
    }
}
