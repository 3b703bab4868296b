//! The ramified valuation `w_p`, digit expansion along the uniformizer, and
//! floor functions.
//!
//! At a ramified prime p the reduced norm gives a discrete valuation
//! `w_p(x) = v_p(nrd(x)) / 2` with values in half-integers, and
//! `|x|_p = p^{-w_p(x)}`. For the discriminant-`pq` algebras built by
//! [`crate::orders::maximal_order_pq`] the generator `j` has `nrd(j) = -p`,
//! so it is a uniformizer, and every element of `B_p` has a unique digit
//! expansion `x = sum c_l j^l` with digits `c = c0 + c1 i` drawn from the
//! centered residues modulo p. Truncating at level 0 yields the floor.

use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;

use crate::arith;
use crate::error::{Error, Result};
use crate::orders::{maximal_order_pq, Order};
use crate::quat::{Algebra, Quat};

/// A half-integer valuation value, or infinity (the valuation of 0).
///
/// Stored as twice the value so that arithmetic is integral.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn from_twice(twice: i64) -> Self {
        Valuation::Finite(twice)
    }

    /// Twice the valuation; `None` for infinity.
    pub fn twice(&self) -> Option<i64> {
        match self {
            Valuation::Finite(t) => Some(*t),
            Valuation::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Valuation::Infinite)
    }

    pub fn add(&self, other: &Valuation) -> Valuation {
        match (self, other) {
            (Valuation::Finite(a), Valuation::Finite(b)) => Valuation::Finite(a + b),
            _ => Valuation::Infinite,
        }
    }

    pub fn neg(&self) -> Valuation {
        match self {
            Valuation::Finite(a) => Valuation::Finite(-a),
            Valuation::Infinite => Valuation::Infinite,
        }
    }

    /// `|x|_p < 1`, i.e. the valuation is strictly positive.
    pub fn in_open_unit_ball(&self) -> bool {
        match self {
            Valuation::Finite(t) => *t > 0,
            Valuation::Infinite => true,
        }
    }

    /// `|x|_p > 1`, i.e. the valuation is strictly negative.
    pub fn abs_exceeds_one(&self) -> bool {
        matches!(self, Valuation::Finite(t) if *t < 0)
    }
}

impl PartialOrd for Valuation {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Valuation {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        match (self, other) {
            (Valuation::Finite(a), Valuation::Finite(b)) => a.cmp(b),
            (Valuation::Finite(_), Valuation::Infinite) => std::cmp::Ordering::Less,
            (Valuation::Infinite, Valuation::Finite(_)) => std::cmp::Ordering::Greater,
            (Valuation::Infinite, Valuation::Infinite) => std::cmp::Ordering::Equal,
        }
    }
}

impl fmt::Display for Valuation {
    /// Serialized as `"k/2"` with k twice the value, or `"inf"`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(t) => write!(f, "{t}/2"),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

impl FromStr for Valuation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "inf" {
            return Ok(Valuation::Infinite);
        }
        let (num, den) = s
            .split_once('/')
            .ok_or_else(|| Error::Parse(format!("invalid valuation: {s:?}")))?;
        if den != "2" {
            return Err(Error::Parse(format!("invalid valuation denominator: {s:?}")));
        }
        let t: i64 = num
            .parse()
            .map_err(|_| Error::Parse(format!("invalid valuation: {s:?}")))?;
        Ok(Valuation::Finite(t))
    }
}

/// `w_p(x) = v_p(nrd(x)) / 2`, defined where the algebra ramifies.
pub fn wp(x: &Quat, p: u64, alg: &Algebra) -> Result<Valuation> {
    if !alg.is_ramified_at(p) {
        return Err(Error::NotRamified(p));
    }
    if x.is_zero() {
        return Ok(Valuation::Infinite);
    }
    Ok(Valuation::Finite(arith::valuation_rat(&alg.nrd(x), p)))
}

/// A special expansion scheme: the maximal order of a discriminant-`pq`
/// algebra, the uniformizer `j`, and the centered digit set
/// `{c0 + c1 i : |c0|, |c1| <= (p-1)/2}` of size p^2.
#[derive(Clone, Debug)]
pub struct SpecialType {
    alg: Algebra,
    order: Order,
    p: u64,
    q: u64,
    uniformizer: Quat,
}

impl SpecialType {
    pub fn new(p: u64, q: u64) -> Result<SpecialType> {
        let (alg, order) = maximal_order_pq(p, q)?;
        let uniformizer = Quat::basis_j();
        let nrd = alg.nrd(&uniformizer);
        debug_assert_eq!(arith::valuation_rat(&nrd, p), 1);
        Ok(SpecialType { alg, order, p, q, uniformizer })
    }

    pub fn algebra(&self) -> &Algebra {
        &self.alg
    }

    pub fn order(&self) -> &Order {
        &self.order
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn uniformizer(&self) -> &Quat {
        &self.uniformizer
    }

    pub fn wp(&self, x: &Quat) -> Valuation {
        wp(x, self.p, &self.alg).expect("type prime is ramified")
    }

    /// The p^2 digit representatives, materialized. Contains 0 and is a
    /// complete set of representatives modulo `j R_p`, pairwise incongruent.
    pub fn digit_set(&self) -> Vec<Quat> {
        let half = (self.p as i64 - 1) / 2;
        let mut out = Vec::with_capacity((self.p * self.p) as usize);
        for c0 in -half..=half {
            for c1 in -half..=half {
                out.push(Quat::new(
                    arith::rat(c0),
                    arith::rat(c1),
                    arith::rat(0),
                    arith::rat(0),
                ));
            }
        }
        out
    }

    /// `j^l` for any integer l; `j^2 = p` keeps this exact.
    pub fn uniformizer_pow(&self, l: i64) -> Quat {
        let half_pow = BigRational::from_integer(arith::big(self.p as i64)).pow(
            i32::try_from(l.div_euclid(2)).expect("level fits in i32"),
        );
        if l.rem_euclid(2) == 0 {
            Quat::scalar(half_pow)
        } else {
            Quat::basis_j().scale(&half_pow)
        }
    }

    fn check_local_structure(&self) -> Result<()> {
        // The digit set represents the residue field of R_p only when i^2
        // is a non-residue unit modulo p.
        let q_mod = arith::big(self.q as i64);
        if self.q % self.p == 0 || arith::legendre(&q_mod, self.p) != -1 {
            return Err(Error::PreconditionViolated(format!(
                "i^2 = {} is not a non-residue unit modulo {}",
                self.q, self.p
            )));
        }
        Ok(())
    }

    /// Digit expansion `x = sum_{l >= r} c_l j^l` up to the given level.
    /// Returns the nonzero digits as `(level, digit)` pairs.
    ///
    /// The leading level is `r = v_p(nrd(x))`, twice the valuation of x.
    pub fn digit_expand(&self, x: &Quat, upto_level: i64) -> Result<Vec<(i64, Quat)>> {
        if x.is_zero() {
            return Err(Error::PreconditionViolated("digit expansion of zero".into()));
        }
        self.check_local_structure()?;
        let Valuation::Finite(r) = self.wp(x) else { unreachable!() };
        if r > upto_level {
            return Ok(Vec::new());
        }
        // Shift to a unit: y = x j^{-r} lies in R_p, so its coordinates
        // have p-free denominators throughout the loop.
        let mut y = self.alg.mul(x, &self.uniformizer_pow(-r));
        let mut digits = Vec::new();
        for level in r..=upto_level {
            let c0 = arith::centered_residue(y.coord(0), self.p)?;
            let c1 = arith::centered_residue(y.coord(1), self.p)?;
            let digit = Quat::new(arith::rat(c0), arith::rat(c1), arith::rat(0), arith::rat(0));
            if !digit.is_zero() {
                digits.push((level, digit.clone()));
            }
            // (y - c) has p-divisible 1- and i-coordinates; right division
            // by j rotates coordinates: (z0,z1,z2,z3) -> (z2,z3,z0/p,z1/p).
            let z = &y - &digit;
            let p_rat = arith::rat(self.p as i64);
            y = Quat::new(
                z.coord(2).clone(),
                z.coord(3).clone(),
                z.coord(0) / &p_rat,
                z.coord(1) / &p_rat,
            );
            if y.is_zero() {
                break;
            }
        }
        Ok(digits)
    }

    /// Floor of the special scheme: the digit sum over levels <= 0, or 0
    /// when the leading level is positive.
    pub fn floor(&self, x: &Quat) -> Quat {
        if x.is_zero() {
            return Quat::zero();
        }
        let digits = self
            .digit_expand(x, 0)
            .expect("digit expansion of a nonzero element");
        let mut acc = Quat::zero();
        for (level, c) in &digits {
            acc = &acc + &self.alg.mul(c, &self.uniformizer_pow(*level));
        }
        acc
    }
}

/// A floor function: either a special scheme, or a special scheme overridden
/// on the open unit balls of a prescribed quotient list.
#[derive(Clone, Debug)]
pub enum FloorFunction {
    Special(SpecialType),
    Override { quotients: Vec<Quat>, base: SpecialType },
}

impl FloorFunction {
    pub fn special(t: SpecialType) -> Self {
        FloorFunction::Special(t)
    }

    pub fn special_type(&self) -> &SpecialType {
        match self {
            FloorFunction::Special(t) => t,
            FloorFunction::Override { base, .. } => base,
        }
    }

    pub fn p(&self) -> u64 {
        self.special_type().p()
    }

    pub fn algebra(&self) -> &Algebra {
        self.special_type().algebra()
    }

    /// Short descriptor for reports.
    pub fn describe(&self) -> String {
        let t = self.special_type();
        match self {
            FloorFunction::Special(_) => format!("special(p={},q={})", t.p(), t.q()),
            FloorFunction::Override { quotients, .. } => format!(
                "override({} quotients over special(p={},q={}))",
                quotients.len(),
                t.p(),
                t.q()
            ),
        }
    }

    /// Applies the floor. Prescribed quotients win whenever `x` lies in
    /// their open unit ball; otherwise the special scheme decides.
    pub fn floor(&self, x: &Quat) -> Quat {
        if x.is_zero() {
            return Quat::zero();
        }
        match self {
            FloorFunction::Special(t) => t.floor(x),
            FloorFunction::Override { quotients, base } => {
                for a in quotients {
                    if base.wp(&(x - a)).in_open_unit_ball() {
                        return a.clone();
                    }
                }
                base.floor(x)
            }
        }
    }
}

/// Wraps a special scheme so that the expansion of the p-adic limit of
/// `[a_0, a_1, ...]` reproduces exactly those partial quotients.
///
/// Requires `|a_i|_p > 1` for i >= 1, membership of every quotient in
/// `R[1/p]`, and ball separation: quotients closer than distance 1 must be
/// equal.
pub fn make_override_floor(quotients: &[Quat], base: SpecialType) -> Result<FloorFunction> {
    for (idx, a) in quotients.iter().enumerate() {
        if idx >= 1 && !base.wp(a).abs_exceeds_one() {
            return Err(Error::NotAdmissible(format!(
                "quotient #{idx} ({a}) must have |a|_p > 1"
            )));
        }
        if !base.order().p_saturated_membership(a, base.p()) {
            return Err(Error::NotAdmissible(format!(
                "quotient #{idx} ({a}) is not integral away from p"
            )));
        }
    }
    for i in 0..quotients.len() {
        for j in i + 1..quotients.len() {
            let (ai, aj) = (&quotients[i], &quotients[j]);
            if ai != aj && base.wp(&(ai - aj)).in_open_unit_ball() {
                return Err(Error::InconsistentQuotients(format!(
                    "quotients #{i} ({ai}) and #{j} ({aj}) are distinct but closer than 1"
                )));
            }
        }
    }
    Ok(FloorFunction::Override { quotients: quotients.to_vec(), base })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{rat, ratio};
    use num_traits::Zero;
    use proptest::prelude::*;

    fn t32() -> SpecialType {
        SpecialType::new(3, 2).unwrap()
    }

    #[test]
    fn valuation_display_and_parse() {
        assert_eq!(Valuation::Finite(-1).to_string(), "-1/2");
        assert_eq!(Valuation::Finite(4).to_string(), "4/2");
        assert_eq!(Valuation::Infinite.to_string(), "inf");
        for s in ["-1/2", "4/2", "inf"] {
            assert_eq!(s.parse::<Valuation>().unwrap().to_string(), s);
        }
        assert!("3/4".parse::<Valuation>().is_err());
        assert!(Valuation::Finite(5) < Valuation::Infinite);
    }

    #[test]
    fn wp_examples() {
        let alg = Algebra::from_ints(2, 3).unwrap();
        assert_eq!(wp(&Quat::scalar(rat(3)), 3, &alg).unwrap(), Valuation::Finite(2));
        assert_eq!(wp(&Quat::basis_j(), 3, &alg).unwrap(), Valuation::Finite(1));
        let x = Quat::new(rat(0), ratio(1, 2), rat(0), ratio(1, 6));
        assert_eq!(wp(&x, 3, &alg).unwrap(), Valuation::Finite(-1));
        assert_eq!(wp(&Quat::zero(), 3, &alg).unwrap(), Valuation::Infinite);
        assert!(matches!(wp(&x, 5, &alg), Err(Error::NotRamified(5))));
    }

    #[test]
    fn digit_set_shape() {
        let t = t32();
        let digits = t.digit_set();
        assert_eq!(digits.len(), 9);
        assert!(digits.contains(&Quat::zero()));
        // Pairwise incongruent modulo j R_p: differences of distinct digits
        // are units or have unit residues, never in j R_p.
        for a in &digits {
            for b in &digits {
                if a == b {
                    continue;
                }
                let d = a - b;
                assert!(!t.wp(&d).in_open_unit_ball(), "digits {a} and {b} congruent");
            }
        }
    }

    #[test]
    fn digit_expansion_examples() {
        let t = t32();
        // 1 has the single digit 1 at level 0.
        let d = t.digit_expand(&Quat::one(), 6).unwrap();
        assert_eq!(d, vec![(0, Quat::one())]);

        // 1/2 = -1 + 3 * (1/2): digit -1 at level 0, tail from level 2.
        let d = t.digit_expand(&Quat::scalar(ratio(1, 2)), 0).unwrap();
        assert_eq!(d, vec![(0, Quat::scalar(rat(-1)))]);
        let d = t.digit_expand(&Quat::scalar(ratio(1, 2)), 3).unwrap();
        assert_eq!(d[0], (0, Quat::scalar(rat(-1))));
        assert_eq!(d[1].0, 2);

        // (1/2)(i + ij/3) leads at level -1.
        let x = Quat::new(rat(0), ratio(1, 2), rat(0), ratio(1, 6));
        let d = t.digit_expand(&x, 0).unwrap();
        assert_eq!(d.first().map(|(l, _)| *l), Some(-1));

        assert!(t.digit_expand(&Quat::zero(), 0).is_err());
    }

    #[test]
    fn digit_expansion_partial_sums_converge() {
        let t = t32();
        let xs = [
            Quat::new(rat(0), ratio(1, 2), rat(0), ratio(1, 6)),
            Quat::new(ratio(7, 4), rat(-2), ratio(5, 3), ratio(1, 9)),
            Quat::scalar(ratio(22, 7)),
        ];
        for x in &xs {
            for upto in [0i64, 2, 5] {
                let digits = t.digit_expand(x, upto).unwrap();
                let mut sum = Quat::zero();
                for (l, c) in &digits {
                    sum = &sum + &t.algebra().mul(c, &t.uniformizer_pow(*l));
                }
                let rem = x - &sum;
                if !rem.is_zero() {
                    let tw = t.wp(&rem).twice().unwrap();
                    assert!(tw >= upto + 1, "remainder level {tw} too low for {x} at {upto}");
                }
            }
        }
    }

    #[test]
    fn floor_examples() {
        let t = t32();
        let f = FloorFunction::special(t.clone());
        assert_eq!(f.floor(&Quat::zero()), Quat::zero());

        // Floor of (1/2)(i + ij/3) is -i - ij/3.
        let x = Quat::new(rat(0), ratio(1, 2), rat(0), ratio(1, 6));
        let expected = Quat::new(rat(0), rat(-1), rat(0), ratio(-1, 3));
        assert_eq!(f.floor(&x), expected);

        assert_eq!(f.floor(&Quat::scalar(ratio(1, 2))), Quat::scalar(rat(-1)));

        // Positive leading level floors to zero.
        assert_eq!(f.floor(&Quat::scalar(rat(3))), Quat::zero());
        assert_eq!(f.floor(&Quat::basis_j()), Quat::zero());
    }

    #[test]
    fn floor_axioms_on_samples() {
        let t = t32();
        let f = FloorFunction::special(t.clone());
        let samples = [
            Quat::new(rat(0), ratio(1, 2), rat(0), ratio(1, 6)),
            Quat::new(ratio(-3, 2), ratio(5, 9), rat(4), ratio(7, 27)),
            Quat::scalar(ratio(5, 6)),
            Quat::new(ratio(1, 3), rat(0), ratio(-2, 9), rat(1)),
        ];
        for x in &samples {
            let s = f.floor(x);
            // |x - s(x)| < 1
            assert!(t.wp(&(x - &s)).in_open_unit_ball(), "floor too far from {x}");
            // s(x) integral away from p
            assert!(t.order().p_saturated_membership(&s, t.p()));
            // Idempotence: digits of the floor stop at level <= 0.
            assert_eq!(f.floor(&s), s);
        }
    }

    #[test]
    fn floor_is_constant_on_unit_balls() {
        let t = t32();
        let f = FloorFunction::special(t.clone());
        let x = Quat::new(ratio(-3, 2), ratio(5, 9), rat(4), ratio(7, 27));
        let perturbations = [
            Quat::basis_j(),                        // w = 1/2
            Quat::scalar(rat(3)),                   // w = 1
            Quat::new(rat(3), rat(3), rat(1), rat(1)), // j-unit times uniformizer
            t.algebra().mul(&Quat::basis_j(), &Quat::new(rat(1), rat(2), rat(0), rat(1))),
        ];
        for d in &perturbations {
            assert!(t.wp(d).in_open_unit_ball(), "perturbation {d} not small");
            assert_eq!(f.floor(&(&x + d)), f.floor(&x), "floor moved under {d}");
        }
    }

    #[test]
    fn override_floor_construction() {
        let t = t32();
        // Empty list behaves as the base.
        let f = make_override_floor(&[], t.clone()).unwrap();
        let x = Quat::new(rat(0), ratio(1, 2), rat(0), ratio(1, 6));
        assert_eq!(f.floor(&x), FloorFunction::special(t.clone()).floor(&x));

        // |a|_3 = 3^{3/2} > 1, p-saturated: admissible.
        let a = Quat::new(rat(0), ratio(-1, 3), rat(0), ratio(-1, 9));
        assert_eq!(t.wp(&a), Valuation::Finite(-3));
        let f = make_override_floor(&[a.clone()], t.clone()).unwrap();
        assert_eq!(f.floor(&a), a);
        // Points in the ball of a map to a.
        let nearby = &a + &Quat::basis_j();
        assert_eq!(f.floor(&nearby), a);
        assert_eq!(f.floor(&Quat::zero()), Quat::zero());

        // |1|_p = 1 violates the valuation requirement at index 1.
        let ones = [Quat::one(), Quat::one()];
        assert!(matches!(
            make_override_floor(&ones, t.clone()),
            Err(Error::NotAdmissible(_))
        ));

        // Distinct quotients in the same unit ball are inconsistent.
        let b = &a + &Quat::scalar(rat(3));
        assert!(matches!(
            make_override_floor(&[a.clone(), b], t.clone()),
            Err(Error::InconsistentQuotients(_))
        ));

        // Denominators prime to p are rejected.
        let c = Quat::new(rat(0), ratio(-1, 5), rat(0), ratio(-1, 9));
        assert!(matches!(
            make_override_floor(&[c], t),
            Err(Error::NotAdmissible(_))
        ));
    }

    /// Independent rational-digit oracle: centered digit expansion in Q_p.
    fn browkin_digits(x: &BigRational, p: u64, upto: i64) -> Vec<(i64, i64)> {
        assert!(!x.is_zero());
        let r = arith::valuation_rat(x, p);
        let p_rat = rat(p as i64);
        let mut y = x * BigRational::from_integer(arith::big(p as i64)).pow(-(r as i32));
        let mut out = Vec::new();
        for level in r..=upto {
            let c = arith::centered_residue(&y, p).unwrap();
            if c != 0 {
                out.push((level, c));
            }
            y = (y - rat(c)) / &p_rat;
            if y.is_zero() {
                break;
            }
        }
        out
    }

    proptest! {
        #[test]
        fn rational_digits_match_browkin(num in -9999i64..10_000, den in 1i64..10_000) {
            prop_assume!(num != 0);
            for (p, q) in [(3u64, 2u64), (11, 2)] {
                let t = SpecialType::new(p, q).unwrap();
                let x = ratio(num, den);
                let upto = 8i64;
                let quat_digits = t.digit_expand(&Quat::scalar(x.clone()), upto).unwrap();
                let rational_digits = browkin_digits(&x, p, upto / 2);
                // Quaternionic digits of a rational sit at even levels and
                // are scalars matching the rational digit sequence.
                let projected: Vec<(i64, i64)> = quat_digits
                    .iter()
                    .map(|(l, c)| {
                        prop_assert!(c.is_scalar());
                        prop_assert_eq!(l.rem_euclid(2), 0);
                        Ok((l / 2, c.coord(0).to_integer().try_into().unwrap()))
                    })
                    .collect::<std::result::Result<_, _>>()?;
                prop_assert_eq!(projected, rational_digits);
            }
        }

        #[test]
        fn valuation_is_additive(
            c0 in -50i64..50, c1 in -50i64..50, c2 in -50i64..50, c3 in -50i64..50,
            d0 in -50i64..50, d1 in -50i64..50, d2 in -50i64..50, d3 in -50i64..50,
            e1 in 1i64..30, e2 in 1i64..30,
        ) {
            let alg = Algebra::from_ints(2, 3).unwrap();
            let x = Quat::new(rat(c0), rat(c1), ratio(c2, e1), rat(c3));
            let y = Quat::new(ratio(d0, e2), rat(d1), rat(d2), rat(d3));
            prop_assume!(!x.is_zero() && !y.is_zero());
            for p in [2u64, 3] {
                let wx = wp(&x, p, &alg).unwrap();
                let wy = wp(&y, p, &alg).unwrap();
                let wxy = wp(&alg.mul(&x, &y), p, &alg).unwrap();
                prop_assert_eq!(wxy, wx.add(&wy));
            }
        }

        #[test]
        fn valuation_is_ultrametric(
            c0 in -50i64..50, c1 in -50i64..50, c2 in -50i64..50, c3 in -50i64..50,
            d0 in -50i64..50, d1 in -50i64..50, d2 in -50i64..50, d3 in -50i64..50,
        ) {
            let alg = Algebra::from_ints(2, 3).unwrap();
            let x = Quat::new(rat(c0), rat(c1), rat(c2), rat(c3));
            let y = Quat::new(rat(d0), rat(d1), rat(d2), rat(d3));
            let p = 3u64;
            let wx = wp(&x, p, &alg).unwrap();
            let wy = wp(&y, p, &alg).unwrap();
            let wsum = wp(&(&x + &y), p, &alg).unwrap();
            prop_assert!(wsum >= wx.min(wy));
            if wx != wy {
                prop_assert_eq!(wsum, wx.min(wy));
            }
        }
    }
}
