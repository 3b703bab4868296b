//! Orders (ring lattices) in a quaternion algebra: the standard order, the
//! maximal orders used for discriminant `pq`, exact basis coordinates, local
//! lattice norms and Hilbert-symbol ramification tests.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::arith::{self, ratio};
use crate::error::{Error, Result};
use crate::quat::{Algebra, Quat};

/// A rational place: a finite prime or the archimedean place.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Place {
    Finite(u64),
    Infinity,
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Finite(p) => write!(f, "{p}"),
            Place::Infinity => write!(f, "inf"),
        }
    }
}

/// Hilbert symbol `(a, b)_v`: +1 iff `z^2 = a x^2 + b y^2` has a nontrivial
/// solution over `Q_v`.
pub fn hilbert_symbol(a: &BigRational, b: &BigRational, v: Place) -> i32 {
    assert!(!a.is_zero() && !b.is_zero(), "hilbert symbol needs nonzero entries");
    match v {
        Place::Infinity => {
            if a.is_negative() && b.is_negative() {
                -1
            } else {
                1
            }
        }
        Place::Finite(2) => hilbert_symbol_at_2(a, b),
        Place::Finite(p) => hilbert_symbol_at_odd(a, b, p),
    }
}

/// Unit part of a nonzero rational at p: `x / p^{v_p(x)}`.
fn unit_part(x: &BigRational, p: u64) -> (i64, BigRational) {
    let v = arith::valuation_rat(x, p);
    let scale = BigRational::from_integer(BigInt::from(p)).pow(-(v as i32));
    (v, x * scale)
}

fn hilbert_symbol_at_odd(a: &BigRational, b: &BigRational, p: u64) -> i32 {
    let (alpha, u) = unit_part(a, p);
    let (beta, w) = unit_part(b, p);
    let (alpha, beta) = (alpha.rem_euclid(2), beta.rem_euclid(2));
    let lu = arith::legendre(&unit_numer_times_denom(&u), p);
    let lw = arith::legendre(&unit_numer_times_denom(&w), p);
    let mut sign = 1;
    if beta == 1 && lu == -1 {
        sign = -sign;
    }
    if alpha == 1 && lw == -1 {
        sign = -sign;
    }
    // (-1)^{alpha beta (p-1)/2}
    if alpha == 1 && beta == 1 && (p - 1) / 2 % 2 == 1 {
        sign = -sign;
    }
    sign
}

/// For a p-adic unit n/d, the Legendre symbol of n/d equals that of n*d.
fn unit_numer_times_denom(u: &BigRational) -> BigInt {
    u.numer() * u.denom()
}

fn hilbert_symbol_at_2(a: &BigRational, b: &BigRational) -> i32 {
    let (alpha, u) = unit_part(a, 2);
    let (beta, w) = unit_part(b, 2);
    let (alpha, beta) = (alpha.rem_euclid(2) as u64, beta.rem_euclid(2) as u64);
    let u8r = arith::residue_mod_p(&u, 8).expect("odd unit mod 8");
    let w8r = arith::residue_mod_p(&w, 8).expect("odd unit mod 8");
    let eps = |r: u64| (r % 4 == 3) as u64;
    let omega = |r: u64| (r == 3 || r == 5) as u64;
    let exponent = eps(u8r) * eps(w8r) + alpha * omega(w8r) + beta * omega(u8r);
    if exponent % 2 == 0 {
        1
    } else {
        -1
    }
}

/// A Z-lattice of rank 4 in `B` that is also a ring containing 1.
///
/// Rows of `basis` are the basis vectors, in standard-basis coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Order {
    alg: Algebra,
    basis: [Quat; 4],
}

impl Order {
    /// Validates invertibility, `1 ∈ R`, and multiplicative closure (all 16
    /// basis products have integral coordinates).
    pub fn new(alg: Algebra, basis: [Quat; 4]) -> Result<Order> {
        let order = Order { alg, basis };
        if order.det().is_zero() {
            return Err(Error::BadParameters("order basis is singular".into()));
        }
        if !order.contains(&Quat::one()) {
            return Err(Error::BadParameters("order does not contain 1".into()));
        }
        for r in &order.basis {
            for s in &order.basis {
                let prod = order.alg.mul(r, s);
                if !order.contains(&prod) {
                    return Err(Error::BadParameters(format!(
                        "lattice is not multiplicatively closed: ({r}) * ({s}) = {prod}"
                    )));
                }
            }
            if !r.trd().is_integer() || !order.alg.nrd(r).is_integer() {
                return Err(Error::BadParameters(format!(
                    "basis vector {r} is not integral"
                )));
            }
        }
        Ok(order)
    }

    pub fn algebra(&self) -> &Algebra {
        &self.alg
    }

    pub fn basis(&self) -> &[Quat; 4] {
        &self.basis
    }

    pub fn det(&self) -> BigRational {
        let m: [[BigRational; 4]; 4] =
            std::array::from_fn(|r| std::array::from_fn(|c| self.basis[r].coord(c).clone()));
        det4(&m)
    }

    /// Exact coordinates of `x` with respect to the order basis.
    pub fn coordinates(&self, x: &Quat) -> [BigRational; 4] {
        // Solve sum_k c_k basis[k] = x, i.e. M^T c = x over the standard basis.
        let m: [[BigRational; 4]; 4] =
            std::array::from_fn(|r| std::array::from_fn(|c| self.basis[c].coord(r).clone()));
        solve4(&m, x.coords()).expect("order basis is invertible")
    }

    pub fn contains(&self, x: &Quat) -> bool {
        self.coordinates(x).iter().all(|c| c.is_integer())
    }

    /// Lattice norm at a finite prime: `max_i |c_i|_q` over the basis
    /// coordinates, and 0 for the zero element.
    pub fn local_lattice_norm(&self, x: &Quat, q: u64) -> BigRational {
        if x.is_zero() {
            return BigRational::zero();
        }
        let min_val = self
            .coordinates(x)
            .iter()
            .filter(|c| !c.is_zero())
            .map(|c| arith::valuation_rat(c, q))
            .min()
            .expect("nonzero element has a nonzero coordinate");
        BigRational::from_integer(BigInt::from(q)).pow(-(min_val as i32))
    }

    /// True iff all basis coordinates of `x` have p-power denominators,
    /// i.e. `x ∈ R_q` for every prime `q != p`.
    pub fn p_saturated_membership(&self, x: &Quat, p: u64) -> bool {
        self.coordinates(x)
            .iter()
            .all(|c| arith::is_power_of(c.denom(), p))
    }

    /// JSON form: `{ "a": .., "b": .., "basis": [[4 rationals] x 4] }`.
    pub fn to_json(&self) -> serde_json::Value {
        let basis: Vec<Vec<String>> = self
            .basis
            .iter()
            .map(|v| v.coords().iter().map(|c| c.to_string()).collect())
            .collect();
        serde_json::json!({
            "a": self.alg.a().to_string(),
            "b": self.alg.b().to_string(),
            "basis": basis,
        })
    }
}

/// The order `Z + Zi + Zj + Zij`; defined when a and b are integers.
pub fn standard_order(alg: &Algebra) -> Result<Order> {
    if !alg.a().is_integer() || !alg.b().is_integer() {
        return Err(Error::NotIntegral(
            "standard order needs integer algebra parameters".into(),
        ));
    }
    Order::new(
        alg.clone(),
        [Quat::one(), Quat::basis_i(), Quat::basis_j(), Quat::basis_ij()],
    )
}

/// Builds `B = (q, p / Q)` of discriminant `pq` together with a maximal
/// order containing the standard order.
///
/// Admissible parameters: p >= 3 prime and either q ≡ 1 (mod 4) with
/// Legendre (p|q) = -1, or q = 2 with p ≡ 3 (mod 8). The returned basis is
/// verified to be multiplicatively closed and of index 4 over the standard
/// order, which pins its reduced discriminant to `pq`.
pub fn maximal_order_pq(p: u64, q: u64) -> Result<(Algebra, Order)> {
    if p < 3 || !arith::is_prime(p) {
        return Err(Error::BadParameters(format!("p = {p} must be an odd prime >= 3")));
    }
    if !arith::is_prime(q) {
        return Err(Error::BadParameters(format!("q = {q} must be prime")));
    }
    let ok = if q == 2 {
        p % 8 == 3
    } else {
        q % 4 == 1 && arith::legendre(&BigInt::from(p), q) == -1
    };
    if !ok {
        return Err(Error::BadParameters(format!(
            "(p, q) = ({p}, {q}) fails the ramification recipe: need q = 2 with p ≡ 3 (mod 8), \
             or q ≡ 1 (mod 4) with (p|q) = -1"
        )));
    }
    let alg = Algebra::new(arith::rat(q as i64), arith::rat(p as i64))?;
    debug_assert!(alg.is_ramified_at(p) && alg.is_ramified_at(q));
    debug_assert_eq!(alg.ramified_primes().len(), 2);

    let half = ratio(1, 2);
    let basis = if q == 2 {
        // {1, i, (1+i+j)/2, (i+ij)/2}
        [
            Quat::one(),
            Quat::basis_i(),
            Quat::new(half.clone(), half.clone(), half.clone(), arith::rat(0)),
            Quat::new(arith::rat(0), half.clone(), arith::rat(0), half),
        ]
    } else {
        // {1, j, (1+i)/2, (j+ij)/2}
        [
            Quat::one(),
            Quat::basis_j(),
            Quat::new(half.clone(), half.clone(), arith::rat(0), arith::rat(0)),
            Quat::new(arith::rat(0), arith::rat(0), half.clone(), half),
        ]
    };
    let order = Order::new(alg.clone(), basis)?;
    Ok((alg, order))
}

/// An order containing a given integral element, via an explicit
/// anticommuting complement: for non-scalar `x` with integer trace t and
/// norm n, pick a pure `y` orthogonal to the pure part of `x` under the
/// norm-form pairing, scale it until the span of `{1, x, y, xy}` closes
/// multiplicatively, and return that lattice.
pub fn order_containing(x: &Quat, alg: &Algebra) -> Result<Order> {
    if !alg.is_integral(x) {
        return Err(Error::NotIntegral(format!(
            "element {x} has non-integer minimal polynomial"
        )));
    }
    if x.is_scalar() {
        return standard_order(alg);
    }
    let w = x.pure_part();
    let (w1, w2) = (w.coord(1), w.coord(2));
    // A pure solution of <w, y> = -a w1 y1 - b w2 y2 + ab w3 y3 = 0.
    let y = if !w1.is_zero() || !w2.is_zero() {
        Quat::new(
            BigRational::zero(),
            alg.b() * w2,
            -(alg.a() * w1),
            BigRational::zero(),
        )
    } else {
        Quat::basis_i()
    };
    let y = primitive_part(&y);
    for k in 1..=64u32 {
        let yk = y.scale(&arith::rat(k as i64));
        if !alg.nrd(&yk).is_integer() {
            continue;
        }
        let xy = alg.mul(x, &yk);
        if let Ok(order) = Order::new(alg.clone(), [Quat::one(), x.clone(), yk, xy]) {
            return Ok(order);
        }
    }
    Err(Error::CannotSaturate)
}

/// Clears denominators and divides by the numerator content.
fn primitive_part(x: &Quat) -> Quat {
    let lcm = x
        .coords()
        .iter()
        .fold(BigInt::one(), |acc, c| num_integer::Integer::lcm(&acc, c.denom()));
    let ints: Vec<BigInt> = x
        .coords()
        .iter()
        .map(|c| (c * BigRational::from_integer(lcm.clone())).to_integer())
        .collect();
    let content = ints
        .iter()
        .filter(|n| !n.is_zero())
        .fold(BigInt::zero(), |acc, n| num_integer::Integer::gcd(&acc, n));
    if content.is_zero() {
        return x.clone();
    }
    let scale = BigRational::new(BigInt::one(), content);
    Quat::from_coords(std::array::from_fn(|k| {
        BigRational::from_integer(ints[k].clone()) * &scale
    }))
}

fn det4(m: &[[BigRational; 4]; 4]) -> BigRational {
    // Exact fraction-free expansion is unnecessary at this size; do
    // elimination on a copy.
    let mut a: Vec<Vec<BigRational>> = m.iter().map(|r| r.to_vec()).collect();
    let mut det = BigRational::one();
    for col in 0..4 {
        let pivot = (col..4).find(|&r| !a[r][col].is_zero());
        let Some(p) = pivot else {
            return BigRational::zero();
        };
        if p != col {
            a.swap(p, col);
            det = -det;
        }
        det *= a[col][col].clone();
        let inv = a[col][col].clone().recip();
        for r in col + 1..4 {
            if a[r][col].is_zero() {
                continue;
            }
            let factor = &a[r][col] * &inv;
            for c in col..4 {
                let sub = &factor * &a[col][c];
                a[r][c] = &a[r][c] - &sub;
            }
        }
    }
    det
}

fn solve4(m: &[[BigRational; 4]; 4], rhs: &[BigRational; 4]) -> Option<[BigRational; 4]> {
    let mut a: Vec<Vec<BigRational>> = m
        .iter()
        .zip(rhs.iter())
        .map(|(r, b)| {
            let mut row = r.to_vec();
            row.push(b.clone());
            row
        })
        .collect();
    for col in 0..4 {
        let pivot = (col..4).find(|&r| !a[r][col].is_zero())?;
        a.swap(pivot, col);
        let inv = a[col][col].clone().recip();
        for c in col..5 {
            a[col][c] = &a[col][c] * &inv;
        }
        for r in 0..4 {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone();
            for c in col..5 {
                let sub = &factor * &a[col][c];
                a[r][c] = &a[r][c] - &sub;
            }
        }
    }
    Some(std::array::from_fn(|k| a[k][4].clone()))
}
