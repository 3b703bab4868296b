//! Root-exclusion certificates for left quadratic polynomials built from
//! periodic quotient lists, an independent commutative-subfield oracle for
//! `X^2 - aX - 1`, and the non-terminating expansion trace for the
//! `(1/q)(i + ij/p)` family with its Bezout replay.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::arith;
use crate::cf::{expand, CFExpansion, ExpansionStatus, Limits};
use crate::error::{Error, Result};
use crate::heights::{mu_of_quotients, Certification};
use crate::interval::{exact_sqrt, RatInterval};
use crate::padic::{FloorFunction, SpecialType};
use crate::quat::{Algebra, Quat};

/// Left quadratic polynomial `X P X + X Q1 + Q2 X + S` with coefficients in
/// B. Built from the convergents of an admissible quotient list:
/// `P = B_n`, `Q1 = B_{n-1}`, `Q2 = -A_n`, `S = -A_{n-1}`.
#[derive(Clone, Debug)]
pub struct QuadPoly {
    alg: Algebra,
    pub quadratic: Quat,
    pub linear_right: Quat,
    pub linear_left: Quat,
    pub constant: Quat,
    quotients: Vec<Quat>,
    mu: RatInterval,
}

impl QuadPoly {
    pub fn eval(&self, x: &Quat) -> Quat {
        let alg = &self.alg;
        let xpx = alg.mul(&alg.mul(x, &self.quadratic), x);
        let xq1 = alg.mul(x, &self.linear_right);
        let q2x = alg.mul(&self.linear_left, x);
        &(&(&xpx + &xq1) + &q2x) + &self.constant
    }

    pub fn quotients(&self) -> &[Quat] {
        &self.quotients
    }

    /// Certified enclosure of the criterion maximum over the quotients.
    pub fn mu(&self) -> &RatInterval {
        &self.mu
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "quadratic": self.quadratic.to_string(),
            "linear_right": self.linear_right.to_string(),
            "linear_left": self.linear_left.to_string(),
            "constant": self.constant.to_string(),
        })
    }
}

/// Builds the quadratic annihilated by the p-adic limit of the periodic
/// continued fraction over `quotients`.
///
/// The hard admissibility bullets (valuation above one, integrality away
/// from p, ball separation) fail with `AdmissibilityFailure`; the
/// archimedean criterion is evaluated with certified intervals and stored
/// for [`certify_no_root`] to judge.
pub fn build_periodic_quadratic(
    quotients: &[Quat],
    t: &SpecialType,
    eps: &BigRational,
) -> Result<QuadPoly> {
    if quotients.is_empty() {
        return Err(Error::AdmissibilityFailure("empty quotient list".into()));
    }
    crate::heights::admissible_type_quotients(quotients, t).map_err(|e| match e {
        Error::NotAdmissible(msg) | Error::InconsistentQuotients(msg) => {
            Error::AdmissibilityFailure(msg)
        }
        other => other,
    })?;
    let alg = t.algebra();
    let table = crate::cf::convergents(quotients, alg, None)?;
    let n = (quotients.len() - 1) as isize;
    let refs: Vec<&Quat> = quotients.iter().collect();
    let mu = mu_of_quotients(&refs, t, eps)?;
    Ok(QuadPoly {
        alg: alg.clone(),
        quadratic: table.b(n).clone(),
        linear_right: table.b(n - 1).clone(),
        linear_left: -table.a(n),
        constant: -table.a(n - 1),
        quotients: quotients.to_vec(),
        mu,
    })
}

/// One-sided non-existence certificate. The two p-adic roots are the limits
/// of the periodic quotient list and of the negated inverse of its
/// reversal; both draw their quotients from the same set, so a criterion
/// maximum strictly below 1 places both outside B, and the polynomial has
/// no further roots. A straddling interval certifies nothing.
pub fn certify_no_root(poly: &QuadPoly) -> Certification {
    if poly.mu.hi() < &BigRational::one() {
        Certification::Certified
    } else {
        Certification::Inconclusive
    }
}

/// Brute-force oracle for `X^2 - aX - 1` with non-scalar `a`: every root
/// lies in the commutative subfield Q(a), so writing a candidate square
/// root of `a^2 + 4` as `g = alpha + beta a` reduces the search to rational
/// square tests. Returned roots satisfy the equation exactly.
pub fn subfield_roots(a: &Quat, alg: &Algebra) -> Result<Vec<Quat>> {
    if a.is_scalar() {
        return Err(Error::ScalarInput);
    }
    let t = a.trd();
    let n = alg.nrd(a);
    // g^2 = a^2 + 4 = t a + (4 - n) with g = alpha + beta a demands
    //   alpha^2 - n beta^2 = 4 - n   and   2 alpha beta + t beta^2 = t.
    let mut candidates: Vec<(BigRational, BigRational)> = Vec::new();
    let four_minus_n = arith::rat(4) - &n;
    if t.is_zero() {
        // alpha beta = 0.
        if let Some(alpha) = exact_sqrt(&four_minus_n) {
            candidates.push((alpha.clone(), BigRational::zero()));
            candidates.push((-alpha, BigRational::zero()));
        }
        if !n.is_zero() {
            let beta_sq = (&n - arith::rat(4)) / &n;
            if let Some(beta) = exact_sqrt(&beta_sq) {
                candidates.push((BigRational::zero(), beta.clone()));
                candidates.push((BigRational::zero(), -beta));
            }
        }
    } else {
        // beta != 0 and alpha = t (1 - beta^2) / (2 beta); substitution
        // leaves a quadratic in beta^2.
        let a2 = &t * &t - arith::rat(4) * &n;
        let b2 = -(arith::rat(2) * &t * &t + arith::rat(4) * &four_minus_n);
        let c2 = &t * &t;
        let mut beta_squares = Vec::new();
        if a2.is_zero() {
            if !b2.is_zero() {
                beta_squares.push(-&c2 / &b2);
            }
        } else {
            let disc = &b2 * &b2 - arith::rat(4) * &a2 * &c2;
            if let Some(root) = exact_sqrt(&disc) {
                let two_a = arith::rat(2) * &a2;
                beta_squares.push((-&b2 + &root) / &two_a);
                beta_squares.push((-&b2 - &root) / &two_a);
            }
        }
        for beta_sq in beta_squares {
            if beta_sq.is_negative() {
                continue;
            }
            if let Some(beta) = exact_sqrt(&beta_sq) {
                for beta in [beta.clone(), -beta] {
                    if beta.is_zero() {
                        continue;
                    }
                    let alpha = &t * (BigRational::one() - &beta * &beta)
                        / (arith::rat(2) * &beta);
                    candidates.push((alpha, beta));
                }
            }
        }
    }
    let half = arith::ratio(1, 2);
    let mut roots: Vec<Quat> = Vec::new();
    for (alpha, beta) in candidates {
        let g = &Quat::scalar(alpha) + &a.scale(&beta);
        for sign in [1i64, -1] {
            let x = (&a.clone() + &g.scale(&arith::rat(sign))).scale(&half);
            let value = &alg.mul(&x, &x) - &(&alg.mul(a, &x) + &Quat::one());
            if value.is_zero() && !roots.contains(&x) {
                roots.push(x);
            }
        }
    }
    roots.sort_by_key(|r| r.to_string());
    Ok(roots)
}

/// One step of the Bezout replay: the complete quotient in the canonical
/// shape `(k1 / (k2 p^r)) (i + ij/p)` together with the Bezout data
/// `v p^{r+1} + w k2 = k1` (w centered) that produces the partial quotient
/// `(w / p^r)(i + ij/p)`.
#[derive(Clone, Debug)]
pub struct TraceStep {
    pub n: usize,
    pub k1: BigInt,
    pub k2: BigInt,
    pub r: u32,
    pub v: BigInt,
    pub w: BigInt,
    pub alpha: Quat,
    pub quotient: Quat,
}

/// The engine expansion of `(1/q)(i + ij/p)` replayed against the Bezout
/// recursion, step by step.
#[derive(Clone, Debug)]
pub struct CounterexampleTrace {
    pub p: u64,
    pub q: u64,
    pub steps: Vec<TraceStep>,
    pub status: ExpansionStatus,
    /// Every complete quotient's scalar denominator is divisible by q or
    /// by p - 1.
    pub denominator_condition: bool,
    pub expansion: CFExpansion,
}

impl CounterexampleTrace {
    pub fn to_json(&self) -> serde_json::Value {
        let mut obj = serde_json::Map::new();
        obj.insert("p".into(), self.p.into());
        obj.insert("q".into(), self.q.into());
        let status = match self.status {
            ExpansionStatus::Finite => "finite",
            ExpansionStatus::Periodic { .. } => "periodic",
            ExpansionStatus::Truncated(_) => "truncated",
        };
        obj.insert("status".into(), status.into());
        if let ExpansionStatus::Periodic { preperiod, period } = self.status {
            obj.insert("preperiod".into(), preperiod.into());
            obj.insert("period".into(), period.into());
        }
        obj.insert("agreement".into(), true.into());
        obj.insert(
            "denominator_condition".into(),
            self.denominator_condition.into(),
        );
        let steps: Vec<serde_json::Value> = self
            .steps
            .iter()
            .map(|s| {
                serde_json::json!({
                    "n": s.n,
                    "k1": s.k1.to_string(),
                    "k2": s.k2.to_string(),
                    "r": s.r,
                    "v": s.v.to_string(),
                    "w": s.w.to_string(),
                    "alpha": s.alpha.to_string(),
                    "quotient": s.quotient.to_string(),
                })
            })
            .collect();
        obj.insert("steps".into(), steps.into());
        serde_json::Value::Object(obj)
    }
}

fn family_element(k1: &BigInt, k2: &BigInt, r: u32, p: u64) -> Quat {
    // (k1 / (k2 p^r)) (i + ij / p)
    let p_pow = BigInt::from(p).pow(r);
    let scale = BigRational::new(k1.clone(), k2 * &p_pow);
    let seed = Quat::new(
        BigRational::zero(),
        BigRational::one(),
        BigRational::zero(),
        BigRational::new(BigInt::one(), BigInt::from(p)),
    );
    seed.scale(&scale)
}

/// Runs the expansion of `alpha_0 = (1/q)(i + ij/p)` for exactly `steps`
/// quotients and replays the Bezout recursion alongside; the two must agree
/// element by element, and a divergence is an internal alarm, not bad input.
///
/// When the engine detects a cycle early, its expansion is unrolled so the
/// replay is still verified at every requested step.
pub fn counterexample_trace(p: u64, q: u64, steps: usize) -> Result<CounterexampleTrace> {
    if steps == 0 {
        return Err(Error::BadParameters("need at least one step".into()));
    }
    let t = SpecialType::new(p, q)?;
    let f = FloorFunction::special(t.clone());
    let alpha0 = family_element(&BigInt::one(), &BigInt::from(q), 0, p);
    let recorded = expand(
        &alpha0,
        &f,
        Limits { max_steps: steps, ..Limits::default() },
    );
    let expansion = match recorded.status {
        ExpansionStatus::Periodic { .. } if recorded.partial_quotients.len() < steps => {
            crate::cf::unroll(&recorded, steps)?
        }
        ExpansionStatus::Finite => {
            return Err(Error::Mismatch(
                "family expansion terminated; its denominators can never become units".into(),
            ));
        }
        _ => recorded,
    };

    let p_big = BigInt::from(p);
    let q_big = BigInt::from(q);
    let p_minus_1 = &p_big - BigInt::one();
    let mut k1 = BigInt::one();
    let mut k2 = q_big.clone();
    let mut r: u32 = 0;
    let mut trace_steps = Vec::new();
    let mut denominator_condition = true;
    for n in 0..expansion.partial_quotients.len() {
        let alpha = family_element(&k1, &k2, r, p);
        if expansion.complete_quotients[n] != alpha {
            return Err(Error::Mismatch(format!(
                "complete quotient {n}: engine {} vs replay {}",
                expansion.complete_quotients[n], alpha
            )));
        }
        if (&k2 % &q_big).is_zero() || (&k2 % &p_minus_1).is_zero() {
            // Denominator stays a multiple of q or p-1, so never a unit.
        } else {
            denominator_condition = false;
        }
        if k2.magnitude().is_one() {
            return Err(Error::Mismatch(format!(
                "replay reached unit denominator at step {n} while the engine continued"
            )));
        }
        // Centered Bezout: w = k1 k2^{-1} modulo p^{r+1}, |w| <= (p^{r+1}-1)/2.
        let modulus = p_big.pow(r + 1);
        let k2_inv = arith::inverse_mod(&k2, &modulus)
            .ok_or_else(|| Error::Internal("k2 invertible modulo p^{r+1}".into()))?;
        let mut w = (&k1 * &k2_inv).mod_floor(&modulus);
        if &w + &w > &modulus - BigInt::one() {
            w -= &modulus;
        }
        let v = (&k1 - &w * &k2) / &modulus;
        let quotient = family_element(&w, &BigInt::one(), 0, p).scale(
            &BigRational::new(BigInt::one(), p_big.pow(r)),
        );
        if expansion.partial_quotients[n] != quotient {
            return Err(Error::Mismatch(format!(
                "partial quotient {n}: engine {} vs replay {}",
                expansion.partial_quotients[n], quotient
            )));
        }
        trace_steps.push(TraceStep {
            n,
            k1: k1.clone(),
            k2: k2.clone(),
            r,
            v: v.clone(),
            w,
            alpha,
            quotient,
        });
        if v.is_zero() {
            return Err(Error::Mismatch(format!(
                "replay terminated at step {n} while the engine continued"
            )));
        }
        // alpha_{n+1} = (k2 / (q (p-1) v)) (i + ij/p), normalized.
        let r_next = arith::valuation_int(&v, p);
        let v_unit = &v / p_big.pow(r_next as u32);
        let mut num = k2.clone();
        let mut den = &q_big * &p_minus_1 * v_unit;
        let g = num.gcd(&den);
        num /= &g;
        den /= &g;
        if den.is_negative() {
            num = -num;
            den = -den;
        }
        k1 = num;
        k2 = den;
        r = r_next as u32;
    }
    Ok(CounterexampleTrace {
        p,
        q,
        steps: trace_steps,
        status: expansion.status,
        denominator_condition,
        expansion,
    })
}
