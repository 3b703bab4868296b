//! The continued-fraction engine: the expansion algorithm `a_n = s(alpha_n)`,
//! `alpha_{n+1} = (alpha_n - a_n)^{-1}`, convergent tables built from the
//! non-commutative recurrences, exact identity verification, termination and
//! periodicity detection.

use std::collections::HashMap;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::padic::{FloorFunction, Valuation};
use crate::quat::{Algebra, Quat};

/// Resource limits for an expansion run. Non-terminating expansions have
/// unbounded coefficient growth, so both limits are first-class.
#[derive(Clone, Copy, Debug)]
pub struct Limits {
    pub max_steps: usize,
    /// Maximum bit length of any coordinate numerator or denominator of a
    /// complete quotient.
    pub coeff_bit_budget: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_steps: 64, coeff_bit_budget: 1 << 16 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TruncationReason {
    MaxSteps,
    CoeffBudget,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExpansionStatus {
    /// Some `alpha_n` equals its floor; the expansion is exact and finite.
    Finite,
    /// A complete quotient recurred: `alpha_{preperiod} =
    /// alpha_{preperiod + period}` exactly.
    Periodic { preperiod: usize, period: usize },
    /// A resource limit stopped the run.
    Truncated(TruncationReason),
}

/// The record of one expansion run.
///
/// `complete_quotients` holds `alpha_0..alpha_N` where N is the index of the
/// last partial quotient; for a periodic run the recurrence witness
/// `alpha_{N+1}` is appended so the repeat is visible in the record.
#[derive(Clone, Debug)]
pub struct CFExpansion {
    alg: Algebra,
    p: u64,
    pub type_used: String,
    pub partial_quotients: Vec<Quat>,
    pub complete_quotients: Vec<Quat>,
    pub status: ExpansionStatus,
    /// `w_p(a_n)` per step.
    pub per_step_vals: Vec<Valuation>,
}

impl CFExpansion {
    pub fn algebra(&self) -> &Algebra {
        &self.alg
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    fn wp(&self, x: &Quat) -> Valuation {
        crate::padic::wp(x, self.p, &self.alg).expect("expansion prime is ramified")
    }

    /// For a periodic expansion, the quotients of one full period.
    pub fn period_quotients(&self) -> Option<Vec<Quat>> {
        match self.status {
            ExpansionStatus::Periodic { preperiod, period } => Some(
                self.partial_quotients[preperiod..preperiod + period].to_vec(),
            ),
            _ => None,
        }
    }

    /// JSON report per the wire schema; exact strings throughout.
    pub fn to_json(&self) -> serde_json::Value {
        let mut obj = serde_json::Map::new();
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
        if let ExpansionStatus::Truncated(reason) = self.status {
            let reason = match reason {
                TruncationReason::MaxSteps => "max_steps",
                TruncationReason::CoeffBudget => "coeff_budget",
            };
            obj.insert("truncation".into(), reason.into());
        }
        let strings = |v: &[Quat]| -> serde_json::Value {
            v.iter().map(|q| q.to_string()).collect::<Vec<_>>().into()
        };
        obj.insert("partial_quotients".into(), strings(&self.partial_quotients));
        obj.insert("complete_quotients".into(), strings(&self.complete_quotients));
        obj.insert(
            "valuations".into(),
            self.per_step_vals
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .into(),
        );
        serde_json::Value::Object(obj)
    }
}

/// Runs the expansion of `x` under the floor `f` until exact termination, a
/// repeated complete quotient, or a resource limit.
pub fn expand(x: &Quat, f: &FloorFunction, limits: Limits) -> CFExpansion {
    let alg = f.algebra().clone();
    let p = f.p();
    let mut partial_quotients = Vec::new();
    let mut complete_quotients = Vec::new();
    let mut per_step_vals = Vec::new();
    let mut seen: HashMap<Quat, usize> = HashMap::new();
    let mut alpha = x.clone();
    let status = loop {
        let n = partial_quotients.len();
        seen.insert(alpha.clone(), n);
        complete_quotients.push(alpha.clone());
        let a = f.floor(&alpha);
        per_step_vals.push(crate::padic::wp(&a, p, &alg).expect("ramified prime"));
        partial_quotients.push(a.clone());
        if alpha == a {
            break ExpansionStatus::Finite;
        }
        let diff = &alpha - &a;
        debug_assert!(
            crate::padic::wp(&diff, p, &alg).unwrap().in_open_unit_ball(),
            "floor axiom broken at step {n}"
        );
        let next = alg.inv(&diff).expect("nonzero element of a division algebra");
        if let Some(&k) = seen.get(&next) {
            complete_quotients.push(next);
            break ExpansionStatus::Periodic { preperiod: k, period: n + 1 - k };
        }
        if n + 1 >= limits.max_steps {
            break ExpansionStatus::Truncated(TruncationReason::MaxSteps);
        }
        if next.coeff_bits() > limits.coeff_bit_budget {
            break ExpansionStatus::Truncated(TruncationReason::CoeffBudget);
        }
        alpha = next;
    };
    CFExpansion {
        alg,
        p,
        type_used: f.describe(),
        partial_quotients,
        complete_quotients,
        status,
        per_step_vals,
    }
}

/// Replays a periodic expansion for a longer prefix, for identity checks
/// over several unrolled periods.
pub fn unroll(exp: &CFExpansion, total_steps: usize) -> Result<CFExpansion> {
    let ExpansionStatus::Periodic { preperiod, period } = exp.status else {
        return Err(Error::PreconditionViolated(
            "only periodic expansions can be unrolled".into(),
        ));
    };
    let pick = |n: usize| -> usize {
        if n < preperiod {
            n
        } else {
            preperiod + (n - preperiod) % period
        }
    };
    let mut partial_quotients = Vec::with_capacity(total_steps);
    let mut complete_quotients = Vec::with_capacity(total_steps + 1);
    let mut per_step_vals = Vec::with_capacity(total_steps);
    for n in 0..total_steps {
        partial_quotients.push(exp.partial_quotients[pick(n)].clone());
        complete_quotients.push(exp.complete_quotients[pick(n)].clone());
        per_step_vals.push(exp.per_step_vals[pick(n)]);
    }
    complete_quotients.push(exp.complete_quotients[pick(total_steps)].clone());
    Ok(CFExpansion {
        alg: exp.alg.clone(),
        p: exp.p,
        type_used: exp.type_used.clone(),
        partial_quotients,
        complete_quotients,
        status: exp.status,
        per_step_vals,
    })
}

/// Convergent tables `A_n`, `B_n`, `Q_n = A_n B_n^{-1}` and, when a target
/// is supplied, `V_n = A_n - alpha B_n`.
#[derive(Clone, Debug)]
pub struct ConvergentTable {
    alg: Algebra,
    quotients: Vec<Quat>,
    /// `A_{-1}, A_0, ..., A_N` (offset by one).
    a_table: Vec<Quat>,
    /// `B_{-1}, B_0, ..., B_N` (offset by one).
    b_table: Vec<Quat>,
    /// `Q_0, ..., Q_N`.
    q_table: Vec<Quat>,
    /// `V_{-1}, V_0, ..., V_N` (offset by one).
    v_table: Option<Vec<Quat>>,
    target: Option<Quat>,
}

impl ConvergentTable {
    /// Number of quotients N+1 the table was built from.
    pub fn len(&self) -> usize {
        self.q_table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q_table.is_empty()
    }

    /// `A_n` for n >= -1.
    pub fn a(&self, n: isize) -> &Quat {
        &self.a_table[(n + 1) as usize]
    }

    /// `B_n` for n >= -1.
    pub fn b(&self, n: isize) -> &Quat {
        &self.b_table[(n + 1) as usize]
    }

    /// `Q_n` for n >= 0.
    pub fn q(&self, n: usize) -> &Quat {
        &self.q_table[n]
    }

    /// `V_n` for n >= -1, when a target was supplied.
    pub fn v(&self, n: isize) -> Option<&Quat> {
        self.v_table.as_ref().map(|t| &t[(n + 1) as usize])
    }

    pub fn has_v(&self) -> bool {
        self.v_table.is_some()
    }

    pub fn target(&self) -> Option<&Quat> {
        self.target.as_ref()
    }

    pub fn algebra(&self) -> &Algebra {
        &self.alg
    }

    /// The quotient list the table was built from.
    pub fn quotients(&self) -> &[Quat] {
        &self.quotients
    }
}

/// Builds the convergent tables for a quotient list.
pub fn convergents(
    quotients: &[Quat],
    alg: &Algebra,
    target: Option<&Quat>,
) -> Result<ConvergentTable> {
    if quotients.is_empty() {
        return Err(Error::PreconditionViolated("empty quotient list".into()));
    }
    let n_len = quotients.len();
    let mut a_table = Vec::with_capacity(n_len + 1);
    let mut b_table = Vec::with_capacity(n_len + 1);
    a_table.push(Quat::one());
    b_table.push(Quat::zero());
    a_table.push(quotients[0].clone());
    b_table.push(Quat::one());
    for a_n in &quotients[1..] {
        let next_a = &alg.mul(&a_table[a_table.len() - 1], a_n) + &a_table[a_table.len() - 2];
        let next_b = &alg.mul(&b_table[b_table.len() - 1], a_n) + &b_table[b_table.len() - 2];
        a_table.push(next_a);
        b_table.push(next_b);
    }
    let mut q_table = Vec::with_capacity(n_len);
    for n in 0..n_len {
        let b_n = &b_table[n + 1];
        if alg.nrd(b_n).is_zero() {
            return Err(Error::SingularDenominator(n));
        }
        let inv = alg.inv(b_n).expect("nonzero reduced norm");
        q_table.push(alg.mul(&a_table[n + 1], &inv));
    }
    let v_table = target.map(|x| {
        (0..=n_len)
            .map(|k| &a_table[k] - &alg.mul(x, &b_table[k]))
            .collect()
    });
    Ok(ConvergentTable {
        alg: alg.clone(),
        quotients: quotients.to_vec(),
        a_table,
        b_table,
        q_table,
        v_table,
        target: target.cloned(),
    })
}

/// One named exact check of the identity suite.
#[derive(Clone, Debug)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub pass: bool,
    /// Index of the first failing n, when failing.
    pub first_failure: Option<usize>,
    pub witness: Option<String>,
}

#[derive(Clone, Debug)]
pub struct IdentityReport {
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let checks: Vec<serde_json::Value> = self
            .checks
            .iter()
            .map(|c| {
                serde_json::json!({
                    "name": c.name,
                    "pass": c.pass,
                    "first_failure": c.first_failure,
                })
            })
            .collect();
        serde_json::json!({ "all_pass": self.all_pass(), "checks": checks })
    }
}

struct CheckRun {
    name: &'static str,
    failure: Option<(usize, String)>,
}

impl CheckRun {
    fn new(name: &'static str) -> Self {
        CheckRun { name, failure: None }
    }

    fn expect_at(&mut self, n: usize, ok: bool, witness: impl FnOnce() -> String) {
        if self.failure.is_none() && !ok {
            self.failure = Some((n, witness()));
        }
    }

    fn finish(self) -> IdentityCheck {
        match self.failure {
            None => IdentityCheck { name: self.name, pass: true, first_failure: None, witness: None },
            Some((n, w)) => IdentityCheck {
                name: self.name,
                pass: false,
                first_failure: Some(n),
                witness: Some(w),
            },
        }
    }
}

/// Verifies every exact identity the convergents must satisfy, over all
/// indices available in the expansion and table. Failures are report
/// entries with the first offending index, never errors.
pub fn verify_identities(x: &Quat, exp: &CFExpansion, table: &ConvergentTable) -> IdentityReport {
    let alg = &exp.alg;
    let n_last = exp.partial_quotients.len() - 1;
    let m_last = exp.complete_quotients.len() - 1;
    debug_assert_eq!(table.len(), n_last + 1);
    let quots = &exp.partial_quotients;
    let compl = &exp.complete_quotients;
    let wp = |y: &Quat| exp.wp(y);
    let mut checks = Vec::new();

    // |a_n|_p > 1 for every n >= 1.
    let mut c = CheckRun::new("partial_quotient_valuation");
    for n in 1..=n_last {
        c.expect_at(n, wp(&quots[n]).abs_exceeds_one(), || {
            format!("|a_{n}|_p <= 1 for a_{n} = {}", quots[n])
        });
    }
    checks.push(c.finish());

    // w(alpha_n) = w(a_n); at n = 0 only when |alpha_0|_p >= 1.
    let mut c = CheckRun::new("complete_vs_partial_valuation");
    for n in 0..=n_last.min(m_last) {
        let wa = wp(&compl[n]);
        if n == 0 && wa > Valuation::Finite(0) {
            continue;
        }
        c.expect_at(n, wa == wp(&quots[n]), || {
            format!("w(alpha_{n}) = {} but w(a_{n}) = {}", wa, wp(&quots[n]))
        });
    }
    checks.push(c.finish());

    // The 2x2 matrix recurrence: the running product of [[a_n, 1], [1, 0]]
    // (non-commutative entries, new factor on the right) must equal
    // [[A_n, A_{n-1}], [B_n, B_{n-1}]] at every n.
    let mut c = CheckRun::new("matrix_factorization");
    let mut prod = [
        [Quat::one(), Quat::zero()],
        [Quat::zero(), Quat::one()],
    ];
    for n in 0..=n_last {
        let step = [
            [quots[n].clone(), Quat::one()],
            [Quat::one(), Quat::zero()],
        ];
        prod = mat_mul(alg, &prod, &step);
        let expected = [
            [table.a(n as isize).clone(), table.a(n as isize - 1).clone()],
            [table.b(n as isize).clone(), table.b(n as isize - 1).clone()],
        ];
        c.expect_at(n, prod == expected, || {
            format!(
                "matrix product at n = {n} is [[{},{}],[{},{}]]",
                prod[0][0], prod[0][1], prod[1][0], prod[1][1]
            )
        });
    }
    checks.push(c.finish());

    // w(B_n) = sum_{j=1..n} w(a_j).
    let mut c = CheckRun::new("denominator_valuation_product");
    let mut acc = Valuation::Finite(0);
    for n in 0..=n_last {
        if n >= 1 {
            acc = acc.add(&wp(&quots[n]));
        }
        c.expect_at(n, wp(table.b(n as isize)) == acc, || {
            format!("w(B_{n}) = {} != {}", wp(table.b(n as isize)), acc)
        });
    }
    checks.push(c.finish());

    // |Q_n - Q_{n-1}|_p = 1 / (|B_n|_p |B_{n-1}|_p).
    let mut c = CheckRun::new("convergent_gap_valuation");
    for n in 1..=n_last {
        let gap = table.q(n) - table.q(n - 1);
        let expected = wp(table.b(n as isize))
            .add(&wp(table.b(n as isize - 1)))
            .neg();
        c.expect_at(n, wp(&gap) == expected, || {
            format!("w(Q_{n} - Q_{}) = {} != {}", n - 1, wp(&gap), expected)
        });
    }
    checks.push(c.finish());

    // x = (A_n alpha_{n+1} + A_{n-1})(B_n alpha_{n+1} + B_{n-1})^{-1}.
    let mut c = CheckRun::new("complete_quotient_moebius");
    for n in 1..=n_last.min(m_last.saturating_sub(1)) {
        let alpha_next = &compl[n + 1];
        let num = &alg.mul(table.a(n as isize), alpha_next) + table.a(n as isize - 1);
        let den = &alg.mul(table.b(n as isize), alpha_next) + table.b(n as isize - 1);
        let ok = match alg.inv(&den) {
            Ok(inv) => &alg.mul(&num, &inv) == x,
            Err(_) => false,
        };
        c.expect_at(n, ok, || format!("moebius identity fails at n = {n}"));
    }
    checks.push(c.finish());

    // Q_n equals the nested bottom-up evaluation of [a_0..a_n].
    let mut c = CheckRun::new("nested_evaluation");
    for n in 0..=n_last {
        let ok = match nested_eval(alg, &quots[..=n]) {
            Some(v) => &v == table.q(n),
            None => false,
        };
        c.expect_at(n, ok, || format!("nested evaluation differs from Q_{n}"));
    }
    checks.push(c.finish());

    if table.has_v() {
        // V_n = V_{n-1} a_n + V_{n-2}.
        let mut c = CheckRun::new("v_recurrence");
        for n in 1..=n_last {
            let expected =
                &alg.mul(table.v(n as isize - 1).unwrap(), &quots[n]) + table.v(n as isize - 2).unwrap();
            c.expect_at(n, table.v(n as isize).unwrap() == &expected, || {
                format!("V_{n} recurrence fails")
            });
        }
        checks.push(c.finish());

        // V_{n-1} alpha_n + V_{n-2} = 0.
        let mut c = CheckRun::new("v_annihilation");
        for n in 1..=(n_last + 1).min(m_last) {
            let lhs = &alg.mul(table.v(n as isize - 1).unwrap(), &compl[n])
                + table.v(n as isize - 2).unwrap();
            c.expect_at(n, lhs.is_zero(), || format!("V_{}(alpha_{n}) + V_{} != 0", n - 1, n - 2));
        }
        checks.push(c.finish());

        // V_{n-1} = (-1)^n alpha_1^{-1} ... alpha_n^{-1}.
        let mut c = CheckRun::new("v_inverse_product");
        let mut prod = Quat::one();
        for n in 1..=(n_last + 1).min(m_last) {
            match alg.inv(&compl[n]) {
                Ok(inv) => prod = alg.mul(&prod, &inv),
                Err(_) => {
                    c.expect_at(n, false, || format!("alpha_{n} not invertible"));
                    break;
                }
            }
            let signed = if n % 2 == 1 { -&prod } else { prod.clone() };
            c.expect_at(n, table.v(n as isize - 1).unwrap() == &signed, || {
                format!("V_{} != (-1)^{n} product of inverse complete quotients", n - 1)
            });
        }
        checks.push(c.finish());

        // |V_{n-1}|_p = prod_{j=1..n} 1/|a_j|_p. The last residual of a
        // finite expansion is exactly zero, so the range stops at N.
        let mut c = CheckRun::new("v_valuation_product");
        let mut acc = Valuation::Finite(0);
        for n in 1..=n_last {
            acc = acc.add(&wp(&quots[n]));
            c.expect_at(n, wp(table.v(n as isize - 1).unwrap()) == acc.neg(), || {
                format!(
                    "w(V_{}) = {} != {}",
                    n - 1,
                    wp(table.v(n as isize - 1).unwrap()),
                    acc.neg()
                )
            });
        }
        checks.push(c.finish());
    }

    // A finite expansion reconstructs its input exactly.
    let mut c = CheckRun::new("finite_reconstruction");
    if exp.status == ExpansionStatus::Finite {
        c.expect_at(n_last, table.q(n_last) == x, || {
            format!("Q_{n_last} = {} != {}", table.q(n_last), x)
        });
    }
    checks.push(c.finish());

    IdentityReport { checks }
}

fn mat_mul(alg: &Algebra, x: &[[Quat; 2]; 2], y: &[[Quat; 2]; 2]) -> [[Quat; 2]; 2] {
    std::array::from_fn(|r| {
        std::array::from_fn(|c| {
            &alg.mul(&x[r][0], &y[0][c]) + &alg.mul(&x[r][1], &y[1][c])
        })
    })
}

/// Bottom-up evaluation `a_0 + 1/(a_1 + 1/(... + 1/a_n))`.
fn nested_eval(alg: &Algebra, quotients: &[Quat]) -> Option<Quat> {
    let mut acc = quotients.last()?.clone();
    for a in quotients[..quotients.len() - 1].iter().rev() {
        acc = a + &alg.inv(&acc).ok()?;
    }
    Some(acc)
}

/// The valuations `w_p(x - Q_n)` along the expansion of `x`: strictly
/// increasing, equal to `-(w(B_n) + w(B_{n+1}))` while the expansion
/// continues, and infinite exactly at the last index of a finite expansion.
pub fn convergence_profile(x: &Quat, exp: &CFExpansion) -> Result<Vec<Valuation>> {
    let table = convergents(&exp.partial_quotients, &exp.alg, Some(x))?;
    Ok((0..table.len())
        .map(|n| exp.wp(&(x - table.q(n))))
        .collect())
}
