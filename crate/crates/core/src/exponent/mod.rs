//! Exact bookkeeping for bounds of the form `max_i C t^a r^b omega^c ...`.
//!
//! Constants are dropped and logarithms are carried only as an integer
//! power, so a bound is a set of monomials with rational exponents. The
//! operations mirror the usual steps of an exponent derivation: equate two
//! terms to fix a parameter, substitute it, sum over `r`, drop dominated
//! terms, and read off the largest power of `t`.

mod derive;
mod templates;

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::Rational;

pub use derive::{
    derive_section, DerivationStep, Discrepancy, Op, Section, SectionDerivation, StepKind,
    StepOutput,
};
pub use templates::Template;

/// `a/b` shorthand.
pub fn q(a: i64, b: i64) -> Rational {
    Rational::new(a, b)
}

/// Symbols that can appear in a bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    T,
    R,
    Omega,
    Rho,
    BigR,
    R1,
    R2,
}

impl Var {
    pub const ALL: [Var; 7] = [
        Var::T,
        Var::R,
        Var::Omega,
        Var::Rho,
        Var::BigR,
        Var::R1,
        Var::R2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Var::T => "t",
            Var::R => "r",
            Var::Omega => "omega",
            Var::Rho => "rho",
            Var::BigR => "R",
            Var::R1 => "R1",
            Var::R2 => "R2",
        }
    }

    pub fn parse(s: &str) -> Option<Var> {
        Var::ALL.into_iter().find(|v| v.name() == s)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for Var {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

fn fmt_rational(x: &Rational) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Serializes a rational as `"a/b"`.
pub(crate) fn ser_rational<S: Serializer>(
    x: &Rational,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&fmt_rational(x))
}

/// One monomial `prod v^e(v) * log^k`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct TermExpr {
    exps: BTreeMap<Var, Rational>,
    pub logpow: u32,
}

impl Serialize for TermExpr {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let exps: BTreeMap<&str, String> = self
            .exps
            .iter()
            .map(|(v, e)| (v.name(), fmt_rational(e)))
            .collect();
        let mut st = s.serialize_struct("TermExpr", 3)?;
        st.serialize_field("exponents", &exps)?;
        st.serialize_field("logpow", &self.logpow)?;
        st.serialize_field("display", &self.to_string())?;
        st.end()
    }
}

impl TermExpr {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn var(v: Var) -> Self {
        Self::one().with(v, Rational::one())
    }

    /// Monomial from `(var, numerator, denominator)` triples.
    pub fn mono(parts: &[(Var, i64, i64)]) -> Self {
        parts.iter().fold(Self::one(), |acc, &(v, a, b)| {
            acc.times(&Self::one().with(v, q(a, b)))
        })
    }

    /// Sets the exponent of `v`, dropping it when zero.
    pub fn with(mut self, v: Var, e: Rational) -> Self {
        if e.is_zero() {
            self.exps.remove(&v);
        } else {
            self.exps.insert(v, e);
        }
        self
    }

    pub fn with_log(mut self, k: u32) -> Self {
        self.logpow = k;
        self
    }

    pub fn exp(&self, v: Var) -> Rational {
        self.exps.get(&v).copied().unwrap_or_else(Rational::zero)
    }

    pub fn exponents(&self) -> &BTreeMap<Var, Rational> {
        &self.exps
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.exps.keys().copied()
    }

    pub fn contains(&self, v: Var) -> bool {
        self.exps.contains_key(&v)
    }

    pub fn times(&self, other: &TermExpr) -> TermExpr {
        let mut out = self.clone();
        for (&v, &e) in &other.exps {
            let sum = out.exp(v) + e;
            out = out.with(v, sum);
        }
        out.logpow += other.logpow;
        out
    }

    /// Raises every exponent to `k`; the log power scales only for integral `k >= 0`.
    pub fn pow(&self, k: Rational) -> TermExpr {
        let mut out = TermExpr::one();
        for (&v, &e) in &self.exps {
            out = out.with(v, e * k);
        }
        out.logpow = if k.is_integer() && !k.is_negative() {
            self.logpow * k.to_integer() as u32
        } else {
            0
        };
        out
    }

    /// Same monomial ignoring the log power.
    pub fn same_power(&self, other: &TermExpr) -> bool {
        self.exps == other.exps
    }

    /// Numerical value with constants set to one and `log` standing for the given value.
    pub fn eval<S: Scalar>(&self, values: &BTreeMap<Var, S>, log: S) -> Result<S> {
        let mut acc = S::one();
        for (&v, e) in &self.exps {
            let base = values
                .get(&v)
                .copied()
                .ok_or_else(|| Error::Precondition(format!("no value for {v}")))?;
            let e = S::lit(e.to_f64().unwrap_or(f64::NAN));
            acc *= base.powf(e);
        }
        Ok(acc * log.powi(self.logpow as i32))
    }

    /// Total exponent of `t` once each variable is `t^gamma`.
    pub fn t_exponent(&self, gammas: &BTreeMap<Var, Rational>) -> Result<Rational> {
        let mut acc = Rational::zero();
        for (&v, &e) in &self.exps {
            let g = if v == Var::T {
                Rational::one()
            } else {
                *gammas
                    .get(&v)
                    .ok_or_else(|| Error::Precondition(format!("no t-exponent for {v}")))?
            };
            acc += e * g;
        }
        Ok(acc)
    }
}

impl fmt::Display for TermExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exps.is_empty() && self.logpow == 0 {
            return f.write_str("1");
        }
        let mut parts: Vec<String> = self
            .exps
            .iter()
            .map(|(v, e)| {
                if e.is_one() {
                    v.name().to_string()
                } else {
                    format!("{}^({})", v.name(), fmt_rational(e))
                }
            })
            .collect();
        match self.logpow {
            0 => {}
            1 => parts.push("log".into()),
            k => parts.push(format!("log^{k}")),
        }
        f.write_str(&parts.join(" "))
    }
}

/// Max-of-terms bound. Terms keep insertion order; exact duplicates are merged.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct BoundExpr {
    pub terms: Vec<TermExpr>,
}

impl BoundExpr {
    pub fn new(terms: impl IntoIterator<Item = TermExpr>) -> Self {
        let mut b = BoundExpr::default();
        for t in terms {
            b.push(t);
        }
        b
    }

    /// Adds a term. A term with the same powers keeps the larger log power.
    pub fn push(&mut self, term: TermExpr) {
        if let Some(existing) = self.terms.iter_mut().find(|x| x.same_power(&term)) {
            existing.logpow = existing.logpow.max(term.logpow);
        } else {
            self.terms.push(term);
        }
    }

    pub fn union(&self, other: &BoundExpr) -> BoundExpr {
        let mut out = self.clone();
        for t in &other.terms {
            out.push(t.clone());
        }
        out
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Every term multiplied by `w`.
    pub fn scale(&self, w: &TermExpr) -> BoundExpr {
        BoundExpr::new(self.terms.iter().map(|t| t.times(w)))
    }

    /// Numerical value of each term.
    pub fn eval_terms<S: Scalar>(&self, values: &BTreeMap<Var, S>, log: S) -> Result<Vec<S>> {
        self.terms.iter().map(|t| t.eval(values, log)).collect()
    }

    /// Sum of the terms, constants set to one.
    pub fn eval<S: Scalar>(&self, values: &BTreeMap<Var, S>, log: S) -> Result<S> {
        Ok(self
            .eval_terms(values, log)?
            .into_iter()
            .fold(S::zero(), |a, b| a + b))
    }
}

impl fmt::Display for BoundExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.terms.iter().map(|t| t.to_string()).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// `var = value`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Substitution {
    pub var: Var,
    pub value: TermExpr,
}

/// Solves `a = b` for `var`, logs neglected.
pub fn balance(a: &TermExpr, b: &TermExpr, var: Var) -> Result<Substitution> {
    let da = a.exp(var);
    let db = b.exp(var);
    if da == db {
        return Err(Error::NoSolution(format!(
            "{a} and {b} carry the same power of {var}"
        )));
    }
    // (da - db) x_var = sum_u (b_u - a_u) x_u
    let lead = da - db;
    let mut value = TermExpr::one();
    for v in Var::ALL {
        if v == var {
            continue;
        }
        let e = (b.exp(v) - a.exp(v)) / lead;
        value = value.with(v, e);
    }
    Ok(Substitution { var, value })
}

/// Replaces `var` by `value` in every term.
pub fn substitute(bound: &BoundExpr, var: Var, value: &TermExpr) -> BoundExpr {
    if *value == TermExpr::var(var) {
        return bound.clone();
    }
    BoundExpr::new(bound.terms.iter().map(|t| substitute_term(t, var, value)))
}

fn substitute_term(term: &TermExpr, var: Var, value: &TermExpr) -> TermExpr {
    let e = term.exp(var);
    if e.is_zero() {
        return term.clone();
    }
    let rest = term.clone().with(var, Rational::zero());
    let mut out = rest.times(&value.pow(e));
    out.logpow = term.logpow;
    out
}

/// Constant-suppressed `sum_{lower <= r <= upper}` of one term.
pub fn sum_over_r(term: &TermExpr, lower: &TermExpr, upper: &TermExpr) -> TermExpr {
    let b = term.exp(Var::R);
    let rest = term.clone().with(Var::R, Rational::zero());
    let shift = b + Rational::one();
    if shift.is_zero() {
        return rest.with_log(term.logpow + 1);
    }
    let edge = if shift.is_positive() { upper } else { lower };
    let mut out = rest.times(&edge.pow(shift));
    out.logpow = term.logpow;
    out
}

/// [`sum_over_r`] applied term by term.
pub fn sum_bound_over_r(bound: &BoundExpr, lower: &TermExpr, upper: &TermExpr) -> BoundExpr {
    BoundExpr::new(bound.terms.iter().map(|t| sum_over_r(t, lower, upper)))
}

/// Solves `a = b` for `var = t^gamma`; both sides may involve only `t` and `var`.
pub fn choose_r(a: &TermExpr, b: &TermExpr, var: Var) -> Result<Rational> {
    for side in [a, b] {
        if let Some(v) = side.vars().find(|&v| v != Var::T && v != var) {
            return Err(Error::NoSolution(format!("{side} depends on {v}")));
        }
    }
    Ok(balance(a, b, var)?.value.exp(Var::T))
}

/// Ranges `var = t^gamma`, `gamma in [lo, hi]`.
pub type Ranges = BTreeMap<Var, (Rational, Rational)>;

fn corners(vars: &[Var], ranges: &Ranges) -> Vec<BTreeMap<Var, Rational>> {
    let mut out = vec![BTreeMap::new()];
    for &v in vars {
        let (lo, hi) = ranges[&v];
        let mut next = Vec::with_capacity(out.len() * 2);
        for c in &out {
            for g in [lo, hi] {
                let mut c2: BTreeMap<Var, Rational> = c.clone();
                c2.insert(v, g);
                next.push(c2);
            }
        }
        out = next;
    }
    out
}

/// `a <= b` at every corner of the box (logs break ties).
fn dominated(a: &TermExpr, b: &TermExpr, ranges: &Ranges) -> Option<bool> {
    let mut vars: Vec<Var> = a.vars().chain(b.vars()).filter(|&v| v != Var::T).collect();
    vars.sort();
    vars.dedup();
    if vars.iter().any(|v| !ranges.contains_key(v)) {
        return None;
    }
    let mut all_equal = true;
    for c in corners(&vars, ranges) {
        let ea = a.t_exponent(&c).ok()?;
        let eb = b.t_exponent(&c).ok()?;
        if ea > eb {
            return Some(false);
        }
        if ea != eb {
            all_equal = false;
        }
    }
    Some(!all_equal || a.logpow <= b.logpow)
}

/// Drops terms that another term majorizes over the whole box.
pub fn prune(bound: &BoundExpr, ranges: &Ranges) -> BoundExpr {
    let terms = &bound.terms;
    let mut keep = vec![true; terms.len()];
    for i in 0..terms.len() {
        for j in 0..terms.len() {
            if i == j || !keep[j] {
                continue;
            }
            if dominated(&terms[i], &terms[j], ranges) == Some(true) {
                // Mutual domination (equal exponents everywhere): keep the earlier one.
                let mutual = dominated(&terms[j], &terms[i], ranges) == Some(true);
                if !mutual || j < i {
                    keep[i] = false;
                    break;
                }
            }
        }
    }
    BoundExpr::new(
        terms
            .iter()
            .zip(&keep)
            .filter(|(_, &k)| k)
            .map(|(t, _)| t.clone()),
    )
}

/// Each term with its total `t`-exponent under the assignment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Evaluated {
    pub term: TermExpr,
    #[serde(serialize_with = "ser_rational")]
    pub t_exponent: Rational,
}

pub fn evaluate_at(bound: &BoundExpr, gammas: &BTreeMap<Var, Rational>) -> Result<Vec<Evaluated>> {
    bound
        .terms
        .iter()
        .map(|t| {
            Ok(Evaluated {
                term: t.clone(),
                t_exponent: t.t_exponent(gammas)?,
            })
        })
        .collect()
}

/// Terms attaining the largest `t`-exponent (all of them on ties).
pub fn dominant(bound: &BoundExpr, gammas: &BTreeMap<Var, Rational>) -> Result<Vec<Evaluated>> {
    let ev = evaluate_at(bound, gammas)?;
    let best = ev
        .iter()
        .map(|e| e.t_exponent)
        .max()
        .ok_or_else(|| Error::Precondition("empty bound".into()))?;
    Ok(ev.into_iter().filter(|e| e.t_exponent == best).collect())
}
