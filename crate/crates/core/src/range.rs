//! Closed-form derivatives of the `G2` main term, interval cuts around their
//! zeros, derivative envelopes, parity-split partial sums of `e(r F2)` and
//! the Euler-Maclaurin surrogate `F3`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chain::node::{x_series, y_derivative_along};
use crate::chain::quadrature::{WGK, XGK};
use crate::chain::reform::{f2_phases, f2_profile, g2_value};
use crate::error::{Error, Result};
use crate::exponent::{Template, Var};
use crate::numeric::{e, CompensatedSum, ComplexSum};
use crate::series::{binomial, factorial, Taylor};
use crate::{Rational, Scalar};

/// Floor exponent: cut widths must exceed `t^WIDTH_FLOOR_EXPONENT`.
pub const WIDTH_FLOOR_EXPONENT: f64 = 0.01;

/// Zero of the second derivative, as a multiple of `r`: `sqrt(3) / 2`.
pub fn nu0_factor<S: Scalar>() -> S {
    S::lit(3.0).sqrt() / S::lit(2.0)
}

/// Zero of the third derivative in `[0, r]`, as a multiple of `r`: `sqrt(3 - sqrt 7) / 2`.
pub fn eta_factor<S: Scalar>() -> S {
    (S::lit(3.0) - S::lit(7.0).sqrt()).sqrt() / S::lit(2.0)
}

/// Zero of the fourth derivative in `[0, r]`, as a multiple of `r`: `sqrt(5 - sqrt 15) / 2`.
pub fn quartic_factor<S: Scalar>() -> S {
    (S::lit(5.0) - S::lit(15.0).sqrt()).sqrt() / S::lit(2.0)
}

/// Cap on the half-width of the middle `J` interval, as a multiple of `r`.
pub fn j2_cap_factor<S: Scalar>() -> S {
    (quartic_factor::<S>() - eta_factor::<S>()) / S::lit(2.0)
}

/// `d^l/dnu^l` of `-r nu sqrt(t) (r^2 + nu^2)^(-5/2)`, `l = 0..=4`.
pub fn g2_main_derivative<S: Scalar>(r: u64, t: u64, nu: S, l: u32) -> Result<S> {
    let rs = S::from_count(r);
    if nu < S::zero() || nu > rs {
        return Err(Error::Precondition(format!(
            "need 0 <= nu <= r, got nu = {nu}, r = {r}"
        )));
    }
    let st = S::from_count(t).sqrt();
    let (r2, n2) = (rs * rs, nu * nu);
    let b = r2 + n2;
    let c = |x: f64| S::lit(x);
    let v = match l {
        0 => -rs * nu * st * b.powf(c(-2.5)),
        1 => rs * st * (c(4.0) * n2 - r2) * b.powf(c(-3.5)),
        2 => -c(5.0) * rs * nu * st * (c(4.0) * n2 - c(3.0) * r2) * b.powf(c(-4.5)),
        3 => c(15.0) * rs * st * (c(8.0) * n2 * n2 - c(12.0) * n2 * r2 + r2 * r2) * b.powf(c(-5.5)),
        4 => {
            -c(105.0)
                * rs
                * nu
                * st
                * (c(8.0) * n2 * n2 - c(20.0) * n2 * r2 + c(5.0) * r2 * r2)
                * b.powf(c(-6.5))
        }
        _ => {
            return Err(Error::Precondition(format!(
                "derivative order {l} outside 0..=4"
            )))
        }
    };
    Ok(v)
}

/// The zero of the `l`-th derivative (`l = 2, 3, 4`) in `(0, r)`, by bisection.
pub fn derivative_root(r: u64, l: u32) -> Result<f64> {
    if !(2..=4).contains(&l) {
        return Err(Error::Precondition(format!(
            "roots are tabulated for l = 2, 3, 4, got {l}"
        )));
    }
    let f = |nu: f64| g2_main_derivative(r, 1, nu, l).expect("in range");
    let (mut lo, mut hi) = (r as f64 * 1e-6, r as f64);
    let flo = f(lo).signum();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid).signum() == flo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Observed `sup |central difference - closed form| / a_envelope` for `l = 0..=4`.
///
/// Independent of `r` and `t` to three digits over `100 <= r <= 1000`,
/// `10^8 <= t <= 10^12`.
pub const A_ENVELOPE_CONSTANTS: [f64; 5] = [0.554, 1.447, 8.999, 47.673, 377.915];

/// `sqrt(t) / r^(l+4)`, the size of the neglected terms after `l` derivatives.
pub fn a_envelope(r: u64, t: u64, l: u32) -> f64 {
    (t as f64).sqrt() / (r as f64).powi(l as i32 + 4)
}

fn central_difference(f: impl Fn(f64) -> f64, nu: f64, l: u32) -> f64 {
    match l {
        0 => f(nu),
        1 => 0.5 * (f(nu + 1.0) - f(nu - 1.0)),
        2 => f(nu + 1.0) - 2.0 * f(nu) + f(nu - 1.0),
        3 => 0.5 * (f(nu + 2.0) - 2.0 * f(nu + 1.0) + 2.0 * f(nu - 1.0) - f(nu - 2.0)),
        _ => f(nu + 2.0) - 4.0 * f(nu + 1.0) + 6.0 * f(nu) - 4.0 * f(nu - 1.0) + f(nu - 2.0),
    }
}

/// Largest `|central difference of G2 - closed-form derivative|` over a grid of `nu`.
pub fn finite_difference_check(r: u64, t: u64, l: u32) -> Result<f64> {
    if l > 4 {
        return Err(Error::Precondition(format!(
            "derivative order {l} outside 0..=4"
        )));
    }
    crate::chain::sums::check_r(r, t)?;
    let order = crate::chain::DEFAULT_ORDER;
    let g = |nu: f64| g2_value(r, t, nu, order);
    let lo = 2u64;
    let hi = r.saturating_sub(2);
    if hi < lo {
        return Err(Error::Precondition(format!(
            "r = {r} too small for a difference grid"
        )));
    }
    let step = ((hi - lo) / 64).max(1);
    let mut worst = 0f64;
    let mut nu = lo;
    while nu <= hi {
        let x = nu as f64;
        let d = central_difference(g, x, l) - g2_main_derivative(r, t, x, l)?;
        worst = worst.max(d.abs());
        nu += step;
    }
    Ok(worst)
}

/// Which derivative zero a cut is built around.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CutKind {
    /// Around `nu_0`, the zero of the second derivative.
    I,
    /// Around `eta`, the zero of the third derivative.
    J,
}

/// A decomposition of `[1, r]` (`I`) or `[0, r]` (`J`) into consecutive intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeCut<S: Scalar = f64> {
    pub r: u64,
    pub kind: CutKind,
    pub width: S,
    pub center: S,
    /// Interior cut points in increasing order.
    pub boundaries: Vec<S>,
}

/// One closed, open or half-open interval of a cut.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval<S: Scalar = f64> {
    pub lo: S,
    pub hi: S,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl<S: Scalar> Interval<S> {
    pub fn contains(&self, x: S) -> bool {
        let above = if self.lo_closed {
            x >= self.lo
        } else {
            x > self.lo
        };
        let below = if self.hi_closed {
            x <= self.hi
        } else {
            x < self.hi
        };
        above && below
    }

    /// Integers in the interval.
    pub fn integers(&self) -> impl Iterator<Item = u64> + '_ {
        let a = self.lo.max(S::zero()).floor().to_u64().unwrap_or(0);
        let b = self.hi.max(S::zero()).ceil().to_u64().unwrap_or(0);
        (a..=b).filter(move |&n| self.contains(S::from_count(n)))
    }
}

fn reject(width: f64, constraint: String) -> Error {
    Error::InvalidWidth { width, constraint }
}

/// Builds the cut `I0..I3` (width `omega`) or `J1..J3` (width `rho`).
pub fn build_cut<S: Scalar>(r: u64, t: u64, kind: CutKind, width: S) -> Result<RangeCut<S>> {
    let w = width.to_f64_lossy();
    let floor = (t as f64).powf(WIDTH_FLOOR_EXPONENT);
    if !(w > floor) {
        return Err(reject(w, format!("width must exceed t^(1/100) = {floor}")));
    }
    let rs = S::from_count(r);
    let (center, boundaries) = match kind {
        CutKind::I => {
            if !(width > S::one()) {
                return Err(reject(w, "omega must exceed 1".into()));
            }
            let cap = (S::one() - nu0_factor::<S>()) * rs;
            if !(width < cap) {
                return Err(reject(
                    w,
                    format!("omega must be below (1 - sqrt(3)/2) r = {cap}"),
                ));
            }
            let c = nu0_factor::<S>() * rs;
            (c, vec![width, c - width, c + width])
        }
        CutKind::J => {
            let c = eta_factor::<S>() * rs;
            if !(width < c) {
                return Err(reject(
                    w,
                    format!("rho must be below sqrt(3 - sqrt 7)/2 r = {c}"),
                ));
            }
            (c, vec![c - width, c + width])
        }
    };
    Ok(RangeCut {
        r,
        kind,
        width,
        center,
        boundaries,
    })
}

impl<S: Scalar> RangeCut<S> {
    /// Interval labels in order: `I0..I3` or `J1..J3`.
    pub fn labels(&self) -> Vec<String> {
        match self.kind {
            CutKind::I => (0..4).map(|i| format!("I{i}")).collect(),
            CutKind::J => (1..4).map(|i| format!("J{i}")).collect(),
        }
    }

    pub fn intervals(&self) -> Vec<Interval<S>> {
        let rs = S::from_count(self.r);
        let b = &self.boundaries;
        let iv = |lo, hi, lo_closed, hi_closed| Interval {
            lo,
            hi,
            lo_closed,
            hi_closed,
        };
        match self.kind {
            CutKind::I => vec![
                iv(S::one(), b[0], true, true),
                iv(b[0], b[1], false, false),
                iv(b[1], b[2], true, true),
                iv(b[2], rs, false, true),
            ],
            CutKind::J => vec![
                iv(S::zero(), b[0], true, false),
                iv(b[0], b[1], true, true),
                iv(b[1], rs, false, true),
            ],
        }
    }

    /// Index of the interval holding `nu`, if any.
    pub fn locate(&self, nu: S) -> Option<usize> {
        self.intervals().iter().position(|iv| iv.contains(nu))
    }

    /// Whether the middle `J` interval is narrow enough for the fourth-derivative envelope.
    pub fn j2_admissible(&self) -> bool {
        self.kind == CutKind::J && self.width < j2_cap_factor::<S>() * S::from_count(self.r)
    }
}

/// Observed `|derivative|` on one interval against its predicted envelope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeReport {
    pub label: String,
    pub derivative: u32,
    pub samples: usize,
    pub min_abs: f64,
    pub max_abs: f64,
    /// `min |d|` over the lower envelope.
    pub min_ratio: f64,
    /// `max |d|` over the upper envelope.
    pub max_ratio: f64,
}

const ENVELOPE_SAMPLES: usize = 512;

fn sample_envelope(
    r: u64,
    t: u64,
    label: &str,
    l: u32,
    pieces: &[Interval<f64>],
    lower: f64,
    upper: f64,
) -> Result<EnvelopeReport> {
    let mut min_abs = f64::INFINITY;
    let mut max_abs = 0f64;
    let mut samples = 0;
    for iv in pieces {
        // Open ends are approached to within 1e-9 of the interval length.
        let pad = 1e-9 * (iv.hi - iv.lo);
        let (a, b) = (iv.lo + pad, iv.hi - pad);
        for k in 0..=ENVELOPE_SAMPLES {
            let nu = a + (b - a) * k as f64 / ENVELOPE_SAMPLES as f64;
            let d = g2_main_derivative(r, t, nu, l)?.abs();
            min_abs = min_abs.min(d);
            max_abs = max_abs.max(d);
            samples += 1;
        }
    }
    Ok(EnvelopeReport {
        label: label.to_string(),
        derivative: l,
        samples,
        min_abs,
        max_abs,
        min_ratio: min_abs / lower,
        max_ratio: max_abs / upper,
    })
}

/// Derivative envelopes on the outer intervals of a cut and, for an
/// admissible `J` cut, the fourth derivative on the middle one.
pub fn envelope_check(r: u64, t: u64, cut: &RangeCut<f64>) -> Result<Vec<EnvelopeReport>> {
    let st = (t as f64).sqrt();
    let rf = r as f64;
    let iv = cut.intervals();
    let mut out = Vec::new();
    match cut.kind {
        CutKind::I => {
            let lower = cut.width * st / rf.powi(6);
            let upper = st / rf.powi(5);
            out.push(sample_envelope(
                r,
                t,
                "I1+I3",
                2,
                &[iv[1], iv[3]],
                lower,
                upper,
            )?);
        }
        CutKind::J => {
            let lower = cut.width * st / rf.powi(7);
            let upper = st / rf.powi(6);
            out.push(sample_envelope(
                r,
                t,
                "J1+J3",
                3,
                &[iv[0], iv[2]],
                lower,
                upper,
            )?);
            if cut.j2_admissible() {
                let scale = st / rf.powi(7);
                out.push(sample_envelope(r, t, "J2", 4, &[iv[1]], scale, scale)?);
            }
        }
    }
    Ok(out)
}

/// Which `nu` enter a partial sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parity {
    Odd,
    Even,
    Both,
}

impl Parity {
    pub fn admits(self, nu: u64) -> bool {
        match self {
            Parity::Odd => nu % 2 == 1,
            Parity::Even => nu % 2 == 0,
            Parity::Both => true,
        }
    }
}

/// Interval selector for [`partial_sum`].
#[derive(Debug, Clone, PartialEq)]
pub enum Selection {
    All,
    /// Intervals of a cut, by index into [`RangeCut::intervals`].
    Intervals(RangeCut<f64>, Vec<usize>),
}

impl Selection {
    fn admits(&self, nu: u64) -> bool {
        match self {
            Selection::All => true,
            Selection::Intervals(cut, which) => {
                cut.locate(nu as f64).is_some_and(|i| which.contains(&i))
            }
        }
    }
}

/// `sum e(r F2(nu))` over `1 <= nu <= r1` of the given parity inside the selection.
pub fn partial_sum(
    r: u64,
    t: u64,
    r1: u64,
    parity: Parity,
    selection: &Selection,
    order: usize,
) -> Result<Complex64> {
    if r1 > r {
        return Err(Error::Precondition(format!(
            "need r1 <= r, got r1 = {r1}, r = {r}"
        )));
    }
    let phases = f2_phases(r, t, order)?;
    let mut acc = ComplexSum::new();
    for nu in 1..=r1 {
        if parity.admits(nu) && selection.admits(nu) {
            acc.add(e(phases[nu as usize]));
        }
    }
    Ok(acc.value())
}

/// The quoted bound shape evaluated with unit constants.
pub fn gk_prediction(template: Template, r: u64, t: u64, width: f64) -> Result<f64> {
    let mut vals = std::collections::BTreeMap::new();
    vals.insert(Var::T, t as f64);
    vals.insert(Var::R, r as f64);
    vals.insert(template.width_var(), width);
    template.bound().eval(&vals, (t as f64).ln())
}

/// Bernoulli numbers `B_0..=B_n` (with `B_1 = -1/2`).
pub fn bernoulli_numbers(n: usize) -> Vec<Rational> {
    let mut b: Vec<Rational> = vec![Rational::from_integer(1)];
    for m in 1..=n {
        let mut s = Rational::from_integer(0);
        for (k, bk) in b.iter().enumerate() {
            s += Rational::from_integer(binomial(m + 1, k) as i64) * bk;
        }
        b.push(-s / Rational::from_integer(m as i64 + 1));
    }
    b
}

/// `B_j(1/2) = (2^(1-j) - 1) B_j`.
pub fn bernoulli_half(j: usize) -> Rational {
    let bj = bernoulli_numbers(j)[j];
    (Rational::new(1, 1i64 << j) * 2 - 1) * bj
}

/// Midpoint Euler-Maclaurin weight at step 2: `2^(j-1) B_j(1/2) / j!`.
pub fn em_coefficient(j: usize) -> Rational {
    let fact: i64 = (1..=j as i64).product();
    bernoulli_half(j) * Rational::new(1i64 << (j - 1), fact)
}

/// Series of `G2(nu + h)` in `h` up to `h^depth`.
pub fn g2_taylor(r: u64, t: u64, nu: f64, order: usize, depth: usize) -> Taylor {
    let xs = x_series(r, t, nu, order + depth);
    let x = xs.clone().truncate(depth);
    let coeff: Vec<Taylor> = (1..order)
        .map(|k| xs.shifted_derivative(k).truncate(depth))
        .collect();
    let mut acc = Taylor::constant(0.0, depth);
    for i in (3..order).step_by(2) {
        let mut step = Taylor::constant(0.0, depth);
        for c in coeff.iter().take(order - i) {
            step = &step + c;
        }
        let y = y_derivative_along(t, &x, i);
        let term = (&y * &step.powi(i as u32)).scale(2.0 / factorial::<f64>(i));
        acc = &acc + &term;
    }
    acc
}

fn integrate_g2(r: u64, t: u64, a: f64, b: f64, order: usize) -> f64 {
    let panels = ((b - a) / 2.0).ceil().max(1.0) as usize;
    let h = (b - a) / panels as f64;
    let mut acc = CompensatedSum::new();
    for p in 0..panels {
        let c = a + h * (p as f64 + 0.5);
        let half = 0.5 * h;
        let mut s = WGK[7] * g2_value(r, t, c, order);
        for j in 0..7 {
            let dx = half * XGK[j];
            s += WGK[j] * (g2_value(r, t, c - dx, order) + g2_value(r, t, c + dx, order));
        }
        acc.add(s * half);
    }
    acc.value()
}

fn check_em(r: u64, nu1: u64, nu: u64, n: usize) -> Result<()> {
    if nu1 % 2 == 0 || nu % 2 == 0 || nu1 > nu || nu > r {
        return Err(Error::Precondition(format!(
            "need odd nu1 <= nu <= r, got nu1 = {nu1}, nu = {nu}, r = {r}"
        )));
    }
    if !(2..=12).contains(&n) {
        return Err(Error::Precondition(format!(
            "Euler-Maclaurin order {n} outside 2..=12"
        )));
    }
    Ok(())
}

/// `F3(nu) = (1/2) int_{nu1}^{nu} G2 + sum_{j=2}^{N} b_j (G2^(j-1)(nu) - G2^(j-1)(nu1))`.
pub fn euler_maclaurin_f3(r: u64, t: u64, nu1: u64, nu: u64, n: usize) -> Result<f64> {
    crate::chain::sums::check_r(r, t)?;
    check_em(r, nu1, nu, n)?;
    if nu1 == nu {
        return Ok(0.0);
    }
    let order = crate::chain::DEFAULT_ORDER;
    let mut acc = CompensatedSum::new();
    acc.add(0.5 * integrate_g2(r, t, nu1 as f64, nu as f64, order));
    let hi = g2_taylor(r, t, nu as f64, order, n);
    let lo = g2_taylor(r, t, nu1 as f64, order, n);
    for j in (2..=n).step_by(2) {
        let b = em_coefficient(j);
        let w = *b.numer() as f64 / *b.denom() as f64;
        acc.add(w * (hi.derivative(j - 1) - lo.derivative(j - 1)));
    }
    Ok(acc.value())
}

/// `|F2(nu) - F2(nu1) - F3(nu)|`.
pub fn f3_residual(r: u64, t: u64, nu1: u64, nu: u64, n: usize) -> Result<f64> {
    let f3 = euler_maclaurin_f3(r, t, nu1, nu, n)?;
    let f2 = f2_profile(r, t, crate::chain::DEFAULT_ORDER)?;
    Ok((f2[nu as usize] - f2[nu1 as usize] - f3).abs())
}

/// `sqrt(t) / r^(N+2)`.
pub fn em_envelope(r: u64, t: u64, n: usize) -> f64 {
    (t as f64).sqrt() / (r as f64).powi(n as i32 + 2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn closed_forms_match_series_derivatives() {
        let (r, t) = (37u64, 1_000_000u64);
        let st = (t as f64).sqrt();
        for nu in [0.5, 3.0, 17.25, 30.0, 37.0] {
            let v = Taylor::variable(nu, 4);
            let b = (&v * &v).add_scalar((r * r) as f64).powf(-2.5);
            let main = (&v * &b).scale(-(r as f64) * st);
            for l in 0..=4u32 {
                let d = g2_main_derivative(r, t, nu, l).unwrap();
                assert!(
                    (d - main.derivative(l as usize)).abs()
                        <= 1e-12 * main.derivative(l as usize).abs().max(1e-9)
                );
            }
        }
        assert!(g2_main_derivative(r, t, 38.0, 2).is_err());
        assert!(g2_main_derivative(r, t, 1.0, 5).is_err());
    }

    #[test]
    fn generic_over_f32() {
        let a: f32 = g2_main_derivative(100, 100_000_000, 40.0f32, 3).unwrap();
        let b = g2_main_derivative(100, 100_000_000, 40.0f64, 3).unwrap();
        assert!(rel(a as f64, b) < 1e-4);
        let cut = build_cut::<f32>(1000, 1_000_000, CutKind::I, 50.0).unwrap();
        assert!((cut.center - 866.025_4).abs() < 1e-3);
    }

    #[test]
    fn roots() {
        for r in [10u64, 100, 12345] {
            let rf = r as f64;
            assert!(rel(derivative_root(r, 2).unwrap(), nu0_factor::<f64>() * rf) < 1e-9);
            assert!(rel(derivative_root(r, 3).unwrap(), eta_factor::<f64>() * rf) < 1e-9);
            assert!(rel(derivative_root(r, 4).unwrap(), quartic_factor::<f64>() * rf) < 1e-9);
        }
        assert!(derivative_root(10, 1).is_err());
    }

    #[test]
    fn main_term_tracks_g2() {
        for (r, t) in [(50u64, 100_000_000u64), (200, 10_000_000_000)] {
            for nu in [1u64, r / 3, r / 2, r - 1] {
                let d = (g2_value(r, t, nu as f64, 8)
                    - g2_main_derivative(r, t, nu as f64, 0).unwrap())
                .abs();
                assert!(d <= 2.0 * a_envelope(r, t, 0), "r={r} nu={nu} d={d}");
            }
        }
    }

    #[test]
    fn finite_differences_within_envelope() {
        let (r, t) = (200u64, 10_000_000_000u64);
        for l in 0..=4u32 {
            let res = finite_difference_check(r, t, l).unwrap();
            let c = res / a_envelope(r, t, l);
            assert!(c <= 1.01 * A_ENVELOPE_CONSTANTS[l as usize], "l={l} c={c}");
            assert!(c >= 0.9 * A_ENVELOPE_CONSTANTS[l as usize], "l={l} c={c}");
        }
        // Doubling r at fixed t shrinks the second-difference residual.
        let a = finite_difference_check(100, t, 2).unwrap();
        let b = finite_difference_check(200, t, 2).unwrap();
        assert!(b < a / 20.0, "{a} {b}");
    }

    #[test]
    fn cuts() {
        let cut = build_cut(1000, 1_000_000, CutKind::I, 50.0f64).unwrap();
        let nu0 = 500.0 * 3f64.sqrt();
        assert!((cut.center - 866.025_403_784_438_6).abs() < 1e-9);
        assert_eq!(cut.boundaries, vec![50.0, nu0 - 50.0, nu0 + 50.0]);
        assert_eq!(cut.locate(1.0), Some(0));
        assert_eq!(cut.locate(50.0), Some(0));
        assert_eq!(cut.locate(51.0), Some(1));
        assert_eq!(cut.locate(866.0), Some(2));
        assert_eq!(cut.locate(1000.0), Some(3));
        for nu in 1..=1000u64 {
            let hits = cut
                .intervals()
                .iter()
                .filter(|iv| iv.contains(nu as f64))
                .count();
            assert_eq!(hits, 1);
        }
        let cap = (1.0 - 3f64.sqrt() / 2.0) * 1000.0;
        assert!(matches!(
            build_cut(1000, 1_000_000, CutKind::I, cap),
            Err(Error::InvalidWidth { .. })
        ));
        assert!(build_cut(1000, 1_000_000, CutKind::I, 1.1).is_err());

        let j = build_cut(1000, 1_000_000, CutKind::J, 40.0f64).unwrap();
        assert!((j.center - 297.594).abs() < 1e-3);
        for nu in 0..=1000u64 {
            let hits = j
                .intervals()
                .iter()
                .filter(|iv| iv.contains(nu as f64))
                .count();
            assert_eq!(hits, 1);
        }
        assert!(build_cut(1000, 1_000_000, CutKind::J, 300.0).is_err());
        let err = build_cut(1000, 1_000_000_000_000, CutKind::J, 1.2).unwrap_err();
        assert!(err.to_string().contains("t^(1/100)"));
    }

    #[test]
    fn second_derivative_bound_instance() {
        // max |r nu (4 nu^2 - 3 r^2)| / (r^2 + nu^2)^(9/2) <= 5 / r^5 off I0 and I2.
        for r in [100u64, 1000] {
            let cut = build_cut(r, 1, CutKind::I, 0.05 * r as f64).unwrap();
            let iv = cut.intervals();
            let rf = r as f64;
            for piece in [iv[1], iv[3]] {
                for nu in piece.integers() {
                    let n = nu as f64;
                    let v = (rf * n * (4.0 * n * n - 3.0 * rf * rf)).abs()
                        / (rf * rf + n * n).powf(4.5);
                    assert!(v <= 5.0 / rf.powi(5));
                }
            }
        }
    }

    #[test]
    fn envelopes() {
        let (r, t) = (1000u64, 1_000_000_000_000u64);
        let cut = build_cut(r, t, CutKind::I, 50.0).unwrap();
        let rep = &envelope_check(r, t, &cut).unwrap()[0];
        assert!(rep.min_ratio >= 5.0 * (3f64.sqrt() - 1.0) / 4.0, "{rep:?}");
        assert!(rep.max_ratio <= 5.0 && rep.min_ratio <= rep.max_ratio);

        let rho = j2_cap_factor::<f64>() * r as f64 / 2.0;
        let cut = build_cut(r, t, CutKind::J, rho).unwrap();
        let reps = envelope_check(r, t, &cut).unwrap();
        assert_eq!(reps.len(), 2);
        assert!(reps[0].min_ratio > 0.0 && reps[0].max_ratio < 100.0);
        let j2 = &reps[1];
        assert!(j2.min_ratio > 1.0 && j2.max_ratio < 200.0, "{j2:?}");
    }

    #[test]
    fn partial_sums_partition() {
        let (r, t) = (60u64, 100_000_000u64);
        let all = partial_sum(r, t, r, Parity::Both, &Selection::All, 8).unwrap();
        let odd = partial_sum(r, t, r, Parity::Odd, &Selection::All, 8).unwrap();
        let even = partial_sum(r, t, r, Parity::Even, &Selection::All, 8).unwrap();
        assert!((all - odd - even).norm() < 1e-12);

        let phases = f2_phases(r, t, 8).unwrap();
        let direct: Complex64 = (1..=r as usize).map(|nu| e(phases[nu])).sum();
        assert!((all - direct).norm() < 1e-10);

        let cut = build_cut(r, t, CutKind::I, 3.0).unwrap();
        let pieces: Complex64 = (0..4)
            .map(|i| {
                partial_sum(
                    r,
                    t,
                    r,
                    Parity::Odd,
                    &Selection::Intervals(cut.clone(), vec![i]),
                    8,
                )
                .unwrap()
            })
            .sum();
        assert!((pieces - odd).norm() < 1e-10);
        let none =
            partial_sum(r, t, r, Parity::Odd, &Selection::Intervals(cut, vec![]), 8).unwrap();
        assert_eq!(none, Complex64::new(0.0, 0.0));
        assert!(partial_sum(r, t, r + 1, Parity::Odd, &Selection::All, 8).is_err());
    }

    #[test]
    fn predictions() {
        let (r, t, w) = (30u64, 1e8 as u64, 4.0);
        let (rf, tf) = (r as f64, t as f64);
        let p = gk_prediction(Template::SecondDerivative, r, t, w).unwrap();
        let want = tf.powf(1.0 / 12.0) * rf.sqrt() * w.powf(-1.0 / 6.0)
            + rf * w.powf(-0.25)
            + rf.powf(1.5) * tf.powf(-0.125) * w.powf(-0.25);
        assert!(rel(p, want) < 1e-12);
        let p = gk_prediction(Template::ThirdDerivative, r, t, w).unwrap();
        let want = tf.powf(1.0 / 28.0) * rf.powf(5.0 / 7.0) * w.powf(-1.0 / 14.0)
            + rf * w.powf(-0.125)
            + rf.powf(21.0 / 16.0) * w.powf(-0.125) * tf.powf(-1.0 / 16.0);
        assert!(rel(p, want) < 1e-12);
        let p = gk_prediction(Template::FourthDerivative, r, t, w).unwrap();
        let want = w * tf.powf(1.0 / 60.0) * rf.powf(-0.2)
            + w.powf(15.0 / 16.0)
            + w.powf(49.0 / 64.0) * rf.powf(0.375) * tf.powf(-1.0 / 32.0);
        assert!(rel(p, want) < 1e-12);
    }

    /// Bernoulli polynomials from `B_0 = 1`, `B_n' = n B_{n-1}`, `int_0^1 B_n = 0`.
    fn bernoulli_poly_at_half(n: usize) -> Rational {
        let mut p: Vec<Rational> = vec![Rational::from_integer(1)];
        for k in 1..=n {
            let mut next = vec![Rational::from_integer(0); p.len() + 1];
            for (i, c) in p.iter().enumerate() {
                next[i + 1] = c * Rational::new(k as i64, i as i64 + 1);
            }
            let integral: Rational = next
                .iter()
                .enumerate()
                .map(|(i, c)| c / Rational::from_integer(i as i64 + 1))
                .sum();
            next[0] = -integral;
            p = next;
        }
        let half = Rational::new(1, 2);
        p.iter()
            .rev()
            .fold(Rational::from_integer(0), |acc, c| acc * half + c)
    }

    #[test]
    fn bernoulli_values() {
        for j in 1..=12 {
            assert_eq!(bernoulli_half(j), bernoulli_poly_at_half(j), "j={j}");
            if j % 2 == 1 {
                assert_eq!(em_coefficient(j), Rational::from_integer(0));
            }
        }
        assert_eq!(bernoulli_half(2), Rational::new(-1, 12));
        assert_eq!(em_coefficient(2), Rational::new(-1, 12));
        assert_eq!(bernoulli_numbers(12)[12], Rational::new(-691, 2730));
    }

    #[test]
    fn g2_series_matches_values() {
        let (r, t) = (80u64, 1_000_000_000u64);
        let s = g2_taylor(r, t, 30.0, 8, 4);
        assert!(rel(s.value(), g2_value(r, t, 30.0, 8)) < 1e-12);
        let h = 1e-2;
        let fd = (g2_value(r, t, 30.0 + h, 8) - g2_value(r, t, 30.0 - h, 8)) / (2.0 * h);
        assert!(rel(s.derivative(1), fd) < 1e-5);
    }

    #[test]
    fn euler_maclaurin_residuals() {
        let t = 10_000_000_000u64;
        assert_eq!(euler_maclaurin_f3(50, t, 7, 7, 4).unwrap(), 0.0);
        assert!(euler_maclaurin_f3(50, t, 8, 9, 4).is_err());
        for (r, n) in [(50u64, 4usize), (100, 4), (50, 6), (100, 6)] {
            let cut = build_cut(r, t, CutKind::I, (0.1 * r as f64).max(2.0)).unwrap();
            let iv = cut.intervals();
            for piece in [iv[1], iv[3]] {
                let odd: Vec<u64> = piece.integers().filter(|n| n % 2 == 1).collect();
                let (a, b) = (odd[0], *odd.last().unwrap());
                let res = f3_residual(r, t, a, b, n).unwrap();
                assert!(
                    res <= 10.0 * em_envelope(r, t, n),
                    "r={r} N={n} [{a},{b}] res={res}"
                );
            }
        }
    }
}
