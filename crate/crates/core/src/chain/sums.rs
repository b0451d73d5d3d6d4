//! The exponential sum and its first three representations.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{check_t, octant_limit};
use crate::numeric::{e, frac_sqrt, isqrt, phase_of, ComplexSum, Phase};

use super::node::node;
use super::quadrature::{check_integral, oscillatory_integral, Quadrature};

const CHUNK: u64 = 4096;

/// Sign of the `e(s/8)` factor in the stationary-phase terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EighthSign {
    #[default]
    Minus,
    Plus,
}

impl EighthSign {
    pub fn factor(self) -> Complex64 {
        match self {
            EighthSign::Minus => e(Phase::wrap(-0.125)),
            EighthSign::Plus => e(Phase::wrap(0.125)),
        }
    }
}

pub(crate) fn check_r(r: u64, t: u64) -> Result<()> {
    check_t(t)?;
    if r == 0 || r > isqrt(t) {
        return Err(Error::Precondition(format!(
            "frequency r = {r} must satisfy 1 <= r <= sqrt(t) for t = {t}"
        )));
    }
    Ok(())
}

/// `sum_{m=0}^{floor(sqrt(t/2))} e(r sqrt(t - m^2)) / r`.
pub fn direct_sum(r: u64, t: u64) -> Result<Complex64> {
    check_r(r, t)?;
    let limit = octant_limit(t);
    let parts: Vec<ComplexSum> = (0..=limit / CHUNK)
        .into_par_iter()
        .map(|c| {
            let mut acc = ComplexSum::new();
            let lo = c * CHUNK;
            for m in lo..=(lo + CHUNK - 1).min(limit) {
                acc.add(e(phase_of(r, &frac_sqrt::<f64>(t - m * m))));
            }
            acc
        })
        .collect();
    let mut total = ComplexSum::new();
    for p in &parts {
        total.merge(p);
    }
    Ok(total.value() / r as f64)
}

/// `(1/r) sum_{nu=0}^{r} int_0^{floor(sqrt(t/2))} e(r sqrt(t - x^2) + nu x) dx`.
pub fn poisson_rhs(r: u64, t: u64) -> Result<Quadrature> {
    check_integral(r, t, 0)?;
    let parts: Vec<Quadrature> = (0..=r)
        .into_par_iter()
        .map(|nu| oscillatory_integral(r, t, nu))
        .collect::<Result<_>>()?;
    let mut total = ComplexSum::new();
    let mut error = 0.0;
    for q in &parts {
        total.add(q.value);
        error += q.error;
    }
    let rf = r as f64;
    Ok(Quadrature {
        value: total.value() / rf,
        error: error / rf,
    })
}

/// Weight `t^(1/4) (r^2 + nu^2)^(-3/4)` of node `nu`.
pub fn node_weight(r: u64, t: u64, nu: u64) -> f64 {
    let b = (r * r + nu * nu) as f64;
    (t as f64).powf(0.25) * b.powf(-0.75)
}

fn weighted_sum(
    r: u64,
    t: u64,
    sign: EighthSign,
    phase: impl Fn(u64) -> Phase + Sync,
) -> Complex64 {
    let terms: Vec<Complex64> = (0..=r)
        .into_par_iter()
        .map(|nu| e(phase(nu)) * node_weight(r, t, nu))
        .collect();
    let mut acc = ComplexSum::new();
    for z in terms {
        acc.add(z);
    }
    acc.value() * sign.factor()
}

/// `sum_nu e(-1/8) t^(1/4) (r^2+nu^2)^(-3/4) e(r y_nu + nu x_nu)`.
///
/// The phase is `sqrt(t (r^2 + nu^2))` modulo one, which is
/// `r y_nu + nu lambda_nu` because `nu m_nu` is an integer.
pub fn stationary_phase_sum(r: u64, t: u64) -> Result<Complex64> {
    stationary_phase_sum_signed(r, t, EighthSign::Minus)
}

pub fn stationary_phase_sum_signed(r: u64, t: u64, sign: EighthSign) -> Result<Complex64> {
    check_r(r, t)?;
    Ok(weighted_sum(r, t, sign, |nu| {
        node(r, t, nu).stationary_phase()
    }))
}

/// As [`stationary_phase_sum`] with phase `r n_nu`.
pub fn n_form_sum(r: u64, t: u64) -> Result<Complex64> {
    check_r(r, t)?;
    Ok(weighted_sum(r, t, EighthSign::Minus, |nu| {
        node(r, t, nu).rn_phase()
    }))
}

/// `|r n_nu - r (y_nu + (nu/r) lambda_nu)|` reduced modulo one.
pub fn n_phase_gap(r: u64, t: u64, nu: u64) -> f64 {
    let nd = node(r, t, nu);
    (nd.rn_phase() - nd.stationary_phase()).centered().abs()
}

pub(crate) fn weighted_sum_with(r: u64, t: u64, phases: &[Phase]) -> Complex64 {
    weighted_sum(r, t, EighthSign::Minus, |nu| phases[nu as usize])
}
