//! Stationary points, rational anchors and analytic derivatives.
//!
//! For frequency `nu` the phase `r sqrt(t - x^2) + nu x` is stationary at
//!
//! ```text
//! x_nu = nu sqrt(t) / sqrt(r^2 + nu^2),   y_nu = r sqrt(t) / sqrt(r^2 + nu^2)
//! ```
//!
//! and `r y_nu + nu x_nu = sqrt(t (r^2 + nu^2))`. The anchor `m_nu` is the
//! largest fraction with denominator `nu` not exceeding `x_nu`; it is held as
//! an exact numerator so that `n_nu = sqrt(t - m_nu^2)` can be phased exactly.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::numeric::{frac_sqrt, frac_sqrt_wide, isqrt_u128, Phase};
use crate::series::Taylor;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub r: u64,
    pub t: u64,
    pub nu: u64,
    pub x: f64,
    pub y: f64,
    /// Numerator of `m_nu`; the denominator is `nu` (and `m_0 = 0`).
    pub m_num: u64,
    pub m: f64,
    /// `x_nu - m_nu`, in `[0, 1/nu)`.
    pub lambda: f64,
    /// `sqrt(t - m_nu^2)`.
    pub n: f64,
}

/// Builds node `nu` of the frequency-`r` sum.
pub fn node(r: u64, t: u64, nu: u64) -> Node {
    let rf = r as f64;
    let nuf = nu as f64;
    let sqrt_t = (t as f64).sqrt();
    let norm = (rf * rf + nuf * nuf).sqrt();
    let x = nuf * sqrt_t / norm;
    let y = rf * sqrt_t / norm;
    if nu == 0 {
        return Node {
            r,
            t,
            nu,
            x: 0.0,
            y: sqrt_t,
            m_num: 0,
            m: 0.0,
            lambda: 0.0,
            n: sqrt_t,
        };
    }
    // nu x_nu = sqrt(A / B) with A = nu^4 t, B = r^2 + nu^2, so
    // floor(nu x_nu) = isqrt(floor(A / B)).
    let (a, b) = anchor_terms(r, t, nu);
    let k = isqrt_u128(a / b);
    // lambda = (sqrt(A/B) - k) / nu = (A - k^2 B) / (nu B (sqrt(A/B) + k)).
    let excess = a - k * k * b;
    let lambda = excess as f64 / (nuf * b as f64 * (nuf * x + k as f64));
    let m = k as f64 / nuf;
    let n_sq = nu as u128 * nu as u128 * t as u128 - k * k;
    let n = (n_sq as f64).sqrt() / nuf;
    Node {
        r,
        t,
        nu,
        x,
        y,
        m_num: k as u64,
        m,
        lambda,
        n,
    }
}

fn anchor_terms(r: u64, t: u64, nu: u64) -> (u128, u128) {
    let nu2 = nu as u128 * nu as u128;
    (nu2 * nu2 * t as u128, r as u128 * r as u128 + nu2)
}

impl Node {
    /// `r y_nu + nu x_nu = sqrt(t (r^2 + nu^2))` modulo one.
    pub fn stationary_phase(&self) -> Phase {
        let rad =
            self.t as u128 * (self.r as u128 * self.r as u128 + self.nu as u128 * self.nu as u128);
        Phase::wrap(frac_sqrt_wide(rad))
    }

    /// `r n_nu` modulo one, from `n_nu = sqrt(nu^2 t - k^2) / nu`.
    pub fn rn_phase(&self) -> Phase {
        let d = self.nu.max(1) as u128;
        let rad = d * d * self.t as u128 - self.m_num as u128 * self.m_num as u128;
        let s = isqrt_u128(rad);
        let f = frac_sqrt_wide(rad);
        let r = self.r as u128;
        let whole = ((r * s) % d) as f64 / d as f64;
        Phase::wrap(whole + self.r as f64 * f / d as f64)
    }

    /// `t - m_nu^2` as an exact fraction `(num, den)`.
    pub fn anchor_radicand(&self) -> (u128, u128) {
        let d = self.nu.max(1) as u128;
        (
            d * d * self.t as u128 - self.m_num as u128 * self.m_num as u128,
            d * d,
        )
    }
}

/// `r n_0 = r sqrt(t)` modulo one, exact split.
pub fn seed_phase(r: u64, t: u64) -> Phase {
    let root = frac_sqrt::<f64>(t);
    Phase::wrap(r as f64 * root.f)
}

/// Taylor coefficients of `x(nu + h)` in `h`, order `order`.
pub fn x_series(r: u64, t: u64, nu: f64, order: usize) -> Taylor {
    let v = Taylor::variable(nu, order);
    let denom = (&v * &v).add_scalar((r * r) as f64).powf(-0.5);
    (&v * &denom).scale((t as f64).sqrt())
}

/// `d^k x_nu / d nu^k` for `k = 0..=kmax`.
pub fn x_derivatives(r: u64, t: u64, nu: f64, kmax: usize) -> Vec<f64> {
    let s = x_series(r, t, nu, kmax);
    (0..=kmax).map(|k| s.derivative(k)).collect()
}

/// Polynomials `Q_i` with `d^i/dxi^i sqrt(1 - xi^2) = Q_i(xi) (1 - xi^2)^(1/2 - i)`,
/// ascending coefficients.
pub fn eta_poly(i: usize) -> &'static [f64] {
    static TABLE: OnceLock<Vec<Vec<f64>>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut polys = vec![vec![1.0]];
        for j in 0..24usize {
            let q = &polys[j];
            // Q_{j+1} = Q_j' (1 - xi^2) + (2j - 1) xi Q_j
            let mut next = vec![0.0; q.len() + 2];
            for (p, &c) in q.iter().enumerate().skip(1) {
                next[p - 1] += p as f64 * c;
                next[p + 1] -= p as f64 * c;
            }
            for (p, &c) in q.iter().enumerate() {
                next[p + 1] += (2.0 * j as f64 - 1.0) * c;
            }
            while next.len() > 1 && *next.last().unwrap() == 0.0 {
                next.pop();
            }
            polys.push(next);
        }
        polys
    });
    &table[i]
}

/// Highest derivative order supported by [`y_derivative`].
pub const MAX_Y_ORDER: usize = 24;

/// `y^(i)(x)` for `y = sqrt(t - x^2)`.
pub fn y_derivative(t: u64, x: f64, i: usize) -> f64 {
    assert!(i <= MAX_Y_ORDER);
    let sqrt_t = (t as f64).sqrt();
    let xi = x / sqrt_t;
    let q: f64 = eta_poly(i).iter().rev().fold(0.0, |acc, &c| acc * xi + c);
    let base = 1.0 - xi * xi;
    sqrt_t.powi(1 - i as i32) * q * base.powf(0.5 - i as f64)
}

/// `y^(i)(x(nu + h))` as a series in `h`, given the series of `x`.
pub fn y_derivative_along(t: u64, x: &Taylor, i: usize) -> Taylor {
    let sqrt_t = (t as f64).sqrt();
    let xi = x.scale(1.0 / sqrt_t);
    let q = xi.compose_poly(eta_poly(i));
    let base = (-&(&xi * &xi)).add_scalar(1.0).powf(0.5 - i as f64);
    (&q * &base).scale(sqrt_t.powi(1 - i as i32))
}
