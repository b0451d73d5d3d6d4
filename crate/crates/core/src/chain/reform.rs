//! Second differences of `n_nu`, their Taylor surrogates `G`, `G1`, `G2`,
//! the parity-split accumulations `F`, and the reformulated sum.

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{CompensatedSum, Phase};
use crate::series::factorial;

use super::node::{node, seed_phase, x_series, y_derivative, Node};
use super::sums::{
    check_r, direct_sum, n_form_sum, poisson_rhs, stationary_phase_sum, weighted_sum_with,
};

/// Default Taylor order in `G`, `G1`, `G2`.
pub const DEFAULT_ORDER: usize = 8;

/// Default order of the node-step expansion.
pub const DEFAULT_STEP_ORDER: usize = 6;

pub const MIN_ORDER: usize = 4;
pub const MAX_ORDER: usize = 12;

fn check_order(order: usize) -> Result<()> {
    if !(MIN_ORDER..=MAX_ORDER).contains(&order) {
        return Err(Error::Precondition(format!(
            "order N = {order} outside {MIN_ORDER}..={MAX_ORDER}"
        )));
    }
    Ok(())
}

fn check_interior(r: u64, nu: u64) -> Result<()> {
    if nu == 0 || nu + 1 > r {
        return Err(Error::Precondition(format!(
            "interior node needs 1 <= nu <= r - 1, got nu = {nu}, r = {r}"
        )));
    }
    Ok(())
}

/// `(G, G1, G2)` at one interior node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GValues {
    pub g: f64,
    pub g1: f64,
    pub g2: f64,
}

/// `sum_{i=2}^{N-1} y^(i)(x) / i! (a^i - b^i)`.
fn taylor_difference(t: u64, x: f64, a: f64, b: f64, order: usize) -> f64 {
    let mut acc = CompensatedSum::new();
    for i in 2..order {
        let w = y_derivative(t, x, i) / factorial::<f64>(i);
        acc.add(w * (a.powi(i as i32) - b.powi(i as i32)));
    }
    acc.value()
}

/// `x_{nu+d} - x_nu` from the closed form.
fn node_step(r: u64, t: u64, nu: u64, forward: bool) -> f64 {
    let other = if forward { nu + 1 } else { nu - 1 };
    node(r, t, other).x - node(r, t, nu).x
}

/// `G(nu)`: Taylor surrogate built on the anchors `m_{nu +- 1}`.
pub fn g_value(r: u64, t: u64, nu: u64, order: usize) -> f64 {
    let here = node(r, t, nu);
    let up = node(r, t, nu + 1);
    let down = node(r, t, nu - 1);
    let a = (up.x - here.x) - up.lambda;
    let b = (down.x - here.x) - down.lambda;
    taylor_difference(t, here.x, a, b, order)
}

/// `G1(nu)`: the same surrogate on the exact points `x_{nu +- 1}`.
pub fn g1_value(r: u64, t: u64, nu: u64, order: usize) -> f64 {
    let x = node(r, t, nu).x;
    taylor_difference(
        t,
        x,
        node_step(r, t, nu, true),
        node_step(r, t, nu, false),
        order,
    )
}

/// `G2(nu)` for real `nu`: odd orders only, node step from the derivative series.
pub fn g2_value(r: u64, t: u64, nu: f64, order: usize) -> f64 {
    let xs = x_series(r, t, nu, order);
    let x = xs.value();
    let mut acc = CompensatedSum::new();
    for i in (3..order).step_by(2) {
        let step: f64 = (1..=order - i).map(|k| xs.coeff(k)).sum();
        acc.add(2.0 * y_derivative(t, x, i) / factorial::<f64>(i) * step.powi(i as i32));
    }
    acc.value()
}

/// `G`, `G1`, `G2` at an interior node.
pub fn g_funcs(r: u64, t: u64, nu: u64, order: usize) -> Result<GValues> {
    check_r(r, t)?;
    check_order(order)?;
    check_interior(r, nu)?;
    Ok(GValues {
        g: g_value(r, t, nu, order),
        g1: g1_value(r, t, nu, order),
        g2: g2_value(r, t, nu as f64, order),
    })
}

/// `|x_{nu+d} - x_nu - sum_{k=1}^{M-1} x^(k) d^k / k!|` for `d = +-1`.
pub fn node_step_residual(r: u64, t: u64, nu: u64, forward: bool, step_order: usize) -> f64 {
    let xs = x_series(r, t, nu as f64, step_order);
    let d: f64 = if forward { 1.0 } else { -1.0 };
    let approx: f64 = (1..step_order)
        .map(|k| xs.coeff(k) * d.powi(k as i32))
        .sum();
    (node_step(r, t, nu, forward) - approx).abs()
}

/// Parity-split accumulation: `F(0) = s0`, `F(1) = s1`, `F(nu+1) = F(nu-1) + inc(nu)`.
fn accumulate(r: u64, seeds: [f64; 2], inc: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(r as usize + 1);
    let mut chains = [CompensatedSum::new(), CompensatedSum::new()];
    chains[0].add(seeds[0]);
    chains[1].add(seeds[1]);
    for nu in 0..=r as usize {
        if nu >= 2 {
            chains[nu % 2].add(inc[nu - 1]);
        }
        out.push(chains[nu % 2].value());
    }
    out
}

fn increments(r: u64, f: impl Fn(u64) -> f64) -> Vec<f64> {
    // Index nu holds the increment for nu in 1..=r-1; index 0 is unused.
    (0..r).map(|nu| if nu == 0 { 0.0 } else { f(nu) }).collect()
}

/// `F2(nu)` for `nu = 0..=r`.
pub fn f2_profile(r: u64, t: u64, order: usize) -> Result<Vec<f64>> {
    check_r(r, t)?;
    check_order(order)?;
    let inc = increments(r, |nu| g2_value(r, t, nu as f64, order));
    Ok(accumulate(r, [node(r, t, 0).n, node(r, t, 1).n], &inc))
}

/// `r F(nu)` modulo one with exact seeds `r n_0`, `r n_1`.
fn profile_phases(r: u64, t: u64, inc: &[f64]) -> Vec<Phase> {
    let rf = r as f64;
    let seeds = [seed_phase(r, t), node(r, t, 1).rn_phase()];
    let scaled: Vec<f64> = inc.iter().map(|g| rf * g).collect();
    let acc = accumulate(r, [0.0, 0.0], &scaled);
    acc.iter()
        .enumerate()
        .map(|(nu, v)| seeds[nu % 2] + Phase::wrap(*v))
        .collect()
}

/// `r F2(nu)` modulo one.
pub fn f2_phases(r: u64, t: u64, order: usize) -> Result<Vec<Phase>> {
    check_r(r, t)?;
    check_order(order)?;
    let inc = increments(r, |nu| g2_value(r, t, nu as f64, order));
    Ok(profile_phases(r, t, &inc))
}

/// `omega_nu = r (F(nu) - F1(nu))` modulo one.
pub fn omega_coeffs(r: u64, t: u64, order: usize) -> Result<Vec<Phase>> {
    check_r(r, t)?;
    check_order(order)?;
    let rf = r as f64;
    let inc = increments(r, |nu| {
        rf * (g_value(r, t, nu, order) - g1_value(r, t, nu, order))
    });
    Ok(accumulate(r, [0.0, 0.0], &inc)
        .into_iter()
        .map(Phase::wrap)
        .collect())
}

/// Frozen bound on [`parity_total_variation`] `/ ln r`.
///
/// Observed 4.81, 5.15, 5.51, 5.69 at `r = 16, 64, 256, 1024` with
/// `t = min(r^8, 10^12)`; the margin covers the slow approach to the limit.
pub const OMEGA_TV_CONSTANT: f64 = 8.0;

/// `sum_nu |e(omega_nu) - e(omega_{nu-1})|`.
pub fn total_variation(omegas: &[Phase]) -> f64 {
    omegas
        .windows(2)
        .map(|w| (crate::numeric::e(w[1]) - crate::numeric::e(w[0])).norm())
        .sum()
}

/// `sum_nu |e(omega_nu) - e(omega_{nu-2})|`: variation along each parity chain.
pub fn parity_total_variation(omegas: &[Phase]) -> f64 {
    omegas
        .windows(3)
        .map(|w| (crate::numeric::e(w[2]) - crate::numeric::e(w[0])).norm())
        .sum()
}

/// `sum_nu e(-1/8) t^(1/4) (r^2+nu^2)^(-3/4) e(omega_nu) e(r F2(nu))`.
pub fn reformulated_sum(r: u64, t: u64, order: usize) -> Result<Complex64> {
    let omega = omega_coeffs(r, t, order)?;
    let f2 = f2_phases(r, t, order)?;
    let phases: Vec<Phase> = omega.iter().zip(&f2).map(|(&a, &b)| a + b).collect();
    Ok(weighted_sum_with(r, t, &phases))
}

/// `-(nu/r)(m_{nu+1} - m_{nu-1})` as an exact fraction.
pub fn taylor_rational_part(r: u64, t: u64, nu: u64) -> Result<Ratio<i128>> {
    check_r(r, t)?;
    check_interior(r, nu)?;
    let up = node(r, t, nu + 1);
    let down = node(r, t, nu - 1);
    let m_up = Ratio::new(up.m_num as i128, (nu + 1) as i128);
    let m_down = Ratio::new(down.m_num as i128, (nu - 1).max(1) as i128);
    Ok(-(m_up - m_down) * Ratio::new(nu as i128, r as i128))
}

/// `n_{nu+1} - n_{nu-1}` via `(m_{nu-1}^2 - m_{nu+1}^2) / (n_{nu+1} + n_{nu-1})`.
fn n_second_difference(up: &Node, down: &Node) -> f64 {
    let du = up.nu as i128;
    let dd = down.nu.max(1) as i128;
    let ku = up.m_num as i128;
    let kd = down.m_num as i128;
    // m_d^2 - m_u^2 = (kd du - ku dd)(kd du + ku dd) / (dd du)^2
    let diff = kd * du - ku * dd;
    let sum = kd * du + ku * dd;
    let den = (dd * du) as f64;
    (diff as f64 / den) * (sum as f64 / den) / (up.n + down.n)
}

/// `|n_{nu+1} - n_{nu-1} - rational part - G(nu)|`.
pub fn taylor_step_check(r: u64, t: u64, nu: u64, order: usize) -> Result<f64> {
    check_order(order)?;
    let rational = taylor_rational_part(r, t, nu)?;
    let rational = *rational.numer() as f64 / *rational.denom() as f64;
    let up = node(r, t, nu + 1);
    let down = node(r, t, nu - 1);
    let diff = n_second_difference(&up, &down);
    Ok((diff - rational - g_value(r, t, nu, order)).abs())
}

/// The representations of one sum and their pairwise distances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainResiduals {
    pub r: u64,
    pub t: u64,
    pub order: usize,
    pub direct: Complex64,
    /// `None` when the quadrature side was not requested.
    pub poisson: Option<Complex64>,
    pub stationary: Complex64,
    pub n_form: Complex64,
    pub reformulated: Complex64,
    /// `"a-b" -> |a - b|` for every unordered pair, keys in sorted order.
    pub gaps: BTreeMap<String, f64>,
}

impl ChainResiduals {
    pub fn gap(&self, a: &str, b: &str) -> Option<f64> {
        let key = if a <= b {
            format!("{a}-{b}")
        } else {
            format!("{b}-{a}")
        };
        self.gaps.get(&key).copied()
    }
}

/// Evaluates every representation at `(r, t)`.
pub fn chain_residuals(r: u64, t: u64, order: usize, with_poisson: bool) -> Result<ChainResiduals> {
    let direct = direct_sum(r, t)?;
    let poisson = if with_poisson {
        Some(poisson_rhs(r, t)?.value)
    } else {
        None
    };
    let stationary = stationary_phase_sum(r, t)?;
    let n_form = n_form_sum(r, t)?;
    let reformulated = reformulated_sum(r, t, order)?;
    let mut named = vec![
        ("direct", direct),
        ("stationary", stationary),
        ("n_form", n_form),
        ("reformulated", reformulated),
    ];
    if let Some(p) = poisson {
        named.push(("poisson", p));
    }
    let mut gaps = BTreeMap::new();
    for (i, (a, za)) in named.iter().enumerate() {
        for (b, zb) in &named[i + 1..] {
            let key = if a <= b {
                format!("{a}-{b}")
            } else {
                format!("{b}-{a}")
            };
            gaps.insert(key, (za - zb).norm());
        }
    }
    Ok(ChainResiduals {
        r,
        t,
        order,
        direct,
        poisson,
        stationary,
        n_form,
        reformulated,
        gaps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g_funcs_envelopes() {
        for &(r, t) in &[
            (20u64, 1_000_000u64),
            (50, 100_000_000),
            (100, 10_000_000_000),
        ] {
            let rf = r as f64;
            let mut worst = 0.0f64;
            for nu in 1..r {
                let g = g_funcs(r, t, nu, DEFAULT_ORDER).unwrap();
                worst = worst.max((g.g - g.g1).abs() * rf * nu as f64);
                let b = (rf * rf + (nu * nu) as f64).powf(2.5);
                let main = -rf * nu as f64 * (t as f64).sqrt() / b;
                let scale = (t as f64).sqrt() / rf.powi(4);
                assert!((g.g2 - main).abs() <= scale, "nu={nu}");
            }
            assert!(worst < 4.0, "r={r}: {worst}");
        }
        assert!(g_funcs(10, 10_000, 0, 8).is_err());
        assert!(g_funcs(10, 10_000, 10, 8).is_err());
        assert!(g_funcs(10, 10_000, 3, 13).is_err());
    }

    #[test]
    fn g2_order_stability() {
        let (r, t) = (50u64, 100_000_000u64);
        let scale = (t as f64).sqrt();
        for n in 5..12usize {
            for nu in [3u64, 17, 31, 49] {
                let d = (g2_value(r, t, nu as f64, n + 1) - g2_value(r, t, nu as f64, n)).abs();
                assert!(
                    d <= 50.0 * scale / (r as f64).powi(n as i32),
                    "N={n} nu={nu}: {d}"
                );
            }
        }
    }

    #[test]
    fn node_step_expansion() {
        let (r, t) = (80u64, 1_000_000_000u64);
        for nu in [1u64, 20, 55, 79] {
            for fwd in [true, false] {
                let res = node_step_residual(r, t, nu, fwd, DEFAULT_STEP_ORDER);
                assert!(res <= (t as f64).sqrt() / (r as f64).powi(DEFAULT_STEP_ORDER as i32));
            }
        }
    }

    #[test]
    fn profile_seeds_and_steps() {
        let (r, t) = (12u64, 1_000_000u64);
        let f2 = f2_profile(r, t, DEFAULT_ORDER).unwrap();
        assert_eq!(f2.len(), 13);
        assert_eq!(f2[0], 1000.0);
        assert_eq!(f2[1], node(r, t, 1).n);
        assert!((f2[3] - (node(r, t, 1).n + g2_value(r, t, 2.0, DEFAULT_ORDER))).abs() < 1e-12);
        for nu in 1..r as usize {
            let step = f2[nu + 1] - f2[nu - 1];
            assert!((step - g2_value(r, t, nu as f64, DEFAULT_ORDER)).abs() < 1e-9);
        }
        let phases = f2_phases(r, t, DEFAULT_ORDER).unwrap();
        for nu in 0..=r as usize {
            let d = (phases[nu] - Phase::wrap(r as f64 * f2[nu]))
                .centered()
                .abs();
            assert!(d < 1e-9);
        }
    }

    #[test]
    fn omega_seeds_and_steps() {
        let (r, t) = (64u64, 1_000_000_000_000u64);
        let om = omega_coeffs(r, t, DEFAULT_ORDER).unwrap();
        assert_eq!(om[0].value(), 0.0);
        assert_eq!(om[1].value(), 0.0);
        for nu in 2..=r as usize {
            let step = (om[nu] - om[nu - 2]).centered().abs();
            assert!(step <= 4.0 / (nu - 1) as f64, "nu={nu}: {step}");
        }
        let tv = total_variation(&om);
        assert!(tv.is_finite());
    }

    #[test]
    fn step_check_orders() {
        let (r, t) = (100u64, 100_000_000u64);
        let sqrt_t = (t as f64).sqrt();
        for nu in [1u64, 10, 50, 99] {
            let r4 = taylor_step_check(r, t, nu, 4).unwrap();
            let r6 = taylor_step_check(r, t, nu, 6).unwrap();
            assert!(r4 <= 5.0 * sqrt_t / (r as f64).powi(4), "nu={nu}: {r4}");
            assert!(r6 <= 5.0 * sqrt_t / (r as f64).powi(6), "nu={nu}: {r6}");
            let ratio = r4 / r6;
            let r2 = (r * r) as f64;
            assert!(
                ratio > r2 / 20.0 && ratio < r2 * 20.0,
                "nu={nu}: ratio {ratio}"
            );
        }
    }

    #[test]
    fn rational_part_denominators() {
        let (r, t) = (30u64, 10_000_000u64);
        for nu in 1..r {
            let q = taylor_rational_part(r, t, nu).unwrap() * Ratio::from_integer(r as i128);
            let lcm = if nu == 1 {
                2
            } else {
                ((nu + 1) * (nu - 1)) as i128
            };
            assert!((q * Ratio::from_integer(lcm)).is_integer());
        }
        // r times the rational part is not an integer in general.
        let non_integral = (1..r)
            .filter(|&nu| {
                !(taylor_rational_part(r, t, nu).unwrap() * Ratio::from_integer(r as i128))
                    .is_integer()
            })
            .count();
        assert!(non_integral > 0);
    }

    #[test]
    fn residual_map_is_symmetric() {
        let c = chain_residuals(8, 1_000_000, DEFAULT_ORDER, true).unwrap();
        assert_eq!(c.gaps.len(), 10);
        for v in c.gaps.values() {
            assert!(v.is_finite() && *v >= 0.0);
        }
        assert_eq!(c.gap("direct", "stationary"), c.gap("stationary", "direct"));
        let d = c.gap("direct", "poisson").unwrap();
        assert!(d < 2.0, "{d}");
    }

    #[test]
    fn omega_variation_along_chains() {
        for r in [16u64, 64] {
            let t = (r as f64).powi(8).min(1e12) as u64;
            let om = omega_coeffs(r, t, DEFAULT_ORDER).unwrap();
            let lr = (r as f64).ln();
            assert!(parity_total_variation(&om) / lr <= OMEGA_TV_CONSTANT);
            // Two consecutive coefficients sit on different chains.
            assert!(total_variation(&om) <= 2.0 * r as f64);
        }
    }
}
