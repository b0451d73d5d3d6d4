//! Oscillatory integrals `int_0^L e(r sqrt(t - x^2) + nu x) dx`.
//!
//! The constant `e(r sqrt t)` is factored out so the remaining phase
//! `g(x) = -r x^2 / (y + sqrt t) + nu x` stays small near the origin and is
//! free of cancellation. The interval is split at the stationary point and
//! marched in panels about one local wavelength wide, each integrated by
//! 15-point Gauss-Kronrod and bisected when its error estimate is too large.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numeric::{e, isqrt, Phase};

use super::node::{node, seed_phase};

/// Absolute error target for one integral.
pub const QUAD_TOLERANCE: f64 = 1e-6;

const MAX_DEPTH: u32 = 30;

pub(crate) const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

pub(crate) const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Value of an integral with its accumulated error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: Complex64,
    pub error: f64,
}

struct Integrand {
    r: f64,
    nu: f64,
    sqrt_t: f64,
    t: f64,
}

impl Integrand {
    fn phase(&self, x: f64) -> f64 {
        let y = (self.t - x * x).sqrt();
        -self.r * x * x / (y + self.sqrt_t) + self.nu * x
    }

    fn eval(&self, x: f64) -> Complex64 {
        e(Phase::wrap(self.phase(x)))
    }

    /// Local frequency scale `max(|g'|, sqrt|g''|)`.
    fn frequency(&self, x: f64) -> f64 {
        let y = (self.t - x * x).sqrt();
        let g1 = (self.nu - self.r * x / y).abs();
        let g2 = (self.r * self.t / (y * y * y)).sqrt();
        g1.max(g2)
    }
}

fn gk15(f: &Integrand, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f.eval(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let pair = f.eval(c - dx) + f.eval(c + dx);
        kronrod += pair * WGK[j];
        if j % 2 == 1 {
            gauss += pair * WG[j / 2];
        }
    }
    let err = ((kronrod - gauss) * h).norm();
    (kronrod * h, err)
}

fn adaptive(f: &Integrand, a: f64, b: f64, tol: f64, depth: u32, acc: &mut (Complex64, f64, bool)) {
    let (v, err) = gk15(f, a, b);
    if err <= tol || depth >= MAX_DEPTH {
        if err > tol {
            acc.2 = true;
        }
        acc.0 += v;
        acc.1 += err;
        return;
    }
    let m = 0.5 * (a + b);
    adaptive(f, a, m, 0.5 * tol, depth + 1, acc);
    adaptive(f, m, b, 0.5 * tol, depth + 1, acc);
}

fn march(f: &Integrand, a: f64, b: f64, tol_density: f64, acc: &mut (Complex64, f64, bool)) {
    let mut x = a;
    while x < b {
        // Probe the frequency at both ends of a trial step so the panel
        // never straddles a sharp rise in g''.
        let w0 = 1.0 / f.frequency(x);
        let w1 = 1.0 / f.frequency((x + w0).min(b));
        let w = w0.min(w1).max(1e-9 * (b - a));
        let next = if x + 1.5 * w >= b { b } else { x + w };
        adaptive(f, x, next, tol_density * (next - x), 0, acc);
        x = next;
    }
}

/// Upper limit `floor(sqrt(t / 2))` of the integral.
pub fn upper_limit(t: u64) -> u64 {
    isqrt(t / 2)
}

/// `int_0^{floor(sqrt(t/2))} e(r sqrt(t - x^2) + nu x) dx`.
pub fn oscillatory_integral(r: u64, t: u64, nu: u64) -> Result<Quadrature> {
    check_integral(r, t, nu)?;
    let lim = upper_limit(t) as f64;
    let f = Integrand {
        r: r as f64,
        nu: nu as f64,
        sqrt_t: (t as f64).sqrt(),
        t: t as f64,
    };
    let tol_density = QUAD_TOLERANCE / lim.max(1.0);
    let mut acc = (Complex64::new(0.0, 0.0), 0.0, false);
    let xs = node(r, t, nu).x;
    if xs > 0.0 && xs < lim {
        march(&f, 0.0, xs, tol_density, &mut acc);
        march(&f, xs, lim, tol_density, &mut acc);
    } else {
        march(&f, 0.0, lim, tol_density, &mut acc);
    }
    let (value, error, failed) = acc;
    if failed && error > QUAD_TOLERANCE {
        return Err(Error::Quadrature { estimate: error });
    }
    let value = value * e(seed_phase(r, t));
    Ok(Quadrature { value, error })
}

pub(crate) fn check_integral(r: u64, t: u64, nu: u64) -> Result<()> {
    crate::lattice::check_t(t)?;
    if r == 0 || 4 * r * r > t {
        return Err(Error::Precondition(format!(
            "integral needs 1 <= r <= sqrt(t)/2, got r = {r}, t = {t}"
        )));
    }
    if nu > r {
        return Err(Error::Precondition(format!(
            "frequency nu = {nu} exceeds r = {r}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Plain composite midpoint rule with a fixed, very fine grid.
    fn brute(r: u64, t: u64, nu: u64, steps: usize) -> Complex64 {
        let lim = upper_limit(t) as f64;
        let h = lim / steps as f64;
        let tf = t as f64;
        let mut re = 0.0;
        let mut im = 0.0;
        for k in 0..steps {
            let x = (k as f64 + 0.5) * h;
            let ph = std::f64::consts::TAU * (r as f64 * (tf - x * x).sqrt() + nu as f64 * x);
            re += ph.cos();
            im += ph.sin();
        }
        Complex64::new(re * h, im * h)
    }

    #[test]
    fn matches_fine_midpoint_rule() {
        for &(r, t, nu) in &[(2u64, 10_000u64, 1u64), (3, 40_000, 0), (5, 90_000, 5)] {
            let q = oscillatory_integral(r, t, nu).unwrap();
            let b = brute(r, t, nu, 4_000_000);
            assert!(
                (q.value - b).norm() < 1e-4,
                "{r} {t} {nu}: {} vs {}",
                q.value,
                b
            );
            assert!(q.error < QUAD_TOLERANCE);
        }
    }

    #[test]
    fn preconditions() {
        let q = oscillatory_integral(1, 10_000, 0).unwrap();
        assert!(q.value.norm().is_finite());
        assert!(oscillatory_integral(60, 10_000, 0).is_err());
        assert!(oscillatory_integral(5, 10_000, 6).is_err());
    }

    #[test]
    fn gk_rule_linear_phase() {
        // Linear phase only: int_0^2 e(x/4) dx in closed form.
        let f = Integrand {
            r: 0.0,
            nu: 0.25,
            sqrt_t: 100.0,
            t: 10_000.0,
        };
        let (v, err) = gk15(&f, 0.0, 2.0);
        let exact =
            Complex64::new(0.0, -1.0) / std::f64::consts::TAU * 4.0 * (e(Phase::wrap(0.5)) - 1.0);
        assert!(
            (v - exact).norm() < 1e-14 && err < 1e-11,
            "{} {err}",
            (v - exact).norm()
        );
    }
}
