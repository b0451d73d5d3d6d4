//! Integer square roots, phases mod 1, the saw-tooth and compensated sums.
//!
//! Everything downstream needs `r * sqrt(n)` modulo one for `n` up to about
//! `10^18`. A plain `f64` square root loses the fractional part entirely at
//! that size, so roots are split into an exact integer part and a fractional
//! part computed from an exact integer numerator:
//!
//! ```text
//! sqrt(n) - s = (n - s^2) / (s + sqrt(n)),   s = isqrt(n)
//! ```
//!
//! Only the denominator carries rounding error, and it is a relative error,
//! so the fractional part is good to a couple of ulps of 1.

use num_complex::Complex;

use crate::scalar::Scalar;

/// Largest `t` accepted by counting and summation routines.
pub const T_MAX: u64 = 1_000_000_000_000;

/// `floor(sqrt(n))`, exact for every `u64`.
pub fn isqrt(n: u64) -> u64 {
    if n < 2 {
        return n;
    }
    // Newton from above, seeded with a power of two that is >= sqrt(n).
    let bits = 64 - n.leading_zeros();
    let mut x = 1u64 << bits.div_ceil(2);
    loop {
        let y = (x + n / x) >> 1;
        if y >= x {
            break;
        }
        x = y;
    }
    // Final correction; Newton from above lands on the floor, this keeps the
    // contract explicit.
    while (x as u128) * (x as u128) > n as u128 {
        x -= 1;
    }
    while ((x + 1) as u128) * ((x + 1) as u128) <= n as u128 {
        x += 1;
    }
    x
}

/// `floor(sqrt(n))` for 128-bit radicands.
pub fn isqrt_u128(n: u128) -> u128 {
    if n <= u64::MAX as u128 {
        return isqrt(n as u64) as u128;
    }
    let bits = 128 - n.leading_zeros();
    let mut x = 1u128 << bits.div_ceil(2);
    loop {
        let y = (x + n / x) >> 1;
        if y >= x {
            break;
        }
        x = y;
    }
    while x.checked_mul(x).is_none_or(|sq| sq > n) {
        x -= 1;
    }
    x
}

/// Fractional part of `sqrt(n)` for radicands that may exceed `u64`.
pub fn frac_sqrt_wide(n: u128) -> f64 {
    let s = isqrt_u128(n);
    let rem = n - s * s;
    if rem == 0 {
        return 0.0;
    }
    let f = rem as f64 / (s as f64 + (n as f64).sqrt());
    f.min(1.0 - f64::EPSILON)
}

/// `sqrt(n)` split as `s + f` with `s = floor(sqrt(n))` and `0 <= f < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactSqrt<S: Scalar = f64> {
    pub n: u64,
    pub s: u64,
    pub f: S,
}

impl<S: Scalar> ExactSqrt<S> {
    /// Reassembles `sqrt(n)` in working precision.
    pub fn value(&self) -> S {
        S::from_count(self.s) + self.f
    }

    pub fn is_perfect_square(&self) -> bool {
        self.f == S::zero()
    }

    /// Distance from `sqrt(n)` to the nearest integer.
    pub fn dist_to_nearest_int(&self) -> S {
        self.f.min(S::one() - self.f)
    }

    /// Nearest integer to `sqrt(n)`, ties resolved downward.
    pub fn nearest_int(&self) -> u64 {
        if self.f <= S::lit(0.5) {
            self.s
        } else {
            self.s + 1
        }
    }
}

/// Splits `sqrt(n)` into integer and fractional parts.
pub fn frac_sqrt<S: Scalar>(n: u64) -> ExactSqrt<S> {
    let s = isqrt(n);
    let rem = n - s * s;
    let f = if rem == 0 {
        S::zero()
    } else {
        let denom = S::from_count(s) + S::from_count(n).sqrt();
        S::from_count(rem) / denom
    };
    // The quotient is strictly below one mathematically; guard the rounding edge.
    let f = if f >= S::one() {
        S::one() - S::epsilon()
    } else {
        f
    };
    ExactSqrt { n, s, f }
}

/// A phase in revolutions, reduced to `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Phase<S: Scalar = f64>(S);

impl<S: Scalar> Phase<S> {
    /// Reduces an arbitrary real modulo one.
    pub fn wrap(x: S) -> Self {
        let mut v = x - x.floor();
        if v >= S::one() || v < S::zero() {
            v = S::zero();
        }
        Phase(v)
    }

    pub fn value(self) -> S {
        self.0
    }

    /// Signed representative in `[-1/2, 1/2)`.
    pub fn centered(self) -> S {
        if self.0 >= S::lit(0.5) {
            self.0 - S::one()
        } else {
            self.0
        }
    }

    pub fn neg(self) -> Self {
        Phase::wrap(-self.0)
    }
}

impl<S: Scalar> std::ops::Add for Phase<S> {
    type Output = Phase<S>;
    fn add(self, rhs: Self) -> Self {
        Phase::wrap(self.0 + rhs.0)
    }
}

impl<S: Scalar> std::ops::Sub for Phase<S> {
    type Output = Phase<S>;
    fn sub(self, rhs: Self) -> Self {
        Phase::wrap(self.0 - rhs.0)
    }
}

/// `frac(r * sqrt(n))`. The integer part `r * s` drops out modulo one.
pub fn phase_of<S: Scalar>(r: u64, root: &ExactSqrt<S>) -> Phase<S> {
    Phase::wrap(S::from_count(r) * root.f)
}

/// `e(theta) = exp(2 pi i theta)`.
pub fn e<S: Scalar>(theta: Phase<S>) -> Complex<S> {
    // Evaluate on the centred representative so the argument of sin/cos stays
    // within [-pi, pi].
    let angle = S::TAU() * theta.centered();
    let (sin, cos) = angle.sin_cos();
    Complex::new(cos, sin)
}

/// The saw-tooth `u - floor(u) - 1/2`, range `[-1/2, 1/2)`.
pub fn psi<S: Scalar>(u: S) -> S {
    u - u.floor() - S::lit(0.5)
}

/// Running sum with Neumaier compensation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum<S: Scalar = f64> {
    sum: S,
    compensation: S,
}

impl<S: Scalar> CompensatedSum<S> {
    pub fn new() -> Self {
        Self {
            sum: S::zero(),
            compensation: S::zero(),
        }
    }

    #[inline]
    pub fn add(&mut self, value: S) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &Self) {
        self.add(other.sum);
        self.add(other.compensation);
    }

    #[inline]
    pub fn value(&self) -> S {
        self.sum + self.compensation
    }
}

impl<S: Scalar> Extend<S> for CompensatedSum<S> {
    fn extend<I: IntoIterator<Item = S>>(&mut self, iter: I) {
        for v in iter {
            self.add(v);
        }
    }
}

/// Compensated sum of complex terms, real and imaginary parts independently.
#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexSum<S: Scalar = f64> {
    re: CompensatedSum<S>,
    im: CompensatedSum<S>,
}

impl<S: Scalar> ComplexSum<S> {
    pub fn new() -> Self {
        Self {
            re: CompensatedSum::new(),
            im: CompensatedSum::new(),
        }
    }

    #[inline]
    pub fn add(&mut self, z: Complex<S>) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn merge(&mut self, other: &Self) {
        self.re.merge(&other.re);
        self.im.merge(&other.im);
    }

    pub fn value(&self) -> Complex<S> {
        Complex::new(self.re.value(), self.im.value())
    }
}

/// Compensated sum of a finite sequence.
pub fn compensated_sum<S: Scalar, I: IntoIterator<Item = S>>(terms: I) -> S {
    let mut acc = CompensatedSum::new();
    acc.extend(terms);
    acc.value()
}
