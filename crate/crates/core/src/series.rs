//! Truncated Taylor series ("jets") for exact-order derivatives.
//!
//! A `Taylor` holds `c[k] = f^(k)(a) / k!` for `k = 0..=order`. Arithmetic
//! follows the usual power-series rules and truncates at the common order.

use std::ops::{Add, Mul, Neg, Sub};

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Taylor<S: Scalar = f64> {
    c: Vec<S>,
}

impl<S: Scalar> Taylor<S> {
    pub fn from_coeffs(c: Vec<S>) -> Self {
        assert!(!c.is_empty(), "a series needs at least a constant term");
        Taylor { c }
    }

    pub fn constant(v: S, order: usize) -> Self {
        let mut c = vec![S::zero(); order + 1];
        c[0] = v;
        Taylor { c }
    }

    /// The independent variable `a + h`.
    pub fn variable(a: S, order: usize) -> Self {
        let mut c = vec![S::zero(); order + 1];
        c[0] = a;
        if order > 0 {
            c[1] = S::one();
        }
        Taylor { c }
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub fn coeffs(&self) -> &[S] {
        &self.c
    }

    pub fn coeff(&self, k: usize) -> S {
        self.c.get(k).copied().unwrap_or_else(S::zero)
    }

    pub fn value(&self) -> S {
        self.c[0]
    }

    /// `f^(k)(a)`.
    pub fn derivative(&self, k: usize) -> S {
        self.coeff(k) * factorial::<S>(k)
    }

    pub fn truncate(mut self, order: usize) -> Self {
        self.c.truncate(order + 1);
        self
    }

    pub fn scale(&self, k: S) -> Self {
        Taylor {
            c: self.c.iter().map(|&v| v * k).collect(),
        }
    }

    pub fn add_scalar(&self, k: S) -> Self {
        let mut out = self.clone();
        out.c[0] += k;
        out
    }

    /// `f^alpha` for a series with positive constant term.
    pub fn powf(&self, alpha: S) -> Self {
        let f0 = self.c[0];
        assert!(f0 > S::zero(), "powf needs a positive constant term");
        let n = self.c.len();
        let mut g = vec![S::zero(); n];
        g[0] = f0.powf(alpha);
        for m in 1..n {
            let mut acc = S::zero();
            for k in 1..=m {
                let w = (alpha + S::one()) * S::from_count(k as u64) - S::from_count(m as u64);
                acc += w * self.c[k] * g[m - k];
            }
            g[m] = acc / (S::from_count(m as u64) * f0);
        }
        Taylor { c: g }
    }

    pub fn sqrt(&self) -> Self {
        self.powf(S::lit(0.5))
    }

    pub fn powi(&self, n: u32) -> Self {
        let mut out = Taylor::constant(S::one(), self.order());
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    /// Evaluates a polynomial (ascending coefficients) at this series.
    pub fn compose_poly(&self, poly: &[S]) -> Self {
        let mut out = Taylor::constant(S::zero(), self.order());
        for &a in poly.iter().rev() {
            out = (&out * self).add_scalar(a);
        }
        out
    }

    /// Series of `f^(k)(a + h) / k!` in `h`, truncated at `order - k`.
    pub fn shifted_derivative(&self, k: usize) -> Self {
        assert!(k <= self.order());
        let c = (0..=self.order() - k)
            .map(|j| S::from_count(binomial(k + j, j)) * self.c[k + j])
            .collect();
        Taylor { c }
    }

    /// Evaluates the truncated polynomial at offset `h`.
    pub fn eval(&self, h: S) -> S {
        self.c.iter().rev().fold(S::zero(), |acc, &v| acc * h + v)
    }
}

impl<S: Scalar> Add for &Taylor<S> {
    type Output = Taylor<S>;
    fn add(self, rhs: Self) -> Taylor<S> {
        let n = self.c.len().min(rhs.c.len());
        Taylor {
            c: (0..n).map(|k| self.c[k] + rhs.c[k]).collect(),
        }
    }
}

impl<S: Scalar> Sub for &Taylor<S> {
    type Output = Taylor<S>;
    fn sub(self, rhs: Self) -> Taylor<S> {
        let n = self.c.len().min(rhs.c.len());
        Taylor {
            c: (0..n).map(|k| self.c[k] - rhs.c[k]).collect(),
        }
    }
}

impl<S: Scalar> Mul for &Taylor<S> {
    type Output = Taylor<S>;
    fn mul(self, rhs: Self) -> Taylor<S> {
        let n = self.c.len().min(rhs.c.len());
        let c = (0..n)
            .map(|m| (0..=m).fold(S::zero(), |acc, k| acc + self.c[k] * rhs.c[m - k]))
            .collect();
        Taylor { c }
    }
}

impl<S: Scalar> Neg for &Taylor<S> {
    type Output = Taylor<S>;
    fn neg(self) -> Taylor<S> {
        self.scale(-S::one())
    }
}

pub fn factorial<S: Scalar>(k: usize) -> S {
    (1..=k).fold(S::one(), |acc, j| acc * S::from_count(j as u64))
}

pub fn binomial(n: usize, k: usize) -> u64 {
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, j| acc * (n - j) as u64 / (j + 1) as u64)
}
