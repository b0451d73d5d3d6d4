//! Quoted bound shapes for sums under derivative envelopes.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;

use super::{BoundExpr, TermExpr, Var};
use Var::{Omega, Rho, R, T};

/// A bound shape, named by the derivative envelope it consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Template {
    /// Second derivative of `G2` two-sided off the interval around `nu_0`.
    SecondDerivative,
    /// The same with the trivial estimate over the excluded intervals.
    SecondDerivativeWithTrivial,
    /// Third derivative two-sided off the interval around `eta`.
    ThirdDerivative,
    ThirdDerivativeWithTrivial,
    /// Fourth derivative two-sided on the interval around `eta`.
    FourthDerivative,
    /// Third-derivative bound outside plus fourth-derivative bound inside.
    ThirdAndFourth,
    /// Third derivative on the short intervals plus the second-derivative shape.
    SecondAndThird,
}

impl Template {
    pub const ALL: [Template; 7] = [
        Template::SecondDerivative,
        Template::SecondDerivativeWithTrivial,
        Template::ThirdDerivative,
        Template::ThirdDerivativeWithTrivial,
        Template::FourthDerivative,
        Template::ThirdAndFourth,
        Template::SecondAndThird,
    ];

    /// External numeric identifier.
    pub fn id(self) -> &'static str {
        match self {
            Template::SecondDerivative => "3.9",
            Template::SecondDerivativeWithTrivial => "3.14",
            Template::ThirdDerivative => "4.4",
            Template::ThirdDerivativeWithTrivial => "4.5",
            Template::FourthDerivative => "4.12",
            Template::ThirdAndFourth => "4.13",
            Template::SecondAndThird => "6.2",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Template::SecondDerivative => "second-derivative",
            Template::SecondDerivativeWithTrivial => "second-derivative-with-trivial",
            Template::ThirdDerivative => "third-derivative",
            Template::ThirdDerivativeWithTrivial => "third-derivative-with-trivial",
            Template::FourthDerivative => "fourth-derivative",
            Template::ThirdAndFourth => "third-and-fourth",
            Template::SecondAndThird => "second-and-third",
        }
    }

    /// The cut-width symbol the shape is written in.
    pub fn width_var(self) -> Var {
        match self {
            Template::SecondDerivative
            | Template::SecondDerivativeWithTrivial
            | Template::SecondAndThird => Omega,
            _ => Rho,
        }
    }

    pub fn bound(self) -> BoundExpr {
        let m = TermExpr::mono;
        let second = [
            m(&[(T, 1, 12), (R, 1, 2), (Omega, -1, 6)]),
            m(&[(R, 1, 1), (Omega, -1, 4)]),
            m(&[(R, 3, 2), (T, -1, 8), (Omega, -1, 4)]),
        ];
        let third = [
            m(&[(T, 1, 28), (R, 5, 7), (Rho, -1, 14)]),
            m(&[(R, 1, 1), (Rho, -1, 8)]),
            m(&[(R, 21, 16), (Rho, -1, 8), (T, -1, 16)]),
        ];
        let fourth = [
            m(&[(Rho, 1, 1), (T, 1, 60), (R, -1, 5)]),
            m(&[(Rho, 15, 16)]),
            m(&[(Rho, 49, 64), (R, 3, 8), (T, -1, 32)]),
        ];
        match self {
            Template::SecondDerivative => BoundExpr::new(second),
            Template::SecondDerivativeWithTrivial => {
                BoundExpr::new(std::iter::once(TermExpr::var(Omega)).chain(second))
            }
            Template::ThirdDerivative => BoundExpr::new(third),
            Template::ThirdDerivativeWithTrivial => {
                BoundExpr::new(std::iter::once(TermExpr::var(Rho)).chain(third))
            }
            Template::FourthDerivative => BoundExpr::new(fourth),
            Template::ThirdAndFourth => BoundExpr::new(third.into_iter().take(2).chain(fourth)),
            Template::SecondAndThird => BoundExpr::new(
                [
                    m(&[(Omega, 1, 1), (T, 1, 28), (R, -5, 14)]),
                    m(&[(Omega, 7, 8)]),
                    m(&[(Omega, 9, 16), (R, 5, 8), (T, -1, 16)]),
                ]
                .into_iter()
                .chain(second),
            ),
        }
    }
}

impl FromStr for Template {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Template::ALL
            .into_iter()
            .find(|t| t.id() == s || t.name() == s)
            .ok_or_else(|| Error::UnknownTemplate(s.to_string()))
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for t in Template::ALL {
            assert_eq!(t.id().parse::<Template>().unwrap(), t);
            assert_eq!(t.name().parse::<Template>().unwrap(), t);
        }
        assert!("5.1".parse::<Template>().is_err());
    }

    #[test]
    fn term_counts() {
        let counts: Vec<usize> = Template::ALL.iter().map(|t| t.bound().len()).collect();
        assert_eq!(counts, vec![3, 4, 3, 4, 3, 5, 6]);
    }
}
