//! Margin-based losses `l(a, b)` for a score `a` and a label `b`.
//!
//! Every surrogate is a function of the margin `m = b * a` and upper-bounds
//! the 0-1 loss. Gradients are taken with respect to the score `a`; at the
//! kinks of the hinge and absolute losses (margin exactly 1) the subgradient
//! 0 is returned.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::Label;
use crate::error::{Error, Result};
use crate::linalg::{sigmoid, softplus};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    ZeroOne,
    Logistic,
    Hinge,
    Squared,
    Exponential,
    TruncatedSquared,
    Absolute,
}

impl Loss {
    pub const ALL: [Loss; 7] = [
        Loss::ZeroOne,
        Loss::Logistic,
        Loss::Hinge,
        Loss::Squared,
        Loss::Exponential,
        Loss::TruncatedSquared,
        Loss::Absolute,
    ];

    pub const SURROGATES: [Loss; 6] = [
        Loss::Logistic,
        Loss::Hinge,
        Loss::Squared,
        Loss::Exponential,
        Loss::TruncatedSquared,
        Loss::Absolute,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Loss::ZeroOne => "zero_one",
            Loss::Logistic => "logistic",
            Loss::Hinge => "hinge",
            Loss::Squared => "squared",
            Loss::Exponential => "exponential",
            Loss::TruncatedSquared => "truncated_squared",
            Loss::Absolute => "absolute",
        }
    }

    pub fn is_convex(self) -> bool {
        self != Loss::ZeroOne
    }

    pub fn value(self, a: f64, b: Label) -> f64 {
        let m = b.sign() * a;
        match self {
            Loss::ZeroOne => {
                if Label::from_score(a) != b {
                    1.0
                } else {
                    0.0
                }
            }
            Loss::Logistic => softplus(-m) / std::f64::consts::LN_2,
            Loss::Hinge => (1.0 - m).max(0.0),
            Loss::Squared => (1.0 - m) * (1.0 - m),
            Loss::Exponential => (-m).exp(),
            Loss::TruncatedSquared => {
                let t = (1.0 - m).max(0.0);
                t * t
            }
            Loss::Absolute => (1.0 - m).abs(),
        }
    }

    /// Derivative of [`Loss::value`] in the score `a`.
    pub fn grad(self, a: f64, b: Label) -> Result<f64> {
        let y = b.sign();
        let m = y * a;
        let dm = match self {
            Loss::ZeroOne => {
                return Err(Error::Unsupported(
                    "the 0-1 loss has no useful gradient and is never optimized directly".into(),
                ))
            }
            Loss::Logistic => -sigmoid(-m) / std::f64::consts::LN_2,
            Loss::Hinge => {
                if m < 1.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            Loss::Squared => -2.0 * (1.0 - m),
            Loss::Exponential => -(-m).exp(),
            Loss::TruncatedSquared => -2.0 * (1.0 - m).max(0.0),
            Loss::Absolute => {
                if m < 1.0 {
                    -1.0
                } else if m > 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
        };
        Ok(dm * y)
    }
}

impl fmt::Display for Loss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Loss {
    type Err = Error;

    fn from_str(s: &str) -> Result<Loss> {
        Loss::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| Error::Argument(format!("unknown loss {s:?}")))
    }
}

pub fn loss_value(loss: Loss, a: f64, b: Label) -> f64 {
    loss.value(a, b)
}

pub fn loss_grad(loss: Loss, a: f64, b: Label) -> Result<f64> {
    loss.grad(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const P: Label = Label::Pos;
    const N: Label = Label::Neg;

    #[test]
    fn values_at_reference_points() {
        assert_eq!(Loss::Logistic.value(0.0, P), 1.0);
        assert_eq!(Loss::Hinge.value(0.0, P), 1.0);
        assert_eq!(Loss::Squared.value(0.0, P), 1.0);
        assert_eq!(Loss::ZeroOne.value(0.0, P), 0.0);
        assert_eq!(Loss::ZeroOne.value(0.0, N), 1.0);
        assert_eq!(Loss::Hinge.value(2.0, P), 0.0);
        assert_eq!(Loss::Squared.value(1.0, P), 0.0);
        assert_eq!(Loss::Squared.value(-1.0, P), 4.0);
        // log2(1 + e) by a second route: ln(1 + e) / ln 2.
        let direct = (1.0 + std::f64::consts::E).ln() / 2f64.ln();
        assert!((Loss::Logistic.value(-1.0, P) - direct).abs() < 1e-15);
        assert!((direct - 1.894_636_1).abs() < 1e-6);
        assert_eq!(Loss::Exponential.value(0.0, N), 1.0);
        assert_eq!(Loss::TruncatedSquared.value(3.0, P), 0.0);
        assert_eq!(Loss::Absolute.value(3.0, P), 2.0);
    }

    #[test]
    fn gradients_at_reference_points() {
        assert_eq!(Loss::Squared.grad(1.0, P).unwrap(), 0.0);
        assert_eq!(Loss::Squared.grad(0.5, N).unwrap(), -2.0 * -1.0 * (1.0 - -0.5));
        assert_eq!(Loss::Hinge.grad(2.0, P).unwrap(), 0.0);
        assert_eq!(Loss::Hinge.grad(0.0, P).unwrap(), -1.0);
        assert_eq!(Loss::Hinge.grad(0.0, N).unwrap(), 1.0);
        assert_eq!(Loss::Hinge.grad(1.0, P).unwrap(), 0.0);
        assert_eq!(Loss::Absolute.grad(1.0, P).unwrap(), 0.0);
        let g = Loss::Logistic.grad(0.0, P).unwrap();
        assert!((g + 1.0 / (2.0 * 2f64.ln())).abs() < 1e-15);
        assert!((g + 0.7213).abs() < 1e-4);
        assert!(matches!(Loss::ZeroOne.grad(0.3, P), Err(Error::Unsupported(_))));
    }

    #[test]
    fn parses_names() {
        for l in Loss::ALL {
            assert_eq!(l.name().parse::<Loss>().unwrap(), l);
        }
        assert!("svm".parse::<Loss>().is_err());
    }

    #[test]
    fn logistic_does_not_overflow() {
        assert!(Loss::Logistic.value(-1000.0, P).is_finite());
        assert!((Loss::Logistic.value(-1000.0, P) - 1000.0 / 2f64.ln()).abs() < 1e-9);
        assert_eq!(Loss::Logistic.value(1000.0, P), 0.0);
    }

    #[test]
    fn surrogates_upper_bound_zero_one_on_grid() {
        for i in 0..=20_000 {
            let m = -10.0 + i as f64 * 1e-3;
            for b in [P, N] {
                let a = m * b.sign();
                let z = Loss::ZeroOne.value(a, b);
                for l in Loss::SURROGATES {
                    assert!(l.value(a, b) >= z, "{l} at m = {m}");
                }
            }
        }
    }

    fn label(p: bool) -> Label {
        if p { P } else { N }
    }

    proptest! {
        #[test]
        fn margin_symmetry(a in -50.0f64..50.0, p in any::<bool>()) {
            let b = label(p);
            for l in Loss::ALL {
                // The sign convention maps a score of exactly 0 to +1, which
                // breaks the symmetry of the 0-1 loss at that single point.
                if l == Loss::ZeroOne && a == 0.0 { continue; }
                prop_assert_eq!(l.value(a, b), l.value(-a, b.flip()));
            }
        }

        #[test]
        fn gradient_matches_central_difference(a in -6.0f64..6.0, p in any::<bool>()) {
            let b = label(p);
            let h = 1e-6;
            for l in Loss::SURROGATES {
                let m = b.sign() * a;
                if matches!(l, Loss::Hinge | Loss::Absolute | Loss::TruncatedSquared) && (m - 1.0).abs() < 1e-4 {
                    continue;
                }
                let g = l.grad(a, b).unwrap();
                let fd = (l.value(a + h, b) - l.value(a - h, b)) / (2.0 * h);
                prop_assert!((g - fd).abs() <= 1e-5 * (1.0 + g.abs()), "{} at a={}: {} vs {}", l, a, g, fd);
            }
        }

        #[test]
        fn convex_in_score(a1 in -5.0f64..5.0, a2 in -5.0f64..5.0, p in any::<bool>()) {
            let b = label(p);
            for l in Loss::SURROGATES {
                let mid = l.value(0.5 * (a1 + a2), b);
                let avg = 0.5 * (l.value(a1, b) + l.value(a2, b));
                prop_assert!(mid <= avg + 1e-12 * (1.0 + avg.abs()));
            }
        }
    }
}
