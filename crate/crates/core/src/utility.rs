//! α-fair utilities `U(x) = w·x^{1−α}/(1−α)`, with `α = 1` dispatched to
//! `w·log x` and `α = 0` to the linear utility `w·x`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rate substituted for a starving group when `log 0` or `0^{1−α}` with
/// `α > 1` would otherwise be evaluated.
pub const RATE_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UtilitySpec {
    alpha: f64,
    weight: f64,
}

impl UtilitySpec {
    pub fn new(alpha: f64, weight: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::param(
                "alpha",
                format!("must be finite and >= 0, got {alpha}"),
            ));
        }
        if !(weight.is_finite() && weight > 0.0) {
            return Err(Error::param(
                "weight",
                format!("must be finite and > 0, got {weight}"),
            ));
        }
        Ok(UtilitySpec { alpha, weight })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn is_linear(&self) -> bool {
        self.alpha == 0.0
    }

    pub fn value(&self, x: f64) -> Result<f64> {
        let (a, w) = (self.alpha, self.weight);
        if x.is_nan() || x < 0.0 || (x == 0.0 && a >= 1.0) {
            return Err(Error::UtilityDomain { alpha: a, x });
        }
        Ok(if a == 0.0 {
            w * x
        } else if a == 1.0 {
            w * x.ln()
        } else {
            w * x.powf(1.0 - a) / (1.0 - a)
        })
    }

    /// `U(max(x, ε))` when `U(x)` would be undefined; the flag reports
    /// whether the floor was applied.
    pub fn value_floored(&self, x: f64) -> (f64, bool) {
        match self.value(x) {
            Ok(v) => (v, false),
            Err(_) => (self.value(RATE_FLOOR).expect("floor is in the domain"), true),
        }
    }

    /// `U'(x) = w·x^{−α}`.
    pub fn marginal(&self, x: f64) -> Result<f64> {
        let (a, w) = (self.alpha, self.weight);
        if a == 0.0 {
            return Ok(w);
        }
        if !(x > 0.0) {
            return Err(Error::UtilityDomain { alpha: a, x });
        }
        Ok(if a == 1.0 { w / x } else { w * x.powf(-a) })
    }

    /// `(U')^{-1}(y) = (w/y)^{1/α}`.
    pub fn inverse_marginal(&self, y: f64) -> Result<f64> {
        let (a, w) = (self.alpha, self.weight);
        if a == 0.0 {
            return Err(Error::NoInverseMarginal);
        }
        if !(y > 0.0) {
            return Err(Error::UtilityDomain { alpha: a, x: y });
        }
        Ok(if a == 1.0 { w / y } else { (w / y).powf(1.0 / a) })
    }
}

/// `Σ_k U_k(x_k)` with the rate floor applied per group.
pub fn total_utility(utilities: &[UtilitySpec], rates: &[f64]) -> (f64, bool) {
    utilities
        .iter()
        .zip(rates)
        .fold((0.0, false), |(sum, floored), (u, &x)| {
            let (v, f) = u.value_floored(x);
            (sum + v, floored || f)
        })
}
