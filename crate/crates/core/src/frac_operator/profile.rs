//! Radial test functions with known decay, used by the principal-value evaluator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A radial function `x -> F(|x|)` that is smooth as a function of `|x|^2`.
pub trait RadialProfile: Sync {
    fn value(&self, r: f64) -> f64;

    /// Limit of `F(r)` as `r -> infinity`.
    fn limit(&self) -> f64 {
        0.0
    }

    /// An upper bound for `sup_{s >= r} |F(s) - limit|`.
    fn tail_sup(&self, r: f64) -> f64;

    /// Length over which the profile changes appreciably.
    fn scale(&self) -> f64;

    /// Length over which the profile changes appreciably near radius `r`.
    fn local_scale(&self, _r: f64) -> f64 {
        self.scale()
    }
}

/// The algebraic weight `<x/R>^{-q} = (1 + |x/R|^2)^{-q/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightProfile {
    pub q: f64,
    pub scale: f64,
}

impl WeightProfile {
    pub fn new(q: f64, scale: f64) -> Result<Self> {
        if !(q > 0.0 && q.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "weight exponent must be positive, got {q}"
            )));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "weight scale must be positive, got {scale}"
            )));
        }
        Ok(Self { q, scale })
    }

    /// `<x>^{-q}` with unit scale.
    pub fn unit(q: f64) -> Result<Self> {
        Self::new(q, 1.0)
    }
}

impl RadialProfile for WeightProfile {
    fn value(&self, r: f64) -> f64 {
        let s = r / self.scale;
        (1.0 + s * s).powf(-0.5 * self.q)
    }

    fn tail_sup(&self, r: f64) -> f64 {
        self.value(r.max(0.0))
    }

    fn scale(&self) -> f64 {
        self.scale
    }

    fn local_scale(&self, r: f64) -> f64 {
        self.scale.hypot(r)
    }
}

/// `exp(-|x|^2 / w^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gaussian {
    pub width: f64,
}

impl Gaussian {
    pub fn unit() -> Self {
        Self { width: 1.0 }
    }
}

impl RadialProfile for Gaussian {
    fn value(&self, r: f64) -> f64 {
        let s = r / self.width;
        (-s * s).exp()
    }

    fn tail_sup(&self, r: f64) -> f64 {
        self.value(r.max(0.0))
    }

    fn scale(&self) -> f64 {
        self.width
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constant(pub f64);

impl RadialProfile for Constant {
    fn value(&self, _r: f64) -> f64 {
        self.0
    }

    fn limit(&self) -> f64 {
        self.0
    }

    fn tail_sup(&self, _r: f64) -> f64 {
        0.0
    }

    fn scale(&self) -> f64 {
        1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_is_one_at_origin_and_nonincreasing() {
        let w = WeightProfile::new(2.5, 3.0).unwrap();
        assert_eq!(w.value(0.0), 1.0);
        let mut prev = 1.0;
        for i in 1..200 {
            let v = w.value(i as f64 * 0.37);
            assert!(v <= prev);
            prev = v;
        }
        assert!((w.value(3.0) - 2f64.powf(-1.25)).abs() < 1e-15);
    }

    #[test]
    fn weight_rejects_bad_parameters() {
        assert!(WeightProfile::new(0.0, 1.0).is_err());
        assert!(WeightProfile::new(1.0, -1.0).is_err());
        assert!(WeightProfile::new(f64::NAN, 1.0).is_err());
    }
}
