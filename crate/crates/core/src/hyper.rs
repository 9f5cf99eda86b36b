use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_ALPHA: f64 = 1.0;
pub const DEFAULT_BETA: f64 = 0.1;
pub const DEFAULT_GAMMA: f64 = 1.0;

/// Fixed model hyperparameters.
///
/// `alpha` is the symmetric topic prior of the parametric model and the
/// precision of the author-level DPs in the HDP model. `gamma` is only read by
/// the HDP sampler, `topics` only by the parametric one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub topics: Option<usize>,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            beta: DEFAULT_BETA,
            gamma: DEFAULT_GAMMA,
            topics: None,
        }
    }
}

impl Hyperparameters {
    pub fn parametric(topics: usize, alpha: f64, beta: f64) -> Self {
        Self {
            alpha,
            beta,
            topics: Some(topics),
            ..Self::default()
        }
    }

    pub fn hdp(alpha: f64, beta: f64, gamma: f64) -> Self {
        Self {
            alpha,
            beta,
            gamma,
            topics: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |field: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Config {
                    field,
                    message: format!("must be a positive finite number, got {v}"),
                })
            }
        };
        positive("alpha", self.alpha)?;
        positive("beta", self.beta)?;
        positive("gamma", self.gamma)?;
        if self.topics == Some(0) {
            return Err(Error::Config {
                field: "topics",
                message: "must be at least 1".into(),
            });
        }
        Ok(())
    }

    /// Number of topics for the parametric model.
    pub fn k(&self) -> Result<usize> {
        self.topics.ok_or(Error::Config {
            field: "topics",
            message: "required for the parametric model".into(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_positive() {
        let mut hp = Hyperparameters::parametric(2, 1.0, 0.1);
        assert!(hp.validate().is_ok());
        hp.beta = 0.0;
        assert!(matches!(hp.validate(), Err(Error::Config { field: "beta", .. })));
        hp.beta = 0.1;
        hp.topics = Some(0);
        assert!(hp.validate().is_err());
        assert!(Hyperparameters::hdp(1.0, 0.1, f64::NAN).validate().is_err());
    }
}
