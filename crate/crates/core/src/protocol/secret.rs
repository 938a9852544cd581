use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::quantum::{PureState, Site};
use crate::rng::haar_vector;
use crate::{QssError, Result};

/// Amplitudes of the shared state `α|e⟩ + β|g⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecretAmplitudes {
    pub alpha: Complex64,
    pub beta: Complex64,
}

impl SecretAmplitudes {
    pub fn new(alpha: Complex64, beta: Complex64) -> Result<Self> {
        let n = alpha.norm_sqr() + beta.norm_sqr();
        if (n - 1.0).abs() > 1e-12 {
            return Err(QssError::NotNormalized(n));
        }
        Ok(Self { alpha, beta })
    }

    /// Rescale to unit norm. Fails on the zero vector.
    pub fn normalized(alpha: Complex64, beta: Complex64) -> Result<Self> {
        let n = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
        if !(n > 0.0) || !n.is_finite() {
            return Err(QssError::NotNormalized(n * n));
        }
        Ok(Self {
            alpha: alpha / n,
            beta: beta / n,
        })
    }

    pub fn haar<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let v = haar_vector(rng, 2);
        // haar_vector orders as (|g⟩, |e⟩)
        Self {
            alpha: v[1],
            beta: v[0],
        }
    }

    /// `α = β = 1/√2`.
    pub fn balanced() -> Self {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self { alpha: h, beta: h }
    }

    pub fn state(&self, site: Site) -> PureState {
        PureState::qubit(site, self.alpha, self.beta)
    }

    /// `(|α|² − |β|²)²`: fidelity left after a spurious σz.
    pub fn z_error_fidelity(&self) -> f64 {
        (self.alpha.norm_sqr() - self.beta.norm_sqr()).powi(2)
    }
}
