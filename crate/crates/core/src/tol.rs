//! Numerical tolerances shared by every routine.
//!
//! `cluster_tol`, `rank_tol` and `psd_tol` are relative: they are multiplied by
//! the spectral norm of the matrix they are applied to (`cluster_tol` by
//! `max(1, ||A||)`). The remaining fields are absolute.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Eigenvalues closer than `cluster_tol * max(1, ||A||)` form one level.
    pub cluster_tol: f64,
    /// Eigenvalues at or below `rank_tol * ||A||` are treated as zero.
    pub rank_tol: f64,
    /// Eigenvalues of `P + Q` at or above `2 - meet_tol` span the meet.
    pub meet_tol: f64,
    /// Stopping threshold for the limit-based algorithms.
    pub conv_tol: f64,
    /// Orthonormality and range-membership threshold.
    pub orth_tol: f64,
    /// Accepted asymmetry, relative to `max(1, max |a_ij|)`.
    pub sym_tol: f64,
    /// Accepted negative eigenvalue, relative to `||A||`.
    pub psd_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            cluster_tol: 1e-8,
            rank_tol: 1e-10,
            meet_tol: 1e-8,
            conv_tol: 1e-9,
            orth_tol: 1e-10,
            sym_tol: 1e-10,
            psd_tol: 1e-9,
        }
    }
}

/// Named tolerance presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    Default,
    Strict,
}

impl std::str::FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "default" => Ok(Profile::Default),
            "strict" => Ok(Profile::Strict),
            other => Err(Error::Domain(format!("unknown tolerance profile '{other}'"))),
        }
    }
}

impl Tolerances {
    pub fn strict() -> Self {
        Self {
            cluster_tol: 1e-9,
            rank_tol: 1e-11,
            meet_tol: 1e-9,
            conv_tol: 1e-10,
            orth_tol: 1e-11,
            sym_tol: 1e-12,
            psd_tol: 1e-10,
        }
    }

    pub fn from_profile(profile: Profile) -> Self {
        match profile {
            Profile::Default => Self::default(),
            Profile::Strict => Self::strict(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("cluster_tol", self.cluster_tol),
            ("rank_tol", self.rank_tol),
            ("meet_tol", self.meet_tol),
            ("conv_tol", self.conv_tol),
            ("orth_tol", self.orth_tol),
            ("sym_tol", self.sym_tol),
            ("psd_tol", self.psd_tol),
        ];
        for (name, value) in fields {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(Error::Domain(format!("{name} must be a finite nonnegative number, got {value}")));
            }
        }
        Ok(())
    }

    /// Absolute clustering width for a matrix of spectral norm `norm`.
    pub fn cluster_abs(&self, norm: f64) -> f64 {
        self.cluster_tol * norm.max(1.0)
    }

    /// Absolute zero-eigenvalue cutoff for a matrix of spectral norm `norm`.
    pub fn rank_abs(&self, norm: f64) -> f64 {
        self.rank_tol * norm
    }

    pub fn psd_abs(&self, norm: f64) -> f64 {
        self.psd_tol * norm
    }
}
