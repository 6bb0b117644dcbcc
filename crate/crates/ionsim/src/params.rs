//! Physical parameters of the driven ion and the derived quantities of the
//! small-rotation chain.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// |epsilon| above this value leaves the small-rotation regime; derived
/// parameters carry a warning flag instead of failing.
pub const EPSILON_WARN_THRESHOLD: f64 = 0.1;

/// Physical inputs: trap frequency, laser intensity, Lamb-Dicke parameter,
/// and detuning. The dimensionless convention is nu = 1 with all other
/// frequencies in units of nu and times in units of 1/nu.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IonParams {
    /// Vibrational angular frequency nu.
    pub nu: f64,
    /// Laser intensity Omega.
    pub omega_rabi: f64,
    /// Lamb-Dicke parameter eta.
    pub eta: f64,
    /// Laser detuning delta from the internal transition.
    pub delta: f64,
}

impl IonParams {
    pub fn new(nu: f64, omega_rabi: f64, eta: f64, delta: f64) -> Result<Self> {
        if !(nu > 0.0) {
            return Err(Error::InvalidParameter {
                name: "nu",
                value: nu,
                constraint: "must be positive",
            });
        }
        if !(omega_rabi >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "omega_rabi",
                value: omega_rabi,
                constraint: "must be non-negative",
            });
        }
        if !(eta >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "eta",
                value: eta,
                constraint: "must be non-negative",
            });
        }
        if !delta.is_finite() {
            return Err(Error::InvalidParameter {
                name: "delta",
                value: delta,
                constraint: "must be finite",
            });
        }
        Ok(Self {
            nu,
            omega_rabi,
            eta,
            delta,
        })
    }

    /// Resonant (delta = 0) parameter set; the transformed chain requires it.
    pub fn resonant(nu: f64, omega_rabi: f64, eta: f64) -> Result<Self> {
        Self::new(nu, omega_rabi, eta, 0.0)
    }

    pub fn is_resonant(&self) -> bool {
        self.delta == 0.0
    }

    /// Derived quantities of the transformation chain.
    pub fn derive(&self) -> DerivedParams {
        let Self {
            nu,
            omega_rabi: omega,
            eta,
            ..
        } = *self;
        let epsilon = -(eta / 2.0) * nu / (nu + 2.0 * omega);
        let lambda_eff = 2.0 * eta * nu * omega / (nu + 2.0 * omega);
        let delta_jcm = omega - nu / 2.0;
        let beta_minus = C64::new(0.0, eta / 2.0 - epsilon);
        DerivedParams {
            nu,
            epsilon,
            lambda_eff,
            delta_jcm,
            beta_minus,
            epsilon_abs_warning: epsilon.abs() > EPSILON_WARN_THRESHOLD,
        }
    }
}

/// Quantities produced by the small rotation: the rotation amplitude epsilon,
/// the renormalized coupling lambda, the effective two-level splitting
/// Delta = Omega - nu/2, and the composed displacement amplitude beta_minus.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DerivedParams {
    /// Base frequency the other quantities are expressed against.
    pub nu: f64,
    /// Small-rotation amplitude, -(eta/2) nu / (nu + 2 Omega).
    pub epsilon: f64,
    /// Effective coupling 2 eta nu Omega / (nu + 2 Omega).
    pub lambda_eff: f64,
    /// Effective splitting Omega - nu/2 of the dressed two-level system.
    pub delta_jcm: f64,
    /// Composed displacement amplitude i(eta/2 - epsilon).
    pub beta_minus: C64,
    /// Set when |epsilon| exceeds [`EPSILON_WARN_THRESHOLD`].
    pub epsilon_abs_warning: bool,
}

impl DerivedParams {
    /// Generalized Rabi frequency alpha_n = sqrt(Delta^2 + lambda^2 n).
    pub fn alpha(&self, n: usize) -> f64 {
        (self.delta_jcm.powi(2) + self.lambda_eff.powi(2) * n as f64).sqrt()
    }
}
