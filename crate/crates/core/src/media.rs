//! Background half-space materials, refraction into the lower medium and
//! the polarization tensor of a thin layer.

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Guard band around grazing and critical incidence.
pub const GRAZING_GUARD: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfSpaceMedium {
    pub eps_plus: f64,
    pub mu_plus: f64,
    pub eps_minus: f64,
    pub mu_minus: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InclusionMaterial {
    pub eps: f64,
    pub mu: f64,
}

fn positive_finite(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be positive and finite, got {value}")))
    }
}

impl HalfSpaceMedium {
    pub fn new(eps_plus: f64, mu_plus: f64, eps_minus: f64, mu_minus: f64) -> Result<Self> {
        let medium = Self {
            eps_plus,
            mu_plus,
            eps_minus,
            mu_minus,
        };
        medium.check()?;
        Ok(medium)
    }

    pub fn check(&self) -> Result<()> {
        positive_finite("eps_plus", self.eps_plus)?;
        positive_finite("mu_plus", self.mu_plus)?;
        positive_finite("eps_minus", self.eps_minus)?;
        positive_finite("mu_minus", self.mu_minus)
    }

    /// Refraction ratio `k+ / k-`, independent of frequency.
    pub fn refraction_ratio(&self) -> f64 {
        (self.eps_plus * self.mu_plus / (self.eps_minus * self.mu_minus)).sqrt()
    }

    pub fn frequency_context(&self, omega: f64) -> Result<FrequencyContext> {
        frequency_context(self, omega)
    }
}

impl InclusionMaterial {
    pub fn new(eps: f64, mu: f64) -> Result<Self> {
        let m = Self { eps, mu };
        m.check()?;
        Ok(m)
    }

    pub fn check(&self) -> Result<()> {
        positive_finite("eps_T", self.eps)?;
        positive_finite("mu_T", self.mu)
    }

    /// `eps_T / eps_- - 1`.
    pub fn permittivity_contrast(&self, medium: &HalfSpaceMedium) -> f64 {
        self.eps / medium.eps_minus - 1.0
    }
}

/// Which material parameters of an inclusion differ from the lower medium.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContrastKind {
    None,
    Permittivity,
    /// `mu_T < mu_-` only.
    PermeabilityLess,
    /// `mu_T > mu_-` only.
    PermeabilityGreater,
    /// Both contrasts; the flag records `mu_T > mu_-`.
    Both { mu_greater: bool },
}

impl ContrastKind {
    pub fn classify(medium: &HalfSpaceMedium, inclusion: &InclusionMaterial) -> Self {
        let eps = inclusion.eps != medium.eps_minus;
        let mu = inclusion.mu != medium.mu_minus;
        let greater = inclusion.mu > medium.mu_minus;
        match (eps, mu) {
            (false, false) => ContrastKind::None,
            (true, false) => ContrastKind::Permittivity,
            (false, true) if greater => ContrastKind::PermeabilityGreater,
            (false, true) => ContrastKind::PermeabilityLess,
            (true, true) => ContrastKind::Both { mu_greater: greater },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyContext {
    pub omega: f64,
    pub k_plus: f64,
    pub k_minus: f64,
    pub xi: f64,
    pub lambda_minus: f64,
}

pub fn frequency_context(medium: &HalfSpaceMedium, omega: f64) -> Result<FrequencyContext> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::Domain(format!("angular frequency must be positive, got {omega}")));
    }
    medium.check()?;
    let k_plus = omega * (medium.eps_plus * medium.mu_plus).sqrt();
    let k_minus = omega * (medium.eps_minus * medium.mu_minus).sqrt();
    Ok(FrequencyContext {
        omega,
        k_plus,
        k_minus,
        xi: k_plus / k_minus,
        lambda_minus: 2.0 * PI / k_minus,
    })
}

impl FrequencyContext {
    /// True when the refracted wave is non-evanescent and the direction is
    /// not grazing.
    pub fn is_propagating(&self, xhat: Vec2) -> bool {
        (self.xi * xhat.x).abs() < 1.0 - GRAZING_GUARD && xhat.y.abs() > GRAZING_GUARD
    }

    fn check_direction(&self, xhat: Vec2) -> Result<f64> {
        if xhat.y.abs() <= GRAZING_GUARD {
            return Err(Error::Grazing(xhat.x, xhat.y));
        }
        let s = self.xi * xhat.x;
        if s.abs() >= 1.0 {
            return Err(Error::Evanescent(xhat.x, xhat.y));
        }
        Ok((1.0 - s * s).sqrt())
    }

    /// Direction of the wave refracted into the lower medium:
    /// `v = (xi x1, sign(x2) sqrt(1 - xi^2 x1^2))`.
    pub fn transmitted_direction(&self, xhat: Vec2) -> Result<Vec2> {
        let root = self.check_direction(xhat)?;
        Ok(Vec2::new(self.xi * xhat.x, xhat.y.signum() * root))
    }

    /// `T = 2 mu- xi x2 / (mu- xi x2 + mu+ sign(x2) sqrt(1 - xi^2 x1^2))`.
    pub fn transmission_coefficient(&self, medium: &HalfSpaceMedium, xhat: Vec2) -> Result<Complex64> {
        let root = self.check_direction(xhat)?;
        let num = 2.0 * medium.mu_minus * self.xi * xhat.y;
        let den = medium.mu_minus * self.xi * xhat.y + medium.mu_plus * xhat.y.signum() * root;
        if den == 0.0 || !den.is_finite() {
            return Err(Error::Singular(xhat.x, xhat.y));
        }
        Ok(Complex64::new(num / den, 0.0))
    }
}

pub fn transmitted_direction(ctx: &FrequencyContext, xhat: Vec2) -> Result<Vec2> {
    ctx.transmitted_direction(xhat)
}

pub fn transmission_coefficient(
    ctx: &FrequencyContext,
    medium: &HalfSpaceMedium,
    xhat: Vec2,
) -> Result<Complex64> {
    ctx.transmission_coefficient(medium, xhat)
}

pub fn is_propagating(ctx: &FrequencyContext, xhat: Vec2) -> bool {
    ctx.is_propagating(xhat)
}

/// Eigenvalues of the polarization tensor along the tangent and the normal
/// of the supporting curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationTensor {
    pub lambda_tau: f64,
    pub lambda_n: f64,
}

impl PolarizationTensor {
    pub fn new(medium: &HalfSpaceMedium, inclusion: &InclusionMaterial) -> Self {
        let (mu_m, mu_t) = (medium.mu_minus, inclusion.mu);
        Self {
            lambda_tau: 2.0 * mu_m * (1.0 / mu_t - 1.0 / mu_m),
            lambda_n: 2.0 * mu_m * (1.0 / mu_m - mu_t / (mu_m * mu_m)),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.lambda_tau == 0.0 && self.lambda_n == 0.0
    }

    /// Tensor in Cartesian coordinates for the frame `(tau, n)`.
    pub fn matrix(&self, tau: Vec2, n: Vec2) -> Matrix2<f64> {
        tau * tau.transpose() * self.lambda_tau + n * n.transpose() * self.lambda_n
    }

    /// `v . A . w` expanded in the eigenbasis.
    pub fn quadratic_form(&self, v: Vec2, w: Vec2, tau: Vec2, n: Vec2) -> f64 {
        self.lambda_tau * v.dot(&tau) * w.dot(&tau) + self.lambda_n * v.dot(&n) * w.dot(&n)
    }
}

pub fn polarization_tensor(medium: &HalfSpaceMedium, inclusion: &InclusionMaterial) -> PolarizationTensor {
    PolarizationTensor::new(medium, inclusion)
}
