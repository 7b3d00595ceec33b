//! The physical plant: a 1-DOF effective point mass integrated with
//! semi-implicit (symplectic) Euler, plus the closed-form modal and energy
//! relations of the spring-damper family the controller emulates.
//!
//! The bare plant carries no stiffness or damping of its own; every k and c
//! in the loop lives in the impedance law or the patient coupling.

use serde::{Deserialize, Serialize};

use crate::SimError;

/// Plant configuration: effective mass, physics step, initial state.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PlantConfig {
    /// Effective mass at the end effector in kg.
    pub m_eff: f64,
    /// Physics step in seconds.
    pub dt_phys: f64,
    /// Initial position in m.
    pub x0: f64,
    /// Initial velocity in m/s.
    pub v0: f64,
}

impl Default for PlantConfig {
    fn default() -> Self {
        PlantConfig {
            m_eff: 1.0,
            dt_phys: 1e-3,
            x0: 0.0,
            v0: 0.0,
        }
    }
}

impl PlantConfig {
    /// `allow_coarse` admits the legacy solver step of 1/120 s used by the
    /// rate-sensitivity comparison; normal runs require dt_phys <= 2 ms so
    /// that omega_n * dt stays below ~0.2 at the stiffest admissible k.
    pub fn validate(&self, allow_coarse: bool) -> Result<(), SimError> {
        if !(self.m_eff > 0.0) {
            return Err(SimError::domain("m_eff must be positive"));
        }
        if !(self.dt_phys > 0.0) {
            return Err(SimError::domain("dt_phys must be positive"));
        }
        let cap = if allow_coarse { 1.0 / 120.0 + 1e-12 } else { 0.002 };
        if self.dt_phys > cap {
            return Err(SimError::domain(format!(
                "dt_phys {} exceeds {} s",
                self.dt_phys, cap
            )));
        }
        Ok(())
    }
}

/// Virtual stiffness-damping pair with clamp bounds. This is the object the
/// learner optimizes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpedanceParams {
    pub k: f64,
    pub c: f64,
    pub k_min: f64,
    pub k_max: f64,
    pub c_min: f64,
    pub c_max: f64,
}

impl ImpedanceParams {
    pub fn new(k: f64, c: f64, k_min: f64, k_max: f64, c_min: f64, c_max: f64) -> Result<Self, SimError> {
        let p = ImpedanceParams {
            k,
            c,
            k_min,
            k_max,
            c_min,
            c_max,
        };
        p.validate()?;
        Ok(p)
    }

    /// Fixed parameters: bounds collapse onto the value itself.
    pub fn fixed(k: f64, c: f64) -> Self {
        ImpedanceParams {
            k,
            c,
            k_min: k,
            k_max: k,
            c_min: c,
            c_max: c,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.k_min > 0.0 && self.c_min > 0.0) {
            return Err(SimError::domain("impedance bounds must be positive"));
        }
        if self.k_min > self.k_max || self.c_min > self.c_max {
            return Err(SimError::domain("impedance bounds inverted"));
        }
        if self.k < self.k_min || self.k > self.k_max || self.c < self.c_min || self.c > self.c_max {
            return Err(SimError::domain("impedance value outside bounds"));
        }
        Ok(())
    }

    /// Clamp a (k, c) request into this parameter set's rectangle.
    pub fn clamped(&self, k: f64, c: f64) -> (f64, f64) {
        (
            k.clamp(self.k_min, self.k_max),
            c.clamp(self.c_min, self.c_max),
        )
    }
}

/// End-effector state advanced by the integrator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BodyState {
    pub x: f64,
    pub v: f64,
    pub t: f64,
}

impl BodyState {
    pub fn new(x: f64, v: f64, t: f64) -> Self {
        BodyState { x, v, t }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.v.is_finite() && self.t.is_finite()
    }
}

/// Modal parameters of the emulated spring-mass-damper.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ModalProperties {
    /// Natural frequency in rad/s.
    pub omega_n: f64,
    /// Natural frequency in Hz.
    pub f_n: f64,
    /// Damping ratio (dimensionless).
    pub zeta: f64,
}

/// omega_n = sqrt(k/m).
pub fn natural_frequency(k: f64, m: f64) -> Result<f64, SimError> {
    if !(k > 0.0) || !(m > 0.0) {
        return Err(SimError::domain("natural_frequency requires k > 0 and m > 0"));
    }
    Ok((k / m).sqrt())
}

/// zeta = c / (2 sqrt(k m)).
pub fn damping_ratio(k: f64, c: f64, m: f64) -> Result<f64, SimError> {
    if !(k > 0.0) || !(c > 0.0) || !(m > 0.0) {
        return Err(SimError::domain("damping_ratio requires positive k, c, m"));
    }
    Ok(c / (2.0 * (k * m).sqrt()))
}

/// Modal properties for a (k, c) pair acting on mass m.
pub fn modal_properties(k: f64, c: f64, m: f64) -> Result<ModalProperties, SimError> {
    let omega_n = natural_frequency(k, m)?;
    Ok(ModalProperties {
        omega_n,
        f_n: omega_n / (2.0 * std::f64::consts::PI),
        zeta: damping_ratio(k, c, m)?,
    })
}

/// Stored spring energy E = 1/2 k A^2.
pub fn spring_energy(k: f64, amplitude: f64) -> Result<f64, SimError> {
    if !(k > 0.0) {
        return Err(SimError::domain("spring_energy requires k > 0"));
    }
    Ok(0.5 * k * amplitude * amplitude)
}

/// Instantaneous power F * v; positive means energy flows into the plant.
pub fn instantaneous_power(force: f64, velocity: f64) -> f64 {
    force * velocity
}

/// One semi-implicit Euler step: velocity first, then position with the new
/// velocity.
pub fn step(state: BodyState, total_force: f64, config: &PlantConfig) -> Result<BodyState, SimError> {
    if !total_force.is_finite() {
        return Err(SimError::NonFinite {
            quantity: "total_force".into(),
            t: state.t,
            tick: (state.t * crate::TICK_RATE) as u64,
        });
    }
    let dt = config.dt_phys;
    let v = state.v + total_force / config.m_eff * dt;
    let x = state.x + v * dt;
    Ok(BodyState {
        x,
        v,
        t: state.t + dt,
    })
}
