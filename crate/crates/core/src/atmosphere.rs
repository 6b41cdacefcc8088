//! International Standard Atmosphere, troposphere and lower stratosphere.

use serde::{Deserialize, Serialize};

use crate::{Error, Result, STANDARD_GRAVITY};

pub const SEA_LEVEL_TEMPERATURE: f64 = 288.15;
pub const SEA_LEVEL_PRESSURE: f64 = 101_325.0;
pub const LAPSE_RATE: f64 = 0.0065;
pub const GAS_CONSTANT: f64 = 287.052_87;
pub const HEAT_CAPACITY_RATIO: f64 = 1.4;
pub const TROPOPAUSE: f64 = 11_000.0;
pub const MAX_ALTITUDE: f64 = 20_000.0;

const SUTHERLAND_BETA: f64 = 1.458e-6;
const SUTHERLAND_S: f64 = 110.4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtmosphereState {
    pub altitude: f64,
    pub temperature: f64,
    pub pressure: f64,
    pub density: f64,
    pub speed_of_sound: f64,
    pub dynamic_viscosity: f64,
}

impl AtmosphereState {
    #[inline]
    pub fn velocity(&self, mach: f64) -> f64 {
        mach * self.speed_of_sound
    }

    pub fn kinematic_viscosity(&self) -> f64 {
        self.dynamic_viscosity / self.density
    }
}

/// ISA state at geopotential altitude `h` in metres, `0 <= h <= 20000`.
pub fn isa_atmosphere(h: f64) -> Result<AtmosphereState> {
    if !(0.0..=MAX_ALTITUDE).contains(&h) {
        return Err(Error::AltitudeOutOfRange(h));
    }
    let exponent = STANDARD_GRAVITY / (LAPSE_RATE * GAS_CONSTANT);
    let (temperature, pressure) = if h <= TROPOPAUSE {
        let t = SEA_LEVEL_TEMPERATURE - LAPSE_RATE * h;
        (t, SEA_LEVEL_PRESSURE * libm::pow(t / SEA_LEVEL_TEMPERATURE, exponent))
    } else {
        let t = SEA_LEVEL_TEMPERATURE - LAPSE_RATE * TROPOPAUSE;
        let p11 = SEA_LEVEL_PRESSURE * libm::pow(t / SEA_LEVEL_TEMPERATURE, exponent);
        (
            t,
            p11 * libm::exp(-STANDARD_GRAVITY * (h - TROPOPAUSE) / (GAS_CONSTANT * t)),
        )
    };
    Ok(AtmosphereState {
        altitude: h,
        temperature,
        pressure,
        density: pressure / (GAS_CONSTANT * temperature),
        speed_of_sound: libm::sqrt(HEAT_CAPACITY_RATIO * GAS_CONSTANT * temperature),
        dynamic_viscosity: SUTHERLAND_BETA * libm::pow(temperature, 1.5) / (temperature + SUTHERLAND_S),
    })
}

/// Steady cruise point: Mach number, angle of attack in degrees, altitude in metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CruiseCondition {
    pub mach: f64,
    pub alpha: f64,
    pub altitude: f64,
}

impl CruiseCondition {
    pub fn new(mach: f64, alpha: f64, altitude: f64) -> Result<Self> {
        let c = Self { mach, alpha, altitude };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mach > 0.0 && self.mach < 1.0) {
            return Err(Error::InvalidInput(alloc::format!(
                "Mach number {} outside (0, 1)",
                self.mach
            )));
        }
        if !self.alpha.is_finite() {
            return Err(Error::InvalidInput("non-finite angle of attack".into()));
        }
        isa_atmosphere(self.altitude).map(|_| ())
    }

    pub fn atmosphere(&self) -> Result<AtmosphereState> {
        isa_atmosphere(self.altitude)
    }

    /// True airspeed `Ma * a(h)`.
    pub fn velocity(&self) -> Result<f64> {
        Ok(self.atmosphere()?.velocity(self.mach))
    }
}
