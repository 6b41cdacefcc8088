//! Similarity groups linking a full-scale vehicle to a sub-scale experiment.
//!
//! The reference length is the mean aerodynamic chord throughout; stiffnesses are
//! taken at the wing root.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::aerostruct::{AeroStructResult, WingModelSpec};
use crate::atmosphere::AtmosphereState;
use crate::{Error, Result};

/// Ratios outside this band are flagged in a [`SimilitudeReport`].
pub const RATIO_BAND: (f64, f64) = (0.9, 1.1);

/// Mass scale of a free-flying model: `n_mass = (rho_F / rho_S) n³`, applied to
/// structural and fuel mass alike.
pub fn mass_scale_factor(rho_full: f64, rho_sub: f64, n: f64) -> f64 {
    rho_full / rho_sub * n * n * n
}

/// Aeroelastic bending parameter `S_b = EI / (rho V² L⁴)`.
pub fn bending_parameter(ei: f64, rho: f64, v: f64, l: f64) -> f64 {
    ei / (rho * v * v * l * l * l * l)
}

/// Aeroelastic torsion parameter `S_t = GJ / (rho V² L⁴)`.
pub fn torsion_parameter(gj: f64, rho: f64, v: f64, l: f64) -> f64 {
    gj / (rho * v * v * l * l * l * l)
}

pub fn reynolds(rho: f64, v: f64, l: f64, mu: f64) -> f64 {
    rho * v * l / mu
}

/// State of one scale (full or sub) as seen by the similarity groups.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleReference {
    pub density: f64,
    pub velocity: f64,
    pub length: f64,
    pub ei: f64,
    pub gj: f64,
    pub reynolds: f64,
    pub mach: f64,
    pub l_over_d: f64,
}

impl ScaleReference {
    pub fn from_model(spec: &WingModelSpec, atm: &AtmosphereState, result: &AeroStructResult) -> Self {
        Self {
            density: atm.density,
            velocity: atm.velocity(result.mach),
            length: spec.geometry.mean_aerodynamic_chord(),
            ei: result.root_ei,
            gj: result.root_gj,
            reynolds: result.reynolds,
            mach: result.mach,
            l_over_d: result.l_over_d,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("density", self.density),
            ("velocity", self.velocity),
            ("length", self.length),
            ("ei", self.ei),
            ("gj", self.gj),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(alloc::format!("reference {name} must be positive")));
            }
        }
        Ok(())
    }

    pub fn bending(&self) -> f64 {
        bending_parameter(self.ei, self.density, self.velocity, self.length)
    }

    pub fn torsion(&self) -> f64 {
        torsion_parameter(self.gj, self.density, self.velocity, self.length)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupRatio {
    pub name: String,
    pub full: f64,
    pub sub: f64,
    pub ratio: f64,
    /// Ratio outside [`RATIO_BAND`].
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilitudeReport {
    pub groups: Vec<GroupRatio>,
    pub geometric_scale: f64,
    pub mass_scale: f64,
}

impl SimilitudeReport {
    pub fn group(&self, name: &str) -> Option<&GroupRatio> {
        self.groups.iter().find(|g| g.name == name)
    }

    pub fn flagged(&self) -> impl Iterator<Item = &GroupRatio> {
        self.groups.iter().filter(|g| g.flagged)
    }
}

impl core::fmt::Display for SimilitudeReport {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        writeln!(f, "{:<6} {:>14} {:>14} {:>10}", "group", "full", "sub", "ratio")?;
        for g in &self.groups {
            writeln!(
                f,
                "{:<6} {:>14.6e} {:>14.6e} {:>10.6}{}",
                g.name,
                g.full,
                g.sub,
                g.ratio,
                if g.flagged { "  !" } else { "" }
            )?;
        }
        writeln!(f, "n      {:.6}", self.geometric_scale)?;
        write!(f, "n_mass {:.6e}", self.mass_scale)
    }
}

/// Re, Ma, S_b and S_t ratios (sub / full) plus geometric and mass scales.
pub fn similitude_report(full: &ScaleReference, sub: &ScaleReference, n: f64) -> Result<SimilitudeReport> {
    full.validate()?;
    sub.validate()?;
    let entry = |name: &str, f: f64, s: f64| {
        let ratio = s / f;
        GroupRatio {
            name: name.into(),
            full: f,
            sub: s,
            ratio,
            flagged: !(ratio >= RATIO_BAND.0 && ratio <= RATIO_BAND.1),
        }
    };
    Ok(SimilitudeReport {
        groups: alloc::vec![
            entry("Re", full.reynolds, sub.reynolds),
            entry("Ma", full.mach, sub.mach),
            entry("S_b", full.bending(), sub.bending()),
            entry("S_t", full.torsion(), sub.torsion()),
        ],
        geometric_scale: n,
        mass_scale: mass_scale_factor(full.density, sub.density, n),
    })
}
