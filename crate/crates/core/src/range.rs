//! Lumped Breguet range model driven by FLOPS-style scale factors.
//!
//! The vehicle is a fixed reference airframe. Each factor perturbs one ingredient of
//! the range equation:
//!
//! * `weng`, `owfact`, `frfu`: engine, operating-empty and centre-body weights,
//! * `fact`: fuel flow (multiplies TSFC),
//! * `fcdo`, `fcdi`: lift-independent and lift-dependent drag,
//! * `e_span`: span efficiency,
//! * `rspsob`, `rspchd`: rear-spar chord fractions, which set the wingbox width and
//!   therefore the usable fuel volume (linear proxy, see [`RangeBaseline::fuel_volume_factor`]).

use serde::{Deserialize, Serialize};

use crate::atmosphere::CruiseCondition;
use crate::{Error, Result, STANDARD_GRAVITY};

/// Fixed reference airframe. Weights in kg, TSFC in 1/s (weight of fuel per unit
/// thrust per second).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeBaseline {
    pub tsfc: f64,
    pub wing_area: f64,
    pub aspect_ratio: f64,
    pub cd0: f64,
    pub oswald: f64,
    pub engine_weight: f64,
    pub other_empty_weight: f64,
    pub centerbody_weight: f64,
    pub payload: f64,
    pub fuel_capacity: f64,
    pub reserve_fraction: f64,
    /// Front-spar chord fraction bounding the fuel box ahead of the rear spars.
    pub front_spar: f64,
    pub rspsob_ref: f64,
    pub rspchd_ref: f64,
}

impl Default for RangeBaseline {
    fn default() -> Self {
        Self {
            tsfc: 1.53e-4,
            wing_area: 420.0,
            aspect_ratio: 6.0,
            cd0: 0.0095,
            oswald: 0.85,
            engine_weight: 9_000.0,
            other_empty_weight: 70_000.0,
            centerbody_weight: 25_000.0,
            payload: 30_000.0,
            fuel_capacity: 60_000.0,
            reserve_fraction: 0.08,
            front_spar: 0.15,
            rspsob_ref: 0.60,
            rspchd_ref: 0.65,
        }
    }
}

impl RangeBaseline {
    /// Fuel volume relative to the reference, proportional to the summed box widths
    /// `(rear - front)` at the side of body and at the centreline.
    pub fn fuel_volume_factor(&self, rspsob: f64, rspchd: f64) -> f64 {
        ((rspsob - self.front_spar) + (rspchd - self.front_spar))
            / ((self.rspsob_ref - self.front_spar) + (self.rspchd_ref - self.front_spar))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeModelInputs {
    pub weng: f64,
    pub owfact: f64,
    pub fact: f64,
    pub fcdi: f64,
    pub fcdo: f64,
    pub frfu: f64,
    pub e_span: f64,
    pub rspsob: f64,
    pub rspchd: f64,
    pub cruise: CruiseCondition,
    pub baseline: RangeBaseline,
}

/// Factor names accepted by [`RangeModelInputs::set`], in default column order.
pub const FACTOR_NAMES: [&str; 9] = [
    "WENG", "OWFACT", "FACT", "RSPSOB", "RSPCHD", "FCDI", "FCDO", "FRFU", "E",
];

pub const FACTOR_LIMITS: (f64, f64) = (0.9, 1.1);

impl Default for RangeModelInputs {
    fn default() -> Self {
        let baseline = RangeBaseline::default();
        Self {
            weng: 1.0,
            owfact: 1.0,
            fact: 1.0,
            fcdi: 1.0,
            fcdo: 1.0,
            frfu: 1.0,
            e_span: 1.0,
            rspsob: baseline.rspsob_ref,
            rspchd: baseline.rspchd_ref,
            cruise: CruiseCondition {
                mach: 0.84,
                alpha: 0.0,
                altitude: 10_000.0,
            },
            baseline,
        }
    }
}

impl RangeModelInputs {
    /// Sets a factor by its upper-case name.
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        let slot = match name {
            "WENG" => &mut self.weng,
            "OWFACT" => &mut self.owfact,
            "FACT" => &mut self.fact,
            "FCDI" => &mut self.fcdi,
            "FCDO" => &mut self.fcdo,
            "FRFU" => &mut self.frfu,
            "E" => &mut self.e_span,
            "RSPSOB" => &mut self.rspsob,
            "RSPCHD" => &mut self.rspchd,
            _ => {
                return Err(Error::InvalidInput(alloc::format!(
                    "unknown range-model factor `{name}`"
                )))
            }
        };
        *slot = value;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let factors = [
            ("WENG", self.weng),
            ("OWFACT", self.owfact),
            ("FACT", self.fact),
            ("FCDI", self.fcdi),
            ("FCDO", self.fcdo),
            ("FRFU", self.frfu),
            ("E", self.e_span),
        ];
        for (name, v) in factors {
            if !(v >= FACTOR_LIMITS.0 && v <= FACTOR_LIMITS.1) {
                return Err(Error::InvalidInput(alloc::format!(
                    "{name} = {v} outside [{}, {}]",
                    FACTOR_LIMITS.0,
                    FACTOR_LIMITS.1
                )));
            }
        }
        for (name, v) in [("RSPSOB", self.rspsob), ("RSPCHD", self.rspchd)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidInput(alloc::format!("{name} = {v} outside (0, 1)")));
            }
        }
        self.cruise.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RangeBreakdown {
    pub range: f64,
    pub velocity: f64,
    pub tsfc: f64,
    pub lift_to_drag: f64,
    pub cl: f64,
    pub cd: f64,
    pub initial_weight: f64,
    pub final_weight: f64,
}

/// Range in metres with all intermediate quantities.
pub fn lumped_range_breakdown(inp: &RangeModelInputs) -> Result<RangeBreakdown> {
    inp.validate()?;
    let b = &inp.baseline;
    let atm = inp.cruise.atmosphere()?;
    let v = atm.velocity(inp.cruise.mach);
    let q = 0.5 * atm.density * v * v;

    let empty = inp.owfact * (inp.weng * b.engine_weight + b.other_empty_weight + inp.frfu * b.centerbody_weight);
    let fuel = b.fuel_capacity * b.fuel_volume_factor(inp.rspsob, inp.rspchd);
    let burn = fuel * (1.0 - b.reserve_fraction);
    let w0 = empty + b.payload + fuel;
    let w1 = w0 - burn;
    if !(burn > 0.0) || w1 >= w0 {
        return Err(Error::NegativeFuelFraction);
    }

    let w_mid = libm::sqrt(w0 * w1) * STANDARD_GRAVITY;
    let cl = w_mid / (q * b.wing_area);
    let k = 1.0 / (core::f64::consts::PI * b.oswald * inp.e_span * b.aspect_ratio);
    let cd = inp.fcdo * b.cd0 + inp.fcdi * k * cl * cl;
    let ld = cl / cd;
    let tsfc = b.tsfc * inp.fact;
    let range = v / tsfc * ld * libm::log(w0 / w1);
    Ok(RangeBreakdown {
        range,
        velocity: v,
        tsfc,
        lift_to_drag: ld,
        cl,
        cd,
        initial_weight: w0,
        final_weight: w1,
    })
}

pub fn lumped_range(inp: &RangeModelInputs) -> Result<f64> {
    lumped_range_breakdown(inp).map(|r| r.range)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::ParameterSpace;
    use proptest::prelude::*;

    /// Baseline range of the reference airframe, metres.
    const R0: f64 = 10_859_993.461_362_3;

    #[test]
    fn baseline_anchor() {
        let r = lumped_range(&RangeModelInputs::default()).unwrap();
        assert!((r - R0).abs() < 1e-6 * R0, "{r}");
    }

    #[test]
    fn more_drag_less_range() {
        let inp = RangeModelInputs {
            fcdo: 1.05,
            ..Default::default()
        };
        assert!(lumped_range(&inp).unwrap() < R0);
    }

    #[test]
    fn fuel_flow_is_linear() {
        let r0 = lumped_range(&RangeModelInputs::default()).unwrap();
        let inp = RangeModelInputs {
            fact: 0.95,
            ..Default::default()
        };
        assert!((lumped_range(&inp).unwrap() - r0 / 0.95).abs() <= 1e-9 * r0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let inp = RangeModelInputs {
            rspsob: 0.1,
            rspchd: 0.15,
            ..Default::default()
        };
        assert_eq!(lumped_range(&inp), Err(Error::NegativeFuelFraction));
        let inp = RangeModelInputs {
            weng: 1.2,
            ..Default::default()
        };
        assert!(matches!(lumped_range(&inp), Err(Error::InvalidInput(_))));
        assert!(RangeModelInputs::default().set("XYZ", 1.0).is_err());
    }

    #[test]
    fn default_space_maps_onto_factors() {
        let space = ParameterSpace::lumped_range_default();
        let mut inp = RangeModelInputs::default();
        for (p, name) in space.params().iter().zip(FACTOR_NAMES) {
            assert_eq!(p.name, name);
            inp.set(name, p.nominal).unwrap();
        }
        assert_eq!(inp, RangeModelInputs::default());
    }

    proptest! {
        #[test]
        fn monotone_in_factors(f in 0.9f64..1.1) {
            let r0 = lumped_range(&RangeModelInputs::default()).unwrap();
            let inp = RangeModelInputs { fcdi: f, ..Default::default() };
            let r = lumped_range(&inp).unwrap();
            prop_assert!((f > 1.0 && r < r0) || (f <= 1.0 && r >= r0));
            let inp = RangeModelInputs { weng: f, ..Default::default() };
            let r = lumped_range(&inp).unwrap();
            prop_assert!((f > 1.0 && r < r0) || (f <= 1.0 && r >= r0));
        }
    }
}
