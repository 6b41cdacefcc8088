//! Scalar models the sensitivity stage can drive.

use subscale_core::aerostruct::{evaluate_aerostruct_with, AeroStructOptions, WingModelSpec};
use subscale_core::atmosphere::CruiseCondition;
use subscale_core::range::{lumped_range, RangeModelInputs};
use subscale_core::space::ParameterSpace;

use crate::baseline::Baseline;
use crate::config::ModelConfig;
use crate::error::CliError;

/// A model bound to the column order of a parameter space. Evaluation failures come
/// back as NaN so the estimator can apply its failure policy.
#[derive(Debug, Clone)]
pub enum Evaluator {
    Range {
        base: RangeModelInputs,
        names: Vec<String>,
    },
    Aerostruct {
        spec: WingModelSpec,
        cruise: CruiseCondition,
        options: AeroStructOptions,
        names: Vec<String>,
    },
    Ishigami,
    Constant(f64),
}

pub fn ishigami(x: &[f64]) -> f64 {
    let (a, b) = (7.0, 0.1);
    x[0].sin() + a * x[1].sin().powi(2) + b * x[2].powi(4) * x[0].sin()
}

impl Evaluator {
    pub fn new(model: &ModelConfig, baseline: &Baseline, space: &ParameterSpace) -> Result<Self, CliError> {
        Ok(match model {
            ModelConfig::LumpedRange {} => Evaluator::Range {
                base: RangeModelInputs {
                    baseline: baseline.range,
                    ..RangeModelInputs::default()
                },
                names: space.names(),
            },
            ModelConfig::Aerostruct { structure } => Evaluator::Aerostruct {
                spec: baseline
                    .wing_by_label(structure)
                    .ok_or_else(|| CliError::Config(format!("unknown structure `{structure}`")))?,
                cruise: baseline.cruise,
                options: AeroStructOptions::default(),
                names: space.names(),
            },
            ModelConfig::Ishigami {} => Evaluator::Ishigami,
            ModelConfig::Constant { value } => Evaluator::Constant(*value),
        })
    }

    pub fn evaluate(&self, row: &[f64]) -> f64 {
        match self {
            Evaluator::Range { base, names } => {
                let mut inp = *base;
                for (n, &v) in names.iter().zip(row) {
                    if inp.set(n, v).is_err() {
                        return f64::NAN;
                    }
                }
                lumped_range(&inp).unwrap_or(f64::NAN)
            }
            Evaluator::Aerostruct {
                spec,
                cruise,
                options,
                names,
            } => {
                let mut s = *spec;
                let mut c = *cruise;
                for (n, &v) in names.iter().zip(row) {
                    match n.as_str() {
                        "alpha" => c.alpha = v,
                        "mach" => c.mach = v,
                        "altitude" => c.altitude = v,
                        "rear_spar" => s.structure.set_rear_spar(v),
                        "young_modulus" => s = s.with_young_modulus(v),
                        _ => return f64::NAN,
                    }
                }
                match evaluate_aerostruct_with(&s, &c, options) {
                    Ok(r) if r.converged => r.l_over_d,
                    _ => f64::NAN,
                }
            }
            Evaluator::Ishigami => ishigami(row),
            Evaluator::Constant(v) => *v,
        }
    }
}
