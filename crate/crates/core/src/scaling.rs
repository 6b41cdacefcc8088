//! Sub-scale experiment design: pick scale, attitude, Mach, altitude and material
//! stiffness so that a free-flying model reproduces the full-scale L/D, Reynolds and
//! Mach numbers as closely as the bounds allow.
//!
//! The cost is
//!
//! ```text
//! f = w_ld |Δ(L/D)/(L/D)_F|² + w_re |ΔRe/Re_F|² + w_ma |ΔMa/Ma_F|²
//! ```
//!
//! and any model failure returns [`PENALTY_COST`] instead.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::aerostruct::{
    evaluate_aerostruct_with, AeroStructOptions, AeroStructResult, Mesh, WingModelSpec, ALUMINIUM_E,
};
use crate::atmosphere::{isa_atmosphere, CruiseCondition};
use crate::similitude::{mass_scale_factor, similitude_report, ScaleReference, SimilitudeReport};
use crate::sqp::{fd_gradient, minimize_bounded, projected_gradient_norm, Bounds, Evaluation, SqpOptions, Termination};
use crate::{Error, Result};

/// Cost returned for points where the model cannot be evaluated.
pub const PENALTY_COST: f64 = 1e6;

pub const VARIABLE_NAMES: [&str; 5] = ["n", "alpha", "mach", "altitude", "young_modulus"];

/// `[n, α (deg), Ma, h (m), E (Pa)]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignVector {
    pub n: f64,
    pub alpha: f64,
    pub mach: f64,
    pub altitude: f64,
    pub young_modulus: f64,
}

impl DesignVector {
    pub fn new(n: f64, alpha: f64, mach: f64, altitude: f64, young_modulus: f64) -> Self {
        Self {
            n,
            alpha,
            mach,
            altitude,
            young_modulus,
        }
    }

    /// Starting point `[0.1, 0, 0.84, 10000, 73.1e9]`.
    pub fn default_start() -> Self {
        Self::new(0.1, 0.0, 0.84, 10_000.0, ALUMINIUM_E)
    }

    pub fn to_array(&self) -> [f64; 5] {
        [self.n, self.alpha, self.mach, self.altitude, self.young_modulus]
    }

    pub fn from_slice(x: &[f64]) -> Self {
        Self::new(x[0], x[1], x[2], x[3], x[4])
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingBounds {
    pub n: (f64, f64),
    pub alpha: (f64, f64),
    pub mach: (f64, f64),
    pub altitude: (f64, f64),
    pub young_modulus: (f64, f64),
}

impl ScalingBounds {
    /// `n ∈ (0, 0.2]`, `α ∈ [0, 10]`, `Ma ∈ [0.8, 0.87]`, `h ∈ [0, 20000]`,
    /// `E ∈ (0, 3 E_F]`. The open lower ends are closed at `1e-3` and `1e-3 E_F`.
    pub fn standard(e_full: f64) -> Self {
        Self {
            n: (1e-3, 0.2),
            alpha: (0.0, 10.0),
            mach: (0.8, 0.87),
            altitude: (0.0, 20_000.0),
            young_modulus: (1e-3 * e_full, 3.0 * e_full),
        }
    }

    pub fn pairs(&self) -> [(f64, f64); 5] {
        [self.n, self.alpha, self.mach, self.altitude, self.young_modulus]
    }

    pub fn to_bounds(&self) -> Result<Bounds> {
        let p = self.pairs();
        for (name, (lo, hi)) in VARIABLE_NAMES.iter().zip(p) {
            if !(lo.is_finite() && hi.is_finite()) {
                return Err(Error::InvalidBounds((*name).into()));
            }
            if lo > hi {
                return Err(Error::InvalidBounds(alloc::format!(
                    "{name}: lower {lo} above upper {hi}"
                )));
            }
        }
        if p[0].0 <= 0.0 || p[4].0 <= 0.0 {
            return Err(Error::InvalidBounds("n and young_modulus must stay positive".into()));
        }
        Bounds::new(p.iter().map(|b| b.0).collect(), p.iter().map(|b| b.1).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CostWeights {
    pub ld: f64,
    pub re: f64,
    pub ma: f64,
}

impl Default for CostWeights {
    fn default() -> Self {
        Self {
            ld: 1.0,
            re: 30.0,
            ma: 3000.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub ld_term: f64,
    pub re_term: f64,
    pub ma_term: f64,
    pub total: f64,
    pub penalty_applied: bool,
}

impl CostBreakdown {
    pub fn penalty() -> Self {
        Self {
            ld_term: 0.0,
            re_term: 0.0,
            ma_term: 0.0,
            total: PENALTY_COST,
            penalty_applied: true,
        }
    }
}

/// A sub-scale experiment whose outputs can be compared to a full-scale reference.
pub trait ExperimentModel {
    fn full_scale(&self) -> &ScaleReference;

    /// Sub-scale state at design `x`. Errors mark the point as failed.
    fn evaluate(&self, x: &DesignVector) -> Result<ScaleReference>;
}

/// Swept-wing aeroelastic stand-in: full scale at cruise, sub scale built by geometric
/// scaling with mass matched through the density ratio.
#[derive(Debug, Clone, PartialEq)]
pub struct AeroelasticExperiment {
    pub spec: WingModelSpec,
    pub cruise: CruiseCondition,
    pub options: AeroStructOptions,
    pub full_result: AeroStructResult,
    full_ref: ScaleReference,
}

impl AeroelasticExperiment {
    pub fn new(spec: WingModelSpec, cruise: CruiseCondition, options: AeroStructOptions) -> Result<Self> {
        let full_result = evaluate_aerostruct_with(&spec, &cruise, &options)?;
        if !full_result.converged {
            return Err(Error::EvaluationFailed(
                "full-scale aeroelastic iteration did not converge",
            ));
        }
        let atm = cruise.atmosphere()?;
        let full_ref = ScaleReference::from_model(&spec, &atm, &full_result);
        Ok(Self {
            spec,
            cruise,
            options,
            full_result,
            full_ref,
        })
    }

    /// Wingbox wing (medium mesh) at `α = 9°`, `Ma = 0.84`, `h = 10000 m`.
    pub fn standard() -> Self {
        Self::new(
            WingModelSpec::wingbox(Mesh::Medium),
            CruiseCondition {
                mach: 0.84,
                alpha: 9.0,
                altitude: 10_000.0,
            },
            AeroStructOptions::default(),
        )
        .expect("baseline wing evaluates at cruise")
    }

    /// Scaled model and its result at `x`.
    pub fn sub_scale(&self, x: &DesignVector) -> Result<(WingModelSpec, AeroStructResult)> {
        if !x.is_finite() || x.n <= 0.0 || x.young_modulus <= 0.0 {
            return Err(Error::InvalidInput(
                "design vector must be finite with positive n and E".into(),
            ));
        }
        let atm = isa_atmosphere(x.altitude)?;
        let n_mass = mass_scale_factor(self.full_ref.density, atm.density, x.n);
        let spec = self.spec.scaled(x.n, x.young_modulus, n_mass);
        let cond = CruiseCondition::new(x.mach, x.alpha, x.altitude)?;
        let r = evaluate_aerostruct_with(&spec, &cond, &self.options)?;
        Ok((spec, r))
    }
}

impl ExperimentModel for AeroelasticExperiment {
    fn full_scale(&self) -> &ScaleReference {
        &self.full_ref
    }

    fn evaluate(&self, x: &DesignVector) -> Result<ScaleReference> {
        let (spec, r) = self.sub_scale(x)?;
        if !r.converged {
            return Err(Error::EvaluationFailed("aeroelastic iteration did not converge"));
        }
        if !(r.l_over_d.is_finite() && r.reynolds.is_finite()) {
            return Err(Error::EvaluationFailed("non-finite sub-scale outputs"));
        }
        Ok(ScaleReference::from_model(&spec, &isa_atmosphere(x.altitude)?, &r))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingProblem<M> {
    pub model: M,
    pub bounds: ScalingBounds,
    pub weights: CostWeights,
    pub sqp: SqpOptions,
}

impl ScalingProblem<AeroelasticExperiment> {
    pub fn standard() -> Self {
        Self::new(AeroelasticExperiment::standard())
    }
}

impl<M: ExperimentModel> ScalingProblem<M> {
    /// Default bounds (relative to the full-scale `E` of the model, when it has one),
    /// weights and solver settings.
    pub fn new(model: M) -> Self {
        Self {
            model,
            bounds: ScalingBounds::standard(ALUMINIUM_E),
            weights: CostWeights::default(),
            sqp: SqpOptions::default(),
        }
    }

    pub fn full_ref(&self) -> &ScaleReference {
        self.model.full_scale()
    }

    pub fn validate(&self) -> Result<()> {
        let w = self.weights;
        if !(w.ld > 0.0 && w.re > 0.0 && w.ma > 0.0) {
            return Err(Error::InvalidInput("cost weights must be positive".into()));
        }
        self.bounds.to_bounds().map(|_| ())
    }
}

/// Cost terms at the sub-scale state `sub`.
pub fn cost_terms(full: &ScaleReference, sub: &ScaleReference, w: &CostWeights) -> CostBreakdown {
    let rel = |s: f64, f: f64| (s - f) / f;
    let ld = rel(sub.l_over_d, full.l_over_d);
    let re = rel(sub.reynolds, full.reynolds);
    let ma = rel(sub.mach, full.mach);
    let ld_term = w.ld * ld * ld;
    let re_term = w.re * re * re;
    let ma_term = w.ma * ma * ma;
    let total = ld_term + re_term + ma_term;
    if !total.is_finite() {
        return CostBreakdown::penalty();
    }
    CostBreakdown {
        ld_term,
        re_term,
        ma_term,
        total,
        penalty_applied: false,
    }
}

pub fn evaluate_cost<M: ExperimentModel>(x: &DesignVector, prob: &ScalingProblem<M>) -> CostBreakdown {
    if !x.is_finite() {
        return CostBreakdown::penalty();
    }
    match prob.model.evaluate(x) {
        Ok(sub) => cost_terms(prob.full_ref(), &sub, &prob.weights),
        Err(_) => CostBreakdown::penalty(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub x: DesignVector,
    pub cost: CostBreakdown,
    pub violation: f64,
    pub gradient_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationTrace {
    pub iterates: Vec<TraceRow>,
    pub termination: Termination,
    pub active_constraints: Vec<String>,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintStatus {
    /// e.g. `n <= 0.2`.
    pub name: String,
    pub variable: String,
    pub bound: f64,
    /// Distance to the bound, positive when satisfied.
    pub slack: f64,
    pub active: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KktReport {
    pub constraints: Vec<ConstraintStatus>,
    pub active_set: Vec<String>,
    /// Bound violations `(constraint, magnitude)`.
    pub violations: Vec<(String, f64)>,
    pub projected_gradient_norm: f64,
    /// Projected gradient in bound-normalised units, comparable across variables.
    pub scaled_projected_gradient_norm: f64,
}

/// Slack-based feasibility and activity report. A bound is active when its slack is
/// below `1e-6` of the variable's range.
pub fn check_kkt(x: &DesignVector, gradient: &[f64], bounds: &ScalingBounds) -> KktReport {
    let xs = x.to_array();
    let mut constraints = Vec::new();
    let mut violations = Vec::new();
    let mut g_unit = [0.0; 5];
    for (i, (name, (lo, hi))) in VARIABLE_NAMES.iter().zip(bounds.pairs()).enumerate() {
        let width = (hi - lo).max(f64::MIN_POSITIVE);
        g_unit[i] = gradient.get(i).copied().unwrap_or(0.0) * width;
        for (label, bound, slack) in [(">=", lo, xs[i] - lo), ("<=", hi, hi - xs[i])] {
            let cname = alloc::format!("{name} {label} {bound}");
            if slack < 0.0 {
                violations.push((cname.clone(), -slack));
            }
            constraints.push(ConstraintStatus {
                name: cname,
                variable: (*name).into(),
                bound,
                slack,
                active: slack.abs() < 1e-6 * width,
            });
        }
    }
    let active_set = constraints
        .iter()
        .filter(|c| c.active)
        .map(|c| c.name.clone())
        .collect();
    let b = Bounds {
        lower: bounds.pairs().iter().map(|p| p.0).collect(),
        upper: bounds.pairs().iter().map(|p| p.1).collect(),
    };
    let unit = Bounds {
        lower: alloc::vec![0.0; 5],
        upper: alloc::vec![1.0; 5],
    };
    let z: Vec<f64> = (0..5)
        .map(|i| (xs[i] - b.lower[i]) / (b.upper[i] - b.lower[i]).max(f64::MIN_POSITIVE))
        .collect();
    KktReport {
        constraints,
        active_set,
        violations,
        projected_gradient_norm: projected_gradient_norm(&xs, gradient, &b, 1e-6),
        scaled_projected_gradient_norm: projected_gradient_norm(&z, &g_unit, &unit, 1e-6),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimumResult {
    pub x: DesignVector,
    pub cost: CostBreakdown,
    pub start_cost: CostBreakdown,
    pub trace: OptimizationTrace,
    pub gradient: Vec<f64>,
    pub kkt: KktReport,
    pub full_scale: ScaleReference,
    pub sub_scale: ScaleReference,
    pub similitude: SimilitudeReport,
}

impl OptimumResult {
    pub fn is_active(&self, constraint: &str) -> bool {
        self.kkt.active_set.iter().any(|c| c == constraint)
    }
}

/// Runs the bound-constrained SQP from `x0` and assembles the trace, activity report
/// and similitude report at the optimum.
pub fn optimize<M: ExperimentModel>(prob: &ScalingProblem<M>, x0: &DesignVector) -> Result<OptimumResult> {
    prob.validate()?;
    let bounds = prob.bounds.to_bounds()?;
    let objective = |x: &[f64]| {
        let c = evaluate_cost(&DesignVector::from_slice(x), prob);
        if c.penalty_applied {
            Evaluation::penalty(c.total)
        } else {
            Evaluation::ok(c.total)
        }
    };
    let res = minimize_bounded(objective, &x0.to_array(), &bounds, &prob.sqp)?;
    let x = DesignVector::from_slice(&res.x);
    let cost = evaluate_cost(&x, prob);
    if cost.penalty_applied {
        return Err(Error::Infeasible);
    }
    let sub = prob.model.evaluate(&x)?;
    let iterates = res
        .iterates
        .iter()
        .enumerate()
        .map(|(k, it)| {
            let xi = DesignVector::from_slice(&it.x);
            TraceRow {
                iteration: k,
                x: xi,
                cost: evaluate_cost(&xi, prob),
                violation: it.violation,
                gradient_norm: it.gradient_norm,
            }
        })
        .collect::<Vec<_>>();
    let start_cost = evaluate_cost(&DesignVector::from_slice(&bounds.project(&x0.to_array())), prob);
    let kkt = check_kkt(&x, &res.gradient, &prob.bounds);
    let full = *prob.full_ref();
    Ok(OptimumResult {
        x,
        cost,
        start_cost,
        trace: OptimizationTrace {
            iterates,
            termination: res.termination,
            active_constraints: kkt.active_set.clone(),
            evaluations: res.evaluations,
        },
        gradient: res.gradient,
        similitude: similitude_report(&full, &sub, x.n)?,
        kkt,
        full_scale: full,
        sub_scale: sub,
    })
}

/// Gradient of the total cost at `x` with the solver's finite-difference settings.
pub fn cost_gradient<M: ExperimentModel>(prob: &ScalingProblem<M>, x: &DesignVector) -> Result<Vec<f64>> {
    let bounds = prob.bounds.to_bounds()?;
    let fx = evaluate_cost(x, prob);
    if fx.penalty_applied {
        return Err(Error::EvaluationFailed("cost is penalised at the requested point"));
    }
    let f = |p: &[f64]| {
        let c = evaluate_cost(&DesignVector::from_slice(p), prob);
        if c.penalty_applied {
            Evaluation::penalty(c.total)
        } else {
            Evaluation::ok(c.total)
        }
    };
    Ok(fd_gradient(f, &x.to_array(), fx.total, prob.sqp.fd_step, Some(&bounds)))
}
