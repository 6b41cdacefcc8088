use serde::Serialize;
use subscale_core::atmosphere::CruiseCondition;
use subscale_core::scaling::{
    optimize, AeroelasticExperiment, CostBreakdown, CostWeights, DesignVector, KktReport, ScalingBounds, ScalingProblem,
};
use subscale_core::similitude::{ScaleReference, SimilitudeReport};
use subscale_core::sqp::{SqpOptions, Termination};

use crate::baseline::Baseline;
use crate::config::PipelineConfig;
use crate::error::{analysis, model, CliError};
use crate::output::{num, Artifacts};
use crate::record::Stats;

#[derive(Debug, Serialize)]
struct OptimumDoc<'a> {
    structure: &'a str,
    full_scale_condition: CruiseCondition,
    bounds: ScalingBounds,
    weights: CostWeights,
    solver: SqpOptions,
    x0: DesignVector,
    x: DesignVector,
    cost: CostBreakdown,
    start_cost: CostBreakdown,
    termination: Termination,
    iterations: usize,
    evaluations: usize,
    active_set: &'a [String],
    gradient: &'a [f64],
    kkt: &'a KktReport,
    full_scale: ScaleReference,
    sub_scale: ScaleReference,
    similitude: &'a SimilitudeReport,
}

pub fn run(cfg: &PipelineConfig, art: &mut Artifacts, stats: &mut Stats) -> Result<(), CliError> {
    let sc = &cfg.scaling;
    let baseline = Baseline::embedded();
    let spec = baseline
        .wing_by_label(&sc.structure)
        .ok_or_else(|| CliError::Config(format!("unknown scaling structure `{}`", sc.structure)))?;
    let experiment = stats
        .time("reference", || {
            AeroelasticExperiment::new(spec, baseline.cruise, Default::default())
        })
        .map_err(model)?;

    let mut prob = ScalingProblem::new(experiment);
    prob.bounds = sc.bounds.resolve();
    prob.weights = sc.weights;
    prob.sqp.max_iterations = sc.max_iterations;

    let res = stats
        .time("optimization", || optimize(&prob, &sc.x0))
        .map_err(analysis)?;
    stats.evaluations += res.trace.evaluations;
    if res.trace.termination != Termination::Converged {
        log::warn!("optimizer stopped without converging: {:?}", res.trace.termination);
    }

    stats.time("write", || -> Result<(), CliError> {
        art.csv(
            "scale_opt_trace.csv",
            &[
                "iter",
                "n",
                "alpha",
                "mach",
                "altitude",
                "young_modulus",
                "ld_term",
                "re_term",
                "ma_term",
                "total",
                "violation",
                "gradient_norm",
            ],
            res.trace.iterates.iter().map(|t| {
                let mut rec = vec![t.iteration.to_string()];
                rec.extend(t.x.to_array().iter().map(|&v| num(v)));
                rec.extend(
                    [
                        t.cost.ld_term,
                        t.cost.re_term,
                        t.cost.ma_term,
                        t.cost.total,
                        t.violation,
                        t.gradient_norm,
                    ]
                    .map(num),
                );
                rec
            }),
        )?;
        art.json(
            "scale_opt_result.json",
            &OptimumDoc {
                structure: &sc.structure,
                full_scale_condition: baseline.cruise,
                bounds: prob.bounds,
                weights: prob.weights,
                solver: prob.sqp,
                x0: sc.x0,
                x: res.x,
                cost: res.cost,
                start_cost: res.start_cost,
                termination: res.trace.termination,
                iterations: res.trace.iterates.len().saturating_sub(1),
                evaluations: res.trace.evaluations,
                active_set: &res.kkt.active_set,
                gradient: &res.gradient,
                kkt: &res.kkt,
                full_scale: res.full_scale,
                sub_scale: res.sub_scale,
                similitude: &res.similitude,
            },
        )?;
        art.text("similitude.txt", &format!("{}\n", res.similitude))
    })
}
