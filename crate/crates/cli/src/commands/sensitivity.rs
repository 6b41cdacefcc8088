use rayon::prelude::*;
use serde::Serialize;
use subscale_core::sobol::{
    analyze, rank_parameters, AnalysisOptions, Bootstrap, EvaluatedDesign, FailurePolicy, Method, SensitivityResult,
};
use subscale_core::space::{flatten_for_evaluation, saltelli_design_with, BaseSampler, MatrixId};
use subscale_core::surrogate::{fit_rse, sobol_via_surrogate, subsample, term_count, FitStats};

use crate::baseline::Baseline;
use crate::config::PipelineConfig;
use crate::error::{analysis, CliError};
use crate::models::Evaluator;
use crate::output::{num, Artifacts};
use crate::record::Stats;

#[derive(Debug, Serialize)]
struct RankingDoc {
    threshold: f64,
    order: Vec<String>,
    critical: Vec<String>,
    warning: Option<String>,
}

#[derive(Debug, Serialize)]
struct SurrogateDoc {
    label: String,
    fraction: f64,
    train_rows: usize,
    terms: usize,
    rank: usize,
    fit: FitStats,
    warnings: Vec<String>,
    result: SensitivityResult,
}

#[derive(Debug, Serialize)]
struct SensitivityDoc {
    model: String,
    parameters: Vec<String>,
    base_n: usize,
    second_order: bool,
    sampler: BaseSampler,
    seed: u64,
    total_evaluations: usize,
    failed_evaluations: usize,
    qmc: SensitivityResult,
    ranking: RankingDoc,
    surrogates: Vec<SurrogateDoc>,
}

fn block_label(id: MatrixId) -> String {
    match id {
        MatrixId::A => "A".into(),
        MatrixId::B => "B".into(),
        MatrixId::AB(i) => format!("AB{}", i + 1),
        MatrixId::BA(i) => format!("BA{}", i + 1),
    }
}

/// `surrogate_full` for fraction 1, `surrogate_fraction` for a single partial
/// fraction, `surrogate_fraction_<f>` when there are several.
fn surrogate_label(f: f64, fractions: &[f64]) -> String {
    if f == 1.0 {
        "surrogate_full".into()
    } else if fractions.iter().filter(|&&g| g != 1.0).count() == 1 {
        "surrogate_fraction".into()
    } else {
        format!("surrogate_fraction_{f}")
    }
}

pub fn run(cfg: &PipelineConfig, art: &mut Artifacts, stats: &mut Stats) -> Result<(), CliError> {
    let space = cfg.space()?;
    let names = space.names();
    let model = Evaluator::new(&cfg.model, &Baseline::embedded(), &space)?;
    let s = &cfg.sampler;
    stats.seed = Some(s.seed);
    stats.sampler = Some(format!("{:?}", s.sampler).to_lowercase());

    let (design, flat) = design_or_config(stats.time("sampling", || {
        saltelli_design_with(&space, s.base_n, s.seed, s.second_order, s.sampler).map(|d| {
            let f = flatten_for_evaluation(&d);
            (d, f)
        })
    }))?;

    let y: Vec<f64> = stats.time("evaluation", || {
        (0..flat.rows())
            .into_par_iter()
            .map(|i| model.evaluate(flat.row(i)))
            .collect()
    });
    let failed = y.iter().filter(|v| !v.is_finite()).count();
    stats.evaluations += y.len();
    stats.failures += failed;
    log::info!("{} evaluations, {failed} failed", y.len());
    if failed == y.len() {
        return Err(CliError::Model(format!("all {} evaluations failed", y.len())));
    }

    let (qmc, ranking) = stats.time("estimation", || -> Result<_, CliError> {
        let ev = EvaluatedDesign::from_flat(&design, &y, FailurePolicy::DropPairs).map_err(analysis)?;
        let opts = AnalysisOptions {
            bootstrap: (s.bootstrap > 0).then_some(Bootstrap {
                replicates: s.bootstrap,
                seed: s.seed,
            }),
        };
        let qmc = analyze(&ev, &names, Method::Qmc, &opts).map_err(analysis)?;
        let ranking = rank_parameters(&qmc, s.critical_threshold);
        Ok((qmc, ranking))
    })?;
    if let Some(w) = &ranking.warning {
        log::warn!("{w}");
    }

    let fractions = &cfg.surrogate.fractions;
    let surrogates = stats.time("surrogate", || -> Result<Vec<SurrogateDoc>, CliError> {
        let keep: Vec<usize> = (0..y.len()).filter(|&i| y[i].is_finite()).collect();
        let x_all = flat.select_rows(&keep);
        let y_all: Vec<f64> = keep.iter().map(|&i| y[i]).collect();
        let terms = term_count(space.dimension(), cfg.surrogate.interactions);
        let mut out = Vec::new();
        for (k, &f) in fractions.iter().enumerate() {
            let k = k as u64;
            let (xs, ys) = subsample(&x_all, &y_all, f, s.seed.wrapping_add(1 + k), terms).map_err(analysis)?;
            let rse = fit_rse(&xs, &ys, cfg.surrogate.interactions).map_err(analysis)?;
            let method = if f == 1.0 {
                Method::SurrogateFull
            } else {
                Method::SurrogateFraction
            };
            let result = sobol_via_surrogate(
                &rse,
                &space,
                s.base_n,
                s.seed.wrapping_add(1001 + k),
                s.second_order,
                method,
            )
            .map_err(analysis)?;
            let label = surrogate_label(f, fractions);
            art.json(&format!("rse_{label}.json"), &rse)?;
            out.push(SurrogateDoc {
                label,
                fraction: f,
                train_rows: xs.rows(),
                terms: rse.terms.len(),
                rank: rse.rank,
                fit: rse.fit_stats,
                warnings: rse.warnings.clone(),
                result,
            });
        }
        Ok(out)
    })?;

    stats.time("write", || -> Result<(), CliError> {
        let mut header: Vec<String> = vec!["block".into(), "row".into()];
        header.extend(names.iter().cloned());
        header.push("y".into());
        let h: Vec<&str> = header.iter().map(String::as_str).collect();
        art.csv(
            "sensitivity_design.csv",
            &h,
            (0..flat.rows()).map(|i| {
                let (id, r) = design.locate(i);
                let mut rec = vec![block_label(id), r.to_string()];
                rec.extend(flat.row(i).iter().map(|&v| num(v)));
                rec.push(num(y[i]));
                rec
            }),
        )?;

        let mut header: Vec<String> = [
            "parameter",
            "rank",
            "critical",
            "s1_qmc",
            "st_qmc",
            "s1_raw",
            "st_raw",
            "st_lo",
            "st_hi",
        ]
        .map(String::from)
        .to_vec();
        for sdoc in &surrogates {
            header.push(format!("s1_{}", sdoc.label));
            header.push(format!("st_{}", sdoc.label));
        }
        let h: Vec<&str> = header.iter().map(String::as_str).collect();
        let ci = qmc.diagnostics.confidence.as_ref();
        art.csv(
            "sensitivity_indices.csv",
            &h,
            (0..names.len()).map(|i| {
                let rank = ranking.order.iter().position(|&j| j == i).unwrap() + 1;
                let (lo, hi) = ci.map(|c| c.st[i]).unwrap_or((f64::NAN, f64::NAN));
                let mut rec = vec![
                    names[i].clone(),
                    rank.to_string(),
                    ranking.critical.contains(&i).to_string(),
                    num(qmc.s1[i]),
                    num(qmc.st[i]),
                    num(qmc.diagnostics.s1_raw[i]),
                    num(qmc.diagnostics.st_raw[i]),
                    num(lo),
                    num(hi),
                ];
                for sdoc in &surrogates {
                    rec.push(num(sdoc.result.s1[i]));
                    rec.push(num(sdoc.result.st[i]));
                }
                rec
            }),
        )?;

        // Long form, one bar per (method, parameter).
        let mut bars = Vec::new();
        let methods = std::iter::once(("qmc".to_string(), 1.0, &qmc))
            .chain(surrogates.iter().map(|d| (d.label.clone(), d.fraction, &d.result)));
        for (label, fraction, res) in methods {
            for i in 0..names.len() {
                bars.push(vec![
                    label.clone(),
                    num(fraction),
                    names[i].clone(),
                    num(res.s1[i]),
                    num(res.st[i]),
                ]);
            }
        }
        art.csv(
            "sensitivity_bars.csv",
            &["method", "fraction", "parameter", "s1", "st"],
            bars,
        )?;

        if let Some(s2) = &qmc.s2 {
            let mut rows = Vec::new();
            for i in 0..names.len() {
                for j in i + 1..names.len() {
                    rows.push(vec![names[i].clone(), names[j].clone(), num(s2[i][j])]);
                }
            }
            art.csv("sensitivity_s2.csv", &["parameter_i", "parameter_j", "s2"], rows)?;
        }

        let doc = SensitivityDoc {
            model: cfg.model.name(),
            parameters: names.clone(),
            base_n: s.base_n,
            second_order: s.second_order,
            sampler: s.sampler,
            seed: s.seed,
            total_evaluations: y.len(),
            failed_evaluations: failed,
            ranking: RankingDoc {
                threshold: ranking.threshold,
                order: ranking.ordered_names(&qmc).into_iter().map(String::from).collect(),
                critical: ranking.critical_names(&qmc).into_iter().map(String::from).collect(),
                warning: ranking.warning.clone(),
            },
            qmc: qmc.clone(),
            surrogates,
        };
        art.json("sensitivity.json", &doc)
    })
}

fn design_or_config<T>(r: subscale_core::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| CliError::Config(format!("sampling: {e}")))
}
