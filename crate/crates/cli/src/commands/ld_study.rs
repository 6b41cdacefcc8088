use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use subscale_core::aerostruct::AeroStructOptions;
use subscale_core::space::lhs_sample;
use subscale_core::study::{
    evaluate_cell, study_space, summarize, Clock, Histogram, StructureSummary, StudyStructure, STUDY_ALTITUDE,
    STUDY_COLUMNS,
};

use crate::baseline::Baseline;
use crate::config::PipelineConfig;
use crate::error::{analysis, CliError};
use crate::output::{num, Artifacts};
use crate::record::Stats;

struct WallClock(Instant);

impl Clock for WallClock {
    fn now(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

#[derive(Debug, Serialize)]
struct StudyDoc<'a> {
    altitude: f64,
    shared_rows: usize,
    seed: u64,
    columns: [&'static str; 4],
    summary: &'a [StructureSummary],
    histograms: &'a [Histogram],
}

pub fn run(cfg: &PipelineConfig, art: &mut Artifacts, stats: &mut Stats) -> Result<(), CliError> {
    let st = &cfg.study;
    let seed = cfg.sampler.seed;
    stats.seed = Some(seed);
    stats.sampler = Some("lhs".into());
    let baseline = Baseline::embedded();
    let structures: Vec<StudyStructure> = st
        .structures
        .iter()
        .map(|l| {
            baseline
                .wing_by_label(l)
                .map(|spec| StudyStructure { label: l.clone(), spec })
                .ok_or_else(|| CliError::Config(format!("unknown study structure `{l}`")))
        })
        .collect::<Result<_, _>>()?;

    let samples = stats
        .time("sampling", || lhs_sample(&study_space(), st.rows, seed))
        .map_err(|e| CliError::Config(format!("sampling: {e}")))?;

    let opts = AeroStructOptions::default();
    let clock = WallClock(Instant::now());
    let cells: Vec<(usize, usize)> = (0..structures.len())
        .flat_map(|s| (0..st.rows).map(move |r| (s, r)))
        .collect();
    let rows = stats.time("evaluation", || {
        cells
            .par_iter()
            .map(|&(s, r)| evaluate_cell(&structures[s], r, samples.row(r), &opts, &clock))
            .collect::<Vec<_>>()
    });
    let failed = rows.iter().filter(|r| r.failed).count();
    stats.evaluations += rows.len();
    stats.failures += failed;
    if failed == rows.len() {
        return Err(CliError::Model(format!("all {} study evaluations failed", rows.len())));
    }

    let labels: Vec<String> = structures.iter().map(|s| s.label.clone()).collect();
    let study = stats
        .time("summary", || summarize(rows, &labels, st.rows, st.bins))
        .map_err(analysis)?;

    stats.time("write", || -> Result<(), CliError> {
        let mut header = vec!["row", "structure"];
        header.extend(STUDY_COLUMNS);
        header.extend(["cl", "cd", "l_over_d", "runtime", "failed"]);
        art.csv(
            "ld_study_rows.csv",
            &header,
            study.rows.iter().map(|r| {
                let mut rec = vec![r.row.to_string(), r.structure.clone()];
                rec.extend(samples.row(r.row).iter().map(|&v| num(v)));
                rec.extend([
                    num(r.cl),
                    num(r.cd),
                    num(r.l_over_d),
                    num(r.runtime),
                    r.failed.to_string(),
                ]);
                rec
            }),
        )?;
        art.csv(
            "ld_study_summary.csv",
            &[
                "structure",
                "mean_l_over_d",
                "std_l_over_d",
                "mean_runtime",
                "evaluated",
                "failures",
            ],
            study.summary.iter().map(|s| {
                vec![
                    s.structure.clone(),
                    num(s.mean_l_over_d),
                    num(s.std_l_over_d),
                    num(s.mean_runtime),
                    s.evaluated.to_string(),
                    s.failures.to_string(),
                ]
            }),
        )?;
        art.csv(
            "ld_study_histogram.csv",
            &["structure", "bin", "lower", "upper", "count", "density"],
            study.histograms.iter().flat_map(|h| {
                (0..h.counts.len()).map(move |k| {
                    vec![
                        h.structure.clone(),
                        k.to_string(),
                        num(h.edges[k]),
                        num(h.edges[k + 1]),
                        h.counts[k].to_string(),
                        num(h.density[k]),
                    ]
                })
            }),
        )?;
        art.json(
            "ld_study_summary.json",
            &StudyDoc {
                altitude: STUDY_ALTITUDE,
                shared_rows: study.shared_rows,
                seed,
                columns: STUDY_COLUMNS,
                summary: &study.summary,
                histograms: &study.histograms,
            },
        )
    })
}
