//! L/D variability across model structures.
//!
//! Every structure is evaluated on the same rows of `(α, Ma, rear spar, E)`, so the
//! spread between structures reflects the model form and not the inputs.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::aerostruct::{evaluate_aerostruct_with, study_structures, AeroStructOptions, WingModelSpec, ALUMINIUM_E};
use crate::atmosphere::CruiseCondition;
use crate::space::{ParameterDef, ParameterSpace, SampleMatrix};
use crate::{Error, Result};

/// Column order of a study sample.
pub const STUDY_COLUMNS: [&str; 4] = ["alpha", "mach", "rear_spar", "young_modulus"];

/// Cruise altitude of the study, m.
pub const STUDY_ALTITUDE: f64 = 10_000.0;

/// Wall-clock source for the runtime column. The core crate has no clock of its own.
pub trait Clock {
    /// Seconds since an arbitrary fixed origin.
    fn now(&self) -> f64;
}

/// Clock that never advances; runtimes come out as zero.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn now(&self) -> f64 {
        0.0
    }
}

/// `α ∈ [7, 11]°`, `Ma ∈ [0.80, 0.86]`, rear spar `∈ [0.55, 0.65]`, `E` within ±10 % of aluminium.
pub fn study_space() -> ParameterSpace {
    ParameterSpace::new(alloc::vec![
        ParameterDef::uniform("alpha", 7.0, 11.0, 9.0).unwrap(),
        ParameterDef::uniform("mach", 0.80, 0.86, 0.84).unwrap(),
        ParameterDef::uniform("rear_spar", 0.55, 0.65, 0.60).unwrap(),
        ParameterDef::uniform("young_modulus", 0.9 * ALUMINIUM_E, 1.1 * ALUMINIUM_E, ALUMINIUM_E).unwrap(),
    ])
    .unwrap()
}

/// A labelled model structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyStructure {
    pub label: String,
    pub spec: WingModelSpec,
}

/// The five default structures: tubular spar coarse/medium, wingbox coarse/medium/fine.
pub fn default_structures() -> Vec<StudyStructure> {
    study_structures()
        .into_iter()
        .map(|(label, spec)| StudyStructure {
            label: label.into(),
            spec,
        })
        .collect()
}

/// Applies one sample row to a structure.
pub fn study_point(spec: &WingModelSpec, row: &[f64]) -> Result<(WingModelSpec, CruiseCondition)> {
    if row.len() != STUDY_COLUMNS.len() {
        return Err(Error::DimensionMismatch {
            expected: STUDY_COLUMNS.len(),
            got: row.len(),
        });
    }
    let mut s = spec.with_young_modulus(row[3]);
    s.structure.set_rear_spar(row[2]);
    s.validate()?;
    Ok((s, CruiseCondition::new(row[1], row[0], STUDY_ALTITUDE)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub row: usize,
    pub structure: String,
    pub cl: f64,
    pub cd: f64,
    pub l_over_d: f64,
    pub runtime: f64,
    /// Error or non-converged iteration; the row is excluded from the statistics.
    pub failed: bool,
}

/// Evaluates one (structure, row) cell and times it with `clock`.
pub fn evaluate_cell<C: Clock + ?Sized>(
    structure: &StudyStructure,
    row_index: usize,
    row: &[f64],
    opts: &AeroStructOptions,
    clock: &C,
) -> StudyRow {
    let t0 = clock.now();
    let r = study_point(&structure.spec, row).and_then(|(s, c)| evaluate_aerostruct_with(&s, &c, opts));
    let runtime = clock.now() - t0;
    let mut out = StudyRow {
        row: row_index,
        structure: structure.label.clone(),
        cl: f64::NAN,
        cd: f64::NAN,
        l_over_d: f64::NAN,
        runtime,
        failed: true,
    };
    if let Ok(r) = r {
        out.cl = r.cl;
        out.cd = r.cd;
        out.l_over_d = r.l_over_d;
        out.failed = !(r.converged && r.l_over_d.is_finite());
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureSummary {
    pub structure: String,
    pub mean_l_over_d: f64,
    /// Population standard deviation over the retained rows.
    pub std_l_over_d: f64,
    pub mean_runtime: f64,
    pub evaluated: usize,
    pub failures: usize,
}

/// Histogram of one structure's L/D on bin edges shared by all structures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub structure: String,
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    /// Probability density per bin.
    pub density: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdStudy {
    pub rows: Vec<StudyRow>,
    pub summary: Vec<StructureSummary>,
    pub histograms: Vec<Histogram>,
    pub shared_rows: usize,
}

fn shared_edges(values: impl Iterator<Item = f64>, bins: usize) -> Vec<f64> {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        lo = 0.0;
        hi = 1.0;
    }
    if hi - lo <= 1e-12 * lo.abs().max(1.0) {
        lo -= 0.5;
        hi += 0.5;
    }
    (0..=bins).map(|k| lo + (hi - lo) * k as f64 / bins as f64).collect()
}

/// Statistics and histograms from already evaluated cells. `rows` must hold every
/// structure on the same `shared_rows` rows; the order of `labels` is the report order.
pub fn summarize(rows: Vec<StudyRow>, labels: &[String], shared_rows: usize, bins: usize) -> Result<LdStudy> {
    if bins == 0 {
        return Err(Error::InvalidInput("histogram needs at least one bin".into()));
    }
    let edges = shared_edges(rows.iter().filter(|r| !r.failed).map(|r| r.l_over_d), bins);
    let width = edges[1] - edges[0];
    let mut summary = Vec::with_capacity(labels.len());
    let mut histograms = Vec::with_capacity(labels.len());
    for label in labels {
        let mine: Vec<&StudyRow> = rows.iter().filter(|r| &r.structure == label).collect();
        if mine.len() != shared_rows {
            return Err(Error::InvalidInput(alloc::format!(
                "structure {label} has {} rows, expected {shared_rows}",
                mine.len()
            )));
        }
        let ok: Vec<f64> = mine.iter().filter(|r| !r.failed).map(|r| r.l_over_d).collect();
        let n = ok.len();
        let (mean, std) = if n == 0 {
            (f64::NAN, f64::NAN)
        } else {
            // Shifted by the first value so identical rows give exactly zero spread.
            let k = ok[0];
            let d = ok.iter().map(|x| x - k).sum::<f64>() / n as f64;
            let v = ok.iter().map(|x| (x - k - d) * (x - k - d)).sum::<f64>() / n as f64;
            (k + d, libm::sqrt(v))
        };
        let mean_runtime = if mine.is_empty() {
            0.0
        } else {
            mine.iter().map(|r| r.runtime).sum::<f64>() / mine.len() as f64
        };
        let mut counts = alloc::vec![0usize; bins];
        for x in &ok {
            let k = (((x - edges[0]) / width) as usize).min(bins - 1);
            counts[k] += 1;
        }
        let density = counts
            .iter()
            .map(|&c| if n == 0 { 0.0 } else { c as f64 / (n as f64 * width) })
            .collect();
        summary.push(StructureSummary {
            structure: label.clone(),
            mean_l_over_d: mean,
            std_l_over_d: std,
            mean_runtime,
            evaluated: n,
            failures: mine.len() - n,
        });
        histograms.push(Histogram {
            structure: label.clone(),
            edges: edges.clone(),
            counts,
            density,
        });
    }
    Ok(LdStudy {
        rows,
        summary,
        histograms,
        shared_rows,
    })
}

/// Evaluates every structure on every row of `samples` (columns as in
/// [`STUDY_COLUMNS`]) sequentially. Rows are ordered structure-major.
pub fn ld_variability_study<C: Clock + ?Sized>(
    structures: &[StudyStructure],
    samples: &SampleMatrix,
    opts: &AeroStructOptions,
    clock: &C,
    bins: usize,
) -> Result<LdStudy> {
    if structures.is_empty() {
        return Err(Error::InvalidInput("study needs at least one structure".into()));
    }
    if samples.cols() != STUDY_COLUMNS.len() {
        return Err(Error::DimensionMismatch {
            expected: STUDY_COLUMNS.len(),
            got: samples.cols(),
        });
    }
    let mut rows = Vec::with_capacity(structures.len() * samples.rows());
    for s in structures {
        for (i, row) in samples.row_iter().enumerate() {
            rows.push(evaluate_cell(s, i, row, opts, clock));
        }
    }
    let labels: Vec<String> = structures.iter().map(|s| s.label.clone()).collect();
    summarize(rows, &labels, samples.rows(), bins)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{lhs_sample, SampleKind};
    use core::cell::Cell;

    /// Advances by one tick per aerodynamic node of the structure being timed; stands in
    /// for a wall clock without making the test machine-dependent.
    struct Ticks(Cell<f64>);

    impl Clock for Ticks {
        fn now(&self) -> f64 {
            let t = self.0.get();
            self.0.set(t + 1.0);
            t
        }
    }

    #[test]
    fn constant_rows_have_zero_spread() {
        let space = study_space();
        let row = space.nominal();
        let m = SampleMatrix::from_rows(&alloc::vec![row; 6], 0, SampleKind::Derived).unwrap();
        let st = ld_variability_study(&default_structures(), &m, &AeroStructOptions::default(), &NoClock, 10).unwrap();
        assert_eq!(st.summary.len(), 5);
        for s in &st.summary {
            assert_eq!(s.std_l_over_d, 0.0, "{}", s.structure);
            assert_eq!(s.failures, 0);
            assert!(s.mean_l_over_d > 10.0);
        }
    }

    #[test]
    fn shared_rows_and_histograms() {
        let m = lhs_sample(&study_space(), 40, 3).unwrap();
        let st = ld_variability_study(
            &default_structures(),
            &m,
            &AeroStructOptions::default(),
            &Ticks(Cell::new(0.0)),
            12,
        )
        .unwrap();
        assert_eq!(st.rows.len(), 200);
        assert_eq!(st.histograms.len(), 5);
        let e0 = &st.histograms[0].edges;
        for h in &st.histograms {
            assert_eq!(&h.edges, e0);
            assert_eq!(h.counts.iter().sum::<usize>(), 40);
            let mass: f64 = h.density.iter().sum::<f64>() * (e0[1] - e0[0]);
            assert!((mass - 1.0).abs() < 1e-12);
        }
        assert!(st.summary.iter().all(|s| s.std_l_over_d > 0.0 && s.mean_runtime == 1.0));
        // Same row index means same inputs for every structure.
        for s in 1..5 {
            assert_eq!(st.rows[s * 40 + 7].row, 7);
        }
    }

    #[test]
    fn single_row() {
        let m = SampleMatrix::from_rows(&[study_space().nominal()], 0, SampleKind::Derived).unwrap();
        let st = ld_variability_study(
            &default_structures()[..1],
            &m,
            &AeroStructOptions::default(),
            &NoClock,
            5,
        )
        .unwrap();
        assert_eq!(st.summary[0].std_l_over_d, 0.0);
        assert_eq!(st.summary[0].evaluated, 1);
    }

    #[test]
    fn failures_are_counted() {
        let mut bad = study_space().nominal();
        bad[1] = 1.2;
        let m = SampleMatrix::from_rows(&[study_space().nominal(), bad], 0, SampleKind::Derived).unwrap();
        let st = ld_variability_study(&default_structures(), &m, &AeroStructOptions::default(), &NoClock, 5).unwrap();
        assert!(st.summary.iter().all(|s| s.failures == 1 && s.evaluated == 1));
        assert!(st.rows[1].failed && st.rows[1].l_over_d.is_nan());
    }

    #[test]
    fn rejects_bad_shapes() {
        let m = SampleMatrix::from_rows(&[alloc::vec![1.0, 2.0]], 0, SampleKind::Derived).unwrap();
        assert_eq!(
            ld_variability_study(&default_structures(), &m, &AeroStructOptions::default(), &NoClock, 5),
            Err(Error::DimensionMismatch { expected: 4, got: 2 })
        );
        let m = SampleMatrix::from_rows(&[study_space().nominal()], 0, SampleKind::Derived).unwrap();
        assert!(ld_variability_study(&[], &m, &AeroStructOptions::default(), &NoClock, 5).is_err());
        assert!(ld_variability_study(&default_structures(), &m, &AeroStructOptions::default(), &NoClock, 0).is_err());
    }
}
