//! Variance-based (Sobol) sensitivity indices from evaluated Saltelli designs.
//!
//! Outputs are centred on the pooled mean of `y_A` and `y_B` before any product is
//! formed. That keeps the estimators affine invariant and avoids cancellation when the
//! output has a large offset.

use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::space::{flatten_for_evaluation, BaseSampler, MatrixId, SaltelliDesign};
use crate::{Error, Result};

/// Reported indices are clipped to this interval; raw values stay in the diagnostics.
pub const CLIP_RANGE: (f64, f64) = (-0.1, 1.1);

/// What to do with rows whose model output is not finite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailurePolicy {
    /// Refuse to estimate.
    Error,
    /// Remove row `j` from every matrix and carry on with fewer rows.
    #[default]
    DropPairs,
}

/// Model outputs on every block of a Saltelli design, row-aligned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluatedDesign {
    pub base_n: usize,
    pub y_a: Vec<f64>,
    pub y_b: Vec<f64>,
    pub y_ab: Vec<Vec<f64>>,
    pub y_ba: Option<Vec<Vec<f64>>>,
    /// Non-finite outputs found in the raw evaluation, as `(block, row)`.
    pub failures: Vec<(MatrixId, usize)>,
    /// Rows removed under [`FailurePolicy::DropPairs`], in increasing order.
    pub dropped_rows: Vec<usize>,
    pub sampler: BaseSampler,
}

impl EvaluatedDesign {
    /// Builds from outputs listed in the order of [`flatten_for_evaluation`].
    pub fn from_flat(design: &SaltelliDesign, y: &[f64], policy: FailurePolicy) -> Result<Self> {
        if y.len() != design.total_evaluations {
            return Err(Error::DimensionMismatch {
                expected: design.total_evaluations,
                got: y.len(),
            });
        }
        let n = design.base_n;
        let d = design.dimension();
        let mut failures = Vec::new();
        let mut bad_row = alloc::vec![false; n];
        for (k, v) in y.iter().enumerate() {
            if !v.is_finite() {
                let (id, r) = design.locate(k);
                failures.push((id, r));
                bad_row[r] = true;
            }
        }
        if !failures.is_empty() && policy == FailurePolicy::Error {
            return Err(Error::FailedEvaluations { count: failures.len() });
        }
        let dropped_rows: Vec<usize> = (0..n).filter(|&r| bad_row[r]).collect();
        let block = |b: usize| -> Vec<f64> {
            y[b * n..(b + 1) * n]
                .iter()
                .zip(&bad_row)
                .filter(|(_, &bad)| !bad)
                .map(|(&v, _)| v)
                .collect()
        };
        let ev = Self {
            base_n: n,
            y_a: block(0),
            y_b: block(1),
            y_ab: (0..d).map(|i| block(2 + i)).collect(),
            y_ba: design
                .second_order()
                .then(|| (0..d).map(|i| block(2 + d + i)).collect()),
            failures,
            dropped_rows,
            sampler: design.sampler,
        };
        if ev.retained() < 2 {
            return Err(Error::TooFewSamples {
                min: 2,
                got: ev.retained(),
            });
        }
        Ok(ev)
    }

    /// Evaluates `f` on every row, sequentially, then calls [`Self::from_flat`].
    pub fn evaluate<F: FnMut(&[f64]) -> f64>(design: &SaltelliDesign, mut f: F, policy: FailurePolicy) -> Result<Self> {
        let flat = flatten_for_evaluation(design);
        let y: Vec<f64> = flat.row_iter().map(&mut f).collect();
        Self::from_flat(design, &y, policy)
    }

    pub fn dimension(&self) -> usize {
        self.y_ab.len()
    }

    /// Rows left after failure handling.
    pub fn retained(&self) -> usize {
        self.y_a.len()
    }

    fn select(&self, rows: &[usize]) -> Self {
        let pick = |v: &[f64]| rows.iter().map(|&r| v[r]).collect::<Vec<_>>();
        Self {
            base_n: rows.len(),
            y_a: pick(&self.y_a),
            y_b: pick(&self.y_b),
            y_ab: self.y_ab.iter().map(|v| pick(v)).collect(),
            y_ba: self.y_ba.as_ref().map(|m| m.iter().map(|v| pick(v)).collect()),
            failures: Vec::new(),
            dropped_rows: Vec::new(),
            sampler: self.sampler,
        }
    }
}

/// Pooled mean and population variance of `y_A ∪ y_B`.
pub fn pooled_moments(ev: &EvaluatedDesign) -> (f64, f64) {
    let n = (ev.y_a.len() + ev.y_b.len()) as f64;
    let mean = ev.y_a.iter().chain(&ev.y_b).sum::<f64>() / n;
    let var = ev
        .y_a
        .iter()
        .chain(&ev.y_b)
        .map(|y| (y - mean) * (y - mean))
        .sum::<f64>()
        / n;
    (mean, var)
}

struct Centered {
    a: Vec<f64>,
    b: Vec<f64>,
    ab: Vec<Vec<f64>>,
    ba: Option<Vec<Vec<f64>>>,
    var: f64,
}

fn centered(ev: &EvaluatedDesign) -> Result<Centered> {
    if ev.retained() < 2 {
        return Err(Error::TooFewSamples {
            min: 2,
            got: ev.retained(),
        });
    }
    let (f0, var) = pooled_moments(ev);
    if !(var > f64::EPSILON * f64::EPSILON * f0 * f0) || var == 0.0 {
        return Err(Error::ConstantOutput);
    }
    let c = |v: &[f64]| v.iter().map(|y| y - f0).collect::<Vec<_>>();
    Ok(Centered {
        a: c(&ev.y_a),
        b: c(&ev.y_b),
        ab: ev.y_ab.iter().map(|v| c(v)).collect(),
        ba: ev.y_ba.as_ref().map(|m| m.iter().map(|v| c(v)).collect()),
        var,
    })
}

fn mean_of(n: usize, f: impl Fn(usize) -> f64) -> f64 {
    (0..n).map(f).sum::<f64>() / n as f64
}

impl Centered {
    fn n(&self) -> usize {
        self.a.len()
    }

    fn first_order(&self) -> Vec<f64> {
        let n = self.n();
        self.ab
            .iter()
            .map(|ab| mean_of(n, |j| self.b[j] * (ab[j] - self.a[j])) / self.var)
            .collect()
    }

    fn total(&self) -> Vec<f64> {
        let n = self.n();
        self.ab
            .iter()
            .map(|ab| {
                let d = |j: usize| self.a[j] - ab[j];
                mean_of(n, |j| d(j) * d(j)) / (2.0 * self.var)
            })
            .collect()
    }

    fn second_order(&self, s1: &[f64]) -> Result<Vec<Vec<f64>>> {
        let ba = self.ba.as_ref().ok_or(Error::SecondOrderRequired)?;
        let n = self.n();
        let d = self.ab.len();
        let mut s2 = alloc::vec![alloc::vec![0.0; d]; d];
        for i in 0..d {
            for j in i + 1..d {
                let vc = mean_of(n, |k| ba[i][k] * self.ab[j][k] - self.a[k] * self.b[k]) / self.var;
                let v = vc - s1[i] - s1[j];
                s2[i][j] = v;
                s2[j][i] = v;
            }
        }
        Ok(s2)
    }
}

/// Raw first-order indices.
pub fn estimate_first_order(ev: &EvaluatedDesign) -> Result<Vec<f64>> {
    Ok(centered(ev)?.first_order())
}

/// Raw total-effect indices.
pub fn estimate_total(ev: &EvaluatedDesign) -> Result<Vec<f64>> {
    Ok(centered(ev)?.total())
}

/// Raw closed second-order indices as a symmetric matrix with a zero diagonal.
pub fn estimate_second_order(ev: &EvaluatedDesign) -> Result<Vec<Vec<f64>>> {
    let c = centered(ev)?;
    let s1 = c.first_order();
    c.second_order(&s1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Direct model evaluation on the (quasi) Monte Carlo design.
    Qmc,
    SurrogateFull,
    SurrogateFraction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bootstrap {
    pub replicates: usize,
    pub seed: u64,
}

impl Default for Bootstrap {
    fn default() -> Self {
        Self {
            replicates: 100,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AnalysisOptions {
    /// Percentile intervals from row resampling. Off when `None`.
    pub bootstrap: Option<Bootstrap>,
}

/// 95% percentile interval per parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceIntervals {
    pub replicates: usize,
    pub seed: u64,
    pub s1: Vec<(f64, f64)>,
    pub st: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub s1_raw: Vec<f64>,
    pub st_raw: Vec<f64>,
    pub s2_raw: Option<Vec<Vec<f64>>>,
    /// Rows used by the estimators.
    pub retained_n: usize,
    pub dropped_rows: Vec<usize>,
    pub failed_evaluations: usize,
    pub sampler: BaseSampler,
    pub confidence: Option<ConfidenceIntervals>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityResult {
    pub names: Vec<String>,
    pub s1: Vec<f64>,
    pub st: Vec<f64>,
    pub s2: Option<Vec<Vec<f64>>>,
    pub output_mean: f64,
    pub output_variance: f64,
    pub base_n: usize,
    pub method: Method,
    /// Set when the indices come from a surrogate whose fit is too poor to trust
    /// the ranking.
    pub low_confidence: bool,
    pub diagnostics: Diagnostics,
}

impl SensitivityResult {
    pub fn dimension(&self) -> usize {
        self.names.len()
    }
}

fn clip(v: f64) -> f64 {
    v.clamp(CLIP_RANGE.0, CLIP_RANGE.1)
}

/// Runs all estimators on `ev`. Second-order indices are included when the design
/// carries `BA` blocks.
pub fn analyze(
    ev: &EvaluatedDesign,
    names: &[String],
    method: Method,
    opts: &AnalysisOptions,
) -> Result<SensitivityResult> {
    let d = ev.dimension();
    if names.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: names.len(),
        });
    }
    let c = centered(ev)?;
    let s1_raw = c.first_order();
    let st_raw = c.total();
    let s2_raw = match c.ba {
        Some(_) => Some(c.second_order(&s1_raw)?),
        None => None,
    };
    let (mean, var) = pooled_moments(ev);
    let confidence = match opts.bootstrap {
        Some(b) if b.replicates > 0 => Some(bootstrap(ev, b)),
        _ => None,
    };
    let mut notes = Vec::new();
    if !ev.dropped_rows.is_empty() {
        notes.push(alloc::format!(
            "{} of {} rows dropped after non-finite outputs",
            ev.dropped_rows.len(),
            ev.base_n
        ));
    }
    Ok(SensitivityResult {
        names: names.to_vec(),
        s1: s1_raw.iter().copied().map(clip).collect(),
        st: st_raw.iter().copied().map(clip).collect(),
        s2: s2_raw
            .as_ref()
            .map(|m| m.iter().map(|r| r.iter().copied().map(clip).collect()).collect()),
        output_mean: mean,
        output_variance: var,
        base_n: ev.base_n,
        method,
        low_confidence: false,
        diagnostics: Diagnostics {
            s1_raw,
            st_raw,
            s2_raw,
            retained_n: ev.retained(),
            dropped_rows: ev.dropped_rows.clone(),
            failed_evaluations: ev.failures.len(),
            sampler: ev.sampler,
            confidence,
            notes,
        },
    })
}

fn percentile_interval(values: &mut [f64]) -> (f64, f64) {
    values.sort_by(f64::total_cmp);
    let at = |q: f64| {
        let pos = q * (values.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        values[lo] + (values[hi] - values[lo]) * (pos - lo as f64)
    };
    (at(0.025), at(0.975))
}

fn bootstrap(ev: &EvaluatedDesign, b: Bootstrap) -> ConfidenceIntervals {
    let n = ev.retained();
    let d = ev.dimension();
    let mut rng = ChaCha8Rng::seed_from_u64(b.seed);
    let mut s1 = alloc::vec![Vec::with_capacity(b.replicates); d];
    let mut st = alloc::vec![Vec::with_capacity(b.replicates); d];
    let mut rows = alloc::vec![0usize; n];
    for _ in 0..b.replicates {
        for r in rows.iter_mut() {
            *r = rng.random_range(0..n);
        }
        // A resample can be degenerate (all rows equal); such replicates are skipped.
        if let Ok(c) = centered(&ev.select(&rows)) {
            for (i, v) in c.first_order().into_iter().enumerate() {
                s1[i].push(v);
            }
            for (i, v) in c.total().into_iter().enumerate() {
                st[i].push(v);
            }
        }
    }
    let ci = |mut v: Vec<f64>| {
        if v.is_empty() {
            (f64::NAN, f64::NAN)
        } else {
            percentile_interval(&mut v)
        }
    };
    ConfidenceIntervals {
        replicates: b.replicates,
        seed: b.seed,
        s1: s1.into_iter().map(ci).collect(),
        st: st.into_iter().map(ci).collect(),
    }
}

/// Parameters ordered by total index, largest first, and the subset at or above the
/// threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ranking {
    /// Parameter indices, `st` descending. Equal values keep parameter order.
    pub order: Vec<usize>,
    pub critical: Vec<usize>,
    pub threshold: f64,
    pub warning: Option<String>,
}

impl Ranking {
    pub fn critical_names<'a>(&self, res: &'a SensitivityResult) -> Vec<&'a str> {
        self.critical.iter().map(|&i| res.names[i].as_str()).collect()
    }

    pub fn ordered_names<'a>(&self, res: &'a SensitivityResult) -> Vec<&'a str> {
        self.order.iter().map(|&i| res.names[i].as_str()).collect()
    }
}

pub fn rank_parameters(res: &SensitivityResult, threshold: f64) -> Ranking {
    let mut order: Vec<usize> = (0..res.st.len()).collect();
    // Stable sort keeps parameter order among ties.
    order.sort_by(|&i, &j| res.st[j].total_cmp(&res.st[i]));
    let critical: Vec<usize> = order.iter().copied().filter(|&i| res.st[i] >= threshold).collect();
    let warning = critical
        .is_empty()
        .then(|| alloc::format!("no parameter reaches total index {threshold}"));
    Ranking {
        order,
        critical,
        threshold,
        warning,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{saltelli_design, saltelli_design_with, ParameterDef, ParameterSpace};
    use alloc::format;
    use alloc::string::ToString;
    use alloc::vec;
    use core::f64::consts::PI;
    use proptest::prelude::*;

    fn cube(d: usize, lo: f64, hi: f64) -> ParameterSpace {
        ParameterSpace::new(
            (0..d)
                .map(|i| ParameterDef::uniform(&format!("x{}", i + 1), lo, hi, 0.5 * (lo + hi)).unwrap())
                .collect(),
        )
        .unwrap()
    }

    fn names(d: usize) -> Vec<String> {
        (0..d).map(|i| format!("x{}", i + 1)).collect()
    }

    fn run(space: &ParameterSpace, n: usize, second: bool, f: impl Fn(&[f64]) -> f64) -> SensitivityResult {
        let des = saltelli_design(space, n, 42, second).unwrap();
        let ev = EvaluatedDesign::evaluate(&des, |x| f(x), FailurePolicy::DropPairs).unwrap();
        analyze(&ev, &space.names(), Method::Qmc, &AnalysisOptions::default()).unwrap()
    }

    fn ishigami(x: &[f64]) -> f64 {
        libm::sin(x[0]) + 7.0 * libm::sin(x[1]).powi(2) + 0.1 * x[2].powi(4) * libm::sin(x[0])
    }

    #[test]
    fn constant_output_rejected() {
        let des = saltelli_design(&cube(2, 0.0, 1.0), 64, 1, false).unwrap();
        let ev = EvaluatedDesign::evaluate(&des, |_| 3.0, FailurePolicy::DropPairs).unwrap();
        assert_eq!(estimate_first_order(&ev), Err(Error::ConstantOutput));
        assert_eq!(estimate_total(&ev), Err(Error::ConstantOutput));
        assert_eq!(Error::ConstantOutput.to_string(), "constant output");
    }

    #[test]
    fn single_active_input() {
        let r = run(&cube(2, 0.0, 1.0), 1 << 12, false, |x| x[0]);
        assert!((r.s1[0] - 1.0).abs() < 0.02 && r.s1[1].abs() < 0.02, "{:?}", r.s1);
        assert!((r.st[0] - 1.0).abs() < 0.02 && r.st[1].abs() < 0.02);
    }

    #[test]
    fn ishigami_indices() {
        let r = run(&cube(3, -PI, PI), 1 << 13, true, ishigami);
        let s1 = [0.313_905_19, 0.442_411_14, 0.0];
        let st = [0.557_588_86, 0.442_411_14, 0.243_683_66];
        for i in 0..3 {
            assert!((r.s1[i] - s1[i]).abs() < 0.02, "s1 {:?}", r.s1);
            assert!((r.st[i] - st[i]).abs() < 0.02, "st {:?}", r.st);
        }
        let s2 = r.s2.unwrap();
        assert!((s2[0][2] - 0.243_683_66).abs() < 0.03, "{s2:?}");
        assert!(s2[0][1].abs() < 0.03 && s2[1][2].abs() < 0.03);
        let rank = rank_parameters(&run(&cube(3, -PI, PI), 1 << 10, false, ishigami), 0.1);
        assert_eq!(rank.order, vec![0, 1, 2]);
    }

    #[test]
    fn pure_interaction() {
        let r = run(&cube(2, -1.0, 1.0), 1 << 12, true, |x| x[0] * x[1]);
        assert!(r.s1[0].abs() < 0.03 && r.s1[1].abs() < 0.03, "{:?}", r.s1);
        assert!((r.s2.unwrap()[0][1] - 1.0).abs() < 0.03);
    }

    #[test]
    fn additive_has_no_interactions() {
        let r = run(&cube(3, 0.0, 1.0), 1 << 12, true, |x| x[0] + 2.0 * x[1] + 3.0 * x[2]);
        for i in 0..3 {
            assert!((r.st[i] - r.s1[i]).abs() < 0.02);
        }
        let s2 = r.s2.unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!(s2[i][j].abs() < 0.03);
            }
        }
    }

    #[test]
    fn second_order_needs_ba() {
        let des = saltelli_design(&cube(2, 0.0, 1.0), 16, 1, false).unwrap();
        let ev = EvaluatedDesign::evaluate(&des, |x| x[0] * x[1], FailurePolicy::DropPairs).unwrap();
        assert_eq!(estimate_second_order(&ev), Err(Error::SecondOrderRequired));
    }

    #[test]
    fn failures_drop_rows_or_error() {
        let des = saltelli_design(&cube(2, 0.0, 1.0), 64, 1, false).unwrap();
        let flat = flatten_for_evaluation(&des);
        let mut y: Vec<f64> = flat.row_iter().map(|x| x[0] + x[1]).collect();
        y[3] = f64::NAN; // A row 3
        y[64 * 2 + 10] = f64::INFINITY; // AB_1 row 10
        assert_eq!(
            EvaluatedDesign::from_flat(&des, &y, FailurePolicy::Error),
            Err(Error::FailedEvaluations { count: 2 })
        );
        let ev = EvaluatedDesign::from_flat(&des, &y, FailurePolicy::DropPairs).unwrap();
        assert_eq!(ev.retained(), 62);
        assert_eq!(ev.dropped_rows, vec![3, 10]);
        assert_eq!(ev.failures, vec![(MatrixId::A, 3), (MatrixId::AB(0), 10)]);
        let r = analyze(&ev, &names(2), Method::Qmc, &AnalysisOptions::default()).unwrap();
        assert_eq!(r.diagnostics.retained_n, 62);
        assert!(r.s1.iter().chain(&r.st).all(|v| v.is_finite()));
    }

    #[test]
    fn ranking_rules() {
        let mut r = run(&cube(3, 0.0, 1.0), 64, false, |x| x[0] + x[1]);
        r.st = vec![0.5, 0.3, 0.01];
        let rank = rank_parameters(&r, 0.05);
        assert_eq!(rank.critical_names(&r), vec!["x1", "x2"]);
        assert!(rank.warning.is_none());
        let rank = rank_parameters(&r, 0.9);
        assert!(rank.critical.is_empty() && rank.warning.is_some());
        r.st = vec![0.2, 0.4, 0.2];
        assert_eq!(rank_parameters(&r, 0.0).order, vec![1, 0, 2]);
    }

    #[test]
    fn bootstrap_brackets_estimate() {
        let space = cube(2, 0.0, 1.0);
        let des = saltelli_design(&space, 512, 3, false).unwrap();
        let ev = EvaluatedDesign::evaluate(&des, |x| x[0] + 0.5 * x[1] * x[1], FailurePolicy::DropPairs).unwrap();
        let opts = AnalysisOptions {
            bootstrap: Some(Bootstrap {
                replicates: 100,
                seed: 5,
            }),
        };
        let a = analyze(&ev, &space.names(), Method::Qmc, &opts).unwrap();
        let b = analyze(&ev, &space.names(), Method::Qmc, &opts).unwrap();
        assert_eq!(a, b);
        let ci = a.diagnostics.confidence.unwrap();
        for i in 0..2 {
            assert!(ci.st[i].0 <= a.st[i] && a.st[i] <= ci.st[i].1);
        }
    }

    #[test]
    fn raw_values_kept_when_clipped() {
        let des = saltelli_design_with(&cube(2, 0.0, 1.0), 4, 9, false, BaseSampler::Lhs).unwrap();
        let ev = EvaluatedDesign::evaluate(&des, |x| libm::sin(40.0 * x[0]) + x[1], FailurePolicy::DropPairs).unwrap();
        let r = analyze(&ev, &names(2), Method::Qmc, &AnalysisOptions::default()).unwrap();
        for i in 0..2 {
            assert_eq!(r.s1[i], clip(r.diagnostics.s1_raw[i]));
            assert!(r.s1[i] >= -0.1 && r.s1[i] <= 1.1);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn affine_invariance(a in prop_oneof![-50.0f64..-0.1, 0.1f64..50.0], b in -100.0f64..100.0, seed in any::<u64>()) {
            let space = cube(3, -PI, PI);
            let des = saltelli_design(&space, 128, seed, true).unwrap();
            let e1 = EvaluatedDesign::evaluate(&des, ishigami, FailurePolicy::DropPairs).unwrap();
            let e2 = EvaluatedDesign::evaluate(&des, |x| a * ishigami(x) + b, FailurePolicy::DropPairs).unwrap();
            let r1 = analyze(&e1, &space.names(), Method::Qmc, &AnalysisOptions::default()).unwrap();
            let r2 = analyze(&e2, &space.names(), Method::Qmc, &AnalysisOptions::default()).unwrap();
            for i in 0..3 {
                prop_assert!((r1.diagnostics.s1_raw[i] - r2.diagnostics.s1_raw[i]).abs() < 1e-12);
                prop_assert!((r1.diagnostics.st_raw[i] - r2.diagnostics.st_raw[i]).abs() < 1e-12);
                for j in 0..3 {
                    let (p, q) = (r1.diagnostics.s2_raw.as_ref().unwrap()[i][j], r2.diagnostics.s2_raw.as_ref().unwrap()[i][j]);
                    prop_assert!((p - q).abs() < 1e-12);
                }
            }
        }

        #[test]
        fn total_not_below_first_order(c in proptest::collection::vec(-2.0f64..2.0, 3), k in -2.0f64..2.0) {
            prop_assume!(c.iter().any(|v| v.abs() > 0.1));
            let r = run(&cube(3, 0.0, 1.0), 1 << 11, false, |x| c[0] * x[0] + c[1] * x[1] * x[1] + c[2] * x[2] + k * x[0] * x[2]);
            for i in 0..3 {
                prop_assert!(r.st[i] >= r.s1[i] - 0.02);
            }
            prop_assert!(r.s1.iter().sum::<f64>() <= 1.03);
        }
    }
}
