//! Quadratic response-surface surrogates.

use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::sobol::{analyze, AnalysisOptions, EvaluatedDesign, FailurePolicy, Method, SensitivityResult};
use crate::space::{saltelli_design, ParameterSpace, SampleMatrix};
use crate::{Error, Result};

/// Below this training r² a surrogate ranking is marked low confidence.
pub const LOW_CONFIDENCE_R2: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Term {
    Constant,
    Linear(usize),
    Interaction(usize, usize),
    Square(usize),
}

impl Term {
    #[inline]
    fn eval(self, z: &[f64]) -> f64 {
        match self {
            Term::Constant => 1.0,
            Term::Linear(i) => z[i],
            Term::Interaction(i, j) => z[i] * z[j],
            Term::Square(i) => z[i] * z[i],
        }
    }
}

/// Terms in canonical order: constant, linear, pairwise interactions `(i<j)`, squares.
pub fn quadratic_terms(d: usize, include_interactions: bool) -> Vec<Term> {
    let mut t = Vec::with_capacity(term_count(d, include_interactions));
    t.push(Term::Constant);
    t.extend((0..d).map(Term::Linear));
    if include_interactions {
        for i in 0..d {
            for j in i + 1..d {
                t.push(Term::Interaction(i, j));
            }
        }
    }
    t.extend((0..d).map(Term::Square));
    t
}

pub fn term_count(d: usize, include_interactions: bool) -> usize {
    1 + 2 * d + if include_interactions { d * (d - 1) / 2 } else { 0 }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitStats {
    pub r_squared: f64,
    pub rmse: f64,
    pub n_train: usize,
}

/// Affine map `z = (x - center) / half_width` onto `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub center: f64,
    pub half_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialRse {
    pub degree: u32,
    pub include_interactions: bool,
    pub terms: Vec<Term>,
    pub coefficients: Vec<f64>,
    pub normalization: Vec<Normalization>,
    pub fit_stats: FitStats,
    /// Numerical rank of the design matrix; below `terms.len()` means the minimum-norm
    /// solution was returned.
    pub rank: usize,
    pub warnings: Vec<String>,
}

impl PolynomialRse {
    pub fn dimension(&self) -> usize {
        self.normalization.len()
    }

    pub fn rank_deficient(&self) -> bool {
        self.rank < self.terms.len()
    }

    fn normalize(&self, x: &[f64], z: &mut [f64]) -> bool {
        let mut outside = false;
        for ((zi, &xi), nm) in z.iter_mut().zip(x).zip(&self.normalization) {
            *zi = (xi - nm.center) / nm.half_width;
            outside |= zi.abs() > 1.0 + 1e-12;
        }
        outside
    }

    /// Prediction plus a flag that is set when `x` lies outside the training box.
    pub fn predict_flagged(&self, x: &[f64]) -> (f64, bool) {
        assert_eq!(
            x.len(),
            self.dimension(),
            "row length must match the surrogate dimension"
        );
        let mut z = alloc::vec![0.0; x.len()];
        let outside = self.normalize(x, &mut z);
        let y = self
            .terms
            .iter()
            .zip(&self.coefficients)
            .map(|(t, c)| c * t.eval(&z))
            .sum();
        (y, outside)
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        self.predict_flagged(x).0
    }
}

fn design_matrix(x: &SampleMatrix, terms: &[Term], norm: &[Normalization]) -> DMatrix<f64> {
    let d = x.cols();
    let mut z = alloc::vec![0.0; d];
    DMatrix::from_fn(x.rows(), terms.len(), |r, c| {
        for k in 0..d {
            z[k] = (x.get(r, k) - norm[k].center) / norm[k].half_width;
        }
        terms[c].eval(&z)
    })
}

fn fit_stats(y: &[f64], pred: impl Iterator<Item = f64>) -> FitStats {
    let n = y.len();
    let mean = y.iter().sum::<f64>() / n as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
    let ss_res: f64 = y.iter().zip(pred).map(|(v, p)| (v - p) * (v - p)).sum();
    let r_squared = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else if ss_res == 0.0 {
        1.0
    } else {
        0.0
    };
    FitStats {
        r_squared: r_squared.min(1.0),
        rmse: libm::sqrt(ss_res / n as f64),
        n_train: n,
    }
}

/// Least-squares fit of a full quadratic on inputs normalized to the data's bounding
/// box. Rank-deficient systems get the minimum-norm solution and a warning.
pub fn fit_rse(x: &SampleMatrix, y: &[f64], include_interactions: bool) -> Result<PolynomialRse> {
    if x.rows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.rows(),
            got: y.len(),
        });
    }
    let d = x.cols();
    if d == 0 {
        return Err(Error::EmptySpace);
    }
    let terms = quadratic_terms(d, include_interactions);
    if x.rows() < terms.len() {
        return Err(Error::InsufficientSamples {
            rows: x.rows(),
            terms: terms.len(),
        });
    }
    if let Some(bad) = x.as_slice().iter().chain(y).find(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(alloc::format!("non-finite training value {bad}")));
    }
    let normalization: Vec<Normalization> = (0..d)
        .map(|c| {
            let (lo, hi) = x
                .column(c)
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
            let half = 0.5 * (hi - lo);
            Normalization {
                center: 0.5 * (lo + hi),
                half_width: if half > 0.0 { half } else { 1.0 },
            }
        })
        .collect();
    let a = design_matrix(x, &terms, &normalization);
    let b = DVector::from_column_slice(y);
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let tol = smax * x.rows().max(terms.len()) as f64 * f64::EPSILON;
    let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
    let coef = svd
        .solve(&b, tol)
        .map_err(|e| Error::InvalidInput(alloc::format!("least-squares solve failed: {e}")))?;
    let mut warnings = Vec::new();
    if rank < terms.len() {
        warnings.push(alloc::format!(
            "design matrix rank {rank} below term count {}; minimum-norm solution used",
            terms.len()
        ));
    }
    let pred = &a * &coef;
    let fit_stats = fit_stats(y, pred.iter().copied());
    Ok(PolynomialRse {
        degree: 2,
        include_interactions,
        terms,
        coefficients: coef.iter().copied().collect(),
        normalization,
        fit_stats,
        rank,
        warnings,
    })
}

/// Error measures on rows held out of the fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoldoutStats {
    pub r_squared: f64,
    pub rmse: f64,
    pub n_test: usize,
}

/// Fits on a random `1 - test_fraction` share of the rows and scores the rest.
pub fn fit_rse_holdout(
    x: &SampleMatrix,
    y: &[f64],
    include_interactions: bool,
    test_fraction: f64,
    seed: u64,
) -> Result<(PolynomialRse, HoldoutStats)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidFraction(test_fraction));
    }
    let n = x.rows();
    let n_test = ((n as f64) * test_fraction) as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut test = rand::seq::index::sample(&mut rng, n, n_test).into_vec();
    test.sort_unstable();
    let mut is_test = alloc::vec![false; n];
    for &i in &test {
        is_test[i] = true;
    }
    let train: Vec<usize> = (0..n).filter(|&i| !is_test[i]).collect();
    let pick = |idx: &[usize]| idx.iter().map(|&i| y[i]).collect::<Vec<_>>();
    let rse = fit_rse(&x.select_rows(&train), &pick(&train), include_interactions)?;
    let y_test = pick(&test);
    if y_test.is_empty() {
        return Err(Error::TooFewSamples { min: 1, got: 0 });
    }
    let s = fit_stats(&y_test, test.iter().map(|&i| rse.predict(x.row(i))));
    Ok((
        rse,
        HoldoutStats {
            r_squared: s.r_squared,
            rmse: s.rmse,
            n_test: s.n_train,
        },
    ))
}

/// Uniform row subsample without replacement of `floor(fraction * rows)` rows, kept in
/// original row order. Fails when fewer than `min_rows` rows would remain.
pub fn subsample(
    x: &SampleMatrix,
    y: &[f64],
    fraction: f64,
    seed: u64,
    min_rows: usize,
) -> Result<(SampleMatrix, Vec<f64>)> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidFraction(fraction));
    }
    if x.rows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.rows(),
            got: y.len(),
        });
    }
    let n = x.rows();
    let k = ((n as f64) * fraction) as usize;
    if k < min_rows.max(1) {
        return Err(Error::InsufficientSamples {
            rows: k,
            terms: min_rows,
        });
    }
    let idx = if k == n {
        (0..n).collect::<Vec<_>>()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v = rand::seq::index::sample(&mut rng, n, k).into_vec();
        v.sort_unstable();
        v
    };
    let ys = idx.iter().map(|&i| y[i]).collect();
    Ok((x.select_rows(&idx), ys))
}

/// Sobol indices of the surrogate itself, from a fresh Saltelli design.
pub fn sobol_via_surrogate(
    rse: &PolynomialRse,
    space: &ParameterSpace,
    base_n: usize,
    seed: u64,
    second_order: bool,
    method: Method,
) -> Result<SensitivityResult> {
    if space.dimension() != rse.dimension() {
        return Err(Error::DimensionMismatch {
            expected: rse.dimension(),
            got: space.dimension(),
        });
    }
    let design = saltelli_design(space, base_n, seed, second_order)?;
    let ev = EvaluatedDesign::evaluate(&design, |x| rse.predict(x), FailurePolicy::Error)?;
    let mut res = analyze(&ev, &space.names(), method, &AnalysisOptions::default())?;
    res.low_confidence = rse.fit_stats.r_squared < LOW_CONFIDENCE_R2;
    if res.low_confidence {
        res.diagnostics.notes.push(alloc::format!(
            "surrogate r^2 {:.4} below {LOW_CONFIDENCE_R2}; ranking is low confidence",
            rse.fit_stats.r_squared
        ));
    }
    res.diagnostics.notes.extend(rse.warnings.iter().cloned());
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sobol::rank_parameters;
    use crate::space::{lhs_sample, ParameterDef, SampleKind};
    use alloc::format;
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

    fn quad(x: &[f64]) -> f64 {
        3.0 + 2.0 * x[0] - x[1] + 0.5 * x[2] + 1.5 * x[0] * x[1] - 0.7 * x[1] * x[2]
            + 2.0 * x[0] * x[0]
            + 0.3 * x[2] * x[2]
    }

    fn ishigami(x: &[f64]) -> f64 {
        libm::sin(x[0]) + 7.0 * libm::sin(x[1]).powi(2) + 0.1 * x[2].powi(4) * libm::sin(x[0])
    }

    fn data(space: &ParameterSpace, n: usize, f: impl Fn(&[f64]) -> f64) -> (SampleMatrix, Vec<f64>) {
        let x = lhs_sample(space, n, 17).unwrap();
        let y = x.row_iter().map(f).collect();
        (x, y)
    }

    #[test]
    fn term_layout() {
        let t = quadratic_terms(3, true);
        assert_eq!(t.len(), 10);
        assert_eq!(t[0], Term::Constant);
        assert_eq!(t[4], Term::Interaction(0, 1));
        assert_eq!(t[7], Term::Square(0));
        assert_eq!(term_count(9, true), 55);
        assert_eq!(term_count(9, false), 19);
    }

    #[test]
    fn exact_quadratic_is_recovered() {
        let space = cube(3, -2.0, 3.0);
        let (x, y) = data(&space, 60, quad);
        let rse = fit_rse(&x, &y, true).unwrap();
        assert!(rse.fit_stats.r_squared >= 1.0 - 1e-9);
        assert!(!rse.rank_deficient());
        for r in 0..x.rows() {
            assert!((rse.predict(x.row(r)) - y[r]).abs() <= 1e-8 * y[r].abs().max(1.0));
        }
        let probe = [0.3, -1.1, 2.2];
        assert!((rse.predict(&probe) - quad(&probe)).abs() < 1e-8 * quad(&probe).abs());
    }

    #[test]
    fn misspecified_fit_reports_r2_below_one() {
        let (x, y) = data(&cube(3, -PI, PI), 400, ishigami);
        let rse = fit_rse(&x, &y, true).unwrap();
        assert!(rse.fit_stats.r_squared < 0.99 && rse.fit_stats.r_squared > 0.0);
    }

    #[test]
    fn too_few_rows() {
        let (x, y) = data(&cube(3, 0.0, 1.0), 9, quad);
        assert_eq!(
            fit_rse(&x, &y, true),
            Err(Error::InsufficientSamples { rows: 9, terms: 10 })
        );
    }

    #[test]
    fn rank_deficient_uses_minimum_norm() {
        // Column 2 is a copy of column 1: the x1/x2 terms are not identifiable.
        let rows: Vec<Vec<f64>> = (0..30)
            .map(|i| {
                let a = (i as f64 * 0.37) % 1.0;
                vec![a, a, ((i * 7) % 11) as f64 / 10.0]
            })
            .collect();
        let x = SampleMatrix::from_rows(&rows, 0, SampleKind::Derived).unwrap();
        let y: Vec<f64> = x.row_iter().map(|r| r[0] + r[2]).collect();
        let rse = fit_rse(&x, &y, true).unwrap();
        assert!(rse.rank_deficient());
        assert!(!rse.warnings.is_empty());
        assert!(rse.coefficients.iter().all(|c| c.is_finite()));
        assert!(rse.fit_stats.r_squared > 1.0 - 1e-9);
        // Minimum norm splits the shared linear term evenly.
        assert!((rse.coefficients[1] - rse.coefficients[2]).abs() < 1e-8);
    }

    #[test]
    fn duplicated_rows_match_weighted_normal_equations() {
        let space = cube(2, 0.0, 1.0);
        let (x, y) = data(&space, 20, |r| libm::exp(r[0]) * libm::cos(3.0 * r[1]));
        let base = fit_rse(&x, &y, true).unwrap();
        // Every row twice: identical fit.
        let all: Vec<usize> = (0..20).flat_map(|i| [i, i]).collect();
        let twice = fit_rse(
            &x.select_rows(&all),
            &all.iter().map(|&i| y[i]).collect::<Vec<_>>(),
            true,
        )
        .unwrap();
        for (a, b) in base.coefficients.iter().zip(&twice.coefficients) {
            assert!((a - b).abs() < 1e-9);
        }
        // Rows 0..5 three times: weighted least squares with weight 3 on those rows.
        let idx: Vec<usize> = (0..20).chain(0..5).chain(0..5).collect();
        let dup = fit_rse(
            &x.select_rows(&idx),
            &idx.iter().map(|&i| y[i]).collect::<Vec<_>>(),
            true,
        )
        .unwrap();
        let a = design_matrix(&x, &dup.terms, &dup.normalization);
        let w = DMatrix::from_diagonal(&DVector::from_fn(20, |i, _| if i < 5 { 3.0 } else { 1.0 }));
        let lhs = a.transpose() * &w * &a;
        let rhs = a.transpose() * &w * DVector::from_column_slice(&y);
        let oracle = lhs.lu().solve(&rhs).unwrap();
        for (c, o) in dup.coefficients.iter().zip(oracle.iter()) {
            assert!((c - o).abs() < 1e-8 * o.abs().max(1.0), "{c} vs {o}");
        }
    }

    #[test]
    fn predict_edge_cases() {
        let space = cube(2, -1.0, 1.0);
        let (x, _) = data(&space, 20, quad2);
        let y = vec![4.5; 20];
        let rse = fit_rse(&x, &y, true).unwrap();
        assert!((rse.predict(&[0.1, 0.9]) - 4.5).abs() < 1e-12);
        assert!((rse.predict(&[-7.0, 3.0]) - 4.5).abs() < 1e-10);
        assert!(rse.predict_flagged(&[5.0, 0.0]).1);
        assert!(!rse.predict_flagged(&[0.0, 0.0]).1);

        let mut lin = fit_rse(&x, &x.row_iter().map(quad2).collect::<Vec<_>>(), true).unwrap();
        for (t, c) in lin.terms.iter().zip(lin.coefficients.iter_mut()) {
            if matches!(t, Term::Interaction(..) | Term::Square(_)) {
                *c = 0.0;
            }
        }
        let p = |a: f64| lin.predict(&[a, 0.3]);
        assert!(((p(0.5) - p(0.0)) - (p(1.0) - p(0.5))).abs() < 1e-12);
    }

    fn quad2(x: &[f64]) -> f64 {
        1.0 + x[0] - 2.0 * x[1] + x[0] * x[1] + 0.5 * x[1] * x[1]
    }

    #[test]
    fn subsample_rules() {
        let space = cube(2, 0.0, 1.0);
        let (x, y) = data(&space, 4096, quad2);
        let (xs, ys) = subsample(&x, &y, 1.0, 3, 6).unwrap();
        assert_eq!(xs.as_slice(), x.as_slice());
        assert_eq!(ys, y);
        let (xs, ys) = subsample(&x, &y, 0.1, 3, 6).unwrap();
        assert_eq!(xs.rows(), 409);
        assert_eq!(ys.len(), 409);
        assert_eq!(subsample(&x, &y, 0.1, 3, 6).unwrap().1, ys);
        assert_ne!(subsample(&x, &y, 0.1, 4, 6).unwrap().1, ys);
        assert!(matches!(
            subsample(&x, &y, 0.001, 3, 6),
            Err(Error::InsufficientSamples { rows: 4, terms: 6 })
        ));
        assert!(matches!(subsample(&x, &y, 0.0, 3, 6), Err(Error::InvalidFraction(_))));
        assert!(matches!(subsample(&x, &y, 1.5, 3, 6), Err(Error::InvalidFraction(_))));
    }

    #[test]
    fn surrogate_sobol_matches_direct_on_quadratic() {
        let space = cube(3, -1.0, 1.0);
        let (x, y) = data(&space, 200, quad);
        let rse = fit_rse(&x, &y, true).unwrap();
        let s = sobol_via_surrogate(&rse, &space, 1 << 12, 8, false, Method::SurrogateFull).unwrap();
        let des = saltelli_design(&space, 1 << 12, 8, false).unwrap();
        let ev = EvaluatedDesign::evaluate(&des, quad, FailurePolicy::Error).unwrap();
        let d = analyze(&ev, &space.names(), Method::Qmc, &AnalysisOptions::default()).unwrap();
        for i in 0..3 {
            assert!((s.st[i] - d.st[i]).abs() < 0.02);
        }
        assert!(!s.low_confidence);
        assert_eq!(s.method, Method::SurrogateFull);
        let again = sobol_via_surrogate(&rse, &space, 1 << 12, 8, false, Method::SurrogateFull).unwrap();
        assert_eq!(s, again);
    }

    #[test]
    fn additive_surrogate() {
        let space = cube(3, 0.0, 1.0);
        let (x, y) = data(&space, 100, |r| r[0] + 2.0 * r[1] * r[1] - r[2]);
        let rse = fit_rse(&x, &y, false).unwrap();
        let s = sobol_via_surrogate(&rse, &space, 1 << 12, 1, false, Method::SurrogateFull).unwrap();
        for i in 0..3 {
            assert!((s.st[i] - s.s1[i]).abs() < 0.02);
        }
    }

    #[test]
    fn ishigami_fraction_keeps_top_two() {
        let space = cube(3, -PI, PI);
        let (x, y) = data(&space, 4096, ishigami);
        let (xs, ys) = subsample(&x, &y, 0.1, 11, term_count(3, true)).unwrap();
        let rse = fit_rse(&xs, &ys, true).unwrap();
        let s = sobol_via_surrogate(&rse, &space, 1 << 12, 2, false, Method::SurrogateFraction).unwrap();
        let rank = rank_parameters(&s, 0.0);
        assert_eq!(&rank.order[..2], &[0, 1]);
        assert!(s.low_confidence);
    }

    #[test]
    fn holdout_on_exact_data() {
        let (x, y) = data(&cube(3, 0.0, 1.0), 100, quad);
        let (rse, h) = fit_rse_holdout(&x, &y, true, 0.2, 5).unwrap();
        assert_eq!(h.n_test, 20);
        assert_eq!(rse.fit_stats.n_train, 80);
        assert!(h.r_squared > 1.0 - 1e-9);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn least_squares_is_optimal(seed in any::<u64>(), k in 0usize..10, delta in prop_oneof![-1e-3f64..-1e-6, 1e-6f64..1e-3]) {
            let space = cube(3, -PI, PI);
            let x = lhs_sample(&space, 80, seed).unwrap();
            let y: Vec<f64> = x.row_iter().map(ishigami).collect();
            let rse = fit_rse(&x, &y, true).unwrap();
            let mut p = rse.clone();
            p.coefficients[k] += delta;
            let rmse = |m: &PolynomialRse| libm::sqrt(x.row_iter().zip(&y).map(|(r, v)| (m.predict(r) - v).powi(2)).sum::<f64>() / 80.0);
            prop_assert!(rmse(&rse) <= rmse(&p));
            prop_assert!((rmse(&rse) - rse.fit_stats.rmse).abs() < 1e-9);
        }
    }
}
