use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ParameterSpace, SampleKind, SampleMatrix, ScrambledSobol, SOBOL_MAX_DIMS};
use crate::{Error, Result};

/// Column RNG: one ChaCha stream per column so that adding parameters never perturbs
/// the columns that already exist.
fn column_rng(seed: u64, column: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(column as u64);
    rng
}

fn check(space: &ParameterSpace, n: usize) -> Result<()> {
    if space.dimension() == 0 {
        return Err(Error::EmptySpace);
    }
    if n == 0 {
        return Err(Error::TooFewSamples { min: 1, got: 0 });
    }
    Ok(())
}

/// Latin hypercube sample: in every column each of the `n` equal-probability strata
/// holds exactly one point, placed uniformly at random inside its stratum.
pub fn lhs_sample(space: &ParameterSpace, n: usize, seed: u64) -> Result<SampleMatrix> {
    check(space, n)?;
    let d = space.dimension();
    let mut values = alloc::vec![0.0; n * d];
    let mut strata: Vec<usize> = (0..n).collect();
    for (c, p) in space.params().iter().enumerate() {
        let mut rng = column_rng(seed, c);
        for (i, s) in strata.iter_mut().enumerate() {
            *s = i;
        }
        strata.shuffle(&mut rng);
        for (r, &s) in strata.iter().enumerate() {
            let jitter: f64 = rng.random();
            let u = (s as f64 + jitter) / n as f64;
            values[r * d + c] = p.from_unit(u);
        }
    }
    SampleMatrix::from_row_major(n, d, values, seed, SampleKind::Lhs)
}

/// Plain independent uniform draws.
pub fn monte_carlo_sample(space: &ParameterSpace, n: usize, seed: u64) -> Result<SampleMatrix> {
    check(space, n)?;
    let d = space.dimension();
    let mut values = alloc::vec![0.0; n * d];
    for (c, p) in space.params().iter().enumerate() {
        let mut rng = column_rng(seed, c);
        for r in 0..n {
            values[r * d + c] = p.from_unit(rng.random());
        }
    }
    SampleMatrix::from_row_major(n, d, values, seed, SampleKind::MonteCarlo)
}

/// First `n` points of an Owen-scrambled Sobol sequence.
pub fn sobol_sample(space: &ParameterSpace, n: usize, seed: u64) -> Result<SampleMatrix> {
    check(space, n)?;
    let d = space.dimension();
    let seq = ScrambledSobol::scrambled(d, seed).ok_or(Error::TooManyDimensions {
        max: SOBOL_MAX_DIMS,
        got: d,
    })?;
    let mut values = alloc::vec![0.0; n * d];
    for r in 0..n {
        for (c, p) in space.params().iter().enumerate() {
            values[r * d + c] = p.from_unit(seq.point(r as u32, c));
        }
    }
    SampleMatrix::from_row_major(n, d, values, seed, SampleKind::Sobol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::ParameterDef;
    use alloc::vec;
    use proptest::prelude::*;

    fn unit_space(d: usize) -> ParameterSpace {
        let names = ["a", "b", "c", "d", "e", "f", "g", "h"];
        ParameterSpace::new(
            names[..d]
                .iter()
                .map(|n| ParameterDef::uniform(n, 0.0, 1.0, 0.5).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn one_point_per_quarter() {
        let m = lhs_sample(&unit_space(1), 4, 11).unwrap();
        let mut cells: Vec<usize> = m.column(0).map(|x| ((x * 4.0) as usize).min(3)).collect();
        cells.sort();
        assert_eq!(cells, vec![0, 1, 2, 3]);
    }

    #[test]
    fn deterministic_per_seed() {
        let s = unit_space(2);
        assert_eq!(lhs_sample(&s, 100, 7).unwrap(), lhs_sample(&s, 100, 7).unwrap());
        assert_ne!(lhs_sample(&s, 100, 7).unwrap(), lhs_sample(&s, 100, 8).unwrap());
        assert_eq!(
            monte_carlo_sample(&s, 50, 3).unwrap(),
            monte_carlo_sample(&s, 50, 3).unwrap()
        );
        assert_eq!(sobol_sample(&s, 64, 3).unwrap(), sobol_sample(&s, 64, 3).unwrap());
    }

    #[test]
    fn scale_factor_mean() {
        // Mean of U[0.95, 1.05] is 1.0. A stratified sample of 1000 has a mean error far
        // below the brute-force Monte Carlo spread (sd = 0.1/sqrt(12)/sqrt(1000) ≈ 9e-4),
        // checked here against 0.005.
        let s = ParameterSpace::new(vec![ParameterDef::uniform("k", 0.95, 1.05, 1.0).unwrap()]).unwrap();
        for seed in 0..20 {
            let m = lhs_sample(&s, 1000, seed).unwrap();
            let mean = m.column(0).sum::<f64>() / 1000.0;
            assert!((mean - 1.0).abs() < 0.005, "seed {seed}: {mean}");
        }
    }

    #[test]
    fn zero_samples_rejected() {
        assert!(matches!(
            lhs_sample(&unit_space(1), 0, 0),
            Err(Error::TooFewSamples { .. })
        ));
    }

    proptest! {
        #[test]
        fn lhs_occupies_every_stratum(n in 1usize..200, d in 1usize..6, seed in any::<u64>()) {
            let m = lhs_sample(&unit_space(d), n, seed).unwrap();
            for c in 0..d {
                let mut seen = vec![false; n];
                for x in m.column(c) {
                    let cell = ((x * n as f64) as usize).min(n - 1);
                    prop_assert!(!seen[cell]);
                    seen[cell] = true;
                }
            }
        }

        #[test]
        fn samples_respect_bounds(lo in -1e3f64..1e3, w in 1e-3f64..1e3, seed in any::<u64>()) {
            let s = ParameterSpace::new(vec![ParameterDef::uniform("x", lo, lo + w, lo).unwrap()]).unwrap();
            for m in [lhs_sample(&s, 64, seed).unwrap(), monte_carlo_sample(&s, 64, seed).unwrap(), sobol_sample(&s, 64, seed).unwrap()] {
                prop_assert!(m.column(0).all(|x| x >= lo && x <= lo + w));
            }
        }
    }
}
