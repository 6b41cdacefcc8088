use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{
    lhs_sample, sobol_seq::splitmix64, ParameterSpace, SampleKind, SampleMatrix, ScrambledSobol, SOBOL_MAX_DIMS,
};
use crate::{Error, Result};

/// Seed offset between the `A` and `B` base matrices when they are drawn as two
/// independent Latin hypercubes.
const B_SEED_OFFSET: u64 = 0x9E37_79B9_7F4A_7C15;

/// Generator behind the `A` and `B` base matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseSampler {
    /// One `2D`-dimensional scrambled Sobol sequence; `A` takes the first `D`
    /// coordinates and `B` the last `D`.
    #[default]
    Sobol,
    /// Two independent Latin hypercubes seeded `seed` and `seed + offset`.
    Lhs,
}

/// Identifies one block of a Saltelli design.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MatrixId {
    A,
    B,
    /// `A` with column `i` taken from `B`.
    AB(usize),
    /// `B` with column `i` taken from `A`.
    BA(usize),
}

/// The `A`, `B`, `AB_i` (and optionally `BA_i`) matrix family used by the Sobol
/// estimators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaltelliDesign {
    pub a: SampleMatrix,
    pub b: SampleMatrix,
    pub ab: Vec<SampleMatrix>,
    pub ba: Option<Vec<SampleMatrix>>,
    pub base_n: usize,
    pub total_evaluations: usize,
    pub sampler: BaseSampler,
}

impl SaltelliDesign {
    pub fn dimension(&self) -> usize {
        self.a.cols()
    }

    pub fn second_order(&self) -> bool {
        self.ba.is_some()
    }

    /// Number of `N`-row blocks: `D + 2`, or `2D + 2` with second order.
    pub fn blocks(&self) -> usize {
        let d = self.dimension();
        if self.second_order() {
            2 * d + 2
        } else {
            d + 2
        }
    }

    /// Block order used everywhere: `A`, `B`, `AB_1..AB_D`, then `BA_1..BA_D`.
    pub fn block_id(&self, block: usize) -> MatrixId {
        let d = self.dimension();
        match block {
            0 => MatrixId::A,
            1 => MatrixId::B,
            k if k < d + 2 => MatrixId::AB(k - 2),
            k => MatrixId::BA(k - 2 - d),
        }
    }

    pub fn block_index(&self, id: MatrixId) -> usize {
        let d = self.dimension();
        match id {
            MatrixId::A => 0,
            MatrixId::B => 1,
            MatrixId::AB(i) => 2 + i,
            MatrixId::BA(i) => 2 + d + i,
        }
    }

    pub fn matrix(&self, id: MatrixId) -> &SampleMatrix {
        match id {
            MatrixId::A => &self.a,
            MatrixId::B => &self.b,
            MatrixId::AB(i) => &self.ab[i],
            MatrixId::BA(i) => &self.ba.as_ref().expect("design has no BA matrices")[i],
        }
    }

    /// Maps a row of the flattened design back to `(matrix, row)`.
    pub fn locate(&self, flat_row: usize) -> (MatrixId, usize) {
        (self.block_id(flat_row / self.base_n), flat_row % self.base_n)
    }

    /// `base_n` is a power of two, which keeps the Sobol base sample balanced.
    pub fn balanced(&self) -> bool {
        self.base_n.is_power_of_two()
    }
}

/// Saltelli design from the default base sampler (scrambled Sobol).
pub fn saltelli_design(space: &ParameterSpace, base_n: usize, seed: u64, second_order: bool) -> Result<SaltelliDesign> {
    saltelli_design_with(space, base_n, seed, second_order, BaseSampler::default())
}

pub fn saltelli_design_with(
    space: &ParameterSpace,
    base_n: usize,
    seed: u64,
    second_order: bool,
    sampler: BaseSampler,
) -> Result<SaltelliDesign> {
    if space.dimension() == 0 {
        return Err(Error::EmptySpace);
    }
    if base_n < 2 {
        return Err(Error::TooFewSamples { min: 2, got: base_n });
    }
    let d = space.dimension();
    let (a, b) = match sampler {
        BaseSampler::Lhs => (
            lhs_sample(space, base_n, seed)?,
            lhs_sample(space, base_n, seed.wrapping_add(B_SEED_OFFSET))?,
        ),
        BaseSampler::Sobol => sobol_pair(space, base_n, seed)?,
    };
    let cross = |base: &SampleMatrix, donor: &SampleMatrix, i: usize| {
        let mut m = base.clone();
        m.kind = SampleKind::Derived;
        for r in 0..base_n {
            m.set(r, i, donor.get(r, i));
        }
        m
    };
    let ab: Vec<_> = (0..d).map(|i| cross(&a, &b, i)).collect();
    let ba = second_order.then(|| (0..d).map(|i| cross(&b, &a, i)).collect::<Vec<_>>());
    let blocks = if second_order { 2 * d + 2 } else { d + 2 };
    Ok(SaltelliDesign {
        a,
        b,
        ab,
        ba,
        base_n,
        total_evaluations: base_n * blocks,
        sampler,
    })
}

fn sobol_pair(space: &ParameterSpace, n: usize, seed: u64) -> Result<(SampleMatrix, SampleMatrix)> {
    let d = space.dimension();
    let mut state = seed;
    let seq = ScrambledSobol::scrambled(2 * d, splitmix64(&mut state)).ok_or(Error::TooManyDimensions {
        max: SOBOL_MAX_DIMS / 2,
        got: d,
    })?;
    let mut a = alloc::vec![0.0; n * d];
    let mut b = alloc::vec![0.0; n * d];
    for r in 0..n {
        for (c, p) in space.params().iter().enumerate() {
            a[r * d + c] = p.from_unit(seq.point(r as u32, c));
            b[r * d + c] = p.from_unit(seq.point(r as u32, d + c));
        }
    }
    Ok((
        SampleMatrix::from_row_major(n, d, a, seed, SampleKind::Sobol)?,
        SampleMatrix::from_row_major(n, d, b, seed, SampleKind::Sobol)?,
    ))
}

/// Stacks all blocks into one matrix in canonical order so rows can be evaluated
/// independently.
pub fn flatten_for_evaluation(design: &SaltelliDesign) -> SampleMatrix {
    let d = design.dimension();
    let mut values = Vec::with_capacity(design.total_evaluations * d);
    for block in 0..design.blocks() {
        values.extend_from_slice(design.matrix(design.block_id(block)).as_slice());
    }
    SampleMatrix::from_row_major(design.total_evaluations, d, values, design.a.seed, SampleKind::Derived)
        .expect("block sizes are consistent")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::ParameterDef;
    use alloc::format;
    use proptest::prelude::*;

    fn space(d: usize) -> ParameterSpace {
        ParameterSpace::new(
            (0..d)
                .map(|i| ParameterDef::uniform(&format!("x{i}"), -1.0 - i as f64, 2.0 + i as f64, 0.0).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn evaluation_counts() {
        assert_eq!(
            saltelli_design(&space(3), 256, 1, false).unwrap().total_evaluations,
            1280
        );
        assert_eq!(
            saltelli_design(&space(9), 256, 1, true).unwrap().total_evaluations,
            5120
        );
    }

    #[test]
    fn base_n_below_two_rejected() {
        assert!(matches!(
            saltelli_design(&space(2), 1, 0, false),
            Err(Error::TooFewSamples { min: 2, got: 1 })
        ));
    }

    #[test]
    fn ab2_swaps_only_column_two() {
        for sampler in [BaseSampler::Sobol, BaseSampler::Lhs] {
            let des = saltelli_design_with(&space(4), 32, 5, true, sampler).unwrap();
            for r in 0..32 {
                for c in 0..4 {
                    let expect = if c == 2 { des.b.get(r, c) } else { des.a.get(r, c) };
                    assert_eq!(des.ab[2].get(r, c), expect);
                    let expect_ba = if c == 2 { des.a.get(r, c) } else { des.b.get(r, c) };
                    assert_eq!(des.ba.as_ref().unwrap()[2].get(r, c), expect_ba);
                }
            }
        }
    }

    #[test]
    fn flatten_order_one_dimension() {
        let des = saltelli_design(&space(1), 2, 9, false).unwrap();
        let flat = flatten_for_evaluation(&des);
        assert_eq!(flat.rows(), 6);
        let expected = [
            des.a.get(0, 0),
            des.a.get(1, 0),
            des.b.get(0, 0),
            des.b.get(1, 0),
            des.ab[0].get(0, 0),
            des.ab[0].get(1, 0),
        ];
        assert_eq!(flat.as_slice(), &expected);
        assert_eq!(des.locate(3), (MatrixId::B, 1));
        assert_eq!(des.locate(4), (MatrixId::AB(0), 0));
    }

    #[test]
    fn flatten_second_order() {
        let des = saltelli_design(&space(2), 2, 9, true).unwrap();
        let flat = flatten_for_evaluation(&des);
        assert_eq!(flat.rows(), 12);
        assert_eq!(des.locate(11), (MatrixId::BA(1), 1));
    }

    #[test]
    fn independent_base_matrices() {
        let des = saltelli_design_with(&space(2), 64, 3, false, BaseSampler::Lhs).unwrap();
        assert_ne!(des.a.as_slice(), des.b.as_slice());
        let des = saltelli_design(&space(2), 64, 3, false).unwrap();
        assert_ne!(des.a.as_slice(), des.b.as_slice());
    }

    proptest! {
        #[test]
        fn column_identity_and_locate(d in 1usize..6, n in 2usize..40, seed in any::<u64>(), second in any::<bool>()) {
            let des = saltelli_design(&space(d), n, seed, second).unwrap();
            for i in 0..d {
                for r in 0..n {
                    for j in 0..d {
                        let src = if i == j { &des.b } else { &des.a };
                        prop_assert_eq!(des.ab[i].get(r, j), src.get(r, j));
                    }
                }
            }
            let flat = flatten_for_evaluation(&des);
            prop_assert_eq!(flat.rows(), des.total_evaluations);
            for k in (0..flat.rows()).step_by(7) {
                let (id, r) = des.locate(k);
                prop_assert_eq!(flat.row(k), des.matrix(id).row(r));
            }
            let sp = space(d);
            prop_assert!(flat.row_iter().all(|row| sp.contains(row)));
        }
    }
}
