//! Sobol low-discrepancy sequence with hash-based Owen scrambling.
//!
//! Points are generated in Gray-code order from 32-bit direction numbers. Scrambling
//! applies the Laine–Karras nested-uniform permutation to the bit-reversed integer
//! coordinate, with one independent seed per dimension.

use alloc::vec::Vec;

use super::directions::{DIRECTIONS, MAX_DIMS};

pub const SOBOL_MAX_DIMS: usize = MAX_DIMS;

const BITS: usize = 32;

#[derive(Debug, Clone)]
pub struct ScrambledSobol {
    dims: usize,
    /// `dims × 32` direction integers, row per dimension.
    v: Vec<u32>,
    seeds: Option<Vec<u32>>,
}

impl ScrambledSobol {
    /// Unscrambled sequence. `None` when `dims` exceeds [`SOBOL_MAX_DIMS`].
    pub fn plain(dims: usize) -> Option<Self> {
        if dims == 0 || dims > MAX_DIMS {
            return None;
        }
        let mut v = alloc::vec![0u32; dims * BITS];
        for k in 0..BITS {
            v[k] = 1u32 << (BITS - 1 - k);
        }
        for d in 1..dims {
            let (poly, init) = DIRECTIONS[d - 1];
            let degree = (32 - poly.leading_zeros() - 1) as usize;
            let mut m = [0u32; BITS];
            m[..degree].copy_from_slice(&init[..degree]);
            for k in degree..BITS {
                let mut mk = m[k - degree] ^ (m[k - degree] << degree);
                for j in 1..degree {
                    if (poly >> (degree - j)) & 1 == 1 {
                        mk ^= m[k - j] << j;
                    }
                }
                m[k] = mk;
            }
            for k in 0..BITS {
                v[d * BITS + k] = m[k] << (BITS - 1 - k);
            }
        }
        Some(Self { dims, v, seeds: None })
    }

    pub fn scrambled(dims: usize, seed: u64) -> Option<Self> {
        let mut s = Self::plain(dims)?;
        let mut state = seed;
        s.seeds = Some((0..dims).map(|_| (splitmix64(&mut state) >> 32) as u32).collect());
        Some(s)
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    /// Integer coordinate of point `index` in dimension `dim`.
    pub fn point_u32(&self, index: u32, dim: usize) -> u32 {
        let gray = index ^ (index >> 1);
        let dirs = &self.v[dim * BITS..(dim + 1) * BITS];
        let mut x = 0u32;
        let mut bits = gray;
        let mut k = 0;
        while bits != 0 {
            if bits & 1 == 1 {
                x ^= dirs[k];
            }
            bits >>= 1;
            k += 1;
        }
        match &self.seeds {
            Some(seeds) => owen_scramble(x, seeds[dim]),
            None => x,
        }
    }

    /// Coordinate in `[0, 1)`; scrambled points are centred inside their 2⁻³² cell.
    pub fn point(&self, index: u32, dim: usize) -> f64 {
        let x = self.point_u32(index, dim) as f64;
        match self.seeds {
            Some(_) => (x + 0.5) / 4_294_967_296.0,
            None => x / 4_294_967_296.0,
        }
    }
}

fn laine_karras(mut x: u32, seed: u32) -> u32 {
    x = x.wrapping_add(seed);
    x ^= x.wrapping_mul(0x6c50_b47c);
    x ^= x.wrapping_mul(0xb82f_1e52);
    x ^= x.wrapping_mul(0xc7af_e638);
    x ^= x.wrapping_mul(0x8d22_f6e6);
    x
}

fn owen_scramble(x: u32, seed: u32) -> u32 {
    laine_karras(x.reverse_bits(), seed).reverse_bits()
}

pub(crate) fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
