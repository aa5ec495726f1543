use super::FeatureError;

// 99-exchange selection network for the median of 25 (Smith's construction
// for 5x5 FPGA median filters). Only element 12 is guaranteed sorted.
const NETWORK_25: [(u8, u8); 99] = [
    (0, 1), (3, 4), (2, 4), (2, 3), (6, 7), (5, 7), (5, 6), (9, 10), (8, 10),
    (8, 9), (12, 13), (11, 13), (11, 12), (15, 16), (14, 16), (14, 15), (18, 19),
    (17, 19), (17, 18), (21, 22), (20, 22), (20, 21), (23, 24), (2, 5), (3, 6),
    (0, 6), (0, 3), (4, 7), (1, 7), (1, 4), (11, 14), (8, 14), (8, 11), (12, 15),
    (9, 15), (9, 12), (13, 16), (10, 16), (10, 13), (20, 23), (17, 23), (17, 20),
    (21, 24), (18, 24), (18, 21), (19, 22), (8, 17), (9, 18), (0, 18), (0, 9),
    (10, 19), (1, 19), (1, 10), (11, 20), (2, 20), (2, 11), (12, 21), (3, 21),
    (3, 12), (13, 22), (4, 22), (4, 13), (14, 23), (5, 23), (5, 14), (15, 24),
    (6, 24), (6, 15), (7, 16), (7, 19), (13, 21), (15, 23), (7, 13), (7, 15),
    (1, 9), (3, 11), (5, 17), (11, 17), (9, 17), (4, 10), (6, 12), (7, 14),
    (4, 6), (4, 7), (12, 14), (10, 14), (6, 7), (10, 12), (6, 10), (6, 17),
    (12, 17), (7, 17), (7, 10), (12, 18), (7, 12), (10, 18), (12, 20), (10, 20),
    (10, 12),
];

/// 13th order statistic of 25 values by partial exchange network.
#[inline]
pub(crate) fn median25_in_place(p: &mut [f64; 25]) -> f64 {
    for &(a, b) in NETWORK_25.iter() {
        let (a, b) = (a as usize, b as usize);
        let (x, y) = (p[a], p[b]);
        if x > y {
            p[a] = y;
            p[b] = x;
        }
    }
    p[12]
}

pub fn median25(values: &[f64]) -> Result<f64, FeatureError> {
    let mut buf: [f64; 25] = values.try_into().map_err(|_| FeatureError::WrongCount {
        expected: 25,
        actual: values.len(),
    })?;
    Ok(median25_in_place(&mut buf))
}

/// Lower median (element `(n - 1) / 2` in sorted order) of a non-empty
/// slice; reorders the slice.
pub fn lower_median(values: &mut [f64]) -> f64 {
    let k = (values.len() - 1) / 2;
    *values.select_nth_unstable_by(k, f64::total_cmp).1
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn full_sort_median(v: &[f64]) -> f64 {
        let mut s = v.to_vec();
        s.sort_by(f64::total_cmp);
        s[12]
    }

    #[test]
    fn ascending_sequence() {
        let v: Vec<f64> = (0..25).map(|i| i as f64).collect();
        assert_eq!(median25(&v).unwrap(), 12.0);
        let rev: Vec<f64> = v.iter().rev().copied().collect();
        assert_eq!(median25(&rev).unwrap(), 12.0);
    }

    #[test]
    fn constant_values() {
        assert_eq!(median25(&[4.25; 25]).unwrap(), 4.25);
    }

    #[test]
    fn wrong_count_rejected() {
        assert_eq!(
            median25(&[1.0; 24]),
            Err(FeatureError::WrongCount {
                expected: 25,
                actual: 24
            })
        );
    }

    #[test]
    fn random_tuples_match_full_sort() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20_000 {
            let v: Vec<f64> = (0..25).map(|_| rng.gen_range(-5..5) as f64).collect();
            assert_eq!(median25(&v).unwrap(), full_sort_median(&v));
        }
    }

    #[test]
    fn binary_inputs_exhaustive_bitsliced() {
        // 0-1 principle: a comparator network selects the median of every
        // input iff it does so for every 0/1 input. Each u64 lane evaluates 64
        // binary inputs at once; min/max become and/or.
        let total: u64 = 1 << 25;
        // low six input bits vary across lanes; the rest are fixed per block
        let mut lane_bits = [0u64; 6];
        // ones_at_least[k]: lanes whose low six bits have popcount >= k
        let mut ones_at_least = [0u64; 8];
        for lane in 0..64u64 {
            for (i, w) in lane_bits.iter_mut().enumerate() {
                if (lane >> i) & 1 == 1 {
                    *w |= 1 << lane;
                }
            }
            for slot in &mut ones_at_least[..=lane.count_ones() as usize] {
                *slot |= 1 << lane;
            }
        }
        let mut base = 0u64;
        while base < total {
            let mut p = [0u64; 25];
            p[..6].copy_from_slice(&lane_bits);
            for (i, w) in p.iter_mut().enumerate().skip(6) {
                *w = if (base >> i) & 1 == 1 { u64::MAX } else { 0 };
            }
            let high = base.count_ones() as usize;
            let expect = if high >= 13 { u64::MAX } else { ones_at_least.get(13 - high).copied().unwrap_or(0) };
            for &(a, b) in NETWORK_25.iter() {
                let (a, b) = (a as usize, b as usize);
                let (lo, hi) = (p[a] & p[b], p[a] | p[b]);
                p[a] = lo;
                p[b] = hi;
            }
            assert_eq!(p[12], expect, "mismatch in block starting at {base}");
            base += 64;
        }
    }

    #[test]
    fn lower_median_even_and_odd() {
        assert_eq!(lower_median(&mut [4.0, 1.0, 3.0, 2.0]), 2.0);
        assert_eq!(lower_median(&mut [5.0, 1.0, 3.0]), 3.0);
        assert_eq!(lower_median(&mut [9.0]), 9.0);
    }
}
