use super::{BinaryMask, RasterError};

/// Euclidean distance, in pixels, from every pixel to the nearest foreground
/// pixel of the source mask.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceField {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl DistanceField {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

pub fn distance_field(mask: &BinaryMask) -> Result<DistanceField, RasterError> {
    let sq = squared_distance_field(mask)?;
    Ok(DistanceField {
        width: mask.width(),
        height: mask.height(),
        values: sq.into_iter().map(|d| (d as f64).sqrt()).collect(),
    })
}

/// Exact squared Euclidean distances (integer valued), row-major.
///
/// Two separable passes in integer arithmetic: a column scan giving the
/// vertical distance to the nearest foreground pixel, then a lower-envelope
/// pass per row over the parabolas `(x - i)^2 + g(i)^2`.
pub fn squared_distance_field(mask: &BinaryMask) -> Result<Vec<u64>, RasterError> {
    if mask.is_empty() {
        return Err(RasterError::EmptyMask);
    }
    let (w, h) = (mask.width(), mask.height());
    let inf = (w + h) as i64;

    let mut g = vec![0i64; w * h];
    for c in 0..w {
        g[c] = if mask.get(0, c) { 0 } else { inf };
        for r in 1..h {
            g[r * w + c] = if mask.get(r, c) {
                0
            } else {
                (g[(r - 1) * w + c] + 1).min(inf)
            };
        }
        for r in (0..h.saturating_sub(1)).rev() {
            let below = g[(r + 1) * w + c];
            if below < g[r * w + c] {
                g[r * w + c] = below + 1;
            }
        }
    }

    let mut out = vec![0u64; w * h];
    let mut s = vec![0usize; w];
    let mut t = vec![0i64; w];
    for r in 0..h {
        let row = &g[r * w..(r + 1) * w];
        let f = |x: i64, i: usize| (x - i as i64).pow(2) + row[i] * row[i];
        let sep = |i: usize, u: usize| {
            let (ii, uu) = (i as i64, u as i64);
            (uu * uu - ii * ii + row[u] * row[u] - row[i] * row[i]).div_euclid(2 * (uu - ii))
        };
        let mut q: isize = 0;
        s[0] = 0;
        t[0] = 0;
        for u in 1..w {
            while q >= 0 && f(t[q as usize], s[q as usize]) > f(t[q as usize], u) {
                q -= 1;
            }
            if q < 0 {
                q = 0;
                s[0] = u;
            } else {
                let next = 1 + sep(s[q as usize], u);
                if next < w as i64 {
                    q += 1;
                    s[q as usize] = u;
                    t[q as usize] = next;
                }
            }
        }
        for u in (0..w).rev() {
            out[r * w + u] = f(u as i64, s[q as usize]) as u64;
            if u as i64 == t[q as usize] {
                q -= 1;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_force(mask: &BinaryMask) -> Vec<u64> {
        let fg: Vec<_> = mask.foreground().collect();
        let mut out = Vec::with_capacity(mask.width() * mask.height());
        for r in 0..mask.height() {
            for c in 0..mask.width() {
                let best = fg
                    .iter()
                    .map(|&(fr, fc)| {
                        let dr = fr as i64 - r as i64;
                        let dc = fc as i64 - c as i64;
                        (dr * dr + dc * dc) as u64
                    })
                    .min()
                    .unwrap();
                out.push(best);
            }
        }
        out
    }

    #[test]
    fn three_four_five() {
        let mut m = BinaryMask::new(8, 8).unwrap();
        m.set(0, 0, true);
        let d = distance_field(&m).unwrap();
        assert_eq!(d.get(3, 4), 5.0);
        assert_eq!(d.get(0, 0), 0.0);
    }

    #[test]
    fn full_foreground_is_zero() {
        let m = BinaryMask::from_fn(7, 5, |_, _| true).unwrap();
        assert!(distance_field(&m).unwrap().values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn empty_mask_rejected() {
        let m = BinaryMask::new(4, 4).unwrap();
        assert_eq!(distance_field(&m), Err(RasterError::EmptyMask));
    }

    #[test]
    fn matches_brute_force_on_random_masks() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for case in 0..20 {
            let (w, h) = (rng.gen_range(1..40), rng.gen_range(1..40));
            let density = [0.002, 0.02, 0.2, 0.6][case % 4];
            let mut m = BinaryMask::from_fn(w, h, |_, _| rng.gen_bool(density)).unwrap();
            if m.is_empty() {
                m.set(h / 2, w / 2, true);
            }
            assert_eq!(squared_distance_field(&m).unwrap(), brute_force(&m));
        }
    }

    #[test]
    fn single_row_and_column_images() {
        let mut row = BinaryMask::new(9, 1).unwrap();
        row.set(0, 6, true);
        assert_eq!(
            squared_distance_field(&row).unwrap(),
            vec![36, 25, 16, 9, 4, 1, 0, 1, 4]
        );
        let mut col = BinaryMask::new(1, 4).unwrap();
        col.set(1, 0, true);
        assert_eq!(squared_distance_field(&col).unwrap(), vec![1, 0, 1, 4]);
    }
}
