use super::{BinaryMask, RasterError};

/// Replaces each pixel with the majority label of its `window` x `window`
/// neighborhood. Neighborhoods at the border replicate the edge pixels, so
/// every pixel receives exactly `window^2` votes and ties cannot occur.
pub fn majority_filter(mask: &BinaryMask, window: usize) -> Result<BinaryMask, RasterError> {
    if window < 3 || window.is_multiple_of(2) {
        return Err(RasterError::InvalidWindow(window));
    }
    let (w, h) = (mask.width(), mask.height());
    let half = (window / 2) as isize;
    let clamp = |v: isize, n: usize| v.clamp(0, n as isize - 1) as usize;

    // clamped vote counts are separable: column sums first, then row sums
    let mut col_sums = vec![0u32; w * h];
    for r in 0..h {
        for c in 0..w {
            col_sums[r * w + c] = (-half..=half)
                .filter(|&d| mask.get(clamp(r as isize + d, h), c))
                .count() as u32;
        }
    }
    let needed = (window * window / 2 + 1) as u32;
    BinaryMask::from_fn(w, h, |r, c| {
        let votes: u32 = (-half..=half)
            .map(|d| col_sums[r * w + clamp(c as isize + d, w)])
            .sum();
        votes >= needed
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn naive(mask: &BinaryMask, window: usize) -> BinaryMask {
        let (w, h) = (mask.width() as isize, mask.height() as isize);
        let half = window as isize / 2;
        BinaryMask::from_fn(mask.width(), mask.height(), |r, c| {
            let mut fg = 0;
            let mut bg = 0;
            for dr in -half..=half {
                for dc in -half..=half {
                    let rr = (r as isize + dr).clamp(0, h - 1) as usize;
                    let cc = (c as isize + dc).clamp(0, w - 1) as usize;
                    if mask.get(rr, cc) {
                        fg += 1;
                    } else {
                        bg += 1;
                    }
                }
            }
            fg > bg
        })
        .unwrap()
    }

    #[test]
    fn isolated_pixel_removed() {
        let mut m = BinaryMask::new(9, 9).unwrap();
        m.set(4, 4, true);
        assert!(majority_filter(&m, 5).unwrap().is_empty());
    }

    #[test]
    fn uniform_masks_unchanged() {
        let empty = BinaryMask::new(6, 4).unwrap();
        assert_eq!(majority_filter(&empty, 5).unwrap(), empty);
        let full = BinaryMask::from_fn(6, 4, |_, _| true).unwrap();
        assert_eq!(majority_filter(&full, 5).unwrap(), full);
    }

    #[test]
    fn even_or_tiny_window_rejected() {
        let m = BinaryMask::new(4, 4).unwrap();
        assert_eq!(majority_filter(&m, 4), Err(RasterError::InvalidWindow(4)));
        assert_eq!(majority_filter(&m, 1), Err(RasterError::InvalidWindow(1)));
    }

    #[test]
    fn matches_naive_vote_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for window in [3, 5, 7] {
            for p in [0.3, 0.5, 0.7] {
                let m = BinaryMask::from_fn(32, 32, |_, _| rng.gen_bool(p)).unwrap();
                assert_eq!(majority_filter(&m, window).unwrap(), naive(&m, window));
            }
        }
        // images smaller than the window
        let m = BinaryMask::from_fn(2, 3, |r, c| (r + c) % 2 == 0).unwrap();
        assert_eq!(majority_filter(&m, 5).unwrap(), naive(&m, 5));
    }
}
