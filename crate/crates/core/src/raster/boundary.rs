use super::{BinaryMask, RasterError};

/// Inner boundary under 4-adjacency: foreground pixels with at least one
/// 4-neighbor that is background or outside the image. Row-major order.
pub fn boundary_pixels(mask: &BinaryMask) -> Result<Vec<(usize, usize)>, RasterError> {
    if mask.is_empty() {
        return Err(RasterError::EmptyMask);
    }
    let (w, h) = (mask.width(), mask.height());
    Ok(mask
        .foreground()
        .filter(|&(r, c)| {
            r == 0
                || c == 0
                || r + 1 == h
                || c + 1 == w
                || !mask.get(r - 1, c)
                || !mask.get(r + 1, c)
                || !mask.get(r, c - 1)
                || !mask.get(r, c + 1)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_pixel() {
        let m = BinaryMask::from_fn(1, 1, |_, _| true).unwrap();
        assert_eq!(boundary_pixels(&m).unwrap(), vec![(0, 0)]);
    }

    #[test]
    fn filled_square_perimeter() {
        let m = BinaryMask::from_fn(14, 14, |r, c| (2..12).contains(&r) && (2..12).contains(&c))
            .unwrap();
        let b = boundary_pixels(&m).unwrap();
        assert_eq!(b.len(), 36);
        assert!(b.iter().all(|&(r, c)| r == 2 || r == 11 || c == 2 || c == 11));
    }

    #[test]
    fn empty_rejected() {
        assert_eq!(
            boundary_pixels(&BinaryMask::new(3, 3).unwrap()),
            Err(RasterError::EmptyMask)
        );
    }

    #[test]
    fn random_blob_matches_neighbor_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = BinaryMask::from_fn(24, 17, |_, _| rng.gen_bool(0.6)).unwrap();
        let expected: Vec<_> = (0..17)
            .flat_map(|r| (0..24).map(move |c| (r, c)))
            .filter(|&(r, c)| {
                m.get(r, c)
                    && [(-1i32, 0i32), (1, 0), (0, -1), (0, 1)].iter().any(|&(dr, dc)| {
                        let (rr, cc) = (r as i32 + dr, c as i32 + dc);
                        rr < 0 || cc < 0 || rr >= 17 || cc >= 24 || !m.get(rr as usize, cc as usize)
                    })
            })
            .collect();
        let got = boundary_pixels(&m).unwrap();
        assert_eq!(got, expected);
        assert!(got.iter().all(|&(r, c)| m.get(r, c)));
    }
}
