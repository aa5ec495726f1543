use super::{squared_distance_field, BinaryMask, RasterError};

/// Two concentric bands outside a lesion: an inner band that is ignored and
/// the band beyond it used for sampling the surrounding skin.
#[derive(Clone, Debug, PartialEq)]
pub struct Rings {
    pub skip: BinaryMask,
    pub sample: BinaryMask,
    /// Set when the image ran out of background pixels before both quotas
    /// were met.
    pub truncated: bool,
}

/// Splits the background into distance-ordered pixel quotas.
///
/// Background pixels are ranked by their distance to the lesion, ties broken
/// in row-major order. The first `floor(skip_fraction * area)` pixels form the
/// skip ring and the next `floor(take_fraction * area)` the sample ring.
pub fn outer_rings(
    lesion: &BinaryMask,
    skip_fraction: f64,
    take_fraction: f64,
) -> Result<Rings, RasterError> {
    if !(skip_fraction >= 0.0 && skip_fraction.is_finite())
        || !(take_fraction > 0.0 && take_fraction.is_finite())
    {
        return Err(RasterError::InvalidFractions {
            skip: skip_fraction,
            take: take_fraction,
        });
    }
    let sq = squared_distance_field(lesion)?;
    let area = lesion.count() as f64;
    let skip_quota = (skip_fraction * area).floor() as usize;
    let take_quota = (take_fraction * area).floor() as usize;

    let mut ranked: Vec<(u64, usize)> = sq
        .iter()
        .enumerate()
        .filter(|&(i, _)| !lesion.bits()[i])
        .map(|(i, &d)| (d, i))
        .collect();
    ranked.sort_unstable();

    let (w, h) = (lesion.width(), lesion.height());
    let mut skip = BinaryMask::new(w, h)?;
    let mut sample = BinaryMask::new(w, h)?;
    let skip_end = skip_quota.min(ranked.len());
    let sample_end = (skip_quota + take_quota).min(ranked.len());
    for &(_, i) in &ranked[..skip_end] {
        skip.set(i / w, i % w, true);
    }
    for &(_, i) in &ranked[skip_end..sample_end] {
        sample.set(i / w, i % w, true);
    }
    Ok(Rings {
        skip,
        sample,
        truncated: ranked.len() < skip_quota + take_quota,
    })
}
