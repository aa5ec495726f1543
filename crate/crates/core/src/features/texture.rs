use super::FeatureError;

/// Pair displacement of a co-occurrence matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Deg0,
    Deg45,
    Deg90,
    Deg135,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::Deg0,
        Direction::Deg45,
        Direction::Deg90,
        Direction::Deg135,
    ];

    /// (row, col) offset from the reference pixel to its partner.
    pub fn offset(self) -> (isize, isize) {
        match self {
            Direction::Deg0 => (0, 1),
            Direction::Deg45 => (-1, 1),
            Direction::Deg90 => (-1, 0),
            Direction::Deg135 => (-1, -1),
        }
    }
}

#[inline]
pub fn luminance(rgb: [u8; 3]) -> f64 {
    0.299 * rgb[0] as f64 + 0.587 * rgb[1] as f64 + 0.114 * rgb[2] as f64
}

/// Fixed global bins over [0, 256).
#[inline]
pub fn quantize(lum: f64, levels: usize) -> u8 {
    ((lum * levels as f64 / 256.0).floor().max(0.0) as usize).min(levels - 1) as u8
}

/// Normalized gray-level co-occurrence matrix, not symmetrized.
#[derive(Clone, Debug, PartialEq)]
pub struct Glcm {
    levels: usize,
    p: Vec<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TextureStats {
    pub entropy: f64,
    pub contrast: f64,
    pub correlation: f64,
}

impl Glcm {
    pub fn levels(&self) -> usize {
        self.levels
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.p[a * self.levels + b]
    }

    pub fn stats(&self) -> TextureStats {
        let l = self.levels;
        stats_from_entries(
            (0..l * l)
                .filter(|&i| self.p[i] > 0.0)
                .map(|i| (i / l, i % l, self.p[i])),
        )
    }
}

/// Entropy (bits), contrast and correlation from the nonzero entries
/// `(a, b, p)` of a normalized matrix. Correlation is 0 when either marginal
/// has zero variance.
fn stats_from_entries(entries: impl Iterator<Item = (usize, usize, f64)> + Clone) -> TextureStats {
    let mut entropy = 0.0;
    let mut contrast = 0.0;
    let mut mu_a = 0.0;
    let mut mu_b = 0.0;
    for (a, b, p) in entries.clone() {
        entropy -= p * p.log2();
        let d = a as f64 - b as f64;
        contrast += d * d * p;
        mu_a += a as f64 * p;
        mu_b += b as f64 * p;
    }
    let mut var_a = 0.0;
    let mut var_b = 0.0;
    let mut cov = 0.0;
    for (a, b, p) in entries {
        let da = a as f64 - mu_a;
        let db = b as f64 - mu_b;
        var_a += da * da * p;
        var_b += db * db * p;
        cov += da * db * p;
    }
    let denom = (var_a * var_b).sqrt();
    let correlation = if denom < 1e-12 {
        0.0
    } else {
        (cov / denom).clamp(-1.0, 1.0)
    };
    TextureStats {
        entropy: entropy.max(0.0),
        contrast,
        correlation,
    }
}

fn check_window(window: &[u8], size: usize, levels: usize) -> Result<(), FeatureError> {
    if !(2..=256).contains(&levels) {
        return Err(FeatureError::InvalidLevels(levels));
    }
    if window.len() != size * size {
        return Err(FeatureError::WrongCount {
            expected: size * size,
            actual: window.len(),
        });
    }
    if let Some(&level) = window.iter().find(|&&v| v as usize >= levels) {
        return Err(FeatureError::LevelOutOfRange { level, levels });
    }
    Ok(())
}

/// Co-occurrence matrix of a square `size` x `size` window of quantized
/// levels (row-major).
pub fn glcm(
    window: &[u8],
    size: usize,
    levels: usize,
    direction: Direction,
) -> Result<Glcm, FeatureError> {
    check_window(window, size, levels)?;
    let mut counts = vec![0u32; levels * levels];
    let total = for_each_pair(window, size, direction, |a, b| {
        counts[a as usize * levels + b as usize] += 1;
    });
    if total == 0 {
        return Err(FeatureError::WindowTooSmall { size, direction });
    }
    Ok(Glcm {
        levels,
        p: counts.into_iter().map(|c| c as f64 / total as f64).collect(),
    })
}

fn for_each_pair(window: &[u8], size: usize, dir: Direction, mut f: impl FnMut(u8, u8)) -> usize {
    let (dr, dc) = dir.offset();
    let n = size as isize;
    let mut total = 0;
    for r in 0..n {
        for c in 0..n {
            let (r2, c2) = (r + dr, c + dc);
            if r2 < 0 || c2 < 0 || r2 >= n || c2 >= n {
                continue;
            }
            f(window[(r * n + c) as usize], window[(r2 * n + c2) as usize]);
            total += 1;
        }
    }
    total
}

/// F16-F18: entropy, contrast and correlation averaged over the four
/// directions.
pub fn texture_features(window: &[u8], size: usize, levels: usize) -> Result<[f64; 3], FeatureError> {
    check_window(window, size, levels)?;
    if size < 2 {
        return Err(FeatureError::WindowTooSmall {
            size,
            direction: Direction::Deg0,
        });
    }
    let mut scratch = Vec::with_capacity(size * size);
    Ok(window_texture(window, size, &mut scratch))
}

/// Sparse fast path used by the plane extractor: pair codes are sorted and
/// run-length counted instead of filling a dense matrix.
pub(crate) fn window_texture(window: &[u8], size: usize, scratch: &mut Vec<u16>) -> [f64; 3] {
    let mut acc = [0.0; 3];
    let mut runs: Vec<(usize, usize, f64)> = Vec::with_capacity(size * size);
    for dir in Direction::ALL {
        scratch.clear();
        let total = for_each_pair(window, size, dir, |a, b| {
            scratch.push(((a as u16) << 8) | b as u16);
        });
        scratch.sort_unstable();
        runs.clear();
        let mut i = 0;
        while i < scratch.len() {
            let code = scratch[i];
            let mut j = i + 1;
            while j < scratch.len() && scratch[j] == code {
                j += 1;
            }
            runs.push((
                (code >> 8) as usize,
                (code & 0xff) as usize,
                (j - i) as f64 / total as f64,
            ));
            i = j;
        }
        let s = stats_from_entries(runs.iter().copied());
        acc[0] += s.entropy;
        acc[1] += s.contrast;
        acc[2] += s.correlation;
    }
    acc.map(|v| v / 4.0)
}
