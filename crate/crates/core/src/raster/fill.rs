use super::{BinaryMask, RasterError};

const CLOSURE_TOL: f64 = 1e-9;

/// Rasterizes a closed curve and fills its interior.
///
/// Consecutive samples are rounded to pixel centers and joined with 8-connected
/// Bresenham segments, which seals the loop against 4-connected leaks. The
/// exterior is then flood-filled from a one-pixel frame around the image, so a
/// curve running along the image edge still has a well-defined outside.
/// Everything not reached by the exterior fill, curve pixels included, is
/// foreground.
pub fn rasterize_filled(
    curve: &[(f64, f64)],
    width: usize,
    height: usize,
) -> Result<BinaryMask, RasterError> {
    let mut mask = BinaryMask::new(width, height)?;
    if curve.len() < 4 {
        return Err(RasterError::DegenerateCurve);
    }
    let (first, last) = (curve[0], curve[curve.len() - 1]);
    if (first.0 - last.0).abs() > CLOSURE_TOL || (first.1 - last.1).abs() > CLOSURE_TOL {
        return Err(RasterError::OpenCurve);
    }
    if shoelace_area(curve).abs() < 0.5 {
        return Err(RasterError::DegenerateCurve);
    }

    let mut pixels = Vec::with_capacity(curve.len());
    for &(r, c) in curve {
        let (rr, cc) = (r.round(), c.round());
        if !(rr >= 0.0 && cc >= 0.0 && rr < height as f64 && cc < width as f64) {
            return Err(RasterError::CurveOutOfBounds {
                row: r,
                col: c,
                width,
                height,
            });
        }
        pixels.push((rr as i64, cc as i64));
    }

    // padded grid: 0 = unknown, 1 = curve, 2 = exterior
    let pw = width + 2;
    let ph = height + 2;
    let mut grid = vec![0u8; pw * ph];
    for seg in pixels.windows(2) {
        line(seg[0], seg[1], |r, c| {
            grid[(r as usize + 1) * pw + c as usize + 1] = 1;
        });
    }

    let mut stack = vec![0usize];
    grid[0] = 2;
    while let Some(i) = stack.pop() {
        let (r, c) = (i / pw, i % pw);
        let mut visit = |j: usize| {
            if grid[j] == 0 {
                grid[j] = 2;
                stack.push(j);
            }
        };
        if r > 0 {
            visit(i - pw);
        }
        if r + 1 < ph {
            visit(i + pw);
        }
        if c > 0 {
            visit(i - 1);
        }
        if c + 1 < pw {
            visit(i + 1);
        }
    }

    for r in 0..height {
        for c in 0..width {
            if grid[(r + 1) * pw + c + 1] != 2 {
                mask.set(r, c, true);
            }
        }
    }
    Ok(mask)
}

fn shoelace_area(curve: &[(f64, f64)]) -> f64 {
    curve
        .windows(2)
        .map(|w| w[0].1 * w[1].0 - w[1].1 * w[0].0)
        .sum::<f64>()
        / 2.0
}

/// Bresenham segment, endpoints inclusive.
fn line(a: (i64, i64), b: (i64, i64), mut plot: impl FnMut(i64, i64)) {
    let (mut r, mut c) = a;
    let dr = (b.0 - a.0).abs();
    let dc = -(b.1 - a.1).abs();
    let sr = if a.0 < b.0 { 1 } else { -1 };
    let sc = if a.1 < b.1 { 1 } else { -1 };
    let mut err = dr + dc;
    loop {
        plot(r, c);
        if r == b.0 && c == b.1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dc {
            err += dc;
            r += sr;
        }
        if e2 <= dr {
            err += dr;
            c += sc;
        }
    }
}
