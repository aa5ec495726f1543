use super::RasterError;

/// Closed loop of border control points in (row, col) image coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlPolygon {
    points: Vec<(f64, f64)>,
}

impl ControlPolygon {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self, RasterError> {
        if points.len() < 3 {
            return Err(RasterError::InvalidPolygon(format!(
                "need at least 3 control points, got {}",
                points.len()
            )));
        }
        if let Some(p) = points.iter().find(|p| !p.0.is_finite() || !p.1.is_finite()) {
            return Err(RasterError::InvalidPolygon(format!(
                "non-finite control point ({}, {})",
                p.0, p.1
            )));
        }
        let n = points.len();
        for i in 0..n {
            let (a, b) = (points[i], points[(i + 1) % n]);
            if a == b {
                return Err(RasterError::InvalidPolygon(format!(
                    "consecutive duplicate control point ({}, {}) at index {}",
                    a.0,
                    a.1,
                    (i + 1) % n
                )));
            }
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn longest_edge(&self) -> f64 {
        let n = self.points.len();
        (0..n)
            .map(|i| {
                let (a, b) = (self.points[i], self.points[(i + 1) % n]);
                (a.0 - b.0).hypot(a.1 - b.1)
            })
            .fold(0.0, f64::max)
    }
}

/// Smallest per-segment sample count keeping adjacent curve samples at most
/// `max_step` pixels apart.
///
/// The derivative of a uniform quadratic B-spline segment is a convex blend of
/// two consecutive control-polygon edges, so a segment is never longer than
/// the longest edge.
pub fn auto_samples_per_segment(poly: &ControlPolygon, max_step: f64) -> usize {
    let step = if max_step > 0.0 { max_step } else { 0.5 };
    ((poly.longest_edge() / step).ceil() as usize).max(1)
}

/// Samples the closed uniform quadratic B-spline defined by `poly`.
///
/// Segment `i` is blended from control points `i`, `i+1`, `i+2` (cyclic), so
/// the returned curve starts at the midpoint of the first edge. The first
/// sample is repeated at the end so the curve is explicitly closed.
pub fn spline_close(
    poly: &ControlPolygon,
    samples_per_segment: usize,
) -> Result<Vec<(f64, f64)>, RasterError> {
    if samples_per_segment == 0 {
        return Err(RasterError::InvalidPolygon(
            "samples_per_segment must be positive".into(),
        ));
    }
    let pts = poly.points();
    let n = pts.len();
    let k = samples_per_segment;
    let mut curve = Vec::with_capacity(n * k + 1);
    for i in 0..n {
        let p0 = pts[i];
        let p1 = pts[(i + 1) % n];
        let p2 = pts[(i + 2) % n];
        for s in 0..k {
            let t = s as f64 / k as f64;
            let b0 = 0.5 * (1.0 - t) * (1.0 - t);
            let b1 = -t * t + t + 0.5;
            let b2 = 0.5 * t * t;
            curve.push((
                b0 * p0.0 + b1 * p1.0 + b2 * p2.0,
                b0 * p0.1 + b1 * p1.1 + b2 * p2.1,
            ));
        }
    }
    curve.push(curve[0]);
    Ok(curve)
}
