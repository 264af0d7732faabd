//! Local-linear master-curve cost for data collapse.

use crate::Error;

/// One collapsed point with its y uncertainty.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CollapsedPoint {
    pub x: f64,
    pub y: f64,
    pub dy: f64,
}

/// Collapsed points of one system size, sorted by `x`.
#[derive(Clone, Debug)]
pub struct Curve {
    pub size: usize,
    pub points: Vec<CollapsedPoint>,
}

impl Curve {
    pub fn new(size: usize, mut points: Vec<CollapsedPoint>) -> Self {
        points.sort_by(|a, b| a.x.total_cmp(&b.x));
        Self { size, points }
    }

    /// The two points of this curve whose x values bracket `x`.
    fn bracket(&self, x: f64) -> Option<[CollapsedPoint; 2]> {
        let k = self.points.partition_point(|q| q.x <= x);
        if k == 0 || k == self.points.len() {
            // allow an exact hit on the last point
            let last = self.points.last()?;
            if k == self.points.len() && last.x == x && self.points.len() >= 2 {
                return Some([self.points[k - 2], *last]);
            }
            return None;
        }
        Some([self.points[k - 1], self.points[k]])
    }
}

/// Weighted straight-line estimate through `pts` at `x`: value and variance.
fn local_line(pts: &[CollapsedPoint], x: f64) -> Option<(f64, f64)> {
    let (mut k, mut kx, mut ky, mut kxx, mut kxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for q in pts {
        let w = 1.0 / (q.dy * q.dy);
        k += w;
        kx += w * q.x;
        ky += w * q.y;
        kxx += w * q.x * q.x;
        kxy += w * q.x * q.y;
    }
    let delta = k * kxx - kx * kx;
    if !(delta > 1e-300 * k * kxx.max(1.0)) {
        return None;
    }
    let value = ((kxx * ky - kx * kxy) + x * (k * kxy - kx * ky)) / delta;
    let var = (kxx - 2.0 * x * kx + x * x * k) / delta;
    Some((value, var.max(0.0)))
}

/// Houdayer–Hartmann cost: mean over points of
/// `(y - Y)^2 / (dy^2 + dY^2)`, where `Y ± dY` is a weighted linear fit
/// through the points of every other size that bracket the point's x.
///
/// Fails when fewer than three points overlap another size.
pub fn master_curve_cost(curves: &[Curve]) -> Result<f64, Error> {
    if curves.len() < 2 {
        return Err(Error::Fit("collapse needs at least two sizes".into()));
    }
    let mut total = 0.0;
    let mut used = 0usize;
    let mut neighbours = Vec::with_capacity(2 * curves.len());
    for (i, curve) in curves.iter().enumerate() {
        for pt in &curve.points {
            neighbours.clear();
            for (j, other) in curves.iter().enumerate() {
                if i != j {
                    if let Some(b) = other.bracket(pt.x) {
                        neighbours.extend_from_slice(&b);
                    }
                }
            }
            if neighbours.is_empty() {
                continue;
            }
            if let Some((y_hat, var)) = local_line(&neighbours, pt.x) {
                total += (pt.y - y_hat).powi(2) / (pt.dy * pt.dy + var);
                used += 1;
            }
        }
    }
    if used < 3 {
        return Err(Error::Fit(format!("only {used} points overlap another size; need at least 3")));
    }
    Ok(total / used as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: f64, y: f64) -> CollapsedPoint {
        CollapsedPoint { x, y, dy: 0.1 }
    }

    #[test]
    fn line_through_two_points_is_exact() {
        let (v, _) = local_line(&[pt(0.0, 1.0), pt(2.0, 5.0)], 1.0).unwrap();
        assert!((v - 3.0).abs() < 1e-12);
    }

    #[test]
    fn identical_curves_cost_nothing() {
        let a = Curve::new(8, (0..10).map(|k| pt(k as f64, (k as f64).sin())).collect());
        let b = Curve::new(16, (0..10).map(|k| pt(k as f64 + 0.5, (k as f64 + 0.5).sin())).collect());
        let linear = |x: f64| 2.0 * x - 1.0;
        let c = Curve::new(8, (0..10).map(|k| pt(k as f64, linear(k as f64))).collect());
        let d = Curve::new(16, (0..10).map(|k| pt(k as f64 + 0.5, linear(k as f64 + 0.5))).collect());
        assert!(master_curve_cost(&[c, d]).unwrap() < 1e-20);
        assert!(master_curve_cost(&[a, b]).unwrap() > 0.0);
    }

    #[test]
    fn disjoint_curves_fail() {
        let a = Curve::new(8, (0..5).map(|k| pt(k as f64, 0.0)).collect());
        let b = Curve::new(16, (10..15).map(|k| pt(k as f64, 0.0)).collect());
        assert!(master_curve_cost(&[a, b]).is_err());
    }
}
