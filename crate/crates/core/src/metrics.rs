//! Geometric scores of an image map against the true supporting curves.

use crate::error::Result;
use crate::geometry::{ParametricCurve, Vec2};
use crate::imaging::ImageMap;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakMetrics {
    pub level: f64,
    /// Largest distance from a superlevel-set node to the curves.
    pub false_alarm: f64,
    /// Largest distance from a curve point to the superlevel set
    /// (`+inf` when the set is empty).
    pub coverage: f64,
    pub peak: f64,
    pub peak_location: [f64; 2],
    /// Mean of `W` over nodes farther than `tube_width` from every curve.
    pub background_mean: f64,
    /// `background_mean / peak`.
    pub background_ratio: f64,
    pub tube_width: f64,
    pub superlevel_count: usize,
}

/// Dense points along the curves with spacing at most `spacing`.
pub fn dense_curve_points(curves: &[ParametricCurve], spacing: f64) -> Result<Vec<Vec2>> {
    let mut out = Vec::new();
    for c in curves {
        out.extend(c.sample(spacing)?.into_iter().map(|s| s.point));
        // midpoint samples miss the ends; add them for continuous curves
        if !matches!(c.shape, crate::geometry::CurveShape::Points { .. }) {
            let (lo, hi) = c.z_range();
            out.push(c.eval(lo)?.point);
            out.push(c.eval(hi)?.point);
        }
    }
    Ok(out)
}

fn distance_to_set(p: Vec2, set: &[Vec2]) -> f64 {
    set.iter()
        .map(|q| (p - q).norm_squared())
        .fold(f64::INFINITY, f64::min)
        .sqrt()
}

/// Superlevel set `{x : W(x) >= level * max W}` scored against the truth.
pub fn peak_metrics(
    map: &ImageMap,
    truth: &[ParametricCurve],
    level: f64,
    tube_width: f64,
) -> Result<PeakMetrics> {
    if !(level > 0.0 && level < 1.0) {
        return Err(crate::error::Error::Domain(format!(
            "level must be in (0, 1), got {level}"
        )));
    }
    let spacing = 0.25 * map.grid.dx().min(map.grid.dy());
    let curve_points = dense_curve_points(truth, spacing)?;
    let (peak_idx, peak) = map.max();
    let cut = level * peak;
    let points = map.grid.points();
    let distances: Vec<f64> = points
        .iter()
        .map(|p| distance_to_set(*p, &curve_points))
        .collect();

    let superlevel: Vec<usize> = (0..points.len())
        .filter(|&i| map.values[i] >= cut)
        .collect();
    let false_alarm = superlevel
        .iter()
        .map(|&i| distances[i])
        .fold(0.0, f64::max);
    let set: Vec<Vec2> = superlevel.iter().map(|&i| points[i]).collect();
    let coverage = if set.is_empty() {
        f64::INFINITY
    } else {
        curve_points
            .iter()
            .map(|p| distance_to_set(*p, &set))
            .fold(0.0, f64::max)
    };
    let background: Vec<f64> = (0..points.len())
        .filter(|&i| distances[i] > tube_width)
        .map(|i| map.values[i])
        .collect();
    let background_mean = if background.is_empty() {
        0.0
    } else {
        background.iter().sum::<f64>() / background.len() as f64
    };
    let location = map.grid.point(peak_idx);
    Ok(PeakMetrics {
        level,
        false_alarm,
        coverage,
        peak,
        peak_location: [location.x, location.y],
        background_mean,
        background_ratio: if peak > 0.0 { background_mean / peak } else { 0.0 },
        tube_width,
        superlevel_count: superlevel.len(),
    })
}
