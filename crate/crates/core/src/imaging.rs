//! Subspace imaging of thin inclusions from MSR matrices.
//!
//! For each frequency the MSR matrix is decomposed with an SVD and truncated
//! with a relative threshold. A test point `x` is scored by how well its
//! normalized steering vector `d(x)` projects onto the retained left and
//! (conjugated) right singular vectors:
//!
//! ```text
//! W(x) = (1/F) sum_f sum_{m <= M_f} |<d(x; w_f), u_m(w_f)> <d(x; w_f), conj(v_m(w_f))>|
//! ```
//!
//! with `<a, b> = conj(a) . b`. A single frequency gives the `F = 1` case.

use crate::dataset::MsrDataset;
use crate::error::{Error, Result};
use crate::forward::{CMatrix, CVector, DirectionSet, IncidenceTable};
use crate::geometry::Vec2;
use crate::linalg::jacobi_svd;
use crate::media::{ContrastKind, FrequencyContext, HalfSpaceMedium, InclusionMaterial};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const DEFAULT_SVD_THRESHOLD: f64 = 0.01;
pub const DEFAULT_GRID_STEP: f64 = 0.02;

#[derive(Debug, Clone)]
pub struct TruncatedSvd {
    /// All singular values, nonincreasing.
    pub singular_values: Vec<f64>,
    /// Retained left singular vectors `u_m` as columns.
    pub left: CMatrix,
    /// Retained right singular vectors `v_m` as columns (`K = U S V^H`).
    pub right: CMatrix,
    pub retained: usize,
    pub threshold: f64,
}

impl TruncatedSvd {
    /// `sum_m u_m s_m v_m^H` over the retained triplets.
    pub fn reconstruct(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.left.nrows(), self.right.nrows());
        for m in 0..self.retained {
            let s = Complex64::new(self.singular_values[m], 0.0);
            out.gerc(s, &self.left.column(m), &self.right.column(m), Complex64::new(1.0, 0.0));
        }
        out
    }
}

/// SVD keeping the leading `s_j` with `s_j / s_1 >= threshold`.
pub fn truncate_svd(k: &CMatrix, threshold: f64) -> Result<TruncatedSvd> {
    if !k.is_square() {
        return Err(Error::Domain(format!("MSR matrix must be square, got {:?}", k.shape())));
    }
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::Domain(format!("threshold must be in (0, 1), got {threshold}")));
    }
    if k.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Domain("MSR matrix has non-finite entries".into()));
    }
    let n = k.nrows();
    let svd = jacobi_svd(k);
    let singular_values = svd.singular_values;
    let top = singular_values.first().copied().unwrap_or(0.0);
    let retained = if top > 0.0 {
        singular_values
            .iter()
            .take_while(|&&s| s / top >= threshold)
            .count()
    } else {
        0
    };
    let left = svd.u.columns(0, retained).into_owned();
    let right = svd.v.columns(0, retained).into_owned();
    debug_assert_eq!(left.nrows(), n);
    Ok(TruncatedSvd {
        singular_values,
        left,
        right,
        retained,
        threshold,
    })
}

/// Weights `c = (a, b1, b2)` of the steering components `c . (1, v(theta))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteeringConfig {
    pub a: f64,
    pub b1: f64,
    pub b2: f64,
}

impl SteeringConfig {
    pub fn new(a: f64, b1: f64, b2: f64) -> Result<Self> {
        let c = Self { a, b1, b2 };
        if ![a, b1, b2].iter().all(|x| x.is_finite()) || (a == 0.0 && b1 == 0.0 && b2 == 0.0) {
            return Err(Error::Domain(format!("steering vector c must be finite and nonzero, got ({a}, {b1}, {b2})")));
        }
        Ok(c)
    }

    pub fn weight(&self, v: Vec2) -> f64 {
        self.a + self.b1 * v.x + self.b2 * v.y
    }
}

/// Steering choice for a contrast class.
pub fn default_steering(contrast: ContrastKind) -> SteeringConfig {
    let (a, b1, b2) = match contrast {
        ContrastKind::Permittivity | ContrastKind::None => (1.0, 0.0, 0.0),
        ContrastKind::PermeabilityLess => (0.0, 1.0, 0.0),
        ContrastKind::PermeabilityGreater => (0.0, 0.0, 1.0),
        ContrastKind::Both { mu_greater: true } => (1.0, 0.0, 1.0),
        ContrastKind::Both { mu_greater: false } => (1.0, 1.0, 0.0),
    };
    SteeringConfig { a, b1, b2 }
}

/// Contrast class of a set of inclusions: permittivity if any inclusion has
/// it, permeability direction from the first permeable inclusion.
pub fn combined_contrast(medium: &HalfSpaceMedium, materials: &[InclusionMaterial]) -> ContrastKind {
    let kinds: Vec<ContrastKind> = materials
        .iter()
        .map(|m| ContrastKind::classify(medium, m))
        .collect();
    let eps = kinds
        .iter()
        .any(|k| matches!(k, ContrastKind::Permittivity | ContrastKind::Both { .. }));
    let mu_greater = kinds.iter().find_map(|k| match k {
        ContrastKind::PermeabilityGreater => Some(true),
        ContrastKind::PermeabilityLess => Some(false),
        ContrastKind::Both { mu_greater } => Some(*mu_greater),
        _ => None,
    });
    match (eps, mu_greater) {
        (false, None) => ContrastKind::None,
        (true, None) => ContrastKind::Permittivity,
        (false, Some(true)) => ContrastKind::PermeabilityGreater,
        (false, Some(false)) => ContrastKind::PermeabilityLess,
        (true, Some(g)) => ContrastKind::Both { mu_greater: g },
    }
}

/// Steering model of one frequency: `c . (1, v_j) T_j` and `k- v_j`.
#[derive(Debug, Clone)]
pub struct SteeringModel {
    coefficients: Vec<Complex64>,
    wavevectors: Vec<Vec2>,
}

impl SteeringModel {
    pub fn new(table: &IncidenceTable, cfg: &SteeringConfig) -> Self {
        Self {
            coefficients: table
                .directions
                .iter()
                .zip(&table.transmission)
                .map(|(v, t)| t * cfg.weight(*v))
                .collect(),
            wavevectors: table.directions.iter().map(|v| v * table.k_minus).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// Steering vector before normalization.
    pub fn raw(&self, x: Vec2) -> CVector {
        CVector::from_iterator(
            self.len(),
            self.coefficients
                .iter()
                .zip(&self.wavevectors)
                .map(|(c, kv)| c * Complex64::from_polar(1.0, kv.dot(&x))),
        )
    }

    /// Unit steering vector; fails when the raw norm is below `1e-12 N+`.
    pub fn normalized(&self, x: Vec2) -> Result<CVector> {
        let raw = self.raw(x);
        let norm = raw.norm();
        if norm < 1e-12 * self.len() as f64 {
            return Err(Error::DegenerateSteering(x.x, x.y));
        }
        Ok(raw / Complex64::new(norm, 0.0))
    }
}

pub fn steering_vector(
    x: Vec2,
    ctx: &FrequencyContext,
    medium: &HalfSpaceMedium,
    dirs: &DirectionSet,
    cfg: &SteeringConfig,
) -> Result<CVector> {
    let table = IncidenceTable::new(ctx, medium, dirs)?;
    SteeringModel::new(&table, cfg).normalized(x)
}

/// Precomputed data to evaluate the single-frequency functional.
#[derive(Debug, Clone)]
pub struct FrequencyImager {
    pub omega: f64,
    pub svd: TruncatedSvd,
    steering: SteeringModel,
    /// `conj(u_m)` rows, row-major `M_f x N+`.
    left_conj: Vec<Complex64>,
    /// `v_m` rows (the conjugate of `conj(v_m)`), row-major.
    right_plain: Vec<Complex64>,
}

impl FrequencyImager {
    pub fn new(
        k: &CMatrix,
        ctx: &FrequencyContext,
        medium: &HalfSpaceMedium,
        dirs: &DirectionSet,
        cfg: &SteeringConfig,
        threshold: f64,
    ) -> Result<Self> {
        let table = IncidenceTable::new(ctx, medium, dirs)?;
        if k.nrows() != table.len() {
            return Err(Error::Config(format!(
                "MSR matrix is {}x{} but the direction set has {} propagating incidences",
                k.nrows(),
                k.ncols(),
                table.len()
            )));
        }
        let svd = truncate_svd(k, threshold)?;
        let n = table.len();
        let mut left_conj = Vec::with_capacity(svd.retained * n);
        let mut right_plain = Vec::with_capacity(svd.retained * n);
        for m in 0..svd.retained {
            left_conj.extend(svd.left.column(m).iter().map(|z| z.conj()));
            right_plain.extend(svd.right.column(m).iter().copied());
        }
        Ok(Self {
            omega: ctx.omega,
            svd,
            steering: SteeringModel::new(&table, cfg),
            left_conj,
            right_plain,
        })
    }

    /// `sum_m |<d, u_m>| |<d, conj(v_m)>|` at `x`.
    pub fn evaluate(&self, x: Vec2) -> Result<f64> {
        let retained = self.svd.retained;
        if retained == 0 {
            return Ok(0.0);
        }
        let d = self.steering.normalized(x)?;
        let n = d.len();
        let mut total = 0.0;
        for m in 0..retained {
            let u = &self.left_conj[m * n..(m + 1) * n];
            let v = &self.right_plain[m * n..(m + 1) * n];
            // |<d, u>| = |sum conj(d) u| = |sum d conj(u)|; |<d, conj(v)>| = |sum conj(d) conj(v)| = |sum d v|
            let mut du = Complex64::new(0.0, 0.0);
            let mut dv = Complex64::new(0.0, 0.0);
            for j in 0..n {
                du += d[j] * u[j];
                dv += d[j] * v[j];
            }
            total += du.norm() * dv.norm();
        }
        Ok(total)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x1_min: f64,
    pub x1_max: f64,
    pub x2_min: f64,
    pub x2_max: f64,
}

impl Rect {
    pub fn new(x1_min: f64, x1_max: f64, x2_min: f64, x2_max: f64) -> Self {
        Self {
            x1_min,
            x1_max,
            x2_min,
            x2_max,
        }
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.x1_min && p.x <= self.x1_max && p.y >= self.x2_min && p.y <= self.x2_max
    }
}

/// Regular grid over a rectangle, corners included.
///
/// Points are ordered row-major: row 0 is `x2 = x2_max` (shallowest), rows
/// go down in `x2`, and columns run in increasing `x1`. The actual spacing
/// is the requested step shrunk so an integer number of cells fits.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchGrid {
    pub domain: Rect,
    pub step: f64,
    pub cols: usize,
    pub rows: usize,
}

fn cells(width: f64, step: f64) -> usize {
    ((width / step) * (1.0 - 1e-12)).ceil().max(1.0) as usize
}

pub fn make_grid(domain: Rect, step: f64) -> Result<SearchGrid> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::Domain(format!("grid step must be positive, got {step}")));
    }
    if !(domain.x1_max > domain.x1_min && domain.x2_max > domain.x2_min) {
        return Err(Error::Domain(format!("empty search domain {domain:?}")));
    }
    Ok(SearchGrid {
        domain,
        step,
        cols: cells(domain.x1_max - domain.x1_min, step) + 1,
        rows: cells(domain.x2_max - domain.x2_min, step) + 1,
    })
}

impl SearchGrid {
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dx(&self) -> f64 {
        (self.domain.x1_max - self.domain.x1_min) / (self.cols - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        (self.domain.x2_max - self.domain.x2_min) / (self.rows - 1) as f64
    }

    pub fn point(&self, index: usize) -> Vec2 {
        let (row, col) = (index / self.cols, index % self.cols);
        let x1 = if col + 1 == self.cols {
            self.domain.x1_max
        } else {
            self.domain.x1_min + col as f64 * self.dx()
        };
        let x2 = if row + 1 == self.rows {
            self.domain.x2_min
        } else {
            self.domain.x2_max - row as f64 * self.dy()
        };
        Vec2::new(x1, x2)
    }

    pub fn points(&self) -> Vec<Vec2> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImageMap {
    pub grid: SearchGrid,
    /// Row-major values in grid order.
    pub values: Vec<f64>,
    /// `M_f` per frequency.
    pub retained: Vec<usize>,
    pub warnings: Vec<String>,
}

impl ImageMap {
    pub fn max(&self) -> (usize, f64) {
        self.values
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, v)| if v > best.1 { (i, v) } else { best })
    }

    pub fn argmax_point(&self) -> Vec2 {
        self.grid.point(self.max().0)
    }
}

/// Single-frequency functional on every grid node.
pub fn image_single(
    k: &CMatrix,
    ctx: &FrequencyContext,
    medium: &HalfSpaceMedium,
    dirs: &DirectionSet,
    cfg: &SteeringConfig,
    grid: &SearchGrid,
    threshold: f64,
) -> Result<ImageMap> {
    let imager = FrequencyImager::new(k, ctx, medium, dirs, cfg, threshold)?;
    image_frequencies(std::slice::from_ref(&imager), grid)
}

/// Per-frequency maps evaluated on a grid, kept separately.
#[derive(Debug, Clone)]
pub struct FrequencyStack {
    pub grid: SearchGrid,
    /// `values[point][f]`.
    pub values: Vec<Vec<f64>>,
    pub retained: Vec<usize>,
}

impl FrequencyStack {
    pub fn frequency_count(&self) -> usize {
        self.retained.len()
    }

    /// Map of frequency `f` alone.
    pub fn single(&self, f: usize) -> ImageMap {
        let mut warnings = Vec::new();
        if self.retained[f] == 0 {
            warnings.push(format!("frequency {f}: no singular value passed the threshold"));
        }
        ImageMap {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v[f]).collect(),
            retained: vec![self.retained[f]],
            warnings,
        }
    }

    /// Average over frequencies in index order.
    pub fn combined(&self) -> ImageMap {
        let count = self.frequency_count() as f64;
        let warnings = self
            .retained
            .iter()
            .enumerate()
            .filter(|(_, &m)| m == 0)
            .map(|(f, _)| format!("frequency {f}: no singular value passed the threshold"))
            .collect();
        ImageMap {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .map(|v| v.iter().sum::<f64>() / count)
                .collect(),
            retained: self.retained.clone(),
            warnings,
        }
    }
}

pub fn evaluate_stack(imagers: &[FrequencyImager], grid: &SearchGrid) -> Result<FrequencyStack> {
    if imagers.is_empty() {
        return Err(Error::Config("no frequency to image".into()));
    }
    let values = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let x = grid.point(i);
            imagers
                .iter()
                .enumerate()
                .map(|(f, im)| im.evaluate(x).map_err(|e| e.at_frequency(f)))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FrequencyStack {
        grid: grid.clone(),
        values,
        retained: imagers.iter().map(|im| im.svd.retained).collect(),
    })
}

fn image_frequencies(imagers: &[FrequencyImager], grid: &SearchGrid) -> Result<ImageMap> {
    Ok(evaluate_stack(imagers, grid)?.combined())
}

/// Build one imager per frequency of a dataset.
pub fn dataset_imagers(
    dataset: &MsrDataset,
    cfg: &SteeringConfig,
    threshold: f64,
) -> Result<Vec<FrequencyImager>> {
    dataset
        .frequencies
        .par_iter()
        .zip(dataset.matrices.par_iter())
        .enumerate()
        .map(|(f, (&omega, k))| {
            let ctx = dataset.medium.frequency_context(omega)?;
            FrequencyImager::new(k, &ctx, &dataset.medium, &dataset.directions, cfg, threshold)
                .map_err(|e| e.at_frequency(f))
        })
        .collect()
}

/// Multi-frequency functional over a dataset.
pub fn image_multi(
    dataset: &MsrDataset,
    cfg: &SteeringConfig,
    grid: &SearchGrid,
    threshold: f64,
) -> Result<ImageMap> {
    let imagers = dataset_imagers(dataset, cfg, threshold)?;
    image_frequencies(&imagers, grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn ratio_test_on_diagonal() {
        let k = CMatrix::from_diagonal(&CVector::from_vec(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.5, 0.0),
            Complex64::new(0.005, 0.0),
        ]));
        let t = truncate_svd(&k, 0.01).unwrap();
        assert_eq!(t.retained, 2);
        assert_abs_diff_eq!(t.singular_values[2], 0.005, epsilon = 1e-15);
        let t2 = truncate_svd(&(k * Complex64::new(2.0, 0.0)), 0.01).unwrap();
        assert_eq!(t2.retained, 2);
    }

    #[test]
    fn zero_matrix_retains_nothing() {
        let t = truncate_svd(&CMatrix::zeros(4, 4), 0.01).unwrap();
        assert_eq!(t.retained, 0);
        assert!(truncate_svd(&CMatrix::zeros(4, 3), 0.01).is_err());
        assert!(truncate_svd(&CMatrix::zeros(4, 4), 1.5).is_err());
    }

    #[test]
    fn grid_counts() {
        let g = make_grid(Rect::new(-1.0, 1.0, -3.0, -1.0), 0.02).unwrap();
        assert_eq!((g.rows, g.cols), (101, 101));
        assert_eq!(g.len(), 10201);
        assert_eq!(g.point(0), Vec2::new(-1.0, -1.0));
        assert_eq!(g.point(g.len() - 1), Vec2::new(1.0, -3.0));
        assert!(g.points().iter().all(|p| p.y < 0.0));
        let corners = make_grid(Rect::new(-1.0, 1.0, -3.0, -1.0), 2.0).unwrap();
        assert_eq!(corners.len(), 4);
        assert!(make_grid(Rect::new(0.0, 0.0, -1.0, 0.0), 0.1).is_err());
    }

    #[test]
    fn remark_steering_choices() {
        assert_eq!(default_steering(ContrastKind::Permittivity), SteeringConfig { a: 1.0, b1: 0.0, b2: 0.0 });
        assert_eq!(default_steering(ContrastKind::PermeabilityLess), SteeringConfig { a: 0.0, b1: 1.0, b2: 0.0 });
        assert_eq!(default_steering(ContrastKind::PermeabilityGreater), SteeringConfig { a: 0.0, b1: 0.0, b2: 1.0 });
        assert_eq!(
            default_steering(ContrastKind::Both { mu_greater: true }),
            SteeringConfig { a: 1.0, b1: 0.0, b2: 1.0 }
        );
        assert_eq!(
            default_steering(ContrastKind::Both { mu_greater: false }),
            SteeringConfig { a: 1.0, b1: 1.0, b2: 0.0 }
        );
        assert!(SteeringConfig::new(0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn combined_contrast_of_two_inclusions() {
        let m = HalfSpaceMedium::new(1.0, 1.0, 3.0, 3.0).unwrap();
        let eps_only = InclusionMaterial::new(5.0, 3.0).unwrap();
        let mu_only = InclusionMaterial::new(3.0, 5.0).unwrap();
        assert_eq!(combined_contrast(&m, &[eps_only]), ContrastKind::Permittivity);
        assert_eq!(
            combined_contrast(&m, &[eps_only, mu_only]),
            ContrastKind::Both { mu_greater: true }
        );
    }
}
