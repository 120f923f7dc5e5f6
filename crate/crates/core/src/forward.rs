//! Multi-static response (MSR) matrices of thin inclusions.
//!
//! Three forward models share the same transmitted-wave factors:
//!
//! * [`assemble_msr_fine`]: the asymptotic amplitude integrated along the
//!   supporting curves with a fine midpoint quadrature (data generation);
//! * [`assemble_msr_factored`]: the half-wavelength segment model written
//!   as `D E D^T` (the structure the imaging functional relies on);
//! * [`assemble_msr_foldylax`]: point scatterers at the fine quadrature
//!   nodes coupled through the lower-medium Green's function.
//!
//! Incidences are `theta_j = -(cos zeta_j, sin zeta_j)` (downgoing) and
//! observations `y_j = -theta_j` (upgoing). Only incidences whose refracted
//! wave propagates in the lower medium enter the matrices.

use crate::error::{Error, Result};
use crate::geometry::{CurveSample, ParametricCurve, Vec2};
use crate::media::{FrequencyContext, HalfSpaceMedium, InclusionMaterial, PolarizationTensor};
use crate::special::{hankel1_0, hankel1_1};
use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Default fine quadrature spacing as a fraction of the lower-medium wavelength.
pub const DEFAULT_QUAD_FRACTION: f64 = 1.0 / 20.0;

#[derive(Debug, Clone, PartialEq)]
pub struct DirectionSet {
    pub count: usize,
    pub alpha: f64,
    pub beta: f64,
    pub zeta: Vec<f64>,
    pub incidences: Vec<Vec2>,
    pub observations: Vec<Vec2>,
    pub propagating: Vec<bool>,
    pub n_plus: usize,
}

impl DirectionSet {
    pub fn propagating_incidences(&self) -> impl Iterator<Item = Vec2> + '_ {
        self.incidences
            .iter()
            .zip(&self.propagating)
            .filter(|(_, &p)| p)
            .map(|(t, _)| *t)
    }

    pub fn propagating_indices(&self) -> Vec<usize> {
        (0..self.count).filter(|&j| self.propagating[j]).collect()
    }
}

/// Equi-angular incidences over `[alpha, beta]`, filtered for propagation.
pub fn build_directions(
    count: usize,
    alpha: f64,
    beta: f64,
    ctx: &FrequencyContext,
) -> Result<DirectionSet> {
    if count < 2 {
        return Err(Error::Domain(format!("need at least two directions, got {count}")));
    }
    if !(alpha > 0.0 && alpha < beta && beta < PI) {
        return Err(Error::Domain(format!(
            "angles must satisfy 0 < alpha < beta < pi, got [{alpha}, {beta}]"
        )));
    }
    let zeta: Vec<f64> = (0..count)
        .map(|j| alpha + (beta - alpha) * j as f64 / (count - 1) as f64)
        .collect();
    let incidences: Vec<Vec2> = zeta.iter().map(|z| -Vec2::new(z.cos(), z.sin())).collect();
    let observations = incidences.iter().map(|t| -t).collect();
    let propagating: Vec<bool> = incidences.iter().map(|t| ctx.is_propagating(*t)).collect();
    let n_plus = propagating.iter().filter(|&&p| p).count();
    Ok(DirectionSet {
        count,
        alpha,
        beta,
        zeta,
        incidences,
        observations,
        propagating,
        n_plus,
    })
}

/// Refracted directions `v(theta_j)` and transmission factors `T(theta_j)`
/// over the propagating incidences.
#[derive(Debug, Clone)]
pub struct IncidenceTable {
    pub k_minus: f64,
    pub directions: Vec<Vec2>,
    pub transmission: Vec<Complex64>,
}

impl IncidenceTable {
    pub fn new(ctx: &FrequencyContext, medium: &HalfSpaceMedium, dirs: &DirectionSet) -> Result<Self> {
        let mut directions = Vec::with_capacity(dirs.n_plus);
        let mut transmission = Vec::with_capacity(dirs.n_plus);
        for theta in dirs.propagating_incidences() {
            directions.push(ctx.transmitted_direction(theta)?);
            transmission.push(ctx.transmission_coefficient(medium, theta)?);
        }
        if directions.is_empty() {
            return Err(Error::Config("no propagating incidence direction".into()));
        }
        Ok(Self {
            k_minus: ctx.k_minus,
            directions,
            transmission,
        })
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    /// `T(theta_j) exp(i k- v(theta_j) . x)` for every incidence.
    pub fn plane_waves(&self, x: Vec2) -> CVector {
        CVector::from_iterator(
            self.len(),
            self.directions
                .iter()
                .zip(&self.transmission)
                .map(|(v, t)| t * Complex64::from_polar(1.0, self.k_minus * v.dot(&x))),
        )
    }
}

/// A thin inclusion: supporting curve plus its material.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inclusion {
    pub curve: ParametricCurve,
    pub material: InclusionMaterial,
}

/// `C = h k-^2 mu+ (1 + i) / (4 mu- sqrt(k+ pi))`.
pub fn amplitude_constant(ctx: &FrequencyContext, medium: &HalfSpaceMedium, thickness: f64) -> Complex64 {
    thickness * far_field_factor(ctx, medium) * ctx.k_minus * ctx.k_minus
}

/// `C / (h k-^2)`: the far-field factor of a unit point source.
fn far_field_factor(ctx: &FrequencyContext, medium: &HalfSpaceMedium) -> Complex64 {
    Complex64::new(1.0, 1.0) * medium.mu_plus / (4.0 * medium.mu_minus * (ctx.k_plus * PI).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForwardModel {
    Fine,
    Coarse,
    FoldyLax,
}

impl ForwardModel {
    pub fn name(&self) -> &'static str {
        match self {
            ForwardModel::Fine => "fine",
            ForwardModel::Coarse => "coarse",
            ForwardModel::FoldyLax => "foldylax",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "fine" => Some(ForwardModel::Fine),
            "coarse" => Some(ForwardModel::Coarse),
            "foldylax" | "foldy-lax" => Some(ForwardModel::FoldyLax),
            _ => None,
        }
    }
}

/// Per-node contrast coefficients.
#[derive(Debug, Clone, Copy)]
struct NodeContrast {
    permittivity: f64,
    tensor: PolarizationTensor,
}

impl NodeContrast {
    fn new(medium: &HalfSpaceMedium, material: &InclusionMaterial) -> Self {
        Self {
            permittivity: material.permittivity_contrast(medium),
            tensor: PolarizationTensor::new(medium, material),
        }
    }

    fn is_zero(&self) -> bool {
        self.permittivity == 0.0 && self.tensor.is_zero()
    }
}

fn check_inputs(inclusions: &[Inclusion], medium: &HalfSpaceMedium, dirs: &DirectionSet) -> Result<()> {
    medium.check()?;
    if dirs.n_plus == 0 {
        return Err(Error::Config("no propagating incidence direction".into()));
    }
    for inc in inclusions {
        inc.material.check()?;
        inc.curve.check()?;
    }
    Ok(())
}

/// Add `scale * sum_s coeff_s (a o p_s)(a o p_s)^T` for one node.
fn accumulate_node(
    k: &mut CMatrix,
    table: &IncidenceTable,
    node: &CurveSample,
    contrast: &NodeContrast,
    scale: Complex64,
) {
    let waves = table.plane_waves(node.point);
    if contrast.permittivity != 0.0 {
        k.ger(scale * contrast.permittivity, &waves, &waves, Complex64::new(1.0, 0.0));
    }
    for (axis, coeff) in [
        (node.tangent, contrast.tensor.lambda_tau),
        (node.normal, contrast.tensor.lambda_n),
    ] {
        if coeff == 0.0 {
            continue;
        }
        let projected = CVector::from_iterator(
            waves.len(),
            waves
                .iter()
                .zip(&table.directions)
                .map(|(w, v)| w * v.dot(&axis)),
        );
        k.ger(scale * coeff, &projected, &projected, Complex64::new(1.0, 0.0));
    }
}

/// Asymptotic MSR matrix with the curve integral evaluated by a midpoint
/// rule of node spacing `quad_spacing`.
pub fn assemble_msr_fine(
    inclusions: &[Inclusion],
    medium: &HalfSpaceMedium,
    ctx: &FrequencyContext,
    dirs: &DirectionSet,
    quad_spacing: f64,
) -> Result<CMatrix> {
    check_inputs(inclusions, medium, dirs)?;
    let table = IncidenceTable::new(ctx, medium, dirs)?;
    let n = table.len();
    let mut k = CMatrix::zeros(n, n);
    for inc in inclusions {
        let contrast = NodeContrast::new(medium, &inc.material);
        if contrast.is_zero() {
            continue;
        }
        let c = amplitude_constant(ctx, medium, inc.curve.thickness);
        for node in inc.curve.sample(quad_spacing)? {
            accumulate_node(&mut k, &table, &node, &contrast, c * node.weight);
        }
    }
    Ok(k)
}

/// `K = D E D^T` for the half-wavelength segment model.
#[derive(Debug, Clone)]
pub struct FactoredMsr {
    /// `N+ x 3M`: `M` permittivity columns, then `2M` permeability columns
    /// ordered (tangent, normal) per segment.
    pub d: CMatrix,
    /// Diagonal of `E`, including the factor `C |sigma| / M`.
    pub e: CVector,
    pub segments: usize,
}

impl FactoredMsr {
    pub fn e_matrix(&self) -> CMatrix {
        CMatrix::from_diagonal(&self.e)
    }

    pub fn product(&self) -> CMatrix {
        let mut de = self.d.clone();
        for (mut col, e) in de.column_iter_mut().zip(self.e.iter()) {
            col *= *e;
        }
        &de * self.d.transpose()
    }
}

pub fn assemble_msr_factored(
    inclusions: &[Inclusion],
    medium: &HalfSpaceMedium,
    ctx: &FrequencyContext,
    dirs: &DirectionSet,
) -> Result<FactoredMsr> {
    check_inputs(inclusions, medium, dirs)?;
    let table = IncidenceTable::new(ctx, medium, dirs)?;
    let mut nodes = Vec::new();
    for inc in inclusions {
        let contrast = NodeContrast::new(medium, &inc.material);
        let c = amplitude_constant(ctx, medium, inc.curve.thickness);
        for node in inc.curve.segments(ctx.lambda_minus)? {
            nodes.push((node, contrast, c * node.weight));
        }
    }
    let m = nodes.len();
    let n = table.len();
    let mut d = CMatrix::zeros(n, 3 * m);
    let mut e = CVector::zeros(3 * m);
    for (idx, (node, contrast, scale)) in nodes.iter().enumerate() {
        let waves = table.plane_waves(node.point);
        d.set_column(idx, &waves);
        e[idx] = scale * contrast.permittivity;
        for (s, (axis, coeff)) in [
            (node.tangent, contrast.tensor.lambda_tau),
            (node.normal, contrast.tensor.lambda_n),
        ]
        .into_iter()
        .enumerate()
        {
            let col = m + 2 * idx + s;
            for j in 0..n {
                d[(j, col)] = waves[j] * table.directions[j].dot(&axis);
            }
            e[col] = scale * coeff;
        }
    }
    Ok(FactoredMsr { d, e, segments: m })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FoldyLaxOptions {
    /// When false the pairwise propagator is dropped and the model reduces
    /// to the fine single-scattering matrix.
    pub coupling: bool,
}

impl Default for FoldyLaxOptions {
    fn default() -> Self {
        Self { coupling: true }
    }
}

/// Channels of a scattering node: a monopole driven by the field and two
/// dipoles driven by the normalized gradient along `tau` and `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Channel {
    Field,
    Tangent,
    Normal,
}

struct Unknown {
    node: usize,
    channel: Channel,
    /// `k-^2 h w` times the contrast coefficient of the channel.
    strength: f64,
}

struct ScatterNode {
    point: Vec2,
    tangent: Vec2,
    normal: Vec2,
}

impl ScatterNode {
    fn axis(&self, channel: Channel) -> Option<Vec2> {
        match channel {
            Channel::Field => None,
            Channel::Tangent => Some(self.tangent),
            Channel::Normal => Some(self.normal),
        }
    }
}

/// Response at `x` (channel `recv` of the receiving node) to a unit emission
/// from `src` through the kernel `(i/4) H0(k |x - x'|)`. Dipoles radiate
/// `p . grad_{x'} G / (i k)` and gradients are normalized by `i k`.
fn propagator(k: f64, recv: (&ScatterNode, Channel), src: (&ScatterNode, Channel)) -> Complex64 {
    let diff = recv.0.point - src.0.point;
    let r = diff.norm();
    let rhat = diff / r;
    let kr = k * r;
    let h0 = hankel1_0(kr);
    let h1 = hankel1_1(kr);
    let quarter_i = 0.25 * I;
    let ik = I * k;
    match (recv.0.axis(recv.1), src.0.axis(src.1)) {
        (None, None) => quarter_i * h0,
        // grad_x G = -(i/4) k H1 rhat; grad_{x'} G = +(i/4) k H1 rhat
        (None, Some(p)) => quarter_i * k * h1 * rhat.dot(&p) / ik,
        (Some(a), None) => -quarter_i * k * h1 * rhat.dot(&a) / ik,
        (Some(a), Some(p)) => {
            // grad_x grad_{x'}^T G = (i/4) k [k H1' rr^T + (H1 / r)(I - rr^T)]
            let h1_prime = h0 - h1 / kr;
            let rr: Matrix2<f64> = rhat * rhat.transpose();
            let a_rr_p = a.dot(&(rr * p));
            let a_perp_p = a.dot(&p) - a_rr_p;
            quarter_i * k * (k * h1_prime * a_rr_p + h1 / r * a_perp_p) / (ik * ik)
        }
    }
}

/// Point scatterers at the fine quadrature nodes with multiple scattering
/// resolved by `(I - G S) f = f_inc` for every incidence.
pub fn assemble_msr_foldylax(
    inclusions: &[Inclusion],
    medium: &HalfSpaceMedium,
    ctx: &FrequencyContext,
    dirs: &DirectionSet,
    quad_spacing: f64,
    options: FoldyLaxOptions,
) -> Result<CMatrix> {
    check_inputs(inclusions, medium, dirs)?;
    let table = IncidenceTable::new(ctx, medium, dirs)?;
    let k = ctx.k_minus;
    let mut nodes = Vec::new();
    let mut unknowns = Vec::new();
    for inc in inclusions {
        let contrast = NodeContrast::new(medium, &inc.material);
        if contrast.is_zero() {
            continue;
        }
        for sample in inc.curve.sample(quad_spacing)? {
            let beta = k * k * inc.curve.thickness * sample.weight;
            let node = nodes.len();
            for (channel, coeff) in [
                (Channel::Field, contrast.permittivity),
                (Channel::Tangent, contrast.tensor.lambda_tau),
                (Channel::Normal, contrast.tensor.lambda_n),
            ] {
                if coeff != 0.0 {
                    unknowns.push(Unknown {
                        node,
                        channel,
                        strength: beta * coeff,
                    });
                }
            }
            nodes.push(ScatterNode {
                point: sample.point,
                tangent: sample.tangent,
                normal: sample.normal,
            });
        }
    }
    let n = table.len();
    if unknowns.is_empty() {
        return Ok(CMatrix::zeros(n, n));
    }
    let size = unknowns.len();

    // Incident field and normalized gradient at every unknown.
    let waves: Vec<CVector> = nodes.iter().map(|nd| table.plane_waves(nd.point)).collect();
    let mut rhs = CMatrix::zeros(size, n);
    for (row, u) in unknowns.iter().enumerate() {
        let node = &nodes[u.node];
        for l in 0..n {
            let proj = node.axis(u.channel).map_or(1.0, |a| table.directions[l].dot(&a));
            rhs[(row, l)] = waves[u.node][l] * proj;
        }
    }

    let fields = if options.coupling && nodes.len() > 1 {
        let mut system = CMatrix::identity(size, size);
        for (row, ur) in unknowns.iter().enumerate() {
            for (col, uc) in unknowns.iter().enumerate() {
                if ur.node == uc.node {
                    continue;
                }
                let g = propagator(
                    k,
                    (&nodes[ur.node], ur.channel),
                    (&nodes[uc.node], uc.channel),
                );
                system[(row, col)] -= g * uc.strength;
            }
        }
        let lu = system.lu();
        let diag = lu.u().diagonal();
        let (min, max) = diag.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), d| {
            (lo.min(d.norm()), hi.max(d.norm()))
        });
        let condition = if min > 0.0 { max / min } else { f64::INFINITY };
        if !condition.is_finite() || condition > 1e13 {
            return Err(Error::Resonance { condition });
        }
        lu.solve(&rhs).ok_or(Error::Resonance { condition })?
    } else {
        rhs
    };

    // Far field: K_jl = F sum_m T_j e^{i k v_j.x_m} [a0 + p . v_j].
    let ff = far_field_factor(ctx, medium);
    let mut out = CMatrix::zeros(n, n);
    for (row, u) in unknowns.iter().enumerate() {
        let node = &nodes[u.node];
        for j in 0..n {
            let proj = node.axis(u.channel).map_or(1.0, |a| table.directions[j].dot(&a));
            let recv = ff * waves[u.node][j] * proj * u.strength;
            for l in 0..n {
                out[(j, l)] += recv * fields[(row, l)];
            }
        }
    }
    Ok(out)
}

/// Largest `|K - K^T|` relative to the largest entry.
pub fn symmetry_defect(k: &CMatrix) -> f64 {
    let scale = k.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    let mut worst = 0.0f64;
    for j in 0..k.nrows() {
        for l in 0..j {
            worst = worst.max((k[(j, l)] - k[(l, j)]).norm());
        }
    }
    worst / scale
}
