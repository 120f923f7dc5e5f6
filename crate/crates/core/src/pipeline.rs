//! Scenario-level driver: synthesize datasets, image them, score the maps.

use crate::dataset::{MsrDataset, NoiseRecord};
use crate::error::{Error, Result};
use crate::forward::{
    assemble_msr_factored, assemble_msr_fine, assemble_msr_foldylax, build_directions, CMatrix,
    FoldyLaxOptions, ForwardModel,
};
use crate::imaging::{
    combined_contrast, dataset_imagers, default_steering, evaluate_stack, make_grid,
    FrequencyStack, ImageMap, SearchGrid, SteeringConfig,
};
use crate::media::{HalfSpaceMedium, InclusionMaterial};
use crate::metrics::{peak_metrics, PeakMetrics};
use crate::noise::{add_noise, frequency_seed};
use crate::scenario::{Scenario, Severity};
use rayon::prelude::*;
use std::f64::consts::PI;

/// Forward matrices for every frequency of the scenario, noise included.
pub fn synthesize(s: &Scenario) -> Result<MsrDataset> {
    let errors: Vec<String> = s
        .validate()
        .into_iter()
        .filter(|d| d.severity == Severity::Error)
        .map(|d| d.to_string())
        .collect();
    if !errors.is_empty() {
        return Err(Error::Invalid(errors.join("\n")));
    }
    let frequencies = s.frequency_list();
    let inclusions = s.inclusions();
    let medium = s.medium;
    // xi does not depend on omega, so one direction set serves every frequency
    let directions = build_directions(
        s.directions.count,
        s.directions.alpha,
        s.directions.beta,
        &medium.frequency_context(frequencies[0])?,
    )?;
    let matrices = frequencies
        .par_iter()
        .enumerate()
        .map(|(f, &omega)| {
            let ctx = medium.frequency_context(omega)?;
            let spacing = s.forward.quad_fraction * ctx.lambda_minus;
            let clean = match s.forward.model {
                ForwardModel::Fine => assemble_msr_fine(&inclusions, &medium, &ctx, &directions, spacing)?,
                ForwardModel::Coarse => assemble_msr_factored(&inclusions, &medium, &ctx, &directions)?.product(),
                ForwardModel::FoldyLax => assemble_msr_foldylax(
                    &inclusions,
                    &medium,
                    &ctx,
                    &directions,
                    spacing,
                    FoldyLaxOptions { coupling: s.forward.coupling },
                )?,
            };
            match s.noise.snr_db {
                Some(snr) => add_noise(&clean, snr, frequency_seed(s.noise.seed, f)),
                None => Ok(clean),
            }
            .map_err(|e| e.at_frequency(f))
        })
        .collect::<Result<Vec<CMatrix>>>()?;
    Ok(MsrDataset {
        frequencies,
        matrices,
        directions,
        model: s.forward.model,
        noise: s.noise.snr_db.map(|snr_db| NoiseRecord { snr_db, seed: s.noise.seed }),
        medium,
        materials: s.materials(),
        tabulated_n_plus: s.directions.tabulated_n_plus,
    })
}

/// The explicit choice when given, else the default for the contrast class.
pub fn resolve_steering(
    explicit: Option<SteeringConfig>,
    medium: &HalfSpaceMedium,
    materials: &[InclusionMaterial],
) -> SteeringConfig {
    explicit.unwrap_or_else(|| default_steering(combined_contrast(medium, materials)))
}

/// Imaging output: per-frequency maps, their average, and the spectra.
#[derive(Debug, Clone)]
pub struct ImageRun {
    pub stack: FrequencyStack,
    pub map: ImageMap,
    pub steering: SteeringConfig,
    pub singular_values: Vec<Vec<f64>>,
}

impl ImageRun {
    pub fn retained(&self) -> &[usize] {
        &self.map.retained
    }
}

pub fn image_dataset(
    dataset: &MsrDataset,
    steering: SteeringConfig,
    grid: &SearchGrid,
    threshold: f64,
) -> Result<ImageRun> {
    let imagers = dataset_imagers(dataset, &steering, threshold)?;
    if imagers.iter().all(|im| im.svd.retained == 0) {
        return Err(Error::NoSignalSubspace);
    }
    let stack = evaluate_stack(&imagers, grid)?;
    Ok(ImageRun {
        map: stack.combined(),
        stack,
        steering,
        singular_values: imagers.into_iter().map(|im| im.svd.singular_values).collect(),
    })
}

/// Lower-medium wavelength at the lowest frequency, the default tube width.
pub fn longest_wavelength(medium: &HalfSpaceMedium, frequencies: &[f64]) -> f64 {
    let omega = frequencies.iter().copied().fold(f64::INFINITY, f64::min);
    2.0 * PI / (omega * (medium.eps_minus * medium.mu_minus).sqrt())
}

/// Image a scenario's dataset with its own imaging settings.
pub fn image_scenario(s: &Scenario, dataset: &MsrDataset) -> Result<ImageRun> {
    let grid = make_grid(s.imaging.domain, s.imaging.grid_step)?;
    let steering = resolve_steering(s.imaging.steering, &s.medium, &s.materials());
    image_dataset(dataset, steering, &grid, s.imaging.svd_threshold)
}

pub fn score(s: &Scenario, map: &ImageMap) -> Result<PeakMetrics> {
    peak_metrics(
        map,
        &s.truth_curves(),
        s.imaging.metric_level,
        longest_wavelength(&s.medium, &s.frequency_list()),
    )
}
