use halfspace_imaging::dataset::MsrDataset;
use halfspace_imaging::forward::{
    assemble_msr_factored, assemble_msr_fine, build_directions, CMatrix, ForwardModel, Inclusion,
};
use halfspace_imaging::imaging::{
    image_multi, image_single, make_grid, steering_vector, truncate_svd, FrequencyImager, Rect,
    SteeringConfig,
};
use halfspace_imaging::media::{HalfSpaceMedium, InclusionMaterial};
use halfspace_imaging::{ParametricCurve, Vec2};
use num_complex::Complex64;
use std::f64::consts::PI;

fn sample_k() -> (HalfSpaceMedium, f64, CMatrix, halfspace_imaging::DirectionSet) {
    let medium = HalfSpaceMedium::new(5.0, 1.0, 4.0, 1.0).unwrap();
    let omega = 2.0 * PI / 0.3;
    let ctx = medium.frequency_context(omega).unwrap();
    let dirs = build_directions(24, PI / 4.0, 3.0 * PI / 4.0, &ctx).unwrap();
    let inc = [Inclusion {
        curve: ParametricCurve::sigma1(0.015),
        material: InclusionMaterial::new(5.0, 2.0).unwrap(),
    }];
    let k = assemble_msr_fine(&inc, &medium, &ctx, &dirs, ctx.lambda_minus / 20.0).unwrap();
    (medium, omega, k, dirs)
}

#[test]
fn singular_values_agree_with_eigenvalues_of_gram() {
    let (_, _, k, _) = sample_k();
    let svd = truncate_svd(&k, 0.01).unwrap();
    let gram = k.adjoint() * &k;
    let mut eig: Vec<f64> = gram.symmetric_eigen().eigenvalues.iter().copied().collect();
    eig.sort_by(|a, b| b.total_cmp(a));
    let top = svd.singular_values[0];
    for (s, e) in svd.singular_values.iter().zip(&eig) {
        assert!((s * s - e.max(0.0)).abs() <= 1e-10 * top * top, "{s} {e}");
    }
    // sorted, and K is rebuilt from the full decomposition
    assert!(svd.singular_values.windows(2).all(|w| w[0] >= w[1]));
    let full = truncate_svd(&k, 1e-15).unwrap();
    assert!((full.reconstruct() - &k).norm() <= 1e-10 * k.norm());
}

#[test]
fn steering_shift_is_a_phase_ramp() {
    let (medium, omega, _, dirs) = sample_k();
    let ctx = medium.frequency_context(omega).unwrap();
    let cfg = SteeringConfig::new(1.0, 0.3, -0.2).unwrap();
    let x = Vec2::new(0.1, -1.8);
    let delta = Vec2::new(0.07, -0.03);
    let d0 = steering_vector(x, &ctx, &medium, &dirs, &cfg).unwrap();
    let d1 = steering_vector(x + delta, &ctx, &medium, &dirs, &cfg).unwrap();
    let table = halfspace_imaging::forward::IncidenceTable::new(&ctx, &medium, &dirs).unwrap();
    for j in 0..d0.len() {
        let ramp = Complex64::from_polar(1.0, ctx.k_minus * table.directions[j].dot(&delta));
        assert!((d1[j] - d0[j] * ramp).norm() < 1e-13);
    }
    assert!((d0.norm() - 1.0).abs() < 1e-14);
}

#[test]
fn matched_media_steering_is_a_free_space_plane_wave() {
    let medium = HalfSpaceMedium::new(2.0, 1.0, 2.0, 1.0).unwrap();
    let ctx = medium.frequency_context(9.0).unwrap();
    let dirs = build_directions(10, PI / 6.0, 5.0 * PI / 6.0, &ctx).unwrap();
    let x = Vec2::new(0.3, -1.2);
    let d = steering_vector(x, &ctx, &medium, &dirs, &SteeringConfig::new(1.0, 0.0, 0.0).unwrap()).unwrap();
    let n = dirs.count as f64;
    for (j, theta) in dirs.incidences.iter().enumerate() {
        let expected = Complex64::from_polar(1.0 / n.sqrt(), ctx.k_minus * theta.dot(&x));
        assert!((d[j] - expected).norm() < 1e-13);
    }
}

#[test]
fn point_targets_peak_at_one_on_their_nodes() {
    let medium = HalfSpaceMedium::new(1.0, 1.0, 1.0, 1.0).unwrap();
    let omega = 2.0 * PI / 0.2;
    let ctx = medium.frequency_context(omega).unwrap();
    let dirs = build_directions(48, PI / 36.0, 35.0 * PI / 36.0, &ctx).unwrap();
    let targets = vec![[-0.4, -1.6], [0.4, -2.4]];
    let inc = [Inclusion {
        curve: ParametricCurve::points("pts", targets.clone(), 0.02, 0.015),
        material: InclusionMaterial::new(3.0, 1.0).unwrap(),
    }];
    let k = assemble_msr_factored(&inc, &medium, &ctx, &dirs).unwrap().product();
    let grid = make_grid(Rect::new(-1.0, 1.0, -3.0, -1.0), 0.04).unwrap();
    let cfg = SteeringConfig::new(1.0, 0.0, 0.0).unwrap();
    let map = image_single(&k, &ctx, &medium, &dirs, &cfg, &grid, 0.01).unwrap();
    assert_eq!(map.retained, vec![2]);
    let (_, peak) = map.max();
    assert!((peak - 1.0).abs() < 1e-9, "{peak}");
    let p = map.argmax_point();
    assert!(targets.iter().any(|t| (p - Vec2::new(t[0], t[1])).norm() < 1e-9));
    // W is the squared projection norm of a unit vector for a symmetric K
    assert!(map.values.iter().all(|&w| (-1e-12..=1.0 + 1e-9).contains(&w)));
}

fn dataset(frequencies: Vec<f64>, scale: f64) -> MsrDataset {
    let medium = HalfSpaceMedium::new(1.0, 1.0, 3.0, 1.0).unwrap();
    let materials = vec![InclusionMaterial::new(5.0, 1.0).unwrap()];
    let ctx = medium.frequency_context(frequencies[0]).unwrap();
    let directions = build_directions(16, PI / 4.0, 3.0 * PI / 4.0, &ctx).unwrap();
    let inc = [Inclusion { curve: ParametricCurve::sigma1(0.015), material: materials[0] }];
    let matrices = frequencies
        .iter()
        .map(|&w| {
            let ctx = medium.frequency_context(w).unwrap();
            assemble_msr_fine(&inc, &medium, &ctx, &directions, 0.01).unwrap() * Complex64::new(scale, 0.0)
        })
        .collect();
    MsrDataset {
        frequencies,
        matrices,
        directions,
        model: ForwardModel::Fine,
        noise: None,
        medium,
        materials,
        tabulated_n_plus: None,
    }
}

#[test]
fn one_frequency_dataset_reduces_to_single_map() {
    let ds = dataset(vec![14.0], 1.0);
    let grid = make_grid(Rect::new(-1.0, 1.0, -3.0, -1.0), 0.1).unwrap();
    let cfg = SteeringConfig::new(1.0, 0.0, 0.0).unwrap();
    let multi = image_multi(&ds, &cfg, &grid, 0.01).unwrap();
    let ctx = ds.medium.frequency_context(14.0).unwrap();
    let single = image_single(&ds.matrices[0], &ctx, &ds.medium, &ds.directions, &cfg, &grid, 0.01).unwrap();
    assert_eq!(multi.values, single.values);
}

#[test]
fn map_ignores_frequency_order_and_data_scale() {
    let grid = make_grid(Rect::new(-1.0, 1.0, -3.0, -1.0), 0.1).unwrap();
    let cfg = SteeringConfig::new(1.0, 0.0, 0.0).unwrap();
    let a = image_multi(&dataset(vec![10.0, 14.0, 18.0], 1.0), &cfg, &grid, 0.01).unwrap();
    let b = image_multi(&dataset(vec![18.0, 10.0, 14.0], 1e5), &cfg, &grid, 0.01).unwrap();
    for (x, y) in a.values.iter().zip(&b.values) {
        assert!((x - y).abs() < 1e-10);
    }
}

#[test]
fn imager_score_is_projection_of_steering_vector() {
    let (medium, omega, k, dirs) = sample_k();
    let ctx = medium.frequency_context(omega).unwrap();
    let cfg = SteeringConfig::new(1.0, 0.0, 0.0).unwrap();
    let imager = FrequencyImager::new(&k, &ctx, &medium, &dirs, &cfg, 0.01).unwrap();
    let x = Vec2::new(-0.2, -1.55);
    let d = steering_vector(x, &ctx, &medium, &dirs, &cfg).unwrap();
    let u = imager.svd.left.clone();
    let expected: f64 = (0..imager.svd.retained)
        .map(|m| {
            let du = d.dotc(&u.column(m)).norm();
            let dv = d.dotc(&imager.svd.right.column(m).map(|z| z.conj())).norm();
            du * dv
        })
        .sum();
    assert!((imager.evaluate(x).unwrap() - expected).abs() < 1e-12);
}
