use proptest::prelude::*;
use slicealign::metrics::{max_sw2_squared, mc_sw2_squared, rfsw2_squared, sw2_squared};
use slicealign::{Image, Metric, MetricKind, NoiseSpec, NufftConfig, Shift2D, ShiftMode};

const SIZE: usize = 12;

fn image() -> impl Strategy<Value = Image> {
    prop::collection::vec(0.0f64..1.0, SIZE * SIZE).prop_filter_map("zero mass", |v| {
        Image::new(SIZE, v).ok()?.normalize_to_probability(false).ok()
    })
}

fn cfg() -> NufftConfig {
    NufftConfig::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn transport_metrics_are_nonnegative_symmetric_and_vanish_on_the_diagonal(f in image(), g in image()) {
        for kind in [MetricKind::Euclidean, MetricKind::Sw2, MetricKind::Rfsw2, MetricKind::MaxSw2, MetricKind::McSw2] {
            let m = Metric::new(kind, 10);
            let fg = m.squared(&f, &g).unwrap();
            let gf = m.squared(&g, &f).unwrap();
            prop_assert!(fg >= 0.0);
            prop_assert!((fg - gf).abs() <= 1e-9 * fg.max(1e-12), "{:?}: {} vs {}", kind, fg, gf);
            prop_assert!(m.squared(&f, &f).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn max_slice_dominates_the_mean(f in image(), g in image()) {
        let mean = sw2_squared(&f, &g, 9, cfg()).unwrap();
        let max = max_sw2_squared(&f, &g, 9, cfg()).unwrap();
        prop_assert!(max >= mean * (1.0 - 1e-12));
    }

    #[test]
    fn sliced_distance_obeys_the_triangle_inequality(f in image(), g in image(), h in image()) {
        let d = |a: &Image, b: &Image| sw2_squared(a, b, 8, cfg()).unwrap().sqrt();
        prop_assert!(d(&f, &h) <= d(&f, &g) + d(&g, &h) + 1e-9);
    }

    #[test]
    fn sliced_distances_do_not_depend_on_input_scale(f in image(), g in image(), a in 0.1f64..10.0) {
        let fa = f.combine(a, &f, 0.0).unwrap().normalize_to_probability(false).unwrap();
        let base = rfsw2_squared(&f, &g, 8, cfg()).unwrap();
        let scaled = rfsw2_squared(&fa, &g, 8, cfg()).unwrap();
        prop_assert!((base - scaled).abs() <= 1e-9 * base.max(1e-12));
    }

    #[test]
    fn monte_carlo_slices_are_reproducible(f in image(), g in image(), seed in 0u64..1000) {
        let a = mc_sw2_squared(&f, &g, 6, seed, cfg()).unwrap();
        let b = mc_sw2_squared(&f, &g, 6, seed, cfg()).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn integer_shift_preserves_mass_inside_the_frame(f in image(), dx in -2i32..=2, dy in -2i32..=2) {
        let g = f.apply_shift(Shift2D::from_pixels(dx as f64, dy as f64, SIZE), ShiftMode::Integer).unwrap();
        prop_assert!(g.sum() <= 1.0 + 1e-12);
        prop_assert!(g.data().iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn noise_is_a_function_of_the_seed(f in image(), seed in 0u64..1000, snr in 0.1f64..100.0) {
        let spec = NoiseSpec::new(snr, seed).unwrap();
        prop_assert_eq!(f.add_gaussian_noise(spec).into_data(), f.add_gaussian_noise(spec).into_data());
    }
}

#[test]
fn translation_costs_half_the_squared_shift() {
    let size = 48;
    let f = slicealign::image::gaussian_blob(size, Shift2D::default(), 0.1).unwrap();
    let s = Shift2D::from_pixels(5.0, 0.0, size);
    let g = f.apply_shift(s, ShiftMode::Integer).unwrap().normalize_to_probability(true).unwrap();
    let v = sw2_squared(&f, &g, size, cfg()).unwrap();
    let expected = s.norm().powi(2) / 2.0;
    assert!((v / expected - 1.0).abs() < 0.02, "{v} vs {expected}");
}
