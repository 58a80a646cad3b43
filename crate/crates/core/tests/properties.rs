use num_complex::Complex64;
use proptest::prelude::*;
use qmc_quality::discrepancy::{l2_star_discrepancy, star_discrepancy_exact};
use qmc_quality::dispersion::dispersion;
use qmc_quality::greedy::{ia_run, DiscretizedSpace};
use qmc_quality::pointgen::{read_points, write_points};
use qmc_quality::universal::{marcinkiewicz_l2_bounds, pi_n, sup_norm_estimate, TrigPoly};
use qmc_quality::PointSet;

fn cloud(d: usize, max: usize) -> impl Strategy<Value = PointSet> {
    prop::collection::vec(prop::collection::vec(0.0..1.0f64, d), 1..max)
        .prop_map(move |pts| PointSet::new(d, pts, "prop").unwrap())
}

/// Largest gap between consecutive coordinates on one axis, walls included.
fn max_axis_gap(set: &PointSet, j: usize) -> f64 {
    let mut xs = set.axis(j);
    xs.push(0.0);
    xs.push(1.0);
    xs.sort_by(f64::total_cmp);
    xs.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn dispersion_witness_is_empty_and_matches(set in cloud(2, 40)) {
        let r = dispersion(&set).unwrap();
        prop_assert!((r.witness.volume() - r.value).abs() < 1e-12);
        prop_assert!(set.iter().all(|p| !r.witness.contains_interior(p)));
        prop_assert!(r.value <= 1.0);
    }

    #[test]
    fn dispersion_at_least_widest_slab(set in cloud(3, 25)) {
        let r = dispersion(&set).unwrap();
        for j in 0..3 {
            prop_assert!(r.value >= max_axis_gap(&set, j) - 1e-12);
        }
    }

    #[test]
    fn dispersion_ignores_order_and_axis_labels(set in cloud(3, 20)) {
        let base = dispersion(&set).unwrap().value;
        let swapped = dispersion(&set.permute_axes(&[2, 0, 1]).unwrap()).unwrap().value;
        let mut pts: Vec<Vec<f64>> = set.iter().map(|p| p.to_vec()).collect();
        pts.reverse();
        let reordered = dispersion(&PointSet::new(3, pts, "rev").unwrap()).unwrap().value;
        prop_assert!((base - swapped).abs() < 1e-12);
        prop_assert!((base - reordered).abs() < 1e-12);
    }

    #[test]
    fn dispersion_does_not_grow_with_points(set in cloud(2, 30), extra in prop::collection::vec(0.0..1.0f64, 2)) {
        let before = dispersion(&set).unwrap().value;
        let after = dispersion(&set.with_point(&extra).unwrap()).unwrap().value;
        prop_assert!(after <= before + 1e-12);
    }

    #[test]
    fn star_discrepancy_bounds(set in cloud(2, 40)) {
        let star = star_discrepancy_exact(&set).unwrap().value;
        // Slabs [0,x) x [0,1] are anchored boxes, so the one-dimensional bound carries over.
        prop_assert!(star >= 0.5 / set.len() as f64 - 1e-12);
        prop_assert!(star <= 1.0);
        prop_assert!(l2_star_discrepancy(&set).unwrap() <= star + 1e-12);
    }

    #[test]
    fn points_file_roundtrip(set in cloud(3, 30)) {
        let mut buf = Vec::new();
        write_points(&set, &mut buf).unwrap();
        let back = read_points(buf.as_slice()).unwrap();
        prop_assert_eq!(back.coords(), set.coords());
        prop_assert_eq!(back.provenance(), set.provenance());
    }

    #[test]
    fn gram_spectrum_brackets_one(set in cloud(2, 60), n in 1usize..4) {
        let (lo, hi) = marcinkiewicz_l2_bounds(&pi_n(n, 2).unwrap(), &set).unwrap();
        prop_assert!(lo <= 1.0 + 1e-9 && hi >= 1.0 - 1e-9);
        prop_assert!(lo >= -1e-9);
    }

    #[test]
    fn sup_norm_between_l2_and_l1(coeffs in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 9)) {
        let freqs = pi_n(2, 2).unwrap();
        let coeffs: Vec<Complex64> = coeffs.into_iter().map(|(a, b)| Complex64::new(a, b)).collect();
        let l2 = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let l1: f64 = coeffs.iter().map(|c| c.norm()).sum();
        let f = TrigPoly::new(freqs, coeffs).unwrap();
        let est = sup_norm_estimate(&f, 4).unwrap();
        prop_assert!(est >= l2 - 1e-9 && est <= l1 + 1e-9);
    }

    #[test]
    fn greedy_residuals_stay_in_hull(weights in prop::collection::vec(0.01..1.0f64, 4), m in 1usize..12) {
        let space = DiscretizedSpace::tensor_grid(1, 16, 2.0).unwrap();
        let dictionary: Vec<Vec<f64>> = (0..4)
            .map(|k| space.sample(move |x| (std::f64::consts::TAU * (k as f64 + 1.0) * x[0]).cos() / 2.0))
            .collect();
        let total: f64 = weights.iter().sum();
        let target: Vec<f64> = (0..space.len())
            .map(|i| dictionary.iter().zip(&weights).map(|(g, w)| g[i] * w / total).sum())
            .collect();
        let trace = ia_run(&target, &dictionary, &space, m, 1.0).unwrap();
        prop_assert_eq!(trace.steps.len(), m);
        prop_assert!(trace.indices().iter().all(|&i| i < 4));
        prop_assert!(trace.residuals().iter().all(|r| r.is_finite() && *r >= 0.0));
    }
}
