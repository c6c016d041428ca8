//! Property-based tests: geometric invariants that must hold for whole
//! families of inputs, not just the worked examples.

use std::sync::OnceLock;

use proptest::prelude::*;

use potential_centers::body::Body;
use potential_centers::unfolded::{unfolded_region, UnfoldedRegion};

/// Random convex polygon: radii at sorted angles around the origin.
fn convex_polygon() -> impl Strategy<Value = Vec<[f64; 2]>> {
    proptest::collection::vec(0.5f64..2.0, 5..10).prop_map(|radii| {
        let n = radii.len();
        // points on a star at equal angles with convex hull taken by
        // construction: use equal angles and radii in [0.5, 2], then the
        // polygon is star-shaped; convexity is not needed for validity
        (0..n)
            .map(|i| {
                let a = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                [radii[i] * a.cos(), radii[i] * a.sin()]
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ball_signed_distance_is_exact(x in -3.0f64..3.0, y in -3.0f64..3.0, r in 0.5f64..2.0) {
        let b = Body::ball(2, vec![0.0, 0.0], r).unwrap();
        let d = b.signed_distance(&[x, y]);
        let want = r - (x * x + y * y).sqrt();
        prop_assert!((d - want).abs() < 1e-12, "sdf {d} vs {want}");
    }

    #[test]
    fn contains_iff_signed_distance_nonnegative(x in -3.0f64..3.0, y in -3.0f64..3.0) {
        let b = Body::annulus(2, vec![0.0, 0.0], 1.0, 2.5).unwrap();
        let p = [x, y];
        prop_assert_eq!(b.contains(&p), b.signed_distance(&p) >= 0.0);
    }

    #[test]
    fn inner_parallel_bodies_are_nested(
        x in -1.0f64..1.0,
        y in -1.0f64..1.0,
        rho1 in 0.0f64..0.5,
        extra in 0.0f64..0.5,
    ) {
        let b = Body::ball(2, vec![0.0, 0.0], 1.0).unwrap();
        let rho2 = rho1 + extra;
        let p = [x, y];
        if b.inner_parallel_contains(rho2, &p).unwrap() {
            prop_assert!(b.inner_parallel_contains(rho1, &p).unwrap());
        }
    }

    #[test]
    fn negative_parallel_radius_is_rejected(rho in -2.0f64..-1e-9) {
        let b = Body::ball(2, vec![0.0, 0.0], 1.0).unwrap();
        prop_assert!(b.inner_parallel_contains(rho, &[0.0, 0.0]).is_err());
    }
}

proptest! {
    // polygon construction re-validates the cone on every case, so keep
    // the case count small
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn polygon_inradius_at_most_half_diameter(vertices in convex_polygon()) {
        let b = Body::polygon(vertices).unwrap();
        prop_assert!(b.inradius() <= 0.5 * b.diameter() + 1e-9);
        prop_assert!(b.inradius() > 0.0);
    }

    #[test]
    fn voxelization_tracks_the_analytic_distance(x in -1.0f64..1.0, y in -1.0f64..1.0) {
        // inside the grid's bounding box the distance transform is exact
        // up to cell quantization; outside it the extension is only an
        // estimate, so sample within
        let b = Body::ball(2, vec![0.0, 0.0], 1.0).unwrap();
        let grid = b.rasterize(96).unwrap();
        // the grid pads the bbox by two cells, so cells are slightly
        // larger than (bbox width) / resolution
        let cell = 2.1 / 96.0;
        let got = grid.signed_distance(&[x, y]);
        let want = 1.0 - (x * x + y * y).sqrt();
        prop_assert!(
            (got - want).abs() <= 2.0 * cell,
            "voxel sdf {got} vs analytic {want} (cell {cell})"
        );
    }
}

fn triangle_regions() -> &'static (Body, UnfoldedRegion, UnfoldedRegion) {
    static CACHE: OnceLock<(Body, UnfoldedRegion, UnfoldedRegion)> = OnceLock::new();
    CACHE.get_or_init(|| {
        let b = Body::polygon(vec![[0.0, 0.0], [4.0, 0.0], [1.0, 1.0]]).unwrap();
        let coarse = unfolded_region(&b, 16).unwrap();
        let fine = unfolded_region(&b, 64).unwrap();
        (b, coarse, fine)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn direction_refinement_only_shrinks_the_unfolded_region(
        x in 0.0f64..4.0,
        y in 0.0f64..1.0,
    ) {
        let (_, coarse, fine) = triangle_regions();
        // the fine region intersects more halfspaces, so membership in
        // the fine region implies membership in the coarse one
        if fine.contains(&[x, y], 0.0) {
            prop_assert!(coarse.contains(&[x, y], 0.0));
        }
    }
}
