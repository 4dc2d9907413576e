use proptest::prelude::*;
use tmp_core::filtration::clique_complex_of_edges;
use tmp_core::vectorize::{
    betti_vector_fast, entropy_vector, landscape_vector, persistence_image, silhouette_vector, EvaluationGrid,
    ImageBounds, ImageConfig, ImageWeight,
};

fn bar() -> impl Strategy<Value = (f64, f64)> {
    (0.0f64..10.0, 0.0f64..5.0).prop_map(|(b, l)| (b, b + l))
}

fn diagram() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec(bar(), 0..8)
}

fn grid() -> EvaluationGrid {
    EvaluationGrid::new((0..=60).map(|i| i as f64 / 4.0).collect()).unwrap()
}

fn sup(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn bounds() -> ImageBounds {
    ImageBounds {
        birth: (0.0, 10.0),
        persistence: (0.0, 5.0),
    }
}

proptest! {
    #[test]
    fn landscape_is_lipschitz_in_endpoints(
        pd in diagram(),
        shifts in prop::collection::vec((-0.5f64..0.5, -0.5f64..0.5), 8),
        level in 1usize..4,
    ) {
        let moved: Vec<(f64, f64)> = pd
            .iter()
            .zip(&shifts)
            .map(|(&(b, d), &(x, y))| (b + x, (d + y).max(b + x)))
            .collect();
        let eps = pd.iter().zip(&moved).map(|(p, q)| (p.0 - q.0).abs().max((p.1 - q.1).abs())).fold(0.0, f64::max);
        let g = grid();
        let a = landscape_vector(&pd, &g, level).unwrap();
        let b = landscape_vector(&moved, &g, level).unwrap();
        prop_assert!(sup(&a, &b) <= eps + 1e-12);
    }

    #[test]
    fn landscape_levels_are_ordered(pd in diagram()) {
        let g = grid();
        let l1 = landscape_vector(&pd, &g, 1).unwrap();
        let l2 = landscape_vector(&pd, &g, 2).unwrap();
        prop_assert!(l1.iter().zip(&l2).all(|(a, b)| a >= b && *b >= 0.0));
    }

    #[test]
    fn entropy_is_bounded(pd in diagram()) {
        let g = grid();
        let e = entropy_vector(&pd, &g);
        for (value, &t) in e.iter().zip(g.points()) {
            let alive = pd.iter().filter(|&&(b, d)| b <= t && t <= d && d > b).count();
            prop_assert!(*value >= -1e-12);
            prop_assert!(*value <= (alive.max(1) as f64).ln() + 1e-12);
        }
    }

    #[test]
    fn silhouette_of_one_bar_is_its_landscape(b in bar(), power in 0.5f64..3.0) {
        prop_assume!(b.1 > b.0);
        let g = grid();
        let s = silhouette_vector(&[b], &g, power);
        let l = landscape_vector(&[b], &g, 1).unwrap();
        prop_assert!(sup(&s, &l) < 1e-12);
    }

    #[test]
    fn image_mass_is_bounded_and_additive(a in diagram(), b in diagram()) {
        let cfg = ImageConfig::new(8, 12, bounds());
        let ia = persistence_image(&a, &cfg).unwrap();
        let ib = persistence_image(&b, &cfg).unwrap();
        let both: Vec<(f64, f64)> = a.iter().chain(&b).copied().collect();
        let iab = persistence_image(&both, &cfg).unwrap();
        for ((x, y), z) in ia.iter().zip(&ib).zip(&iab) {
            prop_assert!((x + y - z).abs() < 1e-12);
        }
        let total: f64 = a.iter().map(|(b, d)| d - b).sum();
        prop_assert!(ia.iter().sum::<f64>() <= total + 1e-12);
        prop_assert!(ia.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn image_ignores_point_order(mut pd in diagram()) {
        let cfg = ImageConfig::new(6, 6, bounds());
        let forward = persistence_image(&pd, &cfg).unwrap();
        pd.reverse();
        let backward = persistence_image(&pd, &cfg).unwrap();
        prop_assert!(sup(&forward, &backward) < 1e-12);
    }

    #[test]
    fn narrow_gaussian_lands_in_one_pixel(r in 0usize..5, c in 0usize..10) {
        let cfg = ImageConfig {
            sigma: Some(1e-3),
            weight: ImageWeight::Constant,
            ..ImageConfig::new(5, 10, bounds())
        };
        // pixel centers of a 10 x 5 box split into 10 x 5 cells
        let (birth, pers) = (c as f64 + 0.5, r as f64 + 0.5);
        let img = persistence_image(&[(birth, birth + pers)], &cfg).unwrap();
        for (i, &v) in img.iter().enumerate() {
            if i == r * 10 + c {
                prop_assert!((v - 1.0).abs() < 1e-9);
            } else {
                prop_assert!(v < 1e-6);
            }
        }
    }
}

#[test]
fn fast_betti_counts_cycles() {
    let k4 = clique_complex_of_edges(&[0, 1, 2, 3], &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)], 2);
    let square = clique_complex_of_edges(&[0, 1, 2, 3], &[(0, 1), (1, 2), (2, 3), (0, 3)], 2);
    assert_eq!(betti_vector_fast(&[k4.clone(), square.clone()], 1), vec![0.0, 1.0]);
    assert_eq!(betti_vector_fast(&[k4, square], 0), vec![1.0, 1.0]);
}
