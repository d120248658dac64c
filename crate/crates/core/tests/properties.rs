use conewave::bounds::beta_bounds;
use conewave::cone::apply_a;
use conewave::grid::{build_cube_cover, dyadic_sort};
use conewave::io::fmt_f64;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn a_is_unitary(x in prop::collection::vec(-100.0f64..100.0, 3..6)) {
        let y = apply_a(&x, false);
        let back = apply_a(&y, true);
        let n0: f64 = x.iter().map(|v| v * v).sum();
        let n1: f64 = y.iter().map(|v| v * v).sum();
        prop_assert!((n0 - n1).abs() <= 1e-9 * n0.max(1.0));
        for (a, b) in x.iter().zip(&back) {
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }

    #[test]
    fn dyadic_sort_partitions_the_cover(seed in any::<u64>()) {
        let mut cover = build_cube_cover(16.0, 2).unwrap();
        let mut s = seed | 1;
        let values: Vec<f64> = (0..cover.len())
            .map(|_| {
                s ^= s << 13;
                s ^= s >> 7;
                s ^= s << 17;
                // Spread over many octaves, with some exact zeros.
                if s % 11 == 0 { 0.0 } else { 2f64.powf((s % 4000) as f64 / 100.0 - 30.0) }
            })
            .collect();
        cover.set_values(&values).unwrap();
        let sort = dyadic_sort(&mut cover).unwrap();
        let mut seen = vec![0usize; cover.len()];
        for (k, c) in &sort.classes {
            let lo = 2f64.powi(*k);
            for &i in &c.cubes {
                seen[i] += 1;
                prop_assert!(values[i] >= lo && values[i] < 2.0 * lo);
            }
            prop_assert_eq!(c.slab_sigma.values().sum::<usize>(), c.cubes.len());
        }
        for &i in &sort.negligible {
            seen[i] += 1;
        }
        prop_assert!(seen.iter().all(|&n| n == 1));
    }

    #[test]
    fn cho_lower_below_upper(alpha in 0.01f64..8.0, d in 3usize..9) {
        prop_assume!(alpha <= d as f64);
        let b = beta_bounds(alpha, d).unwrap();
        prop_assert!(b.lower_cho <= b.upper_cho + 1e-12);
        if let Some(u) = b.upper_new {
            prop_assert!(b.lower_new <= u + 1e-12);
        }
    }

    #[test]
    fn float_text_round_trips(v in any::<f64>()) {
        let s = fmt_f64(v);
        if v.is_nan() {
            prop_assert_eq!(s, "nan");
        } else {
            prop_assert_eq!(s.parse::<f64>().unwrap(), v);
        }
    }
}
