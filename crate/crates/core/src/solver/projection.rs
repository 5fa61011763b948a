/// Euclidean projection onto `{y : y_i >= lower, sum y <= cap}`.
///
/// Returns `x` clamped at `lower` when that already fits under the cap,
/// otherwise the projection onto the face `sum y = cap`.
pub fn project_box_capped_simplex(x: &[f64], cap: f64, lower: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    project_in_place(&mut y, cap, lower);
    y
}

pub fn project_in_place(x: &mut [f64], cap: f64, lower: f64) {
    if x.is_empty() {
        return;
    }
    let budget = cap - lower * x.len() as f64;
    debug_assert!(budget >= 0.0, "lower bounds exceed the cap");
    let clamped_sum: f64 = x.iter().map(|&v| (v - lower).max(0.0)).sum();
    if clamped_sum <= budget {
        for v in x.iter_mut() {
            *v = v.max(lower);
        }
        return;
    }
    // Simplex projection of the shifted point onto sum = budget.
    let mut sorted: Vec<f64> = x.iter().map(|&v| v - lower).collect();
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut running = 0.0;
    let mut theta = 0.0;
    for (i, &v) in sorted.iter().enumerate() {
        running += v;
        let candidate = (running - budget) / (i + 1) as f64;
        // The largest entry always stays in the support, even when the
        // budget is zero.
        if i == 0 || v - candidate > 0.0 {
            theta = candidate;
        } else {
            break;
        }
    }
    for v in x.iter_mut() {
        *v = (*v - lower - theta).max(0.0) + lower;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Brute-force projection: minimize the distance over a fine grid of the
    /// feasible set in two dimensions.
    fn grid_projection(x: [f64; 2], cap: f64) -> [f64; 2] {
        let steps = 2000;
        let mut best = [0.0, 0.0];
        let mut best_d = f64::INFINITY;
        for i in 0..=steps {
            for j in 0..=(steps - i) {
                let y = [cap * i as f64 / steps as f64, cap * j as f64 / steps as f64];
                let d = (y[0] - x[0]).powi(2) + (y[1] - x[1]).powi(2);
                if d < best_d {
                    best_d = d;
                    best = y;
                }
            }
        }
        best
    }

    #[test]
    fn examples_against_grid() {
        for (x, expected) in [([0.6, 0.6], [0.5, 0.5]), ([-1.0, 3.0], [0.0, 1.0])] {
            let y = project_box_capped_simplex(&x, 1.0, 0.0);
            let g = grid_projection(x, 1.0);
            for i in 0..2 {
                assert!((y[i] - expected[i]).abs() < 1e-12);
                assert!((y[i] - g[i]).abs() < 1e-3);
            }
        }
    }

    #[test]
    fn zero_budget_lands_on_the_floor() {
        let y = project_box_capped_simplex(&[1.7e8], 1.0, 1.0);
        assert_eq!(y, vec![1.0]);
        let y = project_box_capped_simplex(&[5.0, 2.0], 4.0, 2.0);
        assert_eq!(y, vec![2.0, 2.0]);
    }

    #[test]
    fn feasible_point_unchanged() {
        let x = [0.2, 0.3, 0.1];
        assert_eq!(project_box_capped_simplex(&x, 1.0, 0.0), x.to_vec());
    }

    #[test]
    fn lower_bound_shift() {
        let y = project_box_capped_simplex(&[10.0, 0.0], 5.0, 1.0);
        assert!((y[0] - 4.0).abs() < 1e-12 && (y[1] - 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn projection_is_feasible_idempotent_and_optimal(
            x in prop::collection::vec(-5.0f64..5.0, 1..8),
            cap in 0.1f64..10.0,
        ) {
            let y = project_box_capped_simplex(&x, cap, 0.0);
            prop_assert!(y.iter().all(|&v| v >= 0.0));
            prop_assert!(y.iter().sum::<f64>() <= cap * (1.0 + 1e-12));
            let z = project_box_capped_simplex(&y, cap, 0.0);
            for (a, b) in y.iter().zip(&z) {
                prop_assert!((a - b).abs() <= 1e-12 * cap);
            }
            // Variational inequality: (x - y) . (v - y) <= 0 for feasible v.
            let n = x.len();
            for vertex in 0..=n {
                let v: Vec<f64> = (0..n).map(|i| if i == vertex { cap } else { 0.0 }).collect();
                let ip: f64 = (0..n).map(|i| (x[i] - y[i]) * (v[i] - y[i])).sum();
                prop_assert!(ip <= 1e-9 * (1.0 + cap * cap));
            }
        }
    }
}
