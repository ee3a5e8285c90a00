//! Central finite-difference verification of tape gradients.

use super::{Gradients, ParamStore};

/// Compares the analytic gradients of `loss_fn` against central finite
/// differences and returns the worst relative error seen.
///
/// `loss_fn` must evaluate the loss (and its gradients) for the current
/// store contents. For each parameter, up to `coords_per_param` evenly
/// spaced coordinates are probed (`0` probes every coordinate). Relative
/// error uses a floor of 1e-3 in the denominator, so near-zero gradient
/// pairs are compared absolutely at 1e-3 scale. The store is restored
/// bit-for-bit before returning.
pub fn grad_check(
    store: &mut ParamStore,
    loss_fn: impl Fn(&ParamStore) -> (f64, Gradients),
    epsilon: f64,
    coords_per_param: usize,
) -> f64 {
    let (_, analytic) = loss_fn(store);
    let names: Vec<String> = store.names().cloned().collect();
    let mut worst: f64 = 0.0;

    for name in names {
        let len = store.get(&name).expect("name from store").len();
        let stride = if coords_per_param == 0 {
            1
        } else {
            (len / coords_per_param).max(1)
        };
        let mut k = 0;
        while k < len {
            let original = store.get(&name).unwrap().values()[k];

            store.values_mut(&name).unwrap().values_mut()[k] = original + epsilon;
            let up = loss_fn(store).0;
            store.values_mut(&name).unwrap().values_mut()[k] = original - epsilon;
            let down = loss_fn(store).0;
            store.values_mut(&name).unwrap().values_mut()[k] = original;

            let fd = (up - down) / (2.0 * epsilon);
            let grad = analytic.get(&name).map_or(0.0, |g| g.values()[k]);
            let rel = (grad - fd).abs() / grad.abs().max(fd.abs()).max(1e-3);
            worst = worst.max(rel);
            k += stride;
        }
    }
    worst
}
