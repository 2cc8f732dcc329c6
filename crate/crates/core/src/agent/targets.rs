use ndarray::Array2;

use super::replay::Transition;
use crate::error::{input_err, Result};
use crate::graph::StateVector;
use crate::nn::QNetworkParams;

/// Network input for `state`: one 0/1 entry per component, plus the number
/// of resource units when more than one is available.
pub fn encode_state(state: &StateVector, resource_units: usize) -> Vec<f64> {
    let mut x = state.to_input();
    if resource_units > 1 {
        x.push(resource_units as f64);
    }
    x
}

pub fn input_dim(components: usize, resource_units: usize) -> usize {
    components + usize::from(resource_units > 1)
}

/// Row-stacked inputs of many states.
pub fn encode_batch<'a>(states: impl ExactSizeIterator<Item = &'a StateVector>, resource_units: usize) -> Array2<f64> {
    let rows = states.len();
    let mut flat = Vec::new();
    let mut width = 0;
    for s in states {
        let x = encode_state(s, resource_units);
        width = x.len();
        flat.extend(x);
    }
    Array2::from_shape_vec((rows, width), flat).expect("equal-length rows")
}

/// Bootstrapped TD targets `y = r + gamma * Q_target(s', a*)`, or `y = r` at
/// terminal transitions. `a*` maximizes the target network over damaged
/// components of `s'`, or the policy network when `double` is set.
pub fn compute_targets(
    batch: &[&Transition],
    policy: &QNetworkParams,
    target: &QNetworkParams,
    gamma: f64,
    double: bool,
    resource_units: usize,
) -> Result<Vec<f64>> {
    if batch.is_empty() {
        return input_err("empty batch");
    }
    let next = encode_batch(batch.iter().map(|t| &t.next_state), resource_units);
    let q_target = target.forward_batch(next.view())?;
    let q_select = if double { Some(policy.forward_batch(next.view())?) } else { None };
    let mut y = Vec::with_capacity(batch.len());
    for (i, t) in batch.iter().enumerate() {
        if t.done {
            y.push(t.reward);
            continue;
        }
        let chooser = q_select.as_ref().unwrap_or(&q_target);
        let best = t
            .next_state
            .damaged()
            .fold(None::<usize>, |best, a| match best {
                Some(b) if chooser[[i, b]] >= chooser[[i, a]] => Some(b),
                _ => Some(a),
            });
        let Some(a_star) = best else {
            return input_err("non-terminal transition has no damaged component");
        };
        y.push(t.reward + gamma * q_target[[i, a_star]]);
    }
    Ok(y)
}
