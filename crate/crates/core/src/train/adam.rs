use super::TrainConfig;
use crate::error::{Error, Result};
use crate::snn::Parameters;

/// First/second moment accumulators and the step counter.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub first_moment: Parameters,
    pub second_moment: Parameters,
    pub step: u64,
}

impl AdamState {
    pub fn new(params: &Parameters) -> Self {
        Self {
            first_moment: Parameters::zeros_like(params),
            second_moment: Parameters::zeros_like(params),
            step: 0,
        }
    }
}

/// One bias-corrected ADAM step, in place.
pub fn adam_update(
    params: &mut Parameters,
    grads: &Parameters,
    state: &mut AdamState,
    cfg: &TrainConfig,
) -> Result<()> {
    for ((name, p), (_, g)) in params.tensors().into_iter().zip(grads.tensors()) {
        if p.len() != g.len() {
            return Err(Error::DimensionMismatch {
                expected: p.len(),
                actual: g.len(),
            });
        }
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("gradient of {name}")));
        }
    }
    state.step += 1;
    let t = state.step as i32;
    let (b1, b2) = (cfg.beta1, cfg.beta2);
    let correction1 = 1.0 - b1.powi(t);
    let correction2 = 1.0 - b2.powi(t);
    let lr = cfg.learning_rate;
    let eps = cfg.epsilon;

    let grads = grads.tensors();
    let m = state.first_moment.tensors_mut();
    let v = state.second_moment.tensors_mut();
    for ((((_, p), (_, g)), (_, m)), (_, v)) in params.tensors_mut().into_iter().zip(grads).zip(m).zip(v) {
        for (((p, &g), m), v) in p.iter_mut().zip(g).zip(m.iter_mut()).zip(v.iter_mut()) {
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            let m_hat = *m / correction1;
            let v_hat = *v / correction2;
            *p -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
    Ok(())
}
