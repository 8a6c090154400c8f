//! Discrete-time leaky integrate-and-fire neurons.

use crate::error::{Error, Result};

/// What happens to the membrane after a spike.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ResetMode {
    /// Subtract the threshold once per firing step.
    Subtract,
    /// Drop the membrane to zero.
    Zero,
}

/// Spike nonlinearity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpikeMode {
    /// Hard 0/1 spike forward, triangular surrogate derivative backward.
    Binary,
    /// `clamp((u - threshold) / width + 0.5, 0, 1)` in both directions. Only
    /// meant for gradient checking: it makes the network differentiable
    /// almost everywhere.
    SmoothRamp,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LifConfig {
    pub decay_multiplier: f64,
    pub threshold: f64,
    pub time_steps: usize,
    pub surrogate_width: f64,
    pub reset: ResetMode,
    pub spike: SpikeMode,
}

impl Default for LifConfig {
    fn default() -> Self {
        Self {
            decay_multiplier: 0.9,
            threshold: 1.0,
            time_steps: 10,
            surrogate_width: 1.0,
            reset: ResetMode::Subtract,
            spike: SpikeMode::Binary,
        }
    }
}

impl LifConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.decay_multiplier > 0.0 && self.decay_multiplier < 1.0) {
            return Err(Error::param(format!(
                "decay_multiplier must be in (0,1), got {}",
                self.decay_multiplier
            )));
        }
        if !(self.threshold > 0.0) || !self.threshold.is_finite() {
            return Err(Error::param(format!("threshold must be > 0, got {}", self.threshold)));
        }
        if self.time_steps == 0 {
            return Err(Error::param("time_steps must be >= 1"));
        }
        if !(self.surrogate_width > 0.0) || !self.surrogate_width.is_finite() {
            return Err(Error::param(format!(
                "surrogate_width must be > 0, got {}",
                self.surrogate_width
            )));
        }
        Ok(())
    }

    /// Spike output for a pre-reset membrane value.
    #[inline]
    pub fn spike(&self, u: f64) -> f64 {
        match self.spike {
            SpikeMode::Binary => {
                if u > self.threshold {
                    1.0
                } else {
                    0.0
                }
            }
            SpikeMode::SmoothRamp => ((u - self.threshold) / self.surrogate_width + 0.5).clamp(0.0, 1.0),
        }
    }

    /// d(spike)/du used by the backward pass.
    #[inline]
    pub fn spike_derivative(&self, u: f64) -> f64 {
        match self.spike {
            SpikeMode::Binary => (1.0 - (u - self.threshold).abs() / self.surrogate_width).max(0.0),
            SpikeMode::SmoothRamp => {
                let z = (u - self.threshold) / self.surrogate_width + 0.5;
                if z > 0.0 && z < 1.0 {
                    1.0 / self.surrogate_width
                } else {
                    0.0
                }
            }
        }
    }

    /// Post-reset membrane given pre-reset `u` and spike `s`.
    #[inline]
    pub fn reset(&self, u: f64, s: f64) -> f64 {
        match self.reset {
            ResetMode::Subtract => u - self.threshold * s,
            ResetMode::Zero => u * (1.0 - s),
        }
    }
}

/// Membrane potentials and most recent spikes of a layer.
#[derive(Clone, Debug, PartialEq)]
pub struct LifState {
    pub membrane: Vec<f64>,
    pub spikes: Vec<f64>,
}

impl LifState {
    pub fn new(neurons: usize) -> Self {
        Self {
            membrane: vec![0.0; neurons],
            spikes: vec![0.0; neurons],
        }
    }

    pub fn len(&self) -> usize {
        self.membrane.len()
    }

    pub fn is_empty(&self) -> bool {
        self.membrane.is_empty()
    }

    /// Advances one tick in place and returns the pre-reset membrane values.
    pub(crate) fn advance(&mut self, current: &[f64], cfg: &LifConfig, pre_reset: &mut [f64]) {
        for (((u, s), &i), pre) in self
            .membrane
            .iter_mut()
            .zip(self.spikes.iter_mut())
            .zip(current)
            .zip(pre_reset.iter_mut())
        {
            let charged = cfg.decay_multiplier * *u + i;
            *pre = charged;
            *s = cfg.spike(charged);
            *u = cfg.reset(charged, *s);
        }
    }
}

/// One tick: `u' = decay * u + current`, spike when `u'` exceeds the
/// threshold, then reset.
pub fn lif_step(state: &LifState, current: &[f64], cfg: &LifConfig) -> Result<(LifState, Vec<f64>)> {
    if current.len() != state.len() {
        return Err(Error::DimensionMismatch {
            expected: state.len(),
            actual: current.len(),
        });
    }
    if current.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("input current".into()));
    }
    let mut next = state.clone();
    let mut pre = vec![0.0; state.len()];
    next.advance(current, cfg, &mut pre);
    let spikes = next.spikes.clone();
    Ok((next, spikes))
}
