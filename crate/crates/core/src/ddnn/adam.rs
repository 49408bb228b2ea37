use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::layer::MIN_LOG_AMPLITUDE;
use super::network::{DiffractiveNetwork, Gradients};
use crate::error::{Error, Result};

/// Adam hyper-parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// A network together with its optimizer state.
#[derive(Debug, Clone)]
pub struct TrainState {
    network: DiffractiveNetwork,
    config: AdamConfig,
    step: u64,
    epochs_completed: u32,
    m_phase: Vec<Vec<f64>>,
    v_phase: Vec<Vec<f64>>,
    m_log_amplitude: Vec<Vec<f64>>,
    v_log_amplitude: Vec<Vec<f64>>,
}

/// Raw optimizer moments, in the order phase-first, then log-amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub m_phase: Vec<Vec<f64>>,
    pub v_phase: Vec<Vec<f64>>,
    pub m_log_amplitude: Vec<Vec<f64>>,
    pub v_log_amplitude: Vec<Vec<f64>>,
}

impl TrainState {
    pub fn new(network: DiffractiveNetwork, config: AdamConfig) -> Self {
        let zeros = vec![vec![0.0; network.grid().len()]; network.layer_count()];
        Self {
            network,
            config,
            step: 0,
            epochs_completed: 0,
            m_phase: zeros.clone(),
            v_phase: zeros.clone(),
            m_log_amplitude: zeros.clone(),
            v_log_amplitude: zeros,
        }
    }

    /// Reassembles a state from stored parts (checkpoint restore).
    pub fn from_parts(
        network: DiffractiveNetwork,
        config: AdamConfig,
        step: u64,
        epochs_completed: u32,
        moments: Moments,
    ) -> Result<Self> {
        let len = network.grid().len();
        let layers = network.layer_count();
        for arrays in [
            &moments.m_phase,
            &moments.v_phase,
            &moments.m_log_amplitude,
            &moments.v_log_amplitude,
        ] {
            if arrays.len() != layers || arrays.iter().any(|a| a.len() != len) {
                return Err(Error::Dimension {
                    expected: layers * len,
                    found: arrays.iter().map(Vec::len).sum(),
                });
            }
        }
        Ok(Self {
            network,
            config,
            step,
            epochs_completed,
            m_phase: moments.m_phase,
            v_phase: moments.v_phase,
            m_log_amplitude: moments.m_log_amplitude,
            v_log_amplitude: moments.v_log_amplitude,
        })
    }

    pub fn network(&self) -> &DiffractiveNetwork {
        &self.network
    }

    pub fn into_network(self) -> DiffractiveNetwork {
        self.network
    }

    pub fn config(&self) -> &AdamConfig {
        &self.config
    }

    pub fn set_learning_rate(&mut self, learning_rate: f64) {
        self.config.learning_rate = learning_rate;
    }

    /// Optimizer steps taken so far.
    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn epochs_completed(&self) -> u32 {
        self.epochs_completed
    }

    pub(crate) fn finish_epoch(&mut self) {
        self.epochs_completed += 1;
    }

    pub fn moments(&self) -> Moments {
        Moments {
            m_phase: self.m_phase.clone(),
            v_phase: self.v_phase.clone(),
            m_log_amplitude: self.m_log_amplitude.clone(),
            v_log_amplitude: self.v_log_amplitude.clone(),
        }
    }

    /// One bias-corrected Adam update. Frozen parameter kinds are left untouched
    /// and log-amplitudes are projected back onto `[MIN_LOG_AMPLITUDE, 0]`.
    pub fn adam_step(&mut self, grads: &Gradients) -> Result<()> {
        let layers = self.network.layer_count();
        let len = self.network.grid().len();
        if grads.phase.len() != layers
            || grads.log_amplitude.len() != layers
            || grads
                .phase
                .iter()
                .chain(&grads.log_amplitude)
                .any(|g| g.len() != len)
        {
            return Err(Error::Dimension {
                expected: 2 * layers * len,
                found: grads
                    .phase
                    .iter()
                    .chain(&grads.log_amplitude)
                    .map(Vec::len)
                    .sum(),
            });
        }
        for (kind, arrays) in [
            ("phase", &grads.phase),
            ("log-amplitude", &grads.log_amplitude),
        ] {
            for (layer, g) in arrays.iter().enumerate() {
                if let Some(pixel) = g.iter().position(|v| !v.is_finite()) {
                    return Err(Error::Divergence(format!(
                        "non-finite {kind} gradient at layer {layer}, pixel {pixel} (step {})",
                        self.step + 1
                    )));
                }
            }
        }

        self.step += 1;
        let AdamConfig {
            learning_rate,
            beta1,
            beta2,
            epsilon,
        } = self.config;
        let t = self.step as i32;
        let correction1 = 1.0 - libm::pow(beta1, t as f64);
        let correction2 = 1.0 - libm::pow(beta2, t as f64);
        let mode = self.network.mode();
        let update = |param: &mut [f64], m: &mut [f64], v: &mut [f64], g: &[f64]| {
            for (((p, m), v), &g) in param.iter_mut().zip(m).zip(v).zip(g) {
                *m = beta1 * *m + (1.0 - beta1) * g;
                *v = beta2 * *v + (1.0 - beta2) * g * g;
                let m_hat = *m / correction1;
                let v_hat = *v / correction2;
                *p -= learning_rate * m_hat / (libm::sqrt(v_hat) + epsilon);
            }
        };

        let (m_phase, v_phase) = (&mut self.m_phase, &mut self.v_phase);
        let (m_amp, v_amp) = (&mut self.m_log_amplitude, &mut self.v_log_amplitude);
        for (i, layer) in self.network.layers_mut().iter_mut().enumerate() {
            if mode.trains_phase() {
                update(
                    layer.phase_mut(),
                    &mut m_phase[i],
                    &mut v_phase[i],
                    &grads.phase[i],
                );
            }
            if mode.trains_amplitude() {
                let log_amp = layer.log_amplitude_mut();
                update(
                    log_amp,
                    &mut m_amp[i],
                    &mut v_amp[i],
                    &grads.log_amplitude[i],
                );
                for a in log_amp.iter_mut() {
                    *a = a.clamp(MIN_LOG_AMPLITUDE, 0.0);
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ddnn::Modulation;
    use crate::grid::GridSpec;

    fn state(mode: Modulation) -> TrainState {
        let net = DiffractiveNetwork::new(GridSpec::desk(8).unwrap(), 2, 0.01, mode).unwrap();
        TrainState::new(net, AdamConfig::default())
    }

    #[test]
    fn zero_gradient_only_advances_counter() {
        let mut s = state(Modulation::Hybrid);
        let before = s.network().layers().to_vec();
        let g = Gradients::zeros_like(s.network());
        s.adam_step(&g).unwrap();
        assert_eq!(s.step(), 1);
        assert_eq!(s.network().layers(), &before[..]);
    }

    #[test]
    fn constant_gradient_moves_at_learning_rate() {
        let mut s = state(Modulation::Phase);
        let mut g = Gradients::zeros_like(s.network());
        g.phase
            .iter_mut()
            .for_each(|a| a.iter_mut().for_each(|v| *v = 0.3));
        let mut last = 0.0;
        for _ in 0..200 {
            s.adam_step(&g).unwrap();
            let now = s.network().layers()[0].phase()[0];
            let delta = now - last;
            assert!(delta < 0.0);
            assert!((delta + 0.01).abs() < 1e-6);
            last = now;
        }
        // Phase-only: amplitudes never move.
        assert!(s
            .network()
            .layers()
            .iter()
            .all(|l| l.log_amplitude().iter().all(|&a| a == 0.0)));
    }

    #[test]
    fn amplitude_stays_passive() {
        let mut s = state(Modulation::Amplitude);
        let mut g = Gradients::zeros_like(s.network());
        g.log_amplitude.iter_mut().for_each(|a| {
            a.iter_mut()
                .enumerate()
                .for_each(|(i, v)| *v = if i % 2 == 0 { -1.0 } else { 1.0 })
        });
        g.phase
            .iter_mut()
            .for_each(|a| a.iter_mut().for_each(|v| *v = 5.0));
        for _ in 0..50 {
            s.adam_step(&g).unwrap();
        }
        for layer in s.network().layers() {
            assert!(layer.amplitude().iter().all(|&a| a > 0.0 && a <= 1.0));
            assert!(layer.phase().iter().all(|&p| p == 0.0));
        }
    }

    #[test]
    fn nan_gradient_is_divergence() {
        let mut s = state(Modulation::Hybrid);
        let mut g = Gradients::zeros_like(s.network());
        g.log_amplitude[1][3] = f64::NAN;
        let err = s.adam_step(&g).unwrap_err();
        assert!(
            matches!(err, Error::Divergence(ref m) if m.contains("layer 1") && m.contains("pixel 3"))
        );
        assert_eq!(s.step(), 0);
    }
}
