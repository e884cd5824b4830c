use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdamParams {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Adam with bias-corrected first and second moments, one buffer pair per
/// parameter tensor.
#[derive(Debug, Clone)]
pub struct Adam {
    pub params: AdamParams,
    step: i32,
    first: Vec<Vec<f64>>,
    second: Vec<Vec<f64>>,
}

impl Adam {
    pub fn new(params: AdamParams, sizes: &[usize]) -> Self {
        Self {
            params,
            step: 0,
            first: sizes.iter().map(|&n| vec![0.0; n]).collect(),
            second: sizes.iter().map(|&n| vec![0.0; n]).collect(),
        }
    }

    /// Advances the step counter; call once before updating the tensors of a step.
    pub fn begin_step(&mut self) {
        self.step += 1;
    }

    pub fn update(&mut self, tensor: usize, values: &mut [f64], grads: &[f64]) {
        let AdamParams {
            learning_rate,
            beta1,
            beta2,
            eps,
        } = self.params;
        let c1 = 1.0 - beta1.powi(self.step);
        let c2 = 1.0 - beta2.powi(self.step);
        let m = &mut self.first[tensor];
        let v = &mut self.second[tensor];
        for i in 0..values.len() {
            let g = grads[i];
            m[i] = beta1 * m[i] + (1.0 - beta1) * g;
            v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
            let m_hat = m[i] / c1;
            let v_hat = v[i] / c2;
            values[i] -= learning_rate * m_hat / (v_hat.sqrt() + eps);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_is_a_no_op() {
        let mut adam = Adam::new(AdamParams::default(), &[3]);
        let mut p = vec![0.5, -1.0, 2.0];
        for _ in 0..5 {
            adam.begin_step();
            adam.update(0, &mut p, &[0.0; 3]);
        }
        assert_eq!(p, vec![0.5, -1.0, 2.0]);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let params = AdamParams::default();
        let mut adam = Adam::new(params, &[3]);
        let mut p = vec![0.0; 3];
        adam.begin_step();
        adam.update(0, &mut p, &[0.3, -2.0, 1e-3]);
        for (v, s) in p.iter().zip([-1.0, 1.0, -1.0]) {
            assert!((v - s * params.learning_rate).abs() < 1e-7 * params.learning_rate.max(1.0) + 1e-8, "{v}");
        }
    }
}
