use serde::{Deserialize, Serialize};

use crate::error::{Result, ShgnError};
use crate::numerics::{GradStore, ParamId, ParamStore, Tensor};

/// Adam with bias correction. Parameters that received no gradient in a step
/// are left untouched entirely (moments included), so unused heads never
/// drift and zero-weight runs stay bit-comparable to single-task runs.
#[derive(Clone, Serialize, Deserialize)]
pub struct Adam {
    beta1: f64,
    beta2: f64,
    eps: f64,
    t: u64,
    m: Vec<Tensor>,
    v: Vec<Tensor>,
}

impl Adam {
    pub fn new(store: &ParamStore, beta1: f64, beta2: f64, eps: f64) -> Adam {
        let zeros: Vec<Tensor> = (0..store.len())
            .map(|i| {
                let (r, c) = store.get(ParamId(i)).shape();
                Tensor::zeros(r, c)
            })
            .collect();
        Adam {
            beta1,
            beta2,
            eps,
            t: 0,
            m: zeros.clone(),
            v: zeros,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }

    pub fn step(&mut self, store: &mut ParamStore, grads: &GradStore, lr: f64) -> Result<()> {
        if self.m.len() != store.len() {
            return Err(ShgnError::Invalid(
                "optimizer state does not match the parameter store".into(),
            ));
        }
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..store.len() {
            let id = ParamId(i);
            let Some(grad) = grads.get(id) else {
                continue;
            };
            let m = &mut self.m[i];
            let v = &mut self.v[i];
            let param = store.get_mut(id);
            for ((p, g), (m_e, v_e)) in param
                .data_mut()
                .iter_mut()
                .zip(grad.data().iter())
                .zip(m.data_mut().iter_mut().zip(v.data_mut().iter_mut()))
            {
                *m_e = self.beta1 * *m_e + (1.0 - self.beta1) * g;
                *v_e = self.beta2 * *v_e + (1.0 - self.beta2) * g * g;
                let m_hat = *m_e / bc1;
                let v_hat = *v_e / bc2;
                *p -= lr * m_hat / (v_hat.sqrt() + self.eps);
            }
        }
        Ok(())
    }
}
