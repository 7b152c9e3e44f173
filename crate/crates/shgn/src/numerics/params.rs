use std::collections::HashMap;

use crate::error::{Result, ShgnError};
use crate::numerics::rng::SeededRng;
use crate::numerics::tensor::Tensor;

/// Handle to a named parameter inside a [`ParamStore`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ParamId(pub usize);

/// Ordered collection of named trainable tensors. Registration order is the
/// canonical iteration order everywhere (optimizer, clipping, checkpoints),
/// which keeps training bit-reproducible.
#[derive(Default)]
pub struct ParamStore {
    names: Vec<String>,
    values: Vec<Tensor>,
    index: HashMap<String, usize>,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, name: impl Into<String>, value: Tensor) -> Result<ParamId> {
        let name = name.into();
        if self.index.contains_key(&name) {
            return Err(ShgnError::Invalid(format!("duplicate parameter {name}")));
        }
        let id = ParamId(self.values.len());
        self.index.insert(name.clone(), id.0);
        self.names.push(name);
        self.values.push(value);
        Ok(id)
    }

    /// Registers a matrix initialized uniform in ±sqrt(6/(fan_in+fan_out)).
    pub fn register_xavier(
        &mut self,
        name: impl Into<String>,
        rows: usize,
        cols: usize,
        rng: &mut SeededRng,
    ) -> Result<ParamId> {
        let bound = (6.0 / (rows + cols) as f64).sqrt();
        let mut t = Tensor::zeros(rows, cols);
        for v in t.data_mut() {
            *v = rng.uniform(-bound, bound);
        }
        self.register(name, t)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, id: ParamId) -> &Tensor {
        &self.values[id.0]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Tensor {
        &mut self.values[id.0]
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.names[id.0]
    }

    pub fn id_of(&self, name: &str) -> Option<ParamId> {
        self.index.get(name).copied().map(ParamId)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor)> {
        self.names
            .iter()
            .map(String::as_str)
            .zip(self.values.iter())
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(Tensor::all_finite)
    }
}

/// Per-parameter gradient buffers aligned with a [`ParamStore`].
pub struct GradStore {
    grads: Vec<Option<Tensor>>,
}

impl GradStore {
    pub fn zeros(store: &ParamStore) -> Self {
        GradStore {
            grads: vec![None; store.len()],
        }
    }

    pub fn get(&self, id: ParamId) -> Option<&Tensor> {
        self.grads[id.0].as_ref()
    }

    pub fn add_to(&mut self, id: ParamId, grad: &Tensor) -> Result<()> {
        match &mut self.grads[id.0] {
            Some(g) => g.axpy(1.0, grad)?,
            slot => *slot = Some(grad.clone()),
        }
        Ok(())
    }

    /// Accumulates another gradient set into this one.
    pub fn accumulate(&mut self, other: &GradStore) -> Result<()> {
        if self.grads.len() != other.grads.len() {
            return Err(ShgnError::Invalid(
                "gradient stores track different parameter sets".into(),
            ));
        }
        for (id, grad) in other.grads.iter().enumerate() {
            if let Some(g) = grad {
                self.add_to(ParamId(id), g)?;
            }
        }
        Ok(())
    }

    pub fn scale(&mut self, c: f64) {
        for g in self.grads.iter_mut().flatten() {
            *g = g.scale(c);
        }
    }

    pub fn global_norm(&self) -> f64 {
        self.grads
            .iter()
            .flatten()
            .map(Tensor::sq_l2_norm)
            .sum::<f64>()
            .sqrt()
    }

    /// Scales all gradients so the global L2 norm does not exceed `max_norm`;
    /// returns the pre-clip norm.
    pub fn clip_global_norm(&mut self, max_norm: f64) -> f64 {
        let norm = self.global_norm();
        if norm > max_norm && norm > 0.0 {
            self.scale(max_norm / norm);
        }
        norm
    }

    pub fn all_finite(&self) -> bool {
        self.grads.iter().flatten().all(Tensor::all_finite)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_name_rejected() {
        let mut store = ParamStore::new();
        store.register("w", Tensor::zeros(2, 2)).unwrap();
        assert!(store.register("w", Tensor::zeros(2, 2)).is_err());
    }

    #[test]
    fn clip_caps_global_norm() {
        let mut store = ParamStore::new();
        let a = store.register("a", Tensor::zeros(1, 2)).unwrap();
        let mut grads = GradStore::zeros(&store);
        grads.add_to(a, &Tensor::row(&[3.0, 4.0])).unwrap();
        let pre = grads.clip_global_norm(1.0);
        assert!((pre - 5.0).abs() < 1e-12);
        assert!((grads.global_norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn clip_leaves_small_gradients_alone() {
        let mut store = ParamStore::new();
        let a = store.register("a", Tensor::zeros(1, 2)).unwrap();
        let mut grads = GradStore::zeros(&store);
        grads.add_to(a, &Tensor::row(&[0.3, 0.4])).unwrap();
        grads.clip_global_norm(1.0);
        assert_eq!(grads.get(a).unwrap().data(), &[0.3, 0.4]);
    }
}
