//! Named parameter sets and their binding onto a tape.

use std::collections::HashMap;

use rand::Rng;

use crate::autodiff::{Gradients, Graph, Tensor, Var};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Parameter {
    pub name: String,
    pub tensor: Tensor,
}

/// Ordered collection of uniquely named tensors.
///
/// `version` counts mutations, which lets callers assert which code paths
/// touched a set (optimizer steps, EMA blends, loads).
#[derive(Clone, Debug)]
pub struct ParamSet {
    params: Vec<Parameter>,
    index: HashMap<String, usize>,
    version: u64,
}

impl PartialEq for ParamSet {
    /// Equality is on names, shapes and values; the version counter is ignored.
    fn eq(&self, other: &Self) -> bool {
        self.params == other.params
    }
}

impl Default for ParamSet {
    fn default() -> Self {
        Self::new()
    }
}

impl ParamSet {
    pub fn new() -> Self {
        Self {
            params: Vec::new(),
            index: HashMap::new(),
            version: 0,
        }
    }

    pub fn insert(&mut self, name: impl Into<String>, tensor: Tensor) -> Result<()> {
        let name = name.into();
        if self.index.contains_key(&name) {
            return Err(Error::contract(format!("duplicate parameter name `{name}`")));
        }
        self.index.insert(name.clone(), self.params.len());
        self.params.push(Parameter { name, tensor });
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn iter(&self) -> impl Iterator<Item = &Parameter> {
        self.params.iter()
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.index.get(name).map(|&i| &self.params[i].tensor)
    }

    /// Mutable access to one tensor; counts as a mutation.
    pub fn get_mut(&mut self, name: &str) -> Option<&mut Tensor> {
        let i = *self.index.get(name)?;
        self.version += 1;
        Some(&mut self.params[i].tensor)
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn num_scalars(&self) -> usize {
        self.params.iter().map(|p| p.tensor.numel()).sum()
    }

    /// True when both sets have identical names, order and shapes.
    pub fn same_layout(&self, other: &ParamSet) -> bool {
        self.params.len() == other.params.len()
            && self
                .params
                .iter()
                .zip(&other.params)
                .all(|(a, b)| a.name == b.name && a.tensor.shape() == b.tensor.shape())
    }

    /// Applies `f` to every tensor in order and bumps the version once.
    pub fn update_each(&mut self, mut f: impl FnMut(usize, &mut Tensor)) {
        for (i, p) in self.params.iter_mut().enumerate() {
            f(i, &mut p.tensor);
        }
        self.version += 1;
    }

    /// Places every parameter on `graph`, tracked when `trainable`.
    pub fn bind<'a>(&'a self, graph: &mut Graph, trainable: bool) -> Bound<'a> {
        let vars = self
            .params
            .iter()
            .map(|p| {
                if trainable {
                    graph.variable(p.tensor.clone())
                } else {
                    graph.constant(p.tensor.clone())
                }
            })
            .collect();
        Bound { set: self, vars }
    }
}

/// A parameter set placed on one tape.
pub struct Bound<'a> {
    set: &'a ParamSet,
    vars: Vec<Var>,
}

impl<'a> Bound<'a> {
    /// Uses existing tape nodes, one per parameter in set order.
    pub fn from_vars(set: &'a ParamSet, vars: Vec<Var>) -> Result<Self> {
        if vars.len() != set.len() {
            return Err(Error::contract(format!(
                "{} vars for {} parameters",
                vars.len(),
                set.len()
            )));
        }
        Ok(Bound { set, vars })
    }

    pub fn var(&self, name: &str) -> Result<Var> {
        self.set
            .position(name)
            .map(|i| self.vars[i])
            .ok_or_else(|| Error::contract(format!("unknown parameter `{name}`")))
    }

    /// Gradients for every parameter, in set order.
    pub fn grads(&self, grads: &Gradients) -> Vec<Tensor> {
        self.vars.iter().map(|&v| grads.wrt(v)).collect()
    }
}

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weight matrix `[fan_in × fan_out]`.
pub fn uniform_weight(rng: &mut impl Rng, fan_in: usize, fan_out: usize) -> Tensor {
    let bound = 1.0 / (fan_in as f64).sqrt();
    let data = (0..fan_in * fan_out)
        .map(|_| rng.random_range(-bound..=bound))
        .collect();
    Tensor::new(vec![fan_in, fan_out], data).expect("weight shape")
}
