//! Finite-difference verification of reverse-mode gradients.

use super::graph::{Graph, Var};
use super::tensor::Tensor;
use crate::error::{Error, Result};

/// Below this reference magnitude the absolute error is reported instead.
pub const ABS_ERROR_FLOOR: f64 = 1e-8;

pub const DEFAULT_STEP: f64 = 1e-5;

fn relative_error(analytic: f64, numeric: f64) -> f64 {
    let diff = (analytic - numeric).abs();
    let scale = analytic.abs().max(numeric.abs());
    if scale < ABS_ERROR_FLOOR {
        diff
    } else {
        diff / scale
    }
}

fn eval_scalar<F>(f: &F, inputs: &[Tensor]) -> Result<f64>
where
    F: Fn(&mut Graph, &[Var]) -> Result<Var>,
{
    let mut g = Graph::new();
    let vars: Vec<Var> = inputs.iter().map(|t| g.constant(t.clone())).collect();
    let out = f(&mut g, &vars)?;
    let value = g.value(out);
    if !value.is_scalar() {
        return Err(Error::contract(format!(
            "grad_check needs a scalar function, got shape {:?}",
            value.shape()
        )));
    }
    Ok(value.data()[0])
}

/// Compares reverse-mode gradients of `f` with respect to every input
/// against central differences and returns the largest relative error.
pub fn grad_check_many<F>(f: F, inputs: &[Tensor], step: f64) -> Result<f64>
where
    F: Fn(&mut Graph, &[Var]) -> Result<Var>,
{
    if !(1e-7..=1e-4).contains(&step) {
        return Err(Error::contract(format!(
            "finite-difference step {step} outside [1e-7, 1e-4]"
        )));
    }
    let mut g = Graph::new();
    let vars: Vec<Var> = inputs.iter().map(|t| g.variable(t.clone())).collect();
    let out = f(&mut g, &vars)?;
    if !g.value(out).is_scalar() {
        return Err(Error::contract(format!(
            "grad_check needs a scalar function, got shape {:?}",
            g.value(out).shape()
        )));
    }
    let grads = g.backward(out)?;

    let mut worst = 0.0_f64;
    let mut probe = inputs.to_vec();
    for (k, var) in vars.iter().enumerate() {
        let analytic = grads.wrt(*var);
        for i in 0..inputs[k].numel() {
            let orig = inputs[k].data()[i];
            probe[k].data_mut()[i] = orig + step;
            let up = eval_scalar(&f, &probe)?;
            probe[k].data_mut()[i] = orig - step;
            let down = eval_scalar(&f, &probe)?;
            probe[k].data_mut()[i] = orig;
            let numeric = (up - down) / (2.0 * step);
            worst = worst.max(relative_error(analytic.data()[i], numeric));
        }
    }
    Ok(worst)
}

/// Single-input form of [`grad_check_many`].
pub fn grad_check<F>(f: F, x: &Tensor, step: f64) -> Result<f64>
where
    F: Fn(&mut Graph, Var) -> Result<Var>,
{
    grad_check_many(|g, vars| f(g, vars[0]), std::slice::from_ref(x), step)
}
