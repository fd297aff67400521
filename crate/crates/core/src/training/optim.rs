use crate::autodiff::Tensor;
use crate::error::{Error, Result};
use crate::params::ParamSet;

/// Adam with bias-corrected moments, one moment pair per parameter tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    step: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl Adam {
    pub fn new(params: &ParamSet, lr: f64, beta1: f64, beta2: f64, eps: f64) -> Self {
        let zeros: Vec<Vec<f64>> = params.iter().map(|p| vec![0.0; p.tensor.numel()]).collect();
        Self {
            lr,
            beta1,
            beta2,
            eps,
            step: 0,
            m: zeros.clone(),
            v: zeros,
        }
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    pub fn step(&mut self, params: &mut ParamSet, grads: &[Tensor]) -> Result<()> {
        if grads.len() != self.m.len() || params.len() != self.m.len() {
            return Err(Error::contract(format!(
                "optimizer tracks {} tensors, got {} params / {} grads",
                self.m.len(),
                params.len(),
                grads.len()
            )));
        }
        self.step += 1;
        let bc1 = 1.0 - self.beta1.powi(self.step as i32);
        let bc2 = 1.0 - self.beta2.powi(self.step as i32);
        let (b1, b2, lr, eps) = (self.beta1, self.beta2, self.lr, self.eps);
        let (ms, vs) = (&mut self.m, &mut self.v);
        params.update_each(|i, t| {
            let g = grads[i].data();
            for (((w, &gj), m), v) in t.data_mut().iter_mut().zip(g).zip(&mut ms[i]).zip(&mut vs[i]) {
                *m = b1 * *m + (1.0 - b1) * gj;
                *v = b2 * *v + (1.0 - b2) * gj * gj;
                let mh = *m / bc1;
                let vh = *v / bc2;
                *w -= lr * mh / (vh.sqrt() + eps);
            }
        });
        Ok(())
    }

    /// Moments as a parameter set named `m.<param>` / `v.<param>`, plus a
    /// one-element `step` tensor.
    pub fn to_param_set(&self, params: &ParamSet) -> Result<ParamSet> {
        let mut out = ParamSet::new();
        out.insert("step", Tensor::scalar(self.step as f64))?;
        for (i, p) in params.iter().enumerate() {
            out.insert(format!("m.{}", p.name), Tensor::new(p.tensor.shape().to_vec(), self.m[i].clone())?)?;
            out.insert(format!("v.{}", p.name), Tensor::new(p.tensor.shape().to_vec(), self.v[i].clone())?)?;
        }
        Ok(out)
    }

    pub fn from_param_set(
        state: &ParamSet,
        params: &ParamSet,
        lr: f64,
        beta1: f64,
        beta2: f64,
        eps: f64,
    ) -> Result<Self> {
        let missing = |n: &str| Error::contract(format!("optimizer state lacks `{n}`"));
        let step = state.get("step").ok_or_else(|| missing("step"))?.data()[0] as u64;
        let mut m = Vec::new();
        let mut v = Vec::new();
        for p in params.iter() {
            for (prefix, dst) in [("m", &mut m), ("v", &mut v)] {
                let name = format!("{prefix}.{}", p.name);
                let t = state.get(&name).ok_or_else(|| missing(&name))?;
                if t.shape() != p.tensor.shape() {
                    return Err(Error::contract(format!("shape mismatch for `{name}`")));
                }
                dst.push(t.data().to_vec());
            }
        }
        Ok(Self {
            lr,
            beta1,
            beta2,
            eps,
            step,
            m,
            v,
        })
    }
}
