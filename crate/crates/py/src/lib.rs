//! Python bindings: datasets, configs, training runs, memories and the
//! scalar objectives.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use trs_core::autodiff::Tensor;
use trs_core::data::{load_features, save_features, synthesize, SyntheticSpec};
use trs_core::memory::{ConfidenceMemory, MemoryKind};
use trs_core::networks::{predict_score, NetworkConfig, ScorePrediction};
use trs_core::params::ParamSet;
use trs_core::training::{save_params, EpochMetrics};

fn to_py(e: trs_core::Error) -> PyErr {
    match e {
        trs_core::Error::Io(io) => PyIOError::new_err(io.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn tensor_from_rows(rows: Vec<Vec<f64>>) -> PyResult<Tensor> {
    Tensor::from_rows(&rows).map_err(to_py)
}

#[pyclass(name = "Dataset", from_py_object)]
#[derive(Clone)]
struct PyDataset {
    inner: trs_core::data::Dataset,
}

#[pymethods]
impl PyDataset {
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self {
            inner: load_features(path).map_err(to_py)?,
        })
    }

    /// Returns `(train, test)`.
    #[staticmethod]
    #[pyo3(signature = (n, t, d, label_frac, noise=1.0, seed=0, n_test=0))]
    fn synthetic(
        n: usize,
        t: usize,
        d: usize,
        label_frac: f64,
        noise: f64,
        seed: u64,
        n_test: usize,
    ) -> PyResult<(Self, Self)> {
        let spec = SyntheticSpec {
            num_samples: n,
            seq_len: t,
            feat_dim: d,
            label_fraction: label_frac,
            noise_std: noise,
            seed,
        };
        let split = synthesize(&spec, n_test).map_err(to_py)?;
        Ok((Self { inner: split.train }, Self { inner: split.test }))
    }

    fn save(&self, path: &str) -> PyResult<()> {
        save_features(&self.inner, path).map_err(to_py)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn shape(&self) -> Option<(usize, usize)> {
        self.inner.shape()
    }

    #[getter]
    fn num_labeled(&self) -> usize {
        self.inner.labeled().count()
    }

    #[getter]
    fn ids(&self) -> Vec<String> {
        self.inner.samples().iter().map(|s| s.sample_id.clone()).collect()
    }

    #[getter]
    fn scores(&self) -> Vec<Option<f64>> {
        self.inner.samples().iter().map(|s| s.score).collect()
    }

    fn features(&self, index: usize) -> PyResult<Vec<Vec<f64>>> {
        let s = self
            .inner
            .samples()
            .get(index)
            .ok_or_else(|| PyValueError::new_err(format!("index {index} out of range")))?;
        Ok(s.features.data().chunks(s.feat_dim()).map(<[f64]>::to_vec).collect())
    }

    /// Returns `(labeled, unlabeled)`.
    fn partition(&self) -> (Self, Self) {
        let (l, u) = self.inner.partition();
        (Self { inner: l }, Self { inner: u })
    }
}

#[pyclass(name = "TrainConfig", from_py_object)]
#[derive(Clone)]
struct PyTrainConfig {
    inner: trs_core::training::TrainConfig,
}

#[pymethods]
impl PyTrainConfig {
    /// Keyword arguments use the config key names, e.g.
    /// `TrainConfig(max_epochs=20, teacher_memory=False)`.
    #[new]
    #[pyo3(signature = (**kwargs))]
    fn new(kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let mut cfg = Self {
            inner: Default::default(),
        };
        if let Some(kw) = kwargs {
            for (k, v) in kw.iter() {
                cfg.set(&k.extract::<String>()?, &v.str()?.to_string())?;
            }
        }
        Ok(cfg)
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: trs_core::training::TrainConfig::from_kv_text(text).map_err(to_py)?,
        })
    }

    fn set(&mut self, key: &str, value: &str) -> PyResult<()> {
        self.inner.set(key, value).map_err(to_py)
    }

    fn validate(&self) -> PyResult<()> {
        self.inner.validate().map_err(to_py)
    }

    fn to_text(&self) -> String {
        self.inner.to_kv_text()
    }

    fn __repr__(&self) -> String {
        format!(
            "TrainConfig(seed={}, max_epochs={}, burn_in_epochs={}, learning_rate={})",
            self.inner.seed, self.inner.max_epochs, self.inner.burn_in_epochs, self.inner.learning_rate
        )
    }
}

fn metrics_rows<'py>(py: Python<'py>, rows: &[EpochMetrics]) -> PyResult<Vec<Bound<'py, PyDict>>> {
    rows.iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("epoch", r.epoch)?;
            d.set_item("l_reg_s", r.losses.l_reg_s)?;
            d.set_item("l_reg_r", r.losses.l_reg_r)?;
            d.set_item("l_unsup", r.losses.l_unsup)?;
            d.set_item("beta", r.losses.beta)?;
            d.set_item("total", r.losses.total)?;
            d.set_item("val_spearman", r.val_spearman)?;
            Ok(d)
        })
        .collect()
}

/// A trained score network plus the log of the run that produced it.
#[pyclass(name = "Model")]
struct PyModel {
    params: ParamSet,
    network: NetworkConfig,
    metrics: Vec<EpochMetrics>,
}

#[pymethods]
impl PyModel {
    fn metrics<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyDict>>> {
        metrics_rows(py, &self.metrics)
    }

    /// `(mu, sigma)` for one `T × D` feature sequence.
    fn predict(&self, features: Vec<Vec<f64>>) -> PyResult<(f64, f64)> {
        let p = predict_score(&self.params, &self.network, &tensor_from_rows(features)?).map_err(to_py)?;
        Ok((p.mu, p.sigma))
    }

    /// `(spearman, [(sample_id, truth, mu, sigma), ...])`.
    fn evaluate(&self, test: &PyDataset) -> PyResult<(f64, Vec<(String, f64, f64, f64)>)> {
        let e = trs_core::eval::evaluate(&self.params, &self.network, &test.inner).map_err(to_py)?;
        let rows = e
            .predictions
            .into_iter()
            .map(|r| (r.sample_id, r.truth, r.mu, r.sigma))
            .collect();
        Ok((e.spearman, rows))
    }

    fn save(&self, path: &str) -> PyResult<()> {
        save_params(&self.params, path).map_err(to_py)
    }

    #[getter]
    fn num_parameters(&self) -> usize {
        self.params.num_scalars()
    }
}

/// Full teacher-reference-student training; returns the student.
#[pyfunction]
#[pyo3(signature = (config, labeled, unlabeled, validation=None))]
fn train(
    py: Python<'_>,
    config: &PyTrainConfig,
    labeled: &PyDataset,
    unlabeled: &PyDataset,
    validation: Option<&PyDataset>,
) -> PyResult<PyModel> {
    let cfg = config.inner.clone();
    let (l, u) = (labeled.inner.clone(), unlabeled.inner.clone());
    let v = validation.map(|d| d.inner.clone());
    let out = py
        .detach(move || trs_core::training::train(&cfg, &l, &u, v.as_ref()))
        .map_err(to_py)?;
    Ok(PyModel {
        params: out.theta_s,
        network: out.network,
        metrics: out.metrics,
    })
}

/// Supervised-only baseline on the labeled set.
#[pyfunction]
#[pyo3(signature = (config, labeled, validation=None))]
fn train_supervised(
    py: Python<'_>,
    config: &PyTrainConfig,
    labeled: &PyDataset,
    validation: Option<&PyDataset>,
) -> PyResult<PyModel> {
    let cfg = config.inner.clone();
    let l = labeled.inner.clone();
    let v = validation.map(|d| d.inner.clone());
    let out = py
        .detach(move || trs_core::training::train_supervised(&cfg, &l, v.as_ref()))
        .map_err(to_py)?;
    Ok(PyModel {
        params: out.params,
        network: out.network,
        metrics: out.metrics,
    })
}

#[pyclass(name = "ConfidenceMemory")]
struct PyMemory {
    inner: ConfidenceMemory,
}

fn memory_kind(kind: &str) -> PyResult<MemoryKind> {
    match kind {
        "teacher" => Ok(MemoryKind::Teacher),
        "reference" => Ok(MemoryKind::Reference),
        other => Err(PyValueError::new_err(format!(
            "memory kind must be 'teacher' or 'reference', got {other:?}"
        ))),
    }
}

#[pymethods]
impl PyMemory {
    #[new]
    #[pyo3(signature = (kind="teacher"))]
    fn new(kind: &str) -> PyResult<Self> {
        Ok(Self {
            inner: ConfidenceMemory::new(memory_kind(kind)?),
        })
    }

    /// True when the entry was written.
    #[pyo3(signature = (sample_id, score, sigma, epoch=0))]
    fn maybe_write(&mut self, sample_id: &str, score: f64, sigma: f64, epoch: u64) -> PyResult<bool> {
        let out = self.inner.maybe_write(sample_id, score, sigma, epoch).map_err(to_py)?;
        Ok(out == trs_core::memory::WriteOutcome::Written)
    }

    /// `(score, sigma, epoch_written)` or None.
    fn read(&self, sample_id: &str) -> Option<(f64, f64, u64)> {
        self.inner.read(sample_id).map(|e| (e.score, e.sigma, e.epoch_written))
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn to_tsv(&self) -> PyResult<String> {
        self.inner.to_tsv().map_err(to_py)
    }

    #[staticmethod]
    #[pyo3(signature = (text, kind="teacher"))]
    fn from_tsv(text: &str, kind: &str) -> PyResult<Self> {
        Ok(Self {
            inner: ConfidenceMemory::from_tsv(memory_kind(kind)?, text).map_err(to_py)?,
        })
    }
}

#[pyfunction]
fn gaussian_nll(target: f64, mu: f64, sigma: f64) -> PyResult<f64> {
    let pred = ScorePrediction::new(mu, sigma).map_err(to_py)?;
    trs_core::objectives::gaussian_nll(target, pred).map_err(to_py)
}

#[pyfunction]
fn beta_at(epoch: f64) -> PyResult<f64> {
    trs_core::objectives::beta_at(epoch).map_err(to_py)
}

#[pyfunction]
fn spearman(x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
    trs_core::eval::spearman(&x, &y).map_err(to_py)
}

#[pyfunction]
fn fuse_scores(a: f64, b: f64) -> f64 {
    trs_core::memory::fuse_scores(a, b)
}

#[pymodule]
fn trs(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDataset>()?;
    m.add_class::<PyTrainConfig>()?;
    m.add_class::<PyModel>()?;
    m.add_class::<PyMemory>()?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    m.add_function(wrap_pyfunction!(train_supervised, m)?)?;
    m.add_function(wrap_pyfunction!(gaussian_nll, m)?)?;
    m.add_function(wrap_pyfunction!(beta_at, m)?)?;
    m.add_function(wrap_pyfunction!(spearman, m)?)?;
    m.add_function(wrap_pyfunction!(fuse_scores, m)?)?;
    Ok(())
}
