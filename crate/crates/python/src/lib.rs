//! Python module `afv`: flow estimation, coherence gating, motion encoding,
//! stimulus synthesis, `.flo` I/O and the behavioural statistics.
//!
//! Images cross the boundary as flat row-major lists of floats in `[0, 1]`
//! (grayscale) and encoded videos as lists of `bytes` (BGR, 8-bit).

use std::path::PathBuf;

use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use afv_core::encoding::{encode_hsv_video, flip_horizontal_with_hue_remap, NormalizationConfig};
use afv_core::flow::FlowParams;
use afv_core::gate::GateParams;
use afv_core::stimulus::DotParams;
use afv_core::tensor::{Frame, FrameSequence, PixelLayout};
use afv_core::{pipeline, stats, Error};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyOSError::new_err(e.to_string()),
        Error::Degenerate(_) | Error::State(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

#[pyclass(name = "FlowField", module = "afv", frozen, skip_from_py_object)]
struct PyFlowField(afv_core::tensor::FlowField);

#[pymethods]
impl PyFlowField {
    #[new]
    fn new(width: usize, height: usize, u: Vec<f32>, v: Vec<f32>) -> PyResult<Self> {
        afv_core::tensor::FlowField::new(width, height, u, v)
            .map(Self)
            .map_err(to_py)
    }

    #[staticmethod]
    fn uniform(width: usize, height: usize, u: f32, v: f32) -> Self {
        Self(afv_core::tensor::FlowField::uniform(width, height, u, v))
    }

    #[getter]
    fn width(&self) -> usize {
        self.0.width()
    }

    #[getter]
    fn height(&self) -> usize {
        self.0.height()
    }

    #[getter]
    fn u(&self) -> Vec<f32> {
        self.0.u().to_vec()
    }

    #[getter]
    fn v(&self) -> Vec<f32> {
        self.0.v().to_vec()
    }

    fn magnitude(&self) -> Vec<f64> {
        self.0.magnitude().into_values()
    }

    /// Left-right mirror with `u` negated.
    fn mirrored_horizontal(&self) -> Self {
        Self(self.0.mirrored_horizontal())
    }

    fn __repr__(&self) -> String {
        format!("FlowField({}x{})", self.0.width(), self.0.height())
    }
}

fn flows(list: &[PyRef<'_, PyFlowField>]) -> Vec<afv_core::tensor::FlowField> {
    list.iter().map(|f| f.0.clone()).collect()
}

fn gray(width: usize, height: usize, data: Vec<f32>) -> PyResult<Frame> {
    Frame::new(width, height, PixelLayout::Gray, data).map_err(to_py)
}

fn video_bytes(video: &FrameSequence) -> Vec<Vec<u8>> {
    video.frames().iter().map(Frame::to_bytes).collect()
}

/// Dense flow from `prev` to `next`, both flat grayscale images.
#[pyfunction]
#[pyo3(signature = (prev, next, width, height, levels=3, window=15, iterations=3, pyramid_scale=0.5, poly_n=5, poly_sigma=1.2))]
#[allow(clippy::too_many_arguments)]
fn estimate_flow(
    prev: Vec<f32>,
    next: Vec<f32>,
    width: usize,
    height: usize,
    levels: usize,
    window: usize,
    iterations: usize,
    pyramid_scale: f64,
    poly_n: usize,
    poly_sigma: f64,
) -> PyResult<PyFlowField> {
    let params = FlowParams {
        pyramid_scale,
        levels,
        window,
        iterations,
        poly_n,
        poly_sigma,
    };
    let (a, b) = (gray(width, height, prev)?, gray(width, height, next)?);
    afv_core::flow::estimate_flow(&a, &b, &params)
        .map(PyFlowField)
        .map_err(to_py)
}

/// Smoothed coherence-gate masks, one flat list per flow field.
#[pyfunction]
#[pyo3(signature = (flows_in, d_ts, tau=0.30, r_min=0.02, beta=1.0, lambda_=0.80, window=9, epsilon=1e-6))]
#[allow(clippy::too_many_arguments)]
fn gate_video(
    flows_in: Vec<PyRef<'_, PyFlowField>>,
    d_ts: Vec<f64>,
    tau: f64,
    r_min: f64,
    beta: f64,
    lambda_: f64,
    window: usize,
    epsilon: f64,
) -> PyResult<Vec<Vec<f64>>> {
    let params = GateParams {
        epsilon,
        window,
        tau,
        r_min,
        beta,
        lambda: lambda_,
    };
    let masks = afv_core::gate::gate_video(&flows(&flows_in), &d_ts, &params).map_err(to_py)?;
    Ok(masks.into_iter().map(|m| m.into_values()).collect())
}

/// HSV motion encoding; returns BGR frames as bytes.
#[pyfunction]
#[pyo3(signature = (flows_in, p_train=1.0, gated=false, flip=false))]
fn encode_video(
    flows_in: Vec<PyRef<'_, PyFlowField>>,
    p_train: f64,
    gated: bool,
    flip: bool,
) -> PyResult<Vec<Vec<u8>>> {
    let cfg = NormalizationConfig {
        p_train,
        ..Default::default()
    };
    let gate = GateParams::default();
    let mut video = encode_hsv_video(&flows(&flows_in), &cfg, gated.then_some(&gate)).map_err(to_py)?;
    if flip {
        video = flip_horizontal_with_hue_remap(&video).map_err(to_py)?;
    }
    Ok(video_bytes(&video))
}

/// Dense-noise stimulus; grayscale frames as bytes.
#[pyfunction]
fn synthesize_noise(flows_in: Vec<PyRef<'_, PyFlowField>>, seed: u64) -> PyResult<Vec<Vec<u8>>> {
    let video = afv_core::stimulus::synthesize_noise_video(&flows(&flows_in), seed, 25.0).map_err(to_py)?;
    Ok(video_bytes(&video))
}

/// Random-dot stimulus; grayscale frames as bytes.
#[pyfunction]
#[pyo3(signature = (flows_in, seed, count=500, lifetime=8, radius=0.0))]
fn synthesize_dots(
    flows_in: Vec<PyRef<'_, PyFlowField>>,
    seed: u64,
    count: usize,
    lifetime: u32,
    radius: f64,
) -> PyResult<Vec<Vec<u8>>> {
    let params = DotParams {
        count,
        lifetime,
        radius,
        seed,
    };
    let video = afv_core::stimulus::synthesize_dot_video(&flows(&flows_in), &params, 25.0).map_err(to_py)?;
    Ok(video_bytes(&video))
}

#[pyfunction]
fn read_flo(path: PathBuf) -> PyResult<PyFlowField> {
    pipeline::read_flo(&path).map(PyFlowField).map_err(to_py)
}

#[pyfunction]
fn write_flo(path: PathBuf, flow: PyRef<'_, PyFlowField>) -> PyResult<()> {
    pipeline::write_flo(&path, &flow.0).map_err(to_py)
}

/// `(t, df, p)`.
#[pyfunction]
fn paired_t_test(x: Vec<f64>, y: Vec<f64>) -> PyResult<(f64, f64, f64)> {
    let r = stats::paired_t_test(&x, &y).map_err(to_py)?;
    Ok((r.t, r.df, r.p))
}

/// `(t, df, p)` with Welch-Satterthwaite degrees of freedom.
#[pyfunction]
fn welch_t_test(x: Vec<f64>, y: Vec<f64>) -> PyResult<(f64, f64, f64)> {
    let r = stats::welch_t_test(&x, &y).map_err(to_py)?;
    Ok((r.t, r.df, r.p))
}

/// Rows are subjects, columns conditions.
#[pyfunction]
fn rm_anova<'py>(py: Python<'py>, cells: Vec<Vec<f64>>) -> PyResult<Bound<'py, PyDict>> {
    let r = stats::rm_anova(&cells).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("F", r.f)?;
    d.set_item("df1", r.df1)?;
    d.set_item("df2", r.df2)?;
    d.set_item("p", r.p)?;
    d.set_item("partial_eta_sq", r.partial_eta_sq)?;
    Ok(d)
}

#[pyfunction]
fn friedman_test<'py>(py: Python<'py>, cells: Vec<Vec<f64>>) -> PyResult<Bound<'py, PyDict>> {
    let r = stats::friedman_test(&cells).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("chi_sq", r.chi_sq)?;
    d.set_item("df", r.df)?;
    d.set_item("p", r.p)?;
    Ok(d)
}

#[pyfunction]
fn transfer_score(acc_dense: f64, acc_dot: f64) -> f64 {
    stats::transfer_score(acc_dense, acc_dot)
}

#[pymodule]
#[pyo3(name = "afv")]
fn afv_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyFlowField>()?;
    m.add_function(wrap_pyfunction!(estimate_flow, m)?)?;
    m.add_function(wrap_pyfunction!(gate_video, m)?)?;
    m.add_function(wrap_pyfunction!(encode_video, m)?)?;
    m.add_function(wrap_pyfunction!(synthesize_noise, m)?)?;
    m.add_function(wrap_pyfunction!(synthesize_dots, m)?)?;
    m.add_function(wrap_pyfunction!(read_flo, m)?)?;
    m.add_function(wrap_pyfunction!(write_flo, m)?)?;
    m.add_function(wrap_pyfunction!(paired_t_test, m)?)?;
    m.add_function(wrap_pyfunction!(welch_t_test, m)?)?;
    m.add_function(wrap_pyfunction!(rm_anova, m)?)?;
    m.add_function(wrap_pyfunction!(friedman_test, m)?)?;
    m.add_function(wrap_pyfunction!(transfer_score, m)?)?;
    Ok(())
}
