//! Python module `paraboost`: manifests, feature extraction, training,
//! prediction, cross-validation and evaluation. Configurations cross the
//! boundary as JSON strings with the same schema as the Rust types.

use std::path::PathBuf;

use paraboost_core::dataset::{load_manifest, ViewPair, ViewSet};
use paraboost_core::depth::{ndse as core_ndse, CameraConfig, DnoseProfile};
use paraboost_core::eval::{self, EvalReport};
use paraboost_core::features::{FeatureConfig, FeatureExtractor, FeatureId};
use paraboost_core::image::{DepthMap, Image, Texture};
use paraboost_core::paraboost::{self as pb, CvConfig, FoldPolicy, ParaboostConfig};
use paraboost_core::synth::{synthetic_dataset as core_synthetic, write_dataset, SyntheticSpec};
use paraboost_core::Error;
use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io { .. } | Error::Load { .. } => PyIOError::new_err(e.to_string()),
        Error::InvalidParameter(_)
        | Error::Camera(_)
        | Error::UnknownFeature { .. }
        | Error::Manifest { .. }
        | Error::SizeMismatch { .. }
        | Error::TooSmall { .. }
        | Error::DimensionMismatch { .. }
        | Error::InvalidRaster(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn json_or_default<T: serde::de::DeserializeOwned + Default>(json: Option<&str>) -> PyResult<T> {
    match json {
        Some(text) => serde_json::from_str(text).map_err(|e| PyValueError::new_err(format!("bad config JSON: {e}"))),
        None => Ok(T::default()),
    }
}

fn image(rows: Vec<Vec<f64>>) -> PyResult<Image> {
    let h = rows.len();
    let w = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != w) {
        return Err(PyValueError::new_err("image rows must all have the same length"));
    }
    Image::new(w, h, rows.concat()).map_err(to_py)
}

fn report_dict<'py>(py: Python<'py>, r: &EvalReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("n", r.n)?;
    d.set_item("skipped", r.skipped)?;
    d.set_item("pcc", r.pcc)?;
    d.set_item("srocc", r.srocc)?;
    d.set_item("rmse", r.rmse)?;
    let b = &r.logistic;
    d.set_item("logistic", (b.beta1, b.beta2, b.beta3, b.beta4))?;
    Ok(d)
}

/// One row of a dataset manifest.
#[pyclass(frozen, get_all, module = "paraboost")]
struct Sample {
    id: String,
    source_tag: String,
    distortion_tag: String,
    mos: f64,
    view_count: usize,
    has_depth: bool,
}

#[pymethods]
impl Sample {
    fn __repr__(&self) -> String {
        format!("Sample(id={:?}, mos={}, views={}, depth={})", self.id, self.mos, self.view_count, self.has_depth)
    }
}

#[pyfunction]
fn read_manifest(path: PathBuf) -> PyResult<Vec<Sample>> {
    Ok(load_manifest(path)
        .map_err(to_py)?
        .into_iter()
        .map(|s| Sample {
            view_count: s.view_count(),
            has_depth: s.has_depth(),
            id: s.id,
            source_tag: s.source_tag,
            distortion_tag: s.distortion_tag,
            mos: s.mos,
        })
        .collect())
}

/// Names accepted by `compute_features`, in canonical order.
#[pyfunction]
fn feature_names() -> Vec<&'static str> {
    FeatureId::ALL.iter().map(|f| f.name()).collect()
}

/// Features of one grayscale pair given as lists of rows; `None` selects
/// every texture feature.
#[pyfunction]
#[pyo3(signature = (reference, distorted, names=None, config_json=None))]
fn compute_features(
    reference: Vec<Vec<f64>>,
    distorted: Vec<Vec<f64>>,
    names: Option<Vec<String>>,
    config_json: Option<&str>,
) -> PyResult<Vec<(String, f64)>> {
    let ids: Vec<FeatureId> = match names {
        Some(n) => n.iter().map(|s| s.parse()).collect::<Result<_, Error>>().map_err(to_py)?,
        None => FeatureId::ALL.iter().copied().filter(|f| !f.needs_depth()).collect(),
    };
    let extractor = FeatureExtractor::new(json_or_default::<FeatureConfig>(config_json)?).map_err(to_py)?;
    let pair = ViewPair {
        reference: Texture::from_gray(image(reference)?),
        distorted: Texture::from_gray(image(distorted)?),
    };
    // A stereo set of two identical views; values come from the first.
    let views = ViewSet::new(vec![pair.clone(), pair], None).map_err(to_py)?;
    let values = extractor.compute_view(&ids, &views, 0).map_err(to_py)?;
    Ok(ids.iter().map(|f| f.name().to_string()).zip(values).collect())
}

/// Inclusive level interval per depth level for a camera given as JSON.
#[pyfunction]
#[pyo3(signature = (camera_json=None))]
fn dnose_profile(camera_json: Option<&str>) -> PyResult<Vec<(u8, u8)>> {
    let cam: CameraConfig = json_or_default(camera_json)?;
    let p = DnoseProfile::build(&cam).map_err(to_py)?;
    Ok((0..=255u8).map(|v| p.interval(v)).collect())
}

#[pyfunction]
#[pyo3(signature = (reference, distorted, camera_json=None))]
fn ndse(reference: Vec<Vec<u8>>, distorted: Vec<Vec<u8>>, camera_json: Option<&str>) -> PyResult<f64> {
    let depth = |rows: Vec<Vec<u8>>| {
        let (h, w) = (rows.len(), rows.first().map_or(0, Vec::len));
        DepthMap::new(w, h, rows.concat()).map_err(to_py)
    };
    let p = DnoseProfile::build(&json_or_default::<CameraConfig>(camera_json)?).map_err(to_py)?;
    core_ndse(&depth(reference)?, &depth(distorted)?, &p).map_err(to_py)
}

/// PCC, SROCC and RMSE after the logistic remap.
#[pyfunction]
fn evaluate<'py>(py: Python<'py>, predicted: Vec<f64>, mos: Vec<f64>) -> PyResult<Bound<'py, PyDict>> {
    report_dict(py, &eval::evaluate(&predicted, &mos).map_err(to_py)?)
}

#[pyfunction]
fn pcc(a: Vec<f64>, b: Vec<f64>) -> PyResult<Option<f64>> {
    eval::pcc(&a, &b).map_err(to_py)
}

#[pyfunction]
fn srocc(a: Vec<f64>, b: Vec<f64>) -> PyResult<Option<f64>> {
    eval::srocc(&a, &b).map_err(to_py)
}

/// Writes a synthetic blur/noise/blocking ladder dataset under `dir` and
/// returns the manifest path.
#[pyfunction]
#[pyo3(signature = (dir, sources=6, levels=5, views=2, depth=false, seed=1))]
fn synthetic_dataset(dir: PathBuf, sources: usize, levels: usize, views: usize, depth: bool, seed: u64) -> PyResult<PathBuf> {
    let spec = SyntheticSpec {
        sources,
        levels,
        views,
        depth,
        seed,
        ..SyntheticSpec::default()
    };
    write_dataset(&dir, &core_synthetic(&spec).map_err(to_py)?).map_err(to_py)?;
    Ok(dir.join("manifest.csv"))
}

/// A trained scorer-plus-fuser bundle.
#[pyclass(module = "paraboost")]
struct Model {
    inner: pb::ParaboostModel,
}

#[pymethods]
impl Model {
    /// Trains on every usable sample of a manifest.
    #[staticmethod]
    #[pyo3(signature = (manifest, config_json=None))]
    fn train(py: Python<'_>, manifest: PathBuf, config_json: Option<&str>) -> PyResult<Self> {
        let cfg: ParaboostConfig = json_or_default(config_json)?;
        let samples = load_manifest(manifest).map_err(to_py)?;
        let out = py.detach(|| pb::train(&samples, &cfg)).map_err(to_py)?;
        Ok(Model { inner: out.model })
    }

    #[staticmethod]
    fn load(dir: PathBuf) -> PyResult<Self> {
        Ok(Model {
            inner: pb::ParaboostModel::load(dir).map_err(to_py)?,
        })
    }

    fn save(&self, dir: PathBuf) -> PyResult<()> {
        self.inner.save(dir).map_err(to_py)
    }

    #[getter]
    fn scorer_ids(&self) -> Vec<u32> {
        // u8 vectors would surface as bytes
        self.inner.scorer_ids().into_iter().map(u32::from).collect()
    }

    /// `(sample_id, predicted_mos)` for every sample of a manifest.
    fn predict(&self, py: Python<'_>, manifest: PathBuf) -> PyResult<Vec<(String, f64)>> {
        let samples = load_manifest(manifest).map_err(to_py)?;
        let extractor = self.inner.extractor().map_err(to_py)?;
        py.detach(|| {
            samples
                .iter()
                .map(|s| Ok((s.id.clone(), self.inner.predict(s, &extractor)?)))
                .collect::<Result<Vec<_>, Error>>()
        })
        .map_err(to_py)
    }
}

/// K-fold cross-validation; returns the pooled report, per-scorer reports
/// and `(sample_id, fold, mos, predicted)` rows.
#[pyfunction]
#[pyo3(signature = (manifest, folds=10, policy="random", seed=0, config_json=None))]
fn cross_validate<'py>(
    py: Python<'py>,
    manifest: PathBuf,
    folds: usize,
    policy: &str,
    seed: u64,
    config_json: Option<&str>,
) -> PyResult<Bound<'py, PyDict>> {
    let mut cfg: ParaboostConfig = json_or_default(config_json)?;
    cfg.seed = seed;
    let cv = CvConfig {
        folds,
        policy: policy.parse::<FoldPolicy>().map_err(to_py)?,
        seed,
    };
    let samples = load_manifest(manifest).map_err(to_py)?;
    let out = py.detach(|| pb::cross_validate(&samples, &cfg, &cv)).map_err(to_py)?;
    let d = report_dict(py, &out.report)?;
    let scorers = PyDict::new(py);
    for (id, r) in &out.scorer_reports {
        scorers.set_item(id, report_dict(py, r)?)?;
    }
    d.set_item("scorers", scorers)?;
    let rows: Vec<(String, usize, f64, f64)> = out
        .predictions
        .into_iter()
        .map(|p| (p.sample_id, p.fold, p.mos, p.predicted))
        .collect();
    d.set_item("predictions", rows)?;
    Ok(d)
}

#[pymodule]
fn paraboost(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Sample>()?;
    m.add_class::<Model>()?;
    m.add_function(wrap_pyfunction!(read_manifest, m)?)?;
    m.add_function(wrap_pyfunction!(feature_names, m)?)?;
    m.add_function(wrap_pyfunction!(compute_features, m)?)?;
    m.add_function(wrap_pyfunction!(dnose_profile, m)?)?;
    m.add_function(wrap_pyfunction!(ndse, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(pcc, m)?)?;
    m.add_function(wrap_pyfunction!(srocc, m)?)?;
    m.add_function(wrap_pyfunction!(synthetic_dataset, m)?)?;
    m.add_function(wrap_pyfunction!(cross_validate, m)?)?;
    Ok(())
}
