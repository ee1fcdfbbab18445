//! JSON model files: a format tag, a version, the model configuration and
//! one record per tensor with its shape.

use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{NnError, Result};
use crate::model::{AdamState, ModelConfig, ModelState, Param};

pub const FORMAT: &str = "dowker-sslgnn";
pub const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct TensorRecord {
    name: String,
    shape: [usize; 2],
    data: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct OptimizerRecord {
    step: u64,
    m: Vec<TensorRecord>,
    v: Vec<TensorRecord>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    config: ModelConfig,
    tensors: Vec<TensorRecord>,
    optimizer: OptimizerRecord,
}

fn record(name: &str, x: &Array2<f64>) -> TensorRecord {
    TensorRecord {
        name: name.to_string(),
        shape: [x.nrows(), x.ncols()],
        data: x.iter().copied().collect(),
    }
}

fn tensor(r: TensorRecord) -> Result<(String, Array2<f64>)> {
    let [rows, cols] = r.shape;
    let x = Array2::from_shape_vec((rows, cols), r.data).map_err(|_| {
        NnError::Shape(format!(
            "tensor `{}` data does not fill shape {rows}x{cols}",
            r.name
        ))
    })?;
    Ok((r.name, x))
}

pub fn to_json(ms: &ModelState) -> Result<String> {
    let names: Vec<&str> = ms.params.iter().map(|p| p.name.as_str()).collect();
    let file = ModelFile {
        format: FORMAT.into(),
        version: VERSION,
        config: ms.config,
        tensors: ms
            .params
            .iter()
            .map(|p| record(&p.name, &p.value))
            .collect(),
        optimizer: OptimizerRecord {
            step: ms.adam.step,
            m: names
                .iter()
                .zip(&ms.adam.m)
                .map(|(n, x)| record(n, x))
                .collect(),
            v: names
                .iter()
                .zip(&ms.adam.v)
                .map(|(n, x)| record(n, x))
                .collect(),
        },
    };
    Ok(serde_json::to_string(&file)?)
}

pub fn from_json(text: &str) -> Result<ModelState> {
    let file: ModelFile = serde_json::from_str(text)?;
    if file.format != FORMAT {
        return Err(NnError::Format(file.format));
    }
    if file.version != VERSION {
        return Err(NnError::Version {
            found: file.version,
            expected: VERSION,
        });
    }
    let params = file
        .tensors
        .into_iter()
        .map(|r| tensor(r).map(|(name, value)| Param { name, value }))
        .collect::<Result<Vec<_>>>()?;
    let moments = |rs: Vec<TensorRecord>| {
        rs.into_iter()
            .map(|r| tensor(r).map(|(_, x)| x))
            .collect::<Result<Vec<_>>>()
    };
    let adam = AdamState {
        step: file.optimizer.step,
        m: moments(file.optimizer.m)?,
        v: moments(file.optimizer.v)?,
    };
    ModelState::from_params(file.config, params, Some(adam))
}

fn file_err(path: &Path) -> impl FnOnce(std::io::Error) -> NnError + '_ {
    move |source| NnError::File {
        path: path.display().to_string(),
        source,
    }
}

pub fn save_model(ms: &ModelState, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, to_json(ms)?).map_err(file_err(path))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<ModelState> {
    let path = path.as_ref();
    from_json(&std::fs::read_to_string(path).map_err(file_err(path))?)
}

/// Loads a model that must have the same architecture as `expected`.
pub fn load_model_as(path: impl AsRef<Path>, expected: &ModelConfig) -> Result<ModelState> {
    let ms = load_model(path)?;
    let (a, b) = (&ms.config, expected);
    if a.hidden != b.hidden
        || a.layers != b.layers
        || a.classes != b.classes
        || a.shared_branches != b.shared_branches
    {
        return Err(NnError::Shape(format!(
            "model file has hidden={} layers={} classes={} shared={}, expected hidden={} layers={} classes={} shared={}",
            a.hidden, a.layers, a.classes, a.shared_branches, b.hidden, b.layers, b.classes, b.shared_branches
        )));
    }
    Ok(ms)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let mut ms = ModelState::new(ModelConfig {
            hidden: 5,
            layers: 2,
            seed: 9,
            ..Default::default()
        })
        .unwrap();
        ms.adam.step = 7;
        ms.adam.m[0][[0, 0]] = 1.0 / 3.0;
        let back = from_json(&to_json(&ms).unwrap()).unwrap();
        assert_eq!(back, ms);
        for (a, b) in back.params.iter().zip(&ms.params) {
            assert!(a
                .value
                .iter()
                .zip(b.value.iter())
                .all(|(x, y)| x.to_bits() == y.to_bits()));
        }
    }

    #[test]
    fn rejects_bad_headers_and_shapes() {
        let ms = ModelState::new(ModelConfig {
            hidden: 4,
            layers: 1,
            ..Default::default()
        })
        .unwrap();
        let text = to_json(&ms).unwrap();
        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v["version"] = 2.into();
        assert!(matches!(
            from_json(&v.to_string()),
            Err(NnError::Version { found: 2, .. })
        ));
        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v["format"] = "other".into();
        assert!(matches!(from_json(&v.to_string()), Err(NnError::Format(_))));
        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v["config"]["hidden"] = 8.into();
        assert!(matches!(from_json(&v.to_string()), Err(NnError::Shape(_))));
        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v["tensors"][0]["shape"] = serde_json::json!([3, 3]);
        assert!(matches!(from_json(&v.to_string()), Err(NnError::Shape(_))));
    }

    #[test]
    fn architecture_check_on_load() {
        let dir = std::env::temp_dir().join(format!("dowker-nn-io-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("m.json");
        let cfg = ModelConfig {
            hidden: 4,
            layers: 1,
            ..Default::default()
        };
        save_model(&ModelState::new(cfg).unwrap(), &path).unwrap();
        assert!(load_model_as(&path, &cfg).is_ok());
        let wider = ModelConfig { hidden: 8, ..cfg };
        assert!(matches!(
            load_model_as(&path, &wider),
            Err(NnError::Shape(_))
        ));
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
