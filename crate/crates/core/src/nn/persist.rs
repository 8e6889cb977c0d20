//! Binary model files.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic        8 bytes   "RATLMODL"
//! version      u32
//! header_len   u32
//! header       JSON      domain, network config, train config, layer shapes
//! scaling      f64 x 2w  (offset, scale) per input feature
//! per layer    f64 x (fan_in * fan_out) weights, then f64 x fan_out biases
//! ```
//!
//! Parameters are stored as IEEE-754 `f64`, so `f64` models round-trip
//! bit-exactly and `f32` models widen losslessly.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    FeatureScaling, Layer, ModelParams, NetworkConfig, NnError, Scalar, TrainConfig, TrainedModel,
};
use crate::domain::DomainId;

pub const MODEL_MAGIC: &[u8; 8] = b"RATLMODL";
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Header {
    domain: DomainId,
    scalar: String,
    network: NetworkConfig,
    train: TrainConfig,
    layers: Vec<(usize, usize)>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> NnError + '_ {
    move |source| NnError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn encode_model<T: Scalar>(model: &TrainedModel<T>) -> Vec<u8> {
    let header = Header {
        domain: model.domain,
        scalar: T::NAME.to_string(),
        network: model.config.clone(),
        train: model.train_config.clone(),
        layers: model.params().shapes(),
    };
    let json = serde_json::to_vec(&header).expect("header serializes");
    let mut out = Vec::new();
    out.extend_from_slice(MODEL_MAGIC);
    out.extend_from_slice(&MODEL_FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(json.len() as u32).to_le_bytes());
    out.extend_from_slice(&json);
    for s in model.scaling() {
        out.extend_from_slice(&s.offset.to_le_bytes());
        out.extend_from_slice(&s.scale.to_le_bytes());
    }
    for v in model.params().iter() {
        out.extend_from_slice(&v.to_f64().expect("finite parameter").to_le_bytes());
    }
    out
}

pub fn save_model<T: Scalar>(model: &TrainedModel<T>, path: &Path) -> Result<(), NnError> {
    let mut file = std::fs::File::create(path).map_err(io_err(path))?;
    file.write_all(&encode_model(model)).map_err(io_err(path))
}

struct Cursor<'a> {
    bytes: &'a [u8],
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], NnError> {
        if self.bytes.len() < n {
            return Err(NnError::Format("truncated file".into()));
        }
        let (head, rest) = self.bytes.split_at(n);
        self.bytes = rest;
        Ok(head)
    }

    fn u32(&mut self) -> Result<u32, NnError> {
        Ok(u32::from_le_bytes(
            self.take(4)?.try_into().expect("4 bytes"),
        ))
    }

    fn f64(&mut self) -> Result<f64, NnError> {
        Ok(f64::from_le_bytes(
            self.take(8)?.try_into().expect("8 bytes"),
        ))
    }
}

pub fn decode_model<T: Scalar>(bytes: &[u8]) -> Result<TrainedModel<T>, NnError> {
    let mut cur = Cursor { bytes };
    if cur.take(8)? != MODEL_MAGIC {
        return Err(NnError::Format("bad magic".into()));
    }
    let version = cur.u32()?;
    if version != MODEL_FORMAT_VERSION {
        return Err(NnError::Format(format!("unsupported version {version}")));
    }
    let header_len = cur.u32()? as usize;
    let header: Header = serde_json::from_slice(cur.take(header_len)?)
        .map_err(|e| NnError::Format(format!("header: {e}")))?;
    if header.layers != header.network.layer_shapes() {
        return Err(NnError::ShapeMismatch);
    }
    let scaling = (0..header.network.input_width)
        .map(|_| {
            Ok(FeatureScaling {
                offset: cur.f64()?,
                scale: cur.f64()?,
            })
        })
        .collect::<Result<Vec<_>, NnError>>()?;
    let mut layers = Vec::with_capacity(header.layers.len());
    for &(fan_in, fan_out) in &header.layers {
        let mut layer = Layer::<T>::zeros(fan_in, fan_out);
        for v in layer.weights.iter_mut().chain(layer.bias.iter_mut()) {
            *v = T::of(cur.f64()?);
        }
        layers.push(layer);
    }
    if !cur.bytes.is_empty() {
        return Err(NnError::Format("trailing bytes".into()));
    }
    TrainedModel::new(
        header.domain,
        header.network,
        header.train,
        scaling,
        ModelParams { layers },
    )
}

pub fn load_model<T: Scalar>(path: &Path) -> Result<TrainedModel<T>, NnError> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(io_err(path))?;
    decode_model(&bytes)
}
