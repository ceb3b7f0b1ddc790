//! Weight-only checkpoints.
//!
//! Layout: the magic `SCNV`, a little-endian `u32` format version, a
//! little-endian `u32` header length, that many bytes of UTF-8 JSON header,
//! then every parameter as raw little-endian `f64`s in header order. Header
//! offsets count bytes from the start of the parameter data.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use scnv_core::nn::{Activation, LayerSpec, Model, ModelConfig, ParamSet};
use scnv_core::Tensor;

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"SCNV";
pub const VERSION: u32 = 1;

/// Training facts stored next to the weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub seed: u64,
    pub epochs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum LayerRecord {
    Conv2d { kernel: usize, filters: usize },
    MaxPool2,
    Flatten,
    Dense { units: usize },
    Relu,
    LeakyRelu { slope: f64 },
    Sigmoid,
}

impl From<&LayerSpec> for LayerRecord {
    fn from(spec: &LayerSpec) -> Self {
        match *spec {
            LayerSpec::Conv2d { kernel, filters } => LayerRecord::Conv2d { kernel, filters },
            LayerSpec::MaxPool2 => LayerRecord::MaxPool2,
            LayerSpec::Flatten => LayerRecord::Flatten,
            LayerSpec::Dense { units } => LayerRecord::Dense { units },
            LayerSpec::Activation(Activation::Relu) => LayerRecord::Relu,
            LayerSpec::Activation(Activation::LeakyRelu { slope }) => LayerRecord::LeakyRelu { slope },
            LayerSpec::Activation(Activation::Sigmoid) => LayerRecord::Sigmoid,
        }
    }
}

impl From<&LayerRecord> for LayerSpec {
    fn from(rec: &LayerRecord) -> Self {
        match *rec {
            LayerRecord::Conv2d { kernel, filters } => LayerSpec::Conv2d { kernel, filters },
            LayerRecord::MaxPool2 => LayerSpec::MaxPool2,
            LayerRecord::Flatten => LayerSpec::Flatten,
            LayerRecord::Dense { units } => LayerSpec::Dense { units },
            LayerRecord::Relu => LayerSpec::Activation(Activation::Relu),
            LayerRecord::LeakyRelu { slope } => LayerSpec::Activation(Activation::LeakyRelu { slope }),
            LayerRecord::Sigmoid => LayerSpec::Activation(Activation::Sigmoid),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Architecture {
    input_shape: [usize; 3],
    layers: Vec<LayerRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ParamRecord {
    name: String,
    shape: Vec<usize>,
    offset: u64,
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    architecture: Architecture,
    seed: u64,
    epochs: usize,
    parameters: Vec<ParamRecord>,
}

pub fn encode_checkpoint(model: &Model, meta: CheckpointMeta) -> Result<Vec<u8>> {
    let config = model.config();
    let mut offset = 0u64;
    let parameters = model
        .params()
        .iter()
        .map(|(name, t)| {
            let rec = ParamRecord {
                name: name.to_string(),
                shape: t.shape().to_vec(),
                offset,
            };
            offset += 8 * t.len() as u64;
            rec
        })
        .collect();
    let header = Header {
        architecture: Architecture {
            input_shape: config.input_shape,
            layers: config.layers.iter().map(LayerRecord::from).collect(),
        },
        seed: meta.seed,
        epochs: meta.epochs,
        parameters,
    };
    let json = serde_json::to_vec(&header).map_err(|e| Error::checkpoint("header", e.to_string()))?;
    let header_len =
        u32::try_from(json.len()).map_err(|_| Error::checkpoint("header length", "header exceeds 4 GiB"))?;

    let mut out = Vec::with_capacity(12 + json.len() + offset as usize);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&header_len.to_le_bytes());
    out.extend_from_slice(&json);
    for t in model.params().tensors() {
        for v in t.data() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

fn take<'a>(bytes: &'a [u8], at: &mut usize, n: usize, field: &str) -> Result<&'a [u8]> {
    let end = at.checked_add(n).filter(|&e| e <= bytes.len()).ok_or_else(|| {
        Error::checkpoint(
            field,
            format!("truncated: need {n} bytes at offset {at}, file has {}", bytes.len()),
        )
    })?;
    let slice = &bytes[*at..end];
    *at = end;
    Ok(slice)
}

fn read_u32(bytes: &[u8], at: &mut usize, field: &str) -> Result<u32> {
    let raw = take(bytes, at, 4, field)?;
    Ok(u32::from_le_bytes(raw.try_into().expect("four bytes")))
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<(Model, CheckpointMeta)> {
    let mut at = 0;
    let magic = take(bytes, &mut at, 4, "magic")?;
    if magic != MAGIC {
        return Err(Error::checkpoint("magic", format!("expected \"SCNV\", found {magic:?}")));
    }
    let version = read_u32(bytes, &mut at, "version")?;
    if version != VERSION {
        return Err(Error::checkpoint(
            "version",
            format!("unsupported version {version}, this build reads version {VERSION}"),
        ));
    }
    let header_len = read_u32(bytes, &mut at, "header length")? as usize;
    let json = take(bytes, &mut at, header_len, "header")?;
    let header: Header = serde_json::from_slice(json).map_err(|e| Error::checkpoint("header", e.to_string()))?;

    let config = ModelConfig {
        input_shape: header.architecture.input_shape,
        layers: header.architecture.layers.iter().map(LayerSpec::from).collect(),
    };
    let layout = Model::zeros(config.clone()).map_err(|e| Error::checkpoint("architecture", e.to_string()))?;
    let expected = layout.params();
    if header.parameters.len() != expected.len() {
        return Err(Error::checkpoint(
            "parameters",
            format!(
                "architecture has {} parameter tensors, header lists {}",
                expected.len(),
                header.parameters.len()
            ),
        ));
    }

    let data = &bytes[at..];
    let mut offset = 0u64;
    let mut names = Vec::with_capacity(expected.len());
    let mut tensors = Vec::with_capacity(expected.len());
    for (rec, (name, want)) in header.parameters.iter().zip(expected.iter()) {
        let field = format!("parameter {}", rec.name);
        if rec.name != name {
            return Err(Error::checkpoint(&field, format!("expected parameter {name} at this position")));
        }
        if rec.shape != want.shape() {
            return Err(Error::checkpoint(
                &field,
                format!("shape {:?} does not match architecture shape {:?}", rec.shape, want.shape()),
            ));
        }
        if rec.offset != offset {
            return Err(Error::checkpoint(&field, format!("offset {} where {offset} was expected", rec.offset)));
        }
        let mut cursor = offset as usize;
        let raw = take(data, &mut cursor, 8 * want.len(), &field)?;
        let values = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("eight bytes")))
            .collect();
        offset = cursor as u64;
        names.push(rec.name.clone());
        tensors.push(Tensor::from_vec(want.shape(), values)?);
    }
    if offset as usize != data.len() {
        return Err(Error::checkpoint(
            "parameter data",
            format!("{} trailing bytes after the last parameter", data.len() - offset as usize),
        ));
    }
    let model = Model::with_params(config, ParamSet::new(names, tensors)?)?;
    Ok((
        model,
        CheckpointMeta {
            seed: header.seed,
            epochs: header.epochs,
        },
    ))
}

pub fn save_checkpoint(model: &Model, meta: CheckpointMeta, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_checkpoint(model, meta)?).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<(Model, CheckpointMeta)> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_checkpoint(&bytes)
}
