//! Text checkpoint of named parameter arrays.
//!
//! ```text
//! papi-checkpoint v1
//! tensor encoder.0.weight 8 64
//! <rows*cols values, row-major, space separated>
//! tensor encoder.0.bias 1 64
//! ...
//! tensor prototypes 4 16
//! ...
//! ```
//!
//! Each `tensor <name> <rows> <cols>` manifest line is followed by one line of
//! values in shortest round-trip decimal form, so reloading is bit-exact.
//! Layers appear as `encoder.{i}`, `projector.{0,1}` and `classifier`, each
//! with `.weight` (`d_in × d_out`) and `.bias` (`1 × d_out`) tensors.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use super::params::ModelParams;
use super::prototypes::Prototypes;
use crate::error::{Error, Result};
use crate::numerics::{Linear, RealMatrix};

const MAGIC: &str = "papi-checkpoint v1";

pub fn write_checkpoint(params: &ModelParams, prototypes: &Prototypes) -> String {
    let mut out = String::from(MAGIC);
    out.push('\n');
    let mut push = |name: &str, rows: usize, cols: usize, values: &[f64]| {
        out.push_str(&format!("tensor {name} {rows} {cols}\n"));
        let line: Vec<String> = values.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    };
    for (name, layer) in params.named_layers() {
        let (r, c) = layer.weights.shape();
        push(&format!("{name}.weight"), r, c, layer.weights.as_slice());
        push(&format!("{name}.bias"), 1, layer.bias.len(), &layer.bias);
    }
    let m = prototypes.matrix();
    push("prototypes", m.rows(), m.cols(), m.as_slice());
    out
}

pub fn read_checkpoint(text: &str) -> Result<(ModelParams, Prototypes)> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, l)) if l.trim() == MAGIC => {}
        _ => {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected `{MAGIC}`"),
            })
        }
    }
    let mut tensors: BTreeMap<String, RealMatrix> = BTreeMap::new();
    while let Some((line_no, header)) = lines.next() {
        if header.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = header.split_whitespace().collect();
        let bad = |message: String| Error::Parse { line: line_no, message };
        if parts.len() != 4 || parts[0] != "tensor" {
            return Err(bad(format!("expected `tensor <name> <rows> <cols>`, found `{header}`")));
        }
        let rows: usize = parts[2].parse().map_err(|_| bad(format!("bad row count `{}`", parts[2])))?;
        let cols: usize = parts[3].parse().map_err(|_| bad(format!("bad column count `{}`", parts[3])))?;
        let (value_line, values) = lines.next().ok_or_else(|| bad("missing values line".into()))?;
        let data = values
            .split_whitespace()
            .map(|v| {
                v.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| Error::Parse {
                    line: value_line,
                    message: format!("bad value `{v}`"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let m = RealMatrix::from_vec(rows, cols, data).map_err(|_| Error::Parse {
            line: value_line,
            message: format!("expected {} values for `{}`", rows * cols, parts[1]),
        })?;
        tensors.insert(parts[1].to_owned(), m);
    }

    let mut take_layer = |prefix: &str| -> Result<Option<Linear>> {
        let (w, b) = (tensors.remove(&format!("{prefix}.weight")), tensors.remove(&format!("{prefix}.bias")));
        match (w, b) {
            (Some(weights), Some(bias)) => Ok(Some(Linear {
                weights,
                bias: bias.into_vec(),
            })),
            (None, None) => Ok(None),
            _ => Err(Error::MissingColumn(format!("{prefix}.weight/.bias"))),
        }
    };
    let mut encoder = Vec::new();
    while let Some(l) = take_layer(&format!("encoder.{}", encoder.len()))? {
        encoder.push(l);
    }
    let mut projector = Vec::new();
    for i in 0..2 {
        projector.push(take_layer(&format!("projector.{i}"))?.ok_or_else(|| Error::MissingColumn(format!("projector.{i}")))?);
    }
    let classifier = take_layer("classifier")?.ok_or_else(|| Error::MissingColumn("classifier".into()))?;
    let protos = tensors.remove("prototypes").ok_or_else(|| Error::MissingColumn("prototypes".into()))?;
    if let Some(extra) = tensors.keys().next() {
        return Err(Error::InvalidArgument(format!("unexpected tensor `{extra}` in checkpoint")));
    }
    let params = ModelParams {
        encoder,
        projector,
        classifier,
    };
    let dims = params.dims()?;
    if protos.cols() != dims.projection_dim || protos.rows() != dims.num_classes {
        return Err(Error::Dimension {
            op: "checkpoint prototypes",
            left: protos.shape(),
            right: (dims.num_classes, dims.projection_dim),
        });
    }
    Ok((params, Prototypes::from_matrix(protos)?))
}

pub fn save_checkpoint(path: &Path, params: &ModelParams, prototypes: &Prototypes) -> Result<()> {
    fs::write(path, write_checkpoint(params, prototypes)).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<(ModelParams, Prototypes)> {
    read_checkpoint(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}
