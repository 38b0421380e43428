//! Per-epoch diagnostics and their CSV form.

use std::io::{Read, Write};

use crate::error::{Error, Result};

pub const METRICS_HEADER: [&str; 11] = [
    "epoch",
    "cla_loss",
    "ali_loss",
    "train_acc",
    "test_acc",
    "proto_acc",
    "disamb_purity",
    "lin_right_proto_wrong",
    "proto_right_lin_wrong",
    "intra_sim",
    "inter_sim",
];

#[derive(Debug, Clone, PartialEq)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub mean_cla_loss: f64,
    pub mean_ali_loss: f64,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
    pub proto_accuracy: f64,
    pub disambiguation_purity: f64,
    pub linear_right_proto_wrong: usize,
    pub proto_right_linear_wrong: usize,
    /// Empty when the evaluation set has no class with two samples.
    pub intra_class_sim: Option<f64>,
    pub inter_class_sim: f64,
}

pub fn write_metrics_csv<W: Write>(metrics: &[EpochMetrics], mut out: W) -> Result<()> {
    let mut text = METRICS_HEADER.join(",");
    text.push('\n');
    for m in metrics {
        let intra = m.intra_class_sim.map(|v| v.to_string()).unwrap_or_default();
        text.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            m.epoch,
            m.mean_cla_loss,
            m.mean_ali_loss,
            m.train_accuracy,
            m.test_accuracy,
            m.proto_accuracy,
            m.disambiguation_purity,
            m.linear_right_proto_wrong,
            m.proto_right_linear_wrong,
            intra,
            m.inter_class_sim
        ));
    }
    out.write_all(text.as_bytes()).map_err(|e| Error::Parse {
        line: 0,
        message: e.to_string(),
    })
}

pub fn metrics_to_csv_string(metrics: &[EpochMetrics]) -> String {
    let mut buf = Vec::new();
    write_metrics_csv(metrics, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

pub fn read_metrics_csv<R: Read>(input: R) -> Result<Vec<EpochMetrics>> {
    let mut reader = csv::ReaderBuilder::new().from_reader(input);
    let header = reader.headers().map_err(|e| Error::Parse {
        line: 1,
        message: e.to_string(),
    })?;
    if header.iter().collect::<Vec<_>>() != METRICS_HEADER {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header `{}`", METRICS_HEADER.join(",")),
        });
    }
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let float = |i: usize| {
            record[i].parse::<f64>().map_err(|_| Error::Parse {
                line,
                message: format!("bad value `{}` in column {}", &record[i], METRICS_HEADER[i]),
            })
        };
        let count = |i: usize| {
            record[i].parse::<usize>().map_err(|_| Error::Parse {
                line,
                message: format!("bad count `{}` in column {}", &record[i], METRICS_HEADER[i]),
            })
        };
        out.push(EpochMetrics {
            epoch: count(0)?,
            mean_cla_loss: float(1)?,
            mean_ali_loss: float(2)?,
            train_accuracy: float(3)?,
            test_accuracy: float(4)?,
            proto_accuracy: float(5)?,
            disambiguation_purity: float(6)?,
            linear_right_proto_wrong: count(7)?,
            proto_right_linear_wrong: count(8)?,
            intra_class_sim: if record[9].is_empty() { None } else { Some(float(9)?) },
            inter_class_sim: float(10)?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(epoch: usize) -> EpochMetrics {
        EpochMetrics {
            epoch,
            mean_cla_loss: 0.123456789,
            mean_ali_loss: 1.5,
            train_accuracy: 0.75,
            test_accuracy: 0.8,
            proto_accuracy: 0.7,
            disambiguation_purity: 0.9,
            linear_right_proto_wrong: 3,
            proto_right_linear_wrong: 1,
            intra_class_sim: if epoch == 0 { None } else { Some(0.6) },
            inter_class_sim: -0.1,
        }
    }

    #[test]
    fn csv_round_trip() {
        let m = vec![sample(0), sample(1)];
        let text = metrics_to_csv_string(&m);
        assert!(text.starts_with("epoch,cla_loss,ali_loss,train_acc,test_acc,proto_acc,disamb_purity,"));
        assert_eq!(read_metrics_csv(text.as_bytes()).unwrap(), m);
    }

    #[test]
    fn wrong_header_rejected() {
        assert!(read_metrics_csv("epoch,loss\n0,1\n".as_bytes()).is_err());
    }
}
