use crate::error::{Error, Result};
use crate::numerics::RealMatrix;

/// One partially labeled instance. `true_label` is hidden from the training
/// losses; only generators and evaluation read it.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub features: Vec<f64>,
    pub true_label: usize,
    /// Sorted, deduplicated class indices. Always contains `true_label`.
    pub candidates: Vec<usize>,
}

impl Example {
    pub fn new(features: Vec<f64>, true_label: usize, mut candidates: Vec<usize>) -> Result<Self> {
        candidates.sort_unstable();
        candidates.dedup();
        if candidates.is_empty() {
            return Err(Error::EmptyCandidates);
        }
        if candidates.binary_search(&true_label).is_err() {
            return Err(Error::Support(format!(
                "true label {true_label} not in candidates {candidates:?}"
            )));
        }
        Ok(Example {
            features,
            true_label,
            candidates,
        })
    }

    pub fn fully_labeled(features: Vec<f64>, label: usize) -> Self {
        Example {
            features,
            true_label: label,
            candidates: vec![label],
        }
    }

    pub fn is_candidate(&self, class: usize) -> bool {
        self.candidates.binary_search(&class).is_ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidateKind {
    Uniform,
    InstanceDependent,
}

impl CandidateKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CandidateKind::Uniform => "uniform",
            CandidateKind::InstanceDependent => "instance_dependent",
        }
    }
}

impl std::str::FromStr for CandidateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(CandidateKind::Uniform),
            "instance_dependent" => Ok(CandidateKind::InstanceDependent),
            other => Err(Error::InvalidArgument(format!("unknown candidate kind `{other}`"))),
        }
    }
}

/// How a dataset's candidate sets were produced. `q` is NaN-free; it is 0 for
/// instance-dependent generation, where flip rates come from the oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationMeta {
    pub kind: CandidateKind,
    pub q: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PllDataset {
    examples: Vec<Example>,
    num_classes: usize,
    feature_dim: usize,
    pub generation_meta: Option<GenerationMeta>,
}

impl PllDataset {
    pub fn new(examples: Vec<Example>, num_classes: usize) -> Result<Self> {
        if num_classes < 2 {
            return Err(Error::InvalidArgument(format!("need at least 2 classes, got {num_classes}")));
        }
        let feature_dim = examples.first().map_or(0, |e| e.features.len());
        for (i, e) in examples.iter().enumerate() {
            if e.features.len() != feature_dim {
                return Err(Error::Dimension {
                    op: "dataset features",
                    left: (i, e.features.len()),
                    right: (0, feature_dim),
                });
            }
            if e.true_label >= num_classes || e.candidates.iter().any(|&c| c >= num_classes) {
                return Err(Error::InvalidArgument(format!("example {i} has a class index >= {num_classes}")));
            }
            if e.candidates.is_empty() {
                return Err(Error::EmptyCandidates);
            }
            if !e.is_candidate(e.true_label) {
                return Err(Error::Support(format!("example {i}: true label missing from candidates")));
            }
            if e.features.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("features of example {i}")));
            }
        }
        Ok(PllDataset {
            examples,
            num_classes,
            feature_dim,
            generation_meta: None,
        })
    }

    pub fn with_meta(mut self, meta: GenerationMeta) -> Self {
        self.generation_meta = Some(meta);
        self
    }

    pub fn examples(&self) -> &[Example] {
        &self.examples
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn is_fully_labeled(&self) -> bool {
        self.examples.iter().all(|e| e.candidates.len() == 1)
    }

    pub fn features(&self) -> RealMatrix {
        let mut data = Vec::with_capacity(self.len() * self.feature_dim);
        for e in &self.examples {
            data.extend_from_slice(&e.features);
        }
        RealMatrix::from_vec(self.len(), self.feature_dim, data).expect("uniform feature dim")
    }

    pub fn true_labels(&self) -> Vec<usize> {
        self.examples.iter().map(|e| e.true_label).collect()
    }

    pub fn mean_candidate_count(&self) -> f64 {
        let total: usize = self.examples.iter().map(|e| e.candidates.len()).sum();
        total as f64 / self.len().max(1) as f64
    }

    /// Same features and labels with every candidate set reset to `{true_label}`.
    pub fn to_fully_labeled(&self) -> PllDataset {
        PllDataset {
            examples: self
                .examples
                .iter()
                .map(|e| Example::fully_labeled(e.features.clone(), e.true_label))
                .collect(),
            num_classes: self.num_classes,
            feature_dim: self.feature_dim,
            generation_meta: None,
        }
    }

    pub(crate) fn require_fully_labeled(&self) -> Result<()> {
        if self.is_fully_labeled() {
            Ok(())
        } else {
            Err(Error::InvalidArgument("generator expects a fully labeled dataset".into()))
        }
    }
}
