use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

/// Labelled examples stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    inputs: Vec<f64>,
    labels: Vec<usize>,
    dim: usize,
    classes: usize,
    name: String,
}

impl Dataset {
    pub fn new(
        inputs: Vec<f64>,
        dim: usize,
        labels: Vec<usize>,
        classes: usize,
        name: impl Into<String>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("dataset dimension must be at least 1".into()));
        }
        if classes < 2 {
            return Err(Error::Config(format!("need at least 2 classes, got {classes}")));
        }
        if labels.is_empty() {
            return Err(Error::Config("dataset must not be empty".into()));
        }
        if inputs.len() != labels.len() * dim {
            return Err(Error::DimensionMismatch {
                expected: labels.len() * dim,
                got: inputs.len(),
            });
        }
        if let Some(bad) = labels.iter().find(|l| **l >= classes) {
            return Err(Error::Config(format!("label {bad} out of range for {classes} classes")));
        }
        Ok(Dataset {
            inputs,
            labels,
            dim,
            classes,
            name: name.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn input(&self, i: usize) -> &[f64] {
        &self.inputs[i * self.dim..(i + 1) * self.dim]
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn inputs(&self) -> &[f64] {
        &self.inputs
    }

    /// Copy of the selected rows, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Result<Dataset> {
        let mut inputs = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            inputs.extend_from_slice(self.input(i));
        }
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        Dataset::new(inputs, self.dim, labels, self.classes, self.name.clone())
    }
}

/// Two isotropic unit Gaussians centred at `∓(separation/2)·e₁`; the first
/// `n_per_class` rows are class 0.
pub fn synth_gaussians(n_per_class: usize, dim: usize, separation: f64, seed: u64) -> Result<Dataset> {
    if n_per_class == 0 {
        return Err(Error::Config("n_per_class must be at least 1".into()));
    }
    if !(separation >= 0.0 && separation.is_finite()) {
        return Err(Error::Config(format!(
            "separation must be non-negative, got {separation}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inputs = Vec::with_capacity(2 * n_per_class * dim);
    let mut labels = Vec::with_capacity(2 * n_per_class);
    for class in 0..2 {
        let shift = if class == 0 {
            -separation / 2.0
        } else {
            separation / 2.0
        };
        for _ in 0..n_per_class {
            for k in 0..dim {
                let x: f64 = StandardNormal.sample(&mut rng);
                inputs.push(if k == 0 { x + shift } else { x });
            }
            labels.push(class);
        }
    }
    Dataset::new(inputs, dim, labels, 2, format!("gaussians-sep{separation}"))
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn be_u32(bytes: &[u8], offset: usize, field: &'static str) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::Format {
            field,
            message: "file truncated in header".into(),
        })
}

/// Reads an IDX image/label pair, scaling pixels to [0, 1].
pub fn load_idx(images_path: &Path, labels_path: &Path, limit: Option<usize>) -> Result<Dataset> {
    let images = read_file(images_path)?;
    let labels = read_file(labels_path)?;
    parse_idx(&images, &labels, limit)
}

/// [`load_idx`] on in-memory bytes.
pub fn parse_idx(images: &[u8], labels: &[u8], limit: Option<usize>) -> Result<Dataset> {
    let magic = be_u32(images, 0, "images.magic")?;
    if magic != IDX_IMAGES_MAGIC {
        return Err(Error::Format {
            field: "images.magic",
            message: format!("bad magic 0x{magic:08x}"),
        });
    }
    let magic = be_u32(labels, 0, "labels.magic")?;
    if magic != IDX_LABELS_MAGIC {
        return Err(Error::Format {
            field: "labels.magic",
            message: format!("bad magic 0x{magic:08x}"),
        });
    }
    let n = be_u32(images, 4, "images.count")? as usize;
    let rows = be_u32(images, 8, "images.rows")? as usize;
    let cols = be_u32(images, 12, "images.cols")? as usize;
    let n_labels = be_u32(labels, 4, "labels.count")? as usize;
    if n != n_labels {
        return Err(Error::Format {
            field: "labels.count",
            message: format!("{n_labels} labels for {n} images"),
        });
    }
    if n == 0 || rows == 0 || cols == 0 {
        return Err(Error::Format {
            field: "images.count",
            message: format!("empty image set ({n}x{rows}x{cols})"),
        });
    }
    let pixels = rows * cols;
    if images.len() - 16 != n * pixels {
        return Err(Error::Format {
            field: "images.payload",
            message: format!("expected {} bytes, found {}", n * pixels, images.len() - 16),
        });
    }
    if labels.len() - 8 != n {
        return Err(Error::Format {
            field: "labels.payload",
            message: format!("expected {n} bytes, found {}", labels.len() - 8),
        });
    }
    let keep = limit.map_or(n, |l| l.min(n));
    if keep == 0 {
        return Err(Error::Config("limit must be at least 1".into()));
    }
    let label_bytes = &labels[8..8 + keep];
    if let Some(bad) = label_bytes.iter().find(|l| **l >= 10) {
        return Err(Error::Format {
            field: "labels.payload",
            message: format!("label {bad} outside [0, 10)"),
        });
    }
    let inputs = images[16..16 + keep * pixels]
        .iter()
        .map(|b| f64::from(*b) / 255.0)
        .collect();
    Dataset::new(
        inputs,
        pixels,
        label_bytes.iter().map(|l| usize::from(*l)).collect(),
        10,
        "idx",
    )
}

/// Encodes an image/label pair in IDX form.
pub fn encode_idx(images: &[u8], rows: u32, cols: u32, labels: &[u8]) -> (Vec<u8>, Vec<u8>) {
    let n = labels.len() as u32;
    let mut img = Vec::with_capacity(16 + images.len());
    for word in [IDX_IMAGES_MAGIC, n, rows, cols] {
        img.extend_from_slice(&word.to_be_bytes());
    }
    img.extend_from_slice(images);
    let mut lab = Vec::with_capacity(8 + labels.len());
    for word in [IDX_LABELS_MAGIC, n] {
        lab.extend_from_slice(&word.to_be_bytes());
    }
    lab.extend_from_slice(labels);
    (img, lab)
}
