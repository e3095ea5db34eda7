//! Datasets: IDX and CIFAR binary ingestion, Gaussian blobs, and the
//! `--data` source syntax.

use std::fs;
use std::path::{Path, PathBuf};

use byteorder::{BigEndian, ReadBytesExt};
use sparsefool::{Rng, Tensor};

use crate::error::{BenchError, Result};

pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

/// Environment variable naming a directory with the four MNIST IDX files.
pub const MNIST_DIR_ENV: &str = "SPARSEFOOL_MNIST_DIR";

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub samples: Vec<Tensor>,
    pub labels: Vec<usize>,
    pub name: String,
    pub domain_lo: f64,
    pub domain_hi: f64,
}

impl Dataset {
    pub fn new(samples: Vec<Tensor>, labels: Vec<usize>, name: impl Into<String>, lo: f64, hi: f64) -> Result<Self> {
        let d = Self { samples, labels, name: name.into(), domain_lo: lo, domain_hi: hi };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples.len() != self.labels.len() {
            return Err(BenchError::Data(format!("{} samples but {} labels", self.samples.len(), self.labels.len())));
        }
        if !(self.domain_lo <= self.domain_hi) {
            return Err(BenchError::Data(format!("empty domain [{}, {}]", self.domain_lo, self.domain_hi)));
        }
        let shape = self.samples.first().map(|s| s.shape().to_vec());
        for (i, s) in self.samples.iter().enumerate() {
            if Some(s.shape()) != shape.as_deref() {
                return Err(BenchError::Data(format!("sample {i} has shape {:?}", s.shape())));
            }
            if s.as_slice().iter().any(|v| !(*v >= self.domain_lo && *v <= self.domain_hi)) {
                return Err(BenchError::Data(format!("sample {i} leaves the domain")));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.labels.iter().max().map_or(0, |m| m + 1)
    }

    pub fn input_shape(&self) -> Option<&[usize]> {
        self.samples.first().map(|s| s.shape())
    }

    /// First `n` samples (all of them when `n` is larger).
    pub fn take(&self, n: usize) -> Dataset {
        let n = n.min(self.len());
        Dataset {
            samples: self.samples[..n].to_vec(),
            labels: self.labels[..n].to_vec(),
            name: self.name.clone(),
            domain_lo: self.domain_lo,
            domain_hi: self.domain_hi,
        }
    }

    pub fn domain_width(&self) -> f64 {
        self.domain_hi - self.domain_lo
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| BenchError::file(path, e))
}

/// Parses an IDX image file: `[n, rows, cols]` unsigned bytes, scaled to
/// `[0, 1]` and shaped `[1, rows, cols]`.
pub fn parse_idx_images(bytes: &[u8]) -> Result<Vec<Tensor>> {
    let mut r = bytes;
    let magic = r.read_u32::<BigEndian>().map_err(|_| truncated("image header"))?;
    if magic != IDX_IMAGES_MAGIC {
        return Err(BenchError::Data(format!("bad image magic {magic:#010x}")));
    }
    let mut dims = [0usize; 3];
    for d in &mut dims {
        *d = r.read_u32::<BigEndian>().map_err(|_| truncated("image header"))? as usize;
    }
    let [n, rows, cols] = dims;
    let plane = rows * cols;
    if r.len() < n * plane {
        return Err(truncated("image payload"));
    }
    if r.len() > n * plane {
        return Err(BenchError::Data(format!("{} trailing bytes in image file", r.len() - n * plane)));
    }
    r.chunks_exact(plane.max(1))
        .take(n)
        .map(|px| {
            let data = px.iter().map(|&b| f64::from(b) / 255.0).collect();
            Tensor::new(data, vec![1, rows, cols]).map_err(BenchError::from)
        })
        .collect()
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<usize>> {
    let mut r = bytes;
    let magic = r.read_u32::<BigEndian>().map_err(|_| truncated("label header"))?;
    if magic != IDX_LABELS_MAGIC {
        return Err(BenchError::Data(format!("bad label magic {magic:#010x}")));
    }
    let n = r.read_u32::<BigEndian>().map_err(|_| truncated("label header"))? as usize;
    if r.len() < n {
        return Err(truncated("label payload"));
    }
    if r.len() > n {
        return Err(BenchError::Data(format!("{} trailing bytes in label file", r.len() - n)));
    }
    Ok(r.iter().map(|&b| b as usize).collect())
}

fn truncated(what: &str) -> BenchError {
    BenchError::Data(format!("truncated {what}"))
}

pub fn load_idx(images_path: impl AsRef<Path>, labels_path: impl AsRef<Path>) -> Result<Dataset> {
    let images = parse_idx_images(&read_file(images_path.as_ref())?)?;
    let labels = parse_idx_labels(&read_file(labels_path.as_ref())?)?;
    if images.len() != labels.len() {
        return Err(BenchError::Data(format!("{} images but {} labels", images.len(), labels.len())));
    }
    let name = images_path.as_ref().file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned());
    Dataset::new(images, labels, name, 0.0, 1.0)
}

/// Encodes images (values in `[0, 1]`, rounded to bytes) and labels as IDX.
pub fn write_idx(images: &[Tensor], labels: &[usize], rows: usize, cols: usize) -> (Vec<u8>, Vec<u8>) {
    let mut img = Vec::new();
    for v in [IDX_IMAGES_MAGIC, images.len() as u32, rows as u32, cols as u32] {
        img.extend_from_slice(&v.to_be_bytes());
    }
    for t in images {
        img.extend(t.as_slice().iter().map(|v| (v * 255.0).round().clamp(0.0, 255.0) as u8));
    }
    let mut lab = Vec::new();
    for v in [IDX_LABELS_MAGIC, labels.len() as u32] {
        lab.extend_from_slice(&v.to_be_bytes());
    }
    lab.extend(labels.iter().map(|&l| l as u8));
    (img, lab)
}

/// CIFAR-10 binary batch: records of one label byte and 3·32·32 channel-major
/// pixel bytes.
pub fn load_cifar_batch(path: impl AsRef<Path>) -> Result<Dataset> {
    const RECORD: usize = 1 + 3 * 32 * 32;
    let bytes = read_file(path.as_ref())?;
    if bytes.len() % RECORD != 0 {
        return Err(BenchError::Data(format!("CIFAR batch size {} is not a multiple of {RECORD}", bytes.len())));
    }
    let mut samples = Vec::new();
    let mut labels = Vec::new();
    for rec in bytes.chunks_exact(RECORD) {
        if rec[0] > 9 {
            return Err(BenchError::Data(format!("CIFAR label {} out of range", rec[0])));
        }
        labels.push(rec[0] as usize);
        let data = rec[1..].iter().map(|&b| f64::from(b) / 255.0).collect();
        samples.push(Tensor::new(data, vec![3, 32, 32])?);
    }
    Dataset::new(samples, labels, "cifar10", 0.0, 1.0)
}

/// Gaussian blobs whose classes are separated by at least `margin`.
///
/// Class `k` is centred at `s·e_k` with `s` chosen so every pair of centres
/// is `margin + 2` apart, and noise is rejected outside the unit ball, so
/// the nearest-centre rule (a linear classifier) has zero error.
pub fn synth_blobs(n: usize, classes: usize, dim: usize, margin: f64, seed: u64) -> Result<Dataset> {
    if !(margin > 0.0) || !margin.is_finite() {
        return Err(BenchError::Usage(format!("margin must be > 0, got {margin}")));
    }
    if classes < 2 || classes > dim {
        return Err(BenchError::Usage(format!("need 2 <= classes <= dim, got {classes} classes in {dim} dims")));
    }
    let radius = 1.0;
    let spread = (margin + 2.0 * radius) / std::f64::consts::SQRT_2;
    let sigma = radius / (2.0 * (dim as f64).sqrt());
    let mut rng = Rng::new(seed);
    let mut samples = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let label = i % classes;
        let noise = loop {
            let z: Vec<f64> = (0..dim).map(|_| sigma * rng.normal()).collect();
            if z.iter().map(|v| v * v).sum::<f64>() <= radius * radius {
                break z;
            }
        };
        let mut x = noise;
        x[label] += spread;
        samples.push(Tensor::from_vec(x)?);
        labels.push(label);
    }
    let lo = -radius - margin;
    let hi = spread + radius + margin;
    Dataset::new(
        samples,
        labels,
        format!("blobs(n={n},classes={classes},dim={dim},margin={margin},seed={seed})"),
        lo,
        hi,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

/// Directory used when no `--data` is given: `$SPARSEFOOL_MNIST_DIR`, else the
/// bundled 8x8 digits.
pub fn default_data_dir() -> PathBuf {
    match std::env::var_os(MNIST_DIR_ENV) {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir),
        _ => bundled_digits_dir(),
    }
}

pub fn bundled_digits_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join("digits")
}

/// Loads one split from a directory holding MNIST-named (`train-*`, `t10k-*`)
/// or `train-*`/`test-*` IDX files.
pub fn load_split(dir: &Path, split: Split) -> Result<Dataset> {
    let prefixes: &[&str] = match split {
        Split::Train => &["train"],
        Split::Test => &["t10k", "test"],
    };
    for p in prefixes {
        let images = dir.join(format!("{p}-images-idx3-ubyte"));
        let labels = dir.join(format!("{p}-labels-idx1-ubyte"));
        if images.is_file() && labels.is_file() {
            let mut d = load_idx(&images, &labels)?;
            d.name = format!("{}/{p}", dataset_label(dir));
            return Ok(d);
        }
    }
    Err(BenchError::Data(format!("no {split:?} IDX files in {}", dir.display())))
}

fn dataset_label(dir: &Path) -> String {
    if dir == bundled_digits_dir() {
        "digits8x8".into()
    } else {
        dir.file_name().map_or_else(|| dir.display().to_string(), |n| n.to_string_lossy().into_owned())
    }
}

/// A parsed `--data` argument.
#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Dir(PathBuf),
    Cifar(PathBuf),
    Blobs { n: usize, classes: usize, dim: usize, margin: f64, seed: u64 },
}

impl DataSource {
    /// `synth:n=200,classes=3,dim=10,margin=1,seed=0`, `cifar:<batch.bin>`,
    /// or a directory of IDX files.
    pub fn parse(s: &str) -> Result<Self> {
        if let Some(rest) = s.strip_prefix("synth:") {
            let (mut n, mut classes, mut dim, mut margin, mut seed) = (200, 2, 10, 1.0, 0);
            for kv in rest.split(',').filter(|p| !p.is_empty()) {
                let (k, v) = kv.split_once('=').ok_or_else(|| BenchError::Usage(format!("bad synth field {kv:?}")))?;
                match k {
                    "n" => n = field(k, v)?,
                    "classes" => classes = field(k, v)?,
                    "dim" => dim = field(k, v)?,
                    "margin" => margin = field(k, v)?,
                    "seed" => seed = field(k, v)?,
                    _ => return Err(BenchError::Usage(format!("unknown synth field {k:?}"))),
                }
            }
            return Ok(DataSource::Blobs { n, classes, dim, margin, seed });
        }
        if let Some(path) = s.strip_prefix("cifar:") {
            return Ok(DataSource::Cifar(PathBuf::from(path)));
        }
        Ok(DataSource::Dir(PathBuf::from(s)))
    }

    /// Blobs use disjoint seeds for the two splits.
    pub fn load(&self, split: Split) -> Result<Dataset> {
        match self {
            DataSource::Dir(dir) => load_split(dir, split),
            DataSource::Cifar(path) => load_cifar_batch(path),
            &DataSource::Blobs { n, classes, dim, margin, seed } => {
                let seed = match split {
                    Split::Train => seed,
                    Split::Test => seed ^ 0x5eed_7e57,
                };
                synth_blobs(n, classes, dim, margin, seed)
            }
        }
    }
}

impl Default for DataSource {
    fn default() -> Self {
        DataSource::Dir(default_data_dir())
    }
}

fn field<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| BenchError::Usage(format!("bad value for {key}: {value:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn idx_round_trip() {
        let imgs = vec![
            Tensor::new(vec![0.0, 1.0, 51.0 / 255.0, 0.2, 0.4, 1.0], vec![1, 2, 3]).unwrap(),
            Tensor::new(vec![1.0, 0.0, 0.0, 0.6, 0.8, 0.0], vec![1, 2, 3]).unwrap(),
        ];
        let (i, l) = write_idx(&imgs, &[7, 3], 2, 3);
        assert_eq!(&i[..4], &[0, 0, 8, 3]);
        let back = parse_idx_images(&i).unwrap();
        assert_eq!(back, imgs);
        assert_eq!(parse_idx_labels(&l).unwrap(), vec![7, 3]);
    }

    #[test]
    fn idx_errors() {
        let imgs = vec![Tensor::new(vec![0.5; 4], vec![1, 2, 2]).unwrap()];
        let (i, l) = write_idx(&imgs, &[1], 2, 2);
        assert!(matches!(parse_idx_labels(&i), Err(BenchError::Data(_))));
        assert!(matches!(parse_idx_images(&l), Err(BenchError::Data(_))));
        assert!(parse_idx_images(&i[..i.len() - 1]).is_err());
        assert!(parse_idx_labels(&l[..6]).is_err());
    }

    #[test]
    fn synth_source_parses() {
        let s = DataSource::parse("synth:n=10,classes=3,dim=4,margin=0.5,seed=9").unwrap();
        assert_eq!(s, DataSource::Blobs { n: 10, classes: 3, dim: 4, margin: 0.5, seed: 9 });
        assert!(DataSource::parse("synth:foo=1").is_err());
        assert_eq!(DataSource::parse("/tmp/x").unwrap(), DataSource::Dir("/tmp/x".into()));
    }

    #[test]
    fn blobs_basic() {
        assert!(synth_blobs(0, 2, 3, 1.0, 0).unwrap().is_empty());
        assert_eq!(synth_blobs(20, 3, 5, 1.0, 4).unwrap(), synth_blobs(20, 3, 5, 1.0, 4).unwrap());
        assert!(synth_blobs(5, 2, 3, 0.0, 0).is_err());
        assert!(synth_blobs(5, 4, 3, 1.0, 0).is_err());
    }
}
