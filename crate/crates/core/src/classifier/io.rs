//! Binary model files.
//!
//! Layout: the 8 ASCII bytes `SFMODEL1`, then little-endian `u32` layer
//! count, then per layer `u32` rows, `u32` cols, one activation tag byte,
//! `rows * cols` row-major `f64` weights and `rows` `f64` biases.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use super::mlp::{Activation, DenseLayer, MlpClassifier};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const MODEL_MAGIC: &[u8; 8] = b"SFMODEL1";

const MAX_LAYERS: u32 = 1 << 10;
const MAX_EXTENT: u32 = 1 << 24;

pub fn write_model<S: Scalar>(model: &MlpClassifier<S>, mut w: impl Write) -> Result<()> {
    w.write_all(MODEL_MAGIC)?;
    w.write_u32::<LittleEndian>(model.layers().len() as u32)?;
    for layer in model.layers() {
        w.write_u32::<LittleEndian>(layer.rows() as u32)?;
        w.write_u32::<LittleEndian>(layer.cols() as u32)?;
        w.write_u8(layer.activation().tag())?;
        for v in layer.weights().iter().chain(layer.bias()) {
            w.write_f64::<LittleEndian>(v.as_f64())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_model<S: Scalar>(mut r: impl Read) -> Result<MlpClassifier<S>> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(truncated)?;
    if &magic != MODEL_MAGIC {
        if magic[..7] == MODEL_MAGIC[..7] {
            return Err(Error::ModelVersion(String::from_utf8_lossy(&magic[7..]).into_owned()));
        }
        return Err(Error::ModelFormat("bad magic bytes".into()));
    }
    let count = r.read_u32::<LittleEndian>().map_err(truncated)?;
    if count == 0 || count > MAX_LAYERS {
        return Err(Error::ModelFormat(format!("implausible layer count {count}")));
    }
    let mut layers = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let rows = r.read_u32::<LittleEndian>().map_err(truncated)?;
        let cols = r.read_u32::<LittleEndian>().map_err(truncated)?;
        if rows == 0 || cols == 0 || rows > MAX_EXTENT || cols > MAX_EXTENT {
            return Err(Error::ModelFormat(format!("implausible layer shape {rows}x{cols}")));
        }
        let tag = r.read_u8().map_err(truncated)?;
        let activation =
            Activation::from_tag(tag).ok_or_else(|| Error::ModelFormat(format!("unknown activation tag {tag}")))?;
        let (rows, cols) = (rows as usize, cols as usize);
        let mut read_vec = |n: usize| -> Result<Vec<S>> {
            (0..n).map(|_| r.read_f64::<LittleEndian>().map(S::lit).map_err(truncated)).collect()
        };
        let weights = read_vec(rows * cols)?;
        let bias = read_vec(rows)?;
        layers.push(
            DenseLayer::new(rows, cols, weights, bias, activation).map_err(|e| Error::ModelFormat(e.to_string()))?,
        );
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(Error::ModelFormat("trailing bytes after last layer".into()));
    }
    MlpClassifier::new(layers).map_err(|e| Error::ModelFormat(e.to_string()))
}

pub fn save_model<S: Scalar>(model: &MlpClassifier<S>, path: impl AsRef<Path>) -> Result<()> {
    write_model(model, BufWriter::new(File::create(path)?))
}

pub fn load_model<S: Scalar>(path: impl AsRef<Path>) -> Result<MlpClassifier<S>> {
    read_model(BufReader::new(File::open(path)?))
}

fn truncated(e: std::io::Error) -> Error {
    if e.kind() == std::io::ErrorKind::UnexpectedEof {
        Error::ModelFormat("truncated file".into())
    } else {
        Error::Io(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::Classifier;
    use crate::rng::Rng;
    use crate::tensor::Tensor;

    fn bytes_of(model: &MlpClassifier) -> Vec<u8> {
        let mut buf = Vec::new();
        write_model(model, &mut buf).unwrap();
        buf
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let mut rng = Rng::new(21);
        let m = MlpClassifier::<f64>::random(&[6, 5, 4, 3], &mut rng).unwrap();
        let back: MlpClassifier = read_model(bytes_of(&m).as_slice()).unwrap();
        assert_eq!(back, m);
        for _ in 0..100 {
            let x = Tensor::from_vec((0..6).map(|_| rng.uniform_range(-1.0, 1.0)).collect()).unwrap();
            let (a, b) = (m.logits(&x).unwrap(), back.logits(&x).unwrap());
            assert!(a.as_slice().iter().zip(b.as_slice()).all(|(p, q)| p.to_bits() == q.to_bits()));
        }
    }

    #[test]
    fn header_layout() {
        let m = MlpClassifier::<f64>::random(&[2, 3], &mut Rng::new(0)).unwrap();
        let b = bytes_of(&m);
        assert_eq!(&b[..8], b"SFMODEL1");
        assert_eq!(&b[8..12], &1u32.to_le_bytes());
        assert_eq!(&b[12..16], &3u32.to_le_bytes());
        assert_eq!(&b[16..20], &2u32.to_le_bytes());
        assert_eq!(b[20], 0);
        assert_eq!(b.len(), 21 + 8 * (6 + 3));
    }

    #[test]
    fn truncated_file_errors() {
        let m = MlpClassifier::<f64>::random(&[4, 3, 2], &mut Rng::new(1)).unwrap();
        let b = bytes_of(&m);
        for cut in [0, 5, 8, 11, 20, b.len() - 1] {
            assert!(matches!(read_model::<f64>(&b[..cut]), Err(Error::ModelFormat(_))), "cut at {cut}");
        }
    }

    #[test]
    fn wrong_magic_and_version() {
        let m = MlpClassifier::<f64>::random(&[2, 2], &mut Rng::new(1)).unwrap();
        let mut b = bytes_of(&m);
        b[0] = b'X';
        assert!(matches!(read_model::<f64>(b.as_slice()), Err(Error::ModelFormat(_))));
        let mut b = bytes_of(&m);
        b[7] = b'2';
        assert!(matches!(read_model::<f64>(b.as_slice()), Err(Error::ModelVersion(_))));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.sfm");
        let m = MlpClassifier::<f64>::random(&[3, 2], &mut Rng::new(4)).unwrap();
        save_model(&m, &path).unwrap();
        assert_eq!(load_model::<f64>(&path).unwrap(), m);
    }
}
