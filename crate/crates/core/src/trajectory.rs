//! Headerless binary trajectory files.
//!
//! A file is a sequence of fixed-width records, one per sample in time order.
//! Each record holds all channels of that sample as little-endian IEEE-754
//! binary64 values, so an `N`-sample file of `C` channels is exactly
//! `8 * C * N` bytes.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use nalgebra::SVector;
use thiserror::Error;

use crate::dynamics::{InputVector, MeasurementVector, StateVector};

pub const INPUT_FILE: &str = "data_u.bin";
pub const MEASUREMENT_FILE: &str = "data_y.bin";
pub const TRUTH_FILE: &str = "data_x.bin";

#[derive(Debug, Error)]
pub enum TrajectoryError {
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: size {len} bytes is not a multiple of the {record} byte record")]
    Format {
        path: PathBuf,
        len: usize,
        record: usize,
    },
    #[error("Data-length mismatch: {inputs} input records, {measurements} measurement records")]
    LengthMismatch { inputs: usize, measurements: usize },
}

fn file_error(path: &Path) -> impl FnOnce(io::Error) -> TrajectoryError + '_ {
    move |source| TrajectoryError::File {
        path: path.to_path_buf(),
        source,
    }
}

/// Decodes raw bytes into `C`-channel records. Returns `None` when the length
/// is not record-aligned.
pub fn decode_records<const C: usize>(bytes: &[u8]) -> Option<Vec<SVector<f64, C>>> {
    let record = 8 * C;
    if bytes.len() % record != 0 {
        return None;
    }
    Some(
        bytes
            .chunks_exact(record)
            .map(|rec| {
                SVector::<f64, C>::from_iterator(
                    rec.chunks_exact(8)
                        .map(|b| f64::from_le_bytes(b.try_into().expect("8-byte chunk"))),
                )
            })
            .collect(),
    )
}

pub fn encode_records<const C: usize>(records: &[SVector<f64, C>]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 * C * records.len());
    for rec in records {
        for v in rec.iter() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn read_records<const C: usize>(
    path: impl AsRef<Path>,
) -> Result<Vec<SVector<f64, C>>, TrajectoryError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(file_error(path))?;
    decode_records(&bytes).ok_or_else(|| TrajectoryError::Format {
        path: path.to_path_buf(),
        len: bytes.len(),
        record: 8 * C,
    })
}

pub fn write_records<const C: usize>(
    path: impl AsRef<Path>,
    records: &[SVector<f64, C>],
) -> Result<(), TrajectoryError> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(file_error(path))?;
    let mut w = BufWriter::new(file);
    for rec in records {
        for v in rec.iter() {
            w.write_all(&v.to_le_bytes()).map_err(file_error(path))?;
        }
    }
    w.flush().map_err(file_error(path))
}

/// Reads an input/measurement file pair and checks that the record counts agree.
pub fn read_trajectories(
    u_path: impl AsRef<Path>,
    y_path: impl AsRef<Path>,
) -> Result<(Vec<InputVector>, Vec<MeasurementVector>), TrajectoryError> {
    let us = read_records::<2>(u_path)?;
    let ys = read_records::<4>(y_path)?;
    if us.len() != ys.len() {
        return Err(TrajectoryError::LengthMismatch {
            inputs: us.len(),
            measurements: ys.len(),
        });
    }
    Ok((us, ys))
}

pub fn write_trajectories(
    us: &[InputVector],
    ys: &[MeasurementVector],
    u_path: impl AsRef<Path>,
    y_path: impl AsRef<Path>,
) -> Result<(), TrajectoryError> {
    if us.len() != ys.len() {
        return Err(TrajectoryError::LengthMismatch {
            inputs: us.len(),
            measurements: ys.len(),
        });
    }
    write_records(u_path, us)?;
    write_records(y_path, ys)
}

pub fn read_states(path: impl AsRef<Path>) -> Result<Vec<StateVector>, TrajectoryError> {
    read_records::<4>(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn record_alignment() {
        assert_eq!(decode_records::<4>(&[0u8; 64]).unwrap().len(), 2);
        assert_eq!(decode_records::<2>(&[0u8; 32]).unwrap().len(), 2);
        assert!(decode_records::<4>(&[0u8; 65]).is_none());
        assert!(decode_records::<4>(&[]).unwrap().is_empty());
    }

    #[test]
    fn layout_is_record_major_little_endian() {
        let recs = [SVector::<f64, 2>::new(1.0, 2.0), SVector::<f64, 2>::new(3.0, 4.0)];
        let bytes = encode_records(&recs);
        assert_eq!(bytes.len(), 32);
        assert_eq!(&bytes[..8], &1.0f64.to_le_bytes());
        assert_eq!(&bytes[8..16], &2.0f64.to_le_bytes());
        assert_eq!(&bytes[16..24], &3.0f64.to_le_bytes());
    }

    proptest! {
        #[test]
        fn encode_decode_is_bit_exact(bits in prop::collection::vec(any::<u64>(), 0..64)) {
            let n = bits.len() / 4;
            let recs: Vec<SVector<f64, 4>> = bits[..4 * n]
                .chunks_exact(4)
                .map(|c| SVector::<f64, 4>::from_iterator(c.iter().map(|b| f64::from_bits(*b))))
                .collect();
            let back = decode_records::<4>(&encode_records(&recs)).unwrap();
            prop_assert_eq!(back.len(), recs.len());
            for (a, b) in back.iter().zip(&recs) {
                for (x, y) in a.iter().zip(b.iter()) {
                    prop_assert_eq!(x.to_bits(), y.to_bits());
                }
            }
        }
    }
}
