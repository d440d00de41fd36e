//! Binary checkpoint format for Q-function parameters.
//!
//! Little-endian layout:
//!
//! ```text
//! magic   b"RILQ"                       4 bytes
//! version u32 = 1                       4 bytes
//! variant u32 (0 tabular, 1 mlp)        4 bytes
//! seed    u64                           8 bytes
//! -- mlp --
//! input_dim, hidden_dim, output_dim     3 x u32
//! param_count                           u64
//! params f64 x param_count              (w1 row-major, b1, w2 row-major, b2)
//! -- tabular --
//! feature_dim, num_actions              2 x u32
//! entry_count                           u64
//! entries sorted by state bits:         (feature_dim + num_actions) x f64 each
//! ```

use thiserror::Error;

use super::{Mlp, QFunction, TabularQ};

const MAGIC: &[u8; 4] = b"RILQ";
const VERSION: u32 = 1;
const VARIANT_TABULAR: u32 = 0;
const VARIANT_MLP: u32 = 1;

#[derive(Debug, Error, PartialEq)]
pub enum CheckpointError {
    #[error("bad magic: expected \"RILQ\", found {0:?}")]
    BadMagic([u8; 4]),
    #[error("unsupported checkpoint version {0}")]
    BadVersion(u32),
    #[error("unknown variant code {0}")]
    BadVariant(u32),
    #[error("checkpoint truncated: needed {needed} more bytes")]
    Truncated { needed: usize },
    #[error("inconsistent checkpoint header: {0}")]
    Corrupt(String),
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CheckpointError> {
        if self.pos + n > self.bytes.len() {
            return Err(CheckpointError::Truncated {
                needed: self.pos + n - self.bytes.len(),
            });
        }
        let slice = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn u32(&mut self) -> Result<u32, CheckpointError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, CheckpointError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, CheckpointError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn encode_checkpoint(q: &QFunction, seed: u64) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    match q {
        QFunction::Tabular(table) => {
            out.extend_from_slice(&VARIANT_TABULAR.to_le_bytes());
            out.extend_from_slice(&seed.to_le_bytes());
            let feature_dim = table.feature_dim().unwrap_or(0);
            out.extend_from_slice(&(feature_dim as u32).to_le_bytes());
            out.extend_from_slice(&(table.num_actions() as u32).to_le_bytes());
            let entries = table.sorted_entries();
            out.extend_from_slice(&(entries.len() as u64).to_le_bytes());
            for (state, row) in entries {
                for x in state.iter().chain(row.iter()) {
                    out.extend_from_slice(&x.to_le_bytes());
                }
            }
        }
        QFunction::Mlp(net) => {
            out.extend_from_slice(&VARIANT_MLP.to_le_bytes());
            out.extend_from_slice(&seed.to_le_bytes());
            out.extend_from_slice(&(net.input_dim as u32).to_le_bytes());
            out.extend_from_slice(&(net.hidden_dim as u32).to_le_bytes());
            out.extend_from_slice(&(net.output_dim as u32).to_le_bytes());
            let flat = net.to_flat();
            out.extend_from_slice(&(flat.len() as u64).to_le_bytes());
            for x in flat {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
    }
    out
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<(QFunction, u64), CheckpointError> {
    let mut r = Reader { bytes, pos: 0 };
    let magic: [u8; 4] = r.take(4)?.try_into().unwrap();
    if &magic != MAGIC {
        return Err(CheckpointError::BadMagic(magic));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(CheckpointError::BadVersion(version));
    }
    let variant = r.u32()?;
    let seed = r.u64()?;
    match variant {
        VARIANT_TABULAR => {
            let feature_dim = r.u32()? as usize;
            let num_actions = r.u32()? as usize;
            if num_actions == 0 {
                return Err(CheckpointError::Corrupt("zero actions".into()));
            }
            let entries = r.u64()? as usize;
            if entries > 0 && feature_dim == 0 {
                return Err(CheckpointError::Corrupt(
                    "entries present but feature_dim is zero".into(),
                ));
            }
            let mut table = TabularQ::new(num_actions);
            for _ in 0..entries {
                let state: Vec<f64> = (0..feature_dim)
                    .map(|_| r.f64())
                    .collect::<Result<_, _>>()?;
                let row: Vec<f64> = (0..num_actions)
                    .map(|_| r.f64())
                    .collect::<Result<_, _>>()?;
                table.insert_row(&state, row);
            }
            Ok((QFunction::Tabular(table), seed))
        }
        VARIANT_MLP => {
            let input_dim = r.u32()? as usize;
            let hidden_dim = r.u32()? as usize;
            let output_dim = r.u32()? as usize;
            let count = r.u64()? as usize;
            if input_dim == 0 || hidden_dim == 0 || output_dim == 0 {
                return Err(CheckpointError::Corrupt("zero dimension".into()));
            }
            let flat: Vec<f64> = (0..count).map(|_| r.f64()).collect::<Result<_, _>>()?;
            let net = Mlp::from_flat(input_dim, hidden_dim, output_dim, &flat).ok_or_else(|| {
                CheckpointError::Corrupt(format!(
                    "param count {count} does not match dims {input_dim}x{hidden_dim}x{output_dim}"
                ))
            })?;
            Ok((QFunction::Mlp(net), seed))
        }
        other => Err(CheckpointError::BadVariant(other)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn mlp_checkpoint_round_trips_bit_exactly() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let q = QFunction::Mlp(Mlp::new(4, 8, 3, &mut rng));
        let bytes = encode_checkpoint(&q, 42);
        let (decoded, seed) = decode_checkpoint(&bytes).unwrap();
        assert_eq!(decoded, q);
        assert_eq!(seed, 42);
    }

    #[test]
    fn tabular_checkpoint_round_trips() {
        let mut table = TabularQ::new(2);
        table.insert_row(&[1.0, 2.0], vec![0.5, -0.25]);
        table.insert_row(&[0.0, -1.0], vec![3.0, 4.0]);
        let q = QFunction::Tabular(table);
        let bytes = encode_checkpoint(&q, 7);
        let (decoded, seed) = decode_checkpoint(&bytes).unwrap();
        assert_eq!(decoded, q);
        assert_eq!(seed, 7);
    }

    #[test]
    fn encoding_is_deterministic() {
        let mut table = TabularQ::new(2);
        for i in 0..20 {
            table.insert_row(&[i as f64], vec![i as f64, -(i as f64)]);
        }
        let q = QFunction::Tabular(table);
        assert_eq!(encode_checkpoint(&q, 1), encode_checkpoint(&q, 1));
    }

    #[test]
    fn bad_magic_rejected() {
        let mut bytes = encode_checkpoint(&QFunction::Tabular(TabularQ::new(2)), 0);
        bytes[0] = b'X';
        assert!(matches!(
            decode_checkpoint(&bytes),
            Err(CheckpointError::BadMagic(_))
        ));
    }

    #[test]
    fn truncated_rejected() {
        let bytes = encode_checkpoint(&QFunction::Tabular(TabularQ::new(2)), 0);
        assert!(matches!(
            decode_checkpoint(&bytes[..bytes.len() - 3]),
            Err(CheckpointError::Truncated { .. })
        ));
    }
}
