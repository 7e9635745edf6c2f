//! Field dumps and the diagnostics CSV.

use std::fmt::Write as _;
use std::path::Path;

use super::{Record, ScalarField};
use crate::{Error, Result};

pub const MAGIC: &[u8; 8] = b"PPFLOW1\0";

pub const CSV_HEADER: &str = "t,residual_sup,osc_phi_t,mean_phi_t,min_cone_margin,sup_grad,dt";

/// Contents of a field dump.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldDump {
    pub n: u32,
    pub p: u32,
    pub k: u32,
    pub t: f64,
    pub values: Vec<f64>,
}

impl FieldDump {
    pub fn new(n: usize, p: usize, k: usize, t: f64, field: &ScalarField) -> Self {
        Self {
            n: n as u32,
            p: p as u32,
            k: k as u32,
            t,
            values: field.values().to_vec(),
        }
    }

    /// Little-endian encoding: magic, `n`, `p`, `K`, count, `t`, values.
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(32 + 8 * self.values.len());
        out.extend_from_slice(MAGIC);
        for v in [self.n, self.p, self.k, self.values.len() as u32] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.extend_from_slice(&self.t.to_le_bytes());
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let bad = |m: &str| Error::Argument(format!("malformed field dump: {m}"));
        if bytes.len() < 32 || &bytes[..8] != MAGIC {
            return Err(bad("missing header"));
        }
        let u = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().expect("4 bytes"));
        let (n, p, k, count) = (u(8), u(12), u(16), u(20) as usize);
        let t = f64::from_le_bytes(bytes[24..32].try_into().expect("8 bytes"));
        if bytes.len() != 32 + 8 * count {
            return Err(bad("payload length does not match count"));
        }
        let values = bytes[32..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        Ok(Self { n, p, k, t, values })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.encode())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::decode(&std::fs::read(path)?)
    }
}

/// CSV text with [`CSV_HEADER`] and one row per record.
pub fn diagnostics_csv(records: &[Record]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in records {
        writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.t, r.residual_sup, r.osc_phi_t, r.mean_phi_t, r.min_cone_margin, r.sup_grad, r.dt
        )
        .expect("writing to a String");
    }
    s
}

pub fn write_diagnostics(path: &Path, records: &[Record]) -> Result<()> {
    std::fs::write(path, diagnostics_csv(records))?;
    Ok(())
}
