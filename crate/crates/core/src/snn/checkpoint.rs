//! Versioned little-endian binary checkpoint.
//!
//! Layout: magic `SPKSEQCK`, `u32` version, then dimensions, the encoding
//! context (alphabet, fallback, max length, class names), the neuron and
//! readout configuration, and finally `w1 b1 w2 b2` as row-major `f64`.

use std::path::Path;

use super::{GradientFlow, LifConfig, Parameters, Readout, ResetMode, SnnModel, SpikeMode};
use crate::encode::Alphabet;
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"SPKSEQCK";
const VERSION: u32 = 1;

/// A model together with everything needed to encode new inputs for it.
#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub model: SnnModel,
    pub alphabet: Alphabet,
    pub max_len: usize,
    pub classes: Vec<String>,
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let m = &self.model;
        let mut out = Vec::with_capacity(64 + 8 * m.params.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        for d in [m.input_dim, m.hidden, m.classes, self.max_len] {
            put_u64(&mut out, d as u64);
        }
        put_str(&mut out, &self.alphabet.symbol_string());
        put_str(&mut out, &self.alphabet.fallback().map(String::from).unwrap_or_default());
        put_u64(&mut out, self.classes.len() as u64);
        for c in &self.classes {
            put_str(&mut out, c);
        }
        out.extend_from_slice(&m.lif.decay_multiplier.to_le_bytes());
        out.extend_from_slice(&m.lif.threshold.to_le_bytes());
        put_u64(&mut out, m.lif.time_steps as u64);
        out.extend_from_slice(&m.lif.surrogate_width.to_le_bytes());
        out.push(match m.lif.reset {
            ResetMode::Subtract => 0,
            ResetMode::Zero => 1,
        });
        out.push(match m.lif.spike {
            SpikeMode::Binary => 0,
            SpikeMode::SmoothRamp => 1,
        });
        out.push(match m.readout {
            Readout::SpikeRate => 0,
            Readout::MembraneMean => 1,
        });
        out.push(match m.gradient_flow {
            GradientFlow::Isolated => 0,
            GradientFlow::ThroughTime => 1,
        });
        for (_, t) in m.params.tensors() {
            for v in t {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(8)? != MAGIC {
            return Err(Error::Checkpoint("bad magic".into()));
        }
        let version = u32::from_le_bytes(r.take(4)?.try_into().unwrap());
        if version != VERSION {
            return Err(Error::Checkpoint(format!("unsupported version {version}")));
        }
        let input_dim = r.usize()?;
        let hidden = r.usize()?;
        let classes = r.usize()?;
        let max_len = r.usize()?;
        let symbols = r.string()?;
        let fallback = r.string()?.chars().next();
        let alphabet = Alphabet::new(&symbols, fallback)?;
        let n_names = r.usize()?;
        let names = (0..n_names).map(|_| r.string()).collect::<Result<Vec<_>>>()?;
        let lif = LifConfig {
            decay_multiplier: r.f64()?,
            threshold: r.f64()?,
            time_steps: r.usize()?,
            surrogate_width: r.f64()?,
            reset: match r.u8()? {
                0 => ResetMode::Subtract,
                1 => ResetMode::Zero,
                v => return Err(Error::Checkpoint(format!("bad reset mode {v}"))),
            },
            spike: match r.u8()? {
                0 => SpikeMode::Binary,
                1 => SpikeMode::SmoothRamp,
                v => return Err(Error::Checkpoint(format!("bad spike mode {v}"))),
            },
        };
        lif.validate()?;
        let readout = match r.u8()? {
            0 => Readout::SpikeRate,
            1 => Readout::MembraneMean,
            v => return Err(Error::Checkpoint(format!("bad readout {v}"))),
        };
        let gradient_flow = match r.u8()? {
            0 => GradientFlow::Isolated,
            1 => GradientFlow::ThroughTime,
            v => return Err(Error::Checkpoint(format!("bad gradient flow {v}"))),
        };
        if names.len() != classes || input_dim != max_len * alphabet.len() {
            return Err(Error::Checkpoint("inconsistent dimensions".into()));
        }
        let mut params = Parameters::zeros(input_dim, hidden, classes);
        for (_, t) in params.tensors_mut() {
            for v in t.iter_mut() {
                *v = r.f64()?;
            }
        }
        if r.pos != bytes.len() {
            return Err(Error::Checkpoint("trailing bytes".into()));
        }
        Ok(Self {
            model: SnnModel {
                input_dim,
                hidden,
                classes,
                params,
                lif,
                readout,
                gradient_flow,
            },
            alphabet,
            max_len,
            classes: names,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

fn put_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    put_u64(out, s.len() as u64);
    out.extend_from_slice(s.as_bytes());
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::Checkpoint("truncated".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn usize(&mut self) -> Result<usize> {
        let v = u64::from_le_bytes(self.take(8)?.try_into().unwrap());
        usize::try_from(v).map_err(|_| Error::Checkpoint("size overflow".into()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn string(&mut self) -> Result<String> {
        let n = self.usize()?;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|_| Error::Checkpoint("bad utf-8".into()))
    }
}
