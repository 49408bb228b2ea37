//! Versioned binary checkpoints of a network and its optimizer state.
//!
//! All fields are little-endian:
//!
//! ```text
//! magic      8 bytes  "VXAOCKPT"
//! version    u32
//! n          u32      grid points per side
//! dx         f64
//! wavelength f64
//! spacing    f64
//! layers     u32
//! mode       u8       0 phase, 1 amplitude, 2 hybrid
//! scaling    u8       0 min-max, 1 power-referenced
//! level      u32      dataset level the network was trained on
//! enc_lo     f64      screen encoding range, radians
//! enc_hi     f64
//! epochs     u32      epochs completed
//! step       u64      optimizer steps taken
//! lr, beta1, beta2, eps   f64 x 4
//! per layer: phase[n*n] f64, log_amplitude[n*n] f64
//! per layer: m_phase, v_phase, m_log_amplitude, v_log_amplitude, each [n*n] f64
//! ```
//!
//! A phase-only network stores its frozen (all zero) log-amplitudes like any other.

use std::path::Path;

use vortex_ao_core::ddnn::{
    AdamConfig, DiffractiveLayer, DiffractiveNetwork, Modulation, Moments, OutputScaling,
    TrainState,
};
use vortex_ao_core::{GridSpec, ScreenEncoding};

use crate::error::{Error, Result};
use crate::fsutil;

pub const MAGIC: &[u8; 8] = b"VXAOCKPT";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub state: TrainState,
    pub level: usize,
    pub encoding: ScreenEncoding,
}

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn array(&mut self, a: &[f64]) {
        for &v in a {
            self.f64(v);
        }
    }
}

fn count(v: usize, what: &str) -> Result<u32> {
    u32::try_from(v)
        .map_err(|_| Error::Invalid(format!("{what} {v} does not fit the checkpoint format")))
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let net = self.state.network();
        let g = net.grid();
        let cfg = self.state.config();
        let mut w = Writer(MAGIC.to_vec());
        w.u32(VERSION);
        w.u32(count(g.n(), "grid size")?);
        w.f64(g.dx());
        w.f64(g.wavelength());
        w.f64(net.spacing());
        w.u32(count(net.layer_count(), "layer count")?);
        w.u8(net.mode().code());
        w.u8(net.scaling().code());
        w.u32(count(self.level, "level")?);
        w.f64(self.encoding.lo());
        w.f64(self.encoding.hi());
        w.u32(self.state.epochs_completed());
        w.u64(self.state.step());
        for v in [cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon] {
            w.f64(v);
        }
        for layer in net.layers() {
            w.array(layer.phase());
            w.array(layer.log_amplitude());
        }
        let m = self.state.moments();
        for i in 0..net.layer_count() {
            for a in [
                &m.m_phase[i],
                &m.v_phase[i],
                &m.m_log_amplitude[i],
                &m.v_log_amplitude[i],
            ] {
                w.array(a);
            }
        }
        Ok(w.0)
    }

    pub fn from_bytes(data: &[u8], path: &Path) -> Result<Self> {
        let mut r = Reader { data, pos: 0, path };
        if r.take(8)? != MAGIC {
            return Err(Error::Parse {
                path: path.into(),
                offset: 0,
                message: "not a vortex-ao checkpoint".into(),
            });
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(Error::Version {
                path: path.into(),
                what: "checkpoint",
                found: version,
                expected: VERSION,
            });
        }
        let n = r.u32()? as usize;
        let dx = r.f64()?;
        let wavelength = r.f64()?;
        let spacing = r.f64()?;
        let layers = r.u32()? as usize;
        let at = r.pos;
        let mode =
            Modulation::from_code(r.u8()?).ok_or_else(|| r.error(at, "unknown modulation code"))?;
        let at = r.pos;
        let scaling = OutputScaling::from_code(r.u8()?)
            .ok_or_else(|| r.error(at, "unknown output scaling code"))?;
        let level = r.u32()? as usize;
        let encoding = ScreenEncoding::new(r.f64()?, r.f64()?)?;
        let epochs = r.u32()?;
        let step = r.u64()?;
        let config = AdamConfig {
            learning_rate: r.f64()?,
            beta1: r.f64()?,
            beta2: r.f64()?,
            epsilon: r.f64()?,
        };

        let grid = GridSpec::new(n, dx, wavelength)?;
        let expected = layers
            .checked_mul(6 * 8)
            .and_then(|b| b.checked_mul(grid.len()))
            .and_then(|b| b.checked_add(r.pos))
            .ok_or_else(|| r.error(r.pos, "layer count overflows"))?;
        if data.len() != expected {
            return Err(r.error(
                data.len().min(expected),
                &format!("expected {expected} bytes, file has {}", data.len()),
            ));
        }
        let len = grid.len();
        let mut stack = Vec::with_capacity(layers);
        for _ in 0..layers {
            let phase = r.array(len)?;
            let log_amplitude = r.array(len)?;
            stack.push(DiffractiveLayer::new(mode, phase, log_amplitude)?);
        }
        let mut m = Moments {
            m_phase: vec![],
            v_phase: vec![],
            m_log_amplitude: vec![],
            v_log_amplitude: vec![],
        };
        for _ in 0..layers {
            m.m_phase.push(r.array(len)?);
            m.v_phase.push(r.array(len)?);
            m.m_log_amplitude.push(r.array(len)?);
            m.v_log_amplitude.push(r.array(len)?);
        }
        let net =
            DiffractiveNetwork::from_layers(grid, spacing, mode, stack)?.with_scaling(scaling);
        Ok(Self {
            state: TrainState::from_parts(net, config, step, epochs, m)?,
            level,
            encoding,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fsutil::write_atomic(path, &self.to_bytes()?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&fsutil::read(path)?, path)
    }
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl Reader<'_> {
    fn error(&self, offset: usize, message: &str) -> Error {
        Error::Parse {
            path: self.path.into(),
            offset,
            message: message.into(),
        }
    }

    fn take(&mut self, k: usize) -> Result<&[u8]> {
        if self.data.len() - self.pos < k {
            return Err(self.error(self.data.len(), "unexpected end of checkpoint"));
        }
        let s = &self.data[self.pos..self.pos + k];
        self.pos += k;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn array(&mut self, len: usize) -> Result<Vec<f64>> {
        (0..len).map(|_| self.f64()).collect()
    }
}

/// File name of the checkpoint written after `epoch` epochs.
pub fn epoch_file(epoch: u32) -> String {
    format!("epoch_{epoch:03}.ckpt")
}
