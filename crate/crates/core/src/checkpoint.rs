//! Bit-exact model serialization.
//!
//! Layout: `PAOC` magic, u32 format version, the F/G architecture and data
//! range, the training configuration, F's parameters, optionally G's, and a
//! telemetry summary (final losses). All integers and 64-bit floats are
//! little-endian; save -> load -> save is byte-identical.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::models::{AeConfig, DataRange};
use crate::nn::{ActivationKind, MlpParams, MlpSpec};
use crate::tensor::Tensor2D;
use crate::trainer::{PseudoMode, TrainConfig, TrainedModel};

pub const MAGIC: [u8; 4] = *b"PAOC";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub ae_config: AeConfig,
    pub train_config: TrainConfig,
    pub f_params: MlpParams,
    pub g_params: Option<MlpParams>,
    pub final_loss_f: Option<f64>,
    pub final_loss_g: Option<f64>,
}

impl Checkpoint {
    pub fn from_model(model: &TrainedModel) -> Self {
        Checkpoint {
            ae_config: model.ae_config.clone(),
            train_config: model.train_config.clone(),
            f_params: model.f_params.clone(),
            g_params: model.g_params.clone(),
            final_loss_f: model.telemetry.last().map(|r| r.loss_f),
            final_loss_g: model.telemetry.iter().rev().find_map(|r| r.loss_g),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::default();
        w.bytes(&MAGIC);
        w.u32(FORMAT_VERSION);
        w.spec(&self.ae_config.f_spec);
        w.spec(&self.ae_config.g_spec);
        match self.ae_config.data_range {
            DataRange::Unbounded => w.u8(0),
            DataRange::Bounded { lo, hi } => {
                w.u8(1);
                w.f64(lo);
                w.f64(hi);
            }
        }
        let cfg = &self.train_config;
        w.f64(cfg.p);
        w.f64(cfg.lambda);
        w.u64(cfg.batch_size as u64);
        w.f64(cfg.lr_f);
        w.f64(cfg.lr_g);
        w.u64(cfg.epochs as u64);
        w.u64(cfg.seed);
        match cfg.pseudo_mode {
            PseudoMode::Learned => w.u8(0),
            PseudoMode::Gaussian(sigma) => {
                w.u8(1);
                w.f64(sigma);
            }
            PseudoMode::Baseline => w.u8(2),
        }
        w.params(&self.f_params);
        match &self.g_params {
            None => w.u8(0),
            Some(g) => {
                w.u8(1);
                w.params(g);
            }
        }
        w.opt_f64(self.final_loss_f);
        w.opt_f64(self.final_loss_g);
        w.out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        let magic = r.take(4)?;
        if magic != MAGIC {
            return Err(Error::Checkpoint(format!(
                "bad magic {magic:?}, not a checkpoint file"
            )));
        }
        let version = r.u32()?;
        if version != FORMAT_VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported format version {version} (this build reads {FORMAT_VERSION})"
            )));
        }
        let f_spec = r.spec()?;
        let g_spec = r.spec()?;
        let data_range = match r.u8()? {
            0 => DataRange::Unbounded,
            1 => {
                let lo = r.f64()?;
                let hi = r.f64()?;
                DataRange::bounded(lo, hi)?
            }
            tag => return Err(Error::Checkpoint(format!("bad data range tag {tag}"))),
        };
        let ae_config = AeConfig::new(f_spec, g_spec, data_range)?;
        let p = r.f64()?;
        let lambda = r.f64()?;
        let batch_size = r.u64()? as usize;
        let lr_f = r.f64()?;
        let lr_g = r.f64()?;
        let epochs = r.u64()? as usize;
        let seed = r.u64()?;
        let pseudo_mode = match r.u8()? {
            0 => PseudoMode::Learned,
            1 => PseudoMode::Gaussian(r.f64()?),
            2 => PseudoMode::Baseline,
            tag => return Err(Error::Checkpoint(format!("bad pseudo mode tag {tag}"))),
        };
        let train_config = TrainConfig {
            p,
            lambda,
            batch_size,
            lr_f,
            lr_g,
            epochs,
            seed,
            pseudo_mode,
        };
        let f_params = r.params(&ae_config.f_spec)?;
        let g_params = match r.u8()? {
            0 => None,
            1 => Some(r.params(&ae_config.g_spec)?),
            tag => {
                return Err(Error::Checkpoint(format!(
                    "bad generator presence tag {tag}"
                )))
            }
        };
        let final_loss_f = r.opt_f64()?;
        let final_loss_g = r.opt_f64()?;
        if r.pos != bytes.len() {
            return Err(Error::Checkpoint(format!(
                "{} trailing bytes after checkpoint payload",
                bytes.len() - r.pos
            )));
        }
        Ok(Checkpoint {
            ae_config,
            train_config,
            f_params,
            g_params,
            final_loss_f,
            final_loss_g,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Checkpoint::from_bytes(&bytes)
    }
}

#[derive(Default)]
struct Writer {
    out: Vec<u8>,
}

impl Writer {
    fn bytes(&mut self, b: &[u8]) {
        self.out.extend_from_slice(b);
    }

    fn u8(&mut self, v: u8) {
        self.out.push(v);
    }

    fn u32(&mut self, v: u32) {
        self.out.extend_from_slice(&v.to_le_bytes());
    }

    fn u64(&mut self, v: u64) {
        self.out.extend_from_slice(&v.to_le_bytes());
    }

    fn f64(&mut self, v: f64) {
        self.out.extend_from_slice(&v.to_le_bytes());
    }

    fn opt_f64(&mut self, v: Option<f64>) {
        match v {
            None => self.u8(0),
            Some(x) => {
                self.u8(1);
                self.f64(x);
            }
        }
    }

    fn activation(&mut self, a: ActivationKind) {
        match a {
            ActivationKind::Identity => self.u8(0),
            ActivationKind::Tanh => self.u8(1),
            ActivationKind::TanhTimes2 => self.u8(2),
            ActivationKind::Sigmoid => self.u8(3),
            ActivationKind::LeakyReLU(slope) => {
                self.u8(4);
                self.f64(slope);
            }
            ActivationKind::ReLU => self.u8(5),
        }
    }

    fn spec(&mut self, spec: &MlpSpec) {
        self.u32(spec.layer_dims.len() as u32);
        for &d in &spec.layer_dims {
            self.u32(d as u32);
        }
        for &a in &spec.activations {
            self.activation(a);
        }
    }

    fn params(&mut self, params: &MlpParams) {
        for w in &params.weights {
            for &v in w.data() {
                self.f64(v);
            }
        }
        for b in &params.biases {
            for &v in b {
                self.f64(v);
            }
        }
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::Checkpoint("truncated checkpoint".into()));
        }
        let slice = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
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

    fn opt_f64(&mut self) -> Result<Option<f64>> {
        match self.u8()? {
            0 => Ok(None),
            1 => Ok(Some(self.f64()?)),
            tag => Err(Error::Checkpoint(format!("bad optional tag {tag}"))),
        }
    }

    fn activation(&mut self) -> Result<ActivationKind> {
        Ok(match self.u8()? {
            0 => ActivationKind::Identity,
            1 => ActivationKind::Tanh,
            2 => ActivationKind::TanhTimes2,
            3 => ActivationKind::Sigmoid,
            4 => ActivationKind::LeakyReLU(self.f64()?),
            5 => ActivationKind::ReLU,
            tag => return Err(Error::Checkpoint(format!("bad activation tag {tag}"))),
        })
    }

    fn spec(&mut self) -> Result<MlpSpec> {
        let n_dims = self.u32()? as usize;
        if !(2..=1024).contains(&n_dims) {
            return Err(Error::Checkpoint(format!(
                "implausible layer count {n_dims}"
            )));
        }
        let mut dims = Vec::with_capacity(n_dims);
        for _ in 0..n_dims {
            dims.push(self.u32()? as usize);
        }
        let mut acts = Vec::with_capacity(n_dims - 1);
        for _ in 0..n_dims - 1 {
            acts.push(self.activation()?);
        }
        MlpSpec::new(dims, acts)
    }

    fn params(&mut self, spec: &MlpSpec) -> Result<MlpParams> {
        let mut weights = Vec::with_capacity(spec.num_layers());
        let mut biases = Vec::with_capacity(spec.num_layers());
        for l in 0..spec.num_layers() {
            let rows = spec.layer_dims[l + 1];
            let cols = spec.layer_dims[l];
            let mut data = Vec::with_capacity(rows * cols);
            for _ in 0..rows * cols {
                data.push(self.f64()?);
            }
            weights.push(Tensor2D::from_vec(rows, cols, data)?);
        }
        for l in 0..spec.num_layers() {
            let mut b = Vec::with_capacity(spec.layer_dims[l + 1]);
            for _ in 0..spec.layer_dims[l + 1] {
                b.push(self.f64()?);
            }
            biases.push(b);
        }
        Ok(MlpParams { weights, biases })
    }
}
