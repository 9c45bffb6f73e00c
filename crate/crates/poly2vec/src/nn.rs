//! Magnitude/phase feature extraction and the learned fusion network, with
//! a minimal hand-rolled reverse-mode gradient engine and AdamW.
//!
//! All trainable tensors live in one flat `Vec<f64>` addressed through a
//! layout table. That single decision keeps the rest simple: the optimizer
//! is an elementwise loop over the flat vector, checkpoints are the named
//! layout plus the raw data, and finite-difference gradient checks perturb
//! one scalar at a time without knowing what tensor it belongs to.
//!
//! The architecture is fixed — two-layer MLPs with a ReLU after the first
//! layer — so the "tape" for reverse mode is just the cached layer inputs,
//! not a general graph.

use crate::cft::ComplexSpectrum;
use ndarray::{Array2, ArrayView2, ArrayViewMut2, Axis};
use rand::Rng;
use std::io::{Read, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NnError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("not a model file: bad magic")]
    BadMagic,
    #[error("unsupported model file version {0}")]
    BadVersion(u32),
    #[error("model file corrupt: {0}")]
    Corrupt(String),
}

// ---------------------------------------------------------------------------
// Feature extraction

/// Magnitude and phase vectors of a spectrum, index-aligned with its grid.
#[derive(Debug, Clone)]
pub struct FeatureVectors {
    pub z: Vec<f64>,
    pub phi: Vec<f64>,
}

/// Polar decomposition: z = |F|, phi = atan2(Im, Re) in (−π, π], with the
/// origin convention atan2(0, 0) = 0 (covering the −0.0 corner atan2 would
/// map to ±π).
pub fn extract_features(spec: &ComplexSpectrum) -> FeatureVectors {
    let mut z = Vec::with_capacity(spec.values.len());
    let mut phi = Vec::with_capacity(spec.values.len());
    for c in &spec.values {
        z.push((c.re * c.re + c.im * c.im).sqrt());
        phi.push(if c.re == 0.0 && c.im == 0.0 {
            0.0
        } else {
            c.im.atan2(c.re)
        });
    }
    FeatureVectors { z, phi }
}

// ---------------------------------------------------------------------------
// Flat parameter storage

/// Location of one named tensor inside the flat parameter vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorSpec {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub offset: usize,
}

/// Handle to a registered tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TensorId(usize);

/// Every trainable scalar of a model, in registration order.
#[derive(Debug, Clone)]
pub struct Params {
    pub data: Vec<f64>,
    specs: Vec<TensorSpec>,
}

impl Params {
    pub fn new() -> Self {
        Params { data: Vec::new(), specs: Vec::new() }
    }

    pub fn register(&mut self, name: &str, rows: usize, cols: usize) -> TensorId {
        assert!(rows > 0 && cols > 0, "empty tensor {name}");
        let offset = self.data.len();
        self.data.resize(offset + rows * cols, 0.0);
        self.specs.push(TensorSpec { name: name.to_string(), rows, cols, offset });
        TensorId(self.specs.len() - 1)
    }

    pub fn specs(&self) -> &[TensorSpec] {
        &self.specs
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn view(&self, id: TensorId) -> ArrayView2<'_, f64> {
        let s = &self.specs[id.0];
        ArrayView2::from_shape((s.rows, s.cols), &self.data[s.offset..s.offset + s.rows * s.cols])
            .unwrap()
    }

    pub fn view_mut(&mut self, id: TensorId) -> ArrayViewMut2<'_, f64> {
        let s = &self.specs[id.0];
        ArrayViewMut2::from_shape(
            (s.rows, s.cols),
            &mut self.data[s.offset..s.offset + s.rows * s.cols],
        )
        .unwrap()
    }

    /// View into an external gradient buffer laid out like this parameter
    /// vector (gradients accumulate across shared-parameter uses, so the
    /// buffer is owned by the training step, not by the model).
    pub fn grad_view_mut<'a>(&self, grads: &'a mut [f64], id: TensorId) -> ArrayViewMut2<'a, f64> {
        let s = &self.specs[id.0];
        ArrayViewMut2::from_shape(
            (s.rows, s.cols),
            &mut grads[s.offset..s.offset + s.rows * s.cols],
        )
        .unwrap()
    }

    /// Fan-in-scaled uniform init: weight matrices (cols > 1) drawn from
    /// U(±gain/√cols), bias columns zeroed. Registration order and the seeded
    /// RNG make this bit-reproducible.
    pub fn init_fan_in_uniform(&mut self, rng: &mut impl Rng, gain: f64) {
        for s in &self.specs {
            let slice = &mut self.data[s.offset..s.offset + s.rows * s.cols];
            if s.cols == 1 {
                slice.fill(0.0);
            } else {
                let bound = gain / (s.cols as f64).sqrt();
                for x in slice {
                    *x = rng.gen_range(-bound..bound);
                }
            }
        }
    }
}

impl Default for Params {
    fn default() -> Self {
        Self::new()
    }
}

// ---------------------------------------------------------------------------
// Two-layer MLP with ReLU after the first layer

/// y = W2·relu(W1·x + b1) + b2, batched row-wise.
#[derive(Debug, Clone, Copy)]
pub struct Mlp {
    pub w1: TensorId,
    pub b1: TensorId,
    pub w2: TensorId,
    pub b2: TensorId,
    pub in_dim: usize,
    pub hidden: usize,
    pub out_dim: usize,
}

/// Cached activations from one forward pass, consumed by `backward`.
pub struct MlpTape {
    x: Array2<f64>,
    h: Array2<f64>,
}

impl Mlp {
    pub fn register(p: &mut Params, prefix: &str, in_dim: usize, hidden: usize, out_dim: usize) -> Mlp {
        Mlp {
            w1: p.register(&format!("{prefix}.w1"), hidden, in_dim),
            b1: p.register(&format!("{prefix}.b1"), hidden, 1),
            w2: p.register(&format!("{prefix}.w2"), out_dim, hidden),
            b2: p.register(&format!("{prefix}.b2"), out_dim, 1),
            in_dim,
            hidden,
            out_dim,
        }
    }

    /// x: (n, in) → y: (n, out), plus the tape for the backward pass.
    pub fn forward(&self, p: &Params, x: &Array2<f64>) -> (Array2<f64>, MlpTape) {
        assert_eq!(x.ncols(), self.in_dim, "mlp input width");
        let w1 = p.view(self.w1);
        let b1 = p.view(self.b1);
        let mut h = x.dot(&w1.t());
        for (mut row, _) in h.axis_iter_mut(Axis(0)).zip(0..) {
            for (j, val) in row.iter_mut().enumerate() {
                *val += b1[(j, 0)];
                if *val < 0.0 {
                    *val = 0.0;
                }
            }
        }
        let w2 = p.view(self.w2);
        let b2 = p.view(self.b2);
        let mut y = h.dot(&w2.t());
        for mut row in y.axis_iter_mut(Axis(0)) {
            for (j, val) in row.iter_mut().enumerate() {
                *val += b2[(j, 0)];
            }
        }
        (y, MlpTape { x: x.clone(), h })
    }

    /// dy: (n, out) → dx: (n, in); parameter gradients accumulate into
    /// `grads`. ReLU uses subgradient 0 at 0 (mask is h > 0).
    pub fn backward(
        &self,
        p: &Params,
        tape: &MlpTape,
        dy: &Array2<f64>,
        grads: &mut [f64],
    ) -> Array2<f64> {
        // Second layer.
        let dw2 = dy.t().dot(&tape.h);
        accumulate(&mut p.grad_view_mut(grads, self.w2), &dw2);
        let db2 = dy.sum_axis(Axis(0));
        {
            let mut g = p.grad_view_mut(grads, self.b2);
            for (j, v) in db2.iter().enumerate() {
                g[(j, 0)] += v;
            }
        }
        // Through ReLU.
        let w2 = p.view(self.w2);
        let mut dh = dy.dot(&w2);
        dh.zip_mut_with(&tape.h, |d, &h| {
            if h <= 0.0 {
                *d = 0.0;
            }
        });
        // First layer.
        let dw1 = dh.t().dot(&tape.x);
        accumulate(&mut p.grad_view_mut(grads, self.w1), &dw1);
        let db1 = dh.sum_axis(Axis(0));
        {
            let mut g = p.grad_view_mut(grads, self.b1);
            for (j, v) in db1.iter().enumerate() {
                g[(j, 0)] += v;
            }
        }
        let w1 = p.view(self.w1);
        dh.dot(&w1)
    }
}

fn accumulate(dst: &mut ArrayViewMut2<'_, f64>, src: &Array2<f64>) {
    dst.zip_mut_with(src, |d, &s| *d += s);
}

// ---------------------------------------------------------------------------
// Fusion network

/// Which paths feed the final embedding MLP.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FusionVariant {
    /// Magnitude and phase each pass through their own learned MLP.
    Learned,
    /// Magnitude path only; the phase half of the concatenation is zeroed.
    MagOnly,
    /// Phase path only; the magnitude half is zeroed.
    PhaseOnly,
    /// Raw z and phi concatenated; the per-path MLPs are bypassed entirely.
    Concat,
}

impl FusionVariant {
    pub const ALL: [FusionVariant; 4] = [
        FusionVariant::Learned,
        FusionVariant::MagOnly,
        FusionVariant::PhaseOnly,
        FusionVariant::Concat,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FusionVariant::Learned => "learned",
            FusionVariant::MagOnly => "mag_only",
            FusionVariant::PhaseOnly => "phase_only",
            FusionVariant::Concat => "concat",
        }
    }
}

impl std::str::FromStr for FusionVariant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "learned" => Ok(FusionVariant::Learned),
            "mag_only" | "mag" => Ok(FusionVariant::MagOnly),
            "phase_only" | "phase" => Ok(FusionVariant::PhaseOnly),
            "concat" => Ok(FusionVariant::Concat),
            other => Err(format!(
                "unknown fusion variant '{other}' (expected learned, mag_only, phase_only, concat)"
            )),
        }
    }
}

/// The embedding network: h_z and h_phi transform magnitude and phase
/// (W → hidden → W each), and h_final maps their concatenation to the
/// d-dimensional embedding.
#[derive(Debug, Clone, Copy)]
pub struct FusionNet {
    pub h_z: Mlp,
    pub h_phi: Mlp,
    pub h_final: Mlp,
    pub variant: FusionVariant,
    pub w_total: usize,
    pub d: usize,
}

pub struct FuseTape {
    z_tape: Option<MlpTape>,
    phi_tape: Option<MlpTape>,
    final_tape: MlpTape,
}

impl FusionNet {
    pub fn register(
        p: &mut Params,
        w_total: usize,
        path_hidden: usize,
        final_hidden: usize,
        d: usize,
        variant: FusionVariant,
    ) -> FusionNet {
        FusionNet {
            h_z: Mlp::register(p, "h_z", w_total, path_hidden, w_total),
            h_phi: Mlp::register(p, "h_phi", w_total, path_hidden, w_total),
            h_final: Mlp::register(p, "h_final", 2 * w_total, final_hidden, d),
            variant,
            w_total,
            d,
        }
    }

    /// z, phi: (n, W) feature batches → embeddings (n, d).
    pub fn forward(&self, p: &Params, z: &Array2<f64>, phi: &Array2<f64>) -> (Array2<f64>, FuseTape) {
        let n = z.nrows();
        assert_eq!(phi.nrows(), n);
        let zeros = || Array2::zeros((n, self.w_total));
        let (z_star, z_tape, phi_star, phi_tape) = match self.variant {
            FusionVariant::Learned => {
                let (zs, zt) = self.h_z.forward(p, z);
                let (ps, pt) = self.h_phi.forward(p, phi);
                (zs, Some(zt), ps, Some(pt))
            }
            FusionVariant::MagOnly => {
                let (zs, zt) = self.h_z.forward(p, z);
                (zs, Some(zt), zeros(), None)
            }
            FusionVariant::PhaseOnly => {
                let (ps, pt) = self.h_phi.forward(p, phi);
                (zeros(), None, ps, Some(pt))
            }
            FusionVariant::Concat => (z.clone(), None, phi.clone(), None),
        };
        let mut cat = Array2::zeros((n, 2 * self.w_total));
        cat.slice_mut(ndarray::s![.., ..self.w_total]).assign(&z_star);
        cat.slice_mut(ndarray::s![.., self.w_total..]).assign(&phi_star);
        let (v, final_tape) = self.h_final.forward(p, &cat);
        (v, FuseTape { z_tape, phi_tape, final_tape })
    }

    /// dv: (n, d) → parameter gradients (accumulated into `grads`).
    pub fn backward(&self, p: &Params, tape: &FuseTape, dv: &Array2<f64>, grads: &mut [f64]) {
        let dcat = self.h_final.backward(p, &tape.final_tape, dv, grads);
        let dz_star = dcat.slice(ndarray::s![.., ..self.w_total]).to_owned();
        let dphi_star = dcat.slice(ndarray::s![.., self.w_total..]).to_owned();
        if let Some(t) = &tape.z_tape {
            self.h_z.backward(p, t, &dz_star, grads);
        }
        if let Some(t) = &tape.phi_tape {
            self.h_phi.backward(p, t, &dphi_star, grads);
        }
        // Concat routes no gradient into the per-path MLPs; the inputs are
        // data, not parameters.
    }
}

// ---------------------------------------------------------------------------
// Losses

/// Mean softmax cross-entropy over a batch, with the gradient w.r.t. the
/// logits. Log-sum-exp is computed against the row max for stability.
pub fn softmax_cross_entropy(logits: &Array2<f64>, labels: &[usize]) -> (f64, Array2<f64>) {
    let n = logits.nrows();
    assert_eq!(labels.len(), n, "one label per row");
    let k = logits.ncols();
    let mut dlogits = Array2::zeros((n, k));
    let mut loss = 0.0;
    for i in 0..n {
        assert!(labels[i] < k, "label {} out of range {k}", labels[i]);
        let row = logits.row(i);
        let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let sum_exp: f64 = row.iter().map(|&l| (l - m).exp()).sum();
        let lse = m + sum_exp.ln();
        loss += lse - row[labels[i]];
        for j in 0..k {
            let softmax = (row[j] - m).exp() / sum_exp;
            dlogits[(i, j)] = (softmax - if j == labels[i] { 1.0 } else { 0.0 }) / n as f64;
        }
    }
    (loss / n as f64, dlogits)
}

/// Row-wise Euclidean distance between paired embeddings, with gradients.
/// At coincident rows the subgradient is 0.
pub fn pair_distances(va: &Array2<f64>, vb: &Array2<f64>) -> Vec<f64> {
    assert_eq!(va.dim(), vb.dim());
    va.axis_iter(Axis(0))
        .zip(vb.axis_iter(Axis(0)))
        .map(|(a, b)| {
            a.iter()
                .zip(b.iter())
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt()
        })
        .collect()
}

/// Mean squared error between predicted and target distances, plus the
/// gradients w.r.t. the two embedding batches.
pub fn distance_mse(
    va: &Array2<f64>,
    vb: &Array2<f64>,
    target: &[f64],
) -> (f64, Array2<f64>, Array2<f64>) {
    let n = va.nrows();
    assert_eq!(target.len(), n);
    let pred = pair_distances(va, vb);
    let mut dva = Array2::zeros(va.dim());
    let mut dvb = Array2::zeros(vb.dim());
    let mut loss = 0.0;
    for i in 0..n {
        let err = pred[i] - target[i];
        loss += err * err;
        if pred[i] > 0.0 {
            // d‖a−b‖/da = (a−b)/‖a−b‖; chain with d(err²)/dpred = 2·err.
            let scale = 2.0 * err / (pred[i] * n as f64);
            for j in 0..va.ncols() {
                let diff = va[(i, j)] - vb[(i, j)];
                dva[(i, j)] = scale * diff;
                dvb[(i, j)] = -scale * diff;
            }
        }
    }
    (loss / n as f64, dva, dvb)
}

// ---------------------------------------------------------------------------
// Optimizer

/// AdamW with decoupled weight decay over the flat parameter vector.
#[derive(Debug, Clone)]
pub struct AdamW {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub wd: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl AdamW {
    pub fn new(len: usize, lr: f64, wd: f64) -> AdamW {
        AdamW { lr, beta1: 0.9, beta2: 0.999, eps: 1e-8, wd, m: vec![0.0; len], v: vec![0.0; len], t: 0 }
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) {
        assert_eq!(params.len(), self.m.len());
        assert_eq!(grads.len(), self.m.len());
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] -= self.lr * (m_hat / (v_hat.sqrt() + self.eps) + self.wd * params[i]);
        }
    }
}

// ---------------------------------------------------------------------------
// Finite-difference gradient checking

/// Compare analytic gradients against central finite differences at `probes`
/// randomly chosen coordinates. Returns the worst relative error.
///
/// `loss` must be a pure function of the parameter slice.
pub fn gradient_check(
    params: &mut [f64],
    analytic: &[f64],
    probes: usize,
    step: f64,
    rng: &mut impl Rng,
    mut loss: impl FnMut(&[f64]) -> f64,
) -> f64 {
    assert_eq!(params.len(), analytic.len());
    let mut worst: f64 = 0.0;
    for _ in 0..probes {
        let i = rng.gen_range(0..params.len());
        let saved = params[i];
        params[i] = saved + step;
        let up = loss(params);
        params[i] = saved - step;
        let down = loss(params);
        params[i] = saved;
        let numeric = (up - down) / (2.0 * step);
        let denom = numeric.abs().max(analytic[i].abs()).max(1e-8);
        worst = worst.max((numeric - analytic[i]).abs() / denom);
    }
    worst
}

// ---------------------------------------------------------------------------
// Checkpoints: "P2VM" little-endian binary

pub const MODEL_MAGIC: [u8; 4] = *b"P2VM";
pub const MODEL_VERSION: u32 = 1;

/// Write a checkpoint: magic, version, config echo (length-prefixed TOML),
/// 32-byte config hash, then each tensor as name/rows/cols/data in
/// registration order.
pub fn save_model(
    w: &mut impl Write,
    params: &Params,
    config_toml: &str,
    config_hash: &[u8; 32],
) -> Result<(), NnError> {
    w.write_all(&MODEL_MAGIC)?;
    w.write_all(&MODEL_VERSION.to_le_bytes())?;
    let cfg = config_toml.as_bytes();
    w.write_all(&(cfg.len() as u32).to_le_bytes())?;
    w.write_all(cfg)?;
    w.write_all(config_hash)?;
    w.write_all(&(params.specs.len() as u32).to_le_bytes())?;
    for s in &params.specs {
        let name = s.name.as_bytes();
        w.write_all(&(name.len() as u32).to_le_bytes())?;
        w.write_all(name)?;
        w.write_all(&(s.rows as u32).to_le_bytes())?;
        w.write_all(&(s.cols as u32).to_le_bytes())?;
        for x in &params.data[s.offset..s.offset + s.rows * s.cols] {
            w.write_all(&x.to_le_bytes())?;
        }
    }
    Ok(())
}

/// A checkpoint read back from disk; tensor layout mirrors a freshly
/// registered model so the data can be ported across after a shape check.
pub struct Checkpoint {
    pub params: Params,
    pub config_toml: String,
    pub config_hash: [u8; 32],
}

pub fn load_model(r: &mut impl Read) -> Result<Checkpoint, NnError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if magic != MODEL_MAGIC {
        return Err(NnError::BadMagic);
    }
    let version = read_u32(r)?;
    if version != MODEL_VERSION {
        return Err(NnError::BadVersion(version));
    }
    let cfg_len = read_u32(r)? as usize;
    if cfg_len > 1 << 20 {
        return Err(NnError::Corrupt("implausible config length".into()));
    }
    let mut cfg = vec![0u8; cfg_len];
    r.read_exact(&mut cfg)?;
    let config_toml =
        String::from_utf8(cfg).map_err(|_| NnError::Corrupt("config echo not UTF-8".into()))?;
    let mut config_hash = [0u8; 32];
    r.read_exact(&mut config_hash)?;
    let n_tensors = read_u32(r)? as usize;
    let mut params = Params::new();
    for _ in 0..n_tensors {
        let name_len = read_u32(r)? as usize;
        if name_len > 4096 {
            return Err(NnError::Corrupt("implausible tensor name".into()));
        }
        let mut name = vec![0u8; name_len];
        r.read_exact(&mut name)?;
        let name =
            String::from_utf8(name).map_err(|_| NnError::Corrupt("tensor name not UTF-8".into()))?;
        let rows = read_u32(r)? as usize;
        let cols = read_u32(r)? as usize;
        if rows == 0 || cols == 0 || rows.saturating_mul(cols) > 1 << 28 {
            return Err(NnError::Corrupt(format!("implausible shape {rows}x{cols}")));
        }
        let id = params.register(&name, rows, cols);
        let spec = params.specs[id.0].clone();
        let mut buf = [0u8; 8];
        for i in 0..rows * cols {
            r.read_exact(&mut buf)
                .map_err(|_| NnError::Corrupt("tensor data truncated".into()))?;
            params.data[spec.offset + i] = f64::from_le_bytes(buf);
        }
    }
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(NnError::Corrupt("trailing bytes".into()));
    }
    Ok(Checkpoint { params, config_toml, config_hash })
}

/// Copy checkpoint data into a freshly registered parameter vector, failing
/// loudly if the layouts disagree.
pub fn restore_into(target: &mut Params, ckpt: &Checkpoint) -> Result<(), NnError> {
    if target.specs != ckpt.params.specs {
        return Err(NnError::ShapeMismatch(format!(
            "checkpoint layout ({} tensors) does not match model ({} tensors)",
            ckpt.params.specs.len(),
            target.specs.len()
        )));
    }
    target.data.copy_from_slice(&ckpt.params.data);
    Ok(())
}

fn read_u32(r: &mut impl Read) -> Result<u32, NnError> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}
