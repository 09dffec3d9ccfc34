//! Binary model files.
//!
//! Layout (little-endian): `OMXM`, u32 version, u8 model kind, u8 flags
//! (bit 0: projector present, bit 1: log1p inputs), then the optional
//! projector and the model payload.

use std::path::Path;

use super::write_atomic;
use crate::elm::{Activation, ElmModel};
use crate::error::{Error, Result};
use crate::esn::{EsnConfig, EsnModel};
use crate::forest::{ForestModel, Node, RegressionTree};
use crate::matrix::DenseMatrix;
use crate::model::{FittedModel, ModelKind};
use crate::preprocess::Projector;

pub const MAGIC: &[u8; 4] = b"OMXM";
pub const FORMAT_VERSION: u32 = 1;

/// A fitted model together with the projector its inputs went through.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub projector: Option<Projector>,
    /// Inputs pass through `ln(1 + x)` before the projector.
    pub log1p: bool,
    pub model: FittedModel,
}

#[derive(Default)]
struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn usize(&mut self, v: usize) {
        self.u64(v as u64);
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64s(&mut self, v: &[f64]) {
        self.usize(v.len());
        for &x in v {
            self.f64(x);
        }
    }
    fn matrix(&mut self, m: &DenseMatrix) {
        self.usize(m.rows());
        self.usize(m.cols());
        for &x in m.data() {
            self.f64(x);
        }
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(Error::Integrity(format!("file truncated while reading {what} at byte {}", self.pos)));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
    fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }
    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }
    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }
    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
    fn usize(&mut self, what: &str) -> Result<usize> {
        let v = self.u64(what)?;
        usize::try_from(v).map_err(|_| Error::Integrity(format!("{what} out of range: {v}")))
    }
    /// A count of items each at least `unit` bytes long.
    fn count(&mut self, unit: usize, what: &str) -> Result<usize> {
        let n = self.usize(what)?;
        if n.checked_mul(unit).is_none_or(|b| b > self.remaining()) {
            return Err(Error::Integrity(format!("file truncated: {what} = {n} exceeds remaining bytes")));
        }
        Ok(n)
    }
    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
    fn f64s(&mut self, what: &str) -> Result<Vec<f64>> {
        let n = self.count(8, what)?;
        (0..n).map(|_| self.f64(what)).collect()
    }
    fn matrix(&mut self, what: &str) -> Result<DenseMatrix> {
        let rows = self.usize(what)?;
        let cols = self.usize(what)?;
        let len = rows
            .checked_mul(cols)
            .filter(|l| l.checked_mul(8).is_some_and(|b| b <= self.remaining()))
            .ok_or_else(|| Error::Integrity(format!("file truncated: {what} declared {rows}x{cols}")))?;
        let data = (0..len).map(|_| self.f64(what)).collect::<Result<Vec<_>>>()?;
        DenseMatrix::new(rows, cols, data)
    }
}

fn integrity(what: &str) -> impl FnOnce(Error) -> Error + '_ {
    move |e| match e {
        Error::Integrity(_) => e,
        other => Error::Integrity(format!("{what}: {other}")),
    }
}

fn put_projector(w: &mut Writer, p: &Projector) {
    w.usize(p.kept_columns().len());
    for &k in p.kept_columns() {
        w.u8(k as u8);
    }
    w.matrix(p.components());
    w.f64s(p.singular_values());
    w.usize(p.scaler().len());
    for &(m, s) in p.scaler() {
        w.f64(m);
        w.f64(s);
    }
}

fn get_projector(r: &mut Reader) -> Result<Projector> {
    let width = r.count(1, "projector width")?;
    let kept = r
        .take(width, "projector mask")?
        .iter()
        .map(|&b| match b {
            0 => Ok(false),
            1 => Ok(true),
            other => Err(Error::Integrity(format!("bad projector mask byte {other}"))),
        })
        .collect::<Result<Vec<_>>>()?;
    let v = r.matrix("projector components")?;
    let s = r.f64s("singular values")?;
    let k = r.count(16, "scaler length")?;
    let scaler = (0..k)
        .map(|_| Ok((r.f64("scaler")?, r.f64("scaler")?)))
        .collect::<Result<Vec<_>>>()?;
    Projector::from_parts(kept, v, s, scaler).map_err(integrity("projector"))
}

fn put_esn(w: &mut Writer, m: &EsnModel, out: &DenseMatrix) {
    let c = m.config();
    w.usize(c.reservoir_size);
    w.f64(c.spectral_radius);
    w.f64(c.input_scale);
    w.f64(c.reservoir_density);
    w.usize(c.state_iters);
    w.f64(c.state_tol);
    w.f64(c.ridge_lambda);
    w.u64(c.seed);
    w.matrix(m.input_weights());
    w.matrix(m.reservoir());
    w.matrix(out);
}

fn get_esn(r: &mut Reader) -> Result<EsnModel> {
    let config = EsnConfig {
        reservoir_size: r.usize("esn config")?,
        spectral_radius: r.f64("esn config")?,
        input_scale: r.f64("esn config")?,
        reservoir_density: r.f64("esn config")?,
        state_iters: r.usize("esn config")?,
        state_tol: r.f64("esn config")?,
        ridge_lambda: r.f64("esn config")?,
        seed: r.u64("esn config")?,
    };
    let w_in = r.matrix("esn input weights")?;
    let w = r.matrix("esn reservoir")?;
    let out = r.matrix("esn readout")?;
    EsnModel::from_weights(config, w_in, w, Some(out)).map_err(integrity("esn payload"))
}

fn put_elm(w: &mut Writer, m: &ElmModel, out: &DenseMatrix) {
    w.u8(m.activation().tag());
    w.matrix(m.input_weights());
    w.f64s(m.bias());
    w.matrix(out);
}

fn get_elm(r: &mut Reader) -> Result<ElmModel> {
    let tag = r.u8("activation")?;
    let act = Activation::from_tag(tag).ok_or_else(|| Error::Integrity(format!("unknown activation tag {tag}")))?;
    let w_in = r.matrix("elm input weights")?;
    let bias = r.f64s("elm bias")?;
    let out = r.matrix("elm readout")?;
    ElmModel::from_weights(w_in, bias, act, Some(out)).map_err(integrity("elm payload"))
}

fn put_forest(w: &mut Writer, f: &ForestModel) {
    w.usize(f.trees().len());
    for t in f.trees() {
        w.usize(t.n_features());
        w.usize(t.n_outputs());
        w.usize(t.nodes().len());
        for node in t.nodes() {
            match node {
                Node::Split { feature, threshold, left, right } => {
                    w.u8(0);
                    w.usize(*feature);
                    w.f64(*threshold);
                    w.usize(*left);
                    w.usize(*right);
                }
                Node::Leaf { value, samples } => {
                    w.u8(1);
                    w.usize(*samples);
                    for &v in value {
                        w.f64(v);
                    }
                }
            }
        }
    }
}

fn get_forest(r: &mut Reader) -> Result<ForestModel> {
    let n_trees = r.count(24, "tree count")?;
    let mut trees = Vec::with_capacity(n_trees);
    for _ in 0..n_trees {
        let n_features = r.usize("tree header")?;
        let n_outputs = r.count(8, "tree outputs")?;
        let n_nodes = r.count(9, "tree nodes")?;
        let mut nodes = Vec::with_capacity(n_nodes);
        for _ in 0..n_nodes {
            nodes.push(match r.u8("node tag")? {
                0 => Node::Split {
                    feature: r.usize("split")?,
                    threshold: r.f64("split")?,
                    left: r.usize("split")?,
                    right: r.usize("split")?,
                },
                1 => {
                    let samples = r.usize("leaf")?;
                    let value = (0..n_outputs).map(|_| r.f64("leaf")).collect::<Result<Vec<_>>>()?;
                    Node::Leaf { value, samples }
                }
                other => return Err(Error::Integrity(format!("unknown node tag {other}"))),
            });
        }
        trees.push(RegressionTree::from_nodes(nodes, n_features, n_outputs).map_err(integrity("tree"))?);
    }
    ForestModel::from_trees(trees).map_err(integrity("forest"))
}

pub fn encode_model(file: &ModelFile) -> Result<Vec<u8>> {
    let mut w = Writer::default();
    w.0.extend_from_slice(MAGIC);
    w.0.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    w.u8(file.model.kind().tag());
    w.u8(file.projector.is_some() as u8 | (file.log1p as u8) << 1);
    if let Some(p) = &file.projector {
        put_projector(&mut w, p);
    }
    match &file.model {
        FittedModel::Esn(m) => put_esn(&mut w, m, m.readout().ok_or(Error::State("ESN is not fitted"))?),
        FittedModel::Elm(m) => put_elm(&mut w, m, m.output_weights().ok_or(Error::State("ELM is not fitted"))?),
        FittedModel::Forest(f) => put_forest(&mut w, f),
    }
    Ok(w.0)
}

pub fn decode_model(bytes: &[u8]) -> Result<ModelFile> {
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(Error::Format("not a model file (bad magic bytes)".into()));
    }
    let mut r = Reader { buf: bytes, pos: 4 };
    let version = r.u32("version")?;
    if version != FORMAT_VERSION {
        return Err(Error::UnsupportedVersion {
            found: version,
            supported: FORMAT_VERSION,
        });
    }
    let tag = r.u8("model kind")?;
    let kind = ModelKind::from_tag(tag).ok_or_else(|| Error::Format(format!("unknown model kind tag {tag}")))?;
    let flags = r.u8("flags")?;
    if flags & !0b11 != 0 {
        return Err(Error::Integrity(format!("bad flags byte {flags:#04x}")));
    }
    let projector = if flags & 1 != 0 { Some(get_projector(&mut r)?) } else { None };
    let model = match kind {
        ModelKind::Esn => FittedModel::Esn(get_esn(&mut r)?),
        ModelKind::Elm => FittedModel::Elm(get_elm(&mut r)?),
        ModelKind::Forest => FittedModel::Forest(get_forest(&mut r)?),
    };
    if r.remaining() != 0 {
        return Err(Error::Integrity(format!("{} trailing bytes after model payload", r.remaining())));
    }
    if let Some(p) = &projector {
        if p.k() != model.input_dim() {
            return Err(Error::Integrity(format!(
                "projector emits {} columns but the model expects {}",
                p.k(),
                model.input_dim()
            )));
        }
    }
    Ok(ModelFile {
        projector,
        log1p: flags & 2 != 0,
        model,
    })
}

pub fn save_model(file: &ModelFile, path: &Path) -> Result<()> {
    write_atomic(path, &encode_model(file)?)
}

pub fn load_model(path: &Path) -> Result<ModelFile> {
    let bytes = std::fs::read(path).map_err(|e| Error::from(e).context(path.display().to_string()))?;
    decode_model(&bytes)
}
