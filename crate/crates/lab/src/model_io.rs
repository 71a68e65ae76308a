//! Little-endian model files. Every file starts with a four-byte magic that
//! names the method and a `u32` format version, followed by `u32` dimensions
//! and raw `f64` tensors.
//!
//! | magic  | dimensions                                              | tensors |
//! |--------|---------------------------------------------------------|---------|
//! | `SWEC` | filters, fh, fw, input_h, input_w, classes              | conv filters, conv biases, fc weights, fc biases |
//! | `SWSV` | input_h, input_w, intervals, features, classes          | mean, scale, weights, biases |
//! | `SWTM` | input_h, input_w, layers, widths (layers + 1)           | mean, scale, then weights and biases per layer |
//! | `SWAE` | input_h, input_w, intervals, features, code, classes    | mean, scale, encoder, decoder, head (weights then biases each) |

use std::path::Path;

use swec_core::baselines::{
    Activation, AutoencoderClassifier, Dense, LinearOvrSvm, Mlp, Standardizer, TaperedMlp,
    STATS_PER_INTERVAL,
};
use swec_core::tinycnn::CnnParams;
use swec_core::{CnnArch, CnnModel, EventClass};

use crate::classifier::{Classifier, InputShape};
use crate::error::{LabError, LabResult};

pub const FORMAT_VERSION: u32 = 1;

pub const CNN_MAGIC: [u8; 4] = *b"SWEC";
pub const SVM_MAGIC: [u8; 4] = *b"SWSV";
pub const TMLP_MAGIC: [u8; 4] = *b"SWTM";
pub const AUTOENCODER_MAGIC: [u8; 4] = *b"SWAE";

const K: usize = EventClass::COUNT;

pub fn encode_model(model: &Classifier) -> Vec<u8> {
    let mut w = Writer::default();
    match model {
        Classifier::Cnn(m) => {
            w.header(CNN_MAGIC);
            let a = &m.arch;
            w.dims(&[
                a.num_filters,
                a.filter_h,
                a.filter_w,
                a.input_h,
                a.input_w,
                a.num_classes,
            ]);
            let p = &m.params;
            for t in [&p.conv_filters, &p.conv_biases, &p.fc_weights, &p.fc_biases] {
                w.f64s(t);
            }
        }
        Classifier::Svm {
            model,
            input,
            intervals,
        } => {
            w.header(SVM_MAGIC);
            w.dims(&[input.height, input.width, *intervals, model.dim(), K]);
            w.standardizer(&model.standardizer);
            w.f64s(&model.weights);
            w.f64s(&model.biases);
        }
        Classifier::Tmlp { model, input } => {
            w.header(TMLP_MAGIC);
            w.dims(&[input.height, input.width, model.net.layers.len()]);
            w.dims(&model.net.widths());
            w.standardizer(&model.standardizer);
            for layer in &model.net.layers {
                w.dense(layer);
            }
        }
        Classifier::Autoencoder {
            model,
            input,
            intervals,
        } => {
            w.header(AUTOENCODER_MAGIC);
            let code = model.autoencoder.layers[0].outputs;
            w.dims(&[
                input.height,
                input.width,
                *intervals,
                model.standardizer.dim(),
                code,
                K,
            ]);
            w.standardizer(&model.standardizer);
            for layer in model.autoencoder.layers.iter().chain(&model.head.layers) {
                w.dense(layer);
            }
        }
    }
    w.0
}

/// Parses a model file image. `path` only labels diagnostics.
pub fn decode_model(bytes: &[u8], path: &Path) -> LabResult<Classifier> {
    let mut r = Reader {
        bytes,
        pos: 0,
        path,
    };
    let magic: [u8; 4] = r.take(4)?.try_into().expect("four bytes");
    let version = r.u32()?;
    if version != FORMAT_VERSION as usize {
        return Err(r.err_at(4, format!("unsupported format version {version}")));
    }
    let model = match &magic {
        b"SWEC" => {
            let d = r.dims(6)?;
            let arch = CnnArch {
                num_filters: d[0],
                filter_h: d[1],
                filter_w: d[2],
                input_h: d[3],
                input_w: d[4],
                num_classes: d[5],
            };
            arch.validate().map_err(|e| r.err_at(8, e.to_string()))?;
            let z = CnnParams::zeros(&arch);
            let params = CnnParams {
                conv_filters: r.f64s(z.conv_filters.len())?,
                conv_biases: r.f64s(z.conv_biases.len())?,
                fc_weights: r.f64s(z.fc_weights.len())?,
                fc_biases: r.f64s(z.fc_biases.len())?,
            };
            Classifier::Cnn(CnnModel { arch, params })
        }
        b"SWSV" => {
            let d = r.dims(5)?;
            let (input, intervals, dim) = energy_dims(&r, &d)?;
            if d[4] != K {
                return Err(r.err_at(8, format!("{} classes, expected {K}", d[4])));
            }
            let standardizer = r.standardizer(dim)?;
            let weights = r.f64s(K * dim)?;
            let biases = r.f64s(K)?.try_into().expect("four biases");
            Classifier::Svm {
                model: LinearOvrSvm {
                    standardizer,
                    weights,
                    biases,
                },
                input,
                intervals,
            }
        }
        b"SWTM" => {
            let d = r.dims(3)?;
            let input = input_shape(&r, d[0], d[1])?;
            let n = d[2];
            if n == 0 || n > 64 {
                return Err(r.err_at(16, format!("{n} layers")));
            }
            let widths = r.dims(n + 1)?;
            if widths[0] != input.height * input.width || widths[n] != K {
                return Err(r.err_at(20, format!("layer widths {widths:?} do not fit the input")));
            }
            let standardizer = r.standardizer(widths[0])?;
            let layers = widths
                .windows(2)
                .map(|w| r.dense(w[0], w[1]))
                .collect::<LabResult<Vec<_>>>()?;
            Classifier::Tmlp {
                model: TaperedMlp {
                    standardizer,
                    net: Mlp {
                        layers,
                        hidden: Activation::Relu,
                    },
                },
                input,
            }
        }
        b"SWAE" => {
            let d = r.dims(6)?;
            let (input, intervals, dim) = energy_dims(&r, &d)?;
            let code = d[4];
            if code == 0 || d[5] != K {
                return Err(r.err_at(24, format!("code width {code}, {} classes", d[5])));
            }
            let standardizer = r.standardizer(dim)?;
            let encoder = r.dense(dim, code)?;
            let decoder = r.dense(code, dim)?;
            let head = r.dense(code, K)?;
            Classifier::Autoencoder {
                model: AutoencoderClassifier {
                    standardizer,
                    autoencoder: Mlp {
                        layers: vec![encoder, decoder],
                        hidden: Activation::Identity,
                    },
                    head: Mlp {
                        layers: vec![head],
                        hidden: Activation::Identity,
                    },
                },
                input,
                intervals,
            }
        }
        _ => {
            return Err(r.err_at(
                0,
                format!("unknown magic {:?}", String::from_utf8_lossy(&magic)),
            ))
        }
    };
    if r.pos != bytes.len() {
        return Err(r.err_at(r.pos, format!("{} trailing bytes", bytes.len() - r.pos)));
    }
    Ok(model)
}

pub fn save_model(model: &Classifier, path: &Path) -> LabResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
    }
    std::fs::write(path, encode_model(model)).map_err(|e| LabError::io(path, e))
}

pub fn load_model(path: &Path) -> LabResult<Classifier> {
    let bytes = std::fs::read(path).map_err(|e| LabError::io(path, e))?;
    decode_model(&bytes, path)
}

fn input_shape(r: &Reader, height: usize, width: usize) -> LabResult<InputShape> {
    if height == 0 || width == 0 {
        return Err(r.err_at(8, format!("empty {height}x{width} input")));
    }
    Ok(InputShape { height, width })
}

/// Input shape, interval count and feature length of an energy-feature model.
fn energy_dims(r: &Reader, d: &[usize]) -> LabResult<(InputShape, usize, usize)> {
    let input = input_shape(r, d[0], d[1])?;
    let (intervals, dim) = (d[2], d[3]);
    if intervals == 0
        || intervals > input.width
        || dim != input.height * intervals * STATS_PER_INTERVAL
    {
        return Err(r.err_at(16, format!("{dim} features from {intervals} intervals")));
    }
    Ok((input, intervals, dim))
}

#[derive(Default)]
struct Writer(Vec<u8>);

impl Writer {
    fn header(&mut self, magic: [u8; 4]) {
        self.0.extend_from_slice(&magic);
        self.0.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    }

    fn dims(&mut self, dims: &[usize]) {
        for &d in dims {
            let d = u32::try_from(d).expect("dimension fits in u32");
            self.0.extend_from_slice(&d.to_le_bytes());
        }
    }

    fn f64s(&mut self, values: &[f64]) {
        for v in values {
            self.0.extend_from_slice(&v.to_le_bytes());
        }
    }

    fn standardizer(&mut self, s: &Standardizer) {
        self.f64s(&s.mean);
        self.f64s(&s.scale);
    }

    fn dense(&mut self, layer: &Dense) {
        self.f64s(&layer.weights);
        self.f64s(&layer.biases);
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl Reader<'_> {
    fn err_at(&self, offset: usize, detail: String) -> LabError {
        LabError::format(self.path, format!("byte {offset}: {detail}"))
    }

    fn take(&mut self, n: usize) -> LabResult<&[u8]> {
        let left = self.bytes.len() - self.pos;
        if n > left {
            return Err(self.err_at(
                self.pos,
                format!("truncated: {n} bytes needed, {left} left"),
            ));
        }
        let out = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u32(&mut self) -> LabResult<usize> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes(b.try_into().expect("four bytes")) as usize)
    }

    fn dims(&mut self, n: usize) -> LabResult<Vec<usize>> {
        (0..n).map(|_| self.u32()).collect()
    }

    fn f64s(&mut self, n: usize) -> LabResult<Vec<f64>> {
        let start = self.pos;
        let len = n
            .checked_mul(8)
            .ok_or_else(|| self.err_at(start, format!("tensor of {n} values")))?;
        let values: Vec<f64> = self
            .take(len)?
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("eight bytes")))
            .collect();
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(self.err_at(start + 8 * i, "non-finite parameter".into()));
        }
        Ok(values)
    }

    fn standardizer(&mut self, dim: usize) -> LabResult<Standardizer> {
        Ok(Standardizer {
            mean: self.f64s(dim)?,
            scale: self.f64s(dim)?,
        })
    }

    fn dense(&mut self, inputs: usize, outputs: usize) -> LabResult<Dense> {
        Ok(Dense {
            inputs,
            outputs,
            weights: self.f64s(inputs * outputs)?,
            biases: self.f64s(outputs)?,
        })
    }
}
