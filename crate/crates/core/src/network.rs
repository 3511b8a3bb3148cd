//! The linear dilated temporal convolutional network: parameter container,
//! forward pass, effective-filter extraction, and realization of rank-one
//! tensor terms as network weights.
//!
//! Layer 0 maps the d input coordinates to M channels by ordinary
//! convolution; layer k (k >= 1) maps channels to channels with dilation
//! rate l^k. All filters have length l and there are no bias terms, so the
//! whole stack is equivalent to a single kernel of length l^K per input
//! dimension -- the effective filter.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hosvd::RankOneTerm;
use crate::rng::SplitMix64;
use crate::seq::{dilated_convolve, FunctionalKernel, ScalarSeq, VectorSeq};

pub const NET_FORMAT_TAG: &str = "ltcn-net-v1";

/// All filters of a K-layer, M-channel dilated network on d-dimensional
/// inputs. `weights[k][j][i]` is the length-l filter from channel j at layer
/// k to channel i at layer k+1; at layer 0 the "from" index ranges over the
/// input dimensions instead.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvNetParams {
    filter_len: usize,
    layers: usize,
    channels: usize,
    input_dim: usize,
    weights: Vec<Vec<Vec<Vec<f64>>>>,
}

impl ConvNetParams {
    pub fn new(
        filter_len: usize,
        layers: usize,
        channels: usize,
        input_dim: usize,
        weights: Vec<Vec<Vec<Vec<f64>>>>,
    ) -> Result<Self> {
        if filter_len < 2 {
            return Err(Error::InvalidParameter("filter length must be >= 2".into()));
        }
        if layers < 1 || channels < 1 || input_dim < 1 {
            return Err(Error::InvalidParameter(
                "layers, channels and input dimension must be >= 1".into(),
            ));
        }
        if weights.len() != layers {
            return Err(Error::ShapeMismatch(format!(
                "expected {layers} layers of weights, got {}",
                weights.len()
            )));
        }
        for (k, layer) in weights.iter().enumerate() {
            let from = if k == 0 { input_dim } else { channels };
            if layer.len() != from {
                return Err(Error::ShapeMismatch(format!(
                    "layer {k}: expected {from} source channels, got {}",
                    layer.len()
                )));
            }
            for row in layer {
                if row.len() != channels {
                    return Err(Error::ShapeMismatch(format!(
                        "layer {k}: expected {channels} target channels, got {}",
                        row.len()
                    )));
                }
                for filter in row {
                    if filter.len() != filter_len {
                        return Err(Error::ShapeMismatch(format!(
                            "layer {k}: filter of length {}, expected {filter_len}",
                            filter.len()
                        )));
                    }
                    if filter.iter().any(|w| !w.is_finite()) {
                        return Err(Error::InvalidParameter("non-finite weight".into()));
                    }
                }
            }
        }
        Ok(Self {
            filter_len,
            layers,
            channels,
            input_dim,
            weights,
        })
    }

    pub fn zeros(filter_len: usize, layers: usize, channels: usize, input_dim: usize) -> Result<Self> {
        let weights = (0..layers)
            .map(|k| {
                let from = if k == 0 { input_dim } else { channels };
                vec![vec![vec![0.0; filter_len]; channels]; from]
            })
            .collect();
        Self::new(filter_len, layers, channels, input_dim, weights)
    }

    /// Weights drawn iid standard normal from a deterministic stream.
    pub fn random(
        filter_len: usize,
        layers: usize,
        channels: usize,
        input_dim: usize,
        rng: &mut SplitMix64,
    ) -> Result<Self> {
        let weights = (0..layers)
            .map(|k| {
                let from = if k == 0 { input_dim } else { channels };
                (0..from)
                    .map(|_| {
                        (0..channels)
                            .map(|_| (0..filter_len).map(|_| rng.next_normal()).collect())
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Self::new(filter_len, layers, channels, input_dim, weights)
    }

    pub fn filter_len(&self) -> usize {
        self.filter_len
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn weights(&self) -> &[Vec<Vec<Vec<f64>>>] {
        &self.weights
    }

    pub fn filter(&self, layer: usize, from: usize, to: usize) -> &[f64] {
        &self.weights[layer][from][to]
    }

    /// Number of stored filter taps.
    pub fn param_count(&self) -> usize {
        self.input_dim * self.channels * self.filter_len
            + self.layers.saturating_sub(1) * self.channels * self.channels * self.filter_len
    }

    /// Length of the effective filter, l^K.
    pub fn receptive_field(&self) -> Result<usize> {
        self.filter_len
            .checked_pow(self.layers as u32)
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "receptive field {}^{} overflows",
                    self.filter_len, self.layers
                ))
            })
    }

    fn dilation_at(&self, layer: usize) -> usize {
        self.filter_len.pow(layer as u32)
    }

    /// Run the network: layer 0 convolves the input coordinates, layer k
    /// convolves the previous channels with dilation l^k, and the output is
    /// the sum over last-layer channels. Accumulation order is channels
    /// ascending within a layer, layers ascending.
    pub fn forward(&self, x: &VectorSeq) -> Result<ScalarSeq> {
        if x.dim() != self.input_dim {
            return Err(Error::DimensionMismatch(self.input_dim, x.dim()));
        }
        let input_channels: Vec<ScalarSeq> = (0..self.input_dim)
            .map(|j| x.channel(j))
            .collect::<Result<_>>()?;
        let mut hidden: Vec<ScalarSeq> = (0..self.channels)
            .map(|i| {
                let mut acc = ScalarSeq::zero();
                for (j, chan) in input_channels.iter().enumerate() {
                    acc = acc.add(&dilated_convolve(&self.weights[0][j][i], chan, 1)?);
                }
                Ok(acc)
            })
            .collect::<Result<_>>()?;
        for k in 1..self.layers {
            let dilation = self.dilation_at(k);
            hidden = (0..self.channels)
                .map(|i| {
                    let mut acc = ScalarSeq::zero();
                    for (j, chan) in hidden.iter().enumerate() {
                        acc = acc.add(&dilated_convolve(&self.weights[k][j][i], chan, dilation)?);
                    }
                    Ok(acc)
                })
                .collect::<Result<_>>()?;
        }
        let mut out = ScalarSeq::zero();
        for chan in &hidden {
            out = out.add(chan);
        }
        Ok(out)
    }

    /// The kernel this network represents: per input dimension, push the
    /// dimension's layer-0 filters through the layer recursion
    /// e_{k+1}[c'] = sum_c w_{k,c,c'} conv_{l^k} e_k[c] and sum the final
    /// channels. Each channel of the result has length exactly l^K.
    pub fn effective_filter(&self) -> Result<FunctionalKernel> {
        let horizon = self.receptive_field()?;
        let mut channels = Vec::with_capacity(self.input_dim);
        for dim in 0..self.input_dim {
            let mut state: Vec<ScalarSeq> = (0..self.channels)
                .map(|c| ScalarSeq::new(0, self.weights[0][dim][c].clone()))
                .collect();
            for k in 1..self.layers {
                let dilation = self.dilation_at(k);
                state = (0..self.channels)
                    .map(|to| {
                        let mut acc = ScalarSeq::zero();
                        for (from, e) in state.iter().enumerate() {
                            acc =
                                acc.add(&dilated_convolve(&self.weights[k][from][to], e, dilation)?);
                        }
                        Ok(acc)
                    })
                    .collect::<Result<_>>()?;
            }
            let mut rho = ScalarSeq::zero();
            for e in &state {
                rho = rho.add(e);
            }
            channels.push(rho.window(0, horizon).values().to_vec());
        }
        FunctionalKernel::new(channels)
    }

    /// Forward response to the canonical impulse e_dim at time 0, read off
    /// on [0, l^K). Serves as an independent oracle for `effective_filter`.
    pub fn impulse_response(&self, dim: usize) -> Result<ScalarSeq> {
        if dim >= self.input_dim {
            return Err(Error::InvalidParameter(format!(
                "dimension {dim} out of range for d = {}",
                self.input_dim
            )));
        }
        let x = VectorSeq::impulse(self.input_dim, dim, 0)?;
        let out = self.forward(&x)?;
        Ok(out.window(0, self.receptive_field()?))
    }

    pub fn to_json(&self) -> Result<String> {
        let shadow = NetJson {
            fmt: NET_FORMAT_TAG.to_string(),
            l: self.filter_len,
            layers: self.layers,
            channels: self.channels,
            d: self.input_dim,
            weights: self.weights.clone(),
        };
        Ok(serde_json::to_string_pretty(&shadow)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let shadow: NetJson = serde_json::from_str(text)?;
        if shadow.fmt != NET_FORMAT_TAG {
            return Err(Error::Parse(format!(
                "unsupported network format tag {:?}, expected {NET_FORMAT_TAG:?}",
                shadow.fmt
            )));
        }
        Self::new(shadow.l, shadow.layers, shadow.channels, shadow.d, shadow.weights)
    }
}

#[derive(Serialize, Deserialize)]
struct NetJson {
    fmt: String,
    l: usize,
    #[serde(rename = "K")]
    layers: usize,
    #[serde(rename = "M")]
    channels: usize,
    d: usize,
    weights: Vec<Vec<Vec<Vec<f64>>>>,
}

/// Realize a sum of rank-one tensor terms as an actual network with one
/// channel per term and diagonal routing above layer 0. Term m assigned to
/// input dimension `term_dims[m]` occupies channel m: its layer-k filter is
/// `terms[m].factors[k]`, with the scalar scale folded into the last layer
/// (avoiding K-th roots of negative scales). The effective filter of the
/// result tensorizes back to the given rank-one sum per dimension.
pub fn from_rank_one_terms(
    terms: &[RankOneTerm],
    term_dims: &[usize],
    filter_len: usize,
    layers: usize,
    input_dim: usize,
) -> Result<ConvNetParams> {
    if terms.is_empty() {
        return Err(Error::InvalidParameter("empty term list".into()));
    }
    if terms.len() != term_dims.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} terms but {} dimension assignments",
            terms.len(),
            term_dims.len()
        )));
    }
    for (m, term) in terms.iter().enumerate() {
        if term.factors.len() != layers {
            return Err(Error::ShapeMismatch(format!(
                "term {m} has {} factors, expected {layers}",
                term.factors.len()
            )));
        }
        if term.factors.iter().any(|f| f.len() != filter_len) {
            return Err(Error::ShapeMismatch(format!(
                "term {m} has a factor of the wrong length"
            )));
        }
        if term_dims[m] >= input_dim {
            return Err(Error::InvalidParameter(format!(
                "term {m} assigned to dimension {} out of range",
                term_dims[m]
            )));
        }
    }
    let n_terms = terms.len();
    let mut net = ConvNetParams::zeros(filter_len, layers, n_terms, input_dim)?;
    for (m, term) in terms.iter().enumerate() {
        let last = layers - 1;
        for (k, factor) in term.factors.iter().enumerate() {
            let scaled: Vec<f64> = if k == last {
                factor.iter().map(|w| w * term.scale).collect()
            } else {
                factor.clone()
            };
            if k == 0 {
                net.weights[0][term_dims[m]][m] = scaled;
            } else {
                net.weights[k][m][m] = scaled;
            }
        }
    }
    Ok(net)
}
