//! Synthetic target generators with analytically known structure: shifts,
//! exponential and power-law decays, planted low-rank spectra, and kernels
//! loaded from JSON files.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::seq::FunctionalKernel;
use crate::tensor::{detensorize, outer_product, DenseTensor, Matrix};

/// Declarative description of a target kernel. The JSON form mirrors the
/// CLI spec strings, e.g. `{"kind":"exp","lambda":0.5,"horizon":1024,"d":1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum TargetSpec {
    /// Pure delay: rho(s) = 1 at s = k, zero elsewhere.
    #[serde(rename = "shift")]
    Shift {
        k: usize,
        #[serde(default = "default_dim")]
        d: usize,
    },
    /// Geometric decay rho(s) = lambda^s on [0, horizon).
    #[serde(rename = "exp")]
    Exponential {
        lambda: f64,
        horizon: usize,
        #[serde(default = "default_dim")]
        d: usize,
    },
    /// Power-law decay rho(s) = (1 + s)^(-alpha) on [0, horizon).
    #[serde(rename = "pow")]
    Power {
        alpha: f64,
        horizon: usize,
        #[serde(default = "default_dim")]
        d: usize,
    },
    /// Kernel of length l^K whose tensorization has a planted spectrum with
    /// scales 2^-r, r = 1..rank.
    #[serde(rename = "lowrank")]
    RandomLowRank {
        l: usize,
        #[serde(rename = "K")]
        layers: usize,
        rank: usize,
        seed: u64,
        #[serde(default = "default_dim")]
        d: usize,
    },
    /// Kernel loaded verbatim from a FunctionalKernel JSON file.
    #[serde(rename = "file")]
    File { path: String },
}

fn default_dim() -> usize {
    1
}

/// A generated kernel together with the fraction of the analytic target's
/// energy lost to horizon truncation (exactly zero for finitely supported
/// kinds). Callers should warn when the fraction exceeds 1e-14.
#[derive(Clone, Debug)]
pub struct GeneratedTarget {
    pub kernel: FunctionalKernel,
    pub truncated_energy_ratio: f64,
}

pub fn generate(spec: &TargetSpec) -> Result<GeneratedTarget> {
    match spec {
        TargetSpec::Shift { k, d } => {
            check_dim(*d)?;
            let mut channel = vec![0.0; k + 1];
            channel[*k] = 1.0;
            Ok(GeneratedTarget {
                kernel: FunctionalKernel::new(vec![channel; *d])?,
                truncated_energy_ratio: 0.0,
            })
        }
        TargetSpec::Exponential { lambda, horizon, d } => {
            check_dim(*d)?;
            if !lambda.is_finite() || *lambda <= 0.0 || *lambda >= 1.0 {
                return Err(Error::InvalidParameter(format!(
                    "lambda must lie in (0, 1), got {lambda}"
                )));
            }
            if *horizon < 1 {
                return Err(Error::InvalidParameter("horizon must be >= 1".into()));
            }
            let mut channel = Vec::with_capacity(*horizon);
            let mut value = 1.0;
            for _ in 0..*horizon {
                channel.push(value);
                value *= lambda;
            }
            // Geometric tail: sum_{s >= T} lambda^(2s) / sum_{s >= 0} = lambda^(2T).
            let ratio = lambda.powi(2 * *horizon as i32);
            Ok(GeneratedTarget {
                kernel: FunctionalKernel::new(vec![channel; *d])?,
                truncated_energy_ratio: ratio,
            })
        }
        TargetSpec::Power { alpha, horizon, d } => {
            check_dim(*d)?;
            if !alpha.is_finite() || *alpha <= 0.5 {
                return Err(Error::InvalidParameter(format!(
                    "alpha must exceed 0.5 for a square-summable kernel, got {alpha}"
                )));
            }
            if *horizon < 1 {
                return Err(Error::InvalidParameter("horizon must be >= 1".into()));
            }
            let channel: Vec<f64> = (0..*horizon)
                .map(|s| (1.0 + s as f64).powf(-alpha))
                .collect();
            let energy: f64 = channel.iter().map(|v| v * v).sum();
            // Integral bound on the dropped energy sum_{s >= T} (1+s)^(-2a).
            let t = *horizon as f64;
            let tail_upper = (1.0 + t).powf(1.0 - 2.0 * alpha) / (2.0 * alpha - 1.0)
                + (1.0 + t).powf(-2.0 * alpha);
            let ratio = tail_upper / (energy + tail_upper);
            Ok(GeneratedTarget {
                kernel: FunctionalKernel::new(vec![channel; *d])?,
                truncated_energy_ratio: ratio,
            })
        }
        TargetSpec::RandomLowRank {
            l,
            layers,
            rank,
            seed,
            d,
        } => {
            check_dim(*d)?;
            let kernel = planted_low_rank(*l, *layers, *rank, *seed, *d)?;
            Ok(GeneratedTarget {
                kernel,
                truncated_energy_ratio: 0.0,
            })
        }
        TargetSpec::File { path } => {
            let text = std::fs::read_to_string(path)?;
            Ok(GeneratedTarget {
                kernel: FunctionalKernel::from_json(&text)?,
                truncated_energy_ratio: 0.0,
            })
        }
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d < 1 {
        return Err(Error::InvalidParameter("d must be >= 1".into()));
    }
    Ok(())
}

/// Build a kernel whose tensorization has exactly `rank` nonzero spectrum
/// entries with magnitudes 2^-r. Per mode, a random orthonormal basis is
/// drawn; term r sits at a multi-index from a distance-2 code (base-l digits
/// of r-1 plus a checksum digit), so any two terms differ in at least two
/// modes. That makes the rank-one terms recoverable by every per-mode
/// factorization and the planted scales exactly the decomposition
/// magnitudes. The code caps the rank at l^(K-1): terms differing in a
/// single mode would merge into one direction, so denser plantings cannot
/// keep an exact spectrum.
fn planted_low_rank(l: usize, layers: usize, rank: usize, seed: u64, d: usize) -> Result<FunctionalKernel> {
    if l < 2 || layers < 1 {
        return Err(Error::InvalidParameter(
            "low-rank targets need l >= 2 and K >= 1".into(),
        ));
    }
    l.checked_pow(layers as u32)
        .ok_or_else(|| Error::InvalidParameter(format!("l^K overflows for {l}^{layers}")))?;
    let capacity = l.pow(layers as u32 - 1);
    if rank < 1 || rank > capacity {
        return Err(Error::InvalidParameter(format!(
            "rank must lie in 1..={capacity} for l = {l}, K = {layers}, got {rank}"
        )));
    }
    let mut rng = SplitMix64::new(seed);
    let mut channels = Vec::with_capacity(d);
    for _ in 0..d {
        let bases: Vec<Matrix> = (0..layers)
            .map(|_| random_orthonormal_basis(l, &mut rng))
            .collect();
        let mut tensor = DenseTensor::zeros(l, layers)?;
        for r in 1..=rank {
            let scale = 0.5f64.powi(r as i32);
            let digits = checksum_multi_index(r - 1, l, layers);
            // outer_product wants the outermost (highest mode) factor first
            let factors: Vec<Vec<f64>> = (0..layers)
                .rev()
                .map(|mode| bases[mode].column(digits[mode]))
                .collect();
            let term = outer_product(&factors)?;
            tensor.add_scaled_in_place(&term, scale);
        }
        channels.push(detensorize(&tensor));
    }
    FunctionalKernel::new(channels)
}

/// Base-l digits of `t` over K-1 positions plus their sum mod l as the last
/// digit. Distinct values of t yield multi-indices at Hamming distance >= 2.
fn checksum_multi_index(mut t: usize, l: usize, count: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(count);
    let mut sum = 0;
    for _ in 0..count.saturating_sub(1) {
        let digit = t % l;
        out.push(digit);
        sum += digit;
        t /= l;
    }
    out.push(sum % l);
    out
}

/// Random orthonormal basis from Gram-Schmidt on iid normal columns.
fn random_orthonormal_basis(n: usize, rng: &mut SplitMix64) -> Matrix {
    let mut m = Matrix::zeros(n, n);
    for j in 0..n {
        let mut col: Vec<f64> = (0..n).map(|_| rng.next_normal()).collect();
        loop {
            for prev in 0..j {
                let dot: f64 = (0..n).map(|i| col[i] * m.get(i, prev)).sum();
                for (i, v) in col.iter_mut().enumerate() {
                    *v -= dot * m.get(i, prev);
                }
            }
            let norm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 1e-8 {
                for v in col.iter_mut() {
                    *v /= norm;
                }
                break;
            }
            // Degenerate draw; take a fresh one (still deterministic).
            col = (0..n).map(|_| rng.next_normal()).collect();
        }
        for (i, v) in col.iter().enumerate() {
            m.set(i, j, *v);
        }
    }
    m
}

/// Parse a CLI target spec string: `shift:<k>`, `exp:<lambda>:<horizon>`,
/// `pow:<alpha>:<horizon>`, `lowrank:<l>:<K>:<rank>`, or `file:<path>`.
/// The dimension and the seed come from their global flags.
pub fn parse_target_spec(text: &str, d: usize, seed: u64) -> Result<TargetSpec> {
    let (kind, rest) = match text.split_once(':') {
        Some(pair) => pair,
        None => (text, ""),
    };
    let parts: Vec<&str> = if rest.is_empty() {
        Vec::new()
    } else {
        rest.split(':').collect()
    };
    let parse_usize = |s: &str, what: &str| -> Result<usize> {
        s.parse()
            .map_err(|_| Error::Parse(format!("bad {what} in target spec {text:?}")))
    };
    let parse_f64 = |s: &str, what: &str| -> Result<f64> {
        s.parse()
            .map_err(|_| Error::Parse(format!("bad {what} in target spec {text:?}")))
    };
    match kind {
        "shift" => {
            if parts.len() != 1 {
                return Err(Error::Parse(format!("expected shift:<k>, got {text:?}")));
            }
            Ok(TargetSpec::Shift {
                k: parse_usize(parts[0], "lag")?,
                d,
            })
        }
        "exp" => {
            if parts.len() != 2 {
                return Err(Error::Parse(format!(
                    "expected exp:<lambda>:<horizon>, got {text:?}"
                )));
            }
            Ok(TargetSpec::Exponential {
                lambda: parse_f64(parts[0], "lambda")?,
                horizon: parse_usize(parts[1], "horizon")?,
                d,
            })
        }
        "pow" => {
            if parts.len() != 2 {
                return Err(Error::Parse(format!(
                    "expected pow:<alpha>:<horizon>, got {text:?}"
                )));
            }
            Ok(TargetSpec::Power {
                alpha: parse_f64(parts[0], "alpha")?,
                horizon: parse_usize(parts[1], "horizon")?,
                d,
            })
        }
        "lowrank" => {
            if parts.len() != 3 {
                return Err(Error::Parse(format!(
                    "expected lowrank:<l>:<K>:<rank>, got {text:?}"
                )));
            }
            Ok(TargetSpec::RandomLowRank {
                l: parse_usize(parts[0], "l")?,
                layers: parse_usize(parts[1], "K")?,
                rank: parse_usize(parts[2], "rank")?,
                seed,
                d,
            })
        }
        "file" => {
            if parts.len() != 1 || parts[0].is_empty() {
                return Err(Error::Parse(format!("expected file:<path>, got {text:?}")));
            }
            Ok(TargetSpec::File {
                path: parts[0].to_string(),
            })
        }
        other => Err(Error::Parse(format!("unknown target kind {other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hosvd::{hosvd, spectrum};
    use crate::tensor::tensorize;

    #[test]
    fn shift_target_is_a_delta() {
        let out = generate(&TargetSpec::Shift { k: 3, d: 1 }).unwrap();
        assert_eq!(out.kernel.channel(0), &[0.0, 0.0, 0.0, 1.0]);
        assert_eq!(out.truncated_energy_ratio, 0.0);
    }

    #[test]
    fn exponential_target_follows_the_formula() {
        let out = generate(&TargetSpec::Exponential {
            lambda: 0.5,
            horizon: 4,
            d: 1,
        })
        .unwrap();
        assert_eq!(out.kernel.channel(0), &[1.0, 0.5, 0.25, 0.125]);
        assert!(out.truncated_energy_ratio > 0.0);
    }

    #[test]
    fn power_target_requires_square_summability() {
        assert!(generate(&TargetSpec::Power {
            alpha: 0.5,
            horizon: 8,
            d: 1
        })
        .is_err());
        let out = generate(&TargetSpec::Power {
            alpha: 1.0,
            horizon: 4,
            d: 1,
        })
        .unwrap();
        assert_eq!(out.kernel.get(0, 1), 0.5);
    }

    #[test]
    fn low_rank_target_has_the_planted_spectrum() {
        let out = generate(&TargetSpec::RandomLowRank {
            l: 2,
            layers: 3,
            rank: 2,
            seed: 42,
            d: 1,
        })
        .unwrap();
        let t = tensorize(out.kernel.channel(0), 2, 3).unwrap();
        let spec = spectrum(&hosvd(&t).unwrap());
        let mags: Vec<f64> = spec.entries().iter().map(|e| e.magnitude).collect();
        assert!((mags[0] - 0.5).abs() <= 1e-12, "{:?}", &mags[..3]);
        assert!((mags[1] - 0.25).abs() <= 1e-12);
        assert!(spec.tail_sq(3) <= 1e-12, "tail {}", spec.tail_sq(3));
    }

    #[test]
    fn generation_is_deterministic_per_seed() {
        let spec = TargetSpec::RandomLowRank {
            l: 3,
            layers: 2,
            rank: 3,
            seed: 7,
            d: 2,
        };
        let a = generate(&spec).unwrap();
        let b = generate(&spec).unwrap();
        assert_eq!(a.kernel, b.kernel);
        let other = generate(&TargetSpec::RandomLowRank {
            l: 3,
            layers: 2,
            rank: 3,
            seed: 8,
            d: 2,
        })
        .unwrap();
        assert_ne!(a.kernel, other.kernel);
    }

    #[test]
    fn low_rank_rejects_excess_rank() {
        assert!(generate(&TargetSpec::RandomLowRank {
            l: 2,
            layers: 2,
            rank: 5,
            seed: 0,
            d: 1
        })
        .is_err());
    }

    #[test]
    fn exponential_tensorizes_to_rank_one_for_all_geometries() {
        let out = generate(&TargetSpec::Exponential {
            lambda: 0.6,
            horizon: 81,
            d: 1,
        })
        .unwrap();
        for (l, k) in [(2usize, 3usize), (3, 3), (2, 4)] {
            let restricted = out.kernel.restrict(l.pow(k as u32));
            let t = tensorize(restricted.channel(0), l, k).unwrap();
            let spec = spectrum(&hosvd(&t).unwrap());
            assert!(spec.tail_sq(2) <= 1e-18, "l={l} K={k}: {}", spec.tail_sq(2));
        }
    }

    #[test]
    fn spec_strings_parse() {
        assert_eq!(
            parse_target_spec("shift:3", 1, 0).unwrap(),
            TargetSpec::Shift { k: 3, d: 1 }
        );
        assert_eq!(
            parse_target_spec("exp:0.5:256", 2, 0).unwrap(),
            TargetSpec::Exponential {
                lambda: 0.5,
                horizon: 256,
                d: 2
            }
        );
        assert_eq!(
            parse_target_spec("lowrank:2:3:2", 1, 42).unwrap(),
            TargetSpec::RandomLowRank {
                l: 2,
                layers: 3,
                rank: 2,
                seed: 42,
                d: 1
            }
        );
        assert!(parse_target_spec("exp:", 1, 0).is_err());
        assert!(parse_target_spec("nope:1", 1, 0).is_err());
    }

    #[test]
    fn target_spec_json_round_trips() {
        let spec = TargetSpec::Exponential {
            lambda: 0.5,
            horizon: 1024,
            d: 1,
        };
        let text = serde_json::to_string(&spec).unwrap();
        assert!(text.contains("\"kind\":\"exp\""));
        let back: TargetSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(spec, back);
    }
}
