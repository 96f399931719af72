//! Simplex-style cross-map estimation: nearest neighbors on the source
//! manifold, exponential distance weights, and the cross-map skill rho.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::embed::{delay_embed, EmbeddingConfig, ShadowManifold};
use super::{CcmConfig, CcmError};
use crate::temporal::pearson;

/// One cross-mapped estimate at a prediction time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossMapEstimate {
    /// Manifold time of the prediction point; the estimated value is
    /// `target[time + td]`.
    pub time: usize,
    pub observed: f64,
    pub predicted: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossMapOutcome {
    /// Pearson correlation between observed and cross-mapped values.
    pub rho: f64,
    pub estimates: Vec<CrossMapEstimate>,
}

/// Times usable both as manifold points and as prediction anchors for
/// the given delay: `t` valid in the manifold and `t + td` in range.
pub(super) fn usable_times(manifold: &ShadowManifold, td: i64) -> Vec<usize> {
    let n = manifold.series_len() as i64;
    let lo = (manifold.first_time() as i64).max(-td);
    let hi = (n - 1).min(n - 1 - td);
    if lo > hi {
        return Vec::new();
    }
    (lo as usize..=hi as usize).collect()
}

/// Picks the library: the first `size` usable times, or a seeded random
/// subset when `random` is set.
pub(super) fn pick_library(
    usable: &[usize],
    size: usize,
    random: bool,
    seed: u64,
) -> Vec<usize> {
    if random {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut picked: Vec<usize> = sample(&mut rng, usable.len(), size)
            .into_iter()
            .map(|i| usable[i])
            .collect();
        picked.sort_unstable();
        picked
    } else {
        usable[..size].to_vec()
    }
}

/// `k` nearest library neighbors of the point at `t`, self excluded,
/// ties broken toward the earlier time. Returns (squared distance, time)
/// sorted ascending.
fn nearest_neighbors(
    manifold: &ShadowManifold,
    library: &[usize],
    t: usize,
    k: usize,
    scratch: &mut Vec<(f64, usize)>,
) {
    scratch.clear();
    for &lib_t in library {
        if lib_t == t {
            continue;
        }
        let d2 = manifold.distance2(t, lib_t);
        if scratch.len() == k {
            let worst = scratch[k - 1];
            if (d2, lib_t) >= worst {
                continue;
            }
            scratch.pop();
        }
        let pos = scratch.partition_point(|&(d, time)| (d, time) < (d2, lib_t));
        scratch.insert(pos, (d2, lib_t));
    }
}

/// Exponential simplex weights `exp(-d_i/d_min)`, normalized. When the
/// nearest distance is zero, all zero-distance neighbors get equal
/// weight and positive-distance ones decay against the smallest positive
/// distance.
pub(super) fn simplex_weights(distances2: &[(f64, usize)], weights: &mut Vec<f64>) {
    weights.clear();
    let d_min = distances2[0].0.sqrt();
    if d_min > 0.0 {
        weights.extend(distances2.iter().map(|&(d2, _)| (-(d2.sqrt()) / d_min).exp()));
    } else {
        let epsilon = distances2
            .iter()
            .map(|&(d2, _)| d2.sqrt())
            .find(|&d| d > 0.0);
        match epsilon {
            Some(eps) => weights.extend(distances2.iter().map(|&(d2, _)| {
                let d = d2.sqrt();
                if d == 0.0 {
                    1.0
                } else {
                    (-d / eps).exp()
                }
            })),
            None => weights.extend(distances2.iter().map(|_| 1.0)),
        }
    }
    let total: f64 = weights.iter().sum();
    for w in weights.iter_mut() {
        *w /= total;
    }
}

/// Cross-maps `target` from `source`'s shadow manifold.
///
/// For every usable prediction time, the `k` nearest library neighbors
/// of the source point estimate `target[t + td]` as a weighted sum of
/// the target at the neighbor times (shifted by `td`). High skill means
/// the target's history is recoverable from the source's manifold --
/// in causal terms, evidence that the target influences the source.
pub fn cross_map(
    source: &[f64],
    target: &[f64],
    cfg: &CcmConfig,
    library_size: usize,
    td: i64,
) -> Result<CrossMapOutcome, CcmError> {
    if source.len() != target.len() {
        return Err(CcmError::InvalidConfig(
            "source and target series must be aligned".into(),
        ));
    }
    if target.iter().any(|v| !v.is_finite()) {
        return Err(CcmError::MissingValues);
    }
    let manifold = delay_embed(source, &cfg.embedding)?;
    let k = cfg.neighbors;
    if library_size < k + 1 {
        return Err(CcmError::InvalidConfig(format!(
            "library size {library_size} below the minimum {} (k+1)",
            k + 1
        )));
    }
    let usable = usable_times(&manifold, td);
    if usable.len() < library_size {
        return Err(CcmError::InvalidConfig(format!(
            "library size {library_size} exceeds the {} usable points",
            usable.len()
        )));
    }
    let library = pick_library(&usable, library_size, cfg.random_library, cfg.seed);

    let mut estimates = Vec::with_capacity(usable.len());
    let mut neighbors: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
    let mut weights: Vec<f64> = Vec::with_capacity(k + 1);
    for &t in &usable {
        nearest_neighbors(&manifold, &library, t, k, &mut neighbors);
        simplex_weights(&neighbors, &mut weights);
        let predicted: f64 = neighbors
            .iter()
            .zip(&weights)
            .map(|(&(_, lib_t), &w)| w * shifted(target, lib_t, td))
            .sum();
        estimates.push(CrossMapEstimate {
            time: t,
            observed: shifted(target, t, td),
            predicted,
        });
    }

    let observed: Vec<f64> = estimates.iter().map(|e| e.observed).collect();
    let predicted: Vec<f64> = estimates.iter().map(|e| e.predicted).collect();
    let rho = match pearson(&observed, &predicted) {
        Some(r) => r,
        None => {
            let mean = observed[0];
            if observed.iter().all(|&v| v == mean) {
                return Err(CcmError::DegenerateTarget);
            }
            // Constant predictions carry no skill.
            0.0
        }
    };
    Ok(CrossMapOutcome { rho, estimates })
}

fn shifted(series: &[f64], t: usize, td: i64) -> f64 {
    series[(t as i64 + td) as usize]
}

/// Leave-one-out one-step self-prediction skill, the standard yardstick
/// for choosing the embedding dimension.
pub fn self_prediction_skill(
    series: &[f64],
    embedding: &EmbeddingConfig,
) -> Result<f64, CcmError> {
    let mut cfg = CcmConfig::new(*embedding);
    cfg.seed = 0;
    let manifold = delay_embed(series, embedding)?;
    let usable = usable_times(&manifold, 1);
    if usable.len() < cfg.neighbors + 1 {
        return Err(CcmError::SeriesTooShort {
            len: series.len(),
            needed: embedding.history() + cfg.neighbors + 2,
        });
    }
    let outcome = cross_map(series, series, &cfg, usable.len(), 1)?;
    Ok(outcome.rho)
}

/// Picks the embedding dimension in `1..=max_dim` maximizing
/// leave-one-out self-prediction skill; earlier dimension wins ties.
/// Dimensions the series cannot support are skipped.
pub fn select_embedding_dim(series: &[f64], lag: usize, max_dim: usize) -> usize {
    let mut best = (1usize, f64::NEG_INFINITY);
    for dim in 1..=max_dim {
        let embedding = EmbeddingConfig::new(dim, lag);
        match self_prediction_skill(series, &embedding) {
            Ok(rho) if rho > best.1 => best = (dim, rho),
            _ => {}
        }
    }
    best.0
}
