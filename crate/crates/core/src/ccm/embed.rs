//! Delay-coordinate embedding of a scalar series into a shadow manifold.

use serde::{Deserialize, Serialize};

use super::CcmError;

/// Embedding dimension and lag for delay-coordinate reconstruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingConfig {
    /// Number of delay coordinates, at least 1.
    pub dim: usize,
    /// Lag between coordinates in samples, at least 1.
    pub lag: usize,
}

impl EmbeddingConfig {
    pub fn new(dim: usize, lag: usize) -> Self {
        assert!(dim >= 1, "embedding dimension must be at least 1");
        assert!(lag >= 1, "embedding lag must be at least 1");
        Self { dim, lag }
    }

    /// Samples of history one point consumes: `(dim - 1) * lag`.
    pub fn history(&self) -> usize {
        (self.dim - 1) * self.lag
    }
}

/// Delay-coordinate reconstruction. The point at time `t` is
/// `(x_t, x_{t-lag}, ..., x_{t-(dim-1)lag})`; valid times start at
/// `(dim-1)*lag`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShadowManifold {
    config: EmbeddingConfig,
    first_time: usize,
    series_len: usize,
    /// Row-major points, one row of `dim` coordinates per valid time.
    coords: Vec<f64>,
}

impl ShadowManifold {
    pub fn config(&self) -> EmbeddingConfig {
        self.config
    }

    /// Number of reconstructed points: `n - (dim-1)*lag`.
    pub fn len(&self) -> usize {
        self.series_len - self.first_time
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Earliest valid time index.
    pub fn first_time(&self) -> usize {
        self.first_time
    }

    pub fn series_len(&self) -> usize {
        self.series_len
    }

    /// Coordinates of the point at series time `t`.
    pub fn point(&self, t: usize) -> &[f64] {
        assert!(t >= self.first_time && t < self.series_len);
        let row = t - self.first_time;
        &self.coords[row * self.config.dim..(row + 1) * self.config.dim]
    }

    /// Squared Euclidean distance between the points at times `s` and `t`.
    pub fn distance2(&self, s: usize, t: usize) -> f64 {
        self.point(s)
            .iter()
            .zip(self.point(t))
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }
}

/// Reconstructs the shadow manifold of a complete (no NaN) series.
pub fn delay_embed(series: &[f64], cfg: &EmbeddingConfig) -> Result<ShadowManifold, CcmError> {
    if series.iter().any(|v| !v.is_finite()) {
        return Err(CcmError::MissingValues);
    }
    // A single reconstructed point is useless; require at least two.
    let history = cfg.history();
    if series.len() < history + 2 {
        return Err(CcmError::SeriesTooShort {
            len: series.len(),
            needed: history + 2,
        });
    }
    let first_time = history;
    let mut coords = Vec::with_capacity((series.len() - first_time) * cfg.dim);
    for t in first_time..series.len() {
        for j in 0..cfg.dim {
            coords.push(series[t - j * cfg.lag]);
        }
    }
    Ok(ShadowManifold {
        config: *cfg,
        first_time,
        series_len: series.len(),
        coords,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_layout_matches_definition() {
        let series: Vec<f64> = (0..10).map(|v| v as f64).collect();
        let manifold = delay_embed(&series, &EmbeddingConfig::new(3, 1)).unwrap();
        assert_eq!(manifold.len(), 8);
        assert_eq!(manifold.first_time(), 2);
        assert_eq!(manifold.point(2), &[2.0, 1.0, 0.0]);
        assert_eq!(manifold.point(9), &[9.0, 8.0, 7.0]);
    }

    #[test]
    fn one_dimensional_embedding_is_the_series() {
        let series = [4.0, 2.0, 7.0];
        let manifold = delay_embed(&series, &EmbeddingConfig::new(1, 1)).unwrap();
        assert_eq!(manifold.len(), 3);
        for (t, &v) in series.iter().enumerate() {
            assert_eq!(manifold.point(t), &[v]);
        }
    }

    #[test]
    fn too_short_series_is_rejected() {
        let series = [0.0, 1.0, 2.0, 3.0, 4.0];
        let err = delay_embed(&series, &EmbeddingConfig::new(3, 2)).unwrap_err();
        assert!(matches!(err, CcmError::SeriesTooShort { len: 5, needed: 6 }));
    }

    #[test]
    fn nan_values_are_rejected() {
        let series = [0.0, f64::NAN, 2.0];
        assert!(matches!(
            delay_embed(&series, &EmbeddingConfig::new(1, 1)),
            Err(CcmError::MissingValues)
        ));
    }
}
