//! Convergent cross mapping: delay embedding, simplex cross-map
//! estimation, convergence profiles, time-delay scans, and
//! permutation-surrogate significance testing.
//!
//! The skill `rho` of cross-mapping a target series from a source
//! manifold is the Pearson correlation between the target and its
//! reconstruction. Skill that grows with library size is the method's
//! defining signature; a permutation null calibrates significance.

mod embed;
mod simplex;

pub use embed::{delay_embed, EmbeddingConfig, ShadowManifold};
pub use simplex::{
    cross_map, select_embedding_dim, self_prediction_skill, CrossMapEstimate, CrossMapOutcome,
};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CcmError {
    #[error("series of length {len} too short; need at least {needed}")]
    SeriesTooShort { len: usize, needed: usize },
    #[error("series contains missing (non-finite) values")]
    MissingValues,
    #[error("observed target values are constant; skill is undefined")]
    DegenerateTarget,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// Full parameter set for a CCM run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CcmConfig {
    pub embedding: EmbeddingConfig,
    /// Increasing library sizes; empty means "use a geometric ladder
    /// from 4·dim up to all usable points".
    pub library_sizes: Vec<usize>,
    /// Time delays to scan; may be negative.
    pub time_delays: Vec<i64>,
    /// Neighbors per estimate; defaults to dim + 1.
    pub neighbors: usize,
    /// Permutation surrogates per delay.
    pub surrogates: usize,
    pub seed: u64,
    /// Sample the library at random (seeded) instead of taking the
    /// first points of the valid range.
    pub random_library: bool,
}

impl CcmConfig {
    pub fn new(embedding: EmbeddingConfig) -> Self {
        Self {
            embedding,
            library_sizes: Vec::new(),
            time_delays: vec![0],
            neighbors: embedding.dim + 1,
            surrogates: 1000,
            seed: 0,
            random_library: false,
        }
    }

    /// Geometric ladder of library sizes from `4·dim` (at least k+1) up
    /// to `available`, doubling each step.
    pub fn default_library_ladder(&self, available: usize) -> Vec<usize> {
        let floor = (self.neighbors + 1).max(4 * self.embedding.dim);
        let mut sizes = Vec::new();
        let mut size = floor.min(available);
        while size < available {
            sizes.push(size);
            size *= 2;
        }
        sizes.push(available);
        sizes.dedup();
        sizes
    }

    fn resolved_library_sizes(&self, available: usize) -> Result<Vec<usize>, CcmError> {
        let sizes = if self.library_sizes.is_empty() {
            self.default_library_ladder(available)
        } else {
            self.library_sizes.clone()
        };
        if let Some(&max) = sizes.iter().max() {
            if max > available {
                return Err(CcmError::InvalidConfig(format!(
                    "library size {max} exceeds the {available} usable points"
                )));
            }
        }
        if let Some(&min) = sizes.iter().min() {
            if min < self.neighbors + 1 {
                return Err(CcmError::InvalidConfig(format!(
                    "library size {min} below the minimum {} (k+1)",
                    self.neighbors + 1
                )));
            }
        }
        Ok(sizes)
    }
}

fn usable_count(series_len: usize, embedding: &EmbeddingConfig, td: i64) -> usize {
    let n = series_len as i64;
    let lo = (embedding.history() as i64).max(-td);
    let hi = (n - 1).min(n - 1 - td);
    (hi - lo + 1).max(0) as usize
}

/// Skill per library size at a fixed delay, with a Kendall-tau trend
/// statistic over the profile.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceProfile {
    pub time_delay: i64,
    pub points: Vec<(usize, f64)>,
    /// Kendall tau of rho against library size: +1 for a strictly
    /// increasing profile, ~0 for no trend.
    pub trend: f64,
}

/// Evaluates the skill at each configured library size (delay 0).
/// Convergence -- skill growing with library size -- is what licenses a
/// causal reading.
pub fn convergence_profile(
    source: &[f64],
    target: &[f64],
    cfg: &CcmConfig,
) -> Result<ConvergenceProfile, CcmError> {
    let td = 0;
    let available = usable_count(source.len(), &cfg.embedding, td);
    let sizes = cfg.resolved_library_sizes(available)?;
    if sizes.len() < 2 {
        return Err(CcmError::InvalidConfig(
            "convergence needs at least two library sizes".into(),
        ));
    }
    let points: Vec<(usize, f64)> = sizes
        .iter()
        .map(|&size| Ok((size, cross_map(source, target, cfg, size, td)?.rho)))
        .collect::<Result<_, CcmError>>()?;
    let rhos: Vec<f64> = points.iter().map(|p| p.1).collect();
    Ok(ConvergenceProfile {
        time_delay: td,
        points,
        trend: kendall_tau_ascending(&rhos),
    })
}

/// Kendall tau of a sequence against its index order.
fn kendall_tau_ascending(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mut score = 0i64;
    for i in 0..n {
        for j in (i + 1)..n {
            score += match values[j].partial_cmp(&values[i]) {
                Some(std::cmp::Ordering::Greater) => 1,
                Some(std::cmp::Ordering::Less) => -1,
                _ => 0,
            };
        }
    }
    score as f64 / (n * (n - 1) / 2) as f64
}

/// Skill across response delays for one causal orientation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirectionScan {
    /// rho per configured delay, at the largest library size.
    pub rhos: Vec<f64>,
    pub peak_td: i64,
    pub peak_rho: f64,
}

/// Delay scan in both causal orientations at the maximum library size.
///
/// The delays are response delays: `x_drives_y` at delay `d` measures
/// how well `x` is recovered from `y`'s manifold `d` samples after the
/// fact (cross-mapping the driver from the driven series). When `y`
/// responds to `x` after `d0` samples, `x_drives_y` peaks at `d0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LaggedCcm {
    pub time_delays: Vec<i64>,
    pub library: usize,
    pub x_drives_y: DirectionScan,
    pub y_drives_x: DirectionScan,
}

/// Cross-maps `driver` from `driven`'s manifold at each response delay
/// (raw cross-map offset `-d`).
fn scan_direction(
    driven: &[f64],
    driver: &[f64],
    cfg: &CcmConfig,
    library: usize,
) -> Result<DirectionScan, CcmError> {
    let mut rhos = Vec::with_capacity(cfg.time_delays.len());
    for &d in &cfg.time_delays {
        rhos.push(cross_map(driven, driver, cfg, library, -d)?.rho);
    }
    let (peak_idx, peak_rho) = rhos
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &rho)| {
            if rho > best.1 {
                (i, rho)
            } else {
                best
            }
        });
    Ok(DirectionScan {
        rhos,
        peak_td: cfg.time_delays[peak_idx],
        peak_rho,
    })
}

/// Evaluates rho per configured response delay in both orientations,
/// using the largest library size usable at every delay.
pub fn lagged_ccm(x: &[f64], y: &[f64], cfg: &CcmConfig) -> Result<LaggedCcm, CcmError> {
    if cfg.time_delays.is_empty() {
        return Err(CcmError::InvalidConfig("no time delays requested".into()));
    }
    let worst_available = cfg
        .time_delays
        .iter()
        .map(|&d| usable_count(x.len(), &cfg.embedding, -d))
        .min()
        .unwrap_or(0);
    let sizes = cfg.resolved_library_sizes(worst_available)?;
    let library = *sizes.iter().max().expect("nonempty sizes");
    Ok(LaggedCcm {
        time_delays: cfg.time_delays.clone(),
        library,
        x_drives_y: scan_direction(y, x, cfg, library)?,
        y_drives_x: scan_direction(x, y, cfg, library)?,
    })
}

/// Empirical skill against the permutation null at one delay.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TdTest {
    pub td: i64,
    pub rho: f64,
    /// 95th percentile of the surrogate skills.
    pub surrogate_p95: f64,
    /// True when the empirical skill exceeds the 95th percentile.
    pub significant: bool,
    #[serde(skip)]
    pub surrogate_rhos: Vec<f64>,
}

/// Cross-map skill grid plus the surrogate verdict per delay.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CcmResult {
    /// Largest configured library size; surrogate tests run here.
    pub library: usize,
    /// rho per (library size, delay).
    pub skills: Vec<SkillPoint>,
    pub tests: Vec<TdTest>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SkillPoint {
    pub library: usize,
    pub td: i64,
    pub rho: f64,
}

fn mix_seed(master: u64, a: u64, b: u64) -> u64 {
    // splitmix64 over the packed inputs
    let mut z = master
        .wrapping_add(a.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(b.wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// 95th percentile as the `ceil(0.95·n)`-th smallest value.
fn percentile_95(sorted: &[f64]) -> f64 {
    let idx = (sorted.len() as f64 * 0.95).ceil() as usize;
    sorted[idx.clamp(1, sorted.len()) - 1]
}

/// Permutation-surrogate significance test for cross-mapping `target`
/// from `source`'s manifold.
///
/// Each surrogate fully reshuffles the source series (fresh seeded
/// permutation), destroying temporal structure while keeping the value
/// distribution. The empirical skill is significant at a delay when it
/// exceeds the surrogate distribution's 95th percentile. Surrogate
/// replicates run in parallel; results are merged by replicate index,
/// so the outcome is independent of scheduling.
pub fn surrogate_test(source: &[f64], target: &[f64], cfg: &CcmConfig) -> Result<CcmResult, CcmError> {
    if cfg.surrogates == 0 {
        return Err(CcmError::InvalidConfig(
            "surrogate count must be positive".into(),
        ));
    }
    let worst_available = cfg
        .time_delays
        .iter()
        .map(|&td| usable_count(source.len(), &cfg.embedding, td))
        .min()
        .unwrap_or(0);
    let sizes = cfg.resolved_library_sizes(worst_available)?;
    let library = *sizes.iter().max().expect("nonempty sizes");

    let mut skills = Vec::with_capacity(sizes.len() * cfg.time_delays.len());
    for &size in &sizes {
        for &td in &cfg.time_delays {
            skills.push(SkillPoint {
                library: size,
                td,
                rho: cross_map(source, target, cfg, size, td)?.rho,
            });
        }
    }

    let mut tests = Vec::with_capacity(cfg.time_delays.len());
    for &td in &cfg.time_delays {
        let rho = skills
            .iter()
            .find(|s| s.library == library && s.td == td)
            .expect("grid covers max library")
            .rho;
        let surrogate_rhos: Vec<f64> = (0..cfg.surrogates)
            .into_par_iter()
            .map(|replicate| {
                let mut shuffled = source.to_vec();
                let seed = mix_seed(cfg.seed, td as u64, replicate as u64);
                shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
                cross_map(&shuffled, target, cfg, library, td)
                    .map(|o| o.rho)
                    // A pathological shuffle (constant target slice) has
                    // no skill.
                    .unwrap_or(0.0)
            })
            .collect();
        let mut sorted = surrogate_rhos.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("skills are finite"));
        let p95 = percentile_95(&sorted);
        tests.push(TdTest {
            td,
            rho,
            surrogate_p95: p95,
            significant: rho > p95,
            surrogate_rhos,
        });
    }

    Ok(CcmResult {
        library,
        skills,
        tests,
    })
}

/// Linear interpolation across missing days, with constant extension at
/// the ends. Returns the filled series and how many values were filled.
pub fn interpolate_missing(series: &[Option<f64>]) -> Result<(Vec<f64>, usize), CcmError> {
    let known: Vec<(usize, f64)> = series
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.map(|x| (i, x)))
        .collect();
    if known.is_empty() {
        return Err(CcmError::MissingValues);
    }
    let mut filled = Vec::with_capacity(series.len());
    let mut interpolated = 0usize;
    for (i, value) in series.iter().enumerate() {
        if let Some(v) = value {
            filled.push(*v);
            continue;
        }
        interpolated += 1;
        let before = known.iter().rev().find(|&&(j, _)| j < i);
        let after = known.iter().find(|&&(j, _)| j > i);
        let v = match (before, after) {
            (Some(&(j0, v0)), Some(&(j1, v1))) => {
                v0 + (v1 - v0) * (i - j0) as f64 / (j1 - j0) as f64
            }
            (Some(&(_, v0)), None) => v0,
            (None, Some(&(_, v1))) => v1,
            (None, None) => unreachable!("known is nonempty"),
        };
        filled.push(v);
    }
    Ok((filled, interpolated))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn logistic(n: usize, r: f64, x0: f64) -> Vec<f64> {
        let mut series = Vec::with_capacity(n);
        let mut x = x0;
        for _ in 0..300 {
            x = r * x * (1.0 - x);
        }
        for _ in 0..n {
            x = r * x * (1.0 - x);
            series.push(x);
        }
        series
    }

    fn noise(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.gen::<f64>()).collect()
    }

    #[test]
    fn kendall_tau_extremes() {
        assert_eq!(kendall_tau_ascending(&[1.0, 2.0, 3.0, 4.0]), 1.0);
        assert_eq!(kendall_tau_ascending(&[4.0, 3.0, 2.0, 1.0]), -1.0);
    }

    #[test]
    fn single_library_size_errors() {
        let series = logistic(300, 3.8, 0.4);
        let mut cfg = CcmConfig::new(EmbeddingConfig::new(2, 1));
        cfg.library_sizes = vec![100];
        assert!(matches!(
            convergence_profile(&series, &series, &cfg),
            Err(CcmError::InvalidConfig(_))
        ));
    }

    #[test]
    fn self_profile_converges() {
        let series = logistic(500, 3.9, 0.37);
        let mut cfg = CcmConfig::new(EmbeddingConfig::new(2, 1));
        cfg.library_sizes = vec![20, 50, 120, 300, 450];
        let profile = convergence_profile(&series, &series, &cfg).unwrap();
        assert!(profile.points.last().unwrap().1 > profile.points.first().unwrap().1);
        assert!(profile.trend > 0.5);
    }

    #[test]
    fn shifted_copy_peaks_at_the_shift() {
        // y(t) = x(t-2) + small noise. With a 1-dimensional embedding the
        // only exactly-recoverable delay is the true one: d=2 reads the
        // coordinate itself, d<2 needs a forward forecast, d>2 runs into
        // the map's two-branch preimages.
        let x = logistic(800, 3.9, 0.41);
        let jitter = noise(800, 9);
        let mut y = vec![0.0; 800];
        for t in 0..800 {
            let lagged = if t >= 2 { x[t - 2] } else { x[0] };
            y[t] = lagged + 0.02 * (jitter[t] - 0.5);
        }
        let mut cfg = CcmConfig::new(EmbeddingConfig::new(1, 1));
        cfg.time_delays = (-5..=5).collect();
        cfg.library_sizes = vec![400];
        let scan = lagged_ccm(&x, &y, &cfg).unwrap();
        assert_eq!(scan.x_drives_y.peak_td, 2);
        assert!(scan.x_drives_y.peak_rho > 0.9);
    }

    #[test]
    fn surrogate_test_rejects_identical_series() {
        let series = logistic(400, 3.85, 0.52);
        let mut cfg = CcmConfig::new(EmbeddingConfig::new(2, 1));
        cfg.surrogates = 200;
        cfg.library_sizes = vec![100, 390];
        cfg.seed = 7;
        let result = surrogate_test(&series, &series, &cfg).unwrap();
        assert_eq!(result.tests.len(), 1);
        let test = &result.tests[0];
        assert!(test.significant, "identical series must reject the null");
        assert!(test.rho > test.surrogate_p95);
        assert_eq!(test.surrogate_rhos.len(), 200);
    }

    #[test]
    fn zero_surrogates_is_an_error() {
        let series = logistic(200, 3.8, 0.3);
        let mut cfg = CcmConfig::new(EmbeddingConfig::new(2, 1));
        cfg.surrogates = 0;
        assert!(matches!(
            surrogate_test(&series, &series, &cfg),
            Err(CcmError::InvalidConfig(_))
        ));
    }

    #[test]
    fn surrogate_test_is_deterministic() {
        let x = logistic(300, 3.8, 0.3);
        let y = logistic(300, 3.6, 0.7);
        let mut cfg = CcmConfig::new(EmbeddingConfig::new(2, 1));
        cfg.surrogates = 50;
        cfg.seed = 11;
        let a = surrogate_test(&x, &y, &cfg).unwrap();
        let b = surrogate_test(&x, &y, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn iid_noise_has_near_zero_mean_skill() {
        let mut total = 0.0;
        let repeats = 60;
        for rep in 0..repeats {
            let x = noise(300, 1000 + rep);
            let y = noise(300, 5000 + rep);
            let cfg = CcmConfig::new(EmbeddingConfig::new(2, 1));
            total += cross_map(&x, &y, &cfg, 250, 0).unwrap().rho;
        }
        let mean = total / repeats as f64;
        assert!(mean.abs() < 0.1, "mean rho on noise was {mean}");
    }

    #[test]
    fn noise_profile_shows_no_trend_on_average() {
        let mut trends = Vec::new();
        for rep in 0..20 {
            let x = noise(400, 300 + rep);
            let y = noise(400, 900 + rep);
            let mut cfg = CcmConfig::new(EmbeddingConfig::new(2, 1));
            cfg.library_sizes = vec![30, 60, 120, 240, 380];
            trends.push(convergence_profile(&x, &y, &cfg).unwrap().trend);
        }
        let mean = trends.iter().sum::<f64>() / trends.len() as f64;
        assert!(
            mean < 0.5,
            "independent noise should not converge, mean trend {mean}"
        );
    }

    #[test]
    fn interpolation_fills_gaps_linearly() {
        let series = vec![Some(1.0), None, None, Some(4.0), None];
        let (filled, count) = interpolate_missing(&series).unwrap();
        assert_eq!(filled, vec![1.0, 2.0, 3.0, 4.0, 4.0]);
        assert_eq!(count, 3);
        assert!(interpolate_missing(&[None, None]).is_err());
    }

    #[test]
    fn skill_is_invariant_under_affine_transforms() {
        let x = logistic(400, 3.8, 0.33);
        let y = logistic(400, 3.7, 0.61);
        let cfg = CcmConfig::new(EmbeddingConfig::new(2, 1));
        let base = cross_map(&x, &y, &cfg, 300, 0).unwrap().rho;

        let y_scaled: Vec<f64> = y.iter().map(|v| 5.0 * v + 2.0).collect();
        let rho_y = cross_map(&x, &y_scaled, &cfg, 300, 0).unwrap().rho;
        assert!((base - rho_y).abs() < 1e-9, "target affine changed rho");

        let x_scaled: Vec<f64> = x.iter().map(|v| 3.0 * v - 1.0).collect();
        let rho_x = cross_map(&x_scaled, &y, &cfg, 300, 0).unwrap().rho;
        assert!((base - rho_x).abs() < 1e-9, "source affine changed rho");
    }
}
