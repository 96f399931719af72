//! Deterministic generators for pipeline validation: event logs with
//! planted creator/consumer structure, and coupled logistic maps with
//! known causal ground truth.
//!
//! Every generator is a pure function of its parameters and seed.

use std::collections::HashMap;

use rand::seq::index::sample;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::classify::{CellActivity, ClassificationConfig, Role, RoleAssignment};
use crate::event::{ContentCategory, EventLog, ShareEvent, TimeWindow, UserId, UserTable, SECONDS_PER_DAY};

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("trajectory left (0,1) at step {step}")]
    Diverged { step: usize },
}

/// Day-to-day modulation that couples group sizes to a smooth latent
/// driver, for end-to-end causality validation. Consumers follow the
/// driver with weight `consumer_amplitude`; creators mix the driver with
/// an independent channel (`creator_amplitude` toward the driver).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemporalCoupling {
    pub consumer_amplitude: f64,
    pub creator_amplitude: f64,
    /// Baseline per-day activity probability before modulation.
    pub base_activity: f64,
}

impl Default for TemporalCoupling {
    fn default() -> Self {
        Self {
            consumer_amplitude: 1.0,
            creator_amplitude: 0.55,
            base_activity: 0.35,
        }
    }
}

/// Parameters for the planted-role event-log generator.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationParams {
    /// Users who are creators on every fake-spreader day.
    pub only_creators: usize,
    /// Users who are consumers on every fake-spreader day.
    pub only_consumers: usize,
    /// Users with at least one creator day and one consumer day.
    pub mixed: usize,
    /// Users who never share fake content.
    pub non_spreaders: usize,
    pub days: usize,
    /// Classification threshold the planted fractions respect.
    pub threshold: f64,
    /// Target per-day fake share for creator days; at or above the
    /// threshold (margin included by the caller).
    pub creator_fake_share: f64,
    /// Target per-day fake share for consumer days; strictly inside
    /// (0, threshold).
    pub consumer_fake_share: f64,
    /// Discrete power-law exponent of the daily activity distribution.
    pub activity_exponent: f64,
    /// Smallest per-day event count drawn for spreaders.
    pub min_daily_events: u32,
    pub max_daily_events: u32,
    /// Fraction of only-creators with exactly one fake-spreader day.
    pub creator_once_fraction: f64,
    /// Fraction of only-consumers with exactly one fake-spreader day.
    pub consumer_once_fraction: f64,
    /// Preference weight for consumer events to target creator-class
    /// users; 1.0 means uniform.
    pub creator_preference: f64,
    /// First day of the study window, as a UTC day number.
    pub start_day: i64,
    pub seed: u64,
    /// When set, spreader activity is rescheduled day by day against a
    /// latent driver instead of the uniform schedule.
    pub coupling: Option<TemporalCoupling>,
}

impl Default for PopulationParams {
    fn default() -> Self {
        Self {
            only_creators: 130,
            only_consumers: 820,
            mixed: 50,
            non_spreaders: 1000,
            days: 60,
            threshold: 0.20,
            creator_fake_share: 0.40,
            consumer_fake_share: 0.10,
            activity_exponent: 2.1,
            min_daily_events: 5,
            max_daily_events: 60,
            creator_once_fraction: 0.70,
            consumer_once_fraction: 0.66,
            creator_preference: 25.0,
            start_day: 18_283, // 2020-01-22
            seed: 0,
            coupling: None,
        }
    }
}

impl PopulationParams {
    /// Group sizes and once-fractions matching the reported user-behavior
    /// proportions (12.91% / 82.42% / 4.67%, with 9.14% / 54.38%
    /// appearing once), scaled down to a quick-to-generate population.
    pub fn behavior_proportions_preset(seed: u64) -> Self {
        Self {
            only_creators: 1291,
            only_consumers: 8242,
            mixed: 467,
            non_spreaders: 5000,
            days: 120,
            creator_once_fraction: 9804.0 / 13848.0,
            consumer_once_fraction: 58328.0 / 88400.0,
            seed,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<(), SynthError> {
        let bad = |msg: &str| Err(SynthError::InvalidParams(msg.into()));
        if self.days == 0 {
            return bad("study length must be at least one day");
        }
        if !(self.threshold > 0.0 && self.threshold <= 1.0) {
            return bad("threshold must be in (0, 1]");
        }
        if self.creator_fake_share < self.threshold {
            return bad("creator fake share must clear the threshold");
        }
        if !(self.consumer_fake_share > 0.0 && self.consumer_fake_share < self.threshold) {
            return bad("consumer fake share must lie strictly inside (0, threshold)");
        }
        if self.creator_fake_share > 1.0 {
            return bad("creator fake share cannot exceed 1");
        }
        if self.activity_exponent <= 1.0 {
            return bad("activity exponent must exceed 1");
        }
        if self.min_daily_events == 0 || self.max_daily_events < self.min_daily_events {
            return bad("daily event bounds out of order");
        }
        for (name, value) in [
            ("creator_once_fraction", self.creator_once_fraction),
            ("consumer_once_fraction", self.consumer_once_fraction),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(SynthError::InvalidParams(format!("{name} must be in [0, 1]")));
            }
        }
        if self.creator_preference < 1.0 {
            return bad("creator preference must be at least 1");
        }
        if self.mixed > 0 && self.days < 2 {
            return bad("mixed users need at least two days");
        }
        Ok(())
    }

    /// Smallest per-day event count on which a consumer fraction in
    /// (0, threshold) is representable with integer counts.
    fn consumer_min_events(&self) -> u32 {
        let needed = (1.0 / self.threshold).floor() as u32 + 1;
        self.min_daily_events.max(needed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum UserClass {
    OnlyCreator,
    OnlyConsumer,
    Mixed,
    NonSpreader,
}

const FAKE_ROTATION: [ContentCategory; 3] = [
    ContentCategory::Clickbait,
    ContentCategory::FakeHoax,
    ContentCategory::ConspiracyJunkScience,
];

const REGULAR_ROTATION: [ContentCategory; 5] = [
    ContentCategory::MainstreamMedia,
    ContentCategory::Science,
    ContentCategory::Political,
    ContentCategory::Satire,
    ContentCategory::Unlabeled,
];

/// Latent day-to-day driver in (0.05, 0.95): two incommensurate cycles
/// plus a touch of seeded AR(1) roughness.
fn latent_driver(days: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut ar = 0.0f64;
    (0..days)
        .map(|d| {
            let t = d as f64;
            ar = 0.6 * ar + 0.4 * (rng.gen::<f64>() - 0.5);
            let wave = 0.5
                + 0.27 * (std::f64::consts::TAU * t / 29.0).sin()
                + 0.15 * (std::f64::consts::TAU * t / 11.0 + 1.3).sin()
                + 0.10 * ar;
            wave.clamp(0.05, 0.95)
        })
        .collect()
}

/// Pareto-tail sample floored to an integer, clamped to [min, max].
fn power_law_events(rng: &mut ChaCha8Rng, exponent: f64, min: u32, max: u32) -> u32 {
    let u: f64 = rng.gen_range(1e-12..1.0);
    let value = min as f64 * u.powf(-1.0 / (exponent - 1.0));
    (value.floor() as u64).clamp(min as u64, max as u64) as u32
}

/// Per-day fake count planting the requested role at `events` shares.
fn planted_fake_count(role: Role, events: u32, params: &PopulationParams) -> u32 {
    match role {
        // ceil(p*m)/m >= p >= threshold keeps the creator side safe.
        Role::Creator => {
            ((params.creator_fake_share * events as f64).ceil() as u32).clamp(1, events)
        }
        // floor(p*m)/m <= p < threshold; at least one fake share.
        Role::Consumer => {
            let c = (params.consumer_fake_share * events as f64).floor() as u32;
            c.max(1)
        }
        Role::NonSpreader => 0,
    }
}

struct ScheduledDay {
    day: u32,
    role: Role,
}

/// Plants per-user schedules, generates events, and returns the log with
/// the ground-truth assignment.
pub fn gen_population(params: &PopulationParams) -> Result<(EventLog, RoleAssignment), SynthError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let days = params.days;
    let driver = latent_driver(days, &mut rng);
    let creator_channel: Vec<f64> = {
        let independent = latent_driver(days, &mut rng);
        match params.coupling {
            Some(c) => driver
                .iter()
                .zip(&independent)
                .map(|(&s, &u)| c.creator_amplitude * s + (1.0 - c.creator_amplitude) * u)
                .collect(),
            None => independent,
        }
    };

    let mut users = UserTable::new();
    let mut classes: Vec<(UserId, UserClass)> = Vec::new();
    let mut creator_pool: Vec<UserId> = Vec::new();
    for i in 0..params.only_creators {
        let id = users.intern(&format!("c{i:06}"));
        classes.push((id, UserClass::OnlyCreator));
        creator_pool.push(id);
    }
    for i in 0..params.only_consumers {
        let id = users.intern(&format!("k{i:06}"));
        classes.push((id, UserClass::OnlyConsumer));
    }
    for i in 0..params.mixed {
        let id = users.intern(&format!("m{i:06}"));
        classes.push((id, UserClass::Mixed));
        creator_pool.push(id);
    }
    for i in 0..params.non_spreaders {
        let id = users.intern(&format!("n{i:06}"));
        classes.push((id, UserClass::NonSpreader));
    }
    let total_users = classes.len();
    if total_users < 2 {
        return Err(SynthError::InvalidParams(
            "need at least two users to draw targets".into(),
        ));
    }

    // Probability that a consumer event targets the creator pool.
    let pool = creator_pool.len() as f64;
    let rest = total_users as f64 - pool;
    let pool_probability = if creator_pool.is_empty() {
        0.0
    } else {
        params.creator_preference * pool / (params.creator_preference * pool + rest)
    };

    let consumer_min = params.consumer_min_events();
    let mut events: Vec<ShareEvent> = Vec::new();
    let mut cells: HashMap<(UserId, u32), CellActivity> = HashMap::new();
    let mut fake_cursor = 0usize;
    let mut regular_cursor = 0usize;

    for &(user, class) in &classes {
        let schedule = schedule_user(class, params, &driver, &creator_channel, &mut rng);
        for ScheduledDay { day, role } in schedule {
            let min_events = match role {
                Role::Consumer => consumer_min,
                _ => params.min_daily_events.max(1),
            };
            let count = power_law_events(
                &mut rng,
                params.activity_exponent,
                min_events,
                params.max_daily_events.max(min_events),
            );
            let fake = planted_fake_count(role, count, params);
            cells.insert(
                (user, day),
                CellActivity {
                    role,
                    total: count,
                    fake,
                },
            );
            for e in 0..count {
                let is_fake = e < fake;
                let category = if is_fake {
                    fake_cursor += 1;
                    FAKE_ROTATION[fake_cursor % FAKE_ROTATION.len()]
                } else {
                    regular_cursor += 1;
                    REGULAR_ROTATION[regular_cursor % REGULAR_ROTATION.len()]
                };
                let target = draw_target(
                    user,
                    role,
                    &classes,
                    &creator_pool,
                    pool_probability,
                    &mut rng,
                );
                let second = rng.gen_range(0..SECONDS_PER_DAY);
                events.push(ShareEvent {
                    timestamp: (params.start_day + day as i64) * SECONDS_PER_DAY + second,
                    actor: user,
                    source: target,
                    domain: None,
                    category,
                });
            }
        }
    }

    let window = TimeWindow::new(
        params.start_day * SECONDS_PER_DAY,
        (params.start_day + days as i64) * SECONDS_PER_DAY - 1,
    );
    let log = EventLog::with_window(users, events, window);
    let config = ClassificationConfig::new(params.threshold, 1);
    let assignment = RoleAssignment::from_raw(config, days, cells);
    Ok((log, assignment))
}

fn schedule_user(
    class: UserClass,
    params: &PopulationParams,
    driver: &[f64],
    creator_channel: &[f64],
    rng: &mut ChaCha8Rng,
) -> Vec<ScheduledDay> {
    let days = params.days;
    match (params.coupling, class) {
        (Some(coupling), UserClass::OnlyConsumer) => {
            bernoulli_schedule(driver, coupling.consumer_amplitude, coupling.base_activity, rng)
                .into_iter()
                .map(|day| ScheduledDay {
                    day,
                    role: Role::Consumer,
                })
                .collect()
        }
        (Some(coupling), UserClass::OnlyCreator) => {
            bernoulli_schedule(creator_channel, 1.0, coupling.base_activity, rng)
                .into_iter()
                .map(|day| ScheduledDay {
                    day,
                    role: Role::Creator,
                })
                .collect()
        }
        (Some(coupling), UserClass::Mixed) => {
            bernoulli_schedule(driver, coupling.consumer_amplitude, coupling.base_activity, rng)
                .into_iter()
                .map(|day| ScheduledDay {
                    day,
                    role: if rng.gen_bool(0.5) {
                        Role::Creator
                    } else {
                        Role::Consumer
                    },
                })
                .collect()
        }
        (Some(coupling), UserClass::NonSpreader) => {
            // Non-spreaders keep a flat schedule; they buffer the
            // denominator of the daily group fractions.
            bernoulli_schedule(&vec![0.5; days], 0.0, coupling.base_activity, rng)
                .into_iter()
                .map(|day| ScheduledDay {
                    day,
                    role: Role::NonSpreader,
                })
                .collect()
        }
        (None, class) => uniform_schedule(class, params, rng),
    }
}

/// Active days under the uncoupled generator: the planted share of users
/// appear exactly once; the rest get 2..=6 distinct days.
fn uniform_schedule(
    class: UserClass,
    params: &PopulationParams,
    rng: &mut ChaCha8Rng,
) -> Vec<ScheduledDay> {
    let days = params.days;
    let pick_days = |rng: &mut ChaCha8Rng, count: usize| -> Vec<u32> {
        let count = count.min(days);
        let mut picked: Vec<u32> = sample(rng, days, count)
            .into_iter()
            .map(|d| d as u32)
            .collect();
        picked.sort_unstable();
        picked
    };
    match class {
        UserClass::OnlyCreator | UserClass::OnlyConsumer => {
            let (once_fraction, role) = if class == UserClass::OnlyCreator {
                (params.creator_once_fraction, Role::Creator)
            } else {
                (params.consumer_once_fraction, Role::Consumer)
            };
            let n_days = if rng.gen_bool(once_fraction) {
                1
            } else {
                rng.gen_range(2..=6usize).min(days)
            };
            pick_days(rng, n_days)
                .into_iter()
                .map(|day| ScheduledDay { day, role })
                .collect()
        }
        UserClass::Mixed => {
            let n_days = rng.gen_range(2..=6usize).clamp(2, days);
            let picked = pick_days(rng, n_days);
            let mut schedule: Vec<ScheduledDay> = picked
                .iter()
                .map(|&day| ScheduledDay {
                    day,
                    role: if rng.gen_bool(0.5) {
                        Role::Creator
                    } else {
                        Role::Consumer
                    },
                })
                .collect();
            // Force at least one day of each role.
            schedule[0].role = Role::Creator;
            schedule[1].role = Role::Consumer;
            schedule
        }
        UserClass::NonSpreader => {
            let n_days = rng.gen_range(1..=3usize).min(days);
            pick_days(rng, n_days)
                .into_iter()
                .map(|day| ScheduledDay {
                    day,
                    role: Role::NonSpreader,
                })
                .collect()
        }
    }
}

/// Per-day Bernoulli schedule with probability
/// `base * (amplitude*signal + (1-amplitude))`, at least one active day.
fn bernoulli_schedule(
    signal: &[f64],
    amplitude: f64,
    base: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<u32> {
    let mut picked: Vec<u32> = signal
        .iter()
        .enumerate()
        .filter_map(|(day, &s)| {
            let p = (base * 2.0 * (amplitude * s + (1.0 - amplitude) * 0.5)).clamp(0.0, 1.0);
            rng.gen_bool(p).then_some(day as u32)
        })
        .collect();
    if picked.is_empty() {
        picked.push(rng.gen_range(0..signal.len()) as u32);
    }
    picked
}

fn draw_target(
    actor: UserId,
    role: Role,
    classes: &[(UserId, UserClass)],
    creator_pool: &[UserId],
    pool_probability: f64,
    rng: &mut ChaCha8Rng,
) -> UserId {
    loop {
        let target = if role == Role::Consumer
            && !creator_pool.is_empty()
            && rng.gen_bool(pool_probability)
        {
            creator_pool[rng.gen_range(0..creator_pool.len())]
        } else {
            classes[rng.gen_range(0..classes.len())].0
        };
        if target != actor {
            return target;
        }
    }
}

/// Parameters for the coupled logistic maps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoupledMapParams {
    pub r_x: f64,
    pub r_y: f64,
    /// Effect of Y on X.
    pub beta_xy: f64,
    /// Effect of X on Y.
    pub beta_yx: f64,
    pub n: usize,
    pub burn_in: usize,
    /// Observation-noise standard deviation (0 for none).
    pub noise: f64,
    /// Response delay in samples, used by [`gen_lag_coupled`].
    pub lag: usize,
    pub seed: u64,
}

impl Default for CoupledMapParams {
    fn default() -> Self {
        Self {
            r_x: 3.8,
            r_y: 3.5,
            beta_xy: 0.32,
            beta_yx: 0.0,
            n: 1000,
            burn_in: 300,
            noise: 0.0,
            lag: 0,
            seed: 0,
        }
    }
}

impl CoupledMapParams {
    /// Unidirectionally lag-forced pair: autonomous X, Y responding to X
    /// after `lag` samples. With `r_y = 3.5` and forcing up to 0.4 the
    /// response map provably stays inside (0, 1).
    pub fn lagged(lag: usize, seed: u64) -> Self {
        Self {
            beta_xy: 0.0,
            beta_yx: 0.4,
            lag,
            seed,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<(), SynthError> {
        if self.n < 2 {
            return Err(SynthError::InvalidParams("need at least two samples".into()));
        }
        if self.burn_in < 100 {
            return Err(SynthError::InvalidParams("burn-in must be at least 100".into()));
        }
        if self.noise < 0.0 {
            return Err(SynthError::InvalidParams("noise must be non-negative".into()));
        }
        Ok(())
    }
}

/// Iterates `x' = x(r_x - r_x x - beta_xy y)`,
/// `y' = y(r_y - r_y y - beta_yx x)` after burn-in. With `beta_xy > 0`
/// and `beta_yx = 0`, Y forces X unidirectionally.
pub fn gen_coupled_logistic(params: &CoupledMapParams) -> Result<(Vec<f64>, Vec<f64>), SynthError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut x = rng.gen_range(0.2..0.8);
    let mut y = rng.gen_range(0.2..0.8);
    let mut xs = Vec::with_capacity(params.n);
    let mut ys = Vec::with_capacity(params.n);
    for step in 0..(params.burn_in + params.n) {
        let new_x = x * (params.r_x - params.r_x * x - params.beta_xy * y);
        let new_y = y * (params.r_y - params.r_y * y - params.beta_yx * x);
        if !(new_x > 0.0 && new_x < 1.0 && new_y > 0.0 && new_y < 1.0) {
            return Err(SynthError::Diverged { step });
        }
        x = new_x;
        y = new_y;
        if step >= params.burn_in {
            xs.push(x);
            ys.push(y);
        }
    }
    if params.noise > 0.0 {
        let normal = Normal::new(0.0, params.noise)
            .map_err(|e| SynthError::InvalidParams(e.to_string()))?;
        for v in xs.iter_mut().chain(ys.iter_mut()) {
            *v += normal.sample(&mut rng);
        }
    }
    Ok((xs, ys))
}

/// X is an autonomous logistic map; Y has its own logistic dynamics
/// forced by X delayed `lag` samples:
/// `y_t = y_{t-1}(r_y - r_y y_{t-1} - beta_yx x_{t-lag})`.
///
/// Ground truth: Y responds to X after `lag` samples, so a lagged
/// cross-map scan of the X-drives-Y direction peaks at `lag`.
pub fn gen_lag_coupled(params: &CoupledMapParams) -> Result<(Vec<f64>, Vec<f64>), SynthError> {
    params.validate()?;
    if params.lag >= params.n {
        return Err(SynthError::InvalidParams(
            "lag must be smaller than the series length".into(),
        ));
    }
    if params.beta_yx <= 0.0 {
        return Err(SynthError::InvalidParams(
            "lagged forcing needs beta_yx > 0 (X must drive Y)".into(),
        ));
    }
    if params.beta_xy != 0.0 {
        return Err(SynthError::InvalidParams(
            "the lagged driver must be autonomous (beta_xy = 0)".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut x_history: Vec<f64> = vec![rng.gen_range(0.2..0.8)];
    let mut y = rng.gen_range(0.2..0.8);
    let mut xs = Vec::with_capacity(params.n);
    let mut ys = Vec::with_capacity(params.n);
    for step in 0..(params.burn_in + params.n) {
        let x = *x_history.last().expect("seeded history");
        let new_x = x * (params.r_x - params.r_x * x);
        x_history.push(new_x);
        // x at `lag` steps before the value y is being updated to.
        let forcing_idx = x_history.len().saturating_sub(1 + params.lag);
        let forcing = x_history[forcing_idx];
        let new_y = y * (params.r_y - params.r_y * y - params.beta_yx * forcing);
        if !(new_x > 0.0 && new_x < 1.0 && new_y > 0.0 && new_y < 1.0) {
            return Err(SynthError::Diverged { step });
        }
        y = new_y;
        if step >= params.burn_in {
            xs.push(new_x);
            ys.push(new_y);
        }
        if x_history.len() > params.lag + 2 {
            x_history.remove(0);
        }
    }
    if params.noise > 0.0 {
        let normal = Normal::new(0.0, params.noise)
            .map_err(|e| SynthError::InvalidParams(e.to_string()))?;
        for v in ys.iter_mut() {
            *v += normal.sample(&mut rng);
        }
    }
    Ok((xs, ys))
}
