//! Per-window role assignment from the fake share of each user's activity.
//!
//! In a given window, a user whose shares are at least `threshold` fake is
//! a creator; a user with a strictly positive fake share below the
//! threshold is a consumer; an active user who shared nothing fake is a
//! non-spreader. Users with no activity in a window carry no role there.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::event::{EventLog, UserId};
use crate::network::{build_network, group_link_density, DensityMatrix};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ClassifyError {
    #[error("no activity: cannot compute a fake fraction over zero shares")]
    EmptyActivity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Role {
    Creator,
    Consumer,
    NonSpreader,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Creator => "creator",
            Role::Consumer => "consumer",
            Role::NonSpreader => "non_spreader",
        }
    }

    /// Creators and consumers are fake spreaders; non-spreaders are not.
    pub fn is_spreader(self) -> bool {
        matches!(self, Role::Creator | Role::Consumer)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassificationConfig {
    /// Fake-share threshold for the creator role, in (0, 1]. The boundary
    /// is inclusive: a share exactly at the threshold is a creator.
    pub threshold: f64,
    /// Window length in whole days.
    pub window_days: u32,
}

impl Default for ClassificationConfig {
    fn default() -> Self {
        Self {
            threshold: 0.20,
            window_days: 1,
        }
    }
}

impl ClassificationConfig {
    pub fn new(threshold: f64, window_days: u32) -> Self {
        assert!(
            threshold > 0.0 && threshold <= 1.0,
            "threshold must be in (0, 1]"
        );
        assert!(window_days >= 1, "window must be at least one day");
        Self {
            threshold,
            window_days,
        }
    }

    /// A single window covering the whole log, for the static analysis.
    pub fn full_period(threshold: f64, log: &EventLog) -> Self {
        Self::new(threshold, log.day_count().max(1) as u32)
    }
}

/// Fraction of fake shares among `total` shares.
pub fn fake_fraction(total: u64, fake: u64) -> Result<f64, ClassifyError> {
    if total == 0 {
        return Err(ClassifyError::EmptyActivity);
    }
    assert!(fake <= total, "fake shares cannot exceed total shares");
    Ok(fake as f64 / total as f64)
}

/// Role for a window's fake fraction. The creator boundary is inclusive.
pub fn classify_user(fraction: f64, cfg: &ClassificationConfig) -> Role {
    debug_assert!((0.0..=1.0).contains(&fraction));
    if fraction >= cfg.threshold {
        Role::Creator
    } else if fraction > 0.0 {
        Role::Consumer
    } else {
        Role::NonSpreader
    }
}

/// Activity and role of one user in one window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellActivity {
    pub role: Role,
    pub total: u32,
    pub fake: u32,
}

/// Per-user, per-window roles with the activity counts behind them.
#[derive(Debug, Clone, PartialEq)]
pub struct RoleAssignment {
    config: ClassificationConfig,
    n_windows: usize,
    cells: HashMap<(UserId, u32), CellActivity>,
}

impl RoleAssignment {
    pub fn config(&self) -> &ClassificationConfig {
        &self.config
    }

    /// Number of windows spanned by the underlying log.
    pub fn n_windows(&self) -> usize {
        self.n_windows
    }

    pub fn role(&self, user: UserId, window: u32) -> Option<Role> {
        self.cells.get(&(user, window)).map(|c| c.role)
    }

    pub fn cell(&self, user: UserId, window: u32) -> Option<&CellActivity> {
        self.cells.get(&(user, window))
    }

    pub fn cells(&self) -> impl Iterator<Item = (UserId, u32, &CellActivity)> {
        self.cells.iter().map(|(&(u, w), c)| (u, w, c))
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Windows in which the user was active, sorted, with their cells.
    pub fn user_history(&self) -> HashMap<UserId, Vec<(u32, CellActivity)>> {
        let mut by_user: HashMap<UserId, Vec<(u32, CellActivity)>> = HashMap::new();
        for (&(user, window), &cell) in &self.cells {
            by_user.entry(user).or_default().push((window, cell));
        }
        for history in by_user.values_mut() {
            history.sort_by_key(|&(w, _)| w);
        }
        by_user
    }

    /// Group sizes over all windows (a user active in several windows
    /// counts once per window).
    pub fn group_sizes(&self) -> GroupSizes {
        let mut sizes = GroupSizes::default();
        for cell in self.cells.values() {
            match cell.role {
                Role::Creator => sizes.creators += 1,
                Role::Consumer => sizes.consumers += 1,
                Role::NonSpreader => sizes.non_spreaders += 1,
            }
        }
        sizes
    }

    /// CSV export `user,window,role,total,fake`, sorted by user id string
    /// then window.
    pub fn to_csv(&self, log: &EventLog) -> String {
        let mut rows: Vec<_> = self
            .cells
            .iter()
            .map(|(&(user, window), cell)| (log.user_name(user), window, cell))
            .collect();
        rows.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut out = String::from("user,window,role,total,fake\n");
        for (name, window, cell) in rows {
            out.push_str(&format!(
                "{name},{window},{},{},{}\n",
                cell.role.as_str(),
                cell.total,
                cell.fake
            ));
        }
        out
    }

    pub(crate) fn from_raw(
        config: ClassificationConfig,
        n_windows: usize,
        cells: HashMap<(UserId, u32), CellActivity>,
    ) -> Self {
        Self {
            config,
            n_windows,
            cells,
        }
    }
}

/// Assigns a role to every (user, window) with at least one share.
///
/// Unlabeled events count toward the denominator but never as fake; the
/// fake fraction is taken over all of a user's shares in the window.
pub fn classify_window(log: &EventLog, cfg: &ClassificationConfig) -> RoleAssignment {
    let n_windows = log
        .day_count()
        .div_ceil(cfg.window_days as usize)
        .max(if log.is_empty() { 0 } else { 1 });
    let mut counts: HashMap<(UserId, u32), (u32, u32)> = HashMap::new();
    for event in log.events() {
        let window = log.day_index(event.timestamp) as u32 / cfg.window_days;
        let entry = counts.entry((event.actor, window)).or_insert((0, 0));
        entry.0 += 1;
        if event.category.is_fake() {
            entry.1 += 1;
        }
    }
    let cells = counts
        .into_iter()
        .map(|(key, (total, fake))| {
            let fraction = fake as f64 / total as f64;
            let cell = CellActivity {
                role: classify_user(fraction, cfg),
                total,
                fake,
            };
            (key, cell)
        })
        .collect();
    RoleAssignment::from_raw(*cfg, n_windows, cells)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSizes {
    pub creators: usize,
    pub consumers: usize,
    pub non_spreaders: usize,
}

/// Cross-window behavior of the fake-spreader population.
///
/// Every user ever assigned creator or consumer falls in exactly one of
/// the three groups; `only_once` counts those with exactly one
/// fake-spreader window (mixed users need at least two, so they have no
/// such sub-count). Fractions are relative to the spreader population.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BehaviorSummary {
    pub spreaders: usize,
    pub only_creators: usize,
    pub only_creators_fraction: f64,
    pub only_creators_once: usize,
    pub only_creators_once_fraction: f64,
    pub only_consumers: usize,
    pub only_consumers_fraction: f64,
    pub only_consumers_once: usize,
    pub only_consumers_once_fraction: f64,
    pub mixed: usize,
    pub mixed_fraction: f64,
}

pub fn behavior_summary(assign: &RoleAssignment) -> BehaviorSummary {
    let mut summary = BehaviorSummary::default();
    for history in assign.user_history().values() {
        let mut creator_windows = 0usize;
        let mut consumer_windows = 0usize;
        for (_, cell) in history {
            match cell.role {
                Role::Creator => creator_windows += 1,
                Role::Consumer => consumer_windows += 1,
                Role::NonSpreader => {}
            }
        }
        let spreader_windows = creator_windows + consumer_windows;
        if spreader_windows == 0 {
            continue;
        }
        summary.spreaders += 1;
        match (creator_windows > 0, consumer_windows > 0) {
            (true, true) => summary.mixed += 1,
            (true, false) => {
                summary.only_creators += 1;
                if spreader_windows == 1 {
                    summary.only_creators_once += 1;
                }
            }
            (false, true) => {
                summary.only_consumers += 1;
                if spreader_windows == 1 {
                    summary.only_consumers_once += 1;
                }
            }
            (false, false) => unreachable!(),
        }
    }
    if summary.spreaders > 0 {
        let denom = summary.spreaders as f64;
        summary.only_creators_fraction = summary.only_creators as f64 / denom;
        summary.only_creators_once_fraction = summary.only_creators_once as f64 / denom;
        summary.only_consumers_fraction = summary.only_consumers as f64 / denom;
        summary.only_consumers_once_fraction = summary.only_consumers_once as f64 / denom;
        summary.mixed_fraction = summary.mixed as f64 / denom;
    }
    summary
}

/// One sweep entry: static group sizes and link densities at a threshold.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRecord {
    pub threshold: f64,
    pub sizes: GroupSizes,
    pub density: DensityMatrix,
}

/// Re-runs the static (full-period) classification and link-density
/// analysis for each threshold.
pub fn sensitivity_sweep(log: &EventLog, thresholds: &[f64]) -> Vec<SweepRecord> {
    let network = build_network(log);
    thresholds
        .iter()
        .map(|&threshold| {
            let cfg = ClassificationConfig::full_period(threshold, log);
            let assign = classify_window(log, &cfg);
            let density = group_link_density(&network, &assign);
            SweepRecord {
                threshold,
                sizes: assign.group_sizes(),
                density,
            }
        })
        .collect()
}
