//! Directed retweet network, content-concentration curves, and group link
//! densities against a random null model.
//!
//! Edges run from the retweeting to the retweeted user and accumulate one
//! unit of multiplicity per share event. The null model places the same
//! number of link units uniformly at random among all ordered node pairs;
//! a degree-preserving expectation is available as an alternative.

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::classify::{classify_user, GroupSizes, Role, RoleAssignment};
use crate::event::{ContentCategory, EventLog, UserId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NetworkError {
    #[error("no events match the requested filter")]
    EmptyResult,
    #[error("degenerate network: need at least 2 nodes and 1 link")]
    DegenerateNetwork,
}

/// Directed weighted graph; edge multiplicity counts parallel share
/// events. Self-loops cannot occur (self-shares are dropped at ingestion).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RetweetNetwork {
    edges: HashMap<(UserId, UserId), u64>,
    nodes: Vec<UserId>,
    total_multiplicity: u64,
}

impl RetweetNetwork {
    /// Builds the network from explicit directed edge units.
    pub fn from_edge_units(units: impl IntoIterator<Item = (UserId, UserId)>) -> Self {
        let mut edges: HashMap<(UserId, UserId), u64> = HashMap::new();
        let mut seen: HashMap<UserId, ()> = HashMap::new();
        let mut total = 0u64;
        for (from, to) in units {
            assert_ne!(from, to, "self-loops are not allowed");
            *edges.entry((from, to)).or_insert(0) += 1;
            total += 1;
            seen.entry(from).or_insert(());
            seen.entry(to).or_insert(());
        }
        let mut nodes: Vec<UserId> = seen.into_keys().collect();
        nodes.sort();
        Self {
            edges,
            nodes,
            total_multiplicity: total,
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[UserId] {
        &self.nodes
    }

    /// Total edge multiplicity; equals the number of events used to
    /// build the network.
    pub fn link_count(&self) -> u64 {
        self.total_multiplicity
    }

    pub fn distinct_edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn multiplicity(&self, from: UserId, to: UserId) -> u64 {
        self.edges.get(&(from, to)).copied().unwrap_or(0)
    }

    pub fn edges(&self) -> impl Iterator<Item = (UserId, UserId, u64)> + '_ {
        self.edges.iter().map(|(&(a, b), &m)| (a, b, m))
    }

    /// Copy with every parallel bundle collapsed to multiplicity 1.
    pub fn as_simple(&self) -> Self {
        let mut simple = self.clone();
        for m in simple.edges.values_mut() {
            *m = 1;
        }
        simple.total_multiplicity = simple.edges.len() as u64;
        simple
    }
}

/// One directed edge unit per event, actor -> source.
pub fn build_network(log: &EventLog) -> RetweetNetwork {
    RetweetNetwork::from_edge_units(log.events().iter().map(|e| (e.actor, e.source)))
}

/// Which events a concentration curve counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CategoryFilter {
    All,
    Fake,
    One(ContentCategory),
}

impl CategoryFilter {
    pub fn matches(self, category: ContentCategory) -> bool {
        match self {
            CategoryFilter::All => true,
            CategoryFilter::Fake => category.is_fake(),
            CategoryFilter::One(c) => category == c,
        }
    }

    pub fn label(self) -> String {
        match self {
            CategoryFilter::All => "all".into(),
            CategoryFilter::Fake => "fake".into(),
            CategoryFilter::One(c) => c.as_str().into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub user_share: f64,
    pub content_share: f64,
}

/// Cumulative content share against cumulative user share, users sorted
/// by descending activity. One point per user; the last point is (1, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationCurve {
    pub points: Vec<CurvePoint>,
    pub filter_label: String,
    pub user_count: usize,
    pub event_count: u64,
}

impl ConcentrationCurve {
    /// CSV rows `user_share,content_share,category`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("user_share,content_share,category\n");
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{}\n",
                p.user_share, p.content_share, self.filter_label
            ));
        }
        out
    }

    /// At most `max_points` points for plot emission. Keeps the first and
    /// last points; the analysis resolution is unaffected.
    pub fn downsample(&self, max_points: usize) -> Vec<CurvePoint> {
        let n = self.points.len();
        if n <= max_points || max_points < 2 {
            return self.points.clone();
        }
        let mut kept = Vec::with_capacity(max_points);
        for i in 0..max_points {
            let idx = i * (n - 1) / (max_points - 1);
            kept.push(self.points[idx]);
        }
        kept
    }
}

/// Ranks users by event count within the filter (ties broken by user id
/// string) and cumulates shares.
pub fn concentration_curve(
    log: &EventLog,
    filter: CategoryFilter,
) -> Result<ConcentrationCurve, NetworkError> {
    let mut counts: HashMap<UserId, u64> = HashMap::new();
    for event in log.events() {
        if filter.matches(event.category) {
            *counts.entry(event.actor).or_insert(0) += 1;
        }
    }
    if counts.is_empty() {
        return Err(NetworkError::EmptyResult);
    }
    let mut ranked: Vec<(UserId, u64)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| {
        b.1.cmp(&a.1)
            .then_with(|| log.user_name(a.0).cmp(log.user_name(b.0)))
    });
    let total_events: u64 = ranked.iter().map(|&(_, c)| c).sum();
    let total_users = ranked.len();

    let mut points = Vec::with_capacity(total_users);
    let mut cum = 0u64;
    for (i, &(_, count)) in ranked.iter().enumerate() {
        cum += count;
        points.push(CurvePoint {
            user_share: (i + 1) as f64 / total_users as f64,
            content_share: cum as f64 / total_events as f64,
        });
    }
    Ok(ConcentrationCurve {
        points,
        filter_label: filter.label(),
        user_count: total_users,
        event_count: total_events,
    })
}

/// Expected multiplicity between two groups when `L` link units fall
/// uniformly on ordered node pairs: `L·nA·nB/(N·(N−1))` across groups and
/// `L·nA·(nA−1)/(N·(N−1))` within one.
pub fn expected_links_random(
    network: &RetweetNetwork,
    group_a: usize,
    group_b: usize,
    same_group: bool,
) -> Result<f64, NetworkError> {
    expected_links_in_universe(
        network.link_count(),
        network.node_count(),
        group_a,
        group_b,
        same_group,
    )
}

fn expected_links_in_universe(
    links: u64,
    nodes: usize,
    group_a: usize,
    group_b: usize,
    same_group: bool,
) -> Result<f64, NetworkError> {
    if nodes < 2 || links == 0 {
        return Err(NetworkError::DegenerateNetwork);
    }
    let pairs = (nodes as f64) * (nodes as f64 - 1.0);
    let numerator = if same_group {
        group_a as f64 * (group_a as f64 - 1.0)
    } else {
        group_a as f64 * group_b as f64
    };
    Ok(links as f64 * numerator / pairs)
}

/// Null model used for the expected link counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NullModel {
    /// Uniform random placement of link units among ordered node pairs.
    #[default]
    UniformRandom,
    /// Degree-preserving expectation `S_out(A)·S_in(B)/L`.
    DegreePreserving,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityCell {
    pub observed: u64,
    pub expected: f64,
    /// `observed / expected`; `None` when the pair is empty under the
    /// null (empty group), reported rather than fatal.
    pub ratio: Option<f64>,
}

/// 3x3 observed/expected link densities over ordered role pairs, row =
/// retweeting group, column = retweeted group.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityMatrix {
    /// Row/column order of `cells`.
    pub groups: [Role; 3],
    pub cells: [[DensityCell; 3]; 3],
    pub sizes: GroupSizes,
    pub node_count: usize,
    pub total_links: u64,
    pub null_model: NullModel,
}

impl DensityMatrix {
    pub fn cell(&self, from: Role, to: Role) -> &DensityCell {
        let idx = |r: Role| self.groups.iter().position(|&g| g == r).unwrap();
        &self.cells[idx(from)][idx(to)]
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("density matrix serializes")
    }
}

/// Per-user static role: activity aggregated across windows and
/// re-classified at the assignment's threshold. Network nodes without any
/// activity in the assignment are non-spreaders.
fn static_roles(network: &RetweetNetwork, assign: &RoleAssignment) -> HashMap<UserId, Role> {
    let mut totals: HashMap<UserId, (u64, u64)> = HashMap::new();
    for (user, _, cell) in assign.cells() {
        let entry = totals.entry(user).or_insert((0, 0));
        entry.0 += cell.total as u64;
        entry.1 += cell.fake as u64;
    }
    network
        .nodes()
        .iter()
        .map(|&node| {
            let role = match totals.get(&node) {
                Some(&(total, fake)) if total > 0 => {
                    classify_user(fake as f64 / total as f64, assign.config())
                }
                _ => Role::NonSpreader,
            };
            (node, role)
        })
        .collect()
}

/// Observed vs expected link multiplicities over ordered role pairs,
/// with the node universe taken from the network itself.
pub fn group_link_density(network: &RetweetNetwork, assign: &RoleAssignment) -> DensityMatrix {
    group_link_density_with(network, assign, NullModel::UniformRandom, None)
}

/// As [`group_link_density`] with an explicit null model and an optional
/// node-universe override (useful when the network is a sample of a
/// larger population).
pub fn group_link_density_with(
    network: &RetweetNetwork,
    assign: &RoleAssignment,
    null_model: NullModel,
    universe_size: Option<usize>,
) -> DensityMatrix {
    const GROUPS: [Role; 3] = [Role::Creator, Role::Consumer, Role::NonSpreader];
    let roles = static_roles(network, assign);
    let idx = |r: Role| GROUPS.iter().position(|&g| g == r).unwrap();

    let mut sizes = GroupSizes::default();
    for &role in roles.values() {
        match role {
            Role::Creator => sizes.creators += 1,
            Role::Consumer => sizes.consumers += 1,
            Role::NonSpreader => sizes.non_spreaders += 1,
        }
    }
    let group_count = [sizes.creators, sizes.consumers, sizes.non_spreaders];

    let mut observed = [[0u64; 3]; 3];
    let mut out_strength = [0u64; 3];
    let mut in_strength = [0u64; 3];
    for (from, to, multiplicity) in network.edges() {
        let fi = idx(roles[&from]);
        let ti = idx(roles[&to]);
        observed[fi][ti] += multiplicity;
        out_strength[fi] += multiplicity;
        in_strength[ti] += multiplicity;
    }

    let nodes = universe_size.unwrap_or(network.node_count());
    let links = network.link_count();
    let mut cells = [[DensityCell {
        observed: 0,
        expected: 0.0,
        ratio: None,
    }; 3]; 3];
    for (fi, row) in cells.iter_mut().enumerate() {
        for (ti, cell) in row.iter_mut().enumerate() {
            let expected = match null_model {
                NullModel::UniformRandom => expected_links_in_universe(
                    links,
                    nodes,
                    group_count[fi],
                    group_count[ti],
                    fi == ti,
                )
                .unwrap_or(0.0),
                NullModel::DegreePreserving => {
                    if links == 0 {
                        0.0
                    } else {
                        out_strength[fi] as f64 * in_strength[ti] as f64 / links as f64
                    }
                }
            };
            *cell = DensityCell {
                observed: observed[fi][ti],
                expected,
                ratio: (expected > 0.0).then(|| observed[fi][ti] as f64 / expected),
            };
        }
    }

    DensityMatrix {
        groups: GROUPS,
        cells,
        sizes,
        node_count: nodes,
        total_links: links,
        null_model,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{classify_window, ClassificationConfig};
    use crate::event::{ShareEvent, UserTable, SECONDS_PER_DAY};

    fn log_from_edges(edges: &[(&str, &str, bool)]) -> EventLog {
        let mut users = UserTable::new();
        let events = edges
            .iter()
            .enumerate()
            .map(|(i, &(a, s, fake))| ShareEvent {
                timestamp: i as i64 % 3 * SECONDS_PER_DAY,
                actor: users.intern(a),
                source: users.intern(s),
                domain: None,
                category: if fake {
                    ContentCategory::FakeHoax
                } else {
                    ContentCategory::MainstreamMedia
                },
            })
            .collect();
        EventLog::from_parts(users, events)
    }

    #[test]
    fn network_accumulates_multiplicity() {
        let log = log_from_edges(&[("u", "v", false), ("u", "v", false), ("v", "w", false)]);
        let net = build_network(&log);
        let u = log.users().get("u").unwrap();
        let v = log.users().get("v").unwrap();
        let w = log.users().get("w").unwrap();
        assert_eq!(net.multiplicity(u, v), 2);
        assert_eq!(net.multiplicity(v, w), 1);
        assert_eq!(net.link_count(), 3);
        assert_eq!(net.node_count(), 3);
    }

    #[test]
    fn empty_log_empty_network() {
        let log = EventLog::new();
        let net = build_network(&log);
        assert_eq!(net.node_count(), 0);
        assert_eq!(net.link_count(), 0);
    }

    #[test]
    fn simple_mode_collapses_parallels() {
        let log = log_from_edges(&[("u", "v", false), ("u", "v", false), ("v", "w", false)]);
        let simple = build_network(&log).as_simple();
        assert_eq!(simple.link_count(), 2);
    }

    #[test]
    fn uniform_activity_curve_is_diagonal() {
        let mut edges = Vec::new();
        for u in 0..4 {
            for i in 0..5 {
                edges.push((format!("u{u}"), format!("v{i}")));
            }
        }
        let borrowed: Vec<(&str, &str, bool)> =
            edges.iter().map(|(a, s)| (a.as_str(), s.as_str(), false)).collect();
        let log = log_from_edges(&borrowed);
        let curve = concentration_curve(&log, CategoryFilter::All).unwrap();
        assert_eq!(curve.points.len(), 4);
        for (i, p) in curve.points.iter().enumerate() {
            let share = (i + 1) as f64 / 4.0;
            assert!((p.user_share - share).abs() < 1e-12);
            assert!((p.content_share - share).abs() < 1e-12);
        }
    }

    #[test]
    fn heavy_user_dominates_first_point() {
        let mut edges = Vec::new();
        for i in 0..90 {
            edges.push(("big".to_string(), format!("t{i}")));
        }
        for u in 0..10 {
            edges.push((format!("small{u}"), "big".to_string()));
        }
        let borrowed: Vec<(&str, &str, bool)> =
            edges.iter().map(|(a, s)| (a.as_str(), s.as_str(), false)).collect();
        let log = log_from_edges(&borrowed);
        let curve = concentration_curve(&log, CategoryFilter::All).unwrap();
        let first = curve.points[0];
        assert!((first.user_share - 1.0 / 11.0).abs() < 1e-12);
        assert!((first.content_share - 0.90).abs() < 1e-12);
    }

    #[test]
    fn curve_on_empty_filter_errors() {
        let log = log_from_edges(&[("u", "v", false)]);
        assert_eq!(
            concentration_curve(&log, CategoryFilter::Fake).unwrap_err(),
            NetworkError::EmptyResult
        );
    }

    #[test]
    fn expected_links_arithmetic() {
        let log = log_from_edges(&[
            ("a", "b", false),
            ("a", "c", false),
            ("b", "c", false),
            ("b", "d", false),
            ("c", "d", false),
            ("d", "a", false),
        ]);
        let net = build_network(&log);
        assert_eq!(net.node_count(), 4);
        assert_eq!(net.link_count(), 6);
        let expected = expected_links_random(&net, 1, 2, false).unwrap();
        assert!((expected - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_network_is_an_error() {
        let net = RetweetNetwork::default();
        assert_eq!(
            expected_links_random(&net, 1, 1, false).unwrap_err(),
            NetworkError::DegenerateNetwork
        );
    }

    #[test]
    fn complete_graph_ratios_are_exactly_one() {
        let names: Vec<String> = (0..8).map(|i| format!("u{i}")).collect();
        let mut edges = Vec::new();
        for a in &names {
            for b in &names {
                if a != b {
                    // Mix of fake shares so the partition is nontrivial.
                    edges.push((a.as_str(), b.as_str(), a < b));
                }
            }
        }
        let log = log_from_edges(&edges);
        let net = build_network(&log);
        assert_eq!(net.link_count(), 8 * 7);
        let assign = classify_window(&log, &ClassificationConfig::full_period(0.2, &log));
        let density = group_link_density(&net, &assign);
        for row in &density.cells {
            for cell in row {
                if let Some(ratio) = cell.ratio {
                    assert!(
                        (ratio - 1.0).abs() < 1e-9,
                        "complete graph must match the null exactly, got {ratio}"
                    );
                }
            }
        }
    }

    #[test]
    fn toy_density_hand_enumeration() {
        // 3 consumers each retweet 1 creator once, 1 non-spreader idle:
        // N=5, L=3, observed(Consumer->Creator)=3,
        // expected = 3*(3*1)/20 = 0.45, ratio = 6.67.
        let mut users = UserTable::new();
        let mut events = Vec::new();
        let push = |u: &mut UserTable, actor: &str, source: &str, fake: bool, out: &mut Vec<ShareEvent>| {
            out.push(ShareEvent {
                timestamp: 0,
                actor: u.intern(actor),
                source: u.intern(source),
                domain: None,
                category: if fake {
                    ContentCategory::FakeHoax
                } else {
                    ContentCategory::Science
                },
            });
        };
        // Each consumer: 1 fake retweet of the creator + 9 non-fake
        // elsewhere (fraction 0.1); the creator's own share is all fake.
        for c in ["c1", "c2", "c3"] {
            push(&mut users, c, "creator", true, &mut events);
            for i in 0..9 {
                push(&mut users, c, &format!("x{i}"), false, &mut events);
            }
        }
        push(&mut users, "creator", "x0", true, &mut events);
        let log = EventLog::from_parts(users, events);
        let assign = classify_window(&log, &ClassificationConfig::full_period(0.2, &log));

        // The toy network holds only the consumer->creator links; the
        // idle non-spreader enters through the universe override (N=5).
        let creator = log.users().get("creator").unwrap();
        let units: Vec<(UserId, UserId)> = ["c1", "c2", "c3"]
            .iter()
            .map(|c| (log.users().get(c).unwrap(), creator))
            .collect();
        let net = RetweetNetwork::from_edge_units(units);
        assert_eq!(net.link_count(), 3);

        let density =
            group_link_density_with(&net, &assign, NullModel::UniformRandom, Some(5));
        let cell = density.cell(Role::Consumer, Role::Creator);
        assert_eq!(cell.observed, 3);
        assert!((cell.expected - 0.45).abs() < 1e-12);
        assert!((cell.ratio.unwrap() - 3.0 / 0.45).abs() < 1e-9);
    }

    #[test]
    fn observed_and_expected_both_sum_to_links() {
        let log = log_from_edges(&[
            ("a", "b", true),
            ("a", "c", false),
            ("b", "c", true),
            ("c", "a", false),
            ("d", "a", true),
            ("d", "b", false),
            ("d", "c", false),
        ]);
        let net = build_network(&log);
        let assign = classify_window(&log, &ClassificationConfig::full_period(0.2, &log));
        let density = group_link_density(&net, &assign);
        let observed: u64 = density
            .cells
            .iter()
            .flatten()
            .map(|c| c.observed)
            .sum();
        let expected: f64 = density.cells.iter().flatten().map(|c| c.expected).sum();
        assert_eq!(observed, net.link_count());
        assert!((expected - net.link_count() as f64).abs() < 1e-9);
    }
}
