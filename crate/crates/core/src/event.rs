//! Core domain types: share events, content categories, and the event log.
//!
//! A [`ShareEvent`] is one retweet/reply record: who shared (`actor`), whose
//! content (`source`), when, and what kind of content it pointed to. Events
//! live in an [`EventLog`], which keeps them sorted by timestamp and interns
//! user ids so downstream analytics work on dense integer handles.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Seconds in one UTC calendar day. All windowed analyses truncate
/// timestamps to whole days.
pub const SECONDS_PER_DAY: i64 = 86_400;

/// UTC calendar day containing an epoch timestamp.
pub fn day_of(timestamp: i64) -> i64 {
    timestamp.div_euclid(SECONDS_PER_DAY)
}

/// Dense handle for an interned user id. Ordering follows interning order,
/// not the original string; use [`EventLog::user_name`] to recover the
/// original id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct UserId(pub u32);

impl UserId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// The seven content categories plus `Unlabeled` for events whose domain
/// is unknown or absent from the category table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ContentCategory {
    Science,
    MainstreamMedia,
    Satire,
    Clickbait,
    Political,
    FakeHoax,
    ConspiracyJunkScience,
    Unlabeled,
}

impl ContentCategory {
    /// The seven labeled categories, in canonical order.
    pub const LABELED: [ContentCategory; 7] = [
        ContentCategory::Science,
        ContentCategory::MainstreamMedia,
        ContentCategory::Satire,
        ContentCategory::Clickbait,
        ContentCategory::Political,
        ContentCategory::FakeHoax,
        ContentCategory::ConspiracyJunkScience,
    ];

    /// True exactly for Clickbait, FakeHoax and ConspiracyJunkScience.
    /// `Unlabeled` is never fake.
    pub fn is_fake(self) -> bool {
        matches!(
            self,
            ContentCategory::Clickbait
                | ContentCategory::FakeHoax
                | ContentCategory::ConspiracyJunkScience
        )
    }

    /// Canonical spelling used in CSV/JSONL artifacts. `Unlabeled`
    /// serializes as the empty string.
    pub fn as_str(self) -> &'static str {
        match self {
            ContentCategory::Science => "Science",
            ContentCategory::MainstreamMedia => "MainstreamMedia",
            ContentCategory::Satire => "Satire",
            ContentCategory::Clickbait => "Clickbait",
            ContentCategory::Political => "Political",
            ContentCategory::FakeHoax => "FakeHoax",
            ContentCategory::ConspiracyJunkScience => "ConspiracyJunkScience",
            ContentCategory::Unlabeled => "",
        }
    }
}

impl fmt::Display for ContentCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ContentCategory {
    type Err = UnknownCategory;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Science" => Ok(ContentCategory::Science),
            "MainstreamMedia" => Ok(ContentCategory::MainstreamMedia),
            "Satire" => Ok(ContentCategory::Satire),
            "Clickbait" => Ok(ContentCategory::Clickbait),
            "Political" => Ok(ContentCategory::Political),
            "FakeHoax" => Ok(ContentCategory::FakeHoax),
            "ConspiracyJunkScience" => Ok(ContentCategory::ConspiracyJunkScience),
            "" | "Unlabeled" => Ok(ContentCategory::Unlabeled),
            other => Err(UnknownCategory(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownCategory(pub String);

impl fmt::Display for UnknownCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown content category {:?}", self.0)
    }
}

impl std::error::Error for UnknownCategory {}

/// Mapping hostname -> category. Hostnames are stored lowercase.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CategoryTable {
    map: HashMap<String, ContentCategory>,
}

impl CategoryTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts a hostname mapping, lowercasing the key. Returns the
    /// previous category if the hostname was already present.
    pub fn insert(&mut self, domain: &str, category: ContentCategory) -> Option<ContentCategory> {
        self.map.insert(domain.to_ascii_lowercase(), category)
    }

    pub fn lookup(&self, domain: &str) -> Option<ContentCategory> {
        if domain.bytes().any(|b| b.is_ascii_uppercase()) {
            self.map.get(&domain.to_ascii_lowercase()).copied()
        } else {
            self.map.get(domain).copied()
        }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// One share record. `actor` retweeted (or replied to) `source`.
/// Self-shares (`actor == source`) are rejected at ingestion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShareEvent {
    /// Seconds since the Unix epoch, UTC.
    pub timestamp: i64,
    /// The retweeting user.
    pub actor: UserId,
    /// The retweeted user.
    pub source: UserId,
    /// Hostname of the shared URL, if any.
    pub domain: Option<Box<str>>,
    pub category: ContentCategory,
}

/// Inclusive study window in epoch seconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeWindow {
    pub start: i64,
    pub end: i64,
}

impl TimeWindow {
    pub fn new(start: i64, end: i64) -> Self {
        assert!(start <= end, "window start must not exceed end");
        Self { start, end }
    }

    pub fn contains(&self, ts: i64) -> bool {
        self.start <= ts && ts <= self.end
    }

    /// Number of UTC calendar days touched by the window.
    pub fn day_count(&self) -> usize {
        (day_of(self.end) - day_of(self.start) + 1) as usize
    }
}

/// Interner from user id strings to dense [`UserId`] handles.
#[derive(Debug, Clone, Default)]
pub struct UserTable {
    names: Vec<Box<str>>,
    index: HashMap<Box<str>, UserId>,
}

impl UserTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, name: &str) -> UserId {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = UserId(self.names.len() as u32);
        self.names.push(name.into());
        self.index.insert(name.into(), id);
        id
    }

    pub fn get(&self, name: &str) -> Option<UserId> {
        self.index.get(name).copied()
    }

    pub fn name(&self, id: UserId) -> &str {
        &self.names[id.index()]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = UserId> + '_ {
        (0..self.names.len() as u32).map(UserId)
    }
}

impl PartialEq for UserTable {
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names
    }
}

/// Time-sorted sequence of share events plus the study window.
///
/// Invariants: events are sorted non-decreasing by timestamp and all lie
/// inside the window; the window is `None` only for an empty log.
///
/// Equality is semantic: two logs are equal when their windows match and
/// their event sequences match after resolving user ids back to names.
/// Interning order is an artifact of construction, not part of the data.
#[derive(Debug, Clone, Default)]
pub struct EventLog {
    users: UserTable,
    events: Vec<ShareEvent>,
    window: Option<TimeWindow>,
}

impl PartialEq for EventLog {
    fn eq(&self, other: &Self) -> bool {
        self.window == other.window
            && self.events.len() == other.events.len()
            && self
                .events
                .iter()
                .zip(&other.events)
                .all(|(a, b)| {
                    a.timestamp == b.timestamp
                        && a.domain == b.domain
                        && a.category == b.category
                        && self.user_name(a.actor) == other.user_name(b.actor)
                        && self.user_name(a.source) == other.user_name(b.source)
                })
    }
}

impl EventLog {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a log from already-interned events, sorting by timestamp
    /// (stable) and deriving the window from the data.
    pub fn from_parts(users: UserTable, mut events: Vec<ShareEvent>) -> Self {
        events.sort_by_key(|e| e.timestamp);
        let window = match (events.first(), events.last()) {
            (Some(first), Some(last)) => Some(TimeWindow::new(first.timestamp, last.timestamp)),
            _ => None,
        };
        Self {
            users,
            events,
            window,
        }
    }

    /// As [`from_parts`](Self::from_parts) but with an explicit window.
    /// Panics if any event falls outside it.
    pub fn with_window(users: UserTable, mut events: Vec<ShareEvent>, window: TimeWindow) -> Self {
        events.sort_by_key(|e| e.timestamp);
        assert!(
            events.iter().all(|e| window.contains(e.timestamp)),
            "event outside the declared window"
        );
        Self {
            users,
            events,
            window: Some(window),
        }
    }

    pub fn events(&self) -> &[ShareEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn window(&self) -> Option<TimeWindow> {
        self.window
    }

    pub fn users(&self) -> &UserTable {
        &self.users
    }

    pub fn user_name(&self, id: UserId) -> &str {
        self.users.name(id)
    }

    pub fn user_count(&self) -> usize {
        self.users.len()
    }

    /// Calendar day of the window start; day indices count from here.
    pub fn day_origin(&self) -> Option<i64> {
        self.window.map(|w| day_of(w.start))
    }

    /// Number of days covered by the window (0 for an empty log).
    pub fn day_count(&self) -> usize {
        self.window.map(|w| w.day_count()).unwrap_or(0)
    }

    /// Day index of an event relative to the window start.
    pub fn day_index(&self, ts: i64) -> usize {
        let origin = self.day_origin().expect("day_index on an empty log");
        (day_of(ts) - origin) as usize
    }

    pub(crate) fn into_parts(self) -> (UserTable, Vec<ShareEvent>, Option<TimeWindow>) {
        (self.users, self.events, self.window)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fake_subset_is_exactly_three_of_seven() {
        let fake: Vec<_> = ContentCategory::LABELED
            .iter()
            .filter(|c| c.is_fake())
            .collect();
        assert_eq!(fake.len(), 3);
        assert!(ContentCategory::Clickbait.is_fake());
        assert!(ContentCategory::FakeHoax.is_fake());
        assert!(ContentCategory::ConspiracyJunkScience.is_fake());
        assert!(!ContentCategory::Unlabeled.is_fake());
    }

    #[test]
    fn category_spellings_round_trip() {
        for cat in ContentCategory::LABELED {
            assert_eq!(cat.as_str().parse::<ContentCategory>().unwrap(), cat);
        }
        assert_eq!(
            "".parse::<ContentCategory>().unwrap(),
            ContentCategory::Unlabeled
        );
        assert!("FakeNews".parse::<ContentCategory>().is_err());
    }

    #[test]
    fn category_table_lowercases_keys() {
        let mut table = CategoryTable::new();
        table.insert("Example-Hoax.NET", ContentCategory::FakeHoax);
        assert_eq!(
            table.lookup("example-hoax.net"),
            Some(ContentCategory::FakeHoax)
        );
        assert_eq!(
            table.lookup("EXAMPLE-HOAX.NET"),
            Some(ContentCategory::FakeHoax)
        );
        assert_eq!(table.lookup("other.org"), None);
    }

    #[test]
    fn day_truncation_is_utc_floor() {
        assert_eq!(day_of(0), 0);
        assert_eq!(day_of(86_399), 0);
        assert_eq!(day_of(86_400), 1);
        assert_eq!(day_of(-1), -1);
    }

    #[test]
    fn log_sorts_events_and_derives_window() {
        let mut users = UserTable::new();
        let a = users.intern("a");
        let b = users.intern("b");
        let ev = |ts| ShareEvent {
            timestamp: ts,
            actor: a,
            source: b,
            domain: None,
            category: ContentCategory::Unlabeled,
        };
        let log = EventLog::from_parts(users, vec![ev(30), ev(10), ev(20)]);
        let stamps: Vec<_> = log.events().iter().map(|e| e.timestamp).collect();
        assert_eq!(stamps, vec![10, 20, 30]);
        assert_eq!(log.window(), Some(TimeWindow::new(10, 30)));
    }
}
