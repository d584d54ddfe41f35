//! Domain types for the three input databases and corpus slicing.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

/// Default local-time offset for time-of-day features: UTC+8.
pub const DEFAULT_LOCAL_OFFSET_MS: i64 = 8 * 3_600_000;

/// The four account classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassLabel {
    Broadcast,
    Consumption,
    Spam,
    Human,
}

impl ClassLabel {
    pub const ALL: [ClassLabel; 4] = [
        ClassLabel::Broadcast,
        ClassLabel::Consumption,
        ClassLabel::Spam,
        ClassLabel::Human,
    ];

    pub const COUNT: usize = 4;

    pub fn as_str(self) -> &'static str {
        match self {
            ClassLabel::Broadcast => "broadcast",
            ClassLabel::Consumption => "consumption",
            ClassLabel::Spam => "spam",
            ClassLabel::Human => "human",
        }
    }

    pub fn parse(s: &str) -> Option<ClassLabel> {
        match s {
            "broadcast" => Some(ClassLabel::Broadcast),
            "consumption" => Some(ClassLabel::Consumption),
            "spam" => Some(ClassLabel::Spam),
            "human" => Some(ClassLabel::Human),
            _ => None,
        }
    }

    /// Declaration-order index, also the tie-break order for predictions.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<ClassLabel> {
        Self::ALL.get(i).copied()
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccountProfile {
    pub user_id: String,
    #[serde(default)]
    pub screen_name: String,
    #[serde(default)]
    pub location: String,
    #[serde(default)]
    pub description: String,
    /// UTC epoch milliseconds when the account was created.
    #[serde(default)]
    pub created_at: i64,
    #[serde(default)]
    pub is_geo_enabled: bool,
    #[serde(default)]
    pub lang: String,
    #[serde(default)]
    pub time_zone: String,
    #[serde(default)]
    pub favourites_count: u64,
    #[serde(default)]
    pub listed_count: u64,
    #[serde(default)]
    pub statuses_count: u64,
    /// Profile-declared UTC offset in seconds.
    #[serde(default)]
    pub utc_offset: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TweetRecord {
    pub tweet_id: String,
    pub user_id: String,
    /// UTC epoch milliseconds.
    pub timestamp: i64,
    #[serde(default)]
    pub words: Vec<String>,
    #[serde(default)]
    pub hashtags: Vec<String>,
    #[serde(default)]
    pub urls: Vec<String>,
    #[serde(default)]
    pub mentions: Vec<String>,
    #[serde(default)]
    pub media: Vec<String>,
    #[serde(default)]
    pub source: String,
    #[serde(default)]
    pub is_retweet: bool,
    /// Times this tweet was reshared by others.
    #[serde(default)]
    pub retweeted_count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FollowSnapshot {
    pub user_id: String,
    /// UTC epoch milliseconds.
    pub snapshot_time: i64,
    #[serde(default)]
    pub followees: BTreeSet<String>,
    #[serde(default)]
    pub followers: BTreeSet<String>,
}

/// Half-open window `[start, end)` in UTC epoch milliseconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeWindow {
    pub start: i64,
    pub end: i64,
}

impl TimeWindow {
    pub fn new(start: i64, end: i64) -> Result<TimeWindow, CorpusError> {
        if start < end {
            Ok(TimeWindow { start, end })
        } else {
            Err(CorpusError::InvalidWindow { start, end })
        }
    }

    pub fn contains(&self, t: i64) -> bool {
        self.start <= t && t < self.end
    }

    /// Window of `duration_ms` anchored so that `end_inclusive` is its last
    /// covered instant.
    pub fn anchored_at_end(end_inclusive: i64, duration_ms: i64) -> Result<TimeWindow, CorpusError> {
        let end = end_inclusive + 1;
        TimeWindow::new(end - duration_ms, end)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledAccount {
    pub user_id: String,
    pub label: ClassLabel,
}

/// One account's slice of the three databases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Account {
    pub profile: AccountProfile,
    /// Sorted ascending by timestamp.
    pub tweets: Vec<TweetRecord>,
    /// Sorted ascending by snapshot_time.
    pub snapshots: Vec<FollowSnapshot>,
    pub label: Option<ClassLabel>,
}

/// Immutable in-memory corpus indexed by user id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub accounts: BTreeMap<String, Account>,
    /// Local-time offset applied when binning timestamps into hours/days.
    pub local_offset_ms: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CorpusError {
    InvalidWindow { start: i64, end: i64 },
    DuplicateUser(String),
    UnknownUser(String),
}

impl fmt::Display for CorpusError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CorpusError::InvalidWindow { start, end } => {
                write!(f, "invalid time window: start {start} must precede end {end}")
            }
            CorpusError::DuplicateUser(id) => write!(f, "duplicate user_id {id:?} in profiles"),
            CorpusError::UnknownUser(id) => write!(f, "record references unknown user {id:?}"),
        }
    }
}

impl Corpus {
    pub fn new(local_offset_ms: i64) -> Corpus {
        Corpus {
            accounts: BTreeMap::new(),
            local_offset_ms,
        }
    }

    pub fn insert_profile(&mut self, profile: AccountProfile) -> Result<(), CorpusError> {
        if self.accounts.contains_key(&profile.user_id) {
            return Err(CorpusError::DuplicateUser(profile.user_id));
        }
        self.accounts.insert(
            profile.user_id.clone(),
            Account {
                profile,
                tweets: Vec::new(),
                snapshots: Vec::new(),
                label: None,
            },
        );
        Ok(())
    }

    pub fn insert_tweet(&mut self, tweet: TweetRecord) -> Result<(), CorpusError> {
        let account = self
            .accounts
            .get_mut(&tweet.user_id)
            .ok_or_else(|| CorpusError::UnknownUser(tweet.user_id.clone()))?;
        account.tweets.push(tweet);
        Ok(())
    }

    pub fn insert_snapshot(&mut self, snap: FollowSnapshot) -> Result<(), CorpusError> {
        let account = self
            .accounts
            .get_mut(&snap.user_id)
            .ok_or_else(|| CorpusError::UnknownUser(snap.user_id.clone()))?;
        account.snapshots.push(snap);
        Ok(())
    }

    pub fn set_label(&mut self, labeled: LabeledAccount) -> Result<(), CorpusError> {
        let account = self
            .accounts
            .get_mut(&labeled.user_id)
            .ok_or(CorpusError::UnknownUser(labeled.user_id))?;
        account.label = Some(labeled.label);
        Ok(())
    }

    /// Sort tweets and snapshots ascending; call once after loading.
    pub fn normalize(&mut self) {
        for account in self.accounts.values_mut() {
            account
                .tweets
                .sort_by(|a, b| (a.timestamp, &a.tweet_id).cmp(&(b.timestamp, &b.tweet_id)));
            account.snapshots.sort_by_key(|s| s.snapshot_time);
        }
    }

    /// Latest tweet timestamp across the corpus, if any tweets exist.
    pub fn end_time(&self) -> Option<i64> {
        self.accounts
            .values()
            .filter_map(|a| a.tweets.last().map(|t| t.timestamp))
            .max()
    }

    /// Earliest tweet timestamp across the corpus.
    pub fn start_time(&self) -> Option<i64> {
        self.accounts
            .values()
            .filter_map(|a| a.tweets.first().map(|t| t.timestamp))
            .min()
    }

    /// Keep tweets and snapshots inside `window`; profiles are always kept.
    pub fn slice_window(&self, window: TimeWindow) -> Corpus {
        let accounts = self
            .accounts
            .iter()
            .map(|(id, account)| {
                let tweets = account
                    .tweets
                    .iter()
                    .filter(|t| window.contains(t.timestamp))
                    .cloned()
                    .collect();
                let snapshots = account
                    .snapshots
                    .iter()
                    .filter(|s| window.contains(s.snapshot_time))
                    .cloned()
                    .collect();
                (
                    id.clone(),
                    Account {
                        profile: account.profile.clone(),
                        tweets,
                        snapshots,
                        label: account.label,
                    },
                )
            })
            .collect();
        Corpus {
            accounts,
            local_offset_ms: self.local_offset_ms,
        }
    }

    /// Histogram of labels over labeled accounts, indexed by class order.
    pub fn label_histogram(&self) -> [usize; ClassLabel::COUNT] {
        let mut counts = [0usize; ClassLabel::COUNT];
        for account in self.accounts.values() {
            if let Some(label) = account.label {
                counts[label.index()] += 1;
            }
        }
        counts
    }

    /// Accounts that carry a label, in id order.
    pub fn labeled_accounts(&self) -> Vec<(&String, &Account, ClassLabel)> {
        self.accounts
            .iter()
            .filter_map(|(id, a)| a.label.map(|l| (id, a, l)))
            .collect()
    }
}
