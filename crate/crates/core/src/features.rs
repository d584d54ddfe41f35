//! Per-account raw feature extraction: static tweet, dynamic tweet, follow,
//! and profile features.
//!
//! Every extraction emits the complete fixed feature dictionary, with zero
//! sentinels for empty entity families, so accounts always share the same
//! feature names. Names follow `<group>.<entity>.<metric>`, e.g.
//! `dynamic.url.hour_entropy` or `follow.popularity.mean`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::stats::{basic_stats, BasicStats, StatsError};
use crate::timeutil::{time_dimension, timegaps, TimeDimension, TimeError};
use crate::types::{Account, AccountProfile, FollowSnapshot, TweetRecord};

pub const MS_PER_DAY: f64 = 86_400_000.0;

/// A raw feature value: numeric, categorical, or a series of bin counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FeatureValue {
    Num(f64),
    Cat(String),
    Series(BTreeMap<String, u64>),
}

impl FeatureValue {
    pub fn as_num(&self) -> Option<f64> {
        match self {
            FeatureValue::Num(v) => Some(*v),
            _ => None,
        }
    }
}

/// Named raw features for one account.
pub type AccountFeatures = BTreeMap<String, FeatureValue>;

/// Bag of entity occurrences: key -> occurrence count.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EntityBag {
    entries: BTreeMap<String, u64>,
}

impl EntityBag {
    pub fn from_keys<'a, I: IntoIterator<Item = &'a str>>(keys: I) -> EntityBag {
        let mut entries = BTreeMap::new();
        for key in keys {
            *entries.entry(key.to_string()).or_insert(0) += 1;
        }
        EntityBag { entries }
    }

    /// Total occurrences.
    pub fn total(&self) -> u64 {
        self.entries.values().sum()
    }

    /// Distinct keys.
    pub fn unique(&self) -> u64 {
        self.entries.len() as u64
    }

    pub fn counts(&self) -> Vec<f64> {
        self.entries.values().map(|&c| c as f64).collect()
    }

    pub fn into_series(self) -> BTreeMap<String, u64> {
        self.entries
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FeatureError {
    Stats(StatsError),
    Time(TimeError),
    ReferenceBeforeCreation { created_at: i64, reference: i64 },
}

impl fmt::Display for FeatureError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureError::Stats(e) => write!(f, "stats error: {e}"),
            FeatureError::Time(e) => write!(f, "time error: {e}"),
            FeatureError::ReferenceBeforeCreation { created_at, reference } => write!(
                f,
                "reference time {reference} precedes account creation {created_at}"
            ),
        }
    }
}

impl From<StatsError> for FeatureError {
    fn from(e: StatsError) -> Self {
        FeatureError::Stats(e)
    }
}

impl From<TimeError> for FeatureError {
    fn from(e: TimeError) -> Self {
        FeatureError::Time(e)
    }
}

/// Entity families carrying a static bag representation.
const STATIC_FAMILIES: [&str; 6] = ["tweet_word", "retweet", "hashtag", "mention", "url", "media"];

/// Entity families carrying timestamped events for dynamic features.
const DYNAMIC_FAMILIES: [&str; 6] = ["tweet", "retweet", "hashtag", "mention", "url", "media"];

/// The eight per-snapshot follow metrics.
pub const FOLLOW_METRICS: [&str; 8] = [
    "followees_count",
    "followers_count",
    "mutual_count",
    "reciprocity",
    "in_reciprocity",
    "out_reciprocity",
    "popularity",
    "follow_ratio",
];

fn put_num(out: &mut AccountFeatures, name: String, value: f64) {
    out.insert(name, FeatureValue::Num(value));
}

fn put_stats(out: &mut AccountFeatures, prefix: &str, stats: &BasicStats) {
    for name in BasicStats::NAMES {
        put_num(out, format!("{prefix}{name}"), stats.get(name).unwrap());
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

fn static_bag(tweets: &[TweetRecord], family: &str) -> EntityBag {
    match family {
        "tweet_word" => EntityBag::from_keys(tweets.iter().flat_map(|t| t.words.iter().map(String::as_str))),
        // Retweet events have no shared key; each retweet is its own bag entry.
        "retweet" => EntityBag::from_keys(
            tweets
                .iter()
                .filter(|t| t.is_retweet)
                .map(|t| t.tweet_id.as_str()),
        ),
        "hashtag" => EntityBag::from_keys(tweets.iter().flat_map(|t| t.hashtags.iter().map(String::as_str))),
        "mention" => EntityBag::from_keys(tweets.iter().flat_map(|t| t.mentions.iter().map(String::as_str))),
        "url" => EntityBag::from_keys(tweets.iter().flat_map(|t| t.urls.iter().map(String::as_str))),
        "media" => EntityBag::from_keys(tweets.iter().flat_map(|t| t.media.iter().map(String::as_str))),
        _ => unreachable!(),
    }
}

fn event_timestamps(tweets: &[TweetRecord], family: &str) -> Vec<i64> {
    let mut out = Vec::new();
    for t in tweets {
        let repeats = match family {
            "tweet" => 1,
            "retweet" => usize::from(t.is_retweet),
            "hashtag" => t.hashtags.len(),
            "mention" => t.mentions.len(),
            "url" => t.urls.len(),
            "media" => t.media.len(),
            _ => unreachable!(),
        };
        for _ in 0..repeats {
            out.push(t.timestamp);
        }
    }
    out
}

/// Static tweet features: per-family bag statistics, ratios, the retweet
/// readership pair, and the source series. Tweets must belong to one user
/// with the window already applied.
pub fn static_tweet_features(tweets: &[TweetRecord]) -> Result<AccountFeatures, FeatureError> {
    let mut out = AccountFeatures::new();
    let total_tweets = tweets.len() as f64;

    for family in STATIC_FAMILIES {
        let bag = static_bag(tweets, family);
        let prefix = format!("static.{family}.");
        let count = bag.total() as f64;
        let unique = bag.unique() as f64;
        put_num(&mut out, format!("{prefix}count"), count);
        put_num(&mut out, format!("{prefix}unique_count"), unique);
        if family != "tweet_word" {
            put_num(&mut out, format!("{prefix}ratio"), ratio(count, total_tweets));
        }
        put_num(&mut out, format!("{prefix}unique_ratio"), ratio(unique, total_tweets));
        let stats = basic_stats(&bag.counts())?;
        put_stats(&mut out, &prefix, &stats);
    }

    let retweeted: u64 = tweets.iter().map(|t| t.retweeted_count).sum();
    put_num(&mut out, "static.retweet.retweeted".to_string(), retweeted as f64);
    put_num(
        &mut out,
        "static.retweet.readership".to_string(),
        ratio(retweeted as f64, total_tweets),
    );

    let sources = EntityBag::from_keys(
        tweets
            .iter()
            .filter(|t| !t.source.is_empty())
            .map(|t| t.source.as_str()),
    );
    out.insert(
        "static.source.sources".to_string(),
        FeatureValue::Series(sources.into_series()),
    );

    Ok(out)
}

/// Dynamic tweet features: per-family time histograms over four dimensions
/// plus the 5 x 6 extended stats (timegap list and histogram occupancy
/// vectors, each summarized by the six basic statistics).
pub fn dynamic_tweet_features(
    tweets: &[TweetRecord],
    local_offset_ms: i64,
) -> Result<AccountFeatures, FeatureError> {
    let mut out = AccountFeatures::new();

    for family in DYNAMIC_FAMILIES {
        let events = event_timestamps(tweets, family);
        let prefix = format!("dynamic.{family}.");

        let gaps: Vec<f64> = timegaps(&events)?.iter().map(|&g| g as f64).collect();
        put_stats(&mut out, &format!("{prefix}timegap_"), &basic_stats(&gaps)?);

        for dim in TimeDimension::ALL {
            let mut hist: BTreeMap<String, u64> = BTreeMap::new();
            for &ts in &events {
                let key = time_dimension(ts, dim, local_offset_ms)?;
                *hist.entry(key).or_insert(0) += 1;
            }
            let occupancy: Vec<f64> = hist.values().map(|&c| c as f64).collect();
            put_stats(
                &mut out,
                &format!("{prefix}{}_", dim.singular()),
                &basic_stats(&occupancy)?,
            );
            out.insert(format!("{prefix}{}", dim.plural()), FeatureValue::Series(hist));
        }
    }

    Ok(out)
}

/// Per-snapshot follow metrics summarized across snapshots. Any ratio with
/// a zero denominator yields 0.
pub fn follow_features(snapshots: &[FollowSnapshot]) -> Result<AccountFeatures, FeatureError> {
    let mut series: BTreeMap<&str, Vec<f64>> = FOLLOW_METRICS.iter().map(|&m| (m, Vec::new())).collect();

    for snap in snapshots {
        let e = snap.followees.len() as f64;
        let f = snap.followers.len() as f64;
        let mutual = snap.followees.intersection(&snap.followers).count() as f64;
        let union = e + f - mutual;
        let metrics = [
            ("followees_count", e),
            ("followers_count", f),
            ("mutual_count", mutual),
            ("reciprocity", ratio(mutual, union)),
            ("in_reciprocity", ratio(mutual, f)),
            ("out_reciprocity", ratio(mutual, e)),
            ("popularity", ratio(f, e + f)),
            ("follow_ratio", ratio(e, f)),
        ];
        for (name, value) in metrics {
            series.get_mut(name).unwrap().push(value);
        }
    }

    let mut out = AccountFeatures::new();
    for metric in FOLLOW_METRICS {
        let stats = basic_stats(&series[metric])?;
        put_stats(&mut out, &format!("follow.{metric}."), &stats);
    }
    Ok(out)
}

/// Profile features relative to `reference_time` (UTC ms).
pub fn profile_features(
    profile: &AccountProfile,
    reference_time: i64,
) -> Result<AccountFeatures, FeatureError> {
    if reference_time < profile.created_at {
        return Err(FeatureError::ReferenceBeforeCreation {
            created_at: profile.created_at,
            reference: reference_time,
        });
    }
    let mut out = AccountFeatures::new();
    put_num(
        &mut out,
        "profile.account.account_age".to_string(),
        (reference_time - profile.created_at) as f64 / MS_PER_DAY,
    );
    put_num(
        &mut out,
        "profile.account.favourites_count".to_string(),
        profile.favourites_count as f64,
    );
    put_num(
        &mut out,
        "profile.account.listed_count".to_string(),
        profile.listed_count as f64,
    );
    put_num(
        &mut out,
        "profile.account.statuses_count".to_string(),
        profile.statuses_count as f64,
    );
    put_num(
        &mut out,
        "profile.account.utc_offset".to_string(),
        profile.utc_offset as f64,
    );
    out.insert(
        "profile.account.is_geo_enabled".to_string(),
        FeatureValue::Cat(if profile.is_geo_enabled { "true" } else { "false" }.to_string()),
    );
    out.insert(
        "profile.account.lang".to_string(),
        FeatureValue::Cat(profile.lang.clone()),
    );
    out.insert(
        "profile.account.time_zone".to_string(),
        FeatureValue::Cat(profile.time_zone.clone()),
    );
    Ok(out)
}

/// All feature groups for one account.
pub fn extract_account(
    account: &Account,
    local_offset_ms: i64,
    reference_time: i64,
) -> Result<AccountFeatures, FeatureError> {
    let mut out = static_tweet_features(&account.tweets)?;
    out.append(&mut dynamic_tweet_features(&account.tweets, local_offset_ms)?);
    out.append(&mut follow_features(&account.snapshots)?);
    out.append(&mut profile_features(&account.profile, reference_time)?);
    Ok(out)
}
