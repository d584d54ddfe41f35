//! Seeded synthetic corpora with planted per-class behavioral signatures.
//!
//! Signatures are coarse categorical samplers: each class gets hour/weekday
//! activity weights, a client-source distribution, entity propensities, and
//! follow-graph size ranges. They are tuned for separability and for the
//! qualitative activity patterns the pipeline is expected to surface, not
//! for realism.

use std::collections::BTreeSet;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use botprof_core::mix_seed;
use botprof_core::types::{
    AccountProfile, ClassLabel, Corpus, FollowSnapshot, LabeledAccount, TweetRecord,
    DEFAULT_LOCAL_OFFSET_MS,
};

use crate::error::AppError;
use crate::io::save_corpus;

const MS_PER_HOUR: i64 = 3_600_000;
const MS_PER_DAY: i64 = 24 * MS_PER_HOUR;

/// Marker client source planted in most broadcast accounts and almost
/// nowhere else; gives weight inspection a known needle to find.
pub const PLANTED_SOURCE: &str = "feedcaster";

/// Per-class sampling parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassSignature {
    /// Relative activity per local hour of day.
    pub hour_weights: [f64; 24],
    /// Relative activity per weekday, monday first.
    pub weekday_weights: [f64; 7],
    /// Client source vocabulary with sampling weights.
    pub sources: Vec<(String, f64)>,
    /// Probability that an account plants [`PLANTED_SOURCE`] as its
    /// dominant client.
    pub plant_rate: f64,
    /// Vocabulary sizes controlling entity diversity.
    pub url_vocab: usize,
    pub hashtag_vocab: usize,
    pub word_vocab: usize,
    /// Per-tweet attachment/flag probabilities.
    pub retweet_prob: f64,
    pub mention_prob: f64,
    pub url_prob: f64,
    pub hashtag_prob: f64,
    pub media_prob: f64,
    /// Uniform range of expected tweets per day.
    pub tweets_per_day: (f64, f64),
    /// Uniform ranges for follow-set sizes.
    pub followees: (u64, u64),
    pub followers: (u64, u64),
    /// Fraction of the smaller follow set that is mutual.
    pub reciprocity: f64,
    /// Mean of the per-tweet reshare count (geometric).
    pub retweeted_rate: f64,
    /// Uniform range of account age in days at corpus start.
    pub account_age_days: (f64, f64),
    pub lang: String,
    pub time_zone: String,
}

impl ClassSignature {
    fn validate(&self) -> Result<(), AppError> {
        let ok = |w: &[f64]| w.iter().all(|&x| x >= 0.0) && w.iter().sum::<f64>() > 0.0;
        if !ok(&self.hour_weights) || !ok(&self.weekday_weights) {
            return Err(AppError::data(
                "signature weight vectors must be nonnegative with a positive sum",
            ));
        }
        if self.sources.is_empty() {
            return Err(AppError::data("signature needs at least one source"));
        }
        if self.tweets_per_day.0 <= 0.0 || self.tweets_per_day.1 < self.tweets_per_day.0 {
            return Err(AppError::data("tweets_per_day range must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub seed: u64,
    /// Accounts per class, indexed like [`ClassLabel::ALL`].
    pub per_class: [usize; 4],
    /// Corpus span in days; the default mirrors the four-month setting.
    pub span_days: u32,
    /// Corpus start, UTC ms. 2014-01-01 by default.
    pub start_ms: i64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            seed: 0,
            per_class: [100, 100, 100, 100],
            span_days: 120,
            start_ms: 1_388_534_400_000,
        }
    }
}

impl GeneratorConfig {
    /// Splits `total` accounts across classes in the reference dataset's
    /// proportions (broadcast/consumption/spam/human = 171/313/105/1024),
    /// using largest-remainder rounding.
    pub fn class_counts_for_total(total: usize) -> [usize; 4] {
        const REFERENCE: [f64; 4] = [171.0, 313.0, 105.0, 1024.0];
        let ref_total: f64 = REFERENCE.iter().sum();
        let exact: Vec<f64> = REFERENCE.iter().map(|c| c * total as f64 / ref_total).collect();
        let mut counts: [usize; 4] = [0; 4];
        let mut assigned = 0;
        for (i, e) in exact.iter().enumerate() {
            counts[i] = e.floor() as usize;
            assigned += counts[i];
        }
        // Hand out the leftovers by descending fractional part, ties to the
        // lower class index.
        let mut order: Vec<usize> = (0..4).collect();
        order.sort_by(|&a, &b| {
            let fa = exact[a] - exact[a].floor();
            let fb = exact[b] - exact[b].floor();
            fb.total_cmp(&fa).then(a.cmp(&b))
        });
        for &i in order.iter().take(total - assigned) {
            counts[i] += 1;
        }
        counts
    }
}

fn weights(pairs: &[(usize, usize, f64)]) -> [f64; 24] {
    let mut w = [0.0; 24];
    for &(lo, hi, v) in pairs {
        for slot in &mut w[lo..=hi] {
            *slot = v;
        }
    }
    w
}

/// Signatures encoding the qualitative findings: humans peak in the
/// evening, broadcast bots post from schedulers in a narrow daily band,
/// consumption bots fire in the early morning on weekdays, and spam bots
/// are active around the clock.
pub fn default_signatures() -> [ClassSignature; 4] {
    let broadcast = ClassSignature {
        hour_weights: weights(&[(0, 23, 0.02), (8, 13, 1.0)]),
        weekday_weights: [1.0, 1.0, 1.0, 1.0, 1.0, 0.9, 0.9],
        sources: vec![
            ("newswire".to_string(), 0.7),
            ("blogpush".to_string(), 0.3),
        ],
        plant_rate: 0.9,
        url_vocab: 400,
        hashtag_vocab: 40,
        word_vocab: 300,
        retweet_prob: 0.05,
        mention_prob: 0.02,
        url_prob: 0.9,
        hashtag_prob: 0.3,
        media_prob: 0.2,
        tweets_per_day: (1.5, 5.0),
        followees: (10, 100),
        followers: (2000, 8000),
        reciprocity: 0.02,
        retweeted_rate: 3.0,
        account_age_days: (400.0, 1600.0),
        lang: "en".to_string(),
        time_zone: "UTC".to_string(),
    };
    let consumption = ClassSignature {
        hour_weights: weights(&[(0, 23, 0.15), (3, 6, 3.0)]),
        weekday_weights: [1.0, 1.0, 1.0, 1.0, 1.0, 0.25, 0.25],
        sources: vec![
            ("digestbot".to_string(), 0.6),
            ("feedreader".to_string(), 0.4),
        ],
        plant_rate: 0.02,
        url_vocab: 60,
        hashtag_vocab: 20,
        word_vocab: 200,
        retweet_prob: 0.6,
        mention_prob: 0.05,
        url_prob: 0.5,
        hashtag_prob: 0.1,
        media_prob: 0.05,
        tweets_per_day: (2.0, 6.0),
        followees: (500, 2000),
        followers: (10, 100),
        reciprocity: 0.05,
        retweeted_rate: 0.1,
        account_age_days: (200.0, 1200.0),
        lang: "en".to_string(),
        time_zone: "Singapore".to_string(),
    };
    let spam = ClassSignature {
        hour_weights: [1.0; 24],
        weekday_weights: [1.0; 7],
        sources: vec![
            ("blastapi".to_string(), 0.8),
            ("webform".to_string(), 0.2),
        ],
        plant_rate: 0.02,
        url_vocab: 5,
        hashtag_vocab: 8,
        word_vocab: 80,
        retweet_prob: 0.1,
        mention_prob: 0.35,
        url_prob: 0.95,
        hashtag_prob: 0.5,
        media_prob: 0.05,
        tweets_per_day: (3.0, 8.0),
        followees: (1000, 3000),
        followers: (50, 300),
        reciprocity: 0.03,
        retweeted_rate: 0.05,
        account_age_days: (10.0, 300.0),
        lang: "en".to_string(),
        time_zone: "UTC".to_string(),
    };
    let human = ClassSignature {
        // Evening-peaked with a quiet stretch before dawn.
        hour_weights: weights(&[(0, 1, 0.8), (2, 6, 0.15), (7, 19, 1.0), (20, 23, 2.8)]),
        weekday_weights: [1.0, 1.0, 1.0, 1.0, 1.2, 1.5, 1.4],
        sources: vec![
            ("webclient".to_string(), 0.5),
            ("mobileapp".to_string(), 0.45),
            ("tabletapp".to_string(), 0.05),
        ],
        plant_rate: 0.02,
        url_vocab: 120,
        hashtag_vocab: 60,
        word_vocab: 800,
        retweet_prob: 0.3,
        mention_prob: 0.5,
        url_prob: 0.2,
        hashtag_prob: 0.25,
        media_prob: 0.15,
        tweets_per_day: (0.5, 3.0),
        followees: (100, 600),
        followers: (80, 600),
        reciprocity: 0.6,
        retweeted_rate: 0.5,
        account_age_days: (100.0, 1800.0),
        lang: "en".to_string(),
        time_zone: "Singapore".to_string(),
    };
    [broadcast, consumption, spam, human]
}

fn range_u64(rng: &mut ChaCha12Rng, (lo, hi): (u64, u64)) -> u64 {
    rng.random_range(lo..=hi)
}

fn range_f64(rng: &mut ChaCha12Rng, (lo, hi): (f64, f64)) -> f64 {
    rng.random_range(lo..=hi)
}

/// Geometric sample with the given mean (p = 1/(mean+1)).
fn geometric(rng: &mut ChaCha12Rng, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let p = 1.0 / (mean + 1.0);
    let u: f64 = rng.random();
    (u.ln() / (1.0 - p).ln()).floor() as u64
}

/// Zipf-ish draw from a vocabulary of `n` keys: key j proportional to
/// 1/(j+1).
fn vocab_key(rng: &mut ChaCha12Rng, prefix: &str, class: &str, n: usize) -> String {
    let u: f64 = rng.random();
    // Inverse-CDF over the truncated harmonic series, done linearly; vocab
    // sizes are small.
    let hn: f64 = (1..=n).map(|j| 1.0 / j as f64).sum();
    let mut acc = 0.0;
    for j in 1..=n {
        acc += 1.0 / (j as f64 * hn);
        if u <= acc {
            return format!("{class}_{prefix}{j}");
        }
    }
    format!("{class}_{prefix}{n}")
}

fn generate_account(
    corpus: &mut Corpus,
    user_id: &str,
    label: ClassLabel,
    sig: &ClassSignature,
    config: &GeneratorConfig,
    rng: &mut ChaCha12Rng,
) -> Result<(), AppError> {
    let class = label.as_str();
    let span_ms = config.span_days as i64 * MS_PER_DAY;
    let end_ms = config.start_ms + span_ms;

    // Profile.
    let age_days = range_f64(rng, sig.account_age_days);
    let profile = AccountProfile {
        user_id: user_id.to_string(),
        screen_name: format!("sn_{user_id}"),
        location: String::new(),
        description: format!("{class} synthetic account"),
        created_at: config.start_ms - (age_days * MS_PER_DAY as f64) as i64,
        is_geo_enabled: rng.random::<f64>() < 0.3,
        lang: sig.lang.clone(),
        time_zone: sig.time_zone.clone(),
        favourites_count: range_u64(rng, (0, 2000)),
        listed_count: range_u64(rng, (0, 50)),
        statuses_count: 0,
        utc_offset: DEFAULT_LOCAL_OFFSET_MS / 1000,
    };
    corpus.insert_profile(profile)?;

    // Per-account client-source distribution; planted accounts emit the
    // marker source for most tweets.
    let planted = rng.random::<f64>() < sig.plant_rate;
    let mut sources: Vec<(String, f64)> = sig.sources.clone();
    if planted {
        let rest: f64 = sources.iter().map(|(_, w)| w).sum();
        for entry in &mut sources {
            entry.1 *= 0.2 / rest;
        }
        sources.push((PLANTED_SOURCE.to_string(), 0.8));
    }
    let source_dist = WeightedIndex::new(sources.iter().map(|(_, w)| *w))
        .map_err(|e| AppError::internal(e.to_string()))?;

    // Weight each calendar day in the span by its weekday, then draw each
    // tweet's day and local hour independently.
    let day_weights: Vec<f64> = (0..config.span_days as i64)
        .map(|d| {
            let ts = config.start_ms + d * MS_PER_DAY;
            let wd = botprof_core::timeutil::weekday_index(ts, corpus.local_offset_ms)
                .expect("span within calendar range");
            sig.weekday_weights[wd]
        })
        .collect();
    let day_dist =
        WeightedIndex::new(&day_weights).map_err(|e| AppError::internal(e.to_string()))?;
    let hour_dist = WeightedIndex::new(sig.hour_weights.iter())
        .map_err(|e| AppError::internal(e.to_string()))?;

    let rate = range_f64(rng, sig.tweets_per_day);
    let n_tweets = ((rate * config.span_days as f64).round() as usize).max(1);
    let mut timestamps = BTreeSet::new();
    for t in 0..n_tweets {
        let day = day_dist.sample(rng) as i64;
        let hour = hour_dist.sample(rng) as i64;
        // The hour is drawn in local time; shift back to UTC.
        let mut ts = config.start_ms + day * MS_PER_DAY + hour * MS_PER_HOUR
            - corpus.local_offset_ms
            + rng.random_range(0..MS_PER_HOUR);
        ts = ts.clamp(config.start_ms, end_ms - 1);
        while !timestamps.insert(ts) {
            ts += 1;
        }

        let mut tweet = TweetRecord {
            tweet_id: format!("{user_id}_t{t:05}"),
            user_id: user_id.to_string(),
            timestamp: ts,
            words: Vec::new(),
            hashtags: Vec::new(),
            urls: Vec::new(),
            mentions: Vec::new(),
            media: Vec::new(),
            source: sources[source_dist.sample(rng)].0.clone(),
            is_retweet: rng.random::<f64>() < sig.retweet_prob,
            retweeted_count: geometric(rng, sig.retweeted_rate),
        };
        let n_words = rng.random_range(3..=8);
        for _ in 0..n_words {
            tweet.words.push(vocab_key(rng, "w", class, sig.word_vocab));
        }
        if rng.random::<f64>() < sig.url_prob {
            tweet.urls.push(vocab_key(rng, "url", class, sig.url_vocab));
        }
        if rng.random::<f64>() < sig.hashtag_prob {
            tweet
                .hashtags
                .push(vocab_key(rng, "tag", class, sig.hashtag_vocab));
        }
        if rng.random::<f64>() < sig.mention_prob {
            tweet.mentions.push(format!("ext{}", rng.random_range(0..5000)));
        }
        if rng.random::<f64>() < sig.media_prob {
            tweet.media.push(format!("m{}", rng.random_range(0..10000)));
        }
        corpus.insert_tweet(tweet)?;
    }

    // Two follow snapshots with slight growth between them.
    let followees = range_u64(rng, sig.followees) as usize;
    let followers = range_u64(rng, sig.followers) as usize;
    let mutual = (sig.reciprocity * followees.min(followers) as f64).round() as usize;
    for (k, frac) in [(0usize, 0.9f64), (1, 1.0)] {
        let at = config.start_ms + span_ms * (k as i64 + 1) / 3;
        let n_e = ((followees as f64) * frac).round() as usize;
        let n_f = ((followers as f64) * frac).round() as usize;
        let n_m = mutual.min(n_e).min(n_f);
        let mut snap = FollowSnapshot {
            user_id: user_id.to_string(),
            snapshot_time: at,
            followees: BTreeSet::new(),
            followers: BTreeSet::new(),
        };
        for j in 0..n_m {
            let id = format!("peer_m{j}");
            snap.followees.insert(id.clone());
            snap.followers.insert(id);
        }
        for j in 0..n_e.saturating_sub(n_m) {
            snap.followees.insert(format!("peer_e{j}"));
        }
        for j in 0..n_f.saturating_sub(n_m) {
            snap.followers.insert(format!("peer_f{j}"));
        }
        corpus.insert_snapshot(snap)?;
    }

    corpus.set_label(LabeledAccount {
        user_id: user_id.to_string(),
        label,
    })?;
    Ok(())
}

/// Builds the corpus in memory. Each account draws from its own seeded
/// substream, so the output is byte-stable under re-generation.
pub fn generate(
    config: &GeneratorConfig,
    signatures: &[ClassSignature; 4],
) -> Result<Corpus, AppError> {
    if config.per_class.iter().all(|&n| n == 0) {
        return Err(AppError::data("account counts must not all be zero"));
    }
    if config.span_days == 0 {
        return Err(AppError::data("corpus span must be positive"));
    }
    for sig in signatures {
        sig.validate()?;
    }
    let mut corpus = Corpus::new(DEFAULT_LOCAL_OFFSET_MS);
    let mut index = 0u64;
    for (ci, label) in ClassLabel::ALL.iter().enumerate() {
        for _ in 0..config.per_class[ci] {
            let user_id = format!("acct{index:06}");
            let mut rng = ChaCha12Rng::seed_from_u64(mix_seed(config.seed, 1 + index));
            generate_account(&mut corpus, &user_id, *label, &signatures[ci], config, &mut rng)?;
            index += 1;
        }
    }
    corpus.normalize();
    Ok(corpus)
}

/// Generates and writes the corpus files plus a manifest recording the
/// configuration.
pub fn generate_to_dir(
    config: &GeneratorConfig,
    signatures: &[ClassSignature; 4],
    dir: &Path,
) -> Result<Corpus, AppError> {
    let corpus = generate(config, signatures)?;
    save_corpus(&corpus, dir)?;
    fs::create_dir_all(dir)?;
    #[derive(Serialize)]
    struct Manifest<'a> {
        config: &'a GeneratorConfig,
        signatures: &'a [ClassSignature; 4],
    }
    let mut out = BufWriter::new(File::create(dir.join("manifest.json"))?);
    serde_json::to_writer_pretty(
        &mut out,
        &Manifest {
            config,
            signatures,
        },
    )?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(corpus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use botprof_core::stats::entropy;

    fn small_config(seed: u64) -> GeneratorConfig {
        GeneratorConfig {
            seed,
            per_class: [5, 5, 5, 5],
            span_days: 30,
            ..GeneratorConfig::default()
        }
    }

    #[test]
    fn same_seed_same_corpus() {
        let sigs = default_signatures();
        let a = generate(&small_config(9), &sigs).unwrap();
        let b = generate(&small_config(9), &sigs).unwrap();
        assert_eq!(a, b);
        let c = generate(&small_config(10), &sigs).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn class_counts_follow_reference_proportions() {
        let counts = GeneratorConfig::class_counts_for_total(1613);
        assert_eq!(counts, [171, 313, 105, 1024]);
        let counts = GeneratorConfig::class_counts_for_total(100);
        assert_eq!(counts.iter().sum::<usize>(), 100);
    }

    #[test]
    fn labels_match_configured_counts() {
        let corpus = generate(&small_config(3), &default_signatures()).unwrap();
        assert_eq!(corpus.label_histogram(), [5, 5, 5, 5]);
        assert_eq!(corpus.accounts.len(), 20);
    }

    #[test]
    fn spam_hours_approach_uniform_entropy() {
        // Long span so per-account histograms have enough mass.
        let config = GeneratorConfig {
            seed: 4,
            per_class: [0, 0, 8, 0],
            span_days: 120,
            ..GeneratorConfig::default()
        };
        let mut sigs = default_signatures();
        sigs[2].tweets_per_day = (6.0, 8.0);
        let corpus = generate(&config, &sigs).unwrap();
        for account in corpus.accounts.values() {
            assert!(account.tweets.len() >= 500);
            let mut hist = [0.0f64; 24];
            for t in &account.tweets {
                let h =
                    botprof_core::timeutil::local_hour(t.timestamp, corpus.local_offset_ms)
                        .unwrap();
                hist[h as usize] += 1.0;
            }
            let h = entropy(&hist);
            let target = (24.0f64).ln();
            assert!(
                (h - target).abs() / target < 0.05,
                "hour entropy {h} too far from ln 24"
            );
        }
    }

    #[test]
    fn signature_prose_properties_hold() {
        let [broadcast, consumption, _, human] = default_signatures();
        let mass = |w: &[f64], lo: usize, hi: usize| -> f64 { w[lo..=hi].iter().sum() };
        // Humans: evening beats early morning.
        assert!(
            mass(&human.hour_weights, 20, 23) > mass(&human.hour_weights, 2, 6)
        );
        // Consumption bots rest on weekends.
        let weekday: f64 = consumption.weekday_weights[..5].iter().sum();
        let weekend: f64 = consumption.weekday_weights[5..].iter().sum();
        assert!(weekday / 5.0 > weekend / 2.0);
        // Broadcast bots rarely mention.
        assert!(broadcast.mention_prob < human.mention_prob);
    }

    #[test]
    fn rejects_degenerate_configs() {
        let sigs = default_signatures();
        let mut config = small_config(0);
        config.per_class = [0, 0, 0, 0];
        assert!(generate(&config, &sigs).is_err());

        let mut bad = sigs.clone();
        bad[0].hour_weights = [0.0; 24];
        assert!(generate(&small_config(0), &bad).is_err());
    }

    #[test]
    fn generated_corpus_round_trips_through_files() {
        let dir = tempfile::tempdir().unwrap();
        let corpus = generate_to_dir(&small_config(1), &default_signatures(), dir.path()).unwrap();
        let reloaded = crate::io::load_corpus(
            &dir.path().join(crate::io::PROFILES_FILE),
            &dir.path().join(crate::io::TWEETS_FILE),
            Some(&dir.path().join(crate::io::FOLLOWS_FILE)),
            Some(&dir.path().join(crate::io::LABELS_FILE)),
        )
        .unwrap();
        assert_eq!(corpus, reloaded);
        assert!(dir.path().join("manifest.json").exists());
    }
}
