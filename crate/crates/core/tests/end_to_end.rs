//! Public-API integration test: hand-built corpus -> feature extraction ->
//! feature space -> all four classifier families -> fold evaluation ->
//! paired significance test. Uses only exported items.

use std::collections::BTreeSet;

use botprof_core::classify::{self, Family, HyperParams};
use botprof_core::eval::{self, ConfusionCounts};
use botprof_core::features::{extract_account, AccountFeatures};
use botprof_core::space::{fit_feature_space, FeatureSpaceConfig, Matrix};
use botprof_core::types::{
    Account, AccountProfile, ClassLabel, FollowSnapshot, TweetRecord,
};
use botprof_core::wilcoxon::wilcoxon_signed_rank;

const DAY_MS: i64 = 24 * 3_600_000;

/// An account that tweets on a fixed hour-of-day schedule. `machine`
/// accounts post at one single hour from one automation source; `organic`
/// accounts spread posts across the evening from two client sources.
fn build_account(index: usize, machine: bool) -> Account {
    let user_id = format!("{}{index:03}", if machine { "bot" } else { "person" });
    let start = 1_400_000_000_000i64;
    let mut tweets = Vec::new();
    for day in 0..30i64 {
        let hours: &[i64] = if machine { &[9] } else { &[18, 20, 22] };
        for (j, &h) in hours.iter().enumerate() {
            // Offset minutes per account so timestamps never collide.
            let ts = start + day * DAY_MS + h * 3_600_000 + (index as i64) * 60_000;
            tweets.push(TweetRecord {
                tweet_id: format!("{user_id}-{day}-{j}"),
                user_id: user_id.clone(),
                timestamp: ts,
                words: vec!["hello".into(), "world".into()],
                hashtags: if machine { vec!["promo".into()] } else { Vec::new() },
                urls: if machine { vec!["shop.example".into()] } else { Vec::new() },
                mentions: if machine || j != 0 { Vec::new() } else { vec!["friend".into()] },
                media: Vec::new(),
                source: if machine { "autoposter".into() } else { format!("client{}", j % 2) },
                is_retweet: !machine && j == 2,
                retweeted_count: if machine { 0 } else { 3 },
            });
        }
    }
    let peers: BTreeSet<String> = (0..if machine { 3 } else { 40 })
        .map(|i| format!("peer{i:03}"))
        .collect();
    let snapshots = vec![
        FollowSnapshot {
            user_id: user_id.clone(),
            snapshot_time: start,
            followees: peers.clone(),
            followers: peers.clone(),
        },
        FollowSnapshot {
            user_id: user_id.clone(),
            snapshot_time: start + 29 * DAY_MS,
            followees: peers.clone(),
            followers: peers,
        },
    ];
    Account {
        profile: AccountProfile {
            user_id: user_id.clone(),
            screen_name: user_id,
            location: String::new(),
            description: String::new(),
            created_at: start - 365 * DAY_MS,
            is_geo_enabled: !machine,
            lang: "en".into(),
            time_zone: if machine { "UTC".into() } else { "Pacific".into() },
            favourites_count: if machine { 0 } else { 500 },
            listed_count: 1,
            statuses_count: 90,
            utc_offset: 0,
        },
        tweets,
        snapshots,
        label: Some(if machine { ClassLabel::Broadcast } else { ClassLabel::Human }),
    }
}

#[test]
fn corpus_to_significance_pipeline() {
    // 12 machine-like and 24 organic accounts.
    let accounts: Vec<Account> = (0..36).map(|i| build_account(i, i % 3 == 0)).collect();
    let reference_time = 1_400_000_000_000i64 + 30 * DAY_MS;

    let features: Vec<AccountFeatures> = accounts
        .iter()
        .map(|a| extract_account(a, 0, reference_time).unwrap())
        .collect();
    let labels: Vec<usize> = accounts
        .iter()
        .map(|a| a.label.unwrap().index())
        .collect();

    // Machine accounts post at a single hour: zero entropy vs positive.
    for (f, a) in features.iter().zip(&accounts) {
        let entropy = f["dynamic.tweet.hour_entropy"].as_num().unwrap();
        if a.label == Some(ClassLabel::Broadcast) {
            assert_eq!(entropy, 0.0);
        } else {
            assert!(entropy > 1.0);
        }
    }

    let folds = eval::stratified_kfold(&labels, 3, 11).unwrap();
    let params = HyperParams::default();
    let mut fold_f1: Vec<Vec<f64>> = vec![Vec::new(); Family::ALL.len()];

    for fold in 0..3 {
        let train_idx: Vec<usize> = (0..labels.len()).filter(|&i| folds[i] != fold).collect();
        let test_idx: Vec<usize> = (0..labels.len()).filter(|&i| folds[i] == fold).collect();
        assert!(!test_idx.is_empty());

        // Fit the space on training rows only.
        let train_feats: Vec<&AccountFeatures> = train_idx.iter().map(|&i| &features[i]).collect();
        let space = fit_feature_space(&train_feats, FeatureSpaceConfig::default()).unwrap();
        let encode = |idx: &[usize]| -> Matrix {
            let rows: Vec<Vec<f64>> = idx.iter().map(|&i| space.encode(&features[i])).collect();
            Matrix::from_rows(rows, space.width())
        };
        let x_train = encode(&train_idx);
        let x_test = encode(&test_idx);
        let y_train: Vec<usize> = train_idx.iter().map(|&i| labels[i]).collect();
        let y_test: Vec<usize> = test_idx.iter().map(|&i| labels[i]).collect();

        for (fi, family) in Family::ALL.into_iter().enumerate() {
            let model = classify::fit(family, &x_train, &y_train, &params, 4).unwrap();
            let predicted = classify::predict(&model, &x_test).unwrap();
            let confusion = ConfusionCounts::from_predictions(&predicted, &y_test, 4).unwrap();
            let report = eval::prf(&confusion);
            // The two planted classes are trivially separable.
            assert_eq!(report.f1[ClassLabel::Broadcast.index()], 1.0, "{family:?}");
            assert_eq!(report.f1[ClassLabel::Human.index()], 1.0, "{family:?}");
            fold_f1[fi].push(report.macro_f1());
        }
    }

    // Identical per-fold scores give a degenerate paired test (p = 1).
    let result = wilcoxon_signed_rank(&fold_f1[0], &fold_f1[1]).unwrap();
    assert!(result.degenerate);
    assert_eq!(result.p_value, 1.0);
    assert!(!result.significant);
}
