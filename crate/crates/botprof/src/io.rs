//! Line-delimited corpus files, feature dumps, versioned model files, and
//! comma-separated report tables.
//!
//! Corpus files hold one JSON object per line (`profiles.jsonl`,
//! `tweets.jsonl`, `follows.jsonl`, `labels.jsonl`); unknown fields are
//! ignored and missing optional fields take their documented defaults.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use botprof_core::classify::{Family, HyperParams, TrainedModel};
use botprof_core::features::AccountFeatures;
use botprof_core::space::FeatureSpace;
use botprof_core::types::{
    AccountProfile, Corpus, FollowSnapshot, LabeledAccount, TweetRecord, DEFAULT_LOCAL_OFFSET_MS,
};

use crate::error::AppError;

pub const PROFILES_FILE: &str = "profiles.jsonl";
pub const TWEETS_FILE: &str = "tweets.jsonl";
pub const FOLLOWS_FILE: &str = "follows.jsonl";
pub const LABELS_FILE: &str = "labels.jsonl";

/// Parses one JSONL file, handing each record to `insert` with its line
/// number. Errors carry the file path and 1-based line number.
fn load_lines<T, F>(path: &Path, mut insert: F) -> Result<(), AppError>
where
    T: DeserializeOwned,
    F: FnMut(T) -> Result<(), String>,
{
    let file = File::open(path)
        .map_err(|e| AppError::Data(format!("{}: {e}", path.display())))?;
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| AppError::Data(format!("{}: {e}", path.display())))?;
        if line.trim().is_empty() {
            continue;
        }
        let at = |message: String| AppError::DataAt {
            path: PathBuf::from(path),
            line: idx + 1,
            message,
        };
        let record: T = serde_json::from_str(&line).map_err(|e| at(e.to_string()))?;
        insert(record).map_err(at)?;
    }
    Ok(())
}

/// Loads a corpus from its three record files plus an optional labels file.
pub fn load_corpus(
    profiles: &Path,
    tweets: &Path,
    follows: Option<&Path>,
    labels: Option<&Path>,
) -> Result<Corpus, AppError> {
    let mut corpus = Corpus::new(DEFAULT_LOCAL_OFFSET_MS);
    load_lines(profiles, |p: AccountProfile| {
        corpus.insert_profile(p).map_err(|e| e.to_string())
    })?;
    load_lines(tweets, |t: TweetRecord| {
        corpus.insert_tweet(t).map_err(|e| e.to_string())
    })?;
    if let Some(follows) = follows {
        load_lines(follows, |s: FollowSnapshot| {
            corpus.insert_snapshot(s).map_err(|e| e.to_string())
        })?;
    }
    if let Some(labels) = labels {
        load_lines(labels, |l: LabeledAccount| {
            corpus.set_label(l).map_err(|e| e.to_string())
        })?;
    }
    corpus.normalize();
    Ok(corpus)
}

fn write_jsonl<T: Serialize>(path: &Path, records: impl Iterator<Item = T>) -> Result<(), AppError> {
    let mut out = BufWriter::new(File::create(path)?);
    for record in records {
        serde_json::to_writer(&mut out, &record)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Writes the four corpus files into `dir`. Iteration order over the
/// account map makes the output deterministic.
pub fn save_corpus(corpus: &Corpus, dir: &Path) -> Result<(), AppError> {
    fs::create_dir_all(dir)?;
    write_jsonl(
        &dir.join(PROFILES_FILE),
        corpus.accounts.values().map(|a| &a.profile),
    )?;
    write_jsonl(
        &dir.join(TWEETS_FILE),
        corpus.accounts.values().flat_map(|a| a.tweets.iter()),
    )?;
    write_jsonl(
        &dir.join(FOLLOWS_FILE),
        corpus.accounts.values().flat_map(|a| a.snapshots.iter()),
    )?;
    write_jsonl(
        &dir.join(LABELS_FILE),
        corpus.accounts.iter().filter_map(|(id, a)| {
            a.label.map(|label| LabeledAccount {
                user_id: id.clone(),
                label,
            })
        }),
    )?;
    Ok(())
}

/// One line per account: `{"user_id": ..., "features": {...}}`.
pub fn write_features(
    path: &Path,
    features: &BTreeMap<String, AccountFeatures>,
) -> Result<(), AppError> {
    #[derive(Serialize)]
    struct Row<'a> {
        user_id: &'a str,
        features: &'a AccountFeatures,
    }
    write_jsonl(
        path,
        features.iter().map(|(id, f)| Row {
            user_id: id,
            features: f,
        }),
    )
}

pub fn read_features(path: &Path) -> Result<BTreeMap<String, AccountFeatures>, AppError> {
    #[derive(Deserialize)]
    struct Row {
        user_id: String,
        features: AccountFeatures,
    }
    let mut out = BTreeMap::new();
    load_lines(path, |row: Row| {
        if out.insert(row.user_id.clone(), row.features).is_some() {
            return Err(format!("duplicate user_id {}", row.user_id));
        }
        Ok(())
    })?;
    Ok(out)
}

/// FNV-1a over a byte string; used to tie a model file to its feature space.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

pub fn space_checksum(space: &FeatureSpace) -> Result<u64, AppError> {
    Ok(fnv1a(serde_json::to_string(space)?.as_bytes()))
}

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Versioned model file: header (family, params, feature-space checksum)
/// plus the feature space and parameter body.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    pub family: Family,
    pub params: HyperParams,
    pub space_checksum: u64,
    pub space: FeatureSpace,
    pub model: TrainedModel,
}

impl ModelFile {
    pub fn new(
        params: HyperParams,
        space: FeatureSpace,
        model: TrainedModel,
    ) -> Result<ModelFile, AppError> {
        Ok(ModelFile {
            format_version: MODEL_FORMAT_VERSION,
            family: model.family(),
            params,
            space_checksum: space_checksum(&space)?,
            space,
            model,
        })
    }
}

pub fn save_model(path: &Path, model: &ModelFile) -> Result<(), AppError> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, model)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<ModelFile, AppError> {
    let file = ModelFile::deserialize(&mut serde_json::Deserializer::from_reader(BufReader::new(
        File::open(path).map_err(|e| AppError::Data(format!("{}: {e}", path.display())))?,
    )))?;
    if file.format_version != MODEL_FORMAT_VERSION {
        return Err(AppError::data(format!(
            "unsupported model format version {}",
            file.format_version
        )));
    }
    let expected = space_checksum(&file.space)?;
    if file.space_checksum != expected {
        return Err(AppError::data("model file checksum mismatch"));
    }
    Ok(file)
}

/// Writes a comma-separated table. Cells are quoted only when needed.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), AppError> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        let cells: Vec<String> = row.iter().map(|c| csv_cell(c)).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    out.flush()?;
    Ok(())
}

fn csv_cell(raw: &str) -> String {
    if raw.contains([',', '"', '\n']) {
        format!("\"{}\"", raw.replace('"', "\"\""))
    } else {
        raw.to_string()
    }
}

/// Fixed-precision formatting used by all report tables.
pub fn fmt4(v: f64) -> String {
    format!("{v:.4}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use botprof_core::types::ClassLabel;

    fn write_file(dir: &Path, name: &str, contents: &str) -> PathBuf {
        let path = dir.join(name);
        let mut f = File::create(&path).unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        path
    }

    #[test]
    fn loads_minimal_corpus() {
        let dir = tempfile::tempdir().unwrap();
        let profiles = write_file(
            dir.path(),
            "p.jsonl",
            "{\"user_id\":\"u1\"}\n{\"user_id\":\"u2\"}\n{\"user_id\":\"u3\"}\n",
        );
        let tweets = write_file(dir.path(), "t.jsonl", "");
        let corpus = load_corpus(&profiles, &tweets, None, None).unwrap();
        assert_eq!(corpus.accounts.len(), 3);
        assert!(corpus.accounts["u1"].tweets.is_empty());
    }

    #[test]
    fn malformed_line_reports_location() {
        let dir = tempfile::tempdir().unwrap();
        let profiles = write_file(
            dir.path(),
            "p.jsonl",
            "{\"user_id\":\"u1\"}\nnot json\n",
        );
        let tweets = write_file(dir.path(), "t.jsonl", "");
        let err = load_corpus(&profiles, &tweets, None, None).unwrap_err();
        match err {
            AppError::DataAt { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn duplicate_profile_and_unknown_label_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let dup = write_file(
            dir.path(),
            "dup.jsonl",
            "{\"user_id\":\"u1\"}\n{\"user_id\":\"u1\"}\n",
        );
        let tweets = write_file(dir.path(), "t.jsonl", "");
        assert!(load_corpus(&dup, &tweets, None, None).is_err());

        let profiles = write_file(dir.path(), "p.jsonl", "{\"user_id\":\"u1\"}\n");
        let labels = write_file(
            dir.path(),
            "l.jsonl",
            "{\"user_id\":\"nope\",\"label\":\"spam\"}\n",
        );
        let err = load_corpus(&profiles, &tweets, None, Some(&labels)).unwrap_err();
        assert!(matches!(err, AppError::DataAt { line: 1, .. }));
    }

    #[test]
    fn corpus_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let profiles = write_file(
            dir.path(),
            "p.jsonl",
            "{\"user_id\":\"u1\",\"lang\":\"en\",\"created_at\":100}\n{\"user_id\":\"u2\"}\n",
        );
        let tweets = write_file(
            dir.path(),
            "t.jsonl",
            concat!(
                "{\"tweet_id\":\"t2\",\"user_id\":\"u1\",\"timestamp\":2000,\"source\":\"web\"}\n",
                "{\"tweet_id\":\"t1\",\"user_id\":\"u1\",\"timestamp\":1000,\"hashtags\":[\"x\"]}\n",
            ),
        );
        let follows = write_file(
            dir.path(),
            "f.jsonl",
            "{\"user_id\":\"u2\",\"snapshot_time\":500,\"followees\":[\"u1\"],\"followers\":[]}\n",
        );
        let labels = write_file(
            dir.path(),
            "l.jsonl",
            "{\"user_id\":\"u1\",\"label\":\"human\"}\n",
        );
        let corpus = load_corpus(&profiles, &tweets, Some(&follows), Some(&labels)).unwrap();
        // Out-of-order tweets come back sorted.
        assert_eq!(corpus.accounts["u1"].tweets[0].tweet_id, "t1");

        let out = dir.path().join("copy");
        save_corpus(&corpus, &out).unwrap();
        let reloaded = load_corpus(
            &out.join(PROFILES_FILE),
            &out.join(TWEETS_FILE),
            Some(&out.join(FOLLOWS_FILE)),
            Some(&out.join(LABELS_FILE)),
        )
        .unwrap();
        assert_eq!(corpus, reloaded);
        assert_eq!(reloaded.accounts["u1"].label, Some(ClassLabel::Human));
    }

    #[test]
    fn model_file_round_trips_and_checks_version() {
        use botprof_core::classify::{fit, Family};
        use botprof_core::space::Matrix;

        let x = Matrix::from_rows(
            vec![
                vec![1.0, 0.0],
                vec![0.9, 0.1],
                vec![0.0, 1.0],
                vec![0.1, 0.9],
            ],
            2,
        );
        let y = vec![0, 0, 1, 1];
        let model = fit(Family::Nb, &x, &y, &HyperParams::default(), 2).unwrap();
        let space = FeatureSpace {
            config: Default::default(),
            dims: vec![],
            bounds: BTreeMap::new(),
            vocabularies: BTreeMap::new(),
            bins: BTreeMap::new(),
        };
        let file = ModelFile::new(HyperParams::default(), space, model).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        save_model(&path, &file).unwrap();
        let loaded = load_model(&path).unwrap();
        assert_eq!(loaded.family, Family::Nb);
        assert_eq!(loaded.space_checksum, file.space_checksum);

        let mut bad = file.clone();
        bad.format_version = 99;
        save_model(&path, &bad).unwrap();
        assert!(load_model(&path).is_err());
    }

    #[test]
    fn csv_quotes_special_cells() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_csv(
            &path,
            &["a", "b"],
            &[vec!["x,y".to_string(), "plain".to_string()]],
        )
        .unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text, "a,b\n\"x,y\",plain\n");
    }
}
