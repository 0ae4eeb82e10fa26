//! Review queue and feedback log, persisted as append-only JSONL files.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const QUEUE_FILE: &str = "queue.jsonl";
pub const FEEDBACK_FILE: &str = "feedback.jsonl";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("no review item with id {0:?}")]
    NotFound(String),
    #[error("review item {0:?} has already been judged")]
    AlreadyJudged(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path} line {line}: {message}")]
    Corrupt { path: PathBuf, line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReviewStatus {
    Pending,
    ConfirmedNegative,
    RejectedNegative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Negative,
    Other,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReviewItem {
    pub tweet_id: String,
    pub text: String,
    pub negative_score: f64,
    pub predicted_label: String,
    pub status: ReviewStatus,
    /// Seconds since the Unix epoch.
    #[serde(default)]
    pub verdict_time: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackEntry {
    pub tweet_id: String,
    pub text: String,
    pub verdict: Verdict,
    pub time: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub pending: usize,
    pub confirmed: usize,
    pub rejected: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flag_precision_estimate: Option<f64>,
}

/// Flagged messages and the verdicts given on them.
#[derive(Debug)]
pub struct ReviewStore {
    dir: PathBuf,
    items: BTreeMap<String, ReviewItem>,
    feedback: Vec<FeedbackEntry>,
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

fn read_lines<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, StoreError> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(source) => return Err(StoreError::Io { path: path.into(), source }),
    };
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| StoreError::Io { path: path.into(), source })?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| StoreError::Corrupt {
            path: path.into(),
            line: idx + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

fn append_lines<T: Serialize>(path: &Path, values: &[T]) -> Result<(), StoreError> {
    if values.is_empty() {
        return Ok(());
    }
    let io = |source| StoreError::Io { path: path.into(), source };
    let mut buf = String::new();
    for v in values {
        buf.push_str(&serde_json::to_string(v).expect("store records serialize"));
        buf.push('\n');
    }
    let mut file = OpenOptions::new().create(true).append(true).open(path).map_err(io)?;
    file.write_all(buf.as_bytes()).map_err(io)?;
    file.sync_data().map_err(io)
}

impl ReviewStore {
    /// Open `dir`, replaying any existing queue and feedback logs.
    pub fn open(dir: &Path) -> Result<Self, StoreError> {
        fs::create_dir_all(dir).map_err(|source| StoreError::Io { path: dir.into(), source })?;
        let mut store = ReviewStore {
            dir: dir.to_path_buf(),
            items: BTreeMap::new(),
            feedback: Vec::new(),
        };
        for item in read_lines::<ReviewItem>(&dir.join(QUEUE_FILE))? {
            store.items.entry(item.tweet_id.clone()).or_insert(item);
        }
        let feedback_path = dir.join(FEEDBACK_FILE);
        for (idx, entry) in read_lines::<FeedbackEntry>(&feedback_path)?.into_iter().enumerate() {
            store.apply(&entry).map_err(|e| StoreError::Corrupt {
                path: feedback_path.clone(),
                line: idx + 1,
                message: e.to_string(),
            })?;
            store.feedback.push(entry);
        }
        Ok(store)
    }

    fn apply(&mut self, entry: &FeedbackEntry) -> Result<ReviewItem, StoreError> {
        let item = self
            .items
            .get_mut(&entry.tweet_id)
            .ok_or_else(|| StoreError::NotFound(entry.tweet_id.clone()))?;
        if item.status != ReviewStatus::Pending {
            return Err(StoreError::AlreadyJudged(entry.tweet_id.clone()));
        }
        item.status = match entry.verdict {
            Verdict::Negative => ReviewStatus::ConfirmedNegative,
            Verdict::Other => ReviewStatus::RejectedNegative,
        };
        item.verdict_time = Some(entry.time);
        Ok(item.clone())
    }

    /// Queue new flagged items; ids already known are skipped. Returns how many were added.
    pub fn enqueue(&mut self, items: Vec<ReviewItem>) -> Result<usize, StoreError> {
        let mut fresh: Vec<ReviewItem> = Vec::new();
        for item in items {
            if !self.items.contains_key(&item.tweet_id) && !fresh.iter().any(|f| f.tweet_id == item.tweet_id) {
                fresh.push(ReviewItem {
                    status: ReviewStatus::Pending,
                    verdict_time: None,
                    ..item
                });
            }
        }
        append_lines(&self.dir.join(QUEUE_FILE), &fresh)?;
        let added = fresh.len();
        for item in fresh {
            self.items.insert(item.tweet_id.clone(), item);
        }
        Ok(added)
    }

    /// Pending items by descending score, then ascending id.
    pub fn pending(&self, limit: Option<usize>) -> Vec<ReviewItem> {
        let mut items: Vec<&ReviewItem> = self.items.values().filter(|i| i.status == ReviewStatus::Pending).collect();
        items.sort_by(|a, b| {
            b.negative_score
                .total_cmp(&a.negative_score)
                .then_with(|| a.tweet_id.cmp(&b.tweet_id))
        });
        items.into_iter().take(limit.unwrap_or(usize::MAX)).cloned().collect()
    }

    pub fn get(&self, tweet_id: &str) -> Option<&ReviewItem> {
        self.items.get(tweet_id)
    }

    /// Record a verdict on a pending item and log it.
    pub fn judge(&mut self, tweet_id: &str, verdict: Verdict) -> Result<ReviewItem, StoreError> {
        let item = self.items.get(tweet_id).ok_or_else(|| StoreError::NotFound(tweet_id.into()))?;
        if item.status != ReviewStatus::Pending {
            return Err(StoreError::AlreadyJudged(tweet_id.into()));
        }
        let entry = FeedbackEntry {
            tweet_id: tweet_id.into(),
            text: item.text.clone(),
            verdict,
            time: now(),
        };
        append_lines(&self.dir.join(FEEDBACK_FILE), std::slice::from_ref(&entry))?;
        let updated = self.apply(&entry)?;
        self.feedback.push(entry);
        Ok(updated)
    }

    pub fn feedback(&self) -> &[FeedbackEntry] {
        &self.feedback
    }

    pub fn items(&self) -> impl Iterator<Item = &ReviewItem> {
        self.items.values()
    }

    pub fn stats(&self) -> Stats {
        let count = |s| self.items.values().filter(|i| i.status == s).count();
        let confirmed = count(ReviewStatus::ConfirmedNegative);
        let rejected = count(ReviewStatus::RejectedNegative);
        Stats {
            pending: count(ReviewStatus::Pending),
            confirmed,
            rejected,
            flag_precision_estimate: (confirmed + rejected > 0)
                .then(|| confirmed as f64 / (confirmed + rejected) as f64),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn item(id: &str, score: f64) -> ReviewItem {
        ReviewItem {
            tweet_id: id.into(),
            text: format!("tekst {id}"),
            negative_score: score,
            predicted_label: "Negative".into(),
            status: ReviewStatus::Pending,
            verdict_time: None,
        }
    }

    #[test]
    fn queue_order_and_limit() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = ReviewStore::open(dir.path()).unwrap();
        assert!(store.pending(None).is_empty());
        store.enqueue(vec![item("b", 0.4), item("c", 0.9), item("a", 0.4)]).unwrap();
        let ids: Vec<String> = store.pending(None).into_iter().map(|i| i.tweet_id).collect();
        assert_eq!(ids, ["c", "a", "b"]);
        assert_eq!(store.pending(Some(1))[0].tweet_id, "c");
        assert_eq!(store.enqueue(vec![item("a", 0.99)]).unwrap(), 0);
    }

    #[test]
    fn verdicts_are_final_and_counted() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = ReviewStore::open(dir.path()).unwrap();
        store.enqueue(["1", "2", "3", "4", "5"].iter().map(|i| item(i, 0.5)).collect()).unwrap();
        assert_eq!(store.stats().flag_precision_estimate, None);
        for id in ["1", "2", "3"] {
            assert_eq!(store.judge(id, Verdict::Negative).unwrap().status, ReviewStatus::ConfirmedNegative);
        }
        store.judge("4", Verdict::Other).unwrap();
        assert!(matches!(store.judge("4", Verdict::Negative), Err(StoreError::AlreadyJudged(_))));
        assert!(matches!(store.judge("9", Verdict::Negative), Err(StoreError::NotFound(_))));
        let stats = store.stats();
        assert_eq!((stats.pending, stats.confirmed, stats.rejected), (1, 3, 1));
        assert_eq!(stats.flag_precision_estimate, Some(0.75));
    }

    #[test]
    fn reopening_replays_state() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = ReviewStore::open(dir.path()).unwrap();
        store.enqueue(vec![item("x", 0.7), item("y", 0.2)]).unwrap();
        store.judge("y", Verdict::Other).unwrap();
        let reopened = ReviewStore::open(dir.path()).unwrap();
        assert_eq!(reopened.items().collect::<Vec<_>>(), store.items().collect::<Vec<_>>());
        assert_eq!(reopened.feedback(), store.feedback());
    }
}
