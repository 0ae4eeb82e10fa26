//! Tweet loading and the three corpus filters (retweets, URLs, blacklist).

use std::collections::HashSet;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One social-media message.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tweet {
    pub id: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub is_retweet: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub query_term: Option<String>,
}

impl Tweet {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        Tweet {
            id: id.into(),
            text: text.into(),
            timestamp: None,
            is_retweet: None,
            query_term: None,
        }
    }
}

/// On-disk layout of a tweet file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    Jsonl,
    Csv,
}

impl CorpusFormat {
    /// Guess the format from a file extension; anything that is not `.csv` is JSONL.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => CorpusFormat::Csv,
            _ => CorpusFormat::Jsonl,
        }
    }
}

impl FromStr for CorpusFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" | "json" => Ok(CorpusFormat::Jsonl),
            "csv" => Ok(CorpusFormat::Csv),
            other => Err(Error::InvalidParameter(format!("unknown corpus format {other:?}"))),
        }
    }
}

#[derive(Debug, Deserialize)]
struct RawTweet {
    id: Option<String>,
    text: Option<String>,
    #[serde(default)]
    timestamp: Option<String>,
    #[serde(default)]
    is_retweet: Option<serde_json::Value>,
    #[serde(default)]
    query_term: Option<String>,
}

fn parse_flag(value: Option<&str>, line: usize) -> Result<Option<bool>> {
    match value.map(str::trim) {
        None | Some("") => Ok(None),
        Some(v) if v.eq_ignore_ascii_case("true") || v == "1" => Ok(Some(true)),
        Some(v) if v.eq_ignore_ascii_case("false") || v == "0" => Ok(Some(false)),
        Some(v) => Err(Error::Parse {
            line,
            message: format!("is_retweet must be a boolean, got {v:?}"),
        }),
    }
}

fn non_empty(value: Option<String>) -> Option<String> {
    value.filter(|v| !v.trim().is_empty())
}

fn validate(raw: RawTweet, line: usize) -> Result<Tweet> {
    let id = raw.id.ok_or(Error::MissingField { line, field: "id" })?;
    let text = raw.text.ok_or(Error::MissingField { line, field: "text" })?;
    if id.is_empty() {
        return Err(Error::Parse {
            line,
            message: "empty tweet id".into(),
        });
    }
    if text.trim().is_empty() {
        return Err(Error::Parse {
            line,
            message: format!("tweet {id:?} has empty text"),
        });
    }
    let is_retweet = match raw.is_retweet {
        None | Some(serde_json::Value::Null) => None,
        Some(serde_json::Value::Bool(b)) => Some(b),
        Some(serde_json::Value::String(s)) => parse_flag(Some(&s), line)?,
        Some(other) => {
            return Err(Error::Parse {
                line,
                message: format!("is_retweet must be a boolean, got {other}"),
            })
        }
    };
    Ok(Tweet {
        id,
        text,
        timestamp: non_empty(raw.timestamp),
        is_retweet,
        query_term: non_empty(raw.query_term),
    })
}

/// Parse one JSONL line into a tweet; `line` is used for error messages.
pub fn parse_jsonl_line(content: &str, line: usize) -> Result<Tweet> {
    let raw: RawTweet = serde_json::from_str(content).map_err(|e| Error::Parse {
        line,
        message: e.to_string(),
    })?;
    validate(raw, line)
}

fn check_unique(tweets: &[Tweet]) -> Result<()> {
    let mut seen = HashSet::with_capacity(tweets.len());
    for t in tweets {
        if !seen.insert(t.id.as_str()) {
            return Err(Error::DuplicateId(t.id.clone()));
        }
    }
    Ok(())
}

/// Read tweets from JSONL text. Blank lines are skipped.
pub fn read_jsonl<R: BufRead>(reader: R) -> Result<Vec<Tweet>> {
    let mut tweets = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        tweets.push(parse_jsonl_line(&line, line_no)?);
    }
    check_unique(&tweets)?;
    Ok(tweets)
}

/// Read tweets from CSV with a header row naming the columns.
pub fn read_csv<R: std::io::Read>(reader: R) -> Result<Vec<Tweet>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Parse {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let column = |name: &str| headers.iter().position(|h| h.trim() == name);
    let (id_col, text_col) = (column("id"), column("text"));
    let ts_col = column("timestamp");
    let rt_col = column("is_retweet");
    let q_col = column("query_term");

    let mut tweets = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map(|p| p.line() as usize).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let get = |col: Option<usize>| col.and_then(|c| record.get(c)).map(str::to_string);
        let raw = RawTweet {
            id: get(id_col),
            text: get(text_col),
            timestamp: get(ts_col),
            is_retweet: None,
            query_term: get(q_col),
        };
        let flag = parse_flag(get(rt_col).as_deref(), line)?;
        let mut tweet = validate(raw, line)?;
        tweet.is_retweet = flag;
        tweets.push(tweet);
    }
    check_unique(&tweets)?;
    Ok(tweets)
}

/// Load a tweet file in the given format, preserving file order.
pub fn load_corpus(path: &Path, format: CorpusFormat) -> Result<Vec<Tweet>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    match format {
        CorpusFormat::Jsonl => read_jsonl(BufReader::new(file)),
        CorpusFormat::Csv => read_csv(BufReader::new(file)),
    }
}

/// Write tweets as JSONL, one object per line.
pub fn write_jsonl<W: Write>(mut out: W, tweets: &[Tweet]) -> std::io::Result<()> {
    for t in tweets {
        serde_json::to_writer(&mut out, t)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn save_corpus(path: &Path, tweets: &[Tweet]) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    write_jsonl(&mut out, tweets)
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}

pub const DEFAULT_BLACKLIST: [&str; 3] = ["dier", "landbouw", "teek"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterConfig {
    pub remove_retweets: bool,
    pub remove_urls: bool,
    pub blacklist: Vec<String>,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            remove_retweets: true,
            remove_urls: true,
            blacklist: DEFAULT_BLACKLIST.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl FilterConfig {
    /// A configuration that keeps every tweet.
    pub fn disabled() -> Self {
        FilterConfig {
            remove_retweets: false,
            remove_urls: false,
            blacklist: Vec::new(),
        }
    }

    /// Build a config, normalizing blacklist entries to lowercase and rejecting empty ones.
    pub fn new(remove_retweets: bool, remove_urls: bool, blacklist: &[&str]) -> Result<Self> {
        let mut entries = Vec::with_capacity(blacklist.len());
        for term in blacklist {
            let term = term.trim().to_lowercase();
            if term.is_empty() {
                return Err(Error::InvalidParameter("empty blacklist entry".into()));
            }
            entries.push(term);
        }
        Ok(FilterConfig {
            remove_retweets,
            remove_urls,
            blacklist: entries,
        })
    }
}

/// Tweet counts after each filtering stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterReport {
    pub before: usize,
    pub after_retweets: usize,
    pub after_urls: usize,
    pub after_blacklist: usize,
}

pub fn is_retweet(tweet: &Tweet) -> bool {
    if tweet.is_retweet == Some(true) {
        return true;
    }
    let prefix: String = tweet.text.trim_start().chars().take(4).collect();
    prefix.eq_ignore_ascii_case("rt @")
}

/// True when the text has `http://`, `https://` or `www.` followed by a non-space character.
pub fn contains_url(text: &str) -> bool {
    let lower = text.to_lowercase();
    ["http://", "https://", "www."].iter().any(|marker| {
        lower.match_indices(marker).any(|(pos, m)| {
            lower[pos + m.len()..]
                .chars()
                .next()
                .is_some_and(|c| !c.is_whitespace())
        })
    })
}

pub fn matches_blacklist(text: &str, blacklist: &[String]) -> bool {
    if blacklist.is_empty() {
        return false;
    }
    let lower = text.to_lowercase();
    blacklist.iter().any(|term| lower.contains(term.as_str()))
}

/// Apply the three filters in order, returning the survivors and per-stage counts.
pub fn apply_filters(tweets: &[Tweet], config: &FilterConfig) -> (Vec<Tweet>, FilterReport) {
    let before = tweets.len();
    let stage1: Vec<&Tweet> = tweets
        .iter()
        .filter(|t| !(config.remove_retweets && is_retweet(t)))
        .collect();
    let after_retweets = stage1.len();
    let stage2: Vec<&Tweet> = stage1
        .into_iter()
        .filter(|t| !(config.remove_urls && contains_url(&t.text)))
        .collect();
    let after_urls = stage2.len();
    let survivors: Vec<Tweet> = stage2
        .into_iter()
        .filter(|t| !matches_blacklist(&t.text, &config.blacklist))
        .cloned()
        .collect();
    let report = FilterReport {
        before,
        after_retweets,
        after_urls,
        after_blacklist: survivors.len(),
    };
    (survivors, report)
}
