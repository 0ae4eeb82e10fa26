//! Annotation records and their aggregation into strict, lax and one-annotator tiers.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::Tweet;
use crate::error::{Error, Result};

fn normalize(s: &str) -> String {
    s.chars()
        .filter(|c| c.is_alphanumeric())
        .flat_map(char::to_lowercase)
        .collect()
}

macro_rules! category_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $label:literal [$($alias:literal),*]),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $label),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                let key = normalize(s);
                $(
                    if key == normalize($label) $(|| key == $alias)* {
                        return Ok($name::$variant);
                    }
                )+
                Err(Error::InvalidRecord(format!(
                    concat!("unknown ", stringify!($name), " value {:?}"),
                    s
                )))
            }
        }
    };
}

category_enum!(Relevance {
    Relevant => "Relevant" [],
    RelevantAbroad => "RelevantAbroad" [],
    Irrelevant => "Irrelevant" [],
});

category_enum!(Subject {
    Vaccine => "Vaccine" [],
    Disease => "Disease" [],
    Both => "Both" ["vaccineanddisease"],
});

category_enum!(Stance {
    Negative => "Negative" [],
    Positive => "Positive" [],
    Neutral => "Neutral" [],
    NotClear => "NotClear" [],
});

category_enum!(Sentiment {
    Informative => "Informative" [],
    Anger => "Anger" ["angerfrustration", "frustration"],
    Worry => "Worry" ["worryfeardoubts", "worry", "fear"],
    Relieved => "Relieved" [],
    Other => "Other" [],
});

/// One annotator's judgment of one tweet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub tweet_id: String,
    pub annotator_id: String,
    pub relevance: Relevance,
    pub subject: Option<Subject>,
    pub stance: Option<Stance>,
    pub sentiment: Option<Sentiment>,
}

impl AnnotationRecord {
    /// An irrelevant judgment: no subject, stance or sentiment.
    pub fn irrelevant(tweet_id: impl Into<String>, annotator_id: impl Into<String>) -> Self {
        AnnotationRecord {
            tweet_id: tweet_id.into(),
            annotator_id: annotator_id.into(),
            relevance: Relevance::Irrelevant,
            subject: None,
            stance: None,
            sentiment: None,
        }
    }

    pub fn relevant(
        tweet_id: impl Into<String>,
        annotator_id: impl Into<String>,
        stance: Stance,
        sentiment: Option<Sentiment>,
    ) -> Self {
        AnnotationRecord {
            tweet_id: tweet_id.into(),
            annotator_id: annotator_id.into(),
            relevance: Relevance::Relevant,
            subject: None,
            stance: Some(stance),
            sentiment,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.tweet_id.is_empty() || self.annotator_id.is_empty() {
            return Err(Error::InvalidRecord("empty tweet_id or annotator_id".into()));
        }
        match self.relevance {
            Relevance::Irrelevant => {
                if self.subject.is_some() || self.stance.is_some() || self.sentiment.is_some() {
                    return Err(Error::InvalidRecord(format!(
                        "tweet {:?} by {:?}: irrelevant records carry no subject, stance or sentiment",
                        self.tweet_id, self.annotator_id
                    )));
                }
            }
            _ => {
                if self.stance.is_none() {
                    return Err(Error::InvalidRecord(format!(
                        "tweet {:?} by {:?}: relevant records need a stance",
                        self.tweet_id, self.annotator_id
                    )));
                }
            }
        }
        Ok(())
    }
}

/// The four label granularities used for training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LabelingScheme {
    Binary,
    IrrelevanceFilter,
    Polarity,
    PolaritySentiment,
}

pub const NEGATIVE: &str = "Negative";
pub const OTHER: &str = "Other";
pub const IRRELEVANT: &str = "Irrelevant";
pub const POSITIVE: &str = "Positive";
pub const NEUTRAL: &str = "Neutral";
pub const NOT_CLEAR: &str = "NotClear";
pub const POSITIVE_FRUSTRATION: &str = "Positive+Frustration";
pub const POSITIVE_INFORMATION: &str = "Positive+Information";
pub const POSITIVE_OTHER: &str = "Positive+Other";

impl LabelingScheme {
    pub const ALL: [LabelingScheme; 4] = [
        LabelingScheme::Binary,
        LabelingScheme::IrrelevanceFilter,
        LabelingScheme::Polarity,
        LabelingScheme::PolaritySentiment,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LabelingScheme::Binary => "Binary",
            LabelingScheme::IrrelevanceFilter => "IrrelevanceFilter",
            LabelingScheme::Polarity => "Polarity",
            LabelingScheme::PolaritySentiment => "PolaritySentiment",
        }
    }

    /// Categories in lax preference order. `Negative` always comes first.
    pub fn priority(self) -> &'static [&'static str] {
        match self {
            LabelingScheme::Binary => &[NEGATIVE, OTHER],
            LabelingScheme::IrrelevanceFilter => &[NEGATIVE, IRRELEVANT, OTHER],
            LabelingScheme::Polarity => &[NEGATIVE, POSITIVE, NEUTRAL, NOT_CLEAR, IRRELEVANT],
            LabelingScheme::PolaritySentiment => &[
                NEGATIVE,
                POSITIVE_FRUSTRATION,
                POSITIVE_INFORMATION,
                POSITIVE_OTHER,
                NEUTRAL,
                NOT_CLEAR,
                IRRELEVANT,
            ],
        }
    }

    pub fn rank(self, label: &str) -> Option<usize> {
        self.priority().iter().position(|c| *c == label)
    }

    pub fn contains(self, label: &str) -> bool {
        self.rank(label).is_some()
    }

    /// Canonical `&'static str` for a label of this scheme.
    pub fn intern(self, label: &str) -> Option<&'static str> {
        self.priority().iter().copied().find(|c| *c == label)
    }

    /// The label recorded when a reviewer rejects a Negative flag.
    pub fn catch_all(self) -> &'static str {
        match self {
            LabelingScheme::Binary | LabelingScheme::IrrelevanceFilter => OTHER,
            LabelingScheme::Polarity | LabelingScheme::PolaritySentiment => NOT_CLEAR,
        }
    }
}

impl fmt::Display for LabelingScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LabelingScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match normalize(s).as_str() {
            "binary" => Ok(LabelingScheme::Binary),
            "irrelevancefilter" | "irrelevance" => Ok(LabelingScheme::IrrelevanceFilter),
            "polarity" => Ok(LabelingScheme::Polarity),
            "polaritysentiment" => Ok(LabelingScheme::PolaritySentiment),
            _ => Err(Error::InvalidParameter(format!("unknown labeling scheme {s:?}"))),
        }
    }
}

/// Map one annotation onto a category of `scheme`.
pub fn derive_label(record: &AnnotationRecord, scheme: LabelingScheme) -> &'static str {
    let irrelevant = record.relevance == Relevance::Irrelevant;
    let stance = if irrelevant { None } else { record.stance };
    match scheme {
        LabelingScheme::Binary => match stance {
            Some(Stance::Negative) => NEGATIVE,
            _ => OTHER,
        },
        LabelingScheme::IrrelevanceFilter => match stance {
            _ if irrelevant => IRRELEVANT,
            Some(Stance::Negative) => NEGATIVE,
            _ => OTHER,
        },
        LabelingScheme::Polarity | LabelingScheme::PolaritySentiment => match stance {
            None => IRRELEVANT,
            Some(Stance::Negative) => NEGATIVE,
            Some(Stance::Neutral) => NEUTRAL,
            Some(Stance::NotClear) => NOT_CLEAR,
            Some(Stance::Positive) if scheme == LabelingScheme::Polarity => POSITIVE,
            Some(Stance::Positive) => match record.sentiment {
                Some(Sentiment::Anger) => POSITIVE_FRUSTRATION,
                Some(Sentiment::Informative) => POSITIVE_INFORMATION,
                _ => POSITIVE_OTHER,
            },
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Reliability {
    Strict,
    Lax,
    One,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledInstance {
    pub tweet_id: String,
    pub text: String,
    pub label: String,
    pub reliability: Reliability,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    pub scheme: LabelingScheme,
    pub strict: Vec<LabeledInstance>,
    pub lax: Vec<LabeledInstance>,
    pub one: Vec<LabeledInstance>,
}

impl LabeledDataset {
    pub fn label_counts(&self, tier: Reliability) -> Vec<(&'static str, usize)> {
        let instances = match tier {
            Reliability::Strict => &self.strict,
            Reliability::Lax => &self.lax,
            Reliability::One => &self.one,
        };
        self.scheme
            .priority()
            .iter()
            .map(|c| (*c, instances.iter().filter(|i| i.label == *c).count()))
            .collect()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self).expect("dataset serializes");
        fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let dataset: LabeledDataset = serde_json::from_str(&text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        for inst in dataset.strict.iter().chain(&dataset.lax).chain(&dataset.one) {
            if !dataset.scheme.contains(&inst.label) {
                return Err(Error::InvalidRecord(format!(
                    "label {:?} is not part of scheme {}",
                    inst.label, dataset.scheme
                )));
            }
        }
        Ok(dataset)
    }
}

/// Group annotations per tweet and split them into reliability tiers.
///
/// Two annotations with the same derived label give a strict instance, two
/// different labels give a lax instance carrying the label that ranks first in
/// the scheme's priority, and a single annotation gives a one-annotator instance.
/// Output follows corpus order.
pub fn aggregate(
    records: &[AnnotationRecord],
    tweets: &[Tweet],
    scheme: LabelingScheme,
) -> Result<LabeledDataset> {
    let known: HashSet<&str> = tweets.iter().map(|t| t.id.as_str()).collect();
    let mut by_tweet: HashMap<&str, Vec<&AnnotationRecord>> = HashMap::new();
    for record in records {
        record.validate()?;
        if !known.contains(record.tweet_id.as_str()) {
            return Err(Error::UnknownTweet(record.tweet_id.clone()));
        }
        let group = by_tweet.entry(record.tweet_id.as_str()).or_default();
        if group.iter().any(|r| r.annotator_id == record.annotator_id) {
            return Err(Error::InvalidRecord(format!(
                "annotator {:?} labeled tweet {:?} twice",
                record.annotator_id, record.tweet_id
            )));
        }
        group.push(record);
    }

    let mut dataset = LabeledDataset {
        scheme,
        strict: Vec::new(),
        lax: Vec::new(),
        one: Vec::new(),
    };
    for tweet in tweets {
        let Some(group) = by_tweet.get(tweet.id.as_str()) else {
            continue;
        };
        let instance = |label: &str, reliability| LabeledInstance {
            tweet_id: tweet.id.clone(),
            text: tweet.text.clone(),
            label: label.to_string(),
            reliability,
        };
        match group.as_slice() {
            [only] => dataset
                .one
                .push(instance(derive_label(only, scheme), Reliability::One)),
            [a, b] => {
                let (la, lb) = (derive_label(a, scheme), derive_label(b, scheme));
                if la == lb {
                    dataset.strict.push(instance(la, Reliability::Strict));
                } else {
                    let preferred = if scheme.rank(la) <= scheme.rank(lb) { la } else { lb };
                    dataset.lax.push(instance(preferred, Reliability::Lax));
                }
            }
            more => {
                return Err(Error::TooManyAnnotations {
                    tweet_id: tweet.id.clone(),
                    count: more.len(),
                })
            }
        }
    }
    Ok(dataset)
}

/// Which reliability tiers make up a training set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TrainingVariant {
    Strict,
    StrictLax,
    StrictOne,
    StrictLaxOne,
}

impl TrainingVariant {
    pub const ALL: [TrainingVariant; 4] = [
        TrainingVariant::Strict,
        TrainingVariant::StrictLax,
        TrainingVariant::StrictOne,
        TrainingVariant::StrictLaxOne,
    ];

    pub fn includes_lax(self) -> bool {
        matches!(self, TrainingVariant::StrictLax | TrainingVariant::StrictLaxOne)
    }

    pub fn includes_one(self) -> bool {
        matches!(self, TrainingVariant::StrictOne | TrainingVariant::StrictLaxOne)
    }

    pub fn name(self) -> &'static str {
        match self {
            TrainingVariant::Strict => "Strict",
            TrainingVariant::StrictLax => "Strict+Lax",
            TrainingVariant::StrictOne => "Strict+One",
            TrainingVariant::StrictLaxOne => "Strict+Lax+One",
        }
    }
}

impl fmt::Display for TrainingVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TrainingVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match normalize(s).as_str() {
            "strict" => Ok(TrainingVariant::Strict),
            "strictlax" => Ok(TrainingVariant::StrictLax),
            "strictone" => Ok(TrainingVariant::StrictOne),
            "strictlaxone" => Ok(TrainingVariant::StrictLaxOne),
            _ => Err(Error::InvalidParameter(format!("unknown training variant {s:?}"))),
        }
    }
}

pub fn compose_training(dataset: &LabeledDataset, variant: TrainingVariant) -> Vec<LabeledInstance> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let lax: &[LabeledInstance] = if variant.includes_lax() { &dataset.lax } else { &[] };
    let one: &[LabeledInstance] = if variant.includes_one() { &dataset.one } else { &[] };
    for inst in dataset.strict.iter().chain(lax).chain(one) {
        if seen.insert(inst.tweet_id.as_str()) {
            out.push(inst.clone());
        }
    }
    out
}

#[derive(Debug, Deserialize)]
struct RawAnnotation {
    tweet_id: Option<String>,
    annotator_id: Option<String>,
    relevance: Option<String>,
    #[serde(default)]
    subject: Option<String>,
    #[serde(default)]
    stance: Option<String>,
    #[serde(default)]
    sentiment: Option<String>,
}

fn optional<T: FromStr<Err = Error>>(value: Option<String>, line: usize) -> Result<Option<T>> {
    match value {
        Some(v) if !v.trim().is_empty() => v.parse().map(Some).map_err(|e: Error| Error::Parse {
            line,
            message: e.to_string(),
        }),
        _ => Ok(None),
    }
}

impl RawAnnotation {
    fn into_record(self, line: usize) -> Result<AnnotationRecord> {
        let tweet_id = self.tweet_id.ok_or(Error::MissingField { line, field: "tweet_id" })?;
        let annotator_id = self
            .annotator_id
            .ok_or(Error::MissingField { line, field: "annotator_id" })?;
        let relevance = optional::<Relevance>(self.relevance, line)?
            .ok_or(Error::MissingField { line, field: "relevance" })?;
        let record = AnnotationRecord {
            tweet_id,
            annotator_id,
            relevance,
            subject: optional(self.subject, line)?,
            stance: optional(self.stance, line)?,
            sentiment: optional(self.sentiment, line)?,
        };
        record.validate().map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        Ok(record)
    }
}

pub fn read_annotations_csv<R: std::io::Read>(reader: R) -> Result<Vec<AnnotationRecord>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let mut out = Vec::new();
    for row in rdr.deserialize::<RawAnnotation>() {
        let row = row.map_err(|e| Error::Parse {
            line: e.position().map(|p| p.line() as usize).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = out.len() + 2;
        out.push(row.into_record(line)?);
    }
    Ok(out)
}

pub fn read_annotations_jsonl<R: BufRead>(reader: R) -> Result<Vec<AnnotationRecord>> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawAnnotation = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        out.push(raw.into_record(line_no)?);
    }
    Ok(out)
}

/// Load annotations; `.jsonl`/`.json` files are read as JSONL, anything else as CSV.
pub fn load_annotations(path: &Path) -> Result<Vec<AnnotationRecord>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("jsonl") | Some("json") => read_annotations_jsonl(BufReader::new(file)),
        _ => read_annotations_csv(BufReader::new(file)),
    }
}

pub fn write_annotations_csv<W: Write>(out: W, records: &[AnnotationRecord]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::InvalidRecord(e.to_string());
    wtr.write_record(["tweet_id", "annotator_id", "relevance", "subject", "stance", "sentiment"])
        .map_err(csv_err)?;
    for r in records {
        wtr.write_record([
            r.tweet_id.as_str(),
            r.annotator_id.as_str(),
            r.relevance.as_str(),
            r.subject.map_or("", Subject::as_str),
            r.stance.map_or("", Stance::as_str),
            r.sentiment.map_or("", Sentiment::as_str),
        ])
        .map_err(csv_err)?;
    }
    wtr.flush().map_err(|e| Error::InvalidRecord(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(tweet: &str, annotator: &str, stance: Option<Stance>, sentiment: Option<Sentiment>) -> AnnotationRecord {
        match stance {
            Some(s) => AnnotationRecord::relevant(tweet, annotator, s, sentiment),
            None => AnnotationRecord::irrelevant(tweet, annotator),
        }
    }

    fn tweets(ids: &[&str]) -> Vec<Tweet> {
        ids.iter().map(|id| Tweet::new(*id, format!("tekst {id}"))).collect()
    }

    #[test]
    fn derive_label_examples() {
        let r = rec("1", "a", Some(Stance::Positive), Some(Sentiment::Anger));
        assert_eq!(derive_label(&r, LabelingScheme::PolaritySentiment), "Positive+Frustration");
        let r = rec("1", "a", None, None);
        assert_eq!(derive_label(&r, LabelingScheme::Binary), "Other");
        assert_eq!(derive_label(&r, LabelingScheme::IrrelevanceFilter), "Irrelevant");
        assert_eq!(derive_label(&r, LabelingScheme::Polarity), "Irrelevant");
        let r = rec("1", "a", Some(Stance::Negative), Some(Sentiment::Worry));
        assert_eq!(derive_label(&r, LabelingScheme::Polarity), "Negative");
        let r = rec("1", "a", Some(Stance::Positive), Some(Sentiment::Informative));
        assert_eq!(derive_label(&r, LabelingScheme::PolaritySentiment), "Positive+Information");
        let r = rec("1", "a", Some(Stance::Positive), None);
        assert_eq!(derive_label(&r, LabelingScheme::PolaritySentiment), "Positive+Other");
        assert_eq!(derive_label(&r, LabelingScheme::IrrelevanceFilter), "Other");
    }

    #[test]
    fn relevant_abroad_merges_with_relevant() {
        let mut r = rec("1", "a", Some(Stance::Neutral), None);
        r.relevance = Relevance::RelevantAbroad;
        for scheme in LabelingScheme::ALL {
            let mut plain = r.clone();
            plain.relevance = Relevance::Relevant;
            assert_eq!(derive_label(&r, scheme), derive_label(&plain, scheme));
        }
    }

    #[test]
    fn every_scheme_puts_negative_first() {
        for scheme in LabelingScheme::ALL {
            let p = scheme.priority();
            assert_eq!(p[0], NEGATIVE);
            let unique: HashSet<_> = p.iter().collect();
            assert_eq!(unique.len(), p.len());
            assert!(scheme.contains(scheme.catch_all()));
        }
    }

    #[test]
    fn aggregate_tiers() {
        let records = vec![
            rec("1", "a", Some(Stance::Positive), None),
            rec("1", "b", Some(Stance::Neutral), None),
            rec("2", "a", Some(Stance::Negative), None),
            rec("2", "c", Some(Stance::Negative), None),
            rec("3", "b", Some(Stance::Neutral), None),
        ];
        let ds = aggregate(&records, &tweets(&["1", "2", "3", "4"]), LabelingScheme::Polarity).unwrap();
        assert_eq!(ds.lax.len(), 1);
        assert_eq!((ds.lax[0].tweet_id.as_str(), ds.lax[0].label.as_str()), ("1", "Positive"));
        assert_eq!((ds.strict[0].tweet_id.as_str(), ds.strict[0].label.as_str()), ("2", "Negative"));
        assert_eq!((ds.one[0].tweet_id.as_str(), ds.one[0].label.as_str()), ("3", "Neutral"));
        assert_eq!(ds.strict[0].reliability, Reliability::Strict);
    }

    #[test]
    fn aggregate_errors() {
        let records = vec![rec("9", "a", None, None)];
        assert!(matches!(
            aggregate(&records, &tweets(&["1"]), LabelingScheme::Binary),
            Err(Error::UnknownTweet(id)) if id == "9"
        ));
        let records = vec![
            rec("1", "a", None, None),
            rec("1", "b", None, None),
            rec("1", "c", None, None),
        ];
        assert!(matches!(
            aggregate(&records, &tweets(&["1"]), LabelingScheme::Binary),
            Err(Error::TooManyAnnotations { count: 3, .. })
        ));
        let records = vec![rec("1", "a", None, None), rec("1", "a", None, None)];
        assert!(aggregate(&records, &tweets(&["1"]), LabelingScheme::Binary).is_err());
    }

    #[test]
    fn compose_training_variants() {
        let inst = |id: &str, r| LabeledInstance {
            tweet_id: id.into(),
            text: id.into(),
            label: NEGATIVE.into(),
            reliability: r,
        };
        let ds = LabeledDataset {
            scheme: LabelingScheme::Binary,
            strict: vec![inst("a", Reliability::Strict)],
            lax: vec![inst("b", Reliability::Lax)],
            one: vec![inst("c", Reliability::One)],
        };
        let ids = |v: TrainingVariant| -> Vec<String> {
            compose_training(&ds, v).into_iter().map(|i| i.tweet_id).collect()
        };
        assert_eq!(ids(TrainingVariant::Strict), ["a"]);
        assert_eq!(ids(TrainingVariant::StrictLax), ["a", "b"]);
        assert_eq!(ids(TrainingVariant::StrictOne), ["a", "c"]);
        assert_eq!(ids(TrainingVariant::StrictLaxOne), ["a", "b", "c"]);
    }

    #[test]
    fn record_invariants() {
        let mut r = AnnotationRecord::irrelevant("1", "a");
        r.stance = Some(Stance::Negative);
        assert!(r.validate().is_err());
        let mut r = AnnotationRecord::relevant("1", "a", Stance::Neutral, None);
        r.stance = None;
        assert!(r.validate().is_err());
    }

    #[test]
    fn annotation_files_parse() {
        let csv = "tweet_id,annotator_id,relevance,subject,stance,sentiment\n\
                   1,a,Relevant abroad,Vaccine and disease,Not clear,\"Anger, frustration\"\n\
                   1,b,Irrelevant,,,\n";
        let records = read_annotations_csv(csv.as_bytes()).unwrap();
        assert_eq!(records[0].relevance, Relevance::RelevantAbroad);
        assert_eq!(records[0].subject, Some(Subject::Both));
        assert_eq!(records[0].stance, Some(Stance::NotClear));
        assert_eq!(records[0].sentiment, Some(Sentiment::Anger));
        assert_eq!(records[1], AnnotationRecord::irrelevant("1", "b"));

        let mut buf = Vec::new();
        write_annotations_csv(&mut buf, &records).unwrap();
        assert_eq!(read_annotations_csv(buf.as_slice()).unwrap(), records);

        let jsonl = "{\"tweet_id\":\"1\",\"annotator_id\":\"a\",\"relevance\":\"Relevant\",\"stance\":\"Negative\",\"sentiment\":\"\"}\n";
        let records = read_annotations_jsonl(jsonl.as_bytes()).unwrap();
        assert_eq!(records[0].stance, Some(Stance::Negative));
        assert_eq!(records[0].sentiment, None);

        let bad = "tweet_id,annotator_id,relevance,subject,stance,sentiment\n1,a,Relevant,,,\n";
        assert!(matches!(read_annotations_csv(bad.as_bytes()), Err(Error::Parse { line: 2, .. })));
    }
}
