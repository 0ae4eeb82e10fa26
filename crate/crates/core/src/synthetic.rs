//! Seeded generator for the bundled demo corpus.
//!
//! Messages are assembled from stance-specific cue words mixed with shared
//! filler, so the Negative class is learnable from its vocabulary. Each kept
//! message is judged by one or two simulated annotators who occasionally pick
//! the wrong stance. Retweets, URL messages and blacklisted topics are mixed in
//! so the corpus filters have something to remove.

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::annotation::{write_annotations_csv, AnnotationRecord, Relevance, Sentiment, Stance, Subject};
use crate::corpus::{write_jsonl, Tweet};
use crate::error::{Error, Result};

pub const TWEETS_FILE: &str = "tweets.jsonl";
pub const ANNOTATIONS_FILE: &str = "annotations.csv";
pub const LEXICON_FILE: &str = "lexicon.tsv";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub seed: u64,
    /// Messages that survive filtering; all of them are annotated.
    pub kept: usize,
    pub retweets: usize,
    pub url_messages: usize,
    pub blacklisted: usize,
    /// Share of kept messages judged by two annotators.
    pub double_rate: f64,
    /// Chance that an annotator picks a wrong stance.
    pub annotator_error: f64,
    pub annotators: usize,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            seed: 42,
            kept: 4_600,
            retweets: 320,
            url_messages: 260,
            blacklisted: 140,
            double_rate: 0.78,
            annotator_error: 0.08,
            annotators: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpus {
    /// Raw messages, including the ones the filters remove.
    pub tweets: Vec<Tweet>,
    pub annotations: Vec<AnnotationRecord>,
}

/// Demo polarity lexicon matching the generator's adjectives.
pub const DEMO_LEXICON: &str = "\
# Demo adjective polarities for the synthetic corpus.
# word<TAB>polarity, or modifier word<TAB>polarity for bigrams.
gevaarlijk\t-0.8
schadelijk\t-0.7
slecht\t-0.6
ziek\t-0.5
eng\t-0.4
veilig\t0.6
goed\t0.6
belangrijk\t0.5
verstandig\t0.5
fijn\t0.4
lekker\t0.5
niet goed\t-0.5
heel goed\t0.8
zeer gevaarlijk\t-1.0
";

const TOPICS: &[&str] = &["vaccin", "vaccinatie", "inenting", "prik", "mazelen", "hpv", "griepprik", "vaccineren"];
const FILLER: &[&str] = &[
    "de", "het", "een", "en", "is", "zijn", "niet", "wel", "ook", "voor", "met", "van", "op", "dat", "ik", "je",
    "we", "nu", "toch", "echt", "al", "nog", "kinderen", "mensen", "vandaag", "over", "meer", "dus",
];
const NEGATIVE_CUES: &[&str] = &[
    "gif", "bijwerkingen", "weigeren", "nepvaccin", "farmamaffia", "autisme", "dwang", "boycot", "kwik",
    "leugens", "vergiftigd", "nooitmeer", "slachtoffers", "tegenstander",
];
const NEGATIVE_ADJECTIVES: &[&str] = &["gevaarlijk", "schadelijk", "slecht", "ziek", "eng"];
const POSITIVE_CUES: &[&str] =
    &["beschermd", "gehaald", "dankbaar", "aanrader", "gezond", "helpt", "ingeënt", "voorstander", "bescherming"];
const POSITIVE_ADJECTIVES: &[&str] = &["veilig", "goed", "belangrijk", "verstandig", "fijn"];
const NEUTRAL_CUES: &[&str] =
    &["ggd", "campagne", "morgen", "oproep", "rivm", "cijfers", "nieuws", "onderzoek", "programma", "uitnodiging"];
const NOT_CLEAR_CUES: &[&str] = &["hmm", "vraag", "benieuwd", "twijfel", "misschien", "nou", "tja", "waarom"];
const IRRELEVANT_CUES: &[&str] =
    &["voetbal", "weer", "trein", "muziek", "film", "koffie", "prikkel", "prikbord", "lekker", "slecht"];
const SENTIMENT_CUES: &[(Sentiment, &[&str])] = &[
    (Sentiment::Informative, &["lees", "info", "feiten"]),
    (Sentiment::Anger, &["belachelijk", "irritant", "boos"]),
    (Sentiment::Worry, &["bang", "zorgen", "onzeker"]),
    (Sentiment::Relieved, &["opgelucht", "blij"]),
    (Sentiment::Other, &["haha", "zomaar"]),
];
const HASHTAGS: &[&str] = &["#vaccinatie", "#hpv", "#mazelen", "#griep", "#rvp"];
const MENTIONS: &[&str] = &["@rivm", "@ggd", "@minvws", "@nos"];
const EMOTICONS: &[&str] = &[":)", ":(", ";)", ":-(", ":D"];
const BLACKLIST_WORDS: &[&str] = &["teek", "teekbeet", "landbouw", "dierenarts", "dier", "landbouwdieren"];

/// True stance of a generated message; `None` means irrelevant.
type Truth = (Option<Stance>, Sentiment);

fn pick<'a, R: Rng>(rng: &mut R, words: &[&'a str]) -> &'a str {
    words.choose(rng).expect("non-empty word list")
}

fn draw_truth<R: Rng>(rng: &mut R) -> Truth {
    let r: f64 = rng.gen();
    let stance = match r {
        r if r < 0.15 => Some(Stance::Negative),
        r if r < 0.50 => Some(Stance::Positive),
        r if r < 0.70 => Some(Stance::Neutral),
        r if r < 0.78 => Some(Stance::NotClear),
        _ => None,
    };
    let s: f64 = rng.gen();
    let sentiment = match stance {
        Some(Stance::Negative) if s < 0.6 => Sentiment::Anger,
        Some(Stance::Negative) => Sentiment::Worry,
        Some(Stance::Positive) if s < 0.4 => Sentiment::Informative,
        Some(Stance::Positive) if s < 0.6 => Sentiment::Anger,
        Some(Stance::Positive) if s < 0.75 => Sentiment::Relieved,
        Some(Stance::Positive) => Sentiment::Other,
        Some(Stance::Neutral) => Sentiment::Informative,
        Some(Stance::NotClear) if s < 0.5 => Sentiment::Worry,
        _ => Sentiment::Other,
    };
    (stance, sentiment)
}

fn compose<R: Rng>(rng: &mut R, truth: Truth) -> String {
    let mut words: Vec<&str> = Vec::new();
    let (stance, sentiment) = truth;
    if stance.is_some() {
        words.push(pick(rng, TOPICS));
    }
    let (cues, n_cues) = match stance {
        Some(Stance::Negative) => (NEGATIVE_CUES, rng.gen_range(1..=2)),
        Some(Stance::Positive) => (POSITIVE_CUES, rng.gen_range(1..=2)),
        Some(Stance::Neutral) => (NEUTRAL_CUES, rng.gen_range(1..=2)),
        Some(Stance::NotClear) => (NOT_CLEAR_CUES, 1),
        None => (IRRELEVANT_CUES, rng.gen_range(1..=2)),
    };
    for _ in 0..n_cues {
        words.push(pick(rng, cues));
    }
    match stance {
        Some(Stance::Negative) => {
            if rng.gen_bool(0.55) {
                words.push(pick(rng, NEGATIVE_ADJECTIVES));
            }
            if rng.gen_bool(0.15) {
                words.push(pick(rng, NEGATIVE_ADJECTIVES));
            }
        }
        Some(Stance::Positive) => {
            if rng.gen_bool(0.5) {
                words.push(pick(rng, POSITIVE_ADJECTIVES));
            }
            if rng.gen_bool(0.08) {
                words.push(pick(rng, NEGATIVE_ADJECTIVES));
            }
        }
        Some(Stance::Neutral) | Some(Stance::NotClear) => {
            if rng.gen_bool(0.1) {
                words.push(pick(rng, NEGATIVE_ADJECTIVES));
            }
            if rng.gen_bool(0.15) {
                words.push(pick(rng, POSITIVE_ADJECTIVES));
            }
        }
        None => {
            if rng.gen_bool(0.3) {
                words.push(pick(rng, TOPICS));
            }
        }
    }
    // Rare cross-over cue so the task is not trivially separable.
    if stance != Some(Stance::Negative) && rng.gen_bool(0.02) {
        words.push(pick(rng, NEGATIVE_CUES));
    }
    if stance.is_some() && rng.gen_bool(0.6) {
        let cues = SENTIMENT_CUES.iter().find(|(s, _)| *s == sentiment).expect("cue list per sentiment").1;
        words.push(pick(rng, cues));
    }
    for _ in 0..rng.gen_range(3..=7) {
        words.push(pick(rng, FILLER));
    }
    words.shuffle(rng);
    let mut text = words.join(" ");
    if let Some(first) = text.get(..1) {
        text = first.to_uppercase() + &text[1..];
    }
    if rng.gen_bool(0.2) {
        text = format!("{} {text}", pick(rng, MENTIONS));
    }
    if rng.gen_bool(0.3) {
        text.push(' ');
        text.push_str(pick(rng, HASHTAGS));
    }
    if rng.gen_bool(0.25) {
        text.push(' ');
        text.push_str(pick(rng, EMOTICONS));
    } else if rng.gen_bool(0.3) {
        text.push_str(if stance == Some(Stance::Negative) { "!!" } else { "." });
    }
    text
}

const STANCE_CHOICES: [Option<Stance>; 5] = [
    None,
    Some(Stance::Negative),
    Some(Stance::Positive),
    Some(Stance::Neutral),
    Some(Stance::NotClear),
];

fn judge<R: Rng>(rng: &mut R, tweet_id: &str, annotator: &str, truth: Truth, error: f64) -> AnnotationRecord {
    let (mut stance, mut sentiment) = truth;
    if rng.gen_bool(error) {
        let wrong: Vec<Option<Stance>> = STANCE_CHOICES.iter().copied().filter(|s| *s != stance).collect();
        stance = *wrong.choose(rng).expect("four alternatives");
    }
    if rng.gen_bool(error) {
        sentiment = *Sentiment::ALL.choose(rng).expect("sentiments");
    }
    match stance {
        None => AnnotationRecord::irrelevant(tweet_id, annotator),
        Some(stance) => {
            let mut record = AnnotationRecord::relevant(tweet_id, annotator, stance, Some(sentiment));
            if rng.gen_bool(0.05) {
                record.relevance = Relevance::RelevantAbroad;
            }
            let s: f64 = rng.gen();
            record.subject = Some(match s {
                s if s < 0.7 => Subject::Vaccine,
                s if s < 0.8 => Subject::Disease,
                _ => Subject::Both,
            });
            record
        }
    }
}

fn timestamp(index: usize) -> String {
    let minutes = index * 37;
    let day = 1 + (minutes / (24 * 60)) % 28;
    let month = 1 + (minutes / (24 * 60 * 28)) % 12;
    format!("2016-{month:02}-{day:02}T{:02}:{:02}:00Z", (minutes / 60) % 24, minutes % 60)
}

/// Build the corpus; identical configurations give identical output.
pub fn generate(config: &SyntheticConfig) -> Result<SyntheticCorpus> {
    if config.annotators < 2 {
        return Err(Error::InvalidParameter("need at least two annotators".into()));
    }
    for (name, p) in [("double_rate", config.double_rate), ("annotator_error", config.annotator_error)] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!("{name} {p} outside [0, 1]")));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    #[derive(Clone, Copy)]
    enum Kind {
        Kept,
        Retweet,
        Url,
        Blacklisted,
    }
    let mut kinds: Vec<Kind> = std::iter::repeat_n(Kind::Kept, config.kept)
        .chain(std::iter::repeat_n(Kind::Retweet, config.retweets))
        .chain(std::iter::repeat_n(Kind::Url, config.url_messages))
        .chain(std::iter::repeat_n(Kind::Blacklisted, config.blacklisted))
        .collect();
    kinds.shuffle(&mut rng);

    let annotators: Vec<String> = (1..=config.annotators).map(|i| format!("a{i}")).collect();
    let mut tweets = Vec::with_capacity(kinds.len());
    let mut annotations = Vec::new();
    for (index, kind) in kinds.into_iter().enumerate() {
        let id = format!("{}", 700_000_000 + index * 13);
        let truth = draw_truth(&mut rng);
        let body = compose(&mut rng, truth);
        let mut tweet = Tweet::new(id.clone(), body);
        tweet.timestamp = Some(timestamp(index));
        tweet.query_term = Some(pick(&mut rng, TOPICS).to_string());
        match kind {
            Kind::Kept => {
                let n = if rng.gen_bool(config.double_rate) { 2 } else { 1 };
                for annotator in annotators.choose_multiple(&mut rng, n) {
                    annotations.push(judge(&mut rng, &id, annotator, truth, config.annotator_error));
                }
                tweet.is_retweet = Some(false);
            }
            Kind::Retweet => {
                if rng.gen_bool(0.7) {
                    tweet.text = format!("RT {}: {}", pick(&mut rng, MENTIONS), tweet.text);
                }
                tweet.is_retweet = Some(true);
            }
            Kind::Url => {
                let slug: String = (0..8).map(|_| rng.gen_range(b'a'..=b'z') as char).collect();
                tweet.text = if rng.gen_bool(0.5) {
                    format!("{} https://t.co/{slug}", tweet.text)
                } else {
                    format!("{} www.{slug}.nl", tweet.text)
                };
                tweet.is_retweet = Some(false);
            }
            Kind::Blacklisted => {
                tweet.text = format!("{} {}", tweet.text, pick(&mut rng, BLACKLIST_WORDS));
                tweet.is_retweet = Some(false);
            }
        }
        tweets.push(tweet);
    }
    Ok(SyntheticCorpus { tweets, annotations })
}

/// Write `tweets.jsonl`, `annotations.csv` and `lexicon.tsv` into `dir`.
pub fn write_bundle(corpus: &SyntheticCorpus, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let tweets_path = dir.join(TWEETS_FILE);
    let mut buf = Vec::new();
    write_jsonl(&mut buf, &corpus.tweets).map_err(|e| Error::io(&tweets_path, e))?;
    fs::write(&tweets_path, buf).map_err(|e| Error::io(&tweets_path, e))?;

    let annotations_path = dir.join(ANNOTATIONS_FILE);
    let mut buf = Vec::new();
    write_annotations_csv(&mut buf, &corpus.annotations)?;
    fs::write(&annotations_path, buf).map_err(|e| Error::io(&annotations_path, e))?;

    let lexicon_path = dir.join(LEXICON_FILE);
    fs::write(&lexicon_path, DEMO_LEXICON).map_err(|e| Error::io(&lexicon_path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::{aggregate, LabelingScheme};
    use crate::baselines::PolarityLexicon;
    use crate::corpus::{apply_filters, FilterConfig};

    fn small() -> SyntheticConfig {
        SyntheticConfig { kept: 600, retweets: 40, url_messages: 30, blacklisted: 20, ..SyntheticConfig::default() }
    }

    #[test]
    fn generation_is_seeded() {
        assert_eq!(generate(&small()).unwrap(), generate(&small()).unwrap());
        let other = SyntheticConfig { seed: 7, ..small() };
        assert_ne!(generate(&small()).unwrap(), generate(&other).unwrap());
    }

    #[test]
    fn filters_remove_exactly_the_noise() {
        let config = small();
        let corpus = generate(&config).unwrap();
        let (kept, report) = apply_filters(&corpus.tweets, &FilterConfig::default());
        assert_eq!(report.before, 690);
        assert_eq!(kept.len(), config.kept);
        let dataset = aggregate(&corpus.annotations, &kept, LabelingScheme::Polarity).unwrap();
        assert_eq!(dataset.strict.len() + dataset.lax.len() + dataset.one.len(), config.kept);
        let negatives = dataset.strict.iter().filter(|i| i.label == "Negative").count() as f64;
        let rate = negatives / dataset.strict.len() as f64;
        assert!((0.10..0.20).contains(&rate), "{rate}");
    }

    #[test]
    fn demo_lexicon_parses() {
        assert_eq!(PolarityLexicon::parse(DEMO_LEXICON).unwrap().len(), 14);
    }

    #[test]
    fn bundled_data_matches_generator() {
        let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data");
        let dir = tempfile::tempdir().unwrap();
        write_bundle(&generate(&SyntheticConfig::default()).unwrap(), dir.path()).unwrap();
        for name in [TWEETS_FILE, ANNOTATIONS_FILE, LEXICON_FILE] {
            let bundled = fs::read(data.join(name)).unwrap();
            let fresh = fs::read(dir.path().join(name)).unwrap();
            assert!(bundled == fresh, "{name} differs from generator output");
        }
    }
}
