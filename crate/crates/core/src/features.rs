//! Twitter-aware tokenization and binary n-gram feature vectors.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TokenKind {
    Word,
    Punctuation,
    Mention,
    Hashtag,
    UrlToken,
    Emoticon,
    Emoji,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub kind: TokenKind,
}

impl Token {
    fn new(surface: String, kind: TokenKind) -> Self {
        Token { surface, kind }
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.surface)
    }
}

/// Emoticons recognized as single tokens, longest first so prefixes lose.
pub const EMOTICONS: &[&str] = &[
    ":-)", ":-(", ":-d", ":-p", ";-)", "-.-", ":')", ":'(", "^^", ":)", ":(", ":d", ":p", ";)",
    ":o", ":/", ":s", ":|", "<3", "xd",
];

/// Emoji and pictograph code points.
pub fn is_emoji(c: char) -> bool {
    matches!(c as u32,
        0x1F000..=0x1FAFF   // mahjong, cards, enclosed, pictographs, emoticons, transport, symbols
        | 0x2600..=0x27BF   // misc symbols, dingbats
        | 0x2300..=0x23FF   // misc technical (watch, hourglass)
        | 0x2B00..=0x2BFF   // arrows, stars
        | 0x2190..=0x21FF   // arrows
        | 0x3030 | 0x303D | 0x3297 | 0x3299
        | 0x00A9 | 0x00AE | 0x203C | 0x2049 | 0x2122 | 0x2139
    )
}

/// Code points that attach to a preceding emoji: variation selectors and skin tones.
fn is_emoji_modifier(c: char) -> bool {
    matches!(c as u32, 0xFE0E | 0xFE0F | 0x1F3FB..=0x1F3FF | 0x20E3)
}

fn is_separator(c: char) -> bool {
    c.is_whitespace() || c.is_control() || c == '\u{200D}' || c == '\u{200B}'
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

fn is_mention_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn is_punct(c: char) -> bool {
    !is_separator(c) && !is_word_char(c) && !is_emoji(c) && !is_emoji_modifier(c)
}

struct Scanner<'a> {
    chars: &'a [char],
}

impl Scanner<'_> {
    fn starts_with_ci(&self, pos: usize, pat: &str) -> bool {
        let mut i = pos;
        for p in pat.chars() {
            match self.chars.get(i) {
                Some(c) if c.to_lowercase().eq(p.to_lowercase()) => i += 1,
                _ => return false,
            }
        }
        true
    }

    fn url_at(&self, pos: usize) -> Option<usize> {
        let marker = ["https://", "http://", "www."]
            .into_iter()
            .find(|m| self.starts_with_ci(pos, m))?;
        let start_rest = pos + marker.chars().count();
        if !self.chars.get(start_rest).is_some_and(|c| !is_separator(*c)) {
            return None;
        }
        let end = (start_rest..self.chars.len())
            .find(|&i| is_separator(self.chars[i]))
            .unwrap_or(self.chars.len());
        Some(end)
    }

    fn tagged_at(&self, pos: usize, sigil: char) -> Option<usize> {
        if self.chars[pos] != sigil {
            return None;
        }
        let end = (pos + 1..self.chars.len())
            .find(|&i| !is_mention_char(self.chars[i]))
            .unwrap_or(self.chars.len());
        (end > pos + 1).then_some(end)
    }

    fn emoticon_at(&self, pos: usize) -> Option<usize> {
        EMOTICONS.iter().find_map(|emo| {
            if !self.starts_with_ci(pos, emo) {
                return None;
            }
            let end = pos + emo.chars().count();
            let last_alpha = emo.chars().last().is_some_and(char::is_alphanumeric);
            let first_alpha = emo.chars().next().is_some_and(char::is_alphanumeric);
            // Letter-based emoticons must not glue onto a word (":dag", "xdxd", "taxdienst").
            if last_alpha && self.chars.get(end).is_some_and(|c| is_word_char(*c)) {
                return None;
            }
            if first_alpha && pos > 0 && is_word_char(self.chars[pos - 1]) {
                return None;
            }
            Some(end)
        })
    }

    fn emoji_at(&self, pos: usize) -> Option<usize> {
        if !is_emoji(self.chars[pos]) {
            return None;
        }
        let mut end = pos + 1;
        while self.chars.get(end).is_some_and(|c| is_emoji_modifier(*c)) {
            end += 1;
        }
        Some(end)
    }

    /// A token other than punctuation or a plain word starts here.
    fn special_at(&self, pos: usize) -> Option<(usize, TokenKind)> {
        if let Some(end) = self.url_at(pos) {
            return Some((end, TokenKind::UrlToken));
        }
        if let Some(end) = self.tagged_at(pos, '@') {
            return Some((end, TokenKind::Mention));
        }
        if let Some(end) = self.tagged_at(pos, '#') {
            return Some((end, TokenKind::Hashtag));
        }
        if let Some(end) = self.emoticon_at(pos) {
            return Some((end, TokenKind::Emoticon));
        }
        if let Some(end) = self.emoji_at(pos) {
            return Some((end, TokenKind::Emoji));
        }
        None
    }
}

/// Split a message into lowercased tokens.
///
/// At each position the rules fire in a fixed order: URL, mention, hashtag,
/// emoticon, emoji, punctuation run, word run.
pub fn tokenize(text: &str) -> Vec<Token> {
    let chars: Vec<char> = text.chars().collect();
    let scanner = Scanner { chars: &chars };
    let mut tokens = Vec::new();
    let mut pos = 0;
    let lower = |s: &[char]| s.iter().flat_map(|c| c.to_lowercase()).collect::<String>();

    while pos < chars.len() {
        let c = chars[pos];
        if is_separator(c) {
            pos += 1;
            continue;
        }
        if let Some((end, kind)) = scanner.special_at(pos) {
            let surface = if kind == TokenKind::Emoji {
                chars[pos..end].iter().collect()
            } else {
                lower(&chars[pos..end])
            };
            tokens.push(Token::new(surface, kind));
            pos = end;
            continue;
        }
        if is_word_char(c) {
            let mut end = pos + 1;
            while end < chars.len()
                && is_word_char(chars[end])
                && scanner.url_at(end).is_none()
                && scanner.emoticon_at(end).is_none()
            {
                end += 1;
            }
            tokens.push(Token::new(lower(&chars[pos..end]), TokenKind::Word));
            pos = end;
            continue;
        }
        if is_emoji_modifier(c) {
            // Stray modifier with no emoji base.
            pos += 1;
            continue;
        }
        let mut end = pos + 1;
        while end < chars.len() && is_punct(chars[end]) && scanner.special_at(end).is_none() {
            end += 1;
        }
        tokens.push(Token::new(lower(&chars[pos..end]), TokenKind::Punctuation));
        pos = end;
    }
    tokens
}

/// Separator between the tokens of an n-gram; tokens never contain it.
pub const NGRAM_SEPARATOR: char = '\u{1f}';

pub const MAX_NGRAM: usize = 3;

/// All contiguous 1-, 2- and 3-grams: unigrams first, then bigrams, then trigrams.
pub fn extract_ngrams(tokens: &[Token]) -> Vec<String> {
    let mut out = Vec::new();
    for n in 1..=MAX_NGRAM {
        for window in tokens.windows(n) {
            let mut gram = String::new();
            for (i, t) in window.iter().enumerate() {
                if i > 0 {
                    gram.push(NGRAM_SEPARATOR);
                }
                gram.push_str(&t.surface);
            }
            out.push(gram);
        }
    }
    out
}

pub const DEFAULT_VOCABULARY_SIZE: usize = 15_000;

/// N-gram to feature index mapping; indices follow document-frequency rank.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, usize>,
}

impl TryFrom<Vec<String>> for Vocabulary {
    type Error = Error;

    fn try_from(terms: Vec<String>) -> Result<Self> {
        Vocabulary::from_terms(terms)
    }
}

impl From<Vocabulary> for Vec<String> {
    fn from(vocab: Vocabulary) -> Self {
        vocab.terms
    }
}

impl Vocabulary {
    /// Build from terms listed in index order.
    pub fn from_terms(terms: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(terms.len());
        for (i, t) in terms.iter().enumerate() {
            if index.insert(t.clone(), i).is_some() {
                return Err(Error::InvalidRecord(format!("duplicate vocabulary entry {t:?}")));
            }
        }
        Ok(Vocabulary { terms, index })
    }

    /// Keep the `max_size` n-grams with the highest document frequency, ties broken
    /// by ascending n-gram order.
    pub fn build<D: AsRef<[Token]>>(training_docs: &[D], max_size: usize) -> Self {
        let mut df: HashMap<String, usize> = HashMap::new();
        for doc in training_docs {
            let unique: HashSet<String> = extract_ngrams(doc.as_ref()).into_iter().collect();
            for gram in unique {
                *df.entry(gram).or_default() += 1;
            }
        }
        let mut ranked: Vec<(String, usize)> = df.into_iter().collect();
        ranked.sort_unstable_by(|(ga, da), (gb, db)| db.cmp(da).then_with(|| ga.cmp(gb)));
        ranked.truncate(max_size);
        let terms = ranked.into_iter().map(|(g, _)| g).collect();
        Vocabulary::from_terms(terms).expect("ranked n-grams are unique")
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn get(&self, gram: &str) -> Option<usize> {
        self.index.get(gram).copied()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    /// Write `ngram<TAB>index` lines with the separator escaped as `\u001f`.
    pub fn write_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (i, term) in self.terms.iter().enumerate() {
            writeln!(out, "{}\t{}", escape_term(term), i)?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(reader: R) -> Result<Self> {
        let mut terms = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.map_err(|e| Error::Parse {
                line: line_no,
                message: e.to_string(),
            })?;
            if line.is_empty() {
                continue;
            }
            let (term, index) = line.rsplit_once('\t').ok_or_else(|| Error::Parse {
                line: line_no,
                message: "expected ngram<TAB>index".into(),
            })?;
            let index: usize = index.parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("bad index {index:?}"),
            })?;
            if index != terms.len() {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected index {}, found {index}", terms.len()),
                });
            }
            terms.push(unescape_term(term).ok_or_else(|| Error::Parse {
                line: line_no,
                message: "bad escape sequence".into(),
            })?);
        }
        Vocabulary::from_terms(terms)
    }
}

fn escape_term(term: &str) -> String {
    let mut out = String::with_capacity(term.len());
    for c in term.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            NGRAM_SEPARATOR => out.push_str("\\u001f"),
            c => out.push(c),
        }
    }
    out
}

fn unescape_term(text: &str) -> Option<String> {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(pos) = rest.find('\\') {
        out.push_str(&rest[..pos]);
        rest = &rest[pos..];
        if let Some(r) = rest.strip_prefix("\\\\") {
            out.push('\\');
            rest = r;
        } else {
            rest = rest.strip_prefix("\\u001f")?;
            out.push(NGRAM_SEPARATOR);
        }
    }
    out.push_str(rest);
    Some(out)
}

/// Sparse binary feature vector: sorted, unique feature indices.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FeatureVector {
    indices: Vec<usize>,
}

impl FeatureVector {
    /// Sorts and deduplicates the given indices.
    pub fn new(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        FeatureVector { indices }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn check_bounds(&self, size: usize) -> Result<()> {
        match self.indices.last() {
            Some(&index) if index >= size => Err(Error::FeatureOutOfRange { index, size }),
            _ => Ok(()),
        }
    }
}

pub fn vectorize(tokens: &[Token], vocab: &Vocabulary) -> FeatureVector {
    FeatureVector::new(
        extract_ngrams(tokens)
            .iter()
            .filter_map(|g| vocab.get(g))
            .collect(),
    )
}

/// Document frequencies of every n-gram, sorted by n-gram.
pub fn document_frequencies<D: AsRef<[Token]>>(docs: &[D]) -> BTreeMap<String, usize> {
    let mut df = BTreeMap::new();
    for doc in docs {
        let unique: HashSet<String> = extract_ngrams(doc.as_ref()).into_iter().collect();
        for gram in unique {
            *df.entry(gram).or_insert(0) += 1;
        }
    }
    df
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn surfaces(text: &str) -> Vec<String> {
        tokenize(text).into_iter().map(|t| t.surface).collect()
    }

    fn kinds(text: &str) -> Vec<TokenKind> {
        tokenize(text).into_iter().map(|t| t.kind).collect()
    }

    fn words(ws: &[&str]) -> Vec<Token> {
        ws.iter().map(|w| Token::new(w.to_string(), TokenKind::Word)).collect()
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(surfaces("Vaccinatie werkt!"), ["vaccinatie", "werkt", "!"]);
        assert_eq!(
            surfaces("@USER ik ben tegen #vaccinatie :("),
            ["@user", "ik", "ben", "tegen", "#vaccinatie", ":("]
        );
        use TokenKind::*;
        assert_eq!(kinds("@USER ik #x :("), [Mention, Word, Hashtag, Emoticon]);
        assert!(tokenize("").is_empty());
        assert!(tokenize("   \t\n").is_empty());
    }

    #[test]
    fn urls_emoji_and_emoticons() {
        let toks = tokenize("Lees HTTPS://Nos.nl/a?b=1 nu 😡😡 <3 -.- :D");
        let got: Vec<(&str, TokenKind)> = toks.iter().map(|t| (t.surface.as_str(), t.kind)).collect();
        assert_eq!(
            got,
            [
                ("lees", TokenKind::Word),
                ("https://nos.nl/a?b=1", TokenKind::UrlToken),
                ("nu", TokenKind::Word),
                ("😡", TokenKind::Emoji),
                ("😡", TokenKind::Emoji),
                ("<3", TokenKind::Emoticon),
                ("-.-", TokenKind::Emoticon),
                (":d", TokenKind::Emoticon),
            ]
        );
        assert_eq!(surfaces("👍🏽 top"), ["👍🏽", "top"]);
    }

    #[test]
    fn punctuation_runs_split_from_words() {
        assert_eq!(surfaces("Echt??! Nee..."), ["echt", "??!", "nee", "..."]);
        assert_eq!(surfaces("tegen:("), ["tegen", ":("]);
        assert_eq!(surfaces("info@rivm.nl"), ["info", "@rivm", ".", "nl"]);
        assert_eq!(surfaces("a # b @ c"), ["a", "#", "b", "@", "c"]);
        assert_eq!(surfaces(":dag taxdienst"), [":", "dag", "taxdienst"]);
    }

    #[test]
    fn separator_never_survives_tokenization() {
        let text = format!("a{NGRAM_SEPARATOR}b");
        assert_eq!(surfaces(&text), ["a", "b"]);
    }

    #[test]
    fn ngram_examples() {
        let sep = NGRAM_SEPARATOR;
        assert_eq!(
            extract_ngrams(&words(&["a", "b", "c"])),
            ["a".to_string(), "b".into(), "c".into(), format!("a{sep}b"), format!("b{sep}c"), format!("a{sep}b{sep}c")]
        );
        assert_eq!(extract_ngrams(&words(&["a"])), ["a"]);
        assert!(extract_ngrams(&[]).is_empty());
    }

    #[test]
    fn vocabulary_ranking() {
        let docs = vec![words(&["vaccin"]), words(&["vaccin", "griep"]), words(&["vaccin"])];
        let vocab = Vocabulary::build(&docs, 1);
        assert_eq!(vocab.terms(), ["vaccin"]);
        assert_eq!(vocab.get("vaccin"), Some(0));

        let docs = vec![words(&["bb"]), words(&["aa"]), words(&["aa", "bb"])];
        assert_eq!(Vocabulary::build(&docs, 1).terms(), ["aa"]);

        let all = Vocabulary::build(&docs, 100);
        assert_eq!(all.len(), 3);
    }

    #[test]
    fn vectorize_examples() {
        let vocab = Vocabulary::from_terms(vec!["vaccin".into()]).unwrap();
        assert_eq!(vectorize(&words(&["vaccin", "en", "vaccin"]), &vocab).indices(), [0]);
        assert!(vectorize(&words(&["griep"]), &vocab).is_empty());
        assert_eq!(FeatureVector::new(vec![3, 1, 1]).indices(), [1, 3]);
    }

    #[test]
    fn vocabulary_text_format() {
        let docs = vec![tokenize("a \\ b c"), tokenize("a b")];
        let vocab = Vocabulary::build(&docs, 100);
        let mut buf = Vec::new();
        vocab.write_text(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("a\t0\nb\t1\n\\\\\t2\n\\\\\\u001fb\t3\n"), "{text}");
        assert!(!text.contains(NGRAM_SEPARATOR));
        let back = Vocabulary::read_text(buf.as_slice()).unwrap();
        assert_eq!(back, vocab);
        assert!(Vocabulary::read_text("a\t1\n".as_bytes()).is_err());
    }

    fn arb_text() -> impl Strategy<Value = String> {
        let pieces = prop::sample::select(vec![
            "vaccin", "Prik", "@Rivm", "#HPV", ":)", ":-(", ";)", "<3", "-.-", ":D", "!!", "?", ".",
            "http://x.nl/a", "www.ggd.nl", "😷", "👍🏽", "'s", "-", "#", "@", "x", "3", "é", "_",
            " ", "  ", "\t",
        ]);
        prop::collection::vec(pieces, 0..20).prop_map(|v| v.concat())
    }

    proptest! {
        #[test]
        fn tokenization_is_idempotent(text in arb_text()) {
            let first: Vec<String> = tokenize(&text).into_iter().map(|t| t.surface).collect();
            for s in &first {
                prop_assert!(!s.is_empty());
                prop_assert!(!s.chars().any(char::is_whitespace));
            }
            let again: Vec<String> = tokenize(&first.join(" ")).into_iter().map(|t| t.surface).collect();
            prop_assert_eq!(first, again);
        }

        #[test]
        fn vectors_stay_in_vocabulary(
            train in prop::collection::vec(arb_text(), 1..10),
            probe in arb_text(),
            max_size in 1usize..30,
        ) {
            let docs: Vec<Vec<Token>> = train.iter().map(|t| tokenize(t)).collect();
            let vocab = Vocabulary::build(&docs, max_size);
            prop_assert!(vocab.len() <= max_size);
            let v = vectorize(&tokenize(&probe), &vocab);
            prop_assert!(v.check_bounds(vocab.len()).is_ok());
            prop_assert!(v.indices().windows(2).all(|w| w[0] < w[1]));
        }

        #[test]
        fn removing_a_document_never_raises_frequency(
            train in prop::collection::vec(arb_text(), 2..10),
            drop in 0usize..10,
        ) {
            let docs: Vec<Vec<Token>> = train.iter().map(|t| tokenize(t)).collect();
            let full = document_frequencies(&docs);
            let mut fewer = docs.clone();
            fewer.remove(drop % docs.len());
            for (gram, df) in document_frequencies(&fewer) {
                prop_assert!(df <= full[&gram]);
            }
        }
    }
}
