//! Versioned binary model files.
//!
//! Layout (little endian):
//!
//! ```text
//! magic "VXSTANCE" | version u32 | kind u8 | payload length u64 | payload | sha256(payload)
//! ```
//!
//! The payload holds the labeling scheme, vocabulary, class list and the
//! learner's parameters. Floats are stored as raw IEEE-754 bits so a reload
//! reproduces scores exactly.

use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use super::{Classifier, MnbModel, Prediction, SvmModel};
use crate::annotation::LabelingScheme;
use crate::error::{Error, Result};
use crate::features::{tokenize, vectorize, Vocabulary};
use crate::models::Algorithm;

pub const MAGIC: &[u8; 8] = b"VXSTANCE";
pub const FORMAT_VERSION: u32 = 1;

const KIND_MNB: u8 = 1;
const KIND_SVM: u8 = 2;

/// Everything needed to classify raw text.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelArtifact {
    pub scheme: LabelingScheme,
    pub vocabulary: Vocabulary,
    pub classifier: Classifier,
}

impl ModelArtifact {
    pub fn predict_text(&self, text: &str) -> Result<Prediction> {
        let vec = vectorize(&tokenize(text), &self.vocabulary);
        self.classifier.predict(&vec)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut payload = Writer::default();
        payload.str(self.scheme.name());
        payload.u64(self.vocabulary.len() as u64);
        for term in self.vocabulary.terms() {
            payload.str(term);
        }
        let classes = self.classifier.classes();
        payload.u64(classes.len() as u64);
        for c in classes {
            payload.str(c);
        }
        let kind = match &self.classifier {
            Classifier::Mnb(m) => {
                payload.f64(m.smoothing_alpha);
                payload.f64(m.floor);
                payload.f64s(&m.log_prior);
                for row in &m.log_likelihood {
                    payload.f64s(row);
                }
                KIND_MNB
            }
            Classifier::Svm(m) => {
                payload.f64(m.c);
                payload.f64s(&m.bias);
                for row in &m.weights {
                    payload.f64s(row);
                }
                KIND_SVM
            }
        };
        let payload = payload.0;
        let mut out = Vec::with_capacity(payload.len() + 53);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.push(kind);
        out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
        out.extend_from_slice(&payload);
        out.extend_from_slice(Sha256::digest(&payload).as_slice());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        Self::decode(bytes, None)
    }

    /// Decode, failing with a kind-mismatch error when the file holds the other learner.
    pub fn from_bytes_expecting(bytes: &[u8], expected: Algorithm) -> Result<Self> {
        Self::decode(bytes, Some(expected))
    }

    fn decode(bytes: &[u8], expected: Option<Algorithm>) -> Result<Self> {
        let mut header = Reader(bytes);
        if header.take(8)? != MAGIC {
            return Err(Error::CorruptModel("bad magic bytes".into()));
        }
        let version = header.u32()?;
        if version != FORMAT_VERSION {
            return Err(Error::VersionMismatch {
                found: version,
                expected: FORMAT_VERSION,
            });
        }
        let kind = match header.u8()? {
            KIND_MNB => Algorithm::Mnb,
            KIND_SVM => Algorithm::Svm,
            other => return Err(Error::CorruptModel(format!("unknown model kind {other}"))),
        };
        if let Some(expected) = expected {
            if expected != kind {
                return Err(Error::KindMismatch {
                    expected: expected.name(),
                    found: kind.name(),
                });
            }
        }
        let len = header.u64()? as usize;
        let payload = header.take(len)?;
        let checksum = header.take(32)?;
        if !header.0.is_empty() {
            return Err(Error::CorruptModel("trailing bytes after checksum".into()));
        }
        if Sha256::digest(payload).as_slice() != checksum {
            return Err(Error::CorruptModel("checksum mismatch".into()));
        }

        let mut r = Reader(payload);
        let scheme: LabelingScheme = r
            .str()?
            .parse()
            .map_err(|e: Error| Error::CorruptModel(e.to_string()))?;
        let n_terms = r.len()?;
        let terms = (0..n_terms).map(|_| r.str()).collect::<Result<Vec<_>>>()?;
        let vocabulary =
            Vocabulary::from_terms(terms).map_err(|e| Error::CorruptModel(e.to_string()))?;
        let n_classes = r.len()?;
        let classes = (0..n_classes).map(|_| r.str()).collect::<Result<Vec<_>>>()?;
        let v = vocabulary.len();
        let classifier = match kind {
            Algorithm::Mnb => {
                let smoothing_alpha = r.f64()?;
                let floor = r.f64()?;
                let log_prior = r.f64s(n_classes)?;
                let log_likelihood = (0..n_classes).map(|_| r.f64s(v)).collect::<Result<_>>()?;
                Classifier::Mnb(MnbModel {
                    classes,
                    log_prior,
                    log_likelihood,
                    smoothing_alpha,
                    floor,
                })
            }
            Algorithm::Svm => {
                let c = r.f64()?;
                let bias = r.f64s(n_classes)?;
                let weights = (0..n_classes).map(|_| r.f64s(v)).collect::<Result<_>>()?;
                Classifier::Svm(SvmModel {
                    classes,
                    weights,
                    bias,
                    c,
                })
            }
        };
        if !r.0.is_empty() {
            return Err(Error::CorruptModel("unexpected bytes at end of payload".into()));
        }
        Ok(ModelArtifact {
            scheme,
            vocabulary,
            classifier,
        })
    }
}

pub fn save_model(artifact: &ModelArtifact, path: &Path) -> Result<()> {
    fs::write(path, artifact.to_bytes()).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<ModelArtifact> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    ModelArtifact::from_bytes(&bytes)
}

#[derive(Default)]
struct Writer(Vec<u8>);

impl Writer {
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }

    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_bits().to_le_bytes());
    }

    fn f64s(&mut self, vs: &[f64]) {
        vs.iter().for_each(|v| self.f64(*v));
    }

    fn str(&mut self, s: &str) {
        self.u64(s.len() as u64);
        self.0.extend_from_slice(s.as_bytes());
    }
}

struct Reader<'a>(&'a [u8]);

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.0.len() < n {
            return Err(Error::CorruptModel("unexpected end of file".into()));
        }
        let (head, rest) = self.0.split_at(n);
        self.0 = rest;
        Ok(head)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    /// A count that must fit in the remaining bytes.
    fn len(&mut self) -> Result<usize> {
        let n = self.u64()?;
        if n > self.0.len() as u64 {
            return Err(Error::CorruptModel(format!("implausible length {n}")));
        }
        Ok(n as usize)
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_bits(self.u64()?))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        (0..n).map(|_| self.f64()).collect()
    }

    fn str(&mut self) -> Result<String> {
        let n = self.len()?;
        String::from_utf8(self.take(n)?.to_vec())
            .map_err(|_| Error::CorruptModel("invalid UTF-8 string".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureVector;
    use crate::models::{train_mnb, train_svm, MnbConfig, SvmConfig, TrainingSet};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn artifacts() -> Vec<ModelArtifact> {
        let texts = [
            ("vaccins zijn gif", "Negative"),
            ("nooit meer prikken, gevaarlijk!", "Negative"),
            ("laat je kind vaccineren", "Positive"),
            ("prik gehaald vandaag :)", "Positive"),
            ("de ggd start morgen", "Neutral"),
        ];
        let docs: Vec<_> = texts.iter().map(|(t, _)| tokenize(t)).collect();
        let vocabulary = Vocabulary::build(&docs, 100);
        let data = TrainingSet::new(
            vocabulary.len(),
            docs.iter().zip(texts).map(|(d, (_, l))| (vectorize(d, &vocabulary), l)),
        )
        .unwrap();
        let mnb = train_mnb(&data, &MnbConfig::default()).unwrap();
        let svm = train_svm(&data, &SvmConfig::default()).unwrap();
        [Classifier::Mnb(mnb), Classifier::Svm(svm)]
            .into_iter()
            .map(|classifier| ModelArtifact {
                scheme: LabelingScheme::Polarity,
                vocabulary: vocabulary.clone(),
                classifier,
            })
            .collect()
    }

    #[test]
    fn round_trip_preserves_scores_bit_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for artifact in artifacts() {
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("model.bin");
            save_model(&artifact, &path).unwrap();
            let loaded = load_model(&path).unwrap();
            assert_eq!(loaded, artifact);
            let v = artifact.vocabulary.len();
            for _ in 0..100 {
                let probe = FeatureVector::new((0..rng.gen_range(0..6)).map(|_| rng.gen_range(0..v)).collect());
                let a = artifact.classifier.predict(&probe).unwrap();
                let b = loaded.classifier.predict(&probe).unwrap();
                let bits = |p: &Prediction| p.scores.iter().map(|s| s.to_bits()).collect::<Vec<_>>();
                assert_eq!(bits(&a), bits(&b));
                assert_eq!(a.label, b.label);
            }
        }
    }

    #[test]
    fn corrupt_files_are_rejected() {
        let bytes = artifacts()[0].to_bytes();
        let mut bad_magic = bytes.clone();
        bad_magic[0] = b'X';
        assert!(matches!(ModelArtifact::from_bytes(&bad_magic), Err(Error::CorruptModel(_))));

        let mut flipped = bytes.clone();
        let mid = bytes.len() / 2;
        flipped[mid] ^= 0xFF;
        assert!(matches!(ModelArtifact::from_bytes(&flipped), Err(Error::CorruptModel(_))));

        assert!(matches!(
            ModelArtifact::from_bytes(&bytes[..bytes.len() - 1]),
            Err(Error::CorruptModel(_))
        ));

        let mut version = bytes.clone();
        version[8] = 9;
        assert!(matches!(
            ModelArtifact::from_bytes(&version),
            Err(Error::VersionMismatch { found: 9, .. })
        ));
    }

    #[test]
    fn kind_mismatch_is_reported() {
        let svm_bytes = artifacts()[1].to_bytes();
        assert!(matches!(
            ModelArtifact::from_bytes_expecting(&svm_bytes, Algorithm::Mnb),
            Err(Error::KindMismatch { expected: "MNB", found: "SVM" })
        ));
        assert!(ModelArtifact::from_bytes_expecting(&svm_bytes, Algorithm::Svm).is_ok());
    }
}
