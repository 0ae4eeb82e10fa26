use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex, MutexGuard, RwLock};

use vaxstance_core::annotation::{
    compose_training, LabeledDataset, LabeledInstance, LabelingScheme, Reliability, TrainingVariant, NEGATIVE,
};
use vaxstance_core::corpus::FilterConfig;
use vaxstance_core::models::{load_model, save_model, Algorithm, ModelArtifact};
use vaxstance_core::pipeline::{train_artifact, ExperimentConfig};

use crate::error::ApiError;
use crate::store::{FeedbackEntry, ReviewStore, Verdict};

pub const MODEL_FILE: &str = "model.bin";

/// Everything `serve` is configured with.
#[derive(Debug, Clone)]
pub struct ServiceConfig {
    /// Holds the queue, feedback log and retrained models.
    pub state_dir: PathBuf,
    pub model_path: Option<PathBuf>,
    /// Aggregated dataset used as the base of every retrain.
    pub base_dataset: Option<PathBuf>,
    pub variant: TrainingVariant,
    pub algorithm: Algorithm,
    /// Flag when the Negative pseudo-probability reaches this; `None` flags argmax Negative.
    pub flag_threshold: Option<f64>,
    pub filter: FilterConfig,
    pub experiment: ExperimentConfig,
    pub static_dir: Option<PathBuf>,
}

impl ServiceConfig {
    pub fn new(state_dir: impl Into<PathBuf>) -> Self {
        ServiceConfig {
            state_dir: state_dir.into(),
            model_path: None,
            base_dataset: None,
            variant: TrainingVariant::StrictLax,
            algorithm: Algorithm::Svm,
            flag_threshold: None,
            filter: FilterConfig::default(),
            experiment: ExperimentConfig::default(),
            static_dir: None,
        }
    }
}

#[derive(Debug)]
pub struct ActiveModel {
    pub version: u64,
    pub artifact: ModelArtifact,
}

/// Shared state behind every handler.
#[derive(Debug)]
pub struct AppState {
    pub config: ServiceConfig,
    model: RwLock<Option<Arc<ActiveModel>>>,
    store: Mutex<ReviewStore>,
    base: Option<LabeledDataset>,
    retraining: Arc<AtomicBool>,
}

/// Held while a retrain runs; releases the slot on drop.
#[derive(Debug)]
pub struct RetrainGuard(Arc<AtomicBool>);

impl Drop for RetrainGuard {
    fn drop(&mut self) {
        self.0.store(false, Ordering::Release);
    }
}

#[derive(Debug, thiserror::Error)]
pub enum StartupError {
    #[error(transparent)]
    Core(#[from] vaxstance_core::Error),
    #[error(transparent)]
    Store(#[from] crate::store::StoreError),
}

impl AppState {
    /// Load the model (explicit path first, then a previously retrained one),
    /// the base dataset and the persisted review state.
    pub fn open(config: ServiceConfig) -> Result<Self, StartupError> {
        let store = ReviewStore::open(&config.state_dir)?;
        let saved = config.state_dir.join(MODEL_FILE);
        let model_path = config.model_path.clone().or_else(|| saved.exists().then_some(saved));
        let model = match model_path {
            Some(path) => {
                log::info!("loading model from {}", path.display());
                Some(Arc::new(ActiveModel { version: 1, artifact: load_model(&path)? }))
            }
            None => None,
        };
        let base = config.base_dataset.as_deref().map(LabeledDataset::load).transpose()?;
        Ok(AppState {
            config,
            model: RwLock::new(model),
            store: Mutex::new(store),
            base,
            retraining: Arc::new(AtomicBool::new(false)),
        })
    }

    /// Snapshot of the active model; callers keep using it even if a retrain swaps it.
    pub fn model(&self) -> Option<Arc<ActiveModel>> {
        self.model.read().expect("model lock poisoned").clone()
    }

    pub fn install_model(&self, artifact: ModelArtifact) -> u64 {
        let mut slot = self.model.write().expect("model lock poisoned");
        let version = slot.as_ref().map_or(1, |m| m.version + 1);
        *slot = Some(Arc::new(ActiveModel { version, artifact }));
        version
    }

    pub fn store(&self) -> MutexGuard<'_, ReviewStore> {
        self.store.lock().expect("store lock poisoned")
    }

    /// Claim the retrain slot; `None` when a retrain is already running.
    pub fn try_begin_retrain(&self) -> Option<RetrainGuard> {
        self.retraining
            .compare_exchange(false, true, Ordering::AcqRel, Ordering::Acquire)
            .ok()
            .map(|_| RetrainGuard(self.retraining.clone()))
    }

    /// Base training data plus every verdict as a strict instance.
    pub fn training_data(&self) -> Result<(LabelingScheme, Vec<LabeledInstance>), ApiError> {
        let base = self
            .base
            .as_ref()
            .ok_or_else(|| ApiError::Unavailable("no base dataset configured for retraining".into()))?;
        let mut instances = compose_training(base, self.config.variant);
        let feedback: Vec<FeedbackEntry> = self.store().feedback().to_vec();
        instances.extend(feedback.into_iter().map(|f| LabeledInstance {
            tweet_id: f.tweet_id,
            text: f.text,
            label: match f.verdict {
                Verdict::Negative => NEGATIVE.to_string(),
                Verdict::Other => base.scheme.catch_all().to_string(),
            },
            reliability: Reliability::Strict,
        }));
        Ok((base.scheme, instances))
    }

    /// Train on base data plus feedback, persist, and swap the active model.
    pub fn retrain(&self) -> Result<(u64, usize), ApiError> {
        let (scheme, instances) = self.training_data()?;
        let artifact = train_artifact(scheme, &instances, self.config.algorithm, &self.config.experiment)
            .map_err(|e| ApiError::Internal(format!("training failed: {e}")))?;
        save_model(&artifact, &self.config.state_dir.join(MODEL_FILE))
            .map_err(|e| ApiError::Internal(format!("could not save model: {e}")))?;
        let version = self.install_model(artifact);
        log::info!("retrained on {} instances, model version {version}", instances.len());
        Ok((version, instances.len()))
    }
}
