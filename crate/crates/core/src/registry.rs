//! Name → factory registries for the pluggable strategies: detection
//! providers and classifier bundles.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::attr::{OracleColorClassifier, OracleGenderClassifier, ReferenceColorClassifier};
use crate::cascade::Classifiers;
use crate::detect::{
    DetectionProvider, DetectionRecord, OracleNoise, OracleProvider, StreamProvider,
    DEFAULT_MIN_SCORE,
};
use crate::error::{Error, Result};
use crate::model::SequenceAnnotation;

/// Everything a factory may need. Fields irrelevant to a strategy are ignored.
#[derive(Clone)]
pub struct BuildContext {
    pub sequence: Arc<SequenceAnnotation>,
    pub seed: u64,
    pub oracle_noise: OracleNoise,
    pub color_error_rate: f64,
    pub gender_error_rate: f64,
    /// Parsed detection stream, required by the `stream` provider.
    pub detection_records: Option<Arc<Vec<DetectionRecord>>>,
    pub min_score: f64,
}

impl BuildContext {
    pub fn new(sequence: Arc<SequenceAnnotation>, seed: u64) -> Self {
        Self {
            sequence,
            seed,
            oracle_noise: OracleNoise::default(),
            color_error_rate: 0.0,
            gender_error_rate: 0.0,
            detection_records: None,
            min_score: DEFAULT_MIN_SCORE,
        }
    }
}

pub type Factory<T> = Box<dyn Fn(&BuildContext) -> Result<Box<T>> + Send + Sync>;

pub struct StrategyRegistry<T: ?Sized> {
    kind: &'static str,
    entries: BTreeMap<String, Factory<T>>,
}

impl<T: ?Sized> StrategyRegistry<T> {
    pub fn new(kind: &'static str) -> Self {
        Self {
            kind,
            entries: BTreeMap::new(),
        }
    }

    /// Registers `factory` under `name`, replacing any previous entry.
    pub fn register(
        &mut self,
        name: &str,
        factory: impl Fn(&BuildContext) -> Result<Box<T>> + Send + Sync + 'static,
    ) {
        self.entries.insert(name.to_string(), Box::new(factory));
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.keys().map(String::as_str).collect()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    pub fn build(&self, name: &str, ctx: &BuildContext) -> Result<Box<T>> {
        let factory = self
            .entries
            .get(name)
            .ok_or_else(|| Error::UnknownStrategy {
                kind: self.kind,
                name: name.to_string(),
                available: self.names().join(", "),
            })?;
        factory(ctx)
    }
}

/// `oracle` (annotation-backed color and gender) and `reference` (pixel color
/// classifier plus oracle gender).
pub fn classifier_registry() -> StrategyRegistry<Classifiers> {
    let mut reg = StrategyRegistry::new("classifier");
    reg.register("oracle", |ctx| {
        Ok(Box::new(Classifiers {
            color: Box::new(OracleColorClassifier::new(
                ctx.sequence.clone(),
                ctx.color_error_rate,
                ctx.seed,
            )),
            gender: Box::new(OracleGenderClassifier::new(
                ctx.sequence.clone(),
                ctx.gender_error_rate,
                ctx.seed,
            )),
        }))
    });
    reg.register("reference", |ctx| {
        Ok(Box::new(Classifiers {
            color: Box::new(ReferenceColorClassifier::default()),
            gender: Box::new(OracleGenderClassifier::new(
                ctx.sequence.clone(),
                ctx.gender_error_rate,
                ctx.seed,
            )),
        }))
    });
    reg
}

/// `oracle` (boxes from annotations) and `stream` (precomputed detections).
pub fn detector_registry() -> StrategyRegistry<dyn DetectionProvider> {
    let mut reg: StrategyRegistry<dyn DetectionProvider> = StrategyRegistry::new("detector");
    reg.register("oracle", |ctx| {
        Ok(Box::new(OracleProvider::new(
            ctx.sequence.clone(),
            ctx.oracle_noise,
            ctx.seed,
        )))
    });
    reg.register("stream", |ctx| {
        let records = ctx.detection_records.as_ref().ok_or_else(|| {
            Error::ProviderMismatch("the stream provider needs a detections stream".into())
        })?;
        Ok(Box::new(StreamProvider::new(records, ctx.min_score)?))
    });
    reg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Difficulty;

    fn ctx() -> BuildContext {
        BuildContext::new(
            Arc::new(SequenceAnnotation {
                sequence_id: "s".into(),
                difficulty: Difficulty::Easy,
                image_size: [10, 10],
                target_person_id: "p".into(),
                frames: vec![],
            }),
            1,
        )
    }

    #[test]
    fn builtin_names() {
        assert_eq!(classifier_registry().names(), vec!["oracle", "reference"]);
        assert_eq!(detector_registry().names(), vec!["oracle", "stream"]);
        let c = classifier_registry().build("reference", &ctx()).unwrap();
        assert_eq!((c.color.name(), c.gender.name()), ("reference", "oracle"));
        assert_eq!(
            detector_registry().build("oracle", &ctx()).unwrap().name(),
            "oracle"
        );
    }

    #[test]
    fn unknown_name_lists_alternatives() {
        let err = detector_registry().build("maskrcnn", &ctx()).err().unwrap();
        assert!(err.to_string().contains("oracle, stream"), "{err}");
    }

    #[test]
    fn stream_without_records_fails() {
        assert!(matches!(
            detector_registry().build("stream", &ctx()),
            Err(Error::ProviderMismatch(_))
        ));
    }
}
