//! Domain types, annotation and query ingestion, ground-truth boxes.

mod annotation;
mod geometry;
mod taxonomy;

pub use annotation::{
    ground_truth_box, parse_query, parse_sequence, query_from_target, serialize_sequence,
    Attributes, BodyMarkers, FrameAnnotation, PersonAnnotation, SemanticQuery, SequenceAnnotation,
};
pub use geometry::{BBox, ImagePoint};
pub use taxonomy::{Color, Difficulty, Gender, HeightClass, LegType, TorsoType};
