use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unknown {kind} label {label:?}")]
    Taxonomy { kind: &'static str, label: String },

    #[error("schema violation at `{path}`: {message}")]
    Schema { path: String, message: String },

    #[error("invalid annotation: {0}")]
    Annotation(String),

    #[error("degenerate box from markers {markers}: {detail}")]
    DegenerateBox { markers: String, detail: String },

    #[error("target person {0:?} is never annotated")]
    MissingTarget(String),

    #[error("invalid camera: {0}")]
    Camera(String),

    #[error("point is behind the camera (camera-frame z = {z})")]
    BehindCamera { z: f64 },

    #[error("radial distortion inversion failed (kappa1 = {kappa1}, r^2 = {r2})")]
    Distortion { kappa1: f64, r2: f64 },

    #[error("ray does not intersect the plane z = {plane_z_cm} cm")]
    NoIntersection { plane_z_cm: f64 },

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("non-finite input: {0}")]
    NonFinite(String),

    #[error("mask has no set bits")]
    EmptyMask,

    #[error("run-length code covers {actual} bits, expected {expected}")]
    RleFormat { expected: usize, actual: usize },

    #[error("invalid band ({r1}, {r2})")]
    Band { r1: f64, r2: f64 },

    #[error("classifier/provider mismatch: {0}")]
    ProviderMismatch(String),

    #[error("invalid color table: {0}")]
    ColorTable(String),

    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    #[error("frame range mismatch: {0}")]
    FrameRange(String),

    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error("unknown {kind} strategy {name:?} (available: {available})")]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        available: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
