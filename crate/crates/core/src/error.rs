use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid point ({x}, {y}): need finite coordinates with y > 0")]
    InvalidPoint { x: f64, y: f64 },
    #[error("matrix determinant {det} is not 1")]
    InvalidIsometry { det: f64 },
    #[error("geodesic endpoints coincide")]
    DegenerateGeodesic,
    #[error("isometry is not hyperbolic (trace {trace})")]
    NotHyperbolic { trace: f64 },
    #[error("geodesics are not hyperparallel")]
    NotHyperparallel,
    #[error("target geodesic is not perpendicular to the projection axis")]
    NotPerpendicular,
    #[error("strip center does not lie on the strip axis")]
    OffAxis,
    #[error("strip width must be positive, got {eps}")]
    NonPositiveWidth { eps: f64 },
    #[error("boundary lengths must be positive, got {0:?}")]
    NonPositiveLength(Vec<f64>),
    #[error("boundary trace {kappa} has |trace| <= 2")]
    BoundaryNotHyperbolic { kappa: f64 },
    #[error("unknown generator index {0}")]
    UnknownGenerator(usize),
    #[error("invalid slope {p}/{q}")]
    InvalidSlope { p: i64, q: i64 },
    #[error("cannot parse group word {0:?}")]
    InvalidWord(String),
    #[error("holonomy is not discrete: word {word} has trace {trace}")]
    NotDiscrete { word: String, trace: f64 },
    #[error("unsupported topology (genus {genus}, {boundary} boundary components)")]
    UnsupportedTopology { genus: u32, boundary: u32 },
    #[error("basepoint lies inside wall {coset}")]
    BasepointInWall { coset: String },
    #[error("segment is tangent to wall {coset}")]
    TangentWall { coset: String },
    #[error("strip of width {eps} around {arc} is not embedded")]
    StripNotEmbedded { arc: String, eps: f64 },
    #[error("wall search for {word} did not saturate at radius {radius}")]
    NonConvergedWalls { word: String, radius: usize },
    #[error("surfaces have different topology or generator schema")]
    TopologyMismatch,
    #[error("no classes to take a supremum over")]
    EmptyClassSet,
    #[error("configuration error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// Variant name, e.g. `StripNotEmbedded`.
    pub fn kind(&self) -> String {
        let debug = format!("{self:?}");
        debug
            .split(|c: char| !c.is_alphanumeric())
            .next()
            .unwrap_or_default()
            .to_string()
    }
}
