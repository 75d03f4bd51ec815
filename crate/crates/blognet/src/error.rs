use thiserror::Error;

/// Errors produced by corpus ingestion, graph construction and inference.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty document id")]
    EmptyDocumentId,

    #[error("duplicate document id `{0}`")]
    DuplicateDocumentId(String),

    #[error("vocabulary empty under policy")]
    EmptyVocabulary,

    #[error("undefined similarity: both word sets are empty")]
    UndefinedSimilarity,

    #[error("invalid store threshold {0}: must lie in (0, 1]")]
    InvalidThreshold(f64),

    #[error("no edges to bin")]
    NoEdges,

    #[error("insufficient support for fit: {got} usable bins, need at least 3")]
    InsufficientFitSupport { got: usize },

    #[error("view below stored resolution: gamma {gamma} < store threshold {store_threshold}")]
    ViewBelowResolution { gamma: f64, store_threshold: f64 },

    #[error("modularity undefined on an edgeless graph")]
    EdgelessGraph,

    #[error("vertex `{0}` is not covered by the partition")]
    UncoveredVertex(String),

    #[error("partition refers to unknown vertex `{0}`")]
    UnknownVertex(String),

    #[error("partitions cover different vertex sets")]
    PartitionMismatch,

    #[error("oracle limit: {0} vertices exceed the exhaustive maximum of 10")]
    OracleLimit(usize),

    #[error("dendrogram leaves do not match graph vertices")]
    LeafSetMismatch,

    #[error("graph has {components} connected components; fit each component separately")]
    Disconnected { components: usize },

    #[error("hierarchy fitting needs at least {need} vertices, got {got}")]
    TooFewVertices { got: usize, need: usize },

    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    #[error("{path}:{line}: malformed record: {msg}")]
    MalformedRecord {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("no input documents in {0}")]
    NoInput(String),

    #[error("newick parse error at byte {pos}: {msg}")]
    NewickParse { pos: usize, msg: String },

    #[error("failed to read {path}: {source}")]
    ReadFile {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
