use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function it was passed to.
    #[error("domain error in {what}: {detail}")]
    Domain { what: &'static str, detail: String },

    /// The adaptive controller could not make progress.
    #[error(
        "step failure at t = {t:e} (x = {x:e}, p = {p:e}, step = {step:e}) after {steps} steps: {reason}"
    )]
    StepFailure {
        t: f64,
        x: f64,
        p: f64,
        step: f64,
        steps: u64,
        reason: &'static str,
    },

    /// A trajectory inside an ensemble failed; `index` is the sample index.
    #[error("sample {index}: {source}")]
    Sample {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("threshold bracket [{lo:e}, {hi:e}] does not cross P = {target}")]
    BracketFailure { lo: f64, hi: f64, target: f64 },

    #[error("need at least {needed} points, got {got}")]
    InsufficientData { needed: usize, got: usize },
}

impl Error {
    pub(crate) fn domain(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            what,
            detail: detail.into(),
        }
    }

    /// True for integrator failures, including those wrapped with a sample index.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::StepFailure { .. } => true,
            Error::Sample { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
