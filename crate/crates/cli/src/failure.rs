use std::fmt;

/// Process exit status for each failure class.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Kind {
    Usage,
    Data,
    Runtime,
}

impl Kind {
    pub fn code(self) -> u8 {
        match self {
            Kind::Usage => 2,
            Kind::Data => 3,
            Kind::Runtime => 4,
        }
    }
}

#[derive(Debug)]
pub struct Failure {
    pub kind: Kind,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn new(kind: Kind, error: impl Into<anyhow::Error>) -> Self {
        Failure {
            kind,
            error: error.into(),
        }
    }

    pub fn usage(message: impl fmt::Display) -> Self {
        Failure::new(Kind::Usage, anyhow::anyhow!("{message}"))
    }

    pub fn data(message: impl fmt::Display) -> Self {
        Failure::new(Kind::Data, anyhow::anyhow!("{message}"))
    }

    pub fn runtime(message: impl fmt::Display) -> Self {
        Failure::new(Kind::Runtime, anyhow::anyhow!("{message}"))
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

pub type Outcome<T> = std::result::Result<T, Failure>;

/// Tag an error with the exit class it should produce.
pub trait Classify<T> {
    fn usage_err(self) -> Outcome<T>;
    fn data_err(self) -> Outcome<T>;
    fn runtime_err(self) -> Outcome<T>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for std::result::Result<T, E> {
    fn usage_err(self) -> Outcome<T> {
        self.map_err(|e| Failure::new(Kind::Usage, e))
    }

    fn data_err(self) -> Outcome<T> {
        self.map_err(|e| Failure::new(Kind::Data, e))
    }

    fn runtime_err(self) -> Outcome<T> {
        self.map_err(|e| Failure::new(Kind::Runtime, e))
    }
}
