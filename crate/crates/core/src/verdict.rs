use serde::Serialize;
use serde_json::{Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Holds,
    Fails,
    Inconclusive,
}

/// Tri-state outcome of a criterion with structured evidence.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub status: Status,
    pub criterion: String,
    pub reason: String,
    pub evidence: Map<String, Value>,
    /// Truncation order the verdict was computed at, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<u32>,
    /// Direction an inconclusive numeric probe points to.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub leaning: Option<Status>,
    /// Set when the verdict rests on a finite-order semidecision.
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub semidecision: bool,
}

impl Verdict {
    pub fn new(status: Status, criterion: &str, reason: impl Into<String>) -> Self {
        Verdict {
            status,
            criterion: criterion.into(),
            reason: reason.into(),
            evidence: Map::new(),
            order: None,
            leaning: None,
            semidecision: false,
        }
    }

    pub fn holds(criterion: &str, reason: impl Into<String>) -> Self {
        Self::new(Status::Holds, criterion, reason)
    }

    pub fn fails(criterion: &str, reason: impl Into<String>) -> Self {
        Self::new(Status::Fails, criterion, reason)
    }

    pub fn inconclusive(criterion: &str, reason: impl Into<String>) -> Self {
        Self::new(Status::Inconclusive, criterion, reason)
    }

    pub fn with(mut self, key: &str, value: impl Serialize) -> Self {
        self.evidence.insert(key.into(), serde_json::to_value(value).unwrap_or(Value::Null));
        self
    }

    pub fn at_order(mut self, order: u32) -> Self {
        self.order = Some(order);
        self
    }

    pub fn leaning(mut self, s: Status) -> Self {
        self.leaning = Some(s);
        self
    }

    pub fn semidecision(mut self) -> Self {
        self.semidecision = true;
        self
    }

    pub fn is_holds(&self) -> bool {
        self.status == Status::Holds
    }

    pub fn is_fails(&self) -> bool {
        self.status == Status::Fails
    }
}
