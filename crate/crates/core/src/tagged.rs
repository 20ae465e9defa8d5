use serde::{Deserialize, Serialize};

/// How a reported number was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    UpperBound,
    LowerBound,
    MonteCarlo,
}

/// A value together with its [`Method`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tagged<T> {
    pub value: T,
    pub method: Method,
}

impl<T> Tagged<T> {
    pub fn exact(value: T) -> Self {
        Self {
            value,
            method: Method::Exact,
        }
    }

    pub fn upper(value: T) -> Self {
        Self {
            value,
            method: Method::UpperBound,
        }
    }

    pub fn lower(value: T) -> Self {
        Self {
            value,
            method: Method::LowerBound,
        }
    }

    pub fn monte_carlo(value: T) -> Self {
        Self {
            value,
            method: Method::MonteCarlo,
        }
    }
}
