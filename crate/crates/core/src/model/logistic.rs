use crate::numeric::{log_sigmoid, sigmoid};

/// Emission probability `1 / (1 + exp(-(mu + beta * y)))` for a theoretical
/// peak of transformed intensity `y`.
pub fn logistic_emission_prob(y: f64, mu: f64, beta: f64) -> f64 {
    sigmoid(mu + beta * y)
}

pub fn log_emission_prob(y: f64, mu: f64, beta: f64) -> f64 {
    log_sigmoid(mu + beta * y)
}

pub fn log_no_emission_prob(y: f64, mu: f64, beta: f64) -> f64 {
    log_sigmoid(-(mu + beta * y))
}
