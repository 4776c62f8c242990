//! Observed convergence orders from error sequences.

use serde::Serialize;

/// `log(e_k / e_{k+1}) / log(ratio)` for consecutive refinements.
pub fn observed_orders(errors: &[f64], ratio: f64) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).ln() / ratio.ln()).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct OrderStudy {
    pub errors: Vec<f64>,
    pub orders: Vec<f64>,
    pub required: f64,
    pub floor: f64,
    pub passes: bool,
}

impl OrderStudy {
    /// Passes when every refinement either reaches `required` or lands below `floor`.
    pub fn new(errors: Vec<f64>, ratio: f64, required: f64, floor: f64) -> Self {
        let orders = observed_orders(&errors, ratio);
        let passes = errors.len() >= 2
            && errors.iter().all(|e| e.is_finite())
            && errors.windows(2).zip(&orders).all(|(w, &p)| p >= required || w[1] <= floor);
        Self { errors, orders, required, floor, passes }
    }

    pub fn min_order(&self) -> f64 {
        self.orders.iter().copied().fold(f64::INFINITY, f64::min)
    }
}
