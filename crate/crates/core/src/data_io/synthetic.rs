//! Seeded stand-ins for the Swiss banknote data and the DEM/GBP exchange-rate
//! series, for use when the original files are not at hand.

use chrono::{Datelike, NaiveDate, Weekday};
use rand::Rng;
use rand_distr::{StandardNormal, StudentT};

use super::PriceSeries;
use crate::error::Result;
use crate::samplers::chain_rng;

pub const BANKNOTE_COLUMNS: [&str; 4] = ["length", "left", "right", "bottom"];

/// Class means and standard deviations (mm) for genuine and counterfeit notes.
const GENUINE: [(f64, f64); 4] = [(214.97, 0.38), (129.94, 0.36), (129.72, 0.36), (8.31, 0.64)];
const COUNTERFEIT: [(f64, f64); 4] = [(214.82, 0.35), (130.30, 0.26), (130.19, 0.30), (10.53, 1.13)];

/// Correlation between the left and right edge widths within a class.
const EDGE_CORRELATION: f64 = 0.65;

/// 100 genuine (`y = 0`) then 100 counterfeit (`y = 1`) notes, measurements
/// rounded to 0.1 mm.
pub fn banknote_like(seed: u64) -> (Vec<Vec<f64>>, Vec<u8>) {
    let mut rng = chain_rng(seed);
    let mut rows = Vec::with_capacity(200);
    let mut response = Vec::with_capacity(200);
    let (a, b) = (EDGE_CORRELATION.sqrt(), (1.0 - EDGE_CORRELATION).sqrt());
    for (label, params) in [(0u8, &GENUINE), (1u8, &COUNTERFEIT)] {
        for _ in 0..100 {
            let z: [f64; 5] = std::array::from_fn(|_| rng.sample(StandardNormal));
            let std_scores = [z[0], a * z[4] + b * z[1], a * z[4] + b * z[2], z[3]];
            let row = params
                .iter()
                .zip(std_scores)
                .map(|(&(mu, sd), s)| ((mu + sd * s) * 10.0).round() / 10.0)
                .collect();
            rows.push(row);
            response.push(label);
        }
    }
    (rows, response)
}

/// GARCH(1,1) parameters `(ω1, ω2, ω3)` of the synthetic exchange-rate series,
/// in the range of published Bayesian GARCH fits to DEM/GBP daily returns
/// for 1985-1987.
pub const DEMGBP_OMEGA: [f64; 3] = [3.4e-6, 0.23, 0.67];

/// Degrees of freedom of the Student-t innovations (scaled to unit variance):
/// daily exchange-rate returns are fat-tailed even after GARCH filtering.
pub const DEMGBP_INNOVATION_DF: f64 = 6.0;

/// Business days from January 1985 to December 1987.
pub const DEMGBP_RETURNS: usize = 781;

/// Synthetic DEM/GBP daily rates: `DEMGBP_RETURNS + 1` prices whose simple
/// returns follow a GARCH(1,1) with parameters [`DEMGBP_OMEGA`] and Student-t
/// innovations, dated on weekdays from 1985-01-02.
pub fn demgbp_like(seed: u64) -> Result<PriceSeries> {
    let mut rng = chain_rng(seed);
    let nu = DEMGBP_INNOVATION_DF;
    let innovations = StudentT::new(nu).expect("positive degrees of freedom");
    let unit = ((nu - 2.0) / nu).sqrt();
    let [w1, w2, w3] = DEMGBP_OMEGA;
    let mut h = w1 / (1.0 - w2 - w3);
    let mut r_prev = 0.0;
    let mut price = 3.7;
    let mut prices = vec![price];
    // discard a stretch of the recursion so the start is near stationarity
    for t in 0..(DEMGBP_RETURNS + 200) {
        h = w1 + w3 * h + w2 * r_prev * r_prev;
        let eps: f64 = unit * rng.sample(innovations);
        r_prev = h.sqrt() * eps;
        if t >= 200 {
            price *= 1.0 + r_prev;
            prices.push(price);
        }
    }
    let dates = weekdays_from_1985(prices.len());
    PriceSeries::new(dates, prices)
}

/// ISO dates of the first `n` weekdays on or after 1985-01-02.
fn weekdays_from_1985(n: usize) -> Vec<String> {
    let start = NaiveDate::from_ymd_opt(1985, 1, 2).expect("valid date");
    start
        .iter_days()
        .filter(|d| !matches!(d.weekday(), Weekday::Sat | Weekday::Sun))
        .take(n)
        .map(|d| d.to_string())
        .collect()
}
