use std::path::Path;

use super::design::csv_error;
use crate::error::{Error, Result};
use crate::models::ReturnsSeries;

/// Exchange-rate observations `S(t)` with strictly increasing dates.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    dates: Vec<String>,
    prices: Vec<f64>,
}

impl PriceSeries {
    pub fn new(dates: Vec<String>, prices: Vec<f64>) -> Result<Self> {
        if dates.len() != prices.len() {
            return Err(Error::Setup(format!(
                "{} dates for {} prices",
                dates.len(),
                prices.len()
            )));
        }
        if let Some(i) = prices.iter().position(|p| !(p.is_finite() && *p > 0.0)) {
            return Err(Error::DegenerateData(format!(
                "price {i} ({}) is not strictly positive",
                prices[i]
            )));
        }
        if let Some(i) = dates.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::Setup(format!(
                "dates must be strictly increasing: {:?} then {:?}",
                dates[i],
                dates[i + 1]
            )));
        }
        Ok(PriceSeries { dates, prices })
    }

    pub fn dates(&self) -> &[String] {
        &self.dates
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }
}

/// Simple returns `r(t) = (S(t) - S(t-1)) / S(t-1)`, with `h0` set to their
/// sample variance.
pub fn prices_to_returns(series: &PriceSeries) -> Result<ReturnsSeries> {
    let p = series.prices();
    if p.len() < 3 {
        return Err(Error::Setup(format!(
            "need at least 3 prices to form a returns series, got {}",
            p.len()
        )));
    }
    let returns = p.windows(2).map(|w| (w[1] - w[0]) / w[0]).collect();
    ReturnsSeries::from_returns(returns)
}

/// Reads a `date,price` CSV.
pub fn load_prices(path: impl AsRef<Path>) -> Result<PriceSeries> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let mut dates = Vec::new();
    let mut prices = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = r + 2;
        if record.len() != 2 {
            return Err(Error::load(path, format!("line {line}: expected `date,price`")));
        }
        let price: f64 = record[1].parse().map_err(|_| {
            Error::load(path, format!("line {line}: non-numeric price {:?}", &record[1]))
        })?;
        if !(price.is_finite() && price > 0.0) {
            return Err(Error::load(path, format!("line {line}: nonpositive price {price}")));
        }
        dates.push(record[0].to_string());
        prices.push(price);
    }
    PriceSeries::new(dates, prices).map_err(|e| Error::load(path, e.to_string()))
}

pub fn write_prices(path: impl AsRef<Path>, series: &PriceSeries) -> Result<()> {
    let path = path.as_ref();
    let mut writer = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    writer
        .write_record(["date", "price"])
        .map_err(|e| csv_error(path, e))?;
    for (d, p) in series.dates().iter().zip(series.prices()) {
        writer
            .write_record([d.as_str(), &format!("{p:.16e}")])
            .map_err(|e| csv_error(path, e))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}
