//! Loading datasets and writing chains and study reports.
//!
//! CSV dialect throughout: comma separator, `.` decimal point, UTF-8, header row,
//! unquoted numbers.

mod design;
mod export;
mod prices;
pub mod synthetic;

pub use design::{load_design_matrix, write_design_matrix};
pub use export::{export_chain, export_study, import_chain};
pub use prices::{load_prices, prices_to_returns, write_prices, PriceSeries};
