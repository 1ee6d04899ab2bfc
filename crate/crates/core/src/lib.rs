//! Option Query Language: a declarative language for searching multi-leg
//! option strategies over an option chain, with a deterministic executor,
//! BSM pricing kernels, a mark-to-model backtester and query-quality metrics.
//!
//! The pipeline is `tokenize -> parse -> validate -> filter -> assemble ->
//! aggregate -> HAVING -> ORDER BY / LIMIT`; [`engine::execute`] runs all of it.

pub mod backtest;
pub mod catalog;
pub mod chain;
pub mod engine;
pub mod error;
pub mod evalkit;
pub mod fields;
pub mod pricing;
pub mod syntax;
pub mod types;

pub use catalog::{Catalog, CatalogOptions, StrategySchema, ValidatedQuery};
pub use chain::{ChainSnapshot, ContractRecord};
pub use engine::{execute, EngineConfig, ResultSet, StrategyInstance};

pub use error::OqlError;
pub use fields::{AggField, LegField};
pub use syntax::{parse_query, pretty_print, Query};
pub use types::{Direction, Moneyness, OptionType};
