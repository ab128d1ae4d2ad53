//! Monetary-circuit simulation toolkit.
//!
//! * [`ledger`]: double-entry state machine with policy-dependent treatment of
//!   repaid loan principal.
//! * [`medici`]: loan-book statistics, the three earnings models and their
//!   rate solvers, and a seeded reconstruction of the 53-loan sample.
//! * [`policy`]: principal-flow normalization, government allocation,
//!   chain eligibility and scenario runners built on the ledger.
//! * [`dataio`]: CSV tables, FRED-layout series and SVG charts.

pub mod dataio;
pub mod ledger;
pub mod medici;
pub mod money;
pub mod par;
pub mod policy;
pub mod rootfind;

pub use money::{Amount, Currency, Money, MoneyError};
