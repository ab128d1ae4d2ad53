//! Modern-economy side: principal-flow normalization, allocation of repaid
//! principal to governments, loan-chain eligibility, and scenario runners
//! that drive the ledger.

pub mod chain;
pub mod flow;
pub mod scenario;
pub mod venture;

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use crate::dataio::{Series, Unit};
pub use chain::{
    classify_chain, classify_chain_with, BorrowerType, ChainError, Eligibility, LoanGraph, LoanNode,
};
pub use flow::{allocate_principal, normalize_principal_flow, tax_uplift, uplift_pct, Allocation};
pub use scenario::{run_policy_scenario, Cohort, PolicyReport, PolicyRow, PolicyScenario};
pub use venture::{
    run_venture_portfolio, Resolution, VentureOutcome, VenturePortfolio, VentureReport,
};

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error("stock and maturity series do not overlap")]
    NoOverlap,
    #[error("maturity must be positive (at {0})")]
    NonPositiveMaturity(chrono::NaiveDate),
    #[error("unexpected unit {0:?}")]
    UnitMismatch(Unit),
    #[error("tax revenue is zero at {0}")]
    DivisionByZeroDate(chrono::NaiveDate),
    #[error("no matching observation for {0}")]
    DateMismatch(chrono::NaiveDate),
    #[error("invalid allocation config: {0}")]
    InvalidConfig(String),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("period {period}: {source}")]
    Ledger {
        period: usize,
        #[source]
        source: crate::ledger::LedgerError,
    },
    #[error(transparent)]
    Series(#[from] crate::dataio::SeriesError),
}

/// Recipients of repaid principal. Fractions are non-negative and sum to 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AllocationConfig {
    pub local_frac: Decimal,
    pub state_frac: Decimal,
    pub federal_frac: Decimal,
    pub bank_frac: Decimal,
    /// Whether consumer loans qualify. Off by default.
    #[serde(default)]
    pub include_consumer: bool,
}

impl Default for AllocationConfig {
    /// Half to local and state governments in equal parts, half federal.
    fn default() -> Self {
        AllocationConfig {
            local_frac: Decimal::new(25, 2),
            state_frac: Decimal::new(25, 2),
            federal_frac: Decimal::new(50, 2),
            bank_frac: Decimal::ZERO,
            include_consumer: false,
        }
    }
}

impl AllocationConfig {
    /// Everything to the bank, which is what retention amounts to.
    pub fn bank_only() -> Self {
        AllocationConfig {
            local_frac: Decimal::ZERO,
            state_frac: Decimal::ZERO,
            federal_frac: Decimal::ZERO,
            bank_frac: Decimal::ONE,
            include_consumer: false,
        }
    }

    pub fn fractions(&self) -> [Decimal; 4] {
        [
            self.local_frac,
            self.state_frac,
            self.federal_frac,
            self.bank_frac,
        ]
    }

    pub fn government_frac(&self) -> Decimal {
        self.local_frac + self.state_frac + self.federal_frac
    }

    pub fn validate(&self) -> Result<(), PolicyError> {
        for f in self.fractions() {
            if f < Decimal::ZERO || f > Decimal::ONE {
                return Err(PolicyError::InvalidConfig(format!(
                    "fraction {f} outside [0,1]"
                )));
            }
        }
        let sum: Decimal = self.fractions().iter().sum();
        if sum != Decimal::ONE {
            return Err(PolicyError::InvalidConfig(format!(
                "fractions sum to {sum}, not 1"
            )));
        }
        Ok(())
    }
}
