//! Double-entry ledger with policy-dependent principal repayment.
//!
//! Every mutation is a [`Transaction`] whose debits equal its credits, both in
//! total and for every entity it touches. An entity is the prefix of an
//! account id before the first `:` (`bank:capital` belongs to `bank`), so
//! each participant's own books satisfy Assets = Liabilities + Equity
//! (+ unclosed Income) after every commit.
//!
//! Loan operations live in [`loan`]; JSON scenarios and replay in
//! [`scenario`].

pub mod loan;
pub mod scenario;

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::money::{Currency, Money, MoneyError};
use crate::policy::AllocationConfig;

pub use loan::{Disbursement, Loan, LoanKind, LoanSpec, Repayment};
pub use scenario::{
    run_scenario, ReplayOutcome, Scenario, ScenarioError, Step, StepEntry, StepError,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LedgerError {
    #[error("unbalanced transaction: debits {debits} != credits {credits}")]
    UnbalancedTransaction { debits: Money, credits: Money },
    #[error("transaction does not balance within entity {entity:?}")]
    EntityImbalance { entity: String },
    #[error("unknown account {0:?}")]
    UnknownAccount(String),
    #[error("account {0:?} already exists with a different definition")]
    DuplicateAccount(String),
    #[error("currency mismatch: ledger is {ledger}, posting is {posting}")]
    CurrencyMismatch { ledger: Currency, posting: Currency },
    #[error("posting amounts must be strictly positive (got {0})")]
    NonPositivePosting(Money),
    #[error("a transaction needs at least two postings")]
    TooFewPostings,
    #[error("duplicate transaction id {0:?}")]
    DuplicateTransaction(String),
    #[error("loan {0:?} already exists")]
    DuplicateLoan(String),
    #[error("principal must be positive")]
    NonPositivePrincipal,
    #[error("invalid loan: {0}")]
    InvalidLoan(String),
    #[error("unknown loan {0:?}")]
    UnknownLoan(String),
    #[error("loan {0:?} is closed")]
    LoanClosed(String),
    #[error("amount must be positive (got {0})")]
    NonPositiveAmount(Money),
    #[error("{account} holds {available}, needs {required}")]
    InsufficientBorrowerFunds {
        account: String,
        available: Money,
        required: Money,
    },
    #[error("payment {amount} exceeds outstanding {outstanding}")]
    Overpayment { amount: Money, outstanding: Money },
    #[error("policy violation: {0}")]
    PolicyViolation(String),
    #[error("loan {0:?} is not an at-risk venture loan")]
    WrongLoanKind(String),
    #[error("writedown {writedown} exceeds outstanding {outstanding}")]
    WritedownExceedsOutstanding {
        writedown: Money,
        outstanding: Money,
    },
    #[error("unknown sector {0:?}")]
    UnknownSector(String),
    #[error("invalid policy: {0}")]
    InvalidPolicy(String),
    #[error("date {date} is before the ledger date {current}")]
    DateRegression { date: NaiveDate, current: NaiveDate },
    #[error(transparent)]
    Money(#[from] MoneyError),
}

impl From<crate::policy::ChainError> for LedgerError {
    fn from(e: crate::policy::ChainError) -> Self {
        LedgerError::PolicyViolation(e.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AccountKind {
    Asset,
    Liability,
    Equity,
    Income,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sector {
    Bank,
    Borrower,
    Depositor,
    GovernmentLocal,
    GovernmentState,
    GovernmentFederal,
    ExternalWorld,
}

impl Sector {
    pub const ALL: [Sector; 7] = [
        Sector::Bank,
        Sector::Borrower,
        Sector::Depositor,
        Sector::GovernmentLocal,
        Sector::GovernmentState,
        Sector::GovernmentFederal,
        Sector::ExternalWorld,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Sector::Bank => "bank",
            Sector::Borrower => "borrower",
            Sector::Depositor => "depositor",
            Sector::GovernmentLocal => "government_local",
            Sector::GovernmentState => "government_state",
            Sector::GovernmentFederal => "government_federal",
            Sector::ExternalWorld => "external_world",
        }
    }

    pub fn is_government(self) -> bool {
        matches!(
            self,
            Sector::GovernmentLocal | Sector::GovernmentState | Sector::GovernmentFederal
        )
    }
}

impl fmt::Display for Sector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Sector {
    type Err = LedgerError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Sector::ALL
            .into_iter()
            .find(|x| x.tag() == s)
            .ok_or_else(|| LedgerError::UnknownSector(s.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Account {
    pub id: String,
    pub kind: AccountKind,
    pub sector: Sector,
    /// Natural-sign balance: debit-positive for assets, credit-positive otherwise.
    pub balance: Money,
    /// Whether holdings count toward the money supply when held outside the bank.
    pub money: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Debit,
    Credit,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Posting {
    pub account_id: String,
    pub side: Side,
    pub amount: Money,
}

impl Posting {
    pub fn debit(account: impl Into<String>, amount: Money) -> Posting {
        Posting {
            account_id: account.into(),
            side: Side::Debit,
            amount,
        }
    }

    pub fn credit(account: impl Into<String>, amount: Money) -> Posting {
        Posting {
            account_id: account.into(),
            side: Side::Credit,
            amount,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MoneyEvent {
    Creation,
    Destruction,
    Transfer,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Transaction {
    pub id: String,
    pub date: NaiveDate,
    pub postings: Vec<Posting>,
    pub memo: String,
    pub money_event: MoneyEvent,
}

/// What happens to repaid principal.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CancellationPolicy {
    /// Repaid principal is destroyed, the modern convention.
    #[default]
    Cancel,
    /// Repaid principal joins the bank's reserves and income.
    RetainToBank,
    /// Repaid principal is split between governments and the bank.
    AllocateToGovernment(AllocationConfig),
    /// Principal is only ever retired through equity conversion or haircut.
    VentureRetain,
}

impl CancellationPolicy {
    pub fn validate(&self) -> Result<(), LedgerError> {
        if let CancellationPolicy::AllocateToGovernment(cfg) = self {
            cfg.validate()
                .map_err(|e| LedgerError::InvalidPolicy(e.to_string()))?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FundsCheck {
    /// Record a warning and let the borrower's funds go negative.
    Warn,
    /// Reject the payment.
    Fail,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct LedgerConfig {
    /// Day-count basis for simple interest: 360 or 365.
    pub day_count: u32,
    pub insufficient_funds: FundsCheck,
}

impl Default for LedgerConfig {
    fn default() -> Self {
        LedgerConfig {
            day_count: 360,
            insufficient_funds: FundsCheck::Fail,
        }
    }
}

/// Owning entity of an account id.
pub fn entity_of(account_id: &str) -> &str {
    account_id
        .split_once(':')
        .map(|(e, _)| e)
        .unwrap_or(account_id)
}

#[derive(Clone, Debug)]
pub struct Ledger {
    accounts: IndexMap<String, Account>,
    transactions: Vec<Transaction>,
    tx_ids: HashSet<String>,
    loans: IndexMap<String, Loan>,
    policy: CancellationPolicy,
    config: LedgerConfig,
    currency: Currency,
    date: NaiveDate,
    next_tx: u64,
    warnings: Vec<String>,
}

impl Ledger {
    pub fn new(currency: Currency, policy: CancellationPolicy) -> Result<Ledger, LedgerError> {
        Ledger::with_config(currency, policy, LedgerConfig::default())
    }

    pub fn with_config(
        currency: Currency,
        policy: CancellationPolicy,
        config: LedgerConfig,
    ) -> Result<Ledger, LedgerError> {
        policy.validate()?;
        if config.day_count != 360 && config.day_count != 365 {
            return Err(LedgerError::InvalidPolicy(format!(
                "day count must be 360 or 365, got {}",
                config.day_count
            )));
        }
        Ok(Ledger {
            accounts: IndexMap::new(),
            transactions: Vec::new(),
            tx_ids: HashSet::new(),
            loans: IndexMap::new(),
            policy,
            config,
            currency,
            date: NaiveDate::from_ymd_opt(2000, 1, 1).expect("valid date"),
            next_tx: 1,
            warnings: Vec::new(),
        })
    }

    pub fn currency(&self) -> Currency {
        self.currency
    }

    pub fn policy(&self) -> &CancellationPolicy {
        &self.policy
    }

    pub fn set_policy(&mut self, policy: CancellationPolicy) -> Result<(), LedgerError> {
        policy.validate()?;
        self.policy = policy;
        Ok(())
    }

    pub fn config(&self) -> &LedgerConfig {
        &self.config
    }

    pub fn date(&self) -> NaiveDate {
        self.date
    }

    /// Moves the ledger clock forward. Dates never go backwards.
    pub fn advance_to(&mut self, date: NaiveDate) -> Result<(), LedgerError> {
        if date < self.date && !self.transactions.is_empty() {
            return Err(LedgerError::DateRegression {
                date,
                current: self.date,
            });
        }
        self.date = date;
        Ok(())
    }

    pub fn accounts(&self) -> impl Iterator<Item = &Account> {
        self.accounts.values()
    }

    pub fn account(&self, id: &str) -> Option<&Account> {
        self.accounts.get(id)
    }

    pub fn balance(&self, id: &str) -> Result<Money, LedgerError> {
        self.accounts
            .get(id)
            .map(|a| a.balance)
            .ok_or_else(|| LedgerError::UnknownAccount(id.to_string()))
    }

    /// Balance, or zero when the account was never opened.
    pub fn balance_or_zero(&self, id: &str) -> Money {
        self.accounts
            .get(id)
            .map(|a| a.balance)
            .unwrap_or(Money::zero(self.currency))
    }

    pub fn transactions(&self) -> &[Transaction] {
        &self.transactions
    }

    pub fn loans(&self) -> impl Iterator<Item = &Loan> {
        self.loans.values()
    }

    pub fn loan(&self, id: &str) -> Result<&Loan, LedgerError> {
        self.loans
            .get(id)
            .ok_or_else(|| LedgerError::UnknownLoan(id.to_string()))
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn zero(&self) -> Money {
        Money::zero(self.currency)
    }

    /// Opens an account with a zero balance. Re-opening with the same
    /// definition is a no-op.
    pub fn open_account(
        &mut self,
        id: &str,
        kind: AccountKind,
        sector: Sector,
        money: bool,
    ) -> Result<(), LedgerError> {
        if let Some(existing) = self.accounts.get(id) {
            if existing.kind == kind && existing.sector == sector && existing.money == money {
                return Ok(());
            }
            return Err(LedgerError::DuplicateAccount(id.to_string()));
        }
        if let Some(other) = self.entity_sector(entity_of(id)) {
            if other != sector {
                return Err(LedgerError::DuplicateAccount(format!(
                    "{id} (entity already belongs to sector {other})"
                )));
            }
        }
        self.accounts.insert(
            id.to_string(),
            Account {
                id: id.to_string(),
                kind,
                sector,
                balance: Money::zero(self.currency),
                money,
            },
        );
        Ok(())
    }

    /// Sector of the first account owned by `entity`.
    pub fn entity_sector(&self, entity: &str) -> Option<Sector> {
        self.accounts
            .values()
            .find(|a| entity_of(&a.id) == entity)
            .map(|a| a.sector)
    }

    fn validate(&self, postings: &[Posting]) -> Result<(), LedgerError> {
        if postings.len() < 2 {
            return Err(LedgerError::TooFewPostings);
        }
        let mut debits = 0i64;
        let mut credits = 0i64;
        let mut per_entity: BTreeMap<&str, i64> = BTreeMap::new();
        for p in postings {
            if p.amount.currency() != self.currency {
                return Err(LedgerError::CurrencyMismatch {
                    ledger: self.currency,
                    posting: p.amount.currency(),
                });
            }
            if !p.amount.is_positive() {
                return Err(LedgerError::NonPositivePosting(p.amount));
            }
            if !self.accounts.contains_key(&p.account_id) {
                return Err(LedgerError::UnknownAccount(p.account_id.clone()));
            }
            let c = p.amount.cents();
            let e = per_entity.entry(entity_of(&p.account_id)).or_default();
            match p.side {
                Side::Debit => {
                    debits += c;
                    *e += c;
                }
                Side::Credit => {
                    credits += c;
                    *e -= c;
                }
            }
        }
        if debits != credits {
            return Err(LedgerError::UnbalancedTransaction {
                debits: Money::from_cents(debits, self.currency),
                credits: Money::from_cents(credits, self.currency),
            });
        }
        if let Some((entity, _)) = per_entity.iter().find(|(_, v)| **v != 0) {
            return Err(LedgerError::EntityImbalance {
                entity: entity.to_string(),
            });
        }
        Ok(())
    }

    fn apply(&mut self, postings: &[Posting]) {
        for p in postings {
            let acct = self
                .accounts
                .get_mut(&p.account_id)
                .expect("validated account");
            let debit_positive = acct.kind == AccountKind::Asset;
            let signed = match (p.side, debit_positive) {
                (Side::Debit, true) | (Side::Credit, false) => p.amount.cents(),
                _ => -p.amount.cents(),
            };
            acct.balance = Money::from_cents(acct.balance.cents() + signed, self.currency);
        }
    }

    /// Validates and commits a fully formed transaction. Nothing changes on error.
    pub fn post(&mut self, tx: Transaction) -> Result<&Transaction, LedgerError> {
        if self.tx_ids.contains(&tx.id) {
            return Err(LedgerError::DuplicateTransaction(tx.id));
        }
        self.validate(&tx.postings)?;
        self.apply(&tx.postings);
        self.tx_ids.insert(tx.id.clone());
        self.next_tx += 1;
        self.transactions.push(tx);
        Ok(self.transactions.last().expect("just pushed"))
    }

    fn next_id(&self) -> String {
        let mut n = self.next_tx;
        loop {
            let id = format!("tx-{n:05}");
            if !self.tx_ids.contains(&id) {
                return id;
            }
            n += 1;
        }
    }

    /// Commits postings dated at the ledger clock with a generated id.
    pub fn commit(
        &mut self,
        memo: &str,
        money_event: MoneyEvent,
        postings: Vec<Posting>,
    ) -> Result<&Transaction, LedgerError> {
        let tx = Transaction {
            id: self.next_id(),
            date: self.date,
            postings,
            memo: memo.to_string(),
            money_event,
        };
        self.post(tx)
    }

    /// Sum of money-flagged holdings outside the bank sector: coin, notes
    /// and deposits held by borrowers, depositors, governments and the world.
    pub fn money_supply(&self) -> Money {
        let cents = self
            .accounts
            .values()
            .filter(|a| a.money && a.sector != Sector::Bank)
            .map(|a| a.balance.cents())
            .sum();
        Money::from_cents(cents, self.currency)
    }

    /// Assets minus liabilities over every account of `sector`.
    pub fn sector_equity(&self, sector: Sector) -> Money {
        let cents = self
            .accounts
            .values()
            .filter(|a| a.sector == sector)
            .map(|a| match a.kind {
                AccountKind::Asset => a.balance.cents(),
                AccountKind::Liability => -a.balance.cents(),
                _ => 0,
            })
            .sum();
        Money::from_cents(cents, self.currency)
    }

    pub fn sector_equity_by_tag(&self, tag: &str) -> Result<Money, LedgerError> {
        Ok(self.sector_equity(tag.parse()?))
    }

    /// Per-entity check of Assets = Liabilities + Equity + Income.
    pub fn identity_holds(&self) -> bool {
        let mut per_entity: BTreeMap<&str, i64> = BTreeMap::new();
        for a in self.accounts.values() {
            let v = match a.kind {
                AccountKind::Asset => a.balance.cents(),
                _ => -a.balance.cents(),
            };
            *per_entity.entry(entity_of(&a.id)).or_default() += v;
        }
        per_entity.values().all(|v| *v == 0)
    }

    /// Moves a cross-entity amount: `from` is credited, `to` debited, and
    /// each side's equity account absorbs the change.
    pub fn transfer(
        &mut self,
        from: &str,
        to: &str,
        amount: Money,
        memo: &str,
    ) -> Result<(), LedgerError> {
        if !amount.is_positive() {
            return Err(LedgerError::NonPositiveAmount(amount));
        }
        for id in [from, to] {
            if !self.accounts.contains_key(id) {
                return Err(LedgerError::UnknownAccount(id.to_string()));
            }
        }
        let from_eq = format!("{}:equity", entity_of(from));
        let to_eq = format!("{}:equity", entity_of(to));
        let mut postings = vec![Posting::credit(from, amount), Posting::debit(to, amount)];
        if entity_of(from) != entity_of(to) {
            self.ensure_equity(&from_eq)?;
            self.ensure_equity(&to_eq)?;
            postings.push(Posting::debit(from_eq, amount));
            postings.push(Posting::credit(to_eq, amount));
        }
        self.commit(memo, MoneyEvent::Transfer, postings)?;
        Ok(())
    }

    fn ensure_equity(&mut self, id: &str) -> Result<(), LedgerError> {
        if self.accounts.contains_key(id) {
            return Ok(());
        }
        let sector = self
            .entity_sector(entity_of(id))
            .ok_or_else(|| LedgerError::UnknownAccount(id.to_string()))?;
        self.open_account(id, AccountKind::Equity, sector, false)
    }

    /// Asset swap between two entities: the owner of `give` hands over
    /// `amount` of it and receives the same amount of `take`.
    ///
    /// Missing mirror accounts are opened with the template's kind and
    /// money flag, e.g. `borrower:paper` for `world:paper`.
    pub fn exchange(
        &mut self,
        give: &str,
        take: &str,
        amount: Money,
        memo: &str,
    ) -> Result<(), LedgerError> {
        if !amount.is_positive() {
            return Err(LedgerError::NonPositiveAmount(amount));
        }
        let give_acct = self
            .accounts
            .get(give)
            .cloned()
            .ok_or_else(|| LedgerError::UnknownAccount(give.to_string()))?;
        let take_acct = self
            .accounts
            .get(take)
            .cloned()
            .ok_or_else(|| LedgerError::UnknownAccount(take.to_string()))?;
        let (a, b) = (entity_of(give), entity_of(take));
        let suffix = |id: &str| {
            id.split_once(':')
                .map(|(_, s)| s.to_string())
                .unwrap_or_default()
        };
        let a_gets = format!("{a}:{}", suffix(take));
        let b_gets = format!("{b}:{}", suffix(give));
        self.open_account(&a_gets, take_acct.kind, give_acct.sector, take_acct.money)?;
        self.open_account(&b_gets, give_acct.kind, take_acct.sector, give_acct.money)?;
        self.commit(
            memo,
            MoneyEvent::Transfer,
            vec![
                Posting::credit(give, amount),
                Posting::debit(a_gets, amount),
                Posting::credit(take, amount),
                Posting::debit(b_gets, amount),
            ],
        )?;
        Ok(())
    }

    /// Closes every nonzero Income account into `<entity>:retained`.
    pub fn close_period(&mut self) -> Result<usize, LedgerError> {
        let income: Vec<(String, Sector, Money)> = self
            .accounts
            .values()
            .filter(|a| a.kind == AccountKind::Income && !a.balance.is_zero())
            .map(|a| (a.id.clone(), a.sector, a.balance))
            .collect();
        for (id, sector, bal) in &income {
            let retained = format!("{}:retained", entity_of(id));
            self.open_account(&retained, AccountKind::Equity, *sector, false)?;
            let (dr, cr) = if bal.is_positive() {
                (id.clone(), retained)
            } else {
                (retained, id.clone())
            };
            self.commit(
                "Period close",
                MoneyEvent::Transfer,
                vec![
                    Posting::debit(dr, bal.abs()),
                    Posting::credit(cr, bal.abs()),
                ],
            )?;
        }
        Ok(income.len())
    }

    /// A ledger with the same chart of accounts at zero, re-posting the log.
    pub fn replayed(&self) -> Result<Ledger, LedgerError> {
        let mut fresh = Ledger::with_config(self.currency, self.policy.clone(), self.config)?;
        for a in self.accounts.values() {
            fresh.open_account(&a.id, a.kind, a.sector, a.money)?;
        }
        for tx in &self.transactions {
            fresh.date = tx.date;
            fresh.post(tx.clone())?;
        }
        Ok(fresh)
    }

    /// Balances in account order as `id=amount` lines; stable across replays.
    pub fn balance_snapshot(&self) -> String {
        let mut out = String::new();
        for a in self.accounts.values() {
            out.push_str(&a.id);
            out.push('=');
            out.push_str(&a.balance.to_string());
            out.push('\n');
        }
        out
    }

    pub(crate) fn warn(&mut self, msg: String) {
        log::warn!("{msg}");
        self.warnings.push(msg);
    }

    pub(crate) fn loans_mut(&mut self) -> &mut IndexMap<String, Loan> {
        &mut self.loans
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const F: Currency = Currency::FLORIN;

    fn m(s: &str) -> Money {
        Money::parse(s, F).unwrap()
    }

    fn simple() -> Ledger {
        let mut l = Ledger::new(F, CancellationPolicy::Cancel).unwrap();
        l.open_account("bank:capital", AccountKind::Asset, Sector::Bank, false)
            .unwrap();
        l.open_account("bank:deposits", AccountKind::Liability, Sector::Bank, false)
            .unwrap();
        l
    }

    #[test]
    fn balanced_pair_is_accepted() {
        let mut l = simple();
        l.commit(
            "open",
            MoneyEvent::Transfer,
            vec![
                Posting::debit("bank:capital", m("100.00")),
                Posting::credit("bank:deposits", m("100.00")),
            ],
        )
        .unwrap();
        assert_eq!(l.balance("bank:capital").unwrap(), m("100.00"));
        assert_eq!(l.balance("bank:deposits").unwrap(), m("100.00"));
        assert!(l.identity_holds());
    }

    #[test]
    fn imbalance_is_rejected_atomically() {
        let mut l = simple();
        let err = l
            .commit(
                "bad",
                MoneyEvent::Transfer,
                vec![
                    Posting::debit("bank:capital", m("100.00")),
                    Posting::credit("bank:deposits", m("99.99")),
                ],
            )
            .unwrap_err();
        assert!(matches!(err, LedgerError::UnbalancedTransaction { .. }));
        assert!(l.transactions().is_empty());
        assert!(l.balance("bank:capital").unwrap().is_zero());
    }

    #[test]
    fn rejects_unknown_account_currency_and_zero() {
        let mut l = simple();
        let e = l
            .commit(
                "x",
                MoneyEvent::Transfer,
                vec![
                    Posting::debit("bank:nope", m("1")),
                    Posting::credit("bank:deposits", m("1")),
                ],
            )
            .unwrap_err();
        assert_eq!(e, LedgerError::UnknownAccount("bank:nope".into()));
        let usd = Money::units(1, Currency::DOLLAR);
        let e = l
            .commit(
                "x",
                MoneyEvent::Transfer,
                vec![
                    Posting::debit("bank:capital", usd),
                    Posting::credit("bank:deposits", usd),
                ],
            )
            .unwrap_err();
        assert!(matches!(e, LedgerError::CurrencyMismatch { .. }));
        let e = l
            .commit(
                "x",
                MoneyEvent::Transfer,
                vec![
                    Posting::debit("bank:capital", m("0")),
                    Posting::credit("bank:deposits", m("0")),
                ],
            )
            .unwrap_err();
        assert!(matches!(e, LedgerError::NonPositivePosting(_)));
        let e = l
            .commit(
                "x",
                MoneyEvent::Transfer,
                vec![Posting::debit("bank:capital", m("1"))],
            )
            .unwrap_err();
        assert_eq!(e, LedgerError::TooFewPostings);
    }

    #[test]
    fn cross_entity_imbalance_is_rejected() {
        let mut l = simple();
        l.open_account("alice:deposit", AccountKind::Asset, Sector::Depositor, true)
            .unwrap();
        let e = l
            .commit(
                "x",
                MoneyEvent::Transfer,
                vec![
                    Posting::debit("alice:deposit", m("5")),
                    Posting::credit("bank:deposits", m("5")),
                ],
            )
            .unwrap_err();
        assert_eq!(
            e,
            LedgerError::EntityImbalance {
                entity: "alice".into()
            }
        );
    }

    #[test]
    fn unknown_sector_tag() {
        let l = simple();
        assert!(l.sector_equity_by_tag("bank").unwrap().is_zero());
        assert_eq!(
            l.sector_equity_by_tag("martians"),
            Err(LedgerError::UnknownSector("martians".into()))
        );
        assert!(l.sector_equity(Sector::Depositor).is_zero());
    }

    #[test]
    fn fresh_ledger_has_no_money() {
        let mut l = simple();
        l.open_account("bank:equity", AccountKind::Equity, Sector::Bank, false)
            .unwrap();
        l.commit(
            "vault",
            MoneyEvent::Transfer,
            vec![
                Posting::debit("bank:capital", m("100")),
                Posting::credit("bank:equity", m("100")),
            ],
        )
        .unwrap();
        assert!(l.money_supply().is_zero());
    }

    #[test]
    fn close_period_moves_income_to_retained() {
        let mut l = simple();
        l.open_account("bank:income", AccountKind::Income, Sector::Bank, false)
            .unwrap();
        l.commit(
            "fee",
            MoneyEvent::Transfer,
            vec![
                Posting::debit("bank:capital", m("3.50")),
                Posting::credit("bank:income", m("3.50")),
            ],
        )
        .unwrap();
        assert_eq!(l.close_period().unwrap(), 1);
        assert!(l.balance("bank:income").unwrap().is_zero());
        assert_eq!(l.balance("bank:retained").unwrap(), m("3.50"));
        assert!(l.identity_holds());
    }

    #[test]
    fn transfer_and_exchange_keep_entities_balanced() {
        let mut l = Ledger::new(F, CancellationPolicy::Cancel).unwrap();
        for (id, kind, sector, money) in [
            ("a:coin", AccountKind::Asset, Sector::Borrower, true),
            ("a:equity", AccountKind::Equity, Sector::Borrower, false),
            ("w:paper", AccountKind::Asset, Sector::ExternalWorld, true),
            (
                "w:equity",
                AccountKind::Equity,
                Sector::ExternalWorld,
                false,
            ),
        ] {
            l.open_account(id, kind, sector, money).unwrap();
        }
        l.commit(
            "seed",
            MoneyEvent::Transfer,
            vec![
                Posting::debit("a:coin", m("50")),
                Posting::credit("a:equity", m("50")),
                Posting::debit("w:paper", m("20")),
                Posting::credit("w:equity", m("20")),
            ],
        )
        .unwrap();
        l.exchange("a:coin", "w:paper", m("20"), "swap").unwrap();
        assert_eq!(l.balance("a:paper").unwrap(), m("20"));
        assert_eq!(l.balance("w:coin").unwrap(), m("20"));
        l.transfer("a:coin", "w:coin", m("5"), "gift").unwrap();
        assert_eq!(l.balance("w:coin").unwrap(), m("25"));
        assert!(l.identity_holds());
        assert_eq!(l.money_supply(), m("70"));
    }

    proptest! {
        #[test]
        fn replay_reproduces_balances(amounts in proptest::collection::vec(1i64..1_000_000, 1..40)) {
            let mut l = simple();
            for (i, c) in amounts.iter().enumerate() {
                let amt = Money::from_cents(*c, F);
                let (dr, cr) = if i % 3 == 2 {
                    ("bank:deposits", "bank:capital")
                } else {
                    ("bank:capital", "bank:deposits")
                };
                l.commit("p", MoneyEvent::Transfer, vec![Posting::debit(dr, amt), Posting::credit(cr, amt)]).unwrap();
                prop_assert!(l.identity_holds());
            }
            prop_assert_eq!(l.replayed().unwrap().balance_snapshot(), l.balance_snapshot());
        }
    }
}
