//! Loan lifecycle: origination, interest, principal under each policy,
//! equity conversion and haircuts.
//!
//! Standard accounts are opened on demand. Bank side:
//!
//! | id | kind | role |
//! |----|------|------|
//! | `bank:capital` | Asset | reserves, the vault |
//! | `bank:suspense` | Asset | loans awaiting repayment |
//! | `bank:notes` / `bank:deposits` | Liability | created paper / deposits |
//! | `bank:income` | Income | loan payments kept |
//! | `bank:accrued_interest` | Equity | interest booked but unpaid |
//! | `bank:venture_equity` | Asset | equity taken for at-risk loans |
//! | `bank:writedowns` | Equity (contra) | haircuts |
//!
//! Borrower `B` holds `B:coin`, `B:paper` or `B:deposit` against
//! `B:loan_payable`, with `B:equity` absorbing interest expense.

use chrono::NaiveDate;
use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use super::{
    AccountKind, CancellationPolicy, FundsCheck, Ledger, LedgerError, MoneyEvent, Posting, Sector,
};
use crate::money::{Amount, Money};
use crate::policy::{AllocationConfig, BorrowerType, Eligibility, LoanGraph, LoanNode};

pub const CAPITAL: &str = "bank:capital";
pub const EQUITY: &str = "bank:equity";
pub const SUSPENSE: &str = "bank:suspense";
pub const NOTES: &str = "bank:notes";
pub const DEPOSITS: &str = "bank:deposits";
pub const INCOME: &str = "bank:income";
pub const ACCRUED: &str = "bank:accrued_interest";
pub const VENTURE_EQUITY: &str = "bank:venture_equity";
pub const WRITEDOWNS: &str = "bank:writedowns";

/// Government recipients of allocated principal, in split order.
pub const GOVERNMENTS: [(&str, Sector); 3] = [
    ("gov_local", Sector::GovernmentLocal),
    ("gov_state", Sector::GovernmentState),
    ("gov_federal", Sector::GovernmentFederal),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoanKind {
    Commercial,
    Consumer,
    AtRiskVenture,
}

/// How the created part of a loan reaches the borrower, and how the
/// borrower pays back.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Disbursement {
    /// Created part as bank paper; repayments arrive as coin into the vault.
    #[default]
    CoinAndPaper,
    /// Created part as a deposit at the bank; repayments debit the deposit.
    Deposit,
}

/// Origination request.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoanSpec {
    pub id: String,
    /// Owning entity of the borrower's accounts, e.g. `borrower`.
    pub borrower: String,
    pub principal: Amount,
    /// Hard-money portion paid out of reserves.
    #[serde(default)]
    pub coin_fraction: Decimal,
    #[serde(default)]
    pub annual_rate: Decimal,
    #[serde(default)]
    pub origination: Option<NaiveDate>,
    #[serde(default = "default_term")]
    pub term_days: u32,
    #[serde(default = "default_kind")]
    pub kind: LoanKind,
    #[serde(default)]
    pub chain_parent: Option<String>,
    #[serde(default)]
    pub disbursement: Disbursement,
    #[serde(default = "default_borrower_type")]
    pub borrower_type: BorrowerType,
}

fn default_term() -> u32 {
    30
}

fn default_kind() -> LoanKind {
    LoanKind::Commercial
}

fn default_borrower_type() -> BorrowerType {
    BorrowerType::EndBusinessBorrower
}

impl LoanSpec {
    pub fn new(id: &str, borrower: &str, principal: Money) -> LoanSpec {
        LoanSpec {
            id: id.to_string(),
            borrower: borrower.to_string(),
            principal: principal.into(),
            coin_fraction: Decimal::ZERO,
            annual_rate: Decimal::ZERO,
            origination: None,
            term_days: default_term(),
            kind: default_kind(),
            chain_parent: None,
            disbursement: Disbursement::default(),
            borrower_type: default_borrower_type(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Loan {
    pub id: String,
    pub borrower: String,
    pub principal: Money,
    pub coin_fraction: Decimal,
    pub annual_rate: Decimal,
    pub origination: NaiveDate,
    pub term_days: u32,
    pub kind: LoanKind,
    pub chain_parent: Option<String>,
    pub disbursement: Disbursement,
    pub borrower_type: BorrowerType,
    pub outstanding: Money,
    /// Interest booked and not yet paid.
    pub accrued: Money,
    /// Outstanding part that was created as paper or deposit.
    pub created_outstanding: Money,
    pub written_down: Money,
    pub equity_booked: Money,
}

impl Loan {
    pub fn is_open(&self) -> bool {
        self.outstanding.is_positive()
    }

    fn funds_account(&self) -> String {
        match self.disbursement {
            Disbursement::CoinAndPaper => format!("{}:coin", self.borrower),
            Disbursement::Deposit => format!("{}:deposit", self.borrower),
        }
    }

    fn receiving_account(&self) -> &'static str {
        match self.disbursement {
            Disbursement::CoinAndPaper => CAPITAL,
            Disbursement::Deposit => DEPOSITS,
        }
    }
}

/// Repayment treatment: the ledger policy, or forced cancellation for
/// loans the policy may not touch.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Repayment {
    PerPolicy,
    ForceCancel,
}

impl Ledger {
    fn ensure_bank_chart(&mut self) -> Result<(), LedgerError> {
        use AccountKind::*;
        for (id, kind) in [
            (CAPITAL, Asset),
            (EQUITY, Equity),
            (SUSPENSE, Asset),
            (NOTES, Liability),
            (DEPOSITS, Liability),
            (INCOME, Income),
            (ACCRUED, Equity),
        ] {
            self.open_account(id, kind, Sector::Bank, false)?;
        }
        Ok(())
    }

    fn ensure_entity_account(
        &mut self,
        entity: &str,
        suffix: &str,
        kind: AccountKind,
        money: bool,
        default_sector: Sector,
    ) -> Result<String, LedgerError> {
        let id = format!("{entity}:{suffix}");
        let sector = self.entity_sector(entity).unwrap_or(default_sector);
        self.open_account(&id, kind, sector, money)?;
        Ok(id)
    }

    fn ensure_borrower_chart(&mut self, loan: &Loan) -> Result<(), LedgerError> {
        let b = loan.borrower.as_str();
        let created = match loan.disbursement {
            Disbursement::CoinAndPaper => "paper",
            Disbursement::Deposit => "deposit",
        };
        self.ensure_entity_account(b, "coin", AccountKind::Asset, true, Sector::Borrower)?;
        self.ensure_entity_account(b, created, AccountKind::Asset, true, Sector::Borrower)?;
        self.ensure_entity_account(
            b,
            "loan_payable",
            AccountKind::Liability,
            false,
            Sector::Borrower,
        )?;
        self.ensure_entity_account(b, "equity", AccountKind::Equity, false, Sector::Borrower)?;
        Ok(())
    }

    /// Books a new loan. The coin part leaves reserves; the rest is created
    /// as bank paper or a deposit and tagged [`MoneyEvent::Creation`].
    pub fn originate_loan(&mut self, spec: LoanSpec) -> Result<&Loan, LedgerError> {
        let principal = spec.principal.in_currency(self.currency());
        if self.loans().any(|l| l.id == spec.id) {
            return Err(LedgerError::DuplicateLoan(spec.id));
        }
        if !principal.is_positive() {
            return Err(LedgerError::NonPositivePrincipal);
        }
        if spec.coin_fraction < Decimal::ZERO || spec.coin_fraction > Decimal::ONE {
            return Err(LedgerError::InvalidLoan(format!(
                "coin_fraction {} outside [0,1]",
                spec.coin_fraction
            )));
        }
        if spec.annual_rate < Decimal::ZERO {
            return Err(LedgerError::InvalidLoan("negative annual rate".into()));
        }
        if spec.term_days == 0 {
            return Err(LedgerError::InvalidLoan(
                "term_days must be positive".into(),
            ));
        }
        if spec.borrower.is_empty() || spec.borrower.contains(':') || spec.borrower == "bank" {
            return Err(LedgerError::InvalidLoan(format!(
                "bad borrower entity {:?}",
                spec.borrower
            )));
        }
        if let Some(parent) = &spec.chain_parent {
            self.loan(parent).map_err(|_| {
                LedgerError::InvalidLoan(format!("unknown chain parent {parent:?}"))
            })?;
        }
        let coin =
            Money::from_decimal(principal.to_decimal() * spec.coin_fraction, self.currency())
                .map_err(|_| {
                    LedgerError::InvalidLoan("coin_fraction x principal must be whole cents".into())
                })?;
        let created = principal.checked_sub(coin)?;
        if let Some(d) = spec.origination {
            self.advance_to(d)?;
        }
        let loan = Loan {
            id: spec.id.clone(),
            borrower: spec.borrower,
            principal,
            coin_fraction: spec.coin_fraction,
            annual_rate: spec.annual_rate,
            origination: self.date(),
            term_days: spec.term_days,
            kind: spec.kind,
            chain_parent: spec.chain_parent,
            disbursement: spec.disbursement,
            borrower_type: spec.borrower_type,
            outstanding: principal,
            accrued: self.zero(),
            created_outstanding: created,
            written_down: self.zero(),
            equity_booked: self.zero(),
        };
        self.ensure_bank_chart()?;
        self.ensure_borrower_chart(&loan)?;
        let b = &loan.borrower;
        let (bank_liab, borrower_created) = match loan.disbursement {
            Disbursement::CoinAndPaper => (NOTES, format!("{b}:paper")),
            Disbursement::Deposit => (DEPOSITS, format!("{b}:deposit")),
        };
        let mut postings = vec![Posting::debit(SUSPENSE, principal)];
        if coin.is_positive() {
            postings.push(Posting::credit(CAPITAL, coin));
            postings.push(Posting::debit(format!("{b}:coin"), coin));
        }
        if created.is_positive() {
            postings.push(Posting::credit(bank_liab, created));
            postings.push(Posting::debit(borrower_created, created));
        }
        postings.push(Posting::credit(format!("{b}:loan_payable"), principal));
        self.commit(
            &format!("Loan origination {}", loan.id),
            MoneyEvent::Creation,
            postings,
        )?;
        let id = loan.id.clone();
        self.loans_mut().insert(id.clone(), loan);
        self.loan(&id)
    }

    /// Simple interest on the outstanding principal, half-up to the cent.
    /// Computes only; see [`Ledger::book_interest`].
    pub fn accrue_interest(&self, loan_id: &str, period_days: u32) -> Result<Money, LedgerError> {
        let loan = self.loan(loan_id)?;
        if !loan.is_open() {
            return Err(LedgerError::LoanClosed(loan_id.to_string()));
        }
        let factor =
            loan.annual_rate * Decimal::from(period_days) / Decimal::from(self.config().day_count);
        Ok(loan.outstanding.mul_ratio(factor))
    }

    /// Accrues `period_days` of interest onto the suspense balance.
    pub fn book_interest(&mut self, loan_id: &str, period_days: u32) -> Result<Money, LedgerError> {
        let amount = self.accrue_interest(loan_id, period_days)?;
        if amount.is_zero() {
            return Ok(amount);
        }
        let b = self.loan(loan_id)?.borrower.clone();
        self.commit(
            &format!("Interest {loan_id}"),
            MoneyEvent::Transfer,
            vec![
                Posting::debit(SUSPENSE, amount),
                Posting::credit(ACCRUED, amount),
                Posting::debit(format!("{b}:equity"), amount),
                Posting::credit(format!("{b}:loan_payable"), amount),
            ],
        )?;
        let loan = self.loans_mut().get_mut(loan_id).expect("checked");
        loan.accrued = loan.accrued.checked_add(amount)?;
        Ok(amount)
    }

    fn check_funds(&mut self, account: &str, required: Money) -> Result<(), LedgerError> {
        let available = self.balance_or_zero(account);
        if available.cents() >= required.cents() {
            return Ok(());
        }
        let err = LedgerError::InsufficientBorrowerFunds {
            account: account.to_string(),
            available,
            required,
        };
        match self.config().insufficient_funds {
            FundsCheck::Fail => Err(err),
            FundsCheck::Warn => {
                self.warn(err.to_string());
                Ok(())
            }
        }
    }

    /// Interest payment: the bank receives `amount` as income and clears
    /// booked interest from suspense.
    pub fn pay_interest(&mut self, loan_id: &str, amount: Money) -> Result<(), LedgerError> {
        let loan = self.loan(loan_id)?.clone();
        if !loan.is_open() && loan.accrued.is_zero() {
            return Err(LedgerError::LoanClosed(loan_id.to_string()));
        }
        if !amount.is_positive() {
            return Err(LedgerError::NonPositiveAmount(amount));
        }
        let funds = loan.funds_account();
        self.check_funds(&funds, amount)?;
        let b = &loan.borrower;
        let cleared = amount.min(loan.accrued);
        let extra = amount.checked_sub(cleared)?;
        let mut postings = vec![
            Posting::credit(funds.clone(), amount),
            Posting::debit(loan.receiving_account(), amount),
            Posting::credit(INCOME, amount),
        ];
        if cleared.is_positive() {
            postings.push(Posting::debit(format!("{b}:loan_payable"), cleared));
            let reserve_backed = loan.disbursement == Disbursement::Deposit
                && *self.policy() != CancellationPolicy::Cancel;
            postings.push(Posting::debit(
                if reserve_backed { CAPITAL } else { ACCRUED },
                cleared,
            ));
            postings.push(Posting::credit(SUSPENSE, cleared));
        }
        if extra.is_positive() {
            postings.push(Posting::debit(format!("{b}:equity"), extra));
        }
        self.commit(
            &format!("Interest payment {loan_id}"),
            MoneyEvent::Transfer,
            postings,
        )?;
        let loan = self.loans_mut().get_mut(loan_id).expect("checked");
        loan.accrued = loan.accrued.checked_sub(cleared)?;
        Ok(())
    }

    /// Principal payment handled according to the ledger's policy.
    pub fn pay_principal(&mut self, loan_id: &str, amount: Money) -> Result<(), LedgerError> {
        self.repay(loan_id, amount, Repayment::PerPolicy)
    }

    /// Principal payment, with `ForceCancel` destroying it regardless of policy.
    pub fn repay(
        &mut self,
        loan_id: &str,
        amount: Money,
        mode: Repayment,
    ) -> Result<(), LedgerError> {
        let loan = self.loan(loan_id)?.clone();
        let policy = match mode {
            Repayment::ForceCancel => CancellationPolicy::Cancel,
            Repayment::PerPolicy => self.policy().clone(),
        };
        if policy == CancellationPolicy::VentureRetain {
            return Err(LedgerError::PolicyViolation(
                "venture principal is retired through convert_to_equity or haircut".into(),
            ));
        }
        if !loan.is_open() {
            return Err(LedgerError::LoanClosed(loan_id.to_string()));
        }
        if !amount.is_positive() {
            return Err(LedgerError::NonPositiveAmount(amount));
        }
        if amount.cents() > loan.outstanding.cents() {
            return Err(LedgerError::Overpayment {
                amount,
                outstanding: loan.outstanding,
            });
        }
        if let CancellationPolicy::AllocateToGovernment(cfg) = &policy {
            match self.eligibility(loan_id, cfg.include_consumer)? {
                Eligibility::Eligible => {}
                other => {
                    return Err(LedgerError::PolicyViolation(format!(
                    "loan {loan_id} is {other:?}; allocation applies only to direct business loans"
                )))
                }
            }
        }
        let funds = loan.funds_account();
        self.check_funds(&funds, amount)?;

        let created_part = if amount == loan.outstanding {
            loan.created_outstanding
        } else {
            let share = loan.created_outstanding.to_decimal() / loan.outstanding.to_decimal();
            amount.mul_ratio(share).min(loan.created_outstanding)
        };
        let coin_part = amount.checked_sub(created_part)?;

        let b = &loan.borrower;
        let mut postings = vec![
            Posting::debit(format!("{b}:loan_payable"), amount),
            Posting::credit(funds, amount),
            Posting::debit(loan.receiving_account(), amount),
            Posting::credit(SUSPENSE, amount),
        ];
        let event = match &policy {
            CancellationPolicy::Cancel => MoneyEvent::Destruction,
            CancellationPolicy::RetainToBank | CancellationPolicy::AllocateToGovernment(_) => {
                let cfg = match &policy {
                    CancellationPolicy::AllocateToGovernment(cfg) => cfg.clone(),
                    _ => AllocationConfig::bank_only(),
                };
                match loan.disbursement {
                    Disbursement::Deposit => {
                        // Repaid deposit money is recognised in reserves and
                        // passed on to the recipients.
                        postings.push(Posting::debit(CAPITAL, amount));
                    }
                    Disbursement::CoinAndPaper => {
                        // Coin came into the vault; the paper it redeems is
                        // released, and the coin originally lent returns to
                        // owners' capital.
                        if created_part.is_positive() {
                            postings.push(Posting::debit(NOTES, created_part));
                        }
                        if coin_part.is_positive() {
                            self.open_account(EQUITY, AccountKind::Equity, Sector::Bank, false)?;
                            postings.push(Posting::debit(EQUITY, coin_part));
                        }
                    }
                }
                postings.extend(self.recipient_postings(amount, &cfg)?);
                MoneyEvent::Transfer
            }
            CancellationPolicy::VentureRetain => unreachable!("rejected above"),
        };
        let memo = match event {
            MoneyEvent::Destruction => format!("Payment of loan balance {loan_id} (cancelled)"),
            _ => format!("Payment of loan balance {loan_id}"),
        };
        self.commit(&memo, event, postings)?;
        let loan = self.loans_mut().get_mut(loan_id).expect("checked");
        loan.outstanding = loan.outstanding.checked_sub(amount)?;
        loan.created_outstanding = loan.created_outstanding.checked_sub(created_part)?;
        Ok(())
    }

    /// Credits for `amount` split per `cfg`: the bank share to income, each
    /// government share to its deposit at the bank.
    fn recipient_postings(
        &mut self,
        amount: Money,
        cfg: &AllocationConfig,
    ) -> Result<Vec<Posting>, LedgerError> {
        let fracs = [
            cfg.bank_frac,
            cfg.local_frac,
            cfg.state_frac,
            cfg.federal_frac,
        ];
        let shares = split_amount(amount, &fracs);
        let mut postings = Vec::new();
        if shares[0].is_positive() {
            postings.push(Posting::credit(INCOME, shares[0]));
        }
        for ((entity, sector), share) in GOVERNMENTS.iter().zip(&shares[1..]) {
            if !share.is_positive() {
                continue;
            }
            let dep =
                self.ensure_entity_account(entity, "deposit", AccountKind::Asset, true, *sector)?;
            let eq =
                self.ensure_entity_account(entity, "equity", AccountKind::Equity, false, *sector)?;
            postings.push(Posting::credit(DEPOSITS, *share));
            postings.push(Posting::debit(dep, *share));
            postings.push(Posting::credit(eq, *share));
        }
        Ok(postings)
    }

    /// Eligibility of `loan_id` for allocation, over the chain graph of all
    /// loans on the books.
    pub fn eligibility(
        &self,
        loan_id: &str,
        include_consumer: bool,
    ) -> Result<Eligibility, LedgerError> {
        let mut graph = LoanGraph::default();
        for l in self.loans() {
            graph.nodes.push(LoanNode {
                id: l.id.clone(),
                kind: l.kind,
                borrower: l.borrower_type,
            });
            if let Some(p) = &l.chain_parent {
                graph.edges.push((p.clone(), l.id.clone()));
            }
        }
        let classes = crate::policy::classify_chain_with(&graph, include_consumer)?;
        classes
            .get(loan_id)
            .copied()
            .ok_or_else(|| LedgerError::UnknownLoan(loan_id.to_string()))
    }

    fn venture_loan(&self, loan_id: &str) -> Result<Loan, LedgerError> {
        let loan = self.loan(loan_id)?.clone();
        if loan.kind != LoanKind::AtRiskVenture {
            return Err(LedgerError::WrongLoanKind(loan_id.to_string()));
        }
        if !loan.is_open() {
            return Err(LedgerError::LoanClosed(loan_id.to_string()));
        }
        Ok(loan)
    }

    /// Retires an at-risk loan against equity in the venture at book value.
    /// A value above the balance is income; a shortfall becomes a haircut.
    pub fn convert_to_equity(
        &mut self,
        loan_id: &str,
        equity_value: Money,
    ) -> Result<(), LedgerError> {
        let loan = self.venture_loan(loan_id)?;
        if equity_value.is_negative() {
            return Err(LedgerError::NonPositiveAmount(equity_value));
        }
        let o = loan.outstanding;
        let converted = equity_value.min(o);
        let b = &loan.borrower;
        if converted.is_positive() {
            self.open_account(VENTURE_EQUITY, AccountKind::Asset, Sector::Bank, false)?;
            let mut postings = vec![
                Posting::debit(VENTURE_EQUITY, equity_value),
                Posting::credit(SUSPENSE, converted),
                Posting::debit(format!("{b}:loan_payable"), converted),
                Posting::credit(format!("{b}:equity"), converted),
            ];
            let gain = equity_value.checked_sub(converted)?;
            if gain.is_positive() {
                postings.push(Posting::credit(INCOME, gain));
            }
            self.commit(
                &format!("Equity conversion {loan_id}"),
                MoneyEvent::Transfer,
                postings,
            )?;
            let loan = self.loans_mut().get_mut(loan_id).expect("checked");
            loan.outstanding = loan.outstanding.checked_sub(converted)?;
            loan.created_outstanding = loan.created_outstanding.min(loan.outstanding);
            loan.equity_booked = loan.equity_booked.checked_add(equity_value)?;
        }
        let shortfall = o.checked_sub(converted)?;
        if shortfall.is_positive() {
            self.haircut(loan_id, shortfall)?;
        }
        Ok(())
    }

    /// Writes down an at-risk loan without touching reserves.
    pub fn haircut(&mut self, loan_id: &str, writedown: Money) -> Result<(), LedgerError> {
        let loan = self.venture_loan(loan_id)?;
        if !writedown.is_positive() {
            return Err(LedgerError::NonPositiveAmount(writedown));
        }
        if writedown.cents() > loan.outstanding.cents() {
            return Err(LedgerError::WritedownExceedsOutstanding {
                writedown,
                outstanding: loan.outstanding,
            });
        }
        self.open_account(WRITEDOWNS, AccountKind::Equity, Sector::Bank, false)?;
        let b = &loan.borrower;
        self.commit(
            &format!("Haircut {loan_id}"),
            MoneyEvent::Transfer,
            vec![
                Posting::debit(WRITEDOWNS, writedown),
                Posting::credit(SUSPENSE, writedown),
                Posting::debit(format!("{b}:loan_payable"), writedown),
                Posting::credit(format!("{b}:equity"), writedown),
            ],
        )?;
        let loan = self.loans_mut().get_mut(loan_id).expect("checked");
        loan.outstanding = loan.outstanding.checked_sub(writedown)?;
        loan.created_outstanding = loan.created_outstanding.min(loan.outstanding);
        loan.written_down = loan.written_down.checked_add(writedown)?;
        Ok(())
    }
}

/// Splits `amount` by `fracs` (summing to 1): each share rounds half-up and
/// the last nonzero fraction takes the residual, so shares sum exactly.
pub fn split_amount(amount: Money, fracs: &[Decimal]) -> Vec<Money> {
    let last = fracs.iter().rposition(|f| !f.is_zero());
    let mut shares: Vec<Money> = fracs.iter().map(|f| amount.mul_ratio(*f)).collect();
    if let Some(last) = last {
        let others: i64 = shares
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != last)
            .map(|(_, m)| m.cents())
            .sum();
        shares[last] = Money::from_cents(amount.cents() - others, amount.currency());
    }
    shares
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::money::Currency;
    use std::str::FromStr;

    const F: Currency = Currency::FLORIN;

    fn m(s: &str) -> Money {
        Money::parse(s, F).unwrap()
    }

    fn d(s: &str) -> Decimal {
        Decimal::from_str(s).unwrap()
    }

    fn seeded(policy: CancellationPolicy) -> Ledger {
        let mut l = Ledger::new(F, policy).unwrap();
        l.open_account(CAPITAL, AccountKind::Asset, Sector::Bank, false)
            .unwrap();
        l.open_account(EQUITY, AccountKind::Equity, Sector::Bank, false)
            .unwrap();
        l.commit(
            "Initial conditions",
            MoneyEvent::Transfer,
            vec![
                Posting::debit(CAPITAL, m("100")),
                Posting::credit(EQUITY, m("100")),
            ],
        )
        .unwrap();
        l
    }

    fn deposit_loan(id: &str, principal: &str, kind: LoanKind) -> LoanSpec {
        let mut s = LoanSpec::new(id, &format!("b{id}"), m(principal));
        s.disbursement = Disbursement::Deposit;
        s.kind = kind;
        s
    }

    #[test]
    fn table5_origination_row() {
        let mut l = seeded(CancellationPolicy::RetainToBank);
        let mut s = LoanSpec::new("L1", "borrower", m("100"));
        s.coin_fraction = d("0.10");
        l.originate_loan(s).unwrap();
        assert_eq!(l.balance(CAPITAL).unwrap(), m("90"));
        assert_eq!(l.balance(SUSPENSE).unwrap(), m("100"));
        assert_eq!(l.balance("borrower:coin").unwrap(), m("10"));
        assert_eq!(l.balance("borrower:paper").unwrap(), m("90"));
        assert_eq!(l.money_supply(), m("100"));
        assert_eq!(
            l.transactions().last().unwrap().money_event,
            MoneyEvent::Creation
        );
        assert!(l.identity_holds());
    }

    #[test]
    fn table6_origination_row() {
        let mut l = seeded(CancellationPolicy::RetainToBank);
        l.originate_loan(deposit_loan("L1", "100", LoanKind::Commercial))
            .unwrap();
        assert_eq!(l.balance(SUSPENSE).unwrap(), m("100"));
        assert_eq!(l.balance("bL1:deposit").unwrap(), m("100"));
        assert_eq!(l.balance(DEPOSITS).unwrap(), m("100"));
    }

    #[test]
    fn origination_errors() {
        let mut l = seeded(CancellationPolicy::Cancel);
        assert_eq!(
            l.originate_loan(LoanSpec::new("L0", "b", m("0")))
                .unwrap_err(),
            LedgerError::NonPositivePrincipal
        );
        l.originate_loan(LoanSpec::new("L1", "b", m("10"))).unwrap();
        assert_eq!(
            l.originate_loan(LoanSpec::new("L1", "b", m("10")))
                .unwrap_err(),
            LedgerError::DuplicateLoan("L1".into())
        );
        let mut s = LoanSpec::new("L2", "b", m("0.03"));
        s.coin_fraction = d("0.5");
        assert!(matches!(
            l.originate_loan(s),
            Err(LedgerError::InvalidLoan(_))
        ));
    }

    #[test]
    fn accrual_examples() {
        let mut l = seeded(CancellationPolicy::Cancel);
        let mut s = LoanSpec::new("L1", "b", m("100"));
        s.annual_rate = d("0.0456");
        l.originate_loan(s).unwrap();
        assert_eq!(l.accrue_interest("L1", 30).unwrap(), m("0.38"));
        assert_eq!(l.accrue_interest("L1", 0).unwrap(), m("0"));
        let mut s = LoanSpec::new("L2", "c", m("100"));
        s.annual_rate = d("0.15");
        l.originate_loan(s).unwrap();
        // 100 x 0.15 x 72 / 360
        assert_eq!(l.accrue_interest("L2", 72).unwrap(), m("3.00"));
        assert_eq!(
            l.accrue_interest("nope", 1).unwrap_err(),
            LedgerError::UnknownLoan("nope".into())
        );
        assert_eq!(l.balance(SUSPENSE).unwrap(), m("200"));
    }

    #[test]
    fn accrue_on_closed_loan() {
        let mut l = seeded(CancellationPolicy::Cancel);
        l.originate_loan(deposit_loan("L1", "10", LoanKind::Commercial))
            .unwrap();
        l.pay_principal("L1", m("10")).unwrap();
        assert_eq!(
            l.accrue_interest("L1", 30).unwrap_err(),
            LedgerError::LoanClosed("L1".into())
        );
    }

    #[test]
    fn split_interest_payments_are_additive() {
        let run = |parts: &[&str]| {
            let mut l = seeded(CancellationPolicy::RetainToBank);
            let mut s = deposit_loan("L1", "100", LoanKind::Commercial);
            s.annual_rate = d("0.0456");
            l.originate_loan(s).unwrap();
            l.book_interest("L1", 30).unwrap();
            for p in parts {
                l.pay_interest("L1", m(p)).unwrap();
            }
            l.balance_snapshot()
        };
        assert_eq!(run(&["0.19", "0.19"]), run(&["0.38"]));
    }

    #[test]
    fn zero_interest_payment_rejected() {
        let mut l = seeded(CancellationPolicy::Cancel);
        l.originate_loan(deposit_loan("L1", "100", LoanKind::Commercial))
            .unwrap();
        assert!(matches!(
            l.pay_interest("L1", m("0")),
            Err(LedgerError::NonPositiveAmount(_))
        ));
    }

    #[test]
    fn insufficient_funds_fail_or_warn() {
        let mut l = seeded(CancellationPolicy::Cancel);
        l.originate_loan(deposit_loan("L1", "10", LoanKind::Commercial))
            .unwrap();
        let mut cfg = *l.config();
        cfg.insufficient_funds = FundsCheck::Warn;
        let mut w = Ledger::with_config(F, CancellationPolicy::Cancel, cfg).unwrap();
        w.originate_loan(deposit_loan("L1", "10", LoanKind::Commercial))
            .unwrap();
        w.pay_interest("L1", m("11")).unwrap();
        assert_eq!(w.warnings().len(), 1);
        assert!(matches!(
            l.pay_interest("L1", m("11")),
            Err(LedgerError::InsufficientBorrowerFunds { .. })
        ));
    }

    #[test]
    fn cancel_restores_money_supply() {
        let mut l = seeded(CancellationPolicy::Cancel);
        let before = l.money_supply();
        l.originate_loan(deposit_loan("L1", "100", LoanKind::Commercial))
            .unwrap();
        l.pay_principal("L1", m("40")).unwrap();
        l.pay_principal("L1", m("60")).unwrap();
        assert_eq!(l.money_supply(), before);
        assert_eq!(
            l.transactions().last().unwrap().money_event,
            MoneyEvent::Destruction
        );
        assert!(matches!(
            l.pay_principal("L1", m("1")),
            Err(LedgerError::LoanClosed(_))
        ));
    }

    #[test]
    fn overpayment_rejected() {
        let mut l = seeded(CancellationPolicy::Cancel);
        l.originate_loan(deposit_loan("L1", "100", LoanKind::Commercial))
            .unwrap();
        assert!(matches!(
            l.pay_principal("L1", m("100.01")),
            Err(LedgerError::Overpayment { .. })
        ));
    }

    #[test]
    fn allocation_default_split() {
        let mut l = seeded(CancellationPolicy::AllocateToGovernment(
            AllocationConfig::default(),
        ));
        let before = l.money_supply();
        l.originate_loan(deposit_loan("L1", "100", LoanKind::Commercial))
            .unwrap();
        l.pay_principal("L1", m("100")).unwrap();
        assert_eq!(l.balance("gov_local:deposit").unwrap(), m("25"));
        assert_eq!(l.balance("gov_state:deposit").unwrap(), m("25"));
        assert_eq!(l.balance("gov_federal:deposit").unwrap(), m("50"));
        assert_eq!(l.money_supply().checked_sub(before).unwrap(), m("100"));
        assert!(l.identity_holds());
    }

    #[test]
    fn allocation_rejects_chained_and_consumer_loans() {
        let mut l = seeded(CancellationPolicy::AllocateToGovernment(
            AllocationConfig::default(),
        ));
        let mut up = deposit_loan("L1", "100", LoanKind::Commercial);
        up.borrower_type = BorrowerType::Intermediary;
        l.originate_loan(up).unwrap();
        let mut down = deposit_loan("L2", "100", LoanKind::Commercial);
        down.chain_parent = Some("L1".into());
        l.originate_loan(down).unwrap();
        l.originate_loan(deposit_loan("L3", "100", LoanKind::Consumer))
            .unwrap();
        assert!(matches!(
            l.pay_principal("L1", m("1")),
            Err(LedgerError::PolicyViolation(_))
        ));
        assert!(matches!(
            l.pay_principal("L3", m("1")),
            Err(LedgerError::PolicyViolation(_))
        ));
        l.pay_principal("L2", m("100")).unwrap();
        l.repay("L1", m("100"), Repayment::ForceCancel).unwrap();
        assert_eq!(
            l.transactions().last().unwrap().money_event,
            MoneyEvent::Destruction
        );
    }

    #[test]
    fn venture_retain_blocks_direct_principal() {
        let mut l = seeded(CancellationPolicy::VentureRetain);
        l.originate_loan(deposit_loan("V1", "100", LoanKind::AtRiskVenture))
            .unwrap();
        assert!(matches!(
            l.pay_principal("V1", m("10")),
            Err(LedgerError::PolicyViolation(_))
        ));
    }

    #[test]
    fn convert_at_book_and_above() {
        let mut l = seeded(CancellationPolicy::VentureRetain);
        l.originate_loan(deposit_loan("V1", "100", LoanKind::AtRiskVenture))
            .unwrap();
        l.originate_loan(deposit_loan("V2", "100", LoanKind::AtRiskVenture))
            .unwrap();
        let supply = l.money_supply();
        let reserves = l.balance(CAPITAL).unwrap();
        l.convert_to_equity("V1", m("100")).unwrap();
        assert_eq!(l.balance(SUSPENSE).unwrap(), m("100"));
        assert_eq!(l.balance(VENTURE_EQUITY).unwrap(), m("100"));
        l.convert_to_equity("V2", m("160")).unwrap();
        assert_eq!(l.balance(VENTURE_EQUITY).unwrap(), m("260"));
        assert_eq!(l.balance(INCOME).unwrap(), m("60"));
        assert_eq!(l.money_supply(), supply);
        assert_eq!(l.balance(CAPITAL).unwrap(), reserves);
        assert!(matches!(
            l.convert_to_equity("V1", m("1")),
            Err(LedgerError::LoanClosed(_))
        ));
        assert!(l.identity_holds());
    }

    #[test]
    fn haircut_semantics() {
        let mut l = seeded(CancellationPolicy::VentureRetain);
        l.originate_loan(deposit_loan("V1", "100", LoanKind::AtRiskVenture))
            .unwrap();
        l.originate_loan(deposit_loan("C1", "100", LoanKind::Commercial))
            .unwrap();
        let supply = l.money_supply();
        let reserves = l.balance(CAPITAL).unwrap();
        l.haircut("V1", m("60")).unwrap();
        assert_eq!(l.loan("V1").unwrap().outstanding, m("40"));
        assert_eq!(l.balance(CAPITAL).unwrap(), reserves);
        assert_eq!(l.money_supply(), supply);
        assert!(matches!(
            l.haircut("V1", m("0")),
            Err(LedgerError::NonPositiveAmount(_))
        ));
        assert!(matches!(
            l.haircut("V1", m("40.01")),
            Err(LedgerError::WritedownExceedsOutstanding { .. })
        ));
        assert_eq!(
            l.haircut("C1", m("1")).unwrap_err(),
            LedgerError::WrongLoanKind("C1".into())
        );
        l.convert_to_equity("V1", m("10")).unwrap();
        assert_eq!(l.loan("V1").unwrap().written_down, m("90"));
        assert!(l.balance(SUSPENSE).unwrap() == m("100"));
        assert!(l.identity_holds());
    }

    #[test]
    fn split_is_exact() {
        let shares = split_amount(m("0.03"), &[d("0"), d("0.3333"), d("0.3333"), d("0.3334")]);
        assert_eq!(shares.iter().map(|s| s.cents()).sum::<i64>(), 3);
        let shares = split_amount(m("100"), &[d("1"), d("0"), d("0"), d("0")]);
        assert_eq!(shares[0], m("100"));
    }
}
