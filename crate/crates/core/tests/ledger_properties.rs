use circuitforge::ledger::loan::{CAPITAL, EQUITY};
use circuitforge::ledger::{
    AccountKind, CancellationPolicy, Disbursement, Ledger, LedgerError, LoanKind, LoanSpec,
    MoneyEvent, Posting, Sector,
};
use circuitforge::policy::AllocationConfig;
use circuitforge::{Currency, Money};
use proptest::prelude::*;

const C: Currency = Currency::DOLLAR;

fn cents(c: i64) -> Money {
    Money::from_cents(c, C)
}

const ENTITIES: [(&str, Sector); 3] = [
    ("hh", Sector::Depositor),
    ("firm", Sector::Borrower),
    ("world", Sector::ExternalWorld),
];

fn multi_entity() -> Ledger {
    let mut l = Ledger::new(C, CancellationPolicy::Cancel).unwrap();
    for (e, s) in ENTITIES {
        l.open_account(&format!("{e}:cash"), AccountKind::Asset, s, true)
            .unwrap();
        l.open_account(&format!("{e}:goods"), AccountKind::Asset, s, false)
            .unwrap();
        l.open_account(&format!("{e}:debt"), AccountKind::Liability, s, false)
            .unwrap();
        l.open_account(&format!("{e}:equity"), AccountKind::Equity, s, false)
            .unwrap();
    }
    l
}

/// One entity's balanced leg: debit one of its accounts, credit another.
fn leg(entity: usize, dr: usize, cr: usize, amount: i64) -> Vec<Posting> {
    let names = ["cash", "goods", "debt", "equity"];
    let e = ENTITIES[entity].0;
    let cr = if cr == dr { (cr + 1) % 4 } else { cr };
    vec![
        Posting::debit(format!("{e}:{}", names[dr]), cents(amount)),
        Posting::credit(format!("{e}:{}", names[cr]), cents(amount)),
    ]
}

fn arb_tx() -> impl Strategy<Value = Vec<Posting>> {
    proptest::collection::vec((0usize..3, 0usize..4, 0usize..4, 1i64..1_000_000), 1..4).prop_map(
        |legs| {
            legs.into_iter()
                .flat_map(|(e, d, c, a)| leg(e, d, c, a))
                .collect()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn identity_after_every_commit(txs in proptest::collection::vec(arb_tx(), 1..60)) {
        let mut l = multi_entity();
        for postings in txs {
            l.commit("t", MoneyEvent::Transfer, postings).unwrap();
            prop_assert!(l.identity_holds());
        }
        let replayed = l.replayed().unwrap();
        prop_assert_eq!(replayed.balance_snapshot(), l.balance_snapshot());
    }

    #[test]
    fn rejected_transactions_change_nothing(
        txs in proptest::collection::vec(arb_tx(), 1..20),
        skew in 1i64..500,
    ) {
        let mut l = multi_entity();
        for mut postings in txs {
            let before = l.balance_snapshot();
            // Inflate one debit so the transaction no longer balances.
            postings[0].amount = cents(postings[0].amount.cents() + skew);
            let err = l.commit("bad", MoneyEvent::Transfer, postings).unwrap_err();
            let expected = matches!(
                err,
                LedgerError::UnbalancedTransaction { .. } | LedgerError::EntityImbalance { .. }
            );
            prop_assert!(expected, "unexpected error {:?}", err);
            prop_assert_eq!(l.balance_snapshot(), before);
        }
        prop_assert!(l.transactions().is_empty());
    }
}

fn seeded(policy: CancellationPolicy) -> Ledger {
    let mut l = Ledger::new(C, policy).unwrap();
    l.open_account(CAPITAL, AccountKind::Asset, Sector::Bank, false)
        .unwrap();
    l.open_account(EQUITY, AccountKind::Equity, Sector::Bank, false)
        .unwrap();
    l.commit(
        "seed",
        MoneyEvent::Transfer,
        vec![
            Posting::debit(CAPITAL, cents(1_000_000)),
            Posting::credit(EQUITY, cents(1_000_000)),
        ],
    )
    .unwrap();
    l
}

/// Deposit-funded loan, so the borrower repays out of the loan's own deposit.
fn spec(id: usize, principal: i64, kind: LoanKind) -> LoanSpec {
    let mut s = LoanSpec::new(&format!("L{id}"), &format!("b{id}"), cents(principal));
    s.kind = kind;
    s.disbursement = Disbursement::Deposit;
    s
}

/// Splits `total` into `parts` positive instalments.
fn instalments(total: i64, parts: usize) -> Vec<i64> {
    let parts = parts.min(total as usize).max(1) as i64;
    let base = total / parts;
    let mut v = vec![base; parts as usize];
    v[0] += total - base * parts;
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cancel_restores_and_allocation_adds_repaid(
        loans in proptest::collection::vec((100i64..5_000_000, 1usize..6), 1..6),
        repay_pct in 0u32..=100,
    ) {
        let mut cancel = seeded(CancellationPolicy::Cancel);
        let mut alloc = seeded(CancellationPolicy::AllocateToGovernment(AllocationConfig::default()));
        let base_c = cancel.money_supply();
        let base_a = alloc.money_supply();
        let mut repaid = 0i64;
        for (i, &(p, n)) in loans.iter().enumerate() {
            cancel.originate_loan(spec(i, p, LoanKind::Commercial)).unwrap();
            alloc.originate_loan(spec(i, p, LoanKind::Commercial)).unwrap();
            let amount = p * i64::from(repay_pct) / 100;
            if amount == 0 {
                continue;
            }
            for part in instalments(amount, n) {
                cancel.pay_principal(&format!("L{i}"), cents(part)).unwrap();
                alloc.pay_principal(&format!("L{i}"), cents(part)).unwrap();
            }
            repaid += amount;
        }
        let outstanding: i64 = loans.iter().map(|&(p, _)| p).sum::<i64>() - repaid;
        prop_assert_eq!(cancel.money_supply().cents() - base_c.cents(), outstanding);
        prop_assert_eq!(alloc.money_supply().cents() - base_a.cents(), outstanding + repaid);
        let gov: i64 = [Sector::GovernmentLocal, Sector::GovernmentState, Sector::GovernmentFederal]
            .iter()
            .map(|s| alloc.sector_equity(*s).cents())
            .sum();
        prop_assert_eq!(gov, repaid);
        prop_assert!(cancel.identity_holds() && alloc.identity_holds());
        if repay_pct == 100 {
            prop_assert_eq!(cancel.money_supply(), base_c);
        }
    }

    #[test]
    fn venture_full_loss_keeps_invested_money(
        invested in proptest::collection::vec(100i64..1_000_000, 1..6),
        haircut_first in any::<bool>(),
    ) {
        let mut l = seeded(CancellationPolicy::VentureRetain);
        let base = l.money_supply();
        let reserves = l.balance(CAPITAL).unwrap();
        for (i, &v) in invested.iter().enumerate() {
            l.originate_loan(spec(i, v, LoanKind::AtRiskVenture)).unwrap();
        }
        for (i, &v) in invested.iter().enumerate() {
            let id = format!("L{i}");
            if haircut_first && v > 1 {
                l.haircut(&id, cents(v / 2)).unwrap();
                l.haircut(&id, cents(v - v / 2)).unwrap();
            } else {
                l.convert_to_equity(&id, cents(0)).unwrap();
            }
            prop_assert_eq!(l.balance(CAPITAL).unwrap(), reserves);
        }
        let total: i64 = invested.iter().sum();
        prop_assert_eq!(l.money_supply().cents() - base.cents(), total);
        prop_assert!(l.identity_holds());
    }
}
