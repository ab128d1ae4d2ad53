//! Series arithmetic: principal-flow normalization, allocation and tax uplift.

use chrono::NaiveDate;
use rust_decimal::Decimal;

use super::{AllocationConfig, PolicyError};
use crate::dataio::{Series, Unit};

/// Maturity in months at `date`: linear between observations, flat beyond.
fn maturity_months_at(maturity: &Series, date: NaiveDate) -> Decimal {
    let pts = maturity.points();
    let to_months = |v: Decimal| match maturity.unit {
        Unit::Days => v * Decimal::from(12) / Decimal::from(365),
        _ => v,
    };
    if date <= pts[0].0 {
        return to_months(pts[0].1);
    }
    if date >= pts[pts.len() - 1].0 {
        return to_months(pts[pts.len() - 1].1);
    }
    let k = pts.partition_point(|p| p.0 <= date);
    let (d0, v0) = pts[k - 1];
    let (d1, v1) = pts[k];
    if d0 == date {
        return to_months(v0);
    }
    let span = Decimal::from((d1 - d0).num_days());
    let t = Decimal::from((date - d0).num_days());
    to_months(v0 + (v1 - v0) * t / span)
}

/// Annual principal-repayment flow implied by a loan stock and its average
/// maturity: `stock / maturity_in_years`, evaluated at every stock date.
pub fn normalize_principal_flow(stock: &Series, maturity: &Series) -> Result<Series, PolicyError> {
    if !matches!(maturity.unit, Unit::Months | Unit::Days) {
        return Err(PolicyError::UnitMismatch(maturity.unit));
    }
    let (Some(s0), Some(s1), Some(m0), Some(m1)) = (
        stock.first_date(),
        stock.last_date(),
        maturity.first_date(),
        maturity.last_date(),
    ) else {
        return Err(PolicyError::NoOverlap);
    };
    if s0 > m1 || m0 > s1 {
        return Err(PolicyError::NoOverlap);
    }
    if let Some((d, _)) = maturity.points().iter().find(|(_, v)| *v <= Decimal::ZERO) {
        return Err(PolicyError::NonPositiveMaturity(*d));
    }
    let points = stock
        .points()
        .iter()
        .map(|(d, v)| {
            (
                *d,
                *v * Decimal::from(12) / maturity_months_at(maturity, *d),
            )
        })
        .collect();
    Ok(Series::new(Unit::CurrencyBillionsPerYear, points)?)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Allocation {
    pub local: Series,
    pub state: Series,
    pub federal: Series,
    pub bank: Series,
}

impl Allocation {
    pub fn recipients(&self) -> [(&'static str, &Series); 4] {
        [
            ("local", &self.local),
            ("state", &self.state),
            ("federal", &self.federal),
            ("bank", &self.bank),
        ]
    }
}

/// Splits each observation by the config fractions. The last nonzero
/// recipient takes the residual, so shares always sum to the input.
pub fn allocate_principal(
    flow: &Series,
    cfg: &AllocationConfig,
) -> Result<Allocation, PolicyError> {
    cfg.validate()?;
    let fracs = cfg.fractions();
    let last = fracs
        .iter()
        .rposition(|f| !f.is_zero())
        .expect("fractions sum to 1");
    let mut parts: [Vec<(NaiveDate, Decimal)>; 4] = Default::default();
    for (d, v) in flow.points() {
        let mut shares = fracs.map(|f| *v * f);
        let others: Decimal = (0..4).filter(|i| *i != last).map(|i| shares[i]).sum();
        shares[last] = *v - others;
        for (i, s) in shares.iter().enumerate() {
            parts[i].push((*d, *s));
        }
    }
    let [local, state, federal, bank] =
        parts.map(|p| Series::new(flow.unit, p).expect("dates from input"));
    Ok(Allocation {
        local,
        state,
        federal,
        bank,
    })
}

/// `receipts / tax × 100`, or `None` for zero revenue.
pub fn uplift_pct(receipts: Decimal, tax: Decimal) -> Option<Decimal> {
    if tax.is_zero() {
        None
    } else {
        Some(receipts / tax * Decimal::ONE_HUNDRED)
    }
}

/// Pointwise percentage uplift of tax revenue from allocated receipts.
pub fn tax_uplift(receipts: &Series, tax_revenue: &Series) -> Result<Series, PolicyError> {
    let mut points = Vec::with_capacity(receipts.len());
    for (d, r) in receipts.points() {
        let t = tax_revenue
            .points()
            .binary_search_by_key(d, |p| p.0)
            .map(|i| tax_revenue.points()[i].1)
            .map_err(|_| PolicyError::DateMismatch(*d))?;
        points.push((
            *d,
            uplift_pct(*r, t).ok_or(PolicyError::DivisionByZeroDate(*d))?,
        ));
    }
    Ok(Series::new(Unit::Percent, points)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::str::FromStr;

    fn d(y: i32, m: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, 1).unwrap()
    }

    fn dec(s: &str) -> Decimal {
        Decimal::from_str(s).unwrap()
    }

    fn series(unit: Unit, pts: &[(NaiveDate, &str)]) -> Series {
        Series::new(unit, pts.iter().map(|(d, v)| (*d, dec(v))).collect()).unwrap()
    }

    #[test]
    fn twelve_months_is_identity() {
        let stock = series(
            Unit::CurrencyBillions,
            &[(d(2000, 1), "1357"), (d(2000, 4), "1400")],
        );
        let mat = series(Unit::Months, &[(d(2000, 1), "12")]);
        let f = normalize_principal_flow(&stock, &mat).unwrap();
        assert_eq!(
            f.values().collect::<Vec<_>>(),
            vec![dec("1357"), dec("1400")]
        );
    }

    #[test]
    fn median_example() {
        // 1357 x 12 / 17.58
        let stock = series(Unit::CurrencyBillions, &[(d(2000, 1), "1357")]);
        let mat = series(Unit::Months, &[(d(2000, 1), "17.58")]);
        let f = normalize_principal_flow(&stock, &mat).unwrap();
        let v = f.points()[0].1;
        assert!((v - dec("926.28")).abs() < dec("0.01"), "{v}");
    }

    #[test]
    fn doubling_maturity_halves_flow() {
        let stock = series(
            Unit::CurrencyBillions,
            &[(d(2000, 1), "500"), (d(2001, 1), "500")],
        );
        let m1 = series(Unit::Months, &[(d(2000, 1), "10"), (d(2001, 1), "20")]);
        let m2 = series(Unit::Months, &[(d(2000, 1), "20"), (d(2001, 1), "40")]);
        let a = normalize_principal_flow(&stock, &m1).unwrap();
        let b = normalize_principal_flow(&stock, &m2).unwrap();
        for (x, y) in a.values().zip(b.values()) {
            assert_eq!(x, y * Decimal::TWO);
        }
    }

    #[test]
    fn interpolation_and_flat_ends() {
        let mat = series(Unit::Months, &[(d(2000, 1), "12"), (d(2000, 3), "24")]);
        let mid = NaiveDate::from_ymd_opt(2000, 1, 31).unwrap();
        // 30 of 60 days
        assert_eq!(maturity_months_at(&mat, mid), dec("18"));
        assert_eq!(maturity_months_at(&mat, d(1999, 1)), dec("12"));
        assert_eq!(maturity_months_at(&mat, d(2010, 1)), dec("24"));
        let days = series(Unit::Days, &[(d(2000, 1), "365")]);
        assert_eq!(maturity_months_at(&days, d(2000, 1)), dec("12"));
    }

    #[test]
    fn normalize_errors() {
        let stock = series(Unit::CurrencyBillions, &[(d(2000, 1), "1")]);
        let late = series(Unit::Months, &[(d(2005, 1), "12")]);
        assert!(matches!(
            normalize_principal_flow(&stock, &late),
            Err(PolicyError::NoOverlap)
        ));
        let zero = series(Unit::Months, &[(d(2000, 1), "0")]);
        assert!(matches!(
            normalize_principal_flow(&stock, &zero),
            Err(PolicyError::NonPositiveMaturity(_))
        ));
    }

    #[test]
    fn allocation_example() {
        let flow = series(Unit::CurrencyBillionsPerYear, &[(d(2018, 1), "1100")]);
        let a = allocate_principal(&flow, &AllocationConfig::default()).unwrap();
        assert_eq!(a.local.points()[0].1, dec("275"));
        assert_eq!(a.state.points()[0].1, dec("275"));
        assert_eq!(a.federal.points()[0].1, dec("550"));
        let a = allocate_principal(&flow, &AllocationConfig::bank_only()).unwrap();
        assert!(a
            .local
            .values()
            .chain(a.state.values())
            .chain(a.federal.values())
            .all(|v| v.is_zero()));
    }

    #[test]
    fn uplift_examples() {
        let r = uplift_pct(dec("1100"), dec("2643")).unwrap();
        assert!((r - dec("41.62")).abs() < dec("0.005"), "{r}");
        let r = uplift_pct(dec("1100"), dec("2743")).unwrap();
        assert!((r - dec("40.10")).abs() < dec("0.005"), "{r}");
        assert_eq!(uplift_pct(dec("0"), dec("2743")), Some(Decimal::ZERO));
        let rec = series(Unit::CurrencyBillions, &[(d(2018, 1), "1100")]);
        let zero = series(Unit::CurrencyBillions, &[(d(2018, 1), "0")]);
        assert!(matches!(
            tax_uplift(&rec, &zero),
            Err(PolicyError::DivisionByZeroDate(_))
        ));
        let other = series(Unit::CurrencyBillions, &[(d(2019, 1), "2743")]);
        assert!(matches!(
            tax_uplift(&rec, &other),
            Err(PolicyError::DateMismatch(_))
        ));
    }

    proptest! {
        #[test]
        fn shares_sum_to_input(
            values in proptest::collection::vec(-1_000_000_000i64..1_000_000_000, 1..20),
            w in proptest::collection::vec(0u32..1000, 4),
        ) {
            let total: u32 = w.iter().sum();
            prop_assume!(total > 0);
            // Fractions in thousandths with the remainder on the last slot.
            let mut f: Vec<Decimal> = w.iter().map(|x| Decimal::new((*x * 1000 / total) as i64, 3)).collect();
            let used: Decimal = f[..3].iter().sum();
            f[3] = Decimal::ONE - used;
            let cfg = AllocationConfig {
                local_frac: f[0], state_frac: f[1], federal_frac: f[2], bank_frac: f[3],
                include_consumer: false,
            };
            prop_assume!(cfg.validate().is_ok());
            let pts: Vec<_> = values.iter().enumerate()
                .map(|(i, v)| (d(2000 + i as i32, 1), Decimal::new(*v, 2))).collect();
            let flow = Series::new(Unit::CurrencyBillionsPerYear, pts).unwrap();
            let a = allocate_principal(&flow, &cfg).unwrap();
            for (i, (_, v)) in flow.points().iter().enumerate() {
                let s = a.local.points()[i].1 + a.state.points()[i].1 + a.federal.points()[i].1 + a.bank.points()[i].1;
                prop_assert_eq!(s, *v);
            }
        }

        #[test]
        fn normalize_is_scale_equivariant(k in 1i64..1000, m in 1i64..600) {
            let stock = series(Unit::CurrencyBillions, &[(d(2000, 1), "1357"), (d(2001, 1), "1200.5")]);
            let scaled = Series::new(Unit::CurrencyBillions,
                stock.points().iter().map(|(dt, v)| (*dt, *v * Decimal::from(k))).collect()).unwrap();
            let mat = Series::new(Unit::Months, vec![(d(2000, 1), Decimal::new(m, 1))]).unwrap();
            let a = normalize_principal_flow(&stock, &mat).unwrap();
            let b = normalize_principal_flow(&scaled, &mat).unwrap();
            for (x, y) in a.values().zip(b.values()) {
                prop_assert!((x * Decimal::from(k) - y).abs() < Decimal::new(1, 12));
            }
        }
    }
}
