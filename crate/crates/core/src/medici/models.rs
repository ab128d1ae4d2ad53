//! The three earnings models and their required-rate solvers.
//!
//! Model 1 treats a period's reported earnings as a single compounded
//! multiple of capital. Models 2 and 3 run a year loop in which profit is
//! distributed each year and part of it (model 2) or a slice of capital
//! (model 3) is retained. Model 3 also lends a multiple `k` of capital out
//! of deposits and pays depositors a share of the interest that portion
//! earns.

use serde::{Deserialize, Serialize};

use super::MediciError;
use crate::rootfind::{bisect, RootError};

/// Search interval for required annual rates.
pub const RATE_BRACKET: (f64, f64) = (0.0, 5.0);

/// One reporting period: capital going in and the earnings reported out.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTarget {
    pub period_label: String,
    pub start_year: i32,
    pub end_year: i32,
    pub starting_capital: f64,
    pub reported_earnings: f64,
    pub years: u32,
    /// Leading years whose profit grows capital but is not part of
    /// `reported_earnings`.
    #[serde(default)]
    pub uncounted_years: u32,
}

impl CalibrationTarget {
    pub fn new(label: &str, start_year: i32, end_year: i32, capital: f64, earnings: f64) -> Self {
        CalibrationTarget {
            period_label: label.to_string(),
            start_year,
            end_year,
            starting_capital: capital,
            reported_earnings: earnings,
            years: (end_year - start_year).max(0) as u32,
            uncounted_years: 0,
        }
    }
}

/// 1 + earnings / capital.
pub fn model1_multiple(capital: f64, earnings: f64) -> Result<f64, MediciError> {
    if capital <= 0.0 {
        return Err(MediciError::NonPositiveCapital(capital));
    }
    Ok(1.0 + earnings / capital)
}

/// Yearly growth factor that compounds to the period multiple.
pub fn model1_growth(capital: f64, earnings: f64, years: f64) -> Result<f64, MediciError> {
    if years <= 0.0 {
        return Err(MediciError::NonPositiveYears(years));
    }
    Ok(model1_multiple(capital, earnings)?.powf(1.0 / years))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelRun {
    pub distributions: f64,
    pub end_capital: f64,
}

fn check_capital(c: f64) -> Result<(), MediciError> {
    if c > 0.0 && c.is_finite() {
        Ok(())
    } else {
        Err(MediciError::NonPositiveCapital(c))
    }
}

fn check_model2(f: f64, rate: f64) -> Result<(), MediciError> {
    if !(0.0..1.0).contains(&f) {
        return Err(MediciError::InvalidParameter(format!(
            "retention of profit {f} outside [0, 1)"
        )));
    }
    if rate.is_nan() || rate < 0.0 {
        return Err(MediciError::InvalidParameter(format!("rate {rate}")));
    }
    Ok(())
}

fn check_model3(f: f64, k: f64, share: f64) -> Result<(), MediciError> {
    if f.is_nan() || f < 0.0 {
        return Err(MediciError::InvalidParameter(format!(
            "retention of capital {f}"
        )));
    }
    if k.is_nan() || k < 0.0 {
        return Err(MediciError::InvalidParameter(format!(
            "deposit multiple {k}"
        )));
    }
    if !(0.0..=1.0).contains(&share) {
        return Err(MediciError::InvalidParameter(format!(
            "depositor share {share} outside [0, 1]"
        )));
    }
    Ok(())
}

/// Year loop for model 2. Profit `rate * C` is earned at year end; `f` of
/// it is added to capital and the rest distributed. The first `uncounted`
/// years still grow capital but their distributions are not summed.
pub fn model2_run(
    capital0: f64,
    years: u32,
    uncounted: u32,
    f: f64,
    rate: f64,
) -> Result<ModelRun, MediciError> {
    check_capital(capital0)?;
    check_model2(f, rate)?;
    let mut c = capital0;
    let mut dist = 0.0;
    for t in 0..years {
        let profit = rate * c;
        if t >= uncounted {
            dist += (1.0 - f) * profit;
        }
        c += f * profit;
    }
    Ok(ModelRun {
        distributions: dist,
        end_capital: c,
    })
}

pub fn model2_distributions(
    capital0: f64,
    years: u32,
    f: f64,
    rate: f64,
) -> Result<f64, MediciError> {
    Ok(model2_run(capital0, years, 0, f, rate)?.distributions)
}

/// Year loop for model 3. Lending is `C * (1 + k)`; the bank keeps all
/// interest on its own capital and `1 - share` of the interest on the
/// deposit-funded part. `f * C` comes out of that income into capital.
pub fn model3_run(
    capital0: f64,
    years: u32,
    uncounted: u32,
    f: f64,
    k: f64,
    share: f64,
    rate: f64,
) -> Result<ModelRun, MediciError> {
    check_capital(capital0)?;
    check_model3(f, k, share)?;
    if rate.is_nan() || rate < 0.0 {
        return Err(MediciError::InvalidParameter(format!("rate {rate}")));
    }
    let mut c = capital0;
    let mut dist = 0.0;
    for t in 0..years {
        let income = rate * c * (1.0 + k * (1.0 - share));
        let retained = f * c;
        if t >= uncounted {
            dist += income - retained;
        }
        c += retained;
    }
    Ok(ModelRun {
        distributions: dist,
        end_capital: c,
    })
}

pub fn model3_distributions(
    capital0: f64,
    years: u32,
    f: f64,
    k: f64,
    share: f64,
    rate: f64,
) -> Result<f64, MediciError> {
    Ok(model3_run(capital0, years, 0, f, k, share, rate)?.distributions)
}

fn solve<F>(target: f64, forward: F) -> Result<f64, MediciError>
where
    F: Fn(f64) -> f64,
{
    let (lo, hi) = RATE_BRACKET;
    let tol = 1e-9 * target.abs().max(1.0);
    bisect(|r| forward(r) - target, lo, hi, tol).map_err(|e| match e {
        RootError::NoBracket { .. } => MediciError::NoBracket { lo, hi, target },
    })
}

/// Rate at which model 2 distributes exactly the reported earnings,
/// starting from `capital_in`.
pub fn model2_required_rate(
    target: &CalibrationTarget,
    f: f64,
    capital_in: f64,
) -> Result<f64, MediciError> {
    check_capital(capital_in)?;
    check_model2(f, 0.0)?;
    if target.reported_earnings == 0.0 {
        return Ok(0.0);
    }
    let (years, skip) = (target.years, target.uncounted_years);
    solve(target.reported_earnings, |r| {
        model2_run(capital_in, years, skip, f, r)
            .map(|m| m.distributions)
            .unwrap_or(f64::NAN)
    })
}

pub fn model3_required_rate(
    target: &CalibrationTarget,
    f: f64,
    k: f64,
    share: f64,
    capital_in: f64,
) -> Result<f64, MediciError> {
    check_capital(capital_in)?;
    check_model3(f, k, share)?;
    let (years, skip) = (target.years, target.uncounted_years);
    solve(target.reported_earnings, |r| {
        model3_run(capital_in, years, skip, f, k, share, r)
            .map(|m| m.distributions)
            .unwrap_or(f64::NAN)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn closed_form(c0: f64, n: u32, f: f64, r: f64) -> f64 {
        let g = f * r;
        if g == 0.0 {
            return (1.0 - f) * r * c0 * n as f64;
        }
        (1.0 - f) * r * c0 * ((1.0 + g).powi(n as i32) - 1.0) / g
    }

    #[test]
    fn model1_rows() {
        let m = model1_multiple(8000.0, 152_820.0).unwrap();
        assert!((m - 20.1025).abs() < 1e-9);
        let cases = [
            (1200.0, 1.5, 1.097653),
            (152_820.0, 23.0, 1.139365),
            (186_382.0, 15.0, 1.237004),
            (290_791.0, 15.0, 1.272971),
        ];
        for (e, y, want) in cases {
            let g = model1_growth(8000.0, e, y).unwrap();
            assert!((g - want).abs() < 1e-5, "{e}: {g}");
        }
        assert_eq!(model1_growth(5000.0, 0.0, 7.0).unwrap(), 1.0);
        assert!(matches!(
            model1_growth(0.0, 1.0, 1.0),
            Err(MediciError::NonPositiveCapital(_))
        ));
        assert!(model1_growth(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn model2_forward_examples() {
        let run = model2_run(8000.0, 23, 0, 0.10, 0.5111).unwrap();
        assert!((run.distributions - 152_820.0).abs() / 152_820.0 < 0.02);
        assert!((run.distributions - closed_form(8000.0, 23, 0.10, 0.5111)).abs() < 1e-6);
        assert!((run.end_capital - 8000.0 * 1.05111f64.powi(23)).abs() < 1e-6);
        assert!((run.end_capital - 25_200.0).abs() < 100.0);
        let p2 = model2_distributions(run.end_capital, 15, 0.10, 0.4069).unwrap();
        assert!((p2 - 186_382.0).abs() / 186_382.0 < 0.01);
        assert_eq!(model2_distributions(8000.0, 23, 0.1, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn model2_solver_and_errors() {
        let t = CalibrationTarget::new("p", 1397, 1420, 8000.0, 152_820.0);
        assert_eq!(t.years, 23);
        let r = model2_required_rate(&t, 0.10, 8000.0).unwrap();
        let back = model2_distributions(8000.0, 23, 0.10, r).unwrap();
        assert!((back - 152_820.0).abs() / 152_820.0 < 1e-6);
        let zero = CalibrationTarget::new("p", 1397, 1420, 8000.0, 0.0);
        assert_eq!(model2_required_rate(&zero, 0.1, 8000.0).unwrap(), 0.0);
        let huge = CalibrationTarget::new("p", 1397, 1398, 8000.0, 1e12);
        assert!(matches!(
            model2_required_rate(&huge, 0.1, 8000.0),
            Err(MediciError::NoBracket { .. })
        ));
        assert!(model2_run(8000.0, 3, 0, 1.0, 0.1).is_err());
        assert!(model2_run(-1.0, 3, 0, 0.1, 0.1).is_err());
    }

    #[test]
    fn model3_limits() {
        // k = 0 is a capital-only bank: income r*C, retention f*C.
        let mut c = 8000.0;
        let mut want = 0.0;
        for _ in 0..10 {
            want += 0.3 * c - 0.05 * c;
            c *= 1.05;
        }
        let got = model3_distributions(8000.0, 10, 0.05, 0.0, 0.5, 0.3).unwrap();
        assert!((got - want).abs() < 1e-6);
        assert!(model3_run(8000.0, 3, 0, 0.1, -1.0, 0.5, 0.1).is_err());
        assert!(model3_run(8000.0, 3, 0, 0.1, 1.0, 1.5, 0.1).is_err());
    }

    #[test]
    fn model3_round_trip() {
        let t = CalibrationTarget::new("p", 1420, 1435, 9000.0, 100_000.0);
        let r = model3_required_rate(&t, 0.025, 3.0, 0.5, 9000.0).unwrap();
        let back = model3_distributions(9000.0, 15, 0.025, 3.0, 0.5, r).unwrap();
        assert!((back - 100_000.0).abs() / 100_000.0 < 1e-6);
    }

    proptest! {
        #[test]
        fn model2_closed_form_agrees(
            c0 in 100.0f64..1e5, n in 1u32..40, f in 0.0f64..0.5, r in 0.0f64..1.5
        ) {
            let loop_v = model2_distributions(c0, n, f, r).unwrap();
            let cf = closed_form(c0, n, f, r);
            prop_assert!((loop_v - cf).abs() <= 1e-6 * cf.abs().max(1.0));
        }

        #[test]
        fn forward_models_increase_in_rate(
            c0 in 100.0f64..1e5, n in 1u32..30, f in 0.0f64..0.5,
            k in 0.0f64..8.0, r in 0.0f64..2.0, dr in 0.001f64..0.5
        ) {
            prop_assert!(model2_distributions(c0, n, f, r + dr).unwrap()
                > model2_distributions(c0, n, f, r).unwrap());
            prop_assert!(model3_distributions(c0, n, f, k, 0.5, r + dr).unwrap()
                > model3_distributions(c0, n, f, k, 0.5, r).unwrap());
        }

        #[test]
        fn model3_rate_falls_with_deposits(k in 0.0f64..7.0, dk in 0.1f64..3.0) {
            let t = CalibrationTarget::new("p", 1397, 1420, 8000.0, 152_820.0);
            let a = model3_required_rate(&t, 0.025, k, 0.5, 8000.0).unwrap();
            let b = model3_required_rate(&t, 0.025, k + dk, 0.5, 8000.0).unwrap();
            prop_assert!(b < a);
        }
    }
}
