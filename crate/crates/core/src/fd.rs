//! Central differences with one Richardson step.

use crate::error::{Error, Result};

/// Combine central differences taken at steps h and h/2.
///
/// `coarse` and `fine` hold several derivatives computed together. The
/// extrapolated values are returned unless they differ from the fine-step
/// values by more than `rel_tol` of max(largest |value|, `floor`).
pub(crate) fn extrapolate(
    coarse: &[f64],
    fine: &[f64],
    floor: f64,
    rel_tol: f64,
    h: f64,
) -> Result<Vec<f64>> {
    let out: Vec<f64> = coarse
        .iter()
        .zip(fine)
        .map(|(c, f)| (4.0 * f - c) / 3.0)
        .collect();
    let scale = out.iter().fold(floor.abs(), |m, v| m.max(v.abs()));
    let worst = out
        .iter()
        .zip(fine)
        .map(|(r, f)| (r - f).abs())
        .fold(0.0, f64::max);
    let disagreement = if scale > 0.0 { worst / scale } else { worst };
    if !disagreement.is_finite() || disagreement > rel_tol {
        return Err(Error::FiniteDifference {
            disagreement,
            suggested_step: 0.1 * h,
        });
    }
    Ok(out)
}

/// Retries with the step cut by this factor when Richardson disagrees.
const STEP_CUT: f64 = 4.0;
const MAX_CUTS: usize = 2;

/// Richardson-extrapolated derivative from a central-difference closure,
/// starting at step `h` and shrinking it up to `MAX_CUTS` times.
pub(crate) fn derivative(
    central: impl Fn(f64) -> Result<Vec<f64>>,
    h: f64,
    floor: f64,
    rel_tol: f64,
) -> Result<Vec<f64>> {
    let mut step = h;
    let mut coarse = central(step)?;
    for cut in 0..=MAX_CUTS {
        let fine = central(0.5 * step)?;
        match extrapolate(&coarse, &fine, floor, rel_tol, step) {
            Err(Error::FiniteDifference { .. }) if cut < MAX_CUTS => {
                step /= STEP_CUT;
                coarse = central(step)?;
            }
            other => return other,
        }
    }
    unreachable!()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sine_derivative() {
        let x: f64 = 0.7;
        let d = derivative(|h| Ok(vec![((x + h).sin() - (x - h).sin()) / (2.0 * h)]), 1e-2, 0.0, 1e-5)
            .unwrap();
        assert!((d[0] - x.cos()).abs() < 1e-10);
    }

    #[test]
    fn rough_function_is_rejected() {
        let f = |x: f64| (1e4 * x).sin();
        let r = derivative(|h| Ok(vec![(f(h) - f(-h)) / (2.0 * h)]), 1e-2, 0.0, 1e-5);
        assert!(matches!(r, Err(Error::FiniteDifference { .. })));
    }
}
