//! Even entire functions of x = sqrt(z), real for either sign of z.
//!
//! With z = κ²s² these give sinh(κs)/(κs), cosh(κs) and friends without
//! branching on whether κ is real or imaginary, and without cancellation
//! near z = 0.

const SERIES_LIMIT: f64 = 0.1;

/// sinh(x)/x.
pub fn sinhc(z: f64) -> f64 {
    if z.abs() < SERIES_LIMIT {
        series(z, 1.0, |n| 1.0 / ((2 * n + 2) as f64 * (2 * n + 3) as f64))
    } else if z > 0.0 {
        let x = z.sqrt();
        x.sinh() / x
    } else {
        let y = (-z).sqrt();
        y.sin() / y
    }
}

/// cosh(x).
pub fn cosh_sqrt(z: f64) -> f64 {
    if z >= 0.0 {
        z.sqrt().cosh()
    } else {
        (-z).sqrt().cos()
    }
}

/// (cosh(x) − 1)/x².
pub fn c2(z: f64) -> f64 {
    if z.abs() < SERIES_LIMIT {
        series(z, 0.5, |n| 1.0 / ((2 * n + 3) as f64 * (2 * n + 4) as f64))
    } else if z > 0.0 {
        let h = 0.5 * z.sqrt();
        2.0 * (h.sinh() / z.sqrt()).powi(2)
    } else {
        let h = 0.5 * (-z).sqrt();
        2.0 * (h.sin() / (-z).sqrt()).powi(2)
    }
}

/// (sinh(x) − x)/x³.
pub fn g3(z: f64) -> f64 {
    if z.abs() < SERIES_LIMIT {
        series(z, 1.0 / 6.0, |n| 1.0 / ((2 * n + 4) as f64 * (2 * n + 5) as f64))
    } else if z > 0.0 {
        let x = z.sqrt();
        (x.sinh() - x) / (x * z)
    } else {
        let y = (-z).sqrt();
        (y - y.sin()) / (y * -z)
    }
}

/// Σ t_n z^n with t_0 = `first` and t_{n+1} = t_n · ratio(n).
fn series(z: f64, first: f64, ratio: impl Fn(usize) -> f64) -> f64 {
    let mut term = first;
    let mut sum = first;
    for n in 0..30 {
        term *= z * ratio(n);
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_and_closed_forms_join() {
        for z in [-0.1000001f64, -0.0999999, 0.0999999, 0.1000001] {
            let x = z.abs().sqrt();
            let (s, c, g) = if z > 0.0 {
                (x.sinh() / x, (x.cosh() - 1.0) / z, (x.sinh() - x) / (x * z))
            } else {
                (x.sin() / x, (1.0 - x.cos()) / -z, (x - x.sin()) / (x * -z))
            };
            assert!((sinhc(z) - s).abs() < 1e-15);
            assert!((c2(z) - c).abs() < 1e-12);
            assert!((g3(z) - g).abs() < 1e-10);
        }
    }

    #[test]
    fn values_at_zero() {
        assert_eq!(sinhc(0.0), 1.0);
        assert_eq!(c2(0.0), 0.5);
        assert_eq!(g3(0.0), 1.0 / 6.0);
        assert_eq!(cosh_sqrt(0.0), 1.0);
    }
}
