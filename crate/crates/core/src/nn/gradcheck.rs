//! Central finite-difference gradient checks.

use super::NnError;
use crate::rng::Stream;

pub const FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub struct Probe {
    pub index: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub relative_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub max_relative_error: f64,
    pub probes: Vec<Probe>,
}

impl GradCheckReport {
    pub fn worst(&self) -> Option<&Probe> {
        self.probes
            .iter()
            .max_by(|a, b| a.relative_error.total_cmp(&b.relative_error))
    }
}

/// `|a − f| / max(|a|, |f|, 1e-8)`
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8)
}

/// Compares `analytic` (the claimed gradient of `loss` at `point`) against
/// central differences on `probe_count` randomly chosen coordinates (all of
/// them if `probe_count` is at least the dimension).
pub fn grad_check<F>(
    mut loss: F,
    point: &[f64],
    analytic: &[f64],
    probe_count: usize,
    rng: &mut Stream,
) -> Result<GradCheckReport, NnError>
where
    F: FnMut(&[f64]) -> f64,
{
    if point.len() != analytic.len() {
        return Err(NnError::ShapeMismatch {
            context: "grad_check",
            expected: vec![point.len()],
            found: vec![analytic.len()],
        });
    }
    let base = loss(point);
    if !base.is_finite() {
        return Err(NnError::NonFiniteLoss(base));
    }
    let mut indices = rng.permutation(point.len());
    indices.truncate(probe_count.min(point.len()));
    let mut x = point.to_vec();
    let mut probes = Vec::with_capacity(indices.len());
    for index in indices {
        let orig = x[index];
        x[index] = orig + FD_STEP;
        let plus = loss(&x);
        x[index] = orig - FD_STEP;
        let minus = loss(&x);
        x[index] = orig;
        if !plus.is_finite() || !minus.is_finite() {
            return Err(NnError::NonFiniteLoss(if plus.is_finite() {
                minus
            } else {
                plus
            }));
        }
        let numeric = (plus - minus) / (2.0 * FD_STEP);
        probes.push(Probe {
            index,
            analytic: analytic[index],
            numeric,
            relative_error: relative_error(analytic[index], numeric),
        });
    }
    let max_relative_error = probes.iter().map(|p| p.relative_error).fold(0.0, f64::max);
    Ok(GradCheckReport {
        max_relative_error,
        probes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_loss_is_exact() {
        let w = [0.5, -1.5, 2.0, 3.25];
        let f = |x: &[f64]| x.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
        let r = grad_check(f, &[0.1, 0.2, 0.3, 0.4], &w, 10, &mut Stream::new(0)).unwrap();
        assert_eq!(r.probes.len(), 4);
        assert!(r.max_relative_error < 1e-9, "{}", r.max_relative_error);
    }

    #[test]
    fn corrupted_gradient_is_flagged() {
        let f = |x: &[f64]| x.iter().map(|v| v * v * v).sum::<f64>();
        let x = [0.7, -0.4, 1.1];
        let mut g: Vec<f64> = x.iter().map(|v| 3.0 * v * v).collect();
        let ok = grad_check(f, &x, &g, 3, &mut Stream::new(1)).unwrap();
        assert!(ok.max_relative_error < 1e-8);
        g[1] *= 2.0;
        let bad = grad_check(f, &x, &g, 3, &mut Stream::new(1)).unwrap();
        assert!(bad.max_relative_error > 0.3);
        assert_eq!(bad.worst().unwrap().index, 1);
    }

    #[test]
    fn non_finite_loss() {
        let f = |x: &[f64]| (x[0]).ln();
        assert!(matches!(
            grad_check(f, &[-1.0], &[0.0], 1, &mut Stream::new(0)),
            Err(NnError::NonFiniteLoss(_))
        ));
    }
}
