use super::NnError;

pub const PROB_CLAMP: f64 = 1e-7;

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Max-shifted softmax.
pub fn softmax(scores: &[f64]) -> Result<Vec<f64>, NnError> {
    if scores.is_empty() {
        return Err(NnError::EmptyInput("softmax"));
    }
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|e| e / sum).collect())
}

/// `∂L/∂scores` given the softmax output and `∂L/∂output`.
pub fn softmax_backward(probs: &[f64], dprobs: &[f64]) -> Vec<f64> {
    let inner: f64 = probs.iter().zip(dprobs).map(|(p, d)| p * d).sum();
    probs
        .iter()
        .zip(dprobs)
        .map(|(p, d)| p * (d - inner))
        .collect()
}

/// Binary cross-entropy with the prediction clamped to `[1e-7, 1 - 1e-7]`.
pub fn bce_loss(prediction: f64, label: bool) -> f64 {
    let p = prediction.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
    if label {
        -p.ln()
    } else {
        -(1.0 - p).ln()
    }
}

/// Derivative of [`bce_loss`] w.r.t. the pre-sigmoid logit when
/// `prediction = σ(logit)`. Zero where the clamp is active.
pub fn bce_grad_logit(prediction: f64, label: bool) -> f64 {
    if !(PROB_CLAMP..=1.0 - PROB_CLAMP).contains(&prediction) {
        return 0.0;
    }
    prediction - if label { 1.0 } else { 0.0 }
}

/// `bce_loss(σ(logit)) − bce_loss(σ(reference))` computed without
/// cancellation. Same derivative as the loss itself, but near `reference`
/// its rounding error is far below one ulp of the loss, which is what
/// finite-difference checks of very small gradients need.
pub fn bce_loss_relative(logit: f64, reference: f64, label: bool) -> f64 {
    if label {
        (sigmoid(-reference) * (reference - logit).exp_m1()).ln_1p()
    } else {
        (sigmoid(reference) * (logit - reference).exp_m1()).ln_1p()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn softmax_cases() {
        for c in [-50.0, 0.0, 3.5, 700.0] {
            assert_eq!(softmax(&[c, c]).unwrap(), vec![0.5, 0.5]);
        }
        assert_eq!(softmax(&[4.2]).unwrap(), vec![1.0]);
        assert!(matches!(softmax(&[]), Err(NnError::EmptyInput(_))));
        // e^1, e^2, e^3 normalised
        let (a, b, c) = (1f64.exp(), 2f64.exp(), 3f64.exp());
        let s = a + b + c;
        let got = softmax(&[1.0, 2.0, 3.0]).unwrap();
        for (g, w) in got.iter().zip([a / s, b / s, c / s]) {
            assert!((g - w).abs() < 1e-9);
        }
    }

    #[test]
    fn bce_cases() {
        assert!((bce_loss(0.5, true) - std::f64::consts::LN_2).abs() < 1e-12);
        assert!((bce_loss(0.5, false) - std::f64::consts::LN_2).abs() < 1e-12);
        assert!(bce_loss(1.0, true) < 1.1e-7);
        assert!((bce_loss(0.9, false) - (-(0.1f64).ln())).abs() < 1e-12);
        assert!(bce_loss(0.0, true).is_finite());
    }

    #[test]
    fn sigmoid_is_stable() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-1000.0) >= 0.0 && sigmoid(1000.0) <= 1.0);
        assert!((sigmoid(2.0) + sigmoid(-2.0) - 1.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn softmax_normalised_and_equivariant(
            xs in prop::collection::vec(-30.0f64..30.0, 1..12),
            seed in any::<u64>(),
        ) {
            let p = softmax(&xs).unwrap();
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-6);
            prop_assert!(p.iter().all(|v| *v > 0.0));
            let perm = crate::rng::Stream::new(seed).permutation(xs.len());
            let permuted: Vec<f64> = perm.iter().map(|&i| xs[i]).collect();
            let q = softmax(&permuted).unwrap();
            for (k, &i) in perm.iter().enumerate() {
                prop_assert!((q[k] - p[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn relative_loss_matches_difference() {
        for (z, z0) in [(0.3, -0.2), (-1.5, 0.7), (4.0, 4.0), (0.01, 0.0)] {
            for y in [false, true] {
                let direct = bce_loss(sigmoid(z), y) - bce_loss(sigmoid(z0), y);
                assert!((bce_loss_relative(z, z0, y) - direct).abs() < 1e-12);
            }
        }
        assert_eq!(bce_loss_relative(0.4, 0.4, true), 0.0);
    }
}
