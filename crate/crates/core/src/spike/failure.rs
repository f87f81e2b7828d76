use super::fluctuations::FluctuationStats;
use crate::error::{param, Error, Result};
use crate::linalg::{fix_phase, inverse_sqrt, ComplexMatrix, HermitianEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// The rank-one change `ω u uᴴ` of the whitened covariance caused by a variance change
/// `(1 + α)²` on input `index`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureHypothesis {
    pub index: usize,
    pub alpha: f64,
    /// Signed spike strength; negative for a variance drop.
    pub omega: f64,
    pub u: Vec<Complex64>,
}

/// One hypothesis per column of `h`: `v_k = T^{-1/2} H e_k`, `ω_k = ((1+α_k)² - 1) ‖v_k‖²`,
/// `u_k = v_k / ‖v_k‖` with its first non-negligible entry real positive.
pub fn failure_hypotheses(h: &ComplexMatrix, t: &ComplexMatrix, alphas: &[f64]) -> Result<Vec<FailureHypothesis>> {
    if t.rows() != h.rows() || !t.is_square() {
        return Err(Error::Dimension(format!(
            "T is {}x{} but H has {} rows",
            t.rows(),
            t.cols(),
            h.rows()
        )));
    }
    if alphas.len() != h.cols() {
        return Err(Error::Dimension(format!("{} alphas for {} inputs", alphas.len(), h.cols())));
    }
    if let Some(a) = alphas.iter().find(|&&a| !(a >= -1.0 && a.is_finite())) {
        return param(format!("alpha must be at least -1, got {a}"));
    }
    let w = inverse_sqrt(t)?;
    let v = w.matmul(h)?;
    (0..h.cols())
        .map(|k| {
            let mut u = v.column(k);
            let norm2: f64 = u.iter().map(|z| z.norm_sqr()).sum();
            if norm2 == 0.0 {
                return Err(Error::Degenerate(format!("input {k} does not reach the sensors")));
            }
            let norm = norm2.sqrt();
            u.iter_mut().for_each(|z| *z /= norm);
            fix_phase(&mut u);
            let alpha = alphas[k];
            Ok(FailureHypothesis { index: k, alpha, omega: ((1.0 + alpha).powi(2) - 1.0) * norm2, u })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Localization {
    pub index: usize,
    pub scores: Vec<f64>,
}

fn score(lambda: f64, u_hat: &[Complex64], hyp: &FailureHypothesis, st: &FluctuationStats) -> Result<f64> {
    if hyp.u.len() != u_hat.len() {
        return Err(Error::Dimension("eigenvector and hypothesis differ in length".into()));
    }
    let proj: Complex64 = hyp.u.iter().zip(u_hat).map(|(a, b)| a.conj() * b).sum();
    let v = [proj.norm_sqr(), lambda];
    Ok(-(st.n_dim as f64) * st.quadratic_form(v) - st.log_det_sigma())
}

fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (k, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = k;
        }
    }
    best
}

fn check_stats(hypotheses: &[FailureHypothesis], stats: &[FluctuationStats]) -> Result<()> {
    if hypotheses.is_empty() {
        return param("no hypotheses");
    }
    if stats.len() != hypotheses.len() {
        return param(format!("{} calibrations for {} hypotheses", stats.len(), hypotheses.len()));
    }
    Ok(())
}

/// Scores every hypothesis against the eigenpair `(λ, û)` and returns the best one, lowest
/// index on ties. `stats[k]` is the calibration for `hypotheses[k]`.
pub fn localize_failure(
    lambda: f64,
    u_hat: &[Complex64],
    hypotheses: &[FailureHypothesis],
    stats: &[FluctuationStats],
) -> Result<Localization> {
    check_stats(hypotheses, stats)?;
    let scores = hypotheses
        .iter()
        .zip(stats)
        .map(|(h, s)| score(lambda, u_hat, h, s))
        .collect::<Result<Vec<_>>>()?;
    Ok(Localization { index: argmax(&scores), scores })
}

/// Like [`localize_failure`] but picks, per hypothesis, the largest eigenpair for an upward
/// spike and the smallest for a downward one.
pub fn localize_from_eigen(
    eig: &HermitianEigen,
    hypotheses: &[FailureHypothesis],
    stats: &[FluctuationStats],
) -> Result<Localization> {
    check_stats(hypotheses, stats)?;
    let top = eig.largest();
    let bottom = eig.smallest();
    let scores = hypotheses
        .iter()
        .zip(stats)
        .map(|(h, s)| {
            let (l, u) = if h.omega > 0.0 { &top } else { &bottom };
            score(*l, u, h, s)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Localization { index: argmax(&scores), scores })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spike::calibrate_fluctuations;

    #[test]
    fn hypothesis_examples() {
        let sigma2 = 0.25;
        let h = ComplexMatrix::identity(3);
        let t = ComplexMatrix::identity(3).scale(1.0 + sigma2);
        let hyp = failure_hypotheses(&h, &t, &[1.0, 0.0, -1.0]).unwrap();
        assert!((hyp[0].omega - 3.0 / (1.0 + sigma2)).abs() < 1e-12);
        assert_eq!(hyp[1].omega, 0.0);
        assert!((hyp[2].omega + 1.0 / (1.0 + sigma2)).abs() < 1e-12);
        for h in &hyp {
            let n: f64 = h.u.iter().map(|z| z.norm_sqr()).sum();
            assert!((n - 1.0).abs() < 1e-10);
        }
        assert!(failure_hypotheses(&h, &ComplexMatrix::zeros(3, 3), &[0.0; 3]).is_err());
        assert!(failure_hypotheses(&h, &t, &[-1.5, 0.0, 0.0]).is_err());
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let st = calibrate_fluctuations(4.0, 8, 80, 1000, 9).unwrap();
        let mut u = vec![Complex64::new(0.0, 0.0); 8];
        u[0] = Complex64::new(1.0, 0.0);
        let hyp = FailureHypothesis { index: 0, alpha: 1.0, omega: 4.0, u: u.clone() };
        let twin = FailureHypothesis { index: 1, ..hyp.clone() };
        let loc = localize_failure(5.5, &u, &[hyp.clone(), twin], &[st.clone(), st.clone()]).unwrap();
        assert_eq!(loc.index, 0);
        assert_eq!(loc.scores[0], loc.scores[1]);
        let single = localize_failure(5.5, &u, &[hyp], &[st]).unwrap();
        assert_eq!(single.index, 0);
        assert!(localize_failure(5.5, &u, &[], &[]).is_err());
    }
}
