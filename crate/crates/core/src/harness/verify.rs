//! Certificates for solver output and their independent re-check.
//!
//! A certificate carries the system, the feedback gain and what the solver
//! claims about `A + B K C`. Verification rebuilds `A + B K C` from the
//! serialized system alone, extracts its annihilating polynomial from a
//! fresh random Krylov sequence and, for stability claims, computes the
//! eigenvalues directly.

use serde::{Deserialize, Serialize};

use crate::driver::HURWITZ_MARGIN;
use crate::error::Result;
use crate::feedback::{FeedbackSystem, VERIFY_RELATIVE_TOLERANCE};
use crate::harness::instance::reference_polynomial;
use crate::harness::io::{matrix_format, system_format};
use crate::numerics::{eigenvalues, DenseMatrix, MonicPoly, Tolerance};
use crate::rng::substream;

// Stream of the certificate seed used for the fresh Krylov start.
const VERIFY_STREAM: u64 = 7;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Certificate {
    /// What produced the gain, e.g. `"exp1 rep 3"`.
    pub label: String,
    #[serde(with = "system_format")]
    pub system: FeedbackSystem,
    #[serde(with = "matrix_format")]
    pub k: DenseMatrix,
    /// Annihilating polynomial of `A + B K C` as tracked by the solver.
    pub claimed: MonicPoly,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<MonicPoly>,
    /// Claimed `||target - claimed|| / ||target||`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub claimed_relative_distance: Option<f64>,
    /// Claims every eigenvalue of `A + B K C` has negative real part.
    #[serde(default)]
    pub claims_hurwitz: bool,
    pub verify_seed: u64,
}

impl Certificate {
    pub fn new(
        label: impl Into<String>,
        system: &FeedbackSystem,
        k: &DenseMatrix,
        claimed: &MonicPoly,
        seed: u64,
    ) -> Self {
        Certificate {
            label: label.into(),
            system: system.clone(),
            k: k.clone(),
            claimed: claimed.clone(),
            target: None,
            claimed_relative_distance: None,
            claims_hurwitz: false,
            verify_seed: seed,
        }
    }

    /// Records the target and the claimed relative distance to it.
    pub fn with_target(mut self, target: &MonicPoly) -> Self {
        self.claimed_relative_distance = Some(target.distance(&self.claimed) / target.norm());
        self.target = Some(target.clone());
        self
    }

    pub fn with_hurwitz_claim(mut self) -> Self {
        self.claims_hurwitz = true;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateCheck {
    pub label: String,
    /// `||extracted - claimed|| / ||claimed||`.
    pub mismatch: f64,
    /// `||target - extracted|| / ||target||`, when a target is present.
    pub recomputed_relative_distance: Option<f64>,
    /// Largest eigenvalue real part of `A + B K C`, when stability is claimed.
    pub max_real_part: Option<f64>,
    pub passed: bool,
    pub reason: Option<String>,
}

/// Re-checks `cert` at [`VERIFY_RELATIVE_TOLERANCE`]: the fresh extraction
/// must match the claimed polynomial, must be as close to the target as
/// claimed (within the same tolerance), and a stability claim must hold for
/// the eigenvalues of `A + B K C`.
pub fn verify_certificate(cert: &Certificate, tol: &Tolerance) -> CertificateCheck {
    match check(cert, tol) {
        Ok(c) => c,
        Err(e) => CertificateCheck {
            label: cert.label.clone(),
            mismatch: f64::INFINITY,
            recomputed_relative_distance: None,
            max_real_part: None,
            passed: false,
            reason: Some(e.to_string()),
        },
    }
}

fn check(cert: &Certificate, tol: &Tolerance) -> Result<CertificateCheck> {
    let closed = cert.system.closed_loop(&cert.k)?;
    let mut rng = substream(cert.verify_seed, VERIFY_STREAM);
    let extracted = reference_polynomial(&closed, &mut rng, tol)?;
    let mut reasons = Vec::new();

    let mismatch = if extracted.degree() == cert.claimed.degree() {
        extracted.relative_distance(&cert.claimed)
    } else {
        f64::INFINITY
    };
    if !(mismatch <= VERIFY_RELATIVE_TOLERANCE) {
        reasons.push(format!("recomputed polynomial differs by {mismatch:.3e}"));
    }

    let recomputed_relative_distance = match &cert.target {
        Some(t) if t.degree() == extracted.degree() => {
            let r = t.distance(&extracted) / t.norm();
            let claimed = cert.claimed_relative_distance.unwrap_or(0.0);
            if !(r <= claimed + VERIFY_RELATIVE_TOLERANCE) {
                reasons.push(format!("distance to target {r:.3e} exceeds claimed {claimed:.3e}"));
            }
            Some(r)
        }
        Some(_) => {
            reasons.push("target degree differs from system dimension".into());
            None
        }
        None => None,
    };

    let max_real_part = if cert.claims_hurwitz {
        let re = eigenvalues(&closed)?.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        if !(re < -HURWITZ_MARGIN) {
            reasons.push(format!("eigenvalue with real part {re:.3e}"));
        }
        Some(re)
    } else {
        None
    };

    Ok(CertificateCheck {
        label: cert.label.clone(),
        mismatch,
        recomputed_relative_distance,
        max_real_part,
        passed: reasons.is_empty(),
        reason: (!reasons.is_empty()).then(|| reasons.join("; ")),
    })
}
