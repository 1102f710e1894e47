//! Machine-readable verification reports. Serialization is deterministic:
//! fixed field order, no timestamps, exact integers only.

use super::config::InstanceConfig;
use super::ledger::PrecisionLedger;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    #[serde(rename = "certified-consistent")]
    CertifiedConsistent,
    #[serde(rename = "violation")]
    Violation,
    #[serde(rename = "insufficient-precision")]
    InsufficientPrecision,
    #[serde(rename = "skipped")]
    Skipped,
}

/// A violation always carries enough to reproduce it: the instance, the
/// precisions, and the offending datum.
#[derive(Debug, Clone, Serialize)]
pub struct Reproducer {
    pub instance: InstanceConfig,
    pub ledger: PrecisionLedger,
    pub datum: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub status: Status,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reproducer: Option<Box<Reproducer>>,
}

impl CheckResult {
    pub fn skipped(reason: &str) -> Self {
        CheckResult { status: Status::Skipped, detail: reason.into(), reproducer: None }
    }

    pub fn ok(detail: String) -> Self {
        CheckResult { status: Status::CertifiedConsistent, detail, reproducer: None }
    }

    pub fn violation(detail: String, reproducer: Reproducer) -> Self {
        CheckResult {
            status: Status::Violation,
            detail,
            reproducer: Some(Box::new(reproducer)),
        }
    }

    pub fn insufficient(detail: String) -> Self {
        CheckResult { status: Status::InsufficientPrecision, detail, reproducer: None }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PolygonSection {
    pub m_max: usize,
    pub d: u64,
    pub normalized_volume: u64,
    /// Exact values as `"num/den"`, abscissae `0..=m_max`.
    pub arithmetic_values: Vec<String>,
    pub hodge_values: Vec<String>,
    pub scaled_hodge_values: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct NewtonSection {
    /// `(abscissa, ord or ">=N")`.
    pub points: Vec<(usize, String)>,
    pub hull_vertices: Vec<(usize, i64)>,
    pub certified_up_to: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct DworkSection {
    pub stabilized_bound: u32,
    pub reverified_at: u32,
    pub basis_size: usize,
    pub gamma_checked: usize,
    pub entries_checked: usize,
    pub zero_entries: usize,
    pub findings: Vec<String>,
    pub points: Vec<(usize, String)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpecializationCheck {
    pub m: u32,
    pub window: u64,
    pub status: Status,
    pub detail: String,
    pub points: Vec<(usize, String)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Checks {
    /// Arithmetic polygon dominates the scaled Hodge polygon and meets it at
    /// the normalized volume.
    pub arithmetic_vs_hodge: CheckResult,
    /// Direct-engine Newton points dominate `b(p-1)·Hodge`.
    pub np_hodge_bound: CheckResult,
    /// Direct-engine Newton points dominate `b·arithmetic`.
    pub np_arithmetic_bound: CheckResult,
    /// Operator-engine coefficient ords dominate `b·arithmetic` (the
    /// unscaled form is recorded in the detail).
    pub operator_coefficient_bound: CheckResult,
    /// The two product identities between the L- and C-functions.
    pub lc_identities: CheckResult,
    /// Coefficientwise agreement of the two engines.
    pub cross_engine: CheckResult,
    /// Ceiling estimates on every stored operator-matrix entry.
    pub entry_bounds: CheckResult,
    pub specializations: Vec<SpecializationCheck>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub instance: InstanceConfig,
    pub ledger: PrecisionLedger,
    pub warnings: Vec<String>,
    pub polygons: PolygonSection,
    pub checks: Checks,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub newton: Option<NewtonSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dwork: Option<DworkSection>,
    pub exit_code: i32,
}

impl VerificationReport {
    /// `0` all certified, `2` any violation, `3` any insufficient precision.
    pub fn compute_exit_code(checks: &Checks) -> i32 {
        let mut all: Vec<Status> = vec![
            checks.arithmetic_vs_hodge.status,
            checks.np_hodge_bound.status,
            checks.np_arithmetic_bound.status,
            checks.operator_coefficient_bound.status,
            checks.lc_identities.status,
            checks.cross_engine.status,
            checks.entry_bounds.status,
        ];
        all.extend(checks.specializations.iter().map(|s| s.status));
        if all.contains(&Status::Violation) {
            2
        } else if all.contains(&Status::InsufficientPrecision) {
            3
        } else {
            0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn checks_with(status: Status) -> Checks {
        let ok = CheckResult::ok("fine".into());
        Checks {
            arithmetic_vs_hodge: ok.clone(),
            np_hodge_bound: CheckResult { status, detail: String::new(), reproducer: None },
            np_arithmetic_bound: ok.clone(),
            operator_coefficient_bound: ok.clone(),
            lc_identities: ok.clone(),
            cross_engine: ok.clone(),
            entry_bounds: ok.clone(),
            specializations: vec![SpecializationCheck {
                m: 1,
                window: 4,
                status: Status::Skipped,
                detail: String::new(),
                points: vec![],
            }],
        }
    }

    #[test]
    fn exit_code_precedence() {
        assert_eq!(
            VerificationReport::compute_exit_code(&checks_with(Status::CertifiedConsistent)),
            0
        );
        assert_eq!(
            VerificationReport::compute_exit_code(&checks_with(Status::Skipped)),
            0
        );
        assert_eq!(
            VerificationReport::compute_exit_code(&checks_with(Status::InsufficientPrecision)),
            3
        );
        let mut checks = checks_with(Status::Violation);
        checks.lc_identities = CheckResult::insufficient("window too small".into());
        assert_eq!(VerificationReport::compute_exit_code(&checks), 2);
    }
}
