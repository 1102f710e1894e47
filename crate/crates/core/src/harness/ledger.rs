//! The precision ledger: every working precision in the pipeline, computed
//! top-down from the instance configuration before any arithmetic runs.

use super::config::InstanceConfig;
use crate::padic::{is_prime_u64, RESIDUE_FIELD_BUDGET};
use crate::polytope::ConeData;
use crate::tseries::vp_factorial;
use serde::Serialize;

/// Default cap on the number of points a single power sum may visit.
pub const DEFAULT_POINT_BUDGET: u64 = 20_000_000;
/// Cap on the trace-histogram size `p^{M_c}`.
pub const HISTOGRAM_BUDGET: u64 = 1 << 24;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum LedgerError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("p^{{M_c}} = {0} exceeds the word-size residue bound; binding constraint: M_c")]
    ResidueOverflow(String),
    #[error("residue field q^K = p^{exp} exceeds {RESIDUE_FIELD_BUDGET}; binding constraint: K")]
    FieldBudget { exp: u32 },
    #[error("point count (q^K - 1)^n = {points} exceeds {budget}; binding constraint: K or n")]
    PointBudget { points: u128, budget: u64 },
    #[error("histogram p^{{M_c}} = {size} exceeds {HISTOGRAM_BUDGET}; binding constraint: M_c")]
    HistogramBudget { size: u128 },
    #[error("t_precision must be at least 1")]
    EmptyWindow,
}

/// All derived precisions for one instance.
#[derive(Debug, Clone, Copy, Serialize, PartialEq, Eq)]
pub struct PrecisionLedger {
    pub p: u64,
    pub b: usize,
    pub n: usize,
    pub m_target: u32,
    /// T-precision `N`.
    pub t_precision: usize,
    /// s-precision `K`.
    pub s_precision: usize,
    /// `v_p(K!) + ⌊K/(p-1)⌋`: padding for the divided-power exponential.
    pub exp_padding: u32,
    /// Series working precision `M_w = m_target + exp_padding`.
    pub mw_exp: u32,
    /// Trace precision `M_c = M_w + v_p((N-1)!)`.
    pub mc_exp: u32,
    /// ρ-window length `D·N` of reported ramified data.
    pub rho_len: usize,
    /// Degree-bound cap for operator-truncation stabilization.
    pub dwork_bound_cap: u32,
    pub point_budget: u64,
    /// Largest point count any requested power sum visits.
    pub max_points: u64,
}

/// Computes the ledger; errors name the binding constraint.
pub fn compute_ledger(cfg: &InstanceConfig, cone: &ConeData) -> Result<PrecisionLedger, LedgerError> {
    let p = cfg.p.0 as u64;
    if cfg.p.0 <= 0 || !is_prime_u64(p) {
        return Err(LedgerError::NotPrime(cfg.p.0.max(0) as u64));
    }
    if cfg.t_precision == 0 {
        return Err(LedgerError::EmptyWindow);
    }
    let k = cfg.s_precision as u64;
    let exp_padding = vp_factorial(p, k) + (k as u32) / (p as u32 - 1).max(1);
    let mw_exp = cfg.m_target + exp_padding;
    let mc_exp = mw_exp + vp_factorial(p, cfg.t_precision as u64 - 1);
    // word-size guard for residues mod p^{M_c}
    let mut modulus: u64 = 1;
    for _ in 0..mc_exp {
        modulus = modulus
            .checked_mul(p)
            .filter(|&m| m < (1u64 << 62))
            .ok_or_else(|| LedgerError::ResidueOverflow(format!("{p}^{mc_exp}")))?;
    }
    if modulus as u128 > HISTOGRAM_BUDGET as u128 {
        return Err(LedgerError::HistogramBudget { size: modulus as u128 });
    }
    let field_exp = (cfg.b * cfg.s_precision.max(1)) as u32;
    if (p as u128).pow(field_exp) > RESIDUE_FIELD_BUDGET as u128 {
        return Err(LedgerError::FieldBudget { exp: field_exp });
    }
    let q_k = (p as u128).pow(field_exp);
    let max_points = (q_k - 1).pow(cfg.n as u32);
    if max_points > DEFAULT_POINT_BUDGET as u128 {
        return Err(LedgerError::PointBudget { points: max_points, budget: DEFAULT_POINT_BUDGET });
    }
    Ok(PrecisionLedger {
        p,
        b: cfg.b,
        n: cfg.n,
        m_target: cfg.m_target,
        t_precision: cfg.t_precision,
        s_precision: cfg.s_precision,
        exp_padding,
        mw_exp,
        mc_exp,
        rho_len: cone.d() as usize * cfg.t_precision,
        dwork_bound_cap: cfg.t_precision as u32 + 3,
        point_budget: DEFAULT_POINT_BUDGET,
        max_points: max_points as u64,
    })
}

impl PrecisionLedger {
    pub fn sum_params(&self) -> crate::sums::SumParams {
        crate::sums::SumParams {
            p: self.p,
            b: self.b,
            n: self.n,
            m_target: self.m_target,
            n_len: self.t_precision,
            k_max: self.s_precision,
            mw_exp: self.mw_exp,
            mc_exp: self.mc_exp,
            point_budget: self.point_budget,
        }
    }

    pub fn dwork_params(&self) -> crate::dwork::DworkParams {
        crate::dwork::DworkParams {
            p: self.p,
            b: self.b,
            n: self.n,
            m_target: self.m_target,
            n_len: self.t_precision,
            k_max: self.s_precision,
            bound_cap: self.dwork_bound_cap,
        }
    }

}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::FlexInt;
    use crate::polytope::{build_cone_data, Polytope};

    fn cfg(p: i64, m_target: u32, n_len: usize, k: usize) -> (InstanceConfig, ConeData) {
        let cfg = InstanceConfig {
            n: 1,
            vertices: vec![vec![FlexInt(0)], vec![FlexInt(3)]],
            p: FlexInt(p),
            b: 1,
            coefficients: vec![],
            m_target,
            t_precision: n_len,
            s_precision: k,
            run_direct: true,
            run_dwork: true,
            specialize_m: vec![],
            polygon_only: false,
        };
        let cone =
            build_cone_data(&Polytope::new(1, vec![vec![0], vec![3]]).unwrap()).unwrap();
        (cfg, cone)
    }

    #[test]
    fn ledger_matches_valuation_arithmetic() {
        // p=11, M_target=2, N=12, K=6: M_c = 2 + v_11(11!) + v_11(6!) + 0 = 3
        let (c, cone) = cfg(11, 2, 12, 6);
        let ledger = compute_ledger(&c, &cone).unwrap();
        assert_eq!(ledger.exp_padding, 0);
        assert_eq!(ledger.mw_exp, 2);
        assert_eq!(ledger.mc_exp, 3);
        assert_eq!(ledger.rho_len, 36);
    }

    #[test]
    fn ledger_k1_no_padding() {
        let (c, cone) = cfg(5, 2, 4, 1);
        let ledger = compute_ledger(&c, &cone).unwrap();
        assert_eq!(ledger.exp_padding, 0);
        assert_eq!(ledger.mw_exp, 2);
    }

    #[test]
    fn ledger_p2_adds_v2_factorial() {
        // p=2, N=8: v_2(7!) = 4 on top of the working precision
        let (c, cone) = cfg(2, 1, 8, 1);
        let ledger = compute_ledger(&c, &cone).unwrap();
        assert_eq!(ledger.mc_exp, ledger.mw_exp + 4);
    }

    #[test]
    fn ledger_rejects_nonprime_and_overbudget() {
        let (c, cone) = cfg(9, 1, 4, 1);
        assert_eq!(compute_ledger(&c, &cone), Err(LedgerError::NotPrime(9)));
        let (c, cone) = cfg(11, 1, 4, 9);
        assert!(matches!(
            compute_ledger(&c, &cone),
            Err(LedgerError::FieldBudget { .. })
        ));
    }
}
