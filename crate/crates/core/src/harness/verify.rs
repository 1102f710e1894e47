//! The verification workflow: polygons, both engines, bound checks, and
//! artifact assembly.

use super::catalog::CatalogEntry;
use super::config::{ConfigError, InstanceConfig};
use super::ledger::{compute_ledger, LedgerError, PrecisionLedger};
use super::report::{
    CheckResult, Checks, DworkSection, NewtonSection, PolygonSection, Reproducer,
    SpecializationCheck, Status, VerificationReport,
};
use crate::dwork::{stabilize_truncation, verify_entry_bounds, DworkCtx, DworkError};
use crate::padic::{FqCtx, PadicError};
use crate::polygons::{
    arithmetic_polygon, hodge_polygon, polygon_geq, NewtonPointSet, OrdEntry, Polygon,
    PolygonError,
};
use crate::polytope::{build_cone_data, ConeData, Polytope, PolytopeError};
use crate::sums::{
    c_function, check_lc_identities, l_function, newton_polygon_of_c, power_sums,
    specialize_cyclotomic, CFunctionApprox, LaurentData, SumsError,
};
use crate::tseries::TseriesError;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
    #[error(transparent)]
    Ledger(#[from] LedgerError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Sums(#[from] SumsError),
    #[error(transparent)]
    Dwork(#[from] DworkError),
    #[error(transparent)]
    Tseries(#[from] TseriesError),
    #[error(transparent)]
    Polygon(#[from] PolygonError),
    #[error(transparent)]
    Padic(#[from] PadicError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Report plus the artifact files (name → contents) a CLI run would write.
#[derive(Debug)]
pub struct VerifyOutcome {
    pub report: VerificationReport,
    pub artifacts: BTreeMap<String, String>,
}

fn ord_string(ord: &OrdEntry) -> String {
    match ord {
        OrdEntry::Finite(o) => o.to_string(),
        OrdEntry::AtLeast(n) => format!(">={n}"),
    }
}

fn rational_strings(p: &Polygon) -> Vec<String> {
    p.values()
        .iter()
        .map(|v| format!("{}/{}", v.numer(), v.denom()))
        .collect()
}

fn points_strings(points: &NewtonPointSet) -> Vec<(usize, String)> {
    points
        .points
        .iter()
        .map(|pt| (pt.abscissa, ord_string(&pt.ord)))
        .collect()
}

/// Pointwise comparison of finite Newton ordinates against a polygon bound.
fn np_vs_bound(
    points: &NewtonPointSet,
    bound: &Polygon,
    scale: &BigRational,
    label: &str,
    reproducer: impl Fn(String) -> Reproducer,
) -> CheckResult {
    let mut certified = Vec::new();
    let mut markers = Vec::new();
    for pt in &points.points {
        match pt.ord {
            OrdEntry::Finite(o) => {
                let bound_value = bound.value(pt.abscissa) * scale;
                let ord_value = BigRational::from(BigInt::from(o));
                if ord_value < bound_value {
                    let datum = format!(
                        "{label}: ord at abscissa {} is {o}, below the bound {bound_value}",
                        pt.abscissa
                    );
                    return CheckResult::violation(datum.clone(), reproducer(datum));
                }
                certified.push(pt.abscissa);
            }
            OrdEntry::AtLeast(n) => markers.push((pt.abscissa, n)),
        }
    }
    if points.points.len() == 1 {
        return CheckResult::ok(format!("{label}: only the constant coefficient exists"));
    }
    if certified.iter().all(|&m| m == 0) {
        return CheckResult::insufficient(format!(
            "{label}: no ordinate visible below the precision window"
        ));
    }
    CheckResult::ok(format!(
        "{label}: holds at certified abscissae {certified:?}; markers (no data below window) at {:?}",
        markers.iter().map(|&(m, _)| m).collect::<Vec<_>>()
    ))
}

struct DirectRun {
    cfa: CFunctionApprox,
    lc: CheckResult,
    newton: NewtonSection,
    np_points: NewtonPointSet,
}

struct DworkRun {
    section: DworkSection,
    series_points: NewtonPointSet,
    series: crate::tseries::SPolynomial,
    entry_check: CheckResult,
}

/// Runs every computation and check the flags call for.
pub fn run_verify(cfg: &InstanceConfig) -> Result<VerifyOutcome, HarnessError> {
    let polytope = Polytope::new(cfg.n, cfg.vertices_i64())?;
    let cone = build_cone_data(&polytope)?;
    let ledger = compute_ledger(cfg, &cone)?;
    let mut warnings: Vec<String> = polytope.warnings().to_vec();
    if ledger.p <= 3 * cone.d() {
        warnings.push(format!(
            "p = {} is not above 3D = {}; the polygon bounds are not guaranteed",
            ledger.p,
            3 * cone.d()
        ));
    }
    if cone.d() % ledger.p == 0 {
        warnings.push(format!("p = {} divides D = {}", ledger.p, cone.d()));
    }

    let reproducer = |datum: String| Reproducer {
        instance: cfg.clone(),
        ledger,
        datum,
    };

    // polygons
    let vol = cone.normalized_volume() as usize;
    let m_max = (vol + 10).max(cfg.s_precision + 1);
    let arith = arithmetic_polygon(&cone, ledger.p, m_max);
    let hodge = hodge_polygon(&cone, m_max);
    let pm1 = BigRational::from(BigInt::from(ledger.p - 1));
    let scaled_hodge = hodge.scaled(&pm1);
    if !arith.slopes_nondecreasing() {
        warnings.push("arithmetic polygon slopes are not nondecreasing (finding)".into());
    }
    let arithmetic_vs_hodge = match polygon_geq(&arith, &scaled_hodge, m_max)? {
        Err(v) => {
            let datum = format!(
                "arithmetic polygon dips below the scaled Hodge polygon at m = {}: {} < {}",
                v.m, v.lhs, v.rhs
            );
            CheckResult::violation(datum.clone(), reproducer(datum))
        }
        Ok(()) => {
            let a_vol = arith.value(vol);
            let h_vol = scaled_hodge.value(vol);
            if a_vol == h_vol {
                CheckResult::ok(format!(
                    "dominates up to m = {m_max} and meets the scaled Hodge polygon at m = {vol} (value {a_vol})"
                ))
            } else {
                let datum = format!(
                    "polygons do not meet at m = {vol}: arithmetic {a_vol} vs scaled Hodge {h_vol}"
                );
                CheckResult::violation(datum.clone(), reproducer(datum))
            }
        }
    };
    let polygons = PolygonSection {
        m_max,
        d: cone.d(),
        normalized_volume: cone.normalized_volume(),
        arithmetic_values: rational_strings(&arith),
        hodge_values: rational_strings(&hodge),
        scaled_hodge_values: rational_strings(&scaled_hodge),
    };

    let run_direct = cfg.run_direct && !cfg.polygon_only;
    let run_dwork = cfg.run_dwork && !cfg.polygon_only;
    let b_scale = BigRational::from(BigInt::from(ledger.b as i64));
    let b_pm1 = &b_scale * &pm1;

    let direct = if run_direct {
        Some(run_direct_engine(cfg, &cone, &polytope, &ledger, &reproducer)?)
    } else {
        None
    };
    let dwork = if run_dwork {
        Some(run_dwork_engine(cfg, &cone, &polytope, &ledger, &reproducer)?)
    } else {
        None
    };

    let skipped = |what: &str| CheckResult::skipped(what);
    let np_hodge_bound = match &direct {
        None => skipped("direct engine not run"),
        Some(d) => np_vs_bound(&d.np_points, &hodge, &b_pm1, "Newton points vs scaled Hodge", reproducer),
    };
    let np_arithmetic_bound = match &direct {
        None => skipped("direct engine not run"),
        Some(d) => np_vs_bound(
            &d.np_points,
            &arith,
            &b_scale,
            "Newton points vs scaled arithmetic polygon",
            reproducer,
        ),
    };
    let lc_identities = match &direct {
        None => skipped("direct engine not run"),
        Some(d) => d.lc.clone(),
    };
    let operator_coefficient_bound = match &dwork {
        None => skipped("operator engine not run"),
        Some(dw) => {
            let scaled = np_vs_bound(
                &dw.series_points,
                &arith,
                &b_scale,
                "operator coefficient ords vs scaled arithmetic polygon",
                reproducer,
            );
            let unscaled = np_vs_bound(
                &dw.series_points,
                &arith,
                &BigRational::one(),
                "unscaled form",
                reproducer,
            );
            CheckResult {
                detail: format!("{}; unscaled form: {:?}", scaled.detail, unscaled.status),
                ..scaled
            }
        }
    };
    let entry_bounds = match &dwork {
        None => skipped("operator engine not run"),
        Some(dw) => dw.entry_check.clone(),
    };
    let cross_engine = match (&direct, &dwork) {
        (Some(d), Some(dw)) => {
            let lhs = d.cfa.reduced();
            if lhs == dw.series {
                CheckResult::ok(format!(
                    "engines agree coefficientwise mod (p^{}, T^{}, s^{})",
                    ledger.m_target,
                    ledger.t_precision,
                    ledger.s_precision + 1
                ))
            } else {
                let mut datum = "engines disagree".to_string();
                'out: for i in 0..lhs.coeffs.len().min(dw.series.coeffs.len()) {
                    for t in 0..lhs.coeffs[i].coeffs.len().min(dw.series.coeffs[i].coeffs.len()) {
                        if lhs.coeffs[i].coeffs[t] != dw.series.coeffs[i].coeffs[t] {
                            datum = format!("engines disagree first at s^{i}, T^{t}");
                            break 'out;
                        }
                    }
                }
                CheckResult::violation(datum.clone(), reproducer(datum))
            }
        }
        _ => skipped("needs both engines"),
    };
    let specializations = match &direct {
        None => Vec::new(),
        Some(d) => {
            let mut out = Vec::new();
            for &m in &cfg.specialize_m {
                let sp = specialize_cyclotomic(&d.cfa, m)?;
                let check = np_vs_bound(
                    &sp.points,
                    &arith,
                    &b_scale,
                    "specialized Newton points vs scaled arithmetic polygon",
                    reproducer,
                );
                out.push(SpecializationCheck {
                    m,
                    window: sp.window,
                    status: check.status,
                    detail: check.detail,
                    points: points_strings(&sp.points),
                });
            }
            out
        }
    };

    let checks = Checks {
        arithmetic_vs_hodge,
        np_hodge_bound,
        np_arithmetic_bound,
        operator_coefficient_bound,
        lc_identities,
        cross_engine,
        entry_bounds,
        specializations,
    };
    let exit_code = VerificationReport::compute_exit_code(&checks);

    // artifacts
    let mut artifacts = BTreeMap::new();
    artifacts.insert("polygon_hodge.csv".into(), hodge.to_csv());
    artifacts.insert("polygon_arithmetic.csv".into(), arith.to_csv());
    if let Some(d) = &direct {
        let mut np_csv = String::from("i,ord_or_marker\n");
        for (i, o) in points_strings(&d.np_points) {
            np_csv.push_str(&format!("{i},{o}\n"));
        }
        artifacts.insert("np.csv".into(), np_csv);
        artifacts.insert(
            "cfunction.json".into(),
            serde_json::to_string_pretty(&CFunctionArtifact {
                p: ledger.p,
                b: ledger.b,
                n: ledger.n,
                m_target: ledger.m_target,
                t_precision: ledger.t_precision,
                s_precision: ledger.s_precision,
                ledger: &ledger,
                precision: &d.cfa.precision,
                coefficients: d.cfa.reduced().coeffs.iter().map(|c| c.coeffs.clone()).collect(),
            })?,
        );
    }
    if let Some(dw) = &dwork {
        artifacts.insert(
            "dwork_report.json".into(),
            serde_json::to_string_pretty(&DworkArtifact {
                ledger: &ledger,
                section: &dw.section,
                coefficients: dw.series.coeffs.iter().map(|c| c.coeffs.clone()).collect(),
                comparison: cross_engine_comparison_note(&checks.cross_engine),
            })?,
        );
    }

    let report = VerificationReport {
        instance: cfg.clone(),
        ledger,
        warnings,
        polygons,
        checks,
        newton: direct.map(|d| d.newton),
        dwork: dwork.map(|dw| dw.section),
        exit_code,
    };
    artifacts.insert("verify_report.json".into(), serde_json::to_string_pretty(&report)?);
    Ok(VerifyOutcome { report, artifacts })
}

fn cross_engine_comparison_note(check: &CheckResult) -> String {
    format!("{:?}: {}", check.status, check.detail)
}

#[derive(Serialize)]
struct CFunctionArtifact<'a> {
    p: u64,
    b: usize,
    n: usize,
    m_target: u32,
    t_precision: usize,
    s_precision: usize,
    ledger: &'a PrecisionLedger,
    precision: &'a [u32],
    /// Residue arrays of `c_i` mod `(p^{m_target}, T^N)`.
    coefficients: Vec<Vec<u64>>,
}

#[derive(Serialize)]
struct DworkArtifact<'a> {
    ledger: &'a PrecisionLedger,
    section: &'a DworkSection,
    coefficients: Vec<Vec<u64>>,
    comparison: String,
}

fn run_direct_engine(
    cfg: &InstanceConfig,
    cone: &ConeData,
    polytope: &Polytope,
    ledger: &PrecisionLedger,
    reproducer: &impl Fn(String) -> Reproducer,
) -> Result<DirectRun, HarnessError> {
    let field = FqCtx::new(ledger.p, ledger.b)?;
    let f = LaurentData::new(cfg.n, &field, cfg.coefficient_terms(&field)?);
    f.validate(cone, polytope.non_origin_vertices())?;
    let params = ledger.sum_params();
    let sums = power_sums(&f, &params)?;
    let cfa = c_function(&sums, &params)?;
    let l = l_function(&sums, &params)?;
    let lc = match check_lc_identities(&cfa, &l, &params) {
        Ok(rep) => CheckResult::ok(format!(
            "both identities hold mod (p^{}, T^{}, s^{}); second-product cutoff {}",
            rep.compared_at,
            ledger.t_precision,
            ledger.s_precision + 1,
            rep.second_cutoff
        )),
        Err(SumsError::IdentityMismatch { identity, s_index, t_index }) => {
            let datum =
                format!("identity {identity} fails first at s^{s_index}, T^{t_index}");
            CheckResult::violation(datum.clone(), reproducer(datum))
        }
        Err(e) => return Err(e.into()),
    };
    let reduced = cfa.reduced();
    let (np_points, hull) = match newton_polygon_of_c(&reduced, ledger.m_target) {
        Ok((set, hull)) => (set, Some(hull)),
        Err(PolygonError::NoFinitePoints) => (
            NewtonPointSet::new(
                reduced
                    .coeffs
                    .iter()
                    .enumerate()
                    .map(|(i, c)| crate::polygons::NewtonPoint {
                        abscissa: i,
                        ord: c.ord_t(ledger.m_target),
                    })
                    .collect(),
            ),
            None,
        ),
        Err(e) => return Err(e.into()),
    };
    let newton = match &hull {
        Some(h) => NewtonSection {
            points: points_strings(&np_points),
            hull_vertices: h.vertices.clone(),
            certified_up_to: h.certified_up_to,
        },
        None => NewtonSection {
            points: points_strings(&np_points),
            hull_vertices: vec![],
            certified_up_to: 0,
        },
    };
    Ok(DirectRun { cfa, lc, newton, np_points })
}

fn run_dwork_engine(
    cfg: &InstanceConfig,
    cone: &ConeData,
    polytope: &Polytope,
    ledger: &PrecisionLedger,
    reproducer: &impl Fn(String) -> Reproducer,
) -> Result<DworkRun, HarnessError> {
    let field = FqCtx::new(ledger.p, ledger.b)?;
    let f = LaurentData::new(cfg.n, &field, cfg.coefficient_terms(&field)?);
    f.validate(cone, polytope.non_origin_vertices())?;
    let ctx = DworkCtx::new(&f, &field, cone, ledger.dwork_params())?;
    let st = stabilize_truncation(&ctx)?;
    let entry_report = verify_entry_bounds(&ctx, &st.matrix);
    let entry_check = if entry_report.findings.is_empty() {
        CheckResult::ok(format!(
            "all ceiling estimates hold: {} γ coefficients, {} entries ({} structurally zero)",
            entry_report.gamma_checked, entry_report.entries_checked, entry_report.zero_entries
        ))
    } else {
        let datum = format!(
            "{} entry-estimate findings, first: {:?}",
            entry_report.findings.len(),
            entry_report.findings[0]
        );
        CheckResult::violation(datum.clone(), reproducer(datum))
    };
    let series_points = crate::dwork::newton_points(&st.series, ledger.m_target);
    let section = DworkSection {
        stabilized_bound: st.bound,
        reverified_at: st.reverified_at,
        basis_size: st.matrix.basis.len(),
        gamma_checked: entry_report.gamma_checked,
        entries_checked: entry_report.entries_checked,
        zero_entries: entry_report.zero_entries,
        findings: entry_report.findings.iter().map(|f| format!("{f:?}")).collect(),
        points: points_strings(&series_points),
    };
    Ok(DworkRun { section, series_points, series: st.series, entry_check })
}

/// Polygon-only verification over a catalog entry, for suite runs.
pub fn verify_catalog_polygons(entry: &CatalogEntry, p: u64) -> Result<CheckResult, HarnessError> {
    let cone = entry.cone();
    let vol = cone.normalized_volume() as usize;
    let m_max = vol + 10;
    let arith = arithmetic_polygon(&cone, p, m_max);
    let hodge =
        hodge_polygon(&cone, m_max).scaled(&BigRational::from(BigInt::from(p as i64 - 1)));
    match polygon_geq(&arith, &hodge, m_max)? {
        Err(v) => Ok(CheckResult {
            status: Status::Violation,
            detail: format!("bound fails at m = {}: {} < {}", v.m, v.lhs, v.rhs),
            reproducer: None,
        }),
        Ok(()) => {
            let a = arith.value(vol);
            let h = hodge.value(vol);
            if a == h {
                Ok(CheckResult::ok(format!("bound holds; equality at m = {vol}")))
            } else {
                Ok(CheckResult {
                    status: Status::Violation,
                    detail: format!("no equality at m = {vol}: {a} vs {h}"),
                    reproducer: None,
                })
            }
        }
    }
}
