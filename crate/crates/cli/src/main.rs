//! Command-line front end: polygon computations, power sums, both engines,
//! full verification runs, and the built-in catalog.

use clap::{Parser, Subcommand, ValueEnum};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use tadic::harness::{
    catalog, compute_ledger, run_verify, verify_catalog_polygons, InstanceConfig, Status,
};
use tadic::polygons::{arithmetic_polygon, hodge_polygon};
use tadic::polytope::{build_cone_data, Polytope};
use tadic::sums::{c_function, newton_polygon_of_c, power_sums, s_sum, LaurentData};

#[derive(Parser)]
#[command(name = "tadic", version, about = "Exact polygons and C-functions of T-adic exponential sums")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Emit {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Hodge and arithmetic polygons of the configured polytope.
    Polygons {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        emit: Emit,
        /// Largest abscissa; defaults to n!Vol(Δ) + 10.
        #[arg(long)]
        m_max: Option<usize>,
    },
    /// One power sum S_f(k, T).
    Sum {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        k: usize,
    },
    /// The C-function by direct summation, with its Newton points.
    Cfunction {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The C-function again through the truncated operator.
    Dwork {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Full verification: polygons, both engines, every bound check.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the built-in polytope catalog; optionally run its polygon suite.
    Catalog {
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also run the polygon comparison over every entry and prime.
        #[arg(long)]
        run: bool,
    },
}

fn read_config(path: &Path) -> Result<InstanceConfig, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    InstanceConfig::from_json(&text).map_err(|e| format!("bad config: {e}"))
}

fn write_artifacts(
    dir: &Path,
    artifacts: &std::collections::BTreeMap<String, String>,
) -> Result<(), String> {
    std::fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
    for (name, contents) in artifacts {
        std::fs::write(dir.join(name), contents)
            .map_err(|e| format!("cannot write {name}: {e}"))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Polygons { config, out, emit, m_max } => {
            let cfg = read_config(&config)?;
            let polytope = Polytope::new(cfg.n, cfg.vertices_i64()).map_err(|e| e.to_string())?;
            let cone = build_cone_data(&polytope).map_err(|e| e.to_string())?;
            let p = cfg.prime().map_err(|e| e.to_string())?;
            let m_max = m_max.unwrap_or(cone.normalized_volume() as usize + 10);
            let hodge = hodge_polygon(&cone, m_max);
            let arith = arithmetic_polygon(&cone, p, m_max);
            match emit {
                Emit::Csv => {
                    let h = hodge.to_csv();
                    let a = arith.to_csv();
                    match &out {
                        Some(dir) => {
                            let mut files = std::collections::BTreeMap::new();
                            files.insert("polygon_hodge.csv".to_string(), h);
                            files.insert("polygon_arithmetic.csv".to_string(), a);
                            write_artifacts(dir, &files)?;
                            println!(
                                "wrote polygon_hodge.csv, polygon_arithmetic.csv to {}",
                                dir.display()
                            );
                        }
                        None => println!("# hodge\n{h}\n# arithmetic\n{a}"),
                    }
                }
                Emit::Json => {
                    let body = serde_json::json!({
                        "d": cone.d(),
                        "normalized_volume": cone.normalized_volume(),
                        "hodge_slopes": hodge.slope_strings(),
                        "arithmetic_slopes": arith.slope_strings(),
                    });
                    let text = serde_json::to_string_pretty(&body).unwrap();
                    match &out {
                        Some(dir) => {
                            let mut files = std::collections::BTreeMap::new();
                            files.insert("polygons.json".to_string(), text);
                            write_artifacts(dir, &files)?;
                            println!("wrote polygons.json to {}", dir.display());
                        }
                        None => println!("{text}"),
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Sum { config, k } => {
            let cfg = read_config(&config)?;
            let polytope = Polytope::new(cfg.n, cfg.vertices_i64()).map_err(|e| e.to_string())?;
            let cone = build_cone_data(&polytope).map_err(|e| e.to_string())?;
            let ledger = compute_ledger(&cfg, &cone).map_err(|e| e.to_string())?;
            let field = tadic::padic::FqCtx::new(ledger.p, ledger.b).map_err(|e| e.to_string())?;
            let f = LaurentData::new(
                cfg.n,
                &field,
                cfg.coefficient_terms(&field).map_err(|e| e.to_string())?,
            );
            let series = s_sum(&f, k, &ledger.sum_params()).map_err(|e| e.to_string())?;
            let body = serde_json::json!({
                "p": ledger.p,
                "working_precision": ledger.mw_exp,
                "t_precision": ledger.t_precision,
                "k": k,
                "residues": series.coeffs,
            });
            println!("{}", serde_json::to_string_pretty(&body).unwrap());
            Ok(ExitCode::SUCCESS)
        }
        Command::Cfunction { config, out } => {
            let cfg = read_config(&config)?;
            let polytope = Polytope::new(cfg.n, cfg.vertices_i64()).map_err(|e| e.to_string())?;
            let cone = build_cone_data(&polytope).map_err(|e| e.to_string())?;
            let ledger = compute_ledger(&cfg, &cone).map_err(|e| e.to_string())?;
            let field = tadic::padic::FqCtx::new(ledger.p, ledger.b).map_err(|e| e.to_string())?;
            let f = LaurentData::new(
                cfg.n,
                &field,
                cfg.coefficient_terms(&field).map_err(|e| e.to_string())?,
            );
            f.validate(&cone, polytope.non_origin_vertices())
                .map_err(|e| e.to_string())?;
            let params = ledger.sum_params();
            let sums = power_sums(&f, &params).map_err(|e| e.to_string())?;
            let cfa = c_function(&sums, &params).map_err(|e| e.to_string())?;
            let reduced = cfa.reduced();
            let (points, _hull) =
                newton_polygon_of_c(&reduced, ledger.m_target).map_err(|e| e.to_string())?;
            let mut np_csv = String::from("i,ord_or_marker\n");
            for pt in &points.points {
                let o = match pt.ord {
                    tadic::polygons::OrdEntry::Finite(o) => o.to_string(),
                    tadic::polygons::OrdEntry::AtLeast(n) => format!(">={n}"),
                };
                np_csv.push_str(&format!("{},{}\n", pt.abscissa, o));
            }
            let body = serde_json::json!({
                "ledger": ledger,
                "precision": cfa.precision,
                "coefficients": reduced.coeffs.iter().map(|c| c.coeffs.clone()).collect::<Vec<_>>(),
            });
            let cf_json = serde_json::to_string_pretty(&body).unwrap();
            match out {
                Some(dir) => {
                    let mut files = std::collections::BTreeMap::new();
                    files.insert("cfunction.json".to_string(), cf_json);
                    files.insert("np.csv".to_string(), np_csv);
                    write_artifacts(&dir, &files)?;
                    println!("wrote cfunction.json, np.csv to {}", dir.display());
                }
                None => println!("{cf_json}\n{np_csv}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Dwork { config, out } => {
            let mut cfg = read_config(&config)?;
            cfg.run_direct = true; // the report compares against the direct engine
            cfg.run_dwork = true;
            let outcome = run_verify(&cfg).map_err(|e| e.to_string())?;
            let report = outcome
                .artifacts
                .get("dwork_report.json")
                .cloned()
                .ok_or("operator engine produced no report")?;
            match out {
                Some(dir) => {
                    let mut files = std::collections::BTreeMap::new();
                    files.insert("dwork_report.json".to_string(), report);
                    write_artifacts(&dir, &files)?;
                    println!("wrote dwork_report.json to {}", dir.display());
                }
                None => println!("{report}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { config, out } => {
            let cfg = read_config(&config)?;
            let outcome = run_verify(&cfg).map_err(|e| e.to_string())?;
            if let Some(dir) = out {
                write_artifacts(&dir, &outcome.artifacts)?;
                println!("wrote {} artifacts to {}", outcome.artifacts.len(), dir.display());
            }
            for (name, check) in [
                ("arithmetic-vs-hodge", &outcome.report.checks.arithmetic_vs_hodge),
                ("np-hodge-bound", &outcome.report.checks.np_hodge_bound),
                ("np-arithmetic-bound", &outcome.report.checks.np_arithmetic_bound),
                (
                    "operator-coefficient-bound",
                    &outcome.report.checks.operator_coefficient_bound,
                ),
                ("lc-identities", &outcome.report.checks.lc_identities),
                ("cross-engine", &outcome.report.checks.cross_engine),
                ("entry-bounds", &outcome.report.checks.entry_bounds),
            ] {
                println!("{name}: {:?}", check.status);
            }
            for sp in &outcome.report.checks.specializations {
                println!("specialization m={}: {:?}", sp.m, sp.status);
            }
            println!("exit code: {}", outcome.report.exit_code);
            Ok(ExitCode::from(outcome.report.exit_code as u8))
        }
        Command::Catalog { out, run } => {
            let entries = catalog();
            let listing = serde_json::to_string_pretty(&entries).unwrap();
            match &out {
                Some(dir) => {
                    let mut files = std::collections::BTreeMap::new();
                    files.insert("catalog.json".to_string(), listing);
                    write_artifacts(dir, &files)?;
                    println!("wrote catalog.json to {}", dir.display());
                }
                None => println!("{listing}"),
            }
            if run {
                let mut violations = 0usize;
                for entry in &entries {
                    for &p in &entry.primes {
                        let check =
                            verify_catalog_polygons(entry, p).map_err(|e| e.to_string())?;
                        println!("{} p={p}: {:?} — {}", entry.id, check.status, check.detail);
                        if check.status == Status::Violation {
                            violations += 1;
                        }
                    }
                }
                if violations > 0 {
                    return Ok(ExitCode::from(2));
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
