use std::path::Path;

use anyhow::{bail, Context, Result};
use mstn::exact::{solve_exact, SolveOptions};
use mstn::heuristic::{multistart, HeuristicOptions};
use mstn::model_export::{export_mtz, export_sec};
use mstn::report::{Method, SolveReport, SolveStatus};
use mstn::{generate, GeneratorConfig, Instance};
use serde::Serialize;

use crate::manifest::{sha256_hex, Entry, Manifest, MANIFEST_FILE};
use crate::{ExportArgs, ExportFormat, GenArgs, SolveArgs, SolverArgs, GIT_REVISION};

/// Everything that determines a run, embedded in every report.
#[derive(Debug, Clone, Serialize)]
pub struct RunOptions {
    pub method: Method,
    pub exact: SolveOptions,
    pub heuristic: HeuristicOptions,
}

impl RunOptions {
    pub fn new(method: Method, a: &SolverArgs) -> Result<Self> {
        let mut exact = SolveOptions {
            eps: a.eps,
            time_limit: Some(a.time_limit.unwrap_or_else(|| a.profile.time_limit())),
            preprocess: !a.no_preprocess,
            ..SolveOptions::default()
        };
        if let Some(cap) = a.enumeration_cap {
            exact.enumeration_cap = cap;
        }
        exact.validate()?;
        let heuristic = HeuristicOptions {
            max_trees: a.max_trees,
            no_improve_cap: a.no_improve_cap,
            inner_max_iter: a.inner_max_iter,
            ..HeuristicOptions::default()
        };
        heuristic.validate()?;
        Ok(RunOptions { method, exact, heuristic })
    }

    /// The status a successful run of this method ends with.
    pub fn target_status(&self) -> SolveStatus {
        if self.method.is_exact() {
            SolveStatus::Optimal
        } else {
            SolveStatus::Feasible
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ReportFile<'a> {
    pub git_revision: &'a str,
    pub version: &'a str,
    pub options: &'a RunOptions,
    #[serde(flatten)]
    pub report: &'a SolveReport,
}

/// Solves and re-validates the report against the instance.
pub fn run_method(inst: &Instance, opts: &RunOptions) -> Result<SolveReport> {
    let report = match opts.method {
        Method::Heuristic => multistart(inst, &opts.heuristic)?,
        m => solve_exact(inst, m, &opts.exact)?,
    };
    report.validate(inst).context("report failed re-validation")?;
    Ok(report)
}

pub fn gen(a: &GenArgs) -> Result<()> {
    if a.per_combo == 0 {
        bail!("--per-combo must be positive");
    }
    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let mut instances = Vec::new();
    for &n in &a.n {
        for &d in &a.dims {
            for &r in &a.scenarios {
                for i in 0..a.per_combo {
                    let seed = a.seed + i as u64;
                    let inst = generate(&GeneratorConfig::new(n, d, r, seed))?;
                    let file = format!("r{r}_n{n}_d{d}_{i}.json");
                    let text = inst.to_json();
                    write(&a.out.join(&file), text.as_bytes())?;
                    instances.push(Entry {
                        file,
                        name: inst.name().to_string(),
                        n,
                        dimension: d,
                        scenario: r,
                        seed,
                        sha256: sha256_hex(text.as_bytes()),
                    });
                }
            }
        }
    }
    let count = instances.len();
    Manifest { seed_base: a.seed, instances }.save(&a.out.join(MANIFEST_FILE))?;
    if a.example1 {
        write(&a.out.join("example1.json"), mstn::example1().to_json().as_bytes())?;
    }
    eprintln!("wrote {count} instances to {}", a.out.display());
    Ok(())
}

pub fn solve(a: &SolveArgs) -> Result<bool> {
    let inst = Instance::load(&a.instance)?;
    let opts = RunOptions::new(a.method, &a.solver)?;
    let report = run_method(&inst, &opts)
        .with_context(|| format!("{} on {}", a.method, a.instance.display()))?;
    let file = ReportFile {
        git_revision: GIT_REVISION,
        version: env!("CARGO_PKG_VERSION"),
        options: &opts,
        report: &report,
    };
    let text = serde_json::to_string_pretty(&file)? + "\n";
    match &a.out {
        Some(p) => write(p, text.as_bytes())?,
        None => print!("{text}"),
    }
    eprintln!(
        "{} {}: {:?} obj {:.9} lb {:.9} gap {:.3e} nodes {} time {:.3}s",
        report.instance,
        report.method,
        report.status,
        report.objective,
        report.bound,
        report.gap,
        report.counters.nodes,
        report.wall_time
    );
    Ok(report.status == opts.target_status())
}

pub fn export(a: &ExportArgs) -> Result<()> {
    let inst = Instance::load(&a.instance)?;
    let model = match a.format {
        ExportFormat::Mtz => {
            if a.max_subset_size.is_some() {
                bail!("--max-subset-size applies to the SEC format only");
            }
            export_mtz(&inst)?
        }
        ExportFormat::Sec => {
            let k = a.max_subset_size.unwrap_or(inst.num_vertices().saturating_sub(1));
            export_sec(&inst, k)?
        }
    };
    write(&a.out, model.to_cbf().as_bytes())?;
    eprintln!("wrote {} variables, {} rows to {}", model.num_vars(), model.num_rows(), a.out.display());
    Ok(())
}

pub fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}
