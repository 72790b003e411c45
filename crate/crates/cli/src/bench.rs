use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::{bail, Context, Result};
use mstn::report::{Method, SolveReport, SolveStatus};
use serde::Serialize;

use crate::manifest::{load_entry, Entry, Manifest};
use crate::run::{run_method, RunOptions};
use crate::BenchArgs;

pub const HEADER: [&str; 13] = [
    "r", "n", "method", "cpu_s", "sec_cuts", "benders_cuts", "nodes", "gap0_pct", "gap_pct",
    "solved_pct", "obj", "lb", "ub",
];

/// One (instance, method) run. Failed runs keep only the key columns.
#[derive(Debug, Serialize)]
struct RunRow {
    r: u32,
    n: usize,
    method: Method,
    cpu_s: Option<f64>,
    sec_cuts: Option<usize>,
    benders_cuts: Option<usize>,
    nodes: Option<usize>,
    gap0_pct: Option<f64>,
    gap_pct: Option<f64>,
    solved_pct: f64,
    obj: Option<f64>,
    lb: Option<f64>,
    ub: Option<f64>,
}

/// Averages over one (r, n, method) block; failed runs count as unsolved.
#[derive(Debug, Serialize)]
struct BlockRow {
    r: u32,
    n: usize,
    method: Method,
    cpu_s: Option<f64>,
    sec_cuts: Option<f64>,
    benders_cuts: Option<f64>,
    nodes: Option<f64>,
    gap0_pct: Option<f64>,
    gap_pct: Option<f64>,
    solved_pct: f64,
    obj: Option<f64>,
    lb: Option<f64>,
    ub: Option<f64>,
}

#[derive(Debug, Serialize)]
struct DevRow {
    r: u32,
    n: usize,
    method: Method,
    instances: usize,
    /// `(obj - MST(u~)) / obj`.
    dev_lb_pct: Option<f64>,
    /// `(UB - obj) / UB` with UB the placed center-distance MST.
    dev_ub_pct: Option<f64>,
    mst_pct: Option<f64>,
    /// Against the best proven optimum of the instance, when one exists.
    dev_opt_pct: Option<f64>,
    dev_opt_max_pct: Option<f64>,
}

#[derive(Debug, Serialize)]
struct StatusRow<'a> {
    file: &'a str,
    instance: &'a str,
    r: u32,
    n: usize,
    method: Method,
    status: String,
    error: String,
}

struct Job<'a> {
    entry: &'a Entry,
    opts: RunOptions,
}

struct Outcome<'a> {
    entry: &'a Entry,
    opts: RunOptions,
    result: Result<SolveReport, String>,
}

impl Outcome<'_> {
    fn reached(&self) -> bool {
        matches!(&self.result, Ok(rep) if rep.status == self.opts.target_status())
    }
}

pub fn threads(jobs: usize) -> Result<usize> {
    let cap = match std::env::var("MSTN_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(k) if k > 0 => k,
            _ => bail!("MSTN_THREADS must be a positive integer, got {v:?}"),
        },
        Err(_) => std::thread::available_parallelism().map_or(1, |k| k.get()),
    };
    Ok(cap.min(jobs).max(1))
}

fn side_path(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.{suffix}.csv"))
}

fn pct(num: f64, den: f64) -> f64 {
    if den.abs() <= 1e-12 {
        0.0
    } else {
        100.0 * num / den
    }
}

/// An optimal status means the gap closed within eps, so the row shows 0.
fn gap_pct(rep: &SolveReport) -> f64 {
    if rep.status == SolveStatus::Optimal {
        0.0
    } else {
        100.0 * rep.gap
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (s, k) = xs.fold((0.0, 0usize), |(s, k), x| (s + x, k + 1));
    (k > 0).then(|| s / k as f64)
}

fn max(xs: impl Iterator<Item = f64>) -> Option<f64> {
    xs.fold(None, |m: Option<f64>, x| Some(m.map_or(x, |m| m.max(x))))
}

pub fn bench(a: &BenchArgs) -> Result<bool> {
    if a.methods.is_empty() {
        bail!("no methods requested");
    }
    let (dir, manifest) = Manifest::load(&a.manifest)?;
    let mut jobs = Vec::new();
    for entry in &manifest.instances {
        for &m in &a.methods {
            jobs.push(Job { entry, opts: RunOptions::new(m, &a.solver)? });
        }
    }
    let workers = threads(jobs.len())?;
    let next = AtomicUsize::new(0);
    let finished = AtomicUsize::new(0);
    let total = jobs.len();
    let done: Mutex<Vec<Option<Outcome>>> = Mutex::new((0..jobs.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(job) = jobs.get(i) else { break };
                let result = load_entry(&dir, job.entry)
                    .and_then(|inst| run_method(&inst, &job.opts))
                    .map_err(|e| format!("{e:#}"));
                let k = finished.fetch_add(1, Ordering::SeqCst) + 1;
                match &result {
                    Ok(rep) => eprintln!(
                        "[{k}/{total}] {} {}: {:?} obj {:.6} {:.2}s",
                        job.entry.file, job.opts.method, rep.status, rep.objective, rep.wall_time
                    ),
                    Err(e) => eprintln!("[{k}/{total}] {} {}: {e}", job.entry.file, job.opts.method),
                }
                let outcome = Outcome { entry: job.entry, opts: job.opts.clone(), result };
                done.lock().unwrap()[i] = Some(outcome);
            });
        }
    });
    let mut outcomes: Vec<Outcome> = done.into_inner().unwrap().into_iter().flatten().collect();
    outcomes.sort_by(|x, y| {
        (x.entry.scenario, x.entry.n, x.opts.method, &x.entry.file)
            .cmp(&(y.entry.scenario, y.entry.n, y.opts.method, &y.entry.file))
    });

    write_runs(&a.out, &outcomes)?;
    write_blocks(&side_path(&a.out, "blocks"), &outcomes)?;
    write_devs(&side_path(&a.out, "dev"), &outcomes)?;
    write_status(&side_path(&a.out, "status"), &outcomes)?;

    let reached = outcomes.iter().filter(|o| o.reached()).count();
    eprintln!("{reached}/{} runs reached their target status", outcomes.len());
    Ok(reached == outcomes.len())
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))
}

fn write_runs(path: &Path, outcomes: &[Outcome]) -> Result<()> {
    let mut w = writer(path)?;
    for o in outcomes {
        let (e, m) = (o.entry, o.opts.method);
        let row = match &o.result {
            Ok(rep) => RunRow {
                r: e.scenario,
                n: e.n,
                method: m,
                cpu_s: Some(rep.wall_time),
                sec_cuts: Some(rep.counters.sec_cuts),
                benders_cuts: Some(rep.counters.benders_cuts),
                nodes: Some(rep.counters.nodes),
                gap0_pct: Some(100.0 * rep.gap0),
                gap_pct: Some(gap_pct(rep)),
                solved_pct: if o.reached() { 100.0 } else { 0.0 },
                obj: Some(rep.objective),
                lb: Some(rep.bound),
                ub: Some(rep.objective),
            },
            Err(_) => RunRow {
                r: e.scenario,
                n: e.n,
                method: m,
                cpu_s: None,
                sec_cuts: None,
                benders_cuts: None,
                nodes: None,
                gap0_pct: None,
                gap_pct: None,
                solved_pct: 0.0,
                obj: None,
                lb: None,
                ub: None,
            },
        };
        w.serialize(row)?;
    }
    if outcomes.is_empty() {
        w.write_record(HEADER)?;
    }
    w.flush()?;
    Ok(())
}

fn blocks<'a, 'b>(outcomes: &'b [Outcome<'a>]) -> BTreeMap<(u32, usize, Method), Vec<&'b Outcome<'a>>> {
    let mut map: BTreeMap<_, Vec<_>> = BTreeMap::new();
    for o in outcomes {
        map.entry((o.entry.scenario, o.entry.n, o.opts.method)).or_default().push(o);
    }
    map
}

fn write_blocks(path: &Path, outcomes: &[Outcome]) -> Result<()> {
    let mut w = writer(path)?;
    for ((r, n, method), group) in blocks(outcomes) {
        let ok: Vec<&SolveReport> = group.iter().filter_map(|o| o.result.as_ref().ok()).collect();
        let avg = |f: &dyn Fn(&SolveReport) -> f64| mean(ok.iter().map(|rep| f(rep)));
        let solved = group.iter().filter(|o| o.reached()).count();
        w.serialize(BlockRow {
            r,
            n,
            method,
            cpu_s: avg(&|p| p.wall_time),
            sec_cuts: avg(&|p| p.counters.sec_cuts as f64),
            benders_cuts: avg(&|p| p.counters.benders_cuts as f64),
            nodes: avg(&|p| p.counters.nodes as f64),
            gap0_pct: avg(&|p| 100.0 * p.gap0),
            gap_pct: avg(&|p| gap_pct(p)),
            solved_pct: 100.0 * solved as f64 / group.len() as f64,
            obj: avg(&|p| p.objective),
            lb: avg(&|p| p.bound),
            ub: avg(&|p| p.objective),
        })?;
    }
    if outcomes.is_empty() {
        w.write_record(HEADER)?;
    }
    w.flush()?;
    Ok(())
}

fn write_devs(path: &Path, outcomes: &[Outcome]) -> Result<()> {
    let mut optimum: BTreeMap<&str, f64> = BTreeMap::new();
    for o in outcomes {
        if let Ok(rep) = &o.result {
            if o.opts.method.is_exact() && o.reached() {
                let v = optimum.entry(o.entry.file.as_str()).or_insert(rep.objective);
                *v = v.min(rep.objective);
            }
        }
    }
    let mut w = writer(path)?;
    for ((r, n, method), group) in blocks(outcomes) {
        let ok: Vec<(&Entry, &SolveReport)> =
            group.iter().filter_map(|o| o.result.as_ref().ok().map(|rep| (o.entry, rep))).collect();
        let opt_devs: Vec<f64> = ok
            .iter()
            .filter_map(|(e, rep)| optimum.get(e.file.as_str()).map(|&best| pct(rep.objective - best, best)))
            .collect();
        w.serialize(DevRow {
            r,
            n,
            method,
            instances: group.len(),
            dev_lb_pct: mean(ok.iter().map(|(_, p)| pct(p.objective - p.mst_lower_bound, p.objective))),
            dev_ub_pct: mean(ok.iter().map(|(_, p)| pct(p.center_mst_value - p.objective, p.center_mst_value))),
            mst_pct: mean(ok.iter().map(|(_, p)| if p.tree_is_center_mst { 100.0 } else { 0.0 })),
            dev_opt_pct: mean(opt_devs.iter().copied()),
            dev_opt_max_pct: max(opt_devs.iter().copied()),
        })?;
    }
    w.flush()?;
    Ok(())
}

fn write_status(path: &Path, outcomes: &[Outcome]) -> Result<()> {
    let mut w = writer(path)?;
    for o in outcomes {
        let (status, error) = match &o.result {
            Ok(rep) => (format!("{:?}", rep.status), String::new()),
            Err(e) => ("Failed".to_string(), e.clone()),
        };
        w.serialize(StatusRow {
            file: &o.entry.file,
            instance: &o.entry.name,
            r: o.entry.scenario,
            n: o.entry.n,
            method: o.opts.method,
            status,
            error,
        })?;
    }
    w.flush()?;
    Ok(())
}
