//! The four subcommands.

use std::collections::HashSet;

use radon_core::bp;
use radon_core::colgen::{self, ColgenLimits, ColgenStatus};
use radon_core::combinat::KSet;
use radon_core::conditions::{self, OverlapFamily};
use radon_core::lp::LpStatus;
use radon_core::netio::{conductance, volume, Graph};
use radon_core::radon::{CliqueDictionary, SparseSignal, DEFAULT_ENUMERATION_CAP};
use serde::Serialize;
use serde_json::json;

use crate::config::{usage, Construction, Mode, RunConfig, Scope};
use crate::input::{self, candidate_cliques, Loaded};
use crate::output::{num, write_csv, write_json};

/// What a command reports back besides its files.
pub struct Outcome {
    /// Every solve reached optimality (or the flagged greedy bound).
    pub optimal: bool,
    pub warnings: Vec<String>,
}

struct Solved {
    signal: SparseSignal,
    objective: f64,
    gap: f64,
    lower_bound: Option<f64>,
    approx_factor: f64,
    status: String,
    optimal: bool,
    iterations: usize,
    oracle_calls: Option<usize>,
}

fn dictionary(cfg: &RunConfig, obs: &radon_core::Observations, kmin: usize, kmax: usize) -> anyhow::Result<CliqueDictionary> {
    Ok(match cfg.scope {
        Scope::Full => CliqueDictionary::enumerate_full_sizes(obs.n, obs.j, kmin..=kmax, DEFAULT_ENUMERATION_CAP)?,
        Scope::Candidates => {
            let cands: Vec<KSet> = candidate_cliques(obs, kmax)?.into_iter().filter(|c| c.len() >= kmin).collect();
            CliqueDictionary::new(obs.n, obs.j, cands)?
        }
    })
}

fn kmax_for(cfg: &RunConfig, n: usize) -> anyhow::Result<usize> {
    let k = cfg.kmax.unwrap_or(cfg.j + 2).min(n);
    if k < cfg.j {
        return Err(usage(format!("kmax {k} is below j {}", cfg.j)));
    }
    Ok(k)
}

fn solve(cfg: &RunConfig, obs: &radon_core::Observations, dict: Option<&CliqueDictionary>, kmax: usize, delta: f64) -> anyhow::Result<Solved> {
    match cfg.mode {
        Mode::Dense => {
            let dict = dict.expect("dense mode builds a dictionary");
            let r = bp::solve_p1_delta(dict, &obs.values, delta)?;
            Ok(Solved {
                objective: r.objective,
                gap: r.gap,
                lower_bound: Some(r.dual_value),
                approx_factor: 1.0,
                status: format!("{:?}", r.status),
                optimal: r.status == LpStatus::Optimal,
                iterations: r.iterations,
                oracle_calls: None,
                signal: r.signal,
            })
        }
        Mode::Colgen => {
            let limits = ColgenLimits { eta: cfg.eta, ..ColgenLimits::default() };
            let r = colgen::cutting_plane_solve(obs.n, obs.j, kmax, &obs.values, delta, &limits)?;
            Ok(Solved {
                objective: r.objective,
                gap: r.gap,
                lower_bound: Some(r.lower_bound),
                approx_factor: r.approx_factor,
                status: format!("{:?}", r.status),
                optimal: r.status == ColgenStatus::Converged,
                iterations: r.iterations,
                oracle_calls: Some(r.oracle_calls),
                signal: r.signal,
            })
        }
    }
}

fn ranked(signal: &SparseSignal, threshold: f64) -> Vec<(KSet, f64)> {
    let mut v = bp::support_of(signal, threshold);
    v.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()).then_with(|| a.0.colex_cmp(&b.0)));
    v
}

fn approx_warning(s: &Solved) -> Option<String> {
    (s.optimal && s.approx_factor < 1.0).then(|| {
        format!("greedy pricing certified the result; the lower bound is discounted by {}", s.approx_factor)
    })
}

#[derive(Serialize)]
struct CliqueRecord {
    nodes: Vec<usize>,
    labels: Vec<String>,
    size: usize,
    weight: f64,
}

fn metric(graph: Option<&Graph>, f: fn(&Graph, &KSet) -> radon_core::Result<f64>, c: &KSet) -> Option<f64> {
    graph.and_then(|g| f(g, c).ok())
}

pub fn detect(cfg: &RunConfig) -> anyhow::Result<Outcome> {
    let loaded = input::load(cfg)?;
    let obs = &loaded.observations;
    let kmax = kmax_for(cfg, loaded.n())?;
    let dict = match cfg.mode {
        Mode::Dense => Some(dictionary(cfg, obs, cfg.j, kmax)?),
        Mode::Colgen => None,
    };
    let s = solve(cfg, obs, dict.as_ref(), kmax, cfg.delta)?;
    let cliques = ranked(&s.signal, cfg.threshold);
    let warnings: Vec<String> = approx_warning(&s).into_iter().collect();

    let records: Vec<CliqueRecord> = cliques
        .iter()
        .map(|(c, w)| CliqueRecord {
            nodes: c.as_slice().to_vec(),
            labels: c.as_slice().iter().map(|&v| loaded.label(v)).collect(),
            size: c.len(),
            weight: *w,
        })
        .collect();
    write_json(
        cfg,
        "cliques.json",
        &json!({
            "status": s.status,
            "optimal": s.optimal,
            "objective": s.objective,
            "gap": s.gap,
            "lower_bound": s.lower_bound,
            "approx_factor": s.approx_factor,
            "iterations": s.iterations,
            "oracle_calls": s.oracle_calls,
            "n": loaded.n(),
            "kmax": kmax,
            "clique_count": records.len(),
            "cliques": records,
            "warnings": warnings,
        }),
    )?;

    let graph = loaded.graph.as_ref();
    let rows: Vec<Vec<String>> = cliques
        .iter()
        .enumerate()
        .map(|(i, (c, w))| {
            vec![
                i.to_string(),
                join(c.as_slice().iter().map(|v| v.to_string())),
                join(c.as_slice().iter().map(|&v| loaded.label(v))),
                c.len().to_string(),
                num(*w),
                metric(graph, volume, c).map_or_else(String::new, num),
                metric(graph, conductance, c).map_or_else(String::new, num),
            ]
        })
        .collect();
    write_csv(cfg, "metrics.csv", &["rank", "nodes", "labels", "size", "weight", "volume", "conductance"], &rows)?;
    Ok(Outcome { optimal: s.optimal, warnings })
}

fn join(items: impl Iterator<Item = String>) -> String {
    items.collect::<Vec<_>>().join(" ")
}

struct Trial {
    weights: Vec<f64>,
    recovered: bool,
    optimal: bool,
}

pub fn simulate(cfg: &RunConfig) -> anyhow::Result<Outcome> {
    let spec = input::load_planted(cfg)?;
    if spec.cliques.is_empty() {
        return Err(usage("planted spec has no cliques"));
    }
    if spec.j != cfg.j {
        return Err(usage(format!("planted spec has j = {}, flags say {}", spec.j, cfg.j)));
    }
    let kmin = spec.cliques.iter().map(|(c, _)| c.len()).min().unwrap_or(cfg.j);
    let kmax = cfg.kmax.unwrap_or_else(|| spec.cliques.iter().map(|(c, _)| c.len()).max().unwrap_or(cfg.j));
    if kmax < kmin {
        return Err(usage(format!("kmax {kmax} is below the smallest planted clique ({kmin})")));
    }
    let grid = cfg.grid.clone().unwrap_or_else(|| (0..=9).map(|i| f64::from(i) / 10.0).collect());
    let truth: HashSet<KSet> = spec.cliques.iter().map(|(c, _)| c.clone()).collect();
    let dict = match cfg.mode {
        Mode::Dense => {
            let zero = radon_core::Observations::new(spec.n, spec.j, vec![0.0; radon_core::binom(spec.n as u64, spec.j as u64)? as usize])?;
            if cfg.scope == Scope::Candidates {
                return Err(usage("simulate enumerates the full dictionary; drop --scope candidates"));
            }
            Some(dictionary(cfg, &zero, kmin, kmax)?)
        }
        Mode::Colgen => None,
    };

    let run = |eps: f64, trial: usize| -> anyhow::Result<Trial> {
        let (obs, _) = spec.generate(eps, cfg.seed.wrapping_add(trial as u64))?;
        // the noise bound is known here: delta tracks epsilon
        let s = solve(cfg, &obs, dict.as_ref(), kmax, eps)?;
        let support: HashSet<KSet> = bp::support_of(&s.signal, cfg.threshold).into_iter().map(|(c, _)| c).collect();
        Ok(Trial {
            weights: spec.cliques.iter().map(|(c, _)| s.signal.get(c)).collect(),
            recovered: support == truth,
            optimal: s.optimal,
        })
    };

    let mut rows = Vec::new();
    let mut all_optimal = true;
    for &eps in &grid {
        let trials = run_trials(cfg.trials, cfg.jobs, |t| run(eps, t))?;
        all_optimal &= trials.iter().all(|t| t.optimal);
        let rate = trials.iter().filter(|t| t.recovered).count() as f64 / trials.len() as f64;
        for (ci, (c, w)) in spec.cliques.iter().enumerate() {
            let ws: Vec<f64> = trials.iter().map(|t| t.weights[ci]).collect();
            let (mean, std) = mean_std(&ws);
            rows.push(vec![num(eps), join(c.as_slice().iter().map(|v| v.to_string())), num(*w), num(mean), num(std), num(rate)]);
        }
    }
    write_csv(cfg, "simulate.csv", &["epsilon", "clique", "true_weight", "mean_weight", "std_weight", "recovery_rate"], &rows)?;
    Ok(Outcome { optimal: all_optimal, warnings: Vec::new() })
}

/// Sample mean and standard deviation; shifting by the first value keeps
/// identical samples at exactly zero spread.
fn mean_std(xs: &[f64]) -> (f64, f64) {
    let x0 = xs[0];
    let m = xs.iter().map(|x| x - x0).sum::<f64>() / xs.len() as f64;
    if xs.len() < 2 {
        return (x0, 0.0);
    }
    let var = xs.iter().map(|x| (x - x0 - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
    (x0 + m, var.sqrt())
}

/// Runs `f(0..count)` on `jobs` threads; results come back in trial order.
fn run_trials<T: Send>(count: usize, jobs: usize, f: impl Fn(usize) -> anyhow::Result<T> + Sync) -> anyhow::Result<Vec<T>> {
    if jobs <= 1 {
        return (0..count).map(&f).collect();
    }
    let f = &f;
    let mut slots: Vec<Option<anyhow::Result<T>>> = (0..count).map(|_| None).collect();
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..jobs)
            .map(|w| scope.spawn(move || (w..count).step_by(jobs).map(|t| (t, f(t))).collect::<Vec<_>>()))
            .collect();
        for h in handles {
            for (t, r) in h.join().expect("trial worker panicked") {
                slots[t] = Some(r);
            }
        }
    });
    slots.into_iter().map(|s| s.expect("every trial ran")).collect()
}

pub fn check(cfg: &RunConfig) -> anyhow::Result<Outcome> {
    let j = cfg.j;
    if let Some(Construction::Rip) = cfg.construction {
        let k = cfg.kmax.ok_or_else(|| usage("--construction rip needs --kmax as the clique size"))?;
        let n = cfg.nodes.unwrap_or(k + j + 2);
        let ce = conditions::rip_counterexample(n, j, k)?;
        write_json(
            cfg,
            "check.json",
            &json!({
                "construction": "rip",
                "support": ce.support.iter().map(|c| c.as_slice().to_vec()).collect::<Vec<_>>(),
                "support_size": ce.support.len(),
                "rank": ce.rank,
                "rank_deficit": ce.support.len() - ce.rank,
                "nonzero_rows": ce.nonzero_rows,
                "kernel": ce.kernel,
            }),
        )?;
        return Ok(Outcome { optimal: true, warnings: Vec::new() });
    }

    let (n, support, graph_obs) = match (cfg.construction, &cfg.support) {
        (Some(c), None) => {
            let k = cfg.kmax.ok_or_else(|| usage("--construction needs --kmax as the clique size"))?;
            let family = if c == Construction::Tight { OverlapFamily::Tight } else { OverlapFamily::Excess };
            let (n, t) = conditions::overlap_construction(j, k, family)?;
            (n, t, None)
        }
        (None, Some(text)) => {
            let support = input::parse_support(text)?;
            if support.is_empty() {
                return Err(usage("--support lists no cliques"));
            }
            let (n, obs) = if cfg.input.is_some() || cfg.preset.is_some() {
                let loaded: Loaded = input::load(cfg)?;
                (loaded.n(), Some(loaded.observations))
            } else {
                let max = support.iter().filter_map(KSet::max_element).max().unwrap_or(0);
                (cfg.nodes.unwrap_or(max + 1), None)
            };
            (n, support, obs)
        }
        (Some(_), Some(_)) => return Err(usage("--construction and --support are exclusive")),
        (None, None) => return Err(usage("check needs --support or --construction")),
    };
    let kmin = support.iter().map(KSet::len).min().unwrap_or(j);
    let kmax = cfg.kmax.unwrap_or_else(|| support.iter().map(KSet::len).max().unwrap_or(j));
    let dict = match cfg.scope {
        Scope::Full => CliqueDictionary::enumerate_full_sizes(n, j, kmin..=kmax, DEFAULT_ENUMERATION_CAP)?,
        Scope::Candidates => {
            let obs = graph_obs.as_ref().ok_or_else(|| usage("--scope candidates needs --input"))?;
            let mut cands: Vec<KSet> = candidate_cliques(obs, kmax)?.into_iter().filter(|c| c.len() >= kmin).collect();
            for t in &support {
                if !cands.contains(t) {
                    cands.push(t.clone());
                }
            }
            CliqueDictionary::new(n, j, cands)?
        }
    };
    let irr = conditions::irr_norm(&dict, &support)?;
    let signs = vec![1.0; support.len()];
    let cert = conditions::dual_certificate(&dict, &support, &signs).ok();

    let overlap = conditions::max_overlap(&support);
    let same_size = support.iter().all(|c| c.len() == support[0].len());
    let k = support[0].len();
    let worst_case = same_size.then(|| conditions::worst_case_guarantee(j, k, overlap).ok()).flatten();
    let partition = same_size.then(|| conditions::partition_guarantee(j, k, overlap, support.len()).ok()).flatten();
    let restricted = same_size.then(|| conditions::restricted_guarantee(j, k, support.len()).ok()).flatten();
    let mut notes = Vec::new();
    if overlap >= j {
        notes.push(format!(
            "cliques overlap in {overlap} >= j nodes: the irrepresentable norm can reach or exceed 1 and recovery may fail"
        ));
    }
    let stable = match conditions::column_factor(n, j, &support)
        .and_then(|cf| conditions::stable_bound(support.len(), irr.irr_norm, cfg.delta, cfg.delta, cf))
    {
        Ok(b) => json!(b),
        Err(e) => json!({ "not_applicable": e.to_string() }),
    };
    write_json(
        cfg,
        "check.json",
        &json!({
            "construction": cfg.construction,
            "n": n,
            "support": support.iter().map(|c| c.as_slice().to_vec()).collect::<Vec<_>>(),
            "irr": irr,
            "certificate": cert,
            "max_overlap": overlap,
            "worst_case": worst_case,
            "partition": partition,
            "restricted_max_overlap": restricted,
            "disjoint": conditions::mixed_size_guarantee(&support),
            "stable_bound": stable,
            "notes": notes,
        }),
    )?;
    Ok(Outcome { optimal: true, warnings: Vec::new() })
}

pub fn path(cfg: &RunConfig) -> anyhow::Result<Outcome> {
    let grid = cfg.grid.clone().ok_or_else(|| usage("path needs --grid"))?;
    let loaded = input::load(cfg)?;
    let obs = &loaded.observations;
    let kmax = kmax_for(cfg, loaded.n())?;
    let solved: Vec<(f64, Solved)> = match cfg.mode {
        Mode::Dense => {
            let dict = dictionary(cfg, obs, cfg.j, kmax)?;
            bp::regularization_path(&dict, &obs.values, &grid, bp::PathMode::Sequential)?
                .into_iter()
                .map(|(d, r)| {
                    let s = Solved {
                        objective: r.objective,
                        gap: r.gap,
                        lower_bound: Some(r.dual_value),
                        approx_factor: 1.0,
                        status: format!("{:?}", r.status),
                        optimal: r.status == LpStatus::Optimal,
                        iterations: r.iterations,
                        oracle_calls: None,
                        signal: r.signal,
                    };
                    (d, s)
                })
                .collect()
        }
        Mode::Colgen => grid
            .iter()
            .map(|&d| Ok((d, solve(cfg, obs, None, kmax, d)?)))
            .collect::<anyhow::Result<Vec<_>>>()?,
    };
    let mut warnings = Vec::new();
    let rows: Vec<Vec<String>> = solved
        .iter()
        .map(|(d, s)| {
            warnings.extend(approx_warning(s).map(|w| format!("delta {d}: {w}")));
            let top = ranked(&s.signal, cfg.threshold);
            let listed: Vec<String> = top
                .iter()
                .filter(|(c, _)| c.len() > cfg.j)
                .take(cfg.top)
                .map(|(c, w)| format!("{}:{}", c.as_slice().iter().map(|&v| loaded.label(v)).collect::<Vec<_>>().join("+"), num(*w)))
                .collect();
            vec![num(*d), s.status.clone(), num(s.objective), num(s.gap), top.len().to_string(), listed.join(";")]
        })
        .collect();
    write_csv(cfg, "path.csv", &["delta", "status", "objective", "gap", "support_size", "top_cliques"], &rows)?;
    Ok(Outcome { optimal: solved.iter().all(|(_, s)| s.optimal), warnings })
}
