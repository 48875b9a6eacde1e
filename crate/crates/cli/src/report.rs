//! The `report` subcommand: per-cut metric tables averaged over
//! repetitions, per-instance ranks across algorithms, a rank summary, and
//! plain x/y plot series.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::time::Duration;

use moco_core::engine::{parse_trace_csv, TraceEvent};
use moco_core::metrics::{self, evaluate_trace, finished_at, rank_with_finished, MetricContext};
use moco_core::problems::{self, FrontFile};

use crate::CliError;

pub const REPORT_HEADER: &str =
    "instance,algorithm,cut_ms,onvgr,hvr,spread,eps_add,rank_onvgr,rank_hvr,rank_spread,rank_eps";

/// Averaged metric values of one algorithm on one instance at one cut.
struct CutCell {
    onvgr: f64,
    hvr: f64,
    spread: Option<f64>,
    eps_add: f64,
    /// True when every repetition had finished by this cut.
    finished: bool,
}

fn fmt(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.6}")
    } else {
        String::new()
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_default()
}

fn read_fronts(dir: &Path) -> Result<BTreeMap<String, FrontFile>, CliError> {
    let mut fronts = BTreeMap::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else {
            continue;
        };
        if !name.ends_with(".front.json") {
            continue;
        }
        let front = problems::load_front(&path)?;
        fronts.insert(front.name.clone(), front);
    }
    Ok(fronts)
}

type TraceSet = BTreeMap<String, BTreeMap<String, Vec<(usize, Vec<TraceEvent>)>>>;

/// Traces grouped as instance -> algorithm -> repetitions, from files named
/// `{instance}__{algorithm}__rep{k}.trace.csv`.
fn read_traces(dir: &Path) -> Result<TraceSet, CliError> {
    let mut set: TraceSet = BTreeMap::new();
    let mut paths: Vec<_> = std::fs::read_dir(dir)?
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .map(|e| e.path())
        .collect();
    paths.sort();
    for path in paths {
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else {
            continue;
        };
        let Some(stem) = name.strip_suffix(".trace.csv") else {
            continue;
        };
        let parts: Vec<&str> = stem.split("__").collect();
        if parts.len() != 3 || !parts[2].starts_with("rep") {
            return Err(CliError::Data(format!(
                "trace file {name} does not match {{instance}}__{{algorithm}}__rep{{k}}.trace.csv"
            )));
        }
        let file = std::fs::File::open(&path)?;
        let (p, events) = parse_trace_csv(std::io::BufReader::new(file))
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        set.entry(parts[0].to_string())
            .or_default()
            .entry(parts[1].to_string())
            .or_default()
            .push((p, events));
    }
    Ok(set)
}

/// Average the per-rep cut rows of one algorithm. Epsilon keeps the infinity
/// sentinel through the mean; the spread is averaged over the repetitions
/// where it is defined.
fn average_reps(
    ctx: &MetricContext,
    reps: &[(usize, Vec<TraceEvent>)],
    cuts: &[Duration],
) -> Result<Vec<CutCell>, CliError> {
    let mut cells: Vec<CutCell> = Vec::with_capacity(cuts.len());
    let per_rep: Vec<Vec<metrics::CutRow>> = reps
        .iter()
        .map(|(_, events)| evaluate_trace(events, ctx, cuts))
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Data(e.to_string()))?;
    let finish_times: Vec<Option<Duration>> =
        reps.iter().map(|(_, events)| finished_at(events)).collect();
    for (ci, &cut) in cuts.iter().enumerate() {
        let k = per_rep.len() as f64;
        let onvgr = per_rep.iter().map(|rows| rows[ci].onvgr).sum::<f64>() / k;
        let hvr = per_rep.iter().map(|rows| rows[ci].hvr).sum::<f64>() / k;
        let eps_add = per_rep.iter().map(|rows| rows[ci].eps_add).sum::<f64>() / k;
        let spreads: Vec<f64> = per_rep.iter().filter_map(|rows| rows[ci].spread).collect();
        let spread = if spreads.is_empty() {
            None
        } else {
            Some(spreads.iter().sum::<f64>() / spreads.len() as f64)
        };
        let finished = finish_times.iter().all(|t| t.is_some_and(|t| t <= cut));
        cells.push(CutCell {
            onvgr,
            hvr,
            spread,
            eps_add,
            finished,
        });
    }
    Ok(cells)
}

pub fn cmd_report(
    out: &Path,
    traces_dir: &Path,
    fronts_dir: &Path,
    cuts_ms: &[u64],
) -> Result<(), CliError> {
    let mut cuts_ms: Vec<u64> = cuts_ms.to_vec();
    cuts_ms.sort_unstable();
    cuts_ms.dedup();
    let cuts: Vec<Duration> = cuts_ms
        .iter()
        .map(|&ms| Duration::from_millis(ms))
        .collect();

    let fronts = read_fronts(fronts_dir)?;
    let traces = read_traces(traces_dir)?;
    if traces.is_empty() {
        return Err(CliError::Data(format!(
            "no trace files in {}",
            traces_dir.display()
        )));
    }

    let plots = out.join("plots");
    std::fs::create_dir_all(&plots)?;
    let mut report = String::from(REPORT_HEADER);
    report.push('\n');

    // algorithm -> cut index -> (rank sums per metric, instance count)
    let mut summary: BTreeMap<String, Vec<([f64; 4], u64)>> = BTreeMap::new();

    for (instance, algos) in &traces {
        let front = fronts
            .get(instance)
            .ok_or_else(|| CliError::Data(format!("no front file for instance {instance}")))?;
        for reps in algos.values() {
            for (p, _) in reps {
                if *p != front.p {
                    return Err(CliError::Data(format!(
                        "{instance}: trace has p = {p} but the front has p = {}",
                        front.p
                    )));
                }
            }
        }
        let ctx = MetricContext::new(front.points.clone())
            .map_err(|e| CliError::Data(format!("{instance}: {e}")))?;

        let algo_names: Vec<&String> = algos.keys().collect();
        let cells: Vec<Vec<CutCell>> = algos
            .values()
            .map(|reps| average_reps(&ctx, reps, &cuts))
            .collect::<Result<_, _>>()?;

        for (ci, &cut_ms) in cuts_ms.iter().enumerate() {
            let finished: Vec<bool> = cells.iter().map(|c| c[ci].finished).collect();
            let rank_onvgr = rank_with_finished(
                &cells.iter().map(|c| c[ci].onvgr).collect::<Vec<_>>(),
                false,
                &finished,
            );
            let rank_hvr = rank_with_finished(
                &cells.iter().map(|c| c[ci].hvr).collect::<Vec<_>>(),
                false,
                &finished,
            );
            let rank_spread = rank_with_finished(
                &cells
                    .iter()
                    .map(|c| c[ci].spread.unwrap_or(f64::INFINITY))
                    .collect::<Vec<_>>(),
                true,
                &finished,
            );
            let rank_eps = rank_with_finished(
                &cells.iter().map(|c| c[ci].eps_add).collect::<Vec<_>>(),
                true,
                &finished,
            );
            let discarded = finished.iter().all(|&f| f);
            for (ai, name) in algo_names.iter().enumerate() {
                let cell = &cells[ai][ci];
                report.push_str(&format!(
                    "{instance},{name},{cut_ms},{},{},{},{},{},{},{},{}\n",
                    fmt(cell.onvgr),
                    fmt(cell.hvr),
                    fmt_opt(cell.spread),
                    fmt(cell.eps_add),
                    fmt(rank_onvgr[ai]),
                    fmt(rank_hvr[ai]),
                    fmt(rank_spread[ai]),
                    fmt(rank_eps[ai]),
                ));
                if !discarded {
                    let entry = summary
                        .entry((*name).clone())
                        .or_insert_with(|| vec![([0.0; 4], 0); cuts.len()]);
                    let (sums, count) = &mut entry[ci];
                    sums[0] += rank_onvgr[ai];
                    sums[1] += rank_hvr[ai];
                    sums[2] += rank_spread[ai];
                    sums[3] += rank_eps[ai];
                    *count += 1;
                }
            }
        }

        // Plain x/y plot series per algorithm and metric.
        type CellFmt = Box<dyn Fn(&CutCell) -> String>;
        for (ai, name) in algo_names.iter().enumerate() {
            let series: [(&str, CellFmt); 4] = [
                ("onvgr", Box::new(|c: &CutCell| fmt(c.onvgr))),
                ("hvr", Box::new(|c: &CutCell| fmt(c.hvr))),
                ("spread", Box::new(|c: &CutCell| fmt_opt(c.spread))),
                ("eps_add", Box::new(|c: &CutCell| fmt(c.eps_add))),
            ];
            for (metric, value) in &series {
                let path = plots.join(format!("{instance}__{name}__{metric}.csv"));
                let mut file = std::fs::File::create(&path)?;
                writeln!(file, "cut_ms,value")?;
                for (ci, &cut_ms) in cuts_ms.iter().enumerate() {
                    writeln!(file, "{cut_ms},{}", value(&cells[ai][ci]))?;
                }
            }
        }
    }

    std::fs::write(out.join("report.csv"), &report)?;
    println!("wrote {}", out.join("report.csv").display());

    let mut summary_csv =
        String::from("algorithm,cut_ms,rank_onvgr,rank_hvr,rank_spread,rank_eps\n");
    for (name, per_cut) in &summary {
        let mut rank_series: Vec<Vec<String>> = vec![Vec::new(); 4];
        for (ci, &cut_ms) in cuts_ms.iter().enumerate() {
            let (sums, count) = &per_cut[ci];
            let cols: Vec<String> = if *count == 0 {
                vec![String::new(); 4]
            } else {
                sums.iter().map(|s| fmt(s / *count as f64)).collect()
            };
            summary_csv.push_str(&format!(
                "{name},{cut_ms},{},{},{},{}\n",
                cols[0], cols[1], cols[2], cols[3]
            ));
            for (k, c) in cols.into_iter().enumerate() {
                rank_series[k].push(format!("{cut_ms},{c}"));
            }
        }
        for (k, metric) in ["onvgr", "hvr", "spread", "eps_add"].iter().enumerate() {
            let path = plots.join(format!("rank__{name}__{metric}.csv"));
            let mut file = std::fs::File::create(&path)?;
            writeln!(file, "cut_ms,avg_rank")?;
            for line in &rank_series[k] {
                writeln!(file, "{line}")?;
            }
        }
    }
    std::fs::write(out.join("rank_summary.csv"), &summary_csv)?;
    println!("wrote {}", out.join("rank_summary.csv").display());
    Ok(())
}
