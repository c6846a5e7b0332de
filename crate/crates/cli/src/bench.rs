//! Benchmark sweeps over a grid of generated instances.
//!
//! Every cell `(family, n, m)` runs `trials` instances with seeds
//! `seed + trial`, writes one row per run and then one aggregate row whose
//! `seed` is empty, `status` is `aggregate`, and `active` and `wall_ms` are
//! means over the optimal runs. Rows of a cell are flushed together, so an
//! interrupted sweep leaves every finished cell on disk.

use std::io::Write;
use std::path::PathBuf;
use std::time::Duration;

use anyhow::{bail, Context};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use nested_alloc::model::FamilyTag;
use nested_alloc::{hull, Error};

use crate::run::{instance_for, run, ModeArg, SolverKind};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub families: Vec<String>,
    pub n_list: Vec<usize>,
    /// Constraint counts to sweep; `m = n` when absent.
    #[serde(default)]
    pub m_list: Option<Vec<usize>>,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub epsilon: Option<f64>,
    pub mode: ModeArg,
    pub solver: SolverKind,
    #[serde(default)]
    pub time_limit_s: Option<f64>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub family: String,
    pub n: usize,
    pub m: usize,
    pub seed: Option<u64>,
    pub solver: String,
    pub mode: String,
    pub epsilon: Option<f64>,
    pub objective: Option<f64>,
    pub active: Option<f64>,
    pub rap_calls: Option<usize>,
    pub wall_ms: Option<f64>,
    pub status: String,
}

impl BenchConfig {
    fn families(&self) -> anyhow::Result<Vec<FamilyTag>> {
        self.families
            .iter()
            .map(|f| f.parse::<FamilyTag>().map_err(anyhow::Error::from))
            .collect()
    }

    fn cells(&self) -> anyhow::Result<Vec<(FamilyTag, usize, usize)>> {
        let mut cells = Vec::new();
        for family in self.families()? {
            for &n in &self.n_list {
                match &self.m_list {
                    None => cells.push((family, n, n)),
                    Some(ms) => cells.extend(ms.iter().map(|&m| (family, n, m))),
                }
            }
        }
        Ok(cells)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.trials == 0 {
            bail!("trials must be at least 1");
        }
        if self.families.is_empty() || self.n_list.is_empty() || self.m_list.as_ref().is_some_and(|m| m.is_empty()) {
            bail!("families and size grids must be nonempty");
        }
        if self.mode == ModeArg::Cont && !self.epsilon.is_some_and(|e| e > 0.0 && e.is_finite()) {
            bail!("continuous mode needs epsilon > 0");
        }
        if let Some(t) = self.time_limit_s {
            if !(t >= 0.0 && t.is_finite()) {
                bail!("time limit must be a finite number of seconds");
            }
        }
        match (self.solver, self.mode) {
            (SolverKind::Greedy, ModeArg::Cont) => bail!("greedy solver needs integer mode"),
            (SolverKind::Hull, ModeArg::Int) => bail!("hull solver needs continuous mode"),
            _ => {}
        }
        for (family, n, m) in self.cells()? {
            if n == 0 || m == 0 || m > n {
                bail!("invalid cell {family} n = {n} m = {m}: need 1 <= m <= n");
            }
            if self.solver == SolverKind::Hull {
                let inst = instance_for(family, 1, 1, 0, self.mode)?;
                hull::gamma(&inst.objective).with_context(|| format!("family {family}"))?;
            }
        }
        Ok(())
    }
}

/// Thread cap from `NESTED_ALLOC_THREADS`; unset or `0` means one thread per core.
pub fn thread_pool() -> anyhow::Result<rayon::ThreadPool> {
    let threads = match std::env::var("NESTED_ALLOC_THREADS") {
        Ok(v) => v.trim().parse::<usize>().with_context(|| format!("NESTED_ALLOC_THREADS = {v:?}"))?,
        Err(_) => 0,
    };
    Ok(rayon::ThreadPoolBuilder::new().num_threads(threads).build()?)
}

fn run_trial(cfg: &BenchConfig, family: FamilyTag, n: usize, m: usize, seed: u64) -> Row {
    let epsilon = match cfg.mode {
        ModeArg::Cont => cfg.epsilon,
        ModeArg::Int => None,
    };
    let mut row = Row {
        family: family.name().to_string(),
        n,
        m,
        seed: Some(seed),
        solver: cfg.solver.name().to_string(),
        mode: cfg.mode.name().to_string(),
        epsilon,
        objective: None,
        active: None,
        rap_calls: None,
        wall_ms: None,
        status: String::new(),
    };
    let time_limit = cfg.time_limit_s.map(Duration::from_secs_f64);
    let result = instance_for(family, n, m, seed, cfg.mode).and_then(|inst| run(&inst, cfg.solver, epsilon, time_limit));
    row.status = match result {
        Ok(out) => {
            row.wall_ms = Some(out.wall_ms);
            row.rap_calls = out.stats.map(|s| s.rap_calls);
            if out.solution.is_optimal() {
                row.objective = Some(out.solution.objective);
                row.active = Some(out.active as f64);
                "optimal".into()
            } else {
                "infeasible".into()
            }
        }
        Err(Error::TimeLimit) => "timeout".into(),
        Err(Error::HullNotApplicable { .. }) => "not-applicable".into(),
        Err(e) => format!("error: {e}"),
    };
    row
}

fn aggregate(rows: &[Row]) -> Row {
    let optimal: Vec<&Row> = rows.iter().filter(|r| r.status == "optimal").collect();
    let mean = |f: fn(&Row) -> Option<f64>| {
        (!optimal.is_empty()).then(|| optimal.iter().filter_map(|r| f(r)).sum::<f64>() / optimal.len() as f64)
    };
    Row {
        seed: None,
        objective: None,
        active: mean(|r| r.active),
        rap_calls: None,
        wall_ms: mean(|r| r.wall_ms),
        status: "aggregate".into(),
        ..rows[0].clone()
    }
}

/// Run the sweep, writing CSV to `out`. Returns the aggregate rows.
pub fn run_bench<W: Write>(cfg: &BenchConfig, out: W) -> anyhow::Result<Vec<Row>> {
    cfg.validate()?;
    let pool = thread_pool()?;
    let mut writer = csv::Writer::from_writer(out);
    let mut aggregates = Vec::new();
    for (family, n, m) in cfg.cells()? {
        let rows: Vec<Row> = pool.install(|| {
            (0..cfg.trials)
                .into_par_iter()
                .map(|t| run_trial(cfg, family, n, m, cfg.seed + t as u64))
                .collect()
        });
        for row in &rows {
            writer.serialize(row)?;
        }
        let agg = aggregate(&rows);
        writer.serialize(&agg)?;
        writer.flush()?;
        aggregates.push(agg);
    }
    Ok(aggregates)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> BenchConfig {
        BenchConfig {
            families: vec!["crashing".into()],
            n_list: vec![8],
            m_list: None,
            trials: 3,
            seed: 5,
            epsilon: Some(1e-8),
            mode: ModeArg::Cont,
            solver: SolverKind::Decomp,
            time_limit_s: None,
            output: None,
        }
    }

    #[test]
    fn rows_parse_back() {
        let mut buf = Vec::new();
        run_bench(&config(), &mut buf).unwrap();
        let rows: Vec<Row> = csv::Reader::from_reader(buf.as_slice()).deserialize().collect::<Result<_, _>>().unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows.iter().filter_map(|r| r.seed).collect::<Vec<_>>(), vec![5, 6, 7]);
        assert!(rows[..3].iter().all(|r| r.status == "optimal" && r.rap_calls == Some(15)));
        let mean = rows[..3].iter().map(|r| r.active.unwrap()).sum::<f64>() / 3.0;
        assert_eq!(rows[3].active, Some(mean));
        assert_eq!(rows[3].status, "aggregate");
    }

    #[test]
    fn invalid_configs() {
        let bad = [
            BenchConfig { trials: 0, ..config() },
            BenchConfig { epsilon: None, ..config() },
            BenchConfig { m_list: Some(vec![9]), ..config() },
            BenchConfig { solver: SolverKind::Greedy, ..config() },
            BenchConfig { families: vec!["f".into()], solver: SolverKind::Hull, ..config() },
            BenchConfig { families: vec!["nope".into()], ..config() },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
    }

    #[test]
    fn zero_time_limit_times_out() {
        let cfg = BenchConfig {
            n_list: vec![2000],
            trials: 1,
            time_limit_s: Some(0.0),
            ..config()
        };
        let mut buf = Vec::new();
        run_bench(&cfg, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().nth(1).unwrap().ends_with(",timeout"), "{text}");
    }
}
