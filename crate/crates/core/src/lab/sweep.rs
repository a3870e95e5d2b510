use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complexity::{coarse_complexity, reversal_operator};
use crate::qca::{build_global_operator, evolve, GlobalOperator, LocalRule};
use crate::qlin::{random_state, RngSeed, StateVector};
use crate::thermo::{equilibration_time, l2_convergence, shannon_entropy, AnalysisConfig};
use crate::{Error, Result};

pub const DEFAULT_MASTER_SEED: u64 = 20_190_701;

/// Ensemble description. Operator `o` uses task index `o`; initial condition
/// `i` under operator `o` uses `num_operators + o·num_initial_conditions + i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct ExperimentConfig {
    pub n_qubits: usize,
    pub num_operators: usize,
    pub num_initial_conditions: usize,
    pub master_seed: u64,
    pub analysis: AnalysisConfig,
    /// Steps each trajectory is evolved for.
    pub horizon: usize,
    /// Requested tables: any of `rows`, `byOperator`, `byInitialCondition`,
    /// `fits`, `convergence`.
    pub outputs: Vec<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n_qubits: 3,
            num_operators: 50,
            num_initial_conditions: 100,
            master_seed: DEFAULT_MASTER_SEED,
            analysis: AnalysisConfig::default(),
            horizon: 500,
            outputs: [
                "rows",
                "byOperator",
                "byInitialCondition",
                "fits",
                "convergence",
            ]
            .map(String::from)
            .to_vec(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(2..=crate::qlin::MAX_QUBITS).contains(&self.n_qubits) {
            return Err(Error::InvalidArgument(format!(
                "nQubits {} outside 2..=12",
                self.n_qubits
            )));
        }
        if self.num_operators == 0 || self.num_initial_conditions == 0 {
            return Err(Error::InvalidArgument(
                "operator and initial-condition counts must be >= 1".into(),
            ));
        }
        self.analysis.validate()?;
        if self.horizon < self.analysis.window {
            return Err(Error::InvalidArgument(format!(
                "horizon {} shorter than window {}",
                self.horizon, self.analysis.window
            )));
        }
        const KNOWN: [&str; 5] = [
            "rows",
            "byOperator",
            "byInitialCondition",
            "fits",
            "convergence",
        ];
        if let Some(o) = self.outputs.iter().find(|o| !KNOWN.contains(&o.as_str())) {
            return Err(Error::InvalidArgument(format!(
                "unknown output table {o:?}"
            )));
        }
        Ok(())
    }

    pub fn wants(&self, table: &str) -> bool {
        self.outputs.iter().any(|o| o == table)
    }

    pub fn operator_seed(&self, o: usize) -> RngSeed {
        RngSeed::new(self.master_seed, o as u64)
    }

    pub fn initial_condition_seed(&self, o: usize, i: usize) -> RngSeed {
        RngSeed::new(
            self.master_seed,
            (self.num_operators + o * self.num_initial_conditions + i) as u64,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SweepRow {
    pub operator_index: usize,
    pub ic_index: usize,
    pub t_eq: Option<usize>,
    /// No equilibration within the horizon.
    pub censored: bool,
    /// The global operator mapped the state to zero; no other field is set.
    pub annihilated: bool,
    pub complexity_at_eq: Option<f64>,
    pub entropy_at_eq: Option<f64>,
}

impl SweepRow {
    /// Equilibrated and carrying all quantities.
    pub fn usable(&self) -> bool {
        !self.censored && !self.annihilated && self.t_eq.is_some()
    }
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// Per operator, the mean over initial conditions of `‖p(t) − p̄‖₂`.
    pub convergence: Vec<Vec<f64>>,
}

/// Worker count: `QTA_THREADS` when set to a positive integer, otherwise the
/// rayon default.
pub fn thread_count() -> Option<usize> {
    std::env::var("QTA_THREADS")
        .ok()?
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
}

/// Evolves one cell to the horizon and measures it. Also returns the L²
/// distance series (empty for annihilated cells).
pub fn run_cell(
    g: &GlobalOperator,
    state0: &StateVector,
    cfg: &ExperimentConfig,
    operator_index: usize,
    ic_index: usize,
) -> Result<(SweepRow, Vec<f64>)> {
    let mut row = SweepRow {
        operator_index,
        ic_index,
        t_eq: None,
        censored: false,
        annihilated: false,
        complexity_at_eq: None,
        entropy_at_eq: None,
    };
    let traj = match evolve(state0, g, cfg.horizon) {
        Ok(t) => t,
        Err(Error::AnnihilatedAt { .. }) => {
            row.annihilated = true;
            return Ok((row, Vec::new()));
        }
        Err(e) => return Err(e),
    };
    let report = equilibration_time(&traj.probabilities, &cfg.analysis)?;
    row.t_eq = report.t_eq;
    row.censored = !report.equilibrated;
    let at = report.t_eq.unwrap_or(cfg.horizon);
    let reversal = reversal_operator(state0, &traj.states[at])?;
    row.complexity_at_eq = Some(coarse_complexity(&reversal)?.value);
    row.entropy_at_eq = Some(shannon_entropy(&report.equilibrium_probabilities)?);
    let distances = l2_convergence(&traj.probabilities, cfg.analysis.window)?;
    Ok((row, distances))
}

/// Runs the ensemble with caller-chosen rules and initial conditions. Output
/// order is canonical `(operator, ic)` regardless of scheduling.
pub fn sweep_with<R, S>(cfg: &ExperimentConfig, rule_for: R, state_for: S) -> Result<SweepResult>
where
    R: Fn(usize) -> LocalRule + Sync,
    S: Fn(usize, usize) -> StateVector + Sync,
{
    cfg.validate()?;
    let run = || -> Result<SweepResult> {
        let operators: Vec<GlobalOperator> = (0..cfg.num_operators)
            .into_par_iter()
            .map(|o| build_global_operator(&rule_for(o), cfg.n_qubits))
            .collect::<Result<_>>()?;
        let cells: Vec<(SweepRow, Vec<f64>)> = (0..cfg.num_operators * cfg.num_initial_conditions)
            .into_par_iter()
            .map(|cell| {
                let (o, i) = (
                    cell / cfg.num_initial_conditions,
                    cell % cfg.num_initial_conditions,
                );
                run_cell(&operators[o], &state_for(o, i), cfg, o, i)
            })
            .collect::<Result<_>>()?;

        let mut convergence = Vec::with_capacity(cfg.num_operators);
        for chunk in cells.chunks(cfg.num_initial_conditions) {
            let series: Vec<&Vec<f64>> = chunk
                .iter()
                .map(|(_, d)| d)
                .filter(|d| !d.is_empty())
                .collect();
            let mut mean = vec![0.0; cfg.horizon + 1];
            for d in &series {
                for (m, x) in mean.iter_mut().zip(d.iter()) {
                    *m += x;
                }
            }
            if !series.is_empty() {
                mean.iter_mut().for_each(|m| *m /= series.len() as f64);
            }
            convergence.push(mean);
        }
        Ok(SweepResult {
            rows: cells.into_iter().map(|(r, _)| r).collect(),
            convergence,
        })
    };
    match thread_count() {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    }
}

/// The standard ensemble: one Haar-random 4×4 gate per operator, Gaussian
/// random initial states.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    let n = cfg.n_qubits;
    sweep_with(
        cfg,
        |o| LocalRule::haar(cfg.operator_seed(o)),
        |o, i| random_state(n, cfg.initial_condition_seed(o, i)).expect("validated qubit count"),
    )
}

const SWEEP_HEADER: [&str; 7] = [
    "operator",
    "ic",
    "t_eq",
    "censored",
    "annihilated",
    "complexity",
    "entropy",
];

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(String::new, T::to_string)
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for r in rows {
        w.write_record([
            r.operator_index.to_string(),
            r.ic_index.to_string(),
            opt(&r.t_eq),
            u8::from(r.censored).to_string(),
            u8::from(r.annihilated).to_string(),
            opt(&r.complexity_at_eq),
            opt(&r.entropy_at_eq),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_sweep_csv<R: Read>(input: R) -> Result<Vec<SweepRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers()?.clone();
    if header.iter().ne(SWEEP_HEADER.iter().copied()) {
        return Err(Error::InvalidArgument(format!(
            "unexpected sweep table header {header:?}"
        )));
    }
    let bad = |what: &str, v: &str| Error::InvalidArgument(format!("bad {what} value {v:?}"));
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let int = |k: usize| {
            rec[k]
                .parse::<usize>()
                .map_err(|_| bad(SWEEP_HEADER[k], &rec[k]))
        };
        let flag = |k: usize| match &rec[k] {
            "0" => Ok(false),
            "1" => Ok(true),
            v => Err(bad(SWEEP_HEADER[k], v)),
        };
        let float = |k: usize| -> Result<Option<f64>> {
            if rec[k].is_empty() {
                Ok(None)
            } else {
                rec[k]
                    .parse()
                    .map(Some)
                    .map_err(|_| bad(SWEEP_HEADER[k], &rec[k]))
            }
        };
        rows.push(SweepRow {
            operator_index: int(0)?,
            ic_index: int(1)?,
            t_eq: if rec[2].is_empty() {
                None
            } else {
                Some(int(2)?)
            },
            censored: flag(3)?,
            annihilated: flag(4)?,
            complexity_at_eq: float(5)?,
            entropy_at_eq: float(6)?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(ops: usize, ics: usize) -> ExperimentConfig {
        ExperimentConfig {
            num_operators: ops,
            num_initial_conditions: ics,
            horizon: 120,
            analysis: AnalysisConfig {
                horizon: 120,
                ..Default::default()
            },
            ..Default::default()
        }
    }

    #[test]
    fn single_cell_sweep() {
        let res = run_sweep(&small(1, 1)).unwrap();
        assert_eq!(res.rows.len(), 1);
        assert_eq!(res.convergence.len(), 1);
    }

    #[test]
    fn forced_cnot_fixed_point_row() {
        let cfg = small(1, 1);
        let res = sweep_with(
            &cfg,
            |_| LocalRule::cnot(),
            |_, _| StateVector::basis(3, 0).unwrap(),
        )
        .unwrap();
        let row = &res.rows[0];
        assert_eq!(row.t_eq, Some(0));
        assert!((row.complexity_at_eq.unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(row.entropy_at_eq, Some(0.0));
    }

    #[test]
    fn seeds_follow_task_layout() {
        let cfg = small(3, 4);
        assert_eq!(cfg.operator_seed(2), RngSeed::new(cfg.master_seed, 2));
        assert_eq!(
            cfg.initial_condition_seed(1, 2),
            RngSeed::new(cfg.master_seed, 3 + 4 + 2)
        );
    }

    #[test]
    fn rows_are_canonical_and_csv_round_trips() {
        let res = run_sweep(&small(3, 4)).unwrap();
        let order: Vec<(usize, usize)> = res
            .rows
            .iter()
            .map(|r| (r.operator_index, r.ic_index))
            .collect();
        let expect: Vec<(usize, usize)> =
            (0..3).flat_map(|o| (0..4).map(move |i| (o, i))).collect();
        assert_eq!(order, expect);
        let mut buf = Vec::new();
        write_sweep_csv(&res.rows, &mut buf).unwrap();
        assert_eq!(read_sweep_csv(buf.as_slice()).unwrap(), res.rows);
        for r in &res.rows {
            let c = r.complexity_at_eq.unwrap();
            assert!((1.0 - 1e-9..=2.0 + 1e-9).contains(&c));
            assert!((0.0..=3.0 + 1e-9).contains(&r.entropy_at_eq.unwrap()));
        }
    }

    #[test]
    fn config_json_uses_camel_case() {
        let cfg: ExperimentConfig = serde_json::from_str(
            r#"{"nQubits": 4, "numOperators": 2, "masterSeed": 9, "analysis": {"epsilon": 0.01}}"#,
        )
        .unwrap();
        assert_eq!(cfg.n_qubits, 4);
        assert_eq!(cfg.num_initial_conditions, 100);
        assert_eq!(cfg.analysis.window, 5);
        assert_eq!(cfg.analysis.epsilon, 0.01);
        let bad = ExperimentConfig {
            outputs: vec!["nope".into()],
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
