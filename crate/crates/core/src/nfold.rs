//! Block-structured ("brick") integer programs and an exact solver for them.
//!
//! A program has one brick per machine. Each brick holds a list of columns
//! (configurations); exactly one column per brick is selected. A column adds
//! nonnegative integer amounts to `R` demand rows. Unmet demand goes into
//! `y_p = demand_p - assigned_p`, which must satisfy `0 <= y_p <= y_upper`
//! and the slack row `sum_p w_p * y_p <= slack_rhs`. The objective is the sum
//! of the selected columns' costs.
//!
//! The exact solver is a dynamic program over bricks whose state is the
//! vector of demand-row contributions accumulated so far. States with equal
//! vectors keep only the cheapest path. A local-search mode
//! ([`solve_augmentation`]) is available for programs whose state space is
//! too large.
//!
//! # Dump format
//!
//! [`NfoldProgram::dump`] renders the full matrix as plain text, columns in
//! brick order followed by the `y` block and the slack variable `s`:
//!
//! ```text
//! nfold bricks=<B> demand_rows=<R> columns=<N>
//! objective: <cost ...> | ... | y: 0 ... 0 | s: 0
//! row <p>: <entry ...> | ... | y: <unit vector> | s: 0 = <demand_p>
//! slack: 0 ... | ... | y: <w_1 ... w_R> | s: 1 = <slack_rhs>
//! brick <b>: columns <first>..<last> sum = 1
//! bounds: x in [0,1]; y in [0,<y_upper>]; s >= 0
//! ```
//!
//! Costs are written as `num/den`; `|` marks brick boundaries.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::ops::Add;

use num::bigint::BigInt;
use num::{Integer, One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::rational::{format_rational, Rational};

pub const DEFAULT_STATE_BUDGET: usize = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NfoldError {
    #[error("program is infeasible")]
    Infeasible,
    #[error("dynamic program exceeded the state budget of {0}")]
    StateBudget(usize),
    #[error("malformed program: {0}")]
    Malformed(String),
    #[error("solution violates the program: {0}")]
    Violated(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Column {
    /// Contribution to each demand row.
    pub entries: Vec<i64>,
    pub cost: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Brick {
    pub columns: Vec<Column>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NfoldProgram {
    pub demands: Vec<i64>,
    pub slack_weights: Vec<i64>,
    pub slack_rhs: i64,
    pub y_upper: i64,
    pub bricks: Vec<Brick>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NfoldSolution {
    /// Selected column per brick.
    pub choice: Vec<usize>,
    /// `y_p` per demand row.
    pub unassigned: Vec<i64>,
    /// Value of the explicit slack variable of the slack row.
    pub slack: i64,
    pub objective: Rational,
    /// False for local-search results.
    pub exact: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    pub state_budget: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            state_budget: DEFAULT_STATE_BUDGET,
        }
    }
}

impl NfoldProgram {
    pub fn demand_rows(&self) -> usize {
        self.demands.len()
    }

    /// Number of global rows (demand rows plus the slack row).
    pub fn global_rows(&self) -> usize {
        self.demands.len() + 1
    }

    pub fn column_count(&self) -> usize {
        self.bricks.iter().map(|b| b.columns.len()).sum()
    }

    /// Largest absolute entry of the constraint matrix.
    pub fn max_entry(&self) -> i64 {
        let cols = self
            .bricks
            .iter()
            .flat_map(|b| &b.columns)
            .flat_map(|c| c.entries.iter().copied());
        cols.chain(self.slack_weights.iter().copied())
            .chain(std::iter::once(1))
            .map(i64::abs)
            .max()
            .unwrap_or(1)
    }

    pub fn check_shape(&self) -> Result<(), NfoldError> {
        let rows = self.demands.len();
        if self.slack_weights.len() != rows {
            return Err(NfoldError::Malformed(format!(
                "{} slack weights for {rows} demand rows",
                self.slack_weights.len()
            )));
        }
        if self.demands.iter().chain(&self.slack_weights).any(|&v| v < 0) || self.y_upper < 0 {
            return Err(NfoldError::Malformed("negative demand, weight or bound".into()));
        }
        for (b, brick) in self.bricks.iter().enumerate() {
            if brick.columns.is_empty() {
                return Err(NfoldError::Malformed(format!("brick {b} has no columns")));
            }
            for (c, col) in brick.columns.iter().enumerate() {
                if col.entries.len() != rows {
                    return Err(NfoldError::Malformed(format!(
                        "brick {b} column {c} has {} entries, expected {rows}",
                        col.entries.len()
                    )));
                }
                if col.entries.iter().any(|&v| v < 0) {
                    return Err(NfoldError::Malformed(format!("brick {b} column {c} has a negative entry")));
                }
            }
        }
        Ok(())
    }

    /// Evaluates a column choice against every constraint from scratch.
    pub fn evaluate(&self, choice: &[usize]) -> Result<NfoldSolution, NfoldError> {
        if choice.len() != self.bricks.len() {
            return Err(NfoldError::Violated(format!(
                "{} choices for {} bricks",
                choice.len(),
                self.bricks.len()
            )));
        }
        let rows = self.demands.len();
        let mut assigned = vec![0i64; rows];
        let mut objective = Rational::zero();
        for (b, (&c, brick)) in choice.iter().zip(&self.bricks).enumerate() {
            let col = brick
                .columns
                .get(c)
                .ok_or_else(|| NfoldError::Violated(format!("brick {b} has no column {c}")))?;
            for (a, e) in assigned.iter_mut().zip(&col.entries) {
                *a += e;
            }
            objective += &col.cost;
        }
        let mut unassigned = Vec::with_capacity(rows);
        for p in 0..rows {
            let y = self.demands[p] - assigned[p];
            if y < 0 || y > self.y_upper {
                return Err(NfoldError::Violated(format!("row {p}: y = {y} outside [0, {}]", self.y_upper)));
            }
            unassigned.push(y);
        }
        let used: i64 = unassigned.iter().zip(&self.slack_weights).map(|(y, w)| y * w).sum();
        let slack = self.slack_rhs - used;
        if slack < 0 {
            return Err(NfoldError::Violated(format!(
                "slack row: {used} exceeds {}",
                self.slack_rhs
            )));
        }
        Ok(NfoldSolution {
            choice: choice.to_vec(),
            unassigned,
            slack,
            objective,
            exact: false,
        })
    }

    /// Re-checks a solution independently of how it was produced.
    pub fn verify(&self, solution: &NfoldSolution) -> Result<(), NfoldError> {
        let fresh = self.evaluate(&solution.choice)?;
        if fresh.unassigned != solution.unassigned
            || fresh.slack != solution.slack
            || fresh.objective != solution.objective
        {
            return Err(NfoldError::Violated("recorded values disagree with the choice".into()));
        }
        Ok(())
    }

    pub fn dump(&self) -> String {
        let mut out = String::new();
        let rows = self.demands.len();
        let _ = writeln!(
            out,
            "nfold bricks={} demand_rows={rows} columns={}",
            self.bricks.len(),
            self.column_count()
        );
        let brick_cells = |f: &dyn Fn(&Column) -> String| -> String {
            self.bricks
                .iter()
                .map(|b| b.columns.iter().map(f).collect::<Vec<_>>().join(" "))
                .collect::<Vec<_>>()
                .join(" | ")
        };
        let zeros_y = vec!["0"; rows].join(" ");
        let _ = writeln!(
            out,
            "objective: {} | y: {zeros_y} | s: 0",
            brick_cells(&|c| format_rational(&c.cost))
        );
        for p in 0..rows {
            let unit: Vec<&str> = (0..rows).map(|k| if k == p { "1" } else { "0" }).collect();
            let _ = writeln!(
                out,
                "row {p}: {} | y: {} | s: 0 = {}",
                brick_cells(&|c| c.entries[p].to_string()),
                unit.join(" "),
                self.demands[p]
            );
        }
        let weights: Vec<String> = self.slack_weights.iter().map(|w| w.to_string()).collect();
        let _ = writeln!(
            out,
            "slack: {} | y: {} | s: 1 = {}",
            brick_cells(&|_| "0".to_string()),
            weights.join(" "),
            self.slack_rhs
        );
        let mut first = 0;
        for (b, brick) in self.bricks.iter().enumerate() {
            let last = first + brick.columns.len() - 1;
            let _ = writeln!(out, "brick {b}: columns {first}..{last} sum = 1");
            first = last + 1;
        }
        let _ = writeln!(out, "bounds: x in [0,1]; y in [0,{}]; s >= 0", self.y_upper);
        out
    }
}

struct State<C> {
    counts: Vec<i64>,
    cost: C,
    parent: usize,
    column: usize,
}

/// Exact minimum-cost solution.
pub fn solve_exact(program: &NfoldProgram, options: SolveOptions) -> Result<NfoldSolution, NfoldError> {
    program.check_shape()?;
    let choice = match scaled_integer_costs(program) {
        Some(costs) => dp::<i128>(program, &costs, options)?,
        None => {
            let costs: Vec<Vec<Rational>> = program
                .bricks
                .iter()
                .map(|b| b.columns.iter().map(|c| c.cost.clone()).collect())
                .collect();
            dp::<Rational>(program, &costs, options)?
        }
    };
    let mut solution = program.evaluate(&choice)?;
    solution.exact = true;
    program.verify(&solution)?;
    Ok(solution)
}

/// Costs over a common denominator, if they fit comfortably in `i128`.
fn scaled_integer_costs(program: &NfoldProgram) -> Option<Vec<Vec<i128>>> {
    let mut lcm = BigInt::one();
    for col in program.bricks.iter().flat_map(|b| &b.columns) {
        lcm = lcm.lcm(col.cost.denom());
    }
    let limit = BigInt::from(i128::MAX) / BigInt::from(4 * program.bricks.len().max(1));
    let mut out = Vec::with_capacity(program.bricks.len());
    for brick in &program.bricks {
        let mut row = Vec::with_capacity(brick.columns.len());
        for col in &brick.columns {
            let scaled = col.cost.numer() * (&lcm / col.cost.denom());
            if scaled.abs() > limit {
                return None;
            }
            row.push(scaled.to_i128()?);
        }
        out.push(row);
    }
    Some(out)
}

fn dp<C>(program: &NfoldProgram, costs: &[Vec<C>], options: SolveOptions) -> Result<Vec<usize>, NfoldError>
where
    C: Clone + Ord + Zero + for<'a> Add<&'a C, Output = C>,
{
    let rows = program.demands.len();
    let mut layers: Vec<Vec<State<C>>> = Vec::with_capacity(program.bricks.len() + 1);
    layers.push(vec![State {
        counts: vec![0; rows],
        cost: C::zero(),
        parent: usize::MAX,
        column: usize::MAX,
    }]);
    let mut stored = 1usize;
    for (b, brick) in program.bricks.iter().enumerate() {
        let prev = &layers[b];
        let mut next: Vec<State<C>> = Vec::new();
        let mut index: HashMap<Vec<i64>, usize> = HashMap::new();
        for (s, state) in prev.iter().enumerate() {
            for (c, col) in brick.columns.iter().enumerate() {
                let mut counts = state.counts.clone();
                let mut fits = true;
                for p in 0..rows {
                    counts[p] += col.entries[p];
                    if counts[p] > program.demands[p] {
                        fits = false;
                        break;
                    }
                }
                if !fits {
                    continue;
                }
                let cost = state.cost.clone() + &costs[b][c];
                match index.get(&counts) {
                    Some(&k) => {
                        if cost < next[k].cost {
                            next[k].cost = cost;
                            next[k].parent = s;
                            next[k].column = c;
                        }
                    }
                    None => {
                        stored += 1;
                        if stored > options.state_budget {
                            return Err(NfoldError::StateBudget(options.state_budget));
                        }
                        index.insert(counts.clone(), next.len());
                        next.push(State {
                            counts,
                            cost,
                            parent: s,
                            column: c,
                        });
                    }
                }
            }
        }
        if next.is_empty() {
            return Err(NfoldError::Infeasible);
        }
        layers.push(next);
    }

    let last = layers.last().expect("at least the root layer");
    let mut best: Option<usize> = None;
    for (k, state) in last.iter().enumerate() {
        let mut used = 0i64;
        let mut ok = true;
        for p in 0..rows {
            let y = program.demands[p] - state.counts[p];
            if y > program.y_upper {
                ok = false;
                break;
            }
            used += y * program.slack_weights[p];
        }
        if !ok || used > program.slack_rhs {
            continue;
        }
        if best.is_none_or(|b| state.cost < last[b].cost) {
            best = Some(k);
        }
    }
    let mut k = best.ok_or(NfoldError::Infeasible)?;
    let mut choice = vec![0usize; program.bricks.len()];
    for b in (0..program.bricks.len()).rev() {
        let state = &layers[b + 1][k];
        choice[b] = state.column;
        k = state.parent;
    }
    Ok(choice)
}

/// Local search from a feasible start: repeatedly applies the best
/// improving single-brick change or same-total pair exchange until none
/// improves. The result is flagged as not exact.
pub fn solve_augmentation(program: &NfoldProgram, initial: &NfoldSolution) -> Result<NfoldSolution, NfoldError> {
    program.check_shape()?;
    let mut current = program.evaluate(&initial.choice)?;
    // Cheapest column per distinct entry vector, per brick.
    let cheapest: Vec<HashMap<&[i64], usize>> = program
        .bricks
        .iter()
        .map(|brick| {
            let mut map: HashMap<&[i64], usize> = HashMap::new();
            for (c, col) in brick.columns.iter().enumerate() {
                map.entry(col.entries.as_slice())
                    .and_modify(|k| {
                        if col.cost < brick.columns[*k].cost {
                            *k = c;
                        }
                    })
                    .or_insert(c);
            }
            map
        })
        .collect();

    loop {
        let mut best: Option<NfoldSolution> = None;
        let better = |cand: &NfoldSolution, best: &Option<NfoldSolution>, cur: &NfoldSolution| {
            cand.objective < cur.objective && best.as_ref().is_none_or(|b| cand.objective < b.objective)
        };

        for (b, brick) in program.bricks.iter().enumerate() {
            for c in 0..brick.columns.len() {
                if c == current.choice[b] {
                    continue;
                }
                let mut choice = current.choice.clone();
                choice[b] = c;
                if let Ok(cand) = program.evaluate(&choice) {
                    if better(&cand, &best, &current) {
                        best = Some(cand);
                    }
                }
            }
        }

        if best.is_none() {
            for a in 0..program.bricks.len() {
                for b in a + 1..program.bricks.len() {
                    let ea = &program.bricks[a].columns[current.choice[a]].entries;
                    let eb = &program.bricks[b].columns[current.choice[b]].entries;
                    let total: Vec<i64> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                    for (ca, col) in program.bricks[a].columns.iter().enumerate() {
                        let rest: Vec<i64> = total.iter().zip(&col.entries).map(|(t, e)| t - e).collect();
                        if rest.iter().any(|&v| v < 0) {
                            continue;
                        }
                        let Some(&cb) = cheapest[b].get(rest.as_slice()) else {
                            continue;
                        };
                        let mut choice = current.choice.clone();
                        choice[a] = ca;
                        choice[b] = cb;
                        if let Ok(cand) = program.evaluate(&choice) {
                            if better(&cand, &best, &current) {
                                best = Some(cand);
                            }
                        }
                    }
                }
            }
        }

        match best {
            Some(next) => current = next,
            None => break,
        }
    }
    current.exact = false;
    program.verify(&current)?;
    Ok(current)
}

/// First feasible choice found by a depth-first search over bricks; a
/// starting point for [`solve_augmentation`].
pub fn first_feasible(program: &NfoldProgram) -> Result<NfoldSolution, NfoldError> {
    program.check_shape()?;
    fn go(program: &NfoldProgram, b: usize, choice: &mut Vec<usize>, counts: &mut Vec<i64>) -> bool {
        if b == program.bricks.len() {
            return program.evaluate(choice).is_ok();
        }
        for (c, col) in program.bricks[b].columns.iter().enumerate() {
            let fits = counts
                .iter()
                .zip(&col.entries)
                .zip(&program.demands)
                .all(|((have, e), d)| have + e <= *d);
            if !fits {
                continue;
            }
            for (have, e) in counts.iter_mut().zip(&col.entries) {
                *have += e;
            }
            choice.push(c);
            if go(program, b + 1, choice, counts) {
                return true;
            }
            choice.pop();
            for (have, e) in counts.iter_mut().zip(&col.entries) {
                *have -= e;
            }
        }
        false
    }
    let mut choice = Vec::with_capacity(program.bricks.len());
    let mut counts = vec![0; program.demands.len()];
    if go(program, 0, &mut choice, &mut counts) {
        program.evaluate(&choice)
    } else {
        Err(NfoldError::Infeasible)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn col(entries: &[i64], cost: i64) -> Column {
        Column {
            entries: entries.to_vec(),
            cost: int(cost),
        }
    }

    fn program(demands: &[i64], bricks: Vec<Vec<Column>>) -> NfoldProgram {
        NfoldProgram {
            demands: demands.to_vec(),
            slack_weights: vec![1; demands.len()],
            slack_rhs: 0,
            y_upper: 10,
            bricks: bricks.into_iter().map(|columns| Brick { columns }).collect(),
        }
    }

    #[test]
    fn single_brick_takes_cheapest() {
        let mut p = program(&[1], vec![vec![col(&[1], 5), col(&[1], 3)]]);
        p.slack_rhs = 5;
        let s = solve_exact(&p, SolveOptions::default()).unwrap();
        assert_eq!(s.choice, vec![1]);
        assert_eq!(s.objective, int(3));
        assert!(s.exact);
    }

    #[test]
    fn demand_forces_both_bricks() {
        let brick = vec![col(&[0], 1), col(&[1], 2)];
        let p = program(&[2], vec![brick.clone(), brick]);
        let s = solve_exact(&p, SolveOptions::default()).unwrap();
        assert_eq!(s.choice, vec![1, 1]);
        assert_eq!(s.unassigned, vec![0]);
        assert_eq!(s.objective, int(4));
    }

    #[test]
    fn slack_row_allows_leaving_demand() {
        let brick = vec![col(&[0], 1), col(&[1], 2)];
        let mut p = program(&[2], vec![brick.clone(), brick]);
        p.slack_weights = vec![3];
        p.slack_rhs = 3;
        let s = solve_exact(&p, SolveOptions::default()).unwrap();
        assert_eq!(s.objective, int(3));
        assert_eq!(s.unassigned, vec![1]);
        assert_eq!(s.slack, 0);
    }

    #[test]
    fn infeasible_and_budget() {
        let p = program(&[3], vec![vec![col(&[0], 1), col(&[1], 1)]]);
        assert_eq!(solve_exact(&p, SolveOptions::default()), Err(NfoldError::Infeasible));
        let brick = vec![col(&[0], 1), col(&[1], 1), col(&[2], 1)];
        let p = program(&[6], vec![brick.clone(), brick.clone(), brick]);
        assert_eq!(
            solve_exact(&p, SolveOptions { state_budget: 3 }),
            Err(NfoldError::StateBudget(3))
        );
    }

    #[test]
    fn y_upper_bound_is_enforced() {
        let mut p = program(&[2], vec![vec![col(&[0], 1), col(&[1], 5)]]);
        p.slack_rhs = 100;
        p.y_upper = 1;
        let s = solve_exact(&p, SolveOptions::default()).unwrap();
        assert_eq!(s.choice, vec![1]);
    }

    #[test]
    fn malformed_programs_are_rejected() {
        let p = program(&[1], vec![vec![col(&[1, 0], 1)]]);
        assert!(matches!(solve_exact(&p, SolveOptions::default()), Err(NfoldError::Malformed(_))));
        let p = program(&[1], vec![vec![]]);
        assert!(matches!(solve_exact(&p, SolveOptions::default()), Err(NfoldError::Malformed(_))));
    }

    #[test]
    fn verify_catches_tampering() {
        let brick = vec![col(&[0], 1), col(&[1], 2)];
        let p = program(&[1], vec![brick.clone(), brick]);
        let mut s = solve_exact(&p, SolveOptions::default()).unwrap();
        s.objective = int(0);
        assert!(p.verify(&s).is_err());
    }

    #[test]
    fn augmentation_fixed_point_and_improvement() {
        let brick = vec![col(&[0], 1), col(&[1], 2), col(&[1], 7)];
        let p = program(&[1], vec![brick.clone(), brick]);
        let opt = solve_exact(&p, SolveOptions::default()).unwrap();
        let same = solve_augmentation(&p, &opt).unwrap();
        assert_eq!(same.choice, opt.choice);
        assert!(!same.exact);

        let start = p.evaluate(&[2, 0]).unwrap();
        let better = solve_augmentation(&p, &start).unwrap();
        assert!(better.objective < start.objective);
        assert_eq!(better.objective, int(3));
    }

    #[test]
    fn augmentation_uses_pair_exchange() {
        // Moving the unit from brick 0 to brick 1 needs both bricks to change.
        let p = program(
            &[1],
            vec![
                vec![col(&[0], 10), col(&[1], 11)],
                vec![col(&[0], 5), col(&[1], 5)],
            ],
        );
        let start = p.evaluate(&[1, 0]).unwrap();
        let s = solve_augmentation(&p, &start).unwrap();
        assert_eq!(s.choice, vec![0, 1]);
        assert_eq!(s.objective, int(15));
    }

    #[test]
    fn first_feasible_finds_a_start() {
        let brick = vec![col(&[0], 1), col(&[1], 2)];
        let p = program(&[2], vec![brick.clone(), brick]);
        assert_eq!(first_feasible(&p).unwrap().choice, vec![1, 1]);
    }

    #[test]
    fn dump_lists_every_part() {
        let brick = vec![col(&[0], 1), col(&[1], 2)];
        let p = program(&[2], vec![brick.clone(), brick]);
        let text = p.dump();
        assert!(text.starts_with("nfold bricks=2 demand_rows=1 columns=4\n"));
        assert!(text.contains("objective: 1/1 2/1 | 1/1 2/1 | y: 0 | s: 0"));
        assert!(text.contains("row 0: 0 1 | 0 1 | y: 1 | s: 0 = 2"));
        assert!(text.contains("slack: 0 0 | 0 0 | y: 1 | s: 1 = 0"));
        assert!(text.contains("brick 1: columns 2..3 sum = 1"));
        assert!(text.contains("bounds: x in [0,1]; y in [0,10]; s >= 0"));
    }

    #[test]
    fn big_costs_fall_back_to_rationals() {
        let huge = Rational::new(BigInt::from(1) << 200u32, BigInt::from(3));
        let p = NfoldProgram {
            demands: vec![1],
            slack_weights: vec![1],
            slack_rhs: 0,
            y_upper: 1,
            bricks: vec![Brick {
                columns: vec![
                    Column { entries: vec![1], cost: huge.clone() },
                    Column { entries: vec![1], cost: &huge + int(1) },
                ],
            }],
        };
        assert!(scaled_integer_costs(&p).is_none());
        assert_eq!(solve_exact(&p, SolveOptions::default()).unwrap().objective, huge);
    }
}
