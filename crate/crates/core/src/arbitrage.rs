//! Currency-cycle arbitrage as a QUBO over directed edges.
//!
//! One binary variable per quoted rate. With `c_ij` the units of `j` bought by
//! one unit of `i`, the energy is
//!
//! ```text
//! −Σ x_ij·ln c_ij  +  M₁·Σ_v (out_v − in_v)²  +  M₂·Σ_v Σ_{j<k} 2·x_vj·x_vk
//! ```
//!
//! so feasible selections (flow-conserving, at most one exit per vertex) are
//! unions of vertex-disjoint simple cycles scored by their total log-profit.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{ensure_capacity, param, Error, Result};
use crate::qubo::{BinaryQuadraticModel, Bitstring};
use crate::scalar::Real;

/// Vertex budget for cycle enumeration oracles.
pub const CYCLE_ENUMERATION_MAX_VERTICES: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct CurrencyGraph<T> {
    assets: Vec<String>,
    rates: BTreeMap<(usize, usize), T>,
}

impl<T: Real> CurrencyGraph<T> {
    pub fn new(assets: Vec<String>) -> Result<Self> {
        let unique: BTreeSet<&String> = assets.iter().collect();
        if unique.len() != assets.len() {
            return Err(param("asset names must be unique"));
        }
        Ok(Self {
            assets,
            rates: BTreeMap::new(),
        })
    }

    /// Builds a graph from `(from, to, rate)` quotes, registering assets in
    /// first-seen order.
    pub fn from_quotes<'a>(quotes: impl IntoIterator<Item = (&'a str, &'a str, T)>) -> Result<Self> {
        let mut g = Self::new(Vec::new())?;
        for (from, to, rate) in quotes {
            let i = g.intern(from);
            let j = g.intern(to);
            g.add_rate(i, j, rate)?;
        }
        Ok(g)
    }

    fn intern(&mut self, name: &str) -> usize {
        match self.assets.iter().position(|a| a == name) {
            Some(i) => i,
            None => {
                self.assets.push(name.to_string());
                self.assets.len() - 1
            }
        }
    }

    pub fn add_rate(&mut self, from: usize, to: usize, rate: T) -> Result<()> {
        let n = self.assets.len();
        if from >= n || to >= n {
            return Err(param(format!("edge ({from}, {to}) outside {n} assets")));
        }
        if from == to {
            return Err(param(format!("self-loop on {}", self.assets[from])));
        }
        if !(rate > T::zero() && rate.is_finite()) {
            return Err(param(format!(
                "rate {} -> {} must be positive and finite, got {rate}",
                self.assets[from], self.assets[to]
            )));
        }
        if self.rates.insert((from, to), rate).is_some() {
            return Err(param(format!(
                "duplicate quote {} -> {}",
                self.assets[from], self.assets[to]
            )));
        }
        Ok(())
    }

    pub fn assets(&self) -> &[String] {
        &self.assets
    }

    pub fn num_assets(&self) -> usize {
        self.assets.len()
    }

    pub fn num_edges(&self) -> usize {
        self.rates.len()
    }

    pub fn rate(&self, from: usize, to: usize) -> Option<T> {
        self.rates.get(&(from, to)).copied()
    }

    /// Edges in `(from, to)` order; position = QUBO variable index.
    pub fn edges(&self) -> Vec<(usize, usize, T)> {
        self.rates.iter().map(|(&(i, j), &c)| (i, j, c)).collect()
    }

    /// Log-profit of a closed walk `v₀ → v₁ → … → v₀`.
    pub fn cycle_log_profit(&self, cycle: &[usize]) -> Option<T> {
        let mut total = T::zero();
        for (k, &v) in cycle.iter().enumerate() {
            let w = cycle[(k + 1) % cycle.len()];
            total += self.rate(v, w)?.ln();
        }
        Some(total)
    }
}

/// Default for both penalties: twice the summed |ln c|, or 1 if every rate is 1.
pub fn default_arbitrage_penalty<T: Real>(graph: &CurrencyGraph<T>) -> T {
    let s = graph.rates.values().fold(T::zero(), |acc, c| acc + c.ln().abs());
    if s.is_zero() {
        T::one()
    } else {
        T::two() * s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArbitrageQubo<T> {
    pub model: BinaryQuadraticModel<T>,
    /// `edges[k]` is the `(from, to)` pair behind variable `k`.
    pub edges: Vec<(usize, usize)>,
    pub flow_penalty: T,
    pub exit_penalty: T,
}

fn resolve_penalty<T: Real>(given: Option<T>, default: T, what: &str) -> Result<T> {
    match given {
        None => Ok(default),
        Some(m) if m > T::zero() && m.is_finite() => Ok(m),
        Some(m) => Err(param(format!("{what} penalty must be positive, got {m}"))),
    }
}

pub fn build_arbitrage_qubo<T: Real>(
    graph: &CurrencyGraph<T>,
    flow_penalty: Option<T>,
    exit_penalty: Option<T>,
) -> Result<ArbitrageQubo<T>> {
    let default = default_arbitrage_penalty(graph);
    let m1 = resolve_penalty(flow_penalty, default, "flow")?;
    let m2 = resolve_penalty(exit_penalty, default, "exit")?;
    let edges = graph.edges();
    let mut model = BinaryQuadraticModel::new(edges.len());
    for (k, &(_, _, c)) in edges.iter().enumerate() {
        model.add_linear(k, -c.ln())?;
    }
    for v in 0..graph.num_assets() {
        let mut balance = Vec::new();
        let mut exits = Vec::new();
        for (k, &(i, j, _)) in edges.iter().enumerate() {
            if i == v {
                balance.push((k, T::one()));
                exits.push(k);
            }
            if j == v {
                balance.push((k, -T::one()));
            }
        }
        if !balance.is_empty() {
            model.add_equality_penalty(&balance, T::zero(), m1)?;
        }
        for (a, &p) in exits.iter().enumerate() {
            for &q in &exits[a + 1..] {
                model.add_quadratic(p, q, T::two() * m2)?;
            }
        }
    }
    Ok(ArbitrageQubo {
        model,
        edges: edges.iter().map(|&(i, j, _)| (i, j)).collect(),
        flow_penalty: m1,
        exit_penalty: m2,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cycle<T> {
    /// Starts at the smallest vertex index.
    pub vertices: Vec<usize>,
    pub log_profit: T,
}

impl<T: Real> Cycle<T> {
    pub fn profit_factor(&self) -> T {
        self.log_profit.exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArbitrageSolution<T> {
    pub feasible: bool,
    /// Selected `(from, to)` pairs, sorted.
    pub edges_used: Vec<(usize, usize)>,
    /// Every cycle of the selection, ordered by starting vertex.
    pub cycles: Vec<Cycle<T>>,
    /// Most profitable cycle (empty if none).
    pub best_cycle: Vec<usize>,
    pub best_log_profit: T,
    /// Summed over all cycles.
    pub total_log_profit: T,
}

impl<T: Real> ArbitrageSolution<T> {
    fn empty() -> Self {
        Self {
            feasible: true,
            edges_used: Vec::new(),
            cycles: Vec::new(),
            best_cycle: Vec::new(),
            best_log_profit: T::zero(),
            total_log_profit: T::zero(),
        }
    }

    fn from_cycles(cycles: Vec<Cycle<T>>, feasible: bool, edges_used: Option<Vec<(usize, usize)>>) -> Self {
        let edges_used = edges_used.unwrap_or_else(|| {
            let mut e: Vec<(usize, usize)> = cycles
                .iter()
                .flat_map(|c| {
                    let v = &c.vertices;
                    (0..v.len()).map(move |k| (v[k], v[(k + 1) % v.len()]))
                })
                .collect();
            e.sort_unstable();
            e
        });
        let total = cycles.iter().fold(T::zero(), |acc, c| acc + c.log_profit);
        let best = cycles.iter().fold(None::<&Cycle<T>>, |acc, c| match acc {
            Some(b) if b.log_profit >= c.log_profit => Some(b),
            _ => Some(c),
        });
        Self {
            feasible,
            edges_used,
            best_cycle: best.map(|c| c.vertices.clone()).unwrap_or_default(),
            best_log_profit: best.map_or(T::zero(), |c| c.log_profit),
            total_log_profit: total,
            cycles,
        }
    }

    pub fn profit_factor(&self) -> T {
        self.best_log_profit.exp()
    }
}

fn rotate_to_min(mut cycle: Vec<usize>) -> Vec<usize> {
    if let Some(pos) = cycle.iter().enumerate().min_by_key(|(_, v)| **v).map(|(p, _)| p) {
        cycle.rotate_left(pos);
    }
    cycle
}

/// Reads the selected edges of a bitstring as cycles.
///
/// `feasible` is false when some vertex has two exits or unbalanced flow;
/// cycles are then extracted from the well-formed part only.
pub fn decode_cycles<T: Real>(graph: &CurrencyGraph<T>, edges: &[(usize, usize)], x: &Bitstring) -> Result<ArbitrageSolution<T>> {
    if x.len() != edges.len() {
        return Err(Error::Dimension {
            expected: edges.len(),
            actual: x.len(),
        });
    }
    let n = graph.num_assets();
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut in_deg = vec![0usize; n];
    for (k, &(i, j)) in edges.iter().enumerate() {
        if x.get(k) == 1 {
            out[i].push(j);
            in_deg[j] += 1;
        }
    }
    let feasible = (0..n).all(|v| out[v].len() <= 1 && out[v].len() == in_deg[v]);

    let mut cycles = Vec::new();
    let mut done = vec![false; n];
    for start in 0..n {
        if done[start] || out[start].len() != 1 {
            continue;
        }
        let mut path = vec![start];
        let mut seen = BTreeSet::from([start]);
        let mut v = start;
        let closed = loop {
            match out[v].as_slice() {
                [w] if *w == start => break true,
                [w] if !seen.contains(w) && !done[*w] => {
                    v = *w;
                    path.push(v);
                    seen.insert(v);
                }
                _ => break false,
            }
        };
        if closed {
            for &p in &path {
                done[p] = true;
            }
            let log_profit = graph.cycle_log_profit(&path).expect("edges come from the graph");
            cycles.push(Cycle {
                vertices: rotate_to_min(path),
                log_profit,
            });
        }
    }
    cycles.sort_by(|a, b| a.vertices.cmp(&b.vertices));
    let used = edges
        .iter()
        .enumerate()
        .filter(|(k, _)| x.get(*k) == 1)
        .map(|(_, &e)| e)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    Ok(ArbitrageSolution::from_cycles(cycles, feasible, Some(used)))
}

/// All simple directed cycles, each starting at its smallest vertex.
pub fn simple_cycles<T: Real>(graph: &CurrencyGraph<T>) -> Result<Vec<Cycle<T>>> {
    let n = graph.num_assets();
    ensure_capacity("assets", n, CYCLE_ENUMERATION_MAX_VERTICES)?;
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, j, _) in graph.edges() {
        succ[i].push(j);
    }
    let mut cycles = Vec::new();
    for start in 0..n {
        let mut path = vec![start];
        extend_paths(graph, &succ, start, &mut path, &mut cycles);
    }
    Ok(cycles)
}

fn extend_paths<T: Real>(
    graph: &CurrencyGraph<T>,
    succ: &[Vec<usize>],
    start: usize,
    path: &mut Vec<usize>,
    out: &mut Vec<Cycle<T>>,
) {
    let v = *path.last().expect("non-empty path");
    for &w in &succ[v] {
        if w == start {
            out.push(Cycle {
                vertices: path.clone(),
                log_profit: graph.cycle_log_profit(path).expect("edges exist"),
            });
        } else if w > start && !path.contains(&w) {
            path.push(w);
            extend_paths(graph, succ, start, path, out);
            path.pop();
        }
    }
}

/// Exhaustive oracle for the single most profitable cycle.
///
/// Ties go to the lexicographically smallest vertex sequence. The solution is
/// empty when no cycle has positive log-profit.
pub fn enumerate_best_cycle<T: Real>(graph: &CurrencyGraph<T>) -> Result<ArbitrageSolution<T>> {
    let mut cycles = simple_cycles(graph)?;
    cycles.retain(|c| c.log_profit > T::zero());
    cycles.sort_by(|a, b| a.vertices.cmp(&b.vertices));
    let best = cycles.into_iter().fold(None::<Cycle<T>>, |acc, c| match acc {
        Some(b) if b.log_profit >= c.log_profit => Some(b),
        _ => Some(c),
    });
    Ok(match best {
        Some(c) => ArbitrageSolution::from_cycles(vec![c], true, None),
        None => ArbitrageSolution::empty(),
    })
}

/// Exhaustive oracle for the QUBO's own optimum: the vertex-disjoint set of
/// cycles with the largest summed log-profit.
pub fn enumerate_best_packing<T: Real>(graph: &CurrencyGraph<T>) -> Result<ArbitrageSolution<T>> {
    let n = graph.num_assets();
    let cycles: Vec<(u32, Cycle<T>)> = simple_cycles(graph)?
        .into_iter()
        .filter(|c| c.log_profit > T::zero())
        .map(|c| (c.vertices.iter().fold(0u32, |m, &v| m | (1 << v)), c))
        .collect();
    let full = (1usize << n) - 1;
    // best[mask]: optimal packing using only vertices in mask.
    let mut best: Vec<(T, Vec<usize>)> = vec![(T::zero(), Vec::new()); full + 1];
    for mask in 1..=full {
        let low = mask.trailing_zeros();
        let mut choice = best[mask & !(1 << low)].clone();
        for (k, (cm, c)) in cycles.iter().enumerate() {
            let cm = *cm as usize;
            if cm & (1 << low) != 0 && cm & !mask == 0 {
                let rest = &best[mask & !cm];
                let value = rest.0 + c.log_profit;
                if value > choice.0 {
                    let mut picks = rest.1.clone();
                    picks.push(k);
                    choice = (value, picks);
                }
            }
        }
        best[mask] = choice;
    }
    let mut chosen: Vec<Cycle<T>> = best[full].1.iter().map(|&k| cycles[k].1.clone()).collect();
    chosen.sort_by(|a, b| a.vertices.cmp(&b.vertices));
    Ok(ArbitrageSolution::from_cycles(chosen, true, None))
}
