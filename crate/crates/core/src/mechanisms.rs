//! Deterministic allocation procedures with replayable step traces.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{Allocation, GoodSet, Instance, Valuation, ValuationKind};
use crate::value::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MechanismId {
    GreedyRoundRobin,
    EnvyCycleElimination,
    Rsd,
    Sd,
}

impl MechanismId {
    pub const ALL: [MechanismId; 4] = [
        MechanismId::GreedyRoundRobin,
        MechanismId::EnvyCycleElimination,
        MechanismId::Rsd,
        MechanismId::Sd,
    ];

    pub fn key(self) -> &'static str {
        match self {
            MechanismId::GreedyRoundRobin => "greedy-rr",
            MechanismId::EnvyCycleElimination => "envy-cycle",
            MechanismId::Rsd => "rsd",
            MechanismId::Sd => "sd",
        }
    }
}

impl fmt::Display for MechanismId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for MechanismId {
    type Err = Error;

    fn from_str(s: &str) -> Result<MechanismId> {
        MechanismId::ALL
            .into_iter()
            .find(|m| m.key() == s)
            .ok_or_else(|| Error::Parse(format!("unknown mechanism `{s}`")))
    }
}

/// Resolution of ties between equally valued goods.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum GoodTieBreak {
    #[default]
    LowestIndex,
    HighestIndex,
}

impl GoodTieBreak {
    pub const ALL: [GoodTieBreak; 2] = [GoodTieBreak::LowestIndex, GoodTieBreak::HighestIndex];

    pub fn key(self) -> &'static str {
        match self {
            GoodTieBreak::LowestIndex => "lowest",
            GoodTieBreak::HighestIndex => "highest",
        }
    }
}

impl FromStr for GoodTieBreak {
    type Err = Error;

    fn from_str(s: &str) -> Result<GoodTieBreak> {
        GoodTieBreak::ALL
            .into_iter()
            .find(|t| t.key() == s)
            .ok_or_else(|| Error::Parse(format!("unknown tie-break `{s}`")))
    }
}

/// Choice among several unenvied agents in the envy graph.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum SourceTieBreak {
    #[default]
    LowestIndex,
    HighestIndex,
    /// Smallest own-bundle value under the agent's report, then lowest index.
    LeastBundleValue,
}

impl SourceTieBreak {
    pub const ALL: [SourceTieBreak; 3] = [
        SourceTieBreak::LowestIndex,
        SourceTieBreak::HighestIndex,
        SourceTieBreak::LeastBundleValue,
    ];

    pub fn key(self) -> &'static str {
        match self {
            SourceTieBreak::LowestIndex => "lowest",
            SourceTieBreak::HighestIndex => "highest",
            SourceTieBreak::LeastBundleValue => "least-value",
        }
    }
}

impl FromStr for SourceTieBreak {
    type Err = Error;

    fn from_str(s: &str) -> Result<SourceTieBreak> {
        SourceTieBreak::ALL
            .into_iter()
            .find(|t| t.key() == s)
            .ok_or_else(|| Error::Parse(format!("unknown source tie-break `{s}`")))
    }
}

/// Everything that makes a mechanism run deterministic.
///
/// `None` orders mean identity. `source_tie_overrides` replaces the source
/// rule while a specific good is being handed out; it exists so that every
/// branch of the envy-cycle procedure stays reachable from configuration.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MechanismConfig {
    pub agent_order: Option<Vec<usize>>,
    pub item_order: Option<Vec<usize>>,
    pub good_tie_break: GoodTieBreak,
    pub source_tie_break: SourceTieBreak,
    pub source_tie_overrides: BTreeMap<usize, SourceTieBreak>,
}

fn resolve_permutation(order: &Option<Vec<usize>>, len: usize, what: &str) -> Result<Vec<usize>> {
    match order {
        None => Ok((0..len).collect()),
        Some(order) => {
            let mut seen = vec![false; len];
            let is_bijection = order.len() == len
                && order.iter().all(|&x| x < len && !std::mem::replace(&mut seen[x], true));
            if is_bijection {
                Ok(order.clone())
            } else {
                Err(Error::Config(format!("{what} {order:?} is not a permutation of 0..{len}")))
            }
        }
    }
}

impl MechanismConfig {
    pub fn agent_order(&self, agents: usize) -> Result<Vec<usize>> {
        resolve_permutation(&self.agent_order, agents, "agent order")
    }

    pub fn item_order(&self, goods: usize) -> Result<Vec<usize>> {
        resolve_permutation(&self.item_order, goods, "item order")
    }

    fn validate(&self, instance: &Instance) -> Result<()> {
        self.agent_order(instance.agents())?;
        self.item_order(instance.goods_count())?;
        if let Some(good) = self.source_tie_overrides.keys().find(|&&g| g >= instance.goods_count()) {
            return Err(Error::Config(format!("tie-break override for unknown good index {good}")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepAction {
    /// `agent` receives `goods`.
    Pick { agent: usize, goods: GoodSet },
    /// `agent` had its turn and received nothing.
    Pass { agent: usize },
    /// Each agent in the cycle takes the bundle of its successor.
    Rotate { cycle: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub action: StepAction,
    pub bundles: Vec<GoodSet>,
    /// Envy edges `(envious, envied)` after the step; only the envy-cycle procedure records them.
    pub envy_edges: Option<Vec<(usize, usize)>>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Trace {
    pub steps: Vec<TraceStep>,
}

impl Trace {
    /// Applies the actions alone, starting from empty bundles.
    pub fn replay(&self, agents: usize) -> Allocation {
        let mut bundles = vec![GoodSet::EMPTY; agents];
        for step in &self.steps {
            apply(&mut bundles, &step.action);
        }
        Allocation::new(bundles)
    }

    /// True when replaying reproduces every recorded intermediate state and `allocation`.
    pub fn replays_to(&self, allocation: &Allocation) -> bool {
        let mut bundles = vec![GoodSet::EMPTY; allocation.agents()];
        for step in &self.steps {
            apply(&mut bundles, &step.action);
            if bundles != step.bundles {
                return false;
            }
        }
        bundles == allocation.bundles()
    }
}

fn apply(bundles: &mut [GoodSet], action: &StepAction) {
    match action {
        StepAction::Pick { agent, goods } => bundles[*agent] = bundles[*agent].union(*goods),
        StepAction::Pass { .. } => {}
        StepAction::Rotate { cycle } => {
            let taken: Vec<GoodSet> = cycle
                .iter()
                .enumerate()
                .map(|(k, _)| bundles[cycle[(k + 1) % cycle.len()]])
                .collect();
            for (agent, bundle) in cycle.iter().zip(taken) {
                bundles[*agent] = bundle;
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MechanismOutcome {
    pub allocation: Allocation,
    pub trace: Trace,
}

/// Collects trace steps when enabled; a no-op otherwise.
struct Recorder(Option<Trace>);

impl Recorder {
    fn push(&mut self, action: StepAction, bundles: &[GoodSet], envy_edges: Option<Vec<(usize, usize)>>) {
        if let Some(trace) = &mut self.0 {
            trace.steps.push(TraceStep {
                action,
                bundles: bundles.to_vec(),
                envy_edges,
            });
        }
    }

    fn enabled(&self) -> bool {
        self.0.is_some()
    }

    fn finish(self, bundles: Vec<GoodSet>) -> MechanismOutcome {
        MechanismOutcome {
            allocation: Allocation::new(bundles),
            trace: self.0.unwrap_or_default(),
        }
    }
}

fn additive_rows(instance: &Instance, mechanism: MechanismId) -> Result<Vec<&[Value]>> {
    instance
        .valuations()
        .iter()
        .enumerate()
        .map(|(agent, v)| match v {
            Valuation::Additive(values) => Ok(values.as_slice()),
            other => Err(Error::Restriction {
                mechanism,
                agent,
                expected: ValuationKind::Additive.as_str(),
                found: other.kind().as_str(),
            }),
        })
        .collect()
}

/// Most valuable remaining good; `None` when nothing remains.
fn best_good(values: &[Value], remaining: GoodSet, tie: GoodTieBreak) -> Option<usize> {
    let mut best: Option<(usize, Value)> = None;
    for good in remaining.iter() {
        let value = values[good];
        let better = match (best, tie) {
            (None, _) => true,
            (Some((_, b)), GoodTieBreak::LowestIndex) => value > b,
            (Some((_, b)), GoodTieBreak::HighestIndex) => value >= b,
        };
        if better {
            best = Some((good, value));
        }
    }
    best.map(|(g, _)| g)
}

/// Agents take turns in `agent_order`, each taking its most valuable remaining good.
pub fn greedy_round_robin(instance: &Instance, config: &MechanismConfig) -> Result<MechanismOutcome> {
    greedy_impl(instance, config, Recorder(Some(Trace::default())))
}

fn greedy_impl(instance: &Instance, config: &MechanismConfig, mut rec: Recorder) -> Result<MechanismOutcome> {
    let rows = additive_rows(instance, MechanismId::GreedyRoundRobin)?;
    config.validate(instance)?;
    let order = config.agent_order(instance.agents())?;
    let mut bundles = vec![GoodSet::EMPTY; instance.agents()];
    let mut remaining = instance.all_goods();
    for &agent in order.iter().cycle() {
        let Some(good) = best_good(rows[agent], remaining, config.good_tie_break) else {
            break;
        };
        remaining.remove(good);
        bundles[agent].insert(good);
        rec.push(StepAction::Pick { agent, goods: GoodSet::singleton(good) }, &bundles, None);
    }
    Ok(rec.finish(bundles))
}

/// Repeated serial dictatorship: a fixed agent order cycled with `i = (i + 1) mod n`,
/// each turn taking an argmax of the remaining goods.
pub fn rsd(instance: &Instance, config: &MechanismConfig) -> Result<MechanismOutcome> {
    rsd_impl(instance, config, Recorder(Some(Trace::default())))
}

fn rsd_impl(instance: &Instance, config: &MechanismConfig, mut rec: Recorder) -> Result<MechanismOutcome> {
    let rows = additive_rows(instance, MechanismId::Rsd)?;
    config.validate(instance)?;
    let n = instance.agents();
    let order = config.agent_order(n)?;
    let mut bundles = vec![GoodSet::EMPTY; n];
    let mut remaining = instance.all_goods();
    let mut turn = 0;
    while !remaining.is_empty() {
        let agent = order[turn];
        let x = best_good(rows[agent], remaining, config.good_tie_break).expect("remaining is nonempty");
        bundles[agent].insert(x);
        remaining.remove(x);
        rec.push(StepAction::Pick { agent, goods: GoodSet::singleton(x) }, &bundles, None);
        turn = (turn + 1) % n;
    }
    Ok(rec.finish(bundles))
}

/// Adjacency matrix of strict envy under the reported valuations.
fn envy_graph(instance: &Instance, bundles: &[GoodSet]) -> Vec<Vec<bool>> {
    let n = bundles.len();
    (0..n)
        .map(|i| {
            let own = instance.value(i, bundles[i]);
            (0..n).map(|j| j != i && own < instance.value(i, bundles[j])).collect()
        })
        .collect()
}

fn edge_list(graph: &[Vec<bool>]) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for (i, row) in graph.iter().enumerate() {
        for (j, &e) in row.iter().enumerate() {
            if e {
                edges.push((i, j));
            }
        }
    }
    edges
}

/// First cycle met by depth-first search, starting from the lowest-index agent
/// and visiting successors in index order. The cycle is listed along its edges.
fn find_cycle(graph: &[Vec<bool>]) -> Option<Vec<usize>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        OnPath,
        Done,
    }

    fn visit(u: usize, graph: &[Vec<bool>], marks: &mut [Mark], path: &mut Vec<usize>) -> Option<Vec<usize>> {
        marks[u] = Mark::OnPath;
        path.push(u);
        for v in 0..graph.len() {
            if !graph[u][v] {
                continue;
            }
            match marks[v] {
                Mark::OnPath => {
                    let start = path.iter().position(|&x| x == v).expect("v is on the path");
                    return Some(path[start..].to_vec());
                }
                Mark::New => {
                    if let Some(cycle) = visit(v, graph, marks, path) {
                        return Some(cycle);
                    }
                }
                Mark::Done => {}
            }
        }
        marks[u] = Mark::Done;
        path.pop();
        None
    }

    let mut marks = vec![Mark::New; graph.len()];
    for start in 0..graph.len() {
        if marks[start] == Mark::New {
            if let Some(cycle) = visit(start, graph, &mut marks, &mut Vec::new()) {
                return Some(cycle);
            }
        }
    }
    None
}

/// Envy-cycle elimination: goods go out in `item_order`, each to an agent nobody
/// envies; when every agent is envied, bundles are rotated along an envy cycle first.
pub fn envy_cycle_elimination(instance: &Instance, config: &MechanismConfig) -> Result<MechanismOutcome> {
    envy_cycle_impl(instance, config, Recorder(Some(Trace::default())))
}

fn envy_cycle_impl(instance: &Instance, config: &MechanismConfig, mut rec: Recorder) -> Result<MechanismOutcome> {
    config.validate(instance)?;
    let n = instance.agents();
    let items = config.item_order(instance.goods_count())?;
    let mut bundles = vec![GoodSet::EMPTY; n];
    for good in items {
        let sources = loop {
            let graph = envy_graph(instance, &bundles);
            let sources: Vec<usize> = (0..n).filter(|&j| (0..n).all(|i| !graph[i][j])).collect();
            if !sources.is_empty() {
                break sources;
            }
            let cycle = find_cycle(&graph).expect("a graph where every vertex is envied has a cycle");
            let action = StepAction::Rotate { cycle };
            apply(&mut bundles, &action);
            let edges = rec.enabled().then(|| edge_list(&envy_graph(instance, &bundles)));
            rec.push(action, &bundles, edges);
        };
        let rule = config
            .source_tie_overrides
            .get(&good)
            .copied()
            .unwrap_or(config.source_tie_break);
        let agent = match rule {
            SourceTieBreak::LowestIndex => sources[0],
            SourceTieBreak::HighestIndex => *sources.last().expect("nonempty"),
            SourceTieBreak::LeastBundleValue => *sources
                .iter()
                .min_by_key(|&&i| (instance.value(i, bundles[i]), i))
                .expect("nonempty"),
        };
        bundles[agent].insert(good);
        let edges = rec.enabled().then(|| edge_list(&envy_graph(instance, &bundles)));
        rec.push(StepAction::Pick { agent, goods: GoodSet::singleton(good) }, &bundles, edges);
    }
    Ok(rec.finish(bundles))
}

/// Serial dictatorship for single-minded agents.
///
/// Agents are scanned by ascending desired-bundle size (ties by index); each
/// receives its bundle when every good in it is still available. Goods left
/// after the scan go to the last agent of the scan.
pub fn sd(instance: &Instance) -> Result<MechanismOutcome> {
    sd_impl(instance, Recorder(Some(Trace::default())))
}

fn sd_impl(instance: &Instance, mut rec: Recorder) -> Result<MechanismOutcome> {
    let desired: Vec<GoodSet> = instance
        .valuations()
        .iter()
        .enumerate()
        .map(|(agent, v)| match v {
            Valuation::SingleMinded { bundle, .. } => Ok(*bundle),
            other => Err(Error::Restriction {
                mechanism: MechanismId::Sd,
                agent,
                expected: ValuationKind::SingleMinded.as_str(),
                found: other.kind().as_str(),
            }),
        })
        .collect::<Result<_>>()?;
    let n = instance.agents();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (desired[i].len(), i));

    let mut bundles = vec![GoodSet::EMPTY; n];
    let mut remaining = instance.all_goods();
    for &agent in &order {
        if desired[agent].is_subset(remaining) {
            bundles[agent] = desired[agent];
            remaining = remaining.difference(desired[agent]);
            rec.push(StepAction::Pick { agent, goods: desired[agent] }, &bundles, None);
        } else {
            rec.push(StepAction::Pass { agent }, &bundles, None);
        }
    }
    if !remaining.is_empty() {
        let last = *order.last().expect("at least one agent");
        bundles[last] = bundles[last].union(remaining);
        rec.push(StepAction::Pick { agent: last, goods: remaining }, &bundles, None);
    }
    Ok(rec.finish(bundles))
}

/// Runs `mechanism` on the reported profile, with its full trace.
pub fn run(mechanism: MechanismId, reported: &Instance, config: &MechanismConfig) -> Result<MechanismOutcome> {
    dispatch(mechanism, reported, config, Recorder(Some(Trace::default())))
}

/// Like [`run`] without building a trace; the hot path of manipulation search.
pub fn allocate(mechanism: MechanismId, reported: &Instance, config: &MechanismConfig) -> Result<Allocation> {
    dispatch(mechanism, reported, config, Recorder(None)).map(|o| o.allocation)
}

fn dispatch(
    mechanism: MechanismId,
    reported: &Instance,
    config: &MechanismConfig,
    rec: Recorder,
) -> Result<MechanismOutcome> {
    match mechanism {
        MechanismId::GreedyRoundRobin => greedy_impl(reported, config, rec),
        MechanismId::EnvyCycleElimination => envy_cycle_impl(reported, config, rec),
        MechanismId::Rsd => rsd_impl(reported, config, rec),
        MechanismId::Sd => sd_impl(reported, rec),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fairness::{is_ef1, is_efx, is_proportional};

    fn set(inst: &Instance, labels: &str) -> GoodSet {
        let labels: Vec<String> = labels.chars().map(String::from).collect();
        inst.bundle(&labels).unwrap()
    }

    fn order(agents: &[usize]) -> MechanismConfig {
        MechanismConfig {
            agent_order: Some(agents.iter().map(|a| a - 1).collect()),
            ..Default::default()
        }
    }

    fn table4(row1: &[u32], row2: &[u32]) -> Instance {
        Instance::additive(&["a", "b", "c", "d", "e"], &[row1, row2]).unwrap()
    }

    fn sm(goods: &str, wants: &[&str]) -> Instance {
        let labels: Vec<String> = goods.chars().map(String::from).collect();
        let probe = Instance::new_unvalidated(labels.clone(), vec![]);
        let valuations = wants
            .iter()
            .map(|w| Valuation::SingleMinded { bundle: set(&probe, w), value: Value::from(1) })
            .collect();
        Instance::new(labels, valuations).unwrap()
    }

    #[test]
    fn greedy_reproduces_table_4() {
        let truthful = table4(&[12, 10, 8, 6, 1], &[1, 10, 8, 6, 9]);
        let out = greedy_round_robin(&truthful, &order(&[1, 2])).unwrap();
        assert_eq!(out.allocation.bundles(), &[set(&truthful, "acd"), set(&truthful, "be")]);
        let out = greedy_round_robin(&truthful, &order(&[2, 1])).unwrap();
        assert_eq!(out.allocation.bundles(), &[set(&truthful, "ac"), set(&truthful, "bde")]);

        let lie1 = table4(&[10, 12, 8, 6, 1], &[1, 10, 8, 6, 9]);
        let out = greedy_round_robin(&lie1, &order(&[1, 2])).unwrap();
        assert_eq!(out.allocation.bundles(), &[set(&lie1, "abd"), set(&lie1, "ce")]);

        let lie2 = table4(&[12, 10, 8, 6, 1], &[1, 10, 8, 8, 5]);
        let out = greedy_round_robin(&lie2, &order(&[2, 1])).unwrap();
        assert_eq!(out.allocation.bundles(), &[set(&lie2, "ad"), set(&lie2, "bce")]);
        assert!(out.trace.replays_to(&out.allocation));
    }

    #[test]
    fn greedy_rejects_non_additive() {
        let inst = sm("ab", &["a", "b"]);
        assert!(matches!(
            greedy_round_robin(&inst, &MechanismConfig::default()),
            Err(Error::Restriction { mechanism: MechanismId::GreedyRoundRobin, agent: 0, .. })
        ));
        assert!(matches!(rsd(&inst, &MechanismConfig::default()), Err(Error::Restriction { .. })));
    }

    #[test]
    fn rsd_hand_trace() {
        let inst = Instance::additive(&["a", "b", "c"], &[&[5, 5, 12], &[5, 5, 12]]).unwrap();
        let out = rsd(&inst, &MechanismConfig::default()).unwrap();
        assert_eq!(out.allocation.bundles(), &[set(&inst, "bc"), set(&inst, "a")]);
        assert!(is_ef1(&inst, &out.allocation).unwrap().holds);

        let few = Instance::additive(&["a", "b"], &[&[1, 2], &[3, 1], &[1, 1]]).unwrap();
        let out = rsd(&few, &MechanismConfig::default()).unwrap();
        assert_eq!(out.allocation.bundles(), &[set(&few, "b"), set(&few, "a"), GoodSet::EMPTY]);

        let none = Instance::new(vec![], vec![Valuation::Additive(vec![]); 2]).unwrap();
        let out = rsd(&none, &MechanismConfig::default()).unwrap();
        assert_eq!(out.allocation.bundles(), &[GoodSet::EMPTY; 2]);
        assert!(out.trace.steps.is_empty());
    }

    #[test]
    fn highest_index_good_tie_break() {
        let inst = Instance::additive(&["a", "b", "c"], &[&[5, 5, 12], &[5, 5, 12]]).unwrap();
        let config = MechanismConfig { good_tie_break: GoodTieBreak::HighestIndex, ..Default::default() };
        let out = rsd(&inst, &config).unwrap();
        assert_eq!(out.allocation.bundles(), &[set(&inst, "ac"), set(&inst, "b")]);
    }

    #[test]
    fn envy_cycle_single_agent() {
        let inst = Instance::additive(&["a", "b", "c"], &[&[1, 2, 3]]).unwrap();
        let out = envy_cycle_elimination(&inst, &MechanismConfig::default()).unwrap();
        assert_eq!(out.allocation.bundles(), &[inst.all_goods()]);
        assert!(out.trace.steps.iter().all(|s| s.envy_edges.as_deref() == Some(&[][..])));
    }

    #[test]
    fn envy_cycle_rotates_when_everyone_is_envied() {
        // With a given first to agent 1 and b to agent 2, both envy each other.
        let inst = Instance::additive(&["a", "b", "c"], &[&[1, 5, 1], &[5, 1, 1]]).unwrap();
        let out = envy_cycle_elimination(&inst, &MechanismConfig::default()).unwrap();
        let rotation = out
            .trace
            .steps
            .iter()
            .position(|s| matches!(s.action, StepAction::Rotate { .. }))
            .expect("a rotation happens");
        assert_eq!(out.trace.steps[rotation].bundles, vec![set(&inst, "b"), set(&inst, "a")]);
        assert!(out.trace.replays_to(&out.allocation));
        assert!(is_ef1(&inst, &out.allocation).unwrap().holds);
    }

    #[test]
    fn cycle_search_prefers_lowest_start() {
        let mut g = vec![vec![false; 4]; 4];
        g[0][1] = true;
        g[1][2] = true;
        g[2][1] = true;
        g[3][0] = true;
        g[2][3] = true;
        assert_eq!(find_cycle(&g), Some(vec![1, 2]));
        assert_eq!(find_cycle(&vec![vec![false; 2]; 2]), None);
    }

    #[test]
    fn sd_examples() {
        let inst = sm("ab", &["a", "ab"]);
        let out = sd(&inst).unwrap();
        assert_eq!(out.allocation.bundles(), &[set(&inst, "a"), set(&inst, "b")]);
        assert!(is_efx(&inst, &out.allocation).unwrap().holds);

        let inst = sm("abc", &["a", "b"]);
        let out = sd(&inst).unwrap();
        assert_eq!(out.allocation.bundles(), &[set(&inst, "a"), set(&inst, "bc")]);
        assert!(is_proportional(&inst, &out.allocation).unwrap().holds);

        let inst = sm("ab", &["a"]);
        assert_eq!(sd(&inst).unwrap().allocation.bundles(), &[inst.all_goods()]);
    }

    #[test]
    fn sd_passes_and_orders_by_size() {
        // agent 1 wants three goods, agent 2 one of them: agent 2 goes first.
        let inst = sm("abc", &["abc", "b"]);
        let out = sd(&inst).unwrap();
        assert_eq!(out.trace.steps[0].action, StepAction::Pick { agent: 1, goods: set(&inst, "b") });
        assert_eq!(out.trace.steps[1].action, StepAction::Pass { agent: 0 });
        assert_eq!(out.allocation.bundles(), &[set(&inst, "ac"), set(&inst, "b")]);
        assert!(out.trace.replays_to(&out.allocation));
    }

    #[test]
    fn sd_rejects_additive() {
        let inst = Instance::additive(&["a"], &[&[1]]).unwrap();
        assert!(matches!(run(MechanismId::Sd, &inst, &MechanismConfig::default()), Err(Error::Restriction { .. })));
    }

    #[test]
    fn bad_orders_are_config_errors() {
        let inst = Instance::additive(&["a", "b"], &[&[1, 2], &[2, 1]]).unwrap();
        for agent_order in [vec![0, 0], vec![0], vec![0, 2]] {
            let config = MechanismConfig { agent_order: Some(agent_order), ..Default::default() };
            assert!(matches!(rsd(&inst, &config), Err(Error::Config(_))));
        }
        let config = MechanismConfig { item_order: Some(vec![1]), ..Default::default() };
        assert!(matches!(envy_cycle_elimination(&inst, &config), Err(Error::Config(_))));
    }

    #[test]
    fn allocate_matches_run() {
        let inst = table4(&[12, 10, 8, 6, 1], &[1, 10, 8, 6, 9]);
        for mechanism in [MechanismId::GreedyRoundRobin, MechanismId::Rsd, MechanismId::EnvyCycleElimination] {
            let config = MechanismConfig::default();
            assert_eq!(allocate(mechanism, &inst, &config).unwrap(), run(mechanism, &inst, &config).unwrap().allocation);
        }
    }

    fn pair_table(d: u32) -> Valuation {
        use crate::model::TableValuation;
        let overrides = [0b011u32, 0b110, 0b101]
            .into_iter()
            .map(|b| (GoodSet::from_bits(b), Value::from(16)))
            .collect();
        let base = [5, 5, 5, d].into_iter().map(Value::from).collect();
        Valuation::Table(TableValuation::new(base, overrides))
    }

    fn table5(agent1_d: u32) -> Instance {
        let goods = ["a", "b", "c", "d"].map(String::from).to_vec();
        Instance::new(goods, vec![pair_table(agent1_d), pair_table(10)]).unwrap()
    }

    fn items(inst: &Instance, labels: &str) -> Option<Vec<usize>> {
        Some(labels.chars().map(|c| inst.good_index(&c.to_string()).unwrap()).collect())
    }

    #[test]
    fn envy_cycle_table_5() {
        let truthful = table5(10);
        let config = MechanismConfig { item_order: items(&truthful, "dabc"), ..Default::default() };
        let out = envy_cycle_elimination(&truthful, &config).unwrap();
        let edges: Vec<_> = out.trace.steps.iter().map(|s| s.envy_edges.clone().unwrap()).collect();
        assert_eq!(edges, vec![vec![(1, 0)], vec![(1, 0)], vec![(0, 1)], vec![(0, 1)]]);
        assert_eq!(out.allocation.bundles(), &[set(&truthful, "cd"), set(&truthful, "ab")]);
        assert_eq!(truthful.value(0, out.allocation.bundle(0)), Value::from(15));

        let lie = table5(4);
        let out = envy_cycle_elimination(&lie, &config).unwrap();
        assert_eq!(out.trace.steps[1].envy_edges, Some(vec![(0, 1), (1, 0)]));
        assert_eq!(out.trace.steps[2].action, StepAction::Rotate { cycle: vec![0, 1] });
        assert_eq!(out.trace.steps[2].bundles, vec![set(&lie, "a"), set(&lie, "d")]);
        assert_eq!(out.trace.steps[2].envy_edges, Some(vec![]));
        assert_eq!(out.allocation.bundles(), &[set(&lie, "ab"), set(&lie, "cd")]);
        assert_eq!(truthful.value(0, out.allocation.bundle(0)), Value::from(16));

        let mut overridden = config.clone();
        overridden.source_tie_overrides.insert(1, SourceTieBreak::HighestIndex);
        let out = envy_cycle_elimination(&lie, &overridden).unwrap();
        assert_eq!(out.trace.steps[3].bundles, vec![set(&lie, "a"), set(&lie, "bd")]);
        assert_eq!(out.trace.steps[3].envy_edges, Some(vec![(0, 1)]));
        assert_eq!(out.allocation.bundles(), &[set(&lie, "ac"), set(&lie, "bd")]);
        assert_eq!(out.trace.steps[4].envy_edges, Some(vec![(1, 0)]));
        assert_eq!(truthful.value(0, out.allocation.bundle(0)), Value::from(16));
        assert!(out.trace.replays_to(&out.allocation));
    }

    #[test]
    fn mechanism_names() {
        for m in MechanismId::ALL {
            assert_eq!(m.key().parse::<MechanismId>().unwrap(), m);
        }
        assert_eq!("least-value".parse::<SourceTieBreak>().unwrap(), SourceTieBreak::LeastBundleValue);
    }
}
