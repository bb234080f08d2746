//! Exhaustive strategic analysis over finite report spaces.
//!
//! Utilities of a deviating agent are always measured with its true
//! valuation; the mechanism only ever sees reports. Absence of a witness is
//! relative to the searched space.

use crate::error::{Error, Result};
use crate::fairness::{fair_set, Criterion};
use crate::mechanisms::{allocate, GoodTieBreak, MechanismConfig, MechanismId, SourceTieBreak};
use crate::model::{Allocation, GoodSet, Instance, Valuation};
use crate::value::Value;

/// Default budget of mechanism runs for one search.
pub const DEFAULT_MAX_RUNS: u64 = 10_000_000;

/// A finite set of reports one agent may submit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MisreportSpace {
    /// Every additive report whose entries lie on `lo, lo+step, …, ≤ hi`.
    AdditiveGrid { lo: u32, hi: u32, step: u32 },
    /// Every nonempty desired bundle, keeping the agent's true value.
    SingleMinded,
    Explicit(Vec<Valuation>),
}

impl MisreportSpace {
    pub fn grid(lo: u32, hi: u32, step: u32) -> Result<MisreportSpace> {
        if step == 0 || lo > hi {
            return Err(Error::Config(format!("grid {lo}:{hi}:{step} is empty")));
        }
        Ok(MisreportSpace::AdditiveGrid { lo, hi, step })
    }

    /// Additive reports using each of `0..goods` exactly once, in lexicographic order.
    ///
    /// Any additive report induces the same picking order, under lowest-index
    /// ties, as one of these.
    pub fn additive_rankings(goods: usize) -> MisreportSpace {
        let mut perm: Vec<u32> = (0..goods as u32).collect();
        let mut list = Vec::new();
        loop {
            list.push(Valuation::Additive(perm.iter().map(|&v| Value::from(v)).collect()));
            let Some(i) = (1..perm.len()).rev().find(|&i| perm[i - 1] < perm[i]) else {
                break;
            };
            let j = (i..perm.len()).rev().find(|&j| perm[j] > perm[i - 1]).expect("a successor exists");
            perm.swap(i - 1, j);
            perm[i..].reverse();
        }
        MisreportSpace::Explicit(list)
    }

    pub fn key(&self) -> &'static str {
        match self {
            MisreportSpace::AdditiveGrid { .. } => "additive-grid",
            MisreportSpace::SingleMinded => "single-minded",
            MisreportSpace::Explicit(_) => "explicit",
        }
    }

    /// Number of candidate reports over `goods` goods.
    pub fn len(&self, goods: usize) -> u128 {
        match self {
            MisreportSpace::AdditiveGrid { lo, hi, step } => {
                let levels = u128::from((hi - lo) / step + 1);
                levels.checked_pow(goods as u32).unwrap_or(u128::MAX)
            }
            MisreportSpace::SingleMinded => (1u128 << goods) - 1,
            MisreportSpace::Explicit(list) => list.len() as u128,
        }
    }

    /// Candidates for `agent` in their canonical order.
    ///
    /// Grids run lexicographically with good 0 most significant; single-minded
    /// bundles run in ascending bitmask order; explicit lists keep their order.
    pub fn candidates<'a>(&'a self, instance: &Instance, agent: usize) -> Result<Candidates<'a>> {
        let truth = instance.valuation(agent);
        let mismatch = || Error::SpaceMismatch {
            space: self.key(),
            agent,
            found: truth.kind().as_str(),
        };
        let m = instance.goods_count();
        let inner = match (self, truth) {
            (MisreportSpace::AdditiveGrid { lo, hi, step }, Valuation::Additive(_)) => {
                if *step == 0 || lo > hi {
                    return Err(Error::Config(format!("grid {lo}:{hi}:{step} is empty")));
                }
                CandidatesInner::Grid {
                    lo: *lo,
                    step: *step,
                    levels: (hi - lo) / step + 1,
                    digits: Some(vec![0; m]),
                }
            }
            (MisreportSpace::SingleMinded, Valuation::SingleMinded { value, .. }) => CandidatesInner::SingleMinded {
                value: *value,
                next: 1,
                end: 1u32 << m,
            },
            (MisreportSpace::Explicit(list), _) => {
                for candidate in list {
                    if candidate.kind() != truth.kind() {
                        return Err(mismatch());
                    }
                    Instance::new(instance.goods().to_vec(), vec![candidate.clone()])?;
                }
                CandidatesInner::Explicit(list.iter())
            }
            _ => return Err(mismatch()),
        };
        Ok(Candidates(inner))
    }
}

pub struct Candidates<'a>(CandidatesInner<'a>);

enum CandidatesInner<'a> {
    Grid {
        lo: u32,
        step: u32,
        levels: u32,
        digits: Option<Vec<u32>>,
    },
    SingleMinded {
        value: Value,
        next: u32,
        end: u32,
    },
    Explicit(std::slice::Iter<'a, Valuation>),
}

impl Iterator for Candidates<'_> {
    type Item = Valuation;

    fn next(&mut self) -> Option<Valuation> {
        match &mut self.0 {
            CandidatesInner::Grid { lo, step, levels, digits } => {
                let current = digits.as_mut()?;
                let report = current.iter().map(|&d| Value::from(*lo + d * *step)).collect();
                let mut exhausted = true;
                for d in current.iter_mut().rev() {
                    *d += 1;
                    if *d < *levels {
                        exhausted = false;
                        break;
                    }
                    *d = 0;
                }
                if exhausted {
                    *digits = None;
                }
                Some(Valuation::Additive(report))
            }
            CandidatesInner::SingleMinded { value, next, end } => {
                if *next >= *end {
                    return None;
                }
                let bundle = GoodSet::from_bits(*next);
                *next += 1;
                Some(Valuation::SingleMinded { bundle, value: *value })
            }
            CandidatesInner::Explicit(iter) => iter.next().cloned(),
        }
    }
}

/// A report that strictly raises `agent`'s true utility against `profile`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManipulationWitness {
    pub agent: usize,
    pub true_valuation: Valuation,
    pub misreport: Valuation,
    /// Reports the mechanism saw when `agent` was truthful.
    pub profile: Instance,
    pub truthful_allocation: Allocation,
    pub deviated_allocation: Allocation,
    pub truthful_utility: Value,
    pub deviated_utility: Value,
}

impl ManipulationWitness {
    pub fn gain(&self) -> (Value, Value) {
        (self.truthful_utility, self.deviated_utility)
    }

    /// Re-runs both profiles and checks every recorded field.
    pub fn revalidate(&self, mechanism: MechanismId, config: &MechanismConfig) -> Result<bool> {
        if self.profile.valuation(self.agent) != &self.true_valuation {
            return Ok(false);
        }
        let truthful = allocate(mechanism, &self.profile, config)?;
        let deviated = allocate(mechanism, &self.profile.with_valuation(self.agent, self.misreport.clone()), config)?;
        let u0 = self.true_valuation.value_of(truthful.bundle(self.agent));
        let u1 = self.true_valuation.value_of(deviated.bundle(self.agent));
        Ok(truthful == self.truthful_allocation
            && deviated == self.deviated_allocation
            && u0 == self.truthful_utility
            && u1 == self.deviated_utility
            && u1 > u0)
    }
}

/// Outcome of an NSP or SP check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrategyVerdict {
    /// True when no searched report is profitable; meaningful only relative to the spaces.
    pub holds: bool,
    pub witness: Option<ManipulationWitness>,
    /// Family member the witness came from, for SP checks.
    pub instance: Option<usize>,
    pub runs: u64,
}

fn check_budget(what: &'static str, required: u128, max_runs: u64) -> Result<()> {
    if required > u128::from(max_runs) {
        Err(Error::Capacity { what, required, cap: u128::from(max_runs) })
    } else {
        Ok(())
    }
}

/// Scans `candidates` for `agent` with the rest of `profile` fixed.
///
/// `profile` is restored before returning. Keeps the first candidate reaching
/// the highest deviated utility.
fn search(
    mechanism: MechanismId,
    profile: &mut Instance,
    agent: usize,
    candidates: impl Iterator<Item = Valuation>,
    config: &MechanismConfig,
    runs: &mut u64,
) -> Result<Option<ManipulationWitness>> {
    let truth = profile.valuation(agent).clone();
    let truthful_allocation = allocate(mechanism, profile, config)?;
    *runs += 1;
    let truthful_utility = truth.value_of(truthful_allocation.bundle(agent));
    let mut best: Option<(Valuation, Allocation, Value)> = None;
    let mut outcome = Ok(());
    for candidate in candidates {
        profile.set_valuation(agent, candidate);
        let result = allocate(mechanism, profile, config);
        *runs += 1;
        let deviated = match result {
            Ok(a) => a,
            Err(e) => {
                outcome = Err(e);
                break;
            }
        };
        let utility = truth.value_of(deviated.bundle(agent));
        let threshold = best.as_ref().map_or(truthful_utility, |b| b.2);
        if utility > threshold {
            best = Some((profile.valuation(agent).clone(), deviated, utility));
        }
    }
    profile.set_valuation(agent, truth.clone());
    outcome?;
    Ok(best.map(|(misreport, deviated_allocation, deviated_utility)| ManipulationWitness {
        agent,
        true_valuation: truth,
        misreport,
        profile: profile.clone(),
        truthful_allocation,
        deviated_allocation,
        truthful_utility,
        deviated_utility,
    }))
}

/// The most profitable report for `agent` in `space` with everyone else
/// truthful, or `None` when no report beats truth-telling.
pub fn best_misreport(
    mechanism: MechanismId,
    instance: &Instance,
    agent: usize,
    space: &MisreportSpace,
    config: &MechanismConfig,
    max_runs: u64,
) -> Result<Option<ManipulationWitness>> {
    if agent >= instance.agents() {
        return Err(Error::Config(format!("agent {} does not exist", agent + 1)));
    }
    check_budget("misreport search", space.len(instance.goods_count()).saturating_add(1), max_runs)?;
    let candidates = space.candidates(instance, agent)?;
    let mut profile = instance.clone();
    search(mechanism, &mut profile, agent, candidates, config, &mut 0)
}

fn spaces_match(instance: &Instance, spaces: &[MisreportSpace]) -> Result<()> {
    if spaces.len() != instance.agents() {
        return Err(Error::Config(format!(
            "{} misreport spaces given for {} agents",
            spaces.len(),
            instance.agents()
        )));
    }
    Ok(())
}

/// Truth-telling is a best response for every agent when all others are truthful.
pub fn verify_nsp(
    mechanism: MechanismId,
    instance: &Instance,
    spaces: &[MisreportSpace],
    config: &MechanismConfig,
    max_runs: u64,
) -> Result<StrategyVerdict> {
    spaces_match(instance, spaces)?;
    let m = instance.goods_count();
    let required = spaces.iter().fold(0u128, |acc, s| acc.saturating_add(s.len(m).saturating_add(1)));
    check_budget("Nash strategy-proofness check", required, max_runs)?;
    let mut profile = instance.clone();
    let mut runs = 0;
    for (agent, space) in spaces.iter().enumerate() {
        let candidates = space.candidates(instance, agent)?;
        if let Some(witness) = search(mechanism, &mut profile, agent, candidates, config, &mut runs)? {
            return Ok(StrategyVerdict { holds: false, witness: Some(witness), instance: None, runs });
        }
    }
    Ok(StrategyVerdict { holds: true, witness: None, instance: None, runs })
}

/// The same space for every agent of every family member.
pub fn uniform_spaces(family: &[Instance], space: &MisreportSpace) -> Vec<Vec<MisreportSpace>> {
    family.iter().map(|inst| vec![space.clone(); inst.agents()]).collect()
}

/// Co-player reports: the truthful report first, then the rest of the space.
fn co_player_reports(instance: &Instance, agent: usize, space: &MisreportSpace) -> Result<Vec<Valuation>> {
    let truth = instance.valuation(agent);
    let mut reports = vec![truth.clone()];
    reports.extend(space.candidates(instance, agent)?.filter(|c| c != truth));
    Ok(reports)
}

/// Upper bound on the mechanism runs [`verify_sp`] makes on one instance.
pub fn sp_cost(instance: &Instance, spaces: &[MisreportSpace]) -> u128 {
    let m = instance.goods_count();
    let sizes: Vec<u128> = spaces.iter().map(|s| s.len(m).saturating_add(1)).collect();
    (0..sizes.len()).fold(0u128, |acc, i| {
        let profiles = sizes
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .fold(1u128, |p, (_, s)| p.saturating_mul(*s));
        acc.saturating_add(profiles.saturating_mul(sizes[i]))
    })
}

/// Truth-telling is a best response for every agent against every combination
/// of co-player reports drawn from their spaces, on every family member.
pub fn verify_sp(
    mechanism: MechanismId,
    family: &[Instance],
    spaces: &[Vec<MisreportSpace>],
    config: &MechanismConfig,
    max_runs: u64,
) -> Result<StrategyVerdict> {
    if family.len() != spaces.len() {
        return Err(Error::Config(format!("{} space lists for {} instances", spaces.len(), family.len())));
    }
    let mut required = 0u128;
    for (instance, spaces) in family.iter().zip(spaces) {
        spaces_match(instance, spaces)?;
        required = required.saturating_add(sp_cost(instance, spaces));
    }
    check_budget("strategy-proofness check", required, max_runs)?;

    let mut runs = 0;
    for (index, (instance, spaces)) in family.iter().zip(spaces).enumerate() {
        let reports: Vec<Vec<Valuation>> = (0..instance.agents())
            .map(|j| co_player_reports(instance, j, &spaces[j]))
            .collect::<Result<_>>()?;
        for (agent, space) in spaces.iter().enumerate() {
            let mut profile = instance.clone();
            let others: Vec<usize> = (0..instance.agents()).filter(|&j| j != agent).collect();
            let mut choice = vec![0usize; others.len()];
            loop {
                for (&j, &c) in others.iter().zip(&choice) {
                    profile.set_valuation(j, reports[j][c].clone());
                }
                let candidates = space.candidates(instance, agent)?;
                if let Some(witness) = search(mechanism, &mut profile, agent, candidates, config, &mut runs)? {
                    return Ok(StrategyVerdict { holds: false, witness: Some(witness), instance: Some(index), runs });
                }
                let advanced = others.iter().zip(choice.iter_mut()).rev().any(|(&j, c)| {
                    *c += 1;
                    if *c < reports[j].len() {
                        true
                    } else {
                        *c = 0;
                        false
                    }
                });
                if !advanced {
                    break;
                }
            }
        }
    }
    Ok(StrategyVerdict { holds: true, witness: None, instance: None, runs })
}

/// The six combinations of good and source tie-break rules over `base`'s orders.
pub fn tie_break_configs(base: &MechanismConfig) -> Vec<MechanismConfig> {
    let mut configs = Vec::new();
    for good_tie_break in GoodTieBreak::ALL {
        for source_tie_break in SourceTieBreak::ALL {
            configs.push(MechanismConfig {
                good_tie_break,
                source_tie_break,
                source_tie_overrides: Default::default(),
                ..base.clone()
            });
        }
    }
    configs
}

/// One agent's deviation answering one truthful fair allocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Deviation {
    pub allocation: Allocation,
    pub agent: usize,
    pub misreport: Valuation,
}

/// A claimed proof that no mechanism selecting from a fair set is truthful on an instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImpossibilityWitness {
    pub criterion: Criterion,
    pub deviations: Vec<Deviation>,
}

/// Evidence for one truthful fair allocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeviationCheck {
    pub allocation: Allocation,
    /// Index into the witness's deviations, when one covers this allocation.
    pub deviation: Option<usize>,
    pub truthful_value: Value,
    /// Fair set under the misreported profile.
    pub deviated_fair_set: Vec<Allocation>,
    /// Smallest true value the deviator gets over `deviated_fair_set`.
    pub worst_deviated_value: Option<Value>,
    pub dominates: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImpossibilityReport {
    pub holds: bool,
    pub truthful_fair_set: Vec<Allocation>,
    pub checks: Vec<DeviationCheck>,
}

/// Smallest value `agent` gets under `truth` across `outcomes`.
fn worst_value(truth: &Valuation, agent: usize, outcomes: &[Allocation]) -> Option<Value> {
    outcomes.iter().map(|a| truth.value_of(a.bundle(agent))).min()
}

/// Checks every allocation of the truthful fair set against the proposed deviations.
pub fn assess_impossibility_witness(
    instance: &Instance,
    criterion: Criterion,
    proposed: &ImpossibilityWitness,
) -> Result<ImpossibilityReport> {
    if proposed.criterion != criterion {
        return Err(Error::Config(format!(
            "witness is for {} but {criterion} was requested",
            proposed.criterion
        )));
    }
    let truthful_fair_set = fair_set(instance, criterion)?;
    if truthful_fair_set.is_empty() {
        return Err(Error::EmptyFairSet(criterion));
    }
    let mut checks = Vec::with_capacity(truthful_fair_set.len());
    for allocation in &truthful_fair_set {
        let index = proposed.deviations.iter().position(|d| &d.allocation == allocation);
        let mut check = DeviationCheck {
            allocation: allocation.clone(),
            deviation: index,
            truthful_value: Value::ZERO,
            deviated_fair_set: Vec::new(),
            worst_deviated_value: None,
            dominates: false,
        };
        if let Some(index) = index {
            let deviation = &proposed.deviations[index];
            if deviation.agent >= instance.agents() {
                return Err(Error::Config(format!("agent {} does not exist", deviation.agent + 1)));
            }
            let truth = instance.valuation(deviation.agent);
            let misreported = Instance::new(
                instance.goods().to_vec(),
                instance.with_valuation(deviation.agent, deviation.misreport.clone()).valuations().to_vec(),
            )?;
            check.truthful_value = truth.value_of(allocation.bundle(deviation.agent));
            check.deviated_fair_set = fair_set(&misreported, criterion)?;
            check.worst_deviated_value = worst_value(truth, deviation.agent, &check.deviated_fair_set);
            check.dominates = check.worst_deviated_value.is_some_and(|w| w > check.truthful_value);
        }
        checks.push(check);
    }
    Ok(ImpossibilityReport {
        holds: checks.iter().all(|c| c.dominates),
        truthful_fair_set,
        checks,
    })
}

/// True when every truthful fair allocation is strictly beaten, for its
/// deviator, by every fair allocation of the deviator's misreported profile.
pub fn verify_impossibility_witness(
    instance: &Instance,
    criterion: Criterion,
    proposed: &ImpossibilityWitness,
) -> Result<bool> {
    assess_impossibility_witness(instance, criterion, proposed).map(|r| r.holds)
}

/// Result of exhausting every selection rule restricted to a stronger criterion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SelectionCheck {
    pub stronger: Criterion,
    pub weaker: Criterion,
    /// Selections over the truthful and misreported profiles.
    pub selections: u128,
    pub manipulable: u128,
    /// Profiles whose stronger fair set is empty, so no selection rule exists there.
    pub empty_profiles: usize,
}

impl SelectionCheck {
    /// Every selection rule restricted to the stronger fair set is manipulable.
    pub fn holds(&self) -> bool {
        self.manipulable == self.selections
    }
}

/// Enumerates every deterministic rule that picks from `fair_set(stronger)` on
/// the truthful profile and on each misreported profile of `witness` (a
/// witness for `weaker`), counting the rules some deviation manipulates.
pub fn selections_manipulable(
    instance: &Instance,
    stronger: Criterion,
    witness: &ImpossibilityWitness,
    max_selections: u64,
) -> Result<SelectionCheck> {
    let weaker = witness.criterion;
    if !stronger.implies(weaker) {
        return Err(Error::Config(format!("{stronger} does not imply {weaker}")));
    }
    if !verify_impossibility_witness(instance, weaker, witness)? {
        return Err(Error::Config(format!("the witness does not establish impossibility for {weaker}")));
    }
    let truthful = fair_set(instance, stronger)?;
    let mut deviated = Vec::with_capacity(witness.deviations.len());
    for d in &witness.deviations {
        let profile = Instance::new(
            instance.goods().to_vec(),
            instance.with_valuation(d.agent, d.misreport.clone()).valuations().to_vec(),
        )?;
        deviated.push(fair_set(&profile, stronger)?);
    }
    let empty_profiles = usize::from(truthful.is_empty()) + deviated.iter().filter(|s| s.is_empty()).count();
    let selections = deviated
        .iter()
        .fold(truthful.len() as u128, |acc, s| acc.saturating_mul(s.len() as u128));
    check_budget("selection enumeration", selections, max_selections)?;

    let mut manipulable = 0u128;
    if selections > 0 {
        let mut choice = vec![0usize; deviated.len()];
        for chosen in &truthful {
            loop {
                let beaten = witness.deviations.iter().zip(&deviated).zip(&choice).any(|((d, set), &c)| {
                    let truth = instance.valuation(d.agent);
                    &d.allocation == chosen
                        && truth.value_of(set[c].bundle(d.agent)) > truth.value_of(chosen.bundle(d.agent))
                });
                manipulable += u128::from(beaten);
                let advanced = deviated.iter().zip(choice.iter_mut()).rev().any(|(set, c)| {
                    *c += 1;
                    if *c < set.len() {
                        true
                    } else {
                        *c = 0;
                        false
                    }
                });
                if !advanced {
                    break;
                }
            }
        }
    }
    Ok(SelectionCheck { stronger, weaker, selections, manipulable, empty_profiles })
}
