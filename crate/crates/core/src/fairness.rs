//! Exact fairness predicates, maximin shares and allocation enumeration.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{is_complete, Allocation, GoodSet, Instance};
use crate::value::Value;

/// Goods limit for anything that enumerates all `n^m` assignments.
pub const MAX_ENUMERATION_GOODS: usize = 12;
/// Upper bound on `n^m` for exhaustive enumeration.
pub const MAX_ENUMERATED_ALLOCATIONS: u64 = 1 << 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Criterion {
    Proportional,
    EnvyFree,
    Ef1,
    Efx,
    Mms,
}

impl Criterion {
    pub const ALL: [Criterion; 5] = [
        Criterion::Proportional,
        Criterion::EnvyFree,
        Criterion::Ef1,
        Criterion::Efx,
        Criterion::Mms,
    ];

    /// Short flag name: `prop`, `ef`, `ef1`, `efx`, `mms`.
    pub fn key(self) -> &'static str {
        match self {
            Criterion::Proportional => "prop",
            Criterion::EnvyFree => "ef",
            Criterion::Ef1 => "ef1",
            Criterion::Efx => "efx",
            Criterion::Mms => "mms",
        }
    }

    /// Reflexive-transitive closure of EF ⇒ EFX ⇒ EF1 and EF ⇒ Proportional ⇒ MMS,
    /// valid for additive valuations.
    pub fn implies(self, other: Criterion) -> bool {
        use Criterion::*;
        self == other
            || matches!(
                (self, other),
                (EnvyFree, _) | (Efx, Ef1) | (Proportional, Mms)
            )
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Criterion::Proportional => "Proportional",
            Criterion::EnvyFree => "EF",
            Criterion::Ef1 => "EF1",
            Criterion::Efx => "EFX",
            Criterion::Mms => "MMS",
        })
    }
}

impl FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Criterion> {
        match s.to_ascii_lowercase().as_str() {
            "prop" | "proportional" => Ok(Criterion::Proportional),
            "ef" => Ok(Criterion::EnvyFree),
            "ef1" => Ok(Criterion::Ef1),
            "efx" => Ok(Criterion::Efx),
            "mms" => Ok(Criterion::Mms),
            other => Err(Error::Parse(format!("unknown criterion `{other}`"))),
        }
    }
}

/// Why a criterion fails: `agent` holds `lhs` but needs at least `rhs`.
///
/// For the threshold criteria `other` and `good` are empty and `rhs` is the
/// threshold. For the envy criteria `rhs` is the agent's value for `other`'s
/// bundle, less `good` when a removal is involved. For EF1 `good` is the
/// removal that comes closest to eliminating envy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub agent: usize,
    pub other: Option<usize>,
    pub good: Option<usize>,
    pub lhs: Value,
    pub rhs: Value,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FairnessVerdict {
    pub criterion: Criterion,
    pub holds: bool,
    pub witness: Option<Witness>,
}

impl FairnessVerdict {
    fn from_witness(criterion: Criterion, witness: Option<Witness>) -> FairnessVerdict {
        FairnessVerdict {
            criterion,
            holds: witness.is_none(),
            witness,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ReportEntry {
    Checked(FairnessVerdict),
    Skipped { criterion: Criterion, reason: String },
}

impl ReportEntry {
    pub fn criterion(&self) -> Criterion {
        match self {
            ReportEntry::Checked(v) => v.criterion,
            ReportEntry::Skipped { criterion, .. } => *criterion,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FairnessReport {
    pub entries: Vec<ReportEntry>,
}

impl FairnessReport {
    pub fn verdict(&self, criterion: Criterion) -> Option<&FairnessVerdict> {
        self.entries.iter().find_map(|e| match e {
            ReportEntry::Checked(v) if v.criterion == criterion => Some(v),
            _ => None,
        })
    }

    /// `Some(holds)` when checked, `None` when skipped.
    pub fn holds(&self, criterion: Criterion) -> Option<bool> {
        self.verdict(criterion).map(|v| v.holds)
    }
}

/// An agent's maximin share and the first partition (in assignment order) achieving it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MmsShare {
    pub agent: usize,
    pub value: Value,
    pub partition: Vec<GoodSet>,
}

fn ensure_complete(instance: &Instance, allocation: &Allocation) -> Result<()> {
    if is_complete(instance, allocation) {
        Ok(())
    } else {
        Err(Error::IncompleteAllocation)
    }
}

/// `n^m` when it is within the enumeration caps.
pub fn enumeration_size(agents: usize, goods: usize) -> Result<u64> {
    let too_big = || Error::Capacity {
        what: "allocation enumeration",
        required: (agents as u128).checked_pow(goods as u32).unwrap_or(u128::MAX),
        cap: u128::from(MAX_ENUMERATED_ALLOCATIONS),
    };
    if goods > MAX_ENUMERATION_GOODS {
        return Err(too_big());
    }
    match (agents as u64).checked_pow(goods as u32) {
        Some(size) if size <= MAX_ENUMERATED_ALLOCATIONS => Ok(size),
        _ => Err(too_big()),
    }
}

fn threshold_witness(
    instance: &Instance,
    allocation: &Allocation,
    thresholds: &[Value],
) -> Option<Witness> {
    (0..instance.agents()).find_map(|agent| {
        let own = instance.value(agent, allocation.bundle(agent));
        (own < thresholds[agent]).then_some(Witness {
            agent,
            other: None,
            good: None,
            lhs: own,
            rhs: thresholds[agent],
        })
    })
}

fn proportional_thresholds(instance: &Instance) -> Vec<Value> {
    let n = instance.agents();
    (0..n)
        .map(|i| instance.value(i, instance.all_goods()).div_count(n))
        .collect()
}

fn envy_witness(instance: &Instance, allocation: &Allocation, criterion: Criterion) -> Option<Witness> {
    let n = instance.agents();
    for agent in 0..n {
        let own = instance.value(agent, allocation.bundle(agent));
        for other in (0..n).filter(|&j| j != agent) {
            let theirs = allocation.bundle(other);
            let witness = |good, rhs| Witness { agent, other: Some(other), good, lhs: own, rhs };
            match criterion {
                Criterion::EnvyFree => {
                    let value = instance.value(agent, theirs);
                    if own < value {
                        return Some(witness(None, value));
                    }
                }
                Criterion::Ef1 => {
                    // Envy must vanish for at least one removal; empty bundles are never envied.
                    let closest = theirs
                        .iter()
                        .map(|g| (instance.value(agent, theirs.without(g)), g))
                        .min_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
                    if let Some((value, good)) = closest {
                        if own < value {
                            return Some(witness(Some(good), value));
                        }
                    }
                }
                Criterion::Efx => {
                    for good in theirs.iter() {
                        let value = instance.value(agent, theirs.without(good));
                        if own < value {
                            return Some(witness(Some(good), value));
                        }
                    }
                }
                Criterion::Proportional | Criterion::Mms => unreachable!("not an envy criterion"),
            }
        }
    }
    None
}

pub fn is_proportional(instance: &Instance, allocation: &Allocation) -> Result<FairnessVerdict> {
    ensure_complete(instance, allocation)?;
    let witness = threshold_witness(instance, allocation, &proportional_thresholds(instance));
    Ok(FairnessVerdict::from_witness(Criterion::Proportional, witness))
}

pub fn is_envy_free(instance: &Instance, allocation: &Allocation) -> Result<FairnessVerdict> {
    ensure_complete(instance, allocation)?;
    let witness = envy_witness(instance, allocation, Criterion::EnvyFree);
    Ok(FairnessVerdict::from_witness(Criterion::EnvyFree, witness))
}

pub fn is_ef1(instance: &Instance, allocation: &Allocation) -> Result<FairnessVerdict> {
    ensure_complete(instance, allocation)?;
    let witness = envy_witness(instance, allocation, Criterion::Ef1);
    Ok(FairnessVerdict::from_witness(Criterion::Ef1, witness))
}

/// EFX with removal over every good of the envied bundle, zero-valued ones included.
pub fn is_efx(instance: &Instance, allocation: &Allocation) -> Result<FairnessVerdict> {
    ensure_complete(instance, allocation)?;
    let witness = envy_witness(instance, allocation, Criterion::Efx);
    Ok(FairnessVerdict::from_witness(Criterion::Efx, witness))
}

/// Maximin share of `agent`: the best, over all assignments of goods to `n`
/// possibly empty bundles, of the worst bundle under `agent`'s valuation.
pub fn mms_share(instance: &Instance, agent: usize) -> Result<MmsShare> {
    let n = instance.agents();
    let m = instance.goods_count();
    enumeration_size(n, m)?;
    let valuation = instance.valuation(agent);
    let table: Vec<Value> = (0..1u32 << m)
        .map(|bits| valuation.value_of(GoodSet::from_bits(bits)))
        .collect();

    struct Search<'a> {
        table: &'a [Value],
        goods: usize,
        bundles: Vec<u32>,
        best: Option<(Value, Vec<u32>)>,
    }

    impl Search<'_> {
        fn assign(&mut self, good: usize) {
            if good == self.goods {
                let worst = self
                    .bundles
                    .iter()
                    .map(|&b| self.table[b as usize])
                    .min()
                    .expect("at least one agent");
                if self.best.as_ref().is_none_or(|(v, _)| worst > *v) {
                    self.best = Some((worst, self.bundles.clone()));
                }
                return;
            }
            for bundle in 0..self.bundles.len() {
                self.bundles[bundle] |= 1 << good;
                self.assign(good + 1);
                self.bundles[bundle] &= !(1 << good);
            }
        }
    }

    let mut search = Search {
        table: &table,
        goods: m,
        bundles: vec![0; n],
        best: None,
    };
    search.assign(0);
    let (value, bundles) = search.best.expect("enumeration yields at least one assignment");
    Ok(MmsShare {
        agent,
        value,
        partition: bundles.into_iter().map(GoodSet::from_bits).collect(),
    })
}

pub fn mms_shares(instance: &Instance) -> Result<Vec<MmsShare>> {
    (0..instance.agents()).map(|i| mms_share(instance, i)).collect()
}

pub fn is_mms(instance: &Instance, allocation: &Allocation) -> Result<FairnessVerdict> {
    ensure_complete(instance, allocation)?;
    let shares: Vec<Value> = mms_shares(instance)?.into_iter().map(|s| s.value).collect();
    let witness = threshold_witness(instance, allocation, &shares);
    Ok(FairnessVerdict::from_witness(Criterion::Mms, witness))
}

pub fn check(instance: &Instance, allocation: &Allocation, criterion: Criterion) -> Result<FairnessVerdict> {
    match criterion {
        Criterion::Proportional => is_proportional(instance, allocation),
        Criterion::EnvyFree => is_envy_free(instance, allocation),
        Criterion::Ef1 => is_ef1(instance, allocation),
        Criterion::Efx => is_efx(instance, allocation),
        Criterion::Mms => is_mms(instance, allocation),
    }
}

/// All five verdicts; MMS is reported as skipped when its share is over the cap.
pub fn check_all(instance: &Instance, allocation: &Allocation) -> Result<FairnessReport> {
    ensure_complete(instance, allocation)?;
    let mut entries = Vec::with_capacity(Criterion::ALL.len());
    for criterion in Criterion::ALL {
        match check(instance, allocation, criterion) {
            Ok(verdict) => entries.push(ReportEntry::Checked(verdict)),
            Err(err @ Error::Capacity { .. }) => entries.push(ReportEntry::Skipped {
                criterion,
                reason: err.to_string(),
            }),
            Err(err) => return Err(err),
        }
    }
    Ok(FairnessReport { entries })
}

/// A checker with per-instance thresholds computed once, for filtering many allocations.
pub struct PreparedChecker<'a> {
    instance: &'a Instance,
    criterion: Criterion,
    thresholds: Vec<Value>,
}

impl<'a> PreparedChecker<'a> {
    pub fn new(instance: &'a Instance, criterion: Criterion) -> Result<PreparedChecker<'a>> {
        let thresholds = match criterion {
            Criterion::Proportional => proportional_thresholds(instance),
            Criterion::Mms => mms_shares(instance)?.into_iter().map(|s| s.value).collect(),
            _ => Vec::new(),
        };
        Ok(PreparedChecker { instance, criterion, thresholds })
    }

    /// Assumes `allocation` is complete.
    pub fn check(&self, allocation: &Allocation) -> FairnessVerdict {
        let witness = match self.criterion {
            Criterion::Proportional | Criterion::Mms => {
                threshold_witness(self.instance, allocation, &self.thresholds)
            }
            c => envy_witness(self.instance, allocation, c),
        };
        FairnessVerdict::from_witness(self.criterion, witness)
    }

    pub fn holds(&self, allocation: &Allocation) -> bool {
        self.check(allocation).holds
    }
}

/// Every complete allocation, in lexicographic order of the good→agent vector
/// (good 0 most significant).
pub struct Allocations {
    agents: usize,
    assignment: Vec<usize>,
    done: bool,
}

impl Iterator for Allocations {
    type Item = Allocation;

    fn next(&mut self) -> Option<Allocation> {
        if self.done {
            return None;
        }
        let current = Allocation::from_assignment(&self.assignment, self.agents);
        self.done = true;
        for slot in self.assignment.iter_mut().rev() {
            *slot += 1;
            if *slot < self.agents {
                self.done = false;
                break;
            }
            *slot = 0;
        }
        Some(current)
    }
}

pub fn enumerate_allocations(instance: &Instance) -> Result<Allocations> {
    enumeration_size(instance.agents(), instance.goods_count())?;
    Ok(Allocations {
        agents: instance.agents(),
        assignment: vec![0; instance.goods_count()],
        done: false,
    })
}

/// All complete allocations satisfying `criterion`, in enumeration order.
pub fn fair_set(instance: &Instance, criterion: Criterion) -> Result<Vec<Allocation>> {
    let allocations = enumerate_allocations(instance)?;
    let checker = PreparedChecker::new(instance, criterion)?;
    Ok(allocations.filter(|a| checker.holds(a)).collect())
}
