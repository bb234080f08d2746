//! Instances, valuations and allocations.
//!
//! Goods are identified by their position in the instance's label list and
//! handled as bit sets; agents are identified by their 0-based index. All
//! tie-breaking elsewhere in the crate is defined on these indices.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::value::Value;

/// Hard limit on goods: bundles are 32-bit masks.
pub const MAX_GOODS: usize = 30;
/// Table valuations are expanded over all `2^m` subsets.
pub const MAX_TABLE_GOODS: usize = 16;

/// A set of goods, by index.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct GoodSet(u32);

impl GoodSet {
    pub const EMPTY: GoodSet = GoodSet(0);

    pub fn full(m: usize) -> GoodSet {
        assert!(m <= MAX_GOODS, "at most {MAX_GOODS} goods");
        GoodSet(((1u64 << m) - 1) as u32)
    }

    pub fn singleton(good: usize) -> GoodSet {
        GoodSet(1 << good)
    }

    pub fn from_bits(bits: u32) -> GoodSet {
        GoodSet(bits)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, good: usize) -> bool {
        good < 32 && self.0 & (1 << good) != 0
    }

    pub fn insert(&mut self, good: usize) {
        self.0 |= 1 << good;
    }

    pub fn remove(&mut self, good: usize) {
        self.0 &= !(1 << good);
    }

    pub fn with(self, good: usize) -> GoodSet {
        GoodSet(self.0 | (1 << good))
    }

    pub fn without(self, good: usize) -> GoodSet {
        GoodSet(self.0 & !(1 << good))
    }

    pub fn is_subset(self, other: GoodSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: GoodSet) -> bool {
        self.0 & other.0 == 0
    }

    pub fn union(self, other: GoodSet) -> GoodSet {
        GoodSet(self.0 | other.0)
    }

    pub fn intersection(self, other: GoodSet) -> GoodSet {
        GoodSet(self.0 & other.0)
    }

    pub fn difference(self, other: GoodSet) -> GoodSet {
        GoodSet(self.0 & !other.0)
    }

    /// Members in ascending index order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let good = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            Some(good)
        })
    }
}

impl FromIterator<usize> for GoodSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> GoodSet {
        iter.into_iter().fold(GoodSet::EMPTY, GoodSet::with)
    }
}

impl fmt::Debug for GoodSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValuationKind {
    Additive,
    Table,
    SingleMinded,
}

impl ValuationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ValuationKind::Additive => "additive",
            ValuationKind::Table => "table",
            ValuationKind::SingleMinded => "single-minded",
        }
    }
}

/// An explicit set function given as an additive base plus subset overrides.
///
/// A subset without an override is worth the best split of it into
/// overridden blocks and single goods, so `{a,b}=16` with `c=5` makes
/// `{a,b,c}` worth 21. Overrides are taken literally and may break
/// monotonicity; `validate_instance` reports that.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TableValuation {
    base: Vec<Value>,
    overrides: BTreeMap<GoodSet, Value>,
    /// `2^m` entries indexed by subset bits; empty when `m` exceeds the table bound.
    expanded: Vec<Value>,
}

impl TableValuation {
    pub fn new(base: Vec<Value>, overrides: BTreeMap<GoodSet, Value>) -> TableValuation {
        let mut table = TableValuation {
            base,
            overrides,
            expanded: Vec::new(),
        };
        if table.base.len() <= MAX_TABLE_GOODS {
            table.expand();
        }
        table
    }

    pub fn base(&self) -> &[Value] {
        &self.base
    }

    pub fn overrides(&self) -> &BTreeMap<GoodSet, Value> {
        &self.overrides
    }

    fn additive(&self, bundle: GoodSet) -> Value {
        bundle.iter().filter_map(|g| self.base.get(g).copied()).sum()
    }

    fn expand(&mut self) {
        let size = 1usize << self.base.len();
        let blocks: Vec<(GoodSet, Value)> = self
            .overrides
            .iter()
            .filter(|(set, _)| !set.is_empty() && set.bits() < size as u32)
            .map(|(s, v)| (*s, *v))
            .collect();
        let mut table = vec![Value::ZERO; size];
        for bits in 1..size {
            let set = GoodSet::from_bits(bits as u32);
            if let Some(v) = self.overrides.get(&set) {
                table[bits] = *v;
                continue;
            }
            let mut best = self.additive(set);
            for &(block, v) in &blocks {
                if block.is_subset(set) && block != set {
                    let rest = set.difference(block).bits() as usize;
                    best = best.max(v + table[rest]);
                }
            }
            table[bits] = best;
        }
        if let Some(v) = self.overrides.get(&GoodSet::EMPTY) {
            table[0] = *v;
        }
        self.expanded = table;
    }

    /// Same rule as the expansion, evaluated on demand for oversized tables.
    fn evaluate(&self, set: GoodSet) -> Value {
        if let Some(v) = self.overrides.get(&set) {
            return *v;
        }
        let mut best = self.additive(set);
        for (&block, &v) in &self.overrides {
            if !block.is_empty() && block.is_subset(set) && block != set {
                best = best.max(v + self.evaluate(set.difference(block)));
            }
        }
        best
    }

    pub fn value_of(&self, bundle: GoodSet) -> Value {
        match self.expanded.get(bundle.bits() as usize) {
            Some(v) => *v,
            None => self.evaluate(bundle),
        }
    }
}

/// One agent's valuation over bundles, indexed by the instance's goods.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Valuation {
    Additive(Vec<Value>),
    Table(TableValuation),
    /// Worth `value` on any superset of `bundle`, zero otherwise.
    SingleMinded { bundle: GoodSet, value: Value },
}

impl Valuation {
    pub fn kind(&self) -> ValuationKind {
        match self {
            Valuation::Additive(_) => ValuationKind::Additive,
            Valuation::Table(_) => ValuationKind::Table,
            Valuation::SingleMinded { .. } => ValuationKind::SingleMinded,
        }
    }

    pub fn value_of(&self, bundle: GoodSet) -> Value {
        match self {
            Valuation::Additive(values) => bundle.iter().filter_map(|g| values.get(g).copied()).sum(),
            Valuation::Table(table) => table.value_of(bundle),
            Valuation::SingleMinded { bundle: desired, value } => {
                if desired.is_subset(bundle) {
                    *value
                } else {
                    Value::ZERO
                }
            }
        }
    }

    /// The same valuation multiplied by `factor`.
    pub fn scaled(&self, factor: Value) -> Valuation {
        match self {
            Valuation::Additive(values) => Valuation::Additive(values.iter().map(|v| *v * factor).collect()),
            Valuation::Table(table) => Valuation::Table(TableValuation::new(
                table.base.iter().map(|v| *v * factor).collect(),
                table.overrides.iter().map(|(s, v)| (*s, *v * factor)).collect(),
            )),
            Valuation::SingleMinded { bundle, value } => Valuation::SingleMinded {
                bundle: *bundle,
                value: *value * factor,
            },
        }
    }
}

/// Agents, goods and one valuation per agent.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Instance {
    goods: Vec<String>,
    valuations: Vec<Valuation>,
}

impl Instance {
    /// Builds and validates an instance.
    pub fn new(goods: Vec<String>, valuations: Vec<Valuation>) -> Result<Instance> {
        let instance = Instance::new_unvalidated(goods, valuations);
        let report = validate_instance(&instance);
        if report.is_valid() {
            Ok(instance)
        } else {
            Err(Error::InvalidInstance(report))
        }
    }

    /// Builds an instance without checking it; pair with [`validate_instance`].
    pub fn new_unvalidated(goods: Vec<String>, valuations: Vec<Valuation>) -> Instance {
        Instance { goods, valuations }
    }

    /// Convenience constructor for additive profiles given as rows of integers.
    pub fn additive(goods: &[&str], rows: &[&[u32]]) -> Result<Instance> {
        let valuations = rows
            .iter()
            .map(|row| Valuation::Additive(row.iter().map(|&v| Value::from(v)).collect()))
            .collect();
        Instance::new(goods.iter().map(|g| g.to_string()).collect(), valuations)
    }

    pub fn agents(&self) -> usize {
        self.valuations.len()
    }

    pub fn goods_count(&self) -> usize {
        self.goods.len()
    }

    pub fn goods(&self) -> &[String] {
        &self.goods
    }

    pub fn label(&self, good: usize) -> &str {
        &self.goods[good]
    }

    pub fn all_goods(&self) -> GoodSet {
        GoodSet::full(self.goods.len())
    }

    pub fn valuations(&self) -> &[Valuation] {
        &self.valuations
    }

    pub fn valuation(&self, agent: usize) -> &Valuation {
        &self.valuations[agent]
    }

    pub fn value(&self, agent: usize, bundle: GoodSet) -> Value {
        self.valuations[agent].value_of(bundle)
    }

    pub fn good_index(&self, label: &str) -> Result<usize> {
        self.goods
            .iter()
            .position(|g| g == label)
            .ok_or_else(|| Error::UnknownGood(label.to_string()))
    }

    pub fn bundle<S: AsRef<str>>(&self, labels: &[S]) -> Result<GoodSet> {
        labels
            .iter()
            .map(|l| self.good_index(l.as_ref()))
            .collect::<Result<GoodSet>>()
    }

    /// `value_of` with the bundle named by labels.
    pub fn value_of_labels<S: AsRef<str>>(&self, agent: usize, labels: &[S]) -> Result<Value> {
        Ok(self.value(agent, self.bundle(labels)?))
    }

    pub fn labels(&self, set: GoodSet) -> Vec<String> {
        set.iter().map(|g| self.goods[g].clone()).collect()
    }

    /// Labels joined with commas, e.g. `a,c,d`.
    pub fn format_set(&self, set: GoodSet) -> String {
        self.labels(set).join(",")
    }

    /// A copy with `agent`'s valuation replaced by `valuation`.
    pub fn with_valuation(&self, agent: usize, valuation: Valuation) -> Instance {
        let mut copy = self.clone();
        copy.valuations[agent] = valuation;
        copy
    }

    pub(crate) fn set_valuation(&mut self, agent: usize, valuation: Valuation) {
        self.valuations[agent] = valuation;
    }

    /// True when every agent reports the same set function (checked on all subsets).
    pub fn is_identical(&self) -> bool {
        let m = self.goods.len();
        let first = &self.valuations[0];
        self.valuations.iter().all(|v| {
            v == first
                || (m <= MAX_TABLE_GOODS
                    && (0..1u32 << m).all(|b| v.value_of(GoodSet(b)) == first.value_of(GoodSet(b))))
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    NoAgents,
    TooManyGoods { goods: usize, max: usize },
    DuplicateGood(String),
    WrongLength { agent: usize, expected: usize, found: usize },
    GoodOutOfRange { agent: usize },
    TableTooLarge { agent: usize, goods: usize },
    NonzeroEmptySet { agent: usize, value: Value },
    NonMonotone { agent: usize, subset: Vec<String>, superset: Vec<String>, subset_value: Value, superset_value: Value },
    EmptyDesiredBundle { agent: usize },
    NonPositiveValue { agent: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoAgents => write!(f, "instance has no agents"),
            Violation::TooManyGoods { goods, max } => write!(f, "{goods} goods exceed the limit of {max}"),
            Violation::DuplicateGood(label) => write!(f, "good `{label}` is listed twice"),
            Violation::WrongLength { agent, expected, found } => {
                write!(f, "agent {}: {found} item values for {expected} goods", agent + 1)
            }
            Violation::GoodOutOfRange { agent } => write!(f, "agent {}: references a good outside the instance", agent + 1),
            Violation::TableTooLarge { agent, goods } => write!(
                f,
                "agent {}: table valuation over {goods} goods exceeds the limit of {MAX_TABLE_GOODS}",
                agent + 1
            ),
            Violation::NonzeroEmptySet { agent, value } => {
                write!(f, "agent {}: empty bundle is worth {value}, expected 0", agent + 1)
            }
            Violation::NonMonotone { agent, subset, superset, subset_value, superset_value } => write!(
                f,
                "agent {}: v({{{}}}) = {subset_value} exceeds v({{{}}}) = {superset_value}",
                agent + 1,
                subset.join(","),
                superset.join(",")
            ),
            Violation::EmptyDesiredBundle { agent } => write!(f, "agent {}: desired bundle is empty", agent + 1),
            Violation::NonPositiveValue { agent } => {
                write!(f, "agent {}: single-minded value must be positive", agent + 1)
            }
        }
    }
}

/// Every structural problem found in an instance; empty means valid.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join("; "))
    }
}

pub fn validate_instance(instance: &Instance) -> ValidationReport {
    let mut violations = Vec::new();
    let m = instance.goods.len();
    if instance.valuations.is_empty() {
        violations.push(Violation::NoAgents);
    }
    if m > MAX_GOODS {
        violations.push(Violation::TooManyGoods { goods: m, max: MAX_GOODS });
        return ValidationReport { violations };
    }
    let mut seen = HashSet::new();
    for label in &instance.goods {
        if !seen.insert(label.as_str()) {
            violations.push(Violation::DuplicateGood(label.clone()));
        }
    }
    let all = GoodSet::full(m);
    for (agent, valuation) in instance.valuations.iter().enumerate() {
        match valuation {
            Valuation::Additive(values) => {
                if values.len() != m {
                    violations.push(Violation::WrongLength { agent, expected: m, found: values.len() });
                }
            }
            Valuation::SingleMinded { bundle, value } => {
                if bundle.is_empty() {
                    violations.push(Violation::EmptyDesiredBundle { agent });
                }
                if !bundle.is_subset(all) {
                    violations.push(Violation::GoodOutOfRange { agent });
                }
                if value.is_zero() {
                    violations.push(Violation::NonPositiveValue { agent });
                }
            }
            Valuation::Table(table) => {
                if table.base.len() != m {
                    violations.push(Violation::WrongLength { agent, expected: m, found: table.base.len() });
                }
                if table.overrides.keys().any(|s| !s.is_subset(all)) {
                    violations.push(Violation::GoodOutOfRange { agent });
                }
                if m > MAX_TABLE_GOODS {
                    violations.push(Violation::TableTooLarge { agent, goods: m });
                    continue;
                }
                let empty = table.value_of(GoodSet::EMPTY);
                if !empty.is_zero() {
                    violations.push(Violation::NonzeroEmptySet { agent, value: empty });
                }
                // Covering pairs S ⊂ S+x suffice for monotonicity over 2^M.
                for bits in 0..1u32 << m {
                    let subset = GoodSet(bits);
                    let lower = table.value_of(subset);
                    for good in all.difference(subset).iter() {
                        let superset = subset.with(good);
                        let upper = table.value_of(superset);
                        if lower > upper {
                            violations.push(Violation::NonMonotone {
                                agent,
                                subset: instance.labels(subset),
                                superset: instance.labels(superset),
                                subset_value: lower,
                                superset_value: upper,
                            });
                        }
                    }
                }
            }
        }
    }
    ValidationReport { violations }
}

/// One bundle per agent.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Allocation {
    bundles: Vec<GoodSet>,
}

impl Allocation {
    pub fn new(bundles: Vec<GoodSet>) -> Allocation {
        Allocation { bundles }
    }

    /// From a good→agent assignment vector.
    pub fn from_assignment(assignment: &[usize], agents: usize) -> Allocation {
        let mut bundles = vec![GoodSet::EMPTY; agents];
        for (good, &agent) in assignment.iter().enumerate() {
            bundles[agent].insert(good);
        }
        Allocation { bundles }
    }

    pub fn from_labels<S: AsRef<str>>(instance: &Instance, bundles: &[&[S]]) -> Result<Allocation> {
        let bundles = bundles
            .iter()
            .map(|labels| instance.bundle(labels))
            .collect::<Result<Vec<_>>>()?;
        Ok(Allocation { bundles })
    }

    pub fn agents(&self) -> usize {
        self.bundles.len()
    }

    pub fn bundles(&self) -> &[GoodSet] {
        &self.bundles
    }

    pub fn bundle(&self, agent: usize) -> GoodSet {
        self.bundles[agent]
    }

    pub fn into_bundles(self) -> Vec<GoodSet> {
        self.bundles
    }

    pub fn format(&self, instance: &Instance) -> String {
        self.bundles
            .iter()
            .map(|b| instance.format_set(*b))
            .collect::<Vec<_>>()
            .join(" | ")
    }
}

/// True iff the bundles partition the instance's goods exactly.
pub fn is_complete(instance: &Instance, allocation: &Allocation) -> bool {
    if allocation.bundles.len() != instance.agents() {
        return false;
    }
    let mut seen = GoodSet::EMPTY;
    for bundle in &allocation.bundles {
        if !seen.is_disjoint(*bundle) {
            return false;
        }
        seen = seen.union(*bundle);
    }
    seen == instance.all_goods()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: u32) -> Value {
        Value::from(n)
    }

    fn labels(s: &str) -> Vec<String> {
        s.chars().map(|c| c.to_string()).collect()
    }

    fn table5() -> TableValuation {
        let overrides = [0b011u32, 0b110, 0b101]
            .into_iter()
            .map(|b| (GoodSet::from_bits(b), v(16)))
            .collect();
        TableValuation::new(vec![v(5), v(5), v(5), v(10)], overrides)
    }

    #[test]
    fn additive_value_is_sum_of_members() {
        let inst = Instance::additive(&["a", "b", "c"], &[&[10, 20, 40]]).unwrap();
        assert_eq!(inst.value_of_labels(0, &["a", "b"]).unwrap(), v(30));
        assert_eq!(inst.value(0, GoodSet::EMPTY), Value::ZERO);
    }

    #[test]
    fn unknown_label_is_named() {
        let inst = Instance::additive(&["a"], &[&[1]]).unwrap();
        match inst.value_of_labels(0, &["z"]) {
            Err(Error::UnknownGood(label)) => assert_eq!(label, "z"),
            other => panic!("expected unknown good, got {other:?}"),
        }
    }

    #[test]
    fn single_minded_case_split() {
        let sm = Valuation::SingleMinded { bundle: GoodSet::from_bits(0b011), value: v(7) };
        assert_eq!(sm.value_of(GoodSet::from_bits(0b001)), Value::ZERO);
        assert_eq!(sm.value_of(GoodSet::from_bits(0b111)), v(7));
        assert_eq!(sm.value_of(GoodSet::EMPTY), Value::ZERO);
    }

    #[test]
    fn table_expansion_packs_overrides() {
        let t = table5();
        assert_eq!(t.value_of(GoodSet::from_bits(0b0011)), v(16));
        assert_eq!(t.value_of(GoodSet::from_bits(0b1001)), v(15));
        assert_eq!(t.value_of(GoodSet::from_bits(0b1100)), v(15));
        assert_eq!(t.value_of(GoodSet::from_bits(0b0111)), v(21));
        assert_eq!(t.value_of(GoodSet::from_bits(0b1111)), v(31));
        assert_eq!(t.value_of(GoodSet::EMPTY), Value::ZERO);
        // on-demand evaluation agrees with the expanded table
        for bits in 0..16 {
            assert_eq!(t.evaluate(GoodSet::from_bits(bits)), t.value_of(GoodSet::from_bits(bits)));
        }
    }

    #[test]
    fn table5_valuation_is_valid() {
        let inst = Instance::new_unvalidated(
            labels("abcd"),
            vec![Valuation::Table(table5()), Valuation::Table(table5())],
        );
        assert!(validate_instance(&inst).is_valid());
    }

    #[test]
    fn non_monotone_table_reports_witness() {
        let overrides = [(GoodSet::from_bits(0b11), v(3))].into_iter().collect();
        let table = TableValuation::new(vec![v(5), v(0)], overrides);
        let inst = Instance::new_unvalidated(labels("ab"), vec![Valuation::Table(table)]);
        let report = validate_instance(&inst);
        assert_eq!(
            report.violations,
            vec![Violation::NonMonotone {
                agent: 0,
                subset: labels("a"),
                superset: labels("ab"),
                subset_value: v(5),
                superset_value: v(3),
            }]
        );
        assert!(matches!(Instance::new(inst.goods().to_vec(), inst.valuations().to_vec()), Err(Error::InvalidInstance(_))));
    }

    #[test]
    fn all_zero_additive_is_valid() {
        assert!(Instance::additive(&["a", "b"], &[&[0, 0], &[0, 0]]).is_ok());
    }

    #[test]
    fn structural_violations_are_all_listed() {
        let inst = Instance::new_unvalidated(
            vec!["a".into(), "a".into()],
            vec![
                Valuation::SingleMinded { bundle: GoodSet::EMPTY, value: Value::ZERO },
                Valuation::Additive(vec![v(1)]),
            ],
        );
        let report = validate_instance(&inst);
        assert!(report.violations.contains(&Violation::DuplicateGood("a".into())));
        assert!(report.violations.contains(&Violation::EmptyDesiredBundle { agent: 0 }));
        assert!(report.violations.contains(&Violation::NonPositiveValue { agent: 0 }));
        assert!(report.violations.contains(&Violation::WrongLength { agent: 1, expected: 2, found: 1 }));

        let big = Instance::new_unvalidated(
            (0..17).map(|i| format!("g{i}")).collect(),
            vec![Valuation::Table(TableValuation::new(vec![v(1); 17], BTreeMap::new()))],
        );
        assert_eq!(validate_instance(&big).violations, vec![Violation::TableTooLarge { agent: 0, goods: 17 }]);
        assert!(validate_instance(&Instance::new_unvalidated(vec![], vec![])).violations.contains(&Violation::NoAgents));
    }

    #[test]
    fn completeness() {
        let inst = Instance::additive(&["a", "b", "c"], &[&[1, 1, 1], &[1, 1, 1]]).unwrap();
        let alloc = |a: &[&str], b: &[&str]| Allocation::from_labels(&inst, &[a, b]).unwrap();
        assert!(is_complete(&inst, &alloc(&["a"], &["b", "c"])));
        assert!(!is_complete(&inst, &alloc(&["a"], &["b"])));
        assert!(!is_complete(&inst, &alloc(&["a", "b"], &["b", "c"])));
        assert!(!is_complete(&inst, &Allocation::new(vec![inst.all_goods()])));
    }

    #[test]
    fn good_set_ops() {
        let s: GoodSet = [0, 3, 5].into_iter().collect();
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![0, 3, 5]);
        assert_eq!(s.len(), 3);
        assert!(s.contains(3) && !s.contains(1));
        assert_eq!(s.without(3).with(1).bits(), 0b100011);
        assert!(GoodSet::from_bits(0b1).is_subset(s));
        assert_eq!(GoodSet::full(30).len(), 30);
    }
}
