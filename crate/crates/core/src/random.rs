//! Seeded instance generators for property suites.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::{Allocation, GoodSet, Instance, Valuation};
use crate::value::Value;

/// Deterministic generator shared by tests and the CLI.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `a, b, …, z`, then `g26, g27, …`.
pub fn labels(m: usize) -> Vec<String> {
    (0..m)
        .map(|k| match u8::try_from(k) {
            Ok(k) if k < 26 => char::from(b'a' + k).to_string(),
            _ => format!("g{k}"),
        })
        .collect()
}

fn additive_row(rng: &mut impl Rng, m: usize, max: u32) -> Valuation {
    Valuation::Additive((0..m).map(|_| Value::from(rng.gen_range(0..=max))).collect())
}

/// Independent additive valuations with integer values in `0..=max`.
pub fn additive(rng: &mut impl Rng, agents: usize, goods: usize, max: u32) -> Instance {
    let valuations = (0..agents).map(|_| additive_row(rng, goods, max)).collect();
    Instance::new(labels(goods), valuations).expect("additive rows are valid")
}

/// One additive valuation shared by every agent.
pub fn identical_additive(rng: &mut impl Rng, agents: usize, goods: usize, max: u32) -> Instance {
    let row = additive_row(rng, goods, max);
    Instance::new(labels(goods), vec![row; agents]).expect("additive rows are valid")
}

/// Single-minded agents with uniformly drawn nonempty bundles and values in `1..=max`.
pub fn single_minded(rng: &mut impl Rng, agents: usize, goods: usize, max: u32) -> Instance {
    assert!(goods > 0, "single-minded agents need at least one good");
    let valuations = (0..agents)
        .map(|_| Valuation::SingleMinded {
            bundle: GoodSet::from_bits(rng.gen_range(1..1u32 << goods)),
            value: Value::from(rng.gen_range(1..=max)),
        })
        .collect();
    Instance::new(labels(goods), valuations).expect("single-minded bundles are valid")
}

/// Uniformly random complete allocation.
pub fn allocation(rng: &mut impl Rng, instance: &Instance) -> Allocation {
    let assignment: Vec<usize> = (0..instance.goods_count())
        .map(|_| rng.gen_range(0..instance.agents()))
        .collect();
    Allocation::from_assignment(&assignment, instance.agents())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::is_complete;

    #[test]
    fn generators_are_seeded() {
        let a = additive(&mut rng(7), 3, 5, 10);
        let b = additive(&mut rng(7), 3, 5, 10);
        assert_eq!(a, b);
        assert!(identical_additive(&mut rng(1), 3, 4, 9).is_identical());
        let inst = single_minded(&mut rng(2), 4, 6, 5);
        assert!(is_complete(&inst, &allocation(&mut rng(3), &inst)));
    }

    #[test]
    fn label_scheme() {
        assert_eq!(labels(3), ["a", "b", "c"]);
        assert_eq!(labels(28)[26..], ["g26", "g27"]);
    }
}
