use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::orbital::{ConstellationSpec, SatId};
use crate::scalar::Scalar;

use super::data::{DataShard, Dataset};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartitionMode {
    /// Shuffled and dealt evenly; every satellite sees every class.
    Iid,
    /// Class subsets per orbit: the first `⌈0.4·L⌉` orbits hold the first
    /// `⌊0.4·C⌋` classes, the remaining orbits hold the other classes.
    NonIid,
}

/// Splits `data` into one disjoint shard per satellite, in (orbit, slot) order.
pub fn partition_data<T: Scalar, S: Scalar>(
    data: &Dataset<T>,
    spec: &ConstellationSpec<S>,
    mode: PartitionMode,
    seed: u64,
) -> Result<Vec<DataShard<T>>> {
    let sats: Vec<SatId> = spec.satellites().collect();
    if data.is_empty() {
        return Err(Error::domain("cannot partition an empty dataset"));
    }
    if data.len() < sats.len() {
        return Err(Error::domain(format!(
            "dataset of {} samples is smaller than the {} satellites",
            data.len(),
            sats.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); sats.len()];
    let groups = match mode {
        PartitionMode::Iid => vec![((0..data.num_classes).collect::<Vec<_>>(), 0..spec.num_orbits)],
        PartitionMode::NonIid => non_iid_groups(data.num_classes, spec.num_orbits),
    };
    for (classes, orbits) in groups {
        let mut members: Vec<usize> = (0..data.len())
            .filter(|&i| classes.contains(&data.label(i)))
            .collect();
        let group_sats = orbits.len() * spec.sats_per_orbit;
        if members.len() < group_sats {
            return Err(Error::domain(format!(
                "classes {classes:?} have {} samples for {group_sats} satellites",
                members.len()
            )));
        }
        members.shuffle(&mut rng);
        // stable sort by label after the shuffle, then deal round-robin: every
        // shard gets an even share of each class and sizes differ by at most one
        members.sort_by_key(|&i| data.label(i));
        let base = orbits.start * spec.sats_per_orbit;
        for (n, i) in members.into_iter().enumerate() {
            rows[base + n % group_sats].push(i);
        }
    }
    Ok(sats
        .into_iter()
        .zip(rows)
        .map(|(owner, mut r)| {
            r.sort_unstable();
            DataShard { owner, data: data.subset(&r) }
        })
        .collect())
}

fn non_iid_groups(num_classes: usize, num_orbits: usize) -> Vec<(Vec<usize>, std::ops::Range<usize>)> {
    let first_classes = (2 * num_classes) / 5;
    let first_orbits = (2 * num_orbits).div_ceil(5);
    if first_classes == 0 || first_classes == num_classes || first_orbits >= num_orbits {
        return vec![((0..num_classes).collect(), 0..num_orbits)];
    }
    vec![
        ((0..first_classes).collect(), 0..first_orbits),
        ((first_classes..num_classes).collect(), first_orbits..num_orbits),
    ]
}
