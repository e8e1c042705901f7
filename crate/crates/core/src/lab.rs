//! Random permutation groups on small point sets, for exercising the motion
//! machinery away from any graph.

use std::collections::{HashSet, VecDeque};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::layered::VertexId;
use crate::perm::{PermSet, Permutation};

/// Points `0..n` as vertex ids.
pub fn points(n: usize) -> Arc<[VertexId]> {
    (0..n as u64).map(VertexId).collect()
}

/// Image table of a random generator: a uniform permutation, or (with equal
/// probability) a product of disjoint cycles of one random length covering as
/// many points as fit.
pub fn random_generator<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<u32> {
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.shuffle(rng);
    if n < 2 || rng.gen_bool(0.5) {
        return order;
    }
    let len = rng.gen_range(2..=n);
    let mut images: Vec<u32> = (0..n as u32).collect();
    for cycle in order.chunks_exact(len) {
        for (i, &v) in cycle.iter().enumerate() {
            images[v as usize] = cycle[(i + 1) % len];
        }
    }
    images
}

/// Closure of the given image tables under composition. Fails with
/// [`Error::CapExceeded`] once more than `cap` elements are found.
pub fn generated_group(n: usize, gens: &[Vec<u32>], cap: usize) -> Result<PermSet> {
    let identity: Vec<u32> = (0..n as u32).collect();
    let mut seen: HashSet<Vec<u32>> = HashSet::from([identity.clone()]);
    let mut queue = VecDeque::from([identity]);
    while let Some(p) = queue.pop_front() {
        for g in gens {
            let q: Vec<u32> = p.iter().map(|&i| g[i as usize]).collect();
            if seen.insert(q.clone()) {
                if seen.len() > cap {
                    return Err(Error::CapExceeded { cap, partial: Vec::new() });
                }
                queue.push_back(q);
            }
        }
    }
    let domain = points(n);
    let elements = seen
        .into_iter()
        .map(|images| Permutation::from_positions(domain.clone(), images))
        .collect::<Result<Vec<_>>>()?;
    PermSet::new(elements, true, cap)
}

/// Redraws allowed per generator count before trying one generator fewer.
const REDRAWS: usize = 16;

/// The nonidentity elements of a group generated by up to `generators` random
/// generators on `n` points. Draws are repeated until the group has at most
/// `cap` elements and some nonidentity element; every [`REDRAWS`] failures the
/// generator count drops by one.
pub fn random_nontrivial_group<R: Rng + ?Sized>(rng: &mut R, n: usize, generators: usize, cap: usize) -> PermSet {
    let mut count = generators.max(1);
    for attempt in 1.. {
        if attempt % REDRAWS == 0 && count > 1 {
            count -= 1;
        }
        let gens: Vec<Vec<u32>> = (0..count).map(|_| random_generator(rng, n)).collect();
        if let Ok(group) = generated_group(n, &gens, cap) {
            let set = group.filter(false, |p| !p.is_identity());
            if !set.is_empty() {
                return set;
            }
        }
    }
    unreachable!("the attempt counter is unbounded")
}
