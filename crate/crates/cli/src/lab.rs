//! The `motion-lab` subcommand: double counting, the motion bound and the
//! two search strategies on random permutation groups.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use symbreak::lab::{points, random_nontrivial_group};
use symbreak::motion::{
    bound_check, double_count_check, search_breaking_coloring, BoundCheck, DoubleCount, Strategy, DOUBLE_COUNT_LIMIT,
};
use symbreak::perm::GroupMotion;
use symbreak::seed::sub_seed;
use symbreak::{Error, Result};

use crate::config::LabConfig;

#[derive(Debug, Serialize)]
pub struct LabInstance {
    pub index: usize,
    pub points: usize,
    pub elements: usize,
    pub double_count: Option<DoubleCount>,
    pub bound: BoundCheck,
    /// Colorings scanned before the first breaking one, when the bound holds.
    pub exhaustive_tries: Option<u64>,
    pub randomized_tries: Option<u64>,
    /// Single uniform colorings that failed to break the set.
    pub single_try_failures: u64,
    /// `|A| 2^(-m/2)`, the union bound on the single-try failure probability.
    pub failure_bound: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct LabSummary {
    pub instances: usize,
    pub double_count_checked: usize,
    pub double_count_equal: usize,
    pub bound_holds: usize,
    pub exhaustive_success: usize,
    pub trials: u64,
    pub single_try_failures: u64,
    pub mean_failure_bound: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct LabReport {
    pub summary: LabSummary,
    pub instances: Vec<LabInstance>,
}

pub fn run(cfg: &LabConfig, seed: u64, max_tries: u64) -> Result<LabReport> {
    if cfg.min_points < 2 || cfg.min_points > cfg.max_points {
        return Err(Error::InvalidParameter(format!(
            "need 2 <= --min-points <= --max-points, got {} and {}",
            cfg.min_points, cfg.max_points
        )));
    }
    if cfg.generators == 0 {
        return Err(Error::InvalidParameter("--generators must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut instances = Vec::with_capacity(cfg.instances);
    for index in 0..cfg.instances {
        let n = rng.gen_range(cfg.min_points..=cfg.max_points);
        let set = random_nontrivial_group(&mut rng, n, cfg.generators, cfg.group_cap);
        let support = points(n);
        let double_count =
            if n <= DOUBLE_COUNT_LIMIT { Some(double_count_check(&set, &support, DOUBLE_COUNT_LIMIT)?) } else { None };
        let bound = bound_check(&set, &support)?;
        let mut inst = LabInstance {
            index,
            points: n,
            elements: set.len(),
            double_count,
            bound,
            exhaustive_tries: None,
            randomized_tries: None,
            single_try_failures: 0,
            failure_bound: None,
        };
        if bound.holds {
            match search_breaking_coloring(&set, &support, Strategy::Exhaustive, false) {
                Ok(o) => inst.exhaustive_tries = Some(o.stats.tries),
                Err(Error::NoBreakingColoring { .. } | Error::Unbreakable { .. }) => {}
                Err(e) => return Err(e),
            }
            let s = sub_seed(seed, index as u64, 0);
            match search_breaking_coloring(&set, &support, Strategy::Randomized { seed: s, max_tries }, false) {
                Ok(o) => inst.randomized_tries = Some(o.stats.tries),
                Err(Error::RandomizedExhausted { .. }) => {}
                Err(e) => return Err(e),
            }
            for t in 0..cfg.trials {
                let single = Strategy::Randomized { seed: sub_seed(seed, index as u64, t + 1), max_tries: 1 };
                match search_breaking_coloring(&set, &support, single, false) {
                    Ok(_) => {}
                    Err(Error::RandomizedExhausted { .. }) => inst.single_try_failures += 1,
                    Err(e) => return Err(e),
                }
            }
            if let GroupMotion::Finite(m) = bound.group_motion {
                inst.failure_bound = Some(bound.set_size as f64 * 2f64.powf(-(m as f64) / 2.0));
            }
        }
        instances.push(inst);
    }
    let holding: Vec<&LabInstance> = instances.iter().filter(|i| i.bound.holds).collect();
    let bounds: Vec<f64> = holding.iter().filter_map(|i| i.failure_bound).collect();
    let summary = LabSummary {
        instances: instances.len(),
        double_count_checked: instances.iter().filter(|i| i.double_count.is_some()).count(),
        double_count_equal: instances.iter().filter(|i| i.double_count.is_some_and(|d| d.equal)).count(),
        bound_holds: holding.len(),
        exhaustive_success: holding.iter().filter(|i| i.exhaustive_tries.is_some()).count(),
        trials: cfg.trials * holding.len() as u64,
        single_try_failures: holding.iter().map(|i| i.single_try_failures).sum(),
        mean_failure_bound: (!bounds.is_empty()).then(|| bounds.iter().sum::<f64>() / bounds.len() as f64),
    };
    Ok(LabReport { summary, instances })
}
