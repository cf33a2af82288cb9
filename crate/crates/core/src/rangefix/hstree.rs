//! Hitting-set tree over unsatisfiable cores. Soft constraints are numbered
//! `0..n`; an oracle decides whether the hard constraints plus a subset of the
//! softs are satisfiable and names a core when they are not.

use std::collections::{HashSet, VecDeque};
use std::time::Instant;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Check {
    Sat,
    /// Soft indices that together with the hard constraints are unsatisfiable.
    Unsat(Vec<usize>),
    Timeout,
}

pub trait Oracle {
    /// Satisfiability of the hard constraints plus the softs in `active`.
    fn check(&mut self, active: &[usize]) -> Check;
}

#[derive(Clone, Copy, Debug)]
pub struct SearchLimits {
    pub max_diagnoses: usize,
    pub max_nodes: usize,
    pub deadline: Option<Instant>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SearchOutcome {
    /// Minimal diagnoses as sorted soft indices, ordered by size then indices.
    pub diagnoses: Vec<Vec<usize>>,
    pub timed_out: bool,
    /// The hard constraints alone are unsatisfiable.
    pub impossible: bool,
    /// Every minimal diagnosis up to the last explored level was found.
    pub complete: bool,
}

fn active_without(n: usize, removed: &[usize]) -> Vec<usize> {
    (0..n).filter(|i| removed.binary_search(i).is_err()).collect()
}

fn is_subset(small: &[usize], big: &[usize]) -> bool {
    small.iter().all(|x| big.binary_search(x).is_ok())
}

struct Search<'o, O: Oracle> {
    oracle: &'o mut O,
    n: usize,
    limits: SearchLimits,
    out: SearchOutcome,
}

impl<O: Oracle> Search<'_, O> {
    fn expired(&self) -> bool {
        self.limits.deadline.is_some_and(|d| Instant::now() >= d)
    }

    /// Drops elements from a satisfiable removal set while it stays satisfiable.
    fn shrink(&mut self, mut removed: Vec<usize>) -> Option<Vec<usize>> {
        let mut i = 0;
        while i < removed.len() {
            let mut trial = removed.clone();
            trial.remove(i);
            match self.oracle.check(&active_without(self.n, &trial)) {
                Check::Sat => removed = trial,
                Check::Unsat(_) => i += 1,
                Check::Timeout => return None,
            }
        }
        Some(removed)
    }

    fn record(&mut self, d: Vec<usize>) {
        if !self.out.diagnoses.contains(&d) {
            self.out.diagnoses.retain(|x| !is_subset(&d, x));
            self.out.diagnoses.push(d);
        }
    }

    fn run(&mut self) {
        let mut queue: VecDeque<Vec<usize>> = VecDeque::from([Vec::new()]);
        let mut seen: HashSet<Vec<usize>> = HashSet::new();
        let mut cores: Vec<Vec<usize>> = Vec::new();
        let mut nodes = 0;
        let mut level_done_at: Option<usize> = None;
        while let Some(removed) = queue.pop_front() {
            if level_done_at.is_some_and(|l| removed.len() > l) {
                return;
            }
            if self.out.diagnoses.iter().any(|d| is_subset(d, &removed)) {
                continue;
            }
            if nodes >= self.limits.max_nodes {
                self.out.complete = false;
                return;
            }
            if self.expired() {
                self.out.timed_out = true;
                self.out.complete = false;
                return;
            }
            nodes += 1;
            let reused = cores.iter().find(|c| c.iter().all(|x| removed.binary_search(x).is_err())).cloned();
            let result = match reused {
                Some(c) => Check::Unsat(c),
                None => self.oracle.check(&active_without(self.n, &removed)),
            };
            match result {
                Check::Sat => match self.shrink(removed) {
                    Some(d) => {
                        self.record(d);
                        if self.out.diagnoses.len() >= self.limits.max_diagnoses && level_done_at.is_none() {
                            level_done_at = Some(self.out.diagnoses.iter().map(Vec::len).max().unwrap_or(0));
                        }
                    }
                    None => {
                        self.out.timed_out = true;
                        self.out.complete = false;
                        return;
                    }
                },
                Check::Unsat(core) => {
                    if core.is_empty() {
                        self.out.impossible = removed.is_empty();
                        if self.out.impossible {
                            return;
                        }
                        continue;
                    }
                    if !cores.contains(&core) {
                        cores.push(core.clone());
                    }
                    for c in core {
                        let mut child = removed.clone();
                        if let Err(pos) = child.binary_search(&c) {
                            child.insert(pos, c);
                            if seen.insert(child.clone()) {
                                queue.push_back(child);
                            }
                        }
                    }
                }
                Check::Timeout => {
                    self.out.timed_out = true;
                    self.out.complete = false;
                    return;
                }
            }
        }
    }

    /// Grow-based correction sets: keep a seed of softs, add the others
    /// greedily, and report the complement. Each result is minimal.
    fn grow(&mut self, seed: &[usize]) -> Option<Vec<usize>> {
        let mut kept: Vec<usize> = seed.to_vec();
        kept.sort_unstable();
        match self.oracle.check(&kept) {
            Check::Sat => {}
            _ => return None,
        }
        for i in 0..self.n {
            if kept.binary_search(&i).is_ok() {
                continue;
            }
            if self.expired() {
                return None;
            }
            let mut trial = kept.clone();
            let pos = trial.binary_search(&i).unwrap_err();
            trial.insert(pos, i);
            match self.oracle.check(&trial) {
                Check::Sat => kept = trial,
                Check::Unsat(_) => {}
                Check::Timeout => return None,
            }
        }
        Some(active_without(self.n, &kept))
    }

    fn fallback(&mut self) {
        let mut attempts = 0;
        let mut frontier: Vec<Vec<usize>> = self.out.diagnoses.clone();
        while self.out.diagnoses.len() < self.limits.max_diagnoses && attempts < 4 * self.limits.max_diagnoses {
            let Some(d) = frontier.pop() else { break };
            for &keep in &d {
                attempts += 1;
                if let Some(mcs) = self.grow(&[keep]) {
                    if !mcs.is_empty() && !self.out.diagnoses.contains(&mcs) {
                        frontier.push(mcs.clone());
                        self.record(mcs);
                    }
                }
                if self.out.diagnoses.len() >= self.limits.max_diagnoses || self.expired() {
                    return;
                }
            }
        }
    }
}

/// Minimal diagnoses in breadth-first cardinality order. When the node limit
/// stops the tree early, additional minimal correction sets are searched by
/// greedy growth from seeds that exclude the diagnoses already found.
pub fn find_diagnoses<O: Oracle>(oracle: &mut O, n: usize, limits: SearchLimits) -> SearchOutcome {
    let mut s = Search {
        oracle,
        n,
        limits,
        out: SearchOutcome {
            complete: true,
            ..Default::default()
        },
    };
    s.run();
    if !s.out.impossible && !s.out.timed_out && !s.out.complete && s.out.diagnoses.len() < limits.max_diagnoses {
        if s.out.diagnoses.is_empty() {
            if let Some(mcs) = s.grow(&[]) {
                if !mcs.is_empty() {
                    s.record(mcs);
                }
            }
        }
        s.fallback();
    }
    s.out.diagnoses.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    s.out
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Softs are unit facts; hard constraints are a list of forbidden subsets.
    struct SetOracle {
        forbidden: Vec<Vec<usize>>,
    }

    impl Oracle for SetOracle {
        fn check(&mut self, active: &[usize]) -> Check {
            match self.forbidden.iter().find(|f| is_subset(f, active)) {
                Some(f) => Check::Unsat(f.clone()),
                None => Check::Sat,
            }
        }
    }

    fn limits() -> SearchLimits {
        SearchLimits {
            max_diagnoses: 3,
            max_nodes: 64,
            deadline: None,
        }
    }

    #[test]
    fn hitting_sets_of_two_cores() {
        let mut o = SetOracle {
            forbidden: vec![vec![0, 1], vec![1, 2]],
        };
        let out = find_diagnoses(&mut o, 4, limits());
        assert_eq!(out.diagnoses, vec![vec![1], vec![0, 2]]);
        assert!(out.complete);
    }

    #[test]
    fn satisfiable_instance_has_empty_diagnosis() {
        let mut o = SetOracle { forbidden: vec![] };
        assert_eq!(find_diagnoses(&mut o, 3, limits()).diagnoses, vec![Vec::<usize>::new()]);
    }

    #[test]
    fn impossible_hard_constraints() {
        let mut o = SetOracle { forbidden: vec![vec![]] };
        assert!(find_diagnoses(&mut o, 3, limits()).impossible);
    }

    #[test]
    fn fallback_finds_more_when_nodes_run_out() {
        let mut o = SetOracle {
            forbidden: vec![vec![0, 1], vec![2, 3], vec![4, 5]],
        };
        let out = find_diagnoses(
            &mut o,
            6,
            SearchLimits {
                max_nodes: 2,
                ..limits()
            },
        );
        assert_eq!(out.diagnoses.len(), 3);
        for d in &out.diagnoses {
            assert_eq!(d.len(), 3);
        }
    }
}
