//! Partition refinement, with and without language relaxation.

use std::collections::{HashMap, VecDeque};

use super::DeterministicVts;
use crate::model::StateId;
use crate::semilattice::VerdictDomain;

/// The unique minimal deterministic VTS verdict-equivalent to `d`.
///
/// Missing transitions lead to an implicit trap state of its own class.
pub fn minimize<D: VerdictDomain>(d: &DeterministicVts<D>) -> DeterministicVts<D> {
    refine(d, false)
}

/// A deterministic VTS that may accept more words than `d` but yields the
/// same verdicts on `d`'s language: a class is only split by a splitter if
/// members outside the splitter actually have the transition.
///
/// Splitters are processed in ascending order of their smallest state, so
/// the result is reproducible; it is never larger than [`minimize`]'s.
pub fn minimize_relaxed<D: VerdictDomain>(d: &DeterministicVts<D>) -> DeterministicVts<D> {
    refine(d, true)
}

struct Partition {
    block_of: Vec<usize>,
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    fn min_member(&self, b: usize) -> usize {
        self.blocks[b][0]
    }
}

fn refine<D: VerdictDomain>(d: &DeterministicVts<D>, relaxed: bool) -> DeterministicVts<D> {
    let n = d.num_states();
    let k = d.alphabet().len();
    // In strict mode state `n` is the trap.
    let total = if relaxed { n } else { n + 1 };
    let succ = |q: usize, a: usize| -> Option<usize> {
        if q == n {
            Some(n)
        } else {
            match d.row(StateId(q as u32))[a] {
                Some(t) => Some(t.index()),
                None if relaxed => None,
                None => Some(n),
            }
        }
    };
    let mut pred: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); total]; k];
    for q in 0..total {
        for (a, pa) in pred.iter_mut().enumerate() {
            if let Some(t) = succ(q, a) {
                pa[t].push(q);
            }
        }
    }

    // Initial blocks by canonical verdict, in order of first member.
    let mut key_block: HashMap<String, usize> = HashMap::new();
    let mut part = Partition {
        block_of: vec![0; total],
        blocks: Vec::new(),
    };
    for q in 0..total {
        let key = if q == n {
            None
        } else {
            Some(d.domain().canonical(d.verdict(StateId(q as u32))))
        };
        let b = match key {
            Some(key) => *key_block.entry(key).or_insert_with(|| {
                part.blocks.push(Vec::new());
                part.blocks.len() - 1
            }),
            None => {
                part.blocks.push(Vec::new());
                part.blocks.len() - 1
            }
        };
        part.block_of[q] = b;
        part.blocks[b].push(q);
    }

    let mut work: VecDeque<(usize, usize)> = (0..part.blocks.len())
        .flat_map(|b| (0..k).map(move |a| (b, a)))
        .collect();
    let mut marked = vec![false; total];
    while let Some((splitter, a)) = work.pop_front() {
        let mut hit: Vec<usize> = Vec::new();
        for &t in &part.blocks[splitter] {
            for &q in &pred[a][t] {
                if !marked[q] {
                    marked[q] = true;
                    hit.push(q);
                }
            }
        }
        let mut affected: Vec<usize> = hit.iter().map(|&q| part.block_of[q]).collect();
        affected.sort_unstable_by_key(|&b| part.min_member(b));
        affected.dedup();
        for c in affected {
            let (inside, outside): (Vec<usize>, Vec<usize>) = part.blocks[c].iter().partition(|&&q| marked[q]);
            let split = !outside.is_empty() && (!relaxed || outside.iter().any(|&q| succ(q, a).is_some()));
            if !split {
                continue;
            }
            // The half holding the block's smallest state keeps its index.
            let (keep, moved) = if inside[0] < outside[0] {
                (inside, outside)
            } else {
                (outside, inside)
            };
            let nb = part.blocks.len();
            for &q in &moved {
                part.block_of[q] = nb;
            }
            part.blocks[c] = keep;
            part.blocks.push(moved);
            for x in 0..k {
                work.push_back((c, x));
                work.push_back((nb, x));
            }
        }
        for q in hit {
            marked[q] = false;
        }
    }

    // One state per block of real states.
    let real: Vec<usize> = (0..part.blocks.len()).filter(|&b| part.min_member(b) < n).collect();
    let mut id = vec![None; part.blocks.len()];
    for (i, &b) in real.iter().enumerate() {
        id[b] = Some(StateId(i as u32));
    }
    let mut next = Vec::with_capacity(real.len() * k);
    let mut verdicts = Vec::with_capacity(real.len());
    for &b in &real {
        let members = &part.blocks[b];
        verdicts.push(d.verdict(StateId(members[0] as u32)).clone());
        for a in 0..k {
            let target = members
                .iter()
                .find_map(|&q| d.row(StateId(q as u32))[a])
                .and_then(|t| id[part.block_of[t.index()]]);
            next.push(target);
        }
    }
    DeterministicVts::from_table(
        d.domain().clone(),
        d.alphabet().clone(),
        id[part.block_of[d.initial().index()]].expect("initial state is real"),
        next,
        verdicts,
    )
}
