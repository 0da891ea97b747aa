//! Reduced ordered binary decision diagrams with exact model counting.
//!
//! Variables are ordered by index (feature declaration order). Assignments
//! are bitmasks where bit `i` is the value of variable `i`, which caps the
//! store at 127 variables so counts fit in a `u128`.

use std::collections::HashMap;

use rand::Rng;

use crate::formula::Formula;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(u32);

impl NodeId {
    pub const FALSE: NodeId = NodeId(0);
    pub const TRUE: NodeId = NodeId(1);

    pub fn is_terminal(self) -> bool {
        self.0 < 2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Node {
    var: u32,
    lo: NodeId,
    hi: NodeId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Op {
    And,
    Or,
}

#[derive(Debug)]
pub struct BddStore {
    num_vars: u32,
    nodes: Vec<Node>,
    unique: HashMap<Node, NodeId>,
    apply_cache: HashMap<(Op, NodeId, NodeId), NodeId>,
    not_cache: HashMap<NodeId, NodeId>,
    count_cache: HashMap<NodeId, u128>,
}

impl BddStore {
    pub const MAX_VARS: usize = 127;

    pub fn new(num_vars: usize) -> Self {
        assert!(num_vars <= Self::MAX_VARS, "too many BDD variables");
        let n = num_vars as u32;
        let terminal = |id| Node {
            var: n,
            lo: NodeId(id),
            hi: NodeId(id),
        };
        BddStore {
            num_vars: n,
            nodes: vec![terminal(0), terminal(1)],
            unique: HashMap::new(),
            apply_cache: HashMap::new(),
            not_cache: HashMap::new(),
            count_cache: HashMap::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars as usize
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    fn var_of(&self, n: NodeId) -> u32 {
        self.nodes[n.0 as usize].var
    }

    fn mk(&mut self, var: u32, lo: NodeId, hi: NodeId) -> NodeId {
        if lo == hi {
            return lo;
        }
        let node = Node { var, lo, hi };
        if let Some(&id) = self.unique.get(&node) {
            return id;
        }
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(node);
        self.unique.insert(node, id);
        id
    }

    pub fn constant(&self, value: bool) -> NodeId {
        if value {
            NodeId::TRUE
        } else {
            NodeId::FALSE
        }
    }

    pub fn var(&mut self, i: usize) -> NodeId {
        assert!(i < self.num_vars as usize);
        self.mk(i as u32, NodeId::FALSE, NodeId::TRUE)
    }

    pub fn not(&mut self, n: NodeId) -> NodeId {
        match n {
            NodeId::FALSE => return NodeId::TRUE,
            NodeId::TRUE => return NodeId::FALSE,
            _ => {}
        }
        if let Some(&r) = self.not_cache.get(&n) {
            return r;
        }
        let Node { var, lo, hi } = self.nodes[n.0 as usize];
        let (lo, hi) = (self.not(lo), self.not(hi));
        let r = self.mk(var, lo, hi);
        self.not_cache.insert(n, r);
        r
    }

    pub fn and(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.apply(Op::And, a, b)
    }

    pub fn or(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.apply(Op::Or, a, b)
    }

    /// `a & !b`.
    pub fn diff(&mut self, a: NodeId, b: NodeId) -> NodeId {
        let nb = self.not(b);
        self.and(a, nb)
    }

    pub fn implies(&mut self, a: NodeId, b: NodeId) -> bool {
        self.diff(a, b) == NodeId::FALSE
    }

    fn apply(&mut self, op: Op, a: NodeId, b: NodeId) -> NodeId {
        match (op, a, b) {
            (Op::And, NodeId::FALSE, _) | (Op::And, _, NodeId::FALSE) => return NodeId::FALSE,
            (Op::And, NodeId::TRUE, x) | (Op::And, x, NodeId::TRUE) => return x,
            (Op::Or, NodeId::TRUE, _) | (Op::Or, _, NodeId::TRUE) => return NodeId::TRUE,
            (Op::Or, NodeId::FALSE, x) | (Op::Or, x, NodeId::FALSE) => return x,
            _ => {}
        }
        if a == b {
            return a;
        }
        let key = (op, a.min(b), a.max(b));
        if let Some(&r) = self.apply_cache.get(&key) {
            return r;
        }
        let (na, nb) = (self.nodes[a.0 as usize], self.nodes[b.0 as usize]);
        let var = na.var.min(nb.var);
        let (alo, ahi) = if na.var == var { (na.lo, na.hi) } else { (a, a) };
        let (blo, bhi) = if nb.var == var { (nb.lo, nb.hi) } else { (b, b) };
        let lo = self.apply(op, alo, blo);
        let hi = self.apply(op, ahi, bhi);
        let r = self.mk(var, lo, hi);
        self.apply_cache.insert(key, r);
        r
    }

    /// Builds the diagram of `f`; `index` maps variable names to indices.
    pub fn from_formula(&mut self, f: &Formula, index: &impl Fn(&str) -> Option<usize>) -> Option<NodeId> {
        Some(match f {
            Formula::Const(b) => self.constant(*b),
            Formula::Var(v) => self.var(index(v)?),
            Formula::Not(inner) => {
                let n = self.from_formula(inner, index)?;
                self.not(n)
            }
            Formula::And(fs) | Formula::Or(fs) => {
                let is_and = matches!(f, Formula::And(_));
                let mut acc = self.constant(is_and);
                for part in fs {
                    let n = self.from_formula(part, index)?;
                    acc = if is_and { self.and(acc, n) } else { self.or(acc, n) };
                }
                acc
            }
            Formula::Implies(a, b) => {
                let na = self.from_formula(a, index)?;
                let nb = self.from_formula(b, index)?;
                let not_a = self.not(na);
                self.or(not_a, nb)
            }
            Formula::Iff(a, b) => {
                let na = self.from_formula(a, index)?;
                let nb = self.from_formula(b, index)?;
                let both = self.and(na, nb);
                let (not_a, not_b) = (self.not(na), self.not(nb));
                let neither = self.and(not_a, not_b);
                self.or(both, neither)
            }
        })
    }

    /// The diagram accepting exactly the assignment `mask`.
    pub fn minterm(&mut self, mask: u128) -> NodeId {
        let mut acc = NodeId::TRUE;
        for var in (0..self.num_vars).rev() {
            acc = if mask >> var & 1 == 1 {
                self.mk(var, NodeId::FALSE, acc)
            } else {
                self.mk(var, acc, NodeId::FALSE)
            };
        }
        acc
    }

    pub fn eval(&self, mut n: NodeId, assignment: u128) -> bool {
        while !n.is_terminal() {
            let node = self.nodes[n.0 as usize];
            n = if assignment >> node.var & 1 == 1 { node.hi } else { node.lo };
        }
        n == NodeId::TRUE
    }

    // Satisfying assignments of the variables from var(n) on.
    fn count_from(&mut self, n: NodeId) -> u128 {
        match n {
            NodeId::FALSE => return 0,
            NodeId::TRUE => return 1,
            _ => {}
        }
        if let Some(&c) = self.count_cache.get(&n) {
            return c;
        }
        let node = self.nodes[n.0 as usize];
        let lo = self.count_from(node.lo) << (self.var_of(node.lo) - node.var - 1);
        let hi = self.count_from(node.hi) << (self.var_of(node.hi) - node.var - 1);
        let c = lo + hi;
        self.count_cache.insert(n, c);
        c
    }

    /// Exact number of satisfying assignments over all variables.
    pub fn count(&mut self, n: NodeId) -> u128 {
        self.count_from(n) << self.var_of(n)
    }

    /// Uniformly random satisfying assignment; `None` for the false diagram.
    pub fn sample(&mut self, n: NodeId, rng: &mut impl Rng) -> Option<u128> {
        if n == NodeId::FALSE {
            return None;
        }
        let mut mask = 0u128;
        let free_until = |mask: &mut u128, from: u32, to: u32, rng: &mut dyn rand::RngCore| {
            for v in from..to {
                if rng.next_u32() & 1 == 1 {
                    *mask |= 1 << v;
                }
            }
        };
        free_until(&mut mask, 0, self.var_of(n), rng);
        let mut cur = n;
        while !cur.is_terminal() {
            let node = self.nodes[cur.0 as usize];
            let lo_w = self.count_from(node.lo) << (self.var_of(node.lo) - node.var - 1);
            let hi_w = self.count_from(node.hi) << (self.var_of(node.hi) - node.var - 1);
            let pick_hi = rng.random_range(0..lo_w + hi_w) >= lo_w;
            let next = if pick_hi {
                mask |= 1 << node.var;
                node.hi
            } else {
                node.lo
            };
            free_until(&mut mask, node.var + 1, self.var_of(next), rng);
            cur = next;
        }
        Some(mask)
    }

    /// All satisfying assignments in ascending order. Only for small counts.
    pub fn models(&mut self, n: NodeId) -> Vec<u128> {
        let mut out = Vec::new();
        for cube in self.cubes(n) {
            let free: Vec<u32> = (0..self.num_vars).filter(|v| !cube.iter().any(|(cv, _)| *cv == *v)).collect();
            let base: u128 = cube.iter().filter(|(_, b)| *b).fold(0, |m, (v, _)| m | 1 << v);
            for bits in 0u128..(1u128 << free.len()) {
                let mut m = base;
                for (j, v) in free.iter().enumerate() {
                    if bits >> j & 1 == 1 {
                        m |= 1 << v;
                    }
                }
                out.push(m);
            }
        }
        out.sort_unstable();
        out
    }

    /// Disjoint cubes, one per path to the true terminal, in lo-before-hi order.
    pub fn cubes(&self, n: NodeId) -> Vec<Vec<(u32, bool)>> {
        fn walk(store: &BddStore, n: NodeId, path: &mut Vec<(u32, bool)>, out: &mut Vec<Vec<(u32, bool)>>) {
            match n {
                NodeId::FALSE => {}
                NodeId::TRUE => out.push(path.clone()),
                _ => {
                    let node = store.nodes[n.0 as usize];
                    path.push((node.var, false));
                    walk(store, node.lo, path, out);
                    path.pop();
                    path.push((node.var, true));
                    walk(store, node.hi, path, out);
                    path.pop();
                }
            }
        }
        let mut out = Vec::new();
        walk(self, n, &mut Vec::new(), &mut out);
        out
    }
}
