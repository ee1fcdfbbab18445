//! Disjoint sets with the elder rule bookkeeping needed for degree-0
//! persistence.

use crate::graph::FiltrationWeight;

#[derive(Clone, Copy, Debug)]
struct Component {
    birth: FiltrationWeight,
    /// Vertex that created the component; breaks birth ties.
    founder: usize,
}

impl Component {
    fn older_than(&self, other: &Component) -> bool {
        (self.birth, self.founder) < (other.birth, other.founder)
    }
}

/// The component that lost a merge.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Merged {
    pub founder: usize,
    pub birth: FiltrationWeight,
}

#[derive(Clone, Copy, Debug)]
struct Node {
    parent: usize,
    rank: u8,
    /// Meaningful at roots only.
    component: Component,
}

#[derive(Clone, Debug, Default)]
pub struct ElderUnionFind {
    nodes: Vec<Node>,
}

impl ElderUnionFind {
    pub fn new(n: usize) -> Self {
        let mut uf = ElderUnionFind::default();
        uf.reset(n);
        uf
    }

    /// `n` singletons, reusing the allocation.
    pub fn reset(&mut self, n: usize) {
        self.nodes.clear();
        self.nodes.extend((0..n).map(|v| Node {
            parent: v,
            rank: 0,
            component: Component {
                birth: FiltrationWeight::ZERO,
                founder: v,
            },
        }));
    }

    /// Marks `v` as born at `birth`. Must be called before any union
    /// involving `v`.
    pub fn activate(&mut self, v: usize, birth: FiltrationWeight) {
        self.nodes[v].component = Component { birth, founder: v };
    }

    pub fn find(&mut self, mut v: usize) -> usize {
        let mut root = v;
        while self.nodes[root].parent != root {
            root = self.nodes[root].parent;
        }
        while self.nodes[v].parent != root {
            let next = self.nodes[v].parent;
            self.nodes[v].parent = root;
            v = next;
        }
        root
    }

    /// Joins the components of `a` and `b`. Returns the younger component,
    /// which dies, or `None` when they were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> Option<Merged> {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra == rb {
            return None;
        }
        let (na, nb) = (self.nodes[ra], self.nodes[rb]);
        let (elder, younger) = if na.component.older_than(&nb.component) {
            (na.component, nb.component)
        } else {
            (nb.component, na.component)
        };
        let (root, child) = if na.rank >= nb.rank {
            (ra, rb)
        } else {
            (rb, ra)
        };
        self.nodes[child].parent = root;
        if na.rank == nb.rank {
            self.nodes[root].rank = self.nodes[root].rank.saturating_add(1);
        }
        self.nodes[root].component = elder;
        Some(Merged {
            founder: younger.founder,
            birth: younger.birth,
        })
    }
}
