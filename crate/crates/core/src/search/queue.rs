//! Indexed binary min-heap with decrease-key.
//!
//! Entries are ordered by `(key, vertex id)`, so equal keys pop the smaller
//! vertex id first and runs are reproducible.

use crate::graph::VertexId;

const ABSENT: usize = usize::MAX;

#[derive(Debug, Clone)]
pub struct IndexedHeap {
    heap: Vec<VertexId>,
    slot: Vec<usize>,
    key: Vec<f64>,
}

impl IndexedHeap {
    pub fn new(capacity: usize) -> Self {
        Self {
            heap: Vec::new(),
            slot: vec![ABSENT; capacity],
            key: vec![f64::INFINITY; capacity],
        }
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.slot[v] != ABSENT
    }

    #[inline]
    fn less(&self, a: VertexId, b: VertexId) -> bool {
        match self.key[a].total_cmp(&self.key[b]) {
            std::cmp::Ordering::Equal => a < b,
            o => o.is_lt(),
        }
    }

    pub fn insert(&mut self, v: VertexId, key: f64) {
        debug_assert!(!self.contains(v));
        self.key[v] = key;
        self.slot[v] = self.heap.len();
        self.heap.push(v);
        self.sift_up(self.heap.len() - 1);
    }

    /// Lowers the key of a queued vertex.
    pub fn decrease_key(&mut self, v: VertexId, key: f64) {
        debug_assert!(self.contains(v));
        debug_assert!(key <= self.key[v]);
        self.key[v] = key;
        self.sift_up(self.slot[v]);
    }

    pub fn pop(&mut self) -> Option<(VertexId, f64)> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().expect("non-empty");
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.slot[last] = 0;
            self.sift_down(0);
        }
        self.slot[top] = ABSENT;
        Some((top, self.key[top]))
    }

    fn sift_up(&mut self, mut i: usize) {
        while i > 0 {
            let parent = (i - 1) / 2;
            if !self.less(self.heap[i], self.heap[parent]) {
                break;
            }
            self.swap(i, parent);
            i = parent;
        }
    }

    fn sift_down(&mut self, mut i: usize) {
        let n = self.heap.len();
        loop {
            let (l, r) = (2 * i + 1, 2 * i + 2);
            let mut best = i;
            if l < n && self.less(self.heap[l], self.heap[best]) {
                best = l;
            }
            if r < n && self.less(self.heap[r], self.heap[best]) {
                best = r;
            }
            if best == i {
                break;
            }
            self.swap(i, best);
            i = best;
        }
    }

    fn swap(&mut self, a: usize, b: usize) {
        self.heap.swap(a, b);
        self.slot[self.heap[a]] = a;
        self.slot[self.heap[b]] = b;
    }
}
