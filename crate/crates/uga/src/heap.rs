//! Indexed binary max-heap over dense ids 0..m-1 with float keys.
//! Equal keys order by smaller id so pops are deterministic.

const ABSENT: usize = usize::MAX;

#[derive(Debug, Clone)]
pub(crate) struct IndexedMaxHeap {
    heap: Vec<usize>,
    pos: Vec<usize>,
    keys: Vec<f64>,
}

impl IndexedMaxHeap {
    /// Builds a heap containing every id 0..keys.len() with the given keys.
    pub fn build(keys: Vec<f64>) -> Self {
        let m = keys.len();
        let heap: Vec<usize> = (0..m).collect();
        let pos: Vec<usize> = (0..m).collect();
        let mut h = IndexedMaxHeap { heap, pos, keys };
        if m > 1 {
            for i in (0..m / 2).rev() {
                h.sift_down(i);
            }
        }
        h
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn contains(&self, id: usize) -> bool {
        self.pos[id] != ABSENT
    }

    pub fn key(&self, id: usize) -> f64 {
        self.keys[id]
    }

    pub fn peek(&self) -> Option<(usize, f64)> {
        self.heap.first().map(|&id| (id, self.keys[id]))
    }

    pub fn pop(&mut self) -> Option<(usize, f64)> {
        let top = *self.heap.first()?;
        let key = self.keys[top];
        let last = self.heap.len() - 1;
        self.heap.swap(0, last);
        self.pos[self.heap[0]] = 0;
        self.heap.pop();
        self.pos[top] = ABSENT;
        if !self.heap.is_empty() {
            self.sift_down(0);
        }
        Some((top, key))
    }

    /// Inserts an id that is currently absent.
    pub fn push(&mut self, id: usize, key: f64) {
        debug_assert_eq!(self.pos[id], ABSENT);
        self.keys[id] = key;
        self.pos[id] = self.heap.len();
        self.heap.push(id);
        self.sift_up(self.heap.len() - 1);
    }

    /// Changes the key of a present id and restores heap order.
    pub fn update(&mut self, id: usize, key: f64) {
        debug_assert_ne!(self.pos[id], ABSENT);
        let old = self.keys[id];
        self.keys[id] = key;
        let p = self.pos[id];
        if Self::ranks_above(key, id, old, id) || key > old {
            self.sift_up(p);
        } else {
            self.sift_down(p);
        }
    }

    /// Rewrites all keys (ids currently in the heap keep membership) and
    /// re-heapifies in O(m).
    pub fn rebuild(&mut self, keys: Vec<f64>) {
        debug_assert_eq!(keys.len(), self.keys.len());
        self.keys = keys;
        let m = self.heap.len();
        if m > 1 {
            for i in (0..m / 2).rev() {
                self.sift_down(i);
            }
        }
    }

    fn ranks_above(ka: f64, ia: usize, kb: f64, ib: usize) -> bool {
        ka > kb || (ka == kb && ia < ib)
    }

    fn better(&self, a: usize, b: usize) -> bool {
        let (ia, ib) = (self.heap[a], self.heap[b]);
        Self::ranks_above(self.keys[ia], ia, self.keys[ib], ib)
    }

    fn sift_up(&mut self, mut i: usize) {
        while i > 0 {
            let parent = (i - 1) / 2;
            if self.better(i, parent) {
                self.swap(i, parent);
                i = parent;
            } else {
                break;
            }
        }
    }

    fn sift_down(&mut self, mut i: usize) {
        let len = self.heap.len();
        loop {
            let l = 2 * i + 1;
            if l >= len {
                break;
            }
            let r = l + 1;
            let mut best = l;
            if r < len && self.better(r, l) {
                best = r;
            }
            if self.better(best, i) {
                self.swap(i, best);
                i = best;
            } else {
                break;
            }
        }
    }

    fn swap(&mut self, a: usize, b: usize) {
        self.heap.swap(a, b);
        self.pos[self.heap[a]] = a;
        self.pos[self.heap[b]] = b;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pops_in_descending_key_order() {
        let mut h = IndexedMaxHeap::build(vec![3.0, 1.0, 4.0, 1.5, 9.0, 2.6]);
        let mut out = Vec::new();
        while let Some((id, _)) = h.pop() {
            out.push(id);
        }
        assert_eq!(out, vec![4, 2, 0, 5, 3, 1]);
    }

    #[test]
    fn equal_keys_pop_smallest_id_first() {
        let mut h = IndexedMaxHeap::build(vec![2.0, 5.0, 5.0, 5.0, 1.0]);
        assert_eq!(h.pop().unwrap().0, 1);
        assert_eq!(h.pop().unwrap().0, 2);
        assert_eq!(h.pop().unwrap().0, 3);
        assert_eq!(h.pop().unwrap().0, 0);
        assert_eq!(h.pop().unwrap().0, 4);
        assert!(h.pop().is_none());
    }

    #[test]
    fn update_and_reinsert() {
        let mut h = IndexedMaxHeap::build(vec![1.0, 2.0, 3.0]);
        h.update(0, 10.0);
        assert_eq!(h.peek().unwrap().0, 0);
        let (id, key) = h.pop().unwrap();
        assert_eq!((id, key), (0, 10.0));
        assert!(!h.contains(0));
        h.push(0, 2.5);
        assert_eq!(h.pop().unwrap().0, 2);
        assert_eq!(h.pop().unwrap().0, 0);
        assert_eq!(h.pop().unwrap().0, 1);
    }

    #[test]
    fn random_ops_match_scan() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let m = 64;
        let keys: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..10.0)).collect();
        let mut h = IndexedMaxHeap::build(keys.clone());
        let mut shadow = keys;
        for _ in 0..500 {
            let id = rng.gen_range(0..m);
            let k = rng.gen_range(0.0..10.0);
            if h.contains(id) {
                h.update(id, k);
                shadow[id] = k;
            }
            let (top, key) = h.peek().unwrap();
            let best = (0..m)
                .filter(|&i| h.contains(i))
                .max_by(|&a, &b| {
                    shadow[a]
                        .partial_cmp(&shadow[b])
                        .unwrap()
                        .then(b.cmp(&a))
                })
                .unwrap();
            assert_eq!(top, best);
            assert_eq!(key, shadow[best]);
        }
    }
}
