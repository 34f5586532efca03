//! Indexed binary min-heap with decrease-key, keyed by `(f64, id)`.
//!
//! Equal keys are ordered by the lower id so extraction order is fully
//! deterministic.

const ABSENT: usize = usize::MAX;

#[derive(Debug, Clone)]
pub struct IndexedMinHeap {
    heap: Vec<usize>,
    keys: Vec<f64>,
    /// Heap slot of each id, or `ABSENT`.
    slot: Vec<usize>,
}

impl IndexedMinHeap {
    pub fn with_capacity(n: usize) -> Self {
        IndexedMinHeap {
            heap: Vec::new(),
            keys: vec![f64::INFINITY; n],
            slot: vec![ABSENT; n],
        }
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn contains(&self, id: usize) -> bool {
        self.slot[id] != ABSENT
    }

    pub fn key(&self, id: usize) -> Option<f64> {
        self.contains(id).then(|| self.keys[id])
    }

    #[inline]
    fn less(&self, a: usize, b: usize) -> bool {
        match self.keys[a].total_cmp(&self.keys[b]) {
            std::cmp::Ordering::Less => true,
            std::cmp::Ordering::Greater => false,
            std::cmp::Ordering::Equal => a < b,
        }
    }

    /// Insert `id` with `key`. Panics if `id` is already queued.
    pub fn insert(&mut self, id: usize, key: f64) {
        assert!(!self.contains(id), "id {id} already in queue");
        self.keys[id] = key;
        self.slot[id] = self.heap.len();
        self.heap.push(id);
        self.sift_up(self.heap.len() - 1);
    }

    /// Lower the key of a queued id. Panics if the key would increase.
    pub fn decrease_key(&mut self, id: usize, key: f64) {
        let pos = self.slot[id];
        assert!(pos != ABSENT, "id {id} not in queue");
        assert!(key <= self.keys[id], "decrease_key would increase the key");
        self.keys[id] = key;
        self.sift_up(pos);
    }

    pub fn peek_min(&self) -> Option<(usize, f64)> {
        self.heap.first().map(|&id| (id, self.keys[id]))
    }

    pub fn extract_min(&mut self) -> Option<(usize, f64)> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().expect("non-empty");
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.slot[last] = 0;
            self.sift_down(0);
        }
        self.slot[top] = ABSENT;
        Some((top, self.keys[top]))
    }

    fn sift_up(&mut self, mut pos: usize) {
        let id = self.heap[pos];
        while pos > 0 {
            let parent = (pos - 1) / 2;
            let pid = self.heap[parent];
            if !self.less(id, pid) {
                break;
            }
            self.heap[pos] = pid;
            self.slot[pid] = pos;
            pos = parent;
        }
        self.heap[pos] = id;
        self.slot[id] = pos;
    }

    fn sift_down(&mut self, mut pos: usize) {
        let id = self.heap[pos];
        let n = self.heap.len();
        loop {
            let l = 2 * pos + 1;
            if l >= n {
                break;
            }
            let r = l + 1;
            let child = if r < n && self.less(self.heap[r], self.heap[l]) {
                r
            } else {
                l
            };
            let cid = self.heap[child];
            if !self.less(cid, id) {
                break;
            }
            self.heap[pos] = cid;
            self.slot[cid] = pos;
            pos = child;
        }
        self.heap[pos] = id;
        self.slot[id] = pos;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ties_break_by_lower_id() {
        let mut q = IndexedMinHeap::with_capacity(4);
        q.insert(3, 1.0);
        q.insert(1, 1.0);
        q.insert(2, 0.5);
        assert_eq!(q.extract_min(), Some((2, 0.5)));
        assert_eq!(q.extract_min(), Some((1, 1.0)));
        assert_eq!(q.extract_min(), Some((3, 1.0)));
        assert!(q.extract_min().is_none());
    }

    proptest! {
        #[test]
        fn extracts_in_sorted_order(ops in prop::collection::vec((0usize..64, 0.0f64..100.0, any::<bool>()), 1..200)) {
            let mut q = IndexedMinHeap::with_capacity(64);
            let mut model: std::collections::BTreeMap<usize, f64> = Default::default();
            for (id, key, _) in &ops {
                match model.get(id) {
                    None => { q.insert(*id, *key); model.insert(*id, *key); }
                    Some(&k) if *key < k => { q.decrease_key(*id, *key); model.insert(*id, *key); }
                    _ => {}
                }
            }
            let mut expected: Vec<(usize, f64)> = model.into_iter().collect();
            expected.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
            let mut got = Vec::new();
            while let Some(x) = q.extract_min() { got.push(x); }
            prop_assert_eq!(got, expected);
        }
    }
}
