/// Binary max-heap of variable indices ordered by activity, ties broken by
/// lower index first so the initial decision order follows variable ids.
#[derive(Debug, Default, Clone)]
pub(crate) struct VarHeap {
    heap: Vec<u32>,
    position: Vec<Option<usize>>,
}

impl VarHeap {
    pub fn grow(&mut self, num_vars: usize) {
        if self.position.len() < num_vars {
            self.position.resize(num_vars, None);
        }
    }

    pub fn contains(&self, v: u32) -> bool {
        self.position.get(v as usize).is_some_and(|p| p.is_some())
    }

    fn before(activity: &[f64], a: u32, b: u32) -> bool {
        let (x, y) = (activity[a as usize], activity[b as usize]);
        x > y || (x == y && a < b)
    }

    pub fn insert(&mut self, v: u32, activity: &[f64]) {
        self.grow(v as usize + 1);
        if self.contains(v) {
            return;
        }
        self.heap.push(v);
        let i = self.heap.len() - 1;
        self.position[v as usize] = Some(i);
        self.sift_up(i, activity);
    }

    /// Restores the heap property after `v`'s activity increased.
    pub fn increased(&mut self, v: u32, activity: &[f64]) {
        if let Some(Some(i)) = self.position.get(v as usize).copied() {
            self.sift_up(i, activity);
        }
    }

    pub fn pop(&mut self, activity: &[f64]) -> Option<u32> {
        if self.heap.is_empty() {
            return None;
        }
        let top = self.heap.swap_remove(0);
        self.position[top as usize] = None;
        if !self.heap.is_empty() {
            self.position[self.heap[0] as usize] = Some(0);
            self.sift_down(0, activity);
        }
        Some(top)
    }

    fn sift_up(&mut self, mut i: usize, activity: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            let p = self.heap[parent];
            if !Self::before(activity, v, p) {
                break;
            }
            self.heap[i] = p;
            self.position[p as usize] = Some(i);
            i = parent;
        }
        self.heap[i] = v;
        self.position[v as usize] = Some(i);
    }

    fn sift_down(&mut self, mut i: usize, activity: &[f64]) {
        let v = self.heap[i];
        let n = self.heap.len();
        loop {
            let left = 2 * i + 1;
            if left >= n {
                break;
            }
            let right = left + 1;
            let child = if right < n && Self::before(activity, self.heap[right], self.heap[left]) {
                right
            } else {
                left
            };
            let c = self.heap[child];
            if !Self::before(activity, c, v) {
                break;
            }
            self.heap[i] = c;
            self.position[c as usize] = Some(i);
            i = child;
        }
        self.heap[i] = v;
        self.position[v as usize] = Some(i);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pops_by_activity_then_index() {
        let activity = vec![1.0, 3.0, 3.0, 0.5];
        let mut h = VarHeap::default();
        for v in [3, 0, 2, 1] {
            h.insert(v, &activity);
        }
        let order: Vec<u32> = std::iter::from_fn(|| h.pop(&activity)).collect();
        assert_eq!(order, vec![1, 2, 0, 3]);
    }
}
