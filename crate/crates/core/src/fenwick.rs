/// Binary indexed tree over counts at positions `1..=n`.
#[derive(Debug, Clone)]
pub struct Fenwick {
    tree: Vec<u32>,
}

impl Fenwick {
    pub fn new(n: usize) -> Self {
        Self {
            tree: vec![0; n + 1],
        }
    }

    /// Adds one at position `pos` (1-based).
    #[inline]
    pub fn increment(&mut self, pos: usize) {
        let mut i = pos;
        while i < self.tree.len() {
            self.tree[i] += 1;
            i += i & i.wrapping_neg();
        }
    }

    /// Sum of counts at positions `1..=pos`.
    #[inline]
    pub fn prefix(&self, pos: usize) -> u32 {
        let mut i = pos;
        let mut acc = 0;
        while i > 0 {
            acc += self.tree[i];
            i &= i - 1;
        }
        acc
    }
}
