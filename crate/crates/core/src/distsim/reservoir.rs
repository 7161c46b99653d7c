use crate::deviates::UniformSource;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Change {
    Append(u64),
    Replace(usize, u64),
}

/// Classical one-pass reservoir: keeps a uniform sample of up to
/// `capacity` of the elements seen so far.
///
/// Between [`begin_query`](Self::begin_query) and
/// [`end_query`](Self::end_query) arrivals are still counted and decided,
/// but their effect on the items is buffered and applied at the end.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reservoir {
    capacity: u64,
    items: Vec<u64>,
    seen: u64,
    in_query: bool,
    pending: Vec<Change>,
}

impl Reservoir {
    pub fn new(capacity: u64) -> Self {
        Self {
            capacity,
            items: Vec::new(),
            seen: 0,
            in_query: false,
            pending: Vec::new(),
        }
    }

    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    pub fn seen(&self) -> u64 {
        self.seen
    }

    pub fn items(&self) -> &[u64] {
        &self.items
    }

    pub fn occupancy(&self) -> u64 {
        self.items.len() as u64
    }

    pub fn pending(&self) -> usize {
        self.pending.len()
    }

    pub fn insert<S: UniformSource + ?Sized>(&mut self, element: u64, src: &mut S) {
        self.seen += 1;
        let change = if self.seen <= self.capacity {
            Change::Append(element)
        } else {
            let r = src.uniform_below(self.seen);
            if r >= self.capacity {
                return;
            }
            Change::Replace(r as usize, element)
        };
        if self.in_query {
            self.pending.push(change);
        } else {
            self.apply(change);
        }
    }

    fn apply(&mut self, change: Change) {
        match change {
            Change::Append(x) => self.items.push(x),
            Change::Replace(i, x) => self.items[i] = x,
        }
    }

    pub fn begin_query(&mut self) {
        self.in_query = true;
    }

    pub fn end_query(&mut self) {
        self.in_query = false;
        for c in std::mem::take(&mut self.pending) {
            self.apply(c);
        }
    }
}
