/// Sentinel for an unoccupied slot. Keys are relative positions below the
/// universe size, so they never reach it.
pub const EMPTY: u64 = u64::MAX;

/// Linear-probing table of distinct keys from `0..universe`.
///
/// The home slot of a key is its position scaled to the table, i.e. the top
/// bits of the key relative to the universe. That hash is monotone, which is
/// what makes sorted mode work: clusters are kept sorted by shifting larger
/// keys to the right, probes never wrap, and an overflow area of `overflow`
/// slots past the end absorbs the tail of the last cluster.
///
/// Unsorted mode probes with wrap-around and remembers every occupied slot on
/// a position stack so clearing costs only the number of entries.
#[derive(Debug, Clone)]
pub struct HashSampleTable {
    slots: Vec<u64>,
    capacity: usize,
    universe: u64,
    // home = key * scale >> 64; zero means keys map to themselves
    scale: u64,
    sorted: bool,
    positions: Vec<usize>,
    len: usize,
}

impl HashSampleTable {
    /// `capacity` is rounded up to a power of two. `overflow` only matters in
    /// sorted mode and must be at least the number of keys inserted between
    /// clears.
    pub fn new(capacity: usize, overflow: usize, sorted: bool) -> Self {
        let capacity = capacity.max(1).next_power_of_two();
        let extra = if sorted { overflow } else { 0 };
        Self {
            slots: vec![EMPTY; capacity + extra],
            capacity,
            universe: 1,
            scale: 0,
            sorted,
            positions: Vec::new(),
            len: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn overflow(&self) -> usize {
        self.slots.len() - self.capacity
    }

    pub fn is_sorted_mode(&self) -> bool {
        self.sorted
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Sets the key range for subsequent inserts. The table must be empty.
    pub fn set_universe(&mut self, universe: u64) {
        debug_assert!(self.is_empty());
        self.universe = universe.max(1);
        self.scale = if (self.capacity as u64) >= self.universe {
            0
        } else {
            (((self.capacity as u128) << 64) / self.universe as u128) as u64
        };
    }

    #[inline]
    fn home(&self, key: u64) -> usize {
        if self.scale == 0 {
            return key as usize;
        }
        ((key as u128 * self.scale as u128) >> 64) as usize
    }

    /// Inserts `key`; returns false if it was already present.
    #[inline]
    pub fn insert(&mut self, key: u64) -> bool {
        debug_assert!(key < self.universe);
        if self.sorted {
            self.insert_sorted(key)
        } else {
            self.insert_unsorted(key)
        }
    }

    fn insert_unsorted(&mut self, key: u64) -> bool {
        let mask = self.capacity - 1;
        let mut pos = self.home(key);
        loop {
            let slot = self.slots[pos];
            if slot == EMPTY {
                self.slots[pos] = key;
                self.positions.push(pos);
                self.len += 1;
                return true;
            }
            if slot == key {
                return false;
            }
            pos = (pos + 1) & mask;
        }
    }

    fn insert_sorted(&mut self, key: u64) -> bool {
        let mut pos = self.home(key);
        while self.slots[pos] < key {
            pos += 1;
        }
        if self.slots[pos] == key {
            return false;
        }
        let mut carry = key;
        while carry != EMPTY {
            std::mem::swap(&mut self.slots[pos], &mut carry);
            pos += 1;
        }
        self.len += 1;
        true
    }

    pub fn contains(&self, key: u64) -> bool {
        if key >= self.universe {
            return false;
        }
        let mut pos = self.home(key);
        let mask = self.capacity - 1;
        loop {
            let slot = self.slots[pos];
            if slot == key {
                return true;
            }
            if slot == EMPTY || (self.sorted && slot > key) {
                return false;
            }
            pos = if self.sorted { pos + 1 } else { (pos + 1) & mask };
        }
    }

    /// Moves every key, mapped through `f`, into `out` and empties the
    /// table. Sorted mode emits increasing keys; unsorted mode emits them in
    /// insertion order.
    pub fn drain_into(&mut self, out: &mut Vec<u64>, f: impl Fn(u64) -> u64) {
        out.reserve(self.len);
        if self.sorted {
            for slot in self.slots.iter_mut() {
                if *slot != EMPTY {
                    out.push(f(*slot));
                    *slot = EMPTY;
                }
            }
        } else {
            for &pos in &self.positions {
                out.push(f(self.slots[pos]));
                self.slots[pos] = EMPTY;
            }
            self.positions.clear();
        }
        self.len = 0;
    }

    /// Occupied slot indices in insertion order (unsorted mode).
    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn clear(&mut self) {
        let mut sink = Vec::new();
        self.drain_into(&mut sink, |k| k);
    }

    #[cfg(test)]
    fn slots(&self) -> &[u64] {
        &self.slots
    }
}
