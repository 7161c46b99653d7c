//! Simulated distributed sampling over a binomial tree of PEs.
//!
//! PEs only know their local element counts. An upward pass sums them over
//! subtrees, and a downward pass splits the requested sample count
//! hypergeometrically at each node, keyed by the node's PE range. On top of
//! that sits distributed reservoir sampling with a message-level simulator.

mod reservoir;
mod sim;

pub use reservoir::Reservoir;
pub use sim::{
    simulate_streams, CapacityPolicy, MessageKind, SimMessage, SimPE, SimReport, Simulation, StreamSpec, TraceEvent,
    DEFAULT_MAX_RESTARTS,
};

use crate::deviates::{hypergeometric, HypergeomParams, TupleHashStream};
use crate::error::{invalid, Result};

/// Binomial tree over ranks `0..p` rooted at 0: rank `i` with `k` trailing
/// zero bits has children `i + 2^j` for `j < k` (all `j` for the root).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeTopology {
    p: usize,
}

impl TreeTopology {
    pub fn new(p: usize) -> Result<Self> {
        if p == 0 {
            return invalid("tree needs at least one PE");
        }
        Ok(Self { p })
    }

    pub fn size(&self) -> usize {
        self.p
    }

    fn levels(&self, i: usize) -> u32 {
        if i == 0 {
            self.p.next_power_of_two().trailing_zeros()
        } else {
            i.trailing_zeros()
        }
    }

    /// Children in decreasing rank order.
    pub fn children(&self, i: usize) -> Vec<usize> {
        (0..self.levels(i))
            .rev()
            .map(|j| i + (1 << j))
            .filter(|&c| c < self.p)
            .collect()
    }

    pub fn parent(&self, i: usize) -> Option<usize> {
        (i > 0).then(|| i & (i - 1))
    }

    /// One past the last rank in the subtree of `i`.
    pub fn subtree_end(&self, i: usize) -> usize {
        if i == 0 {
            self.p
        } else {
            (i + (1 << i.trailing_zeros())).min(self.p)
        }
    }

    /// Edges from the root; the tree height is `ceil(log2 p)`.
    pub fn depth(&self, i: usize) -> u32 {
        i.count_ones()
    }

    pub fn height(&self) -> u32 {
        self.p.next_power_of_two().trailing_zeros()
    }
}

/// Splits `count` at node `rank` among itself and its children.
/// `children` pairs each child (decreasing rank) with its subtree total;
/// `subtree_total` covers the node's whole subtree. Returns what the node
/// keeps and each child's share, in the order given.
pub(crate) fn split_at_node(
    rank: usize,
    end: usize,
    count: u64,
    subtree_total: u64,
    children: &[(usize, u64)],
    seed: u64,
    attempt: u64,
) -> (u64, Vec<u64>) {
    let mut cur = count;
    let mut total = subtree_total;
    let mut end = end;
    let mut shares = Vec::with_capacity(children.len());
    for &(child, child_total) in children {
        let mut stream = TupleHashStream::new(seed, rank as u64, (end - 1) as u64).with_counter(attempt << 40);
        let params = HypergeomParams {
            draws: cur,
            successes: total - child_total,
            total,
        };
        let left = hypergeometric(&mut stream, params);
        shares.push(cur - left);
        cur = left;
        total -= child_total;
        end = child;
    }
    (cur, shares)
}

/// Per-PE sample counts for local counts `l` and `n` samples in total.
pub fn tree_assign_counts(l: &[u64], n: u64, seed: u64) -> Result<Vec<u64>> {
    tree_assign_counts_attempt(l, n, seed, 0)
}

/// [`tree_assign_counts`] drawing from the streams' `attempt`-th block, as
/// used after a restart.
pub fn tree_assign_counts_attempt(l: &[u64], n: u64, seed: u64, attempt: u64) -> Result<Vec<u64>> {
    let topo = TreeTopology::new(l.len())?;
    let total = l.iter().try_fold(0u64, |a, &x| a.checked_add(x));
    let Some(total) = total else {
        return invalid("local counts overflow");
    };
    if n > total {
        return invalid(format!("cannot draw {n} samples from {total} elements"));
    }
    let mut prefix = vec![0u64; l.len() + 1];
    for (i, &x) in l.iter().enumerate() {
        prefix[i + 1] = prefix[i] + x;
    }
    let sum = |a: usize, b: usize| prefix[b] - prefix[a];
    let mut out = vec![0; l.len()];
    let mut stack = vec![(0usize, n)];
    while let Some((i, count)) = stack.pop() {
        let children: Vec<(usize, u64)> = topo
            .children(i)
            .into_iter()
            .map(|c| (c, sum(c, topo.subtree_end(c))))
            .collect();
        let end = topo.subtree_end(i);
        let (keep, shares) = split_at_node(i, end, count, sum(i, end), &children, seed, attempt);
        out[i] = keep;
        stack.extend(children.iter().zip(shares).map(|(&(c, _), s)| (c, s)));
    }
    Ok(out)
}

/// Hoeffding slack `t = sqrt(ln(p / delta) / (2n))`.
pub fn reservoir_slack(n: u64, p: u64, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return invalid(format!("failure probability {delta} outside (0, 1)"));
    }
    if n == 0 || p == 0 {
        return invalid("sample size and PE count must be positive");
    }
    Ok(((p as f64 / delta).ln() / (2.0 * n as f64)).sqrt())
}

/// Local reservoir size `ceil((L_i/N + t) n)` under which a PE holding
/// `local` of `total` elements overflows with probability at most
/// `delta / p`.
pub fn reservoir_capacity_bound(local: u64, total: u64, n: u64, p: u64, delta: f64) -> Result<u64> {
    let t = reservoir_slack(n, p, delta)?;
    if total == 0 || local > total {
        return invalid(format!("local count {local} of total {total}"));
    }
    Ok(((local as f64 / total as f64 + t) * n as f64).ceil() as u64)
}
