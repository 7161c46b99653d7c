use std::fmt;

use super::{reservoir_capacity_bound, split_at_node, Reservoir, TreeTopology};
use crate::deviates::{tuple_hash, RandomSource};
use crate::error::{invalid, Error, Result};
use crate::samplers::{sample_r, SamplerConfig, UniverseRange};

/// A query gives up after this many infeasible assignments.
pub const DEFAULT_MAX_RESTARTS: u32 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MessageKind {
    CountSum,
    CountAssign,
    SampleRequest,
    SamplePayload,
}

impl MessageKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            MessageKind::CountSum => "count-sum",
            MessageKind::CountAssign => "count-assign",
            MessageKind::SampleRequest => "sample-request",
            MessageKind::SamplePayload => "sample-payload",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimMessage {
    pub round: u64,
    pub from: usize,
    pub to: usize,
    pub kind: MessageKind,
    pub payload: Vec<u64>,
}

/// One trace line: a message, or a `#` annotation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceEvent {
    Message(SimMessage),
    Note(String),
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceEvent::Message(m) => {
                write!(f, "{} {} {} {}", m.round, m.from, m.to, m.kind.as_str())?;
                for x in &m.payload {
                    write!(f, " {x}")?;
                }
                Ok(())
            }
            TraceEvent::Note(s) => write!(f, "# {s}"),
        }
    }
}

/// A simulated PE: its reservoir and the generator behind its
/// replacement decisions.
#[derive(Debug, Clone)]
pub struct SimPE {
    pub rank: usize,
    pub reservoir: Reservoir,
    src: RandomSource,
}

impl SimPE {
    pub fn local_count(&self) -> u64 {
        self.reservoir.seen()
    }
}

/// Synchronous message-passing simulation of distributed reservoir
/// sampling over a binomial tree.
#[derive(Debug, Clone)]
pub struct Simulation {
    pes: Vec<SimPE>,
    topo: TreeTopology,
    seed: u64,
    round: u64,
    queries: u64,
    restarts: u64,
    max_restarts: u32,
    trace: Vec<TraceEvent>,
    // messages sent per PE, one row per query
    sent: Vec<Vec<u64>>,
    assignments: Vec<Vec<u64>>,
}

impl Simulation {
    pub fn new(capacities: &[u64], seed: u64) -> Result<Self> {
        let topo = TreeTopology::new(capacities.len())?;
        let pes = capacities
            .iter()
            .enumerate()
            .map(|(rank, &cap)| SimPE {
                rank,
                reservoir: Reservoir::new(cap),
                src: RandomSource::new(tuple_hash(seed, rank as u64, rank as u64, u64::MAX)),
            })
            .collect();
        Ok(Self {
            pes,
            topo,
            seed,
            round: 0,
            queries: 0,
            restarts: 0,
            max_restarts: DEFAULT_MAX_RESTARTS,
            trace: Vec::new(),
            sent: Vec::new(),
            assignments: Vec::new(),
        })
    }

    pub fn with_max_restarts(mut self, max: u32) -> Self {
        self.max_restarts = max;
        self
    }

    pub fn pes(&self) -> &[SimPE] {
        &self.pes
    }

    pub fn trace(&self) -> &[TraceEvent] {
        &self.trace
    }

    pub fn restarts(&self) -> u64 {
        self.restarts
    }

    /// Messages sent by each PE, one row per completed query.
    pub fn messages_sent(&self) -> &[Vec<u64>] {
        &self.sent
    }

    /// Per-PE sample counts of each successful query.
    pub fn assignments(&self) -> &[Vec<u64>] {
        &self.assignments
    }

    pub fn total_seen(&self) -> u64 {
        self.pes.iter().map(|p| p.reservoir.seen()).sum()
    }

    pub fn insert(&mut self, rank: usize, element: u64) {
        let pe = &mut self.pes[rank];
        pe.reservoir.insert(element, &mut pe.src);
    }

    fn send(&mut self, round: u64, from: usize, to: usize, kind: MessageKind, payload: Vec<u64>) {
        self.sent.last_mut().expect("inside a query")[from] += 1;
        self.trace.push(TraceEvent::Message(SimMessage {
            round,
            from,
            to,
            kind,
            payload,
        }));
    }

    // Ranks grouped by depth, root first.
    fn levels(&self) -> Vec<Vec<usize>> {
        let mut levels = vec![Vec::new(); self.topo.height() as usize + 1];
        for i in 0..self.topo.size() {
            levels[self.topo.depth(i) as usize].push(i);
        }
        levels
    }

    /// Draws a uniform sample of `n` of all elements seen so far.
    pub fn query(&mut self, n: u64) -> Result<Vec<u64>> {
        self.query_with_arrivals(n, &[])
    }

    /// Like [`query`](Self::query), with `(rank, element)` arrivals landing
    /// while the query runs; they are counted but do not affect it.
    pub fn query_with_arrivals(&mut self, n: u64, arrivals: &[(usize, u64)]) -> Result<Vec<u64>> {
        let total = self.total_seen();
        if n > total {
            return invalid(format!("cannot draw {n} samples from {total} elements"));
        }
        if let Some(&(r, _)) = arrivals.iter().find(|(r, _)| *r >= self.pes.len()) {
            return invalid(format!("arrival at unknown PE {r}"));
        }
        let q = self.queries;
        self.queries += 1;
        let qseed = tuple_hash(self.seed, u64::MAX, u64::MAX, q);
        self.sent.push(vec![0; self.pes.len()]);
        self.trace.push(TraceEvent::Note(format!("query {q} n={n}")));
        for pe in &mut self.pes {
            pe.reservoir.begin_query();
        }
        let result = self.run_query(n, qseed, arrivals);
        for pe in &mut self.pes {
            pe.reservoir.end_query();
        }
        result
    }

    fn run_query(&mut self, n: u64, qseed: u64, arrivals: &[(usize, u64)]) -> Result<Vec<u64>> {
        let p = self.pes.len();
        let levels = self.levels();
        let height = levels.len() as u64 - 1;

        // request travels down
        let base = self.round;
        for (d, level) in levels.iter().enumerate() {
            for &i in level {
                for c in self.topo.children(i) {
                    self.send(base + d as u64, i, c, MessageKind::SampleRequest, vec![n]);
                }
            }
        }
        self.round = base + height;

        // counts snapshot when each PE answers; later arrivals do not change it
        let mut subtree: Vec<u64> = self.pes.iter().map(|pe| pe.local_count()).collect();
        let base = self.round;
        for (d, level) in levels.iter().enumerate().rev().take(levels.len() - 1) {
            for &i in level {
                for c in self.topo.children(i) {
                    subtree[i] += subtree[c];
                }
                let parent = self.topo.parent(i).expect("non-root");
                self.send(
                    base + (height - d as u64),
                    i,
                    parent,
                    MessageKind::CountSum,
                    vec![subtree[i]],
                );
            }
        }
        for c in self.topo.children(0) {
            subtree[0] += subtree[c];
        }
        self.round = base + height;

        for &(rank, element) in arrivals {
            self.insert(rank, element);
        }

        let mut attempt = 0u64;
        loop {
            let base = self.round;
            let mut assigned = vec![0u64; p];
            assigned[0] = n;
            for (d, level) in levels.iter().enumerate() {
                for &i in level {
                    let children: Vec<(usize, u64)> =
                        self.topo.children(i).into_iter().map(|c| (c, subtree[c])).collect();
                    let end = self.topo.subtree_end(i);
                    let (keep, shares) = split_at_node(i, end, assigned[i], subtree[i], &children, qseed, attempt);
                    assigned[i] = keep;
                    for (&(c, _), s) in children.iter().zip(shares) {
                        assigned[c] = s;
                        self.send(base + d as u64, i, c, MessageKind::CountAssign, vec![s, attempt]);
                    }
                }
            }
            self.round = base + height;

            // each PE draws locally and reports up with an ok flag
            let mut ok = vec![true; p];
            let mut payload: Vec<Vec<u64>> = vec![Vec::new(); p];
            for i in 0..p {
                let pe = &self.pes[i];
                let occ = pe.reservoir.occupancy();
                if assigned[i] > occ {
                    ok[i] = false;
                    continue;
                }
                let mut src = RandomSource::new(tuple_hash(qseed, i as u64, i as u64, attempt));
                let cfg = SamplerConfig::default().sorted(true);
                let idx = sample_r(assigned[i], UniverseRange::new(0, occ)?, &mut src, &cfg)?;
                payload[i] = idx.into_iter().map(|j| pe.reservoir.items()[j as usize]).collect();
            }
            let base = self.round;
            for (d, level) in levels.iter().enumerate().rev().take(levels.len() - 1) {
                for &i in level {
                    let mut collected = std::mem::take(&mut payload[i]);
                    let mut good = ok[i];
                    // children in increasing rank keep the result in rank order
                    for c in self.topo.children(i).into_iter().rev() {
                        good &= ok[c];
                        collected.append(&mut payload[c]);
                    }
                    ok[i] = good;
                    let parent = self.topo.parent(i).expect("non-root");
                    let mut msg = Vec::with_capacity(collected.len() + 1);
                    msg.push(good as u64);
                    msg.extend(&collected);
                    self.send(base + (height - d as u64), i, parent, MessageKind::SamplePayload, msg);
                    payload[i] = collected;
                }
            }
            self.round = base + height;
            let mut result = std::mem::take(&mut payload[0]);
            let mut good = ok[0];
            for c in self.topo.children(0).into_iter().rev() {
                good &= ok[c];
                result.append(&mut payload[c]);
            }
            if good {
                self.assignments.push(assigned);
                return Ok(result);
            }
            attempt += 1;
            self.restarts += 1;
            self.trace.push(TraceEvent::Note(format!("restart attempt={attempt}")));
            if attempt > self.max_restarts as u64 {
                return Err(Error::RestartsExhausted(self.max_restarts));
            }
        }
    }
}

/// Reservoir sizing for a simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CapacityPolicy {
    /// Each reservoir can hold its whole stream.
    Exact,
    /// `reservoir_capacity_bound` with this failure probability, using the
    /// final stream lengths as `L_i` and their sum as `N`.
    Bound {
        delta: f64,
    },
    Fixed(u64),
}

/// Streams and queries for [`simulate_streams`].
#[derive(Debug, Clone, PartialEq)]
pub struct StreamSpec {
    /// Elements arriving at each PE, in order.
    pub streams: Vec<Vec<u64>>,
    pub n: u64,
    pub capacity: CapacityPolicy,
    /// Queries are issued at evenly spaced points of the run, the last one
    /// after every element has arrived.
    pub queries: usize,
    pub seed: u64,
}

impl StreamSpec {
    /// Streams of the given lengths holding consecutive element ids from 1.
    pub fn from_lengths(lengths: &[u64], n: u64, capacity: CapacityPolicy, seed: u64) -> Self {
        let mut next = 1;
        let streams = lengths
            .iter()
            .map(|&len| {
                let s: Vec<u64> = (next..next + len).collect();
                next += len;
                s
            })
            .collect();
        Self {
            streams,
            n,
            capacity,
            queries: 1,
            seed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimReport {
    pub capacities: Vec<u64>,
    pub seen: Vec<u64>,
    pub occupancy: Vec<u64>,
    pub assignments: Vec<Vec<u64>>,
    pub results: Vec<Vec<u64>>,
    pub trace: Vec<TraceEvent>,
    pub messages_sent: Vec<Vec<u64>>,
    pub restarts: u64,
}

impl SimReport {
    pub fn trace_text(&self) -> String {
        let mut s = String::new();
        for e in &self.trace {
            s.push_str(&e.to_string());
            s.push('\n');
        }
        s
    }
}

/// Feeds the streams round-robin into a fresh simulation and runs the
/// configured queries.
pub fn simulate_streams(spec: &StreamSpec) -> Result<SimReport> {
    let p = spec.streams.len();
    if p == 0 {
        return invalid("need at least one stream");
    }
    if spec.queries == 0 {
        return invalid("need at least one query");
    }
    let lengths: Vec<u64> = spec.streams.iter().map(|s| s.len() as u64).collect();
    let total: u64 = lengths.iter().sum();
    let capacities = match spec.capacity {
        CapacityPolicy::Exact => lengths.clone(),
        CapacityPolicy::Fixed(c) => vec![c; p],
        CapacityPolicy::Bound { delta } => lengths
            .iter()
            .map(|&l| reservoir_capacity_bound(l, total, spec.n, p as u64, delta))
            .collect::<Result<_>>()?,
    };
    let mut sim = Simulation::new(&capacities, spec.seed)?;
    let marks: Vec<u64> = (1..=spec.queries as u64)
        .map(|q| (total as u128 * q as u128).div_ceil(spec.queries as u128) as u64)
        .collect();
    let mut results = Vec::with_capacity(spec.queries);
    let mut marks = marks.into_iter().peekable();
    let mut inserted = 0u64;
    let longest = lengths.iter().copied().max().unwrap_or(0) as usize;
    for step in 0..longest {
        for (rank, stream) in spec.streams.iter().enumerate() {
            if let Some(&x) = stream.get(step) {
                sim.insert(rank, x);
                inserted += 1;
                while marks.peek() == Some(&inserted) {
                    marks.next();
                    results.push(sim.query(spec.n)?);
                }
            }
        }
    }
    for _ in marks {
        results.push(sim.query(spec.n)?);
    }
    Ok(SimReport {
        capacities,
        seen: sim.pes().iter().map(|pe| pe.reservoir.seen()).collect(),
        occupancy: sim.pes().iter().map(|pe| pe.reservoir.occupancy()).collect(),
        assignments: sim.assignments().to_vec(),
        results,
        trace: sim.trace().to_vec(),
        messages_sent: sim.messages_sent().to_vec(),
        restarts: sim.restarts(),
    })
}
