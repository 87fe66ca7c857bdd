//! The sampled-time SIS Markov chain on a fixed graph.
//!
//! Per step, at most one node flips. An infected node cures with probability
//! `delta_t`; a susceptible node with `k` infected neighbours becomes
//! infected with probability `beta_t * k`; with the remaining probability the
//! state is unchanged. There is no self-infection, so the all-susceptible
//! state is absorbing.

use crate::error::{Error, Result};
use crate::graph::AdjacencyMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Per-step curing and infection probabilities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SisParams {
    pub beta_t: f64,
    pub delta_t: f64,
}

impl SisParams {
    pub fn new(beta_t: f64, delta_t: f64) -> Result<Self> {
        if !(beta_t > 0.0) || !beta_t.is_finite() {
            return Err(Error::InfeasibleParams(format!(
                "infection probability must be positive and finite, got {beta_t}"
            )));
        }
        if !(delta_t > 0.0) || !delta_t.is_finite() {
            return Err(Error::InfeasibleParams(format!(
                "curing probability must be positive and finite, got {delta_t}"
            )));
        }
        Ok(Self { beta_t, delta_t })
    }
}

/// Infection pattern of the whole network at one time step, as a bitmask.
/// Bit `i` set means node `i` is infected.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ViralState {
    n: usize,
    bits: u64,
}

impl ViralState {
    pub fn all_susceptible(n: usize) -> Self {
        assert!(n >= 1 && n <= 64);
        Self { n, bits: 0 }
    }

    pub fn from_bits(n: usize, bits: u64) -> Self {
        let mut s = Self::all_susceptible(n);
        debug_assert_eq!(bits & !s.mask(), 0, "state bits outside the node range");
        s.bits = bits & s.mask();
        s
    }

    /// State with exactly the listed nodes infected.
    pub fn with_infected_nodes(n: usize, nodes: &[usize]) -> Self {
        let mut s = Self::all_susceptible(n);
        for &v in nodes {
            assert!(v < n);
            s.bits |= 1 << v;
        }
        s
    }

    fn mask(&self) -> u64 {
        if self.n == 64 {
            u64::MAX
        } else {
            (1u64 << self.n) - 1
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn is_infected(&self, i: usize) -> bool {
        self.bits & (1 << i) != 0
    }

    pub fn infected_count(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn with_infected(&self, i: usize) -> Self {
        debug_assert!(i < self.n);
        Self { n: self.n, bits: self.bits | (1 << i) }
    }

    pub fn with_cured(&self, i: usize) -> Self {
        debug_assert!(i < self.n);
        Self { n: self.n, bits: self.bits & !(1 << i) }
    }

    /// ASCII '0'/'1' string; the leftmost character is node 0.
    pub fn to_bitstring(&self) -> String {
        (0..self.n)
            .map(|i| if self.is_infected(i) { '1' } else { '0' })
            .collect()
    }

    pub fn from_bitstring(s: &str) -> Result<Self> {
        let n = s.len();
        if n < 1 || n > 64 {
            return Err(Error::Parse(format!("state length {n} out of range 1..=64")));
        }
        let mut bits = 0u64;
        for (i, c) in s.chars().enumerate() {
            match c {
                '1' => bits |= 1 << i,
                '0' => {}
                _ => return Err(Error::Parse(format!("invalid state character {c:?}"))),
            }
        }
        Ok(Self { n, bits })
    }
}

impl fmt::Debug for ViralState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_bitstring())
    }
}

impl fmt::Display for ViralState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_bitstring())
    }
}

fn check_same_n(a: usize, b: usize) -> Result<()> {
    if a != b {
        Err(Error::LengthMismatch { expected: a, got: b })
    } else {
        Ok(())
    }
}

/// Number of (infected, susceptible) adjacent pairs in state `x`.
fn cut_load(x: &ViralState, a: &AdjacencyMatrix) -> u32 {
    let mut cut = 0;
    let mut m = x.bits();
    while m != 0 {
        let i = m.trailing_zeros() as usize;
        m &= m - 1;
        cut += (a.neighbors(i) & !x.bits()).count_ones();
    }
    cut
}

/// Probability that the state does not change in one step. Evaluated as
/// `1 - delta_t*|infected| - beta_t*|cut links|` in that fixed order; may be
/// negative when the parameters are infeasible for this state.
pub fn no_change_probability(x: &ViralState, a: &AdjacencyMatrix, p: &SisParams) -> Result<f64> {
    check_same_n(a.n(), x.n())?;
    let infected = x.infected_count() as f64;
    let cut = cut_load(x, a) as f64;
    Ok(1.0 - p.delta_t * infected - p.beta_t * cut)
}

/// One-step transition probability from `x` to `y`.
pub fn transition_probability(
    x: &ViralState,
    y: &ViralState,
    a: &AdjacencyMatrix,
    p: &SisParams,
) -> Result<f64> {
    check_same_n(x.n(), y.n())?;
    check_same_n(a.n(), x.n())?;
    Ok(transition_probability_unchecked(x, y, a, p))
}

pub(crate) fn transition_probability_unchecked(
    x: &ViralState,
    y: &ViralState,
    a: &AdjacencyMatrix,
    p: &SisParams,
) -> f64 {
    let diff = x.bits() ^ y.bits();
    match diff.count_ones() {
        0 => {
            let infected = x.infected_count() as f64;
            let cut = cut_load(x, a) as f64;
            1.0 - p.delta_t * infected - p.beta_t * cut
        }
        1 => {
            let i = diff.trailing_zeros() as usize;
            if x.is_infected(i) {
                p.delta_t
            } else {
                let k = (a.neighbors(i) & x.bits()).count_ones();
                p.beta_t * f64::from(k)
            }
        }
        _ => 0.0,
    }
}

/// All successor states with nonzero probability, ordered by flipped node
/// index ascending with the unchanged state last.
pub fn enumerate_successors(
    x: &ViralState,
    a: &AdjacencyMatrix,
    p: &SisParams,
) -> Result<Vec<(ViralState, f64)>> {
    check_same_n(a.n(), x.n())?;
    let mut out = Vec::new();
    for i in 0..x.n() {
        if x.is_infected(i) {
            out.push((x.with_cured(i), p.delta_t));
        } else {
            let k = (a.neighbors(i) & x.bits()).count_ones();
            if k > 0 {
                out.push((x.with_infected(i), p.beta_t * f64::from(k)));
            }
        }
    }
    let stay = no_change_probability(x, a, p)?;
    if stay < 0.0 {
        return Err(Error::InfeasibleParams(format!(
            "no-change probability {stay} < 0 in state {x}"
        )));
    }
    if stay > 0.0 {
        out.push((*x, stay));
    }
    Ok(out)
}

/// Sufficient condition for all transition probabilities to lie in [0, 1]:
/// `delta_t*n + beta_t*L <= 1` with `L` the link count.
pub fn validate_params(a: &AdjacencyMatrix, p: &SisParams) -> bool {
    p.delta_t * (a.n() as f64) + p.beta_t * (a.link_count() as f64) <= 1.0
}

/// A viral-state sequence in canonical run-length form: adjacent segments
/// hold distinct states and every repeat is at least 1.
#[derive(Clone, PartialEq, Eq)]
pub struct ViralTrace {
    n: usize,
    segments: Vec<Segment>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Segment {
    pub state: ViralState,
    pub repeat: u64,
}

impl ViralTrace {
    pub fn new(first: ViralState) -> Self {
        Self { n: first.n(), segments: vec![Segment { state: first, repeat: 1 }] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn first(&self) -> ViralState {
        self.segments[0].state
    }

    pub fn last(&self) -> ViralState {
        self.segments.last().unwrap().state
    }

    /// Appends one observation, merging with the last segment when equal.
    pub fn push(&mut self, state: ViralState) {
        self.push_repeat(state, 1);
    }

    pub fn push_repeat(&mut self, state: ViralState, repeat: u64) {
        assert_eq!(state.n(), self.n);
        if repeat == 0 {
            return;
        }
        let last = self.segments.last_mut().unwrap();
        if last.state == state {
            last.repeat += repeat;
        } else {
            self.segments.push(Segment { state, repeat });
        }
    }

    /// Appends `other`, whose first expanded state must equal the current
    /// last state (it is counted only once).
    pub fn extend_with(&mut self, other: &ViralTrace) -> Result<()> {
        check_same_n(self.n, other.n)?;
        if other.first() != self.last() {
            return Err(Error::Unreachable(format!(
                "trace junction mismatch: {} vs {}",
                self.last(),
                other.first()
            )));
        }
        let mut iter = other.segments.iter();
        let head = iter.next().unwrap();
        self.push_repeat(head.state, head.repeat - 1);
        for seg in iter {
            self.push_repeat(seg.state, seg.repeat);
        }
        Ok(())
    }

    /// Total number of observations.
    pub fn expanded_len(&self) -> u64 {
        self.segments.iter().map(|s| s.repeat).sum()
    }

    pub fn expand(&self) -> Vec<ViralState> {
        let mut out = Vec::new();
        for seg in &self.segments {
            for _ in 0..seg.repeat {
                out.push(seg.state);
            }
        }
        out
    }

    /// Distinct transitions with their multiplicities, sorted by
    /// (from, to) state bits.
    pub fn transition_tally(&self) -> Vec<((u64, u64), u64)> {
        let mut tally = std::collections::BTreeMap::new();
        for w in self.segments.windows(2) {
            *tally.entry((w[0].state.bits(), w[1].state.bits())).or_insert(0u64) += 1;
        }
        for seg in &self.segments {
            if seg.repeat > 1 {
                *tally.entry((seg.state.bits(), seg.state.bits())).or_insert(0u64) +=
                    seg.repeat - 1;
            }
        }
        tally.into_iter().collect()
    }

    /// True iff every consecutive transition has positive probability under
    /// `a`.
    pub fn is_realizable(&self, a: &AdjacencyMatrix, p: &SisParams) -> bool {
        if a.n() != self.n {
            return false;
        }
        self.transition_tally().iter().all(|&((from, to), _)| {
            let x = ViralState::from_bits(self.n, from);
            let y = ViralState::from_bits(self.n, to);
            transition_probability_unchecked(&x, &y, a, p) > 0.0
        })
    }
}

impl fmt::Debug for ViralTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ViralTrace[")?;
        for (k, seg) in self.segments.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}x{}", seg.state, seg.repeat)?;
        }
        write!(f, "]")
    }
}

/// Simulates `steps` transitions starting from `x0` and returns the
/// run-length-compressed trace of `steps + 1` observations.
///
/// The generator is ChaCha8 seeded with `seed`; each step draws one uniform
/// `f64` in [0, 1) and inverts the cumulative distribution over the
/// successors in [`enumerate_successors`] order, so traces are reproducible
/// byte for byte. The final successor absorbs any floating-point residual.
pub fn simulate(
    a: &AdjacencyMatrix,
    p: &SisParams,
    x0: &ViralState,
    steps: u64,
    seed: u64,
) -> Result<ViralTrace> {
    check_same_n(a.n(), x0.n())?;
    if !validate_params(a, p) {
        return Err(Error::InfeasibleParams(format!(
            "delta_t*n + beta_t*L = {} > 1",
            p.delta_t * (a.n() as f64) + p.beta_t * (a.link_count() as f64)
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trace = ViralTrace::new(*x0);
    let mut cur = *x0;
    for _ in 0..steps {
        let succ = enumerate_successors(&cur, a, p)?;
        let u: f64 = rng.random();
        let mut cum = 0.0;
        let mut chosen = succ.last().map(|(s, _)| *s).unwrap_or(cur);
        for &(s, q) in &succ {
            cum += q;
            if u < cum {
                chosen = s;
                break;
            }
        }
        trace.push(chosen);
        cur = chosen;
    }
    Ok(trace)
}

/// Log-likelihood of the trace under adjacency matrix `a`.
///
/// Accumulates left to right over segments: each segment of repeat `r`
/// contributes `(r-1) * ln(no-change prob)` followed by the log of the
/// transition into the next segment. Returns `f64::NEG_INFINITY` as soon as
/// any required transition has probability <= 0.
pub fn log_likelihood(trace: &ViralTrace, a: &AdjacencyMatrix, p: &SisParams) -> Result<f64> {
    check_same_n(a.n(), trace.n())?;
    let mut sum = 0.0;
    let segs = trace.segments();
    for (k, seg) in segs.iter().enumerate() {
        if seg.repeat > 1 {
            let stay = no_change_probability(&seg.state, a, p)?;
            if stay <= 0.0 {
                return Ok(f64::NEG_INFINITY);
            }
            sum += (seg.repeat - 1) as f64 * stay.ln();
        }
        if let Some(next) = segs.get(k + 1) {
            let q = transition_probability_unchecked(&seg.state, &next.state, a, p);
            if q <= 0.0 {
                return Ok(f64::NEG_INFINITY);
            }
            sum += q.ln();
        }
    }
    Ok(sum)
}

#[derive(Serialize, Deserialize)]
struct TraceFile {
    version: u32,
    n: usize,
    #[serde(rename = "beta_T")]
    beta_t: f64,
    #[serde(rename = "delta_T")]
    delta_t: f64,
    segments: Vec<SegmentFile>,
}

#[derive(Serialize, Deserialize)]
struct SegmentFile {
    state: String,
    repeat: u64,
}

/// Serialises a trace and its parameters to the JSON trace format.
pub fn trace_to_json(trace: &ViralTrace, p: &SisParams) -> String {
    let file = TraceFile {
        version: 1,
        n: trace.n(),
        beta_t: p.beta_t,
        delta_t: p.delta_t,
        segments: trace
            .segments()
            .iter()
            .map(|s| SegmentFile { state: s.state.to_bitstring(), repeat: s.repeat })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("trace serialisation cannot fail");
    s.push('\n');
    s
}

/// Parses the JSON trace format and validates its invariants.
pub fn trace_from_json(text: &str) -> Result<(ViralTrace, SisParams)> {
    let file: TraceFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("trace JSON: {e}")))?;
    if file.version != 1 {
        return Err(Error::Parse(format!("unsupported trace version {}", file.version)));
    }
    if file.n < 1 || file.n > 64 {
        return Err(Error::Parse(format!("node count {} out of range", file.n)));
    }
    let params = SisParams::new(file.beta_t, file.delta_t)?;
    let mut seg_iter = file.segments.iter();
    let first = seg_iter
        .next()
        .ok_or_else(|| Error::Parse("trace has no segments".into()))?;
    let mut trace = ViralTrace::new(parse_segment_state(first, file.n)?);
    if first.repeat < 1 {
        return Err(Error::Parse("segment repeat must be >= 1".into()));
    }
    trace.push_repeat(trace.first(), first.repeat - 1);
    let mut prev = trace.first();
    for seg in seg_iter {
        let state = parse_segment_state(seg, file.n)?;
        if seg.repeat < 1 {
            return Err(Error::Parse("segment repeat must be >= 1".into()));
        }
        if state == prev {
            return Err(Error::Parse("adjacent segments must hold distinct states".into()));
        }
        trace.push_repeat(state, seg.repeat);
        prev = state;
    }
    Ok((trace, params))
}

fn parse_segment_state(seg: &SegmentFile, n: usize) -> Result<ViralState> {
    if seg.state.len() != n {
        return Err(Error::Parse(format!(
            "segment state length {} does not match n = {n}",
            seg.state.len()
        )));
    }
    ViralState::from_bitstring(&seg.state)
}
