//! Random digraphs, the bipartite-plus-Eulerian example family, parameter
//! formulas and class-membership checks.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};
use std::fmt;

use num_traits::Float;
use rand::seq::{index, SliceRandom};
use rand::Rng as _;

use crate::digraph::{Digraph, Edge, Side, Vertex, VertexPartition};
use crate::error::GraphError;
use crate::rng::{rng_for, streams};

/// `D(n, p)`: every ordered pair of distinct vertices is an edge
/// independently with probability `p`. Pairs are drawn in row-major order
/// from ChaCha8 stream 0 of `seed`.
pub fn gen_dnp(n: usize, p: f64, seed: u64) -> Result<Digraph, GraphError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(GraphError::InvalidArgument(format!("p = {p} is not a probability")));
    }
    let mut rng = rng_for(seed, streams::GRAPH);
    let mut d = Digraph::new_simple(n);
    for u in 0..n {
        for v in 0..n {
            if u != v && rng.gen_bool(p) {
                d.add_edge((u, v))?;
            }
        }
    }
    Ok(d)
}

/// Edge-disjoint union of a `t`-regular bipartite digraph oriented from
/// `0..n/2` to `n/2..n` and a random Eulerian digraph whose in- and
/// out-degrees are at most `eulerian_degree`.
///
/// Left vertex `i` points at right vertices `π((i + j) mod n/2)` for
/// `j < t` with `π` a random permutation. The Eulerian part is grown one
/// random cycle at a time, rejecting steps that reuse an edge or exceed the
/// degree cap, until many consecutive attempts fail.
pub fn gen_example_class(n: usize, t: usize, eulerian_degree: usize, seed: u64) -> Result<Digraph, GraphError> {
    if !n.is_multiple_of(2) {
        return Err(GraphError::InvalidArgument(format!("n = {n} must be even")));
    }
    let h = n / 2;
    if t > h {
        return Err(GraphError::InvalidArgument(format!("t = {t} exceeds n/2 = {h}")));
    }
    if eulerian_degree > 3 * t {
        return Err(GraphError::InvalidArgument(format!(
            "eulerian degree {eulerian_degree} exceeds 3t = {}",
            3 * t
        )));
    }
    let mut d = Digraph::new_simple(n);
    let mut rng = rng_for(seed, streams::EXAMPLE_BIPARTITE);
    let mut perm: Vec<usize> = (0..h).collect();
    perm.shuffle(&mut rng);
    for i in 0..h {
        for j in 0..t {
            d.add_edge((i, h + perm[(i + j) % h]))?;
        }
    }
    if eulerian_degree > 0 && n >= 3 {
        add_random_cycles(&mut d, eulerian_degree, seed);
    }
    Ok(d)
}

fn add_random_cycles(d: &mut Digraph, cap: usize, seed: u64) {
    let n = d.vertex_count();
    let mut rng = rng_for(seed, streams::EXAMPLE_EULERIAN);
    let mut deg = vec![0usize; n];
    let mut open: Vec<Vertex> = (0..n).collect();
    let budget = 64 + 4 * n;
    let mut failures = 0;
    let max_len = 12.min(n);
    let mut on_walk = vec![false; n];
    while failures < budget && open.len() >= 3 {
        let target = rng.gen_range(3..=max_len.max(3));
        let start = open[rng.gen_range(0..open.len())];
        let mut walk = vec![start];
        on_walk[start] = true;
        let mut closed = false;
        'grow: loop {
            let u = *walk.last().unwrap();
            if walk.len() >= target && walk.len() >= 2 && !d.has_edge((u, start)) {
                closed = true;
                break;
            }
            if walk.len() >= target + 6 {
                break;
            }
            for _ in 0..32 {
                let w = open[rng.gen_range(0..open.len())];
                if !on_walk[w] && !d.has_edge((u, w)) {
                    walk.push(w);
                    on_walk[w] = true;
                    continue 'grow;
                }
            }
            break;
        }
        for &v in &walk {
            on_walk[v] = false;
        }
        if !closed {
            failures += 1;
            continue;
        }
        failures = 0;
        for i in 0..walk.len() {
            let e = Edge::new(walk[i], walk[(i + 1) % walk.len()]);
            d.add_edge(e).expect("checked free");
            deg[walk[i]] += 1;
        }
        open.retain(|&v| deg[v] < cap);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParamMode {
    /// `κ = 3N^{2/5}`, needs `np ≥ 365N^{2/5}`.
    Plain,
    /// `κ = 6(N²p)^{1/5}`, needs `p ≥ n^{-1/3} ln⁴ n`.
    Pseudorandom,
}

/// Parameters of the construction. `n_cycles` is the assumed bound
/// `N = c' · n · ln n` on the number of cycles in a cycle decomposition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Params<F> {
    pub n: usize,
    pub p: F,
    pub kappa: F,
    pub lambda: F,
    pub n_cycles: F,
    pub c_prime: F,
    pub mode: ParamMode,
    /// Whether the density condition of `mode` holds at `(n, p)`.
    pub density_ok: bool,
    pub overridden: bool,
}

impl<F: Float> Params<F> {
    pub fn compute(n: usize, p: F, mode: ParamMode, c_prime: F) -> Result<Self, GraphError> {
        if n < 3 || !(p > F::zero() && p < F::one()) {
            return Err(GraphError::InvalidArgument(format!(
                "parameters need n >= 3 and 0 < p < 1, got n = {n}, p = {:?}",
                p.to_f64()
            )));
        }
        let c = |x: f64| F::from(x).expect("float constant");
        let nf = F::from(n).expect("vertex count as float");
        let n_cycles = c_prime * nf * nf.ln();
        let np = nf * p;
        let (kappa, density_ok) = match mode {
            ParamMode::Plain => (
                c(3.0) * n_cycles.powf(c(0.4)),
                np >= c(365.0) * n_cycles.powf(c(0.4)),
            ),
            ParamMode::Pseudorandom => (
                c(6.0) * (n_cycles * n_cycles * p).powf(c(0.2)),
                p >= nf.powf(c(-1.0 / 3.0)) * nf.ln().powi(4),
            ),
        };
        Ok(Params {
            n,
            p,
            kappa,
            lambda: lambda_for(np, kappa),
            n_cycles,
            c_prime,
            mode,
            density_ok,
            overridden: false,
        })
    }

    /// Replaces `κ` and recomputes `λ = min(np/3, κ²/12)`.
    pub fn with_kappa(mut self, kappa: F) -> Self {
        self.kappa = kappa;
        self.lambda = lambda_for(F::from(self.n).unwrap() * self.p, kappa);
        self.overridden = true;
        self
    }

    pub fn with_lambda(mut self, lambda: F) -> Self {
        self.lambda = lambda;
        self.overridden = true;
        self
    }

    pub fn np(&self) -> F {
        F::from(self.n).unwrap() * self.p
    }
}

fn lambda_for<F: Float>(np: F, kappa: F) -> F {
    let three = F::from(3.0).unwrap();
    let twelve = F::from(12.0).unwrap();
    (np / three).min(kappa * kappa / twelve)
}

/// `κ` and `λ` at which `D(n, p)` is expected to be in the class:
/// `κ = √(np(1−p)) / (155 ln^{3/4} n)`, `λ = 5 √(n/(1−p)) ln² n`.
pub fn random_regime<F: Float>(n: usize, p: F) -> (F, F) {
    let nf = F::from(n).unwrap();
    let ln = nf.ln();
    let one = F::one();
    let kappa = (nf * p * (one - p)).sqrt() / (F::from(155.0).unwrap() * ln.powf(F::from(0.75).unwrap()));
    let lambda = F::from(5.0).unwrap() * (nf / (one - p)).sqrt() * ln * ln;
    (kappa, lambda)
}

/// Numbers the class checks compare against.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Thresholds {
    /// Minimum `|ex(v)|` on `A⁺ ∪ A⁻`, normally `⌈155κ⌉`.
    pub excess: u64,
    /// The density `np` (or the regular degree it stands for).
    pub np: f64,
    pub p: f64,
    pub lambda: f64,
}

impl Thresholds {
    pub fn from_params(params: &Params<f64>) -> Self {
        Thresholds {
            excess: excess_threshold(params.kappa),
            np: params.np(),
            p: params.p,
            lambda: params.lambda,
        }
    }
}

/// `⌈155κ⌉`, at least 1.
pub fn excess_threshold(kappa: f64) -> u64 {
    ((155.0 * kappa).ceil() as u64).max(1)
}

/// One violation, with enough data to re-check it against the digraph.
#[derive(Clone, Debug, PartialEq)]
pub enum Witness {
    /// `|ex(v)|` below the required minimum.
    Excess { vertex: Vertex, excess: i64, required: u64 },
    /// An edge count at `vertex` outside `[lower, upper]`.
    Count {
        vertex: Vertex,
        what: &'static str,
        count: usize,
        lower: f64,
        upper: f64,
    },
    /// A vertex set spanning more than `bound` edges.
    Dense { vertices: Vec<Vertex>, edges: usize, bound: f64 },
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Excess { vertex, excess, required } => {
                write!(f, "v={vertex} ex={excess} required |ex|>={required}")
            }
            Witness::Count {
                vertex,
                what,
                count,
                lower,
                upper,
            } => write!(f, "v={vertex} {what}={count} allowed=[{lower:.3},{upper:.3}]"),
            Witness::Dense { vertices, edges, bound } => {
                write!(f, "|U|={} e(U)={edges} bound={bound:.3}", vertices.len())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct PropertyResult {
    pub holds: bool,
    pub witness: Option<Witness>,
    /// Set when the property holds only because the set it quantifies over
    /// is empty.
    pub vacuous: bool,
    /// Set when the check is a spot-check rather than exhaustive.
    pub sampled: bool,
}

impl PropertyResult {
    fn pass() -> Self {
        PropertyResult {
            holds: true,
            ..Default::default()
        }
    }

    fn fail(w: Witness) -> Self {
        PropertyResult {
            holds: false,
            witness: Some(w),
            ..Default::default()
        }
    }
}

/// Outcome of checking the five class properties; index 0 is P1.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassReport {
    pub properties: [PropertyResult; 5],
}

impl ClassReport {
    pub fn holds(&self, k: usize) -> bool {
        self.properties[k - 1].holds
    }

    /// P1 to P4 hold.
    pub fn is_member(&self) -> bool {
        self.properties[..4].iter().all(|r| r.holds)
    }

    pub fn is_pseudorandom_member(&self) -> bool {
        self.properties.iter().all(|r| r.holds)
    }

    /// First failing or vacuous property among P1 to P4.
    pub fn first_breach(&self) -> Option<(usize, &PropertyResult)> {
        self.properties[..4]
            .iter()
            .enumerate()
            .find(|(_, r)| !r.holds || r.vacuous)
            .map(|(i, r)| (i + 1, r))
    }
}

impl fmt::Display for ClassReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, r) in self.properties.iter().enumerate() {
            write!(f, "P{} {}", i + 1, if r.holds { "PASS" } else { "FAIL" })?;
            if let Some(w) = &r.witness {
                write!(f, " {w}")?;
            }
            if r.vacuous {
                f.write_str(" vacuous")?;
            }
            if r.sampled {
                f.write_str(" sampled")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// How the last property is spot-checked.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DensitySampling {
    pub subsets_per_size: usize,
    pub seed: u64,
}

impl Default for DensitySampling {
    fn default() -> Self {
        DensitySampling {
            subsets_per_size: 200,
            seed: 0,
        }
    }
}

/// Checks P1 to P4 exactly and P5 by sampling.
///
/// P5 draws `subsets_per_size` uniform subsets at each size
/// `s₀, 2s₀, 4s₀, …, n` with `s₀ = ⌈ln n / (50p)⌉`, and additionally checks
/// every suffix of a min-degree peeling order (the greedy densest-subgraph
/// heuristic).
pub fn classify(d: &Digraph, part: &VertexPartition, th: &Thresholds, sampling: DensitySampling) -> ClassReport {
    let n = d.vertex_count();
    assert_eq!(part.vertex_count(), n, "partition must cover the digraph");
    let ex = d.excesses();
    let mut to_minus = vec![0usize; n];
    let mut from_plus = vec![0usize; n];
    let mut to_zero = vec![0usize; n];
    let mut from_zero = vec![0usize; n];
    for (_, e) in d.edges() {
        if part.is_minus(e.head) {
            to_minus[e.tail] += 1;
        }
        if part.is_plus(e.tail) {
            from_plus[e.head] += 1;
        }
        if part.is_zero(e.head) {
            to_zero[e.tail] += 1;
        }
        if part.is_zero(e.tail) {
            from_zero[e.head] += 1;
        }
    }
    let np = th.np;
    let req = th.excess;

    let side_check = |side: Side, deg: &[usize], what: &'static str| {
        let members: Vec<Vertex> = (0..n).filter(|&v| part.side(v) == side).collect();
        if members.is_empty() {
            return PropertyResult {
                holds: true,
                vacuous: true,
                ..Default::default()
            };
        }
        for &v in &members {
            if ex[v].unsigned_abs() < req || (side == Side::Plus) != (ex[v] > 0) {
                return PropertyResult::fail(Witness::Excess {
                    vertex: v,
                    excess: ex[v],
                    required: req,
                });
            }
            let c = deg[v] as f64;
            if c < np / 4.0 || c > np {
                return PropertyResult::fail(Witness::Count {
                    vertex: v,
                    what,
                    count: deg[v],
                    lower: np / 4.0,
                    upper: np,
                });
            }
        }
        PropertyResult::pass()
    };
    let p1 = side_check(Side::Plus, &to_minus, "e(v,A-)");
    let p2 = side_check(Side::Minus, &from_plus, "e(A+,v)");

    let mut p3 = PropertyResult::pass();
    'p3: for v in part.a_dot() {
        for (what, c) in [("e(v,A0)", to_zero[v]), ("e(A0,v)", from_zero[v])] {
            if c as f64 > th.lambda {
                p3 = PropertyResult::fail(Witness::Count {
                    vertex: v,
                    what,
                    count: c,
                    lower: 0.0,
                    upper: th.lambda,
                });
                break 'p3;
            }
        }
    }

    let zero = part.a_zero();
    let mut p4 = PropertyResult::pass();
    p4.vacuous = zero.is_empty();
    'p4: for &v in &zero {
        for (what, c) in [("e(A+,v)", from_plus[v]), ("e(v,A-)", to_minus[v])] {
            if (c as f64) < np / 3.0 {
                p4 = PropertyResult::fail(Witness::Count {
                    vertex: v,
                    what,
                    count: c,
                    lower: np / 3.0,
                    upper: f64::INFINITY,
                });
                break 'p4;
            }
        }
    }

    let p5 = check_density(d, th.p, sampling);
    ClassReport {
        properties: [p1, p2, p3, p4, p5],
    }
}

fn check_density(d: &Digraph, p: f64, sampling: DensitySampling) -> PropertyResult {
    let n = d.vertex_count();
    let mut result = PropertyResult {
        holds: true,
        sampled: true,
        ..Default::default()
    };
    if n < 2 || p <= 0.0 {
        result.vacuous = true;
        return result;
    }
    let min_size = ((n as f64).ln() / (50.0 * p)).ceil().max(1.0) as usize;
    if min_size > n {
        result.vacuous = true;
        return result;
    }
    let bound = |s: usize| 100.0 * (s * s) as f64 * p;
    let mut rng = rng_for(sampling.seed, streams::CLASS_SAMPLING);
    let mut size = min_size;
    loop {
        let draws = if size == n { 1 } else { sampling.subsets_per_size };
        for _ in 0..draws {
            let u = index::sample(&mut rng, n, size).into_vec();
            let e = d.edges_within(&u).expect("sampled vertices are in range");
            if e as f64 > bound(size) {
                let mut u = u;
                u.sort_unstable();
                result.holds = false;
                result.witness = Some(Witness::Dense {
                    vertices: u,
                    edges: e,
                    bound: bound(size),
                });
                return result;
            }
        }
        if size == n {
            break;
        }
        size = (size * 2).min(n);
    }
    if let Some((u, e)) = densest_peel_violation(d, min_size, bound) {
        result.holds = false;
        result.witness = Some(Witness::Dense {
            bound: bound(u.len()),
            vertices: u,
            edges: e,
        });
    }
    result
}

/// Removes a vertex of minimum total degree inside the remaining set, one at
/// a time, and reports the first remaining set of size at least `min_size`
/// that spans more than `bound(|U|)` edges.
fn densest_peel_violation(d: &Digraph, min_size: usize, bound: impl Fn(usize) -> f64) -> Option<(Vec<Vertex>, usize)> {
    let n = d.vertex_count();
    let mut deg: Vec<usize> = (0..n).map(|v| d.out_degree(v) + d.in_degree(v)).collect();
    let mut alive = vec![true; n];
    let mut edges = d.edge_count();
    let mut heap: BinaryHeap<Reverse<(usize, Vertex)>> = (0..n).map(|v| Reverse((deg[v], v))).collect();
    let mut size = n;
    let mut removed_order = Vec::with_capacity(n);
    let mut worst: Option<usize> = None;
    while size >= min_size {
        if edges as f64 > bound(size) {
            worst = Some(removed_order.len());
            break;
        }
        let Some(Reverse((dv, v))) = heap.pop() else { break };
        if !alive[v] || dv != deg[v] {
            continue;
        }
        alive[v] = false;
        removed_order.push(v);
        size -= 1;
        edges -= deg[v];
        for w in d.out_neighbors(v).chain(d.in_neighbors(v)) {
            if alive[w] {
                deg[w] -= 1;
                heap.push(Reverse((deg[w], w)));
            }
        }
    }
    let cut = worst?;
    let gone: HashSet<Vertex> = removed_order[..cut].iter().copied().collect();
    let u: Vec<Vertex> = (0..n).filter(|v| !gone.contains(v)).collect();
    Some((u, edges))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dnp_extremes() {
        assert_eq!(gen_dnp(5, 0.0, 1).unwrap().edge_count(), 0);
        assert_eq!(gen_dnp(5, 1.0, 1).unwrap().edge_count(), 20);
        assert!(gen_dnp(5, 1.5, 1).is_err());
    }

    #[test]
    fn example_class_small() {
        let d = gen_example_class(4, 1, 0, 3).unwrap();
        assert_eq!(d.edge_count(), 2);
        assert_eq!(d.total_excess(), 2);
        let d = gen_example_class(6, 2, 0, 3).unwrap();
        assert_eq!(d.total_excess(), 6);
        assert!(gen_example_class(5, 1, 0, 0).is_err());
        assert!(gen_example_class(6, 4, 0, 0).is_err());
        assert!(gen_example_class(6, 1, 4, 0).is_err());
    }

    #[test]
    fn lambda_is_a_min() {
        let p = Params::compute(10_000, 0.3, ParamMode::Plain, 1.0).unwrap();
        assert!(p.lambda <= p.np() / 3.0 + 1e-9);
        assert!(p.lambda <= p.kappa * p.kappa / 12.0 + 1e-9);
        assert!(Params::<f64>::compute(2, 0.3, ParamMode::Plain, 1.0).is_err());
    }

    #[test]
    fn empty_digraph_all_zero_is_vacuous() {
        let d = Digraph::new(4);
        let part = VertexPartition::all_zero(4);
        let th = Thresholds {
            excess: 155,
            np: 1.0,
            p: 0.25,
            lambda: 1.0,
        };
        let r = classify(&d, &part, &th, DensitySampling::default());
        assert!(r.holds(1) && r.properties[0].vacuous);
        assert_eq!(r.first_breach().map(|(k, _)| k), Some(1));
    }
}
