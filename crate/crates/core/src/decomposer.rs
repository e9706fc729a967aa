//! The full pipeline: reserve absorbing paths, strip paths greedily, peel
//! cycles, merge them back, verify.

use std::collections::{BinaryHeap, BTreeMap};
use std::fmt;
use std::time::{Duration, Instant};

pub use crate::absorption::Mode;
use crate::absorption::{absorb_long, absorb_medium, absorb_short, Breach, Check, Trace, TraceEvent};
use crate::digraph::{partition_by_excess, Digraph, Edge, EdgeId, PathSeq, Vertex};
use crate::euler::{classify_cycles, cycle_class, peel_cycles, working_cycle_bound, CycleClass};
use crate::generator::{classify, DensitySampling, ParamMode, Params, Thresholds};
use crate::rng::derive_seed;
use crate::structure::{build_dot_structure, build_zero_structure, estimate_np, BuildSpec};

/// Paths claimed to partition the edges of a digraph.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Decomposition {
    pub paths: Vec<PathSeq>,
    /// `ex(D)` of the source digraph.
    pub source_excess: u64,
}

impl Decomposition {
    pub fn is_perfect(&self) -> bool {
        self.paths.len() as u64 == self.source_excess
    }
}

/// Pipeline stages, in order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stage {
    Input,
    Classify,
    Structures,
    Peel,
    Short,
    Long,
    Medium,
    Verify,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Input => "input",
            Stage::Classify => "classify",
            Stage::Structures => "structures",
            Stage::Peel => "peel",
            Stage::Short => "short",
            Stage::Long => "long",
            Stage::Medium => "medium",
            Stage::Verify => "verify",
        })
    }
}

/// What happened in a run: the last stage reached, violated assumptions,
/// non-fatal warnings, and time spent per stage.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageReport {
    pub stage: Stage,
    pub success: bool,
    pub breaches: Vec<Breach>,
    pub warnings: Vec<Breach>,
    pub timings: Vec<(Stage, Duration)>,
    /// Integer `κ` used by the run, 0 when no parameters were needed.
    pub kappa: usize,
    pub attempts: usize,
}

impl StageReport {
    fn new() -> Self {
        StageReport {
            stage: Stage::Input,
            success: false,
            breaches: Vec::new(),
            warnings: Vec::new(),
            timings: Vec::new(),
            kappa: 0,
            attempts: 1,
        }
    }

    fn fail(mut self, stage: Stage, b: Breach) -> Self {
        self.stage = stage;
        self.success = false;
        self.breaches.push(b);
        self
    }

    /// True when a decomposition was built but did not verify.
    pub fn is_verification_failure(&self) -> bool {
        self.stage == Stage::Verify && !self.success
    }
}

impl fmt::Display for StageReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "stage {} {} (kappa {}, attempts {})",
            self.stage,
            if self.success { "ok" } else { "FAILED" },
            self.kappa,
            self.attempts
        )?;
        for b in &self.breaches {
            writeln!(f, "breach {b}")?;
        }
        for w in &self.warnings {
            writeln!(f, "warning {w}")?;
        }
        for (s, t) in &self.timings {
            writeln!(f, "time {s} {:.3}ms", t.as_secs_f64() * 1e3)?;
        }
        Ok(())
    }
}

/// Knobs for [`perfect_decompose`].
#[derive(Clone, Debug, PartialEq)]
pub struct DecomposeOptions {
    pub mode: Mode,
    pub seed: u64,
    /// Overrides the formula value of `κ`.
    pub kappa: Option<f64>,
    pub lambda: Option<f64>,
    pub c_prime: f64,
    pub params: ParamMode,
    pub trace: bool,
    /// Fresh-seed retries in permissive mode.
    pub retries: usize,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        DecomposeOptions {
            mode: Mode::Strict,
            seed: 0,
            kappa: None,
            lambda: None,
            c_prime: 1.0,
            params: ParamMode::Plain,
            trace: false,
            retries: 4,
        }
    }
}

/// A verified decomposition with its report and trace.
#[derive(Clone, Debug)]
pub struct DecomposeRun {
    pub decomposition: Decomposition,
    pub report: StageReport,
    pub trace: Vec<TraceEvent>,
}

/// Strips paths from positive- to negative-excess vertices until the rest is
/// Eulerian.
///
/// Each path starts at a vertex of largest current excess and follows the
/// unused out-edge with the smallest head (then smallest id) until it reaches
/// a vertex of negative current excess. Closed loops in the walk are cut out
/// and left in the remainder.
pub fn greedy_excess_paths(d: &Digraph) -> (Vec<PathSeq>, Digraph) {
    let n = d.vertex_count();
    let mut ex = d.excesses();
    let mut out: Vec<Vec<(Vertex, EdgeId)>> = vec![Vec::new(); n];
    for (id, e) in d.edges() {
        out[e.tail].push((e.head, id));
    }
    for list in &mut out {
        list.sort_unstable();
    }
    let mut cursor = vec![0usize; n];
    let mut in_path = vec![false; d.endpoints_len()];
    let mut heap: BinaryHeap<(i64, std::cmp::Reverse<Vertex>)> = (0..n)
        .filter(|&v| ex[v] > 0)
        .map(|v| (ex[v], std::cmp::Reverse(v)))
        .collect();
    let mut paths = Vec::new();
    let mut pos: Vec<Option<usize>> = vec![None; n];

    while let Some((_, std::cmp::Reverse(s))) = heap.pop() {
        let mut walk: Vec<Vertex> = vec![s];
        let mut ids: Vec<EdgeId> = Vec::new();
        pos[s] = Some(0);
        let mut v = s;
        while ex[v] >= 0 {
            let (w, id) = out[v][cursor[v]];
            cursor[v] += 1;
            if let Some(i) = pos[w] {
                // Cut the loop w … v w; its edges stay in the remainder.
                for &x in &walk[i + 1..] {
                    pos[x] = None;
                }
                walk.truncate(i + 1);
                ids.truncate(i);
            } else {
                pos[w] = Some(walk.len());
                walk.push(w);
                ids.push(id);
            }
            v = w;
        }
        for &x in &walk {
            pos[x] = None;
        }
        for id in &ids {
            in_path[id.0] = true;
        }
        ex[s] -= 1;
        ex[v] += 1;
        if ex[s] > 0 {
            heap.push((ex[s], std::cmp::Reverse(s)));
        }
        paths.push(PathSeq::new(walk).expect("loops were cut"));
    }

    let mut rest = d.clone();
    for (id, alive) in in_path.iter().enumerate() {
        if *alive {
            rest.remove_edge(EdgeId(id));
        }
    }
    (paths, rest)
}

/// Outcome of checking raw vertex sequences against a digraph.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VerifyReport {
    pub path_count: usize,
    pub excess: u64,
    /// One line per problem found.
    pub issues: Vec<String>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.issues.is_empty()
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{} paths={} excess={}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.path_count,
            self.excess
        )?;
        for i in &self.issues {
            writeln!(f, "  {i}")?;
        }
        Ok(())
    }
}

/// Checks that each sequence is a path of at least one edge in `d`, that the
/// paths use every edge exactly once (with multiplicity), and that their
/// number is `ex(d)`.
pub fn verify_paths(d: &Digraph, paths: &[Vec<Vertex>]) -> VerifyReport {
    let n = d.vertex_count();
    let mut report = VerifyReport {
        path_count: paths.len(),
        excess: d.total_excess(),
        issues: Vec::new(),
    };
    let mut used: BTreeMap<Edge, usize> = BTreeMap::new();
    for (i, p) in paths.iter().enumerate() {
        if p.len() < 2 {
            report.issues.push(format!("path {i} has no edges"));
            continue;
        }
        if let Some(&v) = p.iter().find(|&&v| v >= n) {
            report.issues.push(format!("path {i} uses vertex {v} outside 0..{n}"));
            continue;
        }
        if PathSeq::new(p.clone()).is_err() {
            report.issues.push(format!("path {i} repeats a vertex"));
        }
        for w in p.windows(2) {
            *used.entry(Edge::new(w[0], w[1])).or_default() += 1;
        }
    }
    let have = d.edge_multiset();
    for (e, &k) in &used {
        let m = have.get(e).copied().unwrap_or(0);
        if k > m {
            report.issues.push(format!("edge {e} used {k} times, present {m} times"));
        }
    }
    for (e, &m) in &have {
        let k = used.get(e).copied().unwrap_or(0);
        if k < m {
            report.issues.push(format!("edge {e} covered {k} of {m} times"));
        }
    }
    if paths.len() as u64 != report.excess {
        report
            .issues
            .push(format!("{} paths but excess is {}", paths.len(), report.excess));
    }
    report
}

pub fn verify_decomposition(d: &Digraph, dec: &Decomposition) -> VerifyReport {
    let raw: Vec<Vec<Vertex>> = dec.paths.iter().map(|p| p.vertices().to_vec()).collect();
    verify_paths(d, &raw)
}

/// Integer `κ` for a run: the override or the formula value, floored, and in
/// permissive mode further capped by the median nonzero `|ex(v)| / 36`.
pub fn choose_kappa(d: &Digraph, params: &Params<f64>, opts: &DecomposeOptions) -> usize {
    if let Some(k) = opts.kappa {
        return (k.floor() as usize).max(1);
    }
    let formula = (params.kappa.floor() as usize).max(1);
    match opts.mode {
        Mode::Strict => formula,
        Mode::Permissive => {
            let mut ex: Vec<u64> = d.excesses().iter().map(|x| x.unsigned_abs()).filter(|&x| x > 0).collect();
            ex.sort_unstable();
            let median = ex.get(ex.len() / 2).copied().unwrap_or(0) as usize;
            formula.min(median / PERMISSIVE_FACTOR).max(1)
        }
    }
}

/// Permissive partition threshold per unit of `κ`. A high-excess vertex owns
/// `12κ` reserved edges, is the far end of about `12κ` more on average, and
/// carries at most `5κ` low-excess reserved edges; the remaining `7κ` is
/// slack for the incidence caps.
pub const PERMISSIVE_FACTOR: usize = 36;

/// Decomposes `d` into `ex(d)` paths, or reports the first assumption that
/// failed. A returned decomposition has always been verified.
pub fn perfect_decompose(d: &Digraph, opts: &DecomposeOptions) -> Result<DecomposeRun, StageReport> {
    let clock = Instant::now();
    let report = StageReport::new();
    let excess = d.total_excess();
    if d.edge_count() == 0 {
        return Ok(finished(d, Vec::new(), report, Vec::new()));
    }
    if excess == 0 {
        return Err(report.fail(
            Stage::Input,
            Breach::new(Check::ZeroExcess, "no perfect decomposition exists unless edgeless"),
        ));
    }
    if d.is_acyclic() {
        let (paths, _) = greedy_excess_paths(d);
        let mut report = report;
        report.timings.push((Stage::Input, clock.elapsed()));
        return check(d, paths, report, Vec::new());
    }

    let attempts = match opts.mode {
        Mode::Strict => 1,
        Mode::Permissive => opts.retries.max(1),
    };
    let mut last = None;
    for k in 0..attempts {
        let seed = if k == 0 { opts.seed } else { derive_seed(opts.seed, k as u64) };
        match attempt(d, opts, seed) {
            Ok(mut run) => {
                run.report.attempts = k + 1;
                return Ok(run);
            }
            Err(mut r) => {
                r.attempts = k + 1;
                if r.is_verification_failure() {
                    return Err(r);
                }
                last = Some(r);
            }
        }
    }
    Err(last.expect("at least one attempt"))
}

/// Build specifications for the two structures. The high-excess caps are
/// lowered to `|ex(v)| − 5κ` where that is below `150κ`, so removing both
/// structures never flips the sign of an excess.
pub fn structure_specs(d: &Digraph, kappa: usize, np: f64) -> (BuildSpec, BuildSpec) {
    let n = d.vertex_count();
    let mut dot = BuildSpec::dot(n, kappa, np);
    for (cap, x) in dot.caps.iter_mut().zip(d.excesses()) {
        *cap = (*cap).min((x.unsigned_abs() as usize).saturating_sub(5 * kappa));
    }
    (dot, BuildSpec::zero(n, kappa, np))
}

fn finished(d: &Digraph, paths: Vec<PathSeq>, mut report: StageReport, trace: Vec<TraceEvent>) -> DecomposeRun {
    report.stage = Stage::Verify;
    report.success = true;
    DecomposeRun {
        decomposition: Decomposition {
            paths,
            source_excess: d.total_excess(),
        },
        report,
        trace,
    }
}

fn check(d: &Digraph, paths: Vec<PathSeq>, report: StageReport, trace: Vec<TraceEvent>) -> Result<DecomposeRun, StageReport> {
    let run = finished(d, paths, report, trace);
    let v = verify_decomposition(d, &run.decomposition);
    if v.passed() {
        Ok(run)
    } else {
        let mut r = run.report;
        r.success = false;
        Err(r.fail(Stage::Verify, Breach::new(Check::Verification, v.issues.join("; "))))
    }
}

struct Timer {
    last: Instant,
}

impl Timer {
    fn lap(&mut self, report: &mut StageReport, stage: Stage) {
        let now = Instant::now();
        report.timings.push((stage, now - self.last));
        report.stage = stage;
        self.last = now;
    }
}

fn attempt(d: &Digraph, opts: &DecomposeOptions, seed: u64) -> Result<DecomposeRun, StageReport> {
    let mut report = StageReport::new();
    let mut timer = Timer { last: Instant::now() };
    let n = d.vertex_count();
    let strict = opts.mode == Mode::Strict;
    let soft = |report: &mut StageReport, stage: Stage, b: Breach| -> Result<(), StageReport> {
        if strict {
            Err(report.clone().fail(stage, b))
        } else {
            report.warnings.push(b);
            Ok(())
        }
    };

    // Parameters and partition.
    let pairs = (n * n.saturating_sub(1)).max(1) as f64;
    let p_hat = (d.edge_count() as f64 / pairs).clamp(1e-9, 1.0 - 1e-9);
    let params = Params::compute(n, p_hat, opts.params, opts.c_prime)
        .map_err(|e| report.clone().fail(Stage::Classify, Breach::new(Check::ClassMembership, e.to_string())))?;
    let kappa = choose_kappa(d, &params, opts);
    report.kappa = kappa;
    let mut params = params.with_kappa(kappa as f64);
    if let Some(l) = opts.lambda {
        params = params.with_lambda(l);
    }
    let mut th = Thresholds::from_params(&params);
    if !strict && opts.kappa.is_none() {
        th.excess = (PERMISSIVE_FACTOR * kappa) as u64;
    }
    let part = partition_by_excess(d, th.excess)
        .map_err(|e| report.clone().fail(Stage::Classify, Breach::new(Check::ClassMembership, e.to_string())))?;
    if !strict {
        th.np = estimate_np(d, &part);
    }
    let sampling = DensitySampling {
        subsets_per_size: if strict { DensitySampling::default().subsets_per_size } else { 0 },
        seed,
    };
    let class = classify(d, &part, &th, sampling);
    if let Some((k, r)) = class.first_breach() {
        let what = match &r.witness {
            Some(w) => w.to_string(),
            None => "vacuous".to_string(),
        };
        soft(&mut report, Stage::Classify, Breach::new(Check::ClassMembership, format!("P{k}: {what}")))?;
    }
    if !params.density_ok && opts.kappa.is_none() {
        report.warnings.push(Breach::new(
            Check::ClassMembership,
            format!("density condition fails at n = {n}, p = {p_hat:.4}"),
        ));
    }
    timer.lap(&mut report, Stage::Classify);

    // Reserved paths.
    let np = th.np;
    let ex = d.excesses();
    let (dot_spec, zero_spec) = structure_specs(d, kappa, np);
    let dot = build_dot_structure(d, &part, &dot_spec, seed)
        .map_err(|e| report.clone().fail(Stage::Structures, Breach::new(Check::DotStructure, e.to_string())))?;
    let zero = build_zero_structure(d, &part, &zero_spec, &dot.edge_bag(), derive_seed(seed, 1))
        .map_err(|e| report.clone().fail(Stage::Structures, Breach::new(Check::ZeroStructure, e.to_string())))?;
    let dot_inc = dot.incidence(n);
    let zero_inc = zero.incidence(n);
    for v in part.a_dot() {
        let inc = dot_inc[v] + zero_inc[v];
        if inc as u64 > ex[v].unsigned_abs() {
            return Err(report.fail(
                Stage::Structures,
                Breach::new(
                    Check::SignPreservation,
                    format!("vertex {v} has excess {} but {inc} reserved edges", ex[v]),
                ),
            ));
        }
    }
    let [s1, s2, s3] = dot
        .split(kappa)
        .map_err(|e| report.clone().fail(Stage::Structures, Breach::new(Check::DotStructure, e.to_string())))?;
    let s3 = s3
        .merge(&zero)
        .map_err(|e| report.clone().fail(Stage::Structures, Breach::new(Check::ZeroStructure, e.to_string())))?;
    timer.lap(&mut report, Stage::Structures);

    // Strip greedy paths and peel.
    let mut rest = d.clone();
    for s in [&dot, &zero] {
        for e in s.edges() {
            if rest.remove_pair(e).is_none() {
                return Err(report.fail(
                    Stage::Structures,
                    Breach::new(Check::Conservation, format!("reserved edge {e} not in the digraph")),
                ));
            }
        }
    }
    let (mut paths, eulerian) = greedy_excess_paths(&rest);
    let bundle = peel_cycles(&eulerian)
        .map_err(|e| report.clone().fail(Stage::Peel, Breach::new(Check::Conservation, e.to_string())))?;
    let n_cycles = working_cycle_bound(bundle.len(), n, opts.c_prime);
    let classes = classify_cycles(bundle.cycles, &part, kappa, n_cycles);
    timer.lap(&mut report, Stage::Peel);

    let mut trace = if opts.trace { Trace::on() } else { Trace::default() };
    let short = absorb_short(classes.short, &s3, &part, kappa, opts.c_prime, opts.mode, &mut trace)
        .map_err(|b| report.clone().fail(Stage::Short, b))?;
    report.warnings.extend(short.outcome.warnings.iter().cloned());
    let mut long_pool = classes.long;
    let mut medium_pool = classes.medium;
    for c in short.promoted {
        match cycle_class(&c, &part, kappa, n_cycles) {
            CycleClass::Long => long_pool.push(c),
            _ => medium_pool.push(c),
        }
    }
    timer.lap(&mut report, Stage::Short);

    let long = absorb_long(&long_pool, &s1, &part, kappa, opts.mode, &mut trace)
        .map_err(|b| report.clone().fail(Stage::Long, b))?;
    report.warnings.extend(long.warnings.iter().cloned());
    timer.lap(&mut report, Stage::Long);
    let medium = absorb_medium(&medium_pool, &s2, &part, kappa, opts.mode, &mut trace)
        .map_err(|b| report.clone().fail(Stage::Medium, b))?;
    report.warnings.extend(medium.warnings.iter().cloned());
    timer.lap(&mut report, Stage::Medium);

    paths.extend(long.new_paths);
    paths.extend(medium.new_paths);
    paths.extend(short.outcome.new_paths);
    let result = check(d, paths, report, trace.events);
    result.map(|mut run| {
        let now = Instant::now();
        run.report.timings.push((Stage::Verify, now - timer.last));
        run
    })
}
