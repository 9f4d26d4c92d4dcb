//! Directed grid models of PV programs: forbidden regions, reachable and safe
//! states with monotone witness paths, and deadlocks.
//!
//! A state is a cell of the product of the process axes. On an axis with `k`
//! events the ticks are `0, e_1, …, e_k, 1` and cell `j` is the segment between
//! tick `j` and tick `j + 1`, i.e. the process has executed exactly `j` events.
//! A lock held from the `P` at tick `p` to the `V` at tick `v` covers cells
//! `p ..= v - 1`.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt::{self, Write as _};

use thiserror::Error;

pub const MAX_PROCESSES: usize = 3;
pub const MAX_EVENTS: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum PvError {
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("process {process}, event {position}: V({sem}) without a matching P")]
    UnmatchedV { process: String, position: usize, sem: String },
    #[error("process {process}, event {position}: P({sem}) is never released")]
    UnmatchedP { process: String, position: usize, sem: String },
    #[error("process {process}, event {position}: P({sem}) while already holding it")]
    DoubleLock { process: String, position: usize, sem: String },
    #[error("{0}")]
    TooLarge(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SpaceError {
    #[error("space needs at least one axis")]
    NoAxes,
    #[error("forbidden box {0} leaves the grid")]
    OutOfGrid(usize),
    #[error("forbidden box {0} is empty")]
    EmptyBox(usize),
    #[error("the {0} state is forbidden")]
    EndpointForbidden(&'static str),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Op {
    P,
    V,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Event {
    pub op: Op,
    pub sem: String,
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}({})", self.op, self.sem)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Process {
    pub name: String,
    pub events: Vec<Event>,
}

impl Process {
    /// The `(P position, V position)` intervals per semaphore, positions 1-based.
    pub fn holds(&self) -> Result<BTreeMap<String, Vec<(usize, usize)>>, PvError> {
        let mut open: HashMap<&str, usize> = HashMap::new();
        let mut out: BTreeMap<String, Vec<(usize, usize)>> = BTreeMap::new();
        for (k, ev) in self.events.iter().enumerate() {
            let pos = k + 1;
            match ev.op {
                Op::P => {
                    if open.insert(&ev.sem, pos).is_some() {
                        return Err(PvError::DoubleLock {
                            process: self.name.clone(),
                            position: pos,
                            sem: ev.sem.clone(),
                        });
                    }
                }
                Op::V => match open.remove(ev.sem.as_str()) {
                    Some(p) => out.entry(ev.sem.clone()).or_default().push((p, pos)),
                    None => {
                        return Err(PvError::UnmatchedV {
                            process: self.name.clone(),
                            position: pos,
                            sem: ev.sem.clone(),
                        })
                    }
                },
            }
        }
        if let Some((sem, pos)) = open.into_iter().min_by_key(|&(_, p)| p) {
            return Err(PvError::UnmatchedP {
                process: self.name.clone(),
                position: pos,
                sem: sem.to_string(),
            });
        }
        Ok(out)
    }
}

/// Processes with capacity-one semaphores.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PvProgram {
    pub processes: Vec<Process>,
}

impl PvProgram {
    pub fn validate(&self) -> Result<(), PvError> {
        if self.processes.is_empty() || self.processes.len() > MAX_PROCESSES {
            return Err(PvError::TooLarge(format!(
                "{} processes, expected 1 to {MAX_PROCESSES}",
                self.processes.len()
            )));
        }
        for p in &self.processes {
            if p.events.len() > MAX_EVENTS {
                return Err(PvError::TooLarge(format!(
                    "process {} has {} events, at most {MAX_EVENTS} allowed",
                    p.name,
                    p.events.len()
                )));
            }
            p.holds()?;
        }
        Ok(())
    }

    pub fn semaphores(&self) -> BTreeSet<&str> {
        self.processes
            .iter()
            .flat_map(|p| p.events.iter().map(|e| e.sem.as_str()))
            .collect()
    }
}

impl fmt::Display for PvProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.processes {
            write!(f, "{}:", p.name)?;
            for e in &p.events {
                write!(f, " {e}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

fn default_name(k: usize) -> String {
    ((b'A' + k as u8) as char).to_string()
}

fn parse_event(tok: &str) -> Option<Event> {
    let op = match tok.as_bytes().first()? {
        b'P' => Op::P,
        b'V' => Op::V,
        _ => return None,
    };
    let sem = tok[1..].strip_prefix('(')?.strip_suffix(')')?;
    let ok = !sem.is_empty() && sem.chars().all(|c| c.is_alphanumeric() || c == '_');
    ok.then(|| Event { op, sem: sem.to_string() })
}

/// One process per non-empty line, optionally named `Name:`; `#` starts a comment.
pub fn parse_pv(text: &str) -> Result<PvProgram, PvError> {
    let mut processes = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (name, body) = match line.split_once(':') {
            Some((name, body)) => {
                let name = name.trim();
                if name.is_empty() || !name.chars().all(|c| c.is_alphanumeric() || c == '_') {
                    return Err(PvError::Syntax {
                        line: n + 1,
                        reason: format!("bad process name `{name}`"),
                    });
                }
                (name.to_string(), body)
            }
            None => (default_name(processes.len()), line),
        };
        let events = body
            .split_whitespace()
            .map(|tok| {
                parse_event(tok).ok_or_else(|| PvError::Syntax {
                    line: n + 1,
                    reason: format!("expected P(sem) or V(sem), found `{tok}`"),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        processes.push(Process { name, events });
    }
    let prog = PvProgram { processes };
    prog.validate()?;
    Ok(prog)
}

pub type State = Vec<usize>;

/// A box of cells, `lo[d] <= x[d] < hi[d]` on every axis, given in tick coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Region {
    pub lo: Vec<usize>,
    pub hi: Vec<usize>,
}

impl Region {
    pub fn contains(&self, x: &[usize]) -> bool {
        x.iter().enumerate().all(|(d, &c)| self.lo[d] <= c && c < self.hi[d])
    }

    pub fn cells(&self) -> Vec<State> {
        let mut out = vec![Vec::new()];
        for d in 0..self.lo.len() {
            out = out
                .into_iter()
                .flat_map(|s| {
                    (self.lo[d]..self.hi[d]).map(move |c| {
                        let mut t = s.clone();
                        t.push(c);
                        t
                    })
                })
                .collect();
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Axis {
    pub name: String,
    /// `ticks.len() - 1` cells.
    pub ticks: Vec<String>,
}

impl Axis {
    pub fn cells(&self) -> usize {
        self.ticks.len() - 1
    }

    pub fn tick(&self, label: &str) -> Option<usize> {
        self.ticks.iter().position(|t| t == label)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectedGridSpace {
    pub axes: Vec<Axis>,
    pub forbidden: Vec<Region>,
}

impl DirectedGridSpace {
    pub fn new(axes: Vec<Axis>, forbidden: Vec<Region>) -> Result<Self, SpaceError> {
        let space = DirectedGridSpace { axes, forbidden };
        space.validate()?;
        Ok(space)
    }

    /// A grid with `cells[d]` cells on axis `d` and generic tick labels.
    pub fn grid(cells: &[usize], forbidden: Vec<Region>) -> Result<Self, SpaceError> {
        let axes = cells
            .iter()
            .enumerate()
            .map(|(d, &n)| Axis {
                name: default_name(d),
                ticks: (0..=n).map(|t| t.to_string()).collect(),
            })
            .collect();
        Self::new(axes, forbidden)
    }

    pub fn validate(&self) -> Result<(), SpaceError> {
        if self.axes.is_empty() || self.axes.iter().any(|a| a.ticks.len() < 2) {
            return Err(SpaceError::NoAxes);
        }
        let shape = self.shape();
        for (k, r) in self.forbidden.iter().enumerate() {
            if r.lo.len() != shape.len() || r.hi.len() != shape.len() || r.hi.iter().zip(&shape).any(|(h, n)| h > n) {
                return Err(SpaceError::OutOfGrid(k));
            }
            if r.lo.iter().zip(&r.hi).any(|(l, h)| l >= h) {
                return Err(SpaceError::EmptyBox(k));
            }
        }
        if self.is_forbidden(&self.initial()) {
            return Err(SpaceError::EndpointForbidden("initial"));
        }
        if self.is_forbidden(&self.final_state()) {
            return Err(SpaceError::EndpointForbidden("final"));
        }
        Ok(())
    }

    pub fn dims(&self) -> usize {
        self.axes.len()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(Axis::cells).collect()
    }

    pub fn initial(&self) -> State {
        vec![0; self.dims()]
    }

    pub fn final_state(&self) -> State {
        self.shape().iter().map(|n| n - 1).collect()
    }

    pub fn is_forbidden(&self, x: &[usize]) -> bool {
        self.forbidden.iter().any(|r| r.contains(x))
    }

    /// Every cell, in lexicographic order.
    pub fn states(&self) -> Vec<State> {
        Region {
            lo: vec![0; self.dims()],
            hi: self.shape(),
        }
        .cells()
    }

    pub fn allowed(&self) -> Vec<State> {
        self.states().into_iter().filter(|x| !self.is_forbidden(x)).collect()
    }

    pub fn successors(&self, x: &[usize]) -> Vec<State> {
        let shape = self.shape();
        (0..self.dims())
            .filter(|&d| x[d] + 1 < shape[d])
            .map(|d| {
                let mut y = x.to_vec();
                y[d] += 1;
                y
            })
            .filter(|y| !self.is_forbidden(y))
            .collect()
    }

    pub fn predecessors(&self, x: &[usize]) -> Vec<State> {
        (0..self.dims())
            .filter(|&d| x[d] > 0)
            .map(|d| {
                let mut y = x.to_vec();
                y[d] -= 1;
                y
            })
            .filter(|y| !self.is_forbidden(y))
            .collect()
    }

    /// Every axis reversed; the initial and final states trade places.
    pub fn op(&self) -> DirectedGridSpace {
        let axes = self
            .axes
            .iter()
            .map(|a| Axis {
                name: a.name.clone(),
                ticks: a.ticks.iter().rev().cloned().collect(),
            })
            .collect();
        let shape = self.shape();
        let forbidden = self
            .forbidden
            .iter()
            .map(|r| Region {
                lo: r.hi.iter().zip(&shape).map(|(h, n)| n - h).collect(),
                hi: r.lo.iter().zip(&shape).map(|(l, n)| n - l).collect(),
            })
            .collect();
        DirectedGridSpace { axes, forbidden }
    }

    /// The state of `op()` corresponding to `x`.
    pub fn mirror(&self, x: &[usize]) -> State {
        x.iter().zip(self.shape()).map(|(c, n)| n - 1 - c).collect()
    }

    /// Axes reordered: axis `d` of the result is axis `perm[d]` of `self`.
    pub fn permute(&self, perm: &[usize]) -> DirectedGridSpace {
        DirectedGridSpace {
            axes: perm.iter().map(|&d| self.axes[d].clone()).collect(),
            forbidden: self
                .forbidden
                .iter()
                .map(|r| Region {
                    lo: perm.iter().map(|&d| r.lo[d]).collect(),
                    hi: perm.iter().map(|&d| r.hi[d]).collect(),
                })
                .collect(),
        }
    }
}

fn tick_label(ev: &Event, process: &str) -> String {
    let l = match ev.op {
        Op::P => 'L',
        Op::V => 'U',
    };
    format!("{l}_{}^{process}", ev.sem)
}

/// One axis per process; each semaphore held by two processes at once forbids
/// the box spanning both lock intervals, extended fully along the other axes.
pub fn from_pv(prog: &PvProgram) -> Result<DirectedGridSpace, PvError> {
    prog.validate()?;
    let axes: Vec<Axis> = prog
        .processes
        .iter()
        .map(|p| {
            let mut ticks = vec!["0".to_string()];
            ticks.extend(p.events.iter().map(|e| tick_label(e, &p.name)));
            ticks.push("1".to_string());
            Axis {
                name: p.name.clone(),
                ticks,
            }
        })
        .collect();
    let holds: Vec<_> = prog.processes.iter().map(Process::holds).collect::<Result<_, _>>()?;
    let shape: Vec<usize> = axes.iter().map(Axis::cells).collect();
    let mut forbidden = Vec::new();
    for sem in prog.semaphores() {
        for a in 0..holds.len() {
            for b in a + 1..holds.len() {
                let (Some(ia), Some(ib)) = (holds[a].get(sem), holds[b].get(sem)) else {
                    continue;
                };
                for &(pa, va) in ia {
                    for &(pb, vb) in ib {
                        let mut lo = vec![0; shape.len()];
                        let mut hi = shape.clone();
                        (lo[a], hi[a]) = (pa, va);
                        (lo[b], hi[b]) = (pb, vb);
                        forbidden.push(Region { lo, hi });
                    }
                }
            }
        }
    }
    Ok(DirectedGridSpace::new(axes, forbidden).expect("endpoints lie outside every lock interval"))
}

/// States with a stored monotone witness path: from the initial state for
/// reachability, to the final state for safety.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Witnessed {
    pub paths: BTreeMap<State, Vec<State>>,
}

impl Witnessed {
    pub fn contains(&self, x: &[usize]) -> bool {
        self.paths.contains_key(x)
    }

    pub fn states(&self) -> BTreeSet<State> {
        self.paths.keys().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }
}

/// Breadth-first closure; `parent` chains give shortest witnesses.
fn closure(start: State, step: impl Fn(&[usize]) -> Vec<State>) -> BTreeMap<State, State> {
    let mut parent: BTreeMap<State, State> = BTreeMap::new();
    parent.insert(start.clone(), start.clone());
    let mut queue = VecDeque::from([start]);
    while let Some(x) = queue.pop_front() {
        for y in step(&x) {
            if !parent.contains_key(&y) {
                parent.insert(y.clone(), x.clone());
                queue.push_back(y);
            }
        }
    }
    parent
}

fn chain(parent: &BTreeMap<State, State>, x: &State) -> Vec<State> {
    let mut path = vec![x.clone()];
    let mut cur = x;
    while parent[cur] != *cur {
        cur = &parent[cur];
        path.push(cur.clone());
    }
    path
}

pub fn reachable(space: &DirectedGridSpace) -> Witnessed {
    let parent = closure(space.initial(), |x| space.successors(x));
    let paths = parent
        .keys()
        .map(|x| {
            let mut p = chain(&parent, x);
            p.reverse();
            (x.clone(), p)
        })
        .collect();
    Witnessed { paths }
}

pub fn safe(space: &DirectedGridSpace) -> Witnessed {
    let parent = closure(space.final_state(), |x| space.predecessors(x));
    let paths = parent.keys().map(|x| (x.clone(), chain(&parent, x))).collect();
    Witnessed { paths }
}

/// Reachable, non-final states with no allowed step.
pub fn deadlocks(space: &DirectedGridSpace) -> Vec<State> {
    let fin = space.final_state();
    reachable(space)
        .paths
        .into_keys()
        .filter(|x| *x != fin && space.successors(x).is_empty())
        .collect()
}

/// A witness is a monotone unit-step path through allowed states.
pub fn is_directed_path(space: &DirectedGridSpace, path: &[State]) -> bool {
    path.iter().all(|x| !space.is_forbidden(x))
        && path.windows(2).all(|w| {
            let diffs: Vec<usize> = w[0]
                .iter()
                .zip(&w[1])
                .filter(|(a, b)| a != b)
                .map(|(a, b)| b.wrapping_sub(*a))
                .collect();
            diffs == [1]
        })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegionReport {
    pub reachable: Witnessed,
    pub safe: Witnessed,
    /// Allowed states that are not reachable.
    pub unreachable: Vec<State>,
    /// Allowed states that are not safe.
    pub unsafe_states: Vec<State>,
    pub deadlocks: Vec<State>,
}

pub fn analyze(space: &DirectedGridSpace) -> RegionReport {
    let r = reachable(space);
    let s = safe(space);
    let allowed = space.allowed();
    RegionReport {
        unreachable: allowed.iter().filter(|x| !r.contains(x)).cloned().collect(),
        unsafe_states: allowed.iter().filter(|x| !s.contains(x)).cloned().collect(),
        deadlocks: deadlocks(space),
        reachable: r,
        safe: s,
    }
}

fn glyph(space: &DirectedGridSpace, report: &RegionReport, x: &[usize]) -> char {
    if space.is_forbidden(x) {
        return '#';
    }
    match (report.reachable.contains(x), report.safe.contains(x)) {
        (true, true) => 'B',
        (true, false) => 'R',
        (false, true) => 'S',
        (false, false) => '.',
    }
}

fn fmt_state(x: &[usize]) -> String {
    let parts: Vec<String> = x.iter().map(usize::to_string).collect();
    format!("({})", parts.join(","))
}

fn fmt_states(xs: &[State]) -> String {
    if xs.is_empty() {
        return "none".into();
    }
    xs.iter().map(|x| fmt_state(x)).collect::<Vec<_>>().join(" ")
}

/// ASCII grid with the second axis drawn upwards, one block per value of any
/// further axis, then the state lists.
pub fn render(space: &DirectedGridSpace, report: &RegionReport) -> String {
    let shape = space.shape();
    let mut out = String::new();
    let names: Vec<&str> = space.axes.iter().map(|a| a.name.as_str()).collect();
    let _ = writeln!(out, "axes {} shape {}", names.join(" "), fmt_state(&shape));
    let rows = shape.get(1).copied().unwrap_or(1);
    let slices = shape.get(2).copied().unwrap_or(1);
    for z in 0..slices {
        if shape.len() > 2 {
            let _ = writeln!(out, "{} = {z}", names[2]);
        }
        for y in (0..rows).rev() {
            let line: String = (0..shape[0])
                .map(|x| {
                    let mut s = vec![x];
                    if shape.len() > 1 {
                        s.push(y);
                    }
                    if shape.len() > 2 {
                        s.push(z);
                    }
                    glyph(space, report, &s)
                })
                .collect();
            let _ = writeln!(out, "{line}");
        }
    }
    let forbidden: Vec<State> = space.states().into_iter().filter(|x| space.is_forbidden(x)).collect();
    let _ = writeln!(out, "forbidden {}", fmt_states(&forbidden));
    let _ = writeln!(out, "unreachable {}", fmt_states(&report.unreachable));
    let _ = writeln!(out, "unsafe {}", fmt_states(&report.unsafe_states));
    let _ = writeln!(out, "deadlocks {}", fmt_states(&report.deadlocks));
    out
}
