//! Tree dynamic program over the cylinder tree.
//!
//! At a node of depth `m` with demanded children `D`, a cover either spends
//! rank-`m` pieces on a subset `F ⊆ D` (as many as the chromatic number of
//! `G_m[F]`) or leaves a child to be covered inside its own subtree. Children
//! whose own cost is at least `h(2^{-m})` can always join `F` without loss,
//! so only the cheaper children are enumerated.
//!
//! For faithful schedules a full cylinder at depth `m` costs at least
//! `(M_m + 1)·h(2^{-m}) > h(2^{-m-1})·N_m`-wise more than one piece of the
//! parent rank, so a full node at an admissible rank is covered by a minimum
//! colouring of its level outright.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use super::TargetSet;
use crate::error::{invalid, Error, Result};
use crate::exact::{from_biguint, int, pq_opt};
use crate::graphs::chromatic_number;
use crate::magnitude::Quantity;
use crate::schedule::{LevelSource, LevelStatus, Mode, Schedule};
use crate::space::StandardSet;

/// Optional children are enumerated exhaustively up to this many.
const ENUM_LIMIT: usize = 12;
/// Covers with more pieces than this are reported by count only.
const PIECE_LIMIT: u64 = 100_000;
const COLOR_BUDGET: u64 = 20_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Optimality {
    Exact,
    UpperBound,
}

#[derive(Clone, Debug)]
pub struct CoverOptions {
    /// `None` is `δ = ∞`; otherwise `δ = 2^{-j}` with this `j`.
    pub delta_exp: Option<i64>,
    /// Deepest admissible rank; defaults to the last schedule level.
    pub rank_cap: Option<usize>,
    pub symmetric_shortcut: bool,
}

impl CoverOptions {
    pub fn delta(delta_exp: Option<i64>) -> Self {
        CoverOptions { delta_exp, rank_cap: None, symmetric_shortcut: false }
    }

    /// Parses `δ` as `"inf"` or a power of two.
    pub fn parse_delta(s: &str) -> Result<Option<i64>> {
        match crate::exact::parse_delta(s)? {
            None => Ok(None),
            Some(d) => match crate::exact::log2_exact(&d) {
                Some(e) => Ok(Some(e)),
                None => invalid(format!("δ = {s} is not a power of two")),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoverSolution {
    /// `None` when no admissible cover exists within the rank cap.
    #[serde(with = "pq_opt")]
    pub value: Option<BigRational>,
    /// Listed when the cover is small and every piece lies on a materialized level.
    pub pieces: Option<Vec<StandardSet>>,
    pub piece_count: Option<String>,
    pub whole_space: bool,
    pub optimality: Optimality,
    pub rank_cap: usize,
    pub rank_cap_binding: bool,
    pub shortcut_used: bool,
    pub gauge_constant_extension: bool,
    pub toy: bool,
}

type Cost = Option<BigRational>;
/// Chromatic number with its colour classes.
type Coloring = (usize, Vec<Vec<usize>>);

fn add(a: &Cost, b: &Cost) -> Cost {
    Some(a.as_ref()? + b.as_ref()?)
}

fn less(a: &Cost, b: &Cost) -> bool {
    match (a, b) {
        (Some(x), Some(y)) => x < y,
        (Some(_), None) => true,
        _ => false,
    }
}

#[derive(Clone, Debug)]
enum Trie {
    Full,
    Partial(BTreeMap<usize, Trie>),
}

impl Trie {
    fn build(target: &TargetSet) -> Option<Trie> {
        if target.is_empty() {
            return None;
        }
        let mut root = Trie::Partial(BTreeMap::new());
        for c in &target.cylinders {
            let mut node = &mut root;
            for (i, &a) in c.iter().enumerate() {
                let Trie::Partial(map) = node else { unreachable!("distinct cylinders") };
                let last = i + 1 == c.len();
                node = map.entry(a).or_insert_with(|| if last { Trie::Full } else { Trie::Partial(BTreeMap::new()) });
            }
            if c.is_empty() {
                root = Trie::Full;
            }
        }
        Some(root)
    }
}

/// How a node is covered: `classes` are rank-`m` pieces (subsets of level
/// `m`), `descend` children are covered inside their subtrees.
#[derive(Clone, Debug)]
struct Plan {
    classes: Vec<Vec<usize>>,
    /// Number of rank-`m` pieces when the level is symbolic.
    symbolic_pieces: Option<BigUint>,
    descend: Vec<(usize, Node)>,
}

#[derive(Clone, Debug)]
enum Node {
    /// Full cylinder at this depth; plan in the per-depth memo.
    Full(usize),
    Partial(Box<Plan>),
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum TailMode {
    Infinite,
    LowerBound,
}

struct Dp<'a> {
    s: &'a Schedule,
    j_min: usize,
    cap: usize,
    tail: TailMode,
    shortcut: bool,
    full: HashMap<usize, (Cost, Plan)>,
    chi: HashMap<(usize, Vec<usize>), Coloring>,
    upper: bool,
    shortcut_used: bool,
}

impl<'a> Dp<'a> {
    fn faithful(&self) -> bool {
        self.s.mode == Mode::Faithful
    }

    fn admissible(&self, m: usize) -> bool {
        m >= self.j_min && m <= self.cap
    }

    fn h(&self, m: usize) -> Result<BigRational> {
        self.s.gauge_at_level(m)
    }

    /// `(M_m + 1)·h(2^{-m})`, valid in faithful schedules.
    fn full_lower_bound(&self, m: usize) -> Result<BigRational> {
        let mm = self
            .s
            .m(m)
            .and_then(|q| q.as_exact().cloned())
            .ok_or_else(|| Error::Horizon(format!("M_{m} is not exact")))?;
        Ok((from_biguint(&mm) + int(1)) * self.h(m)?)
    }

    fn tail_cost(&self, m: usize) -> Result<Cost> {
        Ok(match self.tail {
            TailMode::Infinite => None,
            TailMode::LowerBound if self.faithful() => Some(self.full_lower_bound(m)?),
            TailMode::LowerBound if m < self.s.levels.len() => Some(BigRational::zero()),
            TailMode::LowerBound => None,
        })
    }

    fn chromatic(&mut self, m: usize, set: &[usize]) -> Result<(usize, Vec<Vec<usize>>)> {
        if set.is_empty() {
            return Ok((0, Vec::new()));
        }
        let key = (m, set.to_vec());
        if let Some(v) = self.chi.get(&key) {
            return Ok(v.clone());
        }
        let g = self.s.graph(m).expect("materialized");
        let (k, mut classes) = chromatic_number(g, set, COLOR_BUDGET)?;
        for c in &mut classes {
            c.sort_unstable();
        }
        classes.sort();
        self.chi.insert(key, (k, classes.clone()));
        Ok((k, classes))
    }

    fn solve_full(&mut self, m: usize) -> Result<Cost> {
        if let Some((c, _)) = self.full.get(&m) {
            return Ok(c.clone());
        }
        let (cost, plan) = self.solve_full_uncached(m)?;
        self.full.insert(m, (cost.clone(), plan));
        Ok(cost)
    }

    fn solve_full_uncached(&mut self, m: usize) -> Result<(Cost, Plan)> {
        let empty = Plan { classes: Vec::new(), symbolic_pieces: None, descend: Vec::new() };
        if m > self.cap || m >= self.s.levels.len() {
            return Ok((self.tail_cost(m)?, empty));
        }
        let level = &self.s.levels[m];
        if level.graph.is_none() {
            return self.solve_symbolic_full(m);
        }
        let n = self.s.graph(m).expect("materialized").vertex_count();
        let all: Vec<usize> = (0..n).collect();
        if self.faithful() && self.admissible(m) {
            // every child costs at least (M_{m+1}+1)·h(2^{-m-1}) > h(2^{-m})
            let (k, classes) = self.chromatic(m, &all)?;
            let cost = Some(int(k as i64) * self.h(m)?);
            return Ok((cost, Plan { classes, symbolic_pieces: None, descend: Vec::new() }));
        }
        let child = self.solve_full(m + 1)?;
        let children: Vec<(usize, Cost, Node)> = all.iter().map(|&a| (a, child.clone(), Node::Full(m + 1))).collect();
        self.solve_node(m, children, true)
    }

    fn solve_symbolic_full(&mut self, m: usize) -> Result<(Cost, Plan)> {
        let level = &self.s.levels[m];
        let chi = match (&level.source, level.status) {
            (LevelSource::SymbolicKneser { m: km, k }, LevelStatus::KneserStructure) => {
                match (km.as_exact(), k.as_exact()) {
                    (Some(km), Some(k)) => Some(km + 2u32 - k * 2u32),
                    _ => None,
                }
            }
            _ => None,
        };
        let Some(chi) = chi else {
            return Err(Error::Materialization(format!("level {m} has no graph and no exact chromatic number")));
        };
        if self.admissible(m) && self.faithful() {
            let cost = Some(from_biguint(&chi) * self.h(m)?);
            return Ok((cost, Plan { classes: Vec::new(), symbolic_pieces: Some(chi), descend: Vec::new() }));
        }
        if self.admissible(m) {
            return Err(Error::Materialization(format!("level {m} is symbolic; subset search needs its graph")));
        }
        let n = match &level.n {
            Quantity::Exact(v) => v.clone(),
            Quantity::Mag(_) => return Err(Error::Horizon(format!("N_{m} is only known as a magnitude"))),
        };
        let child = self.solve_full(m + 1)?;
        let cost = child.map(|c| c * from_biguint(&n));
        // children are covered alike; plan recorded by count only
        let plan = Plan { classes: Vec::new(), symbolic_pieces: None, descend: vec![(usize::MAX, Node::Full(m + 1))] };
        Ok((cost, plan))
    }

    fn solve_partial(&mut self, prefix_len: usize, map: &BTreeMap<usize, Trie>) -> Result<(Cost, Plan)> {
        let m = prefix_len;
        let mut children = Vec::with_capacity(map.len());
        for (&a, sub) in map {
            match sub {
                Trie::Full => {
                    let c = self.solve_full(m + 1)?;
                    children.push((a, c, Node::Full(m + 1)));
                }
                Trie::Partial(next) => {
                    let (c, plan) = self.solve_partial(m + 1, next)?;
                    children.push((a, c, Node::Partial(Box::new(plan))));
                }
            }
        }
        let all_demanded = self.s.graph(m).is_some_and(|g| g.vertex_count() == map.len());
        self.solve_node(m, children, all_demanded)
    }

    fn solve_node(&mut self, m: usize, children: Vec<(usize, Cost, Node)>, all_demanded: bool) -> Result<(Cost, Plan)> {
        let descend_all = |children: Vec<(usize, Cost, Node)>| {
            let cost = children.iter().try_fold(BigRational::zero(), |acc, (_, c, _)| Some(acc + c.as_ref()?));
            let descend = children.into_iter().map(|(a, _, n)| (a, n)).collect();
            (cost, Plan { classes: Vec::new(), symbolic_pieces: None, descend })
        };
        if !self.admissible(m) || self.s.graph(m).is_none() {
            return Ok(descend_all(children));
        }
        let h = self.h(m)?;
        let h_cost = Some(h.clone());
        let forced: Vec<usize> = (0..children.len()).filter(|&i| !less(&children[i].1, &h_cost)).collect();
        let optional: Vec<usize> = (0..children.len()).filter(|&i| less(&children[i].1, &h_cost)).collect();

        let all_equal = children.windows(2).all(|w| w[0].1 == w[1].1);
        let candidate_masks: Vec<u64> = if self.shortcut && all_demanded && all_equal && !optional.is_empty() {
            self.shortcut_used = true;
            self.upper = true;
            vec![0, (1u64 << optional.len().min(63)) - 1]
        } else if optional.len() <= ENUM_LIMIT {
            (0..1u64 << optional.len()).collect()
        } else {
            self.upper = true;
            vec![0, u64::MAX]
        };

        let mut best: Option<(Cost, Vec<Vec<usize>>, u64)> = None;
        for mask in candidate_masks {
            let mut f: Vec<usize> = forced.iter().map(|&i| children[i].0).collect();
            let mut rest = Some(BigRational::zero());
            for (bit, &i) in optional.iter().enumerate() {
                if bit < 64 && mask >> bit & 1 == 1 {
                    f.push(children[i].0);
                } else {
                    rest = add(&rest, &children[i].1);
                }
            }
            f.sort_unstable();
            let (k, classes) = self.chromatic(m, &f)?;
            let cost = add(&Some(int(k as i64) * &h), &rest);
            if best.as_ref().is_none_or(|(b, _, _)| less(&cost, b)) {
                best = Some((cost, classes, mask));
            }
        }
        let (cost, classes, mask) = best.expect("at least one candidate");
        let chosen: Vec<bool> = (0..children.len())
            .map(|i| match optional.iter().position(|&j| j == i) {
                Some(bit) => bit < 64 && mask >> bit & 1 == 1,
                None => true,
            })
            .collect();
        let descend = children.into_iter().zip(chosen).filter(|(_, c)| !c).map(|((a, _, n), _)| (a, n)).collect();
        Ok((cost, Plan { classes, symbolic_pieces: None, descend }))
    }

    fn run(&mut self, trie: &Trie) -> Result<(Cost, Node)> {
        Ok(match trie {
            Trie::Full => (self.solve_full(0)?, Node::Full(0)),
            Trie::Partial(map) => {
                let (c, plan) = self.solve_partial(0, map)?;
                (c, Node::Partial(Box::new(plan)))
            }
        })
    }

    fn count(&self, node: &Node, memo: &mut HashMap<usize, BigUint>) -> BigUint {
        match node {
            Node::Partial(plan) => self.count_plan(plan, memo),
            Node::Full(m) => {
                if let Some(c) = memo.get(m) {
                    return c.clone();
                }
                let c = match self.full.get(m) {
                    Some((_, plan)) => {
                        let plan = plan.clone();
                        self.count_plan(&plan, memo)
                    }
                    None => BigUint::zero(),
                };
                memo.insert(*m, c.clone());
                c
            }
        }
    }

    fn count_plan(&self, plan: &Plan, memo: &mut HashMap<usize, BigUint>) -> BigUint {
        let mut total = plan.symbolic_pieces.clone().unwrap_or_else(|| BigUint::from(plan.classes.len()));
        for (a, child) in &plan.descend {
            let c = self.count(child, memo);
            if *a == usize::MAX {
                // all children of a symbolic level alike
                if let Node::Full(m) = child {
                    if let Quantity::Exact(n) = &self.s.levels[m - 1].n {
                        total += c * n;
                        continue;
                    }
                }
            }
            total += c;
        }
        total
    }

    fn list(&self, node: &Node, prefix: &mut Vec<usize>, out: &mut Vec<StandardSet>) -> Result<()> {
        let plan = match node {
            Node::Partial(plan) => plan.as_ref().clone(),
            Node::Full(m) => match self.full.get(m) {
                Some((_, plan)) => plan.clone(),
                None => return Ok(()),
            },
        };
        if plan.symbolic_pieces.is_some() || plan.descend.iter().any(|(a, _)| *a == usize::MAX) {
            return Err(Error::Materialization("cover uses symbolic levels".into()));
        }
        for class in &plan.classes {
            out.push(StandardSet { rank: prefix.len(), prefix: prefix.clone(), h: class.clone() });
        }
        for (a, child) in &plan.descend {
            prefix.push(*a);
            self.list(child, prefix, out)?;
            prefix.pop();
        }
        Ok(())
    }
}

/// Minimum of `Σ h(2^{-rank})` over covers of `target` by standard sets of
/// rank at most `rank_cap` and diameter at most `δ`; with `δ = ∞` the whole
/// space (cost `h(1)` under the constant extension) is also allowed.
pub fn optimal_cover_cost(s: &Schedule, target: &TargetSet, opts: &CoverOptions) -> Result<CoverSolution> {
    target.validate(s)?;
    let last = s.levels.len() - 1;
    let cap = opts.rank_cap.unwrap_or(last).min(last);
    let j_min = match opts.delta_exp {
        None => 0,
        Some(e) if e > 0 => 0,
        Some(e) => e.unsigned_abs() as usize,
    };
    let mut sol = CoverSolution {
        value: Some(BigRational::zero()),
        pieces: Some(Vec::new()),
        piece_count: Some("0".into()),
        whole_space: false,
        optimality: Optimality::Exact,
        rank_cap: cap,
        rank_cap_binding: false,
        shortcut_used: false,
        gauge_constant_extension: false,
        toy: s.is_toy(),
    };
    let Some(trie) = Trie::build(target) else {
        return Ok(sol);
    };
    let mut dp = Dp {
        s,
        j_min,
        cap,
        tail: TailMode::Infinite,
        shortcut: opts.symmetric_shortcut,
        full: HashMap::new(),
        chi: HashMap::new(),
        upper: false,
        shortcut_used: false,
    };
    let (value, root) = dp.run(&trie)?;

    let mut lower = Dp {
        s,
        j_min,
        cap,
        tail: TailMode::LowerBound,
        shortcut: opts.symmetric_shortcut,
        full: HashMap::new(),
        chi: std::mem::take(&mut dp.chi),
        upper: false,
        shortcut_used: false,
    };
    let binding = match lower.run(&trie) {
        Ok((lv, _)) => lv != value,
        Err(_) => true,
    };

    sol.value = value.clone();
    sol.rank_cap_binding = binding;
    sol.shortcut_used = dp.shortcut_used;
    sol.optimality = if binding || dp.upper { Optimality::UpperBound } else { Optimality::Exact };

    let count = dp.count(&root, &mut HashMap::new());
    sol.piece_count = Some(count.to_string());
    sol.pieces = if value.is_some() && count.to_u64().is_some_and(|c| c <= PIECE_LIMIT) {
        let mut out = Vec::new();
        dp.list(&root, &mut Vec::new(), &mut out).ok().map(|_| out)
    } else {
        None
    };

    if opts.delta_exp.is_none() {
        sol.gauge_constant_extension = true;
        let whole = s.gauge_at_level(0)?;
        if value.as_ref().is_none_or(|v| whole < *v) {
            sol.value = Some(whole);
            sol.whole_space = true;
            sol.pieces = Some(Vec::new());
            sol.piece_count = Some("1".into());
        }
    }
    if sol.value.is_none() {
        sol.pieces = None;
        sol.piece_count = None;
    }
    Ok(sol)
}
