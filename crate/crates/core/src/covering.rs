//! Interval-lemma propagation: which open intervals force a perturbation to
//! be affine, grouped into components that share one slope parameter.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::additivity::AdditivityReport;
use crate::complex2d::Complex;
use crate::exactnum::QNum;
use crate::pwl::OpenInterval;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Move {
    /// `x -> x + by` (mod 1).
    Translation { by: QNum },
    /// `x -> center - x` (mod 1).
    Reflection { center: QNum },
}

impl Move {
    pub fn apply(&self, x: &QNum) -> QNum {
        match self {
            Move::Translation { by } => x + by,
            Move::Reflection { center } => center - x,
        }
    }

    pub fn inverse(&self) -> Move {
        match self {
            Move::Translation { by } => Move::Translation { by: -by },
            Move::Reflection { .. } => self.clone(),
        }
    }

    /// Image of an open interval, reduced into `[0, 1]` and split at
    /// integers.
    pub fn image(&self, iv: &OpenInterval) -> Vec<OpenInterval> {
        let (a, b) = (self.apply(&iv.lo), self.apply(&iv.hi));
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        reduce_mod1(&lo, &hi)
    }
}

/// A move restricted to a domain interval, from an additive edge.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Connection {
    pub from: OpenInterval,
    pub to: OpenInterval,
    #[serde(rename = "move")]
    pub mv: Move,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoveredComponent {
    pub intervals: Vec<OpenInterval>,
    pub connections: Vec<Connection>,
}

impl CoveredComponent {
    pub fn contains(&self, x: &QNum) -> bool {
        self.intervals.iter().any(|iv| iv.contains(x))
    }

    pub fn meets(&self, iv: &OpenInterval) -> bool {
        self.intervals.iter().any(|c| c.intersects(iv))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoveringReport {
    pub components: Vec<CoveredComponent>,
    pub uncovered: Vec<OpenInterval>,
    pub converged: bool,
    pub rounds: usize,
}

/// Pieces of `(lo, hi)` mod 1 inside `[0, 1]`; the interval must be shorter
/// than 1.
fn reduce_mod1(lo: &QNum, hi: &QNum) -> Vec<OpenInterval> {
    let shift = QNum::from_rat(num_rational::BigRational::from_integer(lo.floor()));
    let lo = lo - &shift;
    let hi = hi - &shift;
    let one = QNum::one();
    if hi <= one {
        vec![OpenInterval::new(lo, hi)]
    } else {
        vec![
            OpenInterval::new(lo, one.clone()),
            OpenInterval::new(QNum::zero(), hi - one),
        ]
    }
}

/// Sorts and merges overlapping (not merely touching) open intervals.
pub fn normalize(mut ivs: Vec<OpenInterval>) -> Vec<OpenInterval> {
    ivs.retain(|iv| !iv.is_empty());
    ivs.sort();
    let mut out: Vec<OpenInterval> = Vec::with_capacity(ivs.len());
    for iv in ivs {
        match out.last_mut() {
            Some(last) if iv.lo < last.hi => {
                if iv.hi > last.hi {
                    last.hi = iv.hi;
                }
            }
            _ => out.push(iv),
        }
    }
    out
}

fn intersect(a: &OpenInterval, b: &OpenInterval) -> Option<OpenInterval> {
    let lo = a.lo.clone().max(b.lo.clone());
    let hi = a.hi.clone().min(b.hi.clone());
    (lo < hi).then(|| OpenInterval::new(lo, hi))
}

/// For each additive 2-face, the open intervals `intr p_i(F)` mod 1; each
/// entry is one group forced to share a slope.
pub fn directly_covered(cx: &Complex, report: &AdditivityReport) -> Vec<Vec<OpenInterval>> {
    cx.faces_of_dim(2)
        .filter(|(id, _)| report.is_additive(*id))
        .map(|(_, f)| {
            let ivs = f
                .projections
                .iter()
                .flat_map(|(lo, hi)| reduce_mod1(lo, hi))
                .collect();
            normalize(ivs)
        })
        .collect()
}

/// Translations and reflections from additive edges.
pub fn edge_connections(cx: &Complex, report: &AdditivityReport) -> Vec<Connection> {
    connections_of(cx, |id| report.is_additive(id))
}

/// As [`edge_connections`], also using edges on which the limit slack of an
/// enclosing 2-face vanishes.
pub fn edge_connections_in_limits(cx: &Complex, report: &AdditivityReport) -> Vec<Connection> {
    let cones: BTreeSet<usize> = report
        .limit_cones
        .iter()
        .filter(|c| cx.face(c.face).dim == 2)
        .map(|c| c.sub)
        .collect();
    connections_of(cx, |id| report.is_additive(id) || cones.contains(&id))
}

fn connections_of(cx: &Complex, keep: impl Fn(usize) -> bool) -> Vec<Connection> {
    let mut out = Vec::new();
    for (id, f) in cx.faces_of_dim(1) {
        if !keep(id) {
            continue;
        }
        let [i, j, _] = f.triple;
        let p = &f.projections;
        let (from, mv) = if i.is_point() {
            (&p[1], Move::Translation { by: p[0].0.clone() })
        } else if j.is_point() {
            (&p[0], Move::Translation { by: p[1].0.clone() })
        } else {
            (
                &p[0],
                Move::Reflection {
                    center: p[2].0.clone(),
                },
            )
        };
        // domains are projections to the x or y axis, already inside [0, 1]
        let dom = OpenInterval::new(from.0.clone(), from.1.clone());
        for to in mv.image(&dom) {
            out.push(Connection {
                from: dom.clone(),
                to,
                mv: mv.clone(),
            });
        }
    }
    out.sort_by(|a, b| (&a.from, &a.to).cmp(&(&b.from, &b.to)));
    out.dedup();
    out
}

/// Closure of the covered groups under the moves, merging groups whose
/// intervals overlap.  Stops after `max_rounds` rounds without a fixpoint.
pub fn components(
    covered: Vec<Vec<OpenInterval>>,
    moves: &[Connection],
    max_rounds: usize,
) -> CoveringReport {
    let mut comps: Vec<CoveredComponent> = covered
        .into_iter()
        .map(|ivs| CoveredComponent {
            intervals: normalize(ivs),
            connections: Vec::new(),
        })
        .collect();
    comps = merge_overlapping(comps);
    let mut rounds = 0;
    let mut converged = false;
    while rounds < max_rounds {
        rounds += 1;
        let before: Vec<Vec<OpenInterval>> = comps.iter().map(|c| c.intervals.clone()).collect();
        for comp in comps.iter_mut() {
            let mut added = Vec::new();
            for conn in moves {
                for (dom, mv) in [(&conn.from, conn.mv.clone()), (&conn.to, conn.mv.inverse())] {
                    for c in &comp.intervals {
                        if let Some(part) = intersect(c, dom) {
                            for img in mv.image(&part) {
                                let known = comp
                                    .intervals
                                    .iter()
                                    .any(|k| k.lo <= img.lo && img.hi <= k.hi);
                                if !known {
                                    added.push(Connection {
                                        from: part.clone(),
                                        to: img,
                                        mv: mv.clone(),
                                    });
                                }
                            }
                        }
                    }
                }
            }
            if !added.is_empty() {
                let mut ivs = comp.intervals.clone();
                ivs.extend(added.iter().map(|c| c.to.clone()));
                comp.intervals = normalize(ivs);
                comp.connections.extend(added);
            }
        }
        comps = merge_overlapping(comps);
        let after: Vec<Vec<OpenInterval>> = comps.iter().map(|c| c.intervals.clone()).collect();
        if after == before {
            converged = true;
            break;
        }
    }
    let all = normalize(comps.iter().flat_map(|c| c.intervals.clone()).collect());
    let mut uncovered = Vec::new();
    let mut cursor = QNum::zero();
    for iv in &all {
        if cursor < iv.lo {
            uncovered.push(OpenInterval::new(cursor.clone(), iv.lo.clone()));
        }
        cursor = cursor.max(iv.hi.clone());
    }
    if cursor < QNum::one() {
        uncovered.push(OpenInterval::new(cursor, QNum::one()));
    }
    CoveringReport {
        components: comps,
        uncovered,
        converged,
        rounds,
    }
}

fn merge_overlapping(comps: Vec<CoveredComponent>) -> Vec<CoveredComponent> {
    let n = comps.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    // sweep over all intervals sorted by left end
    let mut tagged: Vec<(&OpenInterval, usize)> = comps
        .iter()
        .enumerate()
        .flat_map(|(k, c)| c.intervals.iter().map(move |iv| (iv, k)))
        .collect();
    tagged.sort_by(|a, b| a.0.cmp(b.0));
    let mut reach: Option<(QNum, usize)> = None;
    for (iv, k) in tagged {
        match &reach {
            Some((hi, owner)) if iv.lo < *hi => {
                let (a, b) = (find(&mut parent, *owner), find(&mut parent, k));
                if a != b {
                    parent[b.max(a)] = a.min(b);
                }
                if iv.hi > *hi {
                    reach = Some((iv.hi.clone(), *owner));
                }
            }
            _ => reach = Some((iv.hi.clone(), k)),
        }
    }
    let mut groups: Vec<Option<CoveredComponent>> = vec![None; n];
    for (k, c) in comps.into_iter().enumerate() {
        let r = find(&mut parent, k);
        match &mut groups[r] {
            Some(g) => {
                g.intervals.extend(c.intervals);
                g.connections.extend(c.connections);
            }
            slot => *slot = Some(c),
        }
    }
    let mut out: Vec<CoveredComponent> = groups
        .into_iter()
        .flatten()
        .map(|mut g| {
            g.intervals = normalize(g.intervals);
            g
        })
        .collect();
    out.sort_by(|a, b| a.intervals.first().cmp(&b.intervals.first()));
    out
}

/// Full covering analysis of a function's additivity report.
pub fn covering(cx: &Complex, report: &AdditivityReport) -> CoveringReport {
    let covered = directly_covered(cx, report);
    let moves = edge_connections(cx, report);
    components(covered, &moves, 200)
}

/// Covering that also trusts limit-additivities along edges.  Sound for
/// perturbations with one-sided limits only.
pub fn covering_in_limits(cx: &Complex, report: &AdditivityReport) -> CoveringReport {
    let covered = directly_covered(cx, report);
    let moves = edge_connections_in_limits(cx, report);
    components(covered, &moves, 200)
}
