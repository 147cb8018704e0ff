//! The two-dimensional complex ΔP of faces `F(I, J, K)`.
//!
//! Faces are enumerated over the fundamental domain `[0,1]^2`, with `K`
//! taken from the breakpoint complex extended to `[0, 2]`.  Each face is
//! keyed by the triple of minimal one-dimensional faces containing the
//! projections of its relative interior, which makes the key unique.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::exactnum::QNum;
use crate::pwl::{extended_breakpoints, floor_index, OpenInterval, PwlFunction};

/// A face of the breakpoint complex: the point `X[idx]` or, when `open`,
/// the closed interval `[X[idx], X[idx+1]]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PFace {
    pub idx: u32,
    pub open: bool,
}

impl PFace {
    pub fn point(idx: usize) -> Self {
        PFace {
            idx: idx as u32,
            open: false,
        }
    }

    pub fn interval(idx: usize) -> Self {
        PFace {
            idx: idx as u32,
            open: true,
        }
    }

    pub fn is_point(&self) -> bool {
        !self.open
    }
}

pub type Triple = [PFace; 3];

pub type Point = (QNum, QNum);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Face {
    pub triple: Triple,
    pub dim: u8,
    /// Extreme points; counterclockwise for 2-faces, sorted for edges.
    pub vertices: Vec<Point>,
    /// Closed projections `p_1(F), p_2(F), p_3(F)` as `(min, max)`.
    pub projections: [(QNum, QNum); 3],
    /// Ids of the 0-faces at `vertices`, in the same order (the face itself
    /// for a 0-face).
    pub vertex_faces: Vec<usize>,
    /// Ids of the bounding edges of a 2-face.
    pub edge_faces: Vec<usize>,
}

impl Face {
    /// Proper faces: edges then vertices.
    pub fn subfaces(&self) -> impl Iterator<Item = usize> + '_ {
        let vs: &[usize] = if self.dim == 0 {
            &[]
        } else {
            &self.vertex_faces
        };
        self.edge_faces.iter().chain(vs).copied()
    }

    /// Projection of the relative interior: an open interval, or a point
    /// when `lo == hi`.
    pub fn relint_projection(&self, i: usize) -> (&QNum, &QNum) {
        let (lo, hi) = &self.projections[i];
        (lo, hi)
    }

    pub fn contains(&self, p: &Point) -> bool {
        let (x, y) = p;
        let s = x + y;
        let inside = |v: &QNum, (lo, hi): &(QNum, QNum)| lo <= v && v <= hi;
        if !(inside(x, &self.projections[0])
            && inside(y, &self.projections[1])
            && inside(&s, &self.projections[2]))
        {
            return false;
        }
        if self.dim < 2 {
            return self.dim == 0 || on_segment(&self.vertices[0], &self.vertices[1], p);
        }
        let n = self.vertices.len();
        (0..n).all(|i| !cross(&self.vertices[i], &self.vertices[(i + 1) % n], p).is_negative())
    }
}

fn cross(o: &Point, a: &Point, b: &Point) -> QNum {
    (&a.0 - &o.0) * (&b.1 - &o.1) - (&a.1 - &o.1) * (&b.0 - &o.0)
}

fn on_segment(a: &Point, b: &Point, p: &Point) -> bool {
    cross(a, b, p).is_zero()
        && a.0.clone().min(b.0.clone()) <= p.0
        && p.0 <= a.0.clone().max(b.0.clone())
        && a.1.clone().min(b.1.clone()) <= p.1
        && p.1 <= a.1.clone().max(b.1.clone())
}

#[derive(Clone, Debug)]
pub struct Complex {
    /// Breakpoints per period.
    pub n: usize,
    /// `x_0..x_{n-1}, 1+x_0..1+x_{n-1}, 2`.
    pub xs: Vec<QNum>,
    pub faces: Vec<Face>,
    index: HashMap<Triple, usize>,
}

struct Raw {
    dim: u8,
    vertices: Vec<Point>,
    sub: Vec<Triple>,
}

impl Complex {
    pub fn new(pi: &PwlFunction) -> Complex {
        Complex::from_breakpoints(&pi.breakpoints())
    }

    pub fn from_breakpoints(bps: &[QNum]) -> Complex {
        let n = bps.len();
        let xs = extended_breakpoints(bps);
        let mut raw: HashMap<Triple, Raw> = HashMap::new();
        for i in 0..n {
            for j in 0..n {
                let (a, b) = (&xs[i], &xs[i + 1]);
                let (c, d) = (&xs[j], &xs[j + 1]);
                let lo = a + c;
                let hi = b + d;
                let mut k = floor_index(&xs, &lo).expect("sum is nonnegative");
                while k + 1 < xs.len() && xs[k] < hi {
                    let poly = clip_strip(a, b, c, d, &xs[k], &xs[k + 1]);
                    if poly.len() >= 3 {
                        add_polygon(&mut raw, &xs, [i, j, k], poly);
                    }
                    k += 1;
                }
            }
        }
        let mut triples: Vec<Triple> = raw.keys().copied().collect();
        triples.sort();
        let index: HashMap<Triple, usize> =
            triples.iter().enumerate().map(|(id, t)| (*t, id)).collect();
        let faces = triples
            .iter()
            .enumerate()
            .map(|(own, t)| {
                let r = &raw[t];
                let projections = project(&r.vertices);
                let mut vertex_faces = Vec::new();
                let mut edge_faces = Vec::new();
                if r.dim == 0 {
                    vertex_faces.push(own);
                }
                for s in &r.sub {
                    let id = index[s];
                    if raw[s].dim == 0 {
                        vertex_faces.push(id);
                    } else {
                        edge_faces.push(id);
                    }
                }
                Face {
                    triple: *t,
                    dim: r.dim,
                    vertices: r.vertices.clone(),
                    projections,
                    vertex_faces,
                    edge_faces,
                }
            })
            .collect();
        Complex {
            n,
            xs,
            faces,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn face(&self, id: usize) -> &Face {
        &self.faces[id]
    }

    pub fn id_of(&self, triple: &Triple) -> Option<usize> {
        self.index.get(triple).copied()
    }

    pub fn faces_of_dim(&self, dim: u8) -> impl Iterator<Item = (usize, &Face)> {
        self.faces
            .iter()
            .enumerate()
            .filter(move |(_, f)| f.dim == dim)
    }

    /// Closed interval `(lo, hi)` of a one-dimensional face (equal ends for
    /// a point).
    pub fn pface_bounds(&self, p: PFace) -> (QNum, QNum) {
        let i = p.idx as usize;
        if p.open {
            (self.xs[i].clone(), self.xs[i + 1].clone())
        } else {
            (self.xs[i].clone(), self.xs[i].clone())
        }
    }

    /// Minimal face of the extended breakpoint complex containing `t`.
    pub fn pface_of(&self, t: &QNum) -> Option<PFace> {
        let i = floor_index(&self.xs, t)?;
        if self.xs[i] == *t {
            Some(PFace::point(i))
        } else if i + 1 < self.xs.len() {
            Some(PFace::interval(i))
        } else {
            None
        }
    }

    /// Face whose relative interior contains `(x, y)`, for `x, y` in `[0,1]`.
    pub fn face_of_point(&self, x: &QNum, y: &QNum) -> Option<usize> {
        let one = QNum::one();
        if x.is_negative() || y.is_negative() || *x > one || *y > one {
            return None;
        }
        let t = [
            self.pface_of(x)?,
            self.pface_of(y)?,
            self.pface_of(&(x + y))?,
        ];
        self.id_of(&t)
    }

    /// Whether this face is the representative of the pair `F(I,J,K)`,
    /// `F(J,I,K)`: the lexicographically smaller triple.
    pub fn is_representative(&self, id: usize) -> bool {
        let [i, j, k] = self.faces[id].triple;
        [i, j, k] <= [j, i, k]
    }

    /// Id of the mirror image `F(J, I, K)`.
    pub fn transpose(&self, id: usize) -> usize {
        let [i, j, k] = self.faces[id].triple;
        self.index[&[j, i, k]]
    }

    /// Number of projections of `relint(F)` meeting the open intervals
    /// (taken mod 1).
    pub fn n_f(&self, id: usize, special: &[OpenInterval]) -> usize {
        let face = &self.faces[id];
        (0..3)
            .filter(|&i| {
                let (lo, hi) = face.relint_projection(i);
                meets_mod1(lo, hi, special)
            })
            .count()
    }

    pub fn describe(&self, id: usize) -> String {
        let t = self.faces[id].triple;
        let parts: Vec<String> = t.iter().map(|p| self.describe_pface(*p)).collect();
        format!("F({}, {}, {})", parts[0], parts[1], parts[2])
    }

    pub fn describe_pface(&self, p: PFace) -> String {
        let (lo, hi) = self.pface_bounds(p);
        if p.open {
            format!("[{lo}, {hi}]")
        } else {
            format!("{{{lo}}}")
        }
    }
}

/// Whether the open interval `(lo, hi)`, or the point `lo` when `lo == hi`,
/// meets one of the open intervals shifted by an integer in `-1..=1`.
pub fn meets_mod1(lo: &QNum, hi: &QNum, special: &[OpenInterval]) -> bool {
    let shifts = [QNum::from_int(-1), QNum::zero(), QNum::one()];
    special.iter().any(|iv| {
        shifts.iter().any(|t| {
            let s = iv.shifted(t);
            if lo == hi {
                s.contains(lo)
            } else {
                *lo < s.hi && s.lo < *hi
            }
        })
    })
}

fn project(vs: &[Point]) -> [(QNum, QNum); 3] {
    let mut out: [(QNum, QNum); 3] = Default::default();
    for (i, slot) in out.iter_mut().enumerate() {
        let vals: Vec<QNum> = vs
            .iter()
            .map(|(x, y)| match i {
                0 => x.clone(),
                1 => y.clone(),
                _ => x + y,
            })
            .collect();
        let lo = vals.iter().min().unwrap().clone();
        let hi = vals.iter().max().unwrap().clone();
        *slot = (lo, hi);
    }
    out
}

/// Rectangle `[a,b] x [c,d]` clipped to `e <= x+y <= g`, counterclockwise,
/// without repeated or collinear vertices.
fn clip_strip(a: &QNum, b: &QNum, c: &QNum, d: &QNum, e: &QNum, g: &QNum) -> Vec<Point> {
    let rect = vec![
        (a.clone(), c.clone()),
        (b.clone(), c.clone()),
        (b.clone(), d.clone()),
        (a.clone(), d.clone()),
    ];
    let lower = clip_half(&rect, |p| &p.0 + &p.1 - e);
    let poly = clip_half(&lower, |p| g - &p.0 - &p.1);
    simplify(poly)
}

/// Sutherland-Hodgman step keeping `h >= 0` for an affine `h`.
fn clip_half(poly: &[Point], h: impl Fn(&Point) -> QNum) -> Vec<Point> {
    let mut out = Vec::new();
    let n = poly.len();
    for i in 0..n {
        let p = &poly[i];
        let q = &poly[(i + 1) % n];
        let hp = h(p);
        let hq = h(q);
        if !hp.is_negative() {
            out.push(p.clone());
        }
        if (hp.is_positive() && hq.is_negative()) || (hp.is_negative() && hq.is_positive()) {
            let t = &hp / &(&hp - &hq);
            out.push((&p.0 + &t * (&q.0 - &p.0), &p.1 + &t * (&q.1 - &p.1)));
        }
    }
    out
}

fn simplify(mut poly: Vec<Point>) -> Vec<Point> {
    poly.dedup();
    while poly.len() > 1 && poly.first() == poly.last() {
        poly.pop();
    }
    loop {
        let n = poly.len();
        if n < 3 {
            return poly;
        }
        let drop =
            (0..n).find(|&i| cross(&poly[(i + n - 1) % n], &poly[i], &poly[(i + 1) % n]).is_zero());
        match drop {
            Some(i) => {
                poly.remove(i);
            }
            None => break,
        }
    }
    let start = (0..poly.len())
        .min_by(|&i, &j| poly[i].cmp(&poly[j]))
        .unwrap();
    poly.rotate_left(start);
    poly
}

fn locate_in(xs: &[QNum], lo_idx: usize, t: &QNum) -> PFace {
    if *t == xs[lo_idx] {
        PFace::point(lo_idx)
    } else if *t == xs[lo_idx + 1] {
        PFace::point(lo_idx + 1)
    } else {
        PFace::interval(lo_idx)
    }
}

fn vertex_triple(xs: &[QNum], ijk: [usize; 3], p: &Point) -> Triple {
    [
        locate_in(xs, ijk[0], &p.0),
        locate_in(xs, ijk[1], &p.1),
        locate_in(xs, ijk[2], &(&p.0 + &p.1)),
    ]
}

fn add_polygon(raw: &mut HashMap<Triple, Raw>, xs: &[QNum], ijk: [usize; 3], poly: Vec<Point>) {
    let n = poly.len();
    let mut sub = Vec::with_capacity(2 * n);
    let vtriples: Vec<Triple> = poly.iter().map(|p| vertex_triple(xs, ijk, p)).collect();
    for (p, t) in poly.iter().zip(&vtriples) {
        raw.entry(*t).or_insert_with(|| Raw {
            dim: 0,
            vertices: vec![p.clone()],
            sub: Vec::new(),
        });
    }
    for i in 0..n {
        let p = &poly[i];
        let q = &poly[(i + 1) % n];
        let (tp, tq) = (vtriples[i], vtriples[(i + 1) % n]);
        // an edge keeps the coordinate that is constant along it
        let mut t = [
            PFace::interval(ijk[0]),
            PFace::interval(ijk[1]),
            PFace::interval(ijk[2]),
        ];
        if p.0 == q.0 {
            t[0] = tp[0];
        } else if p.1 == q.1 {
            t[1] = tp[1];
        } else {
            t[2] = tp[2];
        }
        let mut ends = vec![p.clone(), q.clone()];
        ends.sort();
        raw.entry(t).or_insert_with(|| Raw {
            dim: 1,
            vertices: ends,
            sub: if p < q { vec![tp, tq] } else { vec![tq, tp] },
        });
        sub.push(t);
    }
    sub.extend(vtriples);
    raw.insert(
        [
            PFace::interval(ijk[0]),
            PFace::interval(ijk[1]),
            PFace::interval(ijk[2]),
        ],
        Raw {
            dim: 2,
            vertices: poly,
            sub,
        },
    );
}

impl fmt::Display for PFace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.open {
            write!(f, "I{}", self.idx)
        } else {
            write!(f, "x{}", self.idx)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::q;

    fn grid(points: &[&str]) -> Complex {
        let bps: Vec<QNum> = points.iter().map(|s| q(s)).collect();
        Complex::from_breakpoints(&bps)
    }

    #[test]
    fn single_breakpoint_complex() {
        // [0,1]^2 split by the diagonal x+y=1: 2 triangles, 5 edges, 4 vertices
        let c = grid(&["0"]);
        let count = |d| c.faces_of_dim(d).count();
        assert_eq!((count(2), count(1), count(0)), (2, 5, 4));
        for (_, f) in c.faces_of_dim(2) {
            assert_eq!(f.vertices.len(), 3);
            assert_eq!(f.edge_faces.len(), 3);
        }
    }

    #[test]
    fn two_breakpoints() {
        let c = grid(&["0", "1/2"]);
        // 4 squares each cut by one diagonal
        assert_eq!(c.faces_of_dim(2).count(), 8);
        let ids: Vec<usize> = c.faces_of_dim(0).map(|(i, _)| i).collect();
        assert_eq!(ids.len(), 9);
    }

    #[test]
    fn euler_characteristic_of_square() {
        for pts in [
            vec!["0", "1/3"],
            vec!["0", "1/5", "1/2", "3/4"],
            vec!["0", "1/7 + 1/10*sqrt2", "2/3"],
        ] {
            let c = grid(&pts);
            let v = c.faces_of_dim(0).count() as i64;
            let e = c.faces_of_dim(1).count() as i64;
            let f = c.faces_of_dim(2).count() as i64;
            assert_eq!(v - e + f, 1, "{pts:?}");
        }
    }

    #[test]
    fn face_of_point_matches_containment() {
        let c = grid(&["0", "1/5", "1/2", "3/4"]);
        let pts = [
            ("1/10", "1/10"),
            ("1/5", "3/10"),
            ("1/5", "3/4"),
            ("1/4", "1/4"),
            ("1", "1"),
            ("0", "7/8"),
        ];
        for (x, y) in pts {
            let p = (q(x), q(y));
            let id = c.face_of_point(&p.0, &p.1).unwrap();
            assert!(c.face(id).contains(&p));
        }
        let v = c.face_of_point(&q("1/5"), &q("1/2")).unwrap();
        assert_eq!(c.face(v).dim, 0);
        let e = c.face_of_point(&q("1/5"), &q("3/5")).unwrap();
        assert_eq!(c.face(e).dim, 1);
        let f = c.face_of_point(&q("1/10"), &q("1/20")).unwrap();
        assert_eq!(c.face(f).dim, 2);
        assert!(c.face_of_point(&q("-1/10"), &q("0")).is_none());
    }

    #[test]
    fn subfaces_are_contained() {
        let c = grid(&["0", "1/5", "1/2", "3/4"]);
        for f in &c.faces {
            for s in f.subfaces() {
                for v in &c.face(s).vertices {
                    assert!(f.contains(v));
                }
            }
            assert_eq!(f.vertex_faces.len(), f.vertices.len());
        }
    }

    #[test]
    fn n_f_counts_projections() {
        let c = grid(&["0", "1/5", "2/5", "3/5"]);
        let special = vec![OpenInterval::new(q("1/5"), q("2/5"))];
        let id = c
            .id_of(&[PFace::interval(1), PFace::point(0), PFace::interval(1)])
            .unwrap();
        assert_eq!(c.n_f(id, &special), 2);
        let id = c
            .id_of(&[PFace::interval(1), PFace::interval(1), PFace::interval(2)])
            .unwrap();
        assert_eq!(c.n_f(id, &special), 2);
        let id = c
            .id_of(&[PFace::interval(0), PFace::interval(0), PFace::interval(0)])
            .unwrap();
        assert_eq!(c.n_f(id, &special), 0);
        // shifted copy past 1
        let id = c
            .id_of(&[PFace::interval(3), PFace::interval(2), PFace::interval(5)])
            .unwrap();
        assert_eq!(c.n_f(id, &special), 1);
    }

    #[test]
    fn transpose_pairs() {
        let c = grid(&["0", "1/5", "1/2"]);
        for id in 0..c.len() {
            let t = c.transpose(id);
            assert_eq!(c.transpose(t), id);
            assert!(c.is_representative(id) || c.is_representative(t));
        }
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn breakpoints() -> impl Strategy<Value = Vec<QNum>> {
        proptest::collection::btree_set(1i64..24, 0..5).prop_map(|s| {
            std::iter::once(QNum::zero())
                .chain(s.into_iter().map(|k| QNum::frac(k, 24)))
                .collect()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn points_lie_in_unique_relint(bps in breakpoints(), x in 0i64..=48, y in 0i64..=48) {
            let c = Complex::from_breakpoints(&bps);
            let p = (QNum::frac(x, 48), QNum::frac(y, 48));
            let id = c.face_of_point(&p.0, &p.1).unwrap();
            let face = c.face(id);
            prop_assert!(face.contains(&p));
            // not contained in any proper face
            for s in face.subfaces() {
                prop_assert!(!c.face(s).contains(&p));
            }
        }

        #[test]
        fn faces_meet_in_common_faces(bps in breakpoints(), a in 0usize..1000, b in 0usize..1000) {
            let c = Complex::from_breakpoints(&bps);
            let fa = c.face(a % c.len());
            let fb = c.face(b % c.len());
            // a vertex of one face lying in another is a vertex of that one too
            for v in &fa.vertices {
                if fb.contains(v) {
                    prop_assert!(fb.vertices.contains(v));
                }
            }
            prop_assert!(fa.vertices.len() == 1 && fa.dim == 0
                || fa.vertices.len() == 2 && fa.dim == 1
                || fa.vertices.len() >= 3 && fa.dim == 2);
        }
    }
}
