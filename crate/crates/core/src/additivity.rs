//! Limit slacks on the faces of ΔP, the minimality test and the
//! classification of faces into additive, limit-additive and non-additive.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::complex2d::{Complex, PFace, Point};
use crate::error::{Error, Result};
use crate::exactnum::QNum;
use crate::pwl::{PwlFunction, Side};

/// A function together with its complex and precomputed slopes.
pub struct Analysis<'a> {
    pub pi: &'a PwlFunction,
    pub cx: Complex,
    slopes: Vec<QNum>,
}

impl<'a> Analysis<'a> {
    pub fn new(pi: &'a PwlFunction) -> Self {
        Analysis::with_complex(pi, Complex::new(pi))
    }

    /// Uses a prebuilt complex; its breakpoints must be those of `pi`.
    pub fn with_complex(pi: &'a PwlFunction, cx: Complex) -> Self {
        assert_eq!(cx.n, pi.len(), "complex does not match the function");
        Analysis {
            pi,
            slopes: pi.slopes(),
            cx,
        }
    }

    /// Limit of `pi` at `t` from within the relative interior of the
    /// breakpoint-complex face `p` (the value when `p` is a point).
    pub fn face_limit(&self, p: PFace, t: &QNum) -> QNum {
        if p.is_point() {
            return self.pi.eval(t);
        }
        let n = self.cx.n;
        let k = p.idx as usize;
        let (piece, t) = if k >= n {
            (k - n, t - QNum::one())
        } else {
            (k, t.clone())
        };
        let row = &self.pi.rows[piece];
        &row.right_limit + &self.slopes[piece] * (t - &row.x)
    }

    /// `Δπ_F(u, v)` at a point of the closed face.
    pub fn slack_at_point(&self, face: usize, p: &Point) -> QNum {
        let [i, j, k] = self.cx.face(face).triple;
        self.face_limit(i, &p.0) + self.face_limit(j, &p.1) - self.face_limit(k, &(&p.0 + &p.1))
    }

    /// `Δπ_F(u, v)` at a vertex of the face.
    pub fn slack_at(&self, face: usize, vertex: &Point) -> Result<QNum> {
        if !self.cx.face(face).vertices.contains(vertex) {
            return Err(Error::NotAVertex(vertex.0.clone(), vertex.1.clone()));
        }
        Ok(self.slack_at_point(face, vertex))
    }

    /// Slacks at every vertex of every face, indexed like `cx.faces`.
    pub fn vertex_slacks(&self) -> Vec<Vec<QNum>> {
        self.cx
            .faces
            .iter()
            .enumerate()
            .map(|(id, f)| {
                f.vertices
                    .iter()
                    .map(|v| self.slack_at_point(id, v))
                    .collect()
            })
            .collect()
    }

    pub fn minimality(&self) -> Minimality {
        let slacks = self.vertex_slacks();
        self.minimality_with(&slacks)
    }

    fn minimality_with(&self, slacks: &[Vec<QNum>]) -> Minimality {
        let pi = self.pi;
        let mut found = Vec::new();

        let at0 = pi.eval(&QNum::zero());
        if !at0.is_zero() {
            found.push(Violation::NonzeroAtOrigin { value: at0 });
        }

        let one = QNum::one();
        if let Some((x, side, v)) = pi
            .all_limits()
            .find(|(_, _, v)| v.is_negative() || **v > one)
        {
            found.push(Violation::OutOfBounds {
                x: x.clone(),
                side,
                value: v.clone(),
            });
        }

        'outer: for (id, face) in self.cx.faces.iter().enumerate() {
            for (v, s) in face.vertices.iter().zip(&slacks[id]) {
                if s.is_negative() {
                    found.push(Violation::Subadditivity {
                        face: self.cx.describe(id),
                        vertex: v.clone(),
                        slack: s.clone(),
                    });
                    break 'outer;
                }
            }
        }

        if let Some(v) = symmetry_violation(pi) {
            found.push(v);
        }

        match found.first() {
            None => Minimality::Minimal,
            Some(first) => Minimality::NotMinimal {
                witness: first.clone(),
                all: found,
            },
        }
    }

    pub fn report(&self) -> AdditivityReport {
        let slacks = self.vertex_slacks();
        let additive: Vec<bool> = slacks.iter().map(|s| s.iter().all(QNum::is_zero)).collect();
        let mut cones = Vec::new();
        for (id, face) in self.cx.faces.iter().enumerate() {
            for sub in face.subfaces() {
                if additive[sub] {
                    continue;
                }
                let g = self.cx.face(sub);
                let vanishes = g.vertex_faces.iter().all(|vid| {
                    let pos = face
                        .vertex_faces
                        .iter()
                        .position(|w| w == vid)
                        .expect("subface vertex is a face vertex");
                    slacks[id][pos].is_zero()
                });
                if vanishes {
                    cones.push(LimitCone { face: id, sub });
                }
            }
        }
        let classes = (0..self.cx.len())
            .map(|id| {
                if additive[id] {
                    FaceClass::Additive
                } else if cones.iter().any(|c| c.face == id) {
                    FaceClass::LimitAdditive
                } else {
                    FaceClass::NonAdditive
                }
            })
            .collect();
        AdditivityReport {
            classes,
            slacks,
            limit_cones: cones,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    NonzeroAtOrigin {
        value: QNum,
    },
    OutOfBounds {
        x: QNum,
        side: Side,
        value: QNum,
    },
    Subadditivity {
        face: String,
        vertex: Point,
        slack: QNum,
    },
    Symmetry {
        x: QNum,
        side: Side,
        sum: QNum,
    },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::NonzeroAtOrigin { value } => write!(f, "pi(0) = {value}"),
            Violation::OutOfBounds { x, side, value } => {
                write!(f, "limit {side:?} at {x} is {value}, outside [0, 1]")
            }
            Violation::Subadditivity {
                face,
                vertex,
                slack,
            } => write!(
                f,
                "negative slack {slack} on {face} at ({}, {})",
                vertex.0, vertex.1
            ),
            Violation::Symmetry { x, side, sum } => {
                write!(f, "symmetry fails at {x} ({side:?}): sum is {sum}")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Minimality {
    Minimal,
    /// `witness` is the first failure in the order origin, bounds,
    /// subadditivity, symmetry; `all` holds the first witness of every
    /// failing condition.
    NotMinimal {
        witness: Violation,
        all: Vec<Violation>,
    },
}

impl Minimality {
    pub fn is_minimal(&self) -> bool {
        matches!(self, Minimality::Minimal)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaceClass {
    /// `Δπ` vanishes on the relative interior.
    Additive,
    /// Not additive, but `Δπ_F` vanishes on a proper face that is itself not
    /// additive: an additivity that only holds in the limit.
    LimitAdditive,
    NonAdditive,
}

/// `Δπ_F ≡ 0` on the proper face `sub` of `face`, while `sub` is not
/// additive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LimitCone {
    pub face: usize,
    pub sub: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdditivityReport {
    pub classes: Vec<FaceClass>,
    pub slacks: Vec<Vec<QNum>>,
    pub limit_cones: Vec<LimitCone>,
}

impl AdditivityReport {
    pub fn is_additive(&self, id: usize) -> bool {
        self.classes[id] == FaceClass::Additive
    }

    pub fn additive_faces(&self) -> impl Iterator<Item = usize> + '_ {
        self.ids_of(FaceClass::Additive)
    }

    pub fn limit_additive_faces(&self) -> impl Iterator<Item = usize> + '_ {
        self.ids_of(FaceClass::LimitAdditive)
    }

    fn ids_of(&self, class: FaceClass) -> impl Iterator<Item = usize> + '_ {
        self.classes
            .iter()
            .enumerate()
            .filter(move |(_, c)| **c == class)
            .map(|(i, _)| i)
    }
}

/// First breakpoint where `π(x) + π(f - x) = 1` fails, for the value or a
/// one-sided limit.
pub fn symmetry_violation(pi: &PwlFunction) -> Option<Violation> {
    let one = QNum::one();
    for r in &pi.rows {
        let y = &pi.f - &r.x;
        for (side, opp) in [
            (Side::At, Side::At),
            (Side::Minus, Side::Plus),
            (Side::Plus, Side::Minus),
        ] {
            let sum = pi.limit(&r.x, side) + pi.limit(&y, opp);
            if sum != one {
                return Some(Violation::Symmetry {
                    x: r.x.clone(),
                    side,
                    sum,
                });
            }
        }
    }
    None
}

pub fn minimality_test(pi: &PwlFunction) -> Minimality {
    Analysis::new(pi).minimality()
}

/// Same test with the symmetry taken about `f` instead of `pi.f`.
pub fn minimality_test_with_f(pi: &PwlFunction, f: &QNum) -> Minimality {
    let mut g = pi.clone();
    g.f = f.clone();
    Analysis::new(&g).minimality()
}

pub fn additive_face_report(pi: &PwlFunction) -> (Complex, AdditivityReport) {
    let a = Analysis::new(pi);
    let r = a.report();
    (a.cx, r)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FaceWitness {
    pub face: String,
    pub dim: u8,
    pub vertices: Vec<Point>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "relation", rename_all = "snake_case")]
pub enum Containment {
    Equal,
    /// `E(π1) ⊊ E(π2)`; the witness is additive for `π2` only.
    StrictSubset {
        witness: FaceWitness,
    },
    StrictSuperset {
        witness: FaceWitness,
    },
    Incomparable {
        only_first: FaceWitness,
        only_second: FaceWitness,
    },
}

/// Compares `E(π1)` with `E(π2)` face by face on the common refinement.
pub fn e_containment(p1: &PwlFunction, p2: &PwlFunction) -> Containment {
    let r1 = p1.refine(&p2.breakpoints());
    let r2 = p2.refine(&p1.breakpoints());
    let cx = Complex::new(&r1);
    let a1 = Analysis::with_complex(&r1, cx.clone());
    let a2 = Analysis::with_complex(&r2, cx);
    let e1: BTreeSet<usize> = a1.report().additive_faces().collect();
    let e2: BTreeSet<usize> = a2.report().additive_faces().collect();
    let witness = |id: usize| FaceWitness {
        face: a1.cx.describe(id),
        dim: a1.cx.face(id).dim,
        vertices: a1.cx.face(id).vertices.clone(),
    };
    // prefer full-dimensional witnesses
    let pick = |s: Vec<usize>| -> usize {
        *s.iter()
            .max_by_key(|&&id| (a1.cx.face(id).dim, std::cmp::Reverse(id)))
            .expect("nonempty")
    };
    let only1: Vec<usize> = e1.difference(&e2).copied().collect();
    let only2: Vec<usize> = e2.difference(&e1).copied().collect();
    match (only1.is_empty(), only2.is_empty()) {
        (true, true) => Containment::Equal,
        (true, false) => Containment::StrictSubset {
            witness: witness(pick(only2)),
        },
        (false, true) => Containment::StrictSuperset {
            witness: witness(pick(only1)),
        },
        (false, false) => Containment::Incomparable {
            only_first: witness(pick(only1)),
            only_second: witness(pick(only2)),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::q;
    use crate::pwl::BreakpointRow;

    fn gmic(f: &str) -> PwlFunction {
        let f = q(f);
        PwlFunction::continuous("gmic", &[(q("0"), q("0")), (f.clone(), q("1"))], f).unwrap()
    }

    #[test]
    fn gmic_is_minimal() {
        for f in ["1/2", "1/3", "4/5", "1/2 - 1/10*sqrt2"] {
            assert!(minimality_test(&gmic(f)).is_minimal(), "{f}");
        }
    }

    #[test]
    fn scaled_function_fails_symmetry() {
        let g = gmic("2/3").scaled(&q("2"));
        match minimality_test(&g) {
            Minimality::NotMinimal { witness, all } => {
                assert!(matches!(witness, Violation::OutOfBounds { .. }));
                assert!(all.iter().any(|v| matches!(v, Violation::Symmetry { .. })));
            }
            Minimality::Minimal => panic!("2*gmic accepted"),
        }
    }

    #[test]
    fn detects_nonzero_origin_and_superadditivity() {
        let bad = PwlFunction::from_rows(
            "bad",
            vec![
                BreakpointRow::continuous(q("0"), q("1/10")),
                BreakpointRow::continuous(q("1/2"), q("1")),
            ],
            q("1/2"),
            vec![],
        )
        .unwrap();
        match minimality_test(&bad) {
            Minimality::NotMinimal { witness, .. } => {
                assert!(matches!(witness, Violation::NonzeroAtOrigin { .. }))
            }
            _ => panic!(),
        }
        // concave-up piece on [0, f]: pi(x) = 2x^2-ish via breakpoints
        let convex = PwlFunction::continuous(
            "convex",
            &[(q("0"), q("0")), (q("1/4"), q("1/8")), (q("1/2"), q("1"))],
            q("1/2"),
        )
        .unwrap();
        match minimality_test(&convex) {
            Minimality::NotMinimal { all, .. } => {
                assert!(all
                    .iter()
                    .any(|v| matches!(v, Violation::Subadditivity { .. })))
            }
            _ => panic!(),
        }
    }

    #[test]
    fn slack_requires_vertex() {
        let g = gmic("1/2");
        let a = Analysis::new(&g);
        let id = a.cx.faces_of_dim(2).next().unwrap().0;
        assert!(matches!(
            a.slack_at(id, &(q("1/7"), q("1/9"))),
            Err(Error::NotAVertex(..))
        ));
        let v = a.cx.face(id).vertices[0].clone();
        assert!(a.slack_at(id, &v).is_ok());
    }

    #[test]
    fn origin_faces_have_zero_slack() {
        let g = gmic("2/5");
        let a = Analysis::new(&g);
        for (id, f) in a.cx.faces.iter().enumerate() {
            for v in &f.vertices {
                if v.0.is_zero() && f.triple[0].is_point() {
                    assert!(a.slack_at(id, v).unwrap().is_zero());
                }
            }
        }
    }

    #[test]
    fn gmic_additive_region() {
        // E(gmic) contains the triangle x, y >= 0, x + y <= f
        let g = gmic("1/2");
        let (cx, r) = additive_face_report(&g);
        let id = cx.face_of_point(&q("1/8"), &q("1/8")).unwrap();
        assert!(r.is_additive(id));
        let id = cx.face_of_point(&q("3/8"), &q("3/8")).unwrap();
        assert!(!r.is_additive(id));
        assert!(r.limit_cones.is_empty());
    }

    #[test]
    fn containment_of_self_is_equal() {
        let g = gmic("1/3");
        assert_eq!(e_containment(&g, &g), Containment::Equal);
    }

    // gmic with f = 2/3 composed with x -> 2x, minimal with f = 1/3
    fn doubled() -> PwlFunction {
        PwlFunction::continuous(
            "doubled",
            &[
                (q("0"), q("0")),
                (q("1/3"), q("1")),
                (q("1/2"), q("0")),
                (q("5/6"), q("1")),
            ],
            q("1/3"),
        )
        .unwrap()
    }

    #[test]
    fn containment_swaps_with_arguments() {
        let a = gmic("1/3");
        let b = doubled();
        assert!(minimality_test(&b).is_minimal());
        let ab = e_containment(&a, &b);
        let ba = e_containment(&b, &a);
        assert_ne!(ab, Containment::Equal);
        match (&ab, &ba) {
            (
                Containment::StrictSubset { witness: w1 },
                Containment::StrictSuperset { witness: w2 },
            )
            | (
                Containment::StrictSuperset { witness: w1 },
                Containment::StrictSubset { witness: w2 },
            ) => {
                assert_eq!(w1, w2)
            }
            (Containment::Incomparable { .. }, Containment::Incomparable { .. }) => {}
            other => panic!("{other:?}"),
        }
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use crate::pwl::BreakpointRow;
    use proptest::prelude::*;

    fn continuous_fn() -> impl Strategy<Value = PwlFunction> {
        (
            proptest::collection::btree_set(1i64..12, 0..4),
            proptest::collection::vec(0i64..12, 5),
        )
            .prop_map(|(xs, vals)| {
                let rows = std::iter::once(0)
                    .chain(xs)
                    .zip(vals)
                    .map(|(x, v)| {
                        let y = if x == 0 {
                            QNum::zero()
                        } else {
                            QNum::frac(v, 12)
                        };
                        BreakpointRow::continuous(QNum::frac(x, 12), y)
                    })
                    .collect();
                PwlFunction::from_rows("r", rows, QNum::frac(1, 2), vec![]).unwrap()
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn continuous_slack_is_delta(p in continuous_fn()) {
            let a = Analysis::new(&p);
            for (id, f) in a.cx.faces.iter().enumerate() {
                for v in &f.vertices {
                    prop_assert_eq!(a.slack_at(id, v).unwrap(), p.delta(&v.0, &v.1));
                }
            }
        }

        #[test]
        fn slack_is_affine_on_faces(p in continuous_fn(), w in proptest::collection::vec(1i64..9, 6)) {
            let a = Analysis::new(&p);
            for (id, f) in a.cx.faces_of_dim(2) {
                let total: i64 = w.iter().take(f.vertices.len()).sum();
                let mut pt = (QNum::zero(), QNum::zero());
                let mut expect = QNum::zero();
                for (v, wi) in f.vertices.iter().zip(&w) {
                    let lam = QNum::frac(*wi, total);
                    pt.0 += &lam * &v.0;
                    pt.1 += &lam * &v.1;
                    expect += &lam * a.slack_at(id, v).unwrap();
                }
                prop_assert_eq!(a.slack_at_point(id, &pt), expect.clone());
                // interior point: genuine slack agrees with the face slack
                prop_assert_eq!(p.delta(&pt.0, &pt.1), expect);
            }
        }
    }
}
