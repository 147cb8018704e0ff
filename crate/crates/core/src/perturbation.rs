//! Finite perturbation systems and the ε constants for effective
//! perturbations.
//!
//! Outside the uncovered intervals a perturbation `π̄` is affine on every
//! piece with one slope per covered component.  It is then described by
//! slope, breakpoint-value and midpoint-value variables; additivity on the
//! faces of ΔP gives homogeneous linear equations in them.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::additivity::{minimality_test, Analysis, Minimality};
use crate::complex2d::{Complex, PFace, Point, Triple};
use crate::covering::CoveringReport;
use crate::error::{Error, Result};
use crate::exactnum::QNum;
use crate::pwl::{OpenInterval, PwlFunction};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PerturbVar {
    /// Slope of `π̄` on a covered component; components are ordered by the
    /// slope of `π` on them, largest first.
    Slope(usize),
    /// `π̄(x_i)`.
    Value(usize),
    /// `π̄` at the midpoint of piece `i`.
    Midpoint(usize),
}

impl fmt::Display for PerturbVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PerturbVar::Slope(k) => write!(f, "cbar{k}"),
            PerturbVar::Value(i) => write!(f, "v{i}"),
            PerturbVar::Midpoint(i) => write!(f, "m{i}"),
        }
    }
}

/// Sparse linear form: column -> coefficient.
pub type Form = BTreeMap<usize, QNum>;

fn add_term(form: &mut Form, col: usize, c: QNum) {
    if c.is_zero() {
        return;
    }
    let e = form.entry(col).or_insert_with(QNum::zero);
    *e += c;
    if e.is_zero() {
        form.remove(&col);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Equation {
    pub label: String,
    pub coeffs: Form,
}

/// Homogeneous system `A z = 0` over ℚ(√2).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearSystem {
    pub vars: Vec<PerturbVar>,
    pub rows: Vec<Equation>,
}

/// Result of row reduction: pivot columns in the order they were found,
/// with the row that produced each.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Echelon {
    pub rank: usize,
    pub pivots: Vec<(usize, usize)>,
}

impl LinearSystem {
    pub fn new(vars: Vec<PerturbVar>) -> Self {
        LinearSystem {
            vars,
            rows: Vec::new(),
        }
    }

    pub fn ncols(&self) -> usize {
        self.vars.len()
    }

    pub fn push(&mut self, label: impl Into<String>, coeffs: Form) {
        self.rows.push(Equation {
            label: label.into(),
            coeffs,
        });
    }

    /// Gaussian elimination, one row at a time.  The pivot of a row is its
    /// first nonzero column after reduction by the earlier pivots.
    pub fn echelon(&self) -> Echelon {
        let n = self.ncols();
        let mut basis: Vec<(usize, Vec<QNum>)> = Vec::new();
        let mut pivots = Vec::new();
        for (r, eq) in self.rows.iter().enumerate() {
            if basis.len() == n {
                break;
            }
            let mut row = vec![QNum::zero(); n];
            for (c, v) in &eq.coeffs {
                row[*c] = v.clone();
            }
            for (p, b) in &basis {
                if row[*p].is_zero() {
                    continue;
                }
                let k = row[*p].clone();
                for (x, y) in row.iter_mut().zip(b).skip(*p) {
                    if !y.is_zero() {
                        *x -= &k * y;
                    }
                }
            }
            if let Some(p) = row.iter().position(|x| !x.is_zero()) {
                let inv = row[p].inv().expect("pivot is nonzero");
                for x in row.iter_mut().skip(p) {
                    if !x.is_zero() {
                        *x = &*x * &inv;
                    }
                }
                basis.push((p, row));
                pivots.push((r, p));
            }
        }
        Echelon {
            rank: basis.len(),
            pivots,
        }
    }

    pub fn rank(&self) -> usize {
        self.echelon().rank
    }

    pub fn nullspace_dim(&self) -> usize {
        self.ncols() - self.rank()
    }

    pub fn without_row(&self, i: usize) -> LinearSystem {
        let mut s = self.clone();
        s.rows.remove(i);
        s
    }

    /// One line per equation: label, tab, dense coefficients.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        out.push_str("#");
        for v in &self.vars {
            out.push(' ');
            out.push_str(&v.to_string());
        }
        out.push('\n');
        for eq in &self.rows {
            out.push_str(&eq.label);
            out.push('\t');
            let cells: Vec<String> = (0..self.ncols())
                .map(|c| {
                    eq.coeffs
                        .get(&c)
                        .cloned()
                        .unwrap_or_else(QNum::zero)
                        .to_string()
                })
                .collect();
            out.push_str(&cells.join(" "));
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Ref {
    Zero,
    Var { col: usize, neg: bool },
    Unknown,
}

/// How the restriction of `π̄` to the covered intervals is written in terms
/// of the system variables.
#[derive(Clone, Debug)]
pub struct Parametrization {
    pub vars: Vec<PerturbVar>,
    /// Side conditions of the unreduced form (symmetry and fixed zeros);
    /// empty for the reduced form.
    pub constraints: Vec<Equation>,
    xs: Vec<QNum>,
    values: Vec<Ref>,
    mids: Vec<Ref>,
    slopes: Vec<Option<usize>>,
}

fn mirror_index(xs: &[QNum], f: &QNum, x: &QNum) -> Result<usize> {
    let y = (f - x).frac_part();
    xs.binary_search(&y)
        .map_err(|_| Error::InvalidFunction(format!("breakpoints not symmetric: no mirror of {x}")))
}

impl Parametrization {
    /// Symmetry and the fixed zeros at `0` and `f` eliminated: mirrored
    /// points share a variable up to sign, self-mirrored points are zero.
    pub fn reduced(pi: &PwlFunction, covering: &CoveringReport) -> Result<Self> {
        Parametrization::build(pi, covering, true)
    }

    /// One variable per breakpoint value and covered midpoint; symmetry
    /// and fixed zeros are kept as explicit equations.
    pub fn unreduced(pi: &PwlFunction, covering: &CoveringReport) -> Result<Self> {
        Parametrization::build(pi, covering, false)
    }

    fn build(pi: &PwlFunction, covering: &CoveringReport, reduce: bool) -> Result<Self> {
        let n = pi.len();
        let xs = pi.breakpoints();
        let mids: Vec<QNum> = (0..n)
            .map(|i| (pi.x_at(i) + pi.x_at(i + 1)).half())
            .collect();

        // covered components, largest slope of `pi` first
        let slopes_pi = pi.slopes();
        let mut comp_of: Vec<Option<usize>> = vec![None; n];
        let mut order: Vec<(QNum, usize)> = Vec::new();
        for (c, comp) in covering.components.iter().enumerate() {
            let mut s = None;
            for i in 0..n {
                let piece = OpenInterval::new(pi.x_at(i), pi.x_at(i + 1));
                if comp
                    .intervals
                    .iter()
                    .any(|iv| iv.lo <= piece.lo && piece.hi <= iv.hi)
                {
                    comp_of[i] = Some(c);
                    s.get_or_insert_with(|| slopes_pi[i].clone());
                }
            }
            if let Some(s) = s {
                order.push((s, c));
            }
        }
        order.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        let mut vars: Vec<PerturbVar> = (0..order.len()).map(PerturbVar::Slope).collect();
        let rank_of: BTreeMap<usize, usize> = order
            .iter()
            .enumerate()
            .map(|(k, (_, c))| (*c, k))
            .collect();
        let slopes: Vec<Option<usize>> = comp_of.iter().map(|c| c.map(|c| rank_of[&c])).collect();

        let f_idx = xs
            .binary_search(&pi.f)
            .map_err(|_| Error::InvalidFunction("f is not a breakpoint".into()))?;
        let mut constraints = Vec::new();

        let mut values = vec![Ref::Unknown; n];
        for i in 0..n {
            let j = mirror_index(&xs, &pi.f, &xs[i])?;
            values[i] = if !reduce {
                vars.push(PerturbVar::Value(i));
                Ref::Var {
                    col: vars.len() - 1,
                    neg: false,
                }
            } else if i == 0 || i == f_idx || i == j {
                Ref::Zero
            } else if i < j {
                vars.push(PerturbVar::Value(i));
                Ref::Var {
                    col: vars.len() - 1,
                    neg: false,
                }
            } else {
                negate(values[j])
            };
        }

        let mut mid_refs = vec![Ref::Unknown; n];
        let mut mirror_piece = vec![0; n];
        for i in 0..n {
            let y = (&pi.f - &mids[i]).frac_part();
            mirror_piece[i] = mids
                .binary_search(&y)
                .map_err(|_| Error::InvalidFunction(format!("piece {i} has no mirror piece")))?;
        }
        for i in 0..n {
            let j = mirror_piece[i];
            if slopes[i].is_none() || slopes[j].is_none() {
                continue;
            }
            mid_refs[i] = if !reduce {
                vars.push(PerturbVar::Midpoint(i));
                Ref::Var {
                    col: vars.len() - 1,
                    neg: false,
                }
            } else if i == j {
                Ref::Zero
            } else if i < j {
                vars.push(PerturbVar::Midpoint(i));
                Ref::Var {
                    col: vars.len() - 1,
                    neg: false,
                }
            } else {
                negate(mid_refs[j])
            };
        }

        if !reduce {
            let col = |r: Ref| match r {
                Ref::Var { col, .. } => col,
                _ => unreachable!(),
            };
            for (name, i) in [("value at 0", 0), ("value at f", f_idx)] {
                let mut form = Form::new();
                add_term(&mut form, col(values[i]), QNum::one());
                constraints.push(Equation {
                    label: name.into(),
                    coeffs: form,
                });
            }
            for i in 0..n {
                let j = mirror_index(&xs, &pi.f, &xs[i])?;
                if i <= j {
                    let mut form = Form::new();
                    add_term(&mut form, col(values[i]), QNum::one());
                    add_term(&mut form, col(values[j]), QNum::one());
                    constraints.push(Equation {
                        label: format!("symmetry v{i} v{j}"),
                        coeffs: form,
                    });
                }
                let j = mirror_piece[i];
                if i <= j && mid_refs[i] != Ref::Unknown {
                    let mut form = Form::new();
                    add_term(&mut form, col(mid_refs[i]), QNum::one());
                    add_term(&mut form, col(mid_refs[j]), QNum::one());
                    constraints.push(Equation {
                        label: format!("symmetry m{i} m{j}"),
                        coeffs: form,
                    });
                }
            }
        }

        let mut xs = xs;
        xs.push(QNum::one());
        Ok(Parametrization {
            vars,
            constraints,
            xs,
            values,
            mids: mid_refs,
            slopes,
        })
    }

    /// Number of breakpoints per period.
    pub fn n(&self) -> usize {
        self.values.len()
    }

    fn add_ref(&self, form: &mut Form, r: Ref, c: &QNum) -> bool {
        match r {
            Ref::Zero => true,
            Ref::Var { col, neg } => {
                add_term(form, col, if neg { -c } else { c.clone() });
                true
            }
            Ref::Unknown => false,
        }
    }

    /// Adds `c` times the limit of `π̄` at `t` from within `p`.
    pub fn add_limit(&self, form: &mut Form, p: PFace, t: &QNum, c: &QNum) -> Result<()> {
        let n = self.n();
        let k = p.idx as usize;
        if p.is_point() {
            self.add_ref(form, self.values[k % n], c);
            return Ok(());
        }
        let piece = k % n;
        let t = t - QNum::from_int((k / n) as i64);
        let mid = (&self.xs[piece] + &self.xs[piece + 1]).half();
        let ok = self.add_ref(form, self.mids[piece], c);
        match (ok, self.slopes[piece]) {
            (true, Some(col)) => {
                add_term(form, col, c * &(t - mid));
                Ok(())
            }
            _ => Err(Error::Other(format!(
                "limit from within uncovered piece {piece} has no parametrization"
            ))),
        }
    }

    /// `Δπ̄_F(u, v)` as a linear form.
    pub fn delta_form(&self, triple: &Triple, vertex: &Point) -> Result<Form> {
        let mut form = Form::new();
        let one = QNum::one();
        self.add_limit(&mut form, triple[0], &vertex.0, &one)?;
        self.add_limit(&mut form, triple[1], &vertex.1, &one)?;
        self.add_limit(&mut form, triple[2], &(&vertex.0 + &vertex.1), &-one)?;
        Ok(form)
    }

    pub fn empty_system(&self) -> LinearSystem {
        let mut sys = LinearSystem::new(self.vars.clone());
        sys.rows.extend(self.constraints.iter().cloned());
        sys
    }
}

fn negate(r: Ref) -> Ref {
    match r {
        Ref::Var { col, neg } => Ref::Var { col, neg: !neg },
        other => other,
    }
}

/// A face of ΔP with one of its vertices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub triple: Triple,
    pub vertex: Point,
}

fn check_additive(an: &Analysis, id: usize) -> Result<()> {
    let face = an.cx.face(id);
    if face
        .vertices
        .iter()
        .any(|v| !an.slack_at_point(id, v).is_zero())
    {
        return Err(Error::FaceNotAdditive(an.cx.describe(id)));
    }
    Ok(())
}

fn label(an: &Analysis, id: usize, v: &Point) -> String {
    format!("{} @ ({}, {})", an.cx.describe(id), v.0, v.1)
}

/// One equation `Δπ̄_F(u, v) = 0` per selected face and vertex, after the
/// side conditions of the parametrization.
pub fn build_system(
    an: &Analysis,
    param: &Parametrization,
    selection: &[Selection],
) -> Result<LinearSystem> {
    let mut sys = param.empty_system();
    for sel in selection {
        let id = an
            .cx
            .id_of(&sel.triple)
            .ok_or_else(|| Error::Other(format!("no face with triple {:?}", sel.triple)))?;
        check_additive(an, id)?;
        if !an.cx.face(id).vertices.contains(&sel.vertex) {
            return Err(Error::NotAVertex(
                sel.vertex.0.clone(),
                sel.vertex.1.clone(),
            ));
        }
        sys.push(
            label(an, id, &sel.vertex),
            param.delta_form(&sel.triple, &sel.vertex)?,
        );
    }
    Ok(sys)
}

/// Equations at every vertex of every additive face whose relative
/// interior projections avoid `special` (that is, `n_F = 0`).
pub fn full_system(
    an: &Analysis,
    param: &Parametrization,
    additive: &[usize],
    special: &[OpenInterval],
) -> Result<LinearSystem> {
    let mut sys = param.empty_system();
    for &id in additive {
        if an.cx.n_f(id, special) != 0 {
            continue;
        }
        let face = an.cx.face(id);
        for v in &face.vertices {
            let form = param.delta_form(&face.triple, v)?;
            if !form.is_empty() {
                sys.push(label(an, id, v), form);
            }
        }
    }
    Ok(sys)
}

// Faces `I J K` and a vertex `u v` of each, indices into the breakpoints
// (`P` a point, `I` a closed piece; indices past the last breakpoint are
// shifted by 1).
const KZH_SELECTION: [&str; 39] = [
    "I0 P6 P8 | x8-x6 x6",
    "I0 P6 I9 | x9-x6 x6",
    "I0 P6 I10 | x1 x6",
    "I0 P10 I12 | x12-x10 x10",
    "I0 P10 I13 | x1 x10",
    "I0 P13 P15 | x15-x13 x13",
    "I0 P13 I15 | x1 x13",
    "I0 P36 I36 | 0 x36",
    "I0 P38 I38 | 0 x38",
    "I1 I1 I1 | x1 x1",
    "I1 P3 I6 | x1 x3",
    "I1 P6 I11 | x1 x6",
    "I1 P6 P12 | x12-x6 x6",
    "I1 P10 I14 | x1 x10",
    "I1 P11 I14 | x1 x11",
    "I1 P13 I16 | x1 x13",
    "I1 P16 I16 | x1 x16",
    "I1 P18 I18 | x1 x18",
    "I1 P20 I20 | x1 x20",
    "I1 P23 P31 | x31-x23 x23",
    "I1 P35 I35 | x1 x35",
    "I1 P36 I37 | x1 x36",
    "P6 P32 I37 | x6 x32",
    "P6 I33 I37 | x6 x33",
    "P6 I34 I38 | x6 x34",
    "P10 I30 I37 | x10 x30",
    "P10 I31 I37 | x10 x31",
    "P10 I32 I38 | x10 x32",
    "P10 I38 P44 | x10 1+x4-x10",
    "P11 P22 I35 | x11 x22",
    "P13 I16 I18 | x13 x16",
    "P13 P28 I37 | x13 x28",
    "P13 I28 I37 | x13 x28",
    "P13 I29 I38 | x13 x29",
    "P30 I39 P67 | x30 1+x27-x30",
    "P33 I39 P71 | x33 1+x31-x33",
    "P35 I38 P71 | x35 1+x31-x35",
    "P38 I39 I77 | x38 x39",
    "I38 I38 I78 | x39 x39",
];

fn parse_pface(tok: &str) -> Result<PFace> {
    let bad = || Error::Other(format!("bad face token {tok}"));
    let (kind, idx) = tok.split_at(1);
    let idx: usize = idx.parse().map_err(|_| bad())?;
    match kind {
        "P" => Ok(PFace::point(idx)),
        "I" => Ok(PFace::interval(idx)),
        _ => Err(bad()),
    }
}

fn parse_coord(pi: &PwlFunction, text: &str) -> Result<QNum> {
    let mut total = QNum::zero();
    let mut rest = text;
    while !rest.is_empty() {
        let (neg, body) = match rest.as_bytes()[0] {
            b'-' => (true, &rest[1..]),
            b'+' => (false, &rest[1..]),
            _ => (false, rest),
        };
        let end = body.find(['+', '-']).unwrap_or(body.len());
        let term = &body[..end];
        let v = match term.strip_prefix('x') {
            Some(i) => pi.x_at(
                i.parse()
                    .map_err(|_| Error::Other(format!("bad coordinate {text}")))?,
            ),
            None => QNum::from_int(
                term.parse()
                    .map_err(|_| Error::Other(format!("bad coordinate {text}")))?,
            ),
        };
        total = if neg { total - v } else { total + v };
        rest = &body[end..];
    }
    Ok(total)
}

/// The 39 faces and vertices whose equations form a regular system for
/// the kzh function.
pub fn kzh_selection(pi: &PwlFunction) -> Result<Vec<Selection>> {
    KZH_SELECTION
        .iter()
        .map(|line| {
            let (faces, vertex) = line.split_once('|').expect("table row");
            let ps: Vec<PFace> = faces
                .split_whitespace()
                .map(parse_pface)
                .collect::<Result<_>>()?;
            let cs: Vec<QNum> = vertex
                .split_whitespace()
                .map(|c| parse_coord(pi, c))
                .collect::<Result<_>>()?;
            Ok(Selection {
                triple: [ps[0], ps[1], ps[2]],
                vertex: (cs[0].clone(), cs[1].clone()),
            })
        })
        .collect()
}

/// Outcome of the finite extremality test: covering, then the full system
/// over the complex refined at the endpoints of the covered intervals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtremalityCertificate {
    /// Breakpoints after refinement.
    pub breakpoints: Vec<QNum>,
    pub uncovered: Vec<OpenInterval>,
    pub components: usize,
    pub variables: usize,
    /// Rank of the system; `None` while some interval is uncovered.
    pub rank: Option<usize>,
}

impl ExtremalityCertificate {
    /// Every effective perturbation vanishes.
    pub fn certifies_extreme(&self) -> bool {
        self.uncovered.is_empty() && self.rank == Some(self.variables)
    }
}

/// Covers `[0, 1]` by the additive faces of `pi` and solves the finite
/// system for what remains of a perturbation.  Endpoints of covered
/// intervals that are not breakpoints (and their mirror points) are added
/// as breakpoints until there are none.  With `in_limits`, vanishing limit
/// slacks contribute moves and equations as well, which restricts the
/// conclusion to perturbations with one-sided limits.
pub fn extremality_certificate(
    pi: &PwlFunction,
    in_limits: bool,
) -> Result<ExtremalityCertificate> {
    use crate::additivity::additive_face_report;
    use crate::covering::{covering, covering_in_limits};

    let mut pi = pi.clone();
    loop {
        let (cx, report) = additive_face_report(&pi);
        let cov = if in_limits {
            covering_in_limits(&cx, &report)
        } else {
            covering(&cx, &report)
        };
        let xs = pi.breakpoints();
        let mut extra: Vec<QNum> = Vec::new();
        for comp in &cov.components {
            for iv in &comp.intervals {
                for x in [&iv.lo, &iv.hi] {
                    let x = x.frac_part();
                    if xs.binary_search(&x).is_err() {
                        extra.push((&pi.f - &x).frac_part());
                        extra.push(x);
                    }
                }
            }
        }
        if !extra.is_empty() {
            pi = pi.refine(&extra);
            continue;
        }
        let additive: Vec<usize> = report.additive_faces().collect();
        let an = Analysis::with_complex(&pi, cx);
        let param = Parametrization::reduced(&pi, &cov)?;
        let variables = param.vars.len();
        let rank = if cov.uncovered.is_empty() {
            let mut sys = full_system(&an, &param, &additive, &cov.uncovered)?;
            if in_limits {
                for cone in &report.limit_cones {
                    let face = an.cx.face(cone.face);
                    for v in &an.cx.face(cone.sub).vertices {
                        let form = param.delta_form(&face.triple, v)?;
                        if !form.is_empty() {
                            sys.push(label(&an, cone.face, v), form);
                        }
                    }
                }
            }
            Some(sys.rank())
        } else {
            None
        };
        return Ok(ExtremalityCertificate {
            breakpoints: xs,
            uncovered: cov.uncovered,
            components: cov.components.len(),
            variables,
            rank,
        });
    }
}

/// Constants of the Lipschitz argument for effective perturbations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LipschitzEpsilon {
    /// Smallest nonzero limit slack of `π` at a vertex.
    pub m: QNum,
    /// Largest `|Δπ̄_F|` at a vertex.
    pub big_m: QNum,
    /// Largest slope magnitude of `π̄`.
    pub c: QNum,
    /// `None` when `M = 0`: then `π̄ ≡ 0` and every ε works.
    pub epsilon: Option<QNum>,
}

/// Smallest nonzero vertex slack over all faces of ΔP.
pub fn min_positive_slack(an: &Analysis) -> Option<QNum> {
    an.vertex_slacks()
        .into_iter()
        .flatten()
        .filter(|s| !s.is_zero())
        .min()
}

fn require_minimal(pi: &PwlFunction) -> Result<()> {
    match minimality_test(pi) {
        Minimality::Minimal => Ok(()),
        Minimality::NotMinimal { witness, .. } => Err(Error::NotMinimal(witness.to_string())),
    }
}

/// `π̄` over the breakpoints of `π`, or an error if it has others.
fn over_complex(pi: &PwlFunction, pibar: &PwlFunction) -> Result<PwlFunction> {
    let xs = pi.breakpoints();
    if pibar
        .breakpoints()
        .iter()
        .any(|x| xs.binary_search(x).is_err())
    {
        return Err(Error::NotOverComplex);
    }
    Ok(pibar.refine(&xs))
}

/// `ε = min(m/M, m/(8C))` such that `π ± επ̄` are minimal, for `π̄`
/// piecewise linear (possibly discontinuous) over the complex of `π`.
pub fn lipschitz_epsilon(pi: &PwlFunction, pibar: &PwlFunction) -> Result<LipschitzEpsilon> {
    require_minimal(pi)?;
    let pibar = over_complex(pi, pibar)?;
    if !pibar.eval(&QNum::zero()).is_zero() || !pibar.eval(&pi.f).is_zero() {
        return Err(Error::NotInPerturbationSpace(
            "perturbation does not vanish at 0 and f".into(),
        ));
    }
    let cx = Complex::new(pi);
    let a = Analysis::with_complex(pi, cx.clone());
    let b = Analysis::with_complex(&pibar, cx);
    let mut m: Option<QNum> = None;
    let mut big_m = QNum::zero();
    for (id, face) in a.cx.faces.iter().enumerate() {
        for v in &face.vertices {
            let s = a.slack_at_point(id, v);
            let t = b.slack_at_point(id, v);
            if s.is_zero() {
                if !t.is_zero() {
                    return Err(Error::NotInPerturbationSpace(label(&a, id, v)));
                }
                continue;
            }
            if m.as_ref().map_or(true, |m| &s < m) {
                m = Some(s);
            }
            big_m = big_m.max(t.abs());
        }
    }
    let c = pibar.max_abs_slope();
    let epsilon = match m.clone() {
        Some(m) if !big_m.is_zero() => {
            let mut e = &m / &big_m;
            if !c.is_zero() {
                e = e.min(&m / &(&c * &QNum::from_int(8)));
            }
            Some(e)
        }
        _ => None,
    };
    Ok(LipschitzEpsilon {
        m: m.unwrap_or_else(QNum::zero),
        big_m,
        c,
        epsilon,
    })
}

/// `min Δπ/Δπ̄` over the vertices of ΔP with `Δπ̄ > 0`, for continuous
/// functions over a common refinement.
pub fn scaling_epsilon(pi: &PwlFunction, pibar: &PwlFunction) -> Result<QNum> {
    if !pi.is_continuous() || !pibar.is_continuous() {
        return Err(Error::InvalidFunction(
            "scaling epsilon needs continuous functions".into(),
        ));
    }
    let a = pi.refine(&pibar.breakpoints());
    let b = pibar.refine(&pi.breakpoints());
    let cx = Complex::new(&a);
    let mut best: Option<QNum> = None;
    for (_, face) in cx.faces_of_dim(0) {
        let (x, y) = &face.vertices[0];
        let s = a.delta(x, y);
        let t = b.delta(x, y);
        if s.is_zero() && !t.is_zero() {
            return Err(Error::NotInPerturbationSpace(format!("({x}, {y})")));
        }
        if t.is_positive() {
            let r = &s / &t;
            if best.as_ref().map_or(true, |b| &r < b) {
                best = Some(r);
            }
        }
    }
    best.ok_or(Error::NoPositiveSlack)
}

/// A perturbation as handed to [`verify_effective`].
pub enum Perturbation<'a> {
    Piecewise(&'a PwlFunction),
    /// Values at finitely many points only.
    Sampled(&'a [(QNum, QNum)]),
}

/// Whether `π + επ̄` and `π − επ̄` both pass the minimality test.
pub fn verify_effective(pi: &PwlFunction, pibar: &Perturbation, eps: &QNum) -> Result<bool> {
    let pibar = match pibar {
        Perturbation::Piecewise(p) => p,
        Perturbation::Sampled(_) => return Err(Error::NotPiecewiseLinear),
    };
    let one = QNum::one();
    let plus = pi.combine(&one, pibar, eps);
    let minus = pi.combine(&one, pibar, &-eps);
    Ok(minimality_test(&plus).is_minimal() && minimality_test(&minus).is_minimal())
}

/// An affine function `g(x, y) = a x + b y + c` on a convex polygon.
#[derive(Clone, Debug)]
pub struct AffineOnPolygon {
    pub polygon: Vec<Point>,
    pub coeffs: (QNum, QNum, QNum),
}

fn dot(p: &Point, q: &Point) -> QNum {
    &p.0 * &q.0 + &p.1 * &q.1
}

fn sub(p: &Point, q: &Point) -> Point {
    (&p.0 - &q.0, &p.1 - &q.1)
}

/// Squared distance from `p` to the segment `[a, b]`.
pub fn dist2_to_segment(p: &Point, a: &Point, b: &Point) -> QNum {
    let ab = sub(b, a);
    let ap = sub(p, a);
    let len2 = dot(&ab, &ab);
    if len2.is_zero() {
        return dot(&ap, &ap);
    }
    let t = (dot(&ap, &ab) / len2).max(QNum::zero()).min(QNum::one());
    let foot = (&a.0 + &(&t * &ab.0), &a.1 + &(&t * &ab.1));
    let d = sub(p, &foot);
    dot(&d, &d)
}

impl AffineOnPolygon {
    pub fn eval(&self, p: &Point) -> QNum {
        let (a, b, c) = &self.coeffs;
        a * &p.0 + b * &p.1 + c
    }

    /// Smallest positive vertex value.
    pub fn m(&self) -> Option<QNum> {
        self.polygon
            .iter()
            .map(|v| self.eval(v))
            .filter(|g| g.is_positive())
            .min()
    }

    /// Squared distance from `p` to the zero set of `g` on the polygon,
    /// `None` if `g` has no zero there.  Requires `g ≥ 0` on the vertices.
    pub fn dist2_to_zero_set(&self, p: &Point) -> Option<QNum> {
        let zeros: Vec<&Point> = self
            .polygon
            .iter()
            .filter(|v| self.eval(v).is_zero())
            .collect();
        match zeros.len() {
            0 => None,
            _ if zeros.len() == self.polygon.len() => Some(QNum::zero()),
            // a nonnegative affine function vanishes on a face: the hull of
            // its zero vertices is a point or a segment between extremes
            _ => {
                let lo = zeros.iter().min().unwrap();
                let hi = zeros.iter().max().unwrap();
                Some(dist2_to_segment(p, lo, hi))
            }
        }
    }

    /// `g(p) ≥ m d(p, S) / 2`, decided exactly via squares.
    pub fn distance_bound_holds(&self, p: &Point) -> bool {
        let (Some(m), Some(d2)) = (self.m(), self.dist2_to_zero_set(p)) else {
            return true;
        };
        let g = self.eval(p);
        if g.is_negative() {
            return false;
        }
        let lhs = &(&g * &QNum::from_int(2)) / &m;
        &lhs * &lhs >= d2
    }
}
