//! Periodic piecewise linear functions with one-sided limits.
//!
//! A function is stored as its breakpoint rows over one period `[0, 1)`.
//! The piece on `[x_i, x_{i+1}]` runs from `right_limit` of row `i` to
//! `left_limit` of row `i + 1`; the last piece ends at `1` and takes the left
//! limit of row 0 there.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::{parse_qnum, QNum};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Minus,
    At,
    Plus,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BreakpointRow {
    pub x: QNum,
    pub left_limit: QNum,
    pub value: QNum,
    pub right_limit: QNum,
}

impl BreakpointRow {
    pub fn new(x: QNum, left_limit: QNum, value: QNum, right_limit: QNum) -> Self {
        BreakpointRow {
            x,
            left_limit,
            value,
            right_limit,
        }
    }

    /// A row where the function is continuous.
    pub fn continuous(x: QNum, value: QNum) -> Self {
        BreakpointRow::new(x, value.clone(), value.clone(), value)
    }

    pub fn is_continuous(&self) -> bool {
        self.left_limit == self.value && self.value == self.right_limit
    }
}

/// Open interval `(lo, hi)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OpenInterval {
    pub lo: QNum,
    pub hi: QNum,
}

impl OpenInterval {
    pub fn new(lo: QNum, hi: QNum) -> Self {
        OpenInterval { lo, hi }
    }

    pub fn contains(&self, x: &QNum) -> bool {
        self.lo < *x && *x < self.hi
    }

    pub fn len(&self) -> QNum {
        &self.hi - &self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }

    pub fn intersects(&self, other: &OpenInterval) -> bool {
        self.lo < other.hi && other.lo < self.hi
    }

    pub fn shifted(&self, t: &QNum) -> OpenInterval {
        OpenInterval::new(&self.lo + t, &self.hi + t)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PwlFunction {
    pub name: String,
    pub f: QNum,
    pub rows: Vec<BreakpointRow>,
    #[serde(default)]
    pub special_intervals: Vec<OpenInterval>,
}

impl PwlFunction {
    pub fn from_rows(
        name: impl Into<String>,
        rows: Vec<BreakpointRow>,
        f: QNum,
        special_intervals: Vec<OpenInterval>,
    ) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidFunction("no breakpoints".into()));
        }
        if !rows[0].x.is_zero() {
            return Err(Error::InvalidFunction(format!(
                "first breakpoint must be 0, got {}",
                rows[0].x
            )));
        }
        for w in rows.windows(2) {
            if w[0].x >= w[1].x {
                return Err(Error::InvalidFunction(format!(
                    "breakpoints not strictly increasing at {}",
                    w[1].x
                )));
            }
        }
        let last = &rows[rows.len() - 1].x;
        if *last >= QNum::one() {
            return Err(Error::InvalidFunction(format!(
                "breakpoint {last} outside [0, 1)"
            )));
        }
        if !(f.is_positive() && f < QNum::one()) {
            return Err(Error::InvalidFunction(format!("f = {f} outside (0, 1)")));
        }
        for iv in &special_intervals {
            if iv.is_empty() {
                return Err(Error::InvalidFunction(format!(
                    "empty special interval ({}, {})",
                    iv.lo, iv.hi
                )));
            }
        }
        Ok(PwlFunction {
            name: name.into(),
            f,
            rows,
            special_intervals,
        })
    }

    /// Continuous function through the given points; `points[0]` must be at 0
    /// and the value at 1 is taken from `points[0]`.
    pub fn continuous(name: impl Into<String>, points: &[(QNum, QNum)], f: QNum) -> Result<Self> {
        let rows = points
            .iter()
            .map(|(x, y)| BreakpointRow::continuous(x.clone(), y.clone()))
            .collect();
        PwlFunction::from_rows(name, rows, f, Vec::new())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn breakpoints(&self) -> Vec<QNum> {
        self.rows.iter().map(|r| r.x.clone()).collect()
    }

    /// `x_i` for `i` in `0..=n`, with `x_n = 1`.
    pub fn x_at(&self, i: usize) -> QNum {
        if i == self.rows.len() {
            QNum::one()
        } else {
            self.rows[i].x.clone()
        }
    }

    pub fn is_continuous(&self) -> bool {
        self.rows.iter().all(BreakpointRow::is_continuous)
    }

    /// `Ok(i)` if the reduced `x` is breakpoint `i`, `Err(i)` if it lies
    /// strictly inside piece `i`.
    pub fn locate(&self, x: &QNum) -> std::result::Result<usize, usize> {
        match self.rows.binary_search_by(|r| r.x.cmp(x)) {
            Ok(i) => Ok(i),
            Err(i) => Err(i - 1),
        }
    }

    /// Endpoint values `(right_limit_i, left_limit_{i+1})` of piece `i`.
    pub fn piece_ends(&self, i: usize) -> (&QNum, &QNum) {
        let next = (i + 1) % self.rows.len();
        (&self.rows[i].right_limit, &self.rows[next].left_limit)
    }

    pub fn slope(&self, i: usize) -> QNum {
        let (r, l) = self.piece_ends(i);
        (l - r) / (self.x_at(i + 1) - &self.rows[i].x)
    }

    pub fn slopes(&self) -> Vec<QNum> {
        (0..self.rows.len()).map(|i| self.slope(i)).collect()
    }

    /// Affine extension of piece `i` evaluated at `x` (no reduction mod 1).
    pub fn piece_eval(&self, i: usize, x: &QNum) -> QNum {
        let (r, _) = self.piece_ends(i);
        r + self.slope(i) * (x - &self.rows[i].x)
    }

    pub fn eval(&self, x: &QNum) -> QNum {
        self.limit(x, Side::At)
    }

    pub fn limit(&self, x: &QNum, side: Side) -> QNum {
        let x = x.frac_part();
        match self.locate(&x) {
            Ok(i) => {
                let row = &self.rows[i];
                match side {
                    Side::Minus => row.left_limit.clone(),
                    Side::At => row.value.clone(),
                    Side::Plus => row.right_limit.clone(),
                }
            }
            Err(i) => self.piece_eval(i, &x),
        }
    }

    /// Subadditivity slack `π(x) + π(y) − π(x+y)`.
    pub fn delta(&self, x: &QNum, y: &QNum) -> QNum {
        self.eval(x) + self.eval(y) - self.eval(&(x + y))
    }

    pub fn max_abs_slope(&self) -> QNum {
        self.slopes()
            .into_iter()
            .map(|s| s.abs())
            .fold(QNum::zero(), QNum::max)
    }

    /// All values and one-sided limits at breakpoints.
    pub fn all_limits(&self) -> impl Iterator<Item = (&QNum, Side, &QNum)> {
        self.rows.iter().flat_map(|r| {
            [
                (&r.x, Side::Minus, &r.left_limit),
                (&r.x, Side::At, &r.value),
                (&r.x, Side::Plus, &r.right_limit),
            ]
        })
    }

    /// Same function over a finer breakpoint set (points reduced mod 1).
    pub fn refine(&self, points: &[QNum]) -> PwlFunction {
        let mut xs: Vec<QNum> = self.breakpoints();
        xs.extend(points.iter().map(QNum::frac_part));
        xs.sort();
        xs.dedup();
        let rows = xs
            .into_iter()
            .map(|x| match self.locate(&x) {
                Ok(i) => self.rows[i].clone(),
                Err(_) => BreakpointRow::continuous(x.clone(), self.eval(&x)),
            })
            .collect();
        PwlFunction {
            rows,
            ..self.clone()
        }
    }

    /// `alpha * self + beta * other` over the union of both breakpoint sets.
    /// Name, `f` and special intervals come from `self`.
    pub fn combine(&self, alpha: &QNum, other: &PwlFunction, beta: &QNum) -> PwlFunction {
        let a = self.refine(&other.breakpoints());
        let b = other.refine(&self.breakpoints());
        let mix = |p: &QNum, q: &QNum| alpha * p + beta * q;
        let rows = a
            .rows
            .iter()
            .zip(&b.rows)
            .map(|(r, s)| {
                BreakpointRow::new(
                    r.x.clone(),
                    mix(&r.left_limit, &s.left_limit),
                    mix(&r.value, &s.value),
                    mix(&r.right_limit, &s.right_limit),
                )
            })
            .collect();
        PwlFunction {
            rows,
            ..self.clone()
        }
    }

    pub fn scaled(&self, alpha: &QNum) -> PwlFunction {
        let rows = self
            .rows
            .iter()
            .map(|r| {
                BreakpointRow::new(
                    r.x.clone(),
                    alpha * &r.left_limit,
                    alpha * &r.value,
                    alpha * &r.right_limit,
                )
            })
            .collect();
        PwlFunction {
            rows,
            ..self.clone()
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> PwlFunction {
        self.name = name.into();
        self
    }

    /// Drops breakpoints where the function is continuous and the slope does
    /// not change.
    pub fn simplified(&self) -> PwlFunction {
        let n = self.rows.len();
        let slopes = self.slopes();
        let keep: Vec<bool> = (0..n)
            .map(|i| i == 0 || !self.rows[i].is_continuous() || slopes[i - 1] != slopes[i])
            .collect();
        let rows = self
            .rows
            .iter()
            .zip(keep)
            .filter_map(|(r, k)| k.then(|| r.clone()))
            .collect();
        PwlFunction {
            rows,
            ..self.clone()
        }
    }

    /// Non-fatal remarks about the data, e.g. `f` not being a breakpoint.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.locate(&self.f).is_err() {
            out.push(format!("f = {} is not a breakpoint", self.f));
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "name: {}", self.name).unwrap();
        writeln!(s, "f: {}", self.f).unwrap();
        if !self.special_intervals.is_empty() {
            let parts: Vec<String> = self
                .special_intervals
                .iter()
                .map(|iv| format!("({}, {})", iv.lo, iv.hi))
                .collect();
            writeln!(s, "special_intervals: {}", parts.join("; ")).unwrap();
        }
        for r in &self.rows {
            writeln!(
                s,
                "{} | {} | {} | {}",
                r.x, r.left_limit, r.value, r.right_limit
            )
            .unwrap();
        }
        s
    }

    /// Parses the text format written by [`PwlFunction::to_text`].  Blank
    /// lines and lines starting with `#` are ignored.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut name = None;
        let mut f = None;
        let mut special = Vec::new();
        let mut rows = Vec::new();
        let mut offset = 0usize;
        for line in text.split_inclusive('\n') {
            let start = offset;
            offset += line.len();
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let at = |e: Error| match e {
                Error::Parse { pos, msg } => Error::Parse {
                    pos: start + pos,
                    msg,
                },
                other => other,
            };
            if let Some(rest) = trimmed.strip_prefix("name:") {
                name = Some(rest.trim().to_string());
            } else if let Some(rest) = trimmed.strip_prefix("f:") {
                f = Some(parse_qnum(rest).map_err(at)?);
            } else if let Some(rest) = trimmed.strip_prefix("special_intervals:") {
                special = parse_intervals(rest).map_err(at)?;
            } else {
                let cols: Vec<&str> = trimmed.split('|').collect();
                if cols.len() != 4 {
                    return Err(Error::Parse {
                        pos: start,
                        msg: format!("expected 4 columns, found {}", cols.len()),
                    });
                }
                let mut vals = Vec::with_capacity(4);
                for c in cols {
                    vals.push(parse_qnum(c).map_err(at)?);
                }
                let mut it = vals.into_iter();
                let mut next = || it.next().expect("4 columns");
                rows.push(BreakpointRow::new(next(), next(), next(), next()));
            }
        }
        let f = f.ok_or_else(|| Error::Parse {
            pos: 0,
            msg: "missing `f:` header".into(),
        })?;
        PwlFunction::from_rows(name.unwrap_or_default(), rows, f, special)
    }
}

fn parse_intervals(text: &str) -> Result<Vec<OpenInterval>> {
    let mut out = Vec::new();
    for part in text.split(';') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let inner = part
            .strip_prefix('(')
            .and_then(|p| p.strip_suffix(')'))
            .ok_or_else(|| Error::Parse {
                pos: 0,
                msg: format!("interval {part:?} must be written (lo, hi)"),
            })?;
        let (lo, hi) = inner.split_once(',').ok_or_else(|| Error::Parse {
            pos: 0,
            msg: format!("interval {part:?} needs two endpoints"),
        })?;
        out.push(OpenInterval::new(parse_qnum(lo)?, parse_qnum(hi)?));
    }
    Ok(out)
}

/// Breakpoints of `P` over `[0, 2]`: `x_0..x_{n-1}`, `1+x_0..1+x_{n-1}`, `2`.
pub fn extended_breakpoints(xs: &[QNum]) -> Vec<QNum> {
    let one = QNum::one();
    let mut out: Vec<QNum> = xs.to_vec();
    out.extend(xs.iter().map(|x| x + &one));
    out.push(QNum::from_int(2));
    out
}

/// Index of the largest element `<= x` in a sorted slice (`None` if `x` is
/// below the first).
pub fn floor_index(sorted: &[QNum], x: &QNum) -> Option<usize> {
    match sorted.binary_search_by(|p| p.cmp(x)) {
        Ok(i) => Some(i),
        Err(0) => None,
        Err(i) => Some(i - 1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::q;

    fn gmic(f: &str) -> PwlFunction {
        let f = q(f);
        PwlFunction::continuous(
            "gmic",
            &[(QNum::zero(), QNum::zero()), (f.clone(), QNum::one())],
            f,
        )
        .unwrap()
    }

    fn jumpy() -> PwlFunction {
        PwlFunction::from_rows(
            "jumpy",
            vec![
                BreakpointRow::new(q("0"), q("1/2"), q("0"), q("0")),
                BreakpointRow::new(q("1/4"), q("1/2"), q("1/4"), q("3/4")),
            ],
            q("1/2"),
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn zero_function() {
        let z = PwlFunction::continuous("zero", &[(q("0"), q("0"))], q("1/2")).unwrap();
        assert_eq!(z.eval(&q("1/3 + 1/7*sqrt2")), QNum::zero());
        assert_eq!(z.slopes(), vec![QNum::zero()]);
    }

    #[test]
    fn eval_and_limits() {
        let g = gmic("2/3");
        assert_eq!(g.eval(&q("1/3")), q("1/2"));
        assert_eq!(g.eval(&q("5/6")), q("1/2"));
        assert_eq!(g.eval(&q("-1/6")), q("1/2"));
        assert_eq!(g.slope(0), q("3/2"));
        assert_eq!(g.slope(1), q("-3"));
        let j = jumpy();
        assert_eq!(j.limit(&q("1/4"), Side::Minus), q("1/2"));
        assert_eq!(j.limit(&q("1/4"), Side::Plus), q("3/4"));
        assert_eq!(j.limit(&q("1"), Side::Minus), q("1/2"));
        assert_eq!(j.eval(&q("1/8")), q("1/4"));
        assert_eq!(j.eval(&q("5/8")), q("5/8"));
    }

    #[test]
    fn delta_is_zero_at_origin() {
        let j = jumpy();
        for y in ["0", "1/8", "1/4", "3/5"] {
            assert_eq!(j.delta(&QNum::zero(), &q(y)), QNum::zero());
        }
    }

    #[test]
    fn rejects_bad_rows() {
        let bad = vec![
            BreakpointRow::continuous(q("0"), q("0")),
            BreakpointRow::continuous(q("1/2"), q("1")),
            BreakpointRow::continuous(q("1/3"), q("1")),
        ];
        assert!(PwlFunction::from_rows("x", bad, q("1/2"), vec![]).is_err());
        let dup = vec![
            BreakpointRow::continuous(q("0"), q("0")),
            BreakpointRow::continuous(q("0"), q("1")),
        ];
        assert!(PwlFunction::from_rows("x", dup, q("1/2"), vec![]).is_err());
        let outside = vec![
            BreakpointRow::continuous(q("0"), q("0")),
            BreakpointRow::continuous(q("1"), q("1")),
        ];
        assert!(PwlFunction::from_rows("x", outside, q("1/2"), vec![]).is_err());
    }

    #[test]
    fn warns_when_f_not_breakpoint() {
        let z = PwlFunction::continuous("zero", &[(q("0"), q("0"))], q("1/2")).unwrap();
        assert_eq!(z.warnings().len(), 1);
        assert!(gmic("1/2").warnings().is_empty());
    }

    #[test]
    fn text_round_trip() {
        let mut j = jumpy();
        j.special_intervals = vec![OpenInterval::new(q("1/10"), q("1/5 - 1/100*sqrt2"))];
        let text = j.to_text();
        let back = PwlFunction::from_text(&text).unwrap();
        assert_eq!(back, j);
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn text_errors() {
        assert!(PwlFunction::from_text("name: x\n0 | 0 | 0 | 0\n").is_err());
        match PwlFunction::from_text("f: 1/2\n0 | 0 | zz | 0\n") {
            Err(Error::Parse { pos, .. }) => assert!(pos >= 7),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn combine_and_refine() {
        let a = gmic("1/2");
        let b = gmic("1/3");
        let half = q("1/2");
        let m = a.combine(&half, &b, &half);
        assert_eq!(m.breakpoints(), vec![q("0"), q("1/3"), q("1/2")]);
        for x in ["1/7", "2/5", "3/4"] {
            let x = q(x);
            assert_eq!(m.eval(&x), (a.eval(&x) + b.eval(&x)).half());
        }
        let r = a.refine(&[q("1/4"), q("5/4")]);
        assert_eq!(r.len(), 3);
        assert_eq!(r.simplified(), a);
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn frac() -> impl Strategy<Value = QNum> {
        (0i64..997, 1i64..13).prop_map(|(n, d)| QNum::frac(n % (d * 7), d * 7))
    }

    fn function() -> impl Strategy<Value = PwlFunction> {
        (
            proptest::collection::btree_set(1i64..60, 0..6),
            proptest::collection::vec((-20i64..20, -20i64..20, -20i64..20), 7),
        )
            .prop_map(|(xs, vals)| {
                let mut rows = vec![];
                let points: Vec<QNum> = std::iter::once(QNum::zero())
                    .chain(xs.into_iter().map(|k| QNum::frac(k, 60)))
                    .collect();
                for (x, (l, v, r)) in points.into_iter().zip(vals) {
                    rows.push(BreakpointRow::new(
                        x,
                        QNum::frac(l, 10),
                        QNum::frac(v, 10),
                        QNum::frac(r, 10),
                    ));
                }
                PwlFunction::from_rows("random", rows, QNum::frac(1, 2), vec![]).unwrap()
            })
    }

    proptest! {
        #[test]
        fn periodic(p in function(), x in frac()) {
            let one = QNum::one();
            prop_assert_eq!(p.eval(&x), p.eval(&(&x + &one)));
            prop_assert_eq!(p.eval(&x), p.eval(&(&x - &one)));
        }

        #[test]
        fn pieces_consistent(p in function()) {
            for i in 0..p.len() {
                let (r, l) = p.piece_ends(i);
                let width = p.x_at(i + 1) - &p.rows[i].x;
                prop_assert_eq!(l.clone(), r + p.slope(i) * width);
            }
        }

        #[test]
        fn at_is_eval(p in function(), x in frac()) {
            prop_assert_eq!(p.limit(&x, Side::At), p.eval(&x));
            if p.locate(&x).is_err() {
                prop_assert_eq!(p.limit(&x, Side::Minus), p.eval(&x));
                prop_assert_eq!(p.limit(&x, Side::Plus), p.eval(&x));
            }
        }

        #[test]
        fn text_round_trip(p in function()) {
            let t = p.to_text();
            let back = PwlFunction::from_text(&t).unwrap();
            prop_assert_eq!(back.to_text(), t);
            prop_assert_eq!(back, p);
        }

        #[test]
        fn refine_preserves_limits(p in function(), x in frac(), y in frac()) {
            let r = p.refine(&[y]);
            for side in [Side::Minus, Side::At, Side::Plus] {
                prop_assert_eq!(r.limit(&x, side), p.limit(&x, side));
            }
        }
    }
}
