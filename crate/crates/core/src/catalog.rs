//! Built-in functions: the one-sided discontinuous three-slope `psi`, its
//! modification `psi_prime` (`2x` on `[0, 1/2]`), the 40-breakpoint function
//! `kzh` over Q(sqrt 2) and the lifted function `kzh_lifted`.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::{q, rat_integer_ratio, rat_mod, QNum, Rat};
use crate::pwl::{BreakpointRow, OpenInterval, PwlFunction};

const KZH_TABLE: &str = include_str!("../data/kzh.txt");

/// Slope class of each piece of `kzh`, `1..=3` standing for `c1, c2, c3`.
const KZH_SLOPE_CLASSES: &str = "3131311313313313121213133133131131313131";

pub const CATALOG_NAMES: [&str; 4] = ["psi", "psi_prime", "kzh", "kzh_lifted"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KzhParams {
    pub f: QNum,
    pub l: QNum,
    pub u: QNum,
    pub a0: QNum,
    pub a1: QNum,
    pub a2: QNum,
    pub t1: QNum,
    pub t2: QNum,
    pub c1: QNum,
    pub c2: QNum,
    pub c3: QNum,
    pub s: QNum,
}

impl KzhParams {
    pub fn new() -> Self {
        let t1 = q("77/7752*sqrt2");
        let t2 = q("77/2584");
        let a0 = q("19/100");
        KzhParams {
            f: q("4/5"),
            l: q("219/800"),
            u: q("269/800"),
            a1: &a0 + &t1,
            a2: &a0 + &t2,
            a0,
            t1,
            t2,
            c1: q("35/13"),
            c2: q("5/11999"),
            c3: q("-5"),
            s: q("19/23998"),
        }
    }

    pub fn slope(&self, class: u8) -> &QNum {
        match class {
            1 => &self.c1,
            2 => &self.c2,
            _ => &self.c3,
        }
    }

    /// The special intervals `(l, u)` and `(f-u, f-l)`.
    pub fn special_intervals(&self) -> [OpenInterval; 2] {
        [
            OpenInterval::new(self.l.clone(), self.u.clone()),
            OpenInterval::new(&self.f - &self.u, &self.f - &self.l),
        ]
    }
}

impl Default for KzhParams {
    fn default() -> Self {
        KzhParams::new()
    }
}

/// Slope classes (`1..=3`) of the pieces of `kzh`.
pub fn kzh_slope_classes() -> Vec<u8> {
    KZH_SLOPE_CLASSES.bytes().map(|b| b - b'0').collect()
}

/// The 40-breakpoint function, checked against its slope column.
pub fn kzh_function() -> PwlFunction {
    let pi = PwlFunction::from_text(KZH_TABLE).expect("built-in table parses");
    let params = KzhParams::new();
    for (i, class) in kzh_slope_classes().into_iter().enumerate() {
        assert_eq!(
            pi.slope(i),
            *params.slope(class),
            "slope column mismatch on piece {i}"
        );
    }
    pi
}

/// `s = π(x39⁻) + π(1 + l − x39) − π(l)`, recomputed from the table.
pub fn kzh_s(pi: &PwlFunction) -> QNum {
    let p = KzhParams::new();
    let x39 = &pi.rows[39].x;
    let lhs = &pi.rows[39].left_limit;
    lhs + pi.eval(&(QNum::one() + &p.l - x39)) - pi.eval(&p.l)
}

/// ψ with `f = 1/2`, breakpoints `0, 1/8, 3/8, 1/2, 5/8, 7/8`.
pub fn psi_function() -> PwlFunction {
    let r = |x: &str, l: &str, v: &str, rt: &str| BreakpointRow::new(q(x), q(l), q(v), q(rt));
    let rows = vec![
        r("0", "1/2", "0", "0"),
        r("1/8", "3/4", "1/4", "1/4"),
        r("3/8", "3/4", "3/4", "1/4"),
        r("1/2", "1", "1", "1/2"),
        r("5/8", "3/4", "3/4", "3/4"),
        r("7/8", "1/4", "1/4", "1/4"),
    ];
    PwlFunction::from_rows("psi", rows, q("1/2"), vec![]).expect("psi rows are valid")
}

/// `2x` on `[0, 1/2]`, ψ on `(1/2, 1)`.
pub fn psi_prime_function() -> PwlFunction {
    let psi = psi_function();
    let rows = psi
        .rows
        .iter()
        .map(|row| {
            let x = &row.x;
            if *x <= q("1/2") {
                let two_x = x + x;
                let right = if *x == q("1/2") {
                    row.right_limit.clone()
                } else {
                    two_x.clone()
                };
                let left = if x.is_zero() {
                    row.left_limit.clone()
                } else {
                    two_x.clone()
                };
                BreakpointRow::new(x.clone(), left, two_x, right)
            } else {
                row.clone()
            }
        })
        .collect();
    PwlFunction::from_rows("psi_prime", rows, q("1/2"), vec![]).expect("psi_prime rows are valid")
}

pub fn by_name(name: &str) -> Result<PwlFunction> {
    match name {
        "psi" => Ok(psi_function()),
        "psi_prime" => Ok(psi_prime_function()),
        "kzh" => Ok(kzh_function()),
        "kzh_lifted" => Err(Error::NotPiecewiseLinear),
        other => Err(Error::Other(format!("unknown catalog function {other:?}"))),
    }
}

/// Class of a point of a special interval under the group `T`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CosetClass {
    FixedC,
    PlusCplus,
    Minus,
}

/// Reduced representative of `x + T` and its class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CosetProfile {
    /// `a' + b'√2` with `a' = a mod 77/2584`, `b' = b mod 77/7752`.
    pub reduced: QNum,
    pub class: CosetClass,
}

/// Group `T` generated by `t1 = (77/7752)√2` and `t2 = 77/2584`.
pub struct GroupT {
    step_rational: Rat,
    step_sqrt2: Rat,
}

impl GroupT {
    pub fn new(p: &KzhParams) -> Self {
        GroupT {
            step_rational: p.t2.rational_part().clone(),
            step_sqrt2: p.t1.sqrt2_part().clone(),
        }
    }

    pub fn contains(&self, x: &QNum) -> bool {
        rat_integer_ratio(x.rational_part(), &self.step_rational).is_some()
            && rat_integer_ratio(x.sqrt2_part(), &self.step_sqrt2).is_some()
    }

    /// Coset key `(a mod 77/2584, b mod 77/7752)`.
    pub fn reduce(&self, x: &QNum) -> (Rat, Rat) {
        (
            rat_mod(x.rational_part(), &self.step_rational),
            rat_mod(x.sqrt2_part(), &self.step_sqrt2),
        )
    }
}

/// The lifted function: `kzh` plus `±s` on the special intervals according
/// to the coset of the point.
pub struct LiftedFunction {
    pub base: PwlFunction,
    pub params: KzhParams,
    pub group: GroupT,
    fixed: Vec<QNum>,
}

impl LiftedFunction {
    pub fn new() -> Self {
        let params = KzhParams::new();
        let base = kzh_function();
        let group = GroupT::new(&params);
        let lu = &params.l + &params.u;
        let fixed = [
            QNum::zero(),
            params.t1.clone(),
            params.t2.clone(),
            &params.t1 + &params.t2,
        ]
        .iter()
        .map(|t| (&lu - t).half())
        .collect();
        LiftedFunction {
            base,
            params,
            group,
            fixed,
        }
    }

    /// Representatives `(l+u-t)/2` of the cosets fixed by `x -> l+u-x`.
    pub fn fixed_representatives(&self) -> &[QNum] {
        &self.fixed
    }

    pub fn rho(&self, x: &QNum) -> QNum {
        &self.params.l + &self.params.u - x
    }

    /// Classification of `x` in `(l, u)`.
    pub fn coset_classify(&self, x: &QNum) -> CosetProfile {
        let (a, b) = self.group.reduce(x);
        let class = if self.fixed.iter().any(|c| self.group.contains(&(x - c))) {
            CosetClass::FixedC
        } else {
            let other = self.group.reduce(&self.rho(x));
            // the lexicographically smaller reduced pair is the chosen coset
            match (&a, &b).cmp(&(&other.0, &other.1)) {
                Ordering::Less => CosetClass::PlusCplus,
                Ordering::Greater => CosetClass::Minus,
                Ordering::Equal => unreachable!("non-fixed coset equals its mirror"),
            }
        };
        CosetProfile {
            reduced: QNum::new(a, b),
            class,
        }
    }

    /// `σ(x) ∈ {-1, 0, 1}` with `π̂ = π + σ s`.
    pub fn sigma(&self, x: &QNum) -> i8 {
        let x = x.frac_part();
        let [lo, hi] = self.params.special_intervals();
        let sign = |c: CosetClass| match c {
            CosetClass::FixedC => 0,
            CosetClass::PlusCplus => 1,
            CosetClass::Minus => -1,
        };
        if lo.contains(&x) {
            sign(self.coset_classify(&x).class)
        } else if hi.contains(&x) {
            -sign(self.coset_classify(&(&self.params.f - &x)).class)
        } else {
            0
        }
    }

    pub fn eval(&self, x: &QNum) -> QNum {
        let base = self.base.eval(x);
        match self.sigma(x) {
            1 => base + &self.params.s,
            -1 => base - &self.params.s,
            _ => base,
        }
    }

    /// `π̂ − π`.
    pub fn perturbation(&self, x: &QNum) -> QNum {
        match self.sigma(x) {
            1 => self.params.s.clone(),
            -1 => -&self.params.s,
            _ => QNum::zero(),
        }
    }

    pub fn delta(&self, x: &QNum, y: &QNum) -> QNum {
        self.eval(x) + self.eval(y) - self.eval(&(x + y))
    }
}

impl Default for LiftedFunction {
    fn default() -> Self {
        LiftedFunction::new()
    }
}
