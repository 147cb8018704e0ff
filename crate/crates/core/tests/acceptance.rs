//! One PASS/FAIL line per acceptance criterion.  Exact checks have zero
//! tolerance; the only numeric limits are the runtime budgets below.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gj_facets::additivity::{additive_face_report, e_containment, minimality_test, Containment};
use gj_facets::catalog::{kzh_function, kzh_s, psi_function, psi_prime_function, LiftedFunction};
use gj_facets::covering::covering;
use gj_facets::perturbation::{
    lipschitz_epsilon, scaling_epsilon, verify_effective, AffineOnPolygon, Perturbation,
};
use gj_facets::pwl::{BreakpointRow, OpenInterval, PwlFunction, Side};
use gj_facets::verify::{
    verify_kzh_claim_slacks_of, verify_kzh_perturbation_rank_of, verify_lifted_with,
    verify_psi_separation_of, ClaimReport, LiftedOptions,
};
use gj_facets::{parse_qnum, q, QNum};

const TABLE_BUDGET: Duration = Duration::from_secs(1);
const MINIMALITY_BUDGET: Duration = Duration::from_secs(60);
const SLACKS_BUDGET: Duration = Duration::from_secs(120);

const POLYGONS: usize = 1000;
const POINTS_PER_POLYGON: usize = 20;
const RANDOM_FUNCTIONS: usize = 200;
const MUTATION: &str = "1/1000000";

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn fail(detail: impl Into<String>) -> Outcome {
    outcome(false, detail)
}

fn secs(d: Duration) -> String {
    format!("{:.2} s", d.as_secs_f64())
}

fn suite(r: &ClaimReport) -> Result<(), Outcome> {
    if r.is_verified() {
        Ok(())
    } else {
        Err(fail(r.to_string().replace('\n', "; ")))
    }
}

// ---------------------------------------------------------------- table

/// Row of the transcribed breakpoint table; missing limits equal the value.
struct TableRow {
    x: QNum,
    left: QNum,
    value: QNum,
    right: QNum,
    slope: Option<QNum>,
}

fn transcribed_table() -> Vec<TableRow> {
    let mut rows = Vec::new();
    for line in include_str!("data/kzh_rows.txt").lines() {
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('|').map(str::trim).collect();
        assert_eq!(cols.len(), 6, "{line}");
        assert_eq!(cols[0].parse::<usize>().unwrap(), rows.len());
        let num = |s: &str| parse_qnum(s).unwrap_or_else(|e| panic!("{s}: {e}"));
        let value = num(cols[3]);
        let or_value = |s: &str| if s.is_empty() { value.clone() } else { num(s) };
        rows.push(TableRow {
            x: num(cols[1]),
            left: or_value(cols[2]),
            right: or_value(cols[4]),
            slope: (!cols[5].is_empty()).then(|| num(cols[5])),
            value: value.clone(),
        });
    }
    rows
}

/// Value at `x` in `[0, 1]` from the transcribed rows and slopes only.
fn table_eval(table: &[TableRow], x: &QNum) -> QNum {
    let i = table.iter().rposition(|r| r.x <= *x).unwrap();
    let r = &table[i];
    if r.x == *x {
        return r.value.clone();
    }
    &r.right + &(r.slope.as_ref().unwrap() * &(x - &r.x))
}

fn c1_table() -> Outcome {
    let t = Instant::now();
    let pi = kzh_function();
    let table = transcribed_table();
    if table.len() != 41 || pi.rows.len() != 40 {
        return fail(format!(
            "{} table rows, {} breakpoints",
            table.len(),
            pi.rows.len()
        ));
    }
    for (i, row) in table.iter().enumerate() {
        let same = pi.limit(&row.x, Side::Minus) == row.left
            && pi.eval(&row.x) == row.value
            && pi.limit(&row.x, Side::Plus) == row.right
            && (i == 40 || pi.rows[i].x == row.x);
        if !same {
            return fail(format!("row {i} differs"));
        }
        if let Some(c) = &row.slope {
            if pi.slope(i) != *c {
                return fail(format!("slope after row {i}: {} vs {c}", pi.slope(i)));
            }
        }
    }
    // pieces end where the next row starts: the transcription is consistent
    for i in 0..40 {
        let next = &table[i + 1];
        let end = &table[i].right + &(table[i].slope.as_ref().unwrap() * &(&next.x - &table[i].x));
        if end != next.left {
            return fail(format!(
                "transcribed piece {i} does not reach the next limit"
            ));
        }
    }
    let l = q("219/800");
    let x39 = &table[39].x;
    let s =
        &table[39].left + &table_eval(&table, &(QNum::one() + &l - x39)) - table_eval(&table, &l);
    let elapsed = t.elapsed();
    outcome(
        s == q("19/23998") && kzh_s(&pi) == s && elapsed < TABLE_BUDGET,
        format!("40 rows exact, slopes exact, s = {s}, {}", secs(elapsed)),
    )
}

// ---------------------------------------------------------------- minimality

fn c2_minimality() -> Outcome {
    for pi in [psi_function(), psi_prime_function()] {
        let m = minimality_test(&pi);
        if !m.is_minimal() {
            return fail(format!("{} not minimal: {m:?}", pi.name));
        }
    }
    let t = Instant::now();
    let m = minimality_test(&kzh_function());
    let elapsed = t.elapsed();
    outcome(
        m.is_minimal() && elapsed < MINIMALITY_BUDGET,
        format!("psi, psi_prime, kzh minimal; kzh sweep {}", secs(elapsed)),
    )
}

// ---------------------------------------------------------------- psi

fn c3_psi() -> Outcome {
    let (psi, psi_prime) = (psi_function(), psi_prime_function());
    let witness = match e_containment(&psi, &psi_prime) {
        Containment::StrictSubset { witness } => witness,
        other => return fail(format!("containment {other:?}")),
    };
    let r = verify_psi_separation_of(&psi, &psi_prime);
    if let Err(o) = suite(&r) {
        return o;
    }
    let cone = r.check("limit cone northeast of (3/8, 3/8)").unwrap();
    outcome(
        cone.passed,
        format!("strict subset, witness {}; {}", witness.face, cone.detail),
    )
}

// ---------------------------------------------------------------- claim slacks

fn c4_slacks() -> Outcome {
    let t = Instant::now();
    let r = verify_kzh_claim_slacks_of(&kzh_function());
    let elapsed = t.elapsed();
    if let Err(o) = suite(&r) {
        return o;
    }
    let names = [
        "dichotomy",
        "no face with n_F = 3",
        "tight vertices only where n_F = 1",
        "other slacks above 3s",
    ];
    let missing: Vec<&str> = names
        .iter()
        .copied()
        .filter(|n| !r.check(n).is_some_and(|c| c.passed))
        .collect();
    outcome(
        missing.is_empty() && elapsed < SLACKS_BUDGET,
        format!(
            "{} faces with n_F > 0, no n_F = 3, {}{}",
            r.stats.get("faces_nf_positive").map_or("?", String::as_str),
            secs(elapsed),
            if missing.is_empty() {
                String::new()
            } else {
                format!("; missing {missing:?}")
            }
        ),
    )
}

// ---------------------------------------------------------------- rank

fn c5_rank() -> Outcome {
    let pi = kzh_function();
    let r = verify_kzh_perturbation_rank_of(&pi);
    if let Err(o) = suite(&r) {
        return o;
    }
    let (cx, report) = additive_face_report(&pi);
    let cov = covering(&cx, &report);
    let special = vec![
        OpenInterval::new(q("219/800"), q("269/800")),
        OpenInterval::new(q("371/800"), q("421/800")),
    ];
    let rank = r.stats["rank"].clone();
    let vars = r.stats["variables"].clone();
    outcome(
        rank == "39" && vars == "39" && cov.components.len() == 2 && cov.uncovered == special,
        format!(
            "rank {rank} over {vars} variables, {} components, uncovered {:?}",
            cov.components.len(),
            cov.uncovered
                .iter()
                .map(|i| format!("({}, {})", i.lo, i.hi))
                .collect::<Vec<_>>()
        ),
    )
}

// ---------------------------------------------------------------- lifted

fn c6_lifted() -> Outcome {
    let opts = LiftedOptions::default();
    let r = verify_lifted_with(&LiftedFunction::new(), &opts);
    if let Err(o) = suite(&r) {
        return o;
    }
    let classes: Vec<&str> = (1..=4)
        .map(|k| r.stats[&format!("additive_faces_class{k}")].as_str())
        .collect();
    let all_classes = classes.iter().all(|c| c.parse::<usize>().unwrap() > 0);
    outcome(
        all_classes && opts.samples_per_class >= 100,
        format!(
            "{} samples, {} per class on additive faces, proof classes 1-4 with {} faces",
            r.stats["samples"],
            opts.samples_per_class,
            classes.join("/")
        ),
    )
}

// ---------------------------------------------------------------- epsilon

fn epsilon_pair() -> (PwlFunction, PwlFunction) {
    let third = q("1/3");
    let p1 = PwlFunction::continuous(
        "gmic",
        &[(q("0"), q("0")), (third.clone(), q("1"))],
        third.clone(),
    )
    .unwrap();
    // gmic with f = 2/3 after x -> 2x
    let p2 = PwlFunction::continuous(
        "doubled",
        &[
            (q("0"), q("0")),
            (q("1/3"), q("1")),
            (q("1/2"), q("0")),
            (q("5/6"), q("1")),
        ],
        third,
    )
    .unwrap();
    let half = q("1/2");
    (
        p1.combine(&half, &p2, &half),
        p1.combine(&half, &p2, &-&half),
    )
}

fn c7_epsilon() -> Outcome {
    let (p0, pbar) = epsilon_pair();
    if !minimality_test(&p0).is_minimal() || pbar.rows.iter().all(|r| r.value.is_zero()) {
        return fail("constructed pair is degenerate");
    }
    let le = match lipschitz_epsilon(&p0, &pbar) {
        Ok(le) => le,
        Err(e) => return fail(format!("lipschitz_epsilon: {e}")),
    };
    let Some(eps) = le.epsilon.clone() else {
        return fail("lipschitz epsilon unbounded for a nonzero perturbation");
    };
    let moved = |e: &QNum| {
        [QNum::one(), -QNum::one()]
            .iter()
            .all(|sign| minimality_test(&p0.combine(&QNum::one(), &pbar, &(sign * e))).is_minimal())
    };
    let effective = verify_effective(&p0, &Perturbation::Piecewise(&pbar), &eps).unwrap();
    let scale = match scaling_epsilon(&p0, &pbar) {
        Ok(s) => s,
        Err(e) => return fail(format!("scaling_epsilon: {e}")),
    };
    let minus_scaled = minimality_test(&p0.combine(&QNum::one(), &pbar, &-&scale)).is_minimal();
    outcome(
        eps.is_positive() && effective && moved(&eps) && scale.is_positive() && minus_scaled,
        format!(
            "lipschitz eps = {eps} (m = {}, M = {}, C = {}), scaling eps = {scale}",
            le.m, le.big_m, le.c
        ),
    )
}

// ---------------------------------------------------------------- distance estimate

fn rand_frac(rng: &mut ChaCha8Rng, denom: i64) -> QNum {
    QNum::frac(rng.gen_range(0..=denom), denom)
}

fn cross(o: &(QNum, QNum), a: &(QNum, QNum), b: &(QNum, QNum)) -> QNum {
    &(&a.0 - &o.0) * &(&b.1 - &o.1) - &(&a.1 - &o.1) * &(&b.0 - &o.0)
}

/// Convex hull, counterclockwise, no collinear points.
fn hull(mut pts: Vec<(QNum, QNum)>) -> Vec<(QNum, QNum)> {
    pts.sort();
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<(QNum, QNum)> = Vec::new();
    for p in &pts {
        while lower.len() >= 2
            && !cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p).is_positive()
        {
            lower.pop();
        }
        lower.push(p.clone());
    }
    let mut upper: Vec<(QNum, QNum)> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2
            && !cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p).is_positive()
        {
            upper.pop();
        }
        upper.push(p.clone());
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn seg_dist2(p: &(QNum, QNum), a: &(QNum, QNum), b: &(QNum, QNum)) -> QNum {
    let (dx, dy) = (&b.0 - &a.0, &b.1 - &a.1);
    let len2 = &dx * &dx + &dy * &dy;
    let t = if len2.is_zero() {
        QNum::zero()
    } else {
        let t = (&(&p.0 - &a.0) * &dx + &(&p.1 - &a.1) * &dy) / len2;
        t.max(QNum::zero()).min(QNum::one())
    };
    let (ex, ey) = (&p.0 - &(&a.0 + &(&t * &dx)), &p.1 - &(&a.1 + &(&t * &dy)));
    &ex * &ex + &ey * &ey
}

fn c8_distance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xa1);
    let mut checked = 0usize;
    let mut segment_cases = 0usize;
    for k in 0..POLYGONS {
        let poly = loop {
            let n = rng.gen_range(3..=7);
            let pts = (0..n)
                .map(|_| (rand_frac(&mut rng, 48), rand_frac(&mut rng, 48)))
                .collect();
            let h = hull(pts);
            if h.len() >= 3 {
                break h;
            }
        };
        // g vanishes on the minimizing vertex, or on a whole edge when the
        // direction is taken normal to one
        let (a, b) = if k % 2 == 0 {
            let e = rng.gen_range(0..poly.len());
            let (p, r) = (&poly[e], &poly[(e + 1) % poly.len()]);
            (&p.1 - &r.1, &r.0 - &p.0)
        } else {
            (
                QNum::from_int(rng.gen_range(-9..=9)),
                QNum::from_int(rng.gen_range(-9..=9)),
            )
        };
        let raw: Vec<QNum> = poly.iter().map(|v| &(&a * &v.0) + &(&b * &v.1)).collect();
        let low = raw.iter().min().unwrap().clone();
        let values: Vec<QNum> = raw.iter().map(|r| r - &low).collect();
        let zeros: Vec<&(QNum, QNum)> = poly
            .iter()
            .zip(&values)
            .filter(|(_, g)| g.is_zero())
            .map(|(v, _)| v)
            .collect();
        let Some(m) = values.iter().filter(|g| g.is_positive()).min().cloned() else {
            continue;
        };
        if zeros.len() == 2 {
            segment_cases += 1;
        }
        let g_at = |p: &(QNum, QNum)| &(&(&a * &p.0) + &(&b * &p.1)) - &low;
        let f = AffineOnPolygon {
            polygon: poly.clone(),
            coeffs: (a.clone(), b.clone(), -&low),
        };
        for j in 0..POINTS_PER_POLYGON {
            let p = if j < poly.len() {
                poly[j].clone()
            } else {
                let w: Vec<i64> = (0..poly.len()).map(|_| rng.gen_range(0..=20)).collect();
                let total: i64 = w.iter().sum::<i64>().max(1);
                let mut p = (QNum::zero(), QNum::zero());
                for (v, wi) in poly.iter().zip(&w) {
                    let c = QNum::frac(*wi, total);
                    p = (&p.0 + &(&c * &v.0), &p.1 + &(&c * &v.1));
                }
                if w.iter().all(|&x| x == 0) {
                    p = poly[0].clone();
                }
                p
            };
            // S is the zero vertex or the zero edge
            let d2 = match zeros.len() {
                1 => seg_dist2(&p, zeros[0], zeros[0]),
                _ => seg_dist2(&p, zeros[0], zeros[1]),
            };
            let g = g_at(&p);
            let lhs = &(&g * &QNum::from_int(2)) / &m;
            let holds = !g.is_negative() && &lhs * &lhs >= d2;
            if !holds || f.distance_bound_holds(&p) != holds {
                return fail(format!("polygon {k} point ({}, {})", p.0, p.1));
            }
            checked += 1;
        }
    }
    outcome(
        checked > 0,
        format!(
            "{POLYGONS} polygons, {checked} points, {segment_cases} with a zero edge, 0 violations"
        ),
    )
}

// ---------------------------------------------------------------- oracle

fn gmic_composed(f: &QNum, k: i64) -> Option<PwlFunction> {
    let fk = (&QNum::from_int(k) * f).frac_part();
    if fk.is_zero() {
        return None;
    }
    let mut pts = Vec::new();
    for j in 0..k {
        let kq = QNum::from_int(k);
        pts.push(((&QNum::from_int(j) / &kq), QNum::zero()));
        pts.push((&(&QNum::from_int(j) + &fk) / &kq, QNum::one()));
    }
    PwlFunction::continuous(format!("gmic{k}"), &pts, f.clone()).ok()
}

fn random_table(rng: &mut ChaCha8Rng) -> PwlFunction {
    loop {
        let d = [4i64, 5, 6, 8][rng.gen_range(0..4)];
        let f = QNum::frac(rng.gen_range(1..d), d);
        let mut xs: Vec<i64> = (1..d).filter(|_| rng.gen_bool(0.4)).collect();
        xs.truncate(5);
        let v = [2i64, 3, 4, 6][rng.gen_range(0..4)];
        let val = |rng: &mut ChaCha8Rng| QNum::frac(rng.gen_range(0..=v), v);
        let mut rows = vec![{
            let (l, r) = (val(rng), val(rng));
            BreakpointRow::new(QNum::zero(), l, QNum::zero(), r)
        }];
        for x in xs {
            let value = val(rng);
            let (l, r) = if rng.gen_bool(0.5) {
                (value.clone(), value.clone())
            } else {
                (val(rng), val(rng))
            };
            rows.push(BreakpointRow::new(QNum::frac(x, d), l, value, r));
        }
        if let Ok(p) = PwlFunction::from_rows("random", rows, f, Vec::new()) {
            return p;
        }
    }
}

/// Changes one value or limit, at one breakpoint or at a breakpoint and its
/// mirror image so that symmetry survives.
fn mutate(rng: &mut ChaCha8Rng, pi: &PwlFunction) -> PwlFunction {
    let mut g = pi.clone();
    let i = rng.gen_range(0..g.rows.len());
    let delta = QNum::frac(
        [1, -1][rng.gen_range(0..2)],
        [8, 16, 24][rng.gen_range(0..3)],
    );
    let which = rng.gen_range(0..3);
    let bump = |row: &mut BreakpointRow, which: usize, d: &QNum| match which {
        0 => row.left_limit = &row.left_limit + d,
        1 => row.value = &row.value + d,
        _ => row.right_limit = &row.right_limit + d,
    };
    bump(&mut g.rows[i], which, &delta);
    if rng.gen_bool(0.5) {
        let y = (&g.f - &g.rows[i].x).frac_part();
        if let Some(j) = g.rows.iter().position(|r| r.x == y) {
            if j != i {
                bump(&mut g.rows[j], 2 - which, &-&delta);
            }
        }
    }
    g
}

fn random_function(rng: &mut ChaCha8Rng) -> PwlFunction {
    let base = match rng.gen_range(0..10) {
        0..=2 => return random_table(rng),
        3 => psi_function(),
        4 => psi_prime_function(),
        _ => loop {
            let d = [3i64, 4, 5, 6, 8][rng.gen_range(0..5)];
            let f = QNum::frac(rng.gen_range(1..d), d);
            if let Some(p) = gmic_composed(&f, rng.gen_range(1..=3)) {
                break p;
            }
        },
    };
    if rng.gen_bool(0.6) {
        mutate(rng, &base)
    } else {
        base
    }
}

/// Value at `x` straight from the rows: the breakpoint value, or the line
/// between the adjacent one-sided limits.
fn row_eval(pi: &PwlFunction, x: &QNum) -> QNum {
    let x = x.frac_part();
    let n = pi.rows.len();
    let i = pi.rows.iter().rposition(|r| r.x <= x).unwrap();
    let r = &pi.rows[i];
    if r.x == x {
        return r.value.clone();
    }
    let (x1, y1) = if i + 1 < n {
        (pi.rows[i + 1].x.clone(), pi.rows[i + 1].left_limit.clone())
    } else {
        (QNum::one(), pi.rows[0].left_limit.clone())
    };
    &r.right_limit + &(&(&y1 - &r.right_limit) * &(&(&x - &r.x) / &(&x1 - &r.x)))
}

fn common_denominator(pi: &PwlFunction) -> i64 {
    let mut d = 1i64;
    for x in pi.rows.iter().map(|r| &r.x).chain(std::iter::once(&pi.f)) {
        let den: i64 = x.rational_part().denom().try_into().unwrap();
        d = num_lcm(d, den);
    }
    d
}

fn num_lcm(a: i64, b: i64) -> i64 {
    let (mut x, mut y) = (a, b);
    while y != 0 {
        (x, y) = (y, x % y);
    }
    a / x * b
}

/// Minimality judged from point samples only: grid points, points a tiny
/// step off the grid on both sides (standing in for one-sided limits), and
/// quarter points in between.
fn sampling_oracle(pi: &PwlFunction) -> bool {
    let d = common_denominator(pi);
    let eta = QNum::frac(1, 1_000_000 * d);
    let mut xs = Vec::new();
    for k in 0..d {
        let g = QNum::frac(k, d);
        for m in -2..=2i64 {
            xs.push((&g + &(&QNum::from_int(m) * &eta)).frac_part());
        }
        for j in 1..4 {
            xs.push(QNum::frac(4 * k + j, 4 * d));
        }
    }
    let vals: Vec<QNum> = xs.iter().map(|x| row_eval(pi, x)).collect();
    if !row_eval(pi, &QNum::zero()).is_zero() {
        return false;
    }
    if vals.iter().any(|v| v.is_negative() || *v > QNum::one()) {
        return false;
    }
    for (x, v) in xs.iter().zip(&vals) {
        if v + &row_eval(pi, &(&pi.f - x)) != QNum::one() {
            return false;
        }
    }
    for i in 0..xs.len() {
        for j in i..xs.len() {
            let s = &(&vals[i] + &vals[j]) - &row_eval(pi, &(&xs[i] + &xs[j]));
            if s.is_negative() {
                return false;
            }
        }
    }
    true
}

fn c9_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x9);
    let (mut minimal, mut not_minimal, mut discontinuous) = (0, 0, 0);
    for k in 0..RANDOM_FUNCTIONS {
        let pi = random_function(&mut rng);
        if pi.rows.len() > 6 {
            return fail(format!("generator produced {} breakpoints", pi.rows.len()));
        }
        let exact = minimality_test(&pi).is_minimal();
        if exact != sampling_oracle(&pi) {
            return fail(format!(
                "function {k} disagrees (test says {exact}):\n{}",
                pi.to_text()
            ));
        }
        if exact {
            minimal += 1;
        } else {
            not_minimal += 1;
        }
        if !pi.is_continuous() {
            discontinuous += 1;
        }
    }
    outcome(
        minimal > 0 && not_minimal > 0,
        format!(
            "{RANDOM_FUNCTIONS} functions ({minimal} minimal, {not_minimal} not, {discontinuous} discontinuous), 0 disagreements"
        ),
    )
}

// ---------------------------------------------------------------- controls

fn nudge(pi: &PwlFunction, row: usize) -> PwlFunction {
    let mut g = pi.clone();
    g.rows[row].value = &g.rows[row].value + &q(MUTATION);
    g
}

fn c10_controls() -> Outcome {
    let kzh = kzh_function();
    let mut lifted = LiftedFunction::new();
    lifted.base = nudge(&lifted.base, 17);
    let reports = [
        verify_psi_separation_of(&nudge(&psi_function(), 1), &psi_prime_function()),
        verify_kzh_claim_slacks_of(&nudge(&kzh, 17)),
        verify_kzh_perturbation_rank_of(&nudge(&kzh, 17)),
        verify_lifted_with(&lifted, &LiftedOptions::default()),
    ];
    let survivors: Vec<&str> = reports
        .iter()
        .filter(|r| r.is_verified())
        .map(|r| r.claim.as_str())
        .collect();
    outcome(
        survivors.is_empty(),
        if survivors.is_empty() {
            format!(
                "all {} suites refuted after a {MUTATION} change",
                reports.len()
            )
        } else {
            format!("still verified: {survivors:?}")
        },
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("table fidelity", c1_table),
        ("minimality", c2_minimality),
        ("psi separation", c3_psi),
        ("claim slacks", c4_slacks),
        ("perturbation rank", c5_rank),
        ("lifted function", c6_lifted),
        ("epsilon constants", c7_epsilon),
        ("distance estimate", c8_distance),
        ("oracle agreement", c9_oracle),
        ("negative controls", c10_controls),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let t = Instant::now();
        let o = run();
        println!(
            "{} {:>2} {name}: {} [{}]",
            if o.pass { "PASS" } else { "FAIL" },
            k + 1,
            o.detail,
            secs(t.elapsed())
        );
        if !o.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
