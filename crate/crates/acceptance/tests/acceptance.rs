//! Acceptance suite. Every test prints one `PASS`/`FAIL` line before
//! asserting, so `cargo test --test acceptance -- --nocapture` gives a
//! readable checklist.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use periodcert::arith::{fundamental_discriminants, Field, Number, Rational};
use periodcert::oracle::{find_periodic_points, preperiodic_closure, DEFAULT_CANDIDATE_CAP};
use periodcert::period::possible_periods;
use periodcert::residue::{primes_above, reduce_c, PrimeDesc, ProjPoint, ResidueField};
use periodcert::search::{enumerate_c, run_verification, Report, RunStatus, SearchConfig, Verdict};
use periodcert::sieve::sieve_stats;

const TEN_MINUTES: Duration = Duration::from_secs(600);

fn check(id: u32, name: &str, pass: bool, detail: String) {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("{tag} criterion {id:>2} {name}: {detail}");
    assert!(pass, "criterion {id} ({name}) failed: {detail}");
}

fn complete(cfg: &SearchConfig) -> Report {
    match run_verification(cfg).expect("run succeeds") {
        RunStatus::Complete(r) => *r,
        RunStatus::Interrupted { .. } => panic!("unexpected interruption"),
    }
}

fn rat(n: i64, d: i64) -> Number {
    Number::from_coords(Field::Rational, Rational::frac(n, d), Rational::zero())
}

/// `x + y sqrt(D)` for `D = 1 mod 4`, where `sqrt(D) = 2w - 1`.
fn with_root(d: i64, x: (i64, i64), y: (i64, i64)) -> Number {
    let field = Field::from_disc(d).unwrap();
    let (yn, yd) = y;
    let xr = Rational::frac(x.0, x.1);
    let shift = Rational::frac(yn, yd);
    let x_total = Number::from_coords(field, xr, Rational::zero())
        .sub(&Number::from_coords(field, shift, Rational::zero()))
        .unwrap();
    x_total
        .add(&Number::from_coords(
            field,
            Rational::zero(),
            Rational::frac(2 * yn, yd),
        ))
        .unwrap()
}

fn is_rotation(a: &[Number], b: &[Number]) -> bool {
    a.len() == b.len() && (0..a.len()).any(|k| a.iter().cycle().skip(k).take(a.len()).eq(b.iter()))
}

#[test]
fn criterion_01_sieve_table_reproduction() {
    let expected_bad: [u64; 10] = [1, 2, 5, 13, 40, 98, 199, 862, 1699, 4893];
    let expected_total: [u128; 10] = [
        3,
        12,
        72,
        576,
        6912,
        96768,
        1741824,
        34836480,
        836075520,
        25082265600,
    ];
    let t = Instant::now();
    let small = sieve_stats(&Field::Rational, 3, 7).unwrap();
    let t7 = t.elapsed();
    let t = Instant::now();
    let rows = sieve_stats(&Field::Rational, 3, 10).unwrap();
    let t10 = t.elapsed();
    assert_eq!(small[..], rows[..7]);
    let bad: Vec<u64> = rows.iter().map(|r| r.bad).collect();
    let total: Vec<u128> = rows.iter().map(|r| r.total).collect();
    let pass = bad == expected_bad
        && total == expected_total
        && t7 < Duration::from_secs(10)
        && t10 < TEN_MINUTES;
    check(
        1,
        "sieve table",
        pass,
        format!("bad {bad:?} (expected {expected_bad:?}), totals match: {}, N<=7 in {t7:?}, N=10 in {t10:?}",
            total == expected_total),
    );
}

#[test]
fn criterion_02_rational_desk_scale() {
    let t = Instant::now();
    let r = complete(&SearchConfig::new(0, 10_000));
    let dt = t.elapsed();
    let c = &r.summary.counts;
    let confirmed_ok = r.records_with("Confirmed").all(|rec| match &rec.verdict {
        Verdict::Confirmed { periods } => periods.iter().all(|&p| p <= 3),
        _ => false,
    });
    let pass = c.counterexample == 0
        && c.unresolved == 0
        && c.flagged == 0
        && confirmed_ok
        && r.summary.certified_periods.iter().all(|&p| p <= 3)
        && dt < TEN_MINUTES;
    check(
        2,
        "Q with B=10^4, M=3",
        pass,
        format!(
            "{} parameters, {} confirmed, {} counterexamples, {} unresolved, {dt:?}",
            c.total(),
            c.confirmed,
            c.counterexample,
            c.unresolved
        ),
    );
}

/// Runs every fundamental discriminant with `|D| <= 40` at `B = 100`.
fn quadratic_sweep(max_period: u64) -> Vec<(i64, Report)> {
    fundamental_discriminants(-40, 40)
        .into_iter()
        .map(|d| {
            let mut cfg = SearchConfig::new(d, 100);
            cfg.max_period = max_period;
            (d, complete(&cfg))
        })
        .collect()
}

fn period_six_cases(reports: &[(i64, Report)]) -> Vec<(i64, String)> {
    reports
        .iter()
        .flat_map(|(d, r)| {
            r.records
                .iter()
                .filter(|rec| rec.certified_cycles.iter().any(|c| c.period == 6))
                .map(move |rec| (*d, rec.c.clone()))
        })
        .collect()
}

#[test]
fn criterion_03_quadratic_desk_scale() {
    let t = Instant::now();
    let reports = quadratic_sweep(6);
    let dt = t.elapsed();
    let counterexamples: u64 = reports
        .iter()
        .map(|(_, r)| r.summary.counts.counterexample)
        .sum();
    let unresolved: u64 = reports
        .iter()
        .map(|(_, r)| r.summary.counts.unresolved)
        .sum();
    let (_, r33) = reports
        .iter()
        .find(|(d, _)| *d == 33)
        .expect("D = 33 is in range");
    let six = r33
        .records
        .iter()
        .any(|rec| rec.c == "-71/48" && rec.verdict == Verdict::Confirmed { periods: vec![6] });
    check(
        3,
        "|D| <= 40 with B=100, M=6",
        counterexamples == 0 && six,
        format!(
            "{} fields, {counterexamples} counterexamples, {unresolved} unresolved, -71/48 confirmed with period 6: {six}, {dt:?}",
            reports.len()
        ),
    );
}

#[test]
fn criterion_04_known_cycle_certificates() {
    let three = find_periodic_points(&rat(-29, 16), DEFAULT_CANDIDATE_CAP).unwrap();
    let want3 = [rat(-1, 4), rat(-7, 4), rat(5, 4)];
    let ok3 =
        three.verify() && three.cycles().len() == 1 && is_rotation(&three.cycles()[0], &want3);

    let field = Field::from_disc(33).unwrap();
    let c = Number::from_coords(field, Rational::frac(-71, 48), Rational::zero());
    let six = find_periodic_points(&c, DEFAULT_CANDIDATE_CAP).unwrap();
    let want6 = [
        with_root(33, (-1, 4), (1, 6)),
        with_root(33, (-1, 2), (-1, 12)),
        with_root(33, (-1, 1), (1, 12)),
        with_root(33, (-1, 4), (-1, 6)),
        with_root(33, (-1, 2), (1, 12)),
        with_root(33, (-1, 1), (-1, 12)),
    ];
    let orbit_ok = want6
        .iter()
        .zip(want6.iter().cycle().skip(1))
        .all(|(a, b)| a.step(&c).unwrap() == *b);
    let ok6 = six.verify()
        && orbit_ok
        && six.cycles().len() == 1
        && is_rotation(&six.cycles()[0], &want6);
    check(
        4,
        "known cycles",
        ok3 && ok6,
        format!("3-cycle for -29/16: {ok3}, 6-cycle for -71/48 over Q(sqrt 33): {ok6}"),
    );
}

#[test]
fn criterion_05_preperiodic_counts() {
    let over_q = preperiodic_closure(&rat(-29, 16), DEFAULT_CANDIDATE_CAP).unwrap();
    let n_q = over_q.preperiodic_count_with_infinity().unwrap();
    let field = Field::from_disc(17).unwrap();
    let c = Number::from_coords(field, Rational::frac(-29, 16), Rational::zero());
    let over_k = preperiodic_closure(&c, DEFAULT_CANDIDATE_CAP).unwrap();
    let n_k = over_k.preperiodic_count_with_infinity().unwrap();
    check(
        5,
        "preperiodic counts",
        n_q == 9 && n_k >= 15,
        format!("{n_q} points over Q (want 9), {n_k} over Q(sqrt 17) (want at least 15)"),
    );
}

fn first_primes(n: usize) -> Vec<u64> {
    (2u64..)
        .filter(|&p| (2..p).take_while(|d| d * d <= p).all(|d| p % d != 0))
        .take(n)
        .collect()
}

#[test]
fn criterion_06_sieve_sharpness() {
    let field = Field::from_disc(-3).unwrap();
    let c = Number::from_coords(field, Rational::frac(1, 4), Rational::frac(1, 4));
    let mut good = 0;
    let mut all_contain = true;
    for p in first_primes(25) {
        for prime in primes_above(&field, p).unwrap() {
            let rf = ResidueField::new(&field, prime);
            if let ProjPoint::Affine(x) = reduce_c(&c, &prime) {
                good += 1;
                let pp = possible_periods(&rf, ProjPoint::Affine(x));
                all_contain &= pp.contains(1) && pp.contains(6);
            }
        }
    }
    let cert = find_periodic_points(&c, DEFAULT_CANDIDATE_CAP).unwrap();
    let only_one = cert.verify() && cert.periods() == BTreeSet::from([1]);
    check(
        6,
        "sieve sharpness for (1+w)/4",
        all_contain && only_one && good > 0,
        format!("{{1,6}} inside the possible periods at all {good} good primes: {all_contain}, oracle periods {:?}", cert.periods()),
    );
}

/// Random square-denominator rational with height at most `bound`.
fn random_square_denominator(rng: &mut ChaCha8Rng, bound: i64) -> (i64, i64) {
    loop {
        let k = rng.gen_range(1..=((bound as f64).sqrt() as i64));
        let q = k * k;
        let p = rng.gen_range(-bound..=bound);
        if p.gcd(&q) == 1 {
            return (p, q);
        }
    }
}

/// Counts `(checked, exceptions)` of oracle periods against the possible
/// periods at the first five primes of good reduction.
fn soundness_at_good_primes(c: &Number) -> (usize, usize) {
    let cert = find_periodic_points(c, DEFAULT_CANDIDATE_CAP).unwrap();
    let periods = cert.periods();
    let mut checked = 0;
    let mut bad = 0;
    let mut primes = 0;
    for p in first_primes(40) {
        if primes == 5 {
            break;
        }
        let prime = PrimeDesc::rational(p as u32);
        let x = reduce_c(c, &prime);
        if x == ProjPoint::Infinity {
            continue;
        }
        primes += 1;
        let pp = possible_periods(&ResidueField::new(&Field::Rational, prime), x);
        for &n in &periods {
            checked += 1;
            if !pp.contains(n) {
                bad += 1;
            }
        }
    }
    assert_eq!(primes, 5);
    (checked, bad)
}

#[test]
fn criterion_07_soundness_property() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut checked, mut exceptions, mut with_points) = (0, 0, 0);
    for _ in 0..1000 {
        let (p, q) = random_square_denominator(&mut rng, 500);
        let c = rat(p, q);
        let (n, bad) = soundness_at_good_primes(&c);
        checked += n;
        exceptions += bad;
        with_points += usize::from(n > 0);
    }
    // parameters known to carry cycles of length 1, 2 and 3
    for t in 1..=40i64 {
        for c in [rat(1 - t * t, 4), rat(-3 - t * t, 4), {
            let num =
                -(t.pow(6) + 2 * t.pow(5) + 4 * t.pow(4) + 8 * t.pow(3) + 9 * t * t + 4 * t + 1);
            let den = 4 * t * t * (t + 1) * (t + 1);
            let g = num.gcd(&den);
            rat(num / g, den / g)
        }] {
            let (n, bad) = soundness_at_good_primes(&c);
            checked += n;
            exceptions += bad;
            with_points += usize::from(n > 0);
        }
    }
    check(
        7,
        "soundness of possible periods",
        exceptions == 0 && with_points > 120,
        format!("{checked} period checks over {with_points} parameters with periodic points, {exceptions} exceptions"),
    );
}

/// Rationals of height at most `b` with a square denominator, counted from
/// scratch.
fn brute_square_denominator_count(b: i64) -> u64 {
    let mut n = 0;
    for q in 1..=b {
        let r = (q as f64).sqrt().round() as i64;
        if r * r != q {
            continue;
        }
        n += (-b..=b).filter(|p| p.gcd(&q) == 1).count() as u64;
    }
    n
}

#[test]
fn criterion_08_survivor_counts() {
    let mut lines = Vec::new();
    let mut pass = true;
    for b in [100i64, 1000] {
        let got = enumerate_c(&Field::Rational, b, true).count() as u64;
        let want = brute_square_denominator_count(b);
        let ratio = got as f64 / (b as f64).powf(1.5);
        pass &= got == want && (1.0..=3.0).contains(&ratio);
        lines.push(format!(
            "B={b}: {got} (brute force {want}), ratio {ratio:.4}"
        ));
    }
    check(8, "survivor counts", pass, lines.join("; "));
}

#[test]
fn criterion_09_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let base = SearchConfig::new(-3, 40);
    let mut outputs = Vec::new();
    for workers in [1, 4, 8] {
        let mut cfg = base.clone();
        cfg.workers = workers;
        cfg.report = Some(dir.path().join(format!("w{workers}.jsonl")));
        complete(&cfg);
        outputs.push(std::fs::read(cfg.report.as_ref().unwrap()).unwrap());
    }
    let mut cfg = base.clone();
    cfg.checkpoint = Some(dir.path().join("ck.jsonl"));
    cfg.report = Some(dir.path().join("resumed.jsonl"));
    cfg.stop_after_blocks = Some(20);
    let first = run_verification(&cfg).unwrap();
    cfg.stop_after_blocks = None;
    cfg.workers = 4;
    complete(&cfg);
    outputs.push(std::fs::read(cfg.report.as_ref().unwrap()).unwrap());
    let interrupted = first == RunStatus::Interrupted { blocks_done: 20 };
    let identical = outputs.windows(2).all(|w| w[0] == w[1]);
    check(
        9,
        "determinism",
        interrupted && identical && !outputs[0].is_empty(),
        format!(
            "1/4/8 workers and an interrupted run resumed at 20 of 40 blocks give {} reports of {} bytes, identical: {identical}",
            outputs.len(),
            outputs[0].len()
        ),
    );
}

#[test]
fn criterion_10_no_period_five() {
    let rational = {
        let mut cfg = SearchConfig::new(0, 10_000);
        cfg.max_period = 7;
        complete(&cfg)
    };
    let quadratic = quadratic_sweep(7);
    let mut periods: BTreeSet<u64> = rational.summary.certified_periods.clone();
    for (_, r) in &quadratic {
        periods.extend(&r.summary.certified_periods);
    }
    let counterexamples = rational.summary.counts.counterexample
        + quadratic
            .iter()
            .map(|(_, r)| r.summary.counts.counterexample)
            .sum::<u64>();
    let six = period_six_cases(&quadratic);
    let pass = !periods.contains(&5)
        && counterexamples == 0
        && six == vec![(33, "-71/48".to_string())]
        && rational.summary.certified_periods.iter().all(|&p| p != 6);
    check(
        10,
        "no period 5 with M=7",
        pass,
        format!("certified periods {periods:?}, period-6 cases {six:?}"),
    );
}
