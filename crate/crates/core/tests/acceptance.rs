//! Acceptance run: one line per criterion, nonzero exit if any fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wreath_core::oracle::{faithfulness_oracle, induced_value_on_a, random_irreducible_tuple};
use wreath_core::search::random_faithful_tuple;
use wreath_core::{
    count_distinct, decompose, merge_reports, run_search, verify_theorem, CyclotomicInt,
    Decomposition, DistinctCounter, Oracle, OrbitRep, Prime, SearchConfig, SearchReport, Shard,
    Tuple,
};

type Outcome = Result<String, String>;

fn prime(n: u64) -> Prime {
    Prime::new(n).unwrap()
}

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn degree_ok(d: &Decomposition) -> bool {
    let p = d.p();
    let sq = (p.get() as u64).pow(2);
    d.constituents().iter().map(|(id, m)| m * id.degree(p)).sum::<u64>() == sq && d.degree_total() == sq
}

fn all_non_constant_reps(p: Prime) -> Vec<OrbitRep> {
    let n = p.as_usize();
    let m = p.get() as u64;
    let mut reps: Vec<OrbitRep> = (0..p.base_order().unwrap())
        .map(|mut code| {
            let e = (0..n)
                .map(|_| {
                    let r = (code % m) as u32;
                    code /= m;
                    r
                })
                .collect();
            Tuple::new(p, e).unwrap().canonical_rotation()
        })
        .filter(|r| !r.is_constant())
        .collect();
    reps.sort();
    reps.dedup();
    reps
}

struct Shared {
    decompositions: Vec<Decomposition>,
}

fn theorem_counts(shared: &mut Shared) -> Outcome {
    let bin = env!("CARGO_BIN_EXE_wreath");
    let mut notes = Vec::new();
    for (n, want) in [(5u64, 4usize), (7, 6), (11, 10), (13, 12)] {
        let start = Instant::now();
        let r = verify_theorem(prime(n)).map_err(|e| e.to_string())?;
        let lib_time = start.elapsed();
        check(r.passed && r.count_distinct == want, format!("p={n}: count {}", r.count_distinct))?;
        check(r.phi_faithful && r.psi_faithful, format!("p={n}: pair not faithful"))?;
        shared.decompositions.push(r.decomposition.clone());

        let start = Instant::now();
        let out = Command::new(bin)
            .args(["verify-theorem", "--p", &n.to_string()])
            .output()
            .map_err(|e| e.to_string())?;
        let cli_time = start.elapsed();
        check(out.status.code() == Some(0), format!("p={n}: cli exit {:?}", out.status.code()))?;
        check(
            lib_time < Duration::from_secs(1) && cli_time < Duration::from_secs(1),
            format!("p={n}: {lib_time:?} / {cli_time:?}"),
        )?;
        notes.push(format!("p={n}:{want} ({:.1}ms)", cli_time.as_secs_f64() * 1e3));
    }
    Ok(notes.join(" "))
}

fn theorem_classes_p5() -> Outcome {
    let p = prime(5);
    let r = verify_theorem(p).map_err(|e| e.to_string())?;
    let expected = [
        [2, 1, 0, 0, 0],
        [1, 2, 0, 0, 0],
        [1, 1, 1, 0, 0],
        [1, 1, 0, 1, 0],
        [1, 1, 0, 0, 1],
    ];
    check(r.listed_classes.len() == 5, "five listed sums")?;
    for (k, (e, cls)) in expected.iter().zip(&r.listed_classes).enumerate() {
        let t = Tuple::new(p, e.to_vec()).unwrap();
        check(r.listed_sums[k] == t, format!("sum {k} is {}", r.listed_sums[k]))?;
        check(t.canonical_rotation() == *cls, format!("class {k} is {cls}"))?;
    }
    check(r.collisions == vec![(2, 4)], format!("collisions {:?}", r.collisions))?;
    let distinct: std::collections::BTreeSet<_> = r.listed_classes.iter().collect();
    check(distinct.len() == 4, "four distinct classes")?;
    Ok("classes match up to rotation, single collision (3rd, 5th)".into())
}

fn oracle_equivalence(shared: &mut Shared) -> Outcome {
    let start = Instant::now();
    let oracle = Oracle::default();
    let mut compared = 0;
    let mut compare = |a: &OrbitRep, b: &OrbitRep, shared: &mut Shared| -> Result<(), String> {
        let fast = decompose(a, b).map_err(|e| e.to_string())?;
        let slow = oracle.oracle_decompose::<i64>(a, b).map_err(|e| e.to_string())?;
        check(fast == slow, format!("disagreement at {a} x {b}"))?;
        shared.decompositions.push(fast);
        compared += 1;
        Ok(())
    };
    let reps2 = all_non_constant_reps(prime(2));
    for a in &reps2 {
        for b in &reps2 {
            compare(a, b, shared)?;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for (n, trials) in [(3u64, 200), (5, 50)] {
        for _ in 0..trials {
            let a = random_irreducible_tuple(prime(n), &mut rng).canonical_rotation();
            let b = random_irreducible_tuple(prime(n), &mut rng).canonical_rotation();
            compare(&a, &b, shared)?;
        }
    }
    let t = start.elapsed();
    check(t < Duration::from_secs(120), format!("took {t:?}"))?;
    Ok(format!("{compared} pairs agree (p=2 all, p=3 x200, p=5 x50) in {:.2}s", t.as_secs_f64()))
}

fn degree_conservation(shared: &Shared) -> Outcome {
    let earlier = shared.decompositions.len();
    for (i, d) in shared.decompositions.iter().enumerate() {
        check(degree_ok(d), format!("earlier decomposition {i}"))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    for n in [3u64, 5, 7] {
        for _ in 0..1000 {
            let a = random_irreducible_tuple(prime(n), &mut rng).canonical_rotation();
            let b = random_irreducible_tuple(prime(n), &mut rng).canonical_rotation();
            let d = decompose(&a, &b).map_err(|e| e.to_string())?;
            check(degree_ok(&d), format!("{a} x {b}"))?;
        }
    }
    Ok(format!("{} decompositions sum to p^2", earlier + 3000))
}

fn central_values() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    for n in [3u64, 5, 7] {
        let p = prime(n);
        for _ in 0..100 {
            let rep = random_irreducible_tuple(p, &mut rng).canonical_rotation();
            let s = rep.tuple().sum() as u64;
            for x in 0..n {
                let got = induced_value_on_a::<i64>(&rep, &Tuple::constant(p, x as u32))
                    .map_err(|e| e.to_string())?;
                let want = CyclotomicInt::<i64>::from_integer(p, n as i64)
                    .and_then(|c| c.try_mul(&CyclotomicInt::zeta_pow(p, s * x)))
                    .map_err(|e| e.to_string())?;
                check(got == want, format!("{rep} at x={x}"))?;
            }
        }
    }
    let mut classes = 0;
    for n in [3u64, 5] {
        for rep in all_non_constant_reps(prime(n)) {
            let oracle = faithfulness_oracle(&rep).map_err(|e| e.to_string())?;
            let rule = rep.tuple().is_faithful_inducing().map_err(|e| e.to_string())?;
            check(oracle == rule, format!("faithfulness of {rep}"))?;
            classes += 1;
        }
    }
    Ok(format!("300 reps on the centre, faithfulness rule on all {classes} classes at p=3,5"))
}

fn exhaustive_p5() -> Outcome {
    let start = Instant::now();
    let r = run_search(&SearchConfig::exhaustive(prime(5))).map_err(|e| e.to_string())?;
    let t = start.elapsed();
    check(t < Duration::from_secs(60), format!("took {t:?}"))?;
    for h in &r.histogram {
        check(h.count == 1 || h.count >= 3, format!("count {} observed", h.count))?;
    }
    check(r.bound_check.holds, "bound check")?;
    check(r.gap_check.empty, format!("gap counts {:?}", r.gap_check.counts_in_gap))?;
    let w = r.witness(4).ok_or("count 4 missing")?;
    let phi = Tuple::parse("0,0,0,0,1").unwrap().canonical_rotation();
    let psi = Tuple::parse("0,0,0,1,1").unwrap().canonical_rotation();
    check(
        w.phi.canonical_rotation() == phi && w.psi.canonical_rotation() == psi,
        format!("witness {} ; {}", w.phi, w.psi),
    )?;
    let counts: Vec<String> = r.histogram.iter().map(|h| format!("{}:{}", h.count, h.frequency)).collect();
    Ok(format!("{} pairs in {:.2}s, histogram {}", r.pairs_examined, t.as_secs_f64(), counts.join(" ")))
}

fn sampled_p7() -> Outcome {
    let start = Instant::now();
    let r = run_search(&SearchConfig::sample(prime(7), 1_000_000, 42)).map_err(|e| e.to_string())?;
    let t = start.elapsed();
    check(t < Duration::from_secs(600), format!("took {t:?}"))?;
    check(r.pairs_examined == 1_000_000, "pair count")?;
    check(r.bound_check.holds, "bound check")?;
    let counts: Vec<String> = r.histogram.iter().map(|h| format!("{}:{}", h.count, h.frequency)).collect();
    let gap = if r.gap_check.empty {
        "gap (4,6) empty".to_string()
    } else {
        format!("gap witnesses at {:?}", r.gap_check.counts_in_gap)
    };
    Ok(format!("{gap}; histogram {} in {:.1}s", counts.join(" "), t.as_secs_f64()))
}

fn shards_and_determinism() -> Outcome {
    let p = prime(5);
    let single = run_search(&SearchConfig::exhaustive(p)).map_err(|e| e.to_string())?;
    let parts: Vec<SearchReport> = (0..8)
        .map(|i| run_search(&SearchConfig::exhaustive(p).with_shard(Shard::new(i, 8).unwrap())))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let merged = merge_reports(&parts).map_err(|e| e.to_string())?;
    check(merged.histogram == single.histogram, "merged histogram differs")?;
    check(merged.weighted_histogram == single.weighted_histogram, "merged weighted histogram differs")?;

    let cfg = SearchConfig::sample(prime(7), 20_000, 42);
    let a = run_search(&cfg).and_then(|r| r.machine_json()).map_err(|e| e.to_string())?;
    let b = run_search(&cfg).and_then(|r| r.machine_json()).map_err(|e| e.to_string())?;
    check(a == b, "sampled reports differ")?;
    Ok(format!("8 shards merge to the single run; repeated sample identical ({} bytes)", a.len()))
}

fn symmetry_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(90);
    for n in [3u64, 5, 7] {
        let p = prime(n);
        let mut counter = DistinctCounter::new(p);
        for _ in 0..500 {
            let a = random_faithful_tuple(p, &mut rng);
            let b = random_faithful_tuple(p, &mut rng);
            let s = rng.gen_range(0..n as usize);
            let k = rng.gen_range(1..n);
            let base = count_distinct(&a.canonical_rotation(), &b.canonical_rotation())
                .map_err(|e| e.to_string())?;
            let shifted = counter.count(a.rotate(s).entries(), b.rotate(s).entries());
            let (a_k, b_k) = (a.scale(k), b.scale(k));
            let (a_k, b_k) = (a_k.map_err(|e| e.to_string())?, b_k.map_err(|e| e.to_string())?);
            let scaled = counter.count(a_k.entries(), b_k.entries());
            let swapped = counter.count(b.entries(), a.entries());
            let by_decomposition = decompose(&b_k.rotate(s).canonical_rotation(), &a_k.rotate(s).canonical_rotation())
                .map_err(|e| e.to_string())?
                .distinct_count();
            check(
                [shifted, scaled, swapped, by_decomposition] == [base; 4],
                format!("p={n}: {a} ; {b} under shift {s} / scale {k} / swap"),
            )?;
        }
    }
    Ok("1500 pairs invariant under shift, scale and swap".into())
}

fn main() -> ExitCode {
    let mut shared = Shared { decompositions: Vec::new() };
    let results: Vec<(&str, Outcome)> = vec![
        ("theorem counts p-1 for p=5,7,11,13", theorem_counts(&mut shared)),
        ("listed classes at p=5", theorem_classes_p5()),
        ("oracle equivalence", oracle_equivalence(&mut shared)),
        ("degree conservation", degree_conservation(&shared)),
        ("central values and faithfulness", central_values()),
        ("exhaustive search p=5", exhaustive_p5()),
        ("sampled search p=7", sampled_p7()),
        ("shard merge and determinism", shards_and_determinism()),
        ("count invariance under symmetries", symmetry_invariance()),
    ];

    let mut failed = 0;
    for (i, (name, outcome)) in results.iter().enumerate() {
        match outcome {
            Ok(note) => println!("[PASS] criterion {}: {name}: {note}", i + 1),
            Err(why) => {
                failed += 1;
                println!("[FAIL] criterion {}: {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
