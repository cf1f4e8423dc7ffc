//! Acceptance checks, one line per criterion. Runs without the libtest harness
//! so every line is printed; exits non-zero if any criterion fails.

use std::collections::BTreeSet;
use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use yardstack::bench::{rep_seed, suite_cases, BenchCase, Suite, COMPARISON_REPS};
use yardstack::constraints::{validate_layout, ConstraintId};
use yardstack::fitness::{layout_fitness, rehandle_count, retrieval_oracle, FitnessMode};
use yardstack::ga::{self, crossover, mutate, random_feasible_layout, GaConfig, Individual, RunResult};
use yardstack::io::{table_iv_preset, DEFAULT_DATE_RANGE};
use yardstack::lifo::lifo_allocate;
use yardstack::{Container, ContainerType, Coord, Instance, Layout, YardConfig};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn run_seeded(case: &BenchCase, seed: u64) -> RunResult {
    let config = GaConfig {
        seed,
        ..case.ga.clone()
    };
    ga::run(&case.instance, &config).expect("bench instances are satisfiable")
}

fn non_increasing(history: &[f64]) -> bool {
    history.windows(2).all(|w| w[1] <= w[0])
}

fn feasibility_closure() -> Outcome {
    let inst = table_iv_preset(5, DEFAULT_DATE_RANGE, 0).map_err(|e| e.to_string())?;
    let config = GaConfig {
        p_cross: 1.0,
        p_mut: 1.0,
        ..GaConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let fresh = |rng: &mut ChaCha8Rng| {
        let layout = random_feasible_layout(&inst, rng).expect("preset 5 is satisfiable");
        Individual::new(layout, &inst, config.mode).expect("complete layout")
    };
    let mut pool: Vec<Individual> = (0..10).map(|_| fresh(&mut rng)).collect();
    let is_clean = |layout: &Layout| validate_layout(layout, &inst).expect("same instance").is_empty();
    let mut drawn = pool.len();
    let mut bad = pool.iter().filter(|i| !is_clean(i.layout())).count();
    let mut i = 0usize;
    while drawn < 10_000 {
        let slot = i % pool.len();
        let child = match i % 3 {
            0 => fresh(&mut rng),
            1 => crossover(&pool[slot], &pool[(slot * 7 + 3) % pool.len()], &inst, &config, &mut rng),
            _ => mutate(pool[slot].clone(), &inst, &config, &mut rng),
        };
        drawn += 1;
        bad += usize::from(!is_clean(child.layout()));
        pool[slot] = child;
        i += 1;
    }
    ensure(bad == 0, || format!("{bad} of {drawn} layouts had violations"))?;
    Ok(format!("{drawn} layouts from generation, crossover and mutation, all clean"))
}

fn oracle_equivalence() -> Outcome {
    let cfg = YardConfig::new(2, 2, 3, 1, 1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut layouts = 0;
    let mut containers = 0;
    let mut nonzero = 0;
    let mut attempt = 0u64;
    while layouts < 1000 {
        attempt += 1;
        let n = 6 + (attempt % 13) as u32;
        let spec: Vec<Container> = (1..=n)
            .map(|id| {
                let t = ContainerType::ALL[((id as u64 * 5 + attempt * 3) % 6) as usize];
                let t = if t == ContainerType::Reefer && id > 8 { ContainerType::Dry } else { t };
                Container::new(id, t, 1 + ((id as u64 * 7 + attempt * 11) % 9) as u32)
            })
            .collect();
        let inst = Instance::new(cfg, spec).unwrap();
        let Ok(layout) = random_feasible_layout(&inst, &mut rng) else {
            continue;
        };
        let oracle = retrieval_oracle(&layout, &inst).map_err(|e| e.to_string())?;
        for c in inst.containers() {
            let blocking = rehandle_count(&layout, c, FitnessMode::Blocking).unwrap();
            ensure(oracle[&c.id] == blocking, || {
                format!("container {} oracle {} blocking {blocking}", c.id, oracle[&c.id])
            })?;
            containers += 1;
            nonzero += usize::from(blocking > 0);
        }
        layouts += 1;
    }
    ensure(nonzero > 0, || "no layout had any rehandle".into())?;
    Ok(format!("{layouts} layouts, {containers} containers, {nonzero} with rehandles"))
}

fn type_mix_zero() -> (Outcome, Vec<Vec<f64>>) {
    let cases = suite_cases(Suite::TypeInfluence, 0).expect("type-mix cases build");
    let mut histories = Vec::new();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for case in &cases {
        let finals: Vec<f64> = (0..5)
            .map(|r| {
                let run = run_seeded(case, rep_seed(0, r));
                histories.push(run.history.clone());
                run.final_fitness()
            })
            .collect();
        let zeros = finals.iter().filter(|&&f| f == 0.0).count();
        rows.push(format!("N_T={} {zeros}/5", case.instance.type_variety()));
        if zeros == 0 {
            failures.push(format!("N_T={} best {:?}", case.instance.type_variety(), finals));
        }
    }
    let outcome = if failures.is_empty() {
        Ok(format!("zero final fitness reached: {}", rows.join(", ")))
    } else {
        Err(failures.join("; "))
    };
    (outcome, histories)
}

fn lifo_dominance() -> (Outcome, Vec<Vec<f64>>) {
    let cases = suite_cases(Suite::LifoComparison, 0).expect("comparison cases build");
    let mut histories = Vec::new();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (i, case) in cases.iter().enumerate() {
        let n = i + 1;
        let best = (0..COMPARISON_REPS)
            .map(|r| {
                let run = run_seeded(case, rep_seed(0, r));
                histories.push(run.history.clone());
                run.final_fitness()
            })
            .fold(f64::INFINITY, f64::min);
        let lifo = lifo_allocate(&case.instance)
            .map(|l| layout_fitness(&l, &case.instance, case.ga.mode).unwrap().value());
        match lifo {
            Ok(lifo) => {
                rows.push(format!("#{n} GA {best:.4} vs LIFO {lifo:.4}"));
                let dominated = if lifo > 0.0 { best < lifo } else { best <= lifo };
                if !dominated {
                    failures.push(format!("#{n}: GA {best} not below LIFO {lifo}"));
                }
            }
            Err(e) => {
                rows.push(format!("#{n} GA {best:.4} vs LIFO none"));
                failures.push(format!("#{n}: LIFO produced no layout ({e}); GA best {best:.4}"));
            }
        }
        if n <= 3 && best != 0.0 {
            failures.push(format!("#{n}: best-of-15 GA fitness {best} is not 0"));
        }
    }
    let outcome = if failures.is_empty() {
        Ok(rows.join(", "))
    } else {
        Err(format!("{} [{}]", failures.join("; "), rows.join(", ")))
    };
    (outcome, histories)
}

fn elitism(histories: &[Vec<f64>]) -> Outcome {
    let bad = histories.iter().filter(|h| !non_increasing(h)).count();
    ensure(bad == 0, || format!("{bad} of {} runs had a rising best fitness", histories.len()))?;
    Ok(format!("{} runs, best fitness never rose", histories.len()))
}

fn cli(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_yardstack"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("yardstack {}: {}", args.join(" "), String::from_utf8_lossy(&out.stderr)));
    }
    Ok(out.stdout)
}

fn csv_without_elapsed(csv: &[u8]) -> Vec<String> {
    String::from_utf8_lossy(csv)
        .lines()
        .map(|l| {
            let mut cols: Vec<&str> = l.split(',').collect();
            cols.remove(7);
            cols.join(",")
        })
        .collect()
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let p = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    cli(&["generate", "--preset", "4", "--seed", "5", "--out", &p("i.json")])?;
    for k in ["a", "b"] {
        cli(&["solve", &p("i.json"), "--seed", "7", "--out", &p(&format!("{k}.json"))])?;
    }
    let a = std::fs::read(p("a.json")).map_err(|e| e.to_string())?;
    let b = std::fs::read(p("b.json")).map_err(|e| e.to_string())?;
    ensure(a == b, || "solve plans differ".into())?;

    let mut rows = 0;
    for suite in ["lifo-comparison", "stall-influence"] {
        let args = ["bench", suite, "--reps", "2", "--seed", "9"];
        let first = csv_without_elapsed(&cli(&args)?);
        let second = csv_without_elapsed(&cli(&args)?);
        ensure(first == second, || format!("{suite} CSV rows differ"))?;
        rows += first.len() - 1;
    }
    Ok(format!("solve plans byte-identical; {rows} bench rows identical"))
}

fn mean_final(case: &BenchCase) -> f64 {
    (0..5).map(|r| run_seeded(case, rep_seed(0, r)).final_fitness()).sum::<f64>() / 5.0
}

fn trends() -> Outcome {
    let stall = suite_cases(Suite::StallInfluence, 0).expect("stall cases build");
    let by_window = |w: u32| stall.iter().find(|c| c.ga.stall_window == w).expect("window in sweep");
    let (s25, s150) = (mean_final(by_window(25)), mean_final(by_window(150)));

    let pops = suite_cases(Suite::PopsizeInfluence, 0).expect("population cases build");
    let by_pop = |n: usize| pops.iter().find(|c| c.ga.pop_size == n).expect("size in sweep");
    let (p20, p100) = (mean_final(by_pop(20)), mean_final(by_pop(100)));

    let msg = format!("stall 150: {s150:.4} vs 25: {s25:.4}; pop 100: {p100:.4} vs 20: {p20:.4}");
    ensure(s150 <= s25 && p100 <= p20, || msg.clone())?;
    Ok(msg)
}

fn violated(cfg: YardConfig, cells: &[(ContainerType, Coord)]) -> BTreeSet<ConstraintId> {
    let mut layout = Layout::new(cfg).unwrap();
    let mut containers = Vec::new();
    for (i, &(t, at)) in cells.iter().enumerate() {
        let c = Container::new(i as u32 + 1, t, 1);
        layout.place(c, at).unwrap();
        containers.push(c);
    }
    let inst = Instance::new_unchecked(cfg, containers).unwrap();
    validate_layout(&layout, &inst).unwrap().into_iter().map(|v| v.constraint).collect()
}

fn constraint_matrix() -> Outcome {
    use ConstraintId as R;
    use ContainerType::*;
    let at = |x, y, z, j| Coord::new(x, y, z, j);
    let row = YardConfig::new(2, 1, 2, 1, 1).unwrap();
    type Case = (&'static str, Vec<(ContainerType, Coord)>, Vec<ConstraintId>);
    let cases: Vec<Case> = vec![
        ("tier above a sparser tier", vec![(Dry, at(1, 1, 2, 2))], vec![R::FloorMonotone, R::Support]),
        (
            "floating container",
            vec![(Dry, at(1, 1, 1, 2)), (Dry, at(2, 1, 2, 2))],
            vec![R::Support],
        ),
        ("load on open-top", vec![(OpenTop, at(1, 1, 1, 2)), (Dry, at(1, 1, 2, 2))], vec![R::OpenTop]),
        ("load on open-side", vec![(OpenSide, at(1, 1, 1, 2)), (Dry, at(1, 1, 2, 2))], vec![R::OpenSide]),
        ("open-side blocked sideways", vec![(OpenSide, at(1, 1, 1, 2)), (Dry, at(2, 1, 1, 2))], vec![R::OpenSide]),
        ("full on empty", vec![(Empty, at(1, 1, 1, 2)), (Dry, at(1, 1, 2, 2))], vec![R::EmptyUnderFull]),
        ("dry on tank", vec![(Tank, at(1, 1, 1, 2)), (Dry, at(1, 1, 2, 2))], vec![R::TankStack]),
        ("reefer in a regular block", vec![(Reefer, at(1, 1, 1, 2))], vec![R::ReeferBlock]),
        ("empty on empty", vec![(Empty, at(1, 1, 1, 2)), (Empty, at(1, 1, 2, 2))], vec![]),
        ("tank on tank", vec![(Tank, at(1, 1, 1, 2)), (Tank, at(1, 1, 2, 2))], vec![]),
        ("reefer in a powered block", vec![(Reefer, at(1, 1, 1, 1)), (Reefer, at(1, 1, 2, 1))], vec![]),
    ];
    let mut failures = Vec::new();
    for (name, cells, expected) in &cases {
        let got = violated(row, cells);
        let want: BTreeSet<_> = expected.iter().copied().collect();
        if got != want {
            failures.push(format!("{name}: expected {want:?}, got {got:?}"));
        }
    }
    let covered: BTreeSet<_> = cases.iter().flat_map(|(_, _, e)| e.iter().copied()).collect();
    if covered.len() != ConstraintId::RULES.len() {
        failures.push(format!("matrix covers only {covered:?}"));
    }
    ensure(failures.is_empty(), || failures.join("; "))?;
    Ok(format!("{} cases, all seven rules isolated", cases.len()))
}

fn main() -> ExitCode {
    let started = Instant::now();
    let mut results: Vec<(u8, &str, Outcome)> = Vec::new();
    results.push((1, "feasibility closure", feasibility_closure()));
    results.push((2, "retrieval oracle equals blocking count", oracle_equivalence()));
    let (type_mix, mut histories) = type_mix_zero();
    results.push((3, "type-mix sweep reaches zero", type_mix));
    let (dominance, more) = lifo_dominance();
    histories.extend(more);
    results.push((4, "GA dominates LIFO", dominance));
    results.push((5, "elitism", elitism(&histories)));
    results.push((6, "determinism", determinism()));
    results.push((7, "stall and population trends", trends()));
    results.push((8, "constraint matrix", constraint_matrix()));

    let mut failed = 0;
    for (n, name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("criterion {n} ({name}): PASS - {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n} ({name}): FAIL - {detail}");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.1}s",
        results.len() - failed,
        started.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
