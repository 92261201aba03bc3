//! Acceptance criteria 1-9, run in order in one test so the timed criteria
//! do not compete for the CPU. Each criterion prints one PASS/FAIL line;
//! the test fails if any criterion does.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::time::{Duration, Instant};

use nesy_reasoning::cli;
use nesy_reasoning::datagen::{
    generate_dataset, read_records, verify_examples, Category, DatasetSplit, Example,
    GenerationSpec, Scenario, SplitName, TABLE2_COUNTS,
};
use nesy_reasoning::embeddings::{tokenize, EmbeddingTable};
use nesy_reasoning::logic::{
    answer, forward_chain, parse_context, parse_question, shuffle_sentences, Atom, KnowledgeBase,
    Pattern, Phrasing, Rule, Term, IS,
};
use nesy_reasoning::model::{
    check_variant, forward, gradient_fixture, ModelConfig, ModelParams, Variant, GRAD_CHECK_HIDDEN,
};
use nesy_reasoning::rng::Stream;
use nesy_reasoning::train::{emit_report, evaluate, train, Report, TrainConfig, TrainedModel};

// tolerances and sizes
const KB_COUNT: usize = 500;
const MAX_ENTITIES: usize = 4;
const MAX_RULES: usize = 8;
const ORACLE_BUDGET: Duration = Duration::from_secs(60);
const CLOSURE_PER_DEPTH: usize = 1000;
const PERMUTED_EXAMPLES: usize = 200;
const PERMUTATIONS: usize = 20;
const GRAD_PROBES: usize = 200;
const GRAD_TOLERANCE: f64 = 1e-4;
const GRAD_BUDGET: Duration = Duration::from_secs(5 * 60);
const SOFTMAX_FORWARDS: usize = 100;
const SUM_TOLERANCE: f64 = 1e-6;
const TRAIN_EXAMPLES: usize = 4000;
const EPOCHS: usize = 10;
const TARGET_ACCURACY: f64 = 0.85;
const CHANCE: f64 = 0.5;
const CHANCE_TOLERANCE: f64 = 0.05;
const TRAIN_BUDGET: Duration = Duration::from_secs(30 * 60);
const GENERATION_BUDGET: Duration = Duration::from_secs(10 * 60);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

// ---------------------------------------------------------------------------
// 1. forward chaining against an exhaustive level-by-level search

const ENTITIES: [&str; MAX_ENTITIES] = ["Anne", "Bob", "Charlie", "Dave"];
const ATTRIBUTES: [&str; 5] = ["red", "big", "kind", "cold", "round"];
const VERBS: [&str; 2] = ["likes", "sees"];

fn random_literal(rng: &mut Stream, entities: &[&str], subject: Term) -> Pattern {
    let polarity = !rng.bernoulli(0.25);
    if rng.bernoulli(0.3) {
        Pattern {
            subject,
            relation: VERBS[rng.index(VERBS.len())].to_string(),
            object: entities[rng.index(entities.len())].to_string(),
            polarity,
        }
    } else {
        Pattern {
            subject,
            relation: IS.to_string(),
            object: ATTRIBUTES[rng.index(ATTRIBUTES.len())].to_string(),
            polarity,
        }
    }
}

fn random_kb(seed: u64) -> KnowledgeBase {
    let mut rng = Stream::new(seed);
    let n_entities = 1 + rng.index(MAX_ENTITIES);
    let entities: Vec<&str> = ENTITIES[..n_entities].to_vec();
    let entity = |rng: &mut Stream| Term::Entity(entities[rng.index(entities.len())].to_string());
    let mut items = Vec::new();
    for _ in 0..1 + rng.index(5) {
        let subject = entity(&mut rng);
        let p = random_literal(&mut rng, &entities, subject);
        items.push(Rule::fact(&p.instantiate("")));
    }
    let mut previous: Option<Pattern> = None;
    for _ in 0..rng.index(MAX_RULES + 1) {
        let general = rng.bernoulli(0.6);
        let n_ante = 1 + rng.index(2);
        let mut antecedents = Vec::new();
        for k in 0..n_ante {
            let subject = if general && (k == 0 || rng.bernoulli(0.5)) {
                Term::Var
            } else {
                entity(&mut rng)
            };
            let mut lit = random_literal(&mut rng, &entities, subject);
            // chain onto the previous conclusion half the time, for depth
            if let (0, Some(p)) = (k, &previous) {
                if rng.bernoulli(0.5) {
                    lit = Pattern {
                        subject: lit.subject,
                        ..p.clone()
                    };
                }
            }
            antecedents.push(lit);
        }
        let subject = if general { Term::Var } else { entity(&mut rng) };
        let consequent = random_literal(&mut rng, &entities, subject);
        previous = Some(consequent.clone());
        items.push(Rule {
            antecedents,
            consequent,
            phrasing: Phrasing::Conditional(None),
        });
    }
    KnowledgeBase::new(items)
}

/// Minimal proof heights by breadth-first levels: level 0 holds the facts,
/// level k every consequent whose antecedents all sit at levels below k.
fn level_oracle(kb: &KnowledgeBase) -> HashMap<Atom, u32> {
    let mut universe = BTreeSet::new();
    for r in &kb.items {
        for p in r.antecedents.iter().chain([&r.consequent]) {
            if let Term::Entity(e) = &p.subject {
                universe.insert(e.clone());
            }
            if p.relation != IS {
                universe.insert(p.object.clone());
            }
        }
    }
    let mut ground: Vec<(Vec<Atom>, Atom)> = Vec::new();
    for r in kb.items.iter().filter(|r| !r.antecedents.is_empty()) {
        let uses_var = r
            .antecedents
            .iter()
            .chain([&r.consequent])
            .any(|p| p.subject == Term::Var);
        let bindings: Vec<&str> = if uses_var {
            universe.iter().map(String::as_str).collect()
        } else {
            vec![""]
        };
        for b in bindings {
            let ants = r.antecedents.iter().map(|p| p.instantiate(b)).collect();
            ground.push((ants, r.consequent.instantiate(b)));
        }
    }
    let mut known: HashMap<Atom, u32> = kb
        .items
        .iter()
        .filter(|r| r.antecedents.is_empty())
        .map(|r| (r.consequent.instantiate(""), 0))
        .collect();
    for level in 1.. {
        let frontier: Vec<Atom> = ground
            .iter()
            .filter(|(ants, c)| {
                !known.contains_key(c)
                    && ants
                        .iter()
                        .all(|a| known.get(a).is_some_and(|&d| d < level))
            })
            .map(|(_, c)| c.clone())
            .collect();
        if frontier.is_empty() {
            break;
        }
        for c in frontier {
            known.insert(c, level);
        }
    }
    known
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut disagreements = 0;
    let mut atoms = 0;
    let mut deepest = 0;
    for seed in 0..KB_COUNT as u64 {
        let kb = random_kb(seed);
        assert!(kb.entity_universe.len() <= MAX_ENTITIES && kb.rules().count() <= MAX_RULES);
        let expected = level_oracle(&kb);
        let got: HashMap<Atom, u32> = forward_chain(&kb).into_iter().collect();
        atoms += expected.len();
        deepest = deepest.max(expected.values().copied().max().unwrap_or(0));
        if got != expected {
            disagreements += 1;
        }
    }
    let t = start.elapsed();
    outcome(
        disagreements == 0 && t < ORACLE_BUDGET,
        format!(
            "{KB_COUNT} random KBs, {atoms} derived atoms (max depth {deepest}), {disagreements} disagreeing KBs, {t:.2?}"
        ),
    )
}

// ---------------------------------------------------------------------------
// 2. generated examples pass `verify`, through the command line

fn run_cli(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("nesy").chain(args.iter().copied());
    let code = cli::run_with(argv, &mut out, &mut err);
    let mut text = String::from_utf8_lossy(&out).into_owned();
    text.push_str(&String::from_utf8_lossy(&err));
    (code, text)
}

fn criterion_2(dir: &std::path::Path) -> Outcome {
    let path = dir.join("closure.jsonl");
    let path_s = path.to_str().unwrap();
    // --counts is pairs per depth: one true and one false example each
    let pairs = (CLOSURE_PER_DEPTH / 2).to_string();
    let (code, text) = run_cli(&[
        "generate", "--depths", "2,3,4,5", "--counts", &pairs, "--seed", "0", "--out", path_s,
    ]);
    if code != 0 {
        return outcome(false, format!("generate exited {code}: {text}"));
    }
    let split = read_records(&path, SplitName::Train).unwrap();
    let mut per_depth: BTreeMap<u32, usize> = BTreeMap::new();
    for e in &split.examples {
        *per_depth.entry(e.depth).or_default() += 1;
    }
    let counts_ok = per_depth.len() == 4 && per_depth.values().all(|&n| n == CLOSURE_PER_DEPTH);
    let r = verify_examples(&split.examples);
    let (vcode, vtext) = run_cli(&["verify", "--in", path_s]);
    outcome(
        counts_ok && r.mismatches() == 0 && r.depth_checked > 0 && vcode == 0,
        format!(
            "{} examples {per_depth:?}, {} label / {} depth mismatches over {} depth-checked; cli: {}",
            r.total,
            r.label_mismatches,
            r.depth_mismatches,
            r.depth_checked,
            vtext.trim()
        ),
    )
}

// ---------------------------------------------------------------------------
// 3. oracle verdicts ignore sentence order

fn criterion_3() -> Outcome {
    let spec = GenerationSpec::single_split(
        Scenario::all().to_vec(),
        &[2, 3, 4, 5],
        SplitName::Test,
        PERMUTED_EXAMPLES / 4,
        3,
    );
    let split = generate_dataset(&spec)
        .unwrap()
        .remove(&SplitName::Test)
        .unwrap();
    let verdict = |e: &Example| {
        let kb = parse_context(&e.context).unwrap();
        answer(&kb, &parse_question(&e.question).unwrap()).unwrap()
    };
    let mut changed = 0;
    let mut reordered = 0;
    for e in &split.examples {
        let base = verdict(e);
        for k in 0..PERMUTATIONS as u64 {
            let p = shuffle_sentences(e, Stream::new(k).split(e.id.len() as u64).next_u64());
            reordered += usize::from(p.context != e.context);
            changed += usize::from(verdict(&p) != base);
        }
    }
    outcome(
        split.len() == PERMUTED_EXAMPLES && changed == 0 && reordered > 0,
        format!(
            "{} examples x {PERMUTATIONS} permutations ({reordered} reordered), {changed} changed verdicts",
            split.len()
        ),
    )
}

// ---------------------------------------------------------------------------
// 4. gradient check at d = 8, R = 3, L = 5

fn criterion_4() -> Outcome {
    let fx = gradient_fixture();
    let lengths: Vec<usize> = fx.context.iter().map(|s| tokenize(s).len()).collect();
    let shape_ok = GRAD_CHECK_HIDDEN == 8 && lengths == [5, 5, 5];
    let start = Instant::now();
    let mut parts = Vec::new();
    let mut pass = shape_ok;
    for v in [Variant::ImaSigmoid, Variant::ImaSoftmax, Variant::ImaGate] {
        let r = check_variant(v, GRAD_PROBES, 0).unwrap();
        pass &= r.probes.len() >= GRAD_PROBES && r.max_relative_error < GRAD_TOLERANCE;
        parts.push(format!(
            "{v} {:.2e} ({} probes)",
            r.max_relative_error,
            r.probes.len()
        ));
    }
    let t = start.elapsed();
    outcome(
        pass && t < GRAD_BUDGET,
        format!(
            "d={GRAD_CHECK_HIDDEN} R=3 L={lengths:?}: {}, {t:.2?}",
            parts.join(", ")
        ),
    )
}

// ---------------------------------------------------------------------------
// 5. softmax attention is a distribution at every iteration

fn criterion_5() -> Outcome {
    let spec = GenerationSpec::single_split(
        Scenario::all().to_vec(),
        &[2, 3, 4, 5],
        SplitName::Test,
        SOFTMAX_FORWARDS / 4,
        5,
    );
    let examples = generate_dataset(&spec)
        .unwrap()
        .remove(&SplitName::Test)
        .unwrap()
        .examples;
    let table = EmbeddingTable::bundled();
    let mut worst: f64 = 0.0;
    let mut rows = 0;
    let mut forwards = 0;
    for (k, e) in examples.iter().take(SOFTMAX_FORWARDS).enumerate() {
        let variant = if k % 2 == 0 {
            Variant::ImaSoftmax
        } else {
            Variant::ImaGate
        };
        let params = ModelParams::init(ModelConfig::with_variant(variant), k as u64);
        let p = forward(&params, &table, e).unwrap();
        assert_eq!(p.attention_trace.len(), params.config.iterations);
        for w in &p.attention_trace {
            assert_eq!(w.len(), e.context.len());
            worst = worst.max((w.iter().sum::<f64>() - 1.0).abs());
            rows += 1;
        }
        forwards += 1;
    }
    outcome(
        forwards == SOFTMAX_FORWARDS && worst <= SUM_TOLERANCE,
        format!("{forwards} forwards, {rows} iterations, max |sum - 1| = {worst:.2e}"),
    )
}

// ---------------------------------------------------------------------------
// 6-8. desk-scale training

struct Desk {
    train: DatasetSplit,
    dev: DatasetSplit,
    test: DatasetSplit,
}

fn desk_data() -> Desk {
    let scenario = Scenario {
        category: Category::People,
        negation_rules: false,
    };
    let mut spec =
        GenerationSpec::single_split(vec![scenario], &[2], SplitName::Train, TRAIN_EXAMPLES, 0);
    spec.counts.get_mut(&SplitName::Dev).unwrap().insert(2, 400);
    spec.counts
        .get_mut(&SplitName::Test)
        .unwrap()
        .insert(2, 1000);
    let mut d = generate_dataset(&spec).unwrap();
    Desk {
        train: d.remove(&SplitName::Train).unwrap(),
        dev: d.remove(&SplitName::Dev).unwrap(),
        test: d.remove(&SplitName::Test).unwrap(),
    }
}

struct Run {
    final_loss: f64,
    test_accuracy: f64,
    json: Vec<u8>,
    tsv: Vec<u8>,
    elapsed: Duration,
}

fn desk_run(variant: Variant, desk: &Desk, table: &EmbeddingTable, dir: &std::path::Path) -> Run {
    let config = TrainConfig {
        variant,
        epochs: EPOCHS,
        ..TrainConfig::default()
    };
    std::fs::create_dir_all(dir).unwrap();
    let start = Instant::now();
    let out = train(&config, table, &desk.train, &desk.dev).unwrap();
    let elapsed = start.elapsed();
    let m = evaluate(&out.model, &desk.test, 0.5).unwrap();
    let mut report = Report::with_history(&out.history);
    report.add("test", &m).note("config", &config);
    let (json, tsv) = emit_report(&report, dir.join(format!("{variant}.json"))).unwrap();
    Run {
        final_loss: *out.history.epoch_losses.last().unwrap(),
        test_accuracy: m.accuracy(),
        json: std::fs::read(json).unwrap(),
        tsv: std::fs::read(tsv).unwrap(),
        elapsed,
    }
}

fn untrained_accuracy(variant: Variant, desk: &Desk, table: &EmbeddingTable) -> f64 {
    let params = ModelParams::init(ModelConfig::with_variant(variant), 0);
    let model = TrainedModel {
        params,
        table: table.clone(),
    };
    evaluate(&model, &desk.test, 0.5).unwrap().accuracy()
}

fn criteria_6_to_8(dir: &std::path::Path) -> [Outcome; 3] {
    let desk = desk_data();
    let table = EmbeddingTable::bundled();
    let untrained = untrained_accuracy(Variant::ImaGate, &desk, &table);
    let baseline = untrained_accuracy(Variant::Baseline, &desk, &table);
    let near_chance = |a: f64| (a - CHANCE).abs() <= CHANCE_TOLERANCE;

    let a = desk_run(Variant::ImaGate, &desk, &table, &dir.join("run-a"));
    let c6 = outcome(
        a.test_accuracy >= TARGET_ACCURACY
            && a.elapsed <= TRAIN_BUDGET
            && near_chance(untrained)
            && near_chance(baseline),
        format!(
            "ima-gate on {} depth-2 examples, {EPOCHS} epochs: held-out accuracy {:.4} (target {TARGET_ACCURACY}), final loss {:.4}, {:.1?}; untrained {untrained:.4}, baseline {baseline:.4}",
            desk.train.len(),
            a.test_accuracy,
            a.final_loss,
            a.elapsed
        ),
    );

    let s = desk_run(Variant::ImaSigmoid, &desk, &table, &dir.join("run-a"));
    let mut both = Report::default();
    for (name, run) in [("ima-gate", &a), ("ima-sigmoid", &s)] {
        let r: Report = serde_json::from_slice(&run.json).unwrap();
        both.add(name, &r.conditions[0].metrics());
    }
    let diff = a.test_accuracy - s.test_accuracy;
    both.note("gate_minus_sigmoid", format!("{diff:+.4}"));
    let written = emit_report(&both, dir.join("variants.json")).is_ok();
    let c7 = outcome(
        written,
        format!(
            "report written; ima-gate {:.4} vs ima-sigmoid {:.4} ({:+.1} pp, informational)",
            a.test_accuracy,
            s.test_accuracy,
            100.0 * diff
        ),
    );

    let b = desk_run(Variant::ImaGate, &desk, &table, &dir.join("run-b"));
    let c8 = outcome(
        a.final_loss.to_bits() == b.final_loss.to_bits() && a.json == b.json && a.tsv == b.tsv,
        format!(
            "final losses {} / {}, reports {} / {} bytes, identical: {}",
            a.final_loss,
            b.final_loss,
            a.json.len() + a.tsv.len(),
            b.json.len() + b.tsv.len(),
            a.json == b.json && a.tsv == b.tsv
        ),
    );
    [c6, c7, c8]
}

// ---------------------------------------------------------------------------
// 9. full-size generation

fn criterion_9() -> Outcome {
    let spec = GenerationSpec::full_size(0);
    let start = Instant::now();
    let data = generate_dataset(&spec).unwrap();
    let t = start.elapsed();
    let mut mismatches = Vec::new();
    let mut total = 0;
    for (split, expected) in TABLE2_COUNTS {
        let mut per_depth: BTreeMap<u32, usize> = BTreeMap::new();
        for e in &data[&split].examples {
            *per_depth.entry(e.depth).or_default() += 1;
        }
        total += data[&split].len();
        for (d, n) in [2u32, 3, 4, 5].into_iter().zip(expected) {
            if per_depth.get(&d).copied().unwrap_or(0) != n {
                mismatches.push(format!("{} d{d}", split.as_str()));
            }
        }
    }
    outcome(
        mismatches.is_empty() && t < GENERATION_BUDGET,
        format!("{total} examples in {t:.1?}, count mismatches: {mismatches:?}"),
    )
}

#[test]
fn acceptance() {
    let dir = tempfile::tempdir().unwrap();
    let mut results: Vec<(usize, Outcome)> = Vec::new();
    let mut record = |n: usize, o: Outcome| {
        println!(
            "{} criterion {n}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        results.push((n, o));
    };
    record(1, criterion_1());
    record(2, criterion_2(dir.path()));
    record(3, criterion_3());
    record(4, criterion_4());
    record(5, criterion_5());
    let [c6, c7, c8] = criteria_6_to_8(dir.path());
    record(6, c6);
    record(7, c7);
    record(8, c8);
    record(9, criterion_9());
    let failed: Vec<usize> = results
        .iter()
        .filter(|(_, o)| !o.pass)
        .map(|(n, _)| *n)
        .collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
