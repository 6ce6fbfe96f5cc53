//! Acceptance suite. Runs every criterion in order, prints one PASS/FAIL
//! line each, then fails if any criterion failed.
//!
//! `cargo test -p lidar-cfe-cli --test acceptance -- --nocapture`

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use lidar_cfe::cfe::{decode_genome, fitness_for_query, hinge_loss, ActionBounds, CfeQuery, SizeLimits};
use lidar_cfe::ga::{run_ga, run_ga_from, FitnessFn, GaConfig, GaRng, Genome, StopCriteria};
use lidar_cfe::geometry::{ray_heading, raycast_scan, ObstacleShape, Point2};
use lidar_cfe::model::{
    scripted_policy, BridgeConfig, ExternalPolicy, LayerSpec, ModelError, Network, NetworkSpec, PolicyModel,
    ScriptedKind, ScriptedParams,
};
use lidar_cfe::scan::{assemble_state, combine_gen_priority, combine_min_distance, GoalFeatures, Scan};
use lidar_cfe_cli::model_spec::{ModelShape, ModelSpec};
use lidar_cfe_cli::results::ResultsFile;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::{hinge_oracle, march, naive_forward, random_scene, sdf, NaiveLayer};

const CLI: &str = env!("CARGO_BIN_EXE_lidar-cfe");
const BRIDGE: &str = env!("CARGO_BIN_EXE_bridge-ref");

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

/// Results files written by the runs, re-checked by criterion 8.
#[derive(Default)]
struct Produced {
    results: Vec<PathBuf>,
}

fn run_cli(args: &[&str]) -> (std::process::Output, Duration) {
    let start = Instant::now();
    let out = Command::new(CLI).args(args).env("RUST_LOG", "error").output().expect("cli runs");
    (out, start.elapsed())
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn raycast_oracle() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut worst, mut bad, mut checked) = (0.0f64, 0usize, 0usize);
    for _ in 0..1000 {
        let scene = random_scene(&mut rng, 5, 3.5);
        let scan = raycast_scan(Point2::ORIGIN, &scene, 180, 3.5).unwrap();
        for (i, &d) in scan.readings().iter().enumerate() {
            let err = (d - march(&scene, ray_heading(i, 180), 3.5, 1e-3)).abs();
            worst = worst.max(err);
            bad += usize::from(err > 2e-3);
            checked += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        bad == 0 && secs < 60.0,
        format!("{checked} readings, {bad} beyond 2e-3 m, max error {worst:.2e} m, {secs:.1} s"),
    )
}

fn random_scan(rng: &mut ChaCha8Rng) -> Scan {
    let readings = (0..180)
        .map(|_| if rng.random_bool(0.3) { 3.5 } else { 3.5 * (1.0 - rng.random::<f64>()) })
        .collect();
    Scan::new(readings, 3.5).unwrap()
}

fn combination_laws() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let empty = Scan::empty(180, 3.5);
    let mut violations = 0usize;
    for _ in 0..10_000 {
        let b = random_scan(&mut rng);
        let mut c = random_scan(&mut rng).into_readings();
        // shared values exercise ties
        for (ci, &bi) in c.iter_mut().zip(b.readings()) {
            if rng.random_bool(0.1) {
                *ci = bi;
            }
        }
        let c = Scan::new(c, 3.5).unwrap();
        let min = combine_min_distance(&b, &c).unwrap();
        let pri = combine_gen_priority(&b, &c).unwrap();
        for i in 0..180 {
            let (bi, ci) = (b.readings()[i], c.readings()[i]);
            let expect_min = if bi <= ci { bi } else { ci };
            let expect_pri = if ci < 3.5 { ci } else { bi };
            violations += usize::from(min.readings()[i] != expect_min);
            violations += usize::from(pri.readings()[i] != expect_pri);
        }
        violations += usize::from(combine_min_distance(&min, &c).unwrap() != min);
        violations += usize::from(combine_gen_priority(&pri, &c).unwrap() != pri);
        violations += usize::from(combine_min_distance(&b, &b).unwrap() != b);
        violations += usize::from(combine_gen_priority(&b, &b).unwrap() != b);
        violations += usize::from(combine_min_distance(&b, &empty).unwrap() != b);
        violations += usize::from(combine_gen_priority(&b, &empty).unwrap() != b);
    }
    verdict(violations == 0, format!("10000 scan pairs, {violations} violations"))
}

fn hinge_correctness() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut mismatches, mut on_boundary) = (0usize, 0usize);
    for _ in 0..100_000 {
        let dims = rng.random_range(1..=3);
        let mut bounds = Vec::with_capacity(dims);
        let mut action = Vec::with_capacity(dims);
        for _ in 0..dims {
            let (a, b) = (rng.random_range(-1.0..=1.0f64), rng.random_range(-1.0..=1.0f64));
            let (lo, hi) = if rng.random_bool(0.05) { (a, a) } else { (a.min(b), a.max(b)) };
            let y = match rng.random_range(0..5) {
                0 => lo,
                1 => hi,
                _ => rng.random_range(-1.0..=1.0),
            };
            on_boundary += usize::from(y == lo || y == hi);
            bounds.push([lo, hi]);
            action.push(y);
        }
        let got = hinge_loss(&action, &ActionBounds::new(bounds.clone()).unwrap()).unwrap();
        mismatches += usize::from(got != hinge_oracle(&action, &bounds));
    }
    verdict(
        mismatches == 0,
        format!("100000 pairs ({on_boundary} boundary components), {mismatches} mismatches"),
    )
}

fn naive_layers(net: &Network) -> Vec<NaiveLayer> {
    net.spec()
        .layers
        .iter()
        .zip(net.params())
        .map(|(l, p)| match *l {
            LayerSpec::Conv1d { in_channels, out_channels, kernel, stride, padding, circular } => NaiveLayer::Conv {
                w: (0..out_channels)
                    .map(|o| (0..in_channels).map(|c| p.weights[(o * in_channels + c) * kernel..][..kernel].to_vec()).collect())
                    .collect(),
                b: p.bias.clone(),
                stride,
                padding,
                circular,
            },
            LayerSpec::Dense { inputs, .. } => {
                NaiveLayer::Dense { w: p.weights.chunks(inputs).map(<[f64]>::to_vec).collect(), b: p.bias.clone() }
            }
            LayerSpec::Relu => NaiveLayer::Relu,
            LayerSpec::Tanh => NaiveLayer::Tanh,
        })
        .collect()
}

fn network_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let (mut worst, mut rotation_checks, mut rotation_fail) = (0.0f64, 0usize, 0usize);
    for seed in 0..200u64 {
        let lidar = rng.random_range(12..48);
        let extra = rng.random_range(0..=3);
        let mut layers = Vec::new();
        let (mut ch, mut len) = (1, lidar);
        for _ in 0..rng.random_range(0..=2) {
            let kernel = 2 * rng.random_range(0..=2usize) + 1;
            let stride = rng.random_range(1..=2);
            let out = rng.random_range(1..=3);
            layers.push(LayerSpec::Conv1d {
                in_channels: ch,
                out_channels: out,
                kernel,
                stride,
                padding: kernel / 2,
                circular: rng.random_bool(0.7),
            });
            layers.push(LayerSpec::Relu);
            len = (len - 1) / stride + 1;
            ch = out;
        }
        let mut inputs = ch * len + extra;
        let n_dense = rng.random_range(1..=2);
        for i in 0..n_dense {
            let outputs = rng.random_range(1..=5);
            layers.push(LayerSpec::Dense { inputs, outputs });
            layers.push(if i + 1 == n_dense { LayerSpec::Tanh } else { LayerSpec::Relu });
            inputs = outputs;
        }
        let spec = NetworkSpec { lidar_inputs: lidar, extra_inputs: extra, layers };
        let net = Network::random(spec.clone(), seed, 0.6).unwrap();
        let x: Vec<f64> = (0..spec.input_len()).map(|_| rng.random()).collect();
        let fast = net.forward(&x).unwrap();
        let slow = naive_forward(&naive_layers(&net), &x[..lidar], &x[lidar..]);
        if fast.len() != slow.len() {
            return verdict(false, format!("net {seed}: output length {} vs {}", fast.len(), slow.len()));
        }
        worst = fast.iter().zip(&slow).map(|(a, b)| (a - b).abs()).fold(worst, f64::max);

        // every stride-1 circular conv layer, run alone, commutes with rotation
        let mut len = lidar;
        for (layer, p) in spec.layers.iter().zip(net.params()) {
            if let LayerSpec::Conv1d { in_channels, out_channels, kernel, stride, padding, circular } = *layer {
                if stride == 1 && circular && in_channels == 1 {
                    let single = NetworkSpec { lidar_inputs: len, extra_inputs: 0, layers: vec![layer.clone()] };
                    let alone = Network::new(single, vec![p.clone()]).unwrap();
                    let v: Vec<f64> = (0..len).map(|_| rng.random()).collect();
                    let shift = rng.random_range(1..len);
                    let mut rolled = v.clone();
                    rolled.rotate_right(shift);
                    let (y, yr) = (alone.forward(&v).unwrap(), alone.forward(&rolled).unwrap());
                    for o in 0..out_channels {
                        let mut expect = y[o * len..][..len].to_vec();
                        expect.rotate_right(shift);
                        rotation_fail +=
                            expect.iter().zip(&yr[o * len..][..len]).filter(|(a, b)| (*a - *b).abs() > 1e-12).count();
                    }
                    rotation_checks += 1;
                }
                len = (len + 2 * padding - kernel) / stride + 1;
            }
        }
    }
    verdict(
        worst <= 1e-6 && rotation_fail == 0 && rotation_checks > 0,
        format!("200 nets, max |diff| {worst:.1e}; {rotation_checks} stride-1 circular layers, {rotation_fail} rotation mismatches"),
    )
}

fn ga_engine() -> Verdict {
    let objective = |g: &[f64]| -g.iter().map(|x| (x - 0.5).abs()).sum::<f64>();
    let mut broken = Vec::new();
    for seed in 0..50 {
        let config = GaConfig { rng_seed: seed, ..Default::default() };
        let run = run_ga(&config, 6, &objective).unwrap();
        if !run.trace.windows(2).all(|w| w[0] <= w[1]) {
            broken.push(format!("seed {seed}: trace decreases"));
        }
        if run.population.len() != config.population || run.fitness.len() != config.population {
            broken.push(format!("seed {seed}: population size"));
        }
        if !run.population.iter().flat_map(|g| g.genes()).all(|x| (0.0..=1.0).contains(x)) {
            broken.push(format!("seed {seed}: gene outside [0, 1]"));
        }
        if run != run_ga(&config, 6, &objective).unwrap() {
            broken.push(format!("seed {seed}: not reproducible"));
        }
    }
    let reached = |stop: StopCriteria| {
        (0..100)
            .filter(|&s| {
                let config = GaConfig { rng_seed: s, stop: stop.clone(), ..Default::default() };
                let run = run_ga(&config, 6, &objective).unwrap();
                run.trace.len() <= 100 && run.best_fitness >= -0.05
            })
            .count()
    };
    let capped = reached(StopCriteria { saturate: None, reach_zero: true });
    let with_saturate = reached(StopCriteria::default());
    verdict(
        broken.is_empty() && capped >= 95,
        format!(
            "50 runs: {} invariant breaks; {capped}/100 within 0.05 under the 100-generation cap ({with_saturate}/100 with saturate_10 also on){}",
            broken.len(),
            broken.first().map(|b| format!("; first: {b}")).unwrap_or_default()
        ),
    )
}

/// Does the shape meet the forward ±30° sector of radius `r`? Dense polar
/// sampling of the sector.
fn meets_front_sector(shape: &ObstacleShape, r: f64) -> bool {
    let half = 30f64.to_radians();
    (0..=600).any(|a| {
        let h = -half + 2.0 * half * a as f64 / 600.0;
        let (s, c) = h.sin_cos();
        (1..=600).any(|k| {
            let d = r * k as f64 / 600.0;
            sdf(shape, (d * c, d * s)) <= 0.0
        })
    })
}

fn case1(dir: &Path, produced: &mut Produced) -> Verdict {
    write(dir, "empty.toml", "name = \"empty\"\ngoal = [2.0, 0.0]\n");
    let query = write(
        dir,
        "case1.toml",
        "scenario = \"empty.toml\"\nbounds = [[-1.0, 0.0], [-0.2, 0.2]]\ncombination = \"min_distance\"\n\
         lambda_y = 1.0\nlambda_p = 0.0\nn_obstacles = 5\nn_cfes = 10\nseed = 0\n",
    );
    let out = dir.join("case1");
    let (o, elapsed) =
        run_cli(&["explain", query.to_str().unwrap(), "--model", "scripted:goal_seeker", "--out", out.to_str().unwrap()]);
    if !o.status.success() {
        return verdict(false, format!("explain failed: {}", String::from_utf8_lossy(&o.stderr)));
    }
    let results_path = out.join("results.json");
    produced.results.push(results_path.clone());
    let file = ResultsFile::load(&results_path).unwrap();
    let satisfied: Vec<_> = file.results.iter().filter(|r| r.satisfied).collect();
    let in_cone = satisfied.iter().filter(|r| r.obstacles.iter().any(|s| meets_front_sector(s, 1.5))).count();
    let secs = elapsed.as_secs_f64();
    verdict(
        file.results.len() == 10 && satisfied.len() >= 8 && in_cone == satisfied.len() && secs <= 60.0,
        format!(
            "{}/{} satisfied, {in_cone}/{} with an obstacle in the forward cone within 1.5 m, {secs:.2} s (budget 60 s)",
            satisfied.len(),
            file.results.len(),
            satisfied.len()
        ),
    )
}

fn case3(dir: &Path, produced: &mut Produced) -> Verdict {
    write(
        dir,
        "box.toml",
        "name = \"box\"\ngoal = [3.4, 0.0]\n[[obstacles]]\nkind = \"rectangle\"\ncenter = [2.75, 0.0]\nhalf_extents = [0.25, 0.5]\n",
    );
    let query = write(
        dir,
        "case3.toml",
        "scenario = \"box.toml\"\nbounds = [[0.9, 1.0], [-1.0, -0.5]]\ncombination = \"min_distance\"\n\
         lambda_y = 1.0\nlambda_p = 0.1\nn_obstacles = 1\nn_cfes = 100\nseed = 0\n",
    );
    let out = dir.join("case3");
    let (o, _) = run_cli(&[
        "explain",
        query.to_str().unwrap(),
        "--model",
        "scripted:left_preferrer",
        "--out",
        out.to_str().unwrap(),
        "--no-plots",
    ]);
    if !o.status.success() {
        return verdict(false, format!("explain failed: {}", String::from_utf8_lossy(&o.stderr)));
    }
    let results_path = out.join("results.json");
    produced.results.push(results_path.clone());
    let file = ResultsFile::load(&results_path).unwrap();
    let satisfied: Vec<_> = file.results.iter().filter(|r| r.satisfied).collect();
    let left = satisfied.iter().filter(|r| r.obstacles[0].center().y > 0.0).count();
    let pct = if satisfied.is_empty() { 0.0 } else { 100.0 * left as f64 / satisfied.len() as f64 };
    verdict(
        file.results.len() == 100 && !satisfied.is_empty() && left * 100 >= satisfied.len() * 95,
        format!("{} results, {} satisfied, {left} with the centroid left ({pct:.1}%, need 95%)", file.results.len(), satisfied.len()),
    )
}

fn bridge_explain(dir: &Path, produced: &mut Produced) -> Result<(), String> {
    let query = write(
        dir,
        "bridge_query.toml",
        "scenario = \"empty.toml\"\nbounds = [[-1.0, 1.0], [-1.0, 1.0]]\nn_obstacles = 2\nn_cfes = 3\nseed = 4\n[ga]\ngenerations = 5\n",
    );
    let out = dir.join("bridge_run");
    let model = format!("exec:{BRIDGE} --mode rule");
    let (o, _) = run_cli(&["explain", query.to_str().unwrap(), "--model", &model, "--out", out.to_str().unwrap(), "--no-plots"]);
    if !o.status.success() {
        return Err(String::from_utf8_lossy(&o.stderr).into_owned());
    }
    produced.results.push(out.join("results.json"));
    Ok(())
}

fn self_verification(produced: &Produced) -> Verdict {
    let mut discrepancies = Vec::new();
    let mut checked = 0usize;
    for path in &produced.results {
        let file = match ResultsFile::load(path) {
            Ok(f) => f,
            Err(e) => {
                discrepancies.push(format!("{}: {e}", path.display()));
                continue;
            }
        };
        let q = &file.query;
        let spec: ModelSpec = file.model.spec.parse().unwrap();
        let shape = ModelShape {
            n_rays: q.base_scan.len(),
            max_range: q.base_scan.max_range(),
            outputs: q.bounds.len(),
            timeout: Duration::from_secs(5),
        };
        let model = spec.load(shape).unwrap().model;
        for r in &file.results {
            checked += 1;
            let state = assemble_state(&r.combined_scan, &q.goal, q.d_g_max);
            let action = model.act(&state).unwrap();
            if action.values() != r.achieved_action.values() {
                discrepancies.push(format!("{} run {}: action differs", path.display(), r.run_index));
            }
            let inside = r
                .achieved_action
                .values()
                .iter()
                .zip(q.bounds.dims())
                .all(|(y, [lo, hi])| lo <= y && y <= hi);
            if inside != r.satisfied {
                discrepancies.push(format!("{} run {}: satisfied flag", path.display(), r.run_index));
            }
        }
    }
    verdict(
        discrepancies.is_empty() && checked > 0,
        format!(
            "{} files, {checked} results, {} discrepancies{}",
            produced.results.len(),
            discrepancies.len(),
            discrepancies.first().map(|d| format!("; first: {d}")).unwrap_or_default()
        ),
    )
}

fn d_min_guard() -> Verdict {
    let model = scripted_policy(ScriptedKind::GoalSeeker, ScriptedParams::default()).unwrap();
    let bounds = ActionBounds::new(vec![[-1.0, 0.0], [-0.2, 0.2]]).unwrap();
    let query = CfeQuery::new(Scan::empty(180, 3.5), GoalFeatures::from_bearing(0.0, 2.0).unwrap(), bounds);
    let fitness = fitness_for_query(&query, &model).unwrap();
    let mut rng = GaRng::seed_from_u64(99);
    let (mut not_sentinel, mut oracle_disagrees, mut elite_hits) = (0usize, 0usize, 0usize);
    let mut infeasible = Vec::new();
    for _ in 0..1000 {
        let mut genes = Genome::random(30, &mut rng).into_genes();
        let slot = rng.random_range(0..5);
        // center within d_min/√2 of the sensor on both axes
        genes[slot * 6 + 1] = 0.5 + rng.random_range(-0.02..0.02);
        genes[slot * 6 + 2] = 0.5 + rng.random_range(-0.02..0.02);
        let shapes = decode_genome(&genes, 5, 3.5, SizeLimits::default()).unwrap();
        oracle_disagrees += usize::from(sdf(&shapes[slot], (0.0, 0.0)) > query.d_min);
        not_sentinel += usize::from(fitness.evaluate(&genes).unwrap() != f64::NEG_INFINITY);
        infeasible.push(Genome::new(genes).unwrap());
    }
    // seed GA populations half with these genomes and check the survivors
    let config = GaConfig { generations: 20, ..Default::default() };
    for (run, chunk) in infeasible.chunks(50).enumerate() {
        let mut init: Vec<Genome> = chunk.to_vec();
        while init.len() < config.population {
            init.push(Genome::random(30, &mut rng));
        }
        let ga = GaConfig { rng_seed: run as u64, ..config.clone() };
        let result = run_ga_from(&ga, init, &fitness).unwrap();
        let mut order: Vec<usize> = (0..result.fitness.len()).collect();
        order.sort_by(|&a, &b| result.fitness[b].total_cmp(&result.fitness[a]));
        elite_hits += order[..ga.keep_parents].iter().filter(|&&i| result.fitness[i] == f64::NEG_INFINITY).count();
        elite_hits += usize::from(result.trace.contains(&f64::NEG_INFINITY));
        elite_hits += usize::from(chunk.contains(&result.best));
    }
    verdict(
        not_sentinel == 0 && oracle_disagrees == 0 && elite_hits == 0,
        format!(
            "1000 genomes: {not_sentinel} without the -inf sentinel, {oracle_disagrees} not overlapping per oracle; 20 seeded GA runs: {elite_hits} infeasible elites"
        ),
    )
}

fn bridge_protocol(dir: &Path) -> Verdict {
    let mut notes = Vec::new();
    let mut ok = true;
    let cmd = |mode: &str| format!("{BRIDGE} --mode {mode}");
    let state = assemble_state(
        &raycast_scan(Point2::ORIGIN, &random_scene(&mut ChaCha8Rng::seed_from_u64(1), 3, 3.0), 180, 3.5).unwrap(),
        &GoalFeatures::from_bearing(0.7, 2.0).unwrap(),
        9.9,
    );

    // handshake
    let good = ExternalPolicy::spawn(BridgeConfig::new(cmd("rule"), 183, 2));
    let bad_arity = ExternalPolicy::spawn(BridgeConfig::new(cmd("bad-hello"), 183, 2));
    let mismatch = ExternalPolicy::spawn(BridgeConfig::new(cmd("rule"), 183, 3));
    let (o, _) = run_cli(&["validate-model", "--model", &format!("exec:{}", cmd("bad-hello"))]);
    let handshake = good.is_ok()
        && matches!(bad_arity, Err(ModelError::Handshake(_)))
        && matches!(mismatch, Err(ModelError::Handshake(_)))
        && o.status.code() == Some(3);
    ok &= handshake;
    notes.push(format!("handshake {}", if handshake { "ok" } else { "FAILED" }));

    // normal operation: replies equal the reference rule computed here
    let normal = match good {
        Ok(policy) => {
            let v = state.values();
            let mean = v[..180].iter().sum::<f64>() / 180.0;
            let expect = [(2.0 * mean - 1.0).clamp(-1.0, 1.0), (2.0 * v[181] - 1.0).clamp(-1.0, 1.0)];
            (0..3).all(|_| policy.act(&state).map(|a| a.values() == expect).unwrap_or(false))
                && bridge_explain(dir, &mut Produced::default()).is_ok()
        }
        Err(_) => false,
    };
    ok &= normal;
    notes.push(format!("normal {}", if normal { "ok" } else { "FAILED" }));

    // malformed reply: error, then the process is not reused
    let malformed = match ExternalPolicy::spawn(BridgeConfig::new(cmd("malformed"), 183, 2)) {
        Ok(p) => matches!(p.act(&state), Err(ModelError::Malformed { .. })) && matches!(p.act(&state), Err(ModelError::Exited)),
        Err(_) => false,
    };
    ok &= malformed;
    notes.push(format!("malformed {}", if malformed { "ok" } else { "FAILED" }));

    // timeout: a hung process fails the call within the configured limit
    let timeout = match ExternalPolicy::spawn(BridgeConfig { timeout: Duration::from_millis(300), ..BridgeConfig::new(cmd("hang"), 183, 2) }) {
        Ok(p) => {
            let start = Instant::now();
            let r = p.act(&state);
            let took = start.elapsed();
            matches!(r, Err(ModelError::Timeout(_))) && took >= Duration::from_millis(300) && took < Duration::from_secs(3)
        }
        Err(_) => false,
    };
    ok &= timeout;
    notes.push(format!("timeout {}", if timeout { "ok" } else { "FAILED" }));

    let died = match ExternalPolicy::spawn(BridgeConfig::new(cmd("die"), 183, 2)) {
        Ok(p) => matches!(p.act(&state), Err(ModelError::Exited | ModelError::Io(_))),
        Err(_) => false,
    };
    notes.push(format!("exit {}", if died { "ok" } else { "FAILED" }));
    verdict(ok && died, notes.join(", "))
}

#[test]
fn acceptance() {
    let dir = tempfile::tempdir().unwrap();
    let mut produced = Produced::default();
    let mut lines = Vec::new();
    let mut record = |n: usize, name: &str, v: Verdict| {
        let line = format!("[{}] {n:>2} {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        let _ = writeln!(std::io::stdout().lock(), "{line}");
        lines.push((v.pass, line));
    };
    record(1, "raycast oracle equivalence", raycast_oracle());
    record(2, "combination-operator laws", combination_laws());
    record(3, "hinge-loss correctness", hinge_correctness());
    record(4, "network-inference oracle", network_oracle());
    record(5, "GA engine", ga_engine());
    record(6, "case-1 analog", case1(dir.path(), &mut produced));
    record(7, "case-3 analog", case3(dir.path(), &mut produced));
    if let Err(e) = bridge_explain(dir.path(), &mut produced) {
        let _ = writeln!(std::io::stdout().lock(), "bridge-backed explain failed: {e}");
    }
    record(8, "self-verification", self_verification(&produced));
    record(9, "d_min guard", d_min_guard());
    record(10, "bridge protocol conformance", bridge_protocol(dir.path()));
    let failed: Vec<_> = lines.iter().filter(|(pass, _)| !pass).map(|(_, l)| l.as_str()).collect();
    assert!(failed.is_empty(), "failed criteria:\n{}", failed.join("\n"));
}
